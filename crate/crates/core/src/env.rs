//! The training/evaluation environment: world dynamics plus observations,
//! estimator proxies and per-variant rewards.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::avoidance::{potential_field_avoidance, AvoidanceConfig};
use crate::geometry::{project_skeleton, wrap_angle, SkeletonProjection, TriangulatedSkeleton};
use crate::perception::{
    build_observation, monocular_from_projection, multiview_pose_estimate, noise_rng,
    MonocularPoseEstimate, NoiseConfig, NoiseStream, PerceptionError,
};
use crate::rewards::{compose, RewardBreakdown, RewardConfig, RewardError, RewardInputs};
use crate::variant::NetworkVariant;
use crate::world::{
    reset_episode, reset_with_plan, step_env, Action, StepEvents, WalkPlan, WorldConfig,
    WorldError, WorldState,
};

/// Positions in the critic state are divided by this many meters.
pub const STATE_POSITION_SCALE: f64 = 10.0;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Reward(#[from] RewardError),
    #[error(transparent)]
    Perception(#[from] PerceptionError),
    #[error("variant {variant} needs {expected} agent(s), world has {got}")]
    AgentCount {
        variant: NetworkVariant,
        expected: usize,
        got: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvConfig {
    pub world: WorldConfig,
    pub noise: NoiseConfig,
    pub reward: RewardConfig,
    pub avoidance: AvoidanceConfig,
}

impl EnvConfig {
    /// World settings implied by the variant (agent count, static subject).
    pub fn world_for(&self, variant: NetworkVariant) -> WorldConfig {
        let mut w = self.world;
        w.agents = variant.agents();
        w.actor.static_subject = variant.static_subject() || w.actor.static_subject;
        w
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        self.world.validate()?;
        self.reward.validate()?;
        Ok(())
    }
}

/// What the estimators saw after a transition.
#[derive(Debug, Clone, PartialEq)]
pub struct StepPerception {
    pub projections: Vec<SkeletonProjection>,
    pub monocular: Vec<MonocularPoseEstimate>,
    /// Two-view estimate; all joints invalid when the geometry is degenerate.
    pub multiview: Option<TriangulatedSkeleton>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvStep {
    pub actions: Vec<Action>,
    pub events: StepEvents,
    pub rewards: Vec<RewardBreakdown>,
    pub perception: StepPerception,
}

#[derive(Debug, Clone)]
pub struct MocapEnv {
    variant: NetworkVariant,
    config: EnvConfig,
    world: WorldState,
}

impl MocapEnv {
    pub fn reset(variant: NetworkVariant, config: &EnvConfig, seed: u64) -> Result<Self, EnvError> {
        config.reward.validate()?;
        let world = reset_episode(&config.world_for(variant), seed)?;
        Self::from_world(variant, config, world)
    }

    pub fn reset_with_plan(
        variant: NetworkVariant,
        config: &EnvConfig,
        plan: WalkPlan,
        seed: u64,
    ) -> Result<Self, EnvError> {
        config.reward.validate()?;
        let world = reset_with_plan(&config.world_for(variant), plan, seed)?;
        Self::from_world(variant, config, world)
    }

    pub fn from_world(
        variant: NetworkVariant,
        config: &EnvConfig,
        world: WorldState,
    ) -> Result<Self, EnvError> {
        if world.agent_count() != variant.agents() {
            return Err(EnvError::AgentCount {
                variant,
                expected: variant.agents(),
                got: world.agent_count(),
            });
        }
        let mut config = *config;
        config.world = world.config;
        Ok(Self {
            variant,
            config,
            world,
        })
    }

    pub fn variant(&self) -> NetworkVariant {
        self.variant
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn world(&self) -> &WorldState {
        &self.world
    }

    pub fn observation(&self, agent: usize) -> Result<Vec<f64>, EnvError> {
        Ok(build_observation(&self.world, agent, self.variant.observation_layout())?.to_vec())
    }

    pub fn state_dim(variant: NetworkVariant) -> usize {
        5 * variant.agents() + 6
    }

    /// Full-state critic input for `agent`: own pose first, then the
    /// neighbor, the subject and the episode progress.
    pub fn critic_state(&self, agent: usize) -> Vec<f64> {
        let w = &self.world;
        let mut s = Vec::with_capacity(Self::state_dim(self.variant));
        let order = if agent == 0 { [0, 1] } else { [1, 0] };
        for k in order.into_iter().take(w.agent_count()) {
            let m = &w.mavs[k];
            s.extend(m.position.iter().map(|x| x / STATE_POSITION_SCALE));
            s.push(m.yaw.sin());
            s.push(m.yaw.cos());
        }
        s.extend(w.person.root.iter().map(|x| x / STATE_POSITION_SCALE));
        s.push(w.person.yaw.sin());
        s.push(w.person.yaw.cos());
        s.push(w.step as f64 / w.config.episode_steps as f64);
        s
    }

    /// Converts raw policy outputs to commands. Variants without yaw control
    /// get a yaw rate that turns the MAV toward the subject.
    pub fn policy_actions(&self, raw: &[Vec<f64>]) -> Vec<Action> {
        let cfg = &self.world.config;
        raw.iter()
            .enumerate()
            .map(|(k, r)| {
                let mut a = Action::from_normalized(r, cfg.v_max, cfg.omega_max);
                if !self.variant.yaw_control() {
                    a.yaw_rate = self.facing_yaw_rate(k);
                }
                a
            })
            .collect()
    }

    /// Yaw rate that points agent `k` at the subject within one step, if feasible.
    pub fn facing_yaw_rate(&self, k: usize) -> f64 {
        let cfg = &self.world.config;
        let m = &self.world.mavs[k];
        let to = self.world.person.root - m.position;
        let err = wrap_angle(to.y.atan2(to.x) - m.yaw);
        (err / cfg.dt).clamp(-cfg.omega_max, cfg.omega_max)
    }

    pub fn step_policy(&mut self, raw: &[Vec<f64>]) -> Result<EnvStep, EnvError> {
        let actions = self.policy_actions(raw);
        self.step(&actions)
    }

    pub fn step(&mut self, actions: &[Action]) -> Result<EnvStep, EnvError> {
        let actions = if self.variant.potential_field() {
            potential_field_avoidance(actions, &self.world, &self.config.avoidance)
        } else {
            actions.to_vec()
        };
        let events = step_env(&mut self.world, &actions)?;
        let perception = self.perceive();
        let rewards = self.rewards(&events, &perception)?;
        Ok(EnvStep {
            actions,
            events,
            rewards,
            perception,
        })
    }

    pub fn perceive(&self) -> StepPerception {
        let w = &self.world;
        let noise = &self.config.noise;
        let projections: Vec<SkeletonProjection> = w
            .mavs
            .iter()
            .map(|m| project_skeleton(&w.person.joints, &m.camera_view()))
            .collect();
        let monocular = projections
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let mut rng = noise_rng(w.seed, w.step, k, NoiseStream::Monocular);
                monocular_from_projection(w, k, p, noise, &mut rng)
            })
            .collect();
        let multiview = (w.agent_count() == 2).then(|| {
            multiview_pose_estimate(w, 0, 1, noise)
                .unwrap_or_else(|_| TriangulatedSkeleton::invalid())
        });
        StepPerception {
            projections,
            monocular,
            multiview,
        }
    }

    fn rewards(
        &self,
        events: &StepEvents,
        perception: &StepPerception,
    ) -> Result<Vec<RewardBreakdown>, EnvError> {
        let w = &self.world;
        (0..w.agent_count())
            .map(|k| {
                let inputs = RewardInputs {
                    bbox: perception.projections[k].bbox,
                    camera: w.mavs[k].camera,
                    truth: &w.person.joints,
                    monocular: (!self.variant.is_multi_agent()).then(|| &perception.monocular[k]),
                    multiview: perception.multiview.as_ref(),
                    neighbor_distance: events.inter_mav_distance,
                    workspace_violation: events.workspace_violation[k],
                };
                Ok(compose(self.variant, &inputs, &self.config.reward)?)
            })
            .collect()
    }
}
