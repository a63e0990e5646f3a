//! Multi-run evaluation on the fixed walk: per-step error and visibility logs.

use std::fmt;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::baselines::{viewing_altitude, BaselineConfig, Strategy};
use super::HarnessError;
use crate::env::{EnvConfig, EnvStep, MocapEnv};
use crate::geometry::Vec3;
use crate::perception::{mean_joint_error, valid_joint_error};
use crate::replay::ReplayRecord;
use crate::rewards::center_distance_px;
use crate::rl::policy::GaussianPolicy;
use crate::rl::rollout::parallel_map;
use crate::variant::NetworkVariant;
use crate::world::{with_mavs, MavState, WalkPlan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Pixel distance of the box center from the image center, visible steps only.
    Cpe,
    /// 1 when the subject is at least partially in view, else 0.
    Visible,
    MpeMono,
    MpeTriag,
    InterMavDistance,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Cpe,
        Metric::Visible,
        Metric::MpeMono,
        Metric::MpeTriag,
        Metric::InterMavDistance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Cpe => "cpe",
            Metric::Visible => "visible",
            Metric::MpeMono => "mpe_mono",
            Metric::MpeTriag => "mpe_triag",
            Metric::InterMavDistance => "inter_mav_distance",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which agent a row belongs to; `All` rows describe the team.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AgentTag {
    Agent(usize),
    All,
}

impl fmt::Display for AgentTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgentTag::Agent(k) => write!(f, "{k}"),
            AgentTag::All => f.write_str("all"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub run: usize,
    pub step: u64,
    pub agent: AgentTag,
    pub metric: Metric,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricsReport {
    pub label: String,
    pub runs: usize,
    pub agents: usize,
    pub rows: Vec<MetricRow>,
}

impl MetricsReport {
    pub fn values(&self, metric: Metric, run: Option<usize>, agent: Option<AgentTag>) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| {
                r.metric == metric
                    && run.is_none_or(|k| r.run == k)
                    && agent.is_none_or(|a| r.agent == a)
            })
            .map(|r| r.value)
            .collect()
    }

    /// Fraction of steps with the subject in at least one agent's view.
    pub fn visibility_fraction(&self, run: Option<usize>) -> Option<f64> {
        let tag = if self.agents > 1 {
            AgentTag::All
        } else {
            AgentTag::Agent(0)
        };
        let v = self.values(Metric::Visible, run, Some(tag));
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }

    pub fn min_inter_mav_distance(&self, run: Option<usize>) -> Option<f64> {
        self.values(Metric::InterMavDistance, run, None)
            .into_iter()
            .reduce(f64::min)
    }
}

/// What moves the MAVs during evaluation.
#[derive(Debug, Clone, Copy)]
pub enum Controller<'a> {
    /// Deterministic mean action of a trained policy.
    Policy(&'a GaussianPolicy),
    Strategy(Strategy, BaselineConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub runs: usize,
    pub duration_s: f64,
    pub seeds: Vec<u64>,
    pub plan: WalkPlan,
}

impl EvalConfig {
    /// `runs` seeds drawn from `base`.
    pub fn seeded(runs: usize, duration_s: f64, base: u64, plan: WalkPlan) -> Self {
        let mut r = ChaCha8Rng::seed_from_u64(base);
        Self {
            runs,
            duration_s,
            seeds: (0..runs).map(|_| r.next_u64()).collect(),
            plan,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.runs == 0 {
            return Err(HarnessError::Config("run count must be at least 1".into()));
        }
        if !(self.duration_s > 0.0) {
            return Err(HarnessError::Config("duration must be positive".into()));
        }
        if self.seeds.len() < self.runs {
            return Err(HarnessError::Config(format!(
                "{} runs need {} seeds, got {}",
                self.runs,
                self.runs,
                self.seeds.len()
            )));
        }
        Ok(())
    }
}

/// MAVs on the strategy circle around the subject's start, `k * 90` degrees
/// apart from a seeded angle, facing the subject.
pub fn strategy_spawn(
    variant: NetworkVariant,
    env: &EnvConfig,
    plan: WalkPlan,
    radius: f64,
    seed: u64,
) -> Result<MocapEnv, HarnessError> {
    let wc = env.world_for(variant);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta0 = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    let probe = with_mavs(
        &wc,
        plan.clone(),
        vec![MavState::at_rest(Vec3::zeros(), 0.0, wc.camera); wc.agents],
        seed,
    )?;
    let z = viewing_altitude(&probe, 0, radius);
    let c = probe.person.root;
    let mavs = (0..wc.agents)
        .map(|k| {
            let th = theta0 + k as f64 * std::f64::consts::FRAC_PI_2;
            let p = Vec3::new(c.x + radius * th.cos(), c.y + radius * th.sin(), z);
            let (p, _) = wc.workspace.clamp(&p);
            let to = c - p;
            MavState::at_rest(p, to.y.atan2(to.x), wc.camera)
        })
        .collect();
    let world = with_mavs(&wc, plan, mavs, seed)?;
    Ok(MocapEnv::from_world(variant, env, world)?)
}

pub struct RunOutput {
    pub rows: Vec<MetricRow>,
    pub replay: Vec<ReplayRecord>,
}

/// Evaluates `controller` for `cfg.runs` independent runs of the fixed walk.
/// Runs execute in parallel; results are assembled in run order.
pub fn run_eval(
    variant: NetworkVariant,
    controller: Controller<'_>,
    env: &EnvConfig,
    cfg: &EvalConfig,
    label: &str,
    threads: usize,
) -> Result<(MetricsReport, Vec<Vec<ReplayRecord>>), HarnessError> {
    cfg.validate()?;
    if let Controller::Policy(p) = controller {
        if p.obs_dim() != variant.observation_layout().len() || p.act_dim() != variant.action_dim()
        {
            return Err(HarnessError::Config(format!(
                "policy shape does not fit variant {variant}"
            )));
        }
    }
    let mut env = *env;
    env.world.episode_steps = (cfg.duration_s / env.world.dt).round().max(1.0) as u64;
    let seeds: Vec<u64> = cfg.seeds[..cfg.runs].to_vec();
    let outputs = parallel_map(&seeds, threads, |run, seed| {
        run_one(variant, controller, &env, &cfg.plan, run, seed)
    });
    let mut report = MetricsReport {
        label: label.to_string(),
        runs: cfg.runs,
        agents: variant.agents(),
        rows: Vec::new(),
    };
    let mut replays = Vec::with_capacity(cfg.runs);
    for out in outputs {
        let out = out?;
        report.rows.extend(out.rows);
        replays.push(out.replay);
    }
    Ok((report, replays))
}

fn run_one(
    variant: NetworkVariant,
    controller: Controller<'_>,
    env_cfg: &EnvConfig,
    plan: &WalkPlan,
    run: usize,
    seed: u64,
) -> Result<RunOutput, HarnessError> {
    let mut env = match controller {
        Controller::Policy(_) => MocapEnv::reset_with_plan(variant, env_cfg, plan.clone(), seed)?,
        Controller::Strategy(_, b) => {
            strategy_spawn(variant, env_cfg, plan.clone(), b.orbit_radius, seed)?
        }
    };
    let agents = variant.agents();
    let mut rows = Vec::new();
    let mut replay = vec![ReplayRecord::snapshot(env.world())];
    loop {
        let step = match controller {
            Controller::Policy(p) => {
                let raw = (0..agents)
                    .map(|k| {
                        p.mean_action(&env.observation(k)?)
                            .map_err(HarnessError::from)
                    })
                    .collect::<Result<Vec<_>, HarnessError>>()?;
                env.step_policy(&raw)?
            }
            Controller::Strategy(s, b) => {
                let actions: Vec<_> = (0..agents).map(|k| b.action(s, env.world(), k)).collect();
                env.step(&actions)?
            }
        };
        record_step(&env, &step, run, &mut rows);
        let mut rec = ReplayRecord::snapshot(env.world());
        rec.actions = step.actions.clone();
        rec.events = Some(step.events.clone());
        rec.rewards = step.rewards.clone();
        replay.push(rec);
        if step.events.done {
            break;
        }
    }
    Ok(RunOutput { rows, replay })
}

fn record_step(env: &MocapEnv, step: &EnvStep, run: usize, rows: &mut Vec<MetricRow>) {
    let w = env.world();
    let s = w.step;
    let mut push = |agent, metric, value| {
        rows.push(MetricRow {
            run,
            step: s,
            agent,
            metric,
            value,
        })
    };
    let camera = w.config.camera;
    let mut any_visible = false;
    for (k, proj) in step.perception.projections.iter().enumerate() {
        let tag = AgentTag::Agent(k);
        push(
            tag,
            Metric::Visible,
            if proj.bbox.is_some() { 1.0 } else { 0.0 },
        );
        if let Some(b) = &proj.bbox {
            any_visible = true;
            push(tag, Metric::Cpe, center_distance_px(b, &camera));
        }
        let mono = &step.perception.monocular[k];
        if mono.valid {
            push(
                tag,
                Metric::MpeMono,
                mean_joint_error(&mono.joints, &w.person.joints),
            );
        }
    }
    if w.agent_count() > 1 {
        push(
            AgentTag::All,
            Metric::Visible,
            if any_visible { 1.0 } else { 0.0 },
        );
    }
    if let Some(tri) = &step.perception.multiview {
        if let Some(e) = valid_joint_error(tri, &w.person.joints) {
            push(AgentTag::All, Metric::MpeTriag, e);
        }
    }
    if let Some(d) = step.events.inter_mav_distance {
        push(AgentTag::All, Metric::InterMavDistance, d);
    }
}
