//! Episode dynamics: kinematic MAVs tracking waypoints, the walking subject,
//! workspace bounds and deterministic stepping.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    project_skeleton, rotation_yaw, wrap_angle, CameraModel, CameraPose, CameraView, Vec3,
};
use crate::skeleton::{SkeletonTemplate, JOINT_COUNT};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorldError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("action component {component} = {value} exceeds bound {bound}")]
    OutOfBoundsAction {
        component: &'static str,
        value: f64,
        bound: f64,
    },
    #[error("expected {expected} actions, got {got}")]
    ActionCount { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MavState {
    pub position: Vec3,
    pub yaw: f64,
    pub velocity: Vec3,
    pub yaw_rate: f64,
    pub camera: CameraModel,
}

impl MavState {
    pub fn at_rest(position: Vec3, yaw: f64, camera: CameraModel) -> Self {
        Self {
            position,
            yaw: wrap_angle(yaw),
            velocity: Vec3::zeros(),
            yaw_rate: 0.0,
            camera,
        }
    }

    pub fn camera_pose(&self) -> CameraPose {
        CameraPose::mounted(self.position, self.yaw, self.camera.pitch)
    }

    pub fn camera_view(&self) -> CameraView {
        CameraView {
            model: self.camera,
            pose: self.camera_pose(),
        }
    }
}

/// Expresses a world point in the camera frame of `mav`.
pub fn world_to_camera(point_w: &Vec3, mav: &MavState) -> Vec3 {
    mav.camera_pose().to_camera(point_w)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersonState {
    /// Pelvis center.
    pub root: Vec3,
    pub yaw: f64,
    pub velocity: Vec3,
    pub joints: [Vec3; JOINT_COUNT],
    pub phase: f64,
    pub target_index: usize,
}

/// Ego-frame velocity and yaw rate command.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Action {
    pub velocity: [f64; 3],
    pub yaw_rate: f64,
}

impl Action {
    pub const ZERO: Action = Action {
        velocity: [0.0; 3],
        yaw_rate: 0.0,
    };

    /// Maps a raw policy output to physical units. Components are clipped to
    /// [-1, 1] and scaled by the bounds; without yaw control the yaw rate is 0.
    pub fn from_normalized(raw: &[f64], v_max: f64, omega_max: f64) -> Self {
        let c = |k: usize| raw.get(k).copied().unwrap_or(0.0).clamp(-1.0, 1.0);
        Action {
            velocity: [c(0) * v_max, c(1) * v_max, c(2) * v_max],
            yaw_rate: if raw.len() > 3 { c(3) * omega_max } else { 0.0 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaypointCommand {
    pub position: Vec3,
    pub yaw: f64,
}

/// Axis-aligned flight volume; the z range is the allowed altitude band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Workspace {
    pub lower: [f64; 3],
    pub upper: [f64; 3],
}

impl Default for Workspace {
    fn default() -> Self {
        Self {
            lower: [-12.0, -12.0, 1.0],
            upper: [12.0, 12.0, 10.0],
        }
    }
}

impl Workspace {
    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|k| p[k] >= self.lower[k] && p[k] <= self.upper[k])
    }

    /// Clamps `p` into the volume; the flag reports whether clamping happened.
    pub fn clamp(&self, p: &Vec3) -> (Vec3, bool) {
        let q = Vec3::from_fn(|k, _| p[k].clamp(self.lower[k], self.upper[k]));
        (q, q != *p)
    }

    pub fn center(&self) -> Vec3 {
        Vec3::from_fn(|k, _| 0.5 * (self.lower[k] + self.upper[k]))
    }

    pub fn extent(&self, k: usize) -> f64 {
        self.upper[k] - self.lower[k]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ActorConfig {
    pub speed_min: f64,
    pub speed_max: f64,
    pub turn_rate_max: f64,
    pub waypoint_count: usize,
    /// Horizontal distance kept between walk waypoints and the workspace walls.
    pub interior_margin: f64,
    /// Half-width of the square around the workspace center where the subject starts.
    pub start_region: f64,
    pub reach_radius: f64,
    /// Footsteps per second (two per gait cycle).
    pub step_frequency: f64,
    pub static_subject: bool,
    pub skeleton: SkeletonTemplate,
}

impl Default for ActorConfig {
    fn default() -> Self {
        Self {
            speed_min: 0.3,
            speed_max: 1.5,
            turn_rate_max: 1.0,
            waypoint_count: 8,
            interior_margin: 6.0,
            start_region: 2.0,
            reach_radius: 0.5,
            step_frequency: 2.0,
            static_subject: false,
            skeleton: SkeletonTemplate::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorldConfig {
    pub agents: usize,
    pub dt: f64,
    pub episode_steps: u64,
    pub v_max: f64,
    pub omega_max: f64,
    pub tracking_gain: f64,
    pub workspace: Workspace,
    pub camera: CameraModel,
    pub actor: ActorConfig,
    pub min_spawn_separation: f64,
    /// Spawn yaw is the bearing to the subject perturbed uniformly by this much.
    pub spawn_yaw_jitter: f64,
    pub spawn_attempts: usize,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            agents: 2,
            dt: 0.25,
            episode_steps: 512,
            v_max: 2.0,
            omega_max: 1.0,
            tracking_gain: 1.0,
            workspace: Workspace::default(),
            camera: CameraModel::default(),
            actor: ActorConfig::default(),
            min_spawn_separation: 6.0,
            spawn_yaw_jitter: 0.5,
            spawn_attempts: 10_000,
        }
    }
}

impl WorldConfig {
    pub fn validate(&self) -> Result<(), WorldError> {
        let err = |m: &str| Err(WorldError::Config(m.to_string()));
        if self.agents == 0 || self.agents > 2 {
            return err("agent count must be 1 or 2");
        }
        if !(self.dt > 0.0) || self.episode_steps == 0 {
            return err("dt and episode length must be positive");
        }
        if !(self.v_max > 0.0 && self.omega_max > 0.0 && self.tracking_gain > 0.0) {
            return err("velocity bounds and tracking gain must be positive");
        }
        for k in 0..3 {
            if !(self.workspace.lower[k] < self.workspace.upper[k]) {
                return err("workspace lower bound must be below upper bound");
            }
        }
        self.camera
            .validate()
            .map_err(|e| WorldError::Config(e.to_string()))?;
        let a = &self.actor;
        if !(0.0 <= a.speed_min && a.speed_min <= a.speed_max) || a.waypoint_count == 0 {
            return err("invalid actor speed range or waypoint count");
        }
        for k in 0..2 {
            if self.workspace.extent(k) <= 2.0 * a.interior_margin
                || self.workspace.extent(k) <= 2.0 * a.start_region
            {
                return err("workspace too small for the walking region");
            }
        }
        let diag = (0..3)
            .map(|k| self.workspace.extent(k).powi(2))
            .sum::<f64>()
            .sqrt();
        if self.agents > 1 && diag < self.min_spawn_separation {
            return err("workspace too small for the spawn separation");
        }
        if self.workspace.upper[2] <= a.skeleton.height {
            return err("workspace ceiling below the subject");
        }
        Ok(())
    }
}

/// A cyclic sequence of walk targets with one speed per segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkPlan {
    pub start: [f64; 2],
    pub heading: f64,
    pub waypoints: Vec<[f64; 2]>,
    pub speeds: Vec<f64>,
}

impl WalkPlan {
    pub fn sample<R: Rng>(cfg: &WorldConfig, rng: &mut R) -> Self {
        let a = &cfg.actor;
        let ws = &cfg.workspace;
        let c = ws.center();
        let start = [
            c.x + rng.random_range(-a.start_region..=a.start_region),
            c.y + rng.random_range(-a.start_region..=a.start_region),
        ];
        let heading = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        let mut waypoints = Vec::with_capacity(a.waypoint_count);
        let mut speeds = Vec::with_capacity(a.waypoint_count);
        for _ in 0..a.waypoint_count {
            waypoints.push([
                rng.random_range(ws.lower[0] + a.interior_margin..=ws.upper[0] - a.interior_margin),
                rng.random_range(ws.lower[1] + a.interior_margin..=ws.upper[1] - a.interior_margin),
            ]);
            speeds.push(if a.static_subject {
                0.0
            } else {
                rng.random_range(a.speed_min..=a.speed_max)
            });
        }
        Self {
            start,
            heading,
            waypoints,
            speeds,
        }
    }

    /// A plan that never moves.
    pub fn stationary(start: [f64; 2], heading: f64) -> Self {
        Self {
            start,
            heading,
            waypoints: vec![start],
            speeds: vec![0.0],
        }
    }

    pub fn initial_person(&self, actor: &ActorConfig) -> PersonState {
        let root = Vec3::new(self.start[0], self.start[1], actor.skeleton.pelvis_height);
        PersonState {
            root,
            yaw: wrap_angle(self.heading),
            velocity: Vec3::zeros(),
            joints: actor.skeleton.pose(&root, self.heading, 0.0, 0.0),
            phase: 0.0,
            target_index: 0,
        }
    }
}

/// Converts an ego-frame action into a world-frame waypoint.
pub fn action_to_waypoint(
    action: &Action,
    mav: &MavState,
    dt: f64,
    v_max: f64,
    omega_max: f64,
) -> Result<WaypointCommand, WorldError> {
    const TOL: f64 = 1e-12;
    for (k, name) in ["vx", "vy", "vz"].iter().enumerate() {
        let v = action.velocity[k];
        if !(v.abs() <= v_max + TOL) {
            return Err(WorldError::OutOfBoundsAction {
                component: name,
                value: v,
                bound: v_max,
            });
        }
    }
    if !(action.yaw_rate.abs() <= omega_max + TOL) {
        return Err(WorldError::OutOfBoundsAction {
            component: "omega",
            value: action.yaw_rate,
            bound: omega_max,
        });
    }
    let v = Vec3::from(action.velocity);
    Ok(WaypointCommand {
        position: mav.position + rotation_yaw(mav.yaw) * v * dt,
        yaw: wrap_angle(mav.yaw + action.yaw_rate * dt),
    })
}

/// First-order waypoint tracker. Translational speed is limited to `v_max`
/// (Euclidean norm) and the yaw change per step to `omega_max * dt`.
pub fn track_waypoint(
    mav: &MavState,
    wp: &WaypointCommand,
    dt: f64,
    gain: f64,
    v_max: f64,
    omega_max: f64,
) -> MavState {
    let mut velocity = gain * (wp.position - mav.position) / dt;
    let speed = velocity.norm();
    if speed > v_max {
        velocity *= v_max / speed;
    }
    let yaw_err = wrap_angle(wp.yaw - mav.yaw);
    let max_turn = omega_max * dt;
    let turn = (gain * yaw_err).clamp(-max_turn, max_turn);
    MavState {
        position: mav.position + velocity * dt,
        yaw: wrap_angle(mav.yaw + turn),
        velocity,
        yaw_rate: turn / dt,
        camera: mav.camera,
    }
}

/// Advances the walking subject along its plan.
pub fn actor_step(
    person: &PersonState,
    plan: &WalkPlan,
    actor: &ActorConfig,
    dt: f64,
) -> PersonState {
    let n = plan.waypoints.len();
    let mut index = person.target_index % n;
    let mut speed_target = plan.speeds[index];
    let mut yaw = person.yaw;
    let mut velocity = Vec3::zeros();
    let mut root = person.root;

    if speed_target > 0.0 {
        let mut to = waypoint_offset(plan, index, &root);
        if to.norm() < actor.reach_radius {
            index = (index + 1) % n;
            speed_target = plan.speeds[index];
            to = waypoint_offset(plan, index, &root);
        }
        let dist = to.norm();
        if dist > 0.0 && speed_target > 0.0 {
            let err = wrap_angle(to.y.atan2(to.x) - yaw);
            let max_turn = actor.turn_rate_max * dt;
            yaw = wrap_angle(yaw + err.clamp(-max_turn, max_turn));
            let aligned = wrap_angle(to.y.atan2(to.x) - yaw).cos().max(0.0);
            let speed = (speed_target * aligned).min(dist / dt).min(actor.speed_max);
            velocity = Vec3::new(yaw.cos(), yaw.sin(), 0.0) * speed;
            root += velocity * dt;
        }
    }

    let phase = (person.phase + std::f64::consts::PI * actor.step_frequency * dt)
        .rem_euclid(std::f64::consts::TAU);
    let amplitude = if actor.speed_max > 0.0 {
        (velocity.norm() / actor.speed_max).min(1.0)
    } else {
        0.0
    };
    PersonState {
        root,
        yaw,
        velocity,
        joints: actor.skeleton.pose(&root, yaw, phase, amplitude),
        phase,
        target_index: index,
    }
}

fn waypoint_offset(plan: &WalkPlan, index: usize, root: &Vec3) -> Vec3 {
    let w = plan.waypoints[index];
    Vec3::new(w[0] - root.x, w[1] - root.y, 0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepEvents {
    pub workspace_violation: Vec<bool>,
    /// Distance between the two MAVs, absent for a single agent.
    pub inter_mav_distance: Option<f64>,
    pub mav_person_distance: Vec<f64>,
    pub done: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub config: WorldConfig,
    pub mavs: Vec<MavState>,
    pub person: PersonState,
    pub plan: WalkPlan,
    pub step: u64,
    pub seed: u64,
}

impl WorldState {
    pub fn time(&self) -> f64 {
        self.step as f64 * self.config.dt
    }

    pub fn agent_count(&self) -> usize {
        self.mavs.len()
    }

    pub fn inter_mav_distance(&self) -> Option<f64> {
        match self.mavs.as_slice() {
            [a, b] => Some((a.position - b.position).norm()),
            _ => None,
        }
    }

    pub fn person_visible(&self, agent: usize) -> bool {
        person_visible(&self.person, &self.mavs[agent])
    }

    pub fn events(&self, violations: Vec<bool>) -> StepEvents {
        StepEvents {
            workspace_violation: violations,
            inter_mav_distance: self.inter_mav_distance(),
            mav_person_distance: self
                .mavs
                .iter()
                .map(|m| (m.position - self.person.root).norm())
                .collect(),
            done: self.step >= self.config.episode_steps,
        }
    }
}

pub fn person_visible(person: &PersonState, mav: &MavState) -> bool {
    project_skeleton(&person.joints, &mav.camera_view())
        .bbox
        .is_some()
}

/// Applies one action per MAV and advances the subject by one step.
pub fn step_env(state: &mut WorldState, actions: &[Action]) -> Result<StepEvents, WorldError> {
    let cfg = state.config;
    if actions.len() != state.mavs.len() {
        return Err(WorldError::ActionCount {
            expected: state.mavs.len(),
            got: actions.len(),
        });
    }
    let waypoints = state
        .mavs
        .iter()
        .zip(actions)
        .map(|(m, a)| action_to_waypoint(a, m, cfg.dt, cfg.v_max, cfg.omega_max))
        .collect::<Result<Vec<_>, _>>()?;

    let mut violations = Vec::with_capacity(actions.len());
    for (mav, wp) in state.mavs.iter_mut().zip(&waypoints) {
        let mut next = track_waypoint(mav, wp, cfg.dt, cfg.tracking_gain, cfg.v_max, cfg.omega_max);
        let (clamped, violated) = cfg.workspace.clamp(&next.position);
        if violated {
            next.velocity = (clamped - mav.position) / cfg.dt;
            next.position = clamped;
        }
        violations.push(violated);
        *mav = next;
    }
    state.person = actor_step(&state.person, &state.plan, &cfg.actor, cfg.dt);
    state.step += 1;
    Ok(state.events(violations))
}

/// Starts a new episode with a freshly sampled walk.
pub fn reset_episode(config: &WorldConfig, seed: u64) -> Result<WorldState, WorldError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plan = WalkPlan::sample(config, &mut rng);
    spawn(config, plan, seed, &mut rng)
}

/// Starts a new episode on a given walk; only the MAV spawn is random.
pub fn reset_with_plan(
    config: &WorldConfig,
    plan: WalkPlan,
    seed: u64,
) -> Result<WorldState, WorldError> {
    config.validate()?;
    if plan.waypoints.is_empty() || plan.waypoints.len() != plan.speeds.len() {
        return Err(WorldError::Config(
            "walk plan is empty or inconsistent".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    spawn(config, plan, seed, &mut rng)
}

/// Builds a world with explicitly placed MAVs.
pub fn with_mavs(
    config: &WorldConfig,
    plan: WalkPlan,
    mavs: Vec<MavState>,
    seed: u64,
) -> Result<WorldState, WorldError> {
    config.validate()?;
    if mavs.len() != config.agents {
        return Err(WorldError::Config(format!(
            "expected {} MAVs, got {}",
            config.agents,
            mavs.len()
        )));
    }
    let person = plan.initial_person(&config.actor);
    Ok(WorldState {
        config: *config,
        mavs,
        person,
        plan,
        step: 0,
        seed,
    })
}

fn spawn(
    config: &WorldConfig,
    plan: WalkPlan,
    seed: u64,
    rng: &mut ChaCha8Rng,
) -> Result<WorldState, WorldError> {
    let person = plan.initial_person(&config.actor);
    let ws = &config.workspace;
    for _ in 0..config.spawn_attempts {
        let mavs: Vec<MavState> = (0..config.agents)
            .map(|_| {
                let p = Vec3::from_fn(|k, _| rng.random_range(ws.lower[k]..=ws.upper[k]));
                let to = person.root - p;
                let jitter = rng.random_range(-config.spawn_yaw_jitter..=config.spawn_yaw_jitter);
                MavState::at_rest(p, to.y.atan2(to.x) + jitter, config.camera)
            })
            .collect();
        let separated = mavs.iter().enumerate().all(|(i, a)| {
            mavs[i + 1..]
                .iter()
                .all(|b| (a.position - b.position).norm() >= config.min_spawn_separation)
        });
        if separated && mavs.iter().any(|m| person_visible(&person, m)) {
            return Ok(WorldState {
                config: *config,
                mavs,
                person,
                plan,
                step: 0,
                seed,
            });
        }
    }
    Err(WorldError::Config(
        "could not satisfy spawn constraints within the attempt budget".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn mav(position: Vec3, yaw: f64) -> MavState {
        MavState::at_rest(position, yaw, CameraModel::default())
    }

    #[test]
    fn zero_action_waypoint_is_current_pose() {
        let m = mav(Vec3::new(1.0, 2.0, 3.0), 0.7);
        let wp = action_to_waypoint(&Action::ZERO, &m, 0.25, 2.0, 1.0).unwrap();
        assert_eq!(wp.position, m.position);
        assert_eq!(wp.yaw, m.yaw);
    }

    #[test]
    fn waypoint_rotates_ego_velocity() {
        let m = mav(Vec3::zeros(), FRAC_PI_2);
        let a = Action {
            velocity: [1.0, 0.0, 0.0],
            yaw_rate: 0.0,
        };
        let wp = action_to_waypoint(&a, &m, 0.25, 2.0, 1.0).unwrap();
        assert!((wp.position - Vec3::new(0.0, 0.25, 0.0)).norm() < 1e-15);

        let up = Action {
            velocity: [0.0, 0.0, 1.0],
            yaw_rate: 0.0,
        };
        for yaw in [0.0, 1.0, -2.5] {
            let wp = action_to_waypoint(&up, &mav(Vec3::zeros(), yaw), 0.25, 2.0, 1.0).unwrap();
            assert!((wp.position - Vec3::new(0.0, 0.0, 0.25)).norm() < 1e-15);
        }
    }

    #[test]
    fn out_of_bounds_action_rejected() {
        let a = Action {
            velocity: [2.5, 0.0, 0.0],
            yaw_rate: 0.0,
        };
        assert!(matches!(
            action_to_waypoint(&a, &mav(Vec3::zeros(), 0.0), 0.25, 2.0, 1.0),
            Err(WorldError::OutOfBoundsAction {
                component: "vx",
                ..
            })
        ));
        let a = Action {
            velocity: [0.0; 3],
            yaw_rate: -1.5,
        };
        assert!(action_to_waypoint(&a, &mav(Vec3::zeros(), 0.0), 0.25, 2.0, 1.0).is_err());
    }

    #[test]
    fn tracker_fixed_point_and_one_step_reach() {
        let m = mav(Vec3::new(1.0, 1.0, 4.0), 0.2);
        let hold = WaypointCommand {
            position: m.position,
            yaw: m.yaw,
        };
        let next = track_waypoint(&m, &hold, 0.25, 1.0, 2.0, 1.0);
        assert_eq!(next.position, m.position);
        assert_eq!(next.yaw, m.yaw);
        assert_eq!(next.velocity, Vec3::zeros());

        let wp = WaypointCommand {
            position: m.position + Vec3::new(0.3, -0.2, 0.1),
            yaw: 0.35,
        };
        let next = track_waypoint(&m, &wp, 0.25, 1.0, 2.0, 1.0);
        assert!((next.position - wp.position).norm() < 1e-15);
        assert!((next.yaw - wp.yaw).abs() < 1e-15);
    }

    #[test]
    fn tracker_saturates() {
        let m = mav(Vec3::zeros(), 0.0);
        let wp = WaypointCommand {
            position: Vec3::new(100.0, 0.0, 0.0),
            yaw: 3.0,
        };
        let next = track_waypoint(&m, &wp, 0.25, 1.0, 2.0, 1.0);
        assert!((next.position.x - 0.5).abs() < 1e-15);
        assert!((next.yaw - 0.25).abs() < 1e-15);
    }

    #[test]
    fn idle_subject_holds_pose() {
        let cfg = WorldConfig::default();
        let plan = WalkPlan::stationary([0.0, 0.0], 0.3);
        let p0 = plan.initial_person(&cfg.actor);
        let p1 = actor_step(&p0, &plan, &cfg.actor, cfg.dt);
        assert_eq!(p1.root, p0.root);
        assert_eq!(p1.joints, p0.joints);
        assert_ne!(p1.phase, p0.phase);
    }

    #[test]
    fn reset_is_deterministic_and_separated() {
        let cfg = WorldConfig::default();
        for seed in 0..20 {
            let a = reset_episode(&cfg, seed).unwrap();
            let b = reset_episode(&cfg, seed).unwrap();
            assert_eq!(a, b);
            assert!(a.inter_mav_distance().unwrap() >= 6.0);
            assert!((0..2).any(|k| a.person_visible(k)));
        }
    }

    #[test]
    fn tiny_workspace_is_config_error() {
        let cfg = WorldConfig {
            workspace: Workspace {
                lower: [0.0, 0.0, 0.0],
                upper: [1.0, 1.0, 1.0],
            },
            ..WorldConfig::default()
        };
        assert!(matches!(reset_episode(&cfg, 1), Err(WorldError::Config(_))));
    }

    #[test]
    fn ceiling_clamps_and_flags() {
        let cfg = WorldConfig::default();
        let mut w = reset_episode(&cfg, 3).unwrap();
        w.mavs[0].position.z = cfg.workspace.upper[2] - 0.1;
        let up = Action {
            velocity: [0.0, 0.0, 2.0],
            yaw_rate: 0.0,
        };
        let ev = step_env(&mut w, &[up, Action::ZERO]).unwrap();
        assert!(ev.workspace_violation[0]);
        assert!(!ev.workspace_violation[1]);
        assert_eq!(w.mavs[0].position.z, cfg.workspace.upper[2]);
    }

    #[test]
    fn converging_mavs_report_distance() {
        let cfg = WorldConfig::default();
        let plan = WalkPlan::stationary([0.0, 0.0], 0.0);
        let mavs = vec![
            mav(Vec3::new(5.0, -0.25, 5.0), 0.0),
            mav(Vec3::new(5.0, 0.25, 5.0), 0.0),
        ];
        let mut w = with_mavs(&cfg, plan, mavs, 0).unwrap();
        let toward = |vy: f64| Action {
            velocity: [0.0, vy, 0.0],
            yaw_rate: 0.0,
        };
        let ev = step_env(&mut w, &[toward(1.0), toward(-1.0)]).unwrap();
        assert!(ev.inter_mav_distance.unwrap() < 3.0);
        assert!(ev.inter_mav_distance.unwrap() < 1e-12);
    }

    #[test]
    fn static_world_only_advances_gait_phase() {
        let cfg = WorldConfig::default();
        let plan = WalkPlan::stationary([0.0, 0.0], 0.0);
        let mavs = vec![
            mav(Vec3::new(5.0, 0.0, 5.0), 3.0),
            mav(Vec3::new(-5.0, 0.0, 5.0), 0.0),
        ];
        let mut w = with_mavs(&cfg, plan, mavs, 0).unwrap();
        let before = w.clone();
        let ev = step_env(&mut w, &[Action::ZERO, Action::ZERO]).unwrap();
        assert_eq!(w.mavs, before.mavs);
        assert_eq!(w.person.joints, before.person.joints);
        assert_ne!(w.person.phase, before.person.phase);
        assert!(!ev.done);
        assert_eq!(w.time(), 0.25);
    }
}
