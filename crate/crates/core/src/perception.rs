//! Ego-frame observations and the synthetic pose estimators that stand in
//! for learned detectors when computing rewards and metrics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    project_skeleton, rotation_yaw, triangulate_skeleton, wrap_angle, GeometryError,
    PixelDetection, SkeletonProjection, TriangulatedSkeleton, Vec3,
};
use crate::skeleton::JOINT_COUNT;
use crate::world::WorldState;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PerceptionError {
    #[error("observation layout needs a neighbor but the world has {agents} agent(s)")]
    VariantMismatch { agents: usize },
    #[error("agent index {index} out of range for {agents} agent(s)")]
    AgentIndex { index: usize, agents: usize },
}

/// Which optional blocks an observation carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservationLayout {
    pub neighbor: bool,
    pub velocity: bool,
}

impl ObservationLayout {
    pub fn len(&self) -> usize {
        self.feature_names().len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn feature_names(&self) -> Vec<&'static str> {
        let mut names = vec!["person_x", "person_y", "person_z"];
        if self.velocity {
            names.extend(["person_vx", "person_vy", "person_vz"]);
        }
        names.push("person_yaw");
        if self.neighbor {
            names.extend([
                "neighbor_x",
                "neighbor_y",
                "neighbor_z",
                "neighbor_person_yaw",
            ]);
        }
        names
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub person_position: Vec3,
    pub person_velocity: Option<Vec3>,
    /// Subject body yaw relative to the agent's yaw.
    pub person_yaw: f64,
    pub neighbor_position: Option<Vec3>,
    /// Subject body yaw relative to the neighbor's yaw.
    pub neighbor_person_yaw: Option<f64>,
}

impl Observation {
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(11);
        v.extend(self.person_position.iter());
        if let Some(vel) = self.person_velocity {
            v.extend(vel.iter());
        }
        v.push(self.person_yaw);
        if let (Some(n), Some(yaw)) = (self.neighbor_position, self.neighbor_person_yaw) {
            v.extend(n.iter());
            v.push(yaw);
        }
        v
    }
}

/// Builds the agent's observation from simulator ground truth.
pub fn build_observation(
    world: &WorldState,
    agent: usize,
    layout: ObservationLayout,
) -> Result<Observation, PerceptionError> {
    let agents = world.agent_count();
    if agent >= agents {
        return Err(PerceptionError::AgentIndex {
            index: agent,
            agents,
        });
    }
    if layout.neighbor && agents < 2 {
        return Err(PerceptionError::VariantMismatch { agents });
    }
    let me = &world.mavs[agent];
    let yaw = wrap_angle(me.yaw);
    let to_ego = rotation_yaw(yaw).transpose();
    let person = &world.person;
    let (neighbor_position, neighbor_person_yaw) = if layout.neighbor {
        let other = &world.mavs[1 - agent];
        (
            Some(to_ego * (other.position - me.position)),
            Some(wrap_angle(person.yaw - wrap_angle(other.yaw))),
        )
    } else {
        (None, None)
    };
    Ok(Observation {
        person_position: to_ego * (person.root - me.position),
        person_velocity: layout.velocity.then(|| to_ego * person.velocity),
        person_yaw: wrap_angle(person.yaw - yaw),
        neighbor_position,
        neighbor_person_yaw,
    })
}

/// Distance-dependent pixel noise and monocular proxy parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseConfig {
    pub sigma0_px: f64,
    pub k_n: f64,
    pub d_lo: f64,
    pub d_hi: f64,
    pub sigma_depth: f64,
    pub sigma_lat: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            sigma0_px: 2.0,
            k_n: 1.0,
            d_lo: 3.0,
            d_hi: 8.0,
            sigma_depth: 12.0,
            sigma_lat: 2.0,
        }
    }
}

impl NoiseConfig {
    pub fn noiseless() -> Self {
        Self {
            sigma0_px: 0.0,
            sigma_depth: 0.0,
            sigma_lat: 0.0,
            ..Self::default()
        }
    }

    /// Pixel noise standard deviation at agent-subject distance `d`.
    pub fn pixel_sigma(&self, d: f64) -> f64 {
        let outside = (self.d_lo - d).max(d - self.d_hi).max(0.0);
        self.sigma0_px * (1.0 + self.k_n * outside)
    }
}

/// Independent random streams drawn by the perception proxies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseStream {
    Detection,
    Monocular,
}

/// RNG for one (seed, step, agent, purpose) tuple.
pub fn noise_rng(seed: u64, step: u64, agent: usize, stream: NoiseStream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tag = match stream {
        NoiseStream::Detection => 0,
        NoiseStream::Monocular => 1,
    };
    rng.set_stream(step.wrapping_mul(8) + 2 * agent as u64 + tag);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisyDetections {
    pub detections: [PixelDetection; JOINT_COUNT],
    pub sigma_px: f64,
}

/// Projects the subject's joints into the agent's camera and perturbs them
/// with zero-mean Gaussian pixel noise.
pub fn detect_joints<R: Rng>(
    world: &WorldState,
    agent: usize,
    noise: &NoiseConfig,
    rng: &mut R,
) -> NoisyDetections {
    let mav = &world.mavs[agent];
    let view = mav.camera_view();
    let exact = project_skeleton(&world.person.joints, &view);
    let sigma = noise.pixel_sigma((mav.position - world.person.root).norm());
    let detections = exact.detections.map(|d| {
        let du: f64 = rng.sample(StandardNormal);
        let dv: f64 = rng.sample(StandardNormal);
        if !d.visible {
            return PixelDetection::HIDDEN;
        }
        let uv = [d.uv[0] + sigma * du, d.uv[1] + sigma * dv];
        PixelDetection {
            uv,
            visible: view.model.contains(uv),
        }
    });
    NoisyDetections {
        detections,
        sigma_px: sigma,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonocularPoseEstimate {
    pub joints: [Vec3; JOINT_COUNT],
    pub valid: bool,
}

impl MonocularPoseEstimate {
    pub fn invalid() -> Self {
        Self {
            joints: [Vec3::zeros(); JOINT_COUNT],
            valid: false,
        }
    }
}

/// Synthetic single-view 3-D pose estimate. A shared offset along the viewing
/// ray models depth ambiguity and per-joint isotropic noise models lateral
/// error; both scale with distance over projected subject height.
pub fn monocular_pose_proxy<R: Rng>(
    world: &WorldState,
    agent: usize,
    noise: &NoiseConfig,
    rng: &mut R,
) -> MonocularPoseEstimate {
    let mav = &world.mavs[agent];
    let projection = project_skeleton(&world.person.joints, &mav.camera_view());
    monocular_from_projection(world, agent, &projection, noise, rng)
}

pub(crate) fn monocular_from_projection<R: Rng>(
    world: &WorldState,
    agent: usize,
    projection: &SkeletonProjection,
    noise: &NoiseConfig,
    rng: &mut R,
) -> MonocularPoseEstimate {
    if projection.bbox.is_none() {
        return MonocularPoseEstimate::invalid();
    }
    let mav = &world.mavs[agent];
    let person = &world.person;
    let to_person = person.root - mav.position;
    let d = to_person.norm().max(1e-6);
    let ray = to_person / d;
    let height_px = mav.camera.focal_px * world.config.actor.skeleton.height / d;
    let scale = d / height_px;
    let depth: f64 = rng.sample(StandardNormal);
    let bias = ray * (noise.sigma_depth * scale * depth);
    let lateral = noise.sigma_lat * scale;
    let joints = person.joints.map(|x| {
        let n = Vec3::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        x + bias + n * lateral
    });
    MonocularPoseEstimate {
        joints,
        valid: true,
    }
}

/// Two-view joint estimate: noisy detections from both agents, triangulated.
pub fn multiview_pose_estimate(
    world: &WorldState,
    agent_a: usize,
    agent_b: usize,
    noise: &NoiseConfig,
) -> Result<TriangulatedSkeleton, GeometryError> {
    let step = world.step;
    let da = detect_joints(
        world,
        agent_a,
        noise,
        &mut noise_rng(world.seed, step, agent_a, NoiseStream::Detection),
    );
    let db = detect_joints(
        world,
        agent_b,
        noise,
        &mut noise_rng(world.seed, step, agent_b, NoiseStream::Detection),
    );
    triangulate_skeleton(
        &da.detections,
        &world.mavs[agent_a].camera_view(),
        &db.detections,
        &world.mavs[agent_b].camera_view(),
    )
}

/// Mean Euclidean joint error over all 14 joints.
pub fn mean_joint_error(estimate: &[Vec3; JOINT_COUNT], truth: &[Vec3; JOINT_COUNT]) -> f64 {
    estimate
        .iter()
        .zip(truth)
        .map(|(e, t)| (e - t).norm())
        .sum::<f64>()
        / JOINT_COUNT as f64
}

/// Mean joint error over the valid joints, `None` when no joint is valid.
pub fn valid_joint_error(
    estimate: &TriangulatedSkeleton,
    truth: &[Vec3; JOINT_COUNT],
) -> Option<f64> {
    let errs: Vec<f64> = (0..JOINT_COUNT)
        .filter(|j| estimate.valid[*j])
        .map(|j| (estimate.joints[j] - truth[j]).norm())
        .collect();
    (!errs.is_empty()).then(|| errs.iter().sum::<f64>() / errs.len() as f64)
}
