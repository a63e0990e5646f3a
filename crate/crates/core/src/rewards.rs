//! Reward components and their per-variant composition.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{BoundingBox, CameraModel, TriangulatedSkeleton, Vec3};
use crate::perception::MonocularPoseEstimate;
use crate::skeleton::{Joint, JOINT_COUNT};
use crate::variant::NetworkVariant;

/// Distance floor inside the potential field, meters.
pub const POTENTIAL_EPS: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RewardError {
    #[error("inputs do not match variant {variant}: {reason}")]
    VariantMismatch {
        variant: NetworkVariant,
        reason: &'static str,
    },
    #[error("invalid reward configuration: {0}")]
    Config(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardConfig {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub joint_weights: [f64; JOINT_COUNT],
    pub x_thresh: f64,
    pub d_lthresh: f64,
    pub d_hthresh: f64,
    pub k_workspace: f64,
    pub normalize_total: bool,
    /// Reproduces the printed collision inequality (penalty when far apart).
    pub printed_collision_inequality: bool,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            c1: 0.01,
            c2: 5.0,
            c3: 5.0,
            c4: 5.0,
            joint_weights: depth_weights(),
            x_thresh: 3.0,
            d_lthresh: 1.0,
            d_hthresh: 20.0,
            k_workspace: -0.1,
            normalize_total: false,
            printed_collision_inequality: false,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<(), RewardError> {
        if !(self.c1 > 0.0 && self.c2 > 0.0 && self.c3 > 0.0 && self.c4 > 0.0) {
            return Err(RewardError::Config("weighting constants must be positive"));
        }
        if self.joint_weights.iter().any(|w| !(*w > 0.0)) {
            return Err(RewardError::Config("joint weights must be positive"));
        }
        if (self.joint_weights.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(RewardError::Config("joint weights must sum to 1"));
        }
        if !(self.d_lthresh < self.d_hthresh) || !(self.d_lthresh > 0.0) {
            return Err(RewardError::Config("need 0 < d_lthresh < d_hthresh"));
        }
        if !(self.x_thresh > 0.0) {
            return Err(RewardError::Config("x_thresh must be positive"));
        }
        Ok(())
    }

    pub fn uniform_weights() -> [f64; JOINT_COUNT] {
        [1.0 / JOINT_COUNT as f64; JOINT_COUNT]
    }
}

/// Weights proportional to kinematic-tree depth, normalized to sum to 1.
pub fn depth_weights() -> [f64; JOINT_COUNT] {
    let total: u32 = Joint::ALL.iter().map(|j| j.depth()).sum();
    Joint::ALL.map(|j| j.depth() as f64 / total as f64)
}

/// Per-step reward decomposition. Absent components are not part of the
/// variant's objective.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub center: Option<f64>,
    pub spin: Option<f64>,
    pub wspin: Option<f64>,
    pub col: Option<f64>,
    pub triag: Option<f64>,
    pub mhmr: Option<f64>,
    pub concol: Option<f64>,
    pub workspace: Option<f64>,
    pub total: f64,
}

impl RewardBreakdown {
    pub const COMPONENTS: [&'static str; 8] = [
        "center",
        "spin",
        "wspin",
        "col",
        "triag",
        "mhmr",
        "concol",
        "workspace",
    ];

    pub fn components(&self) -> [Option<f64>; 8] {
        [
            self.center,
            self.spin,
            self.wspin,
            self.col,
            self.triag,
            self.mhmr,
            self.concol,
            self.workspace,
        ]
    }

    fn finish(mut self, normalize: bool) -> Self {
        let sum: f64 = self.components().iter().flatten().sum();
        self.total = if normalize { sum.clamp(-1.0, 1.0) } else { sum };
        self
    }
}

fn tanh_reward(c: f64, error: f64) -> f64 {
    1.0 - (c * error).tanh()
}

/// Centering reward from the subject's bounding box; 0 when the box is empty.
pub fn r_center(bbox: Option<&BoundingBox>, cam: &CameraModel, cfg: &RewardConfig) -> f64 {
    match bbox {
        Some(b) => tanh_reward(cfg.c1, center_distance_px(b, cam)),
        None => 0.0,
    }
}

/// Pixel distance between the box center and the image center.
pub fn center_distance_px(bbox: &BoundingBox, cam: &CameraModel) -> f64 {
    let c = bbox.center();
    let m = cam.image_center();
    (c[0] - m[0]).hypot(c[1] - m[1])
}

pub fn mean_error(estimate: &[Vec3; JOINT_COUNT], truth: &[Vec3; JOINT_COUNT]) -> f64 {
    crate::perception::mean_joint_error(estimate, truth)
}

/// Weighted error with the fixed 1/14 prefactor kept alongside unit-sum weights.
///
/// Evaluated as the mean of weight-relative-to-uniform times error, divided by
/// 14, so uniform weights reproduce `mean_error / 14` bit for bit.
pub fn weighted_error(
    estimate: &[Vec3; JOINT_COUNT],
    truth: &[Vec3; JOINT_COUNT],
    weights: &[f64; JOINT_COUNT],
) -> f64 {
    let n = JOINT_COUNT as f64;
    estimate
        .iter()
        .zip(truth)
        .zip(weights)
        .map(|((e, t), w)| (w * n) * (e - t).norm())
        .sum::<f64>()
        / n
        / n
}

pub fn r_spin(
    estimate: &MonocularPoseEstimate,
    truth: &[Vec3; JOINT_COUNT],
    cfg: &RewardConfig,
) -> f64 {
    if !estimate.valid {
        return 0.0;
    }
    tanh_reward(cfg.c2, mean_error(&estimate.joints, truth))
}

pub fn r_wspin(
    estimate: &MonocularPoseEstimate,
    truth: &[Vec3; JOINT_COUNT],
    cfg: &RewardConfig,
) -> f64 {
    if !estimate.valid {
        return 0.0;
    }
    tanh_reward(
        cfg.c2,
        weighted_error(&estimate.joints, truth, &cfg.joint_weights),
    )
}

/// Discrete neighbor-collision reward. Too close is penalized; a distance of
/// exactly `x_thresh` counts as safe.
pub fn r_col(dist: f64, cfg: &RewardConfig) -> f64 {
    let penalized = if cfg.printed_collision_inequality {
        dist >= cfg.x_thresh
    } else {
        dist < cfg.x_thresh
    };
    if penalized {
        -1.0
    } else {
        0.2
    }
}

pub fn r_triag(
    estimate: &TriangulatedSkeleton,
    truth: &[Vec3; JOINT_COUNT],
    cfg: &RewardConfig,
) -> f64 {
    match crate::perception::valid_joint_error(estimate, truth) {
        Some(d) => tanh_reward(cfg.c3, d),
        None => 0.0,
    }
}

/// Weighted multi-view error; missing joints are dropped and the remaining
/// weights rescaled to their original total.
pub fn weighted_valid_error(
    estimate: &TriangulatedSkeleton,
    truth: &[Vec3; JOINT_COUNT],
    weights: &[f64; JOINT_COUNT],
) -> Option<f64> {
    let mut num = 0.0;
    let mut wsum = 0.0;
    for j in (0..JOINT_COUNT).filter(|j| estimate.valid[*j]) {
        num += weights[j] * (estimate.joints[j] - truth[j]).norm();
        wsum += weights[j];
    }
    if wsum == 0.0 {
        return None;
    }
    let total: f64 = weights.iter().sum();
    Some(num * (total / wsum) / JOINT_COUNT as f64)
}

pub fn r_mhmr(
    estimate: &TriangulatedSkeleton,
    truth: &[Vec3; JOINT_COUNT],
    cfg: &RewardConfig,
) -> f64 {
    match weighted_valid_error(estimate, truth, &cfg.joint_weights) {
        Some(d) => tanh_reward(cfg.c4, d),
        None => 0.0,
    }
}

/// Repulsive potential in [0, 1], zero at and beyond `d_lthresh`.
pub fn v_pot(dist: f64, d_lthresh: f64) -> f64 {
    ((d_lthresh / dist.max(POTENTIAL_EPS)).powi(2) - 1.0).clamp(0.0, 1.0)
}

pub fn r_concol(dist: f64, cfg: &RewardConfig) -> f64 {
    if dist < cfg.d_lthresh {
        -v_pot(dist, cfg.d_lthresh)
    } else if dist <= cfg.d_hthresh {
        0.2
    } else {
        -1.0
    }
}

pub fn r_workspace(violated: bool, cfg: &RewardConfig) -> f64 {
    if violated {
        cfg.k_workspace
    } else {
        0.0
    }
}

/// Everything a variant may need to score one agent-step.
#[derive(Debug, Clone)]
pub struct RewardInputs<'a> {
    pub bbox: Option<BoundingBox>,
    pub camera: CameraModel,
    pub truth: &'a [Vec3; JOINT_COUNT],
    pub monocular: Option<&'a MonocularPoseEstimate>,
    pub multiview: Option<&'a TriangulatedSkeleton>,
    pub neighbor_distance: Option<f64>,
    pub workspace_violation: bool,
}

pub fn compose(
    variant: NetworkVariant,
    inputs: &RewardInputs<'_>,
    cfg: &RewardConfig,
) -> Result<RewardBreakdown, RewardError> {
    let mismatch = |reason| RewardError::VariantMismatch { variant, reason };
    let mut out = RewardBreakdown {
        workspace: Some(r_workspace(inputs.workspace_violation, cfg)),
        ..RewardBreakdown::default()
    };
    if variant.is_multi_agent() {
        let dist = inputs
            .neighbor_distance
            .ok_or_else(|| mismatch("neighbor distance required"))?;
        let multi = inputs
            .multiview
            .ok_or_else(|| mismatch("multi-view estimate required"))?;
        out.center = Some(r_center(inputs.bbox.as_ref(), &inputs.camera, cfg));
        match variant {
            NetworkVariant::Multi1 => {
                out.col = Some(r_col(dist, cfg));
                out.triag = Some(r_triag(multi, inputs.truth, cfg));
            }
            NetworkVariant::Multi2 => {
                out.col = Some(r_col(dist, cfg));
                out.mhmr = Some(r_mhmr(multi, inputs.truth, cfg));
            }
            NetworkVariant::Multi3 => {
                out.concol = Some(r_concol(dist, cfg));
                out.mhmr = Some(r_mhmr(multi, inputs.truth, cfg));
            }
            _ => out.mhmr = Some(r_mhmr(multi, inputs.truth, cfg)),
        }
    } else {
        if inputs.neighbor_distance.is_some() || inputs.multiview.is_some() {
            return Err(mismatch("single-agent variant given neighbor inputs"));
        }
        let mono = || {
            inputs
                .monocular
                .ok_or_else(|| mismatch("monocular estimate required"))
        };
        match variant {
            NetworkVariant::Single1 => {
                out.center = Some(r_center(inputs.bbox.as_ref(), &inputs.camera, cfg))
            }
            NetworkVariant::Single2 => out.spin = Some(r_spin(mono()?, inputs.truth, cfg)),
            NetworkVariant::Single3 => out.wspin = Some(r_wspin(mono()?, inputs.truth, cfg)),
            _ => {
                out.center = Some(r_center(inputs.bbox.as_ref(), &inputs.camera, cfg));
                out.wspin = Some(r_wspin(mono()?, inputs.truth, cfg));
            }
        }
    }
    Ok(out.finish(cfg.normalize_total))
}

#[cfg(test)]
mod tests {
    use super::*;

    const R_TANH1: f64 = 0.238_405_844_044_234; // 1 - tanh(1)

    fn centered_box(cam: &CameraModel, offset: [f64; 2]) -> BoundingBox {
        let c = cam.image_center();
        BoundingBox {
            min_uv: [c[0] + offset[0] - 10.0, c[1] + offset[1] - 20.0],
            max_uv: [c[0] + offset[0] + 10.0, c[1] + offset[1] + 20.0],
        }
    }

    fn truth() -> [Vec3; JOINT_COUNT] {
        std::array::from_fn(|j| Vec3::new(j as f64, 0.5, 1.0))
    }

    fn offset(t: &[Vec3; JOINT_COUNT], e: f64) -> [Vec3; JOINT_COUNT] {
        t.map(|x| x + Vec3::new(0.0, e, 0.0))
    }

    #[test]
    fn default_config_is_valid() {
        let cfg = RewardConfig::default();
        cfg.validate().unwrap();
        let w = cfg.joint_weights;
        assert!(w[Joint::LeftWrist.index()] > w[Joint::LeftHip.index()]);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let bad = RewardConfig {
            d_lthresh: 30.0,
            ..cfg
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn centering() {
        let cfg = RewardConfig::default();
        let cam = CameraModel::default();
        assert_eq!(
            r_center(Some(&centered_box(&cam, [0.0, 0.0])), &cam, &cfg),
            1.0
        );
        let r = r_center(Some(&centered_box(&cam, [60.0, 80.0])), &cam, &cfg);
        assert!((r - R_TANH1).abs() < 1e-12);
        assert_eq!(r_center(None, &cam, &cfg), 0.0);
    }

    #[test]
    fn monocular_rewards() {
        let cfg = RewardConfig::default();
        let t = truth();
        let perfect = MonocularPoseEstimate {
            joints: t,
            valid: true,
        };
        assert_eq!(r_spin(&perfect, &t, &cfg), 1.0);
        assert_eq!(r_wspin(&perfect, &t, &cfg), 1.0);
        let off = MonocularPoseEstimate {
            joints: offset(&t, 0.2),
            valid: true,
        };
        assert!((r_spin(&off, &t, &cfg) - R_TANH1).abs() < 1e-12);
        assert_eq!(r_spin(&MonocularPoseEstimate::invalid(), &t, &cfg), 0.0);

        let uniform = RewardConfig {
            joint_weights: RewardConfig::uniform_weights(),
            ..cfg
        };
        let e = 0.7;
        let off = MonocularPoseEstimate {
            joints: offset(&t, e),
            valid: true,
        };
        let expected = 1.0 - (cfg.c2 * e / 14.0).tanh();
        assert!((r_wspin(&off, &t, &uniform) - expected).abs() < 1e-12);
    }

    #[test]
    fn wspin_vanishing_weight_limit() {
        let t = truth();
        let mut est = t;
        est[0] += Vec3::new(3.0, 0.0, 0.0);
        let est = MonocularPoseEstimate {
            joints: est,
            valid: true,
        };
        let mut last = 0.0;
        for w0 in [1e-1, 1e-3, 1e-6, 1e-9] {
            let mut weights = [(1.0 - w0) / 13.0; JOINT_COUNT];
            weights[0] = w0;
            let cfg = RewardConfig {
                joint_weights: weights,
                ..RewardConfig::default()
            };
            let r = r_wspin(&est, &t, &cfg);
            assert!(r > last);
            last = r;
        }
        assert!(1.0 - last < 1e-8);
    }

    #[test]
    fn collision_rewards() {
        let cfg = RewardConfig::default();
        assert_eq!(r_col(5.0, &cfg), 0.2);
        assert_eq!(r_col(1.0, &cfg), -1.0);
        assert_eq!(r_col(3.0, &cfg), 0.2);
        let verbatim = RewardConfig {
            printed_collision_inequality: true,
            ..cfg
        };
        assert_eq!(r_col(5.0, &verbatim), -1.0);
        assert_eq!(r_col(1.0, &verbatim), 0.2);

        assert_eq!(v_pot(1.0, 1.0), 0.0);
        assert_eq!(v_pot(0.0, 1.0), 1.0);
        assert_eq!(v_pot(1.0 / 2f64.sqrt(), 1.0).min(1.0), 1.0);
        assert!((v_pot(0.9, 1.0) - (1.0 / 0.81 - 1.0)).abs() < 1e-15);

        assert_eq!(r_concol(10.0, &cfg), 0.2);
        assert_eq!(r_concol(25.0, &cfg), -1.0);
        assert_eq!(r_concol(0.5, &cfg), -1.0);
        assert_eq!(r_concol(1.0, &cfg), 0.2);
        assert_eq!(r_concol(20.0, &cfg), 0.2);

        assert_eq!(r_workspace(false, &cfg), 0.0);
        assert_eq!(r_workspace(true, &cfg), -0.1);
    }

    #[test]
    fn multiview_rewards() {
        let cfg = RewardConfig::default();
        let t = truth();
        let exact = TriangulatedSkeleton {
            joints: t,
            valid: [true; JOINT_COUNT],
        };
        assert_eq!(r_triag(&exact, &t, &cfg), 1.0);
        assert_eq!(r_mhmr(&exact, &t, &cfg), 1.0);
        let off = TriangulatedSkeleton {
            joints: offset(&t, 0.2),
            valid: [true; JOINT_COUNT],
        };
        assert!((r_triag(&off, &t, &cfg) - R_TANH1).abs() < 1e-12);
        assert_eq!(r_triag(&TriangulatedSkeleton::invalid(), &t, &cfg), 0.0);
        assert_eq!(r_mhmr(&TriangulatedSkeleton::invalid(), &t, &cfg), 0.0);

        // uniform weights: r_mhmr at error e equals r_triag at error e/14
        let uniform = RewardConfig {
            joint_weights: RewardConfig::uniform_weights(),
            ..cfg
        };
        let e = 0.42;
        let off = TriangulatedSkeleton {
            joints: offset(&t, e),
            valid: [true; JOINT_COUNT],
        };
        let scaled = TriangulatedSkeleton {
            joints: offset(&t, e / 14.0),
            valid: [true; JOINT_COUNT],
        };
        assert!((r_mhmr(&off, &t, &uniform) - r_triag(&scaled, &t, &uniform)).abs() < 1e-12);
    }

    #[test]
    fn composition_table() {
        let cfg = RewardConfig::default();
        let cam = CameraModel::default();
        let t = truth();
        let perfect_mono = MonocularPoseEstimate {
            joints: t,
            valid: true,
        };
        let perfect_multi = TriangulatedSkeleton {
            joints: t,
            valid: [true; JOINT_COUNT],
        };
        let single = RewardInputs {
            bbox: Some(centered_box(&cam, [0.0, 0.0])),
            camera: cam,
            truth: &t,
            monocular: Some(&perfect_mono),
            multiview: None,
            neighbor_distance: None,
            workspace_violation: false,
        };
        let r = compose(NetworkVariant::Single4, &single, &cfg).unwrap();
        assert_eq!(r.total, 2.0);
        assert_eq!(r.spin, None);

        let multi = RewardInputs {
            multiview: Some(&perfect_multi),
            neighbor_distance: Some(25.0),
            monocular: None,
            ..single.clone()
        };
        let r = compose(NetworkVariant::Multi3, &multi, &cfg).unwrap();
        assert_eq!(r.concol, Some(-1.0));
        assert_eq!(r.total, 1.0);
        let r = compose(NetworkVariant::Multi4, &multi, &cfg).unwrap();
        assert_eq!(r.total, 2.0);
        assert!(r.concol.is_none() && r.col.is_none());

        assert!(matches!(
            compose(NetworkVariant::Single1, &multi, &cfg),
            Err(RewardError::VariantMismatch { .. })
        ));
        assert!(compose(NetworkVariant::Multi1, &single, &cfg).is_err());

        let clamped = RewardConfig {
            normalize_total: true,
            ..cfg
        };
        assert_eq!(
            compose(NetworkVariant::Single4, &single, &clamped)
                .unwrap()
                .total,
            1.0
        );
    }
}
