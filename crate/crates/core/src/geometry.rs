//! Geometric kernel: yaw rotations, the MAV camera mount, pinhole projection,
//! bounding boxes and two-view linear least-squares triangulation.
//!
//! Frames:
//! - world: x/y horizontal, z up.
//! - body: x forward, y left, z up. Roll and pitch of the MAV are always zero.
//! - camera: +z optical axis, +x right, +y down. The optical axis is the body
//!   x-axis pitched down by `CameraModel::pitch`.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::skeleton::JOINT_COUNT;

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Points closer than this along the optical axis are never visible.
pub const Z_NEAR: f64 = 0.01;

/// Largest accepted condition number of the triangulation normal equations.
pub const MAX_NORMAL_CONDITION: f64 = 1e10;

/// Minimum angle between the two back-projected rays.
pub const MIN_RAY_ANGLE: f64 = 1e-6;

const MIN_BASELINE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("degenerate two-view geometry: {0}")]
    DegenerateGeometry(&'static str),
    #[error("detection is not visible")]
    NotVisible,
    #[error("invalid camera model: {0}")]
    InvalidCamera(&'static str),
}

/// Pinhole intrinsics plus the fixed downward mount pitch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    pub focal_px: f64,
    pub principal_point: [f64; 2],
    pub image_size: [f64; 2],
    /// Rotation of the optical axis below the body x-axis, radians.
    pub pitch: f64,
}

impl Default for CameraModel {
    fn default() -> Self {
        Self {
            focal_px: 400.0,
            principal_point: [320.0, 240.0],
            image_size: [640.0, 480.0],
            pitch: std::f64::consts::FRAC_PI_4,
        }
    }
}

impl CameraModel {
    pub fn validate(&self) -> Result<(), GeometryError> {
        let [u0, v0] = self.principal_point;
        let [w, h] = self.image_size;
        if !(self.focal_px > 0.0 && self.focal_px.is_finite()) {
            return Err(GeometryError::InvalidCamera(
                "focal length must be positive",
            ));
        }
        if !(u0 > 0.0 && u0 < w && v0 > 0.0 && v0 < h) {
            return Err(GeometryError::InvalidCamera(
                "principal point outside image",
            ));
        }
        let half_pi = std::f64::consts::FRAC_PI_2;
        if !(self.pitch > -half_pi && self.pitch < half_pi) {
            return Err(GeometryError::InvalidCamera(
                "pitch must lie in (-pi/2, pi/2)",
            ));
        }
        Ok(())
    }

    pub fn image_center(&self) -> [f64; 2] {
        [self.image_size[0] / 2.0, self.image_size[1] / 2.0]
    }

    pub fn contains(&self, uv: [f64; 2]) -> bool {
        (0.0..=self.image_size[0]).contains(&uv[0]) && (0.0..=self.image_size[1]).contains(&uv[1])
    }
}

/// A projected point. `uv` is only meaningful when the point lies in front of
/// the camera; it is `[0, 0]` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelDetection {
    pub uv: [f64; 2],
    pub visible: bool,
}

impl PixelDetection {
    pub const HIDDEN: PixelDetection = PixelDetection {
        uv: [0.0, 0.0],
        visible: false,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min_uv: [f64; 2],
    pub max_uv: [f64; 2],
}

impl BoundingBox {
    /// Axis-aligned hull of the given pixels, `None` for an empty set.
    pub fn hull<I: IntoIterator<Item = [f64; 2]>>(pixels: I) -> Option<Self> {
        let mut it = pixels.into_iter();
        let first = it.next()?;
        let mut bbox = BoundingBox {
            min_uv: first,
            max_uv: first,
        };
        for p in it {
            for (k, v) in p.into_iter().enumerate() {
                bbox.min_uv[k] = bbox.min_uv[k].min(v);
                bbox.max_uv[k] = bbox.max_uv[k].max(v);
            }
        }
        Some(bbox)
    }

    pub fn center(&self) -> [f64; 2] {
        [
            0.5 * (self.min_uv[0] + self.max_uv[0]),
            0.5 * (self.min_uv[1] + self.max_uv[1]),
        ]
    }

    pub fn width(&self) -> f64 {
        self.max_uv[0] - self.min_uv[0]
    }

    pub fn height(&self) -> f64 {
        self.max_uv[1] - self.min_uv[1]
    }
}

/// Rotation about the world z-axis; maps ego-frame vectors into the world frame.
pub fn rotation_yaw(phi: f64) -> Mat3 {
    let (s, c) = phi.sin_cos();
    Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Wraps an angle to (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut w = a.rem_euclid(TAU);
    if w > PI {
        w -= TAU;
    }
    w
}

/// Extrinsics of a mounted camera: `p_cam = rotation * (p_world - center)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraPose {
    pub center: Vec3,
    pub rotation: Mat3,
}

impl CameraPose {
    /// Camera rigidly mounted on a MAV at `position` with heading `yaw`.
    pub fn mounted(position: Vec3, yaw: f64, pitch: f64) -> Self {
        let (sp, cp) = pitch.sin_cos();
        // camera axes expressed in the body frame
        let right = Vec3::new(0.0, -1.0, 0.0);
        let down = Vec3::new(-sp, 0.0, -cp);
        let forward = Vec3::new(cp, 0.0, -sp);
        let yaw_rot = rotation_yaw(yaw);
        let (r, d, f) = (yaw_rot * right, yaw_rot * down, yaw_rot * forward);
        let rotation = Mat3::new(r.x, r.y, r.z, d.x, d.y, d.z, f.x, f.y, f.z);
        Self {
            center: position,
            rotation,
        }
    }

    pub fn to_camera(&self, point_w: &Vec3) -> Vec3 {
        self.rotation * (point_w - self.center)
    }

    pub fn to_world(&self, point_c: &Vec3) -> Vec3 {
        self.rotation.transpose() * point_c + self.center
    }

    pub fn optical_axis(&self) -> Vec3 {
        self.rotation.row(2).transpose()
    }
}

/// Intrinsics and extrinsics of one view.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraView {
    pub model: CameraModel,
    pub pose: CameraPose,
}

impl CameraView {
    pub fn project_world(&self, point_w: &Vec3) -> PixelDetection {
        project(&self.pose.to_camera(point_w), &self.model)
    }

    /// Unit world-frame direction of the ray through pixel `uv`.
    pub fn ray(&self, uv: [f64; 2]) -> Vec3 {
        let n = normalized_coords(uv, &self.model);
        (self.pose.rotation.transpose() * Vec3::new(n[0], n[1], 1.0)).normalize()
    }
}

pub fn project(point_c: &Vec3, cam: &CameraModel) -> PixelDetection {
    if point_c.z <= Z_NEAR {
        return PixelDetection::HIDDEN;
    }
    let uv = [
        cam.principal_point[0] + cam.focal_px * point_c.x / point_c.z,
        cam.principal_point[1] + cam.focal_px * point_c.y / point_c.z,
    ];
    PixelDetection {
        uv,
        visible: cam.contains(uv),
    }
}

/// Camera-frame point at depth `z` along the ray through `uv`.
pub fn unproject(uv: [f64; 2], z: f64, cam: &CameraModel) -> Vec3 {
    let n = normalized_coords(uv, cam);
    Vec3::new(n[0] * z, n[1] * z, z)
}

fn normalized_coords(uv: [f64; 2], cam: &CameraModel) -> [f64; 2] {
    [
        (uv[0] - cam.principal_point[0]) / cam.focal_px,
        (uv[1] - cam.principal_point[1]) / cam.focal_px,
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonProjection {
    pub detections: [PixelDetection; JOINT_COUNT],
    /// Hull of the visible joints; `None` when no joint is visible.
    pub bbox: Option<BoundingBox>,
}

impl SkeletonProjection {
    pub fn from_detections(detections: [PixelDetection; JOINT_COUNT]) -> Self {
        let bbox = BoundingBox::hull(detections.iter().filter(|d| d.visible).map(|d| d.uv));
        Self { detections, bbox }
    }

    pub fn visible_count(&self) -> usize {
        self.detections.iter().filter(|d| d.visible).count()
    }
}

pub fn project_skeleton(joints: &[Vec3; JOINT_COUNT], view: &CameraView) -> SkeletonProjection {
    SkeletonProjection::from_detections(std::array::from_fn(|j| view.project_world(&joints[j])))
}

/// Linear least-squares triangulation of one point seen in two calibrated views.
///
/// Each view contributes two rows `(n_x r3 - r1) . p = t1 - n_x t3` (and the
/// same for `y`), where `r_i`/`t_i` are the rows of the world-to-camera
/// rotation and translation and `n` the normalized image coordinates. The
/// 4x3 system is solved through its normal equations.
pub fn triangulate_point(
    det_a: &PixelDetection,
    view_a: &CameraView,
    det_b: &PixelDetection,
    view_b: &CameraView,
) -> Result<Vec3, GeometryError> {
    if !det_a.visible || !det_b.visible {
        return Err(GeometryError::NotVisible);
    }
    if (view_a.pose.center - view_b.pose.center).norm() < MIN_BASELINE {
        return Err(GeometryError::DegenerateGeometry("camera centers coincide"));
    }
    let ray_a = view_a.ray(det_a.uv);
    let ray_b = view_b.ray(det_b.uv);
    if ray_a.cross(&ray_b).norm() < MIN_RAY_ANGLE.sin() {
        return Err(GeometryError::DegenerateGeometry("rays are parallel"));
    }

    let mut normal = Mat3::zeros();
    let mut rhs = Vec3::zeros();
    for (det, view) in [(det_a, view_a), (det_b, view_b)] {
        let n = normalized_coords(det.uv, &view.model);
        let rot = &view.pose.rotation;
        let t = -(rot * view.pose.center);
        let r3 = rot.row(2).transpose();
        for (k, nk) in n.iter().enumerate() {
            let row = *nk * r3 - rot.row(k).transpose();
            let b = t[k] - nk * t[2];
            normal += row * row.transpose();
            rhs += row * b;
        }
    }

    let eig = normal.symmetric_eigen();
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if !(min > 0.0) || max / min > MAX_NORMAL_CONDITION {
        return Err(GeometryError::DegenerateGeometry(
            "ill-conditioned normal equations",
        ));
    }
    normal
        .cholesky()
        .map(|c| c.solve(&rhs))
        .ok_or(GeometryError::DegenerateGeometry(
            "normal equations not positive definite",
        ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangulatedSkeleton {
    pub joints: [Vec3; JOINT_COUNT],
    pub valid: [bool; JOINT_COUNT],
}

impl TriangulatedSkeleton {
    pub fn invalid() -> Self {
        Self {
            joints: [Vec3::zeros(); JOINT_COUNT],
            valid: [false; JOINT_COUNT],
        }
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }
}

/// Triangulates every joint seen in both views. Joints missing from either
/// view are flagged invalid.
pub fn triangulate_skeleton(
    dets_a: &[PixelDetection; JOINT_COUNT],
    view_a: &CameraView,
    dets_b: &[PixelDetection; JOINT_COUNT],
    view_b: &CameraView,
) -> Result<TriangulatedSkeleton, GeometryError> {
    if (view_a.pose.center - view_b.pose.center).norm() < MIN_BASELINE {
        return Err(GeometryError::DegenerateGeometry("camera centers coincide"));
    }
    let mut out = TriangulatedSkeleton::invalid();
    for j in 0..JOINT_COUNT {
        if dets_a[j].visible && dets_b[j].visible {
            out.joints[j] = triangulate_point(&dets_a[j], view_a, &dets_b[j], view_b)?;
            out.valid[j] = true;
        }
    }
    Ok(out)
}
