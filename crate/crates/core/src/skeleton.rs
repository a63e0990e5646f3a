//! The 14-joint subject skeleton and its procedural walking gait.

use serde::{Deserialize, Serialize};

use crate::geometry::{rotation_yaw, Vec3};

pub const JOINT_COUNT: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Joint {
    Head,
    Neck,
    RightShoulder,
    RightElbow,
    RightWrist,
    LeftShoulder,
    LeftElbow,
    LeftWrist,
    RightHip,
    RightKnee,
    RightAnkle,
    LeftHip,
    LeftKnee,
    LeftAnkle,
}

impl Joint {
    pub const ALL: [Joint; JOINT_COUNT] = [
        Joint::Head,
        Joint::Neck,
        Joint::RightShoulder,
        Joint::RightElbow,
        Joint::RightWrist,
        Joint::LeftShoulder,
        Joint::LeftElbow,
        Joint::LeftWrist,
        Joint::RightHip,
        Joint::RightKnee,
        Joint::RightAnkle,
        Joint::LeftHip,
        Joint::LeftKnee,
        Joint::LeftAnkle,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Joint::Head => "head",
            Joint::Neck => "neck",
            Joint::RightShoulder => "right_shoulder",
            Joint::RightElbow => "right_elbow",
            Joint::RightWrist => "right_wrist",
            Joint::LeftShoulder => "left_shoulder",
            Joint::LeftElbow => "left_elbow",
            Joint::LeftWrist => "left_wrist",
            Joint::RightHip => "right_hip",
            Joint::RightKnee => "right_knee",
            Joint::RightAnkle => "right_ankle",
            Joint::LeftHip => "left_hip",
            Joint::LeftKnee => "left_knee",
            Joint::LeftAnkle => "left_ankle",
        }
    }

    /// Distance from the pelvis in the kinematic tree, used to weight
    /// outward joints more heavily.
    pub fn depth(self) -> u32 {
        match self {
            Joint::RightHip | Joint::LeftHip => 1,
            Joint::Neck | Joint::RightShoulder | Joint::LeftShoulder => 2,
            Joint::RightKnee | Joint::LeftKnee => 2,
            Joint::Head | Joint::RightElbow | Joint::LeftElbow => 3,
            Joint::RightWrist | Joint::LeftWrist | Joint::RightAnkle | Joint::LeftAnkle => 4,
        }
    }
}

/// Adjacent joint pairs whose distance is fixed by the rigid template.
pub const BONES: [(Joint, Joint); 14] = [
    (Joint::Neck, Joint::Head),
    (Joint::Neck, Joint::RightShoulder),
    (Joint::Neck, Joint::LeftShoulder),
    (Joint::RightShoulder, Joint::RightElbow),
    (Joint::RightElbow, Joint::RightWrist),
    (Joint::LeftShoulder, Joint::LeftElbow),
    (Joint::LeftElbow, Joint::LeftWrist),
    (Joint::RightHip, Joint::LeftHip),
    (Joint::Neck, Joint::RightHip),
    (Joint::Neck, Joint::LeftHip),
    (Joint::RightHip, Joint::RightKnee),
    (Joint::RightKnee, Joint::RightAnkle),
    (Joint::LeftHip, Joint::LeftKnee),
    (Joint::LeftKnee, Joint::LeftAnkle),
];

/// Segment dimensions in meters. The root is the pelvis center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkeletonTemplate {
    pub height: f64,
    pub pelvis_height: f64,
    pub hip_half_width: f64,
    pub thigh: f64,
    pub shin: f64,
    pub shoulder_height: f64,
    pub shoulder_half_width: f64,
    pub neck_height: f64,
    pub head_height: f64,
    pub upper_arm: f64,
    pub forearm: f64,
    /// Peak thigh swing at full walking amplitude, radians.
    pub leg_swing: f64,
    /// Peak arm swing at full walking amplitude, radians.
    pub arm_swing: f64,
}

impl Default for SkeletonTemplate {
    fn default() -> Self {
        Self::with_height(1.7)
    }
}

impl SkeletonTemplate {
    /// Anthropometric segment ratios scaled to a standing height.
    pub fn with_height(h: f64) -> Self {
        Self {
            height: h,
            pelvis_height: 0.530 * h,
            hip_half_width: 0.052 * h,
            thigh: 0.245 * h,
            shin: 0.246 * h,
            shoulder_height: 0.818 * h,
            shoulder_half_width: 0.129 * h,
            neck_height: 0.870 * h,
            head_height: 0.936 * h,
            upper_arm: 0.186 * h,
            forearm: 0.146 * h,
            leg_swing: 0.45,
            arm_swing: 0.35,
        }
    }

    /// World joint positions for a pelvis at `root` facing `yaw`, with gait
    /// `phase` (radians) and swing `amplitude` in [0, 1].
    pub fn pose(&self, root: &Vec3, yaw: f64, phase: f64, amplitude: f64) -> [Vec3; JOINT_COUNT] {
        let mut local = [Vec3::zeros(); JOINT_COUNT];
        let sagittal = |angle: f64| Vec3::new(angle.sin(), 0.0, -angle.cos());

        let neck = Vec3::new(0.0, 0.0, self.neck_height - self.pelvis_height);
        local[Joint::Neck.index()] = neck;
        local[Joint::Head.index()] = Vec3::new(0.0, 0.0, self.head_height - self.pelvis_height);

        let shoulder_z = self.shoulder_height - self.pelvis_height;
        for (side, shoulder, elbow, wrist, hip, knee, ankle) in [
            (
                -1.0,
                Joint::RightShoulder,
                Joint::RightElbow,
                Joint::RightWrist,
                Joint::RightHip,
                Joint::RightKnee,
                Joint::RightAnkle,
            ),
            (
                1.0,
                Joint::LeftShoulder,
                Joint::LeftElbow,
                Joint::LeftWrist,
                Joint::LeftHip,
                Joint::LeftKnee,
                Joint::LeftAnkle,
            ),
        ] {
            // left and right limbs move in antiphase
            let s = (phase
                + if side > 0.0 {
                    0.0
                } else {
                    std::f64::consts::PI
                })
            .sin();

            let hip_pos = Vec3::new(0.0, side * self.hip_half_width, 0.0);
            let thigh_angle = amplitude * self.leg_swing * s;
            let knee_flex = amplitude * 0.6 * (0.5 - 0.5 * s);
            let knee_pos = hip_pos + self.thigh * sagittal(thigh_angle);
            let ankle_pos = knee_pos + self.shin * sagittal(thigh_angle - knee_flex);

            let shoulder_pos = Vec3::new(0.0, side * self.shoulder_half_width, shoulder_z);
            let arm_angle = -amplitude * self.arm_swing * s;
            let elbow_pos = shoulder_pos + self.upper_arm * sagittal(arm_angle);
            let wrist_pos = elbow_pos + self.forearm * sagittal(arm_angle + 0.2 + 0.3 * amplitude);

            local[hip.index()] = hip_pos;
            local[knee.index()] = knee_pos;
            local[ankle.index()] = ankle_pos;
            local[shoulder.index()] = shoulder_pos;
            local[elbow.index()] = elbow_pos;
            local[wrist.index()] = wrist_pos;
        }

        let rot = rotation_yaw(yaw);
        local.map(|p| root + rot * p)
    }

    pub fn bone_lengths(joints: &[Vec3; JOINT_COUNT]) -> [f64; BONES.len()] {
        BONES.map(|(a, b)| (joints[a.index()] - joints[b.index()]).norm())
    }
}

/// Mean position of all joints.
pub fn centroid(joints: &[Vec3; JOINT_COUNT]) -> Vec3 {
    joints.iter().sum::<Vec3>() / JOINT_COUNT as f64
}
