//! C ABI over the simulator, the geometry kernels, the reward terms and
//! trained policies.
//!
//! Every fallible function returns an [`AircapStatus`]. On failure a message
//! is kept per thread and can be read with [`aircap_last_error`]. Handles are
//! opaque; each `*_new`/`*_load` must be paired with the matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use aircap_arena::env::{EnvConfig, MocapEnv};
use aircap_arena::geometry::{
    triangulate_point, CameraModel, CameraPose, CameraView, GeometryError, PixelDetection, Vec3,
};
use aircap_arena::rewards::{r_col, r_concol, v_pot, RewardConfig};
use aircap_arena::rl::checkpoint::Checkpoint;
use aircap_arena::rl::policy::GaussianPolicy;
use aircap_arena::variant::NetworkVariant;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AircapStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    BufferTooSmall = 3,
    Degenerate = 4,
    NotVisible = 5,
    Io = 6,
    Panic = 7,
}

/// A camera mounted on a MAV: body position and yaw plus intrinsics.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AircapCamera {
    pub position: [f64; 3],
    pub yaw: f64,
    pub focal_px: f64,
    pub principal_point: [f64; 2],
    pub image_size: [f64; 2],
    pub pitch: f64,
}

/// Opaque simulation environment.
pub struct AircapEnv {
    inner: MocapEnv,
}

/// Opaque trained policy.
pub struct AircapPolicy {
    variant: NetworkVariant,
    policy: GaussianPolicy,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn fail(status: AircapStatus, msg: impl Into<String>) -> AircapStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> AircapStatus) -> AircapStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(AircapStatus::Panic, "internal panic"),
    }
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn aircap_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, AircapStatus> {
    if p.is_null() {
        return Err(fail(AircapStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(AircapStatus::InvalidArgument, "string is not UTF-8"))
}

fn view(cam: &AircapCamera) -> Result<CameraView, AircapStatus> {
    let model = CameraModel {
        focal_px: cam.focal_px,
        principal_point: cam.principal_point,
        image_size: cam.image_size,
        pitch: cam.pitch,
    };
    model
        .validate()
        .map_err(|e| fail(AircapStatus::InvalidArgument, e.to_string()))?;
    Ok(CameraView {
        model,
        pose: CameraPose::mounted(Vec3::from(cam.position), cam.yaw, cam.pitch),
    })
}

/// Default camera at `position` (origin when null) with heading `yaw`.
///
/// # Safety
/// A non-null `position` must point to 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn aircap_camera_default(position: *const f64, yaw: f64) -> AircapCamera {
    let m = CameraModel::default();
    let p = if position.is_null() {
        [0.0; 3]
    } else {
        [*position, *position.add(1), *position.add(2)]
    };
    AircapCamera {
        position: p,
        yaw,
        focal_px: m.focal_px,
        principal_point: m.principal_point,
        image_size: m.image_size,
        pitch: m.pitch,
    }
}

/// Projects a world point. `visible` is set to whether the point lands
/// inside the image; `uv` is only written when it does.
///
/// # Safety
/// `point` must point to 3 doubles, `uv` to 2 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn aircap_project_point(
    camera: *const AircapCamera,
    point: *const f64,
    uv: *mut f64,
    visible: *mut bool,
) -> AircapStatus {
    guard(|| {
        if camera.is_null() || point.is_null() || uv.is_null() || visible.is_null() {
            return fail(AircapStatus::NullPointer, "null argument");
        }
        let v = match view(&*camera) {
            Ok(v) => v,
            Err(s) => return s,
        };
        let p = Vec3::new(*point, *point.add(1), *point.add(2));
        let d = v.project_world(&p);
        *visible = d.visible;
        if d.visible {
            *uv = d.uv[0];
            *uv.add(1) = d.uv[1];
        }
        AircapStatus::Ok
    })
}

/// Linear two-view triangulation of one pixel pair.
///
/// # Safety
/// `uv_a`/`uv_b` must point to 2 doubles, `out` to 3 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn aircap_triangulate_point(
    camera_a: *const AircapCamera,
    uv_a: *const f64,
    camera_b: *const AircapCamera,
    uv_b: *const f64,
    out: *mut f64,
) -> AircapStatus {
    guard(|| {
        if camera_a.is_null()
            || camera_b.is_null()
            || uv_a.is_null()
            || uv_b.is_null()
            || out.is_null()
        {
            return fail(AircapStatus::NullPointer, "null argument");
        }
        let (va, vb) = match (view(&*camera_a), view(&*camera_b)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        let da = PixelDetection {
            uv: [*uv_a, *uv_a.add(1)],
            visible: true,
        };
        let db = PixelDetection {
            uv: [*uv_b, *uv_b.add(1)],
            visible: true,
        };
        match triangulate_point(&da, &va, &db, &vb) {
            Ok(p) => {
                for k in 0..3 {
                    *out.add(k) = p[k];
                }
                AircapStatus::Ok
            }
            Err(GeometryError::NotVisible) => fail(AircapStatus::NotVisible, "point not visible"),
            Err(e @ GeometryError::DegenerateGeometry(_)) => {
                fail(AircapStatus::Degenerate, e.to_string())
            }
            Err(e) => fail(AircapStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Repulsive potential in [0, 1], zero at and beyond `d_lthresh`.
#[no_mangle]
pub extern "C" fn aircap_v_pot(dist: f64, d_lthresh: f64) -> f64 {
    v_pot(dist, d_lthresh)
}

fn thresholds(d_lthresh: f64, d_hthresh: f64) -> Result<RewardConfig, AircapStatus> {
    let cfg = RewardConfig {
        d_lthresh,
        d_hthresh,
        ..RewardConfig::default()
    };
    cfg.validate()
        .map_err(|e| fail(AircapStatus::InvalidArgument, e.to_string()))?;
    Ok(cfg)
}

/// Collision term for a pair of MAVs `dist` meters apart.
///
/// # Safety
/// `out` must point to a writable double.
#[no_mangle]
pub unsafe extern "C" fn aircap_reward_col(
    dist: f64,
    d_lthresh: f64,
    d_hthresh: f64,
    out: *mut f64,
) -> AircapStatus {
    guard(|| {
        if out.is_null() {
            return fail(AircapStatus::NullPointer, "null output");
        }
        match thresholds(d_lthresh, d_hthresh) {
            Ok(cfg) => {
                *out = r_col(dist, &cfg);
                AircapStatus::Ok
            }
            Err(s) => s,
        }
    })
}

/// Continuous collision term for a pair of MAVs `dist` meters apart.
///
/// # Safety
/// `out` must point to a writable double.
#[no_mangle]
pub unsafe extern "C" fn aircap_reward_concol(
    dist: f64,
    d_lthresh: f64,
    d_hthresh: f64,
    out: *mut f64,
) -> AircapStatus {
    guard(|| {
        if out.is_null() {
            return fail(AircapStatus::NullPointer, "null output");
        }
        match thresholds(d_lthresh, d_hthresh) {
            Ok(cfg) => {
                *out = r_concol(dist, &cfg);
                AircapStatus::Ok
            }
            Err(s) => s,
        }
    })
}

/// Creates an environment for `variant` ("1.1" .. "2.4"). `config_json` may
/// be null for defaults, otherwise a JSON environment config.
///
/// # Safety
/// `variant` and a non-null `config_json` must be NUL-terminated strings;
/// `out` must point to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn aircap_env_new(
    variant: *const c_char,
    config_json: *const c_char,
    seed: u64,
    out: *mut *mut AircapEnv,
) -> AircapStatus {
    guard(|| {
        if out.is_null() {
            return fail(AircapStatus::NullPointer, "null output handle");
        }
        *out = ptr::null_mut();
        let v: NetworkVariant = match str_arg(variant).map(str::parse) {
            Ok(Ok(v)) => v,
            Ok(Err(e)) => return fail(AircapStatus::InvalidArgument, e.to_string()),
            Err(s) => return s,
        };
        let cfg: EnvConfig = if config_json.is_null() {
            EnvConfig::default()
        } else {
            match str_arg(config_json).map(serde_json::from_str::<EnvConfig>) {
                Ok(Ok(c)) => c,
                Ok(Err(e)) => return fail(AircapStatus::InvalidArgument, e.to_string()),
                Err(s) => return s,
            }
        };
        match MocapEnv::reset(v, &cfg, seed) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(AircapEnv { inner }));
                AircapStatus::Ok
            }
            Err(e) => fail(AircapStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// # Safety
/// `env` must be null or a handle from `aircap_env_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn aircap_env_free(env: *mut AircapEnv) {
    if !env.is_null() {
        drop(Box::from_raw(env));
    }
}

/// # Safety
/// `env` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn aircap_env_agents(env: *const AircapEnv) -> usize {
    env.as_ref().map_or(0, |e| e.inner.variant().agents())
}

/// # Safety
/// `env` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn aircap_env_observation_dim(env: *const AircapEnv) -> usize {
    env.as_ref()
        .map_or(0, |e| e.inner.variant().observation_layout().len())
}

/// # Safety
/// `env` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn aircap_env_action_dim(env: *const AircapEnv) -> usize {
    env.as_ref().map_or(0, |e| e.inner.variant().action_dim())
}

/// # Safety
/// `env` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn aircap_env_step_count(env: *const AircapEnv) -> u64 {
    env.as_ref().map_or(0, |e| e.inner.world().step)
}

/// Writes agent `agent`'s observation into `out[0..len]`.
///
/// # Safety
/// `env` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn aircap_env_observation(
    env: *const AircapEnv,
    agent: usize,
    out: *mut f64,
    len: usize,
) -> AircapStatus {
    guard(|| {
        let Some(e) = env.as_ref() else {
            return fail(AircapStatus::NullPointer, "null env");
        };
        if out.is_null() {
            return fail(AircapStatus::NullPointer, "null output");
        }
        match e.inner.observation(agent) {
            Ok(obs) if obs.len() > len => fail(
                AircapStatus::BufferTooSmall,
                format!("observation needs {} values", obs.len()),
            ),
            Ok(obs) => {
                ptr::copy_nonoverlapping(obs.as_ptr(), out, obs.len());
                AircapStatus::Ok
            }
            Err(err) => fail(AircapStatus::InvalidArgument, err.to_string()),
        }
    })
}

/// Advances one step with normalized actions, agent-major
/// (`agents * action_dim` values in [-1, 1]). Writes one total reward per
/// agent and whether the episode ended.
///
/// # Safety
/// `actions` must hold `actions_len` doubles, `rewards` `rewards_len`
/// writable doubles and `done` a writable bool.
#[no_mangle]
pub unsafe extern "C" fn aircap_env_step(
    env: *mut AircapEnv,
    actions: *const f64,
    actions_len: usize,
    rewards: *mut f64,
    rewards_len: usize,
    done: *mut bool,
) -> AircapStatus {
    guard(|| {
        let Some(e) = env.as_mut() else {
            return fail(AircapStatus::NullPointer, "null env");
        };
        if actions.is_null() || rewards.is_null() || done.is_null() {
            return fail(AircapStatus::NullPointer, "null argument");
        }
        let v = e.inner.variant();
        let (k, d) = (v.agents(), v.action_dim());
        if actions_len != k * d {
            return fail(
                AircapStatus::InvalidArgument,
                format!("expected {} action values, got {actions_len}", k * d),
            );
        }
        if rewards_len < k {
            return fail(
                AircapStatus::BufferTooSmall,
                format!("rewards need {k} values"),
            );
        }
        let flat = std::slice::from_raw_parts(actions, actions_len);
        let raw: Vec<Vec<f64>> = flat.chunks(d).map(<[f64]>::to_vec).collect();
        match e.inner.step_policy(&raw) {
            Ok(step) => {
                for (i, r) in step.rewards.iter().enumerate() {
                    *rewards.add(i) = r.total;
                }
                *done = step.events.done;
                AircapStatus::Ok
            }
            Err(err) => fail(AircapStatus::InvalidArgument, err.to_string()),
        }
    })
}

/// Loads the policy stored in a training checkpoint.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn aircap_policy_load(
    path: *const c_char,
    out: *mut *mut AircapPolicy,
) -> AircapStatus {
    guard(|| {
        if out.is_null() {
            return fail(AircapStatus::NullPointer, "null output handle");
        }
        *out = ptr::null_mut();
        let p = match str_arg(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match Checkpoint::load(Path::new(p)) {
            Ok(ck) => {
                *out = Box::into_raw(Box::new(AircapPolicy {
                    variant: ck.variant,
                    policy: ck.policy,
                }));
                AircapStatus::Ok
            }
            Err(e) => fail(AircapStatus::Io, e.to_string()),
        }
    })
}

/// # Safety
/// `policy` must be null or a handle from `aircap_policy_load` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn aircap_policy_free(policy: *mut AircapPolicy) {
    if !policy.is_null() {
        drop(Box::from_raw(policy));
    }
}

/// Writes the variant label ("1.1" .. "2.4") into `out` including the
/// terminating NUL.
///
/// # Safety
/// `policy` must be a live handle and `out` must hold `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn aircap_policy_variant(
    policy: *const AircapPolicy,
    out: *mut c_char,
    len: usize,
) -> AircapStatus {
    guard(|| {
        let Some(p) = policy.as_ref() else {
            return fail(AircapStatus::NullPointer, "null policy");
        };
        if out.is_null() {
            return fail(AircapStatus::NullPointer, "null output");
        }
        let label = p.variant.label().as_bytes();
        if label.len() + 1 > len {
            return fail(AircapStatus::BufferTooSmall, "label buffer too small");
        }
        ptr::copy_nonoverlapping(label.as_ptr() as *const c_char, out, label.len());
        *out.add(label.len()) = 0;
        AircapStatus::Ok
    })
}

/// Deterministic (mean) action for one observation.
///
/// # Safety
/// `policy` must be a live handle; `obs` must hold `obs_len` doubles and
/// `action` `action_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn aircap_policy_act(
    policy: *const AircapPolicy,
    obs: *const f64,
    obs_len: usize,
    action: *mut f64,
    action_len: usize,
) -> AircapStatus {
    guard(|| {
        let Some(p) = policy.as_ref() else {
            return fail(AircapStatus::NullPointer, "null policy");
        };
        if obs.is_null() || action.is_null() {
            return fail(AircapStatus::NullPointer, "null argument");
        }
        if action_len < p.policy.act_dim() {
            return fail(
                AircapStatus::BufferTooSmall,
                format!("action needs {} values", p.policy.act_dim()),
            );
        }
        let o = std::slice::from_raw_parts(obs, obs_len);
        match p.policy.mean_action(o) {
            Ok(a) => {
                ptr::copy_nonoverlapping(a.as_ptr(), action, a.len());
                AircapStatus::Ok
            }
            Err(e) => fail(AircapStatus::InvalidArgument, e.to_string()),
        }
    })
}
