#ifndef AIRCAP_ARENA_H
#define AIRCAP_ARENA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AircapStatus {
  AIRCAP_STATUS_OK = 0,
  AIRCAP_STATUS_NULL_POINTER = 1,
  AIRCAP_STATUS_INVALID_ARGUMENT = 2,
  AIRCAP_STATUS_BUFFER_TOO_SMALL = 3,
  AIRCAP_STATUS_DEGENERATE = 4,
  AIRCAP_STATUS_NOT_VISIBLE = 5,
  AIRCAP_STATUS_IO = 6,
  AIRCAP_STATUS_PANIC = 7,
} AircapStatus;

/**
 * Opaque simulation environment.
 */
typedef struct AircapEnv AircapEnv;

/**
 * Opaque trained policy.
 */
typedef struct AircapPolicy AircapPolicy;

/**
 * A camera mounted on a MAV: body position and yaw plus intrinsics.
 */
typedef struct AircapCamera {
  double position[3];
  double yaw;
  double focal_px;
  double principal_point[2];
  double image_size[2];
  double pitch;
} AircapCamera;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next call into this library on the same thread.
 */
const char *aircap_last_error(void);

/**
 * Default camera at `position` (origin when null) with heading `yaw`.
 *
 * # Safety
 * A non-null `position` must point to 3 doubles.
 */
struct AircapCamera aircap_camera_default(const double *position, double yaw);

/**
 * Projects a world point. `visible` is set to whether the point lands
 * inside the image; `uv` is only written when it does.
 *
 * # Safety
 * `point` must point to 3 doubles, `uv` to 2 writable doubles.
 */
enum AircapStatus aircap_project_point(const struct AircapCamera *camera,
                                       const double *point,
                                       double *uv,
                                       bool *visible);

/**
 * Linear two-view triangulation of one pixel pair.
 *
 * # Safety
 * `uv_a`/`uv_b` must point to 2 doubles, `out` to 3 writable doubles.
 */
enum AircapStatus aircap_triangulate_point(const struct AircapCamera *camera_a,
                                           const double *uv_a,
                                           const struct AircapCamera *camera_b,
                                           const double *uv_b,
                                           double *out);

/**
 * Repulsive potential in [0, 1], zero at and beyond `d_lthresh`.
 */
double aircap_v_pot(double dist, double d_lthresh);

/**
 * Collision term for a pair of MAVs `dist` meters apart.
 *
 * # Safety
 * `out` must point to a writable double.
 */
enum AircapStatus aircap_reward_col(double dist, double d_lthresh, double d_hthresh, double *out);

/**
 * Continuous collision term for a pair of MAVs `dist` meters apart.
 *
 * # Safety
 * `out` must point to a writable double.
 */
enum AircapStatus aircap_reward_concol(double dist,
                                       double d_lthresh,
                                       double d_hthresh,
                                       double *out);

/**
 * Creates an environment for `variant` ("1.1" .. "2.4"). `config_json` may
 * be null for defaults, otherwise a JSON environment config.
 *
 * # Safety
 * `variant` and a non-null `config_json` must be NUL-terminated strings;
 * `out` must point to writable storage for a handle.
 */
enum AircapStatus aircap_env_new(const char *variant,
                                 const char *config_json,
                                 uint64_t seed,
                                 struct AircapEnv **out);

/**
 * # Safety
 * `env` must be null or a handle from `aircap_env_new` not yet freed.
 */
void aircap_env_free(struct AircapEnv *env);

/**
 * # Safety
 * `env` must be a live handle.
 */
size_t aircap_env_agents(const struct AircapEnv *env);

/**
 * # Safety
 * `env` must be a live handle.
 */
size_t aircap_env_observation_dim(const struct AircapEnv *env);

/**
 * # Safety
 * `env` must be a live handle.
 */
size_t aircap_env_action_dim(const struct AircapEnv *env);

/**
 * # Safety
 * `env` must be a live handle.
 */
uint64_t aircap_env_step_count(const struct AircapEnv *env);

/**
 * Writes agent `agent`'s observation into `out[0..len]`.
 *
 * # Safety
 * `env` must be a live handle and `out` must hold `len` doubles.
 */
enum AircapStatus aircap_env_observation(const struct AircapEnv *env,
                                         size_t agent,
                                         double *out,
                                         size_t len);

/**
 * Advances one step with normalized actions, agent-major
 * (`agents * action_dim` values in [-1, 1]). Writes one total reward per
 * agent and whether the episode ended.
 *
 * # Safety
 * `actions` must hold `actions_len` doubles, `rewards` `rewards_len`
 * writable doubles and `done` a writable bool.
 */
enum AircapStatus aircap_env_step(struct AircapEnv *env,
                                  const double *actions,
                                  size_t actions_len,
                                  double *rewards,
                                  size_t rewards_len,
                                  bool *done);

/**
 * Loads the policy stored in a training checkpoint.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum AircapStatus aircap_policy_load(const char *path, struct AircapPolicy **out);

/**
 * # Safety
 * `policy` must be null or a handle from `aircap_policy_load` not yet freed.
 */
void aircap_policy_free(struct AircapPolicy *policy);

/**
 * Writes the variant label ("1.1" .. "2.4") into `out` including the
 * terminating NUL.
 *
 * # Safety
 * `policy` must be a live handle and `out` must hold `len` bytes.
 */
enum AircapStatus aircap_policy_variant(const struct AircapPolicy *policy, char *out, size_t len);

/**
 * Deterministic (mean) action for one observation.
 *
 * # Safety
 * `policy` must be a live handle; `obs` must hold `obs_len` doubles and
 * `action` `action_len` writable doubles.
 */
enum AircapStatus aircap_policy_act(const struct AircapPolicy *policy,
                                    const double *obs,
                                    size_t obs_len,
                                    double *action,
                                    size_t action_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AIRCAP_ARENA_H */
