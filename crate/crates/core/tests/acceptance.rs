//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Pass criterion names (A1..A9) to run a subset.

#![allow(clippy::needless_range_loop, clippy::type_complexity)]

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use aircap_arena::env::{EnvConfig, MocapEnv};
use aircap_arena::geometry::{
    rotation_yaw, triangulate_point, BoundingBox, CameraModel, CameraPose, CameraView,
    TriangulatedSkeleton, Vec3,
};
use aircap_arena::harness::baselines::{BaselineConfig, Strategy};
use aircap_arena::harness::eval::{run_eval, Controller, EvalConfig, Metric, MetricsReport};
use aircap_arena::harness::report::{emit_reports, percentile};
use aircap_arena::harness::trajectory::TestTrajectory;
use aircap_arena::perception::{mean_joint_error, MonocularPoseEstimate};
use aircap_arena::rewards::{
    r_center, r_col, r_concol, r_mhmr, r_spin, r_triag, r_workspace, r_wspin, v_pot, RewardConfig,
};
use aircap_arena::rl::gae::gae;
use aircap_arena::rl::mlp::Mlp;
use aircap_arena::rl::train::{random_policy_baseline, TrainConfig, Trainer};
use aircap_arena::rl::worker_threads;
use aircap_arena::skeleton::JOINT_COUNT;
use aircap_arena::variant::NetworkVariant;
use aircap_arena::world::{with_mavs, Action, MavState, WalkPlan};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() {
    let filters: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let criteria: [(&str, &str, fn() -> Outcome); 9] = [
        ("A1", "triangulation oracle", a1_triangulation),
        ("A2", "gradient checks", a2_gradients),
        ("A3", "GAE equivalence", a3_gae),
        ("A4", "reward conformance", a4_rewards),
        ("A5", "learning smoke test", a5_learning),
        ("A6", "multi-view benefit", a6_multiview),
        ("A7", "collision safety", a7_collision),
        ("A8", "determinism", a8_determinism),
        ("A9", "baseline ordering", a9_ordering),
    ];
    let mut failed = 0;
    let mut ran = 0;
    for (id, name, f) in criteria {
        if !filters.is_empty() && !filters.iter().any(|x| x.eq_ignore_ascii_case(id)) {
            continue;
        }
        ran += 1;
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f))
            .unwrap_or_else(|p| Err(format!("panicked: {}", panic_message(&p))));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("{id} PASS {name}: {d} [{secs:.1}s]"),
            Err(d) => {
                failed += 1;
                println!("{id} FAIL {name}: {d} [{secs:.1}s]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn panic_message(p: &Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<String>()
        .cloned()
        .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_default()
}

/// A camera `range` meters from `target` at bearing `bearing`, raised so the
/// optical axis passes through the target.
fn aimed_view(target: &Vec3, bearing: f64, range: f64, model: CameraModel) -> CameraView {
    let pos = Vec3::new(
        target.x + range * bearing.cos(),
        target.y + range * bearing.sin(),
        target.z + range * model.pitch.tan(),
    );
    CameraView {
        model,
        pose: CameraPose::mounted(pos, bearing + std::f64::consts::PI, model.pitch),
    }
}

fn a1_triangulation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let model = CameraModel::default();
    let mut configs = Vec::with_capacity(1000);
    while configs.len() < 1000 {
        let target = Vec3::new(
            rng.random_range(-5.0..5.0),
            rng.random_range(-5.0..5.0),
            rng.random_range(0.0..2.0),
        );
        let b0 = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        let sep = rng.random_range(30f64..150.0).to_radians();
        let va = aimed_view(&target, b0, rng.random_range(3.0..8.0), model);
        let vb = aimed_view(&target, b0 + sep, rng.random_range(3.0..8.0), model);
        let p = target
            + Vec3::new(
                rng.random_range(-0.5..0.5),
                rng.random_range(-0.5..0.5),
                rng.random_range(-0.5..0.5),
            );
        let (da, db) = (va.project_world(&p), vb.project_world(&p));
        if da.visible && db.visible {
            configs.push((p, da, va, db, vb));
        }
    }
    let t = Instant::now();
    let mut max_err = 0.0f64;
    for (p, da, va, db, vb) in &configs {
        let est = triangulate_point(da, va, db, vb).map_err(|e| e.to_string())?;
        max_err = max_err.max((est - p).norm());
    }
    let secs = t.elapsed().as_secs_f64();
    check(
        max_err < 1e-6 && secs < 1.0,
        format!(
            "max error {max_err:.3e} m over 1000 configurations in {:.1} ms",
            secs * 1e3
        ),
    )
}

fn half_sq_loss(net: &Mlp, x: &DMatrix<f64>, target: &DMatrix<f64>) -> f64 {
    let out = net.forward(x).unwrap();
    0.5 * (out.output() - target).norm_squared()
}

/// Sign pattern of every hidden pre-activation for the batch.
fn relu_pattern(net: &Mlp, x: &DMatrix<f64>) -> Vec<bool> {
    let cache = net.forward(x).unwrap();
    let n = cache.activations.len();
    cache.activations[1..n - 1]
        .iter()
        .flat_map(|a| a.iter().map(|v| *v > 0.0).collect::<Vec<_>>())
        .collect()
}

fn gradient_check(hidden: usize, seed: u64) -> Result<f64, String> {
    const H: f64 = 1e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (inputs, outputs, batch) = (12, 4, 8);
    let net = Mlp::new(&[inputs, hidden, hidden, outputs], &mut rng);
    let x = DMatrix::from_fn(inputs, batch, |_, _| rng.random_range(-1.0..1.0));
    let target = DMatrix::from_fn(outputs, batch, |_, _| rng.random_range(-1.0..1.0));
    let cache = net.forward(&x).map_err(|e| e.to_string())?;
    let (grads, _) = net
        .backward(&cache, &(cache.output() - &target))
        .map_err(|e| e.to_string())?;
    let analytic = grads.flatten();
    let base = net.flatten();
    let pattern = relu_pattern(&net, &x);

    let mut worst = 0.0f64;
    let mut probes = 0;
    let mut skipped = 0;
    while probes < 100 {
        let i = rng.random_range(0..base.len());
        let eval = |delta: f64| {
            let mut p = base.clone();
            p[i] += delta;
            let mut n = net.clone();
            n.assign_flat(&p);
            n
        };
        let (plus, minus) = (eval(H), eval(-H));
        // a kink inside the stencil makes the central difference meaningless
        if relu_pattern(&plus, &x) != pattern || relu_pattern(&minus, &x) != pattern {
            skipped += 1;
            if skipped > 10_000 {
                return Err("could not find kink-free probes".into());
            }
            continue;
        }
        let numeric =
            (half_sq_loss(&plus, &x, &target) - half_sq_loss(&minus, &x, &target)) / (2.0 * H);
        let a = analytic[i];
        let scale = a.abs().max(numeric.abs());
        let rel = if scale < 1e-10 {
            0.0
        } else {
            (a - numeric).abs() / scale
        };
        worst = worst.max(rel);
        probes += 1;
    }
    Ok(worst)
}

fn a2_gradients() -> Outcome {
    let small = gradient_check(64, 21)?;
    let large = gradient_check(256, 22)?;
    check(
        small < 1e-4 && large < 1e-4,
        format!("max relative error {small:.2e} (64x64), {large:.2e} (256x256), 100 probes each"),
    )
}

fn a3_gae() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = 100;
        let gamma = rng.random_range(0.8..1.0);
        let rewards: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let values: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let dones: Vec<bool> = (0..n).map(|_| rng.random_bool(0.05)).collect();
        let adv = gae(&rewards, &values, &dones, gamma, 1.0).map_err(|e| e.to_string())?;
        for t in 0..n {
            let mut ret = 0.0;
            let mut discount = 1.0;
            for k in t..n {
                ret += discount * rewards[k];
                discount *= gamma;
                if dones[k] {
                    break;
                }
            }
            worst = worst.max((adv.advantages[t] - (ret - values[t])).abs());
        }
    }
    check(
        worst <= 1e-10,
        format!("max deviation {worst:.2e} over 1000 sequences of 100 steps"),
    )
}

fn random_skeleton(rng: &mut ChaCha8Rng) -> [Vec3; JOINT_COUNT] {
    std::array::from_fn(|_| {
        Vec3::new(
            rng.random_range(-10.0..10.0),
            rng.random_range(-10.0..10.0),
            rng.random_range(0.0..2.0),
        )
    })
}

fn perturbed(truth: &[Vec3; JOINT_COUNT], rng: &mut ChaCha8Rng, scale: f64) -> [Vec3; JOINT_COUNT] {
    std::array::from_fn(|j| {
        truth[j]
            + Vec3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ) * scale
    })
}

/// Estimate whose every joint error is `s` times that of `base`.
fn scaled(truth: &[Vec3; JOINT_COUNT], base: &[Vec3; JOINT_COUNT], s: f64) -> [Vec3; JOINT_COUNT] {
    std::array::from_fn(|j| truth[j] + (base[j] - truth[j]) * s)
}

fn a4_rewards() -> Outcome {
    const N: usize = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cfg = RewardConfig::default();
    let cam = CameraModel::default();
    let mut failures: Vec<String> = Vec::new();
    let mut fail = |what: &str| {
        if failures.len() < 5 {
            failures.push(what.to_string());
        }
    };
    let in_unit = |r: f64| (0.0..=1.0).contains(&r);

    for _ in 0..N {
        // centering: box center swept outward along a random direction
        let dir = rng.random_range(0.0..std::f64::consts::TAU);
        let (r1, r2) = {
            let a = rng.random_range(0.0..500.0);
            let b = rng.random_range(0.0..500.0);
            (f64::min(a, b), f64::max(a, b))
        };
        let half = [rng.random_range(0.0..100.0), rng.random_range(0.0..150.0)];
        let bbox_at = |r: f64| {
            let c = cam.image_center();
            let m = [c[0] + r * dir.cos(), c[1] + r * dir.sin()];
            BoundingBox {
                min_uv: [m[0] - half[0], m[1] - half[1]],
                max_uv: [m[0] + half[0], m[1] + half[1]],
            }
        };
        let (c1, c2) = (
            r_center(Some(&bbox_at(r1)), &cam, &cfg),
            r_center(Some(&bbox_at(r2)), &cam, &cfg),
        );
        if !in_unit(c1) || !in_unit(c2) {
            fail("center out of range");
        }
        if c2 > c1 {
            fail("center not monotone");
        }

        // single-view pose terms
        let truth = random_skeleton(&mut rng);
        let spread = rng.random_range(0.0..2.0);
        let base = perturbed(&truth, &mut rng, spread);
        let (s1, s2) = {
            let a = rng.random_range(0.0..3.0);
            let b = rng.random_range(0.0..3.0);
            (f64::min(a, b), f64::max(a, b))
        };
        let mono = |s: f64| MonocularPoseEstimate {
            joints: scaled(&truth, &base, s),
            valid: true,
        };
        let (m1, m2) = (mono(s1), mono(s2));
        for (r1, r2, what) in [
            (r_spin(&m1, &truth, &cfg), r_spin(&m2, &truth, &cfg), "spin"),
            (
                r_wspin(&m1, &truth, &cfg),
                r_wspin(&m2, &truth, &cfg),
                "wspin",
            ),
        ] {
            if !in_unit(r1) || !in_unit(r2) {
                fail(&format!("{what} out of range"));
            }
            if r2 > r1 {
                fail(&format!("{what} not monotone"));
            }
        }

        // multi-view terms with a random visibility mask
        let mut valid: [bool; JOINT_COUNT] = std::array::from_fn(|_| rng.random_bool(0.8));
        if rng.random_bool(0.01) {
            valid = [false; JOINT_COUNT];
        }
        let tri = |s: f64| TriangulatedSkeleton {
            joints: scaled(&truth, &base, s),
            valid,
        };
        let (t1, t2) = (tri(s1), tri(s2));
        for (r1, r2, what) in [
            (
                r_triag(&t1, &truth, &cfg),
                r_triag(&t2, &truth, &cfg),
                "triag",
            ),
            (r_mhmr(&t1, &truth, &cfg), r_mhmr(&t2, &truth, &cfg), "mhmr"),
        ] {
            if !in_unit(r1) || !in_unit(r2) {
                fail(&format!("{what} out of range"));
            }
            if r2 > r1 {
                fail(&format!("{what} not monotone"));
            }
        }

        // distance terms
        let d1 = rng.random_range(0.0..30.0);
        let d2 = rng.random_range(0.0..30.0);
        let (lo, hi) = (f64::min(d1, d2), f64::max(d1, d2));
        let col = r_col(d1, &cfg);
        if col != -1.0 && col != 0.2 {
            fail("col outside {-1, 0.2}");
        }
        if r_col(lo, &cfg) > r_col(hi, &cfg) {
            fail("col not monotone");
        }
        let cc = r_concol(d1, &cfg);
        if !(-1.0..=0.2).contains(&cc) {
            fail("concol out of range");
        }
        let (p_lo, p_hi) = (v_pot(lo, cfg.d_lthresh), v_pot(hi, cfg.d_lthresh));
        if !in_unit(p_lo) || p_hi > p_lo {
            fail("v_pot out of range or not monotone");
        }
        if hi < cfg.d_lthresh && r_concol(lo, &cfg) > r_concol(hi, &cfg) {
            fail("concol not monotone below d_lthresh");
        }
        let ws = r_workspace(rng.random_bool(0.5), &cfg);
        if ws != 0.0 && ws != cfg.k_workspace {
            fail("workspace outside {k, 0}");
        }
    }

    // uniform weights reduce r_wspin to 1 - tanh(c2 d_J / 14) exactly
    let uniform = RewardConfig {
        joint_weights: RewardConfig::uniform_weights(),
        ..cfg
    };
    let mut mismatches = 0;
    for _ in 0..N {
        let truth = random_skeleton(&mut rng);
        let spread = rng.random_range(0.0..3.0);
        let est = MonocularPoseEstimate {
            joints: perturbed(&truth, &mut rng, spread),
            valid: true,
        };
        let d_j = mean_joint_error(&est.joints, &truth);
        let expected = 1.0 - (uniform.c2 * (d_j / 14.0)).tanh();
        if r_wspin(&est, &truth, &uniform).to_bits() != expected.to_bits() {
            mismatches += 1;
        }
    }
    if mismatches > 0 {
        failures.push(format!("{mismatches} uniform-weight wspin mismatches"));
    }
    check(
        failures.is_empty(),
        if failures.is_empty() {
            format!("{N} inputs per component in range and monotone; uniform wspin bit-exact")
        } else {
            failures.join("; ")
        },
    )
}

fn a5_learning() -> Outcome {
    let env = EnvConfig::default();
    let threads = worker_threads();
    let t = Instant::now();
    let baseline = random_policy_baseline(NetworkVariant::Single1, &env, 20, 0, threads)
        .map_err(|e| e.to_string())?;
    let mut trainer = Trainer::new(NetworkVariant::Single1, env, TrainConfig::default())
        .map_err(|e| e.to_string())?;
    let metrics = trainer
        .run(None, threads, |_| {})
        .map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    let tail: Vec<f64> = metrics
        .iter()
        .rev()
        .take(10)
        .map(|m| m.mean_ep_reward)
        .collect();
    let final_mean = tail.iter().sum::<f64>() / tail.len() as f64;
    check(
        metrics.len() == 200 && final_mean >= 2.0 * baseline && secs < 1800.0,
        format!(
            "final 10-iteration mean {final_mean:.2} vs random baseline {baseline:.2} (ratio {:.1}), {} iterations",
            final_mean / baseline,
            metrics.len()
        ),
    )
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    v.sort_by(f64::total_cmp);
    percentile(&v, 50.0)
}

fn strategy_eval(
    variant: NetworkVariant,
    strategy: Strategy,
    runs: usize,
    seed: u64,
) -> Result<MetricsReport, String> {
    let plan = TestTrajectory::builtin().plan;
    let cfg = EvalConfig::seeded(runs, 120.0, seed, plan);
    run_eval(
        variant,
        Controller::Strategy(strategy, BaselineConfig::default()),
        &EnvConfig::default(),
        &cfg,
        &strategy.to_string(),
        worker_threads(),
    )
    .map(|(r, _)| r)
    .map_err(|e| e.to_string())
}

fn a6_multiview() -> Outcome {
    let report = strategy_eval(NetworkVariant::Multi3, Strategy::Orbit, 20, 6)?;
    let mono =
        median(report.values(Metric::MpeMono, None, None)).ok_or("no monocular estimates")?;
    let triag =
        median(report.values(Metric::MpeTriag, None, None)).ok_or("no triangulated estimates")?;
    check(
        triag < 0.7 * mono,
        format!(
            "median triangulated {triag:.3} m vs monocular {mono:.3} m (ratio {:.3}), 20 runs",
            triag / mono
        ),
    )
}

/// Both MAVs command the fastest per-axis-bounded approach toward each other.
fn head_on_episode(seed: u64) -> Result<f64, String> {
    let env_cfg = EnvConfig::default();
    let variant = NetworkVariant::Multi4;
    let wc = env_cfg.world_for(variant);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let center = Vec3::new(
        rng.random_range(-6.0..6.0),
        rng.random_range(-6.0..6.0),
        rng.random_range(3.0..8.0),
    );
    let az = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    let el = rng.random_range(-0.5..0.5f64);
    let axis = Vec3::new(el.cos() * az.cos(), el.cos() * az.sin(), el.sin());
    let a = center - axis;
    let b = center + axis;
    let mavs = vec![
        MavState::at_rest(a, rng.random_range(-3.0..3.0), wc.camera),
        MavState::at_rest(b, rng.random_range(-3.0..3.0), wc.camera),
    ];
    let far = WalkPlan::stationary([10.0, 10.0], 0.0);
    let world = with_mavs(&wc, far, mavs, seed).map_err(|e| e.to_string())?;
    let mut env = MocapEnv::from_world(variant, &env_cfg, world).map_err(|e| e.to_string())?;
    let mut min_d = env.world().inter_mav_distance().unwrap();
    for _ in 0..80 {
        let w = env.world();
        let actions: Vec<Action> = (0..2)
            .map(|k| {
                let to = w.mavs[1 - k].position - w.mavs[k].position;
                let ego = rotation_yaw(w.mavs[k].yaw).transpose() * to;
                let v = ego * (w.config.v_max / ego.amax().max(1e-12));
                Action {
                    velocity: [v.x, v.y, v.z],
                    yaw_rate: 0.0,
                }
            })
            .collect();
        let step = env.step(&actions).map_err(|e| e.to_string())?;
        min_d = min_d.min(step.events.inter_mav_distance.unwrap());
    }
    Ok(min_d)
}

fn a7_collision() -> Outcome {
    let d_l = RewardConfig::default().d_lthresh;
    let mut worst = f64::INFINITY;
    for s in 0..20 {
        worst = worst.min(head_on_episode(700 + s)?);
    }
    let field_ok = worst >= d_l;

    let threads = worker_threads();
    let config = TrainConfig {
        iterations: 500,
        ..TrainConfig::default()
    };
    let mut trainer = Trainer::new(NetworkVariant::Multi3, EnvConfig::default(), config)
        .map_err(|e| e.to_string())?;
    trainer
        .run(None, threads, |_| {})
        .map_err(|e| e.to_string())?;
    let plan = TestTrajectory::builtin().plan;
    let cfg = EvalConfig::seeded(20, 120.0, 7, plan);
    let (report, _) = run_eval(
        NetworkVariant::Multi3,
        Controller::Policy(&trainer.policy),
        &trainer.env,
        &cfg,
        "2.3",
        threads,
    )
    .map_err(|e| e.to_string())?;
    let dists = report.values(Metric::InterMavDistance, None, None);
    let penalized = dists.iter().filter(|d| **d < d_l).count();
    let frac = penalized as f64 / dists.len() as f64;
    check(
        field_ok && frac < 0.01,
        format!(
            "head-on min distance {worst:.3} m over 20 episodes; trained 2.3 policy below d_lthresh on {penalized}/{} steps ({:.2}%)",
            dists.len(),
            100.0 * frac
        ),
    )
}

fn a8_determinism() -> Outcome {
    let config = TrainConfig {
        iterations: 5,
        ..TrainConfig::default()
    };
    let plan = TestTrajectory::builtin().plan;
    let eval_cfg = EvalConfig::seeded(20, 120.0, 8, plan);
    let execute = |threads: usize| -> Result<(Vec<u8>, Vec<u8>, Vec<u8>), String> {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let train_dir = dir.path().join("train");
        let mut trainer = Trainer::new(NetworkVariant::Single1, EnvConfig::default(), config)
            .map_err(|e| e.to_string())?;
        trainer
            .run(Some(&train_dir), threads, |_| {})
            .map_err(|e| e.to_string())?;
        let (report, replays) = run_eval(
            NetworkVariant::Single1,
            Controller::Policy(&trainer.policy),
            &trainer.env,
            &eval_cfg,
            "1.1",
            threads,
        )
        .map_err(|e| e.to_string())?;
        let eval_dir = dir.path().join("eval");
        emit_reports(&report, &replays, &eval_dir).map_err(|e| e.to_string())?;
        let read = |p: std::path::PathBuf| std::fs::read(p).map_err(|e| e.to_string());
        Ok((
            read(train_dir.join("metrics.csv"))?,
            read(train_dir.join("checkpoint.json"))?,
            read(eval_dir.join("metrics.csv"))?,
        ))
    };
    let first = execute(worker_threads())?;
    let second = execute(1)?;
    let train_rows = first.0.iter().filter(|b| **b == b'\n').count() - 1;
    let eval_rows = first.2.iter().filter(|b| **b == b'\n').count() - 1;
    check(
        first == second && train_rows == 5,
        format!(
            "training log ({train_rows} iterations), checkpoint and evaluation log ({eval_rows} rows, 20 runs) {}",
            if first == second { "byte-identical" } else { "differ" }
        ),
    )
}

fn a9_ordering() -> Outcome {
    let orbit = strategy_eval(NetworkVariant::Single1, Strategy::Orbit, 20, 9)?;
    let frontal = strategy_eval(NetworkVariant::Single1, Strategy::Frontal, 20, 9)?;
    let vo = orbit.visibility_fraction(None).ok_or("no orbit rows")?;
    let vf = frontal.visibility_fraction(None).ok_or("no frontal rows")?;
    let steps = orbit.values(Metric::Visible, None, None).len();
    check(
        vo > vf,
        format!(
            "visibility orbit {:.1}% vs frontal {:.1}%, 20 runs ({steps} steps each)",
            100.0 * vo,
            100.0 * vf
        ),
    )
}
