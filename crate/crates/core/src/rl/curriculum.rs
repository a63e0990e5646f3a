//! Warm-starting a policy for one variant from a policy trained on another.
//!
//! Input columns are matched by observation feature name and action rows by
//! action name. Columns for features the source never saw start at zero.
//! Hidden units beyond the source width keep their fresh incoming weights but
//! get zero outgoing weights, so on inputs whose new features are zero the
//! transferred mean head reproduces the source exactly.

use super::policy::GaussianPolicy;
use super::RlError;
use crate::variant::NetworkVariant;

pub const ACTION_NAMES: [&str; 4] = ["vx", "vy", "vz", "yaw_rate"];

pub fn action_names(variant: NetworkVariant) -> &'static [&'static str] {
    &ACTION_NAMES[..variant.action_dim()]
}

/// Overwrites the overlapping part of `target` with `source`.
pub fn transfer_policy(
    source: &GaussianPolicy,
    source_variant: NetworkVariant,
    target: &mut GaussianPolicy,
    target_variant: NetworkVariant,
) -> Result<(), RlError> {
    let src_in = source_variant.observation_layout().feature_names();
    let dst_in = target_variant.observation_layout().feature_names();
    if source.obs_dim() != src_in.len() || target.obs_dim() != dst_in.len() {
        return Err(RlError::Config(
            "policy does not match its variant layout".into(),
        ));
    }
    if source.mean.layers.len() != target.mean.layers.len() {
        return Err(RlError::Config("source and target depths differ".into()));
    }
    let src_act = action_names(source_variant);
    let dst_act = action_names(target_variant);
    let layers = target.mean.layers.len();

    for l in 0..layers {
        let s = &source.mean.layers[l];
        let t = &mut target.mean.layers[l];
        let (t_rows, t_cols) = t.weights.shape();
        let (s_rows, s_cols) = s.weights.shape();

        // row r of target <- row of source, if any
        let row_map: Vec<Option<usize>> = if l + 1 == layers {
            dst_act
                .iter()
                .map(|n| src_act.iter().position(|m| m == n))
                .collect()
        } else {
            (0..t_rows).map(|r| (r < s_rows).then_some(r)).collect()
        };
        // column c of target <- column of source, None for a new feature or unit
        let col_map: Vec<Option<usize>> = if l == 0 {
            dst_in
                .iter()
                .map(|n| src_in.iter().position(|m| m == n))
                .collect()
        } else {
            (0..t_cols).map(|c| (c < s_cols).then_some(c)).collect()
        };

        for (r, sr) in row_map.iter().enumerate() {
            for (c, sc) in col_map.iter().enumerate() {
                match (sr, sc) {
                    (Some(sr), Some(sc)) => t.weights[(r, c)] = s.weights[(*sr, *sc)],
                    // new input features and outgoing weights of new units
                    (_, None) => t.weights[(r, c)] = 0.0,
                    (None, Some(_)) => {}
                }
            }
            if let Some(sr) = sr {
                t.bias[r] = s.bias[*sr];
            }
        }
    }
    for (r, n) in dst_act.iter().enumerate() {
        if let Some(sr) = src_act.iter().position(|m| m == n) {
            target.log_std[r] = source.log_std[sr];
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_policy(v: NetworkVariant, hidden: usize, seed: u64) -> GaussianPolicy {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = GaussianPolicy::new(
            v.observation_layout().len(),
            hidden,
            v.action_dim(),
            -0.3,
            &mut rng,
        );
        for l in &mut p.mean.layers {
            l.bias.apply(|b| *b = rng.random_range(-0.3..0.3));
        }
        p
    }

    #[test]
    fn single_to_multi_preserves_shared_behavior() {
        let src = random_policy(NetworkVariant::Single4, 64, 1);
        let mut dst = random_policy(NetworkVariant::Multi3, 256, 2);
        transfer_policy(
            &src,
            NetworkVariant::Single4,
            &mut dst,
            NetworkVariant::Multi3,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let shared: Vec<f64> = (0..7).map(|_| rng.random_range(-2.0..2.0)).collect();
            let mut wide = shared.clone();
            wide.extend((0..4).map(|_| rng.random_range(-2.0..2.0)));
            let a = src.mean_action(&shared).unwrap();
            let b = dst.mean_action(&wide).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-12);
            }
        }
        assert_eq!(dst.log_std, src.log_std);
    }

    #[test]
    fn static_subject_target_drops_velocity_and_yaw() {
        let src = random_policy(NetworkVariant::Single1, 64, 4);
        let mut dst = random_policy(NetworkVariant::Multi1, 256, 5);
        transfer_policy(
            &src,
            NetworkVariant::Single1,
            &mut dst,
            NetworkVariant::Multi1,
        )
        .unwrap();
        // person_x/y/z, person_yaw are shared; velocity features are absent in the target
        let obs_src = [1.0, -0.5, 2.0, 0.0, 0.0, 0.0, 0.4];
        let obs_dst = [1.0, -0.5, 2.0, 0.4, 3.0, 1.0, 0.2, -0.7];
        let a = src.mean_action(&obs_src).unwrap();
        let b = dst.mean_action(&obs_dst).unwrap();
        assert_eq!(b.len(), 3);
        for k in 0..3 {
            assert!((a[k] - b[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn layout_mismatch_is_rejected() {
        let src = random_policy(NetworkVariant::Single1, 64, 4);
        let mut dst = random_policy(NetworkVariant::Multi1, 256, 5);
        assert!(transfer_policy(
            &src,
            NetworkVariant::Multi1,
            &mut dst,
            NetworkVariant::Multi1
        )
        .is_err());
    }
}
