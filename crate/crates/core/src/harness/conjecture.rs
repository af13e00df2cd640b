//! Sampler for the conjectured joint limit of the rescaled component
//! sizes, and the comparison of experiment output against it.
//!
//! The limit object: take the points `X_1 < X_2 < …` of a unit-rate
//! Poisson process on the line (cumulative sums of independent unit
//! exponentials) and map each through the inverse of the decreasing
//! function `E₁` to get `Y_i = E₁⁻¹(X_i)`, so `Y_1 ≥ Y_2 ≥ …`. The
//! conjecture states the rescaled size vector `(|Q|·|C_1|, |Q|·|C_2|, …)`
//! converges jointly to `(Y_1, Y_2, …)`. The comparison is informational:
//! the statement is open, so distances are reported, never gated.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::stats::{energy_distance_2d, ks_distance};
use super::{HarnessError, TrialRecord};
use crate::theory::xi_alpha;

/// Default smallest `Y` value kept in a sampled process.
pub const DEFAULT_Y_FLOOR: f64 = 0.05;

/// Inverts the exponential integral: the `y > 0` with `E₁(y) = x`, found
/// by bisection on the strictly decreasing `E₁` to absolute precision
/// `10⁻¹⁰` (or better, relatively, for large `y`).
pub fn inverse_exponential_integral(x: f64) -> Result<f64, HarnessError> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(HarnessError::Stats(format!(
            "inverse exponential integral needs x > 0, got {x}"
        )));
    }
    let e1 = |y: f64| xi_alpha(y).expect("positive argument");
    // Bisect on ln y: E₁(e^t) is strictly decreasing in t and ≈ −t − γ
    // for very negative t, so log-space bisection keeps relative
    // precision even for roots hundreds of orders of magnitude below 1.
    // E₁(745) underflows to 0, capping the right edge of the bracket.
    let mut lo = (1e-300_f64).ln();
    let mut hi = 0.0_f64;
    while e1(hi.exp()) > x {
        lo = hi;
        hi += std::f64::consts::LN_2;
        if hi.exp() > 745.0 {
            break;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if e1(mid.exp()) > x {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

/// Draws `count` independent copies of the limiting size vector
/// `(Y_1 ≥ Y_2 ≥ …)`, each truncated at the first value below `floor`.
pub fn conjecture_limit_sampler<R: Rng + ?Sized>(
    count: usize,
    floor: f64,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>, HarnessError> {
    if count == 0 {
        return Err(HarnessError::Stats("need at least one process draw".into()));
    }
    if !(floor > 0.0) {
        return Err(HarnessError::Stats(format!("floor {floor} must be positive")));
    }
    let exp1 = rand_distr::Exp1;
    let mut draws = Vec::with_capacity(count);
    for _ in 0..count {
        let mut ys = Vec::new();
        let mut x = 0.0_f64;
        loop {
            let gap: f64 = rng.sample(exp1);
            x += gap;
            let y = inverse_exponential_integral(x)?;
            if y < floor {
                break;
            }
            ys.push(y);
        }
        draws.push(ys);
    }
    Ok(draws)
}

/// Kolmogorov–Smirnov comparison row for one component rank.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsRow {
    pub k: u32,
    /// Two-sample KS distance between `|Q|·|C_k|` and `Y_k`.
    pub ks: f64,
    /// Percentile bootstrap 95% interval for the distance.
    pub ks_ci_low: f64,
    pub ks_ci_high: f64,
}

/// Informational comparison of the experiment's rescaled component sizes
/// with the sampled limit law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointLawComparison {
    pub per_k: Vec<KsRow>,
    /// Energy distance between the joint `(|Q||C_1|, |Q||C_2|)` samples
    /// and `(Y_1, Y_2)` (present when both ranks are available).
    pub energy_2d: Option<f64>,
    /// How many limit-law processes were drawn.
    pub conjecture_draws: usize,
}

/// Rank-`k` value of a truncated process, with absent ranks reading 0
/// (a component below the floor is indistinguishable from none).
fn rank_value(ys: &[f64], k: u32) -> f64 {
    ys.get(k as usize - 1).copied().unwrap_or(0.0)
}

/// Compares `|Q|·|C_k|` from trial records against sampled limit vectors:
/// per-rank KS distances with percentile-bootstrap intervals, plus a 2-d
/// energy distance on the top two ranks.
pub fn compare_joint_law<R: Rng + ?Sized>(
    records: &[TrialRecord],
    conjecture: &[Vec<f64>],
    ks: &[u32],
    rng: &mut R,
) -> Result<JointLawComparison, HarnessError> {
    if records.is_empty() || conjecture.is_empty() {
        return Err(HarnessError::Stats("joint-law comparison needs nonempty samples".into()));
    }
    if ks.iter().any(|&k| k == 0) {
        return Err(HarnessError::Stats("component ranks start at 1".into()));
    }
    let scaled = |record: &TrialRecord, k: u32| {
        record.q.abs() * record.component_sizes.get(k as usize - 1).copied().unwrap_or(0) as f64
    };

    const BOOTSTRAP_ROUNDS: usize = 200;
    let mut per_k = Vec::with_capacity(ks.len());
    for &k in ks {
        let a: Vec<f64> = records.iter().map(|r| scaled(r, k)).collect();
        let b: Vec<f64> = conjecture.iter().map(|ys| rank_value(ys, k)).collect();
        let point = ks_distance(&a, &b)?;
        let mut boots = Vec::with_capacity(BOOTSTRAP_ROUNDS);
        for _ in 0..BOOTSTRAP_ROUNDS {
            let ra: Vec<f64> = (0..a.len()).map(|_| a[rng.gen_range(0..a.len())]).collect();
            let rb: Vec<f64> = (0..b.len()).map(|_| b[rng.gen_range(0..b.len())]).collect();
            boots.push(ks_distance(&ra, &rb)?);
        }
        boots.sort_unstable_by(f64::total_cmp);
        let pick = |q: f64| boots[((boots.len() - 1) as f64 * q).round() as usize];
        per_k.push(KsRow { k, ks: point, ks_ci_low: pick(0.025), ks_ci_high: pick(0.975) });
    }

    let energy_2d = if records.iter().all(|r| r.component_sizes.len() >= 2) {
        let a: Vec<(f64, f64)> =
            records.iter().map(|r| (scaled(r, 1), scaled(r, 2))).collect();
        let b: Vec<(f64, f64)> =
            conjecture.iter().map(|ys| (rank_value(ys, 1), rank_value(ys, 2))).collect();
        Some(energy_distance_2d(&a, &b)?)
    } else {
        None
    };

    Ok(JointLawComparison { per_k, energy_2d, conjecture_draws: conjecture.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::kth_largest_tail;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn inverse_recovers_the_pinned_point() {
        let y = inverse_exponential_integral(0.219_383_934_395_520).unwrap();
        assert!((y - 1.0).abs() < 1e-10, "got {y}");
    }

    #[test]
    fn inverse_round_trips_across_scales() {
        for &y in &[0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 15.0] {
            let x = xi_alpha(y).unwrap();
            let back = inverse_exponential_integral(x).unwrap();
            assert!((back - y).abs() < 1e-9, "y = {y}: round trip {back}");
        }
    }

    #[test]
    fn inverse_limits() {
        // Huge x → y near 0; tiny x → large y.
        assert!(inverse_exponential_integral(100.0).unwrap() < 1e-40);
        assert!(inverse_exponential_integral(1e-8).unwrap() > 10.0);
        assert!(inverse_exponential_integral(0.0).is_err());
        assert!(inverse_exponential_integral(-1.0).is_err());
    }

    #[test]
    fn sampled_marginal_matches_the_tail_formula() {
        // P(Y_1 ≥ α) = P(X_1 ≤ ξ_α) = 1 − e^{−ξ_α} = rank-1 tail.
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        let draws = conjecture_limit_sampler(40_000, 0.05, &mut rng).unwrap();
        for &alpha in &[0.5, 1.0, 2.0] {
            let hits =
                draws.iter().filter(|ys| ys.first().copied().unwrap_or(0.0) >= alpha).count();
            let empirical = hits as f64 / draws.len() as f64;
            let theory = kth_largest_tail(alpha, 1).unwrap();
            let se = (theory * (1.0 - theory) / draws.len() as f64).sqrt();
            assert!(
                (empirical - theory).abs() < 4.0 * se + 1e-3,
                "alpha = {alpha}: empirical {empirical} vs theory {theory}"
            );
        }
    }

    #[test]
    fn sampled_vectors_are_sorted_and_floored() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let draws = conjecture_limit_sampler(500, 0.2, &mut rng).unwrap();
        for ys in &draws {
            assert!(ys.windows(2).all(|w| w[0] >= w[1]));
            assert!(ys.iter().all(|&y| y >= 0.2));
        }
        assert!(conjecture_limit_sampler(0, 0.2, &mut rng).is_err());
        assert!(conjecture_limit_sampler(5, 0.0, &mut rng).is_err());
    }

    fn synthetic_record(id: u64, q: f64, sizes: Vec<u64>) -> TrialRecord {
        TrialRecord {
            trial_id: id,
            seed: id,
            n: 100,
            m: 100,
            q,
            r_minus: 0.4,
            r_plus: 0.4,
            component_sizes: sizes,
            complex_count: 0,
            cycle_lengths: Vec::new(),
            w_alpha: Vec::new(),
            ms: 0,
        }
    }

    #[test]
    fn identical_joint_inputs_give_zero_distances() {
        // Build records whose rescaled sizes exactly reproduce the
        // conjecture draws, so every distance must vanish.
        let q = -0.1_f64;
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        let draws = conjecture_limit_sampler(300, 0.05, &mut rng).unwrap();
        let records: Vec<TrialRecord> = draws
            .iter()
            .enumerate()
            .map(|(i, ys)| {
                let sizes: Vec<u64> = (1..=3)
                    .map(|k| (rank_value(ys, k) / q.abs()).round() as u64)
                    .collect();
                synthetic_record(i as u64, q, sizes)
            })
            .collect();
        let rounded: Vec<Vec<f64>> = records
            .iter()
            .map(|r| {
                r.component_sizes.iter().map(|&c| q.abs() * c as f64).collect::<Vec<f64>>()
            })
            .collect();
        let cmp = compare_joint_law(&records, &rounded, &[1, 2], &mut rng).unwrap();
        for row in &cmp.per_k {
            assert_eq!(row.ks, 0.0, "rank {}", row.k);
        }
        assert!(cmp.energy_2d.unwrap().abs() < 1e-9);
    }

    #[test]
    fn disjoint_joint_inputs_give_unit_ks() {
        let records: Vec<TrialRecord> =
            (0..50).map(|i| synthetic_record(i, -0.1, vec![1000 + i, 5, 1])).collect();
        let conjecture: Vec<Vec<f64>> = (0..50).map(|_| vec![0.5, 0.2]).collect();
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let cmp = compare_joint_law(&records, &conjecture, &[1], &mut rng).unwrap();
        assert_eq!(cmp.per_k[0].ks, 1.0);
    }
}
