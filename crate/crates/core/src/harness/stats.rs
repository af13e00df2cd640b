//! Statistics for the experiment harness: stable Poisson evaluation,
//! goodness-of-fit against a Poisson law (total variation plus pooled
//! chi-square), two-sample Kolmogorov–Smirnov and energy distances, and a
//! lag-1 autocorrelation diagnostic.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_ur, ln_gamma};

use super::HarnessError;

/// Minimum sample count [`gof_poisson`] accepts.
pub const MIN_GOF_SAMPLES: usize = 50;
/// Cells are pooled until their expected count reaches this mass.
const MIN_EXPECTED_PER_CELL: f64 = 5.0;

/// `P(Poisson(λ) = i)`, evaluated through the log-gamma function so large
/// indices stay finite.
pub fn poisson_pmf(lambda: f64, i: u64) -> Result<f64, HarnessError> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(HarnessError::Stats(format!("poisson rate {lambda} must be ≥ 0")));
    }
    if lambda == 0.0 {
        return Ok(if i == 0 { 1.0 } else { 0.0 });
    }
    let i_f = i as f64;
    Ok((i_f * lambda.ln() - lambda - ln_gamma(i_f + 1.0)).exp())
}

/// `P(Poisson(λ) ≤ i)` by direct summation of the pmf.
pub fn poisson_cdf(lambda: f64, i: u64) -> Result<f64, HarnessError> {
    let mut total = 0.0;
    for k in 0..=i {
        total += poisson_pmf(lambda, k)?;
    }
    Ok(total.min(1.0))
}

/// Goodness-of-fit of an integer sample against `Poisson(λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    /// Total variation distance between the empirical pmf and the Poisson
    /// pmf (tail mass beyond the sample maximum included).
    pub tv_distance: f64,
    /// Pearson statistic over cells pooled to expected count ≥ 5.
    pub chi2_statistic: f64,
    /// Degrees of freedom (pooled cells − 1).
    pub chi2_dof: u64,
    /// Upper-tail p-value of the pooled statistic.
    pub chi2_pvalue: f64,
}

/// Compares an integer sample with `Poisson(λ)`: total variation distance
/// plus a Pearson chi-square with cells pooled to expected count ≥ 5
/// (degrees of freedom = cells − 1). Needs at least 50 samples.
pub fn gof_poisson(samples: &[u64], lambda: f64) -> Result<GofReport, HarnessError> {
    if samples.len() < MIN_GOF_SAMPLES {
        return Err(HarnessError::TooFewSamples { got: samples.len(), min: MIN_GOF_SAMPLES });
    }
    let n = samples.len() as f64;
    let max_k = samples.iter().copied().max().unwrap_or(0);
    let mut observed = vec![0u64; max_k as usize + 1];
    for &s in samples {
        observed[s as usize] += 1;
    }

    let mut tv = 0.0;
    let mut head_mass = 0.0;
    for (k, &obs) in observed.iter().enumerate() {
        let p = poisson_pmf(lambda, k as u64)?;
        head_mass += p;
        tv += (obs as f64 / n - p).abs();
    }
    tv = 0.5 * (tv + (1.0 - head_mass).max(0.0));

    // Pool cells left to right until each holds expected mass ≥ 5. The
    // walk covers the Poisson bulk even beyond the sample maximum (those
    // cells have observed count 0 and must still contribute); the final
    // cell absorbs the remaining upper tail and, if underweight, merges
    // into its predecessor.
    let mut cells: Vec<(f64, f64)> = Vec::new(); // (observed, expected)
    let mut acc_obs = 0.0;
    let mut acc_exp = 0.0;
    let mut cum_mass = 0.0;
    let mut k = 0u64;
    while k <= max_k || n * (1.0 - cum_mass) >= MIN_EXPECTED_PER_CELL {
        let p = poisson_pmf(lambda, k)?;
        cum_mass += p;
        acc_obs += observed.get(k as usize).copied().unwrap_or(0) as f64;
        acc_exp += n * p;
        if acc_exp >= MIN_EXPECTED_PER_CELL {
            cells.push((acc_obs, acc_exp));
            acc_obs = 0.0;
            acc_exp = 0.0;
        }
        k += 1;
        if k > max_k && k > 1_000_000 {
            break; // unreachable for any realistic rate; guards the loop
        }
    }
    let tail_exp = acc_exp + n * (1.0 - cum_mass).max(0.0);
    if tail_exp >= MIN_EXPECTED_PER_CELL || cells.is_empty() {
        cells.push((acc_obs, tail_exp));
    } else {
        let last = cells.last_mut().expect("nonempty");
        last.0 += acc_obs;
        last.1 += tail_exp;
    }

    let (chi2_statistic, chi2_dof, chi2_pvalue) = if cells.len() < 2 {
        (0.0, 0, 1.0)
    } else {
        let stat: f64 = cells
            .iter()
            .map(|&(obs, exp)| if exp > 0.0 { (obs - exp).powi(2) / exp } else { 0.0 })
            .sum();
        let dof = cells.len() as u64 - 1;
        (stat, dof, gamma_ur(dof as f64 / 2.0, stat / 2.0))
    };
    Ok(GofReport { tv_distance: tv, chi2_statistic, chi2_dof, chi2_pvalue })
}

/// Two-sample Kolmogorov–Smirnov distance `sup |F_a − F_b|`. NaNs are
/// rejected; empty sides give distance 1.
pub fn ks_distance(a: &[f64], b: &[f64]) -> Result<f64, HarnessError> {
    if a.iter().chain(b).any(|x| x.is_nan()) {
        return Err(HarnessError::Stats("KS input contains NaN".into()));
    }
    if a.is_empty() || b.is_empty() {
        return Ok(1.0);
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_unstable_by(f64::total_cmp);
    sb.sort_unstable_by(f64::total_cmp);
    let (na, nb) = (sa.len() as f64, sb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < sa.len() && j < sb.len() {
        let x = sa[i].min(sb[j]);
        while i < sa.len() && sa[i] <= x {
            i += 1;
        }
        while j < sb.len() && sb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d.max(1.0 - i as f64 / na).max(1.0 - j as f64 / nb).min(1.0))
}

/// Two-dimensional energy distance `2·E‖X−Y‖ − E‖X−X′‖ − E‖Y−Y′‖`
/// between two point samples; zero iff the underlying laws agree.
pub fn energy_distance_2d(a: &[(f64, f64)], b: &[(f64, f64)]) -> Result<f64, HarnessError> {
    if a.is_empty() || b.is_empty() {
        return Err(HarnessError::Stats("energy distance needs nonempty samples".into()));
    }
    let dist = |p: (f64, f64), q: (f64, f64)| ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt();
    let mut cross = 0.0;
    for &p in a {
        for &q in b {
            cross += dist(p, q);
        }
    }
    cross /= (a.len() * b.len()) as f64;
    let within = |xs: &[(f64, f64)]| {
        let mut total = 0.0;
        for (i, &p) in xs.iter().enumerate() {
            for &q in &xs[i + 1..] {
                total += dist(p, q);
            }
        }
        2.0 * total / (xs.len() as f64 * xs.len() as f64)
    };
    Ok(2.0 * cross - within(a) - within(b))
}

/// Lag-1 autocorrelation of a series; `None` when fewer than three points
/// or zero variance.
#[must_use]
pub fn lag1_autocorrelation(xs: &[f64]) -> Option<f64> {
    if xs.len() < 3 {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    if var == 0.0 {
        return None;
    }
    let cov: f64 = xs.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum();
    Some(cov / var)
}
