//! Closed-form predictions for the barely subcritical regime.
//!
//! The centerpiece is the limit law for the k-th largest strongly connected
//! component: with `ξ_α = E₁(α)` (the exponential integral), the probability
//! that the k-th largest component has at least `α/|Q|` vertices tends to
//! the Poisson tail `1 − Σ_{i<k} ξ_α^i e^{−ξ_α}/i!`. Around it sit the
//! finite-`n` bounds this crate studies empirically: a first-moment upper
//! bound on subgraph counts, a lower bound on cycle probabilities, cycle
//! expectation and tail bounds, a counting bound on strongly connected
//! multi-digraphs with a fixed near-critical degree profile, expectation
//! ceilings for complex components, and the size thresholds `g` and `f`
//! separating short, medium, and impossible component sizes.
//!
//! Everything here is a pure function; probability bounds are computed in
//! exact rational arithmetic wherever the inputs are rational.

use std::collections::BTreeMap;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{BigUint, One, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::degseq::{DegreeParams, ParamsSummary};

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

#[derive(Debug, Error)]
pub enum TheoryError {
    #[error("alpha must be positive and finite, got {0}")]
    BadAlpha(f64),
    #[error("rank k must be at least 1")]
    ZeroRank,
    #[error("drift Q must be negative, got {0}")]
    NonNegativeDrift(f64),
    #[error("factorial moment ({0},{1}) is not tabulated (order above the cap but within the maximum degree)")]
    MissingMoment(u32, u32),
    #[error("motif has {0} vertices; automorphism brute force handles at most 8 — supply the count")]
    MotifTooLarge(u32),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("profile (n={n}, a={a}, b={b}) is infeasible: {reason}")]
    InfeasibleProfile { n: u64, a: u64, b: u64, reason: String },
}

// ---------------------------------------------------------------------------
// Exponential integral and the limit law
// ---------------------------------------------------------------------------

const EULER_MASCHERONI: f64 = 0.577_215_664_901_532_9;

/// `ξ_α = E₁(α) = ∫_α^∞ e^{−x}/x dx` to relative error ≤ 10⁻¹².
///
/// Uses the alternating power series `−γ − ln α + Σ_{k≥1} (−1)^{k+1} α^k/(k·k!)`
/// for `α ≤ 1` and a continued fraction (modified Lentz evaluation of
/// `e^{−α}/(α+1− 1²/(α+3− 2²/(α+5− …)))`) for `α > 1`.
pub fn xi_alpha(alpha: f64) -> Result<f64, TheoryError> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(TheoryError::BadAlpha(alpha));
    }
    if alpha <= 1.0 {
        let mut sum = 0.0_f64;
        let mut pow = 1.0_f64; // α^k / k!
        let mut sign = 1.0_f64;
        for k in 1..=60u32 {
            pow *= alpha / f64::from(k);
            let term = sign * pow / f64::from(k);
            sum += term;
            if term.abs() < 1e-17 {
                break;
            }
            sign = -sign;
        }
        Ok(-EULER_MASCHERONI - alpha.ln() + sum)
    } else {
        // Modified Lentz: numerators a_i = −i², denominators α+1, α+3, …
        let floor = f64::MIN_POSITIVE / f64::EPSILON;
        let mut b = alpha + 1.0;
        let mut c = 1.0 / floor;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..=10_000u64 {
            let a = -((i * i) as f64);
            b += 2.0;
            let mut den = a * d + b;
            if den.abs() < floor {
                den = floor;
            }
            d = 1.0 / den;
            let mut num = b + a / c;
            if num.abs() < floor {
                num = floor;
            }
            c = num;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        Ok(h * (-alpha).exp())
    }
}

/// Limiting probability that the k-th largest strongly connected component
/// has at least `α/|Q|` vertices: `1 − Σ_{i<k} ξ_α^i e^{−ξ_α}/i!`.
pub fn kth_largest_tail(alpha: f64, k: u32) -> Result<f64, TheoryError> {
    if k == 0 {
        return Err(TheoryError::ZeroRank);
    }
    let xi = xi_alpha(alpha)?;
    let mut cdf = 0.0_f64;
    let mut pmf = (-xi).exp(); // ξ^i e^{−ξ}/i! at i = 0
    for i in 0..k {
        cdf += pmf;
        pmf *= xi / f64::from(i + 1);
    }
    Ok((1.0 - cdf).max(0.0))
}

// ---------------------------------------------------------------------------
// Motif profiles
// ---------------------------------------------------------------------------

/// A small directed multigraph motif, summarized by the data the
/// first-moment bound needs: vertex count `h`, edge count `k`, the
/// histogram `h_{i,j}` of in/out degree pairs, and its automorphism count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MotifProfile {
    h: u32,
    k: u64,
    histogram: BTreeMap<(u32, u32), u64>,
    aut: u64,
    edges: Vec<(u32, u32)>,
}

impl MotifProfile {
    /// Builds a profile from an edge list on vertices `0..h`, counting
    /// automorphisms by brute force (`h ≤ 8`). Parallel edges and loops
    /// are allowed; isolated vertices contribute `(0,0)` histogram mass.
    pub fn from_edges(h: u32, edges: Vec<(u32, u32)>) -> Result<Self, TheoryError> {
        if h > 8 {
            return Err(TheoryError::MotifTooLarge(h));
        }
        let mut profile = Self::with_automorphism_count(h, edges, 1)?;
        profile.aut = count_edge_preserving_permutations(h as usize, &profile.edges);
        Ok(profile)
    }

    /// Builds a profile with a caller-supplied automorphism count, for
    /// motifs too large to brute-force.
    pub fn with_automorphism_count(
        h: u32,
        edges: Vec<(u32, u32)>,
        aut: u64,
    ) -> Result<Self, TheoryError> {
        if h == 0 {
            return Err(TheoryError::Invalid("motif needs at least one vertex".into()));
        }
        if aut == 0 {
            return Err(TheoryError::Invalid("automorphism count must be positive".into()));
        }
        let mut d_in = vec![0u32; h as usize];
        let mut d_out = vec![0u32; h as usize];
        for &(u, v) in &edges {
            if u >= h || v >= h {
                return Err(TheoryError::Invalid(format!(
                    "edge ({u},{v}) leaves the vertex range 0..{h}"
                )));
            }
            d_out[u as usize] += 1;
            d_in[v as usize] += 1;
        }
        let mut histogram: BTreeMap<(u32, u32), u64> = BTreeMap::new();
        for v in 0..h as usize {
            *histogram.entry((d_in[v], d_out[v])).or_insert(0) += 1;
        }
        let k = edges.len() as u64;
        debug_assert_eq!(histogram.values().sum::<u64>(), u64::from(h));
        debug_assert_eq!(
            histogram.iter().map(|(&(i, _), &c)| u64::from(i) * c).sum::<u64>(),
            k
        );
        debug_assert_eq!(
            histogram.iter().map(|(&(_, j), &c)| u64::from(j) * c).sum::<u64>(),
            k
        );
        Ok(Self { h, k, histogram, aut, edges })
    }

    /// The directed cycle on `h` vertices (a loop when `h = 1`); its
    /// automorphism group is the cyclic rotation group of order `h`.
    #[must_use]
    pub fn cycle(h: u32) -> Self {
        assert!(h >= 1, "a cycle needs at least one vertex");
        let edges: Vec<(u32, u32)> = (0..h).map(|v| (v, (v + 1) % h)).collect();
        if h <= 8 {
            let profile = Self::from_edges(h, edges).expect("cycle edges are in range");
            debug_assert_eq!(profile.aut, u64::from(h));
            profile
        } else {
            Self::with_automorphism_count(h, edges, u64::from(h))
                .expect("cycle edges are in range")
        }
    }

    /// A single directed edge on two vertices.
    #[must_use]
    pub fn single_edge() -> Self {
        Self::from_edges(2, vec![(0, 1)]).expect("edge motif is valid")
    }

    #[must_use]
    pub fn h(&self) -> u32 {
        self.h
    }

    /// Edge count.
    #[must_use]
    pub fn k(&self) -> u64 {
        self.k
    }

    #[must_use]
    pub fn aut(&self) -> u64 {
        self.aut
    }

    /// Histogram `h_{i,j}`: motif vertices with in-degree `i`, out-degree `j`.
    #[must_use]
    pub fn histogram(&self) -> &BTreeMap<(u32, u32), u64> {
        &self.histogram
    }

    #[must_use]
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }
}

/// Counts permutations of `0..h` that fix the edge multiset.
fn count_edge_preserving_permutations(h: usize, edges: &[(u32, u32)]) -> u64 {
    let mut base: Vec<(u32, u32)> = edges.to_vec();
    base.sort_unstable();
    let mut perm: Vec<u32> = (0..h as u32).collect();
    let mut count = 0u64;
    permute_all(&mut perm, 0, &mut |p| {
        let mut mapped: Vec<(u32, u32)> =
            edges.iter().map(|&(u, v)| (p[u as usize], p[v as usize])).collect();
        mapped.sort_unstable();
        if mapped == base {
            count += 1;
        }
    });
    count
}

fn permute_all<F: FnMut(&[u32])>(perm: &mut Vec<u32>, from: usize, visit: &mut F) {
    if from == perm.len() {
        visit(perm);
        return;
    }
    for i in from..perm.len() {
        perm.swap(from, i);
        permute_all(perm, from + 1, visit);
        perm.swap(from, i);
    }
}

// ---------------------------------------------------------------------------
// Subgraph probability bounds
// ---------------------------------------------------------------------------

/// First-moment upper bound on a motif's appearance.
#[derive(Debug, Clone)]
pub struct SubgraphBound {
    /// `p⁺ = n^h / ((n)_h (m)_k) · Π ρ_{i,j}^{h_{i,j}}`: upper bound on the
    /// probability that one fixed copy of the motif appears.
    pub p_plus: BigRational,
    /// `n⁺ = (h!/aut) · C(n,h) · p⁺`: upper bound on the expected number of
    /// copies.
    pub n_plus: BigRational,
    /// `p⁺` is only a bound and may exceed 1; flagged rather than clipped.
    pub p_exceeds_one: bool,
}

impl SubgraphBound {
    #[must_use]
    pub fn p_plus_f64(&self) -> f64 {
        self.p_plus.to_f64().unwrap_or(f64::NAN)
    }

    #[must_use]
    pub fn n_plus_f64(&self) -> f64 {
        self.n_plus.to_f64().unwrap_or(f64::NAN)
    }
}

/// Upper-bounds the probability that a fixed copy of motif `profile`
/// appears in the configuration multigraph, and the expected number of
/// copies, using the factorial moments of the degree sequence.
///
/// A required moment of order above the tabulation cap is an error unless
/// its order exceeds the maximum degree, in which case the moment — and the
/// bound — is exactly zero.
pub fn subgraph_upper_bound(
    profile: &MotifProfile,
    params: &DegreeParams,
) -> Result<SubgraphBound, TheoryError> {
    let n = params.n();
    let m = params.m();
    let h = u64::from(profile.h());
    let k = profile.k();
    if n < h {
        return Err(TheoryError::Invalid(format!(
            "motif has {h} vertices but the sequence has only {n}"
        )));
    }
    if m < k {
        return Err(TheoryError::Invalid(format!(
            "motif has {k} edges but the sequence has only {m}"
        )));
    }
    let delta = params.max_degree();

    let mut moment_product = BigRational::one();
    for (&(i, j), &mult) in profile.histogram() {
        match params.factorial_moment(i, j) {
            Some(rho) => {
                for _ in 0..mult {
                    moment_product *= rho.clone();
                }
            }
            None if i > delta || j > delta => {
                // No vertex reaches this degree, so the falling factorial
                // vanishes termwise and the bound is exactly zero.
                return Ok(SubgraphBound {
                    p_plus: BigRational::zero(),
                    n_plus: BigRational::zero(),
                    p_exceeds_one: false,
                });
            }
            None => return Err(TheoryError::MissingMoment(i, j)),
        }
    }

    let numerator = BigInt::from(n).pow(h as u32);
    let denominator = falling_bigint(n, h) * falling_bigint(m, k);
    let p_plus = BigRational::new(numerator, denominator) * moment_product;
    // (h!/aut)·C(n,h) = (n)_h / aut.
    let copies = BigRational::new(falling_bigint(n, h), BigInt::from(profile.aut()));
    let n_plus = copies * p_plus.clone();
    let p_exceeds_one = p_plus > BigRational::one();
    Ok(SubgraphBound { p_plus, n_plus, p_exceeds_one })
}

/// Lower bound on the probability that a fixed `h`-cycle appears.
#[derive(Debug, Clone)]
pub struct CycleLowerBound {
    /// `(1+Q)^h/(n)_h · (1 − 2h²Δ²/(εn)) · (1 − hΔ²/(2m))`, clamped at 0.
    pub value: BigRational,
    /// True when a correction factor was non-positive (bound vacuous).
    pub vacuous: bool,
}

impl CycleLowerBound {
    #[must_use]
    pub fn value_f64(&self) -> f64 {
        self.value.to_f64().unwrap_or(f64::NAN)
    }
}

/// Lower-bounds the probability that a fixed directed `h`-cycle (on `h`
/// chosen vertices, in a chosen rotational order) appears. The bound is
/// vacuous — clamped to zero and flagged — whenever a correction factor is
/// non-positive or `h > n`.
pub fn cycle_lower_bound(
    params: &DegreeParams,
    h: u64,
    eps: f64,
) -> Result<CycleLowerBound, TheoryError> {
    if h == 0 {
        return Err(TheoryError::Invalid("cycle length must be at least 1".into()));
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(TheoryError::Invalid(format!("eps must be positive and finite, got {eps}")));
    }
    let n = params.n();
    let m = params.m();
    if h > n {
        return Ok(CycleLowerBound { value: BigRational::zero(), vacuous: true });
    }
    let eps = BigRational::from_float(eps).expect("finite eps converts exactly");
    let delta_sq = BigInt::from(params.max_degree()) * BigInt::from(params.max_degree());
    let one = BigRational::one();

    // 1 − 2h²Δ²/(εn)
    let crowding = &one
        - BigRational::new(BigInt::from(2u32) * BigInt::from(h * h) * delta_sq.clone(), BigInt::from(n))
            / eps;
    // 1 − hΔ²/(2m)
    let reuse = &one - BigRational::new(BigInt::from(h) * delta_sq, BigInt::from(2 * m));
    if crowding <= BigRational::zero() || reuse <= BigRational::zero() {
        return Ok(CycleLowerBound { value: BigRational::zero(), vacuous: true });
    }

    // (1+Q)^h / (n)_h
    let one_plus_q = params.q_exact() + &one;
    let mut lead = BigRational::one();
    for _ in 0..h {
        lead *= one_plus_q.clone();
    }
    lead /= BigRational::from_integer(falling_bigint(n, h));
    Ok(CycleLowerBound { value: lead * crowding * reuse, vacuous: false })
}

// ---------------------------------------------------------------------------
// Cycle expectation and tail bounds
// ---------------------------------------------------------------------------

/// Upper bound `e^{hQ + 2h²/m}/h` on the expected number of `h`-cycles.
///
/// For `Q < 0` the exponent is maximized at `h* = m|Q|/4`; the bound is
/// decreasing (and eventually summable) beyond that point.
pub fn expected_cycle_count_bound(h: u64, q: f64, m: u64) -> Result<f64, TheoryError> {
    if h == 0 {
        return Err(TheoryError::Invalid("cycle length must be at least 1".into()));
    }
    if m <= h {
        return Err(TheoryError::Invalid(format!(
            "need more edges than the cycle length (m = {m}, h = {h})"
        )));
    }
    let hf = h as f64;
    Ok((hf * q + 2.0 * hf * hf / m as f64).exp() / hf)
}

/// Upper bound `E₁(|Q|·g/2)` on the expected number of cycles longer
/// than `g`, hence on the probability that any such cycle exists.
pub fn medium_cycle_tail_bound(g: u64, q: f64) -> Result<f64, TheoryError> {
    if g == 0 {
        return Err(TheoryError::Invalid("cycle-length threshold must be at least 1".into()));
    }
    if !(q < 0.0) {
        return Err(TheoryError::NonNegativeDrift(q));
    }
    xi_alpha(-q * g as f64 / 2.0)
}

// ---------------------------------------------------------------------------
// Strongly connected multi-digraph counting bound
// ---------------------------------------------------------------------------

/// Counting bound `(3a+2b)·(m−1)!·n!/(a!·a!·b!·(n−2a−b)!)` on the number of
/// labelled strongly connected multi-digraphs with `a` vertices of degree
/// (1,2), `a` of (2,1), `b` of (2,2), and `n−2a−b` of (1,1), so `m = n+a+b`
/// edges. The profile must have at least one excess vertex (`a + b ≥ 1`);
/// the all-(1,1) profile is outside the bound's scope (its strongly
/// connected graphs are plain cycles).
pub fn scc_count_upper_bound(n: u64, a: u64, b: u64) -> Result<BigUint, TheoryError> {
    if a + b == 0 {
        return Err(TheoryError::InfeasibleProfile {
            n,
            a,
            b,
            reason: "profile needs at least one vertex of excess degree".into(),
        });
    }
    if 2 * a + b > n {
        return Err(TheoryError::InfeasibleProfile {
            n,
            a,
            b,
            reason: format!("needs n ≥ 2a + b = {}", 2 * a + b),
        });
    }
    let m = n + a + b;
    let multinomial = factorial_biguint(n)
        / (factorial_biguint(a).pow(2) * factorial_biguint(b) * factorial_biguint(n - 2 * a - b));
    Ok(BigUint::from(3 * a + 2 * b) * factorial_biguint(m - 1) * multinomial)
}

// ---------------------------------------------------------------------------
// Complex-component expectation ceilings
// ---------------------------------------------------------------------------

/// Expectation ceilings for the two complex-motif families.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ComplexMotifBounds {
    /// `16 R⁻R⁺ / (m|Q|³)`: ceiling on the expected number of doubly-excess
    /// motifs (two extra branchings).
    pub bound_s: f64,
    /// `4 min(R⁻,R⁺) Δ / (m|Q|²)`: ceiling on the expected number of
    /// singly-excess motifs (one (2,2)-vertex).
    pub bound_t: f64,
}

/// Closed-form expectation ceilings on complex strongly connected
/// subgraphs; their sum bounds the probability that any complex component
/// exists. The window length over which complex motifs are counted does
/// not appear: the underlying geometric series were summed to infinity.
pub fn complex_motif_expectation_bounds(
    q: f64,
    r_minus: f64,
    r_plus: f64,
    delta: u32,
    m: u64,
) -> Result<ComplexMotifBounds, TheoryError> {
    if !(q < 0.0) {
        return Err(TheoryError::NonNegativeDrift(q));
    }
    let mf = m as f64;
    let aq = q.abs();
    Ok(ComplexMotifBounds {
        bound_s: 16.0 * r_minus * r_plus / (mf * aq.powi(3)),
        bound_t: 4.0 * r_minus.min(r_plus) * f64::from(delta) / (mf * aq.powi(2)),
    })
}

// ---------------------------------------------------------------------------
// Size-class thresholds
// ---------------------------------------------------------------------------

/// Concrete choices for the size thresholds `g` (longest credible cycle)
/// and `f` (exploration cap), with their validity diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct ThresholdReport {
    /// Slack factor `s = (n|Q|³ / max(R⁻R⁺, ζ²))^{1/6}`.
    pub s: f64,
    /// `g = ⌈s/|Q|⌉`.
    pub g: u64,
    /// `f = ⌈√(m/|Q|)·s⌉`.
    pub f: u64,
    /// Distance into the subcritical regime, `n|Q|³/(R⁻R⁺)`.
    pub criticality: f64,
    /// `g³ ≤ m/(R⁻R⁺)`.
    pub g_cubed_ok: bool,
    /// `f ≤ m|Q|/R⁻`.
    pub f_ok: bool,
    /// `g·Q² ≤ 1` — an extra smallness condition some arguments assume;
    /// reported separately because it does not follow from the other two.
    pub g_q2_ok: bool,
    /// Raised when criticality < 8: the sequence sits too close to the
    /// critical window for the asymptotic separation to be meaningful.
    pub near_critical_warning: bool,
}

/// Chooses the size-class thresholds for a subcritical sequence. The slack
/// factor `s` grows slowly with the criticality distance, making
/// `g = ⌈s/|Q|⌉` just above the `1/|Q|` scale and `f = ⌈√(m/|Q|)·s⌉` just
/// above the `√(m/|Q|)` scale; the report carries the validity checks
/// rather than failing, so borderline sequences can still be studied.
pub fn size_class_thresholds(
    summary: &ParamsSummary,
    zeta: f64,
) -> Result<ThresholdReport, TheoryError> {
    if !(summary.q < 0.0) {
        return Err(TheoryError::NonNegativeDrift(summary.q));
    }
    if !(zeta > 0.0) || !zeta.is_finite() {
        return Err(TheoryError::Invalid(format!("zeta must be positive and finite, got {zeta}")));
    }
    let n = summary.n as f64;
    let m = summary.m as f64;
    let aq = summary.q.abs();
    let rr = summary.r_minus * summary.r_plus;
    let criticality = n * aq.powi(3) / rr;
    let s = (n * aq.powi(3) / rr.max(zeta * zeta)).powf(1.0 / 6.0);
    let g = (s / aq).ceil() as u64;
    let f = ((m / aq).sqrt() * s).ceil() as u64;
    Ok(ThresholdReport {
        s,
        g,
        f,
        criticality,
        g_cubed_ok: (g as f64).powi(3) <= m / rr,
        f_ok: f as f64 <= m * aq / summary.r_minus,
        g_q2_ok: g as f64 * summary.q * summary.q <= 1.0,
        near_critical_warning: criticality < 8.0,
    })
}

// ---------------------------------------------------------------------------
// Prediction tables
// ---------------------------------------------------------------------------

/// One row of the limit-law prediction table.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PredictionRow {
    pub alpha: f64,
    pub k: u32,
    pub xi: f64,
    /// Limiting `P(|C_k| ≥ α/|Q|)`.
    pub tail: f64,
}

/// Everything the experiment harness compares against: the limit-law table
/// plus the finite-`n` ceilings and thresholds with their validity windows.
#[derive(Debug, Clone, Serialize)]
pub struct Prediction {
    pub rows: Vec<PredictionRow>,
    pub thresholds: ThresholdReport,
    pub complex_bounds: ComplexMotifBounds,
    /// `E₁(|Q|·g/2)`: ceiling on the probability of any cycle longer than `g`.
    pub medium_cycle_tail: f64,
    /// The per-length cycle expectation bound is strictly decreasing for
    /// lengths up to this value, `m|Q|/4`; the medium-length window sits
    /// well inside it.
    pub cycle_bound_decreasing_through: f64,
}

impl Prediction {
    /// CSV table of the limit law: `alpha,k,xi,tail`.
    #[must_use]
    pub fn to_csv_string(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::from("alpha,k,xi,tail\n");
        for row in &self.rows {
            let _ = writeln!(out, "{},{},{},{}", row.alpha, row.k, row.xi, row.tail);
        }
        out
    }
}

/// Builds the full prediction set for a subcritical sequence.
pub fn predict(
    summary: &ParamsSummary,
    delta: u32,
    zeta: f64,
    alphas: &[f64],
    ks: &[u32],
) -> Result<Prediction, TheoryError> {
    let thresholds = size_class_thresholds(summary, zeta)?;
    let complex_bounds =
        complex_motif_expectation_bounds(summary.q, summary.r_minus, summary.r_plus, delta, summary.m)?;
    let medium_cycle_tail = medium_cycle_tail_bound(thresholds.g, summary.q)?;
    let mut rows = Vec::with_capacity(alphas.len() * ks.len());
    for &alpha in alphas {
        let xi = xi_alpha(alpha)?;
        for &k in ks {
            let tail = kth_largest_tail(alpha, k)?;
            debug_assert!((0.0..=1.0).contains(&tail));
            rows.push(PredictionRow { alpha, k, xi, tail });
        }
    }
    Ok(Prediction {
        rows,
        thresholds,
        complex_bounds,
        medium_cycle_tail,
        cycle_bound_decreasing_through: summary.m as f64 * summary.q.abs() / 4.0,
    })
}

// ---------------------------------------------------------------------------
// Big-integer helpers
// ---------------------------------------------------------------------------

/// Falling factorial `(x)_k = x(x−1)…(x−k+1)` as a big integer.
fn falling_bigint(x: u64, k: u64) -> BigInt {
    if k > x {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc *= BigInt::from(x - i);
    }
    acc
}

fn factorial_biguint(k: u64) -> BigUint {
    let mut acc = BigUint::one();
    for i in 2..=k {
        acc *= BigUint::from(i);
    }
    acc
}

// ---------------------------------------------------------------------------
