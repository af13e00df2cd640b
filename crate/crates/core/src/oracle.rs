//! Exact brute-force ground truth at toy scale.
//!
//! Everything the rest of the crate claims probabilistically is checked
//! here by exhaustion: all `m!` stub matchings are enumerated and events
//! are counted in exact rational arithmetic, strongly connected
//! multi-digraphs with a prescribed near-critical degree profile are
//! counted by deduplicated enumeration, preheart configurations are listed
//! one by one, the switching surgery's pushforward is compared with the
//! exact conditional law, all simple directed cycles of a small graph are
//! listed with their principal multiplicities, and the exponential
//! integral is re-evaluated by adaptive quadrature.
//!
//! [`run_verification_suite`] bundles the cross-checks against the
//! closed-form bounds into named pass/fail results; the command-line
//! `verify` subcommand and the acceptance tests both run it.

use std::collections::{BTreeMap, BTreeSet};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{BigUint, One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::degseq::{BiDegreeSequence, DegreeParams};
use crate::sampler::{
    condition_on_pairs, count_preheart_configs, ForcedPairs, MultiDigraph, PreheartConfig,
    PreheartShape, StubLayout, StubMatching,
};
use crate::scc;
use crate::theory::{self, MotifProfile};

/// Full matching enumeration is refused beyond `9! = 362 880` matchings.
pub const ENUMERATION_CAP: u64 = 9;
/// Multi-digraph enumeration (deduplicated) is refused beyond `m = 8`.
pub const MULTIGRAPH_CAP: u64 = 8;
/// Cycle listing aborts beyond this many cycles.
pub const CYCLE_GUARD: usize = 1_000_000;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("exhaustive enumeration handles at most m = {cap} stub pairs, got m = {m}")]
    TooManyStubs { m: u64, cap: u64 },
    #[error("cycle enumeration exceeded the guard of {0} cycles")]
    TooManyCycles(usize),
    #[error("profile (n={n}, a={a}, b={b}) is infeasible: {reason}")]
    Infeasible { n: u64, a: u64, b: u64, reason: String },
    #[error("conditioning event has probability zero")]
    ImpossibleCondition,
    #[error(transparent)]
    Sampler(#[from] crate::sampler::SamplerError),
    #[error("invalid input: {0}")]
    Invalid(String),
}

// ---------------------------------------------------------------------------
// Matching enumeration
// ---------------------------------------------------------------------------

/// Iterator over all `m!` stub matchings in lexicographic order.
pub struct MatchingEnumerator {
    next: Option<Vec<u32>>,
}

impl Iterator for MatchingEnumerator {
    type Item = StubMatching;

    fn next(&mut self) -> Option<StubMatching> {
        let current = self.next.take()?;
        let mut advanced = current.clone();
        if next_permutation(&mut advanced) {
            self.next = Some(advanced);
        }
        Some(StubMatching::from_vec(current))
    }
}

/// Enumerates every stub matching of `seq` exactly once.
pub fn enumerate_matchings(seq: &BiDegreeSequence) -> Result<MatchingEnumerator, OracleError> {
    let m = seq.m();
    if m > ENUMERATION_CAP {
        return Err(OracleError::TooManyStubs { m, cap: ENUMERATION_CAP });
    }
    Ok(MatchingEnumerator { next: Some((0..m as u32).collect()) })
}

/// Advances `a` to its lexicographic successor; false at the last one.
fn next_permutation(a: &mut [u32]) -> bool {
    if a.len() < 2 {
        return false;
    }
    let mut i = a.len() - 1;
    while i > 0 && a[i - 1] >= a[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = a.len() - 1;
    while a[j] <= a[i - 1] {
        j -= 1;
    }
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

// ---------------------------------------------------------------------------
// Exact event probabilities
// ---------------------------------------------------------------------------

/// Exact probability of a graph event under the uniform matching:
/// `(#matchings whose realization satisfies the event)/m!`.
pub fn exact_event_probability(
    seq: &BiDegreeSequence,
    mut event: impl FnMut(&MultiDigraph) -> bool,
) -> Result<BigRational, OracleError> {
    let layout = StubLayout::new(seq);
    let mut hits = 0u64;
    let mut total = 0u64;
    for matching in enumerate_matchings(seq)? {
        let graph = MultiDigraph::from_matching(seq, &layout, &matching);
        total += 1;
        if event(&graph) {
            hits += 1;
        }
    }
    Ok(BigRational::new(BigInt::from(hits), BigInt::from(total)))
}

/// An exact probability distribution over integer outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactDistribution {
    probs: BTreeMap<u64, BigRational>,
}

impl ExactDistribution {
    fn from_counts(counts: BTreeMap<u64, u64>, total: u64) -> Self {
        let probs: BTreeMap<u64, BigRational> = counts
            .into_iter()
            .filter(|&(_, c)| c > 0)
            .map(|(k, c)| (k, BigRational::new(BigInt::from(c), BigInt::from(total))))
            .collect();
        let dist = Self { probs };
        assert!(dist.total_mass().is_one(), "probabilities must sum to one");
        dist
    }

    /// Probability of a single outcome (zero off the support).
    #[must_use]
    pub fn probability(&self, outcome: u64) -> BigRational {
        self.probs.get(&outcome).cloned().unwrap_or_else(BigRational::zero)
    }

    /// `P(X ≥ threshold)`.
    #[must_use]
    pub fn probability_at_least(&self, threshold: u64) -> BigRational {
        self.probs
            .iter()
            .filter(|&(&k, _)| k >= threshold)
            .fold(BigRational::zero(), |acc, (_, p)| acc + p)
    }

    /// Support and probabilities, ascending by outcome.
    #[must_use]
    pub fn probabilities(&self) -> &BTreeMap<u64, BigRational> {
        &self.probs
    }

    #[must_use]
    pub fn total_mass(&self) -> BigRational {
        self.probs.values().fold(BigRational::zero(), |acc, p| acc + p)
    }

    /// Floating-point view of the distribution.
    #[must_use]
    pub fn to_f64_map(&self) -> BTreeMap<u64, f64> {
        use num::ToPrimitive;
        self.probs.iter().map(|(&k, p)| (k, p.to_f64().unwrap_or(f64::NAN))).collect()
    }

    /// JSON with numerator/denominator strings, exactness preserved:
    /// `{"outcome": ["num", "den"], …}`.
    #[must_use]
    pub fn to_json_string(&self) -> String {
        let map: serde_json::Map<String, serde_json::Value> = self
            .probs
            .iter()
            .map(|(&k, p)| {
                (
                    k.to_string(),
                    serde_json::json!([p.numer().to_string(), p.denom().to_string()]),
                )
            })
            .collect();
        serde_json::Value::Object(map).to_string()
    }
}

/// Exact distribution of the size of the k-th largest strongly connected
/// component (`0` when fewer than `k` components exist).
pub fn exact_component_size_distribution(
    seq: &BiDegreeSequence,
    k: usize,
) -> Result<ExactDistribution, OracleError> {
    if k == 0 {
        return Err(OracleError::Invalid("component rank k must be at least 1".into()));
    }
    let layout = StubLayout::new(seq);
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    let mut total = 0u64;
    for matching in enumerate_matchings(seq)? {
        let graph = MultiDigraph::from_matching(seq, &layout, &matching);
        let census = scc::census(&graph);
        *counts.entry(census.kth_largest(k)).or_insert(0) += 1;
        total += 1;
    }
    Ok(ExactDistribution::from_counts(counts, total))
}

// ---------------------------------------------------------------------------
// Exact motif expectations
// ---------------------------------------------------------------------------

/// Exact expected number of embeddings of `motif` (injective vertex maps
/// preserving every edge with its multiplicity) in the random multigraph.
/// Dividing by the motif's automorphism count gives the expected number of
/// distinct copies; dividing by `(n)_h` gives the mean appearance
/// probability over placements.
pub fn exact_expected_embeddings(
    seq: &BiDegreeSequence,
    motif: &MotifProfile,
) -> Result<BigRational, OracleError> {
    let layout = StubLayout::new(seq);
    let mut total_embeddings = 0u64;
    let mut matchings = 0u64;
    for matching in enumerate_matchings(seq)? {
        let graph = MultiDigraph::from_matching(seq, &layout, &matching);
        total_embeddings += count_embeddings(&graph, motif);
        matchings += 1;
    }
    Ok(BigRational::new(BigInt::from(total_embeddings), BigInt::from(matchings)))
}

/// Counts injective vertex maps of `motif` into `g` preserving every edge
/// with at least its motif multiplicity.
fn count_embeddings(g: &MultiDigraph, motif: &MotifProfile) -> u64 {
    let h = motif.h() as usize;
    let n = g.n();
    if h > n {
        return 0;
    }
    let mut graph_mult: BTreeMap<(u32, u32), u32> = BTreeMap::new();
    for &e in g.edges() {
        *graph_mult.entry(e).or_insert(0) += 1;
    }
    let mut motif_mult: BTreeMap<(u32, u32), u32> = BTreeMap::new();
    for &e in motif.edges() {
        *motif_mult.entry(e).or_insert(0) += 1;
    }
    // Motif edges become checkable once their later endpoint is assigned.
    let mut by_last: Vec<Vec<((u32, u32), u32)>> = vec![Vec::new(); h];
    for (&(u, v), &c) in &motif_mult {
        by_last[u.max(v) as usize].push(((u, v), c));
    }
    let mut assign = vec![0u32; h];
    let mut used = vec![false; n];
    embed_from(0, h, &by_last, &graph_mult, &mut assign, &mut used)
}

fn embed_from(
    level: usize,
    h: usize,
    by_last: &[Vec<((u32, u32), u32)>],
    graph_mult: &BTreeMap<(u32, u32), u32>,
    assign: &mut Vec<u32>,
    used: &mut Vec<bool>,
) -> u64 {
    if level == h {
        return 1;
    }
    let mut total = 0;
    for cand in 0..used.len() {
        if used[cand] {
            continue;
        }
        assign[level] = cand as u32;
        let ok = by_last[level].iter().all(|&((u, v), c)| {
            let image = (assign[u as usize], assign[v as usize]);
            graph_mult.get(&image).copied().unwrap_or(0) >= c
        });
        if ok {
            used[cand] = true;
            total += embed_from(level + 1, h, by_last, graph_mult, assign, used);
            used[cand] = false;
        }
    }
    total
}

// ---------------------------------------------------------------------------
// Strongly connected multi-digraph counting
// ---------------------------------------------------------------------------

/// Exact number of labelled strongly connected multi-digraphs with the
/// canonical near-critical degree profile: vertices `0..n` carry, in
/// order, `n−2a−b` times (1,1), `a` times (1,2), `a` times (2,1), and `b`
/// times (2,2). Matchings are enumerated and deduplicated by their edge
/// multiset, so parallel-stub permutations collapse to one multigraph.
pub fn count_scc_multidigraphs(n: u64, a: u64, b: u64) -> Result<u64, OracleError> {
    if n == 0 {
        return Err(OracleError::Infeasible {
            n,
            a,
            b,
            reason: "need at least one vertex".into(),
        });
    }
    if 2 * a + b > n {
        return Err(OracleError::Infeasible {
            n,
            a,
            b,
            reason: format!("needs n ≥ 2a + b = {}", 2 * a + b),
        });
    }
    let m = n + a + b;
    if m > MULTIGRAPH_CAP {
        return Err(OracleError::TooManyStubs { m, cap: MULTIGRAPH_CAP });
    }
    let counts: Vec<((u32, u32), u64)> = [((1, 1), n - 2 * a - b), ((1, 2), a), ((2, 1), a), ((2, 2), b)]
        .into_iter()
        .filter(|&(_, c)| c > 0)
        .collect();
    let seq = BiDegreeSequence::from_counts(&counts)
        .map_err(|e| OracleError::Invalid(e.to_string()))?;
    let layout = StubLayout::new(&seq);
    let mut seen: BTreeSet<Vec<(u32, u32)>> = BTreeSet::new();
    let mut strongly_connected = 0u64;
    for matching in enumerate_matchings(&seq)? {
        let graph = MultiDigraph::from_matching(&seq, &layout, &matching);
        if seen.insert(graph.canonical_edges())
            && scc::decompose(&graph).component_count() == 1
        {
            strongly_connected += 1;
        }
    }
    Ok(strongly_connected)
}

// ---------------------------------------------------------------------------
// Preheart enumeration
// ---------------------------------------------------------------------------

/// Lists every preheart configuration of `seq`: all heart matchings, each
/// combined with every ordered assignment of the degree-(1,1) vertices to
/// heart arcs.
pub fn enumerate_preheart_configs(
    seq: &BiDegreeSequence,
) -> Result<(PreheartShape, Vec<PreheartConfig>), OracleError> {
    let m = seq.m();
    if m > ENUMERATION_CAP {
        return Err(OracleError::TooManyStubs { m, cap: ENUMERATION_CAP });
    }
    let shape = PreheartShape::new(seq)?;
    let hm = shape.heart_m();
    let mut configs = Vec::new();
    let mut heart_to_in: Vec<u32> = (0..hm as u32).collect();
    loop {
        let mut chains: Vec<Vec<u32>> = vec![Vec::new(); hm];
        extend_chains(&shape, &heart_to_in, 0, &mut chains, &mut configs);
        if !next_permutation(&mut heart_to_in) {
            break;
        }
    }
    Ok((shape, configs))
}

/// Inserts link vertex `idx` into every current slot, recursing; each
/// complete assignment emits one configuration. Inserting the links in a
/// fixed order makes assignments and slot sequences bijective.
fn extend_chains(
    shape: &PreheartShape,
    heart_to_in: &[u32],
    idx: usize,
    chains: &mut Vec<Vec<u32>>,
    out: &mut Vec<PreheartConfig>,
) {
    if idx == shape.links.len() {
        out.push(PreheartConfig {
            heart: shape.heart.clone(),
            heart_to_in: heart_to_in.to_vec(),
            arc_chains: chains.clone(),
        });
        return;
    }
    let link = shape.links[idx];
    for slot in 0..chains.len() + idx {
        let mut s = slot;
        for c in 0..chains.len() {
            if s <= chains[c].len() {
                chains[c].insert(s, link);
                extend_chains(shape, heart_to_in, idx + 1, chains, out);
                chains[c].remove(s);
                break;
            }
            s -= chains[c].len() + 1;
        }
    }
}

// ---------------------------------------------------------------------------
// Cycle enumeration
// ---------------------------------------------------------------------------

/// A simple directed cycle, canonicalized to start at its smallest vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleRecord {
    /// Cycle vertices in traversal order.
    pub vertices: Vec<u32>,
    /// Principal multiplicity `Π d⁻(v)·d⁺(v)` over the cycle's vertices
    /// (degrees in the host graph): the number of stub-level cycles that
    /// project onto this vertex cycle.
    pub principal_multiplicity: u128,
}

impl CycleRecord {
    #[must_use]
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// Lists all simple directed cycles of `g` (vertex-distinct, up to
/// rotation; parallel edges collapse), each with its principal
/// multiplicity. Aborts if more than [`CYCLE_GUARD`] cycles exist.
pub fn enumerate_subgraph_cycles(g: &MultiDigraph) -> Result<Vec<CycleRecord>, OracleError> {
    let n = g.n();
    let mut adj: Vec<Vec<u32>> = Vec::with_capacity(n);
    for v in 0..n {
        let mut targets: Vec<u32> = g.out_neighbors(v).to_vec();
        targets.sort_unstable();
        targets.dedup();
        adj.push(targets);
    }
    let in_deg = g.in_degrees();
    let out_deg: Vec<usize> = (0..n).map(|v| g.out_degree(v)).collect();

    let mut cycles = Vec::new();
    let mut on_path = vec![false; n];
    let mut path = Vec::new();
    for s in 0..n {
        on_path[s] = true;
        path.push(s as u32);
        cycle_dfs(s, s, &adj, &mut on_path, &mut path, &mut cycles)?;
        path.pop();
        on_path[s] = false;
    }
    for record in &mut cycles {
        record.principal_multiplicity = record
            .vertices
            .iter()
            .map(|&v| in_deg[v as usize] as u128 * out_deg[v as usize] as u128)
            .product();
    }
    Ok(cycles)
}

/// Extends a simple path rooted at `s` (the path's minimum vertex); edges
/// back to `s` close a cycle, and only vertices above `s` may extend, so
/// every cycle is found exactly once.
fn cycle_dfs(
    v: usize,
    s: usize,
    adj: &[Vec<u32>],
    on_path: &mut Vec<bool>,
    path: &mut Vec<u32>,
    cycles: &mut Vec<CycleRecord>,
) -> Result<(), OracleError> {
    for &w in &adj[v] {
        let w = w as usize;
        if w == s {
            if cycles.len() >= CYCLE_GUARD {
                return Err(OracleError::TooManyCycles(CYCLE_GUARD));
            }
            cycles.push(CycleRecord { vertices: path.clone(), principal_multiplicity: 0 });
        } else if w > s && !on_path[w] {
            on_path[w] = true;
            path.push(w as u32);
            cycle_dfs(w, s, adj, on_path, path, cycles)?;
            path.pop();
            on_path[w] = false;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Coupling check
// ---------------------------------------------------------------------------

/// Exact total-variation distance between (a) the pushforward of the
/// uniform matching law under the switching surgery for `forced` and
/// (b) the uniform law conditioned on every forced pair being present.
/// The switching construction promises exactly zero.
pub fn exact_coupling_check(
    seq: &BiDegreeSequence,
    forced: &ForcedPairs,
) -> Result<BigRational, OracleError> {
    let mut pushforward: BTreeMap<StubMatching, u64> = BTreeMap::new();
    let mut conditional: BTreeMap<StubMatching, u64> = BTreeMap::new();
    let mut total = 0u64;
    let mut conditioned = 0u64;
    for matching in enumerate_matchings(seq)? {
        let image = condition_on_pairs(&matching, forced);
        *pushforward.entry(image).or_insert(0) += 1;
        if forced.pairs().iter().all(|&(out_stub, in_stub)| matching.to_in(out_stub) == in_stub) {
            *conditional.entry(matching).or_insert(0) += 1;
            conditioned += 1;
        }
        total += 1;
    }
    if conditioned == 0 {
        return Err(OracleError::ImpossibleCondition);
    }
    let keys: BTreeSet<&StubMatching> = pushforward.keys().chain(conditional.keys()).collect();
    let mut l1 = BigRational::zero();
    for key in keys {
        let p = BigRational::new(
            BigInt::from(pushforward.get(key).copied().unwrap_or(0)),
            BigInt::from(total),
        );
        let q = BigRational::new(
            BigInt::from(conditional.get(key).copied().unwrap_or(0)),
            BigInt::from(conditioned),
        );
        let diff = p - q;
        l1 += if diff < BigRational::zero() { -diff } else { diff };
    }
    Ok(l1 / BigRational::from_integer(BigInt::from(2)))
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

/// Independent evaluation of `∫_α^∞ e^{−x}/x dx` by adaptive Simpson
/// quadrature on `[α, α+60]`; the truncated tail is below `10⁻²⁴` of the
/// value. Used to cross-check the series/continued-fraction evaluation.
#[must_use]
pub fn exponential_integral_quadrature(alpha: f64) -> f64 {
    assert!(alpha > 0.0 && alpha.is_finite(), "quadrature needs a positive lower limit");
    let f = |x: f64| (-x).exp() / x;
    let upper = alpha + 60.0;
    let whole = simpson_rule(&f, alpha, upper);
    let tol = whole.abs().max(f64::MIN_POSITIVE) * 1e-15;
    adaptive_simpson(&f, alpha, upper, whole, tol, 64)
}

fn simpson_rule(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
}

fn adaptive_simpson(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let mid = 0.5 * (a + b);
    let left = simpson_rule(f, a, mid);
    let right = simpson_rule(f, mid, b);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        adaptive_simpson(f, a, mid, left, tol * 0.5, depth - 1)
            + adaptive_simpson(f, mid, b, right, tol * 0.5, depth - 1)
    }
}

// ---------------------------------------------------------------------------
// Toy catalog
// ---------------------------------------------------------------------------

/// The fixed catalog of 40 small degree sequences (`m ≤ 6`) the exhaustive
/// cross-checks sweep: pure permutation profiles, single and multiple
/// high-degree vertices, near-critical excess profiles, sequences with
/// sources and sinks, and one isolated-vertex case.
#[must_use]
pub fn toy_catalog() -> Vec<BiDegreeSequence> {
    let entries: [&[((u32, u32), u64)]; 40] = [
        &[((1, 1), 1)],
        &[((1, 1), 2)],
        &[((1, 1), 3)],
        &[((1, 1), 4)],
        &[((1, 1), 5)],
        &[((1, 1), 6)],
        &[((2, 2), 1)],
        &[((2, 2), 1), ((1, 1), 2)],
        &[((2, 2), 1), ((1, 1), 1)],
        &[((2, 2), 1), ((1, 1), 3)],
        &[((2, 2), 1), ((1, 1), 3), ((0, 0), 1)],
        &[((2, 2), 2)],
        &[((2, 2), 2), ((1, 1), 1)],
        &[((2, 2), 3)],
        &[((1, 2), 1), ((2, 1), 1)],
        &[((1, 2), 1), ((2, 1), 1), ((1, 1), 1)],
        &[((1, 2), 1), ((2, 1), 1), ((1, 1), 2)],
        &[((1, 2), 1), ((2, 1), 1), ((1, 1), 3)],
        &[((1, 2), 2), ((2, 1), 2)],
        &[((1, 2), 1), ((2, 1), 1), ((2, 2), 1)],
        &[((2, 2), 1), ((1, 2), 1), ((2, 1), 1), ((1, 1), 1)],
        &[((3, 3), 1)],
        &[((3, 3), 1), ((1, 1), 1)],
        &[((3, 3), 1), ((1, 1), 2)],
        &[((3, 3), 1), ((1, 1), 3)],
        &[((3, 3), 2)],
        &[((3, 1), 1), ((1, 3), 1)],
        &[((3, 1), 1), ((1, 3), 1), ((1, 1), 1)],
        &[((3, 1), 1), ((1, 3), 1), ((1, 1), 2)],
        &[((0, 1), 1), ((1, 0), 1), ((1, 1), 1)],
        &[((0, 1), 1), ((1, 0), 1), ((1, 1), 2)],
        &[((0, 2), 1), ((2, 0), 1)],
        &[((0, 2), 1), ((2, 0), 1), ((1, 1), 2)],
        &[((0, 1), 2), ((1, 0), 2), ((1, 1), 1)],
        &[((0, 1), 1), ((1, 0), 1), ((2, 2), 1)],
        &[((0, 2), 1), ((1, 0), 2), ((1, 1), 2)],
        &[((2, 0), 1), ((0, 1), 2), ((1, 1), 2)],
        &[((1, 2), 1), ((1, 1), 1), ((2, 1), 1), ((0, 1), 1), ((1, 0), 1)],
        &[((2, 2), 1), ((0, 1), 2), ((1, 0), 2)],
        &[((4, 4), 1), ((1, 1), 1)],
    ];
    entries
        .iter()
        .map(|counts| BiDegreeSequence::from_counts(counts).expect("catalog entries are balanced"))
        .collect()
}

/// The motifs the probability-bound sweep checks on every catalog entry.
fn bound_check_motifs() -> Vec<(&'static str, MotifProfile)> {
    vec![
        ("loop", MotifProfile::cycle(1)),
        ("edge", MotifProfile::single_edge()),
        ("two-cycle", MotifProfile::cycle(2)),
        ("triangle", MotifProfile::cycle(3)),
        ("doubled-edge", MotifProfile::from_edges(2, vec![(0, 1), (0, 1)]).expect("valid motif")),
        ("path", MotifProfile::from_edges(3, vec![(0, 1), (1, 2)]).expect("valid motif")),
        (
            "bowtie",
            MotifProfile::from_edges(3, vec![(0, 1), (1, 0), (0, 2), (2, 0)]).expect("valid motif"),
        ),
    ]
}

// ---------------------------------------------------------------------------
// Verification suite
// ---------------------------------------------------------------------------

/// Outcome of one named verification check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn from_violations(name: &'static str, cases: u64, violations: Vec<String>) -> Self {
        let passed = violations.is_empty();
        let detail = if passed {
            format!("{cases} cases, no violations")
        } else {
            format!("{} of {cases} cases violated: {}", violations.len(), violations.join("; "))
        };
        CheckResult { name, passed, detail }
    }
}

/// Sweeps the catalog: for every sequence and motif, the exact expected
/// copy count must stay below the first-moment ceiling, and for cycles the
/// mean placement probability must stay above the (possibly clamped)
/// lower bound — exact rational comparisons, no tolerance.
#[must_use]
pub fn check_motif_probability_bounds() -> CheckResult {
    let motifs = bound_check_motifs();
    let mut cases = 0u64;
    let mut violations = Vec::new();
    for (idx, seq) in toy_catalog().iter().enumerate() {
        let params = DegreeParams::compute(seq);
        let n = seq.n() as u64;
        let m = seq.m();
        for (name, motif) in &motifs {
            if u64::from(motif.h()) > n || motif.k() > m {
                continue;
            }
            cases += 1;
            let embeddings = match exact_expected_embeddings(seq, motif) {
                Ok(e) => e,
                Err(e) => {
                    violations.push(format!("#{idx} {name}: enumeration failed: {e}"));
                    continue;
                }
            };
            let bound = match theory::subgraph_upper_bound(motif, &params) {
                Ok(b) => b,
                Err(e) => {
                    violations.push(format!("#{idx} {name}: bound failed: {e}"));
                    continue;
                }
            };
            let expected_copies = embeddings.clone()
                / BigRational::from_integer(BigInt::from(motif.aut()));
            if expected_copies > bound.n_plus {
                violations.push(format!(
                    "#{idx} {name}: expected copies {expected_copies} exceed ceiling {}",
                    bound.n_plus
                ));
            }
        }
        for h in 1..=3u64 {
            if h > n {
                continue;
            }
            cases += 1;
            let motif = MotifProfile::cycle(h as u32);
            let embeddings = match exact_expected_embeddings(seq, &motif) {
                Ok(e) => e,
                Err(e) => {
                    violations.push(format!("#{idx} {h}-cycle: enumeration failed: {e}"));
                    continue;
                }
            };
            let lower = match theory::cycle_lower_bound(&params, h, 0.5) {
                Ok(l) => l,
                Err(e) => {
                    violations.push(format!("#{idx} {h}-cycle: lower bound failed: {e}"));
                    continue;
                }
            };
            let mut falling = BigRational::one();
            for i in 0..h {
                falling *= BigRational::from_integer(BigInt::from(n - i));
            }
            let mean_placement = embeddings / falling;
            if mean_placement < lower.value {
                violations.push(format!(
                    "#{idx} {h}-cycle: mean placement probability {mean_placement} below floor {}",
                    lower.value
                ));
            }
        }
    }
    CheckResult::from_violations("motif-probability-bounds", cases, violations)
}

/// Exhaustive counting-bound sweep: exact strongly connected multigraph
/// counts stay below the closed-form ceiling for every feasible profile
/// with at most 7 edges, plus two pinned exact values.
#[must_use]
pub fn check_component_count_bound() -> CheckResult {
    let mut cases = 0u64;
    let mut violations = Vec::new();
    for n in 1..=7u64 {
        for a in 0..=3u64 {
            for b in 0..=7u64 {
                if a + b == 0 || 2 * a + b > n || n + a + b > 7 {
                    continue;
                }
                cases += 1;
                let exact = match count_scc_multidigraphs(n, a, b) {
                    Ok(c) => c,
                    Err(e) => {
                        violations.push(format!("N({n},{a},{b}) enumeration failed: {e}"));
                        continue;
                    }
                };
                let bound = match theory::scc_count_upper_bound(n, a, b) {
                    Ok(u) => u,
                    Err(e) => {
                        violations.push(format!("bound({n},{a},{b}) failed: {e}"));
                        continue;
                    }
                };
                if BigUint::from(exact) > bound {
                    violations.push(format!("N({n},{a},{b}) = {exact} exceeds ceiling {bound}"));
                }
            }
        }
    }
    for (n, a, b, want) in [(2u64, 1u64, 0u64, 1u64), (1, 0, 1, 1)] {
        cases += 1;
        match count_scc_multidigraphs(n, a, b) {
            Ok(got) if got == want => {}
            Ok(got) => violations.push(format!("N({n},{a},{b}) = {got}, expected {want}")),
            Err(e) => violations.push(format!("N({n},{a},{b}) failed: {e}")),
        }
    }
    CheckResult::from_violations("component-count-bound", cases, violations)
}

/// Direct enumeration of preheart configurations agrees with the counting
/// formula `m_H · (m−1)!` on three shapes, with all configurations distinct.
#[must_use]
pub fn check_preheart_count() -> CheckResult {
    let shapes: [(&[((u32, u32), u64)], u64); 3] = [
        (&[((2, 2), 1), ((1, 1), 2)], 12),
        (&[((2, 1), 2), ((1, 2), 2)], 720),
        (&[((2, 2), 1)], 2),
    ];
    let mut cases = 0u64;
    let mut violations = Vec::new();
    for (counts, want) in shapes {
        cases += 1;
        let seq = BiDegreeSequence::from_counts(counts).expect("valid shape");
        let formula = match count_preheart_configs(&seq) {
            Ok(c) => c,
            Err(e) => {
                violations.push(format!("{counts:?}: formula failed: {e}"));
                continue;
            }
        };
        match enumerate_preheart_configs(&seq) {
            Ok((_, configs)) => {
                let distinct: BTreeSet<&PreheartConfig> = configs.iter().collect();
                if configs.len() as u64 != want
                    || distinct.len() != configs.len()
                    || formula != BigUint::from(want)
                {
                    violations.push(format!(
                        "{counts:?}: enumerated {} ({} distinct), formula {formula}, expected {want}",
                        configs.len(),
                        distinct.len()
                    ));
                }
            }
            Err(e) => violations.push(format!("{counts:?}: enumeration failed: {e}")),
        }
    }
    CheckResult::from_violations("preheart-count", cases, violations)
}

/// Exhaustive coupling sweep: over every catalog sequence with `m ≤ 5` and
/// every forced set of up to 3 pairs, the switching pushforward equals the
/// exact conditional law — total variation exactly zero.
#[must_use]
pub fn check_coupling_exactness() -> CheckResult {
    let mut cases = 0u64;
    let mut violations = Vec::new();
    for (idx, seq) in toy_catalog().iter().enumerate() {
        let m = seq.m();
        if m > 5 {
            continue;
        }
        for j in 1..=3u64.min(m) {
            for out_stubs in combinations(m, j as usize) {
                for in_stubs in arrangements(m, j as usize) {
                    cases += 1;
                    let pairs: Vec<(u64, u64)> =
                        out_stubs.iter().copied().zip(in_stubs.iter().copied()).collect();
                    let forced = ForcedPairs::new(pairs.clone(), m).expect("distinct by construction");
                    match exact_coupling_check(seq, &forced) {
                        Ok(tv) if tv.is_zero() => {}
                        Ok(tv) => violations.push(format!(
                            "#{idx} forced {pairs:?}: total variation {tv} ≠ 0"
                        )),
                        Err(e) => {
                            violations.push(format!("#{idx} forced {pairs:?}: failed: {e}"))
                        }
                    }
                }
            }
        }
    }
    CheckResult::from_violations("coupling-exactness", cases, violations)
}

/// The series/continued-fraction exponential integral agrees with
/// independent adaptive quadrature to `10⁻¹²` relative error on a 50-point
/// grid spanning `[0.05, 20]`, and hits the pinned value at 1.
#[must_use]
pub fn check_exponential_integral_accuracy() -> CheckResult {
    let mut cases = 0u64;
    let mut violations = Vec::new();
    for i in 0..50 {
        cases += 1;
        let alpha = 0.05 + (20.0 - 0.05) * i as f64 / 49.0;
        let fast = match theory::xi_alpha(alpha) {
            Ok(v) => v,
            Err(e) => {
                violations.push(format!("xi({alpha}) failed: {e}"));
                continue;
            }
        };
        let slow = exponential_integral_quadrature(alpha);
        let rel = (fast - slow).abs() / slow.abs();
        if rel > 1e-12 {
            violations.push(format!("xi({alpha}) = {fast} vs quadrature {slow}: rel {rel:.2e}"));
        }
    }
    cases += 1;
    let pinned = theory::xi_alpha(1.0).unwrap_or(f64::NAN);
    if (pinned - 0.219_383_934_395_520).abs() > 1e-12 {
        violations.push(format!("xi(1) = {pinned}, expected 0.219383934395520 ± 1e-12"));
    }
    CheckResult::from_violations("exponential-integral-accuracy", cases, violations)
}

/// Matching enumeration yields exactly `m!` distinct matchings.
#[must_use]
pub fn check_matching_enumeration() -> CheckResult {
    let mut cases = 0u64;
    let mut violations = Vec::new();
    for (m, want) in [(1u64, 1u64), (3, 6), (4, 24)] {
        cases += 1;
        let seq = BiDegreeSequence::from_counts(&[((1, 1), m)]).expect("valid");
        match enumerate_matchings(&seq) {
            Ok(iter) => {
                let all: Vec<StubMatching> = iter.collect();
                let distinct: BTreeSet<&StubMatching> = all.iter().collect();
                if all.len() as u64 != want || distinct.len() != all.len() {
                    violations.push(format!(
                        "m = {m}: {} matchings ({} distinct), expected {want}",
                        all.len(),
                        distinct.len()
                    ));
                }
            }
            Err(e) => violations.push(format!("m = {m}: {e}")),
        }
    }
    CheckResult::from_violations("matching-enumeration", cases, violations)
}

/// Exact event probabilities on the 4-vertex permutation sequence.
#[must_use]
pub fn check_event_probabilities() -> CheckResult {
    let seq = BiDegreeSequence::from_counts(&[((1, 1), 4)]).expect("valid");
    let mut cases = 0u64;
    let mut violations = Vec::new();
    let mut expect = |name: &str, got: Result<BigRational, OracleError>, num: i64, den: i64| {
        cases += 1;
        let want = BigRational::new(BigInt::from(num), BigInt::from(den));
        match got {
            Ok(p) if p == want => {}
            Ok(p) => violations.push(format!("{name}: {p}, expected {want}")),
            Err(e) => violations.push(format!("{name}: {e}")),
        }
    };
    expect(
        "edge 0→1 present",
        exact_event_probability(&seq, |g| g.out_neighbors(0).contains(&1)),
        1,
        4,
    );
    expect(
        "graph is one 4-cycle",
        exact_event_probability(&seq, |g| {
            let census = scc::census(g);
            census.sizes == [4] && census.cycle_lengths == [4]
        }),
        1,
        4,
    );
    expect("always true", exact_event_probability(&seq, |_| true), 1, 1);
    CheckResult::from_violations("event-probabilities", cases, violations)
}

/// Exact component-size distributions on the smallest permutation
/// sequences match the known cycle-type arithmetic.
#[must_use]
pub fn check_component_size_pmfs() -> CheckResult {
    fn expect(
        cases: &mut u64,
        violations: &mut Vec<String>,
        name: &str,
        got: BigRational,
        num: i64,
        den: i64,
    ) {
        *cases += 1;
        let want = BigRational::new(BigInt::from(num), BigInt::from(den));
        if got != want {
            violations.push(format!("{name}: {got}, expected {want}"));
        }
    }
    let mut cases = 0u64;
    let mut violations = Vec::new();

    let single = BiDegreeSequence::from_counts(&[((1, 1), 1)]).expect("valid");
    match exact_component_size_distribution(&single, 1) {
        Ok(dist) => expect(
            &mut cases,
            &mut violations,
            "lone vertex |C_1| = 1",
            dist.probability(1),
            1,
            1,
        ),
        Err(e) => violations.push(format!("lone vertex: {e}")),
    }

    let three = BiDegreeSequence::from_counts(&[((1, 1), 3)]).expect("valid");
    match exact_component_size_distribution(&three, 1) {
        Ok(dist) => {
            expect(&mut cases, &mut violations, "n=3 largest = 3", dist.probability(3), 1, 3);
            expect(&mut cases, &mut violations, "n=3 largest = 2", dist.probability(2), 1, 2);
            expect(&mut cases, &mut violations, "n=3 largest = 1", dist.probability(1), 1, 6);
        }
        Err(e) => violations.push(format!("n=3 rank 1: {e}")),
    }
    match exact_component_size_distribution(&three, 3) {
        Ok(dist) => {
            expect(&mut cases, &mut violations, "n=3 third = 1", dist.probability(1), 1, 6);
            expect(&mut cases, &mut violations, "n=3 third absent", dist.probability(0), 5, 6);
        }
        Err(e) => violations.push(format!("n=3 rank 3: {e}")),
    }
    CheckResult::from_violations("component-size-pmfs", cases, violations)
}

/// Runs every verification check.
#[must_use]
pub fn run_verification_suite() -> Vec<CheckResult> {
    vec![
        check_matching_enumeration(),
        check_event_probabilities(),
        check_component_size_pmfs(),
        check_motif_probability_bounds(),
        check_component_count_bound(),
        check_preheart_count(),
        check_coupling_exactness(),
        check_exponential_integral_accuracy(),
    ]
}

/// All size-`k` subsets of `0..m`, ascending.
fn combinations(m: u64, k: usize) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    combine_from(0, m, k, &mut current, &mut out);
    out
}

fn combine_from(start: u64, m: u64, k: usize, current: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
    if current.len() == k {
        out.push(current.clone());
        return;
    }
    for x in start..m {
        current.push(x);
        combine_from(x + 1, m, k, current, out);
        current.pop();
    }
}

/// All size-`k` ordered selections from `0..m`.
fn arrangements(m: u64, k: usize) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    let mut used = vec![false; m as usize];
    arrange_from(m, k, &mut current, &mut used, &mut out);
    out
}

fn arrange_from(
    m: u64,
    k: usize,
    current: &mut Vec<u64>,
    used: &mut Vec<bool>,
    out: &mut Vec<Vec<u64>>,
) {
    if current.len() == k {
        out.push(current.clone());
        return;
    }
    for x in 0..m {
        if used[x as usize] {
            continue;
        }
        used[x as usize] = true;
        current.push(x);
        arrange_from(m, k, current, used, out);
        current.pop();
        used[x as usize] = false;
    }
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    fn seq_counts(counts: &[((u32, u32), u64)]) -> BiDegreeSequence {
        BiDegreeSequence::from_counts(counts).unwrap()
    }

    #[test]
    fn matching_enumeration_counts_and_cap() {
        let three = seq_counts(&[((1, 1), 3)]);
        let all: Vec<StubMatching> = enumerate_matchings(&three).unwrap().collect();
        assert_eq!(all.len(), 6);
        let distinct: BTreeSet<&StubMatching> = all.iter().collect();
        assert_eq!(distinct.len(), 6);

        let single = seq_counts(&[((1, 1), 1)]);
        assert_eq!(enumerate_matchings(&single).unwrap().count(), 1);

        let big = seq_counts(&[((1, 1), 10)]);
        assert!(matches!(
            enumerate_matchings(&big),
            Err(OracleError::TooManyStubs { m: 10, cap: ENUMERATION_CAP })
        ));
    }

    #[test]
    fn event_probability_examples() {
        let result = check_event_probabilities();
        assert!(result.passed, "{}", result.detail);
    }

    #[test]
    fn component_size_pmf_examples() {
        let result = check_component_size_pmfs();
        assert!(result.passed, "{}", result.detail);
    }

    #[test]
    fn distribution_denominators_divide_factorial() {
        let seq = seq_counts(&[((2, 2), 1), ((1, 1), 2)]);
        let dist = exact_component_size_distribution(&seq, 1).unwrap();
        let m_fact = BigUint::from(24u32);
        for p in dist.probabilities().values() {
            let den = p.denom().to_biguint().expect("positive denominator");
            assert!(
                (m_fact.clone() % den).is_zero(),
                "denominator {p} must divide m!"
            );
        }
        assert!(dist.total_mass().is_one());
    }

    #[test]
    fn distribution_json_round_trip() {
        let seq = seq_counts(&[((1, 1), 3)]);
        let dist = exact_component_size_distribution(&seq, 1).unwrap();
        let json: serde_json::Value = serde_json::from_str(&dist.to_json_string()).unwrap();
        assert_eq!(json["3"][0], "1");
        assert_eq!(json["3"][1], "3");
        assert_eq!(json["2"][0], "1");
        assert_eq!(json["2"][1], "2");
    }

    #[test]
    fn scc_multidigraph_counts() {
        assert_eq!(count_scc_multidigraphs(2, 1, 0).unwrap(), 1);
        assert_eq!(count_scc_multidigraphs(1, 0, 1).unwrap(), 1);
        // Permutation profile: strongly connected means one n-cycle, and
        // there are (n−1)! labelled ones.
        assert_eq!(count_scc_multidigraphs(3, 0, 0).unwrap(), 2);
        assert!(matches!(
            count_scc_multidigraphs(1, 1, 0),
            Err(OracleError::Infeasible { .. })
        ));
        assert!(matches!(
            count_scc_multidigraphs(8, 1, 0),
            Err(OracleError::TooManyStubs { .. })
        ));
    }

    #[test]
    fn scc_counts_stay_below_ceiling_on_small_profiles() {
        for n in 1..=4u64 {
            for a in 0..=1u64 {
                for b in 0..=1u64 {
                    if a + b == 0 || 2 * a + b > n {
                        continue;
                    }
                    let exact = count_scc_multidigraphs(n, a, b).unwrap();
                    let bound = theory::scc_count_upper_bound(n, a, b).unwrap();
                    assert!(
                        BigUint::from(exact) <= bound,
                        "N({n},{a},{b}) = {exact} exceeds {bound}"
                    );
                }
            }
        }
    }

    #[test]
    fn preheart_enumeration_matches_formula_and_marginal() {
        let seq = seq_counts(&[((2, 2), 1), ((1, 1), 2)]);
        let (shape, configs) = enumerate_preheart_configs(&seq).unwrap();
        assert_eq!(configs.len(), 12);
        let distinct: BTreeSet<&PreheartConfig> = configs.iter().collect();
        assert_eq!(distinct.len(), 12);
        assert_eq!(count_preheart_configs(&seq).unwrap(), BigUint::from(12u32));

        // Marginal over realized multigraphs: the two chain layouts that
        // differ only by which loop arc carries which chain collapse, so
        // the three distinct multigraphs each carry mass 4/12.
        let mut by_graph: BTreeMap<Vec<(u32, u32)>, u64> = BTreeMap::new();
        for config in &configs {
            let graph = config.to_multidigraph(&shape, seq.n());
            *by_graph.entry(graph.canonical_edges()).or_insert(0) += 1;
        }
        assert_eq!(by_graph.len(), 3);
        assert!(by_graph.values().all(|&c| c == 4));
    }

    #[test]
    fn cycle_enumeration_examples() {
        // Triangle: one cycle, multiplicity 1.
        let triangle = MultiDigraph::new(3, vec![(0, 1), (1, 2), (2, 0)]);
        let cycles = enumerate_subgraph_cycles(&triangle).unwrap();
        assert_eq!(cycles.len(), 1);
        assert_eq!(cycles[0].vertices, vec![0, 1, 2]);
        assert_eq!(cycles[0].principal_multiplicity, 1);

        // Two 2-cycles sharing a center of degree (2,2): each cycle's
        // multiplicity is 2·2·1·1 = 4.
        let bowtie = MultiDigraph::new(3, vec![(0, 1), (1, 0), (0, 2), (2, 0)]);
        let cycles = enumerate_subgraph_cycles(&bowtie).unwrap();
        assert_eq!(cycles.len(), 2);
        assert!(cycles.iter().all(|c| c.len() == 2 && c.principal_multiplicity == 4));

        // Parallel edges collapse to one vertex cycle.
        let doubled = MultiDigraph::new(2, vec![(0, 1), (0, 1), (1, 0)]);
        let cycles = enumerate_subgraph_cycles(&doubled).unwrap();
        assert_eq!(cycles.len(), 1);
        assert_eq!(cycles[0].vertices, vec![0, 1]);
        // Degrees in the host multigraph: 0 has (1,2), 1 has (2,1).
        assert_eq!(cycles[0].principal_multiplicity, 4);

        // Self-loop is a length-1 cycle; edgeless graph has none.
        let looped = MultiDigraph::new(1, vec![(0, 0)]);
        assert_eq!(enumerate_subgraph_cycles(&looped).unwrap().len(), 1);
        let empty = MultiDigraph::new(3, vec![]);
        assert!(enumerate_subgraph_cycles(&empty).unwrap().is_empty());
    }

    #[test]
    fn cycle_enumeration_agrees_with_census_on_permutation_graphs() {
        // On a permutation digraph every vertex has in- and out-degree 1,
        // so the simple cycles are exactly the components of the census.
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        let seq = seq_counts(&[((1, 1), 6)]);
        let layout = StubLayout::new(&seq);
        for _ in 0..25 {
            let matching = crate::sampler::sample_configuration(&seq, &mut rng);
            let graph = MultiDigraph::from_matching(&seq, &layout, &matching);
            let census = scc::census(&graph);
            let cycles = enumerate_subgraph_cycles(&graph).unwrap();
            assert_eq!(cycles.len(), census.sizes.len());
            assert!(cycles.iter().all(|c| c.principal_multiplicity == 1));
            let mut lens: Vec<u64> = cycles.iter().map(|c| c.len() as u64).collect();
            lens.sort_unstable_by(|x, y| y.cmp(x));
            assert_eq!(lens, census.cycle_lengths);
        }
    }

    #[test]
    fn coupling_check_zero_cases() {
        // m = 2, one forced pair.
        let two = seq_counts(&[((1, 1), 2)]);
        let forced = ForcedPairs::new(vec![(0, 0)], 2).unwrap();
        assert!(exact_coupling_check(&two, &forced).unwrap().is_zero());

        // m = 4, two forced pairs.
        let four = seq_counts(&[((2, 2), 1), ((1, 1), 2)]);
        let forced = ForcedPairs::new(vec![(0, 3), (2, 1)], 4).unwrap();
        assert!(exact_coupling_check(&four, &forced).unwrap().is_zero());

        // m = 5, fully forced: both laws are the same point mass.
        let five = seq_counts(&[((1, 1), 5)]);
        let forced = ForcedPairs::new(vec![(0, 2), (1, 0), (2, 4), (3, 1), (4, 3)], 5).unwrap();
        assert!(exact_coupling_check(&five, &forced).unwrap().is_zero());
    }

    #[test]
    fn quadrature_is_independently_accurate() {
        assert!((exponential_integral_quadrature(1.0) - 0.219_383_934_395_520).abs() < 1e-12);
        assert!((exponential_integral_quadrature(0.5) - 0.559_773_594_776_160).abs() < 1e-12);
    }

    #[test]
    fn catalog_shape() {
        let catalog = toy_catalog();
        assert_eq!(catalog.len(), 40);
        assert!(catalog.iter().all(|seq| seq.m() <= 6));
        // The preheart example sequence is present.
        assert!(catalog
            .iter()
            .any(|seq| seq.count(2, 2) == 1 && seq.count(1, 1) == 2 && seq.n() == 3));
    }

    #[test]
    fn verification_suite_is_clean() {
        for result in run_verification_suite() {
            assert!(result.passed, "{}: {}", result.name, result.detail);
        }
    }
}
