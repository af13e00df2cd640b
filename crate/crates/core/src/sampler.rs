//! Configuration-model samplers and matching surgery.
//!
//! Stubs are numbered contiguously per vertex in vertex order: vertex `v`
//! owns out-stubs `out_start(v) .. out_start(v+1)` and in-stubs
//! `in_start(v) .. in_start(v+1)`. A [`StubMatching`] is a bijection from
//! out-stubs to in-stubs; reading each matched pair as an edge yields the
//! multi-digraph realization (parallel edges and self-loops allowed).
//!
//! Besides the plain uniform sampler this module provides the *preheart*
//! sampler for sequences of minimum semi-degree one (configuration model on
//! the vertices of total degree ≥ 3, with the degree-(1,1) vertices strung
//! uniformly along the resulting arcs) and [`condition_on_pairs`], the
//! sequential switching surgery that conditions a matching on containing
//! prescribed stub pairs.

use num::BigUint;
use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::degseq::BiDegreeSequence;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("stub id {stub} out of range for m = {m}")]
    StubOutOfRange { stub: u64, m: u64 },
    #[error("duplicate {side} stub {stub} in forced pairs")]
    DuplicateForcedStub { side: &'static str, stub: u64 },
    #[error("preheart sampler requires minimum semi-degree 1, but vertex {vertex} has d_in = {d_in}, d_out = {d_out}")]
    PreheartDegree { vertex: usize, d_in: u32, d_out: u32 },
    #[error("preheart sampler requires at least one vertex of total degree ≥ 3")]
    PreheartNoHeart,
}

// ---------------------------------------------------------------------------
// Stub layout
// ---------------------------------------------------------------------------

/// Contiguous per-vertex stub numbering for a bi-degree sequence, with
/// stub-to-owner lookup tables.
#[derive(Debug, Clone)]
pub struct StubLayout {
    out_start: Vec<u64>,
    in_start: Vec<u64>,
    out_owner: Vec<u32>,
    in_owner: Vec<u32>,
}

impl StubLayout {
    #[must_use]
    pub fn new(seq: &BiDegreeSequence) -> Self {
        let n = seq.n();
        let m = seq.m() as usize;
        let mut out_start = Vec::with_capacity(n + 1);
        let mut in_start = Vec::with_capacity(n + 1);
        let mut out_owner = Vec::with_capacity(m);
        let mut in_owner = Vec::with_capacity(m);
        let (mut so, mut si) = (0u64, 0u64);
        for (v, &(d_in, d_out)) in seq.pairs().iter().enumerate() {
            out_start.push(so);
            in_start.push(si);
            so += u64::from(d_out);
            si += u64::from(d_in);
            for _ in 0..d_out {
                out_owner.push(v as u32);
            }
            for _ in 0..d_in {
                in_owner.push(v as u32);
            }
        }
        out_start.push(so);
        in_start.push(si);
        Self { out_start, in_start, out_owner, in_owner }
    }

    /// Number of stubs on each side.
    #[must_use]
    pub fn m(&self) -> u64 {
        self.out_owner.len() as u64
    }

    /// First out-stub id of vertex `v`; `out_start(n)` equals `m`.
    #[must_use]
    pub fn out_start(&self, v: usize) -> u64 {
        self.out_start[v]
    }

    /// First in-stub id of vertex `v`; `in_start(n)` equals `m`.
    #[must_use]
    pub fn in_start(&self, v: usize) -> u64 {
        self.in_start[v]
    }

    /// Vertex owning out-stub `s`.
    #[must_use]
    pub fn out_owner(&self, s: u64) -> u32 {
        self.out_owner[s as usize]
    }

    /// Vertex owning in-stub `s`.
    #[must_use]
    pub fn in_owner(&self, s: u64) -> u32 {
        self.in_owner[s as usize]
    }
}

// ---------------------------------------------------------------------------
// StubMatching
// ---------------------------------------------------------------------------

/// A perfect matching of out-stubs to in-stubs, stored as `to_in[out_stub]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StubMatching {
    to_in: Vec<u32>,
}

impl StubMatching {
    /// Wraps an explicit bijection (used by the enumeration oracle).
    #[must_use]
    pub fn from_vec(to_in: Vec<u32>) -> Self {
        debug_assert!({
            let mut seen = vec![false; to_in.len()];
            to_in.iter().all(|&b| {
                let fresh = !seen[b as usize];
                seen[b as usize] = true;
                fresh
            })
        });
        Self { to_in }
    }

    #[must_use]
    pub fn m(&self) -> u64 {
        self.to_in.len() as u64
    }

    /// In-stub matched to out-stub `s`.
    #[must_use]
    pub fn to_in(&self, s: u64) -> u64 {
        u64::from(self.to_in[s as usize])
    }

    #[must_use]
    pub fn as_slice(&self) -> &[u32] {
        &self.to_in
    }
}

/// Draws a uniform stub matching: a uniform permutation of the in-stub ids
/// laid against out-stubs `0..m` (Fisher–Yates, `O(m)`).
pub fn sample_configuration<R: Rng + ?Sized>(seq: &BiDegreeSequence, rng: &mut R) -> StubMatching {
    let m = seq.m() as usize;
    let mut to_in: Vec<u32> = (0..m as u32).collect();
    to_in.shuffle(rng);
    StubMatching { to_in }
}

// ---------------------------------------------------------------------------
// MultiDigraph
// ---------------------------------------------------------------------------

/// A labelled multi-digraph: an edge list (parallel edges and self-loops
/// allowed) plus a CSR out-adjacency index.
#[derive(Debug, Clone)]
pub struct MultiDigraph {
    n: usize,
    edges: Vec<(u32, u32)>,
    adj_offsets: Vec<usize>,
    adj_targets: Vec<u32>,
}

impl MultiDigraph {
    /// Builds the graph and its adjacency index from an explicit edge list.
    #[must_use]
    pub fn new(n: usize, edges: Vec<(u32, u32)>) -> Self {
        let mut degree = vec![0usize; n];
        for &(u, _) in &edges {
            degree[u as usize] += 1;
        }
        let mut adj_offsets = Vec::with_capacity(n + 1);
        let mut acc = 0usize;
        for v in 0..n {
            adj_offsets.push(acc);
            acc += degree[v];
        }
        adj_offsets.push(acc);
        let mut cursor = adj_offsets.clone();
        let mut adj_targets = vec![0u32; edges.len()];
        for &(u, v) in &edges {
            adj_targets[cursor[u as usize]] = v;
            cursor[u as usize] += 1;
        }
        Self { n, edges, adj_offsets, adj_targets }
    }

    /// Realizes a matching as a multi-digraph. Edges are listed in out-stub
    /// id order, so the edge list is deterministic given the matching.
    #[must_use]
    pub fn from_matching(seq: &BiDegreeSequence, layout: &StubLayout, matching: &StubMatching) -> Self {
        debug_assert_eq!(layout.m(), matching.m());
        let edges: Vec<(u32, u32)> = (0..matching.m())
            .map(|s| (layout.out_owner(s), layout.in_owner(matching.to_in(s))))
            .collect();
        Self::new(seq.n(), edges)
    }

    #[must_use]
    pub fn n(&self) -> usize {
        self.n
    }

    #[must_use]
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    /// Edge list in insertion (out-stub id) order.
    #[must_use]
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    /// Out-neighbors of `v`, one entry per parallel edge.
    #[must_use]
    pub fn out_neighbors(&self, v: usize) -> &[u32] {
        &self.adj_targets[self.adj_offsets[v]..self.adj_offsets[v + 1]]
    }

    /// Out-degree of `v` in the realized graph.
    #[must_use]
    pub fn out_degree(&self, v: usize) -> usize {
        self.adj_offsets[v + 1] - self.adj_offsets[v]
    }

    /// In-degrees of all vertices in the realized graph.
    #[must_use]
    pub fn in_degrees(&self) -> Vec<usize> {
        let mut d = vec![0usize; self.n];
        for &(_, v) in &self.edges {
            d[v as usize] += 1;
        }
        d
    }

    /// Canonical edge multiset: the edge list sorted by (source, target).
    /// Two realizations are the same labelled multi-digraph iff these agree.
    #[must_use]
    pub fn canonical_edges(&self) -> Vec<(u32, u32)> {
        let mut e = self.edges.clone();
        e.sort_unstable();
        e
    }

    /// Edge-list text format: a `n m` header line, then one `u v` line per
    /// edge (0-indexed), in edge-list order.
    #[must_use]
    pub fn to_edge_list_string(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::with_capacity(self.edges.len() * 8 + 16);
        let _ = writeln!(out, "{} {}", self.n, self.edges.len());
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    /// Parses the edge-list text format. `#` comments and blank lines are
    /// ignored; the declared edge count must match.
    pub fn parse_edge_list(text: &str) -> Result<Self, String> {
        let mut significant = Vec::new();
        for raw in text.lines() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let line = line.trim();
            if !line.is_empty() {
                significant.push(line);
            }
        }
        let header = significant.first().ok_or("empty edge list")?;
        let mut it = header.split_whitespace();
        let n: usize = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format!("bad header {header:?}"))?;
        let m: usize = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format!("bad header {header:?}"))?;
        if it.next().is_some() {
            return Err(format!("bad header {header:?}"));
        }
        let mut edges = Vec::with_capacity(m);
        for line in &significant[1..] {
            let mut it = line.split_whitespace();
            let u: u32 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| format!("bad edge line {line:?}"))?;
            let v: u32 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| format!("bad edge line {line:?}"))?;
            if it.next().is_some() {
                return Err(format!("bad edge line {line:?}"));
            }
            if u as usize >= n || v as usize >= n {
                return Err(format!("edge ({u}, {v}) out of range for n = {n}"));
            }
            edges.push((u, v));
        }
        if edges.len() != m {
            return Err(format!("header declares {m} edges, found {}", edges.len()));
        }
        Ok(Self::new(n, edges))
    }
}

// ---------------------------------------------------------------------------
// Forced pairs and switching surgery
// ---------------------------------------------------------------------------

/// A set of forced (out-stub, in-stub) pairs with no stub repeated on
/// either side.
#[derive(Debug, Clone)]
pub struct ForcedPairs {
    pairs: Vec<(u64, u64)>,
}

impl ForcedPairs {
    /// Validates distinctness on both sides and range against `m`.
    pub fn new(pairs: Vec<(u64, u64)>, m: u64) -> Result<Self, SamplerError> {
        let mut outs = std::collections::BTreeSet::new();
        let mut ins = std::collections::BTreeSet::new();
        for &(a, b) in &pairs {
            if a >= m {
                return Err(SamplerError::StubOutOfRange { stub: a, m });
            }
            if b >= m {
                return Err(SamplerError::StubOutOfRange { stub: b, m });
            }
            if !outs.insert(a) {
                return Err(SamplerError::DuplicateForcedStub { side: "out", stub: a });
            }
            if !ins.insert(b) {
                return Err(SamplerError::DuplicateForcedStub { side: "in", stub: b });
            }
        }
        Ok(Self { pairs })
    }

    #[must_use]
    pub fn pairs(&self) -> &[(u64, u64)] {
        &self.pairs
    }

    #[must_use]
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Conditions `matching` on containing every forced pair by sequential
/// switchings: for each forced pair `(a, b)` in order, if `a` is not already
/// matched to `b`, the two offending pairs are rewired in a 4-cycle —
/// `a ↦ b` and the displaced partners joined. Deterministic given its input;
/// pushing the uniform distribution through this map yields exactly the
/// uniform distribution conditioned on the forced pairs.
#[must_use]
pub fn condition_on_pairs(matching: &StubMatching, forced: &ForcedPairs) -> StubMatching {
    let mut to_in = matching.to_in.clone();
    let mut from_in: Vec<u32> = vec![0; to_in.len()];
    for (a, &b) in to_in.iter().enumerate() {
        from_in[b as usize] = a as u32;
    }
    for &(a, b) in &forced.pairs {
        let (a, b) = (a as usize, b as usize);
        let b_cur = to_in[a] as usize; // current partner of a
        if b_cur == b {
            continue;
        }
        let a_cur = from_in[b] as usize; // out-stub currently holding b
        to_in[a] = b as u32;
        to_in[a_cur] = b_cur as u32;
        from_in[b] = a as u32;
        from_in[b_cur] = a_cur as u32;
    }
    StubMatching { to_in }
}

// ---------------------------------------------------------------------------
// Preheart sampler
// ---------------------------------------------------------------------------

/// A preheart configuration: a stub matching on the heart (the vertices of
/// total degree ≥ 3) together with an ordered assignment of the degree-(1,1)
/// vertices to the heart arcs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PreheartConfig {
    /// Heart vertices in vertex order.
    pub heart: Vec<u32>,
    /// Heart matching: `heart_to_in[s]` is the heart in-stub matched to
    /// heart out-stub `s` (heart stubs numbered contiguously per heart
    /// vertex, in heart order).
    pub heart_to_in: Vec<u32>,
    /// Per heart arc (indexed by heart out-stub), the ordered list of
    /// degree-(1,1) vertices strung along it.
    pub arc_chains: Vec<Vec<u32>>,
}

/// Quantities shared by sampling and enumeration of preheart configurations.
#[derive(Debug, Clone)]
pub struct PreheartShape {
    /// Heart vertices (total degree ≥ 3) in vertex order.
    pub heart: Vec<u32>,
    /// Degree-(1,1) vertices in vertex order.
    pub links: Vec<u32>,
    /// Heart out-stub owners (heart-local stub numbering).
    pub heart_out_owner: Vec<u32>,
    /// Heart in-stub owners.
    pub heart_in_owner: Vec<u32>,
}

impl PreheartShape {
    /// Splits `seq` into heart and link vertices, checking the minimum
    /// semi-degree precondition.
    pub fn new(seq: &BiDegreeSequence) -> Result<Self, SamplerError> {
        let mut heart = Vec::new();
        let mut links = Vec::new();
        for (v, &(d_in, d_out)) in seq.pairs().iter().enumerate() {
            if d_in == 0 || d_out == 0 {
                return Err(SamplerError::PreheartDegree { vertex: v, d_in, d_out });
            }
            if d_in + d_out >= 3 {
                heart.push(v as u32);
            } else {
                links.push(v as u32);
            }
        }
        if heart.is_empty() {
            return Err(SamplerError::PreheartNoHeart);
        }
        let mut heart_out_owner = Vec::new();
        let mut heart_in_owner = Vec::new();
        for &v in &heart {
            for _ in 0..seq.d_out(v as usize) {
                heart_out_owner.push(v);
            }
            for _ in 0..seq.d_in(v as usize) {
                heart_in_owner.push(v);
            }
        }
        debug_assert_eq!(heart_out_owner.len(), heart_in_owner.len());
        Ok(Self { heart, links, heart_out_owner, heart_in_owner })
    }

    /// Number of heart arcs.
    #[must_use]
    pub fn heart_m(&self) -> usize {
        self.heart_out_owner.len()
    }
}

impl PreheartConfig {
    /// Realizes the configuration as a labelled multi-digraph: each heart
    /// arc `u → w` carrying chain `x₁, …, x_j` becomes the path
    /// `u → x₁ → ⋯ → x_j → w`.
    #[must_use]
    pub fn to_multidigraph(&self, shape: &PreheartShape, n: usize) -> MultiDigraph {
        let mut edges = Vec::new();
        for (s, chain) in self.arc_chains.iter().enumerate() {
            let u = shape.heart_out_owner[s];
            let w = shape.heart_in_owner[self.heart_to_in[s] as usize];
            let mut prev = u;
            for &x in chain {
                edges.push((prev, x));
                prev = x;
            }
            edges.push((prev, w));
        }
        MultiDigraph::new(n, edges)
    }
}

/// Draws a uniform preheart configuration: a uniform stub matching on the
/// heart, then the degree-(1,1) vertices inserted one at a time into a slot
/// chosen uniformly among all current slots (each arc with a chain of length
/// `L` offers `L + 1` slots), which makes every (matching, ordered
/// assignment) pair equally likely.
pub fn sample_preheart_config<R: Rng + ?Sized>(
    seq: &BiDegreeSequence,
    rng: &mut R,
) -> Result<(PreheartShape, PreheartConfig), SamplerError> {
    let shape = PreheartShape::new(seq)?;
    let hm = shape.heart_m();
    let mut heart_to_in: Vec<u32> = (0..hm as u32).collect();
    heart_to_in.shuffle(rng);

    let mut arc_chains: Vec<Vec<u32>> = vec![Vec::new(); hm];
    for (i, &x) in shape.links.iter().enumerate() {
        let mut slot = rng.gen_range(0..hm + i);
        for chain in arc_chains.iter_mut() {
            if slot <= chain.len() {
                chain.insert(slot, x);
                break;
            }
            slot -= chain.len() + 1;
        }
    }
    let config = PreheartConfig { heart: shape.heart.clone(), heart_to_in, arc_chains };
    Ok((shape, config))
}

/// Draws a uniform preheart configuration and realizes it as a graph.
pub fn sample_preheart<R: Rng + ?Sized>(
    seq: &BiDegreeSequence,
    rng: &mut R,
) -> Result<MultiDigraph, SamplerError> {
    let (shape, config) = sample_preheart_config(seq, rng)?;
    Ok(config.to_multidigraph(&shape, seq.n()))
}

/// Exact number of preheart configurations: heart matchings times ordered
/// assignments of the degree-(1,1) vertices to heart arcs. With `n′` heart
/// vertices this is `(n′ + m − n)/m · m!`, i.e. `m_H · (m−1)!` where `m_H`
/// is the number of heart arcs.
pub fn count_preheart_configs(seq: &BiDegreeSequence) -> Result<BigUint, SamplerError> {
    let shape = PreheartShape::new(seq)?;
    let mut count = BigUint::from(shape.heart_m());
    for i in 2..seq.m() {
        count *= BigUint::from(i);
    }
    Ok(count)
}

// ---------------------------------------------------------------------------
