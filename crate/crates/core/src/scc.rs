//! Strongly connected components and their census.
//!
//! Decomposition uses Tarjan's algorithm with an explicit frame stack, so
//! graphs with millions of vertices decompose without recursion limits.
//! Components are classified by their internal edge count: a strongly
//! connected component with `s` vertices has at least `s` internal edges
//! unless it is a single vertex without a self-loop (*trivial*); exactly `s`
//! internal edges make it a directed *cycle* (a self-loop is a 1-cycle);
//! more make it *complex*. Parallel edges count separately, so a doubled
//! 2-cycle is complex.

use serde::Serialize;

use crate::sampler::MultiDigraph;

// ---------------------------------------------------------------------------
// Decomposition
// ---------------------------------------------------------------------------

/// A partition of the vertices into strongly connected components.
#[derive(Debug, Clone)]
pub struct SccDecomposition {
    /// Component id per vertex.
    pub comp_id: Vec<u32>,
    /// Vertex lists per component.
    pub components: Vec<Vec<u32>>,
    /// Number of edges with both endpoints in the component, per component.
    pub internal_edges: Vec<u64>,
}

impl SccDecomposition {
    #[must_use]
    pub fn component_count(&self) -> usize {
        self.components.len()
    }
}

/// Tarjan frame: a vertex and the index of its next unexplored out-edge.
struct Frame {
    v: u32,
    next_edge: usize,
}

/// Decomposes `g` into strongly connected components in `O(n + m)` time,
/// iteratively (no recursion).
#[must_use]
pub fn decompose(g: &MultiDigraph) -> SccDecomposition {
    const UNVISITED: u32 = u32::MAX;
    let n = g.n();
    let mut index = vec![UNVISITED; n];
    let mut lowlink = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut frames: Vec<Frame> = Vec::new();
    let mut comp_id = vec![0u32; n];
    let mut components: Vec<Vec<u32>> = Vec::new();
    let mut counter: u32 = 0;

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        frames.push(Frame { v: root as u32, next_edge: 0 });
        index[root] = counter;
        lowlink[root] = counter;
        counter += 1;
        stack.push(root as u32);
        on_stack[root] = true;

        while let Some(frame) = frames.last_mut() {
            let v = frame.v as usize;
            if let Some(&w) = g.out_neighbors(v).get(frame.next_edge) {
                frame.next_edge += 1;
                let w = w as usize;
                if index[w] == UNVISITED {
                    index[w] = counter;
                    lowlink[w] = counter;
                    counter += 1;
                    stack.push(w as u32);
                    on_stack[w] = true;
                    frames.push(Frame { v: w as u32, next_edge: 0 });
                } else if on_stack[w] {
                    lowlink[v] = lowlink[v].min(index[w]);
                }
            } else {
                // v is exhausted: pop its frame, fold its lowlink into the
                // parent, and emit a component if v is a root.
                if lowlink[v] == index[v] {
                    let id = components.len() as u32;
                    let mut members = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w as usize] = false;
                        comp_id[w as usize] = id;
                        members.push(w);
                        if w as usize == v {
                            break;
                        }
                    }
                    components.push(members);
                }
                let low_v = lowlink[v];
                frames.pop();
                if let Some(parent) = frames.last() {
                    let p = parent.v as usize;
                    lowlink[p] = lowlink[p].min(low_v);
                }
            }
        }
    }

    let mut internal_edges = vec![0u64; components.len()];
    for &(u, v) in g.edges() {
        let cu = comp_id[u as usize];
        if cu == comp_id[v as usize] {
            internal_edges[cu as usize] += 1;
        }
    }
    SccDecomposition { comp_id, components, internal_edges }
}

// ---------------------------------------------------------------------------
// Classification and census
// ---------------------------------------------------------------------------

/// Structural class of a strongly connected component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentClass {
    /// A single vertex with no self-loop.
    Trivial,
    /// A directed cycle: internal edges equal vertices, every internal
    /// degree is one. A self-loop is a 1-cycle.
    Cycle,
    /// Internal edges exceed vertices.
    Complex,
}

/// Classifies every component of a decomposition.
#[must_use]
pub fn classify(decomp: &SccDecomposition) -> Vec<ComponentClass> {
    decomp
        .components
        .iter()
        .zip(&decomp.internal_edges)
        .map(|(members, &edges)| {
            let s = members.len() as u64;
            if edges < s {
                debug_assert!(s == 1 && edges == 0);
                ComponentClass::Trivial
            } else if edges == s {
                ComponentClass::Cycle
            } else {
                ComponentClass::Complex
            }
        })
        .collect()
}

/// Size-ordered summary of a decomposition.
#[derive(Debug, Clone, Serialize)]
pub struct ComponentCensus {
    /// Number of vertices of the underlying graph.
    pub n: u64,
    /// Component sizes, descending (trivial components count as size 1).
    pub sizes: Vec<u64>,
    /// Class per component, aligned with `sizes`.
    pub classes: Vec<ComponentClass>,
    /// Number of complex components.
    pub complex_count: u64,
    /// Lengths of all cycle components, descending.
    pub cycle_lengths: Vec<u64>,
}

impl ComponentCensus {
    /// Builds the census from a decomposition.
    #[must_use]
    pub fn new(decomp: &SccDecomposition) -> Self {
        let classes_raw = classify(decomp);
        let n: u64 = decomp.components.iter().map(|c| c.len() as u64).sum();
        let mut order: Vec<usize> = (0..decomp.components.len()).collect();
        order.sort_by_key(|&i| std::cmp::Reverse(decomp.components[i].len()));
        let sizes: Vec<u64> = order.iter().map(|&i| decomp.components[i].len() as u64).collect();
        let classes: Vec<ComponentClass> = order.iter().map(|&i| classes_raw[i]).collect();
        let complex_count = classes.iter().filter(|&&c| c == ComponentClass::Complex).count() as u64;
        let mut cycle_lengths: Vec<u64> = sizes
            .iter()
            .zip(&classes)
            .filter(|&(_, &c)| c == ComponentClass::Cycle)
            .map(|(&s, _)| s)
            .collect();
        cycle_lengths.sort_unstable_by(|a, b| b.cmp(a));
        Self { n, sizes, classes, complex_count, cycle_lengths }
    }

    /// Size of the `k`-th largest component (1-indexed); 0 when there are
    /// fewer than `k` components.
    #[must_use]
    pub fn kth_largest(&self, k: usize) -> u64 {
        assert!(k >= 1, "components are 1-indexed");
        self.sizes.get(k - 1).copied().unwrap_or(0)
    }

    /// Number of cycle components with length in `[lo, hi]` (inclusive).
    #[must_use]
    pub fn cycles_in_window(&self, lo: u64, hi: u64) -> u64 {
        self.cycle_lengths.iter().filter(|&&len| lo <= len && len <= hi).count() as u64
    }

    /// Number of cycle components strictly longer than `len`.
    #[must_use]
    pub fn cycles_longer_than(&self, len: u64) -> u64 {
        self.cycle_lengths.iter().filter(|&&l| l > len).count() as u64
    }
}

/// Decomposes and summarizes in one step.
#[must_use]
pub fn census(g: &MultiDigraph) -> ComponentCensus {
    ComponentCensus::new(&decompose(g))
}

// ---------------------------------------------------------------------------
