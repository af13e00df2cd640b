//! Simulation laboratory for the directed configuration model.
//!
//! A bi-degree sequence assigns every vertex an in-degree and an out-degree
//! (with equal totals `m`); the directed configuration model draws a uniform
//! perfect matching of the `m` in-stubs to the `m` out-stubs and reads the
//! result as a multi-digraph. This crate provides:
//!
//! - [`degseq`]: bi-degree sequences, their moment parameters (Q, R⁻, R⁺,
//!   factorial moments), regularity-condition checks, and two parametric
//!   sequence families for experiments;
//! - [`sampler`]: uniform stub-matching samplers, the preheart sampler for
//!   graphs of minimum semi-degree one, and matching surgery that conditions
//!   on forced stub pairs;
//! - [`scc`]: iterative strongly-connected-component decomposition and a
//!   census that classifies components as trivial / cycle / complex;
//! - [`explore`]: the stub-by-stub out-component exploration process with its
//!   drift statistics;
//! - [`theory`]: closed-form predictions and bounds (ξ_α, k-th largest
//!   component tails, subgraph probability bounds, cycle-count bounds,
//!   size-class thresholds);
//! - [`oracle`]: exact brute-force ground truth at toy scale (full matching
//!   enumeration, strongly connected counts, cycle enumeration, switching
//!   coupling checks) in exact rational arithmetic;
//! - [`harness`]: seeded, reproducible Monte Carlo experiments with CSV/JSON
//!   persistence, goodness-of-fit statistics, and the limiting-law sampler.

pub mod degseq;
pub mod explore;
pub mod harness;
pub mod oracle;
pub mod sampler;
pub mod scc;
pub mod theory;

pub use degseq::BiDegreeSequence;
pub use sampler::MultiDigraph;
