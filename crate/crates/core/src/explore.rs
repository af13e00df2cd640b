//! Out-component exploration of the configuration model.
//!
//! The matching is revealed one stub pair per step. Starting from vertex
//! `v`, the explored set `C_t` initially holds `v` and the walker tracks
//! `Y_t`, the number of unmatched out-stubs owned by `C_t` (`Y_0 = d_out(v)`).
//! Each step takes one unmatched out-stub of `C_t` and matches it to a
//! uniformly random unmatched in-stub. If the in-stub's owner `u` is new,
//! `u` joins and `Y` changes by `d_out(u) − 1`; if it is a revisit (including
//! self-matches), `Y` drops by one.
//!
//! Alongside `Y` the process tracks `D_t = Y_t + Σ_{u ∉ C_t} d_out(u)` (the
//! number of unmatched stubs on either side, so `D_t = m − t`) and the
//! one-step drift `Q_t = (Σ_{u ∉ C_t} d_in(u) d_out(u)) / D_t − 1`, which is
//! exactly `E(Y_{t+1} − Y_t | C_t)`.
//!
//! The process stops when absorbed (`Y = 0`), when a step cap is hit, or
//! when the drift rises to a configured floor.

use std::collections::VecDeque;

use rand::Rng;
use serde::Serialize;

use crate::degseq::BiDegreeSequence;
use crate::sampler::StubLayout;

// ---------------------------------------------------------------------------
// Process state
// ---------------------------------------------------------------------------

/// Which unmatched out-stub of the explored set is consumed next. The law
/// of the process does not depend on this choice; it is configurable so the
/// invariance can be tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StubOrder {
    /// Oldest frontier stub first.
    #[default]
    Fifo,
    /// Newest frontier stub first.
    Lifo,
}

/// Why an exploration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// `Y` hit zero: the out-component is fully explored.
    Absorbed,
    /// The step cap was reached with `Y > 0`.
    Capped,
    /// The drift `Q_t` rose to the configured floor.
    DriftBreached,
}

/// What a single step revealed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepEvent {
    /// The matched in-stub belonged to a vertex outside `C_t`, which joined.
    Discovered(u32),
    /// The matched in-stub belonged to a vertex already in `C_t`.
    Revisit(u32),
}

/// Post-step snapshot: state after step `t`.
#[derive(Debug, Clone)]
pub struct StepRecord {
    pub t: u64,
    /// Unmatched out-stubs owned by the explored set.
    pub y: u64,
    /// Unmatched stubs on either side (`m − t`).
    pub d: u64,
    /// `Σ_{u ∉ C_t} d_in(u) d_out(u)`, the drift numerator.
    pub drift_num: u128,
    pub event: StepEvent,
}

impl StepRecord {
    /// Drift `Q_t = drift_num / D_t − 1`; `NaN` once `D_t = 0`.
    #[must_use]
    pub fn q(&self) -> f64 {
        if self.d == 0 {
            f64::NAN
        } else {
            self.drift_num as f64 / self.d as f64 - 1.0
        }
    }
}

/// In-flight exploration state, advanced one revealed stub pair at a time.
#[derive(Debug, Clone)]
pub struct Exploration<'a> {
    seq: &'a BiDegreeSequence,
    layout: &'a StubLayout,
    order: StubOrder,
    /// Unmatched in-stub ids, in swap-remove order.
    in_pool: Vec<u64>,
    /// Position of each in-stub inside `in_pool` (u64::MAX once matched).
    in_pos: Vec<u64>,
    /// Unmatched out-stubs owned by the explored set.
    frontier: VecDeque<u64>,
    in_explored: Vec<bool>,
    explored: Vec<u32>,
    /// Revealed (out-stub, in-stub) pairs in step order.
    matched: Vec<(u64, u64)>,
    t: u64,
    /// `Σ_{u ∉ C_t} d_out(u)`.
    outside_dout: u64,
    /// `Σ_{u ∉ C_t} d_in(u) d_out(u)`.
    outside_dd: u128,
}

impl<'a> Exploration<'a> {
    /// Starts an exploration at `start`.
    #[must_use]
    pub fn new(
        seq: &'a BiDegreeSequence,
        layout: &'a StubLayout,
        start: usize,
        order: StubOrder,
    ) -> Self {
        assert!(start < seq.n(), "start vertex {start} out of range");
        let m = seq.m();
        let mut outside_dout: u64 = 0;
        let mut outside_dd: u128 = 0;
        for &(d_in, d_out) in seq.pairs() {
            outside_dout += u64::from(d_out);
            outside_dd += u128::from(d_in) * u128::from(d_out);
        }
        outside_dout -= u64::from(seq.d_out(start));
        outside_dd -= u128::from(seq.d_in(start)) * u128::from(seq.d_out(start));

        let mut state = Self {
            seq,
            layout,
            order,
            in_pool: (0..m).collect(),
            in_pos: (0..m).collect(),
            frontier: (layout.out_start(start)..layout.out_start(start + 1)).collect(),
            in_explored: vec![false; seq.n()],
            explored: vec![start as u32],
            matched: Vec::new(),
            t: 0,
            outside_dout,
            outside_dd,
        };
        state.in_explored[start] = true;
        state
    }

    /// `Y_t`: unmatched out-stubs owned by the explored set.
    #[must_use]
    pub fn y(&self) -> u64 {
        self.frontier.len() as u64
    }

    /// `D_t`: unmatched stubs on either side.
    #[must_use]
    pub fn d(&self) -> u64 {
        self.in_pool.len() as u64
    }

    #[must_use]
    pub fn t(&self) -> u64 {
        self.t
    }

    /// Drift `Q_t`; `NaN` once every stub is matched.
    #[must_use]
    pub fn q(&self) -> f64 {
        if self.in_pool.is_empty() {
            f64::NAN
        } else {
            self.outside_dd as f64 / self.in_pool.len() as f64 - 1.0
        }
    }

    /// Explored vertices in discovery order.
    #[must_use]
    pub fn explored(&self) -> &[u32] {
        &self.explored
    }

    /// Revealed stub pairs in step order.
    #[must_use]
    pub fn matched(&self) -> &[(u64, u64)] {
        &self.matched
    }

    /// Samples the one-step increment of `Y` without advancing the state:
    /// draws a uniformly random unmatched in-stub and reports `d_out(u) − 1`
    /// if its owner `u` is unexplored, else `−1`.
    pub fn peek_increment<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        let in_stub = self.in_pool[rng.gen_range(0..self.in_pool.len())];
        let owner = self.layout.in_owner(in_stub) as usize;
        if self.in_explored[owner] {
            -1
        } else {
            i64::from(self.seq.d_out(owner)) - 1
        }
    }

    /// Advances one step. Panics if `Y = 0` (callers check first).
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> StepRecord {
        let out_stub = match self.order {
            StubOrder::Fifo => self.frontier.pop_front(),
            StubOrder::Lifo => self.frontier.pop_back(),
        }
        .expect("step on absorbed exploration");

        // Draw a uniform unmatched in-stub by swap-remove.
        let idx = rng.gen_range(0..self.in_pool.len());
        let in_stub = self.in_pool.swap_remove(idx);
        self.in_pos[in_stub as usize] = u64::MAX;
        if let Some(&moved) = self.in_pool.get(idx) {
            self.in_pos[moved as usize] = idx as u64;
        }
        self.matched.push((out_stub, in_stub));
        self.t += 1;

        let owner = self.layout.in_owner(in_stub) as usize;
        let event = if self.in_explored[owner] {
            StepEvent::Revisit(owner as u32)
        } else {
            self.in_explored[owner] = true;
            self.explored.push(owner as u32);
            self.outside_dout -= u64::from(self.seq.d_out(owner));
            self.outside_dd -=
                u128::from(self.seq.d_in(owner)) * u128::from(self.seq.d_out(owner));
            for s in self.layout.out_start(owner)..self.layout.out_start(owner + 1) {
                self.frontier.push_back(s);
            }
            StepEvent::Discovered(owner as u32)
        };

        // Stub conservation: D_t = Y_t + Σ_{u ∉ C_t} d_out(u) = m − t.
        let d = self.in_pool.len() as u64;
        assert_eq!(d, self.y() + self.outside_dout, "unmatched stub accounting broke");
        assert_eq!(d, self.seq.m() - self.t, "D_t must equal m − t");

        StepRecord { t: self.t, y: self.y(), d, drift_num: self.outside_dd, event }
    }
}

// ---------------------------------------------------------------------------
// Driving the process
// ---------------------------------------------------------------------------

/// A completed (stopped) exploration.
#[derive(Debug, Clone)]
pub struct ExplorationTrace {
    pub start: u32,
    /// `Y_0 = d_out(start)`.
    pub y0: u64,
    /// Post-step snapshots, one per step.
    pub records: Vec<StepRecord>,
    pub stop: StopReason,
    /// Explored vertices in discovery order.
    pub explored: Vec<u32>,
    /// Revealed stub pairs in step order.
    pub matched: Vec<(u64, u64)>,
}

impl ExplorationTrace {
    /// Number of steps taken.
    #[must_use]
    pub fn tau(&self) -> u64 {
        self.records.len() as u64
    }

    /// Trace CSV: `t,Y,D,Q,event` with one row per step, `event` being
    /// `discover:<v>` or `revisit:<v>`.
    #[must_use]
    pub fn to_csv_string(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::from("t,Y,D,Q,event\n");
        for r in &self.records {
            let event = match r.event {
                StepEvent::Discovered(v) => format!("discover:{v}"),
                StepEvent::Revisit(v) => format!("revisit:{v}"),
            };
            let _ = writeln!(out, "{},{},{},{},{}", r.t, r.y, r.d, r.q(), event);
        }
        out
    }
}

/// Runs an exploration from `start` until absorption, a step cap, or a
/// drift floor (`Q_t ≥ drift_floor` checked after each step).
pub fn explore_out_component<R: Rng + ?Sized>(
    seq: &BiDegreeSequence,
    layout: &StubLayout,
    start: usize,
    rng: &mut R,
    step_cap: u64,
    drift_floor: Option<f64>,
    order: StubOrder,
) -> ExplorationTrace {
    let mut state = Exploration::new(seq, layout, start, order);
    let y0 = state.y();
    let mut records = Vec::new();
    let stop = loop {
        if state.y() == 0 {
            break StopReason::Absorbed;
        }
        if state.t() >= step_cap {
            break StopReason::Capped;
        }
        let record = state.step(rng);
        let q = record.q();
        records.push(record);
        if state.y() == 0 {
            break StopReason::Absorbed;
        }
        if let Some(floor) = drift_floor {
            if q.is_finite() && q >= floor {
                break StopReason::DriftBreached;
            }
        }
    };
    ExplorationTrace {
        start: start as u32,
        y0,
        records,
        stop,
        explored: state.explored.clone(),
        matched: state.matched.clone(),
    }
}

// ---------------------------------------------------------------------------
// Survey
// ---------------------------------------------------------------------------

/// Aggregate outcome of many explorations from random start vertices.
#[derive(Debug, Clone, Serialize)]
pub struct ComponentSurvey {
    pub samples: u64,
    pub absorbed: u64,
    pub capped: u64,
    pub drift_breached: u64,
    /// Mean stopped step count.
    pub mean_tau: f64,
    /// Mean out-degree of the sampled start vertices.
    pub mean_start_dout: f64,
    /// Mean of `2 d_out(start) / |Q|` over the sampled starts — the
    /// optional-stopping bound on `E(τ)`; `None` when `Q ≥ 0`.
    pub mean_tau_bound: Option<f64>,
    /// Markov bound on the capped fraction, `mean_tau_bound / f_cap`.
    pub capped_fraction_bound: Option<f64>,
}

/// Explores from `sample_size` uniform start vertices with step cap `f_cap`
/// and (for subcritical sequences) drift floor `−|Q|/2`, and tallies the
/// stop reasons against the stopped-walk bounds.
pub fn largest_out_component_survey<R: Rng + ?Sized>(
    seq: &BiDegreeSequence,
    rng: &mut R,
    f_cap: u64,
    sample_size: u64,
) -> ComponentSurvey {
    let layout = StubLayout::new(seq);
    let q = crate::degseq::DegreeParams::compute(seq).q();
    let drift_floor = if q < 0.0 { Some(q / 2.0) } else { None };
    let mut absorbed = 0u64;
    let mut capped = 0u64;
    let mut drift_breached = 0u64;
    let mut tau_sum = 0u64;
    let mut dout_sum = 0u64;
    for _ in 0..sample_size {
        let start = rng.gen_range(0..seq.n());
        let trace =
            explore_out_component(seq, &layout, start, rng, f_cap, drift_floor, StubOrder::Fifo);
        match trace.stop {
            StopReason::Absorbed => absorbed += 1,
            StopReason::Capped => capped += 1,
            StopReason::DriftBreached => drift_breached += 1,
        }
        tau_sum += trace.tau();
        dout_sum += u64::from(seq.d_out(start));
    }
    let mean_start_dout = dout_sum as f64 / sample_size as f64;
    let mean_tau_bound = (q < 0.0).then(|| 2.0 * mean_start_dout / q.abs());
    ComponentSurvey {
        samples: sample_size,
        absorbed,
        capped,
        drift_breached,
        mean_tau: tau_sum as f64 / sample_size as f64,
        mean_start_dout,
        mean_tau_bound,
        capped_fraction_bound: mean_tau_bound.map(|b| b / f_cap as f64),
    }
}

// ---------------------------------------------------------------------------
