//! Seeded, reproducible Monte Carlo experiments.
//!
//! An experiment fixes one degree sequence (built from its family spec),
//! draws `trials` independent multigraphs, runs the component census on
//! each, and aggregates the results against the closed-form predictions.
//! Reproducibility contract: every per-trial generator is seeded from
//! `(master seed, trial id)` through SHA-256, so scheduling and worker
//! count cannot influence any trial's stream, and the same config with the
//! same master seed reproduces every record bit for bit at any
//! parallelism width.

pub mod conjecture;
pub mod stats;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::degseq::{build_family, BiDegreeSequence, DegSeqError, DegreeParams, FamilySpec,
    ParamsSummary, DEFAULT_ZETA};
use crate::sampler::{sample_configuration, MultiDigraph, StubLayout};
use crate::scc;
use crate::theory::{self, TheoryError};

pub use conjecture::{
    compare_joint_law, conjecture_limit_sampler, inverse_exponential_integral,
    JointLawComparison, KsRow, DEFAULT_Y_FLOOR,
};
pub use stats::{
    gof_poisson, ks_distance, lag1_autocorrelation, poisson_cdf, poisson_pmf, GofReport,
};

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Family(#[from] DegSeqError),
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("too few samples: {got} (need ≥ {min})")]
    TooFewSamples { got: usize, min: usize },
    #[error("invalid statistic input: {0}")]
    Stats(String),
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

fn default_zeta() -> f64 {
    DEFAULT_ZETA
}

fn default_parallelism() -> usize {
    1
}

/// Full description of one experiment. The JSON form holds exactly these
/// fields; unknown keys are rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Degree-sequence family to instantiate (once per experiment).
    pub family: FamilySpec,
    /// Number of independent multigraph draws.
    pub trials: u64,
    /// Master seed; all per-trial seeds derive from it.
    pub master_seed: u64,
    /// Window scale factors α for the tail and cycle-count statistics.
    pub alphas: Vec<f64>,
    /// Component ranks k to track.
    pub ks: Vec<u32>,
    /// Slack floor in the threshold rule (see the threshold report).
    #[serde(default = "default_zeta")]
    pub zeta: f64,
    /// Override for the medium-cycle threshold g.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_override: Option<u64>,
    /// Override for the exploration cap f.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_override: Option<u64>,
    /// Worker count; results are identical at any width.
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    /// Where to write the per-trial CSV table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials_csv: Option<PathBuf>,
    /// Where to write full per-trial records as JSON lines.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub records_jsonl: Option<PathBuf>,
    /// Where to write the aggregated summary JSON.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary_json: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Checks field-level invariants.
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.trials < 1 {
            return Err(HarnessError::Config("trials must be ≥ 1".into()));
        }
        if self.alphas.is_empty() {
            return Err(HarnessError::Config("need at least one alpha".into()));
        }
        if self.alphas.iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
            return Err(HarnessError::Config(format!(
                "alphas must be positive and finite, got {:?}",
                self.alphas
            )));
        }
        if self.ks.is_empty() || self.ks.iter().any(|&k| k < 1) {
            return Err(HarnessError::Config(format!(
                "component ranks must be ≥ 1, got {:?}",
                self.ks
            )));
        }
        if !(self.zeta > 0.0) || !self.zeta.is_finite() {
            return Err(HarnessError::Config(format!("zeta = {} must be positive", self.zeta)));
        }
        if self.parallelism < 1 {
            return Err(HarnessError::Config("parallelism must be ≥ 1".into()));
        }
        Ok(())
    }

    /// Parses a config from its JSON document form.
    pub fn from_json_str(text: &str) -> Result<Self, HarnessError> {
        let config: Self =
            serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Canonical JSON form.
    #[must_use]
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

/// Census results of a single sampled multigraph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_id: u64,
    /// 64-bit label of the derived per-trial seed (the full 256-bit seed
    /// is recomputable from the master seed and trial id).
    pub seed: u64,
    pub n: u64,
    pub m: u64,
    pub q: f64,
    pub r_minus: f64,
    pub r_plus: f64,
    /// Sizes of the largest components, rank 1 upward (at least 3 ranks).
    pub component_sizes: Vec<u64>,
    /// Number of complex (non-cycle, non-trivial) components.
    pub complex_count: u64,
    /// Lengths of every cycle component, descending.
    pub cycle_lengths: Vec<u64>,
    /// Number of cycle components inside each α window `[⌈α/|Q|⌉, g]`,
    /// aligned with the config's alpha list.
    pub w_alpha: Vec<u64>,
    /// Wall-clock milliseconds for this trial (informational; excluded
    /// from determinism comparisons).
    pub ms: u64,
}

/// Per-(α, k) tail comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub alpha: f64,
    pub k: u32,
    /// Size threshold `⌈α/|Q|⌉` the empirical tail counts against.
    pub threshold: u64,
    /// Fraction of trials with `|C_k| ≥ threshold`.
    pub empirical: f64,
    /// Binomial standard error `√(p̂(1−p̂)/trials)`; absent when the
    /// estimate is degenerate (one trial, or p̂ at 0 or 1).
    pub std_error: Option<f64>,
    /// Limit-law value of the tail.
    pub theory: f64,
    /// `(empirical − theory)/std_error` when the standard error exists.
    pub z_score: Option<f64>,
}

/// Goodness-of-fit of one α window's cycle counts against its Poisson law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowGof {
    pub alpha: f64,
    /// Poisson mean `ξ_α` the window count is compared against.
    pub lambda: f64,
    pub report: GofReport,
}

/// Aggregated experiment results; everything needed to judge the run
/// against the closed-form predictions, and recomputable exactly from the
/// persisted records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub n: u64,
    pub m: u64,
    pub q: f64,
    pub r_minus: f64,
    pub r_plus: f64,
    pub max_degree: u32,
    pub trials: u64,
    /// Medium-cycle threshold in force (override or rule value).
    pub g: u64,
    /// Exploration cap in force (override or rule value).
    pub f: u64,
    pub thresholds: theory::ThresholdReport,
    pub tails: Vec<TailRow>,
    /// Present for every α once the run is large enough to test (≥ 50
    /// trials).
    pub w_gof: Vec<WindowGof>,
    /// Fraction of trials containing any complex component.
    pub complex_fraction: f64,
    /// Closed-form ceiling on the expected count of doubly-excess motifs.
    pub complex_bound_s: f64,
    /// Closed-form ceiling on the expected count of singly-excess motifs.
    pub complex_bound_t: f64,
    /// Fraction of trials with any cycle longer than g.
    pub long_cycle_fraction: f64,
    /// `E₁(|Q|g/2)` ceiling on the probability of such a cycle.
    pub medium_cycle_tail_bound: f64,
    pub mean_c1: f64,
    /// Lag-1 autocorrelation of |C_1| across trials (independence check).
    pub lag1_autocorrelation_c1: Option<f64>,
    /// Informational comparison with the conjectured joint limit law.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conjecture: Option<JointLawComparison>,
}

/// Everything a finished run produces.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub summary: ExperimentSummary,
    pub records: Vec<TrialRecord>,
}

// ---------------------------------------------------------------------------
// Seed derivation
// ---------------------------------------------------------------------------

/// Derives an independent 256-bit seed from the master seed, a domain
/// label, and an index, via SHA-256.
#[must_use]
pub fn derive_seed(master_seed: u64, domain: &str, index: u64) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(master_seed.to_le_bytes());
    hasher.update(domain.as_bytes());
    hasher.update(index.to_le_bytes());
    hasher.finalize().into()
}

fn seed_label(seed: &[u8; 32]) -> u64 {
    u64::from_le_bytes(seed[..8].try_into().expect("eight bytes"))
}

// ---------------------------------------------------------------------------
// Experiment execution
// ---------------------------------------------------------------------------

/// Immutable state shared by all trials of one experiment.
struct ExperimentContext {
    seq: BiDegreeSequence,
    params: ParamsSummary,
    max_degree: u32,
    thresholds: theory::ThresholdReport,
    g: u64,
    f: u64,
    /// Ranks tracked per trial: at least the CSV's three, plus any larger
    /// requested rank.
    kmax: u32,
    /// Per-α window floors `⌈α/|Q|⌉`.
    w_lows: Vec<u64>,
}

fn prepare(config: &ExperimentConfig) -> Result<ExperimentContext, HarnessError> {
    config.validate()?;
    let mut family_rng = ChaCha12Rng::from_seed(derive_seed(config.master_seed, "family", 0));
    let seq = build_family(&config.family, &mut family_rng)?;
    let params = DegreeParams::compute(&seq).summary();
    let thresholds = theory::size_class_thresholds(&params, config.zeta)?;
    let g = config.g_override.unwrap_or(thresholds.g);
    let f = config.f_override.unwrap_or(thresholds.f);
    let kmax = config.ks.iter().copied().max().unwrap_or(1).max(3);
    let w_lows = config
        .alphas
        .iter()
        .map(|&alpha| (alpha / params.q.abs()).ceil().max(1.0) as u64)
        .collect();
    Ok(ExperimentContext {
        max_degree: seq.max_degree(),
        seq,
        params,
        thresholds,
        g,
        f,
        kmax,
        w_lows,
    })
}

fn run_trial(ctx: &ExperimentContext, layout: &StubLayout, master_seed: u64, trial_id: u64) -> TrialRecord {
    let started = Instant::now();
    let seed = derive_seed(master_seed, "trial", trial_id);
    let mut rng = ChaCha12Rng::from_seed(seed);
    let matching = sample_configuration(&ctx.seq, &mut rng);
    let graph = MultiDigraph::from_matching(&ctx.seq, layout, &matching);
    let census = scc::census(&graph);
    let component_sizes: Vec<u64> =
        (1..=ctx.kmax as usize).map(|k| census.kth_largest(k)).collect();
    let w_alpha: Vec<u64> =
        ctx.w_lows.iter().map(|&lo| census.cycles_in_window(lo, ctx.g)).collect();
    TrialRecord {
        trial_id,
        seed: seed_label(&seed),
        n: ctx.params.n,
        m: ctx.params.m,
        q: ctx.params.q,
        r_minus: ctx.params.r_minus,
        r_plus: ctx.params.r_plus,
        component_sizes,
        complex_count: census.complex_count,
        cycle_lengths: census.cycle_lengths,
        w_alpha,
        ms: started.elapsed().as_millis() as u64,
    }
}

/// Runs the configured experiment: builds the family once, draws and
/// censuses `trials` multigraphs (in parallel at the configured width),
/// aggregates the summary, and writes any configured output files.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput, HarnessError> {
    let ctx = prepare(config)?;
    let layout = StubLayout::new(&ctx.seq);
    let records: Vec<TrialRecord> = if config.parallelism == 1 {
        (0..config.trials).map(|id| run_trial(&ctx, &layout, config.master_seed, id)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.parallelism)
            .build()
            .map_err(|e| HarnessError::Config(format!("worker pool: {e}")))?;
        pool.install(|| {
            (0..config.trials)
                .into_par_iter()
                .map(|id| run_trial(&ctx, &layout, config.master_seed, id))
                .collect()
        })
    };
    let summary = summarize_with(&ctx, config, &records)?;

    if let Some(path) = &config.trials_csv {
        write_file(path, &trials_csv_string(&records, config.alphas.len()))?;
    }
    if let Some(path) = &config.records_jsonl {
        write_file(path, &records_jsonl_string(&records))?;
    }
    if let Some(path) = &config.summary_json {
        let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
        write_file(path, &json)?;
    }
    Ok(ExperimentOutput { summary, records })
}

/// Recomputes the aggregate summary from persisted records; with the
/// original config this reproduces `run_experiment`'s summary exactly.
pub fn summarize(
    config: &ExperimentConfig,
    records: &[TrialRecord],
) -> Result<ExperimentSummary, HarnessError> {
    let ctx = prepare(config)?;
    summarize_with(&ctx, config, records)
}

fn summarize_with(
    ctx: &ExperimentContext,
    config: &ExperimentConfig,
    records: &[TrialRecord],
) -> Result<ExperimentSummary, HarnessError> {
    if records.is_empty() {
        return Err(HarnessError::Stats("no trial records to summarize".into()));
    }
    let trials = records.len() as u64;
    let n_f = trials as f64;
    let q_abs = ctx.params.q.abs();

    let mut tails = Vec::with_capacity(config.alphas.len() * config.ks.len());
    for &alpha in &config.alphas {
        let threshold = (alpha / q_abs).ceil().max(1.0) as u64;
        for &k in &config.ks {
            let hits = records
                .iter()
                .filter(|r| r.component_sizes.get(k as usize - 1).copied().unwrap_or(0) >= threshold)
                .count();
            let empirical = hits as f64 / n_f;
            let theory_value = theory::kth_largest_tail(alpha, k)?;
            let variance = empirical * (1.0 - empirical);
            let std_error =
                (trials >= 2 && variance > 0.0).then(|| (variance / n_f).sqrt());
            let z_score = std_error.map(|se| (empirical - theory_value) / se);
            tails.push(TailRow {
                alpha,
                k,
                threshold,
                empirical,
                std_error,
                theory: theory_value,
                z_score,
            });
        }
    }

    let mut w_gof = Vec::new();
    if records.len() >= stats::MIN_GOF_SAMPLES {
        for (idx, &alpha) in config.alphas.iter().enumerate() {
            let samples: Vec<u64> =
                records.iter().map(|r| r.w_alpha.get(idx).copied().unwrap_or(0)).collect();
            let lambda = theory::xi_alpha(alpha)?;
            w_gof.push(WindowGof { alpha, lambda, report: gof_poisson(&samples, lambda)? });
        }
    }

    let complex_fraction =
        records.iter().filter(|r| r.complex_count > 0).count() as f64 / n_f;
    let complex_bounds = theory::complex_motif_expectation_bounds(
        ctx.params.q,
        ctx.params.r_minus,
        ctx.params.r_plus,
        ctx.max_degree,
        ctx.params.m,
    )?;
    let long_cycle_fraction = records
        .iter()
        .filter(|r| r.cycle_lengths.first().copied().unwrap_or(0) > ctx.g)
        .count() as f64
        / n_f;
    let medium_cycle_tail_bound = theory::medium_cycle_tail_bound(ctx.g, ctx.params.q)?;

    let c1: Vec<f64> = records
        .iter()
        .map(|r| r.component_sizes.first().copied().unwrap_or(0) as f64)
        .collect();
    let mean_c1 = c1.iter().sum::<f64>() / n_f;

    Ok(ExperimentSummary {
        n: ctx.params.n,
        m: ctx.params.m,
        q: ctx.params.q,
        r_minus: ctx.params.r_minus,
        r_plus: ctx.params.r_plus,
        max_degree: ctx.max_degree,
        trials,
        g: ctx.g,
        f: ctx.f,
        thresholds: ctx.thresholds.clone(),
        tails,
        w_gof,
        complex_fraction,
        complex_bound_s: complex_bounds.bound_s,
        complex_bound_t: complex_bounds.bound_t,
        long_cycle_fraction,
        medium_cycle_tail_bound,
        mean_c1,
        lag1_autocorrelation_c1: lag1_autocorrelation(&c1),
        conjecture: None,
    })
}

/// Draws limit-law samples and attaches the joint-law comparison to a
/// summary. The comparison RNG derives from the master seed, so reruns
/// reproduce it.
pub fn attach_conjecture_comparison(
    config: &ExperimentConfig,
    summary: &mut ExperimentSummary,
    records: &[TrialRecord],
    draws: usize,
) -> Result<(), HarnessError> {
    let mut rng = ChaCha12Rng::from_seed(derive_seed(config.master_seed, "conjecture", 0));
    let samples = conjecture_limit_sampler(draws, DEFAULT_Y_FLOOR, &mut rng)?;
    summary.conjecture = Some(compare_joint_law(records, &samples, &config.ks, &mut rng)?);
    Ok(())
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

/// The per-trial CSV table: `trial_id, seed, n, m, Q, R_minus, R_plus,
/// c1, c2, c3, n_complex, w_alpha_<idx>…, ms`.
#[must_use]
pub fn trials_csv_string(records: &[TrialRecord], n_alphas: usize) -> String {
    let mut out = String::from("trial_id,seed,n,m,Q,R_minus,R_plus,c1,c2,c3,n_complex");
    for idx in 0..n_alphas {
        let _ = write!(out, ",w_alpha_{idx}");
    }
    out.push_str(",ms\n");
    for r in records {
        let _ = write!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.trial_id,
            r.seed,
            r.n,
            r.m,
            r.q,
            r.r_minus,
            r.r_plus,
            r.component_sizes.first().copied().unwrap_or(0),
            r.component_sizes.get(1).copied().unwrap_or(0),
            r.component_sizes.get(2).copied().unwrap_or(0),
            r.complex_count,
        );
        for idx in 0..n_alphas {
            let _ = write!(out, ",{}", r.w_alpha.get(idx).copied().unwrap_or(0));
        }
        let _ = writeln!(out, ",{}", r.ms);
    }
    out
}

/// Full-fidelity records as JSON lines (one record per line).
#[must_use]
pub fn records_jsonl_string(records: &[TrialRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    out
}

/// Parses records back from their JSON-lines form.
pub fn parse_records_jsonl(text: &str) -> Result<Vec<TrialRecord>, HarnessError> {
    text.lines()
        .filter(|line| !line.trim().is_empty())
        .map(|line| {
            serde_json::from_str(line)
                .map_err(|e| HarnessError::Stats(format!("bad record line: {e}")))
        })
        .collect()
}

fn write_file(path: &Path, content: &str) -> Result<(), HarnessError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .map_err(|e| HarnessError::Io { path: parent.to_path_buf(), source: e })?;
        }
    }
    fs::write(path, content).map_err(|e| HarnessError::Io { path: path.to_path_buf(), source: e })
}

// ---------------------------------------------------------------------------
// Size sweep
// ---------------------------------------------------------------------------

/// One row of an n-scaling sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: u64,
    pub trials: u64,
    pub complex_fraction: f64,
    pub long_cycle_fraction: f64,
    pub complex_bound_s: f64,
    pub complex_bound_t: f64,
}

/// Reruns the experiment at each requested size (same family shape, same
/// master seed, no file output) and reports how the complex-component and
/// long-cycle frequencies scale.
pub fn run_n_sweep(
    base: &ExperimentConfig,
    ns: &[u64],
    trials: u64,
) -> Result<Vec<SweepRow>, HarnessError> {
    if ns.is_empty() {
        return Err(HarnessError::Config("sweep needs at least one size".into()));
    }
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let mut config = base.clone();
        config.family.n = n;
        config.trials = trials;
        config.trials_csv = None;
        config.records_jsonl = None;
        config.summary_json = None;
        let output = run_experiment(&config)?;
        rows.push(SweepRow {
            n,
            trials,
            complex_fraction: output.summary.complex_fraction,
            long_cycle_fraction: output.summary.long_cycle_fraction,
            complex_bound_s: output.summary.complex_bound_s,
            complex_bound_t: output.summary.complex_bound_t,
        });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degseq::FamilyKind;

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            family: FamilySpec {
                kind: FamilyKind::Mix,
                n: 2000,
                target_q: -0.1,
                mix_b_share: None,
                poisson_rate: None,
            },
            trials: 120,
            master_seed: 7,
            alphas: vec![1.0],
            ks: vec![1, 2],
            zeta: 0.1,
            g_override: None,
            f_override: None,
            parallelism: 1,
            trials_csv: None,
            records_jsonl: None,
            summary_json: None,
        }
    }

    #[test]
    fn config_json_round_trip_and_unknown_key_rejection() {
        let config = small_config();
        let json = config.to_json_string();
        let back = ExperimentConfig::from_json_str(&json).unwrap();
        assert_eq!(back.to_json_string(), json);

        let with_unknown = json.replacen('{', "{\n  \"surprise\": 1,", 1);
        let err = ExperimentConfig::from_json_str(&with_unknown).unwrap_err();
        assert!(matches!(err, HarnessError::Config(_)));

        let mut bad = small_config();
        bad.alphas = vec![-1.0];
        assert!(bad.validate().is_err());
        bad = small_config();
        bad.ks = vec![0];
        assert!(bad.validate().is_err());
        bad = small_config();
        bad.trials = 0;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn identical_runs_at_any_parallelism() {
        let serial = run_experiment(&small_config()).unwrap();
        let mut wide_config = small_config();
        wide_config.parallelism = 8;
        let wide = run_experiment(&wide_config).unwrap();
        // Wall-clock ms is the one field allowed to differ between runs.
        let strip_ms = |records: &[TrialRecord]| -> Vec<TrialRecord> {
            records.iter().map(|r| TrialRecord { ms: 0, ..r.clone() }).collect()
        };
        assert_eq!(strip_ms(&serial.records), strip_ms(&wide.records));
        assert_eq!(
            trials_csv_string(&serial.records, 1).lines().count(),
            121 // header + one line per trial
        );
        // CSV bytes agree except the wall-time field.
        let mask_ms = |csv: &str| {
            csv.lines()
                .map(|line| line.rsplit_once(',').map(|(head, _)| head.to_owned()).unwrap())
                .collect::<Vec<String>>()
        };
        assert_eq!(
            mask_ms(&trials_csv_string(&serial.records, 1)),
            mask_ms(&trials_csv_string(&wide.records, 1))
        );
    }

    #[test]
    fn summary_replays_from_persisted_records() {
        let config = small_config();
        let output = run_experiment(&config).unwrap();
        let jsonl = records_jsonl_string(&output.records);
        let parsed = parse_records_jsonl(&jsonl).unwrap();
        assert_eq!(parsed, output.records);
        let replayed = summarize(&config, &parsed).unwrap();
        assert_eq!(replayed, output.summary);
    }

    #[test]
    fn csv_layout_matches_the_contract() {
        let output = run_experiment(&small_config()).unwrap();
        let csv = trials_csv_string(&output.records, 1);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "trial_id,seed,n,m,Q,R_minus,R_plus,c1,c2,c3,n_complex,w_alpha_0,ms"
        );
        let first = lines.next().unwrap();
        let fields: Vec<&str> = first.split(',').collect();
        assert_eq!(fields.len(), 13);
        assert_eq!(fields[0], "0");
        // c1 ≥ c2 ≥ c3 in every row.
        for line in csv.lines().skip(1) {
            let f: Vec<&str> = line.split(',').collect();
            let c1: u64 = f[7].parse().unwrap();
            let c2: u64 = f[8].parse().unwrap();
            let c3: u64 = f[9].parse().unwrap();
            assert!(c1 >= c2 && c2 >= c3);
        }
    }

    #[test]
    fn summary_fields_are_consistent() {
        let config = small_config();
        let output = run_experiment(&config).unwrap();
        let summary = &output.summary;
        assert_eq!(summary.trials, 120);
        assert_eq!(summary.tails.len(), 2);
        for row in &summary.tails {
            assert!((0.0..=1.0).contains(&row.empirical));
            assert!(row.theory > 0.0 && row.theory < 1.0);
            assert_eq!(row.threshold, (row.alpha / summary.q.abs()).ceil() as u64);
        }
        assert_eq!(summary.w_gof.len(), 1);
        assert!((0.0..=1.0).contains(&summary.complex_fraction));
        assert!((0.0..=1.0).contains(&summary.long_cycle_fraction));
        assert!(summary.mean_c1 >= 1.0);
        // 120 trials: the independence diagnostic is defined.
        let rho = summary.lag1_autocorrelation_c1.expect("variance present");
        assert!(rho.abs() < 3.0 / (120.0_f64).sqrt() + 0.15, "rho = {rho}");
    }

    #[test]
    fn single_trial_summary_is_degenerate_but_well_formed() {
        let mut config = small_config();
        config.trials = 1;
        let output = run_experiment(&config).unwrap();
        for row in &output.summary.tails {
            assert!(row.std_error.is_none());
            assert!(row.z_score.is_none());
        }
        assert!(output.summary.w_gof.is_empty());
        assert!(output.summary.lag1_autocorrelation_c1.is_none());
    }

    #[test]
    fn experiment_writes_all_configured_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = small_config();
        config.trials = 60;
        config.trials_csv = Some(dir.path().join("out/trials.csv"));
        config.records_jsonl = Some(dir.path().join("out/records.jsonl"));
        config.summary_json = Some(dir.path().join("out/summary.json"));
        let output = run_experiment(&config).unwrap();

        let csv = std::fs::read_to_string(config.trials_csv.as_ref().unwrap()).unwrap();
        assert_eq!(csv, trials_csv_string(&output.records, 1));
        let jsonl = std::fs::read_to_string(config.records_jsonl.as_ref().unwrap()).unwrap();
        assert_eq!(parse_records_jsonl(&jsonl).unwrap(), output.records);
        let summary_text =
            std::fs::read_to_string(config.summary_json.as_ref().unwrap()).unwrap();
        let summary: ExperimentSummary = serde_json::from_str(&summary_text).unwrap();
        assert_eq!(summary, output.summary);
    }

    #[test]
    fn seed_derivation_separates_domains_and_indices() {
        let a = derive_seed(1, "trial", 0);
        let b = derive_seed(1, "trial", 1);
        let c = derive_seed(1, "family", 0);
        let d = derive_seed(2, "trial", 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
        assert_eq!(a, derive_seed(1, "trial", 0));
    }

    #[test]
    fn sweep_reports_scaling_rows() {
        let config = small_config();
        let rows = run_n_sweep(&config, &[1000, 2000], 40).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].n, 1000);
        assert_eq!(rows[1].n, 2000);
        for row in &rows {
            assert!((0.0..=1.0).contains(&row.complex_fraction));
            assert!(row.complex_bound_s > 0.0);
        }
        assert!(run_n_sweep(&config, &[], 10).is_err());
    }

    #[test]
    fn conjecture_comparison_attaches_deterministically() {
        let config = small_config();
        let output = run_experiment(&config).unwrap();
        let mut summary_a = output.summary.clone();
        attach_conjecture_comparison(&config, &mut summary_a, &output.records, 300).unwrap();
        let mut summary_b = output.summary.clone();
        attach_conjecture_comparison(&config, &mut summary_b, &output.records, 300).unwrap();
        assert_eq!(summary_a, summary_b);
        let cmp = summary_a.conjecture.as_ref().unwrap();
        assert_eq!(cmp.per_k.len(), 2);
        for row in &cmp.per_k {
            assert!(row.ks_ci_low <= row.ks && row.ks <= row.ks_ci_high.max(row.ks));
            assert!((0.0..=1.0).contains(&row.ks));
        }
        assert!(cmp.energy_2d.is_some());
    }
}
