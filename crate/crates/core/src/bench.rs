//! Random irreducible instances and the benchmark harness.
//!
//! Instance `i` of pair `(n, m)` is drawn from a ChaCha8 generator seeded
//! with the run seed, on stream `(n << 48) | (m << 32) | i`, so every
//! instance is reproducible on its own and shared by all algorithm columns.

use std::io::Write;
use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dbm::{Bound, Dbm};
use crate::maxplus::{is_irreducible, transient_cyclicity, MaxPlusMatrix, MaxPlusScalar, DEFAULT_POWER_CAP};
use crate::num::rat;
use crate::reach::{run_variant, ReachError, ReachOptions, ReachSpec, Variant};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BenchError {
    #[error("need 1 <= m <= n, got n = {n}, m = {m}")]
    BadShape { n: usize, m: usize },
    #[error("value range {lo}..={hi} is empty")]
    BadRange { lo: i64, hi: i64 },
    #[error("no irreducible matrix after {attempts} attempts")]
    GenerationCap { attempts: usize },
    #[error("profile {profile} needs n >= {min}, got {n}")]
    ProfileDimension { profile: &'static str, min: usize, n: usize },
    #[error("csv output: {0}")]
    Output(String),
}

const MAX_ATTEMPTS: usize = 100_000;

/// Random matrix with exactly `m` finite entries per row, rejected until
/// its precedence graph is strongly connected.
pub fn gen_irreducible(
    n: usize,
    m: usize,
    range: (i64, i64),
    rng: &mut impl Rng,
) -> Result<MaxPlusMatrix, BenchError> {
    if m == 0 || m > n {
        return Err(BenchError::BadShape { n, m });
    }
    let (lo, hi) = range;
    if lo > hi {
        return Err(BenchError::BadRange { lo, hi });
    }
    for _ in 0..MAX_ATTEMPTS {
        let mut rows = vec![vec![MaxPlusScalar::Eps; n]; n];
        for row in rows.iter_mut() {
            for j in sample(rng, n, m) {
                row[j] = MaxPlusScalar::Fin(rat(rng.gen_range(lo..=hi)));
            }
        }
        let a = MaxPlusMatrix::from_rows(rows).expect("square by construction");
        if is_irreducible(&a) {
            return Ok(a);
        }
    }
    Err(BenchError::GenerationCap {
        attempts: MAX_ATTEMPTS,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SetProfile {
    /// Chains over the first five variables.
    Fixed5,
    /// Chains over the first `floor(n/2)` variables.
    Half,
}

impl SetProfile {
    pub fn name(&self) -> &'static str {
        match self {
            SetProfile::Fixed5 => "fixed5",
            SetProfile::Half => "half",
        }
    }

    pub fn parse(s: &str) -> Option<SetProfile> {
        match s {
            "fixed5" => Some(SetProfile::Fixed5),
            "half" => Some(SetProfile::Half),
            _ => None,
        }
    }

    /// Chain length for dimension `n`.
    pub fn chain_len(&self, n: usize) -> Result<usize, BenchError> {
        let (min, p) = match self {
            SetProfile::Fixed5 => (5, 5),
            SetProfile::Half => (2, n / 2),
        };
        if n < min {
            return Err(BenchError::ProfileDimension {
                profile: self.name(),
                min,
                n,
            });
        }
        Ok(p)
    }
}

/// `X = {x1 ≥ … ≥ xp}` and `Y = {x1 ≤ … ≤ xp}`.
pub fn standard_sets(n: usize, profile: SetProfile) -> Result<(Dbm, Dbm), BenchError> {
    let p = profile.chain_len(n)?;
    let mut x = Dbm::universe(n);
    let mut y = Dbm::universe(n);
    for i in 1..p {
        // x_{i+1} − x_i ≤ 0 and x_i − x_{i+1} ≤ 0
        x.constrain(i + 1, i, Bound::le(rat(0)));
        y.constrain(i, i + 1, Bound::le(rat(0)));
    }
    Ok((x, y))
}

/// Generator for instance `index` of pair `(n, m)`.
pub fn instance_rng(seed: u64, n: usize, m: usize, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((n as u64) << 48) | ((m as u64) << 32) | index as u64);
    rng
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchConfig {
    pub pairs: Vec<(usize, usize)>,
    pub instances_per_pair: usize,
    pub value_range: (i64, i64),
    pub seed: u64,
    /// Upper limit on the per-instance horizon.
    pub horizon_cap: usize,
    /// Fixed horizon instead of the completeness threshold.
    pub horizon: Option<usize>,
    pub profile: SetProfile,
    pub algorithms: Vec<usize>,
    #[serde(skip)]
    pub timeout: Option<Duration>,
    #[serde(skip)]
    pub parallel: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            pairs: vec![(8, 8)],
            instances_per_pair: 20,
            value_range: (1, 20),
            seed: 1,
            horizon_cap: 200,
            horizon: None,
            profile: SetProfile::Fixed5,
            algorithms: (1..=8).collect(),
            timeout: None,
            parallel: true,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        for &(n, m) in &self.pairs {
            if m == 0 || m > n {
                return Err(BenchError::BadShape { n, m });
            }
            self.profile.chain_len(n)?;
        }
        let (lo, hi) = self.value_range;
        if lo > hi {
            return Err(BenchError::BadRange { lo, hi });
        }
        Ok(())
    }
}

/// One algorithm on one instance.
#[derive(Debug, Clone, Serialize)]
pub struct RunOutcome {
    pub algorithm: usize,
    pub reachable: Option<bool>,
    pub step: Option<usize>,
    pub seconds: f64,
    pub timed_out: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InstanceResult {
    pub index: usize,
    pub matrix: String,
    /// Completeness threshold, when the power sequence became periodic.
    pub threshold: Option<usize>,
    pub horizon: usize,
    pub runs: Vec<RunOutcome>,
}

impl InstanceResult {
    /// Whether all finished runs agree on verdict and earliest step.
    pub fn agrees(&self) -> bool {
        let mut done = self.runs.iter().filter(|r| r.reachable.is_some());
        match done.next() {
            None => true,
            Some(first) => done.all(|r| {
                r.reachable == first.reachable && (r.reachable == Some(false) || r.step == first.step)
            }),
        }
    }

    pub fn verdict(&self) -> Option<bool> {
        self.runs.iter().find_map(|r| r.reachable)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AlgoStats {
    pub algorithm: usize,
    pub mean_seconds: f64,
    /// Timed-out runs enter with their elapsed time, a lower bound.
    pub median_seconds: f64,
    pub true_count: usize,
    pub timeouts: usize,
    pub errors: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub m: usize,
    pub instances: usize,
    pub algorithms: Vec<AlgoStats>,
    pub true_count: usize,
    pub threshold_mean: f64,
    pub threshold_max: usize,
    pub disagreements: usize,
    pub results: Vec<InstanceResult>,
}

pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2.0
    }
}

fn run_instance(cfg: &BenchConfig, n: usize, m: usize, index: usize) -> Result<InstanceResult, BenchError> {
    let mut rng = instance_rng(cfg.seed, n, m, index);
    let a = gen_irreducible(n, m, cfg.value_range, &mut rng)?;
    let (x, y) = standard_sets(n, cfg.profile)?;
    let threshold = transient_cyclicity(&a, DEFAULT_POWER_CAP)
        .ok()
        .map(|p| p.completeness_threshold());
    let horizon = cfg
        .horizon
        .unwrap_or_else(|| threshold.unwrap_or(cfg.horizon_cap).min(cfg.horizon_cap))
        .max(1);
    let spec = ReachSpec::new(a.clone(), x, y, horizon);
    let runs = cfg
        .algorithms
        .iter()
        .map(|&alg| {
            let variant = Variant::from_number(alg).expect("validated algorithm number");
            let start = Instant::now();
            let options = ReachOptions {
                deadline: cfg.timeout.map(|t| start + t),
                ..Default::default()
            };
            let outcome = run_variant(&spec, variant, &options);
            let seconds = start.elapsed().as_secs_f64();
            match outcome {
                Ok(r) => RunOutcome {
                    algorithm: alg,
                    reachable: Some(r.reachable),
                    step: r.step.filter(|_| r.reachable),
                    seconds,
                    timed_out: false,
                    error: None,
                },
                Err(e) => RunOutcome {
                    algorithm: alg,
                    reachable: None,
                    step: None,
                    seconds,
                    timed_out: matches!(e, ReachError::Timeout { .. }),
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(InstanceResult {
        index,
        matrix: a.to_text(),
        threshold,
        horizon,
        runs,
    })
}

fn summarize(cfg: &BenchConfig, n: usize, m: usize, results: Vec<InstanceResult>) -> BenchRow {
    let algorithms = cfg
        .algorithms
        .iter()
        .enumerate()
        .map(|(k, &alg)| {
            let runs: Vec<&RunOutcome> = results.iter().map(|r| &r.runs[k]).collect();
            let mut secs: Vec<f64> = runs.iter().map(|r| r.seconds).collect();
            let mean = if secs.is_empty() {
                0.0
            } else {
                secs.iter().sum::<f64>() / secs.len() as f64
            };
            AlgoStats {
                algorithm: alg,
                mean_seconds: mean,
                median_seconds: median(&mut secs),
                true_count: runs.iter().filter(|r| r.reachable == Some(true)).count(),
                timeouts: runs.iter().filter(|r| r.timed_out).count(),
                errors: runs.iter().filter(|r| r.error.is_some() && !r.timed_out).count(),
            }
        })
        .collect();
    let thresholds: Vec<usize> = results.iter().map(|r| r.horizon).collect();
    let threshold_mean = if thresholds.is_empty() {
        0.0
    } else {
        thresholds.iter().sum::<usize>() as f64 / thresholds.len() as f64
    };
    BenchRow {
        n,
        m,
        instances: results.len(),
        algorithms,
        true_count: results.iter().filter(|r| r.verdict() == Some(true)).count(),
        threshold_mean,
        threshold_max: thresholds.iter().copied().max().unwrap_or(0),
        disagreements: results.iter().filter(|r| !r.agrees()).count(),
        results,
    }
}

/// Runs every configured algorithm on every instance of every pair.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<Vec<BenchRow>, BenchError> {
    cfg.validate()?;
    for &alg in &cfg.algorithms {
        if Variant::from_number(alg).is_none() {
            return Err(BenchError::Output(format!("unknown algorithm {alg}")));
        }
    }
    cfg.pairs
        .iter()
        .map(|&(n, m)| {
            let indices: Vec<usize> = (0..cfg.instances_per_pair).collect();
            let results: Result<Vec<InstanceResult>, BenchError> = if cfg.parallel {
                indices.par_iter().map(|&i| run_instance(cfg, n, m, i)).collect()
            } else {
                indices.iter().map(|&i| run_instance(cfg, n, m, i)).collect()
            };
            Ok(summarize(cfg, n, m, results?))
        })
        .collect()
}

/// One line per pair: `(n,m)`, mean seconds per algorithm, true count and
/// horizon statistics.
pub fn write_csv(rows: &[BenchRow], cfg: &BenchConfig, out: impl Write) -> Result<(), BenchError> {
    let err = |e: csv::Error| BenchError::Output(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["(n,m)".to_string()];
    header.extend(cfg.algorithms.iter().map(|a| format!("Alg. {a} mean [s]")));
    header.extend(cfg.algorithms.iter().map(|a| format!("Alg. {a} median [s]")));
    header.extend(
        [
            format!("true (out of {})", cfg.instances_per_pair),
            "N* mean".into(),
            "N* max".into(),
            "timeouts".into(),
            "disagreements".into(),
        ],
    );
    w.write_record(&header).map_err(err)?;
    for row in rows {
        let mut rec = vec![format!("({},{})", row.n, row.m)];
        rec.extend(row.algorithms.iter().map(|a| format!("{:.4}", a.mean_seconds)));
        rec.extend(row.algorithms.iter().map(|a| format!("{:.4}", a.median_seconds)));
        rec.push(row.true_count.to_string());
        rec.push(format!("{:.2}", row.threshold_mean));
        rec.push(row.threshold_max.to_string());
        rec.push(row.algorithms.iter().map(|a| a.timeouts).sum::<usize>().to_string());
        rec.push(row.disagreements.to_string());
        w.write_record(&rec).map_err(err)?;
    }
    w.flush().map_err(|e| BenchError::Output(e.to_string()))
}

#[derive(Serialize)]
struct Report<'a> {
    config: &'a BenchConfig,
    /// Chain length rule; `n/2` rounds down for odd `n`.
    chain_length: &'static str,
    rows: &'a [BenchRow],
}

pub fn to_json(rows: &[BenchRow], cfg: &BenchConfig) -> String {
    let chain_length = match cfg.profile {
        SetProfile::Fixed5 => "5",
        SetProfile::Half => "floor(n/2)",
    };
    serde_json::to_string_pretty(&Report {
        config: cfg,
        chain_length,
        rows,
    })
    .expect("serializable report")
}
