//! Finite-`n` checks of the limiting moments.
//!
//! [`v_n_exact`] sums the cyclic products of `S` over every injective
//! assignment of indices to the blocks of a partition. The Monte Carlo
//! routines sample Bernoulli(`p`) index sets, average normalized traces and
//! compare them with the symbolic moments.
//!
//! Every trial draws from its own generator seeded by `(seed, trial)`, and
//! per-trial results are reduced in trial order, so reports do not depend
//! on the number of worker threads.

use std::fmt;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frames::{ConferenceMatrix, Frame, C64};
use crate::moments::{eval_moment, moment_frame, moment_s, MomentError, MOMENT_K_MAX};
use crate::ncpart::NonCrossingPartition;

/// Largest `n^t` that [`v_n_exact`] will enumerate.
pub const V_N_BUDGET: f64 = 1e8;

/// Multiple of the standard error allowed in a Monte Carlo comparison.
pub const STDERR_FACTOR: f64 = 3.0;

/// Coefficient of the `|predicted| / n` finite-size allowance.
pub const FINITE_SIZE_FACTOR: f64 = 5.0;

#[derive(Debug, Error, PartialEq)]
pub enum VerifyError {
    #[error("n^t = {need:.3e} exceeds the enumeration budget {budget:.0e}")]
    Budget { need: f64, budget: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("labels are not a restricted-growth string: {0:?}")]
    Labels(Vec<usize>),
    #[error(transparent)]
    Moment(#[from] MomentError),
}

/// `V_n(pi)` for a non-crossing partition.
pub fn v_n_exact(pi: &NonCrossingPartition, conf: &ConferenceMatrix) -> Result<C64, VerifyError> {
    v_n_exact_labels(pi.labels(), conf)
}

/// `V_n` for any restricted-growth label string, crossing or not.
///
/// Sums `S_{a(1)a(2)} ... S_{a(k)a(1)}` over assignments giving distinct
/// blocks distinct indices, divided by `n^(k/2 + 1)`.
pub fn v_n_exact_labels(labels: &[usize], conf: &ConferenceMatrix) -> Result<C64, VerifyError> {
    let k = labels.len();
    let mut blocks = 0;
    for &l in labels {
        if l == 0 || l > blocks + 1 {
            return Err(VerifyError::Labels(labels.to_vec()));
        }
        blocks = blocks.max(l);
    }
    let n = conf.n();
    if k == 0 {
        return Ok(C64::new(1.0, 0.0));
    }
    let need = (n as f64).powi(blocks as i32);
    if need > V_N_BUDGET {
        return Err(VerifyError::Budget { need, budget: V_N_BUDGET });
    }
    if blocks > n {
        return Ok(C64::new(0.0, 0.0));
    }

    // Edges become computable once both endpoint blocks have an index;
    // bucket them by the later of the two (0-based block ids).
    let mut ready: Vec<Vec<(usize, usize)>> = vec![Vec::new(); blocks];
    for i in 0..k {
        let (a, b) = (labels[i] - 1, labels[(i + 1) % k] - 1);
        ready[a.max(b)].push((a, b));
    }

    let mut walker = Assign { s: conf.entries(), ready: &ready, index: vec![0; blocks], used: vec![false; n] };
    let total = walker.sum(0, C64::new(1.0, 0.0));
    let norm = (n as f64).powf(k as f64 / 2.0 + 1.0);
    Ok(total / norm)
}

struct Assign<'a> {
    s: &'a DMatrix<C64>,
    ready: &'a [Vec<(usize, usize)>],
    index: Vec<usize>,
    used: Vec<bool>,
}

impl Assign<'_> {
    fn sum(&mut self, block: usize, partial: C64) -> C64 {
        if block == self.ready.len() {
            return partial;
        }
        let mut acc = C64::new(0.0, 0.0);
        for v in 0..self.used.len() {
            if self.used[v] {
                continue;
            }
            self.index[block] = v;
            let product =
                self.ready[block].iter().fold(partial, |p, &(a, b)| p * self.s[(self.index[a], self.index[b])]);
            self.used[v] = true;
            acc += self.sum(block + 1, product);
            self.used[v] = false;
        }
        acc
    }
}

/// Monte Carlo settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MCConfig {
    pub p: f64,
    pub k_max: usize,
    pub trials: usize,
    pub seed: u64,
    /// Worker threads; `None` uses the global pool. Does not affect results.
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl MCConfig {
    pub fn new(p: f64, k_max: usize, trials: usize, seed: u64) -> Self {
        Self { p, k_max, trials, seed, threads: None }
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }

    pub fn validate(&self) -> Result<(), VerifyError> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(VerifyError::Config(format!("p = {} must lie in [0, 1]", self.p)));
        }
        if self.trials == 0 {
            return Err(VerifyError::Config("trials must be at least 1".into()));
        }
        if self.k_max == 0 || self.k_max > MOMENT_K_MAX {
            return Err(VerifyError::Config(format!("k_max = {} must lie in 1..={MOMENT_K_MAX}", self.k_max)));
        }
        if self.threads == Some(0) {
            return Err(VerifyError::Config("threads must be at least 1".into()));
        }
        Ok(())
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `trial` under master seed `seed`.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ trial.wrapping_mul(0xD134_2543_DE82_EF95))
}

/// Indices kept in one trial, each independently with probability `p`.
pub fn sample_selection(n: usize, p: f64, seed: u64, trial: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, trial));
    (0..n).filter(|_| rng.random::<f64>() < p).collect()
}

/// `trace((P S P)^k) / n^(k/2 + 1)` for `k = 1..=k_max` on a kept index set.
pub fn conference_traces(conf: &ConferenceMatrix, kept: &[usize], k_max: usize) -> Vec<f64> {
    let n = conf.n() as f64;
    if kept.is_empty() {
        return vec![0.0; k_max];
    }
    let sub = conf.entries().select_rows(kept).select_columns(kept);
    let mut power = sub.clone();
    let mut out = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        if k > 1 {
            power = &power * &sub;
        }
        out.push(power.trace().re / n.powf(k as f64 / 2.0 + 1.0));
    }
    out
}

/// `trace((P F'F P)^k) / n` for `k = 1..=k_max` on a kept column set.
///
/// Uses the eigenvalues of whichever of `F_K' F_K` and `F_K F_K'` is smaller;
/// both share their nonzero spectrum.
pub fn frame_traces(frame: &Frame, kept: &[usize], k_max: usize) -> Vec<f64> {
    let n = frame.n() as f64;
    if kept.is_empty() {
        return vec![0.0; k_max];
    }
    let cols = frame.entries().select_columns(kept);
    let gram = if kept.len() <= frame.m() { cols.adjoint() * &cols } else { &cols * cols.adjoint() };
    let eigenvalues = gram.symmetric_eigenvalues();
    (1..=k_max).map(|k| eigenvalues.iter().map(|l| l.powi(k as i32)).sum::<f64>() / n).collect()
}

/// Finite-`n` form of the binomial link between the two domains:
/// `(1/n) tr((PGP)^k) = ((x+1)/2)^k |K|/n + sum_j C(k,j) (x n/(n-1))^(j/2) ((x+1)/2)^(k-j) mS_j`,
/// where `conference[j - 1]` holds `tr((PSP)^j) / n^(j/2+1)`.
pub fn frame_moment_from_conference(k: usize, x: f64, n: usize, kept_fraction: f64, conference: &[f64]) -> f64 {
    let mean = (x + 1.0) / 2.0;
    let root = (x * n as f64 / (n as f64 - 1.0)).sqrt();
    let mut total = mean.powi(k as i32) * kept_fraction;
    let mut binom = 1.0;
    for j in 1..=k {
        binom = binom * (k + 1 - j) as f64 / j as f64;
        total += binom * root.powi(j as i32) * mean.powi((k - j) as i32) * conference[j - 1];
    }
    total
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Frame,
    Conference,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MCRow {
    pub k: usize,
    pub predicted: f64,
    pub empirical: f64,
    pub stderr: f64,
    /// `(empirical - predicted) / stderr`; absent when the standard error is at roundoff level.
    pub z: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MCReport {
    pub domain: Domain,
    pub source: String,
    pub n: usize,
    pub x: f64,
    pub s: f64,
    pub config: MCConfig,
    pub tolerance_model: String,
    pub rows: Vec<MCRow>,
}

impl MCReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    /// Aligned text table: k, predicted, empirical, stderr, z, verdict.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let domain = match self.domain {
            Domain::Frame => "frame moments m_k",
            Domain::Conference => "conference moments m^S_k",
        };
        out.push_str(&format!(
            "{domain} for {} (n={}, x={:.6}, s={:.6}); p={}, trials={}, seed={}\n",
            self.source, self.n, self.x, self.s, self.config.p, self.config.trials, self.config.seed
        ));
        out.push_str(&format!("tolerance: {}\n", self.tolerance_model));
        out.push_str(&format!(
            "{:>3}  {:>14}  {:>14}  {:>11}  {:>8}  {}\n",
            "k", "predicted", "empirical", "stderr", "z", "verdict"
        ));
        for r in &self.rows {
            let z = r.z.map_or_else(|| "-".to_string(), |z| format!("{z:.3}"));
            let verdict = if r.pass { "pass" } else { "FAIL" };
            out.push_str(&format!(
                "{:>3}  {:>14.8}  {:>14.8}  {:>11.3e}  {:>8}  {verdict}\n",
                r.k, r.predicted, r.empirical, r.stderr, z
            ));
        }
        out
    }
}

impl fmt::Display for MCReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_table())
    }
}

const TOLERANCE_MODEL: &str =
    "|empirical - predicted| <= 3 stderr + 5 |predicted| / n (finite-n allowance is an engineering choice)";

/// Runs `per_trial` for every trial and returns the results in trial order.
fn run_trials<F>(cfg: &MCConfig, per_trial: F) -> Vec<Vec<f64>>
where
    F: Fn(u64) -> Vec<f64> + Sync + Send,
{
    let work = || (0..cfg.trials as u64).into_par_iter().map(&per_trial).collect::<Vec<_>>();
    match cfg.threads {
        Some(threads) => {
            rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool").install(work)
        }
        None => work(),
    }
}

fn summarize(samples: &[Vec<f64>], predicted: &[f64], n: usize) -> Vec<MCRow> {
    let trials = samples.len() as f64;
    predicted
        .iter()
        .enumerate()
        .map(|(i, &pred)| {
            let mean = samples.iter().map(|s| s[i]).sum::<f64>() / trials;
            let var = if samples.len() > 1 {
                samples.iter().map(|s| (s[i] - mean).powi(2)).sum::<f64>() / (trials - 1.0)
            } else {
                0.0
            };
            let stderr = (var / trials).sqrt();
            let diff = mean - pred;
            let z = (stderr > 1e-12 * mean.abs()).then(|| diff / stderr);
            let tolerance = STDERR_FACTOR * stderr + FINITE_SIZE_FACTOR * pred.abs() / n as f64;
            MCRow { k: i + 1, predicted: pred, empirical: mean, stderr, z, tolerance, pass: diff.abs() <= tolerance }
        })
        .collect()
}

/// Estimates `m^S_k` on random principal submatrices of `S` and compares with the symbolic limit.
pub fn mc_moment_s(conf: &ConferenceMatrix, cfg: &MCConfig) -> Result<MCReport, VerifyError> {
    cfg.validate()?;
    let n = conf.n();
    let predicted =
        (1..=cfg.k_max).map(|k| moment_s(k).map(|m| m.eval(conf.s(), cfg.p))).collect::<Result<Vec<_>, _>>()?;
    let samples =
        run_trials(cfg, |trial| conference_traces(conf, &sample_selection(n, cfg.p, cfg.seed, trial), cfg.k_max));
    Ok(MCReport {
        domain: Domain::Conference,
        source: conf.source().to_string(),
        n,
        x: conf.x(),
        s: conf.s(),
        config: cfg.clone(),
        tolerance_model: TOLERANCE_MODEL.to_string(),
        rows: summarize(&samples, &predicted, n),
    })
}

/// Estimates `m_k` on random column subsets of `F` and compares with the symbolic limit.
pub fn mc_moment_frame(frame: &Frame, cfg: &MCConfig) -> Result<MCReport, VerifyError> {
    cfg.validate()?;
    let n = frame.n();
    let predicted =
        (1..=cfg.k_max).map(|k| eval_moment(&moment_frame(k)?, frame.gamma(), cfg.p)).collect::<Result<Vec<_>, _>>()?;
    let samples = run_trials(cfg, |trial| frame_traces(frame, &sample_selection(n, cfg.p, cfg.seed, trial), cfg.k_max));
    Ok(MCReport {
        domain: Domain::Frame,
        source: frame.construction().to_string(),
        n,
        x: frame.x(),
        s: crate::frames::s_of_x(frame.x()),
        config: cfg.clone(),
        tolerance_model: TOLERANCE_MODEL.to_string(),
        rows: summarize(&samples, &predicted, n),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::{build_conference, harmonic_etf, qr_difference_set};

    fn fano() -> (Frame, ConferenceMatrix) {
        let frame = harmonic_etf(&qr_difference_set(7).unwrap()).unwrap();
        let conf = build_conference(&frame).unwrap();
        (frame, conf)
    }

    fn ncp(labels: &[usize]) -> NonCrossingPartition {
        NonCrossingPartition::from_labels(labels.to_vec()).unwrap()
    }

    #[test]
    fn two_singletons_give_one_minus_one_over_n() {
        let (_, conf) = fano();
        let v = v_n_exact(&ncp(&[1, 2]), &conf).unwrap();
        assert!((v.re - 6.0 / 7.0).abs() < 1e-12 && v.im.abs() < 1e-12);
    }

    #[test]
    fn single_block_pair_gives_s_squared() {
        let (_, conf) = fano();
        let v = v_n_exact(&ncp(&[1, 1]), &conf).unwrap();
        let want = conf.s().powi(2) * 6.0 / 7.0;
        assert!((v.re - want).abs() < 1e-12);
    }

    #[test]
    fn budget_and_label_errors() {
        let (_, conf) = fano();
        assert!(matches!(v_n_exact_labels(&[1, 2, 3, 4, 5, 6, 7, 8, 9, 10], &conf), Err(VerifyError::Budget { .. })));
        assert!(matches!(v_n_exact_labels(&[2, 1], &conf), Err(VerifyError::Labels(_))));
    }

    #[test]
    fn config_validation() {
        assert!(MCConfig::new(0.5, 4, 10, 1).validate().is_ok());
        assert!(MCConfig::new(1.5, 4, 10, 1).validate().is_err());
        assert!(MCConfig::new(0.5, 0, 10, 1).validate().is_err());
        assert!(MCConfig::new(0.5, 15, 10, 1).validate().is_err());
        assert!(MCConfig::new(0.5, 4, 0, 1).validate().is_err());
        assert!(MCConfig::new(0.5, 4, 10, 1).with_threads(0).validate().is_err());
    }

    #[test]
    fn selections_are_reproducible() {
        assert_eq!(sample_selection(50, 0.5, 9, 3), sample_selection(50, 0.5, 9, 3));
        assert_ne!(sample_selection(50, 0.5, 9, 3), sample_selection(50, 0.5, 9, 4));
        assert!(sample_selection(50, 0.0, 9, 3).is_empty());
        assert_eq!(sample_selection(50, 1.0, 9, 3).len(), 50);
    }

    #[test]
    fn empty_selection_contributes_zero() {
        let (frame, conf) = fano();
        let report = mc_moment_frame(&frame, &MCConfig::new(0.0, 3, 10, 1)).unwrap();
        assert!(report.rows.iter().all(|r| r.empirical == 0.0 && r.pass));
        let report = mc_moment_s(&conf, &MCConfig::new(0.0, 3, 10, 1)).unwrap();
        assert!(report.rows.iter().all(|r| r.empirical == 0.0));
    }

    #[test]
    fn full_selection_conference_second_moment() {
        let (_, conf) = fano();
        let report = mc_moment_s(&conf, &MCConfig::new(1.0, 2, 3, 5)).unwrap();
        // trace(S^2) / n^2 = n (n-1)(x+1)^2/(4x) / n^2
        let exact = conf.square_diagonal() / 7.0;
        assert!((report.rows[1].empirical - exact).abs() < 1e-12);
        assert_eq!(report.rows[1].stderr, 0.0);
    }

    #[test]
    fn table_lists_every_order() {
        let (frame, _) = fano();
        let report = mc_moment_frame(&frame, &MCConfig::new(0.5, 4, 20, 2)).unwrap();
        let table = report.to_table();
        assert_eq!(table.lines().count(), 3 + 4);
        assert!(table.contains("verdict"));
        let json = serde_json::to_string(&report).unwrap();
        let back: MCReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
    }
}
