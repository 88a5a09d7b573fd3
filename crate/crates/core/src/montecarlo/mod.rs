//! Ensembles of independent runs and the estimators computed from them.
//!
//! Run `r` draws from stream `r` of the master seed, runs execute on the rayon
//! pool, and summaries are folded in run order, so every output is
//! bit-identical for any thread count.

mod estimators;
mod stats;

pub use estimators::{
    a_statistics, compare_samplers, delta_tails, estimate_speed, ldp_curve, supermartingale_decay, AStatistics,
    DecayCurve, DecayPoint, DecileFit, LdpCurve, LdpPoint, LdpSlope, SamplerComparison, SpeedPoint, Summary,
    TailEstimate,
};
pub use stats::{clopper_pearson, kolmogorov_sf, ks_two_sample, ols, quantile, KsResult, LineFit};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::StatsError;
use crate::observables::{analyze, AnalysisOptions, CheckReport};
use crate::walk::{run_rng, run_walk_with, SamplerMode, WalkState};

/// Minimum gain of the diameter on an `A_i` step.
pub const A_GAIN: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub runs: usize,
    pub steps: usize,
    pub master_seed: u64,
    pub mode: SamplerMode,
    /// Sorted step indices in `[0, steps]`.
    pub checkpoints: Vec<usize>,
}

impl EnsembleConfig {
    /// Config with [`default_checkpoints`].
    pub fn new(runs: usize, steps: usize, master_seed: u64, mode: SamplerMode) -> Self {
        Self {
            runs,
            steps,
            master_seed,
            mode,
            checkpoints: default_checkpoints(steps),
        }
    }

    pub fn validate(&self) -> Result<(), StatsError> {
        let bad = |m: String| Err(StatsError::InvalidConfig(m));
        if self.runs == 0 {
            return bad("runs must be at least 1".into());
        }
        if self.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return bad("checkpoints must be strictly increasing".into());
        }
        if let Some(&last) = self.checkpoints.last() {
            if last > self.steps {
                return bad(format!("checkpoint {last} exceeds steps = {}", self.steps));
            }
        }
        Ok(())
    }
}

/// `1`, the deciles of `steps`, and `steps` itself.
pub fn default_checkpoints(steps: usize) -> Vec<usize> {
    let mut v: Vec<usize> = std::iter::once(1.min(steps))
        .chain((1..=10).map(|k| steps * k / 10))
        .filter(|&n| n > 0)
        .collect();
    v.dedup();
    v
}

/// `‖X_n‖`, `d_n` and the running maximum `M_n` at one checkpoint.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointSample {
    pub n: usize,
    pub norm: f64,
    pub d: f64,
    pub running_max: f64,
    /// Ladder index `i_n`.
    pub ladder_index: usize,
}

/// Sums of `M_{i,n}`, its square, and the number of epochs observed at lag `n`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LagMoments {
    pub sum: Vec<f64>,
    pub sum_sq: Vec<f64>,
    pub count: Vec<u64>,
}

impl LagMoments {
    fn grow(&mut self, len: usize) {
        if self.sum.len() < len {
            self.sum.resize(len, 0.0);
            self.sum_sq.resize(len, 0.0);
            self.count.resize(len, 0);
        }
    }

    pub fn merge(&mut self, o: &LagMoments) {
        self.grow(o.sum.len());
        for n in 0..o.sum.len() {
            self.sum[n] += o.sum[n];
            self.sum_sq[n] += o.sum_sq[n];
            self.count[n] += o.count[n];
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run: u64,
    pub checkpoints: Vec<CheckpointSample>,
    /// `i_N` at the final step.
    pub ladder_count: usize,
    /// `Δ_i` for the closed epochs `i = 1, 2, …` in order.
    pub deltas: Vec<u32>,
    /// `1{A_i}` for `i = 1, 2, …` (rejection mode, step after `τ_i` simulated).
    pub a_flags: Vec<bool>,
    /// `A_i` epochs whose next step gained at least [`A_GAIN`].
    pub a_gains: u64,
    pub m_lags: LagMoments,
    pub report: CheckReport,
}

impl RunSummary {
    pub fn a_frequency(&self) -> Option<f64> {
        (!self.a_flags.is_empty()).then(|| self.a_flags.iter().filter(|&&a| a).count() as f64 / self.a_flags.len() as f64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub config: EnsembleConfig,
    pub runs: Vec<RunSummary>,
}

impl Ensemble {
    /// Invariant checks merged over every run.
    pub fn report(&self) -> CheckReport {
        let mut r = CheckReport::default();
        for s in &self.runs {
            r.merge(&s.report);
        }
        r
    }

    /// `M_{i,n}` moments merged over every run.
    pub fn m_lags(&self) -> LagMoments {
        let mut m = LagMoments::default();
        for s in &self.runs {
            m.merge(&s.m_lags);
        }
        m
    }
}

/// Simulates and analyses every run of `config`.
pub fn run_ensemble(config: &EnsembleConfig, opts: &AnalysisOptions) -> Result<Ensemble, StatsError> {
    config.validate()?;
    let opts = AnalysisOptions {
        keep_frames: false,
        ..*opts
    };
    let runs = (0..config.runs as u64)
        .into_par_iter()
        .map(|r| summarize_run(config, r, &opts))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Ensemble {
        config: config.clone(),
        runs,
    })
}

/// One run of an ensemble, simulated and reduced to its summary.
pub fn summarize_run(config: &EnsembleConfig, run: u64, opts: &AnalysisOptions) -> Result<RunSummary, StatsError> {
    let state = WalkState::with_rng(run_rng(config.master_seed, run), config.mode);
    let (_, traj) = run_walk_with(state, config.steps, config.master_seed)?;
    let a = analyze(&traj, opts)?;

    let checkpoints = config
        .checkpoints
        .iter()
        .map(|&n| CheckpointSample {
            n,
            norm: traj.rows[n].position().norm(),
            d: traj.rows[n].d,
            running_max: a.records.running_max[n],
            ladder_index: a.records.i_n[n],
        })
        .collect();

    let closed = a.ladders.iter().skip(1).map_while(|r| r.delta);
    let deltas = closed.map(|d| d as u32).collect();

    let mut a_flags = Vec::new();
    let mut a_gains = 0;
    for rec in a.ladders.iter().skip(1) {
        let Some(hit) = rec.a_event else { continue };
        a_flags.push(hit);
        if hit && traj.rows[rec.tau + 1].d - rec.d_tau >= A_GAIN - 1e-9 {
            a_gains += 1;
        }
    }

    let mut m_lags = LagMoments::default();
    m_lags.grow(config.steps + 1);
    // counts via a difference array: epoch i is observed for n ≤ observed_until
    let mut diff = vec![0i64; config.steps + 2];
    for track in a.tracks.iter().filter(|t| t.i >= 1) {
        for (n, &m) in track.values.iter().enumerate() {
            m_lags.sum[n] += m;
            m_lags.sum_sq[n] += m * m;
        }
        diff[0] += 1;
        diff[track.observed_until + 1] -= 1;
    }
    let mut acc = 0i64;
    for n in 0..=config.steps {
        acc += diff[n];
        m_lags.count[n] = acc as u64;
    }
    let used = m_lags.count.iter().rposition(|&c| c > 0).map_or(0, |p| p + 1);
    m_lags.sum.truncate(used);
    m_lags.sum_sq.truncate(used);
    m_lags.count.truncate(used);

    Ok(RunSummary {
        run,
        checkpoints,
        ladder_count: a.ladders.len() - 1,
        deltas,
        a_flags,
        a_gains,
        m_lags,
        report: a.report,
    })
}
