use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::stats::{clopper_pearson, ks_two_sample, ols, quantile, KsResult, LineFit};
use super::Ensemble;
use crate::drift::PaperConstants;
use crate::error::{StatsError, WalkError};
use crate::walk::{run_rng, sample_direct, sample_rejection, SamplerMode, WalkState};

/// Coverage of every reported interval.
pub const CI_LEVEL: f64 = 0.95;
/// Fewest pooled epochs for a tail fit.
pub const MIN_TAIL_EPOCHS: usize = 1000;
/// Tail levels are fitted while the survival count is at least this.
pub const MIN_TAIL_COUNT: f64 = 10.0;
/// Lags with fewer epochs carry no usable standard error.
pub const MIN_DECAY_EPOCHS: u64 = 30;

/// Mean, standard error, extremes and the usual percentiles of a sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub se: f64,
    pub min: f64,
    pub p01: f64,
    pub p05: f64,
    pub p25: f64,
    pub p50: f64,
    pub p75: f64,
    pub p95: f64,
    pub p99: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = if v.len() > 1 {
            v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        let q = |p| quantile(&v, p);
        Self {
            count: v.len(),
            mean,
            se: (var / n).sqrt(),
            min: v[0],
            p01: q(0.01),
            p05: q(0.05),
            p25: q(0.25),
            p50: q(0.5),
            p75: q(0.75),
            p95: q(0.95),
            p99: q(0.99),
            max: v[v.len() - 1],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeedPoint {
    pub n: usize,
    /// `‖X_n‖ / n` across runs.
    pub speed: Summary,
    /// `d_n / n` across runs.
    pub diameter_speed: Summary,
}

/// Speed summaries at every checkpoint `n ≥ 1`.
pub fn estimate_speed(ens: &Ensemble) -> Vec<SpeedPoint> {
    let mut out = Vec::new();
    for (j, &n) in ens.config.checkpoints.iter().enumerate() {
        if n == 0 {
            continue;
        }
        let speeds: Vec<f64> = ens.runs.iter().map(|r| r.checkpoints[j].norm / n as f64).collect();
        let dspeeds: Vec<f64> = ens.runs.iter().map(|r| r.checkpoints[j].d / n as f64).collect();
        out.push(SpeedPoint {
            n,
            speed: Summary::of(&speeds),
            diameter_speed: Summary::of(&dspeeds),
        });
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecileFit {
    pub decile: usize,
    /// Smallest and largest epoch index in the group.
    pub i_range: (usize, usize),
    pub epochs: usize,
    pub fit: Option<LineFit>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub sample_size: usize,
    /// `1, 2, …, max Δ`.
    pub levels: Vec<usize>,
    /// `P̂[Δ ≥ level]`.
    pub survival: Vec<f64>,
    /// Slope of `ln P̂[Δ ≥ level]` over the fitted levels.
    pub fitted_rate: f64,
    pub intercept: f64,
    pub fit_r2: f64,
    /// Largest level with at least [`MIN_TAIL_COUNT`] epochs surviving.
    pub fit_max_level: usize,
    /// Same fit within each decile of the epoch index `i`.
    pub deciles: Vec<DecileFit>,
}

fn survival(deltas: &[u32]) -> Vec<f64> {
    let max = deltas.iter().copied().max().unwrap_or(0) as usize;
    let mut hist = vec![0u64; max + 2];
    for &d in deltas {
        hist[d as usize] += 1;
    }
    let n = deltas.len() as f64;
    let mut out = vec![0.0; max];
    let mut above = 0u64;
    for level in (1..=max).rev() {
        above += hist[level];
        out[level - 1] = above as f64 / n;
    }
    out
}

fn log_survival_fit(surv: &[f64], n: usize) -> Option<(LineFit, usize)> {
    let floor = MIN_TAIL_COUNT / n as f64;
    let upto = surv.iter().take_while(|&&s| s >= floor).count();
    let x: Vec<f64> = (1..=upto).map(|l| l as f64).collect();
    let y: Vec<f64> = surv[..upto].iter().map(|s| s.ln()).collect();
    ols(&x, &y).map(|f| (f, upto))
}

/// Pooled survival of `Δ_i` over closed epochs `i ≥ 1` and its log-linear fit.
pub fn delta_tails(ens: &Ensemble) -> Result<TailEstimate, StatsError> {
    let mut pooled: Vec<(usize, u32)> = Vec::new();
    for r in &ens.runs {
        pooled.extend(r.deltas.iter().enumerate().map(|(j, &d)| (j + 1, d)));
    }
    if pooled.len() < MIN_TAIL_EPOCHS {
        return Err(StatsError::InsufficientData(format!(
            "{} closed ladder epochs, need {MIN_TAIL_EPOCHS}",
            pooled.len()
        )));
    }
    let deltas: Vec<u32> = pooled.iter().map(|p| p.1).collect();
    let surv = survival(&deltas);
    let (fit, upto) = log_survival_fit(&surv, deltas.len())
        .ok_or_else(|| StatsError::InsufficientData("fewer than two resolvable tail levels".into()))?;

    pooled.sort_by_key(|p| p.0);
    let chunk = pooled.len().div_ceil(10);
    let deciles = pooled
        .chunks(chunk)
        .enumerate()
        .map(|(decile, group)| {
            let d: Vec<u32> = group.iter().map(|p| p.1).collect();
            DecileFit {
                decile,
                i_range: (group[0].0, group[group.len() - 1].0),
                epochs: group.len(),
                fit: log_survival_fit(&survival(&d), d.len()).map(|f| f.0),
            }
        })
        .collect();

    Ok(TailEstimate {
        sample_size: deltas.len(),
        levels: (1..=surv.len()).collect(),
        survival: surv,
        fitted_rate: fit.slope,
        intercept: fit.intercept,
        fit_r2: fit.r2,
        fit_max_level: upto,
        deciles,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LdpPoint {
    pub c: f64,
    pub n: usize,
    /// Runs with `‖X_n‖ ≤ c·n`.
    pub count: u64,
    pub runs: u64,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LdpSlope {
    pub c: f64,
    /// Fit of `ln P̂` against `n` over checkpoints with a nonzero count.
    pub fit: Option<LineFit>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LdpCurve {
    pub points: Vec<LdpPoint>,
    pub slopes: Vec<LdpSlope>,
}

/// Empirical `P[‖X_n‖ ≤ c·n]` per level `c` and checkpoint `n ≥ 1`.
pub fn ldp_curve(ens: &Ensemble, cs: &[f64]) -> LdpCurve {
    let runs = ens.runs.len() as u64;
    let mut points = Vec::new();
    let mut slopes = Vec::new();
    for &c in cs {
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for (j, &n) in ens.config.checkpoints.iter().enumerate() {
            if n == 0 {
                continue;
            }
            let count = ens.runs.iter().filter(|r| r.checkpoints[j].norm <= c * n as f64).count() as u64;
            let (ci_lo, ci_hi) = clopper_pearson(count, runs, 1.0 - CI_LEVEL);
            let p_hat = count as f64 / runs as f64;
            if count > 0 {
                xs.push(n as f64);
                ys.push(p_hat.ln());
            }
            points.push(LdpPoint {
                c,
                n,
                count,
                runs,
                p_hat,
                ci_lo,
                ci_hi,
            });
        }
        slopes.push(LdpSlope { c, fit: ols(&xs, &ys) });
    }
    LdpCurve { points, slopes }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayPoint {
    pub n: usize,
    pub epochs: u64,
    pub mean: f64,
    pub se: f64,
    /// `ĉ·exp(−c_ofer·n)`.
    pub bound: f64,
    /// `mean ≤ bound + 3·se`.
    pub within: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayCurve {
    pub elon_hat: f64,
    pub c_ofer: f64,
    pub points: Vec<DecayPoint>,
    pub all_within: bool,
}

/// Pooled `E[M_{i,n}]` per lag `n` against the geometric bound.
pub fn supermartingale_decay(ens: &Ensemble, constants: &PaperConstants) -> Result<DecayCurve, StatsError> {
    let m = ens.m_lags();
    if m.count.first().copied().unwrap_or(0) < MIN_DECAY_EPOCHS {
        return Err(StatsError::InsufficientData(format!(
            "{} ladder epochs, need {MIN_DECAY_EPOCHS}",
            m.count.first().copied().unwrap_or(0)
        )));
    }
    let elon_hat = constants.elon_hat();
    let points: Vec<DecayPoint> = (0..m.count.len())
        .take_while(|&n| m.count[n] >= MIN_DECAY_EPOCHS)
        .map(|n| {
            let k = m.count[n] as f64;
            let mean = m.sum[n] / k;
            let var = ((m.sum_sq[n] / k - mean * mean) * k / (k - 1.0)).max(0.0);
            let se = (var / k).sqrt();
            let bound = elon_hat * (-constants.c_ofer * n as f64).exp();
            DecayPoint {
                n,
                epochs: m.count[n],
                mean,
                se,
                bound,
                within: mean <= bound + 3.0 * se,
            }
        })
        .collect();
    Ok(DecayCurve {
        elon_hat,
        c_ofer: constants.c_ofer,
        all_within: points.iter().all(|p| p.within),
        points,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AStatistics {
    pub epochs: u64,
    pub hits: u64,
    pub p_hat: f64,
    pub se: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// Pearson correlation of `(1{A_i}, 1{A_{i+1}})` within runs.
    pub lag1_correlation: f64,
    /// `1/√pairs`, the null standard error of the correlation.
    pub lag1_se: f64,
    pub pairs: u64,
    /// Fraction of `A_i` epochs whose next step gained at least 1/2.
    pub gain_fraction: Option<f64>,
}

/// Frequency, serial correlation and diameter gain of the `A_i` events.
pub fn a_statistics(ens: &Ensemble) -> Result<AStatistics, StatsError> {
    if ens.config.mode != SamplerMode::Rejection {
        return Err(StatsError::ModeMismatch);
    }
    let epochs: u64 = ens.runs.iter().map(|r| r.a_flags.len() as u64).sum();
    if epochs == 0 {
        return Err(StatsError::InsufficientData("no ladder epochs with a recorded first trial".into()));
    }
    let hits: u64 = ens.runs.iter().map(|r| r.a_flags.iter().filter(|&&a| a).count() as u64).sum();
    let gains: u64 = ens.runs.iter().map(|r| r.a_gains).sum();
    let p_hat = hits as f64 / epochs as f64;
    let (ci_lo, ci_hi) = clopper_pearson(hits, epochs, 1.0 - CI_LEVEL);

    let (mut sx, mut sy, mut sxx, mut syy, mut sxy, mut pairs) = (0.0, 0.0, 0.0, 0.0, 0.0, 0u64);
    for r in &ens.runs {
        for w in r.a_flags.windows(2) {
            let (x, y) = (f64::from(u8::from(w[0])), f64::from(u8::from(w[1])));
            sx += x;
            sy += y;
            sxx += x * x;
            syy += y * y;
            sxy += x * y;
            pairs += 1;
        }
    }
    let k = pairs as f64;
    let cov = sxy / k - (sx / k) * (sy / k);
    let vx = sxx / k - (sx / k).powi(2);
    let vy = syy / k - (sy / k).powi(2);
    let lag1_correlation = if pairs > 1 && vx > 0.0 && vy > 0.0 {
        cov / (vx * vy).sqrt()
    } else {
        0.0
    };

    Ok(AStatistics {
        epochs,
        hits,
        p_hat,
        se: (p_hat * (1.0 - p_hat) / epochs as f64).sqrt(),
        ci_lo,
        ci_hi,
        lag1_correlation,
        lag1_se: if pairs > 0 { 1.0 / k.sqrt() } else { f64::INFINITY },
        pairs,
        gain_fraction: (hits > 0).then(|| gains as f64 / hits as f64),
    })
}

/// Both samplers applied to one frozen walker state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerComparison {
    pub arc_len: f64,
    /// Offsets of the chosen direction from the arc start, direct vs rejection.
    pub ks: KsResult,
    pub mean_trials: f64,
    pub trials_se: f64,
    /// `2π / arc_len`, the mean of the geometric trial count.
    pub expected_trials: f64,
}

/// Draws `samples` directions from each sampler at `state` without moving it.
pub fn compare_samplers(state: &WalkState, samples: usize, seed: u64) -> Result<SamplerComparison, WalkError> {
    let cone = state.cone();
    let arc = cone.allowed_arc();
    let offset = |d| {
        let o = arc.start.ccw_to(d);
        // a direction a rounding error before the start belongs at offset 0
        if o > arc.length { 0.0 } else { o }
    };
    let mut rng = run_rng(seed, 0);
    let direct: Vec<f64> = (0..samples).map(|_| offset(sample_direct(&mut rng, &cone).chosen)).collect();
    let mut rng = run_rng(seed, 1);
    let mut rejection = Vec::with_capacity(samples);
    let mut trials = Vec::with_capacity(samples);
    for _ in 0..samples {
        let s = sample_rejection(&mut rng, &cone)?;
        rejection.push(offset(s.chosen));
        trials.push(f64::from(s.trials));
    }
    let t = Summary::of(&trials);
    Ok(SamplerComparison {
        arc_len: arc.length,
        ks: ks_two_sample(&direct, &rejection),
        mean_trials: t.mean,
        trials_se: t.se,
        expected_trials: TAU / arc.length,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::{run_ensemble, EnsembleConfig, RunSummary};
    use crate::observables::AnalysisOptions;

    fn fake(deltas: Vec<Vec<u32>>, flags: Vec<Vec<bool>>, mode: SamplerMode) -> Ensemble {
        let runs = deltas
            .into_iter()
            .zip(flags)
            .enumerate()
            .map(|(r, (deltas, a_flags))| RunSummary {
                run: r as u64,
                checkpoints: Vec::new(),
                ladder_count: deltas.len() + 1,
                a_gains: a_flags.iter().filter(|&&a| a).count() as u64,
                deltas,
                a_flags,
                m_lags: Default::default(),
                report: Default::default(),
            })
            .collect();
        Ensemble {
            config: EnsembleConfig {
                checkpoints: Vec::new(),
                ..EnsembleConfig::new(1, 0, 0, mode)
            },
            runs,
        }
    }

    #[test]
    fn summary_of_a_small_sample() {
        let s = Summary::of(&[3.0, 1.0, 2.0]);
        assert_eq!((s.count, s.mean, s.min, s.p50, s.max), (3, 2.0, 1.0, 2.0, 3.0));
        assert!((s.se - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn geometric_tail_has_its_own_rate() {
        // P[Δ ≥ l] = 2^{1-l} exactly for this multiset
        let mut d = Vec::new();
        for l in 1..=12u32 {
            d.extend(std::iter::repeat_n(l, 1 << (12 - l)));
        }
        d.push(12);
        let ens = fake(vec![d], vec![vec![]], SamplerMode::Direct);
        let t = delta_tails(&ens).unwrap();
        assert!(t.survival.windows(2).all(|w| w[0] >= w[1]));
        assert_eq!(t.survival[0], 1.0);
        assert!((t.fitted_rate + std::f64::consts::LN_2).abs() < 1e-12, "{}", t.fitted_rate);
        assert!(t.fit_r2 > 1.0 - 1e-12);
        assert_eq!(t.deciles.len(), 10);
    }

    #[test]
    fn small_pools_are_insufficient() {
        let ens = fake(vec![vec![1; 999]], vec![vec![]], SamplerMode::Direct);
        assert!(matches!(delta_tails(&ens), Err(StatsError::InsufficientData(_))));
    }

    #[test]
    fn a_statistics_count_and_correlate() {
        let flags = vec![vec![true, false, true, false, true, false], vec![false, false, true]];
        let ens = fake(vec![vec![], vec![]], flags.clone(), SamplerMode::Rejection);
        let a = a_statistics(&ens).unwrap();
        assert_eq!((a.epochs, a.hits, a.pairs), (9, 4, 7));
        assert!(a.lag1_correlation < 0.0);
        assert_eq!(a.gain_fraction, Some(1.0));
        let ens = fake(vec![vec![]], vec![vec![true]], SamplerMode::Direct);
        assert_eq!(a_statistics(&ens), Err(StatsError::ModeMismatch));
    }

    #[test]
    fn ldp_levels_are_nested() {
        let cfg = EnsembleConfig::new(20, 300, 5, SamplerMode::Direct);
        let ens = run_ensemble(&cfg, &AnalysisOptions::default()).unwrap();
        let cs = [0.05, 0.2, 0.5, 1.0];
        let curve = ldp_curve(&ens, &cs);
        for &n in cfg.checkpoints.iter() {
            let at: Vec<&LdpPoint> = curve.points.iter().filter(|p| p.n == n).collect();
            assert!(at.windows(2).all(|w| w[0].p_hat <= w[1].p_hat));
            assert_eq!(at[3].p_hat, 1.0);
            assert!(at.iter().all(|p| p.ci_lo <= p.p_hat && p.p_hat <= p.ci_hi));
        }
        let speed = estimate_speed(&ens);
        assert_eq!(speed[0].n, 1);
        assert!((speed[0].speed.min - 1.0).abs() <= 2.0 * f64::EPSILON);
        assert!((speed[0].speed.max - 1.0).abs() <= 2.0 * f64::EPSILON);
        for p in &speed {
            assert!(p.diameter_speed.min >= p.speed.min);
        }
    }

    #[test]
    fn decay_starts_at_one() {
        let cfg = EnsembleConfig::new(4, 500, 8, SamplerMode::Direct);
        let ens = run_ensemble(&cfg, &AnalysisOptions::default()).unwrap();
        let d = supermartingale_decay(&ens, PaperConstants::shared()).unwrap();
        assert_eq!((d.points[0].mean, d.points[0].se), (1.0, 0.0));
        assert!(d.points.len() > 5);
    }

    #[test]
    fn samplers_agree_at_the_first_corner() {
        let mut s = WalkState::new(3, SamplerMode::Direct);
        for _ in 0..2 {
            s.step().unwrap();
        }
        let c = compare_samplers(&s, 4000, 17).unwrap();
        assert!(c.arc_len < TAU);
        assert!(c.ks.p_value > 1e-4);
        assert!((c.mean_trials - c.expected_trials).abs() < 4.0 * c.trials_se);
    }
}
