use serde::{Deserialize, Serialize};

use crate::drift::PaperConstants;
use crate::error::StatsError;
use crate::montecarlo::{
    a_statistics, delta_tails, estimate_speed, ldp_curve, supermartingale_decay, AStatistics, DecayCurve, Ensemble,
    EnsembleConfig, LdpCurve, SpeedPoint, TailEstimate,
};
use crate::observables::CheckReport;

/// LDP levels reported by default.
pub const DEFAULT_LDP_LEVELS: [f64; 6] = [0.05, 0.1, 0.2, 0.25, 0.5, 1.0];

/// One estimator's output, or why it could not be computed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Section<T> {
    Ok { value: T },
    InsufficientData { reason: String },
    ModeMismatch { reason: String },
    Failed { reason: String },
}

impl<T> Section<T> {
    pub fn from_result(r: Result<T, StatsError>) -> Self {
        match r {
            Ok(value) => Section::Ok { value },
            Err(StatsError::InsufficientData(reason)) => Section::InsufficientData { reason },
            Err(e @ StatsError::ModeMismatch) => Section::ModeMismatch { reason: e.to_string() },
            Err(e) => Section::Failed { reason: e.to_string() },
        }
    }

    pub fn is_insufficient(&self) -> bool {
        matches!(self, Section::InsufficientData { .. })
    }

    pub fn value(&self) -> Option<&T> {
        match self {
            Section::Ok { value } => Some(value),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsBlock {
    pub values: PaperConstants,
    pub elon_hat: f64,
    pub digest: String,
    pub verified: bool,
}

impl ConstantsBlock {
    pub fn current() -> Self {
        let c = *PaperConstants::shared();
        Self {
            values: c,
            elon_hat: c.elon_hat(),
            digest: c.digest(),
            verified: c.verify(1e-12),
        }
    }
}

/// Decay points kept in the document: every lag below 64, then lags
/// spaced by about 5%. Verdicts are taken over all lags first.
fn thin(curve: DecayCurve) -> DecayCurve {
    let mut next = 0usize;
    let points = curve
        .points
        .into_iter()
        .filter(|p| {
            let keep = p.n >= next;
            if keep {
                next = if p.n < 64 { p.n + 1 } else { p.n + p.n / 20 };
            }
            keep || !p.within
        })
        .collect();
    DecayCurve { points, ..curve }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsDocument {
    pub tool: String,
    pub version: String,
    pub config: EnsembleConfig,
    pub constants: ConstantsBlock,
    pub checks: CheckReport,
    pub speed: Vec<SpeedPoint>,
    pub tails: Section<TailEstimate>,
    pub ldp_levels: Vec<f64>,
    pub ldp: LdpCurve,
    pub supermartingale: Section<DecayCurve>,
    pub a_statistics: Section<AStatistics>,
}

impl StatsDocument {
    pub fn build(ens: &Ensemble, ldp_levels: &[f64]) -> Self {
        let constants = ConstantsBlock::current();
        Self {
            tool: "rancher".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config: ens.config.clone(),
            checks: ens.report(),
            speed: estimate_speed(ens),
            tails: Section::from_result(delta_tails(ens)),
            ldp_levels: ldp_levels.to_vec(),
            ldp: ldp_curve(ens, ldp_levels),
            supermartingale: Section::from_result(supermartingale_decay(ens, &constants.values).map(thin)),
            a_statistics: Section::from_result(a_statistics(ens)),
            constants,
        }
    }

    pub fn insufficient_data(&self) -> bool {
        self.tails.is_insufficient() || self.supermartingale.is_insufficient() || self.a_statistics.is_insufficient()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyDocument {
    pub tool: String,
    pub version: String,
    /// `simulated` or the input path.
    pub source: String,
    pub seed: u64,
    pub mode: String,
    pub trajectories: usize,
    pub constants: ConstantsBlock,
    /// Digest stored in the input file, when one was read.
    pub file_digest: Option<String>,
    pub file_issues: Vec<String>,
    pub checks: CheckReport,
    /// Violation counters by name, nonzero entries only.
    pub failed_checks: Vec<(String, u64)>,
    pub ok: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::{run_ensemble, DecayPoint};
    use crate::observables::AnalysisOptions;
    use crate::walk::SamplerMode;

    #[test]
    fn tiny_ensembles_flag_missing_sections() {
        let cfg = EnsembleConfig::new(1, 50, 1, SamplerMode::Direct);
        let ens = run_ensemble(&cfg, &AnalysisOptions::default()).unwrap();
        let doc = StatsDocument::build(&ens, &DEFAULT_LDP_LEVELS);
        assert!(!doc.speed.is_empty());
        assert!(doc.tails.is_insufficient());
        assert!(matches!(doc.a_statistics, Section::ModeMismatch { .. }));
        assert!(doc.insufficient_data());
        let json = serde_json::to_value(&doc).unwrap();
        assert_eq!(json["tails"]["status"], "insufficient_data");
        assert_eq!(json["speed"][0]["n"], 1);
        assert_eq!(json["constants"]["digest"].as_str().unwrap().len(), 16);
    }

    #[test]
    fn thinning_keeps_early_lags_and_failures() {
        let mk = |n, within| DecayPoint {
            n,
            epochs: 100,
            mean: 0.5,
            se: 0.0,
            bound: 1.0,
            within,
        };
        let curve = DecayCurve {
            elon_hat: 1.0,
            c_ofer: 0.0,
            points: (0..1000).map(|n| mk(n, n != 777)).collect(),
            all_within: false,
        };
        let t = thin(curve);
        let ns: Vec<usize> = t.points.iter().map(|p| p.n).collect();
        assert!(ns[..64].iter().copied().eq(0..64));
        assert!(ns.contains(&777));
        assert!(ns.len() < 150);
        assert!(!t.all_within);
    }
}
