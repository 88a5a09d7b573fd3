use serde::{Deserialize, Serialize};

use super::{replay, Replay};
use crate::drift::PaperConstants;
use crate::error::ObservableError;
use crate::geom::{Dir, Point2};
use crate::walk::{SamplerMode, Trajectory};

/// One ladder epoch `[τ_i, τ_{i+1})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderRecord {
    pub i: usize,
    pub tau: usize,
    /// Birth index of the far diametral endpoint at `τ_i` (absent for `i = 0`).
    pub k: Option<usize>,
    /// `Y_i`, midpoint of `X_{τ_i}` and `X_{k(i)}`.
    pub center: Option<Point2>,
    pub d_tau: f64,
    /// `Δ_i = τ_{i+1} − τ_i`; absent for the epoch still open at the end.
    pub delta: Option<usize>,
    /// First exit from the lens `B(X_τ, d) ∩ B(X_k, d)`, if observed.
    pub sigma_exit: Option<usize>,
    /// First exit from `B(X_τ, γ d)`, if observed.
    pub gamma_exit: Option<usize>,
    /// Rejection mode only.
    pub a_event: Option<bool>,
}

/// Ladder epochs of a trajectory, with `A_i` when first trials were recorded.
pub fn extract_ladders(traj: &Trajectory) -> Vec<LadderRecord> {
    let positions = traj.positions();
    let rep = replay(&positions);
    let mut ladders = ladders_from_replay(&positions, &rep);
    if let Some(ft) = traj.first_trials.as_deref() {
        fill_a_events(&mut ladders, &positions, ft);
    }
    ladders
}

pub fn ladders_from_positions(positions: &[Point2], first_trials: Option<&[Option<Dir>]>) -> Vec<LadderRecord> {
    let rep = replay(positions);
    let mut ladders = ladders_from_replay(positions, &rep);
    if let Some(ft) = first_trials {
        fill_a_events(&mut ladders, positions, ft);
    }
    ladders
}

pub(crate) fn ladders_from_replay(positions: &[Point2], rep: &Replay) -> Vec<LadderRecord> {
    let gamma = PaperConstants::shared().gamma;
    let times: Vec<usize> = rep.ladder_times().collect();
    let mut out = Vec::with_capacity(times.len());
    for (i, &tau) in times.iter().enumerate() {
        let next = times.get(i + 1).copied();
        let d = rep.d[tau];
        let x_tau = positions[tau];
        let k = rep.partner[tau];
        let center = k.map(|k| x_tau.midpoint(positions[k]));
        let later = || positions.iter().enumerate().skip(tau + 1);
        let sigma_exit = k.and_then(|k| {
            let x_k = positions[k];
            later()
                .find(|(_, p)| p.dist(x_tau) > d || p.dist(x_k) > d)
                .map(|(m, _)| m)
        });
        let gamma_exit = (i > 0)
            .then(|| later().find(|(_, p)| p.dist(x_tau) > gamma * d).map(|(m, _)| m))
            .flatten();
        out.push(LadderRecord {
            i,
            tau,
            k,
            center,
            d_tau: d,
            delta: next.map(|t| t - tau),
            sigma_exit,
            gamma_exit,
            a_event: None,
        });
    }
    out
}

pub(crate) fn a_event_at(rec: &LadderRecord, positions: &[Point2], first_trials: &[Option<Dir>]) -> Option<bool> {
    let k = rec.k?;
    let u = first_trials.get(rec.tau + 1).copied().flatten()?;
    let axis = (positions[rec.tau] - positions[k]) * (1.0 / rec.d_tau);
    Some(u.unit().dot(axis) >= 0.5)
}

fn fill_a_events(ladders: &mut [LadderRecord], positions: &[Point2], first_trials: &[Option<Dir>]) {
    for rec in ladders.iter_mut() {
        rec.a_event = a_event_at(rec, positions, first_trials);
    }
}

/// `A_i` flags for `i ≥ 1` (absent when the step after `τ_i` was not simulated).
pub fn a_events(traj: &Trajectory, ladders: &[LadderRecord]) -> Result<Vec<Option<bool>>, ObservableError> {
    let ft = match (traj.mode, traj.first_trials.as_deref()) {
        (SamplerMode::Rejection, Some(ft)) => ft,
        _ => return Err(ObservableError::ModeMismatch),
    };
    let positions = traj.positions();
    Ok(ladders
        .iter()
        .filter(|r| r.i >= 1)
        .map(|r| a_event_at(r, &positions, ft))
        .collect())
}

/// Ladder epoch of the running maximum `M_n = max_{m ≤ n} ‖X_m‖`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxLadderRecord {
    pub j: usize,
    pub mu: usize,
    pub m_mu: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MaxLadders {
    pub records: Vec<MaxLadderRecord>,
    /// `M_n` for every `n`.
    pub running_max: Vec<f64>,
    /// `i_n = sup{i : τ_i ≤ n}`.
    pub i_n: Vec<usize>,
    /// `j_n = sup{j : μ_j ≤ n}`.
    pub j_n: Vec<usize>,
}

pub fn max_ladders(positions: &[Point2], ladders: &[LadderRecord]) -> MaxLadders {
    let mut out = MaxLadders::default();
    let mut li = 0usize;
    for (n, p) in positions.iter().enumerate() {
        let r = p.norm();
        let is_record = match out.records.last() {
            None => true,
            Some(last) => r > last.m_mu,
        };
        if is_record {
            out.records.push(MaxLadderRecord {
                j: out.records.len(),
                mu: n,
                m_mu: r,
            });
        }
        while li + 1 < ladders.len() && ladders[li + 1].tau <= n {
            li += 1;
        }
        let m = out.records.last().map_or(0.0, |rec| rec.m_mu);
        out.running_max.push(m);
        out.i_n.push(li);
        out.j_n.push(out.records.len() - 1);
    }
    out
}
