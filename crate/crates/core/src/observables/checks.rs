use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use super::frames::{frame_pass, good_flags, supermartingale_track, EpochTrack, LensFrame};
use super::ladders::{a_event_at, ladders_from_replay, max_ladders, LadderRecord, MaxLadders};
use super::{replay, Replay};
use crate::drift::{PaperConstants, MAX_QUADRATURE_ERROR};
use crate::error::ObservableError;
use crate::geom::Point2;
use crate::walk::{SamplerMode, Trajectory, TrajectoryRow};

/// Which drift integrals to evaluate on each frame.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftPolicy {
    /// Radial, line and joint drift on every frame with defined angles.
    #[default]
    All,
    /// Radial drift inside the γ-ball only: enough for the good flags.
    GoodOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    /// Tolerance for the geometric identities and ladder relations.
    pub tol: f64,
    pub drift: DriftPolicy,
    pub keep_frames: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            drift: DriftPolicy::All,
            keep_frames: true,
        }
    }
}

macro_rules! counters {
    ($(#[$meta:meta])* $name:ident { $($(#[$fmeta:meta])* $field:ident),* $(,)? }) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
        pub struct $name {
            $($(#[$fmeta])* pub $field: u64,)*
        }

        impl $name {
            pub fn merge(&mut self, other: &Self) {
                $(self.$field += other.$field;)*
            }

            pub fn entries(&self) -> Vec<(&'static str, u64)> {
                vec![$((stringify!($field), self.$field)),*]
            }

            pub fn total(&self) -> u64 {
                0 $(+ self.$field)*
            }
        }
    };
}

counters! {
    /// Invariant violations; every field is zero on a healthy run.
    Violations {
        /// φ₁+φ₂ = ψ₁+ψ₂ ≤ π.
        angle_sum,
        /// |φ₁−ψ₁| = |φ₂−ψ₂| ≤ π/2.
        angle_difference,
        /// R ≤ d_τ.
        radius_exceeds_diameter,
        /// D ≤ R.
        line_distance_exceeds_radius,
        drift_radial,
        drift_line,
        drift_joint,
        quadrature_error,
        /// τ_{i+1} ≤ σ_{i+1}.
        lens_exit_order,
        /// γ_{i+1} ≥ τ_i + ⌈γ d_τ⌉.
        gamma_exit_bound,
        /// d_τ = ‖X_τ − X_k‖.
        ladder_distance,
        /// d constant inside an epoch and strictly larger at the next ladder.
        ladder_constancy,
        /// A_i ⟹ d_{τ+1} ≥ d_τ + 1/2.
        a_event_gain,
        good_sufficient_not_good,
        /// M_n ≤ d_n ≤ 2 M_n.
        record_sandwich,
        unit_step,
        illegal_step,
        diameter_increment,
        interior_insertion,
        /// X_τ or X_k missing from the boundary inside its epoch.
        anchors_lost,
        /// Stored columns that disagree with the replay.
        column_mismatch,
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub steps: u64,
    pub frames: u64,
    pub frames_with_angles: u64,
    pub drift_evaluations: u64,
    pub borderline_frames: u64,
    pub good_frames: u64,
    pub good_sufficient_frames: u64,
    pub a_events_checked: u64,
    pub max_quadrature_error: f64,
    pub violations: Violations,
}

impl CheckReport {
    pub fn merge(&mut self, o: &CheckReport) {
        self.steps += o.steps;
        self.frames += o.frames;
        self.frames_with_angles += o.frames_with_angles;
        self.drift_evaluations += o.drift_evaluations;
        self.borderline_frames += o.borderline_frames;
        self.good_frames += o.good_frames;
        self.good_sufficient_frames += o.good_sufficient_frames;
        self.a_events_checked += o.a_events_checked;
        self.max_quadrature_error = self.max_quadrature_error.max(o.max_quadrature_error);
        self.violations.merge(&o.violations);
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Analysis {
    pub ladders: Vec<LadderRecord>,
    /// Empty unless [`AnalysisOptions::keep_frames`] is set.
    pub frames: Vec<LensFrame>,
    pub records: MaxLadders,
    pub tracks: Vec<EpochTrack>,
    pub report: CheckReport,
}

/// Replays a trajectory and runs every observable and invariant check on it.
pub fn analyze(traj: &Trajectory, opts: &AnalysisOptions) -> Result<Analysis, ObservableError> {
    let positions = traj.positions();
    let rep = replay(&positions);
    let mut ladders = ladders_from_replay(&positions, &rep);
    let first_trials = match traj.mode {
        SamplerMode::Rejection => traj.first_trials.as_deref(),
        SamplerMode::Direct => None,
    };
    if let Some(ft) = first_trials {
        for rec in ladders.iter_mut().filter(|r| r.i >= 1) {
            rec.a_event = a_event_at(rec, &positions, ft);
        }
    }

    let mut report = CheckReport {
        steps: traj.steps() as u64,
        ..Default::default()
    };
    let v = &mut report.violations;
    check_steps(&positions, &rep, v);
    check_columns(traj, &rep, v, opts.tol);
    check_ladders(&positions, &traj.rows, &ladders, v, opts.tol);

    let pass = frame_pass(&positions, &ladders)?;
    report.violations.anchors_lost += pass.anchors_lost;
    let mut frames = pass.frames;
    good_flags(&mut frames, opts.drift)?;
    for f in &frames {
        check_frame(f, &mut report, opts.tol);
    }
    report.a_events_checked = ladders.iter().filter(|r| r.a_event.is_some()).count() as u64;

    let records = max_ladders(&positions, &ladders);
    for (n, &m) in records.running_max.iter().enumerate() {
        let d = rep.d[n];
        if m > d + opts.tol || d > 2.0 * m + opts.tol {
            report.violations.record_sandwich += 1;
        }
    }

    let tracks = supermartingale_track(&frames, &ladders, traj.steps(), PaperConstants::shared());
    if !opts.keep_frames {
        frames = Vec::new();
    }
    Ok(Analysis {
        ladders,
        frames,
        records,
        tracks,
        report,
    })
}

/// Rounding slack for quantities of magnitude `scale`: the absolute bound
/// `1e-12` only holds while coordinates stay below a few thousand.
fn step_slack(scale: f64) -> f64 {
    1e-12f64.max(8.0 * f64::EPSILON * scale)
}

fn check_steps(positions: &[Point2], rep: &Replay, v: &mut Violations) {
    for t in 1..positions.len() {
        let (a, b) = (positions[t - 1], positions[t]);
        let scale = a.x.abs().max(a.y.abs()).max(b.x.abs()).max(b.y.abs());
        if ((b - a).norm() - 1.0).abs() > step_slack(scale) {
            v.unit_step += 1;
        }
        let inc = rep.d[t] - rep.d[t - 1];
        if !(0.0..=1.0 + step_slack(rep.d[t])).contains(&inc) {
            v.diameter_increment += 1;
        }
    }
    v.illegal_step += rep.illegal_steps.len() as u64;
    v.interior_insertion += rep.interior_insertions.len() as u64;
}

fn check_columns(traj: &Trajectory, rep: &Replay, v: &mut Violations, tol: f64) {
    if traj.rows.len() != rep.d.len() {
        v.column_mismatch += 1;
        return;
    }
    for (t, row) in traj.rows.iter().enumerate() {
        let ok = row.n == t
            && (row.d - rep.d[t]).abs() <= tol
            && row.hull_size == rep.hull_size[t]
            && row.is_ladder == rep.partner[t].is_some()
            && (row.arc_len - rep.arc_len[t]).abs() <= tol
            && row.trials >= 1
            && (traj.mode == SamplerMode::Rejection || row.trials == 1);
        if !ok {
            v.column_mismatch += 1;
        }
    }
}

fn check_ladders(positions: &[Point2], rows: &[TrajectoryRow], ladders: &[LadderRecord], v: &mut Violations, tol: f64) {
    let gamma = PaperConstants::shared().gamma;
    for (idx, rec) in ladders.iter().enumerate() {
        if let Some(k) = rec.k {
            if (rec.d_tau - positions[rec.tau].dist(positions[k])).abs() > tol {
                v.ladder_distance += 1;
            }
        }
        if rec.i >= 1 {
            match (rec.delta, rec.sigma_exit) {
                (Some(delta), Some(s)) if rec.tau + delta > s => v.lens_exit_order += 1,
                (None, Some(_)) => v.lens_exit_order += 1,
                _ => {}
            }
            if let Some(g) = rec.gamma_exit {
                let floor = rec.tau as f64 + (gamma * rec.d_tau - tol).ceil();
                if (g as f64) < floor {
                    v.gamma_exit_bound += 1;
                }
            }
        }
        if rows.len() == positions.len() {
            let end = ladders.get(idx + 1).map_or(rows.len(), |r| r.tau);
            let flat = rows[rec.tau..end].iter().all(|r| r.d == rows[rec.tau].d);
            let jumps = end == rows.len() || rows[end].d > rows[rec.tau].d;
            if !(flat && jumps) {
                v.ladder_constancy += 1;
            }
            if rec.a_event == Some(true) && rec.tau + 1 < rows.len() {
                if rows[rec.tau + 1].d < rec.d_tau + 0.5 - tol {
                    v.a_event_gain += 1;
                }
            }
        }
    }
}

fn check_frame(f: &LensFrame, report: &mut CheckReport, tol: f64) {
    report.frames += 1;
    let v = &mut report.violations;
    if f.r > f.d_tau + tol {
        v.radius_exceeds_diameter += 1;
    }
    if f.d_line > f.r + tol {
        v.line_distance_exceeds_radius += 1;
    }
    if f.good {
        report.good_frames += 1;
    }
    if f.good_sufficient {
        report.good_sufficient_frames += 1;
        if !f.good {
            v.good_sufficient_not_good += 1;
        }
    }
    if f.borderline {
        report.borderline_frames += 1;
    }
    if let Some(a) = f.angles {
        report.frames_with_angles += 1;
        let (phi, psi) = (a.phi1 + a.phi2, a.psi1 + a.psi2);
        if (phi - psi).abs() > tol || phi > PI + tol {
            v.angle_sum += 1;
        }
        let (d1, d2) = ((a.phi1 - a.psi1).abs(), (a.phi2 - a.psi2).abs());
        if (d1 - d2).abs() > tol || d1 > FRAC_PI_2 + tol {
            v.angle_difference += 1;
        }
    }
    if let Some(d) = f.drift {
        report.drift_evaluations += 1;
        let mut qe = d.r.quadrature_error;
        if !d.r.satisfied {
            v.drift_radial += 1;
        }
        if let Some(dd) = d.d {
            qe = qe.max(dd.quadrature_error);
            if !dd.satisfied {
                v.drift_line += 1;
            }
        }
        if d.sum.is_some_and(|s| !s.satisfied) {
            v.drift_joint += 1;
        }
        if qe > MAX_QUADRATURE_ERROR {
            v.quadrature_error += 1;
        }
        report.max_quadrature_error = report.max_quadrature_error.max(qe);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::run_walk;

    #[test]
    fn healthy_walks_have_no_violations() {
        for (seed, mode) in [(1, SamplerMode::Direct), (2, SamplerMode::Rejection)] {
            let (_, t) = run_walk(4000, seed, mode).unwrap();
            let a = analyze(&t, &AnalysisOptions::default()).unwrap();
            assert_eq!(a.report.violations.total(), 0, "{:?}", a.report.violations);
            let stepped = a.frames.iter().filter(|f| f.n >= 1).count();
            assert!(stepped > 1000);
            assert_eq!(a.report.frames_with_angles as usize, stepped);
            assert_eq!(a.report.drift_evaluations, a.report.frames_with_angles);
        }
    }

    #[test]
    fn tampered_row_is_caught() {
        let (_, mut t) = run_walk(500, 4, SamplerMode::Direct).unwrap();
        t.rows[250].x += 1e-3;
        let a = analyze(&t, &AnalysisOptions::default()).unwrap();
        assert!(a.report.violations.unit_step > 0);
        assert!(a.report.violations.total() > 0);

        let (_, mut t) = run_walk(500, 4, SamplerMode::Direct).unwrap();
        t.rows[100].d += 0.25;
        let a = analyze(&t, &AnalysisOptions::default()).unwrap();
        assert!(a.report.violations.column_mismatch > 0);
    }

    #[test]
    fn counters_merge_fieldwise() {
        let mut a = Violations {
            angle_sum: 1,
            ..Default::default()
        };
        let b = Violations {
            angle_sum: 2,
            unit_step: 5,
            ..Default::default()
        };
        a.merge(&b);
        assert_eq!((a.angle_sum, a.unit_step, a.total()), (3, 5, 8));
    }
}
