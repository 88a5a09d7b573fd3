use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use super::checks::DriftPolicy;
use super::ladders::LadderRecord;
use super::replay_with;
use crate::drift::{drift_r, drift_sum, good_threshold, DriftResult, PaperConstants, BOUND_SLACK};
use crate::error::{ObservableError, QuadratureError};
use crate::geom::{angle_between, project_onto_line, Dir, Point2, EPS_GEOM};
use crate::hull::{ConvexHull, Location, Rank};

/// Frames whose radial drift is this close to the good threshold are flagged.
pub const BORDERLINE_BAND: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameAngles {
    pub phi1: f64,
    pub phi2: f64,
    pub psi1: f64,
    pub psi2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameDrift {
    pub r: DriftResult,
    /// Absent when only the radial drift was evaluated.
    pub d: Option<DriftResult>,
    pub sum: Option<DriftResult>,
}

/// Snapshot of `X_{τ_i+n}` relative to the diametral segment of epoch `i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LensFrame {
    pub i: usize,
    pub n: usize,
    /// Absolute step index `τ_i + n`.
    pub t: usize,
    pub r: f64,
    pub d_line: f64,
    pub z: Point2,
    /// Undefined at `n = 0`, on the diametral line, or on a degenerate hull.
    pub angles: Option<FrameAngles>,
    pub d_tau: f64,
    pub in_gamma_ball: bool,
    pub good: bool,
    pub good_sufficient: bool,
    pub borderline: bool,
    pub drift: Option<FrameDrift>,
}

/// Position of a boundary location along the vertex cycle.
fn cycle_position(loc: Location) -> Option<f64> {
    match loc {
        Location::Vertex(i) => Some(i as f64),
        Location::Edge(i) => Some(i as f64 + 0.5),
        Location::Degenerate => None,
    }
}

fn anchor_position(hull: &ConvexHull, birth: usize, p: Point2) -> Option<f64> {
    if let Some(i) = hull.index_of_birth(birth) {
        return Some(i as f64);
    }
    hull.locate(p).ok().and_then(cycle_position)
}

/// Boundary directions `(s1, s2)` at the walker: `s1` is the one whose
/// traversal of the boundary reaches `X_τ` before `X_k`.
fn boundary_directions(
    hull: &ConvexHull,
    loc: Location,
    anchors: [(usize, Point2); 2],
) -> Result<Option<(Dir, Dir)>, ()> {
    if hull.rank() != Rank::Full {
        return Ok(None);
    }
    let Some(here) = cycle_position(loc) else {
        return Ok(None);
    };
    let h = hull.len() as f64;
    let ahead = |q: f64| (q - here).rem_euclid(h);
    let pos_tau = anchor_position(hull, anchors[0].0, anchors[0].1).ok_or(())?;
    let pos_k = anchor_position(hull, anchors[1].0, anchors[1].1).ok_or(())?;
    let (a_tau, a_k) = (ahead(pos_tau), ahead(pos_k));
    if a_tau == 0.0 || a_k == 0.0 || a_tau == a_k {
        return Ok(None);
    }
    let cone = hull.cone_at(loc);
    // `dir_next` walks the boundary counterclockwise
    Ok(Some(if a_tau < a_k {
        (cone.dir_next, cone.dir_prev)
    } else {
        (cone.dir_prev, cone.dir_next)
    }))
}

/// Result of the frame pass: frames plus the number of frames whose anchors
/// `X_τ`, `X_k` could not be found on the boundary.
pub(crate) struct FramePass {
    pub frames: Vec<LensFrame>,
    pub anchors_lost: u64,
}

pub(crate) fn frame_pass(positions: &[Point2], ladders: &[LadderRecord]) -> Result<FramePass, ObservableError> {
    let mut frames = Vec::with_capacity(positions.len());
    let mut anchors_lost = 0u64;
    let mut epoch = 0usize;
    let mut err = None;
    replay_with(positions, |t, hull, loc| {
        if err.is_some() {
            return;
        }
        while epoch + 1 < ladders.len() && ladders[epoch + 1].tau <= t {
            epoch += 1;
        }
        let rec = &ladders[epoch];
        let (Some(k), Some(y)) = (rec.k, rec.center) else {
            return;
        };
        let n = t - rec.tau;
        let x = positions[t];
        let (x_tau, x_k) = (positions[rec.tau], positions[k]);
        let in_gamma_ball = rec.gamma_exit.is_none_or(|g| t < g);
        let base = LensFrame {
            i: rec.i,
            n,
            t,
            r: x.dist(y),
            d_line: 0.0,
            z: x_tau,
            angles: None,
            d_tau: rec.d_tau,
            in_gamma_ball,
            good: n == 0,
            good_sufficient: false,
            borderline: false,
            drift: None,
        };
        if n == 0 {
            frames.push(base);
            return;
        }
        let z = match project_onto_line(x, x_tau, x_k) {
            Ok(z) => z,
            Err(_) => {
                err = Some(ObservableError::DegenerateFrame { epoch: rec.i, step: n });
                return;
            }
        };
        let d_line = x.dist(z);
        let mut frame = LensFrame { z, d_line, ..base };
        match boundary_directions(hull, loc, [(rec.tau, x_tau), (k, x_k)]) {
            Err(()) => anchors_lost += 1,
            Ok(Some((s1, s2))) if d_line > EPS_GEOM && frame.r > EPS_GEOM => {
                let to_y = (y - x).direction().expect("r > 0");
                let to_z = (z - x).direction().expect("d_line > 0");
                frame.angles = Some(FrameAngles {
                    phi1: angle_between(s1, to_y),
                    phi2: angle_between(s2, to_y),
                    psi1: angle_between(s1, to_z),
                    psi2: angle_between(s2, to_z),
                });
            }
            Ok(_) => {}
        }
        frames.push(frame);
    });
    match err {
        Some(e) => Err(e),
        None => Ok(FramePass { frames, anchors_lost }),
    }
}

/// Frames for every epoch `i ≥ 1` and every observed `0 ≤ n < Δ_i`.
pub fn lens_frames(positions: &[Point2], ladders: &[LadderRecord]) -> Result<Vec<LensFrame>, ObservableError> {
    frame_pass(positions, ladders).map(|p| p.frames)
}

/// Evaluates drifts as requested by `policy` and sets the good flags.
pub fn good_flags(frames: &mut [LensFrame], policy: DriftPolicy) -> Result<(), QuadratureError> {
    let threshold = good_threshold();
    for f in frames.iter_mut() {
        f.good_sufficient = f.n >= 1 && f.in_gamma_ball && f.angles.is_some_and(|a| a.psi1 <= FRAC_PI_4);
        let Some(a) = f.angles else {
            f.good = f.n == 0;
            continue;
        };
        f.drift = match policy {
            DriftPolicy::All => {
                let (dr, dd, sum) = drift_sum(f.r, f.d_line, (a.phi1, a.phi2), (a.psi1, a.psi2))?;
                Some(FrameDrift {
                    r: dr,
                    d: Some(dd),
                    sum: Some(sum),
                })
            }
            DriftPolicy::GoodOnly if f.in_gamma_ball => Some(FrameDrift {
                r: drift_r(f.r, a.phi1, a.phi2)?,
                d: None,
                sum: None,
            }),
            DriftPolicy::GoodOnly => None,
        };
        let radial = f.drift.map(|d| d.r.value);
        f.borderline = radial.is_some_and(|v| (v - threshold).abs() <= BORDERLINE_BAND);
        f.good = f.n == 0 || (f.in_gamma_ball && radial.is_some_and(|v| v >= threshold - BOUND_SLACK));
    }
    Ok(())
}

/// `M_{i,n}` along one epoch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochTrack {
    pub i: usize,
    /// `M_{i,n}` for the observed `n < Δ_i`.
    pub values: Vec<f64>,
    /// `Δ_i` when the epoch closed inside the trajectory; `M_{i,n} = 0` from there on.
    pub closed_at: Option<usize>,
    /// Largest `n` with `τ_i + n` inside the trajectory.
    pub observed_until: usize,
}

impl EpochTrack {
    /// `M_{i,n}`, or `None` if `τ_i + n` lies beyond the trajectory.
    pub fn value(&self, n: usize) -> Option<f64> {
        if n > self.observed_until {
            None
        } else {
            Some(self.values.get(n).copied().unwrap_or(0.0))
        }
    }
}

/// Supermartingale values per epoch; frames must carry good flags and be
/// grouped by epoch in increasing `n`, as produced by [`lens_frames`].
pub fn supermartingale_track(
    frames: &[LensFrame],
    ladders: &[LadderRecord],
    steps: usize,
    constants: &PaperConstants,
) -> Vec<EpochTrack> {
    let mut out: Vec<EpochTrack> = Vec::new();
    let c = constants.c_alll;
    let mut r0 = 0.0;
    let mut goods = 0usize;
    for f in frames {
        if f.n == 0 {
            let rec = &ladders[f.i];
            out.push(EpochTrack {
                i: f.i,
                values: Vec::new(),
                closed_at: rec.delta,
                observed_until: steps - rec.tau,
            });
            r0 = f.r;
            goods = 0;
        }
        let track = out.last_mut().expect("epoch opened at n = 0");
        let r_shift = if f.n == 0 { 0.0 } else { f.r - r0 };
        let exponent = f.d_line + constants.beta * r_shift - 4.0 * goods as f64;
        track.values.push((-c * exponent).exp());
        if f.good {
            goods += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::ladders::ladders_from_positions;
    use crate::walk::{run_walk, SamplerMode};

    fn frames_for(seed: u64, steps: usize) -> (Vec<Point2>, Vec<LadderRecord>, Vec<LensFrame>) {
        let (_, t) = run_walk(steps, seed, SamplerMode::Direct).unwrap();
        let pos = t.positions();
        let l = ladders_from_positions(&pos, None);
        let f = lens_frames(&pos, &l).unwrap();
        (pos, l, f)
    }

    #[test]
    fn frame_zero_sits_at_half_diameter() {
        let (_, l, f) = frames_for(5, 1500);
        for fr in f.iter().filter(|f| f.n == 0) {
            assert!((fr.r - l[fr.i].d_tau / 2.0).abs() <= 1e-12 * l[fr.i].d_tau.max(1.0));
            assert!(fr.good && fr.angles.is_none());
        }
    }

    #[test]
    fn frames_cover_every_step_after_the_first_ladder() {
        let (pos, _, f) = frames_for(6, 800);
        assert_eq!(f.len(), pos.len() - 1);
        assert!(f.windows(2).all(|w| w[1].t == w[0].t + 1));
    }

    /// Epoch 1 with `X_k = X_0 = (-1, 0)`, `X_τ = X_1 = (1, 0)`, `Y = 0`.
    fn unit_lens_ladders() -> Vec<LadderRecord> {
        vec![
            LadderRecord {
                i: 0,
                tau: 0,
                k: None,
                center: None,
                d_tau: 0.0,
                delta: Some(1),
                sigma_exit: None,
                gamma_exit: None,
                a_event: None,
            },
            LadderRecord {
                i: 1,
                tau: 1,
                k: Some(0),
                center: Some(Point2::ORIGIN),
                d_tau: 2.0,
                delta: None,
                sigma_exit: None,
                gamma_exit: None,
                a_event: None,
            },
        ]
    }

    fn angles_at(walker: Point2) -> FrameAngles {
        let pts = [Point2::new(-1.0, 0.0), Point2::new(1.0, 0.0), walker];
        let f = lens_frames(&pts, &unit_lens_ladders()).unwrap();
        f.iter().find(|f| f.t == 2).unwrap().angles.unwrap()
    }

    #[test]
    fn isosceles_apex_has_equal_angles() {
        let a = angles_at(Point2::new(0.0, -0.5));
        assert!((a.phi1 - a.phi2).abs() < 1e-12, "{a:?}");
        assert!((a.psi1 - a.psi2).abs() < 1e-12, "{a:?}");
    }

    #[test]
    fn s1_is_the_edge_leading_back_to_x_tau() {
        // near X_τ the edge towards X_τ is steep, the one towards X_k almost flat
        let a = angles_at(Point2::new(0.8, -0.3));
        assert!((a.psi1 - (0.2f64 / 0.3).atan()).abs() < 1e-12, "{a:?}");
        assert!((a.psi2 - (0.3f64 / 1.8f64.hypot(0.3)).acos()).abs() < 1e-12, "{a:?}");
        let a = angles_at(Point2::new(-0.8, -0.3));
        assert!((a.psi2 - (0.2f64 / 0.3).atan()).abs() < 1e-12, "{a:?}");
    }

    #[test]
    fn good_flags_follow_their_definition() {
        let (_, _, mut f) = frames_for(8, 3000);
        good_flags(&mut f, DriftPolicy::All).unwrap();
        let thr = good_threshold();
        for fr in &f {
            if fr.n == 0 {
                assert!(fr.good);
                continue;
            }
            if !fr.in_gamma_ball {
                assert!(!fr.good);
            }
            if fr.good_sufficient {
                assert!(fr.good, "{fr:?}");
            }
            if let Some(d) = fr.drift {
                assert_eq!(fr.good, fr.in_gamma_ball && d.r.value >= thr - BOUND_SLACK);
            }
        }
    }

    #[test]
    fn supermartingale_starts_at_one_and_stays_positive() {
        let (pos, l, mut f) = frames_for(9, 3000);
        good_flags(&mut f, DriftPolicy::GoodOnly).unwrap();
        let tracks = supermartingale_track(&f, &l, pos.len() - 1, PaperConstants::shared());
        assert_eq!(tracks.len(), l.len() - 1);
        for tr in &tracks {
            assert_eq!(tr.values[0], 1.0);
            assert!(tr.values.iter().all(|&m| m > 0.0));
            if let Some(delta) = tr.closed_at {
                assert_eq!(tr.values.len(), delta);
                assert_eq!(tr.value(delta), Some(0.0));
            }
        }
    }
}
