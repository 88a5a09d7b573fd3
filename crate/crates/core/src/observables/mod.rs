//! Trajectory post-processing: ladder epochs, lens frames, good steps, the
//! exponential supermartingale, `A_i` events and record-distance ladders.
//!
//! Everything here is recomputed from positions alone by replaying the hull,
//! so stored trajectories can be analysed exactly like fresh ones.

mod checks;
mod frames;
mod ladders;

pub use checks::{analyze, Analysis, AnalysisOptions, CheckReport, DriftPolicy, Violations};
pub use frames::{good_flags, lens_frames, supermartingale_track, EpochTrack, FrameAngles, FrameDrift, LensFrame};
pub use ladders::{a_events, extract_ladders, ladders_from_positions, max_ladders, LadderRecord, MaxLadderRecord, MaxLadders};

use crate::geom::Point2;
use crate::hull::{ConvexHull, DiameterState, Location};

/// Per-step state recovered by replaying the hull over a list of positions.
#[derive(Clone, Debug, Default)]
pub struct Replay {
    /// Diameter `d_t` after inserting `X_t`.
    pub d: Vec<f64>,
    pub hull_size: Vec<usize>,
    /// Allowed arc length at `X_{t-1}` for the step into `X_t` (`2π` at `t = 0`).
    pub arc_len: Vec<f64>,
    /// Birth index of the far diametral endpoint when `d` strictly increased at `t`.
    pub partner: Vec<Option<usize>>,
    /// Steps whose segment met the open interior of the previous hull.
    pub illegal_steps: Vec<usize>,
    /// Steps whose endpoint was reported strictly inside the previous hull.
    pub interior_insertions: Vec<usize>,
}

impl Replay {
    pub fn ladder_times(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(0).chain((1..self.d.len()).filter(|&t| self.partner[t].is_some()))
    }
}

/// Replays `positions`, calling `visit(t, hull, location)` after each insertion.
pub(crate) fn replay_with<F>(positions: &[Point2], mut visit: F) -> Replay
where
    F: FnMut(usize, &ConvexHull, Location),
{
    let n = positions.len();
    let mut out = Replay {
        d: Vec::with_capacity(n),
        hull_size: Vec::with_capacity(n),
        arc_len: Vec::with_capacity(n),
        partner: Vec::with_capacity(n),
        ..Default::default()
    };
    let mut hull = ConvexHull::new();
    let mut diam = DiameterState::default();
    let mut loc = Location::Degenerate;
    for (t, &p) in positions.iter().enumerate() {
        let arc = if t == 0 {
            std::f64::consts::TAU
        } else {
            let prev = positions[t - 1];
            if hull.segment_hits_interior(prev, p) {
                out.illegal_steps.push(t);
            }
            hull.cone_at(loc).allowed_arc().length
        };
        let partner = diam.update(&hull, p, t).map(|v| v.birth);
        loc = match hull.insert(p, t) {
            Ok(l) => l,
            Err(_) => {
                out.interior_insertions.push(t);
                hull.locate(p).unwrap_or(Location::Degenerate)
            }
        };
        out.d.push(diam.d);
        out.hull_size.push(hull.len());
        out.arc_len.push(arc);
        out.partner.push(partner);
        visit(t, &hull, loc);
    }
    out
}

/// Plain replay without a per-step visitor.
pub fn replay(positions: &[Point2]) -> Replay {
    replay_with(positions, |_, _, _| {})
}
