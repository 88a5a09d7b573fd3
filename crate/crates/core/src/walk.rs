//! The walk itself: allowed arcs, the two step samplers, and whole runs.
//!
//! Random streams: run `r` of an ensemble with master seed `s` draws from
//! ChaCha8 seeded with `s` on stream `r` ([`run_rng`]). Streams never
//! overlap, so results do not depend on how runs are scheduled.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::WalkError;
use crate::geom::{Arc, Dir, Point2};
use crate::hull::{ConvexHull, DiameterState, HullVertex, InteriorCone, Location};

/// Rejection loops longer than this are treated as a bug. The allowed arc is
/// at least half the circle, so the expected trial count is at most 2.
pub const MAX_TRIALS: u32 = 1_000_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SamplerMode {
    /// One uniform draw mapped onto the allowed arc.
    #[default]
    Direct,
    /// i.i.d. full-circle trials until the first legal one.
    Rejection,
}

impl fmt::Display for SamplerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SamplerMode::Direct => "direct",
            SamplerMode::Rejection => "rejection",
        })
    }
}

impl FromStr for SamplerMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "direct" => Ok(SamplerMode::Direct),
            "rejection" => Ok(SamplerMode::Rejection),
            other => Err(format!("unknown sampler mode `{other}` (expected direct or rejection)")),
        }
    }
}

/// Generator for run `run_index` of an ensemble seeded with `master_seed`.
pub fn run_rng(master_seed: u64, run_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(run_index);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepSample {
    pub chosen: Dir,
    pub allowed_arc_length: f64,
    pub trials: u32,
    /// First full-circle trial (rejection mode only).
    pub first_trial: Option<Dir>,
}

/// Uniform direction on the allowed arc from a single draw.
pub fn sample_direct<R: Rng + ?Sized>(rng: &mut R, cone: &InteriorCone) -> StepSample {
    let arc = cone.allowed_arc();
    let u: f64 = rng.random();
    StepSample {
        chosen: arc.at_fraction(u),
        allowed_arc_length: arc.length,
        trials: 1,
        first_trial: None,
    }
}

/// First legal direction among i.i.d. uniform full-circle trials.
pub fn sample_rejection<R: Rng + ?Sized>(rng: &mut R, cone: &InteriorCone) -> Result<StepSample, WalkError> {
    let arc_len = cone.allowed_arc().length;
    let mut first = None;
    for trial in 1..=MAX_TRIALS {
        let d = Dir::new(TAU * rng.random::<f64>());
        first.get_or_insert(d);
        if !cone.contains_open(d) {
            return Ok(StepSample {
                chosen: d,
                allowed_arc_length: arc_len,
                trials: trial,
                first_trial: first,
            });
        }
    }
    Err(WalkError::Internal(format!(
        "rejection sampler exceeded {MAX_TRIALS} trials (cone angle {})",
        cone.angle
    )))
}

/// Result of one executed step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOutcome {
    pub sample: StepSample,
    pub position: Point2,
    /// Far diametral endpoint when the diameter strictly increased.
    pub ladder_partner: Option<HullVertex>,
}

#[derive(Clone, Debug)]
pub struct WalkState {
    positions: Vec<Point2>,
    hull: ConvexHull,
    diam: DiameterState,
    loc: Location,
    rng: ChaCha8Rng,
    mode: SamplerMode,
}

impl WalkState {
    /// Walker at the origin with an explicit generator.
    pub fn with_rng(rng: ChaCha8Rng, mode: SamplerMode) -> Self {
        let mut hull = ConvexHull::new();
        let loc = hull
            .insert(Point2::ORIGIN, 0)
            .expect("empty hull accepts the origin");
        Self {
            positions: vec![Point2::ORIGIN],
            hull,
            diam: DiameterState::default(),
            loc,
            rng,
            mode,
        }
    }

    pub fn new(seed: u64, mode: SamplerMode) -> Self {
        Self::with_rng(run_rng(seed, 0), mode)
    }

    pub fn n(&self) -> usize {
        self.positions.len() - 1
    }

    pub fn position(&self) -> Point2 {
        *self.positions.last().expect("X_0 always present")
    }

    pub fn positions(&self) -> &[Point2] {
        &self.positions
    }

    pub fn hull(&self) -> &ConvexHull {
        &self.hull
    }

    pub fn diameter(&self) -> &DiameterState {
        &self.diam
    }

    pub fn mode(&self) -> SamplerMode {
        self.mode
    }

    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn cone(&self) -> InteriorCone {
        self.hull.cone_at(self.loc)
    }

    /// Closed set of legal step directions at `X_n`.
    pub fn allowed_arc(&self) -> Arc {
        self.cone().allowed_arc()
    }

    pub fn step(&mut self) -> Result<StepOutcome, WalkError> {
        match self.mode {
            SamplerMode::Direct => self.step_direct(),
            SamplerMode::Rejection => self.step_rejection(),
        }
    }

    pub fn step_direct(&mut self) -> Result<StepOutcome, WalkError> {
        let cone = self.cone();
        let sample = sample_direct(&mut self.rng, &cone);
        self.advance(sample)
    }

    pub fn step_rejection(&mut self) -> Result<StepOutcome, WalkError> {
        let cone = self.cone();
        let sample = sample_rejection(&mut self.rng, &cone)?;
        self.advance(sample)
    }

    fn advance(&mut self, sample: StepSample) -> Result<StepOutcome, WalkError> {
        let from = self.position();
        let p = from + sample.chosen.unit();
        let birth = self.positions.len();
        let ladder_partner = self.diam.update(&self.hull, p, birth);
        self.loc = self.hull.insert(p, birth)?;
        self.positions.push(p);
        Ok(StepOutcome {
            sample,
            position: p,
            ladder_partner,
        })
    }
}

/// One trajectory row; also the CSV record layout.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub n: usize,
    pub x: f64,
    pub y: f64,
    pub d: f64,
    pub hull_size: usize,
    /// Length of the allowed arc the step into `X_n` was drawn from.
    pub arc_len: f64,
    pub trials: u32,
    /// The diameter strictly increased at this step.
    pub is_ladder: bool,
}

impl TrajectoryRow {
    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub seed: u64,
    pub mode: SamplerMode,
    pub rows: Vec<TrajectoryRow>,
    /// Per row, the first rejection trial of the step into that row
    /// (`None` for row 0). Absent in direct mode and for parsed files.
    pub first_trials: Option<Vec<Option<Dir>>>,
}

impl Trajectory {
    pub fn positions(&self) -> Vec<Point2> {
        self.rows.iter().map(TrajectoryRow::position).collect()
    }

    pub fn steps(&self) -> usize {
        self.rows.len().saturating_sub(1)
    }
}

/// Runs `n_steps` steps from a fresh walker and records every row.
pub fn run_walk_with(mut state: WalkState, n_steps: usize, seed: u64) -> Result<(WalkState, Trajectory), WalkError> {
    let mode = state.mode;
    let mut rows = Vec::with_capacity(n_steps + 1);
    rows.push(TrajectoryRow {
        n: state.n(),
        x: state.position().x,
        y: state.position().y,
        d: state.diam.d,
        hull_size: state.hull.len(),
        arc_len: TAU,
        trials: 1,
        is_ladder: false,
    });
    let mut first_trials = (mode == SamplerMode::Rejection).then(|| {
        let mut v = Vec::with_capacity(n_steps + 1);
        v.push(None);
        v
    });
    for _ in 0..n_steps {
        let out = state.step()?;
        rows.push(TrajectoryRow {
            n: state.n(),
            x: out.position.x,
            y: out.position.y,
            d: state.diam.d,
            hull_size: state.hull.len(),
            arc_len: out.sample.allowed_arc_length,
            trials: out.sample.trials,
            is_ladder: out.ladder_partner.is_some(),
        });
        if let Some(ft) = first_trials.as_mut() {
            ft.push(out.sample.first_trial);
        }
    }
    Ok((
        state,
        Trajectory {
            seed,
            mode,
            rows,
            first_trials,
        },
    ))
}

/// Deterministic run for `(seed, mode, n_steps)`; uses stream 0 of `seed`.
pub fn run_walk(n_steps: usize, seed: u64, mode: SamplerMode) -> Result<(WalkState, Trajectory), WalkError> {
    run_walk_with(WalkState::new(seed, mode), n_steps, seed)
}
