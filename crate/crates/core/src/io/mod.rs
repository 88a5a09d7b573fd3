//! File formats: trajectory CSV, the key=value config file, JSON reports and SVG.

mod config;
mod report;
mod svg;
mod trajectory;

pub use config::{parse_checkpoints, SimConfig, DEFAULT_SEED, DEFAULT_STEPS, DEFAULT_TOL, KEYS};
pub use report::{ConstantsBlock, Section, StatsDocument, VerifyDocument, DEFAULT_LDP_LEVELS};
pub use svg::{render_svg, SvgOptions};
pub use trajectory::{
    fmt_f64, parse_trajectory, read_trajectory, trajectory_to_string, write_trajectory, TrajectoryFile,
    TrajectoryHeader, COLUMNS, FORMAT_VERSION,
};
