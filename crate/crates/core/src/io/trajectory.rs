use std::io::Write;

use crate::drift::PaperConstants;
use crate::error::FileError;
use crate::walk::{SamplerMode, Trajectory, TrajectoryRow};

pub const FORMAT_VERSION: u32 = 1;
pub const COLUMNS: [&str; 8] = ["n", "x", "y", "d", "hull_size", "arc_len", "trials", "is_ladder"];

/// Round-trip rendering: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrajectoryHeader {
    pub version: u32,
    pub seed: u64,
    pub mode: SamplerMode,
    pub steps: usize,
    pub constants_digest: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryFile {
    pub header: TrajectoryHeader,
    /// `first_trials` is always absent: the file does not store them.
    pub trajectory: Trajectory,
}

impl TrajectoryFile {
    /// Structural problems: row count against the header, gaps in `n`,
    /// decreasing `d`.
    pub fn issues(&self) -> Vec<String> {
        let rows = &self.trajectory.rows;
        let mut out = Vec::new();
        if rows.len() != self.header.steps + 1 {
            out.push(format!("{} rows for steps = {}", rows.len(), self.header.steps));
        }
        if let Some(t) = rows.iter().enumerate().position(|(t, r)| r.n != t) {
            out.push(format!("row {t} has n = {}", rows[t].n));
        }
        if let Some(w) = rows.windows(2).position(|w| w[1].d < w[0].d) {
            out.push(format!("d decreases at n = {}", w + 1));
        }
        out
    }
}

pub fn write_trajectory<W: Write>(mut w: W, traj: &Trajectory) -> std::io::Result<()> {
    writeln!(w, "# rancher trajectory")?;
    writeln!(w, "# version={FORMAT_VERSION}")?;
    writeln!(w, "# seed={}", traj.seed)?;
    writeln!(w, "# mode={}", traj.mode)?;
    writeln!(w, "# steps={}", traj.steps())?;
    writeln!(w, "# constants={}", PaperConstants::shared().digest())?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(COLUMNS)?;
    for r in &traj.rows {
        csv.write_record([
            r.n.to_string(),
            fmt_f64(r.x),
            fmt_f64(r.y),
            fmt_f64(r.d),
            r.hull_size.to_string(),
            fmt_f64(r.arc_len),
            r.trials.to_string(),
            r.is_ladder.to_string(),
        ])?;
    }
    csv.flush()
}

pub fn trajectory_to_string(traj: &Trajectory) -> String {
    let mut buf = Vec::new();
    write_trajectory(&mut buf, traj).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

/// Parses a trajectory file; `path` only labels errors.
pub fn parse_trajectory(text: &str, path: &str) -> Result<TrajectoryFile, FileError> {
    let header_err = |msg: String| FileError::Header {
        path: path.to_string(),
        msg,
    };
    let mut version = None;
    let mut seed = None;
    let mut mode = None;
    let mut steps = None;
    let mut digest = String::new();
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        let Some((k, v)) = line[1..].trim().split_once('=') else {
            continue;
        };
        let v = v.trim();
        match k.trim() {
            "version" => version = v.parse::<u32>().ok(),
            "seed" => seed = v.parse::<u64>().ok(),
            "mode" => mode = Some(v.parse::<SamplerMode>().map_err(header_err)?),
            "steps" => steps = v.parse::<usize>().ok(),
            "constants" => digest = v.to_string(),
            _ => {}
        }
    }
    let version = version.ok_or_else(|| header_err("missing or malformed `version`".into()))?;
    if version != FORMAT_VERSION {
        return Err(header_err(format!("unsupported format version {version}")));
    }
    let header = TrajectoryHeader {
        version,
        seed: seed.ok_or_else(|| header_err("missing or malformed `seed`".into()))?,
        mode: mode.ok_or_else(|| header_err("missing `mode`".into()))?,
        steps: steps.ok_or_else(|| header_err("missing or malformed `steps`".into()))?,
        constants_digest: digest,
    };

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let cols = reader.headers().map_err(|e| header_err(e.to_string()))?;
    if cols.iter().ne(COLUMNS) {
        return Err(header_err(format!("expected columns {}", COLUMNS.join(","))));
    }
    let mut rows = Vec::with_capacity(header.steps + 1);
    for rec in reader.deserialize::<TrajectoryRow>() {
        let row = rec.map_err(|e| FileError::Parse {
            path: path.to_string(),
            line: e.position().map_or(0, |p| p.line() as usize),
            msg: e.to_string(),
        })?;
        if !(row.x.is_finite() && row.y.is_finite() && row.d.is_finite() && row.arc_len.is_finite()) {
            return Err(FileError::Parse {
                path: path.to_string(),
                line: 0,
                msg: format!("non-finite value in row n = {}", row.n),
            });
        }
        rows.push(row);
    }
    Ok(TrajectoryFile {
        trajectory: Trajectory {
            seed: header.seed,
            mode: header.mode,
            rows,
            first_trials: None,
        },
        header,
    })
}

pub fn read_trajectory(path: &std::path::Path) -> Result<TrajectoryFile, FileError> {
    let label = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| FileError::Io {
        path: label.clone(),
        source,
    })?;
    parse_trajectory(&text, &label)
}
