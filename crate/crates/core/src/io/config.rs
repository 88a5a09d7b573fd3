use std::path::PathBuf;

use crate::error::ConfigError;
use crate::walk::SamplerMode;

pub const DEFAULT_STEPS: usize = 10_000;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_TOL: f64 = 1e-9;

/// Parameters shared by the subcommands. Every field is optional so flags
/// and a config file can be layered; [`SimConfig::overlay`] lets flags win.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SimConfig {
    pub steps: Option<usize>,
    pub runs: Option<usize>,
    pub seed: Option<u64>,
    pub mode: Option<SamplerMode>,
    pub checkpoints: Option<Vec<usize>>,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub tol: Option<f64>,
}

pub const KEYS: [&str; 8] = ["steps", "runs", "seed", "mode", "checkpoints", "out", "svg", "tol"];

fn invalid(key: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        msg: msg.into(),
    }
}

pub fn parse_checkpoints(s: &str) -> Result<Vec<usize>, ConfigError> {
    let v = s
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| invalid("checkpoints", format!("`{t}`: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if v.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("checkpoints", "must be strictly increasing"));
    }
    Ok(v)
}

impl SimConfig {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let mut c = SimConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    origin: origin.to_string(),
                    line: idx + 1,
                    msg: format!("expected key=value, got `{line}`"),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            let num = |e: std::num::ParseIntError| invalid(key, format!("`{value}`: {e}"));
            match key {
                "steps" => c.steps = Some(value.parse().map_err(num)?),
                "runs" => c.runs = Some(value.parse().map_err(num)?),
                "seed" => c.seed = Some(value.parse().map_err(num)?),
                "mode" => c.mode = Some(value.parse().map_err(|e: String| invalid(key, e))?),
                "checkpoints" => c.checkpoints = Some(parse_checkpoints(value)?),
                "out" => c.out = Some(PathBuf::from(value)),
                "svg" => c.svg = Some(PathBuf::from(value)),
                "tol" => {
                    c.tol = Some(
                        value
                            .parse()
                            .map_err(|e: std::num::ParseFloatError| invalid(key, format!("`{value}`: {e}")))?,
                    )
                }
                _ => {
                    return Err(ConfigError::UnknownKey {
                        origin: origin.to_string(),
                        key: key.to_string(),
                    })
                }
            }
        }
        Ok(c)
    }

    /// Fields set in `flags` replace those of `self`.
    pub fn overlay(self, flags: SimConfig) -> SimConfig {
        SimConfig {
            steps: flags.steps.or(self.steps),
            runs: flags.runs.or(self.runs),
            seed: flags.seed.or(self.seed),
            mode: flags.mode.or(self.mode),
            checkpoints: flags.checkpoints.or(self.checkpoints),
            out: flags.out.or(self.out),
            svg: flags.svg.or(self.svg),
            tol: flags.tol.or(self.tol),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.runs == Some(0) {
            return Err(invalid("runs", "must be positive"));
        }
        if let Some(t) = self.tol {
            if !(t.is_finite() && t > 0.0) {
                return Err(invalid("tol", "must be a positive number"));
            }
        }
        if let (Some(c), Some(&last)) = (self.checkpoints.as_ref(), self.checkpoints.as_ref().and_then(|c| c.last())) {
            if last > self.steps() {
                return Err(invalid("checkpoints", format!("{last} exceeds steps = {}", self.steps())));
            }
            if c.windows(2).any(|w| w[0] >= w[1]) {
                return Err(invalid("checkpoints", "must be strictly increasing"));
            }
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        self.steps.unwrap_or(DEFAULT_STEPS)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn mode(&self) -> SamplerMode {
        self.mode.unwrap_or_default()
    }

    pub fn tol(&self) -> f64 {
        self.tol.unwrap_or(DEFAULT_TOL)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_key() {
        let text = "# sweep\nsteps = 500\nruns=3\nseed=9 # trailing\nmode=rejection\ncheckpoints=10, 100,500\nout=a.csv\nsvg=a.svg\ntol=1e-8\n\n";
        let c = SimConfig::parse(text, "cfg").unwrap();
        assert_eq!(c.steps, Some(500));
        assert_eq!(c.runs, Some(3));
        assert_eq!(c.seed, Some(9));
        assert_eq!(c.mode, Some(SamplerMode::Rejection));
        assert_eq!(c.checkpoints, Some(vec![10, 100, 500]));
        assert_eq!(c.out, Some(PathBuf::from("a.csv")));
        assert_eq!(c.tol, Some(1e-8));
        assert!(c.validate().is_ok());
    }

    #[test]
    fn unknown_keys_and_bad_values_are_errors() {
        assert_eq!(
            SimConfig::parse("stepz=4", "cfg"),
            Err(ConfigError::UnknownKey {
                origin: "cfg".into(),
                key: "stepz".into()
            })
        );
        assert!(matches!(SimConfig::parse("steps", "cfg"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(SimConfig::parse("steps=-3", "cfg").is_err());
        assert!(SimConfig::parse("mode=lazy", "cfg").is_err());
        assert!(SimConfig::parse("checkpoints=5,2", "cfg").is_err());
        assert!(SimConfig::parse("tol=abc", "cfg").is_err());
        assert!(SimConfig::parse("runs=0", "cfg").unwrap().validate().is_err());
        assert!(SimConfig::parse("tol=-1", "cfg").unwrap().validate().is_err());
        assert!(SimConfig::parse("steps=10\ncheckpoints=5,20", "cfg").unwrap().validate().is_err());
    }

    #[test]
    fn flags_win() {
        let file = SimConfig::parse("steps=5\nseed=2\nmode=rejection", "cfg").unwrap();
        let flags = SimConfig {
            seed: Some(7),
            ..Default::default()
        };
        let c = file.overlay(flags);
        assert_eq!((c.steps(), c.seed(), c.mode()), (5, 7, SamplerMode::Rejection));
        let d = SimConfig::default();
        assert_eq!((d.steps(), d.seed(), d.mode(), d.tol()), (10_000, 1, SamplerMode::Direct, 1e-9));
    }
}
