//! Command-line front end. Each command returns its process exit code.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::drift::PaperConstants;
use crate::io::{
    parse_checkpoints, read_trajectory, render_svg, trajectory_to_string, ConstantsBlock, SimConfig, StatsDocument,
    SvgOptions, VerifyDocument, DEFAULT_LDP_LEVELS,
};
use crate::montecarlo::{default_checkpoints, run_ensemble, EnsembleConfig};
use crate::observables::{analyze, AnalysisOptions, CheckReport};
use crate::walk::{run_walk, SamplerMode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INSUFFICIENT: i32 = 3;

const DEFAULT_VERIFY_RUNS: usize = 10;
const DEFAULT_STATS_RUNS: usize = 100;

#[derive(Parser, Debug)]
#[command(name = "rancher", version, about = "Planar random walk that avoids the interior of its past convex hull")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Simulate one walk and write its trajectory as CSV.
    Simulate(CommonArgs),
    /// Check every invariant on a stored trajectory or on fresh runs.
    Verify(InputArgs),
    /// Run an ensemble and write the statistics document as JSON.
    Stats(CommonArgs),
    /// Print the derived constants.
    Constants(CommonArgs),
    /// Draw a stored trajectory as SVG.
    Render(InputArgs),
}

#[derive(Args, Debug, Default)]
pub struct CommonArgs {
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub mode: Option<SamplerMode>,
    /// Comma-separated, strictly increasing step indices.
    #[arg(long, value_parser = checkpoints_arg)]
    pub checkpoints: Option<Vec<usize>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Tolerance for the invariant checks.
    #[arg(long)]
    pub tol: Option<f64>,
    /// key=value file with defaults for the flags above.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct InputArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Trajectory CSV written by `simulate`.
    pub input: Option<PathBuf>,
}

fn checkpoints_arg(s: &str) -> Result<Vec<usize>, String> {
    parse_checkpoints(s).map_err(|e| e.to_string())
}

struct Failure(i32, String);

type CmdResult = Result<i32, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure(EXIT_USAGE, msg.into())
}

impl CommonArgs {
    fn resolve(&self) -> Result<SimConfig, Failure> {
        let file = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
                SimConfig::parse(&text, &path.display().to_string()).map_err(|e| usage(e.to_string()))?
            }
            None => SimConfig::default(),
        };
        let flags = SimConfig {
            steps: self.steps,
            runs: self.runs,
            seed: self.seed,
            mode: self.mode,
            checkpoints: self.checkpoints.clone(),
            out: self.out.clone(),
            svg: self.svg.clone(),
            tol: self.tol,
        };
        let cfg = file.overlay(flags);
        cfg.validate().map_err(|e| usage(e.to_string()))?;
        Ok(cfg)
    }
}

fn emit(path: Option<&Path>, content: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, content).map_err(|e| usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report types serialize");
    s.push('\n');
    s
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let out = match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Constants(a) => cmd_constants(a),
        Command::Render(a) => cmd_render(a),
    };
    match out {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            eprintln!("rancher: {msg}");
            code
        }
    }
}

fn cmd_simulate(args: &CommonArgs) -> CmdResult {
    let cfg = args.resolve()?;
    let (_, traj) = run_walk(cfg.steps(), cfg.seed(), cfg.mode()).map_err(|e| Failure(EXIT_VIOLATION, e.to_string()))?;
    emit(cfg.out.as_deref(), &trajectory_to_string(&traj))?;
    if let Some(svg) = &cfg.svg {
        emit(Some(svg), &render_svg(&traj.positions(), &SvgOptions::default()))?;
    }
    Ok(EXIT_OK)
}

fn failed_checks(report: &CheckReport) -> Vec<(String, u64)> {
    report
        .violations
        .entries()
        .into_iter()
        .filter(|e| e.1 > 0)
        .map(|(k, v)| (k.to_string(), v))
        .collect()
}

fn cmd_verify(args: &InputArgs) -> CmdResult {
    let cfg = args.common.resolve()?;
    let opts = AnalysisOptions {
        tol: cfg.tol(),
        ..Default::default()
    };
    let constants = ConstantsBlock::current();
    let mut file_issues = Vec::new();
    let mut file_digest = None;
    let (source, seed, mode, trajectories, checks) = match &args.input {
        Some(path) => {
            let file = read_trajectory(path).map_err(|e| usage(e.to_string()))?;
            file_issues = file.issues();
            if !file.header.constants_digest.is_empty() && file.header.constants_digest != constants.digest {
                file_issues.push(format!(
                    "constants digest {} differs from {}",
                    file.header.constants_digest, constants.digest
                ));
            }
            file_digest = Some(file.header.constants_digest.clone());
            let checks = match analyze(&file.trajectory, &opts) {
                Ok(a) => a.report,
                Err(e) => {
                    file_issues.push(e.to_string());
                    CheckReport::default()
                }
            };
            let t = &file.trajectory;
            (path.display().to_string(), t.seed, t.mode, 1, checks)
        }
        None => {
            let ens_cfg = EnsembleConfig {
                runs: cfg.runs.unwrap_or(DEFAULT_VERIFY_RUNS),
                steps: cfg.steps(),
                master_seed: cfg.seed(),
                mode: cfg.mode(),
                checkpoints: Vec::new(),
            };
            let ens = run_ensemble(&ens_cfg, &opts).map_err(|e| Failure(EXIT_VIOLATION, e.to_string()))?;
            ("simulated".to_string(), cfg.seed(), cfg.mode(), ens_cfg.runs, ens.report())
        }
    };
    let failed = failed_checks(&checks);
    let ok = failed.is_empty() && file_issues.is_empty() && constants.verified;
    let doc = VerifyDocument {
        tool: "rancher".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        source,
        seed,
        mode: mode.to_string(),
        trajectories,
        constants,
        file_digest,
        file_issues,
        checks,
        failed_checks: failed,
        ok,
    };
    emit(cfg.out.as_deref(), &to_json(&doc))?;
    if ok {
        Ok(EXIT_OK)
    } else {
        eprintln!(
            "rancher: verification failed: {:?} {:?}",
            doc.failed_checks, doc.file_issues
        );
        Ok(EXIT_VIOLATION)
    }
}

fn cmd_stats(args: &CommonArgs) -> CmdResult {
    let cfg = args.resolve()?;
    let steps = cfg.steps();
    let ens_cfg = EnsembleConfig {
        runs: cfg.runs.unwrap_or(DEFAULT_STATS_RUNS),
        steps,
        master_seed: cfg.seed(),
        mode: cfg.mode(),
        checkpoints: cfg.checkpoints.clone().unwrap_or_else(|| default_checkpoints(steps)),
    };
    let opts = AnalysisOptions {
        tol: cfg.tol(),
        ..Default::default()
    };
    let ens = run_ensemble(&ens_cfg, &opts).map_err(|e| Failure(EXIT_VIOLATION, e.to_string()))?;
    let doc = StatsDocument::build(&ens, &DEFAULT_LDP_LEVELS);
    emit(cfg.out.as_deref(), &to_json(&doc))?;
    if doc.checks.violations.total() > 0 {
        eprintln!("rancher: invariant violations: {:?}", failed_checks(&doc.checks));
        Ok(EXIT_VIOLATION)
    } else if doc.insufficient_data() {
        eprintln!("rancher: some estimators had insufficient data; see the status fields");
        Ok(EXIT_INSUFFICIENT)
    } else {
        Ok(EXIT_OK)
    }
}

fn cmd_constants(args: &CommonArgs) -> CmdResult {
    let cfg = args.resolve()?;
    let block = ConstantsBlock::current();
    let c = &block.values;
    let text = match &cfg.out {
        Some(_) => to_json(&block),
        None => {
            let mut s = String::new();
            for (k, v) in [
                ("beta", c.beta),
                ("gamma", c.gamma),
                ("c_ekg", c.c_ekg),
                ("c_boun", c.c_boun),
                ("c_alll", c.c_alll),
                ("c_ofer", c.c_ofer),
                ("c_witri", c.c_witri),
                ("c_posi", c.c_posi),
                ("elon_hat", block.elon_hat),
            ] {
                s.push_str(&format!("{k} = {v:.16e}\n"));
            }
            s.push_str(&format!("digest = {}\nverified = {}\n", block.digest, block.verified));
            s
        }
    };
    emit(cfg.out.as_deref(), &text)?;
    if block.verified {
        Ok(EXIT_OK)
    } else {
        for (name, r) in PaperConstants::shared().residuals() {
            eprintln!("rancher: residual {name} = {r:e}");
        }
        Ok(EXIT_VIOLATION)
    }
}

fn cmd_render(args: &InputArgs) -> CmdResult {
    let cfg = args.common.resolve()?;
    let path = args.input.as_ref().ok_or_else(|| usage("render needs a trajectory file"))?;
    let file = read_trajectory(path).map_err(|e| usage(e.to_string()))?;
    let svg = render_svg(&file.trajectory.positions(), &SvgOptions::default());
    emit(cfg.svg.as_deref().or(cfg.out.as_deref()), &svg)?;
    Ok(EXIT_OK)
}
