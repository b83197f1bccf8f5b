//! The `sketchedit` command-line tool.
//!
//! Failures print one line `sketchedit: error class=<Class>: <message>` on
//! standard error. `render` exits with 2 when the sequence renders no solid;
//! every other failure exits with 1.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use sketchedit_core::engine::{self, EditResult};
use sketchedit_core::geom::{render, GeomError};
use sketchedit_core::planner::{relative_scores, select_segments};
use sketchedit_core::{
    Ablation, EngineConfig, EngineError, GenPolicy, Granularity, GridSpec, MetricsReport, PlanConfig,
};
use thiserror::Error;

use crate::corpus::{read_corpus, write_corpus, CorpusError};
use crate::eval::{eval_report, evaluate, EvalConfig};
use crate::external::ExternalGenerator;
use crate::format::{looks_like_grid, read_grid, read_sequence, write_atomic, write_grid, write_sequence, FormatError};
use crate::report::{edit_sections, metrics_section, Report, Section};
use crate::synth::{synth, SynthError, SynthSpec};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("sequence renders no solid")]
    RenderInvalid,
    #[error(transparent)]
    Geometry(GeomError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("{0}")]
    Usage(String),
}

impl From<GeomError> for CliError {
    fn from(e: GeomError) -> Self {
        match e {
            GeomError::RenderInvalid => CliError::RenderInvalid,
            e => CliError::Geometry(e),
        }
    }
}

impl CliError {
    /// Stable name of the failure, for scripts.
    pub fn class(&self) -> &'static str {
        match self {
            CliError::Format(FormatError::Io { .. }) => "IoError",
            CliError::Format(FormatError::Parse { .. }) => "ParseError",
            CliError::Format(FormatError::BadGrid(_)) => "GridFormatError",
            CliError::RenderInvalid => "RenderInvalid",
            CliError::Geometry(_) => "GeometryError",
            CliError::Engine(_) => "EngineError",
            CliError::Synth(SynthError::ExhaustedAttempts { .. }) => "ExhaustedAttempts",
            CliError::Synth(_) => "InvalidSpec",
            CliError::Corpus(_) => "CorpusError",
            CliError::Usage(_) => "UsageError",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::RenderInvalid => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "sketchedit", version, about = "Geometry-driven editing of sketch-extrude sequences")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Voxels per axis.
    #[arg(long, env = "SKETCHEDIT_RES", default_value_t = 32)]
    pub res: usize,
    /// Truncation distance.
    #[arg(long, default_value_t = 0.2)]
    pub tau: f64,
}

impl GridArgs {
    fn spec(&self) -> Result<GridSpec, CliError> {
        Ok(GridSpec::new(self.res, self.tau)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AblateArg {
    Plan,
    Verify,
    Queue,
}

impl From<AblateArg> for Ablation {
    fn from(a: AblateArg) -> Self {
        match a {
            AblateArg::Plan => Ablation::Plan,
            AblateArg::Verify => Ablation::Verify,
            AblateArg::Queue => Ablation::Queue,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GranularityArg {
    Primitive,
    Loop,
    Pair,
}

impl From<GranularityArg> for Granularity {
    fn from(g: GranularityArg) -> Self {
        match g {
            GranularityArg::Primitive => Granularity::Primitive,
            GranularityArg::Loop => Granularity::Loop,
            GranularityArg::Pair => Granularity::Pair,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    /// Maximum plan/generate/verify rounds.
    #[arg(long, default_value_t = 10)]
    pub rounds: usize,
    /// Candidates per round.
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    /// Priority queue capacity.
    #[arg(long, default_value_t = 5)]
    pub queue: usize,
    #[arg(long, env = "SKETCHEDIT_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = GranularityArg::Primitive)]
    pub granularity: GranularityArg,
    /// Replace one stage of the loop with a random stand-in.
    #[arg(long, value_enum)]
    pub ablate: Option<AblateArg>,
}

impl SearchArgs {
    fn engine(&self, spec: GridSpec) -> EngineConfig {
        EngineConfig {
            max_rounds: self.rounds,
            n: self.n,
            queue_capacity: self.queue,
            seed: self.seed,
            spec,
            ablation: self.ablate.map_or(Ablation::None, Ablation::from),
            ..EngineConfig::default()
        }
    }

    fn plan(&self) -> PlanConfig {
        PlanConfig { granularity: self.granularity.into(), ..PlanConfig::default() }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a sequence to a tSDF file (`.grid` for the text form).
    Render {
        seq: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Edit a sequence towards a target shape.
    Edit {
        seq: PathBuf,
        target: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long)]
        report: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        /// Shell command of an external infilling process.
        #[arg(long)]
        generator_cmd: Option<String>,
        /// Per-request timeout of the external process, in seconds.
        #[arg(long, default_value_t = 30.0)]
        generator_timeout: f64,
    },
    /// Print the planner's influence table.
    Inspect {
        seq: PathBuf,
        target: PathBuf,
        #[arg(long, value_enum, default_value_t = GranularityArg::Primitive)]
        granularity: GranularityArg,
        /// Near-surface band half-width in voxels.
        #[arg(long, default_value_t = PlanConfig::default().band_width)]
        band: u32,
    },
    /// Metrics of a sequence against another sequence or a tSDF file.
    Metrics {
        seq: PathBuf,
        other: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Generate a synthetic triplet corpus.
    Synth {
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Edit every triplet of a corpus and report aggregate metrics.
    Eval {
        dir: PathBuf,
        #[arg(long)]
        report: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
    },
}

fn write_report(path: &Path, report: &Report) -> Result<(), CliError> {
    Ok(write_atomic(path, report.to_string().as_bytes())?)
}

pub fn run_edit(
    seq: &Path,
    target: &Path,
    search: &SearchArgs,
    generator_cmd: Option<&str>,
    timeout: Duration,
) -> Result<EditResult, CliError> {
    let original = read_sequence(seq)?;
    let target = read_grid(target)?;
    let cfg = search.engine(*target.spec());
    let (plan, policy) = (search.plan(), GenPolicy::default());
    let result = match generator_cmd {
        Some(cmd) => {
            let mut generator = ExternalGenerator::new(cmd).with_timeout(timeout);
            engine::run_with(&mut generator, &original, &target, &cfg, &plan, &policy)?
        }
        None => engine::run(&original, &target, &cfg, &plan, &policy)?,
    };
    Ok(result)
}

/// Runs one command, writing its outputs; returns what goes to stdout.
pub fn execute(command: &Command) -> Result<String, CliError> {
    match command {
        Command::Render { seq, out, grid } => {
            let s = read_sequence(seq)?;
            let g = render(&s, &grid.spec()?)?;
            write_grid(out, &g)?;
            Ok(String::new())
        }
        Command::Edit { seq, target, out, report, search, generator_cmd, generator_timeout } => {
            if !(*generator_timeout > 0.0) {
                return Err(CliError::Usage("--generator-timeout must be positive".into()));
            }
            let timeout = Duration::from_secs_f64(*generator_timeout);
            let result = run_edit(seq, target, search, generator_cmd.as_deref(), timeout)?;
            write_sequence(out, &result.final_seq)?;
            let mut r = Report::default();
            let mut run = Section::new("run");
            run.put("command", "edit")
                .put("seed", search.seed)
                .put("generator", if generator_cmd.is_some() { "external" } else { "surrogate" })
                .put("ablation", search.ablate.map_or(Ablation::None, Ablation::from).name());
            r.push(run);
            edit_sections(&result).into_iter().for_each(|s| r.push(s));
            write_report(report, &r)?;
            info!("edit finished after {} round(s): {:?}", result.rounds_used, result.stop);
            Ok(String::new())
        }
        Command::Inspect { seq, target, granularity, band } => {
            let s = read_sequence(seq)?;
            let target = read_grid(target)?;
            let current = render(&s, target.spec())?;
            let plan = PlanConfig { granularity: (*granularity).into(), band_width: *band, ..PlanConfig::default() };
            let iv = relative_scores(&s, &current, &target, &plan).map_err(EngineError::from)?;
            let selected = select_segments(&iv, &plan);
            let mut out = format!("{:<12} {:>10} {:>10} {:>10}  mask\n", "segment", "m_current", "m_target", "j");
            for e in &iv.entries {
                let mark = if selected.contains(&e.id) { "*" } else { "" };
                let line = format!("{:<12} {:>10.6} {:>10.6} {:>10.6}  {mark}", e.id.to_string(), e.m_current, e.m_target, e.j);
                out.push_str(line.trim_end());
                out.push('\n');
            }
            Ok(out)
        }
        Command::Metrics { seq, other, grid } => {
            let a = read_sequence(seq)?;
            let (target, original) = if looks_like_grid(other) {
                (read_grid(other)?, a.clone())
            } else {
                let b = read_sequence(other)?;
                (render(&b, &grid.spec()?)?, b)
            };
            let m = MetricsReport::compute(&a, &target, &original, &Default::default());
            let mut r = Report::default();
            r.push(metrics_section("metrics", &m));
            Ok(r.to_string())
        }
        Command::Synth { spec, out } => {
            let recipe = match spec {
                Some(path) => {
                    let text = fs::read_to_string(path)
                        .map_err(|e| FormatError::Io { path: path.display().to_string(), source: e })?;
                    toml::from_str::<SynthSpec>(&text).map_err(|e| SynthError::InvalidSpec(e.to_string()))?
                }
                None => SynthSpec::default(),
            };
            let triplets = synth(&recipe)?;
            write_corpus(out, &recipe, &triplets)?;
            Ok(format!("wrote {} triplets to {}\n", triplets.len(), out.display()))
        }
        Command::Eval { dir, report, search } => {
            let (_, triplets) = read_corpus(dir)?;
            let first = triplets.first().ok_or_else(|| CliError::Usage("corpus is empty".into()))?;
            let cfg = EvalConfig { engine: search.engine(*first.target.spec()), plan: search.plan(), ..EvalConfig::default() };
            let eval = evaluate(&triplets, &cfg)?;
            let r = eval_report(&eval, &cfg);
            write_report(report, &r)?;
            Ok(r.section("aggregate").map(|s| Report { sections: vec![s.clone()] }.to_string()).unwrap_or_default())
        }
    }
}
