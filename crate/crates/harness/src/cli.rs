use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use pbs_core::pipeline::{PipelineConfig, Precision, Strategy};

use crate::commands::{cmd_bench, cmd_gen, cmd_run, cmd_sweep, cmd_viz, write_sweep_csv, MIN_REPEAT};
use crate::error::CliError;
use crate::manifest::{InputFiles, Inputs, RunManifest};
use crate::workload::{defaults, Scatter, WorkloadKind, WorkloadSpec};

#[derive(Debug, Parser)]
#[command(name = "pbs", version, about = "Permuted block-sparse attention experiments")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Pipeline settings. On commands that read a manifest these override
/// the manifest's values.
#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    #[arg(long, global = true)]
    pub precision: Option<Precision>,
    #[arg(long, global = true)]
    pub block_size: Option<usize>,
    /// 0 disables segmentation (strategy none only).
    #[arg(long, global = true)]
    pub segment_size: Option<usize>,
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    #[arg(long, global = true)]
    pub strategy: Option<Strategy>,
    /// Workload seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for per-head parallelism.
    #[arg(long, global = true, env = "PBS_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct WorkloadArgs {
    #[arg(long, default_value = "gaussian")]
    pub kind: WorkloadKind,
    #[arg(long, default_value_t = 1024)]
    pub n: usize,
    #[arg(long, default_value_t = 64)]
    pub d: usize,
    #[arg(long, default_value_t = 1)]
    pub heads: usize,
    #[arg(long, default_value_t = defaults::line_count())]
    pub line_count: usize,
    #[arg(long, default_value_t = defaults::line_strength())]
    pub line_strength: f64,
    #[arg(long, default_value_t = defaults::scatter())]
    pub scatter: Scatter,
    #[arg(long, default_value_t = defaults::query_alignment())]
    pub query_alignment: f64,
    #[arg(long, default_value_t = defaults::cluster_size())]
    pub cluster_size: usize,
    #[arg(long, default_value_t = defaults::cluster_strength())]
    pub cluster_strength: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic workload as q.pbst, k.pbst, v.pbst.
    Gen {
        #[command(flatten)]
        workload: WorkloadArgs,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Write a run manifest from tensor files or workload flags.
    Manifest {
        #[command(flatten)]
        workload: WorkloadArgs,
        /// Read inputs from files instead of generating them (needs --k and --v).
        #[arg(long, requires_all = ["k", "v"])]
        q: Option<PathBuf>,
        #[arg(long)]
        k: Option<PathBuf>,
        #[arg(long)]
        v: Option<PathBuf>,
        /// Output tensor path recorded in the manifest.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Report path recorded in the manifest.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Where to write the manifest; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the pipeline on every head; prints or writes the report JSON.
    Run {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Skip the quadratic true-attention coverage diagnostic.
        #[arg(long)]
        no_coverage: bool,
    },
    /// Density/error table over tau, segment size and strategy, as CSV.
    Sweep {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0.5,0.7,0.8,0.9,0.95,1.0")]
        taus: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "256")]
        segment_sizes: Vec<usize>,
        /// Defaults to the manifest's strategy.
        #[arg(long, value_delimiter = ',')]
        strategies: Vec<Strategy>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-stage timing statistics (median and IQR) as JSON.
    Bench {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value_t = 5)]
        repeat: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump the permuted attention matrix and the selected-tile grid.
    Viz {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value_t = 0)]
        head: usize,
        #[arg(long, default_value = "viz")]
        label: String,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

impl GlobalArgs {
    fn apply(&self, cfg: &mut PipelineConfig) {
        if let Some(p) = self.precision {
            cfg.precision = p;
        }
        if let Some(b) = self.block_size {
            cfg.block_size = b;
        }
        if let Some(s) = self.segment_size {
            cfg.segment_size = s;
        }
        if let Some(t) = self.tau {
            cfg.tau = t;
        }
        if let Some(s) = self.strategy {
            cfg.strategy = s;
        }
    }

    fn pipeline(&self) -> PipelineConfig {
        let mut cfg = PipelineConfig::default();
        self.apply(&mut cfg);
        cfg
    }

    fn load_manifest(&self, path: &std::path::Path) -> Result<RunManifest, CliError> {
        let mut m = RunManifest::load(path)?;
        self.apply(&mut m.pipeline);
        if let (Some(seed), Inputs::Workload(spec)) = (self.seed, &mut m.inputs) {
            spec.seed = seed;
        }
        Ok(m)
    }

    fn workload(&self, w: &WorkloadArgs) -> WorkloadSpec {
        WorkloadSpec {
            kind: w.kind,
            n: w.n,
            d: w.d,
            heads: w.heads,
            seed: self.seed.unwrap_or(0),
            line_count: w.line_count,
            line_strength: w.line_strength,
            scatter: w.scatter,
            query_alignment: w.query_alignment,
            segment_size: self.segment_size.unwrap_or(defaults::segment_size()),
            cluster_size: w.cluster_size,
            cluster_strength: w.cluster_strength,
        }
    }
}

fn emit(text: &str, path: Option<&PathBuf>, stdout: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io(std::path::Path::new("<stdout>"), e)),
    }
}

/// Executes a parsed command, writing normal output to `stdout`.
pub fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let g = &cli.global;
    match cli.command {
        Command::Gen { workload, out_dir } => {
            let spec = g.workload(&workload);
            let paths = cmd_gen(&spec, g.precision.unwrap_or(Precision::F32), &out_dir)?;
            for p in paths {
                writeln!(stdout, "{}", p.display()).map_err(|e| CliError::io(&p, e))?;
            }
            Ok(())
        }
        Command::Manifest {
            workload,
            q,
            k,
            v,
            output,
            report,
            out,
        } => {
            let inputs = match (q, k, v) {
                (Some(q), Some(k), Some(v)) => Inputs::Files(InputFiles { q, k, v }),
                (None, None, None) => Inputs::Workload(g.workload(&workload)),
                _ => return Err(CliError::config("--q, --k and --v must be given together")),
            };
            if let Inputs::Workload(spec) = &inputs {
                spec.validate()?;
            }
            let pipeline = g.pipeline();
            pipeline.validate()?;
            let m = RunManifest {
                inputs,
                pipeline,
                output,
                report,
            };
            emit(&(m.to_json() + "\n"), out.as_ref(), stdout)
        }
        Command::Run {
            manifest,
            output,
            report,
            no_coverage,
        } => {
            let mut m = g.load_manifest(&manifest)?;
            if output.is_some() {
                m.output = output;
            }
            if report.is_some() {
                m.report = report;
            }
            if no_coverage {
                m.pipeline.measure_coverage = false;
            }
            let r = cmd_run(&m, g.threads)?;
            if m.report.is_none() {
                emit(&(r.to_json() + "\n"), None, stdout)?;
            }
            Ok(())
        }
        Command::Sweep {
            manifest,
            taus,
            segment_sizes,
            strategies,
            out,
        } => {
            let m = g.load_manifest(&manifest)?;
            let rows = cmd_sweep(&m, &taus, &segment_sizes, &strategies)?;
            let mut buf = Vec::new();
            write_sweep_csv(&rows, &mut buf)?;
            emit(&String::from_utf8(buf).expect("csv is utf-8"), out.as_ref(), stdout)
        }
        Command::Bench { manifest, repeat, out } => {
            if repeat < MIN_REPEAT {
                return Err(CliError::config(format!("--repeat must be at least {MIN_REPEAT}")));
            }
            let m = g.load_manifest(&manifest)?;
            let r = cmd_bench(&m, repeat)?;
            emit(&(r.to_json() + "\n"), out.as_ref(), stdout)
        }
        Command::Viz {
            manifest,
            head,
            label,
            out_dir,
        } => {
            let m = g.load_manifest(&manifest)?;
            let out = cmd_viz(&m, head, &label, &out_dir)?;
            let text = format!("{}\n{}\n", out.attention.display(), out.mask.display());
            emit(&text, None, stdout)
        }
    }
}

/// Parses `args` (including the program name) and runs; returns the exit
/// code. Errors go to `stderr` as a single line.
pub fn main_with<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return crate::error::exit::OK;
            }
            let first = e.to_string();
            let first = first
                .lines()
                .next()
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ");
            let _ = writeln!(stderr, "E{} usage: {first}", crate::error::exit::CONFIG);
            return crate::error::exit::CONFIG;
        }
    };
    match execute(cli, stdout) {
        Ok(()) => crate::error::exit::OK,
        Err(e) => {
            let _ = writeln!(stderr, "{}", e.line());
            e.exit_code()
        }
    }
}
