//! One module per subcommand. Each takes already-parsed options and
//! returns data; printing and exit codes live in the binary.

mod bench;
mod gen;
mod inputs;
mod run;
mod sweep;
mod viz;

pub use bench::{cmd_bench, BenchReport, StageStats, MIN_REPEAT};
pub use gen::cmd_gen;
pub use inputs::{load_inputs, HeadSet};
pub use run::{cmd_run, Aggregate, HeadReport, RunReport};
pub use sweep::{cmd_sweep, write_sweep_csv, SweepRecord};
pub use viz::{cmd_viz, VizOutput, VIZ_MAX_TOKENS};

/// Calls `$f::<f32>` or `$f::<f64>` according to a [`Precision`].
macro_rules! with_precision {
    ($p:expr, $f:ident ( $($arg:expr),* )) => {
        match $p {
            pbs_core::pipeline::Precision::F32 => $f::<f32>($($arg),*),
            pbs_core::pipeline::Precision::F64 => $f::<f64>($($arg),*),
        }
    };
}
pub(crate) use with_precision;

pub(crate) fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool, crate::error::CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(crate::error::CliError::config("--threads must be at least 1"));
        }
        b = b.num_threads(t);
    }
    b.build()
        .map_err(|e| crate::error::CliError::config(format!("cannot start thread pool: {e}")))
}
