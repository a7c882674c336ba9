use std::process::ExitCode;

use clap::Parser;

use ccplus::cli::{self, ElimMethod, Invocation, OutputFormat};

/// Multi-valued causal theories and C+ action descriptions: models,
/// causal explanation, completion, transition systems, planning, and
/// Boolean elimination.
#[derive(Parser)]
#[command(name = "ccplus", version)]
struct Args {
    /// Input file.
    file: std::path::PathBuf,

    /// Query block or built-in command to run.
    #[arg(long, default_value = "models")]
    query: String,

    /// Output format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,

    /// Stop after this many models (models command only).
    #[arg(long)]
    limit: Option<usize>,

    /// Constant to eliminate (eliminate command only).
    #[arg(long, value_name = "CONST")]
    eliminate: Option<String>,

    /// How to eliminate a fluent or causal-theory constant.
    #[arg(long, value_enum)]
    method: Option<ElimMethod>,

    /// Plan length bound; defaults to the number of states (plan
    /// command only).
    #[arg(long = "max-steps", value_name = "N")]
    max_steps: Option<usize>,

    /// Print search statistics to stderr.
    #[arg(long)]
    stats: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let text = match std::fs::read_to_string(&args.file) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.file.display());
            return ExitCode::from(1);
        }
    };
    let inv = Invocation {
        query: args.query,
        format: args.format,
        limit: args.limit,
        eliminate: args.eliminate,
        method: args.method,
        max_steps: args.max_steps,
    };
    match cli::drive(&text, &inv) {
        Ok(out) => {
            print!("{}", out.stdout);
            if args.stats {
                eprintln!("{}", out.stats_line);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
