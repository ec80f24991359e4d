use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use boundkey::dist::FIXTURE_TOLERANCE;
use boundkey::fixtures::{
    fixture_report, Fixture, ReproductionReport, FIXTURES, FIXTURE_PT_TOLERANCE,
};
use boundkey::io::{self, PabFile, SCHEMA_HELP};
use boundkey::keyrate::{key_rate_report, Direction};
use boundkey::optimizer::{enumerate_diagrams, infer_diagram, maximize_keyrate, OptConfig};
use boundkey::protocol::run_pipeline;
use boundkey::quantum::{lift_state, pt_invariance_combinatorial, reduce_to_ab};
use boundkey::render::{render_diagram, RenderFormat};
use boundkey::Error;
use clap::{Parser, Subcommand};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(
    name = "boundkey",
    version,
    about = "Unambiguous distributions, PT-invariant lifts, and secret-key rates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Unambiguity and partial-transpose reports for a distribution file.
    Validate {
        file: PathBuf,
        #[arg(long, default_value_t = FIXTURE_PT_TOLERANCE)]
        tol: f64,
    },
    /// Density matrix rho_AB of the square-root lift.
    Lift {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Advantage and noisy-processing key rate.
    Keyrate {
        file: PathBuf,
        #[arg(long)]
        channel: Option<PathBuf>,
        #[arg(long, default_value = "A->B")]
        direction: String,
    },
    /// Multi-start maximization of the key rate on a diagram.
    Optimize {
        #[arg(long)]
        diagram: PathBuf,
        #[arg(long, default_value_t = 50)]
        starts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        dx: usize,
        /// Comma-separated increasing penalty weights.
        #[arg(long, value_delimiter = ',', default_values_t = [1e2, 1e4, 1e6, 1e8])]
        penalty_schedule: Vec<f64>,
        #[arg(long, default_value_t = 200_000)]
        max_evals: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Admissible diagrams on a grid, one per row/column-permutation class.
    Enumerate {
        #[arg(long)]
        da: usize,
        #[arg(long)]
        db: usize,
        /// Defaults to da * db.
        #[arg(long)]
        max_cliques: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Diagrams with exactly `de` cliques consistent with a P_AB matrix.
    Infer {
        #[arg(long)]
        pab: PathBuf,
        #[arg(long)]
        de: usize,
        #[arg(long, default_value_t = FIXTURE_TOLERANCE)]
        tol: f64,
    },
    /// Runs the published fixtures through the whole pipeline.
    Reproduce {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also maximize the rate on each fixture diagram with this many starts.
        #[arg(long, default_value_t = 0)]
        optimize_starts: usize,
        /// Infer the diagrams again instead of using the cached ones.
        #[arg(long)]
        reinfer: bool,
    },
    /// Draws a diagram as text or SVG.
    Render {
        #[arg(long)]
        diagram: PathBuf,
        #[arg(long, default_value = "ascii")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs a public-discussion protocol, then reports the final key rate.
    Protocol {
        file: PathBuf,
        #[arg(long)]
        protocol: PathBuf,
    },
}

enum Failure {
    Validation(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CliResult = Result<(), Failure>;

fn emit(text: &str, out: Option<&Path>) -> CliResult {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json(value: &impl serde::Serialize, out: Option<&Path>) -> CliResult {
    emit(&io::to_json_string(value)?, out)
}

fn parse_direction(s: &str) -> Result<Direction, Failure> {
    Direction::parse(s)
        .ok_or_else(|| Failure::Usage(format!("unknown direction {s:?}; use A->B or B->A")))
}

fn validate(file: &Path, tol: f64) -> CliResult {
    let p = io::load_distribution(file)?;
    let unambiguity = p.validate_unambiguous();
    let pt = reduce_to_ab(&lift_state(&p)).pt_report(tol)?;
    let combinatorial = if unambiguity.is_unambiguous() {
        serde_json::to_value(pt_invariance_combinatorial(&p, FIXTURE_TOLERANCE)?)
            .map_err(Error::from)?
    } else {
        Value::Null
    };
    let report = json!({
        "unambiguous": unambiguity.is_unambiguous(),
        "unambiguity": unambiguity,
        "pt": pt,
        "pt_combinatorial": combinatorial,
    });
    emit_json(&report, None)?;
    if unambiguity.is_unambiguous() {
        Ok(())
    } else {
        Err(Failure::Validation(format!(
            "{} unambiguity violation(s)",
            unambiguity.violations.len()
        )))
    }
}

fn optimize(diagram: &Path, cfg: OptConfig, out: Option<&Path>) -> CliResult {
    let d = io::load_diagram(diagram)?;
    let r = maximize_keyrate(&d, &cfg)?;
    emit_json(&json!({ "config": cfg, "result": r }), out)
}

fn fixture_files(dir: &Path, f: &Fixture) -> Result<(), Error> {
    io::write_json(dir.join(format!("{}.json", f.name)), &f.distribution_file())?;
    io::write_json(dir.join(format!("{}_q.json", f.name)), &f.channel_file())?;
    io::write_json(dir.join(format!("{}_diagram.json", f.name)), &f.diagram())?;
    io::write_json(
        dir.join(format!("{}_pab.json", f.name)),
        &PabFile {
            d_a: f.d_a(),
            d_b: f.d_b(),
            p: f.p_ab_values(),
        },
    )?;
    Ok(())
}

fn reproduce(out: Option<&Path>, seed: u64, optimize_starts: usize, reinfer: bool) -> CliResult {
    let mut fixtures = Vec::new();
    let mut optimized = Vec::new();
    for f in &FIXTURES {
        let d = if reinfer { f.reinfer()? } else { f.diagram() };
        fixtures.push(fixture_report(f, &d)?);
        if optimize_starts > 0 {
            let cfg = OptConfig {
                starts: optimize_starts,
                seed,
                ..Default::default()
            };
            let r = maximize_keyrate(&d, &cfg)?;
            optimized.push(json!({ "name": f.name, "result": r }));
        }
    }
    let report = ReproductionReport { fixtures };
    let doc = json!({
        "seed": seed,
        "reinfer": reinfer,
        "optimize_starts": optimize_starts,
        "report": report,
        "optimized": optimized,
    });
    let table = report.table();
    match out {
        Some(dir) => {
            let fixtures_dir = dir.join("fixtures");
            fs::create_dir_all(&fixtures_dir).map_err(Error::from)?;
            io::write_json(dir.join("report.json"), &doc)?;
            fs::write(dir.join("table.md"), &table).map_err(Error::from)?;
            for f in &FIXTURES {
                fixture_files(&fixtures_dir, f)?;
            }
            print!("{table}");
        }
        None => {
            emit_json(&doc, None)?;
            print!("{table}");
        }
    }
    if report.all_pass() {
        Ok(())
    } else {
        Err(Failure::Validation(
            "a fixture failed unambiguity, PPT, or positive-rate checks".into(),
        ))
    }
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Validate { file, tol } => validate(&file, tol),
        Command::Lift { file, out } => {
            let p = io::load_distribution(&file)?;
            emit_json(&reduce_to_ab(&lift_state(&p)), out.as_deref())
        }
        Command::Keyrate {
            file,
            channel,
            direction,
        } => {
            let p = io::load_distribution(&file)?;
            let ch = channel.map(io::load_channel).transpose()?;
            emit_json(
                &key_rate_report(&p, ch.as_ref(), parse_direction(&direction)?)?,
                None,
            )
        }
        Command::Optimize {
            diagram,
            starts,
            seed,
            dx,
            penalty_schedule,
            max_evals,
            out,
        } => {
            let cfg = OptConfig {
                starts,
                seed,
                d_x: dx,
                penalty_schedule,
                max_evals_per_start: max_evals,
                ..Default::default()
            };
            optimize(&diagram, cfg, out.as_deref())
        }
        Command::Enumerate {
            da,
            db,
            max_cliques,
            out,
        } => {
            let ds = enumerate_diagrams(da, db, max_cliques.unwrap_or(da * db))?;
            emit_json(&ds, out.as_deref())
        }
        Command::Infer { pab, de, tol } => {
            let p = io::load_pab(&pab)?;
            match infer_diagram(&p, de, tol) {
                Ok(ds) => emit_json(&ds, None),
                Err(e @ Error::NoneFound { .. }) => Err(Failure::Validation(e.to_string())),
                Err(e) => Err(e.into()),
            }
        }
        Command::Reproduce {
            out,
            seed,
            optimize_starts,
            reinfer,
        } => reproduce(out.as_deref(), seed, optimize_starts, reinfer),
        Command::Render {
            diagram,
            format,
            out,
        } => {
            let d = io::load_diagram(&diagram)?;
            emit(
                &render_diagram(&d, RenderFormat::parse(&format)?),
                out.as_deref(),
            )
        }
        Command::Protocol { file, protocol } => {
            let p = io::load_distribution(&file)?;
            let proto = io::load_protocol(&protocol)?;
            let r = run_pipeline(
                &p,
                &proto.steps,
                proto.final_channel.as_ref(),
                proto.direction,
            )?;
            emit_json(&r, None)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            eprintln!("\n{SCHEMA_HELP}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("validation failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\n{SCHEMA_HELP}");
            ExitCode::from(2)
        }
    }
}
