use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use monocover_core::engine::EngineFailure;
use monocover_core::experiment::{loglog_slope, median_sizes, run_grid, ScalingParams, CSV_HEADER};
use monocover_core::{
    build_kneser, chi_exact, chi_formula, construct_lower_bound, cover_few_colours,
    min_cover_exact, validate_covering, ColouredGraph, Covering, EngineConfig, Error, Family,
};
use serde_json::{json, Value};

/// Monochromatic path coverings with few colours.
#[derive(Debug, Parser)]
#[command(name = "monocover", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the extremal colouring for (r, s, alpha) on n vertices.
    Construct {
        #[command(flatten)]
        params: Params,
        #[arg(long)]
        n: usize,
        /// Graph JSON output.
        #[arg(long)]
        out: PathBuf,
        /// Metadata JSON output; defaults to the graph path with `.meta.json`.
        #[arg(long)]
        meta: Option<PathBuf>,
    },
    /// Cover a graph by monochromatic paths using at most s colours.
    Cover {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        alpha: usize,
        #[command(flatten)]
        engine: EngineArgs,
        /// Write the engine trace as JSON.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Covering JSON output; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a covering; exits 1 if it is invalid.
    Verify {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        cover: PathBuf,
        #[arg(long)]
        s: usize,
    },
    /// Chromatic number of the Kneser hypergraph.
    Chi {
        #[command(flatten)]
        params: Params,
        /// Also compute it by exhaustive search.
        #[arg(long)]
        exact: bool,
        #[arg(long, default_value_t = 50_000_000)]
        budget: u64,
    },
    /// Exact minimum covering of a small graph.
    Oracle {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        s: usize,
    },
    /// Run the engine over sizes and seeds, write CSV rows and fit the slope.
    Scaling {
        #[command(flatten)]
        params: Params,
        #[arg(long, default_value = "construction")]
        family: Family,
        #[arg(long, value_delimiter = ',', default_value = "200,400,800,1600,3200")]
        ns: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4")]
        seeds: Vec<u64>,
        #[command(flatten)]
        engine: EngineArgs,
        #[arg(long)]
        out: PathBuf,
        /// Append to an existing CSV instead of replacing it.
        #[arg(long)]
        append: bool,
        /// Write 0 in the runtime column so reruns are byte-identical.
        #[arg(long)]
        no_timing: bool,
    },
}

#[derive(Debug, Args)]
struct Params {
    #[arg(long)]
    r: usize,
    #[arg(long)]
    s: usize,
    #[arg(long)]
    alpha: usize,
}

#[derive(Debug, Args)]
struct EngineArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    target_fraction: f64,
    #[arg(long, default_value_t = 2)]
    min_piece: usize,
    #[arg(long, default_value_t = 8)]
    max_stall: usize,
}

impl EngineArgs {
    fn config(&self) -> EngineConfig {
        EngineConfig {
            target_fraction: self.target_fraction,
            min_piece: self.min_piece,
            rng_seed: self.seed,
            max_stall: self.max_stall,
        }
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Io(PathBuf, io::Error),
    Json(PathBuf, serde_json::Error),
    Csv(csv::Error),
    Core(Error),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io(..) => "io",
            CliError::Json(..) => "malformed_json",
            CliError::Csv(_) => "csv",
            CliError::Core(e) => e.kind(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => f.write_str(msg),
            CliError::Io(path, e) => write!(f, "{}: {e}", path.display()),
            CliError::Json(path, e) => write!(f, "{}: {e}", path.display()),
            CliError::Csv(e) => write!(f, "{e}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Csv(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.to_owned(), e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Json(path.to_owned(), e))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serialisable");
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::Io(path.to_owned(), e))
}

fn print_json(value: &Value) {
    println!("{value}");
}

fn meta_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().unwrap_or_default().to_string_lossy();
    out.with_file_name(format!("{stem}.meta.json"))
}

fn run(cli: Cli) -> CliResult<ExitCode> {
    match cli.command {
        Command::Construct {
            params,
            n,
            out,
            meta,
        } => {
            let built = construct_lower_bound(params.r, params.s, params.alpha, n)?;
            let meta = meta.unwrap_or_else(|| meta_path(&out));
            write_json(&out, &built.graph)?;
            write_json(&meta, &built.meta())?;
            print_json(&json!({
                "case": built.case_id,
                "chi": built.chi,
                "n": built.n(),
                "edges": built.graph.edge_count(),
                "graph": out,
                "meta": meta,
            }));
        }
        Command::Cover {
            input,
            s,
            alpha,
            engine,
            trace,
            out,
        } => {
            let g: ColouredGraph = read_json(&input)?;
            let (cover, engine_trace) = match cover_few_colours(&g, s, alpha, &engine.config()) {
                Ok(done) => done,
                Err(EngineFailure { error, trace: t }) => {
                    if let Some(path) = &trace {
                        write_json(path, &t)?;
                    }
                    return Err(error.into());
                }
            };
            if let Some(path) = &trace {
                write_json(path, &engine_trace)?;
            }
            match &out {
                Some(path) => {
                    write_json(path, &cover)?;
                    print_json(&json!({
                        "size": cover.len(),
                        "singletons": cover.singleton_count(),
                        "colours_used": cover.col(),
                        "batches": engine_trace.records.len(),
                    }));
                }
                None => print_json(&serde_json::to_value(&cover).expect("serialisable")),
            }
        }
        Command::Verify { graph, cover, s } => {
            let g: ColouredGraph = read_json(&graph)?;
            let c: Covering = read_json(&cover)?;
            let report = validate_covering(&g, &c, s);
            print_json(&serde_json::to_value(&report).expect("serialisable"));
            if !report.valid {
                for (idx, fault) in &report.failures {
                    eprintln!("piece {idx}: {fault}");
                }
                if !report.uncovered.is_empty() {
                    eprintln!("uncovered vertices: {:?}", report.uncovered.to_vec());
                }
                if !report.within_budget() {
                    eprintln!("{} colours used, budget {s}", report.colours_used.len());
                }
                return Ok(ExitCode::from(1));
            }
        }
        Command::Chi {
            params,
            exact,
            budget,
        } => {
            let formula = chi_formula(params.r, params.s, params.alpha)?;
            let mut value = json!({
                "r": params.r,
                "s": params.s,
                "alpha": params.alpha,
                "formula": formula,
            });
            if exact {
                let kh = build_kneser(params.r, params.s, params.alpha)?;
                let (chi, colouring) = chi_exact(&kh, budget)?;
                value["exact"] = json!(chi);
                value["witness"] = kh
                    .vertices()
                    .iter()
                    .zip(&colouring)
                    .map(|(x, c)| json!({ "set": x, "colour": c }))
                    .collect();
            }
            print_json(&value);
        }
        Command::Oracle { input, s } => {
            let g: ColouredGraph = read_json(&input)?;
            let (size, witness) = min_cover_exact(&g, s)?;
            print_json(&json!({ "min_size": size, "witness": witness }));
        }
        Command::Scaling {
            params,
            family,
            ns,
            seeds,
            engine,
            out,
            append,
            no_timing,
        } => {
            let grid = ScalingParams {
                family,
                r: params.r,
                s: params.s,
                alpha: params.alpha,
            };
            let rows = run_grid(grid, &ns, &seeds, &engine.config(), !no_timing)?;
            let file = OpenOptions::new()
                .create(true)
                .write(true)
                .append(append)
                .truncate(!append)
                .open(&out)
                .map_err(|e| CliError::Io(out.clone(), e))?;
            let fresh = file.metadata().map(|m| m.len() == 0).unwrap_or(true);
            write_rows(file, fresh, &rows)?;
            let medians = median_sizes(&rows);
            let slope = loglog_slope(&medians).ok();
            print_json(&json!({
                "family": family.to_string(),
                "rows": rows.len(),
                "medians": medians,
                "slope": slope,
            }));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn write_rows(mut file: File, header: bool, rows: &[monocover_core::ScalingRow]) -> CliResult<()> {
    if header {
        writeln!(file, "{CSV_HEADER}").map_err(|e| CliError::Csv(e.into()))?;
    }
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(file);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush().map_err(|e| CliError::Csv(e.into()))?;
    Ok(())
}

fn fail(err: &CliError) -> ExitCode {
    eprintln!(
        "{}",
        json!({ "error": err.kind(), "message": err.to_string() })
    );
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.kind().to_string();
            let detail = e.to_string();
            let first = detail.lines().next().unwrap_or_default();
            let text = first.strip_prefix("error: ").unwrap_or(first);
            return fail(&CliError::Usage(if text.is_empty() {
                message
            } else {
                text.to_string()
            }));
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => fail(&e),
    }
}
