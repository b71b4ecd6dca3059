//! `randers-lab`: curvature reports, screener verdicts, identity suites and
//! geodesic traces for Randers metrics.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use randers_core::catalog::{self, CatalogEntry, CatalogParams, Geometry};
use randers_core::diffcore::Backend;
use randers_core::metricdsl::load_metric_spec;
use randers_core::par::Execution;
use randers_core::Error;

#[derive(Parser)]
#[command(
    name = "randers-lab",
    version,
    about = "Finsler curvature of Randers metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-point α, β and F invariants.
    Report(RunArgs),
    /// Necessary conditions for scalar flag curvature (exit 0 pass, 1 fail,
    /// 3 not applicable, 4 inconclusive).
    Screen(RunArgs),
    /// Identity suite: divergence identity, closed forms, scalar-flag
    /// identities and homogeneity.
    Verify(RunArgs),
    /// RK4 geodesic as CSV `t,x1..xn,y1..yn,F`.
    Geodesic(GeodesicArgs),
    /// Builtin metrics.
    #[command(subcommand)]
    Catalog(CatalogCommand),
}

#[derive(Subcommand)]
enum CatalogCommand {
    List,
    /// Prints the metric document of a coordinate entry.
    Export {
        name: String,
        #[command(flatten)]
        params: EntryParams,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct EntryParams {
    #[arg(long = "K")]
    k: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    /// `+` or `-`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_sign)]
    sign: Option<i8>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    degree: Option<usize>,
    #[arg(long)]
    radius: Option<f64>,
}

#[derive(Args, Clone)]
struct Source {
    /// Metric document (JSON).
    #[arg(long, conflicts_with = "catalog", required_unless_present = "catalog")]
    spec: Option<PathBuf>,
    #[arg(long)]
    catalog: Option<String>,
    #[command(flatten)]
    params: EntryParams,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    directions: Option<usize>,
    #[arg(long, default_value_t = 8)]
    flags: usize,
    /// Sampling seed; also the seed of the `random` entries.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "dual", value_parser = parse_backend)]
    backend: Backend,
    #[arg(long)]
    tol: Option<f64>,
    /// Run the per-point work on the calling thread.
    #[arg(long)]
    sequential: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GeodesicArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    x0: Vec<f64>,
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    y0: Vec<f64>,
    #[arg(long = "T", default_value_t = 1.0)]
    t_end: f64,
    #[arg(long, default_value_t = 1e-3)]
    h: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_sign(s: &str) -> Result<i8, String> {
    match s {
        "+" | "1" | "+1" => Ok(1),
        "-" | "-1" => Ok(-1),
        _ => Err(format!("sign must be + or -, got `{s}`")),
    }
}

fn parse_backend(s: &str) -> Result<Backend, String> {
    s.parse::<Backend>().map_err(|e| e.to_string())
}

fn entry_params(p: &EntryParams, seed: Option<u64>) -> CatalogParams {
    CatalogParams {
        k: p.k,
        q: p.q,
        sign: p.sign,
        n: p.n,
        seed,
        degree: p.degree,
        radius: p.radius,
    }
}

fn load(source: &Source, seed: u64) -> Result<CatalogEntry, Error> {
    match (&source.spec, &source.catalog) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)?;
            let spec = load_metric_spec(&text)?;
            Ok(CatalogEntry {
                name: spec.name.clone(),
                geometry: Geometry::Coordinate(spec),
                parameters: vec![],
                note: format!("loaded from {}", path.display()),
                coframe: None,
            })
        }
        (None, Some(name)) => catalog::build(name, &entry_params(&source.params, Some(seed))),
        (None, None) => Err(Error::InvalidParameter(
            "either --spec or --catalog is required".into(),
        )),
    }
}

impl RunArgs {
    fn settings(
        &self,
        points: usize,
        directions: usize,
        tol: f64,
    ) -> Result<commands::Settings, Error> {
        let tol = self.tol.unwrap_or(tol);
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "--tol must be positive, got {tol}"
            )));
        }
        Ok(commands::Settings {
            points: self.points.unwrap_or(points),
            directions: self.directions.unwrap_or(directions),
            flags: self.flags,
            seed: self.seed,
            backend: self.backend,
            exec: if self.sequential {
                Execution::Sequential
            } else {
                Execution::Parallel
            },
            tol,
        })
    }
}

fn run(cli: Cli) -> Result<i32, Error> {
    let (text, out, code) = match cli.command {
        Command::Report(args) => {
            let entry = load(&args.source, args.seed)?;
            let doc = commands::report(&entry, &args.settings(5, 4, 1e-6)?)?;
            (output::to_json(&doc)?, args.out, 0)
        }
        Command::Screen(args) => {
            let entry = load(&args.source, args.seed)?;
            let (doc, code) = commands::screen(&entry, &args.settings(5, 6, 1e-6)?)?;
            (output::to_json(&doc)?, args.out, code)
        }
        Command::Verify(args) => {
            let entry = load(&args.source, args.seed)?;
            let (doc, code) = commands::verify(&entry, &args.settings(3, 2, 1e-5)?)?;
            (output::to_json(&doc)?, args.out, code)
        }
        Command::Geodesic(args) => {
            let entry = load(&args.source, args.seed)?;
            let csv = commands::geodesic(&entry, &args.x0, &args.y0, args.t_end, args.h)?;
            (csv, args.out, 0)
        }
        Command::Catalog(CatalogCommand::List) => {
            let mut text = String::new();
            for e in catalog::ENTRIES {
                text.push_str(&format!(
                    "{:<20} {:<22} {}\n",
                    e.name, e.parameters, e.summary
                ));
            }
            (text, None, 0)
        }
        Command::Catalog(CatalogCommand::Export {
            name,
            params,
            seed,
            out,
        }) => {
            let entry = catalog::build(&name, &entry_params(&params, seed))?;
            (
                serde_json::to_string_pretty(&entry.to_document()?)? + "\n",
                out,
                0,
            )
        }
    };
    output::emit(out.as_deref(), &text)?;
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
