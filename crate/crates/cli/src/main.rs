use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use torus_forcing::forcing::{forced_set, forces, mediant_tree, ForcingElement};
use torus_forcing::kicked::{orbit_search_grid, DEFAULT_TOL};
use torus_forcing::markov::{
    build_skeleton_graph, cycle_rotation_number, enumerate_cycles, verify_against_forcing,
};
use torus_forcing::sweep::{emit_csv, emit_svg, parse_real, run_sweep, SweepConfig};
use torus_forcing::{Error, FareyPair, MapParams};

/// Longest period accepted by orbit-find.
const MAX_ORBIT_PERIOD: usize = 64;

#[derive(Parser)]
#[command(
    name = "torus-forcing",
    version,
    about = "Forcing relations and periodic orbits for torus shear maps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Print whether A forces B (each an orbit "q/p" or a pair "q1/p1 v q2/p2").
    ForceQuery { a: String, b: String },
    /// Print the set forced by a pair, up to a denominator bound, as JSON.
    ForceClosure {
        pair: String,
        #[arg(long)]
        max_den: u64,
    },
    /// Print the mediant subdivision tree of a pair.
    ForceTree {
        pair: String,
        #[arg(long)]
        depth: u32,
    },
    /// Write the Markov transition graph of a pair in DOT format.
    MarkovGraph {
        pair: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the primitive cycles of the transition graph with their rotation numbers.
    MarkovOrbits {
        pair: String,
        #[arg(long)]
        max_period: usize,
    },
    /// Check that every forced rotation number is realised by a cycle.
    MarkovVerify {
        pair: String,
        #[arg(long)]
        max_den: u64,
    },
    /// Search for periodic orbits of the kicked map with winding (wj, *) over p steps.
    OrbitFind {
        #[arg(long, allow_hyphen_values = true)]
        k: String,
        #[arg(long, allow_hyphen_values = true)]
        omega: String,
        #[arg(long)]
        period: usize,
        #[arg(long, allow_hyphen_values = true)]
        wj: i64,
        /// Seeds per axis.
        #[arg(long, default_value_t = 16)]
        grid: usize,
        #[arg(long)]
        tol: Option<String>,
    },
    /// Scan a (k, omega) window for tongues and write CSV (and optionally SVG).
    SweepRun {
        /// key = value file; flags below override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        k_min: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        k_max: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        omega_min: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        omega_max: Option<String>,
        #[arg(long)]
        nk: Option<String>,
        #[arg(long)]
        nomega: Option<String>,
        #[arg(long)]
        max_period: Option<String>,
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        tol: Option<String>,
        /// Target classes, e.g. "1:0, 2:1".
        #[arg(long)]
        periods: Option<String>,
    },
}

enum Failure {
    Input(String),
    Solver(String),
    Internal(String),
    /// A completed check that did not hold; the report goes to stdout.
    Verify(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Solver(_) => 3,
            Failure::Internal(_) | Failure::Verify(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Solver(m) | Failure::Internal(m) | Failure::Verify(m) => m,
        }
    }
}

fn input(e: Error) -> Failure {
    Failure::Input(e.to_string())
}

fn output(e: Error) -> Failure {
    Failure::Internal(e.to_string())
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value).map_err(|e| Failure::Internal(e.to_string()))
}

fn pair(s: &str) -> Result<FareyPair, Failure> {
    s.parse().map_err(input)
}

fn real(name: &str, s: &str) -> Result<f64, Failure> {
    parse_real(s).map_err(|_| Failure::Input(format!("--{name}: cannot parse number {s:?}")))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Internal(format!("{}: {e}", path.display())))
}

fn run(command: Command) -> Result<String, Failure> {
    match command {
        Command::ForceQuery { a, b } => {
            let a = ForcingElement::parse(&a).map_err(input)?;
            let b = ForcingElement::parse(&b).map_err(input)?;
            Ok(format!("{}\n", forces(&a, &b)))
        }
        Command::ForceClosure { pair: p, max_den } => {
            let p = pair(&p)?;
            if max_den == 0 {
                return Err(Failure::Input("--max-den must be positive".into()));
            }
            let set: Vec<ForcingElement> = forced_set(&p, max_den).into_iter().collect();
            Ok(to_json(&set)? + "\n")
        }
        Command::ForceTree { pair: p, depth } => {
            let p = pair(&p)?;
            Ok(mediant_tree(&p, depth).map_err(input)?.render())
        }
        Command::MarkovGraph { pair: p, out } => {
            let graph = build_skeleton_graph(&pair(&p)?);
            write(&out, &graph.to_dot())?;
            Ok(String::new())
        }
        Command::MarkovOrbits {
            pair: p,
            max_period,
        } => {
            let p = pair(&p)?;
            let graph = build_skeleton_graph(&p);
            // one cycle per line
            let mut rows = Vec::new();
            for cycle in enumerate_cycles(&graph, max_period).map_err(input)? {
                let rotation = cycle_rotation_number(&cycle, &p).map_err(output)?;
                let row = json!({ "word": cycle.indices(), "rotation": rotation.to_string() });
                rows.push(row.to_string());
            }
            if rows.is_empty() {
                return Ok("[]\n".into());
            }
            Ok(format!("[\n  {}\n]\n", rows.join(",\n  ")))
        }
        Command::MarkovVerify { pair: p, max_den } => {
            let p = pair(&p)?;
            if max_den == 0 {
                return Err(Failure::Input("--max-den must be positive".into()));
            }
            let check = verify_against_forcing(&p, max_den).map_err(input)?;
            if check.passed() {
                return Ok(format!(
                    "PASS: {} forced orbits realised by cycles of length <= {}\n",
                    check.orbits_checked, check.max_period
                ));
            }
            let list = |v: &[torus_forcing::Rational]| {
                v.iter()
                    .map(|r| r.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            Err(Failure::Verify(format!(
                "FAIL: missing [{}], outside [{}]\n",
                list(&check.missing),
                list(&check.outside)
            )))
        }
        Command::OrbitFind {
            k,
            omega,
            period,
            wj,
            grid,
            tol,
        } => {
            let params = MapParams::new(real("k", &k)?, real("omega", &omega)?).map_err(input)?;
            if !(1..=MAX_ORBIT_PERIOD).contains(&period) {
                return Err(Failure::Input(format!(
                    "--period must be in 1..={MAX_ORBIT_PERIOD}"
                )));
            }
            if grid == 0 {
                return Err(Failure::Input("--grid must be positive".into()));
            }
            let tol = match tol {
                Some(t) => real("tol", &t)?,
                None => DEFAULT_TOL,
            };
            if tol.is_nan() || tol <= 0.0 {
                return Err(Failure::Input("--tol must be positive".into()));
            }
            let orbits = orbit_search_grid(&params, period, wj, grid, tol);
            if orbits.is_empty() {
                return Err(Failure::Solver(format!(
                    "no orbit of period {period} with J-winding {wj} found at k = {}, omega = {}",
                    params.k, params.omega
                )));
            }
            let records: Vec<_> = orbits.iter().map(|o| o.record(&params)).collect();
            Ok(to_json(&records)? + "\n")
        }
        Command::SweepRun {
            config,
            csv,
            svg,
            k_min,
            k_max,
            omega_min,
            omega_max,
            nk,
            nomega,
            max_period,
            grid,
            tol,
            periods,
        } => {
            let mut cfg = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
                    SweepConfig::parse(&text).map_err(input)?
                }
                None => SweepConfig::default(),
            };
            let overrides = [
                ("k_min", k_min),
                ("k_max", k_max),
                ("omega_min", omega_min),
                ("omega_max", omega_max),
                ("nk", nk),
                ("nomega", nomega),
                ("max_period", max_period),
                ("grid_n", grid),
                ("tol", tol),
                ("periods", periods),
            ];
            for (key, value) in overrides {
                if let Some(v) = value {
                    cfg.set(key, &v).map_err(input)?;
                }
            }
            cfg.validate().map_err(input)?;
            let records = run_sweep(&cfg).map_err(input)?;
            emit_csv(&records, &csv).map_err(output)?;
            if let Some(svg) = svg {
                emit_svg(&records, &svg).map_err(output)?;
            }
            Ok(String::new())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure::Verify(report)) => {
            print!("{report}");
            ExitCode::from(1)
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
