//! `gsqc` command-line front end.

mod verify;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gsqc::numfmt::{fmt15, to_json_string};
use gsqc::pathcert::{self, GraphSpec};
use gsqc::spectra::{self, SpectralOptions};
use gsqc::{adiabatic, build_1d_circuit, build_all_to_all_circuit, build_random_circuit, Circuit, Layout};
use serde::Serialize;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "gsqc", version, about = "Ground-state quantum computation verification laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the circuit as JSON.
    Build {
        #[command(flatten)]
        circuit: CircuitArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lowest eigenvalues of H(λ) at one λ.
    Spectrum {
        #[command(flatten)]
        circuit: CircuitArgs,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        /// Number of eigenvalues.
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write H(λ) as `row,col,re,im` lines.
        #[arg(long)]
        dump_operator: Option<PathBuf>,
    },
    /// Gap, e1 and occupation bound over a λ grid (CSV).
    GapScan {
        #[command(flatten)]
        circuit: CircuitArgs,
        #[arg(long, default_value = "0:1:11")]
        lambda_grid: String,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a path family and certify the Laplacian bound (JSON).
    CertifyPath {
        #[arg(long, value_enum)]
        graph: GraphKind,
        /// Chain length.
        #[arg(long)]
        n1: Option<usize>,
        /// Grid side lengths, e.g. `4x4`.
        #[arg(long)]
        dims: Option<String>,
        #[arg(long = "M")]
        m: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        /// JSON array of φ values in vertex order (axis 1 fastest).
        #[arg(long)]
        phi_file: Option<PathBuf>,
        /// Seed for a random balanced φ when no file is given.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Include the full path table.
        #[arg(long)]
        paths: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the adiabatic evolution and write checkpoint overlaps (CSV).
    Evolve {
        #[command(flatten)]
        circuit: CircuitArgs,
        /// Use a built-in toy instance (1 or 3 qubits) instead of a generated circuit.
        #[arg(long)]
        toy: Option<usize>,
        /// Total evolution time T.
        #[arg(long)]
        time: f64,
        /// Step count (default ⌈50·T·‖H‖⌉).
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full verification suite; nonzero exit if any check fails.
    Verify {
        #[command(flatten)]
        circuit: CircuitArgs,
        #[arg(long, default_value = "0:1:11")]
        lambda_grid: String,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// JSON report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct CircuitArgs {
    #[arg(long, value_parser = parse_layout, default_value = "1d")]
    layout: Layout,
    #[arg(long = "M", default_value_t = 3)]
    m: usize,
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Read the circuit from JSON instead of generating it.
    #[arg(long)]
    circuit: Option<PathBuf>,
    /// Fill the core gate slots with seeded random unitaries.
    #[arg(long)]
    random_gates: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphKind {
    Chain,
    Grid,
    GateGraph,
    FromCircuit,
}

fn parse_layout(s: &str) -> std::result::Result<Layout, String> {
    s.parse::<Layout>().map_err(|_| format!("unknown layout '{s}' (expected 1d, all-to-all or custom)"))
}

impl CircuitArgs {
    fn load(&self) -> Result<Circuit> {
        if let Some(p) = &self.circuit {
            let s = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            return Ok(Circuit::from_json(&s)?);
        }
        Ok(match (self.layout, self.random_gates) {
            (Layout::Custom, _) => bail!("the custom layout needs --circuit <file>"),
            (l, true) => build_random_circuit(self.m, self.n, l, self.seed)?,
            (Layout::OneD, false) => build_1d_circuit(self.m, self.n, &[])?,
            (Layout::AllToAll, false) => build_all_to_all_circuit(self.m, self.n, &[])?,
        })
    }
}

/// Write to `out`, or stdout when absent.
fn emit(out: &Option<PathBuf>, body: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, body).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().write_all(body.as_bytes())?,
    }
    Ok(())
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Build { circuit, out } => {
            let c = circuit.load()?;
            emit(&out, &(c.to_json()? + "\n"))?;
        }
        Command::Spectrum { circuit, lambda, k, tol, out, dump_operator } => {
            let c = circuit.load()?;
            let solver = spectra::GapSolver::new(&c, SpectralOptions { tol, ..Default::default() })?;
            let vals = solver.lowest(lambda, k)?;
            if let Some(p) = dump_operator {
                let basis = gsqc::enumerate_basis(&c)?;
                let h = gsqc::Skeleton::new(&c, &basis, &Default::default())?.at(lambda)?;
                h.dump(std::io::BufWriter::new(std::fs::File::create(&p)?))?;
            }
            let rows = vals.iter().enumerate().map(|(i, v)| vec![i.to_string(), fmt15(*v)]);
            emit(&out, &csv_string(&["index", "eigenvalue"], rows)?)?;
        }
        Command::GapScan { circuit, lambda_grid, tol, out } => {
            let c = circuit.load()?;
            let grid = spectra::parse_grid(&lambda_grid)?;
            let scan = spectra::gap_scan(&c, &grid, SpectralOptions { tol, ..Default::default() })?;
            let header = ["lambda", "e0", "e1_full", "gap", "e1_thm3", "occupation", "bound_thm3", "bound_thm4"];
            let rows = scan.rows.iter().map(|r| {
                vec![
                    fmt15(r.lambda),
                    fmt15(r.e0),
                    fmt15(r.e1_full),
                    fmt15(r.gap),
                    fmt15(r.e1_thm3),
                    fmt15(r.occupation),
                    fmt15(r.bound_thm3),
                    r.bound_thm4.map(fmt15).unwrap_or_default(),
                ]
            });
            emit(&out, &csv_string(&header, rows)?)?;
            eprintln!("min gap {}, min occupation bound {}", fmt15(scan.min_gap()), fmt15(scan.occupation_bound()));
        }
        Command::CertifyPath { graph, n1, dims, m, n, phi_file, seed, paths, out } => {
            let need = |v: Option<usize>, flag: &str| v.with_context(|| format!("--{flag} is required for this graph"));
            let spec = match graph {
                GraphKind::Chain => GraphSpec::Chain { n1: need(n1, "n1")? },
                GraphKind::Grid => {
                    let d = dims.context("--dims is required for a grid (e.g. 4x4)")?;
                    let dims = d
                        .split(['x', ','])
                        .map(|s| s.trim().parse::<usize>().with_context(|| format!("bad grid dimension in '{d}'")))
                        .collect::<Result<Vec<_>>>()?;
                    GraphSpec::Grid { dims }
                }
                GraphKind::GateGraph => GraphSpec::GateGraph { m: need(m, "M")?, n: need(n, "n")? },
                GraphKind::FromCircuit => GraphSpec::FromCircuit { m: need(m, "M")?, n: need(n, "n")? },
            };
            let g = pathcert::build_graph(&spec)?;
            let phi: Vec<f64> = match phi_file {
                Some(p) => serde_json::from_str(
                    &std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?,
                )
                .context("φ file must be a JSON array of numbers")?,
                None => pathcert::random_balanced(g.len(), seed),
            };
            let sf = pathcert::SignedFunction::new(phi)?;
            let pf = pathcert::construct_path(&g, &sf)?;
            let res = pathcert::certify_path(&g, &sf, &pf)?;
            let cert = pathcert::Certificate::new(&g, &sf, &pf, res, paths);
            emit(&out, &(cert.to_json()? + "\n"))?;
        }
        Command::Evolve { circuit, toy, time, steps, out } => {
            let c = match toy {
                Some(m) => adiabatic::toy_circuit(m)?,
                None => circuit.load()?,
            };
            let r = match steps {
                Some(s) => adiabatic::evolve(&c, time, s)?,
                None => adiabatic::evolve_default(&c, time)?,
            };
            let rows = r.checkpoints.iter().map(|k| vec![fmt15(k.t), fmt15(k.lambda), fmt15(k.overlap), fmt15(k.norm)]);
            emit(&out, &csv_string(&["t", "lambda", "overlap_with_instantaneous_ground", "norm"], rows)?)?;
            eprintln!(
                "T {} steps {} fidelity {} norm drift {}",
                fmt15(r.total_time),
                r.steps,
                fmt15(r.fidelity),
                fmt15(r.norm_drift)
            );
        }
        Command::Verify { circuit, lambda_grid, tol, out } => {
            let cfg = verify::VerifyConfig {
                circuit: circuit.load()?,
                grid: spectra::parse_grid(&lambda_grid)?,
                tol,
                seed: circuit.seed,
            };
            let report = verify::run(&cfg);
            let mut text = String::new();
            for k in &report.checks {
                text += &format!("{} {}: {}\n", if k.ok { "PASS" } else { "FAIL" }, k.name, k.summary);
            }
            for n in &report.notes {
                text += &format!("note: {n}\n");
            }
            text += &format!("{}\n", if report.ok { "all checks passed" } else { "some checks FAILED" });
            print!("{text}");
            if let Some(p) = out {
                std::fs::write(&p, to_json_string(&report)? + "\n")
                    .with_context(|| format!("writing {}", p.display()))?;
            }
            if !report.ok {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct ErrorReport {
    error: String,
    causes: Vec<String>,
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("GSQC_THREADS") {
        let n: usize = v.parse().with_context(|| format!("GSQC_THREADS must be a positive integer, got '{v}'"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match init_threads().and_then(|_| run(cli)) {
        Ok(code) => code,
        Err(e) => {
            let report =
                ErrorReport { error: e.to_string(), causes: e.chain().skip(1).map(|c| c.to_string()).collect() };
            eprintln!("{}", serde_json::to_string(&report).unwrap_or_else(|_| e.to_string()));
            ExitCode::from(1)
        }
    }
}
