use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use maxstab::dist::{ContinuousCdf, DiscreteDist};
use maxstab::engine::{construct_psi, linspace, recover_lambda, verify_representation};
use maxstab::harness::{run_axiom, Axiom, SamplerConfig, SuiteInputs, DEFAULT_TOL};
use maxstab::io::{self as mio, LoadedDist};
use maxstab::{Error, Result};

#[derive(Parser)]
#[command(name = "maxstab", version, about = "Evaluate and test risk functionals on finite distributions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum LatticeOp {
    Join,
    Meet,
    Leq,
    Decompose,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a measure on one or more distributions.
    Eval {
        #[arg(long = "dist", required = true)]
        dists: Vec<PathBuf>,
        /// Measure JSON, inline or as a path.
        #[arg(long)]
        measure: String,
        /// Cells used for continuous inputs.
        #[arg(long, default_value_t = 1024)]
        discretize: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Join, meet, order test or join decomposition.
    Lattice {
        #[arg(long = "dist", required = true)]
        dists: Vec<PathBuf>,
        #[arg(long, value_enum)]
        op: LatticeOp,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one axiom check; exits with 1 when a violation is found.
    Check {
        #[arg(long)]
        measure: String,
        #[arg(long)]
        axiom: Axiom,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = 5)]
        max_atoms: usize,
        #[arg(long, num_args = 2, allow_negative_numbers = true, default_values_t = [-10.0, 10.0])]
        range: Vec<f64>,
        #[arg(long)]
        grid_snap: Option<f64>,
        /// Points of the non-degeneracy grid over `--range`.
        #[arg(long, default_value_t = 50)]
        nd_points: usize,
        /// Continuous distribution for the semicontinuity probe (default Uniform[0,1]).
        #[arg(long = "dist")]
        dist: Option<PathBuf>,
        #[arg(long, default_value_t = 256)]
        n_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate a kernel from a measure on a grid.
    ConstructPsi {
        #[arg(long)]
        measure: String,
        #[arg(long, num_args = 2, allow_negative_numbers = true, default_values_t = [-5.0, 5.0])]
        x_range: Vec<f64>,
        #[arg(long, default_value_t = 200)]
        x_cells: usize,
        #[arg(long, default_value_t = 100)]
        p_cells: usize,
        #[arg(long, allow_negative_numbers = true)]
        y_max: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Check the grid on this many random grid-snapped distributions.
        #[arg(long, default_value_t = 0)]
        verify: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also report the recovered Λ and f.
        #[arg(long)]
        recover_lambda: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Boundary of {ψ ≥ t} as CSV.
    Superlevel {
        #[arg(long)]
        kernel: String,
        #[arg(long, allow_negative_numbers = true)]
        threshold: f64,
        #[arg(long, default_value_t = 101)]
        resolution: usize,
        #[arg(long, num_args = 2, allow_negative_numbers = true, default_values_t = [-5.0, 5.0])]
        x_range: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit_json(path: &Option<PathBuf>, value: &impl serde::Serialize) -> Result<()> {
    let mut out = output(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn load_all(paths: &[PathBuf]) -> Result<Vec<LoadedDist>> {
    paths.iter().map(mio::parse_distribution_file).collect()
}

fn discrete_all(paths: &[PathBuf]) -> Result<Vec<DiscreteDist>> {
    load_all(paths)?.into_iter().map(LoadedDist::discrete).collect()
}

fn pair(v: &[f64], what: &str) -> Result<(f64, f64)> {
    match v {
        [a, b] if a.is_finite() && b.is_finite() && a <= b => Ok((*a, *b)),
        _ => Err(Error::InvalidArgument(format!("{what} needs two finite values lo <= hi"))),
    }
}

/// `Ok(true)` when the command succeeded without a violation.
fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Eval { dists, measure, discretize, out } => {
            let loaded = load_all(&dists)?;
            let rho = mio::parse_measure(&measure)?.build()?;
            let mut rows = Vec::with_capacity(loaded.len());
            for (path, d) in dists.iter().zip(loaded) {
                let d = match d {
                    LoadedDist::Discrete(d) => d,
                    LoadedDist::Continuous(_, c) => c.discretize(discretize)?,
                };
                rows.push(json!({ "dist": path.display().to_string(), "value": rho.evaluate(&d) }));
            }
            emit_json(&out, &json!({ "measure": rho.name(), "params": rho.params(), "results": rows }))?;
            Ok(true)
        }
        Command::Lattice { dists, op, out } => {
            let ds = discrete_all(&dists)?;
            let need = match op {
                LatticeOp::Decompose => 1,
                _ => 2,
            };
            if ds.len() != need {
                return Err(Error::InvalidArgument(format!("this operation takes exactly {need} --dist")));
            }
            match op {
                LatticeOp::Join => emit_json(&out, &ds[0].join(&ds[1]))?,
                LatticeOp::Meet => emit_json(&out, &ds[0].meet(&ds[1]))?,
                LatticeOp::Leq => emit_json(&out, &json!({ "leq": ds[0].fsd_leq(&ds[1]), "geq": ds[1].fsd_leq(&ds[0]) }))?,
                LatticeOp::Decompose => emit_json(&out, &ds[0].join_decomposition())?,
            }
            Ok(true)
        }
        Command::Check {
            measure,
            axiom,
            trials,
            seed,
            tol,
            max_atoms,
            range,
            grid_snap,
            nd_points,
            dist,
            n_max,
            out,
        } => {
            let ls_cdf = match &dist {
                Some(p) => match mio::parse_distribution_file(p)? {
                    LoadedDist::Continuous(_, c) => c,
                    LoadedDist::Discrete(_) => {
                        return Err(Error::InvalidArgument("the semicontinuity probe needs a continuous --dist".into()))
                    }
                },
                None => ContinuousCdf::uniform(0.0, 1.0)?,
            };
            let rho = mio::parse_measure(&measure)?.build()?;
            let support_range = pair(&range, "--range")?;
            let cfg = SamplerConfig { seed, max_atoms, support_range, grid_snap, mass_quantum: None, trials };
            log::info!("check {axiom} seed={seed} trials={trials} tol={tol}");
            let nd_grid = linspace(support_range.0, support_range.1, nd_points.max(2) - 1);
            let report = run_axiom(&rho, axiom, &SuiteInputs { cfg: &cfg, nd_grid: &nd_grid, ls_cdf: &ls_cdf, ls_n_max: n_max, tol })?;
            emit_json(&out, &report)?;
            Ok(report.passed())
        }
        Command::ConstructPsi {
            measure,
            x_range,
            x_cells,
            p_cells,
            y_max,
            tol,
            verify,
            seed,
            recover_lambda: recover,
            out,
        } => {
            let rho = mio::parse_measure(&measure)?.build()?;
            let (lo, hi) = pair(&x_range, "--x-range")?;
            if x_cells == 0 || p_cells == 0 {
                return Err(Error::InvalidArgument("--x-cells and --p-cells must be positive".into()));
            }
            let xs = linspace(lo, hi, x_cells);
            let ps = linspace(0.0, 1.0, p_cells);
            let grid = construct_psi(&rho, &xs, &ps, y_max, tol)?;
            for issue in grid.invariant_violations() {
                log::warn!("{issue}");
            }
            let mut ok = true;
            let mut extra = serde_json::Map::new();
            if verify > 0 || recover {
                let cfg = SamplerConfig {
                    seed,
                    max_atoms: 5,
                    support_range: (lo, hi),
                    grid_snap: Some((hi - lo) / x_cells as f64),
                    mass_quantum: Some(p_cells as u32),
                    trials: verify,
                };
                let probes: Vec<DiscreteDist> = (0..verify).map(|i| cfg.sample_with(&mut cfg.rng_for_trial(i))).collect();
                if verify > 0 {
                    let rep = verify_representation(&rho, &grid, &probes, tol)?;
                    eprintln!("verify: {} distributions, max error {}, {} above tol", rep.checked, rep.max_error, rep.failures);
                    ok &= rep.passed();
                }
                if recover {
                    let rec = recover_lambda(&rho, &grid, &probes, tol);
                    extra.insert("recovered_lambda".into(), serde_json::to_value(&rec)?);
                }
            }
            if extra.is_empty() {
                emit_json(&out, &grid)?;
            } else {
                extra.insert("grid".into(), serde_json::to_value(&grid)?);
                emit_json(&out, &extra)?;
            }
            Ok(ok)
        }
        Command::Superlevel { kernel, threshold, resolution, x_range, out } => {
            let psi = mio::parse_kernel(&kernel)?;
            let rows = mio::emit_superlevel_set(&psi, threshold, pair(&x_range, "--x-range")?, resolution)?;
            let mut w = output(&out)?;
            mio::write_superlevel_csv(&mut w, &rows)?;
            w.flush()?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::from(2)
        }
    }
}
