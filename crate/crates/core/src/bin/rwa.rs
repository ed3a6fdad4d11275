use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rwa_core::bethe::{initial_guess, solve_bethe, BetheConfig};
use rwa_core::bounds::{
    analytic_bound, dicke_fock_bound, general_bound, intermediate_bound, off_resonant_bound, scaling_bound,
    worst_case_bound, BoundReport, BoundVariant,
};
use rwa_core::dynamics::{ode_oracle, truncation_check, RwaDynamics};
use rwa_core::eigenstate::{certified_eigenstate, default_cutoff, TCEigenstate};
use rwa_core::hamiltonian::{build, build_dicke, Model, ModelParams};
use rwa_core::par::{self, Execution};
use rwa_core::plot::{emit_plot, CsvTable, PlotSpec};
use rwa_core::sector::{HalfInt, SectorDims, StateVector};
use rwa_core::sweep::{parse_real, run_sweep, SweepConfig};
use rwa_core::verify::{run_suite, Suite};
use rwa_core::{Result, RwaError};

#[derive(Parser)]
#[command(
    name = "rwa",
    version,
    about = "Rotating-wave approximation error for the Dicke model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the size and ordering of a sector basis.
    Basis {
        #[arg(long)]
        spin: HalfInt,
        #[arg(long)]
        nmax: usize,
        /// List every index as idx,m_twice,n.
        #[arg(long)]
        describe: bool,
    },
    /// Dump a Hamiltonian as row,col,re,im (nonzeros only).
    Hamiltonian {
        #[arg(long)]
        model: Model,
        #[arg(long)]
        spin: HalfInt,
        #[arg(long)]
        nmax: usize,
        #[command(flatten)]
        coupling: Coupling,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the Bethe equations from the standard initial guess.
    Bethe {
        #[arg(long)]
        spin: HalfInt,
        #[arg(long)]
        excitations: u32,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a certified Tavis-Cummings eigenstate.
    Eigenstate {
        #[command(flatten)]
        sector: SectorArgs,
        #[command(flatten)]
        coupling: Coupling,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact RWA error of an eigenstate.
    Error {
        #[command(flatten)]
        sector: SectorArgs,
        #[command(flatten)]
        coupling: Coupling,
        #[command(flatten)]
        time: TimeArgs,
        /// Also cross-check the Dicke propagation against RK4.
        #[arg(long)]
        oracle: bool,
        /// RK4 steps; chosen from the matrix norm when omitted.
        #[arg(long)]
        oracle_steps: Option<usize>,
    },
    /// Evaluate one error bound.
    Bound {
        #[arg(long)]
        variant: BoundVariant,
        #[command(flatten)]
        sector: SectorArgs,
        #[command(flatten)]
        coupling: Coupling,
        #[command(flatten)]
        time: TimeArgs,
        /// Spin projection of the product state (dickefock only).
        #[arg(long, allow_hyphen_values = true)]
        m: Option<HalfInt>,
        /// Photon number of the product state (dickefock only).
        #[arg(long)]
        photons: Option<u32>,
        #[arg(long, default_value_t = 64)]
        quad_steps: usize,
        #[arg(long)]
        compare_exact: bool,
    },
    /// Run a parameter sweep described by a config file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's `out` key; stdout when neither is given.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Evaluate points one at a time.
        #[arg(long)]
        serial: bool,
    },
    /// Run the seeded property suites.
    Verify {
        /// algebra, unitarity, lemmas, eigenstates or all (comma-separated).
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Render a CSV table as an SVG line chart.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        x: Option<String>,
        /// Comma-separated y columns.
        #[arg(long, value_delimiter = ',')]
        y: Vec<String>,
        /// x, y, xy or none.
        #[arg(long, default_value = "none")]
        log: String,
        #[arg(long)]
        title: Option<String>,
    },
}

#[derive(Args)]
struct SectorArgs {
    #[arg(long)]
    spin: HalfInt,
    #[arg(long)]
    excitations: u32,
    /// Photon cutoff, default 2(M + 2S).
    #[arg(long)]
    nmax: Option<usize>,
}

#[derive(Args)]
struct Coupling {
    #[arg(long)]
    omega: f64,
    #[arg(long)]
    lambda: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    delta: f64,
}

impl Coupling {
    fn params(&self) -> Result<ModelParams> {
        ModelParams::detuned(self.omega, self.lambda, self.delta)
    }
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct TimeArgs {
    /// Absolute time; accepts expressions like `pi/12000`.
    #[arg(long, value_parser = real)]
    time: Option<f64>,
    /// The product ωt, e.g. `pi/4`.
    #[arg(long, value_parser = real)]
    omega_time: Option<f64>,
}

impl TimeArgs {
    fn at(&self, omega: f64) -> f64 {
        match (self.time, self.omega_time) {
            (Some(t), _) => t,
            (None, Some(wt)) => wt / omega,
            (None, None) => unreachable!("clap requires one time argument"),
        }
    }
}

fn real(s: &str) -> std::result::Result<f64, String> {
    parse_real(s).map_err(|e| e.to_string())
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn eigenstate(sector: &SectorArgs, params: &ModelParams) -> Result<TCEigenstate> {
    certified_eigenstate(sector.spin, sector.excitations, params, sector.nmax)
}

fn bound_report(
    variant: BoundVariant,
    sector: &SectorArgs,
    params: &ModelParams,
    t: f64,
    dicke_fock: (Option<HalfInt>, Option<u32>),
    quad_steps: usize,
    compare_exact: bool,
) -> Result<BoundReport> {
    let (spin, m) = (sector.spin, sector.excitations);
    if variant == BoundVariant::DickeFock {
        let (Some(proj), Some(n)) = dicke_fock else {
            return Err(RwaError::invalid("dickefock needs --m and --photons"));
        };
        let report = dicke_fock_bound(spin, proj, n, params, t)?;
        if !compare_exact {
            return Ok(report);
        }
        let excitations = report.excitations.expect("dickefock reports M");
        let dims = SectorDims::with_spin(spin, sector.nmax.unwrap_or_else(|| default_cutoff(spin, excitations)))?;
        let psi = StateVector::basis(dims, proj, n as usize)?;
        let exact = RwaDynamics::new(dims, *params)?.exact_error(t, &psi)?;
        return Ok(report.with_exact(exact));
    }
    if variant == BoundVariant::LinearCombination {
        return Err(RwaError::invalid(
            "lincomb needs a term count; use dickefock or the library call",
        ));
    }
    let needs_state = compare_exact || !matches!(variant, BoundVariant::AnalyticClosedForm | BoundVariant::Scaling);
    let eig = if needs_state {
        Some(eigenstate(sector, params)?)
    } else {
        None
    };
    let report = match variant {
        BoundVariant::AnalyticClosedForm => analytic_bound(spin, m, params, t)?,
        BoundVariant::Scaling => scaling_bound(spin, m, params, t)?,
        BoundVariant::General => general_bound(eig.as_ref().expect("state"), params, t)?,
        BoundVariant::OffResonant => off_resonant_bound(eig.as_ref().expect("state"), params, t)?,
        BoundVariant::Intermediate => intermediate_bound(&eig.as_ref().expect("state").state, params, t, quad_steps)?,
        BoundVariant::WorstCase => {
            worst_case_bound(&eig.as_ref().expect("state").state, params, t, spin.twice() as u32)?
        }
        BoundVariant::DickeFock | BoundVariant::LinearCombination => unreachable!(),
    };
    match eig {
        Some(e) if compare_exact => {
            let exact = RwaDynamics::new(e.dims(), *params)?.exact_error(t, &e.state)?;
            Ok(report.with_exact(exact))
        }
        _ => Ok(report),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Basis { spin, nmax, describe } => {
            let dims = SectorDims::with_spin(spin, nmax)?;
            if describe {
                print!("{}", dims.describe());
            } else {
                println!(
                    "spin={spin} nmax={nmax} spin_dim={} fock_dim={} dim={}",
                    dims.spin_dim(),
                    dims.fock_dim(),
                    dims.dim()
                );
            }
        }
        Command::Hamiltonian {
            model,
            spin,
            nmax,
            coupling,
            out,
        } => {
            let h = build(model, SectorDims::with_spin(spin, nmax)?, &coupling.params()?);
            let mut s = String::from("row,col,re,im\n");
            for (i, j, v) in h.nonzeros() {
                let _ = writeln!(s, "{i},{j},{:e},{:e}", v.re, v.im);
            }
            emit(out.as_deref(), &s)?;
        }
        Command::Bethe {
            spin,
            excitations,
            tol,
            max_iter,
            out,
        } => {
            let mut config = BetheConfig::default();
            if let Some(t) = tol {
                config.tol_residual = t;
            }
            if let Some(n) = max_iter {
                config.max_iter = n;
            }
            let roots = solve_bethe(spin, excitations, &initial_guess(spin, excitations), &config)?;
            let mut s = String::from("idx,re,im\n");
            for (i, r) in roots.roots.iter().enumerate() {
                let _ = writeln!(s, "{i},{:e},{:e}", r.re, r.im);
            }
            let _ = write!(
                s,
                "\nresidual_norm,iterations\n{:e},{}\n",
                roots.residual_norm, roots.iterations
            );
            emit(out.as_deref(), &s)?;
        }
        Command::Eigenstate { sector, coupling, out } => {
            let e = eigenstate(&sector, &coupling.params()?)?;
            let dims = e.dims();
            let mut s = String::from("m_twice,n,re,im\n");
            for i in 0..dims.dim() {
                let (m, n) = dims.labels(i);
                let a = e.state.amplitudes()[i];
                if a.norm() > 0.0 {
                    let _ = writeln!(s, "{},{n},{:e},{:e}", m.twice(), a.re, a.im);
                }
            }
            let _ = write!(s, "\nenergy,residual\n{:e},{:e}\n", e.energy, e.eigen_residual);
            emit(out.as_deref(), &s)?;
        }
        Command::Error {
            sector,
            coupling,
            time,
            oracle,
            oracle_steps,
        } => {
            let params = coupling.params()?;
            let t = time.at(params.omega);
            let e = eigenstate(&sector, &params)?;
            let dims = e.dims();
            let dynamics = RwaDynamics::new(dims, params)?;
            println!("error={:e}", dynamics.exact_error(t, &e.state)?);
            println!("truncation_ratio={:e}", truncation_check(dims, &params, t, &e.state)?);
            if oracle {
                let h = build_dicke(dims, &params);
                let steps = oracle_steps.unwrap_or_else(|| {
                    let norm = h.entries().norm();
                    ((t.abs() * norm / 0.02).ceil() as usize).max(100)
                });
                let reference = ode_oracle(&h, t, &e.state, steps)?;
                let spectral = dynamics.evolve_dicke(t, &e.state)?;
                println!("oracle_deviation={:e}", spectral.distance(&reference)?);
                println!("oracle_steps={steps}");
            }
        }
        Command::Bound {
            variant,
            sector,
            coupling,
            time,
            m,
            photons,
            quad_steps,
            compare_exact,
        } => {
            let params = coupling.params()?;
            let t = time.at(params.omega);
            let r = bound_report(variant, &sector, &params, t, (m, photons), quad_steps, compare_exact)?;
            println!("variant,first_term,second_term,extra_term,total,exact_error,ratio");
            println!(
                "{},{:e},{:e},{:e},{:e},{},{}",
                r.variant,
                r.first_term,
                r.second_term,
                r.extra_term,
                r.total,
                opt(r.exact_error),
                opt(r.ratio())
            );
        }
        Command::Sweep { config, out, serial } => {
            let text = std::fs::read_to_string(&config)?;
            let cfg = SweepConfig::parse(&text)?;
            let exec = if serial { Execution::Serial } else { Execution::Parallel };
            let table = run_sweep(&cfg, exec)?;
            let target = out.or_else(|| {
                cfg.out
                    .as_ref()
                    .map(|p| config.parent().map_or_else(|| p.clone(), |dir| dir.join(p)))
            });
            emit(target.as_deref(), &table.to_csv())?;
        }
        Command::Verify { suite } => {
            let mut failed = Vec::new();
            for s in Suite::parse_selection(&suite)? {
                let report = run_suite(s)?;
                print!("{report}");
                if !report.passed() {
                    failed.push(format!("{} ({} failures)", s.name(), report.failures()));
                }
            }
            if !failed.is_empty() {
                return Err(RwaError::Verification(failed.join(", ")));
            }
        }
        Command::Plot {
            input,
            out,
            x,
            y,
            log,
            title,
        } => {
            let table = CsvTable::parse(&std::fs::read_to_string(&input)?)?;
            let mut spec = PlotSpec {
                x,
                y,
                title,
                ..PlotSpec::default()
            };
            spec.set_log_axes(&log)?;
            std::fs::write(&out, emit_plot(&table, &spec)?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match par::configure_threads_from_env().and_then(|_| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.code());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
