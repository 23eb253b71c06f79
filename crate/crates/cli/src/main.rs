//! Batch front door: parse configuration files, dispatch commands, emit
//! human-readable reports and CSV.
//!
//! Exit codes: 0 on success, 1 when a checked hypothesis fails, 2 on
//! invalid input.

mod fileio;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bll_core::{
    conditions, experiments, flow, functional,
    rational::{format_decimal, format_rational},
    Error, Preset, Rational, Sampler, SetTuple, Side,
};

#[derive(Parser)]
#[command(
    name = "bll",
    about = "Exact laboratory for multilinear rearrangement functionals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check nondegeneracy, admissibility, strict admissibility, genericity.
    Check {
        config: PathBuf,
        /// Emit the full report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Evaluate the form on the config's sets: phi, phi_star, deficit, dist.
    Eval {
        config: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Tabulate the slice kernel of one slot.
    Kernel {
        config: PathBuf,
        /// Slot index j.
        #[arg(long)]
        slot: usize,
        /// Number of grid intervals over the kernel support.
        #[arg(long, default_value_t = 64)]
        grid: usize,
        /// Write the table as CSV to this path (stdout otherwise).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Trace the form along the symmetrization flow of the config's sets.
    Flow {
        config: PathBuf,
        /// Number of uniform grid intervals in [0, 1].
        #[arg(long, default_value_t = 16)]
        grid: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Orbit distance of the config's sets.
    Dist {
        config: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Stability scan: sampled tuples near the orbit, min deficit/dist^2.
    Scan {
        config: PathBuf,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sampler: mixed, shells, shifts, or orbit.
        #[arg(long, default_value = "mixed")]
        sampler: String,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Scan the shifted-interval functional along directions.
    Psi {
        config: PathBuf,
        /// Shift direction as comma-separated rationals, one value per slot.
        /// May be repeated.
        #[arg(long = "direction", required = true)]
        directions: Vec<String>,
        /// Steps per direction ladder.
        #[arg(long, default_value_t = 8)]
        grid: usize,
        /// Largest shift scale.
        #[arg(long, default_value = "1/2")]
        scale: String,
        #[arg(long)]
        json: bool,
    },
    /// Expansion residual ladder over shell perturbations.
    Expansion {
        config: PathBuf,
        /// Shell sizes as comma-separated rationals.
        #[arg(long, default_value = "1/64,1/32,1/16,1/8")]
        deltas: String,
        /// Slots to perturb (comma-separated indices; default: all).
        #[arg(long)]
        slots: Option<String>,
    },
    /// Generate a preset configuration file.
    Gen {
        /// riesz-sobolev, gowers, or random.
        #[arg(long)]
        preset: String,
        /// Gowers order k.
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Row count for the random preset.
        #[arg(long, default_value_t = 5)]
        n: usize,
        /// Dimension for the random preset.
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path (stdout otherwise).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failures sorted into the two non-zero exit codes.
enum Failure {
    /// Exit 2: malformed input.
    Invalid(String),
    /// Exit 1: a checked hypothesis fails (with report).
    Hypothesis(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::BadRational(_)
            | Error::BadParameter(_)
            | Error::SlotOutOfRange(_)
            | Error::EqualSlots
            | Error::SlotCountMismatch { .. }
            | Error::MeasureMismatch { .. }
            | Error::TimeOutOfRange(_)
            | Error::UnknownPreset(_) => Failure::Invalid(e.to_string()),
            other => Failure::Hypothesis(other.to_string()),
        }
    }
}

fn parse_rational_arg(raw: &str, what: &str) -> Result<Rational, Failure> {
    bll_core::parse_rational(raw)
        .map_err(|_| Failure::Invalid(format!("{what}: invalid rational literal `{raw}`")))
}

fn parse_rational_list(raw: &str, what: &str) -> Result<Vec<Rational>, Failure> {
    raw.split(',')
        .map(|part| parse_rational_arg(part.trim(), what))
        .collect()
}

fn load(path: &std::path::Path) -> Result<fileio::Loaded, Failure> {
    fileio::load(path).map_err(Failure::Invalid)
}

fn require_sets(loaded: &fileio::Loaded, path: &std::path::Path) -> Result<SetTuple, Failure> {
    loaded.sets.clone().ok_or_else(|| {
        Failure::Invalid(format!(
            "{}: this command needs a `sets` field",
            path.display()
        ))
    })
}

fn emit(csv: &Option<PathBuf>, content: &str) -> Result<(), Failure> {
    match csv {
        Some(path) => {
            fileio::write_atomic(path, content).map_err(Failure::Invalid)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "\u{2713}"
    } else {
        "\u{2717}"
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Check { config, json } => {
            let loaded = load(&config)?;
            let report = conditions::check_all(&loaded.config, &loaded.e);
            let nd = report.nondegenerate.nondegenerate;
            let adm = report.admissible.as_ref().is_some_and(|r| r.admissible);
            let strict = report
                .strictly_admissible
                .as_ref()
                .is_some_and(|r| r.strictly_admissible);
            let gen = report.generic.as_ref().is_some_and(|r| r.generic);
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report).expect("serializable")
                );
            } else {
                println!(
                    "nondegenerate {} admissible {} strict {} generic {}",
                    mark(nd),
                    mark(adm),
                    mark(strict),
                    mark(gen)
                );
            }
            if nd && adm && strict && gen {
                Ok(())
            } else {
                Err(Failure::Hypothesis("hypothesis check failed".into()))
            }
        }
        Command::Eval { config, json } => {
            let loaded = load(&config)?;
            let sets = require_sets(&loaded, &config)?;
            let report = experiments::deficit(&loaded.config, &loaded.e, &sets)?;
            if json {
                let value = serde_json::json!({
                    "phi": format_rational(&report.phi),
                    "phi_star": format_rational(&report.phi_star),
                    "deficit": format_rational(&report.deficit),
                    "dist": format_rational(report.dist.value()),
                    "dist_certified": report.dist.is_certified(),
                    "ratio": report.ratio.as_ref().map(format_rational),
                });
                println!(
                    "{}",
                    serde_json::to_string_pretty(&value).expect("serializable")
                );
            } else {
                println!("{}", experiments::describe_deficit(&report));
            }
            Ok(())
        }
        Command::Kernel {
            config,
            slot,
            grid,
            csv,
        } => {
            let loaded = load(&config)?;
            let table = functional::kernel_table(&loaded.config, &loaded.e, slot, grid)?;
            emit(&csv, &table.to_csv())
        }
        Command::Flow { config, grid, csv } => {
            let loaded = load(&config)?;
            let sets = require_sets(&loaded, &config)?;
            if grid == 0 {
                return Err(Failure::Invalid("--grid must be positive".into()));
            }
            let times: Vec<Rational> = (0..=grid)
                .map(|k| Rational::new((k as u64).into(), (grid as u64).into()))
                .collect();
            let trace = flow::flow_trace(&loaded.config, &sets, &times)?;
            emit(&csv, &flow::trace_to_csv(&trace))
        }
        Command::Dist { config, json } => {
            let loaded = load(&config)?;
            let sets = require_sets(&loaded, &config)?;
            let dist = experiments::dist_to_orbit(&loaded.config, &sets)?;
            let witness: Vec<String> = dist.witness().iter().map(format_rational).collect();
            if json {
                let value = serde_json::json!({
                    "dist": format_rational(dist.value()),
                    "dist_decimal": format_decimal(dist.value()),
                    "certified": dist.is_certified(),
                    "witness": witness,
                });
                println!(
                    "{}",
                    serde_json::to_string_pretty(&value).expect("serializable")
                );
            } else {
                println!(
                    "dist = {} (exact {}, {}), witness v = ({})",
                    format_decimal(dist.value()),
                    format_rational(dist.value()),
                    if dist.is_certified() {
                        "exact"
                    } else {
                        "local, uncertified"
                    },
                    witness.join(", ")
                );
            }
            Ok(())
        }
        Command::Scan {
            config,
            samples,
            seed,
            sampler,
            csv,
            json,
        } => {
            let loaded = load(&config)?;
            let sampler = match sampler.as_str() {
                "mixed" => Sampler::Mixed,
                "shells" => Sampler::Shells,
                "shifts" => Sampler::Shifts,
                "orbit" => Sampler::Orbit,
                other => return Err(Failure::Invalid(format!("unknown sampler `{other}`"))),
            };
            let label = config.display().to_string();
            let report = experiments::stability_scan(
                &loaded.config,
                &loaded.e,
                &sampler,
                samples,
                seed,
                &label,
            )?;
            if let Some(path) = &csv {
                fileio::write_atomic(path, &report.to_csv()).map_err(Failure::Invalid)?;
            }
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report).expect("serializable")
                );
            } else {
                match (&report.min_ratio, report.argmin_sample) {
                    (Some(r), Some(id)) => println!(
                        "samples = {}, seed = {}, min deficit/dist^2 = {} (exact {}) at sample {}",
                        report.samples,
                        report.seed,
                        format_decimal(r),
                        format_rational(r),
                        id
                    ),
                    _ => println!(
                        "samples = {}, seed = {}, no sample with positive distance",
                        report.samples, report.seed
                    ),
                }
                if let Some(slope) = report.slope_fit {
                    println!("log-log slope of deficit vs dist = {slope:.3}");
                }
            }
            if report.counterexamples.is_empty() {
                Ok(())
            } else {
                Err(Failure::Hypothesis(format!(
                    "scan found zero-deficit samples off the orbit: {:?}",
                    report.counterexamples
                )))
            }
        }
        Command::Psi {
            config,
            directions,
            grid,
            scale,
            json,
        } => {
            let loaded = load(&config)?;
            let mut dirs = Vec::with_capacity(directions.len());
            for d in &directions {
                dirs.push(parse_rational_list(d, "--direction")?);
            }
            let scale = parse_rational_arg(&scale, "--scale")?;
            let report = experiments::psi_scan(&loaded.config, &loaded.e, &dirs, grid, &scale)?;
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report).expect("serializable")
                );
            } else {
                println!(
                    "psi(0) = {} (exact {}), equality-iff-row-space {}",
                    format_decimal(&report.psi0),
                    format_rational(&report.psi0),
                    mark(report.iff_holds)
                );
                if let Some(r) = &report.min_quadratic_ratio {
                    println!(
                        "min (psi(0)-psi(v))/dist^2 = {} (exact {})",
                        format_decimal(r),
                        format_rational(r)
                    );
                }
            }
            if report.iff_holds {
                Ok(())
            } else {
                Err(Failure::Hypothesis(
                    "psi equality/row-space dichotomy failed".into(),
                ))
            }
        }
        Command::Expansion {
            config,
            deltas,
            slots,
        } => {
            let loaded = load(&config)?;
            let deltas = parse_rational_list(&deltas, "--deltas")?;
            let slot_list: Vec<usize> = match slots {
                None => (0..loaded.config.slots()).collect(),
                Some(raw) => raw
                    .split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<usize>()
                            .map_err(|_| Failure::Invalid(format!("--slots: bad index `{s}`")))
                    })
                    .collect::<Result<_, _>>()?,
            };
            for &j in &slot_list {
                if j >= loaded.config.slots() {
                    return Err(Failure::Invalid(format!("--slots: {j} out of range")));
                }
            }
            let star = SetTuple::star_of(&loaded.e);
            let mut points = Vec::new();
            for delta in &deltas {
                let mut tuple = star.clone();
                for &j in &slot_list {
                    let shell =
                        experiments::shell_perturbation(loaded.e.get(j), delta, Side::Right)?;
                    tuple = tuple.with_slot(j, shell);
                }
                let residual = functional::expansion_residual(&loaded.config, &loaded.e, &tuple)?;
                let dist = experiments::dist_to_orbit(&loaded.config, &tuple)?;
                println!(
                    "delta = {}: residual = {} (exact {}), dist = {}",
                    format_rational(delta),
                    format_decimal(&residual),
                    format_rational(&residual),
                    format_rational(dist.value()),
                );
                let zero = bll_core::rat(0);
                if residual != zero && *dist.value() != zero {
                    points.push((
                        bll_core::rational::to_f64(dist.value()).ln(),
                        bll_core::rational::to_f64(&residual).abs().ln(),
                    ));
                }
            }
            if points.len() >= 2 {
                let n = points.len() as f64;
                let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
                let my = points.iter().map(|p| p.1).sum::<f64>() / n;
                let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
                let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
                println!("log-log slope of |residual| vs dist = {:.3}", sxy / sxx);
            } else {
                println!("residual vanished identically on this family");
            }
            Ok(())
        }
        Command::Gen {
            preset,
            k,
            n,
            m,
            seed,
            out,
        } => {
            let preset: Preset = bll_core::config::parse_preset(&preset, k, n, m, seed)?;
            let (config, e) = bll_core::builtin_config(&preset)?;
            let text = fileio::render_config(&config, &e, None);
            match out {
                Some(path) => {
                    fileio::write_atomic(&path, &text).map_err(Failure::Invalid)?;
                    println!("wrote {}", path.display());
                }
                None => print!("{text}"),
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Hypothesis(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Invalid(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
    }
}
