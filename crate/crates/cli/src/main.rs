use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use evsim::calibration::{bifilar_inertia, cog_from_axle_loads, estimate_damping_inertia, STANDARD_GRAVITY};
use evsim::config::load_config;
use evsim::drivecycle::{build_schedule, cycle_stats, parse_drive_cycle, scale_cycle, ManeuverSchedule};
use evsim::energy::energy_report;
use evsim::fmt::sig6;
use evsim::reporting::{run_experiment_suite, CROSS_SCALE_TOLERANCE};
use evsim::sim::simulate;
use evsim::similitude::{match_report, scale_factors, PiInputs};
use evsim::{presets, DriveCycle, Error, VehicleConfig};

#[derive(Parser)]
#[command(name = "evsim", version, about = "Bicycle-model EV energy simulation and similitude scaling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one vehicle over a drive cycle and write the trajectory CSV.
    Simulate {
        /// Config file, or a bundled name (rcc, rivian_r1t, rivian_r1t_matched).
        #[arg(long)]
        config: String,
        /// Drive cycle CSV (time_s,speed_mps).
        #[arg(long)]
        cycle: PathBuf,
        /// Lane change every this many metres; the config's offset and length are used.
        #[arg(long, value_name = "INTERVAL_M", conflicts_with = "no_lane_changes")]
        lane_changes: Option<f64>,
        #[arg(long)]
        no_lane_changes: bool,
        /// Step size override [s].
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long, value_enum, default_value_t = OnOff::Off)]
        regen: OnOff,
        /// Trajectory CSV output.
        #[arg(long)]
        out: PathBuf,
        /// Energy report JSON output.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Compare the constant pi groups of two configs.
    Pi {
        config_a: String,
        config_b: String,
        /// Allowed relative deviation of each ratio from one.
        #[arg(long, default_value_t = 0.05)]
        tolerance: f64,
        #[arg(long)]
        json: bool,
    },
    /// Convert a cycle driven by vehicle B into the equivalent cycle for A.
    ScaleCycle {
        cycle: PathBuf,
        config_a: String,
        config_b: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Parameter estimates from bench measurements.
    Calibrate {
        #[command(subcommand)]
        what: Calibrate,
    },
    /// Run the full comparison suite and write the CSV tables.
    Report {
        /// Full-size vehicle.
        #[arg(long, default_value = "rivian_r1t_matched")]
        full_size: String,
        /// Scaled vehicle.
        #[arg(long, default_value = "rcc")]
        scaled: String,
        /// Full-size cycles; the bundled stand-ins when omitted.
        #[arg(long = "cycle")]
        cycles: Vec<PathBuf>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

#[derive(Subcommand)]
enum Calibrate {
    /// Yaw inertia from a two-wire pendulum: mass, wire spacing, wire length, period.
    Inertia {
        mass: f64,
        spacing: f64,
        length: f64,
        period: f64,
        #[arg(long, default_value_t = STANDARD_GRAVITY)]
        g: f64,
    },
    /// Shaft damping and inertia from a spin test: steady speed, torque, time constant.
    Drivetrain { omega: f64, torque: f64, time_constant: f64 },
    /// Centre of gravity from wheelbase and axle loads.
    Cog { wheelbase: f64, front: f64, rear: f64 },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OnOff {
    On,
    Off,
}

enum Failure {
    Validation(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numeric() {
            Failure::Numeric(e.to_string())
        } else {
            Failure::Validation(e.to_string())
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Validation(msg.into())
}

fn config(arg: &str) -> CliResult<VehicleConfig> {
    let path = Path::new(arg);
    if !path.exists() {
        if let Some(cfg) = presets::by_name(arg) {
            return Ok(cfg);
        }
    }
    load_config(path).map_err(|e| invalid(format!("{arg}: {e}")))
}

fn cycle(path: &Path) -> CliResult<DriveCycle> {
    let text = fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("cycle");
    parse_drive_cycle(&text, name).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

/// Writes via a temporary file in the target directory, so the output path
/// either holds complete content or is untouched.
fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| invalid(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate { config: cfg_arg, cycle: cycle_path, lane_changes, no_lane_changes: _, dt, regen, out, report } => {
            let cfg = config(&cfg_arg)?;
            let cyc = cycle(&cycle_path)?;
            let mut opts = cfg.sim_options(regen == OnOff::On);
            if let Some(dt) = dt {
                opts.dt = dt;
            }
            let schedule = match lane_changes {
                Some(interval) => {
                    let track = cycle_stats(&cyc).distance * 1.1 + interval;
                    build_schedule(track, interval, cfg.lane.offset, cfg.lane.length)?
                }
                None => ManeuverSchedule::straight(),
            };
            let traj = simulate(cfg.plant(), &cyc, &schedule, &opts)?;
            let rep = energy_report(&traj);
            write_atomic(&out, &traj.to_csv())?;
            if let Some(path) = report {
                write_atomic(&path, &rep.to_json())?;
            }
            println!(
                "{} on {}: {} Wh over {} m, {} Wh/m, peak {} W, envelope clips {}",
                cfg.name,
                cyc.name,
                sig6(rep.energy_wh),
                sig6(rep.distance_m),
                rep.efficiency_wh_per_m.map(sig6).unwrap_or_else(|| "n/a".into()),
                sig6(rep.peak_power_w),
                traj.envelope_violations
            );
        }
        Command::Pi { config_a, config_b, tolerance, json } => {
            let (a, b) = (config(&config_a)?, config(&config_b)?);
            let rep = match_report(
                PiInputs { params: &a.params, eta: a.efficiency.mean() },
                PiInputs { params: &b.params, eta: b.efficiency.mean() },
                tolerance,
            )?;
            if json {
                print!("{}", rep.to_json());
            } else {
                print!("{}", rep.to_csv());
                for n in &rep.notes {
                    println!("# {n}");
                }
                println!("# {}", if rep.all_pass() { "all groups match" } else { "mismatch" });
            }
        }
        Command::ScaleCycle { cycle: cycle_path, config_a, config_b, out } => {
            let (a, b) = (config(&config_a)?, config(&config_b)?);
            let cyc = cycle(&cycle_path)?;
            let f = scale_factors(&a.params, &b.params);
            let scaled = scale_cycle(&cyc, &f);
            write_atomic(&out, &scaled.to_csv())?;
            println!(
                "k_v={} k_t={} k_d={} k_E={} k_a={}",
                sig6(f.velocity),
                sig6(f.time),
                sig6(f.distance),
                sig6(f.energy),
                sig6(f.acceleration)
            );
            println!(
                "distance ratio {} (1/{}): {} m -> {} m",
                sig6(f.distance),
                sig6(1.0 / f.distance),
                sig6(cycle_stats(&cyc).distance),
                sig6(cycle_stats(&scaled).distance)
            );
        }
        Command::Calibrate { what } => match what {
            Calibrate::Inertia { mass, spacing, length, period, g } => {
                println!("Iz = {} kg m^2", sig6(bifilar_inertia(mass, spacing, length, period, g)?));
            }
            Calibrate::Drivetrain { omega, torque, time_constant } => {
                let (b, j) = estimate_damping_inertia(omega, torque, time_constant)?;
                println!("B = {} N m s/rad", sig6(b));
                println!("J = {} kg m^2", sig6(j));
            }
            Calibrate::Cog { wheelbase, front, rear } => {
                let (lf, lr) = cog_from_axle_loads(wheelbase, front, rear)?;
                println!("lF = {} m", sig6(lf));
                println!("lR = {} m", sig6(lr));
            }
        },
        Command::Report { full_size, scaled, cycles, out_dir } => {
            let (big, small) = (config(&full_size)?, config(&scaled)?);
            let cycles = if cycles.is_empty() {
                presets::standin_cycles()
            } else {
                cycles.iter().map(|p| cycle(p)).collect::<CliResult<Vec<_>>>()?
            };
            let suite = run_experiment_suite(&big, &small, &cycles)?;
            fs::create_dir_all(&out_dir).map_err(|e| invalid(format!("{}: {e}", out_dir.display())))?;
            for (name, csv) in suite.tables() {
                write_atomic(&out_dir.join(name), &csv)?;
            }
            print!("{}", suite.summary());
            let worst = suite.max_cross_scale_deviation();
            if worst > CROSS_SCALE_TOLERANCE {
                println!("# cross-scale deviation {}% exceeds {}%", sig6(worst * 100.0), sig6(CROSS_SCALE_TOLERANCE * 100.0));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Numeric(m)) => {
            eprintln!("numeric failure: {m}");
            ExitCode::from(2)
        }
    }
}
