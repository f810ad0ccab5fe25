use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use num_complex::Complex64;
use serde_json::{json, Value};

use nclim_core::limits::analyze;
use nclim_core::network::{power_stats, PowerDistribution};
use nclim_core::sweeps::{
    closed_form, load_scenario, oracle_value, preset, run_sweep, self_check, write_csv, write_csv_file,
    ScenarioConfig, Status, SweepSpec,
};
use nclim_core::Error;

const EXIT_VALIDATION: u8 = 1;
const EXIT_DIVERGED: u8 = 2;
const EXIT_INVARIANT: u8 = 3;

#[derive(Parser)]
#[command(name = "nclim", version, about = "Tracking-performance limits of networked control systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OracleOpts {
    /// Cross-check against the numerical optimum.
    #[arg(long)]
    oracle: bool,
    /// Basis degree for the oracle.
    #[arg(long, value_name = "N")]
    basis: Option<usize>,
    /// Quadrature points for the oracle.
    #[arg(long, value_name = "N")]
    grid: Option<usize>,
}

impl OracleOpts {
    fn apply(&self, cfg: &mut ScenarioConfig) {
        cfg.oracle.enabled |= self.oracle;
        if let Some(n) = self.basis {
            cfg.oracle.basis_degree = n;
        }
        if let Some(n) = self.grid {
            cfg.oracle.grid_points = n;
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form limit of one scenario.
    Limit {
        #[arg(long)]
        scenario: PathBuf,
        #[command(flatten)]
        oracle: OracleOpts,
    },
    /// Evaluate a preset or a scenario over a parameter sweep and write CSV.
    Sweep {
        #[arg(long, conflicts_with_all = ["scenario", "sweep"])]
        preset: Option<String>,
        #[arg(long, requires = "sweep")]
        scenario: Option<PathBuf>,
        #[arg(long, requires = "scenario")]
        sweep: Option<PathBuf>,
        /// Output CSV; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        oracle: OracleOpts,
    },
    /// Dump the directions and power statistics behind the limit.
    Factorize {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Run the invariant suites.
    Check {
        /// Print the full report as JSON.
        #[arg(long)]
        json: bool,
    },
}

/// Prints to stdout, treating a closed pipe as success.
fn emit(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if e.is_divergence() { EXIT_DIVERGED } else { EXIT_VALIDATION })
}

fn complex_vec(v: &DVector<Complex64>) -> Value {
    Value::Array(v.iter().map(|c| json!([c.re, c.im])).collect())
}

fn complex(c: Complex64) -> Value {
    json!([c.re, c.im])
}

fn power(d: &PowerDistribution) -> Value {
    json!({"psi": d.psi, "direction": d.direction.as_ref().map(|v| v.iter().copied().collect::<Vec<f64>>())})
}

fn limit(path: PathBuf, opts: OracleOpts) -> Result<ExitCode, Error> {
    let mut cfg = load_scenario(&path)?;
    opts.apply(&mut cfg);
    let sc = cfg.validate()?;
    let perf = closed_form(&sc)?;
    let mut out = json!({"j1": perf.j1, "j2": perf.j2, "j_total": perf.total});
    if sc.oracle.enabled {
        match oracle_value(&sc) {
            Ok(Some(j)) => {
                out["j_oracle"] = json!(j);
                out["rel_gap"] = json!(nclim_core::sweeps::rel_gap(j, perf.total));
            }
            Ok(None) => out["oracle"] = json!("skipped"),
            Err(e) => out["oracle"] = json!(format!("skipped: {e}")),
        }
    }
    emit(&serde_json::to_string_pretty(&out).expect("json"));
    Ok(ExitCode::SUCCESS)
}

fn sweep(
    preset_name: Option<String>,
    scenario: Option<PathBuf>,
    sweep_file: Option<PathBuf>,
    out: Option<PathBuf>,
    opts: OracleOpts,
) -> Result<ExitCode, Error> {
    let (mut cfg, spec) = match (preset_name, scenario, sweep_file) {
        (Some(name), _, _) => preset(&name)?,
        (None, Some(sc), Some(sw)) => {
            let text = std::fs::read_to_string(&sw).map_err(|e| Error::Io(format!("{}: {e}", sw.display())))?;
            (load_scenario(&sc)?, SweepSpec::from_json(&text)?)
        }
        _ => return Err(Error::Scenario("sweep needs --preset or both --scenario and --sweep".into())),
    };
    opts.apply(&mut cfg);
    let rows = run_sweep(&cfg, &spec)?;
    match out {
        Some(p) => write_csv_file(&rows, &p)?,
        None => write_csv(&rows, std::io::stdout().lock())?,
    }
    let count = |s: Status| rows.iter().filter(|r| r.status == s).count();
    let diverged = count(Status::Diverged);
    eprintln!(
        "{} points: {} ok, {} diverged, {} oracle skipped",
        rows.len(),
        count(Status::Ok),
        diverged,
        count(Status::OracleSkipped)
    );
    if diverged == rows.len() {
        eprintln!("warning: every sweep point diverged");
        return Ok(ExitCode::from(EXIT_DIVERGED));
    }
    Ok(ExitCode::SUCCESS)
}

fn factorize(path: PathBuf) -> Result<ExitCode, Error> {
    let sc = load_scenario(&path)?.validate()?;
    let a = analyze(&sc.plant, &sc.constraints)?;
    let base = power_stats(&sc.constraints, None)?;
    let at_poles = sc
        .plant
        .unstable_poles()
        .iter()
        .map(|&p| {
            let st = power_stats(&sc.constraints, Some(p))?;
            Ok(json!({"pole": complex(p), "f": st.f.as_ref().map(power)}))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let out = json!({
        "nmp_zeros": sc.plant.nmp_zeros().iter().map(|z| complex(*z)).collect::<Vec<_>>(),
        "unstable_poles": sc.plant.unstable_poles().iter().map(|p| complex(*p)).collect::<Vec<_>>(),
        "eta": a.zero_factors.iter().map(|f| complex_vec(f.direction())).collect::<Vec<_>>(),
        "omega": a.pole_directions.iter().map(complex_vec).collect::<Vec<_>>(),
        "gamma": a.network_factors.iter().map(|f| complex_vec(f.direction())).collect::<Vec<_>>(),
        "power": {
            "r": power(&base.r),
            "n": power(&base.n),
            "q": power(&base.q),
            "a": power(&base.a),
            "bandwidth_at_poles": at_poles,
        },
    });
    emit(&serde_json::to_string_pretty(&out).expect("json"));
    Ok(ExitCode::SUCCESS)
}

fn check(as_json: bool) -> ExitCode {
    let report = self_check();
    if as_json {
        emit(&report.to_json());
    } else {
        for s in &report.suites {
            let tag = if s.passed { "PASS" } else { "FAIL" };
            emit(&format!("{tag} {:<24} {:>5} checks {:>9.1} ms", s.name, s.checks, s.elapsed_ms));
            for f in &s.failures {
                emit(&format!("     {f}"));
            }
        }
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_INVARIANT)
    }
}

fn main() -> ExitCode {
    // Usage errors share the validation exit code; 2 is reserved for divergence.
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let res = match cli.command {
        Command::Limit { scenario, oracle } => limit(scenario, oracle),
        Command::Sweep { preset, scenario, sweep: sw, out, oracle } => sweep(preset, scenario, sw, out, oracle),
        Command::Factorize { scenario } => factorize(scenario),
        Command::Check { json } => Ok(check(json)),
    };
    res.unwrap_or_else(|e| fail(&e))
}
