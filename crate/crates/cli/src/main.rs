use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use wvnn::config::{build_state, parse_angle, parse_angle_list, parse_observable, FlatConfig, StateSpec};
use wvnn::meter::{weak_shift_estimate, CouplingSign, MeterConfig, ProtocolConfig};
use wvnn::preset::{preset, preset_names, run_config};
use wvnn::verify::{run_verify, VerifyOptions};
use wvnn::weak::{self, DEFAULT_CLASSIFY_TOL};
use wvnn::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_DEGENERATE: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser)]
#[command(
    name = "wvnn",
    version,
    about = "Weak values and the non-normality of weak operators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Weak value, classification and Henrici departures at one point.
    WeakValue(WeakValueArgs),
    /// Run a parameter sweep and write its tables.
    Sweep(SweepArgs),
    /// Simulate the pointer readout and extrapolate the weak value.
    Meter(MeterArgs),
    /// Run the seeded invariant suite.
    Verify(VerifyArgs),
}

fn angle(s: &str) -> Result<f64, String> {
    parse_angle(s).map_err(|e| e.to_string())
}

#[derive(Args, Clone)]
struct StateArgs {
    /// Observable: pauli:x|y|z, gellmann:K, bloch:THETA,PHI, combo or matrix:FILE.json
    #[arg(long)]
    obs: String,
    #[arg(long, value_parser = angle, allow_hyphen_values = true)]
    theta_i: f64,
    #[arg(long, value_parser = angle, allow_hyphen_values = true)]
    theta_f: f64,
    #[arg(long, value_parser = angle, default_value = "0")]
    xi_i: f64,
    #[arg(long, value_parser = angle, default_value = "0")]
    xi_f: f64,
    /// Qutrit angles, ignored for qubits.
    #[arg(long, value_parser = angle, default_value = "0")]
    alpha_i: f64,
    #[arg(long, value_parser = angle, default_value = "0")]
    chi1_i: f64,
    #[arg(long, value_parser = angle, default_value = "0")]
    chi2_i: f64,
    #[arg(long, value_parser = angle, default_value = "0")]
    alpha_f: f64,
    #[arg(long, value_parser = angle, default_value = "0")]
    chi1_f: f64,
    #[arg(long, value_parser = angle, default_value = "0")]
    chi2_f: f64,
}

impl StateArgs {
    fn resolve(&self) -> wvnn::Result<(wvnn::quantum::Observable, wvnn::linalg::CVector, wvnn::linalg::CVector)> {
        let o = parse_observable(&self.obs)?;
        let pi = build_state(
            o.dim(),
            &StateSpec {
                theta: self.theta_i,
                xi: self.xi_i,
                alpha: self.alpha_i,
                chi1: self.chi1_i,
                chi2: self.chi2_i,
            },
        )?;
        let pf = build_state(
            o.dim(),
            &StateSpec {
                theta: self.theta_f,
                xi: self.xi_f,
                alpha: self.alpha_f,
                chi1: self.chi1_f,
                chi2: self.chi2_f,
            },
        )?;
        Ok((o, pi, pf))
    }
}

#[derive(Args)]
struct WeakValueArgs {
    #[command(flatten)]
    state: StateArgs,
    /// Classification tolerance.
    #[arg(long, default_value_t = DEFAULT_CLASSIFY_TOL)]
    tol: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct SweepArgs {
    /// Named preset (fig2 … fig14).
    #[arg(long)]
    preset: Option<String>,
    /// Flat key = value config file, merged over the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override any config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    obs: Option<String>,
    /// lo,hi,steps
    #[arg(long)]
    theta_i: Option<String>,
    /// lo,hi,steps
    #[arg(long)]
    theta_f: Option<String>,
    #[arg(long)]
    xi_i: Option<String>,
    #[arg(long)]
    xi_f: Option<String>,
    #[arg(long)]
    phi: Option<String>,
    #[arg(long)]
    id: Option<String>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// List the presets and exit.
    #[arg(long)]
    list_presets: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Sign {
    Negative,
    Positive,
}

#[derive(Args)]
struct MeterArgs {
    #[command(flatten)]
    state: StateArgs,
    /// Strictly decreasing coupling strengths (at least three).
    #[arg(long, default_value = "0.01,0.005,0.0025")]
    gamma_ladder: String,
    #[arg(long, default_value_t = MeterConfig::default().grid_points)]
    grid_points: usize,
    #[arg(long, default_value_t = MeterConfig::default().x_extent)]
    x_extent: f64,
    #[arg(long, default_value_t = MeterConfig::default().sigma_x)]
    sigma_x: f64,
    /// Sign of the coupling exponent.
    #[arg(long, value_enum, default_value = "negative")]
    sign: Sign,
}

#[derive(Clone, Copy, ValueEnum)]
enum Report {
    Text,
    Json,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = VerifyOptions::default().seed)]
    seed: u64,
    #[arg(long, default_value_t = VerifyOptions::default().samples)]
    samples: usize,
    #[arg(long, value_enum, default_value = "text")]
    report: Report,
    /// Deliberately break one check (tests the failure path).
    #[arg(long)]
    inject_fault: bool,
}

fn exit_for(e: &Error) -> u8 {
    match e {
        Error::NearOrthogonalPostselection { .. } | Error::DegenerateInput(_) => EXIT_DEGENERATE,
        _ => EXIT_USAGE,
    }
}

/// `println!` that exits quietly when the reader has gone away.
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write;
        if let Err(e) = writeln!(std::io::stdout().lock(), $($arg)*) {
            if e.kind() == std::io::ErrorKind::BrokenPipe {
                std::process::exit(0);
            }
            return Err(Error::Io(e.to_string()));
        }
    }};
}

fn print_json(v: &impl serde::Serialize) -> wvnn::Result<()> {
    out!(
        "{}",
        serde_json::to_string_pretty(v).map_err(|e| Error::Io(e.to_string()))?
    );
    Ok(())
}

fn cmd_weak_value(a: &WeakValueArgs) -> wvnn::Result<u8> {
    let (o, pi, pf) = a.state.resolve()?;
    let r = weak::weak_value_report(&o, &pi, &pf, a.tol)?;
    print_json(&json!({
        "value": { "re": r.value.re, "im": r.value.im },
        "modulus": r.value.norm(),
        "tags": r.classification.tags(),
        "class_code": r.classification.code(),
        "spectrum_min": r.spectrum_min,
        "spectrum_max": r.spectrum_max,
        "henrici_a": r.henrici_a,
        "henrici_aprime": r.henrici_aprime,
        "overlap_sq": r.overlap_sq,
    }))?;
    Ok(0)
}

fn sweep_config(a: &SweepArgs) -> wvnn::Result<FlatConfig> {
    let mut cfg = match &a.preset {
        Some(name) => preset(name)?,
        None => FlatConfig::default(),
    };
    if let Some(path) = &a.config {
        cfg = cfg.merged(&FlatConfig::load(path)?);
    }
    let flags = [
        ("kind", &a.kind),
        ("observable", &a.obs),
        ("theta_i", &a.theta_i),
        ("theta_f", &a.theta_f),
        ("xi_i", &a.xi_i),
        ("xi_f", &a.xi_f),
        ("phi", &a.phi),
        ("id", &a.id),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            cfg.set(k, v);
        }
    }
    for kv in &a.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::InvalidConfig(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        cfg.set(k.trim(), v.trim());
    }
    Ok(cfg)
}

fn cmd_sweep(a: &SweepArgs) -> wvnn::Result<u8> {
    if a.list_presets {
        for n in preset_names() {
            out!("{n}");
        }
        return Ok(0);
    }
    let run = run_config(&sweep_config(a)?)?;
    let paths = run.write(&a.out, matches!(a.format, Format::Json))?;
    print_json(&json!({
        "files": paths.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        "summary": run.summary,
    }))?;
    Ok(0)
}

fn cmd_meter(a: &MeterArgs) -> wvnn::Result<u8> {
    let (o, pi, pf) = a.state.resolve()?;
    let ladder = parse_angle_list(&a.gamma_ladder)?;
    let value = weak::weak_value_trace(&o, &pi, &pf)?;
    let mut c = ProtocolConfig::new(o, pi, pf, ladder.first().copied().unwrap_or(0.0));
    c.meter = MeterConfig {
        grid_points: a.grid_points,
        x_extent: a.x_extent,
        sigma_x: a.sigma_x,
    };
    c.sign = match a.sign {
        Sign::Negative => CouplingSign::Negative,
        Sign::Positive => CouplingSign::Positive,
    };
    let est = weak_shift_estimate(&c, &ladder)?;
    print_json(&json!({
        "weak_value": { "re": value.re, "im": value.im },
        "re_est": est.re_est,
        "im_est": est.im_est,
        "records": est.records(),
    }))?;
    Ok(0)
}

fn cmd_verify(a: &VerifyArgs) -> wvnn::Result<u8> {
    let report = run_verify(&VerifyOptions {
        seed: a.seed,
        samples: a.samples,
        inject_fault: a.inject_fault,
    });
    match a.report {
        Report::Json => print_json(&report)?,
        Report::Text => {
            out!("seed {}", report.seed);
            for c in &report.checks {
                let status = if c.passed { "PASS" } else { "FAIL" };
                out!(
                    "{status} {:<32} cases={:<6} worst={:.3e} tol={:.0e}",
                    c.name,
                    c.cases,
                    c.worst,
                    c.tolerance
                );
                if let Some(case) = &c.failing_case {
                    out!("     replay: {case}");
                }
            }
            for (k, v) in &report.notes {
                out!("note {k}: {v}");
            }
        }
    }
    Ok(if report.passed { 0 } else { EXIT_VERIFY })
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("WVNN_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| format!("WVNN_THREADS={v:?} is not a count"))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_USAGE);
    }
    let result = match &cli.command {
        Command::WeakValue(a) => cmd_weak_value(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Meter(a) => cmd_meter(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::GridOverflow { .. } = e {
                eprintln!("hint: pass a larger --x-extent or a smaller --gamma-ladder");
            }
            ExitCode::from(exit_for(&e))
        }
    }
}
