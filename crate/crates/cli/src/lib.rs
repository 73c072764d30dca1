//! Command-line front end: approximation, BCH products, lifting, blow-ups
//! and the verification suite.

pub mod config;
pub mod error;
pub mod io;
pub mod verify;

use std::path::{Path, PathBuf};

use carnot_tangent::ccfields::{AdaptedFrame, CCStructure, PolyVectorField};
use carnot_tangent::curves::{blowup_family, detect_halfline, lift_curve, Control, Rk4, Window};
use carnot_tangent::freecarnot::{bch, build_hall_basis, build_psi, lift_info, FreeLieElement, LiftedStructure};
use carnot_tangent::nilpotent::{approximate, Approximation, ExponentialChart};
use carnot_tangent::rational::{format_q, parse_q};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

pub use config::{Overrides, RunConfig};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "carnot-tangent", version, about = "Nilpotent approximation, free Carnot lifting and curve blow-ups")]
pub struct Cli {
    #[command(flatten)]
    pub options: Options,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Default, Args)]
pub struct Options {
    /// Weighted order of the chart (default 2s)
    #[arg(long, global = true)]
    pub order: Option<u32>,
    /// Step cap for frame selection; the step s for `bch`
    #[arg(long, global = true)]
    pub step: Option<usize>,
    /// Tolerance for numeric checks
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// RK4 step size
    #[arg(long = "rk4-step", global = true)]
    pub rk4_step: Option<f64>,
    /// Worker threads
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// TOML file with defaults for the flags above
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Frame, exponential chart, splitting and nilpotent approximation
    Approximate { structure: PathBuf },
    /// Truncated BCH product of two free Lie algebra elements
    Bch {
        #[arg(long)]
        rank: usize,
        /// Coefficients on the Hall basis, comma separated "p/q"
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
    },
    /// Hall basis and projection summary for the lift of a structure
    LiftInfo { structure: PathBuf },
    /// Blow-ups of a horizontal curve at t0 for each scale
    Blowup {
        structure: PathBuf,
        control: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        t0: f64,
        /// Scales, comma separated
        #[arg(long, value_delimiter = ',', required = true)]
        eta: Vec<f64>,
        /// Blow-up window "lo,hi"
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0,1")]
        window: Vec<f64>,
    },
    /// Lift a control to the free Carnot group and compare projections
    Lift { structure: PathBuf, control: PathBuf },
    /// Run the invariant suite on a structure
    Verify { structure: PathBuf },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Approximate { .. } => "approximate",
            Command::Bch { .. } => "bch",
            Command::LiftInfo { .. } => "lift-info",
            Command::Blowup { .. } => "blowup",
            Command::Lift { .. } => "lift",
            Command::Verify { .. } => "verify",
        }
    }

    fn inputs(&self) -> Vec<PathBuf> {
        match self {
            Command::Approximate { structure } | Command::LiftInfo { structure } | Command::Verify { structure } => {
                vec![structure.clone()]
            }
            Command::Blowup { structure, control, .. } | Command::Lift { structure, control } => {
                vec![structure.clone(), control.clone()]
            }
            Command::Bch { .. } => Vec::new(),
        }
    }
}

/// Parses arguments, runs, and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<i32, CliError> {
    let o = cli.options;
    let flags = Overrides {
        order: o.order,
        step: o.step,
        tol: o.tol,
        rk4_step: o.rk4_step,
        jobs: o.jobs,
        out: o.out,
        config: o.config,
    };
    let cfg = RunConfig::resolve(cli.command.name(), cli.command.inputs(), &flags)?;
    run(&cfg, &cli.command)
}

/// Dispatches one subcommand; `Ok` carries the exit status.
pub fn run(cfg: &RunConfig, command: &Command) -> Result<i32, CliError> {
    match command {
        Command::Approximate { structure } => cmd_approximate(cfg, structure),
        Command::Bch { rank, a, b } => cmd_bch(cfg, *rank, a, b),
        Command::LiftInfo { structure } => cmd_lift_info(cfg, structure),
        Command::Blowup {
            structure,
            control,
            t0,
            eta,
            window,
        } => cmd_blowup(cfg, structure, control, *t0, eta, window),
        Command::Lift { structure, control } => cmd_lift(cfg, structure, control),
        Command::Verify { structure } => cmd_verify(cfg, structure),
    }
}

fn rk4(cfg: &RunConfig) -> Rk4 {
    Rk4 {
        step: cfg.rk4_step,
        ..Rk4::default()
    }
}

fn pipeline(cfg: &RunConfig, structure: &Path) -> Result<(CCStructure, Approximation), CliError> {
    let x: CCStructure = io::read_json(structure)?;
    let a = approximate(&x, cfg.step, cfg.order).map_err(|e| CliError::module("approximate", e))?;
    cfg.check_order(a.frame.step())?;
    Ok((x, a))
}

fn lifted(a: &Approximation) -> Result<LiftedStructure, CliError> {
    let nil = &a.nilpotent;
    let basis = build_hall_basis(nil.r(), nil.step() as usize).map_err(|e| CliError::module("lift", e))?;
    build_psi(&basis, nil).map_err(|e| CliError::module("lift", e))
}

#[derive(Serialize)]
struct ApproximationOut<'a> {
    frame: &'a AdaptedFrame,
    step: u32,
    order: u32,
    chart: &'a ExponentialChart,
    exponential_fields: &'a [PolyVectorField],
    remainder_is_zero: bool,
    nilpotent_fields: &'a [PolyVectorField],
    nilpotent_frame: &'a [PolyVectorField],
    determinant: String,
}

fn cmd_approximate(cfg: &RunConfig, structure: &Path) -> Result<i32, CliError> {
    let (_, a) = pipeline(cfg, structure)?;
    let out = ApproximationOut {
        frame: &a.frame,
        step: a.frame.step(),
        order: a.chart.order(),
        chart: &a.chart,
        exponential_fields: a.decomposition.base().fields(),
        remainder_is_zero: a.decomposition.remainder_is_zero(),
        nilpotent_fields: a.nilpotent.fields(),
        nilpotent_frame: a.nilpotent.frame_fields(),
        determinant: format_q(a.nilpotent.determinant()),
    };
    io::emit(cfg.out.as_deref(), "approximation.json", &io::to_json(&out))?;
    Ok(0)
}

fn parse_coefficients(flag: &str, s: &str) -> Result<Vec<carnot_tangent::Q>, CliError> {
    s.trim_matches(|c| c == '[' || c == ']')
        .split(',')
        .map(|t| parse_q(t.trim()).map_err(|e| CliError::Usage(format!("--{flag}: {e}"))))
        .collect()
}

#[derive(Serialize)]
struct BchOut {
    rank: usize,
    step: usize,
    basis: Vec<String>,
    product: Vec<String>,
}

fn cmd_bch(cfg: &RunConfig, rank: usize, a: &str, b: &str) -> Result<i32, CliError> {
    let step = cfg.step.ok_or_else(|| CliError::Usage("bch needs --step".into()))?;
    let basis = build_hall_basis(rank, step).map_err(|e| CliError::Usage(e.to_string()))?;
    let elem = |flag: &str, s: &str| -> Result<FreeLieElement, CliError> {
        let coef = parse_coefficients(flag, s)?;
        FreeLieElement::new(&basis, coef).map_err(|e| CliError::Usage(format!("--{flag}: {e}")))
    };
    let p = bch(&elem("a", a)?, &elem("b", b)?).map_err(|e| CliError::module("bch", e))?;
    let out = BchOut {
        rank,
        step,
        basis: (0..basis.dim()).map(|k| basis.label(k)).collect(),
        product: p.coef().iter().map(format_q).collect(),
    };
    io::emit(cfg.out.as_deref(), "bch.json", &io::to_json(&out))?;
    Ok(0)
}

fn cmd_lift_info(cfg: &RunConfig, structure: &Path) -> Result<i32, CliError> {
    let (_, a) = pipeline(cfg, structure)?;
    let l = lifted(&a)?;
    io::emit(cfg.out.as_deref(), "lift_info.json", &io::to_json(&lift_info(&l)))?;
    Ok(0)
}

#[derive(Serialize)]
struct BlowupOut {
    t0: f64,
    window: [f64; 2],
    etas: Vec<f64>,
    files: Vec<String>,
    limit_found: bool,
    v: Option<Vec<f64>>,
    norm_v: Option<f64>,
    residuals: Residuals,
}

#[derive(Serialize)]
struct Residuals {
    cauchy: Vec<f64>,
    fit: f64,
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
    io::ensure_dir(&dir)?;
    Ok(dir)
}

fn cmd_blowup(
    cfg: &RunConfig,
    structure: &Path,
    control: &Path,
    t0: f64,
    etas: &[f64],
    window: &[f64],
) -> Result<i32, CliError> {
    let [lo, hi] = window else {
        return Err(CliError::Usage("--window takes two numbers".into()));
    };
    if etas.iter().any(|e| !(*e > 0.0)) {
        return Err(CliError::Usage("scales must be positive".into()));
    }
    let (_, a) = pipeline(cfg, structure)?;
    let h: Control = io::read_json(control)?;
    let window = Window { lo: *lo, hi: *hi };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let family = pool
        .install(|| blowup_family(&a.decomposition, &h, t0, etas, window, rk4(cfg)))
        .map_err(|e| CliError::module("blowup", e))?;
    let dir = out_dir(cfg)?;
    let mut files = Vec::new();
    for (k, c) in family.iter().enumerate() {
        let name = format!("blowup_{k}.csv");
        let mut buf = Vec::new();
        c.write_csv(&mut buf).map_err(|e| CliError::io(&dir.join(&name), e))?;
        io::write_file(&dir.join(&name), &buf)?;
        files.push(name);
    }
    let verdict = detect_halfline(&family, a.nilpotent.r(), cfg.tol.max(1e-3));
    let out = BlowupOut {
        t0,
        window: [*lo, *hi],
        etas: etas.to_vec(),
        files,
        limit_found: verdict.limit_found,
        v: verdict.v,
        norm_v: verdict.norm_v,
        residuals: Residuals {
            cauchy: verdict.cauchy,
            fit: verdict.fit_residual,
        },
    };
    io::write_file(&dir.join("verdict.json"), io::to_json(&out).as_bytes())?;
    Ok(if out.limit_found { 0 } else { 1 })
}

#[derive(Serialize)]
struct LiftOut {
    basis: Vec<String>,
    projection_defect: f64,
    length: f64,
    end: Vec<f64>,
    projected_end: Vec<f64>,
}

fn cmd_lift(cfg: &RunConfig, structure: &Path, control: &Path) -> Result<i32, CliError> {
    let (_, a) = pipeline(cfg, structure)?;
    let h: Control = io::read_json(control)?;
    let l = lifted(&a)?;
    let rep = lift_curve(&h, &l, rk4(cfg), cfg.tol).map_err(|e| CliError::module("lift", e))?;
    let dir = out_dir(cfg)?;
    let mut buf = Vec::new();
    rep.lift.write_csv(&mut buf).map_err(|e| CliError::io(&dir.join("lift.csv"), e))?;
    io::write_file(&dir.join("lift.csv"), &buf)?;
    let out = LiftOut {
        basis: (0..l.basis().dim()).map(|k| l.basis().label(k)).collect(),
        projection_defect: rep.projection_defect,
        length: rep.length,
        end: rep.lift.last().to_vec(),
        projected_end: l.project_f64(rep.lift.last()),
    };
    io::write_file(&dir.join("lift_report.json"), io::to_json(&out).as_bytes())?;
    Ok(0)
}

fn cmd_verify(cfg: &RunConfig, structure: &Path) -> Result<i32, CliError> {
    let x: CCStructure = io::read_json(structure)?;
    let name = structure.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let report = verify::verify(&name, &x, cfg.step, cfg.order, cfg.tol, rk4(cfg), cfg.jobs);
    eprint!("{}", report.table());
    io::emit(cfg.out.as_deref(), "report.json", &io::to_json(&report))?;
    Ok(if report.all_passed() { 0 } else { 1 })
}
