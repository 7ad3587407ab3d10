//! The `qcgeom` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::calibration::calibrate;
use crate::delta::{
    analyze, assemble_delta, heisenberg_invariants, signature, Analysis, Classification, ClassifyOptions,
    DEFAULT_EPS_RANK, DEFAULT_TOL_CONST,
};
use crate::error::{Error, Result};
use crate::frame::{check_qc, hat_structure, DEFAULT_TOL_SP1};
use crate::linalg::{sym_eigen, QVector};
use crate::report::{BatteryEcho, ClassificationEcho, Diagnostics, FrameEcho, Outcome, Report, SurfaceEcho};
use crate::surface::{parse_surface, project_to_surface, sample_points, SurfaceSpec};
use crate::verify::{check_selection, run_batteries, Context, Status};

#[derive(Debug, Parser)]
#[command(name = "qcgeom", version, about = "Classify qc-hypersurfaces of flat quaternion space")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Calibrate, assemble the parallel form and name the model hyperquadric.
    Classify(Common),
    /// Run the invariant batteries.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Battery name, or `all`.
        #[arg(long, default_value = "all")]
        battery: String,
    },
    /// Dump the calibrated structure at one point.
    Frame {
        #[command(flatten)]
        common: Common,
        /// 4(n+1) comma-separated reals; projected to the surface first.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Classify and print the normalizing affine map with the normalized defining function.
    Normalize(Common),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Surface file.
    #[arg(short = 's', long = "surface")]
    pub surface: PathBuf,
    #[arg(long, default_value_t = 32)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Emit the JSON report on standard output.
    #[arg(long)]
    pub json: bool,
    #[arg(long = "tol-sp1", default_value_t = DEFAULT_TOL_SP1)]
    pub tol_sp1: f64,
    #[arg(long = "tol-const", default_value_t = DEFAULT_TOL_CONST)]
    pub tol_const: f64,
}

impl Common {
    fn options(&self) -> ClassifyOptions {
        ClassifyOptions {
            samples: self.samples,
            rng_seed: self.seed,
            tol_sp1: self.tol_sp1,
            tol_const: self.tol_const,
            eps_rank: DEFAULT_EPS_RANK,
        }
    }
}

/// Parse `args` (including the program name), run, write the report and return the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
                return 1;
            }
            let _ = write!(out, "{text}");
            return 0;
        }
    };
    let (report, json) = execute(&cli.command);
    if json {
        let _ = writeln!(out, "{}", report.to_json());
    } else {
        let _ = write!(out, "{}", report.to_table());
    }
    if let Some(m) = &report.message {
        if report.outcome != Outcome::Ok || json {
            let _ = writeln!(err, "qcgeom: {m}");
        }
    }
    report.outcome.exit_code()
}

fn execute(command: &Command) -> (Report, bool) {
    let (name, common) = match command {
        Command::Classify(c) => ("classify", c),
        Command::Verify { common, .. } => ("verify", common),
        Command::Frame { common, .. } => ("frame", common),
        Command::Normalize(c) => ("normalize", c),
    };
    let mut report = Report::new(name, common.seed);
    let spec = match load(&common.surface) {
        Ok(s) => s,
        Err(e) => {
            report.outcome = Outcome::Error;
            report.message = Some(format!("{}: {e}", common.surface.display()));
            return (report, common.json);
        }
    };
    report.surface = Some(SurfaceEcho::new(&spec));
    let opts = common.options();
    let result = match command {
        Command::Classify(_) => classify_cmd(&spec, &opts, &mut report, false),
        Command::Normalize(_) => classify_cmd(&spec, &opts, &mut report, true),
        Command::Verify { battery, .. } => verify_cmd(&spec, &opts, battery, &mut report),
        Command::Frame { point, .. } => frame_cmd(&spec, &opts, point, &mut report),
    };
    if let Err(e) = result {
        report.outcome = if e.is_rejection() { Outcome::Rejected } else { Outcome::Error };
        if e.is_rejection() {
            rejection_diagnostics(&spec, &opts, &e, &mut report.diagnostics);
        }
        report.message = Some(e.to_string());
    }
    (report, common.json)
}

fn load(path: &PathBuf) -> Result<SurfaceSpec> {
    let text = std::fs::read_to_string(path)?;
    Ok(parse_surface(&text)?)
}

fn analysis_diagnostics(a: &Analysis, d: &mut Diagnostics) {
    let frames = &a.frames;
    let count = frames.len() as f64;
    let max = |f: &dyn Fn(&crate::calibration::CalibratedFrame) -> f64| frames.iter().map(f).fold(f64::MIN, f64::max);
    let min = |f: &dyn Fn(&crate::calibration::CalibratedFrame) -> f64| frames.iter().map(f).fold(f64::MAX, f64::min);
    d.push("sp1_residual", max(&|c| c.base.diagnostics.sp1_residual));
    d.push("constancy_dev", a.delta.constancy_dev);
    d.push("j_residual", a.delta.j_residual);
    d.push("S_mean", frames.iter().map(|c| c.s_mean).sum::<f64>() / count);
    d.push("S_spread", max(&|c| c.s_spread));
    d.push("f_min", min(&|c| c.f));
    d.push("f_max", max(&|c| c.f));
    d.push("reeb_residual", max(&|c| c.reeb_residual()));
}

fn classification_diagnostics(a: &Analysis, c: &Classification, eps_rank: f64, d: &mut Diagnostics) -> Result<()> {
    d.push("fit_residual", c.fit.relative_residual);
    d.push("normalization_residual", c.residual);
    if c.inertia.zero > 0 {
        let h = heisenberg_invariants(&a.frames, &a.delta.matrix, &c.fit, eps_rank)?;
        d.push("fl0_dev", h.fl0_dev);
        d.push("potential_fit_residual", h.potential_fit_residual);
    }
    Ok(())
}

fn classify_cmd(spec: &SurfaceSpec, opts: &ClassifyOptions, report: &mut Report, normalize: bool) -> Result<()> {
    let analysis = analyze(spec, opts)?;
    report.points_used = analysis.points.len();
    analysis_diagnostics(&analysis, &mut report.diagnostics);
    let c = analysis.classify(opts.eps_rank)?;
    classification_diagnostics(&analysis, &c, opts.eps_rank, &mut report.diagnostics)?;
    report.classification = Some(ClassificationEcho::new(&c));
    if normalize {
        // only polynomial defining functions can be rewritten in normalized coordinates
        match spec.affine_image(&c.normalizer) {
            Ok(image) => report.normalized_rho = Some(image.rho.to_string()),
            Err(Error::NotPolynomial(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

fn verify_cmd(spec: &SurfaceSpec, opts: &ClassifyOptions, selection: &str, report: &mut Report) -> Result<()> {
    check_selection(selection)?;
    let analysis = analyze(spec, opts)?;
    report.points_used = analysis.points.len();
    analysis_diagnostics(&analysis, &mut report.diagnostics);
    let outcomes = run_batteries(selection, &Context { spec, analysis: &analysis, opts })?;
    let failed: Vec<&str> = outcomes.iter().filter(|o| o.status == Status::Fail).map(|o| o.name).collect();
    report.batteries = outcomes.iter().map(BatteryEcho::new).collect();
    if !failed.is_empty() {
        report.outcome = Outcome::Rejected;
        report.message = Some(format!("failed batteries: {}", failed.join(", ")));
    }
    Ok(())
}

fn parse_point(text: &str, slots: usize) -> Result<QVector> {
    let reals = text
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Error::InvalidArgument(format!("bad coordinate `{}`", t.trim()))))
        .collect::<Result<Vec<f64>>>()?;
    if reals.len() != 4 * slots {
        return Err(Error::InvalidArgument(format!("--point needs {} reals, got {}", 4 * slots, reals.len())));
    }
    QVector::from_reals(&reals)
}

fn frame_cmd(spec: &SurfaceSpec, opts: &ClassifyOptions, point: &str, report: &mut Report) -> Result<()> {
    let seed = parse_point(point, spec.n_plus_1)?;
    let p = project_to_surface(spec, &seed)?;
    let cf = calibrate(hat_structure(spec, &p, opts.tol_sp1)?)?;
    let delta = assemble_delta(&cf)?;
    let ii_h = sym_eigen(&(-&cf.base.ghat))?;
    report.points_used = 1;
    let d = &mut report.diagnostics;
    d.push("sp1_residual", cf.base.diagnostics.sp1_residual);
    d.push("S_spread", cf.s_spread);
    d.push("reeb_residual", cf.reeb_residual());
    d.push("r_residual", cf.r_residual);
    d.push("projection_distance", (p.to_dvector() - seed.to_dvector()).norm());
    let inertia = signature(&delta, opts.eps_rank)?;
    d.push("delta_zero_quadruples", inertia.zero as f64);
    report.frame = Some(FrameEcho::new(
        &cf.base.point,
        &cf.base.normal,
        &cf.base.jn,
        &ii_h.values,
        cf.mu,
        cf.f,
        cf.s_mean,
        &cf.r,
        &delta,
    ));
    Ok(())
}

/// For a rejected surface, record the qc test over the whole sample when that is computable.
fn rejection_diagnostics(spec: &SurfaceSpec, opts: &ClassifyOptions, e: &Error, d: &mut Diagnostics) {
    match e {
        Error::NotQcHypersurface(_) => {
            let Ok(points) = sample_points(spec, opts.samples, opts.rng_seed) else {
                return;
            };
            let diags: Vec<_> =
                points.iter().filter_map(|p| spec.jet(p).ok().and_then(|j| check_qc(&j, opts.tol_sp1).ok())).collect();
            if diags.is_empty() {
                return;
            }
            let sp1 = diags.iter().map(|q| q.sp1_residual);
            d.push("sp1_residual", sp1.clone().fold(f64::MIN, f64::max));
            d.push("sp1_residual_min", sp1.fold(f64::MAX, f64::min));
            d.push("qc_failed_points", diags.iter().filter(|q| !q.passed()).count() as f64);
            d.push("qc_checked_points", diags.len() as f64);
        }
        Error::NotParallel(dev) => d.push("constancy_dev", *dev),
        Error::NotJInvariant(r) => d.push("j_residual", *r),
        Error::FitResidual(r) => d.push("normalization_residual", *r),
        _ => {}
    }
}
