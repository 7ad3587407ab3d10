//! Verification batteries: named groups of numerical checks of the structure identities,
//! selected by name from a registry.

use nalgebra::DVector;
use rayon::prelude::*;

use crate::calibration::{compute_mu, d_eta_fd, df_along, mu_determinant_oracle, CalibratedFrame, DEFAULT_FD_STEP};
use crate::delta::{
    assemble_delta, fit_quadric, heisenberg_invariants, signature, Analysis, ClassifyOptions, J_INVARIANCE_TOL,
};
use crate::error::{Error, Result};
use crate::frame::HatFrame;
use crate::surface::SurfaceSpec;

/// One named check: passes iff `value < tol`.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tol: f64,
}

impl Check {
    pub fn new(name: &'static str, value: f64, tol: f64) -> Self {
        Check { name, value, tol }
    }

    pub fn passed(&self) -> bool {
        self.value < self.tol
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        }
    }
}

#[derive(Clone, Debug)]
pub struct BatteryOutcome {
    pub name: &'static str,
    pub status: Status,
    pub checks: Vec<Check>,
    pub message: Option<String>,
}

impl BatteryOutcome {
    fn from_checks(name: &'static str, checks: Vec<Check>) -> Self {
        let status = if checks.iter().all(Check::passed) { Status::Pass } else { Status::Fail };
        BatteryOutcome { name, status, checks, message: None }
    }

    fn failed(name: &'static str, err: &Error) -> Self {
        BatteryOutcome { name, status: Status::Fail, checks: Vec::new(), message: Some(err.to_string()) }
    }

    /// The check closest to (or furthest past) its tolerance.
    pub fn worst(&self) -> Option<&Check> {
        self.checks.iter().max_by(|a, b| (a.value / a.tol).total_cmp(&(b.value / b.tol)))
    }
}

/// Inputs shared by all batteries.
pub struct Context<'a> {
    pub spec: &'a SurfaceSpec,
    pub analysis: &'a Analysis,
    pub opts: &'a ClassifyOptions,
}

impl Context<'_> {
    fn frames(&self) -> &[CalibratedFrame] {
        &self.analysis.frames
    }

    fn hat(&self, i: usize) -> &HatFrame {
        &self.analysis.frames[i].base
    }

    fn df(&self, i: usize, x: &DVector<f64>) -> Result<f64> {
        df_along(self.spec, &self.analysis.points[i], x, DEFAULT_FD_STEP, self.opts.tol_sp1)
    }

    fn is_degenerate(&self) -> bool {
        signature(&self.analysis.delta.matrix, self.opts.eps_rank).is_ok_and(|i| i.zero == 1)
    }
}

pub trait Battery: Sync {
    fn name(&self) -> &'static str;

    fn description(&self) -> &'static str;

    /// Whether the battery makes sense for this surface; inapplicable batteries are skipped
    /// when running `all` and fail when selected by name.
    fn applicable(&self, _ctx: &Context) -> bool {
        true
    }

    fn checks(&self, ctx: &Context) -> Result<Vec<Check>>;

    fn run(&self, ctx: &Context) -> BatteryOutcome {
        match self.checks(ctx) {
            Ok(checks) => BatteryOutcome::from_checks(self.name(), checks),
            Err(e) => BatteryOutcome::failed(self.name(), &e),
        }
    }
}

fn max_over<T: Sync>(items: &[T], f: impl Fn(&T) -> Result<f64> + Sync + Send) -> Result<f64> {
    let vals = items.par_iter().map(f).collect::<Vec<_>>();
    vals.into_iter().try_fold(0.0_f64, |m, v| Ok(m.max(v?)))
}

fn indices(ctx: &Context) -> Vec<usize> {
    (0..ctx.frames().len()).collect()
}

struct QcBattery;

impl Battery for QcBattery {
    fn name(&self) -> &'static str {
        "qc"
    }

    fn description(&self) -> &'static str {
        "definite Sp(1)-invariant II on H, J-invariance of H, Reeb corrections"
    }

    fn checks(&self, ctx: &Context) -> Result<Vec<Check>> {
        let frames = ctx.frames();
        let sp1 = frames.iter().map(|c| c.base.diagnostics.sp1_residual).fold(0.0, f64::max);
        let hj = frames.iter().map(|c| c.base.h_j_residual()).fold(0.0, f64::max);
        let mut ghat_inv = 0.0_f64;
        let mut rhat = 0.0_f64;
        for cf in frames {
            let f = &cf.base;
            let scale = f.ghat.amax();
            for s in 1..=3 {
                let i = f.i_matrix(s);
                ghat_inv = ghat_inv.max((i.transpose() * &f.ghat * &i - &f.ghat).amax() / scale);
                let lhs = (f.h_basis.transpose() * (&f.ii_ambient * &f.rhat[s - 1])) * 2.0;
                rhat = rhat.max((lhs + &f.alpha_hat[s - 1]).amax() / f.ii.amax());
            }
        }
        Ok(vec![
            Check::new("sp1_residual", sp1, ctx.opts.tol_sp1),
            Check::new("h_j_invariance", hj, 1e-12),
            Check::new("ghat_sp1_invariance", ghat_inv, 1e-10),
            Check::new("rhat_relation", rhat, 1e-10),
        ])
    }
}

struct ReebBattery;

impl Battery for ReebBattery {
    fn name(&self) -> &'static str {
        "reeb"
    }

    fn description(&self) -> &'static str {
        "eta_t(xi_s) = delta_ts, xi_s into d eta_s vanishes on H, d eta_hat = 2 omega_hat on H"
    }

    fn checks(&self, ctx: &Context) -> Result<Vec<Check>> {
        let frames = ctx.frames();
        let reeb = frames.iter().map(CalibratedFrame::reeb_residual).fold(0.0, f64::max);
        let h = DEFAULT_FD_STEP;
        let tol_sp1 = ctx.opts.tol_sp1;
        let contraction = max_over(&indices(ctx), |&i| {
            let cf = &frames[i];
            let p = &ctx.analysis.points[i];
            let mut worst = 0.0_f64;
            for s in 1..=3 {
                for c in 0..2 {
                    let x = cf.base.h_basis.column(c).into_owned();
                    let v = d_eta_fd(ctx.spec, p, s, &cf.xi[s - 1], &x, true, h, tol_sp1)?;
                    worst = worst.max(v.abs() / (1.0 + cf.f * cf.ii_scale()));
                }
            }
            Ok(worst)
        })?;
        let compat = max_over(&indices(ctx), |&i| {
            let f = ctx.hat(i);
            let p = &ctx.analysis.points[i];
            let mut worst = 0.0_f64;
            for s in 1..=3 {
                let is = f.i_matrix(s);
                let (a, b) = (0, 1 + s % (f.h_basis.ncols() - 1));
                let x = f.h_basis.column(a).into_owned();
                let y = f.h_basis.column(b).into_owned();
                let d = d_eta_fd(ctx.spec, p, s, &x, &y, false, h, tol_sp1)?;
                let want = 2.0 * (f.ghat.row(b) * is.column(a))[0];
                worst = worst.max((d - want).abs() / (1.0 + want.abs()));
            }
            Ok(worst)
        })?;
        Ok(vec![
            Check::new("eta_xi_delta", reeb, 1e-10),
            Check::new("xi_contraction_d_eta", contraction, 1e-4),
            Check::new("d_eta_hat_compatibility", compat, 1e-4),
        ])
    }
}

struct MuBattery;

impl Battery for MuBattery {
    fn name(&self) -> &'static str {
        "mu"
    }

    fn description(&self) -> &'static str {
        "Pfaffian calibration factor against the determinant oracle"
    }

    fn checks(&self, ctx: &Context) -> Result<Vec<Check>> {
        let dev = max_over(ctx.frames(), |cf| {
            let a = compute_mu(&cf.base)?;
            let b = mu_determinant_oracle(&cf.base)?;
            Ok((a - b).abs() / b)
        })?;
        Ok(vec![Check::new("mu_vs_determinant", dev, 1e-10)])
    }
}

struct EinsteinBattery;

impl Battery for EinsteinBattery {
    fn name(&self) -> &'static str {
        "einstein"
    }

    fn description(&self) -> &'static str {
        "qc-Einstein identities (i)-(iv), calibrated metric relation, constancy of S"
    }

    fn checks(&self, ctx: &Context) -> Result<Vec<Check>> {
        let frames = ctx.frames();
        let restriction = max_over(frames, |cf| {
            let t = &cf.base.tangent_basis;
            let d = assemble_delta(cf)?;
            Ok((t.transpose() * d * t + &cf.base.ii * cf.f).amax() / (cf.f * cf.ii_scale()))
        })?;
        let df_ii = max_over(&indices(ctx), |&i| {
            let cf = &frames[i];
            let mut worst = 0.0_f64;
            for c in 0..2 {
                let x = cf.base.h_basis.column(c).into_owned();
                let d = ctx.df(i, &x)?;
                for s in 1..=3 {
                    worst = worst.max((d - cf.predicted_df(s, &x)).abs());
                }
            }
            Ok(worst)
        })?;
        let df_reeb = max_over(&indices(ctx), |&i| {
            let cf = &frames[i];
            let mut worst = 0.0_f64;
            for s in 0..3 {
                worst = worst.max(ctx.df(i, &cf.base.jn[s])?.abs());
                worst = worst.max(ctx.df(i, &cf.xi[s])?.abs());
            }
            Ok(worst)
        })?;
        let spread = frames.iter().map(|c| c.s_spread).fold(0.0, f64::max);
        let offdiag = frames.iter().map(|c| c.offdiag).fold(0.0, f64::max);
        let metric = frames.iter().map(CalibratedFrame::metric_relation_residual).fold(0.0, f64::max);
        let s_hi = frames.iter().map(|c| c.s_mean).fold(f64::NEG_INFINITY, f64::max);
        let s_lo = frames.iter().map(|c| c.s_mean).fold(f64::INFINITY, f64::min);
        Ok(vec![
            Check::new("delta_restriction", restriction, 1e-8),
            Check::new("df_vs_ii", df_ii, 1e-5),
            Check::new("s_spread", spread, 1e-8),
            Check::new("ii_cross_terms", offdiag, 1e-8),
            Check::new("df_reeb", df_reeb, 1e-5),
            Check::new("calibrated_metric", metric, 1e-8),
            Check::new("s_constancy", s_hi - s_lo, 1e-6),
        ])
    }
}

struct DeltaBattery;

impl Battery for DeltaBattery {
    fn name(&self) -> &'static str {
        "delta"
    }

    fn description(&self) -> &'static str {
        "parallelism, J-invariance and quadruple spectrum of Delta; Delta(N, A) = df(A)"
    }

    fn checks(&self, ctx: &Context) -> Result<Vec<Check>> {
        let form = &ctx.analysis.delta;
        let quad = match signature(&form.matrix, ctx.opts.eps_rank) {
            Ok(_) => 0.0,
            Err(Error::QuadrupleViolation(v)) => v,
            Err(e) => return Err(e),
        };
        let frames = ctx.frames();
        let grad = max_over(&indices(ctx), |&i| {
            let cf = &frames[i];
            let d = assemble_delta(cf)?;
            let mut worst = 0.0_f64;
            for c in 0..2 {
                let x = cf.base.h_basis.column(c).into_owned();
                let lhs = cf.base.normal.dot(&(&d * &x));
                worst = worst.max((lhs - ctx.df(i, &x)?).abs());
            }
            Ok(worst)
        })?;
        Ok(vec![
            Check::new("constancy_dev", form.constancy_dev, ctx.opts.tol_const),
            Check::new("j_residual", form.j_residual, J_INVARIANCE_TOL),
            Check::new("quadruple_spread", quad, 1e-8),
            Check::new("delta_normal_df", grad, 1e-5),
        ])
    }
}

struct PotentialsBattery;

impl Battery for PotentialsBattery {
    fn name(&self) -> &'static str {
        "potentials"
    }

    fn description(&self) -> &'static str {
        "degenerate case: f l_0 constant and f^2 h affine in t_0..t_3"
    }

    fn applicable(&self, ctx: &Context) -> bool {
        ctx.is_degenerate()
    }

    fn checks(&self, ctx: &Context) -> Result<Vec<Check>> {
        if !ctx.is_degenerate() {
            return Err(Error::NotDegenerate);
        }
        let a = ctx.analysis;
        let fit = fit_quadric(&a.delta.matrix, &a.points)?;
        let inv = heisenberg_invariants(&a.frames, &a.delta.matrix, &fit, ctx.opts.eps_rank)?;
        Ok(vec![
            Check::new("fl0_dev", inv.fl0_dev, 1e-6),
            Check::new("potential_fit_residual", inv.potential_fit_residual, 1e-6),
        ])
    }
}

struct NormalizeBattery;

impl Battery for NormalizeBattery {
    fn name(&self) -> &'static str {
        "normalize"
    }

    fn description(&self) -> &'static str {
        "quadric fit and model-equation residual of the normalizing map"
    }

    fn checks(&self, ctx: &Context) -> Result<Vec<Check>> {
        let c = ctx.analysis.classify(ctx.opts.eps_rank)?;
        Ok(vec![
            Check::new("fit_residual", c.fit.relative_residual, 1e-6),
            Check::new("normalization_residual", c.residual, 1e-6),
        ])
    }
}

static REGISTRY: [&dyn Battery; 7] =
    [&QcBattery, &ReebBattery, &MuBattery, &EinsteinBattery, &DeltaBattery, &PotentialsBattery, &NormalizeBattery];

pub fn batteries() -> &'static [&'static dyn Battery] {
    &REGISTRY
}

pub fn battery(name: &str) -> Option<&'static dyn Battery> {
    REGISTRY.iter().copied().find(|b| b.name() == name)
}

/// Run `selection` (a battery name or `all`).
pub fn run_batteries(selection: &str, ctx: &Context) -> Result<Vec<BatteryOutcome>> {
    if selection == "all" {
        return Ok(REGISTRY
            .iter()
            .map(|b| {
                if b.applicable(ctx) {
                    b.run(ctx)
                } else {
                    BatteryOutcome {
                        name: b.name(),
                        status: Status::Skipped,
                        checks: Vec::new(),
                        message: Some("not applicable to this surface".into()),
                    }
                }
            })
            .collect());
    }
    check_selection(selection)?;
    let b = battery(selection).expect("checked above");
    Ok(vec![b.run(ctx)])
}

/// `Ok` for `all` and for registered battery names.
pub fn check_selection(selection: &str) -> Result<()> {
    if selection == "all" || battery(selection).is_some() {
        return Ok(());
    }
    let names: Vec<&str> = REGISTRY.iter().map(|b| b.name()).collect();
    Err(Error::InvalidArgument(format!("unknown battery `{selection}` (known: {}, all)", names.join(", "))))
}
