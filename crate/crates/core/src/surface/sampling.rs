use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SurfaceSpec;
use crate::error::{Error, Result};
use crate::linalg::QVector;

pub const MAX_NEWTON_ITERATIONS: usize = 50;

fn converged(value: f64, grad_norm: f64, x_norm: f64) -> bool {
    value.abs() < 1e-12 * (1.0 + grad_norm * x_norm)
}

/// Newton projection `x <- x - rho(x) grad / |grad|^2` onto `rho = 0`.
pub fn project_to_surface(spec: &SurfaceSpec, seed: &QVector) -> Result<QVector> {
    let mut x = seed.to_dvector();
    for _ in 0..=MAX_NEWTON_ITERATIONS {
        let jet = spec.jet_real(x.as_slice())?;
        let gn2 = jet.grad.norm_squared();
        if converged(jet.value, gn2.sqrt(), x.norm()) {
            return QVector::from_dvector(&x);
        }
        if !(gn2 > 1e-24) || !jet.value.is_finite() {
            return Err(Error::NoConvergence(format!("gradient vanished (|grad| = {:e})", gn2.sqrt())));
        }
        x -= &jet.grad * (jet.value / gn2);
    }
    Err(Error::NoConvergence(format!("no convergence within {MAX_NEWTON_ITERATIONS} iterations")))
}

/// `count` surface points from seeds drawn uniformly in the sampling box.
pub fn sample_points(spec: &SurfaceSpec, count: usize, rng_seed: u64) -> Result<Vec<QVector>> {
    if count == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let center = spec.box_center().to_reals();
    let hw = spec.box_halfwidth();
    let max_attempts = 100 * count;
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        if attempts == max_attempts {
            return Err(Error::SamplingExhausted { requested: count, attempts });
        }
        attempts += 1;
        let seed: Vec<f64> = center.iter().map(|c| c + rng.gen_range(-hw..=hw)).collect();
        let seed = QVector::from_reals(&seed)?;
        match project_to_surface(spec, &seed) {
            Ok(p) => out.push(p),
            Err(Error::NoConvergence(_)) | Err(Error::DivisionByZero) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
