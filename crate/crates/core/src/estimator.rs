//! Random direction sampling, the two-point gradient estimator and
//! Monte-Carlo randomized smoothing.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::noise::{noisy_eval, NoiseModel};
use crate::problems::SaddleProblem;
use crate::scalar::{norm2, Scalar};
use crate::Real;

/// Uniform sample from the Euclidean unit sphere in dimension `d`,
/// via normalized standard Gaussians.
pub fn sample_sphere_raw<S: Scalar, R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<S>
where
    StandardNormal: Distribution<S>,
{
    assert!(d >= 1);
    loop {
        let v: Vec<S> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let n = norm2(&v);
        // probability-zero underflow guard
        if n > S::from_f64_c(1e-150) {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// A unit direction split into its (x, y) blocks.
#[derive(Debug, Clone)]
pub struct Direction {
    pub e: Vec<Real>,
    pub dx: usize,
    pub dy: usize,
}

impl Direction {
    pub fn sample<R: Rng + ?Sized>(dx: usize, dy: usize, rng: &mut R) -> Self {
        Direction {
            e: sample_sphere_raw(dx + dy, rng),
            dx,
            dy,
        }
    }

    pub fn x_block(&self) -> &[Real] {
        &self.e[..self.dx]
    }

    pub fn y_block(&self) -> &[Real] {
        &self.e[self.dx..]
    }

    /// (e_x, −e_y): the descent–ascent multiplier.
    pub fn flipped(&self) -> Vec<Real> {
        let mut v = self.e.clone();
        for yi in &mut v[self.dx..] {
            *yi = -*yi;
        }
        v
    }
}

/// Uniform sphere sample (no block structure).
pub fn sample_sphere<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<Real> {
    sample_sphere_raw(d, rng)
}

/// Uniform sample from the Euclidean unit ball: sphere sample scaled by
/// U^{1/d}.
pub fn sample_ball<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<Real> {
    let e = sample_sphere_raw::<Real, R>(d, rng);
    let u: Real = rng.gen_range(0.0..1.0f64);
    let s = u.powf(1.0 / d as Real);
    e.into_iter().map(|x| x * s).collect()
}

/// Two-point zeroth-order gradient estimate.
#[derive(Debug, Clone)]
pub struct GradientEstimate {
    /// g = (d/2τ)(φ(z+τe, ξ) − φ(z−τe, ξ))·(e_x, −e_y).
    pub g: Vec<Real>,
    /// The scalar multiplier (d/2τ)(φ₊ − φ₋).
    pub scale: Real,
    pub direction: Direction,
}

/// Sample (e, ξ) independently and form the two-point estimate. Both oracle
/// calls share the same ξ realization.
pub fn estimate_gradient(
    problem: &SaddleProblem,
    model: &NoiseModel,
    z: &[Real],
    tau: Real,
    rng: &mut crate::rng::Stream,
) -> GradientEstimate {
    assert!(tau > 0.0);
    debug_assert_eq!(z.len(), problem.dim());
    let dir = Direction::sample(problem.dx, problem.dy, rng);
    let xi = problem.sample_xi(rng);
    estimate_gradient_at(problem, model, z, tau, dir, xi)
}

/// Deterministic core of the estimator for a fixed (e, ξ) pair.
pub fn estimate_gradient_at(
    problem: &SaddleProblem,
    model: &NoiseModel,
    z: &[Real],
    tau: Real,
    dir: Direction,
    xi: Real,
) -> GradientEstimate {
    let d = problem.dim() as Real;
    let zp: Vec<Real> = z.iter().zip(&dir.e).map(|(&a, &b)| a + tau * b).collect();
    let zm: Vec<Real> = z.iter().zip(&dir.e).map(|(&a, &b)| a - tau * b).collect();
    let phi_p = noisy_eval(problem, model, &zp, xi);
    let phi_m = noisy_eval(problem, model, &zm, xi);
    let scale = d / (2.0 * tau) * (phi_p - phi_m);
    let mut g = dir.flipped();
    for v in &mut g {
        *v *= scale;
    }
    GradientEstimate {
        g,
        scale,
        direction: dir,
    }
}

/// Monte-Carlo estimate of the smoothed value f^τ(z) = E_ẽ f(z + τẽ) of the
/// mean objective, with standard error. τ = 0 returns f(z) exactly.
pub fn smooth_value<R: Rng + ?Sized>(
    problem: &SaddleProblem,
    z: &[Real],
    tau: Real,
    n_samples: usize,
    rng: &mut R,
) -> (Real, Real) {
    assert!(tau >= 0.0 && n_samples >= 1);
    if tau == 0.0 {
        return (problem.eval_mean_z(z), 0.0);
    }
    let d = problem.dim();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..n_samples {
        let e = sample_ball(d, rng);
        let zp: Vec<Real> = z.iter().zip(&e).map(|(&a, &b)| a + tau * b).collect();
        let v = problem.eval_mean_z(&zp);
        sum += v;
        sum_sq += v * v;
    }
    let n = n_samples as Real;
    let mean = sum / n;
    let var = ((sum_sq / n - mean * mean).max(0.0)) / n.max(2.0);
    (mean, var.sqrt())
}

/// Monte-Carlo estimate of the descent–ascent field of f^τ via the sphere
/// identity ∇f^τ(z) = E[(d/τ) f(z+τe) e], with the y-block sign flip. This
/// is the one-point verification oracle for the two-point estimator: it
/// shares no code path with `estimate_gradient`.
pub fn smooth_gradient_oracle<R: Rng + ?Sized>(
    problem: &SaddleProblem,
    z: &[Real],
    tau: Real,
    n_samples: usize,
    rng: &mut R,
) -> Vec<Real> {
    assert!(tau > 0.0 && n_samples >= 1);
    let d = problem.dim();
    let mut acc = vec![0.0; d];
    for _ in 0..n_samples {
        let dir = Direction::sample(problem.dx, problem.dy, rng);
        let zp: Vec<Real> = z.iter().zip(&dir.e).map(|(&a, &b)| a + tau * b).collect();
        let v = problem.eval_mean_z(&zp) * d as Real / tau;
        for (a, ei) in acc.iter_mut().zip(dir.flipped()) {
            *a += v * ei;
        }
    }
    for a in &mut acc {
        *a /= n_samples as Real;
    }
    acc
}
