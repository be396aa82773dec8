//! Concrete saddle-point test problems with known Lipschitz constants and
//! exact duality-gap oracles.
//!
//! Every registered problem is defined by a globally evaluable analytic
//! formula, so perturbed evaluations at z ± τe never need projection. The
//! stochastic component ξ is a scalar drawn from a seeded stream with
//! ξ = 0 giving the mean objective.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::DomainSpec;
use crate::rng::Stream;
use crate::scalar::{dot, norm2};
use crate::Real;

/// Row-major dense matrix, just enough linear algebra for the game oracles.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Real>,
}

impl Matrix {
    pub fn from_rows(rows: Vec<Vec<Real>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c));
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Entries uniform in [-1, 1] from a seeded stream.
    pub fn random_pm1(rows: usize, cols: usize, rng: &mut Stream) -> Self {
        Matrix {
            rows,
            cols,
            data: (0..rows * cols).map(|_| rng.gen_range(-1.0..=1.0)).collect(),
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Real {
        self.data[i * self.cols + j]
    }

    /// xᵀA (length cols).
    pub fn left_mul(&self, x: &[Real]) -> Vec<Real> {
        debug_assert_eq!(x.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            for j in 0..self.cols {
                out[j] += xi * self.data[i * self.cols + j];
            }
        }
        out
    }

    /// A y (length rows).
    pub fn right_mul(&self, y: &[Real]) -> Vec<Real> {
        debug_assert_eq!(y.len(), self.cols);
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            out[i] = dot(&self.data[i * self.cols..(i + 1) * self.cols], y);
        }
        out
    }

    pub fn bilinear(&self, x: &[Real], y: &[Real]) -> Real {
        dot(&self.right_mul(y), x)
    }

    pub fn max_row_norm(&self) -> Real {
        (0..self.rows)
            .map(|i| norm2(&self.data[i * self.cols..(i + 1) * self.cols]))
            .fold(0.0, Real::max)
    }

    pub fn max_col_norm(&self) -> Real {
        (0..self.cols)
            .map(|j| {
                (0..self.rows)
                    .map(|i| self.get(i, j).powi(2))
                    .sum::<Real>()
                    .sqrt()
            })
            .fold(0.0, Real::max)
    }

    /// Largest singular value bound via power iteration (deterministic start).
    pub fn op_norm(&self) -> Real {
        if self.rows == 0 || self.cols == 0 {
            return 0.0;
        }
        let mut v = vec![1.0 / (self.cols as Real).sqrt(); self.cols];
        let mut sigma = 0.0;
        for _ in 0..200 {
            let av = self.right_mul(&v);
            let atav = self.left_mul(&av);
            let n = norm2(&atav);
            if n == 0.0 {
                return 0.0;
            }
            sigma = norm2(&av);
            for (vi, &ai) in v.iter_mut().zip(&atav) {
                *vi = ai / n;
            }
        }
        sigma
    }
}

/// r-growth condition: (μ_r/2)·‖z − z*‖_p^r lower-bounds the duality gap.
#[derive(Debug, Clone, Copy)]
pub struct GrowthSpec {
    pub r: Real,
    pub mu_r: Real,
}

type EvalFn = dyn Fn(&[Real], &[Real], Real) -> Real + Send + Sync;
type XiFn = dyn Fn(&mut Stream) -> Real + Send + Sync;
type GapFn = dyn Fn(&[Real], &[Real]) -> Real + Send + Sync;

/// A convex–concave objective f(x, y, ξ) with domains, a stochastic sampler
/// for ξ, a Lipschitz constant and (when available) an exact gap oracle.
#[derive(Clone)]
pub struct SaddleProblem {
    pub name: String,
    pub dx: usize,
    pub dy: usize,
    pub x_domain: DomainSpec<Real>,
    /// `None` for degenerate pure-minimization problems (dy = 0).
    pub y_domain: Option<DomainSpec<Real>>,
    eval: Arc<EvalFn>,
    xi_sampler: Arc<XiFn>,
    /// Lipschitz constant bound with E[M₂(ξ)²] ≤ M₂².
    pub m2: Real,
    /// Bound M̃₂ with E[M₂(ξ)^{1+κ}] ≤ M̃₂^{1+κ} for the heavy-tail regime.
    pub m2_tilde: Real,
    pub solution: Option<Vec<Real>>,
    pub growth: Option<GrowthSpec>,
    gap_oracle: Option<Arc<GapFn>>,
}

impl std::fmt::Debug for SaddleProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SaddleProblem")
            .field("name", &self.name)
            .field("dx", &self.dx)
            .field("dy", &self.dy)
            .field("m2", &self.m2)
            .finish()
    }
}

impl SaddleProblem {
    pub fn dim(&self) -> usize {
        self.dx + self.dy
    }

    pub fn eval(&self, x: &[Real], y: &[Real], xi: Real) -> Real {
        (self.eval)(x, y, xi)
    }

    /// f(z, ξ) on the concatenated vector z = (x, y).
    pub fn eval_z(&self, z: &[Real], xi: Real) -> Real {
        debug_assert_eq!(z.len(), self.dim());
        (self.eval)(&z[..self.dx], &z[self.dx..], xi)
    }

    /// Mean objective f(z) = E_ξ f(z, ξ); by construction ξ = 0 is the mean.
    pub fn eval_mean_z(&self, z: &[Real]) -> Real {
        self.eval_z(z, 0.0)
    }

    pub fn sample_xi(&self, rng: &mut Stream) -> Real {
        (self.xi_sampler)(rng)
    }

    pub fn has_gap_oracle(&self) -> bool {
        self.gap_oracle.is_some()
    }

    /// Exact duality gap max_y f(x̂, y) − min_x f(x, ŷ) of the mean objective.
    pub fn duality_gap(&self, z: &[Real]) -> Result<Real> {
        let oracle = self.gap_oracle.as_ref().ok_or(Error::NoGapOracle)?;
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "gap expects dim {}, got {}",
                self.dim(),
                z.len()
            )));
        }
        Ok(oracle(&z[..self.dx], &z[self.dx..]).max(0.0))
    }
}

/// f(x, y) = xᵀA y on Δ_dx × Δ_dy; deterministic.
pub fn matrix_game(a: Matrix) -> SaddleProblem {
    matrix_game_noisy(a, 0.0, 0)
}

/// Matrix game with additive zero-mean payoff perturbation A + amp·ξ·E,
/// ξ uniform on [-1, 1], E a fixed seeded unit-scale matrix.
pub fn matrix_game_noisy(a: Matrix, amp: Real, seed: u64) -> SaddleProblem {
    let dx = a.rows;
    let dy = a.cols;
    assert!(dx >= 1 && dy >= 1);
    assert!(a.data.iter().all(|v| v.is_finite()), "matrix entries must be finite");
    let mut pert_rng = crate::rng::derive(seed, "matrix-game-perturbation", 0);
    let e = Matrix::random_pm1(dx, dy, &mut pert_rng);

    // On simplices ‖A y‖₂ ≤ max column norm and ‖Aᵀx‖₂ ≤ max row norm.
    let lip = |m: &Matrix| (m.max_col_norm().powi(2) + m.max_row_norm().powi(2)).sqrt();
    let m2 = lip(&a) + amp * lip(&e);

    let gap_a = a.clone();
    let ev_a = a.clone();
    let ev_e = e;
    SaddleProblem {
        name: "matrix_game".into(),
        dx,
        dy,
        x_domain: DomainSpec::simplex(dx),
        y_domain: Some(DomainSpec::simplex(dy)),
        eval: Arc::new(move |x, y, xi| {
            ev_a.bilinear(x, y) + amp * xi * ev_e.bilinear(x, y)
        }),
        xi_sampler: Arc::new(move |rng| if amp == 0.0 { 0.0 } else { rng.gen_range(-1.0..=1.0) }),
        m2,
        m2_tilde: m2,
        solution: None,
        growth: None,
        gap_oracle: Some(Arc::new(move |x, y| {
            let xa = gap_a.left_mul(x);
            let ay = gap_a.right_mul(y);
            let best_y = xa.iter().copied().fold(Real::NEG_INFINITY, Real::max);
            let best_x = ay.iter().copied().fold(Real::INFINITY, Real::min);
            best_y - best_x
        })),
    }
}

/// Matrix game whose value oracle carries additive zero-mean stochastic noise
/// amp·ξ·(⟨u, x⟩ − ⟨v, y⟩) with fixed seeded unit directions u, v and
/// ξ uniform on [-1, 1]. Unlike a payoff-matrix perturbation, the noise
/// gradient has constant norm over the whole domain, so the estimator's
/// second moment stays at its declared level even at the solution.
pub fn matrix_game_additive_noise(a: Matrix, amp: Real, seed: u64) -> SaddleProblem {
    let base = matrix_game(a);
    if amp == 0.0 {
        return base;
    }
    let mut dir_rng = crate::rng::derive(seed, "matrix-game-additive-noise", 0);
    let u = crate::estimator::sample_sphere_raw(base.dx, &mut dir_rng);
    let v = crate::estimator::sample_sphere_raw(base.dy, &mut dir_rng);
    let base_eval = base.eval.clone();
    SaddleProblem {
        eval: Arc::new(move |x, y, xi| {
            let drift: Real = u.iter().zip(x).map(|(a, b)| a * b).sum::<Real>()
                - v.iter().zip(y).map(|(a, b)| a * b).sum::<Real>();
            base_eval(x, y, 0.0) + amp * xi * drift
        }),
        xi_sampler: Arc::new(move |rng| rng.gen_range(-1.0..=1.0)),
        // noise gradient is amp·ξ·(u, -v), norm at most amp·√2
        m2: base.m2 + amp * (2.0 as Real).sqrt(),
        m2_tilde: base.m2_tilde + amp * (2.0 as Real).sqrt(),
        ..base
    }
}

fn ball_lin_max(coef_norm: Real, radius: Real) -> Real {
    // max over ‖v‖ ≤ radius of ⟨c, v⟩
    coef_norm * radius
}

/// f(x, y) = xᵀA y + bᵀx − cᵀy on origin-centered balls of radii rx, ry.
pub fn bilinear_ball_game(a: Matrix, b: Vec<Real>, c: Vec<Real>, rx: Real, ry: Real) -> SaddleProblem {
    assert!(rx > 0.0 && ry > 0.0);
    let dx = a.rows;
    let dy = a.cols;
    assert_eq!(b.len(), dx);
    assert_eq!(c.len(), dy);
    // ∇f = (A y + b, Aᵀx − c); on the balls ‖∇f‖ ≤ ‖A‖(rx + ry) + ‖b‖ + ‖c‖.
    let m2 = a.op_norm() * (rx * rx + ry * ry).sqrt() + (norm2(&b).powi(2) + norm2(&c).powi(2)).sqrt();

    let ev_a = a.clone();
    let ev_b = b.clone();
    let ev_c = c.clone();
    let gap_a = a;
    let gap_b = b;
    let gap_c = c;
    SaddleProblem {
        name: "bilinear_ball".into(),
        dx,
        dy,
        x_domain: DomainSpec::ball(vec![0.0; dx], rx),
        y_domain: Some(DomainSpec::ball(vec![0.0; dy], ry)),
        eval: Arc::new(move |x, y, _xi| ev_a.bilinear(x, y) + dot(&ev_b, x) - dot(&ev_c, y)),
        xi_sampler: Arc::new(|_| 0.0),
        m2,
        m2_tilde: m2,
        solution: None,
        growth: None,
        gap_oracle: Some(Arc::new(move |x, y| {
            // max/min of a linear function over a ball is radius·‖coefficient‖
            let mut ax_c = gap_a.left_mul(x);
            for (v, &ci) in ax_c.iter_mut().zip(&gap_c) {
                *v -= ci;
            }
            let mut ay_b = gap_a.right_mul(y);
            for (v, &bi) in ay_b.iter_mut().zip(&gap_b) {
                *v += bi;
            }
            dot(&gap_b, x) - dot(&gap_c, y)
                + ball_lin_max(norm2(&ax_c), ry)
                + ball_lin_max(norm2(&ay_b), rx)
        })),
    }
}

/// Bilinear ball game whose value oracle carries additive zero-mean noise
/// amp·ξ·(⟨u, x⟩ − ⟨v, y⟩) with fixed seeded unit directions u, v and
/// ξ uniform on [-1, 1]; the noise gradient has constant norm everywhere.
pub fn bilinear_ball_game_additive_noise(
    a: Matrix,
    rx: Real,
    ry: Real,
    amp: Real,
    seed: u64,
) -> SaddleProblem {
    let dx = a.rows;
    let dy = a.cols;
    let base = bilinear_ball_game(a, vec![0.0; dx], vec![0.0; dy], rx, ry);
    if amp == 0.0 {
        return base;
    }
    let mut dir_rng = crate::rng::derive(seed, "ball-game-additive-noise", 0);
    let u = crate::estimator::sample_sphere_raw(dx, &mut dir_rng);
    let v = crate::estimator::sample_sphere_raw(dy, &mut dir_rng);
    let base_eval = base.eval.clone();
    SaddleProblem {
        eval: Arc::new(move |x, y, xi| {
            let drift: Real = u.iter().zip(x).map(|(a, b)| a * b).sum::<Real>()
                - v.iter().zip(y).map(|(a, b)| a * b).sum::<Real>();
            base_eval(x, y, 0.0) + amp * xi * drift
        }),
        xi_sampler: Arc::new(move |rng| rng.gen_range(-1.0..=1.0)),
        m2: base.m2 + amp * (2.0 as Real).sqrt(),
        m2_tilde: base.m2_tilde + amp * (2.0 as Real).sqrt(),
        ..base
    }
}

/// max over ‖v‖ ≤ radius of ⟨c_vec, v⟩ − (μ/2)‖v‖², by radial reduction.
fn ball_quad_max(coef_norm: Real, mu: Real, radius: Real) -> Real {
    let rho = (coef_norm / mu).min(radius);
    coef_norm * rho - 0.5 * mu * rho * rho
}

/// Strongly-monotone bilinear game
/// f(x, y) = xᵀA y + (μ/2)‖x‖² − (μ/2)‖y‖² on origin-centered balls.
///
/// The saddle is z* = 0 and the gap satisfies the 2-growth condition with
/// μ_r = μ, making this the restart-acceptance instance.
pub fn strongly_monotone_ball_game(a: Matrix, mu: Real, rx: Real, ry: Real) -> SaddleProblem {
    assert!(mu > 0.0 && rx > 0.0 && ry > 0.0);
    let dx = a.rows;
    let dy = a.cols;
    let m2 = a.op_norm() * (rx * rx + ry * ry).sqrt() + mu * (rx * rx + ry * ry).sqrt();

    let ev_a = a.clone();
    let gap_a = a;
    SaddleProblem {
        name: "strongly_monotone_ball".into(),
        dx,
        dy,
        x_domain: DomainSpec::ball(vec![0.0; dx], rx),
        y_domain: Some(DomainSpec::ball(vec![0.0; dy], ry)),
        eval: Arc::new(move |x, y, _xi| {
            ev_a.bilinear(x, y) + 0.5 * mu * dot(x, x) - 0.5 * mu * dot(y, y)
        }),
        xi_sampler: Arc::new(|_| 0.0),
        m2,
        m2_tilde: m2,
        solution: Some(vec![0.0; dx + dy]),
        growth: Some(GrowthSpec { r: 2.0, mu_r: mu }),
        gap_oracle: Some(Arc::new(move |x, y| {
            let atx = gap_a.left_mul(x);
            let ay = gap_a.right_mul(y);
            0.5 * mu * dot(x, x)
                + 0.5 * mu * dot(y, y)
                + ball_quad_max(norm2(&atx), mu, ry)
                + ball_quad_max(norm2(&ay), mu, rx)
        })),
    }
}

/// Strongly-monotone ball game with an additive zero-mean stochastic term
/// f(x, y, ξ) = xᵀA y + (μ/2)‖x‖² − (μ/2)‖y‖² + σξ(⟨u, x⟩ − ⟨v, y⟩),
/// ξ uniform on [−1, 1], u and v fixed seeded unit vectors. The mean
/// objective, saddle point, growth condition and gap oracle are those of
/// [`strongly_monotone_ball_game`]; the noise keeps the gradient-estimate
/// variance bounded away from zero near the solution.
pub fn strongly_monotone_ball_game_noisy(
    a: Matrix,
    mu: Real,
    rx: Real,
    ry: Real,
    sigma: Real,
    seed: u64,
) -> SaddleProblem {
    assert!(sigma >= 0.0);
    let base = strongly_monotone_ball_game(a, mu, rx, ry);
    if sigma == 0.0 {
        return base;
    }
    let dx = base.dx;
    let dy = base.dy;
    let mut r = crate::rng::derive(seed, "strongly-monotone-noise-direction", 0);
    let u = crate::estimator::sample_sphere_raw::<Real, _>(dx, &mut r);
    let v = crate::estimator::sample_sphere_raw::<Real, _>(dy, &mut r);
    let base_eval = base.eval.clone();
    let m2 = base.m2 + sigma * std::f64::consts::SQRT_2;
    SaddleProblem {
        name: "strongly_monotone_ball_noisy".into(),
        eval: Arc::new(move |x, y, xi| {
            base_eval(x, y, 0.0) + sigma * xi * (dot(&u, x) - dot(&v, y))
        }),
        xi_sampler: Arc::new(|rng| rng.gen_range(-1.0..=1.0)),
        m2,
        m2_tilde: m2,
        ..base
    }
}

/// Bilinear ball game with additive heavy-tailed oracle noise:
/// f(x, y, ξ) = xᵀA y + amp·ξ·(⟨u, x⟩ − ⟨v, y⟩), ξ a centered symmetric
/// Pareto variable with tail index `alpha` and u, v fixed unit directions.
/// For alpha ≤ 2 the noise has infinite variance while E|ξ|^{1+κ} stays
/// finite for 1 + κ < alpha, so the stochastic Lipschitz modulus
/// M₂(ξ) = ‖A‖·√(rx²+ry²) + amp·√2·|ξ| has a finite (1+κ)-th moment only.
pub fn bilinear_ball_game_pareto(
    a: Matrix,
    rx: Real,
    ry: Real,
    alpha: Real,
    amp: Real,
    kappa: Real,
) -> SaddleProblem {
    assert!(alpha > 1.0, "tail index must exceed 1 for a finite mean");
    assert!(1.0 + kappa < alpha, "need E|xi|^(1+kappa) finite");
    let dx = a.rows;
    let dy = a.cols;
    let op = a.op_norm();
    let m2_det = op * (rx * rx + ry * ry).sqrt();

    // E|ξ| and E|ξ|^{1+κ} for the centered symmetric Pareto, estimated once
    // from a long seeded stream so the constants are deterministic.
    let mut moment_rng = crate::rng::derive(alpha.to_bits(), "pareto-moment", 0);
    let n = 200_000;
    let mut acc_abs = 0.0;
    let mut acc = 0.0;
    for _ in 0..n {
        let xi = pareto_centered(alpha, &mut moment_rng).abs();
        acc_abs += xi;
        acc += xi.powf(1.0 + kappa);
    }
    let xi_mean_abs = acc_abs / n as Real;
    let xi_moment = (acc / n as Real).powf(1.0 / (1.0 + kappa));
    let sqrt2 = (2.0 as Real).sqrt();
    let m2 = m2_det + amp * sqrt2 * xi_mean_abs;
    // Minkowski: (E (a + b|ξ|)^{1+κ})^{1/(1+κ)} ≤ a + b (E|ξ|^{1+κ})^{1/(1+κ)}
    let m2_tilde = m2_det + amp * sqrt2 * xi_moment;

    let mut dir_rng = crate::rng::derive(alpha.to_bits(), "pareto-noise-direction", 0);
    let u = crate::estimator::sample_sphere_raw::<Real, _>(dx, &mut dir_rng);
    let v = crate::estimator::sample_sphere_raw::<Real, _>(dy, &mut dir_rng);
    let ev_a = a.clone();
    let gap_a = a;
    SaddleProblem {
        name: "pareto_bilinear_ball".into(),
        dx,
        dy,
        x_domain: DomainSpec::ball(vec![0.0; dx], rx),
        y_domain: Some(DomainSpec::ball(vec![0.0; dy], ry)),
        eval: Arc::new(move |x, y, xi| {
            ev_a.bilinear(x, y) + amp * xi * (dot(&u, x) - dot(&v, y))
        }),
        xi_sampler: Arc::new(move |rng| pareto_centered(alpha, rng)),
        m2,
        m2_tilde,
        solution: Some(vec![0.0; dx + dy]),
        growth: None,
        gap_oracle: Some(Arc::new(move |x, y| {
            let atx = gap_a.left_mul(x);
            let ay = gap_a.right_mul(y);
            ball_lin_max(norm2(&atx), ry) + ball_lin_max(norm2(&ay), rx)
        })),
    }
}

/// Sign-symmetrized, mean-zero Pareto(alpha, 1) sample: s·(P − E[P]) where
/// s = ±1 and the sign-symmetry keeps the mean at zero.
fn pareto_centered(alpha: Real, rng: &mut Stream) -> Real {
    let u: Real = rng.gen_range(1e-12..1.0);
    let p = u.powf(-1.0 / alpha); // Pareto with scale 1
    let mean = alpha / (alpha - 1.0);
    let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
    sign * (p - mean)
}

/// Degenerate problem: minimize |x| on [-1, 1] (dy = 0). Used as the
/// canonical non-smooth instance for estimator tests.
pub fn abs_problem_1d() -> SaddleProblem {
    SaddleProblem {
        name: "abs_1d".into(),
        dx: 1,
        dy: 0,
        x_domain: DomainSpec::boxed(vec![-1.0], vec![1.0]),
        y_domain: None,
        eval: Arc::new(|x, _y, _xi| x[0].abs()),
        xi_sampler: Arc::new(|_| 0.0),
        m2: 1.0,
        m2_tilde: 1.0,
        solution: Some(vec![0.0]),
        growth: Some(GrowthSpec { r: 1.0, mu_r: 2.0 }),
        gap_oracle: Some(Arc::new(|x, _y| x[0].abs())),
    }
}

/// The canonical 2×2 matching-pennies payoff matrix.
pub fn matching_pennies() -> SaddleProblem {
    matrix_game(Matrix::from_rows(vec![vec![1.0, -1.0], vec![-1.0, 1.0]]))
}

/// Free-function form of the gap oracle.
pub fn duality_gap(problem: &SaddleProblem, z: &[Real]) -> Result<Real> {
    problem.duality_gap(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn matching_pennies_gaps() {
        let p = matching_pennies();
        let gap = p.duality_gap(&[0.5, 0.5, 0.5, 0.5]).unwrap();
        assert!(gap.abs() < 1e-15);
        let gap = p.duality_gap(&[1.0, 0.0, 1.0, 0.0]).unwrap();
        assert!((gap - 2.0).abs() < 1e-15);
        let gap = p.duality_gap(&[1.0, 0.0, 0.5, 0.5]).unwrap();
        assert!((gap - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_game_gap_is_zero() {
        let p = matrix_game(Matrix::zeros(3, 2));
        let mut r = rng::derive(3, "zero-game", 0);
        for _ in 0..20 {
            let x = p.x_domain.sample_point(&mut r);
            let y = p.y_domain.as_ref().unwrap().sample_point(&mut r);
            let z: Vec<Real> = x.iter().chain(&y).copied().collect();
            assert!(p.duality_gap(&z).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn bilinear_ball_gap_examples() {
        let p = bilinear_ball_game(Matrix::identity(2), vec![0.0; 2], vec![0.0; 2], 1.0, 1.0);
        assert!(p.duality_gap(&[0.0; 4]).unwrap().abs() < 1e-15);
        let gap = p.duality_gap(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((gap - 1.0).abs() < 1e-12);

        let p = bilinear_ball_game(Matrix::zeros(2, 2), vec![1.0, 0.0], vec![0.0; 2], 1.0, 1.0);
        let gap = p.duality_gap(&[-1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(gap.abs() < 1e-12);
    }

    #[test]
    fn abs_problem_values() {
        let p = abs_problem_1d();
        assert_eq!(p.eval(&[0.5], &[], 0.0), 0.5);
        assert_eq!(p.eval(&[-0.3], &[], 0.0), 0.3);
        assert_eq!(p.solution.as_deref(), Some(&[0.0][..]));
        assert_eq!(p.duality_gap(&[0.0]).unwrap(), 0.0);
    }

    #[test]
    fn strongly_monotone_growth_holds() {
        let p = strongly_monotone_ball_game(Matrix::identity(2), 1.0, 1.0, 1.0);
        let g = p.growth.unwrap();
        let mut r = rng::derive(5, "growth", 0);
        for _ in 0..1000 {
            let x = p.x_domain.sample_point(&mut r);
            let y = p.y_domain.as_ref().unwrap().sample_point(&mut r);
            let z: Vec<Real> = x.iter().chain(&y).copied().collect();
            let gap = p.duality_gap(&z).unwrap();
            let dist2 = dot(&z, &z);
            assert!(
                gap + 1e-12 >= 0.5 * g.mu_r * dist2.powf(g.r / 2.0),
                "growth violated: gap {gap}, bound {}",
                0.5 * g.mu_r * dist2
            );
        }
    }

    #[test]
    fn convexity_concavity_and_lipschitz_sanity() {
        let mut r = rng::derive(6, "cvx", 0);
        let problems = vec![
            matching_pennies(),
            matrix_game_noisy(Matrix::random_pm1(3, 4, &mut rng::derive(1, "m", 0)), 0.3, 9),
            bilinear_ball_game(Matrix::identity(3), vec![0.1, 0.0, -0.2], vec![0.0; 3], 1.0, 2.0),
            strongly_monotone_ball_game(Matrix::identity(2), 0.7, 1.0, 1.0),
        ];
        for p in &problems {
            let yd = p.y_domain.as_ref().unwrap();
            for _ in 0..1000 {
                let x1 = p.x_domain.sample_point(&mut r);
                let x2 = p.x_domain.sample_point(&mut r);
                let y = yd.sample_point(&mut r);
                let lam: Real = r.gen_range(0.0..1.0);
                let xm: Vec<Real> = x1
                    .iter()
                    .zip(&x2)
                    .map(|(a, b)| lam * a + (1.0 - lam) * b)
                    .collect();
                let xi = p.sample_xi(&mut r);
                assert!(
                    p.eval(&xm, &y, xi)
                        <= lam * p.eval(&x1, &y, xi) + (1.0 - lam) * p.eval(&x2, &y, xi) + 1e-9,
                    "convexity in x violated for {}",
                    p.name
                );
                let y1 = yd.sample_point(&mut r);
                let y2 = yd.sample_point(&mut r);
                let x = p.x_domain.sample_point(&mut r);
                let ym: Vec<Real> = y1
                    .iter()
                    .zip(&y2)
                    .map(|(a, b)| lam * a + (1.0 - lam) * b)
                    .collect();
                assert!(
                    p.eval(&x, &ym, xi)
                        >= lam * p.eval(&x, &y1, xi) + (1.0 - lam) * p.eval(&x, &y2, xi) - 1e-9,
                    "concavity in y violated for {}",
                    p.name
                );

                // Lipschitz: |f(z1,ξ) − f(z2,ξ)| ≤ M₂ ‖z1 − z2‖₂ at |ξ| ≤ 1
                let z1: Vec<Real> = x1.iter().chain(&y1).copied().collect();
                let z2: Vec<Real> = x2.iter().chain(&y2).copied().collect();
                let df = (p.eval_z(&z1, xi) - p.eval_z(&z2, xi)).abs();
                let dz: Real = z1
                    .iter()
                    .zip(&z2)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<Real>()
                    .sqrt();
                assert!(
                    df <= p.m2 * dz + 1e-9,
                    "Lipschitz violated for {}: {df} > {} * {dz}",
                    p.name,
                    p.m2
                );
            }
        }
    }

    #[test]
    fn gap_nonnegative_and_zero_at_solution() {
        let p = strongly_monotone_ball_game(Matrix::identity(2), 1.0, 1.0, 1.0);
        assert!(p.duality_gap(p.solution.as_ref().unwrap()).unwrap() <= 1e-12);
        let mut r = rng::derive(7, "gapnn", 0);
        for _ in 0..200 {
            let x = p.x_domain.sample_point(&mut r);
            let y = p.y_domain.as_ref().unwrap().sample_point(&mut r);
            let z: Vec<Real> = x.iter().chain(&y).copied().collect();
            assert!(p.duality_gap(&z).unwrap() >= 0.0);
        }
    }

    #[test]
    fn pareto_noise_is_heavy_tailed_but_centered() {
        let mut r = rng::derive(8, "pareto", 0);
        let alpha = 1.75;
        let n = 200_000;
        let mut sum = 0.0;
        let mut max_abs: Real = 0.0;
        for _ in 0..n {
            let v = pareto_centered(alpha, &mut r);
            sum += v;
            max_abs = max_abs.max(v.abs());
        }
        let mean = sum / n as Real;
        assert!(mean.abs() < 0.05, "mean {mean} not near zero");
        assert!(max_abs > 20.0, "tail too light: max |xi| = {max_abs}");
    }

    #[test]
    fn missing_gap_oracle_is_reported() {
        let mut p = matching_pennies();
        p.gap_oracle = None;
        assert!(matches!(
            p.duality_gap(&[0.5, 0.5, 0.5, 0.5]),
            Err(Error::NoGapOracle)
        ));
    }
}
