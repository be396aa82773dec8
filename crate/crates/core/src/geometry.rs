//! Proximal setups: norms, prox-functions, Bregman divergences and prox maps.
//!
//! Two geometries are supported, matching the two ambient norms the rest of
//! the crate uses:
//!
//! * `p = 2`: Euclidean prox-function `ω(z) = ½‖z − c‖₂²` on balls, boxes and
//!   (via Euclidean projection) simplices;
//! * `p = 1`: entropy prox-function on the probability simplex, where the
//!   prox map is the multiplicative-weights update.
//!
//! A separate power-of-norm prox-function backs the heavy-tail solver mode.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::error::{Error, Result};
use crate::scalar::{norm2, norm_p, Scalar};
#[cfg(test)]
use crate::scalar::dot;

/// Absolute tolerance for domain-membership checks. Prox outputs produced by
/// floating-point projection may sit marginally outside the exact set.
pub const DOMAIN_TOL: f64 = 1e-9;

/// Mass floor restricting simplex iterates to the interior, where the
/// entropy prox-function has finite gradients.
pub const SIMPLEX_MASS_FLOOR: f64 = 1e-12;

/// Constant in the `a_∞² ≤ C·ln(d)/d` bound for the `p = 1` setup.
/// Verified statistically against sphere-uniform draws in the test suite.
pub const A_INF_CONST: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
pub enum DomainKind<S: Scalar> {
    EuclideanBall { center: Vec<S>, radius: S },
    Simplex,
    Box { lo: Vec<S>, hi: Vec<S> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec<S: Scalar> {
    pub kind: DomainKind<S>,
    pub dim: usize,
}

impl<S: Scalar> DomainSpec<S> {
    pub fn ball(center: Vec<S>, radius: S) -> Self {
        assert!(radius > S::zero(), "ball radius must be positive");
        let dim = center.len();
        assert!(dim >= 1);
        DomainSpec {
            kind: DomainKind::EuclideanBall { center, radius },
            dim,
        }
    }

    pub fn unit_ball(dim: usize) -> Self {
        Self::ball(vec![S::zero(); dim], S::one())
    }

    pub fn simplex(dim: usize) -> Self {
        assert!(dim >= 1);
        DomainSpec {
            kind: DomainKind::Simplex,
            dim,
        }
    }

    pub fn boxed(lo: Vec<S>, hi: Vec<S>) -> Self {
        assert_eq!(lo.len(), hi.len());
        assert!(
            lo.iter().zip(&hi).all(|(a, b)| a < b),
            "box bounds must satisfy lo < hi componentwise"
        );
        let dim = lo.len();
        DomainSpec {
            kind: DomainKind::Box { lo, hi },
            dim,
        }
    }

    /// Membership test with absolute tolerance `tol`.
    pub fn contains(&self, z: &[S], tol: S) -> bool {
        if z.len() != self.dim {
            return false;
        }
        match &self.kind {
            DomainKind::EuclideanBall { center, radius } => {
                let d: S = z
                    .iter()
                    .zip(center)
                    .map(|(&a, &b)| (a - b) * (a - b))
                    .sum();
                d.sqrt() <= *radius + tol
            }
            DomainKind::Simplex => {
                let sum: S = z.iter().copied().sum();
                z.iter().all(|&v| v >= -tol) && (sum - S::one()).abs() <= tol * S::from_usize_c(self.dim)
            }
            DomainKind::Box { lo, hi } => z
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(&v, (&l, &h))| v >= l - tol && v <= h + tol),
        }
    }

    /// Euclidean projection onto the domain.
    pub fn project(&self, z: &[S]) -> Vec<S> {
        match &self.kind {
            DomainKind::EuclideanBall { center, radius } => {
                let diff: Vec<S> = z.iter().zip(center).map(|(&a, &b)| a - b).collect();
                let n = norm2(&diff);
                if n <= *radius {
                    z.to_vec()
                } else {
                    let s = *radius / n;
                    center.iter().zip(&diff).map(|(&c, &d)| c + d * s).collect()
                }
            }
            DomainKind::Simplex => project_simplex(z),
            DomainKind::Box { lo, hi } => z
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(&v, (&l, &h))| v.max(l).min(h))
                .collect(),
        }
    }

    /// Uniform-ish random feasible point (exact for balls and boxes,
    /// Dirichlet(1) for the simplex).
    pub fn sample_point<R: Rng>(&self, rng: &mut R) -> Vec<S>
    where
        StandardNormal: Distribution<S>,
    {
        match &self.kind {
            DomainKind::EuclideanBall { center, radius } => {
                let u: f64 = rng.gen::<f64>();
                let scale = *radius * S::from_f64_c(u.powf(1.0 / self.dim as f64));
                let e = super::estimator::sample_sphere_raw::<S, R>(self.dim, rng);
                center.iter().zip(&e).map(|(&c, &ei)| c + ei * scale).collect()
            }
            DomainKind::Simplex => {
                let mut v: Vec<S> = (0..self.dim)
                    .map(|_| {
                        let u: f64 = rng.gen_range(1e-16..1.0);
                        S::from_f64_c(-u.ln())
                    })
                    .collect();
                let s: S = v.iter().copied().sum();
                for x in &mut v {
                    *x /= s;
                }
                v
            }
            DomainKind::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(&l, &h)| {
                    let u = Uniform::new_inclusive(0.0f64, 1.0).sample(rng);
                    l + (h - l) * S::from_f64_c(u)
                })
                .collect(),
        }
    }
}

/// Euclidean projection onto the probability simplex (sort-based threshold).
fn project_simplex<S: Scalar>(z: &[S]) -> Vec<S> {
    let mut u = z.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut css = S::zero();
    let mut rho = 0usize;
    let mut theta = S::zero();
    for (i, &ui) in u.iter().enumerate() {
        css += ui;
        let k = S::from_usize_c(i + 1);
        let t = (css - S::one()) / k;
        if ui - t > S::zero() {
            rho = i + 1;
            theta = t;
        }
    }
    debug_assert!(rho >= 1);
    z.iter().map(|&v| (v - theta).max(S::zero())).collect()
}

/// Which prox-function backs the setup.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProxKind {
    /// ω(z) = ½‖z − c‖₂², prox = gradient step + Euclidean projection.
    Euclidean,
    /// Negative entropy on the simplex, prox = multiplicative weights.
    Entropy,
}

/// A norm / prox-function pair defining the mirror-descent geometry.
#[derive(Debug, Clone)]
pub struct ProxSetup<S: Scalar> {
    /// Exponent of the ambient ℓp norm (2 or 1).
    pub p_norm: u8,
    pub domain: DomainSpec<S>,
    /// Bound a_q² with √(E‖e‖_q⁴) ≤ a_q², q dual to p.
    pub a_q_sq: S,
    /// ω-diameter D = max over z,v of √(2 V_z(v)).
    pub diameter: S,
    pub prox_kind: ProxKind,
}

/// a_q² for the sphere-uniform direction in dimension `d`:
/// 1 for q = 2 (p = 2), `A_INF_CONST·ln(d)/d` for q = ∞ (p = 1).
pub fn a_q_sq_for(p_norm: u8, d: usize) -> f64 {
    match p_norm {
        2 => 1.0,
        1 => {
            if d <= 1 {
                1.0
            } else {
                A_INF_CONST * (d as f64).ln() / d as f64
            }
        }
        _ => unreachable!("unsupported p"),
    }
}

impl<S: Scalar> ProxSetup<S> {
    /// Euclidean setup (p = 2) on any supported bounded domain.
    pub fn euclidean(domain: DomainSpec<S>) -> Result<Self> {
        let diameter = euclidean_diameter(&domain)?;
        Ok(ProxSetup {
            p_norm: 2,
            a_q_sq: S::one(),
            diameter,
            domain,
            prox_kind: ProxKind::Euclidean,
        })
    }

    /// Entropy setup (p = 1) on the probability simplex.
    pub fn entropy_simplex(dim: usize) -> Self {
        let domain = DomainSpec::simplex(dim);
        // KL from any interior point to the barycenter is at most ln d;
        // D = √(2 ln d) is the standard entropy-setup diameter bound.
        let diameter = S::from_f64_c((2.0 * (dim.max(2) as f64).ln()).sqrt());
        ProxSetup {
            p_norm: 1,
            a_q_sq: S::from_f64_c(a_q_sq_for(1, dim)),
            diameter,
            domain,
            prox_kind: ProxKind::Entropy,
        }
    }

    /// The reference point c in ω(z) = ½‖z − c‖₂² (Euclidean setups only).
    fn euclidean_center(&self) -> Vec<S> {
        match &self.domain.kind {
            DomainKind::EuclideanBall { center, .. } => center.clone(),
            DomainKind::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(&l, &h)| (l + h) / S::from_f64_c(2.0))
                .collect(),
            DomainKind::Simplex => {
                let d = S::from_usize_c(self.domain.dim);
                vec![S::one() / d; self.domain.dim]
            }
        }
    }

    /// argmin of ω over the domain: ball center, box midpoint, barycenter.
    pub fn prox_center(&self) -> Vec<S> {
        match self.prox_kind {
            ProxKind::Euclidean => self.euclidean_center(),
            ProxKind::Entropy => {
                let d = S::from_usize_c(self.domain.dim);
                vec![S::one() / d; self.domain.dim]
            }
        }
    }

    /// Prox-function value ω(z).
    pub fn omega(&self, z: &[S]) -> S {
        match self.prox_kind {
            ProxKind::Euclidean => {
                let c = self.euclidean_center();
                let d: S = z.iter().zip(&c).map(|(&a, &b)| (a - b) * (a - b)).sum();
                d / S::from_f64_c(2.0)
            }
            ProxKind::Entropy => {
                let floor = S::from_f64_c(SIMPLEX_MASS_FLOOR);
                z.iter().map(|&v| {
                    let v = v.max(floor);
                    v * v.ln()
                }).sum()
            }
        }
    }

    /// ∇ω(z).
    pub fn grad_omega(&self, z: &[S]) -> Vec<S> {
        match self.prox_kind {
            ProxKind::Euclidean => {
                let c = self.euclidean_center();
                z.iter().zip(&c).map(|(&a, &b)| a - b).collect()
            }
            ProxKind::Entropy => {
                let floor = S::from_f64_c(SIMPLEX_MASS_FLOOR);
                z.iter().map(|&v| S::one() + v.max(floor).ln()).collect()
            }
        }
    }

    /// Bregman divergence V_z(v) = ω(z) − ω(v) − ⟨∇ω(v), z − v⟩.
    ///
    /// Euclidean: ½‖z − v‖₂². Entropy: KL(z‖v).
    pub fn bregman(&self, z: &[S], v: &[S]) -> Result<S> {
        let tol = S::from_f64_c(DOMAIN_TOL);
        if !self.domain.contains(z, tol) {
            return Err(Error::DomainViolation(format!("bregman first arg {z:?}")));
        }
        if !self.domain.contains(v, tol) {
            return Err(Error::DomainViolation(format!("bregman second arg {v:?}")));
        }
        let gv = self.grad_omega(v);
        let mut acc = self.omega(z) - self.omega(v);
        for i in 0..z.len() {
            acc -= gv[i] * (z[i] - v[i]);
        }
        Ok(acc.max(S::zero()))
    }

    /// Mirror-descent step: argmin over the domain of V_z(v) + ⟨γ g, v⟩.
    pub fn prox_step(&self, z: &[S], g: &[S], gamma: S) -> Result<Vec<S>> {
        if z.len() != self.domain.dim || g.len() != self.domain.dim {
            return Err(Error::DimensionMismatch(format!(
                "prox_step expects dim {}, got z:{} g:{}",
                self.domain.dim,
                z.len(),
                g.len()
            )));
        }
        match self.prox_kind {
            ProxKind::Euclidean => {
                let stepped: Vec<S> = z.iter().zip(g).map(|(&zi, &gi)| zi - gamma * gi).collect();
                Ok(self.domain.project(&stepped))
            }
            ProxKind::Entropy => {
                let floor = S::from_f64_c(SIMPLEX_MASS_FLOOR);
                // log-space update with max-shift before exponentiation
                let logw: Vec<S> = z
                    .iter()
                    .zip(g)
                    .map(|(&zi, &gi)| zi.max(floor).ln() - gamma * gi)
                    .collect();
                let m = logw.iter().fold(S::neg_infinity(), |a, &b| a.max(b));
                if !m.is_finite() {
                    return Err(Error::NumericalOverflow("entropy prox log weights".into()));
                }
                let mut v: Vec<S> = logw.iter().map(|&w| (w - m).exp()).collect();
                let sum: S = v.iter().copied().sum();
                if !(sum.is_finite() && sum > S::zero()) {
                    return Err(Error::NumericalOverflow("entropy prox normalization".into()));
                }
                for x in &mut v {
                    *x = (*x / sum).max(floor);
                }
                // re-normalize after flooring
                let sum2: S = v.iter().copied().sum();
                for x in &mut v {
                    *x /= sum2;
                }
                Ok(v)
            }
        }
    }
}

fn euclidean_diameter<S: Scalar>(domain: &DomainSpec<S>) -> Result<S> {
    match &domain.kind {
        DomainKind::EuclideanBall { radius, .. } => {
            if !radius.is_finite() {
                return Err(Error::UnboundedDomain("ball with non-finite radius".into()));
            }
            Ok(*radius * S::from_f64_c(2.0))
        }
        DomainKind::Simplex => Ok(S::from_f64_c(std::f64::consts::SQRT_2)),
        DomainKind::Box { lo, hi } => {
            if lo.iter().chain(hi).any(|v| !v.is_finite()) {
                return Err(Error::UnboundedDomain("box with non-finite bound".into()));
            }
            let d: S = lo.iter().zip(hi).map(|(&l, &h)| (h - l) * (h - l)).sum();
            Ok(d.sqrt())
        }
    }
}

/// Parameters of the heavy-tail prox-function
/// ω(x) = K_q^{1/κ} · κ/(1+κ) · ‖x‖_p^{(1+κ)/κ}.
#[derive(Debug, Clone, Copy)]
pub struct HeavyTailSetup<S: Scalar> {
    /// κ ∈ (0, 1]: the stochastic Lipschitz modulus has a finite (1+κ)-th moment.
    pub kappa: S,
    /// q ∈ [1+κ, ∞), dual exponent of the ambient norm.
    pub q_exp: S,
    /// K_q = 10·max{1, (q−1)^{(1+κ)/2}}.
    pub k_q: S,
}

impl<S: Scalar> HeavyTailSetup<S> {
    pub fn new(kappa: S, q_exp: S) -> Self {
        assert!(kappa > S::zero() && kappa <= S::one(), "kappa in (0, 1]");
        assert!(q_exp >= S::one() + kappa, "q >= 1 + kappa");
        let half = S::from_f64_c(0.5);
        let k_q = S::from_f64_c(10.0)
            * S::one().max((q_exp - S::one()).powf((S::one() + kappa) * half));
        HeavyTailSetup { kappa, q_exp, k_q }
    }

    /// ω(x) under the heavy-tail prox-function.
    pub fn prox_value(&self, setup: &ProxSetup<S>, x: &[S]) -> S {
        let n = norm_p(x, setup.p_norm);
        if n == S::zero() {
            return S::zero();
        }
        let s = (S::one() + self.kappa) / self.kappa;
        self.k_q.powf(S::one() / self.kappa) * (self.kappa / (S::one() + self.kappa)) * n.powf(s)
    }

    /// ∇ω(x) = K_q^{1/κ} ‖x‖₂^{(1−κ)/κ} x (p = 2 only).
    fn grad(&self, x: &[S]) -> Vec<S> {
        let n = norm2(x);
        if n == S::zero() {
            return vec![S::zero(); x.len()];
        }
        let c = self.k_q.powf(S::one() / self.kappa) * n.powf((S::one() - self.kappa) / self.kappa);
        x.iter().map(|&v| v * c).collect()
    }

    /// Mirror step under the heavy-tail geometry on an origin-centered
    /// Euclidean ball: argmin over the ball of ω(v) − ⟨∇ω(z) − γg, v⟩.
    ///
    /// The optimum is radial along w = ∇ω(z) − γg; the radial scalar is
    /// found by bisection on the stationarity condition.
    pub fn prox_step(&self, setup: &ProxSetup<S>, z: &[S], g: &[S], gamma: S) -> Result<Vec<S>> {
        let radius = match &setup.domain.kind {
            DomainKind::EuclideanBall { center, radius }
                if center.iter().all(|&c| c == S::zero()) =>
            {
                *radius
            }
            _ => {
                return Err(Error::ConfigError(
                    "heavy-tail prox requires an origin-centered Euclidean ball".into(),
                ))
            }
        };
        let gz = self.grad(z);
        let w: Vec<S> = gz.iter().zip(g).map(|(&a, &b)| a - gamma * b).collect();
        let wn = norm2(&w);
        if wn == S::zero() {
            return Ok(vec![S::zero(); z.len()]);
        }
        // φ'(ρ) = K^{1/κ} ρ^{1/κ} − ‖w‖, increasing in ρ
        let kpow = self.k_q.powf(S::one() / self.kappa);
        let dphi = |rho: S| kpow * rho.powf(S::one() / self.kappa) - wn;
        let rho = if dphi(radius) <= S::zero() {
            radius
        } else {
            let mut lo = S::zero();
            let mut hi = radius;
            let rel = S::from_f64_c(1e-10);
            while hi - lo > rel * hi.max(S::one()) {
                let mid = (lo + hi) / S::from_f64_c(2.0);
                if dphi(mid) > S::zero() {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            (lo + hi) / S::from_f64_c(2.0)
        };
        let s = rho / wn;
        Ok(w.iter().map(|&v| v * s).collect())
    }
}

/// Convenience free functions mirroring the setup methods.
pub fn bregman<S: Scalar>(setup: &ProxSetup<S>, z: &[S], v: &[S]) -> Result<S> {
    setup.bregman(z, v)
}

pub fn prox_step<S: Scalar>(setup: &ProxSetup<S>, z: &[S], g: &[S], gamma: S) -> Result<Vec<S>> {
    setup.prox_step(z, g, gamma)
}

pub fn diameter<S: Scalar>(setup: &ProxSetup<S>) -> S {
    setup.diameter
}
