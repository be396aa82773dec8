//! Deterministic adversarial oracle perturbations δ(z).
//!
//! The noised oracle is φ(z, ξ) = f(z, ξ) + δ(z), where δ depends only on z.
//! Shapes are chosen to be hostile to the two-point estimator rather than
//! benign: the bounded shape oscillates at the smoothing scale, the
//! Lipschitz shape attains its declared modulus exactly.

use crate::problems::SaddleProblem;
use crate::rng;
use crate::scalar::{dot, norm2};
use crate::Real;

#[derive(Debug, Clone)]
pub enum NoiseKind {
    None,
    /// |δ(z)| ≤ Δ: δ(z) = Δ·sign(sin(⟨u, z⟩ / h)), wavelength h ≈ τ.
    Bounded { delta_max: Real, wavelength: Real },
    /// |δ(z₁) − δ(z₂)| ≤ M_{2,δ}‖z₁ − z₂‖₂: δ(z) = M·sin(⟨u, z⟩), ‖u‖₂ = 1.
    Lipschitz { m2_delta: Real },
}

#[derive(Debug, Clone)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    /// Adversary orientation, a unit vector (empty for `None`).
    pub direction: Vec<Real>,
}

impl NoiseModel {
    pub fn none() -> Self {
        NoiseModel {
            kind: NoiseKind::None,
            direction: Vec::new(),
        }
    }

    pub fn bounded(delta_max: Real, wavelength: Real, dim: usize, seed: u64) -> Self {
        assert!(delta_max >= 0.0 && wavelength > 0.0);
        NoiseModel {
            kind: NoiseKind::Bounded {
                delta_max,
                wavelength,
            },
            direction: unit_direction(dim, seed),
        }
    }

    pub fn lipschitz(m2_delta: Real, dim: usize, seed: u64) -> Self {
        assert!(m2_delta >= 0.0);
        NoiseModel {
            kind: NoiseKind::Lipschitz { m2_delta },
            direction: unit_direction(dim, seed),
        }
    }

    /// Declared bound Δ (bounded regime) or 0.
    pub fn delta_max(&self) -> Real {
        match self.kind {
            NoiseKind::Bounded { delta_max, .. } => delta_max,
            _ => 0.0,
        }
    }

    /// Declared Lipschitz constant M_{2,δ} (Lipschitz regime) or 0.
    pub fn m2_delta(&self) -> Real {
        match self.kind {
            NoiseKind::Lipschitz { m2_delta } => m2_delta,
            _ => 0.0,
        }
    }

    /// The perturbation δ(z); a fixed deterministic function of z.
    pub fn delta(&self, z: &[Real]) -> Real {
        match self.kind {
            NoiseKind::None => 0.0,
            NoiseKind::Bounded {
                delta_max,
                wavelength,
            } => {
                let t = dot(&self.direction, z) / wavelength;
                let s = t.sin();
                if s >= 0.0 {
                    delta_max
                } else {
                    -delta_max
                }
            }
            NoiseKind::Lipschitz { m2_delta } => m2_delta * dot(&self.direction, z).sin(),
        }
    }
}

fn unit_direction(dim: usize, seed: u64) -> Vec<Real> {
    let mut r = rng::derive(seed, "noise-direction", 0);
    let u = crate::estimator::sample_sphere_raw::<Real, _>(dim, &mut r);
    debug_assert!((norm2(&u) - 1.0).abs() < 1e-12);
    u
}

/// Noised zeroth-order oracle φ(z, ξ) = f(z, ξ) + δ(z).
pub fn noisy_eval(problem: &SaddleProblem, model: &NoiseModel, z: &[Real], xi: Real) -> Real {
    problem.eval_z(z, xi) + model.delta(z)
}

/// Worst-case bias contribution d·(δ(z+τe) − δ(z−τe))/(2τ) realized by the
/// model along the probe direction, scanned over base points on the probe
/// line. Confirms the noise-floor scaling in experiments.
pub fn adversarial_bias_probe(model: &NoiseModel, direction: &[Real], tau: Real) -> Real {
    assert!(tau > 0.0);
    if matches!(model.kind, NoiseKind::None) {
        return 0.0;
    }
    let d = direction.len() as Real;
    let mut worst: Real = 0.0;
    let steps = 2048;
    for i in 0..=steps {
        let t = -1.0 + 2.0 * i as Real / steps as Real;
        let zp: Vec<Real> = direction.iter().map(|&e| (t + tau) * e).collect();
        let zm: Vec<Real> = direction.iter().map(|&e| (t - tau) * e).collect();
        let bias = d * (model.delta(&zp) - model.delta(&zm)) / (2.0 * tau);
        worst = worst.max(bias.abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::matching_pennies;
    use crate::rng;
    use rand::Rng;

    #[test]
    fn none_model_is_exact() {
        let p = matching_pennies();
        let m = NoiseModel::none();
        let z = [0.4, 0.6, 0.3, 0.7];
        assert_eq!(noisy_eval(&p, &m, &z, 0.0), p.eval_z(&z, 0.0));
    }

    #[test]
    fn bounded_model_respects_bound_exactly() {
        let m = NoiseModel::bounded(0.3, 0.01, 4, 42);
        let mut r = rng::derive(42, "noise-bound-test", 0);
        for _ in 0..100_000 {
            let z: Vec<Real> = (0..4).map(|_| r.gen_range(-1.0..1.0)).collect();
            assert!(m.delta(&z).abs() <= 0.3);
        }
    }

    #[test]
    fn lipschitz_model_empirical_ratio() {
        let m = NoiseModel::lipschitz(0.7, 3, 11);
        let mut r = rng::derive(11, "noise-lip-test", 0);
        for _ in 0..100_000 {
            let z1: Vec<Real> = (0..3).map(|_| r.gen_range(-1.0..1.0)).collect();
            let z2: Vec<Real> = (0..3).map(|_| r.gen_range(-1.0..1.0)).collect();
            let dz = z1
                .iter()
                .zip(&z2)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<Real>()
                .sqrt();
            let dd = (m.delta(&z1) - m.delta(&z2)).abs();
            assert!(dd <= 0.7 * dz * (1.0 + 1e-9));
        }
    }

    #[test]
    fn delta_is_deterministic_in_z() {
        let m = NoiseModel::bounded(0.1, 0.05, 2, 3);
        let z = [0.123, -0.456];
        assert_eq!(m.delta(&z), m.delta(&z));
    }

    #[test]
    fn bias_probe_bounds() {
        let tau = 0.01;
        let dir = unit_direction(4, 5);
        assert_eq!(adversarial_bias_probe(&NoiseModel::none(), &dir, tau), 0.0);

        let m = NoiseModel::bounded(0.2, tau, 4, 5);
        let probe = adversarial_bias_probe(&m, &dir, tau);
        let cap = 4.0 * 0.2 / tau;
        assert!(probe <= cap + 1e-9, "{probe} > {cap}");
        // the oscillating shape should realize a large fraction of the cap
        assert!(probe >= 0.1 * cap, "{probe} too small vs cap {cap}");

        let m = NoiseModel::lipschitz(0.5, 4, 5);
        let probe = adversarial_bias_probe(&m, &dir, 0.3);
        assert!(probe <= 4.0 * 0.5 * (1.0 + 1e-9));
    }
}
