//! The zeroth-order stochastic mirror descent loop with the step-size
//! schedules for both noise regimes, the variable-separated update and the
//! heavy-tail mode.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::estimator::estimate_gradient;
use crate::geometry::{a_q_sq_for, HeavyTailSetup, ProxKind, ProxSetup};
use crate::noise::NoiseModel;
use crate::problems::SaddleProblem;
use crate::rng;
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    /// Bounded noise |δ| ≤ Δ: M² = C·d·a_q²·M₂² + d²·a_q²·Δ²/τ².
    Case1 { delta_max: Real },
    /// Lipschitz noise: M² = C·d·a_q²·(M₂² + M_{2,δ}²).
    Case2 { m2_delta: Real },
    /// Infinite-variance regime with the power prox-function.
    HeavyTail { kappa: Real },
    Manual { gamma: Real },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// One prox on the joint space Z = X × Y.
    Joint,
    /// Two proximal steps, on X and on Y separately.
    Separated,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub n_iters: usize,
    /// Smoothing radius τ > 0.
    pub tau: Real,
    pub step_rule: StepRule,
    pub mode: Mode,
    pub record_trace: bool,
    /// Record the duality gap of the running average at power-of-2 iterations.
    pub gap_checkpoints: bool,
    pub seed: u64,
    /// The hidden O(·) constant in M_case1/M_case2, exposed for
    /// constant-factor studies. Default 1.
    pub step_constant: Real,
}

impl SolverConfig {
    pub fn new(n_iters: usize, tau: Real, step_rule: StepRule, seed: u64) -> Self {
        assert!(n_iters >= 1 && tau > 0.0);
        SolverConfig {
            n_iters,
            tau,
            step_rule,
            mode: Mode::Joint,
            record_trace: false,
            gap_checkpoints: false,
            seed,
            step_constant: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    /// γ-weighted averaged iterate ẑ^N.
    pub z_hat: Vec<Real>,
    /// Exact duality gap at ẑ^N, when the problem has a gap oracle.
    pub final_gap: Option<Real>,
    /// (iteration, gap of running average) at checkpoints.
    pub gap_series: Vec<(u64, Real)>,
    /// Distinct step sizes used (one entry for a plain solve, one per stage
    /// under restarts).
    pub gammas: Vec<Real>,
    /// Iterates z^1..z^N when trace recording is on.
    pub trace: Option<Vec<Vec<Real>>>,
    pub wall_ms: u64,
    pub oracle_calls: u64,
    pub seed: u64,
    pub n_iters: u64,
}

/// γ = (D/M_case1)·√(2/N) with M²_case1 = C·d·a_q²·M₂² + d²·a_q²·Δ²/τ².
pub fn step_size_case1(
    diameter: Real,
    m2: Real,
    d: usize,
    a_q_sq: Real,
    delta_max: Real,
    tau: Real,
    n: usize,
    c: Real,
) -> Real {
    let d = d as Real;
    let m_sq = c * d * a_q_sq * m2 * m2 + d * d * a_q_sq * delta_max * delta_max / (tau * tau);
    diameter / m_sq.sqrt() * (2.0 / n as Real).sqrt()
}

/// γ = (D/M_case2)·√(2/N) with M²_case2 = C·d·a_q²·(M₂² + M_{2,δ}²).
pub fn step_size_case2(
    diameter: Real,
    m2: Real,
    d: usize,
    a_q_sq: Real,
    m2_delta: Real,
    n: usize,
    c: Real,
) -> Real {
    let d = d as Real;
    let m_sq = c * d * a_q_sq * (m2 * m2 + m2_delta * m2_delta);
    diameter / m_sq.sqrt() * (2.0 / n as Real).sqrt()
}

/// γ = ((1+κ)·V₀/κ)^{1/(1+κ)} / M̃ · N^{−1/(1+κ)}.
pub fn step_size_heavy_tail(ht: &HeavyTailSetup<Real>, m_tilde: Real, v0: Real, n: usize) -> Real {
    assert!(m_tilde > 0.0 && v0 > 0.0);
    let k = ht.kappa;
    ((1.0 + k) * v0 / k).powf(1.0 / (1.0 + k)) / m_tilde * (n as Real).powf(-1.0 / (1.0 + k))
}

/// M̃ from the heavy-tail moment bound
/// M̃^{1+κ} = C·a_q²·d^{(1+κ)/2}·M̃₂^{1+κ} + 2^{1+κ}·d^{1+κ}·a_q²·Δ²/τ².
pub fn heavy_tail_m(
    kappa: Real,
    m2_tilde: Real,
    d: usize,
    a_q_sq: Real,
    delta_max: Real,
    tau: Real,
    c: Real,
) -> Real {
    let d = d as Real;
    let p = 1.0 + kappa;
    let m_pow = c * a_q_sq * d.powf(p / 2.0) * m2_tilde.powf(p)
        + 2.0f64.powf(p) * d.powf(p) * a_q_sq * delta_max * delta_max / (tau * tau);
    m_pow.powf(1.0 / p)
}

/// Upper estimate of V_{z¹}(z*) under the heavy-tail prox-function: the
/// mirror map starts at the origin, where V_0(v) = K^{1/κ}‖v‖^{(1+κ)/κ}/(1+κ),
/// maximized at the block ball radii. The Euclidean D²/2 heuristic would
/// underestimate this badly (the heavy ω is much steeper), shrinking the
/// step size by orders of magnitude.
fn heavy_v0(
    ht: &HeavyTailSetup<Real>,
    setup_x: &ProxSetup<Real>,
    setup_y: Option<&ProxSetup<Real>>,
) -> Result<Real> {
    let mut v0 = 0.0;
    for s in std::iter::once(setup_x).chain(setup_y) {
        let r = match &s.domain.kind {
            crate::geometry::DomainKind::EuclideanBall { center, radius }
                if center.iter().all(|&c| c == 0.0) =>
            {
                *radius
            }
            _ => {
                return Err(Error::ConfigError(
                    "heavy-tail mode requires origin-centered Euclidean balls".into(),
                ))
            }
        };
        v0 += ht.k_q.powf(1.0 / ht.kappa) * r.powf((1.0 + ht.kappa) / ht.kappa)
            / (1.0 + ht.kappa);
    }
    Ok(v0)
}

struct Geometry<'a> {
    setup_x: &'a ProxSetup<Real>,
    setup_y: Option<&'a ProxSetup<Real>>,
    heavy: Option<HeavyTailSetup<Real>>,
    dx: usize,
}

impl Geometry<'_> {
    fn update(&self, z: &[Real], g: &[Real], gamma: Real) -> Result<Vec<Real>> {
        // The joint prox-function is the sum of the block prox-functions, so
        // the joint prox map factorizes into the block maps; Joint and
        // Separated modes therefore share this code path.
        let (zx, zy) = z.split_at(self.dx);
        let (gx, gy) = g.split_at(self.dx);
        let mut out = if let Some(ht) = &self.heavy {
            ht.prox_step(self.setup_x, zx, gx, gamma)?
        } else {
            self.setup_x.prox_step(zx, gx, gamma)?
        };
        if let Some(sy) = self.setup_y {
            let ny = if let Some(ht) = &self.heavy {
                ht.prox_step(sy, zy, gy, gamma)?
            } else {
                sy.prox_step(zy, gy, gamma)?
            };
            out.extend(ny);
        }
        Ok(out)
    }
}

fn joint_diameter(setup_x: &ProxSetup<Real>, setup_y: Option<&ProxSetup<Real>>) -> Real {
    let dx2 = setup_x.diameter * setup_x.diameter;
    let dy2 = setup_y.map_or(0.0, |s| s.diameter * s.diameter);
    (dx2 + dy2).sqrt()
}

fn joint_a_q_sq(
    setup_x: &ProxSetup<Real>,
    setup_y: Option<&ProxSetup<Real>>,
    d: usize,
) -> Real {
    let p = if setup_x.p_norm == 2 || setup_y.map_or(false, |s| s.p_norm == 2) {
        2 // mixed geometries fall back to the conservative q = 2 bound
    } else {
        1
    };
    a_q_sq_for(p, d)
}

fn validate(
    problem: &SaddleProblem,
    setup_x: &ProxSetup<Real>,
    setup_y: Option<&ProxSetup<Real>>,
    config: &SolverConfig,
) -> Result<()> {
    if setup_x.domain.dim != problem.dx {
        return Err(Error::ConfigError(format!(
            "x setup dim {} != problem dx {}",
            setup_x.domain.dim, problem.dx
        )));
    }
    match (setup_y, problem.dy) {
        (None, 0) => {}
        (Some(s), dy) if s.domain.dim == dy => {}
        _ => {
            return Err(Error::ConfigError(
                "y setup dimension inconsistent with problem".into(),
            ))
        }
    }
    if config.mode == Mode::Joint {
        if let Some(sy) = setup_y {
            if sy.prox_kind != setup_x.prox_kind {
                return Err(Error::ConfigError(
                    "joint mode requires the same prox kind on X and Y; use Separated".into(),
                ));
            }
        }
    }
    if let StepRule::HeavyTail { kappa } = config.step_rule {
        if !(kappa > 0.0 && kappa <= 1.0) {
            return Err(Error::ConfigError("heavy-tail kappa must be in (0, 1]".into()));
        }
        let euclid = setup_x.prox_kind == ProxKind::Euclidean
            && setup_y.map_or(true, |s| s.prox_kind == ProxKind::Euclidean);
        if !euclid {
            return Err(Error::ConfigError(
                "heavy-tail mode requires Euclidean ball setups".into(),
            ));
        }
    }
    Ok(())
}

/// Run the zeroth-order mirror descent loop from the prox center.
pub fn solve(
    problem: &SaddleProblem,
    model: &NoiseModel,
    setup_x: &ProxSetup<Real>,
    setup_y: Option<&ProxSetup<Real>>,
    config: &SolverConfig,
) -> Result<RunReport> {
    solve_from(problem, model, setup_x, setup_y, config, None, 0)
}

/// As [`solve`], but starting from `z0` (used by the restart driver) and
/// reading randomness from substream `stream_index` of the config seed.
pub fn solve_from(
    problem: &SaddleProblem,
    model: &NoiseModel,
    setup_x: &ProxSetup<Real>,
    setup_y: Option<&ProxSetup<Real>>,
    config: &SolverConfig,
    z0: Option<&[Real]>,
    stream_index: u64,
) -> Result<RunReport> {
    validate(problem, setup_x, setup_y, config)?;
    let start = Instant::now();
    let d = problem.dim();
    let n = config.n_iters;
    let diameter = joint_diameter(setup_x, setup_y);
    let a_q_sq = joint_a_q_sq(setup_x, setup_y, d);

    let mut heavy = None;
    let gamma = match config.step_rule {
        StepRule::Case1 { delta_max } => step_size_case1(
            diameter,
            problem.m2,
            d,
            a_q_sq,
            delta_max,
            config.tau,
            n,
            config.step_constant,
        ),
        StepRule::Case2 { m2_delta } => step_size_case2(
            diameter,
            problem.m2,
            d,
            a_q_sq,
            m2_delta,
            n,
            config.step_constant,
        ),
        StepRule::HeavyTail { kappa } => {
            let ht = HeavyTailSetup::new(kappa, 2.0);
            let m_tilde = heavy_tail_m(
                kappa,
                problem.m2_tilde,
                d,
                a_q_sq,
                model.delta_max(),
                config.tau,
                config.step_constant,
            );
            let v0 = heavy_v0(&ht, setup_x, setup_y)?;
            let g = step_size_heavy_tail(&ht, m_tilde, v0, n);
            heavy = Some(ht);
            g
        }
        StepRule::Manual { gamma } => gamma,
    };

    let geom = Geometry {
        setup_x,
        setup_y,
        heavy,
        dx: problem.dx,
    };

    let mut z: Vec<Real> = match z0 {
        Some(z0) => {
            if z0.len() != d {
                return Err(Error::ConfigError(format!(
                    "initial point dim {} != {}",
                    z0.len(),
                    d
                )));
            }
            z0.to_vec()
        }
        None => {
            let mut z1 = setup_x.prox_center();
            if let Some(sy) = setup_y {
                z1.extend(sy.prox_center());
            }
            z1
        }
    };

    let mut stream = rng::derive(config.seed, "solve", stream_index);
    let mut acc = vec![0.0; d];
    let mut weight = 0.0;
    let mut trace = if config.record_trace {
        Some(Vec::with_capacity(n))
    } else {
        None
    };
    let mut gap_series = Vec::new();
    let record_gaps = config.gap_checkpoints && problem.has_gap_oracle();
    let mut oracle_calls: u64 = 0;

    for k in 1..=n {
        if let Some(t) = trace.as_mut() {
            t.push(z.clone());
        }
        for (a, &zi) in acc.iter_mut().zip(&z) {
            *a += gamma * zi;
        }
        weight += gamma;

        if record_gaps && (k.is_power_of_two() || k == n) {
            let avg = running_average(&acc, weight, &z);
            gap_series.push((k as u64, problem.duality_gap(&avg)?));
        }

        let est = estimate_gradient(problem, model, &z, config.tau, &mut stream);
        oracle_calls += 2;
        z = geom.update(&z, &est.g, gamma)?;
    }

    let z_hat = running_average(&acc, weight, &z);
    let final_gap = if problem.has_gap_oracle() {
        Some(problem.duality_gap(&z_hat)?)
    } else {
        None
    };

    Ok(RunReport {
        z_hat,
        final_gap,
        gap_series,
        gammas: vec![gamma],
        trace,
        wall_ms: start.elapsed().as_millis() as u64,
        oracle_calls,
        seed: config.seed,
        n_iters: n as u64,
    })
}

fn running_average(acc: &[Real], weight: Real, fallback: &[Real]) -> Vec<Real> {
    if weight > 0.0 {
        acc.iter().map(|&a| a / weight).collect()
    } else {
        // γ = 0: the weighted average degenerates to the (constant) iterate
        fallback.to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainSpec;
    use crate::problems::{matching_pennies, strongly_monotone_ball_game, Matrix};

    fn pennies_setups() -> (ProxSetup<Real>, ProxSetup<Real>) {
        (ProxSetup::entropy_simplex(2), ProxSetup::entropy_simplex(2))
    }

    #[test]
    fn step_size_examples() {
        let g = step_size_case1(1.0, 2.0, 1, 1.0, 0.0, 0.1, 8, 1.0);
        assert!((g - 0.25).abs() < 1e-15);
        // doubling N divides gamma by sqrt(2)
        let g2 = step_size_case1(1.0, 2.0, 1, 1.0, 0.0, 0.1, 16, 1.0);
        assert!((g / g2 - 2.0f64.sqrt()).abs() < 1e-12);
        // monotone in delta
        let a = step_size_case1(1.0, 1.0, 4, 1.0, 0.1, 0.05, 100, 1.0);
        let b = step_size_case1(1.0, 1.0, 4, 1.0, 0.4, 0.05, 100, 1.0);
        assert!(b < a);

        let g = step_size_case2(1.0, 1.0, 4, 1.0, 0.0, 2, 1.0);
        assert!((g - 0.5).abs() < 1e-15);
        // case2 with zero noise Lipschitz constant reduces to case1 at delta = 0
        let c1 = step_size_case1(1.3, 0.7, 6, 1.0, 0.0, 0.1, 50, 1.0);
        let c2 = step_size_case2(1.3, 0.7, 6, 1.0, 0.0, 50, 1.0);
        assert!((c1 - c2).abs() < 1e-15);
        // gamma scales as 1/sqrt(d)
        let d1 = step_size_case2(1.0, 1.0, 4, 1.0, 0.0, 10, 1.0);
        let d2 = step_size_case2(1.0, 1.0, 16, 1.0, 0.0, 10, 1.0);
        assert!((d1 / d2 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn heavy_tail_step_size_examples() {
        let ht = HeavyTailSetup::new(1.0, 2.0);
        let g = step_size_heavy_tail(&ht, 2.0, 1.0, 4);
        assert!((g - 2.0f64.sqrt() / 4.0).abs() < 1e-12);
        // kappa = 1 matches the sqrt(2 V0)/M * N^{-1/2} light-tail scaling
        let g2 = (2.0f64 * 1.0).sqrt() / 2.0 * (4.0f64).powf(-0.5);
        assert!((g - g2).abs() < 1e-12);
        // rate N^{-1/(1+kappa)}
        let ht = HeavyTailSetup::new(0.5, 2.0);
        let a = step_size_heavy_tail(&ht, 1.0, 1.0, 100);
        let b = step_size_heavy_tail(&ht, 1.0, 1.0, 100_000);
        assert!((a / b - 1000.0f64.powf(1.0 / 1.5)).abs() / (a / b) < 1e-10);
    }

    #[test]
    fn single_iteration_returns_prox_center() {
        let p = matching_pennies();
        let (sx, sy) = pennies_setups();
        let cfg = SolverConfig::new(1, 0.01, StepRule::Case1 { delta_max: 0.0 }, 3);
        let rep = solve(&p, &NoiseModel::none(), &sx, Some(&sy), &cfg).unwrap();
        for v in &rep.z_hat {
            assert!((v - 0.5).abs() < 1e-15);
        }
        assert_eq!(rep.oracle_calls, 2);
    }

    #[test]
    fn zero_step_never_moves() {
        let p = matching_pennies();
        let (sx, sy) = pennies_setups();
        let cfg = SolverConfig::new(50, 0.01, StepRule::Manual { gamma: 0.0 }, 3);
        let rep = solve(&p, &NoiseModel::none(), &sx, Some(&sy), &cfg).unwrap();
        for v in &rep.z_hat {
            assert!((v - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn iterates_feasible_and_average_identity() {
        let p = matching_pennies();
        let (sx, sy) = pennies_setups();
        let mut cfg = SolverConfig::new(500, 0.01, StepRule::Case1 { delta_max: 0.0 }, 7);
        cfg.record_trace = true;
        let rep = solve(&p, &NoiseModel::none(), &sx, Some(&sy), &cfg).unwrap();
        let trace = rep.trace.as_ref().unwrap();
        assert_eq!(trace.len(), 500);
        for z in trace {
            assert!(sx.domain.contains(&z[..2], 1e-9));
            assert!(sy.domain.contains(&z[2..], 1e-9));
        }
        // recompute the gamma-weighted mean offline
        let gamma = rep.gammas[0];
        let mut acc = vec![0.0; 4];
        let mut w = 0.0;
        for z in trace {
            for (a, &v) in acc.iter_mut().zip(z) {
                *a += gamma * v;
            }
            w += gamma;
        }
        for (a, &zh) in acc.iter().zip(&rep.z_hat) {
            assert!((a / w - zh).abs() < 1e-12);
        }
        assert_eq!(rep.oracle_calls, 1000);
    }

    #[test]
    fn bitwise_determinism() {
        let p = matching_pennies();
        let (sx, sy) = pennies_setups();
        let cfg = SolverConfig::new(300, 0.01, StepRule::Case1 { delta_max: 0.0 }, 99);
        let a = solve(&p, &NoiseModel::none(), &sx, Some(&sy), &cfg).unwrap();
        let b = solve(&p, &NoiseModel::none(), &sx, Some(&sy), &cfg).unwrap();
        assert_eq!(a.z_hat, b.z_hat);
        assert_eq!(a.final_gap, b.final_gap);
        assert_eq!(a.gammas, b.gammas);
    }

    #[test]
    fn joint_and_separated_agree_on_euclidean_product() {
        let p = strongly_monotone_ball_game(Matrix::identity(2), 1.0, 1.0, 1.0);
        let sx = ProxSetup::euclidean(DomainSpec::unit_ball(2)).unwrap();
        let sy = ProxSetup::euclidean(DomainSpec::unit_ball(2)).unwrap();
        let mut cfg = SolverConfig::new(200, 0.01, StepRule::Case1 { delta_max: 0.0 }, 5);
        cfg.mode = Mode::Joint;
        let a = solve(&p, &NoiseModel::none(), &sx, Some(&sy), &cfg).unwrap();
        cfg.mode = Mode::Separated;
        let b = solve(&p, &NoiseModel::none(), &sx, Some(&sy), &cfg).unwrap();
        for (x, y) in a.z_hat.iter().zip(&b.z_hat) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn mismatched_dims_rejected() {
        let p = matching_pennies();
        let sx = ProxSetup::entropy_simplex(3);
        let sy = ProxSetup::entropy_simplex(2);
        let cfg = SolverConfig::new(10, 0.01, StepRule::Manual { gamma: 0.1 }, 0);
        assert!(matches!(
            solve(&p, &NoiseModel::none(), &sx, Some(&sy), &cfg),
            Err(Error::ConfigError(_))
        ));
    }

    #[test]
    fn pennies_gap_decreases() {
        let p = matching_pennies();
        let (sx, sy) = pennies_setups();
        let cfg = SolverConfig::new(4000, 0.01, StepRule::Case1 { delta_max: 0.0 }, 11);
        let rep = solve(&p, &NoiseModel::none(), &sx, Some(&sy), &cfg).unwrap();
        let gap = rep.final_gap.unwrap();
        assert!(gap < 0.3, "gap after 4000 iters = {gap}");
    }

    #[test]
    fn degenerate_pure_minimization_runs() {
        let p = crate::problems::abs_problem_1d();
        let sx = ProxSetup::euclidean(DomainSpec::boxed(vec![-1.0], vec![1.0])).unwrap();
        let cfg = SolverConfig::new(2000, 0.01, StepRule::Case1 { delta_max: 0.0 }, 13);
        let rep = solve(&p, &NoiseModel::none(), &sx, None, &cfg).unwrap();
        assert!(rep.final_gap.unwrap() < 0.1);
    }
}
