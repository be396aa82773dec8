//! Restart driver under the r-growth condition: rerun the base solver in
//! stages whose budgets are sized to halve the distance-to-solution
//! estimate, converting the 1/√N rate into a faster ε-dependence.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::geometry::ProxSetup;
use crate::noise::NoiseModel;
use crate::problems::{GrowthSpec, SaddleProblem};
use crate::solver::{solve_from, RunReport, SolverConfig, StepRule};
use crate::Real;

/// Default stage-budget multiplier C_r; the hidden log factors of the
/// restart bound are absorbed here and acceptance measures exponents only.
pub const DEFAULT_STAGE_CONSTANT: Real = 4.0;

#[derive(Debug, Clone, Copy)]
pub struct RestartSchedule {
    /// Growth exponent r ≥ 1 (accelerated bound stated for r ≥ 2).
    pub r: Real,
    pub mu_r: Real,
    /// Initial distance bound R₀ ≥ ‖z¹ − z*‖_p.
    pub r0: Real,
    pub stage_constant: Real,
    pub k_stages: usize,
}

impl RestartSchedule {
    /// Schedule reaching target accuracy `eps`:
    /// k = ceil(log₂(μ_r R₀^r / (2ε)) / r), clipped to ≥ 1.
    pub fn for_target(growth: GrowthSpec, r0: Real, eps: Real) -> Self {
        assert!(r0 > 0.0 && eps > 0.0 && growth.r >= 1.0 && growth.mu_r > 0.0);
        let raw = (growth.mu_r * r0.powf(growth.r) / (2.0 * eps)).log2() / growth.r;
        let k_stages = raw.ceil().max(1.0) as usize;
        RestartSchedule {
            r: growth.r,
            mu_r: growth.mu_r,
            r0,
            stage_constant: DEFAULT_STAGE_CONSTANT,
            k_stages,
        }
    }

    /// Distance estimate entering stage i (1-based): R_{i−1} = R₀·2^{−(i−1)}.
    pub fn stage_distance(&self, i: usize) -> Real {
        self.r0 * 2.0f64.powi(-(i as i32 - 1))
    }

    /// Per-stage budget
    /// N_i = ceil(C_r·a_q²·M₂²·d·2^{2(i−1)(r−1)} / (μ_r²·R₀^{2(r−1)})).
    pub fn stage_budget(&self, i: usize, d: usize, a_q_sq: Real, m2: Real) -> usize {
        let base = self.stage_constant * a_q_sq * m2 * m2 * d as Real
            / (self.mu_r * self.mu_r * self.r0.powf(2.0 * (self.r - 1.0)));
        let n = base * 2.0f64.powf(2.0 * (i as Real - 1.0) * (self.r - 1.0));
        (n.ceil() as usize).max(1)
    }

    pub fn total_budget(&self, d: usize, a_q_sq: Real, m2: Real) -> usize {
        (1..=self.k_stages)
            .map(|i| self.stage_budget(i, d, a_q_sq, m2))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseRegime {
    Bounded,
    Lipschitz,
}

/// Admissible-noise bound from the restart theorem's remark (hidden
/// constant taken as 1):
/// bounded: Δ ≤ μ_r^{1/r}·ε^{2−1/r}/(M₂√d);
/// Lipschitz: M_{2,δ} ≤ μ_r^{1/r}·ε^{1−1/r}/√d.
pub fn improved_noise_threshold(
    r: Real,
    mu_r: Real,
    eps: Real,
    m2: Real,
    d: usize,
    regime: NoiseRegime,
) -> Real {
    assert!(r >= 1.0 && mu_r > 0.0 && eps > 0.0 && d >= 1);
    let mu_pow = mu_r.powf(1.0 / r);
    let sqrt_d = (d as Real).sqrt();
    match regime {
        NoiseRegime::Bounded => mu_pow * eps.powf(2.0 - 1.0 / r) / (m2 * sqrt_d),
        NoiseRegime::Lipschitz => mu_pow * eps.powf(1.0 - 1.0 / r) / sqrt_d,
    }
}

fn stage_m(
    problem: &SaddleProblem,
    config: &SolverConfig,
    d: usize,
    a_q_sq: Real,
) -> Result<Real> {
    let dd = d as Real;
    let c = config.step_constant;
    let m2 = problem.m2;
    let m_sq = match config.step_rule {
        StepRule::Case1 { delta_max } => {
            c * dd * a_q_sq * m2 * m2
                + dd * dd * a_q_sq * delta_max * delta_max / (config.tau * config.tau)
        }
        StepRule::Case2 { m2_delta } => c * dd * a_q_sq * (m2 * m2 + m2_delta * m2_delta),
        StepRule::Manual { .. } => c * dd * a_q_sq * m2 * m2,
        StepRule::HeavyTail { .. } => {
            return Err(Error::ConfigError(
                "restart driver supports the light-tail step rules only".into(),
            ))
        }
    };
    Ok(m_sq.sqrt())
}

/// Run `schedule.k_stages` stages; stage i starts from the previous stage's
/// averaged iterate with budget N_i and step size
/// γ_i = √(R_{i−1}²/2) / M · √(2/N_i).
pub fn restart_solve(
    problem: &SaddleProblem,
    model: &NoiseModel,
    setup_x: &ProxSetup<Real>,
    setup_y: Option<&ProxSetup<Real>>,
    base_config: &SolverConfig,
    schedule: &RestartSchedule,
    z0: Option<&[Real]>,
) -> Result<RunReport> {
    let start = Instant::now();
    let d = problem.dim();
    let a_q_sq = crate::geometry::a_q_sq_for(
        if setup_x.p_norm == 2 { 2 } else { 1 },
        d,
    );
    let m = stage_m(problem, base_config, d, a_q_sq)?;

    let mut z0: Option<Vec<Real>> = z0.map(<[Real]>::to_vec);
    let mut gammas = Vec::with_capacity(schedule.k_stages);
    let mut gap_series = Vec::new();
    let mut oracle_calls = 0u64;
    let mut total_iters = 0u64;
    let mut last: Option<RunReport> = None;

    for i in 1..=schedule.k_stages {
        let n_i = schedule.stage_budget(i, d, a_q_sq, problem.m2);
        let r_prev = schedule.stage_distance(i);
        let v0 = r_prev * r_prev / 2.0;
        let gamma = v0.sqrt() / m * (2.0 / n_i as Real).sqrt();

        let mut cfg = base_config.clone();
        cfg.n_iters = n_i;
        cfg.step_rule = StepRule::Manual { gamma };
        let rep = solve_from(
            problem,
            model,
            setup_x,
            setup_y,
            &cfg,
            z0.as_deref(),
            i as u64,
        )?;
        gammas.push(gamma);
        for &(k, g) in &rep.gap_series {
            gap_series.push((total_iters + k, g));
        }
        oracle_calls += rep.oracle_calls;
        total_iters += rep.n_iters;
        z0 = Some(rep.z_hat.clone());
        last = Some(rep);
    }

    let last = last.expect("k_stages >= 1");
    Ok(RunReport {
        z_hat: last.z_hat,
        final_gap: last.final_gap,
        gap_series,
        gammas,
        trace: None,
        wall_ms: start.elapsed().as_millis() as u64,
        oracle_calls,
        seed: base_config.seed,
        n_iters: total_iters,
    })
}

/// Build the schedule from the problem's registered growth condition.
pub fn restart_solve_auto(
    problem: &SaddleProblem,
    model: &NoiseModel,
    setup_x: &ProxSetup<Real>,
    setup_y: Option<&ProxSetup<Real>>,
    base_config: &SolverConfig,
    eps: Real,
    z0: Option<&[Real]>,
) -> Result<RunReport> {
    let growth = problem.growth.ok_or(Error::GrowthSpecMissing)?;
    // R0 defaults to the joint domain diameter, a valid distance bound
    let dx2 = setup_x.diameter * setup_x.diameter;
    let dy2 = setup_y.map_or(0.0, |s| s.diameter * s.diameter);
    let r0 = (dx2 + dy2).sqrt();
    let schedule = RestartSchedule::for_target(growth, r0, eps);
    restart_solve(problem, model, setup_x, setup_y, base_config, &schedule, z0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainSpec;
    use crate::problems::{strongly_monotone_ball_game, Matrix};

    #[test]
    fn threshold_arithmetic() {
        // bounded regime, r=2, mu=1, eps=0.1, M2=1, d=4 → 0.1^{1.5}/2
        let t = improved_noise_threshold(2.0, 1.0, 0.1, 1.0, 4, NoiseRegime::Bounded);
        assert!((t - 0.1f64.powf(1.5) / 2.0).abs() < 1e-15);
        assert!((t - 0.01581).abs() < 1e-4);
        // Lipschitz regime, r=1, mu=1: exponent 1−1/r = 0, eps-independent
        let a = improved_noise_threshold(1.0, 1.0, 0.1, 1.0, 4, NoiseRegime::Lipschitz);
        let b = improved_noise_threshold(1.0, 1.0, 0.001, 1.0, 4, NoiseRegime::Lipschitz);
        assert!((a - 0.5).abs() < 1e-15);
        assert_eq!(a, b);
        // bounded regime exponent 2−1/r → 2 as r grows
        let big_r = improved_noise_threshold(1e9, 1.0, 0.1, 1.0, 4, NoiseRegime::Bounded);
        assert!((big_r - 0.1f64.powi(2) / 2.0).abs() < 1e-6);
    }

    #[test]
    fn schedule_budget_growth_ratio() {
        // choose parameters making the base budget integral: ratio exact
        let s = RestartSchedule {
            r: 2.0,
            mu_r: 1.0,
            r0: 1.0,
            stage_constant: 1.0,
            k_stages: 4,
        };
        // base = 1·1·1·4 / (1·1) = 4
        for i in 1..4 {
            let a = s.stage_budget(i, 4, 1.0, 1.0);
            let b = s.stage_budget(i + 1, 4, 1.0, 1.0);
            assert_eq!(b, a * 4, "N_(i+1)/N_i must be 2^(2(r-1)) = 4");
        }
        assert_eq!(
            s.total_budget(4, 1.0, 1.0),
            (1..=4).map(|i| s.stage_budget(i, 4, 1.0, 1.0)).sum::<usize>()
        );
    }

    #[test]
    fn k_stages_clipping() {
        let g = GrowthSpec { r: 2.0, mu_r: 1.0 };
        // eps larger than mu_r R0^r / 2 → one stage
        let s = RestartSchedule::for_target(g, 1.0, 10.0);
        assert_eq!(s.k_stages, 1);
        let s = RestartSchedule::for_target(g, 1.0, 0.001);
        assert!(s.k_stages > 1);
    }

    #[test]
    fn single_stage_equals_single_solve() {
        let p = strongly_monotone_ball_game(Matrix::identity(2), 1.0, 1.0, 1.0);
        let sx = ProxSetup::euclidean(DomainSpec::unit_ball(2)).unwrap();
        let sy = ProxSetup::euclidean(DomainSpec::unit_ball(2)).unwrap();
        let cfg = SolverConfig::new(10, 0.01, StepRule::Case1 { delta_max: 0.0 }, 21);
        let schedule = RestartSchedule {
            r: 2.0,
            mu_r: 1.0,
            r0: 2.0,
            stage_constant: 4.0,
            k_stages: 1,
        };
        let rep = restart_solve(&p, &NoiseModel::none(), &sx, Some(&sy), &cfg, &schedule, None).unwrap();

        let d = 4;
        let a_q = 1.0;
        let n1 = schedule.stage_budget(1, d, a_q, p.m2);
        let m = stage_m(&p, &cfg, d, a_q).unwrap();
        let gamma = (schedule.r0 * schedule.r0 / 2.0).sqrt() / m * (2.0 / n1 as Real).sqrt();
        let mut cfg1 = cfg.clone();
        cfg1.n_iters = n1;
        cfg1.step_rule = StepRule::Manual { gamma };
        let direct = solve_from(&p, &NoiseModel::none(), &sx, Some(&sy), &cfg1, None, 1).unwrap();
        assert_eq!(rep.z_hat, direct.z_hat);
        assert_eq!(rep.n_iters, direct.n_iters);
    }

    #[test]
    fn missing_growth_spec_rejected() {
        let p = crate::problems::matching_pennies();
        let sx = ProxSetup::entropy_simplex(2);
        let sy = ProxSetup::entropy_simplex(2);
        let cfg = SolverConfig::new(10, 0.01, StepRule::Case1 { delta_max: 0.0 }, 0);
        assert!(matches!(
            restart_solve_auto(&p, &NoiseModel::none(), &sx, Some(&sy), &cfg, 0.1, None),
            Err(Error::GrowthSpecMissing)
        ));
    }

    #[test]
    fn restart_reduces_gap_on_growth_problem() {
        let p = strongly_monotone_ball_game(Matrix::identity(2), 1.0, 1.0, 1.0);
        let sx = ProxSetup::euclidean(DomainSpec::unit_ball(2)).unwrap();
        let sy = ProxSetup::euclidean(DomainSpec::unit_ball(2)).unwrap();
        let cfg = SolverConfig::new(10, 0.005, StepRule::Case1 { delta_max: 0.0 }, 17);
        let rep =
            restart_solve_auto(&p, &NoiseModel::none(), &sx, Some(&sy), &cfg, 0.05, Some(&[0.7, 0.2, -0.5, 0.4])).unwrap();
        let gap = rep.final_gap.unwrap();
        assert!(gap <= 0.1, "restart gap {gap}");
    }
}
