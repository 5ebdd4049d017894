use super::EngineError;
use serde::{Deserialize, Serialize};

/// Step-size control sequence `β_k ∈ (0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BetaSchedule {
    Constant { value: f64 },
    /// `β_k = initial / (k + 1)^exponent`
    Diminishing { initial: f64, exponent: f64 },
}

impl BetaSchedule {
    pub fn at(&self, k: usize) -> f64 {
        match *self {
            BetaSchedule::Constant { value } => value,
            BetaSchedule::Diminishing { initial, exponent } => initial / ((k + 1) as f64).powf(exponent),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LipschitzMode {
    /// Constants supplied by the user (valid global bounds).
    Fixed { l: f64, gamma: f64 },
    /// Secant estimates at a random nearby point every iteration. The probe
    /// radius is `probe_scale · max(1, ‖x‖)`.
    Estimate { probe_scale: f64, floor: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DualUpdate {
    /// `y + δ`
    Newton,
    /// Least-squares multipliers when they do not increase `‖g + Jᵀy‖`.
    LeastSquares,
}

/// The algorithm's parameters. Field names follow the usual symbols
/// (`tau_init` is the initial merit parameter, `eps_r` the feasibility
/// retention fraction of the second termination test, and so on).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmParams {
    pub tau_init: f64,
    pub xi_init: f64,
    pub eps_c: f64,
    pub eps_u: f64,
    pub sigma_u: f64,
    pub sigma_c: f64,
    pub kappa: f64,
    pub eps_tau: f64,
    pub eps_xi: f64,
    pub eta: f64,
    pub kappa_rho: f64,
    pub kappa_r: f64,
    pub kappa_u: f64,
    pub kappa_v: f64,
    pub theta: f64,
    pub eps_r: f64,
    pub zeta: f64,
    pub beta: BetaSchedule,
    pub lipschitz: LipschitzMode,
    pub dual_update: DualUpdate,
}

impl Default for AlgorithmParams {
    fn default() -> Self {
        Self {
            tau_init: 0.1,
            xi_init: 1.0,
            eps_c: 1.0,
            eps_u: 5e-9,
            sigma_u: 1.0 - 1e-12,
            sigma_c: 0.1,
            kappa: 0.1,
            eps_tau: 0.01,
            eps_xi: 0.01,
            eta: 0.1,
            kappa_rho: 100.0,
            kappa_r: 100.0,
            kappa_u: 0.1,
            kappa_v: 0.1,
            theta: 1e4,
            eps_r: 1.0 - 1e-4,
            zeta: 1e-8,
            beta: BetaSchedule::Constant { value: 1.0 },
            lipschitz: LipschitzMode::Estimate { probe_scale: 1e-4, floor: 1e-8 },
            dual_update: DualUpdate::Newton,
        }
    }
}

/// Linear-solver tolerances, caps and stopping rules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverParams {
    pub cg_rel_tol: f64,
    pub cg_abs_floor: f64,
    /// Defaults to `10 m + 50`.
    pub cg_max_iter: Option<usize>,
    /// Per Hessian rung. Defaults to `2 (n + m)`.
    pub minres_max_iter: Option<usize>,
    /// Absolute floor of the infinity-norm residual acceptance rule.
    pub minres_abs_floor: f64,
    pub minres_refresh_interval: usize,
    pub breakdown_tol: f64,
    /// Check the termination tests every this many MINRES iterations.
    pub tt_check_stride: usize,
    pub hessian_max_rung: usize,
    pub lsq_tol: f64,
    /// Threshold for declaring a point stationary for the sampled gradient.
    pub stationary_tol: f64,
    pub resample_on_stationary: bool,
    pub feas_tol: f64,
    pub stat_tol: f64,
    pub max_outer_iterations: usize,
    pub check_invariants: bool,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            cg_rel_tol: 0.1,
            cg_abs_floor: 1e-10,
            cg_max_iter: None,
            minres_max_iter: None,
            minres_abs_floor: 1e-12,
            minres_refresh_interval: 25,
            breakdown_tol: 1e-14,
            tt_check_stride: 1,
            hessian_max_rung: 10,
            lsq_tol: 1e-12,
            stationary_tol: 1e-12,
            resample_on_stationary: true,
            feas_tol: 1e-6,
            stat_tol: 1e-2,
            max_outer_iterations: 1000,
            check_invariants: true,
        }
    }
}

impl SolverParams {
    pub fn cg_cap(&self, m: usize) -> usize {
        self.cg_max_iter.unwrap_or(10 * m + 50)
    }

    pub fn minres_cap(&self, n: usize, m: usize) -> usize {
        self.minres_max_iter.unwrap_or(2 * (n + m))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub algorithm: AlgorithmParams,
    pub solver: SolverParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// Parameters used with Gaussian noise and estimated Lipschitz constants.
    General,
    /// Overrides for the optimal control problems: `τ₋₁ = 1e-4`, `η = 0.5`,
    /// `κ = 1e-4`, `L = 1`, `Γ = 0`.
    Control,
}

impl SolverConfig {
    pub fn profile(profile: Profile) -> Self {
        match profile {
            Profile::General => Self::general(),
            Profile::Control => Self::control(),
        }
    }

    pub fn general() -> Self {
        Self::default()
    }

    pub fn control() -> Self {
        let mut cfg = Self::default();
        cfg.algorithm.tau_init = 1e-4;
        cfg.algorithm.eta = 0.5;
        cfg.algorithm.kappa = 1e-4;
        cfg.algorithm.lipschitz = LipschitzMode::Fixed { l: 1.0, gamma: 0.0 };
        cfg
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.algorithm.kappa = kappa;
        self
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let a = &self.algorithm;
        let open01 = |x: f64| x > 0.0 && x < 1.0;
        let mut problems: Vec<String> = Vec::new();
        let mut need = |ok: bool, what: &str| {
            if !ok {
                problems.push(what.to_string());
            }
        };
        need(a.tau_init > 0.0, "tau_init > 0");
        need(a.xi_init > 0.0, "xi_init > 0");
        need(a.eps_c > 0.0 && a.eps_c <= 1.0, "eps_c in (0,1]");
        need(a.zeta > 0.0, "zeta > 0");
        need(a.eps_u > 0.0 && a.eps_u < a.zeta, "eps_u in (0,zeta)");
        for (v, name) in [
            (a.sigma_u, "sigma_u"),
            (a.sigma_c, "sigma_c"),
            (a.kappa, "kappa"),
            (a.eps_tau, "eps_tau"),
            (a.eps_xi, "eps_xi"),
            (a.eta, "eta"),
        ] {
            need(open01(v), &format!("{name} in (0,1)"));
        }
        for (v, name) in [
            (a.kappa_rho, "kappa_rho"),
            (a.kappa_r, "kappa_r"),
            (a.kappa_u, "kappa_u"),
            (a.kappa_v, "kappa_v"),
        ] {
            need(v > 0.0, &format!("{name} > 0"));
        }
        need(a.theta >= 0.0, "theta >= 0");
        need(a.eps_r > a.sigma_c && a.eps_r < 1.0, "eps_r in (sigma_c,1)");
        match a.beta {
            BetaSchedule::Constant { value } => need(value > 0.0 && value <= 1.0, "beta in (0,1]"),
            BetaSchedule::Diminishing { initial, exponent } => {
                need(initial > 0.0 && initial <= 1.0 && exponent >= 0.0, "diminishing beta: initial in (0,1], exponent >= 0")
            }
        }
        match a.lipschitz {
            LipschitzMode::Fixed { l, gamma } => {
                need(l >= 0.0 && gamma >= 0.0 && l + gamma > 0.0, "fixed Lipschitz constants nonnegative, not both zero")
            }
            LipschitzMode::Estimate { probe_scale, floor } => {
                need(probe_scale > 0.0 && floor > 0.0, "Lipschitz probe scale and floor positive")
            }
        }
        let s = &self.solver;
        need(s.cg_rel_tol > 0.0 && s.cg_rel_tol <= 1.0, "cg_rel_tol in (0,1]");
        need(s.cg_abs_floor > 0.0, "cg_abs_floor > 0");
        need(s.minres_abs_floor >= 0.0, "minres_abs_floor >= 0");
        need(s.tt_check_stride >= 1, "tt_check_stride >= 1");
        need(s.lsq_tol > 0.0, "lsq_tol > 0");
        need(s.feas_tol > 0.0 && s.stat_tol > 0.0, "stopping tolerances > 0");
        if problems.is_empty() {
            Ok(())
        } else {
            Err(EngineError::Config(problems.join(", ")))
        }
    }
}
