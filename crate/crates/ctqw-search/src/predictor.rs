//! Closed-form performance predictions: spectral-condition checks, the
//! critical coupling r* = s1 with its peak time and amplitude, off-critical
//! amplitude bounds, quasi-degenerate conditions, and the abstract cost model.

use serde::{Deserialize, Serialize};

use crate::spectra::SParams;
use crate::{Error, Result};

/// Tunable constants of the prediction inequalities.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredictorConfig {
    /// spectral-condition constant: sqrt(eps) < c * min(s1 s2 / s3, gap * sqrt(s2))
    pub c: f64,
    /// root-interval constant (kept for diagnostics; exact roots are used)
    pub c_prime: f64,
    /// robustness-window constant: r in s1 +- beta * sqrt(eps_d * s2)
    pub beta: f64,
    /// quasi-degenerate lower-bound constant of the eps >= ... condition
    pub c1: f64,
    /// advisory single-size threshold on s1/sqrt(s2) for the optimal label
    pub theta_opt: f64,
}

impl Default for PredictorConfig {
    fn default() -> Self {
        PredictorConfig {
            c: 0.1,
            c_prime: 0.1,
            beta: 0.1,
            c1: 0.1,
            theta_opt: 0.5,
        }
    }
}

/// One inequality, reported as its two sides.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Margin {
    pub lhs: f64,
    pub rhs: f64,
}

impl Margin {
    /// rhs / lhs; > 1 means the inequality lhs < rhs holds with room
    pub fn ratio(&self) -> f64 {
        self.rhs / self.lhs
    }
    pub fn pass(&self) -> bool {
        self.ratio() > 1.0
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConditionMargins {
    /// sqrt(eps) vs c * min(s1 s2 / s3, gap sqrt(s2))
    pub spectral: Margin,
    /// D > 1 only: c1 * sqrt(eps) vs s2^{3/2} gap_d / s1^2 (as lhs >= rhs)
    pub quasi_degenerate: Option<Margin>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Standard,
    QuasiDegenerate,
    OutOfValidity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimalityClass {
    Optimal,
    Suboptimal,
    SufficientOnly,
    OutOfValidity,
}

/// Critical-point prediction at r* = s1.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CriticalPrediction {
    pub r_star: f64,
    /// half the avoided-crossing splitting, sqrt(eps_d) * s1/sqrt(s2)
    pub delta0: f64,
    /// relative error scale s3 sqrt(eps_d) / s2^{3/2}
    pub eta: f64,
    /// predicted peak time pi/(2 delta0)
    pub t_pred: f64,
    /// predicted peak amplitude sqrt(eps/eps_d) * s1/sqrt(s2)
    pub nu_pred: f64,
    /// half-width of the robust coupling window around r*
    pub window_halfwidth: f64,
    pub condition_margins: ConditionMargins,
    pub regime: Regime,
}

/// sqrt(eps) < c * min(s1 s2 / s3, gap * sqrt(s2)); for D > 1 the left side
/// uses the subspace weight eps_d and the sums are the D-excluded ones.
pub fn check_spectral_condition(sp: &SParams, cfg: &PredictorConfig) -> (bool, f64) {
    let m = spectral_margin(sp, cfg);
    (m.pass(), m.ratio())
}

fn spectral_margin(sp: &SParams, cfg: &PredictorConfig) -> Margin {
    let lhs = sp.epsilon_d.sqrt();
    let rhs = cfg.c * (sp.s1 * sp.s2 / sp.s3).min(sp.gap * sp.s2.sqrt());
    Margin { lhs, rhs }
}

/// D > 1 validity pair: the spectral condition on the excluded-subspace
/// parameters plus the lower-bound condition
/// sqrt(eps) >= (1/c1) * s2^{3/2} * gap_d / s1^2.
pub fn quasi_degenerate_condition(sp: &SParams, cfg: &PredictorConfig) -> (bool, ConditionMargins) {
    assert!(sp.d > 1, "quasi-degenerate condition requires D > 1");
    let spectral = spectral_margin(sp, cfg);
    let lower = Margin {
        // stored as rhs/lhs > 1 iff sqrt(eps_d) >= (1/c1) s2^{3/2} gap_d / s1^2;
        // the subspace weight (not the rotated overlap) keeps the condition
        // decidable at finite sizes
        lhs: sp.s2.powf(1.5) * sp.gap_d / (cfg.c1 * sp.s1.powi(2)),
        rhs: sp.epsilon_d.sqrt(),
    };
    let pass = spectral.pass() && lower.pass();
    (
        pass,
        ConditionMargins {
            spectral,
            quasi_degenerate: Some(lower),
        },
    )
}

/// Predictions at the critical coupling. Emitted even out of validity, with
/// the regime flagged, so failures stay diagnosable.
pub fn predict_critical(sp: &SParams, cfg: &PredictorConfig) -> CriticalPrediction {
    let ratio = sp.ratio();
    let delta0 = sp.epsilon_d.sqrt() * ratio;
    let margins = if sp.d > 1 {
        quasi_degenerate_condition(sp, cfg).1
    } else {
        ConditionMargins {
            spectral: spectral_margin(sp, cfg),
            quasi_degenerate: None,
        }
    };
    let valid = margins.spectral.pass() && margins.quasi_degenerate.is_none_or(|m| m.pass());
    let regime = if !valid {
        Regime::OutOfValidity
    } else if sp.d > 1 {
        Regime::QuasiDegenerate
    } else {
        Regime::Standard
    };
    CriticalPrediction {
        r_star: sp.s1,
        delta0,
        eta: sp.s3 * sp.epsilon_d.sqrt() / sp.s2.powf(1.5),
        t_pred: std::f64::consts::FRAC_PI_2 / delta0,
        nu_pred: (sp.epsilon / sp.epsilon_d).sqrt() * ratio,
        window_halfwidth: cfg.beta * (sp.epsilon_d * sp.s2).sqrt(),
        condition_margins: margins,
        regime,
    }
}

/// Single-size advisory label; the authoritative classification is the
/// exponent fit over a size sweep (analytic statements are asymptotic).
pub fn classify_optimality(
    pred: &CriticalPrediction,
    sp: &SParams,
    cfg: &PredictorConfig,
) -> OptimalityClass {
    if !pred.condition_margins.spectral.pass() {
        return OptimalityClass::OutOfValidity;
    }
    if sp.d > 1 {
        let qd_ok = pred
            .condition_margins
            .quasi_degenerate
            .is_some_and(|m| m.pass());
        if qd_ok && sp.ratio() >= cfg.theta_opt {
            OptimalityClass::SufficientOnly
        } else {
            OptimalityClass::Suboptimal
        }
    } else if pred.nu_pred >= cfg.theta_opt {
        OptimalityClass::Optimal
    } else {
        OptimalityClass::Suboptimal
    }
}

/// Rigorous finite-size amplitude bound for couplings outside the robust
/// window; errors when r is inside the window (or, below it, when the
/// spectral spread is too large for the bound to apply).
///
/// Above the window the top perturbed level sits at distance
/// delta < eps r/(r - s1) from r, and the amplitude is at most
/// 2 delta/sqrt(eps), giving 2 sqrt(eps) r/(r - s1).
///
/// Below the window, write phi for residue(top)/(E_top - r). The t = 0 sum
/// rule makes every |amplitude| <= sqrt(eps) (2 phi - 1), and combining
/// Cauchy-Schwarz on the residue of the top root with the secular equation
/// yields phi <= 1/(1 - x) with x = r delta_max/(1 - eps), hence the bound
/// sqrt(eps) (1 + x)/(1 - x). It is exact at r -> 0 and, unlike a bound
/// built from the nearest level alone, accounts for every retained level.
pub fn off_critical_bound(sp: &SParams, r: f64, cfg: &PredictorConfig) -> Result<f64> {
    let half = cfg.beta * (sp.epsilon_d * sp.s2).sqrt();
    if (r - sp.s1).abs() <= half {
        return Err(Error::BoundNotApplicable { r });
    }
    let se = sp.epsilon.sqrt();
    if r > sp.s1 {
        Ok(2.0 * se * r / (r - sp.s1))
    } else {
        let x = r * sp.delta_max / (1.0 - sp.epsilon);
        if x >= 1.0 {
            return Err(Error::BoundNotApplicable { r });
        }
        Ok(se * (1.0 + x) / (1.0 - x))
    }
}

/// Abstract per-run costs in user-supplied units.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostInputs {
    pub s_setup: f64,
    pub c_oracle: f64,
    pub m_measure: f64,
}

impl Default for CostInputs {
    fn default() -> Self {
        CostInputs {
            s_setup: 1.0,
            c_oracle: 1.0,
            m_measure: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CostReport {
    /// direct amplitude-amplification search: (S + C)/sqrt(eps) + M
    pub t_aa: f64,
    /// walk plus amplitude amplification: (S + T C + C)/nu + M
    pub t_search_amp_amp: f64,
    /// walk plus repetition: (S + T C + M)/nu^2
    pub t_search_repeat: f64,
    /// classical hitting-time bracket [1/eps, 1/(gap eps)]
    pub ht_lower: f64,
    pub ht_upper: f64,
    pub inputs: CostInputs,
}

/// Total search costs and the classical hitting-time bracket. The gap is
/// clamped at 1 so the bracket stays ordered when the spectrum extends below
/// zero (where the raw gap exceeds 1).
pub fn cost_model(nu: f64, t: f64, epsilon: f64, gap: f64, inputs: CostInputs) -> CostReport {
    assert!(nu > 0.0 && nu <= 1.0 + 1e-12 && t > 0.0 && epsilon > 0.0);
    let CostInputs {
        s_setup: s,
        c_oracle: c,
        m_measure: m,
    } = inputs;
    CostReport {
        t_aa: (s + c) / epsilon.sqrt() + m,
        t_search_amp_amp: (s + t * c + c) / nu + m,
        t_search_repeat: (s + t * c + m) / (nu * nu),
        ht_lower: 1.0 / epsilon,
        ht_upper: 1.0 / (gap.min(1.0) * epsilon),
        inputs,
    }
}
