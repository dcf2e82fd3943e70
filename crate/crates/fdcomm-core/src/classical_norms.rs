//! Phase-space quantities of f(z) = F(|z|²) on ℝ^{2d}.
//!
//! Every norm reduces to a one-dimensional radial integral; the magnetic
//! gradient reduces further to an integral over [0, 1] after averaging the
//! sphere S⁵ analytically.

use crate::fermi_dirac::{fermi_dirac_integral, model_integral_bracket, model_integral_i};
use crate::model_params::{
    ln_sphere_measure, sphere_measure, EnvelopeValue, NormValue, PhysicalParams, SchattenOrder,
};
use crate::quadrature::integrate;
use crate::special::{bracket, ln_gamma};
use crate::Error;
use core::f64::consts::{LN_2, PI};
use libm::{exp, log, pow};

/// Classical equilibrium f_{β,μ}; β must be finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalState {
    pub params: PhysicalParams,
}

impl ClassicalState {
    pub fn new(params: PhysicalParams) -> Result<Self, Error> {
        if params.is_zero_temperature() {
            return Err(Error::InfiniteBeta);
        }
        Ok(ClassicalState { params })
    }

    fn d(&self) -> f64 {
        self.params.dim as f64
    }

    fn nu(&self) -> f64 {
        self.params.beta * self.params.mu
    }
}

/// ∫ f = (π/β)^d 𝓕_{d−1}(βμ). A uniform field leaves it unchanged.
pub fn classical_mass(state: &ClassicalState) -> Result<NormValue, Error> {
    let d = state.d();
    let fd = fermi_dirac_integral(d - 1.0, state.nu())?;
    let ln_pref = d * log(PI / state.params.beta);
    Ok(NormValue {
        value: exp(ln_pref + fd.ln_value),
        tail_bound: exp(ln_pref) * fd.tail_bound,
        ln_value: ln_pref + fd.ln_value,
    })
}

fn pth_root(ln_pref: f64, inner: &NormValue, p: f64) -> NormValue {
    let ln_pp = ln_pref + inner.ln_value;
    NormValue {
        value: exp(ln_pp / p),
        tail_bound: exp(ln_pref) * inner.tail_bound,
        ln_value: ln_pp / p,
    }
}

fn ln_grad_prefactor(state: &ClassicalState, p: f64) -> f64 {
    let d = state.d();
    p * LN_2 + d * log(PI) + (0.5 * p - d) * log(state.params.beta) + ln_gamma(d + 0.5 * p)
        - ln_gamma(d)
}

fn ln_purity_prefactor(state: &ClassicalState) -> f64 {
    state.d() * log(PI / state.params.beta)
}

/// ‖∇_z f‖_{L^p}; `tail_bound` is in units of value^p.
pub fn classical_grad_norm(state: &ClassicalState, p: SchattenOrder) -> Result<NormValue, Error> {
    let pf = p.finite()?;
    let c = state.d() + 0.5 * pf;
    let inner = model_integral_i(p, c, state.nu())?;
    Ok(pth_root(ln_grad_prefactor(state, pf), &inner, pf))
}

/// ‖f(1 − f)‖_{L^p}; `tail_bound` is in units of value^p.
pub fn classical_purity_defect(state: &ClassicalState, p: SchattenOrder) -> Result<NormValue, Error> {
    let pf = p.finite()?;
    let inner = model_integral_i(p, state.d(), state.nu())?;
    Ok(pth_root(ln_purity_prefactor(state), &inner, pf))
}

/// Brackets on ‖∇_z f‖ induced by the explicit I_{p,c} bracket.
pub fn classical_grad_bracket(state: &ClassicalState, p: SchattenOrder, pointwise: bool) -> Result<(f64, f64), Error> {
    let pf = p.finite()?;
    let c = state.d() + 0.5 * pf;
    let (lo, hi) = bracket_for(p, c, state.nu(), pointwise);
    let pref = exp(ln_grad_prefactor(state, pf));
    Ok((pow(pref * lo, 1.0 / pf), pow(pref * hi, 1.0 / pf)))
}

/// Brackets on ‖f(1 − f)‖ induced by the explicit I_{p,c} bracket.
pub fn classical_purity_bracket(state: &ClassicalState, p: SchattenOrder, pointwise: bool) -> Result<(f64, f64), Error> {
    let pf = p.finite()?;
    let (lo, hi) = bracket_for(p, state.d(), state.nu(), pointwise);
    let pref = exp(ln_purity_prefactor(state));
    Ok((pow(pref * lo, 1.0 / pf), pow(pref * hi, 1.0 / pf)))
}

fn bracket_for(p: SchattenOrder, c: f64, nu: f64, pointwise: bool) -> (f64, f64) {
    if pointwise {
        crate::fermi_dirac::model_integral_bracket_pointwise(p, c, nu)
    } else {
        model_integral_bracket(p, c, nu)
    }
}

/// β^{1/2−d/p}(⟨βμ⟩^{(d−1)/p+1/2} 1_{μ≥0} + e^{βμ} 1_{μ<0}).
pub fn classical_grad_envelope(params: &PhysicalParams, p: SchattenOrder) -> EnvelopeValue {
    let d = params.dim as f64;
    let ip = p.recip();
    let nu = params.beta * params.mu;
    let ln_b = (0.5 - d * ip) * log(params.beta);
    let ln_m = if params.mu >= 0.0 {
        ((d - 1.0) * ip + 0.5) * log(bracket(nu))
    } else {
        nu
    };
    EnvelopeValue::from_ln(ln_b + ln_m)
}

/// β^{−d/p}(⟨βμ⟩^{(d−1)/p} 1_{μ≥0} + e^{βμ} 1_{μ<0}).
pub fn classical_purity_envelope(params: &PhysicalParams, p: SchattenOrder) -> EnvelopeValue {
    let d = params.dim as f64;
    let ip = p.recip();
    let nu = params.beta * params.mu;
    let ln_m = if params.mu >= 0.0 {
        (d - 1.0) * ip * log(bracket(nu))
    } else {
        nu
    };
    EnvelopeValue::from_ln(-d * ip * log(params.beta) + ln_m)
}

/// C_{d,p} with ‖∂_x f‖_{L^p} = C_{d,p} ‖∇_z f‖_{L^p}.
pub fn partial_gradient_constant(d: u32, p: SchattenOrder) -> Result<f64, Error> {
    let pf = p.finite()?;
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1"));
    }
    let d = d as f64;
    let ln = ln_sphere_measure(d) + ln_sphere_measure(2.0 * d + pf)
        - ln_sphere_measure(2.0 * d)
        - ln_sphere_measure(d + pf);
    Ok(exp(ln / pf))
}

/// I_p(b) = ∫_{S⁵} |x + b ξ^⊥|^p du.
///
/// With y the eigen-coordinates of the quadratic form, the integrand is
/// `((1+b²)(y₁²+y₂²) + y₃²)^{p/2}`. Writing s = y₁²+y₂²+y₃² ~ Beta(3/2, 3/2)
/// and y₃² = s t² with t uniform on [0, 1] separates the average into
/// `E[s^{p/2}] · ∫₀¹ (1 + b² − b²t²)^{p/2} dt`.
pub fn magnetic_sphere_integral(b: f64, p: SchattenOrder) -> Result<f64, Error> {
    let pf = p.finite()?;
    if !(b >= 0.0 && b.is_finite()) {
        return Err(Error::InvalidParameter("b must be non-negative"));
    }
    let h = 0.5 * pf;
    let ln_es = ln_gamma(1.5 + h) + ln_gamma(3.0) - ln_gamma(3.0 + h) - ln_gamma(1.5);
    let b2 = b * b;
    let j = if pf == 2.0 {
        1.0 + 2.0 * b2 / 3.0
    } else {
        integrate(|t| pow(1.0 + b2 - b2 * t * t, h), &[0.0, 0.5, 1.0], 1e-14, 0.0).value
    };
    Ok(sphere_measure(6.0) * exp(ln_es) * j)
}

/// ‖∇_x f^A‖_{L^p} = (I_p(b)/ω₆)^{1/p} ‖∇_z f‖_{L^p} for the uniform field.
pub fn magnetic_grad_x_norm(state: &ClassicalState, p: SchattenOrder) -> Result<NormValue, Error> {
    let b = state
        .params
        .b
        .ok_or(Error::InvalidParameter("magnetic_grad_x_norm needs b"))?;
    let pf = p.finite()?;
    let g = classical_grad_norm(state, p)?;
    let ln_factor = log(magnetic_sphere_integral(b, p)?) - ln_sphere_measure(6.0);
    Ok(NormValue {
        value: exp(g.ln_value + ln_factor / pf),
        tail_bound: exp(ln_factor) * g.tail_bound,
        ln_value: g.ln_value + ln_factor / pf,
    })
}
