//! Fermi–Dirac occupation, its differences, Fermi–Dirac integrals,
//! polylogarithms and the model integrals I_{p,c}.

use crate::model_params::{EnvelopeValue, NormValue, SchattenOrder};
use crate::quadrature::integrate;
use crate::special::{gamma, ln_gamma, log1mexp, log1pexp, zeta};
use crate::Error;
use core::f64::consts::PI;
use libm::{exp, fabs, log, log1p, pow};

const QUAD_REL_TOL: f64 = 1e-13;

/// F(r) = (1 + e^{β(r−μ)})⁻¹, with β = ∞ giving the indicator of r ≤ μ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OccupationFn {
    pub beta: f64,
    pub mu: f64,
}

impl OccupationFn {
    pub fn new(beta: f64, mu: f64) -> Result<Self, Error> {
        if !(beta > 0.0) || !mu.is_finite() {
            return Err(Error::InvalidParameter("occupation needs beta > 0 and finite mu"));
        }
        Ok(OccupationFn { beta, mu })
    }

    #[inline]
    fn x(&self, r: f64) -> f64 {
        self.beta * (r - self.mu)
    }

    pub fn is_zero_temperature(&self) -> bool {
        self.beta == f64::INFINITY
    }

    pub fn eval(&self, r: f64) -> f64 {
        if self.is_zero_temperature() {
            return if r <= self.mu { 1.0 } else { 0.0 };
        }
        let x = self.x(r);
        if x > 0.0 {
            let e = exp(-x);
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + exp(x))
        }
    }

    /// ln F(r).
    pub fn ln_eval(&self, r: f64) -> f64 {
        if self.is_zero_temperature() {
            return if r <= self.mu { 0.0 } else { f64::NEG_INFINITY };
        }
        -log1pexp(self.x(r))
    }

    /// 1 − F(r), computed without cancellation.
    pub fn complement(&self, r: f64) -> f64 {
        if self.is_zero_temperature() {
            return if r <= self.mu { 0.0 } else { 1.0 };
        }
        let x = self.x(r);
        if x < 0.0 {
            let e = exp(x);
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + exp(-x))
        }
    }

    /// ln(F(r)(1 − F(r))).
    pub fn ln_purity(&self, r: f64) -> f64 {
        if self.is_zero_temperature() {
            return f64::NEG_INFINITY;
        }
        let a = fabs(self.x(r));
        -a - 2.0 * log1pexp(-a)
    }

    /// F′(r) = −β F(1 − F).
    pub fn derivative(&self, r: f64) -> Result<f64, Error> {
        if self.is_zero_temperature() {
            return Err(Error::InfiniteBeta);
        }
        let a = fabs(self.x(r));
        let e = exp(-a);
        Ok(-self.beta * e / ((1.0 + e) * (1.0 + e)))
    }

    /// F(r1) − F(r2).
    pub fn difference(&self, r1: f64, r2: f64) -> f64 {
        if self.is_zero_temperature() {
            return self.eval(r1) - self.eval(r2);
        }
        let ln = self.ln_abs_difference(r1, r2);
        if r1 < r2 {
            exp(ln)
        } else {
            -exp(ln)
        }
    }

    /// ln |F(r1) − F(r2)|, −∞ when the difference vanishes.
    pub fn ln_abs_difference(&self, r1: f64, r2: f64) -> f64 {
        if self.is_zero_temperature() {
            return if (r1 <= self.mu) == (r2 <= self.mu) {
                f64::NEG_INFINITY
            } else {
                0.0
            };
        }
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        ln_abs_diff_scaled(self.x(hi), self.beta * (hi - lo))
    }

    /// ln (F(r − gap) − F(r)) for gap > 0, with the gap scaled exactly.
    #[inline]
    pub fn ln_gap_difference(&self, r: f64, gap: f64) -> f64 {
        if self.is_zero_temperature() {
            return self.ln_abs_difference(r - gap, r);
        }
        ln_abs_diff_scaled(self.x(r), self.beta * gap)
    }
}

/// ln(σ(−(x_hi − d)) − σ(−x_hi)) where σ is the logistic function, d ≥ 0.
///
/// |e^{x₂} − e^{x₁}| / ((1+e^{x₁})(1+e^{x₂})) split so that no large
/// exponent is ever subtracted from another.
#[inline]
pub fn ln_abs_diff_scaled(x_hi: f64, d: f64) -> f64 {
    if d <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let x_lo = x_hi - d;
    log1mexp(d) - log1pexp(-x_hi) - log1pexp(x_lo)
}

#[inline]
fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + exp(-z))
    } else {
        let e = exp(z);
        e / (1.0 + e)
    }
}

/// 𝓕_α(ν) = Γ(α+1)⁻¹ ∫₀^∞ t^α (1 + e^{t−ν})⁻¹ dt.
///
/// `tail_bound` holds the quadrature error estimate plus the analytic bound
/// on the discarded tail, in value units.
pub fn fermi_dirac_integral(alpha: f64, nu: f64) -> Result<NormValue, Error> {
    if !(alpha >= 0.0) || !nu.is_finite() {
        return Err(Error::InvalidParameter("fermi_dirac_integral needs alpha >= 0"));
    }
    let nu_plus = nu.max(0.0);
    let shift = nu.min(0.0);
    let t_cut = nu_plus + 40.0 + 2.0 * alpha;
    let f = |t: f64| {
        let w = if nu <= 0.0 {
            exp(-t) / (1.0 + exp(nu - t))
        } else {
            logistic(nu - t)
        };
        pow(t, alpha) * w
    };
    let q = if nu > 0.0 {
        integrate(f, &[0.0, nu, t_cut], QUAD_REL_TOL, 0.0)
    } else {
        integrate(f, &[0.0, 1.0, t_cut], QUAD_REL_TOL, 0.0)
    };
    let tail = exp(nu_plus - t_cut) * pow(t_cut, alpha) / (1.0 - alpha / t_cut);
    let norm = ln_gamma(alpha + 1.0);
    let ln_value = shift + log(q.value) - norm;
    Ok(NormValue::from_ln(
        ln_value,
        exp(shift - norm) * (q.abs_error + tail),
    ))
}

/// I_{p,c}(ν) = Γ(c)⁻¹ ∫₀^∞ t^{c−1} e^{p(t−ν)} (1 + e^{t−ν})^{−2p} dt.
pub fn model_integral_i(p: SchattenOrder, c: f64, nu: f64) -> Result<NormValue, Error> {
    let p = p.finite()?;
    if !(c >= 1.0) || !nu.is_finite() {
        return Err(Error::InvalidParameter("model integral needs c >= 1 and finite nu"));
    }
    let nu_plus = nu.max(0.0);
    // e^{pν} is factored out when ν < 0
    let shift = p * nu.min(0.0);
    let t_cut = nu_plus + 40.0 * (1.0f64).max(1.0 / p) + 2.0 * (c - 1.0) / p;
    let f = |t: f64| {
        let lw = if nu < 0.0 {
            -p * t - 2.0 * p * log1pexp(nu - t)
        } else {
            let a = fabs(t - nu);
            -p * a - 2.0 * p * log1pexp(-a)
        };
        pow(t, c - 1.0) * exp(lw)
    };
    let q = if nu > 0.0 {
        integrate(f, &[0.0, nu, t_cut], QUAD_REL_TOL, 0.0)
    } else {
        integrate(f, &[0.0, 1.0, t_cut], QUAD_REL_TOL, 0.0)
    };
    let tail = exp(p * (nu_plus - t_cut)) * pow(t_cut, c - 1.0)
        / (p * (1.0 - (c - 1.0) / (p * t_cut)));
    let norm = ln_gamma(c);
    let ln_value = shift + log(q.value) - norm;
    Ok(NormValue::from_ln(
        ln_value,
        exp(shift - norm) * (q.abs_error + tail),
    ))
}

/// ⟨ν⟩^{c−1} for ν ≥ 0, e^{pν} for ν < 0.
pub fn model_envelope_i(p: SchattenOrder, c: f64, nu: f64) -> EnvelopeValue {
    if nu >= 0.0 {
        EnvelopeValue::from_ln(0.5 * (c - 1.0) * log1p(nu * nu))
    } else {
        EnvelopeValue::from_ln(p.get() * nu)
    }
}

/// Explicit two-sided bracket for I_{p,c}(ν).
///
/// For ν > 0 the lower end is `½(p^{−c} + ν^{c−1}/(pΓ(c)))`; see
/// [`model_integral_bracket_pointwise`] for the variant that keeps the
/// `4^{−p}` from the pointwise logistic bound.
pub fn model_integral_bracket(p: SchattenOrder, c: f64, nu: f64) -> (f64, f64) {
    let p = p.get();
    if nu <= 0.0 {
        let hi = exp(p * nu - c * log(p));
        (pow(2.0, -2.0 * p) * hi, hi)
    } else {
        let a = pow(p, -c) + pow(nu, c - 1.0) / (p * gamma(c));
        (0.5 * a, pow(2.0, c) * a)
    }
}

/// Bracket of [`model_integral_bracket`] with the lower end for ν > 0 scaled
/// by `4^{−p}`, the constant of `¼e^{−|y|} ≤ eʸ(1+eʸ)⁻² ≤ e^{−|y|}` raised to p.
pub fn model_integral_bracket_pointwise(p: SchattenOrder, c: f64, nu: f64) -> (f64, f64) {
    let (lo, hi) = model_integral_bracket(p, c, nu);
    if nu <= 0.0 {
        (lo, hi)
    } else {
        (lo * pow(4.0, -p.get()), hi)
    }
}

/// Li_s(x) = Σ_{n≥1} xⁿ n^{−s} for 0 < x < 1.
pub fn polylog(s: f64, x: f64) -> Result<f64, Error> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::InvalidParameter("polylog needs 0 < x < 1"));
    }
    let om = 1.0 - x;
    if s == 0.0 {
        return Ok(x / om);
    }
    if s == -1.0 {
        return Ok(x / (om * om));
    }
    if s == -2.0 {
        return Ok(x * (1.0 + x) / (om * om * om));
    }
    if s == 1.0 {
        return Ok(-log1p(-x));
    }
    let mut sum = 0.0;
    let mut xn = 1.0;
    let mut n: u64 = 0;
    loop {
        n += 1;
        xn *= x;
        let term = xn * pow(n as f64, -s);
        sum += term;
        // t_{n+1}/t_n = x(1 + 1/n)^{−s}: non-increasing for s < 0, at most x otherwise
        let ratio = if s < 0.0 {
            x * pow(1.0 + 1.0 / n as f64, -s)
        } else {
            x
        };
        if ratio < 1.0 && (term * ratio / (1.0 - ratio) <= 1e-17 * sum || xn == 0.0) {
            return Ok(sum);
        }
    }
}

/// Both sides of the Abel–Plana remainder estimate for the polylogarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbelPlanaCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// lhs = |η^c Li_{1−c}(e^{−ηp}) − Γ(c)/p^c|, rhs = ζ(c)Γ(c)η^c / (2^{c−1}π^c).
pub fn abel_plana_remainder_check(c: f64, p: SchattenOrder, eta: f64) -> Result<AbelPlanaCheck, Error> {
    let p = p.finite()?;
    if !(c > 1.0) || !(eta > 0.0) {
        return Err(Error::InvalidParameter("abel-plana check needs c > 1, eta > 0"));
    }
    let li = polylog(1.0 - c, exp(-eta * p))?;
    let lhs = fabs(pow(eta, c) * li - gamma(c) / pow(p, c));
    let rhs = zeta(c) * gamma(c) * pow(eta, c) / (pow(2.0, c - 1.0) * pow(PI, c));
    Ok(AbelPlanaCheck {
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + 1e-9),
    })
}
