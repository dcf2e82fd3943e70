//! Spectral sums for the isotropic harmonic oscillator H = |p̂|² + |x|².
//!
//! Eigenvalues λ_n = (2n + d)ħ with multiplicity C(n+d−1, d−1). The ladder
//! a = x + ip̂ maps the n-th shell into the (n−1)-th, so
//! `‖[a, F(H)]‖^p = h^d Σ N_n |F(λ_n) − F(λ_{n−1})|^p (2nħ)^{p/2}` and all sums
//! run in the log domain.

use crate::fermi_dirac::OccupationFn;
use crate::model_params::{EnvelopeValue, NormValue, PhysicalParams, SchattenOrder};
use crate::special::{ln_binomial, log1pexp, LogSum};
use crate::Error;
use core::f64::consts::PI;
use libm::{exp, floor, log, log1p};

/// Relative tail tolerance for truncated spectral sums.
pub const SUM_REL_TOL: f64 = 1e-13;

/// Spectrum of the isotropic oscillator for a field-free configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicSpectrum {
    pub params: PhysicalParams,
}

impl HarmonicSpectrum {
    pub fn new(params: PhysicalParams) -> Result<Self, Error> {
        if params.b.is_some() {
            return Err(Error::InvalidParameter("harmonic spectrum takes no magnetic field"));
        }
        Ok(HarmonicSpectrum { params })
    }

    fn d(&self) -> f64 {
        self.params.dim as f64
    }

    /// λ_n = (2n + d)ħ; n = −1 gives (d − 2)ħ.
    #[inline]
    pub fn eigenvalue(&self, n: i64) -> f64 {
        (2.0 * n as f64 + self.d()) * self.params.hbar
    }

    fn occupation(&self) -> OccupationFn {
        OccupationFn {
            beta: self.params.beta,
            mu: self.params.mu,
        }
    }

    /// ln N_n.
    #[inline]
    fn ln_mult(&self, n: u64) -> f64 {
        let d = self.d();
        if d == 1.0 {
            0.0
        } else {
            ln_binomial(n as f64 + d - 1.0, d - 1.0)
        }
    }

    /// Index of the only shell with F(λ_{n−1}) ≠ F(λ_n) at β = ∞, if any.
    pub fn fermi_shell(&self) -> Option<u64> {
        let mu = self.params.mu;
        if mu < self.eigenvalue(0) {
            return None;
        }
        let mut n = (floor((mu / self.params.hbar - self.d()) / 2.0) + 1.0).max(1.0) as i64;
        while n > 1 && self.eigenvalue(n - 1) > mu {
            n -= 1;
        }
        while self.eigenvalue(n) <= mu {
            n += 1;
        }
        Some(n as u64)
    }
}

/// N_n = C(n+d−1, d−1), exact.
pub fn multiplicity(d: u32, n: u64) -> Result<u128, Error> {
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1"));
    }
    let k = (d - 1) as u128;
    let mut acc: u128 = 1;
    for i in 1..=k {
        // C(n+i, i) = C(n+i−1, i−1)·(n+i)/i, always an integer
        acc = acc
            .checked_mul(n as u128 + i)
            .ok_or(Error::Overflow)?
            / i;
    }
    Ok(acc)
}

/// Majorant ratio for terms N_m e^{−c m} m^{e} beyond index m ≥ n.
#[inline]
fn tail_ratio(ln_decay: f64, n: u64, power: f64) -> f64 {
    exp(-ln_decay + power * log1p(1.0 / (n as f64)))
}

/// S_p = ‖[a, F(H)]‖_{𝓛^p} / ħ.
///
/// `tail_bound` bounds the omitted part of S_p^p (absolute). For p = ∞ the
/// operator norm is returned without the h^d scale and `tail_bound` is 0.
pub fn schatten_commutator_sum(spec: &HarmonicSpectrum, p: SchattenOrder) -> NormValue {
    let hbar = spec.params.hbar;
    let d = spec.d();
    if !p.is_finite() {
        return sup_commutator(spec);
    }
    let pf = p.get();
    let ln_pref = d * log(2.0 * PI * hbar) - pf * log(hbar);
    if spec.params.is_zero_temperature() {
        return match spec.fermi_shell() {
            None => NormValue::ZERO,
            Some(n) => {
                let ln = ln_pref + spec.ln_mult(n) + 0.5 * pf * log(2.0 * n as f64 * hbar);
                NormValue::from_ln(ln / pf, 0.0)
            }
        };
    }
    let beta = spec.params.beta;
    let mu = spec.params.mu;
    let occ = spec.occupation();
    let gap = 2.0 * hbar;
    let power = d - 1.0 + 0.5 * pf;
    let mut acc = LogSum::new();
    let mut n: u64 = 1;
    loop {
        let lam = spec.eigenvalue(n as i64);
        let ln_t = spec.ln_mult(n) + pf * occ.ln_gap_difference(lam, gap) + 0.5 * pf * log(n as f64 * gap);
        acc.add(ln_t);
        let x = beta * (lam - mu);
        if x >= 40.0 * pf + (d + 0.5 * pf) * log(n as f64 + 2.0) {
            // |ΔF_m| ≤ e^{−β(λ_{m−1}−μ)} for m > n
            let rho = tail_ratio(2.0 * pf * beta * hbar, n + 1, power);
            if rho < 1.0 {
                let m = n + 1;
                let ln_major = spec.ln_mult(m) - pf * x + 0.5 * pf * log(m as f64 * gap);
                let ln_tail = ln_major - log1p(-rho);
                if ln_tail <= acc.ln() + log(SUM_REL_TOL) {
                    let ln_sum = acc.ln();
                    return NormValue::from_ln((ln_pref + ln_sum) / pf, exp(ln_pref + ln_tail));
                }
            }
        }
        n += 1;
    }
}

fn sup_commutator(spec: &HarmonicSpectrum) -> NormValue {
    let hbar = spec.params.hbar;
    if spec.params.is_zero_temperature() {
        return match spec.fermi_shell() {
            None => NormValue::ZERO,
            Some(n) => NormValue::from_ln(0.5 * log(2.0 * n as f64 * hbar) - log(hbar), 0.0),
        };
    }
    let beta = spec.params.beta;
    let mu = spec.params.mu;
    let occ = spec.occupation();
    let gap = 2.0 * hbar;
    let mut best = f64::NEG_INFINITY;
    let mut n: u64 = 1;
    loop {
        let lam = spec.eigenvalue(n as i64);
        let ln_t = occ.ln_gap_difference(lam, gap) + 0.5 * log(n as f64 * gap);
        best = best.max(ln_t);
        let x = beta * (lam - mu);
        let rho = tail_ratio(beta * gap, n + 1, 0.5);
        if x > 0.0 && rho < 1.0 {
            let ln_major = -x + 0.5 * log((n + 1) as f64 * gap);
            if ln_major < best - 40.0 {
                return NormValue::from_ln(best - log(hbar), 0.0);
            }
        }
        n += 1;
    }
}

/// K_p = ‖F(H)(1 − F(H))‖_{𝓛^p}; zero at β = ∞.
pub fn purity_defect_quantum(spec: &HarmonicSpectrum, p: SchattenOrder) -> NormValue {
    if spec.params.is_zero_temperature() {
        return NormValue::ZERO;
    }
    let hbar = spec.params.hbar;
    let d = spec.d();
    let beta = spec.params.beta;
    let mu = spec.params.mu;
    let occ = spec.occupation();
    let finite = p.is_finite();
    let pf = if finite { p.get() } else { 1.0 };
    let mut acc = LogSum::new();
    let mut best = f64::NEG_INFINITY;
    let mut n: u64 = 0;
    loop {
        let lam = spec.eigenvalue(n as i64);
        let lp = occ.ln_purity(lam);
        if finite {
            acc.add(spec.ln_mult(n) + pf * lp);
        } else {
            best = best.max(lp);
        }
        let x = beta * (lam - mu);
        if x >= 40.0 * pf + d * log(n as f64 + 2.0) {
            let rho = tail_ratio(2.0 * pf * beta * hbar, n + 1, d - 1.0);
            if rho < 1.0 {
                if !finite {
                    return NormValue::from_ln(best, 0.0);
                }
                let ln_major = spec.ln_mult(n + 1) - pf * (x + 2.0 * beta * hbar);
                let ln_tail = ln_major - log1p(-rho);
                if ln_tail <= acc.ln() + log(SUM_REL_TOL) {
                    let ln_pref = d * log(2.0 * PI * hbar);
                    return NormValue::from_ln((ln_pref + acc.ln()) / pf, exp(ln_pref + ln_tail));
                }
            }
        }
        n += 1;
    }
}

/// S_{p,c}(η, ν) = Σ_{n≥1} e^{p(ηn−ν)} (1+e^{ηn−ν})^{−p} (1+e^{η(n−1)−ν})^{−p} (ηn)^{c−1} η.
pub fn discrete_model_sum(p: SchattenOrder, c: f64, eta: f64, nu: f64) -> Result<NormValue, Error> {
    let pf = p.finite()?;
    if !(c >= 1.0) || !(eta > 0.0) || !eta.is_finite() || !nu.is_finite() {
        return Err(Error::InvalidParameter("discrete_model_sum needs c >= 1, eta > 0"));
    }
    let mut acc = LogSum::new();
    let mut n: u64 = 1;
    loop {
        let x = eta * n as f64 - nu;
        let ln_t = -pf * log1pexp(-x) - pf * log1pexp(x - eta) + (c - 1.0) * log(eta * n as f64) + log(eta);
        acc.add(ln_t);
        let xl = x - eta;
        if xl > 0.0 {
            // t_m ≤ e^{−p(η(m−1)−ν)} (ηm)^{c−1} η for m > n
            let rho = tail_ratio(pf * eta, n + 1, c - 1.0);
            if rho < 1.0 {
                let m = (n + 1) as f64;
                let ln_major = -pf * x + (c - 1.0) * log(eta * m) + log(eta);
                let ln_tail = ln_major - log1p(-rho);
                if ln_tail <= acc.ln() + log(SUM_REL_TOL) {
                    return Ok(NormValue::from_ln(acc.ln(), exp(ln_tail)));
                }
            }
        }
        n += 1;
    }
}

/// Constant-free envelope of S_p for both temperature regimes.
///
/// Fails for ħ > 1 unless `allow_large_hbar` is set.
pub fn quantum_envelope(params: &PhysicalParams, p: SchattenOrder, allow_large_hbar: bool) -> Result<EnvelopeValue, Error> {
    if params.b.is_some() {
        return Err(Error::InvalidParameter("quantum_envelope is field-free"));
    }
    if params.hbar > 1.0 && !allow_large_hbar {
        return Err(Error::OutsideHypothesis("hbar must lie in (0, 1]"));
    }
    let d = params.dim as f64;
    let hbar = params.hbar;
    let beta = params.beta;
    let mu = params.mu;
    let ip = p.recip();
    let below = mu < d * hbar;
    let ln = if params.eta() <= 1.0 {
        let lb = (0.5 - d * ip) * log(beta);
        if below {
            lb + beta * (mu - d * hbar)
        } else {
            let ln_pow = (0.5 + (d - 1.0) * ip) * log(beta * (mu - d * hbar + hbar));
            lb + log1pexp(ln_pow)
        }
    } else if below {
        (d * ip - 0.5) * log(hbar) + beta * (mu - (d + 2.0) * hbar)
    } else {
        (0.5 + (d - 1.0) * ip) * log(mu - d * hbar + hbar) - (1.0 - ip) * log(hbar)
    };
    Ok(EnvelopeValue::from_ln(ln))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::rel_diff;

    fn spec(hbar: f64, beta: f64, mu: f64, d: u32) -> HarmonicSpectrum {
        HarmonicSpectrum::new(PhysicalParams::new(hbar, beta, mu, d).unwrap()).unwrap()
    }

    #[test]
    fn multiplicities() {
        assert_eq!(multiplicity(1, 17).unwrap(), 1);
        assert_eq!(multiplicity(3, 2).unwrap(), 6);
        assert_eq!(multiplicity(2, 5).unwrap(), 6);
        assert_eq!(multiplicity(4, 3).unwrap(), 20);
        assert!(multiplicity(60, u64::MAX / 2).is_err());
    }

    #[test]
    fn zero_temperature_single_shell() {
        let s = spec(1.0, f64::INFINITY, 2.0, 1);
        let v = schatten_commutator_sum(&s, SchattenOrder::TWO);
        assert!(rel_diff(v.value * v.value, 4.0 * PI) < 1e-14);
        let s = spec(1.0, f64::INFINITY, 0.5, 1);
        assert_eq!(schatten_commutator_sum(&s, SchattenOrder::TWO).value, 0.0);
    }

    #[test]
    fn fermi_shell_brackets_mu() {
        for (hbar, mu, d) in [(0.5, 2.0, 2), (0.25, 1.0, 1), (0.3, 5.0, 3), (0.5, 1.0, 2)] {
            let s = spec(hbar, f64::INFINITY, mu, d);
            let n = s.fermi_shell().unwrap() as i64;
            assert!(s.eigenvalue(n - 1) <= mu && mu < s.eigenvalue(n));
        }
    }

    #[test]
    fn finite_beta_approaches_zero_temperature() {
        let cold = schatten_commutator_sum(&spec(0.5, f64::INFINITY, 1.25, 2), SchattenOrder::ONE);
        let warm = schatten_commutator_sum(&spec(0.5, 400.0, 1.25, 2), SchattenOrder::ONE);
        assert!(rel_diff(cold.value, warm.value) < 1e-12);
    }

    #[test]
    fn purity_direct_sum_d1() {
        let s = spec(1.0, 1.0, 1.0, 1);
        let v = purity_defect_quantum(&s, SchattenOrder::ONE);
        let occ = OccupationFn::new(1.0, 1.0).unwrap();
        let direct: f64 = (0..200).map(|n| {
            let r = 2.0 * n as f64 + 1.0;
            occ.eval(r) * occ.complement(r)
        }).sum();
        assert!(rel_diff(v.value, 2.0 * PI * direct) < 1e-13);
        assert_eq!(purity_defect_quantum(&spec(1.0, f64::INFINITY, 1.0, 1), SchattenOrder::ONE).value, 0.0);
    }

    #[test]
    fn discrete_sum_first_term_dominates() {
        let v = discrete_model_sum(SchattenOrder::ONE, 1.0, 10.0, -1.0).unwrap();
        let first = 10.0 * exp(11.0) / ((1.0 + exp(11.0)) * (1.0 + exp(1.0)));
        assert!(rel_diff(v.value, first) < 1e-4);
    }

    #[test]
    fn envelope_deep_quantum_remark() {
        let hbar = 0.01;
        let params = PhysicalParams::new(hbar, 2.0 / hbar, 1.0, 3).unwrap();
        let e = quantum_envelope(&params, SchattenOrder::TWO, false).unwrap();
        let expect = (1.0f64 - 2.0 * hbar).powf(1.5) * hbar.powf(-0.5);
        assert!(rel_diff(e.value, expect) < 1e-13);
        let big = PhysicalParams::new(2.0, 1.0, 1.0, 1).unwrap();
        assert!(quantum_envelope(&big, SchattenOrder::ONE, false).is_err());
        assert!(quantum_envelope(&big, SchattenOrder::ONE, true).is_ok());
    }

    #[test]
    fn envelope_classical_like_below() {
        let params = PhysicalParams::new(0.1, 2.0, -1.0, 2).unwrap();
        let e = quantum_envelope(&params, SchattenOrder::TWO, false).unwrap();
        assert!(rel_diff(e.ln_value, -0.5 * log(2.0) + 2.0 * (-1.0 - 0.2)) < 1e-14);
    }
}
