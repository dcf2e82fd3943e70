//! Physical parameters, Schatten orders, regimes and result containers.

use crate::special::{bracket, ln_gamma};
use crate::Error;
use core::f64::consts::PI;
use libm::{exp, log};

/// Model configuration: ħ, β (∞ allowed), μ, dimension and optional field b.
///
/// The magnetic field is `B = 2b e₃`, so `b` present forces `dim = 3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub hbar: f64,
    pub beta: f64,
    pub mu: f64,
    pub dim: u32,
    pub b: Option<f64>,
}

impl PhysicalParams {
    pub fn new(hbar: f64, beta: f64, mu: f64, dim: u32) -> Result<Self, Error> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidParameter("hbar must be positive and finite"));
        }
        if !(beta > 0.0) {
            return Err(Error::InvalidParameter("beta must be positive (inf allowed)"));
        }
        if !mu.is_finite() {
            return Err(Error::InvalidParameter("mu must be finite"));
        }
        if dim == 0 {
            return Err(Error::InvalidParameter("dim must be at least 1"));
        }
        Ok(PhysicalParams {
            hbar,
            beta,
            mu,
            dim,
            b: None,
        })
    }

    /// Three-dimensional magnetic configuration.
    pub fn magnetic(hbar: f64, beta: f64, mu: f64, b: f64) -> Result<Self, Error> {
        Self::new(hbar, beta, mu, 3)?.with_field(b)
    }

    pub fn with_field(mut self, b: f64) -> Result<Self, Error> {
        if self.dim != 3 {
            return Err(Error::InvalidParameter("magnetic field requires dim = 3"));
        }
        if !(b >= 0.0 && b.is_finite()) {
            return Err(Error::InvalidParameter("b must be non-negative and finite"));
        }
        self.b = Some(b);
        Ok(self)
    }

    /// h = 2πħ.
    #[inline]
    pub fn planck(&self) -> f64 {
        2.0 * PI * self.hbar
    }

    /// η = βħ (∞ at zero temperature).
    #[inline]
    pub fn eta(&self) -> f64 {
        self.beta * self.hbar
    }

    #[inline]
    pub fn is_zero_temperature(&self) -> bool {
        self.beta == f64::INFINITY
    }

    /// ⟨b⟩, equal to 1 without a field.
    #[inline]
    pub fn bracket_b(&self) -> f64 {
        bracket(self.b.unwrap_or(0.0))
    }

    /// Ω = b/⟨b⟩.
    #[inline]
    pub fn omega(&self) -> f64 {
        self.b.unwrap_or(0.0) / self.bracket_b()
    }
}

/// Schatten exponent p ∈ [1, ∞].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SchattenOrder(f64);

impl SchattenOrder {
    pub const ONE: SchattenOrder = SchattenOrder(1.0);
    pub const TWO: SchattenOrder = SchattenOrder(2.0);
    pub const INFINITY: SchattenOrder = SchattenOrder(f64::INFINITY);

    pub fn new(p: f64) -> Result<Self, Error> {
        if p >= 1.0 {
            Ok(SchattenOrder(p))
        } else {
            Err(Error::InvalidParameter("Schatten order must satisfy p >= 1"))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    /// 1/p, zero for p = ∞.
    #[inline]
    pub fn recip(self) -> f64 {
        1.0 / self.0
    }

    pub fn conjugate(self) -> SchattenOrder {
        holder_conjugate(self)
    }

    pub fn finite(self) -> Result<f64, Error> {
        if self.is_finite() {
            Ok(self.0)
        } else {
            Err(Error::InvalidParameter("finite Schatten order required"))
        }
    }
}

/// p′ with 1/p + 1/p′ = 1.
pub fn holder_conjugate(p: SchattenOrder) -> SchattenOrder {
    let q = p.get();
    if q == 1.0 {
        SchattenOrder::INFINITY
    } else if q == f64::INFINITY {
        SchattenOrder::ONE
    } else {
        SchattenOrder(q / (q - 1.0))
    }
}

/// Temperature regime in units of the level spacing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegimeLabel {
    ClassicalLike,
    DeepQuantum,
    MagClassical,
    MagIntermediateLow,
    MagIntermediateHigh,
    MagDeep,
}

impl RegimeLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            RegimeLabel::ClassicalLike => "ClassicalLike",
            RegimeLabel::DeepQuantum => "DeepQuantum",
            RegimeLabel::MagClassical => "MagClassical",
            RegimeLabel::MagIntermediateLow => "MagIntermediateLow",
            RegimeLabel::MagIntermediateHigh => "MagIntermediateHigh",
            RegimeLabel::MagDeep => "MagDeep",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            RegimeLabel::ClassicalLike,
            RegimeLabel::DeepQuantum,
            RegimeLabel::MagClassical,
            RegimeLabel::MagIntermediateLow,
            RegimeLabel::MagIntermediateHigh,
            RegimeLabel::MagDeep,
        ]
        .into_iter()
        .find(|r| r.as_str() == s)
    }
}

impl core::fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Regime of `params`; boundary values go to the lower-listed label.
pub fn classify_regime(params: &PhysicalParams) -> RegimeLabel {
    let eta = params.eta();
    match params.b {
        None => {
            if eta <= 1.0 {
                RegimeLabel::ClassicalLike
            } else {
                RegimeLabel::DeepQuantum
            }
        }
        Some(_) => {
            let bb = params.bracket_b();
            if eta * bb <= 1.0 {
                RegimeLabel::MagClassical
            } else if eta <= 1.0 {
                RegimeLabel::MagIntermediateLow
            } else if eta <= bb {
                RegimeLabel::MagIntermediateHigh
            } else {
                RegimeLabel::MagDeep
            }
        }
    }
}

/// ω_n = 2π^{n/2}/Γ(n/2), the area of S^{n−1}; real n > 0 allowed.
pub fn sphere_measure(n: f64) -> f64 {
    assert!(n > 0.0, "sphere_measure needs n > 0");
    exp(ln_sphere_measure(n))
}

pub fn ln_sphere_measure(n: f64) -> f64 {
    core::f64::consts::LN_2 + 0.5 * n * log(PI) - ln_gamma(0.5 * n)
}

/// A computed norm with a rigorous bound on what truncation left out.
///
/// `tail_bound` is absolute and in units of `value^p` (or of `value` for
/// sup-type quantities). `ln_value` keeps the magnitude when `value` itself
/// underflows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormValue {
    pub value: f64,
    pub tail_bound: f64,
    pub ln_value: f64,
}

impl NormValue {
    pub const ZERO: NormValue = NormValue {
        value: 0.0,
        tail_bound: 0.0,
        ln_value: f64::NEG_INFINITY,
    };

    pub fn from_ln(ln_value: f64, tail_bound: f64) -> Self {
        NormValue {
            value: exp(ln_value),
            tail_bound,
            ln_value,
        }
    }

    pub fn from_value(value: f64, tail_bound: f64) -> Self {
        NormValue {
            value,
            tail_bound,
            ln_value: log(value),
        }
    }
}

/// An envelope evaluated without its implicit constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeValue {
    pub value: f64,
    pub ln_value: f64,
}

impl EnvelopeValue {
    pub fn from_ln(ln_value: f64) -> Self {
        EnvelopeValue {
            value: exp(ln_value),
            ln_value,
        }
    }

    /// value/self evaluated in the log domain.
    pub fn ratio(&self, value: &NormValue) -> f64 {
        exp(value.ln_value - self.ln_value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::rel_diff;

    #[test]
    fn regimes_from_examples() {
        let p = PhysicalParams::new(0.1, 5.0, 1.0, 2).unwrap();
        assert_eq!(classify_regime(&p), RegimeLabel::ClassicalLike);
        let p = PhysicalParams::new(0.1, 100.0, 1.0, 2).unwrap();
        assert_eq!(classify_regime(&p), RegimeLabel::DeepQuantum);
        let p = PhysicalParams::magnetic(0.01, 10.0, 1.0, libm::sqrt(2.0)).unwrap();
        assert_eq!(classify_regime(&p), RegimeLabel::MagClassical);
    }

    #[test]
    fn boundaries_go_low() {
        let p = PhysicalParams::new(0.5, 2.0, 0.0, 1).unwrap();
        assert_eq!(classify_regime(&p), RegimeLabel::ClassicalLike);
        let m = PhysicalParams::magnetic(0.5, 2.0, 0.0, 0.0).unwrap();
        assert_eq!(classify_regime(&m), RegimeLabel::MagClassical);
        let m = PhysicalParams::magnetic(1.0, f64::INFINITY, 0.0, 3.0).unwrap();
        assert_eq!(classify_regime(&m), RegimeLabel::MagDeep);
    }

    #[test]
    fn sphere_measures() {
        assert!(rel_diff(sphere_measure(2.0), 2.0 * PI) < 1e-15);
        assert!(rel_diff(sphere_measure(3.0), 4.0 * PI) < 1e-15);
        assert!(rel_diff(sphere_measure(6.0), PI * PI * PI) < 1e-14);
    }

    #[test]
    fn conjugates() {
        assert_eq!(holder_conjugate(SchattenOrder::ONE), SchattenOrder::INFINITY);
        assert_eq!(holder_conjugate(SchattenOrder::TWO).get(), 2.0);
        assert!((holder_conjugate(SchattenOrder::new(4.0).unwrap()).get() - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(PhysicalParams::new(0.0, 1.0, 0.0, 1).is_err());
        assert!(PhysicalParams::new(1.0, -1.0, 0.0, 1).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, 0.0, 2).unwrap().with_field(1.0).is_err());
        assert!(SchattenOrder::new(0.5).is_err());
    }
}
