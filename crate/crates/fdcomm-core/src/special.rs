//! Scalar special functions and the shared log-domain kernel.

use libm::{exp, expm1, fabs, hypot, lgamma, log, log1p, pow, tgamma};

/// Γ(x) for x > 0.
#[inline]
pub fn gamma(x: f64) -> f64 {
    tgamma(x)
}

/// ln Γ(x) for x > 0.
#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    lgamma(x)
}

/// Japanese bracket ⟨x⟩ = √(1+x²).
#[inline]
pub fn bracket(x: f64) -> f64 {
    hypot(1.0, x)
}

/// ln(1 + eˣ) without overflow.
#[inline]
pub fn log1pexp(x: f64) -> f64 {
    if x > 36.0 {
        x + exp(-x)
    } else if x > 0.0 {
        x + log1p(exp(-x))
    } else {
        log1p(exp(x))
    }
}

/// ln(1 − e^{−a}) for a ≥ 0; −∞ at a = 0.
#[inline]
pub fn log1mexp(a: f64) -> f64 {
    if a <= 0.0 {
        f64::NEG_INFINITY
    } else if a < core::f64::consts::LN_2 {
        log(-expm1(-a))
    } else {
        log1p(-exp(-a))
    }
}

/// ln C(n+k, k) through log-gamma; exact enough for weights, not for counting.
#[inline]
pub fn ln_binomial(n_plus_k: f64, k: f64) -> f64 {
    lgamma(n_plus_k + 1.0) - lgamma(k + 1.0) - lgamma(n_plus_k - k + 1.0)
}

const BERNOULLI_OVER_FACT: [f64; 6] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
];

/// Riemann ζ(s) for real s > 1 via Euler–Maclaurin with ten explicit terms.
pub fn zeta(s: f64) -> f64 {
    assert!(s > 1.0, "zeta needs s > 1");
    const N: f64 = 10.0;
    let mut sum = 0.0;
    for n in 1..10 {
        sum += pow(n as f64, -s);
    }
    sum += pow(N, 1.0 - s) / (s - 1.0) + 0.5 * pow(N, -s);
    // rising factorial s(s+1)...(s+2k-2) times N^{-s-2k+1}
    let mut rising = s;
    let mut npow = pow(N, -s - 1.0);
    for (k, c) in BERNOULLI_OVER_FACT.iter().enumerate() {
        sum += c * rising * npow;
        let m = 2.0 * k as f64;
        rising *= (s + m + 1.0) * (s + m + 2.0);
        npow /= N * N;
    }
    sum
}

/// Streaming log-sum-exp accumulator.
///
/// Terms are added as natural logarithms; the running sum is stored as
/// `max + ln(scaled)` so nothing overflows or underflows prematurely.
#[derive(Debug, Clone, Copy)]
pub struct LogSum {
    max: f64,
    scaled: f64,
}

impl Default for LogSum {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSum {
    pub const fn new() -> Self {
        LogSum {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }

    #[inline]
    pub fn add(&mut self, ln_term: f64) {
        if ln_term == f64::NEG_INFINITY {
            return;
        }
        if ln_term > self.max {
            self.scaled = self.scaled * exp(self.max - ln_term) + 1.0;
            self.max = ln_term;
        } else {
            self.scaled += exp(ln_term - self.max);
        }
    }

    pub fn merge(&mut self, other: &LogSum) {
        if other.max == f64::NEG_INFINITY {
            return;
        }
        if other.max > self.max {
            self.scaled = self.scaled * exp(self.max - other.max) + other.scaled;
            self.max = other.max;
        } else {
            self.scaled += other.scaled * exp(other.max - self.max);
        }
    }

    /// Natural log of the accumulated sum (−∞ when empty).
    #[inline]
    pub fn ln(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + log(self.scaled)
        }
    }

    #[inline]
    pub fn value(&self) -> f64 {
        exp(self.ln())
    }

    pub fn is_empty(&self) -> bool {
        self.max == f64::NEG_INFINITY
    }
}

/// ln(eᵃ + eᵇ).
#[inline]
pub fn ln_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        hi
    } else {
        hi + log1p(exp(lo - hi))
    }
}

/// Relative distance |a − b| / max(|a|, |b|), zero when both vanish.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = fabs(a).max(fabs(b));
    if scale == 0.0 {
        0.0
    } else {
        fabs(a - b) / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn zeta_known_values() {
        assert!(rel_diff(zeta(2.0), PI * PI / 6.0) < 1e-14);
        assert!(rel_diff(zeta(4.0), PI.powi(4) / 90.0) < 1e-14);
        assert!(rel_diff(zeta(3.0), 1.202_056_903_159_594_2) < 1e-14);
        assert!(rel_diff(zeta(1.5), 2.612_375_348_685_488_3) < 1e-13);
    }

    #[test]
    fn logsum_matches_naive() {
        let mut acc = LogSum::new();
        for k in 0..20 {
            acc.add(-(k as f64) * 0.3);
        }
        let naive: f64 = (0..20).map(|k| exp(-(k as f64) * 0.3)).sum();
        assert!(rel_diff(acc.value(), naive) < 1e-14);
    }

    #[test]
    fn logsum_survives_huge_exponents() {
        let mut acc = LogSum::new();
        acc.add(-1.0e6);
        acc.add(-1.0e6 + LN2);
        assert!(fabs(acc.ln() - (-1.0e6 + log(3.0))) < 1e-9);
    }

    const LN2: f64 = core::f64::consts::LN_2;

    #[test]
    fn log1pexp_both_branches() {
        assert!(rel_diff(log1pexp(0.0), LN2) < 1e-15);
        assert_eq!(log1pexp(1000.0), 1000.0);
        assert!(rel_diff(log1pexp(-50.0), exp(-50.0)) < 1e-15);
    }

    #[test]
    fn log1mexp_small_and_large() {
        assert!(rel_diff(log1mexp(1e-10), log(1e-10)) < 1e-9);
        assert!(rel_diff(log1mexp(40.0), -exp(-40.0)) < 1e-14);
    }
}
