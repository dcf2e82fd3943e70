//! Fock–Darwin spectrum in a uniform field `B = 2b e₃` with unit trap.
//!
//! `H_A = |a₁|² λ₁/α₁ + |a₂|² λ₂/α₂ + |a₃|² λ₃/α₃ + Λ₀` in terms of three
//! commuting ladders; eigenvalues are `Λ_n = λ·n + Λ₀`, n ∈ ℕ₀³. The
//! commutator `[a_j, F(H)]` is a weighted shift along axis j, so its Schatten
//! norm is the lattice sum
//!
//! `S_{p,j}^p = h³ Σ_n |F(Λ_n) − F(Λ_n − λ_j)|^p (α_j n_j)^{p/2}`.

use crate::lattice::{power_geometric, ExpLattice, LnBracket, Shell, ShellLattice, Side};
use crate::model_params::{EnvelopeValue, NormValue, PhysicalParams, SchattenOrder};
use crate::special::{bracket, ln_add, log1mexp, LogSum};
use crate::Error;
use alloc::vec::Vec;
use core::f64::consts::PI;
use libm::{ceil, exp, floor, log, pow, sqrt};

/// Slab membership tolerance in units of ħ.
pub const SLAB_TOL: f64 = 1e-12;
/// Lattice points a zero-temperature enumeration may visit.
const ENUM_BUDGET: f64 = 1.0e8;

/// Spectral data of the Fock–Darwin Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagneticSpectrum {
    pub params: PhysicalParams,
    /// Level spacings along the three ladders.
    pub lambda: [f64; 3],
    /// `[a_j, a_j*] = α_j`.
    pub alpha: [f64; 3],
    /// Ground energy (2⟨b⟩ + 1)ħ.
    pub lambda0: f64,
    /// b/⟨b⟩.
    pub omega: f64,
}

impl MagneticSpectrum {
    pub fn new(params: PhysicalParams) -> Result<Self, Error> {
        let b = params
            .b
            .ok_or(Error::InvalidParameter("magnetic spectrum needs b"))?;
        let h = params.hbar;
        let bb = bracket(b);
        Ok(MagneticSpectrum {
            params,
            // 2(⟨b⟩ − b)ħ without cancellation
            lambda: [2.0 * h / (bb + b), 2.0 * (bb + b) * h, 2.0 * h],
            alpha: [4.0 * bb * h, 4.0 * bb * h, 2.0 * h],
            lambda0: (2.0 * bb + 1.0) * h,
            omega: b / bb,
        })
    }

    pub fn bracket_b(&self) -> f64 {
        self.params.bracket_b()
    }

    pub fn level(&self, n: [u64; 3]) -> f64 {
        self.lambda0 + (0..3).map(|i| self.lambda[i] * n[i] as f64).sum::<f64>()
    }

    /// μ̃₀ = μ − Λ₀.
    pub fn mu_tilde(&self) -> f64 {
        self.params.mu - self.lambda0
    }

    /// σ = pβλ.
    pub fn sigma(&self, p: f64) -> [f64; 3] {
        let pb = p * self.params.beta;
        [pb * self.lambda[0], pb * self.lambda[1], pb * self.lambda[2]]
    }

    /// δ₀ = pβ(μ − Λ₀).
    pub fn delta0(&self, p: f64) -> f64 {
        p * self.params.beta * self.mu_tilde()
    }

    /// ν_j = β(μ − Λ₀ + λ_j) for j ∈ {1, 2, 3}.
    pub fn nu(&self, j: usize) -> Result<f64, Error> {
        let a = axis(j)?;
        Ok(self.params.beta * (self.mu_tilde() + self.lambda[a]))
    }

    fn tol(&self) -> f64 {
        SLAB_TOL * self.params.hbar
    }

    fn ln_planck3(&self) -> f64 {
        3.0 * log(self.params.planck())
    }

    fn at_zero_temperature(&self) -> MagneticSpectrum {
        let mut z = *self;
        z.params.beta = f64::INFINITY;
        z
    }
}

fn axis(j: usize) -> Result<usize, Error> {
    if (1..=3).contains(&j) {
        Ok(j - 1)
    } else {
        Err(Error::InvalidParameter("ladder index must be 1, 2 or 3"))
    }
}

/// Visits the lattice points with `lo < λ·n ≤ hi` as runs along the finest
/// axis: `f(inner, base, k_min, k_max)` with `base[inner] = 0`.
fn for_each_run<F: FnMut(usize, [u64; 3], u64, u64)>(lambda: &[f64; 3], lo: f64, hi: f64, mut f: F) -> Result<(), Error> {
    if hi < 0.0 {
        return Ok(());
    }
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| lambda[b].partial_cmp(&lambda[a]).unwrap_or(core::cmp::Ordering::Equal));
    let (outer, mid, inner) = (idx[0], idx[1], idx[2]);
    let pairs = (hi / lambda[outer] + 1.0) * (hi / lambda[mid] + 1.0);
    if pairs > ENUM_BUDGET {
        return Err(Error::Budget {
            terms: pairs as u64,
            relative_tail: f64::NAN,
        });
    }
    let li = lambda[inner];
    let mut n = [0u64; 3];
    let mut a = 0u64;
    while lambda[outer] * a as f64 <= hi {
        n[outer] = a;
        let mut b = 0u64;
        loop {
            let c = lambda[outer] * a as f64 + lambda[mid] * b as f64;
            if c > hi {
                break;
            }
            n[mid] = b;
            let at = |k: u64| c + li * k as f64;
            let mut k0 = if c > lo { 0 } else { (floor((lo - c) / li) as u64).saturating_add(1) };
            while k0 > 0 && at(k0 - 1) > lo {
                k0 -= 1;
            }
            while at(k0) <= lo {
                k0 += 1;
            }
            let mut k1 = floor((hi - c) / li) as u64;
            while at(k1 + 1) <= hi {
                k1 += 1;
            }
            let mut empty = false;
            while at(k1) > hi {
                if k1 == 0 {
                    empty = true;
                    break;
                }
                k1 -= 1;
            }
            if !empty && k0 <= k1 {
                n[inner] = 0;
                f(inner, n, k0, k1);
            }
            b += 1;
        }
        a += 1;
    }
    Ok(())
}

/// Σ_{k=a}^{b} k^s.
pub fn power_sum(a: u64, b: u64, s: f64) -> f64 {
    if b < a {
        return 0.0;
    }
    if s == 0.0 {
        return (b - a + 1) as f64;
    }
    if b - a <= 2000 {
        return (a..=b).map(|k| pow(k as f64, s)).sum();
    }
    let split = a.max(100);
    let head: f64 = (a..split).map(|k| pow(k as f64, s)).sum();
    let (x0, x1) = (split as f64, b as f64);
    let mut sum = (pow(x1, s + 1.0) - pow(x0, s + 1.0)) / (s + 1.0) + 0.5 * (pow(x0, s) + pow(x1, s));
    // B_{2i}/(2i)!
    const B: [f64; 5] = [1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0, -1.0 / 1209600.0, 1.0 / 47900160.0];
    for (i, c) in B.iter().enumerate() {
        let m = 2 * i + 1;
        let falling: f64 = (0..m).map(|r| s - r as f64).product();
        sum += c * falling * (pow(x1, s - m as f64) - pow(x0, s - m as f64));
    }
    head + sum
}

/// All levels with Λ_n ≤ cutoff (ties within 10⁻¹²ħ included), sorted by
/// energy and then lexicographically.
pub fn magnetic_levels(spec: &MagneticSpectrum, cutoff: f64) -> Result<Vec<(f64, [u64; 3])>, Error> {
    let mut out = Vec::new();
    let hi = cutoff - spec.lambda0 + spec.tol();
    for_each_run(&spec.lambda, f64::NEG_INFINITY, hi, |inner, base, k0, k1| {
        for k in k0..=k1 {
            let mut n = base;
            n[inner] = k;
            out.push((spec.level(n), n));
        }
    })?;
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(core::cmp::Ordering::Equal).then(a.1.cmp(&b.1)));
    Ok(out)
}

/// Number of occupied levels at zero temperature, #{n : Λ_n ≤ μ}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleCount {
    pub count: u64,
    /// h³ N.
    pub phase_volume: f64,
    /// μ(μ̃₀ + ħ/⟨b⟩)(μ̃₀ + ħ), the order it should match.
    pub order: f64,
}

pub fn particle_count(spec: &MagneticSpectrum) -> Result<ParticleCount, Error> {
    let mt = spec.mu_tilde();
    let mut count = 0u64;
    for_each_run(&spec.lambda, f64::NEG_INFINITY, mt + spec.tol(), |_, _, k0, k1| {
        count += k1 - k0 + 1;
    })?;
    let h = spec.params.hbar;
    let mt_pos = mt.max(0.0);
    Ok(ParticleCount {
        count,
        phase_volume: pow(spec.params.planck(), 3.0) * count as f64,
        order: spec.params.mu * (mt_pos + h / spec.bracket_b()) * (mt_pos + h),
    })
}

/// Zero-temperature S_{p,j}: the slab μ̃₀ < λ·n ≤ μ̃₀ + λ_j.
///
/// Uses μ only, so it is also the I₀ ingredient at finite β. For p = ∞ the
/// value is the largest weight √(α_j n_j) in the slab.
pub fn zero_temp_shell_sum(spec: &MagneticSpectrum, j: usize, p: SchattenOrder) -> Result<NormValue, Error> {
    let a = axis(j)?;
    let mt = spec.mu_tilde();
    let lo = mt + spec.tol();
    let hi = mt + spec.lambda[a] + spec.tol();
    if !p.is_finite() {
        let mut best = 0u64;
        for_each_run(&spec.lambda, lo, hi, |inner, base, _, k1| {
            let nj = if inner == a { k1 } else { base[a] };
            best = best.max(nj);
        })?;
        if best == 0 {
            return Ok(NormValue::ZERO);
        }
        return Ok(NormValue::from_value(sqrt(spec.alpha[a] * best as f64), 0.0));
    }
    let pf = p.get();
    let s = 0.5 * pf;
    let mut total = 0.0;
    for_each_run(&spec.lambda, lo, hi, |inner, base, k0, k1| {
        total += if inner == a {
            power_sum(k0, k1, s)
        } else if base[a] == 0 {
            0.0
        } else {
            (k1 - k0 + 1) as f64 * pow(base[a] as f64, s)
        };
    })?;
    if total == 0.0 {
        return Ok(NormValue::ZERO);
    }
    let ln_pp = spec.ln_planck3() + s * log(spec.alpha[a]) + log(total);
    Ok(NormValue::from_ln(ln_pp / pf, 0.0))
}

/// S_{p,j} = ‖[a_j, F(H_A)]‖_{𝓛^p} for finite or infinite β and p.
///
/// `tail_bound` is in units of value^p. It is rigorous when the lattice is
/// coarse enough to be summed term by term; when fine axes are summed by
/// Euler–Maclaurin it is the size of the first omitted correction.
pub fn magnetic_commutator_sum(spec: &MagneticSpectrum, j: usize, p: SchattenOrder) -> Result<NormValue, Error> {
    let a = axis(j)?;
    if spec.params.is_zero_temperature() {
        return zero_temp_shell_sum(spec, j, p);
    }
    let beta = spec.params.beta;
    let steps = [beta * spec.lambda[0], beta * spec.lambda[1], beta * spec.lambda[2]];
    let m = beta * spec.mu_tilde();
    if !p.is_finite() {
        return sup_norm(spec, a, steps, m);
    }
    let pf = p.get();
    let s = 0.5 * pf;
    let lat = ShellLattice {
        steps,
        j: a,
        s,
        shell: Shell::new(pf, m, steps[a]),
    };
    let sum = lat.sum()?;
    let ln_pp = spec.ln_planck3() + s * log(spec.alpha[a]) + sum.ln_value;
    Ok(NormValue::from_ln(ln_pp / pf, sum.rel_err * exp(ln_pp)))
}

/// sup_n |ΔF(Λ_n)| √(α_j n_j) at finite β.
fn sup_norm(spec: &MagneticSpectrum, a: usize, steps: [f64; 3], m: f64) -> Result<NormValue, Error> {
    let shell = Shell::new(1.0, m, steps[a]);
    let peak = m + 0.5 * steps[a];
    let inner = (0..3).filter(|&i| i != a).min_by(|&x, &y| steps[x].partial_cmp(&steps[y]).unwrap()).unwrap();
    let other = 3 - a - inner;
    let mut d = 40.0;
    loop {
        let hi = m + steps[a] + d;
        let pairs = (hi / steps[a] + 1.0) * (hi / steps[other] + 1.0);
        if pairs > ENUM_BUDGET {
            return Err(Error::Budget {
                terms: pairs as u64,
                relative_tail: f64::NAN,
            });
        }
        let mut best = f64::NEG_INFINITY;
        let mut nj = 1u64;
        while steps[a] * nj as f64 <= hi {
            let lw = 0.5 * log(nj as f64);
            let mut no = 0u64;
            loop {
                let c = steps[a] * nj as f64 + steps[other] * no as f64;
                if c > hi {
                    break;
                }
                let k = ((peak - c) / steps[inner]).max(0.0);
                for kk in [floor(k), ceil(k)] {
                    best = best.max(shell.ln_g(c + steps[inner] * kk) + lw);
                }
                no += 1;
            }
            nj += 1;
        }
        // beyond hi: ΔF ≤ e^{−(ε − m − λ_j)} and e^{−t}√t decreases for t > 1/2
        let ln_tail = -d + 0.5 * log((hi / steps[a]).max(1.0));
        if ln_tail < best - 35.0 || d > 2000.0 {
            let ln_v = best + 0.5 * log(spec.alpha[a]);
            return Ok(NormValue::from_ln(ln_v, 0.0));
        }
        d += 20.0;
    }
}

/// The three majorants of the S^p decomposition.
///
/// `ln_plus`/`ln_minus` bracket the two lattice majorants (equal up to
/// rounding when summed exactly); `i_plus`/`i_minus` report the lower ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decomposition {
    pub i_plus: f64,
    pub i_minus: f64,
    pub i_zero: f64,
    pub ln_plus: (f64, f64),
    pub ln_minus: (f64, f64),
    pub ln_zero: f64,
    pub exact: bool,
}

impl Decomposition {
    /// ln of a certified lower bound on I₊ + I₋ + I₀.
    pub fn ln_total_lower(&self) -> f64 {
        ln_add(ln_add(self.ln_plus.0, self.ln_minus.0), self.ln_zero)
    }

    pub fn ln_total_upper(&self) -> f64 {
        ln_add(ln_add(self.ln_plus.1, self.ln_minus.1), self.ln_zero)
    }
}

pub fn decomposition_bounds(spec: &MagneticSpectrum, j: usize, p: SchattenOrder) -> Result<Decomposition, Error> {
    let a = axis(j)?;
    if spec.params.is_zero_temperature() {
        return Err(Error::InfiniteBeta);
    }
    let pf = p.finite()?;
    let s = 0.5 * pf;
    let beta = spec.params.beta;
    let sigma = spec.sigma(pf);
    let delta = spec.delta0(pf);
    let bl = beta * spec.lambda[a];
    let common = pf * log(bl) + s * log(spec.alpha[a]) + spec.ln_planck3() - log(sigma[a]) + log1mexp(sigma[a]);
    let sum = |side| {
        ExpLattice {
            sigma,
            j: a,
            s,
            delta,
            side,
        }
        .sum()
    };
    let plus: LnBracket = sum(Side::Above { strict: true })?;
    let minus: LnBracket = sum(Side::Below)?;
    let ln_plus = (common + sigma[a] + plus.lo, common + sigma[a] + plus.hi);
    let ln_minus = (common + minus.lo, common + minus.hi);
    let zero = zero_temp_shell_sum(&spec.at_zero_temperature(), j, p)?;
    let ln_zero = if zero.value == 0.0 {
        f64::NEG_INFINITY
    } else {
        pf * (log(bl.min(1.0)) + zero.ln_value)
    };
    Ok(Decomposition {
        i_plus: exp(ln_plus.0),
        i_minus: exp(ln_minus.0),
        i_zero: exp(ln_zero),
        ln_plus,
        ln_minus,
        ln_zero,
        exact: plus.exact && minus.exact,
    })
}

/// Σ = Σ_{σ·n ≥ δ} e^{−σ·n+δ} n_j^{p/2}: the computed value and an explicit
/// upper bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaSum {
    pub value: f64,
    /// Bracket on `value` (tight when enumerated exactly).
    pub range: (f64, f64),
    pub bound: f64,
}

pub fn sigma_sum(delta: f64, sigma: [f64; 3], p: SchattenOrder, j: usize) -> Result<SigmaSum, Error> {
    let a = axis(j)?;
    let pf = p.finite()?;
    if !sigma.iter().all(|&x| x > 0.0 && x.is_finite()) || !delta.is_finite() {
        return Err(Error::InvalidParameter("sigma must be positive and delta finite"));
    }
    let s = 0.5 * pf;
    let br = ExpLattice {
        sigma,
        j: a,
        s,
        delta,
        side: Side::Above { strict: false },
    }
    .sum()?;
    Ok(SigmaSum {
        value: exp(0.5 * (br.lo + br.hi)),
        range: (exp(br.lo), exp(br.hi)),
        bound: sigma_bound(delta, sigma, pf, a),
    })
}

/// Closed-form Σ for δ < 0: e^δ Li_{−p/2}(e^{−σ_j}) Π_{i≠j}(1 − e^{−σ_i})⁻¹.
pub fn sigma_closed_form(delta: f64, sigma: [f64; 3], p: SchattenOrder, j: usize) -> Result<f64, Error> {
    let a = axis(j)?;
    let pf = p.finite()?;
    let mut ln = delta + log(power_geometric(0.5 * pf, sigma[a]));
    for (i, &si) in sigma.iter().enumerate() {
        if i != a {
            ln -= log1mexp(si);
        }
    }
    Ok(exp(ln))
}

fn sigma_bound(delta: f64, sigma: [f64; 3], p: f64, a: usize) -> f64 {
    let s = 0.5 * p;
    if delta < 0.0 {
        // n^s e^{−σn} ≤ (p/(eσ))^s e^{−σn/2}, summed in closed form
        let others: f64 = (0..3).filter(|&i| i != a).map(|i| 1.0 / -libm::expm1(-sigma[i])).product();
        return pow(p / core::f64::consts::E, s) * exp(delta) * pow(sigma[a], -s) / libm::expm1(0.5 * sigma[a]) * others;
    }
    let k = (a + 1) % 3;
    let l = (a + 2) % 3;
    let geo = 1.0 / (-libm::expm1(-sigma[k]) * -libm::expm1(-sigma[l]));
    let first = (2.0 * pow(p, s) + pow(2.0 * delta, s)) / (pow(sigma[a], s) * -libm::expm1(-sigma[a]));
    // #{n_k ≥ 0 : σ_k n_k < r} ≤ r/σ_k + 1
    let om = -libm::expm1(-sigma[k]);
    let second = (1.0 + om * (1.0 + delta / sigma[k])) * pow(delta / sigma[a], s + 1.0);
    geo * (first + second)
}

/// 𝒞_p = p² 2^{5p/2}.
pub fn i_plus_constant(p: f64) -> f64 {
    p * p * pow(2.0, 2.5 * p)
}

/// Envelope for I₊ in the six (j, sign ν_j) cases; ν_j > 0 selects the
/// positive branch.
pub fn i_plus_envelope(spec: &MagneticSpectrum, j: usize, p: SchattenOrder) -> Result<EnvelopeValue, Error> {
    let a = axis(j)?;
    if spec.params.is_zero_temperature() {
        return Err(Error::InfiniteBeta);
    }
    let pf = p.finite()?;
    let beta = spec.params.beta;
    let hbar = spec.params.hbar;
    let b = spec.params.b.unwrap_or(0.0);
    let bb = spec.bracket_b();
    let eta = beta * hbar;
    let be = bracket(eta);
    let nu = spec.nu(j)?;
    let bn = bracket(nu);
    let ln_c = log(i_plus_constant(pf)) + pf * log(hbar);
    let half = (0.5 * pf - 3.0) * log(beta);
    let decay = -pf * nu.abs();
    let ln_rest = match (a, nu > 0.0) {
        (0, false) => log(be.min(bb) * (be * be + b * eta)) + decay + half,
        (0, true) => log(be.min(bb) * (be * be + bn * bn + bb * nu * eta)) + 0.5 * pf * log(bn) + half,
        (1, false) => log(be * (bb + eta)) + decay + (pf - 1.0) * log(bb) + (pf - 3.0) * log(beta),
        (1, true) => {
            log(be * bb.min(1.0 / eta) * (be * be + bn * bn + bb * eta)) + 0.5 * pf * log(bn) + (pf - 1.0) * log(bb) + half
        }
        (_, false) => log(be * be + bb * eta) + decay + half,
        (_, true) => log((1.0 / bb + 1.0 / be) * (bn * bn + bb * eta * (bn + eta))) + 0.5 * pf * log(bn) + half,
    };
    Ok(EnvelopeValue::from_ln(ln_c + ln_rest))
}

/// Envelope for ‖∂_x γ‖ + ⟨b⟩‖∂_ξ γ‖ in the Fock–Darwin equilibrium.
pub fn magnetic_envelope(params: &PhysicalParams, p: SchattenOrder) -> Result<EnvelopeValue, Error> {
    let spec = MagneticSpectrum::new(*params)?;
    if params.mu < spec.lambda0 {
        return Err(Error::OutsideHypothesis("mu below the ground energy (2<b>+1)hbar"));
    }
    let ip = p.recip();
    let ipc = 1.0 - ip;
    let bb = params.bracket_b();
    let mu = params.mu;
    let hbar = params.hbar;
    let tail = (0.5 + 2.0 * ip) * log(mu) - ipc * log(hbar);
    if params.is_zero_temperature() {
        return Ok(EnvelopeValue::from_ln(ip.max(ipc) * log(bb) + tail));
    }
    let beta = params.beta;
    let eta = beta * hbar;
    if eta * bb <= 1.0 {
        let ln = log(bb) + (0.5 + 2.0 * ip) * log(bracket(beta * mu)) + (0.5 - 3.0 * ip) * log(beta);
        return Ok(EnvelopeValue::from_ln(ln));
    }
    let m_p = if eta <= 1.0 {
        pow(bb, ip) + pow(eta, 1.0 - 2.0 * ip) * pow(bb, ipc)
    } else if eta <= bb {
        eta + pow(bb, ip) + pow(eta * bb, ipc)
    } else {
        pow(eta, ipc) * pow(bb, ip.max(ipc))
    };
    Ok(EnvelopeValue::from_ln(log(m_p) + tail))
}

/// Triangle-inequality bounds for position, momentum and kinematic momentum
/// commutators from S_{p,1}, S_{p,2}, S_{p,3}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XpBounds {
    pub s: [f64; 3],
    /// ‖[x_k, γ]‖ for k = 1, 2, 3.
    pub x: [f64; 3],
    /// ‖[p_k, γ]‖.
    pub p: [f64; 3],
    /// ‖[v_k, γ]‖ for the two transverse components.
    pub v: [f64; 2],
}

impl XpBounds {
    pub fn from_sums(spec: &MagneticSpectrum, s: [f64; 3]) -> XpBounds {
        let bb = spec.bracket_b();
        let om = spec.omega;
        let t = s[0] + s[1];
        let v = 0.5 * ((1.0 - om) * s[0] + (1.0 + om) * s[1]);
        XpBounds {
            s,
            x: [t / (2.0 * bb), t / (2.0 * bb), s[2]],
            p: [0.5 * t, 0.5 * t, s[2]],
            v: [v, v],
        }
    }

    /// (Σ_k ‖[p_k,γ]‖ + ⟨b⟩ Σ_k ‖[x_k,γ]‖)/ħ, bounding ‖∂_x γ‖ + ⟨b⟩‖∂_ξ γ‖.
    pub fn combined_gradient(&self, spec: &MagneticSpectrum) -> f64 {
        let bb = spec.bracket_b();
        (self.p.iter().sum::<f64>() + bb * self.x.iter().sum::<f64>()) / spec.params.hbar
    }
}

pub fn xp_commutator_upper_bounds(spec: &MagneticSpectrum, p: SchattenOrder) -> Result<XpBounds, Error> {
    let mut s = [0.0; 3];
    for (j, v) in s.iter_mut().enumerate() {
        *v = magnetic_commutator_sum(spec, j + 1, p)?.value;
    }
    Ok(XpBounds::from_sums(spec, s))
}

/// C = 15(2π)³.
pub const COM_INDIC_C: f64 = 15.0 * 8.0 * PI * PI * PI;

/// Explicit-constant upper bounds on the zero-temperature S_{p,1..3}.
pub fn com_indic_bounds(spec: &MagneticSpectrum, p: SchattenOrder) -> Result<[f64; 3], Error> {
    let pf = p.finite()?;
    let mu = spec.params.mu;
    if mu < spec.lambda0 {
        return Err(Error::OutsideHypothesis("mu below the ground energy (2<b>+1)hbar"));
    }
    let ip = 1.0 / pf;
    let ipc = 1.0 - ip;
    let h = spec.params.hbar;
    let bb = spec.bracket_b();
    let mt = spec.mu_tilde();
    let c = pow(COM_INDIC_C, ip);
    let common = pow(mu, ip) * pow(h, ip);
    Ok([
        2.0 * c * sqrt(mt + 2.0 * h / bb) * pow(mt + h, ip) * common * pow(bb, ipc),
        2.0 * c * pow(mu, 0.5 + ip) * pow(bb, ip) * common,
        c * pow(mt + h, 0.5 + ip) * common,
    ])
}

/// Accumulates ln(S^p) across j for callers that combine ladders.
pub fn ln_sum_of_powers(values: &[NormValue], p: f64) -> f64 {
    let mut acc = LogSum::new();
    for v in values {
        acc.add(p * v.ln_value);
    }
    acc.ln()
}
