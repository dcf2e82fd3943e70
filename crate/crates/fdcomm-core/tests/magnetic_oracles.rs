//! Brute-force enumeration of the Fock–Darwin spectrum against the lattice
//! sums, the slab sums and the counting functions.

use fdcomm_core::harmonic_spectral::{schatten_commutator_sum, HarmonicSpectrum};
use fdcomm_core::magnetic_spectral::*;
use fdcomm_core::{PhysicalParams, SchattenOrder};
use std::f64::consts::{PI, SQRT_2};

struct Plain {
    hbar: f64,
    beta: f64,
    mu: f64,
    lam: [f64; 3],
    alpha: [f64; 3],
    ground: f64,
}

impl Plain {
    fn new(hbar: f64, beta: f64, mu: f64, b: f64) -> Plain {
        let bb = (1.0 + b * b).sqrt();
        Plain {
            hbar,
            beta,
            mu,
            lam: [2.0 * hbar / (bb + b), 2.0 * (bb + b) * hbar, 2.0 * hbar],
            alpha: [4.0 * bb * hbar, 4.0 * bb * hbar, 2.0 * hbar],
            ground: (2.0 * bb + 1.0) * hbar,
        }
    }

    fn fermi(&self, e: f64) -> f64 {
        if self.beta.is_infinite() {
            return if e <= self.mu { 1.0 } else { 0.0 };
        }
        1.0 / (1.0 + (self.beta * (e - self.mu)).exp())
    }

    /// Visits every n with Λ_n ≤ cut.
    fn each(&self, cut: f64, mut f: impl FnMut([u64; 3], f64)) {
        let mut n1 = 0u64;
        while self.ground + self.lam[0] * n1 as f64 <= cut {
            let mut n2 = 0u64;
            while self.ground + self.lam[0] * n1 as f64 + self.lam[1] * n2 as f64 <= cut {
                let base = self.ground + self.lam[0] * n1 as f64 + self.lam[1] * n2 as f64;
                let mut n3 = 0u64;
                while base + self.lam[2] * n3 as f64 <= cut {
                    f([n1, n2, n3], base + self.lam[2] * n3 as f64);
                    n3 += 1;
                }
                n2 += 1;
            }
            n1 += 1;
        }
    }

    /// (h³ Σ_n |F(Λ_n − λ_j) − F(Λ_n)|^p (α_j n_j)^{p/2})^{1/p}.
    fn commutator(&self, j: usize, p: f64) -> f64 {
        let a = j - 1;
        let cut = self.mu + self.lam[a] + 80.0 / (p * self.beta);
        let mut sum = 0.0;
        self.each(cut, |n, e| {
            if n[a] == 0 {
                return;
            }
            let df = self.fermi(e - self.lam[a]) - self.fermi(e);
            sum += df.abs().powf(p) * (self.alpha[a] * n[a] as f64).powf(0.5 * p);
        });
        ((2.0 * PI * self.hbar).powi(3) * sum).powf(1.0 / p)
    }

    fn zero_temperature(&self, j: usize, p: f64) -> f64 {
        let a = j - 1;
        let mut sum = 0.0;
        let mut sup: f64 = 0.0;
        self.each(self.mu + self.lam[a], |n, e| {
            if n[a] >= 1 && e - self.lam[a] <= self.mu && self.mu < e {
                let w = (self.alpha[a] * n[a] as f64).sqrt();
                sum += w.powf(p);
                sup = sup.max(w);
            }
        });
        if p.is_infinite() {
            sup
        } else {
            ((2.0 * PI * self.hbar).powi(3) * sum).powf(1.0 / p)
        }
    }
}

fn spectrum(hbar: f64, beta: f64, mu: f64, b: f64) -> MagneticSpectrum {
    MagneticSpectrum::new(PhysicalParams::magnetic(hbar, beta, mu, b).unwrap()).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn finite_beta_matches_enumeration_on_small_lattices() {
    for (hbar, beta, mu, b) in [(0.2, 2.0, 3.0, 0.0), (0.2, 1.0, 1.5, 0.7), (0.4, 5.0, 3.0, SQRT_2), (0.3, 0.7, 4.0, 2.0)] {
        let spec = spectrum(hbar, beta, mu, b);
        let plain = Plain::new(hbar, beta, mu, b);
        for p in [1.0, 1.5, 2.0, 3.0] {
            for j in 1..=3 {
                let v = magnetic_commutator_sum(&spec, j, SchattenOrder::new(p).unwrap()).unwrap().value;
                let o = plain.commutator(j, p);
                assert!(rel(v, o) < 1e-10, "hbar={hbar} beta={beta} b={b} p={p} j={j}: {v} vs {o}");
            }
        }
    }
}

#[test]
fn euler_maclaurin_regime_matches_enumeration() {
    // steps βλ_j all below one half, and millions of lattice points in the Fermi shell
    for (p, j) in [(1.0, 1), (1.5, 2), (2.0, 3)] {
        let spec = spectrum(0.05, 2.0, 2.0, 1.0);
        let plain = Plain::new(0.05, 2.0, 2.0, 1.0);
        let v = magnetic_commutator_sum(&spec, j, SchattenOrder::new(p).unwrap()).unwrap().value;
        let o = plain.commutator(j, p);
        assert!(rel(v, o) < 1e-9, "p={p} j={j}: {v} vs {o}");
    }
}

#[test]
fn sup_norm_matches_enumeration() {
    for (hbar, beta, mu, b) in [(0.2, 2.0, 3.0, 0.0), (0.4, 5.0, 3.0, SQRT_2), (0.3, 1.0, 2.0, 4.0)] {
        let spec = spectrum(hbar, beta, mu, b);
        let plain = Plain::new(hbar, beta, mu, b);
        for j in 1..=3 {
            let a = j - 1;
            let mut best: f64 = 0.0;
            plain.each(mu + plain.lam[a] + 60.0 / beta, |n, e| {
                if n[a] > 0 {
                    let df = plain.fermi(e - plain.lam[a]) - plain.fermi(e);
                    best = best.max(df.abs() * (plain.alpha[a] * n[a] as f64).sqrt());
                }
            });
            let v = magnetic_commutator_sum(&spec, j, SchattenOrder::INFINITY).unwrap().value;
            assert!(rel(v, best) < 1e-12, "j={j}: {v} vs {best}");
        }
    }
}

#[test]
fn zero_temperature_matches_slab_enumeration() {
    for (hbar, mu, b) in [(0.1, 2.37, 0.0), (0.05, 1.913, 1.0), (0.2, 3.71, SQRT_2), (0.02, 0.813, 10.0)] {
        let spec = spectrum(hbar, f64::INFINITY, mu, b);
        let plain = Plain::new(hbar, f64::INFINITY, mu, b);
        for p in [1.0, 2.0, 4.0, f64::INFINITY] {
            for j in 1..=3 {
                let v = magnetic_commutator_sum(&spec, j, SchattenOrder::new(p).unwrap()).unwrap().value;
                let o = plain.zero_temperature(j, p);
                assert!(rel(v, o) < 1e-12, "hbar={hbar} b={b} p={p} j={j}: {v} vs {o}");
            }
        }
    }
}

#[test]
fn levels_and_counts_match_enumeration() {
    for (hbar, mu, b) in [(0.1, 1.73, 0.0), (0.05, 1.3, SQRT_2), (0.2, 2.9, 3.0)] {
        let spec = spectrum(hbar, f64::INFINITY, mu, b);
        let plain = Plain::new(hbar, f64::INFINITY, mu, b);
        let mut all = Vec::new();
        plain.each(mu, |n, e| all.push((e, n)));
        all.sort_by(|x, y| x.1.cmp(&y.1));
        let levels = magnetic_levels(&spec, mu).unwrap();
        assert!(levels.windows(2).all(|w| w[0].0 <= w[1].0 + 1e-12));
        let mut by_index = levels.clone();
        by_index.sort_by(|x, y| x.1.cmp(&y.1));
        assert_eq!(by_index.len(), all.len());
        for (l, o) in by_index.iter().zip(&all) {
            assert_eq!(l.1, o.1);
            assert!((l.0 - o.0).abs() < 1e-12);
        }
        assert_eq!(particle_count(&spec).unwrap().count, all.len() as u64);
    }
}

#[test]
fn zero_field_matches_isotropic_oscillator_for_any_order() {
    // at b = 0 every level λ_N = (2N+3)ħ and the ladder a_j (α = 4ħ on the
    // transverse axes, 2ħ along the field) lowers N by one; grouping the
    // shell by n_j gives S^p = h³ α_j^{p/2} Σ_N |ΔF(λ_N)|^p Σ_{k=1}^N (N−k+1) k^{p/2}
    let hbar = 0.1;
    for (beta, mu) in [(1.0, 1.0), (4.0, 2.3), (0.5, 0.2)] {
        let spec = spectrum(hbar, beta, mu, 0.0);
        let f = |e: f64| 1.0 / (1.0 + (beta * (e - mu)).exp());
        for p in [1.0, 2.5] {
            for j in 1..=3 {
                let alpha = if j == 3 { 2.0 * hbar } else { 4.0 * hbar };
                let mut sum = 0.0;
                let mut n = 1u64;
                loop {
                    let e = (2.0 * n as f64 + 3.0) * hbar;
                    let df = f(e - 2.0 * hbar) - f(e);
                    let inner: f64 = (1..=n).map(|k| (n - k + 1) as f64 * (k as f64).powf(0.5 * p)).sum();
                    sum += df.abs().powf(p) * inner;
                    if beta * (e - mu) > 80.0 / p + 20.0 {
                        break;
                    }
                    n += 1;
                }
                let o = ((2.0 * PI * hbar).powi(3) * alpha.powf(0.5 * p) * sum).powf(1.0 / p);
                let v = magnetic_commutator_sum(&spec, j, SchattenOrder::new(p).unwrap()).unwrap().value;
                assert!(rel(v, o) < 1e-10, "beta={beta} p={p} j={j}: {v} vs {o}");
            }
        }
    }
}

#[test]
fn zero_field_p2_combines_into_the_harmonic_norm() {
    // the d = 3 oscillator ladders have α = 2ħ on every axis; the transverse
    // magnetic ladders are their rotations scaled by √2
    for (beta, mu) in [(1.0, 1.0), (3.0, 2.0), (f64::INFINITY, 1.37)] {
        let hbar = 0.1;
        let spec = spectrum(hbar, beta, mu, 0.0);
        let s: Vec<f64> = (1..=3).map(|j| magnetic_commutator_sum(&spec, j, SchattenOrder::TWO).unwrap().value).collect();
        let harm = schatten_commutator_sum(&HarmonicSpectrum::new(PhysicalParams::new(hbar, beta, mu, 3).unwrap()).unwrap(), SchattenOrder::TWO).value;
        let lhs = (hbar * harm).powi(2);
        let rhs = 0.5 * (s[0] * s[0] + s[1] * s[1]) + s[2] * s[2];
        assert!(rel(lhs, rhs) < 1e-11, "beta={beta}: {lhs} vs {rhs}");
    }
}

#[test]
fn below_ground_is_exactly_zero() {
    for b in [0.0, 1.0, 10.0] {
        let spec = spectrum(0.1, f64::INFINITY, 0.5 * (2.0 * (1.0f64 + b * b).sqrt() + 1.0) * 0.1, b);
        for j in 1..=3 {
            for p in [1.0, 2.0, f64::INFINITY] {
                assert_eq!(magnetic_commutator_sum(&spec, j, SchattenOrder::new(p).unwrap()).unwrap().value, 0.0);
            }
        }
    }
}

/// Σ_{σ·n ≥ δ} e^{−σ·n+δ} n_j^{p/2} by enumeration.
fn sigma_plain(delta: f64, sigma: [f64; 3], p: f64, j: usize) -> f64 {
    let a = j - 1;
    let cut = delta.max(0.0) + 60.0 + 3.0 * p;
    let mut sum = 0.0;
    let lim = |s: f64| (cut / s).floor() as u64;
    for n1 in 0..=lim(sigma[0]) {
        for n2 in 0..=lim(sigma[1]) {
            for n3 in 0..=lim(sigma[2]) {
                let n = [n1, n2, n3];
                let e = sigma[0] * n1 as f64 + sigma[1] * n2 as f64 + sigma[2] * n3 as f64;
                if e >= delta && e <= cut {
                    sum += (delta - e).exp() * (n[a] as f64).powf(0.5 * p);
                }
            }
        }
    }
    sum
}

#[test]
fn sigma_sums_against_enumeration_and_explicit_bound() {
    for sigma in [[0.1, 1.0, 0.5], [2.0, 8.0, 1.0], [0.3137, 0.2871, 0.3329]] {
        for delta in [-5.0, 0.0, 3.0, 20.0] {
            for p in [1.0, 2.0, 3.0] {
                for j in 1..=3 {
                    let s = sigma_sum(delta, sigma, SchattenOrder::new(p).unwrap(), j).unwrap();
                    let o = sigma_plain(delta, sigma, p, j);
                    assert!(rel(s.value, o) < 1e-9, "σ={sigma:?} δ={delta} p={p} j={j}: {} vs {o}", s.value);
                    assert!(s.range.0 <= o * (1.0 + 1e-10) && o <= s.range.1 * (1.0 + 1e-10), "σ={sigma:?} δ={delta} p={p} j={j}: {:?} vs {o}", s.range);
                    assert!(o <= s.bound, "bound fails: σ={sigma:?} δ={delta} p={p} j={j}: {o} > {}", s.bound);
                    if delta < 0.0 {
                        let c = sigma_closed_form(delta, sigma, SchattenOrder::new(p).unwrap(), j).unwrap();
                        assert!(rel(c, o) < 1e-10);
                    }
                }
            }
        }
    }
}

#[test]
fn sigma_closed_form_uses_the_negative_half_order_polylog() {
    // δ = −1, σ = (1,1,1), p = 2: e⁻¹ Li_{−1}(e⁻¹)(1 − e⁻¹)⁻² = e⁻¹·e⁻¹/(1−e⁻¹)⁴
    let x = (-1.0f64).exp();
    let expect = x * x / (1.0 - x).powi(4);
    let v = sigma_closed_form(-1.0, [1.0; 3], SchattenOrder::TWO, 1).unwrap();
    assert!(rel(v, expect) < 1e-13);
}

#[test]
fn decomposition_dominates_the_sum() {
    for (hbar, beta, mu, b) in [(0.1, 1.0, 2.0, 1.0), (0.2, 10.0, 3.0, 0.0), (0.05, 0.3, 1.0, 10.0), (0.3, 2.0, 0.3, SQRT_2)] {
        let spec = spectrum(hbar, beta, mu, b);
        for p in [1.0, 2.0, 3.0] {
            let p = SchattenOrder::new(p).unwrap();
            for j in 1..=3 {
                let s = magnetic_commutator_sum(&spec, j, p).unwrap();
                let d = decomposition_bounds(&spec, j, p).unwrap();
                assert!(p.get() * s.ln_value <= d.ln_total_lower(), "hbar={hbar} beta={beta} b={b} j={j}");
            }
        }
    }
}

#[test]
fn zero_temperature_constants_hold() {
    for (hbar, mu, b) in [(0.1, 2.0, 1.0), (0.01, 1.0, 0.0), (0.05, 5.0, 10.0)] {
        let spec = spectrum(hbar, f64::INFINITY, mu, b);
        for p in [1.0, 2.0, 4.0] {
            let p = SchattenOrder::new(p).unwrap();
            let bounds = com_indic_bounds(&spec, p).unwrap();
            for j in 1..=3 {
                let v = magnetic_commutator_sum(&spec, j, p).unwrap().value;
                assert!(v <= bounds[j - 1]);
            }
        }
    }
}

#[test]
fn spacings_and_ladder_constants() {
    for (hbar, b) in [(0.1, 0.0), (0.3, 1.0), (0.01, 100.0)] {
        let spec = spectrum(hbar, 1.0, 1.0, b);
        let bb = (1.0f64 + b * b).sqrt();
        assert!(rel(spec.lambda[0] * spec.lambda[1], 4.0 * hbar * hbar) < 1e-14);
        assert!((spec.lambda[1] - spec.lambda[0] - 4.0 * b * hbar).abs() < 1e-12 * spec.lambda[1]);
        assert!(rel(spec.lambda[0] * spec.lambda[1] * spec.lambda[2], 8.0 * hbar.powi(3)) < 1e-14);
        assert_eq!(spec.alpha, [4.0 * bb * hbar, 4.0 * bb * hbar, 2.0 * hbar]);
        assert!(rel(spec.lambda0, (2.0 * bb + 1.0) * hbar) < 1e-15);
    }
}
