//! Classical phase-space norms against radial Simpson sums and Gaussian
//! moment reductions evaluated by 2-D quadrature.

use fdcomm_core::classical_norms::*;
use fdcomm_core::{PhysicalParams, SchattenOrder};
use std::f64::consts::PI;

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn order(p: f64) -> SchattenOrder {
    SchattenOrder::new(p).unwrap()
}

fn state(d: u32, beta: f64, mu: f64) -> ClassicalState {
    ClassicalState::new(PhysicalParams::new(0.3, beta, mu, d).unwrap()).unwrap()
}

/// ∫_{ℝ^{2d}} g(|z|²) dz = π^d/Γ(d) ∫₀^∞ s^{d−1} g(s) ds, integrated in s = u².
fn radial(d: u32, beta: f64, mu: f64, g: impl Fn(f64, f64) -> f64) -> f64 {
    let gd = [1.0, 1.0, 2.0][d as usize - 1];
    let top = (mu.max(0.0) + 90.0 / beta).sqrt();
    let f = |u: f64| {
        let s = u * u;
        // F(1 − F) written in |y| so it never overflows
        let e = (-(beta * (s - mu)).abs()).exp();
        2.0 * u * s.powi(d as i32 - 1) * g(s, e / ((1.0 + e) * (1.0 + e)))
    };
    PI.powi(d as i32) / gd * simpson(f, 0.0, top, 400_000)
}

#[test]
fn gradient_purity_and_mass_match_radial_simpson() {
    for d in [1u32, 2, 3] {
        for (beta, mu) in [(1.0, 0.0), (4.0, 1.5), (0.7, -1.0), (25.0, 2.0)] {
            let st = state(d, beta, mu);
            let mass = radial(d, beta, mu, |s, _| 1.0 / (1.0 + (beta * (s - mu)).exp()));
            assert!(rel(classical_mass(&st).unwrap().value, mass) < 1e-9, "mass d={d} beta={beta}");
            for p in [1.0, 2.0, 3.0] {
                let grad = radial(d, beta, mu, |s, pu| (2.0 * s.sqrt() * beta * pu).powf(p)).powf(1.0 / p);
                let got = classical_grad_norm(&st, order(p)).unwrap().value;
                assert!(rel(got, grad) < 1e-9, "grad d={d} beta={beta} mu={mu} p={p}: {got} vs {grad}");
                let pur = radial(d, beta, mu, |_, pu| pu.powf(p)).powf(1.0 / p);
                let got = classical_purity_defect(&st, order(p)).unwrap().value;
                assert!(rel(got, pur) < 1e-9, "purity d={d} beta={beta} mu={mu} p={p}");
            }
        }
    }
}

/// E|u_x|^p / E|u|^p for u uniform on S^{2d−1}: |u_x|² = sin²θ with density
/// ∝ (sin θ cos θ)^{d−1} on [0, π/2].
fn partial_ratio(d: u32, p: f64) -> f64 {
    let w = |t: f64| (t.sin() * t.cos()).powi(d as i32 - 1);
    let num = simpson(|t| t.sin().powf(p) * w(t), 0.0, 0.5 * PI, 20_000);
    let den = simpson(w, 0.0, 0.5 * PI, 20_000);
    (num / den).powf(1.0 / p)
}

#[test]
fn partial_gradient_constant_matches_sphere_average() {
    for d in [1u32, 2, 3, 4] {
        for p in [1.0, 2.0, 3.0, 5.5] {
            let got = partial_gradient_constant(d, order(p)).unwrap();
            assert!(rel(got, partial_ratio(d, p)) < 1e-10, "d={d} p={p}");
        }
        let c2 = partial_gradient_constant(d, SchattenOrder::TWO).unwrap();
        assert!(rel(c2, 0.5f64.sqrt()) < 1e-14);
    }
    assert!(partial_gradient_constant(2, SchattenOrder::INFINITY).is_err());
}

/// π³ E[Q^{p/2}] / E|g|^p with g standard Gaussian in ℝ⁶ and
/// Q = (1+b²)χ²₂ + χ²₁, by 2-D Simpson in (√χ²₂, √χ²₁).
fn sphere_integral_gaussian(b: f64, p: f64) -> f64 {
    let n = 1600;
    let top = 13.0;
    let inner = |v: f64| {
        let f = |w: f64| ((1.0 + b * b) * v * v + w * w).powf(0.5 * p) * (-0.5 * w * w).exp();
        simpson(f, 0.0, top, n) * (2.0 / (2.0 * PI).sqrt())
    };
    let eq = simpson(|v| inner(v) * v * (-0.5 * v * v).exp(), 0.0, top, n);
    // E|g|^p = 2^{p/2} Γ(3 + p/2) / Γ(3)
    let g = match p as i64 {
        1 => 1.875 * PI.sqrt(),
        2 => 6.0,
        4 => 24.0,
        _ => unreachable!(),
    };
    let eg = 2f64.powf(0.5 * p) * g / 2.0;
    PI.powi(3) * eq / eg
}

#[test]
fn magnetic_sphere_integral_matches_gaussian_reduction() {
    for b in [0.0, 0.5, 1.0, 5.0] {
        for p in [1.0, 2.0, 4.0] {
            let got = magnetic_sphere_integral(b, order(p)).unwrap();
            let want = sphere_integral_gaussian(b, p);
            assert!(rel(got, want) < 1e-8, "b={b} p={p}: {got} vs {want}");
        }
    }
}

#[test]
fn zero_field_magnetic_gradient_is_the_partial_gradient() {
    let params = PhysicalParams::new(0.3, 2.0, 1.0, 3).unwrap();
    for p in [1.0, 2.0, 4.0] {
        let st = ClassicalState::new(params.with_field(0.0).unwrap()).unwrap();
        let mag = magnetic_grad_x_norm(&st, order(p)).unwrap().value;
        let plain = partial_gradient_constant(3, order(p)).unwrap() * classical_grad_norm(&st, order(p)).unwrap().value;
        assert!(rel(mag, plain) < 1e-12, "p={p}");
    }
}

#[test]
fn magnetic_p2_ratio_is_exact() {
    for b in [0.0, 1.0, 5.0, 30.0] {
        let params = PhysicalParams::magnetic(0.3, 1.5, 0.4, b).unwrap();
        let st = ClassicalState::new(params).unwrap();
        let mag = magnetic_grad_x_norm(&st, SchattenOrder::TWO).unwrap().value;
        let g = classical_grad_norm(&st, SchattenOrder::TWO).unwrap().value;
        let want = (3.0 + 2.0 * b * b) / 6.0;
        assert!(rel(mag * mag / (g * g), want) < 1e-12, "b={b}");
    }
}

#[test]
fn zero_temperature_is_rejected() {
    let params = PhysicalParams::new(0.3, f64::INFINITY, 1.0, 2).unwrap();
    assert!(ClassicalState::new(params).is_err());
}
