//! Grid sweeps over the three models with CSV/JSON reports.

use crate::matrix_oracle::{trusted_harmonic, trusted_magnetic, Observable, OracleError};
use crate::monte_carlo::{mc_classical_grad_pth_power, point_seed};
use fdcomm_core::classical_norms::{
    classical_grad_envelope, classical_grad_norm, classical_purity_defect, classical_purity_envelope,
    magnetic_grad_x_norm, ClassicalState,
};
use fdcomm_core::harmonic_spectral::{purity_defect_quantum, quantum_envelope, schatten_commutator_sum, HarmonicSpectrum};
use fdcomm_core::magnetic_spectral::{
    com_indic_bounds, decomposition_bounds, magnetic_commutator_sum, magnetic_envelope, MagneticSpectrum, XpBounds,
};
use fdcomm_core::{classify_regime, sphere_measure, PhysicalParams, SchattenOrder};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

/// Standard errors allowed between a Monte-Carlo estimate and the quadrature value.
pub const MC_SIGMAS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Harmonic,
    Magnetic,
    Classical,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Harmonic => "harmonic",
            ModelKind::Magnetic => "magnetic",
            ModelKind::Classical => "classical",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantity {
    #[serde(rename = "S_p")]
    Sp,
    #[serde(rename = "K_p")]
    Kp,
    #[serde(rename = "envelopes")]
    Envelopes,
    #[serde(rename = "ratios")]
    Ratios,
    #[serde(rename = "I_decomposition")]
    IDecomposition,
    #[serde(rename = "oracle_check")]
    OracleCheck,
}

impl std::str::FromStr for Quantity {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        serde_json::from_value(serde_json::Value::String(s.trim().to_string())).map_err(|_| format!("unknown quantity {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// f64 that reads and writes ±∞ and NaN as the strings "inf", "-inf", "nan".
pub mod num {
    use super::*;

    pub fn to_text(x: f64) -> String {
        if x.is_nan() {
            "nan".into()
        } else if x == f64::INFINITY {
            "inf".into()
        } else if x == f64::NEG_INFINITY {
            "-inf".into()
        } else {
            format!("{x:.16e}")
        }
    }

    pub fn parse(s: &str) -> Result<f64, String> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
            "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
            "nan" => Ok(f64::NAN),
            _ => t.parse::<f64>().map_err(|e| format!("{t:?}: {e}")),
        }
    }

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_str(&to_text(*x))
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) => parse(&t).map_err(serde::de::Error::custom),
        }
    }

    pub mod opt {
        use super::*;

        pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
            match x {
                Some(v) => super::serialize(v, s),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
            match Option::<Repr>::deserialize(d)? {
                None => Ok(None),
                Some(Repr::Num(x)) => Ok(Some(x)),
                Some(Repr::Text(t)) => parse(&t).map(Some).map_err(serde::de::Error::custom),
            }
        }
    }

    pub mod list {
        use super::*;

        #[derive(Serialize, Deserialize)]
        struct Wrap(#[serde(with = "super")] f64);

        pub fn serialize<S: Serializer>(x: &[f64], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(x.iter().map(|&v| Wrap(v)))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
            Ok(Vec::<Wrap>::deserialize(d)?.into_iter().map(|w| w.0).collect())
        }
    }
}

fn default_tol() -> f64 {
    1e-8
}

fn default_mc_samples() -> usize {
    20_000
}

/// A sweep: the Cartesian product of the grids, evaluated for each quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub model: ModelKind,
    #[serde(with = "num::list")]
    pub hbar: Vec<f64>,
    #[serde(with = "num::list")]
    pub beta: Vec<f64>,
    #[serde(with = "num::list")]
    pub mu: Vec<f64>,
    #[serde(with = "num::list", default)]
    pub b: Vec<f64>,
    #[serde(with = "num::list")]
    pub p: Vec<f64>,
    #[serde(default)]
    pub d: Vec<u32>,
    pub quantities: Vec<Quantity>,
    /// Relative tolerance for oracle and exact-identity checks.
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
    /// Worker threads; the rayon default when absent.
    #[serde(default)]
    pub workers: Option<usize>,
    /// Evaluate harmonic envelopes for ħ > 1.
    #[serde(default)]
    pub allow_large_hbar: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("empty grid: {0}")]
    EmptyGrid(&'static str),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("cannot parse config: {0}")]
    Parse(String),
}

impl SweepConfig {
    /// Checks grids and fills model-implied defaults (d = 3 for the magnetic model).
    pub fn validate(mut self) -> Result<SweepConfig, ConfigError> {
        for (name, empty) in [
            ("hbar", self.hbar.is_empty()),
            ("beta", self.beta.is_empty()),
            ("mu", self.mu.is_empty()),
            ("p", self.p.is_empty()),
            ("quantities", self.quantities.is_empty()),
        ] {
            if empty {
                return Err(ConfigError::EmptyGrid(name));
            }
        }
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        match self.model {
            ModelKind::Magnetic => {
                if self.b.is_empty() {
                    return Err(ConfigError::EmptyGrid("b"));
                }
                if self.d.is_empty() {
                    self.d = vec![3];
                }
                if self.d != [3] {
                    return bad("the magnetic model forces d = 3");
                }
            }
            ModelKind::Harmonic => {
                if !self.b.is_empty() {
                    return bad("the harmonic model takes no field; use the magnetic model");
                }
            }
            ModelKind::Classical => {
                if !self.b.is_empty() && self.d.is_empty() {
                    self.d = vec![3];
                }
                if !self.b.is_empty() && self.d != [3] {
                    return bad("a classical field requires d = 3");
                }
                if self.beta.iter().any(|b| b.is_infinite()) {
                    return bad("the classical model needs finite beta");
                }
                if self.p.iter().any(|p| p.is_infinite()) {
                    return bad("the classical model needs finite p");
                }
            }
        }
        if self.d.is_empty() {
            return Err(ConfigError::EmptyGrid("d"));
        }
        for &q in &self.quantities {
            let ok = match (self.model, q) {
                (_, Quantity::Envelopes | Quantity::Ratios | Quantity::Sp | Quantity::OracleCheck) => true,
                (ModelKind::Magnetic, Quantity::Kp) => false,
                (_, Quantity::Kp) => true,
                (ModelKind::Magnetic, Quantity::IDecomposition) => true,
                (_, Quantity::IDecomposition) => false,
            };
            if !ok {
                return Err(ConfigError::Invalid(format!("quantity {q:?} is not available for the {} model", self.model.as_str())));
            }
        }
        if !(self.tol > 0.0) {
            return bad("tol must be positive");
        }
        if self.mc_samples < 2 {
            return bad("mc_samples must be at least 2");
        }
        if self.workers == Some(0) {
            return bad("workers must be positive");
        }
        for &h in &self.hbar {
            if !(h > 0.0 && h.is_finite()) {
                return bad("hbar must be positive and finite");
            }
        }
        for &b in &self.beta {
            if !(b > 0.0) {
                return bad("beta must be positive");
            }
        }
        for &m in &self.mu {
            if !m.is_finite() {
                return bad("mu must be finite");
            }
        }
        for &p in &self.p {
            if SchattenOrder::new(p).is_err() {
                return bad("p must be at least 1");
            }
        }
        for &b in &self.b {
            if !(b >= 0.0 && b.is_finite()) {
                return bad("b must be non-negative and finite");
            }
        }
        if self.d.contains(&0) {
            return bad("d must be positive");
        }
        Ok(self)
    }

    /// Parses JSON (leading `{`) or flat `key = value` lines with
    /// comma-separated lists; `#` starts a comment.
    pub fn parse(text: &str) -> Result<SweepConfig, ConfigError> {
        if text.trim_start().starts_with('{') {
            return serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()));
        }
        let mut map = serde_json::Map::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::Parse(format!("line {}: expected key = value", lineno + 1)))?;
            let key = k.trim().to_string();
            let items: Vec<&str> = v.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
            let scalar = |s: &str| -> serde_json::Value {
                if let Ok(n) = s.parse::<i64>() {
                    return serde_json::json!(n);
                }
                match s.parse::<f64>() {
                    Ok(x) if x.is_finite() => serde_json::json!(x),
                    _ => serde_json::Value::String(s.to_string()),
                }
            };
            let value = match key.as_str() {
                "hbar" | "beta" | "mu" | "b" | "p" | "d" | "quantities" => {
                    serde_json::Value::Array(items.iter().map(|s| scalar(s)).collect())
                }
                "seed" | "mc_samples" | "workers" => {
                    let n: u64 = v.trim().parse().map_err(|e| ConfigError::Parse(format!("{key}: {e}")))?;
                    serde_json::json!(n)
                }
                "allow_large_hbar" => {
                    let b: bool = v.trim().parse().map_err(|e| ConfigError::Parse(format!("{key}: {e}")))?;
                    serde_json::json!(b)
                }
                _ => scalar(v.trim()),
            };
            map.insert(key, value);
        }
        serde_json::from_value(serde_json::Value::Object(map)).map_err(|e| ConfigError::Parse(e.to_string()))
    }
}

/// One reported quantity at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub model: String,
    pub d: u32,
    #[serde(with = "num")]
    pub hbar: f64,
    #[serde(with = "num")]
    pub beta: f64,
    #[serde(with = "num")]
    pub mu: f64,
    #[serde(with = "num::opt")]
    pub b: Option<f64>,
    #[serde(with = "num")]
    pub p: f64,
    pub regime: String,
    pub quantity: String,
    #[serde(with = "num")]
    pub value: f64,
    #[serde(with = "num")]
    pub tail_bound: f64,
    #[serde(with = "num::opt")]
    pub envelope: Option<f64>,
    #[serde(with = "num::opt")]
    pub ratio: Option<f64>,
    pub pass: bool,
}

pub const CSV_HEADER: [&str; 14] = [
    "model", "d", "hbar", "beta", "mu", "b", "p", "regime", "quantity", "value", "tail_bound", "envelope", "ratio", "pass",
];

/// A grid point with its position in the Cartesian product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub index: usize,
    pub hbar: f64,
    pub beta: f64,
    pub mu: f64,
    pub b: Option<f64>,
    pub p: f64,
    pub d: u32,
}

pub fn grid(config: &SweepConfig) -> Vec<GridPoint> {
    let bs: Vec<Option<f64>> = if config.b.is_empty() { vec![None] } else { config.b.iter().map(|&b| Some(b)).collect() };
    let mut out = Vec::new();
    for &hbar in &config.hbar {
        for &beta in &config.beta {
            for &mu in &config.mu {
                for &b in &bs {
                    for &p in &config.p {
                        for &d in &config.d {
                            out.push(GridPoint {
                                index: out.len(),
                                hbar,
                                beta,
                                mu,
                                b,
                                p,
                                d,
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

/// A row whose computation failed, with the reason.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub row: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub failures: Vec<Failure>,
}

impl SweepReport {
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() && self.rows.iter().all(|r| r.pass) {
            0
        } else {
            1
        }
    }
}

struct PointRows<'a> {
    point: &'a GridPoint,
    model: ModelKind,
    regime: String,
    rows: Vec<(SweepRow, Option<String>)>,
}

impl PointRows<'_> {
    fn push(&mut self, quantity: impl Into<String>, value: f64, tail_bound: f64, envelope: Option<f64>, pass: bool) {
        let ratio = envelope.filter(|&e| e > 0.0).map(|e| value / e);
        let pt = self.point;
        self.rows.push((
            SweepRow {
                model: self.model.as_str().into(),
                d: pt.d,
                hbar: pt.hbar,
                beta: pt.beta,
                mu: pt.mu,
                b: pt.b,
                p: pt.p,
                regime: self.regime.clone(),
                quantity: quantity.into(),
                value,
                tail_bound,
                envelope,
                ratio,
                pass,
            },
            None,
        ));
    }

    fn fail(&mut self, quantity: impl Into<String>, message: String) {
        self.push(quantity, f64::NAN, f64::NAN, None, false);
        self.rows.last_mut().unwrap().1 = Some(message);
    }
}

fn params_of(pt: &GridPoint) -> Result<PhysicalParams, fdcomm_core::Error> {
    let p = PhysicalParams::new(pt.hbar, pt.beta, pt.mu, pt.d)?;
    match pt.b {
        Some(b) => p.with_field(b),
        None => Ok(p),
    }
}

fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn eval_point(config: &SweepConfig, pt: &GridPoint) -> Vec<(SweepRow, Option<String>)> {
    let regime = match (config.model, params_of(pt)) {
        (ModelKind::Classical, _) => "classical".to_string(),
        (_, Ok(params)) => classify_regime(&params).to_string(),
        (_, Err(_)) => "invalid".to_string(),
    };
    let mut out = PointRows {
        point: pt,
        model: config.model,
        regime,
        rows: Vec::new(),
    };
    let params = match params_of(pt) {
        Ok(p) => p,
        Err(e) => {
            out.fail("params", e.to_string());
            return out.rows;
        }
    };
    let p = SchattenOrder::new(pt.p).expect("validated");
    for &q in &config.quantities {
        match config.model {
            ModelKind::Harmonic => harmonic_rows(config, &params, p, q, &mut out),
            ModelKind::Magnetic => magnetic_rows(config, &params, p, q, &mut out),
            ModelKind::Classical => classical_rows(config, pt, &params, p, q, &mut out),
        }
    }
    out.rows
}

fn harmonic_rows(config: &SweepConfig, params: &PhysicalParams, p: SchattenOrder, q: Quantity, out: &mut PointRows) {
    let spec = match HarmonicSpectrum::new(*params) {
        Ok(s) => s,
        Err(e) => return out.fail("S_p", e.to_string()),
    };
    match q {
        Quantity::Sp => {
            let v = schatten_commutator_sum(&spec, p);
            let env = quantum_envelope(params, p, config.allow_large_hbar).ok().map(|e| e.value);
            out.push("S_p", v.value, v.tail_bound, env, true);
        }
        Quantity::Kp => {
            let v = purity_defect_quantum(&spec, p);
            let pass = params.beta.is_finite() || v.value == 0.0;
            out.push("K_p", v.value, v.tail_bound, None, pass);
        }
        Quantity::OracleCheck => {
            let formula = schatten_commutator_sum(&spec, p).value;
            let oracle = trusted_harmonic(params, 8).and_then(|(st, eq)| st.vector_ladder_norm(&eq, p));
            match oracle {
                Ok(o) => {
                    let o = o.value / params.hbar;
                    let r = rel_diff(o, formula);
                    out.push("oracle_rel_diff", r, 0.0, None, r <= config.tol);
                }
                Err(e) => out.fail("oracle_rel_diff", e.to_string()),
            }
        }
        Quantity::Envelopes | Quantity::Ratios | Quantity::IDecomposition => {}
    }
}

fn magnetic_rows(config: &SweepConfig, params: &PhysicalParams, p: SchattenOrder, q: Quantity, out: &mut PointRows) {
    let spec = match MagneticSpectrum::new(*params) {
        Ok(s) => s,
        Err(e) => return out.fail("S_p", e.to_string()),
    };
    let zero_temp = params.is_zero_temperature();
    let below_ground = params.mu < spec.lambda0;
    match q {
        Quantity::Sp => {
            let mut s = [0.0; 3];
            for j in 1..=3 {
                match magnetic_commutator_sum(&spec, j, p) {
                    Ok(v) => {
                        s[j - 1] = v.value;
                        let pass = !(zero_temp && below_ground) || v.value == 0.0;
                        out.push(format!("S_p{j}"), v.value, v.tail_bound, None, pass);
                    }
                    Err(e) => return out.fail(format!("S_p{j}"), e.to_string()),
                }
            }
            let grad = XpBounds::from_sums(&spec, s).combined_gradient(&spec);
            let env = magnetic_envelope(params, p).ok().map(|e| e.value);
            out.push("grad_bound", grad, 0.0, env, true);
            if zero_temp && p.is_finite() && !below_ground {
                match com_indic_bounds(&spec, p) {
                    Ok(bounds) => {
                        for j in 0..3 {
                            out.push(format!("com_indic{}", j + 1), s[j], 0.0, Some(bounds[j]), s[j] <= bounds[j]);
                        }
                    }
                    Err(e) => out.fail("com_indic", e.to_string()),
                }
            }
        }
        Quantity::IDecomposition => {
            if zero_temp || !p.is_finite() {
                return;
            }
            let pf = p.get();
            for j in 1..=3 {
                let quantity = format!("decomposition{j}");
                let sum = match magnetic_commutator_sum(&spec, j, p) {
                    Ok(v) => v,
                    Err(e) => return out.fail(quantity, e.to_string()),
                };
                match decomposition_bounds(&spec, j, p) {
                    Ok(dec) => {
                        let ln_sp = pf * sum.ln_value;
                        let lower = dec.ln_total_lower();
                        let ratio_ln = ln_sp - lower;
                        out.push(quantity, ln_sp.exp(), sum.tail_bound, Some(lower.exp()), ratio_ln <= 0.0);
                        if let Some(r) = out.rows.last_mut() {
                            r.0.ratio = Some(ratio_ln.exp());
                        }
                    }
                    Err(e) => out.fail(quantity, e.to_string()),
                }
            }
        }
        Quantity::OracleCheck => {
            let oracle = trusted_magnetic(params, [8, 8, 8]);
            let (st, eq) = match oracle {
                Ok(x) => x,
                Err(e) => return out.fail("oracle_rel_diff", e.to_string()),
            };
            for j in 1..=3 {
                let quantity = format!("oracle_rel_diff{j}");
                let formula = match magnetic_commutator_sum(&spec, j, p) {
                    Ok(v) => v.value,
                    Err(e) => return out.fail(quantity, e.to_string()),
                };
                match st.oracle_commutator_norm(&eq, Observable::A(j), p) {
                    Ok(o) => {
                        let r = rel_diff(o.value, formula);
                        out.push(quantity, r, 0.0, None, r <= config.tol);
                    }
                    Err(e) => out.fail(quantity, OracleError::to_string(&e)),
                }
            }
        }
        Quantity::Kp | Quantity::Envelopes | Quantity::Ratios => {}
    }
}

fn classical_rows(config: &SweepConfig, pt: &GridPoint, params: &PhysicalParams, p: SchattenOrder, q: Quantity, out: &mut PointRows) {
    let state = match ClassicalState::new(*params) {
        Ok(s) => s,
        Err(e) => return out.fail("grad_norm", e.to_string()),
    };
    let pf = p.get();
    match q {
        Quantity::Sp => {
            match classical_grad_norm(&state, p) {
                Ok(v) => out.push("grad_norm", v.value, v.tail_bound, Some(classical_grad_envelope(params, p).value), true),
                Err(e) => out.fail("grad_norm", e.to_string()),
            }
            if params.b.is_some() {
                match magnetic_grad_x_norm(&state, p) {
                    Ok(v) => out.push("grad_x_norm", v.value, v.tail_bound, None, true),
                    Err(e) => out.fail("grad_x_norm", e.to_string()),
                }
            }
        }
        Quantity::Kp => match classical_purity_defect(&state, p) {
            Ok(v) => out.push("purity", v.value, v.tail_bound, Some(classical_purity_envelope(params, p).value), true),
            Err(e) => out.fail("purity", e.to_string()),
        },
        Quantity::OracleCheck => match params.b {
            Some(b) => {
                let ratio = classical_grad_norm(&state, p).and_then(|g| {
                    let gx = magnetic_grad_x_norm(&state, p)?;
                    Ok((pf * (gx.ln_value - g.ln_value)).exp())
                });
                let ratio = match ratio {
                    Ok(r) => r,
                    Err(e) => return out.fail("magnetic_ratio", e.to_string()),
                };
                if pf == 2.0 {
                    let exact = (3.0 + 2.0 * b * b) / 6.0;
                    out.push("magnetic_ratio", ratio, 0.0, Some(exact), rel_diff(ratio, exact) <= config.tol);
                } else {
                    let seed = point_seed(config.seed, pt.index);
                    match crate::monte_carlo::mc_sphere_integral(b, p, config.mc_samples, seed) {
                        Ok(est) => {
                            let omega = sphere_measure(6.0);
                            let pass = est.agrees(ratio * omega, MC_SIGMAS);
                            out.push("magnetic_ratio", ratio, est.std_err / omega, Some(est.mean / omega), pass);
                        }
                        Err(e) => out.fail("magnetic_ratio", e.to_string()),
                    }
                }
            }
            None => {
                let exact = match classical_grad_norm(&state, p) {
                    Ok(v) => (pf * v.ln_value).exp(),
                    Err(e) => return out.fail("mc_grad_zscore", e.to_string()),
                };
                let seed = point_seed(config.seed, pt.index);
                match mc_classical_grad_pth_power(&state, p, config.mc_samples, seed) {
                    Ok(est) => {
                        let z = (est.mean - exact).abs() / est.std_err;
                        out.push("mc_grad_zscore", z, 0.0, None, z <= MC_SIGMAS);
                    }
                    Err(e) => out.fail("mc_grad_zscore", e.to_string()),
                }
            }
        },
        Quantity::Envelopes | Quantity::Ratios | Quantity::IDecomposition => {}
    }
}

/// Evaluates every grid point; rows come back in grid order.
pub fn run(config: &SweepConfig) -> Result<SweepReport, ConfigError> {
    let config = config.clone().validate()?;
    let points = grid(&config);
    let work = || -> Vec<Vec<(SweepRow, Option<String>)>> { points.par_iter().map(|pt| eval_point(&config, pt)).collect() };
    let per_point = match config.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?
            .install(work),
        None => work(),
    };
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (row, err) in per_point.into_iter().flatten() {
        if let Some(message) = err {
            failures.push(Failure { row: rows.len(), message });
        }
        rows.push(row);
    }
    Ok(SweepReport { rows, failures })
}

fn csv_field(x: Option<f64>) -> String {
    x.map(num::to_text).unwrap_or_default()
}

/// Writes rows as CSV (fixed header) or as a JSON array.
pub fn emit<W: Write>(rows: &[SweepRow], format: Format, out: W) -> std::io::Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(CSV_HEADER)?;
            for r in rows {
                w.write_record([
                    r.model.clone(),
                    r.d.to_string(),
                    num::to_text(r.hbar),
                    num::to_text(r.beta),
                    num::to_text(r.mu),
                    csv_field(r.b),
                    num::to_text(r.p),
                    r.regime.clone(),
                    r.quantity.clone(),
                    num::to_text(r.value),
                    num::to_text(r.tail_bound),
                    csv_field(r.envelope),
                    csv_field(r.ratio),
                    r.pass.to_string(),
                ])?;
            }
            w.flush()
        }
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out)
        }
    }
}

/// Reads rows back from CSV text.
pub fn parse_csv(text: &str) -> Result<Vec<SweepRow>, String> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers().map_err(|e| e.to_string())?.iter().map(String::from).collect();
    if header != CSV_HEADER {
        return Err(format!("unexpected header {header:?}"));
    }
    let opt = |s: &str| -> Result<Option<f64>, String> { if s.is_empty() { Ok(None) } else { num::parse(s).map(Some) } };
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        let f = |i: usize| rec.get(i).unwrap_or("");
        rows.push(SweepRow {
            model: f(0).into(),
            d: f(1).parse().map_err(|e| format!("d: {e}"))?,
            hbar: num::parse(f(2))?,
            beta: num::parse(f(3))?,
            mu: num::parse(f(4))?,
            b: opt(f(5))?,
            p: num::parse(f(6))?,
            regime: f(7).into(),
            quantity: f(8).into(),
            value: num::parse(f(9))?,
            tail_bound: num::parse(f(10))?,
            envelope: opt(f(11))?,
            ratio: opt(f(12))?,
            pass: f(13).parse().map_err(|e| format!("pass: {e}"))?,
        });
    }
    Ok(rows)
}

/// Min/max ratio per (regime, quantity) and the failing rows.
pub fn summary(report: &SweepReport) -> String {
    let mut ranges: BTreeMap<(String, String), (f64, f64, usize)> = BTreeMap::new();
    for r in &report.rows {
        if let Some(x) = r.ratio.filter(|x| x.is_finite()) {
            let e = ranges.entry((r.regime.clone(), r.quantity.clone())).or_insert((f64::INFINITY, 0.0, 0));
            e.0 = e.0.min(x);
            e.1 = e.1.max(x);
            e.2 += 1;
        }
    }
    let mut s = String::new();
    let _ = writeln!(s, "# summary: {} rows", report.rows.len());
    for ((regime, quantity), (lo, hi, n)) in &ranges {
        let _ = writeln!(s, "# ratio {regime} {quantity}: min {} max {} over {n} rows", num::to_text(*lo), num::to_text(*hi));
    }
    for (i, r) in report.rows.iter().enumerate() {
        if !r.pass {
            let why = report.failures.iter().find(|f| f.row == i).map(|f| f.message.as_str()).unwrap_or("inequality violated");
            let _ = writeln!(
                s,
                "# FAIL row {i}: {} {} d={} hbar={} beta={} mu={} b={} p={}: {why}",
                r.model,
                r.quantity,
                r.d,
                num::to_text(r.hbar),
                num::to_text(r.beta),
                num::to_text(r.mu),
                csv_field(r.b),
                num::to_text(r.p)
            );
        }
    }
    let _ = writeln!(s, "# exit {}", report.exit_code());
    s
}
