//! Dense truncated-Fock-basis ground truth.
//!
//! Operators are built per tensor factor (one factor per axis for the
//! isotropic oscillator; the transverse plane and the field axis for the
//! Fock–Darwin Hamiltonian), each factor Hamiltonian is diagonalized
//! numerically, and commutators with γ = F(H) are formed in the joint
//! eigenbasis. A commutator with an operator living on one factor is block
//! diagonal over the eigen-indices of the other factors, so singular values
//! come from one SVD per block.

use fdcomm_core::fermi_dirac::OccupationFn;
use fdcomm_core::{NormValue, PhysicalParams, SchattenOrder};
use nalgebra::{Complex, DMatrix, SymmetricEigen};
use std::f64::consts::PI;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Boundary occupation above which an instance is rejected.
pub const TRUST_OCCUPATION: f64 = 1e-14;
/// Tolerance for ladder and Hamiltonian certification on the interior block.
pub const CERT_TOL: f64 = 1e-10;

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("invalid oracle size: {0}")]
    InvalidSize(&'static str),
    #[error("construction check failed: {what} (defect {defect:e})")]
    Construction { what: &'static str, defect: f64 },
    #[error("truncation not trusted: boundary occupation {occupation:e} on axis {axis}")]
    Trust { axis: usize, occupation: f64 },
    #[error(transparent)]
    Core(#[from] fdcomm_core::Error),
}

/// Operators whose commutator with γ the oracle can measure (axes 1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    A(usize),
    X(usize),
    P(usize),
    /// Kinematic momentum p + A, transverse components only.
    V(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Harmonic { d: usize },
    Magnetic,
}

/// One tensor factor: its basis, operators and diagonalized Hamiltonian.
#[derive(Debug, Clone)]
struct Factor {
    /// Global axes (0-based) carried by this factor, with their level counts.
    axes: Vec<(usize, usize)>,
    ops: Vec<(Observable, CMatrix)>,
    h: CMatrix,
    evals: Vec<f64>,
    evecs: CMatrix,
    /// Basis indices whose level on some axis is the top one.
    boundary: Vec<(usize, usize)>,
}

impl Factor {
    fn dim(&self) -> usize {
        self.h.nrows()
    }

    fn op(&self, o: Observable) -> Option<&CMatrix> {
        self.ops.iter().find(|(k, _)| *k == o).map(|(_, m)| m)
    }

    fn diagonalize(&mut self) {
        let eig = SymmetricEigen::new(self.h.clone());
        let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
        self.evals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
        self.evecs = CMatrix::from_fn(self.dim(), idx.len(), |r, c| eig.eigenvectors[(r, idx[c])]);
    }

    /// U* O U.
    fn in_eigenbasis(&self, m: &CMatrix) -> CMatrix {
        self.evecs.adjoint() * m * &self.evecs
    }
}

/// Truncated Fock-space realization of one of the two models.
#[derive(Debug, Clone)]
pub struct OracleState {
    pub params: PhysicalParams,
    pub model: Model,
    pub per_axis_levels: Vec<usize>,
    factors: Vec<Factor>,
    /// Lowest energy of a state carrying a top ladder level.
    pub trust_cutoff: f64,
}

/// Lowering operator with a|n⟩ = √(α n)|n−1⟩ on n levels.
pub fn ladder(alpha: f64, n: usize) -> CMatrix {
    let mut a = CMatrix::zeros(n, n);
    for k in 1..n {
        a[(k - 1, k)] = C64::new((alpha * k as f64).sqrt(), 0.0);
    }
    a
}

fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

fn scale(m: &CMatrix, s: C64) -> CMatrix {
    m * s
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Largest entry of |A − B| over rows and columns in `keep`.
fn defect_on(a: &CMatrix, b: &CMatrix, keep: &[usize]) -> f64 {
    let mut worst: f64 = 0.0;
    for &i in keep {
        for &j in keep {
            worst = worst.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    worst
}

fn interior(levels: &[usize]) -> Vec<usize> {
    // basis index = n₀ + N₀(n₁ + N₁ n₂ …), row-major with the first axis fastest
    let dim: usize = levels.iter().product();
    (0..dim)
        .filter(|&idx| {
            let mut r = idx;
            levels.iter().all(|&n| {
                let k = r % n;
                r /= n;
                k + 1 < n
            })
        })
        .collect()
}

fn boundary(levels: &[usize], axes: &[usize]) -> Vec<(usize, usize)> {
    let dim: usize = levels.iter().product();
    let mut out = Vec::new();
    for idx in 0..dim {
        let mut r = idx;
        for (pos, &n) in levels.iter().enumerate() {
            if r % n == n - 1 {
                out.push((idx, axes[pos]));
            }
            r /= n;
        }
    }
    out
}

/// Embeds an operator on axis `pos` of a factor with the given level counts.
fn embed(op: &CMatrix, levels: &[usize], pos: usize) -> CMatrix {
    // kronecker(A, B) puts B's index fastest; axis 0 is fastest here
    let mut m = identity(1);
    for (k, &n) in levels.iter().enumerate().rev() {
        let f = if k == pos { op.clone() } else { identity(n) };
        m = kron(&m, &f);
    }
    m
}

fn check(what: &'static str, defect: f64, tol: f64) -> Result<(), OracleError> {
    if defect <= tol {
        Ok(())
    } else {
        Err(OracleError::Construction { what, defect })
    }
}

/// Isotropic oscillator on `levels` per axis with a = x + ip̂, [a, a*] = 2ħ.
pub fn build_harmonic(params: &PhysicalParams, levels: usize) -> Result<OracleState, OracleError> {
    if params.b.is_some() {
        return Err(OracleError::InvalidSize("harmonic oracle takes no field"));
    }
    if levels < 4 {
        return Err(OracleError::InvalidSize("need at least 4 levels per axis"));
    }
    let d = params.dim as usize;
    let hbar = params.hbar;
    let alpha = 2.0 * hbar;
    let mut factors = Vec::new();
    for axis in 0..d {
        let a = ladder(alpha, levels);
        let ad = a.adjoint();
        let x = scale(&(&a + &ad), re(0.5));
        let p = scale(&(&a - &ad), C64::new(0.0, -0.5));
        let keep = interior(&[levels]);
        let comm = &a * &ad - &ad * &a;
        check("[a, a*] = 2hbar", defect_on(&comm, &scale(&identity(levels), re(alpha)), &keep), 1e-12 * alpha)?;
        let h_ladder = &ad * &a + scale(&identity(levels), re(hbar));
        let h_direct = &p * &p + &x * &x;
        check("H ladder vs |p|^2 + |x|^2", defect_on(&h_ladder, &h_direct, &keep), CERT_TOL * hbar * levels as f64)?;
        let mut f = Factor {
            axes: vec![(axis, levels)],
            ops: vec![
                (Observable::A(axis + 1), a),
                (Observable::X(axis + 1), x),
                (Observable::P(axis + 1), p),
            ],
            h: h_ladder,
            evals: Vec::new(),
            evecs: identity(1),
            boundary: boundary(&[levels], &[axis]),
        };
        f.diagonalize();
        factors.push(f);
    }
    let top = (2.0 * (levels - 1) as f64 + d as f64) * hbar;
    Ok(OracleState {
        params: *params,
        model: Model::Harmonic { d },
        per_axis_levels: vec![levels; d],
        factors,
        trust_cutoff: top,
    })
}

/// Fock–Darwin Hamiltonian from three independent ladders with levels
/// `[N₁, N₂, N₃]`.
pub fn build_magnetic(params: &PhysicalParams, levels: [usize; 3]) -> Result<OracleState, OracleError> {
    let b = params.b.ok_or(OracleError::InvalidSize("magnetic oracle needs b"))?;
    if params.dim != 3 {
        return Err(OracleError::InvalidSize("magnetic oracle needs d = 3"));
    }
    if levels.iter().any(|&n| n < 4) {
        return Err(OracleError::InvalidSize("need at least 4 levels per axis"));
    }
    let hbar = params.hbar;
    let bb = (1.0 + b * b).sqrt();
    let om = b / bb;
    let alpha12 = 4.0 * bb * hbar;
    let alpha3 = 2.0 * hbar;
    let lv = [levels[0], levels[1]];

    // transverse plane
    let a1 = embed(&ladder(alpha12, levels[0]), &lv, 0);
    let a2 = embed(&ladder(alpha12, levels[1]), &lv, 1);
    let (a1d, a2d) = (a1.adjoint(), a2.adjoint());
    let i4 = C64::new(0.0, 4.0);
    let x1 = scale(&(&a1 + &a1d + &a2 + &a2d), re(1.0 / (4.0 * bb)));
    let x2 = (&a1 - &a1d + &a2d - &a2) / (i4 * bb);
    let p1 = (&a1 - &a1d + &a2 - &a2d) / i4;
    let p2 = scale(&(-&a1 - &a1d + &a2 + &a2d), re(0.25));
    let v1 = &p1 - scale(&x2, re(b));
    let v2 = &p2 + scale(&x1, re(b));
    let v1_ladder = (scale(&(&a1 - &a1d), re(1.0 - om)) + scale(&(&a2 - &a2d), re(1.0 + om))) / i4;
    let v2_ladder = scale(&(scale(&(&a2 + &a2d), re(1.0 + om)) - scale(&(&a1 + &a1d), re(1.0 - om))), re(0.25));
    let all: Vec<usize> = (0..a1.nrows()).collect();
    check("v1 = p1 - b x2", defect_on(&v1, &v1_ladder, &all), 1e-12 * alpha12.sqrt() * levels[0].max(levels[1]) as f64)?;
    check("v2 = p2 + b x1", defect_on(&v2, &v2_ladder, &all), 1e-12 * alpha12.sqrt() * levels[0].max(levels[1]) as f64)?;
    let keep = interior(&lv);
    let n_perp = a1.nrows();
    for (a, ad, what) in [(&a1, &a1d, "[a1, a1*] = 4<b>hbar"), (&a2, &a2d, "[a2, a2*] = 4<b>hbar")] {
        let comm = a * ad - ad * a;
        check(what, defect_on(&comm, &scale(&identity(n_perp), re(alpha12)), &keep), 1e-12 * alpha12)?;
    }
    let h_perp = scale(&(&a1d * &a1), re(0.5 * (1.0 - om))) + scale(&(&a2d * &a2), re(0.5 * (1.0 + om))) + scale(&identity(n_perp), re(2.0 * bb * hbar));
    let h_direct = &v1 * &v1 + &v2 * &v2 + &x1 * &x1 + &x2 * &x2;
    let scale_e = alpha12 * levels[0].max(levels[1]) as f64;
    check("H_perp ladder vs |p + A|^2 + |x|^2", defect_on(&h_perp, &h_direct, &keep), CERT_TOL * scale_e)?;
    let mut perp = Factor {
        axes: vec![(0, levels[0]), (1, levels[1])],
        ops: vec![
            (Observable::A(1), a1),
            (Observable::A(2), a2),
            (Observable::X(1), x1),
            (Observable::X(2), x2),
            (Observable::P(1), p1),
            (Observable::P(2), p2),
            (Observable::V(1), v1),
            (Observable::V(2), v2),
        ],
        h: h_perp,
        evals: Vec::new(),
        evecs: identity(1),
        boundary: boundary(&lv, &[0, 1]),
    };
    perp.diagonalize();

    // field axis
    let n3 = levels[2];
    let a3 = ladder(alpha3, n3);
    let a3d = a3.adjoint();
    let x3 = scale(&(&a3 + &a3d), re(0.5));
    let p3 = scale(&(&a3 - &a3d), C64::new(0.0, -0.5));
    let keep3 = interior(&[n3]);
    let comm = &a3 * &a3d - &a3d * &a3;
    check("[a3, a3*] = 2hbar", defect_on(&comm, &scale(&identity(n3), re(alpha3)), &keep3), 1e-12 * alpha3)?;
    let h_par = &a3d * &a3 + scale(&identity(n3), re(hbar));
    let h_par_direct = &p3 * &p3 + &x3 * &x3;
    check("H_par ladder vs p3^2 + x3^2", defect_on(&h_par, &h_par_direct, &keep3), CERT_TOL * alpha3 * n3 as f64)?;
    let mut par = Factor {
        axes: vec![(2, n3)],
        ops: vec![(Observable::A(3), a3), (Observable::X(3), x3), (Observable::P(3), p3)],
        h: h_par,
        evals: Vec::new(),
        evecs: identity(1),
        boundary: boundary(&[n3], &[2]),
    };
    par.diagonalize();

    let lam = [2.0 * hbar / (bb + b), 2.0 * (bb + b) * hbar, 2.0 * hbar];
    let ground = (2.0 * bb + 1.0) * hbar;
    let cutoff = (0..3).map(|j| ground + lam[j] * (levels[j] - 1) as f64).fold(f64::INFINITY, f64::min);
    Ok(OracleState {
        params: *params,
        model: Model::Magnetic,
        per_axis_levels: levels.to_vec(),
        factors: vec![perp, par],
        trust_cutoff: cutoff,
    })
}

/// γ = F(H) represented by occupations on the joint eigenbasis.
#[derive(Debug, Clone)]
pub struct Equilibrium {
    pub beta: f64,
    pub mu: f64,
    /// Joint eigenvalues, indexed with the first factor fastest.
    pub energies: Vec<f64>,
    pub occupations: Vec<f64>,
    /// Largest diagonal entry of γ on a basis state with a top ladder level.
    pub boundary_occupation: f64,
    pub boundary_axis: usize,
}

impl OracleState {
    pub fn dimension(&self) -> usize {
        self.factors.iter().map(|f| f.dim()).product()
    }

    fn planck_d(&self) -> f64 {
        (2.0 * PI * self.params.hbar).powi(self.params.dim as i32)
    }

    fn joint(&self, idx: usize) -> Vec<usize> {
        let mut r = idx;
        self.factors
            .iter()
            .map(|f| {
                let k = r % f.dim();
                r /= f.dim();
                k
            })
            .collect()
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = Vec::with_capacity(self.factors.len());
        let mut acc = 1;
        for f in &self.factors {
            s.push(acc);
            acc *= f.dim();
        }
        s
    }

    /// Sorted eigenvalues of the truncated H.
    pub fn spectrum(&self) -> Vec<f64> {
        let mut e: Vec<f64> = (0..self.dimension())
            .map(|i| self.joint(i).iter().zip(&self.factors).map(|(&k, f)| f.evals[k]).sum())
            .collect();
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        e
    }

    /// Occupations F_{β,μ}(E); eigenvalues within 10⁻⁹ħ of μ count as occupied at β = ∞.
    pub fn equilibrium(&self, beta: f64, mu: f64) -> Result<Equilibrium, OracleError> {
        let occ = OccupationFn::new(beta, mu)?;
        let tol = 1e-9 * self.params.hbar;
        let n = self.dimension();
        let mut energies = Vec::with_capacity(n);
        let mut occupations = Vec::with_capacity(n);
        for i in 0..n {
            let e: f64 = self.joint(i).iter().zip(&self.factors).map(|(&k, f)| f.evals[k]).sum();
            let f = if occ.is_zero_temperature() {
                if e <= mu + tol {
                    1.0
                } else {
                    0.0
                }
            } else {
                occ.eval(e)
            };
            energies.push(e);
            occupations.push(f);
        }
        // diagonal of γ on basis states carrying a top ladder level
        let strides = self.strides();
        let weights: Vec<Vec<Vec<f64>>> = self
            .factors
            .iter()
            .map(|f| (0..f.dim()).map(|r| (0..f.dim()).map(|c| f.evecs[(r, c)].norm_sqr()).collect()).collect())
            .collect();
        let mut worst: f64 = 0.0;
        let mut worst_axis = 0;
        for (fi, f) in self.factors.iter().enumerate() {
            for &(basis, axis) in &f.boundary {
                for other in (0..n).filter(|k| (k / strides[fi]) % f.dim() == 0) {
                    let mut total = 0.0;
                    for (j, &occ_j) in occupations.iter().enumerate() {
                        if occ_j == 0.0 {
                            continue;
                        }
                        let mut w = occ_j;
                        for (gi, g) in self.factors.iter().enumerate() {
                            let eig = (j / strides[gi]) % g.dim();
                            let row = if gi == fi { basis } else { (other / strides[gi]) % g.dim() };
                            w *= weights[gi][row][eig];
                        }
                        total += w;
                    }
                    if total > worst {
                        worst = total;
                        worst_axis = axis + 1;
                    }
                }
            }
        }
        Ok(Equilibrium {
            beta,
            mu,
            energies,
            occupations,
            boundary_occupation: worst,
            boundary_axis: worst_axis,
        })
    }

    fn trusted(&self, eq: &Equilibrium) -> Result<(), OracleError> {
        if eq.boundary_occupation >= TRUST_OCCUPATION {
            Err(OracleError::Trust {
                axis: eq.boundary_axis,
                occupation: eq.boundary_occupation,
            })
        } else {
            Ok(())
        }
    }

    fn factor_of(&self, o: Observable) -> Option<usize> {
        self.factors.iter().position(|f| f.op(o).is_some())
    }

    /// Singular values of [O, γ].
    pub fn commutator_singular_values(&self, eq: &Equilibrium, o: Observable) -> Result<Vec<f64>, OracleError> {
        let fi = self.factor_of(o).ok_or(OracleError::InvalidSize("observable not present in this model"))?;
        let f = &self.factors[fi];
        let ot = f.in_eigenbasis(f.op(o).unwrap());
        let strides = self.strides();
        let n = self.dimension();
        let m = f.dim();
        let mut out = Vec::with_capacity(n);
        // one block per eigen-index of the remaining factors
        for base in 0..n {
            if (base / strides[fi]) % m != 0 {
                continue;
            }
            let idx = |k: usize| base + k * strides[fi];
            let block = CMatrix::from_fn(m, m, |i, j| ot[(i, j)] * (eq.occupations[idx(j)] - eq.occupations[idx(i)]));
            out.extend(singular_values_by_component(&block));
        }
        Ok(out)
    }

    /// ‖[O, γ]‖ in the scaled Schatten norm; rejects untrusted truncations.
    pub fn oracle_commutator_norm(&self, eq: &Equilibrium, o: Observable, p: SchattenOrder) -> Result<NormValue, OracleError> {
        self.trusted(eq)?;
        let sv = self.commutator_singular_values(eq, o)?;
        Ok(self.norm_from_singular_values(&sv, p))
    }

    fn norm_from_singular_values(&self, sv: &[f64], p: SchattenOrder) -> NormValue {
        if !p.is_finite() {
            let m = sv.iter().copied().fold(0.0, f64::max);
            return NormValue::from_value(m, 0.0);
        }
        let pf = p.get();
        let s: f64 = sv.iter().map(|x| x.powf(pf)).sum();
        NormValue::from_value((self.planck_d() * s).powf(1.0 / pf), 0.0)
    }

    /// ‖[a, γ]‖ for the vector ladder a = (a₁, …, a_d) of the isotropic
    /// oscillator, i.e. the norm of (Σ_k [a_k,γ]*[a_k,γ])^{1/2}.
    ///
    /// The Gram matrix is assembled exactly; it is then diagonalized on
    /// blocks of degenerate energy after checking that its entries between
    /// different energies vanish.
    pub fn vector_ladder_norm(&self, eq: &Equilibrium, p: SchattenOrder) -> Result<NormValue, OracleError> {
        let Model::Harmonic { d } = self.model else {
            return Err(OracleError::InvalidSize("vector ladder norm is defined for the isotropic oscillator"));
        };
        self.trusted(eq)?;
        let n = self.dimension();
        let strides = self.strides();
        let lowered: Vec<CMatrix> = (0..d)
            .map(|k| self.factors[k].in_eigenbasis(self.factors[k].op(Observable::A(k + 1)).unwrap()))
            .collect();
        let c = |k: usize, row: usize, col: usize| -> C64 {
            // [a_k, γ] between joint states differing only in factor k
            let m = self.factors[k].dim();
            let i = (row / strides[k]) % m;
            let j = (col / strides[k]) % m;
            lowered[k][(i, j)] * (eq.occupations[col] - eq.occupations[row])
        };
        // energy groups
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eq.energies[a].partial_cmp(&eq.energies[b]).unwrap());
        let gap = 1e-7 * self.params.hbar;
        let mut group_of = vec![0usize; n];
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for &i in &order {
            match groups.last_mut() {
                Some(g) if (eq.energies[i] - eq.energies[*g.last().unwrap()]).abs() <= gap => g.push(i),
                _ => groups.push(vec![i]),
            }
            group_of[i] = groups.len() - 1;
        }
        // Gram entries G[I,J] for I, J agreeing outside one factor
        let mut off_shell: f64 = 0.0;
        let mut gram_blocks: Vec<CMatrix> = groups.iter().map(|g| CMatrix::zeros(g.len(), g.len())).collect();
        let pos_in_group: Vec<usize> = {
            let mut v = vec![0usize; n];
            for g in &groups {
                for (k, &i) in g.iter().enumerate() {
                    v[i] = k;
                }
            }
            v
        };
        for row in 0..n {
            for k in 0..d {
                let m = self.factors[k].dim();
                let rk = (row / strides[k]) % m;
                let base = row - rk * strides[k];
                for jk in 0..m {
                    let col = base + jk * strides[k];
                    // Σ over intermediate I' differing from both in factor k
                    let mut g = C64::new(0.0, 0.0);
                    for ik in 0..m {
                        let mid = base + ik * strides[k];
                        g += c(k, mid, row).conj() * c(k, mid, col);
                    }
                    if group_of[row] == group_of[col] {
                        gram_blocks[group_of[row]][(pos_in_group[row], pos_in_group[col])] += g;
                    } else {
                        off_shell = off_shell.max(g.norm());
                    }
                }
            }
        }
        let scale_ref = gram_blocks.iter().flat_map(|b| b.iter().map(|z| z.norm())).fold(0.0, f64::max);
        if off_shell > 1e-10 * scale_ref.max(f64::MIN_POSITIVE) {
            return Err(OracleError::Construction {
                what: "Gram matrix couples different energies",
                defect: off_shell,
            });
        }
        let mut sv = Vec::with_capacity(n);
        for b in gram_blocks {
            let e = SymmetricEigen::new(b).eigenvalues;
            sv.extend(e.iter().map(|&l| l.max(0.0).sqrt()));
        }
        Ok(self.norm_from_singular_values(&sv, p))
    }

    /// Full matrix of an operator in the computational basis (small sizes).
    pub fn full_operator(&self, o: Observable) -> Option<CMatrix> {
        let fi = self.factor_of(o)?;
        let mut m = identity(1);
        for (k, f) in self.factors.iter().enumerate().rev() {
            let piece = if k == fi { f.op(o).unwrap().clone() } else { identity(f.dim()) };
            m = kron(&m, &piece);
        }
        Some(m)
    }

    /// Full Hamiltonian in the computational basis (small sizes).
    pub fn full_hamiltonian(&self) -> CMatrix {
        let n = self.dimension();
        let mut h = CMatrix::zeros(n, n);
        for (k, _) in self.factors.iter().enumerate() {
            let mut m = identity(1);
            for (i, f) in self.factors.iter().enumerate().rev() {
                let piece = if i == k { f.h.clone() } else { identity(f.dim()) };
                m = kron(&m, &piece);
            }
            h += m;
        }
        h
    }

    /// Full γ in the computational basis (small sizes).
    pub fn full_gamma(&self, eq: &Equilibrium) -> CMatrix {
        let mut u = identity(1);
        for f in self.factors.iter().rev() {
            u = kron(&u, &f.evecs);
        }
        let n = self.dimension();
        let diag = CMatrix::from_fn(n, n, |i, j| if i == j { re(eq.occupations[i]) } else { re(0.0) });
        &u * diag * u.adjoint()
    }

    /// Global axes and level counts per factor.
    pub fn factor_axes(&self) -> Vec<Vec<(usize, usize)>> {
        self.factors.iter().map(|f| f.axes.clone()).collect()
    }
}

/// Singular values of `m`, taken separately on each connected component of
/// its bipartite row/column sparsity graph; all-zero rows contribute zeros.
pub fn singular_values_by_component(m: &CMatrix) -> Vec<f64> {
    let (r, c) = (m.nrows(), m.ncols());
    let mut parent: Vec<usize> = (0..r + c).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..r {
        for j in 0..c {
            if m[(i, j)] != C64::new(0.0, 0.0) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, r + j));
                parent[a] = b;
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, (Vec<usize>, Vec<usize>)> = Default::default();
    for i in 0..r {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().0.push(i);
    }
    for j in 0..c {
        let root = find(&mut parent, r + j);
        groups.entry(root).or_default().1.push(j);
    }
    let mut out = Vec::with_capacity(r.min(c));
    for (rows, cols) in groups.values() {
        if rows.is_empty() || cols.is_empty() {
            continue;
        }
        if rows.len() == 1 && cols.len() == 1 {
            out.push(m[(rows[0], cols[0])].norm());
            continue;
        }
        let sub = CMatrix::from_fn(rows.len(), cols.len(), |a, b| m[(rows[a], cols[b])]);
        out.extend(sub.singular_values().iter().copied());
    }
    out
}

/// Largest dimension the growth helpers will build.
pub const MAX_DIMENSION: usize = 20_000;

/// Smallest N with F(ground + gap·(N − 1)) below the trust threshold.
fn levels_for(params: &PhysicalParams, ground: f64, gap: f64) -> usize {
    let top = if params.is_zero_temperature() {
        params.mu
    } else {
        params.mu - TRUST_OCCUPATION.ln() / params.beta
    };
    (((top - ground) / gap).max(0.0).floor() as usize + 2).min(MAX_DIMENSION)
}

/// Builds the oscillator with the smallest level count ≥ `start` whose
/// equilibrium passes the boundary-occupation test.
pub fn trusted_harmonic(params: &PhysicalParams, start: usize) -> Result<(OracleState, Equilibrium), OracleError> {
    let mut n = start.max(4).max(levels_for(params, params.dim as f64 * params.hbar, 2.0 * params.hbar));
    loop {
        let state = build_harmonic(params, n)?;
        let eq = state.equilibrium(params.beta, params.mu)?;
        if eq.boundary_occupation < TRUST_OCCUPATION {
            return Ok((state, eq));
        }
        let next = n + n.div_ceil(4);
        if next.pow(params.dim) > MAX_DIMENSION {
            return Err(OracleError::Trust {
                axis: eq.boundary_axis,
                occupation: eq.boundary_occupation,
            });
        }
        n = next;
    }
}

/// Grows the level count of the offending axis until the magnetic
/// equilibrium passes the boundary-occupation test.
pub fn trusted_magnetic(params: &PhysicalParams, start: [usize; 3]) -> Result<(OracleState, Equilibrium), OracleError> {
    let b = params.b.ok_or(OracleError::InvalidSize("magnetic oracle needs b"))?;
    let bb = (1.0 + b * b).sqrt();
    let lam = [2.0 * params.hbar / (bb + b), 2.0 * (bb + b) * params.hbar, 2.0 * params.hbar];
    let ground = (2.0 * bb + 1.0) * params.hbar;
    let mut levels = [0, 1, 2].map(|j| start[j].max(4).max(levels_for(params, ground, lam[j])));
    loop {
        let state = build_magnetic(params, levels)?;
        let eq = state.equilibrium(params.beta, params.mu)?;
        if eq.boundary_occupation < TRUST_OCCUPATION {
            return Ok((state, eq));
        }
        let axis = eq.boundary_axis - 1;
        let mut next = levels;
        next[axis] += levels[axis].div_ceil(4);
        if next.iter().product::<usize>() > MAX_DIMENSION {
            return Err(OracleError::Trust {
                axis: eq.boundary_axis,
                occupation: eq.boundary_occupation,
            });
        }
        levels = next;
    }
}

/// Scaled Schatten norm of a dense matrix: (h^d Σ s_k^p)^{1/p}, or the
/// largest singular value for p = ∞ (no scale).
pub fn schatten_norm(m: &CMatrix, p: SchattenOrder, hd_scale: Option<(f64, u32)>) -> f64 {
    let sv = m.singular_values();
    if !p.is_finite() {
        return sv.iter().copied().fold(0.0, f64::max);
    }
    let pf = p.get();
    let s: f64 = sv.iter().map(|x| x.powf(pf)).sum();
    let scale = hd_scale.map_or(1.0, |(hbar, d)| (2.0 * PI * hbar).powi(d as i32));
    (scale * s).powf(1.0 / pf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_norm_is_scaled_dimension() {
        let m = identity(7);
        let v = schatten_norm(&m, SchattenOrder::ONE, Some((1.0, 1)));
        assert!((v - 2.0 * PI * 7.0).abs() < 1e-12);
    }

    #[test]
    fn rank_one_unscaled() {
        let mut m = CMatrix::zeros(4, 4);
        m[(1, 2)] = re(3.0);
        let v = schatten_norm(&m, SchattenOrder::new(4.0).unwrap(), None);
        assert!((v - 3.0).abs() < 1e-14);
    }

    #[test]
    fn harmonic_d1_diagonal() {
        let params = PhysicalParams::new(1.0, 1.0, 0.0, 1).unwrap();
        let s = build_harmonic(&params, 5).unwrap();
        let e = s.spectrum();
        for (n, v) in e.iter().enumerate() {
            assert!((v - (2.0 * n as f64 + 1.0)).abs() < 1e-12);
        }
    }
}
