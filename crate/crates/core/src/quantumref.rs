//! Floating-point quantum checks behind the box models.
//!
//! Projector decompositions, the POVM built from Alice's adaptive procedure,
//! sequential Lüders measurements of squared spin-1 components, and
//! correlations on a maximally entangled pair of spin-1 systems. Every
//! comparison uses one tolerance, [`TOLERANCE`], on the max-entry norm.

use std::io;

use nalgebra::{DMatrix, DVector, Vector3};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::rational::decimal_with_digits;

pub const TOLERANCE: f64 = 1e-12;

pub type CMatrix = DMatrix<Complex64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantumError {
    #[error("dimension mismatch: {0} against {1}")]
    DimensionMismatch(usize, usize),
    #[error("state is not a density matrix (trace deviation {trace}, hermiticity deviation {hermitian})")]
    NotAState { trace: f64, hermitian: f64 },
    #[error("directions are not orthonormal (deviation {0})")]
    NotOrthonormal(f64),
    #[error("order must be a permutation of 0, 1, 2")]
    BadOrder,
    #[error("rank {rank} is outside 0..={dim}")]
    BadRank { rank: usize, dim: usize },
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Largest entry modulus.
pub fn max_entry_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Two-outcome decomposition `P+ + P- = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorPair {
    pub plus: CMatrix,
    pub minus: CMatrix,
}

/// How far a pair is from being an orthogonal projector decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairDefects {
    pub idempotent: f64,
    pub self_adjoint: f64,
    pub completeness: f64,
}

impl PairDefects {
    pub fn worst(&self) -> f64 {
        self.idempotent.max(self.self_adjoint).max(self.completeness)
    }
}

impl ProjectorPair {
    /// `P-` is taken as `I - P+`.
    pub fn from_plus(plus: CMatrix) -> Self {
        let minus = identity(plus.nrows()) - &plus;
        ProjectorPair { plus, minus }
    }

    /// `(I, 0)`: the proposition is certainly true.
    pub fn trivial(dim: usize) -> Self {
        ProjectorPair::from_plus(identity(dim))
    }

    /// `P+` onto a Haar-random subspace of the given rank, from the QR
    /// factor of a complex Gaussian matrix.
    pub fn random(dim: usize, rank: usize, rng: &mut impl Rng) -> Result<Self, QuantumError> {
        if rank > dim {
            return Err(QuantumError::BadRank { rank, dim });
        }
        let q = gaussian_matrix(dim, dim, rng).qr().q();
        let cols = q.columns(0, rank);
        Ok(ProjectorPair::from_plus(cols * cols.adjoint()))
    }

    pub fn dim(&self) -> usize {
        self.plus.nrows()
    }

    pub fn defects(&self) -> PairDefects {
        let sq = |p: &CMatrix| max_entry_norm(&(p * p - p));
        let adj = |p: &CMatrix| max_entry_norm(&(p.adjoint() - p));
        PairDefects {
            idempotent: sq(&self.plus).max(sq(&self.minus)),
            self_adjoint: adj(&self.plus).max(adj(&self.minus)),
            completeness: max_entry_norm(&(&self.plus + &self.minus - identity(self.dim()))),
        }
    }

    pub fn is_valid(&self) -> bool {
        self.defects().worst() <= TOLERANCE
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PovmCheck {
    /// Max-entry deviation of the summed effects from the identity.
    pub deviation: f64,
    /// Whether all three inputs are projector pairs.
    pub valid_inputs: bool,
}

/// Effects of "measure C, then A on +, B on -": their sum must be the
/// identity whenever `A`, `B`, `C` are projector pairs.
pub fn povm_identity_check(
    a: &ProjectorPair,
    b: &ProjectorPair,
    c: &ProjectorPair,
) -> Result<PovmCheck, QuantumError> {
    for other in [b, c] {
        if other.dim() != a.dim() {
            return Err(QuantumError::DimensionMismatch(a.dim(), other.dim()));
        }
    }
    let sum = &c.plus * &a.plus * &c.plus
        + &c.plus * &a.minus * &c.plus
        + &c.minus * &b.plus * &c.minus
        + &c.minus * &b.minus * &c.minus;
    Ok(PovmCheck {
        deviation: max_entry_norm(&(sum - identity(a.dim()))),
        valid_inputs: a.is_valid() && b.is_valid() && c.is_valid(),
    })
}

/// Basis in which a spin-1 frame is written.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinBasis {
    /// `S_k` has entries `-i ε_kij`; the spin-0 state along `n` is `n`.
    Cartesian,
    /// Eigenbasis `|+1>, |0>, |-1>` of `S_z`.
    Sz,
}

/// Spin-1 operators `(S_x, S_y, S_z)` in the given basis.
pub fn spin_operators(basis: SpinBasis) -> [CMatrix; 3] {
    match basis {
        SpinBasis::Cartesian => {
            let eps = |k: usize, i: usize, j: usize| -> f64 {
                match (k, i, j) {
                    (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
                    (0, 2, 1) | (1, 0, 2) | (2, 1, 0) => -1.0,
                    _ => 0.0,
                }
            };
            [0, 1, 2].map(|k| CMatrix::from_fn(3, 3, |i, j| Complex64::new(0.0, -eps(k, i, j))))
        }
        SpinBasis::Sz => {
            let r = std::f64::consts::FRAC_1_SQRT_2;
            let sx = CMatrix::from_row_slice(
                3,
                3,
                &[c(0.0), c(r), c(0.0), c(r), c(0.0), c(r), c(0.0), c(r), c(0.0)],
            );
            let i = Complex64::new(0.0, r);
            let z = c(0.0);
            let sy = CMatrix::from_row_slice(3, 3, &[z, -i, z, i, z, -i, z, i, z]);
            let sz = CMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0), c(0.0), c(-1.0)]));
            [sx, sy, sz]
        }
    }
}

/// Projectors onto the spin-0 states along three orthonormal directions:
/// `I - (n·S)^2` for each `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinOneFrame {
    pub directions: [Vector3<f64>; 3],
    pub basis: SpinBasis,
    pub projectors: [CMatrix; 3],
}

impl SpinOneFrame {
    pub fn new(directions: [Vector3<f64>; 3], basis: SpinBasis) -> Result<Self, QuantumError> {
        let mut dev: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((directions[i].dot(&directions[j]) - want).abs());
            }
        }
        if dev > 1e-9 {
            return Err(QuantumError::NotOrthonormal(dev));
        }
        let s = spin_operators(basis);
        let projectors = directions.map(|n| {
            let ns = &s[0] * c(n.x) + &s[1] * c(n.y) + &s[2] * c(n.z);
            identity(3) - &ns * &ns
        });
        Ok(SpinOneFrame {
            directions,
            basis,
            projectors,
        })
    }

    /// The `x, y, z` axes.
    pub fn standard(basis: SpinBasis) -> Self {
        SpinOneFrame::new([Vector3::x(), Vector3::y(), Vector3::z()], basis).expect("axes")
    }

    /// A random rotation of the axes.
    pub fn random(basis: SpinBasis, rng: &mut impl Rng) -> Self {
        let g = nalgebra::Matrix3::<f64>::from_fn(|_, _| rng.sample(StandardNormal));
        let q = g.qr().q();
        SpinOneFrame::new([0, 1, 2].map(|k| q.column(k).into_owned()), basis).expect("orthonormal")
    }

    /// Deviation from mutual orthogonality and completeness.
    pub fn defect(&self) -> f64 {
        let p = &self.projectors;
        let mut d = max_entry_norm(&(&p[0] + &p[1] + &p[2] - identity(3)));
        for i in 0..3 {
            d = d.max(max_entry_norm(&(&p[i] * &p[i] - &p[i])));
            for j in 0..3 {
                if i != j {
                    d = d.max(max_entry_norm(&(&p[i] * &p[j])));
                }
            }
        }
        d
    }
}

fn check_state(rho: &CMatrix) -> Result<(), QuantumError> {
    let trace = (rho.trace() - c(1.0)).norm();
    let hermitian = max_entry_norm(&(rho.adjoint() - rho));
    if trace > TOLERANCE || hermitian > TOLERANCE {
        return Err(QuantumError::NotAState { trace, hermitian });
    }
    Ok(())
}

/// `G G† / tr(G G†)` for a complex Gaussian `G`.
pub fn random_state(dim: usize, rng: &mut impl Rng) -> CMatrix {
    let g = gaussian_matrix(dim, dim, rng);
    let rho = &g * g.adjoint();
    let t = rho.trace();
    rho / t
}

/// Distribution over the eight yes/no patterns of three sequential Lüders
/// measurements; bit `k` is set when direction `k` registered spin 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LudersDistribution {
    pub patterns: [f64; 8],
}

impl LudersDistribution {
    /// `(x, y, z, none)`: which single direction registered spin 0.
    pub fn exclusive(&self) -> [f64; 4] {
        [self.patterns[1], self.patterns[2], self.patterns[4], self.patterns[0]]
    }

    pub fn max_difference(&self, other: &LudersDistribution) -> f64 {
        self.patterns
            .iter()
            .zip(&other.patterns)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Measures the frame's projectors one after another in `order`, each with
/// branch operators `P` and `I - P`.
pub fn luders_sequence(
    frame: &SpinOneFrame,
    order: [usize; 3],
    rho: &CMatrix,
) -> Result<LudersDistribution, QuantumError> {
    let mut sorted = order;
    sorted.sort_unstable();
    if sorted != [0, 1, 2] {
        return Err(QuantumError::BadOrder);
    }
    if rho.nrows() != 3 || rho.ncols() != 3 {
        return Err(QuantumError::DimensionMismatch(3, rho.nrows()));
    }
    check_state(rho)?;
    let mut branches: Vec<(usize, CMatrix)> = vec![(0, rho.clone())];
    for &k in &order {
        let p = &frame.projectors[k];
        let q = identity(3) - p;
        branches = branches
            .into_iter()
            .flat_map(|(bits, r)| {
                [(bits | 1 << k, p * &r * p), (bits, &q * &r * &q)]
            })
            .collect();
    }
    let mut patterns = [0.0; 8];
    for (bits, r) in branches {
        patterns[bits] += r.trace().re;
    }
    Ok(LudersDistribution { patterns })
}

/// Which maximally entangled state of two spin-1 systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntangledConvention {
    /// `Σ_i v_i ⊗ v_i / √3` over the frame's spin-0 eigenvectors.
    Uniform,
    /// `(|+1,-1> - |0,0> + |-1,+1>)/√3`, written in the `S_z` basis.
    Singlet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionCorrelation {
    pub both: f64,
    pub alice: f64,
    pub bob: f64,
    /// Pearson correlation of the two yes/no indicators.
    pub coefficient: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    pub convention: EntangledConvention,
    pub per_direction: [DirectionCorrelation; 3],
    /// `"correlated"` or `"anticorrelated"` by the sign of the coefficients.
    pub kind: &'static str,
    /// Largest deviation of a marginal from 1/3.
    pub marginal_defect: f64,
    /// Largest deviation of `|coefficient|` from 1.
    pub correlation_defect: f64,
}

fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

fn spin0_vector(p: &CMatrix) -> DVector<Complex64> {
    // Rank-1 projector: any column of largest norm spans its range.
    let col = (0..3)
        .max_by(|&i, &j| p.column(i).norm().total_cmp(&p.column(j).norm()))
        .expect("three columns");
    let v = p.column(col).into_owned();
    let n = v.norm();
    v / c(n)
}

/// Matching-projection statistics on a maximally entangled pair.
pub fn entangled_spin1_correlations(
    frame: &SpinOneFrame,
    convention: EntangledConvention,
) -> Result<CorrelationReport, QuantumError> {
    let psi: DVector<Complex64> = match convention {
        EntangledConvention::Uniform => {
            let mut psi = DVector::zeros(9);
            for p in &frame.projectors {
                let v = spin0_vector(p);
                psi += v.kronecker(&v);
            }
            psi / c(3f64.sqrt())
        }
        EntangledConvention::Singlet if frame.basis != SpinBasis::Sz => {
            let sz_frame = SpinOneFrame::new(frame.directions, SpinBasis::Sz)?;
            return entangled_spin1_correlations(&sz_frame, convention);
        }
        EntangledConvention::Singlet => {
            let mut psi = DVector::zeros(9);
            let s = 1.0 / 3f64.sqrt();
            // |m_A, m_B> sits at index 3 i + j with i, j = 0, 1, 2 for m = +1, 0, -1.
            psi[2] = c(s);
            psi[4] = c(-s);
            psi[6] = c(s);
            psi
        }
    };
    let rho = &psi * psi.adjoint();
    let id = identity(3);
    let expect = |op: &CMatrix| (rho.clone() * op).trace().re;
    let per_direction = [0, 1, 2].map(|k| {
        let p = &frame.projectors[k];
        let both = expect(&kron(p, p));
        let alice = expect(&kron(p, &id));
        let bob = expect(&kron(&id, p));
        let var = (alice * (1.0 - alice) * bob * (1.0 - bob)).sqrt();
        DirectionCorrelation {
            both,
            alice,
            bob,
            coefficient: (both - alice * bob) / var,
        }
    });
    let kind = if per_direction.iter().all(|d| d.coefficient > 0.0) {
        "correlated"
    } else {
        "anticorrelated"
    };
    let third = 1.0 / 3.0;
    let marginal_defect = per_direction
        .iter()
        .flat_map(|d| [(d.alice - third).abs(), (d.bob - third).abs()])
        .fold(0.0, f64::max);
    let correlation_defect = per_direction
        .iter()
        .map(|d| (d.coefficient.abs() - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(CorrelationReport {
        convention,
        per_direction,
        kind,
        marginal_defect,
        correlation_defect,
    })
}

/// One line of the reference report.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub check: String,
    pub dimension: usize,
    pub deviation: f64,
}

impl CheckRow {
    pub fn passed(&self) -> bool {
        self.deviation <= TOLERANCE
    }
}

pub const ORDERS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// The standing battery: POVM identity over `povm_trials` random projector
/// triples per dimension 2 to 4, Lüders order invariance over `states`
/// random states, frame sanity in both bases, and both entangled
/// conventions. Each row holds the worst deviation seen.
pub fn reference_checks(povm_trials: usize, states: usize, rng: &mut impl Rng) -> Vec<CheckRow> {
    let mut rows = Vec::new();
    for dim in 2..=4 {
        let mut worst: f64 = 0.0;
        for _ in 0..povm_trials {
            let mut pair = || {
                let rank = rng.random_range(0..=dim);
                ProjectorPair::random(dim, rank, rng).expect("rank in range")
            };
            let (a, b, c) = (pair(), pair(), pair());
            worst = worst.max(povm_identity_check(&a, &b, &c).expect("same dimension").deviation);
        }
        rows.push(CheckRow {
            check: "povm_identity".into(),
            dimension: dim,
            deviation: worst,
        });
    }
    for basis in [SpinBasis::Cartesian, SpinBasis::Sz] {
        let frame = SpinOneFrame::standard(basis);
        let name = match basis {
            SpinBasis::Cartesian => "cartesian",
            SpinBasis::Sz => "sz",
        };
        rows.push(CheckRow {
            check: format!("frame_resolution_{name}"),
            dimension: 3,
            deviation: frame.defect(),
        });
        let mut worst: f64 = 0.0;
        for _ in 0..states {
            let rho = random_state(3, rng);
            let base = luders_sequence(&frame, ORDERS[0], &rho).expect("valid state");
            for order in &ORDERS[1..] {
                let d = luders_sequence(&frame, *order, &rho).expect("valid state");
                worst = worst.max(base.max_difference(&d));
            }
            worst = worst.max(base.patterns[0].abs());
        }
        rows.push(CheckRow {
            check: format!("luders_order_invariance_{name}"),
            dimension: 3,
            deviation: worst,
        });
    }
    let frame = SpinOneFrame::random(SpinBasis::Cartesian, rng);
    for (conv, name) in [
        (EntangledConvention::Uniform, "uniform"),
        (EntangledConvention::Singlet, "singlet"),
    ] {
        let r = entangled_spin1_correlations(&frame, conv).expect("valid frame");
        rows.push(CheckRow {
            check: format!("entangled_marginals_{name}"),
            dimension: 9,
            deviation: r.marginal_defect,
        });
        rows.push(CheckRow {
            check: format!("entangled_{}_{name}", r.kind),
            dimension: 9,
            deviation: r.correlation_defect,
        });
    }
    rows
}

pub const CHECK_CSV_HEADER: [&str; 3] = ["check", "dimension", "deviation"];

/// Deviations in scientific notation with 12 significant digits.
pub fn format_deviation(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else if x >= 1e-3 {
        decimal_with_digits(x, 12)
    } else {
        format!("{x:.11e}")
    }
}

pub fn write_checks_csv<W: io::Write>(rows: &[CheckRow], writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CHECK_CSV_HEADER)?;
    for r in rows {
        w.write_record([r.check.clone(), r.dimension.to_string(), format_deviation(r.deviation)])?;
    }
    w.flush()?;
    Ok(())
}
