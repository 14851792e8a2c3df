//! Dense complex operator algebra for probe Hilbert spaces.
//!
//! Every generator, jump operator, projector and Kraus element in the crate
//! is an [`Operator`]: a square complex matrix with finite entries. Tensor
//! products use lexicographic ordering, so probe 0 is the most significant
//! factor of a multi-probe basis index.

use std::ops::{Add, Deref, Mul, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Default bound on the multi-probe Hilbert-space dimension `d^N`.
pub const DEFAULT_DIM_CAP: usize = 4096;

/// Environment variable that overrides [`DEFAULT_DIM_CAP`].
pub const DIM_CAP_ENV: &str = "HNLSQEC_DIM_CAP";

const HERMITIAN_TOL: f64 = 1e-12;
const NORMALIZATION_TOL: f64 = 1e-12;

/// Upper bound on the Hilbert-space dimension any construction may reach.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DimCap(pub usize);

impl Default for DimCap {
    fn default() -> Self {
        DimCap(DEFAULT_DIM_CAP)
    }
}

impl DimCap {
    /// Reads the cap from `HNLSQEC_DIM_CAP`, falling back to the default
    /// when the variable is unset or unparsable.
    pub fn from_env() -> Self {
        std::env::var(DIM_CAP_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .map(DimCap)
            .unwrap_or_default()
    }

    pub fn check(self, dim: usize) -> Result<()> {
        if dim > self.0 {
            Err(Error::DimCapExceeded { dim, cap: self.0 })
        } else {
            Ok(())
        }
    }

    /// `d^n`, failing if it overflows or exceeds the cap.
    pub fn power(self, d: usize, n: usize) -> Result<usize> {
        let mut dim: usize = 1;
        for _ in 0..n {
            dim = dim
                .checked_mul(d)
                .filter(|&x| x <= self.0)
                .ok_or(Error::DimCapExceeded {
                    dim: usize::MAX,
                    cap: self.0,
                })?;
        }
        self.check(dim)?;
        Ok(dim)
    }
}

/// Square complex matrix with finite entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OperatorJson", into = "OperatorJson")]
pub struct Operator(CMatrix);

impl Operator {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidConfig(
                "operator dimension must be positive".into(),
            ));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("operator"));
        }
        Ok(Operator(m))
    }

    /// Builds an operator from row-major entries.
    pub fn from_row_slice(dim: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                actual: entries.len(),
            });
        }
        Self::new(CMatrix::from_row_slice(dim, dim, entries))
    }

    /// Row-major real entries.
    pub fn from_real_rows(dim: usize, entries: &[f64]) -> Result<Self> {
        let c: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_row_slice(dim, &c)
    }

    pub fn identity(dim: usize) -> Self {
        Operator(CMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Operator(CMatrix::zeros(dim, dim))
    }

    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        debug_assert_eq!(m.nrows(), m.ncols());
        Operator(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Operator {
        Operator(self.0.adjoint())
    }

    pub fn scaled(&self, c: C64) -> Operator {
        Operator(&self.0 * c)
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn kron(&self, other: &Operator) -> Operator {
        Operator(self.0.kronecker(&other.0))
    }

    /// `[A, B] = AB - BA`.
    pub fn commutator(&self, other: &Operator) -> Result<Operator> {
        check_dims(self.dim(), other.dim())?;
        Ok(Operator(&self.0 * &other.0 - &other.0 * &self.0))
    }

    /// `<bra| A |ket>`.
    pub fn matrix_element(&self, bra: &StateVector, ket: &StateVector) -> C64 {
        bra.0.dotc(&(&self.0 * &ket.0))
    }

    pub fn expectation(&self, psi: &StateVector) -> C64 {
        self.matrix_element(psi, psi)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        hermiticity_defect(&self.0) <= tol * self.max_abs().max(1.0)
    }
}

impl<'a> Add<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn add(self, rhs: &'a Operator) -> Operator {
        Operator(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn sub(self, rhs: &'a Operator) -> Operator {
        Operator(&self.0 - &rhs.0)
    }
}

impl<'a> Mul<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn mul(self, rhs: &'a Operator) -> Operator {
        Operator(&self.0 * &rhs.0)
    }
}

fn check_dims(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        Err(Error::DimensionMismatch { expected, actual })
    } else {
        Ok(())
    }
}

fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// JSON wire form: `{"dim": n, "re": [[..]], "im": [[..]]}`, row-major.
#[derive(Serialize, Deserialize)]
struct OperatorJson {
    dim: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl TryFrom<OperatorJson> for Operator {
    type Error = Error;

    fn try_from(j: OperatorJson) -> Result<Self> {
        let rows_ok =
            |rows: &Vec<Vec<f64>>| rows.len() == j.dim && rows.iter().all(|r| r.len() == j.dim);
        if !rows_ok(&j.re) || !rows_ok(&j.im) {
            return Err(Error::InvalidConfig(format!(
                "operator arrays \"re\"/\"im\" must both be {0}x{0}",
                j.dim
            )));
        }
        let m = CMatrix::from_fn(j.dim, j.dim, |r, c| C64::new(j.re[r][c], j.im[r][c]));
        Operator::new(m)
    }
}

impl From<Operator> for OperatorJson {
    fn from(op: Operator) -> Self {
        let n = op.dim();
        let re = (0..n)
            .map(|r| (0..n).map(|c| op.0[(r, c)].re).collect())
            .collect();
        let im = (0..n)
            .map(|r| (0..n).map(|c| op.0[(r, c)].im).collect())
            .collect();
        OperatorJson { dim: n, re, im }
    }
}

/// An [`Operator`] equal to its adjoint within `1e-12` relative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Operator", into = "Operator")]
pub struct HermitianOperator(Operator);

impl HermitianOperator {
    pub fn new(op: Operator) -> Result<Self> {
        let deviation = hermiticity_defect(op.matrix());
        if deviation > HERMITIAN_TOL * op.max_abs().max(1.0) {
            return Err(Error::NonHermitian { deviation });
        }
        Ok(HermitianOperator(op))
    }

    pub fn identity(dim: usize) -> Self {
        HermitianOperator(Operator::identity(dim))
    }

    pub fn zeros(dim: usize) -> Self {
        HermitianOperator(Operator::zeros(dim))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        HermitianOperator(Operator(CMatrix::from_fn(n, n, |r, c| {
            if r == c {
                C64::new(values[r], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })))
    }

    pub fn as_operator(&self) -> &Operator {
        &self.0
    }

    pub fn into_operator(self) -> Operator {
        self.0
    }

    /// Real linear combination `a*self + b*other`.
    pub fn combine(&self, a: f64, other: &HermitianOperator, b: f64) -> HermitianOperator {
        hermitian_part(&Operator(
            &self.0 .0 * C64::new(a, 0.0) + &other.0 .0 * C64::new(b, 0.0),
        ))
    }

    pub fn scale(&self, a: f64) -> HermitianOperator {
        HermitianOperator(self.0.scaled(C64::new(a, 0.0)))
    }

    /// Hilbert-Schmidt norm `sqrt(tr(A^2))`.
    pub fn hs_norm(&self) -> f64 {
        self.0 .0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl Deref for HermitianOperator {
    type Target = Operator;
    fn deref(&self) -> &Operator {
        &self.0
    }
}

impl TryFrom<Operator> for HermitianOperator {
    type Error = Error;
    fn try_from(op: Operator) -> Result<Self> {
        HermitianOperator::new(op)
    }
}

impl From<HermitianOperator> for Operator {
    fn from(h: HermitianOperator) -> Operator {
        h.0
    }
}

/// Unit-norm complex vector.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector(CVector);

impl StateVector {
    pub fn new(amplitudes: CVector) -> Result<Self> {
        if amplitudes
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite("state vector"));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(StateVector(amplitudes))
    }

    /// Rescales an arbitrary nonzero vector to unit norm.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotNormalized { norm });
        }
        Ok(StateVector(amplitudes / C64::new(norm, 0.0)))
    }

    pub fn from_slice(amplitudes: &[C64]) -> Result<Self> {
        Self::new(CVector::from_column_slice(amplitudes))
    }

    /// Computational basis state `|index>`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = CVector::zeros(dim);
        v[index] = C64::new(1.0, 0.0);
        StateVector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.0
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.0.dotc(&other.0)
    }

    pub fn kron(&self, other: &StateVector) -> StateVector {
        StateVector(self.0.kronecker(&other.0))
    }

    pub fn tensor_power(&self, n: usize) -> StateVector {
        let mut out = StateVector(CVector::from_element(1, C64::new(1.0, 0.0)));
        for _ in 0..n {
            out = out.kron(self);
        }
        out
    }

    /// `|psi><psi|`.
    pub fn projector(&self) -> Operator {
        Operator(&self.0 * self.0.adjoint())
    }
}

/// `(A + A^dagger) / 2`.
pub fn hermitian_part(a: &Operator) -> HermitianOperator {
    let m = a.matrix();
    let half = C64::new(0.5, 0.0);
    HermitianOperator(Operator(CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| {
        (m[(r, c)] + m[(c, r)].conj()) * half
    })))
}

/// `(A - A^dagger) / 2i`, which is Hermitian; `A = H(A) + i AH(A)`.
pub fn anti_hermitian_part(a: &Operator) -> HermitianOperator {
    let m = a.matrix();
    let inv_2i = C64::new(0.0, -0.5);
    HermitianOperator(Operator(CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| {
        (m[(r, c)] - m[(c, r)].conj()) * inv_2i
    })))
}

/// Hilbert-Schmidt inner product `tr(A^dagger B)`; the imaginary rounding
/// residue for Hermitian inputs is discarded.
pub fn hs_inner(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    Ok(a.matrix()
        .iter()
        .zip(b.matrix().iter())
        .map(|(x, y)| (x.conj() * y).re)
        .sum())
}

/// Embeds a single-probe operator as `1^(probe) (x) A (x) 1^(n_probes-probe-1)`.
///
/// `probe` is zero-based.
pub fn lift(a: &Operator, probe: usize, n_probes: usize, cap: DimCap) -> Result<Operator> {
    if probe >= n_probes {
        return Err(Error::ProbeIndex { probe, n_probes });
    }
    let d = a.dim();
    cap.power(d, n_probes)?;
    let left = d.pow(probe as u32);
    let right = d.pow((n_probes - probe - 1) as u32);
    let inner = a.matrix().kronecker(&CMatrix::identity(right, right));
    Ok(Operator(CMatrix::identity(left, left).kronecker(&inner)))
}

/// Largest singular value.
pub fn operator_norm(a: &Operator) -> f64 {
    a.matrix().singular_values().max()
}

/// Spectral decomposition of a Hermitian operator.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal, matching `values` order. Vectors inside a degenerate
    /// cluster are an arbitrary orthonormal basis of that cluster.
    pub vectors: Vec<StateVector>,
}

impl HermitianEigen {
    pub fn max(&self) -> (f64, &StateVector) {
        let i = self.values.len() - 1;
        (self.values[i], &self.vectors[i])
    }

    pub fn min(&self) -> (f64, &StateVector) {
        (self.values[0], &self.vectors[0])
    }
}

pub fn eig_hermitian(a: &HermitianOperator) -> Result<HermitianEigen> {
    let eig = SymmetricEigen::new(a.matrix().clone());
    let mut order: Vec<usize> = (0..a.dim()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut values = Vec::with_capacity(order.len());
    let mut vectors = Vec::with_capacity(order.len());
    for i in order {
        let v = eig.eigenvalues[i];
        if !v.is_finite() {
            return Err(Error::Numerical("eigenvalue is not finite".into()));
        }
        values.push(v);
        vectors.push(StateVector::normalized(
            eig.eigenvectors.column(i).into_owned(),
        )?);
    }
    Ok(HermitianEigen { values, vectors })
}

/// Applies a real function to the spectrum: `f(A) = sum f(l) |v><v|`.
pub fn hermitian_function<F>(a: &HermitianOperator, f: F) -> Result<Operator>
where
    F: Fn(f64) -> C64,
{
    let eig = eig_hermitian(a)?;
    let n = a.dim();
    let mut out = CMatrix::zeros(n, n);
    for (lambda, v) in eig.values.iter().zip(&eig.vectors) {
        let col = v.amplitudes();
        out += (col * col.adjoint()) * f(*lambda);
    }
    Ok(Operator(out))
}

/// Pauli matrices for qubit scenarios.
pub mod pauli {
    use super::{HermitianOperator, Operator, C64};

    fn op(entries: [C64; 4]) -> HermitianOperator {
        HermitianOperator::new(Operator::from_row_slice(2, &entries).expect("2x2"))
            .expect("Pauli matrices are Hermitian")
    }

    pub fn sigma_x() -> HermitianOperator {
        let (o, l) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        op([o, l, l, o])
    }

    pub fn sigma_y() -> HermitianOperator {
        let (o, i) = (C64::new(0.0, 0.0), C64::new(0.0, 1.0));
        op([o, -i, i, o])
    }

    pub fn sigma_z() -> HermitianOperator {
        let (o, l) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        op([l, o, o, -l])
    }
}

#[cfg(test)]
mod tests {
    use super::pauli::*;
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_operator(rng: &mut ChaCha8Rng, dim: usize) -> Operator {
        Operator::new(CMatrix::from_fn(dim, dim, |_, _| {
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        }))
        .unwrap()
    }

    fn three_level_h() -> HermitianOperator {
        let (o, i) = (c(0.0, 0.0), c(0.0, 1.0));
        HermitianOperator::new(Operator::from_row_slice(3, &[o, o, i, o, o, o, -i, o, o]).unwrap())
            .unwrap()
    }

    #[test]
    fn hermitian_part_matches_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_operator(&mut rng, 4);
        let h = hermitian_part(&a);
        for r in 0..4 {
            for col in 0..4 {
                let expected = (a.matrix()[(r, col)] + a.matrix()[(col, r)].conj()) / 2.0;
                assert!((h.matrix()[(r, col)] - expected).norm() < 1e-15);
            }
        }
        assert_eq!(
            hermitian_part(&Operator::identity(3)).as_operator(),
            &Operator::identity(3)
        );
        let y = sigma_y();
        assert_eq!(&hermitian_part(&y), &y);
    }

    #[test]
    fn anti_hermitian_part_of_hermitian_is_zero() {
        let ah = anti_hermitian_part(&sigma_x());
        assert_eq!(ah.max_abs(), 0.0);
        // i * sigma_y is purely anti-Hermitian; its AH part is sigma_y.
        let a = sigma_y().scaled(c(0.0, 1.0));
        let ah = anti_hermitian_part(&a);
        assert!((ah.as_operator() - sigma_y().as_operator()).max_abs() < 1e-15);
    }

    #[test]
    fn decomposition_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dim in 1..6 {
            let a = random_operator(&mut rng, dim);
            let back =
                hermitian_part(&a).as_operator() + &anti_hermitian_part(&a).scaled(c(0.0, 1.0));
            assert!((&back - &a).max_abs() <= 1e-14);
        }
    }

    #[test]
    fn hs_inner_examples() {
        assert_eq!(hs_inner(&sigma_z(), &sigma_x()).unwrap(), 0.0);
        assert_eq!(
            hs_inner(
                &HermitianOperator::identity(5),
                &HermitianOperator::identity(5)
            )
            .unwrap(),
            5.0
        );
        let l3 = HermitianOperator::new(
            Operator::from_real_rows(3, &[0., 0., 1., 0., 0., 0., 1., 0., 0.]).unwrap(),
        )
        .unwrap();
        // tr(H L3) = i*1 + (-i)*1 = 0 by direct computation.
        assert_eq!(hs_inner(&three_level_h(), &l3).unwrap(), 0.0);
        assert!(matches!(
            hs_inner(&sigma_z(), &HermitianOperator::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn lift_examples() {
        let cap = DimCap::default();
        let z = sigma_z();
        assert_eq!(lift(&z, 0, 1, cap).unwrap(), *z.as_operator());
        // second probe, basis (0,1) -> index 1
        let lz = lift(&z, 1, 2, cap).unwrap();
        assert_eq!(lz.matrix()[(1, 1)], c(-1.0, 0.0));
        assert_eq!(lz.matrix()[(2, 2)], c(1.0, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (a, b) = (random_operator(&mut rng, 3), random_operator(&mut rng, 3));
        let comm = lift(&a, 0, 2, cap)
            .unwrap()
            .commutator(&lift(&b, 1, 2, cap).unwrap())
            .unwrap();
        assert!(comm.max_abs() < 1e-14);
        assert!(matches!(lift(&z, 2, 2, cap), Err(Error::ProbeIndex { .. })));
        assert!(matches!(
            lift(&z, 0, 13, cap),
            Err(Error::DimCapExceeded { .. })
        ));
    }

    #[test]
    fn operator_norm_examples() {
        assert!((operator_norm(&three_level_h()) - 1.0).abs() < 1e-12);
        assert!((operator_norm(&Operator::identity(4)) - 1.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_operator(&mut rng, 4);
        let z = c(-1.7, 0.4);
        assert!((operator_norm(&a.scaled(z)) - z.norm() * operator_norm(&a)).abs() < 1e-12);
    }

    #[test]
    fn eig_of_three_level_hamiltonian() {
        let eig = eig_hermitian(&three_level_h()).unwrap();
        for (got, want) in eig.values.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let cw = StateVector::from_slice(&[c(s, 0.0), c(0.0, 0.0), c(0.0, -s)]).unwrap();
        let ccw = StateVector::from_slice(&[c(s, 0.0), c(0.0, 0.0), c(0.0, s)]).unwrap();
        assert!((eig.max().1.inner(&cw).norm() - 1.0).abs() < 1e-12);
        assert!((eig.min().1.inner(&ccw).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eig_of_diagonal_is_sorted() {
        let eig = eig_hermitian(&HermitianOperator::diagonal(&[3.0, -2.0, 0.5])).unwrap();
        assert_eq!(eig.values, vec![-2.0, 0.5, 3.0]);
    }

    #[test]
    fn eig_reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = hermitian_part(&random_operator(&mut rng, 5));
        let eig = eig_hermitian(&a).unwrap();
        let mut back = CMatrix::zeros(5, 5);
        for (l, v) in eig.values.iter().zip(&eig.vectors) {
            back += v.amplitudes() * v.amplitudes().adjoint() * c(*l, 0.0);
        }
        let scale = operator_norm(&a);
        assert!(
            (back - a.matrix())
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max)
                <= 1e-10 * scale
        );
        for (i, u) in eig.vectors.iter().enumerate() {
            for (j, v) in eig.vectors.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((u.inner(v) - c(want, 0.0)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn non_hermitian_rejected() {
        let a = Operator::from_real_rows(2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            HermitianOperator::new(a),
            Err(Error::NonHermitian { .. })
        ));
    }

    #[test]
    fn invalid_operators_rejected() {
        assert!(matches!(
            Operator::new(CMatrix::zeros(2, 3)),
            Err(Error::NotSquare { .. })
        ));
        let mut m = CMatrix::identity(2, 2);
        m[(0, 1)] = c(f64::NAN, 0.0);
        assert!(matches!(Operator::new(m), Err(Error::NonFinite(_))));
        assert!(StateVector::from_slice(&[c(1.0, 0.0), c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn json_round_trip_and_schema() {
        let y = sigma_y();
        let json = serde_json::to_value(y.as_operator()).unwrap();
        assert_eq!(json["dim"], 2);
        assert_eq!(json["im"][0][1], -1.0);
        let back: Operator = serde_json::from_value(json).unwrap();
        assert_eq!(&back, y.as_operator());
        let bad = r#"{"dim": 2, "re": [[0,1],[1]], "im": [[0,0],[0,0]]}"#;
        assert!(serde_json::from_str::<Operator>(bad).is_err());
        let non_herm = r#"{"dim": 2, "re": [[0,1],[0,0]], "im": [[0,0],[0,0]]}"#;
        assert!(serde_json::from_str::<HermitianOperator>(non_herm).is_err());
    }

    #[test]
    fn dim_cap_power() {
        let cap = DimCap(27);
        assert_eq!(cap.power(3, 3).unwrap(), 27);
        assert!(cap.power(3, 4).is_err());
        assert!(DimCap::default().power(2, 200).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn operator(dim: usize) -> impl Strategy<Value = Operator> {
            prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), dim * dim).prop_map(move |v| {
                let entries: Vec<C64> = v.into_iter().map(|(a, b)| C64::new(a, b)).collect();
                Operator::from_row_slice(dim, &entries).unwrap()
            })
        }

        proptest! {
            #[test]
            fn hs_inner_symmetric_and_positive(a in operator(3), b in operator(3)) {
                let (ha, hb) = (hermitian_part(&a), hermitian_part(&b));
                let ab = hs_inner(&ha, &hb).unwrap();
                let ba = hs_inner(&hb, &ha).unwrap();
                prop_assert!((ab - ba).abs() <= 1e-12 * (1.0 + ab.abs()));
                prop_assert!(hs_inner(&ha, &ha).unwrap() >= 0.0);
            }

            #[test]
            fn lift_preserves_norm(a in operator(2), probe in 0usize..3) {
                let lifted = lift(&a, probe, 3, DimCap::default()).unwrap();
                prop_assert!((operator_norm(&lifted) - operator_norm(&a)).abs() <= 1e-12 * (1.0 + operator_norm(&a)));
            }

            #[test]
            fn eigenpairs_satisfy_equation(a in operator(4)) {
                let h = hermitian_part(&a);
                let eig = eig_hermitian(&h).unwrap();
                let scale = operator_norm(&h).max(1e-300);
                for (l, v) in eig.values.iter().zip(&eig.vectors) {
                    let r = h.matrix() * v.amplitudes() - v.amplitudes() * C64::new(*l, 0.0);
                    prop_assert!(r.norm() <= 1e-10 * scale.max(1.0));
                }
            }
        }
    }
}
