//! Ancilla-free two-dimensional codes, their error-correction conditions,
//! the canonical recovery channel and the effective signal Hamiltonian.
//!
//! Codes are spanned by two tensor-power states `|a>^N` and `|b>^N`. For
//! qubit probes `a, b` are the extremal eigenvectors of the Hamiltonian
//! component perpendicular to the Lindblad span; for the three-level example
//! they are the `+-1` eigenvectors of its Hamiltonian.

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::error::{Error, Result};
use crate::hnls::{build_span, decompose, PerpDecomposition, DEFAULT_VERDICT_TOL};
use crate::lindblad::{DensityState, LindbladModel};
use crate::operators::{
    eig_hermitian, hermitian_part, operator_norm, CMatrix, DimCap, HermitianOperator, Operator,
    StateVector, C64,
};

/// Absolute tolerance on the condition residuals (operator norms).
pub const KL_TOL: f64 = 1e-8;

/// Error Gram eigenvalues below this are treated as vanishing errors.
pub const GRAM_CUTOFF: f64 = 1e-10;

const ORTHOGONALITY_TOL: f64 = 1e-12;

/// Two-dimensional code space inside `N` probes of dimension `d`.
#[derive(Clone, Debug)]
pub struct CodeSpace {
    n_probes: usize,
    d: usize,
    logical: [StateVector; 2],
    projector: Operator,
    complement: Operator,
}

impl CodeSpace {
    /// Code spanned by two orthonormal logical states of `d^N` amplitudes.
    pub fn from_logical_states(
        logical0: StateVector,
        logical1: StateVector,
        d: usize,
        n_probes: usize,
    ) -> Result<Self> {
        let dim = d
            .checked_pow(n_probes as u32)
            .ok_or(Error::DimCapExceeded {
                dim: usize::MAX,
                cap: usize::MAX,
            })?;
        for l in [&logical0, &logical1] {
            if l.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: l.dim(),
                });
            }
        }
        let overlap = logical0.inner(&logical1).norm();
        if overlap > ORTHOGONALITY_TOL {
            return Err(Error::LogicalOverlap(overlap));
        }
        let projector = &logical0.projector() + &logical1.projector();
        let complement = &Operator::identity(dim) - &projector;
        Ok(CodeSpace {
            n_probes,
            d,
            logical: [logical0, logical1],
            projector,
            complement,
        })
    }

    /// `|a>^N, |b>^N` without any restriction on `N`.
    pub fn tensor_power(
        a: &StateVector,
        b: &StateVector,
        n_probes: usize,
        cap: DimCap,
    ) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                actual: b.dim(),
            });
        }
        cap.power(a.dim(), n_probes)?;
        Self::from_logical_states(
            a.tensor_power(n_probes),
            b.tensor_power(n_probes),
            a.dim(),
            n_probes,
        )
    }

    pub fn n_probes(&self) -> usize {
        self.n_probes
    }

    /// Single-probe dimension.
    pub fn d(&self) -> usize {
        self.d
    }

    /// Register dimension `d^N`.
    pub fn dim(&self) -> usize {
        self.projector.dim()
    }

    pub fn logical0(&self) -> &StateVector {
        &self.logical[0]
    }

    pub fn logical1(&self) -> &StateVector {
        &self.logical[1]
    }

    /// `Pi_C`.
    pub fn projector(&self) -> &Operator {
        &self.projector
    }

    /// `Pi_E = 1 - Pi_C`.
    pub fn complement(&self) -> &Operator {
        &self.complement
    }

    /// `dim x 2` isometry whose columns are the logical states.
    pub fn basis(&self) -> CMatrix {
        CMatrix::from_columns(&[
            self.logical[0].amplitudes().clone(),
            self.logical[1].amplitudes().clone(),
        ])
    }

    /// Matrix of `op` in the logical basis, `<i_L| op |j_L>`.
    pub fn logical_block(&self, op: &CMatrix) -> CMatrix {
        let v = self.basis();
        v.adjoint() * op * v
    }

    fn check_model(&self, model: &LindbladModel) -> Result<()> {
        if model.d() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                actual: model.d(),
            });
        }
        Ok(())
    }

    fn cap(&self) -> DimCap {
        DimCap(self.dim())
    }
}

/// Spectral code `(|psi+><psi+|)^N + (|psi-><psi-|)^N` for qubit probes.
pub fn build_qubit_code(
    perp: &PerpDecomposition,
    n_probes: usize,
    cap: DimCap,
) -> Result<CodeSpace> {
    let d = perp.h_perp.dim();
    if d != 2 {
        return Err(Error::NotQubit(d));
    }
    if n_probes < 3 {
        return Err(Error::TooFewProbes(n_probes));
    }
    let h_norm = operator_norm(&(perp.h_par.as_operator() + perp.h_perp.as_operator()));
    let (plus, minus) = match (&perp.psi_plus, &perp.psi_minus) {
        (Some(p), Some(m)) if perp.perp_norm > DEFAULT_VERDICT_TOL * h_norm => (p, m),
        _ => return Err(Error::NoPerpendicularComponent),
    };
    CodeSpace::tensor_power(plus, minus, n_probes, cap)
}

/// Circular states `(1, 0, +-i)/sqrt(2)` of the three-level example.
pub fn circular_states() -> (StateVector, StateVector) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let ccw =
        StateVector::from_slice(&[C64::new(s, 0.0), C64::new(0.0, 0.0), C64::new(0.0, s)]).unwrap();
    let cw = StateVector::from_slice(&[C64::new(s, 0.0), C64::new(0.0, 0.0), C64::new(0.0, -s)])
        .unwrap();
    (ccw, cw)
}

/// Three-level example code: `|0_L> = |ccw>^N`, `|1_L> = |cw>^N`.
pub fn build_example_code(n_probes: usize, cap: DimCap) -> Result<CodeSpace> {
    if n_probes < 3 {
        return Err(Error::TooFewProbes(n_probes));
    }
    let (ccw, cw) = circular_states();
    CodeSpace::tensor_power(&ccw, &cw, n_probes, cap)
}

/// Which code a scenario uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CodeKind {
    /// Spectral code from the perpendicular Hamiltonian (qubits only).
    AutoQubit,
    /// Circular-state code of the three-level example.
    #[serde(rename = "paper-example")]
    Circular,
    None,
}

impl CodeKind {
    /// Builds the code, or `Ok(None)` for [`CodeKind::None`].
    pub fn build(
        self,
        model: &LindbladModel,
        n_probes: usize,
        cap: DimCap,
    ) -> Result<Option<CodeSpace>> {
        match self {
            CodeKind::None => Ok(None),
            CodeKind::Circular => build_example_code(n_probes, cap).map(Some),
            CodeKind::AutoQubit => {
                let perp = decompose(model.hamiltonian(), &build_span(model))?;
                build_qubit_code(&perp, n_probes, cap).map(Some)
            }
        }
    }
}

/// Numerical check of the error-correction and signal conditions.
///
/// Index `i = probe * R + k` enumerates the lifted jump operators.
#[derive(Clone, Debug)]
pub struct KlReport {
    pub n_probes: usize,
    pub rank: usize,
    /// `lambda_k^(n) = tr(Pi_C L_k^(n) Pi_C) / 2`.
    pub lambda: Vec<C64>,
    /// `mu_jk^(nm) = tr(Pi_C L_j^(n)dag L_k^(m) Pi_C) / 2`.
    pub mu: CMatrix,
    /// `max ||Pi_C L Pi_C - lambda Pi_C||`.
    pub cond1_residual: f64,
    /// `max ||Pi_C L^dag L' Pi_C - mu Pi_C||`.
    pub cond2_residual: f64,
    /// Whether `Pi_C H_tot Pi_C` is not proportional to `Pi_C`.
    pub signal_ok: bool,
    /// Eigenvalue gap of the logical effective Hamiltonian.
    pub signal_gap: f64,
}

impl KlReport {
    pub fn passes(&self) -> bool {
        self.cond1_residual <= KL_TOL && self.cond2_residual <= KL_TOL && self.signal_ok
    }

    /// `(probe, k)` for a flat jump index.
    pub fn jump_index(&self, i: usize) -> (usize, usize) {
        (i / self.rank.max(1), i % self.rank.max(1))
    }

    /// Error Gram matrix `mu_ij - conj(lambda_i) lambda_j`.
    pub fn error_gram(&self) -> CMatrix {
        let n = self.lambda.len();
        CMatrix::from_fn(n, n, |i, j| {
            self.mu[(i, j)] - self.lambda[i].conj() * self.lambda[j]
        })
    }

    /// JSON report; residuals use 3 significant digits in scientific
    /// notation.
    pub fn to_json_string(&self) -> String {
        let lambda = self
            .lambda
            .iter()
            .enumerate()
            .map(|(i, z)| {
                let (n, k) = self.jump_index(i);
                LambdaJson {
                    probe: n + 1,
                    k: k + 1,
                    re: sig12(z.re),
                    im: sig12(z.im),
                }
            })
            .collect();
        let mut mu = Vec::new();
        for i in 0..self.lambda.len() {
            for j in 0..self.lambda.len() {
                let ((n, a), (m, b)) = (self.jump_index(i), self.jump_index(j));
                let z = self.mu[(i, j)];
                mu.push(MuJson {
                    n: n + 1,
                    j: a + 1,
                    m: m + 1,
                    k: b + 1,
                    re: sig12(z.re),
                    im: sig12(z.im),
                });
            }
        }
        let out = KlReportJson {
            n_probes: self.n_probes,
            rank: self.rank,
            cond1_residual: sci3(self.cond1_residual),
            cond2_residual: sci3(self.cond2_residual),
            signal_ok: self.signal_ok,
            signal_gap: sig12(self.signal_gap),
            passes: self.passes(),
            lambda,
            mu,
        };
        serde_json::to_string_pretty(&out).expect("report serializes")
    }
}

#[derive(Serialize)]
struct KlReportJson {
    n_probes: usize,
    rank: usize,
    cond1_residual: Box<RawValue>,
    cond2_residual: Box<RawValue>,
    signal_ok: bool,
    signal_gap: Box<RawValue>,
    passes: bool,
    lambda: Vec<LambdaJson>,
    mu: Vec<MuJson>,
}

#[derive(Serialize)]
struct LambdaJson {
    probe: usize,
    k: usize,
    re: Box<RawValue>,
    im: Box<RawValue>,
}

#[derive(Serialize)]
struct MuJson {
    n: usize,
    j: usize,
    m: usize,
    k: usize,
    re: Box<RawValue>,
    im: Box<RawValue>,
}

/// Scientific notation with 3 significant digits, kept verbatim in JSON.
pub(crate) fn sci3(x: f64) -> Box<RawValue> {
    RawValue::from_string(format!("{x:.2e}")).expect("formatted float is valid JSON")
}

fn sig12(x: f64) -> Box<RawValue> {
    RawValue::from_string(format!("{x:.11e}")).expect("formatted float is valid JSON")
}

fn lifted_times_basis(code: &CodeSpace, model: &LindbladModel) -> Result<Vec<CMatrix>> {
    let v = code.basis();
    Ok(model
        .lifted_lindblads(code.n_probes(), code.cap())?
        .into_iter()
        .map(|j| j.op.matrix() * &v)
        .collect())
}

fn norm_2x2(m: &CMatrix) -> f64 {
    operator_norm(&Operator::from_matrix_unchecked(m.clone()))
}

pub fn check_kl(code: &CodeSpace, model: &LindbladModel) -> Result<KlReport> {
    code.check_model(model)?;
    let v = code.basis();
    let lv = lifted_times_basis(code, model)?;
    let half = C64::new(0.5, 0.0);
    let id2 = CMatrix::identity(2, 2);

    let mut lambda = Vec::with_capacity(lv.len());
    let mut cond1: f64 = 0.0;
    for w in &lv {
        let block = v.adjoint() * w;
        let l = block.trace() * half;
        cond1 = cond1.max(norm_2x2(&(block - &id2 * l)));
        lambda.push(l);
    }

    let n = lv.len();
    let mut mu = CMatrix::zeros(n, n);
    let mut cond2: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let block = lv[i].adjoint() * &lv[j];
            let m = block.trace() * half;
            cond2 = cond2.max(norm_2x2(&(block - &id2 * m)));
            mu[(i, j)] = m;
        }
    }

    let h_block = code.logical_block(
        model
            .total_hamiltonian(code.n_probes(), code.cap())?
            .matrix(),
    );
    let eig = eig_hermitian(&hermitian_part(&Operator::from_matrix_unchecked(h_block)))?;
    let signal_gap = eig.max().0 - eig.min().0;

    Ok(KlReport {
        n_probes: code.n_probes(),
        rank: model.rank(),
        lambda,
        mu,
        cond1_residual: cond1,
        cond2_residual: cond2,
        signal_ok: signal_gap > KL_TOL,
        signal_gap,
    })
}

/// Detected-error operator `E_k^(n) = Pi_E L_k^(n) Pi_C sqrt(dt)`.
#[derive(Clone, Debug)]
pub struct ErrorOperator {
    pub probe: usize,
    pub index: usize,
    pub op: Operator,
}

pub fn error_operators(
    code: &CodeSpace,
    model: &LindbladModel,
    dt: f64,
) -> Result<Vec<ErrorOperator>> {
    code.check_model(model)?;
    let (pc, pe) = (code.projector().matrix(), code.complement().matrix());
    let root = C64::new(dt.sqrt(), 0.0);
    Ok(model
        .lifted_lindblads(code.n_probes(), code.cap())?
        .into_iter()
        .map(|j| ErrorOperator {
            probe: j.probe,
            index: j.index,
            op: Operator::from_matrix_unchecked(pe * j.op.matrix() * pc * root),
        })
        .collect())
}

/// Largest entrywise deviation of `Pi_C E_j^dag E_k Pi_C` from
/// `(mu_jk - conj(lambda_j) lambda_k) dt Pi_C` over all index pairs.
pub fn correctability_defect(
    code: &CodeSpace,
    model: &LindbladModel,
    report: &KlReport,
    dt: f64,
) -> Result<f64> {
    let errors = error_operators(code, model, dt)?;
    let pc = code.projector().matrix();
    let gram = report.error_gram();
    let mut worst: f64 = 0.0;
    for (i, ei) in errors.iter().enumerate() {
        for (j, ej) in errors.iter().enumerate() {
            let lhs = pc * ei.op.matrix().adjoint() * ej.op.matrix() * pc;
            let rhs = pc * (gram[(i, j)] * C64::new(dt, 0.0));
            worst = worst.max((lhs - rhs).iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
    }
    Ok(worst)
}

/// Recovery map `rho -> sum_a R_a rho R_a^dag`.
#[derive(Clone, Debug)]
pub struct RecoveryChannel {
    /// `Pi_C` first, then one element per syndrome, then the completion
    /// element acting as identity on the uncorrectable subspace (if any).
    pub kraus: Vec<Operator>,
    pub syndromes: usize,
    pub source: String,
}

impl RecoveryChannel {
    pub(crate) fn apply_matrix(&self, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(rho.nrows(), rho.ncols());
        for k in &self.kraus {
            let k = k.matrix();
            out += k * rho * k.adjoint();
        }
        out
    }

    pub fn apply(&self, rho: &DensityState) -> Result<DensityState> {
        let dim = self.kraus[0].dim();
        if rho.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: rho.dim(),
            });
        }
        Ok(DensityState::from_matrix_unchecked(
            self.apply_matrix(rho.matrix()),
        ))
    }

    /// `|| sum R^dag R - 1 ||`.
    pub fn completeness_defect(&self) -> f64 {
        let dim = self.kraus[0].dim();
        let mut sum = -CMatrix::identity(dim, dim);
        for k in &self.kraus {
            sum += k.matrix().adjoint() * k.matrix();
        }
        operator_norm(&Operator::from_matrix_unchecked(sum))
    }
}

/// Canonical recovery from the orthogonalized first-order errors.
///
/// The `sqrt(dt)` factor is dropped from the error operators, so the
/// recovery does not depend on the slice length.
pub fn build_recovery(code: &CodeSpace, model: &LindbladModel) -> Result<RecoveryChannel> {
    let report = check_kl(code, model)?;
    if report.cond1_residual > KL_TOL || report.cond2_residual > KL_TOL {
        return Err(Error::KnillLaflamme {
            cond1: report.cond1_residual,
            cond2: report.cond2_residual,
        });
    }
    let dim = code.dim();
    let pc = code.projector().matrix();
    let errors = error_operators(code, model, 1.0)?;

    let mut kraus = vec![code.projector().clone()];
    let mut covered = pc.clone();
    let mut syndromes = 0;
    if !errors.is_empty() {
        let gram = hermitian_part(&Operator::from_matrix_unchecked(report.error_gram()));
        let eig = eig_hermitian(&gram)?;
        for (g, u) in eig.values.iter().zip(&eig.vectors) {
            if *g <= GRAM_CUTOFF {
                continue;
            }
            let mut f = CMatrix::zeros(dim, dim);
            for (e, c) in errors.iter().zip(u.amplitudes().iter()) {
                f += e.op.matrix() * *c;
            }
            let r = pc * f.adjoint() / C64::new(g.sqrt(), 0.0);
            covered += r.adjoint() * &r;
            kraus.push(Operator::from_matrix_unchecked(r));
            syndromes += 1;
        }
    }

    let rest = hermitian_part(&Operator::from_matrix_unchecked(
        CMatrix::identity(dim, dim) - covered,
    ));
    let rest_eig = eig_hermitian(&rest)?;
    let excess = -rest_eig.min().0;
    if excess > 1e-9 {
        return Err(Error::RecoveryNotContractive(excess));
    }
    let mut fail = CMatrix::zeros(dim, dim);
    for (val, vec) in rest_eig.values.iter().zip(&rest_eig.vectors) {
        if *val > 0.5 {
            fail += vec.amplitudes() * vec.amplitudes().adjoint();
        }
    }
    if fail.iter().any(|z| z.norm() > 0.0) {
        kraus.push(Operator::from_matrix_unchecked(fail));
    }
    Ok(RecoveryChannel {
        kraus,
        syndromes,
        source: format!(
            "code projector + {syndromes} syndrome isometries from the error Gram matrix \
             (cutoff {GRAM_CUTOFF:e}) + identity on the uncorrectable remainder"
        ),
    })
}

#[derive(Clone, Debug)]
pub struct EffectiveModel {
    /// `<i_L| H_tot |j_L>`.
    pub logical: HermitianOperator,
    /// `Pi_C H_tot Pi_C` on the full register.
    pub full: HermitianOperator,
    pub gap: f64,
}

pub fn effective_hamiltonian(code: &CodeSpace, model: &LindbladModel) -> Result<EffectiveModel> {
    code.check_model(model)?;
    let h_tot = model.total_hamiltonian(code.n_probes(), code.cap())?;
    let pc = code.projector().matrix();
    let full = hermitian_part(&Operator::from_matrix_unchecked(pc * h_tot.matrix() * pc));
    let logical = hermitian_part(&Operator::from_matrix_unchecked(
        code.logical_block(h_tot.matrix()),
    ));
    let eig = eig_hermitian(&logical)?;
    Ok(EffectiveModel {
        gap: eig.max().0 - eig.min().0,
        logical,
        full,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::builtin::*;
    use crate::operators::pauli::*;

    fn cap() -> DimCap {
        DimCap::default()
    }

    fn qubit_code(model: &LindbladModel, n: usize) -> CodeSpace {
        let perp = decompose(model.hamiltonian(), &build_span(model)).unwrap();
        build_qubit_code(&perp, n, cap()).unwrap()
    }

    #[test]
    fn dephasing_code_is_plus_minus_repetition() {
        let code = qubit_code(&qubit_dephasing(), 3);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = StateVector::from_slice(&[C64::new(s, 0.0), C64::new(s, 0.0)]).unwrap();
        let minus = StateVector::from_slice(&[C64::new(s, 0.0), C64::new(-s, 0.0)]).unwrap();
        assert!((code.logical0().inner(&plus.tensor_power(3)).norm() - 1.0).abs() < 1e-12);
        assert!((code.logical1().inner(&minus.tensor_power(3)).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qubit_code_gates() {
        let model = qubit_dephasing_parallel();
        let perp = decompose(model.hamiltonian(), &build_span(&model)).unwrap();
        assert!(matches!(
            build_qubit_code(&perp, 3, cap()),
            Err(Error::NoPerpendicularComponent)
        ));
        let model = qubit_dephasing();
        let perp = decompose(model.hamiltonian(), &build_span(&model)).unwrap();
        assert!(matches!(
            build_qubit_code(&perp, 2, cap()),
            Err(Error::TooFewProbes(2))
        ));
        let model = three_level();
        let perp = decompose(model.hamiltonian(), &build_span(&model)).unwrap();
        assert!(matches!(
            build_qubit_code(&perp, 3, cap()),
            Err(Error::NotQubit(3))
        ));
    }

    #[test]
    fn computational_repetition_projector() {
        let code = CodeSpace::tensor_power(
            &StateVector::basis(2, 0),
            &StateVector::basis(2, 1),
            3,
            cap(),
        )
        .unwrap();
        let mut want = CMatrix::zeros(8, 8);
        want[(0, 0)] = C64::new(1.0, 0.0);
        want[(7, 7)] = C64::new(1.0, 0.0);
        assert_eq!(code.projector().matrix(), &want);
    }

    #[test]
    fn example_code_structure() {
        let code = build_example_code(3, cap()).unwrap();
        assert_eq!(code.logical0().inner(code.logical1()), C64::new(0.0, 0.0));
        let pc = code.projector();
        assert!((&(pc * pc) - pc).max_abs() < 1e-10);
        assert!((pc.trace().re - 2.0).abs() < 1e-12);
        assert!(pc.is_hermitian(1e-12));
        assert!(matches!(
            build_example_code(2, cap()),
            Err(Error::TooFewProbes(2))
        ));
    }

    #[test]
    fn example_code_satisfies_conditions() {
        let code = build_example_code(3, cap()).unwrap();
        let report = check_kl(&code, &three_level()).unwrap();
        assert!(report.cond1_residual <= 1e-10);
        assert!(report.cond2_residual <= 1e-10);
        assert!(report.signal_ok);
        assert!((report.signal_gap - 6.0).abs() < 1e-9);
        // mu is Hermitian under the conjugate swap
        assert!((report.mu.clone() - report.mu.adjoint()).norm() < 1e-10);
    }

    #[test]
    fn qubit_dephasing_code_satisfies_conditions() {
        let model = qubit_dephasing();
        let report = check_kl(&qubit_code(&model, 3), &model).unwrap();
        assert!(report.cond1_residual <= 1e-10 && report.cond2_residual <= 1e-10);
        // <+|Z|+> = <-|Z|-> = 0
        assert!(report.lambda.iter().all(|l| l.norm() < 1e-12));
    }

    #[test]
    fn computational_code_fails_under_dephasing() {
        // Z^(n) distinguishes |000> from |111>, so the first condition fails
        // with residual 1, while H = Z leaves a full signal gap of 2N.
        let model = qubit_dephasing_parallel();
        let code = CodeSpace::tensor_power(
            &StateVector::basis(2, 0),
            &StateVector::basis(2, 1),
            3,
            cap(),
        )
        .unwrap();
        let report = check_kl(&code, &model).unwrap();
        assert!((report.cond1_residual - 1.0).abs() < 1e-12);
        assert!(report.signal_ok);
        assert!((report.signal_gap - 6.0).abs() < 1e-12);
        assert!(!report.passes());
        assert!(matches!(
            build_recovery(&code, &model),
            Err(Error::KnillLaflamme { .. })
        ));
    }

    #[test]
    fn two_probe_example_code_violates_second_condition() {
        let (ccw, cw) = circular_states();
        let code = CodeSpace::tensor_power(&ccw, &cw, 2, cap()).unwrap();
        let report = check_kl(&code, &three_level()).unwrap();
        assert!(report.cond1_residual <= 1e-10);
        assert!(report.cond2_residual > 0.5);
    }

    #[test]
    fn noiseless_recovery_is_projector_plus_completion() {
        let model = LindbladModel::noiseless(three_level().hamiltonian().clone(), "h");
        let code = build_example_code(3, cap()).unwrap();
        let rec = build_recovery(&code, &model).unwrap();
        assert_eq!(rec.syndromes, 0);
        assert_eq!(rec.kraus.len(), 2);
        assert!(rec.completeness_defect() < 1e-10);
        let psi = code.logical0();
        let out = rec.apply(&DensityState::pure(psi)).unwrap();
        assert!((out.fidelity_with_pure(psi) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn recovery_is_trace_preserving() {
        for (model, code) in [
            (three_level(), build_example_code(3, cap()).unwrap()),
            (
                qubit_rank_one_pauli(),
                qubit_code(&qubit_rank_one_pauli(), 4),
            ),
        ] {
            let rec = build_recovery(&code, &model).unwrap();
            assert!(rec.completeness_defect() < 1e-9);
        }
    }

    #[test]
    fn circular_code_recovery_syndrome_count() {
        // L1 and L2 act identically on the code up to a phase, so each probe
        // contributes two independent syndromes.
        let rec = build_recovery(&build_example_code(3, cap()).unwrap(), &three_level()).unwrap();
        assert_eq!(rec.syndromes, 6);
    }

    #[test]
    fn effective_hamiltonian_examples() {
        let eff =
            effective_hamiltonian(&build_example_code(3, cap()).unwrap(), &three_level()).unwrap();
        assert!((eff.gap - 6.0).abs() < 1e-9);

        let model = qubit_rank_one_pauli();
        let eff = effective_hamiltonian(&qubit_code(&model, 3), &model).unwrap();
        assert!((eff.gap - 6.0).abs() < 1e-9);

        // perpendicular part vanishes on this code: H = Z has zero
        // expectation in |+>, |->
        let code = qubit_code(&qubit_dephasing(), 3);
        let model = LindbladModel::noiseless(sigma_z(), "z");
        assert!(effective_hamiltonian(&code, &model).unwrap().gap < 1e-12);
    }

    #[test]
    fn qubit_effective_spectrum_is_plus_minus_n_perp_norm() {
        let model = qubit_rank_one_pauli();
        let perp = decompose(model.hamiltonian(), &build_span(&model)).unwrap();
        for n in 3..=5 {
            let code = build_qubit_code(&perp, n, cap()).unwrap();
            let eff = effective_hamiltonian(&code, &model).unwrap();
            let eig = eig_hermitian(&eff.logical).unwrap();
            let shift = n as f64 * perp.h_par.expectation(perp.psi_plus.as_ref().unwrap()).re;
            assert!((eig.max().0 - shift - n as f64 * perp.perp_norm).abs() < 1e-9);
            assert!((eig.min().0 - shift + n as f64 * perp.perp_norm).abs() < 1e-9);
        }
    }

    #[test]
    fn off_diagonal_logical_elements_vanish() {
        let code = build_example_code(3, cap()).unwrap();
        for j in three_level().lifted_lindblads(3, cap()).unwrap() {
            assert!(j.op.matrix_element(code.logical0(), code.logical1()).norm() < 1e-14);
        }
    }

    #[test]
    fn correctability_identity_holds() {
        let model = three_level();
        let code = build_example_code(3, cap()).unwrap();
        let report = check_kl(&code, &model).unwrap();
        for dt in [1e-2, 1e-3] {
            assert!(correctability_defect(&code, &model, &report, dt).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn report_json_formats_residuals() {
        let model = three_level();
        let report = check_kl(&build_example_code(3, cap()).unwrap(), &model).unwrap();
        let text = report.to_json_string();
        assert!(text.contains("\"signal_gap\": 6.00000000000e0"), "{text}");
        assert!(text.contains("\"cond1_residual\": 0.00e0"), "{text}");
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["lambda"].as_array().unwrap().len(), 9);
        assert_eq!(back["mu"].as_array().unwrap().len(), 81);
        assert_eq!(back["passes"], true);
    }

    #[test]
    fn mismatched_model_rejected() {
        let code = build_example_code(3, cap()).unwrap();
        assert!(matches!(
            check_kl(&code, &qubit_dephasing()),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
