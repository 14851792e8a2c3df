//! Markovian probe model and its dynamics.
//!
//! Superoperators act on column-stacked density matrices: entry `rho[(i, j)]`
//! sits at index `i + d*j`, which is also nalgebra's column-major storage
//! order. Under this convention `vec(A rho B) = (B^T (x) A) vec(rho)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{
    eig_hermitian, hermitian_part, lift, operator_norm, CMatrix, CVector, DimCap,
    HermitianOperator, Operator, StateVector, C64,
};

const STATE_TOL: f64 = 1e-10;
const POSITIVITY_TOL: f64 = 1e-9;

/// Single-probe Hamiltonian and jump operators. The signal strength `omega`
/// is kept outside the model and only multiplies the coherent term; noise
/// rates are baked into the jump-operator normalization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelJson", into = "ModelJson")]
pub struct LindbladModel {
    d: usize,
    hamiltonian: HermitianOperator,
    lindblads: Vec<Operator>,
    label: String,
}

#[derive(Serialize, Deserialize)]
struct ModelJson {
    d: usize,
    #[serde(rename = "H")]
    h: HermitianOperator,
    lindblads: Vec<Operator>,
    #[serde(default)]
    label: String,
}

impl TryFrom<ModelJson> for LindbladModel {
    type Error = Error;
    fn try_from(j: ModelJson) -> Result<Self> {
        if j.h.dim() != j.d {
            return Err(Error::DimensionMismatch {
                expected: j.d,
                actual: j.h.dim(),
            });
        }
        LindbladModel::new(j.h, j.lindblads, j.label)
    }
}

impl From<LindbladModel> for ModelJson {
    fn from(m: LindbladModel) -> Self {
        ModelJson {
            d: m.d,
            h: m.hamiltonian,
            lindblads: m.lindblads,
            label: m.label,
        }
    }
}

impl LindbladModel {
    pub fn new(
        hamiltonian: HermitianOperator,
        lindblads: Vec<Operator>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let d = hamiltonian.dim();
        for l in &lindblads {
            if l.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: l.dim(),
                });
            }
        }
        Ok(LindbladModel {
            d,
            hamiltonian,
            lindblads,
            label: label.into(),
        })
    }

    pub fn noiseless(hamiltonian: HermitianOperator, label: impl Into<String>) -> Self {
        let d = hamiltonian.dim();
        LindbladModel {
            d,
            hamiltonian,
            lindblads: Vec::new(),
            label: label.into(),
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn hamiltonian(&self) -> &HermitianOperator {
        &self.hamiltonian
    }

    pub fn lindblads(&self) -> &[Operator] {
        &self.lindblads
    }

    /// Number of jump operators `R`; zero means noiseless.
    pub fn rank(&self) -> usize {
        self.lindblads.len()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Copy with every jump operator multiplied by `factor`, i.e. all rates
    /// scaled by `factor^2`.
    pub fn with_noise_scale(&self, factor: f64) -> Self {
        let lindblads = self
            .lindblads
            .iter()
            .map(|l| l.scaled(C64::new(factor, 0.0)))
            .collect();
        LindbladModel {
            lindblads,
            ..self.clone()
        }
    }

    /// `sum_n H^(n)` over `n_probes` probes.
    pub fn total_hamiltonian(&self, n_probes: usize, cap: DimCap) -> Result<HermitianOperator> {
        let dim = cap.power(self.d, n_probes)?;
        let mut total = Operator::zeros(dim);
        for n in 0..n_probes {
            total = &total + &lift(&self.hamiltonian, n, n_probes, cap)?;
        }
        Ok(hermitian_part(&total))
    }

    /// Every `L_k^(n)`, probe-major.
    pub fn lifted_lindblads(&self, n_probes: usize, cap: DimCap) -> Result<Vec<LiftedJump>> {
        let mut out = Vec::with_capacity(n_probes * self.rank());
        for probe in 0..n_probes {
            for (index, l) in self.lindblads.iter().enumerate() {
                out.push(LiftedJump {
                    probe,
                    index,
                    op: lift(l, probe, n_probes, cap)?,
                });
            }
        }
        Ok(out)
    }
}

/// A jump operator embedded on one probe of an `N`-probe register.
#[derive(Clone, Debug)]
pub struct LiftedJump {
    pub probe: usize,
    pub index: usize,
    pub op: Operator,
}

/// Built-in models, loadable by label.
pub mod builtin {
    use super::*;
    use crate::operators::pauli::{sigma_x, sigma_y, sigma_z};

    pub const THREE_LEVEL: &str = "paper-3level";
    pub const QUBIT_DEPHASING: &str = "qubit-dephasing";
    pub const QUBIT_RANK1_PAULI: &str = "qubit-rank1-pauli";
    pub const QUBIT_DEPHASING_PARALLEL: &str = "qubit-dephasing-parallel";

    pub const LABELS: [&str; 4] = [
        THREE_LEVEL,
        QUBIT_DEPHASING,
        QUBIT_RANK1_PAULI,
        QUBIT_DEPHASING_PARALLEL,
    ];

    /// Three-level probe: `H = i|0><2| - i|2><0|` with jump operators
    /// `X_01`, `Y_01` and `X_02`.
    pub fn three_level() -> LindbladModel {
        let (o, l, i) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 1.0));
        let h = Operator::from_row_slice(3, &[o, o, i, o, o, o, -i, o, o]).unwrap();
        let l1 = Operator::from_row_slice(3, &[o, l, o, l, o, o, o, o, o]).unwrap();
        let l2 = Operator::from_row_slice(3, &[o, -i, o, i, o, o, o, o, o]).unwrap();
        let l3 = Operator::from_row_slice(3, &[o, o, l, o, o, o, l, o, o]).unwrap();
        LindbladModel::new(
            HermitianOperator::new(h).unwrap(),
            vec![l1, l2, l3],
            THREE_LEVEL,
        )
        .unwrap()
    }

    /// `H = sigma_x`, `L = sigma_z`.
    pub fn qubit_dephasing() -> LindbladModel {
        LindbladModel::new(sigma_x(), vec![sigma_z().into_operator()], QUBIT_DEPHASING).unwrap()
    }

    /// `H = sigma_y`, `L = (sigma_x + sigma_z)/sqrt(2)`: a rank-one Pauli
    /// channel that does not commute with the Hamiltonian.
    pub fn qubit_rank_one_pauli() -> LindbladModel {
        let l = sigma_x().combine(
            std::f64::consts::FRAC_1_SQRT_2,
            &sigma_z(),
            std::f64::consts::FRAC_1_SQRT_2,
        );
        LindbladModel::new(sigma_y(), vec![l.into_operator()], QUBIT_RANK1_PAULI).unwrap()
    }

    /// `H = L = sigma_z`: the Hamiltonian lies inside the Lindblad span.
    pub fn qubit_dephasing_parallel() -> LindbladModel {
        LindbladModel::new(
            sigma_z(),
            vec![sigma_z().into_operator()],
            QUBIT_DEPHASING_PARALLEL,
        )
        .unwrap()
    }

    pub fn by_label(label: &str) -> Option<LindbladModel> {
        match label {
            THREE_LEVEL => Some(three_level()),
            QUBIT_DEPHASING => Some(qubit_dephasing()),
            QUBIT_RANK1_PAULI => Some(qubit_rank_one_pauli()),
            QUBIT_DEPHASING_PARALLEL => Some(qubit_dephasing_parallel()),
            _ => None,
        }
    }
}

/// Density matrix: Hermitian, unit trace, positive semidefinite (within
/// `1e-10`, `1e-10` and `-1e-9` respectively).
#[derive(Clone, Debug, PartialEq)]
pub struct DensityState(CMatrix);

impl DensityState {
    pub fn new(m: CMatrix) -> Result<Self> {
        let state = DensityState(m);
        state.validate()?;
        Ok(state)
    }

    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        DensityState(m)
    }

    pub fn pure(psi: &StateVector) -> Self {
        DensityState(psi.projector().into_matrix())
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityState(CMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0))
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

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn validate(&self) -> Result<()> {
        let op = Operator::new(self.0.clone())?;
        let scale = op.max_abs().max(1.0);
        if !op.is_hermitian(STATE_TOL / scale) {
            return Err(Error::InvalidState("not Hermitian".into()));
        }
        let tr = op.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = eig_hermitian(&hermitian_part(&op))?.values[0];
        if min < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(())
    }

    /// `1/2 ||rho - sigma||_1`.
    pub fn trace_distance(&self, other: &DensityState) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        trace_distance(&self.0, &other.0)
    }

    /// `<psi| rho |psi>`.
    pub fn fidelity_with_pure(&self, psi: &StateVector) -> f64 {
        psi.amplitudes().dotc(&(&self.0 * psi.amplitudes())).re
    }

    pub fn vectorize(&self) -> CVector {
        CVector::from_column_slice(self.0.as_slice())
    }
}

pub(crate) fn trace_distance(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    let diff = hermitian_part(&Operator::from_matrix_unchecked(a - b));
    Ok(0.5
        * eig_hermitian(&diff)?
            .values
            .iter()
            .map(|v| v.abs())
            .sum::<f64>())
}

/// Linear map on column-stacked `d x d` matrices, stored as a `d^2 x d^2`
/// matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    d: usize,
    matrix: CMatrix,
}

impl Superoperator {
    pub fn new(d: usize, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != d * d || matrix.ncols() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                actual: matrix.nrows(),
            });
        }
        Ok(Superoperator { d, matrix })
    }

    pub fn identity(d: usize) -> Self {
        Superoperator {
            d,
            matrix: CMatrix::identity(d * d, d * d),
        }
    }

    /// Hilbert-space dimension `d` of the matrices acted on.
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// `exp(t * self)`.
    pub fn exp(&self, t: f64) -> Superoperator {
        Superoperator {
            d: self.d,
            matrix: (&self.matrix * C64::new(t, 0.0)).exp(),
        }
    }

    pub fn apply_matrix(&self, rho: &CMatrix) -> Result<CMatrix> {
        if rho.nrows() != self.d || rho.ncols() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                actual: rho.nrows(),
            });
        }
        let v = &self.matrix * CVector::from_column_slice(rho.as_slice());
        Ok(CMatrix::from_column_slice(self.d, self.d, v.as_slice()))
    }

    /// Applies the map without checking that the output is a valid state.
    pub fn apply(&self, rho: &DensityState) -> Result<DensityState> {
        Ok(DensityState(self.apply_matrix(rho.matrix())?))
    }
}

/// Matrix of `rho -> -i omega [H, rho] + sum_k (L rho L^dag - 1/2 {L^dag L, rho})`.
pub fn liouvillian(model: &LindbladModel, omega: f64) -> Superoperator {
    let d = model.d();
    let id = CMatrix::identity(d, d);
    let h = model.hamiltonian().matrix();
    let mut gen = (id.kronecker(h) - h.transpose().kronecker(&id)) * C64::new(0.0, -omega);
    for l in model.lindblads() {
        let l = l.matrix();
        let ldl = l.adjoint() * l;
        gen += l.conjugate().kronecker(l);
        gen -= (id.kronecker(&ldl) + ldl.transpose().kronecker(&id)) * C64::new(0.5, 0.0);
    }
    Superoperator { d, matrix: gen }
}

/// Exact single-probe channel `exp(t * liouvillian)`.
pub fn propagator(model: &LindbladModel, omega: f64, t: f64) -> Superoperator {
    liouvillian(model, omega).exp(t)
}

/// Integrates the master equation exactly for time `t`.
pub fn evolve_exact(
    model: &LindbladModel,
    omega: f64,
    rho: &DensityState,
    t: f64,
) -> Result<DensityState> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "evolution time must be non-negative, got {t}"
        )));
    }
    if rho.dim() != model.d() {
        return Err(Error::DimensionMismatch {
            expected: model.d(),
            actual: rho.dim(),
        });
    }
    let out = propagator(model, omega, t).apply(rho)?;
    out.validate()
        .map_err(|e| Error::Numerical(format!("exact evolution left the state space: {e}")))?;
    Ok(out)
}

/// One jump element `L_k^(n) sqrt(dt)` of a first-order Kraus set.
#[derive(Clone, Debug)]
pub struct KrausJump {
    pub probe: usize,
    pub index: usize,
    pub op: Operator,
}

/// First-order Kraus decomposition of one slice `dt` of `N` independent probes.
#[derive(Clone, Debug)]
pub struct KrausSet {
    pub k0: Operator,
    pub jumps: Vec<KrausJump>,
    pub dt: f64,
}

impl KrausSet {
    pub fn dim(&self) -> usize {
        self.k0.dim()
    }

    pub(crate) fn apply_matrix(&self, rho: &CMatrix) -> CMatrix {
        let k0 = self.k0.matrix();
        let mut out = k0 * rho * k0.adjoint();
        for j in &self.jumps {
            let k = j.op.matrix();
            out += k * rho * k.adjoint();
        }
        out
    }

    /// The map is only trace preserving to `O(dt^2)`, so the result is
    /// returned unvalidated.
    pub fn apply(&self, rho: &DensityState) -> Result<DensityState> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: rho.dim(),
            });
        }
        Ok(DensityState(self.apply_matrix(rho.matrix())))
    }

    /// `|| K0^dag K0 + sum K^dag K - 1 ||`, which is `O(dt^2)`.
    pub fn completeness_defect(&self) -> f64 {
        let k0 = self.k0.matrix();
        let mut sum = k0.adjoint() * k0;
        for j in &self.jumps {
            sum += j.op.matrix().adjoint() * j.op.matrix();
        }
        sum -= CMatrix::identity(self.dim(), self.dim());
        operator_norm(&Operator::from_matrix_unchecked(sum))
    }
}

/// `K0 = 1 - (i omega H_tot + 1/2 sum L^dag L) dt`, `K_k^(n) = L_k^(n) sqrt(dt)`.
pub fn kraus_first_order(
    model: &LindbladModel,
    omega: f64,
    n_probes: usize,
    dt: f64,
    cap: DimCap,
) -> Result<KrausSet> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "time step must be positive, got {dt}"
        )));
    }
    let dim = cap.power(model.d(), n_probes)?;
    let h_tot = model.total_hamiltonian(n_probes, cap)?;
    let lifted = model.lifted_lindblads(n_probes, cap)?;
    let mut generator = h_tot.matrix() * C64::new(0.0, omega);
    for j in &lifted {
        generator += (j.op.matrix().adjoint() * j.op.matrix()) * C64::new(0.5, 0.0);
    }
    let k0 = CMatrix::identity(dim, dim) - generator * C64::new(dt, 0.0);
    let root = C64::new(dt.sqrt(), 0.0);
    let jumps = lifted
        .into_iter()
        .map(|j| KrausJump {
            probe: j.probe,
            index: j.index,
            op: j.op.scaled(root),
        })
        .collect();
    Ok(KrausSet {
        k0: Operator::from_matrix_unchecked(k0),
        jumps,
        dt,
    })
}

/// Applies a single-probe channel to every factor of an `N`-probe state
/// without forming the `d^(2N)` superoperator.
pub fn apply_product_channel(
    channel: &Superoperator,
    rho: &DensityState,
    n_probes: usize,
) -> Result<DensityState> {
    let expected = (channel.d() as u64).checked_pow(n_probes as u32);
    if expected != Some(rho.dim() as u64) {
        return Err(Error::DimensionMismatch {
            expected: expected.map_or(usize::MAX, |e| e as usize),
            actual: rho.dim(),
        });
    }
    let mut m = rho.matrix().clone();
    apply_product_in_place(channel, n_probes, &mut m);
    Ok(DensityState(m))
}

pub(crate) fn apply_product_in_place(channel: &Superoperator, n_probes: usize, rho: &mut CMatrix) {
    let d = channel.d();
    let d2 = d * d;
    let s = channel.matrix();
    let mut block = vec![C64::new(0.0, 0.0); d2];
    let mut out = vec![C64::new(0.0, 0.0); d2];
    for probe in 0..n_probes {
        let stride = d.pow((n_probes - 1 - probe) as u32);
        let high = d.pow(probe as u32);
        let bases: Vec<usize> = (0..high)
            .flat_map(|h| (0..stride).map(move |l| h * d * stride + l))
            .collect();
        for &cb in &bases {
            for &rb in &bases {
                for b in 0..d {
                    for a in 0..d {
                        block[a + d * b] = rho[(rb + a * stride, cb + b * stride)];
                    }
                }
                for (i, o) in out.iter_mut().enumerate() {
                    let mut acc = C64::new(0.0, 0.0);
                    for (j, x) in block.iter().enumerate() {
                        acc += s[(i, j)] * x;
                    }
                    *o = acc;
                }
                for b in 0..d {
                    for a in 0..d {
                        rho[(rb + a * stride, cb + b * stride)] = out[a + d * b];
                    }
                }
            }
        }
    }
}
