//! Fast-control metrology protocol: `D` rounds of noisy evolution for
//! `dt = T/D`, each followed by recovery, then quantum Fisher information of
//! the final state with respect to the signal `omega`.

use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::code::{build_recovery, effective_hamiltonian, CodeKind, CodeSpace, RecoveryChannel};
use crate::error::{Error, Result};
use crate::hnls::{build_span, decompose};
use crate::lindblad::{
    apply_product_in_place, kraus_first_order, propagator, trace_distance, DensityState, KrausSet,
    LindbladModel,
};
use crate::operators::{
    eig_hermitian, operator_norm, CMatrix, DimCap, HermitianOperator, StateVector, C64,
};

/// QFI eigenvalue cutoff on `p_i + p_j`.
pub const QFI_CUTOFF: f64 = 1e-12;

/// Allowed relative change of the QFI when the finite-difference step is
/// halved.
pub const QFI_STEP_TOL: f64 = 0.01;

pub const DEFAULT_SLICES: usize = 200;
pub const DEFAULT_OMEGA: f64 = 1.0;

/// Central-difference step `1e-4 * max(1, |omega|)`.
pub fn default_eps(omega: f64) -> f64 {
    1e-4 * omega.abs().max(1.0)
}

/// How one slice of noisy evolution is realized.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelMode {
    /// `exp(dt * L)` on every probe.
    #[default]
    Exact,
    /// The `O(dt)` Kraus set `{K0, L_k^(n) sqrt(dt)}`; not trace preserving
    /// beyond first order.
    FirstOrderKraus,
}

impl FromStr for ChannelMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(ChannelMode::Exact),
            "first-order" | "first-order-kraus" | "kraus" => Ok(ChannelMode::FirstOrderKraus),
            other => Err(Error::InvalidConfig(format!(
                "unknown channel mode {other:?}"
            ))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProtocolConfig {
    pub model: LindbladModel,
    /// `None` runs without recovery.
    pub code: Option<CodeSpace>,
    pub omega: f64,
    pub n_probes: usize,
    pub total_time: f64,
    /// Number of slices `D`.
    pub slices: usize,
    pub input: StateVector,
    pub channel_mode: ChannelMode,
    pub cap: DimCap,
}

impl ProtocolConfig {
    /// Corrected run fed with [`ghz_input`] of `code`.
    pub fn corrected(model: LindbladModel, code: CodeSpace) -> Self {
        let input = ghz_input(&code);
        let n_probes = code.n_probes();
        ProtocolConfig {
            model,
            code: Some(code),
            omega: DEFAULT_OMEGA,
            n_probes,
            total_time: 1.0,
            slices: DEFAULT_SLICES,
            input,
            channel_mode: ChannelMode::Exact,
            cap: DimCap::default(),
        }
    }

    pub fn uncorrected(model: LindbladModel, input: StateVector, n_probes: usize) -> Self {
        ProtocolConfig {
            model,
            code: None,
            omega: DEFAULT_OMEGA,
            n_probes,
            total_time: 1.0,
            slices: DEFAULT_SLICES,
            input,
            channel_mode: ChannelMode::Exact,
            cap: DimCap::default(),
        }
    }

    pub fn dt(&self) -> f64 {
        self.total_time / self.slices as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.slices < 1 {
            return Err(Error::InvalidConfig(
                "number of slices must be at least 1".into(),
            ));
        }
        if !(self.total_time > 0.0 && self.total_time.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "total time must be positive, got {}",
                self.total_time
            )));
        }
        if !self.omega.is_finite() {
            return Err(Error::InvalidConfig("omega must be finite".into()));
        }
        if self.n_probes < 1 {
            return Err(Error::InvalidConfig("need at least one probe".into()));
        }
        let dim = self.cap.power(self.model.d(), self.n_probes)?;
        if self.input.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: self.input.dim(),
            });
        }
        if let Some(code) = &self.code {
            if code.n_probes() != self.n_probes || code.d() != self.model.d() {
                return Err(Error::InvalidConfig(format!(
                    "code is for {} probes of dimension {}, run has {} of dimension {}",
                    code.n_probes(),
                    code.d(),
                    self.n_probes,
                    self.model.d()
                )));
            }
        }
        Ok(())
    }
}

/// `(|0_L> + |1_L>)/sqrt(2)`.
pub fn ghz_input(code: &CodeSpace) -> StateVector {
    StateVector::normalized(code.logical0().amplitudes() + code.logical1().amplitudes())
        .expect("orthonormal logical states")
}

/// GHZ state of the extremal eigenvectors of `H`, the noiseless optimum.
pub fn noiseless_optimal_input(
    model: &LindbladModel,
    n_probes: usize,
    cap: DimCap,
) -> Result<StateVector> {
    cap.power(model.d(), n_probes)?;
    let eig = eig_hermitian(model.hamiltonian())?;
    let (top, bottom) = (
        eig.max().1.tensor_power(n_probes),
        eig.min().1.tensor_power(n_probes),
    );
    StateVector::normalized(top.amplitudes() + bottom.amplitudes())
}

#[derive(Clone, Debug)]
pub struct ProtocolRun {
    pub final_state: DensityState,
    /// Largest one-round trace distance between the simulated step and the
    /// ideal effective unitary applied to the same state.
    pub per_step_error: f64,
    /// `<psi_ideal(T)| rho(T) |psi_ideal(T)>`.
    pub fidelity_to_ideal: f64,
}

enum SliceChannel {
    Product(crate::lindblad::Superoperator),
    Kraus(KrausSet),
}

/// Per-config precomputation shared by runs at different `omega`.
struct Simulator<'a> {
    cfg: &'a ProtocolConfig,
    recovery: Option<RecoveryChannel>,
    reference: HermitianOperator,
    reference_eig: crate::operators::HermitianEigen,
}

impl<'a> Simulator<'a> {
    fn new(cfg: &'a ProtocolConfig) -> Result<Self> {
        cfg.validate()?;
        let (recovery, reference) = match &cfg.code {
            Some(code) => (
                Some(build_recovery(code, &cfg.model)?),
                effective_hamiltonian(code, &cfg.model)?.full,
            ),
            None => (None, cfg.model.total_hamiltonian(cfg.n_probes, cfg.cap)?),
        };
        let reference_eig = eig_hermitian(&reference)?;
        Ok(Simulator {
            cfg,
            recovery,
            reference,
            reference_eig,
        })
    }

    /// `exp(-i omega t H_ref)`.
    fn ideal_unitary(&self, omega: f64, t: f64) -> CMatrix {
        let n = self.reference.dim();
        let mut u = CMatrix::zeros(n, n);
        for (l, v) in self
            .reference_eig
            .values
            .iter()
            .zip(&self.reference_eig.vectors)
        {
            let col = v.amplitudes();
            u += (col * col.adjoint()) * C64::new(0.0, -omega * t * l).exp();
        }
        u
    }

    fn channel(&self, omega: f64) -> Result<SliceChannel> {
        let cfg = self.cfg;
        Ok(match cfg.channel_mode {
            ChannelMode::Exact => SliceChannel::Product(propagator(&cfg.model, omega, cfg.dt())),
            ChannelMode::FirstOrderKraus => SliceChannel::Kraus(kraus_first_order(
                &cfg.model,
                omega,
                cfg.n_probes,
                cfg.dt(),
                cfg.cap,
            )?),
        })
    }

    fn step(&self, channel: &SliceChannel, rho: &CMatrix) -> CMatrix {
        let mut next = match channel {
            SliceChannel::Product(s) => {
                let mut m = rho.clone();
                apply_product_in_place(s, self.cfg.n_probes, &mut m);
                m
            }
            SliceChannel::Kraus(k) => k.apply_matrix(rho),
        };
        if let Some(rec) = &self.recovery {
            next = rec.apply_matrix(&next);
        }
        next
    }

    fn run(&self, omega: f64, track_error: bool) -> Result<ProtocolRun> {
        let cfg = self.cfg;
        let channel = self.channel(omega)?;
        let u_step = self.ideal_unitary(omega, cfg.dt());
        let psi = cfg.input.amplitudes();
        let mut rho = psi * psi.adjoint();
        let mut per_step_error: f64 = 0.0;
        for _ in 0..cfg.slices {
            let next = self.step(&channel, &rho);
            if track_error {
                let ideal = &u_step * &rho * u_step.adjoint();
                per_step_error = per_step_error.max(trace_distance(&next, &ideal)?);
            }
            rho = next;
        }
        let psi_t = self.ideal_unitary(omega, cfg.total_time) * psi;
        let fidelity_to_ideal = psi_t.dotc(&(&rho * &psi_t)).re;
        let final_state = match cfg.channel_mode {
            ChannelMode::Exact => DensityState::new(rho)
                .map_err(|e| Error::Numerical(format!("protocol left the state space: {e}")))?,
            ChannelMode::FirstOrderKraus => DensityState::from_matrix_unchecked(rho),
        };
        Ok(ProtocolRun {
            final_state,
            per_step_error,
            fidelity_to_ideal,
        })
    }
}

pub fn run_protocol(cfg: &ProtocolConfig) -> Result<ProtocolRun> {
    Simulator::new(cfg)?.run(cfg.omega, true)
}

/// Quantum Fisher information from the symmetric-logarithmic-derivative
/// formula `F = 2 sum |<i|d rho|j>|^2 / (p_i + p_j)` in the eigenbasis of
/// `rho`.
pub fn sld_qfi(rho: &DensityState, drho: &CMatrix) -> Result<f64> {
    let h =
        crate::operators::hermitian_part(&crate::operators::Operator::new(rho.matrix().clone())?);
    let eig = eig_hermitian(&h)?;
    let n = rho.dim();
    let v = CMatrix::from_columns(
        &eig.vectors
            .iter()
            .map(|s| s.amplitudes().clone())
            .collect::<Vec<_>>(),
    );
    let d = v.adjoint() * drho * &v;
    let mut f = 0.0;
    for i in 0..n {
        for j in 0..n {
            let p = eig.values[i] + eig.values[j];
            if p > QFI_CUTOFF {
                f += 2.0 * d[(i, j)].norm_sqr() / p;
            }
        }
    }
    Ok(f)
}

fn qfi_at<F>(state_fn: &F, rho: &DensityState, omega: f64, eps: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<DensityState>,
{
    let plus = state_fn(omega + eps)?;
    let minus = state_fn(omega - eps)?;
    let drho = (plus.matrix() - minus.matrix()) / C64::new(2.0 * eps, 0.0);
    sld_qfi(rho, &drho)
}

/// QFI of `omega -> state_fn(omega)` at `omega`, with the derivative taken
/// by central differences of step `eps`. Fails if halving `eps` moves the
/// result by more than [`QFI_STEP_TOL`] relative.
pub fn qfi<F>(state_fn: F, omega: f64, eps: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<DensityState>,
{
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "finite-difference step must be positive, got {eps}"
        )));
    }
    let rho = state_fn(omega)?;
    let coarse = qfi_at(&state_fn, &rho, omega, eps)?;
    let fine = qfi_at(&state_fn, &rho, omega, eps / 2.0)?;
    let scale = coarse.abs().max(fine.abs());
    if scale > QFI_CUTOFF {
        let change = (coarse - fine).abs() / scale;
        if change > QFI_STEP_TOL {
            return Err(Error::EpsTooLarge { change });
        }
    }
    Ok(coarse)
}

#[derive(Clone, Debug, Serialize)]
pub struct PrecisionReport {
    pub qfi: f64,
    /// `1/qfi`, the variance bound for a single repetition.
    pub crb: f64,
    /// `1/(4 N^2 T^2 ||H_perp||^2)`.
    pub hl_reference: f64,
    /// `1/(N^2 T^2 ||H||)`, kept alongside the reference for comparison.
    pub norm_bound: f64,
    pub fidelity_to_ideal: f64,
    pub per_step_error: f64,
    pub eps: f64,
}

pub fn precision_report(cfg: &ProtocolConfig) -> Result<PrecisionReport> {
    let sim = Simulator::new(cfg)?;
    let run = sim.run(cfg.omega, true)?;
    let eps = default_eps(cfg.omega);
    let f = qfi(|w| sim.run(w, false).map(|r| r.final_state), cfg.omega, eps)?;
    let perp = decompose(cfg.model.hamiltonian(), &build_span(&cfg.model))?;
    let nt = cfg.n_probes as f64 * cfg.total_time;
    Ok(PrecisionReport {
        qfi: f,
        crb: if f > 0.0 { 1.0 / f } else { f64::INFINITY },
        hl_reference: 1.0 / (4.0 * nt * nt * perp.perp_norm * perp.perp_norm),
        norm_bound: 1.0 / (nt * nt * operator_norm(cfg.model.hamiltonian())),
        fidelity_to_ideal: run.fidelity_to_ideal,
        per_step_error: run.per_step_error,
        eps,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    /// Probe count.
    N,
    /// Total time at fixed slice length.
    T,
    /// Slice length at fixed total time.
    #[serde(rename = "dt")]
    Dt,
}

impl FromStr for SweepAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "N" | "n" => Ok(SweepAxis::N),
            "T" | "t" => Ok(SweepAxis::T),
            "dt" => Ok(SweepAxis::Dt),
            other => Err(Error::InvalidConfig(format!(
                "unknown sweep axis {other:?}"
            ))),
        }
    }
}

/// Everything needed to build a [`ProtocolConfig`] for any point of a sweep.
#[derive(Clone, Debug)]
pub struct SweepTemplate {
    pub model: LindbladModel,
    pub code_kind: CodeKind,
    /// Apply recovery; when false the code only supplies the input state.
    pub corrected: bool,
    pub n_probes: usize,
    pub total_time: f64,
    pub slices: usize,
    pub omega: f64,
    pub channel_mode: ChannelMode,
    pub cap: DimCap,
}

impl SweepTemplate {
    pub fn new(model: LindbladModel, code_kind: CodeKind, n_probes: usize) -> Self {
        SweepTemplate {
            model,
            code_kind,
            corrected: code_kind != CodeKind::None,
            n_probes,
            total_time: 1.0,
            slices: DEFAULT_SLICES,
            omega: DEFAULT_OMEGA,
            channel_mode: ChannelMode::Exact,
            cap: DimCap::default(),
        }
    }

    /// Builds the code and input. Uncorrected runs fall back to the
    /// noiseless optimal input when no code can be built.
    pub fn config(&self) -> Result<ProtocolConfig> {
        let code = match self.code_kind.build(&self.model, self.n_probes, self.cap) {
            Ok(code) => code,
            Err(e @ Error::DimCapExceeded { .. }) => return Err(e),
            Err(e) if self.corrected => return Err(e),
            Err(_) => None,
        };
        if self.corrected && code.is_none() {
            return Err(Error::InvalidConfig("corrected run needs a code".into()));
        }
        let input = match &code {
            Some(c) => ghz_input(c),
            None => noiseless_optimal_input(&self.model, self.n_probes, self.cap)?,
        };
        Ok(ProtocolConfig {
            model: self.model.clone(),
            code: if self.corrected { code } else { None },
            omega: self.omega,
            n_probes: self.n_probes,
            total_time: self.total_time,
            slices: self.slices,
            input,
            channel_mode: self.channel_mode,
            cap: self.cap,
        })
    }

    /// Template for one sweep point. Varying `T` keeps the slice length
    /// `dt` of the template fixed.
    pub fn at(&self, axis: SweepAxis, value: f64) -> Result<SweepTemplate> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "sweep values must be positive, got {value}"
            )));
        }
        let mut t = self.clone();
        match axis {
            SweepAxis::N => {
                if value.fract() != 0.0 {
                    return Err(Error::InvalidConfig(format!(
                        "probe count must be an integer, got {value}"
                    )));
                }
                t.n_probes = value as usize;
            }
            SweepAxis::T => {
                let dt = self.total_time / self.slices as f64;
                t.total_time = value;
                t.slices = ((value / dt).round() as usize).max(1);
            }
            SweepAxis::Dt => {
                t.slices = ((self.total_time / value).round() as usize).max(1);
            }
        }
        Ok(t)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesPoint {
    pub value: f64,
    pub qfi: f64,
    pub crb: f64,
    pub fidelity: f64,
    pub per_step_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingSeries {
    pub axis: SweepAxis,
    /// Ascending by `value`.
    pub points: Vec<SeriesPoint>,
}

impl ScalingSeries {
    /// Least-squares slope of `ln qfi` against `ln value`.
    pub fn loglog_slope(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .points
            .iter()
            .filter(|p| p.qfi > 0.0)
            .map(|p| (p.value.ln(), p.qfi.ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        (sxx > 0.0).then(|| sxy / sxx)
    }

    /// CSV with header `axis_value,qfi,crb,fidelity,per_step_error`; every
    /// number has 12 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "axis_value,qfi,crb,fidelity,per_step_error")?;
        for p in &self.points {
            writeln!(
                w,
                "{},{},{},{},{}",
                sig12(p.value),
                sig12(p.qfi),
                sig12(p.crb),
                sig12(p.fidelity),
                sig12(p.per_step_error)
            )?;
        }
        Ok(())
    }
}

/// 12 significant digits in scientific notation.
pub fn sig12(x: f64) -> String {
    format!("{x:.11e}")
}

/// One [`PrecisionReport`] per value, computed in parallel and returned in
/// ascending value order.
pub fn scaling_sweep(
    template: &SweepTemplate,
    axis: SweepAxis,
    values: &[f64],
) -> Result<ScalingSeries> {
    if values.is_empty() {
        return Err(Error::InvalidConfig(
            "sweep needs at least one value".into(),
        ));
    }
    let configs = values
        .iter()
        .map(|&v| {
            template
                .at(axis, v)
                .and_then(|t| t.config())
                .map(|c| (v, c))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut points = configs
        .par_iter()
        .map(|(value, cfg)| {
            let r = precision_report(cfg)?;
            Ok(SeriesPoint {
                value: *value,
                qfi: r.qfi,
                crb: r.crb,
                fidelity: r.fidelity_to_ideal,
                per_step_error: r.per_step_error,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    points.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(ScalingSeries { axis, points })
}
