//! Lindblad span, perpendicular Hamiltonian component and noise
//! classification.
//!
//! The span is the real linear span of `1`, the Hermitian and anti-Hermitian
//! parts of every `L_j`, and those of every ordered product `L_j^dag L_k`.
//! Orthogonality is with respect to the Hilbert-Schmidt inner product.

use serde::Serialize;

use crate::error::Result;
use crate::lindblad::LindbladModel;
use crate::operators::{
    anti_hermitian_part, eig_hermitian, hermitian_part, hs_inner, operator_norm, HermitianOperator,
    StateVector,
};

/// Rank tolerance for Gram-Schmidt, relative to the largest generator norm.
pub const RANK_TOL: f64 = 1e-9;

/// Default relative tolerance for the HNLS verdict.
pub const DEFAULT_VERDICT_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct LindbladSpan {
    pub generators: Vec<HermitianOperator>,
    /// Orthonormal under `hs_inner`.
    pub orthobasis: Vec<HermitianOperator>,
}

impl LindbladSpan {
    pub fn rank(&self) -> usize {
        self.orthobasis.len()
    }

    /// Orthogonal projection of `a` onto the span.
    pub fn project(&self, a: &HermitianOperator) -> Result<HermitianOperator> {
        let mut acc = HermitianOperator::zeros(a.dim());
        for b in &self.orthobasis {
            acc = acc.combine(1.0, b, hs_inner(b, a)?);
        }
        Ok(acc)
    }
}

pub fn build_span(model: &LindbladModel) -> LindbladSpan {
    let d = model.d();
    let ls = model.lindblads();
    let mut generators = vec![HermitianOperator::identity(d)];
    for l in ls {
        generators.push(hermitian_part(l));
        generators.push(anti_hermitian_part(l));
    }
    for lj in ls {
        for lk in ls {
            let prod = &lj.adjoint() * lk;
            generators.push(hermitian_part(&prod));
            generators.push(anti_hermitian_part(&prod));
        }
    }
    let orthobasis = gram_schmidt(&generators);
    LindbladSpan {
        generators,
        orthobasis,
    }
}

fn gram_schmidt(generators: &[HermitianOperator]) -> Vec<HermitianOperator> {
    let largest = generators.iter().map(|g| g.hs_norm()).fold(0.0, f64::max);
    let threshold = RANK_TOL * largest.max(f64::MIN_POSITIVE);
    let mut basis: Vec<HermitianOperator> = Vec::new();
    for g in generators {
        let mut v = g.clone();
        // two passes: classical Gram-Schmidt loses orthogonality on nearly
        // dependent second-order products
        for _ in 0..2 {
            for b in &basis {
                let c = hs_inner(b, &v).expect("span generators share the probe dimension");
                v = v.combine(1.0, b, -c);
            }
        }
        let norm = v.hs_norm();
        if norm > threshold {
            basis.push(v.scale(1.0 / norm));
        }
    }
    basis
}

#[derive(Clone, Debug)]
pub struct PerpDecomposition {
    pub h_par: HermitianOperator,
    pub h_perp: HermitianOperator,
    /// Operator norm of `h_perp`.
    pub perp_norm: f64,
    /// Top and bottom eigenvectors of `h_perp`; `None` when `h_perp`
    /// vanishes.
    pub psi_plus: Option<StateVector>,
    pub psi_minus: Option<StateVector>,
}

pub fn decompose(h: &HermitianOperator, span: &LindbladSpan) -> Result<PerpDecomposition> {
    let h_par = span.project(h)?;
    let h_perp = h.combine(1.0, &h_par, -1.0);
    let perp_norm = operator_norm(&h_perp);
    let (psi_plus, psi_minus) = if perp_norm > 0.0 {
        let eig = eig_hermitian(&h_perp)?;
        (Some(eig.max().1.clone()), Some(eig.min().1.clone()))
    } else {
        (None, None)
    };
    Ok(PerpDecomposition {
        h_par,
        h_perp,
        perp_norm,
        psi_plus,
        psi_minus,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct HnlsVerdict {
    pub holds: bool,
    pub perp_norm: f64,
}

/// HNLS holds iff `||H_perp|| > tol * ||H||`. A vanishing Hamiltonian is
/// reported as not holding.
pub fn hnls_verdict(model: &LindbladModel, tol: f64) -> Result<HnlsVerdict> {
    let h = model.hamiltonian();
    let h_norm = operator_norm(h);
    if h_norm == 0.0 {
        return Ok(HnlsVerdict {
            holds: false,
            perp_norm: 0.0,
        });
    }
    let perp = decompose(h, &build_span(model))?;
    Ok(HnlsVerdict {
        holds: perp.perp_norm > tol * h_norm,
        perp_norm: perp.perp_norm,
    })
}

/// True iff `H` and all `L_j` pairwise commute, each commutator norm being
/// at most `tol` times the product of the operand norms.
pub fn is_commuting(model: &LindbladModel, tol: f64) -> bool {
    let mut ops = vec![model.hamiltonian().as_operator()];
    ops.extend(model.lindblads());
    for (i, a) in ops.iter().enumerate() {
        for b in &ops[i + 1..] {
            let comm = a
                .commutator(b)
                .expect("model operators share the probe dimension");
            if operator_norm(&comm) > tol * operator_norm(a) * operator_norm(b) {
                return false;
            }
        }
    }
    true
}
