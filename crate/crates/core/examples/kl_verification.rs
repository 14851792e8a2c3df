//! Error-correction conditions for the three-level circular code and for
//! the spectral qubit code under dephasing.

use hnlsqec::code::{build_example_code, check_kl, CodeKind, KlReport};
use hnlsqec::lindblad::builtin;
use hnlsqec::operators::DimCap;

pub fn run_example() -> hnlsqec::Result<Vec<KlReport>> {
    let cap = DimCap::default();
    let three_level = builtin::three_level();
    let dephasing = builtin::qubit_dephasing();
    let qubit_code = CodeKind::AutoQubit
        .build(&dephasing, 3, cap)?
        .expect("auto code");

    let reports = vec![
        check_kl(&build_example_code(3, cap)?, &three_level)?,
        check_kl(&qubit_code, &dephasing)?,
    ];
    for (name, r) in ["three-level", "qubit-dephasing"].iter().zip(&reports) {
        println!(
            "{name:<16} cond1={:.2e} cond2={:.2e} gap={:.6} passes={}",
            r.cond1_residual,
            r.cond2_residual,
            r.signal_gap,
            r.passes()
        );
    }
    Ok(reports)
}

#[allow(dead_code)]
fn main() -> hnlsqec::Result<()> {
    run_example().map(|_| ())
}
