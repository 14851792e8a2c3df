//! Span check for every built-in noise model.

use hnlsqec::hnls::{build_span, hnls_verdict, is_commuting, HnlsVerdict, DEFAULT_VERDICT_TOL};
use hnlsqec::lindblad::builtin;

pub fn run_example() -> hnlsqec::Result<Vec<(String, HnlsVerdict)>> {
    let mut verdicts = Vec::new();
    for label in builtin::LABELS {
        let model = builtin::by_label(label).expect("built-in label");
        let verdict = hnls_verdict(&model, DEFAULT_VERDICT_TOL)?;
        println!(
            "{label:<26} holds={:<5} rank={} perp_norm={:.6} commuting={}",
            verdict.holds,
            build_span(&model).rank(),
            verdict.perp_norm,
            is_commuting(&model, DEFAULT_VERDICT_TOL)
        );
        verdicts.push((label.to_string(), verdict));
    }
    Ok(verdicts)
}

#[allow(dead_code)]
fn main() -> hnlsqec::Result<()> {
    run_example().map(|_| ())
}
