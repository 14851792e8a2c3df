//! Corrected three-level protocol with three probes. Pass the slice count
//! as the first argument (default 400).

use hnlsqec::code::build_example_code;
use hnlsqec::lindblad::builtin;
use hnlsqec::operators::DimCap;
use hnlsqec::protocol::{precision_report, PrecisionReport, ProtocolConfig};

pub fn run_example(slices: usize) -> hnlsqec::Result<PrecisionReport> {
    let code = build_example_code(3, DimCap::default())?;
    let mut cfg = ProtocolConfig::corrected(builtin::three_level(), code);
    cfg.slices = slices;
    let r = precision_report(&cfg)?;
    println!(
        "D={slices} qfi={:.6} crb={:.6} reference={:.6}",
        r.qfi, r.crb, r.hl_reference
    );
    println!(
        "fidelity to ideal {:.6}, per-step error {:.3e}",
        r.fidelity_to_ideal, r.per_step_error
    );
    Ok(r)
}

#[allow(dead_code)]
fn main() -> hnlsqec::Result<()> {
    let slices = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(400);
    run_example(slices).map(|_| ())
}
