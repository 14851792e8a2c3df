//! QFI against probe number for the corrected dephasing qubit, and against
//! time with and without correction.

use hnlsqec::code::CodeKind;
use hnlsqec::lindblad::builtin;
use hnlsqec::protocol::{scaling_sweep, ScalingSeries, SweepAxis, SweepTemplate};

pub fn run_example(
    slices: usize,
) -> hnlsqec::Result<(ScalingSeries, ScalingSeries, ScalingSeries)> {
    let mut template = SweepTemplate::new(builtin::qubit_dephasing(), CodeKind::AutoQubit, 3);
    template.slices = slices;

    let by_n = scaling_sweep(&template, SweepAxis::N, &[3.0, 4.0, 5.0])?;
    let by_t = scaling_sweep(&template, SweepAxis::T, &[0.5, 1.0, 2.0])?;
    template.corrected = false;
    let uncorrected = scaling_sweep(&template, SweepAxis::T, &[0.5, 1.0, 2.0])?;

    for (name, s) in [
        ("corrected, N", &by_n),
        ("corrected, T", &by_t),
        ("uncorrected, T", &uncorrected),
    ] {
        println!("{name}: slope {:.4}", s.loglog_slope().unwrap_or(f64::NAN));
        s.write_csv(std::io::stdout())?;
    }
    Ok((by_n, by_t, uncorrected))
}

#[allow(dead_code)]
fn main() -> hnlsqec::Result<()> {
    run_example(200).map(|_| ())
}
