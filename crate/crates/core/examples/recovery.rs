//! Every single jump on every probe, followed by the recovery channel.
//! Prints the worst fidelity with the uncorrupted logical state.

use hnlsqec::code::{build_example_code, build_recovery};
use hnlsqec::lindblad::{builtin, DensityState};
use hnlsqec::operators::{lift, DimCap, StateVector};
use hnlsqec::protocol::ghz_input;

pub fn run_example() -> hnlsqec::Result<f64> {
    let cap = DimCap::default();
    let model = builtin::three_level();
    let code = build_example_code(3, cap)?;
    let recovery = build_recovery(&code, &model)?;
    let psi = ghz_input(&code);
    println!("{} syndromes", recovery.syndromes);

    let mut worst: f64 = 1.0;
    for n in 0..3 {
        for (k, l) in model.lindblads().iter().enumerate() {
            let e = lift(l, n, 3, cap)?;
            let hit = StateVector::normalized(e.matrix() * psi.amplitudes())?;
            let fixed = recovery.apply(&DensityState::pure(&hit))?;
            let f = fixed.fidelity_with_pure(&psi);
            println!("probe {n} jump {k}: fidelity {f:.12}");
            worst = worst.min(f);
        }
    }
    Ok(worst)
}

#[allow(dead_code)]
fn main() -> hnlsqec::Result<()> {
    println!("worst fidelity {:.3e} below one", 1.0 - run_example()?);
    Ok(())
}
