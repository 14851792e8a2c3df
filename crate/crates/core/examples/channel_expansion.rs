//! First-order Kraus expansion against the exact slice channel. The one-step
//! trace distance should shrink four times when dt halves.

use hnlsqec::code::build_example_code;
use hnlsqec::lindblad::{
    apply_product_channel, builtin, kraus_first_order, propagator, DensityState,
};
use hnlsqec::operators::DimCap;
use hnlsqec::protocol::ghz_input;

pub fn run_example() -> hnlsqec::Result<Vec<(f64, f64)>> {
    let cap = DimCap::default();
    let model = builtin::three_level();
    let rho = DensityState::pure(&ghz_input(&build_example_code(3, cap)?));

    let mut rows = Vec::new();
    for dt in [0.02, 0.01, 0.005, 0.0025] {
        let exact = apply_product_channel(&propagator(&model, 1.0, dt), &rho, 3)?;
        let approx = kraus_first_order(&model, 1.0, 3, dt, cap)?.apply(&rho)?;
        let dist = exact.trace_distance(&approx)?;
        let ratio = rows.last().map(|&(_, prev): &(f64, f64)| prev / dist);
        match ratio {
            Some(r) => println!("dt={dt:<7} distance={dist:.4e} ratio={r:.3}"),
            None => println!("dt={dt:<7} distance={dist:.4e}"),
        }
        rows.push((dt, dist));
    }
    Ok(rows)
}

#[allow(dead_code)]
fn main() -> hnlsqec::Result<()> {
    run_example().map(|_| ())
}
