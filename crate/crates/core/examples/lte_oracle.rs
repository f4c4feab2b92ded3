//! Leading one-step error of IMEX-BDFk-SAV on a forced damped oscillator:
//! closed-form prediction against a Richardson fit of measured errors.
//!
//!     cargo run --release --example lte_oracle

use std::f64::consts::PI;

use imex_sav::lte::{
    compare_leading_term, default_fit_step, default_sav_window, error_constant, sav_contribution_slope, LteParams,
};

fn main() -> imex_sav::Result<()> {
    let w = 2.0 * PI;
    let p = LteParams::new(w, 0.2, 1.0, 0.5, 1.0, 2.0 * w)?;
    let probe = LteParams::new(w, 0.2, 0.0, 1.0, 1.0, 2.0 * w)?;
    println!("{:>2} {:>10} {:>14} {:>14} {:>8} {:>8} {:>9}", "k", "C_k", "τ_u predicted", "τ_u measured", "ratio u", "ratio v", "SAV slope");
    for k in 1..=5 {
        let c = compare_leading_term(&p, k, default_fit_step(k), 5.0)?;
        let (ru, rv) = c.ratios();
        let (lo, hi) = default_sav_window(k);
        let slope = sav_contribution_slope(&probe, k, 0.5, lo, hi, 8)?;
        println!(
            "{k:>2} {:>10.6} {:>14.6e} {:>14.6e} {ru:>8.4} {rv:>8.4} {slope:>9.3}",
            error_constant(k)?,
            c.predicted.0,
            c.measured.0
        );
    }
    Ok(())
}
