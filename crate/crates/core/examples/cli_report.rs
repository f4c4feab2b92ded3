//! Drive the study commands from code instead of the binary: a stability scan
//! written as CSV to stdout with its summary lines.
//!
//!     cargo run --release --example cli_report

use imex_sav::cli::{cmd_stability, resolve, CommonArgs};

fn main() -> imex_sav::Result<()> {
    let args = CommonArgs {
        problem: Some("duffing-chain".into()),
        schemes: vec!["imex-bdf5".into()],
        orders: vec!["5".into()],
        dts: vec!["0.1".into(), "0.25".into(), "0.3".into(), "0.5".into()],
        ..Default::default()
    };
    let (spec, _) = resolve("stability", &args)?;
    let report = cmd_stability(&spec)?;
    report.write_csv(std::io::stdout())?;
    for (k, v) in &report.summary {
        println!("# {k} = {v}");
    }
    Ok(())
}
