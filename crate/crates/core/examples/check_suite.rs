//! Run every check on a configuration and print a one-line summary each.
//!
//! `cargo run --release --example check_suite [genus1|genus2]`

use schottky_lax::config::{make_reference, ReferenceKind, DEFAULT_SEED};
use schottky_lax::verify::{CheckGroup, Verifier};

fn main() -> schottky_lax::Result<()> {
    let kind: ReferenceKind = std::env::args().nth(1).as_deref().unwrap_or("genus1").parse()?;
    let verifier = Verifier::new(&make_reference(kind, DEFAULT_SEED)?)?;
    println!("{:<22} {:>10} {:>8} {:>10} {:>9}  verdict", "report", "residual", "tol", "tail", "ms");
    for report in verifier.run_all(&CheckGroup::ALL)? {
        println!(
            "{:<22} {:>10.2e} {:>8.0e} {:>10.1e} {:>9.1}  {}",
            report.check_name,
            report.residual,
            report.tolerance,
            report.tail_budget,
            report.runtime_ms,
            if report.pass { "pass" } else { "FAIL" }
        );
        for note in &report.notes {
            println!("    {note}");
        }
    }
    Ok(())
}
