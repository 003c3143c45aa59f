//! Runs every registered check and prints the canonical JSON report.

use conelab::linalg::Tolerance;
use conelab::report::RunMeta;
use conelab::verify;

fn main() -> conelab::Result<()> {
    let checks = verify::run_all(0)?;
    for c in &checks {
        eprintln!("{} {:<20} {:.2} s", if c.passed { "PASS" } else { "FAIL" }, c.name, c.runtime_s);
    }
    print!("{}", RunMeta::new("verify all", None, 0, &Tolerance::default()).wrap(&checks));
    Ok(())
}
