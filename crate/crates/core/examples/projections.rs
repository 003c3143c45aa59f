//! Nearest points and Moreau splits for the atom cones and for 𝒟² by Dykstra.

use conelab::linalg::from_slice;
use conelab::{moreau_decompose, project, ConeSpec};

fn main() -> conelab::Result<()> {
    let cases = [
        (ConeSpec::orthant(3), from_slice(&[1.0, -2.0, 0.5])),
        (ConeSpec::soc(3), from_slice(&[1.0, 0.0, 0.0])),
        (ConeSpec::psd(2), from_slice(&[1.0, 2.0f64.sqrt() * 2.0, 1.0])),
        (ConeSpec::doubly_nonnegative(2), from_slice(&[2.0, -2.0f64.sqrt(), 2.0])),
    ];
    for (k, x) in cases {
        let r = project(&k, &x)?;
        println!(
            "{:<14} x = {:?}\n{:<14} P(x) = {:.6?}  dist {:.6}  via {:?} ({} iterations)",
            k.variant_name(),
            x.as_slice(),
            "",
            r.point.as_slice(),
            r.distance,
            r.method,
            r.iterations
        );
        if k.is_cone() {
            let m = moreau_decompose(&k, &x)?;
            println!("{:<14} polar part {:.6?}  |<p, q>| = {:.1e}", "", m.polar_part.as_slice(), m.residual);
        }
    }
    Ok(())
}
