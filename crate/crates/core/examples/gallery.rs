//! The named counterexamples: det M, exposing normals on the rim, the Sturm family.

use conelab::gallery;

fn main() -> conelab::Result<()> {
    for (t, s) in [(0.3, 1.1), (std::f64::consts::FRAC_PI_4, std::f64::consts::FRAC_PI_2)] {
        let d = gallery::det_m(t, s);
        println!("det M({t:.4}, {s:.4}) = {:.12} (closed form {:.12}), bracket {:.4}", d.numeric, d.closed_form, d.bracket);
    }
    for t in [0.5, 2.0, 4.0] {
        let u = gallery::exposing_normal_u(t)?;
        println!("rim t = {t}: u = {u:.6}, margin {:.3e}", gallery::exposing_margin(t, u, 10_000));
    }
    for kappa in [1.0, 10.0, 100.0] {
        if let Some(c) = gallery::certify_global_violation(kappa)? {
            println!(
                "kappa {kappa:>5}: eps = {:.4e}, dist_F {:.4} > {:.4}, y11 = {:.4}",
                c.point.eps, c.lhs, c.rhs, c.point.y[0]
            );
        }
    }
    Ok(())
}
