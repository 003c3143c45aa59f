//! Error-bound probes: bounded faces of atom cones, growth on the gallery disk face.

use conelab::amenability::{blr_check, estimate_kappa, evaluate_witness, WitnessCurve};
use conelab::face::FaceHandle;
use conelab::gallery::{self, GalleryName};
use conelab::linalg::from_slice;
use conelab::{BoundedRegion, ConeSpec};

fn main() -> conelab::Result<()> {
    let o = ConeSpec::orthant(3);
    let facet = FaceHandle::from_descriptor(&o, "orthant:zero=0")?;
    let ball = BoundedRegion::ball(from_slice(&[0.0, 0.5, 0.5]), 1.0)?;
    let a = estimate_kappa(&o, &facet, &ball, 400, 1)?;
    let b = blr_check(&o, &facet, &ball, 400, 1)?;
    println!("orthant facet: definition {:?} (kappa {:.3}), blr {:?} (kappa {:.3})", a.verdict, a.kappa_hat, b.verdict, b.kappa_hat);

    let c = ConeSpec::gallery(GalleryName::NiceNotAmenableC);
    let disk = FaceHandle::from_descriptor(&c, "gallery:disk_alpha")?;
    let est = estimate_kappa(&c, &disk, &gallery::witness_region(), 300, 2)?;
    println!("gallery disk face: {:?}, kappa_hat {:.1}, refined {:.1}", est.verdict, est.kappa_hat, est.best_ratio());

    let rep = evaluate_witness(&c, &disk, &WitnessCurve::gallery(&[0.2, 0.1, 0.05, 0.025])?)?;
    println!("{:>8} {:>12} {:>12} {:>12}", "t", "dist_F", "dist_C", "ratio");
    for r in &rep.rows {
        println!("{:>8} {:>12.4e} {:>12.4e} {:>12.1}", r.t, r.dist_face, r.dist_cone, r.ratio);
    }
    println!("fitted exponent of dist_C²/dist_F²: {:.3}", rep.fitted_growth_exponent);
    Ok(())
}
