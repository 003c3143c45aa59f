//! Face calculus: minimal faces, conjugate faces, exposedness and K* + F^⊥.

use conelab::face::{conjugate_face, dual_sum_membership, is_exposed, minimal_face, Exposure, FaceHandle};
use conelab::gallery::GalleryName;
use conelab::linalg::{from_slice, svec, Matrix};
use conelab::{ConeSpec, Tolerance};

fn main() -> conelab::Result<()> {
    let tol = Tolerance::default();

    let psd = ConeSpec::psd(3);
    let x = svec(&Matrix::from_diagonal(&from_slice(&[1.0, 1.0, 0.0])));
    let f = minimal_face(&psd, &x, &tol)?;
    let g = conjugate_face(&psd, &f)?;
    println!("psd(3): face of diag(1,1,0) has dim {}, conjugate face dim {}", f.dim(), g.dim());

    let k = ConeSpec::gallery(GalleryName::CylinderKTilde);
    let ray = FaceHandle::from_descriptor(&k, "ray=[1,0,1,1]")?;
    println!("K~: conjugate of (1,0,1,1) = {:?}", conjugate_face(&k, &ray)?.descriptor);

    let c = ConeSpec::gallery(GalleryName::NiceNotAmenableC);
    for d in ["gallery:disk_alpha", "gallery:gamma_point=1.0"] {
        let f = FaceHandle::from_descriptor(&c, d)?;
        match is_exposed(&c, &f, 2000, 1)? {
            Exposure::Exposed { normal, level, margin } => {
                println!("C: {d} exposed by <{:.4?}, x> >= {level:.4}, margin {margin:.2e}", normal.as_slice())
            }
            other => println!("C: {d} -> {other:?}"),
        }
    }

    let disk = FaceHandle::from_descriptor(&k, "gallery:lifted_disk")?;
    for s in [[-1.0, 0.0, 0.5, 0.5], [-1.0, 0.0, 0.2, 0.5]] {
        let m = dual_sum_membership(&k, &disk, &from_slice(&s), &tol)?;
        println!("{s:?} in K~* + F^perp: {}", m.is_in_sum());
    }
    Ok(())
}
