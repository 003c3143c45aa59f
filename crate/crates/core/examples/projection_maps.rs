//! Linear projections onto faces and the Sung–Tam test.

use conelab::face::FaceHandle;
use conelab::gallery::GalleryName;
use conelab::linalg::from_slice;
use conelab::proj_exposed::{build_rank_one_projection, build_rank_two_projection, default_shrink_schedule, sung_tam_probe};
use conelab::ConeSpec;

fn main() -> conelab::Result<()> {
    let kt = ConeSpec::gallery(GalleryName::CylinderKTilde);
    let x = from_slice(&[1.0, 0.0, 1.0, 1.0]);
    let y = from_slice(&[1.0, 0.0, -1.0, 1.0]);
    for p in [build_rank_one_projection(&kt, &x, 2000, 3)?, build_rank_two_projection(&kt, &x, &y, 2000, 3)?] {
        let s = p.summary();
        println!(
            "K~ rank {}: |P² - P| = {:.1e}, violations {}, certified {}",
            p.target_face.dim(),
            s.idempotency_residual,
            s.containment_violations,
            s.certified
        );
    }

    let sched = default_shrink_schedule();
    let o = ConeSpec::orthant(3);
    let facet = FaceHandle::from_descriptor(&o, "orthant:zero=2")?;
    println!("orthant facet converging: {}", sung_tam_probe(&o, &facet, 64, &sched)?.converging());

    let k = ConeSpec::gallery(GalleryName::NiceNotAmenableK);
    let disk = FaceHandle::from_descriptor(&k, "gallery:lifted_disk")?;
    let rep = sung_tam_probe(&k, &disk, 256, &sched)?;
    for l in &rep.levels {
        println!("  k = {:>2}  radius {:.2e}  hits {:>3}  nearest {:?}", l.k, l.radius, l.hits, l.nearest);
    }
    println!("gallery K converging: {}", rep.converging());
    Ok(())
}
