//! From a slice-level error bound to the conic hull: r, α, β and γ.

use conelab::face::FaceHandle;
use conelab::gallery::GalleryName;
use conelab::hull_constants::{hull_constants, verify_slice_bound, DEFAULT_DIRECTIONS};
use conelab::ConeSpec;

fn main() -> conelab::Result<()> {
    let k = ConeSpec::gallery(GalleryName::NiceNotAmenableK);
    let f = FaceHandle::from_descriptor(&k, "gallery:lifted_disk")?;
    let h = hull_constants(&k, &f, 1.0, DEFAULT_DIRECTIONS)?;
    print!("{}", h.text_block());

    let rep = verify_slice_bound(&k, 300, 7)?;
    println!(
        "slice bound on {} samples: {} violations, worst ratio {:.4} vs |e| r = {:.4}",
        rep.samples, rep.violations, rep.worst_ratio, rep.bound
    );
    Ok(())
}
