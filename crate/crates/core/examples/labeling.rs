//! Recovers the EDC region numbering and prints each region's predicate signs.

use qrm::edc::{derive_region_labels, RegionId};

fn main() {
    let labeling = derive_region_labels().expect("region numbering");
    println!("region  signs (-a, -b, 1-b, 1-2b, 1-|c|^2, 2b-|c|^2)");
    for r in RegionId::all() {
        println!("{:>6}  {}", r.get(), labeling.signs(r).to_sign_string());
    }
    println!("checksum {}", labeling.checksum());
}
