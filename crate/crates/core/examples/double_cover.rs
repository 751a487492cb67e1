// Projections of the up facets cover the zonotope once, and so do the down
// facets, for every collection of the running example.

use signed_tiling::facets::{double_cover_check, CollectionKind};
use signed_tiling::tiling::choose_generic_direction;
use signed_tiling::{Dimensions, FragmentSet, Matrix, SubsetIndex};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let m = Matrix::from_i64_rows(&[&[3, 2, -4, 1], &[1, 0, 2, 2], &[2, 0, -1, 1], &[0, 1, -2, 3]]);
    let fs = FragmentSet::from_matrix(&m, Dimensions::new(2, 2)?)?;
    let w = choose_generic_direction(&fs, 1)?;

    for (kind, size) in [(CollectionKind::Tau, 1), (CollectionKind::Gamma, 3)] {
        for index in SubsetIndex::all_of_size(4, size) {
            let report = double_cover_check(&fs, &w, kind, &index, &[0; 4], 100, 1)?;
            println!("{kind} {index}: hits {:?}, redraws {}", report.hit_histogram, report.redraws);
            assert!(report.pass);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("double cover example");
}
