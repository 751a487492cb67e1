// The six facets sharing a hyperplane for tau = {2}, their up/down split,
// and the kernel vector that drives it.

use signed_tiling::facets::{facet_collection, h_vector, up_down_partition, CollectionKind};
use signed_tiling::linalg::int;
use signed_tiling::{Dimensions, FragmentSet, GenericDirection, Matrix, SubsetIndex};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let m = Matrix::from_i64_rows(&[&[3, 2, -4, 1], &[1, 0, 2, 2], &[2, 0, -1, 1], &[0, 1, -2, 3]]);
    let fs = FragmentSet::from_matrix(&m, Dimensions::new(2, 2)?)?;
    let w = GenericDirection::certify(&fs, vec![int(1); 4])?;
    let tau = SubsetIndex::one_based(4, &[2])?;

    let coll = facet_collection(&fs, CollectionKind::Tau, &[0; 4], &tau)?;
    let part = up_down_partition(&fs, &w, &coll)?;
    for member in &part.up {
        println!("up   {}", member.tilde_label());
    }
    for member in &part.down {
        println!("down {}", member.tilde_label());
    }

    let h = h_vector(&fs, &w, CollectionKind::Tau, &tau)?;
    println!("h = {:?}", h.iter().map(ToString::to_string).collect::<Vec<_>>());
    let cbar = fs.decomposition.cbar_matrix(&tau.complement())?;
    assert!(cbar.mul_vec(&h)?.iter().all(|v| *v == int(0)));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("facet collections example");
}
