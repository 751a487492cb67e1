// The tiling cut by the plane x3 = x4 = 0 is a periodic signed tiling of
// the plane with six tile classes.

use signed_tiling::slices::{slice_layout, unimodular_reduce};
use signed_tiling::tiling::{choose_generic_direction, IntBox};
use signed_tiling::{Dimensions, FragmentSet, Matrix};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let m = Matrix::from_i64_rows(&[&[3, 2, -4, 1], &[1, 0, 2, 2], &[2, 0, -1, 1], &[0, 1, -2, 3]]);
    let fs = FragmentSet::from_matrix(&m, Dimensions::new(2, 2)?)?;
    let w = choose_generic_direction(&fs, 0)?;

    let reduction = unimodular_reduce(&fs.decomposition)?;
    println!("M U = {}", fs.m().mul(&reduction.u)?);

    let layout = slice_layout(&fs, &w, &IntBox::cube(4, 3))?;
    for class in &layout.classes {
        println!(
            "{} {:8} area {:>2} x {} translates",
            class.sigma,
            class.class,
            class.area,
            class.offsets.len()
        );
    }
    let (lhs, rhs) = layout.area_balance(&fs)?;
    println!("signed area per period {lhs}, lattice covolume {rhs}");
    assert_eq!(lhs, rhs);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("slice example");
}
