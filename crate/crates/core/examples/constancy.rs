// Sampling the fundamental domain of `M` and confirming the signed count
// never changes, for a matrix where positive and negative tiles overlap.

use signed_tiling::tiling::{choose_generic_direction, verify_constancy};
use signed_tiling::{Dimensions, FragmentSet, Matrix};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let l = Matrix::from_i64_rows(&[&[1, 2], &[1, 5]]);
    let fs = FragmentSet::from_matrix(&l, Dimensions::new(1, 1)?)?;
    let w = choose_generic_direction(&fs, 7)?;
    let report = verify_constancy(&fs, &w, 2000, 7)?;

    for ((pos, neg), count) in &report.census_histogram {
        println!("{count:5} samples in {pos} positive and {neg} negative tiles");
    }
    println!("values seen: {:?}, expected {}", report.distinct_f_values, report.expected);
    assert!(report.pass);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("constancy example");
}
