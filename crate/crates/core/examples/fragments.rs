// Fragment matrices of the 4x4 running example and the two determinant
// identities they satisfy.

use signed_tiling::fragments::{laplace_identity, sandc_identity};
use signed_tiling::{Dimensions, FragmentSet, Matrix};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let m = Matrix::from_i64_rows(&[&[3, 2, -4, 1], &[1, 0, 2, 2], &[2, 0, -1, 1], &[0, 1, -2, 3]]);
    let fs = FragmentSet::from_matrix(&m, Dimensions::new(2, 2)?)?;

    println!("det M = {}", fs.det_m);
    for f in &fs.fragments {
        println!("S{} = {}   det = {} ({})", f.sigma, f.s, f.det, f.class);
        let (det, product) = sandc_identity(&fs, &f.sigma)?;
        assert_eq!(det, product);
    }

    let (signed_det, sum) = laplace_identity(&fs);
    println!("(-1)^k det M = {signed_det}, sum of fragment determinants = {sum}");
    assert_eq!(signed_det, sum);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("fragments example");
}
