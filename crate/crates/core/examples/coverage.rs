// Which tiles contain a point, and the signed count there.
//
// The point sits on the boundary of two tiles; the direction `w` decides
// which of them keep it.

use signed_tiling::linalg::{frac, int};
use signed_tiling::tiling::Tiling;
use signed_tiling::{Dimensions, FragmentSet, GenericDirection, Matrix};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let m = Matrix::from_i64_rows(&[&[3, 2, -4, 1], &[1, 0, 2, 2], &[2, 0, -1, 1], &[0, 1, -2, 3]]);
    let fs = FragmentSet::from_matrix(&m, Dimensions::new(2, 2)?)?;
    let p = vec![int(-2), int(1), frac(-1, 2), frac(-1, 2)];

    for w in [vec![int(1); 4], vec![int(1), int(-1), int(1), int(1)]] {
        let w = GenericDirection::certify(&fs, w)?;
        let report = Tiling::new(&fs, &w)?.coverage_value(&p)?;
        println!("w = {:?}", w.w.iter().map(ToString::to_string).collect::<Vec<_>>());
        for (tile, class) in &report.tiles {
            println!("  {tile} {class}");
        }
        println!("  f = {} - {} = {}", report.positive, report.negative, report.f_value);
        assert_eq!(report.f_value, 1);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("coverage example");
}
