// Walking along `w` through several tile boundaries: the facets met at each
// crossing cancel, so the signed count stays put.

use signed_tiling::facets::crossing_check;
use signed_tiling::linalg::{frac, int};
use signed_tiling::tiling::choose_generic_direction;
use signed_tiling::{Dimensions, FragmentSet, Matrix};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let m = Matrix::from_i64_rows(&[&[3, 2, -4, 1], &[1, 0, 2, 2], &[2, 0, -1, 1], &[0, 1, -2, 3]]);
    let fs = FragmentSet::from_matrix(&m, Dimensions::new(2, 2)?)?;
    let w = choose_generic_direction(&fs, 2)?;
    let p = vec![frac(1, 3), frac(-2, 7), frac(5, 11), frac(1, 13)];

    let report = crossing_check(&fs, &w, &p, &int(4), 2)?;
    for c in &report.crossings {
        let facets: Vec<String> = c.facets.iter().map(|f| format!("{}[{:+}]", f.facet, f.wsgn * f.tsgn)).collect();
        println!("t = {:.4}: {}", num_traits::ToPrimitive::to_f64(&c.t).unwrap_or(f64::NAN), facets.join(" "));
    }
    println!("f on segments: {:?}", report.segment_values);
    assert!(report.pass);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("crossing example");
}
