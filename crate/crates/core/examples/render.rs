// SVG pictures: the herringbone tiling from a 2x2 matrix and the slice of
// the 4x4 example. Files land in the system temp directory.

use signed_tiling::render::{render_slice_svg, render_tiling_svg, RenderConfig, Window};
use signed_tiling::slices::slice_layout;
use signed_tiling::tiling::{choose_generic_direction, IntBox};
use signed_tiling::{Dimensions, FragmentSet, Matrix};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir();

    let k = FragmentSet::from_matrix(&Matrix::from_i64_rows(&[&[1, 2], &[-1, 3]]), Dimensions::new(1, 1)?)?;
    let w = choose_generic_direction(&k, 0)?;
    let svg = render_tiling_svg(&k, &w, &RenderConfig::new(Window::square(5)))?;
    let path = dir.join("signtile-herringbone.svg");
    std::fs::write(&path, &svg)?;
    println!("{} polygons -> {}", svg.matches("<polygon").count(), path.display());

    let m = Matrix::from_i64_rows(&[&[3, 2, -4, 1], &[1, 0, 2, 2], &[2, 0, -1, 1], &[0, 1, -2, 3]]);
    let fs = FragmentSet::from_matrix(&m, Dimensions::new(2, 2)?)?;
    let w = choose_generic_direction(&fs, 0)?;
    let layout = slice_layout(&fs, &w, &IntBox::cube(4, 3))?;
    let svg = render_slice_svg(&layout, &RenderConfig::new(Window::square(6)))?;
    let path = dir.join("signtile-slice.svg");
    std::fs::write(&path, &svg)?;
    println!("{} polygons in {} groups -> {}", svg.matches("<polygon").count(), svg.matches("<g ").count(), path.display());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("render example");
}
