//! SVG pictures of two-dimensional tilings: the full tiling when
//! `r + k = 2`, or the slice plane when `r = 2`.
//!
//! Geometry is exact up to the final step, where vertex coordinates are
//! printed as decimals with six fractional digits.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::fragments::{FragmentSet, SignClass, SubsetIndex};
use crate::linalg::{add, frac, int, sub, Matrix, Rational, Vector};
use crate::slices::SliceLayout;
use crate::tiling::{ceil_i64, floor_i64, fmt_int_vec, GenericDirection, IntBox, Tiling};

/// Axis-aligned box `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    pub x0: Rational,
    pub x1: Rational,
    pub y0: Rational,
    pub y1: Rational,
}

impl Window {
    pub fn new(x0: Rational, x1: Rational, y0: Rational, y1: Rational) -> Result<Self> {
        if x0 >= x1 || y0 >= y1 {
            return Err(Error::Precondition("window must have positive width and height".into()));
        }
        Ok(Window { x0, x1, y0, y1 })
    }

    pub fn square(half: i64) -> Self {
        Window::new(int(-half), int(half), int(-half), int(half)).expect("positive size")
    }

    pub fn corners(&self) -> [Vector; 4] {
        [
            vec![self.x0.clone(), self.y0.clone()],
            vec![self.x1.clone(), self.y0.clone()],
            vec![self.x1.clone(), self.y1.clone()],
            vec![self.x0.clone(), self.y1.clone()],
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderConfig {
    pub window: Window,
    /// Pixels per unit.
    pub scale: Rational,
    pub positive_fill: String,
    pub negative_fill: String,
    pub opacity: Rational,
}

impl RenderConfig {
    pub fn new(window: Window) -> Self {
        RenderConfig {
            window,
            scale: int(40),
            positive_fill: "#3b6fd8".into(),
            negative_fill: "#d8493b".into(),
            opacity: frac(1, 2),
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.scale.is_positive() {
            return Err(Error::Precondition("scale must be positive".into()));
        }
        if !self.opacity.is_positive() || self.opacity > int(1) {
            return Err(Error::Precondition("opacity must lie in (0, 1]".into()));
        }
        Ok(())
    }

    fn fill(&self, class: SignClass) -> &str {
        match class {
            SignClass::Negative => &self.negative_fill,
            _ => &self.positive_fill,
        }
    }
}

/// A filled convex polygon belonging to fragment `sigma`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polygon {
    pub sigma: SubsetIndex,
    pub class: SignClass,
    pub label: String,
    pub vertices: Vec<Vector>,
}

/// Polygons grouped by fragment, in subset order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Drawing {
    pub groups: Vec<(SubsetIndex, SignClass, Vec<Polygon>)>,
}

impl Drawing {
    pub fn polygon_count(&self) -> usize {
        self.groups.iter().map(|g| g.2.len()).sum()
    }
}

fn parallelogram(base: &[Rational], g1: &[Rational], g2: &[Rational]) -> Vec<Vector> {
    let b1 = add(base, g1);
    let b12 = add(&b1, g2);
    let b2 = add(base, g2);
    vec![base.to_vec(), b1, b12, b2]
}

fn projection_range(points: &[Vector], axis: &[Rational]) -> (Rational, Rational) {
    let values: Vec<Rational> = points.iter().map(|p| &p[0] * &axis[0] + &p[1] * &axis[1]).collect();
    let lo = values.iter().min().expect("nonempty").clone();
    let hi = values.iter().max().expect("nonempty").clone();
    (lo, hi)
}

/// Whether the interiors of a convex polygon and the window overlap.
pub fn meets_window(polygon: &[Vector], window: &Window) -> bool {
    let rect = window.corners();
    let mut axes = vec![vec![int(1), int(0)], vec![int(0), int(1)]];
    for i in 0..polygon.len() {
        let edge = sub(&polygon[(i + 1) % polygon.len()], &polygon[i]);
        axes.push(vec![-edge[1].clone(), edge[0].clone()]);
    }
    axes.iter().all(|axis| {
        let (plo, phi) = projection_range(polygon, axis);
        let (rlo, rhi) = projection_range(&rect, axis);
        phi > rlo && rhi > plo
    })
}

/// Integer box of `t` such that `origin + g y + lattice t` may meet the
/// window for some `y` in the unit cube.
fn translate_box(lattice_inv: &Matrix, g: &Matrix, origin: &[Rational], window: &Window) -> IntBox {
    let images: Vec<Vector> = window
        .corners()
        .iter()
        .map(|c| lattice_inv.mul_vec(&sub(c, origin)).expect("2-vector"))
        .collect();
    let (lo, hi) = (0..2)
        .map(|i| {
            let a_lo = images.iter().map(|v| &v[i]).min().expect("corners");
            let a_hi = images.iter().map(|v| &v[i]).max().expect("corners");
            let pos: Rational = g.row(i).iter().filter(|v| v.is_positive()).sum();
            let neg: Rational = g.row(i).iter().filter(|v| v.is_negative()).sum();
            (ceil_i64(&(a_lo - pos)), floor_i64(&(a_hi - neg)))
        })
        .unzip();
    IntBox { lo, hi }
}

/// Every tile of a planar tiling meeting the window.
pub fn tiling_drawing(fs: &FragmentSet, w: &GenericDirection, window: &Window) -> Result<Drawing> {
    if fs.n() != 2 {
        return Err(Error::NotTwoDimensional(format!("tiling lives in dimension {}", fs.n())));
    }
    let tiling = Tiling::new(fs, w)?;
    let m_inv = fs.m().inverse()?;
    let origin = vec![Rational::zero(), Rational::zero()];
    let mut groups = Vec::new();
    for frag in fs.fragments.iter().filter(|f| !f.is_degenerate()) {
        debug_assert!(tiling.piece(&frag.sigma).is_some());
        let g = m_inv.mul(&frag.s)?;
        let cols = frag.s.columns();
        let mut polys = Vec::new();
        for z in translate_box(&m_inv, &g, &origin, window).points() {
            let base = fs.m().mul_int_vec(&z)?;
            let vertices = parallelogram(&base, &cols[0], &cols[1]);
            if meets_window(&vertices, window) {
                polys.push(Polygon {
                    sigma: frag.sigma.clone(),
                    class: frag.class,
                    label: format!("z={}", fmt_int_vec(&z)),
                    vertices,
                });
            }
        }
        groups.push((frag.sigma.clone(), frag.class, polys));
    }
    Ok(Drawing { groups })
}

/// Every slice tile meeting the window, from the periodic description.
pub fn slice_drawing(layout: &SliceLayout, window: &Window) -> Result<Drawing> {
    let b = layout.b();
    if b.rows() != 2 {
        return Err(Error::NotTwoDimensional(format!("slice plane has dimension {}", b.rows())));
    }
    let b_inv = b.inverse()?;
    let mut groups = Vec::new();
    for class in layout.classes.iter().filter(|c| c.class != SignClass::Degenerate) {
        let g = b_inv.mul(&class.shape)?;
        let cols = class.shape.columns();
        let mut polys = Vec::new();
        for (index, offset) in class.offsets.iter().enumerate() {
            for t in translate_box(&b_inv, &g, offset, window).points() {
                let base = add(offset, &b.mul_int_vec(&t)?);
                let vertices = parallelogram(&base, &cols[0], &cols[1]);
                if meets_window(&vertices, window) {
                    polys.push(Polygon {
                        sigma: class.sigma.clone(),
                        class: class.class,
                        label: format!("x{}+B{}", index + 1, fmt_int_vec(&t)),
                        vertices,
                    });
                }
            }
        }
        groups.push((class.sigma.clone(), class.class, polys));
    }
    Ok(Drawing { groups })
}

/// `v` rounded half away from zero to six fractional digits.
pub fn decimal6(v: &Rational) -> String {
    let scaled = v * Rational::from_integer(BigInt::from(1_000_000));
    let rounded = if scaled.is_negative() {
        -((-scaled) + frac(1, 2)).floor().to_integer()
    } else {
        (scaled + frac(1, 2)).floor().to_integer()
    };
    let negative = rounded.is_negative();
    let (whole, part) = rounded.abs().div_rem(&BigInt::from(1_000_000));
    format!("{}{}.{:0>6}", if negative { "-" } else { "" }, whole, part.to_string())
}

fn subset_slug(sigma: &SubsetIndex) -> String {
    let parts: Vec<String> = sigma.members().iter().map(|i| (i + 1).to_string()).collect();
    if parts.is_empty() {
        "sigma-empty".into()
    } else {
        format!("sigma-{}", parts.join("-"))
    }
}

pub fn render_svg(drawing: &Drawing, cfg: &RenderConfig) -> Result<String> {
    cfg.validate()?;
    let win = &cfg.window;
    let width = (&win.x1 - &win.x0) * &cfg.scale;
    let height = (&win.y1 - &win.y0) * &cfg.scale;
    let px = |p: &Vector| {
        let x = (&p[0] - &win.x0) * &cfg.scale;
        let y = (&win.y1 - &p[1]) * &cfg.scale;
        format!("{},{}", decimal6(&x), decimal6(&y))
    };
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">",
        w = decimal6(&width),
        h = decimal6(&height)
    );
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n");
    for (sigma, class, polys) in &drawing.groups {
        let _ = writeln!(
            out,
            "<g id=\"{}\" class=\"{}\" fill=\"{}\" fill-opacity=\"{}\" stroke=\"#202020\" stroke-width=\"1\">",
            subset_slug(sigma),
            class.label(),
            cfg.fill(*class),
            decimal6(&cfg.opacity)
        );
        for poly in polys {
            let pts: Vec<String> = poly.vertices.iter().map(&px).collect();
            let _ = writeln!(out, "<polygon data-tile=\"{}\" points=\"{}\"/>", poly.label, pts.join(" "));
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn render_tiling_svg(fs: &FragmentSet, w: &GenericDirection, cfg: &RenderConfig) -> Result<String> {
    render_svg(&tiling_drawing(fs, w, &cfg.window)?, cfg)
}

pub fn render_slice_svg(layout: &SliceLayout, cfg: &RenderConfig) -> Result<String> {
    render_svg(&slice_drawing(layout, &cfg.window)?, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;
    use crate::slices::slice_layout;
    use crate::tiling::choose_generic_direction;

    #[test]
    fn decimal_formatting() {
        assert_eq!(decimal6(&frac(1, 3)), "0.333333");
        assert_eq!(decimal6(&frac(2, 3)), "0.666667");
        assert_eq!(decimal6(&frac(-1, 8)), "-0.125000");
        assert_eq!(decimal6(&int(-7)), "-7.000000");
        assert_eq!(decimal6(&frac(-1, 3_000_000)), "0.000000");
    }

    fn cross(a: &[Rational], b: &[Rational]) -> Rational {
        &a[0] * &b[1] - &a[1] * &b[0]
    }

    /// Sutherland-Hodgman clip of a convex polygon to the window, then area.
    fn clipped_area(poly: &[Vector], win: &Window) -> Rational {
        let mut pts: Vec<Vector> = poly.to_vec();
        // each half-plane as (axis, bound, keep-greater)
        let planes = [
            (0usize, win.x0.clone(), true),
            (0, win.x1.clone(), false),
            (1, win.y0.clone(), true),
            (1, win.y1.clone(), false),
        ];
        for (axis, bound, greater) in planes {
            let inside = |p: &Vector| if greater { p[axis] >= bound } else { p[axis] <= bound };
            let mut next = Vec::new();
            for i in 0..pts.len() {
                let cur = &pts[i];
                let prev = &pts[(i + pts.len() - 1) % pts.len()];
                let cut = |a: &Vector, b: &Vector| {
                    let t = (&bound - &a[axis]) / (&b[axis] - &a[axis]);
                    add(a, &crate::linalg::scale(&sub(b, a), &t))
                };
                match (inside(prev), inside(cur)) {
                    (true, true) => next.push(cur.clone()),
                    (true, false) => next.push(cut(prev, cur)),
                    (false, true) => {
                        next.push(cut(prev, cur));
                        next.push(cur.clone());
                    }
                    (false, false) => {}
                }
            }
            pts = next;
            if pts.is_empty() {
                return Rational::zero();
            }
        }
        (0..pts.len())
            .map(|i| cross(&pts[i], &pts[(i + 1) % pts.len()]))
            .sum::<Rational>()
            .abs()
    }

    #[test]
    fn k_polygon_count_matches_clipping_oracle() {
        let fs = k_fs();
        let w = choose_generic_direction(&fs, 0).unwrap();
        let window = Window::square(5);
        let drawing = tiling_drawing(&fs, &w, &window).unwrap();
        let mut oracle = 0;
        for frag in fs.fragments.iter().filter(|f| !f.is_degenerate()) {
            let cols = frag.s.columns();
            for z in IntBox::cube(2, 30).points() {
                let base = fs.m().mul_int_vec(&z).unwrap();
                if clipped_area(&parallelogram(&base, &cols[0], &cols[1]), &window).is_positive() {
                    oracle += 1;
                }
            }
        }
        assert_eq!(drawing.polygon_count(), oracle);
        assert!(oracle > 0);
    }

    #[test]
    fn k_svg_structure() {
        let fs = k_fs();
        let w = choose_generic_direction(&fs, 0).unwrap();
        let svg = render_tiling_svg(&fs, &w, &RenderConfig::new(Window::square(5))).unwrap();
        assert!(svg.starts_with("<?xml"));
        assert!(svg.contains("<svg "));
        assert!(svg.contains("<polygon "));
        assert_eq!(svg.matches("<g ").count(), 2);
        assert_eq!(svg, render_tiling_svg(&fs, &w, &RenderConfig::new(Window::square(5))).unwrap());
    }

    #[test]
    fn m4_slice_has_six_groups() {
        let fs = m4_fs();
        let w = choose_generic_direction(&fs, 0).unwrap();
        let layout = slice_layout(&fs, &w, &IntBox::cube(4, 3)).unwrap();
        let drawing = slice_drawing(&layout, &Window::square(8)).unwrap();
        assert_eq!(drawing.groups.len(), 6);
        assert!(drawing.groups.iter().all(|g| !g.2.is_empty()));
        let svg = render_svg(&drawing, &RenderConfig::new(Window::square(8))).unwrap();
        assert_eq!(svg.matches("<g ").count(), 6);
        assert_eq!(svg.matches("class=\"negative\"").count(), 1);
    }

    #[test]
    fn full_tiling_of_m4_is_not_planar() {
        let fs = m4_fs();
        let w = choose_generic_direction(&fs, 0).unwrap();
        assert!(matches!(tiling_drawing(&fs, &w, &Window::square(1)), Err(Error::NotTwoDimensional(_))));
        let k = k_fs();
        let wk = choose_generic_direction(&k, 0).unwrap();
        let layout = slice_layout(&k, &wk, &IntBox::cube(2, 2)).unwrap();
        assert!(matches!(slice_drawing(&layout, &Window::square(1)), Err(Error::NotTwoDimensional(_))));
    }

    #[test]
    fn touching_is_not_meeting() {
        let square = parallelogram(&[int(5), int(0)], &[int(1), int(0)], &[int(0), int(1)]);
        assert!(!meets_window(&square, &Window::square(5)));
        let inside = parallelogram(&[int(4), int(0)], &[int(1), int(0)], &[int(0), int(1)]);
        assert!(meets_window(&inside, &Window::square(5)));
    }
}
