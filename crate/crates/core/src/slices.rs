//! The tiling restricted to the plane where the last `k` coordinates vanish.
//!
//! A tile `T(z, sigma)` meets that plane exactly when the bottom coordinates
//! `y = Cbar_sigmahat^{-1} Cbar z` pass the half-open test, and then its
//! slice is `Pi(C_sigma) + p_r(M z)`. Translations `M z` that keep the plane
//! fixed form an `r`-dimensional lattice `B`, so the slice is periodic.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::fragments::{Decomposition, FragmentSet, SignClass, SubsetIndex};
use crate::linalg::{signum, sub, Matrix, Rational, Vector};
use crate::tiling::{
    ceil_i64, floor_i64, half_open_contains, CoverageReport, GenericDirection, IntBox, Tiling,
};

/// Bottom rows integral and the `k x k` minors of `Cbar` coprime.
pub fn slice_precondition(d: &Decomposition) -> bool {
    let cbar = d.cbar_matrix(&SubsetIndex::full(d.n()));
    let Ok(cbar) = cbar else { return false };
    if !cbar.is_integral() {
        return false;
    }
    let mut g = BigInt::zero();
    for cols in SubsetIndex::all_of_size(d.n(), d.dims.k) {
        let minor = cbar.select_columns(cols.members()).det().expect("square minor");
        g = g.gcd(minor.numer());
        if g.is_one() {
            return true;
        }
    }
    false
}

/// `M U = [[A, B], [I_k, 0]]` with `U` unimodular.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    pub u: Matrix,
    /// `r x k`, above the identity block.
    pub a: Matrix,
    /// `r x r` basis of the translations that preserve the slice plane.
    pub b: Matrix,
}

type IntMatrix = Vec<Vec<BigInt>>;

fn column_axpy(m: &mut IntMatrix, target: usize, source: usize, factor: &BigInt) {
    for row in m.iter_mut() {
        let delta = &row[source] * factor;
        row[target] -= delta;
    }
}

fn column_swap(m: &mut IntMatrix, a: usize, b: usize) {
    for row in m.iter_mut() {
        row.swap(a, b);
    }
}

fn column_negate(m: &mut IntMatrix, c: usize) {
    for row in m.iter_mut() {
        row[c] = -row[c].clone();
    }
}

/// Column Hermite reduction of the bottom block of `M` to `[I_k | 0]`.
pub fn unimodular_reduce(d: &Decomposition) -> Result<Reduction> {
    if !slice_precondition(d) {
        return Err(Error::Precondition(
            "bottom rows must be integral with coprime maximal minors".into(),
        ));
    }
    let n = d.n();
    let (r, k) = (d.dims.r, d.dims.k);
    let mut low: IntMatrix = (r..n)
        .map(|i| d.m.row(i).iter().map(|v| v.to_integer()).collect())
        .collect();
    let mut u: IntMatrix = (0..n)
        .map(|i| (0..n).map(|j| BigInt::from((i == j) as i64)).collect())
        .collect();
    let apply = |low: &mut IntMatrix, u: &mut IntMatrix, op: &dyn Fn(&mut IntMatrix)| {
        op(low);
        op(u);
    };

    for i in 0..k {
        // Euclid across columns i..n until one nonzero entry remains in row i
        loop {
            let pivot = (i..n)
                .filter(|&c| !low[i][c].is_zero())
                .min_by(|&a, &b| low[i][a].abs().cmp(&low[i][b].abs()).then(a.cmp(&b)));
            let Some(pivot) = pivot else {
                return Err(Error::RankDeficient { expected: k, found: i });
            };
            let mut changed = false;
            for c in i..n {
                if c != pivot && !low[i][c].is_zero() {
                    let q = low[i][c].div_floor(&low[i][pivot]);
                    apply(&mut low, &mut u, &|m| column_axpy(m, c, pivot, &q));
                    changed = true;
                }
            }
            if !changed {
                apply(&mut low, &mut u, &|m| column_swap(m, i, pivot));
                break;
            }
        }
        if !low[i][i].abs().is_one() {
            return Err(Error::Precondition("maximal minors are not coprime".into()));
        }
        if low[i][i].is_negative() {
            apply(&mut low, &mut u, &|m| column_negate(m, i));
        }
        for j in 0..i {
            let q = low[i][j].clone();
            if !q.is_zero() {
                apply(&mut low, &mut u, &|m| column_axpy(m, j, i, &q));
            }
        }
    }

    let u = Matrix::from_rows(u.into_iter().map(|row| row.into_iter().map(Rational::from_integer).collect()).collect())?;
    let mu = d.m.mul(&u)?;
    let top = mu.select_rows(0..r);
    Ok(Reduction {
        a: top.select_columns(&(0..k).collect::<Vec<_>>()),
        b: top.select_columns(&(k..n).collect::<Vec<_>>()),
        u,
    })
}

/// Canonical representative of `v` modulo the lattice spanned by `b`.
pub fn reduce_mod_lattice(b: &Matrix, v: &[Rational]) -> Result<Vector> {
    let coords = b.solve(v)?;
    let frac: Vector = coords.iter().map(|c| c - c.floor()).collect();
    b.mul_vec(&frac)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SliceTile {
    pub z: Vec<i64>,
    /// `p_r(M z)`; the slice tile is `Pi(C_sigma)` translated by this.
    pub offset: Vector,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SliceClass {
    pub sigma: SubsetIndex,
    pub class: SignClass,
    /// `C_sigma`, the tile shape in the plane.
    pub shape: Matrix,
    /// `|det C_sigma|`
    pub area: Rational,
    /// Half-open signs for the columns of `shape`.
    pub rule_signs: Vec<i32>,
    /// One offset modulo `B` per tile class, sorted. Two classes may share
    /// an offset, in which case the slice has coinciding tiles.
    pub offsets: Vec<Vector>,
    /// `|det Cbar_sigmahat|` for invertible fragments, zero otherwise.
    pub expected_count: usize,
    pub tiles: Vec<SliceTile>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SliceLayout {
    pub reduction: Reduction,
    pub window: IntBox,
    pub classes: Vec<SliceClass>,
}

impl SliceLayout {
    pub fn b(&self) -> &Matrix {
        &self.reduction.b
    }

    /// `(sum of sign * area * offset count, (-1)^k sgn(det M) |det B|)`.
    pub fn area_balance(&self, fs: &FragmentSet) -> Result<(Rational, Rational)> {
        let lhs = self.classes.iter().fold(Rational::zero(), |acc, c| {
            acc + Rational::from_integer(c.class.weight().into()) * &c.area * Rational::from_integer(c.offsets.len().into())
        });
        let rhs = Rational::from_integer(fs.expected_coverage().into()) * self.b().det()?.abs();
        Ok((lhs, rhs))
    }

    /// Signed count at `p` computed from the periodic description alone.
    pub fn coverage_at(&self, p: &[Rational]) -> Result<i32> {
        let b = self.b();
        let b_inv = b.inverse()?;
        let mut f = 0;
        for class in self.classes.iter().filter(|c| c.class != SignClass::Degenerate) {
            let g = b_inv.mul(&class.shape)?;
            for offset in &class.offsets {
                let a = b_inv.mul_vec(&sub(p, offset))?;
                let (lo, hi): (Vec<i64>, Vec<i64>) = (0..g.rows())
                    .map(|i| {
                        let (pos, neg) = g.row(i).iter().fold((Rational::zero(), Rational::zero()), |(p, n), v| {
                            if v.is_positive() {
                                (p + v, n)
                            } else {
                                (p, n + v)
                            }
                        });
                        (ceil_i64(&(&a[i] - pos)), floor_i64(&(&a[i] - neg)))
                    })
                    .unzip();
                for t in (IntBox { lo, hi }).points() {
                    let q = sub(&sub(p, offset), &b.mul_int_vec(&t)?);
                    if half_open_contains(&class.shape.solve(&q)?, &class.rule_signs) {
                        f += class.class.weight();
                    }
                }
            }
        }
        Ok(f)
    }
}

fn integer_vector(v: &[Rational]) -> Vec<BigInt> {
    v.iter().map(|x| x.to_integer()).collect()
}

/// Slice tiles for every `z` in `window`, with offset classes modulo `B`.
pub fn slice_layout(fs: &FragmentSet, w: &GenericDirection, window: &IntBox) -> Result<SliceLayout> {
    let d = &fs.decomposition;
    let reduction = unimodular_reduce(d)?;
    if window.lo.len() != fs.n() {
        return Err(Error::Dimension("window dimension".into()));
    }
    let r = fs.dims().r;
    let cbar_all = d.cbar_matrix(&SubsetIndex::full(fs.n()))?;
    let mut classes = Vec::with_capacity(fs.fragments.len());
    for frag in &fs.fragments {
        let shape = frag.c.clone();
        let mut class = SliceClass {
            sigma: frag.sigma.clone(),
            class: frag.class,
            area: frag.det_c.abs(),
            shape,
            rule_signs: Vec::new(),
            offsets: Vec::new(),
            expected_count: 0,
            tiles: Vec::new(),
        };
        if frag.is_degenerate() {
            classes.push(class);
            continue;
        }
        let lambda = frag.s.solve(&w.w)?;
        class.rule_signs = frag.sigma.members().iter().map(|&i| signum(&lambda[i])).collect();
        let bottom_signs: Vec<i32> = frag.sigma.complement().members().iter().map(|&i| signum(&lambda[i])).collect();
        class.expected_count = frag.det_cbar.abs().to_integer().to_usize().expect("small count");
        let cbar_inv = frag.cbar.inverse()?;
        // y depends on z only through m = Cbar z, so cache per m
        let mut verdicts: BTreeMap<Vec<BigInt>, bool> = BTreeMap::new();
        let mut offsets: BTreeMap<Vec<BigInt>, Vector> = BTreeMap::new();
        for z in window.points() {
            let m = cbar_all.mul_int_vec(&z)?;
            let key = integer_vector(&m);
            let hit = match verdicts.get(&key) {
                Some(&hit) => hit,
                None => {
                    let hit = half_open_contains(&cbar_inv.mul_vec(&m)?, &bottom_signs);
                    verdicts.insert(key.clone(), hit);
                    hit
                }
            };
            if hit {
                let offset = fs.m().mul_int_vec(&z)?[..r].to_vec();
                if !offsets.contains_key(&key) {
                    offsets.insert(key, reduce_mod_lattice(&reduction.b, &offset)?);
                }
                class.tiles.push(SliceTile { z, offset });
            }
        }
        class.offsets = offsets.into_values().collect();
        class.offsets.sort();
        classes.push(class);
    }
    Ok(SliceLayout {
        reduction,
        window: window.clone(),
        classes,
    })
}

/// Offset classes built from the reduction instead of a window: each
/// integer `m` in the half-open parallelepiped of `Cbar_sigmahat` comes from
/// `z = U (-m, 0)`, whose offset is `-A m`.
pub fn constructed_offsets(fs: &FragmentSet, w: &GenericDirection, sigma: &SubsetIndex) -> Result<Vec<Vector>> {
    let reduction = unimodular_reduce(&fs.decomposition)?;
    let frag = fs.fragment(sigma)?;
    if frag.is_degenerate() {
        return Ok(Vec::new());
    }
    let lambda = frag.s.solve(&w.w)?;
    let signs: Vec<i32> = sigma.complement().members().iter().map(|&i| signum(&lambda[i])).collect();
    let cbar = &frag.cbar;
    let k = cbar.rows();
    // integer points of the closed parallelepiped lie in this box
    let (lo, hi): (Vec<i64>, Vec<i64>) = (0..k)
        .map(|i| {
            let row = cbar.row(i);
            let pos: Rational = row.iter().filter(|v| v.is_positive()).sum();
            let neg: Rational = row.iter().filter(|v| v.is_negative()).sum();
            (ceil_i64(&neg), floor_i64(&pos))
        })
        .unzip();
    let cbar_inv = cbar.inverse()?;
    let mut out = Vec::new();
    for m in (IntBox { lo, hi }).points() {
        let mv: Vector = m.iter().map(|&v| Rational::from_integer(v.into())).collect();
        if half_open_contains(&cbar_inv.mul_vec(&mv)?, &signs) {
            let neg_m: Vec<i64> = m.iter().map(|v| -v).collect();
            out.push(reduce_mod_lattice(&reduction.b, &reduction.a.mul_int_vec(&neg_m)?)?);
        }
    }
    out.sort();
    Ok(out)
}

/// Signed count at `(p_r, 0)`.
pub fn slice_coverage(fs: &FragmentSet, w: &GenericDirection, p_r: &[Rational]) -> Result<CoverageReport> {
    let r = fs.dims().r;
    if p_r.len() != r {
        return Err(Error::Dimension(format!("slice point has length {}, expected {r}", p_r.len())));
    }
    let mut p = p_r.to_vec();
    p.resize(fs.n(), Rational::zero());
    Tiling::new(fs, w)?.coverage_value(&p)
}
