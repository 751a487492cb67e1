//! Half-open membership, generic directions and the signed coverage count.
//!
//! A tile `T(z, sigma)` is the half-open parallelepiped of `S_sigma`
//! translated by `M z`. Its boundary is resolved by a fixed generic direction
//! `w`: a boundary point belongs to the tile exactly when a small push along
//! `w` lands inside.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fragments::{FragmentSet, SignClass, SubsetIndex};
use crate::linalg::{signum, sub, Matrix, Rational, Vector};

/// Random rationals are drawn with this many bits of denominator.
pub const SAMPLE_BITS: u32 = 31;

const GENERIC_RETRIES: usize = 64;
const MAX_REDRAWS: usize = 1000;

pub(crate) fn sample_denominator() -> BigInt {
    BigInt::one() << SAMPLE_BITS
}

/// Deterministic stream for sample `index` under `seed`.
pub(crate) fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform rational in `[0, 1)` with denominator `2^31`.
pub(crate) fn unit_rational(rng: &mut ChaCha8Rng) -> Rational {
    let num: u64 = rng.gen_range(0..1u64 << SAMPLE_BITS);
    Rational::new(BigInt::from(num), sample_denominator())
}

pub(crate) fn unit_vector_sample(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    (0..n).map(|_| unit_rational(rng)).collect()
}

pub(crate) fn floor_i64(x: &Rational) -> i64 {
    x.floor().to_integer().to_i64().expect("lattice coordinate fits in i64")
}

pub(crate) fn ceil_i64(x: &Rational) -> i64 {
    x.ceil().to_integer().to_i64().expect("lattice coordinate fits in i64")
}

/// Which entries of which matrices were checked nonzero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateEntry {
    pub label: String,
    pub checked: usize,
}

/// A direction `w` together with the list of conditions that make it
/// generic for a given fragment set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenericDirection {
    pub w: Vector,
    /// First `r` entries.
    pub w_prime: Vector,
    /// Last `k` entries.
    pub w_double_prime: Vector,
    pub certificate: Vec<CertificateEntry>,
}

impl GenericDirection {
    /// Checks that every entry of `M^{-1} w` and of `S_sigma^{-1} w` (for
    /// each invertible `S_sigma`) is nonzero.
    pub fn certify(fs: &FragmentSet, w: Vector) -> Result<Self> {
        let n = fs.n();
        if w.len() != n {
            return Err(Error::Dimension(format!("direction has length {}, expected {n}", w.len())));
        }
        if !fs.is_invertible() {
            return Err(Error::Singular);
        }
        let mut certificate = Vec::new();
        let mut check = |label: String, mat: &Matrix| -> Result<()> {
            let coords = mat.solve(&w)?;
            if coords.iter().any(Zero::is_zero) {
                return Err(Error::Genericity(label));
            }
            certificate.push(CertificateEntry { label, checked: coords.len() });
            Ok(())
        };
        check("M".to_string(), fs.m())?;
        for f in fs.fragments.iter().filter(|f| !f.is_degenerate()) {
            check(format!("S{}", f.sigma), &f.s)?;
        }
        let r = fs.dims().r;
        Ok(GenericDirection {
            w_prime: w[..r].to_vec(),
            w_double_prime: w[r..].to_vec(),
            w,
            certificate,
        })
    }
}

/// Draws `w` with entries in `[1, 2^31) / 2^31` until it certifies.
pub fn choose_generic_direction(fs: &FragmentSet, seed: u64) -> Result<GenericDirection> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..GENERIC_RETRIES {
        let w: Vector = (0..fs.n())
            .map(|_| {
                let num: u64 = rng.gen_range(1..1u64 << SAMPLE_BITS);
                Rational::new(BigInt::from(num), sample_denominator())
            })
            .collect();
        match GenericDirection::certify(fs, w) {
            Ok(g) => return Ok(g),
            Err(Error::Genericity(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::GenericityExhausted(GENERIC_RETRIES))
}

/// Closed-open rule per coordinate: `0 <= y < 1` when the direction
/// coordinate is positive, `0 < y <= 1` when negative.
pub fn half_open_contains(y: &[Rational], direction_signs: &[i32]) -> bool {
    y.iter().zip(direction_signs).all(|(yi, &s)| {
        if s > 0 {
            !yi.is_negative() && yi < &Rational::one()
        } else {
            yi.is_positive() && yi <= &Rational::one()
        }
    })
}

/// Membership of `q` in the half-open parallelepiped of `n` with respect to
/// direction `w`.
pub fn pip_contains(n: &Matrix, w: &[Rational], q: &[Rational]) -> Result<bool> {
    if n.det()?.is_zero() {
        return Ok(false);
    }
    let lambda = n.solve(w)?;
    if lambda.iter().any(Zero::is_zero) {
        return Err(Error::Genericity("parallelepiped".into()));
    }
    let signs: Vec<i32> = lambda.iter().map(signum).collect();
    Ok(half_open_contains(&n.solve(q)?, &signs))
}

/// Inclusive box of integer points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntBox {
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
}

impl IntBox {
    pub fn cube(dim: usize, radius: i64) -> Self {
        IntBox {
            lo: vec![-radius; dim],
            hi: vec![radius; dim],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.lo.iter().zip(&self.hi).any(|(l, h)| l > h)
    }

    pub fn len(&self) -> usize {
        if self.is_empty() {
            return 0;
        }
        self.lo.iter().zip(&self.hi).map(|(l, h)| (h - l + 1) as usize).product()
    }

    /// Points in lexicographic order.
    pub fn points(&self) -> IntBoxIter<'_> {
        IntBoxIter {
            bx: self,
            next: (!self.is_empty()).then(|| self.lo.clone()),
        }
    }
}

pub struct IntBoxIter<'a> {
    bx: &'a IntBox,
    next: Option<Vec<i64>>,
}

impl Iterator for IntBoxIter<'_> {
    type Item = Vec<i64>;

    fn next(&mut self) -> Option<Vec<i64>> {
        let current = self.next.take()?;
        let mut following = current.clone();
        for i in (0..following.len()).rev() {
            if following[i] < self.bx.hi[i] {
                following[i] += 1;
                self.next = Some(following);
                break;
            }
            following[i] = self.bx.lo[i];
        }
        Some(current)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TileId {
    pub z: Vec<i64>,
    pub sigma: SubsetIndex,
}

impl fmt::Display for TileId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T({},{})", fmt_int_vec(&self.z), self.sigma)
    }
}

pub(crate) fn fmt_int_vec(z: &[i64]) -> String {
    let parts: Vec<String> = z.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(","))
}

pub(crate) fn fmt_vec(v: &[Rational]) -> String {
    let parts: Vec<String> = v.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(","))
}

/// Precomputed data for one invertible fragment.
#[derive(Debug, Clone)]
pub(crate) struct Piece {
    pub sigma: SubsetIndex,
    pub class: SignClass,
    pub s_inv: Matrix,
    /// `S^{-1} w`
    pub lambda: Vector,
    pub lambda_signs: Vec<i32>,
    /// `S^{-1} M`, so tile coordinates are `S^{-1} p - H z`.
    pub h: Matrix,
    h_den: BigInt,
    h_scaled: Vec<Vec<BigInt>>,
    /// Row sums of the positive and negative parts of `M^{-1} S`.
    g_pos: Vector,
    g_neg: Vector,
}

impl Piece {
    /// Common denominator `d` with `d * S^{-1} p` and `d * H` integral.
    fn scaled(&self, p_local: &[Rational]) -> (BigInt, Vec<BigInt>, Vec<Vec<BigInt>>) {
        let den = p_local.iter().fold(self.h_den.clone(), |acc, v| acc.lcm(v.denom()));
        let factor = &den / &self.h_den;
        let p_scaled = p_local.iter().map(|v| v.numer() * (&den / v.denom())).collect();
        let h_scaled = self
            .h_scaled
            .iter()
            .map(|row| row.iter().map(|v| v * &factor).collect())
            .collect();
        (den, p_scaled, h_scaled)
    }

    pub fn coordinates(&self, p_local: &[Rational], z: &[i64]) -> Vector {
        let shift = self.h.mul_int_vec(z).expect("dimensions agree");
        sub(p_local, &shift)
    }

    /// Integer box of translations `z` whose closed tile may meet the box
    /// `[a_lo, a_hi]` given in `M^{-1}` coordinates.
    pub fn candidate_box(&self, a_lo: &[Rational], a_hi: &[Rational]) -> IntBox {
        let lo = a_lo.iter().zip(&self.g_pos).map(|(a, g)| ceil_i64(&(a - g))).collect();
        let hi = a_hi.iter().zip(&self.g_neg).map(|(a, g)| floor_i64(&(a - g))).collect();
        IntBox { lo, hi }
    }
}

/// Where a point sits relative to one tile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    Outside,
    Interior,
    /// On the boundary of the closure; `included` says whether the half-open
    /// rule keeps it.
    Boundary { included: bool },
}

pub(crate) fn placement(y: &[Rational], signs: &[i32]) -> Placement {
    let one = Rational::one();
    if y.iter().any(|v| v.is_negative() || v > &one) {
        return Placement::Outside;
    }
    if y.iter().all(|v| v.is_positive() && v < &one) {
        return Placement::Interior;
    }
    Placement::Boundary {
        included: half_open_contains(y, signs),
    }
}

/// `placement` for coordinates given as `y / den` with `den > 0`.
fn placement_scaled(y: &[BigInt], den: &BigInt, signs: &[i32]) -> Placement {
    if y.iter().any(|v| v.is_negative() || v > den) {
        return Placement::Outside;
    }
    if y.iter().all(|v| v.is_positive() && v < den) {
        return Placement::Interior;
    }
    let included = y.iter().zip(signs).all(|(v, &s)| {
        if s > 0 {
            v < den
        } else {
            v.is_positive()
        }
    });
    Placement::Boundary { included }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageReport {
    pub point: Vector,
    pub tiles: Vec<(TileId, SignClass)>,
    pub positive: usize,
    pub negative: usize,
    pub f_value: i32,
    pub expected: i32,
    /// True when the point lies on the boundary of some tile closure.
    pub on_boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub sample_count: usize,
    pub seed: u64,
    pub expected: i32,
    pub distinct_f_values: BTreeSet<i32>,
    /// `(positive, negative)` census to frequency.
    pub census_histogram: BTreeMap<(usize, usize), usize>,
    /// Total number of sampled memberships per fragment subset.
    pub class_memberships: Vec<(SubsetIndex, usize)>,
    /// Per-sample sum of squared membership counts, per fragment subset.
    pub class_memberships_sq: Vec<(SubsetIndex, usize)>,
    pub redraws: usize,
    pub pass: bool,
}

/// The signed tiling of a fragment set under a fixed generic direction.
#[derive(Debug, Clone)]
pub struct Tiling {
    fs: FragmentSet,
    w: GenericDirection,
    m_inv: Matrix,
    pieces: Vec<Piece>,
}

impl Tiling {
    pub fn new(fs: &FragmentSet, w: &GenericDirection) -> Result<Self> {
        if w.w.len() != fs.n() {
            return Err(Error::Dimension("direction length".into()));
        }
        let m_inv = fs.m().inverse()?;
        let pieces = fs
            .fragments
            .iter()
            .filter(|f| !f.is_degenerate())
            .map(|f| {
                let s_inv = f.s.inverse()?;
                let lambda = s_inv.mul_vec(&w.w)?;
                if lambda.iter().any(Zero::is_zero) {
                    return Err(Error::Genericity(format!("S{}", f.sigma)));
                }
                let g = m_inv.mul(&f.s)?;
                let (g_pos, g_neg) = (0..g.rows())
                    .map(|i| {
                        g.row(i).iter().fold((Rational::zero(), Rational::zero()), |(p, n), v| {
                            if v.is_positive() {
                                (p + v, n)
                            } else {
                                (p, n + v)
                            }
                        })
                    })
                    .unzip();
                let h = s_inv.mul(fs.m())?;
                let h_den = h.entries().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
                let h_scaled = (0..h.rows())
                    .map(|i| h.row(i).iter().map(|v| v.numer() * (&h_den / v.denom())).collect())
                    .collect();
                Ok(Piece {
                    sigma: f.sigma.clone(),
                    class: f.class,
                    h,
                    h_den,
                    h_scaled,
                    lambda_signs: lambda.iter().map(signum).collect(),
                    lambda,
                    s_inv,
                    g_pos,
                    g_neg,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Tiling {
            fs: fs.clone(),
            w: w.clone(),
            m_inv,
            pieces,
        })
    }

    pub fn fragments(&self) -> &FragmentSet {
        &self.fs
    }

    pub fn direction(&self) -> &GenericDirection {
        &self.w
    }

    pub(crate) fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub(crate) fn m_inv(&self) -> &Matrix {
        &self.m_inv
    }

    pub(crate) fn piece(&self, sigma: &SubsetIndex) -> Option<&Piece> {
        self.pieces.iter().find(|p| &p.sigma == sigma)
    }

    /// Every tile whose closure contains `p`, with its placement.
    pub fn placements_at(&self, p: &[Rational]) -> Result<Vec<(TileId, SignClass, Placement)>> {
        if p.len() != self.fs.n() {
            return Err(Error::Dimension("point length".into()));
        }
        let a = self.m_inv.mul_vec(p)?;
        let mut out = Vec::new();
        for piece in &self.pieces {
            let p_local = piece.s_inv.mul_vec(p)?;
            let (den, p_scaled, h_scaled) = piece.scaled(&p_local);
            for z in piece.candidate_box(&a, &a).points() {
                let y: Vec<BigInt> = p_scaled
                    .iter()
                    .zip(&h_scaled)
                    .map(|(pi, row)| row.iter().zip(&z).fold(pi.clone(), |acc, (h, &zj)| acc - h * zj))
                    .collect();
                let place = placement_scaled(&y, &den, &piece.lambda_signs);
                if place != Placement::Outside {
                    out.push((TileId { z, sigma: piece.sigma.clone() }, piece.class, place));
                }
            }
        }
        Ok(out)
    }

    /// Tiles containing `p`, ordered by fragment subset then translation.
    pub fn enumerate_tiles_at(&self, p: &[Rational]) -> Result<Vec<TileId>> {
        Ok(self.coverage_value(p)?.tiles.into_iter().map(|(t, _)| t).collect())
    }

    pub fn coverage_value(&self, p: &[Rational]) -> Result<CoverageReport> {
        let placements = self.placements_at(p)?;
        let on_boundary = placements
            .iter()
            .any(|(_, _, pl)| matches!(pl, Placement::Boundary { .. }));
        let tiles: Vec<(TileId, SignClass)> = placements
            .into_iter()
            .filter(|(_, _, pl)| matches!(pl, Placement::Interior | Placement::Boundary { included: true }))
            .map(|(t, c, _)| (t, c))
            .collect();
        let positive = tiles.iter().filter(|(_, c)| *c == SignClass::Positive).count();
        let negative = tiles.iter().filter(|(_, c)| *c == SignClass::Negative).count();
        Ok(CoverageReport {
            point: p.to_vec(),
            tiles,
            positive,
            negative,
            f_value: positive as i32 - negative as i32,
            expected: self.fs.expected_coverage(),
            on_boundary,
        })
    }

    /// Samples `p = M u` for `u` uniform in `[0,1)^(r+k)` and checks that
    /// the signed count always equals `(-1)^k sgn(det M)`.
    ///
    /// Points on a tile boundary are redrawn. Each sample has its own
    /// random stream, so the report does not depend on scheduling.
    pub fn verify_constancy(&self, sample_count: usize, seed: u64) -> Result<VerifyReport> {
        let n = self.fs.n();
        let samples = (0..sample_count)
            .into_par_iter()
            .map(|index| {
                let mut rng = sample_rng(seed, index as u64);
                for redraws in 0..MAX_REDRAWS {
                    let u = unit_vector_sample(&mut rng, n);
                    let p = self.fs.m().mul_vec(&u)?;
                    let report = self.coverage_value(&p)?;
                    if !report.on_boundary {
                        return Ok((report, redraws));
                    }
                }
                Err(Error::Precondition("every redraw landed on a tile boundary".into()))
            })
            .collect::<Result<Vec<_>>>()?;

        let expected = self.fs.expected_coverage();
        let mut distinct = BTreeSet::new();
        let mut histogram = BTreeMap::new();
        let mut memberships: BTreeMap<SubsetIndex, (usize, usize)> =
            self.pieces.iter().map(|p| (p.sigma.clone(), (0, 0))).collect();
        let mut redraws = 0;
        for (report, extra) in &samples {
            redraws += extra;
            distinct.insert(report.f_value);
            *histogram.entry((report.positive, report.negative)).or_insert(0) += 1;
            let mut per_sample: BTreeMap<&SubsetIndex, usize> = BTreeMap::new();
            for (tile, _) in &report.tiles {
                *per_sample.entry(&tile.sigma).or_insert(0) += 1;
            }
            for (sigma, count) in per_sample {
                let entry = memberships.get_mut(sigma).expect("known subset");
                entry.0 += count;
                entry.1 += count * count;
            }
        }
        let pass = distinct.len() == 1 && distinct.contains(&expected);
        Ok(VerifyReport {
            sample_count,
            seed,
            expected,
            distinct_f_values: distinct,
            census_histogram: histogram,
            class_memberships: memberships.iter().map(|(s, (c, _))| (s.clone(), *c)).collect(),
            class_memberships_sq: memberships.iter().map(|(s, (_, q))| (s.clone(), *q)).collect(),
            redraws,
            pass,
        })
    }
}

pub fn enumerate_tiles_at(fs: &FragmentSet, w: &GenericDirection, p: &[Rational]) -> Result<Vec<TileId>> {
    Tiling::new(fs, w)?.enumerate_tiles_at(p)
}

pub fn coverage_value(fs: &FragmentSet, w: &GenericDirection, p: &[Rational]) -> Result<CoverageReport> {
    Tiling::new(fs, w)?.coverage_value(p)
}

pub fn verify_constancy(
    fs: &FragmentSet,
    w: &GenericDirection,
    sample_count: usize,
    seed: u64,
) -> Result<VerifyReport> {
    Tiling::new(fs, w)?.verify_constancy(sample_count, seed)
}

/// `(sum of det S_sigma, (-1)^k det M)`.
///
/// The integral of the signed count over one fundamental domain of `M`
/// equals the first component, so equality of the pair is the average-value
/// identity.
pub fn average_identity(fs: &FragmentSet) -> (Rational, Rational) {
    let (lhs, rhs) = crate::fragments::laplace_identity(fs);
    (rhs, lhs)
}
