//! Splitting `M` into top and bottom column pieces and assembling the
//! `C(r+k, r)` fragment matrices.
//!
//! For column `i` of `M`, `c_i` is its top `r` entries and `cbar_i` is the
//! *negated* bottom `k` entries. The fragment matrix `S_sigma` keeps `c_i`
//! (zero-padded below) for `i` in `sigma` and `cbar_i` (zero-padded above)
//! for the rest.

use std::fmt;

use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{perm_sign, BlockPermutation, Matrix, Rational, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dimensions {
    pub r: usize,
    pub k: usize,
}

impl Dimensions {
    pub fn new(r: usize, k: usize) -> Result<Self> {
        if r == 0 || k == 0 {
            return Err(Error::Dimension(format!("r and k must be positive, got r={r} k={k}")));
        }
        Ok(Dimensions { r, k })
    }

    /// Ambient dimension `r + k`.
    pub fn n(&self) -> usize {
        self.r + self.k
    }
}

/// Sorted, duplicate-free subset of `{0..n}`.
///
/// Indices are zero-based in code; `Display` prints them one-based, e.g.
/// `{1,4}`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetIndex {
    n: usize,
    members: Vec<usize>,
}

impl SubsetIndex {
    pub fn new(n: usize, mut members: Vec<usize>) -> Result<Self> {
        members.sort_unstable();
        if members.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSubset(format!("duplicate entries in {members:?}")));
        }
        if let Some(&bad) = members.iter().find(|&&i| i >= n) {
            return Err(Error::InvalidSubset(format!("index {} outside [1, {n}]", bad + 1)));
        }
        Ok(SubsetIndex { n, members })
    }

    /// Builds a subset from one-based labels.
    pub fn one_based(n: usize, labels: &[usize]) -> Result<Self> {
        if labels.contains(&0) {
            return Err(Error::InvalidSubset("labels are one-based".into()));
        }
        Self::new(n, labels.iter().map(|&l| l - 1).collect())
    }

    /// `{1, ..., n}`.
    pub fn full(n: usize) -> Self {
        SubsetIndex { n, members: (0..n).collect() }
    }

    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.binary_search(&i).is_ok()
    }

    pub fn complement(&self) -> SubsetIndex {
        SubsetIndex {
            n: self.n,
            members: (0..self.n).filter(|&i| !self.contains(i)).collect(),
        }
    }

    pub fn with(&self, i: usize) -> SubsetIndex {
        let mut members = self.members.clone();
        if let Err(pos) = members.binary_search(&i) {
            members.insert(pos, i);
        }
        SubsetIndex { n: self.n, members }
    }

    pub fn without(&self, i: usize) -> SubsetIndex {
        SubsetIndex {
            n: self.n,
            members: self.members.iter().copied().filter(|&m| m != i).collect(),
        }
    }

    /// Position of `i` inside the sorted member list.
    pub fn position(&self, i: usize) -> Option<usize> {
        self.members.binary_search(&i).ok()
    }

    /// All subsets of `{0..n}` of the given size in lexicographic order.
    pub fn all_of_size(n: usize, size: usize) -> Vec<SubsetIndex> {
        let mut out = Vec::new();
        if size > n {
            return out;
        }
        let mut current: Vec<usize> = (0..size).collect();
        loop {
            out.push(SubsetIndex { n, members: current.clone() });
            let Some(i) = (0..size).rev().find(|&i| current[i] != i + n - size) else {
                break;
            };
            current[i] += 1;
            for j in i + 1..size {
                current[j] = current[j - 1] + 1;
            }
        }
        out
    }
}

impl fmt::Display for SubsetIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = self.members.iter().map(|i| (i + 1).to_string()).collect();
        write!(f, "{{{}}}", labels.join(","))
    }
}

impl fmt::Debug for SubsetIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Sign of the permutation listing `first` then `rest`.
pub fn split_sign(first: &SubsetIndex, rest: &SubsetIndex) -> Result<i32> {
    split_sign_blocks(first.universe(), &[first.members(), rest.members()])
}

pub fn split_sign_blocks(n: usize, blocks: &[&[usize]]) -> Result<i32> {
    let p = BlockPermutation::new(n, blocks.iter().map(|b| b.to_vec()).collect())?;
    Ok(perm_sign(&p))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub dims: Dimensions,
    pub m: Matrix,
    /// `c[i]`: top `r` entries of column `i`.
    pub c: Vec<Vector>,
    /// `cbar[i]`: negated bottom `k` entries of column `i`.
    pub cbar: Vec<Vector>,
}

pub fn decompose(m: &Matrix, dims: Dimensions) -> Result<Decomposition> {
    let n = dims.n();
    if m.rows() != n || m.cols() != n {
        return Err(Error::Dimension(format!(
            "expected a {n}x{n} matrix for r={} k={}, got {}x{}",
            dims.r,
            dims.k,
            m.rows(),
            m.cols()
        )));
    }
    let columns = m.columns();
    let c = columns.iter().map(|col| col[..dims.r].to_vec()).collect();
    let cbar = columns
        .iter()
        .map(|col| col[dims.r..].iter().map(|x| -x).collect())
        .collect();
    Ok(Decomposition {
        dims,
        m: m.clone(),
        c,
        cbar,
    })
}

impl Decomposition {
    pub fn n(&self) -> usize {
        self.dims.n()
    }

    fn check_subset(&self, sigma: &SubsetIndex) -> Result<()> {
        if sigma.universe() != self.n() {
            return Err(Error::InvalidSubset(format!(
                "subset of [{}] used with a {}-dimensional matrix",
                sigma.universe(),
                self.n()
            )));
        }
        Ok(())
    }

    /// `S_sigma`: column `i` is `(c_i, 0)` for `i` in sigma, `(0, cbar_i)`
    /// otherwise.
    pub fn fragment_matrix(&self, sigma: &SubsetIndex) -> Result<Matrix> {
        self.check_subset(sigma)?;
        if sigma.len() != self.dims.r {
            return Err(Error::InvalidSubset(format!(
                "fragment subset {sigma} must have size r={}",
                self.dims.r
            )));
        }
        let r = self.dims.r;
        let mut s = Matrix::zeros(self.n(), self.n());
        for i in 0..self.n() {
            if sigma.contains(i) {
                for (row, v) in self.c[i].iter().enumerate() {
                    s[(row, i)] = v.clone();
                }
            } else {
                for (row, v) in self.cbar[i].iter().enumerate() {
                    s[(r + row, i)] = v.clone();
                }
            }
        }
        Ok(s)
    }

    /// `C_sigma` (columns `c_i`, `i` in sigma).
    pub fn c_matrix(&self, sigma: &SubsetIndex) -> Result<Matrix> {
        self.check_subset(sigma)?;
        let cols: Vec<Vector> = sigma.members().iter().map(|&i| self.c[i].clone()).collect();
        Matrix::from_columns(self.dims.r, &cols)
    }

    /// `Cbar_set` (columns `cbar_i`, `i` in set).
    pub fn cbar_matrix(&self, set: &SubsetIndex) -> Result<Matrix> {
        self.check_subset(set)?;
        let cols: Vec<Vector> = set.members().iter().map(|&i| self.cbar[i].clone()).collect();
        Matrix::from_columns(self.dims.k, &cols)
    }

    /// `(C_sigma, Cbar_{complement of sigma})` for a subset of any size.
    pub fn c_submatrices(&self, sigma: &SubsetIndex) -> Result<(Matrix, Matrix)> {
        Ok((self.c_matrix(sigma)?, self.cbar_matrix(&sigma.complement())?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SignClass {
    Positive,
    Negative,
    Degenerate,
}

impl SignClass {
    pub fn of(det: &Rational) -> Self {
        if det.is_positive() {
            SignClass::Positive
        } else if det.is_negative() {
            SignClass::Negative
        } else {
            SignClass::Degenerate
        }
    }

    /// +1, -1, or 0 for degenerate.
    pub fn weight(self) -> i32 {
        match self {
            SignClass::Positive => 1,
            SignClass::Negative => -1,
            SignClass::Degenerate => 0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SignClass::Positive => "positive",
            SignClass::Negative => "negative",
            SignClass::Degenerate => "degenerate",
        }
    }
}

impl fmt::Display for SignClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone)]
pub struct Fragment {
    pub sigma: SubsetIndex,
    pub s: Matrix,
    pub c: Matrix,
    pub cbar: Matrix,
    pub det: Rational,
    pub det_c: Rational,
    pub det_cbar: Rational,
    /// `sgn(sigma, complement)`.
    pub split_sign: i32,
    pub class: SignClass,
}

impl Fragment {
    pub fn is_degenerate(&self) -> bool {
        self.class == SignClass::Degenerate
    }
}

#[derive(Debug, Clone)]
pub struct FragmentSet {
    pub decomposition: Decomposition,
    pub det_m: Rational,
    /// One entry per `r`-subset, in lexicographic order.
    pub fragments: Vec<Fragment>,
}

pub fn fragment_set(d: &Decomposition) -> Result<FragmentSet> {
    let subsets = SubsetIndex::all_of_size(d.n(), d.dims.r);
    let fragments = subsets
        .into_par_iter()
        .map(|sigma| {
            let s = d.fragment_matrix(&sigma)?;
            let (c, cbar) = d.c_submatrices(&sigma)?;
            let det = s.det()?;
            Ok(Fragment {
                det_c: c.det()?,
                det_cbar: cbar.det()?,
                split_sign: split_sign(&sigma, &sigma.complement())?,
                class: SignClass::of(&det),
                sigma,
                s,
                c,
                cbar,
                det,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FragmentSet {
        det_m: d.m.det()?,
        decomposition: d.clone(),
        fragments,
    })
}

impl FragmentSet {
    pub fn from_matrix(m: &Matrix, dims: Dimensions) -> Result<Self> {
        fragment_set(&decompose(m, dims)?)
    }

    pub fn dims(&self) -> Dimensions {
        self.decomposition.dims
    }

    pub fn m(&self) -> &Matrix {
        &self.decomposition.m
    }

    pub fn n(&self) -> usize {
        self.decomposition.n()
    }

    pub fn fragment(&self, sigma: &SubsetIndex) -> Result<&Fragment> {
        self.fragments
            .binary_search_by(|f| f.sigma.members().cmp(sigma.members()))
            .map(|i| &self.fragments[i])
            .map_err(|_| Error::InvalidSubset(format!("{sigma} is not an r-subset")))
    }

    pub fn subsets_of_class(&self, class: SignClass) -> Vec<SubsetIndex> {
        self.fragments
            .iter()
            .filter(|f| f.class == class)
            .map(|f| f.sigma.clone())
            .collect()
    }

    /// `(-1)^k`.
    pub fn parity_sign(&self) -> i32 {
        if self.dims().k % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// The constant value `(-1)^k sgn(det M)` of the signed coverage.
    pub fn expected_coverage(&self) -> i32 {
        self.parity_sign() * crate::linalg::signum(&self.det_m)
    }
}

/// `((-1)^k det M, sum of det S_sigma)`.
pub fn laplace_identity(fs: &FragmentSet) -> (Rational, Rational) {
    let lhs = Rational::from_integer(fs.parity_sign().into()) * &fs.det_m;
    let rhs = fs.fragments.iter().map(|f| f.det.clone()).sum();
    (lhs, rhs)
}

/// `(det S_sigma, det C_sigma * det Cbar_complement * sgn(sigma, complement))`.
pub fn sandc_identity(fs: &FragmentSet, sigma: &SubsetIndex) -> Result<(Rational, Rational)> {
    let f = fs.fragment(sigma)?;
    let product = &f.det_c * &f.det_cbar * Rational::from_integer(f.split_sign.into());
    Ok((f.det.clone(), product))
}

impl FragmentSet {
    pub fn is_invertible(&self) -> bool {
        !self.det_m.is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{int, int_vector};
    use crate::fixtures::*;

    #[test]
    fn decompose_examples() {
        let d = decompose(&m4(), Dimensions::new(2, 2).unwrap()).unwrap();
        assert_eq!(d.c[0], int_vector(&[3, 1]));
        assert_eq!(d.cbar[0], int_vector(&[-2, 0]));
        let dk = decompose(&k2(), Dimensions::new(1, 1).unwrap()).unwrap();
        assert_eq!(dk.c[1], int_vector(&[2]));
        assert_eq!(dk.cbar[1], int_vector(&[-3]));
        let zero_bottom = Matrix::from_i64_rows(&[&[1, 2], &[0, 0]]);
        let dz = decompose(&zero_bottom, Dimensions::new(1, 1).unwrap()).unwrap();
        assert!(dz.cbar.iter().flatten().all(Zero::is_zero));
    }

    #[test]
    fn decompose_rejects_wrong_size() {
        let err = decompose(&m4(), Dimensions::new(1, 1).unwrap());
        assert!(matches!(err, Err(Error::Dimension(_))));
        assert!(Dimensions::new(0, 2).is_err());
    }

    #[test]
    fn fragment_matrix_examples() {
        let d = decompose(&m4(), Dimensions::new(2, 2).unwrap()).unwrap();
        let s = d.fragment_matrix(&subset(4, &[1, 4])).unwrap();
        assert_eq!(
            s,
            Matrix::from_i64_rows(&[&[3, 0, 0, 1], &[1, 0, 0, 2], &[0, 0, 1, 0], &[0, -1, 2, 0]])
        );
        let dk = decompose(&k2(), Dimensions::new(1, 1).unwrap()).unwrap();
        assert_eq!(
            dk.fragment_matrix(&subset(2, &[1])).unwrap(),
            Matrix::from_i64_rows(&[&[1, 0], &[0, -3]])
        );
        let dl = decompose(&l2(), Dimensions::new(1, 1).unwrap()).unwrap();
        assert_eq!(
            dl.fragment_matrix(&subset(2, &[2])).unwrap(),
            Matrix::from_i64_rows(&[&[0, 2], &[-1, 0]])
        );
        assert!(d.fragment_matrix(&subset(4, &[1])).is_err());
    }

    #[test]
    fn c_submatrix_examples() {
        let d = decompose(&m4(), Dimensions::new(2, 2).unwrap()).unwrap();
        let (c, cbar) = d.c_submatrices(&subset(4, &[1, 4])).unwrap();
        assert_eq!(c, Matrix::from_i64_rows(&[&[3, 1], &[1, 2]]));
        assert_eq!(cbar, Matrix::from_i64_rows(&[&[0, 1], &[-1, 2]]));
        let (c12, _) = d.c_submatrices(&subset(4, &[1, 2])).unwrap();
        assert_eq!(c12, Matrix::from_i64_rows(&[&[3, 2], &[1, 0]]));
        let (c0, cbar_all) = d.c_submatrices(&SubsetIndex::new(4, vec![]).unwrap()).unwrap();
        assert_eq!(c0.cols(), 0);
        assert_eq!(cbar_all, Matrix::from_i64_rows(&[&[-2, 0, 1, -1], &[0, -1, 2, -3]]));
    }

    #[test]
    fn fragment_set_classes() {
        let fs = m4_fs();
        let pos: Vec<String> = fs.subsets_of_class(SignClass::Positive).iter().map(ToString::to_string).collect();
        assert_eq!(pos, ["{1,2}", "{1,3}", "{1,4}", "{2,3}", "{2,4}"]);
        assert_eq!(fs.subsets_of_class(SignClass::Negative), vec![subset(4, &[3, 4])]);
        assert!(fs.subsets_of_class(SignClass::Degenerate).is_empty());

        let kfs = k_fs();
        assert_eq!(kfs.fragments[0].det, int(-3));
        assert_eq!(kfs.fragments[1].det, int(-2));
        assert!(kfs.fragments.iter().all(|f| f.class == SignClass::Negative));

        let ifs = FragmentSet::from_matrix(&Matrix::identity(2), Dimensions::new(1, 1).unwrap()).unwrap();
        assert_eq!(ifs.fragments[0].det, int(-1));
        assert_eq!(ifs.fragments[0].class, SignClass::Negative);
        assert_eq!(ifs.fragments[1].class, SignClass::Degenerate);
    }

    #[test]
    fn laplace_examples() {
        assert_eq!(laplace_identity(&k_fs()), (int(-5), int(-5)));
        assert_eq!(laplace_identity(&l_fs()), (int(-3), int(-3)));
        let fs = m4_fs();
        assert_eq!(laplace_identity(&fs), (int(37), int(37)));
        let summands: Vec<Rational> = fs.fragments.iter().map(|f| f.det.clone()).collect();
        assert_eq!(summands, int_vector(&[2, 10, 5, 24, 16, -20]));
    }

    #[test]
    fn sandc_examples() {
        let fs = m4_fs();
        assert_eq!(sandc_identity(&fs, &subset(4, &[1, 4])).unwrap(), (int(5), int(5)));
        assert_eq!(sandc_identity(&fs, &subset(4, &[3, 4])).unwrap(), (int(-20), int(-20)));
        let f34 = fs.fragment(&subset(4, &[3, 4])).unwrap();
        assert_eq!((f34.det_c.clone(), f34.det_cbar.clone(), f34.split_sign), (int(-10), int(2), 1));
        let f13 = fs.fragment(&subset(4, &[1, 3])).unwrap();
        assert_eq!((f13.det_c.clone(), f13.det_cbar.clone(), f13.split_sign), (int(10), int(-1), -1));
        assert_eq!(sandc_identity(&fs, &subset(4, &[1, 3])).unwrap(), (int(10), int(10)));
    }

    #[test]
    fn fragment_columns_have_block_structure() {
        let fs = m4_fs();
        let r = 2;
        for f in &fs.fragments {
            for i in 0..4 {
                let col = f.s.column(i);
                if f.sigma.contains(i) {
                    assert!(col[r..].iter().all(Zero::is_zero));
                } else {
                    assert!(col[..r].iter().all(Zero::is_zero));
                }
            }
        }
    }

    #[test]
    fn lexicographic_subsets() {
        let all: Vec<String> = SubsetIndex::all_of_size(4, 2).iter().map(ToString::to_string).collect();
        assert_eq!(all, ["{1,2}", "{1,3}", "{1,4}", "{2,3}", "{2,4}", "{3,4}"]);
        assert_eq!(SubsetIndex::all_of_size(3, 0).len(), 1);
        assert_eq!(SubsetIndex::all_of_size(5, 3).len(), 10);
    }
}
