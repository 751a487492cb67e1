//! Exact rational linear algebra.
//!
//! Everything here works over arbitrary-precision rationals, so determinants,
//! solves and sign tests are decided exactly. Matrices are small (n of ten or
//! so at most) and dense.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;
pub type Vector = Vec<Rational>;

/// Integer rational `n`.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Rational `num / den`. Panics if `den == 0`.
pub fn frac(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int_vector(entries: &[i64]) -> Vector {
    entries.iter().map(|&e| int(e)).collect()
}

/// Sign of a rational as -1, 0 or +1.
pub fn signum(x: &Rational) -> i32 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn add(a: &[Rational], b: &[Rational]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[Rational], b: &[Rational]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(a: &[Rational], s: &Rational) -> Vector {
    a.iter().map(|x| x * s).collect()
}

fn lcm_of_denominators<'a>(values: impl Iterator<Item = &'a Rational>) -> BigInt {
    values.fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// Dense row-major matrix of exact rationals.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("rows have different lengths".into()));
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Integer matrix from row slices. Panics on ragged input; meant for
    /// literals.
    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        Self::from_rows(rows.iter().map(|r| int_vector(r)).collect()).expect("ragged literal")
    }

    /// Matrix whose columns are the given vectors, all of length `rows`.
    pub fn from_columns(rows: usize, columns: &[Vector]) -> Result<Self> {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            if col.len() != rows {
                return Err(Error::Dimension(format!(
                    "column {j} has length {}, expected {rows}",
                    col.len()
                )));
            }
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = v.clone();
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vector {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vector> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = &Rational> {
        self.data.iter()
    }

    pub fn is_integral(&self) -> bool {
        self.data.iter().all(Rational::is_integer)
    }

    pub fn select_columns(&self, cols: &[usize]) -> Matrix {
        let mut m = Self::zeros(self.rows, cols.len());
        for (jj, &j) in cols.iter().enumerate() {
            for i in 0..self.rows {
                m[(i, jj)] = self[(i, j)].clone();
            }
        }
        m
    }

    pub fn select_rows(&self, rows: std::ops::Range<usize>) -> Matrix {
        let data = rows
            .clone()
            .flat_map(|i| self.row(i).iter().cloned())
            .collect();
        Matrix {
            rows: rows.len(),
            cols: self.cols,
            data,
        }
    }

    /// `[self | column]`.
    pub fn append_column(&self, column: &[Rational]) -> Result<Matrix> {
        if column.len() != self.rows {
            return Err(Error::Dimension("appended column length".into()));
        }
        let mut cols = self.columns();
        cols.push(column.to_vec());
        Matrix::from_columns(self.rows, &cols)
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = a * &other[(k, j)];
                    out[(i, j)] += prod;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Result<Vector> {
        if self.cols != v.len() {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    pub fn mul_int_vec(&self, z: &[i64]) -> Result<Vector> {
        self.mul_vec(&int_vector(z))
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    ///
    /// Each row is first scaled to integers; the elimination then runs on
    /// big integers where every division is exact.
    pub fn det(&self) -> Result<Rational> {
        if !self.is_square() {
            return Err(Error::Dimension(format!(
                "determinant of non-square {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(Rational::one());
        }
        let mut denominator = BigInt::one();
        let mut a: Vec<Vec<BigInt>> = Vec::with_capacity(n);
        for i in 0..n {
            let row = self.row(i);
            let l = lcm_of_denominators(row.iter());
            a.push(
                row.iter()
                    .map(|v| v.numer() * (&l / v.denom()))
                    .collect(),
            );
            denominator *= l;
        }
        let mut negate = false;
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(k, i);
                        negate = !negate;
                    }
                    None => return Ok(Rational::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = v / &prev;
                }
            }
            prev = a[k][k].clone();
        }
        let mut d = a[n - 1][n - 1].clone();
        if negate {
            d = -d;
        }
        Ok(Rational::new(d, denominator))
    }

    /// Reduced row echelon form and the pivot column of each nonzero row.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&i| !m[(i, col)].is_zero()) else {
                continue;
            };
            m.swap_rows(row, p);
            let inv = m[(row, col)].recip();
            for j in col..m.cols {
                m[(row, j)] = &m[(row, j)] * &inv;
            }
            for i in 0..m.rows {
                if i != row && !m[(i, col)].is_zero() {
                    let factor = m[(i, col)].clone();
                    for j in col..m.cols {
                        let delta = &factor * &m[(row, j)];
                        m[(i, j)] -= delta;
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Solves `self * x = b` for square invertible `self`.
    pub fn solve(&self, b: &[Rational]) -> Result<Vector> {
        if !self.is_square() || b.len() != self.rows {
            return Err(Error::Dimension(format!(
                "solve with {}x{} matrix and vector of length {}",
                self.rows,
                self.cols,
                b.len()
            )));
        }
        let aug = self.append_column(b)?;
        let (r, pivots) = aug.rref();
        if pivots.len() < self.rows || pivots.last() == Some(&self.cols) {
            return Err(Error::Singular);
        }
        Ok((0..self.rows).map(|i| r[(i, self.cols)].clone()).collect())
    }

    /// Coordinates of `b` in the span of the columns, which must be linearly
    /// independent. `None` if `b` is outside the span.
    pub fn solve_in_span(&self, b: &[Rational]) -> Result<Option<Vector>> {
        if b.len() != self.rows {
            return Err(Error::Dimension("right-hand side length".into()));
        }
        let aug = self.append_column(b)?;
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return Ok(None);
        }
        if pivots.len() < self.cols {
            return Err(Error::RankDeficient {
                expected: self.cols,
                found: pivots.len(),
            });
        }
        Ok(Some(
            (0..self.cols).map(|i| r[(i, self.cols)].clone()).collect(),
        ))
    }

    pub fn inverse(&self) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::Dimension("inverse of non-square matrix".into()));
        }
        let n = self.rows;
        let mut cols = self.columns();
        cols.extend(Matrix::identity(n).columns());
        let aug = Matrix::from_columns(n, &cols)?;
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] >= n {
            return Err(Error::Singular);
        }
        let mut inv = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv[(i, j)] = r[(i, n + j)].clone();
            }
        }
        Ok(inv)
    }

    /// Generator of the one-dimensional kernel of a `k x (k+1)` matrix of
    /// rank `k`.
    ///
    /// The result is scaled to coprime integers with its first nonzero entry
    /// positive.
    pub fn kernel_vector(&self) -> Result<Vector> {
        if self.cols != self.rows + 1 {
            return Err(Error::Dimension(format!(
                "kernel vector needs a k x (k+1) matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        let (r, pivots) = self.rref();
        if pivots.len() < self.rows {
            return Err(Error::RankDeficient {
                expected: self.rows,
                found: pivots.len(),
            });
        }
        let free = (0..self.cols)
            .find(|c| !pivots.contains(c))
            .expect("one free column");
        let mut h = vec![Rational::zero(); self.cols];
        h[free] = Rational::one();
        for (i, &p) in pivots.iter().enumerate() {
            h[p] = -r[(i, free)].clone();
        }
        Ok(primitive_integer_vector(&h))
    }
}

/// Scales a nonzero vector to coprime integers with first nonzero entry
/// positive.
pub fn primitive_integer_vector(v: &[Rational]) -> Vector {
    let l = lcm_of_denominators(v.iter());
    let ints: Vec<BigInt> = v.iter().map(|x| x.numer() * (&l / x.denom())).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return v.to_vec();
    }
    let first_negative = ints.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative());
    ints.into_iter()
        .map(|x| {
            let q = x / &g;
            Rational::from_integer(if first_negative { -q } else { q })
        })
        .collect()
}

impl Index<(usize, usize)> for Matrix {
    type Output = Rational;

    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(i).iter().map(ToString::to_string).collect();
            write!(f, "{}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// An ordered list of disjoint index blocks whose union is `{0..n}`.
///
/// Blocks are sorted internally; the permutation is their concatenation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPermutation {
    blocks: Vec<Vec<usize>>,
}

impl BlockPermutation {
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n];
        let mut blocks = blocks;
        for block in &mut blocks {
            block.sort_unstable();
            for &i in block.iter() {
                if i >= n {
                    return Err(Error::InvalidPermutation(format!("index {i} out of range {n}")));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::InvalidPermutation(format!("index {i} repeated")));
                }
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPermutation(format!("index {missing} missing")));
        }
        Ok(BlockPermutation { blocks })
    }

    pub fn flattened(&self) -> Vec<usize> {
        self.blocks.iter().flatten().copied().collect()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }
}

/// Sign of the permutation obtained by concatenating the blocks.
pub fn perm_sign(p: &BlockPermutation) -> i32 {
    let word = p.flattened();
    let mut inversions = 0usize;
    for a in 0..word.len() {
        for b in a + 1..word.len() {
            if word[a] > word[b] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}
