//! Matrices used throughout the examples, tests and docs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fragments::{Dimensions, FragmentSet, SubsetIndex};
use crate::linalg::{int, Matrix};

/// The 4x4 worked example with `r = k = 2`; `det = 37`.
pub fn m4() -> Matrix {
    Matrix::from_i64_rows(&[&[3, 2, -4, 1], &[1, 0, 2, 2], &[2, 0, -1, 1], &[0, 1, -2, 3]])
}

/// 2x2 matrix whose fragments tile the plane without overlap.
pub fn k2() -> Matrix {
    Matrix::from_i64_rows(&[&[1, 2], &[-1, 3]])
}

/// 2x2 matrix whose fragments have opposite signs.
pub fn l2() -> Matrix {
    Matrix::from_i64_rows(&[&[1, 2], &[1, 5]])
}

pub fn m4_fs() -> FragmentSet {
    FragmentSet::from_matrix(&m4(), Dimensions { r: 2, k: 2 }).expect("valid fixture")
}

pub fn k_fs() -> FragmentSet {
    FragmentSet::from_matrix(&k2(), Dimensions { r: 1, k: 1 }).expect("valid fixture")
}

pub fn l_fs() -> FragmentSet {
    FragmentSet::from_matrix(&l2(), Dimensions { r: 1, k: 1 }).expect("valid fixture")
}

/// Subset from one-based labels; panics on bad input.
pub fn subset(n: usize, labels: &[usize]) -> SubsetIndex {
    SubsetIndex::one_based(n, labels).expect("valid subset literal")
}

/// Seeded `n x n` integer matrix with entries in `[lo, hi]`.
pub fn random_integer_matrix(seed: u64, n: usize, lo: i64, hi: i64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..n)
        .map(|_| (0..n).map(|_| int(rng.gen_range(lo..=hi))).collect())
        .collect();
    Matrix::from_rows(rows).expect("square")
}

/// Seeded invertible integer matrix with random split `r + k = n`.
///
/// Redraws until `det != 0`.
pub fn random_instance(seed: u64, n: usize, lo: i64, hi: i64) -> (Matrix, Dimensions) {
    assert!(n >= 2);
    let mut attempt = 0u64;
    loop {
        let m = random_integer_matrix(seed.wrapping_mul(1_000_003).wrapping_add(attempt), n, lo, hi);
        attempt += 1;
        if m.det().map(|d| d != int(0)).unwrap_or(false) {
            let r = 1 + (seed as usize % (n - 1));
            return (m, Dimensions { r, k: n - r });
        }
    }
}
