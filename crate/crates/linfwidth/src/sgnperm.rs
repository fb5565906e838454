//! The symmetry group of the l∞ cube: signed permutations of coordinates.
//!
//! An element is a coordinate permutation composed with per-coordinate sign
//! flips, acting on `R^N` by `(g v)_i = signs_i * v[perm_i]`. The group has
//! order `2^N * N!` and every operation here either enumerates it exactly
//! (N ≤ 8) or samples it uniformly with an explicit seed.
//!
//! The group averages in this module satisfy exact identities:
//! the mean of `(a · g b)^2` over the group is `1/N` for unit `a, b`, the
//! mean squared projection length onto an m-dimensional subspace is `m/N`,
//! and the mean squared projection Jacobian between two m-dimensional
//! subspaces is `1 / C(N, m)`. Cauchy–Schwarz then bounds the corresponding
//! first-moment averages by the square roots of these values.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::tol;
use crate::{Error, Result};

/// Hard cap on exact enumeration; `2^8 * 8! ≈ 1.03e7` elements.
pub const MAX_EXACT_N: usize = 8;

/// A signed permutation `(perm, signs)` acting by `(g v)_i = signs_i * v[perm_i]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignedPermutation {
    perm: Vec<usize>,
    signs: Vec<i8>,
}

impl SignedPermutation {
    /// Builds an element after checking that `perm` is a bijection on
    /// `{0, …, N-1}` and `signs` contains only ±1.
    pub fn new(perm: Vec<usize>, signs: Vec<i8>) -> Result<Self> {
        if perm.len() != signs.len() {
            return Err(Error::DimensionMismatch {
                expected: perm.len(),
                got: signs.len(),
            });
        }
        let n = perm.len();
        let mut seen = vec![false; n];
        for &p in &perm {
            if p >= n || seen[p] {
                return Err(Error::Precondition(format!(
                    "permutation {perm:?} is not a bijection on 0..{n}"
                )));
            }
            seen[p] = true;
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Precondition(format!(
                "signs {signs:?} contain a value other than ±1"
            )));
        }
        Ok(Self { perm, signs })
    }

    /// The identity element in dimension `n`.
    pub fn identity(n: usize) -> Self {
        Self {
            perm: (0..n).collect(),
            signs: vec![1; n],
        }
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    /// Applies the element: `(g v)_i = signs_i * v[perm_i]`.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: v.len(),
            });
        }
        Ok(self
            .perm
            .iter()
            .zip(&self.signs)
            .map(|(&p, &s)| f64::from(s) * v[p])
            .collect())
    }

    /// Applies into a caller-provided buffer; avoids allocation in group loops.
    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.dim());
        debug_assert_eq!(out.len(), self.dim());
        for i in 0..self.dim() {
            out[i] = f64::from(self.signs[i]) * v[self.perm[i]];
        }
    }

    /// Group composition: `(a.compose(b))(v) = a(b(v))`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        let n = self.dim();
        let mut perm = vec![0; n];
        let mut signs = vec![1i8; n];
        for i in 0..n {
            perm[i] = other.perm[self.perm[i]];
            signs[i] = self.signs[i] * other.signs[self.perm[i]];
        }
        Ok(Self { perm, signs })
    }

    /// The inverse element; `g.inverse().apply(&g.apply(v))` returns `v`
    /// exactly (sign flips and index moves are lossless).
    pub fn inverse(&self) -> Self {
        let n = self.dim();
        let mut perm = vec![0; n];
        let mut signs = vec![1i8; n];
        for i in 0..n {
            perm[self.perm[i]] = i;
            signs[self.perm[i]] = self.signs[i];
        }
        Self { perm, signs }
    }
}

/// Lazy exact enumeration of the group in dimension `n`, in lexicographic
/// order of `(perm, sign bitmask)`; bit `i` of the mask set means
/// `signs_i = -1`.
pub struct GroupIter {
    n: usize,
    perm: Vec<usize>,
    mask: u64,
    exhausted: bool,
}

impl Iterator for GroupIter {
    type Item = SignedPermutation;

    fn next(&mut self) -> Option<SignedPermutation> {
        if self.exhausted {
            return None;
        }
        let signs = (0..self.n)
            .map(|i| if self.mask >> i & 1 == 1 { -1 } else { 1 })
            .collect();
        let item = SignedPermutation {
            perm: self.perm.clone(),
            signs,
        };
        self.mask += 1;
        if self.mask == 1 << self.n {
            self.mask = 0;
            if !next_permutation(&mut self.perm) {
                self.exhausted = true;
            }
        }
        Some(item)
    }
}

/// Advances `a` to the next lexicographic permutation; returns false after
/// the last one.
fn next_permutation(a: &mut [usize]) -> bool {
    if a.len() < 2 {
        return false;
    }
    let mut i = a.len() - 1;
    while i > 0 && a[i - 1] >= a[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = a.len() - 1;
    while a[j] <= a[i - 1] {
        j -= 1;
    }
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

/// Exact enumeration of all `2^N * N!` elements, deterministic order.
///
/// Fails for `N` outside `1..=8`; beyond that only [`sample_group`] is
/// offered.
pub fn enumerate_group(n: usize) -> Result<GroupIter> {
    if n == 0 || n > MAX_EXACT_N {
        return Err(Error::DimensionLimit(format!(
            "exact enumeration supports 1 ≤ N ≤ {MAX_EXACT_N}, got {n}"
        )));
    }
    Ok(GroupIter {
        n,
        perm: (0..n).collect(),
        mask: 0,
        exhausted: false,
    })
}

/// Order of the group in dimension `n`: `2^n * n!`.
pub fn group_order(n: usize) -> u64 {
    let fact: u64 = (1..=n as u64).product();
    (1u64 << n) * fact
}

/// I.i.d. uniform group elements, deterministic given `seed`.
pub fn sample_group(n: usize, count: usize, seed: u64) -> Vec<SignedPermutation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| sample_one(n, &mut rng)).collect()
}

/// One uniform element from the supplied RNG (Fisher–Yates + sign bits).
pub fn sample_one(n: usize, rng: &mut impl Rng) -> SignedPermutation {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }
    let signs = (0..n)
        .map(|_| if rng.random::<bool>() { 1 } else { -1 })
        .collect();
    SignedPermutation { perm, signs }
}

fn check_unit(name: &str, v: &[f64]) -> Result<()> {
    let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > tol::INPUT_UNIT {
        return Err(Error::NotNormalized(format!(
            "{name} has norm {norm}, expected 1 within {}",
            tol::INPUT_UNIT
        )));
    }
    Ok(())
}

fn check_enumerable(n: usize) -> Result<()> {
    if n == 0 || n > MAX_EXACT_N {
        return Err(Error::DimensionLimit(format!(
            "exact group averages support 1 ≤ N ≤ {MAX_EXACT_N}, got {n}"
        )));
    }
    Ok(())
}

/// Exact group average of `|a · g b|` for unit vectors; always at most
/// `1/sqrt(N)` up to roundoff.
pub fn avg_abs_dot(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    check_enumerable(a.len())?;
    check_unit("a", a)?;
    check_unit("b", b)?;
    let mut buf = vec![0.0; a.len()];
    let mut sum = 0.0;
    let mut count = 0u64;
    for g in enumerate_group(a.len())? {
        g.apply_into(b, &mut buf);
        let dot: f64 = a.iter().zip(&buf).map(|(x, y)| x * y).sum();
        sum += dot.abs();
        count += 1;
    }
    Ok(sum / count as f64)
}

/// Exact group average of `(a · g b)^2`; equals `1/N` identically.
pub fn avg_sq_dot(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    check_enumerable(a.len())?;
    check_unit("a", a)?;
    check_unit("b", b)?;
    let mut buf = vec![0.0; a.len()];
    let mut sum = 0.0;
    let mut count = 0u64;
    for g in enumerate_group(a.len())? {
        g.apply_into(b, &mut buf);
        let dot: f64 = a.iter().zip(&buf).map(|(x, y)| x * y).sum();
        sum += dot * dot;
        count += 1;
    }
    Ok(sum / count as f64)
}

/// An m-dimensional linear subspace of `R^N` given by an orthonormal basis.
#[derive(Debug, Clone)]
pub struct Subspace {
    basis: Vec<Vec<f64>>,
}

impl Subspace {
    /// Builds a subspace, verifying pairwise orthonormality of the basis.
    /// The basis is taken as-is; callers must supply clean bases (no
    /// internal re-orthonormalization).
    pub fn new(basis: Vec<Vec<f64>>) -> Result<Self> {
        if basis.is_empty() {
            return Err(Error::Precondition("empty basis".into()));
        }
        let n = basis[0].len();
        for v in &basis {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: v.len(),
                });
            }
        }
        for i in 0..basis.len() {
            for j in i..basis.len() {
                let dot: f64 = basis[i].iter().zip(&basis[j]).map(|(x, y)| x * y).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                if (dot - want).abs() > tol::INPUT_ORTHO {
                    return Err(Error::NotOrthonormal(format!(
                        "basis vectors {i},{j} have dot {dot}, expected {want} within {}",
                        tol::INPUT_ORTHO
                    )));
                }
            }
        }
        Ok(Self { basis })
    }

    /// Subspace dimension m.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Ambient dimension N.
    pub fn ambient_dim(&self) -> usize {
        self.basis[0].len()
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }
}

/// Exact group average of the projection length `‖P_L(g b)‖` for a unit
/// vector `b`; at most `sqrt(m/N)` up to roundoff.
pub fn avg_projection_length(b: &[f64], subspace: &Subspace) -> Result<f64> {
    Ok(projection_moments(b, subspace)?.0)
}

/// Exact group average of the squared projection length; equals `m/N`
/// identically.
pub fn avg_projection_length_sq(b: &[f64], subspace: &Subspace) -> Result<f64> {
    Ok(projection_moments(b, subspace)?.1)
}

fn projection_moments(b: &[f64], subspace: &Subspace) -> Result<(f64, f64)> {
    let n = b.len();
    if subspace.ambient_dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: subspace.ambient_dim(),
        });
    }
    check_enumerable(n)?;
    check_unit("b", b)?;
    let mut buf = vec![0.0; n];
    let mut sum_len = 0.0;
    let mut sum_sq = 0.0;
    let mut count = 0u64;
    for g in enumerate_group(n)? {
        g.apply_into(b, &mut buf);
        let sq: f64 = subspace
            .basis
            .iter()
            .map(|a| {
                let d: f64 = a.iter().zip(&buf).map(|(x, y)| x * y).sum();
                d * d
            })
            .sum();
        sum_len += sq.sqrt();
        sum_sq += sq;
        count += 1;
    }
    Ok((sum_len / count as f64, sum_sq / count as f64))
}

/// Exact group average of `|det(A · gB)|`, the Jacobian of the orthogonal
/// projection from `L1` onto `g L2` in the given orthonormal bases; at most
/// `1/sqrt(C(N, m))` up to roundoff.
pub fn avg_projection_jacobian(l1: &Subspace, l2: &Subspace) -> Result<f64> {
    Ok(jacobian_moments(l1, l2)?.0)
}

/// Exact group average of `det^2(A · gB)`; equals `1/C(N, m)` identically.
pub fn avg_projection_jacobian_sq(l1: &Subspace, l2: &Subspace) -> Result<f64> {
    Ok(jacobian_moments(l1, l2)?.1)
}

fn jacobian_moments(l1: &Subspace, l2: &Subspace) -> Result<(f64, f64)> {
    if l1.dim() != l2.dim() {
        return Err(Error::DimensionMismatch {
            expected: l1.dim(),
            got: l2.dim(),
        });
    }
    let n = l1.ambient_dim();
    if l2.ambient_dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: l2.ambient_dim(),
        });
    }
    check_enumerable(n)?;
    let m = l1.dim();
    let mut gb = vec![vec![0.0; n]; m];
    let mut mat = vec![0.0; m * m];
    let mut sum_abs = 0.0;
    let mut sum_sq = 0.0;
    let mut count = 0u64;
    for g in enumerate_group(n)? {
        for (col, b) in l2.basis.iter().enumerate() {
            g.apply_into(b, &mut gb[col]);
        }
        for (row, a) in l1.basis.iter().enumerate() {
            for col in 0..m {
                mat[row * m + col] = a.iter().zip(&gb[col]).map(|(x, y)| x * y).sum();
            }
        }
        let det = det_in_place(&mut mat, m);
        sum_abs += det.abs();
        sum_sq += det * det;
        count += 1;
    }
    Ok((sum_abs / count as f64, sum_sq / count as f64))
}

/// Determinant by Gaussian elimination with partial pivoting; destroys the
/// buffer. Sized for m ≤ 8 where conditioning is a non-issue.
fn det_in_place(mat: &mut [f64], m: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..m {
        let mut pivot = col;
        for row in col + 1..m {
            if mat[row * m + col].abs() > mat[pivot * m + col].abs() {
                pivot = row;
            }
        }
        if mat[pivot * m + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for k in 0..m {
                mat.swap(col * m + k, pivot * m + k);
            }
            det = -det;
        }
        let d = mat[col * m + col];
        det *= d;
        for row in col + 1..m {
            let factor = mat[row * m + col] / d;
            if factor != 0.0 {
                for k in col..m {
                    mat[row * m + k] -= factor * mat[col * m + k];
                }
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    /// Independent oracle: the 8 elements of the N=2 group written out by
    /// hand, bypassing `enumerate_group`.
    fn n2_group_by_hand() -> Vec<SignedPermutation> {
        let mut out = Vec::new();
        for perm in [[0usize, 1], [1, 0]] {
            for signs in [[1i8, 1], [1, -1], [-1, 1], [-1, -1]] {
                out.push(SignedPermutation::new(perm.to_vec(), signs.to_vec()).unwrap());
            }
        }
        out
    }

    fn oracle_avg(a: &[f64], b: &[f64], group: &[SignedPermutation], square: bool) -> f64 {
        let mut sum = 0.0;
        for g in group {
            let gb = g.apply(b).unwrap();
            let dot: f64 = a.iter().zip(&gb).map(|(x, y)| x * y).sum();
            sum += if square { dot * dot } else { dot.abs() };
        }
        sum / group.len() as f64
    }

    fn unit(v: Vec<f64>) -> Vec<f64> {
        let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.into_iter().map(|x| x / n).collect()
    }

    fn seeded_unit(n: usize, rng: &mut impl Rng) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-3 {
                return v.into_iter().map(|x| x / norm).collect();
            }
        }
    }

    #[test]
    fn group_sizes() {
        assert_eq!(enumerate_group(1).unwrap().count(), 2);
        assert_eq!(enumerate_group(2).unwrap().count(), 8);
        assert_eq!(enumerate_group(3).unwrap().count(), 48);
        assert_eq!(group_order(3), 48);
        assert!(enumerate_group(0).is_err());
        assert!(enumerate_group(9).is_err());
    }

    #[test]
    fn enumeration_is_distinct_and_lexicographic() {
        let all: Vec<_> = enumerate_group(3).unwrap().collect();
        let set: std::collections::HashSet<_> = all.iter().cloned().collect();
        assert_eq!(set.len(), 48);
        // First block: identity permutation with masks 0,1,2,...
        assert_eq!(all[0], SignedPermutation::identity(3));
        assert_eq!(all[1].signs(), &[-1, 1, 1]);
        assert_eq!(all[1].perm(), &[0, 1, 2]);
        // Last element: reversed permutation, all-negative signs.
        assert_eq!(all[47].perm(), &[2, 1, 0]);
        assert_eq!(all[47].signs(), &[-1, -1, -1]);
    }

    #[test]
    fn apply_examples() {
        let id = SignedPermutation::identity(2);
        assert_eq!(id.apply(&[1.0, 2.0]).unwrap(), vec![1.0, 2.0]);

        let g = SignedPermutation::new(vec![1, 0], vec![1, -1]).unwrap();
        assert_eq!(g.apply(&[3.0, 4.0]).unwrap(), vec![4.0, -3.0]);

        assert!(g.apply(&[1.0]).is_err());
    }

    #[test]
    fn apply_preserves_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let v = seeded_unit(4, &mut rng);
            let g = sample_one(4, &mut rng);
            let gv = g.apply(&v).unwrap();
            let norm: f64 = gv.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn inverse_roundtrip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..200 {
            let v: Vec<f64> = (0..5).map(|_| rng.random::<f64>() * 10.0 - 5.0).collect();
            let g = sample_one(5, &mut rng);
            let back = g.inverse().apply(&g.apply(&v).unwrap()).unwrap();
            assert_eq!(back, v);
        }
    }

    #[test]
    fn composition_matches_sequential_application() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..200 {
            let v: Vec<f64> = (0..4).map(|_| rng.random::<f64>()).collect();
            let a = sample_one(4, &mut rng);
            let b = sample_one(4, &mut rng);
            let ab = a.compose(&b).unwrap();
            assert_eq!(ab.apply(&v).unwrap(), a.apply(&b.apply(&v).unwrap()).unwrap());
        }
    }

    #[test]
    fn group_closure_spot_check() {
        let all: std::collections::HashSet<_> = enumerate_group(3).unwrap().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..1000 {
            let a = sample_one(3, &mut rng);
            let b = sample_one(3, &mut rng);
            assert!(all.contains(&a.compose(&b).unwrap()));
        }
    }

    #[test]
    fn avg_abs_dot_n1() {
        assert_eq!(avg_abs_dot(&[1.0], &[1.0]).unwrap(), 1.0);
    }

    #[test]
    fn avg_abs_dot_axis_n2_matches_hand_oracle() {
        let group = n2_group_by_hand();
        let a = [1.0, 0.0];
        let expected = oracle_avg(&a, &a, &group, false);
        assert_eq!(expected, 0.5);
        let got = avg_abs_dot(&a, &a).unwrap();
        assert!((got - 0.5).abs() < 1e-15);
    }

    #[test]
    fn avg_abs_dot_diagonal_n2() {
        let a = unit(vec![1.0, 1.0]);
        let group = n2_group_by_hand();
        let expected = oracle_avg(&a, &a, &group, false);
        assert!((expected - 0.5).abs() < 1e-15);
        assert!((avg_abs_dot(&a, &a).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn avg_abs_dot_rejects_non_unit() {
        assert!(avg_abs_dot(&[1.0, 1.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn avg_sq_dot_identities() {
        assert_eq!(avg_sq_dot(&[1.0], &[1.0]).unwrap(), 1.0);

        let e1 = [1.0, 0.0, 0.0];
        let e2 = [0.0, 1.0, 0.0];
        assert!((avg_sq_dot(&e1, &e2).unwrap() - 1.0 / 3.0).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let a = seeded_unit(2, &mut rng);
            let b = seeded_unit(2, &mut rng);
            assert!((avg_sq_dot(&a, &b).unwrap() - 0.5).abs() < crate::tol::EXACT_IDENTITY);
        }
    }

    #[test]
    fn cauchy_schwarz_chain() {
        // avg |dot| ≤ sqrt(avg dot^2) = 1/sqrt(N), over seeded pairs.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=5 {
            for _ in 0..20 {
                let a = seeded_unit(n, &mut rng);
                let b = seeded_unit(n, &mut rng);
                let abs = avg_abs_dot(&a, &b).unwrap();
                let sq = avg_sq_dot(&a, &b).unwrap();
                assert!(abs <= sq.sqrt() + crate::tol::BOUND_SLACK);
                assert!(abs <= 1.0 / (n as f64).sqrt() + crate::tol::BOUND_SLACK);
            }
        }
    }

    #[test]
    fn projection_full_dimension_is_one() {
        let basis = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let l = Subspace::new(basis).unwrap();
        let b = unit(vec![0.3, -0.8]);
        let avg = avg_projection_length(&b, &l).unwrap();
        assert!((avg - 1.0).abs() < 1e-14);
    }

    #[test]
    fn projection_line_reduces_to_abs_dot() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let a = seeded_unit(3, &mut rng);
            let b = seeded_unit(3, &mut rng);
            let l = Subspace::new(vec![a.clone()]).unwrap();
            let via_projection = avg_projection_length(&b, &l).unwrap();
            let via_dot = avg_abs_dot(&a, &b).unwrap();
            assert!((via_projection - via_dot).abs() < 1e-13);
        }
    }

    #[test]
    fn projection_axis_example() {
        let l = Subspace::new(vec![vec![1.0, 0.0]]).unwrap();
        let avg = avg_projection_length(&[1.0, 0.0], &l).unwrap();
        assert!((avg - 0.5).abs() < 1e-15);
    }

    #[test]
    fn projection_square_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        // Coordinate subspaces keep the oracle independent of any
        // orthonormalization routine.
        for n in 2..=5 {
            for m in 1..=n {
                let basis: Vec<Vec<f64>> = (0..m)
                    .map(|i| {
                        let mut e = vec![0.0; n];
                        e[i] = 1.0;
                        e
                    })
                    .collect();
                let l = Subspace::new(basis).unwrap();
                let b = seeded_unit(n, &mut rng);
                let sq = avg_projection_length_sq(&b, &l).unwrap();
                assert!(
                    (sq - m as f64 / n as f64).abs() < crate::tol::EXACT_IDENTITY,
                    "n={n} m={m} sq={sq}"
                );
            }
        }
    }

    #[test]
    fn subspace_rejects_skewed_basis() {
        assert!(Subspace::new(vec![vec![1.0, 0.0], vec![0.6, 0.8]]).is_err());
        assert!(Subspace::new(vec![vec![2.0, 0.0]]).is_err());
    }

    #[test]
    fn jacobian_full_dimension_is_one() {
        let b = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let l1 = Subspace::new(b.clone()).unwrap();
        let l2 = Subspace::new(b).unwrap();
        let avg = avg_projection_jacobian(&l1, &l2).unwrap();
        assert!((avg - 1.0).abs() < 1e-14);
    }

    #[test]
    fn jacobian_line_case_matches_abs_dot() {
        let l1 = Subspace::new(vec![vec![1.0, 0.0]]).unwrap();
        let l2 = Subspace::new(vec![vec![1.0, 0.0]]).unwrap();
        let avg = avg_projection_jacobian(&l1, &l2).unwrap();
        assert!((avg - 0.5).abs() < 1e-15);
    }

    #[test]
    fn jacobian_square_identity_coordinate_planes() {
        let l1 = Subspace::new(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
        let l2 = Subspace::new(vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        let sq = avg_projection_jacobian_sq(&l1, &l2).unwrap();
        assert!((sq - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_group(4, 50, 99);
        let b = sample_group(4, 50, 99);
        assert_eq!(a, b);
        let c = sample_group(4, 50, 100);
        assert_ne!(a, c);
    }

    #[test]
    fn sampling_n1_stays_in_group() {
        for g in sample_group(1, 100, 3) {
            assert_eq!(g.perm(), &[0]);
            assert!(g.signs()[0] == 1 || g.signs()[0] == -1);
        }
    }

    #[test]
    fn sampled_avg_sq_dot_large_n() {
        // Sampled stand-in for N > 8: empirical mean of (a·gb)^2 within
        // 3 standard errors of the exact identity 1/N.
        let n = 20;
        let a = unit((1..=n).map(|i| i as f64).collect());
        let b = unit((0..n).map(|i| (i as f64 * 0.7).cos()).collect());
        let samples = sample_group(n, 100_000, 7);
        let vals: Vec<f64> = samples
            .iter()
            .map(|g| {
                let gb = g.apply(&b).unwrap();
                let dot: f64 = a.iter().zip(&gb).map(|(x, y)| x * y).sum();
                dot * dot
            })
            .collect();
        let mean: f64 = vals.iter().sum::<f64>() / vals.len() as f64;
        let var: f64 =
            vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / vals.len() as f64;
        let se = (var / vals.len() as f64).sqrt();
        assert!(
            (mean - 1.0 / n as f64).abs() < 3.0 * se,
            "mean={mean} expected={} se={se}",
            1.0 / n as f64
        );
    }

    #[test]
    fn det_small_matrices() {
        let mut m2 = [1.0, 2.0, 3.0, 4.0];
        assert!((det_in_place(&mut m2, 2) - -2.0).abs() < 1e-15);
        let mut m3 = [2.0, 0.0, 0.0, 0.0, 3.0, 0.0, 0.0, 0.0, 4.0];
        assert!((det_in_place(&mut m3, 3) - 24.0).abs() < 1e-15);
        let mut singular = [1.0, 2.0, 2.0, 4.0];
        assert_eq!(det_in_place(&mut singular, 2), 0.0);
    }
}
