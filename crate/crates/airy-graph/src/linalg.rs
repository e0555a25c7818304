//! Dense and banded complex linear algebra used across the crate.

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use thiserror::Error;

use crate::{CMat, CVec, C64};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is singular to working precision (pivot {pivot:.3e} at row {row})")]
    Singular { row: usize, pivot: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// `(M + Mᴴ) / 2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Eigenvalues (ascending) and matching eigenvectors of the Hermitian part of `m`.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (vec![], CMat::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// Singular values (descending) and a full set of right singular vectors as columns.
///
/// Short-and-wide inputs are padded with zero rows so that the null space
/// directions are returned as well; the padding contributes zero singular values.
pub fn svd_full(m: &CMat) -> (Vec<f64>, CMat) {
    let (r, c) = m.shape();
    if c == 0 {
        return (vec![], CMat::zeros(0, 0));
    }
    let padded = if r < c {
        let mut p = CMat::zeros(c, c);
        p.rows_mut(0, r).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = SVD::new(padded, false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sv: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let v = CMat::from_fn(c, c, |row, col| vt[(order[col], row)].conj());
    (sv, v)
}

/// Numerical rank with relative threshold `tol · σ_max`.
pub fn rank(m: &CMat, tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = SVD::new(m.clone(), false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * smax).count()
}

/// Orthonormal basis (columns) of `ker m`, threshold relative to `σ_max`.
pub fn null_space(m: &CMat, tol: f64) -> CMat {
    let c = m.ncols();
    if c == 0 {
        return CMat::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return CMat::identity(c, c);
    }
    let (sv, v) = svd_full(m);
    let smax = sv.first().cloned().unwrap_or(0.0);
    let r = if smax == 0.0 { 0 } else { sv.iter().filter(|&&s| s > tol * smax).count() };
    v.columns(r, c - r).into_owned()
}

/// Orthonormal basis (columns) of the column space of `m`.
pub fn orth(m: &CMat, tol: f64) -> CMat {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return CMat::zeros(r, 0);
    }
    let svd = SVD::new(m.clone(), true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cols: Vec<usize> =
        (0..svd.singular_values.len()).filter(|&i| smax > 0.0 && svd.singular_values[i] > tol * smax).collect();
    CMat::from_fn(r, cols.len(), |i, j| u[(i, cols[j])])
}

/// 2-norm condition number; infinite for singular or empty-rank matrices.
pub fn condition_number(m: &CMat) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    let sv = SVD::new(m.clone(), false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if smin == 0.0 {
        f64::INFINITY
    } else {
        smax / smin
    }
}

/// Solves `A X = B` by dense LU with partial pivoting.
pub fn solve(a: &CMat, b: &CMat) -> Result<CMat, LinalgError> {
    if a.nrows() != a.ncols() || a.nrows() != b.nrows() {
        return Err(LinalgError::Dimension(format!("{:?} \\ {:?}", a.shape(), b.shape())));
    }
    a.clone().lu().solve(b).ok_or(LinalgError::Singular { row: 0, pivot: 0.0 })
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_from(re: &[f64]) -> CVec {
    CVec::from_iterator(re.len(), re.iter().map(|&x| C64::new(x, 0.0)))
}

/// Embeds a complex matrix as the real block matrix `[[Re, −Im], [Im, Re]]`.
pub fn realify(m: &CMat) -> DMatrix<f64> {
    let (r, c) = m.shape();
    let mut out = DMatrix::zeros(2 * r, 2 * c);
    for j in 0..c {
        for i in 0..r {
            let z = m[(i, j)];
            out[(i, j)] = z.re;
            out[(i + r, j + c)] = z.re;
            out[(i + r, j)] = z.im;
            out[(i, j + c)] = -z.im;
        }
    }
    out
}

/// Inverse of [`realify`] applied to a vector `[re; im]`.
pub fn complexify_vec(v: &[f64]) -> Vec<C64> {
    let n = v.len() / 2;
    (0..n).map(|i| C64::new(v[i], v[i + n])).collect()
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential of a real square matrix by Padé(13) scaling and squaring.
pub fn expm_real(a: &DMatrix<f64>) -> Result<DMatrix<f64>, LinalgError> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(LinalgError::Dimension(format!("expm of {:?}", a.shape())));
    }
    let norm1 = (0..n).map(|j| a.column(j).iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    let s = if norm1 > THETA13 { (norm1 / THETA13).log2().ceil() as i32 } else { 0 };
    let a = a * 2f64.powi(-s);
    let id = DMatrix::<f64>::identity(n, n);
    let b = &PADE13;
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9]) + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &id * b[1];
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8]) + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &id * b[0];
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.lu().solve(&p).ok_or(LinalgError::Singular { row: 0, pivot: 0.0 })?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

/// Matrix exponential of a complex matrix, evaluated through its real embedding.
pub fn expm(a: &CMat) -> Result<CMat, LinalgError> {
    let n = a.nrows();
    let e = expm_real(&realify(a))?;
    Ok(CMat::from_fn(n, n, |i, j| C64::new(e[(i, j)], e[(i + n, j)])))
}

/// LU factorization of a banded complex matrix with partial pivoting.
///
/// Row `i` stores columns `i − kl ..= i + kl + ku`; the extra `kl` upper
/// diagonals hold the fill produced by row interchanges. The multipliers of
/// column `k` are stored below the diagonal and are not permuted by later
/// interchanges, so the forward solve replays the interchanges in order.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<C64>,
    piv: Vec<usize>,
}

impl BandedLu {
    /// Factors the `n×n` matrix given by `(row, col, value)` triplets; repeated
    /// entries are summed.
    pub fn factor(n: usize, triplets: &[(usize, usize, C64)]) -> Result<Self, LinalgError> {
        let mut kl = 0;
        let mut ku = 0;
        for &(i, j, _) in triplets {
            if i >= n || j >= n {
                return Err(LinalgError::Dimension(format!("entry ({i},{j}) outside {n}×{n}")));
            }
            if i > j {
                kl = kl.max(i - j);
            } else {
                ku = ku.max(j - i);
            }
        }
        let width = 2 * kl + ku + 1;
        let mut lu = BandedLu { n, kl, ku, width, data: vec![C64::new(0.0, 0.0); n * width], piv: vec![0; n] };
        let mut scale: f64 = 0.0;
        for &(i, j, v) in triplets {
            *lu.at_mut(i, j) += v;
            scale = scale.max(v.norm());
        }
        lu.eliminate(scale)?;
        Ok(lu)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Lower and upper bandwidth of the factored matrix.
    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.kl + self.ku);
        i * self.width + (j + self.kl - i)
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> C64 {
        self.data[self.idx(i, j)]
    }

    #[inline]
    fn at_mut(&mut self, i: usize, j: usize) -> &mut C64 {
        let k = self.idx(i, j);
        &mut self.data[k]
    }

    fn eliminate(&mut self, scale: f64) -> Result<(), LinalgError> {
        let n = self.n;
        let tiny = f64::EPSILON * scale.max(f64::MIN_POSITIVE) * (n as f64);
        for k in 0..n {
            let last_row = (k + self.kl).min(n - 1);
            let last_col = (k + self.kl + self.ku).min(n - 1);
            let mut p = k;
            let mut best = self.at(k, k).norm();
            for r in k + 1..=last_row {
                let v = self.at(r, k).norm();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best.is_nan() || best <= tiny {
                return Err(LinalgError::Singular { row: k, pivot: best });
            }
            self.piv[k] = p;
            if p != k {
                for j in k..=last_col {
                    let a = self.idx(k, j);
                    let b = self.idx(p, j);
                    self.data.swap(a, b);
                }
            }
            let d = self.at(k, k);
            for r in k + 1..=last_row {
                let m = self.at(r, k) / d;
                if m == C64::new(0.0, 0.0) {
                    continue;
                }
                *self.at_mut(r, k) = m;
                for j in k + 1..=last_col {
                    let v = self.at(k, j);
                    *self.at_mut(r, j) -= m * v;
                }
            }
        }
        Ok(())
    }

    /// Solves `A x = b` in place.
    #[allow(clippy::needless_range_loop)]
    pub fn solve_in_place(&self, b: &mut [C64]) {
        let n = self.n;
        assert_eq!(b.len(), n);
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            for r in k + 1..=(k + self.kl).min(n - 1) {
                b[r] -= self.at(r, k) * bk;
            }
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in i + 1..=(i + self.kl + self.ku).min(n - 1) {
                s -= self.at(i, j) * b[j];
            }
            b[i] = s / self.at(i, i);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_c(rng: &mut ChaCha8Rng) -> C64 {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn banded_lu_matches_dense_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 60;
        let (kl, ku) = (3usize, 5usize);
        let mut trip = Vec::new();
        let mut dense = CMat::zeros(n, n);
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                // weak diagonal so that pivoting is exercised
                let v = if i == j { rand_c(&mut rng) * 0.01 } else { rand_c(&mut rng) };
                trip.push((i, j, v));
                dense[(i, j)] += v;
            }
        }
        let lu = BandedLu::factor(n, &trip).unwrap();
        let b: Vec<C64> = (0..n).map(|_| rand_c(&mut rng)).collect();
        let mut x = b.clone();
        lu.solve_in_place(&mut x);
        let xv = CVec::from_vec(x);
        let r = &dense * &xv - CVec::from_vec(b);
        assert!(r.norm() < 1e-10, "residual {}", r.norm());
    }

    #[test]
    fn banded_lu_detects_singular() {
        let trip = vec![(0, 0, C64::new(1.0, 0.0)), (1, 0, C64::new(1.0, 0.0))];
        assert!(matches!(BandedLu::factor(2, &trip), Err(LinalgError::Singular { .. })));
    }

    #[test]
    fn expm_of_rotation_generator() {
        let t = 0.7;
        let a =
            CMat::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(-t, 0.0), C64::new(t, 0.0), C64::new(0.0, 0.0)]);
        let e = expm(&a).unwrap();
        assert!((e[(0, 0)].re - t.cos()).abs() < 1e-14);
        assert!((e[(1, 0)].re - t.sin()).abs() < 1e-14);
    }

    #[test]
    fn expm_of_large_diagonal_uses_squaring() {
        let a = CMat::from_diagonal(&CVec::from_vec(vec![C64::new(-30.0, 5.0), C64::new(2.0, -40.0)]));
        let e = expm(&a).unwrap();
        for i in 0..2 {
            let want = a[(i, i)].exp();
            assert!((e[(i, i)] - want).norm() <= 1e-12 * want.norm().max(1e-300) + 1e-16);
        }
    }

    #[test]
    fn null_space_of_wide_matrix() {
        let m = CMat::from_row_slice(1, 3, &[C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let ns = null_space(&m, 1e-12);
        assert_eq!(ns.ncols(), 2);
        assert!((&m * &ns).norm() < 1e-14);
        assert_eq!(rank(&m, 1e-12), 1);
    }
}
