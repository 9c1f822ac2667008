//! Fixed-size complex linear algebra.
//!
//! Everything in this crate lives on a 3-dimensional space per party (or the
//! 9-dimensional joint space), so the kernel is written for small dense
//! matrices with const-generic dimension. Hermitian eigenproblems are solved
//! with cyclic complex Jacobi rotations, which are deterministic and converge
//! quadratically for matrices this small.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Numerical tolerances shared by the whole crate.
pub mod tol {
    /// Hermiticity tolerance, `max |H - H^†|`.
    pub const HERM: f64 = 1e-12;
    /// Eigen-residual tolerance.
    pub const EIG: f64 = 1e-10;
    /// PSD tolerance on the smallest eigenvalue.
    pub const PSD: f64 = 1e-9;
    /// Separates equal amplitudes from distinct ones.
    pub const TIE: f64 = 1e-9;
    /// Slack on the two global-optimality inequalities.
    pub const COND: f64 = 1e-10;
    /// Nonnegativity slack on the (column-scaled) POVM weights.
    pub const WEIGHT: f64 = 1e-9;
    /// Barycentric slack for S-plane membership.
    pub const BARY: f64 = 1e-9;
    /// Largest admissible overlap modulus.
    pub const MAX_OVERLAP: f64 = 1.0 - 1e-12;
}

/// `exp(2πi/3)`.
pub fn tau() -> C64 {
    C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0)
}

/// `τ^k` for any integer `k`, reduced modulo 3 before evaluation.
pub fn tau_pow(k: i64) -> C64 {
    match k.rem_euclid(3) {
        0 => C64::new(1.0, 0.0),
        1 => tau(),
        _ => tau().conj(),
    }
}

pub type CVec<const N: usize> = [C64; N];

/// Dense `N x N` complex matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CMat<const N: usize>(pub [[C64; N]; N]);

/// Operator on a single party's 3-dimensional space.
pub type Operator3 = CMat<3>;
/// Operator on the joint 9-dimensional space.
pub type Operator9 = CMat<9>;

impl<const N: usize> Default for CMat<N> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<const N: usize> CMat<N> {
    pub fn zero() -> Self {
        CMat([[C64::new(0.0, 0.0); N]; N])
    }

    pub fn identity() -> Self {
        let mut m = Self::zero();
        for i in 0..N {
            m.0[i][i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_real_diag(d: [f64; N]) -> Self {
        let mut m = Self::zero();
        for i in 0..N {
            m.0[i][i] = C64::new(d[i], 0.0);
        }
        m
    }

    /// `|u⟩⟨v|`.
    pub fn outer(u: &CVec<N>, v: &CVec<N>) -> Self {
        let mut m = Self::zero();
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] = u[i] * v[j].conj();
            }
        }
        m
    }

    /// `|v⟩⟨v|` (not normalized).
    pub fn projector(v: &CVec<N>) -> Self {
        Self::outer(v, v)
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zero();
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] = self.0[j][i].conj();
            }
        }
        m
    }

    /// `(H + H^†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let mut m = Self::zero();
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] = 0.5 * (self.0[i][j] + self.0[j][i].conj());
            }
        }
        m
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut m = *self;
        m.0.iter_mut().flatten().for_each(|z| *z *= s);
        m
    }

    pub fn trace(&self) -> C64 {
        (0..N).map(|i| self.0[i][i]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let mut r: f64 = 0.0;
        for i in 0..N {
            for j in 0..N {
                r = r.max((self.0[i][j] - self.0[j][i].conj()).norm());
            }
        }
        r
    }

    pub fn apply(&self, v: &CVec<N>) -> CVec<N> {
        let mut out = [C64::new(0.0, 0.0); N];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..N).map(|j| self.0[i][j] * v[j]).sum();
        }
        out
    }

    /// `⟨v|M|v⟩`, real part only (exact for Hermitian `M`).
    pub fn expectation(&self, v: &CVec<N>) -> f64 {
        inner(v, &self.apply(v)).re
    }

    pub fn real_diagonal(&self) -> [f64; N] {
        let mut d = [0.0; N];
        for (i, x) in d.iter_mut().enumerate() {
            *x = self.0[i][i].re;
        }
        d
    }
}

impl<const N: usize> Index<(usize, usize)> for CMat<N> {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.0[i][j]
    }
}

impl<const N: usize> IndexMut<(usize, usize)> for CMat<N> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.0[i][j]
    }
}

impl<const N: usize> Add for CMat<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl<const N: usize> AddAssign for CMat<N> {
    fn add_assign(&mut self, rhs: Self) {
        for i in 0..N {
            for j in 0..N {
                self.0[i][j] += rhs.0[i][j];
            }
        }
    }
}

impl<const N: usize> Sub for CMat<N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<const N: usize> Neg for CMat<N> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl<const N: usize> Mul for CMat<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut m = Self::zero();
        for i in 0..N {
            for k in 0..N {
                let a = self.0[i][k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..N {
                    m.0[i][j] += a * rhs.0[k][j];
                }
            }
        }
        m
    }
}

impl<const N: usize> std::iter::Sum for CMat<N> {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::zero(), |a, b| a + b)
    }
}

/// `⟨u|v⟩`, antilinear in the first argument.
pub fn inner<const N: usize>(u: &CVec<N>, v: &CVec<N>) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm<const N: usize>(v: &CVec<N>) -> f64 {
    inner(v, v).re.max(0.0).sqrt()
}

pub fn normalized<const N: usize>(v: &CVec<N>) -> CVec<N> {
    let n = norm(v);
    let mut out = *v;
    out.iter_mut().for_each(|z| *z /= n);
    out
}

/// `A ⊗ B` on the 9-dimensional joint space, index `3 i + j`.
pub fn kron3(a: &Operator3, b: &Operator3) -> Operator9 {
    let mut m = Operator9::zero();
    for i in 0..3 {
        for k in 0..3 {
            for j in 0..3 {
                for l in 0..3 {
                    m.0[3 * i + j][3 * k + l] = a.0[i][k] * b.0[j][l];
                }
            }
        }
    }
    m
}

pub fn kron_vec3(u: &CVec<3>, v: &CVec<3>) -> CVec<9> {
    let mut out = [C64::new(0.0, 0.0); 9];
    for i in 0..3 {
        for j in 0..3 {
            out[3 * i + j] = u[i] * v[j];
        }
    }
    out
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct Eigen<const N: usize> {
    /// Ascending.
    pub values: [f64; N],
    /// `vectors[i]` belongs to `values[i]`.
    pub vectors: [CVec<N>; N],
}

impl<const N: usize> Eigen<N> {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn reconstruct(&self) -> CMat<N> {
        (0..N)
            .map(|i| CMat::projector(&self.vectors[i]).scale(self.values[i]))
            .sum()
    }
}

/// Eigen-decomposition by cyclic complex Jacobi rotations.
///
/// The input must be Hermitian within [`tol::HERM`]; the Hermitian part is
/// used for the iteration.
pub fn hermitian_eigen<const N: usize>(h: &CMat<N>) -> Result<Eigen<N>> {
    let res = h.hermiticity_residual();
    if !(res <= tol::HERM) {
        return Err(Error::ContractViolation(format!(
            "matrix is not Hermitian (residual {res:e})"
        )));
    }
    let mut a = h.hermitian_part();
    let mut v = CMat::<N>::identity();
    let scale = a.max_abs();
    if scale == 0.0 {
        return Ok(sorted_eigen(&a, &v));
    }

    for _sweep in 0..64 {
        let off: f64 = (0..N)
            .flat_map(|i| (0..N).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a.0[i][j].norm_sqr())
            .sum();
        if off.sqrt() <= f64::EPSILON * scale {
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                let apq = a.0[p][q];
                let g = apq.norm();
                if g <= 1e-3 * f64::EPSILON * scale {
                    continue;
                }
                let phase = apq / g;
                let app = a.0[p][p].re;
                let aqq = a.0[q][q].re;
                let theta = 0.5 * (2.0 * g).atan2(aqq - app);
                let (s, c) = theta.sin_cos();
                // J acts on columns p, q: J = diag(1, e^{-iφ}) · [[c, s], [-s, c]].
                let jpp = C64::new(c, 0.0);
                let jpq = C64::new(s, 0.0);
                let jqp = -phase.conj() * s;
                let jqq = phase.conj() * c;
                for k in 0..N {
                    let akp = a.0[k][p];
                    let akq = a.0[k][q];
                    a.0[k][p] = akp * jpp + akq * jqp;
                    a.0[k][q] = akp * jpq + akq * jqq;
                    let vkp = v.0[k][p];
                    let vkq = v.0[k][q];
                    v.0[k][p] = vkp * jpp + vkq * jqp;
                    v.0[k][q] = vkp * jpq + vkq * jqq;
                }
                for k in 0..N {
                    let apk = a.0[p][k];
                    let aqk = a.0[q][k];
                    a.0[p][k] = jpp.conj() * apk + jqp.conj() * aqk;
                    a.0[q][k] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a.0[p][q] = C64::new(0.0, 0.0);
                a.0[q][p] = C64::new(0.0, 0.0);
                a.0[p][p].im = 0.0;
                a.0[q][q].im = 0.0;
            }
        }
    }
    Ok(sorted_eigen(&a, &v))
}

fn sorted_eigen<const N: usize>(a: &CMat<N>, v: &CMat<N>) -> Eigen<N> {
    let mut order: [usize; N] = std::array::from_fn(|i| i);
    order.sort_by(|&i, &j| a.0[i][i].re.total_cmp(&a.0[j][j].re));
    let values = std::array::from_fn(|k| a.0[order[k]][order[k]].re);
    let vectors = std::array::from_fn(|k| std::array::from_fn(|row| v.0[row][order[k]]));
    Eigen { values, vectors }
}

/// Smallest eigenvalue of the Hermitian part of `h`.
pub fn min_eigenvalue<const N: usize>(h: &CMat<N>) -> f64 {
    match hermitian_eigen(&h.hermitian_part()) {
        Ok(e) => e.min(),
        Err(_) => f64::NAN,
    }
}

/// True iff `h` is Hermitian and its smallest eigenvalue is at least `-tol`.
pub fn psd_check<const N: usize>(h: &CMat<N>, tol: f64) -> bool {
    hermitian_eigen(h).is_ok_and(|e| e.min() >= -tol)
}

pub type Mat3 = [[f64; 3]; 3];

fn det3(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Solves `M u = b` by Gaussian elimination with partial pivoting.
///
/// Rejects systems with `|det M| < 1e-13 ‖M‖³` (`‖M‖` the largest entry
/// modulus) as singular.
pub fn solve3(m: &Mat3, b: &[f64; 3]) -> Result<[f64; 3]> {
    let norm = m.iter().flatten().map(|x| x.abs()).fold(0.0, f64::max);
    let det = det3(m);
    if !(det.abs() >= 1e-13 * norm.powi(3)) || norm == 0.0 {
        return Err(Error::SingularSystem { det });
    }
    let mut a = *m;
    let mut rhs = *b;
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap_or(col);
        a.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in (col + 1)..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut u = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = ((row + 1)..3).map(|k| a[row][k] * u[k]).sum();
        u[row] = (rhs[row] - s) / a[row][row];
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_unitary(rng: &mut ChaCha8Rng) -> Operator3 {
        // Gram-Schmidt on random complex columns.
        let mut cols: Vec<CVec<3>> = Vec::new();
        while cols.len() < 3 {
            let mut v: CVec<3> = std::array::from_fn(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            for c in &cols {
                let p = inner(c, &v);
                for i in 0..3 {
                    v[i] -= p * c[i];
                }
            }
            if norm(&v) > 1e-3 {
                cols.push(normalized(&v));
            }
        }
        let mut u = Operator3::zero();
        for (j, c) in cols.iter().enumerate() {
            for i in 0..3 {
                u.0[i][j] = c[i];
            }
        }
        u
    }

    fn random_hermitian<const N: usize>(rng: &mut ChaCha8Rng) -> CMat<N> {
        let mut m = CMat::<N>::zero();
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        m.hermitian_part()
    }

    #[test]
    fn eigen_identity_and_diagonal() {
        let e = hermitian_eigen(&Operator3::identity()).unwrap();
        assert_eq!(e.values, [1.0, 1.0, 1.0]);
        let e = hermitian_eigen(&Operator3::from_real_diag([2.0, 0.0, 0.5])).unwrap();
        assert_eq!(e.values, [0.0, 0.5, 2.0]);
    }

    #[test]
    fn eigen_known_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let u = random_unitary(&mut rng);
            let h = (u * Operator3::from_real_diag([1.0, 2.0, 3.0]) * u.adjoint()).hermitian_part();
            let e = hermitian_eigen(&h).unwrap();
            for (got, want) in e.values.iter().zip([1.0, 2.0, 3.0]) {
                assert!((got - want).abs() < 1e-10, "{got} vs {want}");
            }
        }
    }

    #[test]
    fn eigen_residuals_and_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let h = random_hermitian::<3>(&mut rng);
            let e = hermitian_eigen(&h).unwrap();
            for i in 0..3 {
                let hv = h.apply(&e.vectors[i]);
                for k in 0..3 {
                    assert!((hv[k] - e.vectors[i][k] * e.values[i]).norm() < 1e-10);
                }
                for j in 0..3 {
                    let d = inner(&e.vectors[i], &e.vectors[j]);
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((d - want).norm() < 1e-10);
                }
            }
            assert!((e.reconstruct() - h).max_abs() < 1e-10);
        }
        for _ in 0..50 {
            let h = random_hermitian::<9>(&mut rng);
            let e = hermitian_eigen(&h).unwrap();
            assert!((e.reconstruct() - h).max_abs() < 1e-10);
        }
    }

    #[test]
    fn eigen_rejects_non_hermitian() {
        let mut m = Operator3::identity();
        m.0[0][1] = C64::new(1e-6, 0.0);
        assert!(matches!(hermitian_eigen(&m), Err(Error::ContractViolation(_))));
    }

    #[test]
    fn psd_examples() {
        assert!(psd_check(&Operator3::identity(), 1e-9));
        assert!(!psd_check(&Operator3::from_real_diag([1.0, 0.0, -1e-3]), 1e-9));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let v = random_unitary(&mut rng).0[0];
            assert!(psd_check(&Operator3::projector(&normalized(&v)), 1e-9));
        }
    }

    #[test]
    fn solve3_examples() {
        let id = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert_eq!(solve3(&id, &[1.0, 1.0, 1.0]).unwrap(), [1.0, 1.0, 1.0]);
        let d = [[2.0, 0.0, 0.0], [0.0, 4.0, 0.0], [0.0, 0.0, 8.0]];
        assert_eq!(solve3(&d, &[1.0, 1.0, 1.0]).unwrap(), [0.5, 0.25, 0.125]);
        let sing = [[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 0.0, 1.0]];
        assert!(matches!(
            solve3(&sing, &[1.0, 1.0, 1.0]),
            Err(Error::SingularSystem { .. })
        ));
    }

    #[test]
    fn solve3_forward_multiply_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let want = [1.0, 2.0, 3.0];
        let mut checked = 0;
        while checked < 200 {
            let m: Mat3 = std::array::from_fn(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0)));
            if det3(&m).abs() < 1e-2 {
                continue;
            }
            let b: [f64; 3] = std::array::from_fn(|i| (0..3).map(|k| m[i][k] * want[k]).sum());
            let u = solve3(&m, &b).unwrap();
            let back: [f64; 3] = std::array::from_fn(|i| (0..3).map(|k| m[i][k] * u[k]).sum());
            let bmax = b.iter().map(|x| x.abs()).fold(0.0, f64::max);
            for i in 0..3 {
                assert!((back[i] - b[i]).abs() <= 1e-10 * bmax);
                assert!((u[i] - want[i]).abs() < 1e-8);
            }
            checked += 1;
        }
    }

    #[test]
    fn tau_powers() {
        assert!((tau_pow(3) - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((tau_pow(-1) - tau() * tau()).norm() < 1e-15);
        assert!((tau() * tau() * tau() - C64::new(1.0, 0.0)).norm() < 1e-15);
    }
}
