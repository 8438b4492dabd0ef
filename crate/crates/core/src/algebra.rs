//! Scalar arithmetic over F_q and over the complex numbers, the additive
//! character ψ, and the dense linear-algebra kernels everything else
//! leans on (solve + Hermitian eigenspace clustering).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result, LINALG_TOL};

/// Complex amplitude; coefficient field of all representations here.
pub type C64 = Complex64;

pub const SUPPORTED_PRIMES: [u8; 4] = [2, 3, 5, 7];

pub fn is_supported_prime(q: u64) -> bool {
    SUPPORTED_PRIMES.iter().any(|&p| u64::from(p) == q)
}

/// A fully reduced residue mod a small prime q.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldScalar {
    value: u8,
    q: u8,
}

impl FieldScalar {
    pub fn new(value: i64, q: u8) -> Result<Self> {
        if !is_supported_prime(u64::from(q)) {
            return Err(Error::UnsupportedField(u64::from(q)));
        }
        Ok(Self {
            value: value.rem_euclid(i64::from(q)) as u8,
            q,
        })
    }

    pub fn value(&self) -> u8 {
        self.value
    }

    pub fn modulus(&self) -> u8 {
        self.q
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            value: (self.value + other.value) % self.q,
            q: self.q,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            value: (self.value * other.value) % self.q,
            q: self.q,
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            value: (self.q - self.value) % self.q,
            q: self.q,
        }
    }

    pub fn inv(&self) -> Result<Self> {
        Ok(Self {
            value: inv_mod(self.value, self.q).ok_or(Error::SingularMatrix { tol: 0.0 })?,
            q: self.q,
        })
    }
}

/// Multiplicative inverse mod q by scan; q <= 7 so this is instant.
pub fn inv_mod(a: u8, q: u8) -> Option<u8> {
    let a = a % q;
    (1..q).find(|&b| (a * b) % q == 1)
}

/// The additive character x -> exp(2πi·dir·x/q) of F_q, dir = ±1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AdditiveCharacter {
    pub q: u8,
    pub direction: i8,
}

impl AdditiveCharacter {
    pub fn new(q: u8, direction: i8) -> Result<Self> {
        if !is_supported_prime(u64::from(q)) {
            return Err(Error::UnsupportedField(u64::from(q)));
        }
        assert!(direction == 1 || direction == -1, "direction must be ±1");
        Ok(Self { q, direction })
    }

    pub fn conjugate(&self) -> Self {
        Self {
            q: self.q,
            direction: -self.direction,
        }
    }

    /// ψ(x) for a residue x (reduced or not).
    pub fn eval_residue(&self, x: i64) -> C64 {
        let t = (i64::from(self.direction) * x).rem_euclid(i64::from(self.q));
        let angle = std::f64::consts::TAU * t as f64 / f64::from(self.q);
        C64::new(angle.cos(), angle.sin())
    }

    pub fn eval(&self, x: FieldScalar) -> C64 {
        debug_assert_eq!(x.modulus(), self.q);
        self.eval_residue(i64::from(x.value()))
    }
}

pub fn psi_eval(chi: &AdditiveCharacter, x: FieldScalar) -> C64 {
    chi.eval(x)
}

/// Solve Ax = b for square A, failing with `SingularMatrix` when A is
/// rank deficient at the working tolerance.
pub fn solve_linear(a: &DMatrix<C64>, b: &DVector<C64>) -> Result<DVector<C64>> {
    assert_eq!(a.nrows(), a.ncols(), "solve_linear expects a square matrix");
    assert_eq!(a.nrows(), b.len());
    if rank(a, LINALG_TOL) < a.nrows() {
        return Err(Error::SingularMatrix { tol: LINALG_TOL });
    }
    a.clone()
        .lu()
        .solve(b)
        .ok_or(Error::SingularMatrix { tol: LINALG_TOL })
}

/// Numerical rank of a (not necessarily square) complex matrix.
pub fn rank(m: &DMatrix<C64>, tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let svd = m.clone().svd(false, false);
    let smax = svd.singular_values.max().max(1.0);
    svd.singular_values.iter().filter(|&&s| s > tol * smax).count()
}

/// One eigenvalue cluster of a normal (here: Hermitian) matrix.
pub struct Eigenspace {
    pub value: C64,
    /// Orthonormal basis, one column per vector.
    pub basis: DMatrix<C64>,
}

/// Eigenvalue threshold under which two clusters are considered too
/// close to separate reliably; the caller should redraw its sample.
pub const CLUSTER_TOL: f64 = 1e-6;

/// Eigenspaces of a Hermitian matrix, clustered with gap threshold
/// `tol`. Two eigenvalues land in one cluster iff they are chained by
/// gaps < `tol`; an inter-cluster gap below 10·tol is an ambiguity.
pub fn eigenspaces_normal(m: &DMatrix<C64>, tol: f64) -> Result<Vec<Eigenspace>> {
    assert_eq!(m.nrows(), m.ncols());
    let herm = (m + m.adjoint()).scale(0.5);
    let eig = herm.symmetric_eigen();
    let d = m.nrows();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

    // cluster boundaries over the sorted eigenvalues
    let mut clusters: Vec<Vec<usize>> = vec![vec![order[0]]];
    for w in order.windows(2) {
        let gap = eig.eigenvalues[w[1]] - eig.eigenvalues[w[0]];
        if gap < tol {
            clusters.last_mut().unwrap().push(w[1]);
        } else {
            if gap < 10.0 * tol {
                return Err(Error::ClusterAmbiguity {
                    gap,
                    threshold: 10.0 * tol,
                });
            }
            clusters.push(vec![w[1]]);
        }
    }

    Ok(clusters
        .into_iter()
        .map(|idxs| {
            let mean =
                idxs.iter().map(|&i| eig.eigenvalues[i]).sum::<f64>() / idxs.len() as f64;
            let mut basis = DMatrix::<C64>::zeros(d, idxs.len());
            for (c, &i) in idxs.iter().enumerate() {
                basis.set_column(c, &eig.eigenvectors.column(i));
            }
            Eigenspace {
                value: C64::new(mean, 0.0),
                basis,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn psi_at_zero_is_one() {
        let chi = AdditiveCharacter::new(3, 1).unwrap();
        let v = chi.eval(FieldScalar::new(0, 3).unwrap());
        assert!((v - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn psi_standard_value() {
        let chi = AdditiveCharacter::new(3, 1).unwrap();
        let v = chi.eval(FieldScalar::new(1, 3).unwrap());
        let expected = C64::from_polar(1.0, std::f64::consts::TAU / 3.0);
        assert!((v - expected).norm() < 1e-14);
    }

    #[test]
    fn psi_conjugate_direction() {
        let plus = AdditiveCharacter::new(5, 1).unwrap();
        let minus = AdditiveCharacter::new(5, -1).unwrap();
        let x = FieldScalar::new(2, 5).unwrap();
        assert!((minus.eval(x) - plus.eval(x).conj()).norm() < 1e-14);
    }

    #[test]
    fn psi_nontrivial_sums_to_zero() {
        for q in SUPPORTED_PRIMES {
            let chi = AdditiveCharacter::new(q, 1).unwrap();
            let s: C64 = (0..q)
                .map(|x| chi.eval(FieldScalar::new(i64::from(x), q).unwrap()))
                .sum();
            assert!(s.norm() < 1e-12, "sum over F_{} was {}", q, s);
            assert!((chi.eval_residue(1) - c(1.0, 0.0)).norm() > 0.1);
        }
    }

    proptest! {
        #[test]
        fn psi_multiplicative(x in 0i64..49, y in 0i64..49, qi in 0usize..4) {
            let q = SUPPORTED_PRIMES[qi];
            let chi = AdditiveCharacter::new(q, 1).unwrap();
            let lhs = chi.eval_residue(x + y);
            let rhs = chi.eval_residue(x) * chi.eval_residue(y);
            prop_assert!((lhs - rhs).norm() < 1e-12);
        }

        #[test]
        fn solve_then_multiply_back(seed in 0u64..200) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = 4;
            // diagonally dominant -> well conditioned
            let mut a = DMatrix::<C64>::from_fn(n, n, |_, _| {
                c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            });
            for i in 0..n {
                a[(i, i)] += c(3.0, 0.0);
            }
            let b = DVector::<C64>::from_fn(n, |_, _| c(rng.random::<f64>(), rng.random::<f64>()));
            let x = solve_linear(&a, &b).unwrap();
            prop_assert!((&a * &x - &b).norm() < 1e-9 * b.norm().max(1.0));
        }
    }

    #[test]
    fn solve_identity_and_diag() {
        let id = DMatrix::<C64>::identity(3, 3);
        let b = DVector::from_vec(vec![c(1.0, 2.0), c(3.0, 0.0), c(0.0, -1.0)]);
        assert!((solve_linear(&id, &b).unwrap() - &b).norm() < 1e-14);

        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![c(2.0, 0.0), c(4.0, 0.0)]));
        let b = DVector::from_vec(vec![c(2.0, 0.0), c(4.0, 0.0)]);
        let x = solve_linear(&a, &b).unwrap();
        assert!((x - DVector::from_element(2, c(1.0, 0.0))).norm() < 1e-14);
    }

    #[test]
    fn solve_rejects_singular() {
        let a = DMatrix::<C64>::zeros(2, 2);
        let b = DVector::from_element(2, c(1.0, 0.0));
        assert!(matches!(solve_linear(&a, &b), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn eigenspaces_of_diag_1_1_2() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![
            c(1.0, 0.0),
            c(1.0, 0.0),
            c(2.0, 0.0),
        ]));
        let spaces = eigenspaces_normal(&m, CLUSTER_TOL).unwrap();
        let mut dims: Vec<usize> = spaces.iter().map(|s| s.basis.ncols()).collect();
        dims.sort();
        assert_eq!(dims, vec![1, 2]);
    }

    #[test]
    fn eigenspaces_of_zero_matrix() {
        let m = DMatrix::<C64>::zeros(4, 4);
        let spaces = eigenspaces_normal(&m, CLUSTER_TOL).unwrap();
        assert_eq!(spaces.len(), 1);
        assert_eq!(spaces[0].basis.ncols(), 4);
    }

    #[test]
    fn close_clusters_are_ambiguous() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![
            c(0.0, 0.0),
            c(5.0 * CLUSTER_TOL, 0.0),
        ]));
        assert!(matches!(
            eigenspaces_normal(&m, CLUSTER_TOL),
            Err(Error::ClusterAmbiguity { .. })
        ));
    }

    #[test]
    fn projectors_resolve_identity() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![
            c(1.0, 0.0),
            c(1.0, 0.0),
            c(3.0, 0.0),
            c(7.0, 0.0),
        ]));
        let spaces = eigenspaces_normal(&m, CLUSTER_TOL).unwrap();
        let d = 4;
        let mut sum = DMatrix::<C64>::zeros(d, d);
        let projs: Vec<_> = spaces.iter().map(|s| &s.basis * s.basis.adjoint()).collect();
        for p in &projs {
            sum += p;
        }
        assert!((sum - DMatrix::<C64>::identity(d, d)).norm() < 1e-12);
        for i in 0..projs.len() {
            for j in 0..projs.len() {
                if i != j {
                    assert!((&projs[i] * &projs[j]).norm() < 1e-12);
                }
            }
        }
    }
}
