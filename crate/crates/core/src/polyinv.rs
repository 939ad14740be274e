//! Polynomial entanglement invariants: the Cayley hyperdeterminant `Det3`,
//! the 3-tangle, two-qubit concurrence, the four-qubit hyperdeterminant
//! `Det4` and `T = 2^6 3^9 |Det4|`.

use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, svd, ComplexMatrix, C64, ZERO};
use crate::tensor::StateTensor;

/// Cayley's hyperdeterminant of `a[4i + 2j + k] = C_ijk`, generic over the
/// coefficient ring so the same expression serves numbers and polynomials.
///
/// ```text
/// a000^2 a111^2 + a001^2 a110^2 + a010^2 a101^2 + a100^2 a011^2
///  - 2 (a000 a001 a110 a111 + a000 a010 a101 a111 + a000 a100 a011 a111
///     + a001 a010 a101 a110 + a001 a100 a011 a110 + a010 a100 a011 a101)
///  + 4 (a000 a011 a101 a110 + a001 a010 a100 a111)
/// ```
///
/// The Levi-Civita contraction of the six epsilon tensors equals `-2` times this form.
pub fn cayley<T>(a: &[T; 8]) -> T
where
    T: Clone + Add<Output = T> + Sub<Output = T> + Mul<Output = T>,
{
    let p = |i: usize, j: usize, k: usize, l: usize| a[i].clone() * a[j].clone() * a[k].clone() * a[l].clone();
    let twice = |x: T| x.clone() + x;
    let squares = p(0, 0, 7, 7) + p(1, 1, 6, 6) + p(2, 2, 5, 5) + p(4, 4, 3, 3);
    let pairs = p(0, 1, 6, 7) + p(0, 2, 5, 7) + p(0, 4, 3, 7) + p(1, 2, 5, 6) + p(1, 4, 3, 6) + p(2, 4, 3, 5);
    let quads = p(0, 3, 5, 6) + p(1, 2, 4, 7);
    squares - twice(pairs) + twice(twice(quads))
}

fn check_qubits(c: &StateTensor, n: usize) -> Result<()> {
    if c.dims() != vec![2; n].as_slice() {
        return Err(Error::Dimension(format!("expected {n} qubits, got dims {:?}", c.dims())));
    }
    Ok(())
}

fn require_normalized(c: &StateTensor) -> Result<()> {
    if !c.is_normalized() {
        return Err(Error::NotNormalized { norm_sq: c.norm_sqr() });
    }
    Ok(())
}

pub fn det3(c: &StateTensor) -> Result<C64> {
    check_qubits(c, 3)?;
    let a: [C64; 8] = c.coeffs().try_into().expect("eight coefficients");
    Ok(cayley(&a))
}

/// `tau = 4 |Det3(C)|`.
pub fn tangle(c: &StateTensor) -> Result<f64> {
    check_qubits(c, 3)?;
    require_normalized(c)?;
    Ok(4.0 * det3(c)?.norm())
}

const DENSITY_TOL: f64 = 1e-10;

/// Wootters concurrence of a two-qubit density matrix.
///
/// With `rho = W W^H` (`W` built from the non-negligible eigenpairs), the
/// square roots of the eigenvalues of `rho (Y (x) Y) rho^* (Y (x) Y)` are the singular
/// values of `W^T (Y (x) Y) W`, which avoids square roots of round-off.
pub fn concurrence2(rho: &ComplexMatrix) -> Result<f64> {
    if rho.rows() != 4 || rho.cols() != 4 {
        return Err(Error::Dimension("two-qubit density matrix must be 4x4".into()));
    }
    if rho.hermiticity_residual() > DENSITY_TOL || (rho.trace() - C64::new(1.0, 0.0)).norm() > DENSITY_TOL {
        return Err(Error::InvalidArgument("not a Hermitian unit-trace matrix".into()));
    }
    let eig = hermitian_eigen(rho)?;
    if eig.values.iter().any(|&v| v < -DENSITY_TOL) {
        return Err(Error::InvalidArgument("density matrix has a negative eigenvalue".into()));
    }
    let cutoff = eig.values[0] * 1e-14;
    let kept: Vec<usize> = (0..4).filter(|&i| eig.values[i] > cutoff).collect();
    let w = ComplexMatrix::from_fn(4, kept.len(), |i, j| eig.vectors[(i, kept[j])] * eig.values[kept[j]].sqrt());
    // Y (x) Y is real with anti-diagonal (-1, 1, 1, -1).
    let yy = ComplexMatrix::from_real(
        4,
        4,
        &[0., 0., 0., -1., 0., 0., 1., 0., 0., 1., 0., 0., -1., 0., 0., 0.],
    )?;
    let m = w.transpose().matmul(&yy)?.matmul(&w)?;
    let mut mu = svd(&m)?.sigma;
    mu.resize(4, 0.0);
    Ok((mu[0] - mu[1] - mu[2] - mu[3]).max(0.0))
}

/// Pieces of the Coffman-Kundu-Wootters identity for a 3-qubit pure state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monogamy {
    /// `C_{A,BC}^2 = 4 det rho_A`.
    pub one_vs_rest: f64,
    pub c_ab_sq: f64,
    pub c_ac_sq: f64,
}

impl Monogamy {
    pub fn tangle(&self) -> f64 {
        self.one_vs_rest - self.c_ab_sq - self.c_ac_sq
    }
}

pub fn monogamy(c: &StateTensor) -> Result<Monogamy> {
    check_qubits(c, 3)?;
    require_normalized(c)?;
    let ra = c.reduced_density(0)?;
    let det = ra[(0, 0)] * ra[(1, 1)] - ra[(0, 1)] * ra[(1, 0)];
    let cab = concurrence2(&c.reduced_density_of(&[0, 1])?)?;
    let cac = concurrence2(&c.reduced_density_of(&[0, 2])?)?;
    Ok(Monogamy { one_vs_rest: 4.0 * det.re, c_ab_sq: cab * cab, c_ac_sq: cac * cac })
}

/// `tau = C_{A,BC}^2 - C_{A,B}^2 - C_{A,C}^2`.
pub fn tangle_via_concurrence(c: &StateTensor) -> Result<f64> {
    Ok(monogamy(c)?.tangle())
}

/// Quartic polynomial in `x`, coefficients in increasing degree.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Quartic([C64; 5]);

impl Add for Quartic {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Quartic(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }
}

impl Sub for Quartic {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Quartic(std::array::from_fn(|i| self.0[i] - o.0[i]))
    }
}

impl Mul for Quartic {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut out = [ZERO; 5];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                if *a != ZERO && *b != ZERO {
                    assert!(i + j <= 4, "degree exceeds four");
                    out[i + j] += a * b;
                }
            }
        }
        Quartic(out)
    }
}

/// Coefficients `(a, b, c, d, e)` of `Det3(C_ijk0 + x C_ijk1) = a x^4 + b x^3 + c x^2 + d x + e`.
pub fn schlafli_quartic(c: &StateTensor) -> Result<[C64; 5]> {
    check_qubits(c, 4)?;
    let z = c.coeffs();
    let pencil: [Quartic; 8] = std::array::from_fn(|m| Quartic([z[2 * m], z[2 * m + 1], ZERO, ZERO, ZERO]));
    let q = cayley(&pencil).0;
    Ok([q[4], q[3], q[2], q[1], q[0]])
}

/// Discriminant of the binary quartic `a x^4 + b x^3 y + c x^2 y^2 + d x y^3 + e y^4`.
/// The homogeneous form stays valid when the leading coefficient vanishes.
pub fn binary_quartic_discriminant([a, b, c, d, e]: [C64; 5]) -> C64 {
    let k = |v: f64| C64::new(v, 0.0);
    k(256.0) * a * a * a * e * e * e - k(192.0) * a * a * b * d * e * e - k(128.0) * a * a * c * c * e * e
        + k(144.0) * a * a * c * d * d * e
        - k(27.0) * a * a * d * d * d * d
        + k(144.0) * a * b * b * c * e * e
        - k(6.0) * a * b * b * d * d * e
        - k(80.0) * a * b * c * c * d * e
        + k(18.0) * a * b * c * d * d * d
        + k(16.0) * a * c * c * c * c * e
        - k(4.0) * a * c * c * c * d * d
        - k(27.0) * b * b * b * b * e * e
        + k(18.0) * b * b * b * c * d * e
        - k(4.0) * b * b * b * d * d * d
        - k(4.0) * b * b * c * c * c * e
        + b * b * c * c * d * d
}

/// Normalization of `Det4` relative to the quartic discriminant. The value
/// `1/64` makes `T(HD) = 2^6 3^9 |Det4(HD)| = 1` exactly: the Schlafli quartic of
/// HD has discriminant `-3^-9`.
pub const DET4_SCALE: f64 = 1.0 / 64.0;

/// `Det4(C) = Disc(Det3(C_ijk0 + x C_ijk1)) / 64`, a degree-24 invariant.
pub fn det4(c: &StateTensor) -> Result<C64> {
    Ok(binary_quartic_discriminant(schlafli_quartic(c)?) * DET4_SCALE)
}

pub const T_PREFACTOR: f64 = 64.0 * 19683.0;
pub const T_CLAMP: f64 = 1e-14;

/// `T = 2^6 3^9 |Det4|`, clamped to zero when `|Det4| < 1e-14`.
pub fn hyper_t(c: &StateTensor) -> Result<f64> {
    let d = det4(c)?.norm();
    Ok(if d < T_CLAMP { 0.0 } else { T_PREFACTOR * d })
}
