//! Exact even moments of the 3-tangle over Haar-random 3-qubit states, and
//! the moment-method Beta fit of its distribution.
//!
//! For a Haar-random unit vector in `C^d`,
//! `<|psi_1|^{2p_1} ... |psi_d|^{2p_d}> = (d-1)! prod p_i! / (sum p_i + d - 1)!`
//! and monomials with unequal holomorphic and anti-holomorphic exponents
//! average to zero. Expanding `Det3^k conj(Det3)^k` therefore gives
//! `<tau^{2k}> = 16^k sum_e c_e^2 <|psi|^{2e}>` over the monomials `c_e psi^e` of `Det3^k`.

use std::collections::HashMap;
use std::ops::{Add, Mul, Sub};

use num_bigint::BigInt;
pub use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use statrs::distribution::{Beta, Continuous};

use crate::error::{Error, Result};
use crate::polyinv::cayley;

pub const VARS: usize = 8;
pub type Exponents = [u8; VARS];

/// Sparse polynomial in `z_1..z_8` and their conjugates, keyed by
/// `(e, e_bar)` for the monomial `prod z_i^{e_i} conj(z_i)^{e_bar_i}`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MonomialPoly {
    terms: HashMap<(Exponents, Exponents), BigRational>,
}

impl MonomialPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = Self::zero();
        p.insert(([0; VARS], [0; VARS]), c);
        p
    }

    /// The holomorphic variable `z_i`.
    pub fn var(i: usize) -> Self {
        let mut e = [0; VARS];
        e[i] = 1;
        let mut p = Self::zero();
        p.insert((e, [0; VARS]), BigRational::one());
        p
    }

    fn insert(&mut self, key: (Exponents, Exponents), c: BigRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(key).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(Exponents, Exponents), &BigRational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, e: &Exponents, e_bar: &Exponents) -> BigRational {
        self.terms.get(&(*e, *e_bar)).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Complex conjugate: swaps the two exponent vectors (coefficients are real).
    pub fn conj(&self) -> Self {
        Self { terms: self.terms.iter().map(|(&(e, eb), c)| ((eb, e), c.clone())).collect() }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::constant(BigRational::one());
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// Numerical value at `z`.
    pub fn eval(&self, z: &[num_complex::Complex64; VARS]) -> num_complex::Complex64 {
        use num_traits::ToPrimitive;
        self.terms
            .iter()
            .map(|((e, eb), c)| {
                let mut v = num_complex::Complex64::new(c.to_f64().unwrap_or(f64::NAN), 0.0);
                for i in 0..VARS {
                    v *= z[i].powu(e[i] as u32) * z[i].conj().powu(eb[i] as u32);
                }
                v
            })
            .sum()
    }

    /// Haar average over unit vectors in `C^8`.
    pub fn haar_expectation(&self) -> BigRational {
        self.terms
            .iter()
            .filter(|((e, eb), _)| e == eb)
            .map(|((e, _), c)| c * monomial_expectation(e, VARS))
            .fold(BigRational::zero(), |a, b| a + b)
    }
}

impl Add for &MonomialPoly {
    type Output = MonomialPoly;
    fn add(self, o: &MonomialPoly) -> MonomialPoly {
        let mut out = self.clone();
        for (k, c) in &o.terms {
            out.insert(*k, c.clone());
        }
        out
    }
}

impl Sub for &MonomialPoly {
    type Output = MonomialPoly;
    fn sub(self, o: &MonomialPoly) -> MonomialPoly {
        let mut out = self.clone();
        for (k, c) in &o.terms {
            out.insert(*k, -c.clone());
        }
        out
    }
}

impl Mul for &MonomialPoly {
    type Output = MonomialPoly;
    fn mul(self, o: &MonomialPoly) -> MonomialPoly {
        let mut out = MonomialPoly::zero();
        for ((e1, b1), c1) in &self.terms {
            for ((e2, b2), c2) in &o.terms {
                let e = std::array::from_fn(|i| e1[i] + e2[i]);
                let b = std::array::from_fn(|i| b1[i] + b2[i]);
                out.insert((e, b), c1 * c2);
            }
        }
        out
    }
}

impl Add for MonomialPoly {
    type Output = MonomialPoly;
    fn add(self, o: MonomialPoly) -> MonomialPoly {
        &self + &o
    }
}

impl Sub for MonomialPoly {
    type Output = MonomialPoly;
    fn sub(self, o: MonomialPoly) -> MonomialPoly {
        &self - &o
    }
}

impl Mul for MonomialPoly {
    type Output = MonomialPoly;
    fn mul(self, o: MonomialPoly) -> MonomialPoly {
        &self * &o
    }
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// `<prod |psi_i|^{2 p_i}>` over Haar-random unit vectors in `C^d`.
pub fn monomial_expectation(p: &[u8], d: usize) -> BigRational {
    assert!(d >= 1 && p.len() <= d, "exponent vector longer than the dimension");
    let total: u64 = p.iter().map(|&x| x as u64).sum();
    let num = p.iter().fold(factorial(d as u64 - 1), |acc, &x| acc * factorial(x as u64));
    BigRational::new(num, factorial(total + d as u64 - 1))
}

/// `Det3` of the amplitudes `z_{4i+2j+k} = C_ijk` as an integer polynomial (12 monomials).
pub fn det3_poly() -> MonomialPoly {
    let vars: [MonomialPoly; VARS] = std::array::from_fn(MonomialPoly::var);
    cayley(&vars)
}

pub const MAX_MOMENT: u32 = 6;

/// `<tau^{2k}>` exactly, `1 <= k <= 6`. `Det3^6` has few enough monomials
/// that every supported order finishes in milliseconds.
pub fn tangle_even_moment(k: u32) -> Result<BigRational> {
    if !(1..=MAX_MOMENT).contains(&k) {
        return Err(Error::InvalidArgument(format!("moment order k = {k} outside 1..={MAX_MOMENT}")));
    }
    // Multiplying by Det3 once per step combines like terms early.
    let hol = det3_poly().pow(k);
    let anti = hol.conj();
    let mut sum = BigRational::zero();
    for ((e, _), c) in hol.terms() {
        let c_bar = anti.coefficient(&[0; VARS], e);
        if !c_bar.is_zero() {
            sum += c * c_bar * monomial_expectation(e, VARS);
        }
    }
    Ok(sum * BigRational::from_integer(BigInt::from(16u32).pow(k)))
}

/// Moment-method Beta parameters `(alpha, beta)` from `<x>` and `<x^2>`.
pub fn beta_fit(m1: &BigRational, m2: &BigRational) -> Result<(BigRational, BigRational)> {
    let v = m2 - m1 * m1;
    if !v.is_positive() {
        return Err(Error::InvalidArgument("variance must be positive".into()));
    }
    let one = BigRational::one();
    let t = m1 * (&one - m1) / &v - &one;
    let alpha = m1 * &t;
    let beta = (&one - m1) * &t;
    if !alpha.is_positive() || !beta.is_positive() {
        return Err(Error::InvalidArgument("moments do not belong to a Beta distribution".into()));
    }
    Ok((alpha, beta))
}

/// Floating-point [`beta_fit`] for empirical moments.
pub fn beta_fit_f64(m1: f64, m2: f64) -> Result<(f64, f64)> {
    let v = m2 - m1 * m1;
    if !(v > 0.0) {
        return Err(Error::InvalidArgument("variance must be positive".into()));
    }
    let t = m1 * (1.0 - m1) / v - 1.0;
    let (a, b) = (m1 * t, (1.0 - m1) * t);
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::InvalidArgument("moments do not belong to a Beta distribution".into()));
    }
    Ok((a, b))
}

/// `<x^k>` of `Beta(alpha, beta)`: `prod_{j<k} (alpha + j) / (alpha + beta + j)`.
pub fn beta_moment(alpha: &BigRational, beta: &BigRational, k: u32) -> BigRational {
    let s = alpha + beta;
    (0..k).fold(BigRational::one(), |acc, j| {
        let j = BigRational::from_integer(BigInt::from(j));
        acc * (alpha + &j) / (&s + &j)
    })
}

/// Nearest `f64`, or NaN when out of range.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

pub const TAU_ALPHA: (i64, i64) = (31, 17);
pub const TAU_BETA: (i64, i64) = (62, 17);

/// `Beta(31/17, 62/17; x)`.
pub fn beta_pdf_tau(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidArgument(format!("x = {x} outside [0, 1]")));
    }
    Ok(tau_beta().pdf(x))
}

/// Density of `tau^2` under the Beta model: `Beta(31/17, 62/17; sqrt x) / (2 sqrt x)`.
pub fn beta_pdf_tau2(x: f64) -> Result<f64> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::InvalidArgument(format!("x = {x} outside (0, 1]")));
    }
    let s = x.sqrt();
    Ok(tau_beta().pdf(s) / (2.0 * s))
}

fn tau_beta() -> Beta {
    let a = TAU_ALPHA.0 as f64 / TAU_ALPHA.1 as f64;
    let b = TAU_BETA.0 as f64 / TAU_BETA.1 as f64;
    Beta::new(a, b).expect("positive shape parameters")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::haar_state;
    use crate::polyinv::det3;
    use crate::rng::RngStream;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn expectation_examples() {
        assert_eq!(monomial_expectation(&[0; 8], 8), q(1, 1));
        assert_eq!(monomial_expectation(&[0; 3], 3), q(1, 1));
        assert_eq!(monomial_expectation(&[1, 0, 0, 0, 0, 0, 0, 0], 8), q(1, 8));
        assert_eq!(monomial_expectation(&[2, 0, 0, 0, 0, 0, 0, 0], 8), q(1, 36));
    }

    /// All exponent vectors of total degree `m` in `d` variables.
    fn compositions(m: u8, d: usize) -> Vec<Vec<u8>> {
        if d == 1 {
            return vec![vec![m]];
        }
        (0..=m)
            .flat_map(|first| {
                compositions(m - first, d - 1).into_iter().map(move |mut rest| {
                    rest.insert(0, first);
                    rest
                })
            })
            .collect()
    }

    #[test]
    fn multinomial_identity() {
        // (sum |psi_i|^2)^m = 1 so the multinomial-weighted expectations sum to one.
        for d in [2usize, 3, 8] {
            for m in 1..=4u8 {
                let total = compositions(m, d).iter().fold(BigRational::zero(), |acc, p| {
                    let multinomial = p
                        .iter()
                        .fold(BigRational::from_integer(factorial(m as u64)), |a, &x| a / BigRational::from_integer(factorial(x as u64)));
                    acc + multinomial * monomial_expectation(p, d)
                });
                assert_eq!(total, q(1, 1), "d={d} m={m}");
            }
        }
    }

    #[test]
    fn det3_poly_shape_and_values() {
        let p = det3_poly();
        assert_eq!(p.len(), 12);
        let mut coeffs: Vec<i64> = p.terms().map(|(_, c)| c.to_integer().try_into().unwrap()).collect();
        coeffs.sort();
        assert_eq!(coeffs, vec![-2, -2, -2, -2, -2, -2, 1, 1, 1, 1, 4, 4]);
        for seed in 0..100 {
            let c = haar_state(&[2, 2, 2], &RngStream::new(seed, 3)).unwrap();
            let z: [num_complex::Complex64; 8] = c.coeffs().try_into().unwrap();
            let d = det3(&c).unwrap();
            assert!((p.eval(&z) - d).norm() < 1e-14);
            let sq = (&p * &p).eval(&z);
            assert!((sq - d * d).norm() <= 1e-10 * (d * d).norm().max(1e-300));
        }
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut ghz = [num_complex::Complex64::new(0.0, 0.0); 8];
        ghz[0] = num_complex::Complex64::new(h, 0.0);
        ghz[7] = ghz[0];
        assert!((p.eval(&ghz).norm() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn brute_force_levi_civita_coefficients() {
        // Symbolic version of the 12-index epsilon contraction; equals -2 Det3.
        let vars: [MonomialPoly; 8] = std::array::from_fn(MonomialPoly::var);
        let eps = |i: usize, j: usize| -> i64 {
            match (i, j) {
                (0, 1) => 1,
                (1, 0) => -1,
                _ => 0,
            }
        };
        let mut sum = MonomialPoly::zero();
        for bits in 0..1usize << 12 {
            let b = |n: usize| (bits >> n) & 1;
            let e = eps(b(0), b(3)) * eps(b(1), b(4)) * eps(b(6), b(9)) * eps(b(7), b(10)) * eps(b(2), b(8)) * eps(b(5), b(11));
            if e == 0 {
                continue;
            }
            let at = |i: usize, j: usize, k: usize| &vars[4 * i + 2 * j + k];
            let term = &(&(at(b(0), b(1), b(2)) * at(b(3), b(4), b(5))) * at(b(6), b(7), b(8))) * at(b(9), b(10), b(11));
            sum = &sum + &(&term * &MonomialPoly::constant(q(e, 1)));
        }
        let expected = &det3_poly() * &MonomialPoly::constant(q(-2, 1));
        assert_eq!(sum, expected);
    }

    #[test]
    fn exact_moments_one_to_six() {
        assert_eq!(tangle_even_moment(1).unwrap(), q(8, 55));
        assert_eq!(tangle_even_moment(2).unwrap(), q(128, 3003));
        assert_eq!(tangle_even_moment(3).unwrap(), q(7168, 415701));
        assert_eq!(tangle_even_moment(4).unwrap(), q(98304, 11685817));
        assert_eq!(tangle_even_moment(5).unwrap(), q(262144, 56497545));
        assert_eq!(tangle_even_moment(6).unwrap(), q(4194304, 1502700975));
        assert!(tangle_even_moment(0).is_err() && tangle_even_moment(7).is_err());
    }

    #[test]
    fn haar_expectation_of_det3_squared_modulus() {
        let p = det3_poly();
        let m = (&p * &p.conj()).haar_expectation() * q(16, 1);
        assert_eq!(m, q(8, 55));
    }

    #[test]
    fn beta_fit_examples() {
        assert_eq!(beta_fit(&q(1, 3), &q(8, 55)).unwrap(), (q(31, 17), q(62, 17)));
        // Uniform distribution.
        assert_eq!(beta_fit(&q(1, 2), &q(1, 3)).unwrap(), (q(1, 1), q(1, 1)));
        // Arcsine distribution Beta(1/2, 1/2).
        assert_eq!(beta_fit(&q(1, 2), &q(3, 8)).unwrap(), (q(1, 2), q(1, 2)));
        assert!(beta_fit(&q(1, 2), &q(1, 4)).is_err());
        let (a, b) = beta_fit_f64(1.0 / 3.0, 8.0 / 55.0).unwrap();
        assert!((a - 31.0 / 17.0).abs() < 1e-12 && (b - 62.0 / 17.0).abs() < 1e-12);
    }

    #[test]
    fn beta_model_moments() {
        let (a, b) = (q(31, 17), q(62, 17));
        assert_eq!(beta_moment(&a, &b, 1), q(1, 3));
        assert_eq!(beta_moment(&a, &b, 2), q(8, 55));
        assert_eq!(beta_moment(&a, &b, 4), q(533, 12573));
        assert_eq!(beta_moment(&a, &b, 6), q(30914, 1819783));
        assert_eq!(beta_moment(&a, &b, 8), q(112955, 13778357));
        assert_eq!(beta_moment(&a, &b, 10), q(1840340, 411553533));
        assert_eq!(beta_moment(&a, &b, 12), q(672000151, 252556684751));
    }

    #[test]
    fn tau2_density_integrates_to_one() {
        // Substituting x = t^2 removes the integrable singularity at 0.
        let n = 200_000;
        let h = 1.0 / n as f64;
        let f = |t: f64| if t == 0.0 { 0.0 } else { beta_pdf_tau2(t * t).unwrap() * 2.0 * t };
        let mut s = f(0.0) + f(1.0);
        for i in 1..n {
            s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let integral = s * h / 3.0;
        assert!((integral - 1.0).abs() < 1e-6, "{integral}");
        assert!(beta_pdf_tau2(0.0).is_err() && beta_pdf_tau2(1.5).is_err());
    }
}
