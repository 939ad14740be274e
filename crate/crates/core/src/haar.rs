//! Haar-random unitaries and states, random-walk proposals on U(d), and the
//! one-parameter real rotation used for permutation-invariant states.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, ComplexMatrix, C64};
use crate::rng::RngStream;
use crate::tensor::StateTensor;

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-distributed `d x d` unitary.
///
/// Ginibre matrix followed by modified Gram-Schmidt on its columns. Gram-Schmidt
/// yields the QR factor whose `R` has a positive real diagonal, which is the
/// phase-fixed QR that makes `Q` Haar distributed (a plain Householder QR is
/// not).
pub fn haar_unitary(d: usize, stream: &RngStream) -> Result<ComplexMatrix> {
    haar_unitary_with(d, &mut stream.rng())
}

pub fn haar_unitary_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<ComplexMatrix> {
    if d == 0 {
        return Err(Error::InvalidArgument("unitary dimension must be positive".into()));
    }
    loop {
        let g = ComplexMatrix::from_fn(d, d, |_, _| complex_gaussian(rng));
        if let Some(q) = gram_schmidt(&g) {
            return Ok(q);
        }
    }
}

fn gram_schmidt(g: &ComplexMatrix) -> Option<ComplexMatrix> {
    let d = g.rows();
    let mut q = ComplexMatrix::zeros(d, d);
    let mut done: Vec<Vec<C64>> = Vec::with_capacity(d);
    for j in 0..d {
        let mut v = g.column(j);
        // Two passes keep orthogonality at machine precision.
        for _ in 0..2 {
            for b in &done {
                let proj: C64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= proj * bi;
                }
            }
        }
        let nrm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nrm < 1e-10 {
            return None;
        }
        let v: Vec<C64> = v.into_iter().map(|z| z / nrm).collect();
        q.set_column(j, &v);
        done.push(v);
    }
    Some(q)
}

/// Haar-random pure state: normalized vector of i.i.d. complex Gaussians.
pub fn haar_state(dims: &[usize], stream: &RngStream) -> Result<StateTensor> {
    haar_state_with(dims, &mut stream.rng())
}

pub fn haar_state_with<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<StateTensor> {
    if dims.is_empty() {
        return Err(Error::Dimension("a state needs at least one party".into()));
    }
    let n: usize = dims.iter().product();
    let coeffs = (0..n).map(|_| complex_gaussian(rng)).collect();
    StateTensor::new(dims.to_vec(), coeffs)?.normalize()
}

/// Random Hermitian generator with unit spectral norm.
pub fn random_hermitian_unit<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let x = ComplexMatrix::from_fn(d, d, |_, _| complex_gaussian(rng));
    let mut g = ComplexMatrix::from_fn(d, d, |i, j| 0.5 * (x[(i, j)] + x[(j, i)].conj()));
    let spec = match hermitian_eigen(&g) {
        Ok(e) => e.values.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        Err(_) => g.frobenius(),
    };
    if spec > 0.0 {
        g = g.scale(C64::new(1.0 / spec, 0.0));
    }
    g
}

/// `exp(i * t * G)` for Hermitian `G`.
pub fn unitary_exp(g: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    if g.rows() == 2 && g.cols() == 2 {
        return Ok(unitary_exp_2x2(g, t));
    }
    crate::linalg::hermitian_function(g, |lam| C64::from_polar(1.0, t * lam))
}

/// Closed form for 2x2: `G = a I + b.sigma`, `exp(itG) = e^{ita}(cos(t|b|) I + i sin(t|b|) b.sigma/|b|)`.
fn unitary_exp_2x2(g: &ComplexMatrix, t: f64) -> ComplexMatrix {
    let a = 0.5 * (g[(0, 0)].re + g[(1, 1)].re);
    let bz = 0.5 * (g[(0, 0)].re - g[(1, 1)].re);
    let bx = g[(0, 1)].re;
    let by = -g[(0, 1)].im;
    let nb = (bx * bx + by * by + bz * bz).sqrt();
    let glob = C64::from_polar(1.0, t * a);
    let (c, s) = ((t * nb).cos(), (t * nb).sin());
    let i = C64::new(0.0, 1.0);
    let (nx, ny, nz) = if nb > 0.0 { (bx / nb, by / nb, bz / nb) } else { (0.0, 0.0, 0.0) };
    // n.sigma = [[nz, nx - i ny], [nx + i ny, -nz]]
    let m00 = C64::new(c, 0.0) + i * s * nz;
    let m11 = C64::new(c, 0.0) - i * s * nz;
    let m01 = i * s * C64::new(nx, -ny);
    let m10 = i * s * C64::new(nx, ny);
    ComplexMatrix::from_vec(2, 2, vec![glob * m00, glob * m01, glob * m10, glob * m11]).expect("2x2")
}

/// Random-walk proposal `U exp(i eps G)` with `G` a unit-scale random Hermitian.
pub fn perturb_unitary(u: &ComplexMatrix, eps: f64, stream: &RngStream) -> Result<ComplexMatrix> {
    perturb_unitary_with(u, eps, &mut stream.rng())
}

pub fn perturb_unitary_with<R: Rng + ?Sized>(u: &ComplexMatrix, eps: f64, rng: &mut R) -> Result<ComplexMatrix> {
    if !u.is_square() {
        return Err(Error::Dimension("perturbation needs a square matrix".into()));
    }
    if !(eps >= 0.0) {
        return Err(Error::InvalidArgument(format!("step size {eps} must be non-negative")));
    }
    let g = random_hermitian_unit(u.rows(), rng);
    u.matmul(&unitary_exp(&g, eps)?)
}

/// `U(p) = [[sqrt p, sqrt(1-p)], [-sqrt(1-p), sqrt p]]`.
pub fn u_p(p: f64) -> Result<ComplexMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("p = {p} outside [0, 1]")));
    }
    let a = p.sqrt();
    let b = (1.0 - p).sqrt();
    ComplexMatrix::from_real(2, 2, &[a, b, -b, a])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn u1_is_a_phase() {
        let u = haar_unitary(1, &RngStream::new(3, 0)).unwrap();
        assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_dimension_is_rejected() {
        assert!(haar_unitary(0, &RngStream::new(1, 1)).is_err());
    }

    #[test]
    fn unitarity_residual_small() {
        for d in 2..=8 {
            for s in 0..125 {
                let u = haar_unitary(d, &RngStream::new(11, s)).unwrap();
                assert!(u.unitarity_residual() < 1e-12, "d={d} residual {}", u.unitarity_residual());
            }
        }
    }

    #[test]
    fn single_qubit_state_normalized() {
        let t = haar_state(&[2], &RngStream::new(5, 0)).unwrap();
        let p = t.prob_vector().unwrap();
        assert!((p.probs()[0] + p.probs()[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_step_returns_input() {
        let u = haar_unitary(3, &RngStream::new(2, 0)).unwrap();
        let v = perturb_unitary(&u, 0.0, &RngStream::new(2, 1)).unwrap();
        assert!(v.sub(&u).unwrap().frobenius() < 1e-14);
    }

    #[test]
    fn perturbation_stays_unitary() {
        for d in [2, 3, 5] {
            let u = haar_unitary(d, &RngStream::new(8, d as u64)).unwrap();
            for (k, eps) in [1e-3, 0.1, 0.5, 1.0].into_iter().enumerate() {
                let v = perturb_unitary(&u, eps, &RngStream::new(9, k as u64)).unwrap();
                assert!(v.unitarity_residual() < 1e-12);
            }
        }
    }

    #[test]
    fn perturbation_distance_is_linear_in_step() {
        let u = haar_unitary(3, &RngStream::new(4, 0)).unwrap();
        let s = RngStream::new(4, 1);
        // Same stream -> same generator G; only the step changes.
        let d1 = perturb_unitary(&u, 0.01, &s).unwrap().sub(&u).unwrap().frobenius();
        let d2 = perturb_unitary(&u, 0.1, &s).unwrap().sub(&u).unwrap().frobenius();
        let ratio = d2 / d1;
        assert!((ratio - 10.0).abs() < 1.0, "ratio {ratio}");
    }

    #[test]
    fn exp_2x2_matches_eigen_route() {
        let mut rng = RngStream::new(6, 0).rng();
        for _ in 0..20 {
            let g = random_hermitian_unit(2, &mut rng);
            let fast = unitary_exp(&g, 0.7).unwrap();
            let slow = crate::linalg::hermitian_function(&g, |l| C64::from_polar(1.0, 0.7 * l)).unwrap();
            assert!(fast.sub(&slow).unwrap().frobenius() < 1e-13);
        }
    }

    #[test]
    fn rotation_family() {
        assert_eq!(u_p(1.0).unwrap(), ComplexMatrix::identity(2));
        let h = u_p(0.5).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((h[(0, 0)].re - s).abs() < 1e-15 && (h[(1, 0)].re + s).abs() < 1e-15);
        let z = u_p(0.0).unwrap();
        assert_eq!(z, ComplexMatrix::from_real(2, 2, &[0.0, 1.0, -1.0, 0.0]).unwrap());
        assert!(u_p(0.3).unwrap().unitarity_residual() < 1e-15);
        assert!(u_p(1.5).is_err() && u_p(-0.1).is_err());
    }
}
