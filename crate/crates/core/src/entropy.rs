//! Rényi entropies of probability vectors (natural logarithm).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::ProbVector;

/// Entries below this fraction of the largest entry are outside the support
/// when counting for `q = 0`.
pub const SUPPORT_THRESHOLD: f64 = 1e-12;

/// Finite stand-in for `q = inf` in ensemble tables.
pub const LARGE_Q_PROXY: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RenyiOrder {
    Finite(f64),
    Infinity,
}

impl RenyiOrder {
    pub fn new(q: f64) -> Result<Self> {
        if q.is_nan() || q < 0.0 {
            return Err(Error::InvalidArgument(format!("Renyi order {q} must be non-negative")));
        }
        Ok(if q.is_infinite() { Self::Infinity } else { Self::Finite(q) })
    }

    pub fn value(self) -> f64 {
        match self {
            Self::Finite(q) => q,
            Self::Infinity => f64::INFINITY,
        }
    }

    pub fn is_zero(self) -> bool {
        matches!(self, Self::Finite(q) if q == 0.0)
    }
}

impl fmt::Display for RenyiOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(q) => write!(f, "{q}"),
            Self::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for RenyiOrder {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Self::Infinity),
            t => t
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("cannot parse Renyi order `{s}`")))
                .and_then(Self::new),
        }
    }
}

/// `S_q(p)`; dispatches to the support count, Shannon and min-entropy limits.
pub fn renyi(p: &ProbVector, q: RenyiOrder) -> f64 {
    renyi_slice(p.probs(), q)
}

/// [`renyi`] on a raw slice that is assumed to be a probability vector.
pub fn renyi_slice(p: &[f64], q: RenyiOrder) -> f64 {
    let pmax = p.iter().copied().fold(0.0, f64::max);
    if pmax <= 0.0 {
        return 0.0;
    }
    let value = match q {
        RenyiOrder::Infinity => -pmax.ln(),
        RenyiOrder::Finite(q) if q == 0.0 => {
            let cut = pmax * SUPPORT_THRESHOLD;
            (p.iter().filter(|&&x| x > cut).count() as f64).ln()
        }
        RenyiOrder::Finite(q) if q == 1.0 => shannon(p),
        RenyiOrder::Finite(q) => {
            // log sum p^q = q log pmax + log sum (p/pmax)^q, no overflow or
            // underflow of the dominant terms for large q.
            let s: f64 = p.iter().filter(|&&x| x > 0.0).map(|&x| (x / pmax).powf(q)).sum();
            (q * pmax.ln() + s.ln()) / (1.0 - q)
        }
    };
    value.max(0.0)
}

pub fn shannon(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

/// Values just either side of a limiting order, with the closed-form limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitCheck {
    pub below: Option<f64>,
    pub above: f64,
    pub limit: f64,
}

pub const LIMIT_OFFSET: f64 = 1e-5;
pub const LIMIT_TOL: f64 = 1e-3;

/// Evaluates the generic formula at `q0 +- 1e-5` and checks it against the
/// dedicated `q0` branch (`q0` is 0 or 1).
pub fn renyi_limits_check(p: &ProbVector, q0: f64) -> Result<LimitCheck> {
    if q0 != 0.0 && q0 != 1.0 {
        return Err(Error::InvalidArgument("limit check is defined at q = 0 or q = 1".into()));
    }
    let limit = renyi(p, RenyiOrder::Finite(q0));
    let above = renyi(p, RenyiOrder::Finite(q0 + LIMIT_OFFSET));
    let below = (q0 > 0.0).then(|| renyi(p, RenyiOrder::Finite(q0 - LIMIT_OFFSET)));
    let worst = below.map_or(0.0, |b| (b - limit).abs()).max((above - limit).abs());
    if worst > LIMIT_TOL {
        return Err(Error::Numerical(format!(
            "Renyi entropy near q = {q0} deviates from the limit by {worst:.3e}"
        )));
    }
    Ok(LimitCheck { below, above, limit })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(x: &[f64]) -> ProbVector {
        ProbVector::new(x.to_vec()).unwrap()
    }

    const ORDERS: [RenyiOrder; 6] = [
        RenyiOrder::Finite(0.0),
        RenyiOrder::Finite(0.5),
        RenyiOrder::Finite(1.0),
        RenyiOrder::Finite(2.0),
        RenyiOrder::Finite(100.0),
        RenyiOrder::Infinity,
    ];

    #[test]
    fn uniform_vector() {
        for k in [1usize, 2, 5, 8] {
            let p = pv(&vec![1.0 / k as f64; k]);
            for q in ORDERS {
                assert!((renyi(&p, q) - (k as f64).ln()).abs() < 1e-12, "k={k} q={q}");
            }
        }
    }

    #[test]
    fn ghz_vector_is_log_two() {
        let mut v = vec![0.0; 8];
        v[0] = 0.5;
        v[7] = 0.5;
        let p = pv(&v);
        for q in ORDERS {
            assert!((renyi(&p, q) - 2f64.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn collision_entropy_example() {
        let p = pv(&[0.5, 0.25, 0.25]);
        assert!((renyi(&p, RenyiOrder::Finite(2.0)) + (3.0f64 / 8.0).ln()).abs() < 1e-14);
    }

    #[test]
    fn delta_vector_is_zero() {
        let p = pv(&[0.0, 1.0, 0.0]);
        for q in ORDERS.iter().skip(1) {
            assert_eq!(renyi(&p, *q), 0.0);
        }
    }

    #[test]
    fn limits_near_one() {
        let p = pv(&[1.0 / 8.0; 8]);
        let c = renyi_limits_check(&p, 1.0).unwrap();
        assert!((c.above - 8f64.ln()).abs() < 1e-9);
        let w = pv(&[0.0, 1.0 / 3.0, 1.0 / 3.0, 0.0, 1.0 / 3.0, 0.0, 0.0, 0.0]);
        let c = renyi_limits_check(&w, 1.0).unwrap();
        assert!((c.limit - 3f64.ln()).abs() < 1e-12);
        assert!((c.below.unwrap() - 3f64.ln()).abs() < 1e-3);
    }

    #[test]
    fn limit_check_rejects_other_orders() {
        assert!(renyi_limits_check(&pv(&[1.0]), 2.0).is_err());
    }

    #[test]
    fn large_q_does_not_underflow() {
        let mut v = vec![1e-300; 15];
        v.push(1.0 - 15e-300);
        let p = pv(&v);
        let s = renyi(&p, RenyiOrder::Finite(100.0));
        assert!(s.is_finite() && s >= 0.0);
        let sixteen = pv(&[1.0 / 16.0; 16]);
        assert!((renyi(&sixteen, RenyiOrder::Finite(100.0)) - 16f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn parse_orders() {
        assert_eq!("inf".parse::<RenyiOrder>().unwrap(), RenyiOrder::Infinity);
        assert_eq!("2".parse::<RenyiOrder>().unwrap(), RenyiOrder::Finite(2.0));
        assert!("-1".parse::<RenyiOrder>().is_err());
        assert!("x".parse::<RenyiOrder>().is_err());
    }
}
