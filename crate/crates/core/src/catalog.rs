//! Named three- and four-qubit states, the five-term three-qubit standard form
//! and Dicke states.
//!
//! `HS` uses the prefactor `1/sqrt 6`, and `L` carries the `w^2` phase on all
//! four kets `|0101>, |0110>, |1001>, |1010>`; with three of them the
//! `1/sqrt 12` prefactor would not normalize the state. The decimal-coefficient states
//! `Phi1max`, `Phi2max` and `Psi1max` are renormalized.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::tensor::StateTensor;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NamedState {
    pub name: &'static str,
    pub qubits: usize,
    pub description: &'static str,
}

pub const CATALOG: &[NamedState] = &[
    NamedState { name: "GHZ", qubits: 3, description: "(|000> + |111>)/sqrt 2" },
    NamedState { name: "W", qubits: 3, description: "(|001> + |010> + |100>)/sqrt 3" },
    NamedState { name: "A4", qubits: 3, description: "(|000> + |010> + |001> + |111>)/2" },
    NamedState { name: "A5", qubits: 3, description: "five-term standard form with equal coefficients" },
    NamedState { name: "Phi1max", qubits: 3, description: "numerical maximizer of the minimal S_1 (3 qubits)" },
    NamedState { name: "Phi2max", qubits: 3, description: "numerical maximizer of the minimal S_2 (3 qubits)" },
    NamedState { name: "prod3", qubits: 3, description: "|000>" },
    NamedState { name: "GHZ4", qubits: 4, description: "(|0000> + |1111>)/sqrt 2" },
    NamedState { name: "A12", qubits: 4, description: "twelve-term standard form with equal coefficients" },
    NamedState { name: "HD", qubits: 4, description: "hyperdeterminant maximizer" },
    NamedState { name: "C1", qubits: 4, description: "cluster state (|0000>+|0011>+|1100>-|1111>)/2" },
    NamedState { name: "C2", qubits: 4, description: "cluster state (|0000>+|0110>+|1001>-|1111>)/2" },
    NamedState { name: "C3", qubits: 4, description: "cluster state (|0000>+|0101>+|1010>-|1111>)/2" },
    NamedState { name: "L", qubits: 4, description: "Tsallis-entropy maximizer" },
    NamedState { name: "HS", qubits: 4, description: "maximal average von Neumann entropy of two-qubit marginals" },
    NamedState { name: "Phi4", qubits: 4, description: "sqrt(1/3) D(4,0) + sqrt(2/3) D(4,3)" },
    NamedState { name: "Psi1max", qubits: 4, description: "numerical maximizer of the minimal S_1 (4 qubits)" },
    NamedState { name: "prod4", qubits: 4, description: "|0000>" },
];

/// Resolves a catalog name (case-insensitive) or a Dicke state written `D(n,k)`.
pub fn named_state(name: &str) -> Result<StateTensor> {
    if let Some((n, k)) = parse_dicke(name) {
        return dicke_state(n, k);
    }
    let key = name.trim().to_ascii_lowercase();
    let w = C64::from_polar(1.0, 2.0 * PI / 3.0);
    let r = |x: f64| C64::new(x, 0.0);
    let one = r(1.0);
    match key.as_str() {
        "ghz" => kets(3, &[("000", one), ("111", one)]),
        "w" => kets(3, &[("001", one), ("010", one), ("100", one)]),
        "a4" => kets(3, &[("000", one), ("010", one), ("001", one), ("111", one)]),
        "a5" => {
            let a = 1.0 / 5f64.sqrt();
            acin_state([a, a, a, a], r(a))
        }
        "phi1max" => kets(
            3,
            &[
                ("000", r(0.27)),
                ("100", r(0.377)),
                ("010", r(0.326)),
                ("001", r(0.363)),
                ("111", phase(0.740, -0.79)),
            ],
        ),
        "phi2max" => kets(
            3,
            &[
                ("000", r(0.438)),
                ("100", r(0.29)),
                ("010", r(0.371)),
                ("001", r(0.316)),
                ("111", phase(0.698, -0.826)),
            ],
        ),
        "prod3" => kets(3, &[("000", one)]),
        "ghz4" => kets(4, &[("0000", one), ("1111", one)]),
        "a12" => {
            let excluded = ["0111", "1011", "1101", "1110"];
            let labels: Vec<String> = (0..16u32)
                .map(|i| format!("{i:04b}"))
                .filter(|s| !excluded.contains(&s.as_str()))
                .collect();
            let terms: Vec<(&str, C64)> = labels.iter().map(|s| (s.as_str(), one)).collect();
            kets(4, &terms)
        }
        "hd" => kets(
            4,
            &[("1000", one), ("0100", one), ("0010", one), ("0001", one), ("1111", r(2f64.sqrt()))],
        ),
        "c1" => kets(4, &[("0000", one), ("0011", one), ("1100", one), ("1111", -one)]),
        "c2" => kets(4, &[("0000", one), ("0110", one), ("1001", one), ("1111", -one)]),
        "c3" => kets(4, &[("0000", one), ("0101", one), ("1010", one), ("1111", -one)]),
        "l" => {
            let w2 = w * w;
            kets(
                4,
                &[
                    ("0000", one + w),
                    ("1111", one + w),
                    ("0011", one - w),
                    ("1100", one - w),
                    ("0101", w2),
                    ("0110", w2),
                    ("1001", w2),
                    ("1010", w2),
                ],
            )
        }
        "hs" => {
            let w2 = w * w;
            kets(4, &[("0011", one), ("1100", one), ("0101", w), ("1010", w), ("0110", w2), ("1001", w2)])
        }
        "phi4" => {
            let d0 = dicke_state(4, 0)?;
            let d3 = dicke_state(4, 3)?;
            d0.scale(r((1.0f64 / 3.0).sqrt())).add(&d3.scale(r((2.0f64 / 3.0).sqrt())))?.normalize()
        }
        "psi1max" => kets(
            4,
            &[
                ("0000", r(0.630)),
                ("1100", r(0.281)),
                ("1010", r(0.202)),
                ("0110", r(0.24)),
                ("1110", phase(0.232, 0.494)),
                ("1001", r(0.059)),
                ("0101", r(0.282)),
                ("1101", phase(0.346, -0.362)),
                ("0011", r(0.304)),
                ("1011", phase(0.218, 0.626)),
                ("0111", phase(0.054, -0.725)),
                ("1111", phase(0.164, 0.372)),
            ],
        ),
        "prod4" => kets(4, &[("0000", one)]),
        _ => Err(Error::UnknownState(name.to_string())),
    }
}

/// `modulus * exp(i pi * fraction)`.
fn phase(modulus: f64, fraction: f64) -> C64 {
    C64::from_polar(modulus, PI * fraction)
}

/// Normalized superposition of computational-basis kets given as bit strings.
fn kets(qubits: usize, terms: &[(&str, C64)]) -> Result<StateTensor> {
    let mut coeffs = vec![C64::new(0.0, 0.0); 1 << qubits];
    for (label, c) in terms {
        if label.len() != qubits {
            return Err(Error::InvalidArgument(format!("ket `{label}` is not {qubits} qubits")));
        }
        let idx = usize::from_str_radix(label, 2)
            .map_err(|_| Error::InvalidArgument(format!("bad ket label `{label}`")))?;
        coeffs[idx] += c;
    }
    StateTensor::new(vec![2; qubits], coeffs)?.normalize()
}

/// `a1|000> + a2|001> + a3|010> + a4|100> + a5|111>`.
pub fn acin_state(a: [f64; 4], a5: C64) -> Result<StateTensor> {
    if a.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::InvalidArgument("a1..a4 must be non-negative reals".into()));
    }
    let r = |x: f64| C64::new(x, 0.0);
    let coeffs = {
        let mut c = vec![C64::new(0.0, 0.0); 8];
        c[0b000] = r(a[0]);
        c[0b001] = r(a[1]);
        c[0b010] = r(a[2]);
        c[0b100] = r(a[3]);
        c[0b111] = a5;
        c
    };
    StateTensor::normalized(vec![2, 2, 2], coeffs)
}

/// Uniform superposition of all `n`-qubit kets of Hamming weight `k`.
pub fn dicke_state(n: usize, k: usize) -> Result<StateTensor> {
    if n == 0 || k > n || n > 24 {
        return Err(Error::InvalidArgument(format!("Dicke state D({n},{k}) is not defined here")));
    }
    let count = (0..1usize << n).filter(|i| i.count_ones() as usize == k).count();
    let amp = C64::new(1.0 / (count as f64).sqrt(), 0.0);
    let coeffs = (0..1usize << n)
        .map(|i| if i.count_ones() as usize == k { amp } else { C64::new(0.0, 0.0) })
        .collect();
    StateTensor::new(vec![2; n], coeffs)
}

fn parse_dicke(name: &str) -> Option<(usize, usize)> {
    let s = name.trim();
    let inner = s.strip_prefix("D(").or_else(|| s.strip_prefix("d("))?.strip_suffix(')')?;
    let (n, k) = inner.split_once(',')?;
    Some((n.trim().parse().ok()?, k.trim().parse().ok()?))
}
