//! Newton coefficients and the `lcm` divisibility criterion.
//!
//! Any sequence of integers `(a_k)` defines a function `N -> Z` through
//! `x -> sum_k a_k P_k(x)`; the sum is finite at every point because
//! `P_k(x) = 0` for `k > x`. Conversely the coefficients of a function are
//! recovered by forward differences,
//! `a_k = sum_j (-1)^(k-j) C(k,j) F(j)`. A function `N -> N` given this way
//! is congruence preserving exactly when `lcm(k)` divides `a_k` for all
//! `k`, which is what [`check_lcm_divisibility`] reports.
//!
//! The module also carries exact closed forms for the classical
//! non-polynomial congruence preserving functions built from floors of
//! `e`-like constants times factorials; their derivations are validated in
//! the tests against 50-digit rational floor computations before the closed
//! forms are trusted anywhere else.

use crate::lifting::NatPrefix;
use crate::ringcore::lcm_upto;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NewtonError {
    /// The floor exemplars are defined for integer bases `a >= 2`: the
    /// constants `e^(1/a)` degenerate at 0 and 1, and negative bases
    /// alternate in a way the closed form does not cover.
    BadExemplarBase(i64),
    /// Text input did not parse as a coefficient vector.
    Parse(String),
}

impl fmt::Display for NewtonError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NewtonError::BadExemplarBase(a) => {
                write!(f, "exemplar base must be an integer >= 2, got {a}")
            }
            NewtonError::Parse(why) => write!(f, "parse error: {why}"),
        }
    }
}

impl std::error::Error for NewtonError {}

/// Newton coefficients `a_0, ..., a_T` of a function prefix.
///
/// No divisibility is intrinsic here: functions that are not congruence
/// preserving have Newton coefficients too. Divisibility is a checked
/// property, not an invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewtonCoeffs {
    coeffs: Vec<BigInt>,
}

impl NewtonCoeffs {
    pub fn new(coeffs: Vec<BigInt>) -> NewtonCoeffs {
        NewtonCoeffs { coeffs }
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// One integer per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in &self.coeffs {
            out.push_str(&v.to_string());
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<NewtonCoeffs, NewtonError> {
        let coeffs: Result<Vec<BigInt>, _> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::parse)
            .collect();
        let coeffs = coeffs.map_err(|e| NewtonError::Parse(format!("bad integer: {e}")))?;
        if coeffs.is_empty() {
            return Err(NewtonError::Parse("empty coefficient vector".into()));
        }
        Ok(NewtonCoeffs::new(coeffs))
    }
}

/// Extracts the Newton coefficients of a prefix by the alternating binomial
/// sum `a_k = sum_{j<=k} (-1)^(k-j) C(k,j) F(j)`, exactly.
///
/// The in-place difference-table computation must agree with this; the
/// tests cross-check the two.
pub fn newton_coeffs(prefix: &NatPrefix) -> NewtonCoeffs {
    let values = prefix.values();
    let coeffs = (0..values.len())
        .map(|k| {
            let mut acc = BigInt::zero();
            // C(k, j) built incrementally: C(k, 0) = 1, ratio (k-j)/(j+1).
            let mut binom = BigInt::one();
            for (j, v) in values.iter().enumerate().take(k + 1) {
                if (k - j) % 2 == 0 {
                    acc += &binom * v;
                } else {
                    acc -= &binom * v;
                }
                binom = binom * BigInt::from((k - j) as u64) / BigInt::from((j + 1) as u64);
            }
            acc
        })
        .collect();
    NewtonCoeffs::new(coeffs)
}

/// Evaluates `sum_k a_k P_k(x)` at a natural argument, exactly.
///
/// Inverts [`newton_coeffs`] on the prefix the coefficients came from; for
/// `x` beyond the coefficient count it evaluates the polynomial the
/// truncated coefficient vector defines (all missing coefficients zero).
pub fn newton_eval(c: &NewtonCoeffs, x: u64) -> BigInt {
    let xb = BigInt::from(x);
    let mut acc = BigInt::zero();
    let mut binom = BigInt::one();
    for (k, a) in c.coeffs.iter().enumerate() {
        let k = k as u64;
        if k > x {
            break;
        }
        acc += a * &binom;
        // C(x, k+1) = C(x, k) * (x - k) / (k + 1).
        binom = binom * (&xb - BigInt::from(k)) / BigInt::from(k + 1);
    }
    acc
}

/// Builds the length-`len` prefix of the function the coefficients define.
pub fn synthesize_prefix(c: &NewtonCoeffs, len: usize) -> NatPrefix {
    assert!(len > 0, "prefix must be nonempty");
    NatPrefix::new((0..len as u64).map(|x| newton_eval(c, x)).collect())
}

/// Report of the divisibility gate `lcm(k) | a_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LcmDivisibility {
    Ok,
    /// The least `k` whose coefficient misses the gate, with the offending
    /// coefficient and the required divisor.
    Violation { k: u64, coeff: BigInt, lcm: BigInt },
}

impl LcmDivisibility {
    pub fn holds(&self) -> bool {
        matches!(self, LcmDivisibility::Ok)
    }
}

/// Reports the least `k` with `lcm(k)` not dividing `a_k`, or `Ok`.
pub fn check_lcm_divisibility(c: &NewtonCoeffs) -> LcmDivisibility {
    for (k, a) in c.coeffs.iter().enumerate() {
        let lcm = lcm_upto(k as u64);
        if !a.mod_floor(&lcm).is_zero() {
            return LcmDivisibility::Violation {
                k: k as u64,
                coeff: a.clone(),
                lcm,
            };
        }
    }
    LcmDivisibility::Ok
}

/// The function `x -> 1` at `x = 0`, else `floor(e * x!)`.
///
/// Closed form: `sum_{j=0}^{x} x!/j!`. For `x >= 1` the dropped tail
/// `sum_{j>x} x!/j!` lies strictly between 0 and 1, so the sum is exactly
/// the floor; at `x = 0` the sum is 1, matching the special case.
pub fn exemplar_floor_e_fact(x: u64) -> BigInt {
    let mut term = BigInt::one(); // x!/j! at j = x
    let mut sum = BigInt::one();
    for j in (1..=x).rev() {
        term *= BigInt::from(j);
        sum += &term;
    }
    sum
}

/// The function `x -> floor(e^(1/a) * a^x * x!)` for integer `a >= 2`.
///
/// Closed form: `sum_{j=0}^{x} a^(x-j) * x!/j!`; the dropped tail is again
/// strictly inside (0, 1). Bases 0 and 1 are excluded by the underlying
/// family, and negative bases are rejected because the alternating tail can
/// shift the floor.
pub fn exemplar_floor_ea_fact(a: i64, x: u64) -> Result<BigInt, NewtonError> {
    if a < 2 {
        return Err(NewtonError::BadExemplarBase(a));
    }
    let a = BigInt::from(a);
    let mut term = BigInt::one(); // a^(x-j) * x!/j! at j = x
    let mut sum = BigInt::one();
    for j in (1..=x).rev() {
        term = term * &a * BigInt::from(j);
        sum += &term;
    }
    Ok(sum)
}
