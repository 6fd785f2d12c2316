//! Exact integer and residue arithmetic.
//!
//! Everything downstream reduces to the primitives in this module: canonical
//! residues with their projections, the generalized Chinese remainder solver
//! for non-coprime moduli, `lcm(1..k)`, the largest-prime-power and
//! floor-log helpers, and exact evaluation of the binomial polynomials
//! `P_k(x) = x(x-1)...(x-k+1)/k!`.
//!
//! All arithmetic is arbitrary precision; nothing here may silently wrap.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use std::fmt;

/// Errors from the arithmetic primitives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RingError {
    /// `nu_p` is undefined at `k = 0`.
    NuPZero,
    /// A base that must be at least 2 (for `nu_p`) was smaller.
    BaseTooSmall(u64),
}

impl fmt::Display for RingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingError::NuPZero => write!(f, "nu_p(p, k) is undefined at k = 0"),
            RingError::BaseTooSmall(p) => write!(f, "base {p} must be at least 2"),
        }
    }
}

impl std::error::Error for RingError {}

/// An element of `Z/kZ` stored as its canonical representative in `[0, k)`.
///
/// The conversions of the underlying theory all live here: `proj` is the
/// canonical surjection `pi_k`, [`Residue::representative`] is the injection
/// `iota_k` picking the representative in `{0, ..., k-1}`, and
/// [`Residue::project`] is `pi_{n,m} = pi_m . iota_n`, defined for *all*
/// `n, m`, not only `m | n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Residue {
    value: BigInt,
    modulus: BigInt,
}

impl Residue {
    /// Reduces `x` into `Z/mZ`. Panics if `m < 1`.
    pub fn new(x: impl Into<BigInt>, m: impl Into<BigInt>) -> Residue {
        let modulus = m.into();
        assert!(modulus >= BigInt::one(), "modulus must be >= 1");
        let value = x.into().mod_floor(&modulus);
        Residue { value, modulus }
    }

    /// The canonical representative in `[0, modulus)`.
    pub fn representative(&self) -> &BigInt {
        &self.value
    }

    pub fn modulus(&self) -> &BigInt {
        &self.modulus
    }

    /// `pi_{n,m}`: reduce the representative of `self` modulo `m`.
    ///
    /// Defined for every pair of moduli. When `m` divides the modulus of
    /// `self` this is the canonical surjective homomorphism and commutes
    /// with `proj`; otherwise it is neither a homomorphism nor surjective,
    /// and `proj(x, m)` can genuinely differ from
    /// `proj(x, n).project(m)` — see the module tests.
    pub fn project(&self, m: impl Into<BigInt>) -> Residue {
        Residue::new(self.value.clone(), m)
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus)
    }
}

macro_rules! residue_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl std::ops::$trait for &Residue {
            type Output = Residue;
            fn $method(self, rhs: &Residue) -> Residue {
                assert_eq!(
                    self.modulus, rhs.modulus,
                    "residue arithmetic requires matching moduli"
                );
                Residue::new(&self.value $op &rhs.value, self.modulus.clone())
            }
        }
    };
}

residue_binop!(Add, add, +);
residue_binop!(Sub, sub, -);
residue_binop!(Mul, mul, *);

/// `proj(x, m)`: the class of `x` in `Z/mZ` with its canonical representative.
pub fn proj(x: impl Into<BigInt>, m: impl Into<BigInt>) -> Residue {
    Residue::new(x, m)
}

/// One congruence `x = target (mod modulus)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Congruence {
    pub target: BigInt,
    pub modulus: BigInt,
}

impl Congruence {
    pub fn new(target: impl Into<BigInt>, modulus: impl Into<BigInt>) -> Congruence {
        let modulus = modulus.into();
        assert!(modulus >= BigInt::one(), "congruence modulus must be >= 1");
        Congruence {
            target: target.into(),
            modulus,
        }
    }
}

impl fmt::Display for Congruence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x = {} (mod {})", self.target, self.modulus)
    }
}

/// A nonempty system of simultaneous congruences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CongruenceSystem {
    equations: Vec<Congruence>,
}

impl CongruenceSystem {
    /// Panics on an empty system; every caller has at least one equation.
    pub fn new(equations: Vec<Congruence>) -> CongruenceSystem {
        assert!(!equations.is_empty(), "congruence system must be nonempty");
        CongruenceSystem { equations }
    }

    pub fn equations(&self) -> &[Congruence] {
        &self.equations
    }
}

/// Result of solving a [`CongruenceSystem`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GcrtOutcome {
    /// The full solution set is `{ base + k * period : k in Z }`, with
    /// `base` the least nonnegative solution and `period` the lcm of the
    /// moduli.
    Solution { base: BigInt, period: BigInt },
    /// No solution: equations `i` and `j` disagree modulo the gcd of their
    /// moduli. `(i, j)` is the lexicographically first such pair.
    Conflict { i: usize, j: usize },
}

impl GcrtOutcome {
    pub fn is_solvable(&self) -> bool {
        matches!(self, GcrtOutcome::Solution { .. })
    }
}

/// Solves a system of congruences whose moduli need not be coprime.
///
/// The system is solvable if and only if every pair of equations agrees
/// modulo the gcd of its moduli. Solvable systems are merged pairwise with
/// the extended gcd, keeping the least nonnegative representative, which
/// avoids any factorization and handles non-coprime moduli directly.
pub fn gcrt_solve(sys: &CongruenceSystem) -> GcrtOutcome {
    let eqs = sys.equations();
    let mut base = eqs[0].target.mod_floor(&eqs[0].modulus);
    let mut period = eqs[0].modulus.clone();
    for eq in &eqs[1..] {
        match merge_pair(&base, &period, &eq.target, &eq.modulus) {
            Some((b, p)) => {
                base = b;
                period = p;
            }
            // The accumulated congruence is equivalent to the equations
            // merged so far, so a failed merge means the system has an
            // incompatible pair; find the first one.
            None => return first_conflict(eqs),
        }
    }
    GcrtOutcome::Solution { base, period }
}

fn first_conflict(eqs: &[Congruence]) -> GcrtOutcome {
    for i in 0..eqs.len() {
        for j in (i + 1)..eqs.len() {
            let g = eqs[i].modulus.gcd(&eqs[j].modulus);
            if !(&eqs[i].target - &eqs[j].target).mod_floor(&g).is_zero() {
                return GcrtOutcome::Conflict { i, j };
            }
        }
    }
    unreachable!("a failed merge implies some pair disagrees modulo its gcd")
}

/// Merges `x = a1 (mod m1)` and `x = a2 (mod m2)` into a single congruence,
/// returning the least nonnegative solution and `lcm(m1, m2)`, or `None`
/// when the targets disagree modulo `gcd(m1, m2)`.
fn merge_pair(a1: &BigInt, m1: &BigInt, a2: &BigInt, m2: &BigInt) -> Option<(BigInt, BigInt)> {
    if let (Some(a1s), Some(m1s), Some(a2s), Some(m2s)) = (
        to_i128(a1),
        to_i128(m1),
        to_i128(a2),
        to_i128(m2),
    ) {
        // Values this small stay well inside i128 through the extended gcd.
        if m1s <= MERGE_SMALL_LIMIT && m2s <= MERGE_SMALL_LIMIT {
            return merge_pair_i128(a1s, m1s, a2s, m2s)
                .map(|(b, p)| (BigInt::from(b), BigInt::from(p)));
        }
    }
    let e = m1.extended_gcd(m2);
    let diff = a2 - a1;
    let (q, r) = diff.div_rem(&e.gcd);
    if !r.is_zero() {
        return None;
    }
    let lcm = m1 / &e.gcd * m2;
    let base = (a1 + m1 * e.x * q).mod_floor(&lcm);
    Some((base, lcm))
}

// lcm and intermediate products of two moduli below this bound fit in i128.
const MERGE_SMALL_LIMIT: i128 = 1 << 60;

fn to_i128(x: &BigInt) -> Option<i128> {
    i128::try_from(x).ok()
}

fn merge_pair_i128(a1: i128, m1: i128, a2: i128, m2: i128) -> Option<(i128, i128)> {
    let (g, x, _) = egcd_i128(m1, m2);
    let diff = a2 - a1;
    if diff % g != 0 {
        return None;
    }
    let lcm = m1 / g * m2;
    let step = (x % (m2 / g)) * ((diff / g) % (m2 / g)) % (m2 / g);
    let base = (a1 + m1 * step).rem_euclid(lcm);
    Some((base, lcm))
}

fn egcd_i128(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = egcd_i128(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

/// `lcm(1, ..., k)`, with `lcm(0) = 1`.
pub fn lcm_upto(k: u64) -> BigInt {
    // lcm(1..=42) still fits a u64; the word-size fold keeps this cheap in
    // the representation hot path.
    if k <= 42 {
        let mut acc: u64 = 1;
        for i in 2..=k.max(1) {
            acc = acc / acc.gcd(&i) * i;
        }
        return BigInt::from(acc);
    }
    let mut acc = lcm_upto(42);
    for i in 43..=k {
        acc = acc.lcm(&BigInt::from(i));
    }
    acc
}

/// The largest prime-power component of `m >= 1`: for
/// `m = p_1^a_1 ... p_l^a_l` this is `max_i p_i^a_i`.
///
/// `nu_of_modulus(1) = 1` by the empty-max convention, so loops of the form
/// `k < nu(m)` degrade gracefully at the trivial modulus.
pub fn nu_of_modulus(m: u64) -> u64 {
    assert!(m >= 1, "nu is defined for moduli >= 1");
    let mut rest = m;
    let mut best = 1u64;
    let mut p = 2u64;
    while p.saturating_mul(p) <= rest {
        if rest.is_multiple_of(p) {
            let mut power = 1u64;
            while rest.is_multiple_of(p) {
                rest /= p;
                power *= p;
            }
            best = best.max(power);
        }
        p += 1;
    }
    if rest > 1 {
        best = best.max(rest);
    }
    best
}

/// `nu_p(p, k)`: the largest `i` with `p^i <= k < p^(i+1)`, i.e. the floor of
/// `log_p(k)` computed purely by integer comparison.
///
/// Undefined at `k = 0`; such calls are rejected.
pub fn nu_p(p: u64, k: u64) -> Result<u32, RingError> {
    if p < 2 {
        return Err(RingError::BaseTooSmall(p));
    }
    if k == 0 {
        return Err(RingError::NuPZero);
    }
    let mut power = p;
    let mut i = 0u32;
    while power <= k {
        i += 1;
        match power.checked_mul(p) {
            Some(next) => power = next,
            None => break,
        }
    }
    Ok(i)
}

/// Exact evaluation of the binomial polynomial
/// `P_k(x) = x(x-1)...(x-k+1) / k!`.
///
/// `P_k` has rational coefficients but is integer valued on all of `Z`; the
/// product is divided out incrementally so every intermediate value stays an
/// integer. For `0 <= x < k` one factor vanishes, so `P_k(x) = 0` whenever
/// `k` exceeds a natural argument.
pub fn binom_poly_eval(k: u64, x: &BigInt) -> BigInt {
    let mut acc = BigInt::one();
    for l in 0..k {
        acc *= x - BigInt::from(l);
        if acc.is_zero() {
            return acc;
        }
        // A product of l+1 consecutive integers is divisible by (l+1)!,
        // and acc already carries 1/l!, so this division is exact.
        acc /= BigInt::from(l + 1);
    }
    acc
}

/// `P_k^{n,m}`: evaluate `P_k` on the canonical representative of `x` and
/// reduce the exact integer result modulo `m`.
pub fn binom_poly_mod(k: u64, x: &Residue, m: impl Into<BigInt>) -> Residue {
    proj(binom_poly_eval(k, x.representative()), m)
}
