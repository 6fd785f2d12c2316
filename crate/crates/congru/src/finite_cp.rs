//! Functions between finite residue rings as value tables.
//!
//! A table `f : Z/nZ -> Z/mZ` is *congruence preserving* when for all `x, y`
//! the image of `x - y` under `pi_{n,m}` divides `f(x) - f(y)` inside
//! `Z/mZ`. For `n = m` this coincides with plain divisibility of value
//! differences by argument differences. This module holds the checkers, a
//! brute-force enumerator for small sizes, and the binomial-basis
//! coefficient representation
//! `f = sum_{k < nu(m)} pi_m(a_k) P_k^{n,m}` with `lcm(k) | a_k`,
//! together with its inverse.

use crate::lifting;
use crate::ringcore::{
    binom_poly_eval, binom_poly_mod, gcrt_solve, lcm_upto, nu_of_modulus, proj, Congruence,
    CongruenceSystem, GcrtOutcome, Residue,
};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use std::fmt;

/// Largest `m^n` the brute-force enumerator will walk.
pub const ENUMERATION_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FiniteCpError {
    /// Table length or an entry is out of range for the declared moduli.
    MalformedTable(String),
    /// The same-ring checker was handed a table with `n != m`.
    NotSameRing { n: u64, m: u64 },
    /// `m^n` exceeds [`ENUMERATION_LIMIT`].
    EnumerationTooLarge { n: u64, m: u64 },
    /// An operation that needs a congruence preserving input got one that
    /// is not; the witness pair violates the divisibility condition.
    NotCongruencePreserving { x: u64, y: u64 },
    /// The representation requires the target modulus to divide the source.
    TargetNotDivisor { n: u64, m: u64 },
    /// The representation requires `m >= 2`.
    TargetTooSmall { m: u64 },
    /// Text input did not parse as a function table.
    Parse(String),
}

impl fmt::Display for FiniteCpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FiniteCpError::MalformedTable(why) => write!(f, "malformed table: {why}"),
            FiniteCpError::NotSameRing { n, m } => {
                write!(f, "same-ring check requires n = m, got n={n} m={m}")
            }
            FiniteCpError::EnumerationTooLarge { n, m } => {
                write!(f, "m^n = {m}^{n} exceeds the enumeration guard")
            }
            FiniteCpError::NotCongruencePreserving { x, y } => {
                write!(
                    f,
                    "function is not congruence preserving: witness x={x} y={y}"
                )
            }
            FiniteCpError::TargetNotDivisor { n, m } => {
                write!(f, "representation requires m | n, got n={n} m={m}")
            }
            FiniteCpError::TargetTooSmall { m } => {
                write!(f, "representation requires m >= 2, got m={m}")
            }
            FiniteCpError::Parse(why) => write!(f, "parse error: {why}"),
        }
    }
}

impl std::error::Error for FiniteCpError {}

/// A total function `Z/nZ -> Z/mZ` stored as its value table
/// (index `x` maps to `table[x]`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteFn {
    n: u64,
    m: u64,
    table: Vec<u64>,
}

impl FiniteFn {
    pub fn new(n: u64, m: u64, table: Vec<u64>) -> Result<FiniteFn, FiniteCpError> {
        if n < 1 || m < 1 {
            return Err(FiniteCpError::MalformedTable(format!(
                "moduli must be >= 1, got n={n} m={m}"
            )));
        }
        if table.len() as u64 != n {
            return Err(FiniteCpError::MalformedTable(format!(
                "expected {n} entries, got {}",
                table.len()
            )));
        }
        if let Some(bad) = table.iter().find(|&&v| v >= m) {
            return Err(FiniteCpError::MalformedTable(format!(
                "entry {bad} out of range for modulus {m}"
            )));
        }
        Ok(FiniteFn { n, m, table })
    }

    /// The constant-zero table, congruence preserving for any moduli.
    pub fn zero(n: u64, m: u64) -> FiniteFn {
        FiniteFn::new(n, m, vec![0; n as usize]).expect("zero table is well formed")
    }

    /// The identity on `Z/nZ`.
    pub fn identity(n: u64) -> FiniteFn {
        FiniteFn::new(n, n, (0..n).collect()).expect("identity table is well formed")
    }

    pub fn source_modulus(&self) -> u64 {
        self.n
    }

    pub fn target_modulus(&self) -> u64 {
        self.m
    }

    pub fn table(&self) -> &[u64] {
        &self.table
    }

    /// `f(x)` for `x` taken modulo `n`.
    pub fn apply(&self, x: u64) -> u64 {
        self.table[(x % self.n) as usize]
    }

    /// `f(x)` for any integer argument, reduced into `Z/nZ` first.
    pub fn apply_int(&self, x: &BigInt) -> u64 {
        let r = x.mod_floor(&BigInt::from(self.n));
        self.table[u64::try_from(r).expect("reduced residue fits u64") as usize]
    }

    /// Serializes as the shared text format: first line `n m`, second line
    /// the `n` table entries separated by single spaces.
    pub fn to_text(&self) -> String {
        let row: Vec<String> = self.table.iter().map(|v| v.to_string()).collect();
        format!("{} {}\n{}\n", self.n, self.m, row.join(" "))
    }

    /// Parses the text format produced by [`FiniteFn::to_text`].
    pub fn parse(text: &str) -> Result<FiniteFn, FiniteCpError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| FiniteCpError::Parse("empty input".into()))?;
        let mut parts = header.split_whitespace();
        let n: u64 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| FiniteCpError::Parse("bad source modulus".into()))?;
        let m: u64 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| FiniteCpError::Parse("bad target modulus".into()))?;
        if parts.next().is_some() {
            return Err(FiniteCpError::Parse("trailing tokens in header".into()));
        }
        let row = lines
            .next()
            .ok_or_else(|| FiniteCpError::Parse("missing table row".into()))?;
        let table: Result<Vec<u64>, _> = row.split_whitespace().map(|s| s.parse()).collect();
        let table = table.map_err(|_| FiniteCpError::Parse("bad table entry".into()))?;
        FiniteFn::new(n, m, table)
    }
}

/// Verdict of a congruence-preservation check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CpCheck {
    Preserving,
    /// `(x, y)` is the lexicographically first ordered pair violating the
    /// divisibility condition.
    Violated { x: u64, y: u64 },
}

impl CpCheck {
    pub fn holds(&self) -> bool {
        matches!(self, CpCheck::Preserving)
    }

    pub fn witness(&self) -> Option<(u64, u64)> {
        match *self {
            CpCheck::Preserving => None,
            CpCheck::Violated { x, y } => Some((x, y)),
        }
    }
}

/// Whether `d` divides `e` inside `Z/mZ`, i.e. some `k` in `[0, m)` has
/// `d*k = e (mod m)`. Decided via `gcd(d, m) | e`; the defining scan is
/// kept as a test oracle.
pub fn divides_in_ring(m: u64, d: u64, e: u64) -> bool {
    (e % m).is_multiple_of(d.gcd(&m))
}

/// Congruence preservation for `f : Z/nZ -> Z/mZ`:
/// `pi_m(iota_n(x) - iota_n(y))` must divide `f(x) - f(y)` in `Z/mZ` for
/// every ordered pair — the representatives are subtracted as integers and
/// the difference is reduced modulo `m`.
///
/// Reducing the difference inside `Z/nZ` first would give a different (and
/// orientation-asymmetric) relation when `m` does not divide `n`; the
/// classical `Z/6Z -> Z/8Z` example is congruence preserving under this
/// reading and not under that one. The two agree whenever `m | n`.
pub fn is_cp_finite(f: &FiniteFn) -> CpCheck {
    let (n, m) = (f.n, f.m);
    for x in 0..n {
        for y in 0..n {
            if x == y {
                continue;
            }
            let d = (x as i128 - y as i128).rem_euclid(m as i128) as u64;
            let e = (f.table[x as usize] + m - f.table[y as usize]) % m;
            if !divides_in_ring(m, d, e) {
                return CpCheck::Violated { x, y };
            }
        }
    }
    CpCheck::Preserving
}

/// The `n = m` specialization: `x - y` divides `f(x) - f(y)`. When `n = m`
/// the mapping step `pi_{n,m}` is the identity, so this coincides with
/// [`is_cp_finite`]; tables with `n != m` are rejected.
pub fn is_cp_samering(f: &FiniteFn) -> Result<CpCheck, FiniteCpError> {
    if f.n != f.m {
        return Err(FiniteCpError::NotSameRing { n: f.n, m: f.m });
    }
    Ok(is_cp_finite(f))
}

/// Iterator over all congruence preserving tables `Z/nZ -> Z/mZ`, produced
/// by filtering every one of the `m^n` tables in lexicographic order.
/// Refuses when `m^n` exceeds [`ENUMERATION_LIMIT`].
pub fn enumerate_cp(n: u64, m: u64) -> Result<CpEnumeration, FiniteCpError> {
    let mut count: u64 = 1;
    for _ in 0..n {
        count = count
            .checked_mul(m)
            .filter(|&c| c <= ENUMERATION_LIMIT)
            .ok_or(FiniteCpError::EnumerationTooLarge { n, m })?;
    }
    Ok(CpEnumeration {
        n,
        m,
        next: Some(vec![0; n as usize]),
    })
}

pub struct CpEnumeration {
    n: u64,
    m: u64,
    next: Option<Vec<u64>>,
}

impl Iterator for CpEnumeration {
    type Item = FiniteFn;

    fn next(&mut self) -> Option<FiniteFn> {
        loop {
            let table = self.next.as_ref()?.clone();
            // Advance the odometer; last index is the least significant.
            let cur = self.next.as_mut().expect("present");
            let mut pos = cur.len();
            loop {
                if pos == 0 {
                    self.next = None;
                    break;
                }
                pos -= 1;
                cur[pos] += 1;
                if cur[pos] < self.m {
                    break;
                }
                cur[pos] = 0;
            }
            let f = FiniteFn {
                n: self.n,
                m: self.m,
                table,
            };
            if is_cp_finite(&f).holds() {
                return Some(f);
            }
        }
    }
}

/// Coefficients `a_0, ..., a_{nu(m)-1}` representing a congruence preserving
/// `f : Z/nZ -> Z/mZ` (with `m | n`, `m >= 2`) as
/// `f = sum_k pi_m(a_k) P_k^{n,m}`.
///
/// Each `a_k` is stored canonically: the least nonnegative multiple of
/// `lcm(k)` with the required image modulo `m`. The canonical form makes
/// round trips exact and tuple comparison meaningful.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CpCoeffs {
    n: u64,
    m: u64,
    coeffs: Vec<BigInt>,
}

impl CpCoeffs {
    pub fn new(n: u64, m: u64, coeffs: Vec<BigInt>) -> Result<CpCoeffs, FiniteCpError> {
        if m < 2 {
            return Err(FiniteCpError::TargetTooSmall { m });
        }
        if !n.is_multiple_of(m) {
            return Err(FiniteCpError::TargetNotDivisor { n, m });
        }
        let nu = nu_of_modulus(m);
        if coeffs.len() as u64 != nu {
            return Err(FiniteCpError::MalformedTable(format!(
                "expected nu(m) = {nu} coefficients, got {}",
                coeffs.len()
            )));
        }
        for (k, a) in coeffs.iter().enumerate() {
            if !a.mod_floor(&lcm_upto(k as u64)).is_zero() {
                return Err(FiniteCpError::MalformedTable(format!(
                    "coefficient a_{k} = {a} is not a multiple of lcm({k})"
                )));
            }
        }
        Ok(CpCoeffs { n, m, coeffs })
    }

    pub fn source_modulus(&self) -> u64 {
        self.n
    }

    pub fn target_modulus(&self) -> u64 {
        self.m
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Tabulates the represented function over all of `Z/nZ`.
    ///
    /// Same formula as [`eval_repr`] applied pointwise, specialized to the
    /// word-sized arithmetic the desk-scale moduli allow; the equivalence of
    /// the two paths is pinned by tests.
    pub fn eval_table(&self) -> FiniteFn {
        let pmat = binom_table_mod(self.n, self.m, self.coeffs.len() as u64);
        self.eval_table_with(&pmat)
    }

    /// [`CpCoeffs::eval_table`] with a precomputed `P_k(x) mod m` matrix,
    /// for callers tabulating many coefficient tuples at the same moduli.
    pub fn eval_table_with(&self, pmat: &[Vec<u64>]) -> FiniteFn {
        let m = self.m as u128;
        let reduced: Vec<u64> = self
            .coeffs
            .iter()
            .map(|a| u64::try_from(a.mod_floor(&BigInt::from(self.m))).expect("residue fits u64"))
            .collect();
        let table = (0..self.n as usize)
            .map(|x| {
                let mut acc: u128 = 0;
                for (k, a) in reduced.iter().enumerate() {
                    acc = (acc + (*a as u128) * (pmat[k][x] as u128)) % m;
                }
                acc as u64
            })
            .collect();
        FiniteFn {
            n: self.n,
            m: self.m,
            table,
        }
    }
}

/// `P_k(x) mod m` for `k < kmax`, `x < n`, indexed `[k][x]`.
pub fn binom_table_mod(n: u64, m: u64, kmax: u64) -> Vec<Vec<u64>> {
    let mm = BigInt::from(m);
    (0..kmax)
        .map(|k| {
            (0..n)
                .map(|x| {
                    u64::try_from(binom_poly_eval(k, &BigInt::from(x)).mod_floor(&mm))
                        .expect("residue fits u64")
                })
                .collect()
        })
        .collect()
}

/// The least nonnegative multiple of `lcm(k)` congruent to `raw` modulo `m`.
/// Requires `gcd(lcm(k), m) | raw`, which holds for Newton coefficients of
/// congruence preserving lifts.
fn canonical_coeff(k: u64, raw: &BigInt, m: u64) -> BigInt {
    let sys = CongruenceSystem::new(vec![
        Congruence::new(BigInt::zero(), lcm_upto(k)),
        Congruence::new(raw.clone(), BigInt::from(m)),
    ]);
    match gcrt_solve(&sys) {
        GcrtOutcome::Solution { base, .. } => base,
        GcrtOutcome::Conflict { .. } => {
            unreachable!("lift coefficients are lcm-divisible")
        }
    }
}

/// Computes the canonical coefficient tuple representing a congruence
/// preserving `f : Z/nZ -> Z/mZ` with `m | n` and `m >= 2`.
///
/// The coefficients are the Newton (forward difference) coefficients of the
/// CRT lift prefix of `f` at arguments `0..nu(m)-1`, reduced to canonical
/// form. Non-CP inputs are rejected with a witness rather than fitted; the
/// representation only exists for congruence preserving functions.
pub fn represent_cp(f: &FiniteFn) -> Result<CpCoeffs, FiniteCpError> {
    if f.m < 2 {
        return Err(FiniteCpError::TargetTooSmall { m: f.m });
    }
    if !f.n.is_multiple_of(f.m) {
        return Err(FiniteCpError::TargetNotDivisor { n: f.n, m: f.m });
    }
    let nu = nu_of_modulus(f.m);
    let report = lifting::lift_prefix(f, nu - 1).map_err(|e| match e {
        lifting::LiftError::NotCongruencePreserving { x, y } => {
            FiniteCpError::NotCongruencePreserving { x, y }
        }
        other => unreachable!("lift rejects only non-CP tables: {other}"),
    })?;
    let prefix = match report.outcome {
        lifting::LiftOutcome::Success(prefix) => prefix,
        lifting::LiftOutcome::Infeasible { .. } => {
            unreachable!("the lift cannot fail when m divides n")
        }
    };
    let raw = crate::newton::newton_coeffs(&prefix);
    let coeffs = raw
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, a)| canonical_coeff(k as u64, a, f.m))
        .collect();
    CpCoeffs::new(f.n, f.m, coeffs)
}

/// Evaluates a coefficient tuple at one point:
/// `sum_k pi_m(a_k) * P_k^{n,m}(x)`, reduced modulo `m`.
///
/// `x` must be a residue modulo the tuple's source modulus.
pub fn eval_repr(c: &CpCoeffs, x: &Residue) -> Residue {
    assert_eq!(
        x.modulus(),
        &BigInt::from(c.n),
        "argument must live in the representation's source ring"
    );
    let mut acc = proj(0, c.m);
    for (k, a) in c.coeffs.iter().enumerate() {
        let term = &proj(a.clone(), c.m) * &binom_poly_mod(k as u64, x, c.m);
        acc = &acc + &term;
    }
    acc
}

/// Iterator over every canonical coefficient tuple for moduli `(n, m)`:
/// for each `k < nu(m)` the admissible values of `pi_m(a_k)` form the
/// subgroup generated by `gcd(lcm(k), m)`, so the tuple count is
/// `prod_k m / gcd(lcm(k), m)`.
///
/// The represented functions are exactly the congruence preserving ones,
/// which makes this the enumerator of choice where `m^n` defeats
/// [`enumerate_cp`]'s guard.
pub fn enumerate_cp_coeffs(n: u64, m: u64) -> Result<CoeffEnumeration, FiniteCpError> {
    if m < 2 {
        return Err(FiniteCpError::TargetTooSmall { m });
    }
    if !n.is_multiple_of(m) {
        return Err(FiniteCpError::TargetNotDivisor { n, m });
    }
    let nu = nu_of_modulus(m);
    let mut axes = Vec::with_capacity(nu as usize);
    for k in 0..nu {
        let lcm_k = lcm_upto(k);
        let g = u64::try_from(lcm_k.gcd(&BigInt::from(m))).expect("gcd fits u64");
        let size = m / g;
        // Canonical representative for the image j*g: the least nonnegative
        // multiple of lcm(k) congruent to it modulo m.
        let values: Vec<BigInt> = (0..size)
            .map(|j| canonical_coeff(k, &BigInt::from(j * g), m))
            .collect();
        axes.push(values);
    }
    Ok(CoeffEnumeration {
        n,
        m,
        axes,
        digits: Some(vec![0; nu as usize]),
    })
}

pub struct CoeffEnumeration {
    n: u64,
    m: u64,
    axes: Vec<Vec<BigInt>>,
    digits: Option<Vec<usize>>,
}

impl CoeffEnumeration {
    /// Total number of canonical tuples, `prod_k m / gcd(lcm(k), m)`.
    pub fn tuple_count(&self) -> u64 {
        self.axes.iter().map(|a| a.len() as u64).product()
    }
}

impl Iterator for CoeffEnumeration {
    type Item = CpCoeffs;

    fn next(&mut self) -> Option<CpCoeffs> {
        let digits = self.digits.as_ref()?;
        let coeffs: Vec<BigInt> = digits
            .iter()
            .zip(&self.axes)
            .map(|(&d, axis)| axis[d].clone())
            .collect();
        let cur = self.digits.as_mut().expect("present");
        let mut pos = cur.len();
        loop {
            if pos == 0 {
                self.digits = None;
                break;
            }
            pos -= 1;
            cur[pos] += 1;
            if cur[pos] < self.axes[pos].len() {
                break;
            }
            cur[pos] = 0;
        }
        Some(CpCoeffs {
            n: self.n,
            m: self.m,
            coeffs,
        })
    }
}
