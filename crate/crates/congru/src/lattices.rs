//! Eventually periodic subsets of `Z` and lattice-closure decisions.
//!
//! An [`EPSet`] is the single normal form used for every set in scope:
//! finite sets, arithmetic progressions `F + dZ` (recognizable sets),
//! one-sided unions `-(d+S+dN) u F u (d+R+dN)` (rational sets), and
//! everything the Boolean operations generate from them. Membership is
//! governed by a residue law `pos_res` for `x > B`, a law `neg_res` for
//! `x < -B`, and an explicit window of bits on `[-B, B]`. Normal form
//! means the period is the minimal divisor consistent with both laws and
//! the bound is shrunk greedily, so set equality is plain structural
//! equality.
//!
//! On top of the set algebra live the congruence preserving polynomials
//! (Newton coefficients with the `lcm` divisibility gate, extended to
//! negative arguments by the same product formula), their exact preimages,
//! and the decision procedure for membership of a set in the smallest
//! lattice containing a recognizable generator and closed under decrement,
//! which returns an explicit union-of-intersections certificate.

use crate::ringcore::{binom_poly_eval, lcm_upto};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Period guard for the lattice-closure decision: the closure family can
/// reach `2^d` sets, so desk-scale periods only.
pub const MAX_LATTICE_PERIOD: u64 = 12;

/// Window guard: bounds produced by translates and preimage thresholds
/// must stay desk-scale.
pub const MAX_BOUND: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LatticeError {
    /// A residue was outside `[0, d)` (or a window element outside the
    /// declared range).
    BadResidue { value: i64, d: u64 },
    /// Period must be at least 1.
    BadPeriod,
    /// Polynomial coefficient `a_k` must be divisible by `lcm(k)`.
    CoeffNotDivisible { k: u64 },
    /// The coefficients passed the divisibility gate but failed the
    /// congruence preservation re-check on the verification window.
    NotCpOnWindow { x: i64, y: i64 },
    /// Preimage of a constant polynomial is trivially all or nothing and
    /// is not handled by the eventual-regime pipeline.
    ConstantPolynomial,
    /// The operation requires a recognizable generator `F + dZ`.
    NotRecognizable,
    /// The nonmembership certifier requires a generator with finitely
    /// many negative elements.
    NegativeTailNotEmpty,
    /// The polynomial is not nondecreasing on the checked window.
    MonotonicityFailure { x: i64 },
    /// Lattice period exceeds [`MAX_LATTICE_PERIOD`].
    PeriodTooLarge { d: u64 },
    /// A computed bound exceeded [`MAX_BOUND`].
    BoundTooLarge,
    /// Text input did not parse as a set.
    Parse(String),
}

impl fmt::Display for LatticeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeError::BadResidue { value, d } => {
                write!(f, "residue {value} out of range for period {d}")
            }
            LatticeError::BadPeriod => write!(f, "period must be >= 1"),
            LatticeError::CoeffNotDivisible { k } => {
                write!(f, "coefficient a_{k} is not divisible by lcm({k})")
            }
            LatticeError::NotCpOnWindow { x, y } => {
                write!(f, "polynomial failed the congruence check at ({x}, {y})")
            }
            LatticeError::ConstantPolynomial => {
                write!(f, "constant polynomials are rejected; their preimage is all or nothing")
            }
            LatticeError::NotRecognizable => {
                write!(f, "operation requires a recognizable set F + dZ")
            }
            LatticeError::NegativeTailNotEmpty => {
                write!(f, "certifier requires a generator with finitely many negatives")
            }
            LatticeError::MonotonicityFailure { x } => {
                write!(f, "polynomial is not nondecreasing on the window (fails at x={x})")
            }
            LatticeError::PeriodTooLarge { d } => {
                write!(f, "lattice closure for period {d} exceeds the guard")
            }
            LatticeError::BoundTooLarge => write!(f, "computed bound exceeds the guard"),
            LatticeError::Parse(why) => write!(f, "parse error: {why}"),
        }
    }
}

impl std::error::Error for LatticeError {}

/// An eventually periodic subset of `Z`, always held in normal form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EPSet {
    d: u64,
    b: u64,
    pos_res: BTreeSet<u64>,
    neg_res: BTreeSet<u64>,
    window: Vec<bool>,
}

impl EPSet {
    fn make(
        d: u64,
        b: u64,
        pos_res: BTreeSet<u64>,
        neg_res: BTreeSet<u64>,
        window: Vec<bool>,
    ) -> EPSet {
        debug_assert!(d >= 1);
        debug_assert_eq!(window.len() as u64, 2 * b + 1);
        let mut set = EPSet {
            d,
            b,
            pos_res,
            neg_res,
            window,
        };
        set.normalize();
        set
    }

    /// The empty set.
    pub fn empty() -> EPSet {
        EPSet::make(1, 0, BTreeSet::new(), BTreeSet::new(), vec![false])
    }

    /// All of `Z`.
    pub fn integers() -> EPSet {
        let full: BTreeSet<u64> = [0].into_iter().collect();
        EPSet::make(1, 0, full.clone(), full, vec![true])
    }

    /// The recognizable set `F + dZ`.
    pub fn recognizable(
        d: u64,
        residues: impl IntoIterator<Item = u64>,
    ) -> Result<EPSet, LatticeError> {
        if d < 1 {
            return Err(LatticeError::BadPeriod);
        }
        let f: BTreeSet<u64> = residues.into_iter().collect();
        if let Some(&bad) = f.iter().find(|&&r| r >= d) {
            return Err(LatticeError::BadResidue {
                value: bad as i64,
                d,
            });
        }
        let window = vec![f.contains(&0)];
        Ok(EPSet::make(d, 0, f.clone(), f, window))
    }

    /// The rational set `-(d + S + dN) u F u (d + R + dN)` with
    /// `R, S` subsets of `[0, d)` and `F` a subset of `(-d, d)`.
    pub fn rational_from_parts(
        d: u64,
        s: impl IntoIterator<Item = u64>,
        f: impl IntoIterator<Item = i64>,
        r: impl IntoIterator<Item = u64>,
    ) -> Result<EPSet, LatticeError> {
        if d < 1 {
            return Err(LatticeError::BadPeriod);
        }
        let s: BTreeSet<u64> = s.into_iter().collect();
        let r: BTreeSet<u64> = r.into_iter().collect();
        for &x in s.iter().chain(r.iter()) {
            if x >= d {
                return Err(LatticeError::BadResidue { value: x as i64, d });
            }
        }
        let f: BTreeSet<i64> = f.into_iter().collect();
        for &x in &f {
            if x.unsigned_abs() >= d {
                return Err(LatticeError::BadResidue { value: x, d });
            }
        }
        let b = d;
        let di = d as i64;
        let window = (-di..=di)
            .map(|x| {
                // x = d is in the positive branch iff 0 is in R; x = -d
                // mirrors with S; strictly inside, only F contributes.
                if x == di {
                    r.contains(&0)
                } else if x == -di {
                    s.contains(&0)
                } else {
                    f.contains(&x)
                }
            })
            .collect();
        Ok(EPSet::make(d, b, r, s.iter().map(|&x| (d - x) % d).collect(), window))
    }

    pub fn period(&self) -> u64 {
        self.d
    }

    pub fn bound(&self) -> u64 {
        self.b
    }

    pub fn positive_law(&self) -> &BTreeSet<u64> {
        &self.pos_res
    }

    pub fn negative_law(&self) -> &BTreeSet<u64> {
        &self.neg_res
    }

    /// Recognizable sets are exactly `F + dZ`: bound zero, both laws
    /// equal, and the origin bit consistent with the law.
    pub fn is_recognizable(&self) -> bool {
        self.b == 0 && self.pos_res == self.neg_res && self.window[0] == self.pos_res.contains(&0)
    }

    pub fn is_empty_set(&self) -> bool {
        self.pos_res.is_empty() && self.neg_res.is_empty() && self.window.iter().all(|&w| !w)
    }

    /// Whether the set has infinitely many negative elements.
    pub fn has_infinite_negatives(&self) -> bool {
        !self.neg_res.is_empty()
    }

    pub fn contains_i64(&self, x: i64) -> bool {
        let b = self.b as i64;
        if x > b {
            self.pos_res.contains(&residue_i64(x, self.d))
        } else if x < -b {
            self.neg_res.contains(&residue_i64(x, self.d))
        } else {
            self.window[(x + b) as usize]
        }
    }

    pub fn contains(&self, x: &BigInt) -> bool {
        let b = BigInt::from(self.b);
        if x > &b {
            self.pos_res.contains(&residue_big(x, self.d))
        } else if *x < -&b {
            self.neg_res.contains(&residue_big(x, self.d))
        } else {
            let idx = usize::try_from(x + &b).expect("window index fits");
            self.window[idx]
        }
    }

    /// `L - t = { x - t : x in L }`.
    pub fn translate(&self, t: i64) -> EPSet {
        let d = self.d;
        let shift = residue_i64(t, d);
        let pos = self.pos_res.iter().map(|&r| (r + d - shift) % d).collect();
        let neg = self.neg_res.iter().map(|&r| (r + d - shift) % d).collect();
        let b = self.b + t.unsigned_abs();
        assert!(b <= MAX_BOUND, "translate bound exceeds guard");
        let bi = b as i64;
        let window = (-bi..=bi).map(|y| self.contains_i64(y + t)).collect();
        EPSet::make(d, b, pos, neg, window)
    }

    pub fn union(&self, other: &EPSet) -> EPSet {
        self.combine(other, |a, b| a || b)
    }

    pub fn intersect(&self, other: &EPSet) -> EPSet {
        self.combine(other, |a, b| a && b)
    }

    pub fn complement(&self) -> EPSet {
        let pos = (0..self.d).filter(|r| !self.pos_res.contains(r)).collect();
        let neg = (0..self.d).filter(|r| !self.neg_res.contains(r)).collect();
        let window = self.window.iter().map(|&w| !w).collect();
        EPSet::make(self.d, self.b, pos, neg, window)
    }

    fn combine(&self, other: &EPSet, op: impl Fn(bool, bool) -> bool) -> EPSet {
        let d = self.d.lcm(&other.d);
        let b = self.b.max(other.b);
        let pos = (0..d)
            .filter(|&r| {
                op(
                    self.pos_res.contains(&(r % self.d)),
                    other.pos_res.contains(&(r % other.d)),
                )
            })
            .collect();
        let neg = (0..d)
            .filter(|&r| {
                op(
                    self.neg_res.contains(&(r % self.d)),
                    other.neg_res.contains(&(r % other.d)),
                )
            })
            .collect();
        let bi = b as i64;
        let window = (-bi..=bi)
            .map(|x| op(self.contains_i64(x), other.contains_i64(x)))
            .collect();
        EPSet::make(d, b, pos, neg, window)
    }

    /// Minimal period dividing the current one, then greedy bound shrink.
    fn normalize(&mut self) {
        for dd in 1..=self.d {
            if !self.d.is_multiple_of(dd) {
                continue;
            }
            let pos_ok = (0..self.d).all(|r| {
                self.pos_res.contains(&r) == self.pos_res.contains(&(r % dd))
            });
            let neg_ok = (0..self.d).all(|r| {
                self.neg_res.contains(&r) == self.neg_res.contains(&(r % dd))
            });
            if pos_ok && neg_ok {
                self.pos_res = self.pos_res.iter().map(|&r| r % dd).collect();
                self.neg_res = self.neg_res.iter().map(|&r| r % dd).collect();
                self.d = dd;
                break;
            }
        }
        while self.b > 0 {
            let b = self.b as i64;
            let pos_law = self.pos_res.contains(&residue_i64(b, self.d));
            let neg_law = self.neg_res.contains(&residue_i64(-b, self.d));
            let hi = self.window[(2 * self.b) as usize];
            let lo = self.window[0];
            if hi != pos_law || lo != neg_law {
                break;
            }
            self.window.pop();
            self.window.remove(0);
            self.b -= 1;
        }
    }

    /// Text format: header `d B`, the two residue-law lines, then the
    /// `2B+1` window bits for `x = -B..B` as one 0/1 string.
    pub fn to_text(&self) -> String {
        let join = |set: &BTreeSet<u64>| {
            set.iter()
                .map(|r| r.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        let bits: String = self
            .window
            .iter()
            .map(|&w| if w { '1' } else { '0' })
            .collect();
        format!(
            "{} {}\n{}\n{}\n{}\n",
            self.d,
            self.b,
            join(&self.pos_res),
            join(&self.neg_res),
            bits
        )
    }

    pub fn parse(text: &str) -> Result<EPSet, LatticeError> {
        let lines: Vec<&str> = text.lines().collect();
        if lines.len() < 4 {
            return Err(LatticeError::Parse("expected 4 lines".into()));
        }
        let mut header = lines[0].split_whitespace();
        let d: u64 = header
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| LatticeError::Parse("bad period".into()))?;
        let b: u64 = header
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| LatticeError::Parse("bad bound".into()))?;
        if d < 1 {
            return Err(LatticeError::BadPeriod);
        }
        if b > MAX_BOUND {
            return Err(LatticeError::BoundTooLarge);
        }
        let parse_set = |line: &str| -> Result<BTreeSet<u64>, LatticeError> {
            line.split_whitespace()
                .map(|s| {
                    s.parse::<u64>()
                        .map_err(|_| LatticeError::Parse("bad residue".into()))
                        .and_then(|r| {
                            if r < d {
                                Ok(r)
                            } else {
                                Err(LatticeError::BadResidue { value: r as i64, d })
                            }
                        })
                })
                .collect()
        };
        let pos = parse_set(lines[1])?;
        let neg = parse_set(lines[2])?;
        let bits = lines[3].trim();
        if bits.len() as u64 != 2 * b + 1 {
            return Err(LatticeError::Parse(format!(
                "expected {} window bits, got {}",
                2 * b + 1,
                bits.len()
            )));
        }
        let window: Result<Vec<bool>, LatticeError> = bits
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(LatticeError::Parse("window bits must be 0 or 1".into())),
            })
            .collect();
        Ok(EPSet::make(d, b, pos, neg, window?))
    }
}

fn residue_i64(x: i64, d: u64) -> u64 {
    x.rem_euclid(d as i64) as u64
}

fn residue_big(x: &BigInt, d: u64) -> u64 {
    u64::try_from(x.mod_floor(&BigInt::from(d))).expect("residue fits u64")
}

/// A congruence preserving polynomial over `Z`, stored by its Newton
/// coefficients `a_0..a_K` with `lcm(k) | a_k`, evaluated as
/// `sum_k a_k P_k(x)` with the binomial product formula extended to
/// negative arguments.
///
/// The divisibility gate guarantees congruence preservation on `N`; the
/// constructor re-verifies preservation pairwise on a window around the
/// origin instead of assuming the extension to `Z`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CpPolynomial {
    coeffs: Vec<BigInt>,
}

const CP_RECHECK_RADIUS: i64 = 16;

impl CpPolynomial {
    pub fn new(coeffs: Vec<BigInt>) -> Result<CpPolynomial, LatticeError> {
        let mut coeffs = coeffs;
        while coeffs.len() > 1 && coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(BigInt::zero());
        }
        for (k, a) in coeffs.iter().enumerate() {
            if !a.mod_floor(&lcm_upto(k as u64)).is_zero() {
                return Err(LatticeError::CoeffNotDivisible { k: k as u64 });
            }
        }
        let poly = CpPolynomial { coeffs };
        for x in -CP_RECHECK_RADIUS..=CP_RECHECK_RADIUS {
            for y in -CP_RECHECK_RADIUS..x {
                let diff = BigInt::from(x - y);
                if !(poly.eval_i64(x) - poly.eval_i64(y)).mod_floor(&diff).is_zero() {
                    return Err(LatticeError::NotCpOnWindow { x, y });
                }
            }
        }
        Ok(poly)
    }

    pub fn from_i64(coeffs: &[i64]) -> Result<CpPolynomial, LatticeError> {
        CpPolynomial::new(coeffs.iter().map(|&v| BigInt::from(v)).collect())
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() == 1
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        eval_newton_at(&self.coeffs, x)
    }

    pub fn eval_i64(&self, x: i64) -> BigInt {
        self.eval(&BigInt::from(x))
    }

    /// `f(r) mod d`; congruence preservation makes this depend on `r`
    /// only through `r mod d`.
    fn residue_image(&self, r: u64, d: u64) -> u64 {
        residue_big(&self.eval(&BigInt::from(r)), d)
    }
}

fn eval_newton_at(coeffs: &[BigInt], x: &BigInt) -> BigInt {
    let mut acc = BigInt::zero();
    for (k, a) in coeffs.iter().enumerate() {
        if !a.is_zero() {
            acc += a * binom_poly_eval(k as u64, x);
        }
    }
    acc
}

/// Residues `r` with `f(r) mod d` landing in `law`.
fn preimage_residues(f: &CpPolynomial, d: u64, law: &BTreeSet<u64>) -> BTreeSet<u64> {
    (0..d).filter(|&r| law.contains(&f.residue_image(r, d))).collect()
}

/// Exact preimage of a recognizable set under a congruence preserving
/// polynomial: congruence preservation gives `f(x+d) = f(x) (mod d)`, so
/// the preimage is the pure residue set
/// `{ r in [0,d) : f(r) mod d in F } + dZ`. Constant polynomials are the
/// trivial cases `Z` or the empty set.
pub fn preimage_recognizable(f: &CpPolynomial, l: &EPSet) -> Result<EPSet, LatticeError> {
    if !l.is_recognizable() {
        return Err(LatticeError::NotRecognizable);
    }
    if f.is_constant() {
        return Ok(if l.contains(&f.coeffs[0]) {
            EPSet::integers()
        } else {
            EPSet::empty()
        });
    }
    EPSet::recognizable(l.d, preimage_residues(f, l.d, &l.pos_res))
}

/// Exact preimage of an arbitrary eventually periodic set under a
/// nonconstant congruence preserving polynomial.
///
/// Beyond a computed threshold the polynomial is certified to stay on one
/// side of the generator's window with stable sign, so membership of
/// `f(x)` follows one residue law; inside the threshold the preimage
/// window is evaluated directly.
pub fn preimage_eventual(f: &CpPolynomial, l: &EPSet) -> Result<EPSet, LatticeError> {
    if f.is_constant() {
        return Err(LatticeError::ConstantPolynomial);
    }
    let d = l.d;
    // Regime of f at +infinity, and the threshold certifying it.
    let (pos_up, t_plus) = regime_threshold(&f.coeffs, l.b)?;
    // Mirror polynomial g(u) = f(-u) via sampled forward differences.
    let mirrored = mirror_coeffs(&f.coeffs);
    let (neg_up, t_minus) = regime_threshold(&mirrored, l.b)?;
    let b = t_plus.max(t_minus).max(l.b);
    if b > MAX_BOUND {
        return Err(LatticeError::BoundTooLarge);
    }
    let pos_law = if pos_up { &l.pos_res } else { &l.neg_res };
    let neg_law = if neg_up { &l.pos_res } else { &l.neg_res };
    let pos = preimage_residues(f, d, pos_law);
    let neg = preimage_residues(f, d, neg_law);
    let bi = b as i64;
    let window = (-bi..=bi)
        .map(|x| l.contains(&f.eval_i64(x)))
        .collect();
    Ok(EPSet::make(d, b, pos, neg, window))
}

/// Newton coefficients of `x -> f(-x)`, recovered by forward differences
/// of the sampled values `f(0), f(-1), ..., f(-K)`.
fn mirror_coeffs(coeffs: &[BigInt]) -> Vec<BigInt> {
    let samples: Vec<BigInt> = (0..coeffs.len())
        .map(|j| eval_newton_at(coeffs, &BigInt::from(-(j as i64))))
        .collect();
    let mut row = samples;
    let mut out = Vec::with_capacity(row.len());
    while !row.is_empty() {
        out.push(row[0].clone());
        row = row.windows(2).map(|w| &w[1] - &w[0]).collect();
    }
    out
}

/// Determines whether `f` tends to `+infinity` (true) or `-infinity`
/// (false) as its natural argument grows, with a certified threshold `T`
/// such that `|f(x)| > bound` with that sign for all `x >= T`.
fn regime_threshold(coeffs: &[BigInt], bound: u64) -> Result<(bool, u64), LatticeError> {
    let mut trimmed = coeffs.to_vec();
    while trimmed.len() > 1 && trimmed.last().is_some_and(Zero::is_zero) {
        trimmed.pop();
    }
    let upward = trimmed.last().expect("nonempty").is_positive();
    let shifted: Vec<BigInt> = if upward {
        // f(x) > bound  <=>  (f - bound)(x) > 0
        let mut c = trimmed;
        c[0] -= BigInt::from(bound);
        c
    } else {
        let mut c: Vec<BigInt> = trimmed.iter().map(|a| -a).collect();
        c[0] -= BigInt::from(bound);
        c
    };
    let t = threshold_positive(&shifted)?;
    Ok((upward, t))
}

/// Least certified `T` with `g(x) > 0` for every natural `x >= T`, for a
/// polynomial in Newton form with positive leading coefficient: the
/// forward difference drops the first coefficient, so certify the
/// difference positive, then scan the now-increasing values.
fn threshold_positive(coeffs: &[BigInt]) -> Result<u64, LatticeError> {
    let mut trimmed = coeffs.to_vec();
    while trimmed.len() > 1 && trimmed.last().is_some_and(Zero::is_zero) {
        trimmed.pop();
    }
    if trimmed.len() == 1 {
        return if trimmed[0].is_positive() {
            Ok(0)
        } else {
            // A nonpositive constant can never clear the bound.
            Err(LatticeError::BoundTooLarge)
        };
    }
    let start = threshold_positive(&trimmed[1..])?;
    let mut x = start;
    loop {
        if eval_newton_at(&trimmed, &BigInt::from(x)).is_positive() {
            return Ok(x);
        }
        x += 1;
        if x - start > MAX_BOUND {
            return Err(LatticeError::BoundTooLarge);
        }
    }
}

/// Evaluates the lattice expression
/// `U_{a in preimage} I_{t in L - a} (L - t)` for a recognizable
/// generator, where both the union and the intersection collapse to at
/// most `d` distinct terms.
///
/// The polynomial must be nondecreasing on the evaluation window (checked;
/// the identity's hypotheses ask for nondecreasing congruence preserving
/// functions); the result always equals the direct residue preimage,
/// which the callers assert.
pub fn preimage_via_translates(f: &CpPolynomial, l: &EPSet) -> Result<EPSet, LatticeError> {
    if !l.is_recognizable() {
        return Err(LatticeError::NotRecognizable);
    }
    let d = l.d;
    let w = (l.b + 2 * d + 8) as i64;
    for x in -w..w {
        if f.eval_i64(x + 1) < f.eval_i64(x) {
            return Err(LatticeError::MonotonicityFailure { x });
        }
    }
    if l.pos_res.is_empty() {
        return Ok(EPSet::empty());
    }
    let preimage = preimage_residues(f, d, &l.pos_res);
    let mut union = EPSet::empty();
    for &rho in &preimage {
        // t ranges over L - rho, which meets every residue F - rho mod d.
        let mut inter = EPSet::integers();
        for &fr in &l.pos_res {
            let c = (fr + d - rho % d) % d;
            inter = inter.intersect(&l.translate(c as i64));
        }
        union = union.union(&inter);
    }
    Ok(union)
}

/// A union-of-intersections expression over translates of the generator,
/// witnessing membership in the lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    /// Each term is the set of decrements whose translates are
    /// intersected; terms are united.
    pub terms: Vec<BTreeSet<u64>>,
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let term_strings: Vec<String> = self
            .terms
            .iter()
            .map(|term| {
                let factors: Vec<String> =
                    term.iter().map(|c| format!("(L-{c})")).collect();
                if factors.len() == 1 {
                    factors[0].clone()
                } else {
                    format!("({})", factors.join(" n "))
                }
            })
            .collect();
        write!(f, "{}", term_strings.join(" u "))
    }
}

/// Outcome of the lattice membership decision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MembershipOutcome {
    Member { certificate: Certificate },
    NotMember { reason: String },
}

impl MembershipOutcome {
    pub fn is_member(&self) -> bool {
        matches!(self, MembershipOutcome::Member { .. })
    }
}

/// The lattice generated by a recognizable set under decrement, closed
/// out to its full (finite) family of residue sets.
///
/// The generator's translates collapse to at most `d` residue sets mod
/// `d`; closing them under intersection and then under union yields every
/// lattice element exactly once, as a bitmask over `[0, d)`, each with a
/// first-found union-of-intersections derivation. Building the closure
/// once and querying many candidates is the intended use; the family can
/// reach `2^d` sets, hence the period guard.
pub struct LatticeClosure {
    d: u64,
    unions: BTreeMap<u64, Certificate>,
}

impl LatticeClosure {
    pub fn new(l: &EPSet) -> Result<LatticeClosure, LatticeError> {
        if !l.is_recognizable() {
            return Err(LatticeError::NotRecognizable);
        }
        let d = l.d;
        if d > MAX_LATTICE_PERIOD {
            return Err(LatticeError::PeriodTooLarge { d });
        }
        // Phase 1: translates, then the worklist pairwise intersections.
        // Every unordered pair gets combined exactly once: when an element
        // enters the list it is later paired with everything before it.
        let mut masks: Vec<u64> = Vec::new();
        let mut certs: Vec<BTreeSet<u64>> = Vec::new();
        let mut seen: BTreeSet<u64> = BTreeSet::new();
        for c in 0..d {
            let mask = (0..d)
                .filter(|&r| l.pos_res.contains(&((r + c) % d)))
                .fold(0u64, |acc, r| acc | (1 << r));
            if seen.insert(mask) {
                masks.push(mask);
                certs.push([c].into_iter().collect());
            }
        }
        let mut i = 0;
        while i < masks.len() {
            for j in 0..i {
                let m = masks[i] & masks[j];
                if seen.insert(m) {
                    let cert = certs[i].union(&certs[j]).copied().collect();
                    masks.push(m);
                    certs.push(cert);
                }
            }
            i += 1;
        }
        // Phase 2: worklist pairwise unions of the intersections.
        let mut u_masks: Vec<u64> = Vec::new();
        let mut u_certs: Vec<Vec<usize>> = Vec::new();
        let mut u_seen: BTreeSet<u64> = BTreeSet::new();
        for (idx, &m) in masks.iter().enumerate() {
            if u_seen.insert(m) {
                u_masks.push(m);
                u_certs.push(vec![idx]);
            }
        }
        let mut i = 0;
        while i < u_masks.len() {
            for j in 0..i {
                let m = u_masks[i] | u_masks[j];
                if u_seen.insert(m) {
                    let mut cert = u_certs[i].clone();
                    for t in &u_certs[j] {
                        if !cert.contains(t) {
                            cert.push(*t);
                        }
                    }
                    u_masks.push(m);
                    u_certs.push(cert);
                }
            }
            i += 1;
        }
        let unions = u_masks
            .iter()
            .zip(&u_certs)
            .map(|(&m, idxs)| {
                let mut terms: Vec<BTreeSet<u64>> =
                    idxs.iter().map(|&idx| certs[idx].clone()).collect();
                terms.sort();
                (m, Certificate { terms })
            })
            .collect();
        Ok(LatticeClosure { d, unions })
    }

    /// Number of distinct lattice elements.
    pub fn size(&self) -> usize {
        self.unions.len()
    }

    /// Membership of a candidate set, with certificate or reason.
    pub fn decide(&self, x: &EPSet) -> MembershipOutcome {
        let d = self.d;
        if !x.is_recognizable() {
            return MembershipOutcome::NotMember {
                reason: "candidate is not purely periodic: every lattice element is a \
                         union of intersections of translates of the generator, hence \
                         recognizable"
                    .into(),
            };
        }
        if !d.is_multiple_of(x.d) {
            return MembershipOutcome::NotMember {
                reason: format!(
                    "candidate period {} does not divide the generator period {d}",
                    x.d
                ),
            };
        }
        let target = (0..d)
            .filter(|&r| x.pos_res.contains(&(r % x.d)))
            .fold(0u64, |acc, r| acc | (1 << r));
        match self.unions.get(&target) {
            Some(certificate) => MembershipOutcome::Member {
                certificate: certificate.clone(),
            },
            None => MembershipOutcome::NotMember {
                reason: "residue set is not generated by unions of intersections of \
                         the translates"
                    .into(),
            },
        }
    }
}

/// Decides whether `x` belongs to the smallest lattice containing the
/// recognizable generator `l` and closed under decrement. One-shot form
/// of [`LatticeClosure`].
pub fn lattice_membership(l: &EPSet, x: &EPSet) -> Result<MembershipOutcome, LatticeError> {
    Ok(LatticeClosure::new(l)?.decide(x))
}

/// Certificate that a set with infinitely many negatives cannot lie in
/// the lattice of a generator with finitely many negatives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NegativesCertificate {
    /// A residue class mod the candidate's period consisting of
    /// infinitely many negative members.
    pub witness_residue: u64,
    pub candidate_period: u64,
}

impl fmt::Display for NegativesCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "candidate contains the residue class {} (mod {}) below its bound, hence \
             infinitely many negatives; every translate of the generator has finitely \
             many negatives, so any finite union of finite intersections of translates \
             does too; the candidate is not in the lattice",
            self.witness_residue, self.candidate_period
        )
    }
}

/// For a generator with finitely many negative elements, certifies that
/// `x` is outside its lattice whenever `x` has infinitely many negatives;
/// returns `None` (inconclusive) otherwise.
pub fn certify_nonmembership_negatives(
    l: &EPSet,
    x: &EPSet,
) -> Result<Option<NegativesCertificate>, LatticeError> {
    if l.has_infinite_negatives() {
        return Err(LatticeError::NegativeTailNotEmpty);
    }
    Ok(x.neg_res.iter().next().map(|&r| NegativesCertificate {
        witness_residue: r,
        candidate_period: x.d,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(d: u64, rs: &[u64]) -> EPSet {
        EPSet::recognizable(d, rs.iter().copied()).unwrap()
    }

    /// Bit-vector oracle over [-100, 100].
    fn window_bits(s: &EPSet) -> Vec<bool> {
        (-100..=100).map(|x| s.contains_i64(x)).collect()
    }

    #[test]
    fn recognizable_examples() {
        let l = rec(10, &[6]);
        assert!(l.contains_i64(6));
        assert!(l.contains_i64(-4));
        assert!(l.contains_i64(16));
        assert!(!l.contains_i64(4));
        assert_eq!(EPSet::recognizable(1, [0]).unwrap(), EPSet::integers());
        assert_eq!(EPSet::recognizable(1, []).unwrap(), EPSet::empty());
    }

    #[test]
    fn rational_parts_example() {
        // d=10, S=0, F=0, R={6}: the set {16, 26, 36, ...}.
        let l = EPSet::rational_from_parts(10, [], [], [6]).unwrap();
        for x in -30..=30 {
            let expect = x >= 16 && (x - 16) % 10 == 0;
            assert_eq!(l.contains_i64(x), expect, "x={x}");
        }
        assert_eq!(l.period(), 10);
        assert_eq!(l.bound(), 6);
    }

    #[test]
    fn rational_parts_trivial() {
        assert_eq!(
            EPSet::rational_from_parts(5, [], [], []).unwrap(),
            EPSet::empty()
        );
        let all = EPSet::rational_from_parts(
            3,
            0..3,
            -2..3,
            0..3,
        )
        .unwrap();
        assert_eq!(all, EPSet::integers());
    }

    #[test]
    fn rational_parts_negative_branch() {
        // -(d + S + dN) with S = {4}, d = 10: {-14, -24, -34, ...}.
        let l = EPSet::rational_from_parts(10, [4], [], []).unwrap();
        for x in -40..=40 {
            let expect = x <= -14 && (-x - 14) % 10 == 0;
            assert_eq!(l.contains_i64(x), expect, "x={x}");
        }
    }

    #[test]
    fn one_sided_generator_normalizes_to_bound_zero() {
        // 6 + 10N = {6, 16, 26, ...}: window bit at 6 agrees with the law,
        // so the bound shrinks to zero with asymmetric laws.
        let l = EPSet::rational_from_parts(10, [], [6], [6]).unwrap();
        assert_eq!(l.bound(), 0);
        assert_eq!(l.positive_law().iter().copied().collect::<Vec<_>>(), [6]);
        assert!(l.negative_law().is_empty());
        assert!(!l.is_recognizable());
        assert!(l.contains_i64(6));
        assert!(!l.contains_i64(-4));
    }

    #[test]
    fn translate_examples() {
        assert_eq!(rec(10, &[6]).translate(2), rec(10, &[4]));
        let l = rec(7, &[1, 3]);
        assert_eq!(l.translate(0), l);
        // Translate of the one-sided set shifts its start.
        let one_sided = EPSet::rational_from_parts(10, [], [6], [6]).unwrap();
        let shifted = one_sided.translate(11);
        for x in -40..=40 {
            assert_eq!(shifted.contains_i64(x), one_sided.contains_i64(x + 11));
        }
    }

    #[test]
    fn translate_composes() {
        let sets = [
            rec(6, &[1, 4]),
            EPSet::rational_from_parts(4, [2], [-1, 3], [0]).unwrap(),
        ];
        for s in &sets {
            for a in [-5i64, -1, 0, 3, 7] {
                for b in [-4i64, 2, 9] {
                    assert_eq!(s.translate(a).translate(b), s.translate(a + b));
                }
            }
        }
    }

    #[test]
    fn boolean_ops_match_bitvec_oracle() {
        let a = rec(10, &[4]);
        let b = rec(10, &[6]);
        assert_eq!(a.union(&b), rec(10, &[4, 6]));
        assert_eq!(a.union(&EPSet::empty()), a);
        assert_eq!(a.intersect(&EPSet::integers()), a);
        let c = EPSet::rational_from_parts(10, [4], [0], [6]).unwrap();
        let union = a.union(&c);
        let inter = a.intersect(&c);
        let comp = c.complement();
        for x in -100..=100i64 {
            assert_eq!(union.contains_i64(x), a.contains_i64(x) || c.contains_i64(x));
            assert_eq!(inter.contains_i64(x), a.contains_i64(x) && c.contains_i64(x));
            assert_eq!(comp.contains_i64(x), !c.contains_i64(x));
        }
        // De Morgan on the oracle window.
        assert_eq!(
            window_bits(&union.complement()),
            window_bits(&a.complement().intersect(&c.complement()))
        );
        // Absorption.
        assert_eq!(a.union(&a.intersect(&c)), a);
        assert_eq!(a.intersect(&a.union(&c)), a);
    }

    #[test]
    fn one_sided_intersection_is_empty() {
        // (6 + 10N) meets -(14 + 10N) nowhere.
        let pos = EPSet::rational_from_parts(10, [], [6], [6]).unwrap();
        let neg = EPSet::rational_from_parts(10, [4], [], []).unwrap();
        assert!(pos.intersect(&neg).is_empty_set());
    }

    #[test]
    fn normalization_reduces_period_and_bound() {
        let redundant = rec(10, &[1, 3, 5, 7, 9]);
        assert_eq!(redundant.period(), 2);
        assert_eq!(redundant, rec(2, &[1]));
    }

    #[test]
    fn cp_polynomial_gate() {
        assert!(CpPolynomial::from_i64(&[0, 1, 2]).is_ok());
        assert_eq!(
            CpPolynomial::from_i64(&[0, 0, 1]).err(),
            Some(LatticeError::CoeffNotDivisible { k: 2 })
        );
        // Trailing zeros trim away.
        let f = CpPolynomial::from_i64(&[1, 1, 0, 0]).unwrap();
        assert_eq!(f.degree(), 1);
    }

    #[test]
    fn square_polynomial_evaluates() {
        // x^2 = P_1 + 2 P_2 on all of Z.
        let sq = CpPolynomial::from_i64(&[0, 1, 2]).unwrap();
        for x in -10..=10i64 {
            assert_eq!(sq.eval_i64(x), BigInt::from(x * x));
        }
    }

    #[test]
    fn preimage_recognizable_examples() {
        let sq = CpPolynomial::from_i64(&[0, 1, 2]).unwrap();
        let l = rec(10, &[6]);
        assert_eq!(preimage_recognizable(&sq, &l).unwrap(), rec(10, &[4, 6]));
        let ident = CpPolynomial::from_i64(&[0, 1]).unwrap();
        for f_set in [rec(6, &[2, 5]), rec(9, &[0])] {
            assert_eq!(preimage_recognizable(&ident, &f_set).unwrap(), f_set);
        }
        let c5 = CpPolynomial::from_i64(&[5]).unwrap();
        assert_eq!(
            preimage_recognizable(&c5, &rec(10, &[5])).unwrap(),
            EPSet::integers()
        );
        assert_eq!(
            preimage_recognizable(&c5, &rec(10, &[6])).unwrap(),
            EPSet::empty()
        );
    }

    #[test]
    fn preimage_recognizable_matches_brute_force() {
        let polys = [
            CpPolynomial::from_i64(&[1, 3]).unwrap(),
            CpPolynomial::from_i64(&[0, 1, 2]).unwrap(),
            CpPolynomial::from_i64(&[2, 5, 2, 6]).unwrap(),
        ];
        for f in &polys {
            for d in 2..=8u64 {
                let l = rec(d, &[1 % d, (d - 1) % d]);
                let pre = preimage_recognizable(f, &l).unwrap();
                let di = d as i64;
                for x in (-5 * di)..=(5 * di) {
                    assert_eq!(
                        pre.contains_i64(x),
                        l.contains(&f.eval_i64(x)),
                        "x={x} d={d}"
                    );
                }
            }
        }
    }

    #[test]
    fn preimage_eventual_square_example() {
        // f = x^2 against the one-sided 6 + 10N: preimage is the full
        // residue classes {4, 6} mod 10 on both sides.
        let sq = CpPolynomial::from_i64(&[0, 1, 2]).unwrap();
        let l = EPSet::rational_from_parts(10, [], [6], [6]).unwrap();
        let pre = preimage_eventual(&sq, &l).unwrap();
        assert_eq!(pre, rec(10, &[4, 6]));
        // Brute-force verification on a window well past the bound.
        for x in -80..=80i64 {
            assert_eq!(pre.contains_i64(x), l.contains(&sq.eval_i64(x)), "x={x}");
        }
    }

    #[test]
    fn preimage_eventual_identity_and_shift() {
        let ident = CpPolynomial::from_i64(&[0, 1]).unwrap();
        let sets = [
            rec(10, &[6]),
            EPSet::rational_from_parts(6, [1], [0, -2], [3]).unwrap(),
        ];
        for l in &sets {
            assert_eq!(&preimage_eventual(&ident, l).unwrap(), l);
        }
        let shift = CpPolynomial::from_i64(&[1, 1]).unwrap(); // x + 1
        assert_eq!(
            preimage_eventual(&shift, &rec(10, &[6])).unwrap(),
            rec(10, &[5])
        );
    }

    #[test]
    fn preimage_eventual_downward_polynomial() {
        // f(x) = -2x is congruence preserving and swaps the tails.
        let down = CpPolynomial::from_i64(&[0, -2]).unwrap();
        let l = EPSet::rational_from_parts(4, [], [2], [2]).unwrap(); // 2 + 4N... normalized
        let pre = preimage_eventual(&down, &l).unwrap();
        for x in -60..=60i64 {
            assert_eq!(pre.contains_i64(x), l.contains(&down.eval_i64(x)), "x={x}");
        }
    }

    #[test]
    fn preimage_eventual_rejects_constant() {
        let c = CpPolynomial::from_i64(&[7]).unwrap();
        assert_eq!(
            preimage_eventual(&c, &rec(5, &[2])).err(),
            Some(LatticeError::ConstantPolynomial)
        );
    }

    #[test]
    fn translate_expression_examples() {
        // Doubling against multiples of 4: residues with 2r = 0 mod 4.
        let double = CpPolynomial::from_i64(&[0, 2]).unwrap();
        let l = rec(4, &[0]);
        let lhs = preimage_via_translates(&double, &l).unwrap();
        assert_eq!(lhs, preimage_recognizable(&double, &l).unwrap());
        assert_eq!(lhs, rec(2, &[0]));
        // Identity and shifts reduce to translates.
        let ident = CpPolynomial::from_i64(&[0, 1]).unwrap();
        let l = rec(6, &[2, 3]);
        assert_eq!(
            preimage_via_translates(&ident, &l).unwrap(),
            preimage_recognizable(&ident, &l).unwrap()
        );
        for c in [-2i64, 1, 4] {
            let shift = CpPolynomial::from_i64(&[c, 1]).unwrap();
            let rhs = preimage_via_translates(&shift, &l).unwrap();
            assert_eq!(rhs, l.translate(c));
        }
    }

    #[test]
    fn translate_expression_rejects_non_monotone() {
        let sq = CpPolynomial::from_i64(&[0, 1, 2]).unwrap();
        assert!(matches!(
            preimage_via_translates(&sq, &rec(10, &[6])).err(),
            Some(LatticeError::MonotonicityFailure { .. })
        ));
    }

    #[test]
    fn membership_self_certificate() {
        let l = rec(10, &[6]);
        match lattice_membership(&l, &l).unwrap() {
            MembershipOutcome::Member { certificate } => {
                assert_eq!(certificate.to_string(), "(L-0)");
            }
            MembershipOutcome::NotMember { .. } => panic!("L is in its own lattice"),
        }
    }

    #[test]
    fn membership_union_of_translates() {
        let l = rec(10, &[6]);
        let x = rec(10, &[4, 6]);
        match lattice_membership(&l, &x).unwrap() {
            MembershipOutcome::Member { certificate } => {
                assert_eq!(certificate.terms.len(), 2);
                assert_eq!(certificate.to_string(), "(L-0) u (L-2)");
            }
            MembershipOutcome::NotMember { .. } => panic!("union of translates is a member"),
        }
    }

    #[test]
    fn membership_smaller_period_candidate() {
        // Candidate period 5 lifts into period 10: residues {1, 6} mod 10,
        // reachable as (L-5) u (L-0).
        let l = rec(10, &[6]);
        let x = rec(5, &[1]);
        assert!(lattice_membership(&l, &x).unwrap().is_member());
    }

    #[test]
    fn membership_rejects_non_periodic() {
        let l = rec(10, &[6]);
        let x = EPSet::rational_from_parts(10, [], [6], [6]).unwrap();
        match lattice_membership(&l, &x).unwrap() {
            MembershipOutcome::NotMember { reason } => {
                assert!(reason.contains("not purely periodic"));
            }
            MembershipOutcome::Member { .. } => panic!("one-sided set cannot be a member"),
        }
    }

    #[test]
    fn membership_rejects_unreachable_residues() {
        // Translates of the full set are all of Z; the empty mask is not
        // reachable, nor is any proper subset.
        let l = rec(1, &[0]);
        assert!(!lattice_membership(&l, &EPSet::empty()).unwrap().is_member());
        assert!(!lattice_membership(&l, &rec(2, &[0])).unwrap().is_member());
    }

    #[test]
    fn membership_empty_generator() {
        let l = rec(3, &[]);
        assert!(lattice_membership(&l, &EPSet::empty()).unwrap().is_member());
        assert!(!lattice_membership(&l, &EPSet::integers()).unwrap().is_member());
    }

    #[test]
    fn nonmembership_by_negatives() {
        let l = EPSet::rational_from_parts(10, [], [6], [6]).unwrap();
        let sq = CpPolynomial::from_i64(&[0, 1, 2]).unwrap();
        let pre = preimage_eventual(&sq, &l).unwrap();
        let cert = certify_nonmembership_negatives(&l, &pre).unwrap();
        let cert = cert.expect("preimage has infinitely many negatives");
        assert_eq!(cert.candidate_period, 10);
        // Finite candidates are inconclusive.
        let finite = EPSet::rational_from_parts(10, [], [3, -3], []).unwrap();
        assert!(certify_nonmembership_negatives(&l, &finite)
            .unwrap()
            .is_none());
        // Two-sided generators are rejected outright.
        assert_eq!(
            certify_nonmembership_negatives(&rec(10, &[6]), &pre).err(),
            Some(LatticeError::NegativeTailNotEmpty)
        );
    }

    #[test]
    fn text_round_trip() {
        for s in [
            rec(10, &[4, 6]),
            EPSet::rational_from_parts(6, [1], [0, -2], [3]).unwrap(),
            EPSet::empty(),
            EPSet::integers(),
        ] {
            let text = s.to_text();
            assert_eq!(EPSet::parse(&text).unwrap(), s, "text:\n{text}");
        }
        assert!(EPSet::parse("junk").is_err());
        assert!(EPSet::parse("4 1\n0\n\n01\n").is_err());
    }
}
