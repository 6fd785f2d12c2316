//! The constructive CRT lifting engine.
//!
//! A congruence preserving table `f : Z/nZ -> Z/mZ` with `m | n` extends to
//! a congruence preserving `F : N -> N` with `pi_m . F = f . pi_n`. The
//! construction is inductive: `F(0) = iota_m(f(pi_n(0)))`, and each next
//! value solves the system
//!
//! ```text
//! F(t+1) = F(i)                  (mod t+1-i)   for i = 0, ..., t-1
//! F(t+1) = iota_m(f(pi_n(t+1)))  (mod m)
//! ```
//!
//! (the vacuous modulus-1 congruence at `i = t` is omitted). The solution
//! set of each step is an arithmetic progression; we always pick the least
//! nonnegative element so that prefixes are reproducible and land in `N`.
//!
//! When `m` does not divide `n` the same induction still runs — the
//! cross-modulus comparison map is defined unconditionally — and the first
//! infeasible step is surfaced together with the conflicting pair of
//! congruences, which turns the classical `Z/6Z -> Z/8Z` obstruction into
//! an executable regression.

use crate::finite_cp::{is_cp_finite, CpCheck, FiniteFn};
use crate::ringcore::{gcrt_solve, Congruence, CongruenceSystem, GcrtOutcome};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use std::fmt;

/// The deterministic rule used to pick one solution of each step system.
pub const TIE_BREAK_RULE: &str = "least nonnegative solution of each step's congruence system";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LiftError {
    /// Lifting is only defined for congruence preserving inputs.
    NotCongruencePreserving { x: u64, y: u64 },
    /// A finite-to-finite lift was requested with moduli that do not nest:
    /// `m | n`, `m | s`, `n | r` and `s | r` are all required.
    BadModulusChain { n: u64, m: u64, r: u64, s: u64 },
    /// Text input did not parse as a value prefix.
    Parse(String),
}

impl fmt::Display for LiftError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LiftError::NotCongruencePreserving { x, y } => {
                write!(f, "input is not congruence preserving: witness x={x} y={y}")
            }
            LiftError::BadModulusChain { n, m, r, s } => write!(
                f,
                "moduli must satisfy m|n, m|s, n|r, s|r; got n={n} m={m} r={r} s={s}"
            ),
            LiftError::Parse(why) => write!(f, "parse error: {why}"),
        }
    }
}

impl std::error::Error for LiftError {}

/// The first `T+1` values `F(0), ..., F(T)` of a function `N -> Z`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NatPrefix {
    values: Vec<BigInt>,
}

impl NatPrefix {
    /// Panics on an empty prefix; a prefix always contains `F(0)`.
    pub fn new(values: Vec<BigInt>) -> NatPrefix {
        assert!(!values.is_empty(), "prefix must be nonempty");
        NatPrefix { values }
    }

    pub fn values(&self) -> &[BigInt] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// First pair `(x, y)` with `y < x` where `x - y` fails to divide
    /// `F(x) - F(y)`, scanning `x` outward, or `None` when the prefix is
    /// pairwise congruence preserving.
    pub fn cp_violation(&self) -> Option<(usize, usize)> {
        for x in 1..self.values.len() {
            for y in 0..x {
                let d = BigInt::from((x - y) as u64);
                if !(&self.values[x] - &self.values[y]).mod_floor(&d).is_zero() {
                    return Some((x, y));
                }
            }
        }
        None
    }

    pub fn is_pairwise_cp(&self) -> bool {
        self.cp_violation().is_none()
    }

    /// One integer per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in &self.values {
            out.push_str(&v.to_string());
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<NatPrefix, LiftError> {
        let values: Result<Vec<BigInt>, _> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::parse)
            .collect();
        let values = values.map_err(|e| LiftError::Parse(format!("bad integer: {e}")))?;
        if values.is_empty() {
            return Err(LiftError::Parse("empty prefix".into()));
        }
        Ok(NatPrefix::new(values))
    }
}

/// Outcome of a lift attempt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LiftOutcome {
    Success(NatPrefix),
    /// The step system for `F(step)` has no solution. `conflict` indexes
    /// the first incompatible pair of equations inside `system`.
    Infeasible {
        step: u64,
        conflict: (usize, usize),
        system: CongruenceSystem,
    },
}

/// A lift outcome together with the tie-break rule that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftReport {
    pub outcome: LiftOutcome,
    pub tie_break: &'static str,
}

impl LiftReport {
    pub fn success(self) -> Option<NatPrefix> {
        match self.outcome {
            LiftOutcome::Success(p) => Some(p),
            LiftOutcome::Infeasible { .. } => None,
        }
    }
}

/// Runs the inductive lift of `f` out to argument `t_max`.
///
/// On success the returned prefix `F(0..t_max)` is pairwise congruence
/// preserving, satisfies `pi_m(F(u)) = f(pi_n(u))` for every `u`, starts at
/// `F(0) = iota_m(f(pi_n(0)))`, and each later value is the least
/// nonnegative solution of its step system. Infeasibility (possible only
/// when `m` does not divide `n`) reports the step and the violating pair.
/// Non congruence preserving inputs are rejected.
pub fn lift_prefix(f: &FiniteFn, t_max: u64) -> Result<LiftReport, LiftError> {
    if let CpCheck::Violated { x, y } = is_cp_finite(f) {
        return Err(LiftError::NotCongruencePreserving { x, y });
    }
    let m = f.target_modulus();
    let m_divides_n = f.source_modulus().is_multiple_of(m);
    let mut values: Vec<BigInt> = vec![BigInt::from(f.apply(0))];
    for u in 1..=t_max {
        let mut eqs: Vec<Congruence> = Vec::with_capacity(u as usize);
        for i in 0..u.saturating_sub(1) {
            eqs.push(Congruence::new(values[i as usize].clone(), u - i));
        }
        eqs.push(Congruence::new(f.apply(u), m));
        let system = CongruenceSystem::new(eqs);
        if m_divides_n {
            debug_assert!(
                step_conditions_hold(&values, u, f),
                "pairwise step conditions must hold when m | n"
            );
        }
        match gcrt_solve(&system) {
            GcrtOutcome::Solution { base, .. } => values.push(base),
            GcrtOutcome::Conflict { i, j } => {
                debug_assert!(!m_divides_n, "the lift cannot fail when m | n");
                return Ok(LiftReport {
                    outcome: LiftOutcome::Infeasible {
                        step: u,
                        conflict: (i, j),
                        system,
                    },
                    tie_break: TIE_BREAK_RULE,
                });
            }
        }
    }
    Ok(LiftReport {
        outcome: LiftOutcome::Success(NatPrefix::new(values)),
        tie_break: TIE_BREAK_RULE,
    })
}

/// The two pairwise compatibility conditions that make each step system
/// solvable when `m | n`: earlier values agree modulo the gcd of their step
/// moduli, and each earlier value agrees with the target row modulo
/// `gcd(u - i, m)`.
fn step_conditions_hold(values: &[BigInt], u: u64, f: &FiniteFn) -> bool {
    let m = f.target_modulus();
    let target = BigInt::from(f.apply(u));
    for i in 0..u.saturating_sub(1) {
        for j in (i + 1)..u.saturating_sub(1) {
            let g = BigInt::from((u - i).gcd(&(u - j)));
            if !(&values[j as usize] - &values[i as usize])
                .mod_floor(&g)
                .is_zero()
            {
                return false;
            }
        }
        let g = BigInt::from((u - i).gcd(&m));
        if !(&target - &values[i as usize]).mod_floor(&g).is_zero() {
            return false;
        }
    }
    true
}

/// Whether `prefix` lifts `f`: the projection `pi_m(F(u)) = f(pi_n(u))`
/// must hold at every prefix index, and the prefix must be pairwise
/// congruence preserving.
pub fn verify_lift(prefix: &NatPrefix, f: &FiniteFn) -> bool {
    let m = BigInt::from(f.target_modulus());
    for (u, value) in prefix.values().iter().enumerate() {
        if value.mod_floor(&m) != BigInt::from(f.apply(u as u64)) {
            return false;
        }
    }
    prefix.is_pairwise_cp()
}

/// Lifts `f : Z/nZ -> Z/mZ` to `g : Z/rZ -> Z/sZ` through a lift prefix of
/// length `r`: `g = pi_s . F . iota_r`. Requires the modulus chain `m | n`,
/// `m | s`, `n | r`, `s | r` and a congruence preserving `f`; the returned
/// table is checked to be congruence preserving and to project back onto
/// `f`.
pub fn lift_between_finite(f: &FiniteFn, r: u64, s: u64) -> Result<FiniteFn, LiftError> {
    let (n, m) = (f.source_modulus(), f.target_modulus());
    if !n.is_multiple_of(m) || !s.is_multiple_of(m) || !r.is_multiple_of(n) || !r.is_multiple_of(s) {
        return Err(LiftError::BadModulusChain { n, m, r, s });
    }
    let report = lift_prefix(f, r - 1)?;
    let prefix = report.success().expect("lift cannot fail when m divides n");
    let s_big = BigInt::from(s);
    let table: Vec<u64> = prefix
        .values()
        .iter()
        .map(|v| u64::try_from(v.mod_floor(&s_big)).expect("residue fits u64"))
        .collect();
    let g = FiniteFn::new(r, s, table).expect("projected table is well formed");
    assert!(
        is_cp_finite(&g).holds(),
        "projection of a congruence preserving lift stays congruence preserving"
    );
    for x in 0..r {
        assert_eq!(
            g.apply(x) % m,
            f.apply(x % n),
            "lifted table must project back onto f"
        );
    }
    Ok(g)
}

/// Verifies the three commuting relations tying a prefix `F` to the two
/// finite tables it lifts: `pi_s . F = g . pi_r`, `pi_m . F = f . pi_n`,
/// and `pi_{s,m} . g = f . pi_{r,n}`.
pub fn full_diagram_check(f: &FiniteFn, g: &FiniteFn, prefix: &NatPrefix) -> bool {
    let (n, m) = (f.source_modulus(), f.target_modulus());
    let (r, s) = (g.source_modulus(), g.target_modulus());
    let (m_big, s_big) = (BigInt::from(m), BigInt::from(s));
    for (u, value) in prefix.values().iter().enumerate() {
        let u = u as u64;
        if value.mod_floor(&s_big) != BigInt::from(g.apply(u % r)) {
            return false;
        }
        if value.mod_floor(&m_big) != BigInt::from(f.apply(u % n)) {
            return false;
        }
    }
    for x in 0..r {
        if g.apply(x) % m != f.apply(x % n) {
            return false;
        }
    }
    true
}
