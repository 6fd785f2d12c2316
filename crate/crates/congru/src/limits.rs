//! Truncated p-adic and profinite integer arithmetic.
//!
//! Elements of the inverse-limit rings exist in this crate only as level-N
//! approximations: a [`LimitApprox`] is a digit vector representing a
//! residue modulo `p^N` (base-p kind) or modulo `(N+1)!` (factorial kind,
//! digits `c_1, ..., c_N` with `0 <= c_i <= i` and weight `i!`). On top of
//! the digit arithmetic sit the valuation and ultrametric, the level
//! interpretations `P_k` of the binomial polynomials, truncated Mahler
//! series evaluation with a verified convergence witness, and the
//! inverse-system machinery: tabulating level functions and checking that
//! their squares commute.
//!
//! Nothing here pretends to hold an infinite object; statements about the
//! full rings are represented by the checkable finite-precision properties
//! of their level restrictions.

use crate::finite_cp::{is_cp_samering, CpCheck, FiniteFn};
use crate::ringcore::{binom_poly_eval, nu_p};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LimitsError {
    /// Precision must be at least 1.
    BadPrecision,
    /// Base-p digits require a prime base.
    NotPrime(u64),
    /// Operands must share kind and precision.
    ShapeMismatch,
    /// A digit exceeds its positional bound.
    DigitOutOfRange { index: usize, digit: u64 },
    /// The trailing stored coefficient of a Mahler series does not vanish
    /// at the working precision, so convergence cannot be certified.
    TailNotVanishing { index: usize },
    /// A level was requested beyond what the working precision certifies.
    LevelOutOfRange { level: u32, precision: u32 },
    /// The level ring is too large to tabulate.
    LevelTooLarge { level: u32 },
    /// An inverse-system check needs levels 1..N without gaps.
    MissingLevel { expected: u32 },
    /// The operation is only defined for base-p digit vectors.
    BasePOnly,
    /// The operation needs a level function on a single ring.
    NotSameRing { source: u64, target: u64 },
    /// Text input did not parse as a digit vector.
    Parse(String),
}

impl fmt::Display for LimitsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LimitsError::BadPrecision => write!(f, "precision must be >= 1"),
            LimitsError::NotPrime(p) => write!(f, "base {p} is not prime"),
            LimitsError::ShapeMismatch => write!(f, "operands must share kind and precision"),
            LimitsError::DigitOutOfRange { index, digit } => {
                write!(f, "digit {digit} at position {index} exceeds its bound")
            }
            LimitsError::TailNotVanishing { index } => write!(
                f,
                "trailing coefficient {index} does not vanish at this precision; \
                 convergence cannot be certified"
            ),
            LimitsError::LevelOutOfRange { level, precision } => {
                write!(f, "level {level} exceeds working precision {precision}")
            }
            LimitsError::LevelTooLarge { level } => {
                write!(f, "level {level} ring is too large to tabulate")
            }
            LimitsError::MissingLevel { expected } => {
                write!(f, "inverse-system check expected level {expected} next")
            }
            LimitsError::BasePOnly => write!(f, "operation is defined for base-p vectors only"),
            LimitsError::NotSameRing { source, target } => {
                write!(f, "level function maps between different rings {source} -> {target}")
            }
            LimitsError::Parse(why) => write!(f, "parse error: {why}"),
        }
    }
}

impl std::error::Error for LimitsError {}

/// Which inverse system a digit vector lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LimitKind {
    /// Base-`p` digits, level `n` ring `Z/p^nZ`.
    BaseP(u64),
    /// Factorial-base digits, level `n` ring `Z/n!Z`.
    Factorial,
}

impl LimitKind {
    fn validate(self) -> Result<(), LimitsError> {
        match self {
            LimitKind::BaseP(p) => {
                if p < 2 || !is_prime(p) {
                    Err(LimitsError::NotPrime(p))
                } else {
                    Ok(())
                }
            }
            LimitKind::Factorial => Ok(()),
        }
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// The modulus of the level-`n` ring: `p^n`, respectively `n!`.
pub fn level_modulus(kind: LimitKind, level: u32) -> BigInt {
    match kind {
        LimitKind::BaseP(p) => BigInt::from(p).pow(level),
        LimitKind::Factorial => {
            let mut acc = BigInt::one();
            for i in 2..=level as u64 {
                acc *= BigInt::from(i);
            }
            acc
        }
    }
}

/// The modulus represented by a digit vector of the given precision:
/// `p^N` for base-p, `(N+1)!` for factorial digits `c_1..c_N`.
pub fn precision_modulus(kind: LimitKind, precision: u32) -> BigInt {
    match kind {
        LimitKind::BaseP(_) => level_modulus(kind, precision),
        LimitKind::Factorial => level_modulus(kind, precision + 1),
    }
}

/// Valuation of a digit vector: the largest `s` such that `p^s`
/// (respectively `s!`) divides it.
///
/// At finite precision the all-zero vector only certifies divisibility by
/// the full precision modulus, so it reports a lower bound instead of a
/// number; infinity is never claimed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Valuation {
    Finite(u32),
    /// All digits are zero; the valuation is at least this bound (the
    /// exponent certified by the precision modulus).
    AtLeast(u32),
}

impl Valuation {
    /// The certified lower bound, collapsing both variants to a number.
    /// Inside a level ring everything at or beyond the precision bound
    /// behaves identically, so clamped comparisons are sound.
    pub fn certified(self) -> u32 {
        match self {
            Valuation::Finite(v) => v,
            Valuation::AtLeast(b) => b,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Valuation::Finite(_))
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::AtLeast(b) => write!(f, ">= {b}"),
        }
    }
}

/// Ultrametric distance `2^(-Val(x - y))` at finite precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Distance {
    Exactly2PowNeg(u32),
    /// The difference vanished at this precision: distance at most
    /// `2^(-bound)`.
    AtMost2PowNeg(u32),
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Exactly2PowNeg(n) => write!(f, "2^-{n}"),
            Distance::AtMost2PowNeg(n) => write!(f, "<= 2^-{n}"),
        }
    }
}

/// A truncated p-adic or profinite integer: `N` digits, least significant
/// first, representing a residue modulo the precision modulus.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LimitApprox {
    kind: LimitKind,
    digits: Vec<u64>,
}

impl LimitApprox {
    /// Builds a vector from explicit digits, validating positional bounds:
    /// base-p digits lie in `[0, p)`, factorial digit `c_i` in `[0, i]`.
    pub fn new(kind: LimitKind, digits: Vec<u64>) -> Result<LimitApprox, LimitsError> {
        kind.validate()?;
        if digits.is_empty() {
            return Err(LimitsError::BadPrecision);
        }
        for (index, &digit) in digits.iter().enumerate() {
            let bound = match kind {
                LimitKind::BaseP(p) => p,
                LimitKind::Factorial => index as u64 + 2,
            };
            if digit >= bound {
                return Err(LimitsError::DigitOutOfRange { index, digit });
            }
        }
        Ok(LimitApprox { kind, digits })
    }

    /// Digits of `z` reduced modulo the precision modulus. Negative
    /// integers reduce modularly, which reproduces the familiar trailing
    /// `p - 1` digit pattern of negative p-adic integers.
    pub fn from_int(
        kind: LimitKind,
        precision: u32,
        z: &BigInt,
    ) -> Result<LimitApprox, LimitsError> {
        kind.validate()?;
        if precision < 1 {
            return Err(LimitsError::BadPrecision);
        }
        let mut v = z.mod_floor(&precision_modulus(kind, precision));
        let mut digits = Vec::with_capacity(precision as usize);
        for idx in 0..precision as u64 {
            let base = match kind {
                LimitKind::BaseP(p) => BigInt::from(p),
                LimitKind::Factorial => BigInt::from(idx + 2),
            };
            let (q, r) = v.div_rem(&base);
            digits.push(u64::try_from(r).expect("digit fits u64"));
            v = q;
        }
        Ok(LimitApprox { kind, digits })
    }

    pub fn kind(&self) -> LimitKind {
        self.kind
    }

    pub fn precision(&self) -> u32 {
        self.digits.len() as u32
    }

    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    pub fn modulus(&self) -> BigInt {
        precision_modulus(self.kind, self.precision())
    }

    /// The canonical representative in `[0, modulus)`.
    pub fn value(&self) -> BigInt {
        let mut acc = BigInt::zero();
        let mut weight = BigInt::one();
        for (idx, &d) in self.digits.iter().enumerate() {
            acc += BigInt::from(d) * &weight;
            weight *= match self.kind {
                LimitKind::BaseP(p) => BigInt::from(p),
                LimitKind::Factorial => BigInt::from(idx as u64 + 2),
            };
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.digits.iter().all(|&d| d == 0)
    }

    fn check_shape(&self, other: &LimitApprox) -> Result<(), LimitsError> {
        if self.kind != other.kind || self.digits.len() != other.digits.len() {
            return Err(LimitsError::ShapeMismatch);
        }
        Ok(())
    }

    /// Exact ring addition at this precision.
    pub fn add(&self, other: &LimitApprox) -> Result<LimitApprox, LimitsError> {
        self.check_shape(other)?;
        LimitApprox::from_int(self.kind, self.precision(), &(self.value() + other.value()))
    }

    /// Exact ring subtraction at this precision.
    pub fn sub(&self, other: &LimitApprox) -> Result<LimitApprox, LimitsError> {
        self.check_shape(other)?;
        LimitApprox::from_int(self.kind, self.precision(), &(self.value() - other.value()))
    }

    /// Exact ring multiplication at this precision.
    pub fn mul(&self, other: &LimitApprox) -> Result<LimitApprox, LimitsError> {
        self.check_shape(other)?;
        LimitApprox::from_int(self.kind, self.precision(), &(self.value() * other.value()))
    }

    /// Valuation by the digit rule: the position of the first nonzero
    /// digit. For factorial digits `c_1..c_N` the first nonzero at `c_s`
    /// means `s! | x` and `(s+1)!` does not, so the reported value is `s`;
    /// the divisibility characterization and this digit rule agree, which
    /// the tests verify exhaustively.
    pub fn val(&self) -> Valuation {
        match self.digits.iter().position(|&d| d != 0) {
            Some(idx) => match self.kind {
                LimitKind::BaseP(_) => Valuation::Finite(idx as u32),
                LimitKind::Factorial => Valuation::Finite(idx as u32 + 1),
            },
            None => match self.kind {
                LimitKind::BaseP(_) => Valuation::AtLeast(self.precision()),
                LimitKind::Factorial => Valuation::AtLeast(self.precision() + 1),
            },
        }
    }

    /// Serializes as the shared text format: header `p N` (base-p) or
    /// `! N` (factorial), then the `N` digits, least significant first.
    pub fn to_text(&self) -> String {
        let header = match self.kind {
            LimitKind::BaseP(p) => format!("{p} {}", self.precision()),
            LimitKind::Factorial => format!("! {}", self.precision()),
        };
        let row: Vec<String> = self.digits.iter().map(|d| d.to_string()).collect();
        format!("{header}\n{}\n", row.join(" "))
    }

    pub fn parse(text: &str) -> Result<LimitApprox, LimitsError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| LimitsError::Parse("empty input".into()))?;
        let (kind, precision) = parse_header(header)?;
        let row = lines
            .next()
            .ok_or_else(|| LimitsError::Parse("missing digit row".into()))?;
        let digits = parse_digit_row(row, precision)?;
        LimitApprox::new(kind, digits)
    }
}

fn parse_header(header: &str) -> Result<(LimitKind, u32), LimitsError> {
    let mut parts = header.split_whitespace();
    let kind = match parts.next() {
        Some("!") => LimitKind::Factorial,
        Some(tok) => LimitKind::BaseP(
            tok.parse()
                .map_err(|_| LimitsError::Parse(format!("bad base {tok:?}")))?,
        ),
        None => return Err(LimitsError::Parse("empty header".into())),
    };
    let precision: u32 = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| LimitsError::Parse("bad precision".into()))?;
    if parts.next().is_some() {
        return Err(LimitsError::Parse("trailing tokens in header".into()));
    }
    if precision < 1 {
        return Err(LimitsError::BadPrecision);
    }
    Ok((kind, precision))
}

fn parse_digit_row(row: &str, precision: u32) -> Result<Vec<u64>, LimitsError> {
    let digits: Result<Vec<u64>, _> = row.split_whitespace().map(|s| s.parse()).collect();
    let digits = digits.map_err(|_| LimitsError::Parse("bad digit".into()))?;
    if digits.len() as u32 != precision {
        return Err(LimitsError::Parse(format!(
            "expected {precision} digits, got {}",
            digits.len()
        )));
    }
    Ok(digits)
}

/// `dist(x, y) = 2^(-Val(x - y))`, the ultrametric at finite precision.
pub fn dist(x: &LimitApprox, y: &LimitApprox) -> Result<Distance, LimitsError> {
    let diff = x.sub(y)?;
    Ok(match diff.val() {
        Valuation::Finite(v) => Distance::Exactly2PowNeg(v),
        Valuation::AtLeast(b) => Distance::AtMost2PowNeg(b),
    })
}

/// The level interpretation of the binomial polynomial: evaluate `P_k` on
/// the canonical representative and reduce back into the digit ring.
pub fn phat_eval(k: u64, x: &LimitApprox) -> LimitApprox {
    LimitApprox::from_int(x.kind(), x.precision(), &binom_poly_eval(k, &x.value()))
        .expect("shape is preserved")
}

/// A truncated Mahler series: coefficients `a_0, ..., a_(K-1)`, all of the
/// same kind and precision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MahlerSeries {
    coeffs: Vec<LimitApprox>,
}

impl MahlerSeries {
    pub fn new(coeffs: Vec<LimitApprox>) -> Result<MahlerSeries, LimitsError> {
        let first = coeffs.first().ok_or(LimitsError::BadPrecision)?;
        let (kind, precision) = (first.kind(), first.precision());
        if coeffs
            .iter()
            .any(|c| c.kind() != kind || c.precision() != precision)
        {
            return Err(LimitsError::ShapeMismatch);
        }
        Ok(MahlerSeries { coeffs })
    }

    /// Builds a series from integer coefficients at a common precision.
    pub fn from_int_coeffs(
        kind: LimitKind,
        precision: u32,
        ints: &[BigInt],
    ) -> Result<MahlerSeries, LimitsError> {
        let coeffs: Result<Vec<_>, _> = ints
            .iter()
            .map(|z| LimitApprox::from_int(kind, precision, z))
            .collect();
        MahlerSeries::new(coeffs?)
    }

    pub fn coeffs(&self) -> &[LimitApprox] {
        &self.coeffs
    }

    pub fn kind(&self) -> LimitKind {
        self.coeffs[0].kind()
    }

    pub fn precision(&self) -> u32 {
        self.coeffs[0].precision()
    }

    /// Header then one digit row per coefficient.
    pub fn to_text(&self) -> String {
        let mut out = match self.kind() {
            LimitKind::BaseP(p) => format!("{p} {}\n", self.precision()),
            LimitKind::Factorial => format!("! {}\n", self.precision()),
        };
        for c in &self.coeffs {
            let row: Vec<String> = c.digits().iter().map(|d| d.to_string()).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<MahlerSeries, LimitsError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| LimitsError::Parse("empty input".into()))?;
        let (kind, precision) = parse_header(header)?;
        let mut coeffs = Vec::new();
        for row in lines {
            let digits = parse_digit_row(row, precision)?;
            coeffs.push(LimitApprox::new(kind, digits)?);
        }
        MahlerSeries::new(coeffs)
    }
}

/// Evaluates a truncated Mahler series at a point of matching shape:
/// `sum_{k<K} a_k * P_k(x)`, exact in the precision ring.
///
/// Dropped terms beyond the stored range are only sound if the stored tail
/// already vanishes at this precision, so the evaluator demands that the
/// final stored coefficient be zero in the precision ring (its valuation
/// at or beyond the certified bound) and refuses otherwise: convergence is
/// witnessed, never assumed.
pub fn mahler_eval(series: &MahlerSeries, x: &LimitApprox) -> Result<LimitApprox, LimitsError> {
    series.coeffs[0].check_shape(x)?;
    let last = series.coeffs.len() - 1;
    if !series.coeffs[last].is_zero() {
        return Err(LimitsError::TailNotVanishing { index: last });
    }
    let modulus = x.modulus();
    let rep = x.value();
    let mut acc = BigInt::zero();
    for (k, a) in series.coeffs.iter().enumerate() {
        acc += a.value() * binom_poly_eval(k as u64, &rep);
        acc = acc.mod_floor(&modulus);
    }
    LimitApprox::from_int(x.kind(), x.precision(), &acc)
}

/// A level restriction `psi_n : Z/source -> Z/target` of a function on the
/// limit ring, stored as a table. For congruence preserving functions the
/// source and target levels coincide.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelFn {
    kind: LimitKind,
    source_level: u32,
    level: u32,
    table: FiniteFn,
}

impl LevelFn {
    pub fn kind(&self) -> LimitKind {
        self.kind
    }

    /// Level of the source ring (`mu(n)` in the general inverse-system
    /// form; equal to [`LevelFn::level`] in the congruence preserving
    /// case).
    pub fn source_level(&self) -> u32 {
        self.source_level
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn table(&self) -> &FiniteFn {
        &self.table
    }

    /// Replaces one table entry, e.g. to confirm that the diagram checks
    /// actually reject broken systems.
    pub fn with_entry(&self, x: u64, value: u64) -> Result<LevelFn, LimitsError> {
        let mut table = self.table.table().to_vec();
        let idx = x as usize;
        if idx >= table.len() || value >= self.table.target_modulus() {
            return Err(LimitsError::Parse("entry out of range".into()));
        }
        table[idx] = value;
        let table = FiniteFn::new(self.table.source_modulus(), self.table.target_modulus(), table)
            .expect("shape preserved");
        Ok(LevelFn {
            kind: self.kind,
            source_level: self.source_level,
            level: self.level,
            table,
        })
    }
}

fn level_modulus_u64(kind: LimitKind, level: u32) -> Result<u64, LimitsError> {
    u64::try_from(level_modulus(kind, level)).map_err(|_| LimitsError::LevelTooLarge { level })
}

/// Tabulates the level-`n` restriction of a function given at working
/// precision: embed each of the level ring's representatives, evaluate,
/// project back to the level. The working precision must certify the
/// level: `n <= N` for base-p, `n <= N + 1` for factorial digits.
pub fn level_restrict<F>(
    kind: LimitKind,
    precision: u32,
    eval: F,
    level: u32,
) -> Result<LevelFn, LimitsError>
where
    F: FnMut(&LimitApprox) -> Result<LimitApprox, LimitsError>,
{
    level_restrict_with_source(kind, precision, eval, level, level)
}

/// The general inverse-system form: tabulates
/// `psi : Z/source_level -> Z/target_level` by embed-evaluate-project.
pub fn level_restrict_with_source<F>(
    kind: LimitKind,
    precision: u32,
    mut eval: F,
    source_level: u32,
    target_level: u32,
) -> Result<LevelFn, LimitsError>
where
    F: FnMut(&LimitApprox) -> Result<LimitApprox, LimitsError>,
{
    kind.validate()?;
    let certified = match kind {
        LimitKind::BaseP(_) => precision,
        LimitKind::Factorial => precision + 1,
    };
    if source_level < 1 || source_level > certified || target_level > certified {
        return Err(LimitsError::LevelOutOfRange {
            level: source_level.max(target_level),
            precision,
        });
    }
    let source = level_modulus_u64(kind, source_level)?;
    let target = level_modulus_u64(kind, target_level)?;
    let target_big = BigInt::from(target);
    let mut table = Vec::with_capacity(source as usize);
    for x in 0..source {
        let input = LimitApprox::from_int(kind, precision, &BigInt::from(x))?;
        let out = eval(&input)?;
        table.push(u64::try_from(out.value().mod_floor(&target_big)).expect("residue fits u64"));
    }
    let table = FiniteFn::new(source, target, table).expect("tabulated function is well formed");
    Ok(LevelFn {
        kind,
        source_level,
        level: target_level,
        table,
    })
}

/// Checks that every square of the inverse system commutes: for all
/// `1 <= m <= n <= N`,
/// `pi_{n,m}(psi_n(x)) = psi_m(pi_{mu(n),mu(m)}(x))` over the whole
/// source ring of level `n`. `levels` must hold levels `1..=N` in order;
/// the identity source map gives the plain congruence preserving case.
pub fn check_inverse_system(levels: &[LevelFn]) -> Result<bool, LimitsError> {
    for (i, lvl) in levels.iter().enumerate() {
        if lvl.level != i as u32 + 1 {
            return Err(LimitsError::MissingLevel {
                expected: i as u32 + 1,
            });
        }
    }
    for n in 0..levels.len() {
        for m in 0..=n {
            let (hi, lo) = (&levels[n], &levels[m]);
            let target_lo = lo.table.target_modulus();
            let source_lo = lo.table.source_modulus();
            for x in 0..hi.table.source_modulus() {
                let lhs = hi.table.apply(x) % target_lo;
                let rhs = lo.table.apply(x % source_lo);
                if lhs != rhs {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Whether the level function is congruence preserving on its ring.
pub fn is_cp_level(level: &LevelFn) -> Result<CpCheck, LimitsError> {
    if level.table.source_modulus() != level.table.target_modulus() {
        return Err(LimitsError::NotSameRing {
            source: level.table.source_modulus(),
            target: level.table.target_modulus(),
        });
    }
    is_cp_samering(&level.table).map_err(|_| LimitsError::ShapeMismatch)
}

/// 1-Lipschitz check on a base-p level table: whenever `p^j` divides the
/// difference of two representatives it must divide the difference of
/// their images, for every `j` up to the level.
pub fn check_one_lipschitz(level: &LevelFn) -> Result<bool, LimitsError> {
    let p = match level.kind {
        LimitKind::BaseP(p) => p,
        LimitKind::Factorial => return Err(LimitsError::BasePOnly),
    };
    if level.table.source_modulus() != level.table.target_modulus() {
        return Err(LimitsError::NotSameRing {
            source: level.table.source_modulus(),
            target: level.table.target_modulus(),
        });
    }
    let size = level.table.source_modulus();
    for x in 0..size {
        for y in 0..x {
            let d_arg = x - y;
            let d_img = level.table.apply(x).abs_diff(level.table.apply(y));
            let mut power = 1u64;
            for _ in 0..=level.level {
                if d_arg.is_multiple_of(power) && !d_img.is_multiple_of(power) {
                    return Ok(false);
                }
                power = match power.checked_mul(p) {
                    Some(next) => next,
                    None => break,
                };
            }
        }
    }
    Ok(true)
}

/// The classical continuous-but-not-congruence-preserving series:
/// `a_k = p^(nu_p(k) - 1)` for `k >= p`. The formula is not a ring element
/// for `0 < k < p` (it would need `p^-1`) and says nothing at `k = 0`, so
/// those coefficients are set to `1` and `0` respectively; the point of
/// the example — the divisibility gate first fails at `k = p`, where
/// `lcm(p)` demands a factor of `p` but `a_p = 1` — is preserved, and
/// tests rely only on indices `k >= p`.
pub fn non_cp_series(p: u64, count: usize, precision: u32) -> Result<MahlerSeries, LimitsError> {
    LimitKind::BaseP(p).validate()?;
    if count == 0 {
        return Err(LimitsError::BadPrecision);
    }
    let ints: Vec<BigInt> = (0..count as u64)
        .map(|k| {
            if k == 0 {
                BigInt::zero()
            } else if k < p {
                BigInt::one()
            } else {
                let exponent = nu_p(p, k).expect("k >= p >= 2") - 1;
                BigInt::from(p).pow(exponent)
            }
        })
        .collect();
    MahlerSeries::from_int_coeffs(LimitKind::BaseP(p), precision, &ints)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ringcore::lcm_upto;
    use crate::finite_cp::divides_in_ring;

    fn base2(precision: u32, z: i64) -> LimitApprox {
        LimitApprox::from_int(LimitKind::BaseP(2), precision, &BigInt::from(z)).unwrap()
    }

    fn fact(precision: u32, z: i64) -> LimitApprox {
        LimitApprox::from_int(LimitKind::Factorial, precision, &BigInt::from(z)).unwrap()
    }

    #[test]
    fn from_int_negative_one_is_all_ones() {
        assert_eq!(base2(8, -1).digits(), &[1, 1, 1, 1, 1, 1, 1, 1]);
    }

    #[test]
    fn from_int_power_of_two() {
        assert_eq!(base2(4, 8).digits(), &[0, 0, 0, 1]);
    }

    #[test]
    fn from_int_factorial_expansion() {
        // 5 = 2*2! + 1*1!
        assert_eq!(fact(2, 5).digits(), &[1, 2]);
        // 6 = 1*3!
        assert_eq!(fact(3, 6).digits(), &[0, 0, 1]);
    }

    #[test]
    fn digit_bounds_enforced() {
        assert!(LimitApprox::new(LimitKind::BaseP(2), vec![0, 2]).is_err());
        assert!(LimitApprox::new(LimitKind::Factorial, vec![2]).is_err());
        assert!(LimitApprox::new(LimitKind::Factorial, vec![1, 2, 3]).is_ok());
        assert!(LimitApprox::new(LimitKind::BaseP(4), vec![0, 1]).is_err());
    }

    #[test]
    fn arithmetic_examples() {
        let x = base2(4, 5);
        let neg = base2(4, -5);
        assert!(x.add(&neg).unwrap().is_zero());
        assert_eq!(
            base2(4, 5).mul(&base2(4, 3)).unwrap().digits(),
            &[1, 1, 1, 1]
        );
        // 5 + 1 = 6 = 1*3! in factorial digits.
        assert_eq!(fact(3, 5).add(&fact(3, 1)).unwrap().digits(), &[0, 0, 1]);
    }

    #[test]
    fn arithmetic_matches_integer_oracle() {
        let kinds = [LimitKind::BaseP(2), LimitKind::BaseP(3), LimitKind::Factorial];
        for kind in kinds {
            let precision = match kind {
                LimitKind::Factorial => 6,
                _ => 8,
            };
            for u in (-40i64..40).step_by(7) {
                for v in (-30i64..30).step_by(5) {
                    let (a, b) = (
                        LimitApprox::from_int(kind, precision, &BigInt::from(u)).unwrap(),
                        LimitApprox::from_int(kind, precision, &BigInt::from(v)).unwrap(),
                    );
                    let sum = LimitApprox::from_int(kind, precision, &BigInt::from(u + v)).unwrap();
                    let dif = LimitApprox::from_int(kind, precision, &BigInt::from(u - v)).unwrap();
                    let prd = LimitApprox::from_int(kind, precision, &BigInt::from(u * v)).unwrap();
                    assert_eq!(a.add(&b).unwrap(), sum);
                    assert_eq!(a.sub(&b).unwrap(), dif);
                    assert_eq!(a.mul(&b).unwrap(), prd);
                }
            }
        }
    }

    #[test]
    fn shape_mismatch_rejected() {
        assert_eq!(
            base2(4, 1).add(&base2(5, 1)).err(),
            Some(LimitsError::ShapeMismatch)
        );
        assert_eq!(
            base2(4, 1).add(&fact(4, 1)).err(),
            Some(LimitsError::ShapeMismatch)
        );
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(base2(4, 8).val(), Valuation::Finite(3));
        assert_eq!(base2(4, 0).val(), Valuation::AtLeast(4));
        assert_eq!(fact(3, 6).val(), Valuation::Finite(3));
        assert_eq!(fact(3, 0).val(), Valuation::AtLeast(4));
    }

    #[test]
    fn valuation_digit_rule_matches_divisibility() {
        // Base-p: largest s with p^s | z. Factorial: largest s with s! | z.
        for p in [2u64, 3] {
            let n = 4u32;
            let modulus = p.pow(n) as i64;
            for z in 1..modulus {
                let v = LimitApprox::from_int(LimitKind::BaseP(p), n, &BigInt::from(z))
                    .unwrap()
                    .val();
                let mut s = 0u32;
                while z % (p.pow(s + 1) as i64) == 0 {
                    s += 1;
                }
                assert_eq!(v, Valuation::Finite(s), "p={p} z={z}");
            }
        }
        let n = 4u32; // modulus 5! = 120
        for z in 1..120i64 {
            let v = fact(n, z).val();
            let mut s = 1u32;
            let mut next_fact = 2i64;
            while z % next_fact == 0 {
                s += 1;
                next_fact *= (s + 1) as i64;
            }
            assert_eq!(v, Valuation::Finite(s), "z={z}");
        }
    }

    #[test]
    fn dist_examples() {
        let x = base2(4, 7);
        assert_eq!(dist(&x, &x).unwrap(), Distance::AtMost2PowNeg(4));
        assert_eq!(
            dist(&base2(4, 1), &base2(4, 3)).unwrap(),
            Distance::Exactly2PowNeg(1)
        );
        assert_eq!(
            dist(&base2(4, 0), &base2(4, 8)).unwrap(),
            Distance::Exactly2PowNeg(3)
        );
    }

    #[test]
    fn ultrametric_inequality_exhaustive() {
        // val(x - z) >= min(val(x - y), val(y - z)) with valuations clamped
        // at the certified precision bound.
        let n = 4u32;
        for x in 0..16i64 {
            for y in 0..16i64 {
                for z in 0..16i64 {
                    let (a, b, c) = (base2(n, x), base2(n, y), base2(n, z));
                    let xz = a.sub(&c).unwrap().val().certified();
                    let xy = a.sub(&b).unwrap().val().certified();
                    let yz = b.sub(&c).unwrap().val().certified();
                    assert!(xz >= xy.min(yz), "x={x} y={y} z={z}");
                }
            }
        }
    }

    #[test]
    fn phat_examples() {
        let x = base2(4, 5);
        assert_eq!(phat_eval(0, &x).value(), BigInt::one());
        // P_2(5) = 10
        assert_eq!(phat_eval(2, &x).digits(), &[0, 1, 0, 1]);
        // k greater than the representative gives 0.
        assert!(phat_eval(5, &base2(3, 3)).is_zero());
    }

    #[test]
    fn mahler_eval_lcm_series() {
        // Integer-side oracle: sum lcm(k) P_k(3) = 1 + 3 + 6 + 6 = 16 = 0 mod 8.
        let ints: Vec<BigInt> = (0..=8u64).map(lcm_upto).collect();
        let series = MahlerSeries::from_int_coeffs(LimitKind::BaseP(2), 3, &ints).unwrap();
        let value = mahler_eval(&series, &base2(3, 3)).unwrap();
        assert!(value.is_zero());
    }

    #[test]
    fn mahler_eval_constant_and_tail() {
        // A constant series needs an explicit trailing zero as its
        // convergence witness.
        let c = BigInt::from(5);
        let series =
            MahlerSeries::from_int_coeffs(LimitKind::BaseP(2), 4, &[c.clone(), BigInt::zero()])
                .unwrap();
        for x in 0..10 {
            assert_eq!(
                mahler_eval(&series, &base2(4, x)).unwrap().value(),
                BigInt::from(5)
            );
        }
        let refused = MahlerSeries::from_int_coeffs(LimitKind::BaseP(2), 4, &[c]).unwrap();
        assert_eq!(
            mahler_eval(&refused, &base2(4, 0)).err(),
            Some(LimitsError::TailNotVanishing { index: 0 })
        );
    }

    #[test]
    fn mahler_eval_vanishing_term_adds_nothing() {
        let zero_term = MahlerSeries::from_int_coeffs(
            LimitKind::BaseP(2),
            3,
            &[BigInt::from(3), BigInt::from(8)],
        )
        .unwrap();
        for x in 0..8 {
            assert_eq!(
                mahler_eval(&zero_term, &base2(3, x)).unwrap().value(),
                BigInt::from(3)
            );
        }
    }

    #[test]
    fn level_restrict_identity_and_constant() {
        let ident = level_restrict(LimitKind::BaseP(2), 4, |x| Ok(x.clone()), 3).unwrap();
        assert_eq!(ident.table().table(), &[0, 1, 2, 3, 4, 5, 6, 7]);
        let constant = level_restrict(
            LimitKind::BaseP(2),
            4,
            |x| {
                LimitApprox::from_int(x.kind(), x.precision(), &BigInt::from(5))
            },
            3,
        )
        .unwrap();
        assert!(constant.table().table().iter().all(|&v| v == 5));
    }

    #[test]
    fn level_restrict_lcm_series_matches_integer_oracle() {
        let ints: Vec<BigInt> = (0..=8u64).map(lcm_upto).collect();
        let series = MahlerSeries::from_int_coeffs(LimitKind::BaseP(2), 3, &ints).unwrap();
        let lvl = level_restrict(LimitKind::BaseP(2), 3, |x| mahler_eval(&series, x), 2).unwrap();
        // Oracle: sum lcm(k) P_k(x) mod 4 for x = 0..3.
        let oracle: Vec<u64> = (0..4i64)
            .map(|x| {
                let total: BigInt = (0..=8u64)
                    .map(|k| lcm_upto(k) * binom_poly_eval(k, &BigInt::from(x)))
                    .sum();
                u64::try_from(total.mod_floor(&BigInt::from(4))).unwrap()
            })
            .collect();
        assert_eq!(lvl.table().table(), &oracle[..]);
        assert_eq!(lvl.table().table(), &[1, 2, 1, 0]);
    }

    #[test]
    fn inverse_system_commutes_for_polynomial_series() {
        // lcm(8) is not divisible by 2^4 or 3^4, so an explicit zero
        // coefficient supplies the convergence witness at precision 4.
        let mut ints: Vec<BigInt> = (0..=8u64).map(lcm_upto).collect();
        ints.push(BigInt::zero());
        for p in [2u64, 3] {
            let series = MahlerSeries::from_int_coeffs(LimitKind::BaseP(p), 4, &ints).unwrap();
            let levels: Vec<LevelFn> = (1..=4)
                .map(|n| {
                    level_restrict(LimitKind::BaseP(p), 4, |x| mahler_eval(&series, x), n).unwrap()
                })
                .collect();
            assert!(check_inverse_system(&levels).unwrap());
            for lvl in &levels {
                assert!(is_cp_level(lvl).unwrap().holds());
                assert!(check_one_lipschitz(lvl).unwrap());
            }
            // Perturbing one entry at the top level must break a square.
            let mut broken = levels.clone();
            let top = broken.pop().unwrap();
            let old = top.table().apply(1);
            let bumped = (old + 1) % top.table().target_modulus();
            broken.push(top.with_entry(1, bumped).unwrap());
            assert!(!check_inverse_system(&broken).unwrap());
        }
    }

    #[test]
    fn single_level_system_is_vacuously_coherent() {
        let lvl = level_restrict(LimitKind::BaseP(2), 2, |x| Ok(x.clone()), 1).unwrap();
        assert!(check_inverse_system(&[lvl]).unwrap());
    }

    #[test]
    fn shifted_source_levels_for_digit_shift() {
        // x -> floor(x / 2) drops one digit, so its level restrictions
        // only commute when each level draws from one level higher
        // (source map n -> n + 1); with identity sources the squares
        // break.
        let shift = |x: &LimitApprox| {
            LimitApprox::from_int(x.kind(), x.precision(), &(x.value() / BigInt::from(2)))
        };
        let with_mu: Vec<LevelFn> = (1..=3)
            .map(|n| {
                level_restrict_with_source(LimitKind::BaseP(2), 4, shift, n + 1, n).unwrap()
            })
            .collect();
        assert!(check_inverse_system(&with_mu).unwrap());
        let identity_mu: Vec<LevelFn> = (1..=3)
            .map(|n| level_restrict(LimitKind::BaseP(2), 4, shift, n).unwrap())
            .collect();
        assert!(!check_inverse_system(&identity_mu).unwrap());
    }

    #[test]
    fn factorial_levels_commute_too() {
        // Tail witness: lcm(6) = 60 is not 0 mod 5!, so append a zero.
        let mut ints: Vec<BigInt> = (0..=6u64).map(lcm_upto).collect();
        ints.push(BigInt::zero());
        let series = MahlerSeries::from_int_coeffs(LimitKind::Factorial, 4, &ints).unwrap();
        let levels: Vec<LevelFn> = (1..=4)
            .map(|n| {
                level_restrict(LimitKind::Factorial, 4, |x| mahler_eval(&series, x), n).unwrap()
            })
            .collect();
        assert!(check_inverse_system(&levels).unwrap());
        for lvl in &levels {
            assert!(is_cp_level(lvl).unwrap().holds());
        }
    }

    #[test]
    fn one_lipschitz_examples() {
        let ident = level_restrict(LimitKind::BaseP(2), 2, |x| Ok(x.clone()), 2).unwrap();
        assert!(check_one_lipschitz(&ident).unwrap());
        let bad = LevelFn {
            kind: LimitKind::BaseP(2),
            source_level: 2,
            level: 2,
            table: FiniteFn::new(4, 4, vec![0, 1, 1, 0]).unwrap(),
        };
        assert!(!check_one_lipschitz(&bad).unwrap());
        let factorial = level_restrict(LimitKind::Factorial, 3, |x| Ok(x.clone()), 2).unwrap();
        assert_eq!(check_one_lipschitz(&factorial).err(), Some(LimitsError::BasePOnly));
    }

    #[test]
    fn cp_implies_one_lipschitz_at_small_levels() {
        for n in 1..=2u32 {
            let size = 2u64.pow(n);
            for f in crate::finite_cp::enumerate_cp(size, size).unwrap() {
                let lvl = LevelFn {
                    kind: LimitKind::BaseP(2),
                    source_level: n,
                    level: n,
                    table: f,
                };
                if is_cp_level(&lvl).unwrap().holds() {
                    assert!(check_one_lipschitz(&lvl).unwrap());
                }
            }
        }
    }

    #[test]
    fn non_cp_series_coefficients() {
        let series = non_cp_series(2, 9, 3).unwrap();
        assert_eq!(series.coeffs()[4].value(), BigInt::from(2));
        assert_eq!(series.coeffs()[2].value(), BigInt::one());
        let series3 = non_cp_series(3, 12, 2).unwrap();
        assert_eq!(series3.coeffs()[9].value(), BigInt::from(3));
        assert!(!check_divisible(&series3.coeffs()[2].value(), 2));
    }

    fn check_divisible(v: &BigInt, by: u64) -> bool {
        v.mod_floor(&BigInt::from(by)).is_zero()
    }

    #[test]
    fn non_cp_series_level_table_is_not_cp() {
        // With enough terms for the tail witness at precision 3, level 2
        // evaluates to x + C(x,2) + C(x,3) mod 4 = [0, 1, 3, 3]: not CP.
        let series = non_cp_series(2, 17, 3).unwrap();
        let lvl = level_restrict(LimitKind::BaseP(2), 3, |x| mahler_eval(&series, x), 2).unwrap();
        assert_eq!(lvl.table().table(), &[0, 1, 3, 3]);
        assert_eq!(
            is_cp_level(&lvl).unwrap(),
            CpCheck::Violated { x: 0, y: 2 }
        );
    }

    #[test]
    fn lcm_divisibility_matches_valuation() {
        // In Z/p^nZ, lcm(k) divides x exactly when nu_p(k) <= Val(x), with
        // both sides clamped at the level since p^j for j >= n acts as 0.
        for p in [2u64, 3] {
            for n in 1..=4u32 {
                let ring = p.pow(n);
                for k in 1..=16u64 {
                    let lcm_k =
                        u64::try_from(lcm_upto(k).mod_floor(&BigInt::from(ring))).unwrap();
                    let nu = nu_p(p, k).unwrap().min(n);
                    for x in 0..ring {
                        let lhs = divides_in_ring(ring, lcm_k, x);
                        let v = LimitApprox::from_int(LimitKind::BaseP(p), n, &BigInt::from(x))
                            .unwrap()
                            .val()
                            .certified()
                            .min(n);
                        assert_eq!(lhs, nu <= v, "p={p} n={n} k={k} x={x}");
                    }
                }
            }
        }
    }

    #[test]
    fn text_round_trip() {
        let x = base2(4, 11);
        assert_eq!(x.to_text(), "2 4\n1 1 0 1\n");
        assert_eq!(LimitApprox::parse(&x.to_text()).unwrap(), x);
        let y = fact(3, 5);
        assert_eq!(y.to_text(), "! 3\n1 2 0\n");
        assert_eq!(LimitApprox::parse(&y.to_text()).unwrap(), y);
        let series = non_cp_series(2, 5, 3).unwrap();
        assert_eq!(MahlerSeries::parse(&series.to_text()).unwrap(), series);
        assert!(LimitApprox::parse("2 4\n1 1\n").is_err());
        assert!(LimitApprox::parse("4 2\n1 1\n").is_err());
    }
}
