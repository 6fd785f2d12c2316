//! Exact arithmetic for congruence preserving functions.
//!
//! A function `f` between (semi)rings is *congruence preserving* when
//! `x - y` divides `f(x) - f(y)` for all arguments. This crate implements
//! the machinery needed to check, construct and cross-verify such
//! functions with exact big-integer arithmetic only:
//!
//! - [`ringcore`] — residues, the generalized Chinese remainder solver for
//!   non-coprime moduli, `lcm(1..k)`, prime-power helpers and exact
//!   binomial-polynomial evaluation.
//! - [`finite_cp`] — value tables for functions `Z/nZ -> Z/mZ`, the
//!   congruence-preservation checkers, brute-force enumeration at small
//!   sizes, and the binomial-basis coefficient representation.
//! - [`lifting`] — the inductive CRT lifting engine producing prefixes of
//!   congruence preserving functions `N -> N` from finite tables, plus
//!   finite-to-finite lifts and commuting-diagram verification.
//! - [`newton`] — Newton (forward difference) coefficient extraction, the
//!   `lcm`-divisibility criterion, and exact closed forms for the
//!   floor-of-`e`-times-factorial family of non-polynomial examples.
//! - [`limits`] — truncated p-adic and factorial-base (profinite) digit
//!   arithmetic, valuations and the ultrametric, Mahler series evaluation
//!   at finite precision, and level-wise inverse-system checks.
//! - [`lattices`] — eventually periodic subsets of Z, their Boolean
//!   algebra, polynomial preimages, and the lattice-closure membership
//!   decision with explicit union-of-intersections certificates.
//!
//! All operations are pure functions over immutable values; nothing in
//! this crate holds shared mutable state, so concurrent use is
//! unrestricted.

pub mod finite_cp;
pub mod lattices;
pub mod lifting;
pub mod limits;
pub mod newton;
pub mod ringcore;

pub use finite_cp::{CpCheck, CpCoeffs, FiniteFn};
pub use lattices::{CpPolynomial, EPSet};
pub use lifting::{LiftOutcome, LiftReport, NatPrefix};
pub use limits::{LevelFn, LimitApprox, LimitKind, MahlerSeries, Valuation};
pub use newton::NewtonCoeffs;
pub use ringcore::{CongruenceSystem, GcrtOutcome, Residue};
