//! Command-line front end for the congru library.
//!
//! Every subcommand is batch-oriented with stable text output so runs can
//! be scripted and diffed. Exit status: 0 when the property holds or the
//! construction succeeded, 1 when a checked property fails (a witness is
//! printed), 2 for usage or precondition errors.

use clap::{Parser, Subcommand};
use congru::finite_cp::{self, CpCheck, FiniteFn};
use congru::lattices::{self, CpPolynomial, EPSet, MembershipOutcome};
use congru::lifting::{self, LiftOutcome, NatPrefix};
use congru::limits::{self, LevelFn, LimitApprox, LimitKind, MahlerSeries};
use congru::newton::{self, LcmDivisibility, NewtonCoeffs};
use num_bigint::BigInt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "congru",
    version,
    about = "Exact congruence-preservation toolkit: finite-ring checks, CRT lifts, \
             Newton/Mahler coefficients, truncated p-adic arithmetic, periodic-set lattices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a function table for congruence preservation.
    CheckFinite {
        /// Table file: first line `n m`, second line n entries in [0, m).
        table: PathBuf,
    },
    /// Compute the binomial-basis coefficients of a congruence preserving
    /// table (requires m | n, m >= 2); one coefficient per line.
    Represent { table: PathBuf },
    /// Run the inductive CRT lift of a table out to argument T.
    Lift {
        table: PathBuf,
        /// Last argument to lift to; the prefix has T+1 values.
        #[arg(long = "T")]
        t_max: u64,
        /// Optional consistency assertion against the table header.
        #[arg(long)]
        n: Option<u64>,
        /// Optional consistency assertion against the table header.
        #[arg(long)]
        m: Option<u64>,
    },
    /// Lift a table f : Z/nZ -> Z/mZ to g : Z/rZ -> Z/sZ through a prefix.
    LiftFinite {
        table: PathBuf,
        #[arg(long)]
        r: u64,
        #[arg(long)]
        s: u64,
    },
    /// Newton (forward difference) coefficients of a value prefix file.
    Coeffs {
        /// Prefix file: one integer per line.
        prefix: PathBuf,
    },
    /// Report the least k with lcm(k) not dividing coefficient a_k.
    CheckLcm {
        /// Coefficient file: one integer per line.
        coeffs: PathBuf,
    },
    /// Exact values of the floor-of-e-times-factorial function family.
    Exemplar {
        #[command(subcommand)]
        which: ExemplarCmd,
    },
    /// Truncated p-adic / factorial-base digit arithmetic.
    Padic {
        #[command(subcommand)]
        cmd: PadicCmd,
    },
    /// Eventually periodic subsets of Z and lattice membership.
    Lattice {
        #[command(subcommand)]
        cmd: LatticeCmd,
    },
}

#[derive(Subcommand)]
enum ExemplarCmd {
    /// x = 0 -> 1, otherwise floor(e * x!).
    EFact {
        #[arg(long)]
        x: u64,
    },
    /// floor(e^(1/a) * a^x * x!) for integer a >= 2.
    EaFact {
        #[arg(long)]
        a: i64,
        #[arg(long)]
        x: u64,
    },
}

#[derive(Subcommand)]
enum PadicCmd {
    /// Digit vector of an integer; header `p N` or `! N`, digits LSD first.
    FromInt {
        /// Prime base for base-p digits.
        #[arg(long, conflicts_with = "factorial")]
        p: Option<u64>,
        /// Use factorial-base digits instead of base-p.
        #[arg(long)]
        factorial: bool,
        #[arg(long)]
        precision: u32,
        #[arg(long, allow_hyphen_values = true)]
        z: String,
    },
    /// Add two digit-vector files of matching shape.
    Add { x: PathBuf, y: PathBuf },
    /// Subtract two digit-vector files of matching shape.
    Sub { x: PathBuf, y: PathBuf },
    /// Multiply two digit-vector files of matching shape.
    Mul { x: PathBuf, y: PathBuf },
    /// Valuation of a digit vector: a number, or `>= B` at full precision.
    Val { x: PathBuf },
    /// Evaluate a truncated Mahler series file at an integer point.
    MahlerEval {
        series: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        z: String,
    },
    /// Tabulate the level restrictions of a series and check each for
    /// congruence preservation.
    Levels {
        series: PathBuf,
        #[arg(long)]
        max_level: Option<u32>,
    },
    /// Check that all inverse-system squares of the level tables commute.
    CheckSystem {
        series: PathBuf,
        #[arg(long)]
        max_level: Option<u32>,
    },
    /// Emit the classical continuous-but-not-CP series with
    /// a_k = p^(nu_p(k)-1); with --levels analyze its level tables instead.
    NonCpSeries {
        #[arg(long)]
        p: u64,
        /// Number of stored coefficients.
        #[arg(long)]
        count: usize,
        #[arg(long)]
        precision: u32,
        #[arg(long)]
        levels: bool,
    },
}

#[derive(Subcommand)]
enum LatticeCmd {
    /// Exact preimage of a set under a congruence preserving polynomial
    /// given by comma-separated Newton coefficients.
    Preimage {
        /// Newton coefficients, e.g. `0,1,2` for x^2.
        #[arg(long, allow_hyphen_values = true)]
        poly: String,
        set: PathBuf,
        /// Use the eventual-regime pipeline (required for sets that are
        /// not purely periodic).
        #[arg(long)]
        eventual: bool,
    },
    /// Decide membership of a candidate in the lattice generated by a
    /// recognizable set under decrement.
    Member {
        generator: PathBuf,
        candidate: PathBuf,
    },
    /// Certify nonmembership via negative elements, for generators with
    /// finitely many negatives.
    CertifyNeg {
        generator: PathBuf,
        candidate: PathBuf,
    },
    /// Evaluate the union-of-intersections preimage expression and compare
    /// it with the direct residue preimage.
    PreimageViaTranslates {
        #[arg(long, allow_hyphen_values = true)]
        poly: String,
        set: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

const PASS: ExitCode = ExitCode::SUCCESS;
const FAIL: ExitCode = ExitCode::FAILURE;

fn run(command: Command) -> Result<ExitCode, String> {
    match command {
        Command::CheckFinite { table } => {
            let f = read_table(&table)?;
            match finite_cp::is_cp_finite(&f) {
                CpCheck::Preserving => {
                    println!("CP: yes");
                    Ok(PASS)
                }
                CpCheck::Violated { x, y } => {
                    println!("CP: no");
                    println!("WITNESS x={x} y={y}");
                    Ok(FAIL)
                }
            }
        }
        Command::Represent { table } => {
            let f = read_table(&table)?;
            match finite_cp::represent_cp(&f) {
                Ok(coeffs) => {
                    for a in coeffs.coeffs() {
                        println!("{a}");
                    }
                    Ok(PASS)
                }
                Err(finite_cp::FiniteCpError::NotCongruencePreserving { x, y }) => {
                    println!("CP: no");
                    println!("WITNESS x={x} y={y}");
                    Ok(FAIL)
                }
                Err(e) => Err(e.to_string()),
            }
        }
        Command::Lift { table, t_max, n, m } => {
            let f = read_table(&table)?;
            if let Some(n) = n {
                if n != f.source_modulus() {
                    return Err(format!(
                        "--n {n} does not match table source modulus {}",
                        f.source_modulus()
                    ));
                }
            }
            if let Some(m) = m {
                if m != f.target_modulus() {
                    return Err(format!(
                        "--m {m} does not match table target modulus {}",
                        f.target_modulus()
                    ));
                }
            }
            let report = lifting::lift_prefix(&f, t_max).map_err(|e| e.to_string())?;
            match report.outcome {
                LiftOutcome::Success(prefix) => {
                    print!("{}", prefix.to_text());
                    Ok(PASS)
                }
                LiftOutcome::Infeasible {
                    step,
                    conflict: (i, j),
                    system,
                } => {
                    println!("INFEASIBLE step={step}");
                    println!("CONFLICT {}", system.equations()[i]);
                    println!("CONFLICT {}", system.equations()[j]);
                    Ok(FAIL)
                }
            }
        }
        Command::LiftFinite { table, r, s } => {
            let f = read_table(&table)?;
            let g = lifting::lift_between_finite(&f, r, s).map_err(|e| e.to_string())?;
            print!("{}", g.to_text());
            Ok(PASS)
        }
        Command::Coeffs { prefix } => {
            let p = read_prefix(&prefix)?;
            print!("{}", newton::newton_coeffs(&p).to_text());
            Ok(PASS)
        }
        Command::CheckLcm { coeffs } => {
            let c = read_coeffs(&coeffs)?;
            match newton::check_lcm_divisibility(&c) {
                LcmDivisibility::Ok => {
                    println!("OK");
                    Ok(PASS)
                }
                LcmDivisibility::Violation { k, coeff, lcm } => {
                    println!("VIOLATION k={k} coeff={coeff} lcm={lcm}");
                    Ok(FAIL)
                }
            }
        }
        Command::Exemplar { which } => {
            match which {
                ExemplarCmd::EFact { x } => println!("{}", newton::exemplar_floor_e_fact(x)),
                ExemplarCmd::EaFact { a, x } => println!(
                    "{}",
                    newton::exemplar_floor_ea_fact(a, x).map_err(|e| e.to_string())?
                ),
            }
            Ok(PASS)
        }
        Command::Padic { cmd } => run_padic(cmd),
        Command::Lattice { cmd } => run_lattice(cmd),
    }
}

fn run_padic(cmd: PadicCmd) -> Result<ExitCode, String> {
    match cmd {
        PadicCmd::FromInt {
            p,
            factorial,
            precision,
            z,
        } => {
            let kind = match (p, factorial) {
                (Some(p), false) => LimitKind::BaseP(p),
                (None, true) => LimitKind::Factorial,
                _ => return Err("exactly one of --p and --factorial is required".into()),
            };
            let z: BigInt = z.parse().map_err(|_| format!("bad integer {z:?}"))?;
            let v = LimitApprox::from_int(kind, precision, &z).map_err(|e| e.to_string())?;
            print!("{}", v.to_text());
            Ok(PASS)
        }
        PadicCmd::Add { x, y } => padic_binop(&x, &y, LimitApprox::add),
        PadicCmd::Sub { x, y } => padic_binop(&x, &y, LimitApprox::sub),
        PadicCmd::Mul { x, y } => padic_binop(&x, &y, LimitApprox::mul),
        PadicCmd::Val { x } => {
            let v = read_digits(&x)?;
            println!("{}", v.val());
            Ok(PASS)
        }
        PadicCmd::MahlerEval { series, z } => {
            let s = read_series(&series)?;
            let z: BigInt = z.parse().map_err(|_| format!("bad integer {z:?}"))?;
            let x =
                LimitApprox::from_int(s.kind(), s.precision(), &z).map_err(|e| e.to_string())?;
            let out = limits::mahler_eval(&s, &x).map_err(|e| e.to_string())?;
            print!("{}", out.to_text());
            Ok(PASS)
        }
        PadicCmd::Levels { series, max_level } => {
            let s = read_series(&series)?;
            let levels = tabulate_levels(&s, max_level)?;
            report_levels(&levels)
        }
        PadicCmd::CheckSystem { series, max_level } => {
            let s = read_series(&series)?;
            let levels = tabulate_levels(&s, max_level)?;
            let ok = limits::check_inverse_system(&levels).map_err(|e| e.to_string())?;
            println!("COMMUTES: {}", if ok { "yes" } else { "no" });
            Ok(if ok { PASS } else { FAIL })
        }
        PadicCmd::NonCpSeries {
            p,
            count,
            precision,
            levels,
        } => {
            let s = limits::non_cp_series(p, count, precision).map_err(|e| e.to_string())?;
            if levels {
                let tables = tabulate_levels(&s, None)?;
                report_levels(&tables)
            } else {
                print!("{}", s.to_text());
                Ok(PASS)
            }
        }
    }
}

fn padic_binop(
    x: &Path,
    y: &Path,
    op: fn(&LimitApprox, &LimitApprox) -> Result<LimitApprox, limits::LimitsError>,
) -> Result<ExitCode, String> {
    let (a, b) = (read_digits(x)?, read_digits(y)?);
    let out = op(&a, &b).map_err(|e| e.to_string())?;
    print!("{}", out.to_text());
    Ok(PASS)
}

/// Levels 1..=max, defaulting to the highest level the precision certifies.
fn tabulate_levels(series: &MahlerSeries, max_level: Option<u32>) -> Result<Vec<LevelFn>, String> {
    let certified = match series.kind() {
        LimitKind::BaseP(_) => series.precision(),
        LimitKind::Factorial => series.precision() + 1,
    };
    let max = max_level.unwrap_or(certified);
    (1..=max)
        .map(|n| {
            limits::level_restrict(
                series.kind(),
                series.precision(),
                |x| limits::mahler_eval(series, x),
                n,
            )
            .map_err(|e| e.to_string())
        })
        .collect()
}

fn report_levels(levels: &[LevelFn]) -> Result<ExitCode, String> {
    let mut all_cp = true;
    for lvl in levels {
        let row: Vec<String> = lvl.table().table().iter().map(|v| v.to_string()).collect();
        match limits::is_cp_level(lvl).map_err(|e| e.to_string())? {
            CpCheck::Preserving => {
                println!("LEVEL {}: {} CP: yes", lvl.level(), row.join(" "));
            }
            CpCheck::Violated { x, y } => {
                all_cp = false;
                println!(
                    "LEVEL {}: {} CP: no WITNESS x={x} y={y}",
                    lvl.level(),
                    row.join(" ")
                );
            }
        }
    }
    Ok(if all_cp { PASS } else { FAIL })
}

fn run_lattice(cmd: LatticeCmd) -> Result<ExitCode, String> {
    match cmd {
        LatticeCmd::Preimage {
            poly,
            set,
            eventual,
        } => {
            let f = parse_poly(&poly)?;
            let l = read_set(&set)?;
            let pre = if eventual {
                lattices::preimage_eventual(&f, &l)
            } else {
                lattices::preimage_recognizable(&f, &l)
            }
            .map_err(|e| e.to_string())?;
            print!("{}", pre.to_text());
            Ok(PASS)
        }
        LatticeCmd::Member {
            generator,
            candidate,
        } => {
            let l = read_set(&generator)?;
            let x = read_set(&candidate)?;
            match lattices::lattice_membership(&l, &x).map_err(|e| e.to_string())? {
                MembershipOutcome::Member { certificate } => {
                    println!("MEMBER");
                    println!("CERTIFICATE {certificate}");
                    Ok(PASS)
                }
                MembershipOutcome::NotMember { reason } => {
                    println!("NOT MEMBER");
                    println!("REASON {reason}");
                    Ok(FAIL)
                }
            }
        }
        LatticeCmd::CertifyNeg {
            generator,
            candidate,
        } => {
            let l = read_set(&generator)?;
            let x = read_set(&candidate)?;
            match lattices::certify_nonmembership_negatives(&l, &x).map_err(|e| e.to_string())? {
                Some(cert) => {
                    println!("NOT IN LATTICE");
                    println!("{cert}");
                    Ok(PASS)
                }
                None => {
                    println!("INCONCLUSIVE");
                    Ok(FAIL)
                }
            }
        }
        LatticeCmd::PreimageViaTranslates { poly, set } => {
            let f = parse_poly(&poly)?;
            let l = read_set(&set)?;
            let expr = lattices::preimage_via_translates(&f, &l).map_err(|e| e.to_string())?;
            let direct = lattices::preimage_recognizable(&f, &l).map_err(|e| e.to_string())?;
            print!("{}", expr.to_text());
            let matches = expr == direct;
            println!("MATCHES-PREIMAGE: {}", if matches { "yes" } else { "no" });
            Ok(if matches { PASS } else { FAIL })
        }
    }
}

fn read_file(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn read_table(path: &Path) -> Result<FiniteFn, String> {
    FiniteFn::parse(&read_file(path)?).map_err(|e| e.to_string())
}

fn read_prefix(path: &Path) -> Result<NatPrefix, String> {
    NatPrefix::parse(&read_file(path)?).map_err(|e| e.to_string())
}

fn read_coeffs(path: &Path) -> Result<NewtonCoeffs, String> {
    NewtonCoeffs::parse(&read_file(path)?).map_err(|e| e.to_string())
}

fn read_digits(path: &Path) -> Result<LimitApprox, String> {
    LimitApprox::parse(&read_file(path)?).map_err(|e| e.to_string())
}

fn read_series(path: &Path) -> Result<MahlerSeries, String> {
    MahlerSeries::parse(&read_file(path)?).map_err(|e| e.to_string())
}

fn read_set(path: &Path) -> Result<EPSet, String> {
    EPSet::parse(&read_file(path)?).map_err(|e| e.to_string())
}

fn parse_poly(spec: &str) -> Result<CpPolynomial, String> {
    let coeffs: Result<Vec<BigInt>, _> = spec
        .split(',')
        .map(|tok| tok.trim().parse::<BigInt>())
        .collect();
    let coeffs = coeffs.map_err(|_| format!("bad coefficient list {spec:?}"))?;
    CpPolynomial::new(coeffs).map_err(|e| e.to_string())
}
