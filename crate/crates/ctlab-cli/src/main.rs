//! Command-line front end for the `ctlab` library.
//!
//! Every subcommand is a thin wrapper over one library entry point; the
//! binary holds no state of its own.  Exit codes are uniform across
//! subcommands: 0 for success (or a passing check), 1 for a semantic
//! failure (a False verdict or a reported violation), 2 for an undecided
//! verdict, and 3 for usage errors, including malformed inputs.

use std::fs;
use std::io::Read as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use ctlab::evaluation::{check_ct_axioms, eval_sentence, Budget, StandardModelOracle, Verdict};
use ctlab::goedel::{decode_formula, decode_term, encode_formula, encode_term, CodedSeq, GoedelCode};
use ctlab::rank::{
    check_rank_trajectory, ext_rank_trajectory, gamma_sequence_ext, gamma_sequence_p, p_rank,
    rank_trajectory_p, utb_rank, Rank, TrajectoryClass, TypeSpec,
};
use ctlab::satclass::{build_satisfaction, parse_fragment, verify_theta_fragment};
use ctlab::stopdisj::{build_stop_disjunction, sweep_stop_property, StopDisjSpec};
use ctlab::syntax::{build_eta, parse_formula, parse_term, syntactic_depth};
use ctlab::Formula;

const EXIT_PASS: u8 = 0;
const EXIT_FAIL: u8 = 1;
const EXIT_UNDECIDED: u8 = 2;
const EXIT_USAGE: u8 = 3;

/// Desk-scale toolkit for arithmetized syntax, bounded truth evaluation,
/// stopping disjunctions, rank trajectories, and satisfaction classes.
#[derive(Parser)]
#[command(name = "ctlab", version, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a formula (or term) and print its canonical rendering.
    Parse {
        /// Treat the input as a term instead of a formula.
        #[arg(long)]
        term: bool,
        /// Input text; read from stdin when omitted.
        input: Option<String>,
    },
    /// Parse a formula (or term) and print its code in decimal.
    Encode {
        /// Treat the input as a term instead of a formula.
        #[arg(long)]
        term: bool,
        /// Input text; read from stdin when omitted.
        input: Option<String>,
    },
    /// Decode a decimal code back to syntax (or to a sequence of codes).
    Decode {
        /// Treat the code as a sequence code and print one item per line.
        #[arg(long)]
        seq: bool,
        /// Decimal code; read from stdin when omitted.
        code: Option<String>,
    },
    /// Evaluate one sentence over the standard model; exits 0/1/2 for
    /// True/False/Unknown.
    Eval {
        #[command(flatten)]
        budget: BudgetArgs,
        /// The sentence; read from stdin when omitted.
        sentence: Option<String>,
    },
    /// Check the compositional truth axioms over a fragment file (one
    /// formula per line); exits 0 iff no violation is found.
    CheckCt {
        #[command(flatten)]
        budget: BudgetArgs,
        /// File with one formula per line (# starts a comment).
        file: PathBuf,
    },
    /// Print the padded identity of the given size.
    Eta {
        /// Print the syntactic depth of the formula instead of the formula.
        #[arg(long)]
        depth: bool,
        /// Padding size; must be at least 1.
        padding: u64,
    },
    /// Build or exhaustively verify disjunctions with stopping conditions.
    Stopdisj {
        #[command(subcommand)]
        cmd: StopdisjCmd,
    },
    /// Compute ranks: ladder, inductive-check, or pinned-extension style.
    Rank {
        #[command(subcommand)]
        cmd: RankCmd,
    },
    /// Print a self-referential formula sequence and its rank trajectory.
    Gamma {
        #[command(subcommand)]
        cmd: GammaCmd,
    },
    /// Build a finite satisfaction class from a fragment file and verify it;
    /// exits 0 iff the verification reports no violation.
    Satbuild {
        /// Sectioned fragment file ([COMP], [PRESERVE], [BASE], [A], [ETA]).
        file: PathBuf,
    },
}

#[derive(Subcommand)]
enum StopdisjCmd {
    /// Build the disjunction from two files of formulas (one per line):
    /// the stopping conditions and the payloads.
    Build {
        /// File of stopping-condition sentences, one per line.
        alphas: PathBuf,
        /// File of payload formulas, one per line.
        betas: PathBuf,
        /// Lower end of the active span (the upper end is the last entry).
        #[arg(long, default_value_t = 0)]
        lo: u64,
    },
    /// Sweep every propositional assignment to marker atoms over the span
    /// 0..=N and verify the collapse property on each.
    Verify {
        /// Span upper end N; the sweep covers 4^(N+1) assignments.
        #[arg(long)]
        exhaustive: u64,
    },
}

#[derive(Args)]
struct BudgetArgs {
    /// Largest witness tried for an existential quantifier.
    #[arg(long, default_value_t = 64)]
    witness_bound: u64,
    /// Maximum number of evaluation steps.
    #[arg(long, default_value_t = 1_000_000)]
    node_budget: u64,
}

impl BudgetArgs {
    fn budget(&self) -> Budget {
        Budget::new(self.witness_bound, self.node_budget)
    }
}

/// Flags selecting the ladder of one-variable formulas a ladder rank is
/// measured against.
#[derive(Args)]
struct LadderArgs {
    /// File with one ladder formula per line; defaults to the threshold
    /// ladder when omitted.
    #[arg(long)]
    type_file: Option<PathBuf>,
    /// Number of rungs of the built-in threshold ladder.
    #[arg(long, default_value_t = 32)]
    thresholds: u64,
    /// Declare the ladder in --type-file monotone (rung i+1 implies rung i).
    #[arg(long)]
    monotone: bool,
}

impl LadderArgs {
    fn spec(&self) -> Result<TypeSpec, String> {
        match &self.type_file {
            None => Ok(TypeSpec::thresholds(self.thresholds)),
            Some(path) => {
                let phis = read_formula_file(path)?;
                TypeSpec::new(phis, self.monotone).map_err(|e| e.to_string())
            }
        }
    }
}

#[derive(Subcommand)]
enum RankCmd {
    /// Ladder rank of a one-variable formula over the standard model.
    P {
        #[command(flatten)]
        ladder: LadderArgs,
        /// Largest element probed for membership in the extension.
        #[arg(long, default_value_t = 256)]
        domain_bound: u64,
        #[command(flatten)]
        budget: RankBudgetArgs,
        /// The formula; read from stdin when omitted.
        formula: Option<String>,
    },
    /// Inductive-check rank of a one-variable formula.
    Utb {
        /// Bound on the coded sequences quantified inside each check.
        #[arg(long, default_value_t = 64)]
        check_bound: u64,
        /// Number of checks walked before reporting a lower bound.
        #[arg(long, default_value_t = 8)]
        max_checks: u64,
        #[command(flatten)]
        budget: RankBudgetArgs,
        /// The formula; read from stdin when omitted.
        formula: Option<String>,
    },
    /// Rank trajectory of the pinned-extension sequence given the padding
    /// sizes and the pinned elements.
    Ext {
        /// Comma-separated padding sizes, all at least 1.
        #[arg(long, value_delimiter = ',', required = true)]
        a_seq: Vec<u64>,
        /// Comma-separated pinned elements, strictly decreasing.
        #[arg(long, value_delimiter = ',', required = true)]
        b_seq: Vec<u64>,
        /// Span upper end; defaults to the largest the sequences allow.
        #[arg(long)]
        span: Option<u64>,
    },
}

/// The rank walks evaluate many sentences per subject, so their default
/// budget is larger than the single-sentence default.
#[derive(Args)]
struct RankBudgetArgs {
    /// Largest witness tried for an existential quantifier.
    #[arg(long, default_value_t = 512)]
    witness_bound: u64,
    /// Maximum number of evaluation steps per judgment.
    #[arg(long, default_value_t = 5_000_000)]
    node_budget: u64,
}

impl RankBudgetArgs {
    fn oracle(&self) -> StandardModelOracle {
        StandardModelOracle::new(Budget::new(self.witness_bound, self.node_budget))
    }
}

#[derive(Subcommand)]
enum GammaCmd {
    /// The ladder-style sequence: formulas, trajectory, classification.
    P {
        /// Number of self-referential steps.
        #[arg(long)]
        d: u64,
        #[command(flatten)]
        ladder: LadderArgs,
        /// Largest element probed for membership in the extension.
        #[arg(long, default_value_t = 256)]
        domain_bound: u64,
        #[command(flatten)]
        budget: RankBudgetArgs,
    },
    /// The pinned-extension sequence; adds the trajectory when the pinned
    /// elements are given.
    Ext {
        /// Number of self-referential steps.
        #[arg(long)]
        d: u64,
        /// Comma-separated padding sizes, all at least 1.
        #[arg(long, value_delimiter = ',', required = true)]
        a_seq: Vec<u64>,
        /// Comma-separated pinned elements, strictly decreasing.
        #[arg(long, value_delimiter = ',')]
        b_seq: Vec<u64>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_PASS,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

/// Dispatch one parsed invocation.  `Err` means a usage-level problem
/// (unreadable file, malformed input, out-of-range parameter); semantic
/// outcomes are encoded in the `Ok` exit code.
fn run(cli: Cli) -> Result<u8, String> {
    match cli.cmd {
        Cmd::Parse { term, input } => {
            let text = read_input(input)?;
            if term {
                println!("{}", parse_term(&text).map_err(|e| e.to_string())?);
            } else {
                println!("{}", parse_formula(&text).map_err(|e| e.to_string())?);
            }
            Ok(EXIT_PASS)
        }
        Cmd::Encode { term, input } => {
            let text = read_input(input)?;
            let code = if term {
                encode_term(&parse_term(&text).map_err(|e| e.to_string())?)
            } else {
                encode_formula(&parse_formula(&text).map_err(|e| e.to_string())?)
            };
            println!("{code}");
            Ok(EXIT_PASS)
        }
        Cmd::Decode { seq, code } => {
            let text = read_input(code)?;
            let code: GoedelCode = text
                .trim()
                .parse()
                .map_err(|e| format!("bad decimal code: {e}"))?;
            if seq {
                let decoded = CodedSeq::decode(&code).map_err(|e| e.to_string())?;
                for item in decoded.items() {
                    println!("{item}");
                }
            } else if let Ok(f) = decode_formula(&code) {
                println!("{f}");
            } else {
                let t = decode_term(&code)
                    .map_err(|e| format!("not a formula or term code: {e}"))?;
                println!("{t}");
            }
            Ok(EXIT_PASS)
        }
        Cmd::Eval { budget, sentence } => {
            let text = read_input(sentence)?;
            let s = parse_formula(&text).map_err(|e| e.to_string())?;
            let verdict = eval_sentence(&s, budget.budget()).map_err(|e| e.to_string())?;
            println!("{verdict}");
            Ok(match verdict {
                Verdict::True => EXIT_PASS,
                Verdict::False => EXIT_FAIL,
                Verdict::Unknown => EXIT_UNDECIDED,
            })
        }
        Cmd::CheckCt { budget, file } => {
            let fragment = read_formula_file(&file)?;
            let oracle = StandardModelOracle::new(budget.budget());
            let report = check_ct_axioms(&oracle, &fragment, &[]);
            print!("{report}");
            Ok(if report.is_clean() { EXIT_PASS } else { EXIT_FAIL })
        }
        Cmd::Eta { depth, padding } => {
            let eta = build_eta(padding).map_err(|e| e.to_string())?;
            if depth {
                println!("{}", syntactic_depth(&eta));
            } else {
                println!("{eta}");
            }
            Ok(EXIT_PASS)
        }
        Cmd::Stopdisj { cmd } => run_stopdisj(cmd),
        Cmd::Rank { cmd } => run_rank(cmd),
        Cmd::Gamma { cmd } => run_gamma(cmd),
        Cmd::Satbuild { file } => {
            let text = fs::read_to_string(&file)
                .map_err(|e| format!("cannot read {}: {e}", file.display()))?;
            let gamma = parse_fragment(&text).map_err(|e| e.to_string())?;
            match build_satisfaction(&gamma) {
                Err(e) => {
                    // The fragment parsed but cannot be satisfied: that is a
                    // semantic verdict about the input, not a usage error.
                    println!("UNSATISFIABLE: {e}");
                    Ok(EXIT_FAIL)
                }
                Ok(assignment) => {
                    print!("{assignment}");
                    let report = verify_theta_fragment(&assignment, &gamma);
                    print!("{report}");
                    Ok(if report.is_clean() { EXIT_PASS } else { EXIT_FAIL })
                }
            }
        }
    }
}

fn run_stopdisj(cmd: StopdisjCmd) -> Result<u8, String> {
    match cmd {
        StopdisjCmd::Build { alphas, betas, lo } => {
            let alphas = read_formula_file(&alphas)?;
            let betas = read_formula_file(&betas)?;
            let hi = alphas
                .len()
                .checked_sub(1)
                .ok_or_else(|| "need at least one stopping condition".to_string())?;
            let spec = StopDisjSpec::new(alphas, betas, lo, hi as u64)
                .map_err(|e| e.to_string())?;
            println!("{}", build_stop_disjunction(&spec));
            Ok(EXIT_PASS)
        }
        StopdisjCmd::Verify { exhaustive } => {
            if exhaustive > 12 {
                return Err(format!(
                    "span end {exhaustive} asks for 4^{} assignments; the exhaustive \
                     sweep is capped at 12",
                    exhaustive + 1
                ));
            }
            let report = sweep_stop_property(exhaustive);
            println!("assignments: {}", report.assignments);
            println!("collapse holds: {}", report.holds);
            println!("all-stops-false cases: {}", report.all_alpha_false_cases);
            println!(
                "all-stops-false evaluated false: {}",
                report.all_alpha_false_evaluated_false
            );
            if let Some((a_bits, b_bits)) = &report.first_failure {
                println!("first failure: stops {a_bits:?}, payloads {b_bits:?}");
            }
            Ok(if report.all_hold() { EXIT_PASS } else { EXIT_FAIL })
        }
    }
}

fn run_rank(cmd: RankCmd) -> Result<u8, String> {
    match cmd {
        RankCmd::P {
            ladder,
            domain_bound,
            budget,
            formula,
        } => {
            let spec = ladder.spec()?;
            let phi = parse_formula(&read_input(formula)?).map_err(|e| e.to_string())?;
            let rank = p_rank(&phi, &spec, &budget.oracle(), domain_bound)
                .map_err(|e| e.to_string())?;
            println!("{rank}");
            Ok(EXIT_PASS)
        }
        RankCmd::Utb {
            check_bound,
            max_checks,
            budget,
            formula,
        } => {
            let gamma = parse_formula(&read_input(formula)?).map_err(|e| e.to_string())?;
            let rank = utb_rank(&gamma, &budget.oracle(), check_bound, max_checks)
                .map_err(|e| e.to_string())?;
            println!("{rank}");
            Ok(EXIT_PASS)
        }
        RankCmd::Ext { a_seq, b_seq, span } => {
            let span = span.unwrap_or_else(|| (a_seq.len() as u64).saturating_sub(2));
            let ranks =
                ext_rank_trajectory(&a_seq, &b_seq, span).map_err(|e| e.to_string())?;
            print_trajectory(&ranks);
            Ok(EXIT_PASS)
        }
    }
}

fn run_gamma(cmd: GammaCmd) -> Result<u8, String> {
    match cmd {
        GammaCmd::P {
            d,
            ladder,
            domain_bound,
            budget,
        } => {
            let spec = ladder.spec()?;
            let gammas = gamma_sequence_p(&spec, d).map_err(|e| e.to_string())?;
            print_formula_list(&gammas);
            let ranks = rank_trajectory_p(&spec, d, &budget.oracle(), domain_bound)
                .map_err(|e| e.to_string())?;
            print_trajectory(&ranks);
            print_classification(check_rank_trajectory(&ranks));
            Ok(EXIT_PASS)
        }
        GammaCmd::Ext { d, a_seq, b_seq } => {
            let gammas = gamma_sequence_ext(&a_seq, d).map_err(|e| e.to_string())?;
            print_formula_list(&gammas);
            if !b_seq.is_empty() {
                let ranks =
                    ext_rank_trajectory(&a_seq, &b_seq, d).map_err(|e| e.to_string())?;
                print_trajectory(&ranks);
                print_classification(check_rank_trajectory(&ranks));
            }
            Ok(EXIT_PASS)
        }
    }
}

/// Read the argument if present, stdin to end-of-file otherwise.
fn read_input(arg: Option<String>) -> Result<String, String> {
    match arg {
        Some(text) => Ok(text),
        None => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| format!("cannot read stdin: {e}"))?;
            Ok(buf)
        }
    }
}

/// Parse a file with one formula per line; blank lines and lines starting
/// with `#` are skipped.
fn read_formula_file(path: &PathBuf) -> Result<Vec<Formula>, String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let f = parse_formula(line)
            .map_err(|e| format!("{}:{}: {e}", path.display(), i + 1))?;
        out.push(f);
    }
    Ok(out)
}

/// Print one formula per level.  The later levels of a self-referential
/// sequence can unfold to enormous trees, so oversized entries are shown
/// as a shared-node summary (the `Debug` rendering) instead of full text.
fn print_formula_list(gammas: &[Formula]) {
    for (i, g) in gammas.iter().enumerate() {
        println!("level {i}: {g:?}");
    }
}

fn print_trajectory(ranks: &[Rank]) {
    for (i, r) in ranks.iter().enumerate() {
        println!("step {i}: {r}");
    }
}

fn print_classification(class: TrajectoryClass) {
    match class {
        TrajectoryClass::ReachesMax { index } => {
            println!("classification: reaches max at step {index}");
        }
        TrajectoryClass::StrictlyIncreasing => {
            println!("classification: strictly increasing");
        }
        TrajectoryClass::Violation { index } => {
            println!("classification: violation at step {index}");
        }
    }
}
