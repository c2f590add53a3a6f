//! The `prt` command line.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::antichain::{is_almost_antichain, AlmostAntichain, AntichainText};
use crate::coding_tree::{CodingTree, Theta};
use crate::diary::{classify, Diary};
use crate::enumeration::{
    brute_force_classes, chain_with_id, cross_check, default_depth, default_max_height,
    enumerate_diaries, seeded_antichain, two_chain_cases, two_chain_id, witness_persistence,
    ColoringReport, DiaryCatalog,
};
use crate::error::{Error, Result};
use crate::hl::{hl_micro_search, verify_witness, HlInstance, HlOutcome};
use crate::pseudotree::FinitePseudotree;
use crate::scheduler::{fairness_audit, GenericScheduler};
use crate::subtree::{a3_check, amalgamate, amalgamation_audit, random_constraints};
use crate::word::TernaryWord;

#[derive(Debug, Parser)]
#[command(
    name = "prt",
    version,
    about = "Coding trees, almost antichains and diaries of chains in the pseudotree"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Seed for every random choice
    #[arg(long, global = true, env = "PRT_SEED")]
    pub seed: Option<u64>,
    /// Write the artifact here instead of standard output
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a coding tree with its ground truth
    Gen {
        /// Number of levels
        #[arg(long, default_value_t = 64)]
        depth: usize,
    },
    /// Build and audit an almost antichain
    Antichain {
        #[arg(long, default_value_t = 12)]
        levels: usize,
    },
    /// Classify a chain of antichain coding nodes
    Classify {
        /// A `CHAIN v1` file
        #[arg(long, conflicts_with = "example")]
        chain: Option<PathBuf>,
        /// Instead, write a chain file for this 2-chain case
        #[arg(long)]
        example: Option<usize>,
        /// Antichain levels
        #[arg(long, visible_alias = "depth", default_value_t = 24)]
        levels: usize,
    },
    /// Enumerate diaries and cross-check them against brute force
    Enumerate {
        #[arg(long, default_value_t = 2)]
        p: usize,
        /// Antichain levels (default depends on p)
        #[arg(long, visible_alias = "levels")]
        depth: Option<usize>,
        /// Height bound for candidate diaries
        #[arg(long)]
        budget: Option<usize>,
        /// Also require the brute-force catalog at depth + 4 to be the same
        #[arg(long)]
        stability: bool,
    },
    /// Run invariant suites
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::Core)]
        suite: Suite,
        #[arg(long, default_value_t = 32)]
        depth: usize,
    },
    /// Search small level products for homogeneous strong subtrees
    HlSearch {
        #[arg(long, default_value_t = 2)]
        trees: usize,
        #[arg(long, default_value_t = 6)]
        height: usize,
        #[arg(long, default_value_t = 2)]
        colors: u8,
        #[arg(long, default_value_t = 1)]
        target: usize,
        #[arg(long, default_value_t = 0)]
        i_star: usize,
        /// Number of random instances
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Parse a file and check that it serializes back byte for byte
    Roundtrip { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Core,
    Amalgamation,
    Hl,
    Persistence,
    All,
}

/// A chain of antichain coding nodes together with how to rebuild the
/// antichain it was taken from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainFile {
    pub levels: usize,
    pub seed: Option<u64>,
    pub words: Vec<TernaryWord>,
}

impl ChainFile {
    pub fn to_text(&self) -> String {
        let seed = self.seed.map_or_else(|| "-".to_string(), |s| s.to_string());
        let mut out = format!("CHAIN v1 levels={} seed={seed}\n", self.levels);
        for w in &self.words {
            let _ = writeln!(out, "{w}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let err = |line: usize, msg: &str| Error::Parse {
            line,
            msg: msg.to_string(),
        };
        let mut lines = text.lines();
        let head = lines.next().ok_or_else(|| err(1, "empty file"))?;
        let f: Vec<&str> = head.split(' ').collect();
        if f.len() != 4 || f[0] != "CHAIN" || f[1] != "v1" {
            return Err(err(1, "expected `CHAIN v1 levels=M seed=S`"));
        }
        let levels = f[2]
            .strip_prefix("levels=")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| err(1, "bad levels"))?;
        let seed = match f[3].strip_prefix("seed=") {
            Some("-") => None,
            Some(v) => Some(v.parse().map_err(|_| err(1, "bad seed"))?),
            None => return Err(err(1, "missing seed")),
        };
        let words = lines
            .enumerate()
            .map(|(i, l)| l.parse().map_err(|e: Error| err(i + 2, &e.to_string())))
            .collect::<Result<Vec<TernaryWord>>>()?;
        if words.is_empty() {
            return Err(err(2, "no nodes"));
        }
        let c = ChainFile {
            levels,
            seed,
            words,
        };
        if c.to_text() != text {
            return Err(err(1, "chain file is not in canonical form"));
        }
        Ok(c)
    }
}

/// One audited property.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, failure: Option<String>) -> Self {
        Check {
            name: name.to_string(),
            passed: failure.is_none(),
            detail: failure.unwrap_or_default(),
        }
    }

    fn from_result(name: &str, r: Result<Option<String>>) -> Self {
        Self::new(name, r.unwrap_or_else(|e| Some(e.to_string())))
    }
}

/// Level sizes, coding node lengths and the branching pattern of a generated
/// coding tree.
pub fn check_coding_tree_shape(t: &CodingTree) -> Option<String> {
    for n in 0..t.depth() {
        let level = t.level(n);
        if level.len() != 2 * n + 1 {
            return Some(format!("level {n} has {} nodes", level.len()));
        }
        let coding: Vec<&TernaryWord> = level.iter().filter(|w| t.is_coding(w)).collect();
        if coding.len() != 1 || coding[0].len() != n || *coding[0] != t.coding_node(n) {
            return Some(format!("level {n} does not have exactly one coding node"));
        }
        if t.theta(coding[0]) != Ok(Theta::Known(t.ground_truth().ray(n))) {
            return Some(format!("theta of c_{n} differs from the ray of p_{n}"));
        }
        if n + 1 < t.depth() {
            let expected: Vec<TernaryWord> = level
                .iter()
                .flat_map(|w| {
                    let digits: &[u8] = if t.is_coding(w) { &[0, 1, 2] } else { &[0] };
                    digits.iter().map(move |&d| w.child(d))
                })
                .collect();
            if t.level(n + 1) != expected {
                return Some(format!(
                    "level {} is not the successors of level {n}",
                    n + 1
                ));
            }
        }
    }
    None
}

/// Decoding the first `n + 1` coding nodes gives `T_n`.
pub fn check_fidelity(t: &CodingTree, up_to: usize) -> Result<Option<String>> {
    let cs = t.coding_nodes();
    for n in 0..up_to.min(t.depth()) {
        if t.decode_structure(&cs[..=n])? != t.ground_truth().initial_segment(n + 1)? {
            return Ok(Some(format!("decoding c_0..c_{n} differs from T_{n}")));
        }
    }
    Ok(None)
}

/// Invariants (a)–(d) at every level, the almost antichain property and the
/// decoded structure of the antichain's coding nodes.
pub fn check_antichain(a: &AlmostAntichain) -> Result<Option<String>> {
    for m in 0..a.len() {
        let r = a.audit_level(m);
        if let Some(c) = r.checks.iter().find(|c| !c.passed) {
            return Ok(Some(format!(
                "level {m} invariant ({}): {}",
                c.name,
                c.witness.as_deref().unwrap_or("")
            )));
        }
    }
    if !is_almost_antichain(&a.coding_nodes()) {
        return Ok(Some("coding nodes are not an almost antichain".into()));
    }
    let truth = a.host().ground_truth();
    for n in 0..a.len() {
        if a.antichain_structure(n)? != truth.initial_segment(n + 1)? {
            return Ok(Some(format!(
                "antichain structure at {n} differs from T_{n}"
            )));
        }
    }
    Ok(None)
}

/// Both methods give the same catalog with `expected` entries (any size
/// when `None`).
pub fn check_catalog(
    p: usize,
    a: &AlmostAntichain,
    levels: usize,
    expected: Option<usize>,
) -> Result<Option<String>> {
    let brute = brute_force_classes(p, a, levels)?;
    let en = enumerate_diaries(p, default_max_height(p), a, levels)?;
    let cc = cross_check(&en, &brute);
    if !cc.agree {
        return Ok(Some(format!(
            "enumeration and brute force disagree ({} only enumerated, {} only brute force)",
            cc.only_enumerated.len(),
            cc.only_brute_force.len()
        )));
    }
    Ok(expected
        .filter(|&e| e != brute.len())
        .map(|e| format!("{} classes, expected {e}", brute.len())))
}

pub fn core_suite(depth: usize, seed: Option<u64>) -> Vec<Check> {
    let mut sched = seed.map_or_else(GenericScheduler::new, GenericScheduler::seeded);
    let t = CodingTree::generate(depth.max(1), &mut sched);
    let mut out = vec![
        Check::new("coding tree shape", check_coding_tree_shape(&t)),
        Check::from_result("ground truth fidelity", check_fidelity(&t, 50)),
    ];
    let mut s = seed.map_or_else(GenericScheduler::new, GenericScheduler::seeded);
    let fair = s
        .generate(101)
        .map(|tree| fairness_audit(&tree, s.log(), 10, 100));
    out.push(Check::from_result(
        "scheduler fairness",
        fair.map(|m| (!m.is_empty()).then(|| format!("unserved obligations {m:?}"))),
    ));
    let levels = depth.clamp(1, 20);
    out.push(Check::from_result(
        "almost antichain audit",
        seeded_antichain(levels, seed).and_then(|a| check_antichain(&a)),
    ));
    let a = seeded_antichain(24, seed);
    out.push(Check::from_result(
        "unique diary at p=1",
        a.clone().and_then(|a| check_catalog(1, &a, 24, Some(1))),
    ));
    out.push(Check::from_result(
        "seven diaries at p=2",
        a.and_then(|a| {
            let fail = check_catalog(2, &a, 24, Some(7))?;
            let found: std::collections::BTreeSet<_> = brute_force_classes(2, &a, 24)?
                .diaries()
                .map(Diary::critical_words)
                .collect();
            let want: std::collections::BTreeSet<_> = two_chain_cases().into_iter().collect();
            Ok(fail.or_else(|| {
                (found != want).then(|| "critical node sets differ from the seven cases".into())
            }))
        }),
    ));
    out
}

/// Seeded amalgamation instances with `d <= 3` and host length budget
/// `<= 14`, each audited and A.3-checked.
pub fn amalgamation_suite(instances: usize, seed: u64) -> Vec<Check> {
    let mut failures = Vec::new();
    for k in 0..instances as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k));
        let budget = 8 + (k as usize % 7);
        let d = k as usize % 4;
        let host =
            CodingTree::generate(budget, &mut GenericScheduler::seeded(seed.wrapping_add(k)));
        let cs = random_constraints(&host, d, budget, &mut rng);
        match amalgamate(&host, d, &cs, budget) {
            Ok(t) => {
                let v = amalgamation_audit(&host, d, &cs, &t);
                if !v.is_empty() {
                    failures.push(format!("instance {k}: {}", v.join("; ")));
                } else if !(1..t.depth()).all(|n| a3_check(&host, &t.r(n), Some(&t), budget)) {
                    failures.push(format!("instance {k}: A.3 extension not found"));
                }
            }
            Err(e) => failures.push(format!("instance {k}: {e}")),
        }
    }
    vec![Check::new(
        &format!("amalgamation postconditions ({instances} instances)"),
        (!failures.is_empty()).then(|| failures.join(" | ")),
    )]
}

pub fn hl_suite(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let search = |inst: &HlInstance, target: usize| -> Result<Option<String>> {
        Ok(match hl_micro_search(inst, target)? {
            HlOutcome::Witness(w) if verify_witness(inst, &w, target) => None,
            HlOutcome::Witness(_) => Some("a witness failed re-verification".into()),
            HlOutcome::Exhausted => Some("no witness".into()),
        })
    };
    let single = (0..20).try_fold(None, |acc: Option<String>, _| {
        let inst = HlInstance::random(vec![5], 0, 2, &mut rng)?;
        Ok(acc.or(search(&inst, 1)?))
    });
    let constant = (|| {
        for color in 0..2 {
            let inst = HlInstance::constant(vec![6, 6], 0, 2, color)?;
            match hl_micro_search(&inst, 1)? {
                HlOutcome::Witness(w)
                    if w.levels.len() == inst.levels() && verify_witness(&inst, &w, 1) => {}
                _ => return Ok(Some(format!("colour {color} did not give the full trees"))),
            }
        }
        Ok(None)
    })();
    let pairs = (0..50).try_fold(None, |acc: Option<String>, k| {
        let inst = HlInstance::random(vec![6, 6], k % 2, 2, &mut rng)?;
        Ok(acc.or(search(&inst, 2)?.map(|m| format!("instance {k}: {m}"))))
    });
    vec![
        Check::from_result("hl single tree", single),
        Check::from_result("hl constant colouring", constant),
        Check::from_result("hl two trees of height 6", pairs),
    ]
}

pub fn persistence_suite(
    levels: usize,
    count: usize,
    seed: u64,
) -> (Vec<Check>, Option<ColoringReport>) {
    match witness_persistence(levels, count, seed) {
        Ok(r) => {
            let missing: Vec<String> = (0..r.subtrees.len())
                .filter(|&k| !r.missing(k).is_empty())
                .map(|k| format!("subtree {k} misses {:?}", r.missing(k)))
                .collect();
            let c = Check::new(
                "witness persistence",
                (!missing.is_empty()).then(|| missing.join("; ")),
            );
            (vec![c], Some(r))
        }
        Err(e) => (
            vec![Check::new("witness persistence", Some(e.to_string()))],
            None,
        ),
    }
}

fn format_checks(checks: &[Check]) -> String {
    let mut out = String::new();
    for c in checks {
        if c.passed {
            let _ = writeln!(out, "PASS {}", c.name);
        } else {
            let _ = writeln!(out, "FAIL {}: {}", c.name, c.detail);
        }
    }
    out
}

/// Parses and re-serializes any of the text formats.
pub fn roundtrip_text(text: &str) -> Result<String> {
    let head = text.split(' ').next().unwrap_or("");
    let head = head.lines().next().unwrap_or("");
    match head {
        "PSEUDOTREE" => Ok(FinitePseudotree::from_text(text)?.to_text()),
        "CODINGTREE" => Ok(CodingTree::from_text(text)?.to_text()),
        "ANTICHAIN" => Ok(AntichainText::from_text(text)?.to_text()),
        "DIARY" => Ok(Diary::from_text(text)?.to_text()),
        "CATALOG" => Ok(DiaryCatalog::from_text(text)?.to_text()),
        "REPORT" => Ok(ColoringReport::from_text(text)?.to_text()),
        "CHAIN" => Ok(ChainFile::from_text(text)?.to_text()),
        _ => Err(Error::Parse {
            line: 1,
            msg: "unknown format".into(),
        }),
    }
}

/// What a command produced: the artifact and whether every audit passed.
struct Outcome {
    artifact: String,
    passed: bool,
}

fn ok(artifact: String) -> Result<Outcome> {
    Ok(Outcome {
        artifact,
        passed: true,
    })
}

fn execute(cli: &Cli, log: &mut dyn Write) -> Result<Outcome> {
    let seed = cli.seed;
    match &cli.command {
        Command::Gen { depth } => {
            if *depth == 0 {
                return Err(Error::Config("--depth must be positive".into()));
            }
            let mut sched = seed.map_or_else(GenericScheduler::new, GenericScheduler::seeded);
            ok(CodingTree::generate(*depth, &mut sched).to_text())
        }
        Command::Antichain { levels } => {
            if *levels == 0 {
                return Err(Error::Config("--levels must be positive".into()));
            }
            let a = seeded_antichain(*levels, seed)?;
            let failure = check_antichain(&a)?;
            if let Some(f) = &failure {
                let _ = writeln!(log, "audit failed: {f}");
            }
            Ok(Outcome {
                artifact: a.to_text(),
                passed: failure.is_none(),
            })
        }
        Command::Classify {
            chain,
            example,
            levels,
        } => {
            if let Some(id) = example {
                if !(1..=7).contains(id) {
                    return Err(Error::Config("--example must be a case id 1-7".into()));
                }
                let a = seeded_antichain(*levels, seed)?;
                let words = chain_with_id(&a, *levels, *id)?.ok_or_else(|| {
                    Error::DepthExhausted(format!(
                        "case {id} does not occur within {levels} antichain levels"
                    ))
                })?;
                return ok(ChainFile {
                    levels: *levels,
                    seed,
                    words,
                }
                .to_text());
            }
            let path = chain
                .as_ref()
                .ok_or_else(|| Error::Config("give --chain FILE or --example ID".into()))?;
            let file = ChainFile::from_text(&std::fs::read_to_string(path)?)?;
            let a = seeded_antichain(file.levels, file.seed)?;
            let nodes = a.coding_nodes();
            if let Some(w) = file.words.iter().find(|w| !nodes.contains(w)) {
                return Err(Error::NotCodingNode(w.clone()));
            }
            let d = classify(&file.words, a.host())?;
            let id = two_chain_id(&d).map_or_else(|| "-".to_string(), |i| i.to_string());
            let _ = writeln!(log, "diary id {id}");
            ok(d.to_text())
        }
        Command::Enumerate {
            p,
            depth,
            budget,
            stability,
        } => {
            let depth = &depth.unwrap_or_else(|| default_depth(*p));
            if *p == 0 || *depth == 0 {
                return Err(Error::Config("--p and --depth must be positive".into()));
            }
            let extra = if *stability { 4 } else { 0 };
            let a = seeded_antichain(depth + extra, seed)?;
            let brute = brute_force_classes(*p, &a, *depth)?;
            let en = enumerate_diaries(
                *p,
                budget.unwrap_or_else(|| default_max_height(*p)),
                &a,
                *depth,
            )?;
            let cc = cross_check(&en, &brute);
            let mut passed = cc.agree;
            for w in &cc.merged.warnings {
                let _ = writeln!(log, "warning: {w}");
            }
            let _ = writeln!(
                log,
                "p={p} depth={depth}: {} enumerated, {} brute force, agree={}",
                en.len(),
                brute.len(),
                cc.agree
            );
            if *stability {
                let later = brute_force_classes(*p, &a, depth + 4)?;
                let stable = later.diary_set() == brute.diary_set();
                let _ = writeln!(
                    log,
                    "depth {}: {} brute force, stable={stable}",
                    depth + 4,
                    later.len()
                );
                passed &= stable;
            }
            Ok(Outcome {
                artifact: cc.merged.to_text(),
                passed,
            })
        }
        Command::Verify { suite, depth } => {
            let s = seed.unwrap_or(0);
            let mut checks = Vec::new();
            let mut report = None;
            if matches!(suite, Suite::Core | Suite::All) {
                checks.extend(core_suite(*depth, seed));
            }
            if matches!(suite, Suite::Amalgamation | Suite::All) {
                checks.extend(amalgamation_suite(100, s));
            }
            if matches!(suite, Suite::Hl | Suite::All) {
                checks.extend(hl_suite(s));
            }
            if matches!(suite, Suite::Persistence | Suite::All) {
                let (c, r) = persistence_suite(*depth, 20, s);
                checks.extend(c);
                report = r;
            }
            let passed = checks.iter().all(|c| c.passed);
            let summary = format_checks(&checks);
            match report {
                Some(r) => {
                    let _ = log.write_all(summary.as_bytes());
                    Ok(Outcome {
                        artifact: r.to_text(),
                        passed,
                    })
                }
                None => Ok(Outcome {
                    artifact: summary,
                    passed,
                }),
            }
        }
        Command::HlSearch {
            trees,
            height,
            colors,
            target,
            i_star,
            count,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(0));
            let mut out = String::new();
            let mut passed = true;
            for k in 0..*count {
                let inst = HlInstance::random(vec![*height; *trees], *i_star, *colors, &mut rng)?;
                match hl_micro_search(&inst, *target)? {
                    HlOutcome::Witness(w) => {
                        let verified = verify_witness(&inst, &w, *target);
                        passed &= verified;
                        let _ = writeln!(
                            out,
                            "instance {k}: witness levels {:?} colour {} verified={verified}",
                            w.levels, w.color
                        );
                    }
                    HlOutcome::Exhausted => {
                        let _ = writeln!(out, "instance {k}: exhausted");
                    }
                }
            }
            Ok(Outcome {
                artifact: out,
                passed,
            })
        }
        Command::Roundtrip { path } => {
            let text = std::fs::read_to_string(path)?;
            let back = roundtrip_text(&text)?;
            let same = back == text;
            let _ = writeln!(
                log,
                "{}: {}",
                path.display(),
                if same { "identical" } else { "differs" }
            );
            Ok(Outcome {
                artifact: String::new(),
                passed: same,
            })
        }
    }
}

/// Runs a parsed command line and returns the process exit code: 0 on
/// success, 1 when an audit fails or the input is invalid, 2 on
/// configuration errors.
pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match execute(cli, stderr) {
        Ok(o) => {
            let written = match &cli.out {
                Some(p) => std::fs::write(p, &o.artifact).map_err(Error::from),
                None => stdout.write_all(o.artifact.as_bytes()).map_err(Error::from),
            };
            if let Err(e) = written {
                let _ = writeln!(stderr, "error: {e}");
                return 2;
            }
            if o.passed {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            match e {
                Error::Config(_) | Error::Io(_) | Error::InstanceTooLarge(_) => 2,
                _ => 1,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_file_roundtrip() {
        let c = ChainFile {
            levels: 12,
            seed: Some(4),
            words: vec!["-".parse().unwrap(), "01".parse().unwrap()],
        };
        assert_eq!(ChainFile::from_text(&c.to_text()).unwrap(), c);
        assert!(matches!(
            ChainFile::from_text("CHAIN v1 levels=3\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn roundtrip_detects_formats() {
        let t = CodingTree::generate_default(5).to_text();
        assert_eq!(roundtrip_text(&t).unwrap(), t);
        assert!(roundtrip_text("NOPE v1\n").is_err());
        let cut: String = t.lines().take(4).map(|l| format!("{l}\n")).collect();
        assert!(matches!(roundtrip_text(&cut), Err(Error::Parse { .. })));
    }

    #[test]
    fn parses_documented_flags() {
        let cli = Cli::try_parse_from([
            "prt",
            "enumerate",
            "--p",
            "2",
            "--depth",
            "24",
            "--seed",
            "3",
        ])
        .unwrap();
        assert_eq!(cli.seed, Some(3));
        assert!(matches!(
            cli.command,
            Command::Enumerate {
                p: 2,
                depth: Some(24),
                ..
            }
        ));
        assert!(Cli::try_parse_from(["prt", "verify", "--suite", "bogus"]).is_err());
    }
}
