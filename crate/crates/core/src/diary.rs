//! Diaries: the similarity types of chains of coding nodes.
//!
//! For a chain `C` of coding nodes drawn from an almost antichain, `Δ(C)` is
//! built from the meet closure of `C` plus the *ray-change nodes* (the least
//! digit-1 position along the lex-leftmost element where θ changes between
//! consecutive meet levels). Restricting everything to the resulting level set
//! gives a leveled tree with one critical node per level. Compressing levels
//! to `0..n` and rewriting non-critical digits to 0 yields the canonical diary.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::antichain::is_almost_antichain;
use crate::coding_tree::CodingTree;
use crate::error::{Error, Result};
use crate::pseudotree::parse_header;
use crate::word::{meet, TernaryWord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CriticalType {
    /// Splitting node with successors `s⌢0` and `s⌢2`.
    Split,
    /// Coding node with no successor.
    TerminalCoding,
    /// Coding node with sole successor `c⌢1`.
    NonterminalCoding,
    /// Non-coding node with sole successor `t⌢1`.
    RayChange,
}

impl CriticalType {
    pub fn as_str(self) -> &'static str {
        match self {
            CriticalType::Split => "split",
            CriticalType::TerminalCoding => "terminal",
            CriticalType::NonterminalCoding => "nonterminal",
            CriticalType::RayChange => "raychange",
        }
    }

    pub fn is_coding(self) -> bool {
        matches!(
            self,
            CriticalType::TerminalCoding | CriticalType::NonterminalCoding
        )
    }

    /// Digits of the successors a critical node of this type must have.
    fn successor_digits(self) -> &'static [u8] {
        match self {
            CriticalType::Split => &[0, 2],
            CriticalType::TerminalCoding => &[],
            CriticalType::NonterminalCoding | CriticalType::RayChange => &[1],
        }
    }
}

impl FromStr for CriticalType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "split" => CriticalType::Split,
            "terminal" => CriticalType::TerminalCoding,
            "nonterminal" => CriticalType::NonterminalCoding,
            "raychange" => CriticalType::RayChange,
            other => {
                return Err(Error::NotDiaryShaped(format!(
                    "unknown critical type {other:?}"
                )))
            }
        })
    }
}

impl fmt::Display for CriticalType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Meet closure and ray-change data of a chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeetClosureData {
    /// The chain, by increasing length.
    pub chain: Vec<TernaryWord>,
    /// `M_C` by increasing length.
    pub closure: Vec<TernaryWord>,
    /// `ℓ_k = |t_k|`.
    pub lengths: Vec<usize>,
    /// Index into `chain` of its lex-least element.
    pub i_star: usize,
    /// `K_C`.
    pub ray_change_intervals: Vec<usize>,
    /// `B_C`, aligned with `ray_change_intervals`.
    pub ray_change_nodes: Vec<TernaryWord>,
    /// `L(C)`.
    pub levels: Vec<usize>,
}

/// Anything with a length-ordered list of typed critical nodes.
pub trait CriticalNodes {
    fn critical(&self) -> &[(TernaryWord, CriticalType)];
}

/// `Δ(C)`: all restrictions of `M_C ∪ B_C` to the levels `L(C)`, with the
/// critical node of each level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Delta {
    pub nodes: BTreeSet<TernaryWord>,
    pub levels: Vec<usize>,
    pub critical: Vec<(TernaryWord, CriticalType)>,
}

impl CriticalNodes for Delta {
    fn critical(&self) -> &[(TernaryWord, CriticalType)] {
        &self.critical
    }
}

/// A diary in canonical form: critical node `j` has length `j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Diary {
    critical: Vec<(TernaryWord, CriticalType)>,
    nodes: BTreeSet<TernaryWord>,
}

impl CriticalNodes for Diary {
    fn critical(&self) -> &[(TernaryWord, CriticalType)] {
        &self.critical
    }
}

pub fn meet_closure(chain: &[TernaryWord], host: &CodingTree) -> Result<MeetClosureData> {
    if chain.is_empty() {
        return Err(Error::NotAChain);
    }
    for w in chain {
        if !host.is_coding(w) {
            return Err(Error::NotCodingNode(w.clone()));
        }
    }
    let truth = host.ground_truth();
    for (i, a) in chain.iter().enumerate() {
        for b in &chain[i + 1..] {
            if a == b || !truth.comparable(a.len(), b.len()) {
                return Err(Error::NotAChain);
            }
        }
    }
    if !is_almost_antichain(chain) {
        return Err(Error::NotAlmostAntichain);
    }
    let mut chain = chain.to_vec();
    chain.sort_by_key(TernaryWord::len);
    let mut closure: BTreeSet<TernaryWord> = chain.iter().cloned().collect();
    for (i, a) in chain.iter().enumerate() {
        for b in &chain[i + 1..] {
            closure.insert(meet(a, b));
        }
    }
    let mut closure: Vec<TernaryWord> = closure.into_iter().collect();
    closure.sort_by_key(TernaryWord::len);
    let lengths: Vec<usize> = closure.iter().map(TernaryWord::len).collect();
    if lengths.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::NotDiaryShaped(
            "two meet-closure nodes share a length".into(),
        ));
    }
    let i_star = (0..chain.len())
        .min_by(|&a, &b| chain[a].cmp(&chain[b]))
        .expect("nonempty");
    let ci = &chain[i_star];
    let mut ray_change_intervals = Vec::new();
    let mut ray_change_nodes = Vec::new();
    for k in 0..lengths.len().saturating_sub(1) {
        let lo = ci.restrict(lengths[k]);
        let hi = ci.restrict(lengths[k + 1]);
        if host.theta_label(&lo)? != host.theta_label(&hi)? && !chain.contains(&lo) {
            let at = (lengths[k] + 1..lengths[k + 1].min(ci.len()))
                .find(|&l| ci.digit(l) == Some(1))
                .ok_or_else(|| {
                    Error::NotDiaryShaped(format!(
                        "θ changes above {lo} without a digit-1 position"
                    ))
                })?;
            ray_change_intervals.push(k);
            ray_change_nodes.push(ci.restrict(at));
        }
    }
    let mut levels: Vec<usize> = lengths
        .iter()
        .copied()
        .chain(ray_change_nodes.iter().map(TernaryWord::len))
        .collect();
    levels.sort_unstable();
    if levels.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::NotDiaryShaped(
            "a ray-change node shares a level with the meet closure".into(),
        ));
    }
    Ok(MeetClosureData {
        chain,
        closure,
        lengths,
        i_star,
        ray_change_intervals,
        ray_change_nodes,
        levels,
    })
}

pub fn delta_of(chain: &[TernaryWord], host: &CodingTree) -> Result<Delta> {
    let mc = meet_closure(chain, host)?;
    let mut elements: Vec<TernaryWord> = mc
        .closure
        .iter()
        .chain(&mc.ray_change_nodes)
        .cloned()
        .collect();
    elements.sort_by_key(TernaryWord::len);
    let mut nodes = BTreeSet::new();
    for t in &elements {
        for &l in mc.levels.iter().filter(|&&l| l <= t.len()) {
            nodes.insert(t.restrict(l));
        }
    }
    let critical = elements
        .iter()
        .map(|e| {
            let ty = if mc.chain.contains(e) {
                if mc.chain.iter().any(|c| c != e && e.is_prefix_of(c)) {
                    CriticalType::NonterminalCoding
                } else {
                    CriticalType::TerminalCoding
                }
            } else if mc.ray_change_nodes.contains(e) {
                CriticalType::RayChange
            } else {
                CriticalType::Split
            };
            (e.clone(), ty)
        })
        .collect();
    Ok(Delta {
        nodes,
        levels: mc.levels,
        critical,
    })
}

/// Compresses the levels of `delta` to `0..n` and rewrites the digit after
/// every non-critical node to 0.
pub fn canonicalize(delta: &Delta) -> Result<Diary> {
    let n = delta.levels.len();
    if delta.critical.len() != n {
        return Err(Error::NotDiaryShaped(
            "one critical node per level is required".into(),
        ));
    }
    let level_of: BTreeMap<usize, usize> = delta
        .levels
        .iter()
        .enumerate()
        .map(|(j, &l)| (l, j))
        .collect();
    let mut by_level: Vec<Vec<&TernaryWord>> = vec![Vec::new(); n];
    for t in &delta.nodes {
        let j = *level_of
            .get(&t.len())
            .ok_or_else(|| Error::NotDiaryShaped(format!("{t} is not on a level of the diary")))?;
        by_level[j].push(t);
    }
    for (j, (c, _)) in delta.critical.iter().enumerate() {
        if c.len() != delta.levels[j] || !delta.nodes.contains(c) {
            return Err(Error::NotDiaryShaped(format!(
                "critical node {c} is not on level {j}"
            )));
        }
    }
    let mut canon: BTreeMap<&TernaryWord, TernaryWord> = BTreeMap::new();
    for j in 0..n {
        if j == 0 {
            if by_level[0].len() != 1 {
                return Err(Error::NotDiaryShaped(
                    "the bottom level must be a single node".into(),
                ));
            }
            canon.insert(by_level[0][0], TernaryWord::empty());
            continue;
        }
        let (crit, ty) = &delta.critical[j - 1];
        for &t in &by_level[j] {
            let parent = t.restrict(delta.levels[j - 1]);
            let pw = canon
                .get(&parent)
                .ok_or_else(|| {
                    Error::NotDiaryShaped(format!("{t} has no parent on level {}", j - 1))
                })?
                .clone();
            let digit = if &parent == crit {
                let d = t.digit(delta.levels[j - 1]).expect("longer than parent");
                if !ty.successor_digits().contains(&d) {
                    return Err(Error::NotDiaryShaped(format!(
                        "{ty} node {crit} continues with digit {d}"
                    )));
                }
                d
            } else {
                0
            };
            canon.insert(t, pw.child(digit));
        }
    }
    let nodes: BTreeSet<TernaryWord> = canon.values().cloned().collect();
    if nodes.len() != delta.nodes.len() {
        return Err(Error::NotDiaryShaped(
            "two nodes collapse to one canonical word".into(),
        ));
    }
    let critical: Vec<(TernaryWord, CriticalType)> = delta
        .critical
        .iter()
        .map(|(c, ty)| (canon[c].clone(), *ty))
        .collect();
    diary_axioms_check(&nodes, &critical).map_err(Error::NotDiaryShaped)?;
    Ok(Diary { critical, nodes })
}

/// `canonicalize(delta_of(C))`.
pub fn classify(chain: &[TernaryWord], host: &CodingTree) -> Result<Diary> {
    canonicalize(&delta_of(chain, host)?)
}

/// Checks the diary conditions for a node set under the given typing of its
/// critical nodes (listed by level). Returns the violated condition.
pub fn diary_axioms_check(
    nodes: &BTreeSet<TernaryWord>,
    critical: &[(TernaryWord, CriticalType)],
) -> std::result::Result<(), String> {
    let n = critical.len();
    if n == 0 {
        return Err("no critical nodes".into());
    }
    for (j, (c, _)) in critical.iter().enumerate() {
        if c.len() != j {
            return Err(format!("critical node {c} is not on level {j}"));
        }
        if !nodes.contains(c) {
            return Err(format!("critical node {c} is not in the tree"));
        }
    }
    for t in nodes {
        if t.len() >= n {
            return Err(format!("{t} lies above the top level {}", n - 1));
        }
        if let Some(p) = t.parent() {
            if !nodes.contains(&p) {
                return Err(format!("{t} is present but its parent {p} is not"));
            }
        }
    }
    let children =
        |t: &TernaryWord| -> Vec<u8> { (0..3).filter(|&d| nodes.contains(&t.child(d))).collect() };
    for t in nodes {
        let j = t.len();
        let ch = children(t);
        let (crit, ty) = &critical[j];
        if t == crit {
            if j + 1 == n && *ty != CriticalType::TerminalCoding {
                return Err(format!(
                    "top critical node {t} must be a terminal coding node"
                ));
            }
            if ch != ty.successor_digits() && j + 1 < n {
                return Err(format!("{ty} node {t} has successor digits {ch:?}"));
            }
        } else if j + 1 < n && ch != [0] {
            return Err(format!(
                "non-critical node {t} must continue with digit 0 only, has {ch:?}"
            ));
        }
    }
    let mut leftmost = TernaryWord::empty();
    let mut branch = vec![leftmost.clone()];
    while let Some(&d) = children(&leftmost).first() {
        leftmost = leftmost.child(d);
        branch.push(leftmost.clone());
    }
    for (c, ty) in critical {
        if matches!(
            ty,
            CriticalType::NonterminalCoding | CriticalType::RayChange
        ) && !branch.contains(c)
        {
            return Err(format!("{ty} node {c} is off the leftmost branch"));
        }
    }
    Ok(())
}

fn pairwise_agree<A: CriticalNodes + ?Sized, B: CriticalNodes + ?Sized>(a: &A, b: &B) -> bool {
    let (x, y) = (a.critical(), b.critical());
    if x.len() != y.len() || x.iter().zip(y).any(|((_, s), (_, t))| s != t) {
        return false;
    }
    let n = x.len();
    for i in 0..n {
        for j in 0..n {
            let (di, dj, ei, ej) = (&x[i].0, &x[j].0, &y[i].0, &y[j].0);
            if di.is_prefix_of(dj) != ei.is_prefix_of(ej)
                || (di < dj) != (ei < ej)
                || (di.len() < dj.len()) != (ei.len() < ej.len())
            {
                return false;
            }
            for k in 0..n {
                if (*di == meet(dj, &x[k].0)) != (*ei == meet(ej, &y[k].0)) {
                    return false;
                }
            }
        }
    }
    true
}

/// Similarity of two diaries or `Δ(C)` sets: the length-order bijection of
/// critical nodes preserves types, meets, lex and tree order, and relative
/// levels.
pub fn similar<A: CriticalNodes + ?Sized, B: CriticalNodes + ?Sized>(a: &A, b: &B) -> bool {
    pairwise_agree(a, b)
}

impl Diary {
    /// Builds a diary from critical nodes, deriving the other nodes.
    pub fn from_critical(critical: Vec<(TernaryWord, CriticalType)>) -> Result<Self> {
        let n = critical.len();
        let mut nodes = BTreeSet::new();
        let mut frontier = vec![TernaryWord::empty()];
        for j in 0..n {
            let mut next = Vec::new();
            for t in frontier {
                let digits: &[u8] = match critical.get(j) {
                    Some((c, ty)) if *c == t => ty.successor_digits(),
                    _ => &[0],
                };
                if j + 1 < n {
                    next.extend(digits.iter().map(|&d| t.child(d)));
                }
                nodes.insert(t);
            }
            frontier = next;
        }
        diary_axioms_check(&nodes, &critical).map_err(Error::NotDiaryShaped)?;
        Ok(Diary { critical, nodes })
    }

    /// Number of levels (one critical node each).
    pub fn height(&self) -> usize {
        self.critical.len()
    }

    pub fn nodes(&self) -> &BTreeSet<TernaryWord> {
        &self.nodes
    }

    pub fn critical_words(&self) -> BTreeSet<TernaryWord> {
        self.critical.iter().map(|(w, _)| w.clone()).collect()
    }

    pub fn coding_count(&self) -> usize {
        self.critical.iter().filter(|(_, t)| t.is_coding()).count()
    }

    /// The diary as a leveled node set, for re-canonicalization.
    pub fn as_delta(&self) -> Delta {
        Delta {
            nodes: self.nodes.clone(),
            levels: (0..self.height()).collect(),
            critical: self.critical.clone(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("DIARY v1 height={}\n", self.height());
        for (w, ty) in &self.critical {
            out.push_str(&format!("{w} {ty}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Self::from_lines(&text.lines().collect::<Vec<_>>(), 0)
    }

    /// Parses a DIARY block starting at `lines[0]`; `offset` is the number of
    /// lines before it, for error positions.
    pub(crate) fn from_lines(lines: &[&str], offset: usize) -> Result<Self> {
        let header = lines.first().ok_or(Error::Parse {
            line: offset + 1,
            msg: "missing DIARY header".into(),
        })?;
        let n = parse_header(header, "DIARY", "height").map_err(|msg| Error::Parse {
            line: offset + 1,
            msg,
        })?;
        if lines.len() < n + 1 {
            return Err(Error::Parse {
                line: offset + lines.len() + 1,
                msg: format!("expected {n} critical nodes"),
            });
        }
        let mut critical = Vec::with_capacity(n);
        for (k, line) in lines[1..=n].iter().enumerate() {
            let err = |msg: String| Error::Parse {
                line: offset + k + 2,
                msg,
            };
            let mut f = line.split(' ');
            let (Some(w), Some(t), None) = (f.next(), f.next(), f.next()) else {
                return Err(err("expected `<word> <type>`".into()));
            };
            critical.push((
                w.parse().map_err(|e: Error| err(e.to_string()))?,
                t.parse().map_err(|e: Error| err(e.to_string()))?,
            ));
        }
        Self::from_critical(critical).map_err(|e| Error::Parse {
            line: offset + 1,
            msg: e.to_string(),
        })
    }
}

impl fmt::Display for Diary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .critical
            .iter()
            .map(|(w, t)| format!("{w}:{t}"))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::word;
    use CriticalType::*;

    fn diary(spec: &[(&str, CriticalType)]) -> Diary {
        Diary::from_critical(spec.iter().map(|&(w, t)| (word(w), t)).collect()).unwrap()
    }

    #[test]
    fn axioms_on_small_sets() {
        let nodes: BTreeSet<TernaryWord> = [word("-"), word("1")].into_iter().collect();
        assert!(diary_axioms_check(
            &nodes,
            &[(word("-"), NonterminalCoding), (word("1"), TerminalCoding)]
        )
        .is_ok());
        // two splitting nodes on one level
        let nodes: BTreeSet<TernaryWord> = ["-", "0", "2", "00", "02", "20", "22"]
            .iter()
            .map(|s| word(s))
            .collect();
        assert!(diary_axioms_check(
            &nodes,
            &[
                (word("-"), Split),
                (word("0"), Split),
                (word("00"), TerminalCoding)
            ]
        )
        .is_err());
        // ray change off the leftmost branch
        let nodes: BTreeSet<TernaryWord> = ["-", "0", "2", "00", "21"]
            .iter()
            .map(|s| word(s))
            .collect();
        assert!(diary_axioms_check(
            &nodes,
            &[
                (word("-"), Split),
                (word("2"), RayChange),
                (word("00"), TerminalCoding)
            ]
        )
        .is_err());
    }

    #[test]
    fn from_critical_derives_nodes() {
        let d = diary(&[
            ("-", Split),
            ("0", NonterminalCoding),
            ("20", TerminalCoding),
        ]);
        let want: BTreeSet<TernaryWord> = ["-", "0", "2", "01", "20"]
            .iter()
            .map(|s| word(s))
            .collect();
        assert_eq!(d.nodes(), &want);
        assert_eq!(d.coding_count(), 2);
    }

    #[test]
    fn canonicalize_is_idempotent_on_diaries() {
        let d = diary(&[
            ("-", Split),
            ("0", RayChange),
            ("20", TerminalCoding),
            ("010", RayChange),
            ("0101", TerminalCoding),
        ]);
        assert_eq!(d.nodes().len(), 7);
        assert!(!d.nodes().contains(&word("200")));
        assert_eq!(canonicalize(&d.as_delta()).unwrap(), d);
        assert!(similar(&d, &d.as_delta()));
    }

    #[test]
    fn similarity_separates_mirror_cases() {
        let two = diary(&[("-", Split), ("2", TerminalCoding), ("00", TerminalCoding)]);
        let three = diary(&[("-", Split), ("0", TerminalCoding), ("20", TerminalCoding)]);
        assert!(!similar(&two, &three));
        assert!(similar(&two, &two));
    }

    #[test]
    fn text_roundtrip() {
        let d = diary(&[("-", NonterminalCoding), ("1", TerminalCoding)]);
        assert_eq!(
            d.to_text(),
            "DIARY v1 height=2\n- nonterminal\n1 terminal\n"
        );
        assert_eq!(Diary::from_text(&d.to_text()).unwrap(), d);
        assert!(Diary::from_text("DIARY v1 height=2\n- nonterminal\n").is_err());
        assert!(Diary::from_text("DIARY v1 height=1\n- split\n").is_err());
    }
}
