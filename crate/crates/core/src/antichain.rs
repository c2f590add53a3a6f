//! Almost antichains of coding nodes that code a copy of the pseudotree in the
//! same enumeration as the host.
//!
//! Level `m` of the construction is a lex-sorted set `CL(m)` of nodes of one
//! common length `|c^A_m|`, in bijection (by position) with the host level
//! `m + 1`. The node in the position of `c_m⌢1` is the new coding node
//! `c^A_m`. Each node has one chosen immediate successor: `c^A_m⌢1` for the
//! coding node, `a⌢0` for every other node.

use std::fmt::Write as _;

use crate::coding_tree::{CodingTree, HostGenerator, RegionId, ThetaLabel, ROOT_REGION};
use crate::error::{Error, Result};
use crate::pseudotree::{parse_header, FinitePseudotree};
use crate::scheduler::GenericScheduler;
use crate::word::TernaryWord;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AntichainLevel {
    /// `|c^A_m|`.
    pub len: usize,
    /// `CL(m)` in lex order.
    pub nodes: Vec<TernaryWord>,
    /// Position of `c^A_m` in `nodes`.
    pub coding_index: usize,
    /// `IS(m)`, position by position.
    pub successors: Vec<TernaryWord>,
    pub u: TernaryWord,
    pub v: TernaryWord,
}

impl AntichainLevel {
    pub fn coding_node(&self) -> &TernaryWord {
        &self.nodes[self.coding_index]
    }
}

#[derive(Debug, Clone)]
pub struct AlmostAntichain {
    host: CodingTree,
    levels: Vec<AntichainLevel>,
}

struct Builder<'a> {
    gen: &'a mut HostGenerator,
}

impl Builder<'_> {
    fn tree(&self) -> &CodingTree {
        self.gen.tree()
    }

    fn child(&self, r: RegionId, d: usize) -> RegionId {
        self.tree().region(r).children.expect("split region")[d]
    }

    /// Least coding node extending the region's node whose θ is `theta`
    /// (any θ when `None`), scanning split times in increasing order and
    /// growing the host toward the frontier when nothing has landed yet.
    fn least(&mut self, r: RegionId, theta: Option<u32>) -> Result<RegionId> {
        let mut frontier = vec![r];
        loop {
            let best = frontier
                .iter()
                .enumerate()
                .filter_map(|(k, &x)| self.tree().region(x).split.map(|t| (t, k)))
                .min();
            let Some((t, k)) = best else {
                self.gen.step_toward(frontier[0])?;
                continue;
            };
            let x = frontier.swap_remove(k);
            if theta.is_none_or(|th| self.tree().ground_truth().ray(t) == th) {
                return Ok(x);
            }
            frontier.extend(self.tree().region(x).children.expect("split region"));
        }
    }

    /// Region of the node of length `len` reached from `r` by following
    /// digit `d` at coding nodes and 0 elsewhere.
    fn extend(&mut self, mut r: RegionId, len: usize, d: usize) -> Result<RegionId> {
        self.gen.ensure_level(len + 1)?;
        while self.tree().region(r).split.is_some_and(|t| t < len) {
            r = self.child(r, d);
        }
        Ok(r)
    }

    fn split_of(&self, r: RegionId) -> usize {
        self.tree().region(r).split.expect("landed region")
    }

    fn level(
        &self,
        len: usize,
        cl: &[RegionId],
        coding_index: usize,
        u: RegionId,
        v: RegionId,
        c: RegionId,
    ) -> AntichainLevel {
        let t = self.tree();
        let nodes: Vec<TernaryWord> = cl.iter().map(|&r| t.region_word(r, len)).collect();
        let successors = nodes
            .iter()
            .enumerate()
            .map(|(j, w)| w.child(if j == coding_index { 1 } else { 0 }))
            .collect();
        debug_assert_eq!(cl[coding_index], c);
        AntichainLevel {
            len,
            nodes,
            coding_index,
            successors,
            u: t.region_word(u, self.split_of(u)),
            v: t.region_word(v, self.split_of(v)),
        }
    }

    /// One step: above successor region `x`, produce `u`, `v`, `c^A` and the
    /// three nodes replacing `x`.
    fn triple(&mut self, x: RegionId) -> Result<(RegionId, RegionId, RegionId)> {
        let theta = self.tree().region(x).ray;
        let u = self.least(x, theta)?;
        let theta = Some(self.tree().ground_truth().ray(self.split_of(u)));
        let v0 = self.child(u, 0);
        let v = self.least(v0, theta)?;
        let c2 = self.child(v, 2);
        let c = self.least(c2, theta)?;
        Ok((u, v, c))
    }

    fn run(&mut self, count: usize) -> Result<Vec<AntichainLevel>> {
        let mut levels = Vec::with_capacity(count);
        if count == 0 {
            return Ok(levels);
        }
        let exhausted = |m: usize, e: Error| match e {
            Error::DepthExhausted(msg) => {
                Error::DepthExhausted(format!("antichain level {m}: {msg}"))
            }
            other => other,
        };
        // base: the root is c_0 = u_0
        let (u, v, c) = {
            let u = ROOT_REGION;
            let v0 = self.child(u, 0);
            let v = self.least(v0, Some(0)).map_err(|e| exhausted(0, e))?;
            let c2 = self.child(v, 2);
            let c = self.least(c2, Some(0)).map_err(|e| exhausted(0, e))?;
            (u, v, c)
        };
        let len = self.split_of(c);
        let mut is = self
            .replace(u, v, c, len)
            .map_err(|e| exhausted(0, e))?
            .to_vec();
        let cl = vec![is[0], c, is[2]];
        levels.push(self.level(len, &cl, 1, u, v, c));
        for m in 1..count {
            self.gen.ensure_level(m).map_err(|e| exhausted(m, e))?;
            let cm = self.tree().coding_region(m);
            let i = self
                .tree()
                .level_regions(m)
                .iter()
                .position(|&r| r == cm)
                .expect("coding region is live");
            let (u, v, c) = self.triple(is[i]).map_err(|e| exhausted(m, e))?;
            let len = self.split_of(c);
            let mut next = Vec::with_capacity(is.len() + 2);
            for (j, &b) in is.iter().enumerate() {
                if j == i {
                    next.extend(self.replace(u, v, c, len).map_err(|e| exhausted(m, e))?);
                } else {
                    next.push(self.extend(b, len, 0).map_err(|e| exhausted(m, e))?);
                }
            }
            let mut cl = next.clone();
            cl[i + 1] = c;
            levels.push(self.level(len, &cl, i + 1, u, v, c));
            is = next;
        }
        Ok(levels)
    }

    /// `[leftmost extension of v⌢0, c⌢1, rightmost extension of u⌢2]`.
    fn replace(
        &mut self,
        u: RegionId,
        v: RegionId,
        c: RegionId,
        len: usize,
    ) -> Result<[RegionId; 3]> {
        let v0 = self.child(v, 0);
        let left = self.extend(v0, len, 0)?;
        let u2 = self.child(u, 2);
        let right = self.extend(u2, len, 2)?;
        Ok([left, self.child(c, 1), right])
    }
}

/// One audited invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantCheck {
    pub name: &'static str,
    pub passed: bool,
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelReport {
    pub level: usize,
    pub checks: Vec<InvariantCheck>,
}

impl LevelReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn check(name: &'static str, witness: Option<String>) -> InvariantCheck {
    InvariantCheck {
        name,
        passed: witness.is_none(),
        witness,
    }
}

impl AlmostAntichain {
    /// Builds `levels` levels inside a fixed host.
    pub fn build(host: &CodingTree, levels: usize) -> Result<Self> {
        let mut gen = HostGenerator::frozen(host.clone());
        let levels = Builder { gen: &mut gen }.run(levels)?;
        Ok(AlmostAntichain {
            host: gen.into_tree(),
            levels,
        })
    }

    /// Builds while growing the host with `sched`, steering it toward the
    /// regions the construction is waiting on. Fails if the host would need
    /// more than `max_depth` levels.
    pub fn build_guided(sched: GenericScheduler, levels: usize, max_depth: usize) -> Result<Self> {
        let mut gen = HostGenerator::growing(sched, max_depth);
        let levels = Builder { gen: &mut gen }.run(levels)?;
        Ok(AlmostAntichain {
            host: gen.into_tree(),
            levels,
        })
    }

    pub fn host(&self) -> &CodingTree {
        &self.host
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn level(&self, m: usize) -> &AntichainLevel {
        &self.levels[m]
    }

    pub fn levels(&self) -> &[AntichainLevel] {
        &self.levels
    }

    /// `c^A_0, …, c^A_{M-1}`.
    pub fn coding_nodes(&self) -> Vec<TernaryWord> {
        self.levels
            .iter()
            .map(|l| l.coding_node().clone())
            .collect()
    }

    /// `φ` at level `m`: the node of `CL(m)` in the position of `s` in the
    /// host level `m + 1`.
    pub fn phi(&self, m: usize, s: &TernaryWord) -> Option<&TernaryWord> {
        if s.len() != m + 1 || m + 1 >= self.host.depth() {
            return None;
        }
        let j = self.host.level(m + 1).iter().position(|x| x == s)?;
        self.levels.get(m)?.nodes.get(j)
    }

    /// Checks invariants (a)–(d) at level `m`.
    pub fn audit_level(&self, m: usize) -> LevelReport {
        let lvl = &self.levels[m];
        let host_next = self.host.level(m + 1);
        // (a) positions match the host level, and the tree structure with them
        let a = (|| {
            if lvl.nodes.len() != host_next.len() {
                return Some(format!(
                    "|CL({m})| = {} but |S({})| = {}",
                    lvl.nodes.len(),
                    m + 1,
                    host_next.len()
                ));
            }
            if let Some(w) = lvl.nodes.iter().find(|w| w.len() != lvl.len) {
                return Some(format!("{w} does not have length {}", lvl.len));
            }
            if let Some(k) = lvl.nodes.windows(2).position(|w| w[0] >= w[1]) {
                return Some(format!(
                    "{} and {} are out of lex order",
                    lvl.nodes[k],
                    lvl.nodes[k + 1]
                ));
            }
            let parents: Vec<TernaryWord> = if m == 0 {
                vec![TernaryWord::empty(); host_next.len()]
            } else {
                self.levels[m - 1].successors.clone()
            };
            let host_prev = self.host.level(m);
            for (j, s) in host_next.iter().enumerate() {
                let pj = host_prev
                    .iter()
                    .position(|x| x.is_prefix_of(s))
                    .expect("parent in host");
                let want = if m == 0 { &parents[0] } else { &parents[pj] };
                if !want.is_prefix_of(&lvl.nodes[j]) {
                    return Some(format!("φ({s}) = {} does not extend {want}", lvl.nodes[j]));
                }
            }
            None
        })();
        // (b) the coding successor maps to the new coding node
        let b = (|| {
            let cm = self.host.coding_node(m);
            let j = host_next.iter().position(|x| *x == cm.child(1))?;
            if j != lvl.coding_index || !self.host.is_coding(lvl.coding_node()) {
                return Some(format!(
                    "φ({}) = {} is not the coding node of the level",
                    cm.child(1),
                    lvl.nodes[j]
                ));
            }
            None
        })();
        // (c) relative θ-equalities, read on the successor set so that the
        // coding position carries the new ray of c^A_m⌢1
        let c = (|| {
            let host_labels: Vec<ThetaLabel> = host_next
                .iter()
                .map(|s| self.host.theta_label(s).expect("host node"))
                .collect();
            let labels: Vec<ThetaLabel> = match lvl
                .successors
                .iter()
                .map(|a| self.host.theta_label(a))
                .collect::<Result<Vec<_>>>()
            {
                Ok(l) => l,
                Err(e) => return Some(e.to_string()),
            };
            for i in 0..labels.len() {
                for j in i + 1..labels.len().min(host_labels.len()) {
                    if (labels[i] == labels[j]) != (host_labels[i] == host_labels[j]) {
                        return Some(format!(
                            "θ-equality of {} and {} differs from that of {} and {}",
                            lvl.successors[i], lvl.successors[j], host_next[i], host_next[j]
                        ));
                    }
                }
            }
            None
        })();
        // (d) non-coding successors keep θ
        let d = (|| {
            for (j, (a, s)) in lvl.nodes.iter().zip(&lvl.successors).enumerate() {
                if j == lvl.coding_index {
                    continue;
                }
                match (self.host.theta_label(a), self.host.theta_label(s)) {
                    (Ok(x), Ok(y)) if x == y && a.is_prefix_of(s) && s.len() == a.len() + 1 => {}
                    _ => return Some(format!("θ({s}) differs from θ({a})")),
                }
            }
            None
        })();
        LevelReport {
            level: m,
            checks: vec![check("a", a), check("b", b), check("c", c), check("d", d)],
        }
    }

    /// Structure coded by `c^A_0, …, c^A_n`.
    pub fn antichain_structure(&self, n: usize) -> Result<FinitePseudotree> {
        self.host.decode_structure(&self.coding_nodes()[..=n])
    }

    pub fn to_text(&self) -> String {
        AntichainText::from(self).to_text()
    }
}

/// Every pair is incomparable, or the shorter one's digit-1 successor lies
/// below the longer one.
pub fn is_almost_antichain(nodes: &[TernaryWord]) -> bool {
    nodes.iter().enumerate().all(|(i, c)| {
        nodes[i + 1..].iter().all(|d| {
            let (s, l) = if c.len() <= d.len() { (c, d) } else { (d, c) };
            if s == l {
                return false;
            }
            !s.is_prefix_of(l) || s.child(1).is_prefix_of(l)
        })
    })
}

/// The serialized part of an almost antichain: each level's nodes and the
/// position of its coding node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AntichainText {
    pub levels: Vec<(Vec<TernaryWord>, usize)>,
}

impl From<&AlmostAntichain> for AntichainText {
    fn from(a: &AlmostAntichain) -> Self {
        AntichainText {
            levels: a
                .levels
                .iter()
                .map(|l| (l.nodes.clone(), l.coding_index))
                .collect(),
        }
    }
}

impl AntichainText {
    pub fn to_text(&self) -> String {
        let mut out = format!("ANTICHAIN v1 levels={}\n", self.levels.len());
        for (nodes, coding) in &self.levels {
            let mut line = String::new();
            for (j, w) in nodes.iter().enumerate() {
                if j > 0 {
                    line.push(' ');
                }
                let _ = write!(line, "{w}{}", if j == *coding { "*" } else { "" });
            }
            out.push_str(&line);
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let lines: Vec<&str> = text.lines().collect();
        let header = lines.first().ok_or(Error::Parse {
            line: 1,
            msg: "empty input".into(),
        })?;
        let m = parse_header(header, "ANTICHAIN", "levels")
            .map_err(|msg| Error::Parse { line: 1, msg })?;
        if lines.len() != m + 1 {
            return Err(Error::Parse {
                line: lines.len() + 1,
                msg: format!("expected {m} level lines"),
            });
        }
        let mut levels = Vec::with_capacity(m);
        for (k, line) in lines[1..].iter().enumerate() {
            let err = |msg: String| Error::Parse { line: k + 2, msg };
            let mut nodes = Vec::new();
            let mut coding = None;
            for tok in line.split(' ') {
                let (w, star) = match tok.strip_suffix('*') {
                    Some(w) => (w, true),
                    None => (tok, false),
                };
                if star {
                    if coding.is_some() {
                        return Err(err("two starred nodes".into()));
                    }
                    coding = Some(nodes.len());
                }
                nodes.push(w.parse::<TernaryWord>().map_err(|e| err(e.to_string()))?);
            }
            let coding = coding.ok_or_else(|| err("no starred coding node".into()))?;
            if nodes.len() != 2 * (k + 1) + 1 {
                return Err(err(format!(
                    "level {k} must have {} nodes",
                    2 * (k + 1) + 1
                )));
            }
            levels.push((nodes, coding));
        }
        Ok(AntichainText { levels })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::word;

    fn guided(levels: usize) -> AlmostAntichain {
        AlmostAntichain::build_guided(GenericScheduler::new(), levels, 10_000).unwrap()
    }

    #[test]
    fn base_level_shape() {
        let a = guided(1);
        let l = a.level(0);
        assert_eq!(l.nodes.len(), 3);
        assert_eq!(l.coding_index, 1);
        let h = a.host();
        let th = |w: &TernaryWord| h.theta(w).unwrap();
        let c = l.coding_node();
        assert!(h.is_coding(c));
        assert_eq!(th(&l.nodes[0]), th(c));
        assert_eq!(th(&l.nodes[2]), th(c));
        assert_eq!(th(&l.u), th(c));
        assert_eq!(th(&l.v), th(c));
        assert_eq!(l.u, TernaryWord::empty());
    }

    #[test]
    fn levels_audit_clean() {
        let a = guided(12);
        for m in 0..12 {
            assert_eq!(a.level(m).nodes.len(), 2 * (m + 1) + 1);
            let r = a.audit_level(m);
            assert_eq!(r.checks.len(), 4);
            assert!(r.passed(), "{r:?}");
        }
        assert!(is_almost_antichain(&a.coding_nodes()));
        for n in 0..12 {
            assert_eq!(
                a.antichain_structure(n).unwrap(),
                a.host().ground_truth().initial_segment(n + 1).unwrap()
            );
        }
    }

    #[test]
    fn corrupted_level_fails_a() {
        let mut a = guided(4);
        a.levels[2].nodes.swap(0, 1);
        let r = a.audit_level(2);
        assert!(!r.checks[0].passed);
        assert!(r.checks[0].witness.is_some());
    }

    #[test]
    fn frozen_host_reports_depth() {
        let host = CodingTree::generate_default(10);
        match AlmostAntichain::build(&host, 5) {
            Err(Error::DepthExhausted(msg)) => assert!(msg.contains("antichain level")),
            other => panic!("expected depth exhaustion, got {other:?}"),
        }
        let a = guided(6);
        let again = AlmostAntichain::build(a.host(), 6).unwrap();
        assert_eq!(again.coding_nodes(), a.coding_nodes());
    }

    #[test]
    fn almost_antichain_predicate() {
        assert!(is_almost_antichain(&[word("01"), word("02"), word("1")]));
        assert!(is_almost_antichain(&[word("0"), word("012")]));
        assert!(!is_almost_antichain(&[word("0"), word("002")]));
        assert!(!is_almost_antichain(&[word("0"), word("0")]));
    }

    #[test]
    fn text_roundtrip() {
        let a = guided(5);
        let text = a.to_text();
        let parsed = AntichainText::from_text(&text).unwrap();
        assert_eq!(parsed, AntichainText::from(&a));
        assert_eq!(parsed.to_text(), text);
        assert!(AntichainText::from_text("ANTICHAIN v1 levels=1\n0 1 2\n").is_err());
    }
}
