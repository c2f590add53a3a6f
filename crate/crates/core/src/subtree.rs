//! Finite leveled subtrees of a coding tree: approximations `r_n`, coding
//! tree isomorphism, finite amalgamation and the finite A.3 check.
//!
//! A leveled subtree is a meet-closed set of words that is a union of level
//! sets. Its coding nodes are the host coding nodes it contains, and each
//! carries the ray of the point it codes.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use crate::coding_tree::{CodingTree, RegionId};
use crate::error::{Error, Result};
use crate::word::{meet, TernaryWord};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubtreeLevel {
    pub len: usize,
    /// Lexicographically sorted.
    pub nodes: Vec<TernaryWord>,
    /// Position and ray of the coding node on this level, if any.
    pub coding: Option<(usize, u32)>,
}

impl SubtreeLevel {
    pub fn coding_node(&self) -> Option<&TernaryWord> {
        self.coding.map(|(i, _)| &self.nodes[i])
    }

    fn position(&self, w: &TernaryWord) -> Option<usize> {
        self.nodes.binary_search(w).ok()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LeveledSubtree {
    levels: Vec<SubtreeLevel>,
}

impl LeveledSubtree {
    /// Validates lengths, sorting, prefix closure between consecutive levels
    /// and closure under meets.
    pub fn from_levels(levels: Vec<SubtreeLevel>) -> Result<Self> {
        for (k, lv) in levels.iter().enumerate() {
            let bad = |msg: String| Err(Error::NotSubtree(format!("level {k}: {msg}")));
            if lv.nodes.is_empty() {
                return bad("empty".into());
            }
            if k > 0 && lv.len <= levels[k - 1].len {
                return bad("lengths must increase".into());
            }
            if lv.nodes.windows(2).any(|w| w[0] >= w[1]) {
                return bad("nodes must be strictly sorted".into());
            }
            if let Some(w) = lv.nodes.iter().find(|w| w.len() != lv.len) {
                return bad(format!("{w} has the wrong length"));
            }
            if lv.coding.is_some_and(|(i, _)| i >= lv.nodes.len()) {
                return bad("coding position out of range".into());
            }
            if k > 0 {
                let prev = &levels[k - 1];
                if let Some(w) = lv
                    .nodes
                    .iter()
                    .find(|w| prev.position(&w.restrict(prev.len)).is_none())
                {
                    return bad(format!("{w} has no predecessor"));
                }
            } else if lv.nodes.len() != 1 {
                return bad("the bottom level must be a single node".into());
            }
        }
        let t = LeveledSubtree { levels };
        for lv in &t.levels {
            for (i, a) in lv.nodes.iter().enumerate() {
                for b in &lv.nodes[i + 1..] {
                    let m = meet(a, b);
                    if !t.contains(&m) {
                        return Err(Error::NotSubtree(format!(
                            "meet {m} of {a} and {b} is missing"
                        )));
                    }
                }
            }
        }
        Ok(t)
    }

    /// The subtree of `host` formed by `nodes`, with coding nodes and rays
    /// read from the host.
    pub fn from_host<I: IntoIterator<Item = TernaryWord>>(
        host: &CodingTree,
        nodes: I,
    ) -> Result<Self> {
        let mut by_len: BTreeMap<usize, BTreeSet<TernaryWord>> = BTreeMap::new();
        for w in nodes {
            if !host.contains(&w) {
                return Err(Error::NodeAbsent(w));
            }
            by_len.entry(w.len()).or_default().insert(w);
        }
        let truth = host.ground_truth();
        let levels = by_len
            .into_iter()
            .map(|(len, set)| {
                let nodes: Vec<TernaryWord> = set.into_iter().collect();
                let coding = nodes
                    .iter()
                    .position(|w| host.is_coding(w))
                    .map(|i| (i, truth.ray(len)));
                SubtreeLevel { len, nodes, coding }
            })
            .collect();
        Self::from_levels(levels)
    }

    /// `r_n` of the host: all nodes shorter than `c_n`.
    pub fn approximation(host: &CodingTree, n: usize) -> Self {
        let truth = host.ground_truth();
        let levels = (0..n.min(host.depth()))
            .map(|k| {
                let nodes = host.level(k);
                let c = host.coding_node(k);
                let i = nodes
                    .binary_search(&c)
                    .expect("coding node is on its level");
                SubtreeLevel {
                    len: k,
                    nodes,
                    coding: Some((i, truth.ray(k))),
                }
            })
            .collect();
        LeveledSubtree { levels }
    }

    /// Number of levels.
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[SubtreeLevel] {
        &self.levels
    }

    pub fn level(&self, k: usize) -> &SubtreeLevel {
        &self.levels[k]
    }

    pub fn node_count(&self) -> usize {
        self.levels.iter().map(|l| l.nodes.len()).sum()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &TernaryWord> {
        self.levels.iter().flat_map(|l| &l.nodes)
    }

    pub fn coding_nodes(&self) -> Vec<TernaryWord> {
        self.levels
            .iter()
            .filter_map(|l| l.coding_node().cloned())
            .collect()
    }

    fn level_of_len(&self, len: usize) -> Option<usize> {
        self.levels.binary_search_by_key(&len, |l| l.len).ok()
    }

    pub fn contains(&self, w: &TernaryWord) -> bool {
        self.level_of_len(w.len())
            .is_some_and(|k| self.levels[k].position(w).is_some())
    }

    /// Whether `w` is an initial segment of some node.
    pub fn covers(&self, w: &TernaryWord) -> bool {
        let k = self.levels.partition_point(|l| l.len < w.len());
        self.levels.get(k).is_some_and(|l| {
            let i = l.nodes.partition_point(|u| u < w);
            l.nodes.get(i).is_some_and(|u| w.is_prefix_of(u))
        })
    }

    /// `r_n`: the levels below the `n`-th coding node.
    pub fn r(&self, n: usize) -> Self {
        let cut = self
            .levels
            .iter()
            .filter(|l| l.coding.is_some())
            .nth(n)
            .map_or(usize::MAX, |l| l.len);
        LeveledSubtree {
            levels: self
                .levels
                .iter()
                .filter(|l| l.len < cut)
                .cloned()
                .collect(),
        }
    }

    /// Successors of the top level: the coding node continues with every
    /// digit, the other nodes with 0.
    pub fn top_successors(&self) -> Vec<TernaryWord> {
        let Some(top) = self.levels.last() else {
            return vec![TernaryWord::empty()];
        };
        let ci = top.coding.map(|(i, _)| i);
        top.nodes
            .iter()
            .enumerate()
            .flat_map(|(i, w)| {
                let digits: &[u8] = if Some(i) == ci { &[0, 1, 2] } else { &[0] };
                digits.iter().map(move |&d| w.child(d))
            })
            .collect()
    }

    fn parent_positions(&self, k: usize) -> Vec<usize> {
        let prev = &self.levels[k - 1];
        self.levels[k]
            .nodes
            .iter()
            .map(|w| prev.position(&w.restrict(prev.len)).expect("validated"))
            .collect()
    }

    fn ray_pattern(&self) -> Vec<usize> {
        let mut seen: BTreeMap<u32, usize> = BTreeMap::new();
        self.levels
            .iter()
            .filter_map(|l| l.coding)
            .map(|(_, r)| {
                let n = seen.len();
                *seen.entry(r).or_insert(n)
            })
            .collect()
    }
}

/// Whether the level-by-level lexicographic bijection from `a` to `b` is a
/// coding tree isomorphism: it must preserve the tree order, the passing
/// digit of every immediate successor, the coding nodes, and which coding
/// nodes share a ray.
pub fn isomorphism_check(a: &LeveledSubtree, b: &LeveledSubtree) -> bool {
    if a.depth() != b.depth() {
        return false;
    }
    for k in 0..a.depth() {
        let (la, lb) = (a.level(k), b.level(k));
        if la.nodes.len() != lb.nodes.len() || la.coding.map(|c| c.0) != lb.coding.map(|c| c.0) {
            return false;
        }
        if k == 0 {
            continue;
        }
        let (pa, pb) = (a.parent_positions(k), b.parent_positions(k));
        if pa != pb {
            return false;
        }
        let (ha, hb) = (a.level(k - 1).len, b.level(k - 1).len);
        if la
            .nodes
            .iter()
            .zip(&lb.nodes)
            .any(|(s, t)| s.digit(ha) != t.digit(hb))
        {
            return false;
        }
    }
    a.ray_pattern() == b.ray_pattern()
}

/// Image of `w` under the level-by-level bijection from `a` to `b`.
pub fn isomorphism_image(
    a: &LeveledSubtree,
    b: &LeveledSubtree,
    w: &TernaryWord,
) -> Option<TernaryWord> {
    let k = a.level_of_len(w.len())?;
    let i = a.level(k).position(w)?;
    b.levels.get(k)?.nodes.get(i).cloned()
}

/// Which part of the tree above `x` a constraint governs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintCase {
    /// `x` continues its ray: nodes above `x` on that ray stay in `U_x`.
    SameRay,
    /// `x` starts a new ray: nodes on that ray stay in `U_x`.
    NewRay,
    /// `x` starts a new ray: every node above `x` stays in `U_x`.
    Full,
}

impl ConstraintCase {
    pub fn index(self) -> usize {
        match self {
            ConstraintCase::SameRay => 0,
            ConstraintCase::NewRay => 1,
            ConstraintCase::Full => 2,
        }
    }
}

/// A constraint `U_x`, kept as the prefix-closed set of its nodes from `x` up.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub x: TernaryWord,
    pub case: ConstraintCase,
    pub nodes: BTreeSet<TernaryWord>,
}

impl Constraint {
    pub fn admits(&self, w: &TernaryWord) -> bool {
        self.nodes.contains(w)
    }

    /// Whether the constraint governs node `t` above `x`.
    fn governs(&self, host: &CodingTree, t: &TernaryWord) -> bool {
        self.x.is_prefix_of(t)
            && (self.case == ConstraintCase::Full
                || host.theta_label(t).ok() == host.theta_label(&self.x).ok())
    }
}

#[derive(Debug, Clone, Copy)]
struct Slot {
    region: RegionId,
    owner: Option<usize>,
}

/// Regions whose node at length `len` is reached from `r` while staying on
/// its ray, in lexicographic order.
fn same_ray_reach(host: &CodingTree, r: RegionId, len: usize) -> Vec<RegionId> {
    let mut out = Vec::new();
    let mut stack = vec![r];
    while let Some(x) = stack.pop() {
        let reg = host.region(x);
        match (reg.split, reg.children) {
            (Some(t), Some(ch)) if t < len => {
                stack.push(ch[2]);
                stack.push(ch[0]);
            }
            _ => out.push(x),
        }
    }
    out
}

/// Position of the coding node among the level-`k` nodes of the host.
fn coding_position(host: &CodingTree, k: usize) -> usize {
    let c = host.coding_region(k);
    host.level_regions(k)
        .iter()
        .position(|&r| r == c)
        .expect("coding region is live")
}

/// One new level above `frontier` (all nodes of length `from`), placing the
/// coding node at position `j`. Lengths are tried from the shortest up and
/// every other node takes its leftmost admissible extension.
fn next_level<F>(
    host: &CodingTree,
    frontier: &[Slot],
    j: usize,
    from: usize,
    budget: usize,
    admits: F,
) -> Option<(usize, Vec<RegionId>)>
where
    F: Fn(Option<usize>, &TernaryWord) -> bool,
{
    'len: for len in from..budget.min(host.depth()) {
        let c = host.coding_region(len);
        let mut chosen = Vec::with_capacity(frontier.len());
        for (i, s) in frontier.iter().enumerate() {
            let reach = same_ray_reach(host, s.region, len);
            let pick = if i == j {
                reach
                    .into_iter()
                    .find(|&r| r == c && admits(s.owner, &host.region_word(r, len)))
            } else {
                reach
                    .into_iter()
                    .find(|&r| r != c && admits(s.owner, &host.region_word(r, len)))
            };
            match pick {
                Some(r) => chosen.push(r),
                None => continue 'len,
            }
        }
        return Some((len, chosen));
    }
    None
}

fn successors(
    host: &CodingTree,
    chosen: &[RegionId],
    owners: &[Option<usize>],
    j: usize,
    full: &dyn Fn(usize) -> bool,
) -> Vec<Slot> {
    let mut out = Vec::with_capacity(chosen.len() + 2);
    for (i, (&r, &owner)) in chosen.iter().zip(owners).enumerate() {
        if i == j {
            let ch = host.region(r).children.expect("coding region has children");
            out.push(Slot {
                region: ch[0],
                owner,
            });
            out.push(Slot {
                region: ch[1],
                owner: owner.filter(|&o| full(o)),
            });
            out.push(Slot {
                region: ch[2],
                owner,
            });
        } else {
            out.push(Slot { region: r, owner });
        }
    }
    out
}

fn level_from(host: &CodingTree, chosen: &[RegionId], j: usize, len: usize) -> SubtreeLevel {
    SubtreeLevel {
        len,
        nodes: chosen.iter().map(|&r| host.region_word(r, len)).collect(),
        coding: Some((j, host.ground_truth().ray(len))),
    }
}

fn check_constraints(host: &CodingTree, d: usize, constraints: &[Constraint]) -> Result<()> {
    let xs = host.level(d);
    let bad = |msg: String| Err(Error::InvalidAmalgamation(msg));
    let mut seen = BTreeSet::new();
    for u in constraints {
        let x = &u.x;
        if xs.binary_search(x).is_err() {
            return bad(format!("{x} is not a successor of the top level of r_{d}"));
        }
        if !seen.insert(x.clone()) {
            return bad(format!("two constraints at {x}"));
        }
        if !u.nodes.contains(x) {
            return bad(format!("U at {x} does not contain {x}"));
        }
        if let Some(w) = u
            .nodes
            .iter()
            .find(|w| !x.is_prefix_of(w) || !host.contains(w))
        {
            return bad(format!(
                "U at {x} has a node {w} outside the host cone above {x}"
            ));
        }
        let digit = (0..x.len())
            .rev()
            .find(|&l| host.is_coding(&x.restrict(l)))
            .and_then(|l| x.digit(l));
        let ok = match u.case {
            ConstraintCase::SameRay => digit != Some(1),
            ConstraintCase::NewRay | ConstraintCase::Full => digit == Some(1),
        };
        if !ok {
            return bad(format!(
                "case {} does not match the digit leaving the coding node below {x}",
                u.case.index()
            ));
        }
        if u.case != ConstraintCase::Full {
            let label = host.theta_label(x)?;
            if let Some(w) = u
                .nodes
                .iter()
                .find(|w| host.theta_label(w).ok() != Some(label))
            {
                return bad(format!("U at {x} is not confined to one ray ({w})"));
            }
        }
    }
    Ok(())
}

/// Builds an approximation that agrees with `r_d` of the host and then
/// grows level by level below host length `budget`, keeping every node
/// governed by a constraint inside it. Fails with the blocking `x` when not
/// even one level can be added.
pub fn amalgamate(
    host: &CodingTree,
    d: usize,
    constraints: &[Constraint],
    budget: usize,
) -> Result<LeveledSubtree> {
    let budget = budget.min(host.depth());
    if d >= budget {
        return Err(Error::DepthExhausted(format!(
            "r_{d} needs more than {budget} levels"
        )));
    }
    check_constraints(host, d, constraints)?;
    let owner_of: BTreeMap<&TernaryWord, usize> = constraints
        .iter()
        .enumerate()
        .map(|(i, u)| (&u.x, i))
        .collect();
    let mut frontier: Vec<Slot> = host
        .level_regions(d)
        .iter()
        .map(|&r| Slot {
            region: r,
            owner: owner_of.get(&host.region_word(r, d)).copied(),
        })
        .collect();
    let admits =
        |owner: Option<usize>, w: &TernaryWord| owner.is_none_or(|o| constraints[o].admits(w));
    let full = |o: usize| constraints[o].case == ConstraintCase::Full;
    let mut levels = LeveledSubtree::approximation(host, d).levels;
    let mut from = d;
    while from < budget {
        let j = coding_position(host, levels.len());
        let Some((len, chosen)) = next_level(host, &frontier, j, from, budget, admits) else {
            break;
        };
        levels.push(level_from(host, &chosen, j, len));
        let owners: Vec<Option<usize>> = frontier.iter().map(|s| s.owner).collect();
        frontier = successors(host, &chosen, &owners, j, &full);
        from = len + 1;
    }
    if levels.len() == d {
        let j = coding_position(host, d);
        let Some((len, _)) = next_level(host, &frontier, j, d, budget, |_, _| true) else {
            return Err(Error::DepthExhausted(format!(
                "no level above r_{d} below length {budget}"
            )));
        };
        let blocking = frontier
            .iter()
            .enumerate()
            .find_map(|(i, s)| {
                let o = s.owner?;
                let reach = same_ray_reach(host, s.region, len);
                let c = host.coding_region(len);
                let ok = reach
                    .iter()
                    .any(|&r| (r == c) == (i == j) && admits(Some(o), &host.region_word(r, len)));
                (!ok).then(|| constraints[o].x.clone())
            })
            .unwrap_or_else(|| constraints[0].x.clone());
        return Err(Error::ConstraintUnsatisfiable { x: blocking });
    }
    Ok(LeveledSubtree { levels })
}

/// Re-checks an amalgamation result by scanning it. Returns the violations.
pub fn amalgamation_audit(
    host: &CodingTree,
    d: usize,
    constraints: &[Constraint],
    t: &LeveledSubtree,
) -> Vec<String> {
    let mut out = Vec::new();
    if t.depth() <= d {
        out.push(format!("only {} levels, expected more than {d}", t.depth()));
    }
    if t.r(d) != LeveledSubtree::approximation(host, d) {
        out.push(format!("does not agree with r_{d} of the host"));
    }
    if let Some(w) = t.nodes().find(|w| !host.contains(w)) {
        out.push(format!("{w} is not a host node"));
    }
    if !isomorphism_check(t, &LeveledSubtree::approximation(host, t.depth())) {
        out.push(format!("not isomorphic to r_{} of the host", t.depth()));
    }
    if t.depth() > 0 {
        match host.decode_structure(&t.coding_nodes()) {
            Ok(s) if Ok(&s) == host.ground_truth().initial_segment(t.depth()).as_ref() => {}
            _ => out
                .push("coding nodes do not decode to an initial segment of the enumeration".into()),
        }
    }
    for u in constraints {
        let above: Vec<&TernaryWord> = t.nodes().filter(|w| u.x.is_prefix_of(w)).collect();
        let governed: Vec<&TernaryWord> = match u.case {
            ConstraintCase::SameRay | ConstraintCase::Full => above
                .iter()
                .copied()
                .filter(|w| u.governs(host, w))
                .collect(),
            ConstraintCase::NewRay => {
                match t.coding_nodes().into_iter().find(|c| u.x.is_prefix_of(c)) {
                    Some(cx) => {
                        let label = host.theta_label(&cx).ok();
                        above
                            .iter()
                            .copied()
                            .filter(|w| cx.is_prefix_of(w) && host.theta_label(w).ok() == label)
                            .collect()
                    }
                    None => Vec::new(),
                }
            }
        };
        if let Some(w) = governed.into_iter().find(|w| !u.admits(w)) {
            out.push(format!(
                "case {} at {}: {w} lies outside U",
                u.case.index(),
                u.x
            ));
        }
    }
    out
}

/// Finite A.3: whether `a`, an approximation inside the host, has a one-level
/// end-extension below length `budget`, with the new nodes covered by
/// `within` when given.
pub fn a3_check(
    host: &CodingTree,
    a: &LeveledSubtree,
    within: Option<&LeveledSubtree>,
    budget: usize,
) -> bool {
    let k = a.depth();
    if k == 0 || k >= host.depth() || a.nodes().any(|w| !host.contains(w)) {
        return false;
    }
    if !isomorphism_check(a, &LeveledSubtree::approximation(host, k)) {
        return false;
    }
    let from = a.level(k - 1).len + 1;
    let mut frontier = Vec::new();
    for w in a.top_successors() {
        match host.locate(&w) {
            Some(r) => frontier.push(Slot {
                region: r,
                owner: None,
            }),
            None => return false,
        }
    }
    let j = coding_position(host, k);
    next_level(host, &frontier, j, from, budget, |_, w| {
        within.is_none_or(|s| s.covers(w))
    })
    .is_some()
}

/// A ray tree above `x` below length `budget`: from `x` it follows its ray
/// and at every coding node keeps digit 0, digit 2 or both.
pub fn ray_tree<R: Rng + ?Sized>(
    host: &CodingTree,
    x: &TernaryWord,
    budget: usize,
    rng: &mut R,
) -> BTreeSet<TernaryWord> {
    let top = budget.min(host.depth());
    let mut out = BTreeSet::new();
    let Some(start) = host.locate(x) else {
        return out;
    };
    let mut stack = vec![start];
    while let Some(r) = stack.pop() {
        let reg = host.region(r);
        let lo = reg.created.max(x.len());
        let hi = reg.split.map_or(top, |t| (t + 1).min(top));
        for len in lo..hi {
            out.insert(host.region_word(r, len));
        }
        if let (Some(t), Some(ch)) = (reg.split, reg.children) {
            if t + 1 < top {
                match rng.gen_range(0..4) {
                    0 => stack.push(ch[0]),
                    1 => stack.push(ch[2]),
                    _ => stack.extend([ch[0], ch[2]]),
                }
            }
        }
    }
    out
}

/// Everything above a node `y` reached from `x` along its ray, plus the path
/// from `x` to `y`.
pub fn cone<R: Rng + ?Sized>(
    host: &CodingTree,
    x: &TernaryWord,
    budget: usize,
    rng: &mut R,
) -> BTreeSet<TernaryWord> {
    let top = budget.min(host.depth());
    let mut out = BTreeSet::new();
    let Some(start) = host.locate(x) else {
        return out;
    };
    let len = rng.gen_range(x.len()..=(x.len() + 3).min(top.saturating_sub(1)).max(x.len()));
    let reach = same_ray_reach(host, start, len);
    let y = reach[rng.gen_range(0..reach.len())];
    let yw = host.region_word(y, len);
    for l in x.len()..=len {
        out.insert(yw.restrict(l));
    }
    let mut stack = vec![y];
    while let Some(r) = stack.pop() {
        let reg = host.region(r);
        let lo = reg.created.max(len);
        let hi = reg.split.map_or(top, |t| (t + 1).min(top));
        for l in lo..hi {
            out.insert(host.region_word(r, l));
        }
        if let (Some(t), Some(ch)) = (reg.split, reg.children) {
            if t + 1 < top {
                stack.extend(ch);
            }
        }
    }
    out
}

/// Random constraints on a nonempty subset of the level-`d` nodes, with the
/// case dictated by the digit leaving the coding node below each `x`.
pub fn random_constraints<R: Rng + ?Sized>(
    host: &CodingTree,
    d: usize,
    budget: usize,
    rng: &mut R,
) -> Vec<Constraint> {
    let xs = host.level(d);
    let mut picked: Vec<usize> = (0..xs.len()).filter(|_| rng.gen_bool(0.5)).collect();
    if picked.is_empty() {
        picked.push(rng.gen_range(0..xs.len()));
    }
    picked
        .into_iter()
        .map(|i| {
            let x = xs[i].clone();
            let digit = (0..x.len())
                .rev()
                .find(|&l| host.is_coding(&x.restrict(l)))
                .and_then(|l| x.digit(l));
            let case = match digit {
                Some(1) if rng.gen_bool(0.5) => ConstraintCase::Full,
                Some(1) => ConstraintCase::NewRay,
                _ => ConstraintCase::SameRay,
            };
            let nodes = match case {
                ConstraintCase::Full => cone(host, &x, budget, rng),
                _ => ray_tree(host, &x, budget, rng),
            };
            Constraint { x, case, nodes }
        })
        .collect()
}

/// `amalgamate` under random constraints: a seeded isomorphic image of an
/// initial part of the host.
pub fn random_subtree<R: Rng + ?Sized>(
    host: &CodingTree,
    d: usize,
    budget: usize,
    rng: &mut R,
) -> Result<LeveledSubtree> {
    let cs = random_constraints(host, d, budget, rng);
    amalgamate(host, d, &cs, budget)
}
