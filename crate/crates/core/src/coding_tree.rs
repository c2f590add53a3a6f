//! The coding tree of 1-types, co-generated with its ground-truth pseudotree.
//!
//! Internally the tree is kept as a set of *regions*. A region is an interval
//! of one ray between two existing points (or above the top one), together
//! with everything that will later be spawned from its interior. At level `n`
//! there are `2n + 1` live regions, one per node of the coding tree, listed in
//! lexicographic order. The point `p_n` lands in exactly one of them: that node
//! is the coding node `c_n`, and the region splits into
//!
//! * digit 0: the part of the interval above `p_n`,
//! * digit 1: the fresh ray starting at `p_n`,
//! * digit 2: the part of the interval below `p_n`.
//!
//! Every other node continues with digit 0.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::pseudotree::{parse_header, ExtensionSpec, FinitePseudotree};
use crate::scheduler::GenericScheduler;
use crate::word::TernaryWord;

pub type RegionId = usize;

/// θ-value of a node: a ray id, or unknown when the node's first coding
/// extension lies beyond the generated depth and would open a new ray.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Theta {
    Known(u32),
    Unknown,
}

impl fmt::Display for Theta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Theta::Known(r) => write!(f, "{r}"),
            Theta::Unknown => f.write_str("?"),
        }
    }
}

/// A label that compares equal exactly when two nodes have (or will have)
/// the same θ. Unknown values are told apart by the region they belong to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ThetaLabel {
    Ray(u32),
    Pending(RegionId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Region {
    pub ray: Option<u32>,
    /// Lower end point; `None` only below the root.
    pub lo: Option<usize>,
    /// Upper end point; `None` when open above.
    pub hi: Option<usize>,
    pub parent: Option<RegionId>,
    pub digit: u8,
    /// First level at which the region is a node.
    pub created: usize,
    /// Level (= point index) at which a point landed in it.
    pub split: Option<usize>,
    pub children: Option<[RegionId; 3]>,
    pub obligation: Option<ExtensionSpec>,
}

pub(crate) const ROOT_REGION: RegionId = 0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodingTree {
    regions: Vec<Region>,
    levels: Vec<Vec<RegionId>>,
    coding: Vec<RegionId>,
    truth: FinitePseudotree,
    live: HashMap<ExtensionSpec, RegionId>,
    max_ray: u32,
}

impl CodingTree {
    /// Depth-1 tree: the empty word, which is `c_0`.
    pub fn root() -> Self {
        let whole = Region {
            ray: Some(0),
            lo: None,
            hi: None,
            parent: None,
            digit: 0,
            created: 0,
            split: None,
            children: None,
            obligation: None,
        };
        let mut t = CodingTree {
            regions: vec![whole],
            levels: vec![vec![ROOT_REGION]],
            coding: vec![],
            truth: FinitePseudotree::new_root(),
            live: HashMap::new(),
            max_ray: 0,
        };
        t.split(ROOT_REGION, 0);
        t
    }

    /// Generates `depth` levels, taking extensions from `sched`.
    pub fn generate(depth: usize, sched: &mut GenericScheduler) -> Self {
        let mut t = Self::root();
        while t.depth() < depth {
            let e = sched.next_extension(&t.truth);
            t.apply(e)
                .expect("scheduler only hands out outstanding obligations");
        }
        t
    }

    /// Generates with the default scheduler.
    pub fn generate_default(depth: usize) -> Self {
        Self::generate(depth, &mut GenericScheduler::new())
    }

    /// Rebuilds the tree produced by a sequence of extensions.
    pub fn from_extensions(log: &[ExtensionSpec]) -> Result<Self> {
        let mut t = Self::root();
        for &e in log {
            t.apply(e)?;
        }
        Ok(t)
    }

    fn split(&mut self, r: RegionId, q: usize) {
        let level = q + 1;
        let ray = self.truth.ray(q);
        let (lo, hi) = (self.regions[r].lo, self.regions[r].hi);
        let above = match hi {
            None => ExtensionSpec::GreaterLeft(q),
            Some(h) => ExtensionSpec::Between(h),
        };
        let specs = [
            Some(above),
            Some(ExtensionSpec::NewRay(q)),
            lo.is_some().then_some(ExtensionSpec::Between(q)),
        ];
        let bounds = [
            (Some(ray), Some(q), hi),
            (None, Some(q), None),
            (Some(ray), lo, Some(q)),
        ];
        let mut children = [0; 3];
        for d in 0..3 {
            let id = self.regions.len();
            children[d] = id;
            let (ray, lo, hi) = bounds[d];
            self.regions.push(Region {
                ray,
                lo,
                hi,
                parent: Some(r),
                digit: d as u8,
                created: level,
                split: None,
                children: None,
                obligation: specs[d],
            });
            if let Some(s) = specs[d] {
                self.live.insert(s, id);
            }
        }
        let reg = &mut self.regions[r];
        reg.split = Some(q);
        reg.children = Some(children);
        self.coding.push(r);
    }

    /// Lands the next point by the given extension.
    pub fn apply(&mut self, e: ExtensionSpec) -> Result<()> {
        let r = *self.live.get(&e).ok_or_else(|| {
            Error::InvalidExtension(format!("{e} is not an open interval of the tree"))
        })?;
        let truth = self.truth.extend(e)?;
        let q = self.truth.len();
        self.live.remove(&e);
        if self.regions[r].ray.is_none() {
            self.max_ray += 1;
            self.regions[r].ray = Some(self.max_ray);
        }
        debug_assert_eq!(self.regions[r].ray, Some(truth.ray(q)));
        self.truth = truth;
        let mut next = self.levels[q - 1].clone();
        let prev = self.coding[q - 1];
        let at = next
            .iter()
            .position(|&x| x == prev)
            .expect("coding region is live");
        next.splice(at..=at, self.regions[prev].children.expect("split"));
        self.levels.push(next);
        self.split(r, q);
        Ok(())
    }

    /// Number of levels; nodes have length `< depth`.
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn ground_truth(&self) -> &FinitePseudotree {
        &self.truth
    }

    /// The extensions that produced this tree, in order.
    pub fn extensions(&self) -> Vec<ExtensionSpec> {
        self.truth.extension_log()
    }

    pub fn node_count(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    pub(crate) fn region(&self, r: RegionId) -> &Region {
        &self.regions[r]
    }

    pub(crate) fn level_regions(&self, n: usize) -> &[RegionId] {
        &self.levels[n]
    }

    pub(crate) fn coding_region(&self, n: usize) -> RegionId {
        self.coding[n]
    }

    pub(crate) fn region_obligation(&self, r: RegionId) -> Option<ExtensionSpec> {
        self.regions[r]
            .obligation
            .filter(|e| self.live.get(e) == Some(&r))
    }

    /// Word of region `r` at level `len`.
    pub(crate) fn region_word(&self, r: RegionId, len: usize) -> TernaryWord {
        let mut digits = vec![0u8; len];
        let mut cur = r;
        while let Some(p) = self.regions[cur].parent {
            let at = self.regions[cur].created - 1;
            digits[at] = self.regions[cur].digit;
            cur = p;
        }
        TernaryWord::from_vec_unchecked(digits)
    }

    /// Region whose node at level `|w|` is `w`.
    pub(crate) fn locate(&self, w: &TernaryWord) -> Option<RegionId> {
        if w.len() >= self.depth() {
            return None;
        }
        let d = w.digits();
        let mut r = ROOT_REGION;
        loop {
            let reg = &self.regions[r];
            match reg.split {
                Some(t) if t < w.len() => {
                    if d[reg.created..t].iter().any(|&x| x != 0) {
                        return None;
                    }
                    r = reg.children.expect("split region has children")[d[t] as usize];
                }
                _ => {
                    return if d[reg.created..].iter().all(|&x| x == 0) {
                        Some(r)
                    } else {
                        None
                    };
                }
            }
        }
    }

    pub fn contains(&self, w: &TernaryWord) -> bool {
        self.locate(w).is_some()
    }

    /// The nodes of length `n` in lexicographic order.
    pub fn level(&self, n: usize) -> Vec<TernaryWord> {
        self.levels[n]
            .iter()
            .map(|&r| self.region_word(r, n))
            .collect()
    }

    pub fn coding_node(&self, n: usize) -> TernaryWord {
        self.region_word(self.coding[n], n)
    }

    pub fn coding_nodes(&self) -> Vec<TernaryWord> {
        (0..self.depth()).map(|n| self.coding_node(n)).collect()
    }

    pub fn is_coding(&self, w: &TernaryWord) -> bool {
        self.locate(w)
            .is_some_and(|r| self.regions[r].split == Some(w.len()))
    }

    /// θ of a node: the ray of the least coding node extending it.
    pub fn theta(&self, w: &TernaryWord) -> Result<Theta> {
        let r = self.locate(w).ok_or_else(|| Error::NodeAbsent(w.clone()))?;
        Ok(self.regions[r].ray.map_or(Theta::Unknown, Theta::Known))
    }

    pub fn theta_label(&self, w: &TernaryWord) -> Result<ThetaLabel> {
        let r = self.locate(w).ok_or_else(|| Error::NodeAbsent(w.clone()))?;
        Ok(self.region_theta_label(r))
    }

    pub(crate) fn region_theta_label(&self, r: RegionId) -> ThetaLabel {
        self.regions[r]
            .ray
            .map_or(ThetaLabel::Pending(r), ThetaLabel::Ray)
    }

    /// Least coding node extending `w` (possibly `w` itself), if within depth.
    pub fn least_coding_extension(&self, w: &TernaryWord) -> Result<Option<TernaryWord>> {
        let r = self.locate(w).ok_or_else(|| Error::NodeAbsent(w.clone()))?;
        Ok(self.regions[r]
            .split
            .filter(|&t| t < self.depth())
            .map(|t| self.region_word(r, t)))
    }

    /// Restriction of the ground truth to the points coded by `nodes`.
    pub fn decode_structure(&self, nodes: &[TernaryWord]) -> Result<FinitePseudotree> {
        let mut points = Vec::with_capacity(nodes.len());
        for w in nodes {
            if !self.is_coding(w) {
                return Err(Error::NotCodingNode(w.clone()));
            }
            points.push(w.len());
        }
        self.truth.restrict(&points)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("CODINGTREE v1 depth={}\n", self.depth());
        for n in 0..self.depth() {
            for &r in &self.levels[n] {
                let kind = if self.regions[r].split == Some(n) {
                    "coding"
                } else {
                    "plain"
                };
                let theta = self.regions[r].ray.map_or(Theta::Unknown, Theta::Known);
                out.push_str(&format!(
                    "{} {kind} theta={theta}\n",
                    self.region_word(r, n)
                ));
            }
        }
        out.push_str(&self.truth.to_text());
        out
    }

    /// Parses the text form. The tree is rebuilt from the embedded ground
    /// truth and every node line is checked against the rebuilt tree.
    pub fn from_text(text: &str) -> Result<Self> {
        let lines: Vec<&str> = text.lines().collect();
        let header = lines.first().ok_or(Error::Parse {
            line: 1,
            msg: "empty input".into(),
        })?;
        let depth = parse_header(header, "CODINGTREE", "depth")
            .map_err(|msg| Error::Parse { line: 1, msg })?;
        if depth == 0 {
            return Err(Error::Parse {
                line: 1,
                msg: "depth must be positive".into(),
            });
        }
        let nodes = depth * depth;
        if lines.len() < 1 + nodes + 1 {
            return Err(Error::Parse {
                line: lines.len() + 1,
                msg: format!("expected {nodes} node lines and a pseudotree"),
            });
        }
        let truth_text = lines[1 + nodes..].join("\n");
        let truth = FinitePseudotree::from_text(&truth_text).map_err(|e| match e {
            Error::Parse { line, msg } => Error::Parse {
                line: line + 1 + nodes,
                msg,
            },
            other => Error::Parse {
                line: 2 + nodes,
                msg: other.to_string(),
            },
        })?;
        if truth.len() != depth {
            return Err(Error::Parse {
                line: 2 + nodes,
                msg: format!("pseudotree has {} points, expected {depth}", truth.len()),
            });
        }
        let tree = Self::from_extensions(&truth.extension_log())?;
        let expected = tree.to_text();
        for (k, (got, want)) in lines
            .iter()
            .zip(expected.lines())
            .enumerate()
            .take(1 + nodes)
        {
            if got != &want {
                return Err(Error::Parse {
                    line: k + 1,
                    msg: format!("expected {want:?}, found {got:?}"),
                });
            }
        }
        Ok(tree)
    }
}

/// A coding tree that can keep growing on request, used when a construction
/// needs more depth than is known in advance.
#[derive(Debug, Clone)]
pub struct HostGenerator {
    tree: CodingTree,
    sched: Option<GenericScheduler>,
    limit: usize,
}

impl HostGenerator {
    /// Grows with `sched` up to `limit` levels.
    pub fn growing(sched: GenericScheduler, limit: usize) -> Self {
        HostGenerator {
            tree: CodingTree::root(),
            sched: Some(sched),
            limit,
        }
    }

    /// A fixed tree; any request for more depth fails.
    pub fn frozen(tree: CodingTree) -> Self {
        let limit = tree.depth();
        HostGenerator {
            tree,
            sched: None,
            limit,
        }
    }

    pub fn tree(&self) -> &CodingTree {
        &self.tree
    }

    pub fn into_tree(self) -> CodingTree {
        self.tree
    }

    fn step(&mut self, demand: Option<RegionId>) -> Result<()> {
        let depth = self.tree.depth();
        let sched = match &mut self.sched {
            Some(s) if depth < self.limit => s,
            _ => {
                return Err(Error::DepthExhausted(format!(
                    "host depth {depth} reached its limit"
                )))
            }
        };
        if let Some(r) = demand {
            sched.set_demand(self.tree.region_obligation(r));
        }
        let e = sched.next_extension(&self.tree.truth);
        self.tree.apply(e)
    }

    /// Makes sure level `n` exists.
    pub fn ensure_level(&mut self, n: usize) -> Result<()> {
        while self.tree.depth() <= n {
            self.step(None)?;
        }
        Ok(())
    }

    /// Adds one level, asking the scheduler to land the point in region `r`.
    pub(crate) fn step_toward(&mut self, r: RegionId) -> Result<()> {
        self.step(Some(r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::word;
    use proptest::prelude::*;

    #[test]
    fn level_sizes_and_root() {
        let t = CodingTree::generate_default(4);
        let sizes: Vec<usize> = (0..4).map(|n| t.level(n).len()).collect();
        assert_eq!(sizes, vec![1, 3, 5, 7]);
        let one = CodingTree::generate_default(1);
        assert_eq!(one.level(0), vec![TernaryWord::empty()]);
        assert!(one.is_coding(&TernaryWord::empty()));
        assert_eq!(one.theta(&TernaryWord::empty()).unwrap(), Theta::Known(0));
        assert_eq!(CodingTree::generate_default(50).node_count(), 2500);
    }

    #[test]
    fn first_levels_by_hand() {
        // p_1 starts a new ray at p_0, so c_1 = <1>
        let t = CodingTree::generate_default(3);
        assert_eq!(t.coding_node(1), word("1"));
        assert_eq!(t.level(1), vec![word("0"), word("1"), word("2")]);
        assert_eq!(t.theta(&word("1")).unwrap(), Theta::Known(1));
        assert_eq!(t.theta(&word("0")).unwrap(), Theta::Known(0));
        assert!(matches!(t.theta(&word("000")), Err(Error::NodeAbsent(_))));
    }

    #[test]
    fn coding_theta_matches_truth() {
        let t = CodingTree::generate_default(30);
        for n in 0..30 {
            let c = t.coding_node(n);
            assert_eq!(c.len(), n);
            assert_eq!(t.theta(&c).unwrap(), Theta::Known(t.ground_truth().ray(n)));
        }
    }

    #[test]
    fn decode_initial_segments() {
        let t = CodingTree::generate_default(20);
        let cs = t.coding_nodes();
        for n in 0..20 {
            let d = t.decode_structure(&cs[..=n]).unwrap();
            assert_eq!(d, t.ground_truth().initial_segment(n + 1).unwrap());
        }
        assert!(matches!(
            t.decode_structure(&[word("0")]),
            Err(Error::NotCodingNode(_))
        ));
    }

    #[test]
    fn text_roundtrip_and_truncation() {
        let t = CodingTree::generate_default(9);
        let text = t.to_text();
        assert!(text.starts_with("CODINGTREE v1 depth=9\n- coding theta=0\n"));
        let back = CodingTree::from_text(&text).unwrap();
        assert_eq!(back.to_text(), text);
        let cut: String = text.lines().take(20).map(|l| format!("{l}\n")).collect();
        assert!(matches!(
            CodingTree::from_text(&cut),
            Err(Error::Parse { .. })
        ));
        let tampered = text.replacen("coding theta=1", "plain theta=1", 1);
        assert!(matches!(
            CodingTree::from_text(&tampered),
            Err(Error::Parse { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(30))]

        #[test]
        fn shape_invariants(seed in 0u64..10_000, depth in 1usize..40) {
            let t = CodingTree::generate(depth, &mut GenericScheduler::seeded(seed));
            for n in 0..depth {
                let lvl = t.level(n);
                prop_assert_eq!(lvl.len(), 2 * n + 1);
                prop_assert!(lvl.windows(2).all(|w| w[0] < w[1]));
                prop_assert_eq!(lvl.iter().filter(|w| t.is_coding(w)).count(), 1);
                if n + 1 < depth {
                    let next = t.level(n + 1);
                    for w in &lvl {
                        let succ: Vec<u8> = next.iter().filter(|x| w.is_prefix_of(x)).map(|x| x.digit(n).unwrap()).collect();
                        if t.is_coding(w) {
                            prop_assert_eq!(succ, vec![0, 1, 2]);
                        } else {
                            prop_assert_eq!(succ, vec![0]);
                        }
                    }
                }
            }
        }

        #[test]
        fn theta_is_theta_of_least_coding_extension(seed in 0u64..10_000) {
            let t = CodingTree::generate(30, &mut GenericScheduler::seeded(seed));
            for n in 0..30 {
                for w in t.level(n) {
                    if let Some(c) = t.least_coding_extension(&w).unwrap() {
                        prop_assert_eq!(t.theta(&w).unwrap(), t.theta(&c).unwrap());
                    }
                }
            }
        }

        #[test]
        fn condition_e_digit_zero_or_two_keeps_theta(seed in 0u64..10_000) {
            let t = CodingTree::generate(30, &mut GenericScheduler::seeded(seed));
            let cs = t.coding_nodes();
            for c in &cs {
                for d in [0u8, 2] {
                    if c.len() + 1 >= t.depth() { continue; }
                    let s = c.child(d);
                    if let Some(next) = t.least_coding_extension(&s).unwrap() {
                        prop_assert_eq!(t.theta(&next).unwrap(), t.theta(c).unwrap());
                    }
                }
            }
        }
    }
}
