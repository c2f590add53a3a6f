//! Finite rooted two-branching trees: the finite substructures of the
//! pseudotree, with explicit order, meet and lexicographic tables.
//!
//! Every point `p` has at most two immediate successors: a *left* one that
//! continues the ray of `p` (same ray id) and a *right* one that starts a new
//! ray. Left successors are lexicographically smaller than right ones, and the
//! lexicographic order of two incomparable points is decided at their meet.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// How a point entered the tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PointKind {
    Root,
    Left,
    NewRay,
    Between,
}

impl PointKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PointKind::Root => "root",
            PointKind::Left => "left",
            PointKind::NewRay => "newray",
            PointKind::Between => "between",
        }
    }
}

impl FromStr for PointKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "root" => PointKind::Root,
            "left" => PointKind::Left,
            "newray" => PointKind::NewRay,
            "between" => PointKind::Between,
            other => {
                return Err(Error::InconsistentTree(format!(
                    "unknown point kind {other:?}"
                )))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExtensionKind {
    GreaterLeft,
    NewRay,
    Between,
}

impl ExtensionKind {
    pub const ALL: [ExtensionKind; 3] = [
        ExtensionKind::GreaterLeft,
        ExtensionKind::NewRay,
        ExtensionKind::Between,
    ];
}

/// A one-point extension request.
///
/// * `GreaterLeft(i)`: a new maximal point on the ray of `p_i`, directly above
///   it. Requires that `p_i` has no left successor yet.
/// * `NewRay(i)`: a new maximal point starting a fresh ray at `p_i`. Requires
///   that `p_i` has no right successor yet.
/// * `Between(i)`: a new point strictly between `p_i` and its immediate
///   predecessor, on the ray of `p_i`. Requires `i != 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExtensionSpec {
    GreaterLeft(usize),
    NewRay(usize),
    Between(usize),
}

impl ExtensionSpec {
    pub fn new(kind: ExtensionKind, target: usize) -> Self {
        match kind {
            ExtensionKind::GreaterLeft => ExtensionSpec::GreaterLeft(target),
            ExtensionKind::NewRay => ExtensionSpec::NewRay(target),
            ExtensionKind::Between => ExtensionSpec::Between(target),
        }
    }

    pub fn kind(self) -> ExtensionKind {
        match self {
            ExtensionSpec::GreaterLeft(_) => ExtensionKind::GreaterLeft,
            ExtensionSpec::NewRay(_) => ExtensionKind::NewRay,
            ExtensionSpec::Between(_) => ExtensionKind::Between,
        }
    }

    pub fn target(self) -> usize {
        match self {
            ExtensionSpec::GreaterLeft(i)
            | ExtensionSpec::NewRay(i)
            | ExtensionSpec::Between(i) => i,
        }
    }
}

impl fmt::Display for ExtensionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtensionSpec::GreaterLeft(i) => write!(f, "left({i})"),
            ExtensionSpec::NewRay(i) => write!(f, "newray({i})"),
            ExtensionSpec::Between(i) => write!(f, "between({i})"),
        }
    }
}

/// A finite rooted two-branching tree on points `0..n`, point `0` the root.
#[derive(Clone, PartialEq, Eq)]
pub struct FinitePseudotree {
    parent: Vec<Option<usize>>,
    ray: Vec<u32>,
    kind: Vec<PointKind>,
    depth: Vec<usize>,
    // path[i][d] is the ancestor-or-self of i at depth d
    path: Vec<Vec<usize>>,
    prec: Vec<bool>,
    meet: Vec<usize>,
    lex: Vec<bool>,
}

impl fmt::Debug for FinitePseudotree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FinitePseudotree")
            .field("parent", &self.parent)
            .field("ray", &self.ray)
            .field("kind", &self.kind)
            .finish()
    }
}

impl FinitePseudotree {
    /// The one-point tree `{p_0}`.
    pub fn new_root() -> Self {
        Self::from_parts(vec![None], vec![0], vec![PointKind::Root]).expect("root tree is valid")
    }

    /// Builds a tree from final parent pointers, ray ids and insertion kinds,
    /// validating every structural invariant.
    pub fn from_parts(
        parent: Vec<Option<usize>>,
        ray: Vec<u32>,
        kind: Vec<PointKind>,
    ) -> Result<Self> {
        Self::build(parent, ray, Some(kind))
    }

    /// Like [`from_parts`](Self::from_parts) but derives the kinds from the
    /// positions of the points.
    pub fn from_parents_and_rays(parent: Vec<Option<usize>>, ray: Vec<u32>) -> Result<Self> {
        Self::build(parent, ray, None)
    }

    fn build(
        parent: Vec<Option<usize>>,
        ray: Vec<u32>,
        kind: Option<Vec<PointKind>>,
    ) -> Result<Self> {
        let n = parent.len();
        if n == 0 {
            return Err(Error::InconsistentTree("empty tree".into()));
        }
        if ray.len() != n || kind.as_ref().is_some_and(|k| k.len() != n) {
            return Err(Error::InconsistentTree("column lengths differ".into()));
        }
        if kind.as_ref().is_some_and(|k| k[0] != PointKind::Root) {
            return Err(Error::InconsistentTree("point 0 must be the root".into()));
        }
        if parent[0].is_some() || ray[0] != 0 {
            return Err(Error::InconsistentTree(
                "point 0 must be the root with ray 0".into(),
            ));
        }
        for (i, p) in parent.iter().enumerate().skip(1) {
            match p {
                None => return Err(Error::InconsistentTree(format!("point {i} has no parent"))),
                Some(q) if *q >= n || *q == i => {
                    return Err(Error::InconsistentTree(format!(
                        "point {i} has bad parent {q}"
                    )))
                }
                _ => {}
            }
        }
        // depths, rejecting cycles
        let mut depth = vec![usize::MAX; n];
        depth[0] = 0;
        for i in 0..n {
            let mut chain = Vec::new();
            let mut cur = i;
            while depth[cur] == usize::MAX {
                chain.push(cur);
                if chain.len() > n {
                    return Err(Error::InconsistentTree(
                        "parent pointers contain a cycle".into(),
                    ));
                }
                cur = parent[cur].expect("non-root has parent");
            }
            let mut d = depth[cur];
            for &c in chain.iter().rev() {
                d += 1;
                depth[c] = d;
            }
        }
        let mut path = Vec::with_capacity(n);
        for i in 0..n {
            let mut p = vec![0; depth[i] + 1];
            let mut cur = i;
            loop {
                p[depth[cur]] = cur;
                match parent[cur] {
                    Some(q) => cur = q,
                    None => break,
                }
            }
            path.push(p);
        }
        let mut prec = vec![false; n * n];
        for j in 0..n {
            for &a in &path[j][..depth[j]] {
                prec[a * n + j] = true;
            }
        }
        // meets, rows in order of depth
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| (depth[i], i));
        let mut meet = vec![usize::MAX; n * n];
        for (pos, &a) in order.iter().enumerate() {
            for &b in &order[..=pos] {
                let m = if a == b || prec[b * n + a] {
                    b
                } else {
                    let pa = parent[a].expect("deeper point is not the root");
                    meet[pa * n + b]
                };
                meet[a * n + b] = m;
                meet[b * n + a] = m;
            }
        }
        // successor shape and ray discipline
        let mut left = vec![None; n];
        let mut right = vec![None; n];
        for i in 1..n {
            let p = parent[i].expect("checked");
            let slot = if ray[i] == ray[p] {
                &mut left[p]
            } else {
                &mut right[p]
            };
            if let Some(other) = *slot {
                return Err(Error::InconsistentTree(format!(
                    "point {p} has two successors ({other}, {i}) on the same side"
                )));
            }
            *slot = Some(i);
        }
        let mut max_ray = 0u32;
        for (i, &r) in ray.iter().enumerate() {
            if r > max_ray + 1 || (r == max_ray + 1 && i == 0) {
                return Err(Error::InconsistentTree(format!(
                    "ray ids must appear in increasing order (point {i} has ray {r})"
                )));
            }
            max_ray = max_ray.max(r);
        }
        // each ray is a chain whose lowest point leaves its parent's ray
        let mut ray_base: Vec<Option<usize>> = vec![None; max_ray as usize + 1];
        for i in 0..n {
            let starts = match parent[i] {
                None => true,
                Some(p) => ray[p] != ray[i],
            };
            if starts {
                let slot = &mut ray_base[ray[i] as usize];
                if slot.is_some() {
                    return Err(Error::InconsistentTree(format!(
                        "ray {} starts twice",
                        ray[i]
                    )));
                }
                *slot = Some(i);
            }
        }
        let mut lex = vec![false; n * n];
        for a in 0..n {
            for b in 0..n {
                if a == b || prec[a * n + b] || prec[b * n + a] {
                    continue;
                }
                let m = meet[a * n + b];
                let ca = path[a][depth[m] + 1];
                lex[a * n + b] = ray[ca] == ray[m];
            }
        }
        let given = kind;
        let mut tree = FinitePseudotree {
            parent,
            ray,
            kind: vec![PointKind::Root; n],
            depth,
            path,
            prec,
            meet,
            lex,
        };
        let derived: Vec<PointKind> = (0..n).map(|i| tree.derived_kind(i)).collect();
        tree.kind = given.unwrap_or_else(|| derived.clone());
        for (i, d) in derived.iter().enumerate().skip(1) {
            if *d != tree.kind[i] {
                return Err(Error::InconsistentTree(format!(
                    "point {i} is recorded as {} but its position says {}",
                    tree.kind[i].as_str(),
                    d.as_str()
                )));
            }
        }
        Ok(tree)
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        self.parent[i]
    }

    pub fn ray(&self, i: usize) -> u32 {
        self.ray[i]
    }

    pub fn rays(&self) -> &[u32] {
        &self.ray
    }

    pub fn kind(&self, i: usize) -> PointKind {
        self.kind[i]
    }

    pub fn depth(&self, i: usize) -> usize {
        self.depth[i]
    }

    pub fn max_ray(&self) -> u32 {
        self.ray.iter().copied().max().unwrap_or(0)
    }

    /// Strict tree order `p_i ≺ p_j`.
    pub fn prec(&self, i: usize, j: usize) -> bool {
        self.prec[i * self.len() + j]
    }

    pub fn preceq(&self, i: usize, j: usize) -> bool {
        i == j || self.prec(i, j)
    }

    pub fn comparable(&self, i: usize, j: usize) -> bool {
        self.preceq(i, j) || self.prec(j, i)
    }

    pub fn meet(&self, i: usize, j: usize) -> usize {
        self.meet[i * self.len() + j]
    }

    /// `p_i <lex p_j`; only ever true for incomparable pairs.
    pub fn lex(&self, i: usize, j: usize) -> bool {
        self.lex[i * self.len() + j]
    }

    pub fn left_child(&self, i: usize) -> Option<usize> {
        (0..self.len()).find(|&c| self.parent[c] == Some(i) && self.ray[c] == self.ray[i])
    }

    pub fn right_child(&self, i: usize) -> Option<usize> {
        (0..self.len()).find(|&c| self.parent[c] == Some(i) && self.ray[c] != self.ray[i])
    }

    /// Kind the point would have been given when it was inserted, judged by
    /// the position of `i` among points `0..=i`.
    fn derived_kind(&self, i: usize) -> PointKind {
        if i == 0 {
            return PointKind::Root;
        }
        if (0..i).any(|j| self.prec(i, j)) {
            return PointKind::Between;
        }
        let p = self.path[i][..self.depth[i]]
            .iter()
            .rev()
            .copied()
            .find(|&a| a < i)
            .expect("root precedes");
        if self.ray[p] == self.ray[i] {
            PointKind::Left
        } else {
            PointKind::NewRay
        }
    }

    pub fn is_valid_extension(&self, e: ExtensionSpec) -> bool {
        let i = e.target();
        if i >= self.len() {
            return false;
        }
        match e {
            ExtensionSpec::GreaterLeft(_) => self.left_child(i).is_none(),
            ExtensionSpec::NewRay(_) => self.right_child(i).is_none(),
            ExtensionSpec::Between(_) => i != 0,
        }
    }

    /// One-point extension. The input is left untouched and is a substructure
    /// of the result under the identity map.
    pub fn extend(&self, e: ExtensionSpec) -> Result<Self> {
        let i = e.target();
        if i >= self.len() {
            return Err(Error::InvalidExtension(format!("{e}: no point {i}")));
        }
        if !self.is_valid_extension(e) {
            let why = match e {
                ExtensionSpec::GreaterLeft(_) => "target already has a left successor",
                ExtensionSpec::NewRay(_) => "target already has a right successor",
                ExtensionSpec::Between(_) => "the root has no predecessor",
            };
            return Err(Error::InvalidExtension(format!("{e}: {why}")));
        }
        let new = self.len();
        let mut parent = self.parent.clone();
        let mut ray = self.ray.clone();
        let mut kind = self.kind.clone();
        match e {
            ExtensionSpec::GreaterLeft(_) => {
                parent.push(Some(i));
                ray.push(self.ray[i]);
                kind.push(PointKind::Left);
            }
            ExtensionSpec::NewRay(_) => {
                parent.push(Some(i));
                ray.push(self.max_ray() + 1);
                kind.push(PointKind::NewRay);
            }
            ExtensionSpec::Between(_) => {
                parent.push(self.parent[i]);
                parent[i] = Some(new);
                ray.push(self.ray[i]);
                kind.push(PointKind::Between);
            }
        }
        Self::from_parts(parent, ray, kind)
    }

    /// Restriction to the given points (any order), reindexed by increasing
    /// original index, with ray ids relabelled in order of first appearance.
    pub fn restrict(&self, points: &[usize]) -> Result<Self> {
        let mut pts: Vec<usize> = points.to_vec();
        pts.sort_unstable();
        pts.dedup();
        if pts.is_empty() {
            return Err(Error::InconsistentTree("empty restriction".into()));
        }
        if let Some(&bad) = pts.iter().find(|&&p| p >= self.len()) {
            return Err(Error::PointOutOfRange(bad));
        }
        let mut index = vec![usize::MAX; self.len()];
        for (k, &p) in pts.iter().enumerate() {
            index[p] = k;
        }
        for (a_pos, &a) in pts.iter().enumerate() {
            for &b in &pts[a_pos + 1..] {
                if index[self.meet(a, b)] == usize::MAX {
                    return Err(Error::NotMeetClosed(a, b));
                }
            }
        }
        // the least point must be below everything
        let root = pts[0];
        if pts.iter().any(|&p| !self.preceq(root, p)) {
            let other = *pts
                .iter()
                .find(|&&p| !self.preceq(root, p))
                .expect("exists");
            return Err(Error::NotMeetClosed(root, other));
        }
        let mut relabel = std::collections::HashMap::new();
        let mut parent = Vec::with_capacity(pts.len());
        let mut ray = Vec::with_capacity(pts.len());
        for &p in &pts {
            let par = self.path[p][..self.depth[p]]
                .iter()
                .rev()
                .copied()
                .find(|&a| index[a] != usize::MAX);
            parent.push(par.map(|a| index[a]));
            let next = relabel.len() as u32;
            ray.push(*relabel.entry(self.ray[p]).or_insert(next));
        }
        Self::from_parents_and_rays(parent, ray)
    }

    /// The extension that created each point `1..n`, recovered from the final
    /// tree. Replaying it from the root reproduces `self`.
    pub fn extension_log(&self) -> Vec<ExtensionSpec> {
        (1..self.len())
            .map(|k| {
                let below_k = |i: usize| -> Option<usize> {
                    self.path[i][..self.depth[i]]
                        .iter()
                        .rev()
                        .copied()
                        .find(|&a| a < k)
                };
                match self.kind[k] {
                    PointKind::Between => {
                        // the earliest-indexed point directly above k among 0..k
                        let succ = (0..k)
                            .filter(|&j| self.prec(k, j) && below_k(j) == below_k(k))
                            .find(|&j| {
                                !(0..k).any(|x| x != j && self.prec(k, x) && self.prec(x, j))
                            })
                            .expect("between point has a successor");
                        ExtensionSpec::Between(succ)
                    }
                    PointKind::Left => ExtensionSpec::GreaterLeft(below_k(k).expect("non-root")),
                    PointKind::NewRay => ExtensionSpec::NewRay(below_k(k).expect("non-root")),
                    PointKind::Root => unreachable!("only point 0 is the root"),
                }
            })
            .collect()
    }

    /// Applies extensions in order, starting from the one-point tree.
    pub fn replay(log: &[ExtensionSpec]) -> Result<Self> {
        let mut t = Self::new_root();
        for &e in log {
            t = t.extend(e)?;
        }
        Ok(t)
    }

    /// The substructure on points `0..n`.
    pub fn initial_segment(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.len() {
            return Err(Error::PointOutOfRange(n));
        }
        let pts: Vec<usize> = (0..n).collect();
        self.restrict(&pts)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("PSEUDOTREE v1 n={}\n", self.len());
        for i in 0..self.len() {
            let p = self.parent[i].map_or_else(|| "-".to_string(), |p| p.to_string());
            out.push_str(&format!(
                "{i} {p} {} {}\n",
                self.ray[i],
                self.kind[i].as_str()
            ));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty input".into(),
        })?;
        let n =
            parse_header(header, "PSEUDOTREE", "n").map_err(|msg| Error::Parse { line: 1, msg })?;
        let mut parent = Vec::with_capacity(n);
        let mut ray = Vec::with_capacity(n);
        let mut kind = Vec::with_capacity(n);
        for (idx, line) in lines.take(n) {
            let lineno = idx + 1;
            let err = |msg: String| Error::Parse { line: lineno, msg };
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 4 {
                return Err(err(format!("expected 4 fields, found {}", f.len())));
            }
            let i: usize = f[0]
                .parse()
                .map_err(|_| err(format!("bad index {:?}", f[0])))?;
            if i != parent.len() {
                return Err(err(format!("expected point {}, found {i}", parent.len())));
            }
            parent.push(if f[1] == "-" {
                None
            } else {
                Some(
                    f[1].parse()
                        .map_err(|_| err(format!("bad parent {:?}", f[1])))?,
                )
            });
            ray.push(
                f[2].parse()
                    .map_err(|_| err(format!("bad ray {:?}", f[2])))?,
            );
            kind.push(f[3].parse().map_err(|e: Error| err(e.to_string()))?);
        }
        if parent.len() != n {
            return Err(Error::Parse {
                line: parent.len() + 2,
                msg: format!("expected {n} points"),
            });
        }
        Self::from_parts(parent, ray, kind)
    }
}

/// Parses `<TAG> v1 <key>=<value>` and returns the value.
pub(crate) fn parse_header(line: &str, tag: &str, key: &str) -> std::result::Result<usize, String> {
    let f: Vec<&str> = line.split_whitespace().collect();
    if f.len() != 3 || f[0] != tag || f[1] != "v1" {
        return Err(format!("expected header `{tag} v1 {key}=N`"));
    }
    let v = f[2]
        .strip_prefix(key)
        .and_then(|s| s.strip_prefix('='))
        .ok_or_else(|| format!("expected `{key}=N`"))?;
    v.parse().map_err(|_| format!("bad count {v:?}"))
}

/// Whether `f` (point of `s` to point of `t`) preserves order, meets, rays
/// equality and the lexicographic order.
pub fn is_substructure_embedding(s: &FinitePseudotree, t: &FinitePseudotree, f: &[usize]) -> bool {
    let n = s.len();
    if f.len() != n || f.iter().any(|&x| x >= t.len()) {
        return false;
    }
    for a in 0..n {
        for b in 0..n {
            let (fa, fb) = (f[a], f[b]);
            if (a == b) != (fa == fb)
                || s.prec(a, b) != t.prec(fa, fb)
                || f[s.meet(a, b)] != t.meet(fa, fb)
                || s.lex(a, b) != t.lex(fa, fb)
                || (s.ray(a) == s.ray(b)) != (t.ray(fa) == t.ray(fb))
            {
                return false;
            }
        }
    }
    true
}

/// Whether the points are pairwise comparable.
pub fn is_chain(t: &FinitePseudotree, points: &[usize]) -> bool {
    points.iter().all(|&a| a < t.len())
        && points
            .iter()
            .enumerate()
            .all(|(k, &a)| points[k + 1..].iter().all(|&b| t.comparable(a, b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_log() -> impl Strategy<Value = Vec<(u8, usize)>> {
        proptest::collection::vec((0u8..3, 0usize..64), 0..24)
    }

    /// Applies the valid steps of a random log, skipping invalid ones.
    fn grow(steps: &[(u8, usize)]) -> (FinitePseudotree, Vec<FinitePseudotree>) {
        let mut t = FinitePseudotree::new_root();
        let mut history = vec![t.clone()];
        for &(k, i) in steps {
            let e = ExtensionSpec::new(ExtensionKind::ALL[k as usize], i % t.len());
            if let Ok(next) = t.extend(e) {
                t = next;
                history.push(t.clone());
            }
        }
        (t, history)
    }

    #[test]
    fn first_extensions() {
        let t = FinitePseudotree::new_root();
        assert!(t.extend(ExtensionSpec::Between(0)).is_err());
        let t = t.extend(ExtensionSpec::GreaterLeft(0)).unwrap();
        assert!(t.extend(ExtensionSpec::GreaterLeft(0)).is_err());
        let t = t.extend(ExtensionSpec::NewRay(0)).unwrap();
        assert_eq!(t.ray(2), 1);
        assert!(t.lex(1, 2) && !t.lex(2, 1));
        assert_eq!(t.meet(1, 2), 0);
        let t = t.extend(ExtensionSpec::Between(1)).unwrap();
        assert_eq!(t.parent(3), Some(0));
        assert_eq!(t.parent(1), Some(3));
        assert_eq!(t.ray(3), 0);
        assert!(t.prec(3, 1) && t.prec(0, 3));
        assert_eq!(t.meet(1, 2), 0);
        assert!(t.lex(3, 2));
    }

    #[test]
    fn text_roundtrip_and_errors() {
        let t = FinitePseudotree::replay(&[
            ExtensionSpec::NewRay(0),
            ExtensionSpec::GreaterLeft(0),
            ExtensionSpec::Between(1),
            ExtensionSpec::NewRay(3),
        ])
        .unwrap();
        let text = t.to_text();
        assert!(text.starts_with("PSEUDOTREE v1 n=5\n0 - 0 root\n"));
        assert_eq!(FinitePseudotree::from_text(&text).unwrap(), t);
        assert!(FinitePseudotree::from_text("PSEUDOTREE v1 n=2\n0 - 0 root\n").is_err());
        assert!(
            FinitePseudotree::from_text("PSEUDOTREE v1 n=2\n0 - 0 root\n1 0 0 newray\n").is_err()
        );
        assert!(FinitePseudotree::from_text(
            "PSEUDOTREE v1 n=3\n0 - 0 root\n1 0 0 left\n2 0 0 left\n"
        )
        .is_err());
    }

    #[test]
    fn restrict_requires_meets() {
        let t =
            FinitePseudotree::replay(&[ExtensionSpec::GreaterLeft(0), ExtensionSpec::NewRay(0)])
                .unwrap();
        assert_eq!(t.restrict(&[1, 2]), Err(Error::NotMeetClosed(1, 2)));
        let r = t.restrict(&[0, 2]).unwrap();
        assert_eq!(r.kind(1), PointKind::NewRay);
        assert_eq!(r.ray(1), 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn extension_keeps_old_tree_as_substructure(steps in arb_log()) {
            let (_, history) = grow(&steps);
            for w in history.windows(2) {
                let id: Vec<usize> = (0..w[0].len()).collect();
                prop_assert!(is_substructure_embedding(&w[0], &w[1], &id));
            }
        }

        #[test]
        fn meets_and_lex_are_coherent(steps in arb_log()) {
            let (t, _) = grow(&steps);
            let n = t.len();
            for a in 0..n {
                for b in 0..n {
                    let m = t.meet(a, b);
                    prop_assert_eq!(m, t.meet(b, a));
                    prop_assert!(t.preceq(m, a) && t.preceq(m, b));
                    if t.comparable(a, b) {
                        prop_assert!(!t.lex(a, b));
                    } else {
                        prop_assert!(t.lex(a, b) ^ t.lex(b, a));
                    }
                    for c in 0..n {
                        prop_assert_eq!(t.meet(t.meet(a, b), c), t.meet(a, t.meet(b, c)));
                        if t.lex(a, b) && t.lex(b, c) {
                            prop_assert!(t.lex(a, c));
                        }
                    }
                }
            }
        }

        #[test]
        fn log_replays_to_same_tree(steps in arb_log()) {
            let (t, history) = grow(&steps);
            let log = t.extension_log();
            prop_assert_eq!(&FinitePseudotree::replay(&log).unwrap(), &t);
            for (k, h) in history.iter().enumerate() {
                prop_assert_eq!(&t.initial_segment(k + 1).unwrap(), h);
            }
        }

        #[test]
        fn text_roundtrip(steps in arb_log()) {
            let (t, _) = grow(&steps);
            prop_assert_eq!(FinitePseudotree::from_text(&t.to_text()).unwrap(), t);
        }
    }
}
