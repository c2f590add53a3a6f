//! Exhaustive search for homogeneous level products on small binary trees.
//!
//! Each tree is the full binary tree of its height over the digits `{0,2}`;
//! a node of length `l` is stored as `l` bits, bit `p` set when digit `p` is
//! 2. A colouring assigns a colour to every tuple of equal-length nodes, one
//! per tree, at every length where the distinguished tree splits.
//!
//! A witness picks lengths `M` and, in every tree, a strong subtree whose
//! nodes on `M` double from one length of `M` to the next. It is homogeneous
//! when all tuples on the same length of `M` share one colour. The answer is
//! only about the finite instance.

use rand::Rng;

use crate::error::{Error, Result};
use crate::word::TernaryWord;

pub const MAX_TREES: usize = 3;
pub const MAX_HEIGHT: usize = 7;
pub const MAX_COLORS: usize = 3;
/// Cap on colour lookups in one search.
pub const MAX_EVALUATIONS: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HlInstance {
    heights: Vec<usize>,
    i_star: usize,
    colors: u8,
    /// Per length in `levels`, colours indexed by the tuple code.
    coloring: Vec<Vec<u8>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HlWitness {
    pub levels: Vec<usize>,
    /// `trees[i][j]`: nodes of tree `i` at length `levels[j]`.
    pub trees: Vec<Vec<Vec<u32>>>,
    pub color: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HlOutcome {
    Witness(HlWitness),
    Exhausted,
}

/// The word of a node of length `len`.
pub fn node_word(len: usize, bits: u32) -> TernaryWord {
    let mut w = TernaryWord::empty();
    for p in 0..len {
        w.push(if bits >> p & 1 == 1 { 2 } else { 0 });
    }
    w
}

impl HlInstance {
    fn check_limits(heights: &[usize], i_star: usize, colors: u8) -> Result<()> {
        let n = heights.len();
        if n == 0 || i_star >= n || colors == 0 || heights.contains(&0) {
            return Err(Error::Config(
                "need at least one tree, nonzero heights and colours, and i* < n".into(),
            ));
        }
        if n > MAX_TREES || heights.iter().any(|&h| h > MAX_HEIGHT) || colors as usize > MAX_COLORS
        {
            return Err(Error::InstanceTooLarge(format!(
                "n = {n}, heights {heights:?}, r = {colors}; limits are n <= {MAX_TREES}, h <= {MAX_HEIGHT}, r <= {MAX_COLORS}"
            )));
        }
        Ok(())
    }

    /// Lengths carrying colours: splitting lengths of the distinguished tree
    /// present in every tree.
    fn levels_for(heights: &[usize], i_star: usize) -> usize {
        let min = heights.iter().copied().min().unwrap_or(0);
        (heights[i_star] - 1).min(min)
    }

    /// Builds an instance from a colouring function of `(length, nodes)`.
    pub fn from_fn<F>(heights: Vec<usize>, i_star: usize, colors: u8, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, &[u32]) -> u8,
    {
        Self::check_limits(&heights, i_star, colors)?;
        let n = heights.len();
        let levels = Self::levels_for(&heights, i_star);
        let mut coloring = Vec::with_capacity(levels);
        let mut tuple = vec![0u32; n];
        for l in 0..levels {
            let size = 1usize << (l * n);
            let mut row = Vec::with_capacity(size);
            for code in 0..size {
                for (i, t) in tuple.iter_mut().enumerate() {
                    *t = ((code >> (i * l)) & ((1 << l) - 1)) as u32;
                }
                let c = f(l, &tuple);
                if c >= colors {
                    return Err(Error::Config(format!("colour {c} out of range")));
                }
                row.push(c);
            }
            coloring.push(row);
        }
        Ok(HlInstance {
            heights,
            i_star,
            colors,
            coloring,
        })
    }

    pub fn random<R: Rng + ?Sized>(
        heights: Vec<usize>,
        i_star: usize,
        colors: u8,
        rng: &mut R,
    ) -> Result<Self> {
        Self::from_fn(heights, i_star, colors, |_, _| rng.gen_range(0..colors))
    }

    pub fn constant(heights: Vec<usize>, i_star: usize, colors: u8, color: u8) -> Result<Self> {
        Self::from_fn(heights, i_star, colors, |_, _| color)
    }

    pub fn trees(&self) -> usize {
        self.heights.len()
    }

    pub fn heights(&self) -> &[usize] {
        &self.heights
    }

    pub fn i_star(&self) -> usize {
        self.i_star
    }

    pub fn colors(&self) -> u8 {
        self.colors
    }

    /// Lengths on which the colouring is defined: `0..levels()`.
    pub fn levels(&self) -> usize {
        self.coloring.len()
    }

    pub fn color(&self, len: usize, tuple: &[u32]) -> u8 {
        let code = tuple
            .iter()
            .enumerate()
            .fold(0usize, |acc, (i, &t)| acc | (t as usize) << (i * len));
        self.coloring[len][code]
    }

    fn is_constant(&self) -> Option<u8> {
        let first = *self.coloring.first()?.first()?;
        self.coloring
            .iter()
            .flatten()
            .all(|&c| c == first)
            .then_some(first)
    }

    fn full_trees(&self, color: u8) -> HlWitness {
        let levels: Vec<usize> = (0..self.levels()).collect();
        let trees = (0..self.trees())
            .map(|_| levels.iter().map(|&l| (0..1u32 << l).collect()).collect())
            .collect();
        HlWitness {
            levels,
            trees,
            color,
        }
    }
}

struct Search<'a> {
    inst: &'a HlInstance,
    levels: Vec<usize>,
    trees: Vec<Vec<Vec<u32>>>,
    color: Option<u8>,
    evaluations: u64,
}

impl Search<'_> {
    /// Candidate nodes for slot `idx` of tree `i` on level `j`.
    fn candidates(&self, i: usize, j: usize, idx: usize) -> Vec<u32> {
        let l = self.levels[j];
        if j == 0 {
            return (0..1u32 << l).collect();
        }
        let pl = self.levels[j - 1];
        let parent = self.trees[i][j - 1][idx / 2];
        let base = parent | ((idx % 2) as u32) << pl;
        let free = l - pl - 1;
        (0..1u32 << free).map(|x| base | x << (pl + 1)).collect()
    }

    /// Colours of the tuples through `v` in tree `i` whose other entries are
    /// already placed on level `j`.
    fn consistent(&mut self, i: usize, j: usize, v: u32) -> Result<bool> {
        let n = self.inst.trees();
        if (0..n).any(|k| k != i && self.trees[k][j].is_empty()) {
            return Ok(true);
        }
        let l = self.levels[j];
        let mut tuple = vec![0u32; n];
        tuple[i] = v;
        let others: Vec<usize> = (0..n).filter(|&k| k != i).collect();
        let mut idx = vec![0usize; others.len()];
        loop {
            for (p, &k) in others.iter().enumerate() {
                tuple[k] = self.trees[k][j][idx[p]];
            }
            self.evaluations += 1;
            if self.evaluations > MAX_EVALUATIONS {
                return Err(Error::InstanceTooLarge(format!(
                    "more than {MAX_EVALUATIONS} evaluations"
                )));
            }
            let c = self.inst.color(l, &tuple);
            match self.color {
                None => self.color = Some(c),
                Some(x) if x != c => return Ok(false),
                _ => {}
            }
            let mut p = 0;
            loop {
                if p == others.len() {
                    return Ok(true);
                }
                idx[p] += 1;
                if idx[p] < self.trees[others[p]][j].len() {
                    break;
                }
                idx[p] = 0;
                p += 1;
            }
        }
    }

    /// Fills level `j` slot by slot, trees interleaved.
    fn fill(&mut self, j: usize, slot: usize) -> Result<bool> {
        let n = self.inst.trees();
        let width = 1usize << j;
        if slot == width * n {
            return if j + 1 == self.levels.len() {
                Ok(true)
            } else {
                self.fill(j + 1, 0)
            };
        }
        let (idx, i) = (slot / n, slot % n);
        let saved = self.color;
        for v in self.candidates(i, j, idx) {
            self.trees[i][j].push(v);
            if self.consistent(i, j, v)? && self.fill(j, slot + 1)? {
                return Ok(true);
            }
            self.trees[i][j].pop();
            self.color = saved;
        }
        Ok(false)
    }
}

/// Looks for a witness with `target` lengths, trying length sets in
/// lexicographic order. A constant colouring returns the full trees.
pub fn hl_micro_search(inst: &HlInstance, target: usize) -> Result<HlOutcome> {
    if target == 0 {
        return Err(Error::Config("target must be positive".into()));
    }
    if let Some(c) = inst.is_constant() {
        if inst.levels() >= target {
            return Ok(HlOutcome::Witness(inst.full_trees(c)));
        }
    }
    let avail = inst.levels();
    if target > avail {
        return Ok(HlOutcome::Exhausted);
    }
    let mut levels: Vec<usize> = (0..target).collect();
    let mut evaluations = 0;
    loop {
        let mut s = Search {
            inst,
            levels: levels.clone(),
            trees: vec![vec![Vec::new(); target]; inst.trees()],
            color: None,
            evaluations,
        };
        if s.fill(0, 0)? {
            let color = s.color.expect("a filled level product has a colour");
            return Ok(HlOutcome::Witness(HlWitness {
                levels,
                trees: s.trees,
                color,
            }));
        }
        evaluations = s.evaluations;
        // next combination of `target` lengths from 0..avail
        let Some(p) = (0..target).rev().find(|&p| levels[p] < avail - target + p) else {
            return Ok(HlOutcome::Exhausted);
        };
        levels[p] += 1;
        for q in p + 1..target {
            levels[q] = levels[q - 1] + 1;
        }
    }
}

/// Independent check of a witness: strong subtree shape in every tree and
/// one colour on the whole level product.
pub fn verify_witness(inst: &HlInstance, w: &HlWitness, target: usize) -> bool {
    let n = inst.trees();
    if w.levels.len() < target || w.trees.len() != n || w.levels.windows(2).any(|p| p[0] >= p[1]) {
        return false;
    }
    if w.levels.last().is_some_and(|&l| l >= inst.levels()) {
        return false;
    }
    for tree in &w.trees {
        if tree.len() != w.levels.len() {
            return false;
        }
        for (j, nodes) in tree.iter().enumerate() {
            let l = w.levels[j];
            if nodes.len() != 1 << j || nodes.iter().any(|&v| v >> l != 0) {
                return false;
            }
            if j > 0 {
                let pl = w.levels[j - 1];
                for &p in &tree[j - 1] {
                    let mask = (1u32 << pl) - 1;
                    let kids: Vec<u32> = nodes.iter().copied().filter(|&v| v & mask == p).collect();
                    if kids.len() != 2 || (kids[0] >> pl & 1) == (kids[1] >> pl & 1) {
                        return false;
                    }
                }
            }
        }
    }
    for (j, &l) in w.levels.iter().enumerate() {
        let mut idx = vec![0usize; n];
        loop {
            let tuple: Vec<u32> = (0..n).map(|i| w.trees[i][j][idx[i]]).collect();
            if inst.color(l, &tuple) != w.color {
                return false;
            }
            let mut p = 0;
            loop {
                if p == n {
                    break;
                }
                idx[p] += 1;
                if idx[p] < 1 << j {
                    break;
                }
                idx[p] = 0;
                p += 1;
            }
            if p == n {
                break;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn limits_are_enforced() {
        assert!(matches!(
            HlInstance::constant(vec![8], 0, 2, 0),
            Err(Error::InstanceTooLarge(_))
        ));
        assert!(matches!(
            HlInstance::constant(vec![3; 4], 0, 2, 0),
            Err(Error::InstanceTooLarge(_))
        ));
        assert!(matches!(
            HlInstance::constant(vec![3], 0, 4, 0),
            Err(Error::InstanceTooLarge(_))
        ));
        assert!(HlInstance::constant(vec![7; 3], 2, 3, 1).is_ok());
    }

    #[test]
    fn constant_colouring_gives_full_trees() {
        let inst = HlInstance::constant(vec![5, 6], 0, 2, 1).unwrap();
        let HlOutcome::Witness(w) = hl_micro_search(&inst, 1).unwrap() else {
            panic!("no witness")
        };
        assert_eq!(w.levels, vec![0, 1, 2, 3]);
        assert_eq!(w.trees[1][3].len(), 8);
        assert!(verify_witness(&inst, &w, 4));
    }

    #[test]
    fn single_tree_always_has_a_witness() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let inst = HlInstance::random(vec![5], 0, 2, &mut rng).unwrap();
            for target in 1..=2 {
                match hl_micro_search(&inst, target).unwrap() {
                    HlOutcome::Witness(w) => assert!(verify_witness(&inst, &w, target)),
                    HlOutcome::Exhausted => panic!("pigeonhole gives a witness"),
                }
            }
        }
    }

    #[test]
    fn verifier_rejects_a_tampered_witness() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let inst = HlInstance::random(vec![6, 6], 1, 2, &mut rng).unwrap();
        let HlOutcome::Witness(mut w) = hl_micro_search(&inst, 2).unwrap() else {
            panic!("no witness")
        };
        assert!(verify_witness(&inst, &w, 2));
        w.trees[0][1][0] ^= 1;
        assert!(!verify_witness(&inst, &w, 2));
    }

    #[test]
    fn node_words_use_zero_and_two() {
        assert_eq!(node_word(3, 0b101).to_string(), "202");
    }
}
