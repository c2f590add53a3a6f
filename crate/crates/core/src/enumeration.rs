//! Catalogs of chain diaries, computed two ways.
//!
//! *Axiom enumeration* builds every canonical diary with `p` coding nodes up
//! to a height bound, level by level, and keeps those that are similar to the
//! `Δ(C)` of some chain actually present in an almost antichain.
//! *Brute force* classifies every `p`-chain of the antichain's coding nodes.
//! The two must agree.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::antichain::AlmostAntichain;
use crate::diary::{classify, delta_of, similar, CriticalNodes, CriticalType, Delta, Diary};
use crate::error::{Error, Result};
use crate::pseudotree::parse_header;
use crate::scheduler::GenericScheduler;
use crate::word::{meet, word, TernaryWord};

/// The seven critical-node sets of 2-chain diaries, cases (1)–(7).
pub fn two_chain_cases() -> [BTreeSet<TernaryWord>; 7] {
    let set = |ws: &[&str]| ws.iter().map(|w| word(w)).collect::<BTreeSet<_>>();
    [
        set(&["-", "1"]),
        set(&["-", "2", "00"]),
        set(&["-", "0", "20"]),
        set(&["-", "0", "01", "200"]),
        set(&["-", "2", "00", "001"]),
        set(&["-", "0", "20", "010"]),
        set(&["-", "0", "20", "010", "0101"]),
    ]
}

/// Case number (1–7) of a 2-chain diary.
pub fn two_chain_id(d: &Diary) -> Option<usize> {
    let crit = d.critical_words();
    two_chain_cases()
        .iter()
        .position(|c| *c == crit)
        .map(|k| k + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Provenance {
    AxiomEnumerated,
    BruteForced,
    Both,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiaryCatalog {
    pub p: usize,
    pub entries: BTreeMap<Diary, Provenance>,
    /// Non-fatal notes, e.g. a realized diary taller than the height bound.
    pub warnings: Vec<String>,
}

impl DiaryCatalog {
    pub fn new(p: usize) -> Self {
        DiaryCatalog {
            p,
            entries: BTreeMap::new(),
            warnings: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn diaries(&self) -> impl Iterator<Item = &Diary> {
        self.entries.keys()
    }

    pub fn diary_set(&self) -> BTreeSet<Diary> {
        self.entries.keys().cloned().collect()
    }

    pub fn to_text(&self) -> String {
        let mut blocks: Vec<String> = self.entries.keys().map(Diary::to_text).collect();
        blocks.sort();
        let mut out = format!("CATALOG v1 p={}\n", self.p);
        for b in blocks {
            out.push_str(&b);
        }
        out
    }

    /// Parses a catalog file. Provenance is not part of the file format.
    pub fn from_text(text: &str) -> Result<Self> {
        let lines: Vec<&str> = text.lines().collect();
        let header = lines.first().ok_or(Error::Parse {
            line: 1,
            msg: "empty input".into(),
        })?;
        let p =
            parse_header(header, "CATALOG", "p").map_err(|msg| Error::Parse { line: 1, msg })?;
        let mut cat = DiaryCatalog::new(p);
        let mut at = 1;
        let mut last: Option<String> = None;
        while at < lines.len() {
            let d = Diary::from_lines(&lines[at..], at)?;
            let text = d.to_text();
            if last.as_ref().is_some_and(|l| *l >= text) {
                return Err(Error::Parse {
                    line: at + 1,
                    msg: "diaries must be sorted and distinct".into(),
                });
            }
            if d.coding_count() != p {
                return Err(Error::Parse {
                    line: at + 1,
                    msg: format!("diary does not have {p} coding nodes"),
                });
            }
            at += d.height() + 1;
            last = Some(text);
            cat.entries.insert(d, Provenance::Both);
        }
        Ok(cat)
    }
}

/// All `p`-element chains among the first `levels` coding nodes of `a`.
pub fn antichain_chains(a: &AlmostAntichain, levels: usize, p: usize) -> Vec<Vec<TernaryWord>> {
    let mut out = Vec::new();
    let _ = for_each_chain(a, levels, p, |c| {
        out.push(c.to_vec());
        Ok(true)
    });
    out
}

/// Visits the `p`-element chains among the first `levels` coding nodes of `a`
/// in lex order of their index tuples, stopping early when `f` returns
/// `Ok(false)`.
pub fn for_each_chain<F>(a: &AlmostAntichain, levels: usize, p: usize, mut f: F) -> Result<()>
where
    F: FnMut(&[TernaryWord]) -> Result<bool>,
{
    let nodes: Vec<TernaryWord> = a.coding_nodes().into_iter().take(levels).collect();
    let truth = a.host().ground_truth();
    let lens: Vec<usize> = nodes.iter().map(TernaryWord::len).collect();
    let mut stack: Vec<usize> = Vec::with_capacity(p);
    let mut chain: Vec<TernaryWord> = Vec::with_capacity(p);
    // iterative lex walk over increasing index tuples
    let mut next = 0usize;
    loop {
        if stack.len() == p {
            chain.clear();
            chain.extend(stack.iter().map(|&i| nodes[i].clone()));
            if !f(&chain)? {
                return Ok(());
            }
        } else if let Some(i) =
            (next..nodes.len()).find(|&i| stack.iter().all(|&j| truth.comparable(lens[j], lens[i])))
        {
            stack.push(i);
            next = i + 1;
            continue;
        }
        match stack.pop() {
            Some(i) => next = i + 1,
            None => return Ok(()),
        }
    }
}

/// Builds the default guided almost antichain with `levels` levels.
pub fn default_antichain(levels: usize) -> Result<AlmostAntichain> {
    AlmostAntichain::build_guided(GenericScheduler::new(), levels, host_limit(levels))
}

/// Guided almost antichain whose host is grown by a seeded scheduler, or by
/// the default one when `seed` is `None`.
pub fn seeded_antichain(levels: usize, seed: Option<u64>) -> Result<AlmostAntichain> {
    let sched = seed.map_or_else(GenericScheduler::new, GenericScheduler::seeded);
    AlmostAntichain::build_guided(sched, levels, host_limit(levels))
}

/// The first 2-chain among the first `levels` coding nodes of `a` whose
/// diary is case `id`.
pub fn chain_with_id(
    a: &AlmostAntichain,
    levels: usize,
    id: usize,
) -> Result<Option<Vec<TernaryWord>>> {
    let mut found = None;
    for_each_chain(a, levels, 2, |c| {
        if two_chain_id(&classify(c, a.host())?) == Some(id) {
            found = Some(c.to_vec());
            return Ok(false);
        }
        Ok(true)
    })?;
    Ok(found)
}

/// Host depth allowed for a guided build of `levels` antichain levels.
pub fn host_limit(levels: usize) -> usize {
    16 * levels + 64
}

/// Classifies every `p`-chain among the first `levels` antichain coding nodes.
pub fn brute_force_classes(p: usize, a: &AlmostAntichain, levels: usize) -> Result<DiaryCatalog> {
    if levels > a.len() {
        return Err(Error::DepthExhausted(format!(
            "antichain has {} levels, {levels} requested",
            a.len()
        )));
    }
    let mut cat = DiaryCatalog::new(p);
    for_each_chain(a, levels, p, |c| {
        cat.entries
            .insert(classify(c, a.host())?, Provenance::BruteForced);
        Ok(true)
    })?;
    Ok(cat)
}

/// Relation signature of a critical-node list: types plus prefix, lex and
/// meet relations, independent of the actual words.
fn shape_key<C: CriticalNodes + ?Sized>(d: &C) -> Vec<u64> {
    let crit = d.critical();
    let n = crit.len();
    let mut key = Vec::with_capacity(n + n * n + n * n * n);
    key.extend(crit.iter().map(|(_, t)| *t as u64));
    for (a, _) in crit {
        for (b, _) in crit {
            key.push(u64::from(a.is_prefix_of(b)) | u64::from(a < b) << 1);
        }
    }
    for (a, _) in crit {
        for (b, _) in crit {
            let m = meet(a, b);
            key.push(
                crit.iter()
                    .position(|(w, _)| *w == m)
                    .map_or(u64::MAX, |k| k as u64),
            );
        }
    }
    key
}

/// Realized `Δ(C)` shapes of all `p`-chains, one representative per shape.
pub fn realized_shapes(p: usize, a: &AlmostAntichain, levels: usize) -> Result<Vec<Delta>> {
    let mut seen: HashMap<Vec<u64>, Delta> = HashMap::new();
    for_each_chain(a, levels, p, |c| {
        let d = delta_of(c, a.host())?;
        seen.entry(shape_key(&d)).or_insert(d);
        Ok(true)
    })?;
    let mut v: Vec<Delta> = seen.into_values().collect();
    v.sort_by(|x, y| x.critical.cmp(&y.critical));
    Ok(v)
}

/// Every canonical diary with exactly `p` coding nodes and at most
/// `max_height` levels satisfying the diary conditions, with a single node on
/// the top level.
pub fn axiom_candidates(p: usize, max_height: usize) -> Vec<Diary> {
    struct State {
        frontier: Vec<TernaryWord>,
        leftmost: Option<TernaryWord>,
        critical: Vec<(TernaryWord, CriticalType)>,
        coding: usize,
    }
    fn rec(p: usize, max_height: usize, s: &mut State, out: &mut Vec<Diary>) {
        let j = s.critical.len();
        if j >= max_height {
            return;
        }
        let frontier = s.frontier.clone();
        for (idx, t) in frontier.iter().enumerate() {
            let on_left = s.leftmost.as_ref() == Some(t);
            for ty in [
                CriticalType::Split,
                CriticalType::TerminalCoding,
                CriticalType::NonterminalCoding,
                CriticalType::RayChange,
            ] {
                if matches!(
                    ty,
                    CriticalType::NonterminalCoding | CriticalType::RayChange
                ) && !on_left
                {
                    continue;
                }
                let coding = s.coding + usize::from(ty.is_coding());
                if coding > p {
                    continue;
                }
                // a ray change sits strictly between two meet-closure levels
                if ty == CriticalType::RayChange
                    && s.critical
                        .last()
                        .is_none_or(|(_, prev)| *prev == CriticalType::RayChange)
                {
                    continue;
                }
                if ty == CriticalType::TerminalCoding && coding == p {
                    // the last coding node closes the diary and must be alone on its level
                    if frontier.len() == 1 {
                        let mut crit = s.critical.clone();
                        crit.push((t.clone(), ty));
                        if let Ok(d) = Diary::from_critical(crit) {
                            out.push(d);
                        }
                    }
                    continue;
                }
                if coding == p {
                    continue;
                }
                let mut next = Vec::with_capacity(frontier.len() + 1);
                let mut next_left = None;
                for (k, u) in frontier.iter().enumerate() {
                    let digits: &[u8] = if k == idx {
                        match ty {
                            CriticalType::Split => &[0, 2],
                            CriticalType::TerminalCoding => &[],
                            _ => &[1],
                        }
                    } else {
                        &[0]
                    };
                    for &d in digits {
                        let c = u.child(d);
                        if s.leftmost.as_ref() == Some(u) && next_left.is_none() {
                            next_left = Some(c.clone());
                        }
                        next.push(c);
                    }
                }
                // every open branch still needs its own terminal coding node
                if next.is_empty() || next.len() > p - coding {
                    continue;
                }
                let saved = (
                    std::mem::replace(&mut s.frontier, next),
                    std::mem::replace(&mut s.leftmost, next_left),
                    s.coding,
                );
                s.coding = coding;
                s.critical.push((t.clone(), ty));
                rec(p, max_height, s, out);
                s.critical.pop();
                s.frontier = saved.0;
                s.leftmost = saved.1;
                s.coding = saved.2;
            }
        }
    }
    let mut out = Vec::new();
    if p == 0 {
        return out;
    }
    let mut s = State {
        frontier: vec![TernaryWord::empty()],
        leftmost: Some(TernaryWord::empty()),
        critical: Vec::new(),
        coding: 0,
    };
    rec(p, max_height, &mut s, &mut out);
    out.sort();
    out.dedup();
    out
}

/// Default height bound for chains of length `p`.
/// Antichain levels used by default when cataloguing `p`-chain diaries.
pub fn default_depth(p: usize) -> usize {
    if p <= 2 {
        24
    } else {
        196
    }
}

pub fn default_max_height(p: usize) -> usize {
    4 * p + 2
}

/// Axiom candidates that are similar to some realized chain shape.
pub fn enumerate_diaries(
    p: usize,
    max_height: usize,
    a: &AlmostAntichain,
    levels: usize,
) -> Result<DiaryCatalog> {
    let shapes = realized_shapes(p, a, levels)?;
    let mut buckets: HashMap<Vec<CriticalType>, Vec<&Delta>> = HashMap::new();
    for d in &shapes {
        buckets
            .entry(d.critical.iter().map(|(_, t)| *t).collect())
            .or_default()
            .push(d);
    }
    let mut cat = DiaryCatalog::new(p);
    for d in shapes.iter().filter(|d| d.critical.len() > max_height) {
        cat.warnings.push(format!(
            "a realized chain has {} levels, above the bound {max_height}",
            d.critical.len()
        ));
    }
    for cand in axiom_candidates(p, max_height) {
        let types: Vec<CriticalType> = cand.critical().iter().map(|(_, t)| *t).collect();
        if buckets
            .get(&types)
            .is_some_and(|b| b.iter().any(|d| similar(&cand, *d)))
        {
            cat.entries.insert(cand, Provenance::AxiomEnumerated);
        }
    }
    Ok(cat)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossCheck {
    pub agree: bool,
    pub only_enumerated: Vec<Diary>,
    pub only_brute_force: Vec<Diary>,
    pub merged: DiaryCatalog,
}

pub fn cross_check(enumerated: &DiaryCatalog, brute: &DiaryCatalog) -> CrossCheck {
    let e = enumerated.diary_set();
    let b = brute.diary_set();
    let mut merged = DiaryCatalog::new(brute.p);
    merged.warnings = enumerated
        .warnings
        .iter()
        .chain(&brute.warnings)
        .cloned()
        .collect();
    for d in e.union(&b) {
        let prov = match (e.contains(d), b.contains(d)) {
            (true, true) => Provenance::Both,
            (true, false) => Provenance::AxiomEnumerated,
            _ => Provenance::BruteForced,
        };
        merged.entries.insert(d.clone(), prov);
    }
    CrossCheck {
        agree: e == b,
        only_enumerated: e.difference(&b).cloned().collect(),
        only_brute_force: b.difference(&e).cloned().collect(),
        merged,
    }
}

/// Result of increasing the antichain depth until brute force stabilizes.
#[derive(Debug, Clone)]
pub struct StableCatalog {
    /// The depth `D` with `brute(D) == brute(D + step)`.
    pub depth: usize,
    pub catalog: DiaryCatalog,
    /// Brute-force counts at each depth tried.
    pub history: Vec<(usize, usize)>,
}

/// Tries `D = start, start + step, …` until the brute-force catalogs at `D`
/// and `D + step` coincide, or `limit` is passed.
pub fn stable_brute_force(
    p: usize,
    a: &AlmostAntichain,
    start: usize,
    step: usize,
    limit: usize,
) -> Result<StableCatalog> {
    let mut history = Vec::new();
    let mut d = start;
    let mut current = brute_force_classes(p, a, d)?;
    history.push((d, current.len()));
    while d + step <= limit {
        let next = brute_force_classes(p, a, d + step)?;
        history.push((d + step, next.len()));
        if next.diary_set() == current.diary_set() {
            return Ok(StableCatalog {
                depth: d,
                catalog: current,
                history,
            });
        }
        d += step;
        current = next;
    }
    Err(Error::DepthExhausted(format!(
        "no stable depth up to {limit} (counts {history:?})"
    )))
}

/// Diary ids realized by 2-chains in each subtree approximation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoringReport {
    pub depth: usize,
    /// Realized 2-chains per case id 1–7 in the first subtree.
    pub counts: [u64; 7],
    /// Realized ids per subtree.
    pub subtrees: Vec<BTreeSet<usize>>,
}

impl ColoringReport {
    pub fn missing(&self, k: usize) -> Vec<usize> {
        (1..=7)
            .filter(|id| !self.subtrees[k].contains(id))
            .collect()
    }

    pub fn all_realized(&self) -> bool {
        (0..self.subtrees.len()).all(|k| self.missing(k).is_empty())
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("REPORT v1\ndepth {}\n", self.depth);
        for (k, c) in self.counts.iter().enumerate() {
            let _ = writeln!(out, "count {} {c}", k + 1);
        }
        for s in &self.subtrees {
            let ids: Vec<String> = s.iter().map(usize::to_string).collect();
            let _ = writeln!(
                out,
                "subtree {}",
                if ids.is_empty() {
                    "-".to_string()
                } else {
                    ids.join(",")
                }
            );
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let err = |line: usize, msg: &str| Error::Parse {
            line: line + 1,
            msg: msg.to_string(),
        };
        match lines.next() {
            Some((_, "REPORT v1")) => {}
            _ => return Err(err(0, "expected `REPORT v1`")),
        }
        let depth = match lines.next() {
            Some((i, l)) => l
                .strip_prefix("depth ")
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| err(i, "expected `depth N`"))?,
            None => return Err(err(1, "missing depth")),
        };
        let mut counts = [0u64; 7];
        for (k, slot) in counts.iter_mut().enumerate() {
            let (i, l) = lines
                .next()
                .ok_or_else(|| err(2 + k, "missing count line"))?;
            let f: Vec<&str> = l.split(' ').collect();
            if f.len() != 3 || f[0] != "count" || f[1] != (k + 1).to_string() {
                return Err(err(i, &format!("expected `count {} N`", k + 1)));
            }
            *slot = f[2].parse().map_err(|_| err(i, "bad count"))?;
        }
        let mut subtrees = Vec::new();
        for (i, l) in lines {
            let ids = l
                .strip_prefix("subtree ")
                .ok_or_else(|| err(i, "expected `subtree ids`"))?;
            let set: BTreeSet<usize> = if ids == "-" {
                BTreeSet::new()
            } else {
                ids.split(',')
                    .map(|x| x.parse().map_err(|_| err(i, "bad id")))
                    .collect::<Result<_>>()?
            };
            if set.iter().any(|&x| !(1..=7).contains(&x)) {
                return Err(err(i, "ids must be 1-7"));
            }
            subtrees.push(set);
        }
        let r = ColoringReport {
            depth,
            counts,
            subtrees,
        };
        if r.to_text() != text {
            return Err(err(0, "report is not in canonical form"));
        }
        Ok(r)
    }
}

/// Ids realized by 2-chains among the first `levels` coding nodes of `a`,
/// with per-id counts.
pub fn realized_two_chain_ids(a: &AlmostAntichain, levels: usize) -> Result<[u64; 7]> {
    let mut counts = [0u64; 7];
    for_each_chain(a, levels, 2, |c| {
        let d = classify(c, a.host())?;
        let id = two_chain_id(&d).ok_or_else(|| {
            Error::NotDiaryShaped(format!("2-chain outside the seven cases: {d}"))
        })?;
        counts[id - 1] += 1;
        Ok(true)
    })?;
    Ok(counts)
}

/// Builds `subtree_count` antichains of `levels` levels in hosts grown by
/// seeded schedulers (seeds `seed, seed + 1, …`) and records which 2-chain
/// diaries each one realizes.
pub fn witness_persistence(
    levels: usize,
    subtree_count: usize,
    seed: u64,
) -> Result<ColoringReport> {
    let mut subtrees = Vec::with_capacity(subtree_count);
    let mut first = None;
    for k in 0..subtree_count {
        let a = AlmostAntichain::build_guided(
            GenericScheduler::seeded(seed + k as u64),
            levels,
            host_limit(levels),
        )?;
        let counts = realized_two_chain_ids(&a, levels)?;
        subtrees.push((1..=7).filter(|&id| counts[id - 1] > 0).collect());
        first.get_or_insert(counts);
    }
    Ok(ColoringReport {
        depth: levels,
        counts: first.unwrap_or_default(),
        subtrees,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seven_two_chain_classes() {
        let a = default_antichain(24).unwrap();
        let brute = brute_force_classes(2, &a, 24).unwrap();
        let found: BTreeSet<BTreeSet<TernaryWord>> =
            brute.diaries().map(Diary::critical_words).collect();
        let want: BTreeSet<BTreeSet<TernaryWord>> = two_chain_cases().into_iter().collect();
        assert_eq!(found, want);
        let en = enumerate_diaries(2, default_max_height(2), &a, 24).unwrap();
        assert!(cross_check(&en, &brute).agree);
    }

    #[test]
    fn single_point_diary() {
        let a = default_antichain(6).unwrap();
        assert_eq!(brute_force_classes(1, &a, 6).unwrap().len(), 1);
        assert_eq!(
            enumerate_diaries(1, default_max_height(1), &a, 6)
                .unwrap()
                .len(),
            1
        );
        let brute = brute_force_classes(1, &a, 6).unwrap().diary_set();
        let cands: BTreeSet<Diary> = axiom_candidates(1, 6).into_iter().collect();
        assert!(brute.is_subset(&cands));
    }

    #[test]
    fn brute_force_is_monotone() {
        let a = default_antichain(16).unwrap();
        let mut prev = BTreeSet::new();
        for d in 2..=16 {
            let cur = brute_force_classes(2, &a, d).unwrap().diary_set();
            assert!(prev.is_subset(&cur));
            prev = cur;
        }
    }

    #[test]
    fn catalog_and_report_roundtrip() {
        let a = default_antichain(12).unwrap();
        let cat = brute_force_classes(2, &a, 12).unwrap();
        let text = cat.to_text();
        let back = DiaryCatalog::from_text(&text).unwrap();
        assert_eq!(back.to_text(), text);
        assert_eq!(back.diary_set(), cat.diary_set());
        let r = ColoringReport {
            depth: 3,
            counts: [1, 0, 2, 0, 0, 0, 9],
            subtrees: vec![[1, 3].into(), BTreeSet::new()],
        };
        assert_eq!(ColoringReport::from_text(&r.to_text()).unwrap(), r);
        assert!(ColoringReport::from_text("REPORT v1\ndepth 3\n").is_err());
    }
}
