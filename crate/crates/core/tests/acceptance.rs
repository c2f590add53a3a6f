//! End-to-end checks, one PASS/FAIL line per criterion.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use prt_core::cli::{
    amalgamation_suite, check_antichain, check_coding_tree_shape, check_fidelity, hl_suite,
    roundtrip_text, ChainFile,
};
use prt_core::coding_tree::CodingTree;
use prt_core::diary::{classify, Diary};
use prt_core::enumeration::{
    antichain_chains, brute_force_classes, cross_check, default_antichain, default_depth,
    default_max_height, enumerate_diaries, seeded_antichain, stable_brute_force, two_chain_cases,
    witness_persistence, ColoringReport, DiaryCatalog,
};
use prt_core::scheduler::GenericScheduler;
use prt_core::subtree::{isomorphism_check, isomorphism_image, random_subtree, LeveledSubtree};
use prt_core::{Result, TernaryWord};

struct Outcome {
    id: usize,
    name: &'static str,
    failure: Option<String>,
    note: String,
    elapsed: Duration,
    limit: Duration,
}

fn run(
    id: usize,
    name: &'static str,
    limit_secs: u64,
    f: impl FnOnce() -> Result<(Option<String>, String)>,
) -> Outcome {
    let start = Instant::now();
    let (failure, note) = match f() {
        Ok(r) => r,
        Err(e) => (Some(e.to_string()), String::new()),
    };
    let elapsed = start.elapsed();
    let limit = Duration::from_secs(limit_secs);
    let failure =
        failure.or_else(|| (elapsed > limit).then(|| format!("took {elapsed:?}, limit {limit:?}")));
    Outcome {
        id,
        name,
        failure,
        note,
        elapsed,
        limit,
    }
}

fn critical_sets(c: &DiaryCatalog) -> BTreeSet<BTreeSet<TernaryWord>> {
    c.diaries().map(Diary::critical_words).collect()
}

fn seven_classes() -> Result<(Option<String>, String)> {
    let a = default_antichain(24)?;
    let want: BTreeSet<_> = two_chain_cases().into_iter().collect();
    let brute = brute_force_classes(2, &a, 24)?;
    let en = enumerate_diaries(2, default_max_height(2), &a, 24)?;
    let fail = if brute.len() != 7 || en.len() != 7 {
        Some(format!(
            "{} brute force, {} enumerated",
            brute.len(),
            en.len()
        ))
    } else if critical_sets(&brute) != want || critical_sets(&en) != want {
        Some("critical node sets differ from the seven cases".into())
    } else {
        None
    };
    Ok((fail, "7 classes".into()))
}

fn single_class() -> Result<(Option<String>, String)> {
    let a = default_antichain(24)?;
    let brute = brute_force_classes(1, &a, 24)?;
    let en = enumerate_diaries(1, default_max_height(1), &a, 24)?;
    let ok = brute.len() == 1 && en.len() == 1 && cross_check(&en, &brute).agree;
    Ok((
        (!ok).then(|| format!("{} brute force, {} enumerated", brute.len(), en.len())),
        "1 class".into(),
    ))
}

fn stability_at_three() -> Result<(Option<String>, String)> {
    let start = default_depth(3);
    let a = default_antichain(start + 8)?;
    let stable = stable_brute_force(3, &a, start, 4, start + 8)?;
    let en = enumerate_diaries(3, default_max_height(3), &a, stable.depth)?;
    let cc = cross_check(&en, &stable.catalog);
    let note = format!(
        "N3 = {} at D = {}, history {:?}",
        stable.catalog.len(),
        stable.depth,
        stable.history
    );
    Ok((
        (!cc.agree).then(|| {
            format!(
                "{} only enumerated, {} only brute force",
                cc.only_enumerated.len(),
                cc.only_brute_force.len()
            )
        }),
        note,
    ))
}

fn shape() -> Result<(Option<String>, String)> {
    let t = CodingTree::generate_default(200);
    Ok((check_coding_tree_shape(&t), "n < 200".into()))
}

fn fidelity() -> Result<(Option<String>, String)> {
    let t = CodingTree::generate_default(50);
    Ok((check_fidelity(&t, 50)?, "n < 50".into()))
}

fn antichain_audit() -> Result<(Option<String>, String)> {
    let a = default_antichain(30)?;
    Ok((check_antichain(&a)?, "30 levels".into()))
}

fn isomorphism_invariance() -> Result<(Option<String>, String)> {
    let mut samples = 0;
    for k in 0..50u64 {
        let host = CodingTree::generate(40, &mut GenericScheduler::seeded(k));
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + k);
        let t = random_subtree(&host, (k % 3) as usize, 40, &mut rng)?;
        let r = LeveledSubtree::approximation(&host, t.depth());
        if !isomorphism_check(&r, &t) {
            return Ok((
                Some(format!(
                    "subtree {k} is not isomorphic to its approximation"
                )),
                String::new(),
            ));
        }
        let cs = r.coding_nodes();
        for i in 0..cs.len() {
            for j in i + 1..cs.len() {
                let chain = [cs[i].clone(), cs[j].clone()];
                let Ok(d) = classify(&chain, &host) else {
                    continue;
                };
                let Some(image) = chain
                    .iter()
                    .map(|c| isomorphism_image(&r, &t, c))
                    .collect::<Option<Vec<_>>>()
                else {
                    return Ok((
                        Some(format!("subtree {k}: no image for {chain:?}")),
                        String::new(),
                    ));
                };
                if classify(&image, &host)? != d {
                    return Ok((
                        Some(format!("subtree {k}: classification of {chain:?} changes")),
                        String::new(),
                    ));
                }
                samples += 1;
            }
        }
    }
    Ok((
        (samples < 500).then(|| format!("only {samples} samples")),
        format!("{samples} samples"),
    ))
}

fn persistence() -> Result<(Option<String>, String)> {
    let r = witness_persistence(32, 20, 0)?;
    let missing: Vec<String> = (0..r.subtrees.len())
        .filter(|&k| !r.missing(k).is_empty())
        .map(|k| format!("subtree {k} misses {:?}", r.missing(k)))
        .collect();
    Ok((
        (!missing.is_empty()).then(|| missing.join("; ")),
        format!("{} subtrees", r.subtrees.len()),
    ))
}

fn amalgamation() -> Result<(Option<String>, String)> {
    let failed: Vec<String> = amalgamation_suite(100, 0)
        .into_iter()
        .filter(|c| !c.passed)
        .map(|c| c.detail)
        .collect();
    Ok((
        (!failed.is_empty()).then(|| failed.join("; ")),
        "100 instances".into(),
    ))
}

fn hl() -> Result<(Option<String>, String)> {
    let failed: Vec<String> = hl_suite(0)
        .into_iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{}: {}", c.name, c.detail))
        .collect();
    Ok((
        (!failed.is_empty()).then(|| failed.join("; ")),
        "single, constant, 50 pairs at two levels".into(),
    ))
}

fn random_artifact(k: usize, rng: &mut ChaCha8Rng) -> Result<String> {
    let seed = rng.gen::<u64>();
    let levels = rng.gen_range(2..10);
    Ok(match k % 7 {
        0 => CodingTree::generate(rng.gen_range(1..40), &mut GenericScheduler::seeded(seed))
            .to_text(),
        1 => CodingTree::generate(rng.gen_range(1..40), &mut GenericScheduler::seeded(seed))
            .ground_truth()
            .to_text(),
        2 => seeded_antichain(levels, Some(seed))?.to_text(),
        3 => {
            let a = seeded_antichain(levels, Some(seed))?;
            let chains = antichain_chains(&a, levels, rng.gen_range(1..3));
            classify(&chains[rng.gen_range(0..chains.len())], a.host())?.to_text()
        }
        4 => brute_force_classes(
            rng.gen_range(1..3),
            &seeded_antichain(levels, Some(seed))?,
            levels,
        )?
        .to_text(),
        5 => {
            let subtrees = (0..rng.gen_range(1..5))
                .map(|_| (1..=7).filter(|_| rng.gen_bool(0.7)).collect())
                .collect();
            let counts = std::array::from_fn(|_| rng.gen_range(0..1000));
            ColoringReport {
                depth: levels,
                counts,
                subtrees,
            }
            .to_text()
        }
        _ => {
            let a = seeded_antichain(levels, Some(seed))?;
            let chains = antichain_chains(&a, levels, 2);
            let words = chains
                .get(rng.gen_range(0..chains.len().max(1)))
                .cloned()
                .unwrap_or_default();
            ChainFile {
                levels,
                seed: rng.gen_bool(0.5).then_some(seed),
                words,
            }
            .to_text()
        }
    })
}

fn roundtrips() -> Result<(Option<String>, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for k in 0..100 {
        let text = random_artifact(k, &mut rng)?;
        match roundtrip_text(&text) {
            Ok(back) if back == text => {}
            Ok(_) => {
                return Ok((
                    Some(format!("artifact {k} changed on round trip")),
                    String::new(),
                ))
            }
            Err(e) => return Ok((Some(format!("artifact {k}: {e}")), String::new())),
        }
    }
    Ok((None, "100 artifacts".into()))
}

#[test]
fn acceptance() {
    let outcomes = [
        run(1, "seven diaries at p=2", 120, seven_classes),
        run(2, "unique diary at p=1", 1, single_class),
        run(3, "stable catalog at p=3", 600, stability_at_three),
        run(4, "coding tree shape", 10, shape),
        run(5, "ground truth fidelity", 30, fidelity),
        run(6, "almost antichain audit", 120, antichain_audit),
        run(
            7,
            "classification under isomorphism",
            300,
            isomorphism_invariance,
        ),
        run(8, "witness persistence", 300, persistence),
        run(9, "amalgamation postconditions", 120, amalgamation),
        run(10, "HL micro-search", 600, hl),
        run(11, "serialization round trips", 60, roundtrips),
    ];
    for o in &outcomes {
        let status = if o.failure.is_none() { "PASS" } else { "FAIL" };
        let detail = o.failure.as_deref().unwrap_or(&o.note);
        println!(
            "{status} criterion {:>2} {}: {detail} ({:.2?} of {:?})",
            o.id, o.name, o.elapsed, o.limit
        );
    }
    let failed: Vec<usize> = outcomes
        .iter()
        .filter(|o| o.failure.is_some())
        .map(|o| o.id)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
