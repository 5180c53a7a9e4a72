//! Deterministic random instances for test suites and benchmarks: CNF
//! formulas for counter cross-checks, ground and open first-order
//! formulas for pipeline properties, and the path to the bundled stories.
//!
//! Everything is driven by an explicit ChaCha seed so failures replay
//! exactly.

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fol::{Arity, CnfInstance, EntityId, Formula, PredId, Signature, Term};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform k-CNF: every clause draws `k` distinct variables and fair-coin
/// signs. Duplicate clauses are allowed, as in the standard random model.
pub fn random_kcnf(rng: &mut ChaCha8Rng, vars: u32, clauses: usize, k: usize) -> CnfInstance {
    assert!(0 < k && k as u32 <= vars);
    let pool: Vec<i32> = (1..=vars as i32).collect();
    let cs: Vec<Vec<i32>> = (0..clauses)
        .map(|_| {
            pool.choose_multiple(rng, k)
                .map(|&v| if rng.gen() { v } else { -v })
                .collect()
        })
        .collect();
    CnfInstance::from_clauses(vars, cs).expect("generated clauses are in range")
}

/// Mixed-width CNF: clause lengths drawn uniformly from `1..=max_len`.
pub fn random_mixed_cnf(
    rng: &mut ChaCha8Rng,
    vars: u32,
    clauses: usize,
    max_len: usize,
) -> CnfInstance {
    assert!(0 < max_len && max_len as u32 <= vars);
    let pool: Vec<i32> = (1..=vars as i32).collect();
    let cs: Vec<Vec<i32>> = (0..clauses)
        .map(|_| {
            let k = rng.gen_range(1..=max_len);
            pool.choose_multiple(rng, k)
                .map(|&v| if rng.gen() { v } else { -v })
                .collect()
        })
        .collect();
    CnfInstance::from_clauses(vars, cs).expect("generated clauses are in range")
}

/// A small signature with at most `max_vars` ground atoms, drawn from a
/// handful of shapes (monadic-only, dyadic-only, mixed).
pub fn random_signature(rng: &mut ChaCha8Rng, max_vars: u32) -> Signature {
    let entity_pool = ["a", "b", "c", "d"];
    loop {
        let shape = rng.gen_range(0..3);
        let (preds, max_entities): (Vec<(&str, u8)>, usize) = match shape {
            0 => (vec![("P", 1), ("Q", 1), ("R", 1)], 4),
            1 => (vec![("L", 2)], 3),
            _ => (vec![("L", 2), ("P", 1)], 3),
        };
        let entities = rng.gen_range(2..=max_entities);
        let vars: u32 = preds
            .iter()
            .map(|&(_, a)| if a == 1 { entities as u32 } else { (entities * entities) as u32 })
            .sum();
        if vars > max_vars {
            continue;
        }
        return Signature::new(
            preds.into_iter().map(|(n, a)| (n.to_string(), a)),
            entity_pool[..entities].iter().map(|e| e.to_string()),
        )
        .expect("pool names are valid");
    }
}

fn random_entity(rng: &mut ChaCha8Rng, sig: &Signature) -> Term {
    Term::Entity(EntityId(rng.gen_range(0..sig.entities().len() as u32)))
}

/// A term that is the open variable with probability ~1/2, otherwise a
/// random entity.
fn open_term(rng: &mut ChaCha8Rng, sig: &Signature, var: u32) -> Term {
    if rng.gen() {
        Term::Var(var)
    } else {
        random_entity(rng, sig)
    }
}

fn random_atom(rng: &mut ChaCha8Rng, sig: &Signature, var: Option<u32>) -> Formula {
    let pred = PredId(rng.gen_range(0..sig.predicates().len() as u32));
    let term = |rng: &mut ChaCha8Rng| match var {
        Some(v) => open_term(rng, sig, v),
        None => random_entity(rng, sig),
    };
    match sig.predicate(pred).arity {
        Arity::Monadic => Formula::atom1(pred, term(rng)),
        Arity::Dyadic => {
            let a = term(rng);
            let b = term(rng);
            Formula::atom2(pred, a, b)
        }
    }
}

fn random_formula(rng: &mut ChaCha8Rng, sig: &Signature, depth: u32, var: Option<u32>) -> Formula {
    if depth == 0 || rng.gen_ratio(1, 4) {
        return random_atom(rng, sig, var);
    }
    let left = random_formula(rng, sig, depth - 1, var);
    match rng.gen_range(0..5) {
        0 => Formula::not(left),
        1 => Formula::and(left, random_formula(rng, sig, depth - 1, var)),
        2 => Formula::or(left, random_formula(rng, sig, depth - 1, var)),
        3 => Formula::implies(left, random_formula(rng, sig, depth - 1, var)),
        _ => Formula::iff(left, random_formula(rng, sig, depth - 1, var)),
    }
}

/// A quantifier-free sentence over concrete entities only.
pub fn random_ground_formula(rng: &mut ChaCha8Rng, sig: &Signature, depth: u32) -> Formula {
    random_formula(rng, sig, depth, None)
}

/// A quantifier-free formula whose atoms may mention the open variable
/// `var`; the body for a generated `exists var. φ` / `forall var. ¬φ`
/// pair.
pub fn random_open_body(rng: &mut ChaCha8Rng, sig: &Signature, var: u32, depth: u32) -> Formula {
    random_formula(rng, sig, depth, Some(var))
}

/// Repository-relative location of the bundled story fixtures.
pub fn bundled_stories_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("..").join("..").join("stories")
}
