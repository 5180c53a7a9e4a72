//! Exact model counting (#SAT).
//!
//! The engine is a counting DPLL: unit propagation to fixpoint, split into
//! variable-disjoint components whose counts multiply, and a component
//! cache keyed by a canonical byte serialization (full-key equality — a
//! hash collision must not corrupt an exact count). Pure-literal
//! elimination is deliberately absent: it is sound for satisfiability but
//! discards models. Budgets on decisions and cache size turn pathological
//! inputs into explicit errors, never into wrong counts.

pub mod oracle;

pub use oracle::{oracle_count, ORACLE_MAX_VARS};

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::fol::CnfInstance;

/// An exact nonnegative model count.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ModelCount(BigUint);

impl ModelCount {
    pub fn zero() -> ModelCount {
        ModelCount(BigUint::zero())
    }

    pub fn one() -> ModelCount {
        ModelCount(BigUint::one())
    }

    /// `2^bits`, the count of a tautology over `bits` variables.
    pub fn pow2(bits: u64) -> ModelCount {
        ModelCount(BigUint::one() << bits)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn as_biguint(&self) -> &BigUint {
        &self.0
    }

    /// Base-2 logarithm, `None` for zero. Exact for powers of two; within
    /// double-precision rounding otherwise (the top 53 bits decide).
    pub fn log2(&self) -> Option<f64> {
        if self.0.is_zero() {
            return None;
        }
        let bits = self.0.bits();
        if bits <= 64 {
            return Some((self.0.to_u64().unwrap() as f64).log2());
        }
        let shift = bits - 64;
        let top = (&self.0 >> shift).to_u64().unwrap();
        Some((top as f64).log2() + shift as f64)
    }
}

impl From<u64> for ModelCount {
    fn from(n: u64) -> ModelCount {
        ModelCount(BigUint::from(n))
    }
}

impl From<BigUint> for ModelCount {
    fn from(n: BigUint) -> ModelCount {
        ModelCount(n)
    }
}

impl fmt::Display for ModelCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Resource limits for a single `count` call (decisions) and for the
/// counter's lifetime (cache bytes).
#[derive(Debug, Clone, Copy)]
pub struct CounterConfig {
    pub max_decisions: u64,
    pub max_cache_bytes: usize,
    pub cache_enabled: bool,
}

impl Default for CounterConfig {
    fn default() -> CounterConfig {
        CounterConfig {
            max_decisions: 10_000_000,
            max_cache_bytes: 256 << 20,
            cache_enabled: true,
        }
    }
}

#[derive(Debug, Error)]
pub enum CounterError {
    #[error("decision budget exhausted ({0} decisions)")]
    DecisionBudget(u64),
    #[error("component cache budget exhausted ({0} bytes)")]
    CacheBudget(usize),
    #[error("{0} variables exceed the enumeration oracle limit of {ORACLE_MAX_VARS}")]
    OracleTooLarge(u32),
    #[error(transparent)]
    Fol(#[from] crate::fol::FolError),
}

/// Counters observed since construction; `decisions` for the most recent
/// call is what the budget applies to.
#[derive(Debug, Clone, Copy, Default)]
pub struct CounterStats {
    pub decisions: u64,
    pub cache_hits: u64,
    pub cache_misses: u64,
    pub cache_bytes: usize,
}

/// A single-threaded exact counter with a persistent component cache.
/// Distinct instances may run concurrently on distinct inputs.
pub struct Counter {
    cfg: CounterConfig,
    cache: HashMap<Vec<u8>, BigUint>,
    stats: CounterStats,
    call_decisions: u64,
}

impl Default for Counter {
    fn default() -> Counter {
        Counter::new(CounterConfig::default())
    }
}

// Rough per-entry bookkeeping overhead added to key/value bytes.
const CACHE_ENTRY_OVERHEAD: usize = 48;

impl Counter {
    pub fn new(cfg: CounterConfig) -> Counter {
        Counter { cfg, cache: HashMap::new(), stats: CounterStats::default(), call_decisions: 0 }
    }

    pub fn stats(&self) -> CounterStats {
        self.stats
    }

    /// Exact count of satisfying assignments over all `var_count` declared
    /// variables; variables outside every clause double the count each.
    pub fn count(&mut self, c: &CnfInstance) -> Result<ModelCount, CounterError> {
        self.call_decisions = 0;
        let mentioned = vars_of(&c.clauses);
        let free = c.var_count as u64 - mentioned.len() as u64;
        let inner = self.count_clauses(c.clauses.clone())?;
        Ok(ModelCount(inner << free))
    }

    /// Count of the conjunction of instances over one shared atom space;
    /// auxiliaries are renumbered apart before counting. `parts` must be
    /// nonempty.
    pub fn count_conjunction(
        &mut self,
        parts: &[&CnfInstance],
    ) -> Result<ModelCount, CounterError> {
        let (first, rest) = parts.split_first().expect("count_conjunction on empty slice");
        let mut merged = (*first).clone();
        for p in rest {
            merged = merged.conjoin(p)?;
        }
        self.count(&merged)
    }

    /// Count over exactly the variables mentioned in `clauses`.
    fn count_clauses(&mut self, clauses: Vec<Vec<i32>>) -> Result<BigUint, CounterError> {
        if clauses.iter().any(|c| c.is_empty()) {
            return Ok(BigUint::zero());
        }
        if clauses.is_empty() {
            return Ok(BigUint::one());
        }
        let before = vars_of(&clauses);
        let Some((reduced, assigned)) = propagate(clauses) else {
            return Ok(BigUint::zero());
        };
        let after = vars_of(&reduced);
        // Variables neither propagated nor mentioned afterwards became
        // unconstrained when their clauses were satisfied.
        let freed = (before.len() - after.len()) as u64 - assigned;
        let mut acc = BigUint::one();
        for comp in split_components(reduced) {
            acc *= self.count_component(comp)?;
        }
        Ok(acc << freed)
    }

    /// Count of one connected, unit-free component, via the cache or a
    /// branch on the most frequent variable.
    fn count_component(&mut self, clauses: Vec<Vec<i32>>) -> Result<BigUint, CounterError> {
        let key = canonical_key(&clauses);
        if self.cfg.cache_enabled {
            if let Some(hit) = self.cache.get(&key) {
                self.stats.cache_hits += 1;
                return Ok(hit.clone());
            }
            self.stats.cache_misses += 1;
        }
        self.call_decisions += 1;
        self.stats.decisions += 1;
        if self.call_decisions > self.cfg.max_decisions {
            return Err(CounterError::DecisionBudget(self.call_decisions));
        }
        let v = branch_var(&clauses) as i32;
        let before = vars_of(&clauses).len();
        let mut total = BigUint::zero();
        for lit in [-v, v] {
            if let Some(sub) = assign(&clauses, lit) {
                let after = vars_of(&sub).len();
                let freed = (before - 1 - after) as u64;
                total += self.count_clauses(sub)? << freed;
            }
        }
        if self.cfg.cache_enabled {
            self.stats.cache_bytes +=
                key.len() + (total.bits() as usize + 7) / 8 + CACHE_ENTRY_OVERHEAD;
            if self.stats.cache_bytes > self.cfg.max_cache_bytes {
                return Err(CounterError::CacheBudget(self.stats.cache_bytes));
            }
            self.cache.insert(key, total.clone());
        }
        Ok(total)
    }
}

fn vars_of(clauses: &[Vec<i32>]) -> BTreeSet<u32> {
    clauses.iter().flat_map(|c| c.iter().map(|l| l.unsigned_abs())).collect()
}

/// Applies one literal: satisfied clauses drop, falsified literals drop.
/// `None` when a clause empties (conflict).
fn assign(clauses: &[Vec<i32>], lit: i32) -> Option<Vec<Vec<i32>>> {
    let mut out = Vec::with_capacity(clauses.len());
    for clause in clauses {
        if clause.contains(&lit) {
            continue;
        }
        let reduced: Vec<i32> = clause.iter().copied().filter(|&l| l != -lit).collect();
        if reduced.is_empty() {
            return None;
        }
        out.push(reduced);
    }
    Some(out)
}

/// Unit propagation to fixpoint; returns the reduced clauses and how many
/// variables were forced, or `None` on conflict.
fn propagate(mut clauses: Vec<Vec<i32>>) -> Option<(Vec<Vec<i32>>, u64)> {
    let mut assigned = 0u64;
    loop {
        let Some(&lit) = clauses.iter().find(|c| c.len() == 1).map(|c| &c[0]) else {
            return Some((clauses, assigned));
        };
        clauses = assign(&clauses, lit)?;
        assigned += 1;
    }
}

/// Groups clauses into variable-connected components, ordered by their
/// smallest variable.
fn split_components(clauses: Vec<Vec<i32>>) -> Vec<Vec<Vec<i32>>> {
    let vars: Vec<u32> = vars_of(&clauses).into_iter().collect();
    let index: BTreeMap<u32, usize> = vars.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut parent: Vec<usize> = (0..vars.len()).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let root = find(parent, parent[i]);
            parent[i] = root;
        }
        parent[i]
    }
    for clause in &clauses {
        let first = index[&clause[0].unsigned_abs()];
        for l in &clause[1..] {
            let a = find(&mut parent, first);
            let b = find(&mut parent, index[&l.unsigned_abs()]);
            parent[a.max(b)] = a.min(b);
        }
    }
    // Roots in ascending var-index order give a deterministic component order.
    let mut groups: BTreeMap<usize, Vec<Vec<i32>>> = BTreeMap::new();
    for clause in clauses {
        let root = find(&mut parent, index[&clause[0].unsigned_abs()]);
        groups.entry(root).or_default().push(clause);
    }
    groups.into_values().collect()
}

/// Most frequent variable, ties to the lowest id.
fn branch_var(clauses: &[Vec<i32>]) -> u32 {
    let mut occurrences: BTreeMap<u32, u32> = BTreeMap::new();
    for clause in clauses {
        for l in clause {
            *occurrences.entry(l.unsigned_abs()).or_insert(0) += 1;
        }
    }
    occurrences
        .into_iter()
        .max_by(|(va, ca), (vb, cb)| ca.cmp(cb).then(vb.cmp(va)))
        .expect("branch_var on empty clause set")
        .0
}

/// Canonical serialization: variables remapped to `1..=k` in ascending
/// order, clauses sorted and deduplicated, literals as little-endian i32
/// words with a zero terminator per clause.
fn canonical_key(clauses: &[Vec<i32>]) -> Vec<u8> {
    let vars: Vec<u32> = vars_of(clauses).into_iter().collect();
    let remap: BTreeMap<u32, i32> =
        vars.iter().enumerate().map(|(i, &v)| (v, i as i32 + 1)).collect();
    let mut canon: Vec<Vec<i32>> = clauses
        .iter()
        .map(|c| c.iter().map(|&l| l.signum() * remap[&l.unsigned_abs()]).collect())
        .collect();
    canon.sort_by(|a, b| {
        let ka = a.iter().map(|&l| (l.unsigned_abs(), l > 0));
        let kb = b.iter().map(|&l| (l.unsigned_abs(), l > 0));
        ka.cmp(kb)
    });
    canon.dedup();
    let mut bytes = Vec::with_capacity(canon.iter().map(|c| (c.len() + 1) * 4).sum());
    for clause in canon {
        for l in clause {
            bytes.extend_from_slice(&l.to_le_bytes());
        }
        bytes.extend_from_slice(&0i32.to_le_bytes());
    }
    bytes
}
