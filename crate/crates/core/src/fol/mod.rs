//! First-order logic over a finite signature.
//!
//! A [`Signature`] fixes the predicate and entity vocabulary; the
//! [`GroundAtomIndex`] enumerates every ground atom as a propositional
//! variable; [`Formula`] is the sentence AST produced by [`parse`].
//! Quantifiers are removed by [`ground`] and ground sentences are
//! clausified to [`CnfInstance`] by [`to_cnf`].

mod cnf;
mod formula;
mod parser;

pub use cnf::{export_dimacs, import_dimacs, to_cnf, AuxDef, CnfConfig, CnfInstance};
pub use formula::{display, ground, render_tokens, substitute, Formula, Term};
pub use parser::parse;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Position of a token in parser input, for error reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub offset: usize,
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {} (offset {})", self.line, self.col, self.offset)
    }
}

/// Errors from signature construction, parsing, and clause handling.
#[derive(Debug, Error)]
pub enum FolError {
    #[error("syntax error at {span}: {message}")]
    Syntax { span: Span, message: String },
    #[error("unknown predicate `{name}` at {span}")]
    UnknownPredicate { name: String, span: Span },
    #[error("`{name}` at {span} is neither a bound variable nor a declared entity")]
    UnknownTerm { name: String, span: Span },
    #[error("predicate `{name}` takes {expected} argument(s), got {got} at {span}")]
    ArityMismatch { name: String, expected: u8, got: u8, span: Span },
    #[error("quantifier variable `{name}` at {span} shadows an enclosing binding")]
    ShadowedVariable { name: String, span: Span },
    #[error("quantifier variable `{name}` at {span} collides with a declared entity")]
    VariableShadowsEntity { name: String, span: Span },
    #[error("invalid identifier `{0}`")]
    InvalidIdentifier(String),
    #[error("duplicate name `{0}` in signature")]
    DuplicateName(String),
    #[error("`{0}` is reserved and cannot be declared in a signature")]
    ReservedName(String),
    #[error("signature must declare at least one entity")]
    NoEntities,
    #[error("predicate arity must be 1 or 2, got {0}")]
    BadArity(u8),
    #[error("conjunction parts declare different variable spaces: {0} vs {1}")]
    MixedVariableSpaces(u32, u32),
    #[error("literal {0} out of range for {1} variables")]
    LiteralOutOfRange(i64, u32),
    #[error("invalid DIMACS input: {0}")]
    Dimacs(String),
}

/// Predicate arity; monadic atoms occupy the diagonal of the entity grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Arity {
    Monadic,
    Dyadic,
}

impl Arity {
    pub fn argument_count(self) -> u8 {
        match self {
            Arity::Monadic => 1,
            Arity::Dyadic => 2,
        }
    }
}

/// Index of a predicate within its signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PredId(pub u32);

/// Index of an entity within its signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntityId(pub u32);

#[derive(Debug, Clone)]
pub struct Predicate {
    pub name: String,
    pub arity: Arity,
}

/// The predicate/entity vocabulary of a finite world.
///
/// Entity order is fixed at construction and determines the ground-atom
/// enumeration, so two signatures with the same declarations index
/// identically.
#[derive(Debug, Clone)]
pub struct Signature {
    predicates: Vec<Predicate>,
    entities: Vec<String>,
    pred_by_name: HashMap<String, PredId>,
    entity_by_name: HashMap<String, EntityId>,
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Names that cannot be declared: grammar keywords and the canonical
/// bound-variable names `v0`, `v1`, ... used by the printer and the codec
/// token dictionary.
fn is_reserved(s: &str) -> bool {
    if s == "forall" || s == "exists" {
        return true;
    }
    let mut chars = s.chars();
    chars.next() == Some('v') && s.len() > 1 && chars.all(|c| c.is_ascii_digit())
}

impl Signature {
    /// Builds a signature from `(name, arity)` predicate declarations and an
    /// ordered entity list. Names must be unique across both namespaces.
    pub fn new<P, E>(predicates: P, entities: E) -> Result<Signature, FolError>
    where
        P: IntoIterator<Item = (String, u8)>,
        E: IntoIterator<Item = String>,
    {
        let mut sig = Signature {
            predicates: Vec::new(),
            entities: Vec::new(),
            pred_by_name: HashMap::new(),
            entity_by_name: HashMap::new(),
        };
        let mut seen: HashMap<String, ()> = HashMap::new();
        let check_name = |name: &str, seen: &mut HashMap<String, ()>| -> Result<(), FolError> {
            if !is_identifier(name) {
                return Err(FolError::InvalidIdentifier(name.to_string()));
            }
            if is_reserved(name) {
                return Err(FolError::ReservedName(name.to_string()));
            }
            if seen.insert(name.to_string(), ()).is_some() {
                return Err(FolError::DuplicateName(name.to_string()));
            }
            Ok(())
        };
        for (name, arity) in predicates {
            check_name(&name, &mut seen)?;
            let arity = match arity {
                1 => Arity::Monadic,
                2 => Arity::Dyadic,
                other => return Err(FolError::BadArity(other)),
            };
            let id = PredId(sig.predicates.len() as u32);
            sig.pred_by_name.insert(name.clone(), id);
            sig.predicates.push(Predicate { name, arity });
        }
        for name in entities {
            check_name(&name, &mut seen)?;
            let id = EntityId(sig.entities.len() as u32);
            sig.entity_by_name.insert(name.clone(), id);
            sig.entities.push(name);
        }
        if sig.entities.is_empty() {
            return Err(FolError::NoEntities);
        }
        Ok(sig)
    }

    pub fn predicates(&self) -> &[Predicate] {
        &self.predicates
    }

    pub fn entities(&self) -> &[String] {
        &self.entities
    }

    pub fn predicate(&self, id: PredId) -> &Predicate {
        &self.predicates[id.0 as usize]
    }

    pub fn entity_name(&self, id: EntityId) -> &str {
        &self.entities[id.0 as usize]
    }

    pub fn lookup_predicate(&self, name: &str) -> Option<PredId> {
        self.pred_by_name.get(name).copied()
    }

    pub fn lookup_entity(&self, name: &str) -> Option<EntityId> {
        self.entity_by_name.get(name).copied()
    }
}

/// Bijection between ground atoms `(predicate, entity, entity)` and
/// propositional variable ids `1..=V`.
///
/// Variables are assigned row-major: predicates in declaration order, then
/// first entity, then second entity. Monadic predicates contribute one
/// diagonal atom per entity, so
/// `V = Σ (|E| for monadic, |E|² for dyadic)`.
#[derive(Debug, Clone)]
pub struct GroundAtomIndex {
    offsets: Vec<u32>,
    arities: Vec<Arity>,
    entity_count: u32,
    total: u32,
}

impl GroundAtomIndex {
    pub fn new(sig: &Signature) -> GroundAtomIndex {
        let e = sig.entities.len() as u32;
        let mut offsets = Vec::with_capacity(sig.predicates.len());
        let mut arities = Vec::with_capacity(sig.predicates.len());
        let mut next = 0u32;
        for pred in &sig.predicates {
            offsets.push(next);
            arities.push(pred.arity);
            next += match pred.arity {
                Arity::Monadic => e,
                Arity::Dyadic => e * e,
            };
        }
        GroundAtomIndex { offsets, arities, entity_count: e, total: next }
    }

    /// Number of ground atoms V.
    pub fn var_count(&self) -> u32 {
        self.total
    }

    /// Variable id for the atom `pred(a, b)`; monadic predicates require
    /// `a == b`.
    pub fn var_of(&self, pred: PredId, a: EntityId, b: EntityId) -> Option<u32> {
        let p = pred.0 as usize;
        if p >= self.offsets.len() || a.0 >= self.entity_count || b.0 >= self.entity_count {
            return None;
        }
        let base = self.offsets[p];
        match self.arities[p] {
            Arity::Monadic => {
                if a != b {
                    return None;
                }
                Some(base + a.0 + 1)
            }
            Arity::Dyadic => Some(base + a.0 * self.entity_count + b.0 + 1),
        }
    }

    /// Inverse of [`var_of`](Self::var_of).
    pub fn atom_of(&self, var: u32) -> Option<(PredId, EntityId, EntityId)> {
        if var == 0 || var > self.total {
            return None;
        }
        let v = var - 1;
        // Predicates are few; a linear scan over offsets is fine.
        let mut p = self.offsets.len() - 1;
        while self.offsets[p] > v {
            p -= 1;
        }
        let rel = v - self.offsets[p];
        match self.arities[p] {
            Arity::Monadic => {
                let e = EntityId(rel);
                Some((PredId(p as u32), e, e))
            }
            Arity::Dyadic => {
                let a = EntityId(rel / self.entity_count);
                let b = EntityId(rel % self.entity_count);
                Some((PredId(p as u32), a, b))
            }
        }
    }

    /// Human-readable atom label for a variable, e.g. `Likes(Alice,Bob)`.
    pub fn label(&self, var: u32, sig: &Signature) -> Option<String> {
        let (p, a, b) = self.atom_of(var)?;
        let pred = sig.predicate(p);
        Some(match pred.arity {
            Arity::Monadic => format!("{}({})", pred.name, sig.entity_name(a)),
            Arity::Dyadic => {
                format!("{}({},{})", pred.name, sig.entity_name(a), sig.entity_name(b))
            }
        })
    }
}

/// A signature together with its atom enumeration and clausification
/// settings; the shared context threaded through the pipeline.
#[derive(Debug, Clone)]
pub struct World {
    signature: Signature,
    atoms: GroundAtomIndex,
    cnf: CnfConfig,
}

impl World {
    pub fn new(signature: Signature) -> World {
        let atoms = GroundAtomIndex::new(&signature);
        World { signature, atoms, cnf: CnfConfig::default() }
    }

    pub fn with_cnf_config(signature: Signature, cnf: CnfConfig) -> World {
        let atoms = GroundAtomIndex::new(&signature);
        World { signature, atoms, cnf }
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn atoms(&self) -> &GroundAtomIndex {
        &self.atoms
    }

    pub fn cnf_config(&self) -> &CnfConfig {
        &self.cnf
    }

    /// Number of ground atoms V; the state space has `2^V` descriptions.
    pub fn var_count(&self) -> u32 {
        self.atoms.var_count()
    }

    pub fn parse(&self, text: &str) -> Result<Formula, FolError> {
        parse(text, &self.signature)
    }

    /// Grounds and clausifies a sentence against this world.
    pub fn compile(&self, f: &Formula) -> CnfInstance {
        let g = ground(f, &self.signature);
        to_cnf(&g, &self.atoms, &self.cnf)
    }
}
