//! Sentence AST, quantifier grounding, and the truth-table evaluator.

use std::collections::BTreeSet;

use super::{EntityId, GroundAtomIndex, PredId, Signature};

/// Argument of an atom: a declared entity or a bound variable.
///
/// Variables are identified by quantifier depth; the parser canonicalizes
/// every bound name to `v{depth}`, so depth doubles as the printable name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Term {
    Entity(EntityId),
    Var(u32),
}

/// Sentence AST. Atoms always carry two terms; monadic atoms repeat the
/// argument on both positions (the diagonal convention of the atom index).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(PredId, Term, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    ForAll(u32, Box<Formula>),
    Exists(u32, Box<Formula>),
}

impl Formula {
    pub fn atom1(pred: PredId, t: Term) -> Formula {
        Formula::Atom(pred, t, t)
    }

    pub fn atom2(pred: PredId, a: Term, b: Term) -> Formula {
        Formula::Atom(pred, a, b)
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn forall(var: u32, body: Formula) -> Formula {
        Formula::ForAll(var, Box::new(body))
    }

    pub fn exists(var: u32, body: Formula) -> Formula {
        Formula::Exists(var, Box::new(body))
    }

    /// Left-folds a nonempty sequence into a conjunction.
    pub fn and_all<I: IntoIterator<Item = Formula>>(parts: I) -> Option<Formula> {
        parts.into_iter().reduce(Formula::and)
    }

    /// Variable indices that occur outside the scope of their binder.
    pub fn free_vars(&self) -> BTreeSet<u32> {
        fn walk(f: &Formula, out: &mut BTreeSet<u32>) {
            match f {
                Formula::Atom(_, a, b) => {
                    for t in [a, b] {
                        if let Term::Var(v) = t {
                            out.insert(*v);
                        }
                    }
                }
                Formula::Not(x) => walk(x, out),
                Formula::And(x, y)
                | Formula::Or(x, y)
                | Formula::Implies(x, y)
                | Formula::Iff(x, y) => {
                    walk(x, out);
                    walk(y, out);
                }
                Formula::ForAll(v, body) | Formula::Exists(v, body) => {
                    let mut inner = BTreeSet::new();
                    walk(body, &mut inner);
                    inner.remove(v);
                    out.extend(inner);
                }
            }
        }
        let mut out = BTreeSet::new();
        walk(self, &mut out);
        out
    }

    /// True when the formula has no quantifiers and no variables.
    pub fn is_ground(&self) -> bool {
        match self {
            Formula::Atom(_, a, b) => {
                matches!(a, Term::Entity(_)) && matches!(b, Term::Entity(_))
            }
            Formula::Not(x) => x.is_ground(),
            Formula::And(x, y)
            | Formula::Or(x, y)
            | Formula::Implies(x, y)
            | Formula::Iff(x, y) => x.is_ground() && y.is_ground(),
            Formula::ForAll(..) | Formula::Exists(..) => false,
        }
    }

    /// Evaluates under finite-domain quantifier semantics against the state
    /// description `mask` (bit `var - 1` set means the atom holds). This is
    /// the independent oracle the CNF pipeline is checked against; it never
    /// touches clauses. Panics on free variables.
    pub fn eval(&self, sig: &Signature, atoms: &GroundAtomIndex, mask: u64) -> bool {
        fn term(t: Term, env: &[(u32, EntityId)]) -> EntityId {
            match t {
                Term::Entity(e) => e,
                Term::Var(v) => env
                    .iter()
                    .rev()
                    .find(|(b, _)| *b == v)
                    .map(|(_, e)| *e)
                    .expect("eval: unbound variable"),
            }
        }
        fn go(
            f: &Formula,
            sig: &Signature,
            atoms: &GroundAtomIndex,
            mask: u64,
            env: &mut Vec<(u32, EntityId)>,
        ) -> bool {
            match f {
                Formula::Atom(p, a, b) => {
                    let var = atoms
                        .var_of(*p, term(*a, env), term(*b, env))
                        .expect("eval: atom outside signature");
                    mask >> (var - 1) & 1 == 1
                }
                Formula::Not(x) => !go(x, sig, atoms, mask, env),
                Formula::And(x, y) => {
                    go(x, sig, atoms, mask, env) && go(y, sig, atoms, mask, env)
                }
                Formula::Or(x, y) => {
                    go(x, sig, atoms, mask, env) || go(y, sig, atoms, mask, env)
                }
                Formula::Implies(x, y) => {
                    !go(x, sig, atoms, mask, env) || go(y, sig, atoms, mask, env)
                }
                Formula::Iff(x, y) => {
                    go(x, sig, atoms, mask, env) == go(y, sig, atoms, mask, env)
                }
                Formula::ForAll(v, body) => (0..sig.entities().len() as u32).all(|e| {
                    env.push((*v, EntityId(e)));
                    let r = go(body, sig, atoms, mask, env);
                    env.pop();
                    r
                }),
                Formula::Exists(v, body) => (0..sig.entities().len() as u32).any(|e| {
                    env.push((*v, EntityId(e)));
                    let r = go(body, sig, atoms, mask, env);
                    env.pop();
                    r
                }),
            }
        }
        go(self, sig, atoms, mask, &mut Vec::new())
    }

    /// Lexical tokens of the canonical rendering; [`display`] joins exactly
    /// this sequence, so encoded token streams and printed sentences always
    /// agree.
    pub fn canonical_tokens(&self, sig: &Signature) -> Vec<String> {
        let mut out = Vec::new();
        emit(self, sig, LEVEL_IFF, &mut out);
        out
    }
}

// Precedence levels: a node is emitted bare when its level is at least the
// context's minimum, otherwise parenthesized. Binary chains associate left,
// matching the parser's fold.
const LEVEL_IFF: u8 = 1;
const LEVEL_IMPLIES: u8 = 2;
const LEVEL_OR: u8 = 3;
const LEVEL_AND: u8 = 4;
const LEVEL_UNARY: u8 = 5;

fn level(f: &Formula) -> u8 {
    match f {
        Formula::Iff(..) => LEVEL_IFF,
        Formula::Implies(..) => LEVEL_IMPLIES,
        Formula::Or(..) => LEVEL_OR,
        Formula::And(..) => LEVEL_AND,
        _ => LEVEL_UNARY,
    }
}

fn emit(f: &Formula, sig: &Signature, min: u8, out: &mut Vec<String>) {
    let own = level(f);
    if own < min {
        out.push("(".into());
        emit(f, sig, LEVEL_IFF, out);
        out.push(")".into());
        return;
    }
    let term_name = |t: &Term| match t {
        Term::Entity(e) => sig.entity_name(*e).to_string(),
        Term::Var(v) => format!("v{v}"),
    };
    match f {
        Formula::Atom(p, a, b) => {
            let pred = sig.predicate(*p);
            out.push(pred.name.clone());
            out.push("(".into());
            out.push(term_name(a));
            if pred.arity.argument_count() == 2 {
                out.push(",".into());
                out.push(term_name(b));
            }
            out.push(")".into());
        }
        Formula::Not(x) => {
            out.push("~".into());
            emit(x, sig, LEVEL_UNARY, out);
        }
        Formula::And(x, y) => {
            emit(x, sig, LEVEL_AND, out);
            out.push("&".into());
            emit(y, sig, LEVEL_AND + 1, out);
        }
        Formula::Or(x, y) => {
            emit(x, sig, LEVEL_OR, out);
            out.push("|".into());
            emit(y, sig, LEVEL_OR + 1, out);
        }
        Formula::Implies(x, y) => {
            emit(x, sig, LEVEL_IMPLIES, out);
            out.push("->".into());
            emit(y, sig, LEVEL_IMPLIES + 1, out);
        }
        Formula::Iff(x, y) => {
            emit(x, sig, LEVEL_IFF, out);
            out.push("<->".into());
            emit(y, sig, LEVEL_IFF + 1, out);
        }
        Formula::ForAll(v, body) => {
            out.push("forall".into());
            out.push(format!("v{v}"));
            out.push(".".into());
            emit(body, sig, LEVEL_UNARY, out);
        }
        Formula::Exists(v, body) => {
            out.push("exists".into());
            out.push(format!("v{v}"));
            out.push(".".into());
            emit(body, sig, LEVEL_UNARY, out);
        }
    }
}

/// Joins canonical tokens with conventional FOL spacing: tight around atom
/// parentheses, commas, `~`, and the quantifier dot.
pub fn render_tokens(tokens: &[String]) -> String {
    let mut text = String::new();
    let mut prev: Option<&str> = None;
    for tok in tokens {
        if let Some(p) = prev {
            let tight_after = p == "(" || p == "~" || p == ",";
            let tight_before = tok == ")" || tok == "," || tok == ".";
            let atom_open = tok == "(" && p.chars().next().is_some_and(|c| c.is_ascii_alphabetic());
            if !(tight_after || tight_before || atom_open) {
                text.push(' ');
            }
        }
        text.push_str(tok);
        prev = Some(tok);
    }
    text
}

/// Renders against a signature; `Formula` has no bare `Display` because
/// predicate and entity names live in the signature.
pub fn display(f: &Formula, sig: &Signature) -> String {
    render_tokens(&f.canonical_tokens(sig))
}

/// Replaces every free occurrence of `var` with the entity.
pub fn substitute(f: &Formula, var: u32, entity: EntityId) -> Formula {
    let sub_term = |t: &Term| match t {
        Term::Var(v) if *v == var => Term::Entity(entity),
        other => *other,
    };
    match f {
        Formula::Atom(p, a, b) => Formula::Atom(*p, sub_term(a), sub_term(b)),
        Formula::Not(x) => Formula::not(substitute(x, var, entity)),
        Formula::And(x, y) => {
            Formula::and(substitute(x, var, entity), substitute(y, var, entity))
        }
        Formula::Or(x, y) => {
            Formula::or(substitute(x, var, entity), substitute(y, var, entity))
        }
        Formula::Implies(x, y) => {
            Formula::implies(substitute(x, var, entity), substitute(y, var, entity))
        }
        Formula::Iff(x, y) => {
            Formula::iff(substitute(x, var, entity), substitute(y, var, entity))
        }
        Formula::ForAll(v, body) if *v != var => {
            Formula::forall(*v, substitute(body, var, entity))
        }
        Formula::Exists(v, body) if *v != var => {
            Formula::exists(*v, substitute(body, var, entity))
        }
        shadowing => shadowing.clone(),
    }
}

/// Removes quantifiers by expansion over the entity domain: `forall`
/// becomes a left-folded conjunction of instances, `exists` a disjunction.
/// With a single entity the lone instance stands alone, with no connective.
pub fn ground(f: &Formula, sig: &Signature) -> Formula {
    match f {
        Formula::Atom(..) => f.clone(),
        Formula::Not(x) => Formula::not(ground(x, sig)),
        Formula::And(x, y) => Formula::and(ground(x, sig), ground(y, sig)),
        Formula::Or(x, y) => Formula::or(ground(x, sig), ground(y, sig)),
        Formula::Implies(x, y) => Formula::implies(ground(x, sig), ground(y, sig)),
        Formula::Iff(x, y) => Formula::iff(ground(x, sig), ground(y, sig)),
        Formula::ForAll(v, body) => (0..sig.entities().len() as u32)
            .map(|e| ground(&substitute(body, *v, EntityId(e)), sig))
            .reduce(Formula::and)
            .expect("signature has at least one entity"),
        Formula::Exists(v, body) => (0..sig.entities().len() as u32)
            .map(|e| ground(&substitute(body, *v, EntityId(e)), sig))
            .reduce(Formula::or)
            .expect("signature has at least one entity"),
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;
    use crate::fol::Signature;

    fn sig() -> Signature {
        Signature::new(
            vec![("P".into(), 1), ("Q".into(), 1), ("R".into(), 2)],
            vec!["a".into(), "b".into()],
        )
        .unwrap()
    }

    #[test]
    fn grounding_expands_quantifiers() {
        let s = sig();
        let f = parse("forall x. P(x)", &s).unwrap();
        let g = ground(&f, &s);
        assert_eq!(display(&g, &s), "P(a) & P(b)");
        let f = parse("exists x. R(x, b)", &s).unwrap();
        assert_eq!(display(&ground(&f, &s), &s), "R(a,b) | R(b,b)");
    }

    #[test]
    fn grounding_single_entity_has_no_connective() {
        let s = Signature::new(vec![("P".into(), 1)], vec!["only".into()]).unwrap();
        let f = parse("forall x. P(x)", &s).unwrap();
        assert_eq!(display(&ground(&f, &s), &s), "P(only)");
    }

    #[test]
    fn grounding_handles_nested_quantifiers() {
        let s = sig();
        let f = parse("forall x. exists y. R(x, y)", &s).unwrap();
        let g = ground(&f, &s);
        assert_eq!(display(&g, &s), "(R(a,a) | R(a,b)) & (R(b,a) | R(b,b))");
        assert!(g.is_ground());
    }

    #[test]
    fn grounding_agrees_with_quantifier_semantics() {
        let s = sig();
        let atoms = GroundAtomIndex::new(&s);
        let texts = [
            "forall x. (P(x) -> Q(x))",
            "exists x. (P(x) & ~Q(x))",
            "forall x. exists y. (R(x, y) <-> P(x))",
            "~exists x. forall y. R(x, y)",
            "(forall x. P(x)) | (exists y. ~Q(y))",
        ];
        for text in texts {
            let f = parse(text, &s).unwrap();
            let g = ground(&f, &s);
            for mask in 0..1u64 << atoms.var_count() {
                assert_eq!(
                    f.eval(&s, &atoms, mask),
                    g.eval(&s, &atoms, mask),
                    "mask {mask:#x} for {text}"
                );
            }
        }
    }

    #[test]
    fn display_reparses_to_identical_ast() {
        let s = sig();
        let texts = [
            "P(a)",
            "~~P(a)",
            "P(a) & Q(b) & R(a, b)",
            "P(a) & (Q(b) & R(a, b))",
            "P(a) | Q(a) -> R(a, a) <-> ~P(b)",
            "(P(a) -> Q(a)) -> P(b)",
            "forall x. (P(x) -> exists y. R(x, y))",
            "~forall x. P(x)",
            "P(a) & forall x. Q(x)",
        ];
        for text in texts {
            let f = parse(text, &s).unwrap();
            let printed = display(&f, &s);
            let reparsed = parse(&printed, &s).unwrap();
            assert_eq!(f, reparsed, "{text} printed as {printed}");
            assert_eq!(display(&reparsed, &s), printed);
        }
    }

    #[test]
    fn precedence_round_trips_semantically() {
        // `a & b | c` must group as `(a & b) | c`, and implication chains
        // associate left.
        let s = sig();
        let atoms = GroundAtomIndex::new(&s);
        let pairs = [
            ("P(a) & Q(a) | P(b)", "(P(a) & Q(a)) | P(b)"),
            ("~P(a) & Q(a)", "(~P(a)) & Q(a)"),
            ("P(a) -> Q(a) -> P(b)", "(P(a) -> Q(a)) -> P(b)"),
            ("forall x. P(x) & Q(a)", "(forall x. P(x)) & Q(a)"),
        ];
        for (left, right) in pairs {
            let l = parse(left, &s).unwrap();
            let r = parse(right, &s).unwrap();
            for mask in 0..1u64 << atoms.var_count() {
                assert_eq!(l.eval(&s, &atoms, mask), r.eval(&s, &atoms, mask), "{left}");
            }
        }
    }

    #[test]
    fn free_vars_and_substitution() {
        let s = sig();
        let p = s.lookup_predicate("R").unwrap();
        let open = Formula::atom2(p, Term::Var(0), Term::Entity(EntityId(1)));
        assert_eq!(open.free_vars().into_iter().collect::<Vec<_>>(), vec![0]);
        assert!(!open.is_ground());
        let closed = substitute(&open, 0, EntityId(0));
        assert!(closed.is_ground());
        assert_eq!(display(&closed, &s), "R(a,b)");
        // Substitution stops at a binder for the same index.
        let bound = Formula::forall(0, open.clone());
        assert_eq!(substitute(&bound, 0, EntityId(0)), bound);
    }
}
