//! Count-preserving clausification and DIMACS text.
//!
//! Small sentences are distributed into an equivalent CNF over the ground
//! atoms alone. Past a literal budget the translation switches to
//! definitional form with one auxiliary variable per connective, defined by
//! a full biconditional — auxiliaries are then functions of the ground
//! atoms, so the model count over all variables equals the count over the
//! ground atoms. Either way, `count(to_cnf(f)) = |{states : f holds}|`.

use super::formula::Formula;
use super::{FolError, GroundAtomIndex, Signature};

/// Clausification settings.
#[derive(Debug, Clone, Copy)]
pub struct CnfConfig {
    /// Distribute to plain CNF while the negation-normal form has at most
    /// this many literal occurrences; switch to definitional form above it.
    /// Zero forces definitional form everywhere (useful for tests).
    pub distribution_literal_limit: u32,
}

impl Default for CnfConfig {
    fn default() -> CnfConfig {
        CnfConfig { distribution_literal_limit: 32 }
    }
}

/// Definition of one auxiliary variable: `var <-> op(lits...)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuxDef {
    pub var: u32,
    pub op: &'static str,
    pub lits: Vec<i32>,
}

/// A normalized clause set over variables `1..=var_count`, of which
/// `1..=original_vars` are ground atoms and the rest are definitional
/// auxiliaries.
///
/// Normal form: literals within a clause are sorted by variable with the
/// negative literal first, tautological clauses and duplicate literals are
/// dropped, and the clause list is sorted and deduplicated. The empty
/// clause set is the tautology; an empty clause is the contradiction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfInstance {
    pub original_vars: u32,
    pub var_count: u32,
    pub clauses: Vec<Vec<i32>>,
    pub aux: Vec<AuxDef>,
}

fn lit_key(l: i32) -> (u32, bool) {
    (l.unsigned_abs(), l > 0)
}

/// Sorts and dedupes literals; returns `None` for tautological clauses.
fn normalize_clause(mut lits: Vec<i32>) -> Option<Vec<i32>> {
    lits.sort_by_key(|&l| lit_key(l));
    lits.dedup();
    let tautological = lits.windows(2).any(|w| w[0] == -w[1]);
    if tautological {
        None
    } else {
        Some(lits)
    }
}

fn normalize(clauses: Vec<Vec<i32>>) -> Vec<Vec<i32>> {
    let mut out: Vec<Vec<i32>> = clauses.into_iter().filter_map(normalize_clause).collect();
    out.sort_by(|a, b| {
        let ka = a.iter().map(|&l| lit_key(l));
        let kb = b.iter().map(|&l| lit_key(l));
        ka.cmp(kb)
    });
    out.dedup();
    out
}

impl CnfInstance {
    /// The empty clause set: every state satisfies it.
    pub fn tautology(vars: u32) -> CnfInstance {
        CnfInstance { original_vars: vars, var_count: vars, clauses: Vec::new(), aux: Vec::new() }
    }

    /// A single empty clause: no state satisfies it.
    pub fn contradiction(vars: u32) -> CnfInstance {
        CnfInstance {
            original_vars: vars,
            var_count: vars,
            clauses: vec![Vec::new()],
            aux: Vec::new(),
        }
    }

    /// Builds and normalizes an instance with no auxiliaries.
    pub fn from_clauses(vars: u32, clauses: Vec<Vec<i32>>) -> Result<CnfInstance, FolError> {
        for clause in &clauses {
            for &l in clause {
                if l == 0 || l.unsigned_abs() > vars {
                    return Err(FolError::LiteralOutOfRange(l as i64, vars));
                }
            }
        }
        Ok(CnfInstance {
            original_vars: vars,
            var_count: vars,
            clauses: normalize(clauses),
            aux: Vec::new(),
        })
    }

    /// Conjoins two instances over the same ground atoms. The other
    /// instance's auxiliaries are renumbered past this instance's variables,
    /// so counts still project correctly onto the shared atoms.
    pub fn conjoin(&self, other: &CnfInstance) -> Result<CnfInstance, FolError> {
        if self.original_vars != other.original_vars {
            return Err(FolError::MixedVariableSpaces(self.original_vars, other.original_vars));
        }
        let shift = self.var_count - self.original_vars;
        let move_lit = |l: i32| -> i32 {
            if l.unsigned_abs() > self.original_vars {
                l.signum() * (l.abs() + shift as i32)
            } else {
                l
            }
        };
        let mut clauses = self.clauses.clone();
        clauses.extend(
            other.clauses.iter().map(|c| c.iter().map(|&l| move_lit(l)).collect::<Vec<i32>>()),
        );
        let mut aux = self.aux.clone();
        aux.extend(other.aux.iter().map(|d| AuxDef {
            var: d.var + shift,
            op: d.op,
            lits: d.lits.iter().map(|&l| move_lit(l)).collect(),
        }));
        Ok(CnfInstance {
            original_vars: self.original_vars,
            var_count: self.var_count + (other.var_count - other.original_vars),
            clauses: normalize(clauses),
            aux,
        })
    }

    /// Conjoins a sequence of instances onto the tautology.
    pub fn conjoin_all<'a, I>(vars: u32, parts: I) -> Result<CnfInstance, FolError>
    where
        I: IntoIterator<Item = &'a CnfInstance>,
    {
        let mut acc = CnfInstance::tautology(vars);
        for p in parts {
            acc = acc.conjoin(p)?;
        }
        Ok(acc)
    }

    /// True when `mask` (bit `var - 1`) satisfies every clause; a test and
    /// oracle helper for instances with at most 64 variables.
    pub fn satisfied_by(&self, mask: u64) -> bool {
        debug_assert!(self.var_count <= 64);
        self.clauses.iter().all(|clause| {
            clause.iter().any(|&l| {
                let bit = mask >> (l.unsigned_abs() - 1) & 1 == 1;
                bit == (l > 0)
            })
        })
    }
}

/// Negation-normal form with flattened n-ary connectives.
enum Nnf {
    Lit(i32),
    And(Vec<Nnf>),
    Or(Vec<Nnf>),
}

fn nnf_and(children: Vec<Nnf>) -> Nnf {
    let mut flat = Vec::with_capacity(children.len());
    for c in children {
        match c {
            Nnf::And(inner) => flat.extend(inner),
            other => flat.push(other),
        }
    }
    if flat.len() == 1 {
        flat.pop().unwrap()
    } else {
        Nnf::And(flat)
    }
}

fn nnf_or(children: Vec<Nnf>) -> Nnf {
    let mut flat = Vec::with_capacity(children.len());
    for c in children {
        match c {
            Nnf::Or(inner) => flat.extend(inner),
            other => flat.push(other),
        }
    }
    if flat.len() == 1 {
        flat.pop().unwrap()
    } else {
        Nnf::Or(flat)
    }
}

fn to_nnf(f: &Formula, positive: bool, atoms: &GroundAtomIndex) -> Nnf {
    match f {
        Formula::Atom(p, a, b) => {
            let (super::formula::Term::Entity(ea), super::formula::Term::Entity(eb)) = (a, b)
            else {
                panic!("to_cnf requires a ground formula");
            };
            let var = atoms.var_of(*p, *ea, *eb).expect("atom outside signature") as i32;
            Nnf::Lit(if positive { var } else { -var })
        }
        Formula::Not(x) => to_nnf(x, !positive, atoms),
        Formula::And(x, y) => {
            let (l, r) = (to_nnf(x, positive, atoms), to_nnf(y, positive, atoms));
            if positive {
                nnf_and(vec![l, r])
            } else {
                nnf_or(vec![l, r])
            }
        }
        Formula::Or(x, y) => {
            let (l, r) = (to_nnf(x, positive, atoms), to_nnf(y, positive, atoms));
            if positive {
                nnf_or(vec![l, r])
            } else {
                nnf_and(vec![l, r])
            }
        }
        Formula::Implies(x, y) => {
            if positive {
                nnf_or(vec![to_nnf(x, false, atoms), to_nnf(y, true, atoms)])
            } else {
                nnf_and(vec![to_nnf(x, true, atoms), to_nnf(y, false, atoms)])
            }
        }
        Formula::Iff(x, y) => {
            // a<->b = (¬a∨b)∧(a∨¬b); ¬(a<->b) = (a∨b)∧(¬a∨¬b).
            let (xp, xn) = (to_nnf(x, true, atoms), to_nnf(x, false, atoms));
            let (yp, yn) = (to_nnf(y, true, atoms), to_nnf(y, false, atoms));
            if positive {
                nnf_and(vec![nnf_or(vec![xn, yp]), nnf_or(vec![xp, yn])])
            } else {
                nnf_and(vec![nnf_or(vec![xp, yp]), nnf_or(vec![xn, yn])])
            }
        }
        Formula::ForAll(..) | Formula::Exists(..) => {
            panic!("to_cnf requires a ground formula; call ground() first")
        }
    }
}

fn literal_occurrences(n: &Nnf) -> u64 {
    match n {
        Nnf::Lit(_) => 1,
        Nnf::And(cs) | Nnf::Or(cs) => cs.iter().map(literal_occurrences).sum(),
    }
}

/// Cartesian distribution of ∨ over ∧.
fn distribute(n: &Nnf) -> Vec<Vec<i32>> {
    match n {
        Nnf::Lit(l) => vec![vec![*l]],
        Nnf::And(cs) => cs.iter().flat_map(distribute).collect(),
        Nnf::Or(cs) => {
            let mut acc: Vec<Vec<i32>> = vec![Vec::new()];
            for c in cs {
                let child = distribute(c);
                let mut next = Vec::with_capacity(acc.len() * child.len());
                for partial in &acc {
                    for clause in &child {
                        let mut merged = partial.clone();
                        merged.extend_from_slice(clause);
                        next.push(merged);
                    }
                }
                acc = next;
            }
            acc
        }
    }
}

/// Definitional translation: post-order auxiliary introduction with full
/// `aux <-> connective` clauses, root asserted as a unit.
fn definitional(n: &Nnf, first_aux: u32) -> (Vec<Vec<i32>>, Vec<AuxDef>, u32) {
    fn define(
        n: &Nnf,
        next: &mut u32,
        clauses: &mut Vec<Vec<i32>>,
        aux: &mut Vec<AuxDef>,
    ) -> i32 {
        match n {
            Nnf::Lit(l) => *l,
            Nnf::And(cs) => {
                let lits: Vec<i32> =
                    cs.iter().map(|c| define(c, next, clauses, aux)).collect();
                let a = *next as i32;
                *next += 1;
                for &l in &lits {
                    clauses.push(vec![-a, l]);
                }
                let mut back: Vec<i32> = lits.iter().map(|&l| -l).collect();
                back.push(a);
                clauses.push(back);
                aux.push(AuxDef { var: a as u32, op: "and", lits });
                a
            }
            Nnf::Or(cs) => {
                let lits: Vec<i32> =
                    cs.iter().map(|c| define(c, next, clauses, aux)).collect();
                let a = *next as i32;
                *next += 1;
                for &l in &lits {
                    clauses.push(vec![a, -l]);
                }
                let mut fwd = vec![-a];
                fwd.extend_from_slice(&lits);
                clauses.push(fwd);
                aux.push(AuxDef { var: a as u32, op: "or", lits });
                a
            }
        }
    }
    let mut next = first_aux;
    let mut clauses = Vec::new();
    let mut aux = Vec::new();
    let root = define(n, &mut next, &mut clauses, &mut aux);
    clauses.push(vec![root]);
    (clauses, aux, next - 1)
}

/// Clausifies a ground formula over the atom index. Panics on quantifiers
/// or variables; ground first.
pub fn to_cnf(f: &Formula, atoms: &GroundAtomIndex, cfg: &CnfConfig) -> CnfInstance {
    let vars = atoms.var_count();
    let n = to_nnf(f, true, atoms);
    if literal_occurrences(&n) <= cfg.distribution_literal_limit as u64 {
        CnfInstance {
            original_vars: vars,
            var_count: vars,
            clauses: normalize(distribute(&n)),
            aux: Vec::new(),
        }
    } else {
        let (clauses, aux, last_var) = definitional(&n, vars + 1);
        CnfInstance {
            original_vars: vars,
            var_count: last_var.max(vars),
            clauses: normalize(clauses),
            aux,
        }
    }
}

/// Renders DIMACS text: comment lines mapping ground atoms (and auxiliary
/// definitions) to variables, the `p cnf` header, then one clause per line.
pub fn export_dimacs(c: &CnfInstance, sig: &Signature, atoms: &GroundAtomIndex) -> String {
    let mut out = String::new();
    if atoms.var_count() == c.original_vars {
        for v in 1..=c.original_vars {
            if let Some(label) = atoms.label(v, sig) {
                out.push_str(&format!("c atom {v} = {label}\n"));
            }
        }
    }
    for d in &c.aux {
        let parts: Vec<String> = d.lits.iter().map(|l| l.to_string()).collect();
        out.push_str(&format!("c aux {} <-> {}({})\n", d.var, d.op, parts.join(", ")));
    }
    out.push_str(&format!("p cnf {} {}\n", c.var_count, c.clauses.len()));
    for clause in &c.clauses {
        for &l in clause {
            out.push_str(&l.to_string());
            out.push(' ');
        }
        out.push_str("0\n");
    }
    out
}

/// Parses DIMACS text back into an instance. Comment lines are ignored, so
/// auxiliary provenance is not reconstructed; all variables count as
/// original, which leaves model counts unchanged for count-preserving
/// exports.
pub fn import_dimacs(text: &str) -> Result<CnfInstance, FolError> {
    let mut header: Option<(u32, usize)> = None;
    let mut clauses: Vec<Vec<i32>> = Vec::new();
    let mut current: Vec<i32> = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("p ") {
            if header.is_some() {
                return Err(FolError::Dimacs("duplicate header".into()));
            }
            let fields: Vec<&str> = rest.split_whitespace().collect();
            match fields.as_slice() {
                ["cnf", vars, count] => {
                    let vars: u32 = vars
                        .parse()
                        .map_err(|_| FolError::Dimacs(format!("bad var count `{vars}`")))?;
                    let count: usize = count
                        .parse()
                        .map_err(|_| FolError::Dimacs(format!("bad clause count `{count}`")))?;
                    header = Some((vars, count));
                }
                _ => return Err(FolError::Dimacs(format!("bad header `{line}`"))),
            }
            continue;
        }
        let (vars, _) = header.ok_or_else(|| {
            FolError::Dimacs("clause before `p cnf` header".into())
        })?;
        for tok in line.split_whitespace() {
            let lit: i32 =
                tok.parse().map_err(|_| FolError::Dimacs(format!("bad literal `{tok}`")))?;
            if lit == 0 {
                clauses.push(std::mem::take(&mut current));
            } else {
                if lit.unsigned_abs() > vars {
                    return Err(FolError::LiteralOutOfRange(lit as i64, vars));
                }
                current.push(lit);
            }
        }
    }
    let (vars, declared) = header.ok_or_else(|| FolError::Dimacs("missing header".into()))?;
    if !current.is_empty() {
        return Err(FolError::Dimacs("unterminated clause at end of input".into()));
    }
    if clauses.len() != declared {
        return Err(FolError::Dimacs(format!(
            "header declares {declared} clauses, found {}",
            clauses.len()
        )));
    }
    CnfInstance::from_clauses(vars, clauses)
}
