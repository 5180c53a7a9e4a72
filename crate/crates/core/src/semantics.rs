//! Inductive probabilities over state descriptions.
//!
//! With a uniform prior over the `2^V` state descriptions, the degree of
//! confirmation of a sentence `m` given evidence `e` is the exact count
//! ratio `count(m ∧ e) / count(e)`, and its cont-information is the
//! complement `1 − c(m, e)` — the fraction of remaining possibility mass
//! that `m` excludes. Everything here stays in exact rationals; floats
//! appear only in the bit-space uncertainty metric, which is a reporting
//! quantity.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::counter::{Counter, CounterError, ModelCount};
use crate::fol::{CnfInstance, FolError, Formula, World};

#[derive(Debug, Error)]
pub enum SemanticsError {
    #[error("evidence is unsatisfiable (model count 0)")]
    InconsistentEvidence,
    #[error("conditional probability undefined: conditioning evidence has count 0")]
    UndefinedConditional,
    #[error("uncertainty metric undefined: full evidence eliminates no states")]
    DegenerateMetric,
    #[error("confirmation by count ratio is only defined for the uniform measure λ(w) = w")]
    UnsupportedMeasure,
    #[error("invalid predictive-probability arguments: {0}")]
    PredictiveDomain(String),
    #[error("{0}")]
    Counter(#[from] CounterError),
    #[error("{0}")]
    Fol(#[from] FolError),
}

/// An exact probability in `[0, 1]` with a float view for reporting.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Probability(BigRational);

impl Probability {
    pub fn zero() -> Probability {
        Probability(BigRational::zero())
    }

    pub fn one() -> Probability {
        Probability(BigRational::one())
    }

    /// `num/den` from model counts; `den` must be positive and at least
    /// `num`.
    pub fn from_counts(num: &ModelCount, den: &ModelCount) -> Result<Probability, SemanticsError> {
        if den.is_zero() {
            return Err(SemanticsError::UndefinedConditional);
        }
        debug_assert!(num <= den, "conditional counts must not exceed the condition");
        Ok(Probability(BigRational::new(
            BigInt::from(num.as_biguint().clone()),
            BigInt::from(den.as_biguint().clone()),
        )))
    }

    pub fn from_rational(r: BigRational) -> Probability {
        debug_assert!(!r.is_negative() && r <= BigRational::one());
        Probability(r)
    }

    /// `1 − p`.
    pub fn complement(&self) -> Probability {
        Probability(BigRational::one() - &self.0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }

    pub fn as_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl std::fmt::Display for Probability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// Choice of prior coefficient λ(w) in the inductive continuum. The
/// state-space rule λ(w) = w is the uniform prior the count-ratio
/// machinery assumes.
#[derive(Debug, Clone, PartialEq)]
pub enum LambdaRule {
    StateSpace,
    Fixed(BigRational),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureConfig {
    pub lambda: LambdaRule,
}

impl Default for MeasureConfig {
    fn default() -> MeasureConfig {
        MeasureConfig { lambda: LambdaRule::StateSpace }
    }
}

impl MeasureConfig {
    pub fn is_uniform(&self) -> bool {
        matches!(self.lambda, LambdaRule::StateSpace)
    }

    /// λ for a state space of size `w`.
    pub fn lambda_for(&self, w: &BigUint) -> BigRational {
        match &self.lambda {
            LambdaRule::StateSpace => BigRational::from(BigInt::from(w.clone())),
            LambdaRule::Fixed(l) => l.clone(),
        }
    }
}

/// An ordered, jointly satisfiable set of ground sentences with its cached
/// conjunction and model count.
#[derive(Debug, Clone)]
pub struct Evidence {
    sentences: Vec<Formula>,
    instances: Vec<CnfInstance>,
    conjunction: CnfInstance,
    count: ModelCount,
}

impl Evidence {
    /// No sentences: the conjunction is the tautology over the world's
    /// atoms, so every state remains possible.
    pub fn empty(world: &World) -> Evidence {
        Evidence {
            sentences: Vec::new(),
            instances: Vec::new(),
            conjunction: CnfInstance::tautology(world.var_count()),
            count: ModelCount::pow2(world.var_count() as u64),
        }
    }

    /// Compiles and conjoins the sentences; rejects unsatisfiable sets.
    pub fn new(
        world: &World,
        counter: &mut Counter,
        sentences: Vec<Formula>,
    ) -> Result<Evidence, SemanticsError> {
        let mut e = Evidence::empty(world);
        for s in sentences {
            e = e.try_extended(world, counter, s)?;
        }
        Ok(e)
    }

    /// Appends one sentence, recomputing conjunction and count. An
    /// extension that empties the state space is an error and leaves the
    /// original evidence usable.
    pub fn try_extended(
        &self,
        world: &World,
        counter: &mut Counter,
        sentence: Formula,
    ) -> Result<Evidence, SemanticsError> {
        let inst = world.compile(&sentence);
        let conjunction = self.conjunction.conjoin(&inst)?;
        let count = counter.count(&conjunction)?;
        if count.is_zero() {
            return Err(SemanticsError::InconsistentEvidence);
        }
        let mut sentences = self.sentences.clone();
        sentences.push(sentence);
        let mut instances = self.instances.clone();
        instances.push(inst);
        Ok(Evidence { sentences, instances, conjunction, count })
    }

    pub fn sentences(&self) -> &[Formula] {
        &self.sentences
    }

    pub fn instance(&self, i: usize) -> &CnfInstance {
        &self.instances[i]
    }

    pub fn conjunction(&self) -> &CnfInstance {
        &self.conjunction
    }

    pub fn count(&self) -> &ModelCount {
        &self.count
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }
}

/// Degree of confirmation `c(m, e) = count(m ∧ e) / count(e)` under the
/// uniform measure. Any other λ-rule is rejected: the continuum's
/// closed form is only defined here for ground-atom prediction
/// ([`predictive`]), not for arbitrary sentences.
pub fn confirmation(
    m: &Formula,
    given: &Evidence,
    world: &World,
    counter: &mut Counter,
    cfg: &MeasureConfig,
) -> Result<Probability, SemanticsError> {
    if !cfg.is_uniform() {
        return Err(SemanticsError::UnsupportedMeasure);
    }
    if given.count().is_zero() {
        return Err(SemanticsError::UndefinedConditional);
    }
    let m_inst = world.compile(m);
    let both = given.conjunction().conjoin(&m_inst)?;
    let num = counter.count(&both)?;
    Probability::from_counts(&num, given.count())
}

/// cont-information `cont(m; e) = 1 − c(m, e)`.
pub fn cont(
    m: &Formula,
    given: &Evidence,
    world: &World,
    counter: &mut Counter,
    cfg: &MeasureConfig,
) -> Result<Probability, SemanticsError> {
    Ok(confirmation(m, given, world, counter, cfg)?.complement())
}

/// Inductive predictive probability for a ground-atom property:
/// `(n_c + λ/w) / (n + λ)` after observing it hold `n_c` times in `n`
/// trials over a state space of size `w`.
pub fn predictive(
    n: u64,
    n_c: u64,
    w: &BigUint,
    lambda: &BigRational,
) -> Result<Probability, SemanticsError> {
    if n_c > n {
        return Err(SemanticsError::PredictiveDomain(format!(
            "confirming count {n_c} exceeds observation count {n}"
        )));
    }
    if w.is_zero() {
        return Err(SemanticsError::PredictiveDomain("state space is empty".into()));
    }
    if lambda.is_negative() {
        return Err(SemanticsError::PredictiveDomain("λ must be nonnegative".into()));
    }
    let n = BigRational::from(BigInt::from(n));
    let n_c = BigRational::from(BigInt::from(n_c));
    let w = BigRational::from(BigInt::from(w.clone()));
    let den = &n + lambda;
    if den.is_zero() {
        return Err(SemanticsError::PredictiveDomain("n + λ must be positive".into()));
    }
    Ok(Probability::from_rational((n_c + lambda / w) / den))
}

/// Bit-space progress metric:
/// `100 · (V − log2 count(O)) / (V − log2 count(E))`. Zero sentences give
/// 0%, the full evidence gives 100%. Undefined when the full evidence
/// eliminates nothing.
pub fn uncertainty_reduction(
    received: &Evidence,
    full: &Evidence,
) -> Result<f64, SemanticsError> {
    let v_received = received.conjunction().original_vars;
    let v = full.conjunction().original_vars;
    if v_received != v {
        return Err(SemanticsError::Fol(FolError::MixedVariableSpaces(v_received, v)));
    }
    if full.count().is_zero() {
        return Err(SemanticsError::InconsistentEvidence);
    }
    let denominator = v as f64 - full.count().log2().expect("nonzero count");
    if denominator == 0.0 {
        return Err(SemanticsError::DegenerateMetric);
    }
    let received_log2 = received.count().log2().ok_or(SemanticsError::InconsistentEvidence)?;
    Ok(100.0 * (v as f64 - received_log2) / denominator)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fol::Signature;

    /// The 16-state scenario: one dyadic predicate over two entities.
    fn world16() -> World {
        World::new(
            Signature::new(
                vec![("Pr1".into(), 2)],
                vec!["en1".into(), "en2".into()],
            )
            .unwrap(),
        )
    }

    fn parse(world: &World, text: &str) -> Formula {
        world.parse(text).unwrap()
    }

    fn evidence(world: &World, counter: &mut Counter, texts: &[&str]) -> Evidence {
        let sentences = texts.iter().map(|t| parse(world, t)).collect();
        Evidence::new(world, counter, sentences).unwrap()
    }

    const STATE: &str =
        "Pr1(en1,en1) & Pr1(en1,en2) & Pr1(en2,en1) & Pr1(en2,en2)";

    #[test]
    fn sixteen_state_worked_example() {
        let world = world16();
        let mut k = Counter::default();
        let cfg = MeasureConfig::default();
        let st = parse(&world, STATE);

        let prior = Evidence::empty(&world);
        assert_eq!(prior.count(), &ModelCount::from(16));
        let c0 = confirmation(&st, &prior, &world, &mut k, &cfg).unwrap();
        assert_eq!(c0, Probability::from_counts(&1.into(), &16.into()).unwrap());

        // One observed atom: 8 states remain, cont rises to 7/8.
        let e1 = evidence(&world, &mut k, &["Pr1(en1, en2)"]);
        assert_eq!(e1.count(), &ModelCount::from(8));
        let cont1 = cont(&st, &e1, &world, &mut k, &cfg).unwrap();
        assert_eq!(cont1, Probability::from_counts(&7.into(), &8.into()).unwrap());

        // Two atoms at once: cont 3/4.
        let e2 = evidence(&world, &mut k, &["Pr1(en1, en2) & Pr1(en2, en1)"]);
        assert_eq!(e2.count(), &ModelCount::from(4));
        let cont2 = cont(&st, &e2, &world, &mut k, &cfg).unwrap();
        assert_eq!(cont2, Probability::from_counts(&3.into(), &4.into()).unwrap());

        // The same two atoms arriving separately agree with e2.
        let e13 = evidence(&world, &mut k, &["Pr1(en1, en2)", "Pr1(en2, en1)"]);
        let cont13 = cont(&st, &e13, &world, &mut k, &cfg).unwrap();
        assert_eq!(cont13, cont2);

        // A state contradicting the evidence is fully excluded.
        let bad = parse(
            &world,
            "~Pr1(en1,en2) & Pr1(en1,en1) & Pr1(en2,en1) & Pr1(en2,en2)",
        );
        assert!(cont(&bad, &e1, &world, &mut k, &cfg).unwrap().is_one());

        // Tautologies carry no content.
        let taut = parse(&world, "Pr1(en1,en1) | ~Pr1(en1,en1)");
        assert!(cont(&taut, &e1, &world, &mut k, &cfg).unwrap().is_zero());

        // Self-conditioning.
        let e2_sentence = parse(&world, "Pr1(en1, en2) & Pr1(en2, en1)");
        assert!(confirmation(&e2_sentence, &e2, &world, &mut k, &cfg).unwrap().is_one());
    }

    #[test]
    fn confirmations_over_states_sum_to_one() {
        let world = world16();
        let mut k = Counter::default();
        let cfg = MeasureConfig::default();
        let e1 = evidence(&world, &mut k, &["Pr1(en1, en2)"]);
        let mut total = BigRational::zero();
        for mask in 0..16u32 {
            let lits: Vec<String> = (1..=4)
                .map(|v| {
                    let name = world.atoms().label(v, world.signature()).unwrap();
                    if mask >> (v - 1) & 1 == 1 {
                        name
                    } else {
                        format!("~{name}")
                    }
                })
                .collect();
            let st = parse(&world, &lits.join(" & "));
            total += confirmation(&st, &e1, &world, &mut k, &cfg).unwrap().as_rational().clone();
        }
        assert!(total.is_one());
    }

    #[test]
    fn entailment_gives_certainty() {
        let world = world16();
        let mut k = Counter::default();
        let cfg = MeasureConfig::default();
        let e2 = evidence(&world, &mut k, &["Pr1(en1, en2) & Pr1(en2, en1)"]);
        let implied = parse(&world, "Pr1(en1, en2)");
        assert!(confirmation(&implied, &e2, &world, &mut k, &cfg).unwrap().is_one());
        assert!(cont(&implied, &e2, &world, &mut k, &cfg).unwrap().is_zero());
    }

    #[test]
    fn existential_duality() {
        let world = world16();
        let mut k = Counter::default();
        let cfg = MeasureConfig::default();
        let e1 = evidence(&world, &mut k, &["Pr1(en1, en2)"]);
        for (ex, all_neg) in [
            ("exists x. Pr1(x, x)", "forall x. ~Pr1(x, x)"),
            ("exists x. Pr1(x, en2)", "forall x. ~Pr1(x, en2)"),
            ("exists x. exists y. Pr1(x, y)", "forall x. forall y. ~Pr1(x, y)"),
        ] {
            let c_ex = confirmation(&parse(&world, ex), &e1, &world, &mut k, &cfg).unwrap();
            let c_all =
                confirmation(&parse(&world, all_neg), &e1, &world, &mut k, &cfg).unwrap();
            assert_eq!(c_ex, c_all.complement(), "{ex}");
        }
    }

    #[test]
    fn inconsistent_evidence_is_rejected() {
        let world = world16();
        let mut k = Counter::default();
        let p = parse(&world, "Pr1(en1, en2)");
        let not_p = parse(&world, "~Pr1(en1, en2)");
        let err = Evidence::new(&world, &mut k, vec![p.clone(), not_p]);
        assert!(matches!(err, Err(SemanticsError::InconsistentEvidence)));
        // try_extended leaves the original intact.
        let e = Evidence::new(&world, &mut k, vec![p]).unwrap();
        let bad = parse(&world, "~Pr1(en1, en2)");
        assert!(e.try_extended(&world, &mut k, bad).is_err());
        assert_eq!(e.count(), &ModelCount::from(8));
    }

    #[test]
    fn non_uniform_measure_is_refused() {
        let world = world16();
        let mut k = Counter::default();
        let cfg = MeasureConfig { lambda: LambdaRule::Fixed(BigRational::one()) };
        let e = Evidence::empty(&world);
        let m = parse(&world, "Pr1(en1, en2)");
        assert!(matches!(
            confirmation(&m, &e, &world, &mut k, &cfg),
            Err(SemanticsError::UnsupportedMeasure)
        ));
    }

    #[test]
    fn predictive_closed_form() {
        let w16 = BigUint::from(16u32);
        let lam16 = BigRational::from(BigInt::from(16));
        let p = predictive(0, 0, &w16, &lam16).unwrap();
        assert_eq!(p, Probability::from_counts(&1.into(), &16.into()).unwrap());

        let w4 = BigUint::from(4u32);
        let lam4 = BigRational::from(BigInt::from(4));
        let p = predictive(4, 3, &w4, &lam4).unwrap();
        assert_eq!(p, Probability::from_counts(&1.into(), &2.into()).unwrap());

        // Empiricist limit: λ = 0 trusts frequencies alone.
        let p = predictive(7, 7, &w4, &BigRational::zero()).unwrap();
        assert!(p.is_one());

        assert!(predictive(1, 2, &w4, &lam4).is_err());
        assert!(predictive(0, 0, &BigUint::zero(), &lam4).is_err());
        assert!(predictive(0, 0, &w4, &BigRational::zero()).is_err());
        assert!(predictive(0, 0, &w4, &-BigRational::one()).is_err());
    }

    #[test]
    fn uncertainty_reduction_endpoints_and_midpoint() {
        // Monadic P, Q over a, b: atoms P(a)=1 P(b)=2 Q(a)=3 Q(b)=4.
        let world = World::new(
            Signature::new(
                vec![("P".into(), 1), ("Q".into(), 1)],
                vec!["a".into(), "b".into()],
            )
            .unwrap(),
        );
        let mut k = Counter::default();
        let full = evidence(&world, &mut k, &["P(a)", "P(a) & Q(a)", "Q(b)", "~P(b)"]);
        assert_eq!(full.count(), &ModelCount::one());

        let none = Evidence::empty(&world);
        assert_eq!(uncertainty_reduction(&none, &full).unwrap(), 0.0);
        assert_eq!(uncertainty_reduction(&full, &full).unwrap(), 100.0);

        let half = evidence(&world, &mut k, &["P(a) & Q(a)"]);
        assert_eq!(uncertainty_reduction(&half, &full).unwrap(), 50.0);

        // Monotone in evidence extension.
        let more = half
            .try_extended(&world, &mut k, parse(&world, "Q(b)"))
            .unwrap();
        assert!(
            uncertainty_reduction(&more, &full).unwrap()
                >= uncertainty_reduction(&half, &full).unwrap()
        );

        // Degenerate: full evidence that eliminates nothing.
        let vacuous = evidence(&world, &mut k, &["P(a) | ~P(a)"]);
        assert!(matches!(
            uncertainty_reduction(&none, &vacuous),
            Err(SemanticsError::DegenerateMetric)
        ));
    }
}
