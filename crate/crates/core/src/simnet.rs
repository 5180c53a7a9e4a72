//! Point-to-point simulation: a transmitter selects and encodes sentences,
//! a receiver decodes them, narrows its belief, and deduces a hypothesis.
//!
//! The channel is lossless and ordered; the receiver's perception is the
//! set of states consistent with the decoded messages, tracked as
//! [`Evidence`]. The deduction target is a
//! hypothesis set that is mutually exclusive and jointly exhaustive per
//! entity; the receiver picks the hypothesis best confirmed by what it has
//! heard, and accuracy is judged per entity against the transmitter's full
//! evidence.

use thiserror::Error;

use crate::codec::{decode_sentence, CodeTable, CodecError, TokenDictionary};
use crate::counter::{Counter, CounterError, ModelCount};
use crate::encoder::{self, Budget, EncoderError, Transcript};
use crate::fol::{substitute, CnfInstance, FolError, Formula, World};
use crate::semantics::{uncertainty_reduction, Evidence, Probability, SemanticsError};

#[derive(Debug, Error)]
pub enum SimnetError {
    #[error("message {index} is inconsistent with the receiver's belief")]
    ProtocolViolation { index: usize },
    #[error("hypothesis set is empty")]
    EmptyHypothesisSet,
    #[error("{0}")]
    Encoder(#[from] EncoderError),
    #[error("{0}")]
    Semantics(#[from] SemanticsError),
    #[error("{0}")]
    Codec(#[from] CodecError),
    #[error("{0}")]
    Counter(#[from] CounterError),
    #[error("{0}")]
    Fol(#[from] FolError),
}

/// How the transmitter picks sentences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionMode {
    Scld,
    Random,
    All,
}

impl SelectionMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SelectionMode::Scld => "scld",
            SelectionMode::Random => "random",
            SelectionMode::All => "all",
        }
    }
}

/// The sending side: full evidence plus the shared codec handles.
pub struct TransmitterNode<'a> {
    world: &'a World,
    evidence: &'a Evidence,
    dict: &'a TokenDictionary,
    table: &'a CodeTable,
}

impl<'a> TransmitterNode<'a> {
    pub fn new(
        world: &'a World,
        evidence: &'a Evidence,
        dict: &'a TokenDictionary,
        table: &'a CodeTable,
    ) -> TransmitterNode<'a> {
        TransmitterNode { world, evidence, dict, table }
    }

    pub fn evidence(&self) -> &Evidence {
        self.evidence
    }

    /// Produces the transcript for a mode. `All` ignores the budget; the
    /// seed only matters for `Random`.
    pub fn transmit(
        &self,
        counter: &mut Counter,
        mode: SelectionMode,
        budget: Budget,
        seed: u64,
    ) -> Result<Transcript, SimnetError> {
        let t = match mode {
            SelectionMode::Scld => encoder::run(
                self.world,
                counter,
                self.evidence,
                self.dict,
                self.table,
                budget,
            )?,
            SelectionMode::Random => encoder::select_random(
                self.world,
                counter,
                self.evidence,
                self.dict,
                self.table,
                budget,
                seed,
            )?,
            SelectionMode::All => {
                encoder::select_all(self.world, counter, self.evidence, self.dict, self.table)?
            }
        };
        Ok(t)
    }
}

/// The receiving side: starts at the uniform prior (no messages) and
/// narrows monotonically as messages decode.
pub struct ReceiverBelief<'a> {
    world: &'a World,
    dict: &'a TokenDictionary,
    table: &'a CodeTable,
    received: Evidence,
}

impl<'a> ReceiverBelief<'a> {
    pub fn new(
        world: &'a World,
        dict: &'a TokenDictionary,
        table: &'a CodeTable,
    ) -> ReceiverBelief<'a> {
        ReceiverBelief { world, dict, table, received: Evidence::empty(world) }
    }

    pub fn evidence(&self) -> &Evidence {
        &self.received
    }

    /// States still possible under everything heard so far.
    pub fn count(&self) -> &ModelCount {
        self.received.count()
    }

    /// Incorporates an already-decoded sentence. A message that empties
    /// the state space breaks the protocol (a correct transmitter working
    /// from satisfiable evidence cannot send one).
    pub fn update(&mut self, counter: &mut Counter, msg: Formula) -> Result<(), SimnetError> {
        let index = self.received.len();
        match self.received.try_extended(self.world, counter, msg) {
            Ok(next) => {
                self.received = next;
                Ok(())
            }
            Err(SemanticsError::InconsistentEvidence) => {
                Err(SimnetError::ProtocolViolation { index })
            }
            Err(e) => Err(e.into()),
        }
    }

    /// Decodes a payload with the shared table and updates.
    pub fn receive(
        &mut self,
        counter: &mut Counter,
        payload: &crate::codec::Bits,
    ) -> Result<Formula, SimnetError> {
        let msg = decode_sentence(payload, self.world.signature(), self.dict, self.table)?;
        self.update(counter, msg.clone())?;
        Ok(msg)
    }
}

/// A hypothesis as written plus its per-entity reading.
///
/// A hypothesis whose top level is a single universal quantifier is a
/// per-entity template: its body instantiates to one claim per entity.
/// Anything else is closed and scores the whole population at once.
#[derive(Debug, Clone)]
enum HypothesisForm {
    Template { var: u32, body: Formula },
    Closed,
}

#[derive(Debug, Clone)]
struct CompiledHypothesis {
    formula: Formula,
    form: HypothesisForm,
    /// Grounded whole-sentence clauses, for confirmation scoring.
    whole: CnfInstance,
    /// Per-entity instance and negated instance, for accuracy and
    /// validity. Closed hypotheses repeat the whole sentence per entity.
    instances: Vec<(CnfInstance, CnfInstance)>,
}

/// A mutually exclusive, jointly exhaustive candidate set.
///
/// Validity is checked per entity: for each entity, the instantiated
/// hypotheses must be pairwise contradictory and their counts must sum to
/// `2^V`. (A set of universal templates can never partition the state
/// space as whole sentences once there is more than one entity; the
/// per-entity reading is the one the deduction task needs.) An invalid set
/// is still usable — the defect is reported, not fatal.
#[derive(Debug, Clone)]
pub struct HypothesisSet {
    compiled: Vec<CompiledHypothesis>,
    validity: Option<String>,
}

impl HypothesisSet {
    pub fn new(
        world: &World,
        counter: &mut Counter,
        hypotheses: Vec<Formula>,
    ) -> Result<HypothesisSet, SimnetError> {
        if hypotheses.is_empty() {
            return Err(SimnetError::EmptyHypothesisSet);
        }
        let entity_count = world.signature().entities().len() as u32;
        let mut compiled = Vec::with_capacity(hypotheses.len());
        for formula in hypotheses {
            let form = match &formula {
                Formula::ForAll(var, body) => {
                    HypothesisForm::Template { var: *var, body: (**body).clone() }
                }
                _ => HypothesisForm::Closed,
            };
            let whole = world.compile(&formula);
            let instances = (0..entity_count)
                .map(|e| {
                    let inst = match &form {
                        HypothesisForm::Template { var, body } => {
                            substitute(body, *var, crate::fol::EntityId(e))
                        }
                        HypothesisForm::Closed => formula.clone(),
                    };
                    let negated = Formula::not(inst.clone());
                    (world.compile(&inst), world.compile(&negated))
                })
                .collect();
            compiled.push(CompiledHypothesis { formula, form, whole, instances });
        }
        let validity = check_validity(world, counter, &compiled)?;
        Ok(HypothesisSet { compiled, validity })
    }

    pub fn len(&self) -> usize {
        self.compiled.len()
    }

    pub fn is_empty(&self) -> bool {
        self.compiled.is_empty()
    }

    pub fn formula(&self, i: usize) -> &Formula {
        &self.compiled[i].formula
    }

    pub fn is_template(&self, i: usize) -> bool {
        matches!(self.compiled[i].form, HypothesisForm::Template { .. })
    }

    /// `None` when the set is exclusive and exhaustive for every entity,
    /// otherwise a description of the first defect found.
    pub fn validity(&self) -> Option<&str> {
        self.validity.as_deref()
    }
}

/// Per-entity exclusivity and exhaustiveness by counting.
fn check_validity(
    world: &World,
    counter: &mut Counter,
    compiled: &[CompiledHypothesis],
) -> Result<Option<String>, SimnetError> {
    let v = world.var_count();
    let space = ModelCount::pow2(v as u64);
    for e in 0..world.signature().entities().len() {
        let name = &world.signature().entities()[e];
        let mut total = ModelCount::zero();
        for (i, h) in compiled.iter().enumerate() {
            let count = counter.count(&h.instances[e].0)?;
            total = ModelCount::from(total.as_biguint() + count.as_biguint());
            for (j, other) in compiled.iter().enumerate().skip(i + 1) {
                let overlap = h.instances[e].0.conjoin(&other.instances[e].0)?;
                if !counter.count(&overlap)?.is_zero() {
                    return Ok(Some(format!(
                        "hypotheses {i} and {j} overlap for entity {name}"
                    )));
                }
            }
        }
        if total != space {
            return Ok(Some(format!(
                "hypothesis counts for entity {name} sum to {total}, not 2^{v}"
            )));
        }
    }
    Ok(None)
}

/// The receiver's pick: the hypothesis index with maximal confirmation
/// given the heard evidence, ties to the lowest index.
#[derive(Debug, Clone)]
pub struct HypothesisChoice {
    pub index: usize,
    pub confirmation: Probability,
}

pub fn choose_hypothesis(
    belief: &Evidence,
    set: &HypothesisSet,
    counter: &mut Counter,
) -> Result<HypothesisChoice, SimnetError> {
    let mut best: Option<HypothesisChoice> = None;
    for (index, h) in set.compiled.iter().enumerate() {
        let joint = belief.conjunction().conjoin(&h.whole)?;
        let joint_count = counter.count(&joint)?;
        let confirmation = Probability::from_counts(&joint_count, belief.count())?;
        let better = match &best {
            None => true,
            Some(b) => confirmation > b.confirmation,
        };
        if better {
            best = Some(HypothesisChoice { index, confirmation });
        }
    }
    best.ok_or(SimnetError::EmptyHypothesisSet)
}

/// Outcome of one deduction task.
#[derive(Debug, Clone)]
pub struct TaskResult {
    pub chosen: usize,
    pub confirmation: Probability,
    /// Entity-wise: does the transmitter's evidence entail the chosen
    /// hypothesis's claim about that entity?
    pub per_entity: Vec<bool>,
    pub accuracy: f64,
    pub messages_used: usize,
    pub bits_used: u64,
}

/// Scores a chosen hypothesis against the transmitter's full evidence:
/// an entity counts as correct when the evidence entails the instantiated
/// claim (consistency alone would let vacuous hypotheses score perfectly).
/// Closed hypotheses score all entities 0 or 1 together.
pub fn evaluate_accuracy(
    chosen: usize,
    set: &HypothesisSet,
    transmitter_evidence: &Evidence,
    counter: &mut Counter,
) -> Result<(Vec<bool>, f64), SimnetError> {
    let h = &set.compiled[chosen];
    let per_entity: Vec<bool> = h
        .instances
        .iter()
        .map(|(_, negated)| {
            let witness = transmitter_evidence.conjunction().conjoin(negated)?;
            Ok(counter.count(&witness)?.is_zero())
        })
        .collect::<Result<_, SimnetError>>()?;
    let accuracy =
        per_entity.iter().filter(|&&c| c).count() as f64 / per_entity.len() as f64;
    Ok((per_entity, accuracy))
}

/// One point on the convergence curve: belief state after a prefix of the
/// transcript.
#[derive(Debug, Clone)]
pub struct CurvePoint {
    pub messages: usize,
    pub bits: u64,
    pub receiver_count: ModelCount,
    pub reduction_pct: f64,
    pub chosen: Option<usize>,
    pub accuracy: Option<f64>,
}

/// Replays a transcript prefix by prefix through a fresh receiver,
/// recording uncertainty reduction and (when a hypothesis set is at hand)
/// the deduction outcome at every message count.
pub fn convergence_probe(
    world: &World,
    counter: &mut Counter,
    transmitter_evidence: &Evidence,
    set: Option<&HypothesisSet>,
    dict: &TokenDictionary,
    table: &CodeTable,
    transcript: &Transcript,
) -> Result<Vec<CurvePoint>, SimnetError> {
    let mut rx = ReceiverBelief::new(world, dict, table);
    let mut points = Vec::with_capacity(transcript.messages.len() + 1);
    let mut bits = 0u64;
    for step in 0..=transcript.messages.len() {
        if step > 0 {
            let msg = &transcript.messages[step - 1];
            let decoded = rx.receive(counter, &msg.payload)?;
            debug_assert_eq!(&decoded, &msg.formula, "lossless channel");
            bits += msg.bit_len;
        }
        let reduction_pct = uncertainty_reduction(rx.evidence(), transmitter_evidence)?;
        let (chosen, accuracy) = match set {
            Some(set) => {
                let choice = choose_hypothesis(rx.evidence(), set, counter)?;
                let (_, acc) =
                    evaluate_accuracy(choice.index, set, transmitter_evidence, counter)?;
                (Some(choice.index), Some(acc))
            }
            None => (None, None),
        };
        points.push(CurvePoint {
            messages: step,
            bits,
            receiver_count: rx.count().clone(),
            reduction_pct,
            chosen,
            accuracy,
        });
    }
    Ok(points)
}

/// A full simulation: transcript, final belief, convergence curve, and
/// (with hypotheses) the task result.
#[derive(Debug, Clone)]
pub struct SimulationRun {
    pub mode: SelectionMode,
    pub transcript: Transcript,
    pub receiver_count: ModelCount,
    pub reduction_pct: f64,
    pub curve: Vec<CurvePoint>,
    pub task: Option<TaskResult>,
}

/// Transmits under `mode`/`budget`, replays the transcript at the
/// receiver, and scores the deduction task if hypotheses are present.
pub fn simulate(
    world: &World,
    counter: &mut Counter,
    evidence: &Evidence,
    set: Option<&HypothesisSet>,
    dict: &TokenDictionary,
    table: &CodeTable,
    mode: SelectionMode,
    budget: Budget,
    seed: u64,
) -> Result<SimulationRun, SimnetError> {
    let tx = TransmitterNode::new(world, evidence, dict, table);
    let transcript = tx.transmit(counter, mode, budget, seed)?;
    let curve = convergence_probe(world, counter, evidence, set, dict, table, &transcript)?;
    let last = curve.last().expect("curve always has the prior point");
    let task = match (set, last.chosen) {
        (Some(set), Some(chosen)) => {
            let choice = HypothesisChoice {
                index: chosen,
                confirmation: {
                    // Recompute at the final belief for the report.
                    let mut rx = Evidence::empty(world);
                    for m in &transcript.messages {
                        rx = rx.try_extended(world, counter, m.formula.clone())?;
                    }
                    choose_hypothesis(&rx, set, counter)?.confirmation
                },
            };
            let (per_entity, accuracy) =
                evaluate_accuracy(choice.index, set, evidence, counter)?;
            Some(TaskResult {
                chosen: choice.index,
                confirmation: choice.confirmation,
                per_entity,
                accuracy,
                messages_used: transcript.messages.len(),
                bits_used: transcript.total_bits,
            })
        }
        _ => None,
    };
    Ok(SimulationRun {
        mode,
        transcript,
        receiver_count: last.receiver_count.clone(),
        reduction_pct: last.reduction_pct,
        curve,
        task,
    })
}
