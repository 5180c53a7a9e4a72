//! Greedy selection of maximally informative sentences under a budget.
//!
//! Each round scores every remaining candidate by its conditional
//! confirmation `c(e_i | O)` given the already-transmitted set `O` and
//! picks the minimum — equivalently, the maximum cont-information. Ties
//! break toward fewer encoded bits, then the lower original index. When
//! every remaining candidate is already entailed (`c = 1`), selection
//! reports that no information remains instead of picking arbitrarily.
//! Baselines: seeded uniform random selection and send-everything.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::codec::{Bits, CodeTable, CodecError, TokenDictionary};
use crate::counter::{Counter, ModelCount};
use crate::fol::{FolError, Formula, World};
use crate::semantics::{Evidence, Probability, SemanticsError};

#[derive(Debug, Error)]
pub enum EncoderError {
    #[error("{0}")]
    Semantics(#[from] SemanticsError),
    #[error("{0}")]
    Codec(#[from] CodecError),
    #[error("{0}")]
    Fol(#[from] FolError),
}

/// Transmission budget: a number of sentences or a bit ceiling. In bit
/// mode the transcript stops before the first message that would overflow;
/// sentences are never split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Budget {
    Sentences(usize),
    Bits(u64),
}

/// Why a transcript ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    BudgetExhausted,
    NoInformationRemains,
    CandidatesExhausted,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::BudgetExhausted => "budget-exhausted",
            StopReason::NoInformationRemains => "no-information-remains",
            StopReason::CandidatesExhausted => "candidates-exhausted",
        }
    }
}

/// One transmitted sentence with its cost and the conditional probability
/// it had at selection time.
#[derive(Debug, Clone)]
pub struct Message {
    pub sentence_index: usize,
    pub formula: Formula,
    pub payload: Bits,
    pub bit_len: u64,
    pub conditional: Probability,
}

/// One candidate's scoring record for one round.
#[derive(Debug, Clone)]
pub struct CandidateAudit {
    pub round: usize,
    pub sentence_index: usize,
    pub joint_count: ModelCount,
    pub given_count: ModelCount,
    pub conditional: Probability,
    pub bit_len: u64,
    pub chosen: bool,
}

/// An ordered, fully accounted transmission.
#[derive(Debug, Clone)]
pub struct Transcript {
    pub messages: Vec<Message>,
    pub stop: StopReason,
    pub audit: Vec<CandidateAudit>,
    pub total_bits: u64,
}

/// Outcome of one greedy round.
#[derive(Debug, Clone)]
pub enum Selection {
    Chosen(Message),
    NoInformationRemains,
}

/// Incremental selection state over one evidence set.
pub struct Selector<'a> {
    world: &'a World,
    counter: &'a mut Counter,
    full: &'a Evidence,
    received: Evidence,
    remaining: Vec<usize>,
    payloads: Vec<Bits>,
    costs: Vec<u64>,
    audit: Vec<CandidateAudit>,
    round: usize,
}

impl<'a> Selector<'a> {
    pub fn new(
        world: &'a World,
        counter: &'a mut Counter,
        full: &'a Evidence,
        dict: &TokenDictionary,
        table: &CodeTable,
    ) -> Result<Selector<'a>, EncoderError> {
        let mut payloads = Vec::with_capacity(full.len());
        let mut costs = Vec::with_capacity(full.len());
        for f in full.sentences() {
            let ids = dict.tokenize(f, world.signature())?;
            payloads.push(table.encode(&ids)?);
            costs.push(table.cost_bits(&ids)?);
        }
        Ok(Selector {
            world,
            counter,
            full,
            received: Evidence::empty(world),
            remaining: (0..full.len()).collect(),
            payloads,
            costs,
            audit: Vec::new(),
            round: 0,
        })
    }

    /// The evidence accumulated from chosen sentences so far.
    pub fn received(&self) -> &Evidence {
        &self.received
    }

    pub fn remaining(&self) -> usize {
        self.remaining.len()
    }

    /// Scores every remaining candidate and picks the argmin conditional;
    /// ties break by (bit cost, original index). Requires at least one
    /// remaining candidate.
    pub fn select_next(&mut self) -> Result<Selection, EncoderError> {
        assert!(!self.remaining.is_empty(), "select_next with no candidates");
        self.round += 1;
        let given_count = self.received.count().clone();
        let mut best: Option<(Probability, u64, usize)> = None;
        let round_start = self.audit.len();
        for &i in &self.remaining {
            let joint = self.received.conjunction().conjoin(self.full.instance(i))?;
            let joint_count = self.counter.count(&joint).map_err(SemanticsError::from)?;
            let conditional = Probability::from_counts(&joint_count, &given_count)
                .map_err(EncoderError::Semantics)?;
            self.audit.push(CandidateAudit {
                round: self.round,
                sentence_index: i,
                joint_count,
                given_count: given_count.clone(),
                conditional: conditional.clone(),
                bit_len: self.costs[i],
                chosen: false,
            });
            let key = (conditional, self.costs[i], i);
            if best.as_ref().is_none_or(|b| key < *b) {
                best = Some(key);
            }
        }
        let (conditional, bit_len, index) = best.expect("nonempty candidates were scored");
        if conditional.is_one() {
            return Ok(Selection::NoInformationRemains);
        }
        for row in &mut self.audit[round_start..] {
            row.chosen = row.sentence_index == index;
        }
        self.advance(index)?;
        Ok(Selection::Chosen(Message {
            sentence_index: index,
            formula: self.full.sentences()[index].clone(),
            payload: self.payloads[index].clone(),
            bit_len,
            conditional,
        }))
    }

    /// Transmits a specific candidate (the random and send-all baselines),
    /// recording its conditional for the audit trail.
    fn take(&mut self, index: usize) -> Result<Message, EncoderError> {
        self.round += 1;
        let joint = self.received.conjunction().conjoin(self.full.instance(index))?;
        let joint_count = self.counter.count(&joint).map_err(SemanticsError::from)?;
        let conditional = Probability::from_counts(&joint_count, self.received.count())?;
        self.audit.push(CandidateAudit {
            round: self.round,
            sentence_index: index,
            joint_count,
            given_count: self.received.count().clone(),
            conditional: conditional.clone(),
            bit_len: self.costs[index],
            chosen: true,
        });
        self.advance(index)?;
        Ok(Message {
            sentence_index: index,
            formula: self.full.sentences()[index].clone(),
            payload: self.payloads[index].clone(),
            bit_len: self.costs[index],
            conditional,
        })
    }

    fn advance(&mut self, index: usize) -> Result<(), EncoderError> {
        self.received = self.received.try_extended(
            self.world,
            self.counter,
            self.full.sentences()[index].clone(),
        )?;
        self.remaining.retain(|&r| r != index);
        Ok(())
    }

    fn finish(self, messages: Vec<Message>, stop: StopReason) -> Transcript {
        let total_bits = messages.iter().map(|m| m.bit_len).sum();
        Transcript { messages, stop, audit: self.audit, total_bits }
    }
}

fn within_budget(budget: Budget, sent: usize, total_bits: u64, next_bits: u64) -> bool {
    match budget {
        Budget::Sentences(k) => sent < k,
        Budget::Bits(b) => total_bits + next_bits <= b,
    }
}

/// Runs greedy selection until the budget is exhausted, candidates run
/// out, or no information remains. Empty evidence yields an empty
/// transcript.
pub fn run(
    world: &World,
    counter: &mut Counter,
    evidence: &Evidence,
    dict: &TokenDictionary,
    table: &CodeTable,
    budget: Budget,
) -> Result<Transcript, EncoderError> {
    let mut sel = Selector::new(world, counter, evidence, dict, table)?;
    let mut messages = Vec::new();
    loop {
        if sel.remaining.is_empty() {
            return Ok(sel.finish(messages, StopReason::CandidatesExhausted));
        }
        if let Budget::Sentences(k) = budget {
            if messages.len() >= k {
                return Ok(sel.finish(messages, StopReason::BudgetExhausted));
            }
        }
        let total: u64 = messages.iter().map(|m| m.bit_len).sum();
        match sel.select_next()? {
            Selection::NoInformationRemains => {
                return Ok(sel.finish(messages, StopReason::NoInformationRemains));
            }
            Selection::Chosen(msg) => {
                if !within_budget(budget, messages.len(), total, msg.bit_len) {
                    // The pick would overflow a bit budget; sentences are
                    // atomic, so the transcript ends here.
                    return Ok(sel.finish(messages, StopReason::BudgetExhausted));
                }
                messages.push(msg);
            }
        }
    }
}

/// Seeded uniform random baseline: samples sentences without replacement,
/// in sampled order, under the same budget rules. A sentence budget larger
/// than the corpus sends everything.
pub fn select_random(
    world: &World,
    counter: &mut Counter,
    evidence: &Evidence,
    dict: &TokenDictionary,
    table: &CodeTable,
    budget: Budget,
    seed: u64,
) -> Result<Transcript, EncoderError> {
    let mut order: Vec<usize> = (0..evidence.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut sel = Selector::new(world, counter, evidence, dict, table)?;
    let mut messages: Vec<Message> = Vec::new();
    let mut stop = StopReason::CandidatesExhausted;
    for index in order {
        if !within_budget(
            budget,
            messages.len(),
            messages.iter().map(|m| m.bit_len).sum(),
            sel.costs[index],
        ) {
            stop = StopReason::BudgetExhausted;
            break;
        }
        messages.push(sel.take(index)?);
    }
    Ok(sel.finish(messages, stop))
}

/// Sends every sentence in corpus order, ignoring budgets: the
/// full-transmission reference.
pub fn select_all(
    world: &World,
    counter: &mut Counter,
    evidence: &Evidence,
    dict: &TokenDictionary,
    table: &CodeTable,
) -> Result<Transcript, EncoderError> {
    let mut sel = Selector::new(world, counter, evidence, dict, table)?;
    let mut messages = Vec::new();
    for index in 0..evidence.len() {
        messages.push(sel.take(index)?);
    }
    Ok(sel.finish(messages, StopReason::CandidatesExhausted))
}
