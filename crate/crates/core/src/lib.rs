//! Lossy semantic communication for logical deduction over finite worlds.
//!
//! The pipeline: parse first-order sentences over a finite signature
//! ([`fol`]), ground quantifiers and clausify without changing model counts,
//! count models exactly ([`counter`]), turn counts into inductive
//! probabilities and cont-information ([`semantics`]), pick the most
//! informative sentences under a budget ([`encoder`]), entropy-code them
//! ([`codec`]), replay the exchange between a transmitter and a receiver
//! that deduces a hypothesis ([`simnet`]), and sweep all of it over story
//! files with seeds ([`experiment`]).

pub mod codec;
pub mod counter;
pub mod encoder;
pub mod fol;
pub mod semantics;
pub mod simnet;
pub mod experiment;
pub mod story;
pub mod synth;

pub use codec::{Bits, CodeTable, TokenDictionary};
pub use counter::{Counter, CounterConfig, ModelCount};
pub use encoder::{Budget, StopReason, Transcript};
pub use experiment::{ExperimentConfig, ExperimentReport};
pub use fol::{CnfConfig, CnfInstance, Formula, GroundAtomIndex, Signature, World};
pub use semantics::{Evidence, MeasureConfig, Probability};
pub use simnet::{HypothesisSet, ReceiverBelief, SelectionMode, SimulationRun, TaskResult, TransmitterNode};
pub use story::{CompiledStory, StoryFile};
