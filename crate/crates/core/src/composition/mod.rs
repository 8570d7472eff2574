//! Strategies for many coins assembled from small ones.

pub mod corollary;
pub mod lemma2;
pub mod plan;

pub use corollary::{corollary1_tree, orientations, standard_pairs};
pub use lemma2::{lemma2_extend, lemma2_extend_detailed, FinisherCase, FinisherKind, Lemma2Extension};
pub use plan::{plan, run_plan, CompositePlan, PlanResult, PlanRunner, Stage, StageStrategy, Step, StepKind};
