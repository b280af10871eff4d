//! The five source-sink selection rules.
//!
//! Each rule ranks the profitable candidates of one supply agent by its
//! primary criterion, then by the shared tie-break keys: shorter total
//! distance, earlier start year, mode order (pipeline, rail, water),
//! smaller demand id, and finally entry and exit node ids so that distinct
//! route versions never tie.

use std::cmp::Ordering;

use crate::econ::{evaluate_connection, ConnectionEvaluation};
use crate::error::EconError;
use crate::geo::Candidate;
use crate::model::{Algorithm, DemandAgent, EconomicParams, SupplyAgent};

#[derive(Debug, Clone, PartialEq)]
pub enum MatchDecision {
    /// Start the chosen connection this year.
    Connect(ConnectionEvaluation),
    /// A look-ahead rule prefers a connection that starts in a later year.
    Defer {
        until: i32,
        choice: ConnectionEvaluation,
    },
    /// A first-year rule found nothing startable now; the earliest
    /// profitable start lies in a later year. The rule fires again then.
    Wait { first_profitable_year: i32 },
    /// No profitable candidate anywhere in the window.
    NoMatch,
}

impl MatchDecision {
    pub fn choice(&self) -> Option<&ConnectionEvaluation> {
        match self {
            MatchDecision::Connect(e) | MatchDecision::Defer { choice: e, .. } => Some(e),
            _ => None,
        }
    }

    pub fn is_match(&self) -> bool {
        !matches!(self, MatchDecision::NoMatch)
    }
}

fn primary(algorithm: Algorithm, a: &ConnectionEvaluation, b: &ConnectionEvaluation) -> Ordering {
    match algorithm {
        Algorithm::Mpfy | Algorithm::Mpay => b.supply_profit.total_cmp(&a.supply_profit),
        Algorithm::Sdfy | Algorithm::Sday => a.total_distance.total_cmp(&b.total_distance),
        Algorithm::Acay => a.ac_distance.total_cmp(&b.ac_distance),
    }
}

/// Total preference order of `algorithm`: `Less` means `a` is preferred.
pub fn preference(algorithm: Algorithm, a: &ConnectionEvaluation, b: &ConnectionEvaluation) -> Ordering {
    primary(algorithm, a, b)
        .then_with(|| a.total_distance.total_cmp(&b.total_distance))
        .then_with(|| a.start_year.cmp(&b.start_year))
        .then_with(|| a.route.mode.cmp(&b.route.mode))
        .then_with(|| a.route.demand_id.cmp(&b.route.demand_id))
        .then_with(|| a.route.entry_node.cmp(&b.route.entry_node))
        .then_with(|| a.route.exit_node.cmp(&b.route.exit_node))
}

fn best<'a>(
    algorithm: Algorithm,
    it: impl Iterator<Item = &'a ConnectionEvaluation>,
) -> Option<&'a ConnectionEvaluation> {
    it.min_by(|a, b| preference(algorithm, a, b))
}

/// Chooses among evaluated candidates, each evaluated at its earliest
/// feasible start year within `[current_year, last admission year]`.
pub fn select(candidates: &[ConnectionEvaluation], current_year: i32, algorithm: Algorithm) -> MatchDecision {
    let profitable = || candidates.iter().filter(|e| e.profitable);
    let Some(first_year) = profitable().map(|e| e.start_year).min() else {
        return MatchDecision::NoMatch;
    };
    if !algorithm.looks_ahead() {
        return match best(algorithm, profitable().filter(|e| e.start_year <= current_year)) {
            Some(e) => MatchDecision::Connect(e.clone()),
            None => MatchDecision::Wait {
                first_profitable_year: first_year,
            },
        };
    }
    let choice = best(algorithm, profitable()).expect("nonempty profitable set");
    if choice.start_year <= current_year {
        MatchDecision::Connect(choice.clone())
    } else {
        MatchDecision::Defer {
            until: choice.start_year,
            choice: choice.clone(),
        }
    }
}

/// Evaluates each candidate at its earliest start. `sinks` must be the
/// slice the candidates were enumerated against.
pub fn evaluate_candidates(
    s: &SupplyAgent,
    sinks: &[DemandAgent],
    candidates: &[Candidate],
    params: &EconomicParams,
) -> Result<Vec<ConnectionEvaluation>, EconError> {
    candidates
        .iter()
        .map(|c| evaluate_connection(s, &sinks[c.sink], &c.route, c.earliest_start, params))
        .collect()
}
