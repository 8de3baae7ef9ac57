use serde::{Deserialize, Serialize};

use crate::oracle::Queryable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Accept,
    Reject,
}

impl Decision {
    pub fn is_accept(self) -> bool {
        self == Decision::Accept
    }
}

/// Why a tester rejected (or, for bucket searches, what it found).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub stage: String,
    pub round: Option<u64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TesterVerdict {
    pub decision: Decision,
    /// Raw-function queries made during the call.
    pub queries_used: u64,
    pub rounds: u64,
    pub witness: Option<Witness>,
}

impl TesterVerdict {
    pub fn is_accept(&self) -> bool {
        self.decision.is_accept()
    }
}

/// Tracks the query counter and the number of executed rounds while a
/// tester runs.
pub(crate) struct Run {
    start: u64,
    pub rounds: u64,
}

impl Run {
    pub fn start<Q: Queryable + ?Sized>(oracle: &Q) -> Self {
        Self { start: oracle.query_count(), rounds: 0 }
    }

    pub fn accept<Q: Queryable + ?Sized>(self, oracle: &Q) -> TesterVerdict {
        TesterVerdict {
            decision: Decision::Accept,
            queries_used: oracle.query_count() - self.start,
            rounds: self.rounds,
            witness: None,
        }
    }

    pub fn reject<Q: Queryable + ?Sized>(
        self,
        oracle: &Q,
        stage: &str,
        detail: String,
    ) -> TesterVerdict {
        TesterVerdict {
            decision: Decision::Reject,
            queries_used: oracle.query_count() - self.start,
            rounds: self.rounds,
            witness: Some(Witness { stage: stage.into(), round: Some(self.rounds), detail }),
        }
    }

    /// Folds a sub-tester's verdict into this run: rounds add up, and a
    /// rejection is passed through with the total query count.
    pub fn absorb<Q: Queryable + ?Sized>(
        &mut self,
        oracle: &Q,
        sub: TesterVerdict,
    ) -> Option<TesterVerdict> {
        self.rounds += sub.rounds;
        match sub.decision {
            Decision::Accept => None,
            Decision::Reject => Some(TesterVerdict {
                decision: Decision::Reject,
                queries_used: oracle.query_count() - self.start,
                rounds: self.rounds,
                witness: sub.witness,
            }),
        }
    }
}
