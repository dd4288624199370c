use std::collections::BTreeSet;

use super::time::SimTime;
use super::SimError;
use crate::proto::{max_crashes, ReplicaId};

/// Replicas to crash, with the time each one stops.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FaultPlan {
    pub crashes: Vec<(ReplicaId, SimTime)>,
}

impl FaultPlan {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn crash(mut self, replica: ReplicaId, at: SimTime) -> Self {
        self.crashes.push((replica, at));
        self
    }

    /// At most `⌊(n-1)/2⌋` distinct replicas, all of them in `0..n`.
    pub fn validate(&self, replicas: usize) -> Result<(), SimError> {
        let mut distinct = BTreeSet::new();
        for &(r, _) in &self.crashes {
            if r.0 as usize >= replicas {
                return Err(SimError::Config(format!("crash target {r:?} outside 0..{replicas}")));
            }
            distinct.insert(r);
        }
        let allowed = max_crashes(replicas);
        if distinct.len() > allowed {
            return Err(SimError::MajorityCrash {
                requested: distinct.len(),
                allowed,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minority_is_accepted() {
        let plan = FaultPlan::none()
            .crash(ReplicaId(0), SimTime::ZERO)
            .crash(ReplicaId(4), SimTime::from_secs(1.0));
        assert!(plan.validate(5).is_ok());
    }

    #[test]
    fn third_crash_of_five_is_rejected() {
        let plan = FaultPlan::none()
            .crash(ReplicaId(0), SimTime::ZERO)
            .crash(ReplicaId(1), SimTime::ZERO)
            .crash(ReplicaId(2), SimTime::ZERO);
        assert_eq!(
            plan.validate(5),
            Err(SimError::MajorityCrash {
                requested: 3,
                allowed: 2
            })
        );
    }

    #[test]
    fn two_replicas_tolerate_no_crash() {
        let plan = FaultPlan::none().crash(ReplicaId(1), SimTime::ZERO);
        assert!(matches!(
            plan.validate(2),
            Err(SimError::MajorityCrash { allowed: 0, .. })
        ));
    }

    #[test]
    fn repeated_entries_count_once() {
        let plan = FaultPlan::none()
            .crash(ReplicaId(1), SimTime::ZERO)
            .crash(ReplicaId(1), SimTime::from_secs(2.0));
        assert!(plan.validate(3).is_ok());
    }
}
