use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashSet};

use super::time::SimTime;
use super::SimError;

/// Posting-order sequence number; breaks ties between equal timestamps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventId(pub u64);

#[derive(Debug, Clone, PartialEq)]
pub struct Event<A> {
    pub at: SimTime,
    pub id: EventId,
    pub action: A,
}

struct Entry<A>(Event<A>);

impl<A> PartialEq for Entry<A> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<A> Eq for Entry<A> {}

impl<A> PartialOrd for Entry<A> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<A> Ord for Entry<A> {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.0.at, self.0.id).cmp(&(other.0.at, other.0.id))
    }
}

/// Budget for [`EventQueue::run_until`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RunLimit {
    /// Fire every event with `at <= t`, then advance the clock to `t`.
    Until(SimTime),
    /// Fire at most this many events.
    Events(usize),
}

/// Discrete-event queue ordered by `(time, posting sequence)`.
pub struct EventQueue<A> {
    heap: BinaryHeap<Reverse<Entry<A>>>,
    cancelled: HashSet<EventId>,
    now: SimTime,
    next_id: u64,
}

impl<A> Default for EventQueue<A> {
    fn default() -> Self {
        EventQueue {
            heap: BinaryHeap::new(),
            cancelled: HashSet::new(),
            now: SimTime::ZERO,
            next_id: 0,
        }
    }
}

impl<A> EventQueue<A> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    /// Number of live (not cancelled) events still queued.
    pub fn len(&self) -> usize {
        self.heap.len() - self.cancelled.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn post(&mut self, at: SimTime, action: A) -> Result<EventId, SimError> {
        if at < self.now {
            return Err(SimError::PastEvent { at, now: self.now });
        }
        let id = EventId(self.next_id);
        self.next_id += 1;
        self.heap.push(Reverse(Entry(Event { at, id, action })));
        Ok(id)
    }

    /// Cancels a queued event. Returns false if it already fired or was
    /// never posted.
    pub fn cancel(&mut self, id: EventId) -> bool {
        if id.0 >= self.next_id {
            return false;
        }
        let queued = self.heap.iter().any(|Reverse(e)| e.0.id == id);
        queued && self.cancelled.insert(id)
    }

    /// Pops the next event if it is due at or before `limit`, advancing the
    /// clock to its timestamp.
    pub fn pop_due(&mut self, limit: SimTime) -> Option<Event<A>> {
        loop {
            let Reverse(top) = self.heap.peek()?;
            if top.0.at > limit {
                return None;
            }
            let Reverse(Entry(ev)) = self.heap.pop().expect("peeked");
            if self.cancelled.remove(&ev.id) {
                continue;
            }
            self.now = ev.at;
            return Some(ev);
        }
    }

    /// Fires events in order and returns them.
    pub fn run_until(&mut self, limit: RunLimit) -> Vec<Event<A>> {
        let mut fired = Vec::new();
        match limit {
            RunLimit::Until(t_end) => {
                while let Some(ev) = self.pop_due(t_end) {
                    fired.push(ev);
                }
                if self.now < t_end {
                    self.now = t_end;
                }
            }
            RunLimit::Events(budget) => {
                let horizon = SimTime::from_secs(f64::MAX);
                while fired.len() < budget {
                    match self.pop_due(horizon) {
                        Some(ev) => fired.push(ev),
                        None => break,
                    }
                }
            }
        }
        fired
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: f64) -> SimTime {
        SimTime::from_secs(s)
    }

    #[test]
    fn equal_times_fire_in_posting_order() {
        let mut q = EventQueue::new();
        q.post(t(1.0), "a").unwrap();
        q.post(t(0.5), "early").unwrap();
        q.post(t(1.0), "b").unwrap();
        q.post(t(1.0), "c").unwrap();
        let order: Vec<_> = q
            .run_until(RunLimit::Until(t(2.0)))
            .into_iter()
            .map(|e| e.action)
            .collect();
        assert_eq!(order, vec!["early", "a", "b", "c"]);
        assert_eq!(q.now(), t(2.0));
    }

    #[test]
    fn empty_queue_jumps_to_end() {
        let mut q: EventQueue<()> = EventQueue::new();
        assert!(q.run_until(RunLimit::Until(t(3.0))).is_empty());
        assert_eq!(q.now(), t(3.0));
    }

    #[test]
    fn posting_into_the_past_fails() {
        let mut q = EventQueue::new();
        q.post(t(2.0), 1).unwrap();
        q.run_until(RunLimit::Events(1));
        assert!(matches!(q.post(t(1.0), 2), Err(SimError::PastEvent { .. })));
        assert!(q.post(t(2.0), 3).is_ok());
    }

    #[test]
    fn cancelled_events_never_fire() {
        let mut q = EventQueue::new();
        let a = q.post(t(1.0), 'a').unwrap();
        q.post(t(2.0), 'b').unwrap();
        assert!(q.cancel(a));
        assert!(!q.cancel(a));
        assert_eq!(q.len(), 1);
        let fired: Vec<_> = q
            .run_until(RunLimit::Events(10))
            .into_iter()
            .map(|e| e.action)
            .collect();
        assert_eq!(fired, vec!['b']);
        assert!(q.is_empty());
    }

    #[test]
    fn event_budget_is_respected() {
        let mut q = EventQueue::new();
        for i in 0..5 {
            q.post(t(f64::from(i)), i).unwrap();
        }
        assert_eq!(q.run_until(RunLimit::Events(2)).len(), 2);
        assert_eq!(q.now(), t(1.0));
        assert_eq!(q.len(), 3);
    }
}
