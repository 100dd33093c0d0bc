use crate::codec::{decode_goose, RawFrame};

use super::SAMPLES_PER_CYCLE;

/// Mechanical operating time.
pub const CB_DELAY_SAMPLES: u64 = SAMPLES_PER_CYCLE;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TripInput {
    /// Not a trip command (or not decodable).
    None,
    /// Open scheduled for the given sample.
    Scheduled(u64),
    /// Trip while an open is already pending.
    AlreadyPending,
    /// Trip on an open breaker.
    AlreadyOpen,
    /// Stale stNum/sqNum with freshness validation on.
    Stale { st_num: u32, sq_num: u32 },
}

#[derive(Debug, Clone)]
pub struct CircuitBreaker {
    pub name: String,
    closed: bool,
    pending_open: Option<u64>,
    validate_freshness: bool,
    last_seen: Option<(u32, u32)>,
}

impl CircuitBreaker {
    pub fn new(name: String, validate_freshness: bool) -> CircuitBreaker {
        CircuitBreaker {
            name,
            closed: true,
            pending_open: None,
            validate_freshness,
            last_seen: None,
        }
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn pending(&self) -> Option<u64> {
        self.pending_open
    }

    pub fn receive_goose(&mut self, n: u64, frame: &RawFrame) -> TripInput {
        let Ok(g) = decode_goose(frame) else {
            return TripInput::None;
        };
        if self.validate_freshness {
            let key = (g.st_num, g.sq_num);
            if self.last_seen.is_some_and(|last| key <= last) {
                return TripInput::Stale {
                    st_num: g.st_num,
                    sq_num: g.sq_num,
                };
            }
            self.last_seen = Some(key);
        }
        if !g.all_data.first().is_some_and(|e| e.trip) {
            return TripInput::None;
        }
        self.command_trip(n)
    }

    pub fn command_trip(&mut self, n: u64) -> TripInput {
        if !self.closed {
            TripInput::AlreadyOpen
        } else if self.pending_open.is_some() {
            TripInput::AlreadyPending
        } else {
            let at = n + CB_DELAY_SAMPLES;
            self.pending_open = Some(at);
            TripInput::Scheduled(at)
        }
    }

    /// True when the contacts part at `n`.
    pub fn tick(&mut self, n: u64) -> bool {
        if self.pending_open.is_some_and(|at| at <= n) {
            self.pending_open = None;
            self.closed = false;
            true
        } else {
            false
        }
    }

    /// Operator close. Returns false when already closed.
    pub fn close(&mut self) -> bool {
        self.pending_open = None;
        !std::mem::replace(&mut self.closed, true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn opens_one_cycle_after_trip_once() {
        let mut cb = CircuitBreaker::new("cb".into(), false);
        assert_eq!(cb.command_trip(100), TripInput::Scheduled(180));
        assert_eq!(cb.command_trip(101), TripInput::AlreadyPending);
        assert!(!cb.tick(179));
        assert!(cb.tick(180));
        assert!(!cb.tick(181));
        assert_eq!(cb.command_trip(200), TripInput::AlreadyOpen);
        assert!(cb.close());
        assert!(!cb.close());
    }
}
