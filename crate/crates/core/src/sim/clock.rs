use crate::model::Duration;

/// A clock domain with a fixed phase offset: edges at `phase + k * period`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Clock {
    pub period: u64,
    pub phase: u64,
}

impl Clock {
    pub fn new(period: Duration, phase: u64) -> Self {
        debug_assert!(phase < period.as_ps());
        Clock { period: period.as_ps(), phase }
    }

    pub fn period(&self) -> Duration {
        Duration::from_ps(self.period)
    }

    pub fn cycles(&self, n: u64) -> Duration {
        Duration::from_ps(self.period * n)
    }

    /// First edge at or after `t`.
    pub fn at_or_after(&self, t: Duration) -> Duration {
        let t = t.as_ps();
        if t <= self.phase {
            return Duration::from_ps(self.phase);
        }
        let k = (t - self.phase).div_ceil(self.period);
        Duration::from_ps(self.phase + k * self.period)
    }

    /// First edge strictly after `t`.
    pub fn after(&self, t: Duration) -> Duration {
        self.at_or_after(t + Duration::from_ps(1))
    }

    /// Last edge at or before `t`, if any.
    pub fn at_or_before(&self, t: Duration) -> Option<Duration> {
        let t = t.as_ps();
        if t < self.phase {
            return None;
        }
        let k = (t - self.phase) / self.period;
        Some(Duration::from_ps(self.phase + k * self.period))
    }

    pub fn is_edge(&self, t: Duration) -> bool {
        let t = t.as_ps();
        t >= self.phase && (t - self.phase).is_multiple_of(self.period)
    }
}

/// One crossing of an asynchronous FIFO: written at tx edge `written`, the
/// write pointer settles one tx period later and the data is visible at the
/// fourth rx edge after that. The reader pops at most one entry per rx cycle.
pub fn cdc_hop(tx: &Clock, rx: &Clock, written: Duration, last_pop: &mut Option<Duration>) -> Duration {
    let update = written + tx.period();
    let mut out = rx.after(update) + rx.cycles(3);
    if let Some(prev) = *last_pop {
        out = out.max(prev + rx.period());
    }
    *last_pop = Some(out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clk(p: u64, ph: u64) -> Clock {
        Clock::new(Duration::from_ps(p), ph)
    }

    #[test]
    fn edges() {
        let c = clk(10, 3);
        assert_eq!(c.at_or_after(Duration::ZERO).as_ps(), 3);
        assert_eq!(c.at_or_after(Duration::from_ps(3)).as_ps(), 3);
        assert_eq!(c.after(Duration::from_ps(3)).as_ps(), 13);
        assert_eq!(c.at_or_after(Duration::from_ps(14)).as_ps(), 23);
        assert_eq!(c.at_or_before(Duration::from_ps(22)).map(|d| d.as_ps()), Some(13));
        assert_eq!(c.at_or_before(Duration::from_ps(2)), None);
        assert!(c.is_edge(Duration::from_ps(33)));
    }

    #[test]
    fn hop_within_bound() {
        // Same period, zero phase difference: the worst alignment.
        let (tx, rx) = (clk(10, 0), clk(10, 0));
        let mut last = None;
        let out = cdc_hop(&tx, &rx, Duration::from_ps(0), &mut last);
        assert_eq!(out.as_ps(), 50);
        // Second entry in the same cycle waits one rx period.
        let out2 = cdc_hop(&tx, &rx, Duration::from_ps(0), &mut last);
        assert_eq!(out2.as_ps(), 60);
    }
}
