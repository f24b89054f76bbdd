//! Exhaustive search over the abstract arbitration game behind the
//! same-type interference count.
//!
//! The game: the analyzed controller has `v` requests queued back to back.
//! Interferer `y` owns `phi[y]` outstanding transactions; part of them may
//! already sit in the peripheral at the start. The peripheral is a FIFO of
//! capacity `chi`. At any step the adversary either lets the peripheral
//! finish its head transaction or lets the round-robin arbiter grant one
//! request; it picks which interferers are requesting and the initial arbiter
//! pointer. The result is the largest number of transactions the peripheral
//! serves before the analyzed (`v`-th) one.

use std::collections::HashMap;

use super::SimError;

/// Instances larger than this are rejected; the state space grows quickly.
pub const ORACLE_LIMIT: u32 = 32;

#[derive(Clone, PartialEq, Eq, Hash)]
struct State {
    queued: u32,
    budgets: Vec<u32>,
    /// Own requests not yet granted, the analyzed one included.
    own_left: u32,
    /// Arbiter pointer over ports 0..=n; port n is the analyzed controller.
    pointer: usize,
}

struct Game {
    chi: u32,
    n: usize,
    memo: HashMap<State, u32>,
}

impl Game {
    /// Largest number of further transactions served before the analyzed one.
    fn best(&mut self, s: &State) -> u32 {
        if let Some(&v) = self.memo.get(s) {
            return v;
        }
        let mut best = 0;
        if s.queued > 0 {
            let next = State { queued: s.queued - 1, ..s.clone() };
            best = best.max(1 + self.best(&next));
        }
        if s.queued < self.chi {
            // The winner is the first requesting port from the pointer on. The
            // analyzed controller always requests, so any interferer met before
            // it can be made the winner; the analyzed port wins otherwise.
            let ports = self.n + 1;
            for step in 0..ports {
                let port = (s.pointer + step) % ports;
                if port == self.n {
                    let v = if s.own_left == 1 {
                        // Everything ahead of it in the FIFO is served first.
                        s.queued
                    } else {
                        let next = State {
                            queued: s.queued + 1,
                            own_left: s.own_left - 1,
                            pointer: (port + 1) % ports,
                            budgets: s.budgets.clone(),
                        };
                        self.best(&next)
                    };
                    best = best.max(v);
                    break;
                }
                if s.budgets[port] > 0 {
                    let mut budgets = s.budgets.clone();
                    budgets[port] -= 1;
                    let next = State { queued: s.queued + 1, budgets, own_left: s.own_left, pointer: (port + 1) % ports };
                    best = best.max(self.best(&next));
                }
            }
        }
        self.memo.insert(s.clone(), best);
        best
    }
}

/// Initial splits of the interferers' budgets into queued and not yet issued.
fn initial_splits(phi: &[u32], chi: u32) -> Vec<(u32, Vec<u32>)> {
    let mut out = vec![(0u32, Vec::new())];
    for &p in phi {
        let mut next = Vec::new();
        for (q, b) in &out {
            for a in 0..=p {
                if q + a <= chi {
                    let mut b = b.clone();
                    b.push(p - a);
                    next.push((q + a, b));
                }
            }
        }
        out = next;
    }
    out
}

pub fn brute_force_interference_count(phi: &[u32], chi: u32, v: u32) -> Result<u64, SimError> {
    let size: u32 = phi.iter().sum::<u32>() + chi + v;
    if size > ORACLE_LIMIT {
        return Err(SimError::OracleTooLarge(size));
    }
    if chi == 0 || v == 0 {
        return Err(SimError::Scenario("oracle needs chi >= 1 and V >= 1".into()));
    }
    let mut game = Game { chi, n: phi.len(), memo: HashMap::new() };
    let mut best = 0;
    for (queued, budgets) in initial_splits(phi, chi) {
        for pointer in 0..=phi.len() {
            let s = State { queued, budgets: budgets.clone(), own_left: v, pointer };
            best = best.max(game.best(&s));
        }
    }
    Ok(best as u64)
}
