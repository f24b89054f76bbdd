/// Set-associative LRU tag store. Data contents are not modeled.
#[derive(Clone, Debug)]
pub struct Cache {
    /// Per set, most recently used first.
    sets: Vec<Vec<Way>>,
    ways: usize,
    filler: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Way {
    tag: u64,
    dirty: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lookup {
    Hit,
    /// Miss; `Some(dirty)` when a line had to be evicted.
    Miss { victim_dirty: Option<bool> },
}

/// Forced cache states used by scenario builders to pin the memory case.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Prime {
    Present,
    AbsentCleanVictim,
    AbsentDirtyVictim,
}

/// Tags at or above this value never collide with real addresses.
const FILLER_BASE: u64 = 1 << 62;

impl Cache {
    pub fn new(sets: u32, ways: u32) -> Self {
        Cache { sets: vec![Vec::with_capacity(ways as usize); sets as usize], ways: ways as usize, filler: 0 }
    }

    pub fn set_count(&self) -> u64 {
        self.sets.len() as u64
    }

    pub fn capacity(&self) -> u64 {
        self.sets.len() as u64 * self.ways as u64
    }

    fn split(&self, line: u64) -> (usize, u64) {
        ((line % self.set_count()) as usize, line / self.set_count())
    }

    pub fn contains(&self, line: u64) -> bool {
        let (s, tag) = self.split(line);
        self.sets[s].iter().any(|w| w.tag == tag)
    }

    /// Looks up `line`, allocating it on a miss (write-allocate, write-back).
    pub fn access(&mut self, line: u64, write: bool) -> Lookup {
        let ways = self.ways;
        let (s, tag) = self.split(line);
        let set = &mut self.sets[s];
        if let Some(pos) = set.iter().position(|w| w.tag == tag) {
            let mut w = set.remove(pos);
            w.dirty |= write;
            set.insert(0, w);
            return Lookup::Hit;
        }
        let victim_dirty = if set.len() == ways { set.pop().map(|v| v.dirty) } else { None };
        set.insert(0, Way { tag, dirty: write });
        Lookup::Miss { victim_dirty }
    }

    fn filler_tag(&mut self) -> u64 {
        self.filler += 1;
        FILLER_BASE + self.filler
    }

    pub fn prime(&mut self, line: u64, state: Prime) {
        let ways = self.ways;
        let (s, tag) = self.split(line);
        match state {
            Prime::Present => {
                if !self.contains(line) {
                    self.access(line, false);
                }
            }
            Prime::AbsentCleanVictim | Prime::AbsentDirtyVictim => {
                self.sets[s].retain(|w| w.tag != tag);
                while self.sets[s].len() < ways {
                    let f = self.filler_tag();
                    self.sets[s].push(Way { tag: f, dirty: false });
                }
                if let Some(lru) = self.sets[s].last_mut() {
                    lru.dirty = state == Prime::AbsentDirtyVictim;
                }
            }
        }
    }

    /// Fills every way of every set with filler lines of the given dirtiness.
    pub fn fill(&mut self, dirty: bool) {
        for s in 0..self.sets.len() {
            while self.sets[s].len() < self.ways {
                let f = self.filler_tag();
                self.sets[s].push(Way { tag: f, dirty });
            }
        }
    }
}
