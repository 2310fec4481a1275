//! Integer-side maps: the `qx+1` map `T_q`, the shift `f(m) = floor(m/2)`,
//! and orbit iteration with exact cycle detection.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;
use serde::Serialize;

use crate::error::{Error, Result};

/// Odd multiplier of the `qx+1` map; 3 is Collatz.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct QMap(u32);

impl QMap {
    pub const COLLATZ: QMap = QMap(3);

    pub fn new(q: u32) -> Result<Self> {
        if q < 3 || q.is_multiple_of(2) {
            return Err(Error::InvalidQ(q));
        }
        Ok(QMap(q))
    }

    pub fn q(self) -> u32 {
        self.0
    }

    pub fn is_collatz(self) -> bool {
        self.0 == 3
    }
}

impl Default for QMap {
    fn default() -> Self {
        QMap::COLLATZ
    }
}

impl fmt::Display for QMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `m/2` for even `m`, `(q m + 1)/2` for odd `m`.
pub fn step_t(m: &BigUint, q: QMap) -> BigUint {
    if m.is_even() {
        m >> 1u32
    } else {
        (m * q.0 + 1u32) >> 1u32
    }
}

/// `floor(m/2)`: `m/2` on evens, `(m-1)/2` on odds.
pub fn bernoulli_f(m: &BigUint) -> BigUint {
    m >> 1u32
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict<V> {
    /// The orbit revisited a value. `cycle` lists one period, rotated to a
    /// fixed representative; `entry_step` is the index of the first cycle
    /// value in the trajectory.
    ReachedCycle {
        cycle: Vec<V>,
        entry_step: usize,
    },
    Cutoff {
        max_steps: usize,
    },
    MagnitudeBound {
        step: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitRecord<V> {
    pub start: V,
    /// Leading part of the trajectory, `trajectory[0] == start`; at most
    /// `keep` values.
    pub trajectory: Vec<V>,
    /// `(step, value)` every `keep` steps beyond the stored prefix.
    pub checkpoints: Vec<(usize, V)>,
    /// Applications of the map performed. On a cycle this is the step at
    /// which a value first repeated.
    pub steps_taken: usize,
    pub verdict: Verdict<V>,
    pub peak: V,
}

impl<V> OrbitRecord<V> {
    pub fn is_cycle(&self) -> bool {
        matches!(self.verdict, Verdict::ReachedCycle { .. })
    }

    pub fn cycle(&self) -> Option<&[V]> {
        match &self.verdict {
            Verdict::ReachedCycle { cycle, .. } => Some(cycle),
            _ => None,
        }
    }

    pub fn is_truncated(&self) -> bool {
        self.trajectory.len() < self.steps_taken
    }
}

#[derive(Clone, Debug)]
pub struct OrbitLimits {
    pub max_steps: usize,
    pub magnitude_bound: BigUint,
    /// Stored trajectory prefix length; also the checkpoint spacing.
    pub keep: usize,
}

pub const DEFAULT_MAX_STEPS: usize = 100_000;
pub const DEFAULT_KEEP: usize = 10_000;
pub const DEFAULT_MAGNITUDE_BITS: u32 = 256;

impl Default for OrbitLimits {
    fn default() -> Self {
        OrbitLimits {
            max_steps: DEFAULT_MAX_STEPS,
            magnitude_bound: BigUint::one() << DEFAULT_MAGNITUDE_BITS,
            keep: DEFAULT_KEEP,
        }
    }
}

/// Shared iteration loop. `exceeds` flags values past the magnitude bound;
/// `rank` picks the cycle rotation (the member with the smallest rank comes
/// first).
pub(crate) fn iterate<V, K>(
    start: V,
    mut step: impl FnMut(&V) -> V,
    exceeds: impl Fn(&V) -> bool,
    rank: impl Fn(&V) -> K,
    max_steps: usize,
    keep: usize,
) -> OrbitRecord<V>
where
    V: Clone + Eq + Hash + Ord,
    K: Ord,
{
    let keep = keep.max(1);
    let mut seen: HashMap<V, usize> = HashMap::new();
    let mut trajectory = vec![start.clone()];
    let mut checkpoints = Vec::new();
    let mut peak = start.clone();
    let mut current = start.clone();
    seen.insert(start.clone(), 0);

    let mut steps = 0usize;
    loop {
        if steps >= max_steps {
            return OrbitRecord {
                start,
                trajectory,
                checkpoints,
                steps_taken: steps,
                verdict: Verdict::Cutoff { max_steps },
                peak,
            };
        }
        let next = step(&current);
        steps += 1;
        if let Some(&first) = seen.get(&next) {
            // One period, read from the stored prefix or re-walked when the
            // prefix was truncated.
            let mut cycle = if steps <= trajectory.len() {
                trajectory[first..steps].to_vec()
            } else {
                let mut cycle = vec![next.clone()];
                let mut v = step(&next);
                while v != next {
                    cycle.push(v.clone());
                    v = step(&v);
                }
                cycle
            };
            let pivot = cycle
                .iter()
                .enumerate()
                .min_by_key(|(_, v)| rank(v))
                .map_or(0, |(i, _)| i);
            cycle.rotate_left(pivot);
            return OrbitRecord {
                start,
                trajectory,
                checkpoints,
                steps_taken: steps,
                verdict: Verdict::ReachedCycle {
                    cycle,
                    entry_step: first,
                },
                peak,
            };
        }
        if next > peak {
            peak = next.clone();
        }
        if trajectory.len() < keep {
            trajectory.push(next.clone());
        } else if steps.is_multiple_of(keep) {
            checkpoints.push((steps, next.clone()));
        }
        if exceeds(&next) {
            return OrbitRecord {
                start,
                trajectory,
                checkpoints,
                steps_taken: steps,
                verdict: Verdict::MagnitudeBound { step: steps },
                peak,
            };
        }
        seen.insert(next.clone(), steps);
        current = next;
    }
}

/// Iterates `T_q` from `m` until a value repeats, `max_steps` is reached, or
/// a value exceeds `magnitude_bound`. `m = 0` is the fixed point `{0}`.
pub fn orbit(m: &BigUint, q: QMap, limits: &OrbitLimits) -> OrbitRecord<BigUint> {
    iterate(
        m.clone(),
        |v| step_t(v, q),
        |v| v > &limits.magnitude_bound,
        |v| v.clone(),
        limits.max_steps,
        limits.keep,
    )
}
