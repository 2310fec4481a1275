//! The interval map `g = h ∘ T_q ∘ h⁻¹` on `[0, 1)` and pointwise probes of it.
//!
//! On `[0, 1/2)` the map is doubling. On `[1/2, 1)` it is computed through the
//! coding: decode, apply `T_q`, encode. For `q = 3` there is a second,
//! digit-level route ([`g2_symbolic`]) that never leaves fraction digits.

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;

use crate::coding::{decode_h, encode_h};
use crate::collatz::{iterate, step_t, OrbitRecord, QMap};
use crate::dyadic::{exact_quotient, Dyadic, ExactRatio};
use crate::error::{Error, Result};

fn check_domain(x: &Dyadic) -> Result<()> {
    if x.is_one() {
        Err(Error::InfinitePoint)
    } else {
        Ok(())
    }
}

/// `g(x)`; `x = 1/2` belongs to the odd branch. Output is canonical.
pub fn g(x: &Dyadic, q: QMap) -> Result<Dyadic> {
    check_domain(x)?;
    if x.is_below_half() {
        return Ok(x.double().expect("x < 1/2"));
    }
    Ok(encode_h(&step_t(&decode_h(x)?, q)))
}

/// The odd branch of `g` for `q = 3`, computed on fraction digits.
///
/// For `x = 0.1 a1 a2 ... an` the generalized digits are
/// `a1, a1+a2+1, a2+a3, ..., a(n-1)+an, an`. Digits above 1 are resolved
/// scanning from the first fraction position to the last: position `j`
/// keeps `d mod 2` and pushes `d / 2` into position `j+1`. Fraction position
/// `j` is bit `j` of the integer, so this is ordinary binary addition seen
/// through the reversal.
pub fn g2_symbolic(x: &Dyadic) -> Result<Dyadic> {
    check_domain(x)?;
    if x.is_below_half() {
        return Err(Error::NotOddBranch(x.to_string()));
    }
    let c = x.canonicalize();
    let digits = c.fraction_digits(c.depth())?;
    // a[0] is the leading 1; a[i] = 0 past the end
    let a = |i: usize| u32::from(digits.get(i).copied().unwrap_or(0));
    let n = digits.len() - 1;

    let mut generalized: Vec<u32> = Vec::with_capacity(n + 2);
    generalized.push(a(1));
    generalized.push(a(1) + a(2) + 1);
    for k in 2..=n {
        generalized.push(a(k) + a(k + 1));
    }

    let mut resolved: Vec<u8> = Vec::with_capacity(generalized.len() + 2);
    let mut carry = 0u32;
    for d in generalized {
        let total = d + carry;
        resolved.push((total % 2) as u8);
        carry = total / 2;
    }
    while carry > 0 {
        resolved.push((carry % 2) as u8);
        carry /= 2;
    }
    Ok(Dyadic::from_fraction_digits(&resolved)?.canonicalize())
}

/// Doubling map `2x mod 1`.
pub fn bernoulli_b(x: &Dyadic) -> Result<Dyadic> {
    x.shift_left_mod_one().ok_or(Error::InfinitePoint)
}

#[derive(Clone, Debug)]
pub struct GOrbitLimits {
    pub max_steps: usize,
    /// Largest fraction depth allowed; depth of `h(m)` is the bit length of
    /// `m`, so this bounds the integer orbit by `2^max_depth`.
    pub max_depth: u32,
    pub keep: usize,
}

impl Default for GOrbitLimits {
    fn default() -> Self {
        GOrbitLimits {
            max_steps: crate::collatz::DEFAULT_MAX_STEPS,
            max_depth: crate::collatz::DEFAULT_MAGNITUDE_BITS,
            keep: crate::collatz::DEFAULT_KEEP,
        }
    }
}

/// Iterates `g` exactly. Cycles are rotated to start at the member with the
/// smallest preimage, so the image of the Collatz cycle reads `(1/2, 1/4)`.
pub fn g_orbit(x: &Dyadic, q: QMap, limits: &GOrbitLimits) -> Result<OrbitRecord<Dyadic>> {
    check_domain(x)?;
    Ok(iterate(
        x.canonicalize(),
        |v| g(v, q).expect("g maps [0,1) into [0,1)"),
        |v| v.depth() > limits.max_depth,
        |v| decode_h(v).expect("orbit stays in [0,1)"),
        limits.max_steps,
        limits.keep,
    ))
}

/// Whether the record ended on the coded Collatz cycle `(1/2, 1/4)`.
pub fn reached_collatz_cycle(record: &OrbitRecord<Dyadic>) -> bool {
    record
        .cycle()
        .is_some_and(|c| c.len() == 2 && c[0] == Dyadic::half() && c[1] == quarter())
}

fn quarter() -> Dyadic {
    Dyadic::from_parts_unchecked(BigUint::from(1u32), 2)
}

fn grid_point(k: u64, depth: u32) -> Dyadic {
    Dyadic::from_parts_unchecked(BigUint::from(k), depth).canonicalize()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BranchQuotients {
    pub pairs: usize,
    pub min: ExactRatio,
    pub min_pair: (Dyadic, Dyadic),
    pub max: ExactRatio,
    pub max_pair: (Dyadic, Dyadic),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuotientScan {
    pub depth: u32,
    pub q: QMap,
    pub even_branch: BranchQuotients,
    pub odd_branch: BranchQuotients,
}

impl QuotientScan {
    /// Smallest absolute quotient over both branches; ties go to the pair
    /// with the smaller left point.
    pub fn minimum(&self) -> (&ExactRatio, &(Dyadic, Dyadic)) {
        let e = &self.even_branch;
        let o = &self.odd_branch;
        if (&o.min, &o.min_pair.0) < (&e.min, &e.min_pair.0) {
            (&o.min, &o.min_pair)
        } else {
            (&e.min, &e.min_pair)
        }
    }
}

/// Absolute difference quotients of `g` over neighbouring grid points
/// `k/2^depth, (k+1)/2^depth` that lie in the same branch.
pub fn quotient_scan(depth: u32, q: QMap) -> Result<QuotientScan> {
    if !(2..=24).contains(&depth) {
        return Err(Error::DepthOutOfRange {
            depth,
            min: 2,
            max: 24,
        });
    }
    let count = 1u64 << depth;
    let points: Vec<(Dyadic, Dyadic)> = (0..count)
        .into_par_iter()
        .map(|k| {
            let x = grid_point(k, depth);
            let y = g(&x, q).expect("grid point below 1");
            (x, y)
        })
        .collect();

    let half = (count / 2) as usize;
    let branch = |range: std::ops::Range<usize>| -> Result<BranchQuotients> {
        let mut best: Option<BranchQuotients> = None;
        for k in range {
            let (x0, y0) = &points[k];
            let (x1, y1) = &points[k + 1];
            let quot = exact_quotient((y1, y0), (x1, x0))?.abs();
            let pair = (x0.clone(), x1.clone());
            match &mut best {
                None => {
                    best = Some(BranchQuotients {
                        pairs: 1,
                        min: quot.clone(),
                        min_pair: pair.clone(),
                        max: quot,
                        max_pair: pair,
                    })
                }
                Some(b) => {
                    b.pairs += 1;
                    if quot < b.min {
                        b.min = quot.clone();
                        b.min_pair = pair.clone();
                    }
                    if quot > b.max {
                        b.max = quot;
                        b.max_pair = pair;
                    }
                }
            }
        }
        Ok(best.expect("depth >= 2 leaves at least one pair per branch"))
    };
    Ok(QuotientScan {
        depth,
        q,
        even_branch: branch(0..half - 1)?,
        odd_branch: branch(half..points.len() - 1)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    Left,
    Right,
}

/// `(g(x ± 2^-depth) - g(x)) / (±2^-depth)`.
pub fn one_sided_quotient(x: &Dyadic, side: Side, depth: u32, q: QMap) -> Result<ExactRatio> {
    let base = x.at_depth(depth).ok_or(Error::DepthOutOfRange {
        depth,
        min: x.canonical_depth(),
        max: u32::MAX,
    })?;
    let k = base.num().clone();
    let neighbour_num = match side {
        Side::Right => k + 1u32,
        Side::Left => {
            if base.is_zero() {
                return Err(Error::ZeroDenominator);
            }
            k - 1u32
        }
    };
    let neighbour = Dyadic::new(neighbour_num, depth)?;
    exact_quotient((&g(&neighbour, q)?, &g(x, q)?), (&neighbour, x))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CycleExpansion {
    pub depth: u32,
    /// Right-hand quotient at 1/2; the left neighbour lies in the other branch.
    pub at_half: ExactRatio,
    pub at_quarter: ExactRatio,
    pub product: ExactRatio,
}

/// Product of one-sided quotients at the two points of the cycle `(1/2, 1/4)`
/// for the `3x+1` conjugate.
pub fn cycle_expansion_product(depth: u32) -> Result<CycleExpansion> {
    if depth < 3 {
        return Err(Error::DepthOutOfRange {
            depth,
            min: 3,
            max: u32::MAX,
        });
    }
    let q = QMap::COLLATZ;
    let at_half = one_sided_quotient(&Dyadic::half(), Side::Right, depth, q)?;
    let at_quarter = one_sided_quotient(&quarter(), Side::Right, depth, q)?;
    let product = &at_half * &at_quarter;
    Ok(CycleExpansion {
        depth,
        at_half,
        at_quarter,
        product,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProbePoint {
    pub k: u32,
    pub x: Dyadic,
    pub y: Dyadic,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LimitProbe {
    pub x0: Dyadic,
    pub value_at_x0: Dyadic,
    pub points: Vec<ProbePoint>,
    /// Some probe point fell in the other branch from `x0`.
    pub branch_change: bool,
}

/// Left approach to `x0 = 0.a0 ... a(n-1) 1`: the last 1 becomes 0 and `k`
/// ones are appended, for `k = 1..=k_max`.
pub fn left_limit_probe(x0: &Dyadic, k_max: u32, q: QMap) -> Result<LimitProbe> {
    check_domain(x0)?;
    if x0.is_below_half() {
        return Err(Error::NotOddBranch(x0.to_string()));
    }
    let c = x0.canonicalize();
    let mut prefix = c.fraction_digits(c.depth())?;
    *prefix.last_mut().expect("x0 >= 1/2 has digits") = 0;
    let value_at_x0 = g(&c, q)?;
    let mut points = Vec::with_capacity(k_max as usize);
    let mut branch_change = false;
    let mut digits = prefix;
    for k in 1..=k_max {
        digits.push(1);
        let x = Dyadic::from_fraction_digits(&digits)?.canonicalize();
        branch_change |= x.is_below_half();
        let y = g(&x, q)?;
        points.push(ProbePoint { k, x, y });
    }
    Ok(LimitProbe {
        x0: c,
        value_at_x0,
        points,
        branch_change,
    })
}

pub const VIOLATION_SAMPLE: usize = 32;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiagonalScan {
    pub depth: u32,
    pub q: QMap,
    pub above: u64,
    pub on: u64,
    pub below: u64,
    /// First points (ascending x) with `g(x) >= x`, at most
    /// [`VIOLATION_SAMPLE`] of them.
    pub violations: Vec<(Dyadic, Dyadic)>,
}

impl DiagonalScan {
    pub fn violation_count(&self) -> u64 {
        self.above + self.on
    }
}

/// Compares `g(x)` with `x` for every dyadic of depth `<= depth` in `[1/2, 1)`.
pub fn below_diagonal_scan(depth: u32, q: QMap) -> Result<DiagonalScan> {
    if !(1..=30).contains(&depth) {
        return Err(Error::DepthOutOfRange {
            depth,
            min: 1,
            max: 30,
        });
    }
    let lo = 1u64 << (depth - 1);
    let hi = 1u64 << depth;
    let classified: Vec<(std::cmp::Ordering, Dyadic, Dyadic)> = (lo..hi)
        .into_par_iter()
        .map(|k| {
            let x = grid_point(k, depth);
            let y = g(&x, q).expect("below 1");
            (y.cmp(&x), x, y)
        })
        .collect();
    let mut scan = DiagonalScan {
        depth,
        q,
        above: 0,
        on: 0,
        below: 0,
        violations: Vec::new(),
    };
    for (ord, x, y) in classified {
        match ord {
            std::cmp::Ordering::Greater => scan.above += 1,
            std::cmp::Ordering::Equal => scan.on += 1,
            std::cmp::Ordering::Less => scan.below += 1,
        }
        if ord != std::cmp::Ordering::Less && scan.violations.len() < VIOLATION_SAMPLE {
            scan.violations.push((x, y));
        }
    }
    Ok(scan)
}
