//! Claim-by-claim verification and the point-cloud helpers behind the plots.

use std::fmt::Write as _;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;

use crate::coding::{decode_h, encode_h};
use crate::collatz::{bernoulli_f, step_t, QMap};
use crate::conjugate::{
    below_diagonal_scan, bernoulli_b, cycle_expansion_product, g, g2_symbolic, left_limit_probe,
    quotient_scan, DiagonalScan,
};
use crate::dyadic::{exact_quotient, Dyadic, ExactRatio};
use crate::error::{Error, Result};
use crate::intervals::{
    connectivity_report, image_intervals, span_measurement, transfer_graph, IntervalId,
};

/// Problem sizes for [`verify_all`]. A zero disables the matching check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Scales {
    /// Round trips for `m < 2^coding_bits` and dyadics of depth `<= coding_bits`.
    pub coding_bits: u32,
    pub commutation_max: u64,
    pub symbolic_max: u64,
    pub bernoulli_max: u64,
    pub quotient_depth: u32,
    pub diagonal_depth: u32,
    /// Transfer graphs are checked for every depth `1..=graph_depth`.
    pub graph_depth: u32,
    /// Largest sample depth for the span of `[1/2, 3/4]`; sampling starts at 4.
    pub span_depth: u32,
    pub probe_k: u32,
}

impl Scales {
    pub fn small() -> Self {
        Scales {
            coding_bits: 14,
            commutation_max: 20_000,
            symbolic_max: 20_000,
            bernoulli_max: 20_000,
            quotient_depth: 10,
            diagonal_depth: 12,
            graph_depth: 8,
            span_depth: 12,
            probe_k: 24,
        }
    }

    pub fn full() -> Self {
        Scales {
            coding_bits: 20,
            commutation_max: 1_000_000,
            symbolic_max: 1_000_000,
            bernoulli_max: 1_000_000,
            quotient_depth: 12,
            diagonal_depth: 14,
            graph_depth: 10,
            span_depth: 16,
            probe_k: 48,
        }
    }

    pub fn empty() -> Self {
        Scales {
            coding_bits: 0,
            commutation_max: 0,
            symbolic_max: 0,
            bernoulli_max: 0,
            quotient_depth: 0,
            diagonal_depth: 0,
            graph_depth: 0,
            span_depth: 0,
            probe_k: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Status {
    fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIPPED",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    /// Stable identifier of the claim being checked.
    pub claim: &'static str,
    pub status: Status,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub q: QMap,
    pub scales: Scales,
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn count(&self, status: Status) -> usize {
        self.checks.iter().filter(|c| c.status == status).count()
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// One `name STATUS claim=<id> detail` line per check.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "verify q={}", self.q);
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{} {} claim={} {}",
                c.name,
                c.status.as_str(),
                c.claim,
                c.detail
            );
        }
        let _ = writeln!(
            out,
            "summary pass={} fail={} skipped={}",
            self.count(Status::Pass),
            self.count(Status::Fail),
            self.count(Status::Skipped)
        );
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn pass(name: &'static str, claim: &'static str, detail: String) -> CheckResult {
    CheckResult {
        name,
        claim,
        status: Status::Pass,
        detail,
    }
}

fn fail(name: &'static str, claim: &'static str, detail: String) -> CheckResult {
    CheckResult {
        name,
        claim,
        status: Status::Fail,
        detail,
    }
}

fn skip(name: &'static str, claim: &'static str, reason: &str) -> CheckResult {
    CheckResult {
        name,
        claim,
        status: Status::Skipped,
        detail: reason.to_string(),
    }
}

fn first_failure(
    range: std::ops::RangeInclusive<u64>,
    holds: impl Fn(u64) -> bool + Sync,
) -> Option<u64> {
    range.into_par_iter().find_first(|&m| !holds(m))
}

fn check_coding(bits: u32) -> CheckResult {
    const NAME: &str = "coding_roundtrip";
    const CLAIM: &str = "coding-bijection";
    if bits == 0 {
        return skip(NAME, CLAIM, "coding_bits=0");
    }
    let top = (1u64 << bits) - 1;
    let naturals = first_failure(0..=top, |m| {
        let m = BigUint::from(m);
        let x = encode_h(&m);
        decode_h(&x).ok() == Some(m.clone()) && (m.bit(0) != x.is_below_half())
    });
    if let Some(m) = naturals {
        return fail(
            NAME,
            CLAIM,
            format!("m={m} breaks decode(encode(m)) or the parity split"),
        );
    }
    // canonical dyadics of depth <= bits are the odd numerators at each depth, plus 0
    let dyadics = first_failure(0..=top, |k| {
        let x = Dyadic::from_parts_unchecked(BigUint::from(k), bits).canonicalize();
        decode_h(&x).map(|m| encode_h(&m)).ok() == Some(x)
    });
    match dyadics {
        Some(k) => fail(
            NAME,
            CLAIM,
            format!("x={k}/2^{bits} breaks encode(decode(x))"),
        ),
        None => pass(
            NAME,
            CLAIM,
            format!("m<2^{bits} and all dyadics of depth<={bits} round-trip"),
        ),
    }
}

fn check_commutation(q: QMap, max: u64) -> CheckResult {
    const NAME: &str = "conjugacy_commutation";
    const CLAIM: &str = "conjugacy";
    if max == 0 {
        return skip(NAME, CLAIM, "commutation_max=0");
    }
    let bad = first_failure(1..=max, |m| {
        let m = BigUint::from(m);
        g(&encode_h(&m), q).ok() == Some(encode_h(&step_t(&m, q)))
    });
    match bad {
        Some(m) => fail(NAME, CLAIM, format!("h(T(m)) != g(h(m)) at m={m}")),
        None => pass(NAME, CLAIM, format!("h(T(m)) = g(h(m)) for 1<=m<={max}")),
    }
}

fn check_symbolic(q: QMap, max: u64) -> CheckResult {
    const NAME: &str = "symbolic_equivalence";
    const CLAIM: &str = "digit-formula";
    if !q.is_collatz() {
        return skip(NAME, CLAIM, "digit formula exists for q=3 only");
    }
    if max == 0 {
        return skip(NAME, CLAIM, "symbolic_max=0");
    }
    let worked = g2_symbolic(&Dyadic::from_parts_unchecked(BigUint::from(3u32), 2))
        .is_ok_and(|y| y == Dyadic::from_parts_unchecked(BigUint::from(5u32), 3));
    if !worked {
        return fail(NAME, CLAIM, "g2(0.11) != 0.101".into());
    }
    let bad = first_failure(0..=(max - 1) / 2, |i| {
        let x = encode_h(&BigUint::from(2 * i + 1));
        g2_symbolic(&x).ok() == g(&x, q).ok()
    });
    match bad {
        Some(i) => fail(
            NAME,
            CLAIM,
            format!("digit formula disagrees at m={}", 2 * i + 1),
        ),
        None => pass(
            NAME,
            CLAIM,
            format!("digit formula equals conjugation for odd m<{max}; g2(0.11)=0.101"),
        ),
    }
}

fn check_bernoulli(max: u64) -> CheckResult {
    const NAME: &str = "bernoulli_commutation";
    const CLAIM: &str = "shift-conjugacy";
    if max == 0 {
        return skip(NAME, CLAIM, "bernoulli_max=0");
    }
    let bad = first_failure(1..=max, |m| {
        let m = BigUint::from(m);
        bernoulli_b(&encode_h(&m)).ok() == Some(encode_h(&bernoulli_f(&m)))
    });
    match bad {
        Some(m) => fail(NAME, CLAIM, format!("h(f(m)) != B(h(m)) at m={m}")),
        None => pass(NAME, CLAIM, format!("h(f(m)) = B(h(m)) for 1<=m<={max}")),
    }
}

fn check_quotients(q: QMap, depth: u32) -> Vec<CheckResult> {
    const EVEN: &str = "quotient_even_branch";
    const ODD: &str = "quotient_odd_branch";
    const CYCLE: &str = "cycle_expansion";
    const CLAIM: &str = "expansion-bound";
    const CYCLE_CLAIM: &str = "cycle-expansion-bound";
    if depth == 0 {
        return vec![
            skip(EVEN, CLAIM, "quotient_depth=0"),
            skip(ODD, CLAIM, "quotient_depth=0"),
            skip(CYCLE, CYCLE_CLAIM, "quotient_depth=0"),
        ];
    }
    let scan = match quotient_scan(depth, q) {
        Ok(s) => s,
        Err(e) => {
            return vec![
                fail(EVEN, CLAIM, e.to_string()),
                fail(ODD, CLAIM, e.to_string()),
                fail(CYCLE, CYCLE_CLAIM, e.to_string()),
            ]
        }
    };
    let two = ExactRatio::from_integer(2);
    let even = &scan.even_branch;
    let even_check = if even.min == two && even.max == two {
        pass(
            EVEN,
            CLAIM,
            format!("all {} pairs at depth {depth} have quotient 2", even.pairs),
        )
    } else {
        fail(
            EVEN,
            CLAIM,
            format!("quotients range over [{}, {}]", even.min, even.max),
        )
    };
    let odd = &scan.odd_branch;
    let detail = format!(
        "min |quotient| at depth {depth} is {} on ({}, {}); max {}",
        odd.min, odd.min_pair.0, odd.min_pair.1, odd.max
    );
    let odd_check = if !q.is_collatz() {
        skip(ODD, CLAIM, &format!("bound stated for q=3 only; {detail}"))
    } else if odd.min >= two {
        pass(ODD, CLAIM, detail)
    } else {
        fail(ODD, CLAIM, format!("{detail}; bound 2 not met"))
    };
    let cycle_check = if !q.is_collatz() {
        skip(CYCLE, CYCLE_CLAIM, "(1/2, 1/4) is a cycle for q=3 only")
    } else if depth < 3 {
        skip(CYCLE, CYCLE_CLAIM, "needs depth>=3")
    } else {
        match cycle_expansion_product(depth) {
            Ok(c) => {
                let detail = format!(
                    "product {} = {} (at 1/2) * {} (at 1/4) at depth {depth}",
                    c.product, c.at_half, c.at_quarter
                );
                if c.product.abs() >= ExactRatio::from_integer(4) {
                    pass(CYCLE, CYCLE_CLAIM, detail)
                } else {
                    fail(CYCLE, CYCLE_CLAIM, detail)
                }
            }
            Err(e) => fail(CYCLE, CYCLE_CLAIM, e.to_string()),
        }
    };
    vec![even_check, odd_check, cycle_check]
}

fn check_diagonal(q: QMap, depth: u32) -> CheckResult {
    const NAME: &str = "below_diagonal";
    const CLAIM: &str = "diagonal-position";
    if depth == 0 {
        return skip(NAME, CLAIM, "diagonal_depth=0");
    }
    let scan = match below_diagonal_scan(depth, q) {
        Ok(s) => s,
        Err(e) => return fail(NAME, CLAIM, e.to_string()),
    };
    let counts = format!("above={} on={} below={}", scan.above, scan.on, scan.below);
    if q.is_collatz() {
        match scan.violations.first() {
            None => pass(NAME, CLAIM, format!("g2(x)<x at depth<={depth}; {counts}")),
            Some((x, y)) => fail(NAME, CLAIM, format!("g2({x})={y} >= x; {counts}")),
        }
    } else if scan.above > 0 {
        pass(
            NAME,
            CLAIM,
            format!("above_diagonal: present (expected) {counts}"),
        )
    } else {
        fail(NAME, CLAIM, format!("above_diagonal: absent {counts}"))
    }
}

fn check_transfer(q: QMap, max_depth: u32) -> CheckResult {
    const NAME: &str = "transfer_invariants";
    const CLAIM: &str = "interval-doubling";
    if max_depth == 0 {
        return skip(NAME, CLAIM, "graph_depth=0");
    }
    if q.is_collatz() && max_depth >= 2 {
        let expected = [["00", "01"], ["10", "11"], ["00", "01"], ["10", "11"]];
        for (k, want) in expected.iter().enumerate() {
            let cell = IntervalId::new(2, k as u64).expect("depth 2 index");
            let got = image_intervals(cell, q).map(|c| c.label());
            if got != *want {
                return fail(
                    NAME,
                    CLAIM,
                    format!("g({cell}) = {got:?}, expected {want:?}"),
                );
            }
        }
    }
    for depth in 1..=max_depth {
        let graph = match transfer_graph(depth, q) {
            Ok(graph) => graph,
            Err(e) => return fail(NAME, CLAIM, e.to_string()),
        };
        for k in 0..graph.node_count() as u64 {
            let [a, b] = graph.successors(k);
            if a == b || !graph.node(a).is_sibling_of(&graph.node(b)) {
                return fail(
                    NAME,
                    CLAIM,
                    format!(
                        "depth {depth}: successors of {} are not siblings",
                        graph.node(k)
                    ),
                );
            }
        }
    }
    pass(
        NAME,
        CLAIM,
        format!("depths 1..={max_depth}: two sibling successors per cell, image length 2|I|"),
    )
}

fn check_connectivity(q: QMap, max_depth: u32) -> CheckResult {
    const NAME: &str = "connectivity";
    const CLAIM: &str = "interval-covering";
    if max_depth == 0 {
        return skip(NAME, CLAIM, "graph_depth=0");
    }
    let mut exponents = Vec::new();
    for depth in 1..=max_depth {
        let report = match transfer_graph(depth, q) {
            Ok(graph) => connectivity_report(&graph),
            Err(e) => return fail(NAME, CLAIM, e.to_string()),
        };
        if !report.strongly_connected {
            return fail(
                NAME,
                CLAIM,
                format!("depth {depth}: not strongly connected"),
            );
        }
        exponents.push(
            report
                .primitivity_exponent
                .map_or_else(|| "none".to_string(), |e| e.to_string()),
        );
    }
    pass(
        NAME,
        CLAIM,
        format!(
            "strongly connected at depths 1..={max_depth}; primitivity exponents [{}]",
            exponents.join(",")
        ),
    )
}

pub const SPAN_START_DEPTH: u32 = 4;

fn check_span(q: QMap, max_sample: u32) -> CheckResult {
    const NAME: &str = "span_convergence";
    const CLAIM: &str = "interval-doubling";
    if max_sample < SPAN_START_DEPTH {
        return skip(NAME, CLAIM, "span_depth<4");
    }
    let cell = IntervalId::new(2, 2).expect("[1/2, 3/4)");
    let target = Dyadic::half();
    let mut previous: Option<Dyadic> = None;
    let mut spans = Vec::new();
    for d in SPAN_START_DEPTH..=max_sample {
        let span = match span_measurement(cell, q, d) {
            Ok(r) => r.span,
            Err(e) => return fail(NAME, CLAIM, e.to_string()),
        };
        if previous.as_ref().is_some_and(|p| &span < p) {
            return fail(
                NAME,
                CLAIM,
                format!("span drops to {span} at sample depth {d}"),
            );
        }
        let tolerance = Dyadic::from_parts_unchecked(BigUint::from(1u32), d - SPAN_START_DEPTH);
        if span.abs_diff(&target) > tolerance {
            return fail(
                NAME,
                CLAIM,
                format!(
                    "span {span} at sample depth {d} is farther than 2^-{} from 1/2",
                    d - 4
                ),
            );
        }
        spans.push(span.to_string());
        previous = Some(span);
    }
    pass(
        NAME,
        CLAIM,
        format!(
            "g([1/2,3/4]) spans nondecreasing toward 1/2: {}",
            spans.last().expect("at least one depth")
        ),
    )
}

fn check_discontinuity(q: QMap, k_max: u32) -> CheckResult {
    const NAME: &str = "discontinuity_probe";
    const CLAIM: &str = "discontinuity";
    if !q.is_collatz() {
        return skip(NAME, CLAIM, "probe limit known for q=3 only");
    }
    if k_max < 2 {
        return skip(NAME, CLAIM, "probe_k<2");
    }
    let x0 = Dyadic::from_parts_unchecked(BigUint::from(3u32), 2);
    let limit = Dyadic::from_parts_unchecked(BigUint::from(1u32), 2);
    let probe = match left_limit_probe(&x0, k_max, q) {
        Ok(p) => p,
        Err(e) => return fail(NAME, CLAIM, e.to_string()),
    };
    for p in probe.points.iter().filter(|p| p.k >= 2) {
        let tolerance = Dyadic::from_parts_unchecked(BigUint::from(1u32), p.k - 1);
        if p.y.abs_diff(&limit) > tolerance {
            return fail(
                NAME,
                CLAIM,
                format!("k={}: g2={} not within 2^-{} of 1/4", p.k, p.y, p.k - 1),
            );
        }
    }
    let jump = probe.value_at_x0.abs_diff(&limit);
    let expected = Dyadic::from_parts_unchecked(BigUint::from(3u32), 3);
    if jump != expected {
        return fail(NAME, CLAIM, format!("jump {jump}, expected 3/2^3"));
    }
    pass(
        NAME,
        CLAIM,
        format!(
            "left limit at 3/4 is 1/4, g2(3/4)={}, jump {jump} (k<={k_max})",
            probe.value_at_x0
        ),
    )
}

/// Runs every check in a fixed order. Failures are report entries.
pub fn verify_all(q: QMap, scales: &Scales) -> VerificationReport {
    let mut checks = vec![
        check_coding(scales.coding_bits),
        check_commutation(q, scales.commutation_max),
        check_symbolic(q, scales.symbolic_max),
        check_bernoulli(scales.bernoulli_max),
    ];
    checks.extend(check_quotients(q, scales.quotient_depth));
    checks.push(check_diagonal(q, scales.diagonal_depth));
    checks.push(check_transfer(q, scales.graph_depth));
    checks.push(check_connectivity(q, scales.graph_depth));
    checks.push(check_span(q, scales.span_depth));
    checks.push(check_discontinuity(q, scales.probe_k));
    VerificationReport {
        q,
        scales: scales.clone(),
        checks,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Window {
    pub lo: Dyadic,
    pub hi: Dyadic,
    pub sample_depth: u32,
    /// `(x, g(x))`, ascending in x.
    pub points: Vec<(Dyadic, Dyadic)>,
}

pub const MAX_SAMPLE_DEPTH: u32 = 28;

/// `(x, g(x))` for every dyadic `x` of depth `<= sample_depth` with
/// `lo <= x < hi`, anywhere in `[0, 1]`.
pub fn sample_window(lo: &Dyadic, hi: &Dyadic, sample_depth: u32, q: QMap) -> Result<Window> {
    if sample_depth > MAX_SAMPLE_DEPTH {
        return Err(Error::DepthOutOfRange {
            depth: sample_depth,
            min: 0,
            max: MAX_SAMPLE_DEPTH,
        });
    }
    let empty = || Error::EmptyWindow {
        lo: lo.to_string(),
        hi: hi.to_string(),
    };
    if lo >= hi {
        return Err(empty());
    }
    // first grid index >= lo, first grid index >= hi
    let ceil_index = |x: &Dyadic| -> u64 {
        let (num, depth) = (x.num(), x.depth());
        let index = if depth <= sample_depth {
            num << (sample_depth - depth)
        } else {
            let shift = depth - sample_depth;
            let floor = num >> shift;
            if (&floor << shift) == *num {
                floor
            } else {
                floor + 1u32
            }
        };
        u64::try_from(index).expect("index below 2^28")
    };
    let start = ceil_index(lo);
    let end = ceil_index(hi).min(1u64 << sample_depth);
    if start >= end {
        return Err(empty());
    }
    let points = (start..end)
        .into_par_iter()
        .map(|j| {
            let x = Dyadic::from_parts_unchecked(BigUint::from(j), sample_depth).canonicalize();
            let y = g(&x, q)?;
            Ok((x, y))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Window {
        lo: lo.clone(),
        hi: hi.clone(),
        sample_depth,
        points,
    })
}

/// Points of the odd branch inside `[lo, hi)`, with `1/2 <= lo < hi <= 1`.
pub fn window_extract(lo: &Dyadic, hi: &Dyadic, sample_depth: u32, q: QMap) -> Result<Window> {
    if lo < &Dyadic::half() {
        return Err(Error::NotOddBranch(lo.to_string()));
    }
    sample_window(lo, hi, sample_depth, q)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WindowComparison {
    /// Largest distance from a point of the first window to the second.
    pub forward: f64,
    pub backward: f64,
    /// `max(forward, backward)`.
    pub deviation: f64,
}

/// Both windows are mapped so x runs over `[0, 1]`; y is scaled by the same
/// factor and shifted so its minimum is 0.
fn normalize(w: &Window) -> Vec<(f64, f64)> {
    let y_min = w
        .points
        .iter()
        .map(|(_, y)| y)
        .min()
        .expect("windows are nonempty")
        .clone();
    w.points
        .iter()
        .map(|(x, y)| {
            let nx = exact_quotient((x, &w.lo), (&w.hi, &w.lo)).expect("lo < hi");
            let ny = exact_quotient((y, &y_min), (&w.hi, &w.lo)).expect("lo < hi");
            (nx.to_f64(), ny.to_f64())
        })
        .collect()
}

fn directed(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    a.par_iter()
        .map(|(ax, ay)| {
            b.iter()
                .map(|(bx, by)| (ax - bx).hypot(ay - by))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max)
}

/// Hausdorff distance between the normalized point sets.
pub fn window_compare(w1: &Window, w2: &Window) -> WindowComparison {
    let a = normalize(w1);
    let b = normalize(w2);
    let forward = directed(&a, &b);
    let backward = directed(&b, &a);
    WindowComparison {
        forward,
        backward,
        deviation: forward.max(backward),
    }
}

/// Counts of odd-branch points above, on and below `y = x`.
pub fn diagonal_classification(q: QMap, depth: u32) -> Result<DiagonalScan> {
    below_diagonal_scan(depth, q)
}
