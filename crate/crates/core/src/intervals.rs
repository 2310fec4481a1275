//! Dyadic partitions of `[0, 1]` and how `g` moves their cells.
//!
//! The depth-`n` cell `I_w = [k/2^n, (k+1)/2^n)` carries the label word `w`,
//! the `n` big-endian bits of `k`. Coded points inside it are exactly the
//! `h(m)` with `m ≡ rev(w) (mod 2^n)`, so cell images reduce to residue
//! arithmetic: every cell maps onto two sibling cells, i.e. onto an interval
//! of twice its length.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::{self, Write as _};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::coding::reverse_low_bits;
use crate::collatz::QMap;
use crate::conjugate::g;
use crate::dyadic::{exact_quotient, Dyadic, ExactRatio};
use crate::error::{Error, Result};

pub const MAX_INTERVAL_DEPTH: u32 = 63;
pub const DEFAULT_MAX_GRAPH_DEPTH: u32 = 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct IntervalId {
    depth: u32,
    index: u64,
}

impl IntervalId {
    pub fn new(depth: u32, index: u64) -> Result<Self> {
        if !(1..=MAX_INTERVAL_DEPTH).contains(&depth) {
            return Err(Error::DepthOutOfRange {
                depth,
                min: 1,
                max: MAX_INTERVAL_DEPTH,
            });
        }
        if index >> depth != 0 {
            return Err(Error::IndexOutOfRange { index, depth });
        }
        Ok(IntervalId { depth, index })
    }

    pub fn from_label(word: &str) -> Result<Self> {
        let depth = u32::try_from(word.len()).map_err(|_| Error::BadLabel(word.into()))?;
        if depth == 0 || depth > MAX_INTERVAL_DEPTH || !word.bytes().all(|b| b == b'0' || b == b'1')
        {
            return Err(Error::BadLabel(word.into()));
        }
        let index = u64::from_str_radix(word, 2).map_err(|_| Error::BadLabel(word.into()))?;
        IntervalId::new(depth, index)
    }

    /// The cell of the depth-`depth` partition that contains `x < 1`.
    pub fn containing(x: &Dyadic, depth: u32) -> Result<Self> {
        let index = x
            .cell_index(depth)
            .ok_or(Error::InfinitePoint)?
            .to_u64()
            .expect("cell index below 2^63");
        IntervalId::new(depth, index)
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn label(&self) -> String {
        format!("{:0w$b}", self.index, w = self.depth as usize)
    }

    pub fn lo(&self) -> Dyadic {
        Dyadic::from_parts_unchecked(BigUint::from(self.index), self.depth)
    }

    pub fn hi(&self) -> Dyadic {
        Dyadic::from_parts_unchecked(BigUint::from(self.index + 1), self.depth)
    }

    /// 0 for cells in `[0, 1/2)`, 1 for cells in `[1/2, 1)`.
    pub fn branch(&self) -> u8 {
        (self.index >> (self.depth - 1)) as u8
    }

    /// Same depth, labels differing only in the last digit.
    pub fn is_sibling_of(&self, other: &IntervalId) -> bool {
        self.depth == other.depth && self.index ^ other.index == 1
    }
}

impl fmt::Display for IntervalId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "I_{}", self.label())
    }
}

/// Residue class `residue (mod 2^bits)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Residue {
    pub residue: u64,
    pub bits: u32,
}

impl Residue {
    pub fn modulus(&self) -> u128 {
        1u128 << self.bits
    }

    pub fn contains(&self, m: &BigUint) -> bool {
        let low = m.iter_u64_digits().next().unwrap_or(0);
        let mask = if self.bits == 64 {
            u64::MAX
        } else {
            (1u64 << self.bits) - 1
        };
        low & mask == self.residue
    }
}

pub fn residue_of_interval(cell: IntervalId) -> Residue {
    Residue {
        residue: reverse_low_bits(cell.index, cell.depth),
        bits: cell.depth,
    }
}

pub fn interval_of_residue(residue: u64, depth: u32) -> Result<IntervalId> {
    IntervalId::new(depth, reverse_low_bits(residue, depth))
}

/// The two sibling cells covering `g(I)`, in index order.
pub fn image_intervals(cell: IntervalId, q: QMap) -> [IntervalId; 2] {
    let n = cell.depth;
    let r = u128::from(residue_of_interval(cell).residue);
    let upper = 1u128 << (n - 1);
    // T maps the class r (mod 2^n) onto one class mod 2^(n-1); lifting gives
    // two classes mod 2^n
    let s = if r.is_even() {
        r / 2
    } else {
        (u128::from(q.q()) * r).div_ceil(2) % upper
    };
    let a = interval_of_residue(s as u64, n).expect("residue below 2^n");
    let b = interval_of_residue((s + upper) as u64, n).expect("residue below 2^n");
    if a.index < b.index {
        [a, b]
    } else {
        [b, a]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TransferGraph {
    depth: u32,
    q: QMap,
    successors: Vec<[u64; 2]>,
}

impl TransferGraph {
    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn q(&self) -> QMap {
        self.q
    }

    pub fn node_count(&self) -> usize {
        self.successors.len()
    }

    pub fn node(&self, index: u64) -> IntervalId {
        IntervalId {
            depth: self.depth,
            index,
        }
    }

    pub fn successors(&self, index: u64) -> [u64; 2] {
        self.successors[index as usize]
    }

    pub fn edges(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.successors
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.iter().map(move |&t| (i as u64, t)))
    }

    /// Dense 0/1 incidence matrix, row = source.
    pub fn matrix(&self) -> Vec<Vec<u8>> {
        let n = self.node_count();
        self.successors
            .iter()
            .map(|s| {
                let mut row = vec![0u8; n];
                for &t in s {
                    row[t as usize] = 1;
                }
                row
            })
            .collect()
    }

    pub fn column_sums(&self) -> Vec<u32> {
        let mut sums = vec![0u32; self.node_count()];
        for (_, t) in self.edges() {
            sums[t as usize] += 1;
        }
        sums
    }

    /// One CSV line per row, entries 0/1.
    pub fn matrix_csv(&self) -> String {
        let mut out = String::new();
        for row in self.matrix() {
            let line: Vec<&str> = row
                .iter()
                .map(|&b| if b == 1 { "1" } else { "0" })
                .collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn transfer_graph(depth: u32, q: QMap) -> Result<TransferGraph> {
    transfer_graph_with_limit(depth, q, DEFAULT_MAX_GRAPH_DEPTH)
}

pub fn transfer_graph_with_limit(depth: u32, q: QMap, max_depth: u32) -> Result<TransferGraph> {
    let max = max_depth.min(30);
    if !(1..=max).contains(&depth) {
        return Err(Error::DepthOutOfRange { depth, min: 1, max });
    }
    let successors = (0..1u64 << depth)
        .map(|k| image_intervals(IntervalId { depth, index: k }, q).map(|c| c.index))
        .collect();
    Ok(TransferGraph {
        depth,
        q,
        successors,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConnectivityReport {
    pub strongly_connected: bool,
    /// gcd of cycle lengths, when strongly connected.
    pub period: Option<u32>,
    /// Least `m` with every entry of the Boolean power `M^m` positive.
    pub primitivity_exponent: Option<u32>,
    /// Least `m` such that node `v` reaches every node in exactly `m` steps.
    pub covering_times: Vec<Option<u32>>,
}

impl ConnectivityReport {
    pub fn max_covering_time(&self) -> Option<u32> {
        self.covering_times
            .iter()
            .try_fold(0u32, |acc, t| t.map(|t| acc.max(t)))
    }
}

fn reach_all(n: usize, next: impl Fn(usize) -> Vec<usize>) -> bool {
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = queue.pop_front() {
        for t in next(v) {
            if !seen[t] {
                seen[t] = true;
                count += 1;
                queue.push_back(t);
            }
        }
    }
    count == n
}

#[derive(Clone, PartialEq, Eq)]
struct BitRow(Vec<u64>);

impl BitRow {
    fn empty(n: usize) -> Self {
        BitRow(vec![0; n.div_ceil(64)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn union(a: &BitRow, b: &BitRow) -> BitRow {
        BitRow(a.0.iter().zip(&b.0).map(|(x, y)| x | y).collect())
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
}

pub fn connectivity_report(graph: &TransferGraph) -> ConnectivityReport {
    let n = graph.node_count();
    let forward = |v: usize| graph.successors[v].iter().map(|&t| t as usize).collect();
    let mut predecessors = vec![Vec::new(); n];
    for (s, t) in graph.edges() {
        predecessors[t as usize].push(s as usize);
    }
    let strongly_connected = reach_all(n, forward) && reach_all(n, |v| predecessors[v].clone());

    let period = strongly_connected.then(|| {
        let mut level = vec![usize::MAX; n];
        level[0] = 0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            for &t in &graph.successors[v] {
                let t = t as usize;
                if level[t] == usize::MAX {
                    level[t] = level[v] + 1;
                    queue.push_back(t);
                }
            }
        }
        graph
            .edges()
            .map(|(s, t)| (level[s as usize] + 1).abs_diff(level[t as usize]))
            .fold(0usize, |acc, d| acc.gcd(&d)) as u32
    });

    // Rows of M^m; M^(m+1)[v] is the union of M^m over v's successors.
    let wielandt = (n - 1) * (n - 1) + 1;
    let cap = if period == Some(1) { wielandt } else { 2 * n };
    let mut rows: Vec<BitRow> = graph
        .successors
        .iter()
        .map(|s| {
            let mut r = BitRow::empty(n);
            for &t in s {
                r.set(t as usize);
            }
            r
        })
        .collect();
    let mut covering_times = vec![None; n];
    let mut primitivity_exponent = None;
    for m in 1..=cap {
        let mut all_full = true;
        for (v, row) in rows.iter().enumerate() {
            if row.count() == n {
                covering_times[v].get_or_insert(m as u32);
            } else {
                all_full = false;
            }
        }
        if all_full {
            primitivity_exponent = Some(m as u32);
            break;
        }
        rows = graph
            .successors
            .iter()
            .map(|[a, b]| BitRow::union(&rows[*a as usize], &rows[*b as usize]))
            .collect();
    }

    ConnectivityReport {
        strongly_connected,
        period,
        primitivity_exponent,
        covering_times,
    }
}

/// Graphviz `digraph` text. Nodes in index order with their branch, edges in
/// (source, target) order, each labelled with the source's branch symbol.
pub fn automaton_export(graph: &TransferGraph) -> String {
    export_dot(graph, true)
}

/// Same layout as [`automaton_export`] without edge labels.
pub fn graph_export(graph: &TransferGraph) -> String {
    export_dot(graph, false)
}

fn export_dot(graph: &TransferGraph, labelled: bool) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph transfer_d{}_q{} {{", graph.depth, graph.q);
    for k in 0..graph.node_count() as u64 {
        let node = graph.node(k);
        let _ = writeln!(out, "  \"{}\" [branch={}];", node.label(), node.branch());
    }
    for (s, t) in graph.edges() {
        let (src, dst) = (graph.node(s), graph.node(t));
        if labelled {
            let _ = writeln!(
                out,
                "  \"{}\" -> \"{}\" [label=\"{}\"];",
                src.label(),
                dst.label(),
                src.branch()
            );
        } else {
            let _ = writeln!(out, "  \"{}\" -> \"{}\";", src.label(), dst.label());
        }
    }
    out.push_str("}\n");
    out
}

/// Every dyadic of depth `<= sample_depth` in the half-open cell, ascending.
fn cell_samples(cell: IntervalId, sample_depth: u32) -> Result<Vec<Dyadic>> {
    if sample_depth <= cell.depth {
        return Err(Error::SampleDepthTooSmall {
            sample_depth,
            depth: cell.depth,
        });
    }
    if sample_depth > 40 {
        return Err(Error::DepthOutOfRange {
            depth: sample_depth,
            min: cell.depth + 1,
            max: 40,
        });
    }
    let shift = sample_depth - cell.depth;
    let start = cell.index << shift;
    let end = (cell.index + 1) << shift;
    Ok((start..end)
        .map(|j| Dyadic::from_parts_unchecked(BigUint::from(j), sample_depth).canonicalize())
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpanReport {
    pub interval: IntervalId,
    pub sample_depth: u32,
    pub samples: usize,
    pub min: Dyadic,
    pub argmin: Dyadic,
    pub max: Dyadic,
    pub argmax: Dyadic,
    pub span: Dyadic,
}

/// Exact extremes of `g` over the sampled cell. Ties go to the smallest x.
pub fn span_measurement(cell: IntervalId, q: QMap, sample_depth: u32) -> Result<SpanReport> {
    let xs = cell_samples(cell, sample_depth)?;
    let mut iter = xs.into_iter();
    let first = iter.next().expect("cells are never empty");
    let y0 = g(&first, q)?;
    let (mut min, mut argmin, mut max, mut argmax) = (y0.clone(), first.clone(), y0, first);
    let mut samples = 1;
    for x in iter {
        let y = g(&x, q)?;
        samples += 1;
        if y < min {
            min = y.clone();
            argmin = x.clone();
        }
        if y > max {
            max = y;
            argmax = x;
        }
    }
    let span = max.abs_diff(&min);
    Ok(SpanReport {
        interval: cell,
        sample_depth,
        samples,
        min,
        argmin,
        max,
        argmax,
        span,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SlopeReport {
    pub interval: IntervalId,
    pub sample_depth: u32,
    pub x0: Dyadic,
    pub y0: Dyadic,
    /// `(x, (g(x) - g(x0)) / (x - x0))` for every other sample, ascending x.
    pub ratios: Vec<(Dyadic, ExactRatio)>,
    /// How often each ratio occurs.
    pub distribution: BTreeMap<String, usize>,
    /// Samples where the ratio is exactly 3/2.
    pub three_halves: Vec<Dyadic>,
}

/// Secant slopes of the `3x+1` conjugate from the cell's minimum point.
pub fn slope_pattern_report(cell: IntervalId, sample_depth: u32) -> Result<SlopeReport> {
    let q = QMap::COLLATZ;
    let span = span_measurement(cell, q, sample_depth)?;
    let x0 = span.argmin;
    let y0 = span.min;
    let three_halves_ratio = ExactRatio::from_fraction(3, 2);
    let mut ratios = Vec::new();
    let mut counts: BTreeMap<ExactRatio, usize> = BTreeMap::new();
    let mut three_halves = Vec::new();
    for x in cell_samples(cell, sample_depth)? {
        if x == x0 {
            continue;
        }
        let ratio = exact_quotient((&g(&x, q)?, &y0), (&x, &x0))?;
        *counts.entry(ratio.clone()).or_default() += 1;
        if ratio == three_halves_ratio {
            three_halves.push(x.clone());
        }
        ratios.push((x, ratio));
    }
    let distribution = counts
        .into_iter()
        .map(|(r, c)| (r.to_string(), c))
        .collect();
    Ok(SlopeReport {
        interval: cell,
        sample_depth,
        x0,
        y0,
        ratios,
        distribution,
        three_halves,
    })
}
