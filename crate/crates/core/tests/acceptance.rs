//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails or overruns its time limit.

use std::collections::VecDeque;
use std::process::Command;
use std::time::{Duration, Instant};

use collatz_conjugate::collatz::{bernoulli_f, orbit, step_t, OrbitLimits, QMap};
use collatz_conjugate::conjugate::{
    below_diagonal_scan, bernoulli_b, cycle_expansion_product, g, g2_symbolic, g_orbit,
    left_limit_probe, quotient_scan, reached_collatz_cycle, GOrbitLimits,
};
use collatz_conjugate::intervals::{
    connectivity_report, image_intervals, span_measurement, transfer_graph, IntervalId,
};
use collatz_conjugate::{decode_h, encode_h, Dyadic, ExactRatio};
use num_bigint::BigUint;
use rayon::prelude::*;

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

const fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

const CRITERIA: &[Criterion] = &[
    Criterion {
        id: 1,
        name: "coding",
        limit: secs(10),
        run: coding,
    },
    Criterion {
        id: 2,
        name: "conjugacy_commutation",
        limit: secs(60),
        run: commutation,
    },
    Criterion {
        id: 3,
        name: "symbolic_formula",
        limit: secs(60),
        run: symbolic,
    },
    Criterion {
        id: 4,
        name: "quotient_bound",
        limit: secs(30),
        run: quotient_bound,
    },
    Criterion {
        id: 5,
        name: "transfer_structure",
        limit: secs(30),
        run: transfer_structure,
    },
    Criterion {
        id: 6,
        name: "residue_cross_validation",
        limit: secs(30),
        run: residues,
    },
    Criterion {
        id: 7,
        name: "span_convergence",
        limit: secs(30),
        run: span_convergence,
    },
    Criterion {
        id: 8,
        name: "discontinuity",
        limit: secs(10),
        run: discontinuity,
    },
    Criterion {
        id: 9,
        name: "diagonal",
        limit: secs(30),
        run: diagonal,
    },
    Criterion {
        id: 10,
        name: "orbit_conjugacy",
        limit: secs(120),
        run: orbit_conjugacy,
    },
    Criterion {
        id: 11,
        name: "bernoulli_commutation",
        limit: secs(60),
        run: bernoulli,
    },
    Criterion {
        id: 12,
        name: "determinism",
        limit: secs(120),
        run: determinism,
    },
];

fn main() {
    let mut failed = 0;
    for c in CRITERIA {
        let started = Instant::now();
        let outcome = (c.run)();
        let elapsed = started.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > c.limit => Err(format!("{detail}; over time limit")),
            other => other,
        };
        let (status, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "criterion {:>2} {:<26} {status} [{:.2}s / limit {}s] {detail}",
            c.id,
            c.name,
            elapsed.as_secs_f64(),
            c.limit.as_secs()
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        CRITERIA.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

fn q(v: u32) -> QMap {
    QMap::new(v).unwrap()
}

fn d(num: u64, depth: u32) -> Dyadic {
    Dyadic::new(num, depth).unwrap()
}

fn n(v: u64) -> BigUint {
    BigUint::from(v)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// First `m` in the range for which `holds` fails.
fn first_bad(
    range: std::ops::RangeInclusive<u64>,
    holds: impl Fn(u64) -> bool + Sync,
) -> Option<u64> {
    range.into_par_iter().find_first(|&m| !holds(m))
}

/// Bit reversal on machine words: `m` with `L` binary digits becomes
/// `rev(m) / 2^L`.
fn oracle_h(m: u64) -> (u64, u32) {
    let bits = 64 - m.leading_zeros();
    if bits == 0 {
        return (0, 0);
    }
    (m.reverse_bits() >> (64 - bits), bits)
}

/// `g` through word arithmetic: reverse the fraction digits, apply the map,
/// reverse back.
fn oracle_g(num: u64, depth: u32, q: u64) -> Dyadic {
    let m = if depth == 0 {
        0
    } else {
        num.reverse_bits() >> (64 - depth)
    };
    let t = if m % 2 == 0 {
        m / 2
    } else {
        (q * m).div_ceil(2)
    };
    let (num, depth) = oracle_h(t);
    d(num, depth)
}

fn coding() -> Outcome {
    let x = encode_h(&n(11));
    ensure(x == d(13, 4) && x.to_decimal_string() == "0.8125", || {
        format!("encode_h(11) = {x}")
    })?;
    const BITS: u32 = 20;
    let top = (1u64 << BITS) - 1;
    if let Some(m) = first_bad(0..=top, |m| {
        let x = encode_h(&n(m));
        let (num, depth) = oracle_h(m);
        x.num() == &n(num) && x.depth() == depth && decode_h(&x).ok() == Some(n(m))
    }) {
        return Err(format!("natural round trip breaks at m={m}"));
    }
    // every canonical dyadic of depth <= 20 in [0,1) is k/2^20 for some k
    if let Some(k) = first_bad(0..=top, |k| {
        let x = d(k, BITS).canonicalize();
        decode_h(&x).map(|m| encode_h(&m)).ok() == Some(x)
    }) {
        return Err(format!("dyadic round trip breaks at {k}/2^{BITS}"));
    }
    Ok(format!(
        "encode_h(11)=13/2^4=0.8125; round trips exhaustive to 2^{BITS}"
    ))
}

fn commutation() -> Outcome {
    const MAX: u64 = 1_000_000;
    for qv in [3u32, 5, 7] {
        if let Some(m) = first_bad(0..=MAX, |m| {
            let m = n(m);
            g(&encode_h(&m), q(qv)).ok() == Some(encode_h(&step_t(&m, q(qv))))
        }) {
            return Err(format!("q={qv}: h(T(m)) != g(h(m)) at m={m}"));
        }
        if let Some(m) = first_bad(0..=1 << 16, |m| {
            let (num, depth) = oracle_h(m);
            g(&d(num, depth), q(qv)).ok() == Some(oracle_g(num, depth, qv as u64))
        }) {
            return Err(format!(
                "q={qv}: g disagrees with the word oracle at h({m})"
            ));
        }
    }
    Ok(format!("exact for m<={MAX}, q in {{3,5,7}}"))
}

fn symbolic() -> Outcome {
    let worked = g2_symbolic(&Dyadic::from_fraction_digits(&[1, 1]).unwrap()).unwrap();
    ensure(
        worked == Dyadic::from_fraction_digits(&[1, 0, 1]).unwrap(),
        || format!("g2(0.11) = {}", worked.to_binary_string()),
    )?;
    const MAX: u64 = 1_000_000;
    if let Some(i) = first_bad(0..=(MAX - 1) / 2, |i| {
        let x = encode_h(&n(2 * i + 1));
        g2_symbolic(&x).ok() == g(&x, q(3)).ok()
    }) {
        return Err(format!("digit formula disagrees at m={}", 2 * i + 1));
    }
    Ok(format!("g2(0.11)=0.101; agrees for all odd m<{MAX}"))
}

fn quotient_bound() -> Outcome {
    const DEPTH: u32 = 12;
    let scan = quotient_scan(DEPTH, q(3)).map_err(|e| e.to_string())?;
    let two = ExactRatio::from_integer(2);
    let even = &scan.even_branch;
    let odd = &scan.odd_branch;
    let cycle = cycle_expansion_product(DEPTH).map_err(|e| e.to_string())?;
    let detail = format!(
        "g1 quotients in [{}, {}]; g2 min {} at ({}, {}); cycle product {}",
        even.min, even.max, odd.min, odd.min_pair.0, odd.min_pair.1, cycle.product
    );
    let ok = even.min == two
        && even.max == two
        && odd.min >= two
        && cycle.product.abs() >= ExactRatio::from_integer(4);
    ensure(ok, || format!("{detail}; g2 minimum below 2"))?;
    Ok(detail)
}

fn transfer_structure() -> Outcome {
    let depth_two = [
        ("00", ["00", "01"]),
        ("01", ["10", "11"]),
        ("10", ["00", "01"]),
        ("11", ["10", "11"]),
    ];
    let depth2 = transfer_graph(2, q(3)).map_err(|e| e.to_string())?;
    for (from, to) in depth_two {
        let cell = IntervalId::from_label(from).unwrap();
        let succ = depth2
            .successors(cell.index())
            .map(|k| depth2.node(k).label());
        ensure(succ == to, || format!("g(I_{from}) -> {succ:?}"))?;
    }
    const MAX_DEPTH: u32 = 10;
    for depth in 1..=MAX_DEPTH {
        let graph = transfer_graph(depth, q(3)).map_err(|e| e.to_string())?;
        let size = graph.node_count();
        for (row_index, row) in graph.matrix().iter().enumerate() {
            let ones: Vec<usize> = (0..size).filter(|&j| row[j] == 1).collect();
            ensure(ones.len() == 2, || {
                format!("depth {depth} row {row_index} has {} ones", ones.len())
            })?;
            // siblings: same parent, so indices 2p and 2p+1
            ensure(ones[0].is_multiple_of(2) && ones[1] == ones[0] + 1, || {
                format!("depth {depth} row {row_index}: successors {ones:?} not siblings")
            })?;
        }
        ensure(oracle_strongly_connected(&graph.matrix()), || {
            format!("depth {depth}: not strongly connected (BFS oracle)")
        })?;
        ensure(connectivity_report(&graph).strongly_connected, || {
            format!("depth {depth}: connectivity report disagrees")
        })?;
    }
    Ok(format!("depth-2 relations exact; two sibling ones per row and strongly connected for depth<={MAX_DEPTH}"))
}

fn bfs_reaches_all(size: usize, next: impl Fn(usize) -> Vec<usize>) -> bool {
    let mut seen = vec![false; size];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(v) = queue.pop_front() {
        for w in next(v) {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

fn oracle_strongly_connected(matrix: &[Vec<u8>]) -> bool {
    let size = matrix.len();
    bfs_reaches_all(size, |v| (0..size).filter(|&w| matrix[v][w] == 1).collect())
        && bfs_reaches_all(size, |v| (0..size).filter(|&w| matrix[w][v] == 1).collect())
}

fn residues() -> Outcome {
    const MAX: u64 = 100_000;
    const DEPTH: u32 = 8;
    if let Some(m) = first_bad(0..=MAX, |m| {
        let m = n(m);
        let here = IntervalId::containing(&encode_h(&m), DEPTH).unwrap();
        let there = IntervalId::containing(&encode_h(&step_t(&m, q(3))), DEPTH).unwrap();
        image_intervals(here, q(3)).contains(&there)
    }) {
        return Err(format!("image of h({m}) lies outside its predicted cells"));
    }
    Ok(format!("m<={MAX} at depth {DEPTH}"))
}

fn span_convergence() -> Outcome {
    let cell = IntervalId::new(2, 2).unwrap();
    let half = Dyadic::half();
    let mut previous: Option<Dyadic> = None;
    let mut last = String::new();
    for depth in 4..=16u32 {
        let report = span_measurement(cell, q(3), depth).map_err(|e| e.to_string())?;
        if depth <= 12 {
            let oracle = oracle_span(depth);
            ensure(report.span == oracle, || {
                format!(
                    "depth {depth}: span {} but the word oracle gives {oracle}",
                    report.span
                )
            })?;
        }
        if let Some(p) = &previous {
            ensure(&report.span >= p, || {
                format!("span decreases at depth {depth}")
            })?;
        }
        let tolerance = d(1, depth - 4);
        ensure(report.span.abs_diff(&half) <= tolerance, || {
            format!(
                "depth {depth}: span {} not within 2^-{} of 1/2",
                report.span,
                depth - 4
            )
        })?;
        last = format!("span at depth 16 = {}", report.span);
        previous = Some(report.span);
    }
    Ok(format!("monotone for d=4..16; {last}"))
}

/// Span of `g` over the grid points of `[1/2, 3/4)` at the given depth.
fn oracle_span(depth: u32) -> Dyadic {
    let lo = 1u64 << (depth - 1);
    let hi = 3u64 << (depth - 2);
    let ys: Vec<Dyadic> = (lo..hi)
        .map(|k| {
            let x = d(k, depth).canonicalize();
            oracle_g(x.num().try_into().unwrap(), x.depth(), 3)
        })
        .collect();
    let min = ys.iter().min().unwrap();
    let max = ys.iter().max().unwrap();
    max.abs_diff(min)
}

fn discontinuity() -> Outcome {
    const K_MAX: u32 = 48;
    let probe = left_limit_probe(&d(3, 2), K_MAX, q(3)).map_err(|e| e.to_string())?;
    let quarter = d(1, 2);
    for p in probe.points.iter().filter(|p| p.k >= 2) {
        ensure(p.y.abs_diff(&quarter) <= d(1, p.k - 1), || {
            format!("k={}: g2 = {} not within 2^-{} of 1/4", p.k, p.y, p.k - 1)
        })?;
    }
    let tail = &probe.points.last().unwrap().y;
    ensure(probe.value_at_x0 == d(5, 3), || {
        format!("g2(3/4) = {}", probe.value_at_x0)
    })?;
    let jump = probe.value_at_x0.abs_diff(&quarter);
    ensure(jump == d(3, 3), || format!("jump {jump}"))?;
    Ok(format!(
        "g2 -> 1/4 from the left (k={K_MAX}: {tail}); g2(3/4)=5/8; jump 3/8"
    ))
}

fn diagonal() -> Outcome {
    const DEPTH: u32 = 14;
    let s3 = below_diagonal_scan(DEPTH, q(3)).map_err(|e| e.to_string())?;
    ensure(
        s3.above == 0 && s3.on == 0 && s3.violation_count() == 0,
        || format!("q=3: above={} on={}", s3.above, s3.on),
    )?;
    let mut detail = format!("q=3 above=0 below={}", s3.below);
    for qv in [5u32, 7] {
        let s = below_diagonal_scan(DEPTH, q(qv)).map_err(|e| e.to_string())?;
        ensure(s.above > 0, || {
            format!("q={qv}: nothing above the diagonal")
        })?;
        detail.push_str(&format!("; q={qv} above={}", s.above));
    }
    let y = g(&Dyadic::half(), q(5)).map_err(|e| e.to_string())?;
    ensure(y == d(3, 2), || format!("q=5: g2(1/2) = {y}"))?;
    Ok(format!("{detail}; q=5 g2(1/2)=3/4"))
}

fn orbit_conjugacy() -> Outcome {
    const MAX: u64 = 100_000;
    let limits = OrbitLimits::default();
    let g_limits = GOrbitLimits::default();
    let cycle = [n(1), n(2)];
    if let Some(m) = first_bad(1..=MAX, |m| {
        let rec = orbit(&n(m), q(3), &limits);
        let Ok(grec) = g_orbit(&encode_h(&n(m)), q(3), &g_limits) else {
            return false;
        };
        rec.cycle() == Some(&cycle[..])
            && reached_collatz_cycle(&grec)
            && rec.steps_taken == grec.steps_taken
    }) {
        return Err(format!("orbits of {m} and h({m}) disagree"));
    }
    Ok(format!(
        "1<=m<={MAX} reach (1,2) and (1/2,1/4) in equal steps"
    ))
}

fn bernoulli() -> Outcome {
    const MAX: u64 = 1_000_000;
    if let Some(m) = first_bad(0..=MAX, |m| {
        let m = n(m);
        bernoulli_b(&encode_h(&m)).ok() == Some(encode_h(&bernoulli_f(&m)))
    }) {
        return Err(format!("h(f(m)) != B(h(m)) at m={m}"));
    }
    Ok(format!("exact for m<={MAX}"))
}

fn determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("collatz-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let run = |tag: &str| -> Result<(Vec<u8>, Vec<u8>), String> {
        let path = dir.join(format!("report-{tag}.txt"));
        let output = Command::new(env!("CARGO_BIN_EXE_collatz-conjugate"))
            .args(["verify", "--q", "3", "--scale", "small", "--report"])
            .arg(&path)
            .output()
            .map_err(|e| e.to_string())?;
        let file = std::fs::read(&path).map_err(|e| e.to_string())?;
        Ok((output.stdout, file))
    };
    let first = run("a")?;
    let second = run("b")?;
    let _ = std::fs::remove_dir_all(&dir);
    ensure(!first.0.is_empty() && first == second, || {
        "reports differ between runs".into()
    })?;
    Ok(format!(
        "stdout and report file identical ({} bytes)",
        first.1.len()
    ))
}
