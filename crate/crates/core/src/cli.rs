//! Command-line front end. [`run`] returns the process exit code: 0 on
//! success, 1 for a failed check or an orbit without a cycle, 2 for usage
//! and input errors.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_traits::One;

use crate::analysis::{sample_window, verify_all, Scales};
use crate::coding::{decode_h, encode_h};
use crate::collatz::{orbit, OrbitLimits, OrbitRecord, QMap, Verdict, DEFAULT_KEEP};
use crate::conjugate::{g_orbit, GOrbitLimits};
use crate::dyadic::Dyadic;
use crate::intervals::{automaton_export, connectivity_report, graph_export, transfer_graph};

const EXIT_OK: i32 = 0;
const EXIT_FAILED: i32 = 1;
const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "collatz-conjugate",
    version,
    about = "Exact bit-reversal conjugate of the qx+1 map on [0,1]"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Code a natural number as a dyadic fraction.
    Encode {
        #[arg(value_parser = parse_natural)]
        value: BigUint,
        #[arg(long, value_enum, default_value_t = Format::Both)]
        format: Format,
    },
    /// Recover the natural number coded by a dyadic in [0,1).
    Decode {
        #[arg(value_parser = parse_dyadic)]
        value: Dyadic,
        #[arg(long, value_enum, default_value_t = Format::Both)]
        format: Format,
    },
    /// Iterate the integer map from a natural number.
    Orbit {
        #[arg(value_parser = parse_natural)]
        start: BigUint,
        #[arg(long, default_value = "3", value_parser = parse_q)]
        q: QMap,
        #[arg(long, default_value_t = crate::collatz::DEFAULT_MAX_STEPS)]
        max_steps: usize,
        /// Stop once a value exceeds this; `2^k` or a decimal integer.
        #[arg(long, default_value = "2^256", value_parser = parse_bound)]
        magnitude_bound: BigUint,
    },
    /// Iterate the conjugate map from a dyadic in [0,1).
    GOrbit {
        #[arg(value_parser = parse_dyadic)]
        start: Dyadic,
        #[arg(long, default_value = "3", value_parser = parse_q)]
        q: QMap,
        #[arg(long, default_value_t = crate::collatz::DEFAULT_MAX_STEPS)]
        max_steps: usize,
        /// Stop once a value needs more binary digits than this.
        #[arg(long, default_value_t = crate::collatz::DEFAULT_MAGNITUDE_BITS)]
        max_depth: u32,
    },
    /// Transfer graph of the depth-n cells and its connectivity.
    Intervals {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..=14))]
        depth: u32,
        #[arg(long, default_value = "3", value_parser = parse_q)]
        q: QMap,
        #[arg(long, value_enum)]
        emit: Option<Emit>,
        /// Write the emitted matrix or graph here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// CSV of (x, g(x)) for the dyadics of a window.
    PlotData {
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], value_parser = parse_dyadic, required = true)]
        window: Vec<Dyadic>,
        #[arg(long, default_value_t = 10)]
        sample_depth: u32,
        #[arg(long, default_value = "3", value_parser = parse_q)]
        q: QMap,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every check and print the report.
    Verify {
        #[arg(long, default_value = "3", value_parser = parse_q)]
        q: QMap,
        #[arg(long, value_enum, default_value_t = Scale::Full)]
        scale: Scale,
        /// Also write the report to this file.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        report_format: ReportFormat,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    /// `num/2^depth (decimal)`
    Both,
    Exact,
    Decimal,
    Binary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Emit {
    Matrix,
    Graph,
    Automaton,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Scale {
    Small,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

fn parse_natural(s: &str) -> Result<BigUint, String> {
    s.trim()
        .parse()
        .map_err(|_| format!("`{s}` is not a natural number"))
}

fn parse_dyadic(s: &str) -> Result<Dyadic, String> {
    s.parse().map_err(|e: crate::Error| e.to_string())
}

fn parse_q(s: &str) -> Result<QMap, String> {
    let q: u32 = s
        .trim()
        .parse()
        .map_err(|_| format!("`{s}` is not an integer"))?;
    QMap::new(q).map_err(|e| e.to_string())
}

fn parse_bound(s: &str) -> Result<BigUint, String> {
    match s.trim().strip_prefix("2^") {
        Some(exp) => exp
            .parse::<u32>()
            .map(|k| BigUint::one() << k)
            .map_err(|_| format!("`{s}` has a bad exponent")),
        None => parse_natural(s),
    }
}

/// Parses `args` (program name first) and runs the command, writing normal
/// output to `out` and diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(message) => {
            let _ = writeln!(err, "error: {message}");
            EXIT_USAGE
        }
    }
}

type Outcome = Result<i32, String>;

fn io_err(e: io::Error) -> String {
    e.to_string()
}

fn execute(command: Command, out: &mut dyn Write) -> Outcome {
    match command {
        Command::Encode { value, format } => {
            let x = encode_h(&value);
            let text = match format {
                Format::Both => format!("{x} ({})", x.to_decimal_string()),
                Format::Exact => x.to_string(),
                Format::Decimal => x.to_decimal_string(),
                Format::Binary => format!("{}b", x.to_binary_string()),
            };
            writeln!(out, "{text}").map_err(io_err)?;
            Ok(EXIT_OK)
        }
        Command::Decode { value, format } => {
            let m = decode_h(&value).map_err(|e| e.to_string())?;
            let text = match format {
                Format::Binary => format!("{m:b}"),
                _ => m.to_string(),
            };
            writeln!(out, "{text}").map_err(io_err)?;
            Ok(EXIT_OK)
        }
        Command::Orbit {
            start,
            q,
            max_steps,
            magnitude_bound,
        } => {
            let limits = OrbitLimits {
                max_steps,
                magnitude_bound,
                keep: DEFAULT_KEEP,
            };
            let record = orbit(&start, q, &limits);
            write_orbit(out, &record, |v| v.to_string(), ",")
        }
        Command::GOrbit {
            start,
            q,
            max_steps,
            max_depth,
        } => {
            let limits = GOrbitLimits {
                max_steps,
                max_depth,
                keep: DEFAULT_KEEP,
            };
            let record = g_orbit(&start, q, &limits).map_err(|e| e.to_string())?;
            write_orbit(out, &record, |v| v.to_decimal_string(), ", ")
        }
        Command::Intervals {
            depth,
            q,
            emit,
            out: path,
        } => intervals(out, depth, q, emit, path.as_deref()),
        Command::PlotData {
            window,
            sample_depth,
            q,
            out: path,
        } => plot_data(
            out,
            &window[0],
            &window[1],
            sample_depth,
            q,
            path.as_deref(),
        ),
        Command::Verify {
            q,
            scale,
            report,
            report_format,
        } => {
            let scales = match scale {
                Scale::Small => Scales::small(),
                Scale::Full => Scales::full(),
            };
            let result = verify_all(q, &scales);
            let text = result.to_text();
            out.write_all(text.as_bytes()).map_err(io_err)?;
            if let Some(path) = report {
                let body = match report_format {
                    ReportFormat::Text => text,
                    ReportFormat::Json => result.to_json() + "\n",
                };
                fs::write(&path, body).map_err(|e| format!("{}: {e}", path.display()))?;
            }
            Ok(if result.passed() {
                EXIT_OK
            } else {
                EXIT_FAILED
            })
        }
    }
}

fn write_orbit<V>(
    out: &mut dyn Write,
    record: &OrbitRecord<V>,
    show: impl Fn(&V) -> String,
    cycle_sep: &str,
) -> Outcome {
    let mut line: Vec<String> = record.trajectory.iter().map(&show).collect();
    if record.is_truncated() {
        line.push("...".into());
    }
    let verdict = match &record.verdict {
        Verdict::ReachedCycle { cycle, .. } => {
            let members: Vec<String> = cycle.iter().map(&show).collect();
            format!(
                "cycle({}) in {} steps",
                members.join(cycle_sep),
                record.steps_taken
            )
        }
        Verdict::Cutoff { max_steps } => {
            format!(
                "cutoff after {max_steps} steps, peak {}",
                show(&record.peak)
            )
        }
        Verdict::MagnitudeBound { step } => {
            format!(
                "magnitude bound exceeded at step {step}, peak {}",
                show(&record.peak)
            )
        }
    };
    writeln!(out, "{} | {verdict}", line.join(" ")).map_err(io_err)?;
    for (step, v) in &record.checkpoints {
        writeln!(out, "checkpoint {step}: {}", show(v)).map_err(io_err)?;
    }
    Ok(if record.is_cycle() {
        EXIT_OK
    } else {
        EXIT_FAILED
    })
}

fn emit_to(out: &mut dyn Write, path: Option<&Path>, body: &str) -> Result<(), String> {
    match path {
        Some(path) => fs::write(path, body).map_err(|e| format!("{}: {e}", path.display())),
        None => out.write_all(body.as_bytes()).map_err(io_err),
    }
}

fn intervals(
    out: &mut dyn Write,
    depth: u32,
    q: QMap,
    emit: Option<Emit>,
    path: Option<&Path>,
) -> Outcome {
    let graph = transfer_graph(depth, q).map_err(|e| e.to_string())?;
    if let Some(emit) = emit {
        let body = match emit {
            Emit::Matrix => graph.matrix_csv(),
            Emit::Graph => graph_export(&graph),
            Emit::Automaton => automaton_export(&graph),
        };
        emit_to(out, path, &body)?;
    }
    let report = connectivity_report(&graph);
    let show = |v: Option<u32>| v.map_or_else(|| "none".to_string(), |v| v.to_string());
    let summary = format!(
        "depth: {depth}\nq: {q}\nnodes: {}\nedges: {}\nresidue_convention: I_w <-> m = rev(w) mod 2^{depth}\nstrongly_connected: {}\nperiod: {}\nprimitivity_exponent: {}\nmax_covering_time: {}\n",
        graph.node_count(),
        graph.edges().count(),
        report.strongly_connected,
        show(report.period),
        show(report.primitivity_exponent),
        show(report.max_covering_time()),
    );
    out.write_all(summary.as_bytes()).map_err(io_err)?;
    Ok(EXIT_OK)
}

fn plot_data(
    out: &mut dyn Write,
    lo: &Dyadic,
    hi: &Dyadic,
    sample_depth: u32,
    q: QMap,
    path: Option<&Path>,
) -> Outcome {
    let window = sample_window(lo, hi, sample_depth, q).map_err(|e| e.to_string())?;
    let mut writer = csv::Writer::from_writer(Vec::new());
    let row_err = |e: csv::Error| e.to_string();
    writer
        .write_record(["x_num", "x_depth", "x_float", "y_num", "y_depth", "y_float"])
        .map_err(row_err)?;
    for (x, y) in &window.points {
        let (x, y) = (x.canonicalize(), y.canonicalize());
        writer
            .write_record([
                x.num().to_string(),
                x.depth().to_string(),
                format!("{:.16e}", x.to_f64()),
                y.num().to_string(),
                y.depth().to_string(),
                format!("{:.16e}", y.to_f64()),
            ])
            .map_err(row_err)?;
    }
    let bytes = writer.into_inner().map_err(|e| e.to_string())?;
    emit_to(out, path, &String::from_utf8(bytes).expect("ascii csv"))?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("collatz-conjugate").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn encode_formats() {
        assert_eq!(
            call(&["encode", "11"]),
            (0, "13/2^4 (0.8125)\n".into(), String::new())
        );
        assert_eq!(call(&["encode", "0"]).1, "0/2^0 (0)\n");
        assert_eq!(call(&["encode", "11", "--format", "binary"]).1, "0.1101b\n");
        assert_eq!(call(&["encode", "-4"]).0, 2);
    }

    #[test]
    fn decode_literals() {
        assert_eq!(call(&["decode", "0.1101b"]).1, "11\n");
        assert_eq!(call(&["decode", "13/2^4"]).1, "11\n");
        assert_eq!(call(&["decode", "0.8125"]).1, "11\n");
        assert_eq!(
            call(&["decode", "0.1101b", "--format", "binary"]).1,
            "1011\n"
        );
        assert_eq!(call(&["decode", "1"]).0, 2);
        assert_eq!(call(&["decode", "0.3"]).0, 2);
        assert_eq!(call(&["decode", "0.12b"]).0, 2);
    }

    #[test]
    fn orbit_lines() {
        let (code, out, _) = call(&["orbit", "3", "--q", "3"]);
        assert_eq!(code, 0);
        assert_eq!(out, "3 5 8 4 2 1 | cycle(1,2) in 6 steps\n");
        let (code, out, _) = call(&["g-orbit", "0.11b"]);
        assert_eq!(code, 0);
        assert!(out.ends_with("| cycle(0.5, 0.25) in 6 steps\n"), "{out}");
        let (code, out, _) = call(&["orbit", "7", "--q", "5", "--max-steps", "1000"]);
        assert_eq!(code, 1);
        assert!(out.contains("peak "), "{out}");
        assert_eq!(call(&["orbit", "3", "--q", "4"]).0, 2);
    }

    #[test]
    fn intervals_matrix_and_depth_range() {
        let (code, out, _) = call(&["intervals", "--depth", "2", "--emit", "matrix"]);
        assert_eq!(code, 0);
        assert!(
            out.starts_with("1,1,0,0\n0,0,1,1\n1,1,0,0\n0,0,1,1\n"),
            "{out}"
        );
        assert!(out.contains("strongly_connected: true"));
        assert_eq!(call(&["intervals", "--depth", "0"]).0, 2);
        assert_eq!(call(&["intervals", "--depth", "15"]).0, 2);
    }

    #[test]
    fn plot_data_csv() {
        let (code, out, _) = call(&["plot-data", "--window", "0", "1", "--sample-depth", "4"]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "x_num,x_depth,x_float,y_num,y_depth,y_float");
        assert_eq!(lines.len(), 17);
        assert_eq!(
            lines[1],
            "0,0,0.0000000000000000e0,0,0,0.0000000000000000e0"
        );
        assert_eq!(call(&["plot-data", "--window", "0.5", "0.5"]).0, 2);
        assert_eq!(call(&["plot-data", "--window", "0.5"]).0, 2);
    }

    #[test]
    fn usage_errors_and_help() {
        assert_eq!(call(&["verify", "--badflag"]).0, 2);
        assert_eq!(call(&[]).0, 2);
        let (code, out, _) = call(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("plot-data"));
    }
}
