//! Command-line front end: moment JSON in, machine-readable reports out.
//!
//! Every subcommand prints exactly one JSON document on stdout and returns
//! exit code 0 when the question was decided (in either direction), 2 on
//! input or precondition problems, and 3 when the numeric extraction path
//! misses its tolerance.  With `--verbose`, progress notes go to stderr.

use crate::cubic_circular::solve_circular;
use crate::cubic_parabolic::solve_parabolic_cubic;
use crate::error::{Error, Result};
use crate::exactmath::{psd_rank, rat_from_str, rat_to_string, Rat, Scalar};
use crate::measures::{default_tolerance, deviation, synthesize, AtomicMeasure};
use crate::moments::{moment_matrix, MomentSequence, Poly2};
use crate::transforms::{canonicalize, poly_display, CanonicalForm, Mode};
use clap::{Parser, Subcommand, ValueEnum};
use num_traits::Zero;
use serde_json::{json, Map, Value};
use std::io::Read;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "momentcurve",
    about = "Truncated moment problems on cubics that split off a line",
    version
)]
struct Cli {
    /// Progress notes on stderr.
    #[arg(long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a moment sequence has a representing measure.
    Solve {
        /// Curve family of the input coordinates.
        #[arg(long = "type", value_enum, default_value_t = CurveType::Auto)]
        curve_type: CurveType,

        /// Circle parameter of a y + x^2 + y^2 = 0, as num/den.
        #[arg(long, allow_hyphen_values = true)]
        a: Option<String>,

        /// Worker threads for directory input.
        #[arg(long)]
        jobs: Option<usize>,

        /// Moment JSON file, or a directory of them; stdin when omitted.
        input: Option<PathBuf>,
    },

    /// Detect the cubic column relation and reduce it to canonical form.
    Classify {
        /// Moment JSON file; stdin when omitted.
        input: Option<PathBuf>,
    },

    /// Compute exact moments of a rational atomic measure.
    Synth {
        /// Target curve family.
        #[arg(long, value_enum)]
        curve: CurveKind,

        /// Circle parameter, as num/den.
        #[arg(long, allow_hyphen_values = true)]
        a: Option<String>,

        /// Measure JSON file with the atoms.
        #[arg(long = "atoms-file")]
        atoms_file: PathBuf,

        /// Moment degree bound: moments up to total degree 2k.
        #[arg(long)]
        k: usize,
    },

    /// Compare a moment sequence against a measure file.
    Verify {
        /// Measure JSON file.
        #[arg(long = "measure-file")]
        measure_file: PathBuf,

        /// Relative tolerance; defaults to the extraction tolerance.
        #[arg(long)]
        tol: Option<f64>,

        /// Moment JSON file; stdin when omitted.
        input: Option<PathBuf>,
    },

    /// Print the moment matrix and, on request, its block split.
    Matrix {
        /// Include the permuted block decomposition.
        #[arg(long = "print-blocks")]
        print_blocks: bool,

        /// Curve family for the block split.
        #[arg(long = "type", value_enum, default_value_t = CurveType::Auto)]
        curve_type: CurveType,

        /// Circle parameter, as num/den.
        #[arg(long, allow_hyphen_values = true)]
        a: Option<String>,

        /// Moment JSON file; stdin when omitted.
        input: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CurveType {
    Circular,
    Parabolic,
    Auto,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CurveKind {
    Circular,
    Parabolic,
}

/// Entry point used by the binary; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let verbose = cli.verbose;
    match dispatch(cli) {
        Ok((value, code)) => {
            emit(&value);
            code
        }
        Err(e) => {
            if verbose {
                eprintln!("error: {e}");
            }
            emit(&json!({ "error": e.to_string() }));
            e.exit_code()
        }
    }
}

/// Prints one JSON document on stdout, tolerating a closed pipe.
fn emit(value: &Value) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{value}");
}

/// Runs one subcommand; the integer is the process exit code for outcomes
/// that still produce a report, which batch mode uses to surface the worst
/// per-file failure.
fn dispatch(cli: Cli) -> Result<(Value, i32)> {
    let verbose = cli.verbose;
    match cli.command {
        Command::Solve { curve_type, a, jobs, input } => {
            solve_command(curve_type, a, jobs, input, verbose)
        }
        Command::Classify { input } => Ok((classify_command(input, verbose)?, 0)),
        Command::Synth { curve, a, atoms_file, k } => {
            Ok((synth_command(curve, a, &atoms_file, k)?, 0))
        }
        Command::Verify { measure_file, tol, input } => {
            Ok((verify_command(&measure_file, tol, input)?, 0))
        }
        Command::Matrix { print_blocks, curve_type, a, input } => {
            Ok((matrix_command(print_blocks, curve_type, a, input, verbose)?, 0))
        }
    }
}

fn trace(verbose: bool, msg: impl AsRef<str>) {
    if verbose {
        eprintln!("momentcurve: {}", msg.as_ref());
    }
}

// ---------------------------------------------------------------- input --

fn read_input(input: &Option<PathBuf>) -> Result<String> {
    match input {
        Some(path) => std::fs::read_to_string(path).map_err(|e| {
            Error::InvalidInput(format!("cannot read {}: {e}", path.display()))
        }),
        None => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| Error::InvalidInput(format!("cannot read stdin: {e}")))?;
            Ok(buf)
        }
    }
}

fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| {
        Error::InvalidInput(format!(
            "malformed JSON at line {}, column {}: {e}",
            e.line(),
            e.column()
        ))
    })
}

fn parse_rat_value(v: &Value) -> Result<Rat> {
    match v {
        Value::String(s) => rat_from_str(s)
            .ok_or_else(|| Error::InvalidInput(format!("bad rational literal {s:?}"))),
        Value::Number(n) => n
            .as_i64()
            .map(Rat::from_integer_i64)
            .ok_or_else(|| Error::InvalidInput(format!("moment value {n} is not exact"))),
        other => Err(Error::InvalidInput(format!(
            "moment values must be \"num/den\" strings or integers, got {other}"
        ))),
    }
}

trait RatFromI64 {
    fn from_integer_i64(n: i64) -> Rat;
}

impl RatFromI64 for Rat {
    fn from_integer_i64(n: i64) -> Rat {
        Rat::from_integer(n.into())
    }
}

/// Parses `{"k": _, "moments": [{"i", "j", "v"}]}` into a full sequence.
/// Shared with the C ABI, which accepts the same schema.
pub fn parse_moments_str(text: &str) -> Result<MomentSequence<Rat>> {
    let root = parse_json(text)?;
    let k = root
        .get("k")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::InvalidInput("moment JSON needs a positive integer \"k\"".into()))?
        as usize;
    let entries = root
        .get("moments")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::InvalidInput("moment JSON needs a \"moments\" array".into()))?;
    let mut table: std::collections::BTreeMap<(usize, usize), Rat> = Default::default();
    for entry in entries {
        let idx = |name: &str| {
            entry.get(name).and_then(Value::as_u64).map(|v| v as usize).ok_or_else(|| {
                Error::InvalidInput(format!("moment entry is missing integer \"{name}\": {entry}"))
            })
        };
        let i = idx("i")?;
        let j = idx("j")?;
        let v = entry
            .get("v")
            .ok_or_else(|| Error::InvalidInput(format!("moment entry is missing \"v\": {entry}")))?;
        let v = parse_rat_value(v)?;
        if i + j > 2 * k {
            return Err(Error::InvalidInput(format!(
                "moment ({i}, {j}) exceeds total degree {}",
                2 * k
            )));
        }
        if table.insert((i, j), v).is_some() {
            return Err(Error::InvalidInput(format!("duplicate moment ({i}, {j})")));
        }
    }
    let mut missing = Vec::new();
    let seq = MomentSequence::from_fn(k, |i, j| match table.get(&(i, j)) {
        Some(v) => v.clone(),
        None => {
            missing.push((i, j));
            Rat::zero()
        }
    })?;
    if let Some((i, j)) = missing.first() {
        return Err(Error::InvalidInput(format!(
            "moment table is missing {} entries, first ({i}, {j})",
            missing.len()
        )));
    }
    Ok(seq)
}

fn moments_json(seq: &MomentSequence<Rat>) -> Value {
    let moments: Vec<Value> = seq
        .order()
        .iter()
        .map(|(i, j)| {
            json!({ "i": i, "j": j, "v": rat_to_string(seq.get(i, j)) })
        })
        .collect();
    json!({ "k": seq.k(), "moments": moments })
}

// ------------------------------------------------------------- families --

fn parse_circle_param(a: &Option<String>) -> Result<Rat> {
    let s = a.as_ref().ok_or_else(|| {
        Error::InvalidInput("the circular family needs --a <num/den>".into())
    })?;
    let a = rat_from_str(s)
        .ok_or_else(|| Error::InvalidInput(format!("bad circle parameter {s:?}")))?;
    if a.is_zero() {
        return Err(Error::InvalidInput("the circle parameter must be nonzero".into()));
    }
    Ok(a)
}

enum Resolved {
    Circular { seq: MomentSequence<Rat>, a: Rat, tag: Option<&'static str> },
    Parabolic { seq: MomentSequence<Rat>, tag: Option<&'static str> },
}

/// Brings the input into a coordinate system one of the cubic solvers
/// accepts: directly for an explicit `--type`, through classification for
/// `auto`.
fn resolve(
    seq: MomentSequence<Rat>,
    curve_type: CurveType,
    a: &Option<String>,
    verbose: bool,
) -> Result<Resolved> {
    match curve_type {
        CurveType::Circular => Ok(Resolved::Circular {
            seq,
            a: parse_circle_param(a)?,
            tag: None,
        }),
        CurveType::Parabolic => Ok(Resolved::Parabolic { seq, tag: None }),
        CurveType::Auto => {
            let cubic = detect_cubic(&seq)?;
            trace(verbose, format!("detected cubic relation {}", poly_display(&cubic)));
            let canon = canonicalize(&seq, &cubic, Mode::Strict)
                .or_else(|_| canonicalize(&seq, &cubic, Mode::Permissive))?;
            let tag = canon.form.tag();
            trace(verbose, format!("canonical family: {tag}"));
            match &canon.form {
                CanonicalForm::Circular { a } => {
                    let a = a.to_rat().ok_or_else(|| {
                        Error::Precondition(
                            "canonical circle parameter is irrational; solve in canonical coordinates directly".into(),
                        )
                    })?;
                    let seq = canon.rational_sequence().ok_or_else(|| {
                        Error::Precondition(
                            "canonicalized moments are irrational; solve in canonical coordinates directly".into(),
                        )
                    })?;
                    Ok(Resolved::Circular { seq, a, tag: Some(tag) })
                }
                CanonicalForm::Parabolic => {
                    let seq = canon.rational_sequence().ok_or_else(|| {
                        Error::Precondition(
                            "canonicalized moments are irrational; solve in canonical coordinates directly".into(),
                        )
                    })?;
                    Ok(Resolved::Parabolic { seq, tag: Some(tag) })
                }
                other => Err(Error::Precondition(format!(
                    "auto dispatch covers the circular and parabolic families; this sequence is {}",
                    other.tag()
                ))),
            }
        }
    }
}

/// The cubic column relation of the moment matrix: a kernel vector of the
/// columns of degree at most 3, of exact degree 3.
fn detect_cubic(seq: &MomentSequence<Rat>) -> Result<Poly2<Rat>> {
    if seq.k() < 3 {
        return Err(Error::Precondition(format!(
            "curve detection needs k >= 3, got k = {}",
            seq.k()
        )));
    }
    let mm = moment_matrix(seq);
    let rows: Vec<usize> = (0..mm.size()).collect();
    let cols: Vec<usize> = (0..10).collect();
    let restricted = mm.as_mat().submatrix(&rows, &cols);
    let order = crate::moments::MonomialIndex::up_to(seq.k());
    for vec in restricted.kernel_basis() {
        let mut p = Poly2::zero();
        for (pos, c) in vec.iter().enumerate() {
            if !c.is_zero() {
                let (i, j) = order.monomial(pos);
                p.add_term(i, j, c.clone());
            }
        }
        if p.degree() == 3 {
            return Ok(p.monic());
        }
    }
    Err(Error::Precondition(
        "no cubic column relation found; pass --type with the family explicitly".into(),
    ))
}

// ---------------------------------------------------------------- solve --

fn solve_command(
    curve_type: CurveType,
    a: Option<String>,
    jobs: Option<usize>,
    input: Option<PathBuf>,
    verbose: bool,
) -> Result<(Value, i32)> {
    if let Some(path) = &input {
        if path.is_dir() {
            return solve_directory(path, curve_type, &a, jobs, verbose);
        }
    }
    let seq = parse_moments_str(&read_input(&input)?)?;
    Ok((solve_one(seq, curve_type, &a, verbose)?, 0))
}

fn solve_one(
    seq: MomentSequence<Rat>,
    curve_type: CurveType,
    a: &Option<String>,
    verbose: bool,
) -> Result<Value> {
    let resolved = resolve(seq, curve_type, a, verbose)?;
    let (report, tag) = match resolved {
        Resolved::Circular { seq, a, tag } => {
            trace(verbose, format!("solving circular family with a = {}", rat_to_string(&a)));
            (solve_circular(&seq, &a)?, tag)
        }
        Resolved::Parabolic { seq, tag } => {
            trace(verbose, "solving parabolic family");
            (solve_parabolic_cubic(&seq)?, tag)
        }
    };
    let mut value = report.to_json();
    if let (Some(tag), Value::Object(map)) = (tag, &mut value) {
        map.insert("canonical_tag".into(), Value::String(tag.into()));
    }
    Ok(value)
}

fn solve_directory(
    dir: &Path,
    curve_type: CurveType,
    a: &Option<String>,
    jobs: Option<usize>,
    verbose: bool,
) -> Result<(Value, i32)> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no .json files in {}",
            dir.display()
        )));
    }
    let workers = jobs
        .unwrap_or_else(|| {
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        })
        .clamp(1, files.len());
    trace(
        verbose,
        format!("solving {} files with {} worker(s)", files.len(), workers),
    );

    let next = std::sync::atomic::AtomicUsize::new(0);
    let mut slots: Vec<Option<(Value, i32)>> = vec![None; files.len()];
    let slot_refs: Vec<std::sync::Mutex<&mut Option<(Value, i32)>>> =
        slots.iter_mut().map(std::sync::Mutex::new).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if idx >= files.len() {
                    break;
                }
                let outcome = std::fs::read_to_string(&files[idx])
                    .map_err(|e| {
                        Error::InvalidInput(format!(
                            "cannot read {}: {e}",
                            files[idx].display()
                        ))
                    })
                    .and_then(|text| parse_moments_str(&text))
                    .and_then(|seq| solve_one(seq, curve_type, a, false));
                let slot = match outcome {
                    Ok(v) => (v, 0),
                    Err(e) => (json!({ "error": e.to_string() }), e.exit_code()),
                };
                **slot_refs[idx].lock().expect("single writer per slot") = Some(slot);
            });
        }
    });

    let mut out = Map::new();
    let mut worst = 0;
    for (path, slot) in files.iter().zip(slots) {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        let (value, code) = slot.expect("every slot is filled");
        worst = worst.max(code);
        out.insert(name, value);
    }
    Ok((Value::Object(out), worst))
}

// ------------------------------------------------------------- classify --

fn classify_command(input: Option<PathBuf>, verbose: bool) -> Result<Value> {
    let seq = parse_moments_str(&read_input(&input)?)?;
    if verbose {
        if let Ok(cubic) = detect_cubic(&seq) {
            trace(true, format!("detected cubic relation {}", poly_display(&cubic)));
        }
    }
    classify_value(&seq)
}

/// Classification report for a parsed sequence: detected cubic, canonical
/// family, reducing map. Shared with the C ABI.
pub fn classify_value(seq: &MomentSequence<Rat>) -> Result<Value> {
    let cubic = detect_cubic(seq)?;
    let (canon, mode) = match canonicalize(seq, &cubic, Mode::Strict) {
        Ok(c) => (c, "strict"),
        Err(_) => (canonicalize(seq, &cubic, Mode::Permissive)?, "permissive"),
    };
    let params: Vec<Value> = match canon.form.rational_params() {
        Some(rs) => rs.iter().map(|r| Value::String(rat_to_string(r))).collect(),
        None => match &canon.form {
            CanonicalForm::ParallelLines { a, b } => {
                vec![crate::cubic_circular::quad_json(a), crate::cubic_circular::quad_json(b)]
            }
            CanonicalForm::Circular { a }
            | CanonicalForm::Hyperbolic2 { a }
            | CanonicalForm::Hyperbolic3 { a } => vec![crate::cubic_circular::quad_json(a)],
            CanonicalForm::Mixed { a, b, c } => vec![
                crate::cubic_circular::quad_json(a),
                crate::cubic_circular::quad_json(b),
                crate::cubic_circular::quad_json(c),
            ],
            _ => Vec::new(),
        },
    };
    let map = &canon.map;
    let map_json = json!({
        "comp1": [
            crate::cubic_circular::quad_json(&map.a),
            crate::cubic_circular::quad_json(&map.b),
            crate::cubic_circular::quad_json(&map.c),
        ],
        "comp2": [
            crate::cubic_circular::quad_json(&map.d),
            crate::cubic_circular::quad_json(&map.e),
            crate::cubic_circular::quad_json(&map.f),
        ],
    });
    Ok(json!({
        "cubic": poly_display(&cubic),
        "factor": poly_display(&canon.factor),
        "tag": canon.form.tag(),
        "params": params,
        "map": map_json,
        "mode": mode,
    }))
}

// ---------------------------------------------------------------- synth --

fn synth_command(
    curve: CurveKind,
    a: Option<String>,
    atoms_file: &Path,
    k: usize,
) -> Result<Value> {
    let text = std::fs::read_to_string(atoms_file).map_err(|e| {
        Error::InvalidInput(format!("cannot read {}: {e}", atoms_file.display()))
    })?;
    let measure = AtomicMeasure::from_json(&parse_json(&text)?)?;
    let form = match curve {
        CurveKind::Circular => CanonicalForm::Circular {
            a: crate::exactmath::QuadScalar::from_rational(parse_circle_param(&a)?),
        },
        CurveKind::Parabolic => CanonicalForm::Parabolic,
    };
    let seq = synthesize(&form, &measure, k)?;
    Ok(moments_json(&seq))
}

// --------------------------------------------------------------- verify --

fn verify_command(
    measure_file: &Path,
    tol: Option<f64>,
    input: Option<PathBuf>,
) -> Result<Value> {
    let seq = parse_moments_str(&read_input(&input)?)?;
    let text = std::fs::read_to_string(measure_file).map_err(|e| {
        Error::InvalidInput(format!("cannot read {}: {e}", measure_file.display()))
    })?;
    let measure = AtomicMeasure::from_json(&parse_json(&text)?)?;
    let tol = tol.unwrap_or_else(default_tolerance);
    let dev = deviation(&seq, &measure);
    Ok(json!({
        "verified": dev <= tol,
        "deviation": dev,
        "tol": tol,
        "atoms": measure.len(),
    }))
}

// --------------------------------------------------------------- matrix --

fn matrix_command(
    print_blocks: bool,
    curve_type: CurveType,
    a: Option<String>,
    input: Option<PathBuf>,
    verbose: bool,
) -> Result<Value> {
    let seq = parse_moments_str(&read_input(&input)?)?;
    let mm = moment_matrix(&seq);
    let report = psd_rank(&mm);
    let entries: Vec<Vec<String>> = (0..mm.size())
        .map(|i| (0..mm.size()).map(|j| rat_to_string(&mm[(i, j)])).collect())
        .collect();
    let mut out = json!({
        "k": seq.k(),
        "size": mm.size(),
        "rank": report.rank,
        "psd": report.is_psd,
        "entries": entries,
    });

    if print_blocks {
        let resolved = resolve(seq, curve_type, &a, verbose)?;
        let blocks_json = match resolved {
            Resolved::Circular { seq, a, tag } => {
                let family = crate::moments::RgFamily::Circular { a };
                let blocks = crate::cubic_circular::assemble_blocks(&seq, &family)?;
                let work = crate::cubic_circular::compute_work(&blocks);
                json!({
                    "family": tag.unwrap_or("circular"),
                    "permutation": blocks.permutation(),
                    "a22_rank": blocks.a22.rank(),
                    "eta": rat_to_string(&work.eta),
                    "line_block_rank": work.line_block_plain.rank(),
                    "line_block_rank_adjusted": work.line_block.rank(),
                })
            }
            Resolved::Parabolic { seq, tag } => {
                let family = crate::moments::RgFamily::Parabolic;
                let blocks = crate::cubic_circular::assemble_blocks(&seq, &family)?;
                let work = crate::cubic_parabolic::compute_parabolic_work(&seq, &blocks);
                json!({
                    "family": tag.unwrap_or("parabolic"),
                    "permutation": blocks.permutation(),
                    "a22_rank": blocks.a22.rank(),
                    "eta": rat_to_string(&work.eta),
                    "line_block_rank": work.line_block_plain.rank(),
                    "line_block_rank_adjusted": work.line_block.rank(),
                })
            }
        };
        if let Value::Object(map) = &mut out {
            map.insert("blocks".into(), blocks_json);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::{rat, rat_i64};

    fn seq_json(seq: &MomentSequence<Rat>) -> String {
        moments_json(seq).to_string()
    }

    fn parabolic_example() -> MomentSequence<Rat> {
        let atoms: Vec<(Rat, Rat, Rat)> = vec![
            (rat(1, 2), Rat::zero(), Rat::one()),
            (rat_i64(1), rat_i64(1), rat_i64(2)),
            (rat_i64(4), rat_i64(2), rat(2, 5)),
        ];
        let measure = AtomicMeasure::from_rationals(atoms);
        synthesize(&CanonicalForm::Parabolic, &measure, 3).unwrap()
    }

    /// Enough atoms on both components that the only cubic column relation
    /// is the curve itself.
    fn full_rank_parabolic_example() -> MomentSequence<Rat> {
        let mut atoms: Vec<(Rat, Rat, Rat)> = vec![
            (rat(1, 2), Rat::zero(), Rat::one()),
            (rat_i64(3), Rat::zero(), rat(1, 3)),
            (rat_i64(-2), Rat::zero(), rat(3, 4)),
            (rat_i64(5), Rat::zero(), rat_i64(2)),
        ];
        for (s, w) in [
            (rat_i64(1), Rat::one()),
            (rat_i64(-1), rat(1, 2)),
            (rat_i64(2), rat(2, 5)),
            (rat(1, 3), Rat::one()),
            (rat_i64(-2), rat(1, 3)),
            (rat(3, 2), rat(1, 7)),
            (rat(-1, 2), rat(2, 3)),
        ] {
            atoms.push((&s * &s, s, w));
        }
        let measure = AtomicMeasure::from_rationals(atoms);
        synthesize(&CanonicalForm::Parabolic, &measure, 3).unwrap()
    }

    use num_traits::One;

    #[test]
    fn moment_json_round_trips() {
        let seq = parabolic_example();
        let back = parse_moments_str(&seq_json(&seq)).unwrap();
        assert_eq!(back.values(), seq.values());
    }

    #[test]
    fn missing_and_duplicate_moments_are_rejected() {
        let seq = parabolic_example();
        let mut v: Value = serde_json::from_str(&seq_json(&seq)).unwrap();
        let dropped = v["moments"].as_array_mut().unwrap().pop().unwrap();
        let err = parse_moments_str(&v.to_string()).unwrap_err();
        assert!(err.to_string().contains("missing"));

        v["moments"].as_array_mut().unwrap().push(dropped.clone());
        v["moments"].as_array_mut().unwrap().push(dropped);
        let err = parse_moments_str(&v.to_string()).unwrap_err();
        assert!(err.to_string().contains("duplicate"));

        let err = parse_moments_str("{\"k\": 3, \"moments\": [").unwrap_err();
        assert!(err.to_string().contains("line 1"));
    }

    #[test]
    fn cubic_detection_finds_the_parabolic_relation() {
        let seq = full_rank_parabolic_example();
        let cubic = detect_cubic(&seq).unwrap();
        let want = Poly2::from_terms([
            (1, 1, Rat::one()),
            (0, 3, -Rat::one()),
        ]);
        assert!(cubic.proportional_to(&want), "detected {}", poly_display(&cubic));
    }

    #[test]
    fn solve_dispatches_explicitly_and_automatically() {
        let direct =
            solve_one(parabolic_example(), CurveType::Parabolic, &None, false).unwrap();
        assert_eq!(direct["exists"], Value::Bool(true));
        assert!(direct.get("canonical_tag").is_none());

        let auto =
            solve_one(full_rank_parabolic_example(), CurveType::Auto, &None, false).unwrap();
        assert_eq!(auto["exists"], Value::Bool(true));
        assert_eq!(auto["canonical_tag"], Value::String("parabolic".into()));
    }

    #[test]
    fn circle_param_is_demanded_for_the_circular_family() {
        let seq = parabolic_example();
        let err = solve_one(seq, CurveType::Circular, &None, false).unwrap_err();
        assert!(err.to_string().contains("--a"));
        assert_eq!(err.exit_code(), 2);
    }
}
