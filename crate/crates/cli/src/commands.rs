use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde_json::json;
use vdb_core::channel::{
    analytic_single_error, exact_distortion, ingest_trace, simulate as run_simulation, Channel,
    EmpiricalPmf, SimulationOptions, SimulationReport, TraceOptions, UpsetModel, ValueSource,
};
use vdb_core::codegen::{
    solve_iid, solve_perbit, verify_table, CodeTable, SolveOptions, TableMode, TailConstraint,
};
use vdb_core::combinatorics::{bounds_dataset, write_bounds_csv};
use vdb_core::setgen::{sets_bruteforce, sets_fast};

use crate::{Failure, Run};

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

/// Writes to `out`, or stdout when absent. Returns the files written.
fn emit(out: Option<&PathBuf>, text: &str) -> Result<Vec<PathBuf>, Failure> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::io(path, e))?;
            Ok(vec![path.clone()])
        }
        None => {
            print!("{text}");
            Ok(Vec::new())
        }
    }
}

fn load_constraint(path: &Path, allow_increasing: bool) -> Result<TailConstraint, Failure> {
    TailConstraint::parse(&read(path)?, !allow_increasing)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_table(path: &Path) -> Result<CodeTable, Failure> {
    CodeTable::parse(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn path_str(p: &Option<PathBuf>) -> serde_json::Value {
    json!(p.as_ref().map(|p| p.display().to_string()))
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetMethod {
    Brute,
    Fast,
    Both,
}

#[derive(Args, Debug)]
pub struct SetsArgs {
    #[arg(long = "L")]
    pub word_length: u32,
    #[arg(long)]
    pub k: u32,
    #[arg(long, value_enum, default_value = "fast")]
    pub method: SetMethod,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn sets(a: &SetsArgs) -> Result<Run, Failure> {
    let (l, k) = (a.word_length, a.k);
    let family = match a.method {
        SetMethod::Brute => sets_bruteforce(l, k)?,
        SetMethod::Fast => sets_fast(l, k)?,
        SetMethod::Both => {
            let fast = sets_fast(l, k)?;
            if sets_bruteforce(l, k)? != fast {
                return Err(Failure::Mismatch(format!(
                    "fast and brute-force sets differ for L={l}, k={k}"
                )));
            }
            fast
        }
    };
    let outputs = emit(a.out.as_ref(), &family.to_text())?;
    Ok(Run {
        params: json!({ "L": l, "k": k, "method": format!("{:?}", a.method).to_lowercase(), "out": path_str(&a.out) }),
        seed: None,
        inputs: Vec::new(),
        outputs,
        pass: true,
    })
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    #[arg(long = "L")]
    pub word_length: u32,
    #[arg(long)]
    pub k: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn bounds(a: &BoundsArgs) -> Result<Run, Failure> {
    let rows = bounds_dataset(a.word_length, a.k)?;
    let mut csv = Vec::new();
    write_bounds_csv(&rows, &mut csv).expect("writing to memory");
    let outputs = emit(a.out.as_ref(), &String::from_utf8(csv).expect("ascii csv"))?;
    if let Some(r) = rows.iter().find(|r| !r.is_ordered()) {
        return Err(Failure::Mismatch(format!(
            "bounds out of order at m = {}",
            r.m
        )));
    }
    Ok(Run {
        params: json!({ "L": a.word_length, "k": a.k, "out": path_str(&a.out) }),
        seed: None,
        inputs: Vec::new(),
        outputs,
        pass: true,
    })
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum EncodeMode {
    Iid,
    Perbit,
}

#[derive(Args, Debug)]
pub struct EncodeArgs {
    #[arg(long)]
    pub constraint: PathBuf,
    #[arg(long, value_enum, default_value = "iid")]
    pub mode: EncodeMode,
    #[arg(long, default_value_t = SolveOptions::default().tol)]
    pub tol: f64,
    #[arg(long, default_value_t = SolveOptions::default().grid)]
    pub grid: f64,
    #[arg(long, default_value_t = SolveOptions::default().max_sweeps)]
    pub max_sweeps: usize,
    /// Accept constraint files whose bounds increase with m.
    #[arg(long)]
    pub allow_increasing: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn encode(a: &EncodeArgs) -> Result<Run, Failure> {
    let c = load_constraint(&a.constraint, a.allow_increasing)?;
    let sets = sets_fast(c.word_length(), c.max_errors())?;
    let opts = SolveOptions {
        tol: a.tol,
        grid: a.grid,
        max_sweeps: a.max_sweeps,
    };
    let table = match a.mode {
        EncodeMode::Iid => solve_iid(&sets, &c, &opts)?,
        EncodeMode::Perbit => solve_perbit(&sets, &c, &opts)?,
    };
    let outputs = emit(a.out.as_ref(), &table.to_text())?;
    if a.out.is_some() {
        match table.mode() {
            TableMode::Iid => println!("p={}", table.probabilities()[0]),
            TableMode::PerBit => println!("p={:?}", table.probabilities()),
        }
    }
    Ok(Run {
        params: json!({
            "constraint": a.constraint.display().to_string(),
            "mode": format!("{:?}", a.mode).to_lowercase(),
            "tol": a.tol,
            "grid": a.grid,
            "max_sweeps": a.max_sweeps,
            "allow_increasing": a.allow_increasing,
            "out": path_str(&a.out),
        }),
        seed: None,
        inputs: vec![a.constraint.clone()],
        outputs,
        pass: true,
    })
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub constraint: PathBuf,
    #[arg(long)]
    pub table: PathBuf,
    #[arg(long)]
    pub allow_increasing: bool,
    /// Also write the `m,margin` rows here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn verify(a: &VerifyArgs) -> Result<Run, Failure> {
    let c = load_constraint(&a.constraint, a.allow_increasing)?;
    let table = load_table(&a.table)?;
    let sets = sets_fast(c.word_length(), c.max_errors())?;
    let report = verify_table(&sets, &c, &table)?;
    let mut text = String::from("m,margin\n");
    for (m, margin) in &report.margins {
        text.push_str(&format!("{m},{margin}\n"));
    }
    let outputs = emit(a.out.as_ref(), &text)?;
    match report.worst() {
        Some((m, margin)) if !report.pass => println!("fail: worst margin {margin} at m = {m}"),
        Some((m, margin)) => println!("pass: worst margin {margin} at m = {m}"),
        None => println!("pass"),
    }
    Ok(Run {
        params: json!({
            "constraint": a.constraint.display().to_string(),
            "table": a.table.display().to_string(),
            "allow_increasing": a.allow_increasing,
            "out": path_str(&a.out),
        }),
        seed: None,
        inputs: vec![a.constraint.clone(), a.table.clone()],
        outputs,
        pass: report.pass,
    })
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long)]
    pub table: PathBuf,
    #[arg(long)]
    pub constraint: PathBuf,
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Transmitted-value PMF (`value,mass` CSV); uniform when absent.
    #[arg(long)]
    pub pmf: Option<PathBuf>,
    /// Reject flip patterns heavier than k and redraw.
    #[arg(long)]
    pub cap_weight: bool,
    #[arg(long)]
    pub allow_increasing: bool,
    /// Distribution CSV (`m,mass,tail`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-m check rows for both error-induction modes.
    #[arg(long)]
    pub checks: Option<PathBuf>,
}

fn mode_name(capped: bool) -> &'static str {
    if capped {
        "capped"
    } else {
        "independent"
    }
}

pub fn simulate(a: &SimulateArgs) -> Result<Run, Failure> {
    let c = load_constraint(&a.constraint, a.allow_increasing)?;
    let table = load_table(&a.table)?;
    let mut inputs = vec![a.table.clone(), a.constraint.clone()];
    let source = match &a.pmf {
        Some(path) => {
            inputs.push(path.clone());
            let pmf = EmpiricalPmf::parse_csv(&read(path)?, Some(table.word_length()))
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            ValueSource::Empirical(pmf)
        }
        None => ValueSource::Uniform,
    };
    let run = |capped: bool| {
        let opts = SimulationOptions {
            trials: a.trials,
            seed: a.seed,
            cap_weight: capped,
        };
        run_simulation(&table, &c, &opts, &source)
    };
    // the other error-induction mode is reported alongside the selected one
    let selected = run(a.cap_weight)?;
    let other = run(!a.cap_weight);
    let mut reports: Vec<(bool, &SimulationReport)> = vec![(a.cap_weight, &selected)];
    match &other {
        Ok(r) => reports.push((!a.cap_weight, r)),
        Err(e) => println!("{}: not run: {e}", mode_name(!a.cap_weight)),
    }

    let mut distribution = selected.distribution.to_csv();
    distribution.insert_str(0, &format!("# mode={}\n", mode_name(a.cap_weight)));
    let mut outputs = emit(a.out.as_ref(), &distribution)?;
    if let Some(path) = &a.checks {
        let mut text = String::new();
        for (capped, r) in &reports {
            for (i, line) in r.checks_csv().lines().enumerate() {
                match i {
                    0 if text.is_empty() => text.push_str(&format!("mode,{line}\n")),
                    0 => {}
                    _ => text.push_str(&format!("{},{line}\n", mode_name(*capped))),
                }
            }
        }
        fs::write(path, text).map_err(|e| Failure::io(path, e))?;
        outputs.push(path.clone());
    }
    for (capped, r) in &reports {
        let verdict = if r.pass { "pass" } else { "fail" };
        let failures: Vec<u64> = r.failures().map(|f| f.m).collect();
        if failures.is_empty() {
            println!("{}: {verdict}", mode_name(*capped));
        } else {
            println!("{}: {verdict} at m = {failures:?}", mode_name(*capped));
        }
    }
    Ok(Run {
        params: json!({
            "table": a.table.display().to_string(),
            "constraint": a.constraint.display().to_string(),
            "trials": a.trials,
            "seed": a.seed,
            "pmf": path_str(&a.pmf),
            "cap_weight": a.cap_weight,
            "allow_increasing": a.allow_increasing,
            "out": path_str(&a.out),
            "checks": path_str(&a.checks),
            "rng": vdb_core::channel::RNG_ID,
        }),
        seed: Some(a.seed),
        inputs,
        outputs,
        pass: selected.pass,
    })
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistortMode {
    Exact,
    SingleError,
}

#[derive(Args, Debug)]
pub struct DistortArgs {
    /// Transmitted-value PMF; uniform when absent.
    #[arg(long)]
    pub pmf: Option<PathBuf>,
    /// `vdb-upsets-v1` file.
    #[arg(long)]
    pub upsets: PathBuf,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: DistortMode,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Single-error mode: `m,analytic,oracle,divergence` rows.
    #[arg(long)]
    pub divergence: Option<PathBuf>,
}

pub fn distort(a: &DistortArgs) -> Result<Run, Failure> {
    let upsets = UpsetModel::parse(&read(&a.upsets)?)
        .map_err(|e| Failure::Usage(format!("{}: {e}", a.upsets.display())))?;
    let l = upsets.word_length();
    let mut inputs = vec![a.upsets.clone()];
    let pmf = match &a.pmf {
        Some(path) => {
            inputs.push(path.clone());
            EmpiricalPmf::parse_csv(&read(path)?, None)
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        None => EmpiricalPmf::uniform(l)?,
    };
    let mut outputs = Vec::new();
    match a.mode {
        DistortMode::Exact => {
            let d = exact_distortion(&Channel::Forced(upsets), &ValueSource::Empirical(pmf))?;
            outputs.extend(emit(a.out.as_ref(), &d.to_csv())?);
        }
        DistortMode::SingleError => {
            let r = analytic_single_error(&pmf, &upsets)?;
            outputs.extend(emit(a.out.as_ref(), &r.analytic.to_csv())?);
            let mut text = String::from("m,analytic,oracle,divergence\n");
            for ((m, div), (a_m, o_m)) in r
                .divergence
                .iter()
                .zip(r.analytic.mass.iter().zip(&r.oracle.mass))
            {
                text.push_str(&format!("{m},{a_m},{o_m},{div}\n"));
            }
            if let Some(path) = &a.divergence {
                fs::write(path, &text).map_err(|e| Failure::io(path, e))?;
                outputs.push(path.clone());
            }
            let verdict = if r.agrees { "agrees" } else { "diverges" };
            // the analytic form is reported, not enforced
            println!(
                "analytic form {verdict} with single-upset enumeration: max divergence {}",
                r.max_divergence
            );
        }
    }
    Ok(Run {
        params: json!({
            "pmf": path_str(&a.pmf),
            "upsets": a.upsets.display().to_string(),
            "mode": format!("{:?}", a.mode).to_lowercase(),
            "out": path_str(&a.out),
            "divergence": path_str(&a.divergence),
        }),
        seed: None,
        inputs,
        outputs,
        pass: true,
    })
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Zero-based column index.
    #[arg(long, default_value_t = 0)]
    pub column: usize,
    #[arg(long)]
    pub bits: u32,
    /// Added to each sample before the range check.
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    pub offset: i64,
    /// Skip the first row.
    #[arg(long)]
    pub header: bool,
    /// Saturate out-of-range samples instead of failing.
    #[arg(long)]
    pub clamp: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn ingest(a: &IngestArgs) -> Result<Run, Failure> {
    let file = File::open(&a.input).map_err(|e| Failure::io(&a.input, e))?;
    let opts = TraceOptions {
        column: a.column,
        word_length: a.bits,
        offset: a.offset,
        has_header: a.header,
        clamp: a.clamp,
    };
    let pmf = ingest_trace(BufReader::new(file), &opts)
        .map_err(|e| Failure::Usage(format!("{}: {e}", a.input.display())))?;
    let outputs = emit(a.out.as_ref(), &pmf.to_csv())?;
    if a.out.is_some() {
        println!(
            "{} samples, {} distinct values, mode {}",
            pmf.sample_count(),
            pmf.iter().count(),
            pmf.mode().unwrap_or_default()
        );
    }
    Ok(Run {
        params: json!({
            "input": a.input.display().to_string(),
            "column": a.column,
            "bits": a.bits,
            "offset": a.offset,
            "header": a.header,
            "clamp": a.clamp,
            "out": path_str(&a.out),
        }),
        seed: None,
        inputs: vec![a.input.clone()],
        outputs,
        pass: true,
    })
}
