//! Acceptance run: one line per criterion, exit status 1 on any unexpected
//! result.
//!
//! A criterion marked `expected_fail` contains a sub-claim that does not
//! hold mathematically; it is still evaluated and printed as FAIL with its
//! numbers, and the run fails if it ever starts passing.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vdb_core::channel::{
    analytic_single_error, exact_distortion, placement_mass, simulate, Channel, EmpiricalPmf,
    SimulationOptions, UpsetModel, ValueSource,
};
use vdb_core::codegen::{
    constraint_lhs, placement_probability, solve_iid, solve_perbit, CodeTable, SolveOptions,
    TailConstraint,
};
use vdb_core::combinatorics::{
    bounds_dataset, divisibility_report, y_star_table, DivisibilityClass,
};
use vdb_core::setgen::{sets_bruteforce, sets_fast};

const THREE_BIT_CONSTRAINT: &str =
    "format=vdb-constraint-v1\nL=3\nk=2\n1,22/30\n2,14/30\n3,6/30\n4,4/30\n5,2/30\n6,2/30\n";
const RECIPROCAL: &str = "format=vdb-constraint-v1\nL=3\nk=3\nform=reciprocal\n";

struct Outcome {
    /// Every checked sub-claim that is expected to hold did hold.
    ok: bool,
    /// Result of the sub-claim known not to hold, where there is one.
    known_gap_holds: Option<bool>,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        known_gap_holds: None,
        detail: detail.into(),
    }
}

struct Criterion {
    id: &'static str,
    limit: Duration,
    /// `Some(reason)` when a sub-claim is known not to hold.
    expected_fail: Option<&'static str>,
    run: fn(&Path) -> Outcome,
}

fn vdbcode(dir: &Path, args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_vdbcode"))
        .args(args)
        .arg("--no-manifest")
        .current_dir(dir)
        .output()
        .expect("vdbcode runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned() + &String::from_utf8_lossy(&out.stderr),
    )
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

fn table_line(text: &str, key: &str) -> Option<String> {
    text.lines()
        .find_map(|l| l.strip_prefix(key).map(|v| v.trim().to_string()))
}

fn iid_regression(dir: &Path) -> Outcome {
    write(dir, "c.txt", THREE_BIT_CONSTRAINT);
    let (code, out) = vdbcode(
        dir,
        &[
            "encode",
            "--constraint",
            "c.txt",
            "--mode",
            "iid",
            "--out",
            "t.txt",
        ],
    );
    if code != 0 {
        return outcome(false, format!("encode exited {code}: {out}"));
    }
    let text = fs::read_to_string(dir.join("t.txt")).unwrap();
    let p: f64 = table_line(&text, "p=")
        .and_then(|v| v.parse().ok())
        .unwrap_or(f64::NAN);
    outcome((p - 0.2180).abs() <= 1e-3, format!("p = {p:.6}"))
}

fn per_bit_feasibility(dir: &Path) -> Outcome {
    write(dir, "c.txt", THREE_BIT_CONSTRAINT);
    write(
        dir,
        "reference.txt",
        "format=vdb-table-v1\nL=3\nk=2\nmode=perbit\np_0=0.4485\np_1=0.4011\np_2=0.2266\n",
    );
    let (code, out) = vdbcode(
        dir,
        &[
            "verify",
            "--constraint",
            "c.txt",
            "--table",
            "reference.txt",
            "--out",
            "m.csv",
        ],
    );
    let worst = fs::read_to_string(dir.join("m.csv"))
        .unwrap_or_default()
        .lines()
        .skip(1)
        .filter_map(|l| l.split(',').nth(1)?.parse::<f64>().ok())
        .fold(f64::INFINITY, f64::min);
    let reference_ok = code == 0 && worst >= -1e-3;

    let (code, enc) = vdbcode(
        dir,
        &[
            "encode",
            "--constraint",
            "c.txt",
            "--mode",
            "perbit",
            "--out",
            "pb.txt",
        ],
    );
    if code != 0 {
        return outcome(false, format!("encode exited {code}: {enc}"));
    }
    let table = fs::read_to_string(dir.join("pb.txt")).unwrap();
    let maximal = table_line(&table, "# locally_maximal=").as_deref() == Some("true");
    let (vcode, _) = vdbcode(
        dir,
        &["verify", "--constraint", "c.txt", "--table", "pb.txt"],
    );
    let ps: Vec<String> = (0..3)
        .filter_map(|i| table_line(&table, &format!("p_{i}=")))
        .map(|v| format!("{:.4}", v.parse::<f64>().unwrap_or(f64::NAN)))
        .collect();
    outcome(
        reference_ok && maximal && vcode == 0,
        format!(
            "reference point worst margin {worst:.2e} (verify exit {}); solver ({}) feasible={} locally_maximal={maximal} {}",
            if reference_ok { 0 } else { code },
            ps.join(", "),
            vcode == 0,
            out.lines().last().unwrap_or_default()
        ),
    )
}

fn monte_carlo_reproduction(dir: &Path) -> Outcome {
    write(dir, "r.txt", RECIPROCAL);
    write(
        dir,
        "iid.txt",
        "format=vdb-table-v1\nL=3\nk=3\nmode=iid\np=0.29\n",
    );
    write(
        dir,
        "pb.txt",
        "format=vdb-table-v1\nL=3\nk=3\nmode=perbit\np_0=0.25\np_1=0.44\np_2=0.31\n",
    );
    let mut ok = true;
    let mut detail = Vec::new();
    for table in ["iid.txt", "pb.txt"] {
        let (vcode, _) = vdbcode(dir, &["verify", "--constraint", "r.txt", "--table", table]);
        let (code, out) = vdbcode(
            dir,
            &[
                "simulate",
                "--table",
                table,
                "--constraint",
                "r.txt",
                "--trials",
                "10000",
                "--seed",
                "0",
            ],
        );
        let summary: Vec<&str> = out
            .lines()
            .filter(|l| l.starts_with("independent") || l.starts_with("capped"))
            .collect();
        ok &= vcode == 0 && code == 0;
        detail.push(format!(
            "{table}: feasible={} {}",
            vcode == 0,
            summary.join(", ")
        ));
    }
    outcome(ok, detail.join("; "))
}

fn bound_ordering(_: &Path) -> Outcome {
    let mut ok = true;
    let mut rows = 0;
    for k in [3, 4] {
        let data = bounds_dataset(8, k).unwrap();
        rows += data.len();
        ok &= data.iter().all(|r| r.is_ordered());
        ok &= divisibility_report(8, k)
            .unwrap()
            .iter()
            .all(|e| e.class != DivisibilityClass::Violation);
    }
    outcome(
        ok,
        format!("{rows} rows ordered, no divisibility violations"),
    )
}

fn set_equivalence(_: &Path) -> Outcome {
    let mut pairs = 0;
    for l in 1..=10 {
        for k in 1..=l {
            let fast = sets_fast(l, k).unwrap();
            if fast != sets_bruteforce(l, k).unwrap() {
                return outcome(false, format!("constructions differ at L={l}, k={k}"));
            }
            let y = y_star_table(l, k).unwrap();
            if fast.iter().any(|(m, s)| y.get(m) != Some(s.len() as u64)) {
                return outcome(
                    false,
                    format!("cardinalities differ from y* at L={l}, k={k}"),
                );
            }
            pairs += 1;
        }
    }
    let family = sets_fast(3, 2).unwrap();
    let expected =
        "format=vdb-sets-v1\nL=3\nk=2\n1,001\n1,011\n2,010\n2,110\n3,011\n3,101\n4,100\n5,101\n6,110\n";
    let ok = family.to_text() == expected && family.cardinalities() == [2, 2, 2, 1, 1, 1];
    outcome(
        ok,
        format!(
            "{pairs} (L, k) pairs equal; L=3 k=2 cardinalities {:?}",
            family.cardinalities()
        ),
    )
}

/// Solver output for a random nonincreasing constraint.
fn random_code_table(rng: &mut ChaCha8Rng) -> CodeTable {
    let l = rng.gen_range(1..=8u32);
    let k = rng.gen_range(1..=l);
    let m_max = ((1u64 << (l - k)) * ((1u64 << k) - 1)) as usize;
    let mut bounds: Vec<f64> = (0..m_max).map(|_| rng.gen_range(0.01..1.0)).collect();
    bounds.sort_by(|a, b| b.total_cmp(a));
    let c = TailConstraint::new(l, k, bounds, true).unwrap();
    let sets = sets_fast(l, k).unwrap();
    if rng.gen_bool(0.5) {
        solve_iid(&sets, &c, &SolveOptions::default()).unwrap()
    } else {
        solve_perbit(&sets, &c, &SolveOptions::default()).unwrap()
    }
}

fn analytic_simulation_consistency(_: &Path) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut reachable_err = 0.0f64;
    let mut restricted_err = 0.0f64;
    let mut sigma_failures = Vec::new();
    for i in 0..20u64 {
        let t = random_code_table(&mut rng);
        let (l, k, p) = (t.word_length(), t.max_errors(), t.probabilities());
        let sets = sets_fast(l, k).unwrap();
        let reach = placement_mass(p, k).unwrap();
        // f_M restricted to flip patterns of weight <= k, uniform values
        let mut restricted = vec![0.0f64; 1 << l];
        for e in (0..1u32 << l).filter(|e| e.count_ones() <= k) {
            let pe = placement_probability(e, p) / f64::from(1u32 << l);
            for x in 0..1u32 << l {
                restricted[x.abs_diff(x ^ e) as usize] += pe;
            }
        }
        for (m, masks) in sets.iter() {
            let lhs = constraint_lhs(masks, p);
            reachable_err = reachable_err.max((reach[m as usize] - lhs).abs());
            restricted_err = restricted_err.max((restricted[m as usize] - lhs).abs());
        }

        let vacuous = TailConstraint::new(l, k, vec![1.0; sets.m_max() as usize], true).unwrap();
        let opts = SimulationOptions {
            trials: 100_000,
            seed: i,
            cap_weight: false,
        };
        let sim = simulate(&t, &vacuous, &opts, &ValueSource::Uniform).unwrap();
        let exact = exact_distortion(&Channel::flip(&t), &ValueSource::Uniform).unwrap();
        for (m, &f) in exact.mass.iter().enumerate() {
            let got = sim.distribution.mass_at(m as u64);
            if (got - f).abs() > 4.0 * (f * (1.0 - f) / 1e5).sqrt() {
                sigma_failures.push(format!("table {i} (L={l}) m={m}: {got} vs {f:.3e}"));
            }
        }
    }
    let literal = restricted_err <= 1e-12;
    let ok = reachable_err <= 1e-12 && sigma_failures.is_empty();
    Outcome {
        ok,
        known_gap_holds: Some(literal),
        detail: format!(
            "weight<=k f_M vs lhs max err {restricted_err:.3e} ({}); reachable placement mass vs lhs max err {reachable_err:.1e}; \
             4-sigma misses: {}",
            if literal { "equal" } else { "not equal" },
            if sigma_failures.is_empty() { "none".to_string() } else { sigma_failures.join(", ") }
        ),
    }
}

fn single_upset_oracle(dir: &Path) -> Outcome {
    let point = EmpiricalPmf::point(3, 0).unwrap();
    let q = 0.2;
    let one_site = UpsetModel::new(vec![0.0; 3], vec![q, 0.0, 0.0]).unwrap();
    let a = analytic_single_error(&point, &one_site).unwrap();
    let two_point = a.agrees
        && (a.analytic.mass[1] - q).abs() < 1e-12
        && (a.analytic.mass[0] - (1.0 - q)).abs() < 1e-12;
    let quiet = analytic_single_error(&point, &UpsetModel::quiet(3)).unwrap();
    let quiet_ok = quiet.agrees && quiet.analytic.mass[0] == 1.0;
    // spread value PMFs are where the factorized form is expected to drift
    let uniform_quiet =
        analytic_single_error(&EmpiricalPmf::uniform(3).unwrap(), &UpsetModel::quiet(3)).unwrap();

    write(
        dir,
        "u.txt",
        "format=vdb-upsets-v1\nL=3\n0,0,0.1\n1,0.05,0.05\n",
    );
    let (code, out) = vdbcode(
        dir,
        &[
            "distort",
            "--upsets",
            "u.txt",
            "--mode",
            "single-error",
            "--out",
            "f.csv",
            "--divergence",
            "d.csv",
        ],
    );
    let report = fs::read_to_string(dir.join("d.csv")).unwrap_or_default();
    let report_ok = code == 0
        && report.starts_with("m,analytic,oracle,divergence\n")
        && report.lines().count() == 9;
    outcome(
        two_point && quiet_ok && report_ok,
        format!(
            "point mass: one site agrees={}, zero upsets agrees={}; uniform, zero upsets: max divergence {:.3}; uniform, two sites: {}",
            a.agrees,
            quiet.agrees,
            uniform_quiet.max_divergence,
            out.lines().next().unwrap_or("no report")
        ),
    )
}

fn main() {
    let criteria = [
        Criterion { id: "AC1 iid solver regression", limit: Duration::from_secs(1), expected_fail: None, run: iid_regression },
        Criterion { id: "AC2 per-bit feasibility", limit: Duration::from_secs(5), expected_fail: None, run: per_bit_feasibility },
        Criterion { id: "AC3 Monte Carlo reproduction", limit: Duration::from_secs(2), expected_fail: None, run: monte_carlo_reproduction },
        Criterion { id: "AC4 bound ordering sweep", limit: Duration::from_secs(30), expected_fail: None, run: bound_ordering },
        Criterion { id: "AC5 set construction equivalence", limit: Duration::from_secs(60), expected_fail: None, run: set_equivalence },
        Criterion {
            id: "AC6 analytic/simulation consistency",
            limit: Duration::from_secs(120),
            expected_fail: Some(
                "a placement can yield different distortions on different carriers (011 at L=3 gives 1 or 3), \
                 so the weight<=k distortion mass is at most, not equal to, the constraint polynomial",
            ),
            run: analytic_simulation_consistency,
        },
        Criterion { id: "AC7 single-upset oracle check", limit: Duration::from_secs(1), expected_fail: None, run: single_upset_oracle },
    ];

    let mut unexpected = 0;
    for c in &criteria {
        let dir = tempfile::tempdir().unwrap();
        let start = Instant::now();
        let result = (c.run)(dir.path());
        let elapsed = start.elapsed();
        let in_time = elapsed <= c.limit;
        let gated = result.ok && in_time;
        let status = match (
            gated,
            c.expected_fail
                .map(|_| result.known_gap_holds == Some(true)),
        ) {
            (true, None) => "PASS",
            (true, Some(false)) => "FAIL (expected)",
            (true, Some(true)) => {
                unexpected += 1;
                "PASS (unexpected)"
            }
            (false, _) => {
                unexpected += 1;
                "FAIL"
            }
        };
        println!(
            "{status} {} [{:.2}s / {}s] {}",
            c.id,
            elapsed.as_secs_f64(),
            c.limit.as_secs(),
            result.detail
        );
        if let Some(reason) = c.expected_fail {
            println!("    known: {reason}");
        }
    }
    if unexpected > 0 {
        println!("{unexpected} criteria with unexpected results");
        std::process::exit(1);
    }
}
