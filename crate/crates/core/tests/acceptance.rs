//! Exit criteria for the diagnosis engine. Every criterion runs at its fixed
//! tolerance and prints one PASS/FAIL line; the test fails if any does.
//!
//! Run with `cargo test -p diag-core --test acceptance -- --nocapture` to see
//! the report.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use diag_core::analysis::{
    brute_force_conflicts, gen_random_problem, median, minimal_hitting_sets, precision_at, rmsd,
    InstanceSpec, RankedPrediction, SubsetTable,
};
use diag_core::car;
use diag_core::consistency::{CheckStats, ProblemOracle};
use diag_core::enumeration::{all_min_conflicts, enumerate, Algorithm, EnumerationOptions, Limit};
use diag_core::fastdiag::{fast_diag, FastDiagOutcome};
use diag_core::quickxplain::min_conflict;
use diag_core::{DiagnosisProblem, ReqSet};

const ORACLE_INSTANCES: u64 = 500;
const BOUND_INSTANCES: u64 = 500;
const TREND_INSTANCES: u64 = 30;

struct Outcome {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn set(v: &[usize]) -> ReqSet {
    v.iter().copied().collect()
}

fn as_set(v: &[ReqSet]) -> BTreeSet<ReqSet> {
    v.iter().cloned().collect()
}

/// Instance family: up to 8 requirements, up to 5 variables, domains up to 4.
fn oracle_spec(seed: u64) -> InstanceSpec {
    InstanceSpec {
        num_vars: 3 + (seed % 3) as usize,
        domain_size: 2 + (seed / 3 % 3) as usize,
        num_kb_constraints: 1 + (seed / 9 % 4) as usize,
        num_requirements: 3 + (seed / 2 % 6) as usize,
        tightness: [0.2, 0.3, 0.45][(seed / 5 % 3) as usize],
        seed,
    }
}

fn oracle_problems(count: u64) -> Vec<DiagnosisProblem> {
    (0..count)
        .map(|s| gen_random_problem(&oracle_spec(s)).expect("feasible spec"))
        .collect()
}

fn criterion_car_fastdiag() -> Outcome {
    let start = Instant::now();
    let p = car::problem();
    let mut o = ProblemOracle::new(&p);
    let mut stats = CheckStats::default();
    let forward = fast_diag(&mut o, &[0, 1, 2], &ReqSet::full(3), &mut stats);
    let fwd_ids = forward.diagnosis().map(|d| p.ids(d).join(","));

    let reversed = p.reordered(&p.order().reversed()).unwrap();
    let mut o = ProblemOracle::new(&reversed);
    let back = fast_diag(&mut o, &[0, 1, 2], &ReqSet::full(3), &mut stats);
    let mut back_ids: Vec<&str> = back
        .diagnosis()
        .map(|d| reversed.ids(d))
        .unwrap_or_default();
    back_ids.sort();

    let elapsed = start.elapsed();
    let passed = fwd_ids.as_deref() == Some("c5,c6")
        && back_ids == ["c6", "c7"]
        && elapsed < Duration::from_secs(1);
    Outcome {
        name: "car example, FastDiag under both orders",
        passed,
        detail: format!("c5<c6<c7: {fwd_ids:?}; c7<c6<c5: {back_ids:?}; {elapsed:?}"),
    }
}

fn criterion_car_enumeration() -> Outcome {
    let start = Instant::now();
    let p = car::problem();
    let expected = as_set(&[set(&[0, 1]), set(&[0, 2]), set(&[1, 2])]);
    let mut detail = String::new();
    let mut passed = true;
    for a in Algorithm::ALL {
        let r = enumerate(&p, a, &EnumerationOptions::new(Limit::All));
        let ok = as_set(&r.diagnoses) == expected && r.diagnoses.len() == 3;
        passed &= ok;
        detail += &format!("{a}: {} diagnoses ok={ok}; ", r.diagnoses.len());
    }
    let mut stats = CheckStats::default();
    let conflicts = all_min_conflicts(&mut ProblemOracle::new(&p), &mut stats);
    let ok = as_set(&conflicts) == expected && conflicts.len() == 3;
    passed &= ok;
    let elapsed = start.elapsed();
    passed &= elapsed < Duration::from_secs(1);
    detail += &format!("conflicts ok={ok}; {elapsed:?}");
    Outcome {
        name: "car example, all diagnoses and conflicts",
        passed,
        detail,
    }
}

struct OracleRun {
    equivalence_failures: Vec<String>,
    validity_failures: Vec<String>,
    duality_failures: Vec<String>,
    diagnoses_checked: usize,
    elapsed: Duration,
}

fn oracle_run(problems: &[DiagnosisProblem]) -> OracleRun {
    let start = Instant::now();
    let mut run = OracleRun {
        equivalence_failures: Vec::new(),
        validity_failures: Vec::new(),
        duality_failures: Vec::new(),
        diagnoses_checked: 0,
        elapsed: Duration::ZERO,
    };
    for (i, p) in problems.iter().enumerate() {
        let table = SubsetTable::build(p).unwrap();
        let oracle_diags = table.diagnoses();
        let expected = as_set(&oracle_diags);
        let all = ReqSet::full(p.len());
        let mut returned: Vec<ReqSet> = Vec::new();

        for a in Algorithm::ALL {
            let r = enumerate(p, a, &EnumerationOptions::new(Limit::All));
            if as_set(&r.diagnoses) != expected || r.diagnoses.len() != expected.len() {
                run.equivalence_failures.push(format!(
                    "instance {i} {a}: {:?} vs {:?}",
                    r.diagnoses, oracle_diags
                ));
            }
            returned.extend(r.diagnoses);
        }
        let c: Vec<usize> = (0..p.len()).collect();
        let mut stats = CheckStats::default();
        match fast_diag(&mut ProblemOracle::new(p), &c, &all, &mut stats) {
            FastDiagOutcome::Diagnosis(d) => {
                if Some(&d) != oracle_diags.first() {
                    run.equivalence_failures.push(format!(
                        "instance {i} fast_diag: {d} vs preferred {:?}",
                        oracle_diags.first()
                    ));
                }
                returned.push(d);
            }
            other => run
                .equivalence_failures
                .push(format!("instance {i} fast_diag: {other:?}")),
        }

        // Validity and single-removal minimality, decided by the table.
        for d in &returned {
            run.diagnoses_checked += 1;
            let valid = table.is_consistent(&all.difference(d));
            let minimal = d
                .iter()
                .all(|x| !table.is_consistent(&all.difference(&d.without(x))));
            if !valid || !minimal {
                run.validity_failures
                    .push(format!("instance {i}: {d} valid={valid} minimal={minimal}"));
            }
        }

        let conflicts = table.conflicts();
        if minimal_hitting_sets(&conflicts, p.len()) != oracle_diags {
            run.duality_failures.push(format!("instance {i}"));
        }
    }
    run.elapsed = start.elapsed();
    run
}

fn criterion_bounds(problems: &[DiagnosisProblem]) -> (Outcome, Outcome) {
    let bound = |size: usize, n: usize| -> u64 {
        let s = size as f64;
        let log = (n as f64 / s).log2().ceil().max(0.0);
        (2.0 * s * log + 2.0 * s + 2.0) as u64
    };
    let mut fd_total = 0;
    let mut fd_violations = Vec::new();
    let mut qx_total = 0;
    let mut qx_violations = Vec::new();
    for (i, p) in problems.iter().enumerate() {
        let n = p.len();
        let c: Vec<usize> = (0..n).collect();
        let all = ReqSet::full(n);

        let mut stats = CheckStats::default();
        if let FastDiagOutcome::Diagnosis(d) =
            fast_diag(&mut ProblemOracle::new(p), &c, &all, &mut stats)
        {
            fd_total += 1;
            let limit = bound(d.len(), n);
            if stats.core_checks() > limit {
                fd_violations.push(format!(
                    "#{i}: d={} n={n} checks={} > {limit}",
                    d.len(),
                    stats.core_checks()
                ));
            }
        }

        let mut stats = CheckStats::default();
        if let Ok(Some(cs)) =
            min_conflict(&mut ProblemOracle::new(p), &ReqSet::new(), &c, &mut stats)
        {
            qx_total += 1;
            let limit = bound(cs.len(), n);
            if stats.core_checks() > limit {
                qx_violations.push(format!(
                    "#{i}: k={} n={n} checks={} > {limit}",
                    cs.len(),
                    stats.core_checks()
                ));
            }
        }
    }
    for v in fd_violations.iter().chain(&qx_violations) {
        eprintln!("bound violation: {v}");
    }
    let share = |bad: usize, total: usize| 1.0 - bad as f64 / total.max(1) as f64;
    let fd_share = share(fd_violations.len(), fd_total);
    let qx_share = share(qx_violations.len(), qx_total);
    (
        Outcome {
            name: "FastDiag check count within 2d*ceil(log2(n/d))+2d+2",
            passed: fd_total >= BOUND_INSTANCES as usize && fd_share >= 0.99,
            detail: format!("{fd_total} runs, {:.2}% within bound", 100.0 * fd_share),
        },
        Outcome {
            name: "QuickXplain check count within 2k*ceil(log2(n/k))+2k+2",
            passed: qx_total >= BOUND_INSTANCES as usize && qx_share >= 0.99,
            detail: format!("{qx_total} runs, {:.2}% within bound", 100.0 * qx_share),
        },
    )
}

fn criterion_trend() -> Outcome {
    let mut fastdiag = Vec::new();
    let mut hsdag = Vec::new();
    for i in 0..TREND_INSTANCES {
        let spec = InstanceSpec {
            num_vars: 8,
            domain_size: 4,
            num_kb_constraints: 6,
            num_requirements: 10,
            tightness: 0.25,
            seed: 1000 + i,
        };
        let p = gen_random_problem(&spec).expect("feasible spec");
        let first = EnumerationOptions::new(Limit::Count(1));
        fastdiag.push(
            enumerate(&p, Algorithm::FastDiagTree, &first)
                .stats
                .consistency_checks as f64,
        );
        hsdag.push(
            enumerate(&p, Algorithm::HsdagBreadthFirst, &first)
                .stats
                .consistency_checks as f64,
        );
    }
    let fd = median(&mut fastdiag).unwrap();
    let hs = median(&mut hsdag).unwrap();
    Outcome {
        name: "median checks for the first diagnosis: FastDiag < HSDAG breadth-first",
        passed: fd < hs,
        detail: format!(
            "{TREND_INSTANCES} instances, 10 requirements: fastdiag {fd} vs hsdag-bfs {hs}"
        ),
    }
}

fn criterion_metrics() -> Outcome {
    let tol = 1e-9;
    let mut ok = rmsd(&[1, 1, 1]).unwrap() == 0.0
        && rmsd(&[2]).unwrap() == 1.0
        && (rmsd(&[3, 1]).unwrap() - 2f64.sqrt()).abs() <= tol;
    let rec = |ranking: Vec<ReqSet>, target: ReqSet| RankedPrediction { ranking, target };
    let mut records: Vec<RankedPrediction> = (0..7)
        .map(|_| rec(vec![set(&[0]), set(&[1])], set(&[0])))
        .collect();
    records.extend((0..3).map(|_| rec(vec![set(&[0]), set(&[1])], set(&[1]))));
    ok &= (precision_at(&records, 1).unwrap() - 0.7).abs() <= tol;
    ok &= (precision_at(&records, 2).unwrap() - 1.0).abs() <= tol;
    ok &= precision_at(&[rec(vec![set(&[0])], set(&[1]))], 1).unwrap() == 0.0;
    Outcome {
        name: "RMSD and precision formulas",
        passed: ok,
        detail: "rmsd [1,1,1]=0, [2]=1, [3,1]=sqrt 2; precision 0.7 / 1.0 / 0.0".into(),
    }
}

#[test]
fn acceptance() {
    let mut outcomes = vec![criterion_car_fastdiag(), criterion_car_enumeration()];

    let problems = oracle_problems(ORACLE_INSTANCES.max(BOUND_INSTANCES));
    let run = oracle_run(&problems[..ORACLE_INSTANCES as usize]);
    for f in run
        .equivalence_failures
        .iter()
        .chain(&run.validity_failures)
        .chain(&run.duality_failures)
        .take(20)
    {
        eprintln!("failure: {f}");
    }
    outcomes.push(Outcome {
        name: "oracle equivalence on random instances",
        passed: run.equivalence_failures.is_empty() && run.elapsed < Duration::from_secs(300),
        detail: format!(
            "{ORACLE_INSTANCES} instances, {} disagreements, {:?}",
            run.equivalence_failures.len(),
            run.elapsed
        ),
    });
    outcomes.push(Outcome {
        name: "validity and minimality of every returned diagnosis",
        passed: run.validity_failures.is_empty() && run.diagnoses_checked > 0,
        detail: format!(
            "{} diagnoses checked, {} failures",
            run.diagnoses_checked,
            run.validity_failures.len()
        ),
    });
    outcomes.push(Outcome {
        name: "hitting-set duality of brute-force conflicts and diagnoses",
        passed: run.duality_failures.is_empty(),
        detail: format!(
            "{ORACLE_INSTANCES} instances, {} failures",
            run.duality_failures.len()
        ),
    });
    let (fd, qx) = criterion_bounds(&problems[..BOUND_INSTANCES as usize]);
    outcomes.push(fd);
    outcomes.push(qx);
    outcomes.push(criterion_trend());
    outcomes.push(criterion_metrics());

    // The car conflicts also come out of the brute-force oracle.
    assert_eq!(brute_force_conflicts(&car::problem()).unwrap().len(), 3);

    println!();
    for o in &outcomes {
        println!(
            "{} {:<72} {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.name,
            o.detail
        );
    }
    let failed: Vec<&str> = outcomes
        .iter()
        .filter(|o| !o.passed)
        .map(|o| o.name)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
