//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Every expected value comes from an oracle in `oracle/` or from
//! exhaustive enumeration written out here.

mod oracle;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::process::Command as Process;
use std::time::{Duration, Instant};

use branchlab_cli::{parse_scenario, run_scenario, RunOptions};
use branchlab_core::chain::{equal_validity_demonstration, linearity_check, BranchingRule};
use branchlab_core::chain::{Label, ProductKet, Role, TensorState};
use branchlab_core::collapse::{chi_square_statistic, sample_runs};
use branchlab_core::rational::{ratio, Rational};
use branchlab_core::typicality::weight_in_window;
use branchlab_core::validity::{
    achievable_set, born_feasibility, joint_infeasibility, verify_certificate,
    weighted_average_counts,
};
use branchlab_core::{
    class_multiplicity, enumerate_classes, BranchClass, BranchEnsemble, Feasibility,
    InfeasibilityCertificate, OutcomeDistribution, SolverLimits, Surd, ValidityAssignment,
};
use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};
use oracle::{binomial_tail_outside, counts_of, dist, sequences, TestRng};

const CAP: u64 = 5_000_000;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("normalization conservation", c1_normalization, Some(Duration::from_secs(10))),
        ("equal validity gives N/n", c2_equal_validity, None),
        ("class reduction matches sequences", c3_reduction, None),
        ("joint infeasibility certificates", c4_certificates, None),
        ("single-distribution feasibility", c5_feasibility, None),
        ("typicality vs binomial tail", c6_typicality, Some(Duration::from_secs(30))),
        ("finite-N residue is positive", c7_residue, None),
        ("linearity and chain derivation", c8_chain, None),
        ("collapse baseline", c9_collapse, None),
        ("CLI determinism", c10_cli, None),
    ];
    let mut failed = 0;
    for (i, (name, f, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut result = f();
        let took = start.elapsed();
        if let (Ok(_), Some(limit)) = (&result, limit) {
            if took > *limit {
                result = Err(format!("took {took:.2?}, limit {limit:?}"));
            }
        }
        match result {
            Ok(detail) => println!("PASS {:>2} {name} ({detail}; {took:.2?})", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} ({took:.2?})", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}

fn c1_normalization() -> Outcome {
    let mut rng = TestRng::new(1);
    let mut ensembles = 0;
    for n in 1..=4 {
        let dists: Vec<_> = (0..20)
            .map(|_| {
                let den = 2 + rng.below(30);
                rng.distribution(n, den)
            }).collect();
        for runs in 1..=50 {
            for d in &dists {
                let ens = BranchEnsemble::new(d, runs, CAP).map_err(|e| e.to_string())?;
                // Every weight is numerator / denominator, so the sum is 1
                // exactly iff the numerators add up to the denominator.
                let total: BigInt = ens.numerators().iter().sum();
                check(&total == ens.denominator(), format!("n={n} N={runs} q={:?}", d.weights()))?;
                ensembles += 1;
            }
        }
        // Spot-check that the numerators are the class weights.
        let ens = BranchEnsemble::new(&dists[0], 7, CAP).unwrap();
        let sum: Rational = (0..ens.len())
            .map(|i| branchlab_core::class_weight(&ens.classes()[i], &dists[0]).unwrap())
            .sum();
        check(sum == ratio(1, 1), format!("class_weight sum for n={n}"))?;
    }
    Ok(format!("{ensembles} ensembles"))
}

fn c2_equal_validity() -> Outcome {
    let mut rng = TestRng::new(2);
    let mut cases = 0;
    for n in 1..=4 {
        let dists: Vec<_> = (0..5)
            .map(|_| {
                let den = 3 + rng.below(20);
                rng.distribution(n, den)
            }).collect();
        for runs in 1..=12u32 {
            let mut seen = BTreeSet::new();
            for d in &dists {
                // All-ones validity over the classes of this distribution's ensemble.
                let ens = BranchEnsemble::new(d, runs, CAP).unwrap();
                let a = ValidityAssignment::new(
                    n,
                    runs,
                    ens.classes().iter().cloned().zip(ens.multiplicities().iter().cloned()),
                )
                .unwrap();
                let f = weighted_average_counts(&a).unwrap();
                let expected = vec![ratio(i64::from(runs), n as i64); n];
                check(f.values() == expected.as_slice(), format!("n={n} N={runs}"))?;
                seen.insert(f.to_json().to_string());
            }
            check(seen.len() == 1, format!("n={n} N={runs}: results differ across distributions"))?;
            cases += 1;
        }
    }
    Ok(format!("{cases} (n, N) pairs x 5 distributions"))
}

fn c3_reduction() -> Outcome {
    let mut rng = TestRng::new(3);
    let mut done = 0;
    while done < 50 {
        let n = 1 + rng.below(3) as usize;
        let runs = 1 + rng.below(6) as usize;
        let seqs = sequences(n, runs);
        // Per-class validity counts, spread over the sequences of each class.
        let classes = enumerate_classes(n, runs as u32, CAP).unwrap();
        let mut k: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
        for c in &classes {
            let m = class_multiplicity(c).to_u64().unwrap();
            k.insert(c.counts().to_vec(), rng.below(m + 1));
        }
        if k.values().all(|&v| v == 0) {
            continue;
        }
        let mut remaining = k.clone();
        let valid: Vec<bool> = seqs
            .iter()
            .map(|s| {
                let left = remaining.get_mut(&counts_of(s, n)).unwrap();
                let v = *left > 0;
                *left = left.saturating_sub(1);
                v
            })
            .collect();
        let total = valid.iter().filter(|&&v| v).count() as i64;
        let brute: Vec<Rational> = (0..n)
            .map(|j| {
                let hits: usize = seqs
                    .iter()
                    .zip(&valid)
                    .filter(|(_, &v)| v)
                    .map(|(s, _)| s.iter().filter(|&&i| i == j).count())
                    .sum();
                ratio(hits as i64, total)
            })
            .collect();
        let a = ValidityAssignment::new(
            n,
            runs as u32,
            k.into_iter().map(|(c, v)| (BranchClass::new(c).unwrap(), BigUint::from(v))),
        )
        .unwrap();
        let got = weighted_average_counts(&a).unwrap();
        check(got.values() == brute.as_slice(), format!("n={n} N={runs}"))?;
        done += 1;
    }
    Ok("50 random assignments".into())
}

fn mutate(cert: &InfeasibilityCertificate, which: usize) -> InfeasibilityCertificate {
    let mut m = cert.clone();
    match which % 7 {
        0 => m.target_b = m.target_a.clone(),
        1 => m.runs += 1,
        2 => m.outcomes += 1,
        3 => m.reason.outcome = (m.reason.outcome + 1) % m.outcomes,
        4 => m.reason.value_a += ratio(1, 7),
        5 => m.reason.value_b += ratio(1, 7),
        _ => m.target_a[0] += ratio(1, 1),
    }
    m
}

fn c4_certificates() -> Outcome {
    let mut rng = TestRng::new(4);
    let mut dists: Vec<OutcomeDistribution> = Vec::new();
    while dists.len() < 10 {
        let d = rng.distribution(3, 12);
        if !dists.contains(&d) {
            dists.push(d);
        }
    }
    let limits = SolverLimits::default();
    let (mut accepted, mut rejected, mut witnesses) = (0, 0, 0);
    let mut pairs = 0;
    for i in 0..dists.len() {
        for j in i + 1..dists.len() {
            pairs += 1;
            for runs in [1, 4, 12] {
                let cert = joint_infeasibility(&dists[i], &dists[j], runs, &limits)
                    .map_err(|e| format!("pair {i},{j} N={runs}: {e}"))?;
                check(verify_certificate(&cert) == Ok(true), format!("pair {i},{j} N={runs} rejected"))?;
                accepted += 1;
                witnesses += usize::from(cert.assignment_frequency.is_some());
                let back = InfeasibilityCertificate::from_json(&cert.to_json()).unwrap();
                check(back == cert, "JSON round trip")?;
                let m = mutate(&cert, accepted);
                check(verify_certificate(&m) != Ok(true), format!("mutation {} accepted", accepted % 7))?;
                rejected += 1;
            }
        }
    }
    check(pairs == 45, "pair count")?;

    // Achievable sets for n=2: brute force over every admissible assignment.
    for runs in 1..=3u32 {
        let classes = enumerate_classes(2, runs, CAP).unwrap();
        let upper: Vec<u64> = classes
            .iter()
            .map(|c| class_multiplicity(c).to_u64().unwrap().min(2))
            .collect();
        let mut brute = BTreeSet::new();
        let space: u64 = upper.iter().map(|u| u + 1).product();
        for code in 1..space {
            let mut rest = code;
            let k: Vec<u64> = upper
                .iter()
                .map(|u| {
                    let v = rest % (u + 1);
                    rest /= u + 1;
                    v
                })
                .collect();
            let total: u64 = k.iter().sum();
            let f: Vec<Rational> = (0..2)
                .map(|j| {
                    let s: u64 = classes.iter().zip(&k).map(|(c, &v)| u64::from(c.counts()[j]) * v).sum();
                    ratio(s as i64, total as i64)
                })
                .collect();
            brute.insert(f);
        }
        let got: BTreeSet<Vec<Rational>> = achievable_set(2, runs, 2, CAP)
            .unwrap()
            .into_iter()
            .map(|f| f.values().to_vec())
            .collect();
        check(got == brute, format!("achievable set N={runs}"))?;

        // Audit: the set reported for different distributions is the same.
        let mut seen = BTreeSet::new();
        for q in ["1/2, 1/2", "1/3, 2/3", "1/10, 9/10"] {
            let cfg = parse_scenario(&format!("command = achievable-set\nq = {q}\nN = {runs}\nk_cap = 2\n")).unwrap();
            let bundle = run_scenario(&cfg, &RunOptions::default()).unwrap();
            seen.insert(bundle.json["results"]["vectors"].to_string());
        }
        check(seen.len() == 1, format!("achievable set depends on q at N={runs}"))?;
    }
    Ok(format!(
        "{pairs} pairs, {accepted} certificates accepted ({witnesses} with witness), {rejected} mutations rejected"
    ))
}

fn c5_feasibility() -> Outcome {
    let limits = SolverLimits::default();
    let mut verdicts = 0;
    for q in [(1, 2), (1, 3), (2, 3), (1, 4), (3, 4)] {
        let d = dist(&[q, (q.1 - q.0, q.1)]);
        for runs in 1..=4u32 {
            let classes = enumerate_classes(2, runs, CAP).unwrap();
            let upper: Vec<u64> = classes.iter().map(|c| class_multiplicity(c).to_u64().unwrap()).collect();
            let targets = d.targets(runs);
            let space: u64 = upper.iter().map(|u| u + 1).product();
            let mut smallest: Option<Vec<u64>> = None;
            for code in 1..space {
                let mut rest = code;
                let k: Vec<u64> = upper
                    .iter()
                    .map(|u| {
                        let v = rest % (u + 1);
                        rest /= u + 1;
                        v
                    })
                    .collect();
                let total: u64 = k.iter().sum();
                let meets = (0..2).all(|j| {
                    let s: u64 = classes.iter().zip(&k).map(|(c, &v)| u64::from(c.counts()[j]) * v).sum();
                    ratio(s as i64, total as i64) == targets[j]
                });
                if meets && smallest.as_ref().is_none_or(|s| k < *s) {
                    smallest = Some(k);
                }
            }
            match (born_feasibility(&d, runs, &limits).map_err(|e| e.to_string())?, smallest) {
                (Feasibility::Feasible(a), Some(best)) => {
                    let f = weighted_average_counts(&a).unwrap();
                    check(f.values() == targets.as_slice(), format!("q={q:?} N={runs} misses target"))?;
                    let got: Vec<u64> = classes.iter().map(|c| a.get(c).to_u64().unwrap()).collect();
                    check(got == best, format!("q={q:?} N={runs}: not the smallest solution"))?;
                }
                (Feasibility::Infeasible, None) => {}
                (v, b) => return Err(format!("q={q:?} N={runs}: solver {v:?}, brute force {b:?}")),
            }
            verdicts += 1;
        }
    }
    Ok(format!("{verdicts} verdicts"))
}

fn fair() -> OutcomeDistribution {
    dist(&[(1, 2), (1, 2)])
}

fn c6_typicality() -> Outcome {
    let eps = ratio(1, 10);
    let mut prev: Option<Rational> = None;
    for runs in [4u32, 16, 64, 256] {
        let r = weight_in_window(&fair(), runs, &eps, CAP).map_err(|e| e.to_string())?;
        let oracle = binomial_tail_outside((1, 2), runs as usize, (1, 10));
        check(r.weight_outside == oracle, format!("N={runs}: {} vs {}", r.weight_outside, oracle))?;
        if let Some(p) = &prev {
            check(r.weight_outside < *p, format!("not decreasing at N={runs}"))?;
        }
        prev = Some(r.weight_outside);
    }
    Ok(format!("outside weight at N=256 is {:.3e}", prev.unwrap().to_f64().unwrap()))
}

fn c7_residue() -> Outcome {
    let eps = ratio(1, 10);
    let mut smallest = f64::INFINITY;
    for runs in 4..=256u32 {
        let r = weight_in_window(&fair(), runs, &eps, CAP).map_err(|e| e.to_string())?;
        check(r.weight_outside > Rational::zero(), format!("zero outside weight at N={runs}"))?;
        check(r.is_consistent(), format!("inside + outside != 1 at N={runs}"))?;
        smallest = smallest.min(r.weight_outside.to_f64().unwrap());
    }
    Ok(format!("253 values of N, smallest {smallest:.3e}"))
}

fn c8_chain() -> Outcome {
    let roles = vec![Role::System, Role::Detector];
    let ket = |s: u64, d: u64| {
        ProductKet::new(vec![
            Label::new(Role::System, format!("s{s}")).unwrap(),
            Label::new(Role::Detector, format!("d{d}")).unwrap(),
        ])
    };
    let basis: Vec<ProductKet> = (0..3).flat_map(|s| (0..3).map(move |d| (s, d))).map(|(s, d)| ket(s, d)).collect();
    let mut rng = TestRng::new(8);
    let coeff = |rng: &mut TestRng| {
        Surd::sqrt(&ratio(1 + rng.below(9) as i64, 1 + rng.below(9) as i64))
            .unwrap()
            .scale(&ratio(rng.below(7) as i64 - 3, 1 + rng.below(3) as i64))
    };
    for i in 0..100 {
        let mut perm: Vec<u64> = (0..basis.len() as u64).collect();
        for j in (1..perm.len()).rev() {
            perm.swap(j, rng.below(j as u64 + 1) as usize);
        }
        let rule = BranchingRule::new(
            roles.clone(),
            basis.iter().cloned().zip(perm.iter().map(|&t| ket(t, 50 + t))),
        )
        .unwrap();
        let mut states = Vec::new();
        for _ in 0..2 {
            let mut s = TensorState::new(roles.clone());
            for k in &basis {
                if rng.below(2) == 0 {
                    s.add_term(k.clone(), coeff(&mut rng)).unwrap();
                }
            }
            states.push(s);
        }
        let w1 = ratio(rng.below(9) as i64 - 4, 1 + rng.below(4) as i64);
        let w2 = ratio(rng.below(9) as i64 - 4, 1 + rng.below(4) as i64);
        check(
            linearity_check(&rule, (&states[0], &states[1]), (&w1, &w2)) == Ok(true),
            format!("instance {i}"),
        )?;
    }
    let cases: [&[(i64, i64)]; 4] = [
        &[(1, 1)],
        &[(1, 2), (1, 2)],
        &[(1, 6), (1, 3), (1, 2)],
        &[(1, 10), (1, 5), (1, 10), (2, 5), (1, 5)],
    ];
    for q in cases {
        let report = equal_validity_demonstration(&dist(q)).map_err(|e| e.to_string())?;
        check(report.states_equal && report.all_aware(), format!("n={}", q.len()))?;
        check(report.aware_versions == q.len(), format!("n={}: aware count", q.len()))?;
        check(report.squared_norm.as_rational() == Some(ratio(1, 1)), "norm")?;
    }
    Ok("100 linearity instances, n in {1, 2, 3, 5}".into())
}

fn c9_collapse() -> Outcome {
    let d = fair();
    let mut exceed = 0;
    for seed in 0..200u64 {
        let a = sample_runs(&d, 1000, seed).map_err(|e| e.to_string())?;
        let b = sample_runs(&d, 1000, seed).map_err(|e| e.to_string())?;
        let bytes = |r: &branchlab_core::collapse::SampleRun| -> Vec<u8> {
            r.outcomes.iter().map(|&o| o as u8).collect()
        };
        check(bytes(&a) == bytes(&b), format!("seed {seed} not reproducible"))?;
        if chi_square_statistic(&a, &d).unwrap() > 3.84 {
            exceed += 1;
        }
    }
    check((2..=20).contains(&exceed), format!("{exceed} of 200 exceed 3.84"))?;
    Ok(format!("{exceed} of 200 seeds exceed 3.84"))
}

fn c10_cli() -> Outcome {
    let scenarios = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let mut files: Vec<_> = std::fs::read_dir(&scenarios)
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "scn"))
        .collect();
    files.sort();
    check(!files.is_empty(), "no example scenarios")?;
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    for file in &files {
        let cfg = parse_scenario(&std::fs::read_to_string(file).unwrap()).map_err(|e| e.to_string())?;
        let stem = file.file_stem().unwrap().to_string_lossy().to_string();
        let mut outputs = Vec::new();
        for (run, threads) in [(0, "1"), (1, "4"), (2, "1")] {
            let out = tmp.path().join(format!("{stem}-{run}"));
            let status = Process::new(env!("CARGO_BIN_EXE_branchlab"))
                .arg(cfg.command.as_str())
                .arg("--scenario")
                .arg(file)
                .arg("--threads")
                .arg(threads)
                .arg("--out-dir")
                .arg(&out)
                .output()
                .map_err(|e| e.to_string())?;
            check(status.status.success(), format!("{stem}: {}", String::from_utf8_lossy(&status.stderr)))?;
            let read = |name: &str| std::fs::read(out.join(name)).map_err(|e| format!("{stem}/{name}: {e}"));
            outputs.push((read("results.csv")?, read("results.json")?));
        }
        check(outputs.windows(2).all(|w| w[0] == w[1]), format!("{stem}: outputs differ"))?;
    }
    Ok(format!("{} scenarios, 3 runs each at 1 and 4 threads", files.len()))
}
