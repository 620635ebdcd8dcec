//! Dispatch from a scenario to the owning module, and artifact assembly.

use std::path::Path;

use branchlab_core::chain::{equal_validity_demonstration, ObserverTag, Role};
use branchlab_core::collapse::{
    chi_square_critical_95, chi_square_statistic, empirical_frequencies, outcome_counts,
    sample_runs,
};
use branchlab_core::model::ln_class_weight;
use branchlab_core::rational::{format_rational, to_f64};
use branchlab_core::typicality::{in_window, min_sample_size, typicality_series};
use branchlab_core::validity::{
    achievable_set, born_feasibility, joint_infeasibility, verify_certificate,
};
use branchlab_core::{
    BranchClass, BranchEnsemble, Error as CoreError, Feasibility, Rational, SampleSize,
    SolverLimits, DEFAULT_CLASS_CAP,
};
use serde_json::{json, Value};

use crate::emit::{canonical_json, float_cell, write_file, Plot, PlotKind, Table, GENERATOR};
use crate::error::{CliError, Result};
use crate::scenario::{Command, ScenarioConfig};

pub const CLASS_CAP_ENV: &str = "BRANCHLAB_CLASS_CAP";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub class_cap: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { class_cap: DEFAULT_CLASS_CAP }
    }
}

impl RunOptions {
    /// Defaults, with the class cap taken from `BRANCHLAB_CLASS_CAP` when set.
    pub fn from_env() -> std::result::Result<Self, CliError> {
        match std::env::var(CLASS_CAP_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map(|class_cap| RunOptions { class_cap })
                .map_err(|_| CliError::Schema(format!("{CLASS_CAP_ENV} must be an unsigned integer, got {v:?}"))),
            Err(_) => Ok(RunOptions::default()),
        }
    }
}

/// Everything one scenario produces, before it touches the disk.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultBundle {
    pub table: Table,
    pub json: Value,
    pub svg: Option<String>,
    pub transcript: Option<String>,
}

impl ResultBundle {
    pub fn csv(&self) -> String {
        self.table.to_csv()
    }

    pub fn json_text(&self) -> String {
        canonical_json(&self.json)
    }

    /// Writes `results.csv`, `results.json` and, when present, `plot.svg`
    /// and `transcript.txt`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        write_file(dir, "results.csv", &self.csv())?;
        write_file(dir, "results.json", &self.json_text())?;
        if let Some(svg) = &self.svg {
            write_file(dir, "plot.svg", svg)?;
        }
        if let Some(t) = &self.transcript {
            write_file(dir, "transcript.txt", t)?;
        }
        Ok(())
    }
}

pub fn run_scenario(config: &ScenarioConfig, options: &RunOptions) -> Result<ResultBundle> {
    let ctx = config.command.as_str();
    let (table, results, svg, transcript) = match config.command {
        Command::Typicality => typicality(config, options),
        Command::BranchStats => branch_stats(config, options),
        Command::ValidityFeasibility => feasibility(config, options),
        Command::ValidityJoint => joint(config, options),
        Command::AchievableSet => achievable(config, options),
        Command::CollapseSample => collapse(config),
        Command::ChainDemo => chain_demo(config),
    }
    .map_err(CliError::core(ctx))?;
    let mut json = json!({
        "command": ctx,
        "generator": GENERATOR,
        "name": config.name,
        "q": rationals(config.q.weights()),
        "results": results,
    });
    if let Some(b) = &config.q_b {
        json["q_b"] = rationals(b.weights());
    }
    Ok(ResultBundle { table, json, svg, transcript })
}

type Output = (Table, Value, Option<String>, Option<String>);
type Step = std::result::Result<Output, CoreError>;

fn rationals(values: &[Rational]) -> Value {
    Value::from(values.iter().map(format_rational).collect::<Vec<_>>())
}

fn class_cell(class: &BranchClass) -> String {
    join(class.counts().iter().map(u32::to_string))
}

fn join(items: impl Iterator<Item = String>) -> String {
    items.collect::<Vec<_>>().join(";")
}

fn limits(options: &RunOptions) -> SolverLimits {
    SolverLimits {
        class_cap: options.class_cap,
        ..SolverLimits::default()
    }
}

fn typicality(config: &ScenarioConfig, options: &RunOptions) -> Step {
    let eps = config.epsilon.as_ref().expect("schema requires epsilon");
    let reports = typicality_series(&config.q, eps, &config.runs, options.class_cap)?;
    let mut table = Table::new([
        "N",
        "weight_inside",
        "weight_outside",
        "weight_outside_float",
        "mode_class",
    ]);
    let mut points = Vec::new();
    for r in &reports {
        table.push(vec![
            r.runs.to_string(),
            format_rational(&r.weight_inside),
            format_rational(&r.weight_outside),
            float_cell(to_f64(&r.weight_outside)),
            class_cell(&r.mode_class),
        ]);
        points.push(json!({
            "N": r.runs,
            "mode_class": r.mode_class.counts(),
            "weight_inside": format_rational(&r.weight_inside),
            "weight_outside": format_rational(&r.weight_outside),
        }));
    }
    let mut results = json!({ "epsilon": format_rational(eps), "points": points });
    if let Some(delta) = &config.delta {
        let found = min_sample_size(&config.q, eps, delta, config.n_max, options.class_cap)?;
        results["min_sample_size"] = json!({
            "N": match found {
                SampleSize::Reached(n) => Value::from(n),
                SampleSize::NotReached => Value::Null,
            },
            "delta": format_rational(delta),
            "n_max": config.n_max,
        });
    }
    let svg = Plot {
        title: &format!("{}: weight outside the window", config.name),
        x_label: "N",
        y_label: &format!("weight with |m/N - q| > {}", format_rational(eps)),
        kind: PlotKind::Line,
        points: reports
            .iter()
            .map(|r| (f64::from(r.runs), to_f64(&r.weight_outside)))
            .collect(),
    }
    .to_svg();
    Ok((table, results, Some(svg), None))
}

fn branch_stats(config: &ScenarioConfig, options: &RunOptions) -> Step {
    let runs = config.runs[0];
    let ens = BranchEnsemble::new(&config.q, runs, options.class_cap)?;
    let mut header = vec!["class", "multiplicity", "weight", "weight_float", "ln_weight_float"];
    if config.epsilon.is_some() {
        header.push("in_window");
    }
    let mut table = Table::new(header);
    let mut classes = Vec::new();
    let mut points = Vec::new();
    for (i, class) in ens.classes().iter().enumerate() {
        let w = ens.weight(i);
        let ln = ln_class_weight(class, &config.q)?;
        let mut row = vec![
            class_cell(class),
            ens.multiplicities()[i].to_string(),
            format_rational(&w),
            float_cell(to_f64(&w)),
            if ln.is_finite() { float_cell(ln) } else { "-inf".into() },
        ];
        let mut entry = json!({
            "counts": class.counts(),
            "multiplicity": ens.multiplicities()[i].to_string(),
            "weight": format_rational(&w),
        });
        if let Some(eps) = &config.epsilon {
            let inside = in_window(class, &config.q, eps);
            row.push(inside.to_string());
            entry["in_window"] = Value::from(inside);
        }
        table.push(row);
        classes.push(entry);
        points.push((i as f64, to_f64(&w)));
    }
    let mode = &ens.classes()[ens.mode_index()];
    let mut results = json!({
        "N": runs,
        "classes": classes,
        "mode_class": mode.counts(),
        "total_multiplicity": ens.total_multiplicity().to_string(),
    });
    if let Some(eps) = &config.epsilon {
        results["epsilon"] = Value::from(format_rational(eps));
    }
    let svg = Plot {
        title: &format!("{}: class weights at N = {runs}", config.name),
        x_label: "class index (canonical order)",
        y_label: "class weight",
        kind: PlotKind::Line,
        points,
    }
    .to_svg();
    Ok((table, results, Some(svg), None))
}

fn feasibility(config: &ScenarioConfig, options: &RunOptions) -> Step {
    let limits = limits(options);
    let mut table = Table::new(["N", "verdict", "classes_valid", "total_valid", "assignment"]);
    let mut points = Vec::new();
    for &runs in &config.runs {
        let verdict = born_feasibility(&config.q, runs, &limits)?;
        let targets = rationals(&config.q.targets(runs));
        match verdict {
            Feasibility::Feasible(a) => {
                let cell = a
                    .iter()
                    .map(|(c, k)| format!("{}={k}", class_cell(c)))
                    .collect::<Vec<_>>()
                    .join(" ");
                table.push(vec![
                    runs.to_string(),
                    "feasible".into(),
                    a.iter().count().to_string(),
                    a.total_valid().to_string(),
                    cell,
                ]);
                let entries: Vec<Value> = a
                    .iter()
                    .map(|(c, k)| json!({ "counts": c.counts(), "valid": k.to_string() }))
                    .collect();
                points.push(json!({
                    "N": runs,
                    "assignment": entries,
                    "targets": targets,
                    "verdict": "feasible",
                }));
            }
            Feasibility::Infeasible => {
                table.push(vec![
                    runs.to_string(),
                    "infeasible".into(),
                    "0".into(),
                    "0".into(),
                    String::new(),
                ]);
                points.push(json!({
                    "N": runs,
                    "assignment": Value::Null,
                    "targets": targets,
                    "verdict": "infeasible",
                }));
            }
        }
    }
    Ok((table, json!({ "points": points }), None, None))
}

fn joint(config: &ScenarioConfig, options: &RunOptions) -> Step {
    let limits = limits(options);
    let b = config.q_b.as_ref().expect("schema requires q_b");
    let mut table = Table::new(["N", "outcome", "value_a", "value_b", "witness", "verified"]);
    let mut certificates = Vec::new();
    for &runs in &config.runs {
        let cert = joint_infeasibility(&config.q, b, runs, &limits)?;
        let verified = verify_certificate(&cert)?;
        table.push(vec![
            runs.to_string(),
            (cert.reason.outcome + 1).to_string(),
            format_rational(&cert.reason.value_a),
            format_rational(&cert.reason.value_b),
            cert.assignment_frequency
                .as_ref()
                .map_or_else(|| "none".into(), |f| join(f.values().iter().map(format_rational))),
            verified.to_string(),
        ]);
        let mut c = cert.to_json();
        c["verified"] = Value::from(verified);
        certificates.push(c);
    }
    Ok((table, json!({ "certificates": certificates }), None, None))
}

fn achievable(config: &ScenarioConfig, options: &RunOptions) -> Step {
    let n = config.q.n();
    let runs = config.runs[0];
    let set = achievable_set(n, runs, config.k_cap, options.class_cap)?;
    let targets = config.q.targets(runs);
    let mut header: Vec<String> = vec!["index".into()];
    header.extend((1..=n).map(|j| format!("f_{j}")));
    header.push("matches_q".into());
    let mut table = Table::new(header);
    let mut vectors = Vec::new();
    let mut reachable = false;
    for (i, f) in set.iter().enumerate() {
        let hit = f.values() == targets.as_slice();
        reachable |= hit;
        let mut row = vec![i.to_string()];
        row.extend(f.values().iter().map(format_rational));
        row.push(hit.to_string());
        table.push(row);
        vectors.push(rationals(f.values()));
    }
    let results = json!({
        "N": runs,
        "count": set.len(),
        "k_cap": config.k_cap,
        "n": n,
        "q_targets": rationals(&targets),
        "q_reachable": reachable,
        "vectors": vectors,
    });
    let svg = (n >= 2).then(|| {
        Plot {
            title: &format!("{}: achievable perceived counts, N = {runs}", config.name),
            x_label: "f_1",
            y_label: "f_2",
            kind: PlotKind::Scatter,
            points: set
                .iter()
                .map(|f| (to_f64(&f.values()[0]), to_f64(&f.values()[1])))
                .collect(),
        }
        .to_svg()
    });
    Ok((table, results, svg, None))
}

fn collapse(config: &ScenarioConfig) -> Step {
    let n = config.q.n();
    let mut header: Vec<String> = vec!["N".into(), "seed".into()];
    header.extend((1..=n).map(|j| format!("count_{j}")));
    header.extend((1..=n).map(|j| format!("freq_{j}")));
    header.extend(["chi_square_float".into(), "critical_95_float".into(), "exceeds".into()]);
    let mut table = Table::new(header);
    let critical = chi_square_critical_95(n.saturating_sub(1));
    let mut points = Vec::new();
    for &runs in &config.runs {
        let run = sample_runs(&config.q, runs as usize, config.seed)?;
        let counts = outcome_counts(&run, n)?;
        let freqs = empirical_frequencies(&run, n)?;
        let stat = match chi_square_statistic(&run, &config.q) {
            Ok(s) => Some(s),
            Err(CoreError::ExpectedCountTooSmall { .. }) => None,
            Err(e) => return Err(e),
        };
        let exceeds = stat.zip(critical).map(|(s, c)| s > c);
        let mut row = vec![runs.to_string(), config.seed.to_string()];
        row.extend(counts.iter().map(u64::to_string));
        row.extend(freqs.iter().map(format_rational));
        row.push(stat.map_or_else(|| "NA".into(), float_cell));
        row.push(critical.map_or_else(|| "NA".into(), float_cell));
        row.push(exceeds.map_or_else(|| "NA".into(), |e| e.to_string()));
        table.push(row);
        points.push(json!({
            "N": runs,
            "counts": counts,
            "exceeds_95": exceeds,
            "frequencies": rationals(&freqs),
        }));
    }
    let results = json!({
        "generator": "splitmix64",
        "points": points,
        "seed": config.seed,
    });
    Ok((table, results, None, None))
}

fn chain_demo(config: &ScenarioConfig) -> Step {
    let report = equal_validity_demonstration(&config.q)?;
    let mut table = Table::new(["version", "amplitude", "weight", "observer"]);
    let mut terms = Vec::new();
    for (ket, c) in report.derived.terms() {
        let tag = ket
            .label(Role::Observer)
            .map(|l| l.tag().to_string())
            .unwrap_or_default();
        let version = match ObserverTag::parse(&tag) {
            Some(ObserverTag::Aware { version } | ObserverTag::Perceives { version }) => version,
            _ => 0,
        };
        let weight = c.square()?.as_rational().map(|w| format_rational(&w)).unwrap_or_default();
        table.push(vec![version.to_string(), c.to_string(), weight.clone(), tag.clone()]);
        terms.push(json!({
            "amplitude": c.to_string(),
            "ket": ket.to_string(),
            "observer": tag,
            "version": version,
            "weight": weight,
        }));
    }
    let results = json!({
        "aware_versions": report.aware_versions,
        "squared_norm": report.squared_norm.to_string(),
        "states_equal": report.states_equal,
        "terms": terms,
        "versions": report.versions,
    });
    let mut transcript = report.transcript.join("\n");
    transcript.push('\n');
    Ok((table, results, None, Some(transcript)))
}
