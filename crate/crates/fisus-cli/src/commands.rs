//! The experiment commands. Each one consumes the resolved configuration,
//! runs the corresponding pipeline, writes CSV into the output directory, and
//! reports whether every cell finished without warnings.

use std::path::Path;

use fisus::{
    absolute_mitigation_error, build_ansatz, d2e_finite_difference, fidelity_susceptibility,
    fs_spectral, full_ground_energy, grad_expectation, ground_energy, hessian_expectation,
    mean_std, mix_seed, noise_sensitivity_report, reduce, solve_response, squared_overlap_hessian,
    sweep, vqe, Estimate, EstimatorKind, ExactEstimator, Folding, MitigationPlan, NoiseModel,
    NoiseReportRow, OverlapJob, OverlapMethod, Part, PointResult, SweepPoint, SweepRequest,
};
use rayon::prelude::*;

use crate::config::{folding_label, EstimatorChoice, RunConfig};
use crate::csvout::{num, Table};

const QUANTITY_NAMES: [&str; 6] = [
    "energy",
    "d2e_dr2",
    "fidelity_susceptibility",
    "energy_per_site",
    "d2e_per_site",
    "fs_per_site",
];

const SWEEP_SUMMARY_HEADER: [&str; 16] = [
    "r",
    "quantity",
    "method",
    "scale_factors",
    "folding",
    "mean",
    "std",
    "n_trials",
    "flagged_trials",
    "failed_trials",
    "condition_number_max",
    "seed",
    "config_hash",
    "oracle_value",
    "abs_err_of_mean",
    "abs_err_per_trial_mean",
];

const SWEEP_TRIALS_HEADER: [&str; 11] = [
    "r",
    "trial",
    "quantity",
    "value",
    "variance",
    "shots",
    "condition_number",
    "truncated",
    "flagged",
    "seed",
    "config_hash",
];

const STUDY_HEADER: [&str; 14] = [
    "r",
    "quantity",
    "scale_factors",
    "folding",
    "mean",
    "std",
    "n_trials",
    "flagged_trials",
    "failed_trials",
    "oracle_value",
    "abs_err_of_mean",
    "abs_err_per_trial_mean",
    "seed",
    "config_hash",
];

fn es<E: std::fmt::Display>(error: E) -> String {
    error.to_string()
}

fn quantity_estimate(cell: &PointResult, name: &str) -> Estimate {
    match name {
        "energy" => cell.energy,
        "d2e_dr2" => cell.d2e_dr2,
        "fidelity_susceptibility" => cell.fidelity_susceptibility,
        "energy_per_site" => cell.energy_per_site,
        "d2e_per_site" => cell.d2e_per_site,
        "fs_per_site" => cell.fs_per_site,
        other => unreachable!("unknown quantity {other}"),
    }
}

fn oracle_value(l: usize, r: f64, name: &str) -> Result<f64, String> {
    let sites = l as f64;
    Ok(match name {
        "energy" => ground_energy(l, r).map_err(es)?,
        "d2e_dr2" => d2e_finite_difference(l, r, 1e-3).map_err(es)?,
        "fidelity_susceptibility" => fs_spectral(l, r).map_err(es)?,
        "energy_per_site" => ground_energy(l, r).map_err(es)? / sites,
        "d2e_per_site" => d2e_finite_difference(l, r, 1e-3).map_err(es)? / sites,
        "fs_per_site" => fs_spectral(l, r).map_err(es)? / sites,
        "energy_full_space" => full_ground_energy(l, r).map_err(es)?,
        other => unreachable!("unknown quantity {other}"),
    })
}

struct SummaryRow {
    mean: f64,
    std: f64,
    n: usize,
    flagged: usize,
    failed: usize,
    cond_max: f64,
    oracle: f64,
    err_of_mean: f64,
    err_per_trial: f64,
}

fn summarize(point: &SweepPoint, l: usize, name: &str) -> Result<SummaryRow, String> {
    let mut values = Vec::new();
    let mut flagged = 0;
    let mut failed = 0;
    let mut cond_max = f64::NAN;
    for cell in &point.cells {
        match cell {
            Ok(cell) => {
                values.push(quantity_estimate(cell, name).value);
                if cell.flagged || cell.truncated {
                    flagged += 1;
                }
                if !(cond_max >= cell.condition_number) {
                    cond_max = cell.condition_number;
                }
            }
            Err(_) => failed += 1,
        }
    }
    let oracle = oracle_value(l, point.r, name)?;
    if values.is_empty() {
        return Ok(SummaryRow {
            mean: f64::NAN,
            std: f64::NAN,
            n: 0,
            flagged,
            failed,
            cond_max,
            oracle,
            err_of_mean: f64::NAN,
            err_per_trial: f64::NAN,
        });
    }
    let (mean, std) = mean_std(&values);
    let error = absolute_mitigation_error(&values, oracle).map_err(es)?;
    Ok(SummaryRow {
        mean,
        std,
        n: values.len(),
        flagged,
        failed,
        cond_max,
        oracle,
        err_of_mean: error.of_mean,
        err_per_trial: error.per_trial_mean,
    })
}

fn estimator_kind(config: &RunConfig) -> Result<EstimatorKind, String> {
    Ok(match config.estimator {
        EstimatorChoice::Exact => EstimatorKind::Exact,
        EstimatorChoice::Sampled => EstimatorKind::Sampled {
            shots: config.shots,
        },
        EstimatorChoice::Noisy => EstimatorKind::Noisy {
            noise: config.noise(),
            shots: config.shots,
        },
        EstimatorChoice::Mitigated => EstimatorKind::Mitigated {
            noise: config.noise(),
            plan: MitigationPlan::new(config.scale_factors.clone(), config.folding, config.shots)
                .map_err(es)?,
        },
    })
}

pub fn cmd_reduce(config: &RunConfig, out: &Path) -> Result<bool, String> {
    let reduced = reduce(config.l).map_err(es)?;
    println!(
        "{} sites: {} translation orbits packed into {} qubits",
        config.l,
        reduced.dim(),
        reduced.n_qubits()
    );
    for (idx, orbit) in reduced.basis().orbits().iter().enumerate() {
        let members: Vec<String> = orbit
            .members()
            .iter()
            .map(|m| format!("{m:0width$b}", width = config.l))
            .collect();
        println!(
            "  orbit {idx}: size {}, members {{{}}}",
            orbit.size(),
            members.join(", ")
        );
    }

    if reduced.dim() <= 16 {
        for (label, block) in [("field-independent block:", reduced.h0()), ("field coupling block:", reduced.h1())] {
            println!("{label}");
            for i in 0..reduced.dim() {
                let row: Vec<String> = (0..reduced.dim())
                    .map(|j| format!("{:9.5}", block[(i, j)]))
                    .collect();
                println!("  [{}]", row.join(" "));
            }
        }
    } else {
        println!("blocks omitted from the listing (dimension {})", reduced.dim());
    }

    let terms = reduced.observable().terms();
    println!("Pauli decomposition ({} terms):", terms.len());
    let mut table = Table::new(&["l", "part", "label", "coeff", "seed", "config_hash"]);
    let hash = config.hash();
    for term in terms {
        let part = match term.part {
            Part::H0 => "h0",
            Part::H1 => "h1",
        };
        if terms.len() <= 64 {
            println!("  {part} {} {:+.12}", term.string.label(), term.coeff);
        }
        table.push(vec![
            config.l.to_string(),
            part.to_string(),
            term.string.label(),
            num(term.coeff),
            config.seed.to_string(),
            hash.clone(),
        ]);
    }
    table.write(&out.join("reduce_terms.csv")).map_err(es)?;
    Ok(true)
}

pub fn cmd_vqe(config: &RunConfig, out: &Path) -> Result<bool, String> {
    let reduced = reduce(config.l).map_err(es)?;
    let ansatz = build_ansatz(reduced.n_qubits()).map_err(es)?;
    let hash = config.hash();
    let mut table = Table::new(&[
        "r",
        "energy",
        "reference_energy",
        "abs_error",
        "iterations",
        "converged",
        "seed",
        "config_hash",
    ]);
    let mut clean = true;
    for r in config.r_values() {
        let reference = ground_energy(config.l, r).map_err(es)?;
        let search = vqe(&reduced.observable().at(r), &ansatz, Some(reference)).map_err(es)?;
        let error = (search.energy - reference).abs();
        println!(
            "r={r}: energy {:.10} vs reference {reference:.10} ({} iterations, error {error:.2e})",
            search.energy, search.iterations
        );
        if !search.converged {
            eprintln!("warning: ground-state search did not converge at r={r}");
            clean = false;
        }
        table.push(vec![
            num(r),
            num(search.energy),
            num(reference),
            num(error),
            search.iterations.to_string(),
            search.converged.to_string(),
            config.seed.to_string(),
            hash.clone(),
        ]);
    }
    table.write(&out.join("vqe.csv")).map_err(es)?;
    Ok(clean)
}

pub fn cmd_sweep(config: &RunConfig, out: &Path) -> Result<bool, String> {
    let request = SweepRequest {
        sites: config.l,
        r_values: config.r_values(),
        estimator: estimator_kind(config)?,
        trials: config.trials,
        seed: config.seed,
    };
    let points = sweep(&request).map_err(es)?;

    let hash = config.hash();
    let seed_text = config.seed.to_string();
    let method = config.estimator.label();
    let (plan_text, fold_text) = match config.estimator {
        EstimatorChoice::Mitigated => (
            config.scale_factor_text(),
            folding_label(config.folding).to_string(),
        ),
        _ => (String::new(), String::new()),
    };

    let mut summary = Table::new(&SWEEP_SUMMARY_HEADER);
    let mut long = Table::new(&SWEEP_TRIALS_HEADER);
    let mut clean = true;

    for point in &points {
        if !point.vqe.converged {
            eprintln!(
                "warning: ground-state search did not converge at r={}",
                point.r
            );
            clean = false;
        }
        for (trial, cell) in point.cells.iter().enumerate() {
            match cell {
                Ok(cell) => {
                    if cell.flagged || cell.truncated {
                        clean = false;
                    }
                    for name in QUANTITY_NAMES {
                        let estimate = quantity_estimate(cell, name);
                        long.push(vec![
                            num(point.r),
                            trial.to_string(),
                            name.to_string(),
                            num(estimate.value),
                            num(estimate.variance),
                            estimate.shots.to_string(),
                            num(cell.condition_number),
                            cell.truncated.to_string(),
                            cell.flagged.to_string(),
                            seed_text.clone(),
                            hash.clone(),
                        ]);
                    }
                }
                Err(message) => {
                    eprintln!("warning: r={} trial {trial} failed: {message}", point.r);
                    clean = false;
                }
            }
        }

        let mut headline = Vec::new();
        for name in QUANTITY_NAMES {
            let row = summarize(point, config.l, name)?;
            if matches!(name, "energy" | "d2e_dr2" | "fidelity_susceptibility") {
                headline.push(format!("{name} {:.6} ± {:.6}", row.mean, row.std));
            }
            summary.push(vec![
                num(point.r),
                name.to_string(),
                method.to_string(),
                plan_text.clone(),
                fold_text.clone(),
                num(row.mean),
                num(row.std),
                row.n.to_string(),
                row.flagged.to_string(),
                row.failed.to_string(),
                num(row.cond_max),
                seed_text.clone(),
                hash.clone(),
                num(row.oracle),
                num(row.err_of_mean),
                num(row.err_per_trial),
            ]);
        }
        println!("r={}: {}", point.r, headline.join(", "));
    }

    summary.write(&out.join("sweep_summary.csv")).map_err(es)?;
    long.write(&out.join("sweep_trials.csv")).map_err(es)?;
    Ok(clean)
}

pub fn cmd_mitigate(config: &RunConfig, out: &Path) -> Result<bool, String> {
    let n_max = if config.l == 4 { 4 } else { 3 };
    let noise = config.noise();
    let hash = config.hash();
    let seed_text = config.seed.to_string();
    let mut table = Table::new(&STUDY_HEADER);
    let mut clean = true;

    for folding in [Folding::Cnot, Folding::Unitary] {
        for n in 0..=n_max {
            let scales: Vec<u64> = (0..=n).map(|j| 2 * j as u64 + 1).collect();
            let plan_text: String = scales
                .iter()
                .map(u64::to_string)
                .collect::<Vec<String>>()
                .join(";");
            let plan = MitigationPlan::new(scales, folding, config.shots).map_err(es)?;
            let request = SweepRequest {
                sites: config.l,
                r_values: config.r_values(),
                estimator: EstimatorKind::Mitigated { noise, plan },
                trials: config.trials,
                seed: config.seed,
            };
            let points = sweep(&request).map_err(es)?;
            for point in &points {
                for (trial, cell) in point.cells.iter().enumerate() {
                    match cell {
                        Ok(cell) => {
                            if cell.flagged || cell.truncated {
                                clean = false;
                            }
                        }
                        Err(message) => {
                            eprintln!(
                                "warning: folding={} scales={plan_text} r={} trial {trial} failed: {message}",
                                folding_label(folding),
                                point.r
                            );
                            clean = false;
                        }
                    }
                }
                for name in ["energy", "d2e_dr2", "fidelity_susceptibility"] {
                    let row = summarize(point, config.l, name)?;
                    table.push(vec![
                        num(point.r),
                        name.to_string(),
                        plan_text.clone(),
                        folding_label(folding).to_string(),
                        num(row.mean),
                        num(row.std),
                        row.n.to_string(),
                        row.flagged.to_string(),
                        row.failed.to_string(),
                        num(row.oracle),
                        num(row.err_of_mean),
                        num(row.err_per_trial),
                        seed_text.clone(),
                        hash.clone(),
                    ]);
                }
            }
            println!(
                "folding={} scales={plan_text}: {} grid points done",
                folding_label(folding),
                points.len()
            );
        }
    }

    table.write(&out.join("mitigation_study.csv")).map_err(es)?;
    Ok(clean)
}

pub fn cmd_overlap_bench(config: &RunConfig, out: &Path) -> Result<bool, String> {
    let reduced = reduce(config.l).map_err(es)?;
    let ansatz = build_ansatz(reduced.n_qubits()).map_err(es)?;
    let levels = [
        NoiseModel::new(0.0, 0.0).map_err(es)?,
        NoiseModel::new(config.p1 / 2.0, config.p2 / 2.0).map_err(es)?,
        config.noise(),
    ];
    let est = ExactEstimator::noiseless();
    let r_values = config.r_values();

    let reports: Vec<Result<Vec<NoiseReportRow>, String>> = r_values
        .par_iter()
        .enumerate()
        .map(|(idx, &r)| {
            let observable = reduced.observable().at(r);
            let reference = ground_energy(config.l, r).map_err(es)?;
            let search = vqe(&observable, &ansatz, Some(reference)).map_err(es)?;
            if !search.converged {
                return Err(format!("ground-state search did not converge at r={r}"));
            }
            let theta = search.theta_opt;
            let hessian = hessian_expectation(&ansatz, &theta, &observable, &est).map_err(es)?;
            let drive =
                grad_expectation(&ansatz, &theta, &reduced.observable().h1(), &est).map_err(es)?;
            let response = solve_response(&hessian, &drive).map_err(es)?.dtheta_dr;
            let job = OverlapJob::new(
                ansatz.bind(&theta).map_err(es)?,
                ansatz.clone(),
                OverlapMethod::ComputeUncompute,
            )
            .map_err(es)?;
            let exact_fs = fidelity_susceptibility(
                &squared_overlap_hessian(&job, &theta, &est).map_err(es)?,
                &response,
            )
            .map_err(es)?
            .value;
            noise_sensitivity_report(
                &ansatz,
                &theta,
                &response,
                exact_fs,
                &levels,
                config.shots,
                config.trials,
                mix_seed(config.seed, idx as u64),
            )
            .map_err(es)
        })
        .collect();

    let hash = config.hash();
    let mut table = Table::new(&[
        "r",
        "method",
        "implemented",
        "p1",
        "p2",
        "cnot_count",
        "trials",
        "mean_abs_deviation",
        "seed",
        "config_hash",
    ]);
    for (&r, report) in r_values.iter().zip(reports) {
        let rows = report?;
        let best = rows
            .iter()
            .filter(|row| row.implemented && row.p1 == config.p1 && row.p2 == config.p2)
            .min_by(|a, b| a.mean_abs_deviation.total_cmp(&b.mean_abs_deviation));
        if let Some(best) = best {
            println!(
                "r={r}: lowest mean susceptibility deviation at full noise: {} ({:.4})",
                best.method, best.mean_abs_deviation
            );
        }
        for row in rows {
            table.push(vec![
                num(r),
                row.method.to_string(),
                row.implemented.to_string(),
                num(row.p1),
                num(row.p2),
                row.cnot_count.to_string(),
                row.trials.to_string(),
                num(row.mean_abs_deviation),
                config.seed.to_string(),
                hash.clone(),
            ]);
        }
    }
    table.write(&out.join("overlap_bench.csv")).map_err(es)?;
    Ok(true)
}

pub fn cmd_oracle(config: &RunConfig, out: &Path) -> Result<bool, String> {
    let hash = config.hash();
    let mut table = Table::new(&["r", "quantity", "value", "seed", "config_hash"]);
    for r in config.r_values() {
        let mut names: Vec<&str> = QUANTITY_NAMES.to_vec();
        names.push("energy_full_space");
        for name in names {
            let value = oracle_value(config.l, r, name)?;
            table.push(vec![
                num(r),
                name.to_string(),
                num(value),
                config.seed.to_string(),
                hash.clone(),
            ]);
        }
        println!(
            "r={r}: energy {:.8}, d2E/dr2 {:.8}, susceptibility {:.8}",
            oracle_value(config.l, r, "energy")?,
            oracle_value(config.l, r, "d2e_dr2")?,
            oracle_value(config.l, r, "fidelity_susceptibility")?
        );
    }
    table.write(&out.join("oracle.csv")).map_err(es)?;
    Ok(true)
}
