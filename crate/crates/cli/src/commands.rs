//! The five subcommands. Human and JSON output carry the same numbers;
//! every command writes `run.txt` (the resolved config) into the output
//! directory, plus its own artifacts.

use std::io::Write;

use anyhow::{Context, Result};
use serde_json::json;

use deanflow::basis::{ModeIndex, SpectralField};
use deanflow::dynamics::{assemble, integrate, random_field, steady_state};
use deanflow::fields::{count_cells, evaluate_velocity, export, ExportFormat};
use deanflow::reduction::{equilibrium_amplitude, gamma_coefficient, InteractionTensor};
use deanflow::stability::{branch_eigenvalues, critical_lambda, critical_point, pes_check};
use deanflow::{Error, ExecMode};

use crate::config::RunConfig;

fn prepare_out_dir(run: &RunConfig) -> Result<()> {
    std::fs::create_dir_all(&run.out_dir)
        .with_context(|| format!("creating output directory {}", run.out_dir.display()))?;
    let manifest = run.out_dir.join("run.txt");
    std::fs::write(&manifest, run.manifest())
        .with_context(|| format!("writing {}", manifest.display()))?;
    Ok(())
}

fn reversed_note(run: &RunConfig) -> Option<String> {
    run.lambda_reversed().then(|| {
        format!(
            "pressure gradient reversed: analysing |lambda| = {:.6}; the two eigenvalue \
             branches swap roles",
            run.lambda
        )
    })
}

pub fn basic_flow(run: &RunConfig, as_json: bool) -> Result<()> {
    prepare_out_dir(run)?;
    let p = &run.params;
    let c = p.profile_constants();
    let g = |r: f64| r * r.ln() + c.a * r + c.b / r;
    let r1 = p.inner_radius;
    let r2 = p.outer_radius;
    let wall_residual_inner = (g(r1) - r2 * r2) / (r2 * r2);
    let wall_residual_outer = (g(r2) - r1 * r1) / (r1 * r1);

    let (ng_theta, ng_r) = p.narrow_gap_coefficients();
    let mut samples = Vec::new();
    for i in 0..5 {
        let r = r1 + p.gap() * i as f64 / 4.0;
        let (c_theta, c_r) = p.exact_coefficients(&c, r)?;
        samples.push((r, c_theta, c_r));
    }

    if as_json {
        let payload = json!({
            "A": c.a,
            "B": c.b,
            "wall_residual_inner": wall_residual_inner,
            "wall_residual_outer": wall_residual_outer,
            "narrow_gap": { "c_theta": ng_theta, "c_r": ng_r },
            "coefficients": samples.iter().map(|(r, ct, cr)| json!({
                "r": r, "c_theta": ct, "c_r": cr,
            })).collect::<Vec<_>>(),
            "lambda": run.lambda_signed,
            "lambda_abs": run.lambda,
            "asymptotics_trusted": p.asymptotics_trusted(),
        });
        println!("{}", serde_json::to_string_pretty(&payload)?);
        return Ok(());
    }

    println!("basic flow report");
    println!("  A = {:.9}", c.a);
    println!("  B = {:.9}", c.b);
    println!(
        "  wall residuals (relative): inner {wall_residual_inner:.3e}, outer {wall_residual_outer:.3e}"
    );
    println!("  narrow-gap limits: c_theta = {ng_theta:.6}, c_r = {ng_r:.6}");
    println!("  exact coefficients across the gap:");
    for (r, ct, cr) in &samples {
        println!("    r = {r:<10.6} c_theta = {ct:>12.6}  c_r = {cr:>12.6}");
    }
    println!(
        "  asymptotics trusted (gap/R1 <= 0.1): {}",
        p.asymptotics_trusted()
    );
    println!("  lambda = {:.6}", run.lambda_signed);
    if let Some(note) = reversed_note(run) {
        println!("  note: {note}");
    }
    Ok(())
}

pub fn critical(run: &RunConfig, as_json: bool) -> Result<()> {
    prepare_out_dir(run)?;
    let length = run.params.axial_period;
    let cp = critical_point(length)?;
    if cp.degenerate {
        return Err(Error::DegenerateCritical {
            m_a: cp.m0,
            m_b: cp.runner_up_m,
            lambda: cp.lambda0,
            gap: cp.runner_up_gap,
        }
        .into());
    }
    let table_to = cp.scanned_to.min(64);
    let table: Vec<(u32, f64)> = (1..=table_to)
        .map(|m| (m, critical_lambda(m, length)))
        .collect();
    let pes = pes_check(length, 0.01, cp.scanned_to, run.truncation.max_n)?;

    if as_json {
        let payload = json!({
            "L": length,
            "m0": cp.m0,
            "lambda0": cp.lambda0,
            "degenerate": cp.degenerate,
            "runner_up_m": cp.runner_up_m,
            "runner_up_gap": cp.runner_up_gap,
            "table": table.iter().map(|(m, v)| json!({"m": m, "lambda_m": v})).collect::<Vec<_>>(),
            "pes": {
                "beta_below": pes.beta_below,
                "beta_at": pes.beta_at,
                "beta_above": pes.beta_above,
                "others_max": pes.others_max,
                "others_all_negative": pes.others_all_negative,
                "safe_delta_frac": pes.safe_delta_frac,
            },
            "lambda": run.lambda_signed,
        });
        println!("{}", serde_json::to_string_pretty(&payload)?);
        return Ok(());
    }

    println!("critical curve at L = {length}");
    println!("    m      lambda_m");
    for (m, v) in &table {
        let marker = if *m == cp.m0 { "  <- minimum" } else { "" };
        println!("  {m:>3}  {v:>12.6}{marker}");
    }
    println!("  m0 = {}, lambda0 = {:.9}", cp.m0, cp.lambda0);
    println!(
        "  runner-up m = {} at a relative gap of {:.3e}",
        cp.runner_up_m, cp.runner_up_gap
    );
    println!(
        "  exchange of stabilities at +-1%: beta = ({:+.6e}, {:+.6e}, {:+.6e})",
        pes.beta_below, pes.beta_at, pes.beta_above
    );
    println!(
        "  all other modes decaying above critical: {} (largest {:+.6e}); safe margin {:.4}%",
        pes.others_all_negative,
        pes.others_max,
        100.0 * pes.safe_delta_frac
    );
    println!(
        "  configured lambda = {:.6} ({})",
        run.lambda,
        if run.lambda >= cp.lambda0 { "supercritical" } else { "subcritical" }
    );
    Ok(())
}

pub fn bifurcation(run: &RunConfig, as_json: bool, dump_tensor: bool) -> Result<()> {
    prepare_out_dir(run)?;
    let length = run.params.axial_period;
    let cp = critical_point(length)?;
    if cp.degenerate {
        return Err(Error::DegenerateCritical {
            m_a: cp.m0,
            m_b: cp.runner_up_m,
            lambda: cp.lambda0,
            gap: cp.runner_up_gap,
        }
        .into());
    }
    let result = gamma_coefficient(cp.m0, length, cp.lambda0, run.truncation)?;
    let crit = ModeIndex::plus(cp.m0, 1);

    // The narrower index-set reading of the slaved sum drops the mean-flow
    // modes; flag it when the difference exceeds the truncation drift.
    let reading_gap = (result.gamma - result.gamma_restricted).abs() / result.gamma;
    let reading_note = (reading_gap > result.convergence_estimate.max(1e-12)).then(|| {
        format!(
            "restricting the slaved sum to axial wavenumbers >= 2 would give {:.6e} \
             (the mean-flow modes carry the sum)",
            result.gamma_restricted
        )
    });

    let sweep = [-0.05, -0.02, 0.02, 0.04, 0.08];
    let mut rows = Vec::new();
    for eps in sweep {
        let lambda = cp.lambda0 * (1.0 + eps);
        let beta1 = branch_eigenvalues(cp.m0, 1, length, lambda).0;
        let amp = equilibrium_amplitude(lambda, &result, length);
        let system = assemble(length, lambda, run.truncation, ExecMode::default())?;
        let mut sims = [0.0f64; 2];
        let mut converged = [true; 2];
        for (slot, sign) in [(0usize, 1.0f64), (1, -1.0)] {
            let mut init = SpectralField::zero(run.truncation);
            init.set(crit, 0.01 * sign)?;
            let end = steady_state(&system, &init, &run.sim_config())?;
            converged[slot] = end.converged;
            sims[slot] = if end.state.norm() < 1e-8 {
                0.0
            } else {
                end.state.get(crit)
            };
        }
        rows.push((lambda, beta1, amp.y_plus, sims[0], sims[1], converged));
    }

    let csv_path = run.out_dir.join("bifurcation.csv");
    {
        let file = std::fs::File::create(&csv_path)
            .with_context(|| format!("writing {}", csv_path.display()))?;
        let mut out = std::io::BufWriter::new(file);
        writeln!(out, "lambda,beta1,y_pred,y_sim_plus,y_sim_minus")?;
        for (lambda, beta1, y_pred, y_p, y_m, _) in &rows {
            writeln!(
                out,
                "{lambda:.16e},{beta1:.16e},{y_pred:.16e},{y_p:.16e},{y_m:.16e}"
            )?;
        }
    }

    let tensor_path = dump_tensor.then(|| run.out_dir.join("tensor.txt"));
    if let Some(path) = &tensor_path {
        let tensor = InteractionTensor::assemble(run.truncation, length, ExecMode::default())?;
        tensor.write_triples(path)?;
    }

    if as_json {
        let payload = json!({
            "m0": cp.m0,
            "lambda0": cp.lambda0,
            "gamma": result.gamma,
            "amplitude_coefficient": result.amplitude_coefficient,
            "convergence_estimate": result.convergence_estimate,
            "gamma_restricted": result.gamma_restricted,
            "reading_note": reading_note,
            "sweep": rows.iter().map(|(lambda, beta1, y_pred, y_p, y_m, conv)| json!({
                "lambda": lambda,
                "beta1": beta1,
                "y_pred": y_pred,
                "y_sim_plus": y_p,
                "y_sim_minus": y_m,
                "converged": conv[0] && conv[1],
            })).collect::<Vec<_>>(),
            "csv": csv_path.display().to_string(),
            "tensor": tensor_path.as_ref().map(|p| p.display().to_string()),
        });
        println!("{}", serde_json::to_string_pretty(&payload)?);
        return Ok(());
    }

    println!("bifurcation at L = {length}: m0 = {}, lambda0 = {:.9}", cp.m0, cp.lambda0);
    println!(
        "  gamma = {:.9} (truncation drift {:.3e}), amplitude coefficient a = {:.6}",
        result.gamma, result.convergence_estimate, result.amplitude_coefficient
    );
    if let Some(note) = &reading_note {
        println!("  note: {note}");
    }
    println!("    lambda        beta1        y_pred      y_sim_plus   y_sim_minus");
    for (lambda, beta1, y_pred, y_p, y_m, conv) in &rows {
        let tag = if conv[0] && conv[1] { "" } else { "  (not converged)" };
        println!("  {lambda:>10.5}  {beta1:>11.5}  {y_pred:>11.6}  {y_p:>11.6}  {y_m:>11.6}{tag}");
    }
    println!("  wrote {}", csv_path.display());
    if let Some(path) = &tensor_path {
        println!("  wrote {}", path.display());
    }
    Ok(())
}

pub fn simulate(run: &RunConfig, as_json: bool) -> Result<()> {
    prepare_out_dir(run)?;
    let length = run.params.axial_period;
    let system = assemble(length, run.lambda, run.truncation, ExecMode::default())?;
    let initial_norm = 0.1;
    let initial = random_field(run.truncation, run.seed, initial_norm);
    let traj = integrate(&system, &initial, &run.sim_config())?;
    let path = run.out_dir.join("trajectory.csv");
    traj.write_csv(&path)?;

    let final_state = traj.final_state();
    let final_norm = final_state.norm();
    let decayed = final_norm < 1e-6 * initial_norm;
    let (_, crit) = system.critical_mode()?;
    let y_crit = final_state.get(crit);
    let lambda0 = critical_point(length)?.lambda0;

    if as_json {
        let payload = json!({
            "lambda": run.lambda,
            "lambda0": lambda0,
            "initial_norm": initial_norm,
            "final_norm": final_norm,
            "decayed": decayed,
            "critical_mode": crit.to_string(),
            "y_critical": y_crit,
            "trajectory": path.display().to_string(),
            "samples": traj.times.len(),
        });
        println!("{}", serde_json::to_string_pretty(&payload)?);
        return Ok(());
    }

    println!(
        "simulate: lambda = {:.6} ({}critical, lambda0 = {:.6})",
        run.lambda,
        if run.lambda >= lambda0 { "super" } else { "sub" },
        lambda0
    );
    if let Some(note) = reversed_note(run) {
        println!("  note: {note}");
    }
    if decayed {
        println!(
            "  decayed to rest state: |u({:.3})| = {final_norm:.3e} from |u0| = {initial_norm}",
            run.t_end
        );
    } else {
        println!(
            "  saturated: |u| = {final_norm:.6}, critical-mode coordinate y[{crit}] = {y_crit:+.6}"
        );
    }
    println!("  wrote {}", path.display());
    Ok(())
}

pub fn render(run: &RunConfig, as_json: bool, nr: usize, nz: usize) -> Result<()> {
    prepare_out_dir(run)?;
    let length = run.params.axial_period;
    let cp = critical_point(length)?;
    let system = assemble(length, run.lambda, run.truncation, ExecMode::default())?;
    // Seed the critical-mode direction so the rendered structure is the
    // post-critical vortex state (random seeds can land on secondary
    // wavenumber states farther above onset).
    let mut init = SpectralField::zero(run.truncation);
    init.set(ModeIndex::plus(cp.m0, 1), 0.01)?;
    let traj = integrate(&system, &init, &run.sim_config())?;
    let final_state = traj.final_state();
    let grid = evaluate_velocity(&final_state, nr, nz, length, run.params.nd_inner())?;
    let csv_path = run.out_dir.join("field.csv");
    let svg_path = run.out_dir.join("field.svg");
    export(&grid, ExportFormat::Csv, &csv_path)?;
    export(&grid, ExportFormat::Svg, &svg_path)?;
    // A decayed state still has a sign pattern at denormal amplitudes;
    // only count cells in a surviving flow.
    let decayed = final_state.norm() < 1e-8;
    let cells = if decayed {
        0
    } else {
        match count_cells(&grid) {
            Ok(c) => c,
            Err(Error::NoFlow) => 0,
            Err(e) => return Err(e.into()),
        }
    };

    if as_json {
        let payload = json!({
            "lambda": run.lambda,
            "lambda0": cp.lambda0,
            "m0": cp.m0,
            "cells": cells,
            "final_norm": final_state.norm(),
            "field_csv": csv_path.display().to_string(),
            "field_svg": svg_path.display().to_string(),
        });
        println!("{}", serde_json::to_string_pretty(&payload)?);
        return Ok(());
    }

    println!(
        "render: lambda = {:.6}, lambda0 = {:.6}, m0 = {}",
        run.lambda, cp.lambda0, cp.m0
    );
    if cells == 0 {
        println!("  flow decayed: no vortex cells to count");
    } else {
        println!("  mid-gap vortex cells: {cells}");
    }
    println!("  wrote {}", csv_path.display());
    println!("  wrote {}", svg_path.display());
    Ok(())
}
