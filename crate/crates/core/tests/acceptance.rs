//! Acceptance suite: one test per criterion, each printing a PASS line
//! with the measured margins (visible with `--nocapture`; failures always
//! show them). Run with
//!
//! ```text
//! cargo test -p deanflow --test acceptance -- --nocapture
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use deanflow::basis::{vector_mode, ModeIndex, SpectralField, Truncation};
use deanflow::dynamics::{
    assemble, basin_experiment, integrate, steady_state, random_field, SimulationConfig,
};
use deanflow::fields::{count_cells, evaluate_velocity, export, ExportFormat};
use deanflow::geometry::FluidParameters;
use deanflow::quad::QuadratureGrid;
use deanflow::reduction::{gamma_coefficient, trilinear, InteractionTensor};
use deanflow::stability::{
    branch_eigenvalues, critical_lambda, critical_point, mode_eigenvalue, pes_check,
    reduced_matrix,
};
use deanflow::ExecMode;

fn pass(tag: &str, detail: String) {
    println!("[{tag}] PASS  {detail}");
}

/// Criterion 1: wall values reproduced to 1e-12 relative for 100 random
/// admissible annuli.
#[test]
fn ac1_basic_flow_boundary_reproduction() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let r1: f64 = rng.gen_range(0.5..8.0);
        let r2 = r1 * (1.0 + rng.gen_range(1e-3..2.0));
        let p = FluidParameters::new(r1, r2, 1.0, 1.0, 1.0, 1.0).unwrap();
        let c = p.profile_constants();
        let g = |r: f64| r * r.ln() + c.a * r + c.b / r;
        worst = worst
            .max(((g(r1) - r2 * r2) / (r2 * r2)).abs())
            .max(((g(r2) - r1 * r1) / (r1 * r1)).abs());
    }
    assert!(worst < 1e-12, "worst relative wall error {worst:.3e}");
    pass("AC1", format!("100 annuli, worst wall error {worst:.3e} (< 1e-12)"));
}

/// Criterion 2: the narrow-gap deviation shrinks at least 5x per decade of
/// eta = l/R1 over {1e-2, 1e-3, 1e-4}.
#[test]
fn ac2_narrow_gap_asymptotics() {
    let err_at = |eta: f64| {
        let r1 = 1.0 / eta;
        let p = FluidParameters::new(r1, r1 + 1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let c = p.profile_constants();
        let (lt, lr) = p.narrow_gap_coefficients();
        let mut worst: f64 = 0.0;
        for i in 0..32 {
            let r = r1 + (i as f64 + 0.5) / 32.0;
            let (et, er) = p.exact_coefficients(&c, r).unwrap();
            worst = worst.max(((et - lt) / lt).abs()).max(((er - lr) / lr).abs());
        }
        worst
    };
    let errs = [err_at(1e-2), err_at(1e-3), err_at(1e-4)];
    for w in errs.windows(2) {
        assert!(
            w[0] / w[1] >= 5.0,
            "per-decade decrease only {:.2}x ({:.3e} -> {:.3e})",
            w[0] / w[1],
            w[0],
            w[1]
        );
    }
    pass(
        "AC2",
        format!(
            "err(1e-2..1e-4) = {:.3e}, {:.3e}, {:.3e}; decade ratios {:.1}x, {:.1}x (>= 5x)",
            errs[0],
            errs[1],
            errs[2],
            errs[0] / errs[1],
            errs[1] / errs[2]
        ),
    );
}

/// Criterion 3: closed-form growth rates vs dense 2x2 eigensolves for 1000
/// random configurations, and the operator matrix residual at (4,4).
#[test]
fn ac3_spectrum_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst_eig: f64 = 0.0;
    for _ in 0..1000 {
        let m = rng.gen_range(1..=8u32);
        let n = rng.gen_range(1..=8u32);
        let length = rng.gen_range(0.5..8.0);
        let lambda = rng.gen_range(0.0..200.0);
        let a = reduced_matrix(m, n, length, lambda);
        let eig = nalgebra::Matrix2::new(a[0][0], a[0][1], a[1][0], a[1][1]).complex_eigenvalues();
        assert!(eig[0].im.abs() < 1e-10 && eig[1].im.abs() < 1e-10);
        let mut re = [eig[0].re, eig[1].re];
        re.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let (b1, b2) = branch_eigenvalues(m, n, length, lambda);
        worst_eig = worst_eig.max((re[1] - b1).abs()).max((re[0] - b2).abs());
    }
    assert!(worst_eig < 1e-10, "worst eigensolve deviation {worst_eig:.3e}");

    // Operator application: Laplacian plus swirl coupling, projected back
    // onto the basis by quadrature, must be diag(beta).
    let length = 2.0;
    let lambda = critical_lambda(1, length);
    let truncation = Truncation::new(4, 4).unwrap();
    let grid = QuadratureGrid::for_truncation(truncation, length);
    let vecs: Vec<_> = truncation
        .modes()
        .into_iter()
        .map(|i| vector_mode(i, length))
        .collect();
    let mut worst_op: f64 = 0.0;
    for (i, fi) in vecs.iter().enumerate() {
        let lam = deanflow::basis::laplacian_eigenvalue(fi.index.m, fi.index.n, length);
        let beta = mode_eigenvalue(fi.index, length, lambda);
        for (j, fj) in vecs.iter().enumerate() {
            let entry = grid.integrate(|s, z| {
                let (ur, ut, uz) = fi.velocity_at(s, z);
                let (wr, wt, wz) = fj.velocity_at(s, z);
                (lam * ur + lambda * ut) * wr + (lam * ut + lambda * ur) * wt + lam * uz * wz
            });
            let expected = if i == j { beta } else { 0.0 };
            worst_op = worst_op.max((entry - expected).abs());
        }
    }
    assert!(worst_op < 1e-10, "worst operator residual {worst_op:.3e}");
    pass(
        "AC3",
        format!(
            "1000 random eigensolves agree to {worst_eig:.3e}; operator residual {worst_op:.3e} (< 1e-10)"
        ),
    );
}

/// Criterion 4: orthonormality at (4,4); tensor skew-symmetry and diagonal
/// annihilation at (6,6); closed form vs refined-grid quadrature at (3,3).
#[test]
fn ac4_orthonormality_and_interactions() {
    let length = 2.0;

    let trunc44 = Truncation::new(4, 4).unwrap();
    let grid = QuadratureGrid::for_truncation(trunc44, length);
    let vecs: Vec<_> = trunc44
        .modes()
        .into_iter()
        .map(|i| vector_mode(i, length))
        .collect();
    let mut worst_gram: f64 = 0.0;
    for (i, a) in vecs.iter().enumerate() {
        for (j, b) in vecs.iter().enumerate() {
            let dot = grid.integrate(|s, z| {
                let (ar, at, az) = a.velocity_at(s, z);
                let (br, bt, bz) = b.velocity_at(s, z);
                ar * br + at * bt + az * bz
            });
            let expected = if i == j { 1.0 } else { 0.0 };
            worst_gram = worst_gram.max((dot - expected).abs());
        }
    }
    assert!(worst_gram < 1e-10, "Gram deviation {worst_gram:.3e}");

    let trunc66 = Truncation::new(6, 6).unwrap();
    let tensor = InteractionTensor::assemble(trunc66, length, ExecMode::default()).unwrap();
    let mut worst_skew: f64 = 0.0;
    let mut worst_diag: f64 = 0.0;
    for e in tensor.entries() {
        let j = tensor.modes()[e.advector as usize];
        let k = tensor.modes()[e.advected as usize];
        let l = tensor.modes()[e.target as usize];
        worst_skew = worst_skew.max((e.value + tensor.value(j, l, k)).abs());
        if k == l {
            worst_diag = worst_diag.max(e.value.abs());
        }
    }
    assert!(worst_skew < 1e-10, "skew-symmetry defect {worst_skew:.3e}");
    assert!(worst_diag < 1e-10, "diagonal annihilation defect {worst_diag:.3e}");

    let trunc33 = Truncation::new(3, 3).unwrap();
    let fine = QuadratureGrid::for_truncation(trunc33, length).refined(4);
    let modes = trunc33.modes();
    let single = |idx: ModeIndex| {
        let mut f = SpectralField::zero(trunc33);
        f.set(idx, 1.0).unwrap();
        f
    };
    let mut worst_cross: f64 = 0.0;
    for a in &modes {
        let fa = single(*a);
        let va = vector_mode(*a, length);
        for b in &modes {
            let fb = single(*b);
            let vb = vector_mode(*b, length);
            for c in &modes {
                let closed = deanflow::reduction::trilinear_closed(&va, &vb, &vector_mode(*c, length));
                let quad = trilinear(&fa, &fb, &single(*c), &fine).unwrap();
                worst_cross = worst_cross.max((closed - quad).abs());
            }
        }
    }
    assert!(worst_cross < 1e-9, "closed-vs-quadrature defect {worst_cross:.3e}");
    pass(
        "AC4",
        format!(
            "Gram dev {worst_gram:.3e}; skew {worst_skew:.3e}; diag {worst_diag:.3e} at (6,6); \
             closed-vs-quadrature {worst_cross:.3e} at (3,3)"
        ),
    );
}

/// Criterion 5: critical numbers for L = 2 and L = 4, degeneracy detection
/// near the tie box length, and the exchange-of-stabilities pattern.
#[test]
fn ac5_critical_numbers_and_pes() {
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;

    let cp2 = critical_point(2.0).unwrap();
    let expect2 = pi2 * 5.0_f64.sqrt() * 1.25;
    assert_eq!(cp2.m0, 1);
    assert!(((cp2.lambda0 - expect2) / expect2).abs() < 1e-9);

    let cp4 = critical_point(4.0).unwrap();
    let expect4 = 125.0 * pi2 / 48.0;
    assert_eq!(cp4.m0, 3);
    assert!(((cp4.lambda0 - expect4) / expect4).abs() < 1e-9);

    // Bisection oracle for the tie of the first two branch curves.
    let g = |l: f64| critical_lambda(1, l) - critical_lambda(2, l);
    let (mut lo, mut hi) = (2.0, 2.2);
    assert!(g(lo) < 0.0 && g(hi) > 0.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let l_star = 0.5 * (lo + hi);
    let cp_star = critical_point(l_star).unwrap();
    assert!(cp_star.degenerate, "tie gap {:.3e}", cp_star.runner_up_gap);

    let report = pes_check(2.0, 0.01, 64, 8).unwrap();
    assert!(report.beta_below < 0.0);
    assert!(report.beta_at.abs() < 1e-9);
    assert!(report.beta_above > 0.0);
    assert!(report.others_all_negative);
    pass(
        "AC5",
        format!(
            "L=2: (m0, lambda0) = (1, {:.6}); L=4: (3, {:.6}); degeneracy flagged at L = {l_star:.6}; \
             PES pattern ({:+.3e}, {:+.3e}, {:+.3e}), others_max {:+.3e}",
            cp2.lambda0, cp4.lambda0, report.beta_below, report.beta_at, report.beta_above,
            report.others_max
        ),
    );
}

/// Criterion 6: subcritical decay for 10 seeded initials and first-order
/// convergence of the discrete energy law.
#[test]
fn ac6_subcritical_decay_and_energy_law() {
    let length = 2.0;
    let lambda0 = critical_lambda(1, length);
    let lambda = 0.9 * lambda0;
    let truncation = Truncation::new(4, 4).unwrap();
    let system = assemble(length, lambda, truncation, ExecMode::default()).unwrap();
    let beta1 = branch_eigenvalues(1, 1, length, lambda).0;
    assert!(beta1 < 0.0);
    let horizon = 20.0 / beta1.abs();

    let results = deanflow::par::map_indexed(ExecMode::default(), 10, |i| {
        let initial = random_field(truncation, 600 + i as u64, 0.1);
        let traj = integrate(
            &system,
            &initial,
            &SimulationConfig {
                t_end: horizon,
                ..Default::default()
            },
        )
        .unwrap();
        (2.0 * traj.energies.last().unwrap()).sqrt() / 0.1
    });
    let worst_ratio = results.iter().cloned().fold(0.0f64, f64::max);
    assert!(
        worst_ratio < 1e-6,
        "slowest decay only reached {worst_ratio:.3e} of the initial norm"
    );

    // Energy-law defect halves with dt.
    let initial = random_field(truncation, 77, 0.5);
    let defect = |dt: f64| {
        let traj = integrate(
            &system,
            &initial,
            &SimulationConfig {
                dt: Some(dt),
                t_end: 0.4,
                ..Default::default()
            },
        )
        .unwrap();
        let mut worst: f64 = 0.0;
        for i in 1..traj.times.len() {
            let de = (traj.energies[i] - traj.energies[i - 1]) / (traj.times[i] - traj.times[i - 1]);
            worst = worst.max((de - system.energy_rate(&traj.states[i - 1])).abs());
        }
        worst
    };
    let coarse = defect(4e-4);
    let fine = defect(2e-4);
    let ratio = fine / coarse;
    assert!(
        (0.3..0.7).contains(&ratio),
        "energy-law defect ratio {ratio:.3} not ~1/2"
    );
    pass(
        "AC6",
        format!(
            "10 seeds decayed to <= {worst_ratio:.3e} of |u0| by t = 20/|beta1|; \
             energy-law defect ratio {ratio:.3} (~0.5)"
        ),
    );
}

/// Criterion 7: supercritical amplitudes against the reduction, pitchfork
/// scaling, gamma positivity/convergence, and the two-attractor basin
/// split near onset.
#[test]
fn ac7_pitchfork_amplitudes_and_basins() {
    let length = 2.0;
    let cp = critical_point(length).unwrap();
    assert_eq!(cp.m0, 1);
    let lambda0 = cp.lambda0;

    let result = gamma_coefficient(cp.m0, length, lambda0, Truncation::new(8, 8).unwrap()).unwrap();
    assert!(result.gamma > 0.0, "gamma = {}", result.gamma);
    assert!(
        result.convergence_estimate < 1e-2,
        "gamma truncation drift {:.3e}",
        result.convergence_estimate
    );

    let sim_trunc = Truncation::new(8, 8).unwrap();
    let crit = ModeIndex::plus(cp.m0, 1);
    let mut points: Vec<(f64, f64)> = Vec::new();
    let mut worst_mismatch: f64 = 0.0;
    for eps in [0.02, 0.04, 0.08] {
        let lambda = lambda0 * (1.0 + eps);
        let system = assemble(length, lambda, sim_trunc, ExecMode::default()).unwrap();
        let beta1 = branch_eigenvalues(cp.m0, 1, length, lambda).0;
        let y_pred = (beta1 / result.gamma).sqrt();
        let envelope = 0.05 + 0.25 * eps.sqrt();
        for sign in [1.0, -1.0] {
            let mut init = SpectralField::zero(sim_trunc);
            init.set(crit, 0.01 * sign).unwrap();
            let end = steady_state(
                &system,
                &init,
                &SimulationConfig {
                    t_end: 600.0,
                    ..Default::default()
                },
            )
            .unwrap();
            assert!(end.converged, "eps = {eps}, sign = {sign}");
            let y_sim = end.state.get(crit);
            let mismatch = (y_sim - sign * y_pred).abs() / y_pred;
            worst_mismatch = worst_mismatch.max(mismatch);
            assert!(
                mismatch <= envelope,
                "amplitude mismatch {mismatch:.3e} exceeds envelope {envelope:.3e} at eps = {eps}"
            );
            if sign > 0.0 {
                points.push((lambda - lambda0, y_sim * y_sim));
            }
        }
    }

    // Through-origin regression of amplitude^2 against (lambda - lambda0).
    let sxy: f64 = points.iter().map(|(x, y)| x * y).sum();
    let sxx: f64 = points.iter().map(|(x, _)| x * x).sum();
    let syy: f64 = points.iter().map(|(_, y)| y * y).sum();
    let slope = sxy / sxx;
    let r2 = sxy * sxy / (sxx * syy);
    let slope_pred = 1.0 / (result.gamma * (1.0 + length * length).sqrt());
    assert!(r2 > 0.99, "R^2 = {r2:.5}");
    let slope_err = ((slope - slope_pred) / slope_pred).abs();
    assert!(slope_err < 0.15, "slope off by {slope_err:.3}");

    // Basin split near onset: two and only two attracting endpoints.
    let lambda_basin = lambda0 * 1.02;
    let basin_sys = assemble(length, lambda_basin, Truncation::new(4, 4).unwrap(), ExecMode::default())
        .unwrap();
    let report = basin_experiment(
        &basin_sys,
        20,
        0.1,
        &SimulationConfig {
            t_end: 1500.0,
            ..Default::default()
        },
        ExecMode::default(),
    )
    .unwrap();
    assert_eq!(report.n_unresolved, 0, "every seed must classify");
    assert!(report.n_plus > 0 && report.n_minus > 0);
    assert_eq!(report.n_plus + report.n_minus, 20);
    let plus_vals: Vec<f64> = report
        .runs
        .iter()
        .filter(|r| r.critical_coordinate > 0.0)
        .map(|r| r.critical_coordinate)
        .collect();
    let minus_vals: Vec<f64> = report
        .runs
        .iter()
        .filter(|r| r.critical_coordinate < 0.0)
        .map(|r| r.critical_coordinate)
        .collect();
    let spread = |vals: &[f64]| {
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (hi - lo) / hi.abs().max(lo.abs())
    };
    assert!(spread(&plus_vals) < 1e-6, "plus endpoints not a single state");
    assert!(spread(&minus_vals) < 1e-6, "minus endpoints not a single state");

    pass(
        "AC7",
        format!(
            "gamma = {:.6} (+, drift {:.1e}); worst amplitude mismatch {:.2}%; \
             R^2 = {:.5}, slope {:.3} vs {:.3}; basin 20/20 classified ({} plus / {} minus)",
            result.gamma,
            result.convergence_estimate,
            100.0 * worst_mismatch,
            r2,
            slope,
            slope_pred,
            report.n_plus,
            report.n_minus
        ),
    );
}

/// Criterion 8: the rendered post-critical streamfunction has exactly m0
/// mid-gap cells for L in {2, 4}.
#[test]
fn ac8_vortex_structure() {
    for (length, trunc, expected) in [
        (2.0, Truncation::new(8, 8).unwrap(), 1usize),
        (4.0, Truncation::new(8, 4).unwrap(), 3usize),
    ] {
        let cp = critical_point(length).unwrap();
        let lambda = 1.05 * cp.lambda0;
        let system = assemble(length, lambda, trunc, ExecMode::default()).unwrap();
        let mut init = SpectralField::zero(trunc);
        init.set(ModeIndex::plus(cp.m0, 1), 0.01).unwrap();
        let end = steady_state(
            &system,
            &init,
            &SimulationConfig {
                t_end: 400.0,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(end.converged);
        let grid = evaluate_velocity(&end.state, 65, 129, length, 0.0).unwrap();
        let cells = count_cells(&grid).unwrap();
        assert_eq!(
            cells, expected,
            "expected {expected} mid-gap cells at L = {length}"
        );
        pass(
            "AC8",
            format!("L = {length}: m0 = {}, rendered mid-gap cells = {cells}", cp.m0),
        );
    }
}

/// Criterion 9: byte-identical CSV and SVG outputs across repeated runs
/// with the same configuration and seed.
#[test]
fn ac9_deterministic_outputs() {
    let length = 2.0;
    let lambda = 1.03 * critical_lambda(1, length);
    let trunc = Truncation::new(4, 4).unwrap();
    let system = assemble(length, lambda, trunc, ExecMode::default()).unwrap();
    let config = SimulationConfig {
        t_end: 2.0,
        ..Default::default()
    };
    let dir = tempfile::tempdir().unwrap();

    let run = |tag: &str| {
        let initial = random_field(trunc, config.seed, 0.1);
        let traj = integrate(&system, &initial, &config).unwrap();
        let traj_path = dir.path().join(format!("traj_{tag}.csv"));
        traj.write_csv(&traj_path).unwrap();
        let grid = evaluate_velocity(&traj.final_state(), 33, 65, length, 1.0).unwrap();
        let csv_path = dir.path().join(format!("field_{tag}.csv"));
        let svg_path = dir.path().join(format!("field_{tag}.svg"));
        export(&grid, ExportFormat::Csv, &csv_path).unwrap();
        export(&grid, ExportFormat::Svg, &svg_path).unwrap();
        (
            std::fs::read(traj_path).unwrap(),
            std::fs::read(csv_path).unwrap(),
            std::fs::read(svg_path).unwrap(),
        )
    };
    let a = run("a");
    let b = run("b");
    assert!(!a.0.is_empty() && !a.1.is_empty() && !a.2.is_empty());
    assert_eq!(a.0, b.0, "trajectory CSV differs between runs");
    assert_eq!(a.1, b.1, "field CSV differs between runs");
    assert_eq!(a.2, b.2, "field SVG differs between runs");
    pass(
        "AC9",
        format!(
            "trajectory CSV ({} B), field CSV ({} B) and SVG ({} B) byte-identical across reruns",
            a.0.len(),
            a.1.len(),
            a.2.len()
        ),
    );
}
