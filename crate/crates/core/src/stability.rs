//! Linear stability: branch growth rates, the critical curve and its
//! minimiser, and the exchange-of-stabilities sign pattern.
//!
//! Projecting the linearised equations onto the `(m, n)` pair of scalar
//! modes reduces them to the 2x2 problem
//!
//! ```text
//! [ lam_mn              lambda / (1 + k^2) ] [a_r    ]        [a_r    ]
//! [ lambda              lam_mn             ] [a_theta] = beta [a_theta],
//! ```
//!
//! with `k = n L / m` and `lam_mn` the Laplacian eigenvalue, whose
//! eigenvalues are `beta^{1,2} = lam_mn +- lambda / sqrt(1 + k^2)`. The
//! upper branch at `n = 1` crosses zero at
//! `lambda_m = pi^2 sqrt(1 + L^2/m^2) (1 + m^2/L^2)`; minimising over `m`
//! gives the critical pair `(m0, lambda0)`. ThetaMean modes sit at
//! `-pi^2 n^2` with no coupling to `lambda` (their radial component is
//! zero, so the swirl term cannot feed them).

use crate::basis::{laplacian_eigenvalue, Branch, ModeIndex, Truncation};
use crate::error::{Error, Result};
use crate::par::{map_indexed, ExecMode};

/// One growth rate with the mode and parameter it belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPair {
    pub index: ModeIndex,
    pub beta: f64,
    pub lambda_used: f64,
}

/// Result of the critical-curve scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    /// Minimising axial wavenumber.
    pub m0: u32,
    /// Minimum of the critical curve.
    pub lambda0: f64,
    /// Set when the runner-up ties within 1e-9 relative; the analysis
    /// downstream assumes a simple leading eigenvalue and must be told.
    pub degenerate: bool,
    /// Axial wavenumber of the runner-up.
    pub runner_up_m: u32,
    /// Relative gap `(lambda_runner_up - lambda0) / lambda0`.
    pub runner_up_gap: f64,
    /// Largest `m` examined by the scan.
    pub scanned_to: u32,
}

/// Relative tie tolerance for flagging a degenerate critical point.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// The reduced 2x2 matrix `[[lam_mn, lambda/(1+k^2)], [lambda, lam_mn]]`.
pub fn reduced_matrix(m: u32, n: u32, length: f64, lambda: f64) -> [[f64; 2]; 2] {
    let lam = laplacian_eigenvalue(m, n, length);
    let k2 = coupling_k2(m, n, length);
    [[lam, lambda / (1.0 + k2)], [lambda, lam]]
}

fn coupling_k2(m: u32, n: u32, length: f64) -> f64 {
    let k = n as f64 * length / m as f64;
    k * k
}

/// Closed-form eigenvalues of [`reduced_matrix`]:
/// `beta^{1,2} = lam_mn +- lambda / sqrt(1 + n^2 L^2 / m^2)`.
///
/// For a reversed pressure gradient (`lambda < 0`) the same formulas apply
/// with the two branches swapping roles: `beta^1(-lambda) = beta^2(lambda)`.
pub fn branch_eigenvalues(m: u32, n: u32, length: f64, lambda: f64) -> (f64, f64) {
    let lam = laplacian_eigenvalue(m, n, length);
    let coupling = lambda / (1.0 + coupling_k2(m, n, length)).sqrt();
    (lam + coupling, lam - coupling)
}

/// Growth rate of one basis mode at control parameter `lambda`.
pub fn mode_eigenvalue(index: ModeIndex, length: f64, lambda: f64) -> f64 {
    match index.branch {
        Branch::Plus => branch_eigenvalues(index.m, index.n, length, lambda).0,
        Branch::Minus => branch_eigenvalues(index.m, index.n, length, lambda).1,
        Branch::ThetaMean => laplacian_eigenvalue(0, index.n, length),
    }
}

/// Zero crossing of the upper branch at `n = 1`:
/// `lambda_m = pi^2 sqrt(1 + L^2/m^2) (1 + m^2/L^2)`.
pub fn critical_lambda(m: u32, length: f64) -> f64 {
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    let m = m as f64;
    pi2 * (1.0 + length * length / (m * m)).sqrt() * (1.0 + m * m / (length * length))
}

/// Scans `m = 1..=m_max` for the minimiser of [`critical_lambda`].
///
/// Errors when the curve is still decreasing at `m_max` (the minimum would
/// lie beyond the scan); use [`critical_point`] for the auto-extending
/// variant.
pub fn critical_point_scan(length: f64, m_max: u32) -> Result<CriticalPoint> {
    if m_max < 2 {
        return Err(Error::ScanExhausted { m_max });
    }
    let values: Vec<f64> = (1..=m_max).map(|m| critical_lambda(m, length)).collect();
    if values[values.len() - 1] < values[values.len() - 2] {
        return Err(Error::ScanExhausted { m_max });
    }
    let (best_pos, _) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).expect("finite critical curve"))
        .expect("non-empty scan");
    let m0 = best_pos as u32 + 1;
    let lambda0 = values[best_pos];
    let (runner_pos, runner) = values
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != best_pos)
        .min_by(|a, b| a.1.partial_cmp(b.1).expect("finite critical curve"))
        .expect("scan has at least two entries");
    let gap = (runner - lambda0) / lambda0;
    Ok(CriticalPoint {
        m0,
        lambda0,
        degenerate: gap < DEGENERACY_TOL,
        runner_up_m: runner_pos as u32 + 1,
        runner_up_gap: gap,
        scanned_to: m_max,
    })
}

/// [`critical_point_scan`] starting at `m_max = 64`, doubling the range
/// while the curve is still decreasing at its end (capped at 2^20).
pub fn critical_point(length: f64) -> Result<CriticalPoint> {
    let mut m_max = 64u32;
    loop {
        match critical_point_scan(length, m_max) {
            Ok(cp) => return Ok(cp),
            Err(Error::ScanExhausted { .. }) if m_max < (1 << 20) => m_max *= 2,
            Err(e) => return Err(e),
        }
    }
}

/// First (largest) growth rate over the Plus/Minus families and the mode
/// attaining it.
///
/// The maximum always sits on the upper branch at `n = 1` (the Laplacian
/// part and the coupling factor both decrease in `n`; verified by brute
/// force in the tests), so the scan runs over `m` only. ThetaMean modes are
/// excluded: they sit at `-pi^2 n^2` regardless of `lambda` and belong to
/// neither branch family.
pub fn first_eigenvalue(lambda: f64, length: f64, m_max: u32) -> EigenPair {
    let mut best = EigenPair {
        index: ModeIndex::plus(1, 1),
        beta: branch_eigenvalues(1, 1, length, lambda).0,
        lambda_used: lambda,
    };
    for m in 2..=m_max.max(2) {
        let beta = branch_eigenvalues(m, 1, length, lambda).0;
        if beta > best.beta {
            best = EigenPair {
                index: ModeIndex::plus(m, 1),
                beta,
                lambda_used: lambda,
            };
        }
    }
    best
}

/// Outcome of the exchange-of-stabilities probe around the critical point.
#[derive(Debug, Clone, PartialEq)]
pub struct PesReport {
    pub critical: CriticalPoint,
    /// Leading growth rate just below, at, and just above `lambda0`.
    pub beta_below: f64,
    pub beta_at: f64,
    pub beta_above: f64,
    /// Largest non-critical growth rate at `lambda0 (1 + delta_frac)`.
    pub others_max: f64,
    /// Whether every non-critical mode stayed strictly negative there.
    pub others_all_negative: bool,
    /// Largest relative excursion for which the critical mode is the only
    /// unstable one: `lambda_runner_up / lambda0 - 1`.
    pub safe_delta_frac: f64,
    /// The fraction actually probed.
    pub requested_delta_frac: f64,
}

/// Verifies the (-, 0, +) crossing of the critical mode at
/// `lambda0 (1 -+ delta_frac)` and that every other mode up to
/// `(m_max, n_max)` (ThetaMean included) is still decaying above critical.
///
/// Errors on a degenerate critical point, where no single mode leads.
pub fn pes_check(length: f64, delta_frac: f64, m_max: u32, n_max: u32) -> Result<PesReport> {
    if !(0.0 < delta_frac && delta_frac < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "delta_frac must lie in (0, 1), got {delta_frac}"
        )));
    }
    let critical = critical_point_scan(length, m_max).or_else(|e| match e {
        Error::ScanExhausted { .. } => critical_point(length),
        other => Err(other),
    })?;
    if critical.degenerate {
        return Err(Error::DegenerateCritical {
            m_a: critical.m0,
            m_b: critical.runner_up_m,
            lambda: critical.lambda0,
            gap: critical.runner_up_gap,
        });
    }
    let lambda0 = critical.lambda0;
    let crit = ModeIndex::plus(critical.m0, 1);
    let beta_below = mode_eigenvalue(crit, length, lambda0 * (1.0 - delta_frac));
    let beta_at = mode_eigenvalue(crit, length, lambda0);
    let beta_above = mode_eigenvalue(crit, length, lambda0 * (1.0 + delta_frac));

    let lambda_probe = lambda0 * (1.0 + delta_frac);
    let truncation = Truncation::new(m_max, n_max)?;
    let modes = truncation.modes();
    let betas = map_indexed(ExecMode::default(), modes.len(), |i| {
        if modes[i] == crit {
            f64::NEG_INFINITY
        } else {
            mode_eigenvalue(modes[i], length, lambda_probe)
        }
    });
    let others_max = betas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    Ok(PesReport {
        critical,
        beta_below,
        beta_at,
        beta_above,
        others_max,
        others_all_negative: others_max < 0.0,
        safe_delta_frac: critical.runner_up_gap,
        requested_delta_frac: delta_frac,
    })
}
