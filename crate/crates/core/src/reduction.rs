//! Quadratic interactions and the pitchfork reduction.
//!
//! The advective form used throughout is `G(u, v) = (u . grad) v` with the
//! meridional pair `(u_r, u_z)` advecting; the tensor stores
//! `T(j, k -> l) = <G(f_j, f_k), f_l>`. Two identities drive everything
//! (both are integration by parts against the free boundary conditions):
//! skew-symmetry in the last two slots, and annihilation on the diagonal,
//! which together make the advection term energy-neutral.
//!
//! The Galerkin equations carry the nonlinearity with a minus sign,
//! `dy_l/dt = beta_l y_l - sum_{j,k} y_j y_k T(j, k -> l)`, so near onset
//! the decaying modes are slaved to the critical amplitude `y` as
//! `y_l = y^2 T(c, c -> l) / beta_l`, and eliminating them leaves the cubic
//! `dy/dt = beta y - gamma y^3` with
//!
//! ```text
//! gamma = sum_{l != crit} -T(c, c -> l)^2 / beta_l(lambda0)  > 0,
//! ```
//!
//! every term non-negative because all slaved growth rates are negative at
//! the critical point. The equilibria are `y = +-sqrt(beta/gamma)`.
//!
//! Closed-form tensor entries come from the product-to-sum identities (each
//! triple integral is a quarter-sum of Kronecker deltas on the wavenumber
//! combinations); the quadrature route in [`trilinear`] exists as the
//! independent oracle.

use crate::basis::{vector_mode, Branch, ModeIndex, SpectralField, Truncation, VectorMode};
use crate::error::{Error, Result};
use crate::par::{map_indexed, ExecMode};
use crate::quad::QuadratureGrid;
use crate::stability::{branch_eigenvalues, critical_lambda, mode_eigenvalue};

/// Sparse store of `T(j, k -> l) = <G(f_j, f_k), f_l>` over a truncation.
#[derive(Debug, Clone)]
pub struct InteractionTensor {
    truncation: Truncation,
    length: f64,
    modes: Vec<ModeIndex>,
    /// Entries sorted by (target, advector, advected).
    entries: Vec<TensorEntry>,
    /// entries[target_offsets[l] .. target_offsets[l+1]] feed mode l.
    target_offsets: Vec<usize>,
}

/// One stored tensor value; indices are positions in the canonical mode
/// list of the truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TensorEntry {
    pub advector: u32,
    pub advected: u32,
    pub target: u32,
    pub value: f64,
}

impl InteractionTensor {
    /// Assembles all non-zero entries, parallel over the target mode with a
    /// fixed merge order.
    pub fn assemble(truncation: Truncation, length: f64, mode: ExecMode) -> Result<Self> {
        if length.is_nan() || length <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "axial period must be positive, got {length}"
            )));
        }
        let modes = truncation.modes();
        let vecs: Vec<VectorMode> = modes.iter().map(|i| vector_mode(*i, length)).collect();
        let per_target: Vec<Vec<TensorEntry>> = map_indexed(mode, vecs.len(), |l| {
            let mut row = Vec::new();
            for (j, u) in vecs.iter().enumerate() {
                for (k, v) in vecs.iter().enumerate() {
                    let value = trilinear_closed(u, v, &vecs[l]);
                    if value != 0.0 {
                        row.push(TensorEntry {
                            advector: j as u32,
                            advected: k as u32,
                            target: l as u32,
                            value,
                        });
                    }
                }
            }
            row
        });
        let mut entries = Vec::new();
        let mut target_offsets = Vec::with_capacity(vecs.len() + 1);
        target_offsets.push(0);
        for row in per_target {
            entries.extend(row);
            target_offsets.push(entries.len());
        }
        Ok(Self {
            truncation,
            length,
            modes,
            entries,
            target_offsets,
        })
    }

    /// A tensor with no interactions; turns the Galerkin system into pure
    /// modal growth/decay.
    pub fn empty(truncation: Truncation, length: f64) -> Self {
        let modes = truncation.modes();
        let target_offsets = vec![0; modes.len() + 1];
        Self {
            truncation,
            length,
            modes,
            entries: Vec::new(),
            target_offsets,
        }
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn modes(&self) -> &[ModeIndex] {
        &self.modes
    }

    pub fn entries(&self) -> &[TensorEntry] {
        &self.entries
    }

    /// Entries feeding the mode at position `target`.
    pub fn entries_for_target(&self, target: usize) -> &[TensorEntry] {
        &self.entries[self.target_offsets[target]..self.target_offsets[target + 1]]
    }

    /// Looks up `T(advector, advected -> target)`; zero when not stored.
    pub fn value(&self, advector: ModeIndex, advected: ModeIndex, target: ModeIndex) -> f64 {
        let pos = |idx: ModeIndex| self.modes.iter().position(|m| *m == idx);
        let (Some(j), Some(k), Some(l)) = (pos(advector), pos(advected), pos(target)) else {
            return 0.0;
        };
        let row = self.entries_for_target(l);
        row.binary_search_by(|e| {
            (e.advector, e.advected).cmp(&(j as u32, k as u32))
        })
        .map(|i| row[i].value)
        .unwrap_or(0.0)
    }

    /// Writes the entries as a text triple list, one
    /// `advector advected target value` line per entry.
    pub fn write_triples(&self, path: &std::path::Path) -> Result<()> {
        use std::io::Write;
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        for e in &self.entries {
            writeln!(
                out,
                "{} {} {} {:.16e}",
                self.modes[e.advector as usize],
                self.modes[e.advected as usize],
                self.modes[e.target as usize],
                e.value
            )
            .map_err(|err| Error::io(path, err))?;
        }
        Ok(())
    }
}

/// Kronecker-delta sum helpers: each triple product of half-harmonics
/// integrates to a quarter of the extent times a signed count of vanishing
/// wavenumber combinations. Computing the count in integers keeps exact
/// zeros exact.
fn d(k: i64) -> i64 {
    (k == 0) as i64
}

fn ccc(p: i64, q: i64, r: i64) -> i64 {
    d(p + q + r) + d(p + q - r) + d(p - q + r) + d(p - q - r)
}

fn ssc(p: i64, q: i64, r: i64) -> i64 {
    d(p - q - r) + d(p - q + r) - d(p + q - r) - d(p + q + r)
}

/// Closed-form `<(u . grad) v, w>` for three basis modes of a common box.
pub fn trilinear_closed(u: &VectorMode, v: &VectorMode, w: &VectorMode) -> f64 {
    debug_assert_eq!(u.length(), v.length());
    debug_assert_eq!(u.length(), w.length());
    let length = u.length();
    let pi = std::f64::consts::PI;
    let (m1, n1) = (u.index.m as i64, u.index.n as i64);
    let (m2, n2) = (v.index.m as i64, v.index.n as i64);
    let (m3, n3) = (w.index.m as i64, w.index.n as i64);

    // z-direction integrals carry a factor L/4, s-direction a factor 1/4.
    let z_ccc = ccc(m1, m2, m3) as f64;
    let z_ssc = ssc(m1, m2, m3) as f64;
    let z_css = ssc(m2, m3, m1) as f64;
    let z_scs = ssc(m1, m3, m2) as f64;
    let r_ccc = ccc(n1, n2, n3) as f64;
    let r_ssc = ssc(n1, n2, n3) as f64;
    let r_css = ssc(n2, n3, n1) as f64;
    let r_scs = ssc(n1, n3, n2) as f64;

    let dn = v.index.n as f64 * pi;
    let dm = v.index.m as f64 * pi / length;
    let quarter = length / 16.0; // (L/4) * (1/4)

    let radial = (u.c_r * v.c_r * w.c_r) * dn * z_ccc * r_scs
        - (u.c_z * v.c_r * w.c_r) * dm * z_ssc * r_css;
    let azimuthal = (u.c_r * v.c_theta * w.c_theta) * dn * z_ccc * r_scs
        - (u.c_z * v.c_theta * w.c_theta) * dm * z_ssc * r_css;
    let axial = -(u.c_r * v.c_z * w.c_z) * dn * z_css * r_ssc
        + (u.c_z * v.c_z * w.c_z) * dm * z_scs * r_ccc;

    quarter * (radial + azimuthal + axial)
}

/// Quadrature route for `<(u . grad) v, w>` on arbitrary coefficient
/// fields; the independent oracle for [`trilinear_closed`]. Requires a grid
/// exact for triple products of the involved truncations.
pub fn trilinear(
    u: &SpectralField,
    v: &SpectralField,
    w: &SpectralField,
    grid: &QuadratureGrid,
) -> Result<f64> {
    let max_trunc = |a: Truncation, b: Truncation| Truncation {
        max_m: a.max_m.max(b.max_m),
        max_n: a.max_n.max(b.max_n),
    };
    let needed = max_trunc(max_trunc(u.truncation(), v.truncation()), w.truncation());
    grid.require_products(needed, 3)?;
    let length = grid.length();
    let expand = |f: &SpectralField| -> Vec<(VectorMode, f64)> {
        f.iter().map(|(i, y)| (vector_mode(i, length), y)).collect()
    };
    let um = expand(u);
    let vm = expand(v);
    let wm = expand(w);
    Ok(grid.integrate(|s, z| {
        let (mut ur, mut uz) = (0.0, 0.0);
        for (mode, y) in &um {
            let (r, _, zc) = mode.velocity_at(s, z);
            ur += y * r;
            uz += y * zc;
        }
        let mut adv = [0.0f64; 3];
        for (mode, y) in &vm {
            let ds = mode.d_ds_at(s, z);
            let dz = mode.d_dz_at(s, z);
            adv[0] += y * (ur * ds.0 + uz * dz.0);
            adv[1] += y * (ur * ds.1 + uz * dz.1);
            adv[2] += y * (ur * ds.2 + uz * dz.2);
        }
        let mut dot = 0.0;
        for (mode, y) in &wm {
            let (wr, wt, wz) = mode.velocity_at(s, z);
            dot += y * (adv[0] * wr + adv[1] * wt + adv[2] * wz);
        }
        dot
    }))
}

/// Coefficient list `<G(f_crit, f_crit), f_j>` over all modes of the
/// truncation, with `f_crit` the normalised upper-branch mode at
/// `(m0, n = 1)`. The entry on the critical mode itself vanishes, and the
/// wavenumber selection rules confine the support to axial wavenumbers 0
/// and `2 m0`.
pub fn critical_self_interaction(
    m0: u32,
    length: f64,
    truncation: Truncation,
) -> Result<SpectralField> {
    if m0 < 1 || !truncation.contains(ModeIndex::plus(m0, 1)) {
        return Err(Error::InvalidArgument(format!(
            "critical mode (m0 = {m0}, n = 1) must lie inside the truncation"
        )));
    }
    let crit = vector_mode(ModeIndex::plus(m0, 1), length);
    let mut field = SpectralField::zero(truncation);
    for idx in truncation.modes() {
        let target = vector_mode(idx, length);
        let value = trilinear_closed(&crit, &crit, &target);
        if value != 0.0 {
            field.set(idx, value)?;
        }
    }
    Ok(field)
}

/// Everything the reduction produces at one critical point.
#[derive(Debug, Clone)]
pub struct BifurcationResult {
    pub m0: u32,
    pub lambda0: f64,
    /// Cubic coefficient of the reduced equation; positive.
    pub gamma: f64,
    /// `a = 1 / sqrt(gamma)`, the prefactor of the equilibrium amplitude.
    pub amplitude_coefficient: f64,
    /// Slaving coefficients `s_j = T(c, c -> j) / beta_j(lambda0)`; the
    /// second-order state correction is `y^2 * s_j`.
    pub slaved: SpectralField,
    /// Raw interaction column `T(c, c -> j)`.
    pub interaction: SpectralField,
    pub truncation: Truncation,
    /// Relative change of gamma when the truncation is doubled.
    pub convergence_estimate: f64,
    /// The same sum restricted to branch modes with axial wavenumber >= 2
    /// (a narrower index-set reading); differs from `gamma` here because
    /// the mean-flow modes carry the whole sum.
    pub gamma_restricted: f64,
}

fn gamma_sum(m0: u32, length: f64, lambda0: f64, truncation: Truncation) -> Result<(f64, f64, SpectralField, SpectralField)> {
    let column = critical_self_interaction(m0, length, truncation)?;
    let crit = ModeIndex::plus(m0, 1);
    let mut slaved = SpectralField::zero(truncation);
    let mut gamma = 0.0;
    let mut gamma_restricted = 0.0;
    for (idx, t) in column.iter() {
        if idx == crit {
            continue;
        }
        let beta = mode_eigenvalue(idx, length, lambda0);
        if beta.abs() < 1e-9 {
            return Err(Error::SlavedModeDegenerate(idx.to_string()));
        }
        if beta > 0.0 {
            return Err(Error::SlavedModeDegenerate(idx.to_string()));
        }
        slaved.set(idx, t / beta)?;
        let term = -t * t / beta;
        gamma += term;
        if idx.branch != Branch::ThetaMean && idx.m >= 2 {
            gamma_restricted += term;
        }
    }
    Ok((gamma, gamma_restricted, slaved, column))
}

/// Computes the bifurcation coefficient and the slaved-mode corrections at
/// the critical point `(m0, lambda0)`.
///
/// `gamma <= 0` would contradict the supercritical pitchfork and is
/// surfaced as a hard error rather than patched.
pub fn gamma_coefficient(
    m0: u32,
    length: f64,
    lambda0: f64,
    truncation: Truncation,
) -> Result<BifurcationResult> {
    let (gamma, gamma_restricted, slaved, interaction) =
        gamma_sum(m0, length, lambda0, truncation)?;
    if gamma.is_nan() || gamma <= 0.0 {
        return Err(Error::NonPositiveGamma { gamma });
    }
    let (gamma_fine, _, _, _) = gamma_sum(m0, length, lambda0, truncation.doubled())?;
    let convergence_estimate = ((gamma_fine - gamma) / gamma).abs();
    Ok(BifurcationResult {
        m0,
        lambda0,
        gamma,
        amplitude_coefficient: 1.0 / gamma.sqrt(),
        slaved,
        interaction,
        truncation,
        convergence_estimate,
        gamma_restricted,
    })
}

/// Leading-order critical-mode coordinates of the two equilibria.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumAmplitude {
    pub y_plus: f64,
    pub y_minus: f64,
    /// Set when `lambda <= lambda0`: no bifurcated state, both amplitudes
    /// zero.
    pub subcritical: bool,
}

/// `y_± = ±sqrt(beta(lambda) / gamma)` for the upper branch at
/// `(m0, n = 1)`; zero with the `subcritical` flag below onset.
pub fn equilibrium_amplitude(
    lambda: f64,
    result: &BifurcationResult,
    length: f64,
) -> EquilibriumAmplitude {
    if lambda <= result.lambda0 {
        return EquilibriumAmplitude {
            y_plus: 0.0,
            y_minus: 0.0,
            subcritical: true,
        };
    }
    let (beta, _) = branch_eigenvalues(result.m0, 1, length, lambda);
    let y = (beta / result.gamma).sqrt();
    EquilibriumAmplitude {
        y_plus: y,
        y_minus: -y,
        subcritical: false,
    }
}

/// Which of the two mirror equilibria to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PitchforkBranch {
    Plus,
    Minus,
}

/// Second-order bifurcated state at `lambda > lambda0`:
/// `y f_crit + y^2 sum_j (T(c,c->j)/beta_j(lambda)) f_j`.
///
/// The slaved denominators are evaluated at `lambda` itself; for the
/// mean-flow modes (which carry the whole correction here) they do not
/// depend on `lambda` at all. The quadratic slaved part is identical for
/// both signs.
pub fn bifurcated_state(
    lambda: f64,
    result: &BifurcationResult,
    length: f64,
    branch: PitchforkBranch,
) -> Result<SpectralField> {
    let amp = equilibrium_amplitude(lambda, result, length);
    if amp.subcritical {
        return Err(Error::Subcritical {
            lambda,
            lambda0: result.lambda0,
        });
    }
    let y = match branch {
        PitchforkBranch::Plus => amp.y_plus,
        PitchforkBranch::Minus => amp.y_minus,
    };
    let mut state = SpectralField::zero(result.truncation);
    state.set(ModeIndex::plus(result.m0, 1), y)?;
    for (idx, t) in result.interaction.iter() {
        if idx == ModeIndex::plus(result.m0, 1) {
            continue;
        }
        let beta = mode_eigenvalue(idx, length, lambda);
        state.set(idx, y * y * t / beta)?;
    }
    Ok(state)
}

/// Closed form the selection rules leave for this basis: the critical
/// self-interaction feeds only the z-independent theta mode at doubled
/// radial wavenumber, giving `gamma = m0^2 / (8 L (m0^2 + L^2))`.
///
/// Kept next to the generic sum as a cross-check; tests verify both against
/// brute-force quadrature.
pub fn gamma_closed_form(m0: u32, length: f64) -> f64 {
    let m2 = (m0 as f64) * (m0 as f64);
    m2 / (8.0 * length * (m2 + length * length))
}

/// Convenience: the critical point quantities for a box of period
/// `length`, at the default truncation `(2 m0 + 6, 8)`.
pub fn reduction_at_critical(m0: u32, length: f64) -> Result<BifurcationResult> {
    let lambda0 = critical_lambda(m0, length);
    let truncation = Truncation::new(2 * m0 + 6, 8)?;
    gamma_coefficient(m0, length, lambda0, truncation)
}
