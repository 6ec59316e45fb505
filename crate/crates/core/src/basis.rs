//! Divergence-free trigonometric vector basis for axisymmetric disturbances
//! under free boundary conditions.
//!
//! Scalar building blocks on the gap-unit box `[0,1] x [0,L]` (radial
//! offset `s = r - r1`, axial coordinate `z`):
//!
//! ```text
//! W1:  e_mn    = cos(m pi z / L) sin(n pi s)     (u_r, u_theta live here)
//! W2:  ebar_mn = sin(m pi z / L) cos(n pi s)     (u_z lives here)
//! ```
//!
//! both Laplacian eigenfunctions with eigenvalue `-pi^2 (m^2/L^2 + n^2)`.
//! For each `(m >= 1, n >= 1)` there are two divergence-free vector modes
//! (branches [`Branch::Plus`] / [`Branch::Minus`]), with component
//! coefficients proportional to
//!
//! ```text
//! ( +-1/sqrt(1+k^2),  1,  -+k/sqrt(1+k^2) ),   k = n L / m,
//! ```
//!
//! rescaled here to unit L2 norm over the box (the natural frame for the
//! reduction downstream, where the linear operator is exactly diagonal).
//! The `m = 0` axial mean flow enters through theta-only modes
//! `(0, sin(n pi s), 0)` ([`Branch::ThetaMean`]): the quadratic
//! self-interaction of any single-`m` mode generates exactly this
//! z-independent azimuthal content, so the closure needs them.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::quad::QuadratureGrid;

/// Which of the three mode families an index refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Branch {
    /// Upper eigenvalue branch of the 2x2 modal problem.
    Plus,
    /// Lower eigenvalue branch.
    Minus,
    /// z-independent azimuthal mean-flow mode (`m = 0`).
    ThetaMean,
}

impl Branch {
    fn tag(self) -> &'static str {
        match self {
            Branch::Plus => "plus",
            Branch::Minus => "minus",
            Branch::ThetaMean => "theta",
        }
    }
}

/// Identity of one basis mode: branch, axial wavenumber `m`, radial
/// wavenumber `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeIndex {
    pub branch: Branch,
    pub m: u32,
    pub n: u32,
}

impl ModeIndex {
    pub fn new(branch: Branch, m: u32, n: u32) -> Result<Self> {
        let ok = match branch {
            Branch::Plus | Branch::Minus => m >= 1 && n >= 1,
            Branch::ThetaMean => m == 0 && n >= 1,
        };
        if !ok {
            return Err(Error::InvalidArgument(format!(
                "invalid mode index ({}, m = {m}, n = {n})",
                branch.tag()
            )));
        }
        Ok(Self { branch, m, n })
    }

    pub fn plus(m: u32, n: u32) -> Self {
        Self::new(Branch::Plus, m, n).expect("plus modes need m, n >= 1")
    }

    pub fn minus(m: u32, n: u32) -> Self {
        Self::new(Branch::Minus, m, n).expect("minus modes need m, n >= 1")
    }

    pub fn theta_mean(n: u32) -> Self {
        Self::new(Branch::ThetaMean, 0, n).expect("theta modes need n >= 1")
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.branch.tag(), self.m, self.n)
    }
}

/// Truncation bounds: modes kept satisfy `m <= max_m`, `n <= max_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Truncation {
    pub max_m: u32,
    pub max_n: u32,
}

impl Truncation {
    pub fn new(max_m: u32, max_n: u32) -> Result<Self> {
        if max_m < 1 || max_n < 1 {
            return Err(Error::TruncationTooSmall { max_m, max_n });
        }
        Ok(Self { max_m, max_n })
    }

    pub fn contains(&self, index: ModeIndex) -> bool {
        index.m <= self.max_m && index.n <= self.max_n
    }

    pub fn doubled(&self) -> Self {
        Self {
            max_m: 2 * self.max_m,
            max_n: 2 * self.max_n,
        }
    }

    /// Canonical mode ordering used everywhere (state vectors, CSV
    /// columns): for each `m = 1..=max_m`, for each `n = 1..=max_n`, the
    /// Plus then Minus branch; then the ThetaMean modes by `n`.
    pub fn modes(&self) -> Vec<ModeIndex> {
        let mut out = Vec::with_capacity(self.mode_count());
        for m in 1..=self.max_m {
            for n in 1..=self.max_n {
                out.push(ModeIndex::plus(m, n));
                out.push(ModeIndex::minus(m, n));
            }
        }
        for n in 1..=self.max_n {
            out.push(ModeIndex::theta_mean(n));
        }
        out
    }

    pub fn mode_count(&self) -> usize {
        (2 * self.max_m * self.max_n + self.max_n) as usize
    }
}

/// Laplacian eigenvalue `-pi^2 (m^2 / L^2 + n^2)` shared by `e_mn` and
/// `ebar_mn`.
pub fn laplacian_eigenvalue(m: u32, n: u32, length: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let m = m as f64;
    let n = n as f64;
    -pi * pi * (m * m / (length * length) + n * n)
}

/// The two scalar families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarKind {
    W1,
    W2,
}

/// Value of a scalar mode at wall offset `s` and axial position `z`.
pub fn scalar_mode(kind: ScalarKind, m: u32, n: u32, s: f64, z: f64, length: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let az = m as f64 * pi * z / length;
    let rs = n as f64 * pi * s;
    match kind {
        ScalarKind::W1 => az.cos() * rs.sin(),
        ScalarKind::W2 => az.sin() * rs.cos(),
    }
}

/// One basis mode with its component coefficients, normalised to unit L2
/// norm over the box.
///
/// Component layout: `u_r = c_r e_mn`, `u_theta = c_theta e_mn`,
/// `u_z = c_z ebar_mn`. The continuity row `n c_r + (m/L) c_z = 0` holds by
/// construction. `norm` records the L2 norm the raw coefficient vector
/// `(+-1/sqrt(1+k^2), 1, -+k/sqrt(1+k^2))` had before rescaling
/// (`sqrt(L/2)` for every family).
#[derive(Debug, Clone, PartialEq)]
pub struct VectorMode {
    pub index: ModeIndex,
    pub c_r: f64,
    pub c_theta: f64,
    pub c_z: f64,
    pub norm: f64,
    length: f64,
}

/// Builds the normalised mode for `index` in a box of axial period
/// `length`.
pub fn vector_mode(index: ModeIndex, length: f64) -> VectorMode {
    let scale = (2.0 / length).sqrt();
    let norm = (length / 2.0).sqrt();
    match index.branch {
        Branch::ThetaMean => VectorMode {
            index,
            c_r: 0.0,
            c_theta: scale,
            c_z: 0.0,
            norm,
            length,
        },
        Branch::Plus | Branch::Minus => {
            let k = index.n as f64 * length / index.m as f64;
            let inv = 1.0 / (1.0 + k * k).sqrt();
            let sign = if index.branch == Branch::Plus { 1.0 } else { -1.0 };
            VectorMode {
                index,
                c_r: sign * inv * scale,
                c_theta: scale,
                c_z: -sign * k * inv * scale,
                norm,
                length,
            }
        }
    }
}

impl VectorMode {
    pub fn length(&self) -> f64 {
        self.length
    }

    /// `(u_r, u_theta, u_z)` at `(s, z)`.
    pub fn velocity_at(&self, s: f64, z: f64) -> (f64, f64, f64) {
        let e = scalar_mode(ScalarKind::W1, self.index.m, self.index.n, s, z, self.length);
        let eb = scalar_mode(ScalarKind::W2, self.index.m, self.index.n, s, z, self.length);
        (self.c_r * e, self.c_theta * e, self.c_z * eb)
    }

    /// s-derivatives of the three components at `(s, z)`.
    pub fn d_ds_at(&self, s: f64, z: f64) -> (f64, f64, f64) {
        let pi = std::f64::consts::PI;
        let m = self.index.m as f64;
        let n = self.index.n as f64;
        let az = m * pi * z / self.length;
        let rs = n * pi * s;
        let de = az.cos() * n * pi * rs.cos();
        let deb = -az.sin() * n * pi * rs.sin();
        (self.c_r * de, self.c_theta * de, self.c_z * deb)
    }

    /// z-derivatives of the three components at `(s, z)`.
    pub fn d_dz_at(&self, s: f64, z: f64) -> (f64, f64, f64) {
        let pi = std::f64::consts::PI;
        let m = self.index.m as f64;
        let n = self.index.n as f64;
        let az = m * pi * z / self.length;
        let rs = n * pi * s;
        let de = -(m * pi / self.length) * az.sin() * rs.sin();
        let deb = (m * pi / self.length) * az.cos() * rs.cos();
        (self.c_r * de, self.c_theta * de, self.c_z * deb)
    }

    /// Pointwise divergence of the `(u_r, u_z)` pair at `(s, z)`; zero up
    /// to roundoff for every constructed mode.
    pub fn divergence_at(&self, s: f64, z: f64) -> f64 {
        let (dr, _, _) = self.d_ds_at(s, z);
        let (_, _, dz) = self.d_dz_at(s, z);
        dr + dz
    }

    /// Streamfunction of the `(u_r, u_z)` pair at `(s, z)`, with the
    /// convention `u_r = d psi / d z`, `u_z = -d psi / d s`. ThetaMean
    /// modes carry no meridional flow and contribute nothing.
    pub fn psi_at(&self, s: f64, z: f64) -> f64 {
        if self.index.m == 0 {
            return 0.0;
        }
        let pi = std::f64::consts::PI;
        let m = self.index.m as f64;
        let n = self.index.n as f64;
        self.c_r * self.length / (m * pi) * (m * pi * z / self.length).sin() * (n * pi * s).sin()
    }
}

/// A finite coefficient map over the basis: the state vector of the
/// truncated system. Missing indices mean zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    coefficients: BTreeMap<ModeIndex, f64>,
    truncation: Truncation,
}

impl SpectralField {
    pub fn zero(truncation: Truncation) -> Self {
        Self {
            coefficients: BTreeMap::new(),
            truncation,
        }
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    pub fn get(&self, index: ModeIndex) -> f64 {
        self.coefficients.get(&index).copied().unwrap_or(0.0)
    }

    /// Sets one coefficient; rejects indices outside the truncation.
    pub fn set(&mut self, index: ModeIndex, value: f64) -> Result<()> {
        if !self.truncation.contains(index) {
            return Err(Error::InvalidArgument(format!(
                "mode {index} outside truncation ({}, {})",
                self.truncation.max_m, self.truncation.max_n
            )));
        }
        if value == 0.0 {
            self.coefficients.remove(&index);
        } else {
            self.coefficients.insert(index, value);
        }
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (ModeIndex, f64)> + '_ {
        self.coefficients.iter().map(|(k, v)| (*k, *v))
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// L2 norm; the basis is orthonormal so this is just the coefficient
    /// norm.
    pub fn norm(&self) -> f64 {
        self.coefficients
            .values()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for v in out.coefficients.values_mut() {
            *v *= factor;
        }
        out
    }

    /// `self + factor * other`; the truncations must agree.
    pub fn add_scaled(&mut self, other: &Self, factor: f64) -> Result<()> {
        if self.truncation != other.truncation {
            return Err(Error::InvalidArgument(
                "truncation mismatch in field arithmetic".into(),
            ));
        }
        for (idx, v) in other.iter() {
            let cur = self.get(idx);
            self.set(idx, cur + factor * v)?;
        }
        Ok(())
    }

    /// `(u_r, u_theta, u_z)` of the represented field at `(s, z)`.
    pub fn velocity_at(&self, s: f64, z: f64, length: f64) -> (f64, f64, f64) {
        let mut out = (0.0, 0.0, 0.0);
        for (idx, y) in self.iter() {
            let mode = vector_mode(idx, length);
            let (ur, ut, uz) = mode.velocity_at(s, z);
            out.0 += y * ur;
            out.1 += y * ut;
            out.2 += y * uz;
        }
        out
    }
}

/// Closed-form inner product of two coefficient fields: the basis is
/// orthonormal, so it is the plain coefficient dot product.
pub fn inner_product_closed(a: &SpectralField, b: &SpectralField) -> f64 {
    a.iter().map(|(idx, va)| va * b.get(idx)).sum()
}

/// L2 inner product of the two represented vector fields by quadrature.
///
/// Must agree with [`inner_product_closed`]; the quadrature route exists as
/// the independent check. Fails if the grid cannot integrate pairwise mode
/// products exactly.
pub fn inner_product(a: &SpectralField, b: &SpectralField, grid: &QuadratureGrid) -> Result<f64> {
    let t = a.truncation();
    let needed = Truncation {
        max_m: t.max_m.max(b.truncation().max_m),
        max_n: t.max_n.max(b.truncation().max_n),
    };
    grid.require_products(needed, 2)?;
    let length = grid.length();
    Ok(grid.integrate(|s, z| {
        let (ar, at, az) = a.velocity_at(s, z, length);
        let (br, bt, bz) = b.velocity_at(s, z, length);
        ar * br + at * bt + az * bz
    }))
}

/// Sup over the grid of the pointwise continuity residual
/// `|d u_r/d s + d u_z/d z|`, with every mode's contribution evaluated
/// analytically. Accepts raw `(mode, coefficient)` pairs so that a
/// deliberately corrupted mode can be probed.
pub fn divergence_residual_modes(modes: &[(VectorMode, f64)], grid: &QuadratureGrid) -> f64 {
    let mut worst: f64 = 0.0;
    for &s in grid.s_nodes() {
        for &z in grid.z_nodes() {
            let mut div = 0.0;
            for (mode, y) in modes {
                div += y * mode.divergence_at(s, z);
            }
            worst = worst.max(div.abs());
        }
    }
    worst
}

/// [`divergence_residual_modes`] over the canonical modes of a coefficient
/// field; zero to roundoff for anything built from this basis.
pub fn divergence_residual(field: &SpectralField, grid: &QuadratureGrid) -> f64 {
    let pairs: Vec<(VectorMode, f64)> = field
        .iter()
        .map(|(idx, y)| (vector_mode(idx, grid.length()), y))
        .collect();
    divergence_residual_modes(&pairs, grid)
}
