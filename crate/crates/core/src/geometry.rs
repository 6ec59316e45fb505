//! Physical setup: the annulus, the driven swirl profile and the control
//! parameter.
//!
//! The laminar state between the two cylinder walls is a purely azimuthal
//! velocity driven by a constant azimuthal pressure gradient,
//!
//! ```text
//! u_theta(r) = (dp/dtheta)_0 / (2 rho nu) * (r ln r + A r + B / r),
//! ```
//!
//! with `A` and `B` fixed by the wall values `u_theta(R1) ~ R2^2` and
//! `u_theta(R2) ~ R1^2`. In the narrow-gap limit the two coefficients that
//! couple the radial and azimuthal disturbance equations collapse to the
//! constants `-R1R2/(R1+R2)` and `2R1R2/(R1+R2)` (in gap units), and the
//! whole problem is controlled by the single dimensionless number
//! [`FluidParameters::lambda`]. Everything downstream of this module works
//! in the non-dimensional system (lengths in gap units `l = R2 - R1`, time
//! in `l^2/nu`, velocity in `nu/l`).

use crate::error::{Error, Result};

/// Dimensional inputs plus the non-dimensional axial period of the
/// computational box.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidParameters {
    /// Inner cylinder radius `R1` (length).
    pub inner_radius: f64,
    /// Outer cylinder radius `R2` (length).
    pub outer_radius: f64,
    /// Fluid density `rho` (mass / volume).
    pub density: f64,
    /// Kinematic viscosity `nu` (length^2 / time).
    pub viscosity: f64,
    /// Constant azimuthal pressure derivative `(dp/dtheta)_0` (pressure).
    pub dp_dtheta: f64,
    /// Axial period `L` of the computational box, in gap units.
    pub axial_period: f64,
}

/// The two constants of the swirl profile, fixed by the wall velocities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileConstants {
    /// Dimensionless additive constant `A`.
    pub a: f64,
    /// Constant `B` carrying units length^2.
    pub b: f64,
}

impl FluidParameters {
    /// Validates and stores the physical parameters.
    ///
    /// Rejects a non-positive or reversed annulus, non-positive density,
    /// viscosity or axial period, and a gap wider than the narrow-gap
    /// admissibility bound `l <= (R1 + R2) / 2`.
    pub fn new(
        inner_radius: f64,
        outer_radius: f64,
        density: f64,
        viscosity: f64,
        dp_dtheta: f64,
        axial_period: f64,
    ) -> Result<Self> {
        if !(inner_radius.is_finite() && inner_radius > 0.0) {
            return Err(Error::Geometry(format!(
                "inner radius must be positive, got {inner_radius}"
            )));
        }
        if !(outer_radius.is_finite() && outer_radius > inner_radius) {
            return Err(Error::Geometry(format!(
                "outer radius must exceed inner radius, got R1 = {inner_radius}, R2 = {outer_radius}"
            )));
        }
        if density.is_nan() || density <= 0.0 {
            return Err(Error::Geometry(format!("density must be positive, got {density}")));
        }
        if viscosity.is_nan() || viscosity <= 0.0 {
            return Err(Error::Geometry(format!(
                "viscosity must be positive, got {viscosity}"
            )));
        }
        if axial_period.is_nan() || axial_period <= 0.0 {
            return Err(Error::Geometry(format!(
                "axial period must be positive, got {axial_period}"
            )));
        }
        let gap = outer_radius - inner_radius;
        if gap > 0.5 * (inner_radius + outer_radius) {
            return Err(Error::Geometry(format!(
                "gap {gap} exceeds the narrow-gap admissibility bound (R1+R2)/2 = {}",
                0.5 * (inner_radius + outer_radius)
            )));
        }
        Ok(Self {
            inner_radius,
            outer_radius,
            density,
            viscosity,
            dp_dtheta,
            axial_period,
        })
    }

    /// Gap width `l = R2 - R1`, the length scale of the non-dimensional
    /// system.
    pub fn gap(&self) -> f64 {
        self.outer_radius - self.inner_radius
    }

    /// True when `l / R1 <= 0.1`, the regime in which the narrow-gap
    /// constant-coefficient replacement is quantitatively trustworthy.
    pub fn asymptotics_trusted(&self) -> bool {
        self.gap() / self.inner_radius <= 0.1
    }

    /// Inner wall position in gap units, `r1 = R1 / l`.
    pub fn nd_inner(&self) -> f64 {
        self.inner_radius / self.gap()
    }

    /// Outer wall position in gap units, `r2 = R2 / l` (= `nd_inner() + 1`).
    pub fn nd_outer(&self) -> f64 {
        self.outer_radius / self.gap()
    }

    /// Non-dimensional azimuthal pressure gradient,
    /// `(dp/dtheta)_0 * l^2 / (rho nu^2)`.
    pub fn nd_pressure_gradient(&self) -> f64 {
        let l = self.gap();
        self.dp_dtheta * l * l / (self.density * self.viscosity * self.viscosity)
    }

    /// Closed forms for the profile constants `A` and `B` from the wall
    /// values of the swirl.
    pub fn profile_constants(&self) -> ProfileConstants {
        let r1 = self.inner_radius;
        let r2 = self.outer_radius;
        let denom = r2 * r2 - r1 * r1;
        let a = -(r2 * r2 * r2.ln() - r1 * r1 * r1.ln() + r2 * r2 * r1 - r1 * r1 * r2) / denom;
        let b = (r1 * r1 * r2 * r2 * (r2.ln() - r1.ln()) + r2.powi(4) * r1 - r1.powi(4) * r2)
            / denom;
        ProfileConstants { a, b }
    }

    /// The laminar azimuthal velocity at radius `r`.
    pub fn basic_velocity(&self, constants: &ProfileConstants, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        let prefactor = self.dp_dtheta / (2.0 * self.density * self.viscosity);
        Ok(prefactor * (r * r.ln() + constants.a * r + constants.b / r))
    }

    /// The exact coupling coefficients of the disturbance equations at
    /// radius `r`: `(ln r + A + 1/2, ln r + A + B/r^2)`, multiplying the
    /// radial velocity in the azimuthal equation and the azimuthal velocity
    /// in the radial equation respectively.
    pub fn exact_coefficients(&self, constants: &ProfileConstants, r: f64) -> Result<(f64, f64)> {
        self.check_radius(r)?;
        let base = r.ln() + constants.a;
        Ok((base + 0.5, base + constants.b / (r * r)))
    }

    /// Narrow-gap limits of [`exact_coefficients`](Self::exact_coefficients),
    /// evaluated on the non-dimensional radii (gap units): the exact
    /// coefficients are invariant under a common rescaling of all lengths,
    /// so the constant-coefficient limit only matches them in the scale
    /// where the gap is 1.
    pub fn narrow_gap_coefficients(&self) -> (f64, f64) {
        narrow_gap_limit(self.nd_inner(), self.nd_outer())
    }

    /// The dimensionless control parameter
    /// `lambda = (dp/dtheta)_0' * sqrt(2) * r1 r2 / (r1 + r2)`
    /// built from the non-dimensional pressure gradient and radii.
    ///
    /// A negative pressure gradient gives a negative `lambda`; it is
    /// returned as-is. The growth rates depend on the sign only through a
    /// swap of the two eigenvalue branches, so callers analysing a reversed
    /// gradient should work with `|lambda|` (the CLI reports this).
    pub fn lambda(&self) -> f64 {
        let (c_theta, _) = self.narrow_gap_coefficients();
        self.nd_pressure_gradient() * std::f64::consts::SQRT_2 * (-c_theta)
    }

    /// Diagnostic only: integral of the centripetal balance
    /// `u_theta(r)^2 / r` across the gap, i.e. the radial pressure rise
    /// `(p(R2) - p(R1)) / rho` supporting the basic flow. Not used by the
    /// disturbance model.
    pub fn radial_pressure_rise(&self, constants: &ProfileConstants) -> f64 {
        let n = 512;
        let h = self.gap() / n as f64;
        let mut sum = 0.0;
        for i in 0..=n {
            let r = self.inner_radius + i as f64 * h;
            let u = self
                .basic_velocity(constants, r.min(self.outer_radius))
                .expect("in-annulus sample");
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            sum += w * u * u / r;
        }
        sum * h
    }

    fn check_radius(&self, r: f64) -> Result<()> {
        if r < self.inner_radius || r > self.outer_radius {
            return Err(Error::OutOfAnnulus {
                r,
                r1: self.inner_radius,
                r2: self.outer_radius,
            });
        }
        Ok(())
    }
}

/// Narrow-gap limit of the two coupling coefficients for a radius pair,
/// `(-r1 r2 / (r1 + r2), 2 r1 r2 / (r1 + r2))`.
///
/// Exposed as a free function so the symmetric limit `r1 = r2` (not an
/// admissible annulus) stays expressible; their ratio is -2 identically.
pub fn narrow_gap_limit(r1: f64, r2: f64) -> (f64, f64) {
    let s = r1 * r2 / (r1 + r2);
    (-s, 2.0 * s)
}
