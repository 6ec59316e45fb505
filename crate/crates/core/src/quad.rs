//! Tensor-product quadrature over the gap-unit box `[0,1] x [0,L]`.
//!
//! Every integrand this crate meets is a finite cosine series in each
//! direction (products of the basis trig functions and their derivatives
//! reduce to cosines by the product-to-sum identities), and the composite
//! trapezoid rule integrates `cos(q pi x / X)` over `[0, X]` exactly as
//! long as `q < 2 * panels`. Sizing the grid at four panels per resolved
//! wavenumber therefore gives machine-precision integrals for pairwise and
//! triple mode products alike.

use crate::basis::Truncation;
use crate::error::{Error, Result};

/// Nodes and weights of the composite trapezoid rule on `[0,1] x [0,L]`.
///
/// The first coordinate `s` is the wall offset `r - r1`; the second is the
/// axial coordinate `z`.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    length: f64,
    s_nodes: Vec<f64>,
    z_nodes: Vec<f64>,
    s_weights: Vec<f64>,
    z_weights: Vec<f64>,
}

impl QuadratureGrid {
    /// Grid sized for the given truncation: four panels per maximum
    /// wavenumber in each direction (radial panels follow `max_n`, axial
    /// panels follow `max_m`), which is exact for triple products.
    pub fn for_truncation(truncation: Truncation, length: f64) -> Self {
        let nr = 4 * truncation.max_n.max(1) as usize;
        let nz = 4 * truncation.max_m.max(1) as usize;
        Self::with_panels(nr, nz, length).expect("panel counts >= 4")
    }

    /// Grid with explicit panel counts (`s_panels` across the gap,
    /// `z_panels` along the axis). At least two panels each.
    pub fn with_panels(s_panels: usize, z_panels: usize, length: f64) -> Result<Self> {
        if s_panels < 2 || z_panels < 2 {
            return Err(Error::InvalidArgument(format!(
                "quadrature needs at least 2 panels per direction, got ({s_panels}, {z_panels})"
            )));
        }
        if length.is_nan() || length <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "axial period must be positive, got {length}"
            )));
        }
        let line = |panels: usize, extent: f64| {
            let h = extent / panels as f64;
            let nodes: Vec<f64> = (0..=panels).map(|i| i as f64 * h).collect();
            let mut weights = vec![h; panels + 1];
            weights[0] = 0.5 * h;
            weights[panels] = 0.5 * h;
            (nodes, weights)
        };
        let (s_nodes, s_weights) = line(s_panels, 1.0);
        let (z_nodes, z_weights) = line(z_panels, length);
        Ok(Self {
            length,
            s_nodes,
            z_nodes,
            s_weights,
            z_weights,
        })
    }

    /// A grid with `factor`-times more panels in both directions.
    pub fn refined(&self, factor: usize) -> Self {
        Self::with_panels(
            (self.s_nodes.len() - 1) * factor,
            (self.z_nodes.len() - 1) * factor,
            self.length,
        )
        .expect("refinement keeps panel counts valid")
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn s_nodes(&self) -> &[f64] {
        &self.s_nodes
    }

    pub fn z_nodes(&self) -> &[f64] {
        &self.z_nodes
    }

    /// Largest wavenumber-sum the grid integrates exactly per direction.
    pub fn exact_up_to(&self) -> (u32, u32) {
        let s = 2 * (self.s_nodes.len() - 1) as u32 - 1;
        let z = 2 * (self.z_nodes.len() - 1) as u32 - 1;
        (s, z)
    }

    /// Checks that products of `factors` modes from `truncation` integrate
    /// exactly on this grid.
    pub fn require_products(&self, truncation: Truncation, factors: u32) -> Result<()> {
        let (s_ok, z_ok) = self.exact_up_to();
        let need_s = factors * truncation.max_n;
        let need_z = factors * truncation.max_m;
        if need_s > s_ok || need_z > z_ok {
            return Err(Error::GridTooCoarse {
                supported: s_ok.min(z_ok),
                needed: need_s.max(need_z),
            });
        }
        Ok(())
    }

    /// Integrates `f(s, z)` over the box.
    pub fn integrate(&self, mut f: impl FnMut(f64, f64) -> f64) -> f64 {
        let mut total = 0.0;
        for (s, ws) in self.s_nodes.iter().zip(&self.s_weights) {
            let mut line = 0.0;
            for (z, wz) in self.z_nodes.iter().zip(&self.z_weights) {
                line += wz * f(*s, *z);
            }
            total += ws * line;
        }
        total
    }
}
