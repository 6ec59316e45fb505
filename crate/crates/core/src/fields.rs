//! Physical-space evaluation, streamfunction, vortex-cell counting and
//! file export.
//!
//! A [`FieldGrid`] samples a coefficient field on a uniform `nr x nz` grid
//! over the gap-unit box. The streamfunction of the meridional flow
//! follows the convention `u_r = d psi / d z`, `u_z = -d psi / d s`; each
//! mode contributes `c_r L/(m pi) sin(m pi z / L) sin(n pi s)`, so psi
//! vanishes on all four edges and z-independent (mean-flow) modes carry no
//! psi at all. Vortex cells are counted as sign runs of psi along the
//! mid-gap line, which matches the separable cell patterns this model
//! produces.

use std::io::Write;
use std::path::Path;

use crate::basis::{vector_mode, SpectralField, VectorMode};
use crate::error::{Error, Result};
use crate::svg;

/// Velocity components and streamfunction sampled on a uniform grid.
///
/// Arrays are row-major with the radial index outermost:
/// `value[i * nz + j]` sits at `s_i = i/(nr-1)`, `z_j = j/(nz-1) * L`.
#[derive(Debug, Clone)]
pub struct FieldGrid {
    pub nr: usize,
    pub nz: usize,
    /// Inner wall position used for labelling the radial coordinate.
    pub r_inner: f64,
    pub length: f64,
    pub u_r: Vec<f64>,
    pub u_theta: Vec<f64>,
    pub u_z: Vec<f64>,
    pub psi: Vec<f64>,
}

/// Evaluates a coefficient field on an `nr x nz` grid (exact trig sums, no
/// interpolation). `r_inner` only shifts the exported radial coordinate.
pub fn evaluate_velocity(
    field: &SpectralField,
    nr: usize,
    nz: usize,
    length: f64,
    r_inner: f64,
) -> Result<FieldGrid> {
    if nr < 2 || nz < 2 {
        return Err(Error::InvalidArgument(format!(
            "field grid needs at least 2 samples per direction, got ({nr}, {nz})"
        )));
    }
    let modes: Vec<(VectorMode, f64)> = field
        .iter()
        .map(|(idx, y)| (vector_mode(idx, length), y))
        .collect();
    let mut grid = FieldGrid {
        nr,
        nz,
        r_inner,
        length,
        u_r: vec![0.0; nr * nz],
        u_theta: vec![0.0; nr * nz],
        u_z: vec![0.0; nr * nz],
        psi: vec![0.0; nr * nz],
    };
    for i in 0..nr {
        let s = i as f64 / (nr - 1) as f64;
        for j in 0..nz {
            let z = j as f64 / (nz - 1) as f64 * length;
            let at = i * nz + j;
            for (mode, y) in &modes {
                let (ur, ut, uz) = mode.velocity_at(s, z);
                grid.u_r[at] += y * ur;
                grid.u_theta[at] += y * ut;
                grid.u_z[at] += y * uz;
                grid.psi[at] += y * mode.psi_at(s, z);
            }
        }
    }
    Ok(grid)
}

/// Just the streamfunction samples of [`evaluate_velocity`]'s grid.
pub fn streamfunction(
    field: &SpectralField,
    nr: usize,
    nz: usize,
    length: f64,
) -> Result<Vec<f64>> {
    Ok(evaluate_velocity(field, nr, nz, length, 0.0)?.psi)
}

/// Number of sign-alternating cells of psi along the mid-gap line, with
/// `|psi| < 1e-8 max|psi|` treated as zero. Odd `nr` samples the mid-gap
/// exactly; even `nr` uses the nearest row below it.
///
/// Errors with [`Error::NoFlow`] when psi vanishes everywhere.
pub fn count_cells(grid: &FieldGrid) -> Result<usize> {
    let max = grid.psi.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if max == 0.0 {
        return Err(Error::NoFlow);
    }
    let floor = 1e-8 * max;
    let row = (grid.nr - 1) / 2;
    let mut cells = 0usize;
    let mut current = 0i8;
    for j in 0..grid.nz {
        let v = grid.psi[row * grid.nz + j];
        let sign = if v > floor {
            1
        } else if v < -floor {
            -1
        } else {
            0
        };
        if sign != 0 && sign != current {
            cells += 1;
        }
        if sign != 0 {
            current = sign;
        }
    }
    if cells == 0 {
        return Err(Error::NoFlow);
    }
    Ok(cells)
}

/// Output formats for [`export`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Svg,
}

/// Writes the grid to `path` in the requested format. Byte output is a
/// pure function of the grid, so identical runs produce identical files.
pub fn export(grid: &FieldGrid, format: ExportFormat, path: &Path) -> Result<()> {
    match format {
        ExportFormat::Csv => export_csv(grid, path),
        ExportFormat::Svg => export_svg(grid, path),
    }
}

/// CSV with header `r,z,u_r,u_theta,u_z,psi`, row-major rows (radial index
/// outermost), 17-significant-digit floats.
pub fn export_csv(grid: &FieldGrid, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    writeln!(out, "r,z,u_r,u_theta,u_z,psi").map_err(|e| Error::io(path, e))?;
    for i in 0..grid.nr {
        let r = grid.r_inner + i as f64 / (grid.nr - 1) as f64;
        for j in 0..grid.nz {
            let z = j as f64 / (grid.nz - 1) as f64 * grid.length;
            let at = i * grid.nz + j;
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                r, z, grid.u_r[at], grid.u_theta[at], grid.u_z[at], grid.psi[at]
            )
            .map_err(|e| Error::io(path, e))?;
        }
    }
    Ok(())
}

/// Contour plot of psi: eleven levels symmetric about zero (marching
/// squares, chained into paths with closed loops marked) plus the wall
/// frame.
pub fn export_svg(grid: &FieldGrid, path: &Path) -> Result<()> {
    let rendered = svg::render_psi_contours(grid);
    std::fs::write(path, rendered).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{ModeIndex, SpectralField, Truncation};
    use crate::quad::QuadratureGrid;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn single_mode(idx: ModeIndex, trunc: Truncation) -> SpectralField {
        let mut f = SpectralField::zero(trunc);
        f.set(idx, 1.0).unwrap();
        f
    }

    #[test]
    fn zero_field_evaluates_to_zero() {
        let trunc = Truncation::new(2, 2).unwrap();
        let grid = evaluate_velocity(&SpectralField::zero(trunc), 5, 7, 2.0, 1.0).unwrap();
        assert!(grid.u_r.iter().all(|v| *v == 0.0));
        assert!(grid.psi.iter().all(|v| *v == 0.0));
        assert!(matches!(count_cells(&grid), Err(Error::NoFlow)));
    }

    #[test]
    fn wall_values_vanish() {
        let trunc = Truncation::new(2, 2).unwrap();
        let f = single_mode(ModeIndex::plus(1, 1), trunc);
        let grid = evaluate_velocity(&f, 9, 9, 2.0, 1.0).unwrap();
        for j in 0..grid.nz {
            assert_abs_diff_eq!(grid.u_r[j], 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!(grid.u_theta[j], 0.0, epsilon = 1e-14);
            let top = (grid.nr - 1) * grid.nz + j;
            assert_abs_diff_eq!(grid.u_r[top], 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!(grid.u_theta[top], 0.0, epsilon = 1e-14);
        }
    }

    /// Quadrature of the evaluated field's norm reproduces the coefficient
    /// norm (the basis is orthonormal).
    #[test]
    fn parseval_on_the_grid() {
        let trunc = Truncation::new(3, 3).unwrap();
        let mut f = SpectralField::zero(trunc);
        f.set(ModeIndex::plus(1, 1), 0.8).unwrap();
        f.set(ModeIndex::minus(2, 3), -1.1).unwrap();
        f.set(ModeIndex::theta_mean(2), 0.6).unwrap();
        let quad = QuadratureGrid::for_truncation(trunc, 2.0);
        let norm2 = quad.integrate(|s, z| {
            let (ur, ut, uz) = f.velocity_at(s, z, 2.0);
            ur * ur + ut * ut + uz * uz
        });
        assert_relative_eq!(norm2.sqrt(), f.norm(), epsilon = 1e-8);
    }

    #[test]
    fn evaluation_is_linear() {
        let trunc = Truncation::new(2, 2).unwrap();
        let a = single_mode(ModeIndex::plus(1, 1), trunc);
        let b = single_mode(ModeIndex::minus(2, 1), trunc);
        let mut combo = SpectralField::zero(trunc);
        combo.set(ModeIndex::plus(1, 1), 2.5).unwrap();
        combo.set(ModeIndex::minus(2, 1), -0.7).unwrap();
        let ga = evaluate_velocity(&a, 7, 9, 2.0, 0.0).unwrap();
        let gb = evaluate_velocity(&b, 7, 9, 2.0, 0.0).unwrap();
        let gc = evaluate_velocity(&combo, 7, 9, 2.0, 0.0).unwrap();
        for at in 0..gc.u_r.len() {
            assert_abs_diff_eq!(
                gc.u_r[at],
                2.5 * ga.u_r[at] - 0.7 * gb.u_r[at],
                epsilon = 1e-12
            );
            assert_abs_diff_eq!(
                gc.psi[at],
                2.5 * ga.psi[at] - 0.7 * gb.psi[at],
                epsilon = 1e-12
            );
        }
    }

    /// Central finite differences of psi reproduce u_r at second order:
    /// halving the spacing quarters the error.
    #[test]
    fn streamfunction_gradient_check() {
        let trunc = Truncation::new(2, 2).unwrap();
        let mut f = SpectralField::zero(trunc);
        f.set(ModeIndex::plus(1, 1), 1.0).unwrap();
        f.set(ModeIndex::minus(2, 2), 0.5).unwrap();
        let err_at = |nz: usize| {
            let grid = evaluate_velocity(&f, 17, nz, 2.0, 0.0).unwrap();
            let dz = grid.length / (nz - 1) as f64;
            let mut worst: f64 = 0.0;
            for i in 0..grid.nr {
                for j in 1..nz - 1 {
                    let dpsi =
                        (grid.psi[i * nz + j + 1] - grid.psi[i * nz + j - 1]) / (2.0 * dz);
                    worst = worst.max((dpsi - grid.u_r[i * nz + j]).abs());
                }
            }
            worst
        };
        let coarse = err_at(33);
        let fine = err_at(65);
        let ratio = coarse / fine;
        assert!(
            (3.0..5.0).contains(&ratio),
            "expected ~4x error drop, got {ratio:.2}"
        );
    }

    #[test]
    fn psi_vanishes_on_the_boundary_and_counts_lobes() {
        let trunc = Truncation::new(3, 3).unwrap();
        for (m, expected) in [(1u32, 1usize), (2, 2), (3, 3)] {
            let f = single_mode(ModeIndex::plus(m, 1), trunc);
            let grid = evaluate_velocity(&f, 33, 65, 2.0, 0.0).unwrap();
            for i in 0..grid.nr {
                assert_abs_diff_eq!(grid.psi[i * grid.nz], 0.0, epsilon = 1e-13);
                assert_abs_diff_eq!(grid.psi[i * grid.nz + grid.nz - 1], 0.0, epsilon = 1e-13);
            }
            for j in 0..grid.nz {
                assert_abs_diff_eq!(grid.psi[j], 0.0, epsilon = 1e-13);
                assert_abs_diff_eq!(grid.psi[(grid.nr - 1) * grid.nz + j], 0.0, epsilon = 1e-13);
            }
            assert_eq!(count_cells(&grid).unwrap(), expected);
        }
    }

    #[test]
    fn mean_flow_modes_carry_no_psi() {
        let trunc = Truncation::new(2, 2).unwrap();
        let f = single_mode(ModeIndex::theta_mean(1), trunc);
        let psi = streamfunction(&f, 9, 9, 2.0).unwrap();
        assert!(psi.iter().all(|v| *v == 0.0));
    }

    /// Net meridional flux through a line equals the psi difference of its
    /// endpoints, to discretisation order.
    #[test]
    fn flux_matches_psi_differences() {
        let trunc = Truncation::new(2, 2).unwrap();
        let mut f = SpectralField::zero(trunc);
        f.set(ModeIndex::plus(1, 1), 1.3).unwrap();
        f.set(ModeIndex::plus(2, 2), -0.4).unwrap();
        let nz = 257;
        let grid = evaluate_velocity(&f, 9, nz, 2.0, 0.0).unwrap();
        // Flux of u_r across the mid-gap row between two z stations:
        // integral of u_r dz = psi(end) - psi(start) along constant s.
        let i = (grid.nr - 1) / 2;
        let dz = grid.length / (nz - 1) as f64;
        let (j0, j1) = (32, 200);
        let mut flux = 0.0;
        for j in j0..j1 {
            flux += 0.5 * (grid.u_r[i * nz + j] + grid.u_r[i * nz + j + 1]) * dz;
        }
        let dpsi = grid.psi[i * nz + j1] - grid.psi[i * nz + j0];
        assert_relative_eq!(flux, dpsi, max_relative = 1e-4);
    }

    #[test]
    fn exports_are_deterministic() {
        let trunc = Truncation::new(2, 2).unwrap();
        let mut f = SpectralField::zero(trunc);
        f.set(ModeIndex::plus(1, 1), 1.0).unwrap();
        f.set(ModeIndex::minus(2, 2), 0.25).unwrap();
        let grid = evaluate_velocity(&f, 17, 33, 2.0, 1.0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        for format in [ExportFormat::Csv, ExportFormat::Svg] {
            let p1 = dir.path().join(match format {
                ExportFormat::Csv => "a.csv",
                ExportFormat::Svg => "a.svg",
            });
            let p2 = dir.path().join(match format {
                ExportFormat::Csv => "b.csv",
                ExportFormat::Svg => "b.svg",
            });
            export(&grid, format, &p1).unwrap();
            export(&grid, format, &p2).unwrap();
            let a = std::fs::read(&p1).unwrap();
            assert!(!a.is_empty());
            assert_eq!(a, std::fs::read(&p2).unwrap());
        }
    }

    #[test]
    fn zero_field_csv_has_header_and_zero_rows() {
        let trunc = Truncation::new(1, 1).unwrap();
        let grid = evaluate_velocity(&SpectralField::zero(trunc), 3, 3, 2.0, 1.0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("zero.csv");
        export_csv(&grid, &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "r,z,u_r,u_theta,u_z,psi");
        for line in lines {
            let cols: Vec<&str> = line.split(',').collect();
            assert_eq!(cols.len(), 6);
            for v in &cols[2..] {
                assert_eq!(v.parse::<f64>().unwrap(), 0.0);
            }
        }
    }

    /// The innermost contour level of a single-cell field is one closed
    /// loop.
    #[test]
    fn svg_single_cell_has_one_innermost_loop() {
        let trunc = Truncation::new(1, 1).unwrap();
        let f = single_mode(ModeIndex::plus(1, 1), trunc);
        let grid = evaluate_velocity(&f, 33, 33, 2.0, 0.0).unwrap();
        let rendered = crate::svg::render_psi_contours(&grid);
        let innermost = rendered
            .split("data-level=")
            .last()
            .expect("levels rendered");
        let closed = innermost.matches("Z\"").count();
        assert_eq!(closed, 1, "innermost level should be a single closed loop");
    }

    #[test]
    fn tiny_grid_rejected() {
        let trunc = Truncation::new(1, 1).unwrap();
        let f = SpectralField::zero(trunc);
        assert!(evaluate_velocity(&f, 1, 5, 2.0, 0.0).is_err());
    }

    /// IO failures come back with the offending path in the message.
    #[test]
    fn export_errors_carry_the_path() {
        let trunc = Truncation::new(1, 1).unwrap();
        let f = single_mode(ModeIndex::plus(1, 1), trunc);
        let grid = evaluate_velocity(&f, 3, 3, 2.0, 0.0).unwrap();
        let bogus = std::path::Path::new("/nonexistent-dir/field.csv");
        let err = export(&grid, ExportFormat::Csv, bogus).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert!(err.to_string().contains("nonexistent-dir"));
    }
}
