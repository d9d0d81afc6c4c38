//! Finite-difference and finite-volume operators on cell-centered fields.
//!
//! All operators use zero-flux (homogeneous Neumann) treatment at the box
//! boundary: a missing neighbour is replaced by a ghost equal to the boundary
//! cell, except in [`gradient`], which switches to a one-sided difference.

use crate::field::{Field, Grid, GridError, VectorField};

/// Cell-centered gradient: centered differences in the interior, first-order
/// one-sided differences at boundary cells.
pub fn gradient(f: &Field) -> VectorField {
    let grid = *f.grid();
    let dx = grid.dx();
    let v = f.values();
    let components = (0..grid.dim())
        .map(|axis| {
            let mut out = Field::zeros(grid);
            for (i, o) in out.values_mut().iter_mut().enumerate() {
                *o = match grid.neighbours(i, axis) {
                    (Some(lo), Some(hi)) => (v[hi] - v[lo]) / (2.0 * dx),
                    (None, Some(hi)) => (v[hi] - v[i]) / dx,
                    (Some(lo), None) => (v[i] - v[lo]) / dx,
                    (None, None) => 0.0,
                };
            }
            out
        })
        .collect();
    VectorField::new(components)
}

/// `(2d+1)`-point Laplacian with Neumann ghost cells.
pub fn laplacian(f: &Field) -> Field {
    let grid = *f.grid();
    let inv_dx2 = 1.0 / (grid.dx() * grid.dx());
    let v = f.values();
    let mut out = Field::zeros(grid);
    for (i, o) in out.values_mut().iter_mut().enumerate() {
        let mut acc = 0.0;
        for axis in 0..grid.dim() {
            let (lo, hi) = grid.neighbours(i, axis);
            let lo = lo.map_or(v[i], |j| v[j]);
            let hi = hi.map_or(v[i], |j| v[j]);
            acc += (hi - v[i]) - (v[i] - lo);
        }
        *o = acc * inv_dx2;
    }
    out
}

/// Conservative discretization of `div[mobility ∇potential]`.
///
/// Face flux is `mean(mobility) * Δpotential / dx`; boundary faces carry no
/// flux, so the cell sum of the result telescopes to zero.
pub fn div_mobility_flux(mobility: &Field, potential: &Field) -> Field {
    let grid = *mobility.grid();
    let dx = grid.dx();
    let inv_dx2 = 1.0 / (dx * dx);
    let m = mobility.values();
    let q = potential.values();
    let mut out = Field::zeros(grid);
    let o = out.values_mut();
    for i in 0..grid.len() {
        for axis in 0..grid.dim() {
            if let (_, Some(j)) = grid.neighbours(i, axis) {
                let flux = 0.5 * (m[i] + m[j]) * (q[j] - q[i]) * inv_dx2;
                o[i] += flux;
                o[j] -= flux;
            }
        }
    }
    out
}

/// `div[n ∇p]` for the total-density equation.
pub fn div_density_flux(n: &Field, p: &Field) -> Field {
    div_mobility_flux(n, p)
}

/// First-order upwind value of `-v · ∇c`.
///
/// Per axis, a positive velocity takes the backward difference of `c` and a
/// non-positive velocity the forward difference. A missing neighbour gives a
/// zero difference.
pub fn upwind_advect(c: &Field, v: &VectorField) -> Field {
    let grid = *c.grid();
    let dx = grid.dx();
    let cv = c.values();
    let mut out = Field::zeros(grid);
    for (i, o) in out.values_mut().iter_mut().enumerate() {
        let mut acc = 0.0;
        for axis in 0..grid.dim() {
            let va = v.component(axis)[i];
            let (lo, hi) = grid.neighbours(i, axis);
            let d = if va > 0.0 {
                lo.map_or(0.0, |j| cv[i] - cv[j])
            } else {
                hi.map_or(0.0, |j| cv[j] - cv[i])
            };
            acc -= va * d / dx;
        }
        *o = acc;
    }
    out
}

/// Quintic bridge `1 - s^3 (10 - 15 s + 6 s^2)`: 1 at `s = 0`, 0 at `s = 1`,
/// with vanishing first and second derivatives at both ends.
pub fn bridge(s: f64) -> f64 {
    if s <= 0.0 {
        1.0
    } else if s >= 1.0 {
        0.0
    } else {
        1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
    }
}

/// Radial cutoff that is 1 on `|x| <= radius` and 0 on `|x| >= radius + 1`.
pub fn localizer(grid: &Grid, radius: f64) -> Result<Field, GridError> {
    if !(radius >= 0.0) || radius + 1.0 > grid.half_width() {
        return Err(GridError::LocalizerExceedsBox {
            radius,
            half_width: grid.half_width(),
        });
    }
    Ok(Field::from_fn(*grid, |x| {
        bridge((x[0] * x[0] + x[1] * x[1]).sqrt() - radius)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid1(n: usize, l: f64) -> Grid {
        Grid::new(1, l, n).unwrap()
    }

    fn interior(grid: &Grid) -> impl Iterator<Item = usize> + '_ {
        (0..grid.len()).filter(move |&i| {
            (0..grid.dim()).all(|a| {
                let k = grid.axis_index(i, a);
                k > 0 && k + 1 < grid.cells_per_axis()
            })
        })
    }

    #[test]
    fn gradient_of_constant_is_zero() {
        let g = Grid::new(2, 1.0, 16).unwrap();
        let grad = gradient(&Field::constant(g, 3.5));
        assert!(grad.components().iter().all(|c| c.values().iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn gradient_exact_on_linear_and_quadratic() {
        let g = grid1(20, 1.0); // dx = 0.1
        let grad = gradient(&Field::from_fn(g, |x| 2.5 * x[0] - 1.0));
        for i in interior(&g) {
            assert!((grad.component(0)[i] - 2.5).abs() < 1e-12);
        }
        let grad = gradient(&Field::from_fn(g, |x| x[0] * x[0]));
        // cell 15 is centered at x = 0.55; check the x = 0.5 case on a shifted grid
        let half = Grid::new(1, 1.05, 21).unwrap(); // dx = 0.1, centers at -1.0..1.0
        let gq = gradient(&Field::from_fn(half, |x| x[0] * x[0]));
        let k = (0..half.len())
            .find(|&k| (half.center(k) - 0.5).abs() < 1e-12)
            .unwrap();
        assert!((gq.component(0)[k] - 1.0).abs() < 1e-12);
        for i in interior(&g) {
            assert!((grad.component(0)[i] - 2.0 * g.center(i)).abs() < 1e-12);
        }
    }

    #[test]
    fn laplacian_constant_and_quadratic() {
        let g = Grid::new(2, 2.0, 16).unwrap();
        assert!(laplacian(&Field::constant(g, 7.0)).values().iter().all(|&v| v == 0.0));
        let g1 = grid1(32, 2.0);
        let lap = laplacian(&Field::from_fn(g1, |x| x[0] * x[0]));
        for i in interior(&g1) {
            assert!((lap[i] - 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn laplacian_taylor_remainder_bound() {
        let l = 3.0;
        let g = grid1(128, l); // dx = L/64
        let k = std::f64::consts::PI / l;
        let lap = laplacian(&Field::from_fn(g, |x| (k * x[0]).sin()));
        let dx = g.dx();
        let bound = k.powi(4) * dx * dx;
        for i in interior(&g) {
            let exact = -k * k * (k * g.center(i)).sin();
            assert!((lap[i] - exact).abs() < bound);
        }
    }

    fn max_err_on_core(grid: &Grid, approx: &Field, exact: impl Fn([f64; 2]) -> f64) -> f64 {
        let l = grid.half_width();
        (0..grid.len())
            .filter(|&i| grid.coords(i).iter().all(|c| c.abs() <= 0.5 * l))
            .map(|i| (approx[i] - exact(grid.coords(i))).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn second_order_convergence() {
        let f = |x: [f64; 2]| (-(x[0] * x[0] + x[1] * x[1])).exp();
        for dim in [1, 2] {
            let mut grad_err = Vec::new();
            let mut lap_err = Vec::new();
            for n in [32, 64, 128, 256] {
                let g = Grid::new(dim, 2.0, n).unwrap();
                let fld = Field::from_fn(g, f);
                let gr = gradient(&fld);
                grad_err.push(max_err_on_core(&g, gr.component(0), |x| -2.0 * x[0] * f(x)));
                let r2 = |x: [f64; 2]| x[0] * x[0] + x[1] * x[1];
                lap_err.push(max_err_on_core(&g, &laplacian(&fld), |x| {
                    (4.0 * r2(x) - 2.0 * dim as f64) * f(x)
                }));
            }
            for errs in [&grad_err, &lap_err] {
                for w in errs.windows(2) {
                    let order = (w[0] / w[1]).log2();
                    assert!((1.8..=2.2).contains(&order), "dim {dim} order {order}");
                }
            }
        }
    }

    #[test]
    fn flux_divergence_uniform_flux_and_conservation() {
        let g = grid1(32, 1.0);
        let out = div_density_flux(&Field::constant(g, 2.0), &Field::from_fn(g, |x| 3.0 * x[0]));
        for i in interior(&g) {
            assert!(out[i].abs() < 1e-10);
        }
        let g2 = Grid::new(2, 1.5, 24).unwrap();
        let n = Field::from_fn(g2, |x| 1.0 + x[0].sin() * x[1].cos());
        let p = Field::from_fn(g2, |x| (x[0] * x[1]).exp());
        let d = div_density_flux(&n, &p);
        let total: f64 = d.values().iter().sum();
        let scale: f64 = d.values().iter().map(|v| v.abs()).sum();
        assert!(total.abs() <= 1e-12 * scale);
    }

    #[test]
    fn flux_divergence_matches_expanded_form() {
        // div[n ∇p] = ∇n·∇p + n Δp for n = exp(-x^2), p = n^2
        let err_at = |cells: usize| {
            let g = grid1(cells, 4.0);
            let n = Field::from_fn(g, |x| (-x[0] * x[0]).exp());
            let p = n.map(|v| v * v);
            let d = div_density_flux(&n, &p);
            let gn = gradient(&n);
            let gp = gradient(&p);
            let lp = laplacian(&p);
            (0..g.len())
                .map(|i| {
                    let expanded = gn.component(0)[i] * gp.component(0)[i] + n[i] * lp[i];
                    (d[i] - expanded).abs()
                })
                .fold(0.0, f64::max)
        };
        // dx = 1/64 and the coarser dx = 1/32
        let fine = err_at(512);
        let coarse = err_at(256);
        let dx = 1.0 / 64.0;
        assert!(fine <= 2.0 * dx, "fine error {fine}");
        assert!(coarse / fine > 1.9, "ratio {}", coarse / fine);
    }

    #[test]
    fn upwind_constant_and_linear() {
        let g = grid1(16, 1.0);
        let v = VectorField::new(vec![Field::constant(g, 1.0)]);
        assert!(upwind_advect(&Field::constant(g, 0.3), &v)
            .values()
            .iter()
            .all(|&x| x == 0.0));
        let out = upwind_advect(&Field::from_fn(g, |x| x[0]), &v);
        for i in 1..g.len() {
            assert!((out[i] + 1.0).abs() < 1e-12);
        }
        let vneg = v.neg();
        let out = upwind_advect(&Field::from_fn(g, |x| x[0]), &vneg);
        for i in 0..g.len() - 1 {
            assert!((out[i] - 1.0).abs() < 1e-12);
        }
    }

    fn total_variation(f: &Field) -> f64 {
        f.values().windows(2).map(|w| (w[1] - w[0]).abs()).sum()
    }

    #[test]
    fn upwind_step_profile_is_monotone() {
        let g = grid1(100, 2.0);
        let dx = g.dx();
        let v = VectorField::new(vec![Field::constant(g, 1.0)]);
        let mut c = Field::from_fn(g, |x| if x[0] < -0.5 { 1.0 } else { 0.2 });
        let (lo, hi) = (c.min(), c.max());
        let dt = 0.5 * dx;
        let steps = (0.5 / dt).round() as usize;
        let mut tv = total_variation(&c);
        for _ in 0..steps {
            let rhs = upwind_advect(&c, &v);
            c = c.zip_map(&rhs, |a, r| a + dt * r);
            assert!(c.min() >= lo - 1e-15 && c.max() <= hi + 1e-15);
            let tv_new = total_variation(&c);
            assert!(tv_new <= tv + 1e-13);
            tv = tv_new;
        }
        // the front moved right by about 0.5
        let k = (0..g.len()).find(|&k| c[k] < 0.6).unwrap();
        assert!((g.center(k) - 0.0).abs() < 0.15, "front at {}", g.center(k));
    }

    #[test]
    fn localizer_values() {
        let g = Grid::new(1, 4.0, 400).unwrap();
        assert!(matches!(
            localizer(&g, 3.5),
            Err(GridError::LocalizerExceedsBox { .. })
        ));
        let phi = localizer(&g, 2.0).unwrap();
        assert!(phi.values().iter().all(|&v| (0.0..=1.0).contains(&v)));
        for i in 0..g.len() {
            let r = g.center(i).abs();
            if r <= 2.0 {
                assert_eq!(phi[i], 1.0);
            }
            if r >= 3.0 {
                assert_eq!(phi[i], 0.0);
            }
        }
        assert_eq!(bridge(0.0), 1.0);
        assert_eq!(bridge(1.0), 0.0);
        assert!((bridge(0.5) - 0.5).abs() < 1e-15);
    }
}
