//! Deterministic sampling grids and parallel worst-case reductions.

use num_complex::Complex64;
use rayon::prelude::*;

/// Lattice points (i+1/2)/density + i(j+1/2)/density inside the open disk
/// of the given radius, row-major. The half-cell offset keeps every sample
/// off the small-denominator rational lattice carrying the branch points,
/// where several predicates degenerate to 0 = 0.
pub fn disk_grid(radius: f64, density: f64) -> Vec<Complex64> {
    let n = (radius * density).ceil() as i64 + 1;
    let mut out = Vec::new();
    let r2 = radius * radius;
    for i in -n..n {
        let x = (i as f64 + 0.5) / density;
        if x * x >= r2 {
            continue;
        }
        for j in -n..n {
            let y = (j as f64 + 0.5) / density;
            if x * x + y * y < r2 {
                out.push(Complex64::new(x, y));
            }
        }
    }
    out
}

/// A located worst-case value.
#[derive(Debug, Clone, Copy)]
pub struct Worst {
    pub value: f64,
    pub z: Complex64,
    pub w: Complex64,
}

impl Worst {
    pub fn none_min() -> Worst {
        Worst {
            value: f64::INFINITY,
            z: Complex64::new(0.0, 0.0),
            w: Complex64::new(0.0, 0.0),
        }
    }

    pub fn none_max() -> Worst {
        Worst {
            value: f64::NEG_INFINITY,
            z: Complex64::new(0.0, 0.0),
            w: Complex64::new(0.0, 0.0),
        }
    }
}

fn merge_min(a: Worst, b: Worst) -> Worst {
    // Total order with a positional tie-break keeps the reduction
    // deterministic under any rayon split.
    if (b.value, b.z.re, b.z.im, b.w.re, b.w.im) < (a.value, a.z.re, a.z.im, a.w.re, a.w.im) {
        b
    } else {
        a
    }
}

fn merge_max(a: Worst, b: Worst) -> Worst {
    if (b.value, b.z.re, b.z.im, b.w.re, b.w.im) > (a.value, a.z.re, a.z.im, a.w.re, a.w.im) {
        b
    } else {
        a
    }
}

/// Parallel minimum of a per-point evaluation over grid points. The
/// evaluator may report several (w, value) pairs per z; `f` returns the
/// local minimum as a `Worst`.
pub fn par_min_over<F>(points: &[Complex64], f: F) -> Worst
where
    F: Fn(Complex64) -> Worst + Sync,
{
    points
        .par_iter()
        .map(|&z| f(z))
        .reduce(Worst::none_min, merge_min)
}

pub fn par_max_over<F>(points: &[Complex64], f: F) -> Worst
where
    F: Fn(Complex64) -> Worst + Sync,
{
    points
        .par_iter()
        .map(|&z| f(z))
        .reduce(Worst::none_max, merge_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_density_and_bounds() {
        let g = disk_grid(2.0, 8.0);
        assert!(!g.is_empty());
        for z in &g {
            assert!(z.norm() < 2.0);
        }
        // Roughly pi r^2 density^2 points.
        let expected = std::f64::consts::PI * 4.0 * 64.0;
        assert!((g.len() as f64 - expected).abs() < 0.1 * expected);
        // No point sits on the coarse rational lattice.
        for z in &g {
            assert!((z.re * 16.0).fract().abs() > 1e-12);
        }
    }

    #[test]
    fn deterministic_reduction() {
        let g = disk_grid(1.5, 16.0);
        let f = |z: Complex64| Worst {
            value: (z - Complex64::new(0.3, 0.4)).norm(),
            z,
            w: Complex64::new(0.0, 0.0),
        };
        let a = par_min_over(&g, f);
        let b = par_min_over(&g, f);
        assert_eq!(a.value, b.value);
        assert_eq!(a.z, b.z);
        assert!(a.value < 0.1);
    }
}
