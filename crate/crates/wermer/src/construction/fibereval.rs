//! Log-space fiber evaluation and sublevel sampling.
//!
//! Deep-stage epsilons sit far below f64 range, so every membership or
//! margin computation works with ln |p_n| through the factored fiber.
//! Sublevel tubes thinner than f64 resolution around their roots cannot be
//! sampled as displaced points at all; their roots serve as the limiting
//! witnesses and the ray machinery only fires where offsets are
//! representable.

use num_complex::Complex64;

/// Sum of ln |w - r| over the roots, in product form with exponent
/// renormalization (one final log instead of one per root).
pub fn ln_abs_prod(roots: &[Complex64], w: Complex64) -> f64 {
    let mut mant: f64 = 1.0;
    let mut exp2: i64 = 0;
    for r in roots {
        let d = (w - r).norm_sqr();
        if d == 0.0 {
            return f64::NEG_INFINITY;
        }
        mant *= d;
        if !(1e-200..=1e200).contains(&mant) {
            let e = mant.log2().round() as i64;
            mant = libm_scale(mant, -e);
            exp2 += e;
        }
    }
    0.5 * (mant.ln() + exp2 as f64 * std::f64::consts::LN_2)
}

fn libm_scale(x: f64, e: i64) -> f64 {
    x * 2f64.powi(e.clamp(-1000, 1000) as i32)
}

/// Offsets below this relative scale are unrepresentable against the root
/// coordinate and the root itself is the only honest witness.
pub const MIN_REPRESENTABLE_OFFSET: f64 = 1e-13;

/// A sample of (or next to) a sublevel set in one fiber.
#[derive(Debug, Clone, Copy)]
pub struct FiberSample {
    pub w: Complex64,
    /// Distance to the root the sample was grown from (0 for the root
    /// itself).
    pub offset: f64,
}

/// ln |p(z, w(t))| along the ray w = root + t e^{i theta}, given the fiber
/// roots and the stage's ln delta.
fn ray_ln(roots: &[Complex64], ln_delta: f64, root: Complex64, dir: Complex64, t: f64) -> f64 {
    ln_delta + ln_abs_prod(roots, root + dir * t)
}

/// Solve ln |p(z, root + t e^{i theta})| = target for t > 0 by Newton in
/// ln t with a bisection fallback. Returns None when the level is not
/// reached inside `max_t` (the sublevel leaks past the sampling radius) or
/// when the crossing is unrepresentably close to the root.
pub fn ray_crossing(
    roots: &[Complex64],
    ln_delta: f64,
    root: Complex64,
    dir: Complex64,
    target: f64,
    max_t: f64,
) -> Option<f64> {
    let scale = 1.0 + root.norm();
    let t_min = MIN_REPRESENTABLE_OFFSET * scale;
    let g_min = ray_ln(roots, ln_delta, root, dir, t_min);
    if g_min >= target {
        // Crossing below representable offsets: the tube is invisible.
        return None;
    }
    let g_max = ray_ln(roots, ln_delta, root, dir, max_t);
    if g_max < target {
        // Sublevel reaches past the sampling radius along this ray.
        return Some(max_t);
    }
    // First-order guess: near the root, g(ln t) ~ ln t + const with unit
    // slope, so start from the linear solution and polish with Newton.
    let mut lo = t_min.ln();
    let mut hi = max_t.ln();
    let mut u = lo + (target - g_min); // unit-slope extrapolation
    if !(lo..=hi).contains(&u) {
        u = 0.5 * (lo + hi);
    }
    for _ in 0..60 {
        let t = u.exp();
        let w = root + dir * t;
        let g = ln_delta + ln_abs_prod(roots, w);
        if (g - target).abs() < 1e-12 {
            return Some(t);
        }
        if g < target {
            lo = u;
        } else {
            hi = u;
        }
        // d g / d ln t = t * sum Re(dir conj(w - r)) / |w - r|^2
        let mut slope = 0.0;
        for r in roots {
            let d = w - r;
            let ns = d.norm_sqr();
            if ns > 0.0 {
                slope += (dir * d.conj()).re / ns;
            }
        }
        slope *= t;
        let mut next = if slope.abs() > 1e-12 {
            u - (g - target) / slope
        } else {
            0.5 * (lo + hi)
        };
        if !(lo..=hi).contains(&next) {
            next = 0.5 * (lo + hi);
        }
        if (next - u).abs() < 1e-14 {
            return Some(next.exp());
        }
        u = next;
    }
    Some(u.exp())
}

/// Witness samples for the sublevel set {ln |p| <= ln_eps} in one fiber:
/// every root (a member, and the limiting witness when the tube around it
/// is unrepresentably thin), boundary crossings along `rays` directions
/// where representable, and interior points halfway along each crossing
/// ray.
pub fn sublevel_samples(
    roots: &[Complex64],
    ln_delta: f64,
    ln_eps: f64,
    rays: usize,
    max_t: f64,
) -> Vec<FiberSample> {
    let mut out = Vec::with_capacity(roots.len() * (2 * rays + 1));
    for (i, &root) in roots.iter().enumerate() {
        out.push(FiberSample { w: root, offset: 0.0 });
        // Identical roots produce identical rays; sample the first only.
        if roots[..i].iter().any(|r| (r - root).norm_sqr() == 0.0) {
            continue;
        }
        for k in 0..rays {
            let theta = 2.0 * std::f64::consts::PI * (k as f64 + 0.31) / rays as f64;
            let dir = Complex64::from_polar(1.0, theta);
            if let Some(t) = ray_crossing(roots, ln_delta, root, dir, ln_eps, max_t) {
                out.push(FiberSample {
                    w: root + dir * t,
                    offset: t,
                });
                out.push(FiberSample {
                    w: root + dir * (0.5 * t),
                    offset: 0.5 * t,
                });
            }
        }
    }
    out
}

/// Samples of the boundary region for exterior minima: the w-circle of the
/// given radius plus the sublevel-boundary witnesses of the previous stage.
pub fn circle_samples(radius: f64, count: usize) -> Vec<Complex64> {
    (0..count)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * (k as f64 + 0.17) / count as f64;
            Complex64::from_polar(radius, theta)
        })
        .collect()
}

/// Number of circle samples for a given radius and linear density.
pub fn circle_sample_count(radius: f64, density: f64) -> usize {
    ((2.0 * std::f64::consts::PI * radius * density).ceil() as usize).clamp(64, 1024)
}

/// Distance from w to the nearest root.
pub fn dist_to_roots(roots: &[Complex64], w: Complex64) -> f64 {
    roots
        .iter()
        .map(|r| (w - r).norm())
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ln_abs_prod_matches_direct() {
        let roots = vec![c(1.0, 0.0), c(-1.0, 0.5), c(0.0, -2.0)];
        let w = c(0.3, 0.4);
        let direct: f64 = roots.iter().map(|r| (w - r).norm().ln()).sum();
        assert!((ln_abs_prod(&roots, w) - direct).abs() < 1e-12);
    }

    #[test]
    fn ln_abs_prod_handles_many_tiny_factors() {
        let roots: Vec<Complex64> = (0..64).map(|k| c(1e-8 * k as f64, 0.0)).collect();
        let w = c(5e-9, 0.0);
        let v = ln_abs_prod(&roots, w);
        assert!(v.is_finite());
        assert!(v < 64.0 * (-17.0));
    }

    #[test]
    fn ray_crossing_on_quadratic() {
        // p = w^2 - z at z = 1: roots +/-1; ln|p| = ln|w-1| + ln|w+1|.
        let roots = vec![c(1.0, 0.0), c(-1.0, 0.0)];
        // Solve |p| = 0.25 along the real ray from root 1: (t)(t+2) = 0.25.
        let target = 0.25f64.ln();
        let t = ray_crossing(&roots, 0.0, c(1.0, 0.0), c(1.0, 0.0), target, 10.0).unwrap();
        let exact = (1.0f64 + 0.25).sqrt() - 1.0; // t^2 + 2t - 0.25 = 0
        assert!((t - exact).abs() < 1e-9, "t = {t}, exact = {exact}");
    }

    #[test]
    fn ray_crossing_invisible_tube() {
        let roots = vec![c(1.0, 0.0), c(-1.0, 0.0)];
        // Target far below representable offsets around the root.
        let t = ray_crossing(&roots, 0.0, c(1.0, 0.0), c(1.0, 0.0), -2000.0, 10.0);
        assert!(t.is_none());
    }

    #[test]
    fn sublevel_samples_contain_roots_and_boundary() {
        let roots = vec![c(1.0, 0.0), c(-1.0, 0.0)];
        let samples = sublevel_samples(&roots, 0.0, 0.25f64.ln(), 8, 10.0);
        assert!(samples.iter().any(|s| s.offset == 0.0));
        let boundary: Vec<_> = samples.iter().filter(|s| s.offset > 0.0).collect();
        assert!(!boundary.is_empty());
        for s in boundary {
            let v = ln_abs_prod(&roots, s.w);
            // Either on the level set or the interior midpoint below it.
            assert!(v <= 0.25f64.ln() + 1e-9);
        }
    }
}
