//! Simultaneous root finding: Aberth-Ehrlich iteration with convex-hull
//! initial guesses, Newton polishing, and multiplicity clustering.

use num_complex::Complex64;

use super::bipoly::BiPoly;
use super::unipoly::{Scaled, UniPoly};
use crate::error::{Error, Result};

/// Default clustering tolerance; multiplicities in the collision polynomials
/// must be integers and clustering is the only integerization point.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-7;

const MAX_ABERTH_ITERS: usize = 400;
const ABERTH_EPS: f64 = 1e-14;

/// Roots of a polynomial together with integer multiplicities.
#[derive(Debug, Clone)]
pub struct RootSet {
    pub roots: Vec<Complex64>,
    pub multiplicities: Vec<u32>,
    pub cluster_tol: f64,
}

impl RootSet {
    pub fn total_multiplicity(&self) -> u32 {
        self.multiplicities.iter().sum()
    }

    /// Each root repeated according to its multiplicity.
    pub fn expanded(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.total_multiplicity() as usize);
        for (r, &m) in self.roots.iter().zip(&self.multiplicities) {
            for _ in 0..m {
                out.push(*r);
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }
}

/// Initial guesses after Bini: radii from the upper convex hull of
/// `(k, log |c_k|)`, angles spread with a fixed irrational rotation.
fn initial_guesses(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let pts: Vec<(usize, f64)> = coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let a = c.norm();
            (k, if a > 0.0 { a.ln() } else { -1e30 })
        })
        .collect();
    // Upper convex hull over k = 0..n.
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for &(k, y) in &pts {
        while hull.len() >= 2 {
            let (k1, y1) = hull[hull.len() - 2];
            let (k2, y2) = hull[hull.len() - 1];
            let cross = (k2 - k1) as f64 * (y - y1) - (k - k1) as f64 * (y2 - y1);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push((k, y));
    }
    let mut guesses = Vec::with_capacity(n);
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    let mut edge_index = 0.0f64;
    for win in hull.windows(2) {
        let (k1, y1) = win[0];
        let (k2, y2) = win[1];
        let count = k2 - k1;
        let r = ((y1 - y2) / count as f64).exp();
        let r = r.clamp(1e-12, 1e12);
        for i in 0..count {
            let theta = 2.0 * std::f64::consts::PI
                * (i as f64 / count as f64 + golden * edge_index + 0.35711 / n as f64);
            guesses.push(Complex64::from_polar(r, theta));
        }
        edge_index += 1.0;
    }
    debug_assert_eq!(guesses.len(), n);
    guesses
}

/// All roots of the (ascending-coefficient) polynomial via Aberth-Ehrlich.
/// The leading coefficient must be nonzero. Roots at zero are deflated
/// exactly before iterating. Output is sorted by (re, im).
pub fn all_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let poly = UniPoly::new(coeffs.to_vec());
    poly.require_nonzero_leading("all_roots")?;
    let degree = poly.degree();
    if degree == 0 {
        return Ok(Vec::new());
    }
    let (normed, _) = poly.max_normalized();

    // Deflate exact roots at the origin.
    let zeros_at_origin = normed
        .coeffs
        .iter()
        .take_while(|c| c.norm_sqr() == 0.0)
        .count();
    let reduced: Vec<Complex64> = normed.coeffs[zeros_at_origin..].to_vec();
    let mut roots = vec![Complex64::new(0.0, 0.0); zeros_at_origin];

    if reduced.len() > 1 {
        let p = UniPoly::new(reduced);
        if p.degree() == 1 {
            roots.push(-p.coeffs[0] / p.coeffs[1]);
        } else {
            roots.extend(aberth(&p));
        }
    }
    roots.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    Ok(roots)
}

fn aberth(p: &UniPoly) -> Vec<Complex64> {
    let n = p.degree();
    let mut w = initial_guesses(&p.coeffs);
    let mut converged = vec![false; n];
    for _iter in 0..MAX_ABERTH_ITERS {
        let mut max_step = 0.0f64;
        for i in 0..n {
            if converged[i] {
                continue;
            }
            let (pv, dv) = p.eval_with_derivative_scaled(w[i]);
            if pv.is_zero() {
                converged[i] = true;
                continue;
            }
            let newton = if dv.is_zero() {
                // At a critical point; take a deterministic nudge.
                Complex64::new(1e-8, 1e-8) * (1.0 + w[i].norm())
            } else {
                pv.ratio(dv)
            };
            if !newton.re.is_finite() || !newton.im.is_finite() {
                converged[i] = true;
                continue;
            }
            let mut repulse = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    let d = w[i] - w[j];
                    let ns = d.norm_sqr();
                    if ns > 1e-300 {
                        repulse += d.conj() / ns;
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - newton * repulse;
            let step = if denom.norm_sqr() > 1e-300 {
                newton / denom
            } else {
                newton
            };
            w[i] -= step;
            let rel = step.norm() / (1.0 + w[i].norm());
            if rel < ABERTH_EPS {
                converged[i] = true;
            }
            max_step = max_step.max(rel);
        }
        if max_step < ABERTH_EPS {
            break;
        }
    }
    // Final Newton polish, capped to avoid drifting off clustered roots.
    for wi in w.iter_mut() {
        for _ in 0..3 {
            let (pv, dv) = p.eval_with_derivative_scaled(*wi);
            if pv.is_zero() || dv.is_zero() {
                break;
            }
            let step = pv.ratio(dv);
            if !step.re.is_finite() || !step.im.is_finite() {
                break;
            }
            if step.norm() > 0.1 * (1.0 + wi.norm()) {
                break;
            }
            *wi -= step;
        }
    }
    w
}

/// Cluster raw roots into representatives with integer multiplicities,
/// then refine each representative with multiplicity-aware Newton steps
/// (`z <- z - m p/p'`), which restores quadratic convergence at multiple
/// roots.
pub fn cluster_roots(p: &UniPoly, raw: &[Complex64], cluster_tol: f64) -> Result<RootSet> {
    let n = raw.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        let mut i = i;
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (raw[i] - raw[j]).norm() <= cluster_tol * (1.0 + raw[i].norm()) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut group_of = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if group_of[r] == usize::MAX {
            group_of[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[group_of[r]].push(i);
    }

    let mut roots = Vec::with_capacity(groups.len());
    let mut mults = Vec::with_capacity(groups.len());
    for g in &groups {
        let m = g.len() as u32;
        let mut rep = g.iter().map(|&i| raw[i]).sum::<Complex64>() / g.len() as f64;
        for _ in 0..30 {
            let (pv, dv) = p.eval_with_derivative_scaled(rep);
            if pv.is_zero() || dv.is_zero() {
                break;
            }
            let step = pv.ratio(dv) * m as f64;
            if !step.re.is_finite() || !step.im.is_finite() {
                break;
            }
            rep -= step;
            if step.norm() <= 1e-15 * (1.0 + rep.norm()) {
                break;
            }
        }
        roots.push(rep);
        mults.push(m);
    }

    // Ambiguity guard: distinct representatives within 10x tolerance mean
    // the clustering radius cannot be trusted.
    for i in 0..roots.len() {
        for j in (i + 1)..roots.len() {
            let d = (roots[i] - roots[j]).norm();
            if d < 10.0 * cluster_tol * (1.0 + roots[i].norm()) {
                return Err(Error::ClusterAmbiguity {
                    a: roots[i],
                    b: roots[j],
                    tol: cluster_tol,
                });
            }
        }
    }

    let mut order: Vec<usize> = (0..roots.len()).collect();
    order.sort_by(|&a, &b| {
        roots[a]
            .re
            .partial_cmp(&roots[b].re)
            .unwrap()
            .then(roots[a].im.partial_cmp(&roots[b].im).unwrap())
    });
    Ok(RootSet {
        roots: order.iter().map(|&i| roots[i]).collect(),
        multiplicities: order.iter().map(|&i| mults[i]).collect(),
        cluster_tol,
    })
}

/// Clustered roots with integer multiplicities of a univariate polynomial.
pub fn uni_roots(q: &UniPoly, cluster_tol: f64) -> Result<RootSet> {
    q.require_nonzero_leading("uni_roots")?;
    if q.degree() == 0 {
        return Ok(RootSet {
            roots: vec![],
            multiplicities: vec![],
            cluster_tol,
        });
    }
    let raw = all_roots(&q.coeffs)?;
    let (normed, _) = q.max_normalized();
    cluster_roots(&normed, &raw, cluster_tol)
}

/// All `deg_w` roots (with multiplicity) of `w -> p(z0, w)`.
///
/// Fails with `Degenerate` when the leading w-coefficient vanishes at z0 at
/// working precision; valid stage polynomials keep it a nonzero constant.
pub fn roots_in_w(p: &BiPoly, z0: Complex64) -> Result<RootSet> {
    roots_in_w_tol(p, z0, DEFAULT_CLUSTER_TOL)
}

pub fn roots_in_w_tol(p: &BiPoly, z0: Complex64, cluster_tol: f64) -> Result<RootSet> {
    if p.deg_w() < 1 {
        return Err(Error::Degenerate("deg_w must be at least 1".into()));
    }
    let coeffs = p.fiber_coeffs(z0);
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let lead = coeffs.last().unwrap().norm();
    if scale == 0.0 || lead < 1e-13 * scale {
        return Err(Error::Degenerate(format!(
            "leading w-coefficient vanishes at z0 = {z0} at working precision"
        )));
    }
    let raw = all_roots(&coeffs)?;
    let fiber = UniPoly::new(coeffs).max_normalized().0;
    cluster_roots(&fiber, &raw, cluster_tol)
}

/// Relative backward error of `root` for the ascending-coefficient
/// polynomial: `|p(root)| / sum_k |c_k| |root|^k`.
pub fn relative_backward_error(coeffs: &[Complex64], root: Complex64) -> f64 {
    let p = UniPoly::new(coeffs.to_vec());
    let v = p.eval_scaled(root);
    let mut denom = Scaled::zero();
    let r = root.norm();
    let mut pw = Scaled::one();
    for c in coeffs {
        denom = denom.add(pw.mul_value(Complex64::new(c.norm(), 0.0)));
        pw = pw.mul_value(Complex64::new(r, 0.0));
    }
    if denom.is_zero() {
        return 0.0;
    }
    (v.ln_abs() - denom.ln_abs()).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn quadratic_roots() {
        // z^2 + 1 -> {i, -i}
        let q = UniPoly::new(vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let rs = uni_roots(&q, DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(rs.roots.len(), 2);
        assert_eq!(rs.total_multiplicity(), 2);
        assert!((rs.roots[0] - c(0.0, -1.0)).norm() < 1e-10);
        assert!((rs.roots[1] - c(0.0, 1.0)).norm() < 1e-10);
    }

    #[test]
    fn double_root_cluster() {
        // (z-1)^2 (z+i): {1: mult 2, -i: mult 1}
        let q = UniPoly::from_roots(&[(c(1.0, 0.0), 2), (c(0.0, -1.0), 1)]);
        let rs = uni_roots(&q, DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(rs.roots.len(), 2);
        let idx1 = rs
            .roots
            .iter()
            .position(|r| (r - c(1.0, 0.0)).norm() < 1e-6)
            .unwrap();
        assert_eq!(rs.multiplicities[idx1], 2);
        let idx2 = rs
            .roots
            .iter()
            .position(|r| (r - c(0.0, -1.0)).norm() < 1e-6)
            .unwrap();
        assert_eq!(rs.multiplicities[idx2], 1);
    }

    #[test]
    fn degree_twelve_round_trip() {
        // Construct-then-solve oracle: a random-looking degree-12 product of
        // known separated factors round-trips within 1e-8.
        let known = [
            c(1.3, 0.2),
            c(-0.8, 1.1),
            c(0.4, -2.0),
            c(-1.7, -0.6),
            c(2.2, 0.9),
            c(0.1, 0.5),
            c(-2.4, 0.3),
            c(1.0, -1.4),
            c(-0.3, -0.9),
            c(2.8, -0.2),
            c(-1.1, 2.1),
            c(0.7, 1.8),
        ];
        let q = UniPoly::from_roots(&known.iter().map(|&r| (r, 1)).collect::<Vec<_>>());
        let rs = uni_roots(&q, DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(rs.total_multiplicity(), 12);
        for k in &known {
            let best = rs.roots.iter().map(|r| (r - k).norm()).fold(f64::MAX, f64::min);
            assert!(best < 1e-8, "root {k} recovered with error {best:.3e}");
        }
    }

    #[test]
    fn fiber_roots_of_w2_minus_z() {
        let p = BiPoly::new(vec![
            UniPoly::new(vec![c(0.0, 0.0), c(-1.0, 0.0)]),
            UniPoly::zero(),
            UniPoly::one(),
        ]);
        // z0 = 1 -> {+1, -1}
        let rs = roots_in_w(&p, c(1.0, 0.0)).unwrap();
        assert_eq!(rs.roots.len(), 2);
        assert!((rs.roots[0] - c(-1.0, 0.0)).norm() < 1e-12);
        assert!((rs.roots[1] - c(1.0, 0.0)).norm() < 1e-12);
        // z0 = 0 -> double root at 0
        let rs0 = roots_in_w(&p, c(0.0, 0.0)).unwrap();
        assert_eq!(rs0.total_multiplicity(), 2);
        assert_eq!(rs0.roots.len(), 1);
        assert!(rs0.roots[0].norm() < 1e-10);
        // z0 = 2+i -> principal sqrt oracle: x^2 - y^2 = 2, 2xy = 1.
        let z0 = c(2.0, 1.0);
        let x = ((2.0 + (5.0f64).sqrt()) / 2.0).sqrt();
        let y = 1.0 / (2.0 * x);
        let rs2 = roots_in_w(&p, z0).unwrap();
        let target = c(x, y);
        let best = rs2.roots.iter().map(|r| (r - target).norm()).fold(f64::MAX, f64::min);
        assert!(best < 1e-5, "principal sqrt off by {best:.2e}");
        let best_neg = rs2.roots.iter().map(|r| (r + target).norm()).fold(f64::MAX, f64::min);
        assert!(best_neg < 1e-5);
    }

    #[test]
    fn degenerate_leading_coefficient() {
        // p = z * w^2 + 1 degenerates at z0 = 0.
        let p = BiPoly::new(vec![
            UniPoly::one(),
            UniPoly::zero(),
            UniPoly::new(vec![c(0.0, 0.0), c(1.0, 0.0)]),
        ]);
        assert!(matches!(
            roots_in_w(&p, c(0.0, 0.0)),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn backward_error_is_small() {
        let q = UniPoly::from_roots(&[
            (c(0.5, 0.5), 1),
            (c(-1.5, 0.25), 1),
            (c(2.0, -1.0), 1),
            (c(0.0, 2.5), 1),
        ]);
        let rs = uni_roots(&q, DEFAULT_CLUSTER_TOL).unwrap();
        for r in &rs.roots {
            assert!(relative_backward_error(&q.coeffs, *r) < 1e-10);
        }
    }

    #[test]
    fn high_degree_with_origin_roots() {
        let mut factors = vec![(c(0.0, 0.0), 3)];
        for k in 1..=9 {
            factors.push((Complex64::from_polar(1.0 + 0.2 * k as f64, 0.7 * k as f64), 1));
        }
        let q = UniPoly::from_roots(&factors);
        let rs = uni_roots(&q, DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(rs.total_multiplicity(), 12);
        let zero_idx = rs.roots.iter().position(|r| r.norm() < 1e-9).unwrap();
        assert_eq!(rs.multiplicities[zero_idx], 3);
    }
}
