//! The collision polynomial Z_n: zeros of all pairwise branch differences
//! of the stage function, excluding branch points, with integer vanishing
//! orders estimated from ring samples of the minimum branch gap.

use num_complex::Complex64;

use super::{BranchPointTable, StageFunctionSet};
use crate::algebra::bipoly::BiPoly;
use crate::algebra::{analytic_roots, resultant_degree_bound, sylvester_det_at, Scaled, UniPoly};
use crate::error::{Error, Result};

/// Tuning for collision-zero extraction.
#[derive(Debug, Clone, Copy)]
pub struct CollisionConfig {
    /// Above this discriminant degree bound, collision zeros are extracted
    /// from the per-subset difference products instead of the discriminant
    /// (whose degree grows too fast for dense root finding).
    pub disc_degree_limit: usize,
    /// Outermost interpolation-circle radius when hunting collision zeros.
    pub max_search_radius: f64,
    /// Candidates this close (relative) to a branch point are excluded.
    pub branch_point_exclusion: f64,
}

impl Default for CollisionConfig {
    fn default() -> Self {
        CollisionConfig {
            disc_degree_limit: 1200,
            max_search_radius: 16384.0,
            branch_point_exclusion: 1e-6,
        }
    }
}

/// Collision zeros with their estimated vanishing orders.
#[derive(Debug, Clone)]
pub struct CollisionSet {
    pub points: Vec<Complex64>,
    pub orders: Vec<u32>,
}

impl CollisionSet {
    pub fn factored(&self) -> Vec<(Complex64, u32)> {
        self.points.iter().cloned().zip(self.orders.iter().cloned()).collect()
    }
}

/// Build Z_n for n >= 2: the monic polynomial vanishing at every
/// non-branch-point zero of every branch-pair difference of the stage
/// function, with order the maximum vanishing order over colliding pairs.
pub fn compute_z(
    n: usize,
    fs: &StageFunctionSet,
    p_n: &BiPoly,
    table: &BranchPointTable,
    cfg: &CollisionConfig,
) -> Result<(UniPoly, CollisionSet)> {
    if n < 2 {
        return Err(Error::Degenerate("Z_1 = 1 by definition; compute_z needs n >= 2".into()));
    }
    if fs.n != n {
        return Err(Error::Degenerate("stage function set does not match the stage index".into()));
    }

    let disc_bound = resultant_degree_bound(p_n, &p_n.derivative_w());
    let mut candidates = if disc_bound <= cfg.disc_degree_limit {
        let dw = p_n.derivative_w();
        analytic_roots(
            |z| sylvester_det_at(p_n, &dw, z),
            disc_bound,
            0.25,
            cfg.max_search_radius,
        )
    } else {
        difference_product_candidates(fs, table, cfg)
    };

    // Branch points are separate equality loci, never collision zeros.
    candidates.retain(|z| {
        (1..=n).all(|j| {
            let a = table.point(j);
            (z - a).norm() > cfg.branch_point_exclusion * (1.0 + a.norm())
        })
    });
    candidates = dedupe(candidates, 1e-5);

    let mut points = Vec::new();
    let mut orders = Vec::new();
    for z_i in candidates {
        let mut nearest = f64::MAX;
        for other in points.iter().chain(table.points[..n].iter()) {
            let d: f64 = (z_i - other).norm();
            if d > 0.0 && d < nearest {
                nearest = d;
            }
        }
        let base_r = (0.02 * (1.0 + z_i.norm())).min(0.2 * nearest);
        match vanishing_order(fs, table, z_i, base_r)? {
            Some(m) => {
                points.push(z_i);
                orders.push(m);
            }
            None => {} // spurious candidate: no vanishing observed
        }
    }

    let mut order_idx: Vec<usize> = (0..points.len()).collect();
    order_idx.sort_by(|&a, &b| {
        points[a]
            .re
            .partial_cmp(&points[b].re)
            .unwrap()
            .then(points[a].im.partial_cmp(&points[b].im).unwrap())
    });
    let set = CollisionSet {
        points: order_idx.iter().map(|&i| points[i]).collect(),
        orders: order_idx.iter().map(|&i| orders[i]).collect(),
    };
    Ok((UniPoly::from_roots(&set.factored()), set))
}

fn dedupe(mut points: Vec<Complex64>, rel_tol: f64) -> Vec<Complex64> {
    points.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    let mut out: Vec<Complex64> = Vec::new();
    for p in points {
        if !out.iter().any(|q| (p - q).norm() <= rel_tol * (1.0 + p.norm())) {
            out.push(p);
        }
    }
    out
}

/// Vanishing order of the minimum branch gap at a candidate point from
/// log-log ring slopes; `None` when no vanishing is observed (spurious
/// candidate), error when two radii keep disagreeing after shrinking.
fn vanishing_order(
    fs: &StageFunctionSet,
    table: &BranchPointTable,
    z_i: Complex64,
    base_r: f64,
) -> Result<Option<u32>> {
    const RING_POINTS: usize = 16;
    let mut last = (0.0, 0.0);
    for attempt in 0..3 {
        let r0 = base_r / 4f64.powi(attempt);
        let radii = [r0, r0 / 2.0, r0 / 4.0];
        let mut mean_logs = [0.0f64; 3];
        let mut samples: Vec<(f64, f64)> = Vec::with_capacity(3 * RING_POINTS);
        let mut degenerate = false;
        for (k, &r) in radii.iter().enumerate() {
            let mut acc = 0.0;
            for t in 0..RING_POINTS {
                let theta = 2.0 * std::f64::consts::PI * (t as f64 + 0.37) / RING_POINTS as f64;
                let gap = fs.min_branch_gap(z_i + Complex64::from_polar(r, theta), table);
                if gap <= 0.0 || !gap.is_finite() {
                    degenerate = true;
                    break;
                }
                let lg = gap.ln();
                acc += lg;
                samples.push((r.ln(), lg));
            }
            if degenerate {
                break;
            }
            mean_logs[k] = acc / RING_POINTS as f64;
        }
        if degenerate {
            continue;
        }
        let ln2 = std::f64::consts::LN_2;
        let slope_a = (mean_logs[0] - mean_logs[1]) / ln2;
        let slope_b = (mean_logs[1] - mean_logs[2]) / ln2;
        last = (slope_a, slope_b);
        if (slope_a - slope_b).abs() <= 0.25 {
            let ls = least_squares_slope(&samples);
            if ls < 0.5 {
                return Ok(None);
            }
            let m = ls.round();
            if m < 1.0 {
                return Ok(None);
            }
            return Ok(Some(m as u32));
        }
    }
    Err(Error::OrderEstimateUnstable {
        point: z_i,
        slope_a: last.0,
        slope_b: last.1,
    })
}

fn least_squares_slope(samples: &[(f64, f64)]) -> f64 {
    let n = samples.len() as f64;
    let mx = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let my = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in samples {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

/// Collision candidates from the per-subset difference products: for each
/// nonempty subset J of branch indices, the product over all sign patterns
/// of sum_{j in J} sigma_j c_j Z_{j-1} beta_j is a single polynomial whose
/// zeros are exactly the subset's collision points.
fn difference_product_candidates(
    fs: &StageFunctionSet,
    table: &BranchPointTable,
    cfg: &CollisionConfig,
) -> Vec<Complex64> {
    let n = fs.n;
    let mut all = Vec::new();
    for subset in 1u32..(1 << n) {
        let members: Vec<usize> = (0..n).filter(|j| subset >> j & 1 == 1).collect();
        if members.len() < 2 {
            // Singleton {j}: the difference 2 c_j Z_{j-1} beta_j vanishes only
            // at branch points and at earlier collision zeros, both already
            // covered by the exclusion list and the smaller subsets.
            continue;
        }
        let jmax = members.iter().max().unwrap() + 1; // 1-indexed
        let deg = (1usize << members.len()) * (fs.z_polys[jmax - 1].degree() + jmax - 1)
            + (1usize << (members.len() - 1));
        let f = |z: Complex64| -> Scaled {
            let terms = fs.branch_terms(z, table);
            let mut prod = Scaled::one();
            let patterns = 1usize << members.len();
            for pat in 0..patterns {
                let mut sum = Scaled::zero();
                for (bit, &j) in members.iter().enumerate() {
                    let sign = if pat >> bit & 1 == 1 { -1.0 } else { 1.0 };
                    sum = sum.add(Scaled::new(terms[j] * sign));
                }
                prod = prod.mul(sum);
            }
            prod
        };
        let roots = analytic_roots(f, deg, 0.25, cfg.max_search_radius);
        all.extend(roots);
    }
    dedupe(all, 1e-5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branches::{cuts_for, enumerate_branch_points};

    /// Oracle for the stage-2 collision set: differences of g_2 vanish off
    /// branch points exactly where (z - a1)(z - a2) = (c1/c2)^2.
    fn stage2_oracle(a1: Complex64, a2: Complex64, c1: f64, c2: f64) -> Vec<Complex64> {
        // z^2 - (a1 + a2) z + a1 a2 - q = 0, q = (c1/c2)^2
        let q = (c1 / c2) * (c1 / c2);
        let b = -(a1 + a2);
        let c = a1 * a2 - q;
        let disc = (b * b - 4.0 * c).sqrt();
        vec![(-b + disc) / 2.0, (-b - disc) / 2.0]
    }

    fn p2_for(table: &BranchPointTable, c2: f64) -> BiPoly {
        // p1 = w^2 - (z - a1); R1 = (z-a1)^2 (z-a2); p2 = shift product.
        let a1 = table.point(1);
        let a2 = table.point(2);
        let p1 = BiPoly::new(vec![
            UniPoly::new(vec![a1, Complex64::new(-1.0, 0.0)]),
            UniPoly::zero(),
            UniPoly::one(),
        ]);
        let r1 = UniPoly::from_roots(&[(a1, 2), (a2, 1)]);
        crate::algebra::shift_product(&p1, c2, &r1).unwrap()
    }

    #[test]
    fn stage2_collision_points_match_oracle() {
        let table = enumerate_branch_points(2);
        let c2 = 0.04;
        let fs = StageFunctionSet::new(
            2,
            vec![1.0, c2],
            vec![Vec::new(), Vec::new()],
            cuts_for(&table, 2),
        );
        let p2 = p2_for(&table, c2);
        let (z2, set) = compute_z(2, &fs, &p2, &table, &CollisionConfig::default()).unwrap();
        let oracle = stage2_oracle(table.point(1), table.point(2), 1.0, c2);
        assert_eq!(set.points.len(), 2, "points: {:?}", set.points);
        for o in &oracle {
            let best = set
                .points
                .iter()
                .map(|p| (p - o).norm())
                .fold(f64::MAX, f64::min);
            assert!(best < 1e-4 * (1.0 + o.norm()), "missing {o}, err {best:.2e}");
        }
        assert!(set.orders.iter().all(|&m| m == 1));
        assert_eq!(z2.degree(), 2);
        // Branch points are never roots of Z_2.
        for j in 1..=2 {
            assert!(z2.eval(table.point(j)).norm() > 1e-6 * z2.max_coeff_norm());
        }
    }

    #[test]
    fn difference_route_agrees_with_discriminant_route() {
        let table = enumerate_branch_points(2);
        let c2 = 0.05;
        let fs = StageFunctionSet::new(
            2,
            vec![1.0, c2],
            vec![Vec::new(), Vec::new()],
            cuts_for(&table, 2),
        );
        let p2 = p2_for(&table, c2);
        let via_disc = compute_z(2, &fs, &p2, &table, &CollisionConfig::default())
            .unwrap()
            .1;
        let via_diff = compute_z(
            2,
            &fs,
            &p2,
            &table,
            &CollisionConfig {
                disc_degree_limit: 0,
                ..Default::default()
            },
        )
        .unwrap()
        .1;
        assert_eq!(via_disc.points.len(), via_diff.points.len());
        for (p, q) in via_disc.points.iter().zip(&via_diff.points) {
            assert!((p - q).norm() < 1e-4 * (1.0 + p.norm()));
        }
        assert_eq!(via_disc.orders, via_diff.orders);
    }
}
