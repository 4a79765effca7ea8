//! Branch points, branch cuts, single-valued branches of the adjoined
//! square roots, the 2^n sign-vector branches of the stage functions, and
//! numerical monodromy by path tracking.

pub mod collision;

use num_complex::Complex64;

use crate::algebra::{Scaled, UniPoly};
use crate::error::{Error, Result};

/// Exact rational with positive denominator in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational {
    pub num: i64,
    pub den: i64,
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()) as i64;
        let sign = if den < 0 { -1 } else { 1 };
        Rational {
            num: sign * num / g,
            den: den.abs() / g,
        }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Height: max(|numerator|, denominator).
    pub fn height(self) -> i64 {
        self.num.abs().max(self.den)
    }

    fn cmp_exact(self, other: Rational) -> std::cmp::Ordering {
        let lhs = self.num as i128 * other.den as i128;
        let rhs = other.num as i128 * self.den as i128;
        lhs.cmp(&rhs)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a.max(1), b);
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Ordered branch points: Gaussian rationals enumerated by height and
/// stably reordered so |a_k| < k, prefix-stable in the count.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchPointTable {
    pub exact: Vec<(Rational, Rational)>,
    pub points: Vec<Complex64>,
}

impl BranchPointTable {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// 1-indexed branch point a_k.
    pub fn point(&self, k: usize) -> Complex64 {
        self.points[k - 1]
    }
}

/// All Gaussian rationals of pair-height exactly `h`, sorted exactly by
/// (re, im).
fn height_class(h: i64) -> Vec<(Rational, Rational)> {
    let mut fracs_le = Vec::new();
    for den in 1..=h {
        for num in -h..=h {
            let r = Rational::new(num, den);
            if r.num == num && r.den == den && r.height() <= h {
                fracs_le.push(r);
            }
        }
    }
    fracs_le.sort_by(|a, b| a.cmp_exact(*b));
    fracs_le.dedup();
    let mut out = Vec::new();
    for &re in &fracs_le {
        for &im in &fracs_le {
            if re.height().max(im.height()) == h {
                out.push((re, im));
            }
        }
    }
    out.sort_by(|a, b| a.0.cmp_exact(b.0).then(a.1.cmp_exact(b.1)));
    out
}

/// Exact test |re + i im|^2 < k^2.
fn modulus_below(re: Rational, im: Rational, k: i64) -> bool {
    let re2 = (re.num as i128 * re.num as i128, re.den as i128 * re.den as i128);
    let im2 = (im.num as i128 * im.num as i128, im.den as i128 * im.den as i128);
    // re2 + im2 < k^2  <=>  re2n*im2d + im2n*re2d < k^2 * re2d * im2d
    let lhs = re2.0 * im2.1 + im2.0 * re2.1;
    let rhs = (k as i128) * (k as i128) * re2.1 * im2.1;
    lhs < rhs
}

/// Enumerate the branch point table: Gaussian rationals by height, greedily
/// reordered so that |a_k| < k. Extending `count` never changes earlier
/// entries.
pub fn enumerate_branch_points(count: usize) -> BranchPointTable {
    let mut pool: Vec<(Rational, Rational)> = Vec::new();
    let mut next_height: i64 = 1;
    let mut exact = Vec::with_capacity(count);
    for k in 1..=count as i64 {
        loop {
            if let Some(pos) = pool.iter().position(|&(re, im)| modulus_below(re, im, k)) {
                exact.push(pool.remove(pos));
                break;
            }
            pool.extend(height_class(next_height));
            next_height += 1;
        }
    }
    let points = exact
        .iter()
        .map(|&(re, im)| Complex64::new(re.to_f64(), im.to_f64()))
        .collect();
    BranchPointTable { exact, points }
}

/// A branch cut: the ray {base + t*direction, t >= 0}, the discontinuity
/// locus of exactly one chosen square-root branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cut {
    pub base: Complex64,
    pub theta: f64,
}

impl Cut {
    pub fn direction(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.theta)
    }

    /// Distance from a point to the cut ray.
    pub fn distance(&self, z: Complex64) -> f64 {
        let v = (z - self.base) * Complex64::from_polar(1.0, -self.theta);
        if v.re >= 0.0 {
            v.im.abs()
        } else {
            v.norm()
        }
    }
}

/// Cut direction schedule: golden-ratio angles keep the rays off the
/// rational lattice of branch points.
pub fn cut_angle(j: usize) -> f64 {
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    let frac = (j as f64 * golden).fract();
    2.0 * std::f64::consts::PI * frac
}

pub fn cuts_for(table: &BranchPointTable, n: usize) -> Vec<Cut> {
    (1..=n)
        .map(|j| Cut {
            base: table.point(j),
            theta: cut_angle(j),
        })
        .collect()
}

/// Square root branch whose discontinuity ray has direction angle `theta`
/// from the origin; the value on the cut is the counterclockwise-side limit.
pub fn sqrt_cut(w: Complex64, theta: f64) -> Complex64 {
    if w.norm_sqr() == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let phi = w.arg();
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut d = (phi - theta) % two_pi;
    if d < 0.0 {
        d += two_pi;
    }
    Complex64::from_polar(w.norm().sqrt(), (theta + d) / 2.0)
}

/// Length-n sign vector labeling one branch h_s of the 2^n-valued stage
/// function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignVector {
    pub signs: Vec<i8>,
}

impl SignVector {
    pub fn new(signs: Vec<i8>) -> Self {
        assert!(signs.iter().all(|&s| s == 1 || s == -1));
        SignVector { signs }
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    /// Branch index <-> bitmask: bit j set means sign j is -1.
    pub fn from_index(index: usize, n: usize) -> Self {
        SignVector {
            signs: (0..n)
                .map(|j| if index >> j & 1 == 1 { -1 } else { 1 })
                .collect(),
        }
    }

    pub fn index(&self) -> usize {
        self.signs
            .iter()
            .enumerate()
            .map(|(j, &s)| if s == -1 { 1 << j } else { 0 })
            .sum()
    }

    pub fn flipped(&self, j: usize) -> SignVector {
        let mut signs = self.signs.clone();
        signs[j] = -signs[j];
        SignVector { signs }
    }
}

/// Branch-evaluation context for one stage: the constants, the collision
/// polynomials (Z_0 = Z_1 = 1), and the cuts.
#[derive(Debug, Clone)]
pub struct StageFunctionSet {
    pub n: usize,
    /// c_1..c_n
    pub constants: Vec<f64>,
    /// Z_0..Z_{n-1} as dense polynomials.
    pub z_polys: Vec<UniPoly>,
    /// Factored forms (roots with multiplicities); empty for the constant 1.
    pub z_factored: Vec<Vec<(Complex64, u32)>>,
    pub cuts: Vec<Cut>,
}

impl StageFunctionSet {
    pub fn new(n: usize, constants: Vec<f64>, z_factored: Vec<Vec<(Complex64, u32)>>, cuts: Vec<Cut>) -> Self {
        assert_eq!(constants.len(), n);
        assert_eq!(z_factored.len(), n);
        assert_eq!(cuts.len(), n);
        let z_polys = z_factored.iter().map(|f| UniPoly::from_roots(f)).collect();
        StageFunctionSet {
            n,
            constants,
            z_polys,
            z_factored,
            cuts,
        }
    }

    /// Z_k evaluated stably from its factored form.
    pub fn z_eval(&self, k: usize, z: Complex64) -> Scaled {
        let mut acc = Scaled::one();
        for &(root, mult) in &self.z_factored[k] {
            let f = Scaled::new(z - root);
            for _ in 0..mult {
                acc = acc.mul(f);
            }
        }
        acc
    }

    /// The n per-index branch terms c_j Z_{j-1}(z) beta_j(z), j = 1..n.
    pub fn branch_terms(&self, z: Complex64, table: &BranchPointTable) -> Vec<Complex64> {
        let mut prefix = Scaled::one();
        let mut terms = Vec::with_capacity(self.n);
        for j in 1..=self.n {
            let aj = table.point(j);
            let sq = sqrt_cut(z - aj, self.cuts[j - 1].theta);
            let zj = self.z_eval(j - 1, z);
            let t = prefix
                .mul(zj)
                .mul_value(sq)
                .mul_value(Complex64::new(self.constants[j - 1], 0.0));
            terms.push(t.value());
            prefix = prefix.mul_value(z - aj);
        }
        terms
    }

    /// All 2^n branch values, indexed by sign bitmask.
    pub fn all_branch_values(&self, z: Complex64, table: &BranchPointTable) -> Vec<Complex64> {
        let terms = self.branch_terms(z, table);
        let count = 1usize << self.n;
        let mut out = Vec::with_capacity(count);
        for idx in 0..count {
            let mut v = Complex64::new(0.0, 0.0);
            for (j, t) in terms.iter().enumerate() {
                if idx >> j & 1 == 1 {
                    v -= t;
                } else {
                    v += t;
                }
            }
            out.push(v);
        }
        out
    }

    /// Minimum over distinct branch pairs of |h_s - h_t| at z.
    pub fn min_branch_gap(&self, z: Complex64, table: &BranchPointTable) -> f64 {
        let vals = self.all_branch_values(z, table);
        let mut best = f64::MAX;
        for i in 0..vals.len() {
            for j in (i + 1)..vals.len() {
                let d = (vals[i] - vals[j]).norm();
                if d < best {
                    best = d;
                }
            }
        }
        best
    }
}

/// The chosen single-valued branch beta_j(z): the polynomial prefix times
/// the square root cut along ray j. On the cut the value is the
/// counterclockwise-side limit.
pub fn beta_eval(j: usize, z: Complex64, table: &BranchPointTable, cuts: &[Cut]) -> Complex64 {
    let mut prefix = Complex64::new(1.0, 0.0);
    for l in 1..j {
        prefix *= z - table.point(l);
    }
    prefix * sqrt_cut(z - table.point(j), cuts[j - 1].theta)
}

/// One branch of the stage function: h_s(z) = sum_j s_j c_j Z_{j-1}(z) beta_j(z).
pub fn branch_eval(
    s: &SignVector,
    z: Complex64,
    fs: &StageFunctionSet,
    table: &BranchPointTable,
) -> Complex64 {
    assert_eq!(s.len(), fs.n, "sign vector length must equal the stage index");
    let terms = fs.branch_terms(z, table);
    let mut v = Complex64::new(0.0, 0.0);
    for (j, t) in terms.iter().enumerate() {
        v += t * s.signs[j] as f64;
    }
    v
}

/// Analytic continuation of h_s once counterclockwise around the circle:
/// returns h_{s'} with s'_j = -s_j exactly when a_j is enclosed.
///
/// The branch is a sum of n two-valued terms c_j Z_{j-1} beta_j, and the
/// continuation is tracked per term: each term's sign ambiguity is resolved
/// against a gap of 2|t_j|, so 720 steps suffice even when different
/// branches of the full sum are separated by far less than one step's
/// motion. The continued branch value is the tracked sum throughout.
pub fn monodromy(
    loop_center: Complex64,
    loop_radius: f64,
    s: &SignVector,
    fs: &StageFunctionSet,
    table: &BranchPointTable,
) -> Result<SignVector> {
    if s.len() != fs.n {
        return Err(Error::Degenerate(
            "sign vector length must equal the stage index".into(),
        ));
    }
    let tol = 1e-9 + 1e-6 * loop_radius;
    for j in 1..=fs.n {
        let d = (table.point(j) - loop_center).norm();
        if (d - loop_radius).abs() <= tol {
            return Err(Error::BranchPointOnLoop { index: j });
        }
    }
    const STEPS: usize = 720;
    let start = loop_center + Complex64::new(loop_radius, 0.0);
    let mut sigma: Vec<f64> = s.signs.iter().map(|&x| x as f64).collect();
    let mut tracked: Vec<Complex64> = fs
        .branch_terms(start, table)
        .iter()
        .zip(&sigma)
        .map(|(t, sg)| t * *sg)
        .collect();
    for m in 1..=STEPS {
        let theta = 2.0 * std::f64::consts::PI * m as f64 / STEPS as f64;
        let z = loop_center + Complex64::from_polar(loop_radius, theta);
        let terms = fs.branch_terms(z, table);
        for j in 0..fs.n {
            let mag = terms[j].norm();
            if mag < 1e-290 {
                return Err(Error::Degenerate(format!(
                    "branch term {} vanishes on the loop at step {m}",
                    j + 1
                )));
            }
            let keep = terms[j] * sigma[j];
            let d_keep = (keep - tracked[j]).norm();
            let d_flip = (-keep - tracked[j]).norm();
            let step_motion = d_keep.min(d_flip);
            if step_motion > 0.9 * mag {
                return Err(Error::Degenerate(format!(
                    "monodromy tracking ambiguous for term {} at step {m}: motion {step_motion:.3e} vs magnitude {mag:.3e}",
                    j + 1
                )));
            }
            if d_flip < d_keep {
                sigma[j] = -sigma[j];
                tracked[j] = -keep;
            } else {
                tracked[j] = keep;
            }
        }
    }
    Ok(SignVector::new(sigma.iter().map(|&x| x as i8).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn trivial_fs(n: usize, constants: Vec<f64>, table: &BranchPointTable) -> StageFunctionSet {
        StageFunctionSet::new(n, constants, vec![Vec::new(); n], cuts_for(table, n))
    }

    #[test]
    fn first_branch_point_is_origin() {
        let t = enumerate_branch_points(1);
        assert_eq!(t.points[0], c(0.0, 0.0));
    }

    #[test]
    fn early_points_obey_height_order() {
        let t = enumerate_branch_points(3);
        // a_2, a_3 are height-1 points inside their disks.
        for (k, p) in t.points.iter().enumerate() {
            assert!(p.norm() < (k + 1) as f64);
        }
        assert!(t.exact[1].0.height().max(t.exact[1].1.height()) <= 1);
        assert!(t.exact[2].0.height().max(t.exact[2].1.height()) <= 1);
    }

    #[test]
    fn modulus_bound_holds_for_fifty() {
        let t = enumerate_branch_points(50);
        for (k, p) in t.points.iter().enumerate() {
            assert!(p.norm() < (k + 1) as f64, "a_{} = {p}", k + 1);
        }
        // Pairwise distinct.
        for i in 0..50 {
            for j in (i + 1)..50 {
                assert_ne!(t.exact[i], t.exact[j]);
            }
        }
    }

    #[test]
    fn prefix_stability() {
        let t10 = enumerate_branch_points(10);
        let t50 = enumerate_branch_points(50);
        assert_eq!(&t50.exact[..10], &t10.exact[..]);
    }

    #[test]
    fn sqrt_cut_squares_back() {
        for k in 0..40 {
            let w = Complex64::from_polar(0.3 + 0.2 * k as f64, 0.37 * k as f64);
            for j in 1..=4 {
                let s = sqrt_cut(w, cut_angle(j));
                assert!((s * s - w).norm() < 1e-12 * (1.0 + w.norm()));
            }
        }
    }

    #[test]
    fn beta_one_squares_to_shifted_coordinate() {
        let table = enumerate_branch_points(2);
        let cuts = cuts_for(&table, 2);
        // j=1, a1=0, z=4 off the cut: one of +/-2.
        let b = beta_eval(1, c(4.0, 0.0), &table, &cuts);
        assert!((b * b - c(4.0, 0.0)).norm() < 1e-12);
        assert!((b.norm() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn beta_modulus_identity() {
        let table = enumerate_branch_points(3);
        let cuts = cuts_for(&table, 3);
        for k in 0..100 {
            let z = Complex64::from_polar(0.1 + 0.025 * k as f64, 1.7 * k as f64);
            let b2 = beta_eval(2, z, &table, &cuts);
            let expected = (z - table.point(1)).norm() * (z - table.point(2)).norm().sqrt();
            assert!(
                (b2.norm() - expected).abs() < 1e-10 * (1.0 + expected),
                "z = {z}"
            );
        }
    }

    #[test]
    fn beta_continuity_off_cut() {
        // Finite-difference sweep along a short segment away from cut 2.
        let table = enumerate_branch_points(2);
        let cuts = cuts_for(&table, 2);
        let a2 = table.point(2);
        let theta = cuts[1].theta;
        // Walk perpendicular to the cut direction at distance 1 from a2,
        // on the opposite side.
        let center = a2 - Complex64::from_polar(1.0, theta);
        let dir = Complex64::from_polar(1.0, theta + std::f64::consts::FRAC_PI_2);
        let step = 1e-4;
        let mut prev = beta_eval(2, center, &table, &cuts);
        for m in 1..=20 {
            let z = center + dir * (step * m as f64);
            let cur = beta_eval(2, z, &table, &cuts);
            assert!(
                (cur - prev).norm() < 50.0 * step,
                "jump of {:.3e} at step {m}",
                (cur - prev).norm()
            );
            prev = cur;
        }
    }

    #[test]
    fn branch_values_at_first_point_ignore_first_sign() {
        // h_s(a1) is independent of s_1: the j=1 term vanishes there.
        let table = enumerate_branch_points(2);
        let fs = trivial_fs(2, vec![1.0, 0.05], &table);
        let a1 = table.point(1);
        let s = SignVector::new(vec![1, 1]);
        let sf = SignVector::new(vec![-1, 1]);
        let v1 = branch_eval(&s, a1, &fs, &table);
        let v2 = branch_eval(&sf, a1, &fs, &table);
        assert!((v1 - v2).norm() < 1e-14);
    }

    #[test]
    fn single_branch_stage_one() {
        let table = enumerate_branch_points(1);
        let fs = trivial_fs(1, vec![1.0], &table);
        let v = branch_eval(&SignVector::new(vec![1]), c(4.0, 0.0), &fs, &table);
        assert!((v * v - c(4.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn monodromy_single_and_empty_loop() {
        let table = enumerate_branch_points(2);
        let fs = trivial_fs(2, vec![1.0, 0.05], &table);
        let s = SignVector::new(vec![1, 1]);
        // Loop enclosing only a1 = 0 flips exactly sign 1.
        let sep = (table.point(2) - table.point(1)).norm();
        let r = 0.3 * sep;
        let m1 = monodromy(table.point(1), r, &s, &fs, &table).unwrap();
        assert_eq!(m1.signs, vec![-1, 1]);
        // Loop enclosing nothing is the identity.
        let far = table.point(1) + c(0.5 * sep, 0.0);
        let m0 = monodromy(far, 0.05 * sep, &s, &fs, &table).unwrap();
        assert_eq!(m0.signs, s.signs);
    }

    #[test]
    fn monodromy_double_loop_is_identity() {
        let table = enumerate_branch_points(3);
        let fs = trivial_fs(3, vec![1.0, 0.05, 0.002], &table);
        let s = SignVector::new(vec![1, -1, 1]);
        let sep = (table.point(2) - table.point(1)).norm();
        let r = 0.3 * sep;
        let once = monodromy(table.point(1), r, &s, &fs, &table).unwrap();
        let twice = monodromy(table.point(1), r, &once, &fs, &table).unwrap();
        assert_eq!(twice.signs, s.signs);
    }

    #[test]
    fn monodromy_matches_value_level_oracle() {
        // Loop enclosing a1 and a2 at stage 3 flips signs 1 and 2. The
        // oracle continues the branch by nearest-value root tracking at a
        // step count fine enough for this benign configuration.
        let table = enumerate_branch_points(3);
        let fs = trivial_fs(3, vec![1.0, 0.05, 0.002], &table);
        let s = SignVector::new(vec![1, 1, -1]);
        let a1 = table.point(1);
        let a2 = table.point(2);
        let a3 = table.point(3);
        // a3 sits between a1 and a2; push the center away from it so the
        // circle encloses exactly {a1, a2}.
        let mid = (a1 + a2) / 2.0;
        let away = (mid - a3) / (mid - a3).norm();
        let center = mid + away;
        let r = 1.32;
        assert!((a1 - center).norm() < r - 0.05);
        assert!((a2 - center).norm() < r - 0.05);
        assert!((a3 - center).norm() > r + 0.3, "loop must exclude a3");

        let got = monodromy(center, r, &s, &fs, &table).unwrap();
        assert_eq!(got.signs, vec![-1, -1, -1]);

        let steps = 20000;
        let start = center + Complex64::new(r, 0.0);
        let mut v = branch_eval(&s, start, &fs, &table);
        for m in 1..=steps {
            let theta = 2.0 * std::f64::consts::PI * m as f64 / steps as f64;
            let z = center + Complex64::from_polar(r, theta);
            let values = fs.all_branch_values(z, &table);
            v = *values
                .iter()
                .min_by(|a, b| {
                    (*a - v).norm().partial_cmp(&(*b - v).norm()).unwrap()
                })
                .unwrap();
        }
        let end_values = fs.all_branch_values(start, &table);
        let (idx, dist) = end_values
            .iter()
            .enumerate()
            .map(|(i, x)| (i, (x - v).norm()))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        assert!(dist <= 1e-6);
        assert_eq!(SignVector::from_index(idx, 3).signs, got.signs);
    }

    #[test]
    fn monodromy_rejects_on_loop_branch_point() {
        let table = enumerate_branch_points(2);
        let fs = trivial_fs(2, vec![1.0, 0.05], &table);
        let s = SignVector::new(vec![1, 1]);
        let d = (table.point(2) - table.point(1)).norm();
        let err = monodromy(table.point(1), d, &s, &fs, &table);
        assert!(matches!(err, Err(Error::BranchPointOnLoop { index: 2 })));
    }

    #[test]
    fn global_sign_symmetry_of_gaps() {
        let table = enumerate_branch_points(3);
        let fs = trivial_fs(3, vec![1.0, 0.04, 0.001], &table);
        let z = c(0.7, -0.3);
        let vals = fs.all_branch_values(z, &table);
        let n = fs.n;
        for i in 0..vals.len() {
            for j in 0..vals.len() {
                if i == j {
                    continue;
                }
                let ni = !i & ((1 << n) - 1);
                let nj = !j & ((1 << n) - 1);
                let d1 = (vals[i] - vals[j]).norm();
                let d2 = (vals[ni] - vals[nj]).norm();
                assert!((d1 - d2).abs() < 1e-12 * (1.0 + d1));
            }
        }
    }
}
