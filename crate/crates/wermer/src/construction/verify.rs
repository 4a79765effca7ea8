//! Predicate verification on grids denser than the selection grids.
//!
//! Margin conventions, per predicate (pass is `worst_margin >= 0`):
//!   P1    1e-8 minus the worst Hausdorff distance between the fiber root
//!         multiset and the branch-value multiset (distance units);
//!   P2    min of ln eps_{N-1} - ln |p_{N-1}| over stage-N sublevel samples
//!         (log-modulus units, strict inclusion);
//!   C1    min of ln(eps_{N-1}/2) - ln |p_{N-1}| over the stage-N surface;
//!   C2    min of (c_{N-1}/10)|Z_{N-2} B_{N-1}| - c_N |Z_{N-1} B_N|
//!         (absolute modulus units; approaches 0 at the equality loci);
//!   XLX   min of (min branch gap) - 2 c_N |Z_{N-1} B_N| (same units);
//!   ES4   min of (1/m_N) ln |p_N| + 2^{-(N-1)} over the sampled exterior;
//!   ES1   min of -1 - (1/m_N) ln |p_N| over sublevel boundary samples and
//!         the analytic cap;
//!   ES11  1/max(N-1,1) minus the worst distance from a sublevel sample to
//!         the root set (distance units);
//!   LEV1  minimal consecutive drop of eps_n^(1/2^n) (strictly decreasing
//!         ladder diagnostic).

use num_complex::Complex64;

use super::fibereval::{
    circle_sample_count, circle_samples, dist_to_roots, ln_abs_prod, sublevel_samples,
};
use super::grid::{disk_grid, par_max_over, par_min_over, Worst};
use super::{Construction, Mode, Predicate, VerificationReport};

const RAYS_PER_ROOT: usize = 12;
const P1_TOL: f64 = 1e-8;

/// Verification grids run at twice the selection density.
fn verify_density(cons: &Construction) -> f64 {
    2.0 * cons.config.z_density
}

/// Re-evaluate every predicate applicable to stage n on the verification
/// grid; failures are reported, not thrown.
pub fn verify_stage(cons: &Construction, n: usize) -> Vec<VerificationReport> {
    let mut out = Vec::new();
    out.push(check_p1(cons, n));
    out.push(check_es11(cons, n));
    if n >= 2 {
        out.push(check_p2(cons, n));
        out.push(check_c1(cons, n));
        out.push(check_c2(cons, n));
        if cons.mode == Mode::Modified {
            out.push(check_xxx(cons, n));
        }
        out.push(check_es4(cons, n));
        out.push(check_es1(cons, n));
    }
    out
}

fn report(
    stage: usize,
    predicate: Predicate,
    worst_margin: f64,
    worst_point: (Complex64, Complex64),
) -> VerificationReport {
    VerificationReport {
        stage,
        predicate,
        worst_margin,
        worst_point,
        pass: worst_margin >= 0.0,
    }
}

/// Two-sided Hausdorff distance between equal-size multisets.
fn hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let one = |xs: &[Complex64], ys: &[Complex64]| {
        xs.iter()
            .map(|x| ys.iter().map(|y| (x - y).norm()).fold(f64::MAX, f64::min))
            .fold(0.0f64, f64::max)
    };
    one(a, b).max(one(b, a))
}

/// P1: the zero set of p_n over the window matches the branch surface.
fn check_p1(cons: &Construction, n: usize) -> VerificationReport {
    let grid = disk_grid((n + 1) as f64, verify_density(cons));
    let fs = cons.function_set(n);
    let worst = par_max_over(&grid, |z| {
        let roots = cons.fiber_roots(n, z);
        let values = fs.all_branch_values(z, &cons.table);
        Worst {
            value: hausdorff(&roots, &values),
            z,
            w: Complex64::new(0.0, 0.0),
        }
    });
    report(n, Predicate::P1, P1_TOL - worst.value, (worst.z, worst.w))
}

/// ES11 (and the stage-1 proximity condition): every sublevel sample has a
/// root within 1/max(n-1, 1).
fn check_es11(cons: &Construction, n: usize) -> VerificationReport {
    let grid = disk_grid((n + 1) as f64, verify_density(cons));
    let st = cons.stage(n);
    let threshold = 1.0 / (n.max(2) - 1) as f64;
    let worst = par_max_over(&grid, |z| {
        let roots = cons.fiber_roots(n, z);
        let samples = sublevel_samples(&roots, st.ln_delta, st.ln_eps, RAYS_PER_ROOT, 2.0 * threshold);
        let mut w = Worst::none_max();
        for s in &samples {
            let d = dist_to_roots(&roots, s.w);
            if d > w.value {
                w = Worst { value: d, z, w: s.w };
            }
        }
        w
    });
    report(n, Predicate::Es11, threshold - worst.value, (worst.z, worst.w))
}

/// P2: the stage-n sublevel set nests strictly inside the previous one.
fn check_p2(cons: &Construction, n: usize) -> VerificationReport {
    let grid = disk_grid(n as f64, verify_density(cons));
    let st = cons.stage(n);
    let prev = cons.stage(n - 1);
    let worst = par_min_over(&grid, |z| {
        let roots = cons.fiber_roots(n, z);
        let prev_roots = cons.fiber_roots(n - 1, z);
        let samples = sublevel_samples(&roots, st.ln_delta, st.ln_eps, RAYS_PER_ROOT, 2.0);
        let mut w = Worst::none_min();
        for s in &samples {
            let v = prev.ln_eps - (prev.ln_delta + ln_abs_prod(&prev_roots, s.w));
            if v < w.value {
                w = Worst { value: v, z, w: s.w };
            }
        }
        w
    });
    report(n, Predicate::P2, worst.value, (worst.z, worst.w))
}

/// C1: the stage-n surface sits inside the half sublevel set of p_{n-1}.
fn check_c1(cons: &Construction, n: usize) -> VerificationReport {
    let grid = disk_grid(n as f64, verify_density(cons));
    let prev = cons.stage(n - 1);
    let threshold = prev.ln_eps - std::f64::consts::LN_2;
    let worst = par_min_over(&grid, |z| {
        let roots = cons.fiber_roots(n, z);
        let prev_roots = cons.fiber_roots(n - 1, z);
        let mut w = Worst::none_min();
        for r in &roots {
            let v = threshold - (prev.ln_delta + ln_abs_prod(&prev_roots, *r));
            if v < w.value {
                w = Worst { value: v, z, w: *r };
            }
        }
        w
    });
    report(n, Predicate::C1, worst.value, (worst.z, worst.w))
}

/// |Z_k B_{k+1}| in log form (k = upto - 1 indexes the Z factor).
fn ln_zb(cons: &Construction, z_factored: &[(Complex64, u32)], upto: usize, z: Complex64) -> f64 {
    let mut acc = crate::algebra::Scaled::one();
    for &(root, mult) in z_factored {
        let f = crate::algebra::Scaled::new(z - root);
        for _ in 0..mult {
            acc = acc.mul(f);
        }
    }
    for l in 1..upto {
        acc = acc.mul_value(z - cons.table.point(l));
    }
    acc.ln_abs() + 0.5 * (z - cons.table.point(upto)).norm().ln()
}

/// C2: the shift-term ladder decays by a factor 10 stage over stage.
fn check_c2(cons: &Construction, n: usize) -> VerificationReport {
    let grid = disk_grid(n as f64, verify_density(cons));
    let c_prev = cons.stage(n - 1).c_n;
    let c_cur = cons.stage(n).c_n;
    let zf_cur: &[(Complex64, u32)] = &cons.stage(n - 1).z_factored;
    let zf_prev: &[(Complex64, u32)] = if n >= 3 {
        &cons.stage(n - 2).z_factored
    } else {
        &[]
    };
    let worst = par_min_over(&grid, |z| {
        let lhs = c_prev / 10.0 * ln_zb(cons, zf_prev, n - 1, z).exp();
        let rhs = c_cur * ln_zb(cons, zf_cur, n, z).exp();
        Worst {
            value: lhs - rhs,
            z,
            w: Complex64::new(0.0, 0.0),
        }
    });
    report(n, Predicate::C2, worst.value, (worst.z, worst.w))
}

/// XXX: branch separation of the previous stage dominates twice the new
/// shift term; equality is approached exactly at the collision zeros and
/// branch points.
fn check_xxx(cons: &Construction, n: usize) -> VerificationReport {
    let grid = disk_grid(n as f64, verify_density(cons));
    let fs = cons.function_set(n - 1);
    let c_cur = cons.stage(n).c_n;
    let zf: &[(Complex64, u32)] = &cons.stage(n - 1).z_factored;
    let worst = par_min_over(&grid, |z| {
        let gap = fs.min_branch_gap(z, &cons.table);
        let rhs = 2.0 * c_cur * ln_zb(cons, zf, n, z).exp();
        Worst {
            value: gap - rhs,
            z,
            w: Complex64::new(0.0, 0.0),
        }
    });
    report(n, Predicate::Xxx, worst.value, (worst.z, worst.w))
}

/// Worst -ln |p_next| over the sampled exterior of the stage-`prev_n`
/// sublevel set inside its bidisk: the w-circle plus the boundary of the
/// previous sublevel tube (its roots standing in when the tube is
/// unrepresentably thin). Shared between m-selection and ES4 verification
/// so the chosen m is checked on the grid that defined it.
pub fn exterior_worst<F>(
    cons: &Construction,
    prev_n: usize,
    density: f64,
    ln_delta_next: f64,
    new_roots: F,
) -> Worst
where
    F: Fn(Complex64) -> Vec<Complex64> + Sync,
{
    let grid = disk_grid((prev_n + 1) as f64, density);
    let prev = cons.stage(prev_n);
    let rho = prev.rho_np1;
    let count = circle_sample_count(rho, cons.config.w_density);
    let circle = circle_samples(rho, count);
    par_max_over(&grid, |z| {
        let roots = new_roots(z);
        let prev_roots = cons.fiber_roots(prev_n, z);
        let mut w = Worst::none_max();
        let mut visit = |pt: Complex64| {
            let v = -(ln_delta_next + ln_abs_prod(&roots, pt));
            if v > w.value {
                w = Worst { value: v, z, w: pt };
            }
        };
        for cw in &circle {
            visit(*cw);
        }
        let samples = sublevel_samples(&prev_roots, prev.ln_delta, prev.ln_eps, RAYS_PER_ROOT, rho);
        for s in &samples {
            visit(s.w);
        }
        w
    })
}

/// ES4: (1/m_n) ln |p_n| stays above -2^{-(n-1)} outside the previous
/// sublevel set within the bidisk.
fn check_es4(cons: &Construction, n: usize) -> VerificationReport {
    let st = cons.stage(n);
    let worst = exterior_worst(cons, n - 1, verify_density(cons), st.ln_delta, |z| {
        cons.fiber_roots(n, z)
    });
    let margin = 2f64.powi(-(n as i32 - 1)) - worst.value / st.m_n as f64;
    report(n, Predicate::Es4, margin, (worst.z, worst.w))
}

/// ES1: (1/m_n) ln |p_n| <= -1 on the stage-n sublevel set; checked on the
/// boundary samples plus the analytic cap eps_n <= e^{-m_n}.
fn check_es1(cons: &Construction, n: usize) -> VerificationReport {
    let grid = disk_grid((n + 1) as f64, verify_density(cons));
    let st = cons.stage(n);
    let m = st.m_n as f64;
    let cap_margin = -1.0 - st.ln_eps / m;
    let worst = par_min_over(&grid, |z| {
        let roots = cons.fiber_roots(n, z);
        let samples = sublevel_samples(&roots, st.ln_delta, st.ln_eps, RAYS_PER_ROOT, 2.0);
        let mut w = Worst {
            value: cap_margin,
            z,
            w: Complex64::new(0.0, 0.0),
        };
        for s in samples.iter().filter(|s| s.offset > 0.0) {
            let v = -1.0 - (st.ln_delta + ln_abs_prod(&roots, s.w)) / m;
            if v < w.value {
                w = Worst { value: v, z, w: s.w };
            }
        }
        w
    });
    report(n, Predicate::Es1, worst.value, (worst.z, worst.w))
}

/// The epsilon-ladder diagnostic: eps_n^(1/2^n) strictly decreasing.
pub fn check_lev1(cons: &Construction) -> (Vec<f64>, bool) {
    let seq: Vec<f64> = cons
        .stages
        .iter()
        .map(|st| (st.ln_eps / (1u64 << st.n) as f64).exp())
        .collect();
    let decreasing = seq.windows(2).all(|w| w[1] < w[0]);
    (seq, decreasing)
}

pub fn lev1_report(cons: &Construction) -> Option<VerificationReport> {
    if cons.stage_count() < 2 {
        return None;
    }
    let (seq, _) = check_lev1(cons);
    let mut margin = f64::INFINITY;
    let mut at = 0;
    for (i, w) in seq.windows(2).enumerate() {
        let drop = w[0] - w[1];
        if drop < margin {
            margin = drop;
            at = i + 2;
        }
    }
    Some(VerificationReport {
        stage: 0,
        predicate: Predicate::Lev1,
        worst_margin: margin,
        worst_point: (Complex64::new(at as f64, 0.0), Complex64::new(0.0, 0.0)),
        pass: margin > 0.0,
    })
}
