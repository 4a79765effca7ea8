//! Stage selectors: each constant of the recursion is chosen against its
//! defining inequalities on sampled grids, with dyadic search ladders from
//! analytic caps. Selection enforces every predicate at `margin` times its
//! true threshold so the denser verification grids keep positive margins.

use num_complex::Complex64;

use super::fibereval::{
    circle_sample_count, circle_samples, dist_to_roots, ln_abs_prod, sublevel_samples,
};
use super::grid::{disk_grid, par_max_over, par_min_over, Worst};
use super::verify::{lev1_report, verify_stage};
use super::{shift_polynomial_part, Construction, GridConfig, Mode, Stage, HARD_STAGE_CAP};
use crate::algebra::{shift_product, BiPoly, UniPoly};
use crate::branches::collision::{compute_z, CollisionConfig};
use crate::branches::{enumerate_branch_points, BranchPointTable};
use crate::error::{Error, Result};

const RAYS_PER_ROOT: usize = 12;

/// Stage 1: p_1 = w^2 - c_1^2 (z - a_1) with c_1 = 1 (modified) or 1/10
/// (wermer, where the fiber is the scaled branch pair). eps_1 is the
/// largest dyadic value keeping every sublevel point within distance 1 of
/// a root over the first cylinder window, and rho_2 boxes the sublevel set
/// into the first bidisk.
pub fn init_stage1(mode: Mode, table: &BranchPointTable, cfg: &GridConfig) -> Result<Stage> {
    if table.len() < 2 {
        return Err(Error::Degenerate("table needs at least 2 points".into()));
    }
    let c1 = match mode {
        Mode::Modified => 1.0,
        Mode::Wermer => 0.1,
    };
    let a1 = table.point(1);
    // w^2 - c1^2 (z - a1)
    let p1 = BiPoly::new(vec![
        UniPoly::new(vec![a1 * (c1 * c1), Complex64::new(-c1 * c1, 0.0)]),
        UniPoly::zero(),
        UniPoly::one(),
    ]);

    let grid = disk_grid(2.0, cfg.z_density);
    let fiber = |z: Complex64| {
        let b = (z - a1).sqrt() * c1;
        vec![b, -b]
    };

    let mut ln_eps = f64::NAN;
    let mut found = false;
    for t in 0..=60 {
        let cand = -(t as f64) * std::f64::consts::LN_2;
        let worst = par_max_over(&grid, |z| {
            let roots = fiber(z);
            let samples = sublevel_samples(&roots, 0.0, cand, RAYS_PER_ROOT, 8.0);
            let mut w = Worst::none_max();
            for s in &samples {
                let d = dist_to_roots(&roots, s.w);
                if d > w.value {
                    w = Worst { value: d, z, w: s.w };
                }
            }
            w
        });
        if worst.value <= cfg.margin {
            ln_eps = cand;
            found = true;
            break;
        }
    }
    if !found {
        return Err(Error::SearchExhausted {
            what: "eps_1",
            steps: 60,
        });
    }

    let extent = par_max_over(&grid, |z| {
        let roots = fiber(z);
        let samples = sublevel_samples(&roots, 0.0, ln_eps, RAYS_PER_ROOT, 8.0);
        let mut w = Worst::none_max();
        for s in &samples {
            let m = s.w.norm();
            if m > w.value {
                w = Worst { value: m, z, w: s.w };
            }
        }
        w
    });
    let rho2 = extent.value + 1.0;

    Ok(Stage {
        n: 1,
        c_n: c1,
        ln_eps,
        m_n: 1,
        delta: 1.0,
        ln_delta: 0.0,
        rho_np1: rho2,
        p: p1,
        z_poly: UniPoly::one(),
        z_factored: Vec::new(),
    })
}

/// Outcome of the c-selection search, with the analytic caps exposed.
#[derive(Debug, Clone, Copy)]
pub struct CSelection {
    /// (c_n/10) inf |Z_{n-1} B_n| / |Z_n B_{n+1}|, before margin scaling.
    pub cap_c2: f64,
    /// inf of min-branch-gap / (2 |Z_n B_{n+1}|), before margin scaling.
    pub cap_xxx: f64,
    pub chosen: f64,
    pub halvings: u32,
}

/// ln |Z B| factors used by the c-selection ratios.
fn ln_zb(
    cons: &Construction,
    z_factored: &[(Complex64, u32)],
    upto: usize, // product over l < upto of (z - a_l), radical at a_upto
    z: Complex64,
) -> f64 {
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

/// Select c_{n+1}: start from margin times the analytic caps given by the
/// constant-ladder inequality and the branch-separation inequality, then
/// halve until the new surface stays inside the half sublevel set of p_n on
/// the selection grid.
pub fn select_c(cons: &Construction) -> Result<CSelection> {
    let n = cons.stage_count();
    let cfg = &cons.config;
    let stage_n = cons.stage(n);
    let grid = disk_grid((n + 1) as f64, cfg.z_density);
    let fs = cons.function_set(n);
    let zf_n: &[(Complex64, u32)] = &stage_n.z_factored;
    let zf_prev: &[(Complex64, u32)] = if n >= 2 {
        &cons.stage(n - 1).z_factored
    } else {
        &[]
    };

    // cap from (c2): c <= (c_n/10) inf |Z_{n-1} B_n| / |Z_n B_{n+1}|
    let ratio_c2 = par_min_over(&grid, |z| {
        let num = ln_zb(cons, zf_prev, n, z);
        let den = ln_zb(cons, zf_n, n + 1, z);
        let v = if num.is_finite() && den.is_finite() {
            (num - den).exp()
        } else {
            f64::INFINITY
        };
        Worst { value: v, z, w: Complex64::new(0.0, 0.0) }
    });
    let cap_c2 = stage_n.c_n / 10.0 * ratio_c2.value;

    // cap from (XXX): 2c |Z_n B_{n+1}| <= min-gap of the stage-n branches.
    let cap_xxx = if cons.mode == Mode::Wermer {
        f64::INFINITY
    } else {
        let r = par_min_over(&grid, |z| {
            let den = ln_zb(cons, zf_n, n + 1, z);
            let gap = fs.min_branch_gap(z, &cons.table);
            let v = if den.is_finite() && gap > 0.0 {
                gap * (-den).exp() / 2.0
            } else {
                f64::INFINITY
            };
            Worst { value: v, z, w: Complex64::new(0.0, 0.0) }
        });
        r.value
    };

    let mut c = cfg.margin * cap_c2.min(cap_xxx);
    if cons.mode == Mode::Wermer {
        c = c.min(stage_n.c_n / 10.0);
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::Degenerate(format!(
            "c-selection cap degenerate: {c}"
        )));
    }

    // (c1): every new root must sit strictly inside {|p_n| < eps_n / 2}.
    let threshold = stage_n.ln_eps - std::f64::consts::LN_2 + cfg.margin.ln();
    for halvings in 0..60 {
        let worst = par_max_over(&grid, |z| {
            let roots = cons.fiber_roots(n, z);
            let shift = shift_polynomial_part(c, zf_n, &cons.table, n, z)
                .mul_value((z - cons.table.point(n + 1)).sqrt())
                .value();
            let mut w = Worst::none_max();
            for r in &roots {
                for sgn in [1.0, -1.0] {
                    let cand = r + shift * sgn;
                    let v = stage_n.ln_delta + ln_abs_prod(&roots, cand);
                    if v > w.value {
                        w = Worst { value: v, z, w: cand };
                    }
                }
            }
            w
        });
        if worst.value <= threshold {
            return Ok(CSelection {
                cap_c2,
                cap_xxx,
                chosen: c,
                halvings,
            });
        }
        c /= 2.0;
    }
    Err(Error::SearchExhausted {
        what: "c_{n+1}",
        steps: 60,
    })
}

/// Select rho_{n+2}: the stage-n sublevel set over the next window, plus
/// the known shift bound for the incoming roots, must fit the bidisk, and
/// the ladder must keep gaps above 1.
pub fn select_rho(cons: &Construction, c_next: f64) -> f64 {
    let n = cons.stage_count();
    let cfg = &cons.config;
    let stage_n = cons.stage(n);
    let grid = disk_grid((n + 2) as f64, cfg.z_density);
    let zf_n: &[(Complex64, u32)] = &stage_n.z_factored;
    let extent = par_max_over(&grid, |z| {
        let roots = cons.fiber_roots(n, z);
        let samples = sublevel_samples(
            &roots,
            stage_n.ln_delta,
            stage_n.ln_eps,
            RAYS_PER_ROOT,
            stage_n.rho_np1 + 4.0,
        );
        let shift = shift_polynomial_part(c_next, zf_n, &cons.table, n, z)
            .mul_value((z - cons.table.point(n + 1)).sqrt())
            .value()
            .norm();
        let mut w = Worst::none_max();
        for s in &samples {
            let m = s.w.norm() + shift;
            if m > w.value {
                w = Worst { value: m, z, w: s.w };
            }
        }
        w
    });
    (stage_n.rho_np1 + 1.0 + cfg.margin).max(extent.value + 1.0)
}

/// Roots of the incoming stage at z: every stage-n root split by the shift.
pub fn next_fiber_roots(cons: &Construction, c_next: f64, z: Complex64) -> Vec<Complex64> {
    let n = cons.stage_count();
    let shift = shift_polynomial_part(c_next, &cons.stage(n).z_factored, &cons.table, n, z)
        .mul_value((z - cons.table.point(n + 1)).sqrt())
        .value();
    let roots = cons.fiber_roots(n, z);
    let mut next = Vec::with_capacity(roots.len() * 2);
    for r in &roots {
        next.push(r + shift);
        next.push(r - shift);
    }
    next
}

/// Expand p_{n+1} = delta * p_c: the radical-adjoined product over the new
/// roots, normalized so |p_{n+1}| stays below the margin on the next
/// bidisk.
pub fn build_p_next(
    cons: &Construction,
    c_next: f64,
    rho_next2: f64,
) -> Result<(BiPoly, f64, f64)> {
    let n = cons.stage_count();
    let cfg = &cons.config;
    let stage_n = cons.stage(n);

    // R_n = Z_n^2 (z-a_1)^2 ... (z-a_n)^2 (z-a_{n+1})
    let mut r = stage_n.z_poly.mul(&stage_n.z_poly);
    for l in 1..=n {
        let lin = UniPoly::linear(cons.table.point(l));
        r = r.mul(&lin).mul(&lin);
    }
    r = r.mul(&UniPoly::linear(cons.table.point(n + 1)));

    let p_c = shift_product(&stage_n.p, c_next, &r)?;

    // sup |p_c| over the next bidisk via the maximum principle: per z the
    // sup over the w-disk is attained on the w-circle.
    let grid = disk_grid((n + 2) as f64, cfg.z_density);
    let count = circle_sample_count(rho_next2, cfg.w_density);
    let circle = circle_samples(rho_next2, count);
    let sup = par_max_over(&grid, |z| {
        let roots = next_fiber_roots(cons, c_next, z);
        let mut w = Worst::none_max();
        for cw in &circle {
            let v = ln_abs_prod(&roots, *cw);
            if v > w.value {
                w = Worst { value: v, z, w: *cw };
            }
        }
        w
    });
    let ln_delta = cfg.margin.ln() - sup.value;
    let delta = ln_delta.exp();
    if !(delta > 0.0) {
        return Err(Error::Degenerate(format!(
            "delta underflows f64 (ln delta = {ln_delta:.1}); stage {} is beyond double precision",
            n + 1
        )));
    }
    Ok((p_c.scale(Complex64::new(delta, 0.0)), delta, ln_delta))
}

/// Smallest m with (1/m) ln |p_{n+1}| >= -2^{-n} on the sampled exterior of
/// the previous sublevel set inside the current bidisk. The sweep runs at
/// verification density: m is defined by the same grid that later verifies
/// it, so the ES4 margin cannot go negative and the ceiling keeps it
/// strictly positive.
pub fn select_m(cons: &Construction, c_next: f64, ln_delta_next: f64) -> Result<u64> {
    let n = cons.stage_count();
    let cfg = &cons.config;
    let grid_probe = disk_grid((n + 1) as f64, cfg.z_density);
    if grid_probe.is_empty() {
        return Err(Error::EmptyExterior { stage: n + 1 });
    }
    let worst = super::verify::exterior_worst(cons, n, 2.0 * cfg.z_density, ln_delta_next, |z| {
        next_fiber_roots(cons, c_next, z)
    });
    if !worst.value.is_finite() {
        return Err(Error::Degenerate(
            "exterior minimum of |p_{n+1}| degenerate".into(),
        ));
    }
    let needed = (1u64 << n) as f64 * worst.value.max(0.0);
    Ok((needed.ceil() as u64).max(1))
}

/// Largest eps_{n+1} = eps_n 2^{-t} (t >= 1) satisfying the log-bound cap,
/// the sublevel nesting, and the root-proximity requirement on the sampled
/// grids.
pub fn select_eps(
    cons: &Construction,
    c_next: f64,
    ln_delta_next: f64,
    m_next: u64,
) -> Result<f64> {
    let n = cons.stage_count();
    let cfg = &cons.config;
    let stage_n = cons.stage(n);
    let ln2 = std::f64::consts::LN_2;
    // (es1) cap: eps_{n+1} <= e^{-m}.
    let t0 = (((m_next as f64) + stage_n.ln_eps) / ln2).ceil().max(1.0) as i64;
    let grid = disk_grid((n + 2) as f64, cfg.z_density);
    let proximity = 1.0 / n as f64;
    let inner = (n + 1) as f64;

    for step in 0..200 {
        let t = t0 + step;
        let ln_eps = stage_n.ln_eps - t as f64 * ln2;
        let worst = par_max_over(&grid, |z| {
            let new_roots = next_fiber_roots(cons, c_next, z);
            let samples = sublevel_samples(
                &new_roots,
                ln_delta_next,
                ln_eps,
                RAYS_PER_ROOT,
                2.0 * proximity,
            );
            let mut w = Worst::none_max();
            // (es11): sublevel samples near roots, normalized by the
            // proximity bound; (p2): nesting into the previous sublevel,
            // normalized to its own margin. Both must end below 1.
            for s in &samples {
                let d = dist_to_roots(&new_roots, s.w) / (cfg.margin * proximity);
                if d > w.value {
                    w = Worst { value: d, z, w: s.w };
                }
            }
            if z.norm() < inner {
                let prev_roots = cons.fiber_roots(n, z);
                for s in &samples {
                    let v = stage_n.ln_delta + ln_abs_prod(&prev_roots, s.w);
                    // <= ln(margin eps_n) required; map to a ratio vs 1.
                    let ratio = if v <= stage_n.ln_eps + cfg.margin.ln() {
                        0.0
                    } else {
                        2.0
                    };
                    if ratio > w.value {
                        w = Worst { value: ratio, z, w: s.w };
                    }
                }
            }
            w
        });
        if worst.value <= 1.0 {
            return Ok(ln_eps);
        }
    }
    Err(Error::SearchExhausted {
        what: "eps_{n+1}",
        steps: 200,
    })
}

/// Append stage n+1 by the full pipeline; the construction is left
/// unchanged on failure. New-stage reports (and the global ladder
/// diagnostic) are attached.
pub fn advance(cons: &Construction) -> Result<Construction> {
    let n = cons.stage_count();
    if n == 0 {
        return Err(Error::Degenerate("advance needs stage 1".into()));
    }
    let next = n + 1;
    if next > cons.config.max_stage || next > HARD_STAGE_CAP {
        return Err(Error::Usage(format!(
            "stage {next} exceeds the configured cap {}",
            cons.config.max_stage.min(HARD_STAGE_CAP)
        )));
    }
    if cons.table.len() < next {
        return Err(Error::Degenerate(format!(
            "branch point table too short for stage {next}"
        )));
    }

    let mut work = cons.clone();
    if work.mode == Mode::Modified && n >= 2 {
        let fs = work.function_set(n);
        let ccfg = CollisionConfig::default();
        let (z_poly, set) = compute_z(n, &fs, &work.stage(n).p, &work.table, &ccfg)?;
        let st = &mut work.stages[n - 1];
        st.z_poly = z_poly;
        st.z_factored = set.factored();
    }

    let sel = select_c(&work)?;
    let c_next = sel.chosen;
    let rho_next2 = select_rho(&work, c_next);
    let (p_next, delta, ln_delta) = build_p_next(&work, c_next, rho_next2)?;
    let m_next = select_m(&work, c_next, ln_delta)?;
    let ln_eps_next = select_eps(&work, c_next, ln_delta, m_next)?;

    work.stages.push(Stage {
        n: next,
        c_n: c_next,
        ln_eps: ln_eps_next,
        m_n: m_next,
        delta,
        ln_delta,
        rho_np1: rho_next2,
        p: p_next,
        z_poly: UniPoly::one(),
        z_factored: Vec::new(),
    });

    let new_reports = verify_stage(&work, next);
    work.reports.retain(|r| r.stage != next && r.stage != 0);
    work.reports.extend(new_reports);
    if let Some(lev1) = lev1_report(&work) {
        work.reports.push(lev1);
    }
    work.check_invariants()?;
    Ok(work)
}

/// Full build: stage 1 plus repeated advances, reports attached.
pub fn build_construction(mode: Mode, stages: usize, cfg: GridConfig) -> Result<Construction> {
    cfg.validate()?;
    if stages == 0 {
        return Err(Error::Usage("need at least one stage".into()));
    }
    if stages > cfg.max_stage || stages > HARD_STAGE_CAP {
        return Err(Error::Usage(format!(
            "stage count {stages} exceeds the cap {}",
            cfg.max_stage.min(HARD_STAGE_CAP)
        )));
    }
    let table = enumerate_branch_points(stages + 1);
    let stage1 = init_stage1(mode, &table, &cfg)?;
    let mut cons = Construction {
        mode,
        table,
        stages: vec![stage1],
        reports: Vec::new(),
        config: cfg,
    };
    cons.reports = verify_stage(&cons, 1);
    while cons.stage_count() < stages {
        cons = advance(&cons)?;
    }
    Ok(cons)
}
