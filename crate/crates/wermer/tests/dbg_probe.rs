// temporary debug probe
use num_complex::Complex64;
use wermer::construction::selectors::*;
use wermer::construction::{GridConfig, Mode};

#[test]
fn dbg_stage3() {
    let cfg = GridConfig { z_density: 8.0, w_density: 8.0, ..GridConfig::default() };
    let cons = build_construction(Mode::Modified, 2, cfg).unwrap();
    // replicate advance steps
    let mut work = cons.clone();
    let fs = work.function_set(2);
    let ccfg = wermer::branches::collision::CollisionConfig::default();
    let (zp, set) = wermer::branches::collision::compute_z(2, &fs, &work.stage(2).p, &work.table, &ccfg).unwrap();
    println!("Z2 roots: {:?} orders {:?}", set.points, set.orders);
    work.stages[1].z_poly = zp;
    work.stages[1].z_factored = set.factored();
    let sel = select_c(&work).unwrap();
    println!("c3 selection: {:?}", sel);
    let rho = select_rho(&work, sel.chosen);
    println!("rho_4 = {rho}");
    let (_p3, delta, ln_delta) = build_p_next(&work, sel.chosen, rho).unwrap();
    println!("delta3 = {delta:.3e} ln {ln_delta}");
    // manual exterior scan to find the degenerate point
    let worst = wermer::construction::verify::exterior_worst(&work, 2, 16.0, ln_delta, |z| {
        next_fiber_roots(&work, sel.chosen, z)
    });
    println!("worst = {:?}", worst);
    let z = worst.z; let w = worst.w;
    let nr = next_fiber_roots(&work, sel.chosen, z);
    println!("new roots at worst z: {:?}", nr);
    println!("witness w: {w}");
    let pr = work.fiber_roots(2, z);
    println!("prev roots: {:?}", pr);
}
