//! The recursive construction: stage data, grid configuration, selector
//! pipeline, and sampled verification of the defining inequality system.

pub mod fibereval;
pub mod grid;
pub mod selectors;
pub mod verify;

use num_complex::Complex64;

use crate::algebra::{BiPoly, Scaled, UniPoly};
use crate::branches::{cuts_for, BranchPointTable, StageFunctionSet};
use crate::error::{Error, Result};

/// Construction mode: the classical configuration (no collision pinching,
/// 1/10 constant ladder) or the modified one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Wermer,
    Modified,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Wermer => "wermer",
            Mode::Modified => "modified",
        }
    }

    pub fn parse(s: &str) -> Result<Mode> {
        match s {
            "wermer" => Ok(Mode::Wermer),
            "modified" => Ok(Mode::Modified),
            other => Err(Error::Parse(format!("unknown mode '{other}'"))),
        }
    }
}

/// Hard ceiling on the stage count: degree doubling and discriminant growth
/// make deeper stages unreliable in double precision.
pub const HARD_STAGE_CAP: usize = 6;

/// Grid densities, safety margin, and caps for every sampled check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    /// Samples per unit length in the z-plane.
    pub z_density: f64,
    /// Samples per unit length for fiber (w) sampling.
    pub w_density: f64,
    /// Relative safety factor in (0,1): selectors enforce predicates at this
    /// fraction of their true thresholds so verification retains slack.
    pub margin: f64,
    pub max_stage: usize,
    pub seed: u64,
    /// Root clustering tolerance (the integerization point for
    /// multiplicities).
    pub cluster_tol: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            z_density: 32.0,
            w_density: 32.0,
            margin: 0.5,
            max_stage: 5,
            seed: 0,
            cluster_tol: 1e-7,
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.margin > 0.0 && self.margin <= 0.5) {
            return Err(Error::InvariantViolation {
                name: "MARGIN_RANGE",
                detail: format!("margin {} outside (0, 1/2]", self.margin),
            });
        }
        if self.z_density < 1.0 || self.w_density < 1.0 {
            return Err(Error::InvariantViolation {
                name: "GRID_DENSITY",
                detail: "densities must be at least 1 per unit".into(),
            });
        }
        if self.max_stage > HARD_STAGE_CAP {
            return Err(Error::InvariantViolation {
                name: "STAGE_CAP",
                detail: format!("max_stage {} exceeds hard cap {HARD_STAGE_CAP}", self.max_stage),
            });
        }
        Ok(())
    }
}

/// One rung of the recursion.
#[derive(Debug, Clone)]
pub struct Stage {
    pub n: usize,
    pub c_n: f64,
    /// Natural log of eps_n. Deep-stage epsilons underflow f64, so the log
    /// is the primary representation everywhere.
    pub ln_eps: f64,
    pub m_n: u64,
    /// Leading w-coefficient of p_n (the normalization constant).
    pub delta: f64,
    pub ln_delta: f64,
    /// Bidisk half-height rho_{n+1}.
    pub rho_np1: f64,
    pub p: BiPoly,
    /// Collision polynomial Z_n (identically 1 until the next stage is
    /// built, and always 1 in wermer mode or at stage 1).
    pub z_poly: UniPoly,
    pub z_factored: Vec<(Complex64, u32)>,
}

impl Stage {
    pub fn eps(&self) -> f64 {
        self.ln_eps.exp()
    }

    pub fn deg_w(&self) -> usize {
        self.p.deg_w()
    }
}

/// Identifier of a verified inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Predicate {
    P1,
    P2,
    C1,
    C2,
    Xxx,
    Es4,
    Es1,
    Es11,
    Lev1,
}

impl Predicate {
    pub fn as_str(&self) -> &'static str {
        match self {
            Predicate::P1 => "P1",
            Predicate::P2 => "P2",
            Predicate::C1 => "C1",
            Predicate::C2 => "C2",
            Predicate::Xxx => "XXX",
            Predicate::Es4 => "ES4",
            Predicate::Es1 => "ES1",
            Predicate::Es11 => "ES11",
            Predicate::Lev1 => "LEV1",
        }
    }

    pub fn parse(s: &str) -> Result<Predicate> {
        Ok(match s {
            "P1" => Predicate::P1,
            "P2" => Predicate::P2,
            "C1" => Predicate::C1,
            "C2" => Predicate::C2,
            "XXX" => Predicate::Xxx,
            "ES4" => Predicate::Es4,
            "ES1" => Predicate::Es1,
            "ES11" => Predicate::Es11,
            "LEV1" => Predicate::Lev1,
            other => return Err(Error::Parse(format!("unknown predicate '{other}'"))),
        })
    }

    pub const ALL: [Predicate; 9] = [
        Predicate::P1,
        Predicate::P2,
        Predicate::C1,
        Predicate::C2,
        Predicate::Xxx,
        Predicate::Es4,
        Predicate::Es1,
        Predicate::Es11,
        Predicate::Lev1,
    ];
}

/// Outcome of one predicate check on one stage. Margin units depend on the
/// predicate (absolute modulus gap, log-modulus gap, or distance slack);
/// `pass` is `worst_margin >= 0` in all cases.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    /// Stage the report belongs to; 0 for construction-global predicates.
    pub stage: usize,
    pub predicate: Predicate,
    pub worst_margin: f64,
    pub worst_point: (Complex64, Complex64),
    pub pass: bool,
}

/// Branch-point table, ordered stages, mode, and verification reports.
#[derive(Debug, Clone)]
pub struct Construction {
    pub mode: Mode,
    pub table: BranchPointTable,
    pub stages: Vec<Stage>,
    pub reports: Vec<VerificationReport>,
    pub config: GridConfig,
}

impl Construction {
    pub fn stage_count(&self) -> usize {
        self.stages.len()
    }

    /// Stage N (1-indexed).
    pub fn stage(&self, n: usize) -> &Stage {
        &self.stages[n - 1]
    }

    pub fn all_reports_pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }

    /// Branch-evaluation context for stage k: constants c_1..c_k and the
    /// collision polynomials Z_0..Z_{k-1}.
    pub fn function_set(&self, k: usize) -> StageFunctionSet {
        assert!(k >= 1 && k <= self.stages.len());
        let constants = (1..=k).map(|j| self.stage(j).c_n).collect();
        // Z_0 = Z_1 = 1; Z_j for j >= 2 lives on stage j.
        let mut z_factored: Vec<Vec<(Complex64, u32)>> = vec![Vec::new()];
        for j in 1..k {
            z_factored.push(self.stage(j).z_factored.clone());
        }
        StageFunctionSet::new(k, constants, z_factored, cuts_for(&self.table, k))
    }

    /// c_{k+1} Z_k(z) prod_{l<=k}(z - a_l): the polynomial part of the root
    /// shift applied when passing from stage k to stage k+1.
    pub fn shift_polynomial_part(&self, k: usize, z: Complex64) -> Scaled {
        shift_polynomial_part(
            self.stage(k + 1).c_n,
            &self.stage(k).z_factored,
            &self.table,
            k,
            z,
        )
    }

    /// All 2^n roots of p_n(z, .) by recursive radical splitting; exact up
    /// to rounding at every stage, unlike root extraction from the dense
    /// coefficients whose conditioning collapses once root clusters shrink
    /// below the coefficient noise floor.
    pub fn fiber_roots(&self, n: usize, z: Complex64) -> Vec<Complex64> {
        assert!(n >= 1 && n <= self.stages.len());
        let a1 = self.table.point(1);
        let c1 = self.stage(1).c_n;
        let base = (z - a1).sqrt() * c1;
        let mut roots = vec![base, -base];
        for k in 1..n {
            let shift = self.split_shift(k, z);
            let mut next = Vec::with_capacity(roots.len() * 2);
            for r in &roots {
                next.push(r + shift);
                next.push(r - shift);
            }
            roots = next;
        }
        roots
    }

    /// The full shift c_{k+1} Z_k(z) B_{k+1}(z) under the principal branch
    /// of the adjoined square root.
    pub fn split_shift(&self, k: usize, z: Complex64) -> Complex64 {
        let poly_part = self.shift_polynomial_part(k, z);
        let radical = (z - self.table.point(k + 1)).sqrt();
        poly_part.mul_value(radical).value()
    }

    /// ln |p_n(z, w)| through the factored form; `roots` must be
    /// `fiber_roots(n, z)`.
    pub fn ln_abs_p_at(&self, n: usize, w: Complex64, roots: &[Complex64]) -> f64 {
        self.stage(n).ln_delta + fibereval::ln_abs_prod(roots, w)
    }

    /// Convenience wrapper computing the fiber first.
    pub fn ln_abs_p(&self, n: usize, z: Complex64, w: Complex64) -> f64 {
        let roots = self.fiber_roots(n, z);
        self.ln_abs_p_at(n, w, &roots)
    }

    /// Structural invariants of the stage ladder; violated names mirror the
    /// serialization checks.
    pub fn check_invariants(&self) -> Result<()> {
        for (i, st) in self.stages.iter().enumerate() {
            let n = i + 1;
            if st.n != n {
                return Err(Error::InvariantViolation {
                    name: "STAGE_ORDER",
                    detail: format!("stage record {n} labeled {}", st.n),
                });
            }
            if st.deg_w() != 1 << n {
                return Err(Error::InvariantViolation {
                    name: "DEG_DOUBLING",
                    detail: format!("deg_w(p_{n}) = {} != 2^{n}", st.deg_w()),
                });
            }
            if !(st.c_n > 0.0) {
                return Err(Error::InvariantViolation {
                    name: "C_POSITIVE",
                    detail: format!("c_{n} = {}", st.c_n),
                });
            }
            if i > 0 {
                let prev = &self.stages[i - 1];
                if !(st.ln_eps < prev.ln_eps) {
                    return Err(Error::InvariantViolation {
                        name: "EPS_MONOTONE",
                        detail: format!(
                            "ln eps_{} = {} not below ln eps_{} = {}",
                            n,
                            st.ln_eps,
                            n - 1,
                            prev.ln_eps
                        ),
                    });
                }
                if !(st.rho_np1 > prev.rho_np1 + 1.0) {
                    return Err(Error::InvariantViolation {
                        name: "RHO_GAPS",
                        detail: format!(
                            "rho_{} = {} not above rho_{} + 1 = {}",
                            n + 1,
                            st.rho_np1,
                            n,
                            prev.rho_np1 + 1.0
                        ),
                    });
                }
                if self.mode == Mode::Wermer && st.c_n > prev.c_n / 10.0 + 1e-18 {
                    return Err(Error::InvariantViolation {
                        name: "WERMER_C_LADDER",
                        detail: format!("c_{n} = {} exceeds c_{}/10", st.c_n, n - 1),
                    });
                }
            } else if self.mode == Mode::Wermer && (st.c_n - 0.1).abs() > 1e-15 {
                return Err(Error::InvariantViolation {
                    name: "WERMER_C1",
                    detail: format!("c_1 = {} != 1/10", st.c_n),
                });
            }
        }
        Ok(())
    }
}

/// Free-standing shift polynomial part, usable before the next stage exists
/// (during the c-selection search).
pub fn shift_polynomial_part(
    c_next: f64,
    z_factored: &[(Complex64, u32)],
    table: &BranchPointTable,
    k: usize,
    z: Complex64,
) -> Scaled {
    let mut acc = Scaled::new(Complex64::new(c_next, 0.0));
    for &(root, mult) in z_factored {
        let f = Scaled::new(z - root);
        for _ in 0..mult {
            acc = acc.mul(f);
        }
    }
    for l in 1..=k {
        acc = acc.mul_value(z - table.point(l));
    }
    acc
}
