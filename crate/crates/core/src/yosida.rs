//! Discrete Yosida regularization `J_m = (I - (1/m) D²)^{-1}` with
//! homogeneous Dirichlet data, and checks of its operator properties.

use crate::error::{Error, Result};
use crate::grid::{d2, gradient_norm_sqr, Field, Grid};
use crate::par::{self, Execution};
use crate::tridiag::{ThomasFactor, TridiagonalSystem};

/// Factorized resolvent for one grid and one regularization level `m`.
#[derive(Debug, Clone)]
pub struct YosidaOp {
    m: f64,
    grid: Grid,
    system: TridiagonalSystem<f64>,
    factor: ThomasFactor<f64>,
}

impl YosidaOp {
    pub fn new(grid: Grid, m: f64) -> Result<Self> {
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::InvalidParameter {
                name: "m",
                reason: format!("regularization level must be finite and positive, got {m}"),
            });
        }
        let s = 1.0 / (m * grid.h() * grid.h());
        let system = TridiagonalSystem::constant(grid.n(), -s, 1.0 + 2.0 * s, -s);
        let factor = system.factor()?;
        Ok(Self {
            m,
            grid,
            system,
            factor,
        })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// The banded matrix `I - (1/m) D²`.
    pub fn system(&self) -> &TridiagonalSystem<f64> {
        &self.system
    }

    /// Solve `(I - (1/m) D²) v = u`.
    pub fn apply(&self, u: &Field) -> Result<Field> {
        if *u.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(u.with_values(self.factor.solve(u.values())?))
    }
}

/// Outcome of the two difference bounds `||J_m phi - J_n phi||` and
/// `|(J_m phi - J_n phi, psi)|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DifferenceBoundReport {
    pub l2_lhs: f64,
    pub l2_rhs: f64,
    pub l2_holds: bool,
    pub pairing_lhs: f64,
    pub pairing_rhs: f64,
    pub pairing_holds: bool,
}

impl DifferenceBoundReport {
    pub fn holds(&self) -> bool {
        self.l2_holds && self.pairing_holds
    }
}

/// Relative slack allowed on both bounds.
pub const BOUND_SLACK: f64 = 1e-9;

pub fn check_difference_bounds(
    grid: Grid,
    m: f64,
    n: f64,
    phi: &Field,
    psi: &Field,
) -> Result<DifferenceBoundReport> {
    let jm = YosidaOp::new(grid, m)?;
    let jn = YosidaOp::new(grid, n)?;
    psi.ensure_same_grid(phi)?;
    let diff = jm.apply(phi)?.sub(&jn.apply(phi)?);
    let coeff = 1.0 / m + 1.0 / n;
    let l2_lhs = diff.l2_norm();
    let l2_rhs = coeff * d2(phi).l2_norm();
    let pairing_lhs = diff.inner(psi).norm();
    let pairing_rhs = coeff * gradient_norm_sqr(phi).sqrt() * gradient_norm_sqr(psi).sqrt();
    Ok(DifferenceBoundReport {
        l2_lhs,
        l2_rhs,
        l2_holds: l2_lhs <= l2_rhs * (1.0 + BOUND_SLACK),
        pairing_lhs,
        pairing_rhs,
        pairing_holds: pairing_lhs <= pairing_rhs * (1.0 + BOUND_SLACK),
    })
}

/// One named property and its worst (relative) violation; `<= 0` means
/// the property held everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyViolation {
    pub property: String,
    pub max_violation: f64,
}

fn excess(lhs: f64, rhs: f64) -> f64 {
    if rhs > 0.0 {
        (lhs - rhs) / rhs
    } else {
        lhs - rhs
    }
}

/// Operator-property battery over supplied test fields.
///
/// Each field is checked for every `m` in `levels`; the difference bounds
/// use the consecutive pairs in `pairs` with the next field as the test
/// function of the pairing estimate.
pub fn property_battery(
    grid: Grid,
    levels: &[f64],
    pairs: &[(f64, f64)],
    fields: &[Field],
    exec: Execution,
) -> Result<Vec<PropertyViolation>> {
    let ops: Vec<YosidaOp> = levels
        .iter()
        .map(|&m| YosidaOp::new(grid, m))
        .collect::<Result<_>>()?;
    let count = fields.len();
    let per_field: Vec<Result<[f64; 8]>> = par::map_range(exec, count, |i| {
        let f = &fields[i];
        let g = &fields[(i + 1) % count];
        let mut worst = [f64::NEG_INFINITY; 8];
        let denom = f.l2_norm() * g.l2_norm();
        for j in &ops {
            let jf = j.apply(f)?;
            let jg = j.apply(g)?;
            // self-adjointness
            let sa = (jf.inner(g) - f.inner(&jg)).norm() / denom;
            // L² and H¹-seminorm nonexpansiveness
            let l2 = excess(jf.l2_norm(), f.l2_norm());
            let h1 = excess(gradient_norm_sqr(&jf).sqrt(), gradient_norm_sqr(f).sqrt());
            // strong convergence bound and the exact smoothing identity
            let gap = jf.sub(f).l2_norm();
            let conv = excess(gap, d2(f).l2_norm() / j.m());
            let smooth = (d2(&jf).l2_norm() - j.m() * gap).abs() / (j.m() * gap).max(1e-300);
            // realness
            let real_f = f.map(|z| num_complex::Complex64::new(z.re, 0.0));
            let real = j
                .apply(&real_f)?
                .values()
                .iter()
                .map(|z| z.im.abs())
                .fold(0.0, f64::max);
            for (slot, val) in worst.iter_mut().zip([sa, l2, h1, conv, smooth, real]) {
                *slot = slot.max(val);
            }
        }
        for &(m, n) in pairs {
            let rep = check_difference_bounds(grid, m, n, f, g)?;
            worst[6] = worst[6].max(excess(rep.l2_lhs, rep.l2_rhs));
            worst[7] = worst[7].max(excess(rep.pairing_lhs, rep.pairing_rhs));
        }
        Ok(worst)
    });
    let mut totals = [f64::NEG_INFINITY; 8];
    for r in per_field {
        for (t, v) in totals.iter_mut().zip(r?) {
            *t = t.max(v);
        }
    }
    let names = [
        "self_adjointness",
        "l2_nonexpansive",
        "h1_seminorm_nonexpansive",
        "strong_convergence_bound",
        "smoothing_identity",
        "realness",
        "difference_bound_l2",
        "difference_bound_pairing",
    ];
    Ok(names
        .iter()
        .zip(totals)
        .map(|(name, v)| PropertyViolation {
            property: name.to_string(),
            max_violation: v,
        })
        .collect())
}
