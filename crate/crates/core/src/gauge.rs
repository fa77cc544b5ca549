//! Gauge transformation: the phase `Lambda = -(i/2) int_a^x |u|^{2 sigma}`,
//! the transformed field `v = u e^{Lambda}`, the gauged derivative
//! `w = e^{-Lambda} u_x`, the source terms `Q1`, `Q2`, and residuals of the
//! transformed equations along a trajectory.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::evolution::Trajectory;
use crate::functionals::Sigma;
use crate::grid::{d1, d2, Field};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Samples of the purely imaginary phase `Lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugePhase {
    values: Vec<Complex64>,
}

impl GaugePhase {
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `e^{-Lambda_j}`.
    pub fn inverse_factor(&self) -> Vec<Complex64> {
        self.values.iter().map(|l| Complex64::cis(-l.im)).collect()
    }

    /// `e^{Lambda_j}`.
    pub fn factor(&self) -> Vec<Complex64> {
        self.values.iter().map(|l| Complex64::cis(l.im)).collect()
    }
}

pub fn lambda_phase(u: &Field, sigma: Sigma) -> GaugePhase {
    let density: Vec<f64> = u.values().iter().map(|z| sigma.density(z.norm_sqr())).collect();
    let running = u.grid().cumulative_integral(&density);
    GaugePhase {
        values: running.into_iter().map(|r| Complex64::new(0.0, -0.5 * r)).collect(),
    }
}

/// `v = u e^{Lambda}` with `sigma = 1`.
pub fn gauge_transform(u: &Field) -> Field {
    let phase = lambda_phase(u, Sigma::new(1.0).expect("1 is a valid exponent"));
    multiply(u, &phase.factor())
}

/// `w = e^{-Lambda} d1 u`.
pub fn gauged_derivative(u: &Field, sigma: Sigma) -> Field {
    multiply(&d1(u), &lambda_phase(u, sigma).inverse_factor())
}

fn multiply(u: &Field, factor: &[Complex64]) -> Field {
    u.with_values(u.values().iter().zip(factor).map(|(a, b)| a * b).collect())
}

/// `|u|^{2 sigma - 2} conj(u)`, evaluated as `|u|^{2 sigma - 1} conj(u)/|u|`
/// and set to zero where `u` vanishes.
fn weighted_conj(z: Complex64, sigma: Sigma) -> Complex64 {
    let r = z.norm();
    if r == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    z.conj() * (r.powf(2.0 * sigma.value() - 1.0) / r)
}

fn ensure_gauge_range(sigma: Sigma) -> Result<()> {
    if sigma.value() < 0.5 {
        return Err(Error::OutOfRegime(format!(
            "gauge source terms need sigma >= 1/2, got {}",
            sigma.value()
        )));
    }
    Ok(())
}

/// `Q1 = -(i/2) (|u|^{2 sigma})_x u_x + sigma Im(|u|^{2 sigma - 2} conj(u) u_x) u_x`.
pub fn q1(u: &Field, sigma: Sigma) -> Result<Field> {
    ensure_gauge_range(sigma)?;
    let du = d1(u);
    let rho = u.map(|z| Complex64::new(sigma.density(z.norm_sqr()), 0.0));
    let drho = d1(&rho);
    let s = sigma.value();
    Ok(u.with_values(
        u.values()
            .iter()
            .zip(du.values())
            .zip(drho.values())
            .map(|((&z, &dz), &dr)| {
                -0.5 * I * dr * dz + s * (weighted_conj(z, sigma) * dz).im * dz
            })
            .collect(),
    ))
}

/// `Q2 = -sigma [int_a^x Im((|u|^{2 sigma - 2} conj(u))_x u_x)] u_x`.
pub fn q2(u: &Field, sigma: Sigma) -> Result<Field> {
    ensure_gauge_range(sigma)?;
    let du = d1(u);
    let f = u.map(|z| weighted_conj(z, sigma));
    let df = d1(&f);
    let integrand: Vec<f64> = df
        .values()
        .iter()
        .zip(du.values())
        .map(|(a, b)| (a * b).im)
        .collect();
    let running = u.grid().cumulative_integral(&integrand);
    let s = sigma.value();
    Ok(u.with_values(
        du.values()
            .iter()
            .zip(running)
            .map(|(&dz, r)| -s * r * dz)
            .collect(),
    ))
}

/// `D² w` for the gauged derivative, with the ghost values beyond each end
/// taken from the odd reflection of `u` about the boundary point. Unlike
/// `u`, `w` does not vanish at the boundary, so zero extension is wrong.
fn gauged_laplacian(w: &Field, u: &Field, phase: &GaugePhase) -> Field {
    let h = u.grid().h();
    let n = u.len();
    let uv = u.values();
    let left = uv[0] / h;
    let right = -uv[n - 1] / h * Complex64::cis(-phase.values()[n - 1].im);
    let wv = w.values();
    let inv = 1.0 / (h * h);
    w.with_values(
        (0..n)
            .map(|j| {
                let before = if j == 0 { left } else { wv[j - 1] };
                let after = if j + 1 == n { right } else { wv[j + 1] };
                (before - 2.0 * wv[j] + after) * inv
            })
            .collect(),
    )
}

fn ensure_observations(traj: &Trajectory) -> Result<()> {
    if traj.len() < 3 {
        return Err(Error::TooFewObservations {
            needed: 3,
            got: traj.len(),
        });
    }
    Ok(())
}

/// L² norms of `i v_t + D² v + i d1(|v|² v)` at interior observations,
/// with `v` the gauge transform of each state and `v_t` by centered
/// differences over the observation spacing.
pub fn dnls_residual(traj: &Trajectory) -> Result<Vec<f64>> {
    ensure_observations(traj)?;
    let v: Vec<Field> = traj.states.iter().map(gauge_transform).collect();
    let inv = 1.0 / (2.0 * traj.spacing);
    Ok((1..v.len() - 1)
        .map(|k| {
            let dt_v = v[k + 1].sub(&v[k - 1]).scale(I * inv);
            let cubic = v[k].map(|z| z * z.norm_sqr());
            dt_v.add(&d2(&v[k])).add(&d1(&cubic).scale(I)).l2_norm()
        })
        .collect())
}

/// L² norms of `i w_t + D² w - e^{-Lambda}(Q1 + Q2)` at interior
/// observations, for `w = e^{-Lambda} u_x`.
pub fn gauged_residual(traj: &Trajectory, sigma: Sigma) -> Result<Vec<f64>> {
    ensure_gauge_range(sigma)?;
    ensure_observations(traj)?;
    let w: Vec<Field> = traj.states.iter().map(|u| gauged_derivative(u, sigma)).collect();
    let inv = 1.0 / (2.0 * traj.spacing);
    let mut out = Vec::with_capacity(w.len() - 2);
    for k in 1..w.len() - 1 {
        let u = &traj.states[k];
        let phase = lambda_phase(u, sigma);
        let source = q1(u, sigma)?.add(&q2(u, sigma)?);
        let source = multiply(&source, &phase.inverse_factor());
        let dt_w = w[k + 1].sub(&w[k - 1]).scale(I * inv);
        let lap = gauged_laplacian(&w[k], u, &phase);
        out.push(dt_w.add(&lap).sub(&source).l2_norm());
    }
    Ok(out)
}
