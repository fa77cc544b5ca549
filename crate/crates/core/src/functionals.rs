//! Scalar functionals and norms: charge, energy and its regularized
//! variants, momentum, Sobolev and Lebesgue norms, space-time mixed norms
//! and the small-data threshold function.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{d1, d2, gradient_norm_sqr, Field};
use crate::par::{self, Execution};
use crate::yosida::YosidaOp;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Nonlinearity exponent `sigma > 0` in `|u|^{2 sigma}`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Sigma(f64);

/// Which well-posedness statement a given exponent falls under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaRegime {
    /// `0 < sigma < 1/2`: only weak solutions via regularization.
    Weak,
    /// `1/2 <= sigma < 1`: H² theory.
    Strong,
    /// `sigma >= 1`: H² and H¹ theory.
    Energy,
}

impl Sigma {
    pub fn new(sigma: f64) -> Result<Self> {
        if sigma.is_finite() && sigma > 0.0 {
            Ok(Self(sigma))
        } else {
            Err(Error::InvalidParameter {
                name: "sigma",
                reason: format!("must be a finite positive number, got {sigma}"),
            })
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn regime(self) -> SigmaRegime {
        if self.0 < 0.5 {
            SigmaRegime::Weak
        } else if self.0 < 1.0 {
            SigmaRegime::Strong
        } else {
            SigmaRegime::Energy
        }
    }

    /// `s^sigma` for `s = |u|² >= 0`, with cheap paths for the common exponents.
    #[inline]
    pub fn density(self, modulus_sqr: f64) -> f64 {
        if self.0 == 1.0 {
            modulus_sqr
        } else if self.0 == 0.5 {
            modulus_sqr.sqrt()
        } else if modulus_sqr == 0.0 {
            0.0
        } else {
            modulus_sqr.powf(self.0)
        }
    }
}

/// Charge `M(u) = int |u|²`.
pub fn mass(u: &Field) -> f64 {
    u.l2_norm_sqr()
}

/// Pointwise `i |u_j|^{2 sigma} (d1 u)_j`.
pub fn g_nonlinear(u: &Field, sigma: Sigma) -> Field {
    let du = d1(u);
    u.with_values(
        u.values()
            .iter()
            .zip(du.values())
            .map(|(z, dz)| I * sigma.density(z.norm_sqr()) * dz)
            .collect(),
    )
}

/// `G(u) = 1/(sigma+1) int Im(|u|^{2 sigma} conj(u) d1 u)`.
pub fn potential_g(u: &Field, sigma: Sigma) -> f64 {
    let du = d1(u);
    let samples: Vec<f64> = u
        .values()
        .iter()
        .zip(du.values())
        .map(|(z, dz)| sigma.density(z.norm_sqr()) * (z.conj() * dz).im)
        .collect();
    u.grid().integrate(&samples) / (sigma.value() + 1.0)
}

/// Exact gradient of the discrete [`potential_g`] with respect to the
/// discrete inner product: `G(u + v) - G(u) = 2 Re<grad, v> + o(v)`.
///
/// Consistent with `-i |u|^{2 sigma} d_x u`. Writing the central-difference
/// sum edge by edge, `G` equals `sum_k (rho_k + rho_{k+1}) Im(conj(u_k) u_{k+1})`
/// up to a constant, which is what gets differentiated here.
pub fn potential_gradient(u: &Field, sigma: Sigma) -> Field {
    let v = u.values();
    let n = v.len();
    let sv = sigma.value();
    let h = u.grid().h();
    let rho: Vec<f64> = v.iter().map(|z| sigma.density(z.norm_sqr())).collect();
    // edge k joins node k and k+1
    let edge_weight: Vec<f64> = (0..n - 1).map(|k| rho[k] + rho[k + 1]).collect();
    let edge_flux: Vec<f64> = (0..n - 1).map(|k| (v[k].conj() * v[k + 1]).im).collect();
    let scale = 1.0 / (2.0 * (sv + 1.0) * h);
    let zero = Complex64::new(0.0, 0.0);
    let grad = (0..n)
        .map(|j| {
            let right = if j + 1 < n { v[j + 1] * edge_weight[j] } else { zero };
            let left = if j > 0 { v[j - 1] * edge_weight[j - 1] } else { zero };
            let flux = if j > 0 { edge_flux[j - 1] } else { 0.0 }
                + if j + 1 < n { edge_flux[j] } else { 0.0 };
            let s = v[j].norm_sqr();
            let radial = if s > 0.0 {
                v[j] * (sv * s.powf(sv - 1.0) * flux)
            } else {
                zero
            };
            (-0.5 * I * (right - left) + radial) * scale
        })
        .collect();
    u.with_values(grad)
}

/// `E(u) = int |d_x u|² + G(u)`, gradient term in forward-difference form.
pub fn energy(u: &Field, sigma: Sigma) -> f64 {
    gradient_norm_sqr(u) + potential_g(u, sigma)
}

/// `E_m(u) = int |d_x u|² + G(J_m u)`.
pub fn approx_energy(u: &Field, sigma: Sigma, j: &YosidaOp) -> Result<f64> {
    let ju = j.apply(u)?;
    Ok(gradient_norm_sqr(u) + potential_g(&ju, sigma))
}

/// `int |u|^{2r}`.
pub fn density_moment(u: &Field, r: f64) -> f64 {
    let samples: Vec<f64> = u.values().iter().map(|z| z.norm_sqr().powf(r)).collect();
    u.grid().integrate(&samples)
}

/// `2 M(u) + 2 E_m(u) + int |u|^{4 sigma + 2}` together with the squared H¹
/// norm it dominates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalligraphicEnergy {
    pub value: f64,
    pub h1_sqr: f64,
}

impl CalligraphicEnergy {
    pub fn bounds_h1(&self) -> bool {
        self.h1_sqr <= self.value * (1.0 + 1e-12) + 1e-300
    }
}

pub fn calligraphic_energy(u: &Field, sigma: Sigma, j: &YosidaOp) -> Result<CalligraphicEnergy> {
    let em = approx_energy(u, sigma, j)?;
    let value = 2.0 * mass(u) + 2.0 * em + density_moment(u, 2.0 * sigma.value() + 1.0);
    let h1 = h1_norm(u);
    Ok(CalligraphicEnergy {
        value,
        h1_sqr: h1 * h1,
    })
}

/// `P(u) = Im int conj(u) d_x u`.
pub fn momentum(u: &Field) -> f64 {
    u.inner(&d1(u)).im
}

pub fn h1_norm(u: &Field) -> f64 {
    (mass(u) + gradient_norm_sqr(u)).sqrt()
}

pub fn h2_norm(u: &Field) -> f64 {
    (mass(u) + gradient_norm_sqr(u) + d2(u).l2_norm_sqr()).sqrt()
}

/// Squared Gagliardo seminorm `sum_{j != k} |f_j - f_k|² / |x_j - x_k|^{1+2r} h²`.
pub fn gagliardo_seminorm_sqr(f: &Field, r: f64, exec: Execution) -> f64 {
    let v = f.values();
    let n = v.len();
    let h = f.grid().h();
    let weights: Vec<f64> = (0..n)
        .map(|d| {
            if d == 0 {
                0.0
            } else {
                (d as f64 * h).powf(-(1.0 + 2.0 * r))
            }
        })
        .collect();
    let half = par::sum_range(exec, n, |j| {
        let fj = v[j];
        v[j + 1..]
            .iter()
            .zip(&weights[1..])
            .map(|(fk, w)| (fj - fk).norm_sqr() * w)
            .sum::<f64>()
    });
    2.0 * half * h * h
}

/// `||f||_{H^s}` for non-integer `s` in `(0, 2)`: integer part plus the
/// Gagliardo seminorm of the `floor(s)`-th derivative.
pub fn hs_fractional_norm(u: &Field, s: f64) -> Result<f64> {
    hs_fractional_norm_with(u, s, Execution::default())
}

pub fn hs_fractional_norm_with(u: &Field, s: f64, exec: Execution) -> Result<f64> {
    if !(s > 0.0 && s < 2.0) || s == 1.0 {
        return Err(Error::InvalidParameter {
            name: "s",
            reason: format!("fractional order must lie in (0, 2) and not be an integer, got {s}"),
        });
    }
    let (integer_sqr, top, r) = if s < 1.0 {
        (mass(u), u.clone(), s)
    } else {
        let h1 = h1_norm(u);
        (h1 * h1, d1(u), s - 1.0)
    };
    Ok((integer_sqr + gagliardo_seminorm_sqr(&top, r, exec)).sqrt())
}

/// Sobolev norm of order `s >= 0`: L² at 0, H¹/H² at the integers, the
/// fractional definition otherwise.
pub fn sobolev_norm(u: &Field, s: f64) -> Result<f64> {
    if s == 0.0 {
        Ok(u.l2_norm())
    } else if s == 1.0 {
        Ok(h1_norm(u))
    } else if s == 2.0 {
        Ok(h2_norm(u))
    } else {
        hs_fractional_norm(u, s)
    }
}

/// `(int |u|^p)^{1/p}`, or `max |u_j|` for `p = inf`.
pub fn lp_norm(u: &Field, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidParameter {
            name: "p",
            reason: format!("Lebesgue exponent must be >= 1, got {p}"),
        });
    }
    if p.is_infinite() {
        return Ok(u.max_abs());
    }
    if p == 2.0 {
        return Ok(u.l2_norm());
    }
    // factor out the sup norm so large p does not underflow
    let top = u.max_abs();
    if top == 0.0 {
        return Ok(0.0);
    }
    let samples: Vec<f64> = u.values().iter().map(|z| (z.norm() / top).powf(p)).collect();
    Ok(top * u.grid().integrate(&samples).powf(1.0 / p))
}

/// `||u||_{L^p} / (sqrt(p) ||u||_{H^{1/2}})`.
pub fn sqrt_p_ratio(u: &Field, p: f64) -> Result<f64> {
    if u.is_zero() {
        return Err(Error::ZeroField);
    }
    if p.is_nan() || p < 2.0 {
        return Err(Error::InvalidParameter {
            name: "p",
            reason: format!("exponent must be >= 2, got {p}"),
        });
    }
    Ok(lp_norm(u, p)? / (p.sqrt() * hs_fractional_norm(u, 0.5)?))
}

/// Strichartz-admissible exponents with `2/q = 1/2 - 1/r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissiblePair {
    q: f64,
    r: f64,
}

fn reciprocal(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        1.0 / x
    }
}

impl AdmissiblePair {
    pub fn new(q: f64, r: f64) -> Result<Self> {
        let ok_range = q >= 4.0 && r >= 2.0;
        let lhs = 2.0 * reciprocal(q);
        let rhs = 0.5 - reciprocal(r);
        if !ok_range || (lhs - rhs).abs() > 1e-14 {
            return Err(Error::InvalidParameter {
                name: "pair",
                reason: format!("(q, r) = ({q}, {r}) violates 2/q = 1/2 - 1/r"),
            });
        }
        Ok(Self { q, r })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// The finite family standing in for the supremum over all pairs.
    pub fn representative_set() -> [AdmissiblePair; 4] {
        [
            AdmissiblePair { q: f64::INFINITY, r: 2.0 },
            AdmissiblePair { q: 8.0, r: 4.0 },
            AdmissiblePair { q: 6.0, r: 6.0 },
            AdmissiblePair { q: 4.0, r: f64::INFINITY },
        ]
    }
}

/// `||u||_{L^q(I; L^r)}` over a uniformly sampled trajectory with spacing
/// `dt`, rectangle rule in time; with `derivative` the norm of `d1 u`.
pub fn mixed_norm(states: &[Field], dt: f64, pair: AdmissiblePair, derivative: bool) -> Result<f64> {
    if states.is_empty() {
        return Err(Error::TooFewObservations { needed: 1, got: 0 });
    }
    let spatial: Vec<f64> = states
        .iter()
        .map(|u| {
            if derivative {
                lp_norm(&d1(u), pair.r)
            } else {
                lp_norm(u, pair.r)
            }
        })
        .collect::<Result<_>>()?;
    if pair.q.is_infinite() {
        return Ok(spatial.iter().copied().fold(0.0, f64::max));
    }
    Ok((dt * spatial.iter().map(|x| x.powf(pair.q)).sum::<f64>()).powf(1.0 / pair.q))
}

/// The space-time norm `X(I)`: sup over the representative pairs of the
/// norm of `u` plus that of `d_x u`.
pub fn x_norm(states: &[Field], dt: f64) -> Result<f64> {
    let mut plain: f64 = 0.0;
    let mut deriv: f64 = 0.0;
    for pair in AdmissiblePair::representative_set() {
        plain = plain.max(mixed_norm(states, dt, pair, false)?);
        deriv = deriv.max(mixed_norm(states, dt, pair, true)?);
    }
    Ok(plain + deriv)
}

/// Embedding constant `c` and exponent `sigma` of the a-priori H¹ estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdParams {
    c: f64,
    sigma: f64,
}

impl ThresholdParams {
    pub fn new(c: f64, sigma: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParameter {
                name: "c",
                reason: format!("must be finite and positive, got {c}"),
            });
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidParameter {
                name: "sigma",
                reason: format!("must be finite and positive, got {sigma}"),
            });
        }
        Ok(Self { c, sigma })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Critical point of `f_sigma`: `delta^{2 sigma} = 1/c`.
    pub fn delta(&self) -> f64 {
        self.c.powf(-1.0 / (2.0 * self.sigma))
    }

    /// `f_sigma(x) = x² - c/(sigma+1) x^{2 sigma + 2}`.
    pub fn f_sigma(&self, x: f64) -> f64 {
        x * x - self.c / (self.sigma + 1.0) * x.powf(2.0 * self.sigma + 2.0)
    }

    /// `f_sigma(delta)`; equals `sigma / (sigma + 1) * delta²`.
    pub fn barrier(&self) -> f64 {
        self.f_sigma(self.delta())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn unit(n: usize) -> Grid {
        Grid::new(0.0, 1.0, n).unwrap()
    }

    fn sig(s: f64) -> Sigma {
        Sigma::new(s).unwrap()
    }

    fn twisted_sine(g: Grid) -> Field {
        Field::from_fn(g, |x| Complex64::from_polar((PI * x).sin(), x))
    }

    /// Composite Simpson on a fine mesh, closed-form integrand.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for i in 1..n {
            acc += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * h / 3.0
    }

    #[test]
    fn sigma_validation_and_regimes() {
        assert!(Sigma::new(0.0).is_err());
        assert!(Sigma::new(-1.0).is_err());
        assert!(Sigma::new(f64::NAN).is_err());
        assert_eq!(sig(0.25).regime(), SigmaRegime::Weak);
        assert_eq!(sig(0.5).regime(), SigmaRegime::Strong);
        assert_eq!(sig(2.0).regime(), SigmaRegime::Energy);
    }

    #[test]
    fn mass_closed_forms() {
        let g = unit(999);
        assert!((mass(&Field::sine_mode(g, 1)) - 0.5).abs() < 1e-5);
        assert_eq!(mass(&Field::zeros(g)), 0.0);
        let u = Field::from_fn(g, |x| Complex64::new(1.0, 1.0) * x * (1.0 - x));
        assert!((mass(&u) - 2.0 / 30.0).abs() < 1e-6);
    }

    #[test]
    fn g_is_imaginary_on_real_fields() {
        let g = unit(50);
        let u = Field::from_real_fn(g, |x| x * x * (1.0 - x));
        assert!(g_nonlinear(&u, sig(0.75)).values().iter().all(|z| z.re == 0.0));
        assert!(g_nonlinear(&Field::zeros(g), sig(1.0)).is_zero());
    }

    fn g_error(n: usize) -> f64 {
        let grid = unit(n);
        let gu = g_nonlinear(&Field::sine_mode(grid, 1), sig(1.0));
        grid.nodes()
            .zip(gu.values())
            .map(|(x, z)| (z.im - (PI * x).sin().powi(2) * PI * (PI * x).cos()).abs() + z.re.abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn g_converges_at_second_order() {
        let ratio = g_error(99) / g_error(199);
        assert!((ratio - 4.0).abs() < 0.3, "ratio {ratio}");
    }

    #[test]
    fn potential_vanishes_for_real_and_phase_rotated_real_fields() {
        let g = unit(200);
        let w = Field::from_real_fn(g, |x| (PI * x).sin() + 0.5 * (2.0 * PI * x).sin());
        assert_eq!(potential_g(&w, sig(1.0)), 0.0);
        let rotated = w.scale(Complex64::from_polar(1.0, 0.7));
        assert!(potential_g(&rotated, sig(1.5)).abs() < 1e-14);
    }

    #[test]
    fn potential_matches_fine_quadrature() {
        // u = sin(pi x) e^{ix}: Im(conj(u) u_x) = sin², |u|^{2 sigma} = sin^{2 sigma}
        for s in [0.5, 1.0, 2.0] {
            let exact = simpson(|x| (PI * x).sin().powf(2.0 * s + 2.0), 0.0, 1.0, 20_000) / (s + 1.0);
            let val = potential_g(&twisted_sine(unit(1999)), sig(s));
            assert!((val - exact).abs() < 1e-6, "sigma {s}: {val} vs {exact}");
        }
    }

    #[test]
    fn energy_closed_form_and_fine_quadrature() {
        let g = unit(999);
        let e = energy(&Field::sine_mode(g, 1), sig(1.0));
        assert!((e - PI * PI / 2.0).abs() < 1e-3);
        assert_eq!(energy(&Field::zeros(g), sig(1.0)), 0.0);
        // |u_x|² = pi² cos² + sin²
        let grad = simpson(|x| PI * PI * (PI * x).cos().powi(2) + (PI * x).sin().powi(2), 0.0, 1.0, 20_000);
        let pot = simpson(|x| (PI * x).sin().powi(4), 0.0, 1.0, 20_000) / 2.0;
        let e = energy(&twisted_sine(unit(1999)), sig(1.0));
        assert!((e - grad - pot).abs() < 1e-4, "{e} vs {}", grad + pot);
    }

    #[test]
    fn potential_gradient_matches_directional_derivatives() {
        let g = unit(40);
        let u = Field::from_fn(g, |x| {
            Complex64::new((PI * x).sin() + 0.3 * (3.0 * PI * x).sin(), 0.4 * (2.0 * PI * x).sin())
        });
        let v = Field::from_fn(g, |x| Complex64::new(x * (1.0 - x), (5.0 * x).cos() * x * (1.0 - x)));
        for s in [0.5, 0.75, 1.0, 2.0] {
            let sg = sig(s);
            let grad = potential_gradient(&u, sg);
            let predicted = 2.0 * grad.inner(&v).re;
            let eps = 1e-5;
            let plus = u.add(&v.scale(Complex64::new(eps, 0.0)));
            let minus = u.sub(&v.scale(Complex64::new(eps, 0.0)));
            let fd = (potential_g(&plus, sg) - potential_g(&minus, sg)) / (2.0 * eps);
            assert!((fd - predicted).abs() < 1e-7 * (1.0 + fd.abs()), "sigma {s}: {fd} vs {predicted}");
        }
    }

    #[test]
    fn potential_gradient_approximates_minus_g() {
        let err = |n: usize| {
            let grid = unit(n);
            let u = twisted_sine(grid);
            let grad = potential_gradient(&u, sig(1.0));
            let g = g_nonlinear(&u, sig(1.0));
            grad.add(&g).max_abs()
        };
        let ratio = err(199) / err(399);
        assert!(err(399) < 1e-3 && (ratio - 4.0).abs() < 0.5, "ratio {ratio}");
    }

    #[test]
    fn potential_gradient_is_orthogonal_to_rotation() {
        // <grad G, u> is real: the discrete flow conserves charge exactly
        let g = unit(64);
        let u = twisted_sine(g);
        for s in [0.5, 1.0, 1.7] {
            let z = potential_gradient(&u, sig(s)).inner(&u);
            assert!(z.im.abs() < 1e-14 * (1.0 + z.re.abs()));
        }
    }

    #[test]
    fn momentum_of_modulated_real_profile() {
        let g = unit(999);
        assert_eq!(momentum(&Field::sine_mode(g, 2)), 0.0);
        let c = 3.0;
        let u = Field::from_fn(g, |x| Complex64::from_polar((PI * x).sin(), c * x));
        let w = Field::sine_mode(g, 1);
        assert!((momentum(&u) - c * mass(&w)).abs() < 1e-4);
    }

    #[test]
    fn sobolev_norm_closed_forms() {
        let g = unit(999);
        let u = Field::sine_mode(g, 1);
        assert!((h1_norm(&u).powi(2) - (0.5 + PI * PI / 2.0)).abs() < 1e-3);
        assert!(h1_norm(&u) <= h2_norm(&u));
        assert_eq!(h1_norm(&Field::zeros(g)), 0.0);
        assert_eq!(h2_norm(&Field::zeros(g)), 0.0);
    }

    #[test]
    fn calligraphic_energy_closed_form() {
        let g = unit(999);
        let j = YosidaOp::new(g, 50.0).unwrap();
        let u = Field::sine_mode(g, 1);
        let ce = calligraphic_energy(&u, sig(0.5), &j).unwrap();
        assert!((ce.value - (1.0 + PI * PI + 0.375)).abs() < 1e-3);
        assert!(ce.bounds_h1());
        assert_eq!(calligraphic_energy(&Field::zeros(g), sig(0.5), &j).unwrap().value, 0.0);
    }

    #[test]
    fn approx_energy_rejects_foreign_grid_and_handles_real_data() {
        let g = unit(99);
        let j = YosidaOp::new(unit(98), 10.0).unwrap();
        let u = Field::sine_mode(g, 1);
        assert!(approx_energy(&u, sig(1.0), &j).is_err());
        let j = YosidaOp::new(g, 10.0).unwrap();
        assert!((approx_energy(&u, sig(1.0), &j).unwrap() - gradient_norm_sqr(&u)).abs() < 1e-14);
    }

    #[test]
    fn approx_energy_converges_like_one_over_m() {
        let g = unit(399);
        let u = twisted_sine(g);
        let e = energy(&u, sig(1.0));
        let err = |m: f64| (approx_energy(&u, sig(1.0), &YosidaOp::new(g, m).unwrap()).unwrap() - e).abs();
        let ratio = err(2000.0) / err(1000.0);
        assert!((ratio - 0.5).abs() < 0.02, "ratio {ratio}");
    }

    #[test]
    fn fractional_norm_properties() {
        let g = unit(200);
        assert_eq!(hs_fractional_norm(&Field::zeros(g), 0.5).unwrap(), 0.0);
        assert!(hs_fractional_norm(&Field::sine_mode(g, 1), 1.0).is_err());
        assert!(hs_fractional_norm(&Field::sine_mode(g, 1), 2.5).is_err());
        let u = twisted_sine(g);
        let alpha = Complex64::new(-2.0, 1.5);
        for s in [0.3, 0.5, 1.5] {
            let a = hs_fractional_norm(&u.scale(alpha), s).unwrap();
            let b = alpha.norm() * hs_fractional_norm(&u, s).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
        let seq = hs_fractional_norm_with(&u, 0.5, Execution::Sequential).unwrap();
        let par = hs_fractional_norm_with(&u, 0.5, Execution::Parallel).unwrap();
        assert_eq!(seq.to_bits(), par.to_bits());
    }

    #[test]
    fn half_norm_of_sine_stabilizes() {
        let at = |n| hs_fractional_norm(&Field::sine_mode(unit(n), 1), 0.5).unwrap();
        let (a, b) = (at(500), at(1001));
        assert!((b - a).abs() / a <= 0.05, "{a} vs {b}");
    }

    #[test]
    fn lp_norm_cases() {
        let g = unit(999);
        let u = twisted_sine(g);
        assert_relative_eq!(lp_norm(&u, 2.0).unwrap(), mass(&u).sqrt(), max_relative = 1e-12);
        let s = Field::sine_mode(g, 1);
        assert!((lp_norm(&s, 4.0).unwrap() - 0.375f64.powf(0.25)).abs() < 1e-4);
        assert_eq!(lp_norm(&Field::zeros(g), 3.0).unwrap(), 0.0);
        assert!(lp_norm(&s, 0.5).is_err());
        assert!((lp_norm(&s, f64::INFINITY).unwrap() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn sqrt_p_ratio_behaviour() {
        let g = unit(300);
        assert!(matches!(sqrt_p_ratio(&Field::zeros(g), 2.0), Err(Error::ZeroField)));
        let u = Field::sine_mode(g, 1);
        let r2 = sqrt_p_ratio(&u, 2.0).unwrap();
        assert!(r2 > 0.0 && r2 <= 1.0 / 2f64.sqrt());
        let scaled = sqrt_p_ratio(&u.scale(Complex64::new(7.0, 0.0)), 6.0).unwrap();
        assert_relative_eq!(scaled, sqrt_p_ratio(&u, 6.0).unwrap(), max_relative = 1e-12);
    }

    #[test]
    fn admissible_pairs() {
        for p in AdmissiblePair::representative_set() {
            assert!(AdmissiblePair::new(p.q(), p.r()).is_ok());
        }
        assert!(AdmissiblePair::new(4.0, 4.0).is_err());
        assert!(AdmissiblePair::new(2.0, f64::INFINITY).is_err());
    }

    #[test]
    fn mixed_norm_of_constant_trajectory() {
        let g = unit(200);
        let w = twisted_sine(g);
        let dt = 0.01;
        let states = vec![w.clone(); 100];
        let t = dt * states.len() as f64;
        let pair = AdmissiblePair::new(8.0, 4.0).unwrap();
        let expect = t.powf(1.0 / 8.0) * lp_norm(&w, 4.0).unwrap();
        assert_relative_eq!(mixed_norm(&states, dt, pair, false).unwrap(), expect, max_relative = 1e-12);
        let sup = AdmissiblePair::new(f64::INFINITY, 2.0).unwrap();
        assert_relative_eq!(mixed_norm(&states, dt, sup, false).unwrap(), w.l2_norm(), max_relative = 1e-14);
        assert_eq!(mixed_norm(&[Field::zeros(g)], dt, pair, true).unwrap(), 0.0);
        assert!(mixed_norm(&[], dt, pair, false).is_err());
        assert!(x_norm(&states, dt).unwrap() > 0.0);
    }

    #[test]
    fn threshold_closed_form() {
        let p = ThresholdParams::new(1.0, 1.0).unwrap();
        assert_eq!(p.delta(), 1.0);
        assert_eq!(p.f_sigma(1.0), 0.5);
        assert_eq!(p.f_sigma(0.0), 0.0);
        for (c, s) in [(0.3, 1.5), (2.0, 3.0), (7.0, 1.2)] {
            let p = ThresholdParams::new(c, s).unwrap();
            assert_relative_eq!(p.delta().powf(2.0 * s), 1.0 / c, max_relative = 1e-12);
        }
        assert!(ThresholdParams::new(0.0, 1.0).is_err());
    }

    #[test]
    fn f_sigma_rises_then_falls_at_delta() {
        for (c, s) in [(1.0, 1.0), (0.5, 2.0), (3.0, 1.5)] {
            let p = ThresholdParams::new(c, s).unwrap();
            let d = p.delta();
            let step = d / 2000.0;
            let mut x = 0.0;
            while x + step < d {
                assert!(p.f_sigma(x + step) > p.f_sigma(x));
                x += step;
            }
            for k in 1..50 {
                let x = d * (1.0 + k as f64 * 1e-3);
                assert!(p.f_sigma(x + step) < p.f_sigma(x));
            }
        }
    }
}
