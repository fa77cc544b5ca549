//! Uniform Dirichlet mesh, grid functions and the finite-difference stencils
//! built on them.
//!
//! A [`Field`] stores the `n` interior samples only. Every stencil and every
//! quadrature treats the two boundary nodes `x_0 = a` and `x_{n+1} = b` as
//! zero, so the homogeneous Dirichlet condition is structural.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Uniform mesh of `n` interior nodes on `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    a: f64,
    b: f64,
    n: usize,
    h: f64,
}

impl Grid {
    pub const MIN_NODES: usize = 4;

    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "endpoints must be finite, got ({a}, {b})"
            )));
        }
        if b <= a {
            return Err(Error::InvalidGrid(format!(
                "right endpoint {b} must exceed left endpoint {a}"
            )));
        }
        if n < Self::MIN_NODES {
            return Err(Error::InvalidGrid(format!(
                "need at least {} interior nodes, got {n}",
                Self::MIN_NODES
            )));
        }
        Ok(Self {
            a,
            b,
            n,
            h: (b - a) / (n + 1) as f64,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Number of interior nodes.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    /// Coordinate of the interior node with zero-based index `i`, i.e. the
    /// node `x_{i+1} = a + (i+1) h`.
    pub fn x(&self, i: usize) -> f64 {
        self.a + (i + 1) as f64 * self.h
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.x(i))
    }

    /// Same interval with every cell halved.
    pub fn refined(&self) -> Self {
        Self::new(self.a, self.b, 2 * self.n + 1).expect("refinement of a valid grid")
    }

    /// Discrete eigenvalue of the three-point Laplacian for the sine mode `k`.
    pub fn laplacian_eigenvalue(&self, k: usize) -> f64 {
        let theta = k as f64 * std::f64::consts::PI * self.h / self.length();
        -(2.0 / (self.h * self.h)) * (1.0 - theta.cos())
    }

    /// Trapezoid rule with zero boundary samples: `h * sum(samples)`.
    pub fn integrate(&self, samples: &[f64]) -> f64 {
        debug_assert_eq!(samples.len(), self.n);
        self.h * samples.iter().sum::<f64>()
    }

    pub fn integrate_complex(&self, samples: &[Complex64]) -> Complex64 {
        debug_assert_eq!(samples.len(), self.n);
        samples.iter().sum::<Complex64>() * self.h
    }

    /// Running trapezoid integral from `a` to each interior node.
    pub fn cumulative_integral(&self, samples: &[f64]) -> Vec<f64> {
        let mut acc = 0.0;
        let mut prev = 0.0;
        samples
            .iter()
            .map(|&s| {
                acc += 0.5 * self.h * (prev + s);
                prev = s;
                acc
            })
            .collect()
    }

    pub fn cumulative_integral_complex(&self, samples: &[Complex64]) -> Vec<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut prev = Complex64::new(0.0, 0.0);
        samples
            .iter()
            .map(|&s| {
                acc += (prev + s) * (0.5 * self.h);
                prev = s;
                acc
            })
            .collect()
    }
}

/// Complex grid function sampled at the interior nodes of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<Complex64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::LengthMismatch {
                expected: grid.n(),
                got: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.n()],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.nodes().map(f).collect();
        Self { grid, values }
    }

    pub fn from_real_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    /// Discrete sine eigenmode `sin(k pi (x - a) / (b - a))`.
    pub fn sine_mode(grid: Grid, k: usize) -> Self {
        let (a, len) = (grid.a(), grid.length());
        Self::from_real_fn(grid, |x| {
            (k as f64 * std::f64::consts::PI * (x - a) / len).sin()
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Same grid, new samples.
    pub fn with_values(&self, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), self.grid.n());
        Self {
            grid: self.grid,
            values,
        }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        self.with_values(self.values.iter().map(|&z| f(z)).collect())
    }

    pub fn scale(&self, alpha: Complex64) -> Self {
        self.map(|z| z * alpha)
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn ensure_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn add(&self, other: &Field) -> Field {
        debug_assert_eq!(self.grid, other.grid);
        self.with_values(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Field) -> Field {
        debug_assert_eq!(self.grid, other.grid);
        self.with_values(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    /// Discrete L² inner product `h * sum(conj(u_j) v_j)`.
    pub fn inner(&self, other: &Field) -> Complex64 {
        debug_assert_eq!(self.grid, other.grid);
        self.values
            .iter()
            .zip(&other.values)
            .map(|(u, v)| u.conj() * v)
            .sum::<Complex64>()
            * self.grid.h()
    }

    pub fn l2_norm_sqr(&self) -> f64 {
        self.grid.h() * self.values.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sqr().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Sample with Dirichlet zero-extension for indices -1 and n.
    #[inline]
    pub fn extended(&self, i: isize) -> Complex64 {
        if i < 0 || i as usize >= self.values.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.values[i as usize]
        }
    }

    /// Fraction of the discrete mass sitting in the outer `fraction` of the
    /// interval at either end. Zero for the zero field.
    pub fn boundary_mass_fraction(&self, fraction: f64) -> f64 {
        let total: f64 = self.values.iter().map(|z| z.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let width = fraction * self.grid.length();
        let (lo, hi) = (self.grid.a() + width, self.grid.b() - width);
        let outer: f64 = self
            .grid
            .nodes()
            .zip(&self.values)
            .filter(|(x, _)| *x <= lo || *x >= hi)
            .map(|(_, z)| z.norm_sqr())
            .sum();
        outer / total
    }
}

/// Central first difference `(u_{j+1} - u_{j-1}) / 2h` with zero extension.
pub fn d1(u: &Field) -> Field {
    let n = u.len() as isize;
    let inv = 0.5 / u.grid().h();
    u.with_values(
        (0..n)
            .map(|i| (u.extended(i + 1) - u.extended(i - 1)) * inv)
            .collect(),
    )
}

/// Three-point Laplacian `(u_{j+1} - 2u_j + u_{j-1}) / h²` with zero extension.
pub fn d2(u: &Field) -> Field {
    let n = u.len() as isize;
    let inv = 1.0 / (u.grid().h() * u.grid().h());
    u.with_values(
        (0..n)
            .map(|i| (u.extended(i + 1) - u.extended(i) * 2.0 + u.extended(i - 1)) * inv)
            .collect(),
    )
}

/// Forward differences on all `n + 1` cells, boundary samples included.
pub fn forward_differences(u: &Field) -> Vec<Complex64> {
    let n = u.len() as isize;
    let inv = 1.0 / u.grid().h();
    (-1..n)
        .map(|i| (u.extended(i + 1) - u.extended(i)) * inv)
        .collect()
}

/// `h * sum |(u_{j+1} - u_j) / h|²` over all cells; equals `-Re<d2 u, u>`.
pub fn gradient_norm_sqr(u: &Field) -> f64 {
    u.grid().h() * forward_differences(u).iter().map(|z| z.norm_sqr()).sum::<f64>()
}
