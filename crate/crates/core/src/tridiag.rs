//! Thomas algorithm for tridiagonal systems with real or complex bands and
//! complex right-hand sides.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Sub};

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Pivots smaller than this are treated as singular.
pub const PIVOT_FLOOR: f64 = 1e-300;

/// Band entry type: `f64` or `Complex64`.
pub trait BandScalar:
    Copy
    + Debug
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    fn magnitude(self) -> f64;
    fn times(self, z: Complex64) -> Complex64;
}

impl BandScalar for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }

    #[inline]
    fn times(self, z: Complex64) -> Complex64 {
        z * self
    }
}

impl BandScalar for Complex64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }

    #[inline]
    fn times(self, z: Complex64) -> Complex64 {
        self * z
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem<T> {
    lower: Vec<T>,
    diag: Vec<T>,
    upper: Vec<T>,
}

impl<T: BandScalar> TridiagonalSystem<T> {
    pub fn new(lower: Vec<T>, diag: Vec<T>, upper: Vec<T>) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Err(Error::InvalidParameter {
                name: "diag",
                reason: "system must have at least one row".into(),
            });
        }
        for band in [&lower, &upper] {
            if band.len() != n - 1 {
                return Err(Error::LengthMismatch {
                    expected: n - 1,
                    got: band.len(),
                });
            }
        }
        Ok(Self { lower, diag, upper })
    }

    /// Constant-coefficient (Toeplitz) system.
    pub fn constant(n: usize, lower: T, diag: T, upper: T) -> Self {
        Self {
            lower: vec![lower; n.saturating_sub(1)],
            diag: vec![diag; n],
            upper: vec![upper; n.saturating_sub(1)],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::constant(n, T::zero(), T::one(), T::zero())
    }

    pub fn size(&self) -> usize {
        self.diag.len()
    }

    pub fn lower(&self) -> &[T] {
        &self.lower
    }

    pub fn diag(&self) -> &[T] {
        &self.diag
    }

    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.size();
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i].times(x[i]);
                if i > 0 {
                    acc += self.lower[i - 1].times(x[i - 1]);
                }
                if i + 1 < n {
                    acc += self.upper[i].times(x[i + 1]);
                }
                acc
            })
            .collect()
    }

    /// Forward-elimination coefficients, reusable for many right-hand sides.
    pub fn factor(&self) -> Result<ThomasFactor<T>> {
        let n = self.size();
        let mut pivots = Vec::with_capacity(n);
        let mut ratios = Vec::with_capacity(n.saturating_sub(1));
        let mut pivot = self.diag[0];
        for i in 0..n {
            if i > 0 {
                pivot = self.diag[i] - self.lower[i - 1] * ratios[i - 1];
            }
            if pivot.magnitude().is_nan() || pivot.magnitude() < PIVOT_FLOOR {
                return Err(Error::SingularPivot {
                    index: i,
                    magnitude: pivot.magnitude(),
                });
            }
            pivots.push(pivot);
            if i + 1 < n {
                ratios.push(self.upper[i] / pivot);
            }
        }
        Ok(ThomasFactor {
            lower: self.lower.clone(),
            pivots,
            ratios,
        })
    }
}

/// Precomputed Thomas elimination of a [`TridiagonalSystem`].
#[derive(Debug, Clone, PartialEq)]
pub struct ThomasFactor<T> {
    lower: Vec<T>,
    pivots: Vec<T>,
    ratios: Vec<T>,
}

impl<T: BandScalar> ThomasFactor<T> {
    pub fn size(&self) -> usize {
        self.pivots.len()
    }

    pub fn solve(&self, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }

    pub fn solve_in_place(&self, x: &mut [Complex64]) -> Result<()> {
        let n = self.size();
        if x.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: x.len(),
            });
        }
        let inv = |p: T, z: Complex64| -> Complex64 { (T::one() / p).times(z) };
        x[0] = inv(self.pivots[0], x[0]);
        for i in 1..n {
            let carried = self.lower[i - 1].times(x[i - 1]);
            x[i] = inv(self.pivots[i], x[i] - carried);
        }
        for i in (0..n - 1).rev() {
            let next = x[i + 1];
            x[i] -= self.ratios[i].times(next);
        }
        Ok(())
    }
}

/// One-shot solve of `sys * x = rhs`.
pub fn solve_tridiagonal<T: BandScalar>(
    sys: &TridiagonalSystem<T>,
    rhs: &[Complex64],
) -> Result<Vec<Complex64>> {
    if rhs.len() != sys.size() {
        return Err(Error::LengthMismatch {
            expected: sys.size(),
            got: rhs.len(),
        });
    }
    sys.factor()?.solve(rhs)
}
