//! Initial-data families and seeded random smooth fields.

use std::f64::consts::PI;

use gdnls_core::{Field, Grid};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Fraction of the domain on each side watched by the boundary guard.
pub const GUARD_FRACTION: f64 = 0.05;
/// Largest admissible relative mass in the guarded region.
pub const GUARD_LIMIT: f64 = 1e-10;
/// Highest sine mode in random fields.
pub const RANDOM_MAX_MODE: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset {
    /// `A sin(k pi (x - a)/(b - a))`.
    Sine { k: usize, amplitude: f64 },
    /// `A exp(-(x - x0)²/(2 w²)) e^{i c x}`.
    Gaussian {
        x0: f64,
        width: f64,
        amplitude: f64,
        modulation: f64,
    },
    /// `A 16 (x - a)²(b - x)²/(b - a)⁴`, peak value `A`.
    Polybump { amplitude: f64 },
}

impl Preset {
    pub fn label(&self) -> String {
        match self {
            Preset::Sine { k, .. } => format!("sine_{k}"),
            Preset::Gaussian { modulation, .. } if *modulation != 0.0 => "gaussian_modulated".into(),
            Preset::Gaussian { .. } => "gaussian".into(),
            Preset::Polybump { .. } => "polybump".into(),
        }
    }

    pub fn amplitude(&self) -> f64 {
        match *self {
            Preset::Sine { amplitude, .. }
            | Preset::Gaussian { amplitude, .. }
            | Preset::Polybump { amplitude } => amplitude,
        }
    }

    pub fn with_amplitude(mut self, value: f64) -> Self {
        match &mut self {
            Preset::Sine { amplitude, .. }
            | Preset::Gaussian { amplitude, .. }
            | Preset::Polybump { amplitude } => *amplitude = value,
        }
        self
    }

    /// True for data that stands in for a solution on the whole line.
    pub fn models_line(&self) -> bool {
        matches!(self, Preset::Gaussian { .. })
    }

    pub fn field(&self, grid: Grid) -> Field {
        let (a, b) = (grid.a(), grid.b());
        let l = b - a;
        match *self {
            Preset::Sine { k, amplitude } => {
                Field::from_real_fn(grid, |x| amplitude * (k as f64 * PI * (x - a) / l).sin())
            }
            Preset::Gaussian {
                x0,
                width,
                amplitude,
                modulation,
            } => Field::from_fn(grid, |x| {
                let r = (x - x0) / width;
                Complex64::cis(modulation * x) * (amplitude * (-0.5 * r * r).exp())
            }),
            Preset::Polybump { amplitude } => Field::from_real_fn(grid, |x| {
                let s = (x - a) * (b - x);
                amplitude * 16.0 * s * s / l.powi(4)
            }),
        }
    }
}

/// The fixed family used by the norm probe.
pub fn probe_family(grid: Grid) -> Vec<Preset> {
    let l = grid.length();
    let mid = 0.5 * (grid.a() + grid.b());
    vec![
        Preset::Sine { k: 1, amplitude: 1.0 },
        Preset::Sine { k: 3, amplitude: 1.0 },
        Preset::Gaussian {
            x0: mid,
            width: l / 20.0,
            amplitude: 1.0,
            modulation: 0.0,
        },
        Preset::Gaussian {
            x0: mid,
            width: l / 20.0,
            amplitude: 1.0,
            modulation: 10.0 * PI / l,
        },
        Preset::Polybump { amplitude: 1.0 },
    ]
}

/// Relative mass in the outer 5% on either side.
pub fn boundary_fraction(u: &Field) -> f64 {
    u.boundary_mass_fraction(GUARD_FRACTION)
}

/// `count` fields `sum_k (alpha_k + i beta_k) sin(k pi (x - a)/L) / k`,
/// `k <= 10`, coefficients uniform on `[-1, 1]`.
pub fn random_smooth_fields(grid: Grid, count: usize, seed: u64) -> Vec<Field> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<Field> = (1..=RANDOM_MAX_MODE)
        .map(|k| Preset::Sine { k, amplitude: 1.0 }.field(grid))
        .collect();
    (0..count)
        .map(|_| {
            let mut values = vec![Complex64::new(0.0, 0.0); grid.n()];
            for (k, mode) in modes.iter().enumerate() {
                let c = Complex64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0))
                    / (k + 1) as f64;
                for (v, m) in values.iter_mut().zip(mode.values()) {
                    *v += c * m;
                }
            }
            Field::new(grid, values).expect("length matches grid")
        })
        .collect()
}
