use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{ArwError, Result};
use crate::lattice::FrequencySet;
use crate::trig_grid::{eval_grid, eval_grid_direct, eval_point, RealGrid};

/// How grid values are computed. Both are exact; the transform is the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalPath {
    #[default]
    Transform,
    Direct,
}

/// One realisation `f(x) = scale · Σ_{λ ∈ half} (b_λ cos 2π⟨λ,x⟩ - c_λ sin 2π⟨λ,x⟩)` together
/// with its values on the `M×M` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub n: u64,
    pub m: usize,
    /// `values[j*M + k] = f(j/M, k/M)`.
    pub values: Vec<f64>,
    pub seed: u64,
    pub half_lattice: Vec<[i64; 2]>,
    /// `(b_λ, c_λ)` in half-lattice order.
    pub coefficients: Vec<(f64, f64)>,
    pub scale: f64,
}

/// Value, gradient and Hessian of the field at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldJet {
    pub value: f64,
    pub grad: [f64; 2],
    pub hess: [[f64; 2]; 2],
}

impl FieldGrid {
    pub fn at(&self, j: usize, k: usize) -> f64 {
        self.values[(j % self.m) * self.m + (k % self.m)]
    }

    /// Field from explicit coefficients, e.g. `cos(2πx₁)` from `half = [(1,0)]`, `(b,c) = (1,0)`.
    pub fn synthetic(
        n: u64,
        m: usize,
        half_lattice: Vec<[i64; 2]>,
        coefficients: Vec<(f64, f64)>,
        scale: f64,
        path: EvalPath,
    ) -> Result<Self> {
        if half_lattice.len() != coefficients.len() {
            return Err(ArwError::InvalidParameter(format!(
                "{} frequencies but {} coefficient pairs",
                half_lattice.len(),
                coefficients.len()
            )));
        }
        let bound = half_lattice
            .iter()
            .map(|p| p[0].abs().max(p[1].abs()))
            .max()
            .unwrap_or(0) as usize;
        if m <= 2 * bound {
            return Err(ArwError::GridTooSmall {
                required: 2 * bound + 1,
                got: m,
            });
        }
        let mut field = FieldGrid {
            n,
            m,
            values: Vec::new(),
            seed: 0,
            half_lattice,
            coefficients,
            scale,
        };
        let terms = field.terms();
        field.values = match path {
            EvalPath::Transform => eval_grid(m, &terms).values,
            EvalPath::Direct => eval_grid_direct(m, &terms).values,
        };
        Ok(field)
    }

    /// `Re Σ scale·(b + ic)·e(⟨λ,x⟩)` reproduces `b cos - c sin`.
    pub fn terms(&self) -> Vec<([i64; 2], Complex64)> {
        self.half_lattice
            .iter()
            .zip(&self.coefficients)
            .map(|(&p, &(b, c))| (p, Complex64::new(self.scale * b, self.scale * c)))
            .collect()
    }

    /// Exact value at an arbitrary point.
    pub fn eval(&self, x: [f64; 2]) -> f64 {
        eval_point(&self.terms(), x)
    }

    pub fn jet(&self, x: [f64; 2]) -> FieldJet {
        let tau = std::f64::consts::TAU;
        let mut out = FieldJet {
            value: 0.0,
            grad: [0.0; 2],
            hess: [[0.0; 2]; 2],
        };
        for (&[a, b], &(cb, cc)) in self.half_lattice.iter().zip(&self.coefficients) {
            let (a, b) = (a as f64, b as f64);
            let (s, c) = (tau * (a * x[0] + b * x[1])).sin_cos();
            let v = cb * c - cc * s;
            // derivative of (b cos - c sin) along the phase
            let dv = -cb * s - cc * c;
            out.value += v;
            out.grad[0] += tau * a * dv;
            out.grad[1] += tau * b * dv;
            out.hess[0][0] -= tau * tau * a * a * v;
            out.hess[0][1] -= tau * tau * a * b * v;
            out.hess[1][1] -= tau * tau * b * b * v;
        }
        let s = self.scale;
        FieldJet {
            value: s * out.value,
            grad: [s * out.grad[0], s * out.grad[1]],
            hess: [
                [s * out.hess[0][0], s * out.hess[0][1]],
                [s * out.hess[0][1], s * out.hess[1][1]],
            ],
        }
    }

    /// Row-major CSV with a `# n=…,M=…,seed=…` header line.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# n={},M={},seed={}\n", self.n, self.m, self.seed);
        for row in self.values.chunks(self.m) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_real_grid(&self) -> RealGrid {
        RealGrid {
            m: self.m,
            values: self.values.clone(),
        }
    }
}

/// The generator for trial `stream` of `seed`: ChaCha8 keyed by the seed, one stream per trial.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws `(b_λ, c_λ)` for each representative in order.
pub fn draw_coefficients(rng: &mut ChaCha8Rng, count: usize) -> Vec<(f64, f64)> {
    (0..count)
        .map(|_| {
            let b: f64 = StandardNormal.sample(rng);
            let c: f64 = StandardNormal.sample(rng);
            (b, c)
        })
        .collect()
}

/// Smallest side for which grid evaluation is exact, `2⌈√n⌉ + 1`.
pub fn min_field_grid(freqs: &FrequencySet) -> usize {
    2 * freqs.radius_ceil() + 1
}

/// Smallest power of two strictly above `8⌈√n⌉`.
///
/// When `8⌈√n⌉` is itself a power of two (n = 1, 4, 16, ...) it leaves eight cells per
/// wavelength, and per-trial lengths then move by up to 3% under doubling.
pub fn default_grid(freqs: &FrequencySet) -> usize {
    (8 * freqs.radius_ceil() + 1).next_power_of_two()
}

pub fn sample_field(freqs: &FrequencySet, grid_m: usize, seed: u64) -> Result<FieldGrid> {
    sample_field_with(
        freqs,
        freqs.half_lattice(),
        grid_m,
        seed,
        0,
        EvalPath::Transform,
    )
}

/// Full control: representative order, trial stream and evaluation path.
pub fn sample_field_with(
    freqs: &FrequencySet,
    half_lattice: Vec<[i64; 2]>,
    grid_m: usize,
    seed: u64,
    stream: u64,
    path: EvalPath,
) -> Result<FieldGrid> {
    let required = min_field_grid(freqs);
    if grid_m < required {
        return Err(ArwError::GridTooSmall {
            required,
            got: grid_m,
        });
    }
    let mut rng = trial_rng(seed, stream);
    let coefficients = draw_coefficients(&mut rng, half_lattice.len());
    let scale = (2.0 / freqs.n_points() as f64).sqrt();
    let mut field =
        FieldGrid::synthetic(freqs.n(), grid_m, half_lattice, coefficients, scale, path)?;
    field.seed = seed;
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::enumerate_lambda;

    #[test]
    fn paths_agree() {
        let l = enumerate_lambda(65).unwrap();
        let half = l.half_lattice();
        let a = sample_field_with(&l, half.clone(), 128, 3, 0, EvalPath::Transform).unwrap();
        let b = sample_field_with(&l, half, 128, 3, 0, EvalPath::Direct).unwrap();
        let worst = a
            .values
            .iter()
            .zip(&b.values)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn jet_matches_values_and_differences() {
        let l = enumerate_lambda(25).unwrap();
        let f = sample_field(&l, 64, 9).unwrap();
        assert!((f.jet([3.0 / 64.0, 10.0 / 64.0]).value - f.at(3, 10)).abs() < 1e-12);
        let x = [0.31, 0.77];
        let h = 1e-6;
        let j = f.jet(x);
        let gx = (f.eval([x[0] + h, x[1]]) - f.eval([x[0] - h, x[1]])) / (2.0 * h);
        let gy = (f.eval([x[0], x[1] + h]) - f.eval([x[0], x[1] - h])) / (2.0 * h);
        assert!((gx - j.grad[0]).abs() < 1e-5 * j.grad[0].abs().max(1.0));
        assert!((gy - j.grad[1]).abs() < 1e-5 * j.grad[1].abs().max(1.0));
        // Laplace eigenfunction
        let lap = j.hess[0][0] + j.hess[1][1];
        assert!((lap + l.energy() * j.value).abs() < 1e-9 * l.energy());
    }

    #[test]
    fn rejects_small_grid() {
        let l = enumerate_lambda(25).unwrap();
        assert!(matches!(
            sample_field(&l, 10, 1),
            Err(ArwError::GridTooSmall { required: 11, .. })
        ));
        assert!(sample_field(&l, 11, 1).is_ok());
    }

    #[test]
    fn deterministic_and_csv_header() {
        let l = enumerate_lambda(5).unwrap();
        let a = sample_field(&l, 16, 42).unwrap();
        assert_eq!(a, sample_field(&l, 16, 42).unwrap());
        assert_ne!(a.values, sample_field(&l, 16, 43).unwrap().values);
        let csv = a.to_csv();
        assert!(csv.starts_with("# n=5,M=16,seed=42\n"));
        assert_eq!(csv.lines().count(), 17);
    }
}
