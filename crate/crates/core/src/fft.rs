//! Internal spectral helpers: apply a real Fourier multiplier m(|xi|) on the
//! periodic lattice, with xi the integer frequencies scaled by 2*pi/period.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::ScalarField;

/// Integer frequency of bin `k` out of `n` (standard FFT ordering).
fn freq(k: usize, n: usize) -> f64 {
    if k <= n / 2 {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

fn fft_axis(data: &mut [Complex64], n: usize, stride: usize, count: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    let mut line = vec![Complex64::default(); n];
    for c in 0..count {
        let base = if stride == 1 { c * n } else { c };
        for j in 0..n {
            line[j] = data[base + j * stride];
        }
        fft.process(&mut line);
        for j in 0..n {
            data[base + j * stride] = line[j];
        }
    }
}

/// Apply the multiplier `m(|xi|)` to a field. The zero mode is passed through
/// `m(0)`. Output must be real up to `1e-12 * ||u||_inf`; a larger imaginary
/// residue is an error.
pub fn apply_multiplier<F: Fn(f64) -> f64>(field: &ScalarField, m: F) -> Result<ScalarField> {
    let grid = field.grid();
    let n = grid.n_points();
    let scale = 2.0 * std::f64::consts::PI / grid.period();
    let mut data: Vec<Complex64> = field
        .values()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();

    match grid.dim() {
        1 => {
            fft_axis(&mut data, n, 1, 1, false);
            for (k, d) in data.iter_mut().enumerate() {
                *d *= m((freq(k, n) * scale).abs());
            }
            fft_axis(&mut data, n, 1, 1, true);
        }
        _ => {
            fft_axis(&mut data, n, 1, n, false); // rows
            fft_axis(&mut data, n, n, n, false); // columns
            for ki in 0..n {
                let fi = freq(ki, n) * scale;
                for kj in 0..n {
                    let fj = freq(kj, n) * scale;
                    data[ki * n + kj] *= m((fi * fi + fj * fj).sqrt());
                }
            }
            fft_axis(&mut data, n, n, n, true);
            fft_axis(&mut data, n, 1, n, true);
        }
    }

    let norm = 1.0 / grid.len() as f64;
    let limit = 1e-12 * field.max_abs().max(1e-300);
    let mut residue = 0.0f64;
    let mut out = Vec::with_capacity(grid.len());
    for d in &data {
        residue = residue.max((d.im * norm).abs());
        out.push(d.re * norm);
    }
    if residue > limit {
        return Err(Error::ImaginaryResidue { residue, limit });
    }
    Ok(ScalarField::from_raw(grid, out))
}
