//! Sup- and inf-convolutions with quadratic penalty, and the semiconvexity
//! and Lipschitz diagnostics attached to them.
//!
//! The sup-convolution is the exact discrete envelope
//! `u^eps(x) = max_y [ u(y) - d(x,y)^2 / eps ]` over all lattice points, with
//! the torus metric in space. Because the squared torus distance separates
//! per axis, the envelope is computed as one exhaustive pass per axis (and
//! one over frames for space-time fields, with the same quadratic penalty in
//! time); the result equals the brute-force supremum exactly.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{ScalarField, SpaceTimeField};

/// Envelope parameter eps > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvolutionParam {
    epsilon: f64,
}

impl ConvolutionParam {
    pub fn new(epsilon: f64) -> Result<ConvolutionParam> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "convolution epsilon must be > 0, got {epsilon}"
            )));
        }
        Ok(ConvolutionParam { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// One exhaustive envelope pass along lines of length `n` with penalty
/// `penalty[k]` for a separation of k lattice steps (already wrapped).
fn axis_pass(line_in: &[f64], line_out: &mut [f64], penalty: &[f64]) {
    let n = line_in.len();
    for (i, out) in line_out.iter_mut().enumerate() {
        let mut best = f64::NEG_INFINITY;
        for (j, &v) in line_in.iter().enumerate() {
            let k = if i >= j { i - j } else { j - i };
            let c = v - penalty[k.min(n - k)];
            if c > best {
                best = c;
            }
        }
        *out = best;
    }
}

fn spatial_penalty(n: usize, h: f64, epsilon: f64) -> Vec<f64> {
    (0..=n / 2)
        .map(|k| {
            let d = k as f64 * h;
            d * d / epsilon
        })
        .collect()
}

/// Sup-convolution of a scalar field: exact lattice supremum of
/// `u(y) - dist(x,y)^2 / eps` with the torus metric.
pub fn sup_convolution(field: &ScalarField, param: ConvolutionParam) -> ScalarField {
    let grid = field.grid();
    let n = grid.n_points();
    let penalty = spatial_penalty(n, grid.spacing(), param.epsilon());
    match grid.dim() {
        1 => {
            let mut out = vec![0.0; n];
            axis_pass(field.values(), &mut out, &penalty);
            ScalarField::from_raw(grid, out)
        }
        _ => {
            // pass along rows, then along columns
            let mut mid = vec![0.0; grid.len()];
            mid.par_chunks_mut(n)
                .zip(field.values().par_chunks(n))
                .for_each(|(out_row, in_row)| axis_pass(in_row, out_row, &penalty));
            let mut out = vec![0.0; grid.len()];
            let mut col_in = vec![0.0; n];
            let mut col_out = vec![0.0; n];
            for j in 0..n {
                for i in 0..n {
                    col_in[i] = mid[i * n + j];
                }
                axis_pass(&col_in, &mut col_out, &penalty);
                for i in 0..n {
                    out[i * n + j] = col_out[i];
                }
            }
            ScalarField::from_raw(grid, out)
        }
    }
}

/// Inf-convolution via the exact duality u_eps = -((-u)^eps).
pub fn inf_convolution(field: &ScalarField, param: ConvolutionParam) -> ScalarField {
    let neg = ScalarField::from_raw(
        field.grid(),
        field.values().iter().map(|&v| -v).collect(),
    );
    let sup = sup_convolution(&neg, param);
    ScalarField::from_raw(
        field.grid(),
        sup.values().iter().map(|&v| -v).collect(),
    )
}

/// Space-time sup-convolution: the quadratic penalty applies to time exactly
/// as to space, and the supremum runs over the stored frames only.
pub fn sup_convolution_spacetime(
    field: &SpaceTimeField,
    param: ConvolutionParam,
) -> Result<SpaceTimeField> {
    let times = field.times();
    let eps = param.epsilon();
    // spatial envelope of every frame first, then the time pass
    let spatial: Vec<ScalarField> = field
        .frames()
        .iter()
        .map(|f| sup_convolution(f, param))
        .collect();
    let grid = field.grid();
    let frames: Vec<ScalarField> = (0..times.len())
        .map(|k| {
            let values = (0..grid.len())
                .map(|i| {
                    let mut best = f64::NEG_INFINITY;
                    for (j, &tj) in times.iter().enumerate() {
                        let dt = times[k] - tj;
                        let c = spatial[j].value(i) - dt * dt / eps;
                        if c > best {
                            best = c;
                        }
                    }
                    best
                })
                .collect();
            ScalarField::from_raw(grid, values)
        })
        .collect();
    SpaceTimeField::new(times.to_vec(), frames)
}

pub fn inf_convolution_spacetime(
    field: &SpaceTimeField,
    param: ConvolutionParam,
) -> Result<SpaceTimeField> {
    let neg_frames: Vec<ScalarField> = field
        .frames()
        .iter()
        .map(|f| ScalarField::from_raw(f.grid(), f.values().iter().map(|&v| -v).collect()))
        .collect();
    let neg = SpaceTimeField::new(field.times().to_vec(), neg_frames)?;
    let sup = sup_convolution_spacetime(&neg, param)?;
    let frames = sup
        .frames()
        .iter()
        .map(|f| ScalarField::from_raw(f.grid(), f.values().iter().map(|&v| -v).collect()))
        .collect();
    SpaceTimeField::new(field.times().to_vec(), frames)
}

/// Smallest c >= 0 such that delta u(x,y) >= -c |y|^2 holds at every lattice
/// point and displacement, by exhaustive scan. Semiconvex fields with a
/// tangent paraboloid of opening c from below report at most c (up to O(h)).
pub fn semiconvexity_modulus(field: &ScalarField) -> f64 {
    let grid = field.grid();
    (1..grid.len())
        .into_par_iter()
        .map(|j| {
            let d = grid.displacement(j);
            let r2 = d[0] * d[0] + d[1] * d[1];
            let mut worst = 0.0f64;
            for x in 0..grid.len() {
                let delta = crate::nonlocal::second_difference(field, x, j);
                worst = worst.max(-delta / r2);
            }
            worst
        })
        .reduce(|| 0.0, f64::max)
}

/// Largest difference quotient |u(x) - u(y)| / dist(x,y) over lattice pairs
/// with torus distance at most period/4. The restriction keeps the seminorm
/// local and free of wraparound artifacts.
pub fn lipschitz_seminorm(field: &ScalarField) -> f64 {
    let grid = field.grid();
    let rmax = grid.period() / 4.0;
    (1..grid.len())
        .into_par_iter()
        .map(|j| {
            let d = grid.displacement(j);
            let r = (d[0] * d[0] + d[1] * d[1]).sqrt();
            if r > rmax {
                return 0.0;
            }
            let o = grid.offset_coords(j);
            let mut worst = 0.0f64;
            for x in 0..grid.len() {
                let diff = (field.value(grid.shifted(x, o)) - field.value(x)).abs();
                worst = worst.max(diff / r);
            }
            worst
        })
        .reduce(|| 0.0, f64::max)
}
