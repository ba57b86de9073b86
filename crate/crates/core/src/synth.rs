//! Deterministic synthetic data: seeded random fields and drifts, square
//! waves, and frozen power-law profiles used to calibrate the estimators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::evolve::DriftField;
use crate::grid::{Grid, ScalarField};

/// Smooth random field: a seeded Fourier sum over modes up to `max_mode`,
/// rescaled so that ||u||_inf = sup_bound. Identical (grid, seed, max_mode)
/// always produce the same field.
pub fn random_fourier_field(
    grid: Grid,
    seed: u64,
    max_mode: usize,
    sup_bound: f64,
) -> Result<ScalarField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = grid.period();
    let tau = 2.0 * std::f64::consts::PI / l;
    let mut terms: Vec<(f64, f64, f64, f64, f64)> = Vec::new();
    for k in 1..=max_mode {
        // amplitude, phase per axis; decay keeps the field smooth
        let amp = rng.gen_range(-1.0..1.0) / k as f64;
        let phase = rng.gen_range(0.0..l);
        let amp2 = rng.gen_range(-1.0..1.0) / k as f64;
        let phase2 = rng.gen_range(0.0..l);
        terms.push((k as f64, amp, phase, amp2, phase2));
    }
    let raw = ScalarField::sample(grid, |p| {
        let mut v = 0.0;
        for &(k, a1, p1, a2, p2) in &terms {
            v += a1 * (tau * k * (p[0] - p1)).sin();
            if grid.dim() == 2 {
                v += a2 * (tau * k * (p[1] - p2)).sin();
            }
        }
        v
    })?;
    let m = raw.max_abs();
    if m == 0.0 {
        return Ok(raw);
    }
    raw.map(|v| v * sup_bound / m)
}

/// Rough random field: independent uniform samples in [-amp, amp].
pub fn random_lattice_field(grid: Grid, seed: u64, amp: f64) -> Result<ScalarField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ScalarField::new(
        grid,
        (0..grid.len()).map(|_| rng.gen_range(-amp..amp)).collect(),
    )
}

/// Square wave along the first axis: +amp on the first half period, -amp on
/// the second (discontinuous L^inf data).
pub fn square_wave(grid: Grid, amp: f64) -> ScalarField {
    let half = grid.period() / 2.0;
    ScalarField::sample(grid, |p| if p[0] < half { amp } else { -amp }).unwrap()
}

/// Random bounded drift: independent uniform components scaled so the
/// pointwise magnitude never exceeds `bound`.
pub fn random_drift_field(grid: Grid, seed: u64, bound: f64) -> Result<DriftField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let per_axis = bound / (grid.dim() as f64).sqrt();
    let components = (0..grid.dim())
        .map(|_| {
            ScalarField::new(
                grid,
                (0..grid.len())
                    .map(|_| rng.gen_range(-per_axis..per_axis))
                    .collect(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    DriftField::new(components, bound)
}

/// Frozen profile |d(x, x0)|^alpha on the torus, the cascade calibration
/// input.
pub fn power_profile(grid: Grid, center: [f64; 2], alpha: f64) -> ScalarField {
    ScalarField::sample(grid, |p| grid.torus_distance(p, center).powf(alpha)).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn seeded_fields_are_reproducible() {
        let g = Grid::new(1, 64, 2.0 * PI).unwrap();
        let a = random_fourier_field(g, 42, 6, 1.0).unwrap();
        let b = random_fourier_field(g, 42, 6, 1.0).unwrap();
        assert_eq!(a.values(), b.values());
        assert!((a.max_abs() - 1.0).abs() < 1e-12);
        let c = random_fourier_field(g, 43, 6, 1.0).unwrap();
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn drift_respects_bound() {
        let g = Grid::new(2, 16, 1.0).unwrap();
        let d = random_drift_field(g, 7, 0.5).unwrap();
        for i in 0..g.len() {
            let m = (d.component(0).value(i).powi(2) + d.component(1).value(i).powi(2)).sqrt();
            assert!(m <= 0.5);
        }
    }

    #[test]
    fn square_wave_is_sign_balanced() {
        let g = Grid::new(1, 64, 2.0 * PI).unwrap();
        let w = square_wave(g, 1.0);
        let sum: f64 = w.values().iter().sum();
        assert_eq!(sum, 0.0);
        assert_eq!(w.max_abs(), 1.0);
    }
}
