//! Order-one nonlocal operators on the periodic lattice: second differences,
//! the fractional Laplacian by spectral multiplier and by singular-integral
//! quadrature, linear kernel operators L_a and the extremal operators M+/M-.
//!
//! The quadrature path sums the symmetrized integrand over lattice
//! displacement classes. For each displacement the kernel is summed over its
//! periodic images (with an integral tail correction), the cell containing
//! the displacement is integrated exactly against the singular kernel in 1-d,
//! and the singular core |y| < inner_cutoff is replaced by the analytic
//! integral of a local polynomial model of the second difference.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::fft::apply_multiplier;
use crate::grid::{Grid, ScalarField};

/// Order s of the fractional Laplacian, in (0,1). s = 1/2 is the critical
/// value where diffusion and drift scale identically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub fn new(s: f64) -> Result<FractionalOrder> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "fractional order s must lie in (0,1), got {s}"
            )));
        }
        Ok(FractionalOrder(s))
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    pub fn is_critical(&self) -> bool {
        self.0 == 0.5
    }
}

/// Uniform ellipticity bounds 0 < lambda <= Lambda for admissible kernels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticityBounds {
    lambda: f64,
    big_lambda: f64,
}

impl EllipticityBounds {
    pub fn new(lambda: f64, big_lambda: f64) -> Result<EllipticityBounds> {
        if !(lambda > 0.0 && big_lambda >= lambda) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < lambda <= Lambda, got lambda = {lambda}, Lambda = {big_lambda}"
            )));
        }
        Ok(EllipticityBounds { lambda, big_lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn big_lambda(&self) -> f64 {
        self.big_lambda
    }
}

/// A symmetric kernel a(y) with lambda <= a <= Lambda, sampled on the lattice
/// displacement classes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    grid: Grid,
    values: Vec<f64>,
    bounds: EllipticityBounds,
}

impl KernelSpec {
    pub fn new<F: Fn([f64; 2]) -> f64>(
        grid: Grid,
        bounds: EllipticityBounds,
        a: F,
    ) -> Result<KernelSpec> {
        let values: Vec<f64> = (0..grid.len()).map(|j| a(grid.displacement(j))).collect();
        KernelSpec::from_values(grid, bounds, values)
    }

    pub fn from_values(
        grid: Grid,
        bounds: EllipticityBounds,
        values: Vec<f64>,
    ) -> Result<KernelSpec> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        for j in 1..grid.len() {
            let v = values[j];
            if !(v >= bounds.lambda && v <= bounds.big_lambda) {
                return Err(Error::InvalidKernel(format!(
                    "ellipticity: a(y) = {v} outside [{}, {}] at displacement {j}",
                    bounds.lambda, bounds.big_lambda
                )));
            }
            let neg = mirror_offset(&grid, j);
            if values[neg] != v {
                return Err(Error::InvalidKernel(format!(
                    "symmetry: a(y) = {v} but a(-y) = {} at displacement {j}",
                    values[neg]
                )));
            }
        }
        Ok(KernelSpec { grid, values, bounds })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn bounds(&self) -> EllipticityBounds {
        self.bounds
    }

    /// Kernel value at a lattice displacement index.
    pub fn value(&self, offset_index: usize) -> f64 {
        self.values[offset_index]
    }
}

/// Offset index of -y for the offset index of y.
fn mirror_offset(grid: &Grid, offset_index: usize) -> usize {
    let n = grid.n_points();
    let c = grid.coords(offset_index);
    grid.flat_index([(n - c[0]) % n, (n - c[1]) % n])
}

/// How the integral over large |y| is handled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TailMode {
    /// Exact periodic lattice summation over displacement classes; the kernel
    /// is summed over all periodic images.
    PeriodicSum,
    /// Drop |y| > radius and report the tail bound
    /// 4 ||u||_inf * int_{|y|>R} |y|^{-n-2s} dy; error if it exceeds
    /// `tolerance`. Exists to mirror tail-error analysis, not for accuracy.
    Truncate { radius: f64, tolerance: f64 },
}

/// Singular-integral quadrature parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureScheme {
    /// Radius below which the singular core is handled by the analytic
    /// integral of a local polynomial model. Must be >= grid spacing.
    pub inner_cutoff: f64,
    pub tail_mode: TailMode,
}

impl QuadratureScheme {
    pub fn new(grid: &Grid, inner_cutoff: f64, tail_mode: TailMode) -> Result<QuadratureScheme> {
        if inner_cutoff < grid.spacing() {
            return Err(Error::InvalidParameter(format!(
                "inner_cutoff {inner_cutoff} below grid spacing {}",
                grid.spacing()
            )));
        }
        Ok(QuadratureScheme { inner_cutoff, tail_mode })
    }

    /// Default scheme: core radius 1.5h (the cell around the origin plus the
    /// nearest-neighbour cells), exact periodic summation.
    pub fn default_for(grid: &Grid) -> QuadratureScheme {
        QuadratureScheme {
            inner_cutoff: 1.5 * grid.spacing(),
            tail_mode: TailMode::PeriodicSum,
        }
    }
}

/// Normalization constant C_{n,s} of the singular-integral form of (-Lap)^s,
/// via |Gamma(-s)| = Gamma(1-s)/s:
/// C_{n,s} = 4^s Gamma(n/2 + s) s / (pi^{n/2} Gamma(1 - s)).
pub fn normalization_constant(dim: usize, s: FractionalOrder) -> f64 {
    let s = s.value();
    let n = dim as f64;
    4f64.powf(s) * gamma(n / 2.0 + s) * s
        / (std::f64::consts::PI.powf(n / 2.0) * gamma(1.0 - s))
}

/// delta u(x,y) = u(x+y) + u(x-y) - 2u(x), with torus wraparound. Both the
/// point and the displacement are given as flat lattice indices.
pub fn second_difference(field: &ScalarField, x_index: usize, offset_index: usize) -> f64 {
    let grid = field.grid();
    let o = grid.offset_coords(offset_index);
    let plus = grid.shifted(x_index, o);
    let minus = grid.shifted(x_index, [-o[0], -o[1]]);
    field.value(plus) + field.value(minus) - 2.0 * field.value(x_index)
}

/// (-Lap)^s u via the Fourier multiplier |xi|^{2s}; the zero mode maps to 0.
pub fn frac_laplacian_spectral(field: &ScalarField, s: FractionalOrder) -> Result<ScalarField> {
    let p = 2.0 * s.value();
    apply_multiplier(field, |xi| if xi == 0.0 { 0.0 } else { xi.powf(p) })
}

/// Precomputed displacement weights for one (grid, kernel exponent, scheme).
struct Weights {
    /// Integrated kernel weight per offset index; zero at the origin and
    /// inside the core.
    w: Vec<f64>,
    /// Offset indices with nonzero weight, for iteration.
    active: Vec<usize>,
    /// int_{|y|<r0} |y|^2 K(|y|) dy for the core model.
    core_i2: f64,
    /// int_{|y|<r0} |y|^4 K(|y|) dy (1-d refinement term).
    core_i4: f64,
    /// Tail bound multiplier: 4 * int_{|y|>R} K dy, zero in periodic mode.
    tail_per_sup: f64,
}

const IMAGE_SUM_RANGE: isize = 16;

fn build_weights(grid: &Grid, two_s: f64, scheme: &QuadratureScheme) -> Weights {
    let n = grid.n_points();
    let dim = grid.dim();
    let h = grid.spacing();
    let l = grid.period();
    let p = dim as f64 + two_s;
    let r0 = scheme.inner_cutoff;
    let mut w = vec![0.0f64; grid.len()];
    let mut tail_per_sup = 0.0;

    match scheme.tail_mode {
        TailMode::PeriodicSum => match dim {
            1 => {
                let m = IMAGE_SUM_RANGE as f64;
                for j in 1..n {
                    let y = grid.displacement(j)[0].abs();
                    if y < r0 {
                        continue;
                    }
                    // exact cell integral of |y|^{-p} for the principal image
                    let (a, b) = (y - h / 2.0, y + h / 2.0);
                    let mut wt = (a.powf(1.0 - p) - b.powf(1.0 - p)) / (p - 1.0);
                    // midpoint images plus integral tail
                    for im in 1..=IMAGE_SUM_RANGE {
                        let im = im as f64;
                        wt += h * ((im * l + y).powf(-p) + (im * l - y).powf(-p));
                    }
                    wt += h
                        * ((l * (m + 0.5) + y).powf(1.0 - p)
                            + (l * (m + 0.5) - y).powf(1.0 - p))
                        / ((p - 1.0) * l);
                    w[j] = wt;
                }
            }
            _ => {
                let mrange = 4isize; // images decay like |m|^{-p}, p > 2
                let m = mrange as f64;
                for j in 1..grid.len() {
                    let d = grid.displacement(j);
                    let r = (d[0] * d[0] + d[1] * d[1]).sqrt();
                    if r < r0 {
                        continue;
                    }
                    let mut k = 0.0;
                    for m1 in -mrange..=mrange {
                        for m2 in -mrange..=mrange {
                            let y1 = d[0] + m1 as f64 * l;
                            let y2 = d[1] + m2 as f64 * l;
                            k += (y1 * y1 + y2 * y2).sqrt().powf(-p);
                        }
                    }
                    // tail of the image sum: integral over |z| > (m+1/2)L
                    k += 2.0 * std::f64::consts::PI * ((m + 0.5) * l).powf(2.0 - p)
                        / ((p - 2.0) * l * l);
                    w[j] = h * h * k;
                }
            }
        },
        TailMode::Truncate { radius, .. } => {
            for j in 1..grid.len() {
                let d = grid.displacement(j);
                let r = (d[0] * d[0] + d[1] * d[1]).sqrt();
                if r < r0 || r > radius {
                    continue;
                }
                w[j] = h.powi(dim as i32) * r.powf(-p);
            }
            // 4 ||u|| * int_{|y|>R} |y|^{-n-2s} dy
            let surface = if dim == 1 { 2.0 } else { 2.0 * std::f64::consts::PI };
            tail_per_sup = 4.0 * surface * radius.powf(-two_s) / two_s;
        }
    }

    let surface = if dim == 1 { 2.0 } else { 2.0 * std::f64::consts::PI };
    let core_i2 = surface * r0.powf(2.0 - two_s) / (2.0 - two_s);
    let core_i4 = surface * r0.powf(4.0 - two_s) / (4.0 - two_s);
    let active = (0..grid.len()).filter(|&j| w[j] != 0.0).collect();
    Weights {
        w,
        active,
        core_i2,
        core_i4,
        tail_per_sup,
    }
}

fn check_tail(scheme: &QuadratureScheme, weights: &Weights, field: &ScalarField) -> Result<()> {
    if let TailMode::Truncate { tolerance, .. } = scheme.tail_mode {
        let bound = weights.tail_per_sup * field.max_abs();
        if bound > tolerance {
            return Err(Error::TailBound { bound, tolerance });
        }
    }
    Ok(())
}

/// Second differences along the positive coordinate axes at unit lattice
/// distance, used for the core model.
fn axis_deltas(field: &ScalarField, x: usize) -> [f64; 2] {
    let grid = field.grid();
    let d0 = second_difference(field, x, grid.flat_index([1, 0]));
    let d1 = if grid.dim() == 2 {
        second_difference(field, x, grid.flat_index([0, 1]))
    } else {
        0.0
    };
    [d0, d1]
}

/// (-Lap)^s u by principal-value quadrature of -(1/2) C_{n,s} delta u / |y|^{n+2s}.
pub fn frac_laplacian_quadrature(
    field: &ScalarField,
    s: FractionalOrder,
    scheme: &QuadratureScheme,
) -> Result<ScalarField> {
    let grid = field.grid();
    let weights = build_weights(&grid, 2.0 * s.value(), scheme);
    check_tail(scheme, &weights, field)?;
    let c = normalization_constant(grid.dim(), s);
    let h = grid.spacing();
    let dim = grid.dim();
    let n = grid.n_points();

    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|x| {
            let mut sum = 0.0;
            for &j in &weights.active {
                sum += second_difference(field, x, j) * weights.w[j];
            }
            let d = axis_deltas(field, x);
            let core = if dim == 1 {
                // quartic model: delta u = q y^2 + c4 y^4 from the two nearest
                // second differences
                let d2 = second_difference(field, x, grid.flat_index([2 % n, 0]));
                let q = (16.0 * d[0] - d2) / (12.0 * h * h);
                let c4 = (d2 - 4.0 * d[0]) / (12.0 * h.powi(4));
                q * weights.core_i2 + c4 * weights.core_i4
            } else {
                // radially averaged quadratic model (Lap u / n) |y|^2
                let lap = (d[0] + d[1]) / (h * h);
                0.5 * lap * weights.core_i2
            };
            -0.5 * c * (sum + core)
        })
        .collect();
    Ok(ScalarField::from_raw(grid, values))
}

/// Shared evaluation of order-one operators: (1/2) * sum over displacements
/// of term(j, delta u) * weight, plus the sign-resolved core. The closure
/// sees the lattice second difference and returns the kernel-weighted term;
/// using one accumulation order for every operator keeps the extremal
/// envelope exact in floating point.
fn order_one_eval<F>(field: &ScalarField, weights: &Weights, term: F) -> Vec<f64>
where
    F: Fn(usize, f64) -> f64 + Sync,
{
    let grid = field.grid();
    let h = grid.spacing();
    let dim = grid.dim();
    let axis_offsets = [grid.flat_index([1, 0]), grid.flat_index([0, 1])];
    (0..grid.len())
        .into_par_iter()
        .map(|x| {
            let mut sum = 0.0;
            for &j in &weights.active {
                sum += term(j, second_difference(field, x, j)) * weights.w[j];
            }
            // core: per-axis quadratic model, kernel evaluated at the nearest
            // axis displacement so that the adapted kernel attains M+ exactly
            let d = axis_deltas(field, x);
            let scale = weights.core_i2 / (dim as f64 * h * h);
            for axis in 0..dim {
                sum += term(axis_offsets[axis], d[axis]) * scale;
            }
            0.5 * sum
        })
        .collect()
}

/// L_a u with a symmetric kernel of order one:
/// (1/2) int delta u(x,y) a(y) / |y|^{n+1} dy.
pub fn linear_operator(
    field: &ScalarField,
    kernel: &KernelSpec,
    scheme: &QuadratureScheme,
) -> Result<ScalarField> {
    let grid = field.grid();
    if kernel.grid() != grid {
        return Err(Error::InvalidKernel("kernel grid differs from field grid".into()));
    }
    let weights = build_weights(&grid, 1.0, scheme);
    check_tail(scheme, &weights, field)?;
    let values = order_one_eval(field, &weights, |j, d| kernel.value(j) * d);
    Ok(ScalarField::from_raw(grid, values))
}

/// M+ u = (1/2) int (Lambda delta u^+ - lambda delta u^-) / |y|^{n+1} dy.
pub fn extremal_plus(
    field: &ScalarField,
    bounds: EllipticityBounds,
    scheme: &QuadratureScheme,
) -> Result<ScalarField> {
    let weights = build_weights(&field.grid(), 1.0, scheme);
    check_tail(scheme, &weights, field)?;
    let (lo, hi) = (bounds.lambda(), bounds.big_lambda());
    let values = order_one_eval(field, &weights, |_, d| {
        if d > 0.0 {
            hi * d
        } else {
            lo * d
        }
    });
    Ok(ScalarField::from_raw(field.grid(), values))
}

/// M- u = (1/2) int (lambda delta u^+ - Lambda delta u^-) / |y|^{n+1} dy.
pub fn extremal_minus(
    field: &ScalarField,
    bounds: EllipticityBounds,
    scheme: &QuadratureScheme,
) -> Result<ScalarField> {
    let weights = build_weights(&field.grid(), 1.0, scheme);
    check_tail(scheme, &weights, field)?;
    let (lo, hi) = (bounds.lambda(), bounds.big_lambda());
    let values = order_one_eval(field, &weights, |_, d| {
        if d > 0.0 {
            lo * d
        } else {
            hi * d
        }
    });
    Ok(ScalarField::from_raw(field.grid(), values))
}

/// Bound on the coefficient of u(x) in L_a u: half the total integrated
/// kernel mass, including the core contribution. An explicit Euler step of
/// u_t = L_a u is monotone when dt * 2 * mass <= 1.
pub(crate) fn operator_mass(kernel: &KernelSpec, scheme: &QuadratureScheme) -> f64 {
    let grid = kernel.grid();
    let weights = build_weights(&grid, 1.0, scheme);
    let h = grid.spacing();
    let dim = grid.dim();
    let mut m = 0.0;
    for &j in &weights.active {
        m += kernel.value(j) * weights.w[j];
    }
    let scale = weights.core_i2 / (dim as f64 * h * h);
    m += kernel.value(grid.flat_index([1, 0])) * scale;
    if dim == 2 {
        m += kernel.value(grid.flat_index([0, 1])) * scale;
    }
    0.5 * m
}

/// The admissible kernel that realizes M+ u at one point: Lambda where
/// delta u(x,y) > 0 and lambda elsewhere. Symmetric because delta u is even
/// in y.
pub fn adapted_kernel(
    field: &ScalarField,
    x_index: usize,
    bounds: EllipticityBounds,
) -> Result<KernelSpec> {
    let grid = field.grid();
    let values: Vec<f64> = (0..grid.len())
        .map(|j| {
            if j != 0 && second_difference(field, x_index, j) > 0.0 {
                bounds.big_lambda()
            } else {
                bounds.lambda()
            }
        })
        .collect();
    KernelSpec::from_values(grid, bounds, values)
}

/// Centered-difference gradient, one component per axis.
pub fn gradient(field: &ScalarField) -> Vec<ScalarField> {
    let grid = field.grid();
    let h2 = 2.0 * grid.spacing();
    (0..grid.dim())
        .map(|axis| {
            let off: [isize; 2] = if axis == 0 { [1, 0] } else { [0, 1] };
            let values = (0..grid.len())
                .map(|i| {
                    (field.value(grid.shifted(i, off))
                        - field.value(grid.shifted(i, [-off[0], -off[1]])))
                        / h2
                })
                .collect();
            ScalarField::from_raw(grid, values)
        })
        .collect()
}

pub fn gradient_magnitude(field: &ScalarField) -> ScalarField {
    let grid = field.grid();
    let comps = gradient(field);
    let values = (0..grid.len())
        .map(|i| {
            comps
                .iter()
                .map(|c| c.value(i) * c.value(i))
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    ScalarField::from_raw(grid, values)
}

/// One-sided difference pair (backward p-, forward p+) along an axis, for the
/// monotone schemes.
pub fn one_sided_gradients(field: &ScalarField, axis: usize) -> (ScalarField, ScalarField) {
    let grid = field.grid();
    let h = grid.spacing();
    let off: [isize; 2] = if axis == 0 { [1, 0] } else { [0, 1] };
    let mut back = Vec::with_capacity(grid.len());
    let mut fwd = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let u = field.value(i);
        back.push((u - field.value(grid.shifted(i, [-off[0], -off[1]]))) / h);
        fwd.push((field.value(grid.shifted(i, off)) - u) / h);
    }
    (
        ScalarField::from_raw(grid, back),
        ScalarField::from_raw(grid, fwd),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn grid1(n: usize) -> Grid {
        Grid::new(1, n, 2.0 * PI).unwrap()
    }

    fn s(v: f64) -> FractionalOrder {
        FractionalOrder::new(v).unwrap()
    }

    #[test]
    fn normalization_matches_known_value() {
        // C_{1,1/2} = 1/pi
        assert_abs_diff_eq!(normalization_constant(1, s(0.5)), 1.0 / PI, epsilon = 1e-14);
    }

    #[test]
    fn second_difference_basics() {
        let g = grid1(8);
        let c = ScalarField::constant(g, 4.0);
        assert_eq!(second_difference(&c, 3, 2), 0.0);

        let f = ScalarField::sample(g, |p| p[0].cos()).unwrap();
        // x = 0, y = pi/2 (offset 2 on an 8-point grid)
        assert_abs_diff_eq!(second_difference(&f, 0, 2), -2.0, epsilon = 1e-15);
    }

    #[test]
    fn second_difference_even_in_y() {
        let g = grid1(16);
        let f = ScalarField::sample(g, |p| (2.0 * p[0]).sin() + p[0].cos()).unwrap();
        for x in 0..16 {
            for j in 1..16 {
                let neg = mirror_offset(&g, j);
                assert_eq!(
                    second_difference(&f, x, j),
                    second_difference(&f, x, neg)
                );
            }
        }
    }

    #[test]
    fn spectral_on_single_modes() {
        let g = grid1(64);
        let c = ScalarField::constant(g, 2.0);
        let out = frac_laplacian_spectral(&c, s(0.5)).unwrap();
        assert!(out.max_abs() < 1e-13);

        let f = ScalarField::sample(g, |p| p[0].cos()).unwrap();
        let out = frac_laplacian_spectral(&f, s(0.5)).unwrap();
        for i in 0..64 {
            assert_abs_diff_eq!(out.value(i), f.value(i), epsilon = 1e-12);
        }

        let f3 = ScalarField::sample(g, |p| (3.0 * p[0]).cos()).unwrap();
        let out = frac_laplacian_spectral(&f3, s(0.5)).unwrap();
        for i in 0..64 {
            assert_abs_diff_eq!(out.value(i), 3.0 * f3.value(i), epsilon = 1e-11);
        }
    }

    #[test]
    fn quadrature_constant_is_zero() {
        let g = grid1(64);
        let c = ScalarField::constant(g, 7.0);
        let scheme = QuadratureScheme::default_for(&g);
        let out = frac_laplacian_quadrature(&c, s(0.5), &scheme).unwrap();
        assert_eq!(out.max_abs(), 0.0);
    }

    #[test]
    fn quadrature_matches_spectral_oracle() {
        let g = grid1(256);
        let h = g.spacing();
        let scheme = QuadratureScheme::default_for(&g);
        let f = ScalarField::sample(g, |p| p[0].cos()).unwrap();
        let q = frac_laplacian_quadrature(&f, s(0.5), &scheme).unwrap();
        let sp = frac_laplacian_spectral(&f, s(0.5)).unwrap();
        let err = (0..256)
            .map(|i| (q.value(i) - sp.value(i)).abs())
            .fold(0.0f64, f64::max);
        assert!(err < 10.0 * h, "err = {err}");

        let mixed = ScalarField::sample(g, |p| p[0].cos() + (2.0 * p[0]).cos()).unwrap();
        let q = frac_laplacian_quadrature(&mixed, s(0.25), &scheme).unwrap();
        let sp = frac_laplacian_spectral(&mixed, s(0.25)).unwrap();
        let err = (0..256)
            .map(|i| (q.value(i) - sp.value(i)).abs())
            .fold(0.0f64, f64::max);
        assert!(err < 10.0 * h, "err = {err}");
    }

    #[test]
    fn quadrature_refinement_rate() {
        // spectral/quadrature gap shrinks at least first order in h
        let scheme_err = |n: usize| {
            let g = grid1(n);
            let f = ScalarField::sample(g, |p| p[0].cos() + (2.0 * p[0]).cos()).unwrap();
            let scheme = QuadratureScheme::default_for(&g);
            let q = frac_laplacian_quadrature(&f, s(0.25), &scheme).unwrap();
            let sp = frac_laplacian_spectral(&f, s(0.25)).unwrap();
            (0..n)
                .map(|i| (q.value(i) - sp.value(i)).abs())
                .fold(0.0f64, f64::max)
        };
        let e1 = scheme_err(64);
        let e2 = scheme_err(128);
        let e3 = scheme_err(256);
        let rate1 = (e1 / e2).log2();
        let rate2 = (e2 / e3).log2();
        assert!(rate1 >= 1.0, "rate {rate1} from {e1} -> {e2}");
        assert!(rate2 >= 1.0, "rate {rate2} from {e2} -> {e3}");
    }

    #[test]
    fn quadrature_2d_matches_spectral() {
        let g = Grid::new(2, 32, 2.0 * PI).unwrap();
        let f = ScalarField::sample(g, |p| p[0].cos() + p[1].sin()).unwrap();
        let scheme = QuadratureScheme::default_for(&g);
        let q = frac_laplacian_quadrature(&f, s(0.5), &scheme).unwrap();
        let sp = frac_laplacian_spectral(&f, s(0.5)).unwrap();
        let err = (0..g.len())
            .map(|i| (q.value(i) - sp.value(i)).abs())
            .fold(0.0f64, f64::max);
        assert!(err < 20.0 * g.spacing(), "err = {err}");
    }

    #[test]
    fn truncate_mode_reports_tail_bound() {
        let g = grid1(128);
        let f = ScalarField::sample(g, |p| p[0].cos()).unwrap();
        let tight = QuadratureScheme::new(
            &g,
            1.5 * g.spacing(),
            TailMode::Truncate {
                radius: 1.0,
                tolerance: 1e-6,
            },
        )
        .unwrap();
        assert!(matches!(
            frac_laplacian_quadrature(&f, s(0.5), &tight),
            Err(Error::TailBound { .. })
        ));
        let loose = QuadratureScheme::new(
            &g,
            1.5 * g.spacing(),
            TailMode::Truncate {
                radius: 1.0,
                tolerance: 100.0,
            },
        )
        .unwrap();
        assert!(frac_laplacian_quadrature(&f, s(0.5), &loose).is_ok());
    }

    #[test]
    fn linear_operator_with_constant_kernel_is_minus_fraclap() {
        let g = grid1(128);
        let f = ScalarField::sample(g, |p| (2.0 * p[0]).cos()).unwrap();
        let scheme = QuadratureScheme::default_for(&g);
        let c = normalization_constant(1, s(0.5));
        let bounds = EllipticityBounds::new(c, c).unwrap();
        let kernel = KernelSpec::new(g, bounds, |_| c).unwrap();
        let la = linear_operator(&f, &kernel, &scheme).unwrap();
        let fl = frac_laplacian_quadrature(&f, s(0.5), &scheme).unwrap();
        // same lattice sum, cores differ by the quartic refinement term
        for i in 0..128 {
            assert_abs_diff_eq!(la.value(i), -fl.value(i), epsilon = 1e-3);
        }
    }

    #[test]
    fn extremal_collapse_when_lambda_equals_big_lambda() {
        let g = grid1(128);
        let f = ScalarField::sample(g, |p| p[0].sin() + 0.4 * (3.0 * p[0]).cos()).unwrap();
        let scheme = QuadratureScheme::default_for(&g);
        let c = normalization_constant(1, s(0.5));
        let bounds = EllipticityBounds::new(c, c).unwrap();
        let mp = extremal_plus(&f, bounds, &scheme).unwrap();
        let mm = extremal_minus(&f, bounds, &scheme).unwrap();
        let fl = frac_laplacian_quadrature(&f, s(0.5), &scheme).unwrap();
        for i in 0..128 {
            assert_eq!(mp.value(i), mm.value(i));
            assert_abs_diff_eq!(mp.value(i), -fl.value(i), epsilon = 1e-3);
        }
    }

    #[test]
    fn extremal_duality() {
        let g = grid1(64);
        let f = ScalarField::sample(g, |p| (2.0 * p[0]).sin() - 0.3 * p[0].cos()).unwrap();
        let neg = f.map(|v| -v).unwrap();
        let bounds = EllipticityBounds::new(0.5, 2.0).unwrap();
        let scheme = QuadratureScheme::default_for(&g);
        let mp_neg = extremal_plus(&neg, bounds, &scheme).unwrap();
        let mm = extremal_minus(&f, bounds, &scheme).unwrap();
        for i in 0..64 {
            assert_eq!(mp_neg.value(i), -mm.value(i));
        }
    }

    #[test]
    fn ellipticity_sandwich_and_adapted_kernel() {
        let g = grid1(64);
        let f = ScalarField::sample(g, |p| p[0].sin() + 0.5 * (2.0 * p[0]).cos()).unwrap();
        let bounds = EllipticityBounds::new(0.7, 1.9).unwrap();
        let scheme = QuadratureScheme::default_for(&g);
        let mp = extremal_plus(&f, bounds, &scheme).unwrap();
        let mm = extremal_minus(&f, bounds, &scheme).unwrap();

        let mut rng_state = 42u64;
        let mut next = move || {
            rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1);
            (rng_state >> 33) as f64 / (1u64 << 31) as f64
        };
        for _ in 0..16 {
            // random admissible symmetric kernel
            let mut values = vec![bounds.lambda(); g.len()];
            for j in 1..=g.len() / 2 {
                let v = bounds.lambda() + (bounds.big_lambda() - bounds.lambda()) * next();
                values[j] = v;
                values[mirror_offset(&g, j)] = v;
            }
            let kernel = KernelSpec::from_values(g, bounds, values).unwrap();
            let la = linear_operator(&f, &kernel, &scheme).unwrap();
            for i in 0..64 {
                assert!(mm.value(i) <= la.value(i) && la.value(i) <= mp.value(i));
            }
        }
        // the adapted kernel attains M+ pointwise
        for i in (0..64).step_by(7) {
            let ak = adapted_kernel(&f, i, bounds).unwrap();
            let la = linear_operator(&f, &ak, &scheme).unwrap();
            assert_abs_diff_eq!(la.value(i), mp.value(i), epsilon = 1e-13 * mp.value(i).abs().max(1.0));
        }
    }

    #[test]
    fn kernel_spec_rejects_asymmetry_and_bounds() {
        let g = grid1(8);
        let bounds = EllipticityBounds::new(1.0, 2.0).unwrap();
        assert!(KernelSpec::new(g, bounds, |y| 1.5 + 0.4 * y[0]).is_err()); // odd part
        assert!(KernelSpec::new(g, bounds, |_| 5.0).is_err()); // above Lambda
        assert!(KernelSpec::new(g, bounds, |_| 1.5).is_ok());
    }

    #[test]
    fn operators_commute_with_lattice_shifts() {
        let g = grid1(32);
        let f = ScalarField::sample(g, |p| (2.0 * p[0]).sin() + 0.2 * (5.0 * p[0]).cos()).unwrap();
        let shift = [9isize, 0];
        let bounds = EllipticityBounds::new(0.5, 1.5).unwrap();
        let scheme = QuadratureScheme::default_for(&g);
        let a = extremal_plus(&f.shifted(shift), bounds, &scheme).unwrap();
        let b = extremal_plus(&f, bounds, &scheme).unwrap().shifted(shift);
        assert_eq!(a.values(), b.values());
        let a = frac_laplacian_quadrature(&f.shifted(shift), s(0.3), &scheme).unwrap();
        let b = frac_laplacian_quadrature(&f, s(0.3), &scheme)
            .unwrap()
            .shifted(shift);
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn gradient_basics() {
        let g = grid1(256);
        let c = ScalarField::constant(g, 1.0);
        assert_eq!(gradient(&c)[0].max_abs(), 0.0);

        let f = ScalarField::sample(g, |p| p[0].sin()).unwrap();
        let gr = gradient(&f);
        let h = g.spacing();
        for i in 0..256 {
            let x = g.point(i)[0];
            assert_abs_diff_eq!(gr[0].value(i), x.cos(), epsilon = h * h);
        }
    }

    #[test]
    fn one_sided_differ_across_sawtooth_jump() {
        let g = grid1(16);
        // linear in index, periodic jump between the last and first point
        let f = ScalarField::sample(g, |p| p[0]).unwrap();
        let (back, fwd) = one_sided_gradients(&f, 0);
        assert_abs_diff_eq!(back.value(1), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fwd.value(1), 1.0, epsilon = 1e-12);
        // at the wrap point the one-sided values disagree
        assert!((back.value(0) - fwd.value(0)).abs() > 1.0);
    }
}
