//! Periodic lattices, scalar and space-time fields, parabolic cylinders and
//! field file I/O.
//!
//! All fields live on a flat torus: a uniform lattice with `n_points` per axis
//! (a power of two, so spectral transforms apply) and physical period `L`.
//! Values are stored row-major. Everything here is immutable after
//! construction and safe to share across threads.

use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A periodic uniform lattice in one or two dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    n_points: usize,
    period: f64,
}

impl Grid {
    pub fn new(dim: usize, n_points: usize, period: f64) -> Result<Grid> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!("dim must be 1 or 2, got {dim}")));
        }
        if n_points < 8 || !n_points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n_points must be a power of two >= 8, got {n_points}"
            )));
        }
        if !(period > 0.0) || !period.is_finite() {
            return Err(Error::InvalidGrid(format!("period must be > 0, got {period}")));
        }
        Ok(Grid { dim, n_points, period })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.n_points as f64
    }

    /// Total number of lattice points, `n_points^dim`.
    pub fn len(&self) -> usize {
        self.n_points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Row-major lattice coordinates of a flat index. The second entry is 0
    /// in one dimension.
    pub fn coords(&self, index: usize) -> [usize; 2] {
        match self.dim {
            1 => [index, 0],
            _ => [index / self.n_points, index % self.n_points],
        }
    }

    pub fn flat_index(&self, coords: [usize; 2]) -> usize {
        match self.dim {
            1 => coords[0] % self.n_points,
            _ => (coords[0] % self.n_points) * self.n_points + (coords[1] % self.n_points),
        }
    }

    /// Physical position of a lattice point. The second entry is 0 in 1-d.
    pub fn point(&self, index: usize) -> [f64; 2] {
        let c = self.coords(index);
        let h = self.spacing();
        [c[0] as f64 * h, c[1] as f64 * h]
    }

    /// Flat index shifted by signed lattice offsets with torus wraparound.
    pub fn shifted(&self, index: usize, offset: [isize; 2]) -> usize {
        let n = self.n_points as isize;
        let c = self.coords(index);
        let a = (c[0] as isize + offset[0]).rem_euclid(n) as usize;
        let b = (c[1] as isize + offset[1]).rem_euclid(n) as usize;
        self.flat_index([a, b])
    }

    /// Signed distance along one axis, wrapped into (-L/2, L/2].
    pub fn wrap(&self, d: f64) -> f64 {
        let l = self.period;
        let mut r = d % l;
        if r > l / 2.0 {
            r -= l;
        } else if r <= -l / 2.0 {
            r += l;
        }
        r
    }

    /// Torus distance between two physical points (per-axis wrap, Euclidean).
    pub fn torus_distance(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        let dx = self.wrap(a[0] - b[0]);
        let dy = if self.dim == 2 { self.wrap(a[1] - b[1]) } else { 0.0 };
        (dx * dx + dy * dy).sqrt()
    }

    /// Displacement vector of a lattice offset index, representative in
    /// (-L/2, L/2] per axis. The offset index runs over the same flat lattice.
    pub fn displacement(&self, offset_index: usize) -> [f64; 2] {
        let p = self.point(offset_index);
        [
            self.wrap(p[0]),
            if self.dim == 2 { self.wrap(p[1]) } else { 0.0 },
        ]
    }

    /// Signed lattice offsets of an offset index, each in (-N/2, N/2].
    pub fn offset_coords(&self, offset_index: usize) -> [isize; 2] {
        let n = self.n_points as isize;
        let c = self.coords(offset_index);
        let f = |v: isize| if v > n / 2 { v - n } else { v };
        [
            f(c[0] as isize),
            if self.dim == 2 { f(c[1] as isize) } else { 0 },
        ]
    }
}

/// Real-valued samples on a [`Grid`], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<ScalarField> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { index: i, value: *v });
            }
        }
        Ok(ScalarField { grid, values })
    }

    pub fn constant(grid: Grid, value: f64) -> ScalarField {
        ScalarField {
            grid,
            values: vec![value; grid.len()],
        }
    }

    /// Sample a closed form at the lattice points.
    pub fn sample<F: Fn([f64; 2]) -> f64>(grid: Grid, f: F) -> Result<ScalarField> {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.len() {
            let v = f(grid.point(i));
            if !v.is_finite() {
                return Err(Error::NonFinite { index: i, value: v });
            }
            values.push(v);
        }
        Ok(ScalarField { grid, values })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, index: usize) -> f64 {
        self.values[index]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    /// Map values pointwise; the closure must return finite values.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Result<ScalarField> {
        ScalarField::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn shifted(&self, offset: [isize; 2]) -> ScalarField {
        let values = (0..self.grid.len())
            .map(|i| self.values[self.grid.shifted(i, offset)])
            .collect();
        ScalarField {
            grid: self.grid,
            values,
        }
    }

    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> ScalarField {
        debug_assert_eq!(values.len(), grid.len());
        ScalarField { grid, values }
    }
}

/// A time-stamped sequence of scalar fields on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    grid: Grid,
    times: Vec<f64>,
    frames: Vec<ScalarField>,
}

impl SpaceTimeField {
    pub fn new(times: Vec<f64>, frames: Vec<ScalarField>) -> Result<SpaceTimeField> {
        if times.is_empty() || times.len() != frames.len() {
            return Err(Error::InvalidParameter(format!(
                "times ({}) and frames ({}) must be equal and nonempty",
                times.len(),
                frames.len()
            )));
        }
        if !(times[0] >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "first time must be >= 0, got {}",
                times[0]
            )));
        }
        for w in times.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidParameter(format!(
                    "times must be strictly increasing ({} then {})",
                    w[0], w[1]
                )));
            }
        }
        let grid = frames[0].grid();
        for f in &frames {
            if f.grid() != grid {
                return Err(Error::InvalidParameter(
                    "all frames must share one grid".into(),
                ));
            }
        }
        Ok(SpaceTimeField { grid, times, frames })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn frames(&self) -> &[ScalarField] {
        &self.frames
    }

    pub fn frame(&self, k: usize) -> &ScalarField {
        &self.frames[k]
    }

    /// Index of the stored frame closest to `t`.
    pub fn nearest_frame(&self, t: f64) -> usize {
        let mut best = 0;
        let mut bd = f64::INFINITY;
        for (k, &tk) in self.times.iter().enumerate() {
            let d = (tk - t).abs();
            if d < bd {
                bd = d;
                best = k;
            }
        }
        best
    }
}

/// The window Q_r(x0, t0) = B_r(x0) x [t0 - r, t0].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParabolicCylinder {
    pub center_x: [f64; 2],
    pub center_t: f64,
    pub radius: f64,
}

impl ParabolicCylinder {
    pub fn new(center_x: [f64; 2], center_t: f64, radius: f64) -> Result<ParabolicCylinder> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "cylinder radius must be > 0, got {radius}"
            )));
        }
        Ok(ParabolicCylinder {
            center_x,
            center_t,
            radius,
        })
    }

    fn check_fits(&self, grid: &Grid) -> Result<()> {
        if self.radius > grid.period() / 2.0 + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "cylinder radius {} exceeds period/2 = {}",
                self.radius,
                grid.period() / 2.0
            )));
        }
        Ok(())
    }
}

/// Whether cylinders whose time window extends past the stored frames are
/// clamped to the available range. Clamping must be requested explicitly;
/// with `Strict` a window that misses every frame is an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeWindow {
    Strict,
    Clamp,
}

/// max - min over the lattice points of a ball, ignoring time.
pub fn oscillation(field: &ScalarField, cylinder: &ParabolicCylinder) -> Result<f64> {
    let grid = field.grid();
    cylinder.check_fits(&grid)?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..grid.len() {
        if grid.torus_distance(grid.point(i), cylinder.center_x) <= cylinder.radius {
            let v = field.value(i);
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if lo > hi {
        return Err(Error::EmptyWindow("ball contains no lattice points".into()));
    }
    Ok(hi - lo)
}

/// max - min over lattice points with x in B_r(x0) and t in [t0 - r, t0].
pub fn oscillation_spacetime(
    field: &SpaceTimeField,
    cylinder: &ParabolicCylinder,
    window: TimeWindow,
) -> Result<f64> {
    let grid = field.grid();
    cylinder.check_fits(&grid)?;
    let (mut t_lo, t_hi) = (cylinder.center_t - cylinder.radius, cylinder.center_t);
    if window == TimeWindow::Clamp {
        t_lo = t_lo.max(field.times()[0]);
    }
    let eps = 1e-12 * (1.0 + t_hi.abs());
    let mask: Vec<usize> = (0..grid.len())
        .filter(|&i| grid.torus_distance(grid.point(i), cylinder.center_x) <= cylinder.radius)
        .collect();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (k, &t) in field.times().iter().enumerate() {
        if t < t_lo - eps || t > t_hi + eps {
            continue;
        }
        let frame = field.frame(k);
        for &i in &mask {
            let v = frame.value(i);
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if lo > hi {
        return Err(Error::EmptyWindow(format!(
            "cylinder time window [{t_lo}, {t_hi}] misses all frames"
        )));
    }
    Ok(hi - lo)
}

// ---------------------------------------------------------------------------
// File I/O: one JSON header line, then raw little-endian f64 payload.
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct FieldHeader {
    dim: usize,
    n_points: usize,
    period: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    times: Option<Vec<f64>>,
}

/// A scalar field or a space-time field, as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldData {
    Scalar(ScalarField),
    SpaceTime(SpaceTimeField),
}

impl FieldData {
    pub fn grid(&self) -> Grid {
        match self {
            FieldData::Scalar(f) => f.grid(),
            FieldData::SpaceTime(f) => f.grid(),
        }
    }
}

pub fn write_field<P: AsRef<Path>>(path: P, field: &FieldData) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    let (header, frames): (FieldHeader, Vec<&ScalarField>) = match field {
        FieldData::Scalar(f) => (
            FieldHeader {
                dim: f.grid().dim(),
                n_points: f.grid().n_points(),
                period: f.grid().period(),
                times: None,
            },
            vec![f],
        ),
        FieldData::SpaceTime(f) => (
            FieldHeader {
                dim: f.grid().dim(),
                n_points: f.grid().n_points(),
                period: f.grid().period(),
                times: Some(f.times().to_vec()),
            },
            f.frames().iter().collect(),
        ),
    };
    let mut line = serde_json::to_string(&header).map_err(|e| Error::Format(e.to_string()))?;
    line.push('\n');
    w.write_all(line.as_bytes())?;
    for frame in frames {
        for v in frame.values() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_field<P: AsRef<Path>>(path: P) -> Result<FieldData> {
    let file = std::fs::File::open(path)?;
    let mut r = BufReader::new(file);
    let mut line = String::new();
    r.read_line(&mut line)?;
    let header: FieldHeader = serde_json::from_str(line.trim_end())
        .map_err(|e| Error::Format(format!("malformed header: {e}")))?;
    let grid = Grid::new(header.dim, header.n_points, header.period)?;
    let n_frames = header.times.as_ref().map_or(1, Vec::len);
    let expected = grid.len() * n_frames;
    let mut payload = Vec::new();
    r.read_to_end(&mut payload)?;
    if payload.len() != expected * 8 {
        return Err(Error::LengthMismatch {
            expected,
            got: payload.len() / 8,
        });
    }
    let mut values = Vec::with_capacity(expected);
    for chunk in payload.chunks_exact(8) {
        values.push(f64::from_le_bytes(chunk.try_into().unwrap()));
    }
    match header.times {
        None => Ok(FieldData::Scalar(ScalarField::new(grid, values)?)),
        Some(times) => {
            let mut frames = Vec::with_capacity(times.len());
            for chunk in values.chunks_exact(grid.len()) {
                frames.push(ScalarField::new(grid, chunk.to_vec())?);
            }
            Ok(FieldData::SpaceTime(SpaceTimeField::new(times, frames)?))
        }
    }
}

/// CSV export: one row per lattice point, coordinate columns then one value
/// column per time.
pub fn write_csv<W: Write>(out: &mut W, field: &FieldData) -> Result<()> {
    let grid = field.grid();
    let (times, frames): (Vec<f64>, Vec<&ScalarField>) = match field {
        FieldData::Scalar(f) => (vec![0.0], vec![f]),
        FieldData::SpaceTime(f) => (f.times().to_vec(), f.frames().iter().collect()),
    };
    let mut header: Vec<String> = (0..grid.dim()).map(|a| format!("x{a}")).collect();
    for t in &times {
        header.push(format!("t={t}"));
    }
    writeln!(out, "{}", header.join(","))?;
    for i in 0..grid.len() {
        let p = grid.point(i);
        let mut row: Vec<String> = (0..grid.dim()).map(|a| format!("{}", p[a])).collect();
        for f in &frames {
            row.push(format!("{}", f.value(i)));
        }
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn grid1(n: usize) -> Grid {
        Grid::new(1, n, 2.0 * PI).unwrap()
    }

    #[test]
    fn make_grid_spacing() {
        let g = grid1(256);
        assert_abs_diff_eq!(g.spacing(), 2.0 * PI / 256.0);
        let g2 = Grid::new(2, 8, 1.0).unwrap();
        assert_abs_diff_eq!(g2.spacing(), 0.125);
        assert_eq!(g2.len(), 64);
    }

    #[test]
    fn make_grid_rejects_bad_input() {
        assert!(Grid::new(1, 100, 1.0).is_err());
        assert!(Grid::new(3, 64, 1.0).is_err());
        assert!(Grid::new(1, 4, 1.0).is_err());
        assert!(Grid::new(1, 64, 0.0).is_err());
    }

    #[test]
    fn sample_constant_and_cos() {
        let g = grid1(8);
        let z = ScalarField::sample(g, |_| 0.0).unwrap();
        assert!(z.values().iter().all(|&v| v == 0.0));
        let c = ScalarField::sample(g, |p| p[0].cos()).unwrap();
        for k in 0..8 {
            assert_abs_diff_eq!(c.value(k), (2.0 * PI * k as f64 / 8.0).cos(), epsilon = 1e-15);
        }
    }

    #[test]
    fn sample_2d_separable() {
        let g = Grid::new(2, 8, 2.0 * PI).unwrap();
        let f = ScalarField::sample(g, |p| p[0].sin() * p[1].sin()).unwrap();
        let gx = grid1(8);
        let a = ScalarField::sample(gx, |p| p[0].sin()).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                assert_abs_diff_eq!(
                    f.value(g.flat_index([i, j])),
                    a.value(i) * a.value(j),
                    epsilon = 1e-15
                );
            }
        }
    }

    #[test]
    fn sample_rejects_non_finite() {
        let g = grid1(8);
        let r = ScalarField::sample(g, |p| if p[0] > 3.0 { f64::NAN } else { 0.0 });
        assert!(matches!(r, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn oscillation_constant_and_cos() {
        let g = grid1(256);
        let c = ScalarField::constant(g, 3.25);
        let cyl = ParabolicCylinder::new([1.0, 0.0], 0.0, 0.5).unwrap();
        assert_eq!(oscillation(&c, &cyl).unwrap(), 0.0);

        let f = ScalarField::sample(g, |p| p[0].cos()).unwrap();
        let whole = ParabolicCylinder::new([0.0, 0.0], 0.0, PI).unwrap();
        assert_abs_diff_eq!(oscillation(&f, &whole).unwrap(), 2.0, epsilon = 1e-12);

        // B_{pi/4}(0): max = cos(0) = 1, min = cos at the ball edge
        let ball = ParabolicCylinder::new([0.0, 0.0], 0.0, PI / 4.0).unwrap();
        let osc = oscillation(&f, &ball).unwrap();
        // oracle: direct max/min over lattice points within the ball
        let h = g.spacing();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for k in 0..256 {
            let x = k as f64 * h;
            let d = x.min(2.0 * PI - x);
            if d <= PI / 4.0 {
                lo = lo.min(x.cos());
                hi = hi.max(x.cos());
            }
        }
        assert_abs_diff_eq!(osc, hi - lo, epsilon = 1e-15);
        assert_abs_diff_eq!(osc, 1.0 - (PI / 4.0).cos(), epsilon = 2.0 * h);
    }

    #[test]
    fn oscillation_monotone_in_radius() {
        let g = grid1(64);
        let f = ScalarField::sample(g, |p| (2.0 * p[0]).sin() + 0.3 * p[0].cos()).unwrap();
        let mut prev = 0.0;
        for k in 1..=8 {
            let r = k as f64 * PI / 8.0;
            let cyl = ParabolicCylinder::new([2.0, 0.0], 0.0, r).unwrap();
            let o = oscillation(&f, &cyl).unwrap();
            assert!(o >= prev - 1e-15);
            prev = o;
        }
    }

    #[test]
    fn spacetime_oscillation_strict_window() {
        let g = grid1(32);
        let frames = vec![
            ScalarField::constant(g, 0.0),
            ScalarField::constant(g, 1.0),
            ScalarField::constant(g, 5.0),
        ];
        let stf = SpaceTimeField::new(vec![0.0, 1.0, 2.0], frames).unwrap();
        // window [0.0, 1.0] catches the first two frames
        let cyl = ParabolicCylinder::new([0.0, 0.0], 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(
            oscillation_spacetime(&stf, &cyl, TimeWindow::Strict).unwrap(),
            1.0
        );
        // window [9, 10] misses everything: error, not zero
        let miss = ParabolicCylinder::new([0.0, 0.0], 10.0, 1.0).unwrap();
        assert!(matches!(
            oscillation_spacetime(&stf, &miss, TimeWindow::Strict),
            Err(Error::EmptyWindow(_))
        ));
    }

    #[test]
    fn oscillation_translation_invariant() {
        let g = grid1(64);
        let f = ScalarField::sample(g, |p| (3.0 * p[0]).sin()).unwrap();
        let shift = 5isize;
        let fs = f.shifted([shift, 0]);
        let cyl = ParabolicCylinder::new([1.0, 0.0], 0.0, 0.7).unwrap();
        let moved = ParabolicCylinder::new(
            [1.0 - shift as f64 * g.spacing(), 0.0],
            0.0,
            0.7,
        )
        .unwrap();
        assert_abs_diff_eq!(
            oscillation(&f, &cyl).unwrap(),
            oscillation(&fs, &moved).unwrap(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn io_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = grid1(32);
        let f = ScalarField::sample(g, |p| p[0].cos()).unwrap();
        let path = dir.path().join("f.field");
        write_field(&path, &FieldData::Scalar(f.clone())).unwrap();
        let back = read_field(&path).unwrap();
        assert_eq!(back, FieldData::Scalar(f));

        let z = ScalarField::constant(g, 0.0);
        let p2 = dir.path().join("z.field");
        write_field(&p2, &FieldData::Scalar(z.clone())).unwrap();
        assert_eq!(read_field(&p2).unwrap(), FieldData::Scalar(z));
    }

    #[test]
    fn io_truncated_payload_is_length_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let g = grid1(32);
        let f = ScalarField::sample(g, |p| p[0].sin()).unwrap();
        let path = dir.path().join("f.field");
        write_field(&path, &FieldData::Scalar(f)).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 8]).unwrap();
        assert!(matches!(
            read_field(&path),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn io_malformed_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.field");
        std::fs::write(&path, b"not json\n").unwrap();
        assert!(matches!(read_field(&path), Err(Error::Format(_))));
    }
}
