//! Scalar fields on uniform N-dimensional grids and the functionals used by
//! the estimates: total variation, its mollifier characterization, shifted
//! L¹ differences, L¹ distances and supports.
//!
//! Values are cell samples indexed row-major (last axis fastest). Outside the
//! grid a field is extended by zero. All reductions run in lexicographic cell
//! order with compensated accumulation, so results do not depend on thread
//! count.

pub mod io;

use serde::{Deserialize, Serialize};

use crate::constants::MollifierProfile;
use crate::error::{Error, Result};
use crate::sum::KahanSum;

/// Upper bound on the number of cells of a [`Grid`] unless overridden.
pub const DEFAULT_CELL_CAP: usize = 1 << 26;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dimension: usize,
    origin: Vec<f64>,
    spacing: f64,
    cells: Vec<usize>,
}

impl Grid {
    /// `origin` is the lower corner of the first cell.
    pub fn new(origin: Vec<f64>, spacing: f64, cells: Vec<usize>) -> Result<Self> {
        Self::with_cap(origin, spacing, cells, DEFAULT_CELL_CAP)
    }

    pub fn with_cap(origin: Vec<f64>, spacing: f64, cells: Vec<usize>, cap: usize) -> Result<Self> {
        if origin.is_empty() || origin.len() != cells.len() {
            return Err(Error::invalid(format!(
                "origin has {} components but {} axes were given",
                origin.len(),
                cells.len()
            )));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::invalid(format!("grid spacing must be positive, got {spacing}")));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::invalid("grid origin must be finite"));
        }
        if cells.iter().any(|&n| n == 0) {
            return Err(Error::invalid("every axis needs at least one cell"));
        }
        let total = cells
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .filter(|&t| t <= cap)
            .ok_or_else(|| Error::invalid(format!("grid {cells:?} exceeds the cell cap {cap}")))?;
        debug_assert!(total > 0);
        Ok(Self {
            dimension: cells.len(),
            origin,
            spacing,
            cells,
        })
    }

    /// Grid covering `[lower, lower + extent]` per axis with `cells` cells
    /// along the first axis; the other axes get the same spacing.
    pub fn covering(lower: &[f64], upper: &[f64], cells_first_axis: usize) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::invalid("bounds must have matching, nonzero length"));
        }
        if cells_first_axis == 0 {
            return Err(Error::invalid("cell count must be positive"));
        }
        let h = (upper[0] - lower[0]) / cells_first_axis as f64;
        let cells = lower
            .iter()
            .zip(upper)
            .map(|(lo, hi)| ((hi - lo) / h).round().max(1.0) as usize)
            .collect();
        Self::new(lower.to_vec(), h, cells)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dimension as i32)
    }

    /// Stride of each axis in the flat value array.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dimension];
        for d in (0..self.dimension.saturating_sub(1)).rev() {
            strides[d] = strides[d + 1] * self.cells[d + 1];
        }
        strides
    }

    pub fn unravel(&self, mut flat: usize, index: &mut [usize]) {
        for d in (0..self.dimension).rev() {
            index[d] = flat % self.cells[d];
            flat /= self.cells[d];
        }
    }

    pub fn ravel(&self, index: &[usize]) -> usize {
        index
            .iter()
            .zip(&self.cells)
            .fold(0, |acc, (&i, &n)| acc * n + i)
    }

    /// Center coordinate of cell `i` along `axis`.
    #[inline]
    pub fn center_coord(&self, axis: usize, i: usize) -> f64 {
        self.origin[axis] + (i as f64 + 0.5) * self.spacing
    }

    pub fn center(&self, index: &[usize], out: &mut [f64]) {
        for d in 0..self.dimension {
            out[d] = self.center_coord(d, index[d]);
        }
    }

    pub fn center_of(&self, flat: usize, out: &mut [f64]) {
        let mut index = vec![0; self.dimension];
        self.unravel(flat, &mut index);
        self.center(&index, out);
    }

    /// Per-axis `(lower, upper)` edges of the whole grid.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        (0..self.dimension)
            .map(|d| {
                let lo = self.origin[d];
                (lo, lo + self.cells[d] as f64 * self.spacing)
            })
            .collect()
    }

    /// The same lattice extended by `layers` cells on every side.
    pub fn padded(&self, layers: usize) -> Result<Self> {
        Self::new(
            self.origin
                .iter()
                .map(|o| o - layers as f64 * self.spacing)
                .collect(),
            self.spacing,
            self.cells.iter().map(|n| n + 2 * layers).collect(),
        )
    }

    /// Flat offsets of the first cell of every grid line along `axis`,
    /// in lexicographic order.
    pub fn line_starts(&self, axis: usize) -> impl Iterator<Item = usize> + '_ {
        let inner: usize = self.cells[axis + 1..].iter().product();
        let outer: usize = self.cells[..axis].iter().product();
        let n = self.cells[axis];
        (0..outer).flat_map(move |o| (0..inner).map(move |q| o * n * inner + q))
    }

    pub fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{:?}/h={}/{:?} vs {:?}/h={}/{:?}",
                self.origin, self.spacing, self.cells, other.origin, other.spacing, other.cells
            )))
        }
    }
}

/// Which cells must vanish for a field to count as compactly supported.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompactSupportPolicy {
    /// Width, in cells, of the boundary layer that must vanish.
    pub margin_width: usize,
    /// Values up to `relative_tolerance · max|u|` count as zero.
    pub relative_tolerance: f64,
}

impl Default for CompactSupportPolicy {
    fn default() -> Self {
        Self {
            margin_width: 1,
            relative_tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![0.0; n],
        }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "{} values for a grid of {} cells",
                values.len(),
                grid.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            let mut x = vec![0.0; grid.dimension()];
            grid.center_of(k, &mut x);
            return Err(Error::NonFinite {
                quantity: "field value".into(),
                point: x,
            });
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at cell centers.
    pub fn from_fn<F: Fn(&[f64]) -> f64>(grid: Grid, f: F) -> Result<Self> {
        let mut x = vec![0.0; grid.dimension()];
        let mut index = vec![0; grid.dimension()];
        let values = (0..grid.len())
            .map(|k| {
                grid.unravel(k, &mut index);
                grid.center(&index, &mut x);
                f(&x)
            })
            .collect();
        Self::from_values(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.values[self.grid.ravel(index)]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `∫ u dx` as a cell sum.
    pub fn integral(&self) -> f64 {
        self.values.iter().copied().collect::<KahanSum>().value() * self.grid.cell_volume()
    }

    /// `∫ |u| dx`.
    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).collect::<KahanSum>().value()
            * self.grid.cell_volume()
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Result<Self> {
        Self::from_values(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with<F: Fn(f64, f64) -> f64>(&self, other: &ScalarField, f: F) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Self::from_values(
            self.grid.clone(),
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    /// The same field on a grid padded by `layers` zero cells per side.
    pub fn padded(&self, layers: usize) -> Result<Self> {
        let grid = self.grid.padded(layers)?;
        let mut out = Self::zeros(grid);
        let mut index = vec![0; self.grid.dimension()];
        for (k, &v) in self.values.iter().enumerate() {
            self.grid.unravel(k, &mut index);
            index.iter_mut().for_each(|i| *i += layers);
            let flat = out.grid.ravel(&index);
            out.values[flat] = v;
        }
        Ok(out)
    }

    /// First cell in the boundary layer of width `margin_width` whose
    /// magnitude exceeds `threshold`.
    pub fn margin_violation(&self, margin_width: usize, threshold: f64) -> Option<(Vec<usize>, f64)> {
        let mut index = vec![0; self.grid.dimension()];
        for (k, &v) in self.values.iter().enumerate() {
            if v.abs() <= threshold {
                continue;
            }
            self.grid.unravel(k, &mut index);
            let in_margin = index
                .iter()
                .zip(self.grid.cells())
                .any(|(&i, &n)| i < margin_width || i + margin_width >= n);
            if in_margin {
                return Some((index, v));
            }
        }
        None
    }

    pub fn ensure_compact(&self, policy: CompactSupportPolicy) -> Result<()> {
        let threshold = policy.relative_tolerance * self.max_abs();
        match self.margin_violation(policy.margin_width, threshold) {
            Some((cell, value)) => Err(Error::NonCompactSupport { cell, value }),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub empty: bool,
}

impl SupportBox {
    pub fn empty(dimension: usize) -> Self {
        Self {
            lower: vec![0.0; dimension],
            upper: vec![0.0; dimension],
            empty: true,
        }
    }

    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::invalid("support box bounds differ in length"));
        }
        if lower.iter().zip(&upper).any(|(lo, hi)| lo > hi) {
            return Err(Error::invalid("support box needs lower <= upper on every axis"));
        }
        Ok(Self {
            lower,
            upper,
            empty: false,
        })
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.empty
    }

    pub fn union(&self, other: &SupportBox) -> SupportBox {
        match (self.empty, other.empty) {
            (true, _) => other.clone(),
            (_, true) => self.clone(),
            _ => SupportBox {
                lower: self.lower.iter().zip(&other.lower).map(|(a, b)| a.min(*b)).collect(),
                upper: self.upper.iter().zip(&other.upper).map(|(a, b)| a.max(*b)).collect(),
                empty: false,
            },
        }
    }

    /// Minkowski sum with the cube `[-r, r]^N`.
    pub fn dilate(&self, r: f64) -> SupportBox {
        if self.empty {
            return self.clone();
        }
        SupportBox {
            lower: self.lower.iter().map(|a| a - r).collect(),
            upper: self.upper.iter().map(|b| b + r).collect(),
            empty: false,
        }
    }

    /// `other ⊆ self`, up to `slack` per face.
    pub fn contains(&self, other: &SupportBox, slack: f64) -> bool {
        if other.empty {
            return true;
        }
        if self.empty {
            return false;
        }
        self.lower.iter().zip(&other.lower).all(|(a, b)| *b >= a - slack)
            && self.upper.iter().zip(&other.upper).all(|(a, b)| *b <= a + slack)
    }

    pub fn bounds(&self) -> Vec<(f64, f64)> {
        self.lower.iter().copied().zip(self.upper.iter().copied()).collect()
    }
}

/// Anisotropic grid total variation of the zero-extended field,
/// `Σ_d Σ_cells |u(x + h e_d) − u(x)| h^{N−1}`.
///
/// In one dimension this is the exact total variation of the piecewise
/// constant interpolant.
pub fn total_variation(field: &ScalarField) -> Result<f64> {
    field.ensure_compact(CompactSupportPolicy::default())?;
    Ok(total_variation_unchecked(field))
}

/// [`total_variation`] without the compact-support check.
pub fn total_variation_unchecked(field: &ScalarField) -> f64 {
    let grid = field.grid();
    let strides = grid.strides();
    let u = field.values();
    let mut acc = KahanSum::new();
    for d in 0..grid.dimension() {
        let n = grid.cells()[d];
        let s = strides[d];
        for start in grid.line_starts(d) {
            let mut prev = 0.0;
            for j in 0..n {
                let cur = u[start + j * s];
                acc.add((cur - prev).abs());
                prev = cur;
            }
            acc.add(prev.abs());
        }
    }
    acc.value() * grid.spacing().powi(grid.dimension() as i32 - 1)
}

/// `∫ |u(x) − u(x − k h)| dx` for an integer lattice offset `k`.
pub fn shifted_l1_difference_cells(field: &ScalarField, offset: &[i64]) -> Result<f64> {
    let grid = field.grid();
    let dim = grid.dimension();
    if offset.len() != dim {
        return Err(Error::invalid("shift dimension does not match the field"));
    }
    let cells: Vec<i64> = grid.cells().iter().map(|&n| n as i64).collect();
    if offset.iter().all(|&k| k == 0) {
        return Ok(0.0);
    }
    let lo: Vec<i64> = offset.iter().map(|&k| k.min(0)).collect();
    let hi: Vec<i64> = offset.iter().zip(&cells).map(|(&k, &n)| n.max(n + k)).collect();
    let strides = grid.strides();
    let u = field.values();
    let lookup = |idx: &[i64], shift: bool| -> f64 {
        let mut flat = 0usize;
        for d in 0..dim {
            let i = if shift { idx[d] - offset[d] } else { idx[d] };
            if i < 0 || i >= cells[d] {
                return 0.0;
            }
            flat += i as usize * strides[d];
        }
        u[flat]
    };

    let mut acc = KahanSum::new();
    let mut idx = lo.clone();
    'outer: loop {
        acc.add((lookup(&idx, false) - lookup(&idx, true)).abs());
        for d in (0..dim).rev() {
            idx[d] += 1;
            if idx[d] < hi[d] {
                continue 'outer;
            }
            idx[d] = lo[d];
        }
        break;
    }
    Ok(acc.value() * grid.cell_volume())
}

/// `∫ |u(x) − u(x − z)| dx` for a lattice vector `z`.
pub fn shifted_l1_difference(field: &ScalarField, shift: &[f64]) -> Result<f64> {
    let offset = lattice_offset(shift, field.grid().spacing())?;
    shifted_l1_difference_cells(field, &offset)
}

fn lattice_offset(shift: &[f64], spacing: f64) -> Result<Vec<i64>> {
    shift
        .iter()
        .map(|&z| {
            let k = (z / spacing).round();
            if (z / spacing - k).abs() <= 1e-9 * k.abs().max(1.0) {
                Ok(k as i64)
            } else {
                Err(Error::NonLatticeShift {
                    shift: shift.to_vec(),
                    spacing,
                })
            }
        })
        .collect()
}

/// Mollifier difference quotient
/// `(1/C₁)(1/λ) ∬ |u(x) − u(x − z)| ρ_λ(z) dx dz`,
/// with the `z` integral taken as a lattice sum over the ball of radius `λ`.
pub fn tv_via_mollifier(field: &ScalarField, profile: &MollifierProfile, lambda: f64) -> Result<f64> {
    let grid = field.grid();
    let h = grid.spacing();
    if profile.dimension() != grid.dimension() {
        return Err(Error::invalid(format!(
            "profile dimension {} does not match field dimension {}",
            profile.dimension(),
            grid.dimension()
        )));
    }
    if !(lambda >= 2.0 * h * (1.0 - 1e-12)) {
        return Err(Error::SubGridScale { lambda, spacing: h });
    }
    field.ensure_compact(CompactSupportPolicy::default())?;
    let c1 = profile.constants()?.c1;
    let dim = grid.dimension();
    let reach = (lambda / h).floor() as i64;
    let weight_scale = grid.cell_volume() / lambda.powi(dim as i32);

    let mut acc = KahanSum::new();
    let mut k = vec![-reach; dim];
    'outer: loop {
        let norm = k.iter().map(|&c| (c as f64 * h).powi(2)).sum::<f64>().sqrt();
        if norm < lambda {
            let w = profile.interpolate(norm / lambda) * weight_scale;
            if w > 0.0 {
                acc.add(w * shifted_l1_difference_cells(field, &k)?);
            }
        }
        for d in (0..dim).rev() {
            k[d] += 1;
            if k[d] <= reach {
                continue 'outer;
            }
            k[d] = -reach;
        }
        break;
    }
    Ok(acc.value() / (lambda * c1))
}

/// Integration region for [`l1_distance`].
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Whole,
    /// Cells whose centers satisfy `‖x − center‖ ≤ radius`.
    Ball { center: Vec<f64>, radius: f64 },
}

pub fn l1_distance(a: &ScalarField, b: &ScalarField, region: &Region) -> Result<f64> {
    a.grid().ensure_same(b.grid())?;
    let grid = a.grid();
    if let Region::Ball { center, .. } = region {
        if center.len() != grid.dimension() {
            return Err(Error::invalid("ball center dimension does not match the grid"));
        }
    }
    let mut acc = KahanSum::new();
    let mut x = vec![0.0; grid.dimension()];
    let mut index = vec![0; grid.dimension()];
    for (k, (&va, &vb)) in a.values().iter().zip(b.values()).enumerate() {
        if va == vb {
            continue;
        }
        if let Region::Ball { center, radius } = region {
            grid.unravel(k, &mut index);
            grid.center(&index, &mut x);
            let d2: f64 = x.iter().zip(center).map(|(p, q)| (p - q) * (p - q)).sum();
            if d2 > radius * radius {
                continue;
            }
        }
        acc.add((va - vb).abs());
    }
    Ok(acc.value() * grid.cell_volume())
}

/// Tight box of the cells with `|u| > threshold`, measured on cell edges.
pub fn support_box(field: &ScalarField, threshold: f64) -> SupportBox {
    let grid = field.grid();
    let dim = grid.dimension();
    let mut lo = vec![usize::MAX; dim];
    let mut hi = vec![0usize; dim];
    let mut found = false;
    let mut index = vec![0; dim];
    for (k, &v) in field.values().iter().enumerate() {
        if v.abs() > threshold {
            found = true;
            grid.unravel(k, &mut index);
            for d in 0..dim {
                lo[d] = lo[d].min(index[d]);
                hi[d] = hi[d].max(index[d]);
            }
        }
    }
    if !found {
        return SupportBox::empty(dim);
    }
    let h = grid.spacing();
    SupportBox {
        lower: (0..dim).map(|d| grid.origin()[d] + lo[d] as f64 * h).collect(),
        upper: (0..dim)
            .map(|d| grid.origin()[d] + (hi[d] + 1) as f64 * h)
            .collect(),
        empty: false,
    }
}

/// Default support threshold `1e-12 · max|u₀|`.
pub fn default_support_threshold(initial: &ScalarField) -> f64 {
    1e-12 * initial.max_abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::build_mollifier;

    fn indicator_1d(h: f64) -> ScalarField {
        let grid = Grid::new(vec![-0.5], h, vec![(2.0 / h).round() as usize]).unwrap();
        ScalarField::from_fn(grid, |x| if (0.0..1.0).contains(&x[0]) { 1.0 } else { 0.0 }).unwrap()
    }

    #[test]
    fn indicator_total_variation() {
        let u = indicator_1d(1.0 / 256.0);
        assert!((total_variation(&u).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn square_total_variation_2d() {
        let h = 1.0 / 64.0;
        let grid = Grid::new(vec![-0.5, -0.5], h, vec![128, 128]).unwrap();
        let u = ScalarField::from_fn(grid, |x| {
            if x.iter().all(|c| (0.0..1.0).contains(c)) {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        assert!((total_variation(&u).unwrap() - 4.0).abs() <= 2.0 * h);
    }

    #[test]
    fn sine_total_variation() {
        let n = 4096;
        let h = 2.0 * std::f64::consts::PI / n as f64;
        let grid = Grid::new(vec![-h], h, vec![n + 2]).unwrap();
        let u = ScalarField::from_fn(grid, |x| {
            if (0.0..2.0 * std::f64::consts::PI).contains(&x[0]) {
                x[0].sin()
            } else {
                0.0
            }
        })
        .unwrap();
        assert!((total_variation(&u).unwrap() - 4.0).abs() < 0.04);
    }

    #[test]
    fn nonzero_margin_rejected() {
        let grid = Grid::new(vec![0.0], 0.1, vec![10]).unwrap();
        let u = ScalarField::from_values(grid, vec![1.0; 10]).unwrap();
        assert!(matches!(total_variation(&u), Err(Error::NonCompactSupport { .. })));
    }

    #[test]
    fn shift_examples() {
        let h = 1.0 / 256.0;
        let u = indicator_1d(h);
        assert_eq!(shifted_l1_difference(&u, &[0.0]).unwrap(), 0.0);
        assert!((shifted_l1_difference(&u, &[h]).unwrap() - 2.0 * h).abs() < 1e-15);
        assert!((shifted_l1_difference(&u, &[-3.0 * h]).unwrap() - 6.0 * h).abs() < 1e-15);
        assert!(matches!(
            shifted_l1_difference(&u, &[0.5 * h]),
            Err(Error::NonLatticeShift { .. })
        ));
    }

    #[test]
    fn shift_beyond_grid_counts_both_copies() {
        let u = indicator_1d(1.0 / 16.0);
        // Disjoint copies: the difference is twice the mass.
        let d = shifted_l1_difference(&u, &[5.0]).unwrap();
        assert!((d - 2.0).abs() < 1e-14);
    }

    #[test]
    fn l1_distance_examples() {
        let h = 1.0 / 128.0;
        let u = indicator_1d(h);
        let zero = ScalarField::zeros(u.grid().clone());
        assert_eq!(l1_distance(&u, &u, &Region::Whole).unwrap(), 0.0);
        let ball = Region::Ball {
            center: vec![0.5],
            radius: 1.0,
        };
        assert!((l1_distance(&u, &zero, &ball).unwrap() - 1.0).abs() <= h);
        let far = Region::Ball {
            center: vec![10.0],
            radius: 1.0,
        };
        assert_eq!(l1_distance(&u, &zero, &far).unwrap(), 0.0);
        let other = ScalarField::zeros(Grid::new(vec![0.0], h, vec![3]).unwrap());
        assert!(matches!(
            l1_distance(&u, &other, &Region::Whole),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn support_box_examples() {
        let h = 1.0 / 64.0;
        let u = indicator_1d(h);
        let b = support_box(&u, 0.0);
        assert!(!b.empty);
        assert!(b.lower[0] <= 0.0 && b.lower[0] >= -h);
        assert!(b.upper[0] >= 1.0 && b.upper[0] <= 1.0 + h);
        assert!(support_box(&ScalarField::zeros(u.grid().clone()), 0.0).empty);
        assert!(support_box(&u, 2.0).empty);
    }

    #[test]
    fn mollifier_quotient_of_indicator() {
        let u = indicator_1d(1.0 / 1024.0);
        let profile = build_mollifier(0.5, 1).unwrap();
        let tv = tv_via_mollifier(&u, &profile, 1.0 / 16.0).unwrap();
        assert!((tv - 2.0).abs() < 0.1, "{tv}");
        let constant = ScalarField::zeros(u.grid().clone());
        assert_eq!(tv_via_mollifier(&constant, &profile, 1.0 / 16.0).unwrap(), 0.0);
        assert!(matches!(
            tv_via_mollifier(&u, &profile, 1.0 / 1024.0),
            Err(Error::SubGridScale { .. })
        ));
    }

    #[test]
    fn padding_preserves_values() {
        let u = indicator_1d(1.0 / 8.0);
        let p = u.padded(3).unwrap();
        assert_eq!(p.grid().cells()[0], u.grid().cells()[0] + 6);
        assert_eq!(p.integral(), u.integral());
        assert_eq!(total_variation(&p).unwrap(), total_variation(&u).unwrap());
    }
}
