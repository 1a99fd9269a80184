//! Scalar and vector fields on a [`Grid`], with pointwise algebra and the
//! periodic rectangle-rule quadrature.

use crate::error::{Error, Result};
use crate::grid::Grid;

/// One real value per grid point, stored first-axis fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        ScalarField {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        ScalarField {
            grid,
            values: vec![value; grid.len()],
        }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                index,
                component: 0,
            });
        }
        Ok(ScalarField { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> f64) -> Result<Self> {
        ScalarField::from_values(grid, grid.points().map(f).collect())
    }

    /// Skips the finiteness check; used for intermediate results.
    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        ScalarField { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `h * Σ s`.
    pub fn integral(&self) -> f64 {
        self.grid.cell_volume() * self.values.iter().sum::<f64>()
    }
}

/// A three-component vector field. Components are stored as three contiguous
/// blocks `[n1 | n2 | n3]`, each in grid storage order.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectorField {
    grid: Grid,
    data: Vec<f64>,
}

impl DirectorField {
    pub fn zeros(grid: Grid) -> Self {
        DirectorField {
            grid,
            data: vec![0.0; 3 * grid.len()],
        }
    }

    pub fn constant(grid: Grid, v: [f64; 3]) -> Self {
        let n = grid.len();
        let mut data = Vec::with_capacity(3 * n);
        for c in v {
            data.extend(std::iter::repeat_n(c, n));
        }
        DirectorField { grid, data }
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> [f64; 3]) -> Result<Self> {
        let n = grid.len();
        let mut data = vec![0.0; 3 * n];
        for (i, x) in grid.points().enumerate() {
            let v = f(x);
            for (c, value) in v.into_iter().enumerate() {
                if !value.is_finite() {
                    return Err(Error::NonFinite {
                        index: i,
                        component: c,
                    });
                }
                data[c * n + i] = value;
            }
        }
        Ok(DirectorField { grid, data })
    }

    pub fn from_components(n1: ScalarField, n2: ScalarField, n3: ScalarField) -> Result<Self> {
        n1.grid.ensure_same(&n2.grid)?;
        n1.grid.ensure_same(&n3.grid)?;
        let grid = n1.grid;
        let mut data = n1.values;
        data.extend_from_slice(&n2.values);
        data.extend_from_slice(&n3.values);
        Ok(DirectorField { grid, data })
    }

    /// Builds a field from the flat `[n1 | n2 | n3]` layout.
    pub fn from_flat(grid: Grid, data: Vec<f64>) -> Result<Self> {
        if data.len() != 3 * grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} values, got {}",
                3 * grid.len(),
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                index: pos % grid.len(),
                component: pos / grid.len(),
            });
        }
        Ok(DirectorField { grid, data })
    }

    pub(crate) fn from_raw(grid: Grid, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), 3 * grid.len());
        DirectorField { grid, data }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn component(&self, c: usize) -> &[f64] {
        let n = self.grid.len();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.grid.len();
        &mut self.data[c * n..(c + 1) * n]
    }

    pub fn components(&self) -> [&[f64]; 3] {
        let n = self.grid.len();
        let (a, rest) = self.data.split_at(n);
        let (b, c) = rest.split_at(n);
        [a, b, c]
    }

    pub fn components_mut(&mut self) -> [&mut [f64]; 3] {
        let n = self.grid.len();
        let (a, rest) = self.data.split_at_mut(n);
        let (b, c) = rest.split_at_mut(n);
        [a, b, c]
    }

    pub fn component_field(&self, c: usize) -> ScalarField {
        ScalarField::from_raw(self.grid, self.component(c).to_vec())
    }

    pub fn at(&self, index: usize) -> [f64; 3] {
        let [a, b, c] = self.components();
        [a[index], b[index], c[index]]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_flat(self) -> Vec<f64> {
        self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &DirectorField) -> Result<()> {
        self.grid.ensure_same(&other.grid)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
        Ok(())
    }

    pub fn scaled(&self, alpha: f64) -> DirectorField {
        DirectorField::from_raw(self.grid, self.data.iter().map(|v| alpha * v).collect())
    }

    /// Root-mean-square over all `3 N` entries.
    pub fn rms(&self) -> f64 {
        rms(&self.data)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Pointwise Euclidean length.
    pub fn lengths(&self) -> ScalarField {
        let [a, b, c] = self.components();
        let values = a
            .iter()
            .zip(b)
            .zip(c)
            .map(|((x, y), z)| (x * x + y * y + z * z).sqrt())
            .collect();
        ScalarField::from_raw(self.grid, values)
    }
}

pub(crate) fn rms(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
}

/// `h * Σ_points a·b`.
pub fn discrete_inner(a: &DirectorField, b: &DirectorField) -> Result<f64> {
    a.grid.ensure_same(&b.grid)?;
    Ok(inner_unchecked(a, b))
}

pub(crate) fn inner_unchecked(a: &DirectorField, b: &DirectorField) -> f64 {
    let s: f64 = a.data.iter().zip(&b.data).map(|(x, y)| x * y).sum();
    a.grid.cell_volume() * s
}

/// `h * Σ_points s t`.
pub fn scalar_inner(s: &ScalarField, t: &ScalarField) -> Result<f64> {
    s.grid.ensure_same(&t.grid)?;
    let sum: f64 = s.values.iter().zip(&t.values).map(|(x, y)| x * y).sum();
    Ok(s.grid.cell_volume() * sum)
}

/// `max_x | |n(x)| - 1 |`.
pub fn linf_length_error(n: &DirectorField) -> f64 {
    n.lengths()
        .values()
        .iter()
        .fold(0.0, |m, l| m.max((l - 1.0).abs()))
}

/// Pointwise `a × b`.
pub fn cross(a: &DirectorField, b: &DirectorField) -> Result<DirectorField> {
    a.grid.ensure_same(&b.grid)?;
    Ok(cross_unchecked(a, b))
}

pub(crate) fn cross_unchecked(a: &DirectorField, b: &DirectorField) -> DirectorField {
    let n = a.grid.len();
    let mut out = vec![0.0; 3 * n];
    let [a1, a2, a3] = a.components();
    let [b1, b2, b3] = b.components();
    {
        let (o1, rest) = out.split_at_mut(n);
        let (o2, o3) = rest.split_at_mut(n);
        for i in 0..n {
            o1[i] = a2[i] * b3[i] - a3[i] * b2[i];
            o2[i] = a3[i] * b1[i] - a1[i] * b3[i];
            o3[i] = a1[i] * b2[i] - a2[i] * b1[i];
        }
    }
    DirectorField::from_raw(a.grid, out)
}

/// Pointwise `a · b`.
pub fn dot(a: &DirectorField, b: &DirectorField) -> Result<ScalarField> {
    a.grid.ensure_same(&b.grid)?;
    Ok(dot_unchecked(a, b))
}

pub(crate) fn dot_unchecked(a: &DirectorField, b: &DirectorField) -> ScalarField {
    let [a1, a2, a3] = a.components();
    let [b1, b2, b3] = b.components();
    let values = (0..a.grid.len())
        .map(|i| a1[i] * b1[i] + a2[i] * b2[i] + a3[i] * b3[i])
        .collect();
    ScalarField::from_raw(a.grid, values)
}

/// `alpha * a + beta * b`.
pub fn lincomb(alpha: f64, a: &DirectorField, beta: f64, b: &DirectorField) -> Result<DirectorField> {
    a.grid.ensure_same(&b.grid)?;
    Ok(lincomb_unchecked(alpha, a, beta, b))
}

pub(crate) fn lincomb_unchecked(
    alpha: f64,
    a: &DirectorField,
    beta: f64,
    b: &DirectorField,
) -> DirectorField {
    let data = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| alpha * x + beta * y)
        .collect();
    DirectorField::from_raw(a.grid, data)
}

/// Pointwise `s(x) a(x)`.
pub fn scale_by_scalar_field(s: &ScalarField, a: &DirectorField) -> Result<DirectorField> {
    s.grid.ensure_same(&a.grid)?;
    Ok(scale_unchecked(s, a))
}

pub(crate) fn scale_unchecked(s: &ScalarField, a: &DirectorField) -> DirectorField {
    let n = a.grid.len();
    let data = a
        .data
        .iter()
        .enumerate()
        .map(|(k, v)| s.values[k % n] * v)
        .collect();
    DirectorField::from_raw(a.grid, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cube(n: usize) -> Grid {
        Grid::periodic_cube(n).unwrap()
    }

    #[test]
    fn constant_field_sampling() {
        let f = DirectorField::from_fn(cube(4), |_| [0.0, 0.0, 1.0]).unwrap();
        assert!(f.component(0).iter().all(|&v| v == 0.0));
        assert!(f.component(1).iter().all(|&v| v == 0.0));
        assert!(f.component(2).iter().all(|&v| v == 1.0));
    }

    #[test]
    fn non_finite_sample_names_index() {
        let g = cube(4);
        let err = DirectorField::from_fn(g, |x| {
            if x[0] > 3.0 {
                [f64::NAN, 0.0, 0.0]
            } else {
                [0.0; 3]
            }
        })
        .unwrap_err();
        match err {
            Error::NonFinite { index, component } => {
                assert_eq!(index, 2);
                assert_eq!(component, 0);
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn inner_of_constants() {
        let g = cube(8);
        let a = DirectorField::constant(g, [1.0, 0.0, 0.0]);
        let v = discrete_inner(&a, &a).unwrap();
        assert!((v - (2.0 * PI).powi(3)).abs() < 1e-10);
        let b = DirectorField::constant(g, [0.0, 1.0, 0.0]);
        assert_eq!(discrete_inner(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn inner_of_sine_squared() {
        let g = cube(16);
        let a = DirectorField::from_fn(g, |x| [x[0].sin(), 0.0, 0.0]).unwrap();
        let v = discrete_inner(&a, &a).unwrap();
        assert!((v - 4.0 * PI.powi(3)).abs() < 1e-10, "{v}");
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let a = DirectorField::zeros(cube(4));
        let b = DirectorField::zeros(cube(8));
        assert!(matches!(discrete_inner(&a, &b), Err(Error::GridMismatch)));
        assert!(matches!(cross(&a, &b), Err(Error::GridMismatch)));
    }

    #[test]
    fn length_error_cases() {
        let g = cube(4);
        let zero = DirectorField::zeros(g);
        assert_eq!(linf_length_error(&zero), 1.0);
        let unit = DirectorField::constant(g, [0.6, 0.0, 0.8]);
        assert!(linf_length_error(&unit) < 1e-15);
        let scaled = unit.scaled(1.001);
        assert!((linf_length_error(&scaled) - 1e-3).abs() < 1e-14);
    }

    #[test]
    fn basis_cross_product() {
        let g = cube(4);
        let e1 = DirectorField::constant(g, [1.0, 0.0, 0.0]);
        let e2 = DirectorField::constant(g, [0.0, 1.0, 0.0]);
        let c = cross(&e1, &e2).unwrap();
        assert_eq!(c, DirectorField::constant(g, [0.0, 0.0, 1.0]));
    }

    #[test]
    fn scale_and_lincomb() {
        let g = cube(4);
        let s = ScalarField::from_fn(g, |x| x[0]).unwrap();
        let a = DirectorField::constant(g, [1.0, 2.0, 3.0]);
        let b = scale_by_scalar_field(&s, &a).unwrap();
        for i in 0..g.len() {
            let x = g.point(i)[0];
            assert_eq!(b.at(i), [x, 2.0 * x, 3.0 * x]);
        }
        let c = lincomb(2.0, &a, -1.0, &a).unwrap();
        assert_eq!(c, a);
    }
}
