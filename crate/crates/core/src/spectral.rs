//! Fourier-collocation differential operators on periodic grids.
//!
//! Fields are transformed with complex FFTs along each non-collapsed axis.
//! Two real fields share one complex transform (`a + i b`), so vector
//! operators cost two forward and two inverse transforms instead of three.
//!
//! First-derivative multipliers zero the Nyquist mode of every even-length
//! axis. The resulting derivative matrices are real and skew-symmetric in the
//! grid inner product, which is what makes the discrete curl self-adjoint and
//! `div` the negative adjoint of `grad`.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::field::{DirectorField, ScalarField};
use crate::grid::Grid;

type Spectrum = Vec<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

struct AxisTransform {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Flat indices of the points whose coordinate along this axis is zero.
    line_starts: Vec<usize>,
    stride: usize,
}

impl AxisTransform {
    fn run(&self, buf: &mut [Complex64], inverse: bool) {
        let fft = if inverse { &self.inverse } else { &self.forward };
        if self.stride == 1 {
            fft.process(buf);
            return;
        }
        let mut lines = vec![Complex64::default(); buf.len()];
        for (l, &start) in self.line_starts.iter().enumerate() {
            let line = &mut lines[l * self.len..(l + 1) * self.len];
            for (j, v) in line.iter_mut().enumerate() {
                *v = buf[start + j * self.stride];
            }
        }
        fft.process(&mut lines);
        for (l, &start) in self.line_starts.iter().enumerate() {
            let line = &lines[l * self.len..(l + 1) * self.len];
            for (j, v) in line.iter().enumerate() {
                buf[start + j * self.stride] = *v;
            }
        }
    }
}

/// Wavenumbers, FFT plans and multiplier tables for one grid.
///
/// All operator methods take `&self` and allocate their own work buffers, so a
/// plan can be shared between threads.
pub struct SpectralPlan {
    grid: Grid,
    wavenumbers: [Vec<f64>; 3],
    /// First-derivative multiplier per axis, per flat index (`∂_a ↔ i * k`).
    derivative: [Vec<f64>; 3],
    axes: Vec<AxisTransform>,
    /// Flat index of the mode `-k` for each mode `k`.
    negated: Vec<usize>,
    dealias: bool,
}

impl std::fmt::Debug for SpectralPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralPlan")
            .field("grid", &self.grid)
            .field("dealias", &self.dealias)
            .finish()
    }
}

impl Clone for SpectralPlan {
    fn clone(&self) -> Self {
        SpectralPlan::with_dealiasing(self.grid, self.dealias)
    }
}

/// Signed mode number of index `j` on an axis of length `n`.
fn signed_mode(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

impl SpectralPlan {
    pub fn new(grid: Grid) -> Self {
        SpectralPlan::with_dealiasing(grid, false)
    }

    /// With `dealias`, derivative multipliers also zero every mode with
    /// `3 |j| > N` on the corresponding axis (2/3 rule).
    pub fn with_dealiasing(grid: Grid, dealias: bool) -> Self {
        let dims = grid.dims();
        let lengths = grid.lengths();
        let mut planner = FftPlanner::new();

        let wavenumbers: [Vec<f64>; 3] = std::array::from_fn(|a| {
            let n = dims[a];
            let scale = 2.0 * std::f64::consts::PI / lengths[a];
            (0..n)
                .map(|j| if n == 1 { 0.0 } else { scale * signed_mode(j, n) as f64 })
                .collect()
        });

        let odd_multiplier: [Vec<f64>; 3] = std::array::from_fn(|a| {
            let n = dims[a];
            (0..n)
                .map(|j| {
                    let m = signed_mode(j, n);
                    let nyquist = n.is_multiple_of(2) && j == n / 2;
                    let truncated = dealias && 3 * m.unsigned_abs() as usize > n;
                    if nyquist || truncated {
                        0.0
                    } else {
                        wavenumbers[a][j]
                    }
                })
                .collect()
        });

        let len = grid.len();
        let mut derivative: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; len]);
        let mut negated = vec![0; len];
        for idx in 0..len {
            let m = grid.multi_index(idx);
            for a in 0..3 {
                derivative[a][idx] = odd_multiplier[a][m[a]];
            }
            let neg: [usize; 3] = std::array::from_fn(|a| (dims[a] - m[a]) % dims[a]);
            negated[idx] = grid.index(neg[0], neg[1], neg[2]);
        }

        let strides = [1, dims[0], dims[0] * dims[1]];
        let axes = (0..3)
            .filter(|&a| dims[a] > 1)
            .map(|a| AxisTransform {
                len: dims[a],
                forward: planner.plan_fft_forward(dims[a]),
                inverse: planner.plan_fft_inverse(dims[a]),
                line_starts: (0..len).filter(|&i| grid.multi_index(i)[a] == 0).collect(),
                stride: strides[a],
            })
            .collect();

        SpectralPlan {
            grid,
            wavenumbers,
            derivative,
            axes,
            negated,
            dealias,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `k_a[j]` for axis `a`; all zero on collapsed axes.
    pub fn wavenumbers(&self, axis: usize) -> &[f64] {
        &self.wavenumbers[axis]
    }

    pub fn dealiasing(&self) -> bool {
        self.dealias
    }

    fn transform(&self, buf: &mut [Complex64], inverse: bool) {
        for axis in &self.axes {
            axis.run(buf, inverse);
        }
        if inverse {
            let scale = 1.0 / self.grid.len() as f64;
            for v in buf.iter_mut() {
                *v *= scale;
            }
        }
    }

    /// Forward transform of a complex array (unnormalized).
    pub fn forward_complex(&self, data: &[Complex64]) -> Spectrum {
        let mut buf = data.to_vec();
        self.transform(&mut buf, false);
        buf
    }

    /// Inverse transform, normalized so that `inverse(forward(u)) == u`.
    pub fn inverse_complex(&self, spectrum: &[Complex64]) -> Vec<Complex64> {
        let mut buf = spectrum.to_vec();
        self.transform(&mut buf, true);
        buf
    }

    fn forward_real(&self, a: &[f64]) -> Spectrum {
        let mut buf: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.transform(&mut buf, false);
        buf
    }

    /// Spectra of two real arrays from one complex transform.
    fn forward_pair(&self, a: &[f64], b: &[f64]) -> (Spectrum, Spectrum) {
        let mut z: Vec<Complex64> = a
            .iter()
            .zip(b)
            .map(|(&x, &y)| Complex64::new(x, y))
            .collect();
        self.transform(&mut z, false);
        let mut sa = vec![Complex64::default(); z.len()];
        let mut sb = vec![Complex64::default(); z.len()];
        for k in 0..z.len() {
            let zc = z[self.negated[k]].conj();
            sa[k] = 0.5 * (z[k] + zc);
            sb[k] = -0.5 * I * (z[k] - zc);
        }
        (sa, sb)
    }

    fn forward_many(&self, fields: &[&[f64]]) -> Vec<Spectrum> {
        let mut out = Vec::with_capacity(fields.len());
        for chunk in fields.chunks(2) {
            match chunk {
                [a, b] => {
                    let (sa, sb) = self.forward_pair(a, b);
                    out.push(sa);
                    out.push(sb);
                }
                [a] => out.push(self.forward_real(a)),
                _ => unreachable!(),
            }
        }
        out
    }

    /// Inverse transforms of spectra known to belong to real fields.
    fn inverse_many(&self, spectra: &[Spectrum]) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(spectra.len());
        for chunk in spectra.chunks(2) {
            match chunk {
                [sa, sb] => {
                    let mut z: Vec<Complex64> =
                        sa.iter().zip(sb).map(|(x, y)| x + I * y).collect();
                    self.transform(&mut z, true);
                    out.push(z.iter().map(|c| c.re).collect());
                    out.push(z.iter().map(|c| c.im).collect());
                }
                [sa] => {
                    let mut z = sa.clone();
                    self.transform(&mut z, true);
                    out.push(z.iter().map(|c| c.re).collect());
                }
                _ => unreachable!(),
            }
        }
        out
    }

    fn check_scalar(&self, s: &ScalarField) -> Result<()> {
        self.grid.ensure_same(s.grid())
    }

    fn check_vector(&self, n: &DirectorField) -> Result<()> {
        self.grid.ensure_same(n.grid())
    }

    /// `∂ s / ∂ x_axis` with `axis` in `0..3`.
    pub fn partial(&self, s: &ScalarField, axis: usize) -> Result<ScalarField> {
        if axis > 2 {
            return Err(Error::AxisOutOfRange(axis));
        }
        self.check_scalar(s)?;
        let mut spec = self.forward_real(s.values());
        let d = &self.derivative[axis];
        for (v, k) in spec.iter_mut().zip(d) {
            *v *= I * k;
        }
        let out = self.inverse_many(&[spec]).pop().unwrap();
        Ok(ScalarField::from_raw(self.grid, out))
    }

    pub fn divergence(&self, n: &DirectorField) -> Result<ScalarField> {
        self.check_vector(n)?;
        Ok(self.divergence_unchecked(n))
    }

    pub(crate) fn divergence_unchecked(&self, n: &DirectorField) -> ScalarField {
        let spec = self.forward_many(&n.components());
        let div = self.divergence_spectrum(&spec);
        ScalarField::from_raw(self.grid, self.inverse_many(&[div]).pop().unwrap())
    }

    fn divergence_spectrum(&self, spec: &[Spectrum]) -> Spectrum {
        let [d1, d2, d3] = &self.derivative;
        (0..self.grid.len())
            .map(|k| I * (d1[k] * spec[0][k] + d2[k] * spec[1][k] + d3[k] * spec[2][k]))
            .collect()
    }

    /// `(∂2 n3 − ∂3 n2, ∂3 n1 − ∂1 n3, ∂1 n2 − ∂2 n1)`.
    pub fn curl(&self, n: &DirectorField) -> Result<DirectorField> {
        self.check_vector(n)?;
        Ok(self.curl_unchecked(n))
    }

    pub(crate) fn curl_unchecked(&self, n: &DirectorField) -> DirectorField {
        let s = self.forward_many(&n.components());
        let [d1, d2, d3] = &self.derivative;
        let len = self.grid.len();
        let mut c: [Spectrum; 3] = std::array::from_fn(|_| vec![Complex64::default(); len]);
        for k in 0..len {
            c[0][k] = I * (d2[k] * s[2][k] - d3[k] * s[1][k]);
            c[1][k] = I * (d3[k] * s[0][k] - d1[k] * s[2][k]);
            c[2][k] = I * (d1[k] * s[1][k] - d2[k] * s[0][k]);
        }
        let out = self.inverse_many(&c);
        DirectorField::from_raw(self.grid, out.concat())
    }

    pub fn grad(&self, s: &ScalarField) -> Result<DirectorField> {
        self.check_scalar(s)?;
        Ok(self.grad_unchecked(s))
    }

    pub(crate) fn grad_unchecked(&self, s: &ScalarField) -> DirectorField {
        let spec = self.forward_real(s.values());
        let g: Vec<Spectrum> = self
            .derivative
            .iter()
            .map(|d| spec.iter().zip(d).map(|(v, k)| I * k * v).collect())
            .collect();
        DirectorField::from_raw(self.grid, self.inverse_many(&g).concat())
    }

    /// `∇(∇·n)`, composed in spectral space.
    pub fn grad_div(&self, n: &DirectorField) -> Result<DirectorField> {
        self.check_vector(n)?;
        Ok(self.grad_div_unchecked(n))
    }

    pub(crate) fn grad_div_unchecked(&self, n: &DirectorField) -> DirectorField {
        let spec = self.forward_many(&n.components());
        let div = self.divergence_spectrum(&spec);
        let g: Vec<Spectrum> = self
            .derivative
            .iter()
            .map(|d| div.iter().zip(d).map(|(v, k)| I * k * v).collect())
            .collect();
        DirectorField::from_raw(self.grid, self.inverse_many(&g).concat())
    }

    /// Divergence, curl and `∇(∇·n)` of one field from a single forward
    /// transform.
    pub(crate) fn first_and_second_derivatives(
        &self,
        n: &DirectorField,
    ) -> (ScalarField, DirectorField, DirectorField) {
        let s = self.forward_many(&n.components());
        let [d1, d2, d3] = &self.derivative;
        let len = self.grid.len();
        let div = self.divergence_spectrum(&s);
        let mut out: Vec<Spectrum> = (0..7).map(|_| vec![Complex64::default(); len]).collect();
        for k in 0..len {
            out[0][k] = div[k];
            out[1][k] = I * (d2[k] * s[2][k] - d3[k] * s[1][k]);
            out[2][k] = I * (d3[k] * s[0][k] - d1[k] * s[2][k]);
            out[3][k] = I * (d1[k] * s[1][k] - d2[k] * s[0][k]);
            out[4][k] = I * d1[k] * div[k];
            out[5][k] = I * d2[k] * div[k];
            out[6][k] = I * d3[k] * div[k];
        }
        let mut phys = self.inverse_many(&out).into_iter();
        let div = ScalarField::from_raw(self.grid, phys.next().unwrap());
        let curl: Vec<f64> = phys.by_ref().take(3).flatten().collect();
        let grad_div: Vec<f64> = phys.flatten().collect();
        (
            div,
            DirectorField::from_raw(self.grid, curl),
            DirectorField::from_raw(self.grid, grad_div),
        )
    }

    /// Solves `(shift − coef Δ) u = v` componentwise, with `Δ` the spectral
    /// Laplacian built from the derivative multipliers.
    pub fn solve_shifted_laplacian(
        &self,
        v: &DirectorField,
        shift: f64,
        coef: f64,
    ) -> Result<DirectorField> {
        self.check_vector(v)?;
        if !(shift > 0.0 && coef >= 0.0) {
            return Err(Error::InvalidArgument(
                "shifted Laplacian needs shift > 0 and coef >= 0".into(),
            ));
        }
        let mut spec = self.forward_many(&v.components());
        let [d1, d2, d3] = &self.derivative;
        for s in spec.iter_mut() {
            for (k, val) in s.iter_mut().enumerate() {
                let k2 = d1[k] * d1[k] + d2[k] * d2[k] + d3[k] * d3[k];
                *val /= shift + coef * k2;
            }
        }
        Ok(DirectorField::from_raw(
            self.grid,
            self.inverse_many(&spec).concat(),
        ))
    }

    /// Spectrum of a real scalar field, exposed for decay diagnostics.
    pub fn spectrum(&self, s: &ScalarField) -> Result<Vec<Complex64>> {
        self.check_scalar(s)?;
        Ok(self.forward_real(s.values()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::discrete_inner;
    use std::f64::consts::PI;

    fn plan(n: usize) -> SpectralPlan {
        SpectralPlan::new(Grid::periodic_cube(n).unwrap())
    }

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn wavenumber_layout() {
        let p = SpectralPlan::new(Grid::new([4, 5, 1], [2.0 * PI, PI, 1.0], [0.0; 3]).unwrap());
        assert_eq!(p.wavenumbers(0), &[0.0, 1.0, 2.0, -1.0]);
        assert_eq!(p.wavenumbers(1), &[0.0, 2.0, 4.0, -4.0, -2.0]);
        assert_eq!(p.wavenumbers(2), &[0.0]);
    }

    #[test]
    fn round_trip() {
        let p = SpectralPlan::new(Grid::new([6, 5, 4], [1.0, 2.0, 3.0], [0.0; 3]).unwrap());
        let data: Vec<Complex64> = (0..p.grid().len())
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()))
            .collect();
        let back = p.inverse_complex(&p.forward_complex(&data));
        for (a, b) in data.iter().zip(&back) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn packed_pair_matches_separate_transforms() {
        let p = plan(8);
        let a: Vec<f64> = (0..p.grid().len()).map(|i| (i as f64 * 0.11).sin()).collect();
        let b: Vec<f64> = (0..p.grid().len()).map(|i| (i as f64 * 0.7).cos()).collect();
        let (sa, sb) = p.forward_pair(&a, &b);
        let ra = p.forward_real(&a);
        let rb = p.forward_real(&b);
        for k in 0..a.len() {
            assert!((sa[k] - ra[k]).norm() < 1e-12);
            assert!((sb[k] - rb[k]).norm() < 1e-12);
        }
    }

    #[test]
    fn partial_of_sine() {
        let p = plan(16);
        let g = *p.grid();
        let s = ScalarField::from_fn(g, |x| x[0].sin()).unwrap();
        let ds = p.partial(&s, 0).unwrap();
        let expect = ScalarField::from_fn(g, |x| x[0].cos()).unwrap();
        assert!(max_diff(ds.values(), expect.values()) < 1e-12);

        let t = ScalarField::from_fn(g, |x| (2.0 * x[1]).sin()).unwrap();
        assert!(p.partial(&t, 0).unwrap().max_abs() < 1e-12);
        let c = ScalarField::constant(g, 3.5);
        assert!(p.partial(&c, 2).unwrap().max_abs() < 1e-12);
        assert!(matches!(p.partial(&s, 3), Err(Error::AxisOutOfRange(3))));
    }

    #[test]
    fn nyquist_mode_is_dropped() {
        let p = plan(8);
        let s = ScalarField::from_fn(*p.grid(), |x| (4.0 * x[0]).cos()).unwrap();
        assert!(p.partial(&s, 0).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn divergence_and_curl_examples() {
        let p = plan(16);
        let g = *p.grid();
        let n = DirectorField::from_fn(g, |x| [x[0].sin(), 0.0, x[0].cos()]).unwrap();
        let div = p.divergence(&n).unwrap();
        let expect = ScalarField::from_fn(g, |x| x[0].cos()).unwrap();
        assert!(max_diff(div.values(), expect.values()) < 1e-12);

        let twist = DirectorField::from_fn(g, |x| [x[2].cos(), x[2].sin(), 0.0]).unwrap();
        let c = p.curl(&twist).unwrap();
        assert!(max_diff(c.as_slice(), twist.scaled(-1.0).as_slice()) < 1e-12);

        let m = DirectorField::from_fn(g, |x| [0.0, 0.0, x[0].sin()]).unwrap();
        let c = p.curl(&m).unwrap();
        let expect = DirectorField::from_fn(g, |x| [0.0, -x[0].cos(), 0.0]).unwrap();
        assert!(max_diff(c.as_slice(), expect.as_slice()) < 1e-12);

        let sideways = DirectorField::from_fn(g, |x| [x[1].sin(), 0.0, 0.0]).unwrap();
        assert!(p.divergence(&sideways).unwrap().max_abs() < 1e-12);
        let uniform = DirectorField::constant(g, [0.3, 0.4, 0.5]);
        assert!(p.curl(&uniform).unwrap().max_abs() < 1e-12);
        assert!(p.divergence(&uniform).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn grad_and_grad_div() {
        let p = plan(16);
        let g = *p.grid();
        let s = ScalarField::from_fn(g, |x| x[0].sin()).unwrap();
        let expect = DirectorField::from_fn(g, |x| [x[0].cos(), 0.0, 0.0]).unwrap();
        assert!(max_diff(p.grad(&s).unwrap().as_slice(), expect.as_slice()) < 1e-12);
        assert!(p.grad(&ScalarField::constant(g, 2.0)).unwrap().max_abs() < 1e-12);

        let n = DirectorField::from_fn(g, |x| [x[0].sin(), 0.0, x[0].cos()]).unwrap();
        let gd = p.grad_div(&n).unwrap();
        let expect = DirectorField::from_fn(g, |x| [-x[0].sin(), 0.0, 0.0]).unwrap();
        assert!(max_diff(gd.as_slice(), expect.as_slice()) < 1e-12);
        let composed = p.grad(&p.divergence(&n).unwrap()).unwrap();
        assert!(max_diff(gd.as_slice(), composed.as_slice()) < 1e-13);
    }

    #[test]
    fn two_dimensional_grid_has_no_third_derivative() {
        let p = SpectralPlan::new(Grid::unit_square_2d(12).unwrap());
        let g = *p.grid();
        let n = DirectorField::from_fn(g, |x| {
            [(PI * x[0]).sin(), (PI * x[1]).cos(), 0.2]
        })
        .unwrap();
        let c = p.curl(&n).unwrap();
        // curl = (0, 0, ∂1 n2 − ∂2 n1) = (0, 0, 0)
        assert!(c.max_abs() < 1e-12);
        let div = p.divergence(&n).unwrap();
        let expect = ScalarField::from_fn(g, |x| PI * (PI * x[0]).cos() - PI * (PI * x[1]).sin())
            .unwrap();
        assert!(max_diff(div.values(), expect.values()) < 1e-11);
    }

    #[test]
    fn shifted_laplacian_inverts() {
        let p = plan(8);
        let g = *p.grid();
        let u = DirectorField::from_fn(g, |x| [x[0].sin(), (2.0 * x[1]).cos(), 1.0]).unwrap();
        // (1 − 2Δ) u
        let v = DirectorField::from_fn(g, |x| {
            [3.0 * x[0].sin(), 9.0 * (2.0 * x[1]).cos(), 1.0]
        })
        .unwrap();
        let w = p.solve_shifted_laplacian(&v, 1.0, 2.0).unwrap();
        assert!(max_diff(w.as_slice(), u.as_slice()) < 1e-12);
    }

    #[test]
    fn curl_self_adjoint_on_smooth_fields() {
        let p = plan(8);
        let g = *p.grid();
        let u = DirectorField::from_fn(g, |x| [x[1].sin(), (x[2] + x[0]).cos(), x[0].sin()]).unwrap();
        let v = DirectorField::from_fn(g, |x| [x[2].cos(), x[0].sin() * x[1].cos(), 0.3]).unwrap();
        let lhs = discrete_inner(&p.curl(&u).unwrap(), &v).unwrap();
        let rhs = discrete_inner(&u, &p.curl(&v).unwrap()).unwrap();
        assert!((lhs - rhs).abs() < 1e-11 * (1.0 + lhs.abs()));
    }
}
