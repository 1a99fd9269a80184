//! Oseen–Frank elastic energy on periodic domains and its variational
//! derivative.
//!
//! Every nonlinear product is formed pointwise in physical space and only then
//! differentiated spectrally. The discrete gradients in
//! [`crate::discrete_gradient`] follow the same order, which is what lets the
//! energy-difference identity hold to roundoff in the grid inner product.

use crate::error::{Error, Result};
use crate::field::{
    cross_unchecked, dot_unchecked, inner_unchecked, lincomb_unchecked, scalar_inner,
    scale_unchecked, DirectorField, ScalarField,
};
use crate::spectral::SpectralPlan;

/// Splay, twist and bend moduli.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElasticParams {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
}

impl ElasticParams {
    pub fn new(k1: f64, k2: f64, k3: f64) -> Result<Self> {
        for (name, k) in [("k1", k1), ("k2", k2), ("k3", k3)] {
            if !(k.is_finite() && k >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be finite and nonnegative, got {k}"
                )));
            }
        }
        Ok(ElasticParams { k1, k2, k3 })
    }

    pub fn isotropic(k: f64) -> Result<Self> {
        ElasticParams::new(k, k, k)
    }

    pub fn max_modulus(&self) -> f64 {
        self.k1.max(self.k2).max(self.k3)
    }

    pub fn is_zero(&self) -> bool {
        self.k1 == 0.0 && self.k2 == 0.0 && self.k3 == 0.0
    }
}

/// Unweighted splay/twist/bend integrals and the weighted total
/// `(k1 F1 + k2 F2 + k3 F3) / 2`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EnergyBreakdown {
    pub splay: f64,
    pub twist: f64,
    pub bend: f64,
    pub total: f64,
}

/// Pointwise deformation measures of one state: `∇·n`, `∇×n`, `∇(∇·n)`,
/// `β = n·∇×n` and `ω = n×∇×n`.
#[derive(Clone, Debug)]
pub struct Kinematics {
    pub div: ScalarField,
    pub curl: DirectorField,
    pub grad_div: DirectorField,
    pub beta: ScalarField,
    pub omega: DirectorField,
}

impl Kinematics {
    pub fn of(plan: &SpectralPlan, n: &DirectorField) -> Result<Self> {
        plan.grid().ensure_same(n.grid())?;
        Ok(Kinematics::of_unchecked(plan, n))
    }

    pub(crate) fn of_unchecked(plan: &SpectralPlan, n: &DirectorField) -> Self {
        let (div, curl, grad_div) = plan.first_and_second_derivatives(n);
        let beta = dot_unchecked(n, &curl);
        let omega = cross_unchecked(n, &curl);
        Kinematics {
            div,
            curl,
            grad_div,
            beta,
            omega,
        }
    }

    pub fn energy(&self, p: &ElasticParams) -> EnergyBreakdown {
        let splay = scalar_inner(&self.div, &self.div).unwrap();
        let twist = scalar_inner(&self.beta, &self.beta).unwrap();
        let bend = inner_unchecked(&self.omega, &self.omega);
        EnergyBreakdown {
            splay,
            twist,
            bend,
            total: 0.5 * (p.k1 * splay + p.k2 * twist + p.k3 * bend),
        }
    }

    /// Arithmetic mean of two states' measures.
    pub(crate) fn average(a: &Kinematics, b: &Kinematics) -> Kinematics {
        let avg_s = |x: &ScalarField, y: &ScalarField| {
            let v = x
                .values()
                .iter()
                .zip(y.values())
                .map(|(p, q)| 0.5 * (p + q))
                .collect();
            ScalarField::from_raw(*x.grid(), v)
        };
        let avg_v = |x: &DirectorField, y: &DirectorField| lincomb_unchecked(0.5, x, 0.5, y);
        Kinematics {
            div: avg_s(&a.div, &b.div),
            curl: avg_v(&a.curl, &b.curl),
            grad_div: avg_v(&a.grad_div, &b.grad_div),
            beta: avg_s(&a.beta, &b.beta),
            omega: avg_v(&a.omega, &b.omega),
        }
    }
}

/// `−k1 ∇(∇·n) + k2 [β ∇×n + ∇×(β n)] + k3 [(∇×n)×ω + ∇×(ω×n)]`.
///
/// With `β`, `ω` taken from `n` itself this is the variational derivative;
/// with `β`, `ω` averaged over two states and `n`, `∇×n`, `∇(∇·n)` at their
/// midpoint it is the Oseen–Frank discrete gradient.
pub(crate) fn oseen_frank_form(
    plan: &SpectralPlan,
    n: &DirectorField,
    k: &Kinematics,
    p: &ElasticParams,
) -> DirectorField {
    let grid = *n.grid();
    let mut out = DirectorField::zeros(grid);
    if p.k1 != 0.0 {
        out.axpy(-p.k1, &k.grad_div).unwrap();
    }
    let mut curl_arg = DirectorField::zeros(grid);
    let mut curl_needed = false;
    if p.k2 != 0.0 {
        out.axpy(p.k2, &scale_unchecked(&k.beta, &k.curl)).unwrap();
        curl_arg.axpy(p.k2, &scale_unchecked(&k.beta, n)).unwrap();
        curl_needed = true;
    }
    if p.k3 != 0.0 {
        out.axpy(p.k3, &cross_unchecked(&k.curl, &k.omega)).unwrap();
        curl_arg.axpy(p.k3, &cross_unchecked(&k.omega, n)).unwrap();
        curl_needed = true;
    }
    if curl_needed {
        out.axpy(1.0, &plan.curl_unchecked(&curl_arg)).unwrap();
    }
    out
}

pub fn energy(plan: &SpectralPlan, n: &DirectorField, p: &ElasticParams) -> Result<EnergyBreakdown> {
    Ok(Kinematics::of(plan, n)?.energy(p))
}

/// Unconstrained variational derivative `δF/δn`.
pub fn variational_derivative(
    plan: &SpectralPlan,
    n: &DirectorField,
    p: &ElasticParams,
) -> Result<DirectorField> {
    let k = Kinematics::of(plan, n)?;
    Ok(oseen_frank_form(plan, n, &k, p))
}

pub(crate) fn variational_derivative_unchecked(
    plan: &SpectralPlan,
    n: &DirectorField,
    p: &ElasticParams,
) -> DirectorField {
    let k = Kinematics::of_unchecked(plan, n);
    oseen_frank_form(plan, n, &k, p)
}

/// Right-hand side of the rotational form, `−(n × δF/δn) × n`.
pub fn constrained_rhs(
    plan: &SpectralPlan,
    n: &DirectorField,
    p: &ElasticParams,
) -> Result<DirectorField> {
    let g = variational_derivative(plan, n, p)?;
    Ok(cross_unchecked(&cross_unchecked(n, &g), n).scaled(-1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use std::f64::consts::PI;

    fn twist(plan: &SpectralPlan) -> DirectorField {
        DirectorField::from_fn(*plan.grid(), |x| [x[2].cos(), x[2].sin(), 0.0]).unwrap()
    }

    #[test]
    fn rejects_negative_moduli() {
        assert!(ElasticParams::new(-1.0, 1.0, 1.0).is_err());
        assert!(ElasticParams::new(1.0, f64::NAN, 1.0).is_err());
        assert!(ElasticParams::new(0.0, 0.0, 0.0).is_ok());
    }

    #[test]
    fn uniform_field_has_no_energy() {
        let plan = SpectralPlan::new(Grid::periodic_cube(8).unwrap());
        let n = DirectorField::constant(*plan.grid(), [0.0, 0.0, 1.0]);
        let p = ElasticParams::isotropic(1.0).unwrap();
        assert_eq!(energy(&plan, &n, &p).unwrap().total, 0.0);
        assert!(variational_derivative(&plan, &n, &p).unwrap().max_abs() < 1e-14);
        assert!(constrained_rhs(&plan, &n, &p).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn twist_field_energy() {
        let plan = SpectralPlan::new(Grid::periodic_cube(8).unwrap());
        let n = twist(&plan);
        let e = energy(&plan, &n, &ElasticParams::isotropic(1.0).unwrap()).unwrap();
        let vol = (2.0 * PI).powi(3);
        assert!((e.twist - vol).abs() < 1e-10);
        assert!(e.splay.abs() < 1e-20 && e.bend.abs() < 1e-20);
        assert!((e.total - 124.0251).abs() < 1e-4);
    }

    #[test]
    fn splay_bend_field_energy() {
        let plan = SpectralPlan::new(Grid::periodic_cube(16).unwrap());
        let n = DirectorField::from_fn(*plan.grid(), |x| [x[0].sin(), 0.0, x[0].cos()]).unwrap();
        let e = energy(&plan, &n, &ElasticParams::isotropic(1.0).unwrap()).unwrap();
        let four_pi3 = 4.0 * PI.powi(3);
        assert!((e.splay - four_pi3).abs() < 1e-9);
        assert!((e.bend - four_pi3).abs() < 1e-9);
        assert!(e.twist.abs() < 1e-20);
        assert!((e.total - four_pi3).abs() < 1e-9);
    }

    #[test]
    fn twist_variational_derivative_is_twice_the_field() {
        let plan = SpectralPlan::new(Grid::periodic_cube(8).unwrap());
        let n = twist(&plan);
        let p = ElasticParams::new(0.0, 1.0, 0.0).unwrap();
        let g = variational_derivative(&plan, &n, &p).unwrap();
        let diff = lincomb_unchecked(1.0, &g, -2.0, &n);
        assert!(diff.max_abs() < 1e-11);
        assert!(constrained_rhs(&plan, &n, &p).unwrap().max_abs() < 1e-11);
    }
}
