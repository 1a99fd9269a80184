//! Two-point discrete gradients `D(n^m, n^{m+1})` of the Oseen–Frank energy.
//!
//! Each satisfies (exactly, or up to quadrature/regularization) the
//! energy-difference identity
//! `∫ D · (n^{m+1} − n^m) = F[n^{m+1}] − F[n^m]`
//! in the grid inner product, and reduces to `δF/δn` when both states agree.

use crate::energy::{
    oseen_frank_form, variational_derivative_unchecked, ElasticParams, EnergyBreakdown, Kinematics,
};
use crate::error::{Error, Result};
use crate::field::{inner_unchecked, lincomb_unchecked, DirectorField, ScalarField};
use crate::grid::Grid;
use crate::quadrature::gauss_legendre;
use crate::spectral::SpectralPlan;

/// Gauss points used by [`DiscreteGradientKind::mean_value`]. Two already
/// integrate the cubic integrand exactly; four is the conventional choice.
pub const DEFAULT_GAUSS_POINTS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DiscreteGradientKind {
    /// Gauss–Legendre approximation of the line integral of `δF/δn`.
    MeanValue { gauss_points: usize },
    /// Midpoint `δF/δn` plus a rank-one correction; `eps0` regularizes the
    /// denominator `∫|Δn|²`.
    Gonzalez { eps0: f64 },
    /// Trapezoidal averages of `n·∇×n` and `n×∇×n` inserted into the
    /// variational derivative at the midpoint.
    OseenFrank,
}

impl DiscreteGradientKind {
    pub fn mean_value() -> Self {
        DiscreteGradientKind::MeanValue {
            gauss_points: DEFAULT_GAUSS_POINTS,
        }
    }

    /// Gonzalez with `eps0 = 1e-14 * |Ω|`.
    pub fn gonzalez_for(grid: &Grid) -> Self {
        DiscreteGradientKind::Gonzalez {
            eps0: default_eps0(grid),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            DiscreteGradientKind::MeanValue { gauss_points } if gauss_points < 1 => Err(
                Error::InvalidArgument("mean-value gradient needs at least one Gauss point".into()),
            ),
            DiscreteGradientKind::Gonzalez { eps0 } if !(eps0.is_finite() && eps0 >= 0.0) => {
                Err(Error::InvalidArgument(format!(
                    "Gonzalez eps0 must be finite and nonnegative, got {eps0}"
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DiscreteGradientKind::MeanValue { .. } => "mean-value",
            DiscreteGradientKind::Gonzalez { .. } => "gonzalez",
            DiscreteGradientKind::OseenFrank => "oseen-frank",
        }
    }
}

pub fn default_eps0(grid: &Grid) -> f64 {
    1e-14 * grid.domain_volume()
}

/// `β^{m+1/2}`, `ω^{m+1/2}` and `n^{m+1/2}`.
#[derive(Clone, Debug)]
pub struct HalfStepFields {
    pub beta: ScalarField,
    pub omega: DirectorField,
    pub n_half: DirectorField,
}

pub fn half_step_fields(
    plan: &SpectralPlan,
    nm: &DirectorField,
    np1: &DirectorField,
) -> Result<HalfStepFields> {
    check(plan, nm, np1)?;
    let km = Kinematics::of_unchecked(plan, nm);
    let kp = Kinematics::of_unchecked(plan, np1);
    let avg = Kinematics::average(&km, &kp);
    Ok(HalfStepFields {
        beta: avg.beta,
        omega: avg.omega,
        n_half: lincomb_unchecked(0.5, nm, 0.5, np1),
    })
}

fn check(plan: &SpectralPlan, nm: &DirectorField, np1: &DirectorField) -> Result<()> {
    plan.grid().ensure_same(nm.grid())?;
    plan.grid().ensure_same(np1.grid())
}

pub fn dg_oseen_frank(
    plan: &SpectralPlan,
    nm: &DirectorField,
    np1: &DirectorField,
    p: &ElasticParams,
) -> Result<DirectorField> {
    discrete_gradient(plan, DiscreteGradientKind::OseenFrank, nm, np1, p)
}

pub fn dg_mean_value(
    plan: &SpectralPlan,
    nm: &DirectorField,
    np1: &DirectorField,
    p: &ElasticParams,
    gauss_points: usize,
) -> Result<DirectorField> {
    discrete_gradient(
        plan,
        DiscreteGradientKind::MeanValue { gauss_points },
        nm,
        np1,
        p,
    )
}

pub fn dg_gonzalez(
    plan: &SpectralPlan,
    nm: &DirectorField,
    np1: &DirectorField,
    p: &ElasticParams,
    eps0: f64,
) -> Result<DirectorField> {
    discrete_gradient(plan, DiscreteGradientKind::Gonzalez { eps0 }, nm, np1, p)
}

pub fn discrete_gradient(
    plan: &SpectralPlan,
    kind: DiscreteGradientKind,
    nm: &DirectorField,
    np1: &DirectorField,
    p: &ElasticParams,
) -> Result<DirectorField> {
    check(plan, nm, np1)?;
    Ok(AnchoredGradient::new(plan, kind, nm, *p)?.evaluate(np1))
}

/// `|∫ D·Δn − ΔF| / (1 + |ΔF|)`.
pub fn energy_difference_residual(
    plan: &SpectralPlan,
    kind: DiscreteGradientKind,
    nm: &DirectorField,
    np1: &DirectorField,
    p: &ElasticParams,
) -> Result<f64> {
    let d = discrete_gradient(plan, kind, nm, np1, p)?;
    let dn = lincomb_unchecked(1.0, np1, -1.0, nm);
    let de = Kinematics::of_unchecked(plan, np1).energy(p).total
        - Kinematics::of_unchecked(plan, nm).energy(p).total;
    Ok((inner_unchecked(&d, &dn) - de).abs() / (1.0 + de.abs()))
}

/// A discrete gradient with its first argument fixed, caching everything that
/// depends only on `n^m`. The nonlinear solver evaluates `D(n^m, ·)` many times
/// per step.
pub struct AnchoredGradient<'a> {
    plan: &'a SpectralPlan,
    kind: DiscreteGradientKind,
    params: ElasticParams,
    nm: &'a DirectorField,
    km: Kinematics,
    em: EnergyBreakdown,
}

impl<'a> AnchoredGradient<'a> {
    pub fn new(
        plan: &'a SpectralPlan,
        kind: DiscreteGradientKind,
        nm: &'a DirectorField,
        params: ElasticParams,
    ) -> Result<Self> {
        kind.validate()?;
        plan.grid().ensure_same(nm.grid())?;
        let km = Kinematics::of_unchecked(plan, nm);
        let em = km.energy(&params);
        Ok(AnchoredGradient {
            plan,
            kind,
            params,
            nm,
            km,
            em,
        })
    }

    pub fn anchor_energy(&self) -> EnergyBreakdown {
        self.em
    }

    /// `D(n^m, np1)`; `np1` must live on the plan's grid.
    pub fn evaluate(&self, np1: &DirectorField) -> DirectorField {
        let plan = self.plan;
        let p = &self.params;
        let nm = self.nm;
        match self.kind {
            DiscreteGradientKind::OseenFrank => {
                let kp = Kinematics::of_unchecked(plan, np1);
                let avg = Kinematics::average(&self.km, &kp);
                let n_half = lincomb_unchecked(0.5, nm, 0.5, np1);
                oseen_frank_form(plan, &n_half, &avg, p)
            }
            DiscreteGradientKind::MeanValue { gauss_points } => {
                let rule = gauss_legendre(gauss_points);
                let mut out = DirectorField::zeros(*nm.grid());
                for (&xi, &w) in rule.nodes.iter().zip(&rule.weights) {
                    // (nm + np1)/2 + (xi/2)(nm − np1)
                    let node = lincomb_unchecked(0.5 * (1.0 + xi), nm, 0.5 * (1.0 - xi), np1);
                    let g = variational_derivative_unchecked(plan, &node, p);
                    out.axpy(0.5 * w, &g).unwrap();
                }
                out
            }
            DiscreteGradientKind::Gonzalez { eps0 } => {
                let n_half = lincomb_unchecked(0.5, nm, 0.5, np1);
                let mut g = variational_derivative_unchecked(plan, &n_half, p);
                let dn = lincomb_unchecked(1.0, np1, -1.0, nm);
                let denom = inner_unchecked(&dn, &dn) + eps0;
                if denom == 0.0 {
                    return g;
                }
                let ep = Kinematics::of_unchecked(plan, np1).energy(p).total;
                let numer = ep - self.em.total - inner_unchecked(&g, &dn);
                g.axpy(numer / denom, &dn).unwrap();
                g
            }
        }
    }
}
