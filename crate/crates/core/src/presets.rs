//! Named initial conditions and random smooth unit fields.

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::DirectorField;
use crate::grid::Grid;
use crate::manufactured::exact_solution;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    /// `(sin(2 sin πx1) cos πx2, sin(2 sin πx1) sin πx2, cos(2 sin πx1))`.
    Utest1,
    /// `(sin(πx1 + 2 cos πx2), 0, cos(πx1 + 2 cos πx2))`.
    Utest2,
    /// The manufactured solution at `t = 0`.
    Ana,
}

impl Preset {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "utest1" => Ok(Preset::Utest1),
            "utest2" => Ok(Preset::Utest2),
            "ana" => Ok(Preset::Ana),
            other => Err(Error::InvalidArgument(format!("unknown initial condition preset `{other}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Utest1 => "utest1",
            Preset::Utest2 => "utest2",
            Preset::Ana => "ana",
        }
    }

    pub fn value(&self, x: [f64; 3]) -> [f64; 3] {
        match self {
            Preset::Utest1 => {
                let a = 2.0 * (PI * x[0]).sin();
                let (s, c) = a.sin_cos();
                [s * (PI * x[1]).cos(), s * (PI * x[1]).sin(), c]
            }
            Preset::Utest2 => {
                let a = PI * x[0] + 2.0 * (PI * x[1]).cos();
                [a.sin(), 0.0, a.cos()]
            }
            Preset::Ana => exact_solution(x, 0.0),
        }
    }

    pub fn sample(&self, grid: &Grid) -> DirectorField {
        DirectorField::from_fn(*grid, |x| self.value(x)).expect("presets are finite")
    }
}

/// Unit field `(sin θ cos φ, sin θ sin φ, cos θ)` whose angles are random
/// trigonometric sums with wavenumbers up to `max_mode` along each resolved
/// axis. Smooth and periodic on the grid.
pub fn random_unit_field<R: Rng>(grid: &Grid, max_mode: usize, amplitude: f64, rng: &mut R) -> DirectorField {
    let dims = grid.dims();
    let lengths = grid.lengths();
    let origin = grid.origin();
    let range = |axis: usize| -> i64 {
        if dims[axis] == 1 {
            0
        } else {
            max_mode as i64
        }
    };
    let mut terms: Vec<([f64; 3], f64, f64, usize)> = Vec::new();
    for which in 0..2 {
        for k1 in -range(0)..=range(0) {
            for k2 in -range(1)..=range(1) {
                for k3 in -range(2)..=range(2) {
                    let k = [k1 as f64, k2 as f64, k3 as f64];
                    let decay = 1.0 + k.iter().map(|v| v * v).sum::<f64>();
                    let amp = amplitude * rng.random_range(-1.0..1.0) / decay;
                    let phase = rng.random_range(0.0..2.0 * PI);
                    terms.push((k, amp, phase, which));
                }
            }
        }
    }
    let theta0 = rng.random_range(0.0..PI);
    let phi0 = rng.random_range(0.0..2.0 * PI);
    DirectorField::from_fn(*grid, |x| {
        let mut angle = [theta0, phi0];
        for (k, amp, phase, which) in &terms {
            let arg: f64 = (0..3).map(|a| 2.0 * PI * k[a] * (x[a] - origin[a]) / lengths[a]).sum();
            angle[*which] += amp * (arg + phase).cos();
        }
        let (st, ct) = angle[0].sin_cos();
        let (sp, cp) = angle[1].sin_cos();
        [st * cp, st * sp, ct]
    })
    .expect("random field is finite")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::linf_length_error;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn presets_are_unit_and_periodic() {
        let g = Grid::unit_square_2d(40).unwrap();
        for p in [Preset::Utest1, Preset::Utest2] {
            let f = p.sample(&g);
            assert!(linf_length_error(&f) < 1e-15);
            let a = p.value([-1.0, 0.3, 0.0]);
            let b = p.value([1.0, 0.3, 0.0]);
            let c = p.value([0.2, -1.0, 0.0]);
            let d = p.value([0.2, 1.0, 0.0]);
            for i in 0..3 {
                assert!((a[i] - b[i]).abs() < 1e-14 && (c[i] - d[i]).abs() < 1e-14);
            }
        }
        assert_eq!(Preset::Utest2.sample(&g).component(1).iter().map(|v| v.abs()).sum::<f64>(), 0.0);
        assert_eq!(Preset::Utest1.value([0.0, 0.0, 0.0]), [0.0, 0.0, 1.0]);
    }

    #[test]
    fn names_round_trip() {
        for p in [Preset::Utest1, Preset::Utest2, Preset::Ana] {
            assert_eq!(Preset::from_name(p.name()).unwrap(), p);
        }
        assert!(Preset::from_name("utest3").is_err());
    }

    #[test]
    fn random_fields_are_unit_and_seeded() {
        let g = Grid::periodic_cube(8).unwrap();
        let a = random_unit_field(&g, 2, 0.5, &mut ChaCha8Rng::seed_from_u64(1));
        let b = random_unit_field(&g, 2, 0.5, &mut ChaCha8Rng::seed_from_u64(1));
        let c = random_unit_field(&g, 2, 0.5, &mut ChaCha8Rng::seed_from_u64(2));
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(linf_length_error(&a) < 1e-15);
        let flat = Grid::unit_square_2d(8).unwrap();
        assert!(random_unit_field(&flat, 3, 0.5, &mut ChaCha8Rng::seed_from_u64(3)).is_finite());
    }
}
