mod common;

use proptest::prelude::*;
use tvflow_core::amos::{amos_step, AmosState};
use tvflow_core::biharmonic::{hundsdorfer_coupled_step, BiharmState, HundsdorferParams};
use tvflow_core::grid_ops::*;
use tvflow_core::linsolve::{assemble_directional, LineSystems};

fn field(nx: usize, ny: usize) -> impl Strategy<Value = Field> {
    proptest::collection::vec(-1.0f64..1.0, nx * ny).prop_map(move |v| {
        Field::from_vec(Grid2D::new(nx, ny, 1.0 / nx as f64).unwrap(), v).unwrap()
    })
}

const OPS: [fn(&Field) -> Field; 9] = [
    dx_forward,
    dy_backward,
    dxx,
    dyy,
    laplacian_5pt,
    dxy,
    dxxxx,
    dxxyy,
    dxx_dyy,
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn operators_commute_with_periodic_shifts(u in field(9, 7), a in -9isize..9, b in -7isize..7) {
        for op in OPS {
            let lhs = op(&u.shifted(a, b));
            let rhs = op(&u).shifted(a, b);
            prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12 * rhs.sup_norm().max(1.0));
        }
    }

    #[test]
    fn differences_have_zero_mean(u in field(8, 10)) {
        for op in OPS {
            let v = op(&u);
            prop_assert!(v.mean().abs() <= 1e-12 * v.sup_norm().max(1.0));
        }
    }

    #[test]
    fn line_solves_invert_their_matrices(
        b in field(10, 6),
        coeffs in proptest::collection::vec(0.1f64..3.0, 60),
        c1 in proptest::collection::vec(-2.0f64..2.0, 60),
        tau in 0.0f64..1e-3,
    ) {
        let g = *b.grid();
        let c2 = Field::from_vec(g, coeffs).unwrap();
        let c1 = Field::from_vec(g, c1).unwrap();
        for axis in [Axis::X, Axis::Y] {
            for up in [None, Some(&c1)] {
                let sys = LineSystems::directional(axis, &c2, up, tau, None).unwrap();
                let x = sys.solve(&b);
                for l in 0..g.extent(axis.other()) {
                    let a = assemble_directional(axis, l, &c2, up, tau).unwrap();
                    let back = a.matvec(&x.line(axis, l));
                    let scale = a.max_abs() * x.sup_norm() + b.sup_norm();
                    let err = back.iter().zip(b.line(axis, l)).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
                    prop_assert!(err <= 1e-12 * scale, "axis {axis:?} line {l}: {err}");
                }
            }
        }
    }

    #[test]
    fn schemes_are_translation_equivariant(u in field(12, 12), a in 0isize..12, b in 0isize..12) {
        let g = *u.grid();
        let p = HundsdorferParams::standard(0.1 * g.h().powi(2)).unwrap();
        let one = hundsdorfer_coupled_step(&BiharmState::new(u.clone()), p).unwrap().u;
        let two = hundsdorfer_coupled_step(&BiharmState::new(u.shifted(a, b)), p).unwrap().u;
        prop_assert!(one.shifted(a, b).max_abs_diff(&two) < 1e-10);
        let eps = 0.05;
        let dt = 0.1 * g.h().powi(3);
        let one = amos_step(&AmosState::new(u.clone(), eps).unwrap(), dt, eps).unwrap().u;
        let two = amos_step(&AmosState::new(u.shifted(a, b), eps).unwrap(), dt, eps).unwrap().u;
        prop_assert!(one.shifted(a, b).max_abs_diff(&two) < 1e-10);
    }
}
