//! Oracle tests for the tensor layer: hand-checked curvature components
//! of the expanding-universe metric, flatness of the Minkowski metric,
//! metric compatibility, the contracted differential identity, and a
//! finite-difference cross-check of the connection coefficients.

mod common;

use cosmo_core::expr::{
    canonically_equal, decide_zero, eval, is_zero, Bindings, DecisionPath, Expr, ZeroDecision,
};
use cosmo_core::tensor::{IndexPosition, Metric, Tensor, TensorError};

fn p(s: &str) -> Expr {
    Expr::parse(s).unwrap_or_else(|e| panic!("parse {s:?}: {e}"))
}

fn assert_canon_eq(a: &Expr, b: &Expr) {
    assert!(
        canonically_equal(a, b).unwrap(),
        "not canonically equal:\n  left:  {a}\n  right: {b}"
    );
}

mod christoffel {
    use super::*;

    #[test]
    fn expanding_universe_oracles() {
        let m = Metric::frw();
        let gamma = m.christoffel();
        let g = |a: usize, b: usize, c: usize| gamma.component(&[a, b, c]).unwrap();
        // (coordinate order: t=0, r=1, theta=2, phi=3)
        assert_canon_eq(g(0, 1, 1), &p("R(t)*diff(R(t),t)/(c^2*(1 - k*r^2))"));
        assert_canon_eq(g(0, 2, 2), &p("R(t)*diff(R(t),t)*r^2/c^2"));
        assert_canon_eq(g(0, 3, 3), &p("R(t)*diff(R(t),t)*r^2*sin(theta)^2/c^2"));
        assert_canon_eq(g(1, 0, 1), &p("diff(R(t),t)/R(t)"));
        assert_canon_eq(g(1, 1, 1), &p("k*r/(1 - k*r^2)"));
        assert_canon_eq(g(1, 2, 2), &p("-r*(1 - k*r^2)"));
        assert_canon_eq(g(1, 3, 3), &p("-r*(1 - k*r^2)*sin(theta)^2"));
        assert_canon_eq(g(2, 1, 2), &p("1/r"));
        assert_canon_eq(g(2, 3, 3), &p("-sin(theta)*cos(theta)"));
        assert_canon_eq(g(3, 2, 3), &p("cos(theta)/sin(theta)"));
        assert_canon_eq(g(0, 0, 0), &Expr::zero());
        assert_canon_eq(g(1, 0, 0), &Expr::zero());
        // Symmetry in the two lower slots, all components.
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    assert_canon_eq(g(a, b, c), g(a, c, b));
                }
            }
        }
    }

    #[test]
    fn matches_finite_differences_of_the_metric() {
        let m = Metric::frw();
        let gamma = m.christoffel();
        let x = [0.5, 0.3, 0.7, 1.1];
        let scale = |t: f64| t.exp();
        let fd = common::christoffel_fd(
            &move |y| common::frw_metric_numeric(1.0, &scale, y),
            x,
            1e-5,
        );
        let mut b = Bindings::new();
        b.set_symbol("t", x[0])
            .set_symbol("r", x[1])
            .set_symbol("theta", x[2])
            .set_symbol("phi", x[3])
            .set_symbol("c", 1.0)
            .set_symbol("k", 1.0);
        b.set_function_rule("R", "t", |t| t.exp());
        for a in 0..4 {
            for i in 0..4 {
                for j in 0..4 {
                    let sym = eval(gamma.component(&[a, i, j]).unwrap(), &b).unwrap();
                    assert!(
                        common::close(sym, fd[a][i][j], 1e-5),
                        "Gamma[{a},{i},{j}]: symbolic {sym} vs finite difference {}",
                        fd[a][i][j]
                    );
                }
            }
        }
    }
}

mod curvature {
    use super::*;

    #[test]
    fn expanding_universe_ricci_oracles() {
        let m = Metric::frw();
        let ric = m.ricci_tensor();
        let r = |i: usize, j: usize| ric.component(&[i, j]).unwrap();
        assert_canon_eq(r(0, 0), &p("-3*diff(R(t),t,2)/R(t)"));
        assert_canon_eq(
            r(1, 1),
            &p("(R(t)*diff(R(t),t,2)/c^2 + 2*diff(R(t),t)^2/c^2 + 2*k)/(1 - k*r^2)"),
        );
        assert_canon_eq(
            r(2, 2),
            &p("r^2*(R(t)*diff(R(t),t,2)/c^2 + 2*diff(R(t),t)^2/c^2 + 2*k)"),
        );
        assert_canon_eq(
            r(3, 3),
            &p("r^2*sin(theta)^2*(R(t)*diff(R(t),t,2)/c^2 + 2*diff(R(t),t)^2/c^2 + 2*k)"),
        );
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert!(is_zero(r(i, j)).unwrap(), "Ric[{i},{j}] nonzero");
                }
            }
        }
    }

    #[test]
    fn expanding_universe_scalar_curvature() {
        let m = Metric::frw();
        assert_canon_eq(
            &m.ricci_scalar(),
            &p("6*(diff(R(t),t,2)*R(t)/c^2 + diff(R(t),t)^2/c^2 + k)/R(t)^2"),
        );
    }

    #[test]
    fn expanding_universe_einstein_time_component() {
        let m = Metric::frw();
        let ein = m.einstein_tensor();
        assert_canon_eq(
            ein.component(&[0, 0]).unwrap(),
            &p("3*(diff(R(t),t)^2 + k*c^2)/R(t)^2"),
        );
    }

    #[test]
    fn ricci_at_a_point_matches_closed_forms() {
        // R(t) = exp(t), c = 1, k = 1 at (t,r,theta) = (0.5, 0.3, 0.7):
        // exact derivative bindings, no differencing.
        let m = Metric::frw();
        let ric = m.ricci_tensor();
        let e = 0.5_f64.exp();
        let mut b = Bindings::new();
        b.set_symbol("t", 0.5)
            .set_symbol("r", 0.3)
            .set_symbol("theta", 0.7)
            .set_symbol("phi", 1.1)
            .set_symbol("c", 1.0)
            .set_symbol("k", 1.0);
        b.set_function("R", "t", 0, e)
            .set_function("R", "t", 1, e)
            .set_function("R", "t", 2, e);
        let spatial = 3.0 * e * e + 2.0; // R R'' + 2 R'^2 + 2k with R = e^t
        let cases = [
            ([0, 0], -3.0),
            ([1, 1], spatial / (1.0 - 0.09)),
            ([2, 2], 0.09 * spatial),
            ([3, 3], 0.09 * 0.7_f64.sin().powi(2) * spatial),
        ];
        for (idx, want) in cases {
            let got = eval(ric.component(&idx).unwrap(), &b).unwrap();
            assert!(
                common::close(got, want, 1e-6),
                "Ric[{idx:?}]: {got} vs {want}"
            );
        }
        let scalar = eval(&m.ricci_scalar(), &b).unwrap();
        let want = 6.0 * (1.0 + 1.0 + (-1.0_f64).exp());
        assert!(common::close(scalar, want, 1e-6), "scalar {scalar} vs {want}");
    }

    #[test]
    fn minkowski_is_flat() {
        let m = Metric::minkowski();
        for comp in m.christoffel().components() {
            assert!(comp.is_zero_literal(), "nonzero connection: {comp}");
        }
        for comp in m.ricci_tensor().components() {
            assert!(comp.is_zero_literal(), "nonzero curvature: {comp}");
        }
        assert!(m.ricci_scalar().is_zero_literal());
    }
}

mod compatibility {
    use super::*;

    fn assert_metric_compatible(m: &Metric) {
        let gamma = m.christoffel();
        let g = |a: usize, b: usize, c: usize| gamma.component(&[a, b, c]).unwrap();
        for k in 0..4 {
            for i in 0..4 {
                for j in 0..4 {
                    let mut nabla = m.component(i, j).diff(&m.coords()[k], 1);
                    for a in 0..4 {
                        nabla = nabla
                            - g(a, k, i).clone() * m.component(a, j).clone()
                            - g(a, k, j).clone() * m.component(i, a).clone();
                    }
                    assert!(
                        is_zero(&nabla).unwrap(),
                        "covariant derivative of metric nonzero at [{k},{i},{j}]: {nabla}"
                    );
                }
            }
        }
    }

    #[test]
    fn expanding_universe_metric_is_parallel() {
        assert_metric_compatible(&Metric::frw());
    }

    #[test]
    fn random_diagonal_metrics_are_parallel() {
        use rand::{Rng, SeedableRng};
        for seed in 1..=3u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let coords = ["t", "x", "y", "z"];
            let mut comps = vec![Expr::zero(); 16];
            for i in 0..4 {
                let c0: i64 = rng.gen_range(1..5);
                let c1: i64 = rng.gen_range(1..5);
                let var = coords[rng.gen_range(0..4usize)];
                comps[i * 4 + i] =
                    Expr::int(c0) + Expr::int(c1) * Expr::pow_int(Expr::sym(var), 2);
            }
            let m = Metric::new(coords, comps).unwrap();
            assert_metric_compatible(&m);
        }
    }

    #[test]
    fn inverse_contracts_to_identity() {
        let m = Metric::frw();
        for i in 0..4 {
            for k in 0..4 {
                let mut sum = Expr::zero();
                for j in 0..4 {
                    sum = sum + m.component(i, j).clone() * m.inverse_component(j, k).clone();
                }
                let sum = sum.simplify();
                if i == k {
                    assert!(sum.is_one_literal(), "g.ginv[{i}{k}] = {sum}");
                } else {
                    assert!(sum.is_zero_literal(), "g.ginv[{i}{k}] = {sum}");
                }
            }
        }
    }
}

mod identities {
    use super::*;

    #[test]
    fn contracted_curvature_divergence_vanishes() {
        let m = Metric::frw();
        let ein = m.einstein_tensor();
        let mixed = m.raise_index(&ein, 1).unwrap();
        let div = m.covariant_divergence(&mixed).unwrap();
        for (i, comp) in div.components().iter().enumerate() {
            let decision = decide_zero(comp).unwrap();
            assert_eq!(
                decision,
                ZeroDecision::Zero(DecisionPath::Canonical),
                "divergence component {i} not canonically zero: {comp}"
            );
        }
    }

    #[test]
    fn divergence_accepts_fully_lowered_input() {
        let m = Metric::frw();
        let ein = m.einstein_tensor();
        let direct = m.covariant_divergence(&ein).unwrap();
        for comp in direct.components() {
            assert!(is_zero(comp).unwrap());
        }
    }

    #[test]
    fn comoving_velocity_has_unit_norm() {
        let m = Metric::frw();
        let u = Tensor::new(
            "u",
            vec![IndexPosition::Down],
            vec![p("-c"), Expr::zero(), Expr::zero(), Expr::zero()],
        )
        .unwrap();
        let up = m.raise_index(&u, 0).unwrap();
        let mut norm = Expr::zero();
        for i in 0..4 {
            norm = norm + up.component(&[i]).unwrap().clone() * u.component(&[i]).unwrap().clone();
        }
        assert_canon_eq(&norm, &p("-1"));
        assert_canon_eq(up.component(&[0]).unwrap(), &p("1/c"));
    }

    #[test]
    fn wave_operator_on_time_scalar() {
        let m = Metric::frw();
        let boxed = m.box_scalar(&Expr::func("phi", "t"));
        assert_canon_eq(
            &boxed,
            &p("-(diff(phi(t),t,2) + 3*diff(R(t),t)*diff(phi(t),t)/R(t))/c^2"),
        );
    }

    #[test]
    fn raise_then_lower_round_trips() {
        let m = Metric::frw();
        let ein = m.einstein_tensor();
        let back = m
            .lower_index(&m.raise_index(&ein, 1).unwrap(), 1)
            .unwrap();
        for (a, b) in ein.components().iter().zip(back.components()) {
            assert_canon_eq(a, b);
        }
    }
}

mod validation {
    use super::*;

    #[test]
    fn component_count_is_checked() {
        let err = Tensor::new("T", vec![IndexPosition::Down], vec![Expr::zero()]).unwrap_err();
        assert_eq!(
            err,
            TensorError::ComponentCount {
                expected: 4,
                got: 1
            }
        );
    }

    #[test]
    fn degenerate_metric_is_rejected() {
        let mut comps = vec![Expr::zero(); 16];
        comps[0] = Expr::one();
        comps[5] = Expr::one();
        comps[10] = Expr::one();
        // leave [3,3] zero
        let err = Metric::new(["t", "x", "y", "z"], comps).unwrap_err();
        assert_eq!(err, TensorError::Degenerate);
    }

    #[test]
    fn asymmetric_metric_is_rejected() {
        let mut comps = vec![Expr::zero(); 16];
        comps[0] = Expr::one();
        comps[5] = Expr::one();
        comps[10] = Expr::one();
        comps[15] = Expr::one();
        comps[1] = Expr::sym("a"); // [0,1] without matching [1,0]
        let err = Metric::new(["t", "x", "y", "z"], comps).unwrap_err();
        assert_eq!(err, TensorError::NotSymmetric { i: 0, j: 1 });
    }

    #[test]
    fn slot_errors_are_reported() {
        let m = Metric::frw();
        let ein = m.einstein_tensor();
        assert_eq!(
            m.raise_index(&ein, 2).unwrap_err(),
            TensorError::SlotOutOfRange { slot: 2, rank: 2 }
        );
        let mixed = m.raise_index(&ein, 1).unwrap();
        assert_eq!(
            m.raise_index(&mixed, 1).unwrap_err(),
            TensorError::SlotPosition {
                slot: 1,
                position: IndexPosition::Up
            }
        );
        let vec = Tensor::new(
            "v",
            vec![IndexPosition::Down],
            vec![Expr::zero(), Expr::zero(), Expr::zero(), Expr::zero()],
        )
        .unwrap();
        assert_eq!(
            m.covariant_divergence(&vec).unwrap_err(),
            TensorError::Rank {
                expected: 2,
                got: 1
            }
        );
    }
}
