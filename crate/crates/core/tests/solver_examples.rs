use std::sync::Arc;

use stdg_core::*;

fn p_spec(p: usize) -> BasisSpec {
    BasisSpec::uniform(IndexKind::TotalDegree, p)
}

fn quadratic() -> Polynomial {
    Polynomial {
        terms: vec![
            ([0, 0, 0], 1.0),
            ([1, 0, 0], 0.5),
            ([0, 1, 0], -2.0),
            ([0, 0, 1], 3.0),
            ([2, 0, 0], 1.0),
            ([1, 1, 0], -1.0),
            ([0, 1, 1], 2.0),
            ([0, 0, 2], -0.7),
        ],
    }
}

#[test]
fn reproduces_polynomials_of_the_space_degree() {
    let mesh = build_rectangular_mesh(3, 3, Rect::UNIT).unwrap();
    let grid = uniform_partition(1.0, 3).unwrap();
    let data = polynomial_problem(quadratic());
    let sol = march(
        &mesh,
        &grid,
        &p_spec(2),
        &data,
        &Default::default(),
        &Default::default(),
    )
    .unwrap();
    let r = error_norms(&mesh, &sol, &data, data.exact.as_ref().unwrap(), &Default::default(), 4).unwrap();
    assert!(r.e_l2l2 < 1e-10, "{r:?}");
    assert!(r.e_l2h1 < 1e-9, "{r:?}");
    assert!(r.dg_norm_of_error < 1e-8, "{r:?}");
}

#[test]
fn zero_data_gives_zero_solution() {
    let mesh = build_rectangular_mesh(2, 2, Rect::UNIT).unwrap();
    let grid = uniform_partition(0.5, 3).unwrap();
    let zero: problem::ScalarField = Arc::new(|_, _, _| 0.0);
    let data = ProblemData {
        name: "zero".into(),
        diffusion: Diffusion::identity(),
        theta: 1.0,
        source: zero.clone(),
        dirichlet: zero.clone(),
        initial: zero,
        exact: None,
    };
    let sol = march(
        &mesh,
        &grid,
        &p_spec(2),
        &data,
        &Default::default(),
        &Default::default(),
    )
    .unwrap();
    assert!(sol.coeffs.iter().flatten().all(|c| *c == 0.0));
}

#[test]
fn heat_decay_matches_analytic_norm() {
    let mesh = build_rectangular_mesh(8, 8, Rect::UNIT).unwrap();
    let grid = uniform_partition(0.1, 10).unwrap();
    let data = heat_decay();
    let sol = march(
        &mesh,
        &grid,
        &p_spec(2),
        &data,
        &Default::default(),
        &Default::default(),
    )
    .unwrap();
    // |u(0.1)|_{L2} = exp(-0.2 pi^2) / 2
    let exact_norm = (-0.2 * std::f64::consts::PI.powi(2)).exp() / 2.0;
    let zero = ExactSolution {
        u: Arc::new(|_, _, _| 0.0),
        grad: Arc::new(|_, _, _| [0.0; 2]),
    };
    let discrete_norm = analysis::spatial_l2_error(&mesh, &sol, &zero, 0.1, true, 4);
    assert!(
        (discrete_norm - exact_norm).abs() < 3e-3 * exact_norm,
        "{discrete_norm} vs {exact_norm}"
    );
    assert!((exact_norm - 0.0695).abs() < 1e-3);
}

#[test]
fn later_data_does_not_affect_earlier_slabs() {
    let mesh = build_rectangular_mesh(2, 2, Rect::UNIT).unwrap();
    let grid = uniform_partition(1.0, 4).unwrap();
    let base = example1();
    let mut changed = base.clone();
    let f = base.source.clone();
    changed.source = Arc::new(move |x, y, t| if t > 0.5 { f(x, y, t) + 10.0 } else { f(x, y, t) });
    let a = march(
        &mesh,
        &grid,
        &p_spec(1),
        &base,
        &Default::default(),
        &Default::default(),
    )
    .unwrap();
    let b = march(
        &mesh,
        &grid,
        &p_spec(1),
        &changed,
        &Default::default(),
        &Default::default(),
    )
    .unwrap();
    assert_eq!(a.coeffs[0], b.coeffs[0]);
    assert_eq!(a.coeffs[1], b.coeffs[1]);
    assert_ne!(a.coeffs[2], b.coeffs[2]);
}

#[test]
fn direct_and_gmres_agree() {
    let mesh = build_rectangular_mesh(4, 4, Rect::UNIT).unwrap();
    let grid = uniform_partition(0.2, 2).unwrap();
    let data = example1();
    let direct = SolverOptions {
        kind: SolverKind::Direct,
        ..Default::default()
    };
    let iterative = SolverOptions {
        kind: SolverKind::Gmres,
        ..Default::default()
    };
    let a = march(&mesh, &grid, &p_spec(2), &data, &Default::default(), &direct).unwrap();
    let b = march(&mesh, &grid, &p_spec(2), &data, &Default::default(), &iterative).unwrap();
    assert_eq!(b.stats[0].method, "gmres");
    let scale = a.coeffs.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for (x, y) in a.coeffs.iter().flatten().zip(b.coeffs.iter().flatten()) {
        assert!((x - y).abs() <= 1e-9 * scale);
    }
}

#[test]
fn local_time_refinement_keeps_polynomial_exactness() {
    let mesh = build_rectangular_mesh(2, 2, Rect::UNIT).unwrap();
    let grid = uniform_partition(1.0, 2)
        .unwrap()
        .refine_locally(0, 1, 3, 4)
        .unwrap()
        .refine_locally(1, 2, 2, 4)
        .unwrap();
    let data = polynomial_problem(quadratic());
    let sol = march(
        &mesh,
        &grid,
        &p_spec(2),
        &data,
        &Default::default(),
        &Default::default(),
    )
    .unwrap();
    let r = error_norms(&mesh, &sol, &data, data.exact.as_ref().unwrap(), &Default::default(), 4).unwrap();
    assert!(r.e_l2l2 < 1e-10, "{r:?}");
}

#[test]
fn evaluation_picks_one_sided_limits() {
    let mesh = build_rectangular_mesh(2, 2, Rect::UNIT).unwrap();
    let grid = uniform_partition(1.0, 2).unwrap();
    let data = heat_decay();
    let sol = march(
        &mesh,
        &grid,
        &p_spec(1),
        &data,
        &Default::default(),
        &Default::default(),
    )
    .unwrap();
    let minus = sol.evaluate(&mesh, 0.3, 0.3, 0.5, Side::Minus).unwrap();
    let plus = sol.evaluate(&mesh, 0.3, 0.3, 0.5, Side::Plus).unwrap();
    assert_ne!(minus.0, plus.0);
    assert!(sol.evaluate(&mesh, 1.5, 0.3, 0.5, Side::Minus).is_err());
    assert!(sol.evaluate(&mesh, 0.3, 0.3, 1.5, Side::Minus).is_err());
}

#[test]
fn variable_diffusion_polynomial_exactness() {
    // u = x + y t, a = diag(1 + x, 2): div(a grad u) = 1, u_t = y
    let mut data = polynomial_problem(Polynomial {
        terms: vec![([1, 0, 0], 1.0), ([0, 1, 1], 1.0)],
    });
    data.diffusion = Diffusion::Field(Arc::new(|x, _, _| [[1.0 + x, 0.0], [0.0, 2.0]]));
    data.source = Arc::new(|_, y, _| y - 1.0);
    let mesh = build_rectangular_mesh(2, 2, Rect::UNIT).unwrap();
    let grid = uniform_partition(1.0, 2).unwrap();
    let sol = march(
        &mesh,
        &grid,
        &p_spec(2),
        &data,
        &Default::default(),
        &Default::default(),
    )
    .unwrap();
    let r = error_norms(&mesh, &sol, &data, data.exact.as_ref().unwrap(), &Default::default(), 4).unwrap();
    assert!(r.e_l2l2 < 1e-10, "{r:?}");
}
