//! Problem data `u_t - div(a grad u) = f` with Dirichlet data and an initial
//! condition, plus the named problems used by the experiments.
//!
//! All callables take `(x, y, t)`.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::Expr;

pub type ScalarField = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;
pub type VectorField = Arc<dyn Fn(f64, f64, f64) -> [f64; 2] + Send + Sync>;
pub type TensorField = Arc<dyn Fn(f64, f64, f64) -> [[f64; 2]; 2] + Send + Sync>;

#[derive(Clone)]
pub enum Diffusion {
    Constant([[f64; 2]; 2]),
    Field(TensorField),
}

impl Diffusion {
    pub fn identity() -> Self {
        Diffusion::Constant([[1.0, 0.0], [0.0, 1.0]])
    }

    pub fn at(&self, x: f64, y: f64, t: f64) -> [[f64; 2]; 2] {
        match self {
            Diffusion::Constant(a) => *a,
            Diffusion::Field(f) => f(x, y, t),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Diffusion::Constant(_))
    }
}

/// Eigenvalues `(min, max)` of a symmetric 2x2 matrix.
pub fn sym_eigenvalues(a: &[[f64; 2]; 2]) -> (f64, f64) {
    let m = 0.5 * (a[0][0] + a[1][1]);
    let d = (0.25 * (a[0][0] - a[1][1]).powi(2) + a[0][1] * a[0][1]).sqrt();
    (m - d, m + d)
}

/// Spectral norm of a symmetric 2x2 matrix.
pub fn spectral_norm(a: &[[f64; 2]; 2]) -> f64 {
    let (lo, hi) = sym_eigenvalues(a);
    lo.abs().max(hi.abs())
}

#[derive(Clone)]
pub struct ExactSolution {
    pub u: ScalarField,
    /// Spatial gradient.
    pub grad: VectorField,
}

#[derive(Clone)]
pub struct ProblemData {
    pub name: String,
    pub diffusion: Diffusion,
    /// Ellipticity lower bound supplied by the user.
    pub theta: f64,
    pub source: ScalarField,
    pub dirichlet: ScalarField,
    /// Initial condition, called with `t = 0`.
    pub initial: ScalarField,
    pub exact: Option<ExactSolution>,
}

impl std::fmt::Debug for ProblemData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemData")
            .field("name", &self.name)
            .field("theta", &self.theta)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

impl ProblemData {
    /// Checks symmetry of `a` and `min eig(a) >= theta (1 - 1e-8)` at the
    /// given points.
    pub fn check_ellipticity(&self, points: &[[f64; 3]]) -> Result<()> {
        if !(self.theta > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "ellipticity constant must be positive, got {}",
                self.theta
            )));
        }
        for p in points {
            let a = self.diffusion.at(p[0], p[1], p[2]);
            let scale = spectral_norm(&a).max(1.0);
            if (a[0][1] - a[1][0]).abs() > 1e-12 * scale {
                return Err(Error::InvalidArgument(format!(
                    "diffusion tensor is not symmetric at {p:?}"
                )));
            }
            let (lo, _) = sym_eigenvalues(&a);
            if lo < self.theta * (1.0 - 1e-8) {
                return Err(Error::InvalidArgument(format!(
                    "diffusion tensor has eigenvalue {lo} below theta = {} at {p:?}",
                    self.theta
                )));
            }
        }
        Ok(())
    }

    /// Problem with `a = I` manufactured from an exact solution: `f`, `g_D`
    /// and `u_0` are derived from `u`, `u_t` and the Laplacian.
    pub fn manufactured(
        name: &str,
        u: ScalarField,
        grad: VectorField,
        u_t: ScalarField,
        laplacian: ScalarField,
    ) -> Self {
        let source: ScalarField = {
            let (u_t, lap) = (u_t.clone(), laplacian.clone());
            Arc::new(move |x, y, t| u_t(x, y, t) - lap(x, y, t))
        };
        ProblemData {
            name: name.to_string(),
            diffusion: Diffusion::identity(),
            theta: 1.0,
            source,
            dirichlet: u.clone(),
            initial: u.clone(),
            exact: Some(ExactSolution { u, grad }),
        }
    }
}

/// `u = sin(20 pi t) exp(-5 ((x - 1/2)^2 + (y - 1/2)^2))`, `a = I`.
pub fn example1() -> ProblemData {
    let g = |x: f64, y: f64| (-5.0 * ((x - 0.5).powi(2) + (y - 0.5).powi(2))).exp();
    let w = 20.0 * PI;
    ProblemData::manufactured(
        "example1",
        Arc::new(move |x, y, t| (w * t).sin() * g(x, y)),
        Arc::new(move |x, y, t| {
            let s = (w * t).sin() * g(x, y);
            [-10.0 * (x - 0.5) * s, -10.0 * (y - 0.5) * s]
        }),
        Arc::new(move |x, y, t| w * (w * t).cos() * g(x, y)),
        Arc::new(move |x, y, t| {
            let r2 = (x - 0.5).powi(2) + (y - 0.5).powi(2);
            (w * t).sin() * (100.0 * r2 - 20.0) * g(x, y)
        }),
    )
}

/// `u = t^alpha sin(pi x) sin(pi y)`, `a = I`.
pub fn example2(alpha: f64) -> ProblemData {
    let s = |x: f64, y: f64| (PI * x).sin() * (PI * y).sin();
    ProblemData::manufactured(
        "example2",
        Arc::new(move |x, y, t| t.powf(alpha) * s(x, y)),
        Arc::new(move |x, y, t| {
            let ta = t.powf(alpha);
            [
                ta * PI * (PI * x).cos() * (PI * y).sin(),
                ta * PI * (PI * x).sin() * (PI * y).cos(),
            ]
        }),
        Arc::new(move |x, y, t| {
            if t == 0.0 {
                0.0
            } else {
                alpha * t.powf(alpha - 1.0) * s(x, y)
            }
        }),
        Arc::new(move |x, y, t| -2.0 * PI * PI * t.powf(alpha) * s(x, y)),
    )
}

/// `u = exp(-2 pi^2 t) sin(pi x) sin(pi y)`: free decay with zero data.
pub fn heat_decay() -> ProblemData {
    let mut p = ProblemData::manufactured(
        "heat_decay",
        Arc::new(|x, y, t| (-2.0 * PI * PI * t).exp() * (PI * x).sin() * (PI * y).sin()),
        Arc::new(|x, y, t| {
            let d = (-2.0 * PI * PI * t).exp() * PI;
            [d * (PI * x).cos() * (PI * y).sin(), d * (PI * x).sin() * (PI * y).cos()]
        }),
        Arc::new(|_, _, _| 0.0),
        Arc::new(|_, _, _| 0.0),
    );
    p.source = Arc::new(|_, _, _| 0.0);
    p.dirichlet = Arc::new(|_, _, _| 0.0);
    p
}

/// Space-time polynomial `sum c_k x^a y^b t^c` with its exact data.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    pub terms: Vec<([i32; 3], f64)>,
}

impl Polynomial {
    pub fn eval(&self, x: f64, y: f64, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|([a, b, c], k)| k * x.powi(*a) * y.powi(*b) * t.powi(*c))
            .sum()
    }

    /// Derivative along coordinate `d` (0 = x, 1 = y, 2 = t).
    pub fn derivative(&self, d: usize) -> Polynomial {
        Polynomial {
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e[d] > 0)
                .map(|(e, k)| {
                    let mut e2 = *e;
                    e2[d] -= 1;
                    (e2, k * e[d] as f64)
                })
                .collect(),
        }
    }

    pub fn degree(&self) -> i32 {
        self.terms.iter().map(|(e, _)| e.iter().sum()).max().unwrap_or(0)
    }
}

/// Manufactured problem whose exact solution is the given polynomial.
pub fn polynomial_problem(poly: Polynomial) -> ProblemData {
    let dx = poly.derivative(0);
    let dy = poly.derivative(1);
    let dt = poly.derivative(2);
    let lap_x = dx.derivative(0);
    let lap_y = dy.derivative(1);
    let p = Arc::new(poly);
    let pu = p.clone();
    ProblemData::manufactured(
        "polynomial",
        Arc::new(move |x, y, t| pu.eval(x, y, t)),
        Arc::new(move |x, y, t| [dx.eval(x, y, t), dy.eval(x, y, t)]),
        Arc::new(move |x, y, t| dt.eval(x, y, t)),
        Arc::new(move |x, y, t| lap_x.eval(x, y, t) + lap_y.eval(x, y, t)),
    )
}

/// Expressions for a user-defined problem.
#[derive(Clone, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CustomExpressions {
    /// Diffusion tensor entries `[[a11, a12], [a21, a22]]`; identity when absent.
    #[serde(default)]
    pub a: Option<[[String; 2]; 2]>,
    #[serde(default = "one")]
    pub theta: f64,
    pub f: String,
    pub g_d: String,
    pub u0: String,
    #[serde(default)]
    pub exact: Option<String>,
    #[serde(default)]
    pub exact_dx: Option<String>,
    #[serde(default)]
    pub exact_dy: Option<String>,
}

fn one() -> f64 {
    1.0
}

fn field(e: Expr) -> ScalarField {
    Arc::new(move |x, y, t| e.eval(x, y, t))
}

/// Builds problem data from expressions.
pub fn custom(exprs: &CustomExpressions) -> Result<ProblemData> {
    let diffusion = match &exprs.a {
        None => Diffusion::identity(),
        Some(a) => {
            let parsed = [
                [Expr::parse(&a[0][0])?, Expr::parse(&a[0][1])?],
                [Expr::parse(&a[1][0])?, Expr::parse(&a[1][1])?],
            ];
            Diffusion::Field(Arc::new(move |x, y, t| {
                [
                    [parsed[0][0].eval(x, y, t), parsed[0][1].eval(x, y, t)],
                    [parsed[1][0].eval(x, y, t), parsed[1][1].eval(x, y, t)],
                ]
            }))
        }
    };
    let exact = match (&exprs.exact, &exprs.exact_dx, &exprs.exact_dy) {
        (Some(u), Some(dx), Some(dy)) => {
            let (dx, dy) = (Expr::parse(dx)?, Expr::parse(dy)?);
            Some(ExactSolution {
                u: field(Expr::parse(u)?),
                grad: Arc::new(move |x, y, t| [dx.eval(x, y, t), dy.eval(x, y, t)]),
            })
        }
        (None, None, None) => None,
        _ => {
            return Err(Error::InvalidArgument(
                "exact solution needs all of exact, exact_dx and exact_dy".into(),
            ))
        }
    };
    Ok(ProblemData {
        name: "custom".into(),
        diffusion,
        theta: exprs.theta,
        source: field(Expr::parse(&exprs.f)?),
        dirichlet: field(Expr::parse(&exprs.g_d)?),
        initial: field(Expr::parse(&exprs.u0)?),
        exact,
    })
}

/// Named registry lookup for problems that need no parameters.
pub fn by_name(name: &str) -> Result<ProblemData> {
    match name {
        "example1" => Ok(example1()),
        "example2" => Ok(example2(0.5)),
        "heat_decay" => Ok(heat_decay()),
        other => Err(Error::InvalidArgument(format!(
            "unknown problem {other:?}, expected example1, example2, heat_decay or custom"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(p: &ProblemData) {
        // f = u_t - lap u against central differences of u
        let u = &p.exact.as_ref().unwrap().u;
        let grad = &p.exact.as_ref().unwrap().grad;
        let h = 1e-4;
        for &(x, y, t) in &[(0.3, 0.7, 0.41), (0.55, 0.2, 0.07)] {
            let ut = (u(x, y, t + h) - u(x, y, t - h)) / (2.0 * h);
            let lap = (u(x + h, y, t) + u(x - h, y, t) + u(x, y + h, t) + u(x, y - h, t) - 4.0 * u(x, y, t)) / (h * h);
            let f = (p.source)(x, y, t);
            assert!(
                (f - (ut - lap)).abs() < 1e-4 * (1.0 + f.abs()),
                "{}: {f} vs {}",
                p.name,
                ut - lap
            );
            let gx = (u(x + h, y, t) - u(x - h, y, t)) / (2.0 * h);
            let gy = (u(x, y + h, t) - u(x, y - h, t)) / (2.0 * h);
            let g = grad(x, y, t);
            assert!((g[0] - gx).abs() < 1e-6 && (g[1] - gy).abs() < 1e-6);
        }
    }

    #[test]
    fn manufactured_sources_are_consistent() {
        fd_check(&example1());
        fd_check(&example2(0.5));
        let poly = Polynomial {
            terms: vec![([2, 0, 1], 1.5), ([0, 3, 0], -0.5), ([1, 1, 1], 2.0)],
        };
        fd_check(&polynomial_problem(poly));
    }

    #[test]
    fn heat_decay_data_vanish() {
        let p = heat_decay();
        assert_eq!((p.source)(0.3, 0.3, 0.1), 0.0);
        assert_eq!((p.dirichlet)(0.0, 0.3, 0.1), 0.0);
        assert!(((p.initial)(0.5, 0.5, 0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ellipticity_check() {
        let mut p = example1();
        assert!(p.check_ellipticity(&[[0.5, 0.5, 0.5]]).is_ok());
        p.theta = 2.0;
        assert!(p.check_ellipticity(&[[0.5, 0.5, 0.5]]).is_err());
        p.theta = 0.5;
        p.diffusion = Diffusion::Constant([[1.0, 0.3], [0.2, 1.0]]);
        assert!(p.check_ellipticity(&[[0.5, 0.5, 0.5]]).is_err());
    }

    #[test]
    fn spectral_norm_of_symmetric() {
        assert!((spectral_norm(&[[2.0, 1.0], [1.0, 2.0]]) - 3.0).abs() < 1e-15);
        assert!((spectral_norm(&[[1.0, 0.0], [0.0, 1.0]]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn custom_problem_from_expressions() {
        let exprs = CustomExpressions {
            a: Some([["2".into(), "0".into()], ["0".into(), "1 + x".into()]]),
            theta: 1.0,
            f: "1".into(),
            g_d: "x + y".into(),
            u0: "0".into(),
            exact: None,
            exact_dx: None,
            exact_dy: None,
        };
        let p = custom(&exprs).unwrap();
        assert_eq!(p.diffusion.at(0.5, 0.0, 0.0), [[2.0, 0.0], [0.0, 1.5]]);
        assert_eq!((p.dirichlet)(0.25, 0.5, 0.0), 0.75);
        let mut bad = exprs.clone();
        bad.exact = Some("x".into());
        assert!(custom(&bad).is_err());
        assert!(by_name("nope").is_err());
    }
}
