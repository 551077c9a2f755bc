//! Local cost functions.
//!
//! Each node owns one closed, proper, convex `f_i`. The solver only ever
//! touches it through [`CostFunction`]: evaluation, the proximal map, and
//! (for diagnostics) the gradient.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Result, Vector};

pub trait CostFunction {
    fn dim(&self) -> usize;

    fn eval(&self, x: &Vector) -> f64;

    /// `argmin_x f(x) + (ρ/2)‖x − target‖²`.
    fn prox(&self, target: &Vector, rho: f64) -> Result<Vector>;

    fn gradient(&self, _x: &Vector) -> Option<Vector> {
        None
    }

    /// `argmin_x f(x) + λᵀx + (ρ/2)‖x − z‖²`, which is the prox at `z − λ/ρ`.
    fn x_update(&self, lambda: &Vector, z: &Vector, rho: f64) -> Result<Vector> {
        self.prox(&(z - lambda / rho), rho)
    }
}

/// `f(x) = ½‖Ax − b‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    a: DMatrix<f64>,
    b: Vector,
}

impl LeastSquares {
    pub fn new(a: DMatrix<f64>, b: Vector) -> Result<Self> {
        if a.nrows() != b.len() {
            return Err(Error::Dimension(format!(
                "A has {} rows but b has {} entries",
                a.nrows(),
                b.len()
            )));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &Vector {
        &self.b
    }
}

impl CostFunction for LeastSquares {
    fn dim(&self) -> usize {
        self.a.ncols()
    }

    fn eval(&self, x: &Vector) -> f64 {
        0.5 * (&self.a * x - &self.b).norm_squared()
    }

    fn prox(&self, target: &Vector, rho: f64) -> Result<Vector> {
        let zeros = Vector::zeros(self.dim());
        ls_prox(&self.a, &self.b, &zeros, target, rho)
    }

    fn gradient(&self, x: &Vector) -> Option<Vector> {
        Some(self.a.tr_mul(&(&self.a * x - &self.b)))
    }

    fn x_update(&self, lambda: &Vector, z: &Vector, rho: f64) -> Result<Vector> {
        ls_prox(&self.a, &self.b, lambda, z, rho)
    }
}

/// Solves `(AᵀA + ρI)x = Aᵀb − λ + ρz` by Cholesky factorization.
pub fn ls_prox(
    a: &DMatrix<f64>,
    b: &Vector,
    lambda: &Vector,
    z: &Vector,
    rho: f64,
) -> Result<Vector> {
    if rho.is_nan() || rho <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "penalty must be positive, got {rho}"
        )));
    }
    let p = a.ncols();
    if lambda.len() != p || z.len() != p || b.len() != a.nrows() {
        return Err(Error::Dimension("least-squares prox operands".into()));
    }
    let normal = a.tr_mul(a) + DMatrix::identity(p, p) * rho;
    let rhs = a.tr_mul(b) - lambda + z * rho;
    let chol = normal.cholesky().ok_or(Error::Singular)?;
    Ok(chol.solve(&rhs))
}

/// Distributed least squares: node `i` holds `(A_i, b_i)` with `A_i ∈ ℝ^{q×p}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquaresInstance {
    p: usize,
    q: usize,
    seed: Option<u64>,
    costs: Vec<LeastSquares>,
}

impl LeastSquaresInstance {
    pub fn from_costs(costs: Vec<LeastSquares>, seed: Option<u64>) -> Result<Self> {
        let first = costs
            .first()
            .ok_or_else(|| Error::Dimension("instance has no nodes".into()))?;
        let (q, p) = first.a.shape();
        if costs.iter().any(|c| c.a.shape() != (q, p)) {
            return Err(Error::Dimension("node blocks differ in shape".into()));
        }
        Ok(Self { p, q, seed, costs })
    }

    pub fn node_count(&self) -> usize {
        self.costs.len()
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn rows(&self) -> usize {
        self.q
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn costs(&self) -> &[LeastSquares] {
        &self.costs
    }

    /// `F(X) = Σ f_i(x_i)`.
    pub fn objective(&self, xs: &[Vector]) -> f64 {
        self.costs.iter().zip(xs).map(|(c, x)| c.eval(x)).sum()
    }

    /// One block per node: header `i q p`, `q` rows of `A_i`, then `b_i`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "# seed {seed}");
        }
        for (i, c) in self.costs.iter().enumerate() {
            let _ = writeln!(out, "{i} {} {}", self.q, self.p);
            for r in 0..self.q {
                let row: Vec<String> = c.a.row(r).iter().map(f64::to_string).collect();
                let _ = writeln!(out, "{}", row.join(" "));
            }
            let b: Vec<String> = c.b.iter().map(f64::to_string).collect();
            let _ = writeln!(out, "{}", b.join(" "));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut seed = None;
        let mut lines = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(s) = rest.trim().strip_prefix("seed") {
                    seed = s.trim().parse().ok();
                }
                continue;
            }
            if !line.is_empty() {
                lines.push((idx + 1, line));
            }
        }
        let numbers = |line: usize, l: &str, expect: usize| -> Result<Vec<f64>> {
            let values: Vec<f64> = l
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse {
                    line,
                    msg: e.to_string(),
                })?;
            if values.len() != expect {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected {expect} values, got {}", values.len()),
                });
            }
            Ok(values)
        };
        let mut costs = Vec::new();
        let mut it = lines.into_iter();
        while let Some((line, header)) = it.next() {
            let h: Vec<usize> = header
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Parse {
                    line,
                    msg: format!("bad block header {header:?}"),
                })?;
            if h.len() != 3 || h[0] != costs.len() {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected header `{} q p`", costs.len()),
                });
            }
            let (q, p) = (h[1], h[2]);
            let mut a = DMatrix::zeros(q, p);
            for r in 0..q {
                let (line, l) = it.next().ok_or(Error::Parse {
                    line,
                    msg: "truncated block".into(),
                })?;
                for (c, v) in numbers(line, l, p)?.into_iter().enumerate() {
                    a[(r, c)] = v;
                }
            }
            let (line, l) = it.next().ok_or(Error::Parse {
                line,
                msg: "missing b row".into(),
            })?;
            let b = Vector::from_vec(numbers(line, l, q)?);
            costs.push(LeastSquares::new(a, b)?);
        }
        Self::from_costs(costs, seed)
    }
}

/// Every entry of every `A_i` and `b_i` i.i.d. standard normal under `seed`.
pub fn generate_ls(n: usize, p: usize, q: usize, seed: u64) -> Result<LeastSquaresInstance> {
    if n == 0 || p == 0 || q == 0 {
        return Err(Error::InvalidParameter(format!(
            "n, p, q must be positive, got ({n}, {p}, {q})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || -> f64 { StandardNormal.sample(&mut rng) };
    let costs = (0..n)
        .map(|_| {
            let a = DMatrix::from_row_iterator(q, p, (0..q * p).map(|_| draw()));
            let b = Vector::from_iterator(q, (0..q).map(|_| draw()));
            LeastSquares { a, b }
        })
        .collect();
    LeastSquaresInstance::from_costs(costs, Some(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;
    use proptest::prelude::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    #[test]
    fn identity_prox_halves_b() {
        let x = ls_prox(
            &DMatrix::identity(2, 2),
            &v(&[2.0, 2.0]),
            &v(&[0.0, 0.0]),
            &v(&[0.0, 0.0]),
            1.0,
        )
        .unwrap();
        assert!((x - v(&[1.0, 1.0])).norm() < 1e-15);
    }

    #[test]
    fn identity_prox_three_dims() {
        let c = LeastSquares::new(DMatrix::identity(3, 3), v(&[2.0, 2.0, 2.0])).unwrap();
        let x = c
            .x_update(&Vector::zeros(3), &Vector::zeros(3), 1.0)
            .unwrap();
        assert!((x - v(&[1.0, 1.0, 1.0])).norm() < 1e-15);
        let c0 = LeastSquares::new(DMatrix::identity(3, 3), Vector::zeros(3)).unwrap();
        assert_eq!(
            c0.x_update(&Vector::zeros(3), &Vector::zeros(3), 1.0)
                .unwrap(),
            Vector::zeros(3)
        );
    }

    #[test]
    fn zero_cost_prox_is_shifted_target() {
        let a = DMatrix::zeros(2, 2);
        let lambda = v(&[0.5, -1.0]);
        let z = v(&[3.0, 4.0]);
        let x = ls_prox(&a, &Vector::zeros(2), &lambda, &z, 2.0).unwrap();
        assert!((x - (&z - &lambda / 2.0)).norm() < 1e-15);
        // λ = ρz: the minimizer of λᵀx + (ρ/2)‖x − z‖² is the origin.
        let x = ls_prox(&a, &Vector::zeros(2), &(&z * 2.0), &z, 2.0).unwrap();
        assert!(x.norm() < 1e-14);
    }

    #[test]
    fn prox_rejects_nonpositive_rho() {
        let a = DMatrix::identity(1, 1);
        let e = ls_prox(&a, &v(&[1.0]), &v(&[0.0]), &v(&[0.0]), 0.0);
        assert!(matches!(e, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn generate_shapes_and_determinism() {
        let inst = generate_ls(600, 3, 3, 1).unwrap();
        assert_eq!(inst.node_count(), 600);
        assert!(inst.costs().iter().all(|c| c.a().shape() == (3, 3)));
        let small = generate_ls(2, 1, 1, 5).unwrap();
        assert!(small
            .costs()
            .iter()
            .all(|c| c.a().shape() == (1, 1) && c.b().len() == 1));
        assert_eq!(
            generate_ls(20, 3, 3, 77).unwrap(),
            generate_ls(20, 3, 3, 77).unwrap()
        );
        assert_ne!(
            generate_ls(20, 3, 3, 77).unwrap(),
            generate_ls(20, 3, 3, 78).unwrap()
        );
    }

    #[test]
    fn text_round_trip_is_lossless() {
        let inst = generate_ls(4, 3, 2, 9).unwrap();
        let back = LeastSquaresInstance::parse(&inst.to_text()).unwrap();
        assert_eq!(back, inst);
        assert_eq!(back.seed(), Some(9));
    }

    #[test]
    fn parse_reports_bad_rows() {
        let err = LeastSquaresInstance::parse("0 2 2\n1 2\n3\n4 5\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }

    #[test]
    fn objective_keeps_half_factor() {
        let c = LeastSquares::new(dmatrix![1.0, 0.0; 0.0, 1.0], v(&[1.0, 1.0])).unwrap();
        assert_eq!(c.eval(&Vector::zeros(2)), 1.0);
    }

    fn instance_strategy() -> impl Strategy<Value = (u64, f64, Vec<f64>, Vec<f64>)> {
        (
            any::<u64>(),
            0.05f64..10.0,
            prop::collection::vec(-5.0f64..5.0, 3),
            prop::collection::vec(-5.0f64..5.0, 3),
        )
    }

    proptest! {
        #[test]
        fn prox_satisfies_normal_equations((seed, rho, lambda, z) in instance_strategy()) {
            let inst = generate_ls(1, 3, 3, seed).unwrap();
            let c = &inst.costs()[0];
            let (lambda, z) = (v(&lambda), v(&z));
            let x = c.x_update(&lambda, &z, rho).unwrap();
            let lhs = c.a().tr_mul(c.a()) * &x + &x * rho;
            let rhs = c.a().tr_mul(c.b()) - &lambda + &z * rho;
            prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + x.norm()));
            // subgradient optimality of the prox form
            let g = c.gradient(&x).unwrap() + &lambda + (&x - &z) * rho;
            prop_assert!(g.norm() <= 1e-8);
        }

        #[test]
        fn prox_is_a_local_minimum((seed, rho, target, dir) in instance_strategy()) {
            let inst = generate_ls(1, 3, 3, seed).unwrap();
            let c = &inst.costs()[0];
            let target = v(&target);
            let x = c.prox(&target, rho).unwrap();
            let phi = |y: &Vector| c.eval(y) + 0.5 * rho * (y - &target).norm_squared();
            let d = v(&dir);
            let h = 1e-4;
            for sign in [1.0, -1.0] {
                let dd = (phi(&(&x + &d * (sign * h))) - phi(&x)) / h;
                prop_assert!(dd >= -1e-6);
            }
        }

        #[test]
        fn gradient_matches_central_differences((seed, _rho, x, _d) in instance_strategy()) {
            let inst = generate_ls(1, 3, 3, seed).unwrap();
            let c = &inst.costs()[0];
            let x = v(&x);
            let g = c.gradient(&x).unwrap();
            let h = 1e-5;
            for i in 0..3 {
                let mut e = Vector::zeros(3);
                e[i] = h;
                let fd = (c.eval(&(&x + &e)) - c.eval(&(&x - &e))) / (2.0 * h);
                prop_assert!((fd - g[i]).abs() <= 1e-6 * g[i].abs().max(1.0));
            }
        }
    }
}
