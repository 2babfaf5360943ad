//! BFGS with a strong-Wolfe line search.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed, unit_f64};

/// Central-difference step used by [`central_difference`].
pub const FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BfgsConfig {
    pub grad_tol: f64,
    pub max_iters: usize,
    pub c1: f64,
    pub c2: f64,
    /// Function evaluations allowed per line search.
    pub max_line_evals: usize,
}

impl Default for BfgsConfig {
    fn default() -> Self {
        BfgsConfig {
            grad_tol: 1e-5,
            max_iters: 1000,
            c1: 1e-4,
            c2: 0.9,
            max_line_evals: 40,
        }
    }
}

impl BfgsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.c1 && self.c1 < self.c2 && self.c2 < 1.0) {
            return Err(Error::Argument(format!("need 0 < c1 < c2 < 1, got c1={} c2={}", self.c1, self.c2)));
        }
        if !(self.grad_tol > 0.0) {
            return Err(Error::Argument("gradient tolerance must be positive".into()));
        }
        if self.max_line_evals < 2 {
            return Err(Error::Argument("line search needs at least 2 evaluations".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIterations,
    LineSearchFailed,
    Numerical,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::MaxIterations => "max_iterations",
            Termination::LineSearchFailed => "line_search_failed",
            Termination::Numerical => "numerical",
        }
    }
}

/// One optimization trajectory. `trace[0]` is the cost at the initial point
/// and `trace[k]` the cost after accepted step `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub restart: usize,
    pub seed: u64,
    pub initial_params: Vec<f64>,
    pub final_params: Vec<f64>,
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub termination: Termination,
    pub final_cost: f64,
    pub final_gradient_norm: f64,
    pub final_overlap: Option<f64>,
}

impl RunRecord {
    pub fn initial_cost(&self) -> f64 {
        self.trace[0]
    }
}

/// A differentiable objective over `R^dim`.
pub trait Problem: Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64], grad: &mut [f64]);
}

/// Central differences of `f` with step [`FD_STEP`].
pub fn central_difference<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], grad: &mut [f64]) {
    let mut probe = x.to_vec();
    for k in 0..x.len() {
        probe[k] = x[k] + FD_STEP;
        let up = f(&probe);
        probe[k] = x[k] - FD_STEP;
        let down = f(&probe);
        probe[k] = x[k];
        grad[k] = (up - down) / (2.0 * FD_STEP);
    }
}

/// Closure-backed problem with an explicit gradient.
pub struct FnProblem<F, G> {
    dim: usize,
    f: F,
    g: G,
}

impl<F, G> FnProblem<F, G>
where
    F: Fn(&[f64]) -> f64 + Sync,
    G: Fn(&[f64], &mut [f64]) + Sync,
{
    pub fn new(dim: usize, f: F, g: G) -> Self {
        FnProblem { dim, f, g }
    }
}

impl<F, G> Problem for FnProblem<F, G>
where
    F: Fn(&[f64]) -> f64 + Sync,
    G: Fn(&[f64], &mut [f64]) + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        (self.g)(x, grad);
    }
}

/// Closure-backed problem differentiated by [`central_difference`].
pub struct FdProblem<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FdProblem<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FdProblem { dim, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Problem for FdProblem<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        central_difference(&self.f, x, grad);
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Sample of the line function `phi(a) = f(x + a p)` and its slope.
#[derive(Debug, Clone)]
struct LinePoint {
    a: f64,
    phi: f64,
    dphi: f64,
    x: Vec<f64>,
    grad: Vec<f64>,
}

enum LineOutcome {
    Accepted(LinePoint),
    Failed,
    NonFinite,
}

struct LineSearch<'a, P: Problem + ?Sized> {
    problem: &'a P,
    cfg: &'a BfgsConfig,
    x: &'a [f64],
    dir: &'a [f64],
    phi0: f64,
    dphi0: f64,
    evals: usize,
}

impl<P: Problem + ?Sized> LineSearch<'_, P> {
    fn eval(&mut self, a: f64) -> Option<LinePoint> {
        self.evals += 1;
        let x: Vec<f64> = self.x.iter().zip(self.dir).map(|(xi, pi)| xi + a * pi).collect();
        let phi = self.problem.value(&x);
        let mut grad = vec![0.0; x.len()];
        self.problem.gradient(&x, &mut grad);
        let dphi = dot(&grad, self.dir);
        if !phi.is_finite() || !dphi.is_finite() {
            return None;
        }
        Some(LinePoint { a, phi, dphi, x, grad })
    }

    fn armijo(&self, p: &LinePoint) -> bool {
        p.phi <= self.phi0 + self.cfg.c1 * p.a * self.dphi0
    }

    fn curvature(&self, p: &LinePoint) -> bool {
        p.dphi.abs() <= -self.cfg.c2 * self.dphi0
    }

    fn run(&mut self, a_init: f64) -> LineOutcome {
        let mut prev = LinePoint {
            a: 0.0,
            phi: self.phi0,
            dphi: self.dphi0,
            x: self.x.to_vec(),
            grad: Vec::new(),
        };
        let mut a = a_init;
        let mut first = true;
        loop {
            if self.evals >= self.cfg.max_line_evals {
                return LineOutcome::Failed;
            }
            let Some(cur) = self.eval(a) else { return LineOutcome::NonFinite };
            if !self.armijo(&cur) || (!first && cur.phi >= prev.phi) {
                return self.zoom(prev, cur);
            }
            if self.curvature(&cur) {
                return LineOutcome::Accepted(cur);
            }
            if cur.dphi >= 0.0 {
                return self.zoom(cur, prev);
            }
            a = 2.0 * cur.a;
            prev = cur;
            first = false;
        }
    }

    /// Bracketed search; `lo` satisfies Armijo and has the lower value.
    fn zoom(&mut self, mut lo: LinePoint, mut hi: LinePoint) -> LineOutcome {
        loop {
            let width = (hi.a - lo.a).abs();
            if self.evals >= self.cfg.max_line_evals || width <= 1e-14 * lo.a.abs().max(hi.a.abs()).max(1e-300) {
                return if lo.a > 0.0 { LineOutcome::Accepted(lo) } else { LineOutcome::Failed };
            }
            let (left, right) = if lo.a < hi.a { (lo.a, hi.a) } else { (hi.a, lo.a) };
            let guard = 0.1 * (right - left);
            let a = match cubic_minimizer(&lo, &hi) {
                Some(a) if a >= left + guard && a <= right - guard => a,
                _ => 0.5 * (lo.a + hi.a),
            };
            let Some(cur) = self.eval(a) else { return LineOutcome::NonFinite };
            if !self.armijo(&cur) || cur.phi >= lo.phi {
                hi = cur;
            } else {
                if self.curvature(&cur) {
                    return LineOutcome::Accepted(cur);
                }
                if cur.dphi * (hi.a - lo.a) >= 0.0 {
                    hi = lo;
                }
                lo = cur;
            }
        }
    }
}

/// Minimizer of the cubic through two points with slopes.
fn cubic_minimizer(p: &LinePoint, q: &LinePoint) -> Option<f64> {
    let d1 = p.dphi + q.dphi - 3.0 * (p.phi - q.phi) / (p.a - q.a);
    let disc = d1 * d1 - p.dphi * q.dphi;
    if disc < 0.0 {
        return None;
    }
    let d2 = (q.a - p.a).signum() * disc.sqrt();
    let a = q.a - (q.a - p.a) * (q.dphi + d2 - d1) / (q.dphi - p.dphi + 2.0 * d2);
    a.is_finite().then_some(a)
}

/// Minimize `problem` from `x0`.
pub fn minimize<P: Problem + ?Sized>(problem: &P, x0: &[f64], cfg: &BfgsConfig) -> Result<RunRecord> {
    cfg.validate()?;
    let p = problem.dim();
    if x0.len() != p {
        return Err(Error::Dimension(format!("start point has {} entries, problem has {p}", x0.len())));
    }
    let mut x = x0.to_vec();
    let mut f = problem.value(&x);
    let mut g = vec![0.0; p];
    problem.gradient(&x, &mut g);
    let mut record = RunRecord {
        restart: 0,
        seed: 0,
        initial_params: x0.to_vec(),
        final_params: x.clone(),
        trace: vec![f],
        iterations: 0,
        termination: Termination::MaxIterations,
        final_cost: f,
        final_gradient_norm: inf_norm(&g),
        final_overlap: None,
    };
    if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
        record.termination = Termination::Numerical;
        return Ok(record);
    }

    let identity = DMatrix::<f64>::identity(p, p);
    let mut hinv = identity.clone();
    let mut fresh = true;
    let termination = loop {
        if inf_norm(&g) < cfg.grad_tol {
            break Termination::Converged;
        }
        if record.iterations >= cfg.max_iters {
            break Termination::MaxIterations;
        }
        let gv = DVector::from_column_slice(&g);
        let mut dir: Vec<f64> = (-(&hinv * &gv)).iter().copied().collect();
        let mut slope = dot(&dir, &g);
        if !(slope < 0.0) {
            hinv.copy_from(&identity);
            fresh = true;
            dir = g.iter().map(|v| -v).collect();
            slope = dot(&dir, &g);
        }
        let mut search = LineSearch {
            problem,
            cfg,
            x: &x,
            dir: &dir,
            phi0: f,
            dphi0: slope,
            evals: 0,
        };
        let point = match search.run(1.0) {
            LineOutcome::Accepted(pt) => pt,
            LineOutcome::NonFinite => break Termination::Numerical,
            LineOutcome::Failed if fresh => break Termination::LineSearchFailed,
            LineOutcome::Failed => {
                hinv.copy_from(&identity);
                fresh = true;
                continue;
            }
        };
        let s = DVector::from_iterator(p, point.x.iter().zip(&x).map(|(a, b)| a - b));
        let y = DVector::from_iterator(p, point.grad.iter().zip(&g).map(|(a, b)| a - b));
        let sy = s.dot(&y);
        if sy > 1e-10 {
            let rho = 1.0 / sy;
            let hy = &hinv * &y;
            let yhy = y.dot(&hy);
            // (I - rho s y^T) H (I - rho y s^T) + rho s s^T, expanded
            hinv -= (&hy * s.transpose() + &s * hy.transpose()) * rho;
            hinv += (&s * s.transpose()) * (rho * rho * yhy + rho);
            fresh = false;
        }
        x = point.x;
        g = point.grad;
        f = point.phi;
        record.iterations += 1;
        record.trace.push(f);
    };
    record.termination = termination;
    record.final_gradient_norm = inf_norm(&g);
    record.final_params = x;
    record.final_cost = f;
    Ok(record)
}

/// Initial point for restart `index`: uniform on `[0, 2pi)^dim`.
pub fn initial_params(dim: usize, seed: u64, index: usize) -> (u64, Vec<f64>) {
    let run_seed = derive_seed(seed, &[index as u64]);
    let mut rng = rng_from_seed(run_seed);
    let x = (0..dim).map(|_| std::f64::consts::TAU * unit_f64(&mut rng)).collect();
    (run_seed, x)
}

/// Run `count` independent minimizations from seeded random starts,
/// returned in restart order.
pub fn random_restarts<P: Problem + ?Sized>(problem: &P, count: usize, seed: u64, cfg: &BfgsConfig) -> Result<Vec<RunRecord>> {
    if count == 0 {
        return Err(Error::Argument("restart count must be at least 1".into()));
    }
    (0..count)
        .into_par_iter()
        .map(|i| {
            let (run_seed, x0) = initial_params(problem.dim(), seed, i);
            let mut rec = minimize(problem, &x0, cfg)?;
            rec.restart = i;
            rec.seed = run_seed;
            Ok(rec)
        })
        .collect()
}
