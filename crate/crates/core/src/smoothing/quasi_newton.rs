//! BFGS with an Armijo backtracking line search.
//!
//! A dense inverse-Hessian approximation is kept; problems here have `K * p`
//! unknowns, a few dozen at most.

use crate::error::Result;

/// A differentiable objective. `value` may return auxiliary state that is
/// handed back to `gradient` at the same point.
pub trait Objective {
    type Aux;

    fn value(&mut self, x: &[f64]) -> Result<(f64, Self::Aux)>;

    fn gradient(&mut self, x: &[f64], aux: &Self::Aux) -> Vec<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    pub max_iter: usize,
    /// Stop once `||grad||_inf <= grad_tol * max(1, |f|)`.
    pub grad_tol: f64,
    /// Sufficient-decrease constant of the Armijo test.
    pub armijo: f64,
    pub backtrack: f64,
    pub max_backtracks: usize,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            max_iter: 200,
            grad_tol: 1e-6,
            armijo: 1e-4,
            backtrack: 0.5,
            max_backtracks: 60,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    MaxIterations,
    /// No step along the search direction (nor along steepest descent)
    /// decreased the objective.
    LineSearchFailed,
}

#[derive(Debug, Clone)]
pub struct Minimum<A> {
    pub x: Vec<f64>,
    pub f: f64,
    pub aux: A,
    pub grad_norm_inf: f64,
    pub iterations: usize,
    pub status: Status,
    /// Objective at the start point and after every accepted step.
    pub trace: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn identity(n: usize, scale: f64) -> Vec<f64> {
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        h[i * n + i] = scale;
    }
    h
}

fn mat_vec(h: &[f64], v: &[f64]) -> Vec<f64> {
    h.chunks_exact(v.len()).map(|row| dot(row, v)).collect()
}

/// Minimises `obj` from `x0`. Every accepted step strictly decreases `f`.
pub fn minimize<O: Objective>(obj: &mut O, x0: &[f64], opts: &Options) -> Result<Minimum<O::Aux>> {
    let n = x0.len();
    let mut x = x0.to_vec();
    let (mut f, mut aux) = obj.value(&x)?;
    let mut g = obj.gradient(&x, &aux);
    let mut trace = vec![f];
    let mut hinv = identity(n, 1.0);
    let mut scaled = false;
    let mut status = Status::MaxIterations;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        if norm_inf(&g) <= opts.grad_tol * f.abs().max(1.0) {
            status = Status::Converged;
            break;
        }
        iterations += 1;

        let mut reset = false;
        let accepted = loop {
            let mut d: Vec<f64> = mat_vec(&hinv, &g).into_iter().map(|v| -v).collect();
            let mut slope = dot(&g, &d);
            if !(slope.is_finite() && slope < 0.0) {
                hinv = identity(n, 1.0);
                scaled = false;
                d = g.iter().map(|v| -v).collect();
                slope = -dot(&g, &g);
            }
            // Before any curvature information the step is scaled so that the
            // first trial moves by at most one unit.
            let mut t = if scaled {
                1.0
            } else {
                (1.0 / norm_inf(&d)).min(1.0)
            };
            let mut found = None;
            for _ in 0..opts.max_backtracks {
                let trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + t * di).collect();
                let (ft, at) = obj.value(&trial)?;
                if ft < f && ft <= f + opts.armijo * t * slope {
                    found = Some((trial, ft, at));
                    break;
                }
                t *= opts.backtrack;
            }
            match found {
                Some(step) => break Some(step),
                None if !reset && scaled => {
                    // retry once along steepest descent
                    hinv = identity(n, 1.0);
                    scaled = false;
                    reset = true;
                }
                None => break None,
            }
        };

        let Some((x_new, f_new, aux_new)) = accepted else {
            status = Status::LineSearchFailed;
            break;
        };
        let g_new = obj.gradient(&x_new, &aux_new);
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        let yy = dot(&y, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * yy.sqrt() && sy > 0.0 {
            if !scaled {
                hinv = identity(n, sy / yy);
                scaled = true;
            }
            // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T
            let rho = 1.0 / sy;
            let hy = mat_vec(&hinv, &y);
            let yhy = dot(&y, &hy);
            let coef = rho * rho * yhy + rho;
            for i in 0..n {
                for j in 0..n {
                    hinv[i * n + j] += coef * s[i] * s[j] - rho * (s[i] * hy[j] + hy[i] * s[j]);
                }
            }
        }
        x = x_new;
        f = f_new;
        aux = aux_new;
        g = g_new;
        trace.push(f);
    }

    if status == Status::MaxIterations && norm_inf(&g) <= opts.grad_tol * f.abs().max(1.0) {
        status = Status::Converged;
    }
    Ok(Minimum {
        grad_norm_inf: norm_inf(&g),
        x,
        f,
        aux,
        iterations,
        status,
        trace,
    })
}
