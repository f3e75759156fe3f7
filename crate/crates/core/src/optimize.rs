//! BFGS with a strong-Wolfe line search.
//!
//! The inverse Hessian is kept dense (`n × n`); parameter counts here stay
//! in the hundreds. The line search follows the bracketing/zoom scheme of
//! Nocedal & Wright, chapter 3, with safeguarded cubic interpolation.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BfgsConfig {
    pub max_iterations: usize,
    pub grad_tol: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Default for BfgsConfig {
    fn default() -> Self {
        Self { max_iterations: 50_000, grad_tol: 1e-6, c1: 1e-4, c2: 0.9 }
    }
}

impl BfgsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.c1 && self.c1 < self.c2 && self.c2 < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "Wolfe constants need 0 < c1 < c2 < 1, got c1={} c2={}",
                self.c1, self.c2
            )));
        }
        if !(self.grad_tol > 0.0) {
            return Err(Error::InvalidParameter("gradient tolerance must be positive".into()));
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
}

#[derive(Debug, Clone)]
pub struct BfgsOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub termination: Termination,
    /// `(iteration, objective)` after every accepted step, starting at iteration 0.
    pub trace: Vec<(usize, f64)>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(g: &[f64]) -> f64 {
    g.iter().fold(0.0, |m, v| m.max(v.abs()))
}

struct Probe {
    alpha: f64,
    value: f64,
    slope: f64,
    x: Vec<f64>,
    grad: Vec<f64>,
}

struct LineSearch<'a, F> {
    fg: &'a mut F,
    x: &'a [f64],
    dir: &'a [f64],
    f0: f64,
    slope0: f64,
    c1: f64,
    c2: f64,
    evaluations: usize,
}

enum SearchOutcome {
    Wolfe(Probe),
    /// Sufficient decrease without the curvature condition.
    Decrease(Probe),
    Failed,
}

impl<F: FnMut(&[f64], &mut [f64]) -> f64> LineSearch<'_, F> {
    const MAX_BRACKET: usize = 40;
    const MAX_ZOOM: usize = 40;

    fn probe(&mut self, alpha: f64) -> Probe {
        let x: Vec<f64> = self.x.iter().zip(self.dir).map(|(x, d)| x + alpha * d).collect();
        let mut grad = vec![0.0; x.len()];
        let mut value = (self.fg)(&x, &mut grad);
        self.evaluations += 1;
        if !value.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            value = f64::INFINITY;
        }
        let slope = dot(&grad, self.dir);
        Probe { alpha, value, slope, x, grad }
    }

    fn armijo(&self, p: &Probe) -> bool {
        p.value <= self.f0 + self.c1 * p.alpha * self.slope0
    }

    fn curvature(&self, p: &Probe) -> bool {
        p.slope.abs() <= -self.c2 * self.slope0
    }

    fn run(&mut self, alpha0: f64) -> SearchOutcome {
        let mut prev: Option<Probe> = None;
        let mut alpha = alpha0;
        for i in 0..Self::MAX_BRACKET {
            let p = self.probe(alpha);
            let prev_value = prev.as_ref().map_or(self.f0, |q| q.value);
            if !self.armijo(&p) || (i > 0 && p.value >= prev_value) {
                return self.zoom(prev, p);
            }
            if self.curvature(&p) {
                return SearchOutcome::Wolfe(p);
            }
            if p.slope >= 0.0 {
                return self.zoom(Some(p), prev.unwrap_or_else(|| self.origin()));
            }
            alpha *= 2.0;
            prev = Some(p);
        }
        prev.map_or(SearchOutcome::Failed, SearchOutcome::Decrease)
    }

    fn origin(&self) -> Probe {
        Probe { alpha: 0.0, value: self.f0, slope: self.slope0, x: self.x.to_vec(), grad: vec![] }
    }

    /// `lo` satisfies Armijo with the lowest value seen; `hi` brackets it.
    fn zoom(&mut self, lo: Option<Probe>, mut hi: Probe) -> SearchOutcome {
        let mut lo = lo.unwrap_or_else(|| self.origin());
        for _ in 0..Self::MAX_ZOOM {
            let width = hi.alpha - lo.alpha;
            if width.abs() <= 1e-14 * lo.alpha.abs().max(hi.alpha.abs()).max(1e-300) {
                break;
            }
            let alpha = interpolate(&lo, &hi);
            let p = self.probe(alpha);
            if !self.armijo(&p) || p.value >= lo.value {
                hi = p;
            } else {
                if self.curvature(&p) {
                    return SearchOutcome::Wolfe(p);
                }
                if p.slope * (hi.alpha - lo.alpha) >= 0.0 {
                    hi = lo;
                }
                lo = p;
            }
        }
        if lo.alpha > 0.0 && lo.value < self.f0 {
            SearchOutcome::Decrease(lo)
        } else {
            SearchOutcome::Failed
        }
    }
}

/// Cubic interpolation minimizer, clamped to the inner 80% of the bracket.
fn interpolate(lo: &Probe, hi: &Probe) -> f64 {
    let (a, b) = (lo.alpha, hi.alpha);
    let (left, right) = (a.min(b), a.max(b));
    let margin = 0.1 * (right - left);
    let bisect = 0.5 * (a + b);
    if !hi.value.is_finite() {
        return bisect;
    }
    let d1 = lo.slope + hi.slope - 3.0 * (lo.value - hi.value) / (a - b);
    let disc = d1 * d1 - lo.slope * hi.slope;
    if disc < 0.0 {
        return bisect;
    }
    let d2 = (b - a).signum() * disc.sqrt();
    let t = b - (b - a) * (hi.slope + d2 - d1) / (hi.slope - lo.slope + 2.0 * d2);
    if t.is_finite() && t >= left + margin && t <= right - margin {
        t
    } else {
        bisect
    }
}

/// Minimizes `f` given a combined value-and-gradient callback
/// `fg(x, grad) -> f(x)` that overwrites `grad`.
pub fn minimize_bfgs<F>(mut fg: F, x0: &[f64], cfg: &BfgsConfig) -> Result<BfgsOutcome>
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    cfg.validate()?;
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut g = vec![0.0; n];
    let mut f = fg(&x, &mut g);
    let mut evaluations = 1;
    if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("initial objective"));
    }
    let mut trace = vec![(0, f)];
    let mut inv_h = identity(n, 1.0);
    let mut fresh_h = true;
    let mut iterations = 0;
    let mut termination = Termination::MaxIterations;

    while iterations < cfg.max_iterations {
        if inf_norm(&g) < cfg.grad_tol {
            termination = Termination::Converged;
            break;
        }
        let mut dir = mat_vec(&inv_h, &g, n);
        dir.iter_mut().for_each(|d| *d = -*d);
        let mut slope0 = dot(&g, &dir);
        if !(slope0 < 0.0) {
            inv_h = identity(n, 1.0);
            fresh_h = true;
            dir = g.iter().map(|v| -v).collect();
            slope0 = dot(&g, &dir);
        }
        let alpha0 = if fresh_h { (1.0 / inf_norm(&g)).min(1.0) } else { 1.0 };
        let mut ls = LineSearch {
            fg: &mut fg,
            x: &x,
            dir: &dir,
            f0: f,
            slope0,
            c1: cfg.c1,
            c2: cfg.c2,
            evaluations: 0,
        };
        let outcome = ls.run(alpha0);
        evaluations += ls.evaluations;

        let (probe, wolfe) = match outcome {
            SearchOutcome::Wolfe(p) => (p, true),
            SearchOutcome::Decrease(p) => (p, false),
            SearchOutcome::Failed if !fresh_h => {
                inv_h = identity(n, 1.0);
                fresh_h = true;
                continue;
            }
            SearchOutcome::Failed => {
                termination = Termination::LineSearchFailed;
                break;
            }
        };

        let s: Vec<f64> = probe.x.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = probe.grad.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        x = probe.x;
        g = probe.grad;
        f = probe.value;
        iterations += 1;
        trace.push((iterations, f));

        if wolfe && sy > 1e-300 {
            if fresh_h {
                let scale = sy / dot(&y, &y);
                inv_h = identity(n, scale);
            }
            bfgs_update(&mut inv_h, &s, &y, sy, n);
            fresh_h = false;
        } else {
            inv_h = identity(n, 1.0);
            fresh_h = true;
        }
    }
    if termination == Termination::MaxIterations && inf_norm(&g) < cfg.grad_tol {
        termination = Termination::Converged;
    }
    Ok(BfgsOutcome { gradient_norm: inf_norm(&g), x, value: f, iterations, evaluations, termination, trace })
}

fn identity(n: usize, scale: f64) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    (0..n).for_each(|i| m[i * n + i] = scale);
    m
}

fn mat_vec(m: &[f64], v: &[f64], n: usize) -> Vec<f64> {
    m.chunks_exact(n).map(|row| dot(row, v)).collect()
}

/// `H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ` with `ρ = 1/(yᵀs)`.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64, n: usize) {
    let rho = 1.0 / sy;
    let hy = mat_vec(h, y, n);
    let yhy = dot(y, &hy);
    let coef = rho * rho * yhy + rho;
    for i in 0..n {
        let row = &mut h[i * n..(i + 1) * n];
        for j in 0..n {
            row[j] += coef * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
        }
    }
}
