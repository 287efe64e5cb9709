//! Primal-dual solver for the lifted semidefinite problem.
//!
//! The problem is `min <s, e> + f(L s)` where `f` is the indicator of
//! `L s + I >= 0` on every edge block. Each iteration takes a primal step
//! along `-(L* U + e)`, re-imposes hard constraints, and updates the duals
//! with the prox of `sigma f*` at the extrapolated point `2 s_new - s`.
//! Without hard constraints the extrapolated point equals
//! `s_new - tau (L* U + e)`. The dual step is `sigma = 1 / (||L||^2 tau)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circle::{cost_orig, project_to_circle, CircleSignal, NodeWeight, ProblemInstance};
use crate::error::{Error, Result};
use crate::hermitian::Hermitian3;
use crate::lifting::{
    cost_conv, lift_adjoint_into, lift_block, operator_norm_sq, prox_dual, relative_gap,
    tightness_certificate, LiftedVariables, TightnessCertificate,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Primal step size.
    pub tau: f64,
    pub max_iters: usize,
    /// Stop when `||s_new - s|| / ||s_new||` drops below this.
    pub tol: f64,
    /// Tolerance of the rank-one certificate.
    pub tight_tol: f64,
    pub record_trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tau: 0.1,
            max_iters: 5000,
            tol: 1e-12,
            tight_tol: 1e-6,
            record_trace: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "tau must be positive, got {}",
                self.tau
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidInput("max_iters must be positive".into()));
        }
        if [self.tol, self.tight_tol]
            .iter()
            .any(|t| t.is_nan() || *t < 0.0)
        {
            return Err(Error::InvalidInput("tolerances must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub psi_conv: f64,
    pub step_change: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub s_star: LiftedVariables,
    pub x_rounded: Vec<Complex64>,
    pub psi_conv_star: f64,
    pub psi_approx: f64,
    pub certificate: TightnessCertificate,
    /// `None` when the relaxed cost is not positive.
    pub relative_gap: Option<f64>,
    pub iterations_run: usize,
    pub final_step_change: f64,
    pub converged: bool,
    /// Smallest eigenvalue over all moment matrices `L s + I`.
    pub min_moment_eigenvalue: f64,
    /// Nodes whose relaxed value was too close to zero to round.
    pub degenerate_nodes: usize,
    /// No node carries data, so any constant signal is optimal.
    pub unanchored: bool,
    pub trace: Vec<TraceEntry>,
}

impl SolveReport {
    pub fn rounded_signal(&self) -> CircleSignal {
        CircleSignal::new(self.x_rounded.clone()).expect("rounded values lie on the circle")
    }

    /// `Psi_orig` at the rounded output; identical to `psi_approx`.
    pub fn psi_orig_of_rounded(&self) -> f64 {
        self.psi_approx
    }
}

/// Initial lifted point: rank-one lift of the projected data.
fn initial_point(inst: &ProblemInstance) -> Result<LiftedVariables> {
    let x: Vec<Complex64> = inst
        .y()
        .iter()
        .zip(inst.w())
        .map(|(&y, &w)| match w {
            NodeWeight::Hard => y,
            NodeWeight::Finite(_) => project_to_circle(y).0,
        })
        .collect();
    LiftedVariables::rank_one(inst.graph(), &x)
}

pub fn solve_relaxation(inst: &ProblemInstance, cfg: &SolverConfig) -> Result<SolveReport> {
    let s0 = initial_point(inst)?;
    solve_relaxation_from(inst, cfg, s0)
}

/// Runs the iteration from a caller-supplied primal start and zero duals.
pub fn solve_relaxation_from(
    inst: &ProblemInstance,
    cfg: &SolverConfig,
    mut s: LiftedVariables,
) -> Result<SolveReport> {
    cfg.validate()?;
    let g = inst.graph();
    s.check_dims(g)?;

    let tau = cfg.tau;
    let sigma = 1.0 / (operator_norm_sq(g) * tau);
    let hard: Vec<(usize, Complex64)> = inst
        .w()
        .iter()
        .enumerate()
        .filter(|(_, w)| w.is_hard())
        .map(|(n, _)| (n, inst.y()[n]))
        .collect();
    let e_x: Vec<Complex64> = inst
        .y()
        .iter()
        .zip(inst.w())
        .map(|(&y, &w)| -y * w.finite_or_zero())
        .collect();
    let e_r: Vec<f64> = inst.lambda().iter().map(|&l| -l).collect();
    for &(n, y) in &hard {
        s.x[n] = y;
    }

    let mut duals = vec![Hermitian3::ZERO; g.edge_count()];
    let mut grad = LiftedVariables::zeros(g);
    let mut s_new = s.clone();
    let mut trace = Vec::new();
    let mut iterations_run = 0;
    let mut final_step_change = f64::INFINITY;
    let mut converged = false;
    let mut quiet = 0;

    for iter in 0..cfg.max_iters {
        lift_adjoint_into(g, &duals, &mut grad)?;
        for (a, e) in grad.x.iter_mut().zip(&e_x) {
            *a += e;
        }
        for (a, e) in grad.r.iter_mut().zip(&e_r) {
            a.re += e;
        }

        for ((sn, so), a) in s_new.iter_mut().zip(s.iter()).zip(grad.iter()) {
            *sn = so - a * tau;
        }
        for &(n, y) in &hard {
            s_new.x[n] = y;
        }

        let mut diff_sq = 0.0;
        for ((edge, u), (&rn, &ro)) in g
            .edges()
            .iter()
            .zip(duals.iter_mut())
            .zip(s_new.r.iter().zip(&s.r))
        {
            let xa = s_new.x[edge.a] * 2.0 - s.x[edge.a];
            let xb = s_new.x[edge.b] * 2.0 - s.x[edge.b];
            let r = rn * 2.0 - ro;
            *u = prox_dual(&(*u + lift_block(xa, xb, r) * sigma), sigma);
        }
        for (a, b) in s_new.iter().zip(s.iter()) {
            diff_sq += (a - b).norm_sqr();
        }
        let norm = s_new.norm_sqr().sqrt();
        let step_change = if norm > 0.0 {
            diff_sq.sqrt() / norm
        } else {
            diff_sq.sqrt()
        };
        std::mem::swap(&mut s, &mut s_new);
        iterations_run = iter + 1;
        final_step_change = step_change;
        if cfg.record_trace {
            trace.push(TraceEntry {
                iteration: iterations_run,
                psi_conv: cost_conv(inst, &s)?,
                step_change,
            });
        }
        // One small step can be a dual transient; require two in a row.
        quiet = if step_change < cfg.tol { quiet + 1 } else { 0 };
        if quiet == 2 {
            converged = true;
            break;
        }
    }

    finish(
        inst,
        cfg,
        s,
        iterations_run,
        final_step_change,
        converged,
        trace,
    )
}

fn finish(
    inst: &ProblemInstance,
    cfg: &SolverConfig,
    s: LiftedVariables,
    iterations_run: usize,
    final_step_change: f64,
    converged: bool,
    trace: Vec<TraceEntry>,
) -> Result<SolveReport> {
    let g = inst.graph();
    let mut degenerate_nodes = 0;
    let x_rounded: Vec<Complex64> =
        s.x.iter()
            .map(|&z| {
                let (p, deg) = project_to_circle(z);
                degenerate_nodes += usize::from(deg);
                p
            })
            .collect();
    let rounded = CircleSignal::new(x_rounded.clone())?;
    let psi_conv_star = cost_conv(inst, &s)?;
    let psi_approx = cost_orig(inst, &rounded)?;
    let certificate = tightness_certificate(g, &s, cfg.tight_tol)?;
    let min_moment_eigenvalue = g
        .edges()
        .iter()
        .zip(&s.r)
        .map(|(e, &r)| lift_block(s.x[e.a], s.x[e.b], r).shift(1.0).eigenvalues()[0])
        .fold(f64::INFINITY, f64::min);
    Ok(SolveReport {
        relative_gap: relative_gap(psi_approx, psi_conv_star).ok(),
        s_star: s,
        x_rounded,
        psi_conv_star,
        psi_approx,
        certificate,
        iterations_run,
        final_step_change,
        converged,
        min_moment_eigenvalue,
        degenerate_nodes,
        unanchored: inst.is_unanchored(),
        trace,
    })
}
