//! Quadratic smoothing without the circle constraint, followed by radial
//! projection.
//!
//! The unconstrained minimizer solves `(W + L_lambda) x = W y` where
//! `L_lambda` is the weighted graph Laplacian. Hard nodes are eliminated as
//! fixed values. The system matrix is real symmetric positive definite, so
//! Jacobi-preconditioned conjugate gradients run on complex vectors with the
//! real inner product.

use num_complex::Complex64;

use crate::circle::{cost_orig, project_to_circle, CircleSignal, NodeWeight, ProblemInstance};
use crate::error::{Error, Result};

/// Relative residual target of the linear solve.
pub const CG_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct BaselineResult {
    pub x_unconstrained: Vec<Complex64>,
    pub x_rounded: CircleSignal,
    pub psi_orig: f64,
    pub cg_iterations: usize,
    pub degenerate_nodes: usize,
}

/// Every group of nodes joined by positive-weight edges must contain a
/// node with positive or infinite data weight, else the system is singular.
fn check_anchored(inst: &ProblemInstance) -> Result<()> {
    let g = inst.graph();
    let n = g.node_count();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for (e, &l) in g.edges().iter().zip(inst.lambda()) {
        if l > 0.0 {
            let (ra, rb) = (find(&mut parent, e.a), find(&mut parent, e.b));
            parent[ra] = rb;
        }
    }
    let mut anchored = vec![false; n];
    for (i, w) in inst.w().iter().enumerate() {
        if !matches!(w, NodeWeight::Finite(v) if *v == 0.0) {
            let r = find(&mut parent, i);
            anchored[r] = true;
        }
    }
    for i in 0..n {
        if !anchored[find(&mut parent, i)] {
            return Err(Error::Singular(format!(
                "node {i} is not connected to any data through positive edge weights"
            )));
        }
    }
    Ok(())
}

pub fn solve_baseline(inst: &ProblemInstance) -> Result<BaselineResult> {
    check_anchored(inst)?;
    let g = inst.graph();
    let n = g.node_count();
    let y = inst.y();
    let w = inst.w();
    let lambda = inst.lambda();
    let free: Vec<bool> = w.iter().map(|w| !w.is_hard()).collect();

    // diagonal of W + L restricted to free nodes, and right-hand side
    let mut diag = vec![0.0; n];
    let mut rhs = vec![Complex64::default(); n];
    for i in 0..n {
        if free[i] {
            let wi = w[i].finite_or_zero();
            diag[i] = wi;
            rhs[i] = y[i] * wi;
        }
    }
    for (e, &l) in g.edges().iter().zip(lambda) {
        for (p, q) in [(e.a, e.b), (e.b, e.a)] {
            if free[p] {
                diag[p] += l;
                if !free[q] {
                    rhs[p] += y[q] * l;
                }
            }
        }
    }

    let apply = |v: &[Complex64], out: &mut [Complex64]| {
        for i in 0..n {
            out[i] = if free[i] {
                v[i] * w[i].finite_or_zero()
            } else {
                Complex64::default()
            };
        }
        for (e, &l) in g.edges().iter().zip(lambda) {
            if free[e.a] && free[e.b] {
                let d = (v[e.a] - v[e.b]) * l;
                out[e.a] += d;
                out[e.b] -= d;
            } else if free[e.a] {
                out[e.a] += v[e.a] * l;
            } else if free[e.b] {
                out[e.b] += v[e.b] * l;
            }
        }
    };
    let dot = |a: &[Complex64], b: &[Complex64]| -> f64 {
        a.iter().zip(b).map(|(p, q)| (p * q.conj()).re).sum()
    };

    // start from the data, which is exact for constant or unsmoothed inputs
    let mut x: Vec<Complex64> = (0..n)
        .map(|i| if free[i] { y[i] } else { Complex64::default() })
        .collect();
    let mut ax = vec![Complex64::default(); n];
    apply(&x, &mut ax);
    let mut res: Vec<Complex64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let rhs_norm = dot(&rhs, &rhs).sqrt();
    let target = CG_TOL * rhs_norm.max(f64::MIN_POSITIVE);
    let precond = |r: &[Complex64]| -> Vec<Complex64> {
        r.iter()
            .zip(&diag)
            .map(|(v, &d)| if d > 0.0 { v / d } else { Complex64::default() })
            .collect()
    };
    let mut z = precond(&res);
    let mut p = z.clone();
    let mut rz = dot(&res, &z);
    let mut iterations = 0;
    let max_iters = 20 * n + 100;
    while dot(&res, &res).sqrt() > target && iterations < max_iters {
        apply(&p, &mut ax);
        let pap = dot(&p, &ax);
        if pap.is_nan() || pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += p[i] * alpha;
            res[i] -= ax[i] * alpha;
        }
        z = precond(&res);
        let rz_new = dot(&res, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + p[i] * beta;
        }
        iterations += 1;
    }
    for i in 0..n {
        if !free[i] {
            x[i] = y[i];
        }
    }

    let mut degenerate_nodes = 0;
    let rounded: Vec<Complex64> = x
        .iter()
        .map(|&z| {
            let (p, d) = project_to_circle(z);
            degenerate_nodes += usize::from(d);
            p
        })
        .collect();
    let x_rounded = CircleSignal::new(rounded)?;
    let psi_orig = cost_orig(inst, &x_rounded)?;
    Ok(BaselineResult {
        x_unconstrained: x,
        x_rounded,
        psi_orig,
        cg_iterations: iterations,
        degenerate_nodes,
    })
}
