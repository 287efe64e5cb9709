//! Lifted variables and the per-edge moment-matrix machinery of the convex
//! relaxation.
//!
//! Each canonical edge `(n, m)` owns a 3x3 Hermitian moment matrix
//!
//! ```text
//!     [ 1      x_n*   x_m* ]
//! P = [ x_n    1      r    ]
//!     [ x_m    r*     1    ]
//! ```
//!
//! and the relaxation asks every `P` to be positive semidefinite. The linear
//! operator `L` produces the zero-diagonal part of `P`, so `P = L s + I`.
//!
//! Inner products: `<z, z'> = Re(z conj(z'))` on complex entries and
//! `<Q, Q'> = tr(Q Q')` on Hermitian blocks.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circle::{data_term, NodeWeight, ProblemInstance, CIRCLE_TOL};
use crate::error::{check_len, Error, Result};
use crate::graph::Graph;
use crate::hermitian::Hermitian3;

/// Node moments `x` and edge cross-moments `r` (attached to `a < b`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftedVariables {
    pub x: Vec<Complex64>,
    pub r: Vec<Complex64>,
}

impl LiftedVariables {
    pub fn zeros(g: &Graph) -> Self {
        LiftedVariables {
            x: vec![Complex64::default(); g.node_count()],
            r: vec![Complex64::default(); g.edge_count()],
        }
    }

    /// Rank-one lift: `r_{ab} = x_a conj(x_b)`.
    pub fn rank_one(g: &Graph, x: &[Complex64]) -> Result<Self> {
        check_len("node moments", g.node_count(), x.len())?;
        let r = g.edges().iter().map(|e| x[e.a] * x[e.b].conj()).collect();
        Ok(LiftedVariables { x: x.to_vec(), r })
    }

    pub fn check_dims(&self, g: &Graph) -> Result<()> {
        check_len("node moments", g.node_count(), self.x.len())?;
        check_len("edge moments", g.edge_count(), self.r.len())
    }

    pub fn inner(&self, other: &LiftedVariables) -> f64 {
        self.iter()
            .zip(other.iter())
            .map(|(a, b)| (a * b.conj()).re)
            .sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Complex64> {
        self.x.iter().chain(self.r.iter())
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut Complex64> {
        self.x.iter_mut().chain(self.r.iter_mut())
    }
}

/// One Hermitian block per edge.
pub type DualVariables = Vec<Hermitian3>;

/// Block of `L s` for a single edge.
#[inline]
pub fn lift_block(xa: Complex64, xb: Complex64, r: Complex64) -> Hermitian3 {
    Hermitian3 {
        diag: [0.0; 3],
        lower: [xa, xb, r.conj()],
    }
}

/// Applies `L`: one zero-diagonal block per canonical edge.
pub fn lift_apply(g: &Graph, s: &LiftedVariables) -> Result<Vec<Hermitian3>> {
    s.check_dims(g)?;
    Ok(g.edges()
        .iter()
        .zip(&s.r)
        .map(|(e, &r)| lift_block(s.x[e.a], s.x[e.b], r))
        .collect())
}

/// Applies the adjoint `L*` into `out`, overwriting it. Accumulation over
/// incident edges follows the edge order, so results are deterministic.
pub fn lift_adjoint_into(g: &Graph, q: &[Hermitian3], out: &mut LiftedVariables) -> Result<()> {
    check_len("dual blocks", g.edge_count(), q.len())?;
    out.check_dims(g)?;
    out.x.fill(Complex64::default());
    for ((e, block), r) in g.edges().iter().zip(q).zip(out.r.iter_mut()) {
        out.x[e.a] += block.lower[0] * 2.0;
        out.x[e.b] += block.lower[1] * 2.0;
        // stored entry (2,1) is conj of the (1,2) slot that carries r
        *r = block.lower[2].conj() * 2.0;
    }
    Ok(())
}

pub fn lift_adjoint(g: &Graph, q: &[Hermitian3]) -> Result<LiftedVariables> {
    let mut out = LiftedVariables::zeros(g);
    lift_adjoint_into(g, q, &mut out)?;
    Ok(out)
}

/// `||L||^2 = 2 * max degree` (an edge variable appears in one block, a node
/// variable in one block per incident edge, each time twice).
pub fn operator_norm_sq(g: &Graph) -> f64 {
    2.0 * g.max_degree().max(1) as f64
}

/// Proximity operator of `sigma f*`, with `f*(U) = -tr(U)` on the NSD cone:
/// the NSD projection of `U + sigma I`.
pub fn prox_dual(u: &Hermitian3, sigma: f64) -> Hermitian3 {
    u.shift(sigma).project_nsd()
}

/// Convex conjugate of the per-block feasibility indicator, `+inf` off the
/// NSD cone. `tol` absorbs rounding in the eigenvalue test.
pub fn conjugate_indicator(u: &Hermitian3, tol: f64) -> f64 {
    if u.eigenvalues()[2] <= tol {
        -u.trace()
    } else {
        f64::INFINITY
    }
}

/// Moment matrix with unit diagonal, first row `(1, c10, c01)` and entry
/// `(1,2) = cm11`.
pub fn moment_matrix(c10: Complex64, c01: Complex64, cm11: Complex64) -> Hermitian3 {
    Hermitian3 {
        diag: [1.0; 3],
        lower: [c10.conj(), c01.conj(), cm11.conj()],
    }
}

/// Slacks of the principal-minor conditions of a moment matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinorSlacks {
    pub determinant: f64,
    pub minor_c10: f64,
    pub minor_c01: f64,
    pub minor_cm11: f64,
}

/// PSD test of the moment matrix through its principal minors. Passes when
/// all four slacks are `>= -tol`.
pub fn psd_minors_check(
    c10: Complex64,
    c01: Complex64,
    cm11: Complex64,
    tol: f64,
) -> (bool, MinorSlacks) {
    let slacks = MinorSlacks {
        determinant: 1.0 + 2.0 * (c10 * cm11 * c01.conj()).re
            - c10.norm_sqr()
            - c01.norm_sqr()
            - cm11.norm_sqr(),
        minor_c10: 1.0 - c10.norm_sqr(),
        minor_c01: 1.0 - c01.norm_sqr(),
        minor_cm11: 1.0 - cm11.norm_sqr(),
    };
    let pass = [
        slacks.determinant,
        slacks.minor_c10,
        slacks.minor_c01,
        slacks.minor_cm11,
    ]
    .iter()
    .all(|&v| v >= -tol);
    (pass, slacks)
}

/// Relaxed objective with constants. Feasibility is not checked.
pub fn cost_conv(inst: &ProblemInstance, s: &LiftedVariables) -> Result<f64> {
    s.check_dims(inst.graph())?;
    let mut total = 0.0;
    for ((&xn, &yn), &wn) in s.x.iter().zip(inst.y()).zip(inst.w()) {
        match wn {
            NodeWeight::Finite(w) => total += w * data_term(xn, yn),
            NodeWeight::Hard => {
                if (xn - yn).norm() > CIRCLE_TOL {
                    return Ok(f64::INFINITY);
                }
            }
        }
    }
    for (&r, &l) in s.r.iter().zip(inst.lambda()) {
        total += l * (1.0 - r.re);
    }
    Ok(total)
}

/// Rank-one certificate of a lifted point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TightnessCertificate {
    pub tight: bool,
    pub max_modulus_deviation: f64,
    pub max_rank1_residual: f64,
    pub tolerance: f64,
}

pub fn tightness_certificate(
    g: &Graph,
    s: &LiftedVariables,
    tol: f64,
) -> Result<TightnessCertificate> {
    s.check_dims(g)?;
    let max_modulus_deviation =
        s.x.iter()
            .map(|z| (1.0 - z.norm()).abs())
            .fold(0.0, f64::max);
    let max_rank1_residual = g
        .edges()
        .iter()
        .zip(&s.r)
        .map(|(e, &r)| (r - s.x[e.a] * s.x[e.b].conj()).norm())
        .fold(0.0, f64::max);
    Ok(TightnessCertificate {
        tight: max_modulus_deviation <= tol && max_rank1_residual <= tol,
        max_modulus_deviation,
        max_rank1_residual,
        tolerance: tol,
    })
}

/// Relative suboptimality `(psi_approx - psi_conv) / psi_conv`.
///
/// Values in `(-1e-9, 0)` are rounding and are clamped to zero; a more
/// negative value means the sandwich inequality failed and is returned as is.
pub fn relative_gap(psi_approx: f64, psi_conv: f64) -> Result<f64> {
    if psi_conv.is_nan() || psi_conv <= 0.0 {
        return Err(Error::UndefinedGap(psi_conv));
    }
    let gap = (psi_approx - psi_conv) / psi_conv;
    Ok(if gap > -1e-9 { gap.max(0.0) } else { gap })
}
