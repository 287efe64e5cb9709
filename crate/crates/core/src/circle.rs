//! Circle arithmetic, problem data and the original nonconvex objective.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{check_len, Error, Result};
use crate::graph::Graph;

/// Modulus below which a point is treated as the origin.
pub const DEGENERATE_MODULUS: f64 = 1e-12;
/// Tolerance on `|x| = 1` for circle-valued samples and hard constraints.
pub const CIRCLE_TOL: f64 = 1e-9;

/// Data weight of a node. `Hard` pins the node to its observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeWeight {
    Finite(f64),
    Hard,
}

impl NodeWeight {
    pub fn is_hard(self) -> bool {
        matches!(self, NodeWeight::Hard)
    }

    /// Finite value, with `Hard` mapped to zero. The data term of a hard
    /// node is handled by the constraint, not by a penalty.
    pub fn finite_or_zero(self) -> f64 {
        match self {
            NodeWeight::Finite(w) => w,
            NodeWeight::Hard => 0.0,
        }
    }
}

/// Observations, node weights and edge weights on a graph.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    graph: Graph,
    y: Vec<Complex64>,
    w: Vec<NodeWeight>,
    lambda: Vec<f64>,
}

impl ProblemInstance {
    pub fn new(
        graph: Graph,
        y: Vec<Complex64>,
        w: Vec<NodeWeight>,
        lambda: Vec<f64>,
    ) -> Result<Self> {
        check_len("observations", graph.node_count(), y.len())?;
        check_len("node weights", graph.node_count(), w.len())?;
        check_len("edge weights", graph.edge_count(), lambda.len())?;
        for (n, (&wn, yn)) in w.iter().zip(&y).enumerate() {
            if !(yn.re.is_finite() && yn.im.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "observation {n} is not finite"
                )));
            }
            match wn {
                NodeWeight::Finite(v) if !(v.is_finite() && v >= 0.0) => {
                    return Err(Error::InvalidInput(format!(
                        "node weight {n} must be finite and nonnegative, got {v}"
                    )))
                }
                NodeWeight::Hard if (yn.norm() - 1.0).abs() > CIRCLE_TOL => {
                    return Err(Error::InvalidInput(format!(
                        "hard-constrained node {n} has |y| = {} off the circle",
                        yn.norm()
                    )))
                }
                _ => {}
            }
        }
        if let Some((e, l)) = lambda
            .iter()
            .enumerate()
            .find(|(_, l)| !(l.is_finite() && **l >= 0.0))
        {
            return Err(Error::InvalidInput(format!(
                "edge weight {e} must be finite and nonnegative, got {l}"
            )));
        }
        Ok(ProblemInstance {
            graph,
            y,
            w,
            lambda,
        })
    }

    /// Uniform finite node weight and uniform edge weight.
    pub fn uniform(graph: Graph, y: Vec<Complex64>, w: f64, lambda: f64) -> Result<Self> {
        let n = graph.node_count();
        let m = graph.edge_count();
        Self::new(graph, y, vec![NodeWeight::Finite(w); n], vec![lambda; m])
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn y(&self) -> &[Complex64] {
        &self.y
    }

    pub fn w(&self) -> &[NodeWeight] {
        &self.w
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn has_hard_constraints(&self) -> bool {
        self.w.iter().any(|w| w.is_hard())
    }

    /// True when no node carries data: every constant signal is then optimal.
    pub fn is_unanchored(&self) -> bool {
        self.w
            .iter()
            .all(|w| matches!(w, NodeWeight::Finite(v) if *v == 0.0))
    }
}

/// A signal with every sample on the unit circle.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleSignal(Vec<Complex64>);

impl CircleSignal {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if let Some((n, z)) = values.iter().enumerate().find(|(_, z)| {
            let off = (z.norm() - 1.0).abs();
            off.is_nan() || off > CIRCLE_TOL
        }) {
            return Err(Error::InvalidInput(format!(
                "sample {n} has modulus {} off the circle",
                z.norm()
            )));
        }
        Ok(CircleSignal(values))
    }

    pub fn from_angles(angles: &[f64]) -> Self {
        CircleSignal(
            angles
                .iter()
                .map(|&a| Complex64::from_polar(1.0, a))
                .collect(),
        )
    }

    pub fn values(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.0
    }

    /// Angles in `(-pi, pi]`.
    pub fn angles(&self) -> Vec<f64> {
        self.0.iter().map(|&z| wrap_angle(z.arg())).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Maps any real angle to `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    if t <= -PI {
        t += 2.0 * PI;
    }
    t
}

/// Argument in `(-pi, pi]`. `arg(-1) = pi`.
pub fn arg(z: Complex64) -> Result<f64> {
    if z.re == 0.0 && z.im == 0.0 {
        return Err(Error::UndefinedArgument);
    }
    // atan2 yields -pi for (-x, -0.0)
    Ok(wrap_angle(z.im.atan2(z.re)))
}

/// Radial projection onto the circle. Points within [`DEGENERATE_MODULUS`]
/// of the origin map to `1` with the degenerate flag set.
pub fn project_to_circle(z: Complex64) -> (Complex64, bool) {
    let r = z.norm();
    if r < DEGENERATE_MODULUS {
        (Complex64::new(1.0, 0.0), true)
    } else {
        (z / r, false)
    }
}

/// Projects every sample, discarding degenerate flags.
pub fn project_signal(values: &[Complex64]) -> CircleSignal {
    CircleSignal(values.iter().map(|&z| project_to_circle(z).0).collect())
}

/// Original objective with its additive constants:
/// `sum_n w_n (1/2 (1 + |y_n|^2) - Re(x_n conj(y_n))) + sum_e lambda_e (1 - Re(x_a conj(x_b)))`.
///
/// Hard nodes contribute zero when `x_n = y_n` and make the cost infinite
/// otherwise.
pub fn cost_orig(inst: &ProblemInstance, x: &CircleSignal) -> Result<f64> {
    check_len("signal samples", inst.graph.node_count(), x.len())?;
    let xs = x.values();
    let mut total = 0.0;
    for ((&xn, &yn), &wn) in xs.iter().zip(&inst.y).zip(&inst.w) {
        match wn {
            NodeWeight::Finite(w) => total += w * data_term(xn, yn),
            NodeWeight::Hard => {
                if (xn - yn).norm() > CIRCLE_TOL {
                    return Ok(f64::INFINITY);
                }
            }
        }
    }
    for (e, &l) in inst.graph.edges().iter().zip(&inst.lambda) {
        total += l * (1.0 - (xs[e.a] * xs[e.b].conj()).re);
    }
    Ok(total)
}

#[inline]
pub(crate) fn data_term(xn: Complex64, yn: Complex64) -> f64 {
    0.5 * (1.0 + yn.norm_sqr()) - (xn * yn.conj()).re
}

/// Weighted circular mean: projection of `sum_n w_n y_n` onto the circle.
pub fn circular_mean(points: &[Complex64], weights: &[f64]) -> Result<(Complex64, bool)> {
    if points.is_empty() {
        return Err(Error::InvalidInput("circular mean of no points".into()));
    }
    check_len("weights", points.len(), weights.len())?;
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::InvalidInput(
            "weights must be finite and nonnegative".into(),
        ));
    }
    if !weights.iter().any(|&w| w > 0.0) {
        return Err(Error::InvalidInput(
            "circular mean needs a positive weight".into(),
        ));
    }
    let sum: Complex64 = points.iter().zip(weights).map(|(&p, &w)| p * w).sum();
    Ok(project_to_circle(sum))
}

/// Squares every value, mapping orientations (defined modulo pi) to angles.
pub fn orientation_double(y: &[Complex64]) -> Vec<Complex64> {
    y.iter().map(|z| z * z).collect()
}

/// Principal square root on the circle; output argument in `(-pi/2, pi/2]`.
pub fn orientation_halve(x: &CircleSignal) -> CircleSignal {
    CircleSignal(
        x.0.iter()
            .map(|&z| Complex64::from_polar(1.0, wrap_angle(z.arg()) / 2.0))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_chain;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn arg_conventions() {
        assert_eq!(arg(c(1.0, 0.0)).unwrap(), 0.0);
        assert_eq!(arg(c(-1.0, 0.0)).unwrap(), PI);
        assert_eq!(arg(c(-1.0, -0.0)).unwrap(), PI);
        assert_abs_diff_eq!(
            arg(Complex64::from_polar(1.0, 2.0)).unwrap(),
            2.0,
            epsilon = 1e-15
        );
        assert!(matches!(arg(c(0.0, 0.0)), Err(Error::UndefinedArgument)));
        assert_eq!(wrap_angle(-PI), PI);
        assert_abs_diff_eq!(wrap_angle(3.0 * PI / 2.0), -PI / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn projection() {
        let (p, d) = project_to_circle(c(3.0, 4.0));
        assert_abs_diff_eq!(p.re, 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(p.im, 0.8, epsilon = 1e-15);
        assert!(!d);
        assert_eq!(project_to_circle(c(0.0, 0.0)), (c(1.0, 0.0), true));
        let z = Complex64::from_polar(1.0, 0.7);
        let (p, d) = project_to_circle(z);
        assert!((p - z).norm() < 1e-15 && !d);
    }

    #[test]
    fn cost_examples() {
        let g = build_chain(2).unwrap();
        let one = c(1.0, 0.0);
        let inst = ProblemInstance::uniform(g.clone(), vec![one; 2], 3.0, 2.0).unwrap();
        let x = CircleSignal::new(vec![one; 2]).unwrap();
        assert_eq!(cost_orig(&inst, &x).unwrap(), 0.0);

        let inst = ProblemInstance::uniform(g, vec![one; 2], 0.0, 1.0).unwrap();
        let x = CircleSignal::new(vec![one, -one]).unwrap();
        assert_abs_diff_eq!(cost_orig(&inst, &x).unwrap(), 2.0, epsilon = 1e-15);

        let short = CircleSignal::new(vec![one]).unwrap();
        assert!(matches!(
            cost_orig(&inst, &short),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn interpolation_closed_form_cost() {
        let g = build_chain(10).unwrap();
        let mut w = vec![NodeWeight::Finite(0.0); 10];
        w[0] = NodeWeight::Hard;
        w[9] = NodeWeight::Hard;
        let mut y = vec![c(1.0, 0.0); 10];
        y[0] = Complex64::from_polar(1.0, -1.0);
        y[9] = Complex64::from_polar(1.0, 2.0);
        let inst = ProblemInstance::new(g, y, w, vec![1.0; 9]).unwrap();
        let angles: Vec<f64> = (1..=10).map(|n| (n as f64 - 4.0) / 3.0).collect();
        let x = CircleSignal::from_angles(&angles);
        let expected = 9.0 * (1.0 - (1.0f64 / 3.0).cos());
        assert_abs_diff_eq!(cost_orig(&inst, &x).unwrap(), expected, epsilon = 1e-12);
        assert_abs_diff_eq!(expected, 0.4953875, epsilon = 1e-7);

        // violating a hard constraint
        let bad = CircleSignal::from_angles(&[0.0; 10]);
        assert_eq!(cost_orig(&inst, &bad).unwrap(), f64::INFINITY);
    }

    #[test]
    fn circular_mean_examples() {
        let (m, d) = circular_mean(&[c(1.0, 0.0), c(0.0, 1.0)], &[1.0, 1.0]).unwrap();
        assert!((m - Complex64::from_polar(1.0, PI / 4.0)).norm() < 1e-15 && !d);
        let a = Complex64::from_polar(1.0, PI / 3.0);
        let (m, _) = circular_mean(&[a, a.conj()], &[1.0, 1.0]).unwrap();
        assert!((m - c(1.0, 0.0)).norm() < 1e-15);
        let (_, d) = circular_mean(&[c(1.0, 0.0), c(-1.0, 0.0)], &[1.0, 1.0]).unwrap();
        assert!(d);
        assert!(circular_mean(&[], &[]).is_err());
        assert!(circular_mean(&[a], &[0.0]).is_err());
    }

    #[test]
    fn orientation_doubling() {
        let d = orientation_double(&[Complex64::from_polar(1.0, PI / 4.0)]);
        assert!((d[0] - c(0.0, 1.0)).norm() < 1e-15);
        let x = CircleSignal::new(orientation_double(&[Complex64::from_polar(1.0, 0.3)])).unwrap();
        assert!(
            (orientation_halve(&x).values()[0] - Complex64::from_polar(1.0, 0.3)).norm() < 1e-15
        );
        let minus_one = CircleSignal::new(vec![c(-1.0, 0.0)]).unwrap();
        assert!((orientation_halve(&minus_one).values()[0] - c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn instance_validation() {
        let g = build_chain(3).unwrap();
        let y = vec![c(1.0, 0.0); 3];
        assert!(ProblemInstance::uniform(g.clone(), y.clone(), -1.0, 1.0).is_err());
        assert!(ProblemInstance::uniform(g.clone(), y.clone(), 1.0, f64::NAN).is_err());
        assert!(ProblemInstance::uniform(g.clone(), y[..2].to_vec(), 1.0, 1.0).is_err());
        let mut w = vec![NodeWeight::Finite(1.0); 3];
        w[1] = NodeWeight::Hard;
        let mut y2 = y.clone();
        y2[1] = c(0.5, 0.0);
        assert!(ProblemInstance::new(g.clone(), y2, w.clone(), vec![1.0; 2]).is_err());
        assert!(ProblemInstance::new(g, y, w, vec![1.0; 2]).is_ok());
    }
}
