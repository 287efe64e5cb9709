//! Brute-force references for small instances.
//!
//! Angles are discretized to `K` uniform levels `-pi + (2k + 1) pi / K`, so
//! no level sits on the branch cut. Costs are evaluated in angular form,
//! `w |y| (1 - cos(a - arg y))` plus constants and `lambda (1 - cos(a - b))`,
//! independently of the complex-valued objective used by the solvers.

use std::collections::VecDeque;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circle::{CircleSignal, NodeWeight, ProblemInstance};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::hermitian::Hermitian3;
use crate::lifting::{lift_adjoint, lift_apply, LiftedVariables};

/// Largest `K^|V|` the exhaustive search accepts.
pub const EXHAUSTIVE_BUDGET: u64 = 1 << 28;

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub x: CircleSignal,
    pub psi: f64,
}

/// Angle of level `k` out of `levels`.
pub fn level_angle(k: usize, levels: usize) -> f64 {
    -PI + (2 * k + 1) as f64 * PI / levels as f64
}

/// Candidate angles of one node.
#[derive(Debug, Clone, Copy)]
enum Candidates {
    Grid,
    Fixed(f64),
}

impl Candidates {
    fn len(self, levels: usize) -> usize {
        match self {
            Candidates::Grid => levels,
            Candidates::Fixed(_) => 1,
        }
    }

    fn angle(self, i: usize, levels: usize) -> f64 {
        match self {
            Candidates::Grid => level_angle(i, levels),
            Candidates::Fixed(a) => a,
        }
    }
}

struct Discretized {
    levels: usize,
    candidates: Vec<Candidates>,
    unary: Vec<Vec<f64>>,
    /// `1 - cos(2 pi d / K)` for level differences `d`.
    pair_table: Vec<f64>,
}

fn discretize(inst: &ProblemInstance, levels: usize) -> Discretized {
    let candidates: Vec<Candidates> = inst
        .y()
        .iter()
        .zip(inst.w())
        .map(|(y, w)| match w {
            NodeWeight::Hard => Candidates::Fixed(y.arg()),
            NodeWeight::Finite(_) => Candidates::Grid,
        })
        .collect();
    let unary = candidates
        .iter()
        .zip(inst.y().iter().zip(inst.w()))
        .map(|(c, (y, w))| {
            let w = w.finite_or_zero();
            let (r, phase) = (y.norm(), y.arg());
            let offset = 0.5 * (1.0 - r).powi(2);
            (0..c.len(levels))
                .map(|i| w * (offset + r * (1.0 - (c.angle(i, levels) - phase).cos())))
                .collect()
        })
        .collect();
    let pair_table = (0..levels)
        .map(|d| 1.0 - (2.0 * PI * d as f64 / levels as f64).cos())
        .collect();
    Discretized {
        levels,
        candidates,
        unary,
        pair_table,
    }
}

impl Discretized {
    fn pair(&self, na: usize, ia: usize, nb: usize, ib: usize) -> f64 {
        match (self.candidates[na], self.candidates[nb]) {
            (Candidates::Grid, Candidates::Grid) => {
                self.pair_table[(ia + self.levels - ib) % self.levels]
            }
            (ca, cb) => 1.0 - (ca.angle(ia, self.levels) - cb.angle(ib, self.levels)).cos(),
        }
    }

    fn signal(&self, choice: &[usize]) -> CircleSignal {
        let angles: Vec<f64> = choice
            .iter()
            .zip(&self.candidates)
            .map(|(&i, c)| c.angle(i, self.levels))
            .collect();
        CircleSignal::from_angles(&angles)
    }
}

/// Exact minimum of the discretized problem on a tree by dynamic
/// programming, `O(|V| K^2)`.
pub fn dp_min_chain(inst: &ProblemInstance, levels: usize) -> Result<OracleResult> {
    let g = inst.graph();
    if !g.is_tree() {
        return Err(Error::UnsupportedTopology(
            "dynamic programming oracle needs a tree".into(),
        ));
    }
    if levels < 8 {
        return Err(Error::InvalidInput(format!(
            "need at least 8 levels, got {levels}"
        )));
    }
    let d = discretize(inst, levels);
    let n = g.node_count();

    // BFS from node 0: parent edge of every node, and a visiting order
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for inc in g.incidences(v) {
            let u = g.other_end(inc.edge, v);
            if !seen[u] {
                seen[u] = true;
                parent[u] = Some((v, inc.edge));
                queue.push_back(u);
            }
        }
    }

    // belief[v][i]: best cost of v's subtree with v at candidate i
    let mut belief: Vec<Vec<f64>> = d.unary.clone();
    // best child candidate for each parent candidate, per child
    let mut argbest: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &v in order.iter().rev() {
        let Some((p, edge)) = parent[v] else { continue };
        let lambda = inst.lambda()[edge];
        let child = &belief[v];
        let np = d.candidates[p].len(levels);
        let mut msg = vec![0.0; np];
        let mut arg = vec![0usize; np];
        let both_grid = matches!(
            (d.candidates[v], d.candidates[p]),
            (Candidates::Grid, Candidates::Grid)
        );
        for (ip, (m, a)) in msg.iter_mut().zip(arg.iter_mut()).enumerate() {
            let mut best = f64::INFINITY;
            let mut best_i = 0;
            if both_grid {
                // difference iv - ip wraps at iv = ip
                let table = &d.pair_table;
                let (lo, hi) = child.split_at(ip);
                for (k, (&cv, &t)) in hi.iter().zip(table).enumerate() {
                    let c = cv + lambda * t;
                    if c < best {
                        best = c;
                        best_i = ip + k;
                    }
                }
                for (k, (&cv, &t)) in lo.iter().zip(&table[levels - ip..]).enumerate() {
                    let c = cv + lambda * t;
                    if c < best {
                        best = c;
                        best_i = k;
                    }
                }
            } else {
                for (iv, &cv) in child.iter().enumerate() {
                    let c = cv + lambda * d.pair(v, iv, p, ip);
                    if c < best {
                        best = c;
                        best_i = iv;
                    }
                }
            }
            *m = best;
            *a = best_i;
        }
        for (b, m) in belief[p].iter_mut().zip(&msg) {
            *b += m;
        }
        argbest[v] = arg;
    }

    let root = order[0];
    let (best_root, psi) = belief[root]
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("root has candidates");
    let mut choice = vec![0usize; n];
    choice[root] = best_root;
    for &v in &order[1..] {
        let (p, _) = parent[v].expect("non-root has a parent");
        choice[v] = argbest[v][choice[p]];
    }
    Ok(OracleResult {
        x: d.signal(&choice),
        psi,
    })
}

/// Exhaustive minimum over all `K^|V|` level tuples; any topology.
pub fn exhaustive_min(inst: &ProblemInstance, levels: usize) -> Result<OracleResult> {
    let g = inst.graph();
    let n = g.node_count();
    if n > 4 {
        return Err(Error::InvalidSize(format!(
            "exhaustive search takes <= 4 nodes, got {n}"
        )));
    }
    if !(2..=256).contains(&levels) {
        return Err(Error::InvalidInput(format!(
            "levels must be in 2..=256, got {levels}"
        )));
    }
    let d = discretize(inst, levels);
    let sizes: Vec<usize> = d.candidates.iter().map(|c| c.len(levels)).collect();
    let total: u64 = sizes.iter().map(|&s| s as u64).product();
    if total > EXHAUSTIVE_BUDGET {
        return Err(Error::InvalidSize(format!(
            "{total} tuples exceed the exhaustive budget"
        )));
    }
    let mut choice = vec![0usize; n];
    let mut best = f64::INFINITY;
    let mut best_choice = choice.clone();
    loop {
        let mut cost: f64 = choice.iter().enumerate().map(|(v, &i)| d.unary[v][i]).sum();
        for (e, &l) in g.edges().iter().zip(inst.lambda()) {
            cost += l * d.pair(e.a, choice[e.a], e.b, choice[e.b]);
        }
        if cost < best {
            best = cost;
            best_choice.copy_from_slice(&choice);
        }
        // odometer increment
        let mut k = 0;
        loop {
            if k == n {
                return Ok(OracleResult {
                    x: d.signal(&best_choice),
                    psi: best,
                });
            }
            choice[k] += 1;
            if choice[k] < sizes[k] {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

/// Largest `|<L s, Q> - <s, L* Q>|` over 100 random pairs. `<L s, Q>` is
/// evaluated as the trace of the full matrix product.
pub fn adjoint_selftest(g: &Graph, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rc =
        |rng: &mut ChaCha8Rng| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let s = LiftedVariables {
            x: (0..g.node_count()).map(|_| rc(&mut rng)).collect(),
            r: (0..g.edge_count()).map(|_| rc(&mut rng)).collect(),
        };
        let q: Vec<Hermitian3> = (0..g.edge_count())
            .map(|_| Hermitian3 {
                diag: [0; 3].map(|_| rng.gen_range(-1.0..1.0)),
                lower: [0; 3].map(|_| rc(&mut rng)),
            })
            .collect();
        let ls = lift_apply(g, &s)?;
        let lhs: f64 = ls
            .iter()
            .zip(&q)
            .map(|(a, b)| {
                let (a, b) = (a.to_array(), b.to_array());
                let mut tr = Complex64::default();
                for i in 0..3 {
                    for k in 0..3 {
                        tr += a[i][k] * b[k][i];
                    }
                }
                tr.re
            })
            .sum();
        let lq = lift_adjoint(g, &q)?;
        let rhs: f64 =
            s.x.iter()
                .chain(&s.r)
                .zip(lq.x.iter().chain(&lq.r))
                .map(|(a, b)| a.re * b.re + a.im * b.im)
                .sum();
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}
