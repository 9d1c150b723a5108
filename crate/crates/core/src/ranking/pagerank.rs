use super::view::GraphView;
use super::{Convergence, SolverParams};

#[derive(Debug, Clone, PartialEq)]
pub struct PageRankSolution {
    pub scores: Vec<f64>,
    pub convergence: Convergence,
}

/// Damped PageRank by power iteration.
///
/// Teleport is uniform over all nodes, the mass of dangling nodes is spread
/// uniformly, and a node's mass leaves along its out-edges in proportion to
/// their weight. Iteration starts from `init` when given (it is
/// renormalized), otherwise from the uniform vector, and stops once the L1
/// change drops below the tolerance.
pub fn pagerank(view: &GraphView, params: &SolverParams, init: Option<&[f64]>) -> PageRankSolution {
    let n = view.node_count();
    if n == 0 {
        return PageRankSolution {
            scores: Vec::new(),
            convergence: Convergence {
                iterations: 0,
                converged: true,
            },
        };
    }
    let uniform = 1.0 / n as f64;
    let mut x = match init {
        Some(v) if v.len() == n && v.iter().sum::<f64>() > 0.0 => {
            let total: f64 = v.iter().sum();
            v.iter().map(|s| s / total).collect()
        }
        _ => vec![uniform; n],
    };
    let d = params.damping;
    let mut next = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < params.max_iterations {
        iterations += 1;
        let dangling: f64 = (0..n)
            .filter(|&u| view.out_weight(u) == 0.0)
            .map(|u| x[u])
            .sum();
        let base = (1.0 - d) * uniform + d * dangling * uniform;
        next.fill(base);
        for (u, &mass) in x.iter().enumerate() {
            let ow = view.out_weight(u);
            if ow == 0.0 {
                continue;
            }
            let share = d * mass / ow;
            for (v, w) in view.out_edges(u) {
                next[v] += share * w;
            }
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|s| *s /= total);
        let delta: f64 = x.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut x, &mut next);
        if delta < params.tolerance {
            converged = true;
            break;
        }
    }

    PageRankSolution {
        scores: x,
        convergence: Convergence {
            iterations,
            converged,
        },
    }
}
