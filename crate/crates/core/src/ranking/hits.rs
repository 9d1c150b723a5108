use super::view::GraphView;
use super::{Convergence, SolverParams};

#[derive(Debug, Clone, PartialEq)]
pub struct HitsSolution {
    pub authority: Vec<f64>,
    pub hub: Vec<f64>,
    pub convergence: Convergence,
}

fn normalize_l2(v: &mut [f64]) -> bool {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    true
}

/// Weighted HITS over the whole graph.
///
/// Each round sets `authority(v) = Σ w(u→v)·hub(u)`, normalizes it, then
/// sets `hub(u) = Σ w(u→v)·authority(v)` and normalizes that. Hubs start
/// uniform. A graph without edges yields all-zero vectors.
pub fn hits(view: &GraphView, params: &SolverParams, init_hub: Option<&[f64]>) -> HitsSolution {
    let n = view.node_count();
    let mut hub = match init_hub {
        Some(h) if h.len() == n => h.to_vec(),
        _ => vec![1.0; n],
    };
    if !normalize_l2(&mut hub) {
        hub = vec![1.0; n];
        normalize_l2(&mut hub);
    }
    let mut authority = vec![0.0; n];
    let mut next_auth = vec![0.0; n];
    let mut next_hub = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = n == 0;

    while !converged && iterations < params.max_iterations {
        iterations += 1;
        next_auth.fill(0.0);
        for (u, &h) in hub.iter().enumerate() {
            for (v, w) in view.out_edges(u) {
                next_auth[v] += w * h;
            }
        }
        if !normalize_l2(&mut next_auth) {
            authority.fill(0.0);
            hub.fill(0.0);
            converged = true;
            break;
        }
        for (u, slot) in next_hub.iter_mut().enumerate() {
            *slot = view.out_edges(u).map(|(v, w)| w * next_auth[v]).sum();
        }
        normalize_l2(&mut next_hub);
        let delta: f64 = authority
            .iter()
            .zip(&next_auth)
            .chain(hub.iter().zip(&next_hub))
            .map(|(a, b)| (a - b).abs())
            .sum();
        std::mem::swap(&mut authority, &mut next_auth);
        std::mem::swap(&mut hub, &mut next_hub);
        converged = delta < params.tolerance;
    }

    HitsSolution {
        authority,
        hub,
        convergence: Convergence {
            iterations,
            converged,
        },
    }
}
