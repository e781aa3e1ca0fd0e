//! Reference answers computed without the code under test.

use std::f64::consts::PI;

/// Least topological order by brute force: every permutation of `keys` is tried in
/// lexicographic order and the first one satisfying all `edges` (a runs before b) wins.
/// `None` when no permutation satisfies them, which means the constraints hold a cycle.
pub fn least_order(keys: &[String], edges: &[(usize, usize)]) -> Option<Vec<usize>> {
    let mut sorted: Vec<usize> = (0..keys.len()).collect();
    sorted.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut perm = Vec::with_capacity(keys.len());
    let mut used = vec![false; keys.len()];
    first_valid(&sorted, edges, &mut perm, &mut used)
}

fn first_valid(sorted: &[usize], edges: &[(usize, usize)], perm: &mut Vec<usize>, used: &mut [bool]) -> Option<Vec<usize>> {
    if perm.len() == sorted.len() {
        let mut pos = vec![0; sorted.len()];
        for (p, &i) in perm.iter().enumerate() {
            pos[i] = p;
        }
        return edges.iter().all(|&(a, b)| pos[a] < pos[b]).then(|| perm.clone());
    }
    for &i in sorted {
        if used[i] {
            continue;
        }
        used[i] = true;
        perm.push(i);
        let found = first_valid(sorted, edges, perm, used);
        perm.pop();
        used[i] = false;
        if found.is_some() {
            return found;
        }
    }
    None
}

/// Angular frequency of the `sin(2 pi x)` mode under the three-point Laplacian with spacing `h`.
pub fn discrete_omega(c: f64, h: f64) -> f64 {
    2.0 * c / h * (PI * h).sin()
}

/// Exact solution of the spatially discretized standing wave at grid point `x`.
pub fn semi_discrete_phi(amplitude: f64, c: f64, h: f64, x: f64, t: f64) -> f64 {
    amplitude * (2.0 * PI * x).sin() * (discrete_omega(c, h) * t).cos()
}

/// Root-mean-square difference.
pub fn rms_error(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    (a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64).sqrt()
}

/// Observed order from errors at successive resolutions refined by a factor 2.
pub fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// One classic RK4 step of `u' = lambda u`, expanded by hand.
pub fn rk4_linear(u: f64, lambda: f64, dt: f64) -> f64 {
    let z = lambda * dt;
    u * (1.0 + z + z * z / 2.0 + z * z * z / 6.0 + z * z * z * z / 24.0)
}
