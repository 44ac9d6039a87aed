use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{cost_row, CostSpec, DiscreteMeasure};

/// Largest number of cost-matrix entries accepted by the exact solvers.
pub const MAX_CELLS: usize = 10_000_000;

/// Optimal coupling of a finite transportation problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportPlan {
    pub value: f64,
    /// Nonzero entries `(source, target, mass)` sorted by source then target.
    pub entries: Vec<(usize, usize, f64)>,
    pub rows: usize,
    pub cols: usize,
}

impl TransportPlan {
    pub fn dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.cols]; self.rows];
        for &(i, j, m) in &self.entries {
            out[i][j] += m;
        }
        out
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        for &(i, _, m) in &self.entries {
            out[i] += m;
        }
        out
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for &(_, j, m) in &self.entries {
            out[j] += m;
        }
        out
    }
}

/// Exact solution together with an optimal dual potential on the target side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportSolution {
    pub plan: TransportPlan,
    /// Maximizer of `νᵀφ − Σ_k μ̂_k max_i (φ_i − c_ki)`. When ν has no more
    /// atoms than μ̂ this is the maximizer of least Euclidean norm.
    pub potential: Vec<f64>,
}

#[derive(Clone, Copy, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

type Entry = Reverse<(Key, u32)>;

/// Transportation problem with many sources ("points") and few sinks
/// ("atoms"), solved by successive shortest paths on the graph of atoms.
///
/// An arc `a → b` of the atom graph stands for moving some point that
/// currently sends mass to `a` over to `b`; its length is the smallest cost
/// increase `c_kb − c_ka` among such points, kept in per-arc heaps.
struct AtomGraphSolver<'a> {
    costs: &'a [f64],
    n: usize,
    capacity: &'a [f64],
    load: Vec<f64>,
    flow: Vec<Vec<(u32, f64)>>,
    heaps: Vec<BinaryHeap<Entry>>,
    tol: f64,
}

impl<'a> AtomGraphSolver<'a> {
    fn new(costs: &'a [f64], m: usize, capacity: &'a [f64]) -> Self {
        let n = capacity.len();
        Self {
            costs,
            n,
            capacity,
            load: vec![0.0; n],
            flow: vec![Vec::new(); m],
            heaps: vec![BinaryHeap::new(); n * n],
            tol: 1e-13 / (m + n) as f64,
        }
    }

    fn cost(&self, k: usize, a: usize) -> f64 {
        self.costs[k * self.n + a]
    }

    fn mass(&self, k: usize, a: usize) -> f64 {
        self.flow[k]
            .iter()
            .find(|(b, _)| *b as usize == a)
            .map_or(0.0, |&(_, v)| v)
    }

    fn add(&mut self, k: usize, a: usize, delta: f64) {
        if let Some(slot) = self.flow[k].iter_mut().find(|(b, _)| *b as usize == a) {
            slot.1 += delta;
            return;
        }
        self.flow[k].push((a as u32, delta));
        for b in 0..self.n {
            if b != a {
                let w = self.cost(k, b) - self.cost(k, a);
                self.heaps[a * self.n + b].push(Reverse((Key(w), k as u32)));
            }
        }
    }

    fn remove(&mut self, k: usize, a: usize, delta: f64) {
        let tol = self.tol;
        if let Some(pos) = self.flow[k].iter().position(|(b, _)| *b as usize == a) {
            self.flow[k][pos].1 -= delta;
            if self.flow[k][pos].1 <= tol {
                self.flow[k].swap_remove(pos);
            }
        }
    }

    /// Current arc length and the point realizing it.
    fn arc(&mut self, a: usize, b: usize) -> Option<(f64, usize)> {
        let idx = a * self.n + b;
        while let Some(&Reverse((Key(w), k))) = self.heaps[idx].peek() {
            if self.flow[k as usize].iter().any(|(b, _)| *b as usize == a) {
                return Some((w, k as usize));
            }
            self.heaps[idx].pop();
        }
        None
    }

    fn arcs(&mut self) -> Vec<Option<(f64, usize)>> {
        let n = self.n;
        let mut out = vec![None; n * n];
        for a in 0..n {
            for b in 0..n {
                if a != b {
                    out[a * n + b] = self.arc(a, b);
                }
            }
        }
        out
    }

    fn insert(&mut self, k: usize, supply: f64) -> Result<()> {
        let n = self.n;
        let mut left = supply;
        let mut dist = vec![0.0; n];
        let mut pred: Vec<Option<(usize, usize)>> = vec![None; n];
        while left > self.tol {
            let arcs = self.arcs();
            for b in 0..n {
                dist[b] = self.cost(k, b);
                pred[b] = None;
            }
            for _ in 0..n {
                let mut changed = false;
                for a in 0..n {
                    for b in 0..n {
                        if let Some((w, via)) = arcs[a * n + b] {
                            let cand = dist[a] + w;
                            if cand < dist[b] - 1e-14 * (1.0 + dist[b].abs()) {
                                dist[b] = cand;
                                pred[b] = Some((a, via));
                                changed = true;
                            }
                        }
                    }
                }
                if !changed {
                    break;
                }
            }
            let target = (0..n)
                .filter(|&b| self.capacity[b] - self.load[b] > self.tol)
                .min_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));
            let Some(target) = target else {
                // rounding left a sliver of supply but no spare capacity
                let b = match self.flow[k].iter().max_by(|x, y| x.1.total_cmp(&y.1)) {
                    Some(&(a, _)) => a as usize,
                    None => (0..n).min_by(|&a, &b| dist[a].total_cmp(&dist[b])).unwrap_or(0),
                };
                self.add(k, b, left);
                self.load[b] += left;
                return Ok(());
            };
            let mut path = Vec::new();
            let mut theta = left.min(self.capacity[target] - self.load[target]);
            let mut node = target;
            while let Some((a, via)) = pred[node] {
                theta = theta.min(self.mass(via, a));
                path.push((a, node, via));
                node = a;
                if path.len() > n {
                    return Err(Error::NonFinite("transport augmenting path"));
                }
            }
            let root = node;
            for &(a, b, via) in &path {
                self.remove(via, a, theta);
                self.add(via, b, theta);
            }
            self.add(k, root, theta);
            self.load[target] += theta;
            left -= theta;
        }
        Ok(())
    }

    /// Minimum-norm point of `{φ : φ_b − φ_a ≤ len(a → b)}`, by Hildreth's
    /// row-action method started from the origin.
    fn min_norm_potential(&mut self) -> Vec<f64> {
        let n = self.n;
        let arcs = self.arcs();
        let cons: Vec<(usize, usize, f64)> = (0..n * n)
            .filter_map(|idx| arcs[idx].map(|(w, _)| (idx / n, idx % n, w)))
            .collect();
        let mut phi = vec![0.0; n];
        let mut mult = vec![0.0; cons.len()];
        let scale = cons.iter().map(|c| c.2.abs()).fold(1.0, f64::max);
        for _ in 0..2_000_000 {
            let mut largest: f64 = 0.0;
            for (j, &(a, b, w)) in cons.iter().enumerate() {
                let viol = phi[b] - phi[a] - w;
                let delta = (viol / 2.0).max(-mult[j]);
                if delta != 0.0 {
                    mult[j] += delta;
                    phi[b] -= delta;
                    phi[a] += delta;
                    largest = largest.max(delta.abs());
                }
            }
            if largest <= 1e-15 * scale {
                break;
            }
        }
        phi
    }
}

/// Optimal value, coupling and dual potential of
/// `min Σ π_kj c(x_k, y_j)` subject to `π 𝟙 = μ̂`, `πᵀ 𝟙 = ν`.
pub fn exact_discrete_ot(mu: &DiscreteMeasure, nu: &DiscreteMeasure, cost: &CostSpec) -> Result<TransportSolution> {
    cost.validate()?;
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch {
            expected: nu.dim(),
            got: mu.dim(),
        });
    }
    let (m, n) = (mu.len(), nu.len());
    if m.saturating_mul(n) > MAX_CELLS {
        return Err(Error::TooLarge(format!("{m} x {n} cost matrix exceeds {MAX_CELLS} entries")));
    }
    let mut costs = Vec::with_capacity(m * n);
    for x in mu.atoms() {
        costs.extend(cost_row(x, nu, cost)?);
    }
    transport_from_costs(&costs, mu.weights(), nu.weights())
}

/// Same as [`exact_discrete_ot`] from a row-major `M × N` cost matrix.
pub fn transport_from_costs(costs: &[f64], a: &[f64], b: &[f64]) -> Result<TransportSolution> {
    let (m, n) = (a.len(), b.len());
    if costs.len() != m * n {
        return Err(Error::LengthMismatch {
            what: "cost matrix",
            expected: m * n,
            got: costs.len(),
        });
    }
    if m == 0 || n == 0 {
        return Err(Error::field("weights", "both marginals need at least one atom"));
    }
    let (sa, sb) = (a.iter().sum::<f64>(), b.iter().sum::<f64>());
    if (sa - sb).abs() > 1e-9 || a.iter().chain(b).any(|&w| !(w >= 0.0)) {
        return Err(Error::field("weights", "marginals must be nonnegative with equal total mass"));
    }
    let swapped = m < n;
    let transposed;
    let (pts_costs, supply, capacity) = if swapped {
        let mut t = vec![0.0; m * n];
        for k in 0..m {
            for j in 0..n {
                t[j * m + k] = costs[k * n + j];
            }
        }
        transposed = t;
        (&transposed[..], b, a)
    } else {
        (costs, a, b)
    };
    let mut solver = AtomGraphSolver::new(pts_costs, supply.len(), capacity);
    for (k, &s) in supply.iter().enumerate() {
        solver.insert(k, s)?;
    }
    let atom_potential = solver.min_norm_potential();
    let mut entries = Vec::new();
    let mut value = 0.0;
    for (k, list) in solver.flow.iter().enumerate() {
        for &(atom, mass) in list {
            let atom = atom as usize;
            let (i, j) = if swapped { (atom, k) } else { (k, atom) };
            value += mass * costs[i * n + j];
            entries.push((i, j, mass));
        }
    }
    entries.sort_by_key(|x| (x.0, x.1));
    let potential = if swapped {
        (0..n)
            .map(|j| {
                (0..m)
                    .map(|k| costs[k * n + j] - atom_potential[k])
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    } else {
        atom_potential
    };
    Ok(TransportSolution {
        plan: TransportPlan {
            value,
            entries,
            rows: m,
            cols: n,
        },
        potential,
    })
}
