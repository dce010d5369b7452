//! Highest-label push-relabel maximum flow with the gap heuristic, on
//! integer capacities so cuts are exact.

use std::collections::VecDeque;

#[derive(Clone, Debug)]
pub struct FlowNetwork {
    n: usize,
    to: Vec<usize>,
    cap: Vec<i128>,
    adj: Vec<Vec<usize>>,
}

impl FlowNetwork {
    pub fn new(n: usize) -> Self {
        FlowNetwork {
            n,
            to: Vec::new(),
            cap: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    /// Adds `u → v` with capacity `forward` and `v → u` with `backward` as
    /// one residual pair.
    pub fn add_edge(&mut self, u: usize, v: usize, forward: i128, backward: i128) {
        assert!(
            forward >= 0 && backward >= 0,
            "capacities must be nonnegative"
        );
        let e = self.to.len();
        self.to.extend([v, u]);
        self.cap.extend([forward, backward]);
        self.adj[u].push(e);
        self.adj[v].push(e + 1);
    }

    /// Maximum `s`-`t` flow value and the sink side of a minimum cut: the
    /// nodes that can still reach `t` in the residual network, i.e. the
    /// smallest sink side among all minimum cuts.
    pub fn min_cut(mut self, s: usize, t: usize) -> (i128, Vec<bool>) {
        let n = self.n;
        let mut height = vec![n; n];
        let mut excess = vec![0i128; n];
        let mut count = vec![0usize; 2 * n + 1];
        let mut current = vec![0usize; n];
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); n];

        // Exact distances to t as initial labels.
        height[t] = 0;
        let mut queue = VecDeque::from([t]);
        while let Some(v) = queue.pop_front() {
            for &e in &self.adj[v] {
                let u = self.to[e];
                if height[u] == n && u != t && self.cap[e ^ 1] > 0 {
                    height[u] = height[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        height[s] = n;
        for &h in &height {
            count[h] += 1;
        }
        let mut highest = 0usize;
        for idx in 0..self.adj[s].len() {
            let e = self.adj[s][idx];
            let f = self.cap[e];
            if f > 0 {
                let v = self.to[e];
                self.cap[e] -= f;
                self.cap[e ^ 1] += f;
                excess[v] += f;
                excess[s] -= f;
                if v != t && height[v] < n && excess[v] == f {
                    buckets[height[v]].push(v);
                    highest = highest.max(height[v]);
                }
            }
        }

        loop {
            while highest > 0 && buckets[highest].is_empty() {
                highest -= 1;
            }
            let Some(u) = buckets[highest].pop() else {
                if highest == 0 {
                    break;
                }
                continue;
            };
            if height[u] != highest || excess[u] == 0 || height[u] >= n {
                continue;
            }
            // Discharge u.
            while excess[u] > 0 && height[u] < n {
                if current[u] == self.adj[u].len() {
                    let old = height[u];
                    let mut new = 2 * n;
                    for &e in &self.adj[u] {
                        if self.cap[e] > 0 {
                            new = new.min(height[self.to[e]] + 1);
                        }
                    }
                    count[old] -= 1;
                    if count[old] == 0 && old < n {
                        // Gap: nothing above `old` can reach t any more.
                        for h in height.iter_mut() {
                            if *h > old && *h < n {
                                count[*h] -= 1;
                                *h = n;
                                count[n] += 1;
                            }
                        }
                        height[u] = n;
                        count[n] += 1;
                    } else {
                        height[u] = new.min(n);
                        count[height[u]] += 1;
                    }
                    current[u] = 0;
                    continue;
                }
                let e = self.adj[u][current[u]];
                let v = self.to[e];
                if self.cap[e] > 0 && height[u] == height[v] + 1 {
                    let f = excess[u].min(self.cap[e]);
                    self.cap[e] -= f;
                    self.cap[e ^ 1] += f;
                    excess[u] -= f;
                    let was_idle = excess[v] == 0;
                    excess[v] += f;
                    if was_idle && v != t && v != s && height[v] < n {
                        buckets[height[v]].push(v);
                        highest = highest.max(height[v]);
                    }
                } else {
                    current[u] += 1;
                }
            }
            if height[u] < n {
                highest = highest.max(height[u]);
            }
        }

        let mut sink_side = vec![false; n];
        sink_side[t] = true;
        let mut queue = VecDeque::from([t]);
        while let Some(v) = queue.pop_front() {
            for &e in &self.adj[v] {
                let u = self.to[e];
                if !sink_side[u] && self.cap[e ^ 1] > 0 {
                    sink_side[u] = true;
                    queue.push_back(u);
                }
            }
        }
        (excess[t], sink_side)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_network() {
        // CLRS example, max flow 23.
        let mut g = FlowNetwork::new(6);
        for &(u, v, c) in &[
            (0, 1, 16),
            (0, 2, 13),
            (1, 3, 12),
            (2, 1, 4),
            (3, 2, 9),
            (2, 4, 14),
            (4, 3, 7),
            (3, 5, 20),
            (4, 5, 4),
        ] {
            g.add_edge(u, v, c, 0);
        }
        let (f, sink) = g.min_cut(0, 5);
        assert_eq!(f, 23);
        assert!(sink[5] && !sink[0]);
    }

    #[test]
    fn cut_capacity_equals_flow_on_random_graphs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let n = rng.gen_range(2..9);
            let mut arcs = Vec::new();
            for u in 0..n {
                for v in 0..n {
                    if u != v && rng.gen_bool(0.4) {
                        arcs.push((u, v, rng.gen_range(0..10i128)));
                    }
                }
            }
            let mut g = FlowNetwork::new(n);
            for &(u, v, c) in &arcs {
                g.add_edge(u, v, c, 0);
            }
            let (f, sink) = g.min_cut(0, n - 1);
            let cut: i128 = arcs
                .iter()
                .filter(|&&(u, v, _)| !sink[u] && sink[v])
                .map(|a| a.2)
                .sum();
            assert_eq!(f, cut);
            // Brute-force minimum cut over all partitions.
            let mut best = i128::MAX;
            for mask in 0u32..(1 << n) {
                if mask & 1 == 0 && (mask >> (n - 1)) & 1 == 1 {
                    let c: i128 = arcs
                        .iter()
                        .filter(|&&(u, v, _)| (mask >> u) & 1 == 0 && (mask >> v) & 1 == 1)
                        .map(|a| a.2)
                        .sum();
                    best = best.min(c);
                }
            }
            assert_eq!(f, best);
        }
    }
}
