use std::collections::VecDeque;

/// FIFO push-relabel max-flow on real capacities.
///
/// Every push moves either the full excess of a node or the full residual
/// capacity of an arc, so the quantity that hits zero does so exactly and no
/// rounding dust keeps nodes active.
#[derive(Debug, Clone)]
pub struct MaxFlow {
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    residual: Vec<f64>,
    capacity: Vec<f64>,
}

impl MaxFlow {
    pub fn new(n: usize) -> Self {
        Self {
            adj: vec![Vec::new(); n],
            to: Vec::new(),
            residual: Vec::new(),
            capacity: Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    /// Add arc `u -> v`; returns its id.
    pub fn add_edge(&mut self, u: usize, v: usize, cap: f64) -> usize {
        debug_assert!(cap >= 0.0);
        let id = self.to.len();
        self.to.push(v);
        self.residual.push(cap);
        self.capacity.push(cap);
        self.adj[u].push(id);
        self.to.push(u);
        self.residual.push(0.0);
        self.capacity.push(0.0);
        self.adj[v].push(id + 1);
        id
    }

    /// Flow currently on arc `id`.
    pub fn flow(&self, id: usize) -> f64 {
        self.capacity[id] - self.residual[id]
    }

    pub fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let n = self.node_count();
        if s == t {
            return 0.0;
        }
        let mut height = vec![0usize; n];
        let mut excess = vec![0.0f64; n];
        let mut current = vec![0usize; n];
        let mut queued = vec![false; n];
        let mut queue = VecDeque::new();
        height[s] = n;

        for k in 0..self.adj[s].len() {
            let e = self.adj[s][k];
            let d = self.residual[e];
            if d > 0.0 {
                let v = self.to[e];
                self.residual[e] = 0.0;
                self.residual[e ^ 1] += d;
                excess[v] += d;
                excess[s] -= d;
                if v != t && !queued[v] {
                    queued[v] = true;
                    queue.push_back(v);
                }
            }
        }

        while let Some(u) = queue.pop_front() {
            queued[u] = false;
            while excess[u] > 0.0 {
                if current[u] == self.adj[u].len() {
                    // relabel
                    let mut best = usize::MAX;
                    for &e in &self.adj[u] {
                        if self.residual[e] > 0.0 {
                            best = best.min(height[self.to[e]]);
                        }
                    }
                    if best == usize::MAX || best + 1 >= 2 * n {
                        break;
                    }
                    height[u] = best + 1;
                    current[u] = 0;
                    continue;
                }
                let e = self.adj[u][current[u]];
                let v = self.to[e];
                if self.residual[e] > 0.0 && height[u] == height[v] + 1 {
                    let d = if excess[u] < self.residual[e] {
                        excess[u]
                    } else {
                        self.residual[e]
                    };
                    if d == self.residual[e] {
                        self.residual[e] = 0.0;
                    } else {
                        self.residual[e] -= d;
                    }
                    self.residual[e ^ 1] += d;
                    if d == excess[u] {
                        excess[u] = 0.0;
                    } else {
                        excess[u] -= d;
                    }
                    excess[v] += d;
                    if v != s && v != t && !queued[v] {
                        queued[v] = true;
                        queue.push_back(v);
                    }
                } else {
                    current[u] += 1;
                }
            }
        }
        excess[t]
    }

    /// Largest flow-conservation imbalance over nodes other than `s` and `t`,
    /// and the largest capacity violation, after `max_flow`.
    pub fn conservation_error(&self, s: usize, t: usize) -> f64 {
        let mut worst = 0.0f64;
        let mut balance = vec![0.0f64; self.node_count()];
        for e in (0..self.to.len()).step_by(2) {
            let f = self.flow(e);
            worst = worst.max(-f).max(f - self.capacity[e]);
            let v = self.to[e];
            let u = self.to[e + 1];
            balance[u] -= f;
            balance[v] += f;
        }
        for (node, b) in balance.iter().enumerate() {
            if node != s && node != t {
                worst = worst.max(b.abs());
            }
        }
        worst
    }
}
