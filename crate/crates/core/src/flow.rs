//! Integer maximum flow (Dinic's algorithm).

use std::collections::VecDeque;

#[derive(Clone, Debug)]
struct Edge {
    to: usize,
    cap: u64,
}

#[derive(Clone, Debug)]
pub struct FlowNetwork {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
    original: Vec<u64>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork {
            edges: Vec::new(),
            adj: vec![Vec::new(); nodes],
            original: Vec::new(),
        }
    }

    /// Adds a directed edge and returns its id.
    pub fn add_edge(&mut self, from: usize, to: usize, cap: u64) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { to, cap });
        self.edges.push(Edge { to: from, cap: 0 });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        self.original.push(cap);
        id
    }

    /// Flow currently routed through edge `id`.
    pub fn flow(&self, id: usize) -> u64 {
        self.original[id / 2] - self.edges[id].cap
    }

    pub fn max_flow(&mut self, source: usize, sink: usize) -> u64 {
        let mut total = 0;
        while let Some(level) = self.levels(source, sink) {
            let mut next = vec![0usize; self.adj.len()];
            loop {
                let pushed = self.augment(source, sink, u64::MAX, &level, &mut next);
                if pushed == 0 {
                    break;
                }
                total += pushed;
            }
        }
        total
    }

    fn levels(&self, source: usize, sink: usize) -> Option<Vec<usize>> {
        let mut level = vec![usize::MAX; self.adj.len()];
        level[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            for &id in &self.adj[v] {
                let e = &self.edges[id];
                if e.cap > 0 && level[e.to] == usize::MAX {
                    level[e.to] = level[v] + 1;
                    queue.push_back(e.to);
                }
            }
        }
        (level[sink] != usize::MAX).then_some(level)
    }

    fn augment(&mut self, v: usize, sink: usize, limit: u64, level: &[usize], next: &mut [usize]) -> u64 {
        if v == sink {
            return limit;
        }
        while next[v] < self.adj[v].len() {
            let id = self.adj[v][next[v]];
            let Edge { to, cap } = self.edges[id];
            if cap > 0 && level[to] == level[v] + 1 {
                let pushed = self.augment(to, sink, limit.min(cap), level, next);
                if pushed > 0 {
                    self.edges[id].cap -= pushed;
                    self.edges[id ^ 1].cap += pushed;
                    return pushed;
                }
            }
            next[v] += 1;
        }
        0
    }
}
