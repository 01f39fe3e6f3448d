//! Exact max-flow on the pixel grid using search trees grown from both
//! terminals (the Boykov-Kolmogorov scheme). Adjacency is implicit: every
//! node has up to four spatial neighbors plus two temporal ones, so no
//! edge lists are stored.

use std::collections::VecDeque;

/// Directions to a node's potential neighbors. Opposite direction is d ^ 1.
const DIR_COUNT: usize = 6;
const LEFT: usize = 0;
const UP: usize = 2;
const PREV: usize = 4;

const FREE: u8 = 0;
const SOURCE: u8 = 1;
const SINK: u8 = 2;

/// parent[] sentinel values beyond the six real directions.
const DIR_TERMINAL: u8 = 6;
const DIR_NONE: u8 = 7;

pub(crate) struct GridFlowResult {
    /// true = node stays reachable from the source in the residual graph.
    pub labels: Vec<bool>,
    pub max_flow: f64,
}

/// Solves max-flow on an h×w×frames grid. `term[v] > 0` is residual
/// capacity source→v, `term[v] < 0` is residual capacity v→sink (negated);
/// every grid edge starts at `neighbor_cap` in both directions.
pub(crate) fn solve_grid(
    height: usize,
    width: usize,
    frames: usize,
    term: Vec<f64>,
    neighbor_cap: f64,
) -> GridFlowResult {
    let mut g = GridFlow::new(height, width, frames, term, neighbor_cap);
    let max_flow = g.run();
    GridFlowResult { labels: g.source_side(), max_flow }
}

struct GridFlow {
    height: usize,
    width: usize,
    plane: usize,
    term: Vec<f64>,
    nbr: Vec<[f64; DIR_COUNT]>,
    tree: Vec<u8>,
    parent: Vec<u8>,
    ts: Vec<u32>,
    dist: Vec<u32>,
    active: VecDeque<u32>,
    in_active: Vec<bool>,
    orphans: VecDeque<u32>,
    time: u32,
    flow: f64,
}

impl GridFlow {
    fn new(height: usize, width: usize, frames: usize, term: Vec<f64>, neighbor_cap: f64) -> Self {
        let plane = height * width;
        let n = plane * frames;
        assert_eq!(term.len(), n);
        let mut g = GridFlow {
            height,
            width,
            plane,
            term,
            nbr: vec![[0.0; DIR_COUNT]; n],
            tree: vec![FREE; n],
            parent: vec![DIR_NONE; n],
            ts: vec![0; n],
            dist: vec![0; n],
            active: VecDeque::new(),
            in_active: vec![false; n],
            orphans: VecDeque::new(),
            time: 0,
            flow: 0.0,
        };
        for v in 0..n {
            for d in 0..DIR_COUNT {
                if g.neighbor(v, d).is_some() {
                    g.nbr[v][d] = neighbor_cap;
                }
            }
            if g.term[v] > 0.0 {
                g.tree[v] = SOURCE;
                g.parent[v] = DIR_TERMINAL;
                g.dist[v] = 1;
                g.activate(v);
            } else if g.term[v] < 0.0 {
                g.tree[v] = SINK;
                g.parent[v] = DIR_TERMINAL;
                g.dist[v] = 1;
                g.activate(v);
            }
        }
        g
    }

    #[inline]
    fn neighbor(&self, v: usize, d: usize) -> Option<usize> {
        let rem = v % self.plane;
        match d {
            LEFT => (rem % self.width > 0).then(|| v - 1),
            1 => (rem % self.width + 1 < self.width).then(|| v + 1),
            UP => (rem / self.width > 0).then(|| v - self.width),
            3 => (rem / self.width + 1 < self.height).then(|| v + self.width),
            PREV => (v >= self.plane).then(|| v - self.plane),
            _ => (v + self.plane < self.term.len()).then(|| v + self.plane),
        }
    }

    #[inline]
    fn activate(&mut self, v: usize) {
        if !self.in_active[v] {
            self.in_active[v] = true;
            self.active.push_back(v as u32);
        }
    }

    fn run(&mut self) -> f64 {
        while let Some((u, d, v)) = self.grow() {
            self.time += 1;
            self.augment(u, d, v);
            self.adopt();
        }
        self.flow
    }

    /// Grows both trees until an arc connecting them is found; returns the
    /// bridge oriented source-tree → sink-tree.
    fn grow(&mut self) -> Option<(usize, usize, usize)> {
        while let Some(p) = self.active.pop_front() {
            let p = p as usize;
            self.in_active[p] = false;
            let tp = self.tree[p];
            if tp == FREE {
                continue;
            }
            for d in 0..DIR_COUNT {
                let Some(q) = self.neighbor(p, d) else { continue };
                // Arc must run source-ward → sink-ward for the owning tree.
                let res = if tp == SOURCE { self.nbr[p][d] } else { self.nbr[q][d ^ 1] };
                if res <= 0.0 {
                    continue;
                }
                if self.tree[q] == FREE {
                    self.tree[q] = tp;
                    self.parent[q] = (d ^ 1) as u8;
                    self.ts[q] = self.ts[p];
                    self.dist[q] = self.dist[p] + 1;
                    self.activate(q);
                } else if self.tree[q] != tp {
                    // p has unscanned arcs left; revisit it later.
                    self.activate(p);
                    return Some(if tp == SOURCE { (p, d, q) } else { (q, d ^ 1, p) });
                }
            }
        }
        None
    }

    fn augment(&mut self, u: usize, bridge: usize, v: usize) {
        // Bottleneck over bridge, both tree paths, and both terminal arcs.
        let mut bottleneck = self.nbr[u][bridge];
        let mut p = u;
        loop {
            let pd = self.parent[p];
            if pd == DIR_TERMINAL {
                bottleneck = bottleneck.min(self.term[p]);
                break;
            }
            let q = self.neighbor(p, pd as usize).expect("parent arc exists");
            bottleneck = bottleneck.min(self.nbr[q][pd as usize ^ 1]);
            p = q;
        }
        let mut p = v;
        loop {
            let pd = self.parent[p];
            if pd == DIR_TERMINAL {
                bottleneck = bottleneck.min(-self.term[p]);
                break;
            }
            bottleneck = bottleneck.min(self.nbr[p][pd as usize]);
            p = self.neighbor(p, pd as usize).expect("parent arc exists");
        }

        self.nbr[u][bridge] -= bottleneck;
        self.nbr[v][bridge ^ 1] += bottleneck;

        // Push along the source tree; children whose parent arc saturates
        // become orphans.
        let mut p = u;
        loop {
            let pd = self.parent[p];
            if pd == DIR_TERMINAL {
                self.term[p] -= bottleneck;
                if self.term[p] <= 0.0 {
                    self.make_orphan(p);
                }
                break;
            }
            let q = self.neighbor(p, pd as usize).expect("parent arc exists");
            self.nbr[p][pd as usize] += bottleneck;
            self.nbr[q][pd as usize ^ 1] -= bottleneck;
            if self.nbr[q][pd as usize ^ 1] <= 0.0 {
                self.make_orphan(p);
            }
            p = q;
        }
        let mut p = v;
        loop {
            let pd = self.parent[p];
            if pd == DIR_TERMINAL {
                self.term[p] += bottleneck;
                if self.term[p] >= 0.0 {
                    self.make_orphan(p);
                }
                break;
            }
            let q = self.neighbor(p, pd as usize).expect("parent arc exists");
            self.nbr[p][pd as usize] -= bottleneck;
            self.nbr[q][pd as usize ^ 1] += bottleneck;
            if self.nbr[p][pd as usize] <= 0.0 {
                self.make_orphan(p);
            }
            p = q;
        }
        self.flow += bottleneck;
    }

    #[inline]
    fn make_orphan(&mut self, p: usize) {
        self.parent[p] = DIR_NONE;
        self.orphans.push_back(p as u32);
    }

    fn adopt(&mut self) {
        while let Some(p) = self.orphans.pop_front() {
            let p = p as usize;
            let tp = self.tree[p];
            // Look for the closest-to-terminal valid parent.
            let mut best: Option<(usize, u32)> = None;
            for d in 0..DIR_COUNT {
                let Some(q) = self.neighbor(p, d) else { continue };
                if self.tree[q] != tp {
                    continue;
                }
                let res = if tp == SOURCE { self.nbr[q][d ^ 1] } else { self.nbr[p][d] };
                if res <= 0.0 {
                    continue;
                }
                if let Some(dq) = self.origin_distance(q) {
                    if best.map_or(true, |(_, bd)| dq + 1 < bd) {
                        best = Some((d, dq + 1));
                    }
                }
            }
            match best {
                Some((d, dist)) => {
                    self.parent[p] = d as u8;
                    self.ts[p] = self.time;
                    self.dist[p] = dist;
                }
                None => {
                    // p leaves the tree: its children become orphans and
                    // same-tree neighbors with a usable arc toward p get
                    // another chance to grow.
                    for d in 0..DIR_COUNT {
                        let Some(q) = self.neighbor(p, d) else { continue };
                        if self.tree[q] != tp {
                            continue;
                        }
                        let res = if tp == SOURCE { self.nbr[q][d ^ 1] } else { self.nbr[p][d] };
                        if res > 0.0 {
                            self.activate(q);
                        }
                        if self.parent[q] == (d ^ 1) as u8 {
                            self.make_orphan(q);
                        }
                    }
                    self.tree[p] = FREE;
                }
            }
        }
    }

    /// Walks q's parent chain; Some(distance) if it ends at a terminal.
    /// Chains verified in the current round are marked so later walks can
    /// stop early.
    fn origin_distance(&mut self, q: usize) -> Option<u32> {
        let mut total = 0u32;
        let mut x = q;
        loop {
            if self.ts[x] == self.time {
                total += self.dist[x];
                break;
            }
            match self.parent[x] {
                DIR_TERMINAL => {
                    total += 1;
                    break;
                }
                DIR_NONE => return None,
                pd => {
                    total += 1;
                    x = self.neighbor(x, pd as usize).expect("parent arc exists");
                }
            }
        }
        let mut x = q;
        let mut rem = total;
        while self.ts[x] != self.time {
            self.ts[x] = self.time;
            self.dist[x] = rem;
            match self.parent[x] {
                DIR_TERMINAL => break,
                pd => {
                    rem -= 1;
                    x = self.neighbor(x, pd as usize).expect("parent arc exists");
                }
            }
        }
        Some(total)
    }

    /// Nodes reachable from the source in the final residual graph. This,
    /// not tree membership, defines the cut: it yields the deterministic
    /// minimal foreground among optimal cuts.
    fn source_side(&self) -> Vec<bool> {
        let n = self.term.len();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        for v in 0..n {
            if self.term[v] > 0.0 {
                seen[v] = true;
                queue.push_back(v);
            }
        }
        while let Some(u) = queue.pop_front() {
            for d in 0..DIR_COUNT {
                if self.nbr[u][d] > 0.0 {
                    if let Some(q) = self.neighbor(u, d) {
                        if !seen[q] {
                            seen[q] = true;
                            queue.push_back(q);
                        }
                    }
                }
            }
        }
        seen
    }
}
