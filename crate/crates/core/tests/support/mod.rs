//! Brute-force reference implementations shared by the integration tests.
//! Everything here works from a dense adjacency matrix and Floyd–Warshall
//! distances, so it shares no code with the library's BFS routines.
#![allow(dead_code, clippy::needless_range_loop)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const KARATE: [(usize, usize); 78] = [
    (0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (0, 6), (0, 7), (0, 8), (0, 10), (0, 11), (0, 12), (0, 13),
    (0, 17), (0, 19), (0, 21), (0, 31), (1, 2), (1, 3), (1, 7), (1, 13), (1, 17), (1, 19), (1, 21),
    (1, 30), (2, 3), (2, 7), (2, 8), (2, 9), (2, 13), (2, 27), (2, 28), (2, 32), (3, 7), (3, 12),
    (3, 13), (4, 6), (4, 10), (5, 6), (5, 10), (5, 16), (6, 16), (8, 30), (8, 32), (8, 33), (9, 33),
    (13, 33), (14, 32), (14, 33), (15, 32), (15, 33), (18, 32), (18, 33), (19, 33), (20, 32), (20, 33),
    (22, 32), (22, 33), (23, 25), (23, 27), (23, 29), (23, 32), (23, 33), (24, 25), (24, 27), (24, 31),
    (25, 31), (26, 29), (26, 33), (27, 33), (28, 31), (28, 33), (29, 32), (29, 33), (30, 32), (30, 33),
    (31, 32), (31, 33), (32, 33),
];

pub const INF: usize = usize::MAX / 4;

pub struct Dense {
    pub n: usize,
    pub adj: Vec<Vec<bool>>,
    pub dist: Vec<Vec<usize>>,
}

impl Dense {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![vec![false; n]; n];
        for &(a, b) in edges {
            if a != b {
                adj[a][b] = true;
                adj[b][a] = true;
            }
        }
        let mut dist = vec![vec![INF; n]; n];
        for i in 0..n {
            dist[i][i] = 0;
            for j in 0..n {
                if adj[i][j] {
                    dist[i][j] = 1;
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = dist[i][k] + dist[k][j];
                    if via < dist[i][j] {
                        dist[i][j] = via;
                    }
                }
            }
        }
        Self { n, adj, dist }
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].iter().filter(|&&x| x).count()
    }

    fn pair_norm(&self) -> f64 {
        let n = self.n as f64;
        if self.n < 3 {
            0.0
        } else {
            2.0 / ((n - 1.0) * (n - 2.0))
        }
    }

    pub fn degree_centrality(&self) -> Vec<f64> {
        (0..self.n).map(|v| self.degree(v) as f64 / (self.n - 1) as f64).collect()
    }

    /// Lists every shortest path between `s` and `t` explicitly.
    pub fn shortest_paths(&self, s: usize, t: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        if self.dist[s][t] >= INF {
            return out;
        }
        let mut path = vec![s];
        self.extend(t, &mut path, &mut out);
        out
    }

    fn extend(&self, t: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let u = *path.last().unwrap();
        if u == t {
            out.push(path.clone());
            return;
        }
        for w in 0..self.n {
            if self.adj[u][w] && self.dist[w][t] + 1 == self.dist[u][t] {
                path.push(w);
                self.extend(t, path, out);
                path.pop();
            }
        }
    }

    pub fn betweenness(&self) -> Vec<f64> {
        let mut bc = vec![0.0; self.n];
        for s in 0..self.n {
            for t in s + 1..self.n {
                let paths = self.shortest_paths(s, t);
                if paths.is_empty() {
                    continue;
                }
                let total = paths.len() as f64;
                for p in &paths {
                    for &v in &p[1..p.len() - 1] {
                        bc[v] += 1.0 / total;
                    }
                }
            }
        }
        let norm = self.pair_norm();
        bc.into_iter().map(|x| x * norm).collect()
    }

    /// Routes one unit for every ordered pair hop by hop, splitting equally
    /// among neighbours one step closer to the target.
    pub fn load(&self) -> Vec<f64> {
        let mut load = vec![0.0; self.n];
        for s in 0..self.n {
            for t in 0..self.n {
                if s == t || self.dist[s][t] >= INF {
                    continue;
                }
                let mut flow = vec![0.0; self.n];
                flow[s] = 1.0;
                for d in (1..=self.dist[s][t]).rev() {
                    for u in 0..self.n {
                        if self.dist[u][t] != d || flow[u] == 0.0 {
                            continue;
                        }
                        let next: Vec<usize> =
                            (0..self.n).filter(|&w| self.adj[u][w] && self.dist[w][t] + 1 == d).collect();
                        for &w in &next {
                            flow[w] += flow[u] / next.len() as f64;
                        }
                    }
                }
                for v in 0..self.n {
                    if v != s && v != t {
                        load[v] += flow[v];
                    }
                }
            }
        }
        let norm = self.pair_norm() * 0.5;
        load.into_iter().map(|x| x * norm).collect()
    }

    pub fn closeness(&self) -> Vec<f64> {
        (0..self.n)
            .map(|v| {
                let reach: Vec<usize> = (0..self.n)
                    .filter(|&u| u != v && self.dist[v][u] < INF)
                    .map(|u| self.dist[v][u])
                    .collect();
                if reach.is_empty() {
                    return 0.0;
                }
                let r = reach.len() as f64;
                let total: usize = reach.iter().sum();
                (r / (self.n - 1) as f64) * (r / total as f64)
            })
            .collect()
    }

    /// Dense power iteration on the full transition matrix, run to a
    /// residual far below the library's tolerance.
    pub fn pagerank(&self, damping: f64) -> Vec<f64> {
        let n = self.n;
        let nf = n as f64;
        let mut m = vec![vec![0.0; n]; n];
        for u in 0..n {
            let d = self.degree(u);
            for v in 0..n {
                m[u][v] = if d == 0 {
                    1.0 / nf
                } else if self.adj[u][v] {
                    1.0 / d as f64
                } else {
                    0.0
                };
            }
        }
        let mut x = vec![1.0 / nf; n];
        for _ in 0..100_000 {
            let next: Vec<f64> = (0..n)
                .map(|v| (1.0 - damping) / nf + damping * (0..n).map(|u| x[u] * m[u][v]).sum::<f64>())
                .collect();
            let diff: f64 = x.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
            x = next;
            if diff < 1e-15 {
                break;
            }
        }
        x
    }

    pub fn at_distance_two(&self, v: usize) -> Vec<usize> {
        (0..self.n).filter(|&u| self.dist[v][u] == 2).collect()
    }
}

/// Random connected graph: a random spanning tree plus extra edges with
/// probability `extra`, under a random relabelling.
pub fn random_connected(rng: &mut ChaCha8Rng, n: usize, extra: f64) -> Vec<(usize, usize)> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut edges = Vec::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        edges.push((perm[i], perm[j]));
    }
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(extra) {
                edges.push((a, b));
            }
        }
    }
    edges
}

pub fn random_tree(rng: &mut ChaCha8Rng, n: usize) -> Vec<(usize, usize)> {
    random_connected(rng, n, 0.0)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cycle(n: usize) -> Vec<(usize, usize)> {
    (0..n).map(|i| (i, (i + 1) % n)).collect()
}

pub fn complete(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect()
}

pub fn hypercube(dim: u32) -> Vec<(usize, usize)> {
    let n = 1usize << dim;
    (0..n)
        .flat_map(|v| (0..dim).map(move |b| (v, v ^ (1 << b))))
        .filter(|(a, b)| a < b)
        .collect()
}

pub fn petersen() -> Vec<(usize, usize)> {
    let mut e = Vec::new();
    for i in 0..5 {
        e.push((i, (i + 1) % 5));
        e.push((i, i + 5));
        e.push((5 + i, 5 + (i + 2) % 5));
    }
    e
}

/// Two K5s (nodes 0..5 and 5..10) joined by the edge 4–5.
pub fn two_cliques() -> Vec<(usize, usize)> {
    let mut e = Vec::new();
    for base in [0, 5] {
        for a in 0..5 {
            for b in a + 1..5 {
                e.push((base + a, base + b));
            }
        }
    }
    e.push((4, 5));
    e
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// Karate-club members who joined the officer's faction after the split.
pub const KARATE_OFFICER: [usize; 17] = [9, 14, 15, 18, 20, 22, 23, 24, 25, 26, 27, 28, 29, 30, 31, 32, 33];

/// Writes the karate club as `<dir>/karate.cites` and `<dir>/karate.content`.
pub fn write_karate(dir: &std::path::Path) -> (std::path::PathBuf, std::path::PathBuf) {
    use std::fmt::Write as _;
    let mut edges = String::new();
    for (a, b) in KARATE {
        writeln!(edges, "{a}\t{b}").unwrap();
    }
    let mut labels = String::new();
    for v in 0..34 {
        let club = if KARATE_OFFICER.contains(&v) { "officer" } else { "hi" };
        writeln!(labels, "{v}\t{club}").unwrap();
    }
    let e = dir.join("karate.cites");
    let l = dir.join("karate.content");
    std::fs::write(&e, edges).unwrap();
    std::fs::write(&l, labels).unwrap();
    (e, l)
}
