//! k-pairings of neighbouring strands, the graph of pairings and its signed
//! incidence complex.

use std::collections::HashMap;

use thiserror::Error;

use crate::diagram::ColorTuple;
use crate::intlinalg::IntMatrix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PairingError {
    #[error("k = {k:?} out of range for colors {n:?}")]
    OutOfRange { n: Vec<u32>, k: Vec<u32> },
    #[error("invalid pairing: {0}")]
    Invalid(String),
    #[error("not a cover relation: {0}")]
    NotCover(String),
    #[error("d_n^2 != 0 at k = {k}: pairing {from} reaches {to} with coefficient {value}")]
    NotAComplex {
        k: usize,
        from: String,
        to: String,
        value: i64,
    },
    #[error("sum of colors {total} exceeds the bound {bound}")]
    TooLarge { total: u32, bound: u32 },
}

/// Disjoint neighbour pairs `(t, t+1)` per line, stored by their lower index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pairing {
    lines: Vec<Vec<u32>>,
}

impl Pairing {
    pub fn new(lines: Vec<Vec<u32>>) -> Result<Self, PairingError> {
        let mut lines = lines;
        for (c, line) in lines.iter_mut().enumerate() {
            line.sort_unstable();
            for w in line.windows(2) {
                if w[1] < w[0] + 2 {
                    return Err(PairingError::Invalid(format!(
                        "pairs ({},{}) and ({},{}) on line {} overlap",
                        w[0],
                        w[0] + 1,
                        w[1],
                        w[1] + 1,
                        c + 1
                    )));
                }
            }
            if line.first() == Some(&0) {
                return Err(PairingError::Invalid("strand indices start at 1".into()));
            }
        }
        Ok(Pairing { lines })
    }

    pub fn empty(lines: usize) -> Self {
        Pairing {
            lines: vec![Vec::new(); lines],
        }
    }

    pub fn lines(&self) -> usize {
        self.lines.len()
    }

    /// Lower indices of the pairs on line `c`, ascending.
    pub fn pairs(&self, c: usize) -> &[u32] {
        &self.lines[c]
    }

    pub fn k_vector(&self) -> Vec<u32> {
        self.lines.iter().map(|l| l.len() as u32).collect()
    }

    pub fn size(&self) -> usize {
        self.lines.iter().map(Vec::len).sum()
    }

    pub fn contains(&self, c: usize, t: u32) -> bool {
        self.lines[c].binary_search(&t).is_ok()
    }

    /// Is strand `t` of line `c` covered by some pair?
    pub fn covers(&self, c: usize, t: u32) -> bool {
        self.lines[c].iter().any(|&p| p == t || p + 1 == t)
    }

    pub fn fits(&self, n: &ColorTuple) -> bool {
        self.lines.len() == n.0.len()
            && self
                .lines
                .iter()
                .zip(&n.0)
                .all(|(l, &nc)| l.iter().all(|&t| t < nc))
    }

    /// The unique pair of `bigger` missing from `self`, if `bigger` covers `self`.
    pub fn added_pair(&self, bigger: &Pairing) -> Result<(usize, u32), PairingError> {
        if self.lines.len() != bigger.lines.len() || bigger.size() != self.size() + 1 {
            return Err(PairingError::NotCover(format!("{self} -> {bigger}")));
        }
        let mut added = None;
        for c in 0..self.lines.len() {
            for &t in &self.lines[c] {
                if !bigger.contains(c, t) {
                    return Err(PairingError::NotCover(format!("{self} -> {bigger}")));
                }
            }
            for &t in &bigger.lines[c] {
                if !self.contains(c, t) {
                    added = Some((c, t));
                }
            }
        }
        added.ok_or_else(|| PairingError::NotCover(format!("{self} -> {bigger}")))
    }
}

impl std::fmt::Display for Pairing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .lines
            .iter()
            .map(|l| {
                let ps: Vec<String> = l.iter().map(|t| format!("({},{})", t, t + 1)).collect();
                format!("[{}]", ps.join(""))
            })
            .collect();
        write!(f, "{}", parts.join(""))
    }
}

/// Which lines count as "above" a given line in the sign (s, s').
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LineOrder {
    /// Lines with a smaller component index are above.
    #[default]
    SmallerAbove,
    LargerAbove,
}

fn line_choices(n: u32, k: u32) -> Vec<Vec<u32>> {
    fn go(start: u32, n: u32, k: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if k == 0 {
            out.push(cur.clone());
            return;
        }
        let mut t = start;
        // the remaining k - 1 pairs need 2(k-1) strands after t+1
        while t + 1 + 2 * (k - 1) <= n {
            cur.push(t);
            go(t + 2, n, k - 1, cur, out);
            cur.pop();
            t += 1;
        }
    }
    let mut out = Vec::new();
    go(1, n, k, &mut Vec::new(), &mut out);
    out
}

/// All pairings with exactly `k[c]` pairs on line `c`, lexicographic.
pub fn enumerate_pairings(n: &ColorTuple, k: &[u32]) -> Result<Vec<Pairing>, PairingError> {
    if k.len() != n.0.len() || k.iter().zip(&n.0).any(|(&ki, &ni)| 2 * ki > ni) {
        return Err(PairingError::OutOfRange {
            n: n.0.clone(),
            k: k.to_vec(),
        });
    }
    let mut acc: Vec<Vec<Vec<u32>>> = vec![Vec::new()];
    for (&ni, &ki) in n.0.iter().zip(k) {
        let choices = line_choices(ni, ki);
        let mut next = Vec::with_capacity(acc.len() * choices.len());
        for prefix in &acc {
            for ch in &choices {
                let mut p = prefix.clone();
                p.push(ch.clone());
                next.push(p);
            }
        }
        acc = next;
    }
    Ok(acc.into_iter().map(|lines| Pairing { lines }).collect())
}

/// All k-vectors with 0 <= k_c <= n_c / 2, lexicographic.
pub fn k_vectors(n: &ColorTuple) -> Vec<Vec<u32>> {
    let mut acc: Vec<Vec<u32>> = vec![Vec::new()];
    for &ni in &n.0 {
        let mut next = Vec::new();
        for prefix in &acc {
            for ki in 0..=ni / 2 {
                let mut p = prefix.clone();
                p.push(ki);
                next.push(p);
            }
        }
        acc = next;
    }
    acc
}

/// Pairings grouped by their total number of pairs; lexicographic inside a level.
pub fn pairings_by_level(n: &ColorTuple) -> Vec<Vec<Pairing>> {
    let max: usize = n.0.iter().map(|&ni| (ni / 2) as usize).sum();
    let mut levels = vec![Vec::new(); max + 1];
    for k in k_vectors(n) {
        let size: u32 = k.iter().sum();
        levels[size as usize].extend(enumerate_pairings(n, &k).expect("k in range"));
    }
    for l in &mut levels {
        l.sort();
    }
    levels
}

/// (-1)^{(s, s')}: parity of the pairs of `s2` to the right of the new pair on
/// its line plus all pairs of `s2` on lines above it.
pub fn pairing_sign(s: &Pairing, s2: &Pairing, order: LineOrder) -> Result<i64, PairingError> {
    let (c, t) = s.added_pair(s2)?;
    let right = s2.lines[c].iter().filter(|&&p| p > t).count();
    let above: usize = s2
        .lines
        .iter()
        .enumerate()
        .filter(|&(c2, _)| match order {
            LineOrder::SmallerAbove => c2 < c,
            LineOrder::LargerAbove => c2 > c,
        })
        .map(|(_, l)| l.len())
        .sum();
    Ok(if (right + above) % 2 == 0 { 1 } else { -1 })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairingEdge {
    /// Level of the source pairing.
    pub level: usize,
    pub from: usize,
    pub to: usize,
    pub sign: i64,
    /// Line and lower strand index of the added pair.
    pub line: usize,
    pub pair: u32,
}

#[derive(Debug, Clone)]
pub struct PairingGraph {
    pub colors: ColorTuple,
    pub order: LineOrder,
    pub levels: Vec<Vec<Pairing>>,
    pub edges: Vec<PairingEdge>,
}

impl PairingGraph {
    pub fn new(n: &ColorTuple, order: LineOrder) -> Self {
        let levels = pairings_by_level(n);
        let mut edges = Vec::new();
        for k in 0..levels.len().saturating_sub(1) {
            let index: HashMap<&Pairing, usize> =
                levels[k + 1].iter().enumerate().map(|(i, p)| (p, i)).collect();
            for (i, s) in levels[k].iter().enumerate() {
                for (c, &nc) in n.0.iter().enumerate() {
                    for t in 1..nc {
                        if s.covers(c, t) || s.covers(c, t + 1) {
                            continue;
                        }
                        let mut lines = s.lines.clone();
                        lines[c].push(t);
                        lines[c].sort_unstable();
                        let s2 = Pairing { lines };
                        let j = index[&s2];
                        let sign = pairing_sign(s, &s2, order).expect("cover relation");
                        edges.push(PairingEdge {
                            level: k,
                            from: i,
                            to: j,
                            sign,
                            line: c,
                            pair: t,
                        });
                    }
                }
            }
        }
        PairingGraph {
            colors: n.clone(),
            order,
            levels,
            edges,
        }
    }

    /// Signed incidence matrix F^k -> F^{k+1}, rows indexed by level k + 1.
    pub fn differential(&self, k: usize) -> IntMatrix {
        let rows = self.levels.get(k + 1).map_or(0, Vec::len);
        let cols = self.levels.get(k).map_or(0, Vec::len);
        IntMatrix::from_triplets(
            rows,
            cols,
            self.edges
                .iter()
                .filter(|e| e.level == k)
                .map(|e| (e.to, e.from, e.sign)),
        )
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }

    /// Debug dump: adjacency with signs.
    pub fn to_json(&self) -> serde_json::Value {
        let levels: Vec<Vec<String>> = self
            .levels
            .iter()
            .map(|l| l.iter().map(|p| p.to_string()).collect())
            .collect();
        let edges: Vec<serde_json::Value> = self
            .edges
            .iter()
            .map(|e| {
                serde_json::json!({
                    "from": self.levels[e.level][e.from].to_string(),
                    "to": self.levels[e.level + 1][e.to].to_string(),
                    "sign": e.sign,
                })
            })
            .collect();
        serde_json::json!({ "colors": self.colors.0, "levels": levels, "edges": edges })
    }
}

pub const DEFAULT_PAIRING_BOUND: u32 = 12;

/// Γ_n with d_n^{k+1} d_n^k = 0 checked on every level.
pub fn pairing_complex(
    n: &ColorTuple,
    order: LineOrder,
    bound: u32,
) -> Result<PairingGraph, PairingError> {
    if n.total() > bound {
        return Err(PairingError::TooLarge {
            total: n.total(),
            bound,
        });
    }
    let g = PairingGraph::new(n, order);
    for k in 0..g.levels.len().saturating_sub(2) {
        let sq = g.differential(k + 1).mul(&g.differential(k));
        if let Some((r, c, v)) = sq.first_nonzero() {
            return Err(PairingError::NotAComplex {
                k,
                from: g.levels[k][c].to_string(),
                to: g.levels[k + 2][r].to_string(),
                value: v,
            });
        }
    }
    Ok(g)
}
