//! Enhanced Kauffman states and the bigraded Khovanov complex.
//!
//! Markers are stored as a bit word over crossings (bit x set = B-smoothing,
//! written −), circle signs as a bit word over circles (bit set = −).

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::diagram::FramedLinkDiagram;
use crate::intlinalg::{homology_at, HomologySummary, IntMatrix, LinalgError};
use crate::polyoracle::{LaurentPoly, Variable};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KhovanovError {
    #[error("state space of {required} exceeds the cap {cap}")]
    CapExceeded { required: u128, cap: u128 },
    #[error("d^2 != 0: {from} reaches {to} with coefficient {value}")]
    DSquared {
        from: EnhancedState,
        to: EnhancedState,
        value: i64,
    },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EnhancedState {
    pub markers: u64,
    pub signs: u64,
}

impl EnhancedState {
    /// true for an A-marker (+).
    pub fn is_a(&self, x: usize) -> bool {
        self.markers >> x & 1 == 0
    }

    /// true for a plus circle.
    pub fn is_plus(&self, circle: usize) -> bool {
        self.signs >> circle & 1 == 0
    }

    pub fn b_count(&self) -> u32 {
        self.markers.count_ones()
    }
}

impl std::fmt::Display for EnhancedState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "markers={:#b} signs={:#b}", self.markers, self.signs)
    }
}

/// The circles of one Kauffman state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resolution {
    /// Circle index of every arc. Arc circles are numbered by their smallest arc.
    pub circle_of_arc: Vec<u32>,
    /// Smallest arc of each arc circle.
    pub reps: Vec<usize>,
    /// Crossing-free loops, numbered after the arc circles.
    pub free: usize,
}

impl Resolution {
    pub fn circles(&self) -> usize {
        self.reps.len() + self.free
    }

    pub fn arc_circles(&self) -> usize {
        self.reps.len()
    }
}

pub fn resolve(d: &FramedLinkDiagram, markers: u64) -> Resolution {
    let n = d.arcs().len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(p: &mut [usize], mut a: usize) -> usize {
        while p[a] != a {
            p[a] = p[p[a]];
            a = p[a];
        }
        a
    }
    for x in 0..d.crossing_count() {
        let [a, b, c, dd] = d.slot_arcs(x);
        let pairs = if markers >> x & 1 == 0 {
            [(a, b), (c, dd)]
        } else {
            [(a, dd), (b, c)]
        };
        for (p, q) in pairs {
            let (rp, rq) = (root(&mut parent, p), root(&mut parent, q));
            if rp != rq {
                // keep the smaller index as root so circles are numbered by min arc
                if rp < rq {
                    parent[rq] = rp;
                } else {
                    parent[rp] = rq;
                }
            }
        }
    }
    let mut circle_of_arc = vec![0u32; n];
    let mut reps = Vec::new();
    let mut id_of_root = vec![u32::MAX; n];
    for a in 0..n {
        let r = root(&mut parent, a);
        if id_of_root[r] == u32::MAX {
            id_of_root[r] = reps.len() as u32;
            reps.push(a);
        }
        circle_of_arc[a] = id_of_root[r];
    }
    Resolution {
        circle_of_arc,
        reps,
        free: d.free_loop_total(),
    }
}

fn reverse_bits(w: u64, width: usize) -> u64 {
    if width == 0 {
        0
    } else {
        w.reverse_bits() >> (64 - width)
    }
}

#[derive(Debug, Clone)]
pub struct KhovanovComplex {
    crossings: usize,
    n_pos: usize,
    n_neg: usize,
    resolutions: Vec<Resolution>,
    blocks: BTreeMap<(i64, i64), Vec<EnhancedState>>,
    index: HashMap<EnhancedState, usize>,
    diffs: BTreeMap<(i64, i64), IntMatrix>,
}

/// Enumerated states with their gradings, without the differential.
pub fn enumerate_states(
    d: &FramedLinkDiagram,
    cap: u128,
) -> Result<Vec<(EnhancedState, i64, i64)>, KhovanovError> {
    let kc = KhovanovComplex::states_only(d, cap)?;
    let mut out = Vec::new();
    let c = kc.crossings;
    for lex in 0..(1u64 << c) {
        let m = reverse_bits(lex, c);
        let k = kc.resolutions[m as usize].circles();
        for sl in 0..(1u64 << k) {
            let st = EnhancedState {
                markers: m,
                signs: reverse_bits(sl, k),
            };
            let (i, j) = kc.gradings(&st);
            out.push((st, i, j));
        }
    }
    Ok(out)
}

impl KhovanovComplex {
    fn states_only(d: &FramedLinkDiagram, cap: u128) -> Result<Self, KhovanovError> {
        let c = d.crossing_count();
        if c >= 64 || (1u128 << c) > cap {
            return Err(KhovanovError::CapExceeded {
                required: if c >= 127 { u128::MAX } else { 1u128 << c },
                cap,
            });
        }
        let resolutions: Vec<Resolution> = (0..(1u64 << c)).map(|m| resolve(d, m)).collect();
        let total: u128 = resolutions.iter().map(|r| 1u128 << r.circles()).sum();
        if total > cap {
            return Err(KhovanovError::CapExceeded { required: total, cap });
        }
        let mut kc = KhovanovComplex {
            crossings: c,
            n_pos: d.positive_count(),
            n_neg: d.negative_count(),
            resolutions,
            blocks: BTreeMap::new(),
            index: HashMap::new(),
            diffs: BTreeMap::new(),
        };
        for lex in 0..(1u64 << c) {
            let m = reverse_bits(lex, c);
            let k = kc.resolutions[m as usize].circles();
            for sl in 0..(1u64 << k) {
                let st = EnhancedState {
                    markers: m,
                    signs: reverse_bits(sl, k),
                };
                let g = kc.gradings(&st);
                let block = kc.blocks.entry(g).or_default();
                kc.index.insert(st, block.len());
                block.push(st);
            }
        }
        Ok(kc)
    }

    pub fn build(d: &FramedLinkDiagram, cap: u128) -> Result<Self, KhovanovError> {
        let mut kc = Self::states_only(d, cap)?;
        let c = kc.crossings;
        let mut triplets: BTreeMap<(i64, i64), Vec<(usize, usize, i64)>> = BTreeMap::new();
        for m in 0..(1u64 << c) {
            let r1 = &kc.resolutions[m as usize];
            let k1 = r1.circles();
            for x in 0..c {
                if m >> x & 1 == 1 {
                    continue;
                }
                let m2 = m | 1 << x;
                let r2 = &kc.resolutions[m2 as usize];
                let sign: i64 = if (m & ((1u64 << x) - 1)).count_ones() % 2 == 0 { 1 } else { -1 };
                let [a, b, cc, _] = d.slot_arcs(x);
                let ca = r1.circle_of_arc[a] as usize;
                let cb = r1.circle_of_arc[cc] as usize;
                let moved: Vec<(usize, usize)> = (0..k1)
                    .filter(|&i| i != ca && i != cb)
                    .map(|i| {
                        let j = if i < r1.arc_circles() {
                            r2.circle_of_arc[r1.reps[i]] as usize
                        } else {
                            i - r1.arc_circles() + r2.arc_circles()
                        };
                        (i, j)
                    })
                    .collect();
                let n1 = r2.circle_of_arc[a] as usize;
                let n2 = r2.circle_of_arc[b] as usize;
                for sl in 0..(1u64 << k1) {
                    let mut base = 0u64;
                    for &(i, j) in &moved {
                        base |= (sl >> i & 1) << j;
                    }
                    let from = EnhancedState { markers: m, signs: sl };
                    let (gi, gj) = kc.gradings(&from);
                    let col = kc.index[&from];
                    let mut push = |signs: u64| {
                        let to = EnhancedState { markers: m2, signs };
                        let row = kc.index[&to];
                        triplets.entry((gi, gj)).or_default().push((row, col, sign));
                    };
                    if ca != cb {
                        let (sa, sb) = (sl >> ca & 1, sl >> cb & 1);
                        if sa == 1 && sb == 1 {
                            continue;
                        }
                        push(base | (sa | sb) << n1);
                    } else if sl >> ca & 1 == 0 {
                        push(base | 1 << n2);
                        push(base | 1 << n1);
                    } else {
                        push(base | 1 << n1 | 1 << n2);
                    }
                }
            }
        }
        for (&(i, j), block) in &kc.blocks {
            let rows = kc.blocks.get(&(i + 1, j)).map_or(0, Vec::len);
            let t = triplets.remove(&(i, j)).unwrap_or_default();
            kc.diffs.insert((i, j), IntMatrix::from_triplets(rows, block.len(), t));
        }
        Ok(kc)
    }

    pub fn crossings(&self) -> usize {
        self.crossings
    }

    pub fn n_pos(&self) -> usize {
        self.n_pos
    }

    pub fn n_neg(&self) -> usize {
        self.n_neg
    }

    pub fn resolution(&self, markers: u64) -> &Resolution {
        &self.resolutions[markers as usize]
    }

    pub fn gradings(&self, s: &EnhancedState) -> (i64, i64) {
        let k = self.resolutions[s.markers as usize].circles() as i64;
        let tau = k - 2 * i64::from(s.signs.count_ones());
        let r = i64::from(s.markers.count_ones());
        let (np, nn) = (self.n_pos as i64, self.n_neg as i64);
        (r - nn, tau + r + np - 2 * nn)
    }

    pub fn blocks(&self) -> &BTreeMap<(i64, i64), Vec<EnhancedState>> {
        &self.blocks
    }

    pub fn block(&self, i: i64, j: i64) -> &[EnhancedState] {
        self.blocks.get(&(i, j)).map_or(&[], Vec::as_slice)
    }

    /// Position of a state inside its (i, j) block.
    pub fn locate(&self, s: &EnhancedState) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn total_states(&self) -> usize {
        self.index.len()
    }

    /// d^{i,j}: C^{i,j} → C^{i+1,j}.
    pub fn differential(&self, i: i64, j: i64) -> IntMatrix {
        self.diffs.get(&(i, j)).cloned().unwrap_or_else(|| {
            IntMatrix::zeros(self.block(i + 1, j).len(), self.block(i, j).len())
        })
    }

    pub fn check_d_squared(&self) -> Result<(), KhovanovError> {
        for &(i, j) in self.blocks.keys() {
            let sq = self.differential(i + 1, j).mul(&self.differential(i, j));
            if let Some((r, c, v)) = sq.first_nonzero() {
                return Err(KhovanovError::DSquared {
                    from: self.block(i, j)[c],
                    to: self.block(i + 2, j)[r],
                    value: v,
                });
            }
        }
        Ok(())
    }
}

pub fn differential(d: &FramedLinkDiagram, cap: u128) -> Result<KhovanovComplex, KhovanovError> {
    let kc = KhovanovComplex::build(d, cap)?;
    kc.check_d_squared()?;
    Ok(kc)
}

/// Σ (−1)^i q^j rk C^{i,j}.
pub fn graded_euler(kc: &KhovanovComplex) -> LaurentPoly {
    LaurentPoly::from_terms(
        Variable::Q,
        kc.blocks.iter().map(|(&(i, j), b)| {
            let s = if i.rem_euclid(2) == 0 { 1 } else { -1 };
            (j, s * b.len() as i64)
        }),
    )
}

/// Homology of every (i, j) block; zero groups are omitted.
pub fn homology(kc: &KhovanovComplex) -> Result<BTreeMap<(i64, i64), HomologySummary>, KhovanovError> {
    let mut out = BTreeMap::new();
    for &(i, j) in kc.blocks.keys() {
        let h = homology_at(&kc.differential(i, j), &kc.differential(i - 1, j))?;
        if !h.is_zero() {
            out.insert((i, j), h);
        }
    }
    Ok(out)
}
