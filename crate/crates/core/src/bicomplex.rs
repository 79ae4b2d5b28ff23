//! Annulus chain maps between the Khovanov complexes of neighbouring pairing
//! subcables, the bicomplex (d′, d″) they assemble into, and its checks.
//!
//! For an edge s → s′ of the pairing graph the new pair (t, t+1) of line c is
//! the pair of contracted strands. Every crossing of D^s touching a contracted
//! strand gets the oriented smoothing as its forced marker (A on positive, B on
//! negative crossings). When both strands at each such crossing are contracted
//! this closes the contracted strands into circles disjoint from the rest, and
//! the remaining circles are exactly the circles of D^{s′}.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::diagram::{
    cable_with, subcable, CableDiagram, ColorTuple, CrossingTag, DiagramError, FramedLinkDiagram,
    Strand, StrandOrder,
};
use crate::intlinalg::{homology_at, HomologySummary, IntMatrix, LinalgError};
use crate::khovanov::{EnhancedState, KhovanovComplex, KhovanovError};
use crate::pairing::{LineOrder, Pairing, PairingError, PairingGraph};
use crate::polyoracle::{LaurentPoly, Variable};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BicomplexError {
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Khovanov(#[from] KhovanovError),
    #[error(transparent)]
    Pairing(#[from] PairingError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("convention error on edge {edge}: {detail}")]
    Convention { edge: String, detail: String },
    #[error("grading shift on edge {edge}: state {state} has i = {i_from}, its image has i = {i_to}")]
    GradingShift {
        edge: String,
        state: EnhancedState,
        i_from: i64,
        i_to: i64,
    },
    #[error("state space of {required} exceeds the cap {cap}")]
    CapExceeded { required: u128, cap: u128 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CrossingKind {
    /// One contracted strand, the other strand crosses the band left to right.
    A1,
    /// One contracted strand, the other strand crosses the band right to left.
    A2,
    /// Both strands contracted.
    B,
}

/// Which crossing direction is called (a-1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AReading {
    #[default]
    LeftToRight,
    RightToLeft,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForcedCrossing {
    /// Crossing index in D^s.
    pub crossing: usize,
    pub tag: CrossingTag,
    pub kind: CrossingKind,
    /// true if the forced marker is B (−).
    pub b_marker: bool,
}

#[derive(Debug, Clone)]
pub struct ContractionContext {
    pub source: Pairing,
    pub target: Pairing,
    pub line: usize,
    /// The contracted pair (t, t + 1).
    pub strands: (u32, u32),
    pub forced: Vec<ForcedCrossing>,
    /// `kept[i]` is the D^s crossing that becomes crossing i of D^{s′}.
    pub kept: Vec<usize>,
    /// Bits of the forced crossings, and the B-markers among them.
    pub forced_mask: u64,
    pub forced_word: u64,
    pub contracted_arc: Vec<bool>,
    pub contracted_free: Vec<bool>,
    /// D^s arc where the traversal of the lower contracted strand starts.
    pub base_point: Option<usize>,
    /// Number of contracted circles under the forced markers.
    pub contracted_circles: usize,
}

impl ContractionContext {
    pub fn edge_name(&self) -> String {
        format!("{} -> {}", self.source, self.target)
    }

    pub fn is_degenerate(&self) -> bool {
        self.forced.is_empty()
    }

    /// Forced-marker patterns with one A/B pair swapped (the Type 2 candidates).
    pub fn type2_patterns(&self) -> Vec<u64> {
        let mut out = Vec::new();
        for a in self.forced.iter().filter(|f| !f.b_marker) {
            for b in self.forced.iter().filter(|f| f.b_marker) {
                out.push(self.forced_word ^ (1 << a.crossing) ^ (1 << b.crossing));
            }
        }
        out
    }
}

fn contracted(st: Strand, line: usize, t: u32) -> bool {
    st.component == line && (st.index == t || st.index == t + 1)
}

/// Left-to-right test of a crossing of a contracted strand by another strand.
fn crosses_left_to_right(ds: &CableDiagram, x: usize, contracted_is_under: bool, t: u32) -> bool {
    // local frame: under runs north, over runs east on positive crossings
    let sign = ds.diagram.crossings()[x].sign;
    let (under, over) = ds.crossing_strands(x);
    let under_dir = (0i64, 1i64);
    let over_dir = (i64::from(sign), 0i64);
    let cross = |u: (i64, i64), v: (i64, i64)| u.0 * v.1 - u.1 * v.0;
    let (band, band_strand, other) = if contracted_is_under {
        (under_dir, under, over_dir)
    } else {
        (over_dir, over, under_dir)
    };
    // the band is oriented along strand t
    let flip = if band_strand.index == t { 1 } else { -1 };
    cross((band.0 * flip, band.1 * flip), other) < 0
}

pub fn classify_contraction(
    ds: &CableDiagram,
    ds2: &CableDiagram,
    s: &Pairing,
    s2: &Pairing,
    reading: AReading,
) -> Result<ContractionContext, BicomplexError> {
    let (line, t) = s.added_pair(s2)?;
    let edge = format!("{s} -> {s2}");
    let d = &ds.diagram;
    let mut forced = Vec::new();
    let mut kept = Vec::new();
    for x in 0..d.crossing_count() {
        let (under, over) = ds.crossing_strands(x);
        let cu = contracted(under, line, t);
        let co = contracted(over, line, t);
        if !cu && !co {
            kept.push(x);
            continue;
        }
        let kind = if cu && co {
            CrossingKind::B
        } else {
            let ltr = crosses_left_to_right(ds, x, cu, t);
            match (ltr, reading) {
                (true, AReading::LeftToRight) | (false, AReading::RightToLeft) => CrossingKind::A1,
                _ => CrossingKind::A2,
            }
        };
        forced.push(ForcedCrossing {
            crossing: x,
            tag: ds.tags[x],
            kind,
            b_marker: d.crossings()[x].sign < 0,
        });
    }
    let kept_tags: Vec<CrossingTag> = kept.iter().map(|&x| ds.tags[x]).collect();
    if kept_tags != ds2.tags {
        return Err(BicomplexError::Convention {
            edge,
            detail: "surviving crossings of D^s do not match the crossings of D^s'".into(),
        });
    }
    let forced_mask = forced.iter().fold(0u64, |m, f| m | 1 << f.crossing);
    let forced_word = forced
        .iter()
        .filter(|f| f.b_marker)
        .fold(0u64, |m, f| m | 1 << f.crossing);

    let contracted_arc: Vec<bool> = (0..d.arcs().len())
        .map(|a| contracted(ds.strand_of_arc(a), line, t))
        .collect();
    let contracted_free: Vec<bool> = free_loop_strands(ds)
        .iter()
        .map(|&st| contracted(st, line, t))
        .collect();

    let base_point = ds
        .strands
        .iter()
        .position(|st| st.component == line && st.index == t)
        .and_then(|comp| d.orientations()[comp].first())
        .and_then(|&l| d.arc_index(l));

    // smoothing the forced crossings (A elsewhere) must close the contracted
    // strands into circles made of contracted arcs only
    let res = crate::khovanov::resolve(d, forced_word);
    let mut mixed = vec![(false, false); res.arc_circles()];
    for (a, &is_c) in contracted_arc.iter().enumerate() {
        let m = &mut mixed[res.circle_of_arc[a] as usize];
        if is_c {
            m.0 = true;
        } else {
            m.1 = true;
        }
    }
    if let Some(ci) = mixed.iter().position(|&(c, o)| c && o) {
        let witness = forced
            .iter()
            .find(|f| f.kind != CrossingKind::B)
            .map(|f| {
                format!(
                    "crossing {} ({:?}, source crossing {}, strands {}/{}) joins a contracted strand to a non-contracted one",
                    f.crossing, f.kind, f.tag.source, f.tag.under, f.tag.over
                )
            })
            .unwrap_or_else(|| format!("circle {ci} mixes contracted and non-contracted arcs"));
        return Err(BicomplexError::Convention {
            edge,
            detail: format!("contracted strands do not close into separate circles: {witness}"),
        });
    }
    let contracted_circles = mixed.iter().filter(|&&(c, _)| c).count()
        + contracted_free.iter().filter(|&&c| c).count();

    Ok(ContractionContext {
        source: s.clone(),
        target: s2.clone(),
        line,
        strands: (t, t + 1),
        forced,
        kept,
        forced_mask,
        forced_word,
        contracted_arc,
        contracted_free,
        base_point,
        contracted_circles,
    })
}

/// Strand of every crossing-free loop, in the circle numbering order.
fn free_loop_strands(cd: &CableDiagram) -> Vec<Strand> {
    cd.diagram
        .free_loops()
        .iter()
        .enumerate()
        .flat_map(|(comp, &f)| std::iter::repeat_n(cd.strands[comp], f as usize))
        .collect()
}

/// Where a circle of D^{s′} lives in D^s.
#[derive(Debug, Clone, Copy)]
enum Anchor {
    Arc(usize),
    Free(usize),
}

/// φ for one edge: Type 1 states go to ±T₁, everything else to zero.
#[derive(Debug, Clone)]
pub struct AnnulusMap {
    ctx: ContractionContext,
    /// D^s anchor of every D^{s′} arc.
    arc_anchor: Vec<Anchor>,
    /// D^s anchor of every D^{s′} free loop.
    free_anchor: Vec<Anchor>,
    /// Number of B-forced crossings preceding each kept crossing.
    forced_b_before: Vec<u32>,
}

impl AnnulusMap {
    pub fn new(
        ctx: ContractionContext,
        ds: &CableDiagram,
        ds2: &CableDiagram,
    ) -> Result<Self, BicomplexError> {
        let edge = ctx.edge_name();
        let d2 = &ds2.diagram;
        let mut arc_anchor = Vec::with_capacity(d2.arcs().len());
        for a in d2.arcs() {
            let tag = ds2.tags[a.tail.crossing];
            let x = ds.crossing_index(&tag).ok_or_else(|| BicomplexError::Convention {
                edge: edge.clone(),
                detail: format!("crossing {tag:?} of D^s' missing from D^s"),
            })?;
            arc_anchor.push(Anchor::Arc(ds.diagram.slot_arcs(x)[a.tail.slot]));
        }
        let ds_free = free_loop_strands(ds);
        let mut free_anchor = Vec::new();
        for st in free_loop_strands(ds2) {
            let anchor = match ds.strands.iter().position(|&x| x == st) {
                Some(comp) => match ds.diagram.orientations()[comp].first() {
                    Some(&l) => Anchor::Arc(ds.diagram.arc_index(l).expect("arc label")),
                    None => Anchor::Free(ds_free.iter().position(|&x| x == st).expect("free loop")),
                },
                None => {
                    return Err(BicomplexError::Convention {
                        edge,
                        detail: format!("strand {st:?} of D^s' missing from D^s"),
                    })
                }
            };
            free_anchor.push(anchor);
        }
        let forced_b_before = ctx
            .kept
            .iter()
            .map(|&y| {
                ctx.forced
                    .iter()
                    .filter(|f| f.b_marker && f.crossing < y)
                    .count() as u32
            })
            .collect();
        Ok(AnnulusMap {
            ctx,
            arc_anchor,
            free_anchor,
            forced_b_before,
        })
    }

    pub fn context(&self) -> &ContractionContext {
        &self.ctx
    }

    /// φ(S) as (coefficient, T), or `None` when φ(S) = 0.
    pub fn apply(
        &self,
        kc_s: &KhovanovComplex,
        kc_s2: &KhovanovComplex,
        st: &EnhancedState,
    ) -> Result<Option<(i64, EnhancedState)>, BicomplexError> {
        let ctx = &self.ctx;
        if st.markers & ctx.forced_mask != ctx.forced_word {
            return Ok(None);
        }
        let res = kc_s.resolution(st.markers);
        let n_arc = res.arc_circles();
        let mut is_contracted = vec![false; res.circles()];
        for (ci, &rep) in res.reps.iter().enumerate() {
            is_contracted[ci] = ctx.contracted_arc[rep];
        }
        for (f, &c) in ctx.contracted_free.iter().enumerate() {
            is_contracted[n_arc + f] = c;
        }
        if (0..res.circles()).any(|ci| is_contracted[ci] && !st.is_plus(ci)) {
            return Ok(None);
        }

        let mut markers2 = 0u64;
        let mut eps = 0u32;
        for (i, &y) in ctx.kept.iter().enumerate() {
            if !st.is_a(y) {
                markers2 |= 1 << i;
                eps += self.forced_b_before[i];
            }
        }
        let res2 = kc_s2.resolution(markers2);
        let circle_in_s = |anchor: Anchor| match anchor {
            Anchor::Arc(a) => res.circle_of_arc[a] as usize,
            Anchor::Free(f) => n_arc + f,
        };
        let mut hit = vec![false; res.circles()];
        let mut signs2 = 0u64;
        let mut assign = |ci2: usize, ci: usize| -> Result<(), String> {
            if is_contracted[ci] {
                return Err(format!("circle {ci2} of D^s' lands on a contracted circle"));
            }
            if hit[ci] {
                return Err(format!("two circles of D^s' land on circle {ci} of D^s"));
            }
            hit[ci] = true;
            if !st.is_plus(ci) {
                signs2 |= 1 << ci2;
            }
            Ok(())
        };
        let mut result = Ok(());
        for (ci2, &rep) in res2.reps.iter().enumerate() {
            result = result.and_then(|_| assign(ci2, circle_in_s(self.arc_anchor[rep])));
        }
        for (f, &anchor) in self.free_anchor.iter().enumerate() {
            result = result.and_then(|_| assign(res2.arc_circles() + f, circle_in_s(anchor)));
        }
        let all_hit = (0..res.circles()).all(|ci| is_contracted[ci] || hit[ci]);
        if let Err(e) = result.and_then(|_| {
            if all_hit {
                Ok(())
            } else {
                Err("a non-contracted circle of D^s has no partner in D^s'".into())
            }
        }) {
            return Err(BicomplexError::Convention {
                edge: ctx.edge_name(),
                detail: format!("state {st}: {e}"),
            });
        }
        let t = EnhancedState {
            markers: markers2,
            signs: signs2,
        };
        let (i1, _) = kc_s.gradings(st);
        let (i2, _) = kc_s2.gradings(&t);
        if i1 != i2 {
            return Err(BicomplexError::GradingShift {
                edge: ctx.edge_name(),
                state: *st,
                i_from: i1,
                i_to: i2,
            });
        }
        Ok(Some((if eps % 2 == 0 { 1 } else { -1 }, t)))
    }
}

/// Per-i view of a Khovanov complex: basis = blocks (i, j) concatenated by j.
#[derive(Debug, Clone, Default)]
struct Layout {
    /// (i, j) → offset inside C^i.
    offset: BTreeMap<(i64, i64), usize>,
    dim: BTreeMap<i64, usize>,
}

impl Layout {
    fn of(kc: &KhovanovComplex) -> Self {
        let mut l = Layout::default();
        for (&(i, j), b) in kc.blocks() {
            let d = l.dim.entry(i).or_insert(0);
            l.offset.insert((i, j), *d);
            *d += b.len();
        }
        l
    }

    fn dim(&self, i: i64) -> usize {
        self.dim.get(&i).copied().unwrap_or(0)
    }

    fn position(&self, kc: &KhovanovComplex, st: &EnhancedState) -> (i64, usize) {
        let (i, j) = kc.gradings(st);
        (i, self.offset[&(i, j)] + kc.locate(st).expect("state in complex"))
    }
}

#[derive(Debug, Clone)]
pub struct Column {
    pub pairing: Pairing,
    pub cable: CableDiagram,
    pub complex: KhovanovComplex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BicomplexOptions {
    pub cap: u128,
    pub strand_order: StrandOrder,
    pub line_order: LineOrder,
    pub reading: AReading,
}

impl Default for BicomplexOptions {
    fn default() -> Self {
        BicomplexOptions {
            cap: crate::DEFAULT_CAP,
            strand_order: StrandOrder::Leftmost,
            line_order: LineOrder::SmallerAbove,
            reading: AReading::LeftToRight,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EdgeMap {
    pub level: usize,
    pub from: usize,
    pub to: usize,
    pub sign: i64,
    pub context: ContractionContext,
    /// φ^i: C^i(D^s) → C^i(D^{s′}), unsigned by the pairing sign.
    pub phi: BTreeMap<i64, IntMatrix>,
    pub type1_states: usize,
}

#[derive(Debug, Clone)]
pub struct BicomplexData {
    pub colors: ColorTuple,
    pub options: BicomplexOptions,
    pub graph: PairingGraph,
    pub columns: Vec<Vec<Column>>,
    pub edges: Vec<EdgeMap>,
    layouts: Vec<Vec<Layout>>,
    /// (k, i) → offset of each column of level k inside C^{k,i}.
    col_offset: BTreeMap<(usize, i64), Vec<usize>>,
    /// d′^{k,i}: C^{k,i} → C^{k+1,i}.
    d1: BTreeMap<(usize, i64), IntMatrix>,
    /// d″^{k,i}: C^{k,i} → C^{k,i+1}.
    d2: BTreeMap<(usize, i64), IntMatrix>,
}

pub fn build_bicomplex(
    d: &FramedLinkDiagram,
    n: &ColorTuple,
    opts: BicomplexOptions,
) -> Result<BicomplexData, BicomplexError> {
    let cd = cable_with(d, n, opts.strand_order)?;
    let graph = PairingGraph::new(n, opts.line_order);
    let mut columns: Vec<Vec<Column>> = Vec::new();
    let mut budget: u128 = 0;
    for level in &graph.levels {
        let mut cols = Vec::new();
        for s in level {
            let sc = subcable(&cd, s)?;
            let complex = KhovanovComplex::build(&sc.diagram, opts.cap)?;
            budget += complex.total_states() as u128;
            if budget > opts.cap {
                return Err(BicomplexError::CapExceeded {
                    required: budget,
                    cap: opts.cap,
                });
            }
            cols.push(Column {
                pairing: s.clone(),
                cable: sc,
                complex,
            });
        }
        columns.push(cols);
    }
    let layouts: Vec<Vec<Layout>> = columns
        .iter()
        .map(|cols| cols.iter().map(|c| Layout::of(&c.complex)).collect())
        .collect();

    let present = layouts.iter().flatten().flat_map(|l| l.dim.keys().copied());
    let (imin, imax) = present
        .fold(None, |acc: Option<(i64, i64)>, i| {
            Some(acc.map_or((i, i), |(a, b)| (a.min(i), b.max(i))))
        })
        .unwrap_or((0, 0));
    let i_values: Vec<i64> = (imin..=imax).collect();
    let mut col_offset = BTreeMap::new();
    for (k, ls) in layouts.iter().enumerate() {
        for i in imin..=imax + 1 {
            let mut offs = Vec::with_capacity(ls.len());
            let mut acc = 0;
            for l in ls {
                offs.push(acc);
                acc += l.dim(i);
            }
            offs.push(acc);
            col_offset.insert((k, i), offs);
        }
    }
    let dim = |k: usize, i: i64| -> usize {
        col_offset.get(&(k, i)).map_or(0, |o: &Vec<usize>| *o.last().unwrap())
    };

    // d″ = (−1)^k ⊕_s d_s
    let mut d2 = BTreeMap::new();
    for (k, cols) in columns.iter().enumerate() {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        for &i in &i_values {
            let mut trip = Vec::new();
            for (p, col) in cols.iter().enumerate() {
                let l = &layouts[k][p];
                let (ro, co) = (col_offset[&(k, i + 1)][p], col_offset[&(k, i)][p]);
                for (&(bi, j), _) in col.complex.blocks().range((i, i64::MIN)..=(i, i64::MAX)) {
                    let m = col.complex.differential(bi, j);
                    let (r0, c0) = (l.offset.get(&(i + 1, j)).copied(), l.offset[&(i, j)]);
                    for &(r, c, v) in m.entries() {
                        trip.push((ro + r0.expect("target block") + r, co + c0 + c, sign * v));
                    }
                }
            }
            d2.insert((k, i), IntMatrix::from_triplets(dim(k, i + 1), dim(k, i), trip));
        }
    }

    // d′ = Σ (−1)^{(s,s′)} φ
    let mut edges = Vec::new();
    let mut d1_trip: BTreeMap<(usize, i64), Vec<(usize, usize, i64)>> = BTreeMap::new();
    for e in &graph.edges {
        let src = &columns[e.level][e.from];
        let dst = &columns[e.level + 1][e.to];
        let ctx = classify_contraction(&src.cable, &dst.cable, &src.pairing, &dst.pairing, opts.reading)?;
        let map = AnnulusMap::new(ctx, &src.cable, &dst.cable)?;
        let (ls, lt) = (&layouts[e.level][e.from], &layouts[e.level + 1][e.to]);
        let mut phi_trip: BTreeMap<i64, Vec<(usize, usize, i64)>> = BTreeMap::new();
        let mut type1 = 0;
        for block in src.complex.blocks().values() {
            for st in block {
                if let Some((coef, t)) = map.apply(&src.complex, &dst.complex, st)? {
                    type1 += 1;
                    let (i, col) = ls.position(&src.complex, st);
                    let (_, row) = lt.position(&dst.complex, &t);
                    phi_trip.entry(i).or_default().push((row, col, coef));
                    let ro = col_offset[&(e.level + 1, i)][e.to];
                    let co = col_offset[&(e.level, i)][e.from];
                    d1_trip
                        .entry((e.level, i))
                        .or_default()
                        .push((ro + row, co + col, e.sign * coef));
                }
            }
        }
        let phi = i_values
            .iter()
            .map(|&i| {
                let t = phi_trip.remove(&i).unwrap_or_default();
                (i, IntMatrix::from_triplets(lt.dim(i), ls.dim(i), t))
            })
            .collect();
        edges.push(EdgeMap {
            level: e.level,
            from: e.from,
            to: e.to,
            sign: e.sign,
            context: map.ctx,
            phi,
            type1_states: type1,
        });
    }
    let mut d1 = BTreeMap::new();
    for k in 0..columns.len() {
        for &i in &i_values {
            let t = d1_trip.remove(&(k, i)).unwrap_or_default();
            d1.insert((k, i), IntMatrix::from_triplets(dim(k + 1, i), dim(k, i), t));
        }
    }

    Ok(BicomplexData {
        colors: n.clone(),
        options: opts,
        graph,
        columns,
        edges,
        layouts,
        col_offset,
        d1,
        d2,
    })
}

/// Outcome of one identity over all blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub blocks_checked: usize,
    pub witness: Option<String>,
}

impl IdentityCheck {
    pub fn ok(&self) -> bool {
        self.witness.is_none()
    }
}

#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub d1_squared: IdentityCheck,
    pub d2_squared: IdentityCheck,
    pub anticommute: IdentityCheck,
    pub chain_maps: IdentityCheck,
    pub euler: Option<bool>,
    pub bigraded_euler: LaurentPoly,
    pub colored_jones: Option<LaurentPoly>,
}

impl VerificationReport {
    pub fn all_ok(&self) -> bool {
        self.d1_squared.ok()
            && self.d2_squared.ok()
            && self.anticommute.ok()
            && self.chain_maps.ok()
            && self.euler != Some(false)
    }

    pub fn summary_line(&self) -> String {
        let st = |c: &IdentityCheck| if c.ok() { "ok" } else { "FAIL" };
        let euler = match self.euler {
            Some(true) => "ok",
            Some(false) => "FAIL",
            None => "skipped",
        };
        format!(
            "d'2={} d''2={} anticommute={} euler={} chainmap={}",
            st(&self.d1_squared),
            st(&self.d2_squared),
            st(&self.anticommute),
            euler,
            st(&self.chain_maps)
        )
    }
}

impl BicomplexData {
    pub fn levels(&self) -> usize {
        self.columns.len()
    }

    pub fn i_values(&self) -> Vec<i64> {
        let mut v: Vec<i64> = self.d2.keys().map(|&(_, i)| i).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn dim(&self, k: usize, i: i64) -> usize {
        self.col_offset.get(&(k, i)).map_or(0, |o| *o.last().unwrap())
    }

    pub fn d_prime(&self, k: usize, i: i64) -> IntMatrix {
        self.d1
            .get(&(k, i))
            .cloned()
            .unwrap_or_else(|| IntMatrix::zeros(self.dim(k + 1, i), self.dim(k, i)))
    }

    pub fn d_double_prime(&self, k: usize, i: i64) -> IntMatrix {
        self.d2
            .get(&(k, i))
            .cloned()
            .unwrap_or_else(|| IntMatrix::zeros(self.dim(k, i + 1), self.dim(k, i)))
    }

    /// rk C^{k,i,j}.
    pub fn ranks(&self) -> BTreeMap<(usize, i64, i64), usize> {
        let mut out = BTreeMap::new();
        for (k, cols) in self.columns.iter().enumerate() {
            for col in cols {
                for (&(i, j), b) in col.complex.blocks() {
                    *out.entry((k, i, j)).or_insert(0) += b.len();
                }
            }
        }
        out
    }

    /// Basis element `idx` of C^{k,i}, for witnesses.
    pub fn describe(&self, k: usize, i: i64, idx: usize) -> String {
        let Some(offs) = self.col_offset.get(&(k, i)) else {
            return format!("C^({k},{i})[{idx}]");
        };
        let p = offs.partition_point(|&o| o <= idx) - 1;
        let local = idx - offs[p];
        let col = &self.columns[k][p];
        let l = &self.layouts[k][p];
        for (&(bi, j), &o) in l.offset.range((i, i64::MIN)..=(i, i64::MAX)) {
            let b = col.complex.block(bi, j);
            if local >= o && local < o + b.len() {
                return format!("s={} j={} {}", col.pairing, j, b[local - o]);
            }
        }
        format!("C^({k},{i})[{idx}]")
    }

    fn check_products<F>(&self, name: &'static str, f: F) -> IdentityCheck
    where
        F: Fn(usize, i64) -> Option<(IntMatrix, usize, i64)>,
    {
        let mut n = 0;
        for k in 0..self.levels() {
            for i in self.i_values() {
                let Some((m, src_k, src_i)) = f(k, i) else { continue };
                n += 1;
                if let Some((r, c, v)) = m.first_nonzero() {
                    return IdentityCheck {
                        name,
                        blocks_checked: n,
                        witness: Some(format!(
                            "block (k={k}, i={i}): {} -> row {r} coefficient {v}",
                            self.describe(src_k, src_i, c)
                        )),
                    };
                }
            }
        }
        IdentityCheck {
            name,
            blocks_checked: n,
            witness: None,
        }
    }

    pub fn check_d_prime_squared(&self) -> IdentityCheck {
        self.check_products("d'^2 = 0", |k, i| {
            Some((self.d_prime(k + 1, i).mul(&self.d_prime(k, i)), k, i))
        })
    }

    pub fn check_d_double_prime_squared(&self) -> IdentityCheck {
        self.check_products("d''^2 = 0", |k, i| {
            Some((self.d_double_prime(k, i + 1).mul(&self.d_double_prime(k, i)), k, i))
        })
    }

    pub fn check_anticommute(&self) -> IdentityCheck {
        self.check_products("d''d' + d'd'' = 0", |k, i| {
            let a = self.d_double_prime(k + 1, i).mul(&self.d_prime(k, i));
            let b = self.d_prime(k, i + 1).mul(&self.d_double_prime(k, i));
            Some((a.add(&b), k, i))
        })
    }

    /// d_{s′} ∘ φ = φ ∘ d_s on every edge and every i.
    pub fn check_chain_maps(&self) -> IdentityCheck {
        let mut n = 0;
        for e in &self.edges {
            let src = &self.columns[e.level][e.from];
            let dst = &self.columns[e.level + 1][e.to];
            let (ls, lt) = (&self.layouts[e.level][e.from], &self.layouts[e.level + 1][e.to]);
            for &i in e.phi.keys() {
                let ds_i = flat_differential(&src.complex, ls, i);
                let dt_i = flat_differential(&dst.complex, lt, i);
                let phi_i = &e.phi[&i];
                let phi_next = e
                    .phi
                    .get(&(i + 1))
                    .cloned()
                    .unwrap_or_else(|| IntMatrix::zeros(lt.dim(i + 1), ls.dim(i + 1)));
                let lhs = dt_i.mul(phi_i);
                let rhs = phi_next.mul(&ds_i);
                n += 1;
                let diff = lhs.add(&rhs.scale(-1));
                if let Some((r, c, v)) = diff.first_nonzero() {
                    return IdentityCheck {
                        name: "d_s' phi = phi d_s",
                        blocks_checked: n,
                        witness: Some(format!(
                            "edge {} at i={i}: column {c} row {r} differs by {v}",
                            e.context.edge_name()
                        )),
                    };
                }
            }
        }
        IdentityCheck {
            name: "d_s' phi = phi d_s",
            blocks_checked: n,
            witness: None,
        }
    }

    /// The full identity suite; the Euler comparison runs when `colored_jones`
    /// is supplied.
    pub fn verify(&self, colored_jones: Option<LaurentPoly>) -> VerificationReport {
        let be = bigraded_euler(self);
        VerificationReport {
            d1_squared: self.check_d_prime_squared(),
            d2_squared: self.check_d_double_prime_squared(),
            anticommute: self.check_anticommute(),
            chain_maps: self.check_chain_maps(),
            euler: colored_jones.as_ref().map(|cj| *cj == be),
            bigraded_euler: be,
            colored_jones,
        }
    }
}

fn flat_differential(kc: &KhovanovComplex, l: &Layout, i: i64) -> IntMatrix {
    let mut trip = Vec::new();
    for (&(bi, j), &o) in l.offset.range((i, i64::MIN)..=(i, i64::MAX)) {
        let m = kc.differential(bi, j);
        if m.is_zero() {
            continue;
        }
        let r0 = l.offset[&(i + 1, j)];
        for &(r, c, v) in m.entries() {
            trip.push((r0 + r, o + c, v));
        }
    }
    IntMatrix::from_triplets(l.dim(i + 1), l.dim(i), trip)
}

/// Σ (−1)^{k+i} q^j rk C^{k,i,j}.
pub fn bigraded_euler(b: &BicomplexData) -> LaurentPoly {
    LaurentPoly::from_terms(
        Variable::Q,
        b.ranks().into_iter().map(|((k, i, j), r)| {
            let s = if (k as i64 + i).rem_euclid(2) == 0 { 1 } else { -1 };
            (j, s * r as i64)
        }),
    )
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityEntry {
    pub edge: String,
    pub degenerate: bool,
    pub contracted_circles: usize,
    pub states_checked: usize,
    /// Every state carrying the forced markers has the same contracted circles.
    pub stable: bool,
    pub even: bool,
}

/// Contracted-circle counts over every Kauffman state that carries the forced
/// markers of each edge.
pub fn contracted_circle_parity(b: &BicomplexData) -> Vec<ParityEntry> {
    let mut out = Vec::new();
    for e in &b.edges {
        let ctx = &e.context;
        let col = &b.columns[e.level][e.from];
        let c = col.complex.crossings();
        let mut checked = 0;
        let mut stable = true;
        for m in 0..(1u64 << c) {
            if m & ctx.forced_mask != ctx.forced_word {
                continue;
            }
            checked += 1;
            let res = col.complex.resolution(m);
            let arc_count = res
                .reps
                .iter()
                .filter(|&&rep| ctx.contracted_arc[rep])
                .count();
            let count = arc_count + ctx.contracted_free.iter().filter(|&&x| x).count();
            stable &= count == ctx.contracted_circles;
        }
        out.push(ParityEntry {
            edge: ctx.edge_name(),
            degenerate: ctx.is_degenerate(),
            contracted_circles: ctx.contracted_circles,
            states_checked: checked,
            stable,
            even: ctx.contracted_circles % 2 == 0,
        });
    }
    out
}

/// Homology of the total complex (d′ + d″) by total degree k + i.
pub fn total_homology(b: &BicomplexData) -> Result<BTreeMap<i64, HomologySummary>, BicomplexError> {
    let levels = b.levels();
    let iv = b.i_values();
    let (Some(&imin), Some(&imax)) = (iv.first(), iv.last()) else {
        return Ok(BTreeMap::new());
    };
    // offset of C^{k,i} inside Tot^{k+i}
    let mut tot_dim: BTreeMap<i64, usize> = BTreeMap::new();
    let mut place: HashMap<(usize, i64), usize> = HashMap::new();
    for m in imin..=imax + levels as i64 {
        let mut acc = 0;
        for k in 0..levels {
            let i = m - k as i64;
            place.insert((k, i), acc);
            acc += b.dim(k, i);
        }
        tot_dim.insert(m, acc);
    }
    let total_d = |m: i64| -> IntMatrix {
        let rows = tot_dim.get(&(m + 1)).copied().unwrap_or(0);
        let cols = tot_dim.get(&m).copied().unwrap_or(0);
        let mut trip = Vec::new();
        for k in 0..levels {
            let i = m - k as i64;
            if b.dim(k, i) == 0 {
                continue;
            }
            let co = place[&(k, i)];
            if k + 1 < levels {
                let ro = place[&(k + 1, i)];
                for &(r, c, v) in b.d_prime(k, i).entries() {
                    trip.push((ro + r, co + c, v));
                }
            }
            let ro = place.get(&(k, i + 1)).copied().unwrap_or(0);
            for &(r, c, v) in b.d_double_prime(k, i).entries() {
                trip.push((ro + r, co + c, v));
            }
        }
        IntMatrix::from_triplets(rows, cols, trip)
    };
    let mut out = BTreeMap::new();
    for &m in tot_dim.keys() {
        if tot_dim[&m] == 0 {
            continue;
        }
        let h = homology_at(&total_d(m), &total_d(m - 1))?;
        out.insert(m, h);
    }
    Ok(out)
}

pub fn euler_of_total(h: &BTreeMap<i64, HomologySummary>) -> i64 {
    h.iter()
        .map(|(&m, s)| if m.rem_euclid(2) == 0 { s.betti as i64 } else { -(s.betti as i64) })
        .sum()
}
