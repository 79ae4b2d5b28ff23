//! Oriented framed link diagrams in PD form, n-cables and pairing subcables.
//!
//! A crossing is stored as four arc labels `[a, b, c, d]` listed counterclockwise
//! starting from the incoming under-strand. In compass terms `a` is south, `b`
//! east, `c` north and `d` west: the under-strand runs south to north. The
//! crossing is positive exactly when the over-strand runs from `d` to `b`.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::Deserialize;
use thiserror::Error;

use crate::pairing::Pairing;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiagramError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("arc multiplicity: arc {label} is used {count} times (expected 2)")]
    ArcMultiplicity { label: u32, count: usize },
    #[error("non-planar rotation data: V - E + F = {euler} over {pieces} connected piece(s)")]
    NonPlanar { euler: i64, pieces: usize },
    #[error("orientation inconsistency: {0}")]
    Orientation(String),
    #[error("component data: {0}")]
    Components(String),
    #[error("color tuple has length {got}, diagram has {expected} components")]
    ColorLength { expected: usize, got: usize },
    #[error("pairing: {0}")]
    Pairing(String),
}

/// Raw PD-code document as it appears on disk.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdDocument {
    pub components: usize,
    pub crossings: Vec<PdCrossing>,
    #[serde(default)]
    pub orientations: Option<Vec<Vec<u32>>>,
    #[serde(default)]
    pub base_edges: Option<Vec<Option<u32>>>,
    #[serde(default)]
    pub free_loops: Option<Vec<u32>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdCrossing {
    pub pd: [u32; 4],
    #[serde(default)]
    pub sign: Option<i8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ArcEnd {
    pub crossing: usize,
    pub slot: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arc {
    pub label: u32,
    pub component: usize,
    pub tail: ArcEnd,
    pub head: ArcEnd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Crossing {
    pub pd: [u32; 4],
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FramedLinkDiagram {
    crossings: Vec<Crossing>,
    arcs: Vec<Arc>,
    slots: Vec<[usize; 4]>,
    orientations: Vec<Vec<u32>>,
    base_edges: Vec<Option<u32>>,
    free_loops: Vec<u32>,
}

pub fn parse_diagram(text: &str) -> Result<FramedLinkDiagram, DiagramError> {
    let doc: PdDocument = serde_json::from_str(text).map_err(|e| DiagramError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    FramedLinkDiagram::from_document(doc)
}

fn opposite(slot: usize) -> usize {
    (slot + 2) % 4
}

/// Head/tail role of every arc end, filled in by propagation.
struct Roles {
    // role[x][slot] = Some(true) if the arc at that slot has its head there
    role: Vec<[Option<bool>; 4]>,
}

impl Roles {
    fn set(&mut self, end: ArcEnd, head: bool) -> Result<bool, String> {
        match self.role[end.crossing][end.slot] {
            Some(h) if h == head => Ok(false),
            Some(_) => Err(format!(
                "crossing {} slot {} is both incoming and outgoing",
                end.crossing, end.slot
            )),
            None => {
                self.role[end.crossing][end.slot] = Some(head);
                Ok(true)
            }
        }
    }
}

fn propagate(
    roles: &mut Roles,
    pd: &[[u32; 4]],
    occ: &BTreeMap<u32, [ArcEnd; 2]>,
    succ: Option<&HashMap<u32, u32>>,
) -> Result<(), String> {
    loop {
        let mut changed = false;
        for x in 0..pd.len() {
            let r1 = roles.role[x][1];
            let r3 = roles.role[x][3];
            if let Some(h) = r1 {
                changed |= roles.set(ArcEnd { crossing: x, slot: 3 }, !h)?;
            }
            if let Some(h) = r3 {
                changed |= roles.set(ArcEnd { crossing: x, slot: 1 }, !h)?;
            }
        }
        for (&label, ends) in occ {
            let r0 = roles.role[ends[0].crossing][ends[0].slot];
            let r1 = roles.role[ends[1].crossing][ends[1].slot];
            if let Some(h) = r0 {
                changed |= roles.set(ends[1], !h)?;
            }
            if let Some(h) = r1 {
                changed |= roles.set(ends[0], !h)?;
            }
            let Some(succ) = succ else { continue };
            let next = succ[&label];
            let head = ends
                .iter()
                .find(|e| roles.role[e.crossing][e.slot] == Some(true))
                .copied();
            if let Some(h) = head {
                let t = ArcEnd {
                    crossing: h.crossing,
                    slot: opposite(h.slot),
                };
                if pd[t.crossing][t.slot] != next {
                    return Err(format!(
                        "arc {label} is followed by arc {next} in the orientation list, \
                         but arc {} leaves crossing {}",
                        pd[t.crossing][t.slot], t.crossing
                    ));
                }
                changed |= roles.set(t, false)?;
            }
            let next_ends = occ[&next];
            let tail = next_ends
                .iter()
                .find(|e| roles.role[e.crossing][e.slot] == Some(false))
                .copied();
            if let Some(t) = tail {
                let h = ArcEnd {
                    crossing: t.crossing,
                    slot: opposite(t.slot),
                };
                if pd[h.crossing][h.slot] != label {
                    return Err(format!(
                        "arc {next} follows arc {label} in the orientation list, \
                         but arc {} enters crossing {}",
                        pd[h.crossing][h.slot], h.crossing
                    ));
                }
                changed |= roles.set(h, true)?;
            }
        }
        if !changed {
            return Ok(());
        }
    }
}

impl FramedLinkDiagram {
    pub fn from_document(doc: PdDocument) -> Result<Self, DiagramError> {
        let pd: Vec<[u32; 4]> = doc.crossings.iter().map(|c| c.pd).collect();
        for c in &doc.crossings {
            if let Some(s) = c.sign {
                if s != 1 && s != -1 {
                    return Err(DiagramError::Orientation(format!(
                        "sign must be 1 or -1, got {s}"
                    )));
                }
            }
        }

        let mut occ_list: BTreeMap<u32, Vec<ArcEnd>> = BTreeMap::new();
        for (x, cr) in pd.iter().enumerate() {
            for (slot, &l) in cr.iter().enumerate() {
                occ_list.entry(l).or_default().push(ArcEnd { crossing: x, slot });
            }
        }
        let mut occ: BTreeMap<u32, [ArcEnd; 2]> = BTreeMap::new();
        for (&label, ends) in &occ_list {
            if ends.len() != 2 {
                return Err(DiagramError::ArcMultiplicity {
                    label,
                    count: ends.len(),
                });
            }
            occ.insert(label, [ends[0], ends[1]]);
        }
        if let Some(orients) = &doc.orientations {
            for list in orients {
                for l in list {
                    if !occ.contains_key(l) {
                        return Err(DiagramError::ArcMultiplicity { label: *l, count: 0 });
                    }
                }
            }
        }

        let succ: Option<HashMap<u32, u32>> = match &doc.orientations {
            None => None,
            Some(orients) => {
                if orients.len() != doc.components {
                    return Err(DiagramError::Components(format!(
                        "{} orientation lists for {} components",
                        orients.len(),
                        doc.components
                    )));
                }
                let mut succ = HashMap::new();
                for list in orients {
                    for (i, &l) in list.iter().enumerate() {
                        let next = list[(i + 1) % list.len()];
                        if succ.insert(l, next).is_some() {
                            return Err(DiagramError::Orientation(format!(
                                "arc {l} appears in more than one orientation position"
                            )));
                        }
                    }
                }
                if succ.len() != occ.len() {
                    let missing = occ.keys().filter(|l| !succ.contains_key(l)).min().copied();
                    return Err(DiagramError::Orientation(format!(
                        "orientation lists miss arc {}",
                        missing.unwrap_or(0)
                    )));
                }
                Some(succ)
            }
        };

        let mut roles = Roles {
            role: vec![[None; 4]; pd.len()],
        };
        let orient_err = DiagramError::Orientation;
        for (x, c) in doc.crossings.iter().enumerate() {
            roles.set(ArcEnd { crossing: x, slot: 0 }, true).map_err(orient_err)?;
            roles.set(ArcEnd { crossing: x, slot: 2 }, false).map_err(orient_err)?;
            if let Some(s) = c.sign {
                let d_head = s > 0;
                roles.set(ArcEnd { crossing: x, slot: 3 }, d_head).map_err(orient_err)?;
                roles.set(ArcEnd { crossing: x, slot: 1 }, !d_head).map_err(orient_err)?;
            }
        }
        propagate(&mut roles, &pd, &occ, succ.as_ref()).map_err(orient_err)?;

        // Components that only ever pass over (no anchor): try both directions.
        loop {
            let unresolved = occ_list
                .iter()
                .find(|(_, e)| roles.role[e[0].crossing][e[0].slot].is_none())
                .map(|(&l, e)| (l, e[0]));
            let Some((label, end)) = unresolved else { break };
            let Some(succ) = succ.as_ref() else {
                return Err(DiagramError::Orientation(format!(
                    "crossing {} has no sign and no orientation list determines it",
                    end.crossing
                )));
            };
            let mut good = Vec::new();
            for head in [true, false] {
                let mut trial = Roles {
                    role: roles.role.clone(),
                };
                if trial.set(end, head).is_ok()
                    && propagate(&mut trial, &pd, &occ, Some(succ)).is_ok()
                {
                    good.push(trial);
                }
            }
            match good.len() {
                0 => {
                    return Err(DiagramError::Orientation(format!(
                        "no direction of arc {label} matches the orientation lists"
                    )))
                }
                1 => roles = good.pop().unwrap(),
                _ => {
                    return Err(DiagramError::Orientation(format!(
                        "orientation of arc {label} is ambiguous; give crossing {} a sign",
                        end.crossing
                    )))
                }
            }
        }

        let mut crossings = Vec::with_capacity(pd.len());
        for (x, c) in doc.crossings.iter().enumerate() {
            let sign = if roles.role[x][3] == Some(true) { 1 } else { -1 };
            if let Some(s) = c.sign {
                if s != sign {
                    return Err(DiagramError::Orientation(format!(
                        "crossing {x} is declared with sign {s} but the orientations give {sign}"
                    )));
                }
            }
            crossings.push(Crossing { pd: c.pd, sign });
        }

        // head/tail per arc and the traced successor relation
        let mut ends_of: BTreeMap<u32, (ArcEnd, ArcEnd)> = BTreeMap::new();
        for (&label, e) in &occ {
            let h0 = roles.role[e[0].crossing][e[0].slot] == Some(true);
            let h1 = roles.role[e[1].crossing][e[1].slot] == Some(true);
            if h0 == h1 {
                return Err(DiagramError::Orientation(format!(
                    "arc {label} needs exactly one incoming and one outgoing end"
                )));
            }
            let (tail, head) = if h0 { (e[1], e[0]) } else { (e[0], e[1]) };
            ends_of.insert(label, (tail, head));
        }
        let traced_next = |label: u32| -> u32 {
            let h = ends_of[&label].1;
            pd[h.crossing][opposite(h.slot)]
        };

        let orientations: Vec<Vec<u32>> = match &doc.orientations {
            Some(orients) => {
                for list in orients {
                    for (i, &l) in list.iter().enumerate() {
                        let next = list[(i + 1) % list.len()];
                        if traced_next(l) != next {
                            return Err(DiagramError::Orientation(format!(
                                "arc {l} continues into arc {} but the list gives {next}",
                                traced_next(l)
                            )));
                        }
                    }
                }
                orients.clone()
            }
            None => {
                let mut seen = std::collections::BTreeSet::new();
                let mut lists = Vec::new();
                for &start in ends_of.keys() {
                    if seen.contains(&start) {
                        continue;
                    }
                    let mut list = Vec::new();
                    let mut l = start;
                    while seen.insert(l) {
                        list.push(l);
                        l = traced_next(l);
                    }
                    lists.push(list);
                }
                if lists.len() > doc.components {
                    return Err(DiagramError::Components(format!(
                        "crossings trace out {} components but the document declares {}",
                        lists.len(),
                        doc.components
                    )));
                }
                lists.resize(doc.components, Vec::new());
                lists
            }
        };

        let free_loops: Vec<u32> = orientations
            .iter()
            .map(|l| u32::from(l.is_empty()))
            .collect();
        if let Some(given) = &doc.free_loops {
            if given != &free_loops {
                return Err(DiagramError::Components(format!(
                    "free_loops {given:?} disagree with the arc lists (expected {free_loops:?})"
                )));
            }
        }
        let base_edges: Vec<Option<u32>> = match &doc.base_edges {
            None => orientations.iter().map(|l| l.first().copied()).collect(),
            Some(given) => {
                if given.len() != orientations.len() {
                    return Err(DiagramError::Components(format!(
                        "{} base edges for {} components",
                        given.len(),
                        orientations.len()
                    )));
                }
                for (c, (b, list)) in given.iter().zip(&orientations).enumerate() {
                    let ok = match b {
                        None => list.is_empty(),
                        Some(l) => list.contains(l),
                    };
                    if !ok {
                        return Err(DiagramError::Components(format!(
                            "base edge {b:?} does not lie on component {c}"
                        )));
                    }
                }
                given.clone()
            }
        };

        let mut comp_of = HashMap::new();
        for (c, list) in orientations.iter().enumerate() {
            for &l in list {
                comp_of.insert(l, c);
            }
        }
        let arcs: Vec<Arc> = ends_of
            .iter()
            .map(|(&label, &(tail, head))| Arc {
                label,
                component: comp_of[&label],
                tail,
                head,
            })
            .collect();
        let index: HashMap<u32, usize> = arcs.iter().enumerate().map(|(i, a)| (a.label, i)).collect();
        let slots = pd.iter().map(|cr| cr.map(|l| index[&l])).collect();

        let d = FramedLinkDiagram {
            crossings,
            arcs,
            slots,
            orientations,
            base_edges,
            free_loops,
        };
        d.check_planar()?;
        Ok(d)
    }

    /// Face tracing on the 4-valent crossing graph; each connected piece must
    /// satisfy V - E + F = 2.
    fn check_planar(&self) -> Result<(), DiagramError> {
        let n = self.crossings.len();
        if n == 0 {
            return Ok(());
        }
        let other_end = |x: usize, s: usize| -> (usize, usize) {
            let a = &self.arcs[self.slots[x][s]];
            let here = ArcEnd { crossing: x, slot: s };
            let e = if a.tail == here { a.head } else { a.tail };
            (e.crossing, e.slot)
        };
        let mut seen = vec![[false; 4]; n];
        let mut faces = 0i64;
        for x in 0..n {
            for s in 0..4 {
                if seen[x][s] {
                    continue;
                }
                faces += 1;
                let (mut cx, mut cs) = (x, s);
                while !seen[cx][cs] {
                    seen[cx][cs] = true;
                    let (y, t) = other_end(cx, cs);
                    cx = y;
                    cs = (t + 1) % 4;
                }
            }
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut a: usize) -> usize {
            while p[a] != a {
                p[a] = p[p[a]];
                a = p[a];
            }
            a
        }
        for a in &self.arcs {
            let r1 = find(&mut parent, a.tail.crossing);
            let r2 = find(&mut parent, a.head.crossing);
            parent[r1] = r2;
        }
        let pieces = (0..n).filter(|&x| find(&mut parent, x) == x).count();
        let euler = n as i64 - self.arcs.len() as i64 + faces;
        if euler != 2 * pieces as i64 {
            return Err(DiagramError::NonPlanar { euler, pieces });
        }
        Ok(())
    }

    pub fn components(&self) -> usize {
        self.orientations.len()
    }

    pub fn crossings(&self) -> &[Crossing] {
        &self.crossings
    }

    pub fn crossing_count(&self) -> usize {
        self.crossings.len()
    }

    /// Arcs sorted by label; the position in this slice is the dense arc index.
    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    /// Dense arc indices at the four slots of crossing `x`.
    pub fn slot_arcs(&self, x: usize) -> [usize; 4] {
        self.slots[x]
    }

    pub fn arc_index(&self, label: u32) -> Option<usize> {
        self.arcs.binary_search_by_key(&label, |a| a.label).ok()
    }

    pub fn orientations(&self) -> &[Vec<u32>] {
        &self.orientations
    }

    pub fn base_edges(&self) -> &[Option<u32>] {
        &self.base_edges
    }

    pub fn free_loops(&self) -> &[u32] {
        &self.free_loops
    }

    pub fn free_loop_total(&self) -> usize {
        self.free_loops.iter().map(|&f| f as usize).sum()
    }

    pub fn writhe(&self) -> i64 {
        self.crossings.iter().map(|c| i64::from(c.sign)).sum()
    }

    pub fn positive_count(&self) -> usize {
        self.crossings.iter().filter(|c| c.sign > 0).count()
    }

    pub fn negative_count(&self) -> usize {
        self.crossings.iter().filter(|c| c.sign < 0).count()
    }

    /// Component of the under-strand and of the over-strand at crossing `x`.
    pub fn strand_components(&self, x: usize) -> (usize, usize) {
        let s = self.slots[x];
        (self.arcs[s[0]].component, self.arcs[s[1]].component)
    }

    pub fn to_document(&self) -> PdDocument {
        PdDocument {
            components: self.components(),
            crossings: self
                .crossings
                .iter()
                .map(|c| PdCrossing {
                    pd: c.pd,
                    sign: Some(c.sign),
                })
                .collect(),
            orientations: Some(self.orientations.clone()),
            base_edges: Some(self.base_edges.clone()),
            free_loops: Some(self.free_loops.clone()),
        }
    }

    /// Canonical text form. Parsing the output and serializing again gives
    /// the same bytes.
    pub fn to_json(&self) -> String {
        fn list<T: std::fmt::Display>(v: &[T]) -> String {
            let items: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            format!("[{}]", items.join(", "))
        }
        let mut out = String::new();
        out.push_str("{\n");
        let _ = writeln!(out, "  \"components\": {},", self.components());
        if self.crossings.is_empty() {
            out.push_str("  \"crossings\": [],\n");
        } else {
            out.push_str("  \"crossings\": [\n");
            for (i, c) in self.crossings.iter().enumerate() {
                let sep = if i + 1 < self.crossings.len() { "," } else { "" };
                let _ = writeln!(out, "    {{\"pd\": {}, \"sign\": {}}}{sep}", list(&c.pd), c.sign);
            }
            out.push_str("  ],\n");
        }
        let orients: Vec<String> = self.orientations.iter().map(|l| list(l)).collect();
        let _ = writeln!(out, "  \"orientations\": [{}],", orients.join(", "));
        let bases: Vec<String> = self
            .base_edges
            .iter()
            .map(|b| b.map_or("null".to_string(), |l| l.to_string()))
            .collect();
        let _ = writeln!(out, "  \"base_edges\": [{}],", bases.join(", "));
        let _ = writeln!(out, "  \"free_loops\": {}", list(&self.free_loops));
        out.push_str("}\n");
        out
    }
}

pub fn writhe(d: &FramedLinkDiagram) -> i64 {
    d.writhe()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColorTuple(pub Vec<u32>);

impl ColorTuple {
    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }
}

/// Which parallel copy carries strand index 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StrandOrder {
    /// Strand 1 is the leftmost copy looking along the original orientation.
    #[default]
    Leftmost,
    Rightmost,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Strand {
    pub component: usize,
    /// Strand index within the original component, 1-based, never renumbered.
    pub index: u32,
}

impl Strand {
    /// Odd strands follow the original orientation, even ones run against it.
    pub fn is_reversed(&self) -> bool {
        self.index % 2 == 0
    }
}

/// Cable crossing provenance: source crossing and the under/over strand indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CrossingTag {
    pub source: usize,
    pub under: u32,
    pub over: u32,
}

#[derive(Debug, Clone)]
pub struct CableDiagram {
    pub diagram: FramedLinkDiagram,
    /// One strand per component of `diagram`, in (component, index) order.
    pub strands: Vec<Strand>,
    /// One tag per crossing of `diagram`.
    pub tags: Vec<CrossingTag>,
    pub colors: ColorTuple,
    pub order: StrandOrder,
    /// The diagram that was cabled.
    pub source: FramedLinkDiagram,
}

impl CableDiagram {
    pub fn strand_of_arc(&self, arc: usize) -> Strand {
        self.strands[self.diagram.arcs[arc].component]
    }

    /// Under and over strand of crossing `x`.
    pub fn crossing_strands(&self, x: usize) -> (Strand, Strand) {
        let (cu, co) = self.diagram.strand_components(x);
        (self.strands[cu], self.strands[co])
    }

    pub fn crossing_index(&self, tag: &CrossingTag) -> Option<usize> {
        self.tags.binary_search(tag).ok()
    }
}

pub fn cable(d: &FramedLinkDiagram, n: &ColorTuple) -> Result<CableDiagram, DiagramError> {
    cable_with(d, n, StrandOrder::Leftmost)
}

pub fn cable_with(
    d: &FramedLinkDiagram,
    n: &ColorTuple,
    order: StrandOrder,
) -> Result<CableDiagram, DiagramError> {
    if n.0.len() != d.components() {
        return Err(DiagramError::ColorLength {
            expected: d.components(),
            got: n.0.len(),
        });
    }
    let keep: Vec<Vec<u32>> = n.0.iter().map(|&k| (1..=k).collect()).collect();
    build_cable(d, n, &keep, order)
}

/// The diagram D^s: strands occurring in a pair of `s` are deleted, the rest
/// keep their original indices and positions.
pub fn subcable(cd: &CableDiagram, s: &Pairing) -> Result<CableDiagram, DiagramError> {
    let n = &cd.colors;
    if s.lines() != n.0.len() {
        return Err(DiagramError::Pairing(format!(
            "pairing has {} lines, colors have {}",
            s.lines(),
            n.0.len()
        )));
    }
    let mut keep = Vec::with_capacity(n.0.len());
    for (c, &nc) in n.0.iter().enumerate() {
        for &t in s.pairs(c) {
            if t + 1 > nc || t == 0 {
                return Err(DiagramError::Pairing(format!(
                    "pair ({t},{}) on line {} exceeds color {nc}",
                    t + 1,
                    c + 1
                )));
            }
        }
        keep.push(
            (1..=nc)
                .filter(|&t| !s.pairs(c).iter().any(|&p| p == t || p + 1 == t))
                .collect(),
        );
    }
    build_cable(&cd.source, n, &keep, cd.order)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Token {
    crossing: usize,
    slot: usize,
    strand: u32,
}

#[derive(Debug, Clone, Copy)]
enum TokenEnd {
    Port(usize, usize),
    Pass(Token),
}

/// Compass slots: 0 south, 1 east, 2 north, 3 west.
const SOUTH: usize = 0;
const EAST: usize = 1;
const NORTH: usize = 2;
const WEST: usize = 3;

fn build_cable(
    d: &FramedLinkDiagram,
    n: &ColorTuple,
    keep: &[Vec<u32>],
    order: StrandOrder,
) -> Result<CableDiagram, DiagramError> {
    let pos = |c: usize, t: u32| -> i64 {
        match order {
            StrandOrder::Leftmost => i64::from(t),
            StrandOrder::Rightmost => i64::from(n.0[c]) + 1 - i64::from(t),
        }
    };

    // compass slot per cable crossing port; filled in crossing order
    let mut tags = Vec::new();
    let mut signs: Vec<i8> = Vec::new();
    let mut north: Vec<bool> = Vec::new();
    let mut ends: HashMap<Token, TokenEnd> = HashMap::new();
    let mut internal: Vec<((usize, usize), (usize, usize))> = Vec::new();

    for (x, cr) in d.crossings.iter().enumerate() {
        let (cu, co) = d.strand_components(x);
        let ku = &keep[cu];
        let ko = &keep[co];
        let positive = cr.sign > 0;
        if ku.is_empty() || ko.is_empty() {
            for &t in ku {
                let a = Token { crossing: x, slot: SOUTH, strand: t };
                let b = Token { crossing: x, slot: NORTH, strand: t };
                ends.insert(a, TokenEnd::Pass(b));
                ends.insert(b, TokenEnd::Pass(a));
            }
            for &t in ko {
                let a = Token { crossing: x, slot: WEST, strand: t };
                let b = Token { crossing: x, slot: EAST, strand: t };
                ends.insert(a, TokenEnd::Pass(b));
                ends.insert(b, TokenEnd::Pass(a));
            }
            continue;
        }
        let mut grid = HashMap::new();
        for &tu in ku {
            for &to in ko {
                let cx = tags.len();
                tags.push(CrossingTag { source: x, under: tu, over: to });
                let up = tu % 2 == 1;
                let east = positive == (to % 2 == 1);
                signs.push(if up == east { 1 } else { -1 });
                north.push(up);
                grid.insert((tu, to), cx);
            }
        }
        // the over band runs east at y = -pos, west at y = +pos
        let y = |to: u32| if positive { -pos(co, to) } else { pos(co, to) };
        let mut col: Vec<u32> = ko.clone();
        col.sort_by_key(|&t| y(t));
        let mut row: Vec<u32> = ku.clone();
        row.sort_by_key(|&t| pos(cu, t));
        for &tu in ku {
            ends.insert(
                Token { crossing: x, slot: SOUTH, strand: tu },
                TokenEnd::Port(grid[&(tu, col[0])], SOUTH),
            );
            ends.insert(
                Token { crossing: x, slot: NORTH, strand: tu },
                TokenEnd::Port(grid[&(tu, *col.last().unwrap())], NORTH),
            );
            for w in col.windows(2) {
                internal.push(((grid[&(tu, w[0])], NORTH), (grid[&(tu, w[1])], SOUTH)));
            }
        }
        for &to in ko {
            ends.insert(
                Token { crossing: x, slot: WEST, strand: to },
                TokenEnd::Port(grid[&(row[0], to)], WEST),
            );
            ends.insert(
                Token { crossing: x, slot: EAST, strand: to },
                TokenEnd::Port(grid[&(*row.last().unwrap(), to)], EAST),
            );
            for w in row.windows(2) {
                internal.push(((grid[&(w[0], to)], EAST), (grid[&(w[1], to)], WEST)));
            }
        }
    }

    // arc copies: token -> token along each kept strand of each source arc
    let mut link: HashMap<Token, Token> = HashMap::new();
    for a in &d.arcs {
        for &t in &keep[a.component] {
            let p = Token { crossing: a.tail.crossing, slot: a.tail.slot, strand: t };
            let q = Token { crossing: a.head.crossing, slot: a.head.slot, strand: t };
            link.insert(p, q);
            link.insert(q, p);
        }
    }

    // port pairs joined by cable arcs; remember which source arc copy each uses
    let mut port_pairs: Vec<((usize, usize), (usize, usize))> = internal;
    let mut arc_of_copy: HashMap<(u32, u32), usize> = HashMap::new();
    let mut visited: std::collections::HashSet<Token> = std::collections::HashSet::new();
    let mut tokens: Vec<Token> = ends.keys().copied().collect();
    tokens.sort();
    let label_at: HashMap<(usize, usize), u32> = d
        .arcs
        .iter()
        .flat_map(|a| {
            [
                ((a.tail.crossing, a.tail.slot), a.label),
                ((a.head.crossing, a.head.slot), a.label),
            ]
        })
        .collect();
    let copy_key = |p: Token, _q: Token| -> Option<(u32, u32)> {
        label_at.get(&(p.crossing, p.slot)).map(|&l| (l, p.strand))
    };
    for &start in &tokens {
        let TokenEnd::Port(px, ps) = ends[&start] else { continue };
        if visited.contains(&start) {
            continue;
        }
        visited.insert(start);
        let mut cur = start;
        let mut copies = Vec::new();
        let end_port = loop {
            let nxt = link[&cur];
            copies.push(copy_key(cur, nxt).expect("arc copy"));
            visited.insert(nxt);
            match ends[&nxt] {
                TokenEnd::Port(qx, qs) => break (qx, qs),
                TokenEnd::Pass(other) => {
                    visited.insert(other);
                    cur = other;
                }
            }
        };
        let id = port_pairs.len();
        port_pairs.push(((px, ps), end_port));
        for c in copies {
            arc_of_copy.insert(c, id);
        }
    }

    // provisional labels are port-pair ids + 1
    let mut slot_label: HashMap<(usize, usize), u32> = HashMap::new();
    for (i, &(p, q)) in port_pairs.iter().enumerate() {
        slot_label.insert(p, i as u32 + 1);
        slot_label.insert(q, i as u32 + 1);
    }
    let compass_order = |up: bool| -> [usize; 4] {
        if up {
            [SOUTH, EAST, NORTH, WEST]
        } else {
            [NORTH, WEST, SOUTH, EAST]
        }
    };
    let crossings: Vec<PdCrossing> = (0..tags.len())
        .map(|cx| PdCrossing {
            pd: compass_order(north[cx]).map(|s| slot_label[&(cx, s)]),
            sign: Some(signs[cx]),
        })
        .collect();

    let mut strands = Vec::new();
    for (c, ks) in keep.iter().enumerate() {
        for &t in ks {
            strands.push(Strand { component: c, index: t });
        }
    }
    let provisional = FramedLinkDiagram::from_document(PdDocument {
        components: strands.len(),
        crossings: crossings.clone(),
        orientations: None,
        base_edges: None,
        free_loops: None,
    });
    // traced components come out in label order; regroup by strand instead
    let provisional = provisional?;
    let mut orientations: Vec<Vec<u32>> = Vec::new();
    let mut relabel: HashMap<u32, u32> = HashMap::new();
    let mut next_label = 1u32;
    for st in &strands {
        let base = d.base_edges[st.component];
        let start = base.and_then(|l| arc_of_copy.get(&(l, st.index)).copied());
        let start = start.or_else(|| {
            // base edge copy swallowed by a pass-through: any copy of this strand
            d.orientations[st.component]
                .iter()
                .find_map(|&l| arc_of_copy.get(&(l, st.index)).copied())
        });
        let mut list = Vec::new();
        if let Some(id) = start {
            let mut l = id as u32 + 1;
            loop {
                if relabel.contains_key(&l) {
                    break;
                }
                relabel.insert(l, next_label);
                list.push(next_label);
                next_label += 1;
                let a = &provisional.arcs[provisional.arc_index(l).unwrap()];
                l = provisional.crossings[a.head.crossing].pd[opposite(a.head.slot)];
            }
        }
        orientations.push(list);
    }
    if relabel.len() != provisional.arcs.len() {
        return Err(DiagramError::Components(
            "cable arcs not covered by strand traversals".into(),
        ));
    }
    let crossings: Vec<PdCrossing> = crossings
        .into_iter()
        .map(|c| PdCrossing {
            pd: c.pd.map(|l| relabel[&l]),
            sign: c.sign,
        })
        .collect();
    let diagram = FramedLinkDiagram::from_document(PdDocument {
        components: strands.len(),
        crossings,
        orientations: Some(orientations),
        base_edges: None,
        free_loops: None,
    })?;
    Ok(CableDiagram {
        diagram,
        strands,
        tags,
        colors: n.clone(),
        order,
        source: d.clone(),
    })
}
