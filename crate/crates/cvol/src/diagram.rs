//! PD codes and the oriented link-diagram model.
//!
//! A crossing `X[a,b,c,d]` lists the incoming under-edge `a` first and
//! then `b,c,d` counterclockwise. Orientations of the over-strands are
//! recovered by propagating the constraint that every edge label has
//! exactly one head and one tail occurrence. A crossing is positive
//! when the over-strand enters at slot 1 (the `b` position), which is
//! the convention where rotating the under-strand counterclockwise by
//! 90° aligns it with the over-strand.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DiagramError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("empty PD input")]
    EmptyInput,
    #[error("label {0} occurs {1} times (expected exactly 2)")]
    LabelCount(usize, usize),
    #[error("labels must cover 1..={expected_max}; saw {label}")]
    LabelRange { label: usize, expected_max: usize },
    #[error("edge {0} is used twice as an incoming under-edge")]
    NonRealizable(usize),
    #[error("inconsistent orientation at edge {0}")]
    InconsistentOrientation(usize),
    #[error("region building requires a connected diagram")]
    Disconnected,
    #[error("region building requires at least one crossing")]
    NoCrossings,
    #[error("Euler characteristic violation: {faces} faces where {expected} were expected (non-planar or corrupt PD code)")]
    EulerViolation { faces: usize, expected: usize },
    #[error("sign override has {got} entries for {want} crossings")]
    SignOverrideLength { got: usize, want: usize },
}

/// Raw PD code: one quadruple of 1-based edge labels per crossing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PdCode {
    pub crossings: Vec<[usize; 4]>,
}

impl PdCode {
    pub fn new(crossings: Vec<[usize; 4]>) -> Result<Self, DiagramError> {
        let pd = PdCode { crossings };
        pd.validate()?;
        Ok(pd)
    }

    pub fn len(&self) -> usize {
        self.crossings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.crossings.is_empty()
    }

    fn validate(&self) -> Result<(), DiagramError> {
        let n = self.crossings.len();
        let max = 2 * n;
        let mut count = vec![0usize; max + 1];
        for q in &self.crossings {
            for &lab in q {
                if lab == 0 || lab > max {
                    return Err(DiagramError::LabelRange {
                        label: lab,
                        expected_max: max,
                    });
                }
                count[lab] += 1;
            }
        }
        for (lab, &c) in count.iter().enumerate().skip(1) {
            if c != 2 {
                return Err(DiagramError::LabelCount(lab, c));
            }
        }
        Ok(())
    }
}

impl fmt::Display for PdCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, q) in self.crossings.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "X[{},{},{},{}]", q[0], q[1], q[2], q[3])?;
        }
        Ok(())
    }
}

/// Parse the PD text grammar: terms `X[a,b,c,d]` separated by
/// whitespace or commas.
pub fn parse_pd(text: &str) -> Result<PdCode, DiagramError> {
    let bytes = text.as_bytes();
    let mut i = 0;
    let mut crossings = Vec::new();
    let skip_sep = |i: &mut usize| {
        while *i < bytes.len() && (bytes[*i].is_ascii_whitespace() || bytes[*i] == b',') {
            *i += 1;
        }
    };
    skip_sep(&mut i);
    if i == bytes.len() {
        return Err(DiagramError::EmptyInput);
    }
    while i < bytes.len() {
        if bytes[i] != b'X' && bytes[i] != b'x' {
            return Err(DiagramError::Syntax {
                pos: i,
                msg: format!("expected 'X', found {:?}", text[i..].chars().next().unwrap()),
            });
        }
        i += 1;
        if i >= bytes.len() || bytes[i] != b'[' {
            return Err(DiagramError::Syntax {
                pos: i,
                msg: "expected '[' after X".into(),
            });
        }
        i += 1;
        let mut quad = [0usize; 4];
        for (k, slot) in quad.iter_mut().enumerate() {
            skip_sep(&mut i);
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i == start {
                return Err(DiagramError::Syntax {
                    pos: i,
                    msg: "expected integer label".into(),
                });
            }
            *slot = text[start..i].parse().map_err(|_| DiagramError::Syntax {
                pos: start,
                msg: "label out of range".into(),
            })?;
            skip_sep(&mut i);
            if k < 3 {
                // separators already consumed; next must be a digit
                if i >= bytes.len() || !bytes[i].is_ascii_digit() {
                    return Err(DiagramError::Syntax {
                        pos: i,
                        msg: "quadruple expected (four labels per crossing)".into(),
                    });
                }
            }
        }
        if i >= bytes.len() || bytes[i] != b']' {
            return Err(DiagramError::Syntax {
                pos: i,
                msg: "quadruple expected (']' after four labels)".into(),
            });
        }
        i += 1;
        crossings.push(quad);
        skip_sep(&mut i);
    }
    PdCode::new(crossings)
}

/// JSON alternative: `{"crossings": [[a,b,c,d], ...], "signs": [±1, ...]}`.
#[derive(Serialize, Deserialize)]
pub struct PdJson {
    pub crossings: Vec<[usize; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signs: Option<Vec<i8>>,
}

/// (crossing, slot) incidence of an edge end.
pub type Germ = (usize, usize);

#[derive(Clone, Copy, Debug)]
pub struct Crossing {
    pub quad: [usize; 4],
    /// +1 when the over-strand enters at slot 1, −1 at slot 3.
    pub sign: i8,
    pub over_in_slot: usize,
}

impl Crossing {
    pub fn under_in(&self) -> usize {
        self.quad[0]
    }
    pub fn under_out(&self) -> usize {
        self.quad[2]
    }
    pub fn over_in(&self) -> usize {
        self.quad[self.over_in_slot]
    }
    pub fn over_out(&self) -> usize {
        self.quad[4 - self.over_in_slot]
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Edge {
    /// Where the edge starts (points away from this germ).
    pub tail: Germ,
    /// Where the edge ends.
    pub head: Germ,
    /// Next edge along the link component.
    pub succ: usize,
    pub arc: usize,
    pub component: usize,
}

/// Oriented diagram model: crossings with signs, directed edges with
/// successors, and the partition of edges into over-arcs.
#[derive(Clone, Debug)]
pub struct LinkDiagram {
    pub pd: PdCode,
    pub crossings: Vec<Crossing>,
    /// Indexed by label − 1.
    pub edges: Vec<Edge>,
    pub n_arcs: usize,
    pub n_components: usize,
}

impl LinkDiagram {
    pub fn n_crossings(&self) -> usize {
        self.crossings.len()
    }

    /// Arc of the over-strand at crossing `c`.
    pub fn over_arc(&self, c: usize) -> usize {
        self.edges[self.crossings[c].over_in() - 1].arc
    }

    pub fn under_in_arc(&self, c: usize) -> usize {
        self.edges[self.crossings[c].under_in() - 1].arc
    }

    pub fn under_out_arc(&self, c: usize) -> usize {
        self.edges[self.crossings[c].under_out() - 1].arc
    }

    pub fn is_connected(&self) -> bool {
        let n = self.crossings.len();
        if n <= 1 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(c) = stack.pop() {
            for &lab in &self.crossings[c].quad {
                let e = &self.edges[lab - 1];
                for g in [e.tail.0, e.head.0] {
                    if !seen[g] {
                        seen[g] = true;
                        stack.push(g);
                    }
                }
            }
        }
        seen.iter().all(|&s| s)
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        self.0[ra] = rb;
    }
}

/// Build the oriented diagram from a PD code.
pub fn build_diagram(pd: &PdCode) -> Result<LinkDiagram, DiagramError> {
    build_diagram_with_signs(pd, None)
}

/// As `build_diagram`, with an explicit sign per crossing overriding the
/// orientation propagation (needed when no under-passage pins a
/// component's direction, e.g. some split diagrams).
pub fn build_diagram_with_signs(
    pd: &PdCode,
    signs: Option<&[i8]>,
) -> Result<LinkDiagram, DiagramError> {
    pd.validate()?;
    let n = pd.crossings.len();
    if let Some(s) = signs {
        if s.len() != n {
            return Err(DiagramError::SignOverrideLength {
                got: s.len(),
                want: n,
            });
        }
    }
    if n == 0 {
        // 0-crossing unknot component: one arc, no edges.
        return Ok(LinkDiagram {
            pd: pd.clone(),
            crossings: vec![],
            edges: vec![],
            n_arcs: 1,
            n_components: 1,
        });
    }

    let n_edges = 2 * n;
    let mut occ: Vec<Vec<Germ>> = vec![Vec::new(); n_edges + 1];
    for (ci, q) in pd.crossings.iter().enumerate() {
        for (s, &lab) in q.iter().enumerate() {
            occ[lab].push((ci, s));
        }
    }

    // role[c][s]: Some(true) = head (edge points into the crossing).
    let mut role: Vec<[Option<bool>; 4]> = vec![[None; 4]; n];
    for (ci, r) in role.iter_mut().enumerate() {
        r[0] = Some(true);
        r[2] = Some(false);
        if let Some(s) = signs {
            let slot_in = if s[ci] >= 0 { 1 } else { 3 };
            r[slot_in] = Some(true);
            r[4 - slot_in] = Some(false);
        }
    }
    // a label with both occurrences at slot 0 can never be oriented
    for (lab, os) in occ.iter().enumerate().skip(1) {
        if os.iter().filter(|(_, s)| *s == 0).count() == 2 {
            return Err(DiagramError::NonRealizable(lab));
        }
    }

    loop {
        let mut changed = false;
        for (lab, os) in occ.iter().enumerate().skip(1) {
            let (g1, g2) = (os[0], os[1]);
            let (r1, r2) = (role[g1.0][g1.1], role[g2.0][g2.1]);
            match (r1, r2) {
                (Some(a), None) => {
                    role[g2.0][g2.1] = Some(!a);
                    changed = true;
                }
                (None, Some(a)) => {
                    role[g1.0][g1.1] = Some(!a);
                    changed = true;
                }
                (Some(a), Some(b)) if a == b && g1 != g2 => {
                    return Err(DiagramError::InconsistentOrientation(lab));
                }
                _ => {}
            }
        }
        for r in role.iter_mut() {
            match (r[1], r[3]) {
                (Some(a), None) => {
                    r[3] = Some(!a);
                    changed = true;
                }
                (None, Some(a)) => {
                    r[1] = Some(!a);
                    changed = true;
                }
                (Some(a), Some(b)) if a == b => {
                    // both over slots heads or both tails
                    return Err(DiagramError::InconsistentOrientation(0));
                }
                _ => {}
            }
        }
        if !changed {
            // a component that is over everywhere leaves its crossings
            // unresolved; pick one direction (the invariant does not
            // depend on component orientations)
            if let Some(r) = role.iter_mut().find(|r| r[1].is_none()) {
                r[1] = Some(true);
                r[3] = Some(false);
                continue;
            }
            break;
        }
    }

    let mut crossings = Vec::with_capacity(n);
    for (ci, q) in pd.crossings.iter().enumerate() {
        let over_in_slot = if role[ci][1] == Some(true) { 1 } else { 3 };
        crossings.push(Crossing {
            quad: *q,
            sign: if over_in_slot == 1 { 1 } else { -1 },
            over_in_slot,
        });
    }

    let mut tail = vec![None; n_edges + 1];
    let mut head = vec![None; n_edges + 1];
    for lab in 1..=n_edges {
        for &(c, s) in &occ[lab] {
            if role[c][s] == Some(true) {
                if head[lab].replace((c, s)).is_some() {
                    return Err(DiagramError::InconsistentOrientation(lab));
                }
            } else if tail[lab].replace((c, s)).is_some() {
                return Err(DiagramError::NonRealizable(lab));
            }
        }
        if head[lab].is_none() || tail[lab].is_none() {
            return Err(DiagramError::InconsistentOrientation(lab));
        }
    }

    // successors: under_in -> under_out, over_in -> over_out
    let mut succ = vec![0usize; n_edges + 1];
    for cr in &crossings {
        succ[cr.under_in()] = cr.under_out();
        succ[cr.over_in()] = cr.over_out();
    }

    // arcs: merge over-in with over-out at every crossing
    let mut uf = UnionFind::new(n_edges + 1);
    for cr in &crossings {
        uf.union(cr.over_in(), cr.over_out());
    }
    let mut arc_of = vec![usize::MAX; n_edges + 1];
    let mut n_arcs = 0;
    for lab in 1..=n_edges {
        let root = uf.find(lab);
        if arc_of[root] == usize::MAX {
            arc_of[root] = n_arcs;
            n_arcs += 1;
        }
        arc_of[lab] = arc_of[root];
    }

    // components: cycles of the successor permutation
    let mut comp_of = vec![usize::MAX; n_edges + 1];
    let mut n_components = 0;
    for start in 1..=n_edges {
        if comp_of[start] != usize::MAX {
            continue;
        }
        let mut e = start;
        loop {
            comp_of[e] = n_components;
            e = succ[e];
            if e == start {
                break;
            }
        }
        n_components += 1;
    }

    let edges = (1..=n_edges)
        .map(|lab| Edge {
            tail: tail[lab].unwrap(),
            head: head[lab].unwrap(),
            succ: succ[lab],
            arc: arc_of[lab],
            component: comp_of[lab],
        })
        .collect();

    Ok(LinkDiagram {
        pd: pd.clone(),
        crossings,
        edges,
        n_arcs,
        n_components,
    })
}

/// A directed edge: label index (0-based) plus direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DirectedEdge {
    pub edge: usize,
    pub forward: bool,
}

/// Planar faces of the 4-valent projection, traced from the rotation
/// system implied by the counterclockwise PD slot order.
#[derive(Clone, Debug)]
pub struct RegionStructure {
    pub n_regions: usize,
    /// Face to the left of each edge (forward direction).
    pub left: Vec<usize>,
    /// Face to the right of each edge.
    pub right: Vec<usize>,
    /// For each face, its boundary as a cyclic list of directed edges
    /// (each with this face on its left).
    pub cycles: Vec<Vec<DirectedEdge>>,
    pub outer: usize,
}

impl RegionStructure {
    pub fn left_face(&self, e: DirectedEdge) -> usize {
        if e.forward {
            self.left[e.edge]
        } else {
            self.right[e.edge]
        }
    }
}

/// Compute the complementary regions of a connected diagram and verify
/// the Euler characteristic (#regions = #crossings + 2).
pub fn build_regions(d: &LinkDiagram) -> Result<RegionStructure, DiagramError> {
    let n = d.n_crossings();
    if n == 0 {
        return Err(DiagramError::NoCrossings);
    }
    if !d.is_connected() {
        return Err(DiagramError::Disconnected);
    }
    let n_edges = d.edges.len();
    // germ -> edge label occupying it
    let mut germ_edge = vec![[0usize; 4]; n];
    for (ci, cr) in d.crossings.iter().enumerate() {
        for (s, &lab) in cr.quad.iter().enumerate() {
            germ_edge[ci][s] = lab;
        }
    }
    let head_germ = |e: DirectedEdge| -> Germ {
        if e.forward {
            d.edges[e.edge].head
        } else {
            d.edges[e.edge].tail
        }
    };
    let departing = |g: Germ| -> DirectedEdge {
        let lab = germ_edge[g.0][g.1];
        let idx = lab - 1;
        if d.edges[idx].tail == g {
            DirectedEdge {
                edge: idx,
                forward: true,
            }
        } else {
            DirectedEdge {
                edge: idx,
                forward: false,
            }
        }
    };

    let mut face_of = vec![[usize::MAX; 2]; n_edges]; // [forward, backward]
    let mut cycles: Vec<Vec<DirectedEdge>> = Vec::new();
    for e0 in 0..n_edges {
        for fwd in [true, false] {
            let de0 = DirectedEdge {
                edge: e0,
                forward: fwd,
            };
            if face_of[e0][fwd as usize] != usize::MAX {
                continue;
            }
            let fid = cycles.len();
            let mut cyc = Vec::new();
            let mut cur = de0;
            loop {
                face_of[cur.edge][cur.forward as usize] = fid;
                cyc.push(cur);
                let (c, s) = head_germ(cur);
                cur = departing((c, (s + 3) % 4));
                if cur == de0 {
                    break;
                }
            }
            cycles.push(cyc);
        }
    }
    let faces = cycles.len();
    if faces != n + 2 {
        return Err(DiagramError::EulerViolation {
            faces,
            expected: n + 2,
        });
    }
    let left = (0..n_edges).map(|e| face_of[e][1]).collect();
    let right = (0..n_edges).map(|e| face_of[e][0]).collect();
    Ok(RegionStructure {
        n_regions: faces,
        left,
        right,
        cycles,
        outer: 0,
    })
}

/// The quadrant region r_c at a crossing: the face to the left of the
/// incoming under-edge at a positive crossing, and to the left of the
/// incoming over-edge at a negative crossing.
pub fn crossing_region(d: &LinkDiagram, regions: &RegionStructure, c: usize) -> usize {
    let cr = &d.crossings[c];
    let edge = if cr.sign >= 0 {
        cr.under_in() - 1
    } else {
        cr.over_in() - 1
    };
    regions.left_face(DirectedEdge { edge, forward: true })
}

pub const TREFOIL_PD: &str = "X[1,4,2,5] X[3,6,4,1] X[5,2,6,3]";
pub const FIGURE_EIGHT_PD: &str = "X[4,2,5,1] X[8,6,1,5] X[6,3,7,4] X[2,7,3,8]";
pub const K52_PD: &str = "X[1,4,2,5] X[3,8,4,9] X[5,10,6,1] X[9,6,10,7] X[7,2,8,3]";
pub const KINK_PD: &str = "X[1,1,2,2]";

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_trefoil() {
        let pd = parse_pd(TREFOIL_PD).unwrap();
        assert_eq!(pd.len(), 3);
        let mut counts = [0; 7];
        for q in &pd.crossings {
            for &l in q {
                counts[l] += 1;
            }
        }
        assert!(counts[1..].iter().all(|&c| c == 2));
    }

    #[test]
    fn parse_kink() {
        let pd = parse_pd("X[1,1,2,2]").unwrap();
        assert_eq!(pd.len(), 1);
    }

    #[test]
    fn parse_comma_separated() {
        let pd = parse_pd("X[1,4,2,5], X[3,6,4,1], X[5,2,6,3]").unwrap();
        assert_eq!(pd.len(), 3);
    }

    #[test]
    fn parse_malformed_arity() {
        let e = parse_pd("X[1,2,3]").unwrap_err();
        assert!(matches!(e, DiagramError::Syntax { .. }), "{e:?}");
    }

    #[test]
    fn parse_empty() {
        assert_eq!(parse_pd("  "), Err(DiagramError::EmptyInput));
    }

    #[test]
    fn parse_label_count_violation() {
        let e = parse_pd("X[1,2,3,4] X[1,2,3,3]").unwrap_err();
        assert!(matches!(e, DiagramError::LabelCount(..)), "{e:?}");
    }

    #[test]
    fn build_trefoil() {
        let d = build_diagram(&parse_pd(TREFOIL_PD).unwrap()).unwrap();
        assert_eq!(d.n_arcs, 3);
        assert_eq!(d.n_components, 1);
        let s0 = d.crossings[0].sign;
        assert!(d.crossings.iter().all(|c| c.sign == s0));
    }

    #[test]
    fn build_kink() {
        let d = build_diagram(&parse_pd(KINK_PD).unwrap()).unwrap();
        assert_eq!(d.n_arcs, 1);
        assert_eq!(d.crossings[0].sign.abs(), 1);
    }

    #[test]
    fn build_zero_crossings() {
        let pd = PdCode::new(vec![]).unwrap();
        let d = build_diagram(&pd).unwrap();
        assert_eq!(d.n_arcs, 1);
        assert_eq!(d.n_crossings(), 0);
    }

    #[test]
    fn build_nonrealizable() {
        // label 1 twice in the incoming-under slot
        let pd = PdCode {
            crossings: vec![[1, 2, 3, 4], [1, 4, 3, 2]],
        };
        let e = build_diagram(&pd).unwrap_err();
        assert!(
            matches!(
                e,
                DiagramError::NonRealizable(_) | DiagramError::InconsistentOrientation(_)
            ),
            "{e:?}"
        );
    }

    #[test]
    fn regions_counts() {
        for (pd, expect) in [(TREFOIL_PD, 5), (KINK_PD, 3), (FIGURE_EIGHT_PD, 6)] {
            let d = build_diagram(&parse_pd(pd).unwrap()).unwrap();
            let r = build_regions(&d).unwrap();
            assert_eq!(r.n_regions, expect, "{pd}");
            // every edge borders two distinct region incidences
            for e in 0..d.edges.len() {
                assert!(r.left[e] < r.n_regions && r.right[e] < r.n_regions);
            }
        }
    }

    #[test]
    fn regions_reject_nonplanar() {
        // virtual trefoil: orientable but genus 1
        let d = build_diagram(&parse_pd("X[3,1,4,2] X[4,2,1,3]").unwrap()).unwrap();
        let e = build_regions(&d).unwrap_err();
        assert!(matches!(e, DiagramError::EulerViolation { .. }), "{e:?}");
    }

    #[test]
    fn regions_reject_disconnected() {
        let d = build_diagram(&parse_pd("X[1,1,2,2] X[3,3,4,4]").unwrap()).unwrap();
        assert_eq!(d.n_components, 2);
        assert!(matches!(
            build_regions(&d),
            Err(DiagramError::Disconnected)
        ));
    }

    #[test]
    fn serialization_round_trip() {
        for pd_text in [TREFOIL_PD, FIGURE_EIGHT_PD, K52_PD, KINK_PD] {
            let pd = parse_pd(pd_text).unwrap();
            let again = parse_pd(&pd.to_string()).unwrap();
            assert_eq!(pd, again);
            let d1 = build_diagram(&pd).unwrap();
            let d2 = build_diagram(&again).unwrap();
            assert_eq!(d1.n_arcs, d2.n_arcs);
            for (c1, c2) in d1.crossings.iter().zip(&d2.crossings) {
                assert_eq!(c1.sign, c2.sign);
                assert_eq!(c1.over_in_slot, c2.over_in_slot);
            }
        }
    }

    #[test]
    fn edge_tracing_closes() {
        for pd_text in [TREFOIL_PD, FIGURE_EIGHT_PD, K52_PD] {
            let d = build_diagram(&parse_pd(pd_text).unwrap()).unwrap();
            assert_eq!(d.n_components, 1);
            // successor walk visits every edge exactly once
            let mut seen = vec![false; d.edges.len()];
            let mut e = 1usize;
            for _ in 0..d.edges.len() {
                assert!(!seen[e - 1]);
                seen[e - 1] = true;
                e = d.edges[e - 1].succ;
            }
            assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn sign_override() {
        let pd = parse_pd(TREFOIL_PD).unwrap();
        let natural = build_diagram(&pd).unwrap();
        let forced: Vec<i8> = natural.crossings.iter().map(|c| c.sign).collect();
        let d = build_diagram_with_signs(&pd, Some(&forced)).unwrap();
        assert_eq!(
            d.crossings.iter().map(|c| c.sign).collect::<Vec<_>>(),
            forced
        );
        // flipping one sign of a knot diagram must be rejected
        let mut bad = forced.clone();
        bad[0] = -bad[0];
        assert!(build_diagram_with_signs(&pd, Some(&bad)).is_err());
    }
}
