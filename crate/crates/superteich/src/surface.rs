//! Combinatorics of triangulated punctured surfaces: the triangulation, its
//! dual trivalent fatgraph, edge orientations and their reflection classes,
//! R+-graph connections (ratio coordinates), and the spin quadratic form.
//!
//! Triangles are oriented; side `k` runs from corner `k` to corner `k+1` in
//! the boundary orientation, and corner `k` sits between sides `k-1` and `k`.
//! Each edge records its two (triangle, side) incidences; a gluing always
//! reverses the boundary directions, which keeps the surface oriented.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::grassmann::GrassmannNumber;
use crate::moduli::OddPair;
use crate::{Error, Result};

type G = GrassmannNumber;

pub type TriId = usize;
pub type EdgeId = usize;

/// One incidence of an edge: which triangle and which of its three sides.
pub type Incidence = (TriId, u8);

#[derive(Debug, Clone)]
pub struct Triangle {
    /// Edge of each side, indexed by side slot 0..3.
    pub sides: [EdgeId; 3],
}

#[derive(Debug, Clone)]
pub struct Edge {
    pub ends: [Incidence; 2],
}

impl Edge {
    /// Both incidences belong to one triangle.
    pub fn is_self_folded(&self) -> bool {
        self.ends[0].0 == self.ends[1].0
    }
}

/// A triangulation of a punctured surface together with its dual fatgraph.
///
/// The fatgraph has one vertex per triangle and one edge per triangulation
/// edge; the cyclic order at a vertex is the side order of the triangle.
#[derive(Debug, Clone)]
pub struct SurfaceComplex {
    pub triangles: Vec<Triangle>,
    pub edges: Vec<Edge>,
    pub edge_names: Vec<String>,
    pub genus: usize,
    pub punctures: usize,
}

impl SurfaceComplex {
    /// Build and validate a complex from named gluings; each gluing pairs two
    /// (triangle, side) slots into one edge.
    pub fn build(num_triangles: usize, gluings: &[(String, Incidence, Incidence)]) -> Result<Self> {
        if num_triangles == 0 {
            return Err(Error::Surface("empty surface".into()));
        }
        let mut seen: BTreeMap<Incidence, String> = BTreeMap::new();
        let mut triangles = vec![
            Triangle {
                sides: [usize::MAX; 3]
            };
            num_triangles
        ];
        let mut edges = Vec::new();
        let mut edge_names = Vec::new();
        for (name, a, b) in gluings {
            for inc in [a, b] {
                if inc.0 >= num_triangles || inc.1 > 2 {
                    return Err(Error::Surface(format!(
                        "gluing `{name}` references missing side {inc:?}"
                    )));
                }
                if let Some(prev) = seen.insert(*inc, name.clone()) {
                    return Err(Error::Surface(format!(
                        "side {inc:?} glued twice, by `{prev}` and `{name}`"
                    )));
                }
            }
            if a == b {
                return Err(Error::Surface(format!(
                    "gluing `{name}` pairs a side with itself"
                )));
            }
            let id = edges.len();
            edges.push(Edge { ends: [*a, *b] });
            edge_names.push(name.clone());
            triangles[a.0].sides[a.1 as usize] = id;
            triangles[b.0].sides[b.1 as usize] = id;
        }
        for (t, tri) in triangles.iter().enumerate() {
            for (s, &e) in tri.sides.iter().enumerate() {
                if e == usize::MAX {
                    return Err(Error::Surface(format!("triangle {t} side {s} is unglued")));
                }
            }
        }
        let mut complex = SurfaceComplex {
            triangles,
            edges,
            edge_names,
            genus: 0,
            punctures: 0,
        };
        if !complex.is_connected() {
            return Err(Error::Surface("surface is not connected".into()));
        }
        let s = complex.count_punctures();
        let e = complex.edges.len() as i64;
        let f = complex.triangles.len() as i64;
        // With punctures as vertices, chi = s - e + f = 2 - 2g.
        let chi = s as i64 - e + f;
        if chi % 2 != 0 || chi > 2 {
            return Err(Error::Surface(format!(
                "inconsistent Euler characteristic {chi}"
            )));
        }
        let g = (2 - chi) / 2;
        if g < 0 {
            return Err(Error::Surface("negative genus".into()));
        }
        complex.genus = g as usize;
        complex.punctures = s;
        if s < 1 || 2 * complex.genus + s < 3 {
            return Err(Error::Surface(format!(
                "surface F_{g}^{s} is outside the supported range (need s >= 1, 2g+s-2 > 0)"
            )));
        }
        Ok(complex)
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.triangles.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(t) = stack.pop() {
            for &e in &self.triangles[t].sides {
                for end in self.edges[e].ends {
                    if !seen[end.0] {
                        seen[end.0] = true;
                        stack.push(end.0);
                    }
                }
            }
        }
        seen.into_iter().all(|b| b)
    }

    /// Walk corner links around the triangulation vertices (punctures).
    fn count_punctures(&self) -> usize {
        // Crossing side k from corner k lands at the far end's corner m+1
        // where m is the glued side slot there.
        let mut visited = vec![[false; 3]; self.triangles.len()];
        let mut count = 0;
        for t0 in 0..self.triangles.len() {
            for k0 in 0..3u8 {
                if visited[t0][k0 as usize] {
                    continue;
                }
                count += 1;
                let (mut t, mut k) = (t0, k0);
                loop {
                    if visited[t][k as usize] {
                        break;
                    }
                    visited[t][k as usize] = true;
                    let e = self.triangles[t].sides[k as usize];
                    let (far_t, far_s) = self.far_end(e, (t, k));
                    t = far_t;
                    k = (far_s + 1) % 3;
                }
            }
        }
        count
    }

    /// The other incidence of edge `e` as seen from `inc`.
    pub fn far_end(&self, e: EdgeId, inc: Incidence) -> Incidence {
        let edge = &self.edges[e];
        if edge.ends[0] == inc {
            edge.ends[1]
        } else {
            edge.ends[0]
        }
    }

    pub fn edge_id(&self, name: &str) -> Option<EdgeId> {
        self.edge_names.iter().position(|n| n == name)
    }

    /// Number of fatgraph ends of edge `e` at vertex (triangle) `v`.
    pub fn ends_at(&self, e: EdgeId, v: TriId) -> usize {
        self.edges[e].ends.iter().filter(|inc| inc.0 == v).count()
    }
}

/// A total orientation of the fatgraph edges. `forward` means the edge points
/// from its first listed incidence to the second.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orientation {
    pub forward: Vec<bool>,
}

impl Orientation {
    pub fn all_forward(surface: &SurfaceComplex) -> Self {
        Orientation {
            forward: vec![true; surface.edges.len()],
        }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        Orientation {
            forward: bits.to_vec(),
        }
    }

    /// True if edge `e` points towards triangle `t`.
    pub fn points_into(&self, surface: &SurfaceComplex, e: EdgeId, t: TriId) -> bool {
        let edge = &surface.edges[e];
        let head = if self.forward[e] {
            edge.ends[1].0
        } else {
            edge.ends[0].0
        };
        head == t
    }

    /// Fatgraph reflection at vertex `v`: reverse every incident edge; a loop
    /// is reversed twice and stays put.
    pub fn reflect(&self, surface: &SurfaceComplex, v: TriId) -> Result<Self> {
        if v >= surface.triangles.len() {
            return Err(Error::Surface(format!("unknown vertex {v}")));
        }
        let mut out = self.clone();
        for e in 0..surface.edges.len() {
            if surface.ends_at(e, v) % 2 == 1 {
                out.forward[e] = !out.forward[e];
            }
        }
        Ok(out)
    }
}

/// GF(2) row space of the vertex reflection vectors.
fn reflection_basis(surface: &SurfaceComplex) -> Vec<u64> {
    let ne = surface.edges.len();
    assert!(ne <= 64);
    let rows: Vec<u64> = (0..surface.triangles.len())
        .map(|v| {
            let mut row = 0u64;
            for e in 0..ne {
                if surface.ends_at(e, v) % 2 == 1 {
                    row |= 1 << e;
                }
            }
            row
        })
        .collect();
    gf2_reduce(rows)
}

fn gf2_reduce(rows: Vec<u64>) -> Vec<u64> {
    let mut basis: Vec<u64> = Vec::new();
    for mut r in rows {
        for b in &basis {
            let pivot = 63 - b.leading_zeros();
            if r >> pivot & 1 == 1 {
                r ^= b;
            }
        }
        if r != 0 {
            basis.push(r);
            basis.sort_by_key(|b| std::cmp::Reverse(*b));
        }
    }
    basis
}

fn gf2_member(basis: &[u64], mut v: u64) -> bool {
    for b in basis {
        let pivot = 63 - b.leading_zeros();
        if v >> pivot & 1 == 1 {
            v ^= b;
        }
    }
    v == 0
}

/// Whether two orientations differ by a finite set of fatgraph reflections.
pub fn same_orientation_class(
    surface: &SurfaceComplex,
    o1: &Orientation,
    o2: &Orientation,
) -> Result<bool> {
    if o1.forward.len() != surface.edges.len() || o2.forward.len() != surface.edges.len() {
        return Err(Error::Surface("orientation does not match fatgraph".into()));
    }
    let mut delta = 0u64;
    for e in 0..surface.edges.len() {
        if o1.forward[e] != o2.forward[e] {
            delta |= 1 << e;
        }
    }
    Ok(gf2_member(&reflection_basis(surface), delta))
}

/// Number of orientation classes `2^{#edges} / 2^{rank}`.
pub fn orientation_class_count(surface: &SurfaceComplex) -> usize {
    1 << (surface.edges.len() - reflection_basis(surface).len())
}

/// Canonical class representative: reduce the difference to the all-forward
/// orientation by the GF(2) basis, edges taken in index order.
pub fn canonical_orientation(surface: &SurfaceComplex, o: &Orientation) -> Orientation {
    let basis = reflection_basis(surface);
    let mut v = 0u64;
    for e in 0..surface.edges.len() {
        if !o.forward[e] {
            v |= 1 << e;
        }
    }
    for b in &basis {
        let pivot = 63 - b.leading_zeros();
        if v >> pivot & 1 == 1 {
            v ^= b;
        }
    }
    Orientation {
        forward: (0..surface.edges.len()).map(|e| v >> e & 1 == 0).collect(),
    }
}

/// The coordinate data of the theory: a lambda-length per edge, an ordered
/// odd pair per triangle, and a ratio per oriented edge.
///
/// The stored ratio of edge `e` is the value assigned to the triangle of its
/// first incidence; the far side carries the inverse, so `h_e h_e' = 1` holds
/// structurally. Gauge acts trivially on loops.
#[derive(Debug, Clone)]
pub struct CoordinateVector {
    pub ngen: u32,
    pub lambda: Vec<G>,
    pub theta: Vec<OddPair>,
    pub ratio: Vec<G>,
}

impl CoordinateVector {
    /// All lambda-lengths and ratios 1, all fermions zero.
    pub fn unit(surface: &SurfaceComplex, ngen: u32) -> Self {
        CoordinateVector {
            ngen,
            lambda: vec![G::one(ngen); surface.edges.len()],
            theta: vec![(G::zero(ngen), G::zero(ngen)); surface.triangles.len()],
            ratio: vec![G::one(ngen); surface.edges.len()],
        }
    }

    /// Generator pool size for a surface: two fermions per triangle plus four
    /// scratch generators.
    pub fn pool_for(surface: &SurfaceComplex) -> u32 {
        2 * surface.triangles.len() as u32 + 4
    }

    pub fn validate(&self, surface: &SurfaceComplex) -> Result<()> {
        if self.lambda.len() != surface.edges.len()
            || self.ratio.len() != surface.edges.len()
            || self.theta.len() != surface.triangles.len()
        {
            return Err(Error::Surface("coordinate vector has wrong shape".into()));
        }
        for l in &self.lambda {
            if !l.is_positive_even() {
                return Err(Error::Domain("lambda-length must be positive even".into()));
            }
        }
        for h in &self.ratio {
            if !h.is_positive_even() {
                return Err(Error::Domain("ratio must be positive even".into()));
            }
        }
        for (t1, t2) in &self.theta {
            if !t1.is_odd() || !t2.is_odd() {
                return Err(Error::Parity("triangle fermions must be odd".into()));
            }
        }
        Ok(())
    }

    /// Ratio assigned to the side `(t, slot)` of the edge there.
    pub fn ratio_at(&self, surface: &SurfaceComplex, t: TriId, slot: u8) -> Result<G> {
        let e = surface.triangles[t].sides[slot as usize];
        if surface.edges[e].ends[0] == (t, slot) {
            Ok(self.ratio[e].clone())
        } else {
            self.ratio[e].inv()
        }
    }

    pub fn set_ratio_at(
        &mut self,
        surface: &SurfaceComplex,
        t: TriId,
        slot: u8,
        value: G,
    ) -> Result<()> {
        let e = surface.triangles[t].sides[slot as usize];
        if surface.edges[e].ends[0] == (t, slot) {
            self.ratio[e] = value;
        } else {
            self.ratio[e] = value.inv()?;
        }
        Ok(())
    }

    /// Vertex rescaling at triangle `t` by positive even `alpha`: the ratios
    /// of its non-loop sides scale by `alpha`, the fermions by the pair
    /// action of `alpha^{-1}`; loop values are gauge-invariant.
    pub fn vertex_rescale(
        &self,
        surface: &SurfaceComplex,
        t: TriId,
        alpha: &G,
    ) -> Result<CoordinateVector> {
        if !alpha.is_positive_even() {
            return Err(Error::Domain("rescaling must be positive even".into()));
        }
        let mut out = self.clone();
        let ai = alpha.inv()?;
        for e in 0..surface.edges.len() {
            let edge = &surface.edges[e];
            if edge.is_self_folded() {
                continue;
            }
            if edge.ends[0].0 == t {
                out.ratio[e] = alpha * &out.ratio[e];
            } else if edge.ends[1].0 == t {
                out.ratio[e] = &ai * &out.ratio[e];
            }
        }
        let (t1, t2) = &self.theta[t];
        out.theta[t] = (&ai * t1, alpha * t2);
        Ok(out)
    }

    /// Product of the three side ratios of triangle `t` (loops contribute 1).
    pub fn vertex_product(&self, surface: &SurfaceComplex, t: TriId) -> Result<G> {
        let mut p = G::one(self.ngen);
        for slot in 0..3u8 {
            p = &p * &self.ratio_at(surface, t, slot)?;
        }
        Ok(p)
    }

    /// Gauge-fix so that every triangle's side ratios multiply to 1.
    ///
    /// Solves the log-linear system on vertex rescalings; the all-equal
    /// rescaling acts trivially and the total product is 1, so grounding one
    /// triangle makes the reduced system exactly solvable.
    pub fn normalize_ratios(&self, surface: &SurfaceComplex) -> Result<CoordinateVector> {
        let nt = surface.triangles.len();
        let mut mat = vec![vec![0.0f64; nt]; nt];
        for edge in &surface.edges {
            if edge.ends[0].0 == edge.ends[1].0 {
                continue;
            }
            let (u, v) = (edge.ends[0].0, edge.ends[1].0);
            mat[u][u] += 1.0;
            mat[v][v] += 1.0;
            mat[u][v] -= 1.0;
            mat[v][u] -= 1.0;
        }
        let mut rhs: Vec<G> = Vec::with_capacity(nt);
        for t in 0..nt {
            rhs.push(self.vertex_product(surface, t)?.ln_even()?.scale(-1.0));
        }
        let n = nt - 1;
        let mut u = vec![G::zero(self.ngen); nt];
        if n > 0 {
            let mut a = vec![vec![0.0f64; n]; n];
            for i in 0..n {
                for j in 0..n {
                    a[i][j] = mat[i + 1][j + 1];
                }
            }
            let mut b: Vec<G> = rhs[1..].to_vec();
            for col in 0..n {
                let piv = (col..n)
                    .max_by(|&r1, &r2| a[r1][col].abs().partial_cmp(&a[r2][col].abs()).unwrap())
                    .unwrap();
                if a[piv][col].abs() < 1e-12 {
                    return Err(Error::Surface("gauge system is singular".into()));
                }
                a.swap(col, piv);
                b.swap(col, piv);
                let d = a[col][col];
                for j in 0..n {
                    a[col][j] /= d;
                }
                b[col] = b[col].scale(1.0 / d);
                for r in 0..n {
                    if r == col || a[r][col].abs() < 1e-15 {
                        continue;
                    }
                    let f = a[r][col];
                    for j in 0..n {
                        a[r][j] -= f * a[col][j];
                    }
                    b[r] = &b[r] - &b[col].scale(f);
                }
            }
            for i in 0..n {
                u[i + 1] = b[i].clone();
            }
        }
        let mut out = self.clone();
        for (t, ut) in u.iter().enumerate() {
            if ut.is_zero() {
                continue;
            }
            out = out.vertex_rescale(surface, t, &ut.exp_even()?)?;
        }
        Ok(out)
    }
}

/// A closed fatgraph path: a start triangle entered through `entry_slot`,
/// followed by the exit slots taken at each triangle in turn.
#[derive(Debug, Clone)]
pub struct FatPath {
    pub start: TriId,
    pub entry_slot: u8,
    pub exits: Vec<u8>,
}

/// One step of a resolved path.
#[derive(Debug, Clone, Copy)]
pub struct PathStep {
    pub tri: TriId,
    pub entry_slot: u8,
    pub exit_slot: u8,
    pub edge: EdgeId,
    /// next triangle and the slot the path enters it through
    pub next: Incidence,
}

/// Resolve a path into steps, checking closure and forbidding backtracks.
pub fn resolve_path(surface: &SurfaceComplex, path: &FatPath) -> Result<Vec<PathStep>> {
    let mut steps = Vec::new();
    let (mut tri, mut entry) = (path.start, path.entry_slot);
    for &exit in &path.exits {
        if exit > 2 {
            return Err(Error::Path(format!("bad slot {exit}")));
        }
        if exit == entry {
            return Err(Error::Path("path backtracks through its entry side".into()));
        }
        let edge = surface.triangles[tri].sides[exit as usize];
        let next = surface.far_end(edge, (tri, exit));
        steps.push(PathStep {
            tri,
            entry_slot: entry,
            exit_slot: exit,
            edge,
            next,
        });
        tri = next.0;
        entry = next.1;
    }
    if tri != path.start {
        return Err(Error::Path(format!(
            "path is not closed: ended at triangle {tri}"
        )));
    }
    Ok(steps)
}

/// Left turn: the exit side is the cyclic successor of the entry side.
pub fn is_left_turn(entry: u8, exit: u8) -> bool {
    (entry + 1) % 3 == exit
}

/// Spin quadratic form `q(γ) = (-1)^L (-1)^N` of a closed cycle: `L` left
/// turns, `N` edges traversed in agreement with the orientation.
pub fn spin_quadratic_form(
    surface: &SurfaceComplex,
    omega: &Orientation,
    path: &FatPath,
) -> Result<i32> {
    let steps = resolve_path(surface, path)?;
    if steps.is_empty() {
        return Err(Error::Path("empty cycle".into()));
    }
    let last = steps.last().unwrap();
    if last.next != (path.start, path.entry_slot) {
        return Err(Error::Path(
            "cycle must re-enter the start triangle through its entry slot".into(),
        ));
    }
    let mut lefts = 0usize;
    let mut agree = 0usize;
    for step in &steps {
        if is_left_turn(step.entry_slot, step.exit_slot) {
            lefts += 1;
        }
        let edge = &surface.edges[step.edge];
        let traversed_forward = edge.ends[0] == (step.tri, step.exit_slot);
        if traversed_forward == omega.forward[step.edge] {
            agree += 1;
        }
    }
    Ok(if (lefts + agree) % 2 == 0 { 1 } else { -1 })
}

/// Right-turn form `(-1)^R (-1)^{Nbar}`; always equals the left-turn form.
pub fn spin_quadratic_form_right(
    surface: &SurfaceComplex,
    omega: &Orientation,
    path: &FatPath,
) -> Result<i32> {
    let steps = resolve_path(surface, path)?;
    let mut rights = 0usize;
    let mut disagree = 0usize;
    for step in &steps {
        if !is_left_turn(step.entry_slot, step.exit_slot) {
            rights += 1;
        }
        let edge = &surface.edges[step.edge];
        let traversed_forward = edge.ends[0] == (step.tri, step.exit_slot);
        if traversed_forward != omega.forward[step.edge] {
            disagree += 1;
        }
    }
    Ok(if (rights + disagree) % 2 == 0 { 1 } else { -1 })
}

// ---------------------------------------------------------------------------
// Fixture complexes
// ---------------------------------------------------------------------------

/// Once-punctured torus: two triangles with opposite sides identified.
pub fn f11_complex() -> SurfaceComplex {
    SurfaceComplex::build(
        2,
        &[
            ("a".into(), (0, 0), (1, 0)),
            ("b".into(), (0, 1), (1, 1)),
            ("e".into(), (0, 2), (1, 2)),
        ],
    )
    .expect("F_1^1 complex")
}

/// Thrice-punctured sphere: each triangle folded onto itself along its two
/// non-diagonal sides.
pub fn f03_complex() -> SurfaceComplex {
    SurfaceComplex::build(
        2,
        &[
            ("a".into(), (0, 0), (0, 1)),
            ("b".into(), (1, 0), (1, 1)),
            ("e".into(), (0, 2), (1, 2)),
        ],
    )
    .expect("F_0^3 complex")
}

/// Four-punctured sphere as the boundary of a tetrahedron; around every edge
/// the quadrilateral has four distinct sides.
pub fn f04_complex() -> SurfaceComplex {
    // Faces with outward orientation, vertices 0..4:
    // T0=(0,1,2), T1=(0,2,3), T2=(0,3,1), T3=(3,2,1)
    SurfaceComplex::build(
        4,
        &[
            ("e01".into(), (0, 0), (2, 2)),
            ("e12".into(), (0, 1), (3, 1)),
            ("e20".into(), (0, 2), (1, 0)),
            ("e23".into(), (1, 1), (3, 0)),
            ("e30".into(), (1, 2), (2, 0)),
            ("e31".into(), (2, 1), (3, 2)),
        ],
    )
    .expect("F_0^4 complex")
}

/// Genus-two surface with one puncture from the standard octagon with
/// identification a b a^- b^- c d c^- d^-, triangulated from one vertex.
pub fn f21_complex() -> SurfaceComplex {
    SurfaceComplex::build(
        6,
        &[
            ("d2".into(), (0, 2), (1, 0)),
            ("d3".into(), (1, 2), (2, 0)),
            ("d4".into(), (2, 2), (3, 0)),
            ("d5".into(), (3, 2), (4, 0)),
            ("d6".into(), (4, 2), (5, 0)),
            ("a".into(), (0, 0), (1, 1)),
            ("b".into(), (0, 1), (2, 1)),
            ("c".into(), (3, 1), (5, 1)),
            ("d".into(), (4, 1), (5, 2)),
        ],
    )
    .expect("F_2^1 complex")
}

// ---------------------------------------------------------------------------
// Surface file format
// ---------------------------------------------------------------------------

/// Serialize a surface, optional orientations and coordinates.
pub fn to_surface_file(
    surface: &SurfaceComplex,
    coords: &CoordinateVector,
    omega_sigma: Option<&Orientation>,
    omega_iota: Option<&Orientation>,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "surface v1");
    let _ = writeln!(out, "pool {}", coords.ngen);
    for t in 0..surface.triangles.len() {
        let _ = writeln!(out, "triangle t{t} s{t}_0 s{t}_1 s{t}_2");
    }
    for (e, edge) in surface.edges.iter().enumerate() {
        let a = edge.ends[0];
        let b = edge.ends[1];
        let _ = writeln!(
            out,
            "gluing {} s{}_{} s{}_{}",
            surface.edge_names[e], a.0, a.1, b.0, b.1
        );
    }
    for (label, omega) in [("sigma", omega_sigma), ("iota", omega_iota)] {
        if let Some(o) = omega {
            let parts: Vec<String> = (0..surface.edges.len())
                .map(|e| {
                    format!(
                        "{}:{}",
                        surface.edge_names[e],
                        if o.forward[e] { "+" } else { "-" }
                    )
                })
                .collect();
            let _ = writeln!(out, "orientation {label} {}", parts.join(" "));
        }
    }
    let _ = writeln!(out, "coordinates");
    for e in 0..surface.edges.len() {
        let _ = writeln!(
            out,
            "lambda {} {}",
            surface.edge_names[e],
            coords.lambda[e].to_text()
        );
    }
    for (t, (t1, t2)) in coords.theta.iter().enumerate() {
        let _ = writeln!(out, "theta t{t} {} {}", t1.to_text(), t2.to_text());
    }
    for e in 0..surface.edges.len() {
        let _ = writeln!(
            out,
            "ratio {} {}",
            surface.edge_names[e],
            coords.ratio[e].to_text()
        );
    }
    out
}

/// Parsed contents of a surface file.
#[derive(Debug, Clone)]
pub struct SurfaceFile {
    pub surface: SurfaceComplex,
    pub coords: CoordinateVector,
    pub omega_sigma: Orientation,
    pub omega_iota: Orientation,
}

pub fn parse_surface_file(text: &str) -> Result<SurfaceFile> {
    let mut pool: Option<u32> = None;
    let mut tri_names: Vec<String> = Vec::new();
    let mut side_owner: BTreeMap<String, Incidence> = BTreeMap::new();
    let mut gluings: Vec<(String, Incidence, Incidence)> = Vec::new();
    let mut orientation_lines: Vec<(usize, String, String)> = Vec::new();
    let mut coord_lines: Vec<(usize, String)> = Vec::new();
    let mut saw_header = false;

    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        let lineno = no + 1;
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let kw = it.next().unwrap();
        let err = |msg: &str| Error::Parse {
            line: lineno,
            msg: msg.to_string(),
        };
        match kw {
            "surface" => {
                if it.next() != Some("v1") {
                    return Err(err("unsupported surface file version"));
                }
                saw_header = true;
            }
            "pool" => {
                let n: u32 = it
                    .next()
                    .ok_or_else(|| err("pool needs a size"))?
                    .parse()
                    .map_err(|_| err("bad pool size"))?;
                pool = Some(n);
            }
            "triangle" => {
                let name = it.next().ok_or_else(|| err("triangle needs a name"))?;
                let t = tri_names.len();
                tri_names.push(name.to_string());
                for slot in 0..3u8 {
                    let side = it
                        .next()
                        .ok_or_else(|| err("triangle needs three side identifiers"))?;
                    if side_owner.insert(side.to_string(), (t, slot)).is_some() {
                        return Err(err(&format!("side identifier `{side}` reused")));
                    }
                }
            }
            "gluing" => {
                let name = it.next().ok_or_else(|| err("gluing needs an edge name"))?;
                let sa = it.next().ok_or_else(|| err("gluing needs two sides"))?;
                let sb = it.next().ok_or_else(|| err("gluing needs two sides"))?;
                let a = *side_owner
                    .get(sa)
                    .ok_or_else(|| err(&format!("unknown side `{sa}`")))?;
                let b = *side_owner
                    .get(sb)
                    .ok_or_else(|| err(&format!("unknown side `{sb}`")))?;
                gluings.push((name.to_string(), a, b));
            }
            "orientation" => {
                let label = it.next().ok_or_else(|| err("orientation needs a label"))?;
                orientation_lines.push((
                    lineno,
                    label.to_string(),
                    it.collect::<Vec<_>>().join(" "),
                ));
            }
            "coordinates" => {}
            "lambda" | "theta" | "ratio" => {
                coord_lines.push((lineno, line.to_string()));
            }
            other => {
                return Err(err(&format!("unknown keyword `{other}`")));
            }
        }
    }
    if !saw_header {
        return Err(Error::Parse {
            line: 1,
            msg: "missing `surface v1` header".into(),
        });
    }
    let surface = SurfaceComplex::build(tri_names.len(), &gluings)?;
    let ngen = pool.unwrap_or_else(|| CoordinateVector::pool_for(&surface));
    let mut coords = CoordinateVector::unit(&surface, ngen);
    for (lineno, line) in coord_lines {
        let err = |msg: String| Error::Parse { line: lineno, msg };
        let mut it = line.split_whitespace();
        let kw = it.next().unwrap();
        match kw {
            "lambda" | "ratio" => {
                let name = it
                    .next()
                    .ok_or_else(|| err(format!("{kw} needs an edge")))?;
                let e = surface
                    .edge_id(name)
                    .ok_or_else(|| err(format!("unknown edge `{name}`")))?;
                let val = it
                    .next()
                    .ok_or_else(|| err(format!("{kw} needs a value")))?;
                let g = G::from_text(ngen, val).map_err(|e| err(e.to_string()))?;
                if kw == "lambda" {
                    coords.lambda[e] = g;
                } else {
                    coords.ratio[e] = g;
                }
            }
            "theta" => {
                let name = it
                    .next()
                    .ok_or_else(|| err("theta needs a triangle".into()))?;
                let t = tri_names
                    .iter()
                    .position(|n| n == name)
                    .ok_or_else(|| err(format!("unknown triangle `{name}`")))?;
                let v1 = it
                    .next()
                    .ok_or_else(|| err("theta needs two values".into()))?;
                let v2 = it
                    .next()
                    .ok_or_else(|| err("theta needs two values".into()))?;
                coords.theta[t] = (
                    G::from_text(ngen, v1).map_err(|e| err(e.to_string()))?,
                    G::from_text(ngen, v2).map_err(|e| err(e.to_string()))?,
                );
            }
            _ => unreachable!(),
        }
    }
    coords.validate(&surface)?;
    let mut omega_sigma = Orientation::all_forward(&surface);
    let mut omega_iota = Orientation::all_forward(&surface);
    for (lineno, label, rest) in orientation_lines {
        let err = |msg: String| Error::Parse { line: lineno, msg };
        let target = match label.as_str() {
            "sigma" => &mut omega_sigma,
            "iota" => &mut omega_iota,
            other => return Err(err(format!("unknown orientation label `{other}`"))),
        };
        for tok in rest.split_whitespace() {
            let (name, dir) = tok
                .split_once(':')
                .ok_or_else(|| err(format!("bad orientation token `{tok}`")))?;
            let e = surface
                .edge_id(name)
                .ok_or_else(|| err(format!("unknown edge `{name}`")))?;
            target.forward[e] = match dir {
                "+" => true,
                "-" => false,
                _ => return Err(err(format!("bad direction `{dir}`"))),
            };
        }
    }
    Ok(SurfaceFile {
        surface,
        coords,
        omega_sigma,
        omega_iota,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::GrassmannNumber as GN;

    #[test]
    fn f11_counts() {
        let s = f11_complex();
        assert_eq!(s.genus, 1);
        assert_eq!(s.punctures, 1);
        assert_eq!(s.edges.len(), 3);
    }

    #[test]
    fn f03_counts() {
        let s = f03_complex();
        assert_eq!(s.genus, 0);
        assert_eq!(s.punctures, 3);
        assert!(s.edges[s.edge_id("a").unwrap()].is_self_folded());
        assert!(!s.edges[s.edge_id("e").unwrap()].is_self_folded());
    }

    #[test]
    fn f21_counts() {
        let s = f21_complex();
        assert_eq!(s.genus, 2);
        assert_eq!(s.punctures, 1);
        assert_eq!(s.edges.len(), 9);
        assert_eq!(s.triangles.len(), 6);
    }

    #[test]
    fn f04_counts() {
        let s = f04_complex();
        assert_eq!(s.genus, 0);
        assert_eq!(s.punctures, 4);
        assert_eq!(s.edges.len(), 6);
    }

    #[test]
    fn unglued_side_rejected() {
        let r = SurfaceComplex::build(1, &[("x".into(), (0, 0), (0, 1))]);
        assert!(matches!(r, Err(Error::Surface(_))));
    }

    #[test]
    fn reflect_involution_and_commutation() {
        let s = f21_complex();
        let o = Orientation::all_forward(&s);
        let r1 = o.reflect(&s, 1).unwrap();
        assert_eq!(o, r1.reflect(&s, 1).unwrap());
        let a = o.reflect(&s, 0).unwrap().reflect(&s, 4).unwrap();
        let b = o.reflect(&s, 4).unwrap().reflect(&s, 0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn f11_reflection_touches_all_edges() {
        let s = f11_complex();
        let o = Orientation::all_forward(&s);
        let r = o.reflect(&s, 0).unwrap();
        assert!(r.forward.iter().all(|f| !f));
    }

    #[test]
    fn orientation_classes_f11() {
        let s = f11_complex();
        assert_eq!(orientation_class_count(&s), 4);
        let mut reps: Vec<Orientation> = Vec::new();
        for bits in 0..8u32 {
            let o = Orientation::from_bits(&[(bits & 1) != 0, (bits & 2) != 0, (bits & 4) != 0]);
            if !reps
                .iter()
                .any(|r| same_orientation_class(&s, r, &o).unwrap())
            {
                reps.push(o);
            }
        }
        assert_eq!(reps.len(), 4);
    }

    #[test]
    fn reflected_orientation_same_class() {
        let s = f21_complex();
        let o = Orientation::all_forward(&s);
        let r = o.reflect(&s, 3).unwrap();
        assert!(same_orientation_class(&s, &o, &r).unwrap());
        // a single-edge change along a nontrivial cycle is a different class
        let mut single = o.clone();
        single.forward[5] = false;
        assert!(!same_orientation_class(&s, &o, &single).unwrap());
    }

    #[test]
    fn canonical_orientation_stable() {
        let s = f11_complex();
        let o = Orientation::from_bits(&[false, true, false]);
        let c1 = canonical_orientation(&s, &o);
        let c2 = canonical_orientation(&s, &o.reflect(&s, 1).unwrap());
        assert_eq!(c1, c2);
        assert!(same_orientation_class(&s, &o, &c1).unwrap());
    }

    #[test]
    fn vertex_rescale_round_trip() {
        let s = f04_complex();
        let ngen = CoordinateVector::pool_for(&s);
        let mut c = CoordinateVector::unit(&s, ngen);
        c.theta[1] = (GN::generator(ngen, 2), GN::generator(ngen, 3));
        let alpha = &GN::scalar(ngen, 1.5) + &GN::monomial(ngen, &[0, 1], 0.2);
        let up = c.vertex_rescale(&s, 1, &alpha).unwrap();
        let back = up.vertex_rescale(&s, 1, &alpha.inv().unwrap()).unwrap();
        for e in 0..s.edges.len() {
            assert!(back.ratio[e].approx_eq(&c.ratio[e], 1e-12));
        }
        assert!(back.theta[1].0.approx_eq(&c.theta[1].0, 1e-12));
        let p0 = &c.theta[1].0 * &c.theta[1].1;
        let p1 = &up.theta[1].0 * &up.theta[1].1;
        assert!(p0.approx_eq(&p1, 1e-12));
    }

    #[test]
    fn identity_rescale() {
        let s = f11_complex();
        let ngen = CoordinateVector::pool_for(&s);
        let c = CoordinateVector::unit(&s, ngen);
        let same = c.vertex_rescale(&s, 0, &GN::one(ngen)).unwrap();
        for e in 0..s.edges.len() {
            assert_eq!(same.ratio[e], c.ratio[e]);
        }
    }

    #[test]
    fn normalize_ratios_unit_products() {
        for s in [f11_complex(), f03_complex(), f21_complex()] {
            let ngen = CoordinateVector::pool_for(&s);
            let mut c = CoordinateVector::unit(&s, ngen);
            for (e, r) in c.ratio.iter_mut().enumerate() {
                *r = GN::scalar(ngen, 1.0 + 0.31 * (e as f64 + 1.0));
            }
            let n = c.normalize_ratios(&s).unwrap();
            for t in 0..s.triangles.len() {
                let p = n.vertex_product(&s, t).unwrap();
                assert!(p.approx_eq(&GN::one(ngen), 1e-9), "triangle {t} product {p}");
            }
        }
    }

    #[test]
    fn normalize_keeps_unit_fixed() {
        let s = f11_complex();
        let ngen = CoordinateVector::pool_for(&s);
        let c = CoordinateVector::unit(&s, ngen);
        let n = c.normalize_ratios(&s).unwrap();
        for e in 0..s.edges.len() {
            assert!(n.ratio[e].approx_eq(&c.ratio[e], 1e-12));
        }
    }

    #[test]
    fn normalize_f11_explicit() {
        let s = f11_complex();
        let ngen = CoordinateVector::pool_for(&s);
        let mut c = CoordinateVector::unit(&s, ngen);
        c.ratio[0] = GN::scalar(ngen, 2.0);
        let n = c.normalize_ratios(&s).unwrap();
        for t in 0..2 {
            assert!(n
                .vertex_product(&s, t)
                .unwrap()
                .approx_eq(&GN::one(ngen), 1e-9));
        }
    }

    #[test]
    fn spin_form_formulas_agree() {
        let s = f11_complex();
        let path = FatPath {
            start: 0,
            entry_slot: 2,
            exits: vec![0, 2],
        };
        for bits in 0..8u32 {
            let o = Orientation::from_bits(&[(bits & 1) != 0, (bits & 2) != 0, (bits & 4) != 0]);
            let l = spin_quadratic_form(&s, &o, &path).unwrap();
            let r = spin_quadratic_form_right(&s, &o, &path).unwrap();
            assert_eq!(l, r);
        }
    }

    #[test]
    fn spin_form_reflection_invariant() {
        let s = f11_complex();
        let path = FatPath {
            start: 0,
            entry_slot: 2,
            exits: vec![0, 2],
        };
        for bits in 0..8u32 {
            let o = Orientation::from_bits(&[(bits & 1) != 0, (bits & 2) != 0, (bits & 4) != 0]);
            let q0 = spin_quadratic_form(&s, &o, &path).unwrap();
            for v in 0..2 {
                let r = o.reflect(&s, v).unwrap();
                assert_eq!(q0, spin_quadratic_form(&s, &r, &path).unwrap());
            }
        }
    }

    #[test]
    fn surface_file_round_trip() {
        let s = f11_complex();
        let ngen = CoordinateVector::pool_for(&s);
        let mut c = CoordinateVector::unit(&s, ngen);
        c.theta[0] = (GN::generator(ngen, 0), GN::generator(ngen, 1));
        c.theta[1] = (GN::generator(ngen, 2), GN::generator(ngen, 3));
        c.lambda[1] = GN::scalar(ngen, 1.25);
        c.ratio[2] = &GN::scalar(ngen, 0.8) + &GN::monomial(ngen, &[0, 2], -0.125);
        let o1 = Orientation::from_bits(&[true, false, true]);
        let o2 = Orientation::from_bits(&[false, false, true]);
        let text = to_surface_file(&s, &c, Some(&o1), Some(&o2));
        let parsed = parse_surface_file(&text).unwrap();
        assert_eq!(parsed.surface.genus, 1);
        assert_eq!(parsed.omega_sigma, o1);
        assert_eq!(parsed.omega_iota, o2);
        for e in 0..3 {
            assert_eq!(parsed.coords.lambda[e], c.lambda[e]);
            assert_eq!(parsed.coords.ratio[e], c.ratio[e]);
        }
        for t in 0..2 {
            assert_eq!(parsed.coords.theta[t], c.theta[t]);
        }
        let text2 = to_surface_file(
            &parsed.surface,
            &parsed.coords,
            Some(&parsed.omega_sigma),
            Some(&parsed.omega_iota),
        );
        assert_eq!(text, text2);
    }

    #[test]
    fn parse_error_carries_line() {
        let bad = "surface v1\ntriangle t0 x y z\ntriangle t1 p q r\ngluing a x x\n";
        match parse_surface_file(bad) {
            Err(Error::Surface(_)) => {}
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected error, got {other:?}"),
        }
    }
}
