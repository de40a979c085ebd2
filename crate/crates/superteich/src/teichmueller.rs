//! The lift of a coordinate vector to the special light cone over a finite
//! window of the universal cover, and the holonomy representation of closed
//! fatgraph paths into `Psi ⋉ SL(1|2)_0`.
//!
//! Every placed triangle carries a frame: an admissible group element taking
//! its lifted triple to standard position arranged around one side, plus a
//! dressing (a positive even scale, a sign, and an order-swap flag) recording
//! how the standard fermions relate to the stored coordinates. The two
//! orientations decide the sign (direction of `omega_sigma` on the crossed
//! edge) and the swap (disagreement of the two orientations) at each step.

use std::collections::VecDeque;

use crate::grassmann::GrassmannNumber;
use crate::lightcone::LightVector;
use crate::moduli::{
    c_theta, fourth_vertex, pair_rescale, prime, standard_triple, triple_scales, upside_down,
    OddPair, PrimeDir,
};
use crate::superalgebra::{Gen, GroupElement};
use crate::surface::{
    is_left_turn, resolve_path, CoordinateVector, FatPath, Incidence, Orientation, SurfaceComplex,
    TriId,
};
use crate::{Error, Result};

type G = GrassmannNumber;

/// Frame of a placed triangle: `g` maps its lifted triple to the standard
/// triple arranged around side `entry`, whose B-vertex carries the pair
/// `sign * (scale * h^(±1)) . theta^(op)` of the stored coordinates.
#[derive(Debug, Clone)]
pub struct Frame {
    pub g: GroupElement,
    pub scale: G,
    pub sign: f64,
    pub op: bool,
    pub entry: u8,
}

impl Frame {
    fn base(ngen: u32, entry: u8) -> Self {
        Frame {
            g: GroupElement::identity(ngen),
            scale: G::one(ngen),
            sign: 1.0,
            op: false,
            entry,
        }
    }
}

fn effective_pair(coords: &CoordinateVector, t: TriId, frame: &Frame) -> OddPair {
    let (t1, t2) = &coords.theta[t];
    let (p1, p2) = if frame.op {
        (t2.clone(), t1.clone())
    } else {
        (t1.clone(), t2.clone())
    };
    (p1.scale(frame.sign), p2.scale(frame.sign))
}

fn h_hat(
    surface: &SurfaceComplex,
    coords: &CoordinateVector,
    t: TriId,
    slot: u8,
    frame: &Frame,
) -> Result<G> {
    let h = coords.ratio_at(surface, t, slot)?;
    let base = if frame.op { h.inv()? } else { h };
    Ok(&frame.scale * &base)
}

/// Rotate the frame of triangle `t` from its entry side to `to_slot` with a
/// single prime transformation; `+` for the cyclic successor (a left turn).
fn rotate(
    surface: &SurfaceComplex,
    coords: &CoordinateVector,
    t: TriId,
    frame: &Frame,
    to_slot: u8,
) -> Result<Frame> {
    if to_slot == frame.entry {
        return Ok(frame.clone());
    }
    let dir = if is_left_turn(frame.entry, to_slot) {
        PrimeDir::Plus
    } else {
        PrimeDir::Minus
    };
    let phi = effective_pair(coords, t, frame);
    let h_in = h_hat(surface, coords, t, frame.entry, frame)?;
    let h_out = h_hat(surface, coords, t, to_slot, frame)?;
    let p = prime(&phi, &h_in, &h_out, dir)?;
    Ok(Frame {
        g: p.compose(&frame.g)?,
        scale: frame.scale.clone(),
        sign: frame.sign,
        op: frame.op,
        entry: to_slot,
    })
}

struct Crossing {
    next: Incidence,
    frame: Frame,
    /// fourth vertex expressed in the pre-crossing frame
    d_in_frame: LightVector,
}

/// Quadrilateral lambda-lengths `[a, b, c, d, e]` around the exit side.
fn quad_lambdas(
    surface: &SurfaceComplex,
    coords: &CoordinateVector,
    t: TriId,
    exit: u8,
) -> ([G; 5], Incidence) {
    let e = surface.triangles[t].sides[exit as usize];
    let far = surface.far_end(e, (t, exit));
    let la = coords.lambda[surface.triangles[t].sides[((exit + 1) % 3) as usize]].clone();
    let lb = coords.lambda[surface.triangles[t].sides[((exit + 2) % 3) as usize]].clone();
    let lc = coords.lambda[surface.triangles[far.0].sides[((far.1 + 1) % 3) as usize]].clone();
    let ld = coords.lambda[surface.triangles[far.0].sides[((far.1 + 2) % 3) as usize]].clone();
    let le = coords.lambda[e].clone();
    ([la, lb, lc, ld, le], far)
}

/// Cross the exit side of the frame, producing the neighbor's frame and the
/// fourth vertex of the quadrilateral in the current frame.
fn cross(
    surface: &SurfaceComplex,
    coords: &CoordinateVector,
    omega_sigma: &Orientation,
    omega_iota: &Orientation,
    t: TriId,
    frame: &Frame,
) -> Result<Crossing> {
    let exit = frame.entry;
    let edge = surface.triangles[t].sides[exit as usize];
    let ([la, lb, lc, ld, le], far) = quad_lambdas(surface, coords, t, exit);
    let chi = &(&la * &lc) * &(&lb * &ld).inv()?;
    let y = &(&lc * &ld).scale(2.0f64.sqrt()) * &le.inv()?;

    // Direction of omega_sigma on the crossed edge: positive when it points
    // at the side we are crossing from (towards the theta-triangle).
    let ends = surface.edges[edge].ends;
    let head = if omega_sigma.forward[edge] {
        ends[1]
    } else {
        ends[0]
    };
    let eps = if head == (t, exit) { 1.0 } else { -1.0 };
    let op_edge = omega_sigma.forward[edge] != omega_iota.forward[edge];

    let op_new = frame.op ^ op_edge;
    let (s1, s2) = &coords.theta[far.0];
    let sig = if op_new {
        (s2.clone(), s1.clone())
    } else {
        (s1.clone(), s2.clone())
    };
    let rescaled = pair_rescale(&frame.scale, &sig)?;
    let rho = (
        rescaled.0.scale(frame.sign * eps),
        rescaled.1.scale(frame.sign * eps),
    );
    let d_in_frame = fourth_vertex(&chi, &y, &rho)?;

    let h_out = h_hat(surface, coords, t, exit, frame)?;
    let ups = upside_down(&chi, &h_out)?;
    let g_new = ups.compose(&frame.g)?;

    let scale_new = if op_edge {
        let h = coords.ratio_at(surface, t, exit)?;
        if frame.op {
            &h * &h
        } else {
            let hi = h.inv()?;
            &hi * &hi
        }
    } else {
        G::one(coords.ngen)
    };
    Ok(Crossing {
        next: far,
        frame: Frame {
            g: g_new,
            scale: scale_new,
            sign: frame.sign * eps,
            op: op_new,
            entry: far.1,
        },
        d_in_frame,
    })
}

/// A lifted triangle of the cover window.
#[derive(Debug, Clone)]
pub struct LiftedTri {
    pub base: TriId,
    pub parent: Option<usize>,
    /// exit slot of the parent that led here
    pub parent_exit: u8,
    pub entry_slot: u8,
    pub verts: [usize; 3],
    pub depth: usize,
}

/// A finite window of the universal cover with a fixed base triangle-edge
/// pair, its lift to the light cone, and the per-triangle frames.
#[derive(Debug, Clone)]
pub struct Lift {
    pub base: (TriId, u8),
    pub depth: usize,
    pub tris: Vec<LiftedTri>,
    /// children[i][exit] = window index reached by crossing `exit`
    pub children: Vec<[Option<usize>; 3]>,
    pub vectors: Vec<LightVector>,
    pub frames: Vec<Frame>,
}

impl Lift {
    /// Window triangle reached from the root by the given exit slots.
    pub fn descend(&self, exits: &[u8]) -> Option<usize> {
        let mut cur = 0usize;
        for &x in exits {
            cur = self.children[cur][x as usize]?;
        }
        Some(cur)
    }

    /// Map window vertices through the deck transformation determined by a
    /// closed based path; triangles outside the translated window drop out.
    pub fn translate_verts(&self, gamma: &[u8]) -> Result<Vec<Option<usize>>> {
        let target = self
            .descend(gamma)
            .ok_or_else(|| Error::Path("window too shallow for the deck image".into()))?;
        let mut tri_map: Vec<Option<usize>> = vec![None; self.tris.len()];
        tri_map[0] = Some(target);
        let mut vert_map: Vec<Option<usize>> = vec![None; self.vectors.len()];
        let mut queue = VecDeque::new();
        queue.push_back(0usize);
        while let Some(i) = queue.pop_front() {
            let img = tri_map[i].unwrap();
            for k in 0..3 {
                let v = self.tris[i].verts[k];
                let w = self.tris[img].verts[k];
                if let Some(prev) = vert_map[v] {
                    if prev != w {
                        return Err(Error::Path("inconsistent deck vertex map".into()));
                    }
                } else {
                    vert_map[v] = Some(w);
                }
            }
            for x in 0..3usize {
                if let (Some(ch), Some(chi)) = (self.children[i][x], self.children[img][x]) {
                    if tri_map[ch].is_none() {
                        tri_map[ch] = Some(chi);
                        queue.push_back(ch);
                    }
                }
            }
        }
        Ok(vert_map)
    }
}

/// Build the lift over a window of the universal cover: the base triangle is
/// placed in standard position around its distinguished edge, and every other
/// triangle is placed by admissible transformations along the tree path.
pub fn build_lift(
    surface: &SurfaceComplex,
    coords: &CoordinateVector,
    omega_sigma: &Orientation,
    omega_iota: &Orientation,
    base: (TriId, u8),
    depth: usize,
) -> Result<Lift> {
    coords.validate(surface)?;
    if depth < 1 {
        return Err(Error::Domain("lift depth must be at least 1".into()));
    }
    if base.0 >= surface.triangles.len() || base.1 > 2 {
        return Err(Error::Surface("bad base triangle-edge pair".into()));
    }
    let ngen = coords.ngen;
    let (t0, s0) = base;
    // Standard triple of the base around its distinguished side.
    let ([la, lb, _, _, le], _) = quad_lambdas(surface, coords, t0, s0);
    let (r, s, t) = triple_scales(&la, &lb, &le)?;
    let h0 = coords.ratio_at(surface, t0, s0)?;
    let beta0 = pair_rescale(&h0, &coords.theta[t0])?;
    let [va, vb, vc] = standard_triple(&r, &s, &t, &beta0)?;
    let vectors = vec![vc, va, vb];
    // corner(k) = C, corner(k+1) = A, corner(k+2) = B for entry slot k
    let mut verts = [0usize; 3];
    verts[s0 as usize] = 0;
    verts[((s0 + 1) % 3) as usize] = 1;
    verts[((s0 + 2) % 3) as usize] = 2;
    let mut lift = Lift {
        base,
        depth,
        tris: vec![LiftedTri {
            base: t0,
            parent: None,
            parent_exit: 0,
            entry_slot: s0,
            verts,
            depth: 0,
        }],
        children: vec![[None; 3]],
        vectors,
        frames: vec![Frame::base(ngen, s0)],
    };
    let mut queue = VecDeque::new();
    queue.push_back(0usize);
    while let Some(i) = queue.pop_front() {
        if lift.tris[i].depth >= depth {
            continue;
        }
        let tri = lift.tris[i].clone();
        for exit in 0..3u8 {
            if tri.parent.is_some() && exit == tri.entry_slot {
                continue;
            }
            let rotated = rotate(surface, coords, tri.base, &lift.frames[i], exit)?;
            let crossing = cross(surface, coords, omega_sigma, omega_iota, tri.base, &rotated)?;
            let d_actual = rotated.g.inverse()?.act(&crossing.d_in_frame)?;
            let d_id = lift.vectors.len();
            lift.vectors.push(d_actual);
            let (nt, ns) = crossing.next;
            let mut nverts = [0usize; 3];
            // the crossed side runs corner(exit)->corner(exit+1) here and is
            // glued in reverse on the far side
            nverts[ns as usize] = tri.verts[((exit + 1) % 3) as usize];
            nverts[((ns + 1) % 3) as usize] = tri.verts[exit as usize];
            nverts[((ns + 2) % 3) as usize] = d_id;
            let id = lift.tris.len();
            lift.tris.push(LiftedTri {
                base: nt,
                parent: Some(i),
                parent_exit: exit,
                entry_slot: ns,
                verts: nverts,
                depth: tri.depth + 1,
            });
            lift.frames.push(crossing.frame);
            lift.children.push([None; 3]);
            lift.children[i][exit as usize] = Some(id);
            queue.push_back(id);
        }
    }
    Ok(lift)
}

/// Holonomy of a closed fatgraph path based at `base`: the admissible word
/// carrying the standard position of the base around the loop, corrected by
/// the accumulated dressing so that equivariance holds on the nose.
pub fn holonomy(
    surface: &SurfaceComplex,
    coords: &CoordinateVector,
    omega_sigma: &Orientation,
    omega_iota: &Orientation,
    base: (TriId, u8),
    exits: &[u8],
) -> Result<GroupElement> {
    coords.validate(surface)?;
    let ngen = coords.ngen;
    let (t0, s0) = base;
    let mut tri = t0;
    let mut frame = Frame::base(ngen, s0);
    if exits.is_empty() {
        return Ok(GroupElement::identity(ngen));
    }
    for &exit in exits {
        if exit > 2 {
            return Err(Error::Path(format!("bad slot {exit}")));
        }
        if exit == frame.entry {
            return Err(Error::Path("holonomy path backtracks".into()));
        }
        let rotated = rotate(surface, coords, tri, &frame, exit)?;
        let crossing = cross(surface, coords, omega_sigma, omega_iota, tri, &rotated)?;
        tri = crossing.next.0;
        frame = crossing.frame;
    }
    if tri != t0 {
        return Err(Error::Path(format!("path is not closed: ended at {tri}")));
    }
    if frame.entry != s0 {
        frame = rotate(surface, coords, tri, &frame, s0)?;
    }
    // kappa maps the base standard position to the final dressed one.
    let mut kappa = GroupElement::generator(
        ngen,
        Gen::Z {
            a: frame.scale.inv()?.scale(frame.sign),
        },
    )?;
    if frame.op {
        kappa = kappa.compose(&GroupElement::generator(ngen, Gen::Psi)?)?;
    }
    frame.g.inverse()?.compose(&kappa)
}

/// Outcome of comparing one cycle's holonomy trace sign with the spin form.
#[derive(Debug, Clone)]
pub struct SpinCheck {
    pub trace: f64,
    pub q: i32,
    pub matches: bool,
}

/// For each cycle, compare the sign of the projected holonomy trace with the
/// quadratic form of `omega_sigma`.
pub fn check_spin_consistency(
    surface: &SurfaceComplex,
    coords: &CoordinateVector,
    omega_sigma: &Orientation,
    omega_iota: &Orientation,
    cycles: &[FatPath],
) -> Result<Vec<SpinCheck>> {
    let mut out = Vec::new();
    for path in cycles {
        resolve_path(surface, path)?;
        let hol = holonomy(
            surface,
            coords,
            omega_sigma,
            omega_iota,
            (path.start, path.entry_slot),
            &path.exits,
        )?;
        let m = hol.project_sl2()?;
        let trace = m[0][0] + m[1][1];
        let q = crate::surface::spin_quadratic_form(surface, omega_sigma, path)?;
        let matches = (trace > 0.0 && q == 1) || (trace < 0.0 && q == -1);
        out.push(SpinCheck { trace, q, matches });
    }
    Ok(out)
}

/// Constant `c_theta` of the effective pair of a frame; exposed for flip
/// diagnostics and tests.
pub fn frame_c_theta(coords: &CoordinateVector, t: TriId, frame: &Frame) -> G {
    c_theta(&effective_pair(coords, t, frame))
}
