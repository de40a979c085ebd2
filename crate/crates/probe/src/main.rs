use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use superteich::grassmann::GrassmannNumber as G;
use superteich::ptolemy::flip;
use superteich::surface::{f03_complex, f11_complex, spin_quadratic_form, CoordinateVector, FatPath, Orientation, SurfaceComplex};
use superteich::teichmueller::holonomy;

fn rand_pos(rng: &mut ChaCha8Rng, ngen: u32) -> G {
    G::scalar(ngen, rng.gen_range(0.6..1.8))
}

fn proper_cycles(s: &SurfaceComplex) -> Vec<FatPath> {
    // all 1- and 2-step proper cyclic paths
    let mut out = Vec::new();
    for start in 0..s.triangles.len() {
        for entry in 0..3u8 {
            for x1 in 0..3u8 {
                if x1 == entry { continue; }
                // 1-step
                let p = FatPath { start, entry_slot: entry, exits: vec![x1] };
                if let Ok(steps) = superteich::surface::resolve_path(s, &p) {
                    if steps.last().unwrap().next == (start, entry) {
                        out.push(p);
                    }
                }
                for x2 in 0..3u8 {
                    let p = FatPath { start, entry_slot: entry, exits: vec![x1, x2] };
                    if let Ok(steps) = superteich::surface::resolve_path(s, &p) {
                        if steps.len() == 2 && steps.last().unwrap().next == (start, entry) {
                            out.push(p);
                        }
                    }
                }
            }
        }
    }
    out
}

fn consistency(s: &SurfaceComplex, c: &CoordinateVector, os: &Orientation, oi: &Orientation) -> usize {
    let mut bad = 0;
    for p in proper_cycles(s) {
        let q = spin_quadratic_form(s, os, &p).unwrap();
        let h = holonomy(s, c, os, oi, (p.start, p.entry_slot), &p.exits).unwrap();
        let m = h.project_sl2().unwrap();
        let tr = m[0][0] + m[1][1];
        let sign = if tr > 0.0 { 1 } else { -1 };
        if sign != q { bad += 1; }
    }
    bad
}

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for fixture in ["f11", "f03"] {
        let s = if fixture == "f11" { f11_complex() } else { f03_complex() };
        let edge = s.edge_id("e").unwrap();
        let ngen = CoordinateVector::pool_for(&s);
        let mut c = CoordinateVector::unit(&s, ngen);
        for t in 0..s.triangles.len() {
            c.theta[t] = (
                G::generator(ngen, 2 * t as u32).scale(rng.gen_range(-1.2..1.2)),
                G::generator(ngen, 2 * t as u32 + 1).scale(rng.gen_range(-1.2..1.2)),
            );
        }
        for e in 0..s.edges.len() {
            c.lambda[e] = rand_pos(&mut rng, ngen);
            c.ratio[e] = rand_pos(&mut rng, ngen);
        }
        let o = Orientation::all_forward(&s);
        println!("{fixture} input inconsistencies: {}", consistency(&s, &c, &o, &o));
        let r1 = flip(&s, &c, &o, &o, edge).unwrap();
        println!("{fixture} after flip1: {}", consistency(&r1.surface, &r1.coords, &r1.omega_sigma, &r1.omega_iota));
        let r2 = flip(&r1.surface, &r1.coords, &r1.omega_sigma, &r1.omega_iota, edge).unwrap();
        println!("{fixture} after flip2: {}", consistency(&r2.surface, &r2.coords, &r2.omega_sigma, &r2.omega_iota));
        println!("{fixture} omega in {:?} out {:?}", o.forward, r2.omega_sigma.forward);
    }
}
