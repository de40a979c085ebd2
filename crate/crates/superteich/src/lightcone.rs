//! The superspace `R^{2,2|4}`, its invariant pairing, the special light cone
//! (the orbit of the highest weight vector), and the adjoint group action.

use std::fmt;

use crate::grassmann::GrassmannNumber;
use crate::superalgebra::{Gen, GroupElement, SuperMatrix};
use crate::{Error, Result};

type G = GrassmannNumber;

/// Default tolerance for light-cone membership checks.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// A point `(x1, x2, y, z | xi1p, xi2p, xi1m, xi2m)` of `R^{2,2|4}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LightVector {
    pub x1: G,
    pub x2: G,
    pub y: G,
    pub z: G,
    pub xi1p: G,
    pub xi2p: G,
    pub xi1m: G,
    pub xi2m: G,
}

impl LightVector {
    pub fn ngen(&self) -> u32 {
        self.x1.ngen()
    }

    pub fn zero(ngen: u32) -> Self {
        let z = G::zero(ngen);
        LightVector {
            x1: z.clone(),
            x2: z.clone(),
            y: z.clone(),
            z: z.clone(),
            xi1p: z.clone(),
            xi2p: z.clone(),
            xi1m: z.clone(),
            xi2m: z,
        }
    }

    /// `e0 = E = (1,0,0,0|0,0,0,0)`, the highest weight vector.
    pub fn e0(ngen: u32) -> Self {
        let mut v = Self::zero(ngen);
        v.x1 = G::one(ngen);
        v
    }

    pub fn scale(&self, s: &G) -> Self {
        LightVector {
            x1: s * &self.x1,
            x2: s * &self.x2,
            y: s * &self.y,
            z: s * &self.z,
            xi1p: s * &self.xi1p,
            xi2p: s * &self.xi2p,
            xi1m: s * &self.xi1m,
            xi2m: s * &self.xi2m,
        }
    }

    /// The supermatrix `x1 E - x2 F - y H + xi.e + z(h1+h2)` realizing the
    /// vector inside the adjoint representation.
    pub fn to_matrix(&self) -> SuperMatrix {
        let mut m = SuperMatrix::zero(self.ngen());
        m.m[0][0] = &self.z - &self.y;
        m.m[0][1] = self.xi1p.clone();
        m.m[0][2] = self.x1.clone();
        m.m[1][0] = self.xi1m.clone();
        m.m[1][1] = self.z.scale(2.0);
        m.m[1][2] = self.xi2p.clone();
        m.m[2][0] = self.x2.scale(-1.0);
        m.m[2][1] = self.xi2m.clone();
        m.m[2][2] = &self.z + &self.y;
        m
    }

    pub fn from_matrix(m: &SuperMatrix) -> Self {
        let half = 0.5;
        LightVector {
            x1: m.m[0][2].clone(),
            x2: m.m[2][0].scale(-1.0),
            y: (&m.m[2][2] - &m.m[0][0]).scale(half),
            z: (&m.m[2][2] + &m.m[0][0]).scale(half),
            xi1p: m.m[0][1].clone(),
            xi2p: m.m[1][2].clone(),
            xi1m: m.m[1][0].clone(),
            xi2m: m.m[2][1].clone(),
        }
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_delta(other) <= tol
    }

    pub fn max_delta(&self, other: &Self) -> f64 {
        [
            self.x1.max_coeff_delta(&other.x1),
            self.x2.max_coeff_delta(&other.x2),
            self.y.max_coeff_delta(&other.y),
            self.z.max_coeff_delta(&other.z),
            self.xi1p.max_coeff_delta(&other.xi1p),
            self.xi2p.max_coeff_delta(&other.xi2p),
            self.xi1m.max_coeff_delta(&other.xi1m),
            self.xi2m.max_coeff_delta(&other.xi2m),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// Textual form `(x1,x2,y,z|xi1p,xi2p,xi1m,xi2m)`.
    pub fn to_text(&self) -> String {
        format!(
            "({},{},{},{}|{},{},{},{})",
            self.x1, self.x2, self.y, self.z, self.xi1p, self.xi2p, self.xi1m, self.xi2m
        )
    }

    pub fn from_text(ngen: u32, text: &str) -> Result<Self> {
        let body = text
            .trim()
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| Error::Domain("light vector literal needs (..|..)".into()))?;
        let (even, odd) = body
            .split_once('|')
            .ok_or_else(|| Error::Domain("light vector literal needs `|`".into()))?;
        let ev: Vec<&str> = even.split(',').collect();
        let od: Vec<&str> = odd.split(',').collect();
        if ev.len() != 4 || od.len() != 4 {
            return Err(Error::Domain("light vector needs 4 even and 4 odd slots".into()));
        }
        Ok(LightVector {
            x1: G::from_text(ngen, ev[0])?,
            x2: G::from_text(ngen, ev[1])?,
            y: G::from_text(ngen, ev[2])?,
            z: G::from_text(ngen, ev[3])?,
            xi1p: G::from_text(ngen, od[0])?,
            xi2p: G::from_text(ngen, od[1])?,
            xi1m: G::from_text(ngen, od[2])?,
            xi2m: G::from_text(ngen, od[3])?,
        })
    }
}

impl fmt::Display for LightVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// The invariant inner product of `R^{2,2|4}`.
pub fn pairing(m: &LightVector, n: &LightVector) -> G {
    let even = &(&(&m.x1 * &n.x2) + &(&m.x2 * &n.x1)).scale(0.5) - &(&m.y * &n.y);
    let odd = &(&(&m.xi1p * &n.xi1m) - &(&m.xi2p * &n.xi2m))
        - &(&(&m.xi1m * &n.xi1p) - &(&m.xi2m * &n.xi2p));
    &(&even + &odd.scale(0.5)) + &(&m.z * &n.z)
}

/// Square root of the pairing; defined when the pairing has positive body.
pub fn lambda_length(m: &LightVector, n: &LightVector) -> Result<G> {
    pairing(m, n).sqrt_even()
}

/// Membership in the special light cone: `<M,M> = 0`, non-negative bodies of
/// `x1, x2`, `y^2 = x1 x2`, and the branch of the orbit relations taken on
/// whichever of `x1, x2` has the larger body.
pub fn is_special(v: &LightVector) -> bool {
    is_special_tol(v, MEMBERSHIP_TOL)
}

pub fn is_special_tol(v: &LightVector, tol: f64) -> bool {
    if !pairing(v, v).approx_zero(tol) {
        return false;
    }
    let b1 = v.x1.body();
    let b2 = v.x2.body();
    if b1 < -tol || b2 < -tol {
        return false;
    }
    if !(&(&v.y * &v.y) - &(&v.x1 * &v.x2)).approx_zero(tol) {
        return false;
    }
    if b1.max(b2) <= tol {
        return false;
    }
    if b1 >= b2 {
        let xi = v.x1.inv().expect("body checked");
        let r = &v.y * &xi;
        let ok1 = (&v.xi1m + &(&r * &v.xi2p)).approx_zero(tol);
        let ok2 = (&v.xi2m - &(&r * &v.xi1p)).approx_zero(tol);
        let zz = (&(&v.xi1p * &v.xi2p) * &xi).scale(0.5);
        ok1 && ok2 && (&v.z - &zz).approx_zero(tol)
    } else {
        let xi = v.x2.inv().expect("body checked");
        let r = &v.y * &xi;
        let ok1 = (&v.xi2p + &(&r * &v.xi1m)).approx_zero(tol);
        let ok2 = (&v.xi1p - &(&r * &v.xi2m)).approx_zero(tol);
        let zz = (&(&v.xi1m * &v.xi2m) * &xi).scale(0.5);
        ok1 && ok2 && (&v.z - &zz).approx_zero(tol)
    }
}

impl GroupElement {
    /// Adjoint action on `R^{2,2|4}`, folding the word right to left and
    /// using the closed-form actions for catalogued generators.
    pub fn act(&self, v: &LightVector) -> Result<LightVector> {
        let mut out = v.clone();
        for g in self.word.iter().rev() {
            out = act_gen(self.ngen, g, &out)?;
        }
        Ok(out)
    }

    /// Adjoint action computed through the folded matrix, `Psi` applied last.
    pub fn act_via_matrix(&self, v: &LightVector) -> Result<LightVector> {
        let m = self.mat.smul(&v.to_matrix())?.smul(&self.mat.inv()?)?;
        let mut out = LightVector::from_matrix(&m);
        if self.psi {
            out = act_psi(&out);
        }
        Ok(out)
    }
}

fn act_psi(v: &LightVector) -> LightVector {
    LightVector {
        x1: v.x1.clone(),
        x2: v.x2.clone(),
        y: v.y.clone(),
        z: v.z.scale(-1.0),
        xi1p: v.xi2p.clone(),
        xi2p: v.xi1p.clone(),
        xi1m: v.xi2m.scale(-1.0),
        xi2m: v.xi1m.scale(-1.0),
    }
}

fn act_gen(ngen: u32, g: &Gen, v: &LightVector) -> Result<LightVector> {
    let out = match g {
        Gen::D { a, c } => {
            let ai = a.inv()?;
            let ci = c.inv()?;
            LightVector {
                x1: &(a * &ci) * &v.x1,
                x2: &(&ai * c) * &v.x2,
                y: v.y.clone(),
                z: v.z.clone(),
                xi1p: &ci * &v.xi1p,
                xi2p: a * &v.xi2p,
                xi1m: c * &v.xi1m,
                xi2m: &ai * &v.xi2m,
            }
        }
        Gen::Z { a } => {
            let ai = a.inv()?;
            LightVector {
                x1: v.x1.clone(),
                x2: v.x2.clone(),
                y: v.y.clone(),
                z: v.z.clone(),
                xi1p: &ai * &v.xi1p,
                xi2p: a * &v.xi2p,
                xi1m: a * &v.xi1m,
                xi2m: &ai * &v.xi2m,
            }
        }
        Gen::J => LightVector {
            x1: v.x2.clone(),
            x2: v.x1.clone(),
            y: v.y.scale(-1.0),
            z: v.z.clone(),
            xi1p: v.xi2m.clone(),
            xi2p: v.xi1m.scale(-1.0),
            xi1m: v.xi2p.clone(),
            xi2m: v.xi1p.scale(-1.0),
        },
        Gen::U { al } => {
            let half = (al * &v.xi1m).scale(0.5);
            LightVector {
                x1: &v.x1 - &(al * &v.xi2p),
                x2: v.x2.clone(),
                y: &v.y + &half,
                z: &v.z - &half,
                xi1p: &v.xi1p + &(&(&v.y + &v.z) * al),
                xi2p: v.xi2p.clone(),
                xi1m: v.xi1m.clone(),
                xi2m: &v.xi2m + &(&v.x2 * al),
            }
        }
        Gen::V { be } => {
            let half = (be * &v.xi2m).scale(0.5);
            LightVector {
                x1: &v.x1 - &(be * &v.xi1p),
                x2: v.x2.clone(),
                y: &v.y - &half,
                z: &v.z - &half,
                xi1p: v.xi1p.clone(),
                xi2p: &v.xi2p + &(&(&v.y - &v.z) * be),
                xi1m: &v.xi1m - &(&v.x2 * be),
                xi2m: v.xi2m.clone(),
            }
        }
        Gen::W { b } => LightVector {
            x1: &(&v.x1 + &(&(b * b) * &v.x2)) + &(b * &v.y).scale(2.0),
            x2: v.x2.clone(),
            y: &v.y + &(b * &v.x2),
            z: v.z.clone(),
            xi1p: &v.xi1p + &(b * &v.xi2m),
            xi2p: &v.xi2p - &(b * &v.xi1m),
            xi1m: v.xi1m.clone(),
            xi2m: v.xi2m.clone(),
        },
        Gen::Psi => act_psi(v),
        other => {
            // No catalogued closed form; conjugate by the matrix.
            let m = other
                .matrix(ngen)?
                .expect("non-Psi generator has a matrix");
            let conj = m.smul(&v.to_matrix())?.smul(&m.inv()?)?;
            LightVector::from_matrix(&conj)
        }
    };
    Ok(out)
}
