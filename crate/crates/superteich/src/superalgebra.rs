//! (2|1)x(2|1) supermatrix algebra over the Grassmann algebra, the catalogue
//! of group generators, the involution `Psi`, and the semidirect product
//! `Psi ⋉ SL(1|2)_0` with its projection to `SL(2,R)`.
//!
//! The basis of `R^{2|1}` is ordered (even, odd, even), so the middle row and
//! column are the odd directions. Supermatrix multiplication carries an extra
//! minus sign whenever two odd-slot entries meet.

use std::fmt;

use crate::grassmann::{GrassmannNumber, ZERO_TOL};
use crate::{Error, Result};

type G = GrassmannNumber;

/// Parity of a matrix slot: odd iff exactly one of the indices is the middle.
pub fn slot_is_odd(i: usize, j: usize) -> bool {
    (i == 1) != (j == 1)
}

/// A 3x3 supermatrix with the (even, odd, even) grading.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperMatrix {
    pub ngen: u32,
    pub m: [[G; 3]; 3],
}

impl SuperMatrix {
    pub fn zero(ngen: u32) -> Self {
        let z = G::zero(ngen);
        SuperMatrix {
            ngen,
            m: [
                [z.clone(), z.clone(), z.clone()],
                [z.clone(), z.clone(), z.clone()],
                [z.clone(), z.clone(), z.clone()],
            ],
        }
    }

    pub fn identity(ngen: u32) -> Self {
        let mut id = Self::zero(ngen);
        for i in 0..3 {
            id.m[i][i] = G::one(ngen);
        }
        id
    }

    pub fn from_rows(rows: [[G; 3]; 3]) -> Self {
        let ngen = rows[0][0].ngen();
        SuperMatrix { ngen, m: rows }
    }

    /// Check that every entry is homogeneous of the slot parity.
    pub fn validate_parity(&self) -> Result<()> {
        for i in 0..3 {
            for j in 0..3 {
                let e = &self.m[i][j];
                let ok = if slot_is_odd(i, j) {
                    e.is_odd()
                } else {
                    e.is_even()
                };
                if !ok {
                    return Err(Error::Parity(format!(
                        "entry ({i},{j}) violates the supermatrix parity pattern"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Supermatrix product with the sign rule: a minus sign whenever an
    /// odd-slot entry multiplies an odd-slot entry.
    pub fn smul(&self, other: &SuperMatrix) -> Result<SuperMatrix> {
        if self.ngen != other.ngen {
            return Err(Error::PoolMismatch(self.ngen, other.ngen));
        }
        self.validate_parity()?;
        other.validate_parity()?;
        let mut out = SuperMatrix::zero(self.ngen);
        for i in 0..3 {
            for k in 0..3 {
                let mut acc = G::zero(self.ngen);
                for j in 0..3 {
                    let mut term = &self.m[i][j] * &other.m[j][k];
                    if slot_is_odd(i, j) && slot_is_odd(j, k) {
                        term = term.scale(-1.0);
                    }
                    acc = &acc + &term;
                }
                out.m[i][k] = acc;
            }
        }
        Ok(out)
    }

    pub fn str(&self) -> G {
        &(&self.m[0][0] + &self.m[2][2]) - &self.m[1][1]
    }

    /// Berezinian with the even block on indices {0,2} and odd block {1}.
    pub fn sdet(&self) -> Result<G> {
        let f = &self.m[1][1];
        if f.body().abs() < ZERO_TOL {
            return Err(Error::Singular("middle diagonal entry has zero body".into()));
        }
        let fi = f.inv()?;
        // det(A + B f^{-1} C) / f with the products taken in the written
        // order, exactly as the defining display.
        let b0c0 = &(&self.m[0][1] * &fi) * &self.m[1][0];
        let b0c1 = &(&self.m[0][1] * &fi) * &self.m[1][2];
        let b1c0 = &(&self.m[2][1] * &fi) * &self.m[1][0];
        let b1c1 = &(&self.m[2][1] * &fi) * &self.m[1][2];
        let a00 = &self.m[0][0] + &b0c0;
        let a01 = &self.m[0][2] + &b0c1;
        let a10 = &self.m[2][0] + &b1c0;
        let a11 = &self.m[2][2] + &b1c1;
        let det = &(&a00 * &a11) - &(&a01 * &a10);
        Ok(&det * &fi)
    }

    /// Sign twist identifying the supermultiplication with the ordinary one:
    /// negate the odd entries of the middle row.
    fn sigma(&self) -> SuperMatrix {
        let mut t = self.clone();
        t.m[1][0] = t.m[1][0].scale(-1.0);
        t.m[1][2] = t.m[1][2].scale(-1.0);
        t
    }

    fn inv_ordinary(&self) -> Result<SuperMatrix> {
        // Gauss-Jordan with left row operations; entries live in a
        // noncommutative ring so all scalings multiply from the left.
        let mut a = self.clone();
        let mut x = SuperMatrix::identity(self.ngen);
        for col in 0..3 {
            let pivot = (col..3)
                .max_by(|&r1, &r2| {
                    a.m[r1][col]
                        .body()
                        .abs()
                        .partial_cmp(&a.m[r2][col].body().abs())
                        .unwrap()
                })
                .unwrap();
            if a.m[pivot][col].body().abs() < ZERO_TOL {
                return Err(Error::Singular("matrix body is singular".into()));
            }
            a.m.swap(col, pivot);
            x.m.swap(col, pivot);
            let pinv = a.m[col][col].inv()?;
            for j in 0..3 {
                a.m[col][j] = &pinv * &a.m[col][j];
                x.m[col][j] = &pinv * &x.m[col][j];
            }
            for r in 0..3 {
                if r == col {
                    continue;
                }
                let factor = a.m[r][col].clone();
                if factor.is_zero() {
                    continue;
                }
                for j in 0..3 {
                    a.m[r][j] = &a.m[r][j] - &(&factor * &a.m[col][j]);
                    x.m[r][j] = &x.m[r][j] - &(&factor * &x.m[col][j]);
                }
            }
        }
        Ok(x)
    }

    /// Inverse with respect to the supermultiplication.
    pub fn inv(&self) -> Result<SuperMatrix> {
        Ok(self.sigma().inv_ordinary()?.sigma())
    }

    /// Twisted supertranspose entering the matrix form of the involution.
    fn supertranspose(&self) -> SuperMatrix {
        let mut t = SuperMatrix::zero(self.ngen);
        for i in 0..3 {
            for j in 0..3 {
                let sign = if (i, j) == (0, 1) || (i, j) == (2, 1) {
                    -1.0
                } else {
                    1.0
                };
                t.m[i][j] = self.m[j][i].scale(sign);
            }
        }
        t
    }

    /// Conjugation by the involution: `Psi M Psi`.
    pub fn psi_conj(&self) -> Result<SuperMatrix> {
        let j = gen_j(self.ngen);
        let jinv = j.inv()?;
        let core = self.supertranspose().inv()?;
        j.smul(&core)?.smul(&jinv)
    }

    pub fn approx_eq(&self, other: &SuperMatrix, tol: f64) -> bool {
        self.m
            .iter()
            .zip(other.m.iter())
            .all(|(r, s)| r.iter().zip(s.iter()).all(|(x, y)| x.approx_eq(y, tol)))
    }

    pub fn max_delta(&self, other: &SuperMatrix) -> f64 {
        let mut d = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                d = d.max(self.m[i][j].max_coeff_delta(&other.m[i][j]));
            }
        }
        d
    }
}

fn gen_j(ngen: u32) -> SuperMatrix {
    let mut j = SuperMatrix::zero(ngen);
    j.m[0][2] = G::one(ngen);
    j.m[1][1] = G::one(ngen);
    j.m[2][0] = G::scalar(ngen, -1.0);
    j
}

/// Named generators of `Psi ⋉ SL(1|2)_0`, the word alphabet of [`GroupElement`].
#[derive(Debug, Clone)]
pub enum Gen {
    /// diag(a, ac, c)
    D { a: G, c: G },
    /// diag(a, a^2, a) = D_{a,a}; generates the center-like Z subgroup
    Z { a: G },
    /// antidiagonal involution with J^2 = Z_{-1}
    J,
    /// upper unipotent in the first odd root
    U { al: G },
    /// upper unipotent in the second odd root
    V { be: G },
    /// bosonic upper unipotent
    W { b: G },
    /// lower Borel element moving e0 to the standard B vertex
    CalU { t1: G, t2: G },
    CalUInv { t1: G, t2: G },
    /// prime transformation P' = J CalU^{-1}
    Prime { t1: G, t2: G },
    PrimeInv { t1: G, t2: G },
    /// the involution; never materialized as a matrix
    Psi,
}

impl Gen {
    pub fn d(a: G, c: G) -> Self {
        Gen::D { a, c }
    }

    /// D_a = D_{a, a^{-1}}.
    pub fn d_single(a: &G) -> Result<Self> {
        Ok(Gen::D {
            a: a.clone(),
            c: a.inv()?,
        })
    }

    pub fn matrix(&self, ngen: u32) -> Result<Option<SuperMatrix>> {
        let one = G::one(ngen);
        let mut m = SuperMatrix::identity(ngen);
        match self {
            Gen::D { a, c } => {
                m.m[0][0] = a.clone();
                m.m[1][1] = a * c;
                m.m[2][2] = c.clone();
            }
            Gen::Z { a } => {
                m.m[0][0] = a.clone();
                m.m[1][1] = a * a;
                m.m[2][2] = a.clone();
            }
            Gen::J => m = gen_j(ngen),
            Gen::U { al } => m.m[0][1] = al.clone(),
            Gen::V { be } => m.m[1][2] = be.clone(),
            Gen::W { b } => m.m[0][2] = b.clone(),
            Gen::CalU { t1, t2 } => {
                let half = (t1 * t2).scale(0.5);
                m.m[1][0] = t2.clone();
                m.m[2][0] = &one + &half;
                m.m[2][1] = t1.scale(-1.0);
            }
            Gen::CalUInv { t1, t2 } => {
                let half = (t1 * t2).scale(0.5);
                m.m[1][0] = t2.scale(-1.0);
                m.m[2][0] = &half - &one;
                m.m[2][1] = t1.clone();
            }
            Gen::Prime { t1, t2 } => {
                let half = (t1 * t2).scale(0.5);
                m = SuperMatrix::zero(ngen);
                m.m[0][0] = &half - &one;
                m.m[0][1] = t1.clone();
                m.m[0][2] = one.clone();
                m.m[1][0] = t2.scale(-1.0);
                m.m[1][1] = one.clone();
                m.m[2][0] = G::scalar(ngen, -1.0);
            }
            Gen::PrimeInv { t1, t2 } => {
                let half = (t1 * t2).scale(0.5);
                m = SuperMatrix::zero(ngen);
                m.m[0][2] = G::scalar(ngen, -1.0);
                m.m[1][1] = one.clone();
                m.m[1][2] = t2.scale(-1.0);
                m.m[2][0] = one.clone();
                m.m[2][1] = t1.scale(-1.0);
                m.m[2][2] = &half.scale(-1.0) - &one;
            }
            Gen::Psi => return Ok(None),
        }
        Ok(Some(m))
    }

    pub fn inverse(&self) -> Vec<Gen> {
        match self {
            Gen::D { a, c } => vec![Gen::D {
                a: a.inv().expect("D parameter invertible"),
                c: c.inv().expect("D parameter invertible"),
            }],
            Gen::Z { a } => vec![Gen::Z {
                a: a.inv().expect("Z parameter invertible"),
            }],
            // J^{-1} = Z_{-1} J needs a pool-sized scalar, so the caller
            // (GroupElement::inverse) expands it.
            Gen::J => unreachable!("J inverse is expanded by GroupElement::inverse"),
            Gen::U { al } => vec![Gen::U { al: al.scale(-1.0) }],
            Gen::V { be } => vec![Gen::V { be: be.scale(-1.0) }],
            Gen::W { b } => vec![Gen::W { b: b.scale(-1.0) }],
            Gen::CalU { t1, t2 } => vec![Gen::CalUInv {
                t1: t1.clone(),
                t2: t2.clone(),
            }],
            Gen::CalUInv { t1, t2 } => vec![Gen::CalU {
                t1: t1.clone(),
                t2: t2.clone(),
            }],
            Gen::Prime { t1, t2 } => vec![Gen::PrimeInv {
                t1: t1.clone(),
                t2: t2.clone(),
            }],
            Gen::PrimeInv { t1, t2 } => vec![Gen::Prime {
                t1: t1.clone(),
                t2: t2.clone(),
            }],
            Gen::Psi => vec![Gen::Psi],
        }
    }
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gen::D { a, c } => write!(f, "D({a},{c})"),
            Gen::Z { a } => write!(f, "Z({a})"),
            Gen::J => write!(f, "J"),
            Gen::U { al } => write!(f, "U({al})"),
            Gen::V { be } => write!(f, "V({be})"),
            Gen::W { b } => write!(f, "W({b})"),
            Gen::CalU { t1, t2 } => write!(f, "CU({t1},{t2})"),
            Gen::CalUInv { t1, t2 } => write!(f, "CUI({t1},{t2})"),
            Gen::Prime { t1, t2 } => write!(f, "PP({t1},{t2})"),
            Gen::PrimeInv { t1, t2 } => write!(f, "PPI({t1},{t2})"),
            Gen::Psi => write!(f, "Psi"),
        }
    }
}

/// Element of `Psi ⋉ SL(1|2)_0`: a parity flag for the involution, the folded
/// `SL(1|2)_0` matrix, and the generating word (leftmost factor applied last).
#[derive(Debug, Clone)]
pub struct GroupElement {
    pub ngen: u32,
    pub psi: bool,
    pub mat: SuperMatrix,
    pub word: Vec<Gen>,
}

impl GroupElement {
    pub fn identity(ngen: u32) -> Self {
        GroupElement {
            ngen,
            psi: false,
            mat: SuperMatrix::identity(ngen),
            word: Vec::new(),
        }
    }

    /// Build a single-generator element, checking the parameter contracts.
    pub fn generator(ngen: u32, g: Gen) -> Result<Self> {
        match &g {
            Gen::D { a, c } => {
                require_positive_even(a, "D parameter a")?;
                require_positive_even(c, "D parameter c")?;
            }
            Gen::Z { a } => {
                if !a.is_even() || a.body().abs() < ZERO_TOL {
                    return Err(Error::Domain("Z parameter must be even invertible".into()));
                }
            }
            Gen::W { b } => {
                if !b.is_even() {
                    return Err(Error::Parity("W parameter must be even".into()));
                }
            }
            Gen::U { al } => require_odd(al, "U parameter")?,
            Gen::V { be } => require_odd(be, "V parameter")?,
            Gen::CalU { t1, t2 }
            | Gen::CalUInv { t1, t2 }
            | Gen::Prime { t1, t2 }
            | Gen::PrimeInv { t1, t2 } => {
                require_odd(t1, "odd parameter")?;
                require_odd(t2, "odd parameter")?;
            }
            Gen::J | Gen::Psi => {}
        }
        let (psi, mat) = match g.matrix(ngen)? {
            Some(m) => (false, m),
            None => (true, SuperMatrix::identity(ngen)),
        };
        Ok(GroupElement {
            ngen,
            psi,
            mat,
            word: vec![g],
        })
    }

    pub fn from_word(ngen: u32, word: Vec<Gen>) -> Result<Self> {
        let mut acc = GroupElement::identity(ngen);
        for g in word.into_iter().rev() {
            let elt = GroupElement::generator(ngen, g)?;
            acc = elt.compose(&acc)?;
        }
        Ok(acc)
    }

    /// `self ∘ other` (other acts first). Folds the involution leftward using
    /// matrix-level `Psi`-conjugation.
    pub fn compose(&self, other: &GroupElement) -> Result<GroupElement> {
        if self.ngen != other.ngen {
            return Err(Error::PoolMismatch(self.ngen, other.ngen));
        }
        let left = if other.psi {
            self.mat.psi_conj()?
        } else {
            self.mat.clone()
        };
        let mat = left.smul(&other.mat)?;
        let mut word = self.word.clone();
        word.extend(other.word.iter().cloned());
        Ok(GroupElement {
            ngen: self.ngen,
            psi: self.psi ^ other.psi,
            mat,
            word,
        })
    }

    pub fn inverse(&self) -> Result<GroupElement> {
        let mat_inv = self.mat.inv()?;
        let mat = if self.psi { mat_inv.psi_conj()? } else { mat_inv };
        let mut word = Vec::new();
        for g in self.word.iter().rev() {
            match g {
                Gen::J => {
                    word.push(Gen::Z {
                        a: G::scalar(self.ngen, -1.0),
                    });
                    word.push(Gen::J);
                }
                _ => word.extend(g.inverse()),
            }
        }
        Ok(GroupElement {
            ngen: self.ngen,
            psi: self.psi,
            mat,
            word,
        })
    }

    /// Fold the word into (psi, matrix) from scratch; used to audit that the
    /// cached fold stays consistent with the word.
    pub fn refold(&self) -> Result<(bool, SuperMatrix)> {
        let mut psi = false;
        let mut mat = SuperMatrix::identity(self.ngen);
        for g in self.word.iter().rev() {
            match g.matrix(self.ngen)? {
                None => {
                    mat = mat.psi_conj()?;
                    psi = !psi;
                }
                Some(m) => {
                    mat = m.smul(&mat)?;
                }
            }
        }
        Ok((psi, mat))
    }

    pub fn sdet(&self) -> Result<G> {
        self.mat.sdet()
    }

    /// Canonical projection to `SL(2,R)`: `Psi` maps to the identity and the
    /// matrix to the body of its even corners over sqrt of the middle body.
    pub fn project_sl2(&self) -> Result<[[f64; 2]; 2]> {
        let f = self.mat.m[1][1].body();
        if f <= 0.0 {
            return Err(Error::Component(
                "middle entry body must be positive in SL(1|2)_0".into(),
            ));
        }
        let s = 1.0 / f.sqrt();
        Ok([
            [self.mat.m[0][0].body() * s, self.mat.m[0][2].body() * s],
            [self.mat.m[2][0].body() * s, self.mat.m[2][2].body() * s],
        ])
    }

    /// Word form `kind(params)∘kind(params)…`.
    pub fn word_text(&self) -> String {
        if self.word.is_empty() {
            return "1".to_string();
        }
        self.word
            .iter()
            .map(|g| g.to_string())
            .collect::<Vec<_>>()
            .join("\u{2218}")
    }
}

fn require_positive_even(g: &G, what: &str) -> Result<()> {
    if !g.is_even() {
        return Err(Error::Parity(format!("{what} must be even")));
    }
    if g.body() <= ZERO_TOL {
        return Err(Error::Domain(format!("{what} must have positive body")));
    }
    Ok(())
}

fn require_odd(g: &G, what: &str) -> Result<()> {
    if !g.is_odd() {
        return Err(Error::Parity(format!("{what} must be odd")));
    }
    Ok(())
}

pub fn mat_mul_2x2(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}
