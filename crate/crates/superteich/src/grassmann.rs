//! Exact arithmetic in a real Grassmann algebra with a finite generator pool.
//!
//! Every scalar in the crate -- lambda-lengths, ratios, fermions, matrix
//! entries -- is a [`GrassmannNumber`]: a sparse real combination of
//! monomials `g_i1 g_i2 ... g_ik` in anticommuting generators, keyed by the
//! index set as a bitmask. All identities of the theory are polynomial, so
//! double precision plus nilpotency makes them exact up to rounding.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::{Error, Result};

/// Coefficients with absolute value below this are pruned after every operation.
pub const ZERO_TOL: f64 = 1e-12;

/// Parity classification of a Grassmann element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

/// Element of the Grassmann algebra over `ngen` generators.
///
/// Values are immutable in spirit: all operations return fresh numbers, so
/// they can be copied and shared across threads freely.
#[derive(Debug, Clone, PartialEq)]
pub struct GrassmannNumber {
    ngen: u32,
    coeffs: BTreeMap<u32, f64>,
}

fn merge_sign(a: u32, b: u32) -> f64 {
    // Sign of g_A * g_B: count transpositions needed to interleave the two
    // ascending index lists.
    let mut inversions = 0u32;
    let mut bits = a;
    while bits != 0 {
        let i = bits.trailing_zeros();
        inversions += (b & ((1u32 << i) - 1)).count_ones();
        bits &= bits - 1;
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl GrassmannNumber {
    pub fn zero(ngen: u32) -> Self {
        assert!(ngen <= 32, "generator pool limited to 32");
        GrassmannNumber {
            ngen,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn scalar(ngen: u32, value: f64) -> Self {
        let mut g = Self::zero(ngen);
        if value.abs() >= ZERO_TOL {
            g.coeffs.insert(0, value);
        }
        g
    }

    pub fn one(ngen: u32) -> Self {
        Self::scalar(ngen, 1.0)
    }

    /// The generator `g_index`.
    pub fn generator(ngen: u32, index: u32) -> Self {
        assert!(index < ngen, "generator index out of pool");
        let mut g = Self::zero(ngen);
        g.coeffs.insert(1 << index, 1.0);
        g
    }

    /// `coef * g_i1 g_i2 ...` for ascending, distinct indices.
    pub fn monomial(ngen: u32, indices: &[u32], coef: f64) -> Self {
        let mut mask = 0u32;
        for &i in indices {
            assert!(i < ngen);
            assert!(mask & (1 << i) == 0, "repeated generator index");
            mask |= 1 << i;
        }
        let mut g = Self::zero(ngen);
        if coef.abs() >= ZERO_TOL {
            g.coeffs.insert(mask, coef);
        }
        g
    }

    pub fn ngen(&self) -> u32 {
        self.ngen
    }

    pub fn coeff(&self, mask: u32) -> f64 {
        self.coeffs.get(&mask).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.coeffs.iter().map(|(&m, &c)| (m, c))
    }

    /// Coefficient of the empty monomial.
    pub fn body(&self) -> f64 {
        self.coeff(0)
    }

    /// The nilpotent part `self - body`.
    pub fn soul(&self) -> Self {
        let mut g = self.clone();
        g.coeffs.remove(&0);
        g
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn parity(&self) -> Parity {
        let mut even = false;
        let mut odd = false;
        for &m in self.coeffs.keys() {
            if m.count_ones() % 2 == 0 {
                even = true;
            } else {
                odd = true;
            }
        }
        match (even, odd) {
            (true, true) => Parity::Mixed,
            (false, true) => Parity::Odd,
            _ => Parity::Even,
        }
    }

    /// True for even elements; the zero element counts as both parities.
    pub fn is_even(&self) -> bool {
        self.coeffs.keys().all(|m| m.count_ones() % 2 == 0)
    }

    pub fn is_odd(&self) -> bool {
        self.coeffs.keys().all(|m| m.count_ones() % 2 == 1)
    }

    pub fn is_positive_even(&self) -> bool {
        self.is_even() && self.body() > ZERO_TOL
    }

    fn prune(&mut self) {
        self.coeffs.retain(|_, c| c.abs() >= ZERO_TOL);
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut g = self.clone();
        for c in g.coeffs.values_mut() {
            *c *= s;
        }
        g.prune();
        g
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_pool(other)?;
        let mut g = self.clone();
        for (&m, &c) in &other.coeffs {
            *g.coeffs.entry(m).or_insert(0.0) += c;
        }
        g.prune();
        Ok(g)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_pool(other)?;
        let mut g = Self::zero(self.ngen);
        for (&ma, &ca) in &self.coeffs {
            for (&mb, &cb) in &other.coeffs {
                if ma & mb != 0 {
                    continue;
                }
                let sign = merge_sign(ma, mb);
                *g.coeffs.entry(ma | mb).or_insert(0.0) += sign * ca * cb;
            }
        }
        g.prune();
        Ok(g)
    }

    fn check_pool(&self, other: &Self) -> Result<()> {
        if self.ngen != other.ngen {
            return Err(Error::PoolMismatch(self.ngen, other.ngen));
        }
        Ok(())
    }

    /// Multiplicative inverse; requires nonzero body and even parity.
    pub fn inv(&self) -> Result<Self> {
        if !self.is_even() {
            return Err(Error::Parity("inverse of a non-even element".into()));
        }
        let b = self.body();
        if b.abs() < ZERO_TOL {
            return Err(Error::NotInvertible);
        }
        // a = b(1 + n), a^-1 = b^-1 sum (-n)^k; n nilpotent so the series stops.
        let n = self.soul().scale(1.0 / b);
        let mut acc = Self::one(self.ngen);
        let mut term = Self::one(self.ngen);
        for _ in 0..=self.ngen {
            term = (&term * &n).scale(-1.0);
            if term.is_zero() {
                break;
            }
            acc = &acc + &term;
        }
        Ok(acc.scale(1.0 / b))
    }

    /// Square root of an even element with positive body; the result has
    /// positive body and squares back to `self` exactly.
    pub fn sqrt_even(&self) -> Result<Self> {
        if !self.is_even() {
            return Err(Error::Parity("sqrt of a non-even element".into()));
        }
        let b = self.body();
        if b <= ZERO_TOL {
            return Err(Error::Domain("sqrt requires positive body".into()));
        }
        let n = self.soul().scale(1.0 / b);
        // (1+n)^(1/2) via the binomial series, truncated by nilpotency.
        let mut acc = Self::one(self.ngen);
        let mut term = Self::one(self.ngen);
        let mut coef = 1.0f64;
        for k in 1..=(self.ngen as i64) {
            coef *= (0.5 - (k - 1) as f64) / k as f64;
            term = &term * &n;
            if term.is_zero() {
                break;
            }
            acc = &acc + &term.scale(coef);
        }
        Ok(acc.scale(b.sqrt()))
    }

    /// Fourth root of an even element with positive body.
    pub fn quartic_root(&self) -> Result<Self> {
        self.sqrt_even()?.sqrt_even()
    }

    /// Natural logarithm of an even element with positive body.
    pub fn ln_even(&self) -> Result<Self> {
        if !self.is_even() {
            return Err(Error::Parity("ln of a non-even element".into()));
        }
        let b = self.body();
        if b <= ZERO_TOL {
            return Err(Error::Domain("ln requires positive body".into()));
        }
        let n = self.soul().scale(1.0 / b);
        let mut acc = Self::scalar(self.ngen, b.ln());
        let mut term = Self::one(self.ngen);
        for k in 1..=(self.ngen as i64) {
            term = &term * &n;
            if term.is_zero() {
                break;
            }
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            acc = &acc + &term.scale(sign / k as f64);
        }
        Ok(acc)
    }

    /// Exponential of an even element.
    pub fn exp_even(&self) -> Result<Self> {
        if !self.is_even() {
            return Err(Error::Parity("exp of a non-even element".into()));
        }
        let n = self.soul();
        let mut acc = Self::one(self.ngen);
        let mut term = Self::one(self.ngen);
        let mut fact = 1.0f64;
        for k in 1..=(self.ngen as i64) {
            term = &term * &n;
            if term.is_zero() {
                break;
            }
            fact *= k as f64;
            acc = &acc + &term.scale(1.0 / fact);
        }
        Ok(acc.scale(self.body().exp()))
    }

    /// Largest absolute coefficient difference against `other`.
    pub fn max_coeff_delta(&self, other: &Self) -> f64 {
        let mut d = 0.0f64;
        for (&m, &c) in &self.coeffs {
            d = d.max((c - other.coeff(m)).abs());
        }
        for (&m, &c) in &other.coeffs {
            d = d.max((c - self.coeff(m)).abs());
        }
        d
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.ngen == other.ngen && self.max_coeff_delta(other) <= tol
    }

    pub fn approx_zero(&self, tol: f64) -> bool {
        self.coeffs.values().all(|c| c.abs() <= tol)
    }

    /// Textual form: terms sorted by (cardinality, ascending index list),
    /// each printed as `coef*g<i>g<j>...`; round-trips bit-exactly.
    pub fn to_text(&self) -> String {
        if self.coeffs.is_empty() {
            return "0".to_string();
        }
        let mut keys: Vec<u32> = self.coeffs.keys().copied().collect();
        keys.sort_by_key(|m| (m.count_ones(), mask_indices(*m)));
        let mut out = String::new();
        for (pos, m) in keys.iter().enumerate() {
            let c = self.coeffs[m];
            if pos == 0 {
                out.push_str(&format_coef(c));
            } else if c < 0.0 {
                out.push('-');
                out.push_str(&format_coef(-c));
            } else {
                out.push('+');
                out.push_str(&format_coef(c));
            }
            let mut bits = *m;
            if bits != 0 {
                out.push('*');
                while bits != 0 {
                    let i = bits.trailing_zeros();
                    out.push('g');
                    out.push_str(&i.to_string());
                    bits &= bits - 1;
                }
            }
        }
        out
    }

    pub fn from_text(ngen: u32, text: &str) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() {
            return Err(Error::Domain("empty grassmann literal".into()));
        }
        let mut g = Self::zero(ngen);
        if text == "0" {
            return Ok(g);
        }
        // Split into signed terms; '-' only occurs leading a term since
        // coefficients are printed without exponents.
        let mut terms: Vec<String> = Vec::new();
        let mut cur = String::new();
        for (i, ch) in text.chars().enumerate() {
            if (ch == '+' || ch == '-') && i > 0 {
                terms.push(cur.clone());
                cur.clear();
                if ch == '-' {
                    cur.push('-');
                }
            } else {
                cur.push(ch);
            }
        }
        terms.push(cur);
        for term in terms {
            let (coef_str, gen_str) = match term.split_once('*') {
                Some((c, g)) => (c.to_string(), g.to_string()),
                None => (term.clone(), String::new()),
            };
            let coef: f64 = coef_str
                .parse()
                .map_err(|_| Error::Domain(format!("bad coefficient `{coef_str}`")))?;
            let mut mask = 0u32;
            let mut prev: Option<u32> = None;
            for part in gen_str.split('g').filter(|p| !p.is_empty()) {
                let idx: u32 = part
                    .parse()
                    .map_err(|_| Error::Domain(format!("bad generator `{part}`")))?;
                if idx >= ngen {
                    return Err(Error::Domain(format!("generator g{idx} outside pool")));
                }
                if let Some(p) = prev {
                    if idx <= p {
                        return Err(Error::Domain("generator indices must ascend".into()));
                    }
                }
                prev = Some(idx);
                mask |= 1 << idx;
            }
            *g.coeffs.entry(mask).or_insert(0.0) += coef;
        }
        g.prune();
        Ok(g)
    }
}

fn mask_indices(mask: u32) -> Vec<u32> {
    let mut v = Vec::new();
    let mut bits = mask;
    while bits != 0 {
        v.push(bits.trailing_zeros());
        bits &= bits - 1;
    }
    v
}

fn format_coef(c: f64) -> String {
    // f64 Display is the shortest decimal that round-trips and never uses
    // scientific notation, so the textual form stays unambiguous.
    format!("{c}")
}

impl fmt::Display for GrassmannNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl Add for &GrassmannNumber {
    type Output = GrassmannNumber;
    fn add(self, rhs: &GrassmannNumber) -> GrassmannNumber {
        self.checked_add(rhs).expect("pool mismatch in add")
    }
}

impl Sub for &GrassmannNumber {
    type Output = GrassmannNumber;
    fn sub(self, rhs: &GrassmannNumber) -> GrassmannNumber {
        self.checked_add(&rhs.scale(-1.0)).expect("pool mismatch in sub")
    }
}

impl Mul for &GrassmannNumber {
    type Output = GrassmannNumber;
    fn mul(self, rhs: &GrassmannNumber) -> GrassmannNumber {
        self.checked_mul(rhs).expect("pool mismatch in mul")
    }
}

impl Neg for &GrassmannNumber {
    type Output = GrassmannNumber;
    fn neg(self) -> GrassmannNumber {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type G = GrassmannNumber;

    fn th(i: u32) -> G {
        G::generator(6, i)
    }

    /// Independent product oracle: monomials as index vectors, signs by
    /// explicit bubble sort of the concatenation.
    fn oracle_mul(a: &G, b: &G) -> G {
        let mut out = G::zero(a.ngen());
        for (ma, ca) in a.terms() {
            for (mb, cb) in b.terms() {
                let mut idx = mask_indices(ma);
                idx.extend(mask_indices(mb));
                let mut sign = 1.0;
                let mut dup = false;
                // bubble sort counting swaps
                for i in 0..idx.len() {
                    for j in 0..idx.len().saturating_sub(1 + i) {
                        if idx[j] > idx[j + 1] {
                            idx.swap(j, j + 1);
                            sign = -sign;
                        }
                    }
                }
                for w in idx.windows(2) {
                    if w[0] == w[1] {
                        dup = true;
                    }
                }
                if dup {
                    continue;
                }
                let term = G::monomial(a.ngen(), &idx, sign * ca * cb);
                out = &out + &term;
            }
        }
        out
    }

    #[test]
    fn generator_product() {
        let p = &th(0) * &th(1);
        assert_eq!(p.coeff(0b11), 1.0);
        let q = &th(1) * &th(0);
        assert_eq!(q.coeff(0b11), -1.0);
    }

    #[test]
    fn unit_product_with_nilpotent() {
        // (1 + t0 t1)(1 - t0 t1) = 1
        let x = &G::one(6) + &(&th(0) * &th(1));
        let y = &G::one(6) - &(&th(0) * &th(1));
        assert!((&x * &y).approx_eq(&G::one(6), 1e-15));
    }

    #[test]
    fn expansion_matches_oracle() {
        // (2 + t0)(3 + t1) = 6 + 3 t0 + 2 t1 + t0 t1
        let a = &G::scalar(6, 2.0) + &th(0);
        let b = &G::scalar(6, 3.0) + &th(1);
        let p = &a * &b;
        let expect = oracle_mul(&a, &b);
        assert!(p.approx_eq(&expect, 1e-15));
        assert_eq!(p.body(), 6.0);
        assert_eq!(p.coeff(0b01), 3.0);
        assert_eq!(p.coeff(0b10), 2.0);
        assert_eq!(p.coeff(0b11), 1.0);
    }

    #[test]
    fn body_cases() {
        let x = &G::scalar(6, 3.0) + &(&th(0) * &th(1));
        assert_eq!(x.body(), 3.0);
        assert_eq!(th(0).body(), 0.0);
        assert_eq!(G::zero(6).body(), 0.0);
    }

    #[test]
    fn inverse_cases() {
        assert!(G::scalar(6, 2.0)
            .inv()
            .unwrap()
            .approx_eq(&G::scalar(6, 0.5), 1e-15));
        let x = &G::one(6) + &(&th(0) * &th(1));
        let xi = x.inv().unwrap();
        let expect = &G::one(6) - &(&th(0) * &th(1));
        assert!(xi.approx_eq(&expect, 1e-15));
        assert!((&xi * &x).approx_eq(&G::one(6), 1e-15));
        assert!(matches!(th(0).inv(), Err(Error::Parity(_))));
        let odd_body = &th(0) * &th(1); // zero body, even
        assert!(matches!(odd_body.inv(), Err(Error::NotInvertible)));
    }

    #[test]
    fn sqrt_cases() {
        assert!(G::scalar(6, 4.0)
            .sqrt_even()
            .unwrap()
            .approx_eq(&G::scalar(6, 2.0), 1e-15));
        let x = &G::one(6) + &(&th(0) * &th(1)).scale(2.0);
        let r = x.sqrt_even().unwrap();
        assert!((&r * &r).approx_eq(&x, 1e-15));
        assert!(r.approx_eq(&(&G::one(6) + &(&th(0) * &th(1))), 1e-15));
        assert!(matches!(
            G::scalar(6, -1.0).sqrt_even(),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn parity_cases() {
        let even = &G::one(6) + &(&th(0) * &th(1));
        assert_eq!(even.parity(), Parity::Even);
        let odd = &th(0) + &th(1).scale(2.0);
        assert_eq!(odd.parity(), Parity::Odd);
        let mixed = &G::one(6) + &th(0);
        assert_eq!(mixed.parity(), Parity::Mixed);
    }

    #[test]
    fn nilpotency() {
        let mut x = &th(0) + &(&th(1) * &(&th(2) * &th(3)));
        let orig = x.clone();
        for _ in 0..6 {
            x = &x * &orig;
        }
        assert!(x.is_zero());
    }

    #[test]
    fn pool_mismatch_reported() {
        let a = G::one(4);
        let b = G::one(6);
        assert!(matches!(
            a.checked_mul(&b),
            Err(Error::PoolMismatch(4, 6))
        ));
    }

    #[test]
    fn ln_exp_round_trip() {
        let x = &G::scalar(6, 2.5) + &(&th(0) * &th(1)).scale(0.3);
        let back = x.ln_even().unwrap().exp_even().unwrap();
        assert!(back.approx_eq(&x, 1e-12));
    }

    #[test]
    fn text_round_trip_exact() {
        let x = &(&G::scalar(6, -3.25) + &th(2).scale(0.1)) + &(&th(0) * &th(1)).scale(7.5e-3);
        let s = x.to_text();
        let y = G::from_text(6, &s).unwrap();
        assert_eq!(x, y);
        assert_eq!(G::from_text(6, "0").unwrap(), G::zero(6));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn prop_mul_matches_oracle(seed in 0u64..512) {
            let (a, b) = random_pair(seed);
            let fast = &a * &b;
            let slow = oracle_mul(&a, &b);
            prop_assert!(fast.approx_eq(&slow, 1e-12));
        }

        #[test]
        fn prop_associative(seed in 0u64..512) {
            let (a, b) = random_pair(seed);
            let (c, _) = random_pair(seed.wrapping_add(1000));
            let l = &(&a * &b) * &c;
            let r = &a * &(&b * &c);
            prop_assert!(l.approx_eq(&r, 1e-9));
        }

        #[test]
        fn prop_body_multiplicative(seed in 0u64..512) {
            let (a, b) = random_pair(seed);
            let p = &a * &b;
            prop_assert!((p.body() - a.body() * b.body()).abs() < 1e-9);
        }
    }

    fn random_pair(seed: u64) -> (G, G) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut gen = |_: u32| {
            let mut g = G::zero(6);
            for _ in 0..5 {
                let mask = rng.gen_range(0u32..64);
                let coef = rng.gen_range(-2.0..2.0);
                g = &g + &G::monomial(6, &mask_indices(mask), coef);
            }
            g
        };
        (gen(0), gen(1))
    }
}
