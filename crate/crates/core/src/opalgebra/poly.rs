//! Sparse multivariate polynomials over the rationals.
//!
//! A monomial is a fixed array of exponents: slots `0..4` hold chart
//! coordinates, slot 4 the radical, slots `5..8` the formal parameters
//! `k, E, w`. The polynomial layer knows nothing about the radical relation;
//! that lives in [`super::Coeff`].

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

pub type Q = num_rational::BigRational;

pub const NVARS: usize = 8;
pub const MAX_COORDS: usize = 4;
pub const RADICAL_SLOT: usize = 4;
pub const PARAM_SLOT: usize = 5;

pub fn q(n: i64) -> Q {
    Q::from_integer(n.into())
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(n.into(), d.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Mono(pub [u16; NVARS]);

impl Mono {
    pub fn one() -> Mono {
        Mono([0; NVARS])
    }

    pub fn var(slot: usize) -> Mono {
        let mut m = Mono::one();
        m.0[slot] = 1;
        m
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn coord_degree(&self) -> u32 {
        self.0[..MAX_COORDS].iter().map(|&e| e as u32).sum()
    }

    pub fn has_coords_or_radical(&self) -> bool {
        self.0[..PARAM_SLOT].iter().any(|&e| e > 0)
    }

    pub fn has_params(&self) -> bool {
        self.0[PARAM_SLOT..].iter().any(|&e| e > 0)
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        let mut out = *self;
        for (o, e) in out.0.iter_mut().zip(other.0.iter()) {
            *o += *e;
        }
        out
    }

    pub fn with(&self, slot: usize, exp: u16) -> Mono {
        let mut out = *self;
        out.0[slot] = exp;
        out
    }
}

/// Graded lexicographic: lower total degree first, then earlier slots first.
impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<Mono, Q>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn constant(c: Q) -> Poly {
        Poly::monomial(Mono::one(), c)
    }

    pub fn monomial(m: Mono, c: Q) -> Poly {
        let mut p = Poly::zero();
        p.add_term(m, c);
        p
    }

    pub fn var(slot: usize) -> Poly {
        Poly::monomial(Mono::var(slot), Q::one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Q)> + '_ {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Mono) -> Q {
        self.terms.get(m).cloned().unwrap_or_else(Q::zero)
    }

    pub fn add_term(&mut self, m: Mono, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn scale(&self, c: &Q) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, v)| (*m, v * c)).collect(),
        }
    }

    pub fn mul_mono(&self, m: &Mono, c: &Q) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(k, v)| (k.mul(m), v * c)).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut out = Poly::constant(Q::one());
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// Plain partial derivative with respect to a slot (no chain rule).
    pub fn derivative(&self, slot: usize) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.0[slot];
            if e > 0 {
                out.add_term(m.with(slot, e - 1), c * q(e as i64));
            }
        }
        out
    }

    pub fn max_exponent(&self, slot: usize) -> u16 {
        self.terms.keys().map(|m| m.0[slot]).max().unwrap_or(0)
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(Mono::degree).max().unwrap_or(0)
    }

    /// Replace a slot by a polynomial.
    pub fn substitute(&self, slot: usize, value: &Poly) -> Poly {
        let mut powers: Vec<Poly> = vec![Poly::constant(Q::one())];
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.0[slot] as usize;
            while powers.len() <= e {
                let next = &powers[powers.len() - 1] * value;
                powers.push(next);
            }
            let rest = m.with(slot, 0);
            out = &out + &powers[e].mul_mono(&rest, c);
        }
        out
    }

    /// `(a, b)` with `self = a + var(slot) * b`; the slot degree must be ≤ 1.
    pub fn split_slot_linear(&self, slot: usize) -> (Poly, Poly) {
        let mut a = Poly::zero();
        let mut b = Poly::zero();
        for (m, c) in &self.terms {
            match m.0[slot] {
                0 => a.add_term(*m, c.clone()),
                1 => b.add_term(m.with(slot, 0), c.clone()),
                _ => panic!("split_slot_linear on a polynomial of slot degree > 1"),
            }
        }
        (a, b)
    }

    /// Exact division by `sum(slot_i^2)` over the leading `n` slots; `None` if not divisible.
    pub fn divide_by_sum_of_squares(&self, n: usize) -> Option<Poly> {
        let mut rem = self.clone();
        let mut quot = Poly::zero();
        // Lex order with slot 0 first makes slot0^2 the leading term of the divisor.
        loop {
            let lead = rem
                .terms
                .iter()
                .filter(|(m, _)| m.0[0] >= 2)
                .max_by(|a, b| a.0 .0.cmp(&b.0 .0))
                .map(|(m, c)| (*m, c.clone()));
            let Some((m, c)) = lead else { break };
            let qm = m.with(0, m.0[0] - 2);
            quot.add_term(qm, c.clone());
            for i in 0..n {
                let mut t = qm;
                t.0[i] += 2;
                rem.add_term(t, -c.clone());
            }
        }
        if rem.is_zero() {
            Some(quot)
        } else {
            None
        }
    }

    /// Group terms by their parameter part.
    pub fn by_param_monomial(&self) -> BTreeMap<Mono, Poly> {
        let mut out: BTreeMap<Mono, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut pm = Mono::one();
            pm.0[PARAM_SLOT..].copy_from_slice(&m.0[PARAM_SLOT..]);
            let mut rest = *m;
            for e in &mut rest.0[PARAM_SLOT..] {
                *e = 0;
            }
            out.entry(pm).or_default().add_term(rest, c.clone());
        }
        out
    }

    /// Homogeneous components by coordinate degree (radical counted separately).
    pub fn by_coord_degree(&self) -> BTreeMap<u32, Poly> {
        let mut out: BTreeMap<u32, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            out.entry(m.coord_degree()).or_default().add_term(*m, c.clone());
        }
        out
    }

    pub fn eval_f64(&self, values: &[f64; NVARS]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut v = to_f64(c);
                for (slot, &e) in m.0.iter().enumerate() {
                    if e > 0 {
                        v *= values[slot].powi(e as i32);
                    }
                }
                v
            })
            .sum()
    }

    pub fn leading_sign_negative(&self) -> bool {
        self.terms.values().next().map(|c| c.is_negative()).unwrap_or(false)
    }
}

pub fn to_f64(c: &Q) -> f64 {
    use num_traits::ToPrimitive;
    c.to_f64().unwrap_or(f64::NAN)
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, -c.clone());
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (*m, -c.clone())).collect(),
        }
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}
