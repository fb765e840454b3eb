use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::chart::{Chart, Param};
use super::poly::{q, Mono, Poly, Q, NVARS, PARAM_SLOT, RADICAL_SLOT};
use crate::error::{Error, Result};

/// Exact coefficient function `numerator / radical^d` on a chart.
///
/// Canonical form: every numerator monomial has radical exponent 0 or 1, and
/// the numerator is not divisible by the radical when `d > 0`. The ring
/// `Q[params][coords][radical] / (radical^2 - sum coords^2)` is a domain
/// free over `Q[params][coords]` with basis `{1, radical}`, so the canonical
/// form is unique and equality is structural.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Coeff {
    chart: Chart,
    num: Poly,
    den: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithKind {
    Add,
    Sub,
    Mul,
}

pub fn coeff_arith(a: &Coeff, b: &Coeff, kind: ArithKind) -> Result<Coeff> {
    a.same_chart(b)?;
    Ok(match kind {
        ArithKind::Add => a + b,
        ArithKind::Sub => a - b,
        ArithKind::Mul => a * b,
    })
}

fn reduce_radical(chart: Chart, p: &Poly) -> Poly {
    if p.max_exponent(RADICAL_SLOT) < 2 {
        return p.clone();
    }
    let s = chart.radius_squared();
    let mut powers = vec![Poly::constant(Q::one())];
    let mut out = Poly::zero();
    for (m, c) in p.terms() {
        let e = m.0[RADICAL_SLOT];
        let half = (e / 2) as usize;
        while powers.len() <= half {
            let next = &powers[powers.len() - 1] * &s;
            powers.push(next);
        }
        let rest = m.with(RADICAL_SLOT, e % 2);
        out = &out + &powers[half].mul_mono(&rest, c);
    }
    out
}

impl Coeff {
    pub fn from_parts(chart: Chart, num: Poly, den: u32) -> Coeff {
        let mut num = reduce_radical(chart, &num);
        let mut den = den;
        if num.is_zero() {
            den = 0;
        }
        while den > 0 {
            let (a, b) = num.split_slot_linear(RADICAL_SLOT);
            match a.divide_by_sum_of_squares(chart.dim()) {
                Some(quot) => {
                    num = &b + &quot.mul_mono(&Mono::var(RADICAL_SLOT), &Q::one());
                    den -= 1;
                }
                None => break,
            }
        }
        Coeff { chart, num, den }
    }

    pub fn zero(chart: Chart) -> Coeff {
        Coeff { chart, num: Poly::zero(), den: 0 }
    }

    pub fn one(chart: Chart) -> Coeff {
        Coeff::constant(chart, Q::one())
    }

    pub fn constant(chart: Chart, c: Q) -> Coeff {
        Coeff { chart, num: Poly::constant(c), den: 0 }
    }

    pub fn integer(chart: Chart, n: i64) -> Coeff {
        Coeff::constant(chart, q(n))
    }

    pub fn coord(chart: Chart, index: usize) -> Coeff {
        assert!(index < chart.dim(), "coordinate index out of range");
        Coeff { chart, num: Poly::var(index), den: 0 }
    }

    pub fn coord_named(chart: Chart, name: &str) -> Result<Coeff> {
        chart
            .coord_index(name)
            .map(|i| Coeff::coord(chart, i))
            .ok_or_else(|| Error::UnknownCoordinate { name: name.to_string(), chart })
    }

    pub fn radical(chart: Chart) -> Coeff {
        Coeff { chart, num: Poly::var(RADICAL_SLOT), den: 0 }
    }

    /// `radical^n` for any integer `n`.
    pub fn radical_pow(chart: Chart, n: i32) -> Coeff {
        if n >= 0 {
            Coeff::from_parts(chart, Poly::monomial(Mono::one().with(RADICAL_SLOT, n as u16), Q::one()), 0)
        } else {
            Coeff { chart, num: Poly::constant(Q::one()), den: (-n) as u32 }
        }
    }

    pub fn param(chart: Chart, p: Param) -> Coeff {
        Coeff { chart, num: Poly::var(p.slot()), den: 0 }
    }

    /// Monomial in coordinates only, exponents in chart order.
    pub fn coord_monomial(chart: Chart, exps: &[u16]) -> Coeff {
        let mut m = Mono::one();
        m.0[..exps.len()].copy_from_slice(exps);
        Coeff { chart, num: Poly::monomial(m, Q::one()), den: 0 }
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn radical_denominator_power(&self) -> u32 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den == 0 && self.num == Poly::constant(Q::one())
    }

    /// Rational constant, if the coefficient is one.
    pub fn as_constant(&self) -> Option<Q> {
        if self.is_zero() {
            return Some(Q::zero());
        }
        if self.den == 0 && self.num.len() == 1 {
            let (m, c) = self.num.terms().next().unwrap();
            if *m == Mono::one() {
                return Some(c.clone());
            }
        }
        None
    }

    /// True iff no coordinate or radical appears (parameters allowed).
    pub fn is_pure_parameter(&self) -> bool {
        self.den == 0 && self.num.terms().all(|(m, _)| !m.has_coords_or_radical())
    }

    pub fn has_params(&self) -> bool {
        self.num.terms().any(|(m, _)| m.has_params())
    }

    /// `c * radical^n` when the coefficient has that shape.
    pub fn as_radical_monomial(&self) -> Option<(Q, i32)> {
        if self.is_zero() {
            return None;
        }
        let (mut a, b) = self.num.split_slot_linear(RADICAL_SLOT);
        let (mut rest, odd) = match (a.is_zero(), b.is_zero()) {
            (false, true) => (std::mem::take(&mut a), 0),
            (true, false) => (b, 1),
            _ => return None,
        };
        let mut pow = odd;
        while let Some(quot) = rest.divide_by_sum_of_squares(self.chart.dim()) {
            rest = quot;
            pow += 2;
        }
        if rest.len() == 1 {
            let (m, c) = rest.terms().next().unwrap();
            if *m == Mono::one() {
                return Some((c.clone(), pow - self.den as i32));
            }
        }
        None
    }

    pub fn same_chart(&self, other: &Coeff) -> Result<()> {
        if self.chart == other.chart {
            Ok(())
        } else {
            Err(Error::ChartMismatch { left: self.chart, right: other.chart })
        }
    }

    pub fn checked_add(&self, other: &Coeff) -> Result<Coeff> {
        coeff_arith(self, other, ArithKind::Add)
    }

    pub fn checked_sub(&self, other: &Coeff) -> Result<Coeff> {
        coeff_arith(self, other, ArithKind::Sub)
    }

    pub fn checked_mul(&self, other: &Coeff) -> Result<Coeff> {
        coeff_arith(self, other, ArithKind::Mul)
    }

    pub fn scale(&self, c: &Q) -> Coeff {
        Coeff { chart: self.chart, num: self.num.scale(c), den: if c.is_zero() { 0 } else { self.den } }
    }

    pub fn pow(&self, n: u32) -> Coeff {
        let mut out = Coeff::one(self.chart);
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// Divide by `radical^n`.
    pub fn div_radical_pow(&self, n: i32) -> Coeff {
        self * &Coeff::radical_pow(self.chart, -n)
    }

    /// Numerator expressed over `radical^target` (target ≥ den).
    fn numerator_over(&self, target: u32) -> Poly {
        debug_assert!(target >= self.den);
        let lift = target - self.den;
        if lift == 0 {
            return self.num.clone();
        }
        let m = Mono::one().with(RADICAL_SLOT, lift as u16);
        reduce_radical(self.chart, &self.num.mul_mono(&m, &Q::one()))
    }

    /// Partial derivative along a coordinate, with `d radical / d x_i = x_i / radical`.
    pub fn partial(&self, index: usize) -> Coeff {
        assert!(index < self.chart.dim(), "coordinate index out of range");
        if self.is_zero() {
            return self.clone();
        }
        let (a, b) = self.num.split_slot_linear(RADICAL_SLOT);
        let xi = Mono::var(index);
        let r1 = Mono::var(RADICAL_SLOT);
        let r2 = Mono::one().with(RADICAL_SLOT, 2);
        let r3 = Mono::one().with(RADICAL_SLOT, 3);
        // d(N / R^d) = [R^2 dN - d x_i N] / R^(d+2), dN = dA + R dB + (x_i / R) B
        let mut top = a.derivative(index).mul_mono(&r2, &Q::one());
        top = &top + &b.derivative(index).mul_mono(&r3, &Q::one());
        top = &top + &b.mul_mono(&xi.mul(&r1), &Q::one());
        if self.den > 0 {
            top = &top - &self.num.mul_mono(&xi, &q(self.den as i64));
        }
        Coeff::from_parts(self.chart, top, self.den + 2)
    }

    pub fn partial_named(&self, name: &str) -> Result<Coeff> {
        let i = self
            .chart
            .coord_index(name)
            .ok_or_else(|| Error::UnknownCoordinate { name: name.to_string(), chart: self.chart })?;
        Ok(self.partial(i))
    }

    pub fn substitute_param(&self, p: Param, value: &Q) -> Coeff {
        let num = self.num.substitute(p.slot(), &Poly::constant(value.clone()));
        Coeff::from_parts(self.chart, num, self.den)
    }

    /// Rewrite `w^2` as `-8E`, leaving at most one power of `w`.
    pub fn substitute_frequency(&self) -> Coeff {
        let w = Param::Omega.slot();
        let e = Param::E.slot();
        let mut out = Poly::zero();
        for (m, c) in self.num.terms() {
            let pw = m.0[w];
            let half = pw / 2;
            let base = m.with(w, pw % 2);
            let factor = Poly::monomial(Mono::var(e), q(-8)).pow(half as u32);
            out = &out + &factor.mul_mono(&base, c);
        }
        Coeff::from_parts(self.chart, out, self.den)
    }

    /// Evaluate at a point of the chart (no parameters allowed).
    pub fn eval(&self, point: &[f64]) -> f64 {
        debug_assert_eq!(point.len(), self.chart.dim());
        let mut vals = [0.0; NVARS];
        vals[..point.len()].copy_from_slice(point);
        let rad = point.iter().map(|v| v * v).sum::<f64>().sqrt();
        vals[RADICAL_SLOT] = rad;
        for v in &mut vals[PARAM_SLOT..] {
            *v = f64::NAN;
        }
        self.num.eval_f64(&vals) / rad.powi(self.den as i32)
    }
}

fn assert_same(a: &Coeff, b: &Coeff) {
    assert!(a.chart == b.chart, "chart mismatch: {} vs {}", a.chart, b.chart);
}

impl Add for &Coeff {
    type Output = Coeff;
    fn add(self, rhs: &Coeff) -> Coeff {
        assert_same(self, rhs);
        let d = self.den.max(rhs.den);
        let num = &self.numerator_over(d) + &rhs.numerator_over(d);
        Coeff::from_parts(self.chart, num, d)
    }
}

impl Sub for &Coeff {
    type Output = Coeff;
    fn sub(self, rhs: &Coeff) -> Coeff {
        assert_same(self, rhs);
        let d = self.den.max(rhs.den);
        let num = &self.numerator_over(d) - &rhs.numerator_over(d);
        Coeff::from_parts(self.chart, num, d)
    }
}

impl Mul for &Coeff {
    type Output = Coeff;
    fn mul(self, rhs: &Coeff) -> Coeff {
        assert_same(self, rhs);
        if self.is_zero() || rhs.is_zero() {
            return Coeff::zero(self.chart);
        }
        Coeff::from_parts(self.chart, &self.num * &rhs.num, self.den + rhs.den)
    }
}

impl Neg for &Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        Coeff { chart: self.chart, num: -&self.num, den: self.den }
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::cli::format::format_coeff(self))
    }
}
