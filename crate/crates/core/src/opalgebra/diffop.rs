use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::One;

use super::chart::Chart;
use super::coeff::Coeff;
use super::poly::{q, MAX_COORDS, Q};
use crate::error::{Error, Result};

/// Exponents of the coordinate derivatives, in chart order. The radical is
/// never a differentiation direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct MultiIndex(pub [u16; MAX_COORDS]);

impl MultiIndex {
    pub fn zero() -> MultiIndex {
        MultiIndex([0; MAX_COORDS])
    }

    pub fn unit(i: usize) -> MultiIndex {
        let mut m = MultiIndex::zero();
        m.0[i] = 1;
        m
    }

    pub fn from_slice(exps: &[u16]) -> MultiIndex {
        let mut m = MultiIndex::zero();
        m.0[..exps.len()].copy_from_slice(exps);
        m
    }

    pub fn order(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        let mut out = *self;
        for (a, b) in out.0.iter_mut().zip(other.0) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &MultiIndex) -> MultiIndex {
        let mut out = *self;
        for (a, b) in out.0.iter_mut().zip(other.0) {
            *a -= b;
        }
        out
    }

    pub fn le(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(other.0).all(|(a, b)| *a <= b)
    }

    /// All `rho <= self`, componentwise.
    pub fn below(&self) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex::zero()];
        for i in 0..MAX_COORDS {
            let mut next = Vec::with_capacity(out.len() * (self.0[i] as usize + 1));
            for base in &out {
                for e in 0..=self.0[i] {
                    let mut m = *base;
                    m.0[i] = e;
                    next.push(m);
                }
            }
            out = next;
        }
        out
    }

    /// `prod_i binom(self_i, rho_i)`.
    pub fn binomial(&self, rho: &MultiIndex) -> u64 {
        self.0.iter().zip(rho.0).map(|(&n, k)| binom(n as u64, k as u64)).product()
    }

    /// `prod_i self_i!`.
    pub fn factorial(&self) -> u64 {
        self.0.iter().map(|&n| (1..=n as u64).product::<u64>()).product()
    }

    /// All multi-indices over `dim` coordinates with order exactly `n`, graded-lex ascending.
    pub fn of_order(dim: usize, n: u32) -> Vec<MultiIndex> {
        fn rec(dim: usize, i: usize, left: u32, cur: &mut MultiIndex, out: &mut Vec<MultiIndex>) {
            if i + 1 == dim {
                cur.0[i] = left as u16;
                out.push(*cur);
                cur.0[i] = 0;
                return;
            }
            for e in (0..=left).rev() {
                cur.0[i] = e as u16;
                rec(dim, i + 1, left - e, cur, out);
            }
            cur.0[i] = 0;
        }
        let mut out = Vec::new();
        rec(dim, 0, n, &mut MultiIndex::zero(), &mut out);
        out.sort();
        out
    }

    pub fn up_to_order(dim: usize, n: u32) -> Vec<MultiIndex> {
        (0..=n).flat_map(|k| MultiIndex::of_order(dim, k)).collect()
    }
}

pub(crate) fn binom(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order().cmp(&other.order()).then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Memoised iterated derivatives of one function under a single-step rule.
pub(crate) struct PartialsCache<F: Fn(&Coeff, usize) -> Coeff> {
    cache: HashMap<MultiIndex, Coeff>,
    step: F,
}

impl<F: Fn(&Coeff, usize) -> Coeff> PartialsCache<F> {
    pub(crate) fn new(base: Coeff, step: F) -> Self {
        let mut cache = HashMap::new();
        cache.insert(MultiIndex::zero(), base);
        PartialsCache { cache, step }
    }

    pub(crate) fn get(&mut self, sigma: &MultiIndex) -> Coeff {
        if let Some(c) = self.cache.get(sigma) {
            return c.clone();
        }
        let i = sigma.0.iter().position(|&e| e > 0).expect("nonzero multi-index");
        let prev = sigma.sub(&MultiIndex::unit(i));
        let lower = self.get(&prev);
        let out = (self.step)(&lower, i);
        self.cache.insert(*sigma, out.clone());
        out
    }
}

/// A finite sum `sum_sigma g_sigma d^sigma` with [`Coeff`] coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DiffOp {
    chart: Chart,
    terms: BTreeMap<MultiIndex, Coeff>,
}

impl DiffOp {
    pub fn zero(chart: Chart) -> DiffOp {
        DiffOp { chart, terms: BTreeMap::new() }
    }

    pub fn identity(chart: Chart) -> DiffOp {
        DiffOp::multiplication(Coeff::one(chart))
    }

    pub fn multiplication(f: Coeff) -> DiffOp {
        let mut d = DiffOp::zero(f.chart());
        d.add_term(MultiIndex::zero(), f);
        d
    }

    /// `d^sigma` with unit coefficient.
    pub fn derivative(chart: Chart, sigma: MultiIndex) -> DiffOp {
        let mut d = DiffOp::zero(chart);
        d.add_term(sigma, Coeff::one(chart));
        d
    }

    pub fn partial(chart: Chart, i: usize) -> DiffOp {
        DiffOp::derivative(chart, MultiIndex::unit(i))
    }

    pub fn laplacian(chart: Chart) -> DiffOp {
        let mut d = DiffOp::zero(chart);
        for i in 0..chart.dim() {
            let mut s = MultiIndex::zero();
            s.0[i] = 2;
            d.add_term(s, Coeff::one(chart));
        }
        d
    }

    pub fn from_terms(chart: Chart, terms: impl IntoIterator<Item = (MultiIndex, Coeff)>) -> DiffOp {
        let mut d = DiffOp::zero(chart);
        for (s, c) in terms {
            d.add_term(s, c);
        }
        d
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Coeff)> + '_ {
        self.terms.iter()
    }

    pub fn coefficient(&self, sigma: &MultiIndex) -> Coeff {
        self.terms.get(sigma).cloned().unwrap_or_else(|| Coeff::zero(self.chart))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Syntactic degree; the zero operator reports 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(MultiIndex::order).max().unwrap_or(0)
    }

    pub fn add_term(&mut self, sigma: MultiIndex, c: Coeff) {
        assert_eq!(c.chart(), self.chart, "chart mismatch");
        if c.is_zero() {
            return;
        }
        let merged = match self.terms.remove(&sigma) {
            Some(old) => &old + &c,
            None => c,
        };
        if !merged.is_zero() {
            self.terms.insert(sigma, merged);
        }
    }

    pub fn same_chart(&self, other: &DiffOp) -> Result<()> {
        if self.chart == other.chart {
            Ok(())
        } else {
            Err(Error::ChartMismatch { left: self.chart, right: other.chart })
        }
    }

    /// `f * self`, i.e. composition with the multiplication operator on the left.
    pub fn left_mul(&self, f: &Coeff) -> DiffOp {
        DiffOp::from_terms(self.chart, self.terms.iter().map(|(s, c)| (*s, f * c)))
    }

    pub fn scale(&self, c: &Q) -> DiffOp {
        DiffOp::from_terms(self.chart, self.terms.iter().map(|(s, g)| (*s, g.scale(c))))
    }

    pub fn map_coeffs(&self, f: impl Fn(&Coeff) -> Coeff) -> DiffOp {
        DiffOp::from_terms(self.chart, self.terms.iter().map(|(s, g)| (*s, f(g))))
    }

    /// Full Leibniz expansion of `self ∘ other`.
    pub fn compose(&self, other: &DiffOp) -> Result<DiffOp> {
        self.same_chart(other)?;
        let mut out = DiffOp::zero(self.chart);
        for (tau, b) in &other.terms {
            let mut partials = PartialsCache::new(b.clone(), |c: &Coeff, i| c.partial(i));
            for (sigma, a) in &self.terms {
                for rho in sigma.below() {
                    let db = partials.get(&rho);
                    if db.is_zero() {
                        continue;
                    }
                    let k = sigma.binomial(&rho);
                    let coeff = (a * &db).scale(&q(k as i64));
                    out.add_term(sigma.sub(&rho).add(tau), coeff);
                }
            }
        }
        Ok(out)
    }

    pub fn commutator(&self, other: &DiffOp) -> Result<DiffOp> {
        Ok(&self.compose(other)? - &other.compose(self)?)
    }

    /// `self(f)`.
    pub fn apply(&self, f: &Coeff) -> Result<Coeff> {
        if self.chart != f.chart() {
            return Err(Error::ChartMismatch { left: self.chart, right: f.chart() });
        }
        let mut partials = PartialsCache::new(f.clone(), |c: &Coeff, i| c.partial(i));
        let mut out = Coeff::zero(self.chart);
        for (sigma, g) in &self.terms {
            let d = partials.get(sigma);
            out = &out + &(g * &d);
        }
        Ok(out)
    }

    /// `e^{-phi} self(f e^{phi})`, using `d_i(f e^phi) = (d_i f + f d_i phi) e^phi`.
    pub fn apply_weighted(&self, f: &Coeff, phi: &Coeff) -> Result<Coeff> {
        if self.chart != f.chart() || self.chart != phi.chart() {
            return Err(Error::ChartMismatch { left: self.chart, right: f.chart() });
        }
        let grad: Vec<Coeff> = (0..self.chart.dim()).map(|i| phi.partial(i)).collect();
        let mut partials = PartialsCache::new(f.clone(), move |c: &Coeff, i| &c.partial(i) + &(c * &grad[i]));
        let mut out = Coeff::zero(self.chart);
        for (sigma, g) in &self.terms {
            let d = partials.get(sigma);
            out = &out + &(g * &d);
        }
        Ok(out)
    }

    pub fn substitute_param(&self, p: super::Param, value: &Q) -> DiffOp {
        self.map_coeffs(|c| c.substitute_param(p, value))
    }

    pub fn has_params(&self) -> bool {
        self.terms.values().any(Coeff::has_params)
    }
}

/// True iff every iterated commutator `[..[[d, f0], f1].., fk]` with probes
/// drawn (with repetition) from `probes` vanishes.
///
/// Multiplication operators commute, so the iterated commutator is symmetric
/// in the probes and only multisets need to be visited.
pub fn verify_degree_bound(d: &DiffOp, k: u32, probes: &[Coeff]) -> Result<bool> {
    if probes.is_empty() {
        return Err(Error::InvalidArgument("probe list must be non-empty".into()));
    }
    for p in probes {
        if p.chart() != d.chart() {
            return Err(Error::ChartMismatch { left: d.chart(), right: p.chart() });
        }
    }
    let mults: Vec<DiffOp> = probes.iter().cloned().map(DiffOp::multiplication).collect();
    fn rec(cur: &DiffOp, depth: u32, start: usize, mults: &[DiffOp]) -> Result<bool> {
        if depth == 0 {
            return Ok(cur.is_zero());
        }
        if cur.is_zero() {
            return Ok(true);
        }
        for (i, m) in mults.iter().enumerate().skip(start) {
            let next = cur.commutator(m)?;
            if !rec(&next, depth - 1, i, mults)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
    rec(d, k + 1, 0, &mults)
}

fn assert_same(a: &DiffOp, b: &DiffOp) {
    assert!(a.chart == b.chart, "chart mismatch: {} vs {}", a.chart, b.chart);
}

impl Add for &DiffOp {
    type Output = DiffOp;
    fn add(self, rhs: &DiffOp) -> DiffOp {
        assert_same(self, rhs);
        let mut out = self.clone();
        for (s, c) in &rhs.terms {
            out.add_term(*s, c.clone());
        }
        out
    }
}

impl Sub for &DiffOp {
    type Output = DiffOp;
    fn sub(self, rhs: &DiffOp) -> DiffOp {
        assert_same(self, rhs);
        let mut out = self.clone();
        for (s, c) in &rhs.terms {
            out.add_term(*s, -c);
        }
        out
    }
}

impl Neg for &DiffOp {
    type Output = DiffOp;
    fn neg(self) -> DiffOp {
        self.scale(&-Q::one())
    }
}

impl Mul for &DiffOp {
    type Output = DiffOp;
    fn mul(self, rhs: &DiffOp) -> DiffOp {
        self.compose(rhs).expect("chart mismatch")
    }
}

/// A first-order homogeneous operator.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VectorField(DiffOp);

impl VectorField {
    pub fn new(chart: Chart, components: &[Coeff]) -> VectorField {
        assert_eq!(components.len(), chart.dim());
        VectorField(DiffOp::from_terms(
            chart,
            components.iter().enumerate().map(|(i, c)| (MultiIndex::unit(i), c.clone())),
        ))
    }

    pub fn component(&self, i: usize) -> Coeff {
        self.0.coefficient(&MultiIndex::unit(i))
    }

    pub fn as_op(&self) -> &DiffOp {
        &self.0
    }

    pub fn into_op(self) -> DiffOp {
        self.0
    }
}

impl TryFrom<DiffOp> for VectorField {
    type Error = Error;

    fn try_from(d: DiffOp) -> Result<VectorField> {
        if d.terms().all(|(s, _)| s.order() == 1) {
            Ok(VectorField(d))
        } else {
            Err(Error::InvalidArgument("operator is not a first-order homogeneous field".into()))
        }
    }
}

impl std::ops::Deref for VectorField {
    type Target = DiffOp;
    fn deref(&self) -> &DiffOp {
        &self.0
    }
}
