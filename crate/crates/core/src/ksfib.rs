//! The Kustaanheimo-Stiefel fibration `pi: R^4\{0} -> R^3\{0}`.
//!
//! Coordinates on the 4D chart are stored in the slot order `y1, y2, y3, y0`.
//! The map used here is
//!
//! ```text
//! x1 = 2(y1 y3 - y2 y0),  x2 = 2(y2 y3 + y1 y0),  x3 = y1^2 + y2^2 - y3^2 - y0^2
//! ```
//!
//! which is annihilated by the fiber field `X3 = y0 d3 - y3 d0 + y1 d2 - y2 d1`
//! and satisfies `|x| = R^2`.
//!
//! # Projectability
//!
//! For an operator `D` of degree `k` on the 4D chart and `f` on the 3D chart,
//! the chain rule gives `D(pi^* f) = sum_{|s|<=k} (d^s f o pi) Phi_s` for some
//! functions `Phi_s`. Applying this to the monomials `x^s`, `|s| <= k`, gives a
//! triangular system from which every `Phi_s` is recovered, so `D` maps
//! fiber-invariant functions to fiber-invariant functions exactly when every
//! `Phi_s` is invariant, i.e. when `X3 D(pi^* x^s) = 0` for `|s| <= k`.
//! [`is_projectable`] checks exactly that finite set and [`project`] performs
//! the recovery.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use gauss_quad::{GaussHermite, GaussLaguerre, GaussLegendre};
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::RatMatrix;
use crate::opalgebra::poly::RADICAL_SLOT;
use crate::opalgebra::{q, Chart, Coeff, DiffOp, Mono, MultiIndex, Poly, VectorField, Q};

const Y1: usize = 0;
const Y2: usize = 1;
const Y3: usize = 2;
const Y0: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point4(pub [f64; 4]);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point3(pub [f64; 3]);

impl Point4 {
    /// Components in chart order `(y1, y2, y3, y0)`.
    pub fn new(y: [f64; 4]) -> Result<Point4> {
        if y.iter().all(|v| *v == 0.0) {
            return Err(Error::InvalidArgument("the origin is not in the punctured chart".into()));
        }
        Ok(Point4(y))
    }

    pub fn radius_squared(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }

    fn distance(&self, other: &Point4) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }
}

impl Point3 {
    pub fn new(x: [f64; 3]) -> Result<Point3> {
        if x.iter().all(|v| *v == 0.0) {
            return Err(Error::InvalidArgument("the origin is not in the punctured chart".into()));
        }
        Ok(Point3(x))
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

pub fn ks_forward(p: Point4) -> Point3 {
    let [y1, y2, y3, y0] = p.0;
    Point3([2.0 * (y1 * y3 - y2 * y0), 2.0 * (y2 * y3 + y1 * y0), y1 * y1 + y2 * y2 - y3 * y3 - y0 * y0])
}

/// [`ks_forward`] over the rationals.
pub fn ks_forward_exact(y: &[Q; 4]) -> Result<[Q; 3]> {
    if y.iter().all(Zero::is_zero) {
        return Err(Error::InvalidArgument("the origin is not in the punctured chart".into()));
    }
    let [y1, y2, y3, y0] = y;
    let two = q(2);
    Ok([
        &two * (y1 * y3 - y2 * y0),
        &two * (y2 * y3 + y1 * y0),
        y1 * y1 + y2 * y2 - y3 * y3 - y0 * y0,
    ])
}

fn quad(terms: &[(i64, usize, usize)]) -> Poly {
    let mut p = Poly::zero();
    for &(c, a, b) in terms {
        p.add_term(Mono::var(a).mul(&Mono::var(b)), q(c));
    }
    p
}

/// The three KS quadratics as polynomials on the 4D chart.
pub fn ks_polys() -> [Poly; 3] {
    [
        quad(&[(2, Y1, Y3), (-2, Y2, Y0)]),
        quad(&[(2, Y2, Y3), (2, Y1, Y0)]),
        quad(&[(1, Y1, Y1), (1, Y2, Y2), (-1, Y3, Y3), (-1, Y0, Y0)]),
    ]
}

/// Symmetric matrices `S` with `x_i = sum_ab S_ab y_a y_b`, indexed by chart slot.
pub fn ks_quadratic_forms() -> [[[Q; 4]; 4]; 3] {
    let mut out: [[[Q; 4]; 4]; 3] = Default::default();
    for (i, p) in ks_polys().iter().enumerate() {
        for (m, c) in p.terms() {
            let slots: Vec<usize> = (0..4).flat_map(|s| std::iter::repeat_n(s, m.0[s] as usize)).collect();
            let (a, b) = (slots[0], slots[1]);
            if a == b {
                out[i][a][a] = c.clone();
            } else {
                let half = c / q(2);
                out[i][a][b] = half.clone();
                out[i][b][a] = half;
            }
        }
    }
    out
}

/// Polynomials `pi^*(x^a r^b)` for monomials in the 3D numerator slots.
struct PullbackPowers {
    base: Vec<Poly>,
    powers: Vec<Vec<Poly>>,
}

impl PullbackPowers {
    fn new() -> PullbackPowers {
        let [a, b, c] = ks_polys();
        let base = vec![a, b, c, Chart::R4.radius_squared()];
        PullbackPowers { powers: vec![vec![Poly::constant(Q::one())]; base.len()], base }
    }

    fn power(&mut self, slot: usize, e: usize) -> &Poly {
        while self.powers[slot].len() <= e {
            let next = self.powers[slot].last().unwrap() * &self.base[slot];
            self.powers[slot].push(next);
        }
        &self.powers[slot][e]
    }

    /// Pullback of a single 3D monomial (parameters carried along).
    fn monomial(&mut self, m: &Mono) -> Poly {
        let mut out = Poly::constant(Q::one());
        for (base, slot) in [0, 1, 2, RADICAL_SLOT].into_iter().enumerate() {
            let e = m.0[slot] as usize;
            if e > 0 {
                out = &out * &self.power(base, e).clone();
            }
        }
        let mut params = Mono::one();
        params.0[crate::opalgebra::poly::PARAM_SLOT..].copy_from_slice(&m.0[crate::opalgebra::poly::PARAM_SLOT..]);
        out.mul_mono(&params, &Q::one())
    }
}

/// `f o pi`: substitute the KS quadratics for `x_i` and `R^2` for `r`.
pub fn pullback(f: &Coeff) -> Result<Coeff> {
    if f.chart() != Chart::R3 {
        return Err(Error::ChartMismatch { left: Chart::R3, right: f.chart() });
    }
    let mut cache = PullbackPowers::new();
    let mut num = Poly::zero();
    for (m, c) in f.numerator().terms() {
        num = &num + &cache.monomial(m).scale(c);
    }
    Ok(Coeff::from_parts(Chart::R4, num, 2 * f.radical_denominator_power()))
}

pub fn x3_field() -> VectorField {
    let y = |s| Coeff::coord(Chart::R4, s);
    let mut comps = vec![Coeff::zero(Chart::R4); 4];
    comps[Y1] = -&y(Y2);
    comps[Y2] = y(Y1);
    comps[Y3] = y(Y0);
    comps[Y0] = -&y(Y3);
    VectorField::new(Chart::R4, &comps)
}

/// `y^a d_b - y^b d_a` for conventional labels `a, b` in `0..4`.
pub(crate) fn plane_rotation(a: usize, b: usize) -> VectorField {
    let (sa, sb) = (Chart::y(a), Chart::y(b));
    let mut comps = vec![Coeff::zero(Chart::R4); 4];
    comps[sb] = &comps[sb] + &Coeff::coord(Chart::R4, sa);
    comps[sa] = &comps[sa] - &Coeff::coord(Chart::R4, sb);
    VectorField::new(Chart::R4, &comps)
}

fn sum_fields(a: &VectorField, b: &VectorField) -> VectorField {
    VectorField::try_from(a.as_op() + b.as_op()).expect("sum of vector fields")
}

/// The right invariant fields `Y1 = L10 + L23`, `Y2 = L02 + L13`, `Y3 = L03 + L21`,
/// with `Lab = y^a d_b - y^b d_a`. All three commute with [`x3_field`].
pub fn y_basis() -> [VectorField; 3] {
    [
        sum_fields(&plane_rotation(1, 0), &plane_rotation(2, 3)),
        sum_fields(&plane_rotation(0, 2), &plane_rotation(1, 3)),
        sum_fields(&plane_rotation(0, 3), &plane_rotation(2, 1)),
    ]
}

/// Euler field `sum y^a d_a`.
pub fn r_field() -> VectorField {
    let comps: Vec<Coeff> = (0..4).map(|s| Coeff::coord(Chart::R4, s)).collect();
    VectorField::new(Chart::R4, &comps)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiberInvariantWitness {
    pub input: Coeff,
    pub residual: Coeff,
}

impl FiberInvariantWitness {
    pub fn is_invariant(&self) -> bool {
        self.residual.is_zero()
    }
}

pub fn is_fiber_invariant(f: &Coeff) -> Result<FiberInvariantWitness> {
    let residual = x3_field().apply(f)?;
    Ok(FiberInvariantWitness { input: f.clone(), residual })
}

pub fn is_in_centralizer(d: &DiffOp) -> Result<bool> {
    Ok(d.commutator(x3_field().as_op())?.is_zero())
}

/// Monomials of the 3D chart of degree at most `k`, graded order.
fn probe_indices(k: u32) -> Vec<MultiIndex> {
    MultiIndex::up_to_order(3, k)
}

fn probe(sigma: &MultiIndex) -> Coeff {
    Coeff::coord_monomial(Chart::R3, &sigma.0[..3])
}

/// First probe `x^s` whose image is not fiber-invariant, with the residual.
pub fn projectability_witness(d: &DiffOp) -> Result<Option<(Coeff, Coeff)>> {
    if d.chart() != Chart::R4 {
        return Err(Error::ChartMismatch { left: Chart::R4, right: d.chart() });
    }
    let x3 = x3_field();
    for sigma in probe_indices(d.degree()) {
        let f = probe(&sigma);
        let image = d.apply(&pullback(&f)?)?;
        let residual = x3.apply(&image)?;
        if !residual.is_zero() {
            return Ok(Some((f, residual)));
        }
    }
    Ok(None)
}

pub fn is_projectable(d: &DiffOp) -> Result<bool> {
    Ok(projectability_witness(d)?.is_none())
}

/// The restriction of a projectable operator to fiber-invariant functions.
pub fn project(d: &DiffOp) -> Result<DiffOp> {
    if d.chart() != Chart::R4 {
        return Err(Error::ChartMismatch { left: Chart::R4, right: d.chart() });
    }
    let x3 = x3_field();
    let mut recovered: BTreeMap<MultiIndex, Coeff> = BTreeMap::new();
    for sigma in probe_indices(d.degree()) {
        let f = probe(&sigma);
        let image = d.apply(&pullback(&f)?)?;
        let residual = x3.apply(&image)?;
        if !residual.is_zero() {
            return Err(Error::NotProjectable { probe: f.to_string(), residual: residual.to_string() });
        }
        let h = descend(&image).map_err(|e| Error::Internal(format!("descend after projectability check: {e}")))?;
        // D~(x^s) = sum_{t <= s} g_t s!/(s-t)! x^(s-t)
        let mut rest = h;
        for (tau, g) in &recovered {
            if !tau.le(&sigma) {
                continue;
            }
            let diff = sigma.sub(tau);
            let k = sigma.factorial() / diff.factorial();
            let term = (g * &probe(&diff)).scale(&q(k as i64));
            rest = &rest - &term;
        }
        let g = rest.scale(&(Q::one() / q(sigma.factorial() as i64)));
        if !g.is_zero() {
            recovered.insert(sigma, g);
        }
    }
    Ok(DiffOp::from_terms(Chart::R3, recovered))
}

/// Degree-`d` monomials `x^a r^b`, `b <= 1`, spanning the degree-`d` invariants.
fn invariant_basis(d: u32) -> Vec<Mono> {
    let mut out = Vec::new();
    for b in 0..=d.min(1) {
        for a in MultiIndex::of_order(3, d - b) {
            let mut m = Mono::one();
            m.0[..3].copy_from_slice(&a.0[..3]);
            m.0[RADICAL_SLOT] = b as u16;
            out.push(m);
        }
    }
    out
}

/// Express a homogeneous invariant `part` of y-degree `2d` in the invariant basis.
fn solve_homogeneous(cache: &mut PullbackPowers, d: u32, part: &Poly) -> Result<Poly> {
    let basis = invariant_basis(d);
    let images: Vec<Poly> = basis.iter().map(|m| cache.monomial(m)).collect();
    let mut rows: BTreeMap<Mono, usize> = BTreeMap::new();
    for p in images.iter().chain(std::iter::once(part)) {
        for (m, _) in p.terms() {
            let n = rows.len();
            rows.entry(*m).or_insert(n);
        }
    }
    let mut a = RatMatrix::zeros(rows.len(), basis.len());
    for (j, p) in images.iter().enumerate() {
        for (m, c) in p.terms() {
            a[(rows[m], j)] = c.clone();
        }
    }
    let mut rhs = vec![Q::zero(); rows.len()];
    for (m, c) in part.terms() {
        rhs[rows[m]] = c.clone();
    }
    let sol = a
        .solve(&rhs)
        .ok_or_else(|| Error::Internal(format!("invariant of degree {} outside the span of x, r", 2 * d)))?;
    let mut out = Poly::zero();
    for (m, c) in basis.iter().zip(sol) {
        out.add_term(*m, c);
    }
    Ok(out)
}

/// The unique `q` on the 3D chart with `pullback(q) = f`.
pub fn descend(f: &Coeff) -> Result<Coeff> {
    if f.chart() != Chart::R4 {
        return Err(Error::ChartMismatch { left: Chart::R4, right: f.chart() });
    }
    let witness = is_fiber_invariant(f)?;
    if !witness.is_invariant() {
        return Err(Error::NotFiberInvariant { residual: witness.residual.to_string() });
    }
    let mut den = f.radical_denominator_power();
    let mut num = f.numerator().clone();
    if den % 2 == 1 {
        let lifted = Coeff::from_parts(Chart::R4, num.mul_mono(&Mono::var(RADICAL_SLOT), &Q::one()), 0);
        num = lifted.numerator().clone();
        den += 1;
    }
    let (even, odd) = num.split_slot_linear(RADICAL_SLOT);
    if !odd.is_zero() {
        return Err(Error::NotDescendable(format!("odd power of R in {f}")));
    }
    let mut cache = PullbackPowers::new();
    let mut out = Poly::zero();
    for (params, part) in even.by_param_monomial() {
        for (deg, homogeneous) in part.by_coord_degree() {
            if deg % 2 == 1 {
                return Err(Error::Internal(format!("fiber-invariant part of odd degree {deg}")));
            }
            let solved = solve_homogeneous(&mut cache, deg / 2, &homogeneous)?;
            out = &out + &solved.mul_mono(&params, &Q::one());
        }
    }
    Ok(Coeff::from_parts(Chart::R3, out, den / 2))
}

/// Integral curve of the fiber field `X3` through `p`.
pub fn fiber_flow(p: Point4, lambda: f64) -> Point4 {
    let [y1, y2, y3, y0] = p.0;
    let (s, c) = lambda.sin_cos();
    Point4([y1 * c - y2 * s, y2 * c + y1 * s, y3 * c + y0 * s, y0 * c - y3 * s])
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureSpec {
    /// Nodes per axis (radial and polar axes in 3D, every axis in 4D).
    pub nodes: usize,
    /// Test functions are the given coefficients times `e^{-damping r}`.
    pub damping: f64,
}

impl Default for QuadratureSpec {
    fn default() -> QuadratureSpec {
        QuadratureSpec { nodes: 64, damping: 1.0 }
    }
}

fn quadrature_error(e: impl std::fmt::Display) -> Error {
    Error::Quadrature(e.to_string())
}

/// `int_R y^e exp(-2a y^2) dy` for every `e <= max_e`.
fn hermite_moments(nodes: usize, a: f64, max_e: usize) -> Result<Vec<f64>> {
    let rule = GaussHermite::new(nodes).map_err(quadrature_error)?;
    let s = (2.0 * a).sqrt();
    let pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().iter().map(|(a, b)| (*a, *b)).collect();
    Ok((0..=max_e)
        .map(|e| pairs.iter().map(|(t, w)| w * (t / s).powi(e as i32)).sum::<f64>() / s)
        .collect())
}

/// `int_0^inf r^(2+m) exp(-2a r) dr` for every `m <= max_m`.
fn laguerre_moments(nodes: usize, a: f64, max_m: usize) -> Result<Vec<f64>> {
    let rule = GaussLaguerre::new(nodes, 2.0).map_err(quadrature_error)?;
    let s = 2.0 * a;
    let pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().iter().map(|(a, b)| (*a, *b)).collect();
    Ok((0..=max_m)
        .map(|m| pairs.iter().map(|(t, w)| w * (t / s).powi(m as i32)).sum::<f64>() / s.powi(3))
        .collect())
}

/// `int_{S^2} w^a dOmega` by Gauss-Legendre in `cos(theta)` and a uniform `phi` grid.
fn sphere_moment(nodes: usize, a: [u16; 3]) -> Result<f64> {
    let rule = GaussLegendre::new(nodes).map_err(quadrature_error)?;
    let phis: Vec<f64> = (0..2 * nodes).map(|j| 2.0 * PI * j as f64 / (2 * nodes) as f64).collect();
    let dphi = 2.0 * PI / phis.len() as f64;
    let azimuth: f64 =
        phis.iter().map(|p| p.cos().powi(a[0] as i32) * p.sin().powi(a[1] as i32)).sum::<f64>() * dphi;
    let polar: f64 = rule
        .as_node_weight_pairs()
        .iter()
        .map(|(u, w)| {
            let s = (1.0 - u * u).max(0.0).sqrt();
            w * s.powi((a[0] + a[1]) as i32) * u.powi(a[2] as i32)
        })
        .sum();
    Ok(azimuth * polar)
}

fn require_polynomial(f: &Coeff) -> Result<()> {
    if f.radical_denominator_power() != 0 || f.has_params() {
        return Err(Error::InvalidArgument(format!("test function {f} must be a parameter-free polynomial in x and r")));
    }
    Ok(())
}

fn integral_4d(integrand: &Coeff, spec: &QuadratureSpec) -> Result<f64> {
    let (even, odd) = integrand.numerator().split_slot_linear(RADICAL_SLOT);
    if !odd.is_zero() || integrand.radical_denominator_power() != 0 {
        return Err(Error::Internal("pulled-back polynomial integrand carries an odd power of R".into()));
    }
    let max_e = (0..4).map(|s| even.max_exponent(s)).max().unwrap_or(0) as usize;
    let moments = hermite_moments(spec.nodes, spec.damping, max_e)?;
    let terms: Vec<(Mono, f64)> = even.terms().map(|(m, c)| (*m, crate::opalgebra::poly::to_f64(c))).collect();
    let parts: Vec<f64> = terms
        .par_iter()
        .map(|(m, c)| c * (0..4).map(|s| moments[m.0[s] as usize]).product::<f64>())
        .collect();
    Ok(parts.iter().sum())
}

fn integral_3d(integrand: &Coeff, spec: &QuadratureSpec) -> Result<f64> {
    let num = integrand.numerator();
    let max_m = num.max_degree() as usize;
    let radial = laguerre_moments(spec.nodes, spec.damping, max_m)?;
    let terms: Vec<(Mono, f64)> = num.terms().map(|(m, c)| (*m, crate::opalgebra::poly::to_f64(c))).collect();
    let parts: Vec<Result<f64>> = terms
        .par_iter()
        .map(|(m, c)| {
            let deg = (m.0[0] + m.0[1] + m.0[2] + m.0[RADICAL_SLOT]) as usize;
            Ok(c * radial[deg] * sphere_moment(spec.nodes, [m.0[0], m.0[1], m.0[2]])?)
        })
        .collect();
    let mut total = 0.0;
    for p in parts {
        total += p?;
    }
    Ok(total)
}

fn pairing_ratio(f: &Coeff, g: &Coeff, spec: &QuadratureSpec) -> Result<f64> {
    let fg = f * g;
    let denominator = integral_3d(&fg, spec)?;
    let weight = Coeff::radical_pow(Chart::R4, 2).scale(&q(4));
    let lifted = &(&pullback(f)? * &pullback(g)?) * &weight;
    let numerator = integral_4d(&lifted, spec)?;
    if denominator.abs() < 1e-300 || !denominator.is_finite() {
        return Err(Error::InvalidArgument("the 3D pairing vanishes".into()));
    }
    Ok(numerator / denominator)
}

/// `int pi^*f pi^*g 4R^2 d^4y / int f g d^3x` for the damped test functions
/// `f e^{-a r}` and `g e^{-a r}`.
pub fn fiber_pairing_constant(f: &Coeff, g: &Coeff, spec: &QuadratureSpec) -> Result<f64> {
    for h in [f, g] {
        if h.chart() != Chart::R3 {
            return Err(Error::ChartMismatch { left: Chart::R3, right: h.chart() });
        }
        require_polynomial(h)?;
    }
    if f.is_zero() || g.is_zero() {
        return Err(Error::InvalidArgument("the 3D pairing vanishes".into()));
    }
    if spec.nodes < 8 || spec.damping.is_nan() || spec.damping <= 0.0 {
        return Err(Error::InvalidArgument("quadrature needs at least 8 nodes and positive damping".into()));
    }
    let coarse = pairing_ratio(f, g, spec)?;
    let fine = pairing_ratio(f, g, &QuadratureSpec { nodes: spec.nodes + 8, ..spec.clone() })?;
    if ((fine - coarse) / fine).abs() > 1e-8 {
        return Err(Error::Quadrature(format!("no convergence: {coarse} vs {fine}")));
    }
    Ok(fine)
}

/// Test-function pairs with nonvanishing 3D pairing, for consistency checks of
/// [`fiber_pairing_constant`].
pub fn standard_test_pairs() -> Vec<(Coeff, Coeff)> {
    let x = |i| Coeff::coord(Chart::R3, i);
    let one = Coeff::one(Chart::R3);
    let x12 = &x(0) * &x(1);
    vec![
        (one.clone(), one.clone()),
        (x(0), x(0)),
        (&one + &x(2), Coeff::radical(Chart::R3)),
        (x12.clone(), &x12 + &x(2).pow(2)),
    ]
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn det4(m: [[f64; 4]; 4]) -> f64 {
    (0..4)
        .map(|j| {
            let mut minor = [[0.0; 3]; 3];
            for r in 1..4 {
                let mut cc = 0;
                for c in 0..4 {
                    if c != j {
                        minor[r - 1][cc] = m[r][c];
                        cc += 1;
                    }
                }
            }
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * m[0][j] * det3(minor)
        })
        .sum()
}

fn x3_at(p: &Point4) -> [f64; 4] {
    let [y1, y2, y3, y0] = p.0;
    [-y2, y1, y0, -y3]
}

fn ks_jacobian(p: &Point4) -> [[f64; 4]; 3] {
    let [y1, y2, y3, y0] = p.0;
    [
        [2.0 * y3, -2.0 * y0, 2.0 * y1, -2.0 * y2],
        [2.0 * y0, 2.0 * y3, 2.0 * y2, 2.0 * y1],
        [2.0 * y1, 2.0 * y2, -2.0 * y3, -2.0 * y0],
    ]
}

/// `|i_{X3} mu4| / |pi^* mu3|` at `p`, with `mu4 = 4R^2 d^4y` and `mu3 = d^3x`.
///
/// Both 3-forms vanish on `X3`, so their ratio is evaluated on the three
/// gradient directions of the KS map, which are transverse to the fiber.
pub fn fiber_density_ratio(p: Point4) -> f64 {
    let jac = ks_jacobian(&p);
    let mut image = [[0.0; 3]; 3];
    for (i, row) in image.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (0..4).map(|a| jac[i][a] * jac[j][a]).sum();
        }
    }
    let mut frame = [[0.0; 4]; 4];
    frame[0] = x3_at(&p);
    frame[1..].copy_from_slice(&jac);
    let contracted = 4.0 * p.radius_squared() * det4(frame);
    (contracted / det3(image)).abs()
}

/// `int Theta3` once around the closed fiber through `p`, where `Theta3` is the
/// metric dual of `X3` normalized by `Theta3(X3) = 1`, integrated along
/// [`fiber_flow`] with a centered difference for the tangent.
pub fn fiber_period(p: Point4, steps: usize) -> Result<f64> {
    integrate_along_fiber(p, steps, |_| 1.0)
}

/// The pairing constant predicted from fiber geometry alone:
/// `int_fiber (|i_X3 mu4| / |pi^* mu3|) Theta3`.
pub fn fiber_constant_oracle(p: Point4, steps: usize) -> Result<f64> {
    integrate_along_fiber(p, steps, fiber_density_ratio)
}

fn integrate_along_fiber(p: Point4, steps: usize, density: impl Fn(Point4) -> f64) -> Result<f64> {
    if steps < 16 {
        return Err(Error::InvalidArgument("fiber integration needs at least 16 steps".into()));
    }
    let period = 2.0 * PI;
    let end = fiber_flow(p, period);
    let scale = p.radius_squared().sqrt();
    if end.distance(&p) > 1e-12 * scale.max(1.0) {
        return Err(Error::Quadrature("fiber flow does not close after 2 pi".into()));
    }
    let h = period / steps as f64;
    let fd = 1e-5;
    let mut total = 0.0;
    for j in 0..steps {
        let lam = j as f64 * h;
        let here = fiber_flow(p, lam);
        if j > 0 && here.distance(&p) < 1e-9 * scale {
            return Err(Error::Quadrature("fiber flow returns before 2 pi".into()));
        }
        let fwd = fiber_flow(p, lam + fd);
        let back = fiber_flow(p, lam - fd);
        let x = x3_at(&here);
        let norm2: f64 = x.iter().map(|v| v * v).sum();
        let theta: f64 = (0..4).map(|a| x[a] * (fwd.0[a] - back.0[a]) / (2.0 * fd)).sum::<f64>() / norm2;
        total += density(here) * theta * h;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalgebra::qr;

    fn y(slot: usize) -> Coeff {
        Coeff::coord(Chart::R4, slot)
    }

    #[test]
    fn ks_points() {
        assert_eq!(ks_forward(Point4::new([1.0, 0.0, 0.0, 0.0]).unwrap()).0, [0.0, 0.0, 1.0]);
        let x = ks_forward(Point4::new([1.0, 1.0, 0.0, 0.0]).unwrap());
        assert_eq!(x.0, [0.0, 0.0, 2.0]);
        assert_eq!(x.norm(), 2.0);
        assert_eq!(ks_forward(Point4::new([0.0, 0.0, 1.0, 0.0]).unwrap()).0, [0.0, 0.0, -1.0]);
        assert!(Point4::new([0.0; 4]).is_err());
    }

    #[test]
    fn exact_norm_identity() {
        let p = [qr(1, 2), q(-3), qr(2, 7), q(5)];
        let x = ks_forward_exact(&p).unwrap();
        let r2: Q = p.iter().map(|v| v * v).sum();
        let x2: Q = x.iter().map(|v| v * v).sum();
        assert_eq!(x2, &r2 * &r2);
    }

    #[test]
    fn pullback_examples() {
        let inv_r = Coeff::radical_pow(Chart::R3, -1);
        assert_eq!(pullback(&inv_r).unwrap(), Coeff::radical_pow(Chart::R4, -2));
        let x3 = pullback(&Coeff::coord(Chart::R3, 2)).unwrap();
        assert_eq!(x3, Coeff::from_parts(Chart::R4, ks_polys()[2].clone(), 0));
        assert!(pullback(&Coeff::one(Chart::R3)).unwrap().is_one());
    }

    #[test]
    fn x3_annihilates_the_map() {
        for p in ks_polys() {
            let f = Coeff::from_parts(Chart::R4, p, 0);
            assert!(x3_field().apply(&f).unwrap().is_zero());
        }
    }

    #[test]
    fn descend_examples() {
        assert_eq!(descend(&Coeff::radical_pow(Chart::R4, 2)).unwrap(), Coeff::radical(Chart::R3));
        let x1 = (&(&y(Y1) * &y(Y3)) - &(&y(Y2) * &y(Y0))).scale(&q(2));
        assert_eq!(descend(&x1).unwrap(), Coeff::coord(Chart::R3, 0));
        let r4 = Coeff::radical_pow(Chart::R4, 4);
        let sum_x2 = Coeff::from_parts(Chart::R3, Chart::R3.radius_squared(), 0);
        assert_eq!(descend(&r4).unwrap(), sum_x2);
        assert!(matches!(descend(&y(Y0)), Err(Error::NotFiberInvariant { .. })));
        assert!(matches!(descend(&Coeff::radical_pow(Chart::R4, -3)), Err(Error::NotDescendable(_))));
        assert_eq!(descend(&Coeff::radical_pow(Chart::R4, -2)).unwrap(), Coeff::radical_pow(Chart::R3, -1));
    }

    #[test]
    fn fiber_invariance_witness() {
        assert!(is_fiber_invariant(&Coeff::radical_pow(Chart::R4, 4)).unwrap().is_invariant());
        let w = is_fiber_invariant(&y(Y0)).unwrap();
        assert_eq!(w.residual, -&y(Y3));
        let x2 = pullback(&Coeff::coord(Chart::R3, 1)).unwrap();
        assert!(is_fiber_invariant(&x2).unwrap().is_invariant());
    }

    #[test]
    fn y_basis_commutes_with_x3() {
        let x3 = x3_field();
        for yi in y_basis() {
            assert!(yi.commutator(x3.as_op()).unwrap().is_zero());
        }
        let [y1, y2, y3] = y_basis();
        let c = y1.commutator(y2.as_op()).unwrap();
        assert_eq!(c, y3.as_op().scale(&q(-2)));
    }

    #[test]
    fn centralizer_examples() {
        let d = DiffOp::laplacian(Chart::R4).left_mul(&Coeff::radical_pow(Chart::R4, -2).scale(&qr(1, 4)));
        assert!(is_in_centralizer(&d).unwrap());
        assert!(!is_in_centralizer(&DiffOp::partial(Chart::R4, Y0)).unwrap());
        let c = DiffOp::partial(Chart::R4, Y0).commutator(x3_field().as_op()).unwrap();
        assert_eq!(c, DiffOp::partial(Chart::R4, Y3));
        assert!(is_in_centralizer(x3_field().as_op()).unwrap());
    }

    #[test]
    fn projection_examples() {
        let d = DiffOp::laplacian(Chart::R4).left_mul(&Coeff::radical_pow(Chart::R4, -2).scale(&qr(1, 4)));
        assert!(is_projectable(&d).unwrap());
        assert_eq!(project(&d).unwrap(), DiffOp::laplacian(Chart::R3));
        assert!(project(x3_field().as_op()).unwrap().is_zero());
        assert!(!is_projectable(&DiffOp::multiplication(y(Y0))).unwrap());
        assert!(matches!(project(&DiffOp::multiplication(y(Y0))), Err(Error::NotProjectable { .. })));
        let rot = project(y_basis()[2].as_op()).unwrap();
        let x = |i| Coeff::coord(Chart::R3, i);
        let mut expected = DiffOp::partial(Chart::R3, 1).left_mul(&x(0));
        expected = &expected - &DiffOp::partial(Chart::R3, 0).left_mul(&x(1));
        assert!(rot == expected.scale(&q(2)) || rot == expected.scale(&q(-2)), "{rot:?}");
    }

    #[test]
    fn flow_preserves_fibers() {
        let p = Point4::new([0.3, -1.2, 0.7, 2.0]).unwrap();
        assert_eq!(fiber_flow(p, 0.0), p);
        assert!(fiber_flow(p, 2.0 * PI).distance(&p) < 1e-12);
        let x = ks_forward(p);
        for lam in [0.1, 1.0, 2.5, 4.0] {
            let x2 = ks_forward(fiber_flow(p, lam));
            for i in 0..3 {
                assert!((x.0[i] - x2.0[i]).abs() < 1e-12);
            }
        }
        let e = Point4::new([1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(ks_forward(fiber_flow(e, 1.3)).0.map(|v| (v * 1e12).round() / 1e12), [0.0, 0.0, 1.0]);
    }

    #[test]
    fn pairing_constant_rejects_zero() {
        let z = Coeff::zero(Chart::R3);
        assert!(fiber_pairing_constant(&z, &z, &QuadratureSpec::default()).is_err());
    }

    #[test]
    fn density_ratio_is_one_half() {
        let p = Point4::new([0.3, -1.2, 0.7, 2.0]).unwrap();
        assert!((fiber_density_ratio(p) - 0.5).abs() < 1e-12);
        assert!((fiber_period(p, 256).unwrap() - 2.0 * PI).abs() < 1e-8);
    }
}
