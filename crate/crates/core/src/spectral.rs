//! Exact matrices on the unnormalized Gaussian-monomial basis
//! `y^a G`, `G = exp(-w R^2 / 2)`, of the 4D chart.
//!
//! Derivatives act by `d_i (y^a G) = (a_i y^(a-e_i) - w y^(a+e_i)) G`, so every
//! operator with polynomial coefficients has a rational matrix. In particular
//! `H_osc (y^a G) = w(|a|+2) y^a G - 1/2 (Delta y^a) G`, which is upper
//! triangular in graded order.
//!
//! In matrix mode the parameters are fixed by the frequency of the basis:
//! `w` is replaced by its value and `E` by `-w^2/8`. A leftover `k` is an error.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hydrogen::{admissible_frequency, oscillator_hamiltonian};
use crate::ksfib::x3_field;
use crate::linalg::RatMatrix;
use crate::opalgebra::poly::RADICAL_SLOT;
use crate::opalgebra::{binom, q, Chart, Coeff, DiffOp, MultiIndex, Param, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: u32) -> Parity {
        if n.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    fn admits(self, degree: u32) -> bool {
        Parity::of(degree) == self
    }
}

/// Monomials `y^a`, `|a| <= max_degree`, `|a| = parity (mod 2)`, in graded order.
#[derive(Clone, Debug)]
pub struct LevelBasis {
    pub omega: Q,
    pub max_degree: u32,
    pub parity: Parity,
    pub elements: Vec<MultiIndex>,
    index: HashMap<MultiIndex, usize>,
}

impl PartialEq for LevelBasis {
    fn eq(&self, other: &LevelBasis) -> bool {
        self.omega == other.omega && self.max_degree == other.max_degree && self.parity == other.parity
    }
}

impl LevelBasis {
    pub fn new(omega: Q, max_degree: u32, parity: Parity) -> Result<LevelBasis> {
        if !omega.is_positive() {
            return Err(Error::InvalidArgument(format!("frequency must be positive, got {omega}")));
        }
        let elements: Vec<MultiIndex> =
            MultiIndex::up_to_order(4, max_degree).into_iter().filter(|a| parity.admits(a.order())).collect();
        let index = elements.iter().enumerate().map(|(i, a)| (*a, i)).collect();
        Ok(LevelBasis { omega, max_degree, parity, elements, index })
    }

    /// The block containing oscillator level `n`.
    pub fn level(n: u32, omega: Q) -> Result<LevelBasis> {
        LevelBasis::new(omega, n, Parity::of(n))
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn position(&self, a: &MultiIndex) -> Option<usize> {
        self.index.get(a).copied()
    }
}

/// Column `j` holds the expansion of the operator applied to basis element `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    pub basis: LevelBasis,
    pub entries: RatMatrix,
}

impl OperatorMatrix {
    /// `M v` for a coefficient vector over the basis, skipping zero entries of `v`.
    pub fn apply(&self, v: &[Q]) -> Vec<Q> {
        let n = self.basis.len();
        let mut out = vec![Q::zero(); n];
        for (j, c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (i, slot) in out.iter_mut().enumerate() {
                let a = &self.entries[(i, j)];
                if !a.is_zero() {
                    *slot += a * c;
                }
            }
        }
        out
    }
}

/// Fix `w` and `E` at the basis frequency; the result must be parameter-free.
fn bind_parameters(d: &DiffOp, omega: &Q) -> Result<DiffOp> {
    let bound = d
        .substitute_param(Param::Omega, omega)
        .substitute_param(Param::E, &(-(omega * omega) / q(8)));
    if bound.has_params() {
        return Err(Error::InvalidArgument("operator still depends on k after fixing the frequency".into()));
    }
    Ok(bound)
}

fn bind_coeff(c: &Coeff, omega: &Q) -> Result<Coeff> {
    let bound = c.substitute_param(Param::Omega, omega).substitute_param(Param::E, &(-(omega * omega) / q(8)));
    if bound.has_params() {
        return Err(Error::InvalidArgument("coefficient still depends on k after fixing the frequency".into()));
    }
    Ok(bound)
}

type Expansion = BTreeMap<MultiIndex, Q>;

fn add_to(out: &mut Expansion, a: MultiIndex, c: Q) {
    if c.is_zero() {
        return;
    }
    let slot = out.entry(a).or_insert_with(Q::zero);
    *slot += c;
    if slot.is_zero() {
        out.remove(&a);
    }
}

/// Polynomial coefficient as monomial expansion; fails on odd radical powers
/// and denominators.
fn polynomial_coefficient(c: &Coeff) -> Result<Expansion> {
    if c.radical_denominator_power() != 0 || c.numerator().max_exponent(RADICAL_SLOT) > 0 {
        return Err(Error::Unsupported(format!("coefficient {c} is not a polynomial in y")));
    }
    let mut out = Expansion::new();
    for (m, v) in c.numerator().terms() {
        add_to(&mut out, MultiIndex::from_slice(&m.0[..4]), v.clone());
    }
    Ok(out)
}

fn derive_once(f: &Expansion, i: usize, omega: &Q) -> Expansion {
    let mut out = Expansion::new();
    for (a, c) in f {
        if a.0[i] > 0 {
            add_to(&mut out, a.sub(&MultiIndex::unit(i)), c * q(a.0[i] as i64));
        }
        add_to(&mut out, a.add(&MultiIndex::unit(i)), -(c * omega));
    }
    out
}

fn derive(f: &Expansion, sigma: &MultiIndex, omega: &Q) -> Expansion {
    let mut cur = f.clone();
    for i in 0..4 {
        for _ in 0..sigma.0[i] {
            cur = derive_once(&cur, i, omega);
        }
    }
    cur
}

fn action_bound(d: &DiffOp, alpha: &MultiIndex, omega: &Q) -> Result<Expansion> {
    let start: Expansion = [(*alpha, Q::one())].into_iter().collect();
    let mut out = Expansion::new();
    for (sigma, g) in d.terms() {
        let g = polynomial_coefficient(g)?;
        let dg = derive(&start, sigma, omega);
        for (b, cb) in &dg {
            for (m, cm) in &g {
                add_to(&mut out, b.add(m), cb * cm);
            }
        }
    }
    Ok(out)
}

/// `d(y^alpha G)` expanded over `y^beta G`.
pub fn gaussian_action(d: &DiffOp, alpha: &MultiIndex, omega: &Q) -> Result<BTreeMap<MultiIndex, Q>> {
    if d.chart() != Chart::R4 {
        return Err(Error::ChartMismatch { left: Chart::R4, right: d.chart() });
    }
    if !omega.is_positive() {
        return Err(Error::InvalidArgument(format!("frequency must be positive, got {omega}")));
    }
    action_bound(&bind_parameters(d, omega)?, alpha, omega)
}

pub fn operator_matrix(d: &DiffOp, basis: &LevelBasis) -> Result<OperatorMatrix> {
    if d.chart() != Chart::R4 {
        return Err(Error::ChartMismatch { left: Chart::R4, right: d.chart() });
    }
    let bound = bind_parameters(d, &basis.omega)?;
    let columns: Vec<Result<Expansion>> =
        basis.elements.par_iter().map(|a| action_bound(&bound, a, &basis.omega)).collect();
    let mut entries = RatMatrix::zeros(basis.len(), basis.len());
    for (j, col) in columns.into_iter().enumerate() {
        for (b, c) in col? {
            let i = basis.position(&b).ok_or_else(|| {
                Error::Unsupported(format!("operator maps y^{:?} G outside the degree-{} block", b.0, basis.max_degree))
            })?;
            entries[(i, j)] = c;
        }
    }
    Ok(OperatorMatrix { basis: basis.clone(), entries })
}

pub fn oscillator_matrix(basis: &LevelBasis) -> Result<OperatorMatrix> {
    operator_matrix(&oscillator_hamiltonian(&basis.omega), basis)
}

/// Oscillator eigenspace at level `n` inside its parity block.
///
/// Each eigenvector has exactly one degree-`n` monomial `y^beta` (coefficient 1)
/// in its expansion, so the top-degree coefficients are coordinates on the
/// eigenspace.
#[derive(Clone, Debug)]
pub struct Eigenspace {
    pub level: u32,
    pub basis: LevelBasis,
    pub top: Vec<MultiIndex>,
    pub vectors: Vec<Vec<Q>>,
}

impl Eigenspace {
    pub fn compute(level: u32, omega: &Q) -> Result<Eigenspace> {
        let basis = LevelBasis::level(level, omega.clone())?;
        let h = oscillator_matrix(&basis)?;
        let lambda = omega * q(level as i64 + 2);
        let shifted = &h.entries - &RatMatrix::identity(basis.len()).scale(&lambda);
        let free: Vec<bool> = basis.elements.iter().map(|a| a.order() == level).collect();
        let (top, vectors) = triangular_kernel(&shifted, &free)?;
        let top = top.into_iter().map(|j| basis.elements[j]).collect();
        Ok(Eigenspace { level, basis, top, vectors })
    }

    pub fn dimension(&self) -> usize {
        self.vectors.len()
    }

    /// Coordinates of a vector of the block that lies in the eigenspace; `None` otherwise.
    pub fn coordinates(&self, v: &[Q]) -> Option<Vec<Q>> {
        let coords: Vec<Q> = self.top.iter().map(|b| v[self.basis.position(b).unwrap()].clone()).collect();
        let mut rebuilt = vec![Q::zero(); v.len()];
        for (c, e) in coords.iter().zip(&self.vectors) {
            if c.is_zero() {
                continue;
            }
            for (slot, x) in rebuilt.iter_mut().zip(e) {
                if !x.is_zero() {
                    *slot += c * x;
                }
            }
        }
        (rebuilt == v).then_some(coords)
    }
}

/// Kernel of an upper triangular matrix whose zero diagonal entries sit exactly
/// at the columns marked `free`, by back substitution. Falls back to full
/// elimination if the structure does not hold.
fn triangular_kernel(m: &RatMatrix, free: &[bool]) -> Result<(Vec<usize>, Vec<Vec<Q>>)> {
    let n = m.cols();
    let free = |j: usize| free[j];
    let structured = m.is_upper_triangular()
        && (0..n).all(|j| free(j) == m[(j, j)].is_zero())
        && (0..n).filter(|&i| free(i)).all(|i| (i + 1..n).all(|j| m[(i, j)].is_zero()));
    if !structured {
        let kernel = m.kernel();
        let pivots: Vec<usize> =
            kernel.iter().map(|v| v.iter().rposition(|x| !x.is_zero()).unwrap_or(0)).collect();
        return Ok((pivots, kernel));
    }
    let free_cols: Vec<usize> = (0..n).filter(|&j| free(j)).collect();
    let vectors = free_cols
        .par_iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); n];
            v[f] = Q::one();
            for i in (0..f).rev() {
                if free(i) {
                    continue;
                }
                let mut acc = Q::zero();
                for j in i + 1..=f {
                    if !v[j].is_zero() && !m[(i, j)].is_zero() {
                        acc += &m[(i, j)] * &v[j];
                    }
                }
                if !acc.is_zero() {
                    v[i] = -acc / &m[(i, i)];
                }
            }
            v
        })
        .collect();
    Ok((free_cols, vectors))
}

/// Exact basis of the level-`n` oscillator eigenspace at frequency `omega`.
pub fn eigenspace_basis(n: u32, omega: &Q) -> Result<Vec<Vec<Q>>> {
    Ok(Eigenspace::compute(n, omega)?.vectors)
}

/// `binom(n+3, 3)`.
pub fn oscillator_degeneracy(n: u32) -> usize {
    binom(n as u64 + 3, 3) as usize
}

/// Matrix of `d` on an eigenspace, in the eigenspace's own coordinates.
/// Fails unless `d` maps the eigenspace into itself.
pub fn restriction(d: &DiffOp, space: &Eigenspace) -> Result<RatMatrix> {
    let m = operator_matrix(d, &space.basis)?;
    let columns: Vec<Option<Vec<Q>>> =
        space.vectors.par_iter().map(|v| space.coordinates(&m.apply(v))).collect();
    let mut cols = Vec::with_capacity(columns.len());
    for c in columns {
        cols.push(c.ok_or_else(|| {
            Error::InvalidArgument(format!("operator does not preserve the level-{} eigenspace", space.level))
        })?);
    }
    Ok(RatMatrix::from_columns(space.dimension(), &cols))
}

/// Dimension of the X3-invariant part of the level-`n` eigenspace at `w = 4k/(n+2)`.
pub fn x3_kernel_dimension(n: u32, k: &Q) -> Result<usize> {
    if !k.is_positive() {
        return Err(Error::InvalidArgument(format!("coupling constant must be positive, got {k}")));
    }
    let space = Eigenspace::compute(n, &admissible_frequency(k, n))?;
    let x3 = restriction(x3_field().as_op(), &space)?;
    Ok(space.dimension() - x3.rank())
}

fn double_factorial_odd(n: u32) -> Q {
    // (n-1)!! for even n
    let mut acc = Q::one();
    let mut j = n as i64 - 1;
    while j > 1 {
        acc *= q(j);
        j -= 2;
    }
    acc
}

/// `int y^gamma R^(2j) exp(-w R^2) d^4y / pi^2`, exact.
pub fn gaussian_moment(gamma: &MultiIndex, j: i32, omega: &Q) -> Result<Q> {
    if gamma.0.iter().any(|e| e % 2 == 1) {
        return Ok(Q::zero());
    }
    let h = gamma.order() as i64 / 2;
    if h + j as i64 + 2 < 1 {
        return Err(Error::InvalidArgument(format!("moment y^{:?} R^{} diverges at the origin", gamma.0, 2 * j)));
    }
    let mut angular = Q::one();
    for &e in &gamma.0 {
        angular *= double_factorial_odd(e as u32) / Q::from_integer(num_bigint::BigInt::from(2).pow(e as u32 / 2));
    }
    // (h+j+1)! / (h+1)!
    let mut radial = Q::one();
    if j >= 0 {
        for t in h + 2..=h + j as i64 + 1 {
            radial *= q(t);
        }
    } else {
        for t in h + j as i64 + 2..=h + 1 {
            radial /= q(t);
        }
    }
    let w = num_traits::pow(omega.clone(), (h + j as i64 + 2) as usize);
    Ok(angular * radial / w)
}

/// `int f exp(-w R^2) d^4y / pi^2` for a parameter-free coefficient `f`.
fn integrate(f: &Coeff, omega: &Q) -> Result<Q> {
    let den = f.radical_denominator_power() as i32;
    let mut total = Q::zero();
    for (m, c) in f.numerator().terms() {
        let rad = m.0[RADICAL_SLOT] as i32 - den;
        if rad % 2 != 0 {
            return Err(Error::Unsupported(format!("odd radical power in integrand {f}")));
        }
        let gamma = MultiIndex::from_slice(&m.0[..4]);
        total += c * gaussian_moment(&gamma, rad / 2, omega)?;
    }
    Ok(total)
}

fn require_even_weight(weight: &Coeff) -> Result<()> {
    if weight.chart() != Chart::R4 {
        return Err(Error::ChartMismatch { left: Chart::R4, right: weight.chart() });
    }
    let den = weight.radical_denominator_power();
    if weight.numerator().terms().any(|(m, _)| (m.0[RADICAL_SLOT] as u32 + den) % 2 == 1) {
        return Err(Error::Unsupported(format!("weight {weight} has an odd radical power")));
    }
    Ok(())
}

fn basis_function(a: &MultiIndex) -> Coeff {
    Coeff::coord_monomial(Chart::R4, &a.0)
}

/// Exponent `-w R^2 / 2` of the Gaussian factor.
fn gaussian_exponent(omega: &Q) -> Coeff {
    Coeff::radical_pow(Chart::R4, 2).scale(&(-omega / q(2)))
}

/// `P_ab = <y^a G, weight * d(y^b G)> / pi^2`, from closed-form moments.
pub fn pairing_matrix(d: &DiffOp, weight: &Coeff, basis: &LevelBasis) -> Result<RatMatrix> {
    require_even_weight(weight)?;
    let omega = &basis.omega;
    let d = bind_parameters(d, omega)?;
    let weight = bind_coeff(weight, omega)?;
    let phi = gaussian_exponent(omega);
    let images: Vec<Result<Coeff>> = basis
        .elements
        .par_iter()
        .map(|b| Ok(&weight * &d.apply_weighted(&basis_function(b), &phi)?))
        .collect();
    let images: Vec<Coeff> = images.into_iter().collect::<Result<_>>()?;
    let n = basis.len();
    let entries: Vec<Result<Vec<Q>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let fa = basis_function(&basis.elements[i]);
            images.iter().map(|img| integrate(&(&fa * img), omega)).collect()
        })
        .collect();
    let mut p = RatMatrix::zeros(n, n);
    for (i, row) in entries.into_iter().enumerate() {
        for (j, v) in row?.into_iter().enumerate() {
            p[(i, j)] = v;
        }
    }
    Ok(p)
}

/// `<y^a G, weight y^b G> / pi^2`.
pub fn gram_matrix(weight: &Coeff, basis: &LevelBasis) -> Result<RatMatrix> {
    pairing_matrix(&DiffOp::identity(Chart::R4), weight, basis)
}

#[derive(Clone, Debug)]
pub struct HermiticityReport {
    pub pairing: RatMatrix,
    pub gram: RatMatrix,
    pub symmetric: bool,
    pub antisymmetric: bool,
    /// Largest `|P_ab - P_ba|`.
    pub max_asymmetry: Q,
    pub gram_positive_definite: bool,
}

pub fn hermiticity_check(d: &DiffOp, weight: &Coeff, basis: &LevelBasis) -> Result<HermiticityReport> {
    let pairing = pairing_matrix(d, weight, basis)?;
    let gram = gram_matrix(weight, basis)?;
    let t = pairing.transpose();
    let diff = &pairing - &t;
    Ok(HermiticityReport {
        symmetric: diff.is_zero(),
        antisymmetric: pairing.add(&t).is_zero(),
        max_asymmetry: diff.max_abs(),
        gram_positive_definite: gram.is_positive_definite(),
        pairing,
        gram,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalgebra::qr;

    #[test]
    fn action_examples() {
        let w = q(3);
        let h = oscillator_hamiltonian(&w);
        let ground = gaussian_action(&h, &MultiIndex::zero(), &w).unwrap();
        assert_eq!(ground, [(MultiIndex::zero(), q(6))].into_iter().collect());

        let e_y0 = MultiIndex::unit(Chart::y(0));
        let x3 = gaussian_action(x3_field().as_op(), &e_y0, &w).unwrap();
        assert_eq!(x3, [(MultiIndex::unit(Chart::y(3)), q(-1))].into_iter().collect());

        let a = MultiIndex::from_slice(&[2, 0, 1, 3]);
        let id = gaussian_action(&DiffOp::identity(Chart::R4), &a, &w).unwrap();
        assert_eq!(id, [(a, q(1))].into_iter().collect());
    }

    #[test]
    fn oscillator_identity_matches_symbolic_differentiation() {
        let w = qr(2, 3);
        let h = oscillator_hamiltonian(&w);
        let phi = gaussian_exponent(&w);
        for a in MultiIndex::up_to_order(4, 4) {
            let f = basis_function(&a);
            let symbolic = h.apply_weighted(&f, &phi).unwrap();
            let lap = DiffOp::laplacian(Chart::R4).apply(&f).unwrap().scale(&qr(-1, 2));
            let identity = &f.scale(&(&w * q(a.order() as i64 + 2))) + &lap;
            assert_eq!(symbolic, identity);
        }
    }

    #[test]
    fn oscillator_matrix_is_triangular() {
        let b = LevelBasis::new(q(2), 5, Parity::Odd).unwrap();
        let m = oscillator_matrix(&b).unwrap();
        assert!(m.entries.is_upper_triangular());
        for (j, a) in b.elements.iter().enumerate() {
            assert_eq!(m.entries[(j, j)], q(2) * q(a.order() as i64 + 2));
        }
    }

    #[test]
    fn eigenspace_dimensions_match_brute_force() {
        let w = qr(4, 3);
        for n in 0..=3 {
            let space = Eigenspace::compute(n, &w).unwrap();
            assert_eq!(space.dimension(), oscillator_degeneracy(n));
            let basis = LevelBasis::level(n, w.clone()).unwrap();
            let h = oscillator_matrix(&basis).unwrap();
            let shifted = &h.entries - &RatMatrix::identity(basis.len()).scale(&(&w * q(n as i64 + 2)));
            assert_eq!(shifted.kernel().len(), space.dimension());
            for v in &space.vectors {
                assert!(shifted.mul_vec(v).iter().all(Zero::is_zero));
            }
        }
        assert_eq!([1, 4, 10].to_vec(), (0..3).map(oscillator_degeneracy).collect::<Vec<_>>());
    }

    #[test]
    fn small_kernel_dimensions() {
        assert_eq!(x3_kernel_dimension(0, &q(1)).unwrap(), 1);
        assert_eq!(x3_kernel_dimension(1, &q(1)).unwrap(), 0);
        assert_eq!(x3_kernel_dimension(2, &q(1)).unwrap(), 4);
    }

    #[test]
    fn moments() {
        let w = q(2);
        // int exp(-w R^2) d^4y = pi^2 / w^2
        assert_eq!(gaussian_moment(&MultiIndex::zero(), 0, &w).unwrap(), qr(1, 4));
        // int y1^2 exp(-w R^2) = pi^2 / (2 w^3)
        assert_eq!(gaussian_moment(&MultiIndex::from_slice(&[2, 0, 0, 0]), 0, &w).unwrap(), qr(1, 16));
        // int R^2 exp(-w R^2) = 4 * that
        assert_eq!(gaussian_moment(&MultiIndex::zero(), 1, &w).unwrap(), qr(1, 4));
        // int R^-2 exp(-w R^2) = pi^2 / w
        assert_eq!(gaussian_moment(&MultiIndex::zero(), -1, &w).unwrap(), qr(1, 2));
        assert!(gaussian_moment(&MultiIndex::zero(), -2, &w).is_err());
        assert_eq!(gaussian_moment(&MultiIndex::from_slice(&[1, 0, 0, 0]), 0, &w).unwrap(), Q::zero());
    }

    #[test]
    fn x3_is_antisymmetric_under_the_kepler_measure() {
        let b = LevelBasis::new(q(1), 3, Parity::Odd).unwrap();
        let weight = Coeff::radical_pow(Chart::R4, 2).scale(&q(4));
        let rep = hermiticity_check(x3_field().as_op(), &weight, &b).unwrap();
        assert!(rep.antisymmetric && !rep.pairing.is_zero());
        assert!(rep.gram_positive_definite);
        assert!(hermiticity_check(x3_field().as_op(), &Coeff::radical(Chart::R4), &b).is_err());
    }
}
