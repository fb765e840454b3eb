//! The `u(4) -> so(4)` reduction of the oscillator symmetries.
//!
//! Labels `0..4` are the conventional ones (`y0, y1, y2, y3`); the slot layout
//! of the 4D chart is handled by [`Chart::y`].
//!
//! The symmetric generators are the Fradkin-type operators
//! `D_ab = 1/2 (w^2 y^a y^b - d_a d_b)` with `w^2 = -8E`. The relative sign and
//! scale are not taken on trust: [`fit_quadratic_ratio`] recovers `a/b = -w^2`
//! from the oscillator matrices alone.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hydrogen::{admissible_energy, admissible_frequency, hydrogen_hamiltonian, oscillator_hamiltonian};
use crate::ksfib::{descend, is_in_centralizer, ks_quadratic_forms, plane_rotation, project, x3_field, y_basis};
use crate::linalg::RatMatrix;
use crate::opalgebra::{q, qr, Chart, Coeff, DiffOp, Mono, MultiIndex, Param, VectorField, Q};
use crate::spectral::{gaussian_action, operator_matrix, oscillator_matrix, restriction, Eigenspace};

/// Energy parameter of the symmetric generators.
#[derive(Clone, Debug, PartialEq)]
pub enum Energy {
    Symbolic,
    Value(Q),
}

impl Energy {
    fn coeff(&self) -> Result<Coeff> {
        match self {
            Energy::Symbolic => Ok(Coeff::param(Chart::R4, Param::E)),
            Energy::Value(e) if e.is_negative() => Ok(Coeff::constant(Chart::R4, e.clone())),
            Energy::Value(e) => Err(Error::InvalidArgument(format!("energy must be negative, got {e}"))),
        }
    }
}

fn check_labels(a: usize, b: usize) -> Result<()> {
    if a > 3 || b > 3 {
        return Err(Error::InvalidArgument(format!("labels must lie in 0..4, got ({a}, {b})")));
    }
    Ok(())
}

/// `L_ab = y^a d_b - y^b d_a`.
pub fn l_ab(a: usize, b: usize) -> Result<VectorField> {
    check_labels(a, b)?;
    if a == b {
        return Err(Error::InvalidArgument(format!("L_ab needs distinct labels, got ({a}, {a})")));
    }
    Ok(plane_rotation(a, b))
}

/// `1/2 (alpha y^a y^b + beta d_a d_b)` on chart slots.
fn quadratic_family(sa: usize, sb: usize, alpha: &Coeff, beta: &Q) -> DiffOp {
    let yy = &Coeff::coord(Chart::R4, sa) * &Coeff::coord(Chart::R4, sb);
    let mut d = DiffOp::derivative(Chart::R4, MultiIndex::unit(sa).add(&MultiIndex::unit(sb))).scale(beta);
    d.add_term(MultiIndex::zero(), &yy * alpha);
    d.scale(&qr(1, 2))
}

fn omega_squared(energy: &Energy) -> Result<Coeff> {
    Ok(energy.coeff()?.scale(&q(-8)))
}

/// `D_ab = 1/2 (w^2 y^a y^b - d_a d_b)` with `w^2 = -8E`.
pub fn d_ab(a: usize, b: usize, energy: &Energy) -> Result<DiffOp> {
    check_labels(a, b)?;
    Ok(quadratic_family(Chart::y(a), Chart::y(b), &omega_squared(energy)?, &-Q::one()))
}

type Expansion = BTreeMap<MultiIndex, Q>;

fn accumulate(out: &mut Expansion, part: Expansion, c: &Q) {
    for (m, v) in part {
        let slot = out.entry(m).or_insert_with(Q::zero);
        *slot += v * c;
    }
}

fn act(d: &DiffOp, v: &Expansion, omega: &Q) -> Result<Expansion> {
    let mut out = Expansion::new();
    for (a, c) in v {
        accumulate(&mut out, gaussian_action(d, a, omega)?, c);
    }
    out.retain(|_, c| !c.is_zero());
    Ok(out)
}

/// Oracle for the symmetric generators: the ratio `alpha/beta` of the unique
/// member of `1/2 (alpha y^a y^b + beta d_a d_b)` that maps the level-`n`
/// oscillator eigenspace at frequency `omega` into itself. `None` if the
/// member is not unique up to scale or has `beta = 0`.
pub fn fit_quadratic_ratio(a: usize, b: usize, n: u32, omega: &Q) -> Result<Option<Q>> {
    check_labels(a, b)?;
    let (sa, sb) = (Chart::y(a), Chart::y(b));
    let space = Eigenspace::compute(n, omega)?;
    let h = oscillator_hamiltonian(omega);
    let lambda = omega * q(n as i64 + 2);
    let yy = quadratic_family(sa, sb, &Coeff::one(Chart::R4), &Q::zero());
    let dd = quadratic_family(sa, sb, &Coeff::zero(Chart::R4), &Q::one());
    let residual = |op: &DiffOp, v: &Expansion| -> Result<Expansion> {
        let u = act(op, v, omega)?;
        let mut out = act(&h, &u, omega)?;
        accumulate(&mut out, u, &-&lambda);
        out.retain(|_, c| !c.is_zero());
        Ok(out)
    };
    let mut rows: BTreeMap<(usize, MultiIndex), [Q; 2]> = BTreeMap::new();
    for (i, vec) in space.vectors.iter().enumerate() {
        let v: Expansion = space
            .basis
            .elements
            .iter()
            .zip(vec)
            .filter(|(_, c)| !c.is_zero())
            .map(|(a, c)| (*a, c.clone()))
            .collect();
        for (col, op) in [&yy, &dd].into_iter().enumerate() {
            for (m, c) in residual(op, &v)? {
                rows.entry((i, m)).or_insert_with(|| [Q::zero(), Q::zero()])[col] = c;
            }
        }
    }
    let mut m = RatMatrix::zeros(rows.len(), 2);
    for (r, vals) in rows.values().enumerate() {
        m[(r, 0)] = vals[0].clone();
        m[(r, 1)] = vals[1].clone();
    }
    let kernel = m.kernel();
    if kernel.len() != 1 || kernel[0][1].is_zero() {
        return Ok(None);
    }
    Ok(Some(&kernel[0][0] / &kernel[0][1]))
}

#[derive(Clone, Debug)]
pub struct GeneratorSet {
    /// `L_ab` for `a < b`.
    pub antisymmetric: Vec<((usize, usize), VectorField)>,
    /// `D_ab` for `a <= b`.
    pub symmetric: Vec<((usize, usize), DiffOp)>,
    /// `(L1, L2, L3, D1, D2, D3)`.
    pub selected: [DiffOp; 6],
}

/// Signs aligning the `D_i` with the projected `L_i`, which come out as
/// `(-2 J1, 2 J2, -2 J3)`. Without them `[L_i, D_j]` is not of the form
/// `c eps_ijk D_k`.
const ORIENTATION: [i64; 3] = [1, -1, 1];

/// `D_i = 1/2 o_i sum_ab S^i_ab D_ab` where `x_i = sum_ab S^i_ab y^a y^b` and
/// `o` is [`ORIENTATION`].
fn combined_quadratic(i: usize, w2: &Coeff) -> DiffOp {
    let s = &ks_quadratic_forms()[i];
    let o = q(ORIENTATION[i]);
    let mut out = DiffOp::zero(Chart::R4);
    for (sa, row) in s.iter().enumerate() {
        for (sb, c) in row.iter().enumerate() {
            if !c.is_zero() {
                out = &out + &quadratic_family(sa, sb, w2, &-Q::one()).scale(&(c * &o / q(2)));
            }
        }
    }
    out
}

/// The X3-commuting combinations: `L_i` are the right invariant fields and
/// `D_i` follow the KS quadratics.
pub fn selected_generators(energy: &Energy) -> Result<[DiffOp; 6]> {
    let w2 = omega_squared(energy)?;
    let [y1, y2, y3] = y_basis();
    Ok([
        y1.into_op(),
        y2.into_op(),
        y3.into_op(),
        combined_quadratic(0, &w2),
        combined_quadratic(1, &w2),
        combined_quadratic(2, &w2),
    ])
}

pub fn generator_set(energy: &Energy) -> Result<GeneratorSet> {
    let mut antisymmetric = Vec::new();
    let mut symmetric = Vec::new();
    for a in 0..4 {
        for b in a..4 {
            if a != b {
                antisymmetric.push(((a, b), l_ab(a, b)?));
            }
            symmetric.push(((a, b), d_ab(a, b, energy)?));
        }
    }
    let selected = selected_generators(energy)?;
    for g in &selected {
        if !is_in_centralizer(g)? {
            return Err(Error::Internal("selected generator does not commute with X3".into()));
        }
    }
    Ok(GeneratorSet { antisymmetric, symmetric, selected })
}

fn levi_civita(i: usize, j: usize, k: usize) -> i64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1,
        _ => 0,
    }
}

/// Which block a bracket lands in and with what constant.
#[derive(Clone, Debug, PartialEq)]
pub struct Bracket {
    /// `c` in `[G_i, G_j] = c eps_ijk G_k`; `None` if the pattern is violated.
    pub constant: Option<Q>,
}

#[derive(Clone, Debug)]
pub struct ClosureReport {
    pub level: u32,
    pub k: Q,
    pub omega: Q,
    pub energy: Q,
    pub dimension: usize,
    /// Rank of the six restricted matrices.
    pub rank: usize,
    /// Every restricted generator commutes with `H_osc` on the full block.
    pub commutes_with_hamiltonian: bool,
    /// `constants[i][j][k]`: coefficient of generator `k` in `[G_i, G_j]`.
    pub constants: Vec<Vec<Vec<Q>>>,
    /// Largest entry of the closure residual over all pairs; exactly zero on success.
    pub max_residual: Q,
    pub ll: Bracket,
    pub ld: Bracket,
    pub dd: Bracket,
}

impl ClosureReport {
    pub fn closes(&self) -> bool {
        self.max_residual.is_zero()
    }

    pub fn epsilon_pattern(&self) -> bool {
        self.ll.constant.is_some() && self.ld.constant.is_some() && self.dd.constant.is_some()
    }

    /// `lambda(N)`: the `[D,D]` constant in units of the `[L,L]` constant.
    pub fn dd_ratio(&self) -> Option<Q> {
        let ll = self.ll.constant.as_ref()?;
        let dd = self.dd.constant.as_ref()?;
        (!ll.is_zero()).then(|| dd / ll)
    }
}

fn bracket_pattern(c: &[Vec<Vec<Q>>], left: usize, right: usize, target: usize) -> Bracket {
    let kappa = c[left][right + 1][target + 2].clone();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..6 {
                let expect = if k / 3 == target / 3 { &kappa * q(levi_civita(i, j, k % 3)) } else { Q::zero() };
                if c[left + i][right + j][k] != expect {
                    return Bracket { constant: None };
                }
            }
        }
    }
    Bracket { constant: Some(kappa) }
}

fn flatten(m: &RatMatrix) -> Vec<Q> {
    let mut out = Vec::with_capacity(m.rows() * m.cols());
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            out.push(m[(r, c)].clone());
        }
    }
    out
}

/// Exact least squares `min |A x - b|`; returns `x` and the residual.
fn least_squares(a: &RatMatrix, b: &[Q]) -> Result<(Vec<Q>, Vec<Q>)> {
    let at = a.transpose();
    let x = (&at * a)
        .solve(&at.mul_vec(b))
        .ok_or_else(|| Error::Internal("normal equations are inconsistent".into()))?;
    let ax = a.mul_vec(&x);
    Ok((x, b.iter().zip(ax).map(|(u, v)| u - v).collect()))
}

/// Restrict the selected generators to the level-`n` eigenspace at `w = 4k/(n+2)`
/// and compute their brackets in their own span.
pub fn structure_constants(n: u32, k: &Q) -> Result<ClosureReport> {
    if !n.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("level must be even, got {n}")));
    }
    if !k.is_positive() {
        return Err(Error::InvalidArgument(format!("coupling constant must be positive, got {k}")));
    }
    let omega = admissible_frequency(k, n);
    let energy = admissible_energy(k, n);
    let gens = selected_generators(&Energy::Value(energy.clone()))?;
    let space = Eigenspace::compute(n, &omega)?;
    let h = oscillator_matrix(&space.basis)?;
    let mut commutes = true;
    for g in &gens {
        commutes &= operator_matrix(g, &space.basis)?.entries.commutator(&h.entries).is_zero();
    }
    let restricted: Vec<RatMatrix> = gens.iter().map(|g| restriction(g, &space)).collect::<Result<_>>()?;
    let columns: Vec<Vec<Q>> = restricted.iter().map(flatten).collect();
    let dimension = space.dimension();
    let span = RatMatrix::from_columns(dimension * dimension, &columns);
    let rank = span.rank();

    let pairs: Vec<(usize, usize)> = (0..6).flat_map(|i| (i + 1..6).map(move |j| (i, j))).collect();
    let solved: Vec<Result<(Vec<Q>, Vec<Q>)>> = pairs
        .par_iter()
        .map(|&(i, j)| least_squares(&span, &flatten(&restricted[i].commutator(&restricted[j]))))
        .collect();
    let mut constants = vec![vec![vec![Q::zero(); 6]; 6]; 6];
    let mut max_residual = Q::zero();
    for (&(i, j), res) in pairs.iter().zip(solved) {
        let (x, residual) = res?;
        for r in residual {
            max_residual = max_residual.max(r.abs());
        }
        for (kk, v) in x.into_iter().enumerate() {
            constants[j][i][kk] = -v.clone();
            constants[i][j][kk] = v;
        }
    }
    let ll = bracket_pattern(&constants, 0, 0, 0);
    let ld = bracket_pattern(&constants, 0, 3, 3);
    let dd = bracket_pattern(&constants, 3, 3, 0);
    Ok(ClosureReport {
        level: n,
        k: k.clone(),
        omega,
        energy,
        dimension,
        rank,
        commutes_with_hamiltonian: commutes,
        constants,
        max_residual,
        ll,
        ld,
        dd,
    })
}

/// `J_i = eps_ijk x_j d_k` on the 3D chart.
pub fn rotation_generator(i: usize) -> VectorField {
    let (j, k) = ((i + 1) % 3, (i + 2) % 3);
    let mut comps = vec![Coeff::zero(Chart::R3); 3];
    comps[k] = Coeff::coord(Chart::R3, j);
    comps[j] = -&Coeff::coord(Chart::R3, k);
    VectorField::new(Chart::R3, &comps)
}

/// `(axis, s)` with `d = s J_axis`, if any.
pub fn as_rotation(d: &DiffOp) -> Option<(usize, Q)> {
    if d.chart() != Chart::R3 || d.is_zero() {
        return None;
    }
    (0..3).find_map(|axis| {
        let (j, k) = ((axis + 1) % 3, (axis + 2) % 3);
        let c = d.coefficient(&MultiIndex::unit(k));
        let mut mono = [0u16; 3];
        mono[j] = 1;
        let s = c.numerator().coefficient(&Mono(pad(mono)));
        if s.is_zero() {
            return None;
        }
        (rotation_generator(axis).as_op().scale(&s) == *d).then_some((axis, s))
    })
}

fn pad(m: [u16; 3]) -> [u16; 8] {
    let mut out = [0u16; 8];
    out[..3].copy_from_slice(&m);
    out
}

/// Check of the projected symmetric generators on one hydrogen level.
#[derive(Clone, Debug)]
pub struct LevelCheck {
    pub level: u32,
    pub energy: Q,
    /// Descended X3-invariant eigenfunctions `q e^(-w r/2)`, stored as `q`.
    pub eigenfunctions: Vec<Coeff>,
    /// `(H - E_N) f = 0` for every descended eigenfunction.
    pub eigenfunctions_ok: bool,
    /// `(H - E_N) D~_i f = 0` for every `i` and every eigenfunction.
    pub commutes: bool,
    /// Matrices of `D~_i` on the descended eigenfunctions, when the images stay in their span.
    pub matrices: Vec<Option<RatMatrix>>,
}

#[derive(Clone, Debug)]
pub struct ProjectedSymmetries {
    pub k: Q,
    pub angular: [DiffOp; 3],
    /// `project(L_i) = s_i J_axis_i`.
    pub rotations: [Option<(usize, Q)>; 3],
    /// Projected `D_i` with symbolic `E`.
    pub runge_lenz: [DiffOp; 3],
    pub levels: Vec<LevelCheck>,
}

impl ProjectedSymmetries {
    pub fn angular_are_rotations(&self) -> bool {
        self.rotations.iter().all(Option::is_some)
    }

    pub fn all_levels_commute(&self) -> bool {
        self.levels.iter().all(|l| l.eigenfunctions_ok && l.commutes)
    }
}

fn coefficient_vector(c: &Coeff) -> BTreeMap<Mono, Q> {
    c.numerator().terms().map(|(m, v)| (*m, v.clone())).collect()
}

/// Coordinates of each image in the span of `basis`; `None` if some image leaves it.
fn span_matrix(basis: &[Coeff], images: &[Coeff]) -> Option<RatMatrix> {
    if basis.iter().chain(images).any(|c| c.radical_denominator_power() != 0) {
        return None;
    }
    let vb: Vec<BTreeMap<Mono, Q>> = basis.iter().map(coefficient_vector).collect();
    let vi: Vec<BTreeMap<Mono, Q>> = images.iter().map(coefficient_vector).collect();
    let monos: Vec<Mono> = {
        let mut all: Vec<Mono> = vb.iter().chain(&vi).flat_map(|v| v.keys().copied()).collect();
        all.sort();
        all.dedup();
        all
    };
    let column = |v: &BTreeMap<Mono, Q>| -> Vec<Q> { monos.iter().map(|m| v.get(m).cloned().unwrap_or_else(Q::zero)).collect() };
    let a = RatMatrix::from_columns(monos.len(), &vb.iter().map(column).collect::<Vec<_>>());
    let cols: Option<Vec<Vec<Q>>> = vi.iter().map(|v| a.solve(&column(v))).collect();
    Some(RatMatrix::from_columns(basis.len(), &cols?))
}

/// X3-invariant oscillator eigenfunctions at level `n`, descended to the 3D chart.
pub fn descended_eigenfunctions(n: u32, k: &Q) -> Result<Vec<Coeff>> {
    let omega = admissible_frequency(k, n);
    let space = Eigenspace::compute(n, &omega)?;
    let x3 = restriction(x3_field().as_op(), &space)?;
    let mut out = Vec::new();
    for coords in x3.kernel() {
        let mut p = Coeff::zero(Chart::R4);
        for (c, v) in coords.iter().zip(&space.vectors) {
            if c.is_zero() {
                continue;
            }
            for (a, x) in space.basis.elements.iter().zip(v) {
                if !x.is_zero() {
                    p = &p + &Coeff::coord_monomial(Chart::R4, &a.0).scale(&(c * x));
                }
            }
        }
        out.push(descend(&p)?);
    }
    Ok(out)
}

fn check_level(n: u32, k: &Q, runge_lenz: &[DiffOp; 3]) -> Result<LevelCheck> {
    let omega = admissible_frequency(k, n);
    let energy = admissible_energy(k, n);
    let h = hydrogen_hamiltonian(k)?;
    let phi = Coeff::radical(Chart::R3).scale(&(-&omega / q(2)));
    let shifted_h = |f: &Coeff| -> Result<Coeff> { Ok(&h.apply_weighted(f, &phi)? - &f.scale(&energy)) };
    let eigenfunctions = descended_eigenfunctions(n, k)?;
    let mut eigenfunctions_ok = true;
    for f in &eigenfunctions {
        eigenfunctions_ok &= shifted_h(f)?.is_zero();
    }
    let mut commutes = true;
    let mut matrices = Vec::new();
    for d in runge_lenz {
        let d = d.substitute_param(Param::E, &energy);
        let images: Vec<Coeff> = eigenfunctions.iter().map(|f| d.apply_weighted(f, &phi)).collect::<Result<_>>()?;
        for g in &images {
            commutes &= shifted_h(g)?.is_zero();
        }
        matrices.push(span_matrix(&eigenfunctions, &images));
    }
    Ok(LevelCheck { level: n, energy, eigenfunctions, eigenfunctions_ok, commutes, matrices })
}

/// Levels on which [`project_symmetries`] checks the projected symmetric generators.
pub const CHECK_LEVELS: [u32; 3] = [0, 2, 4];

pub fn project_symmetries(k: &Q) -> Result<ProjectedSymmetries> {
    project_symmetries_at(k, &CHECK_LEVELS)
}

/// Project the selected generators (symbolic `E`) and test the projected
/// symmetric ones against the hydrogen eigenproblem on each listed even level.
pub fn project_symmetries_at(k: &Q, levels: &[u32]) -> Result<ProjectedSymmetries> {
    if !k.is_positive() {
        return Err(Error::InvalidArgument(format!("coupling constant must be positive, got {k}")));
    }
    if let Some(n) = levels.iter().find(|n| *n % 2 != 0) {
        return Err(Error::InvalidArgument(format!("level must be even, got {n}")));
    }
    let gens = selected_generators(&Energy::Symbolic)?;
    let projected: Vec<DiffOp> = gens.par_iter().map(project).collect::<Result<_>>()?;
    let angular = [projected[0].clone(), projected[1].clone(), projected[2].clone()];
    let runge_lenz = [projected[3].clone(), projected[4].clone(), projected[5].clone()];
    let rotations = [as_rotation(&angular[0]), as_rotation(&angular[1]), as_rotation(&angular[2])];
    let levels = levels.iter().map(|&n| check_level(n, k, &runge_lenz)).collect::<Result<_>>()?;
    Ok(ProjectedSymmetries { k: k.clone(), angular, rotations, runge_lenz, levels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ksfib::pullback;

    fn sum(a: &VectorField, b: &VectorField) -> DiffOp {
        a.as_op() + b.as_op()
    }

    #[test]
    fn antisymmetric_generators() {
        let [y1, _, y3] = y_basis();
        assert_eq!(sum(&l_ab(0, 3).unwrap(), &l_ab(2, 1).unwrap()), *y3.as_op());
        assert_eq!(sum(&l_ab(1, 0).unwrap(), &l_ab(2, 3).unwrap()), *y1.as_op());
        // the printed L10 + L32 is not in the commuting factor
        let printed = sum(&l_ab(1, 0).unwrap(), &l_ab(3, 2).unwrap());
        assert!(!is_in_centralizer(&printed).unwrap());
        assert!(l_ab(2, 2).is_err());
    }

    #[test]
    fn oracle_fixes_sign_and_scale() {
        for (n, omega) in [(0, q(1)), (2, qr(1, 2)), (4, qr(2, 3))] {
            for (a, b) in [(1, 3), (2, 0), (1, 1)] {
                let ratio = fit_quadratic_ratio(a, b, n, &omega).unwrap();
                assert_eq!(ratio, Some(-(&omega * &omega)), "n={n} ({a},{b})");
            }
        }
    }

    #[test]
    fn fradkin_combination_commutes_at_level_two() {
        let omega = admissible_frequency(&q(1), 2);
        let e = Energy::Value(admissible_energy(&q(1), 2));
        let d = &d_ab(1, 3, &e).unwrap() + &d_ab(2, 0, &e).unwrap();
        let space = Eigenspace::compute(2, &omega).unwrap();
        let h = oscillator_matrix(&space.basis).unwrap();
        let m = operator_matrix(&d, &space.basis).unwrap();
        assert!(m.entries.commutator(&h.entries).is_zero());
    }

    #[test]
    fn selected_generators_commute_with_x3() {
        let gens = selected_generators(&Energy::Symbolic).unwrap();
        let x3 = x3_field();
        for g in &gens {
            assert!(g.commutator(x3.as_op()).unwrap().is_zero());
        }
        // D3 multiplication part is -2E x3(y)
        let mult = gens[5].coefficient(&MultiIndex::zero());
        let x3y = pullback(&Coeff::coord(Chart::R3, 2)).unwrap();
        assert_eq!(mult, &x3y * &Coeff::param(Chart::R4, Param::E).scale(&q(-2)));
        assert!(generator_set(&Energy::Symbolic).is_ok());
        assert!(d_ab(0, 1, &Energy::Value(q(1))).is_err());
    }

    #[test]
    fn closure_levels() {
        let r0 = structure_constants(0, &q(1)).unwrap();
        assert!(r0.closes() && r0.commutes_with_hamiltonian);
        assert!(r0.constants.iter().flatten().flatten().all(Zero::is_zero));

        let r2 = structure_constants(2, &q(1)).unwrap();
        let r4 = structure_constants(4, &q(1)).unwrap();
        for r in [&r2, &r4] {
            assert!(r.closes(), "residual {}", r.max_residual);
            assert!(r.commutes_with_hamiltonian);
            assert!(r.epsilon_pattern(), "{:?} {:?} {:?}", r.ll, r.ld, r.dd);
            assert_eq!(r.ll.constant, Some(q(-2)));
            assert_eq!(r.ld.constant, Some(q(-2)));
            assert_eq!(r.dd_ratio().unwrap() / (r.energy.clone() * q(-2)), q(-1));
        }
        let ratio = r2.dd_ratio().unwrap() / r4.dd_ratio().unwrap();
        assert_eq!(ratio, qr(9, 4));
        assert!(structure_constants(3, &q(1)).is_err());
    }

    #[test]
    fn projected_symmetries() {
        let p = project_symmetries_at(&q(1), &[0, 2]).unwrap();
        assert!(p.angular_are_rotations(), "{:?}", p.rotations);
        assert_eq!(p.rotations[2].as_ref().map(|r| r.0), Some(2));
        assert!(p.all_levels_commute());
        assert!(p.runge_lenz[2].terms().any(|(s, c)| s.order() == 1 && !c.is_zero()));
        for l in &p.levels {
            assert!(l.matrices.iter().all(Option::is_some));
        }
        // adding X3 does not change the projection
        let l1 = &selected_generators(&Energy::Symbolic).unwrap()[0] + &x3_field().as_op().scale(&q(3));
        assert_eq!(project(&l1).unwrap(), p.angular[0]);
    }
}
