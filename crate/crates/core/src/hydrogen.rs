//! Model Hamiltonians, the eigenproblem reparametrization and the closed-form
//! spectrum of the hydrogen–oscillator correspondence (units `m = hbar = 1`).

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::opalgebra::poly::RADICAL_SLOT;
use crate::opalgebra::{q, qr, Chart, Coeff, DiffOp, MultiIndex, Param, Poly, Q};

fn require_positive(k: &Q) -> Result<()> {
    if k.is_positive() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("coupling constant must be positive, got {k}")))
    }
}

/// `-1/2 Delta3 - k/r`.
pub fn hydrogen_hamiltonian(k: &Q) -> Result<DiffOp> {
    require_positive(k)?;
    let mut h = DiffOp::laplacian(Chart::R3).scale(&qr(-1, 2));
    h.add_term(MultiIndex::zero(), Coeff::radical_pow(Chart::R3, -1).scale(&-k));
    Ok(h)
}

/// `-1/2 (1/4R^2) Delta4 - k/R^2`.
pub fn conformal_kepler(k: &Q) -> Result<DiffOp> {
    require_positive(k)?;
    let inv_r2 = Coeff::radical_pow(Chart::R4, -2);
    let mut h = DiffOp::laplacian(Chart::R4).left_mul(&inv_r2.scale(&qr(-1, 8)));
    h.add_term(MultiIndex::zero(), inv_r2.scale(&-k));
    Ok(h)
}

/// `-1/2 Delta4 + 1/2 w^2 R^2` at a rational frequency.
pub fn oscillator_hamiltonian(omega: &Q) -> DiffOp {
    let mut h = DiffOp::laplacian(Chart::R4).scale(&qr(-1, 2));
    h.add_term(MultiIndex::zero(), Coeff::radical_pow(Chart::R4, 2).scale(&(omega * omega / q(2))));
    h
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormKind {
    Hydrogen,
    ConformalKepler,
    Oscillator,
    Reparametrized,
}

/// The eigenproblem `(operator - eigenvalue) psi = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenproblemForm {
    pub operator: DiffOp,
    pub eigenvalue: Coeff,
    pub kind: FormKind,
}

impl EigenproblemForm {
    pub fn new(operator: DiffOp, eigenvalue: Coeff, kind: FormKind) -> Result<EigenproblemForm> {
        if !eigenvalue.is_pure_parameter() {
            return Err(Error::InvalidArgument(format!("eigenvalue {eigenvalue} depends on coordinates")));
        }
        operator.same_chart(&DiffOp::zero(eigenvalue.chart()))?;
        Ok(EigenproblemForm { operator, eigenvalue, kind })
    }

    /// `(H - E) psi = 0` with symbolic `E`.
    pub fn hydrogen(k: &Q) -> Result<EigenproblemForm> {
        EigenproblemForm::new(hydrogen_hamiltonian(k)?, Coeff::param(Chart::R3, Param::E), FormKind::Hydrogen)
    }

    /// `(H' - E) psi = 0` with symbolic `E`.
    pub fn conformal_kepler(k: &Q) -> Result<EigenproblemForm> {
        EigenproblemForm::new(conformal_kepler(k)?, Coeff::param(Chart::R4, Param::E), FormKind::ConformalKepler)
    }

    /// `operator - eigenvalue` as a single operator.
    pub fn shifted(&self) -> DiffOp {
        let mut d = self.operator.clone();
        d.add_term(MultiIndex::zero(), -&self.eigenvalue);
        d
    }
}

/// Terms of radial degree 0 (coordinates plus radical equal to the denominator power).
fn degree_zero_part(c: &Coeff) -> Coeff {
    let den = c.radical_denominator_power() as i64;
    let mut part = Poly::zero();
    for (m, v) in c.numerator().terms() {
        let deg = m.coord_degree() as i64 + m.0[RADICAL_SLOT] as i64;
        if deg == den {
            part.add_term(*m, v.clone());
        }
    }
    Coeff::from_parts(c.chart(), part, c.radical_denominator_power())
}

/// Multiply `operator - eigenvalue` by `multiplier` and split the product into a
/// new operator and a pure-parameter eigenvalue.
///
/// The eigenvalue is read off the scale-invariant (radial degree 0) part of the
/// identity coefficient, which must be a pure parameter after canonicalization;
/// everything else stays in the operator.
pub fn reparametrize_eigenproblem(p: &EigenproblemForm, multiplier: &Coeff) -> Result<EigenproblemForm> {
    if multiplier.is_zero() {
        return Err(Error::InvalidArgument("multiplier must be nonzero".into()));
    }
    multiplier.same_chart(&p.eigenvalue)?;
    let product = p.shifted().left_mul(multiplier);
    let identity = product.coefficient(&MultiIndex::zero());
    let pure = degree_zero_part(&identity);
    if pure.is_zero() || !pure.is_pure_parameter() {
        return Err(Error::NonSeparable);
    }
    let mut operator = product;
    operator.add_term(MultiIndex::zero(), -&pure);
    let kind = if multiplier.is_one() { p.kind } else { FormKind::Reparametrized };
    EigenproblemForm::new(operator, -&pure, kind)
}

/// Oscillator frequency at a bound-state energy: `w^2 = -8E`.
#[derive(Clone, Debug, PartialEq)]
pub struct Frequency {
    pub energy: Q,
    pub omega_squared: Q,
    /// `Some(w)` when `-8E` is the square of a rational.
    pub omega: Option<Q>,
}

fn rational_sqrt(v: &Q) -> Option<Q> {
    if v.is_negative() {
        return None;
    }
    let (n, d) = (v.numer(), v.denom());
    let (sn, sd) = (n.sqrt(), d.sqrt());
    (&sn * &sn == *n && &sd * &sd == *d).then(|| Q::new(sn, sd))
}

pub fn oscillator_frequency(energy: &Q) -> Result<Frequency> {
    if !energy.is_negative() {
        return Err(Error::InvalidArgument(format!("bound states need E < 0, got {energy}")));
    }
    let omega_squared = energy * q(-8);
    Ok(Frequency { energy: energy.clone(), omega: rational_sqrt(&omega_squared), omega_squared })
}

/// Energy at which the level-`n` oscillator has eigenvalue `4k`: `-2k^2/(n+2)^2`.
pub fn admissible_energy(k: &Q, n: u32) -> Q {
    let m = q(n as i64 + 2);
    -(k * k * q(2)) / (&m * &m)
}

/// `w = 4k/(n+2)`, the frequency at [`admissible_energy`].
pub fn admissible_frequency(k: &Q, n: u32) -> Q {
    k * q(4) / q(n as i64 + 2)
}

/// `-k^2 / (2 (m+1)^2)`.
pub fn hydrogen_energy(k: &Q, m: u32) -> Q {
    let d = q(m as i64 + 1);
    -(k * k) / (&d * &d * q(2))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumRow {
    pub n: u32,
    pub energy: Q,
    pub omega: Q,
    pub admissible: bool,
    pub projectable: bool,
    /// `(m, E_m)` for even `n = 2m`.
    pub hydrogen_level: Option<(u32, Q)>,
    pub kernel_dim: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumTable {
    pub k: Q,
    pub rows: Vec<SpectrumRow>,
}

pub fn admissible_energies(k: &Q, n_max: u32) -> Result<SpectrumTable> {
    require_positive(k)?;
    let rows = (0..=n_max)
        .map(|n| SpectrumRow {
            n,
            energy: admissible_energy(k, n),
            omega: admissible_frequency(k, n),
            admissible: true,
            projectable: n % 2 == 0,
            hydrogen_level: (n % 2 == 0).then(|| (n / 2, hydrogen_energy(k, n / 2))),
            kernel_dim: None,
        })
        .collect();
    Ok(SpectrumTable { k: k.clone(), rows })
}

impl SpectrumTable {
    /// Fill `kernel_dim` for rows with `n <= cap` from exact X3-kernel ranks.
    pub fn verify_kernel_dims(&mut self, cap: u32) -> Result<()> {
        for row in &mut self.rows {
            if row.n <= cap {
                row.kernel_dim = Some(crate::spectral::x3_kernel_dimension(row.n, &self.k)?);
            }
        }
        Ok(())
    }

    /// Multiplicity ladder check: `(m+1)^2` on even rows and 0 on odd rows.
    pub fn kernel_dims_match_hydrogen(&self) -> bool {
        self.rows.iter().all(|r| match r.kernel_dim {
            None => true,
            Some(d) if r.n % 2 == 0 => d == ((r.n / 2 + 1) * (r.n / 2 + 1)) as usize,
            Some(d) => d == 0,
        })
    }
}

impl Frequency {
    pub fn is_rational(&self) -> bool {
        self.omega.is_some()
    }
}
