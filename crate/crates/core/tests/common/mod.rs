#![allow(dead_code)]

use ksreduce::hydrogen::conformal_kepler;
use ksreduce::ksfib::{pullback, r_field, x3_field, y_basis};
use ksreduce::opalgebra::poly::RADICAL_SLOT;
use ksreduce::opalgebra::{qr, Chart, Coeff, DiffOp, Mono, MultiIndex, Poly, Q};
use proptest::prelude::*;

pub fn rational() -> impl Strategy<Value = Q> {
    (-4i64..=4, 1i64..=3).prop_map(|(n, d)| qr(n, d))
}

fn monomial(chart: Chart, max_deg: u32, radical: bool) -> impl Strategy<Value = Mono> {
    let dim = chart.dim();
    proptest::collection::vec(0u16..=max_deg as u16, dim + 1).prop_map(move |mut e| {
        if !radical {
            e[dim] = 0;
        }
        // trim to the degree bound
        let mut total: u32 = 0;
        let mut m = Mono::one();
        for (i, x) in e.iter().enumerate() {
            let take = (*x as u32).min(max_deg - total);
            total += take;
            let slot = if i == dim { RADICAL_SLOT } else { i };
            m = m.with(slot, take as u16);
        }
        m
    })
}

/// Polynomial in the coordinates (and the radical when `radical`), total degree `<= max_deg`.
pub fn poly(chart: Chart, max_deg: u32, radical: bool, terms: usize) -> impl Strategy<Value = Poly> {
    proptest::collection::vec((monomial(chart, max_deg, radical), rational()), 0..=terms).prop_map(|ts| {
        let mut p = Poly::zero();
        for (m, c) in ts {
            p.add_term(m, c);
        }
        p
    })
}

pub fn coeff(chart: Chart, max_deg: u32, radical: bool, max_den: u32) -> impl Strategy<Value = Coeff> {
    (poly(chart, max_deg, radical, 4), 0..=max_den).prop_map(move |(p, d)| Coeff::from_parts(chart, p, d))
}

/// Polynomial coefficient without the radical.
pub fn poly_coeff(chart: Chart, max_deg: u32) -> impl Strategy<Value = Coeff> {
    coeff(chart, max_deg, false, 0)
}

pub fn operator(chart: Chart, max_order: u32, coeff_deg: u32, radical: bool) -> impl Strategy<Value = DiffOp> {
    let dim = chart.dim();
    let sigma = proptest::collection::vec(0u16..=max_order as u16, dim).prop_map(move |e| {
        let mut out = [0u16; 4];
        let mut total = 0u16;
        for (i, x) in e.iter().enumerate() {
            let take = (*x).min(max_order as u16 - total);
            total += take;
            out[i] = take;
        }
        MultiIndex(out)
    });
    let max_den = if radical { 2 } else { 0 };
    proptest::collection::vec((sigma, coeff(chart, coeff_deg, radical, max_den)), 0..=4)
        .prop_map(move |ts| DiffOp::from_terms(chart, ts))
}

/// Building blocks that preserve fiber-invariant functions.
fn projectable_atoms() -> Vec<DiffOp> {
    let [y1, y2, y3] = y_basis();
    let mut atoms = vec![
        y1.into_op(),
        y2.into_op(),
        y3.into_op(),
        r_field().into_op(),
        conformal_kepler(&qr(1, 1)).unwrap(),
        x3_field().into_op(),
    ];
    for i in 0..3 {
        atoms.push(DiffOp::multiplication(pullback(&Coeff::coord(Chart::R3, i)).unwrap()));
    }
    atoms
}

/// Random linear combinations of products of at most two projectable atoms.
pub fn projectable_operator() -> impl Strategy<Value = DiffOp> {
    let n = projectable_atoms().len();
    proptest::collection::vec((0..n, 0..=n, rational()), 1..=3).prop_map(|ts| {
        let atoms = projectable_atoms();
        let mut out = DiffOp::zero(Chart::R4);
        for (a, b, c) in ts {
            let mut t = atoms[a].clone();
            if b < atoms.len() {
                t = t.compose(&atoms[b]).unwrap();
            }
            out = &out + &t.scale(&c);
        }
        out
    })
}

/// Random elements built from generators of the centralizer of X3.
pub fn centralizer_operator() -> impl Strategy<Value = DiffOp> {
    fn atoms() -> Vec<DiffOp> {
        let [y1, y2, y3] = y_basis();
        vec![
            y1.into_op(),
            y2.into_op(),
            y3.into_op(),
            r_field().into_op(),
            x3_field().into_op(),
            DiffOp::laplacian(Chart::R4),
            DiffOp::multiplication(Coeff::radical_pow(Chart::R4, 2)),
            DiffOp::multiplication(pullback(&Coeff::coord(Chart::R3, 0)).unwrap()),
            DiffOp::multiplication(Coeff::radical_pow(Chart::R4, -1)),
        ]
    }
    let n = atoms().len();
    proptest::collection::vec((0..n, 0..=n, rational()), 1..=3).prop_map(|ts| {
        let atoms = atoms();
        let mut out = DiffOp::zero(Chart::R4);
        for (a, b, c) in ts {
            let mut t = atoms[a].clone();
            if b < atoms.len() {
                t = t.compose(&atoms[b]).unwrap();
            }
            out = &out + &t.scale(&c);
        }
        out
    })
}
