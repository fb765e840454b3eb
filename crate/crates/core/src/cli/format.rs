//! Canonical ASCII printing of coefficients and operators.
//!
//! Output is accepted back by [`super::parse`]: `parse(print(d)) == d`.

use num_traits::{One, Signed};

use crate::opalgebra::{Chart, Coeff, DiffOp, Mono, MultiIndex, Poly, Q};

pub fn format_rational(c: &Q) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

fn format_mono(chart: Chart, m: &Mono) -> Vec<String> {
    let mut out = Vec::new();
    for (slot, &e) in m.0.iter().enumerate() {
        if e == 0 {
            continue;
        }
        let name = chart.slot_name(slot);
        if e == 1 {
            out.push(name.to_string());
        } else {
            out.push(format!("{name}^{e}"));
        }
    }
    out
}

/// `(negative, body)` for one signed monomial term.
fn format_term(chart: Chart, m: &Mono, c: &Q) -> (bool, String) {
    let mag = c.abs();
    let mut parts = Vec::new();
    let vars = format_mono(chart, m);
    if !mag.is_one() || vars.is_empty() {
        parts.push(format_rational(&mag));
    }
    parts.extend(vars);
    (c.is_negative(), parts.join("*"))
}

fn format_poly(chart: Chart, p: &Poly) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut s = String::new();
    for (i, (m, c)) in p.terms().enumerate() {
        let (neg, body) = format_term(chart, m, c);
        match (i, neg) {
            (0, true) => s.push('-'),
            (0, false) => {}
            (_, true) => s.push_str(" - "),
            (_, false) => s.push_str(" + "),
        }
        s.push_str(&body);
    }
    s
}

fn denominator_suffix(chart: Chart, den: u32) -> String {
    match den {
        0 => String::new(),
        1 => format!("/{}", chart.radical_name()),
        d => format!("/{}^{}", chart.radical_name(), d),
    }
}

/// `(negative, body)`; `body` is `None` when the coefficient is exactly ±1.
fn format_signed_coeff(c: &Coeff) -> (bool, Option<String>) {
    let chart = c.chart();
    let p = c.numerator();
    let den = c.radical_denominator_power();
    if p.len() == 1 {
        let (m, q) = p.terms().next().unwrap();
        let (neg, body) = format_term(chart, m, q);
        if den == 0 && body == "1" {
            return (neg, None);
        }
        return (neg, Some(format!("{body}{}", denominator_suffix(chart, den))));
    }
    (false, Some(format!("({}){}", format_poly(chart, p), denominator_suffix(chart, den))))
}

pub fn format_coeff(c: &Coeff) -> String {
    if c.is_zero() {
        return "0".into();
    }
    match format_signed_coeff(c) {
        (neg, None) => if neg { "-1".into() } else { "1".into() },
        (neg, Some(body)) => if neg { format!("-{body}") } else { strip_outer(body) },
    }
}

/// A bare polynomial needs no parentheses at top level.
fn strip_outer(body: String) -> String {
    match body.strip_prefix('(').and_then(|b| b.strip_suffix(')')) {
        Some(inner) if !inner.contains('(') && !inner.contains(')') => inner.to_string(),
        _ => body,
    }
}

fn format_derivs(chart: Chart, sigma: &MultiIndex) -> Vec<String> {
    let mut out = Vec::new();
    for (i, &e) in sigma.0.iter().enumerate().take(chart.dim()) {
        match e {
            0 => {}
            1 => out.push(format!("d[{}]", chart.coord_names()[i])),
            _ => out.push(format!("d[{}]^{}", chart.coord_names()[i], e)),
        }
    }
    out
}

pub fn format_operator(d: &DiffOp) -> String {
    if d.is_zero() {
        return "0".into();
    }
    let chart = d.chart();
    let mut s = String::new();
    for (i, (sigma, c)) in d.terms().enumerate() {
        let (neg, body) = format_signed_coeff(c);
        let derivs = format_derivs(chart, sigma);
        let mut parts: Vec<String> = Vec::new();
        match body {
            Some(b) => parts.push(b),
            None if derivs.is_empty() => parts.push("1".into()),
            None => {}
        }
        parts.extend(derivs);
        match (i, neg) {
            (0, true) => s.push('-'),
            (0, false) => {}
            (_, true) => s.push_str(" - "),
            (_, false) => s.push_str(" + "),
        }
        s.push_str(&parts.join("*"));
    }
    s
}
