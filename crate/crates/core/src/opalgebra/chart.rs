use std::fmt;

use serde::Serialize;

use super::poly::{Mono, Poly, PARAM_SLOT, RADICAL_SLOT};

/// A punctured Euclidean chart together with its radical generator.
///
/// The only relation in the coefficient ring is `radical^2 = sum(coord^2)`.
/// `R3` carries coordinates `x1, x2, x3` and radical `r`; `R4` carries
/// `y1, y2, y3, y0` (in that order) and radical `R`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Chart {
    #[serde(rename = "r3")]
    R3,
    #[serde(rename = "r4")]
    R4,
}

const R3_COORDS: [&str; 3] = ["x1", "x2", "x3"];
const R4_COORDS: [&str; 4] = ["y1", "y2", "y3", "y0"];

impl Chart {
    pub fn name(self) -> &'static str {
        match self {
            Chart::R3 => "r3",
            Chart::R4 => "r4",
        }
    }

    pub fn from_name(name: &str) -> Option<Chart> {
        match name {
            "r3" => Some(Chart::R3),
            "r4" => Some(Chart::R4),
            _ => None,
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Chart::R3 => 3,
            Chart::R4 => 4,
        }
    }

    pub fn coord_names(self) -> &'static [&'static str] {
        match self {
            Chart::R3 => &R3_COORDS,
            Chart::R4 => &R4_COORDS,
        }
    }

    pub fn radical_name(self) -> &'static str {
        match self {
            Chart::R3 => "r",
            Chart::R4 => "R",
        }
    }

    pub fn coord_index(self, name: &str) -> Option<usize> {
        self.coord_names().iter().position(|c| *c == name)
    }

    /// Slot of the 4D coordinate with the conventional label `y<label>`.
    pub fn y(label: usize) -> usize {
        assert!(label < 4, "y-label out of range");
        (label + 3) % 4
    }

    /// `sum(coord^2)`, the value of `radical^2`.
    pub fn radius_squared(self) -> Poly {
        let mut p = Poly::zero();
        for i in 0..self.dim() {
            let mut m = Mono::one();
            m.0[i] = 2;
            p.add_term(m, super::poly::Q::from_integer(1.into()));
        }
        p
    }

    /// Human-readable name of a monomial slot on this chart.
    pub fn slot_name(self, slot: usize) -> &'static str {
        if slot < self.dim() {
            self.coord_names()[slot]
        } else if slot == RADICAL_SLOT {
            self.radical_name()
        } else {
            Param::from_slot(slot).map(Param::name).unwrap_or("?")
        }
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Formal parameters of the coefficient ring. They commute with everything
/// and carry no relation unless one is substituted explicitly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Param {
    /// Coupling constant.
    K,
    /// Energy.
    E,
    /// Oscillator frequency, printed as `w`.
    Omega,
}

impl Param {
    pub const ALL: [Param; 3] = [Param::K, Param::E, Param::Omega];

    pub fn slot(self) -> usize {
        PARAM_SLOT
            + match self {
                Param::K => 0,
                Param::E => 1,
                Param::Omega => 2,
            }
    }

    pub fn from_slot(slot: usize) -> Option<Param> {
        Param::ALL.into_iter().find(|p| p.slot() == slot)
    }

    pub fn name(self) -> &'static str {
        match self {
            Param::K => "k",
            Param::E => "E",
            Param::Omega => "w",
        }
    }

    pub fn from_name(name: &str) -> Option<Param> {
        match name {
            "k" => Some(Param::K),
            "E" => Some(Param::E),
            "w" | "omega" => Some(Param::Omega),
            _ => None,
        }
    }
}
