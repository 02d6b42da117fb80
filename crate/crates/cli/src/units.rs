//! Unit table for scenario files.

use std::fmt;

/// Physical dimension of a quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    Length,
    Time,
    Energy,
    Frequency,
    Impedance,
    Wavenumber,
    Velocity,
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Dim::Length => "length",
            Dim::Time => "time",
            Dim::Energy => "energy",
            Dim::Frequency => "frequency",
            Dim::Impedance => "impedance",
            Dim::Wavenumber => "wavenumber",
            Dim::Velocity => "velocity",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Unit {
    Fm,
    Nm,
    Mm,
    M,
    S,
    Ms,
    MeV,
    GHz,
    Ohm,
    UOhm,
    /// The module's own natural units (ħ = m = 1, or ħ = 1 for the optics
    /// and Fock-space modules).
    Natural,
}

const TABLE: &[(&str, Unit)] = &[
    ("fm", Unit::Fm),
    ("nm", Unit::Nm),
    ("mm", Unit::Mm),
    ("m", Unit::M),
    ("s", Unit::S),
    ("ms", Unit::Ms),
    ("MeV", Unit::MeV),
    ("GHz", Unit::GHz),
    ("ohm", Unit::Ohm),
    ("uohm", Unit::UOhm),
    ("natural", Unit::Natural),
];

impl Unit {
    pub fn parse(s: &str) -> Option<Unit> {
        TABLE.iter().find(|(name, _)| *name == s).map(|(_, u)| *u)
    }

    pub fn symbol(self) -> &'static str {
        TABLE.iter().find(|(_, u)| *u == self).map(|(n, _)| *n).unwrap_or("?")
    }

    /// Dimension and power of ten relative to the SI base unit (MeV for
    /// energy); `None` for `natural`, which carries no fixed scale.
    pub fn si(self) -> Option<(Dim, i32)> {
        Some(match self {
            Unit::Fm => (Dim::Length, -15),
            Unit::Nm => (Dim::Length, -9),
            Unit::Mm => (Dim::Length, -3),
            Unit::M => (Dim::Length, 0),
            Unit::S => (Dim::Time, 0),
            Unit::Ms => (Dim::Time, -3),
            Unit::MeV => (Dim::Energy, 0),
            Unit::GHz => (Dim::Frequency, 9),
            Unit::Ohm => (Dim::Impedance, 0),
            Unit::UOhm => (Dim::Impedance, -6),
            Unit::Natural => return None,
        })
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Where a quantity ends up inside the numerical core.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Canonical {
    /// Natural units; only `natural` is accepted.
    Natural(Dim),
    /// A concrete unit; any unit of the same dimension converts.
    Unit(Dim, Unit),
}

impl Canonical {
    pub fn dim(self) -> Dim {
        match self {
            Canonical::Natural(d) | Canonical::Unit(d, _) => d,
        }
    }

    pub fn unit(self) -> Unit {
        match self {
            Canonical::Natural(_) => Unit::Natural,
            Canonical::Unit(_, u) => u,
        }
    }

    /// Convert `value` given in `unit`, or `None` when the unit does not fit.
    pub fn convert(self, value: f64, unit: Unit) -> Option<f64> {
        match self {
            Canonical::Natural(_) => (unit == Unit::Natural).then_some(value),
            Canonical::Unit(dim, target) => {
                let (d, from) = unit.si()?;
                let (_, to) = target.si()?;
                // dividing by an exact power of ten keeps 27.57 mm at 0.02757 m
                let shift = from - to;
                (d == dim).then(|| if shift >= 0 { value * 10f64.powi(shift) } else { value / 10f64.powi(-shift) })
            }
        }
    }
}
