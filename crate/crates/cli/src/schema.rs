//! Accepted keys per scenario kind, with units, ranges and defaults.

use std::collections::BTreeMap;

use crate::scenario::Param;
use crate::units::{Canonical, Dim, Unit};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Tdse,
    Poles,
    Gamow,
    Friedrichs,
    Coherent,
    Qnm,
    Crosscheck,
}

impl Kind {
    pub const ALL: [Kind; 7] =
        [Kind::Tdse, Kind::Poles, Kind::Gamow, Kind::Friedrichs, Kind::Coherent, Kind::Qnm, Kind::Crosscheck];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Tdse => "tdse",
            Kind::Poles => "poles",
            Kind::Gamow => "gamow",
            Kind::Friedrichs => "friedrichs",
            Kind::Coherent => "coherent",
            Kind::Qnm => "qnm",
            Kind::Crosscheck => "crosscheck",
        }
    }

    pub fn parse(s: &str) -> Option<Kind> {
        Kind::ALL.into_iter().find(|k| k.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Number(f64),
    Count(u64),
    Text(String),
}

#[derive(Debug, Clone, Copy)]
pub enum SpecKind {
    /// Non-negative integer, no unit.
    Count,
    /// Dimensionless real, no unit.
    Real,
    Quantity(Canonical),
    Choice(&'static [&'static str]),
    Path,
}

impl SpecKind {
    pub fn describe(&self) -> String {
        match self {
            SpecKind::Count => "count".into(),
            SpecKind::Real => "dimensionless number".into(),
            SpecKind::Quantity(c) => format!("{} in {}", c.dim(), c.unit()),
            SpecKind::Choice(o) => format!("one of {}", o.join(", ")),
            SpecKind::Path => "path".into(),
        }
    }

    /// Unit label for the canonical value.
    pub fn unit_label(&self) -> &'static str {
        match self {
            SpecKind::Quantity(c) => c.unit().symbol(),
            _ => "",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Range {
    Any,
    Positive,
    NonNegative,
    /// Closed interval.
    Within(f64, f64),
    /// Open at the bottom, closed at the top.
    Above(f64, f64),
}

impl Range {
    pub fn check(&self, v: &ParamValue) -> Result<(), String> {
        let x = match v {
            ParamValue::Number(x) => *x,
            ParamValue::Count(n) => *n as f64,
            ParamValue::Text(_) => return Ok(()),
        };
        let ok = match *self {
            Range::Any => true,
            Range::Positive => x > 0.0,
            Range::NonNegative => x >= 0.0,
            Range::Within(a, b) => x >= a && x <= b,
            Range::Above(a, b) => x > a && x <= b,
        };
        if ok {
            return Ok(());
        }
        Err(match *self {
            Range::Any => unreachable!(),
            Range::Positive => "must be positive".into(),
            Range::NonNegative => "must not be negative".into(),
            Range::Within(a, b) => format!("must lie in [{a}, {b}]"),
            Range::Above(a, b) => format!("must lie in ({a}, {b}]"),
        })
    }
}

pub struct Context<'a> {
    pub params: &'a BTreeMap<String, Param>,
}

impl Context<'_> {
    pub fn number(&self, key: &str) -> f64 {
        match self.params.get(key).map(|p| &p.value) {
            Some(ParamValue::Number(x)) => *x,
            Some(ParamValue::Count(n)) => *n as f64,
            _ => f64::NAN,
        }
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        match self.params.get(key).map(|p| &p.value) {
            Some(ParamValue::Text(s)) => Some(s),
            _ => None,
        }
    }
}

#[derive(Clone, Copy)]
pub enum Fallback {
    Required,
    /// May be absent; the runner treats absence as "off".
    Optional,
    Number(f64),
    Count(u64),
    Text(&'static str),
    Computed(fn(&Context) -> ParamValue),
}

#[derive(Clone, Copy)]
pub struct Spec {
    pub key: &'static str,
    pub kind: SpecKind,
    pub default: Fallback,
    pub range: Range,
    /// Only accepted when another key takes one of the listed values.
    pub when: Option<(&'static str, &'static [&'static str])>,
}

impl Spec {
    pub fn applies(&self, ctx: &Context) -> bool {
        match self.when {
            None => true,
            Some((key, values)) => ctx.text(key).is_some_and(|v| values.contains(&v)),
        }
    }

    pub fn condition_text(&self) -> String {
        match self.when {
            None => String::new(),
            Some((key, values)) => format!("unless {key} is {}", values.join(" or ")),
        }
    }
}

const fn spec(key: &'static str, kind: SpecKind, default: Fallback, range: Range) -> Spec {
    Spec { key, kind, default, range, when: None }
}

const fn only(mut s: Spec, key: &'static str, values: &'static [&'static str]) -> Spec {
    s.when = Some((key, values));
    s
}

const fn nat(d: Dim) -> SpecKind {
    SpecKind::Quantity(Canonical::Natural(d))
}

const fn si(d: Dim, u: Unit) -> SpecKind {
    SpecKind::Quantity(Canonical::Unit(d, u))
}

use Fallback as D;
use Dim::*;
use Range as R;
use SpecKind as K;

fn common(kind: Kind) -> Vec<Spec> {
    let _ = kind;
    vec![
        spec("output_dir", K::Path, D::Optional, R::Any),
        spec("seed", K::Count, D::Count(0), R::Any),
    ]
}

fn barrier(required: bool) -> Vec<Spec> {
    let d = |v| if required { D::Required } else { D::Number(v) };
    vec![
        spec("potential.V0", nat(Energy), d(10.0), R::Positive),
        spec("potential.l", nat(Length), d(1.0), R::Positive),
        spec("potential.w", nat(Length), d(0.5), R::Positive),
    ]
}

fn dynamics() -> Vec<Spec> {
    vec![
        spec("grid.half_width", nat(Length), D::Number(10.5), R::Positive),
        spec("grid.dx", nat(Length), D::Number(0.05), R::Positive),
        spec("pml.thickness", nat(Length), D::Number(6.0), R::Positive),
        spec("pml.exponent", K::Count, D::Count(2), R::Within(2.0, 3.0)),
        spec("pml.reference_k", nat(Wavenumber), D::Number(1.3), R::Positive),
        spec("pml.attenuation", K::Real, D::Number(1e-5), R::Above(0.0, 1.0)),
        spec("packet.x0", nat(Length), D::Number(0.0), R::Any),
        spec("packet.sigma", nat(Length), D::Number(0.35), R::Positive),
        spec("run.t_end", nat(Time), D::Number(400.0), R::Positive),
        spec("run.sample_every", nat(Time), D::Number(1.0), R::Positive),
        spec("run.fit_blocks", K::Count, D::Count(8), R::Within(3.0, 1000.0)),
    ]
}

fn search() -> Vec<Spec> {
    vec![
        spec("search.k_re_min", nat(Wavenumber), D::Number(0.3), R::Positive),
        spec("search.k_re_max", nat(Wavenumber), D::Number(5.0), R::Positive),
        spec("search.k_im_min", nat(Wavenumber), D::Number(-1.0), R::Any),
        spec("search.k_im_max", nat(Wavenumber), D::Number(0.0), R::Within(f64::MIN, 0.0)),
    ]
}

const SHAPES: &[&str] = &["double_barrier", "free"];
const COUPLINGS: &[&str] = &["constant", "lorentzian"];
const MASS_KINDS: &[&str] = &["massless", "massive"];
const STATES: &[&str] = &["coherent", "fock"];
const CONVENTIONS: &[&str] = &["energy", "angular"];

fn band(ctx: &Context) -> ParamValue {
    let g = ctx.number("system.gamma");
    let w0 = ctx.number("system.omega0");
    ParamValue::Number((50.0 * g).max(0.5 * w0))
}

pub fn specs(kind: Kind) -> Vec<Spec> {
    let mut v = common(kind);
    match kind {
        Kind::Tdse => {
            v.push(spec("potential.shape", K::Choice(SHAPES), D::Text("double_barrier"), R::Any));
            v.extend(barrier(true).into_iter().map(|s| only(s, "potential.shape", &["double_barrier"])));
            v.extend(dynamics());
            v.push(spec("packet.k_mean", nat(Wavenumber), D::Required, R::Positive));
        }
        Kind::Crosscheck => {
            v.extend(barrier(true));
            v.extend(dynamics());
            v.push(spec("packet.k_mean", nat(Wavenumber), D::Required, R::Positive));
            v.extend(search());
            v.push(spec("check.tolerance", K::Real, D::Number(0.05), R::Above(0.0, 1.0)));
        }
        Kind::Poles => {
            v.extend(barrier(true));
            v.extend(search());
        }
        Kind::Gamow => {
            v.extend([
                spec("nucleus.E_alpha", si(Energy, Unit::MeV), D::Required, R::Positive),
                spec("nucleus.Z_daughter", K::Real, D::Required, R::Positive),
                spec("nucleus.A_daughter", K::Real, D::Required, R::Positive),
                spec("nucleus.r0", si(Length, Unit::Fm), D::Number(1.2), R::Positive),
                spec("nucleus.p_alpha", K::Real, D::Number(1.0), R::Above(0.0, 1.0)),
                spec("scan.E_min", si(Energy, Unit::MeV), D::Number(4.0), R::Positive),
                spec("scan.E_max", si(Energy, Unit::MeV), D::Number(9.0), R::Positive),
                spec("scan.points", K::Count, D::Count(26), R::Within(3.0, 100_000.0)),
                spec("staircase.steps", K::Count, D::Count(64), R::Within(0.0, 4096.0)),
            ]);
        }
        Kind::Friedrichs => {
            v.extend([
                spec("system.omega0", nat(Frequency), D::Number(1.0), R::Positive),
                spec("system.gamma", nat(Frequency), D::Required, R::Positive),
                spec("system.mass_kind", K::Choice(MASS_KINDS), D::Text("massless"), R::Any),
                spec("system.speed", nat(Velocity), D::Number(1.0), R::Positive),
                only(spec("system.k0", nat(Wavenumber), D::Number(1.0), R::Positive), "system.mass_kind", &["massive"]),
                spec("coupling.shape", K::Choice(COUPLINGS), D::Text("constant"), R::Any),
                only(spec("coupling.width", nat(Frequency), D::Number(0.5), R::Positive), "coupling.shape", &["lorentzian"]),
                spec("mesh.half_width", nat(Frequency), D::Computed(band), R::Positive),
                spec(
                    "mesh.points",
                    K::Count,
                    D::Computed(|c| {
                        let n = (40.0 * c.number("mesh.half_width") / c.number("system.gamma")).ceil() as u64;
                        ParamValue::Count(n | 1)
                    }),
                    R::Within(3.0, 2e6),
                ),
                spec("run.t_end", nat(Time), D::Computed(|c| ParamValue::Number(5.0 / c.number("system.gamma"))), R::Positive),
                spec(
                    "run.dt",
                    nat(Time),
                    D::Computed(|c| {
                        let scale = c.number("mesh.half_width").max(c.number("system.gamma"));
                        ParamValue::Number(0.01 / scale)
                    }),
                    R::Positive,
                ),
                spec("run.record_every", K::Count, D::Count(10), R::Within(1.0, 1e9)),
                spec("run.snapshots", K::Count, D::Count(6), R::Within(2.0, 1000.0)),
            ]);
        }
        Kind::Coherent => {
            v.extend([
                spec("mode.omega", nat(Frequency), D::Number(1.0), R::Positive),
                spec("mode.gamma", nat(Frequency), D::Number(0.1), R::Positive),
                spec("state.kind", K::Choice(STATES), D::Text("coherent"), R::Any),
                only(spec("state.xi_re", K::Real, D::Number(1.2), R::Any), "state.kind", &["coherent"]),
                only(spec("state.xi_im", K::Real, D::Number(0.0), R::Any), "state.kind", &["coherent"]),
                only(spec("state.n", K::Count, D::Count(1), R::Within(0.0, 200.0)), "state.kind", &["fock"]),
                spec("space.n_max", K::Count, D::Count(24), R::Within(2.0, 200.0)),
                spec("run.t_end", nat(Time), D::Computed(|c| ParamValue::Number(2.0 / c.number("mode.gamma"))), R::Positive),
                spec("run.samples", K::Count, D::Count(41), R::Within(2.0, 100_000.0)),
            ]);
        }
        Kind::Qnm => {
            v.extend([
                spec("cavity.L", si(Length, Unit::M), D::Number(27.57e-3), R::Positive),
                spec("cavity.r_x", si(Length, Unit::M), D::Number(39.4e-3), R::Positive),
                spec("cavity.r_y", si(Length, Unit::M), D::Number(40.6e-3), R::Positive),
                spec("cavity.diameter", si(Length, Unit::M), D::Number(50e-3), R::Positive),
                spec("cavity.q", K::Count, D::Count(8), R::Within(0.0, 100_000.0)),
                spec("reference.f", si(Frequency, Unit::GHz), D::Number(51.085), R::Positive),
                spec("fp.L", si(Length, Unit::M), D::Number(27.562e-3), R::Positive),
                spec("fp.n_min", K::Count, D::Count(1), R::Within(1.0, 1e6)),
                spec("fp.n_max", K::Count, D::Count(12), R::Within(1.0, 1e6)),
                spec("mirror.X_s", si(Impedance, Unit::Ohm), D::Number(1e-6), R::NonNegative),
                spec("mirror.Y_s", si(Impedance, Unit::Ohm), D::Number(0.0), R::Any),
                spec("mirror.london_depth", si(Length, Unit::M), D::Optional, R::Positive),
                spec("report.lifetime", K::Choice(CONVENTIONS), D::Text("energy"), R::Any),
                spec("slab.eps", K::Real, D::Number(100.0), R::Within(1.0, 1e6)),
                spec("slab.half_width", si(Length, Unit::M), D::Number(0.5), R::Positive),
                spec("slab.domain_half_width", si(Length, Unit::M), D::Number(1.25), R::Positive),
                spec("slab.pml_thickness", si(Length, Unit::M), D::Number(0.5), R::Positive),
                spec("slab.pml_strength", K::Real, D::Number(200.0), R::Positive),
                spec("slab.pml_exponent", K::Count, D::Count(2), R::Within(2.0, 3.0)),
                spec("slab.n_points", K::Count, D::Count(249), R::Within(0.0, 4000.0)),
                spec("slab.stretch_change", K::Real, D::Number(0.3), R::Above(0.0, 0.9)),
            ]);
        }
    }
    v
}

/// Relations between keys that single-key ranges cannot express. Returns
/// the key to blame and the reason.
pub fn cross_checks(kind: Kind, p: &BTreeMap<String, Param>) -> Result<(), (&'static str, String)> {
    let ctx = Context { params: p };
    let n = |k: &str| ctx.number(k);
    match kind {
        Kind::Tdse | Kind::Crosscheck => {
            if n("grid.dx") >= n("grid.half_width") {
                return Err(("grid.dx", "must be smaller than grid.half_width".into()));
            }
            if n("run.sample_every") > n("run.t_end") {
                return Err(("run.sample_every", "must not exceed run.t_end".into()));
            }
            let outer = if ctx.text("potential.shape") == Some("free") { 0.0 } else { n("potential.l") + n("potential.w") };
            if n("pml.thickness") + outer >= n("grid.half_width") {
                return Err(("pml.thickness", "absorbing layer overlaps the barrier region".into()));
            }
        }
        _ => {}
    }
    match kind {
        Kind::Poles | Kind::Crosscheck => {
            if n("search.k_re_min") >= n("search.k_re_max") {
                return Err(("search.k_re_min", "must be below search.k_re_max".into()));
            }
            if n("search.k_im_min") >= n("search.k_im_max") {
                return Err(("search.k_im_min", "must be below search.k_im_max".into()));
            }
        }
        Kind::Gamow if n("scan.E_min") >= n("scan.E_max") => {
            return Err(("scan.E_min", "must be below scan.E_max".into()));
        }
        Kind::Qnm => {
            if n("fp.n_min") > n("fp.n_max") {
                return Err(("fp.n_min", "must not exceed fp.n_max".into()));
            }
            if n("slab.half_width") >= n("slab.domain_half_width") {
                return Err(("slab.half_width", "must be inside slab.domain_half_width".into()));
            }
            if n("slab.pml_thickness") >= n("slab.domain_half_width") - n("slab.half_width") {
                return Err(("slab.pml_thickness", "absorbing layer overlaps the slab".into()));
            }
        }
        Kind::Friedrichs if n("mesh.half_width") <= n("system.gamma") => {
            return Err(("mesh.half_width", "band must be wider than system.gamma".into()));
        }
        _ => {}
    }
    Ok(())
}
