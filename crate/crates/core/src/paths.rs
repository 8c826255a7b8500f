//! Expansion of the excited-state transmission amplitude into paths through
//! the three lasers, ordered by the number of reflections.
//!
//! Each path is a list of single-laser factors. The four direct paths carry no
//! reflection; every `B` path carries exactly two. `B1..B22` are the classic
//! two-reflection paths for a state-flipping second laser; `B23` and `B24`
//! complete that set (reflection at the third laser in the excited state
//! followed by an `e -> g` reflection at the right face of the second laser).

use std::fmt::{self, Write as _};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::physics::Setup;
use crate::scattering::{amplitudes_from_transfer, Channel, ScatteringSet};
use crate::transfer::{laser_matrices, TransferMatrix4};

use Channel::{E, G};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Transmission,
    Reflection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// One single-laser amplitude inside a path product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Factor {
    /// 1-based laser index.
    pub laser: u8,
    pub kind: Kind,
    pub side: Side,
    pub from: Channel,
    pub to: Channel,
}

impl Factor {
    pub fn value(&self, sets: &[ScatteringSet; 3]) -> Complex64 {
        let s = &sets[usize::from(self.laser) - 1];
        let block = match (self.kind, self.side) {
            (Kind::Transmission, Side::Left) => &s.t_l,
            (Kind::Transmission, Side::Right) => &s.t_r,
            (Kind::Reflection, Side::Left) => &s.r_l,
            (Kind::Reflection, Side::Right) => &s.r_r,
        };
        block[(self.from, self.to)]
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            Kind::Transmission => 't',
            Kind::Reflection => 'r',
        };
        let side = match self.side {
            Side::Left => 'l',
            Side::Right => 'r',
        };
        write!(f, "({kind}{})^{side}_{}{}", self.laser, self.from.symbol(), self.to.symbol())
    }
}

const fn fac(laser: u8, kind: Kind, side: Side, from: Channel, to: Channel) -> Factor {
    Factor { laser, kind, side, from, to }
}

const fn tl(laser: u8, from: Channel, to: Channel) -> Factor {
    fac(laser, Kind::Transmission, Side::Left, from, to)
}
const fn tr(laser: u8, from: Channel, to: Channel) -> Factor {
    fac(laser, Kind::Transmission, Side::Right, from, to)
}
const fn rl(laser: u8, from: Channel, to: Channel) -> Factor {
    fac(laser, Kind::Reflection, Side::Left, from, to)
}
const fn rr(laser: u8, from: Channel, to: Channel) -> Factor {
    fac(laser, Kind::Reflection, Side::Right, from, to)
}

pub static DIRECT_PATHS: [[Factor; 3]; 4] = [
    [tl(1, G, E), tl(2, E, E), tl(3, E, E)],
    [tl(1, G, E), tl(2, E, G), tl(3, G, E)],
    [tl(1, G, G), tl(2, G, E), tl(3, E, E)],
    [tl(1, G, G), tl(2, G, G), tl(3, G, E)],
];

/// Number of two-reflection paths in the classic table; the remainder of
/// [`REFLECTION_PATHS`] completes the set.
pub const CLASSIC_REFLECTION_PATHS: usize = 22;

pub static REFLECTION_PATHS: [&[Factor]; 24] = [
    &[tl(1, G, G), rl(2, G, G), rr(1, G, G), tl(2, G, E), tl(3, E, E)],
    &[tl(1, G, G), rl(2, G, G), rr(1, G, E), tl(2, E, G), tl(3, G, E)],
    &[tl(1, G, G), tl(2, G, E), rl(3, E, G), rr(2, G, G), tl(3, G, E)],
    &[tl(1, G, E), tl(2, E, G), rl(3, G, G), rr(2, G, G), tl(3, G, E)],
    &[tl(1, G, G), rl(2, G, E), rr(1, E, G), tl(2, G, E), tl(3, E, E)],
    &[tl(1, G, G), rl(2, G, E), rr(1, E, E), tl(2, E, G), tl(3, G, E)],
    &[tl(1, G, G), tl(2, G, E), rl(3, E, G), rr(2, G, E), tl(3, E, E)],
    &[tl(1, G, E), tl(2, E, G), rl(3, G, G), rr(2, G, E), tl(3, E, E)],
    &[tl(1, G, E), rl(2, E, G), rr(1, G, G), tl(2, G, E), tl(3, E, E)],
    &[tl(1, G, E), rl(2, E, G), rr(1, G, E), tl(2, E, G), tl(3, G, E)],
    &[tl(1, G, G), tl(2, G, E), rl(3, E, E), rr(2, E, E), tl(3, E, E)],
    &[tl(1, G, G), tl(2, G, E), rl(3, E, E), tr(2, E, G), rr(1, G, G), tl(2, G, E), tl(3, E, E)],
    &[tl(1, G, G), tl(2, G, E), rl(3, E, G), tr(2, G, E), rr(1, E, G), tl(2, G, E), tl(3, E, E)],
    &[tl(1, G, G), tl(2, G, E), rl(3, E, E), tr(2, E, G), rr(1, G, E), tl(2, E, G), tl(3, G, E)],
    &[tl(1, G, G), tl(2, G, E), rl(3, E, G), tr(2, G, E), rr(1, E, E), tl(2, E, G), tl(3, G, E)],
    &[tl(1, G, E), tl(2, E, G), rl(3, G, E), rr(2, E, E), tl(3, E, E)],
    &[tl(1, G, E), rl(2, E, E), rr(1, E, G), tl(2, G, E), tl(3, E, E)],
    &[tl(1, G, E), tl(2, E, G), rl(3, G, E), tr(2, E, G), rr(1, G, G), tl(2, G, E), tl(3, E, E)],
    &[tl(1, G, E), tl(2, E, G), rl(3, G, G), tr(2, G, E), rr(1, E, G), tl(2, G, E), tl(3, E, E)],
    &[tl(1, G, E), rl(2, E, E), rr(1, E, E), tl(2, E, G), tl(3, G, E)],
    &[tl(1, G, E), tl(2, E, G), rl(3, G, E), tr(2, E, G), rr(1, G, E), tl(2, E, G), tl(3, G, E)],
    &[tl(1, G, E), tl(2, E, G), rl(3, G, G), tr(2, G, E), rr(1, E, E), tl(2, E, G), tl(3, G, E)],
    // completion of the two-reflection set
    &[tl(1, G, G), tl(2, G, E), rl(3, E, E), rr(2, E, G), tl(3, G, E)],
    &[tl(1, G, E), tl(2, E, G), rl(3, G, E), rr(2, E, G), tl(3, G, E)],
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PathLabel {
    /// Direct path, 1..=4.
    A(u8),
    /// Two-reflection path, 1..=24.
    B(u8),
}

impl PathLabel {
    pub fn factors(self) -> &'static [Factor] {
        match self {
            PathLabel::A(n) => &DIRECT_PATHS[usize::from(n) - 1],
            PathLabel::B(n) => REFLECTION_PATHS[usize::from(n) - 1],
        }
    }

    /// Order in the small-amplitude bookkeeping: 0 for A2, A3; 1 for A1, A4;
    /// 2 for every reflection path.
    pub fn eta_order(self) -> u8 {
        match self {
            PathLabel::A(2) | PathLabel::A(3) => 0,
            PathLabel::A(_) => 1,
            PathLabel::B(_) => 2,
        }
    }

    pub fn reflections(self) -> usize {
        self.factors().iter().filter(|f| f.kind == Kind::Reflection).count()
    }

    /// Coefficients (c1, c2, c3) such that the amplitude equals
    /// e^{-i(c1 phi1 + c2 phi2 + c3 phi3)} times its phase-free value.
    pub fn phase_law(self) -> Option<[i8; 3]> {
        match self {
            PathLabel::A(1) => Some([1, 0, 0]),
            PathLabel::A(2) | PathLabel::B(2) | PathLabel::B(4) => Some([1, -1, 1]),
            PathLabel::A(3) | PathLabel::B(1) | PathLabel::B(3) => Some([0, 1, 0]),
            PathLabel::A(4) => Some([0, 0, 1]),
            _ => None,
        }
    }
}

impl fmt::Display for PathLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathLabel::A(n) => write!(f, "A{n}"),
            PathLabel::B(n) => write!(f, "B{n}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathAmplitude {
    pub label: PathLabel,
    pub value: Complex64,
}

impl PathAmplitude {
    pub fn evaluate(label: PathLabel, sets: &[ScatteringSet; 3]) -> Self {
        let value = label.factors().iter().map(|f| f.value(sets)).product();
        Self { label, value }
    }
}

pub fn direct_amplitudes(s1: &ScatteringSet, s2: &ScatteringSet, s3: &ScatteringSet) -> [PathAmplitude; 4] {
    let sets = [*s1, *s2, *s3];
    [1u8, 2, 3, 4].map(|n| PathAmplitude::evaluate(PathLabel::A(n), &sets))
}

pub fn reflection_amplitudes(s1: &ScatteringSet, s2: &ScatteringSet, s3: &ScatteringSet) -> Vec<PathAmplitude> {
    let sets = [*s1, *s2, *s3];
    (1..=REFLECTION_PATHS.len() as u8).map(|n| PathAmplitude::evaluate(PathLabel::B(n), &sets)).collect()
}

/// Unit-modulus factor carrying the laser-phase dependence of `label`.
pub fn phase_law_factor(label: PathLabel, phases: [f64; 3]) -> Result<Complex64> {
    let law = label.phase_law().ok_or_else(|| Error::UnknownPhaseLaw(label.to_string()))?;
    let arg: f64 = law.iter().zip(phases).map(|(&c, p)| f64::from(c) * p).sum();
    Ok(Complex64::from_polar(1.0, -arg))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathDecomposition {
    pub direct: [PathAmplitude; 4],
    pub reflected: Vec<PathAmplitude>,
    pub sets: [ScatteringSet; 3],
    /// Laser phases the single-laser sets were built with.
    pub phases: [f64; 3],
}

impl PathDecomposition {
    pub fn from_sets(sets: [ScatteringSet; 3], phases: [f64; 3]) -> Self {
        let [s1, s2, s3] = &sets;
        Self { direct: direct_amplitudes(s1, s2, s3), reflected: reflection_amplitudes(s1, s2, s3), sets, phases }
    }

    pub fn from_matrices(lasers: &[TransferMatrix4; 3], phases: [f64; 3]) -> Result<Self> {
        let sets = [
            amplitudes_from_transfer(&lasers[0])?,
            amplitudes_from_transfer(&lasers[1])?,
            amplitudes_from_transfer(&lasers[2])?,
        ];
        Ok(Self::from_sets(sets, phases))
    }

    /// Decomposition at the setup's own laser phases.
    pub fn from_setup(setup: &Setup) -> Result<Self> {
        let kin = setup.kinematics()?;
        let lasers = laser_matrices(&setup.geometry, &setup.drive()?, &kin)?;
        Self::from_matrices(&lasers, setup.phases)
    }

    /// Decomposition with every laser phase set to zero (the tilde amplitudes).
    pub fn phase_free(setup: &Setup) -> Result<Self> {
        Self::from_setup(&setup.with_phases([0.0; 3]))
    }

    pub fn a(&self, n: u8) -> Complex64 {
        self.direct[usize::from(n) - 1].value
    }

    pub fn b(&self, n: u8) -> Complex64 {
        self.reflected[usize::from(n) - 1].value
    }

    pub fn amplitudes(&self) -> impl Iterator<Item = &PathAmplitude> {
        self.direct.iter().chain(self.reflected.iter())
    }

    /// Amplitude of `label` re-phased from `self.phases` to `phases`.
    fn rephased(&self, label: PathLabel, value: Complex64, phases: [f64; 3]) -> Complex64 {
        let shift = [phases[0] - self.phases[0], phases[1] - self.phases[1], phases[2] - self.phases[2]];
        value * phase_law_factor(label, shift).expect("Mach-Zehnder paths have phase laws")
    }

    /// Ã2 + B̃2 + B̃4 and Ã3 + B̃1 + B̃3 at the decomposition's phases.
    pub fn mz_arms(&self) -> (Complex64, Complex64) {
        (self.a(2) + self.b(2) + self.b(4), self.a(3) + self.b(1) + self.b(3))
    }
}

/// A2 + A3 + B1 + B2 + B3 + B4 evaluated at `phases`.
pub fn mz_transmission(dec: &PathDecomposition, phases: [f64; 3]) -> Complex64 {
    let labels = [PathLabel::A(2), PathLabel::A(3), PathLabel::B(1), PathLabel::B(2), PathLabel::B(3), PathLabel::B(4)];
    labels
        .iter()
        .map(|&label| {
            let value = match label {
                PathLabel::A(n) => dec.a(n),
                PathLabel::B(n) => dec.b(n),
            };
            dec.rephased(label, value, phases)
        })
        .sum()
}

/// A2 + A3 evaluated at `phases`.
pub fn direct_transmission(dec: &PathDecomposition, phases: [f64; 3]) -> Complex64 {
    dec.rephased(PathLabel::A(2), dec.a(2), phases) + dec.rephased(PathLabel::A(3), dec.a(3), phases)
}

/// Sum of every tabulated path at the decomposition's own phases.
pub fn full_path_sum(dec: &PathDecomposition) -> Complex64 {
    dec.amplitudes().map(|p| p.value).sum()
}

/// Like [`full_path_sum`] but restricted to the classic 22 reflection paths.
pub fn classic_path_sum(dec: &PathDecomposition) -> Complex64 {
    dec.direct.iter().map(|p| p.value).sum::<Complex64>()
        + dec.reflected[..CLASSIC_REFLECTION_PATHS].iter().map(|p| p.value).sum::<Complex64>()
}

/// Audit dump of the path table, one path per line:
///
/// ```text
/// <label> <eta order> <reflections> = <factor> <factor> ...
/// ```
///
/// with factors written `(t2)^l_ge` meaning laser 2, left incidence, g -> e.
pub fn format_path_table() -> String {
    let mut out = String::from("# label eta_order reflections = factors\n");
    let labels = (1..=4u8).map(PathLabel::A).chain((1..=REFLECTION_PATHS.len() as u8).map(PathLabel::B));
    for label in labels {
        let factors: Vec<String> = label.factors().iter().map(ToString::to_string).collect();
        let _ = writeln!(out, "{label} {} {} = {}", label.eta_order(), label.reflections(), factors.join(" "));
    }
    out
}
