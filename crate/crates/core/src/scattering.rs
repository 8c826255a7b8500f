//! Single-laser scattering amplitudes and their exact relation to the
//! transfer matrix.
//!
//! Amplitudes are indexed `(incidence channel, exit channel)`. Left incidence
//! in channel i produces `(r^l)_ij` going back out on the left and `(t^l)_ij`
//! leaving on the right; right incidence mirrors that.

use std::ops::{Index, IndexMut};

use nalgebra::Vector4;
use num_complex::Complex64;

use crate::constants::DENOMINATOR_FLOOR;
use crate::error::{Error, Result};
use crate::physics::ChannelKinematics;
use crate::transfer::{Mat4, TransferMatrix4};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    G,
    E,
}

impl Channel {
    pub fn index(self) -> usize {
        match self {
            Channel::G => 0,
            Channel::E => 1,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Channel::G => 'g',
            Channel::E => 'e',
        }
    }
}

/// 2x2 block of amplitudes indexed by `(in, out)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Block(pub [[Complex64; 2]; 2]);

impl Block {
    pub fn diagonal(value: Complex64) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Block([[value, zero], [zero, value]])
    }

    pub fn iter(&self) -> impl Iterator<Item = &Complex64> {
        self.0.iter().flatten()
    }
}

impl Index<(Channel, Channel)> for Block {
    type Output = Complex64;

    fn index(&self, (i, j): (Channel, Channel)) -> &Complex64 {
        &self.0[i.index()][j.index()]
    }
}

impl IndexMut<(Channel, Channel)> for Block {
    fn index_mut(&mut self, (i, j): (Channel, Channel)) -> &mut Complex64 {
        &mut self.0[i.index()][j.index()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ScatteringSet {
    pub t_l: Block,
    pub t_r: Block,
    pub r_l: Block,
    pub r_r: Block,
}

impl ScatteringSet {
    /// A laser that does nothing: unit diagonal transmission, no reflection.
    pub fn transparent() -> Self {
        Self { t_l: Block::diagonal(1.0.into()), t_r: Block::diagonal(1.0.into()), ..Default::default() }
    }

    pub fn iter(&self) -> impl Iterator<Item = &Complex64> {
        self.t_l.iter().chain(self.t_r.iter()).chain(self.r_l.iter()).chain(self.r_r.iter())
    }

    /// Probability balance for left incidence in `channel`, each outgoing
    /// wave weighted by its wavenumber relative to the incident one.
    pub fn flux_balance(&self, channel: Channel, kin: &ChannelKinematics) -> f64 {
        use Channel::{E, G};
        let w = kin.flux_weight();
        let (wg, we) = match channel {
            G => (1.0, w),
            E => (1.0 / w, 1.0),
        };
        wg * (self.t_l[(channel, G)].norm_sqr() + self.r_l[(channel, G)].norm_sqr())
            + we * (self.t_l[(channel, E)].norm_sqr() + self.r_l[(channel, E)].norm_sqr())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConversionDenominators {
    /// t_ee^l t_gg^l - t_eg^l t_ge^l
    pub f: Complex64,
    /// T13 T31 - T11 T33
    pub big_f: Complex64,
}

pub fn denominator_f(s: &ScatteringSet) -> Complex64 {
    use Channel::{E, G};
    s.t_l[(E, E)] * s.t_l[(G, G)] - s.t_l[(E, G)] * s.t_l[(G, E)]
}

pub fn denominator_big_f(t: &TransferMatrix4) -> Complex64 {
    t.t(1, 3) * t.t(3, 1) - t.t(1, 1) * t.t(3, 3)
}

pub fn denominators(t: &TransferMatrix4, s: &ScatteringSet) -> ConversionDenominators {
    ConversionDenominators { f: denominator_f(s), big_f: denominator_big_f(t) }
}

pub fn amplitudes_from_transfer(tm: &TransferMatrix4) -> Result<ScatteringSet> {
    use Channel::{E, G};
    let f = denominator_big_f(tm);
    if f.norm() < DENOMINATOR_FLOOR {
        return Err(Error::SingularConversion { name: "F", value: f.norm() });
    }
    let t = |i, j| tm.t(i, j);
    let mut s = ScatteringSet::default();

    s.r_l[(G, G)] = -(-t(2, 3) * t(3, 1) + t(2, 1) * t(3, 3)) / f;
    s.r_l[(G, E)] = (-t(3, 3) * t(4, 1) + t(3, 1) * t(4, 3)) / f;
    s.r_l[(E, G)] = -(-t(1, 3) * t(2, 1) + t(1, 1) * t(2, 3)) / f;
    s.r_l[(E, E)] = -(-t(1, 3) * t(4, 1) + t(1, 1) * t(4, 3)) / f;

    s.r_r[(G, G)] = (-t(1, 3) * t(3, 2) + t(1, 2) * t(3, 3)) / f;
    s.r_r[(G, E)] = -(t(1, 2) * t(3, 1) - t(1, 1) * t(3, 2)) / f;
    s.r_r[(E, G)] = (t(1, 4) * t(3, 3) - t(1, 3) * t(3, 4)) / f;
    s.r_r[(E, E)] = -(t(1, 4) * t(3, 1) - t(1, 1) * t(3, 4)) / f;

    s.t_l[(G, G)] = -t(3, 3) / f;
    s.t_l[(G, E)] = t(3, 1) / f;
    s.t_l[(E, G)] = t(1, 3) / f;
    s.t_l[(E, E)] = -t(1, 1) / f;

    s.t_r[(G, G)] = -(-t(1, 3) * t(2, 2) * t(3, 1) + t(1, 2) * t(2, 3) * t(3, 1) + t(1, 3) * t(2, 1) * t(3, 2)
        - t(1, 1) * t(2, 3) * t(3, 2)
        - t(1, 2) * t(2, 1) * t(3, 3)
        + t(1, 1) * t(2, 2) * t(3, 3))
        / f;
    s.t_r[(G, E)] = -(t(1, 3) * t(3, 2) * t(4, 1) - t(1, 2) * t(3, 3) * t(4, 1) - t(1, 3) * t(3, 1) * t(4, 2)
        + t(1, 1) * t(3, 3) * t(4, 2)
        + t(1, 2) * t(3, 1) * t(4, 3)
        - t(1, 1) * t(3, 2) * t(4, 3))
        / f;
    s.t_r[(E, G)] = -(t(1, 4) * t(2, 3) * t(3, 1) - t(1, 3) * t(2, 4) * t(3, 1) - t(1, 4) * t(2, 1) * t(3, 3)
        + t(1, 1) * t(2, 4) * t(3, 3)
        + t(1, 3) * t(2, 1) * t(3, 4)
        - t(1, 1) * t(2, 3) * t(3, 4))
        / f;
    s.t_r[(E, E)] = -(-t(1, 4) * t(3, 3) * t(4, 1) + t(1, 3) * t(3, 4) * t(4, 1) + t(1, 4) * t(3, 1) * t(4, 3)
        - t(1, 1) * t(3, 4) * t(4, 3)
        - t(1, 3) * t(3, 1) * t(4, 4)
        + t(1, 1) * t(3, 3) * t(4, 4))
        / f;
    Ok(s)
}

pub fn transfer_from_amplitudes(s: &ScatteringSet) -> Result<TransferMatrix4> {
    use Channel::{E, G};
    let f = denominator_f(s);
    if f.norm() < DENOMINATOR_FLOOR {
        return Err(Error::SingularConversion { name: "f", value: f.norm() });
    }
    let (tgg, tge, teg, tee) = (s.t_l[(G, G)], s.t_l[(G, E)], s.t_l[(E, G)], s.t_l[(E, E)]);
    let (rgg, rge, reg, ree) = (s.r_l[(G, G)], s.r_l[(G, E)], s.r_l[(E, G)], s.r_l[(E, E)]);
    let (qgg, qge, qeg, qee) = (s.r_r[(G, G)], s.r_r[(G, E)], s.r_r[(E, G)], s.r_r[(E, E)]);

    let m = Mat4::new(
        tee / f,
        (qge * teg - qgg * tee) / f,
        -teg / f,
        (qee * teg - qeg * tee) / f,
        //
        (rgg * tee - reg * tge) / f,
        s.t_r[(G, G)] - (rgg * qgg * tee - rgg * qge * teg - reg * qgg * tge + reg * qge * tgg) / f,
        (reg * tgg - rgg * teg) / f,
        s.t_r[(E, G)] - (rgg * qeg * tee - rgg * qee * teg - reg * qeg * tge + reg * qee * tgg) / f,
        //
        -tge / f,
        (qgg * tge - qge * tgg) / f,
        tgg / f,
        (qeg * tge - qee * tgg) / f,
        //
        (rge * tee - ree * tge) / f,
        s.t_r[(G, E)] - (rge * qgg * tee - rge * qge * teg - ree * qgg * tge + ree * qge * tgg) / f,
        (ree * tgg - rge * teg) / f,
        s.t_r[(E, E)] - (rge * qeg * tee - rge * qee * teg - ree * qeg * tge + ree * qee * tgg) / f,
    );
    Ok(TransferMatrix4::composite(m))
}

/// Largest violation of the four elementary boundary systems
/// (left/right incidence in g/e) by the pair `(t, s)`.
pub fn verify_elementary_systems(tm: &TransferMatrix4, s: &ScatteringSet) -> f64 {
    use Channel::{E, G};
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let systems = [
        (
            Vector4::new(one, s.r_l[(G, G)], zero, s.r_l[(G, E)]),
            Vector4::new(s.t_l[(G, G)], zero, s.t_l[(G, E)], zero),
        ),
        (
            Vector4::new(zero, s.r_l[(E, G)], one, s.r_l[(E, E)]),
            Vector4::new(s.t_l[(E, G)], zero, s.t_l[(E, E)], zero),
        ),
        (
            Vector4::new(zero, s.t_r[(G, G)], zero, s.t_r[(G, E)]),
            Vector4::new(s.r_r[(G, G)], one, s.r_r[(G, E)], zero),
        ),
        (
            Vector4::new(zero, s.t_r[(E, G)], zero, s.t_r[(E, E)]),
            Vector4::new(s.r_r[(E, G)], zero, s.r_r[(E, E)], one),
        ),
    ];
    systems
        .iter()
        .map(|(left, right)| (left - tm.matrix * right).iter().map(|z| z.norm()).fold(0.0, f64::max))
        .fold(0.0, f64::max)
}
