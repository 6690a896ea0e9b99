//! Layered meshes of lossy beam splitters.
//!
//! Every element acts on an ordered mode pair `(i, j)` and carries one loss
//! on each input arm. Standalone single-mode losses may sit between layers;
//! `after_layer = L` places a loss after every element of layer `L` and
//! before layer `L + 1`, and `after_layer = -1` puts it in front of the
//! whole network.

mod builders;
mod extract;
mod json;

use std::cmp::Ordering;

use crate::complexmat::{CMatrix, UnitaryMatrix, C64};
use crate::{Error, Result};

pub use builders::{build_clements, build_random, build_reck, random_angles};
pub use extract::{
    compose_io_losses, extract_losses, extract_losses_heterogeneous, shortest_paths,
    ExtractionResult,
};

/// Two-mode element with a loss on each input arm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeamSplitterElement {
    pub layer: usize,
    /// 0-based ordered pair; the first entry is the `cos` port of the block.
    pub modes: (usize, usize),
    pub theta: f64,
    pub phi: f64,
    /// Arm transmissivities in the order of `modes`.
    pub eta: (f64, f64),
}

impl BeamSplitterElement {
    pub fn new(layer: usize, modes: (usize, usize), theta: f64, phi: f64) -> Self {
        Self { layer, modes, theta, phi, eta: (1.0, 1.0) }
    }

    pub fn with_loss(mut self, eta: (f64, f64)) -> Self {
        self.eta = eta;
        self
    }

    /// `[[e^{i phi} cos theta, -sin theta], [e^{i phi} sin theta, cos theta]]`,
    /// rows indexing outputs and columns inputs.
    pub fn block(&self) -> [[C64; 2]; 2] {
        let phase = C64::from_polar(1.0, self.phi);
        let (s, c) = self.theta.sin_cos();
        [[phase * c, C64::new(-s, 0.0)], [phase * s, C64::new(c, 0.0)]]
    }

    pub fn is_lossless(&self) -> bool {
        self.eta == (1.0, 1.0)
    }

    pub fn touches(&self, mode: usize) -> bool {
        self.modes.0 == mode || self.modes.1 == mode
    }
}

/// Single-mode loss of transmissivity `eta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StandaloneLoss {
    pub after_layer: i64,
    pub mode: usize,
    pub eta: f64,
}

/// One step of a network in time order.
#[derive(Clone, Copy, Debug)]
pub enum Event<'a> {
    Element(&'a BeamSplitterElement),
    Loss(&'a StandaloneLoss),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LossyNetwork {
    modes: usize,
    elements: Vec<BeamSplitterElement>,
    standalone: Vec<StandaloneLoss>,
}

fn check_transmissivity(eta: f64, what: &str) -> Result<()> {
    if eta > 0.0 && eta <= 1.0 {
        Ok(())
    } else {
        Err(Error::MalformedNetwork(format!("{what} transmissivity {eta} outside (0, 1]")))
    }
}

impl LossyNetwork {
    pub fn new(
        modes: usize,
        mut elements: Vec<BeamSplitterElement>,
        mut standalone: Vec<StandaloneLoss>,
    ) -> Result<Self> {
        if modes == 0 {
            return Err(Error::MalformedNetwork("a network needs at least one mode".into()));
        }
        for e in &elements {
            let (i, j) = e.modes;
            if i == j {
                return Err(Error::MalformedNetwork(format!("element on ({}, {})", i + 1, j + 1)));
            }
            for k in [i, j] {
                if k >= modes {
                    return Err(Error::ModeOutOfRange { mode: k + 1, modes });
                }
            }
            if !e.theta.is_finite() || !e.phi.is_finite() {
                return Err(Error::MalformedNetwork("non-finite element angle".into()));
            }
            check_transmissivity(e.eta.0, "arm")?;
            check_transmissivity(e.eta.1, "arm")?;
        }
        elements.sort_by_key(|e| (e.layer, e.modes.0.min(e.modes.1)));
        let mut by_layer: Vec<Vec<bool>> = Vec::new();
        for e in &elements {
            if by_layer.len() <= e.layer {
                by_layer.resize(e.layer + 1, Vec::new());
            }
            let used = &mut by_layer[e.layer];
            used.resize(modes, false);
            for k in [e.modes.0, e.modes.1] {
                if used[k] {
                    return Err(Error::MalformedNetwork(format!(
                        "mode {} appears twice in layer {}",
                        k + 1,
                        e.layer
                    )));
                }
                used[k] = true;
            }
        }
        for l in &standalone {
            if l.mode >= modes {
                return Err(Error::ModeOutOfRange { mode: l.mode + 1, modes });
            }
            if l.after_layer < -1 {
                return Err(Error::MalformedNetwork(format!("after_layer {}", l.after_layer)));
            }
            check_transmissivity(l.eta, "standalone")?;
        }
        standalone.sort_by(|a, b| {
            (a.after_layer, a.mode)
                .cmp(&(b.after_layer, b.mode))
                .then(a.eta.partial_cmp(&b.eta).unwrap_or(Ordering::Equal))
        });
        Ok(Self { modes, elements, standalone })
    }

    /// `modes` wires and nothing else.
    pub fn empty(modes: usize) -> Result<Self> {
        Self::new(modes, Vec::new(), Vec::new())
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn elements(&self) -> &[BeamSplitterElement] {
        &self.elements
    }

    pub fn standalone_losses(&self) -> &[StandaloneLoss] {
        &self.standalone
    }

    /// Number of layers, counting from layer 0 up to the last used one.
    pub fn depth(&self) -> usize {
        self.elements.last().map_or(0, |e| e.layer + 1)
    }

    pub fn is_lossless(&self) -> bool {
        self.elements.iter().all(BeamSplitterElement::is_lossless)
            && self.standalone.iter().all(|l| l.eta == 1.0)
    }

    /// Number of loss elements with transmissivity below one.
    pub fn loss_count(&self) -> usize {
        let arms = self
            .elements
            .iter()
            .map(|e| usize::from(e.eta.0 < 1.0) + usize::from(e.eta.1 < 1.0))
            .sum::<usize>();
        arms + self.standalone.iter().filter(|l| l.eta < 1.0).count()
    }

    /// Elements and standalone losses in time order. A standalone loss with
    /// `after_layer = L` follows every element of layer `L`.
    pub fn schedule(&self) -> Vec<Event<'_>> {
        let mut events: Vec<((i64, u8), Event<'_>)> = self
            .elements
            .iter()
            .map(|e| ((e.layer as i64, 0), Event::Element(e)))
            .chain(self.standalone.iter().map(|l| ((l.after_layer, 1), Event::Loss(l))))
            .collect();
        events.sort_by_key(|(key, _)| *key);
        events.into_iter().map(|(_, e)| e).collect()
    }

    /// Same geometry with every loss removed.
    pub fn without_losses(&self) -> Self {
        Self {
            modes: self.modes,
            elements: self.elements.iter().map(|e| e.with_loss((1.0, 1.0))).collect(),
            standalone: Vec::new(),
        }
    }

    /// Product of the embedded element blocks in time order.
    pub fn compose_unitary(&self) -> Result<UnitaryMatrix> {
        if !self.is_lossless() {
            return Err(Error::LossyNetwork);
        }
        let mut u = CMatrix::identity(self.modes, self.modes);
        for e in &self.elements {
            apply_block(&mut u, e.modes, e.block());
        }
        UnitaryMatrix::new(u)
    }

    /// Unitary on `modes + E` modes in which each of the `E` losses below one
    /// is a beam splitter coupling its mode to a fresh environment mode.
    /// Environment modes follow the system modes, in time order.
    pub fn dilate(&self) -> Result<Dilation> {
        let environment = self.loss_count();
        let total = self.modes + environment;
        let mut u = CMatrix::identity(total, total);
        let mut next_env = self.modes;
        let mut couple = |u: &mut CMatrix, mode: usize, eta: f64| {
            if eta < 1.0 {
                apply_block(u, (mode, next_env), loss_block(eta));
                next_env += 1;
            }
        };
        for event in self.schedule() {
            match event {
                Event::Element(e) => {
                    couple(&mut u, e.modes.0, e.eta.0);
                    couple(&mut u, e.modes.1, e.eta.1);
                    apply_block(&mut u, e.modes, e.block());
                }
                Event::Loss(l) => couple(&mut u, l.mode, l.eta),
            }
        }
        Ok(Dilation { unitary: UnitaryMatrix::new(u)?, system_modes: self.modes, environment })
    }
}

/// A lossy network written as a unitary on system plus environment modes.
#[derive(Clone, Debug)]
pub struct Dilation {
    pub unitary: UnitaryMatrix,
    pub system_modes: usize,
    pub environment: usize,
}

fn loss_block(eta: f64) -> [[C64; 2]; 2] {
    let t = C64::new(eta.sqrt(), 0.0);
    let r = C64::new((1.0 - eta).max(0.0).sqrt(), 0.0);
    [[t, -r], [r, t]]
}

/// Left-multiplies `u` by `block` embedded on `modes`.
fn apply_block(u: &mut CMatrix, modes: (usize, usize), block: [[C64; 2]; 2]) {
    let (i, j) = modes;
    for c in 0..u.ncols() {
        let (a, b) = (u[(i, c)], u[(j, c)]);
        u[(i, c)] = block[0][0] * a + block[0][1] * b;
        u[(j, c)] = block[1][0] * a + block[1][1] * b;
    }
}

/// Per-mode transmissivities, each in `(0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LossVector(Vec<f64>);

impl LossVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("empty loss vector".into()));
        }
        if let Some(bad) = values.iter().find(|&&v| !(v > 0.0 && v <= 1.0)) {
            return Err(Error::InvalidParameter(format!("transmissivity {bad} outside (0, 1]")));
        }
        Ok(Self(values))
    }

    pub fn uniform(modes: usize, eta: f64) -> Result<Self> {
        Self::new(vec![eta; modes])
    }

    pub fn ones(modes: usize) -> Self {
        Self(vec![1.0; modes])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexmat::unitarity_deviation;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn empty_network_composes_to_identity() {
        let net = LossyNetwork::empty(3).unwrap();
        assert_eq!(net.compose_unitary().unwrap(), UnitaryMatrix::identity(3));
        assert_eq!(net.depth(), 0);
    }

    #[test]
    fn balanced_element_gives_the_hadamard_type_block() {
        let e = BeamSplitterElement::new(0, (0, 1), FRAC_PI_4, 0.0);
        let net = LossyNetwork::new(2, vec![e], vec![]).unwrap();
        let u = net.compose_unitary().unwrap();
        let h = UnitaryMatrix::balanced_beam_splitter();
        assert!((u.matrix() - h.matrix()).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn validation_errors() {
        let e = BeamSplitterElement::new(0, (0, 1), 0.3, 0.1);
        assert!(LossyNetwork::new(2, vec![e, e], vec![]).is_err());
        let far = BeamSplitterElement::new(0, (0, 3), 0.3, 0.1);
        let inner = BeamSplitterElement::new(0, (3, 2), 0.3, 0.1);
        assert!(LossyNetwork::new(4, vec![far, inner], vec![]).is_err());
        assert!(matches!(
            LossyNetwork::new(2, vec![BeamSplitterElement::new(0, (0, 2), 0.0, 0.0)], vec![]),
            Err(Error::ModeOutOfRange { mode: 3, modes: 2 })
        ));
        assert!(LossyNetwork::new(2, vec![e.with_loss((0.0, 1.0))], vec![]).is_err());
        assert!(LossyNetwork::new(2, vec![e.with_loss((1.0, 1.2))], vec![]).is_err());
        let l = StandaloneLoss { after_layer: -2, mode: 0, eta: 0.5 };
        assert!(LossyNetwork::new(2, vec![], vec![l]).is_err());
    }

    #[test]
    fn compose_rejects_lossy_networks() {
        let e = BeamSplitterElement::new(0, (0, 1), 0.3, 0.1).with_loss((0.9, 0.9));
        let net = LossyNetwork::new(2, vec![e], vec![]).unwrap();
        assert_eq!(net.compose_unitary(), Err(Error::LossyNetwork));
        assert!(net.without_losses().compose_unitary().is_ok());
    }

    #[test]
    fn schedule_puts_standalone_losses_after_their_layer() {
        let a = BeamSplitterElement::new(0, (0, 1), 0.1, 0.0);
        let b = BeamSplitterElement::new(1, (1, 2), 0.2, 0.0);
        let front = StandaloneLoss { after_layer: -1, mode: 2, eta: 0.5 };
        let mid = StandaloneLoss { after_layer: 0, mode: 1, eta: 0.7 };
        let net = LossyNetwork::new(3, vec![b, a], vec![mid, front]).unwrap();
        let kinds: Vec<String> = net
            .schedule()
            .iter()
            .map(|e| match e {
                Event::Element(e) => format!("bs{}", e.layer),
                Event::Loss(l) => format!("loss{}", l.after_layer),
            })
            .collect();
        assert_eq!(kinds, ["loss-1", "bs0", "loss0", "bs1"]);
    }

    #[test]
    fn dilation_is_unitary_and_sized_per_loss() {
        let a = BeamSplitterElement::new(0, (0, 1), 0.4, 1.0).with_loss((0.8, 0.9));
        let b = BeamSplitterElement::new(1, (1, 2), 1.1, 0.3).with_loss((1.0, 0.7));
        let l = StandaloneLoss { after_layer: 1, mode: 0, eta: 0.6 };
        let net = LossyNetwork::new(3, vec![a, b], vec![l]).unwrap();
        let d = net.dilate().unwrap();
        assert_eq!(d.environment, 4);
        assert_eq!(d.unitary.dim(), 7);
        assert!(unitarity_deviation(d.unitary.matrix()) < 1e-12);
    }

    #[test]
    fn single_mode_loss_dilation_amplitudes() {
        let l = StandaloneLoss { after_layer: -1, mode: 0, eta: 0.3 };
        let net = LossyNetwork::new(1, vec![], vec![l]).unwrap();
        let u = net.dilate().unwrap().unitary;
        assert!((u.matrix()[(0, 0)].norm_sqr() - 0.3).abs() < 1e-15);
        assert!((u.matrix()[(1, 0)].norm_sqr() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn loss_vector_range() {
        assert!(LossVector::new(vec![0.5, 1.0]).is_ok());
        assert!(LossVector::new(vec![0.0]).is_err());
        assert!(LossVector::new(vec![]).is_err());
        assert!(LossVector::uniform(2, 1.5).is_err());
    }
}
