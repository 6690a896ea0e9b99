//! Pulling losses from inside a mesh to a per-mode layer at its input.
//!
//! The sweep runs backward over the schedule while tracking, per mode, the
//! transmissivity `mu` already pulled to the front of the suffix. At an
//! element on `(i, j)` the common part `max(mu_i, mu_j)` commutes through the
//! beam splitter (uniform losses on both ports commute with any two-mode
//! unitary), the leftover `min / max` stays behind as a standalone loss on the
//! weaker output, and the arm losses are absorbed in front.

use super::{Event, LossVector, LossyNetwork, StandaloneLoss};
use crate::{Error, Result};

/// Front loss layer, residual network and, for uniform meshes, the exponents
/// `s_i` with `front_i = eta^{s_i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtractionResult {
    pub front: LossVector,
    pub residual: LossyNetwork,
    pub exponents: Option<Vec<usize>>,
    /// Elementary steps spent by the sweep.
    pub operations: u64,
}

impl ExtractionResult {
    /// The residual with the front layer prepended as `after_layer = -1`
    /// standalone losses.
    pub fn as_network(&self) -> Result<LossyNetwork> {
        let mut losses: Vec<StandaloneLoss> = self
            .front
            .as_slice()
            .iter()
            .enumerate()
            .filter(|(_, &eta)| eta < 1.0)
            .map(|(mode, &eta)| StandaloneLoss { after_layer: -1, mode, eta })
            .collect();
        losses.extend_from_slice(self.residual.standalone_losses());
        LossyNetwork::new(self.residual.modes(), self.residual.elements().to_vec(), losses)
    }
}

/// Minimum number of elements crossed from each input to any output.
pub fn shortest_paths(net: &LossyNetwork) -> Vec<usize> {
    let mut e = vec![0usize; net.modes()];
    for element in net.elements().iter().rev() {
        let (i, j) = element.modes;
        let v = e[i].min(e[j]) + 1;
        e[i] = v;
        e[j] = v;
    }
    e
}

trait Transmission: Copy {
    fn one() -> Self;
    fn times(self, other: Self) -> Self;
    /// Whether `self` transmits strictly less than `other`.
    fn weaker(self, other: Self) -> bool;
    /// `self / other` for `self` weaker than `other`.
    fn over(self, other: Self) -> Self;
    fn value(self) -> f64;
}

/// Tie tolerance for floating-point transmissivities.
const TIE: f64 = 1e-12;

impl Transmission for f64 {
    fn one() -> Self {
        1.0
    }
    fn times(self, other: Self) -> Self {
        self * other
    }
    fn weaker(self, other: Self) -> bool {
        self < other * (1.0 - TIE)
    }
    fn over(self, other: Self) -> Self {
        self / other
    }
    fn value(self) -> f64 {
        self
    }
}

/// `eta^k`, kept as the exponent so uniform meshes extract exactly.
#[derive(Clone, Copy, Debug)]
struct Power {
    eta: f64,
    k: usize,
}

impl Transmission for Power {
    fn one() -> Self {
        Power { eta: 1.0, k: 0 }
    }
    fn times(self, other: Self) -> Self {
        let eta = if self.k > 0 { self.eta } else { other.eta };
        Power { eta, k: self.k + other.k }
    }
    fn weaker(self, other: Self) -> bool {
        self.k > other.k
    }
    fn over(self, other: Self) -> Self {
        Power { eta: self.eta, k: self.k - other.k }
    }
    fn value(self) -> f64 {
        self.eta.powi(self.k as i32)
    }
}

struct Sweep<T> {
    front: Vec<T>,
    residual: Vec<StandaloneLoss>,
    operations: u64,
}

fn sweep<T: Transmission>(
    net: &LossyNetwork,
    arm: impl Fn(f64) -> T,
    standalone: impl Fn(f64) -> T,
) -> Sweep<T> {
    let mut mu = vec![T::one(); net.modes()];
    let mut residual = Vec::new();
    let mut operations = 0u64;
    for event in net.schedule().into_iter().rev() {
        operations += 1;
        match event {
            Event::Loss(l) => mu[l.mode] = mu[l.mode].times(standalone(l.eta)),
            Event::Element(e) => {
                let (i, j) = e.modes;
                let (common, weak) = if mu[i].weaker(mu[j]) {
                    (mu[j], Some(i))
                } else if mu[j].weaker(mu[i]) {
                    (mu[i], Some(j))
                } else {
                    (mu[i], None)
                };
                if let Some(w) = weak {
                    residual.push(StandaloneLoss {
                        after_layer: e.layer as i64,
                        mode: w,
                        eta: mu[w].over(common).value(),
                    });
                }
                mu[i] = arm(e.eta.0).times(common);
                mu[j] = arm(e.eta.1).times(common);
            }
        }
    }
    Sweep { front: mu, residual, operations }
}

fn residual_network(net: &LossyNetwork, losses: Vec<StandaloneLoss>) -> Result<LossyNetwork> {
    let lossless = net.without_losses();
    LossyNetwork::new(net.modes(), lossless.elements().to_vec(), losses)
}

/// Common arm transmissivity when every arm carries the same value and there
/// are no standalone losses.
fn uniform_eta(net: &LossyNetwork) -> Option<f64> {
    if net.standalone_losses().iter().any(|l| l.eta < 1.0) {
        return None;
    }
    let mut arms = net.elements().iter().flat_map(|e| [e.eta.0, e.eta.1]);
    let first = arms.next().unwrap_or(1.0);
    arms.all(|x| x == first).then_some(first)
}

/// Extracts the front loss layer. Uniform meshes are handled in exponent
/// form and report `exponents`; anything else goes through
/// [`extract_losses_heterogeneous`].
pub fn extract_losses(net: &LossyNetwork) -> Result<ExtractionResult> {
    let Some(eta) = uniform_eta(net) else {
        return extract_losses_heterogeneous(net);
    };
    let as_power = |x: f64| if x < 1.0 { Power { eta, k: 1 } } else { Power::one() };
    let Sweep { front, residual, operations } = sweep(net, as_power, as_power);
    let exponents: Vec<usize> = if eta < 1.0 {
        front.iter().map(|p| p.k).collect()
    } else {
        shortest_paths(net)
    };
    Ok(ExtractionResult {
        front: LossVector::new(front.iter().map(|p| p.value()).collect())?,
        residual: residual_network(net, residual)?,
        exponents: Some(exponents),
        operations,
    })
}

/// Extraction with arbitrary per-arm and standalone transmissivities:
/// `front_i` is the largest product of transmissivities along any path
/// from input `i`, and the residual keeps a lossless path from every input.
pub fn extract_losses_heterogeneous(net: &LossyNetwork) -> Result<ExtractionResult> {
    let Sweep { front, residual, operations } = sweep(net, |x| x, |x| x);
    Ok(ExtractionResult {
        front: LossVector::new(front)?,
        residual: residual_network(net, residual)?,
        exponents: None,
        operations,
    })
}

/// Folds state-preparation losses into the front layer and read-out losses
/// into trailing standalone losses of the residual.
pub fn compose_io_losses(
    result: &ExtractionResult,
    input: &LossVector,
    output: &LossVector,
) -> Result<ExtractionResult> {
    let m = result.residual.modes();
    if input.len() != m || output.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "loss vectors of length {} and {} for a {m}-mode network",
            input.len(),
            output.len()
        )));
    }
    let front = result
        .front
        .as_slice()
        .iter()
        .zip(input.as_slice())
        .map(|(a, b)| a * b)
        .collect();
    let after_layer = result.residual.depth() as i64 - 1;
    let mut losses = result.residual.standalone_losses().to_vec();
    losses.extend(
        output
            .as_slice()
            .iter()
            .enumerate()
            .filter(|(_, &eta)| eta < 1.0)
            .map(|(mode, &eta)| StandaloneLoss { after_layer, mode, eta }),
    );
    Ok(ExtractionResult {
        front: LossVector::new(front)?,
        residual: LossyNetwork::new(m, result.residual.elements().to_vec(), losses)?,
        exponents: None,
        operations: result.operations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{build_clements, build_reck, BeamSplitterElement};

    fn element(layer: usize, modes: (usize, usize), eta: (f64, f64)) -> BeamSplitterElement {
        BeamSplitterElement::new(layer, modes, 0.7, 0.2).with_loss(eta)
    }

    #[test]
    fn shortest_paths_small_cases() {
        assert_eq!(shortest_paths(&LossyNetwork::empty(3).unwrap()), vec![0, 0, 0]);
        let one = LossyNetwork::new(2, vec![element(0, (0, 1), (1.0, 1.0))], vec![]).unwrap();
        assert_eq!(shortest_paths(&one), vec![1, 1]);
    }

    #[test]
    fn single_element_moves_its_loss_to_the_front() {
        let net = LossyNetwork::new(2, vec![element(0, (0, 1), (0.7, 0.7))], vec![]).unwrap();
        let r = extract_losses(&net).unwrap();
        assert_eq!(r.front.as_slice(), &[0.7, 0.7]);
        assert!(r.residual.is_lossless());
        assert_eq!(r.exponents, Some(vec![1, 1]));
    }

    #[test]
    fn chain_leaves_one_residual_loss_on_mode_two() {
        let eta = 0.6;
        let net = LossyNetwork::new(
            3,
            vec![element(0, (0, 1), (eta, eta)), element(1, (1, 2), (eta, eta))],
            vec![],
        )
        .unwrap();
        let r = extract_losses(&net).unwrap();
        assert_eq!(r.front.as_slice(), &[eta, eta, eta]);
        assert_eq!(
            r.residual.standalone_losses(),
            &[StandaloneLoss { after_layer: 0, mode: 1, eta }]
        );
        assert!(r.residual.elements().iter().all(|e| e.is_lossless()));
    }

    #[test]
    fn unequal_arms_on_a_single_element() {
        let net = LossyNetwork::new(2, vec![element(0, (0, 1), (0.9, 0.8))], vec![]).unwrap();
        let r = extract_losses(&net).unwrap();
        assert_eq!(r.front.as_slice(), &[0.9, 0.8]);
        assert!(r.residual.is_lossless());
        assert_eq!(r.exponents, None);
    }

    #[test]
    fn uniform_exponents_match_shortest_paths() {
        for m in 2..=8 {
            for net in [build_reck(m, 0.9, 5).unwrap(), build_clements(m, 0.9, 5).unwrap()] {
                let r = extract_losses(&net).unwrap();
                let s = shortest_paths(&net);
                assert_eq!(r.exponents.as_ref().unwrap(), &s);
                for (f, &k) in r.front.as_slice().iter().zip(&s) {
                    assert_eq!(*f, 0.9f64.powi(k as i32));
                }
            }
        }
    }

    #[test]
    fn reck_exponents_grow_from_the_bottom() {
        for m in 2..=8 {
            let s = shortest_paths(&build_reck(m, 0.9, 0).unwrap());
            let expected: Vec<usize> = (1..=m).map(|i| i.min(m - 1)).collect();
            assert_eq!(s, expected);
        }
    }

    #[test]
    fn sweep_is_linear_in_the_schedule() {
        let net = build_reck(8, 0.9, 0).unwrap();
        let r = extract_losses(&net).unwrap();
        assert_eq!(r.operations, net.elements().len() as u64);
    }

    #[test]
    fn io_losses_multiply_the_front() {
        let net = build_reck(3, 0.9, 2).unwrap();
        let r = extract_losses(&net).unwrap();
        let same = compose_io_losses(&r, &LossVector::ones(3), &LossVector::ones(3)).unwrap();
        assert_eq!(same.front, r.front);
        assert_eq!(same.residual, r.residual);

        let input = LossVector::new(vec![0.9, 1.0, 1.0]).unwrap();
        let output = LossVector::new(vec![1.0, 0.5, 1.0]).unwrap();
        let both = compose_io_losses(&r, &input, &output).unwrap();
        assert_eq!(both.front.as_slice()[0], 0.9 * r.front.as_slice()[0]);
        let last = *both.residual.standalone_losses().last().unwrap();
        assert_eq!(last, StandaloneLoss { after_layer: 2, mode: 1, eta: 0.5 });
        assert!(compose_io_losses(&r, &LossVector::ones(2), &output).is_err());
    }

    #[test]
    fn as_network_prepends_the_front() {
        let net = LossyNetwork::new(2, vec![element(0, (0, 1), (0.5, 1.0))], vec![]).unwrap();
        let r = extract_losses(&net).unwrap();
        let full = r.as_network().unwrap();
        assert_eq!(
            full.standalone_losses(),
            &[StandaloneLoss { after_layer: -1, mode: 0, eta: 0.5 }]
        );
    }
}
