use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{BeamSplitterElement, LossyNetwork};
use crate::{Error, Result};

/// `(theta, phi)` with `sin^2 theta` and `phi / 2 pi` uniform on `[0, 1)`,
/// the distribution of a Haar-random 2x2 block up to output phases.
pub fn random_angles<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    let u: f64 = rng.random();
    let v: f64 = rng.random();
    (u.sqrt().asin(), std::f64::consts::TAU * v)
}

fn check_size(modes: usize, eta: f64) -> Result<()> {
    if modes < 2 {
        return Err(Error::InvalidParameter(format!("a mesh needs at least 2 modes, got {modes}")));
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidParameter(format!("transmissivity {eta} outside (0, 1]")));
    }
    Ok(())
}

/// Places elements in the given time order, each in the earliest layer after
/// the last element touching either of its modes.
fn layered<R: Rng + ?Sized>(
    modes: usize,
    eta: f64,
    pairs: impl IntoIterator<Item = (usize, usize)>,
    rng: &mut R,
) -> Result<LossyNetwork> {
    let mut next_free = vec![0usize; modes];
    let mut elements = Vec::new();
    for (i, j) in pairs {
        let layer = next_free[i].max(next_free[j]);
        next_free[i] = layer + 1;
        next_free[j] = layer + 1;
        let (theta, phi) = random_angles(rng);
        elements.push(BeamSplitterElement::new(layer, (i, j), theta, phi).with_loss((eta, eta)));
    }
    LossyNetwork::new(modes, elements, Vec::new())
}

/// Triangular mesh of `m(m-1)/2` elements. Diagonal `d` sweeps from the top
/// pair `(m-1, m)` down to `(m-d, m-d+1)` (1-based), so input mode 1 meets a
/// single element while the path lengths grow with the input index.
pub fn build_reck(modes: usize, eta: f64, seed: u64) -> Result<LossyNetwork> {
    check_size(modes, eta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = (1..modes).flat_map(move |d| (modes - d..modes).rev().map(|j| (j - 1, j)));
    layered(modes, eta, pairs, &mut rng)
}

/// Rectangular mesh: `m` layers alternately pairing `(1,2), (3,4), ...` and
/// `(2,3), (4,5), ...`, for `m(m-1)/2` elements.
pub fn build_clements(modes: usize, eta: f64, seed: u64) -> Result<LossyNetwork> {
    check_size(modes, eta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut elements = Vec::new();
    for layer in 0..modes {
        for i in (layer % 2..modes - 1).step_by(2) {
            let (theta, phi) = random_angles(&mut rng);
            elements.push(BeamSplitterElement::new(layer, (i, i + 1), theta, phi).with_loss((eta, eta)));
        }
    }
    LossyNetwork::new(modes, elements, Vec::new())
}

/// `elements` elements on random distinct mode pairs, each placed in the
/// earliest free layer. Every arm is lossless with probability 1/4 and
/// otherwise transmits a uniform value in `[eta_min, 1)`.
pub fn build_random(modes: usize, elements: usize, eta_min: f64, seed: u64) -> Result<LossyNetwork> {
    check_size(modes, eta_min)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut next_free = vec![0usize; modes];
    let mut out = Vec::with_capacity(elements);
    for _ in 0..elements {
        let i = rng.random_range(0..modes);
        let j = (i + rng.random_range(1..modes)) % modes;
        let layer = next_free[i].max(next_free[j]);
        next_free[i] = layer + 1;
        next_free[j] = layer + 1;
        let (theta, phi) = random_angles(&mut rng);
        let mut arm = || {
            if rng.random_bool(0.25) {
                1.0
            } else {
                rng.random_range(eta_min..1.0)
            }
        };
        let eta = (arm(), arm());
        out.push(BeamSplitterElement::new(layer, (i, j), theta, phi).with_loss(eta));
    }
    LossyNetwork::new(modes, out, Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexmat::unitarity_deviation;

    #[test]
    fn reck_sizes() {
        let two = build_reck(2, 0.9, 1).unwrap();
        assert_eq!(two.elements().len(), 1);
        assert_eq!(two.elements()[0].modes, (0, 1));
        for m in 2..=8 {
            assert_eq!(build_reck(m, 0.9, 1).unwrap().elements().len(), m * (m - 1) / 2);
        }
        assert!(build_reck(1, 0.9, 1).is_err());
    }

    #[test]
    fn reck_diagonals_start_at_the_top() {
        let net = build_reck(3, 1.0, 0).unwrap();
        let order: Vec<(usize, (usize, usize))> =
            net.elements().iter().map(|e| (e.layer, e.modes)).collect();
        assert_eq!(order, [(0, (1, 2)), (1, (1, 2)), (2, (0, 1))]);
    }

    #[test]
    fn clements_four_modes() {
        let net = build_clements(4, 0.9, 3).unwrap();
        let order: Vec<(usize, (usize, usize))> =
            net.elements().iter().map(|e| (e.layer, e.modes)).collect();
        assert_eq!(
            order,
            [(0, (0, 1)), (0, (2, 3)), (1, (1, 2)), (2, (0, 1)), (2, (2, 3)), (3, (1, 2))]
        );
        for m in 2..=9 {
            assert_eq!(build_clements(m, 0.9, 1).unwrap().elements().len(), m * (m - 1) / 2);
        }
    }

    #[test]
    fn lossless_meshes_are_unitary() {
        for m in 2..=8 {
            for net in [build_reck(m, 1.0, 11).unwrap(), build_clements(m, 1.0, 11).unwrap()] {
                let u = net.compose_unitary().unwrap();
                assert!(unitarity_deviation(u.matrix()) < 1e-10);
            }
        }
    }

    #[test]
    fn random_networks_are_valid() {
        for seed in 0..50 {
            let net = build_random(4, 4, 0.5, seed).unwrap();
            assert_eq!(net.elements().len(), 4);
            assert!(net.elements().iter().all(|e| e.eta.0 >= 0.5 && e.eta.1 >= 0.5));
        }
    }

    #[test]
    fn seeds_are_reproducible() {
        assert_eq!(build_reck(5, 0.8, 42).unwrap(), build_reck(5, 0.8, 42).unwrap());
        assert_ne!(build_reck(5, 0.8, 42).unwrap(), build_reck(5, 0.8, 43).unwrap());
    }
}
