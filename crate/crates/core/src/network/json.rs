//! JSON forms of networks and extraction results. Modes are 1-based and
//! struct fields are declared in alphabetical order, so serialization is
//! canonical.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{BeamSplitterElement, ExtractionResult, LossVector, LossyNetwork, StandaloneLoss};
use crate::{Error, Result};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ElementFile {
    eta: [f64; 2],
    layer: usize,
    modes: [usize; 2],
    phi: f64,
    theta: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LossFile {
    after_layer: i64,
    eta: f64,
    mode: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    elements: Vec<ElementFile>,
    modes: usize,
    #[serde(default)]
    standalone_losses: Vec<LossFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExtractionFile {
    exponents: Option<Vec<usize>>,
    front: Vec<f64>,
    residual: LossyNetwork,
}

fn zero_based(mode: usize) -> Result<usize> {
    mode.checked_sub(1)
        .ok_or_else(|| Error::MalformedNetwork("modes are 1-based".into()))
}

impl From<&LossyNetwork> for NetworkFile {
    fn from(net: &LossyNetwork) -> Self {
        NetworkFile {
            elements: net
                .elements()
                .iter()
                .map(|e| ElementFile {
                    eta: [e.eta.0, e.eta.1],
                    layer: e.layer,
                    modes: [e.modes.0 + 1, e.modes.1 + 1],
                    phi: e.phi,
                    theta: e.theta,
                })
                .collect(),
            modes: net.modes(),
            standalone_losses: net
                .standalone_losses()
                .iter()
                .map(|l| LossFile { after_layer: l.after_layer, eta: l.eta, mode: l.mode + 1 })
                .collect(),
        }
    }
}

impl TryFrom<NetworkFile> for LossyNetwork {
    type Error = Error;

    fn try_from(file: NetworkFile) -> Result<Self> {
        let elements = file
            .elements
            .into_iter()
            .map(|e| {
                let modes = (zero_based(e.modes[0])?, zero_based(e.modes[1])?);
                Ok(BeamSplitterElement::new(e.layer, modes, e.theta, e.phi)
                    .with_loss((e.eta[0], e.eta[1])))
            })
            .collect::<Result<Vec<_>>>()?;
        let losses = file
            .standalone_losses
            .into_iter()
            .map(|l| {
                Ok(StandaloneLoss { after_layer: l.after_layer, mode: zero_based(l.mode)?, eta: l.eta })
            })
            .collect::<Result<Vec<_>>>()?;
        LossyNetwork::new(file.modes, elements, losses)
    }
}

impl Serialize for LossyNetwork {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        NetworkFile::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LossyNetwork {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let file = NetworkFile::deserialize(deserializer)?;
        LossyNetwork::try_from(file).map_err(serde::de::Error::custom)
    }
}

impl Serialize for ExtractionResult {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ExtractionFile {
            exponents: self.exponents.clone(),
            front: self.front.as_slice().to_vec(),
            residual: self.residual.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ExtractionResult {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let file = ExtractionFile::deserialize(deserializer)?;
        if file.front.len() != file.residual.modes() {
            return Err(serde::de::Error::custom("front length differs from residual modes"));
        }
        let front = LossVector::new(file.front).map_err(serde::de::Error::custom)?;
        Ok(ExtractionResult { front, residual: file.residual, exponents: file.exponents, operations: 0 })
    }
}

impl LossyNetwork {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::MalformedNetwork(e.to_string()))
    }
}

impl ExtractionResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("extraction serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::MalformedNetwork(e.to_string()))
    }
}
