//! Experiment specifications and their hashes.

use lineperc_core::observe::{Geometry, Observable};
use lineperc_core::ParamVector;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub params: Vec<f64>,
    pub observable: Observable,
    pub geometry: Geometry,
    pub replicas: u64,
    pub master_seed: u64,
}

/// The hashed part of a spec: everything but the replica count, so that
/// runs over different replica ranges of one experiment can be merged.
#[derive(Serialize)]
struct Hashed<'a> {
    params: &'a [f64],
    observable: Observable,
    geometry: &'a Geometry,
    master_seed: u64,
}

impl ExperimentSpec {
    pub fn new(params: Vec<f64>, observable: Observable, geometry: Geometry, replicas: u64, master_seed: u64) -> Self {
        ExperimentSpec { params, observable, geometry, replicas, master_seed }
    }

    pub fn param_vector(&self) -> lineperc_core::Result<ParamVector> {
        ParamVector::new(self.params.clone())
    }

    pub fn d(&self) -> usize {
        self.params.len()
    }

    pub fn validate(&self) -> lineperc_core::Result<()> {
        let p = self.param_vector()?;
        if self.replicas == 0 {
            return Err(lineperc_core::Error::Params("replicas must be at least 1".into()));
        }
        self.geometry.validate(self.observable, p.d())
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let h = Hashed {
            params: &self.params,
            observable: self.observable,
            geometry: &self.geometry,
            master_seed: self.master_seed,
        };
        let bytes = serde_json::to_vec(&h).expect("spec serializes");
        let digest = Sha256::digest(&bytes);
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn with_params(&self, params: Vec<f64>) -> Self {
        ExperimentSpec { params, ..self.clone() }
    }

    pub fn with_geometry(&self, geometry: Geometry) -> Self {
        ExperimentSpec { geometry, ..self.clone() }
    }
}
