//! Chi-squared comparison of measured reduced elements against theory tables.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dipole::DipoleEstimate;
use crate::angular::HalfInteger;
use crate::error::{Error, Result};
use crate::structure::{reduced_dipole, Model, RydbergState, SpeciesModel};

/// Reduced 5P₃/₂ → nD₅/₂ elements (e·a₀) predicted by one model, keyed by n.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelPrediction {
    pub name: String,
    pub values: BTreeMap<u32, f64>,
}

impl ModelPrediction {
    /// Evaluates `model` for lower → nD₅/₂ at every n.
    pub fn compute(species: &SpeciesModel, model: &Model, lower: &RydbergState, ns: &[u32]) -> Result<Self> {
        let values = ns
            .par_iter()
            .map(|&n| {
                let upper = RydbergState::new(n, 2, HalfInteger::from_twice(5))?;
                Ok((n, reduced_dipole(lower, &upper, species, model)?))
            })
            .collect::<Result<BTreeMap<_, _>>>()?;
        Ok(ModelPrediction { name: model.tag().name().to_string(), values })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelScore {
    pub name: String,
    pub chi2: f64,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelComparison {
    /// In the order the models were supplied.
    pub scores: Vec<ModelScore>,
    /// Model names, best (lowest χ²) first.
    pub ranking: Vec<String>,
}

/// χ²(model) = Σ_n (|μ_n| − |μ_n^model|)²/σ_n² over the measured reduced
/// elements; models ranked ascending.
pub fn chi_squared_compare(measured: &[DipoleEstimate], models: &[ModelPrediction]) -> Result<ModelComparison> {
    let mut scores = Vec::with_capacity(models.len());
    for m in models {
        let mut chi2 = 0.0;
        for est in measured {
            let (Some(value), Some(sigma)) = (est.reduced_au, est.sigma_reduced_au) else {
                return Err(Error::Domain(format!("n = {} has no reduced element to compare", est.n)));
            };
            if !(sigma > 0.0) {
                return Err(Error::Domain(format!("n = {}: non-positive uncertainty {sigma}", est.n)));
            }
            let pred = m
                .values
                .get(&est.n)
                .ok_or_else(|| Error::Lookup(format!("model `{}` has no prediction for n = {}", m.name, est.n)))?;
            chi2 += ((value.abs() - pred.abs()) / sigma).powi(2);
        }
        scores.push(ModelScore { name: m.name.clone(), chi2, points: measured.len() });
    }
    let mut order: Vec<&ModelScore> = scores.iter().collect();
    order.sort_by(|a, b| a.chi2.total_cmp(&b.chi2));
    let ranking = order.into_iter().map(|s| s.name.clone()).collect();
    Ok(ModelComparison { scores, ranking })
}
