//! End-to-end offline protocol: split the log in time, pick service users,
//! build each model from the training window, and score its top-K lists
//! against test-window ground truth shared by all models.

use alloc::vec::Vec;

use crate::contact_log::{
    aggregate_dyads, select_service_users, split_by_day, ContactEvent, DyadRecord, ServiceUserSet,
    UserTable,
};
use crate::evaluation::{
    aggregate_city, aggregate_individual, ground_truth, precision_recall_at_k, CityMetrics,
    GroundTruth, IndividualMetrics, PerUserTable, RcDefinition, DEFAULT_KS,
};
use crate::matrices::{self, compute_degrees, ContactData, DegreeMap, ModelKind};
use crate::recommender::{
    self, PartnerIndex, RecommendationList, RecommenderConfig, DEFAULT_PENALTY,
};
use crate::similarity::{similarity_for, SimilarityMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub split_day: u32,
    pub service_threshold: u32,
    pub models: Vec<ModelKind>,
    pub penalty: f64,
    pub ks: Vec<usize>,
    pub k_star: usize,
    pub rc_definition: RcDefinition,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            split_day: 98,
            service_threshold: 5,
            models: ModelKind::ALL.to_vec(),
            penalty: DEFAULT_PENALTY,
            ks: DEFAULT_KS.to_vec(),
            k_star: 100,
            rc_definition: RcDefinition::AnyInitiator,
        }
    }
}

impl ExperimentConfig {
    pub fn max_k(&self) -> usize {
        self.ks.iter().copied().max().unwrap_or(1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ks.is_empty() || self.ks.contains(&0) {
            return Err(Error::InvalidParameter(
                "K values must be positive and non-empty",
            ));
        }
        if !self.ks.contains(&self.k_star) {
            return Err(Error::InvalidParameter(
                "K* must be one of the evaluated K values",
            ));
        }
        if self.models.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one model must be selected",
            ));
        }
        RecommenderConfig::new(ModelKind::Hybrid, self.penalty, 1)?;
        Ok(())
    }
}

/// Everything derived from the log that does not depend on the model.
#[derive(Debug, Clone)]
pub struct Prepared<'a> {
    pub users: &'a UserTable,
    pub train: Vec<ContactEvent>,
    pub test: Vec<ContactEvent>,
    pub train_dyads: Vec<DyadRecord>,
    pub service: ServiceUserSet,
    pub partners: PartnerIndex,
    pub degrees: DegreeMap,
    pub truth: GroundTruth,
}

pub fn prepare<'a>(
    users: &'a UserTable,
    events: &[ContactEvent],
    config: &ExperimentConfig,
) -> Result<Prepared<'a>> {
    config.validate()?;
    let (train, test) = split_by_day(events, config.split_day)?;
    let service = select_service_users(&train, &test, users, config.service_threshold)?;
    if service.is_empty() {
        return Err(Error::NoServiceUsers {
            threshold: config.service_threshold,
        });
    }
    let train_dyads = aggregate_dyads(&train);
    let partners = PartnerIndex::new(&train_dyads, users.len());
    let degrees = compute_degrees(&train_dyads, users);
    let truth = ground_truth(&test, &train_dyads, &service, users, config.rc_definition);
    Ok(Prepared {
        users,
        train,
        test,
        train_dyads,
        service,
        partners,
        degrees,
        truth,
    })
}

/// A model's contact data and similarity, reusable across penalties.
#[derive(Debug, Clone)]
pub struct FittedModel {
    pub contacts: ContactData,
    pub similarity: SimilarityMatrix,
}

pub fn fit(prep: &Prepared<'_>, kind: ModelKind) -> Result<FittedModel> {
    let contacts = matrices::build(kind, &prep.train_dyads, &prep.service, prep.users)?;
    let similarity = similarity_for(&contacts, prep.users.len(), &prep.service, &prep.degrees);
    Ok(FittedModel {
        contacts,
        similarity,
    })
}

#[derive(Debug, Clone)]
pub struct ModelRun {
    pub kind: ModelKind,
    pub penalty: f64,
    pub recommendations: RecommendationList,
    pub table: PerUserTable,
    pub city: Vec<CityMetrics>,
    pub individual: Vec<IndividualMetrics>,
}

pub fn evaluate(
    prep: &Prepared<'_>,
    fitted: &FittedModel,
    penalty: f64,
    ks: &[usize],
) -> Result<ModelRun> {
    let kind = fitted.contacts.kind();
    let max_k = ks.iter().copied().max().unwrap_or(1);
    let rc = RecommenderConfig::new(kind, penalty, max_k)?;
    let recommendations = recommender::recommend(
        &fitted.similarity,
        &fitted.contacts,
        &rc,
        &prep.service,
        prep.users,
        &prep.partners,
    )?;
    let table = precision_recall_at_k(&recommendations, &prep.truth, &prep.service, ks)?;
    Ok(ModelRun {
        kind,
        penalty,
        city: aggregate_city(&table),
        individual: aggregate_individual(&table),
        recommendations,
        table,
    })
}

/// Runs every configured model once.
pub fn run(prep: &Prepared<'_>, config: &ExperimentConfig) -> Result<Vec<ModelRun>> {
    config
        .models
        .iter()
        .map(|&kind| evaluate(prep, &fit(prep, kind)?, config.penalty, &config.ks))
        .collect()
}

/// Runs the hybrid model once per penalty, sharing one similarity matrix.
pub fn sweep(prep: &Prepared<'_>, penalties: &[f64], ks: &[usize]) -> Result<Vec<ModelRun>> {
    if penalties.is_empty() {
        return Err(Error::InvalidParameter("penalty grid is empty"));
    }
    let fitted = fit(prep, ModelKind::Hybrid)?;
    penalties
        .iter()
        .map(|&s| evaluate(prep, &fitted, s, ks))
        .collect()
}
