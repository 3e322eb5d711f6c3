//! Candidate pre-screening: rank catalog models likely to match a detected
//! object category before running registration against them.

use serde::{Deserialize, Serialize};

use super::{Catalog, ModelDbError};
use crate::shapes::BasicShape;

/// Request to shortlist catalog candidates for one object category.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScreenRequest {
    pub catalog_name: String,
    pub category: String,
    /// Maximum number of candidates to return.
    pub k: usize,
}

impl ScreenRequest {
    pub fn new(catalog_name: impl Into<String>, category: impl Into<String>) -> Self {
        Self {
            catalog_name: catalog_name.into(),
            category: category.into(),
            k: 5,
        }
    }
}

/// Shortlisted candidate ids, strongest affinity first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScreenResponse {
    pub candidate_ids: Vec<String>,
}

/// Strategy interface for candidate pre-screening. The stub is a pure
/// function of its inputs; remote implementations must be safe for
/// concurrent calls.
pub trait CandidateScreener: Send + Sync {
    fn screen(
        &self,
        catalog: &Catalog,
        request: &ScreenRequest,
    ) -> Result<ScreenResponse, ModelDbError>;
}

/// Validates the request against the catalog and delegates to the screener.
pub fn screen_candidates(
    screener: &dyn CandidateScreener,
    catalog: &Catalog,
    request: &ScreenRequest,
) -> Result<ScreenResponse, ModelDbError> {
    if request.catalog_name != catalog.name {
        return Err(ModelDbError::UnknownCatalog(request.catalog_name.clone()));
    }
    assert!(!request.category.is_empty(), "category must be non-empty");
    assert!(request.k >= 1, "k must be at least 1");
    let mut response = screener.screen(catalog, request)?;
    response.candidate_ids.truncate(request.k);
    Ok(response)
}

/// Deterministic screener: scores each model by category-token overlap plus
/// a fixed category-to-shape affinity table, then ranks descending.
#[derive(Debug, Default, Clone, Copy)]
pub struct StubScreener;

fn tokens(s: &str) -> Vec<String> {
    s.to_ascii_lowercase()
        .split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|t| !t.is_empty() && !t.chars().all(|c| c.is_ascii_digit()))
        .map(str::to_string)
        .collect()
}

/// Shape family a category name suggests.
fn expected_family(category_tokens: &[String]) -> Option<&'static str> {
    for t in category_tokens {
        match t.as_str() {
            "can" | "cup" | "mug" | "jar" | "cylinder" | "tube" | "bottle" | "canister" => {
                return Some("cylinder")
            }
            "ball" | "sphere" | "apple" | "orange" | "orb" => return Some("sphere"),
            "box" | "brick" | "block" | "cube" | "cuboid" | "carton" | "crate" => {
                return Some("box")
            }
            _ => {}
        }
    }
    None
}

fn family_of(shape: &crate::shapes::Shape) -> &'static str {
    match shape.parts[0].shape {
        BasicShape::Box { .. } => "box",
        BasicShape::Cylinder { .. } => "cylinder",
        BasicShape::Sphere { .. } => "sphere",
    }
}

impl CandidateScreener for StubScreener {
    fn screen(
        &self,
        catalog: &Catalog,
        request: &ScreenRequest,
    ) -> Result<ScreenResponse, ModelDbError> {
        let query = tokens(&request.category);
        let family = expected_family(&query);
        let mut scored: Vec<(i64, &str)> = catalog
            .models
            .iter()
            .map(|m| {
                let mut own = tokens(&m.category);
                own.extend(tokens(&m.id));
                let overlap = query.iter().filter(|t| own.contains(t)).count() as i64;
                let shape_bonus = match family {
                    Some(f) if f == family_of(&m.shape) => 1,
                    _ => 0,
                };
                (overlap * 10 + shape_bonus, m.id.as_str())
            })
            .collect();
        scored.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(b.1)));
        Ok(ScreenResponse {
            candidate_ids: scored
                .into_iter()
                .take(request.k)
                .map(|(_, id)| id.to_string())
                .collect(),
        })
    }
}

/// Recovers candidate ids from free-form answer text by matching catalog
/// index prefixes, preserving text order and dropping duplicates.
pub fn parse_screen_answer(text: &str, catalog: &Catalog) -> Result<ScreenResponse, ModelDbError> {
    let bytes = text.as_bytes();
    let mut found: Vec<(usize, &str)> = Vec::new();
    for model in &catalog.models {
        let prefix = model.index_prefix();
        if prefix.is_empty() {
            continue;
        }
        let mut start = 0;
        while let Some(rel) = text[start..].find(prefix) {
            let at = start + rel;
            let end = at + prefix.len();
            let digit_before = at > 0 && bytes[at - 1].is_ascii_digit();
            let digit_after = end < bytes.len() && bytes[end].is_ascii_digit();
            if !digit_before && !digit_after {
                found.push((at, model.id.as_str()));
                break;
            }
            start = end;
        }
    }
    if found.is_empty() {
        return Err(ModelDbError::NoMatches);
    }
    found.sort();
    let mut ids = Vec::new();
    for (_, id) in found {
        if !ids.iter().any(|e| e == id) {
            ids.push(id.to_string());
        }
    }
    Ok(ScreenResponse { candidate_ids: ids })
}

/// Remote screener speaking the JSON wire format of [`ScreenRequest`] /
/// [`ScreenResponse`], configured from the `SCREENER_URL` and `SCREENER_KEY`
/// environment variables. Ids absent from the catalog are dropped.
#[cfg(feature = "live-screener")]
#[derive(Debug, Clone)]
pub struct LiveScreener {
    url: String,
    key: String,
}

#[cfg(feature = "live-screener")]
impl LiveScreener {
    pub fn from_env() -> Result<Self, ModelDbError> {
        let url = std::env::var("SCREENER_URL")
            .map_err(|_| ModelDbError::ScreenerUnavailable("SCREENER_URL not set".into()))?;
        let key = std::env::var("SCREENER_KEY").unwrap_or_default();
        Ok(Self { url, key })
    }
}

#[cfg(feature = "live-screener")]
impl CandidateScreener for LiveScreener {
    fn screen(
        &self,
        catalog: &Catalog,
        request: &ScreenRequest,
    ) -> Result<ScreenResponse, ModelDbError> {
        let client = reqwest::blocking::Client::new();
        let response = client
            .post(&self.url)
            .bearer_auth(&self.key)
            .json(request)
            .send()
            .and_then(reqwest::blocking::Response::error_for_status)
            .map_err(|e| ModelDbError::ScreenerUnavailable(e.to_string()))?;
        let parsed: ScreenResponse = response
            .json()
            .map_err(|e| ModelDbError::ScreenerUnavailable(e.to_string()))?;
        let ids: Vec<String> = parsed
            .candidate_ids
            .into_iter()
            .filter(|id| catalog.get(id).is_some())
            .collect();
        if ids.is_empty() {
            return Err(ModelDbError::NoMatches);
        }
        Ok(ScreenResponse { candidate_ids: ids })
    }
}
