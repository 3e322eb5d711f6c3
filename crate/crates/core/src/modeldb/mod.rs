//! Reference-model database with pre-planned antipodal grasps, plus the
//! candidate pre-screening interface used before registration.

mod antipodal;
mod screen;

pub use antipodal::preplan_grasps;
pub use screen::{
    parse_screen_answer, screen_candidates, CandidateScreener, ScreenRequest, ScreenResponse,
    StubScreener,
};
#[cfg(feature = "live-screener")]
pub use screen::LiveScreener;

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::PointCloud;
use crate::grasp::{GraspCandidate, GripperSpec};
use crate::shapes::Shape;

#[derive(Debug, Error)]
pub enum ModelDbError {
    #[error("not enough antipodal geometry to pre-plan the requested grasp count")]
    InsufficientGeometry,
    #[error("unknown catalog `{0}`")]
    UnknownCatalog(String),
    #[error("screener unavailable: {0}")]
    ScreenerUnavailable(String),
    #[error("no catalog index found in the answer text")]
    NoMatches,
    #[error("duplicate model id `{0}`")]
    DuplicateModelId(String),
    #[error("catalog has no models")]
    EmptyCatalog,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Number of surface samples generated per model.
pub const MODEL_SURFACE_POINTS: usize = 2000;
/// Minimum pre-planned grasps per model.
pub const MODEL_GRASP_COUNT: usize = 120;

/// One database entry: a known object surface plus its pre-planned grasps.
#[derive(Debug, Clone)]
pub struct ReferenceModel {
    /// Index-prefixed id, e.g. `003_can_tall`.
    pub id: String,
    pub category: String,
    pub surface_cloud: PointCloud,
    pub grasps: Vec<GraspCandidate>,
    /// Generator shape; clouds and grasps are rebuilt from it on load.
    pub shape: Shape,
    pub seed: u64,
}

impl ReferenceModel {
    /// Builds a model from its generator shape, deterministically per seed.
    pub fn generate(
        id: impl Into<String>,
        category: impl Into<String>,
        shape: Shape,
        seed: u64,
        gripper: &GripperSpec,
    ) -> Result<Self, ModelDbError> {
        let surface_cloud = shape.sample_surface(MODEL_SURFACE_POINTS, seed);
        let grasps = preplan_grasps(&surface_cloud, gripper, MODEL_GRASP_COUNT, seed ^ 0x9e37)?;
        Ok(Self {
            id: id.into(),
            category: category.into(),
            surface_cloud,
            grasps,
            shape,
            seed,
        })
    }

    /// Leading digit prefix of the id ("003" for `003_can_tall`).
    pub fn index_prefix(&self) -> &str {
        let end = self
            .id
            .find(|c: char| !c.is_ascii_digit())
            .unwrap_or(self.id.len());
        &self.id[..end]
    }
}

/// Named collection of reference models with unique ids.
#[derive(Debug, Clone)]
pub struct Catalog {
    pub name: String,
    pub models: Vec<ReferenceModel>,
}

impl Catalog {
    pub fn new(name: impl Into<String>, models: Vec<ReferenceModel>) -> Result<Self, ModelDbError> {
        if models.is_empty() {
            return Err(ModelDbError::EmptyCatalog);
        }
        let mut seen = BTreeSet::new();
        for m in &models {
            if !seen.insert(m.id.clone()) {
                return Err(ModelDbError::DuplicateModelId(m.id.clone()));
            }
        }
        Ok(Self {
            name: name.into(),
            models,
        })
    }

    pub fn get(&self, id: &str) -> Option<&ReferenceModel> {
        self.models.iter().find(|m| m.id == id)
    }

    pub fn ids(&self) -> Vec<String> {
        self.models.iter().map(|m| m.id.clone()).collect()
    }

    /// Built-in procedural catalog: boxes, cylinders, a sphere and two
    /// composite shapes, all graspable by the default gripper.
    pub fn builtin(gripper: &GripperSpec) -> Self {
        use crate::shapes::BasicShape;
        let entries: Vec<(&str, &str, Shape)> = vec![
            ("001_box_cube", "box", Shape::cuboid(0.06, 0.06, 0.06)),
            ("002_box_bar", "brick", Shape::cuboid(0.10, 0.05, 0.05)),
            ("003_can_tall", "can", Shape::cylinder(0.033, 0.10)),
            ("004_cup_short", "cup", Shape::cylinder(0.040, 0.06)),
            ("005_ball", "ball", Shape::sphere(0.035)),
            (
                "006_bottle",
                "bottle",
                Shape::cylinder(0.030, 0.075).stacked(BasicShape::Cylinder {
                    radius: 0.015,
                    height: 0.035,
                }),
            ),
            (
                "007_block_step",
                "block",
                Shape::cuboid(0.08, 0.05, 0.04).stacked(BasicShape::Box {
                    size: nalgebra::Vector3::new(0.05, 0.05, 0.04),
                }),
            ),
        ];
        let models = entries
            .into_iter()
            .enumerate()
            .map(|(i, (id, category, shape))| {
                ReferenceModel::generate(id, category, shape, 1000 + i as u64, gripper)
                    .expect("builtin shapes have ample antipodal geometry")
            })
            .collect();
        Catalog::new("primitives", models).expect("builtin ids are unique")
    }

    /// Writes one JSON descriptor per model into `dir`. Clouds and grasps are
    /// not stored; they are regenerated on load.
    pub fn save_dir(&self, dir: &Path) -> Result<(), ModelDbError> {
        std::fs::create_dir_all(dir)?;
        for m in &self.models {
            let desc = ModelDescriptor {
                id: m.id.clone(),
                category: m.category.clone(),
                shape: m.shape.clone(),
                seed: m.seed,
            };
            let path = dir.join(format!("{}.json", m.id));
            std::fs::write(path, serde_json::to_string_pretty(&desc)?)?;
        }
        let meta = dir.join("catalog.json");
        std::fs::write(
            meta,
            serde_json::to_string_pretty(&serde_json::json!({ "name": self.name }))?,
        )?;
        Ok(())
    }

    /// Loads a catalog directory written by [`Catalog::save_dir`],
    /// regenerating clouds and grasps deterministically.
    pub fn load_dir(dir: &Path, gripper: &GripperSpec) -> Result<Self, ModelDbError> {
        let meta: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.join("catalog.json"))?)?;
        let name = meta["name"].as_str().unwrap_or("catalog").to_string();
        let mut models = Vec::new();
        let mut paths: Vec<_> = std::fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.extension().is_some_and(|e| e == "json")
                    && p.file_name().is_some_and(|n| n != "catalog.json")
            })
            .collect();
        paths.sort();
        for path in paths {
            let desc: ModelDescriptor = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            models.push(ReferenceModel::generate(
                desc.id,
                desc.category,
                desc.shape,
                desc.seed,
                gripper,
            )?);
        }
        Catalog::new(name, models)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelDescriptor {
    id: String,
    category: String,
    shape: Shape,
    seed: u64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_catalog_meets_grasp_budget() {
        let gripper = GripperSpec::default();
        let catalog = Catalog::builtin(&gripper);
        assert!(catalog.models.len() >= 5);
        for m in &catalog.models {
            assert!(m.grasps.len() >= 100, "{} has {}", m.id, m.grasps.len());
            assert!(m.surface_cloud.len() >= 2000);
            for g in &m.grasps {
                assert!(g.width <= gripper.max_opening + 1e-9);
            }
        }
    }

    #[test]
    fn save_load_roundtrip_regenerates_identically() {
        let gripper = GripperSpec::default();
        let catalog = Catalog::builtin(&gripper);
        let dir = tempfile::tempdir().unwrap();
        catalog.save_dir(dir.path()).unwrap();
        let loaded = Catalog::load_dir(dir.path(), &gripper).unwrap();
        assert_eq!(loaded.name, catalog.name);
        assert_eq!(loaded.models.len(), catalog.models.len());
        for (a, b) in catalog.models.iter().zip(&loaded.models) {
            assert_eq!(a.id, b.id);
            assert_eq!(a.surface_cloud, b.surface_cloud);
            // Bitwise equality of the serialized grasp lists.
            assert_eq!(
                serde_json::to_string(&a.grasps).unwrap(),
                serde_json::to_string(&b.grasps).unwrap()
            );
        }
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let gripper = GripperSpec::default();
        let m = ReferenceModel::generate("001_a", "box", Shape::cuboid(0.05, 0.05, 0.05), 1, &gripper)
            .unwrap();
        let err = Catalog::new("c", vec![m.clone(), m]).unwrap_err();
        assert!(matches!(err, ModelDbError::DuplicateModelId(_)));
    }
}
