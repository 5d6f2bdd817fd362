//! Knowledge base mapping feature classes to environment types.
//!
//! The ontology is the five-part structure the rest of the engine queries:
//! concepts (environment types and feature classes), relations (feature to
//! environment superclass edges carrying a semantic-proximity weight),
//! attributes (per-class static/dynamic default), instances (named
//! individuals, optional) and axioms (validated once at load time).
//!
//! It is loaded from a JSON file, validated, and immutable afterwards, so it
//! can be shared read-only across any number of concurrent readers.
//!
//! ## File format
//!
//! ```json
//! {
//!   "environments": ["Commercial", "NonUrban"],
//!   "feature_classes": [
//!     {
//!       "name": "tree",
//!       "static": true,
//!       "superclasses": [{ "env": "NonUrban", "sp": 0.9 }],
//!       "similarity_group": "vegetation"
//!     }
//!   ]
//! }
//! ```
//!
//! Unknown keys anywhere in the file are rejected. `similarity_group` is
//! optional; classes sharing a group are semantically similar to each other.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

/// Distinguished environment label for unexplored or unclassifiable area.
pub const UNKNOWN_ENV: &str = "Unknown";

#[derive(Debug, thiserror::Error)]
pub enum OntologyError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("axiom violation: {0}")]
    Axiom(String),
    #[error("unknown concept: {0}")]
    UnknownConcept(String),
}

/// Semantic-proximity edge linking a feature class to an environment type.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuperclassEdge {
    pub env: String,
    /// Semantic proximity weight in [0, 1].
    pub sp: f64,
}

/// A feature class declaration as it appears in the ontology file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureClassDecl {
    pub name: String,
    /// Default static/dynamic attribute for instances of this class.
    #[serde(rename = "static")]
    pub is_static: bool,
    pub superclasses: Vec<SuperclassEdge>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub similarity_group: Option<String>,
}

/// Named individual bound to a feature class (optional section).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDecl {
    pub name: String,
    pub class: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OntologyFile {
    environments: Vec<String>,
    feature_classes: Vec<FeatureClassDecl>,
    #[serde(default)]
    instances: Vec<InstanceDecl>,
}

#[derive(Debug, Clone)]
struct FeatureClass {
    is_static: bool,
    /// Environment name -> semantic proximity, ordered for determinism.
    superclasses: BTreeMap<String, f64>,
    similarity_group: Option<String>,
}

/// Immutable, validated knowledge base.
#[derive(Debug, Clone)]
pub struct Ontology {
    environments: Vec<String>,
    classes: BTreeMap<String, FeatureClass>,
    instances: Vec<InstanceDecl>,
}

impl Ontology {
    /// Load and validate an ontology file.
    pub fn load(path: impl AsRef<Path>) -> Result<Ontology, OntologyError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    /// Parse and validate ontology JSON.
    pub fn from_json(text: &str) -> Result<Ontology, OntologyError> {
        let file: OntologyFile = serde_json::from_str(text)?;
        Self::from_decls(file.environments, file.feature_classes, file.instances)
    }

    /// Build from in-memory declarations, running the same axiom checks as
    /// the file loader.
    pub fn from_decls(
        environments: Vec<String>,
        feature_classes: Vec<FeatureClassDecl>,
        instances: Vec<InstanceDecl>,
    ) -> Result<Ontology, OntologyError> {
        let mut env_set = BTreeSet::new();
        for e in &environments {
            if e == UNKNOWN_ENV {
                return Err(OntologyError::Axiom(format!(
                    "environment list must not declare the reserved label {UNKNOWN_ENV}"
                )));
            }
            if !env_set.insert(e.clone()) {
                return Err(OntologyError::Axiom(format!("duplicate environment: {e}")));
            }
        }
        if environments.is_empty() {
            return Err(OntologyError::Axiom("no environments declared".into()));
        }

        let mut classes = BTreeMap::new();
        for decl in feature_classes {
            if decl.superclasses.is_empty() {
                return Err(OntologyError::Axiom(format!(
                    "feature class {} has no environment superclass",
                    decl.name
                )));
            }
            let mut supers = BTreeMap::new();
            for edge in &decl.superclasses {
                if !env_set.contains(&edge.env) {
                    return Err(OntologyError::Axiom(format!(
                        "feature class {} references unknown environment {}",
                        decl.name, edge.env
                    )));
                }
                // Zero proximity means "no relation"; such edges must simply
                // be omitted.
                if !(edge.sp > 0.0 && edge.sp <= 1.0) {
                    return Err(OntologyError::Axiom(format!(
                        "feature class {} proximity to {} is {} (outside (0,1])",
                        decl.name, edge.env, edge.sp
                    )));
                }
                if supers.insert(edge.env.clone(), edge.sp).is_some() {
                    return Err(OntologyError::Axiom(format!(
                        "feature class {} declares environment {} twice",
                        decl.name, edge.env
                    )));
                }
            }
            if classes
                .insert(
                    decl.name.clone(),
                    FeatureClass {
                        is_static: decl.is_static,
                        superclasses: supers,
                        similarity_group: decl.similarity_group,
                    },
                )
                .is_some()
            {
                return Err(OntologyError::Axiom(format!(
                    "duplicate feature class: {}",
                    decl.name
                )));
            }
        }
        for inst in &instances {
            if !classes.contains_key(&inst.class) {
                return Err(OntologyError::Axiom(format!(
                    "instance {} bound to unknown class {}",
                    inst.name, inst.class
                )));
            }
        }
        Ok(Ontology {
            environments,
            classes,
            instances,
        })
    }

    /// Serialize back to the file format.
    pub fn to_json(&self) -> String {
        let file = OntologyFile {
            environments: self.environments.clone(),
            feature_classes: self
                .classes
                .iter()
                .map(|(name, fc)| FeatureClassDecl {
                    name: name.clone(),
                    is_static: fc.is_static,
                    superclasses: fc
                        .superclasses
                        .iter()
                        .map(|(env, sp)| SuperclassEdge {
                            env: env.clone(),
                            sp: *sp,
                        })
                        .collect(),
                    similarity_group: fc.similarity_group.clone(),
                })
                .collect(),
            instances: self.instances.clone(),
        };
        serde_json::to_string_pretty(&file).expect("ontology serialization")
    }

    /// Environment-type names, in declaration order. Does not include the
    /// reserved `Unknown` label.
    pub fn environments(&self) -> &[String] {
        &self.environments
    }

    /// Feature class names in sorted order.
    pub fn class_names(&self) -> impl Iterator<Item = &str> {
        self.classes.keys().map(|s| s.as_str())
    }

    /// Total number of concepts (environment types + feature classes).
    pub fn concept_count(&self) -> usize {
        self.environments.len() + self.classes.len()
    }

    pub fn has_class(&self, class: &str) -> bool {
        self.classes.contains_key(class)
    }

    pub fn has_environment(&self, env: &str) -> bool {
        self.environments.iter().any(|e| e == env)
    }

    fn class(&self, name: &str) -> Result<&FeatureClass, OntologyError> {
        self.classes
            .get(name)
            .ok_or_else(|| OntologyError::UnknownConcept(name.to_string()))
    }

    /// Stored semantic proximity of `class` to `env`; 0 when no edge exists.
    pub fn semantic_proximity(&self, class: &str, env: &str) -> Result<f64, OntologyError> {
        if !self.has_environment(env) {
            return Err(OntologyError::UnknownConcept(env.to_string()));
        }
        Ok(self.class(class)?.superclasses.get(env).copied().unwrap_or(0.0))
    }

    /// The environment superclasses of `class`: exactly the environments with
    /// a positive proximity edge. Non-empty by axiom.
    pub fn environment_superclasses(
        &self,
        class: &str,
    ) -> Result<BTreeSet<String>, OntologyError> {
        Ok(self
            .class(class)?
            .superclasses
            .iter()
            .filter(|(_, sp)| **sp > 0.0)
            .map(|(env, _)| env.clone())
            .collect())
    }

    /// Default static/dynamic attribute for a class.
    pub fn is_static_class(&self, class: &str) -> Result<bool, OntologyError> {
        Ok(self.class(class)?.is_static)
    }

    /// Two classes are semantically similar when they are the same class or
    /// declared members of the same similarity group.
    pub fn semantically_similar(&self, c1: &str, c2: &str) -> Result<bool, OntologyError> {
        let a = self.class(c1)?;
        let b = self.class(c2)?;
        if c1 == c2 {
            return Ok(true);
        }
        Ok(match (&a.similarity_group, &b.similarity_group) {
            (Some(g1), Some(g2)) => g1 == g2,
            _ => false,
        })
    }
}
