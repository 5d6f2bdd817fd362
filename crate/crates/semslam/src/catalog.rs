//! Built-in ontologies and scenario presets.
//!
//! Two class catalogs ship with the crate:
//!
//! * [`default_ontology`] — seven environment types with overlapping class
//!   associations, used by the six area presets.
//! * [`quadrant_ontology`] — four environment types whose classes are each
//!   exclusive to one environment with proximity 1.0, used by the `quadrant`
//!   preset for unambiguous classification setups.
//!
//! Presets pair a zone layout with a companion catalog and a default feature
//! density per zone.

use crate::ontology::{FeatureClassDecl, Ontology, SuperclassEdge};
use crate::scenario::Zone;

fn class(
    name: &str,
    is_static: bool,
    superclasses: &[(&str, f64)],
    group: Option<&str>,
) -> FeatureClassDecl {
    FeatureClassDecl {
        name: name.to_string(),
        is_static,
        superclasses: superclasses
            .iter()
            .map(|(env, sp)| SuperclassEdge {
                env: env.to_string(),
                sp: *sp,
            })
            .collect(),
        similarity_group: group.map(str::to_string),
    }
}

/// Seven-environment catalog with overlapping class associations.
pub fn default_ontology() -> Ontology {
    let environments = [
        "Commercial",
        "CommunityFacility",
        "Industrial",
        "NonUrban",
        "Parkland",
        "Residential",
        "Transport",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();

    let classes = vec![
        class("tree", true, &[("NonUrban", 0.9), ("Parkland", 0.6), ("Residential", 0.3)], Some("vegetation")),
        class("shrub", true, &[("NonUrban", 0.8), ("Parkland", 0.5)], Some("vegetation")),
        class("farm_shed", true, &[("NonUrban", 0.9)], None),
        class("water_tank", true, &[("NonUrban", 0.7), ("Industrial", 0.3)], None),
        class("kangaroo", false, &[("NonUrban", 1.0)], None),
        class("house", true, &[("Residential", 1.0)], None),
        class("letterbox", true, &[("Residential", 0.9)], None),
        class("backyard_pool", true, &[("Residential", 0.8)], None),
        class("sedan", false, &[("Residential", 0.5), ("Commercial", 0.4)], Some("car")),
        class("hatchback", false, &[("Residential", 0.5), ("Commercial", 0.3)], Some("car")),
        class("skyscraper", true, &[("Commercial", 1.0)], Some("tower")),
        class("office_tower", true, &[("Commercial", 0.9)], Some("tower")),
        class("shopfront", true, &[("Commercial", 0.8)], None),
        class("cafe_sign", true, &[("Commercial", 0.7), ("CommunityFacility", 0.2)], None),
        class("warehouse", true, &[("Industrial", 0.9)], None),
        class("silo", true, &[("Industrial", 0.8), ("NonUrban", 0.3)], None),
        class("chimney_stack", true, &[("Industrial", 0.9)], None),
        class("forklift", false, &[("Industrial", 1.0)], None),
        class("bus", false, &[("Transport", 0.9), ("Commercial", 0.2)], None),
        class("train_carriage", true, &[("Transport", 1.0)], None),
        class("platform_sign", true, &[("Transport", 0.9)], None),
        class("rail_track", true, &[("Transport", 0.8), ("Industrial", 0.2)], None),
        class("playground", true, &[("CommunityFacility", 0.8), ("Parkland", 0.4)], None),
        class("statue", true, &[("CommunityFacility", 0.6), ("Parkland", 0.5)], None),
        class("library_sign", true, &[("CommunityFacility", 0.9)], None),
        class("sports_field", true, &[("CommunityFacility", 0.7), ("Parkland", 0.4)], None),
        class("park_bench", true, &[("Parkland", 0.8), ("CommunityFacility", 0.3)], None),
        class("fountain", true, &[("Parkland", 0.7), ("CommunityFacility", 0.4)], None),
        class("picnic_table", true, &[("Parkland", 0.8)], None),
        class("flower_bed", true, &[("Parkland", 0.7), ("Residential", 0.3)], None),
    ];

    Ontology::from_decls(environments, classes, Vec::new()).expect("built-in catalog is valid")
}

/// Four-environment catalog where every class is exclusive to one
/// environment with proximity 1.0 and every class is static.
pub fn quadrant_ontology() -> Ontology {
    let environments = ["Commercial", "Industrial", "NonUrban", "Residential"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let classes = vec![
        class("house", true, &[("Residential", 1.0)], None),
        class("letterbox", true, &[("Residential", 1.0)], None),
        class("backyard_pool", true, &[("Residential", 1.0)], None),
        class("skyscraper", true, &[("Commercial", 1.0)], None),
        class("shopfront", true, &[("Commercial", 1.0)], None),
        class("cafe_sign", true, &[("Commercial", 1.0)], None),
        class("warehouse", true, &[("Industrial", 1.0)], None),
        class("silo", true, &[("Industrial", 1.0)], None),
        class("chimney_stack", true, &[("Industrial", 1.0)], None),
        class("tree", true, &[("NonUrban", 1.0)], None),
        class("shrub", true, &[("NonUrban", 1.0)], None),
        class("farm_shed", true, &[("NonUrban", 1.0)], None),
    ];
    Ontology::from_decls(environments, classes, Vec::new()).expect("built-in catalog is valid")
}

/// A zone layout plus companion catalog and default density.
pub struct Preset {
    pub name: &'static str,
    pub width_km: f64,
    pub height_km: f64,
    pub zones: Vec<Zone>,
    /// Default feature density per km^2, applied to every zone unless
    /// overridden per zone.
    pub default_density: f64,
    pub ontology: Ontology,
}

/// Names of the shipped presets.
pub const PRESET_NAMES: [&str; 7] = [
    "quadrant",
    "gunghalin",
    "airport",
    "fyshwick",
    "kingston",
    "train_depot",
    "city",
];

fn rect_zone(label: &str, x0: f64, y0: f64, x1: f64, y1: f64) -> Zone {
    Zone::rect(label, x0, y0, x1, y1)
}

/// Look up a preset by name.
pub fn preset(name: &str) -> Option<Preset> {
    match name {
        // Four 1 km^2 quadrants, one environment each; unambiguous catalog.
        "quadrant" => Some(Preset {
            name: "quadrant",
            width_km: 2.0,
            height_km: 2.0,
            zones: vec![
                rect_zone("Residential", 0.0, 0.0, 1.0, 1.0),
                rect_zone("Commercial", 1.0, 0.0, 2.0, 1.0),
                rect_zone("Industrial", 0.0, 1.0, 1.0, 2.0),
                rect_zone("NonUrban", 1.0, 1.0, 2.0, 2.0),
            ],
            default_density: 20.0,
            ontology: quadrant_ontology(),
        }),
        // 29.5609 km^2, mixed environment types, moderate density.
        "gunghalin" => {
            let w = 29.5609f64.sqrt();
            Some(Preset {
                name: "gunghalin",
                width_km: w,
                height_km: w,
                zones: vec![
                    rect_zone("Residential", 0.0, 0.0, w * 0.55, w * 0.6),
                    rect_zone("Commercial", w * 0.55, 0.0, w, w * 0.35),
                    rect_zone("CommunityFacility", w * 0.55, w * 0.35, w, w * 0.6),
                    rect_zone("Parkland", 0.0, w * 0.6, w * 0.4, w),
                    rect_zone("NonUrban", w * 0.4, w * 0.6, w, w),
                ],
                default_density: 125.0,
                ontology: default_ontology(),
            })
        }
        // 27.8891 km^2, primarily non-urban, sparse.
        "airport" => {
            let w = 27.8891f64.sqrt();
            Some(Preset {
                name: "airport",
                width_km: w,
                height_km: w,
                zones: vec![
                    rect_zone("Transport", w * 0.3, w * 0.4, w * 0.7, w * 0.6),
                    rect_zone("Commercial", w * 0.4, w * 0.6, w * 0.6, w * 0.7),
                    rect_zone("NonUrban", 0.0, 0.0, w, w),
                ],
                default_density: 7.0,
                ontology: default_ontology(),
            })
        }
        // 6.6667 km^2, principally industrial.
        "fyshwick" => {
            let w = 6.6667f64.sqrt();
            Some(Preset {
                name: "fyshwick",
                width_km: w,
                height_km: w,
                zones: vec![
                    rect_zone("Industrial", 0.0, 0.0, w, w * 0.7),
                    rect_zone("Commercial", 0.0, w * 0.7, w * 0.6, w),
                    rect_zone("Transport", w * 0.6, w * 0.7, w, w),
                ],
                default_density: 23.0,
                ontology: default_ontology(),
            })
        }
        // 0.5041 km^2, commercial and high-density residential.
        "kingston" => Some(Preset {
            name: "kingston",
            width_km: 0.71,
            height_km: 0.71,
            zones: vec![
                rect_zone("Commercial", 0.0, 0.0, 0.71, 0.36),
                rect_zone("Residential", 0.0, 0.36, 0.71, 0.71),
            ],
            default_density: 420.0,
            ontology: default_ontology(),
        }),
        // 1.0976 km^2, mainly transport and services.
        "train_depot" => Some(Preset {
            name: "train_depot",
            width_km: 1.12,
            height_km: 0.98,
            zones: vec![
                rect_zone("Transport", 0.0, 0.0, 1.12, 0.6),
                rect_zone("Industrial", 0.0, 0.6, 0.7, 0.98),
                rect_zone("CommunityFacility", 0.7, 0.6, 1.12, 0.98),
            ],
            default_density: 152.0,
            ontology: default_ontology(),
        }),
        // 1.8225 km^2 (1.35 x 1.35), principally commercial, dense.
        "city" => Some(Preset {
            name: "city",
            width_km: 1.35,
            height_km: 1.35,
            zones: vec![
                rect_zone("Commercial", 0.0, 0.0, 0.9, 1.35),
                rect_zone("Residential", 0.9, 0.675, 1.35, 1.35),
                rect_zone("Transport", 0.9, 0.0, 1.35, 0.675),
            ],
            default_density: 238.0,
            ontology: default_ontology(),
        }),
        _ => None,
    }
}
