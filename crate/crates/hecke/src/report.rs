//! Serializable report and dump formats. All maps are ordered and all lists
//! are assembled in fixed traversal orders, so serialized output is
//! byte-identical across runs and thread counts.

use crate::cohomology::Ctx;
use crate::heckemod::HModule;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ReportParams {
    pub n: usize,
    pub p: u64,
    pub f: u32,
    pub e: u32,
    pub zeta_p: bool,
    pub m: u32,
    pub chi_exps: Vec<i64>,
    pub chi_uvals: Vec<Vec<u32>>,
}

impl ReportParams {
    pub fn from_ctx(ctx: &Ctx) -> ReportParams {
        ReportParams {
            n: ctx.n,
            p: ctx.params.p,
            f: ctx.params.f,
            e: ctx.params.e,
            zeta_p: ctx.params.zeta_p,
            m: ctx.params.m,
            chi_exps: ctx
                .chi
                .exps
                .iter()
                .map(|e| e.rem_euclid(ctx.umod()))
                .collect(),
            chi_uvals: ctx.chi.uvals.iter().map(|u| u.coeffs.clone()).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct SummandReport {
    /// 1-indexed root coordinates, absent for the torus-induced piece.
    pub beta: Option<(usize, usize)>,
    pub r: Option<u32>,
    pub dim: usize,
    pub multiplicity: usize,
    pub supersingular: Option<bool>,
    pub levi: String,
    pub note: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct LevelReport {
    pub height: i64,
    pub dim: usize,
    pub split: bool,
    pub certificate: String,
    pub summands: Vec<SummandReport>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct FiltrationReport {
    pub schema_version: u32,
    pub params: ReportParams,
    pub total_dim: usize,
    pub levels: Vec<LevelReport>,
    pub warnings: Vec<String>,
}

impl FiltrationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }
}

/// Versioned module dump: generator matrices as row-major arrays of field
/// elements, each element a coefficient vector.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModuleDump {
    pub schema_version: u32,
    pub params: ReportParams,
    pub which: String,
    pub dim: usize,
    pub basis: Vec<String>,
    pub generators: BTreeMap<String, Vec<Vec<Vec<u32>>>>,
}

impl ModuleDump {
    pub fn from_module(ctx: &Ctx, which: &str, module: &HModule) -> ModuleDump {
        let generators = module
            .act
            .iter()
            .map(|(id, mat)| {
                let rows = (0..mat.rows)
                    .map(|i| {
                        (0..mat.cols)
                            .map(|j| mat.at(i, j).coeffs.clone())
                            .collect()
                    })
                    .collect();
                (id.label(), rows)
            })
            .collect();
        ModuleDump {
            schema_version: 1,
            params: ReportParams::from_ctx(ctx),
            which: which.to_string(),
            dim: module.dim,
            basis: module.basis.clone(),
            generators,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("dump serialization")
    }
}

/// Report from the oracle verification suites.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub n: usize,
    pub p: u64,
    pub precision: u32,
    pub suites: BTreeMap<String, SuiteReport>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteReport {
    pub checked: usize,
    pub failures: Vec<String>,
}

impl VerifyReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("verify report serialization")
    }
}
