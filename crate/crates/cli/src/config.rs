//! Scenario configuration: one JSON document per run.

use std::path::Path;

use serde::{Deserialize, Serialize};

use platedual_core::dual::KPolicy;
use platedual_core::fields::FacePartition;
use platedual_core::{
    BoundaryPartition, ElasticLoads, Grid2, Grid3, LameParams, LoadSet, ScalarField2, ScalarField3, SolveOptions,
    Tensor3D,
};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    PlateClamped,
    PlateMixed,
    Elasticity3dClamped,
    Elasticity3dMixed,
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Model::PlateClamped => "plate_clamped",
            Model::PlateMixed => "plate_mixed",
            Model::Elasticity3dClamped => "elasticity3d_clamped",
            Model::Elasticity3dMixed => "elasticity3d_mixed",
        })
    }
}

impl Model {
    pub fn is_plate(self) -> bool {
        matches!(self, Model::PlateClamped | Model::PlateMixed)
    }

    pub fn dim(self) -> usize {
        if self.is_plate() {
            2
        } else {
            3
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monomial {
    pub coef: f64,
    /// Exponents of `x, y` (plate) or `x, y, z` (3D).
    pub powers: Vec<u32>,
}

/// A nodal field given as a constant, a polynomial, or one value per node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Constant(f64),
    Polynomial(Vec<Monomial>),
    Tabulated(Vec<f64>),
}

impl FieldSpec {
    fn eval(&self, name: &str, coords: &[Vec<f64>]) -> Result<Vec<f64>, CliError> {
        let dim = coords.first().map_or(0, |c| c.len());
        let out = match self {
            FieldSpec::Constant(c) => vec![*c; coords.len()],
            FieldSpec::Polynomial(terms) => {
                if let Some(t) = terms.iter().find(|t| t.powers.len() != dim) {
                    return Err(CliError::config(format!(
                        "load `{name}`: monomial has {} exponents, the grid has {dim} axes",
                        t.powers.len()
                    )));
                }
                coords
                    .iter()
                    .map(|x| terms.iter().map(|t| t.coef * x.iter().zip(&t.powers).map(|(v, p)| v.powi(*p as i32)).product::<f64>()).sum())
                    .collect()
            }
            FieldSpec::Tabulated(v) => {
                if v.len() != coords.len() {
                    return Err(CliError::config(format!(
                        "load `{name}`: {} tabulated values for {} nodes",
                        v.len(),
                        coords.len()
                    )));
                }
                v.clone()
            }
        };
        if out.iter().any(|v| !v.is_finite()) {
            return Err(CliError::config(format!("load `{name}` has non-finite values")));
        }
        Ok(out)
    }

    pub fn eval2(&self, name: &str, grid: &Grid2) -> Result<ScalarField2, CliError> {
        let coords: Vec<Vec<f64>> = (0..grid.len()).map(|k| {
            let (x, y) = grid.coords(k);
            vec![x, y]
        }).collect();
        Ok(ScalarField2::from_values(*grid, self.eval(name, &coords)?))
    }

    pub fn eval3(&self, name: &str, grid: &Grid3) -> Result<ScalarField3, CliError> {
        let coords: Vec<Vec<f64>> = (0..grid.len()).map(|k| grid.coords(k).to_vec()).collect();
        Ok(ScalarField3 { grid: *grid, values: self.eval(name, &coords)? })
    }
}

/// Loads; absent fields are zero. Plate models read `p, p1, p2, pt, pt1,
/// pt2, eps1, eps2`; 3D models read `p1..p3, pt1..pt3, u_hat1..u_hat3`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadsSpec {
    pub p: Option<FieldSpec>,
    pub p1: Option<FieldSpec>,
    pub p2: Option<FieldSpec>,
    pub p3: Option<FieldSpec>,
    pub pt: Option<FieldSpec>,
    pub pt1: Option<FieldSpec>,
    pub pt2: Option<FieldSpec>,
    pub pt3: Option<FieldSpec>,
    pub eps1: Option<FieldSpec>,
    pub eps2: Option<FieldSpec>,
    pub u_hat1: Option<FieldSpec>,
    pub u_hat2: Option<FieldSpec>,
    pub u_hat3: Option<FieldSpec>,
}

impl LoadsSpec {
    fn reject(&self, model: Model, names: &[(&str, bool)]) -> Result<(), CliError> {
        match names.iter().find(|(_, set)| *set) {
            Some((n, _)) => Err(CliError::config(format!("load `{n}` is not used by model {model}"))),
            None => Ok(()),
        }
    }

    pub fn plate(&self, grid: &Grid2) -> Result<LoadSet, CliError> {
        self.reject(
            Model::PlateClamped,
            &[
                ("p3", self.p3.is_some()),
                ("pt3", self.pt3.is_some()),
                ("u_hat1", self.u_hat1.is_some()),
                ("u_hat2", self.u_hat2.is_some()),
                ("u_hat3", self.u_hat3.is_some()),
            ],
        )?;
        let f = |name: &str, s: &Option<FieldSpec>| match s {
            Some(s) => s.eval2(name, grid),
            None => Ok(ScalarField2::constant(*grid, 0.0)),
        };
        Ok(LoadSet {
            p: f("p", &self.p)?,
            p1: f("p1", &self.p1)?,
            p2: f("p2", &self.p2)?,
            pt: f("pt", &self.pt)?,
            pt1: f("pt1", &self.pt1)?,
            pt2: f("pt2", &self.pt2)?,
            eps1: f("eps1", &self.eps1)?,
            eps2: f("eps2", &self.eps2)?,
        })
    }

    pub fn elastic(&self, grid: &Grid3) -> Result<ElasticLoads, CliError> {
        self.reject(
            Model::Elasticity3dClamped,
            &[
                ("p", self.p.is_some()),
                ("pt", self.pt.is_some()),
                ("eps1", self.eps1.is_some()),
                ("eps2", self.eps2.is_some()),
            ],
        )?;
        let f = |name: &str, s: &Option<FieldSpec>| match s {
            Some(s) => s.eval3(name, grid),
            None => Ok(ScalarField3::zeros(*grid)),
        };
        Ok(ElasticLoads {
            p: [f("p1", &self.p1)?, f("p2", &self.p2)?, f("p3", &self.p3)?],
            pt: [f("pt1", &self.pt1)?, f("pt2", &self.pt2)?, f("pt3", &self.pt3)?],
            u_hat: [f("u_hat1", &self.u_hat1)?, f("u_hat2", &self.u_hat2)?, f("u_hat3", &self.u_hat3)?],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Nodes per axis (two or three entries).
    pub n: Vec<usize>,
    /// Side lengths; unit box when absent.
    pub length: Option<Vec<f64>>,
    /// Plate edge labels; all clamped (clamped model) or west/south clamped (mixed) by default.
    pub boundary: Option<BoundaryPartition>,
    /// 3D face labels `[x0, x1, y0, y1, z0, z1]`.
    pub faces: Option<FacePartition>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSpec {
    pub lambda: f64,
    pub mu: f64,
    /// Plate thickness `h`.
    pub thickness: Option<f64>,
    /// Optional 6x6 Mandel matrix replacing the isotropic 3D tensor.
    pub mandel: Option<[[f64; 6]; 6]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckToggles {
    pub gradcheck: bool,
    pub gradcheck_samples: usize,
    pub gradcheck_directions: usize,
    pub gradcheck_amplitude: f64,
    pub coercivity_samples: usize,
    pub coercivity_amplitude: f64,
    pub duality: bool,
    pub weak_duality_trials: usize,
    pub concavity_directions: usize,
    pub j2_samples: usize,
    pub hypothesis_samples: usize,
}

impl Default for CheckToggles {
    fn default() -> Self {
        Self {
            gradcheck: true,
            gradcheck_samples: 20,
            gradcheck_directions: 5,
            gradcheck_amplitude: 0.05,
            coercivity_samples: 100,
            coercivity_amplitude: 0.1,
            duality: true,
            weak_duality_trials: 200,
            concavity_directions: 100,
            j2_samples: 100,
            hypothesis_samples: 10_000,
        }
    }
}

fn default_eps3() -> f64 {
    0.5
}

fn default_delta_pd() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub seed: u64,
    pub model: Model,
    pub grid: GridSpec,
    pub material: MaterialSpec,
    #[serde(default)]
    pub loads: LoadsSpec,
    /// Required for plate models.
    pub k_policy: Option<KPolicy>,
    #[serde(default = "default_eps3")]
    pub eps3: f64,
    #[serde(default = "default_delta_pd")]
    pub delta_pd: f64,
    #[serde(default)]
    pub solver: SolveOptions,
    #[serde(default)]
    pub checks: CheckToggles,
    /// Per-axis node cap for 3D grids.
    pub grid_cap: Option<usize>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str, origin: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(format!("{origin}: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let dim = self.model.dim();
        if self.grid.n.len() != dim {
            return Err(CliError::config(format!("grid.n needs {dim} entries for model {}", self.model)));
        }
        if let Some(l) = &self.grid.length {
            if l.len() != dim {
                return Err(CliError::config(format!("grid.length needs {dim} entries")));
            }
        }
        if self.model.is_plate() {
            if self.k_policy.is_none() {
                return Err(CliError::config("missing field `k_policy` (required for plate models)"));
            }
            if self.material.thickness.is_none() {
                return Err(CliError::config("missing field `material.thickness` (required for plate models)"));
            }
            if self.grid.faces.is_some() || self.material.mandel.is_some() {
                return Err(CliError::config("`grid.faces` and `material.mandel` apply to 3D models only"));
            }
        } else if self.grid.boundary.is_some() {
            return Err(CliError::config("`grid.boundary` applies to plate models only; use `grid.faces`"));
        }
        if let Some(KPolicy::Fixed(k)) = self.k_policy {
            if !(k > 0.0 && k.is_finite()) {
                return Err(CliError::config(format!("k_policy.value must be positive, got {k}")));
            }
        }
        if !(self.eps3 > 0.0 && self.eps3 < 1.0) {
            return Err(CliError::config(format!("eps3 must lie in (0, 1), got {}", self.eps3)));
        }
        if !(self.delta_pd > 0.0 && self.delta_pd.is_finite()) {
            return Err(CliError::config(format!("delta_pd must be positive, got {}", self.delta_pd)));
        }
        let c = &self.checks;
        if c.duality && self.model.is_plate() && (c.j2_samples == 0 || c.concavity_directions == 0) {
            return Err(CliError::config("checks.j2_samples and checks.concavity_directions must be positive"));
        }
        self.solver.validate().map_err(|e| CliError::config(e.to_string()))?;
        Ok(())
    }

    fn length(&self) -> Vec<f64> {
        self.grid.length.clone().unwrap_or_else(|| vec![1.0; self.model.dim()])
    }

    pub fn grid2(&self) -> Result<Grid2, CliError> {
        let l = self.length();
        let part = self.grid.boundary.unwrap_or(match self.model {
            Model::PlateMixed => BoundaryPartition::west_south_clamped(),
            _ => BoundaryPartition::clamped(),
        });
        Grid2::new(self.grid.n[0], self.grid.n[1], l[0], l[1], part).map_err(|e| CliError::config(e.to_string()))
    }

    pub fn grid3(&self) -> Result<Grid3, CliError> {
        let l = self.length();
        let faces = self.grid.faces.unwrap_or(match self.model {
            Model::Elasticity3dMixed => FacePartition::clamped_west(),
            _ => FacePartition::clamped(),
        });
        let n = &self.grid.n;
        let g = Grid3::new([n[0], n[1], n[2]], [l[0], l[1], l[2]], faces).map_err(|e| CliError::config(e.to_string()))?;
        let cap = self.grid_cap.unwrap_or(platedual_core::elasticity3d::DEFAULT_GRID_CAP);
        platedual_core::elasticity3d::check_grid_cap(&g, cap).map_err(|e| CliError::config(e.to_string()))?;
        Ok(g)
    }

    pub fn lame(&self) -> Result<LameParams, CliError> {
        let t = self.material.thickness.unwrap_or(1.0);
        LameParams::new(self.material.lambda, self.material.mu, t).map_err(|e| CliError::config(e.to_string()))
    }

    pub fn tensor3d(&self) -> Result<Tensor3D, CliError> {
        match &self.material.mandel {
            Some(rows) => Tensor3D::from_mandel_rows(rows).map_err(|e| CliError::config(e.to_string())),
            None => Tensor3D::isotropic(self.material.lambda, self.material.mu).map_err(|e| CliError::config(e.to_string())),
        }
    }
}
