//! Loading models from the supported file formats.

use std::path::Path;

use anyhow::{bail, Context, Result};
use lqo_core::linalg::{CMat, CVec};
use lqo_core::mtx::load_model_dir;
use lqo_core::{BarycentricLqo, Complex64, LqoStateSpace};

/// `None` marks a pole.
type Values = Vec<Option<Complex64>>;

pub enum ModelSource {
    StateSpace(LqoStateSpace),
    Barycentric(BarycentricLqo),
}

impl ModelSource {
    pub fn load(path: &Path) -> Result<Self> {
        if path.is_dir() {
            let m = load_model_dir(path).with_context(|| format!("loading model directory {}", path.display()))?;
            return Ok(Self::StateSpace(m));
        }
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let value: serde_json::Value =
            serde_json::from_str(&text).with_context(|| format!("{} is not JSON", path.display()))?;
        if value.get("xi").is_some() {
            let b = BarycentricLqo::from_json(&text).with_context(|| format!("loading {}", path.display()))?;
            Ok(Self::Barycentric(b))
        } else if value.get("A").is_some() {
            let m = LqoStateSpace::from_json(&text).with_context(|| format!("loading {}", path.display()))?;
            Ok(Self::StateSpace(m))
        } else {
            bail!("{} is neither a state-space nor a barycentric model", path.display())
        }
    }

    pub fn state_space(self) -> Result<LqoStateSpace> {
        match self {
            Self::StateSpace(m) => Ok(m),
            Self::Barycentric(b) => Ok(b.realize()?),
        }
    }

    /// `H1` at each point and `H2` on the grid.
    pub fn evaluate(&self, points: &[Complex64], with_h2: bool) -> (Values, Option<Vec<Values>>) {
        let h1 = points
            .iter()
            .map(|&s| match self {
                Self::StateSpace(m) => m.eval_h1(s).ok(),
                Self::Barycentric(b) => b.eval_r1(s).ok(),
            })
            .collect();
        if !with_h2 {
            return (h1, None);
        }
        let h2 = match self {
            Self::StateSpace(m) => {
                let u: Vec<Option<CVec>> = points.iter().map(|&s| m.resolvent(s).ok()).collect();
                let mu: Vec<Option<CVec>> = u.iter().map(|x| x.as_ref().map(|x| m.m() * x)).collect();
                u.iter()
                    .map(|ui| {
                        mu.iter()
                            .map(|mz| match (ui, mz) {
                                (Some(a), Some(b)) => Some(a.dot(b)),
                                _ => None,
                            })
                            .collect()
                    })
                    .collect()
            }
            Self::Barycentric(b) => {
                let (grid, poles): (CMat, Vec<bool>) = b.eval_r2_grid_lenient(points);
                (0..points.len())
                    .map(|i| {
                        (0..points.len())
                            .map(|j| (!poles[i] && !poles[j]).then(|| grid[(i, j)]))
                            .collect()
                    })
                    .collect()
            }
        };
        (h1, Some(h2))
    }
}
