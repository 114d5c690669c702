//! Transport instances: JSON I/O and seeded generation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::costs::CostSpec;
use crate::duality::{Atom, DiscreteMeasure};
use crate::error::{invalid, Result};
use crate::spaces::{Point, Region, Space};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub space: Space,
    pub cost: CostSpec,
    pub source: DiscreteMeasure,
    pub target: DiscreteMeasure,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Region the source was sampled from, when generated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_region: Option<Region>,
}

impl Instance {
    /// Checks both measures against the space and canonicalises their atoms.
    pub fn validated(mut self) -> Result<Self> {
        self.source = self.source.for_space(&self.space)?;
        self.target = self.target.for_space(&self.space)?;
        if let Some(r) = &self.source_region {
            r.validate(&self.space)?;
        }
        Ok(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<Instance>(text)?.validated()
    }
}

/// How the target measure of a generated instance is built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TargetSpec {
    /// `m` further samples of the source region; weights uniform, or drawn
    /// from `[0.5, 1.5)` and normalised.
    Sample { m: usize, random_weights: bool },
    /// The source translated by `offset` (plane only).
    Translate { offset: [f64; 2] },
}

/// Sources are `n` samples of `region` from `seed`; targets use an
/// independent stream of the same seed.
pub fn generate(space: Space, cost: CostSpec, region: Region, n: usize, target: TargetSpec, seed: u64) -> Result<Instance> {
    if n == 0 {
        return invalid("cannot generate an empty measure");
    }
    let xs = space.sample_region(&region, n, seed)?;
    let source = DiscreteMeasure::uniform(xs.clone())?;
    let target = match target {
        TargetSpec::Sample { m, random_weights } => {
            if m == 0 {
                return invalid("cannot generate an empty target measure");
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(1);
            let sample_region = match region {
                // grids are deterministic; draw targets uniformly from the same box
                Region::Grid { x_min, x_max, y_min, y_max, .. } => Region::Rect { x_min, x_max, y_min, y_max },
                r => r,
            };
            let ys = sample_region.sample_with(&space, m, &mut rng)?;
            if random_weights {
                let raw: Vec<f64> = (0..m).map(|_| rng.random_range(0.5..1.5)).collect();
                let total: f64 = raw.iter().sum();
                DiscreteMeasure::new(ys.into_iter().zip(raw).map(|(point, w)| Atom { point, weight: w / total }).collect())?
            } else {
                DiscreteMeasure::uniform(ys)?
            }
        }
        TargetSpec::Translate { offset } => {
            if space != Space::Plane {
                return invalid("translated targets need the plane");
            }
            let ys = xs.iter().map(|p| Point::planar(p.coords()[0] + offset[0], p.coords()[1] + offset[1])).collect();
            DiscreteMeasure::uniform(ys)?
        }
    };
    Ok(Instance { space, cost, source, target, seed: Some(seed), source_region: Some(region) })
}

/// 20×20 cell-centre grid on the unit square and its translate by `(2, 0)`.
pub fn plane_translation() -> Instance {
    let grid = Region::Grid { x_min: 0.0, x_max: 1.0, y_min: 0.0, y_max: 1.0, nx: 20, ny: 20 };
    generate(Space::Plane, CostSpec::Quadratic, grid, 400, TargetSpec::Translate { offset: [2.0, 0.0] }, 0).expect("valid preset")
}
