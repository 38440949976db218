//! Bodies that the volume evaluator can ray-cast.

use crate::error::{Error, Result};
use crate::geometry::{Atlas, RadialShape, Vec3};

/// A bounded open set described by a level function and ray crossings.
pub trait VolumeDomain: Sync {
    fn dim(&self) -> usize;
    /// Negative inside, positive outside.
    fn level(&self, x: &Vec3) -> f64;
    /// Sorted parameters t > t_min at which x + t·d crosses the boundary.
    fn crossings(&self, x: &Vec3, d: &Vec3, t_min: f64) -> Vec<f64>;
    /// Nearest boundary point, its distance and the inward unit normal there.
    fn nearest(&self, x: &Vec3) -> Result<(Vec3, f64, Vec3)>;
    /// Radius of a ball about the origin containing the closure.
    fn bounding_radius(&self) -> f64;
    /// Whether every ray from an exterior point meets the body in one chord.
    fn is_convex_body(&self) -> bool {
        false
    }
}

fn closed_shape(atlas: &Atlas) -> Result<RadialShape> {
    atlas.shape.ok_or_else(|| Error::Parameter("volume integrals need a closed atlas".into()))
}

impl VolumeDomain for Atlas {
    fn dim(&self) -> usize {
        self.dim
    }

    fn level(&self, x: &Vec3) -> f64 {
        self.shape.map_or(f64::NAN, |s| s.level(x))
    }

    fn crossings(&self, x: &Vec3, d: &Vec3, t_min: f64) -> Vec<f64> {
        self.shape.map_or_else(Vec::new, |s| s.ray_crossings(x, d, t_min))
    }

    fn nearest(&self, x: &Vec3) -> Result<(Vec3, f64, Vec3)> {
        closed_shape(self)?;
        let f = self.foot_point(x)?;
        Ok((f.point, f.distance, f.normal))
    }

    fn bounding_radius(&self) -> f64 {
        self.shape.map_or(f64::INFINITY, |s| s.outer_radius())
    }

    fn is_convex_body(&self) -> bool {
        self.shape.map_or(false, |s| s.amplitude == 0.0)
    }
}

/// A closed atlas translated by `center`.
#[derive(Debug, Clone)]
pub struct PlacedBody {
    pub atlas: Atlas,
    pub center: Vec3,
}

impl PlacedBody {
    pub fn new(atlas: Atlas, center: Vec3) -> Result<Self> {
        closed_shape(&atlas)?;
        Ok(Self { atlas, center })
    }
}

impl VolumeDomain for PlacedBody {
    fn dim(&self) -> usize {
        self.atlas.dim
    }

    fn level(&self, x: &Vec3) -> f64 {
        self.atlas.level(&(x - self.center))
    }

    fn crossings(&self, x: &Vec3, d: &Vec3, t_min: f64) -> Vec<f64> {
        self.atlas.crossings(&(x - self.center), d, t_min)
    }

    fn nearest(&self, x: &Vec3) -> Result<(Vec3, f64, Vec3)> {
        let (p, d, n) = self.atlas.nearest(&(x - self.center))?;
        Ok((p + self.center, d, n))
    }

    fn bounding_radius(&self) -> f64 {
        self.atlas.bounding_radius() + self.center.norm()
    }

    fn is_convex_body(&self) -> bool {
        self.atlas.is_convex_body()
    }
}

/// Union of pairwise disjoint bodies with disjoint closures.
#[derive(Debug, Clone)]
pub struct BodyUnion {
    pub parts: Vec<PlacedBody>,
}

impl BodyUnion {
    pub fn new(parts: Vec<PlacedBody>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::Parameter("empty union".into()));
        }
        let dim = parts[0].dim();
        if parts.iter().any(|p| p.dim() != dim) {
            return Err(Error::Parameter("union parts live in different dimensions".into()));
        }
        for (i, a) in parts.iter().enumerate() {
            for b in &parts[i + 1..] {
                let gap = (a.center - b.center).norm() - a.atlas.bounding_radius() - b.atlas.bounding_radius();
                if gap <= 0.0 {
                    return Err(Error::Parameter("union parts must be separated".into()));
                }
            }
        }
        Ok(Self { parts })
    }
}

impl VolumeDomain for BodyUnion {
    fn dim(&self) -> usize {
        self.parts[0].dim()
    }

    fn level(&self, x: &Vec3) -> f64 {
        self.parts.iter().map(|p| p.level(x)).fold(f64::INFINITY, f64::min)
    }

    fn crossings(&self, x: &Vec3, d: &Vec3, t_min: f64) -> Vec<f64> {
        let mut all: Vec<f64> = self.parts.iter().flat_map(|p| p.crossings(x, d, t_min)).collect();
        all.sort_by(|a, b| a.total_cmp(b));
        all
    }

    fn nearest(&self, x: &Vec3) -> Result<(Vec3, f64, Vec3)> {
        let mut best: Option<(Vec3, f64, Vec3)> = None;
        for p in &self.parts {
            let r = p.nearest(x)?;
            if best.map_or(true, |b| r.1 < b.1) {
                best = Some(r);
            }
        }
        Ok(best.expect("non-empty union"))
    }

    fn bounding_radius(&self) -> f64 {
        self.parts.iter().map(|p| p.bounding_radius()).fold(0.0, f64::max)
    }
}
