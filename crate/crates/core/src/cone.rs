//! Pointed polyhedral ordering cones, their duals, and direction sets on a
//! base of the dual cone.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{combination, compositions, cross2, dot, norm_inf, Point};

/// Default tolerance for geometric comparisons at unit scale.
pub const TOL_GEOM: f64 = 1e-9;

const WITNESS_RESOLUTION: usize = 4;
const WITNESS_MAX_CANDIDATES: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConeKind {
    Orthant,
    Generated,
}

/// JSON description of a cone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ConeSpec {
    Orthant { dim: usize },
    Generated { primal: Vec<Point>, dual: Vec<Point> },
}

impl ConeSpec {
    pub fn build(&self) -> Result<Cone> {
        match self {
            ConeSpec::Orthant { dim } => Cone::orthant(*dim),
            ConeSpec::Generated { primal, dual } => Cone::generated(primal.clone(), dual.clone()),
        }
    }
}

/// A closed pointed polyhedral cone `C` given by generators of `C` and of its
/// dual `C⁺`. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Cone {
    dim: usize,
    primal: Vec<Point>,
    dual: Vec<Point>,
    kind: ConeKind,
    witness: Point,
    rays_2d: Option<[Point; 2]>,
    certificate: Vec<Point>,
}

/// Cones compare by their generator lists; kind and witness are derived data.
impl PartialEq for Cone {
    fn eq(&self, other: &Cone) -> bool {
        self.dim == other.dim && self.primal == other.primal && self.dual == other.dual
    }
}

impl Cone {
    pub fn orthant(dim: usize) -> Result<Cone> {
        if dim == 0 {
            return Err(Error::InvalidDimension("orthant of dimension 0".into()));
        }
        let units: Vec<Point> = (0..dim)
            .map(|i| {
                let mut e = vec![0.0; dim];
                e[i] = 1.0;
                e
            })
            .collect();
        Cone::assemble(units.clone(), units, ConeKind::Orthant)
    }

    /// Builds a cone from both of its descriptions. The descriptions are
    /// checked for cross-consistency (`z*·g ≥ -TOL_GEOM`) and for a
    /// pointedness witness among nonnegative combinations of dual generators.
    pub fn generated(primal: Vec<Point>, dual: Vec<Point>) -> Result<Cone> {
        if primal.is_empty() || dual.is_empty() {
            return Err(Error::InvalidDimension("cone needs primal and dual generators".into()));
        }
        let dim = primal[0].len();
        if dim == 0 {
            return Err(Error::InvalidDimension("generators of dimension 0".into()));
        }
        for v in primal.iter().chain(&dual) {
            if v.len() != dim {
                return Err(Error::InvalidDimension(format!("generator {v:?} does not have dimension {dim}")));
            }
            if norm_inf(v) == 0.0 {
                return Err(Error::InvalidDimension("zero generator".into()));
            }
        }
        for (j, z) in dual.iter().enumerate() {
            for (i, g) in primal.iter().enumerate() {
                let product = dot(z, g);
                if product < -TOL_GEOM {
                    return Err(Error::InconsistentDescriptions { primal: i, dual: j, product });
                }
            }
        }
        Cone::assemble(primal, dual, ConeKind::Generated)
    }

    fn assemble(primal: Vec<Point>, dual: Vec<Point>, kind: ConeKind) -> Result<Cone> {
        let dim = primal[0].len();
        let witness = find_witness(&primal, &dual).ok_or(Error::NonPointedCone)?;
        let rays_2d = if dim == 2 { extreme_rays_2d(&primal, &witness) } else { None };
        let mut cone = Cone { dim, primal, dual, kind, witness, rays_2d, certificate: Vec::new() };
        cone.certificate = cone.certificate_directions();
        Ok(cone)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> ConeKind {
        self.kind
    }

    pub fn primal_generators(&self) -> &[Point] {
        &self.primal
    }

    pub fn dual_generators(&self) -> &[Point] {
        &self.dual
    }

    /// A dual vector strictly positive on every primal generator.
    pub fn pointedness_witness(&self) -> &[f64] {
        &self.witness
    }

    /// The two extreme rays of a planar cone with nonempty interior.
    pub fn extreme_rays_2d(&self) -> Option<&[Point; 2]> {
        self.rays_2d.as_ref()
    }

    /// Sampled dual directions used for membership certificates when no exact
    /// planar test applies.
    pub fn certificate(&self) -> &[Point] {
        &self.certificate
    }

    pub fn spec(&self) -> ConeSpec {
        match self.kind {
            ConeKind::Orthant => ConeSpec::Orthant { dim: self.dim },
            ConeKind::Generated => ConeSpec::Generated { primal: self.primal.clone(), dual: self.dual.clone() },
        }
    }

    /// `z* ∈ C⁺` up to `tol`.
    pub fn dual_contains(&self, z: &[f64], tol: f64) -> bool {
        z.len() == self.dim && self.primal.iter().all(|g| dot(z, g) >= -tol)
    }

    /// `z ∈ C` up to `tol`, decided through the dual description.
    pub fn contains(&self, z: &[f64], tol: f64) -> bool {
        z.len() == self.dim && self.dual.iter().all(|d| dot(d, z) >= -tol)
    }

    /// The reflected cone `-C`.
    pub fn negated(&self) -> Cone {
        let neg = |vs: &[Point]| vs.iter().map(|v| v.iter().map(|x| -x).collect()).collect();
        let primal: Vec<Point> = neg(&self.primal);
        let dual: Vec<Point> = neg(&self.dual);
        Cone::assemble(primal, dual, ConeKind::Generated).expect("negation preserves pointedness")
    }

    /// Anchor `ẑ = Σ g` over primal generators, when it is strictly positive on
    /// every dual generator.
    pub fn default_anchor(&self) -> Option<Point> {
        let ones = vec![1.0; self.primal.len()];
        let anchor = combination(&ones, &self.primal);
        self.dual.iter().all(|d| dot(d, &anchor) > TOL_GEOM).then_some(anchor)
    }

    /// Directions on the base `B⁺(ẑ) = {z* ∈ C⁺ : z*·ẑ = 1}`: the normalized
    /// dual generators together with a barycentric grid over them with
    /// `resolution` levels per simplex edge, deduplicated.
    pub fn base_directions(&self, anchor: &[f64], resolution: usize) -> Result<DualBase> {
        self.check_anchor(anchor)?;
        if resolution == 0 {
            return Err(Error::InvalidInput("base resolution must be positive".into()));
        }
        let weights: Vec<Point> = compositions(self.dual.len(), resolution)
            .into_iter()
            .map(|k| k.into_iter().map(|ki| ki as f64 / resolution as f64).collect())
            .collect();
        DualBase::from_weights(self.clone(), anchor.to_vec(), weights)
    }

    /// Directions in the relative interior of the base: barycentric weights
    /// `k/(count+1)` with every weight strictly positive. For a planar cone
    /// this yields exactly `count` directions.
    pub fn interior_directions(&self, anchor: &[f64], count: usize) -> Result<DualBase> {
        self.check_anchor(anchor)?;
        if count == 0 {
            return Err(Error::InvalidInput("direction count must be positive".into()));
        }
        let parts = self.dual.len();
        let resolution = if parts <= 1 { 1 } else { count + 1 };
        let weights: Vec<Point> = compositions(parts, resolution)
            .into_iter()
            .filter(|k| k.iter().all(|&ki| ki > 0))
            .map(|k| k.into_iter().map(|ki| ki as f64 / resolution as f64).collect())
            .collect();
        if weights.is_empty() {
            return Err(Error::InvalidInput(format!(
                "{count} interior levels leave no direction with {parts} dual generators"
            )));
        }
        DualBase::from_weights(self.clone(), anchor.to_vec(), weights)
    }

    fn check_anchor(&self, anchor: &[f64]) -> Result<()> {
        if anchor.len() != self.dim {
            return Err(Error::InvalidAnchor(format!("anchor has dimension {}", anchor.len())));
        }
        for d in &self.dual {
            if dot(d, anchor) <= 0.0 {
                return Err(Error::InvalidAnchor(format!(
                    "dual generator {d:?} is not strictly positive on the anchor"
                )));
            }
        }
        Ok(())
    }

    fn certificate_directions(&self) -> Vec<Point> {
        let resolution = match self.dim {
            1 | 2 => 64,
            3 => 12,
            _ => 4,
        };
        let mut dirs: Vec<Point> = Vec::new();
        if let Some(anchor) = self.default_anchor() {
            if let Ok(base) = self.base_directions(&anchor, resolution) {
                dirs = base.directions;
            }
        }
        if dirs.is_empty() {
            dirs = self.dual.clone();
        }
        dirs
    }
}

impl Serialize for Cone {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.spec().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Cone {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        ConeSpec::deserialize(d)?.build().map_err(serde::de::Error::custom)
    }
}

// Nonnegative combinations of dual generators on a coarse simplex grid; the
// barycenter comes first since it succeeds whenever any combination does.
fn find_witness(primal: &[Point], dual: &[Point]) -> Option<Point> {
    let positive = |w: &Point| primal.iter().all(|g| dot(w, g) > TOL_GEOM);
    let k = dual.len();
    let barycenter = combination(&vec![1.0 / k as f64; k], dual);
    if positive(&barycenter) {
        return Some(barycenter);
    }
    let mut resolution = WITNESS_RESOLUTION;
    while resolution > 1 && binomial(resolution + k - 1, k - 1) > WITNESS_MAX_CANDIDATES {
        resolution -= 1;
    }
    compositions(k, resolution)
        .into_iter()
        .map(|c| {
            let w: Vec<f64> = c.into_iter().map(|ci| ci as f64 / resolution as f64).collect();
            combination(&w, dual)
        })
        .find(positive)
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

fn extreme_rays_2d(primal: &[Point], witness: &[f64]) -> Option<[Point; 2]> {
    let angle = |g: &Point| cross2(witness, g).atan2(dot(witness, g));
    let mut lo = &primal[0];
    let mut hi = &primal[0];
    for g in primal {
        if angle(g) < angle(lo) {
            lo = g;
        }
        if angle(g) > angle(hi) {
            hi = g;
        }
    }
    (angle(hi) - angle(lo) > 1e-12).then(|| [lo.clone(), hi.clone()])
}

/// A finite direction set on a base `B⁺(ẑ)` of the dual cone.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualBase {
    #[serde(skip)]
    cone: Cone,
    anchor: Point,
    directions: Vec<Point>,
    /// Barycentric weights over the normalized dual generators.
    weights: Vec<Point>,
}

impl DualBase {
    /// Builds directions `Σ wᵢ ĝᵢ` from barycentric weights over the dual
    /// generators normalized to `ĝᵢ·ẑ = 1`. Duplicates (within `TOL_GEOM`) are
    /// dropped, keeping the first occurrence.
    pub fn from_weights(cone: Cone, anchor: Point, weights: Vec<Point>) -> Result<DualBase> {
        cone.check_anchor(&anchor)?;
        let normalized: Vec<Point> = cone
            .dual
            .iter()
            .map(|d| {
                let s = dot(d, &anchor);
                d.iter().map(|x| x / s).collect()
            })
            .collect();
        let mut directions: Vec<Point> = Vec::with_capacity(weights.len());
        let mut kept_weights = Vec::with_capacity(weights.len());
        for w in weights {
            if w.len() != normalized.len() || w.iter().any(|x| *x < 0.0) {
                return Err(Error::InvalidInput(format!("bad barycentric weights {w:?}")));
            }
            let mut z = combination(&w, &normalized);
            let s = dot(&z, &anchor);
            if s <= 0.0 {
                return Err(Error::InvalidInput(format!("weights {w:?} give a zero direction")));
            }
            z.iter_mut().for_each(|x| *x /= s);
            if directions.iter().all(|q| crate::linalg::dist_inf(q, &z) > TOL_GEOM) {
                directions.push(z);
                kept_weights.push(w);
            }
        }
        if directions.is_empty() {
            return Err(Error::InvalidInput("empty direction base".into()));
        }
        Ok(DualBase { cone, anchor, directions, weights: kept_weights })
    }

    /// A base made of a single explicit direction (normalized on the anchor).
    pub fn single(cone: Cone, anchor: Point, direction: &[f64]) -> Result<DualBase> {
        cone.check_anchor(&anchor)?;
        if !cone.dual_contains(direction, TOL_GEOM) {
            return Err(Error::InvalidDirection(direction.to_vec()));
        }
        let s = dot(direction, &anchor);
        if s <= 0.0 {
            return Err(Error::InvalidDirection(direction.to_vec()));
        }
        let z: Point = direction.iter().map(|x| x / s).collect();
        Ok(DualBase { cone, anchor, directions: vec![z], weights: vec![Vec::new()] })
    }

    pub fn cone(&self) -> &Cone {
        &self.cone
    }

    pub fn anchor(&self) -> &[f64] {
        &self.anchor
    }

    pub fn directions(&self) -> &[Point] {
        &self.directions
    }

    pub fn weights(&self) -> &[Point] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// Union of two bases over the same cone and anchor, deduplicated.
    pub fn merged(&self, other: &DualBase) -> Result<DualBase> {
        if self.cone != other.cone {
            return Err(Error::IncompatibleCone);
        }
        let mut out = self.clone();
        for (z, w) in other.directions.iter().zip(&other.weights) {
            if out.directions.iter().all(|q| crate::linalg::dist_inf(q, z) > TOL_GEOM) {
                out.directions.push(z.clone());
                out.weights.push(w.clone());
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64]) -> bool {
        crate::linalg::dist_inf(a, b) < 1e-12
    }

    #[test]
    fn orthant_is_self_dual() {
        let c = Cone::orthant(2).unwrap();
        assert_eq!(c.primal_generators(), &[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(c.primal_generators(), c.dual_generators());
        assert_eq!(c.kind(), ConeKind::Orthant);
        let c1 = Cone::orthant(1).unwrap();
        assert_eq!(c1.primal_generators(), &[vec![1.0]]);
        let c3 = Cone::orthant(3).unwrap();
        for g in c3.primal_generators() {
            for z in c3.dual_generators() {
                let p = dot(g, z);
                assert!(p == 0.0 || p == 1.0);
            }
        }
    }

    #[test]
    fn orthant_rejects_dimension_zero() {
        assert!(matches!(Cone::orthant(0), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn generated_cone_accepts_consistent_descriptions() {
        // products: (0,1)·(1,0)=0, (0,1)·(1,1)=1, (1,-1)·(1,0)=1, (1,-1)·(1,1)=0
        let c = Cone::generated(vec![vec![1.0, 0.0], vec![1.0, 1.0]], vec![vec![0.0, 1.0], vec![1.0, -1.0]]).unwrap();
        assert_eq!(c.kind(), ConeKind::Generated);
        let w = c.pointedness_witness();
        assert!(c.primal_generators().iter().all(|g| dot(w, g) > 0.0));
        assert!(c.extreme_rays_2d().is_some());
    }

    #[test]
    fn generated_cone_with_a_line_is_not_pointed() {
        let r = Cone::generated(vec![vec![1.0, 0.0], vec![-1.0, 0.0]], vec![vec![0.0, 1.0]]);
        assert_eq!(r, Err(Error::NonPointedCone));
    }

    #[test]
    fn witness_search_fails_without_strictly_positive_combination() {
        let r = Cone::generated(vec![vec![1.0, 0.0]], vec![vec![0.0, 1.0]]);
        assert_eq!(r, Err(Error::NonPointedCone));
    }

    #[test]
    fn inconsistent_descriptions_are_rejected() {
        let r = Cone::generated(vec![vec![1.0, 0.0]], vec![vec![-1.0, 1.0]]);
        assert!(matches!(r, Err(Error::InconsistentDescriptions { .. })));
    }

    #[test]
    fn dual_membership() {
        let c = Cone::orthant(2).unwrap();
        assert!(c.dual_contains(&[1.0, 1.0], 0.0));
        assert!(!c.dual_contains(&[1.0, -1.0], 0.0));
        let g = Cone::generated(vec![vec![1.0, 0.0], vec![1.0, 1.0]], vec![vec![0.0, 1.0], vec![1.0, -1.0]]).unwrap();
        assert!(g.dual_contains(&[0.0, 1.0], 0.0));
        assert!(!g.dual_contains(&[-1.0, 0.5], 0.0));
    }

    #[test]
    fn base_directions_examples() {
        let c = Cone::orthant(2).unwrap();
        let b1 = c.base_directions(&[1.0, 1.0], 1).unwrap();
        assert_eq!(b1.len(), 2);
        assert!(b1.directions().iter().any(|z| close(z, &[1.0, 0.0])));
        assert!(b1.directions().iter().any(|z| close(z, &[0.0, 1.0])));
        let b2 = c.base_directions(&[1.0, 1.0], 2).unwrap();
        assert_eq!(b2.len(), 3);
        assert!(b2.directions().iter().any(|z| close(z, &[0.5, 0.5])));
        let c3 = Cone::orthant(3).unwrap();
        assert_eq!(c3.base_directions(&[1.0, 1.0, 1.0], 2).unwrap().len(), 6);
    }

    #[test]
    fn base_direction_weights_follow_alpha() {
        let c = Cone::orthant(2).unwrap();
        let b = c.base_directions(&[1.0, 1.0], 10).unwrap();
        for (k, (z, w)) in b.directions().iter().zip(b.weights()).enumerate() {
            let alpha = k as f64 / 10.0;
            assert!((w[0] - alpha).abs() < 1e-15);
            assert!(close(z, &[alpha, 1.0 - alpha]));
        }
    }

    #[test]
    fn interior_directions_skip_extremes() {
        let c = Cone::orthant(2).unwrap();
        let b = c.interior_directions(&[1.0, 1.0], 9).unwrap();
        assert_eq!(b.len(), 9);
        assert!(close(&b.directions()[0], &[0.1, 0.9]));
        let c1 = Cone::orthant(1).unwrap();
        assert_eq!(c1.interior_directions(&[1.0], 9).unwrap().len(), 1);
    }

    #[test]
    fn invalid_anchor_is_rejected() {
        let c = Cone::orthant(2).unwrap();
        assert!(matches!(c.base_directions(&[1.0, 0.0], 2), Err(Error::InvalidAnchor(_))));
    }

    #[test]
    fn base_directions_lie_in_dual_and_scale_with_anchor() {
        let g = Cone::generated(vec![vec![1.0, 0.0], vec![1.0, 1.0]], vec![vec![0.0, 1.0], vec![1.0, -1.0]]).unwrap();
        let anchor = vec![2.0, 1.0];
        let b = g.base_directions(&anchor, 5).unwrap();
        let b2 = g.base_directions(&[6.0, 3.0], 5).unwrap();
        for (z, z2) in b.directions().iter().zip(b2.directions()) {
            assert!(g.dual_contains(z, TOL_GEOM));
            assert!((dot(z, &anchor) - 1.0).abs() < 1e-12);
            assert!(close(&crate::linalg::scaled(1.0 / 3.0, z), z2));
        }
        // normalized dual generators are present
        for d in g.dual_generators() {
            let s = dot(d, &anchor);
            let n: Point = d.iter().map(|x| x / s).collect();
            assert!(b.directions().iter().any(|z| close(z, &n)));
        }
    }

    #[test]
    fn negated_cone_flips_membership() {
        let c = Cone::orthant(2).unwrap();
        let n = c.negated();
        assert!(n.contains(&[-1.0, -2.0], 0.0));
        assert!(!n.contains(&[1.0, 0.0], 0.0));
        assert!(n.extreme_rays_2d().is_some());
    }

    #[test]
    fn cone_json_round_trip() {
        let c: Cone = serde_json::from_str(r#"{"kind":"orthant","dim":2}"#).unwrap();
        assert_eq!(c, Cone::orthant(2).unwrap());
        let g: Cone =
            serde_json::from_str(r#"{"kind":"generated","primal":[[1,0],[1,1]],"dual":[[0,1],[1,-1]]}"#).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        let back: Cone = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
    }

    use proptest::prelude::*;

    proptest! {
        #[test]
        fn orthant_dual_membership_is_coordinatewise(z in proptest::collection::vec(-2.0f64..2.0, 3)) {
            let c = Cone::orthant(3).unwrap();
            prop_assert_eq!(c.dual_contains(&z, 1e-9), z.iter().all(|x| *x >= -1e-9));
        }
    }
}
