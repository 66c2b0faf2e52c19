//! Homomorphisms, anti-homomorphisms and the extended symmetry group.
//!
//! Composition convention throughout: `(f ∘ g)(x) = f(g(x))`.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{ElementSubset, FiniteGroup, GroupError};

/// Largest group order accepted by the symmetry enumerators.
pub const MAX_SYMMETRY_ORDER: usize = 16;

/// Largest group order accepted by the brute-force bijection scan.
pub const MAX_SCAN_ORDER: usize = 9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MorphismError {
    #[error("image list has {found} entries, source group has order {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("image {image} at position {position} is out of range for a target of order {order}")]
    IndexOutOfRange {
        position: usize,
        image: usize,
        order: usize,
    },
    #[error("cannot compose: inner map lands in {inner_target:?}, outer map starts at {outer_source:?}")]
    SourceTargetMismatch {
        outer_source: String,
        inner_target: String,
    },
    #[error("map is not bijective")]
    NotBijective,
    #[error("map is not an automorphism")]
    NotAutomorphism,
    #[error("group of order {order} exceeds the enumeration limit {limit}")]
    GroupTooLarge { order: usize, limit: usize },
    #[error("unknown named map {0:?}")]
    UnknownMap(String),
    #[error(transparent)]
    Group(#[from] GroupError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MapKind {
    #[serde(rename = "hom")]
    Homomorphism,
    #[serde(rename = "anti")]
    AntiHomomorphism,
    #[serde(rename = "both")]
    Both,
    #[serde(rename = "neither")]
    Neither,
}

impl MapKind {
    fn from_laws(hom: bool, anti: bool) -> Self {
        match (hom, anti) {
            (true, true) => Self::Both,
            (true, false) => Self::Homomorphism,
            (false, true) => Self::AntiHomomorphism,
            (false, false) => Self::Neither,
        }
    }

    pub fn is_hom(self) -> bool {
        matches!(self, Self::Homomorphism | Self::Both)
    }

    pub fn is_anti(self) -> bool {
        matches!(self, Self::AntiHomomorphism | Self::Both)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Homomorphism => "hom",
            Self::AntiHomomorphism => "anti",
            Self::Both => "both",
            Self::Neither => "neither",
        }
    }
}

impl fmt::Display for MapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A map between two finite groups together with its classification.
///
/// Equality is image-sequence equality between the same pair of groups.
#[derive(Debug, Clone)]
pub struct GroupMap {
    source: Arc<FiniteGroup>,
    target: Arc<FiniteGroup>,
    images: Vec<usize>,
    kind: MapKind,
    bijective: bool,
}

impl PartialEq for GroupMap {
    fn eq(&self, other: &Self) -> bool {
        self.images == other.images
            && same_group(&self.source, &other.source)
            && same_group(&self.target, &other.target)
    }
}

impl Eq for GroupMap {}

fn same_group(a: &Arc<FiniteGroup>, b: &Arc<FiniteGroup>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// Serialized form of a [`GroupMap`]: images are target labels in source
/// element order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapRecord {
    pub source: String,
    pub target: String,
    pub images: Vec<String>,
    pub kind: MapKind,
}

/// Classifies `images` as a map from `source` to `target` by checking both
/// multiplication laws exhaustively.
pub fn classify_map(
    source: &Arc<FiniteGroup>,
    target: &Arc<FiniteGroup>,
    images: Vec<usize>,
) -> Result<GroupMap, MorphismError> {
    if images.len() != source.order() {
        return Err(MorphismError::LengthMismatch {
            expected: source.order(),
            found: images.len(),
        });
    }
    if let Some((position, &image)) = images.iter().find_position(|&&h| h >= target.order()) {
        return Err(MorphismError::IndexOutOfRange {
            position,
            image,
            order: target.order(),
        });
    }
    let (mut hom, mut anti) = (true, true);
    'outer: for g in source.elements() {
        for h in source.elements() {
            let lhs = images[source.mul(g, h)];
            hom &= lhs == target.mul(images[g], images[h]);
            anti &= lhs == target.mul(images[h], images[g]);
            if !hom && !anti {
                break 'outer;
            }
        }
    }
    let bijective = source.order() == target.order() && images.iter().all_unique();
    Ok(GroupMap {
        source: Arc::clone(source),
        target: Arc::clone(target),
        images,
        kind: MapKind::from_laws(hom, anti),
        bijective,
    })
}

/// Classifies a self-map of `group`.
pub fn classify_self_map(
    group: &Arc<FiniteGroup>,
    images: Vec<usize>,
) -> Result<GroupMap, MorphismError> {
    classify_map(group, group, images)
}

/// Self-map given as `(from_label, to_label)` pairs; unlisted elements are
/// fixed.
pub fn self_map_from_labels(
    group: &Arc<FiniteGroup>,
    pairs: &[(&str, &str)],
) -> Result<GroupMap, MorphismError> {
    let mut images: Vec<usize> = group.elements().collect();
    for (from, to) in pairs {
        images[group.index_of(from)?] = group.index_of(to)?;
    }
    classify_self_map(group, images)
}

impl GroupMap {
    pub fn source(&self) -> &Arc<FiniteGroup> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FiniteGroup> {
        &self.target
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn image(&self, g: usize) -> usize {
        self.images[g]
    }

    pub fn kind(&self) -> MapKind {
        self.kind
    }

    pub fn is_bijective(&self) -> bool {
        self.bijective
    }

    pub fn is_identity(&self) -> bool {
        same_group(&self.source, &self.target) && self.images.iter().enumerate().all(|(g, &h)| g == h)
    }

    /// Automorphism or anti-automorphism of its source.
    pub fn is_symmetry(&self) -> bool {
        self.bijective && self.kind != MapKind::Neither && same_group(&self.source, &self.target)
    }

    pub fn to_record(&self) -> MapRecord {
        MapRecord {
            source: self.source.name().to_string(),
            target: self.target.name().to_string(),
            images: self
                .images
                .iter()
                .map(|&h| self.target.label(h).to_string())
                .collect(),
            kind: self.kind,
        }
    }

    /// Rebuilds a map from its serialized form. The stored kind is ignored
    /// and recomputed.
    pub fn from_record(
        record: &MapRecord,
        source: &Arc<FiniteGroup>,
        target: &Arc<FiniteGroup>,
    ) -> Result<Self, MorphismError> {
        let images = record
            .images
            .iter()
            .map(|l| target.index_of(l))
            .collect::<Result<Vec<_>, _>>()?;
        classify_map(source, target, images)
    }

    /// Human-readable `g->f(g)` listing of the non-fixed points (for
    /// self-maps) or of every point.
    pub fn describe(&self) -> String {
        let self_map = same_group(&self.source, &self.target);
        let moved: Vec<String> = self
            .images
            .iter()
            .enumerate()
            .filter(|&(g, &h)| !self_map || g != h)
            .map(|(g, &h)| format!("{}->{}", self.source.label(g), self.target.label(h)))
            .collect();
        if moved.is_empty() {
            "id".to_string()
        } else {
            moved.join(", ")
        }
    }
}

impl fmt::Display for GroupMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]", self.kind, self.describe())
    }
}

/// `outer ∘ inner`. The kind predicted by the sign rule (hom∘hom and
/// anti∘anti are homs, mixed pairs are anti) is checked against a full
/// reclassification of the composite.
pub fn compose_maps(outer: &GroupMap, inner: &GroupMap) -> Result<GroupMap, MorphismError> {
    if !same_group(&inner.target, &outer.source) {
        return Err(MorphismError::SourceTargetMismatch {
            outer_source: outer.source.name().to_string(),
            inner_target: inner.target.name().to_string(),
        });
    }
    let images = inner.images.iter().map(|&h| outer.images[h]).collect();
    let composed = classify_map(&inner.source, &outer.target, images)?;
    let (o, i) = (outer.kind, inner.kind);
    let predicted_hom = (o.is_hom() && i.is_hom()) || (o.is_anti() && i.is_anti());
    let predicted_anti = (o.is_hom() && i.is_anti()) || (o.is_anti() && i.is_hom());
    debug_assert!(!predicted_hom || composed.kind.is_hom());
    debug_assert!(!predicted_anti || composed.kind.is_anti());
    Ok(composed)
}

pub fn invert_map(f: &GroupMap) -> Result<GroupMap, MorphismError> {
    if !f.bijective {
        return Err(MorphismError::NotBijective);
    }
    let mut images = vec![0; f.target.order()];
    for (g, &h) in f.images.iter().enumerate() {
        images[h] = g;
    }
    let inverse = classify_map(&f.target, &f.source, images)?;
    debug_assert_eq!(inverse.kind, f.kind);
    Ok(inverse)
}

pub fn identity_map(group: &Arc<FiniteGroup>) -> GroupMap {
    classify_self_map(group, group.elements().collect()).expect("identity images are valid")
}

/// `g -> g^{-1}`: always an anti-automorphism, and also a homomorphism
/// exactly when the group is commutative.
pub fn inversion_map(group: &Arc<FiniteGroup>) -> GroupMap {
    let images = group.elements().map(|g| group.inv(g)).collect();
    classify_self_map(group, images).expect("inverse images are valid")
}

fn check_symmetry_size(group: &FiniteGroup, limit: usize) -> Result<(), MorphismError> {
    if group.order() > limit {
        Err(MorphismError::GroupTooLarge {
            order: group.order(),
            limit,
        })
    } else {
        Ok(())
    }
}

/// Greedy generating set: scan elements in index order and keep each one not
/// already in the span of those kept.
pub fn generating_set(group: &FiniteGroup) -> Vec<usize> {
    let mut gens = Vec::new();
    let mut span = BTreeSet::from([group.identity()]);
    for g in group.elements() {
        if !span.contains(&g) {
            gens.push(g);
            span = group
                .generated_subgroup(&gens)
                .expect("indices are in range")
                .members()
                .clone();
        }
    }
    gens
}

/// Extends `gens[..] -> targets[..]` to a homomorphism on the subgroup they
/// generate by walking the Cayley graph. Returns `None` on an ill-defined or
/// non-injective extension.
fn extend_on_generators(
    group: &FiniteGroup,
    gens: &[usize],
    targets: &[usize],
) -> Option<Vec<Option<usize>>> {
    let n = group.order();
    let mut images: Vec<Option<usize>> = vec![None; n];
    let mut used = vec![false; n];
    images[group.identity()] = Some(group.identity());
    used[group.identity()] = true;
    let mut frontier = vec![group.identity()];
    while let Some(g) = frontier.pop() {
        let fg = images[g].expect("frontier elements are mapped");
        for (&s, &t) in gens.iter().zip(targets) {
            let gs = group.mul(g, s);
            let want = group.mul(fg, t);
            match images[gs] {
                Some(existing) if existing != want => return None,
                Some(_) => {}
                None => {
                    if used[want] {
                        return None;
                    }
                    used[want] = true;
                    images[gs] = Some(want);
                    frontier.push(gs);
                }
            }
        }
    }
    Some(images)
}

/// All automorphisms, found by backtracking over images of a generating set.
/// Each partial choice is extended over the subgroup it generates and pruned
/// on the first inconsistency.
pub fn automorphisms(group: &Arc<FiniteGroup>) -> Result<Vec<GroupMap>, MorphismError> {
    check_symmetry_size(group, MAX_SYMMETRY_ORDER)?;
    let gens = generating_set(group);
    let orders: Vec<usize> = group
        .elements()
        .map(|g| group.element_order(g))
        .collect::<Result<_, _>>()?;

    fn search(
        group: &Arc<FiniteGroup>,
        gens: &[usize],
        orders: &[usize],
        targets: &mut Vec<usize>,
        out: &mut Vec<GroupMap>,
    ) {
        let depth = targets.len();
        if depth == gens.len() {
            let images = extend_on_generators(group, gens, targets)
                .expect("checked at the previous depth")
                .into_iter()
                .map(|h| h.expect("generators span the group"))
                .collect();
            let map = classify_self_map(group, images).expect("images are in range");
            if map.bijective && map.kind.is_hom() {
                out.push(map);
            }
            return;
        }
        let g = gens[depth];
        for t in group.elements() {
            if orders[t] != orders[g] || targets.contains(&t) {
                continue;
            }
            targets.push(t);
            if extend_on_generators(group, &gens[..=depth], targets).is_some() {
                search(group, gens, orders, targets, out);
            }
            targets.pop();
        }
    }

    let mut out = Vec::new();
    search(group, &gens, &orders, &mut Vec::new(), &mut out);
    out.sort_by(|a, b| a.images.cmp(&b.images));
    Ok(out)
}

/// All automorphisms and, when `include_anti`, anti-automorphisms of
/// `group`, sorted by image sequence. Anti-automorphisms are obtained as
/// `a ∘ inversion` for each automorphism `a`; on a commutative group the two
/// sets coincide and each map appears once with kind `Both`.
pub fn enumerate_symmetries(
    group: &Arc<FiniteGroup>,
    include_anti: bool,
) -> Result<Vec<GroupMap>, MorphismError> {
    let mut maps = automorphisms(group)?;
    if include_anti && !group.is_commutative() {
        let inversion = inversion_map(group);
        let anti: Vec<GroupMap> = maps
            .iter()
            .map(|a| compose_maps(a, &inversion))
            .collect::<Result<_, _>>()?;
        maps.extend(anti);
        maps.sort_by(|a, b| a.images.cmp(&b.images));
    }
    Ok(maps)
}

/// Brute-force reference enumeration: every bijection fixing the identity,
/// classified exhaustively, keeping those that are automorphisms or
/// anti-automorphisms. Feasible up to order [`MAX_SCAN_ORDER`].
pub fn scan_identity_fixing_bijections(
    group: &Arc<FiniteGroup>,
) -> Result<ScanReport, MorphismError> {
    check_symmetry_size(group, MAX_SCAN_ORDER)?;
    let e = group.identity();
    let others: Vec<usize> = group.elements().filter(|&g| g != e).collect();
    let mut report = ScanReport::default();
    for perm in others.iter().copied().permutations(others.len()) {
        report.candidates += 1;
        let mut images = vec![e; group.order()];
        for (&g, h) in others.iter().zip(perm) {
            images[g] = h;
        }
        let map = classify_self_map(group, images)?;
        if map.kind != MapKind::Neither {
            report.symmetries.push(map);
        }
    }
    report.symmetries.sort_by(|a, b| a.images.cmp(&b.images));
    Ok(report)
}

#[derive(Debug, Clone, Default)]
pub struct ScanReport {
    /// Number of identity-fixing bijections examined.
    pub candidates: usize,
    pub symmetries: Vec<GroupMap>,
}

impl ScanReport {
    pub fn automorphism_count(&self) -> usize {
        self.symmetries.iter().filter(|m| m.kind.is_hom()).count()
    }

    pub fn anti_automorphism_count(&self) -> usize {
        self.symmetries.iter().filter(|m| m.kind.is_anti()).count()
    }
}

/// Automorphisms and anti-automorphisms of a group, packaged as a group
/// under composition.
#[derive(Debug, Clone)]
pub struct SymmetryGroup {
    base: Arc<FiniteGroup>,
    maps: Vec<GroupMap>,
    as_group: FiniteGroup,
}

pub fn symmetry_group(group: &Arc<FiniteGroup>) -> Result<SymmetryGroup, MorphismError> {
    let maps = enumerate_symmetries(group, true)?;
    let position = |images: &[usize]| {
        maps.binary_search_by(|m| m.images.as_slice().cmp(images))
            .expect("symmetries are closed under composition")
    };
    let table = maps
        .iter()
        .map(|outer| {
            maps.iter()
                .map(|inner| {
                    let composed: Vec<usize> =
                        inner.images.iter().map(|&h| outer.images[h]).collect();
                    position(&composed)
                })
                .collect()
        })
        .collect();
    let identity = position(&group.elements().collect::<Vec<_>>());
    let labels = maps
        .iter()
        .map(|m| {
            let images = m.images.iter().map(|&h| group.label(h)).join(",");
            format!("{}({})", m.kind, images)
        })
        .collect();
    let as_group = FiniteGroup::new(format!("Sym({})", group.name()), labels, table, identity)?;
    Ok(SymmetryGroup {
        base: Arc::clone(group),
        maps,
        as_group,
    })
}

impl SymmetryGroup {
    pub fn base(&self) -> &Arc<FiniteGroup> {
        &self.base
    }

    pub fn maps(&self) -> &[GroupMap] {
        &self.maps
    }

    pub fn as_group(&self) -> &FiniteGroup {
        &self.as_group
    }

    pub fn order(&self) -> usize {
        self.maps.len()
    }

    pub fn position(&self, map: &GroupMap) -> Option<usize> {
        self.maps
            .binary_search_by(|m| m.images.as_slice().cmp(&map.images))
            .ok()
            .filter(|&p| self.maps[p] == *map)
    }

    pub fn automorphism_count(&self) -> usize {
        self.maps.iter().filter(|m| m.kind.is_hom()).count()
    }

    pub fn anti_automorphism_count(&self) -> usize {
        self.maps.iter().filter(|m| m.kind.is_anti()).count()
    }

    /// Indices (into `maps`) of the automorphisms.
    pub fn automorphism_subgroup(&self) -> ElementSubset<'_> {
        let members = self
            .maps
            .iter()
            .positions(|m| m.kind.is_hom());
        ElementSubset::new(&self.as_group, members).expect("positions are in range")
    }

    /// Subgroup of `as_group` generated by the given symmetries.
    pub fn generated_subgroup(&self, generators: &[GroupMap]) -> Result<ElementSubset<'_>, MorphismError> {
        let indices = generators
            .iter()
            .map(|g| self.position(g).ok_or(MorphismError::NotAutomorphism))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.as_group.generated_subgroup(&indices)?)
    }

    /// Order of `map` as an element of the symmetry group.
    pub fn map_order(&self, map: &GroupMap) -> Option<usize> {
        let p = self.position(map)?;
        self.as_group.element_order(p).ok()
    }
}

/// Conjugations `g -> h g h^{-1}`, deduplicated and sorted by images.
pub fn inner_automorphisms(group: &Arc<FiniteGroup>) -> Vec<GroupMap> {
    let images: BTreeSet<Vec<usize>> = group
        .elements()
        .map(|h| {
            group
                .elements()
                .map(|g| group.mul(group.mul(h, g), group.inv(h)))
                .collect()
        })
        .collect();
    images
        .into_iter()
        .map(|im| classify_self_map(group, im).expect("conjugation images are valid"))
        .collect()
}

/// True when `f` is an automorphism that is not a conjugation.
pub fn is_outer(f: &GroupMap) -> Result<bool, MorphismError> {
    if !same_group(&f.source, &f.target) || !f.bijective || !f.kind.is_hom() {
        return Err(MorphismError::NotAutomorphism);
    }
    Ok(!inner_automorphisms(&f.source).iter().any(|inner| inner == f))
}

/// Exhaustive isomorphism search by backtracking, matching element orders
/// and checking the multiplication law on every pair of assigned elements.
/// Returns the lexicographically first isomorphism.
pub fn find_isomorphism(
    source: &Arc<FiniteGroup>,
    target: &Arc<FiniteGroup>,
) -> Result<Option<GroupMap>, MorphismError> {
    if source.order() != target.order() {
        return Ok(None);
    }
    let orders = |g: &FiniteGroup| -> Result<Vec<usize>, GroupError> {
        g.elements().map(|x| g.element_order(x)).collect()
    };
    let (src_orders, tgt_orders) = (orders(source)?, orders(target)?);

    fn extend(
        source: &FiniteGroup,
        target: &FiniteGroup,
        src_orders: &[usize],
        tgt_orders: &[usize],
        images: &mut Vec<usize>,
        used: &mut [bool],
    ) -> bool {
        let g = images.len();
        if g == source.order() {
            return true;
        }
        for t in target.elements() {
            if used[t] || src_orders[g] != tgt_orders[t] {
                continue;
            }
            images.push(t);
            let consistent = (0..=g).all(|a| {
                [(a, g), (g, a)].iter().all(|&(p, q)| {
                    let pq = source.mul(p, q);
                    pq > g || images[pq] == target.mul(images[p], images[q])
                })
            });
            if consistent {
                used[t] = true;
                if extend(source, target, src_orders, tgt_orders, images, used) {
                    return true;
                }
                used[t] = false;
            }
            images.pop();
        }
        false
    }

    let mut images = Vec::with_capacity(source.order());
    let mut used = vec![false; target.order()];
    if !extend(source, target, &src_orders, &tgt_orders, &mut images, &mut used) {
        return Ok(None);
    }
    let map = classify_map(source, target, images)?;
    debug_assert!(map.bijective && map.kind.is_hom());
    Ok(Some(map))
}

/// Named symmetries of the quaternion group with labels
/// `1, -1, i, -i, j, -j, k, -k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuaternionSymmetry {
    Identity,
    /// Anti-automorphism `i -> k, j -> -i, k -> j`.
    Lambda,
    /// Anti-automorphism `i -> j, j -> -k, k -> i`.
    Sigma,
    /// Automorphism of order 3 cycling `i -> j -> k -> i`.
    Tau,
    /// `g -> g^{-1}`.
    Inversion,
}

impl QuaternionSymmetry {
    pub const ALL: [Self; 5] = [
        Self::Identity,
        Self::Lambda,
        Self::Sigma,
        Self::Tau,
        Self::Inversion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Identity => "id",
            Self::Lambda => "lambda",
            Self::Sigma => "sigma",
            Self::Tau => "tau",
            Self::Inversion => "inv",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, MorphismError> {
        Self::ALL
            .into_iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| MorphismError::UnknownMap(name.to_string()))
    }

    /// Images of `i`, `j`, `k`; negatives follow by `f(-g) = -f(g)`.
    fn unit_images(self) -> Option<[&'static str; 3]> {
        match self {
            Self::Identity => Some(["i", "j", "k"]),
            Self::Lambda => Some(["k", "-i", "j"]),
            Self::Sigma => Some(["j", "-k", "i"]),
            Self::Tau => Some(["j", "k", "i"]),
            Self::Inversion => None,
        }
    }

    /// Builds the map on `group`, which must carry the quaternion labels
    /// (`inv` and `id` work on any group).
    pub fn build(self, group: &Arc<FiniteGroup>) -> Result<GroupMap, MorphismError> {
        let Some(units) = self.unit_images() else {
            return Ok(inversion_map(group));
        };
        if self == Self::Identity {
            return Ok(identity_map(group));
        }
        let negate = |l: &str| match l.strip_prefix('-') {
            Some(rest) => rest.to_string(),
            None => format!("-{l}"),
        };
        let mut pairs = Vec::new();
        for (unit, image) in ["i", "j", "k"].into_iter().zip(units) {
            pairs.push((unit.to_string(), image.to_string()));
            pairs.push((negate(unit), negate(image)));
        }
        let pairs: Vec<(&str, &str)> = pairs.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        self_map_from_labels(group, &pairs)
    }
}
