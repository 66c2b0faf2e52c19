//! The canonical formula as a role transformation.
//!
//! A formula side `F_x(a):F_y(b)` is built from four role terms over the
//! alphabet `{x, y, a, b}`, each optionally inverted. A [`CFVariant`] pairs a
//! left side with the substitution (`rule`) that rewrites it into the right
//! side. Assigning group elements to the roles turns the rule into a partial
//! map on the group, and a *realization* is an automorphism or
//! anti-automorphism extending that partial map.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{FiniteGroup, GroupError};
use crate::morphisms::{enumerate_symmetries, GroupMap, MorphismError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("right side is not a substitution instance of the left: role {role} would map to both {first} and {second}")]
    InconsistentRule {
        role: Role,
        first: RoleTerm,
        second: RoleTerm,
    },
    #[error("roles {first} and {second} share element {element:?} but are sent to {first_target:?} and {second_target:?}")]
    ConflictingPairs {
        first: Role,
        second: Role,
        element: String,
        first_target: String,
        second_target: String,
    },
    #[error("roles {first} and {second} are both assigned {element:?}; distinct values are required")]
    NotDistinct {
        first: Role,
        second: Role,
        element: String,
    },
    #[error("constraints cannot be satisfied: {0}")]
    UnsatisfiableConstraint(String),
    #[error("the fraction reading needs a commutative group; {0} is not")]
    NonCommutativeGroup(String),
    #[error("chain needs at least one step")]
    NoSteps,
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Morphism(#[from] MorphismError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    X,
    Y,
    A,
    B,
}

impl Role {
    /// Canonical order, also the order used for assignment tuples.
    pub const ALL: [Role; 4] = [Role::X, Role::Y, Role::A, Role::B];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn letter(self) -> char {
        match self {
            Role::X => 'x',
            Role::Y => 'y',
            Role::A => 'a',
            Role::B => 'b',
        }
    }

    pub fn from_letter(c: char) -> Option<Role> {
        Role::ALL.into_iter().find(|r| r.letter() == c)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// A role, or its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RoleTerm {
    pub role: Role,
    pub inverted: bool,
}

impl RoleTerm {
    pub const fn plain(role: Role) -> Self {
        Self {
            role,
            inverted: false,
        }
    }

    pub const fn inverse(role: Role) -> Self {
        Self {
            role,
            inverted: true,
        }
    }

    /// Inverts when `flip` is set; double inversion cancels.
    pub fn toggled(self, flip: bool) -> Self {
        Self {
            role: self.role,
            inverted: self.inverted ^ flip,
        }
    }
}

impl fmt::Display for RoleTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inverted {
            write!(f, "{}^-1", self.role)
        } else {
            write!(f, "{}", self.role)
        }
    }
}

/// `F_function(argument)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ratio {
    pub function: RoleTerm,
    pub argument: RoleTerm,
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}({})", self.function, self.argument)
    }
}

/// `F_f1(a1):F_f2(a2)`. The symbol `F` is formal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FormulaSide {
    pub first: Ratio,
    pub second: Ratio,
}

impl FormulaSide {
    pub fn new(f1: RoleTerm, a1: RoleTerm, f2: RoleTerm, a2: RoleTerm) -> Self {
        Self {
            first: Ratio {
                function: f1,
                argument: a1,
            },
            second: Ratio {
                function: f2,
                argument: a2,
            },
        }
    }

    /// `F_x(a):F_y(b)`.
    pub fn standard() -> Self {
        use Role::*;
        Self::new(RoleTerm::plain(X), RoleTerm::plain(A), RoleTerm::plain(Y), RoleTerm::plain(B))
    }

    /// The four terms in reading order.
    pub fn terms(&self) -> [RoleTerm; 4] {
        [
            self.first.function,
            self.first.argument,
            self.second.function,
            self.second.argument,
        ]
    }

    pub fn from_terms([f1, a1, f2, a2]: [RoleTerm; 4]) -> Self {
        Self::new(f1, a1, f2, a2)
    }

    pub fn rewrite(&self, rule: &RoleRule) -> Self {
        Self::from_terms(self.terms().map(|t| rule.apply(t)))
    }
}

impl fmt::Display for FormulaSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.first, self.second)
    }
}

/// A substitution sending each role to a role term. Inverted terms are
/// rewritten to the inverse of the role's image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RoleRule([RoleTerm; 4]);

impl RoleRule {
    pub fn identity() -> Self {
        Self(Role::ALL.map(RoleTerm::plain))
    }

    /// Rule from `(role, image)` pairs; unlisted roles are fixed.
    pub fn from_pairs(pairs: &[(Role, RoleTerm)]) -> Self {
        let mut rule = Self::identity();
        for &(role, image) in pairs {
            rule.0[role.index()] = image;
        }
        rule
    }

    pub fn image(&self, role: Role) -> RoleTerm {
        self.0[role.index()]
    }

    pub fn apply(&self, term: RoleTerm) -> RoleTerm {
        self.image(term.role).toggled(term.inverted)
    }

    /// Apply `self`, then `next`.
    pub fn then(&self, next: &RoleRule) -> RoleRule {
        RoleRule(self.0.map(|t| next.apply(t)))
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }
}

impl fmt::Display for RoleRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = Role::ALL
            .iter()
            .map(|&r| format!("{}->{}", r, self.image(r)))
            .collect();
        f.write_str(&parts.join(", "))
    }
}

/// A formula schema: a left side and the rule rewriting it into the right.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CFVariant {
    name: String,
    lhs: FormulaSide,
    rhs: FormulaSide,
    rule: RoleRule,
}

impl CFVariant {
    /// Infers the rule by matching left terms to right terms position by
    /// position. Roles absent from the left side are fixed.
    pub fn from_sides(lhs: FormulaSide, rhs: FormulaSide) -> Result<Self, FormulaError> {
        let mut images: [Option<RoleTerm>; 4] = [None; 4];
        for (left, right) in lhs.terms().into_iter().zip(rhs.terms()) {
            let image = right.toggled(left.inverted);
            match images[left.role.index()] {
                Some(existing) if existing != image => {
                    return Err(FormulaError::InconsistentRule {
                        role: left.role,
                        first: existing,
                        second: image,
                    })
                }
                _ => images[left.role.index()] = Some(image),
            }
        }
        let pairs: Vec<(Role, RoleTerm)> = Role::ALL
            .into_iter()
            .filter_map(|r| images[r.index()].map(|t| (r, t)))
            .collect();
        let rule = RoleRule::from_pairs(&pairs);
        Ok(Self::from_rule(lhs, rule))
    }

    /// Roles that do not occur on `lhs` are unobservable and get fixed.
    pub fn from_rule(lhs: FormulaSide, mut rule: RoleRule) -> Self {
        let terms = lhs.terms();
        for role in Role::ALL {
            if !terms.iter().any(|t| t.role == role) {
                rule.0[role.index()] = RoleTerm::plain(role);
            }
        }
        let rhs = lhs.rewrite(&rule);
        let name = builtin_name(&lhs, &rule).unwrap_or("custom").to_string();
        Self {
            name,
            lhs,
            rhs,
            rule,
        }
    }

    /// `F_x(a):F_y(b) => F_x(b):F_a^-1(y)`: `x` fixed, `a -> b`, `b -> y`,
    /// `y -> a^-1`.
    pub fn classic() -> Self {
        use Role::*;
        Self::from_rule(
            FormulaSide::standard(),
            RoleRule::from_pairs(&[
                (X, RoleTerm::plain(X)),
                (A, RoleTerm::plain(B)),
                (B, RoleTerm::plain(Y)),
                (Y, RoleTerm::inverse(A)),
            ]),
        )
    }

    /// `F_x(a):F_y(b) => F_y(x):F_a^-1(b)`: `x -> y`, `a -> x`, `y -> a^-1`,
    /// `b` fixed.
    pub fn dual() -> Self {
        use Role::*;
        Self::from_rule(
            FormulaSide::standard(),
            RoleRule::from_pairs(&[
                (X, RoleTerm::plain(Y)),
                (A, RoleTerm::plain(X)),
                (Y, RoleTerm::inverse(A)),
                (B, RoleTerm::plain(B)),
            ]),
        )
    }

    /// `F_x(a):F_y(b) => F_x(b):F_y(a)`: swaps `a` and `b`.
    pub fn mosko() -> Self {
        use Role::*;
        Self::from_rule(
            FormulaSide::standard(),
            RoleRule::from_pairs(&[(A, RoleTerm::plain(B)), (B, RoleTerm::plain(A))]),
        )
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "classic" => Some(Self::classic()),
            "dual" => Some(Self::dual()),
            "mosko" => Some(Self::mosko()),
            _ => None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lhs(&self) -> &FormulaSide {
        &self.lhs
    }

    pub fn rhs(&self) -> &FormulaSide {
        &self.rhs
    }

    pub fn rule(&self) -> &RoleRule {
        &self.rule
    }
}

fn builtin_name(lhs: &FormulaSide, rule: &RoleRule) -> Option<&'static str> {
    if *lhs != FormulaSide::standard() {
        return None;
    }
    use Role::*;
    let classic = [RoleTerm::plain(X), RoleTerm::inverse(A), RoleTerm::plain(B), RoleTerm::plain(Y)];
    let dual = [RoleTerm::plain(Y), RoleTerm::inverse(A), RoleTerm::plain(X), RoleTerm::plain(B)];
    let mosko = [RoleTerm::plain(X), RoleTerm::plain(Y), RoleTerm::plain(B), RoleTerm::plain(A)];
    match rule.0 {
        r if r == classic => Some("classic"),
        r if r == dual => Some("dual"),
        r if r == mosko => Some("mosko"),
        r if r == RoleRule::identity().0 => Some("identity"),
        _ => None,
    }
}

/// Whether an assignment may reuse an element for several roles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Distinctness {
    #[default]
    Required,
    Relaxed,
}

/// Values of the four roles in a group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoleAssignment {
    group: Arc<FiniteGroup>,
    values: [usize; 4],
}

/// Serialized form of a [`RoleAssignment`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentRecord {
    pub group: String,
    pub x: String,
    pub y: String,
    pub a: String,
    pub b: String,
}

impl RoleAssignment {
    /// `values` in [`Role::ALL`] order: x, y, a, b.
    pub fn new(
        group: &Arc<FiniteGroup>,
        values: [usize; 4],
        policy: Distinctness,
    ) -> Result<Self, FormulaError> {
        for &v in &values {
            group.inverse_of(v)?;
        }
        if policy == Distinctness::Required {
            for (i, &first) in Role::ALL.iter().enumerate() {
                for &second in &Role::ALL[i + 1..] {
                    if values[first.index()] == values[second.index()] {
                        return Err(FormulaError::NotDistinct {
                            first,
                            second,
                            element: group.label(values[first.index()]).to_string(),
                        });
                    }
                }
            }
        }
        Ok(Self {
            group: Arc::clone(group),
            values,
        })
    }

    /// Labels in x, y, a, b order.
    pub fn from_labels(
        group: &Arc<FiniteGroup>,
        labels: [&str; 4],
        policy: Distinctness,
    ) -> Result<Self, FormulaError> {
        let mut values = [0; 4];
        for (v, l) in values.iter_mut().zip(labels) {
            *v = group.index_of(l)?;
        }
        Self::new(group, values, policy)
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn value(&self, role: Role) -> usize {
        self.values[role.index()]
    }

    pub fn values(&self) -> [usize; 4] {
        self.values
    }

    pub fn to_record(&self) -> AssignmentRecord {
        let l = |r: Role| self.group.label(self.value(r)).to_string();
        AssignmentRecord {
            group: self.group.name().to_string(),
            x: l(Role::X),
            y: l(Role::Y),
            a: l(Role::A),
            b: l(Role::B),
        }
    }

    pub fn from_record(
        group: &Arc<FiniteGroup>,
        record: &AssignmentRecord,
        policy: Distinctness,
    ) -> Result<Self, FormulaError> {
        Self::from_labels(
            group,
            [&record.x, &record.y, &record.a, &record.b],
            policy,
        )
    }
}

impl fmt::Display for RoleAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = Role::ALL
            .iter()
            .map(|&r| format!("{}={}", r, self.group.label(self.value(r))))
            .collect();
        f.write_str(&parts.join(","))
    }
}

pub fn evaluate_role_term(assignment: &RoleAssignment, term: RoleTerm) -> usize {
    let v = assignment.value(term.role);
    if term.inverted {
        assignment.group.inv(v)
    } else {
        v
    }
}

/// A functional relation on a subset of a group's elements.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PartialMap {
    pairs: BTreeMap<usize, usize>,
}

impl PartialMap {
    pub fn pairs(&self) -> &BTreeMap<usize, usize> {
        &self.pairs
    }

    pub fn get(&self, from: usize) -> Option<usize> {
        self.pairs.get(&from).copied()
    }

    /// True when `map` agrees with every pair.
    pub fn is_restriction_of(&self, map: &GroupMap) -> bool {
        self.pairs.iter().all(|(&g, &h)| map.image(g) == h)
    }
}

/// Sends `values[r]` to the value of `rule[r]` for every role `r`.
pub fn induced_partial_map(
    assignment: &RoleAssignment,
    variant: &CFVariant,
) -> Result<PartialMap, FormulaError> {
    let mut pairs = BTreeMap::new();
    let mut source_role = BTreeMap::new();
    for role in Role::ALL {
        let from = assignment.value(role);
        let to = evaluate_role_term(assignment, variant.rule.image(role));
        match pairs.insert(from, to) {
            Some(previous) if previous != to => {
                let g = &assignment.group;
                return Err(FormulaError::ConflictingPairs {
                    first: source_role[&from],
                    second: role,
                    element: g.label(from).to_string(),
                    first_target: g.label(previous).to_string(),
                    second_target: g.label(to).to_string(),
                });
            }
            _ => {
                source_role.entry(from).or_insert(role);
            }
        }
    }
    Ok(PartialMap { pairs })
}

/// Symmetries (automorphisms, plus anti-automorphisms when `allow_anti`)
/// restricting to the transformation induced by `variant` at `assignment`.
pub fn realizations(
    assignment: &RoleAssignment,
    variant: &CFVariant,
    allow_anti: bool,
) -> Result<Vec<GroupMap>, FormulaError> {
    let partial = induced_partial_map(assignment, variant)?;
    let symmetries = enumerate_symmetries(&assignment.group, allow_anti)?;
    Ok(symmetries
        .into_iter()
        .filter(|m| partial.is_restriction_of(m))
        .collect())
}

/// Bitset index over a symmetry list: for each `(element, image)` pair, the
/// set of maps sending `element` to `image`.
struct RealizationIndex {
    words: usize,
    order: usize,
    sets: Vec<Vec<u64>>,
}

impl RealizationIndex {
    fn new(order: usize, maps: &[GroupMap]) -> Self {
        let words = maps.len().div_ceil(64);
        let mut sets = vec![vec![0u64; words]; order * order];
        for (m, map) in maps.iter().enumerate() {
            for (g, &h) in map.images().iter().enumerate() {
                sets[g * order + h][m / 64] |= 1 << (m % 64);
            }
        }
        Self { words, order, sets }
    }

    fn count(&self, partial: &PartialMap) -> usize {
        (0..self.words)
            .map(|w| {
                partial
                    .pairs
                    .iter()
                    .fold(u64::MAX, |acc, (&g, &h)| acc & self.sets[g * self.order + h][w])
                    .count_ones() as usize
            })
            .sum()
    }
}

/// Per-role pins for [`enumerate_assignments`].
pub type RolePins = BTreeMap<Role, usize>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealizedAssignment {
    pub assignment: RoleAssignment,
    pub realizations: usize,
}

/// All assignments honoring `pins` and `policy` that have at least one
/// realization, in lexicographic order of `(x, y, a, b)`.
pub fn enumerate_assignments(
    group: &Arc<FiniteGroup>,
    variant: &CFVariant,
    allow_anti: bool,
    pins: &RolePins,
    policy: Distinctness,
) -> Result<Vec<RealizedAssignment>, FormulaError> {
    for (&role, &v) in pins {
        if v >= group.order() {
            return Err(FormulaError::UnsatisfiableConstraint(format!(
                "{role} pinned to index {v}, outside a group of order {}",
                group.order()
            )));
        }
    }
    if policy == Distinctness::Required {
        let pinned: Vec<(&Role, &usize)> = pins.iter().collect();
        for (i, (r1, v1)) in pinned.iter().enumerate() {
            if let Some((r2, _)) = pinned[i + 1..].iter().find(|(_, v2)| v1 == v2) {
                return Err(FormulaError::UnsatisfiableConstraint(format!(
                    "{r1} and {r2} are pinned to the same element {:?}",
                    group.label(**v1)
                )));
            }
        }
    }

    let maps = enumerate_symmetries(group, allow_anti)?;
    let index = RealizationIndex::new(group.order(), &maps);
    let choices = |role: Role| -> Vec<usize> {
        match pins.get(&role) {
            Some(&v) => vec![v],
            None => group.elements().collect(),
        }
    };

    let mut out = Vec::new();
    for x in choices(Role::X) {
        for y in choices(Role::Y) {
            for a in choices(Role::A) {
                for b in choices(Role::B) {
                    let Ok(assignment) = RoleAssignment::new(group, [x, y, a, b], policy) else {
                        continue;
                    };
                    let Ok(partial) = induced_partial_map(&assignment, variant) else {
                        continue;
                    };
                    let count = index.count(&partial);
                    if count > 0 {
                        out.push(RealizedAssignment {
                            assignment,
                            realizations: count,
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainStep {
    pub step: usize,
    pub side: FormulaSide,
    /// Element values of the side's four terms, in reading order.
    pub tuple: Option<[usize; 4]>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    /// Steps `0..=steps`; step 0 is the left side.
    pub steps: Vec<ChainStep>,
    /// Least `m >= 1` with `rule^m` the identity substitution, if any.
    pub symbolic_period: Option<usize>,
    /// Least `m >= 1` after which the element tuple returns to its start.
    pub element_period: Option<usize>,
}

/// Bound on symbolic orbit length: the number of distinct rules.
const RULE_SPACE: usize = 8usize.pow(4);

/// Applies the variant's rule repeatedly to its left side.
pub fn iterate_chain(
    variant: &CFVariant,
    steps: usize,
    assignment: Option<&RoleAssignment>,
) -> Result<Chain, FormulaError> {
    if steps == 0 {
        return Err(FormulaError::NoSteps);
    }
    let evaluate = |side: &FormulaSide| {
        assignment.map(|asg| side.terms().map(|t| evaluate_role_term(asg, t)))
    };

    let mut chain_steps = Vec::with_capacity(steps + 1);
    let mut side = variant.lhs;
    for step in 0..=steps {
        chain_steps.push(ChainStep {
            step,
            side,
            tuple: evaluate(&side),
        });
        side = side.rewrite(&variant.rule);
    }

    // Orbit of powers rule^0, rule^1, ... until the first repeat.
    let mut powers = vec![RoleRule::identity()];
    let mut first_repeat = None;
    while powers.len() <= RULE_SPACE {
        let next = powers.last().expect("non-empty").then(&variant.rule);
        if let Some(p) = powers.iter().position(|r| *r == next) {
            first_repeat = Some(p);
            break;
        }
        powers.push(next);
    }
    let symbolic_period = match first_repeat {
        Some(0) => Some(powers.len()),
        _ => None,
    };
    let element_period = assignment.and_then(|asg| {
        let tuple = |rule: &RoleRule| variant.lhs.rewrite(rule).terms().map(|t| evaluate_role_term(asg, t));
        let start = tuple(&powers[0]);
        // powers[len] equals powers[first_repeat], so the tuple sequence is
        // fully described by indices below powers.len().
        (1..powers.len())
            .find(|&m| tuple(&powers[m]) == start)
            .or_else(|| (first_repeat == Some(0)).then_some(powers.len()))
    });

    Ok(Chain {
        steps: chain_steps,
        symbolic_period,
        element_period,
    })
}

/// Checks `(x/a)/(y/b) = (x/y)/(b^-1/a^-1)` with `p/q = p q^-1`.
pub fn verify_fraction_rule(assignment: &RoleAssignment) -> Result<bool, FormulaError> {
    let g = &assignment.group;
    if !g.is_commutative() {
        return Err(FormulaError::NonCommutativeGroup(g.name().to_string()));
    }
    let [x, y, a, b] = assignment.values;
    let div = |p: usize, q: usize| g.mul(p, g.inv(q));
    let lhs = div(div(x, a), div(y, b));
    let rhs = div(div(x, y), div(g.inv(b), g.inv(a)));
    Ok(lhs == rhs)
}

/// True when inverting the `a` role is invisible for every assignment, that
/// is when every element is its own inverse.
pub fn mosko_degeneration_check(group: &Arc<FiniteGroup>) -> bool {
    group.elements().all(|a| {
        let asg = RoleAssignment::new(group, [a; 4], Distinctness::Relaxed)
            .expect("element indices are in range");
        evaluate_role_term(&asg, RoleTerm::inverse(Role::A)) == evaluate_role_term(&asg, RoleTerm::plain(Role::A))
    })
}
