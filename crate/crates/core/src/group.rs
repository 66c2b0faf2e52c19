//! Finite groups given by their full multiplication (Cayley) table.
//!
//! Elements are dense indices `0..n` with a parallel label table. All algebra
//! runs on indices; labels only matter at I/O boundaries.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Errors raised while validating a multiplication table.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("a group needs at least one element")]
    Empty,
    #[error("table row {row} has {found} entries, expected {expected}")]
    TableShape {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("table has {found} rows, expected {expected}")]
    RowCount { expected: usize, found: usize },
    #[error("elements {first} and {second} share the label {label:?}")]
    DuplicateLabel {
        first: usize,
        second: usize,
        label: String,
    },
    #[error("product of elements {row} and {col} is {value}, outside 0..{order}")]
    ClosureViolation {
        row: usize,
        col: usize,
        value: usize,
        order: usize,
    },
    #[error("claimed identity {claimed} is out of range")]
    IdentityOutOfRange { claimed: usize },
    #[error("element {claimed} is not an identity (fails at element {witness}); element {actual} is")]
    WrongIdentity {
        claimed: usize,
        actual: usize,
        witness: usize,
    },
    #[error("no identity element exists (claimed identity {claimed} fails at element {witness})")]
    NoIdentity { claimed: usize, witness: usize },
    #[error("element {element} has no two-sided inverse")]
    MissingInverse { element: usize },
    #[error("not associative: ({a}*{b})*{c} != {a}*({b}*{c})")]
    NonAssociative { a: usize, b: usize, c: usize },
    #[error("element index {index} out of range for a group of order {order}")]
    IndexOutOfRange { index: usize, order: usize },
    #[error("unknown standard group {0:?}")]
    UnknownKind(String),
    #[error("unknown element label {0:?}")]
    UnknownLabel(String),
}

/// A validated finite group.
///
/// `table[r * n + c]` is the index of `elements[r] * elements[c]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    name: String,
    elements: Vec<String>,
    table: Vec<usize>,
    identity: usize,
    inverses: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct StructureFlags {
    pub commutative: bool,
    pub exponent_two: bool,
    pub order: usize,
}

impl FiniteGroup {
    /// Validates `table` against the group axioms and builds the group.
    ///
    /// Checks run in the order shape, labels, closure, identity, inverses,
    /// associativity; the first failure is reported with the offending
    /// indices.
    pub fn new(
        name: impl Into<String>,
        elements: Vec<String>,
        table: Vec<Vec<usize>>,
        identity: usize,
    ) -> Result<Self, GroupError> {
        let n = elements.len();
        if n == 0 {
            return Err(GroupError::Empty);
        }
        if table.len() != n {
            return Err(GroupError::RowCount {
                expected: n,
                found: table.len(),
            });
        }
        for (row, entries) in table.iter().enumerate() {
            if entries.len() != n {
                return Err(GroupError::TableShape {
                    row,
                    expected: n,
                    found: entries.len(),
                });
            }
        }
        for second in 0..n {
            if let Some(first) = (0..second).find(|&f| elements[f] == elements[second]) {
                return Err(GroupError::DuplicateLabel {
                    first,
                    second,
                    label: elements[second].clone(),
                });
            }
        }
        for (row, entries) in table.iter().enumerate() {
            for (col, &value) in entries.iter().enumerate() {
                if value >= n {
                    return Err(GroupError::ClosureViolation {
                        row,
                        col,
                        value,
                        order: n,
                    });
                }
            }
        }
        let flat: Vec<usize> = table.into_iter().flatten().collect();
        let mul = |a: usize, b: usize| flat[a * n + b];

        if identity >= n {
            return Err(GroupError::IdentityOutOfRange { claimed: identity });
        }
        let identity_witness =
            |e: usize| (0..n).find(|&g| mul(e, g) != g || mul(g, e) != g);
        if let Some(witness) = identity_witness(identity) {
            return Err(match (0..n).find(|&e| identity_witness(e).is_none()) {
                Some(actual) => GroupError::WrongIdentity {
                    claimed: identity,
                    actual,
                    witness,
                },
                None => GroupError::NoIdentity {
                    claimed: identity,
                    witness,
                },
            });
        }

        let mut inverses = Vec::with_capacity(n);
        for g in 0..n {
            match (0..n).find(|&h| mul(g, h) == identity && mul(h, g) == identity) {
                Some(h) => inverses.push(h),
                None => return Err(GroupError::MissingInverse { element: g }),
            }
        }

        for a in 0..n {
            for b in 0..n {
                let ab = mul(a, b);
                for c in 0..n {
                    if mul(ab, c) != mul(a, mul(b, c)) {
                        return Err(GroupError::NonAssociative { a, b, c });
                    }
                }
            }
        }

        Ok(Self {
            name: name.into(),
            elements,
            table: flat,
            identity,
            inverses,
        })
    }

    /// Builds a group from a closure computing products. Used by the
    /// standard constructors; the result is still fully validated.
    pub(crate) fn from_fn(
        name: impl Into<String>,
        elements: Vec<String>,
        identity: usize,
        product: impl Fn(usize, usize) -> usize,
    ) -> Result<Self, GroupError> {
        let n = elements.len();
        let table = (0..n)
            .map(|r| (0..n).map(|c| product(r, c)).collect())
            .collect();
        Self::new(name, elements, table, identity)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn labels(&self) -> &[String] {
        &self.elements
    }

    pub fn label(&self, g: usize) -> &str {
        &self.elements[g]
    }

    /// Index of the element with the given label (byte-exact match).
    pub fn index_of(&self, label: &str) -> Result<usize, GroupError> {
        self.elements
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| GroupError::UnknownLabel(label.to_string()))
    }

    /// Product `a * b`. Panics on out-of-range indices.
    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order() + b]
    }

    pub fn table_rows(&self) -> impl Iterator<Item = &[usize]> {
        self.table.chunks(self.order())
    }

    fn check_index(&self, g: usize) -> Result<(), GroupError> {
        if g < self.order() {
            Ok(())
        } else {
            Err(GroupError::IndexOutOfRange {
                index: g,
                order: self.order(),
            })
        }
    }

    pub fn inverse_of(&self, g: usize) -> Result<usize, GroupError> {
        self.check_index(g)?;
        Ok(self.inverses[g])
    }

    /// Unchecked inverse for internal loops over valid indices.
    #[inline]
    pub(crate) fn inv(&self, g: usize) -> usize {
        self.inverses[g]
    }

    /// Least `m >= 1` with `g^m` equal to the identity.
    pub fn element_order(&self, g: usize) -> Result<usize, GroupError> {
        self.check_index(g)?;
        let mut power = g;
        let mut m = 1;
        while power != self.identity {
            power = self.mul(power, g);
            m += 1;
        }
        Ok(m)
    }

    pub fn is_commutative(&self) -> bool {
        let n = self.order();
        (0..n).all(|a| (a + 1..n).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn structure_flags(&self) -> StructureFlags {
        StructureFlags {
            commutative: self.is_commutative(),
            exponent_two: (0..self.order()).all(|g| self.mul(g, g) == self.identity),
            order: self.order(),
        }
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order()
    }

    /// Subgroup generated by `generators`.
    pub fn generated_subgroup(&self, generators: &[usize]) -> Result<ElementSubset<'_>, GroupError> {
        for &g in generators {
            self.check_index(g)?;
        }
        let mut members = BTreeSet::from([self.identity]);
        let mut frontier = vec![self.identity];
        while let Some(h) = frontier.pop() {
            for &g in generators {
                let p = self.mul(h, g);
                if members.insert(p) {
                    frontier.push(p);
                }
            }
        }
        Ok(ElementSubset {
            group: self,
            members,
        })
    }

    pub fn center(&self) -> ElementSubset<'_> {
        let members = self
            .elements()
            .filter(|&z| self.elements().all(|g| self.mul(z, g) == self.mul(g, z)))
            .collect();
        ElementSubset {
            group: self,
            members,
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

impl fmt::Display for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (order {})", self.name, self.order())
    }
}

/// A set of element indices of one group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementSubset<'g> {
    group: &'g FiniteGroup,
    members: BTreeSet<usize>,
}

impl<'g> ElementSubset<'g> {
    pub fn new(
        group: &'g FiniteGroup,
        members: impl IntoIterator<Item = usize>,
    ) -> Result<Self, GroupError> {
        let members: BTreeSet<usize> = members.into_iter().collect();
        if let Some(&bad) = members.iter().find(|&&g| g >= group.order()) {
            return Err(GroupError::IndexOutOfRange {
                index: bad,
                order: group.order(),
            });
        }
        Ok(Self { group, members })
    }

    pub fn group(&self) -> &'g FiniteGroup {
        self.group
    }

    pub fn members(&self) -> &BTreeSet<usize> {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, g: usize) -> bool {
        self.members.contains(&g)
    }

    /// True when the subset contains the identity and is closed under products
    /// and inverses.
    pub fn is_subgroup(&self) -> bool {
        let g = self.group;
        self.contains(g.identity())
            && self.members.iter().all(|&a| {
                self.contains(g.inv(a)) && self.members.iter().all(|&b| self.contains(g.mul(a, b)))
            })
    }

    pub fn labels(&self) -> Vec<&'g str> {
        self.members.iter().map(|&m| self.group.label(m)).collect()
    }
}

/// The built-in group catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StandardGroup {
    /// `{1, -1}` under multiplication.
    Sign,
    /// Klein four-group `{1, i, j, k}`.
    Klein,
    /// Quaternion group `{±1, ±i, ±j, ±k}`.
    Q8,
    Cyclic(usize),
    /// `(Z/2)^k`.
    ElementaryAbelian2(u32),
}

/// Largest elementary abelian 2-group in the catalog, `(Z/2)^6`.
pub const MAX_EA2_RANK: u32 = 6;

impl FromStr for StandardGroup {
    type Err = GroupError;

    /// Accepts `sign`, `klein`, `q8`, `c<n>` and `ea2-<k>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || GroupError::UnknownKind(s.to_string());
        match s {
            "sign" => Ok(Self::Sign),
            "klein" => Ok(Self::Klein),
            "q8" => Ok(Self::Q8),
            _ => {
                if let Some(rank) = s.strip_prefix("ea2-") {
                    rank.parse().map(Self::ElementaryAbelian2).map_err(|_| unknown())
                } else if let Some(n) = s.strip_prefix('c') {
                    n.parse().map(Self::Cyclic).map_err(|_| unknown())
                } else {
                    Err(unknown())
                }
            }
        }
    }
}

impl fmt::Display for StandardGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Sign => f.write_str("sign"),
            Self::Klein => f.write_str("klein"),
            Self::Q8 => f.write_str("q8"),
            Self::Cyclic(n) => write!(f, "c{n}"),
            Self::ElementaryAbelian2(k) => write!(f, "ea2-{k}"),
        }
    }
}

const Q8_LABELS: [&str; 8] = ["1", "-1", "i", "-i", "j", "-j", "k", "-k"];

/// Quaternion unit product: units are 0 = 1, 1 = i, 2 = j, 3 = k. Returns
/// (negated, unit).
fn quaternion_unit_product(p: usize, q: usize) -> (bool, usize) {
    match (p, q) {
        (0, u) | (u, 0) => (false, u),
        (p, q) if p == q => (true, 0),
        // i j = k, j k = i, k i = j; reversed order picks up a sign
        (p, q) => {
            let r = 6 - p - q;
            let cyclic = (p % 3) + 1 == q;
            (!cyclic, r)
        }
    }
}

pub fn standard_group(kind: StandardGroup) -> Result<FiniteGroup, GroupError> {
    let owned = |labels: &[&str]| labels.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    match kind {
        StandardGroup::Sign => FiniteGroup::from_fn("sign", owned(&["1", "-1"]), 0, |a, b| a ^ b),
        StandardGroup::Klein => {
            // bit 0 = i, bit 1 = j; k = i j
            FiniteGroup::from_fn("klein", owned(&["1", "i", "j", "k"]), 0, |a, b| a ^ b)
        }
        StandardGroup::Q8 => FiniteGroup::from_fn("q8", owned(&Q8_LABELS), 0, |a, b| {
            // index = 2 * unit + negated
            let (neg, unit) = quaternion_unit_product(a / 2, b / 2);
            let sign = (a % 2 == 1) ^ (b % 2 == 1) ^ neg;
            2 * unit + usize::from(sign)
        }),
        StandardGroup::Cyclic(0) => Err(GroupError::UnknownKind(kind.to_string())),
        StandardGroup::Cyclic(n) => {
            let labels = (0..n)
                .map(|p| match p {
                    0 => "1".to_string(),
                    1 => "g".to_string(),
                    p => format!("g^{p}"),
                })
                .collect();
            FiniteGroup::from_fn(format!("c{n}"), labels, 0, |a, b| (a + b) % n)
        }
        StandardGroup::ElementaryAbelian2(k) if k > MAX_EA2_RANK => {
            Err(GroupError::UnknownKind(kind.to_string()))
        }
        StandardGroup::ElementaryAbelian2(k) => {
            let labels = (0..1usize << k)
                .map(|bits| {
                    if bits == 0 {
                        "1".to_string()
                    } else {
                        (0..k)
                            .filter(|b| bits >> b & 1 == 1)
                            .map(|b| format!("e{}", b + 1))
                            .collect::<String>()
                    }
                })
                .collect();
            FiniteGroup::from_fn(format!("ea2-{k}"), labels, 0, |a, b| a ^ b)
        }
    }
}

/// Every catalog group that the CLI resolves by name: `sign`, `klein`, `q8`,
/// `c1..=c16`, `ea2-0..=ea2-4`.
pub fn catalog() -> Vec<FiniteGroup> {
    let mut kinds = vec![StandardGroup::Sign, StandardGroup::Klein, StandardGroup::Q8];
    kinds.extend((1..=16).map(StandardGroup::Cyclic));
    kinds.extend((0..=4).map(StandardGroup::ElementaryAbelian2));
    kinds
        .into_iter()
        .map(|k| standard_group(k).expect("catalog groups are valid"))
        .collect()
}

/// One of the four formal substitutions `x -> ±x^{±1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FractionTransform {
    pub negate: bool,
    pub reciprocal: bool,
}

/// A formal expression `±x^{±1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignedPower {
    pub negative: bool,
    pub reciprocal: bool,
}

impl SignedPower {
    pub const X: Self = Self {
        negative: false,
        reciprocal: false,
    };
}

impl FractionTransform {
    pub const ALL: [Self; 4] = [
        Self::new(false, false),
        Self::new(true, false),
        Self::new(false, true),
        Self::new(true, true),
    ];

    pub const fn new(negate: bool, reciprocal: bool) -> Self {
        Self { negate, reciprocal }
    }

    /// Substitutes the transform's right-hand side for `x` inside `expr`.
    /// `-(1/t) = 1/(-t)`, so sign and reciprocal commute.
    pub fn apply(self, expr: SignedPower) -> SignedPower {
        SignedPower {
            negative: expr.negative ^ self.negate,
            reciprocal: expr.reciprocal ^ self.reciprocal,
        }
    }

    /// The transform "apply `self`, then `then`".
    pub fn then(self, then: Self) -> Self {
        let image = then.apply(self.apply(SignedPower::X));
        Self::new(image.negative, image.reciprocal)
    }
}

impl fmt::Display for FractionTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.negate { "-" } else { "" };
        if self.reciprocal {
            write!(f, "x -> {sign}1/x")
        } else {
            write!(f, "x -> {sign}x")
        }
    }
}

#[derive(Debug, Clone)]
pub struct FractionGroup {
    pub group: FiniteGroup,
    /// `action[g]` is the transform realizing element `g`.
    pub action: Vec<FractionTransform>,
}

/// The four transforms `x -> x, -x, 1/x, -1/x` as a group, with `g * h`
/// meaning "apply `g`, then `h`".
pub fn fraction_transformation_group() -> FractionGroup {
    let action = FractionTransform::ALL.to_vec();
    let labels = action.iter().map(ToString::to_string).collect();
    let group = FiniteGroup::from_fn("fractions", labels, 0, |a, b| {
        let composed = action[a].then(action[b]);
        action
            .iter()
            .position(|&t| t == composed)
            .expect("transforms are closed under composition")
    })
    .expect("fraction transforms form a group");
    debug_assert_eq!(action.iter().collect::<HashSet<_>>().len(), 4);
    FractionGroup { group, action }
}
