//! Finite-group toolkit for analysing the canonical formula
//! `F_x(a):F_y(b) => F_x(b):F_a^-1(y)` as a role transformation realized by
//! automorphisms and anti-automorphisms.
//!
//! - [`group`]: validated Cayley tables and the standard catalog.
//! - [`morphisms`]: classification and enumeration of (anti-)automorphisms.
//! - [`formula`]: formula variants, role assignments, realizations, chains.
//! - [`dsl`]: group files and the formula language.

pub mod dsl;
pub mod formula;
pub mod group;
pub mod morphisms;

pub use dsl::{parse_formula, parse_group_file, render_formula, render_group_file, DslError};
pub use formula::{
    enumerate_assignments, evaluate_role_term, induced_partial_map, iterate_chain,
    mosko_degeneration_check, realizations, verify_fraction_rule, CFVariant, Distinctness,
    FormulaError, FormulaSide, Role, RoleAssignment, RoleTerm,
};
pub use group::{
    fraction_transformation_group, standard_group, ElementSubset, FiniteGroup, GroupError,
    StandardGroup,
};
pub use morphisms::{
    classify_map, compose_maps, enumerate_symmetries, inner_automorphisms, inversion_map,
    invert_map, is_outer, symmetry_group, GroupMap, MapKind, MorphismError, QuaternionSymmetry,
    SymmetryGroup,
};
