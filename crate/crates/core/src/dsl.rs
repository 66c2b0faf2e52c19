//! Text formats: JSON group files and the formula-schema language.
//!
//! Formula grammar:
//!
//! ```text
//! formula := side ":" side "=>" side ":" side
//! side    := "F_" term "(" term ")"
//! term    := ("x" | "y" | "a" | "b") ["^-1"]
//! ```
//!
//! Whitespace between tokens is ignored. The canonical rendering has no
//! whitespace except a single space on each side of `=>`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{CFVariant, FormulaError, FormulaSide, Role, RoleTerm};
use crate::group::{FiniteGroup, GroupError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DslError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("field `{field}`: {source}")]
    Group {
        field: &'static str,
        #[source]
        source: GroupError,
    },
    #[error("formula syntax error at column {column}: expected {expected}")]
    FormulaSyntax { column: usize, expected: String },
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

/// On-disk shape of a group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupFile {
    pub name: String,
    pub elements: Vec<String>,
    pub identity: String,
    pub table: Vec<Vec<String>>,
}

impl GroupFile {
    pub fn from_group(group: &FiniteGroup) -> Self {
        let label = |g: usize| group.label(g).to_string();
        Self {
            name: group.name().to_string(),
            elements: group.labels().to_vec(),
            identity: label(group.identity()),
            table: group
                .table_rows()
                .map(|row| row.iter().map(|&g| label(g)).collect())
                .collect(),
        }
    }

    pub fn into_group(self) -> Result<FiniteGroup, DslError> {
        let n = self.elements.len();
        let lookup = |label: &str, field: String| -> Result<usize, DslError> {
            self.elements
                .iter()
                .position(|l| l == label)
                .ok_or(DslError::Field {
                    field,
                    message: format!("unknown element label {label:?}"),
                })
        };
        let identity = lookup(&self.identity, "identity".into())?;
        if self.table.len() != n {
            return Err(DslError::Field {
                field: "table".into(),
                message: format!("{} rows, expected {n}", self.table.len()),
            });
        }
        let mut table = Vec::with_capacity(n);
        for (r, row) in self.table.iter().enumerate() {
            if row.len() != n {
                return Err(DslError::Field {
                    field: format!("table[{r}]"),
                    message: format!("{} entries, expected {n}", row.len()),
                });
            }
            let indices = row
                .iter()
                .enumerate()
                .map(|(c, l)| lookup(l, format!("table[{r}][{c}]")))
                .collect::<Result<Vec<_>, _>>()?;
            table.push(indices);
        }
        FiniteGroup::new(self.name, self.elements, table, identity).map_err(|source| {
            let field = match source {
                GroupError::DuplicateLabel { .. } | GroupError::Empty => "elements",
                GroupError::WrongIdentity { .. } | GroupError::NoIdentity { .. } => "identity",
                _ => "table",
            };
            DslError::Group { field, source }
        })
    }
}

pub fn parse_group_file(text: &str) -> Result<FiniteGroup, DslError> {
    let file: GroupFile = serde_json::from_str(text).map_err(|e| DslError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    file.into_group()
}

pub fn render_group_file(group: &FiniteGroup) -> String {
    let mut text = serde_json::to_string_pretty(&GroupFile::from_group(group))
        .expect("group files always serialize");
    text.push('\n');
    text
}

struct FormulaParser<'t> {
    chars: Vec<(usize, char)>,
    pos: usize,
    text: &'t str,
}

impl<'t> FormulaParser<'t> {
    fn new(text: &'t str) -> Self {
        Self {
            chars: text.char_indices().collect(),
            pos: 0,
            text,
        }
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|(_, c)| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn error(&self, expected: &str) -> DslError {
        DslError::FormulaSyntax {
            column: self.pos + 1,
            expected: expected.to_string(),
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    /// Matches `token` exactly; whitespace is allowed before it but not inside.
    fn expect(&mut self, token: &str) -> Result<(), DslError> {
        self.skip_ws();
        let start = self.chars.get(self.pos).map_or(self.text.len(), |&(b, _)| b);
        if self.text[start..].starts_with(token) {
            self.pos += token.chars().count();
            Ok(())
        } else {
            Err(self.error(&format!("{token:?}")))
        }
    }

    fn term(&mut self) -> Result<RoleTerm, DslError> {
        let role = self
            .peek()
            .and_then(Role::from_letter)
            .ok_or_else(|| self.error("one of x, y, a, b"))?;
        self.pos += 1;
        if self.peek() == Some('^') {
            self.expect("^-1")?;
            Ok(RoleTerm::inverse(role))
        } else {
            Ok(RoleTerm::plain(role))
        }
    }

    fn ratio(&mut self) -> Result<(RoleTerm, RoleTerm), DslError> {
        self.expect("F_")?;
        let function = self.term()?;
        self.expect("(")?;
        let argument = self.term()?;
        self.expect(")")?;
        Ok((function, argument))
    }

    fn side(&mut self) -> Result<FormulaSide, DslError> {
        let (f1, a1) = self.ratio()?;
        self.expect(":")?;
        let (f2, a2) = self.ratio()?;
        Ok(FormulaSide::new(f1, a1, f2, a2))
    }

    fn formula(&mut self) -> Result<(FormulaSide, FormulaSide), DslError> {
        let lhs = self.side()?;
        self.expect("=>")?;
        let rhs = self.side()?;
        if self.peek().is_some() {
            return Err(self.error("end of input"));
        }
        Ok((lhs, rhs))
    }
}

/// Parses `side => side` and infers the role rule.
pub fn parse_formula(text: &str) -> Result<CFVariant, DslError> {
    let (lhs, rhs) = FormulaParser::new(text).formula()?;
    Ok(CFVariant::from_sides(lhs, rhs)?)
}

pub fn render_formula(variant: &CFVariant) -> String {
    format!("{} => {}", variant.lhs(), variant.rhs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{standard_group, StandardGroup};
    use proptest::prelude::*;

    #[test]
    fn builtin_formulas_parse() {
        assert_eq!(parse_formula("F_x(a):F_y(b) => F_x(b):F_a^-1(y)").unwrap(), CFVariant::classic());
        assert_eq!(parse_formula("F_x(a):F_y(b) => F_y(x):F_a^-1(b)").unwrap(), CFVariant::dual());
        assert_eq!(parse_formula("F_x(a):F_y(b) => F_x(b):F_y(a)").unwrap(), CFVariant::mosko());
        let id = parse_formula("F_x(a):F_y(b) => F_x(a):F_y(b)").unwrap();
        assert!(id.rule().is_identity());
        assert_eq!(id.name(), "identity");
    }

    #[test]
    fn rendering() {
        assert_eq!(render_formula(&CFVariant::classic()), "F_x(a):F_y(b) => F_x(b):F_a^-1(y)");
        assert_eq!(render_formula(&CFVariant::mosko()), "F_x(a):F_y(b) => F_x(b):F_y(a)");
    }

    #[test]
    fn whitespace_is_insignificant() {
        let spaced = "  F_ x ( a ) : F_y(b)=>F_x(b) :\tF_a ^-1 (y)\n";
        assert_eq!(parse_formula(spaced).unwrap(), CFVariant::classic());
    }

    #[test]
    fn syntax_errors_carry_columns() {
        let cases = [
            ("G_x(a):F_y(b) => F_x(b):F_y(a)", 1),
            ("F_q(a):F_y(b) => F_x(b):F_y(a)", 3),
            ("F_x(a):F_y(b) -> F_x(b):F_y(a)", 15),
            ("F_x(a^2):F_y(b) => F_x(b):F_y(a)", 6),
            ("F_x(a):F_y(b) => F_x(b):F_y(a) junk", 32),
            ("F_x(a):F_y(b) => F_x(b):F_y(a", 30),
            ("", 1),
        ];
        for (text, column) in cases {
            match parse_formula(text) {
                Err(DslError::FormulaSyntax { column: c, .. }) => assert_eq!(c, column, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn inconsistent_rule_is_rejected() {
        let err = parse_formula("F_x(x):F_y(b) => F_x(a):F_y(b)").unwrap_err();
        assert!(matches!(err, DslError::Formula(FormulaError::InconsistentRule { .. })), "{err}");
    }

    #[test]
    fn group_file_round_trip() {
        let q8 = standard_group(StandardGroup::Q8).unwrap();
        let text = render_group_file(&q8);
        assert_eq!(parse_group_file(&text).unwrap(), q8);
    }

    fn file(elements: &[&str], identity: &str, table: &[&[&str]]) -> String {
        serde_json::json!({
            "name": "t",
            "elements": elements,
            "identity": identity,
            "table": table,
        })
        .to_string()
    }

    #[test]
    fn group_file_errors() {
        let dup = file(&["e", "e"], "e", &[&["e", "e"], &["e", "e"]]);
        assert!(matches!(
            parse_group_file(&dup).unwrap_err(),
            DslError::Group {
                field: "elements",
                source: GroupError::DuplicateLabel { .. }
            }
        ));
        let magma = file(
            &["e", "a", "b"],
            "e",
            &[&["e", "a", "b"], &["a", "e", "a"], &["b", "b", "e"]],
        );
        assert_eq!(
            parse_group_file(&magma).unwrap_err(),
            DslError::Group {
                field: "table",
                source: GroupError::NonAssociative { a: 1, b: 1, c: 2 }
            }
        );
        let unknown = file(&["e", "g"], "e", &[&["e", "g"], &["g", "h"]]);
        assert_eq!(
            parse_group_file(&unknown).unwrap_err(),
            DslError::Field {
                field: "table[1][1]".into(),
                message: "unknown element label \"h\"".into()
            }
        );
        assert!(matches!(
            parse_group_file("{\"name\": \"t\",\n \"elements\": [}").unwrap_err(),
            DslError::Syntax { line: 2, .. }
        ));
        assert!(matches!(
            parse_group_file(r#"{"name":"t","elements":["e"],"identity":"e","table":[["e"]],"extra":1}"#)
                .unwrap_err(),
            DslError::Syntax { .. }
        ));
    }

    fn arb_term() -> impl Strategy<Value = RoleTerm> {
        (0..4usize, any::<bool>()).prop_map(|(r, inverted)| RoleTerm {
            role: Role::ALL[r],
            inverted,
        })
    }

    fn arb_variant() -> impl Strategy<Value = CFVariant> {
        (prop::array::uniform4(arb_term()), prop::array::uniform4(arb_term())).prop_map(|(lhs, images)| {
            let rule = crate::formula::RoleRule::from_pairs(
                &Role::ALL.into_iter().zip(images).collect::<Vec<_>>(),
            );
            CFVariant::from_rule(FormulaSide::from_terms(lhs), rule)
        })
    }

    proptest! {
        #[test]
        fn render_then_parse_is_stable(v in arb_variant()) {
            let text = render_formula(&v);
            let parsed = parse_formula(&text).unwrap();
            prop_assert_eq!(render_formula(&parsed), text);
            prop_assert_eq!(parsed, v);
        }
    }
}
