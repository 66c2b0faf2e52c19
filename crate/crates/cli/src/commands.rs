use std::fmt::Write as _;
use std::sync::Arc;

use cf_core::formula::{Chain, RolePins};
use cf_core::group::GroupError;
use cf_core::{
    classify_map, compose_maps, enumerate_assignments, enumerate_symmetries, induced_partial_map,
    is_outer, iterate_chain, parse_formula, parse_group_file, realizations, render_formula,
    standard_group, symmetry_group, verify_fraction_rule, CFVariant, Distinctness, DslError,
    FiniteGroup, FormulaError, GroupMap, MorphismError, QuaternionSymmetry, Role,
    RoleAssignment, StandardGroup,
};
use serde_json::{json, Value};
use thiserror::Error;

use crate::{Command, GroupArgs, VariantArgs};

/// Order claimed in the literature for the quaternion symmetry group with
/// anti-automorphisms included. Reported next to the computed count.
pub const PUBLISHED_Q8_SYMMETRY_ORDER: usize = 24;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Morphism(#[from] MorphismError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Dsl(#[from] DslError),
}

pub struct Outcome {
    pub holds: bool,
    pub json: Value,
    pub text: String,
}

impl Outcome {
    fn new(holds: bool, json: Value, text: String) -> Self {
        Self { holds, json, text }
    }
}

pub fn run(command: Command) -> Result<Outcome, CliError> {
    match command {
        Command::CheckGroup { group } => check_group(&*load_group(&group)?),
        Command::ClassifyMap {
            group,
            map,
            images,
            target,
        } => classify(&load_group(&group)?, map, images, target),
        Command::Symmetries { group, anti } => symmetries(&load_group(&group)?, anti),
        Command::SymmetryGroup { group } => symmetry_report(&load_group(&group)?),
        Command::GeneratedSubgroup { group, maps } => generated(&load_group(&group)?, &maps),
        Command::CfCheck {
            group,
            variant,
            assign,
            anti,
            relax,
        } => {
            let g = load_group(&group)?;
            let asg = parse_assignment(&g, &assign, policy(relax))?;
            cf_check(&asg, &load_variant(&variant)?, anti)
        }
        Command::CfEnumerate {
            group,
            variant,
            pin,
            anti,
            relax,
        } => {
            let g = load_group(&group)?;
            let pins = match pin {
                Some(text) => parse_pins(&g, &text)?,
                None => RolePins::new(),
            };
            cf_enumerate(&g, &load_variant(&variant)?, &pins, anti, policy(relax))
        }
        Command::CfOrbit {
            group,
            variant,
            steps,
            assign,
            relax,
        } => {
            let assignment = match assign {
                Some(text) => Some(parse_assignment(&load_group(&group)?, &text, policy(relax))?),
                None => None,
            };
            cf_orbit(&load_variant(&variant)?, steps, assignment.as_ref())
        }
        Command::FractionRule { group, assign } => {
            let g = load_group(&group)?;
            fraction_rule(&g, assign.as_deref())
        }
        Command::Demo => demo(),
    }
}

fn policy(relax: bool) -> Distinctness {
    if relax {
        Distinctness::Relaxed
    } else {
        Distinctness::Required
    }
}

fn builtin_group(name: &str) -> Result<Arc<FiniteGroup>, CliError> {
    let kind: StandardGroup = name.parse()?;
    Ok(Arc::new(standard_group(kind)?))
}

fn load_group(args: &GroupArgs) -> Result<Arc<FiniteGroup>, CliError> {
    if let Some(path) = &args.file {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        return Ok(Arc::new(parse_group_file(&text)?));
    }
    match &args.group {
        Some(name) => builtin_group(name),
        None => Err(CliError::Usage("one of --group or --file is required".into())),
    }
}

fn load_variant(args: &VariantArgs) -> Result<CFVariant, CliError> {
    match (&args.variant, &args.formula) {
        (_, Some(text)) => Ok(parse_formula(text)?),
        (Some(name), None) => CFVariant::builtin(name)
            .ok_or_else(|| CliError::Usage(format!("unknown variant {name:?}; use classic, dual or mosko"))),
        (None, None) => Err(CliError::Usage("one of --variant or --formula is required".into())),
    }
}

fn parse_role_pairs(text: &str) -> Result<Vec<(Role, String)>, CliError> {
    let mut seen = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (role, label) = item
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("expected role=label, got {item:?}")))?;
        let mut letters = role.trim().chars();
        let role = match (letters.next().and_then(Role::from_letter), letters.next()) {
            (Some(r), None) => r,
            _ => return Err(CliError::Usage(format!("unknown role {role:?}; use x, y, a or b"))),
        };
        if seen.iter().any(|(r, _)| *r == role) {
            return Err(CliError::Usage(format!("role {role} given twice")));
        }
        seen.push((role, label.trim().to_string()));
    }
    Ok(seen)
}

fn parse_pins(group: &FiniteGroup, text: &str) -> Result<RolePins, CliError> {
    parse_role_pairs(text)?
        .into_iter()
        .map(|(role, label)| Ok((role, group.index_of(&label)?)))
        .collect()
}

fn parse_assignment(
    group: &Arc<FiniteGroup>,
    text: &str,
    policy: Distinctness,
) -> Result<RoleAssignment, CliError> {
    let pins = parse_pins(group, text)?;
    let mut values = [0; 4];
    for role in Role::ALL {
        values[role.index()] = *pins
            .get(&role)
            .ok_or_else(|| CliError::Usage(format!("assignment is missing role {role}")))?;
    }
    Ok(RoleAssignment::new(group, values, policy)?)
}

fn flags_json(group: &FiniteGroup) -> Value {
    json!(group.structure_flags())
}

fn map_json(map: &GroupMap) -> Value {
    json!(map.to_record())
}

fn check_group(group: &FiniteGroup) -> Result<Outcome, CliError> {
    let flags = group.structure_flags();
    let text = format!(
        "{}: valid group of order {}\n  elements: {}\n  commutative: {}\n  exponent two: {}\n",
        group.name(),
        flags.order,
        group.labels().join(" "),
        flags.commutative,
        flags.exponent_two,
    );
    let json = json!({
        "command": "check-group",
        "group": group.name(),
        "valid": true,
        "elements": group.labels(),
        "flags": flags_json(group),
    });
    Ok(Outcome::new(true, json, text))
}

fn named_map(group: &Arc<FiniteGroup>, name: &str) -> Result<GroupMap, CliError> {
    Ok(QuaternionSymmetry::from_name(name)?.build(group)?)
}

fn classify(
    group: &Arc<FiniteGroup>,
    map: Option<String>,
    images: Option<String>,
    target: Option<String>,
) -> Result<Outcome, CliError> {
    let result = match (map, images) {
        (Some(name), _) => named_map(group, &name)?,
        (None, Some(list)) => {
            let target = match target {
                Some(name) => builtin_group(&name)?,
                None => Arc::clone(group),
            };
            let images = list
                .split(',')
                .map(|l| target.index_of(l.trim()))
                .collect::<Result<Vec<_>, _>>()?;
            classify_map(group, &target, images)?
        }
        (None, None) => return Err(CliError::Usage("one of --map or --images is required".into())),
    };
    let text = format!(
        "kind: {}\nbijective: {}\nmap: {}\n",
        result.kind(),
        result.is_bijective(),
        result.describe()
    );
    let json = json!({
        "command": "classify-map",
        "map": map_json(&result),
        "bijective": result.is_bijective(),
    });
    Ok(Outcome::new(result.kind() != cf_core::MapKind::Neither, json, text))
}

fn symmetries(group: &Arc<FiniteGroup>, anti: bool) -> Result<Outcome, CliError> {
    let maps = enumerate_symmetries(group, anti)?;
    let mut text = format!("{} symmetries of {}\n", maps.len(), group.name());
    for m in &maps {
        let _ = writeln!(text, "  {m}");
    }
    let json = json!({
        "command": "symmetries",
        "group": group.name(),
        "include_anti": anti,
        "count": maps.len(),
        "maps": maps.iter().map(map_json).collect::<Vec<_>>(),
    });
    Ok(Outcome::new(true, json, text))
}

fn symmetry_report(group: &Arc<FiniteGroup>) -> Result<Outcome, CliError> {
    let sym = symmetry_group(group)?;
    let autos = sym.automorphism_count();
    let antis = sym.anti_automorphism_count();
    let aut_sub = sym.automorphism_subgroup();
    let index = sym.order() / aut_sub.len();
    let published = (group.name() == "q8").then_some(PUBLISHED_Q8_SYMMETRY_ORDER);
    let mut text = format!(
        "symmetry group of {}: order {} (computed)\n  automorphisms: {autos}\n  anti-automorphisms: {antis}\n  automorphisms have index {index}\n  table passes group validation: true\n",
        group.name(),
        sym.order(),
    );
    if let Some(claim) = published {
        let _ = writeln!(
            text,
            "  published claim: order {claim}; computed: order {} ({})",
            sym.order(),
            if claim == sym.order() { "agrees" } else { "differs" }
        );
    }
    let json = json!({
        "command": "symmetry-group",
        "group": group.name(),
        "order": sym.order(),
        "automorphisms": autos,
        "anti_automorphisms": antis,
        "automorphism_index": index,
        "valid_group": true,
        "published_order_claim": published,
    });
    Ok(Outcome::new(true, json, text))
}

fn generated(group: &Arc<FiniteGroup>, names: &str) -> Result<Outcome, CliError> {
    let sym = symmetry_group(group)?;
    let gens = names
        .split(',')
        .map(|n| named_map(group, n.trim()))
        .collect::<Result<Vec<_>, _>>()?;
    let sub = sym.generated_subgroup(&gens)?;
    let autos = sub
        .members()
        .iter()
        .filter(|&&m| sym.maps()[m].kind().is_hom())
        .count();
    let text = format!(
        "subgroup generated by {names} in the symmetry group of {} (order {}): order {} ({autos} automorphisms)\n",
        group.name(),
        sym.order(),
        sub.len(),
    );
    let json = json!({
        "command": "generated-subgroup",
        "group": group.name(),
        "generators": names.split(',').map(str::trim).collect::<Vec<_>>(),
        "order": sub.len(),
        "automorphisms": autos,
        "symmetry_group_order": sym.order(),
    });
    Ok(Outcome::new(true, json, text))
}

fn cf_check(asg: &RoleAssignment, variant: &CFVariant, anti: bool) -> Result<Outcome, CliError> {
    let g = asg.group();
    let partial = induced_partial_map(asg, variant)?;
    let found = realizations(asg, variant, anti)?;
    let pairs: Vec<Value> = partial
        .pairs()
        .iter()
        .map(|(&a, &b)| json!([g.label(a), g.label(b)]))
        .collect();
    let named: Vec<&str> = QuaternionSymmetry::ALL
        .into_iter()
        .filter(|s| s.build(g).is_ok_and(|m| found.contains(&m)))
        .map(|s| s.name())
        .collect();
    let mut text = format!(
        "{} at {asg} in {}\n  induced: {}\n  realizations ({}): {}\n",
        render_formula(variant),
        g.name(),
        partial
            .pairs()
            .iter()
            .map(|(&a, &b)| format!("{}->{}", g.label(a), g.label(b)))
            .collect::<Vec<_>>()
            .join(", "),
        if anti { "automorphisms and anti-automorphisms" } else { "automorphisms" },
        found.len(),
    );
    for m in &found {
        let _ = writeln!(text, "    {m}");
    }
    if !named.is_empty() {
        let _ = writeln!(text, "  named: {}", named.join(", "));
    }
    let json = json!({
        "command": "cf-check",
        "variant": variant.name(),
        "formula": render_formula(variant),
        "assignment": asg.to_record(),
        "allow_anti": anti,
        "induced": pairs,
        "count": found.len(),
        "realizations": found.iter().map(map_json).collect::<Vec<_>>(),
        "named": named,
    });
    Ok(Outcome::new(!found.is_empty(), json, text))
}

fn cf_enumerate(
    group: &Arc<FiniteGroup>,
    variant: &CFVariant,
    pins: &RolePins,
    anti: bool,
    policy: Distinctness,
) -> Result<Outcome, CliError> {
    let found = enumerate_assignments(group, variant, anti, pins, policy)?;
    let mut text = format!(
        "{} assignments in {} admit a realization of {}\n",
        found.len(),
        group.name(),
        render_formula(variant)
    );
    for r in &found {
        let _ = writeln!(text, "  {}  ({} realizations)", r.assignment, r.realizations);
    }
    let json = json!({
        "command": "cf-enumerate",
        "group": group.name(),
        "variant": variant.name(),
        "formula": render_formula(variant),
        "allow_anti": anti,
        "count": found.len(),
        "assignments": found
            .iter()
            .map(|r| json!({ "assignment": r.assignment.to_record(), "realizations": r.realizations }))
            .collect::<Vec<_>>(),
    });
    Ok(Outcome::new(!found.is_empty(), json, text))
}

fn chain_json(chain: &Chain, group: Option<&FiniteGroup>) -> Value {
    let steps: Vec<Value> = chain
        .steps
        .iter()
        .map(|s| {
            let tuple = match (s.tuple, group) {
                (Some(t), Some(g)) => json!(t.map(|v| g.label(v))),
                _ => Value::Null,
            };
            json!({ "step": s.step, "side": s.side.to_string(), "tuple": tuple })
        })
        .collect();
    json!(steps)
}

fn cf_orbit(variant: &CFVariant, steps: usize, asg: Option<&RoleAssignment>) -> Result<Outcome, CliError> {
    let chain = iterate_chain(variant, steps, asg)?;
    let group = asg.map(|a| a.group().as_ref());
    let mut text = format!("chain of {}\n", render_formula(variant));
    for s in &chain.steps {
        let _ = write!(text, "  {:>3}: {}", s.step, s.side);
        if let (Some(t), Some(g)) = (s.tuple, group) {
            let _ = write!(text, "   [{}]", t.map(|v| g.label(v)).join(", "));
        }
        text.push('\n');
    }
    let period = |p: Option<usize>| p.map_or("none".to_string(), |p| p.to_string());
    let _ = writeln!(text, "  symbolic period: {}", period(chain.symbolic_period));
    if asg.is_some() {
        let _ = writeln!(text, "  element period: {}", period(chain.element_period));
    }
    let json = json!({
        "command": "cf-orbit",
        "formula": render_formula(variant),
        "chain": chain_json(&chain, group),
        "symbolic_period": chain.symbolic_period,
        "element_period": chain.element_period,
    });
    Ok(Outcome::new(true, json, text))
}

fn fraction_rule(group: &Arc<FiniteGroup>, assign: Option<&str>) -> Result<Outcome, CliError> {
    if let Some(text) = assign {
        let asg = parse_assignment(group, text, Distinctness::Relaxed)?;
        let holds = verify_fraction_rule(&asg)?;
        let json = json!({
            "command": "fraction-rule",
            "group": group.name(),
            "assignment": asg.to_record(),
            "holds": holds,
        });
        return Ok(Outcome::new(holds, json, format!("fraction rule at {asg}: {holds}\n")));
    }
    let n = group.order();
    let mut checked = 0usize;
    let mut failures = Vec::new();
    for x in 0..n {
        for y in 0..n {
            for a in 0..n {
                for b in 0..n {
                    let asg = RoleAssignment::new(group, [x, y, a, b], Distinctness::Relaxed)?;
                    checked += 1;
                    if !verify_fraction_rule(&asg)? {
                        failures.push(asg.to_record());
                    }
                }
            }
        }
    }
    let holds = failures.is_empty();
    let text = format!(
        "fraction rule over all {checked} assignments in {}: {} failures\n",
        group.name(),
        failures.len()
    );
    let json = json!({
        "command": "fraction-rule",
        "group": group.name(),
        "checked": checked,
        "failures": failures,
        "holds": holds,
    });
    Ok(Outcome::new(holds, json, text))
}

struct DemoLog {
    checks: Vec<Value>,
    text: String,
    all_hold: bool,
}

impl DemoLog {
    fn check(&mut self, name: &str, holds: bool, detail: String) {
        self.all_hold &= holds;
        let _ = writeln!(self.text, "[{}] {name}: {detail}", if holds { "ok" } else { "FAIL" });
        self.checks.push(json!({ "check": name, "holds": holds, "detail": detail }));
    }
}

fn demo() -> Result<Outcome, CliError> {
    let q = builtin_group("q8")?;
    let mut log = DemoLog {
        checks: Vec::new(),
        text: String::new(),
        all_hold: true,
    };

    let relations = [
        ("i", "j", "k"),
        ("j", "i", "-k"),
        ("j", "k", "i"),
        ("k", "j", "-i"),
        ("k", "i", "j"),
        ("i", "k", "-j"),
        ("i", "i", "-1"),
        ("j", "j", "-1"),
        ("k", "k", "-1"),
        ("-1", "-1", "1"),
    ];
    let mut broken = Vec::new();
    for (a, b, want) in relations {
        let got = q.label(q.mul(q.index_of(a)?, q.index_of(b)?));
        if got != want {
            broken.push(format!("{a}*{b}={got}"));
        }
    }
    let flags = q.structure_flags();
    log.check(
        "q8 table",
        broken.is_empty(),
        format!(
            "order {}, commutative {}, {} relations checked, {} broken",
            flags.order,
            flags.commutative,
            relations.len(),
            broken.len()
        ),
    );

    let lambda = named_map(&q, "lambda")?;
    let sigma = named_map(&q, "sigma")?;
    let tau = named_map(&q, "tau")?;
    for (name, map, want) in [
        ("lambda", &lambda, cf_core::MapKind::AntiHomomorphism),
        ("sigma", &sigma, cf_core::MapKind::AntiHomomorphism),
        ("tau", &tau, cf_core::MapKind::Homomorphism),
    ] {
        log.check(
            &format!("{name} kind"),
            map.kind() == want && map.is_bijective(),
            format!("{} [{}]", map.kind(), map.describe()),
        );
    }

    let composed = compose_maps(&tau, &sigma)?;
    log.check(
        "lambda = tau o sigma",
        composed == lambda,
        format!("tau o sigma = [{}]", composed.describe()),
    );
    let outer = is_outer(&tau)?;
    log.check("tau is outer", outer, format!("is_outer(tau) = {outer}"));

    let classic_asg = RoleAssignment::from_labels(&q, ["1", "j", "i", "k"], Distinctness::Required)?;
    let found = realizations(&classic_asg, &CFVariant::classic(), true)?;
    log.check(
        "classic realized at x=1,a=i,y=j,b=k",
        found.contains(&lambda),
        format!("{} realizations, lambda among them: {}", found.len(), found.contains(&lambda)),
    );
    let homs = realizations(&classic_asg, &CFVariant::classic(), false)?;
    log.check(
        "classic needs an anti-automorphism",
        homs.is_empty(),
        format!("{} automorphism realizations", homs.len()),
    );

    let dual_asg = RoleAssignment::from_labels(&q, ["i", "j", "k", "1"], Distinctness::Required)?;
    let found = realizations(&dual_asg, &CFVariant::dual(), true)?;
    log.check(
        "dual realized at x=i,y=j,a=k,b=1",
        found.contains(&sigma),
        format!("{} realizations, sigma among them: {}", found.len(), found.contains(&sigma)),
    );

    let sym = symmetry_group(&q)?;
    let claim = PUBLISHED_Q8_SYMMETRY_ORDER;
    log.check(
        "symmetry group census",
        sym.automorphism_count() == sym.anti_automorphism_count(),
        format!(
            "computed order {} ({} automorphisms + {} anti-automorphisms); published claim {claim}",
            sym.order(),
            sym.automorphism_count(),
            sym.anti_automorphism_count()
        ),
    );
    let sub = sym.generated_subgroup(&[lambda.clone(), sigma.clone(), tau.clone()])?;
    log.check(
        "subgroup generated by lambda, sigma, tau",
        true,
        format!("order {}", sub.len()),
    );

    let json = json!({
        "command": "demo",
        "checks": log.checks,
        "symmetry_group_order": sym.order(),
        "published_order_claim": claim,
        "generated_by_lambda_sigma_tau": sub.len(),
        "lambda": lambda.to_record(),
    });
    Ok(Outcome::new(log.all_hold, json, log.text))
}
