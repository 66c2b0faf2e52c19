//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use cf_core::group::catalog;
use cf_core::morphisms::{find_isomorphism, scan_identity_fixing_bijections};
use cf_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Each criterion must finish within this budget.
const TIME_BUDGET: Duration = Duration::from_secs(5);
const PUBLISHED_ORDER_CLAIM: usize = 24;
const FORMULA_CORPUS_SIZE: usize = 1000;
const FORMULA_CORPUS_SEED: u64 = 0x5eed_cf01;

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn q8() -> Arc<FiniteGroup> {
    Arc::new(standard_group(StandardGroup::Q8).unwrap())
}

fn idx(g: &FiniteGroup, label: &str) -> usize {
    g.index_of(label).unwrap()
}

fn prod<'g>(g: &'g FiniteGroup, a: &str, b: &str) -> &'g str {
    g.label(g.mul(idx(g, a), idx(g, b)))
}

fn image<'g>(g: &'g FiniteGroup, m: &GroupMap, label: &str) -> &'g str {
    g.label(m.image(idx(g, label)))
}

fn ac1_q8_table() -> Result<String, String> {
    let q = q8();
    let rows = q.table_rows().map(<[usize]>::to_vec).collect();
    FiniteGroup::new("q8", q.labels().to_vec(), rows, q.identity()).map_err(|e| e.to_string())?;
    let from_file = parse_group_file(include_str!("../../core/data/q8.json")).map_err(|e| e.to_string())?;
    ensure(from_file == *q, "shipped q8 file disagrees with the builtin")?;
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
    for (a, b, want) in relations {
        ensure(prod(&q, a, b) == want, format!("{a}*{b} = {} (want {want})", prod(&q, a, b)))?;
    }
    Ok(format!("order {}, {} relations exact", q.order(), relations.len()))
}

fn ac2_lambda() -> Result<String, String> {
    let q = q8();
    let lambda = QuaternionSymmetry::Lambda.build(&q).unwrap();
    ensure(lambda.kind() == MapKind::AntiHomomorphism, format!("kind {}", lambda.kind()))?;
    ensure(!lambda.kind().is_hom(), "lambda is a homomorphism")?;
    ensure(lambda.is_bijective(), "lambda not bijective")?;
    // lambda(i j) = lambda(k) = j = lambda(j) lambda(i)
    ensure(image(&q, &lambda, prod(&q, "i", "j")) == "j", "lambda(i*j) != j")?;
    ensure(prod(&q, image(&q, &lambda, "j"), image(&q, &lambda, "i")) == "j", "lambda(j)lambda(i) != j")?;
    // lambda(j k) = lambda(i) = k = lambda(k) lambda(j)
    ensure(image(&q, &lambda, prod(&q, "j", "k")) == "k", "lambda(j*k) != k")?;
    ensure(prod(&q, image(&q, &lambda, "k"), image(&q, &lambda, "j")) == "k", "lambda(k)lambda(j) != k")?;
    Ok("anti only, bijective, lambda(ij)=j, lambda(jk)=k".into())
}

fn ac3_dictionary() -> Result<String, String> {
    let q = q8();
    let lambda = QuaternionSymmetry::Lambda.build(&q).unwrap();
    let asg = RoleAssignment::from_labels(&q, ["1", "j", "i", "k"], Distinctness::Required).map_err(|e| e.to_string())?;
    let with_anti = realizations(&asg, &CFVariant::classic(), true).map_err(|e| e.to_string())?;
    ensure(with_anti.contains(&lambda), "lambda missing")?;
    let homs = realizations(&asg, &CFVariant::classic(), false).map_err(|e| e.to_string())?;
    let matching = homs
        .iter()
        .filter(|m| image(&q, m, "i") == "k" && image(&q, m, "j") == "-i" && image(&q, m, "k") == "j")
        .count();
    ensure(matching == 0, format!("{matching} automorphisms restrict to i->k, j->-i, k->j"))?;
    Ok(format!("{} realization(s) with anti, 0 automorphisms", with_anti.len()))
}

fn ac4_dual() -> Result<String, String> {
    let q = q8();
    let sigma = QuaternionSymmetry::Sigma.build(&q).unwrap();
    ensure(image(&q, &sigma, "i") == "j", "sigma(i)")?;
    ensure(image(&q, &sigma, "j") == "-k", "sigma(j)")?;
    ensure(image(&q, &sigma, "k") == "i", "sigma(k)")?;
    let asg = RoleAssignment::from_labels(&q, ["i", "j", "k", "1"], Distinctness::Required).map_err(|e| e.to_string())?;
    let found = realizations(&asg, &CFVariant::dual(), true).map_err(|e| e.to_string())?;
    ensure(found.contains(&sigma), "sigma missing")?;
    Ok(format!("sigma among {} realization(s)", found.len()))
}

fn ac5_composition() -> Result<String, String> {
    let q = q8();
    let [lambda, sigma, tau] = [QuaternionSymmetry::Lambda, QuaternionSymmetry::Sigma, QuaternionSymmetry::Tau]
        .map(|s| s.build(&q).unwrap());
    let composed = compose_maps(&tau, &sigma).map_err(|e| e.to_string())?;
    ensure(composed.images() == lambda.images(), "tau o sigma != lambda")?;
    ensure(tau.kind() == MapKind::Homomorphism && tau.is_bijective(), "tau not an automorphism")?;
    let sym = symmetry_group(&q).map_err(|e| e.to_string())?;
    ensure(sym.map_order(&tau) == Some(3), format!("tau order {:?}", sym.map_order(&tau)))?;
    ensure(is_outer(&tau).map_err(|e| e.to_string())?, "tau is inner")?;
    Ok("tau o sigma = lambda, tau outer of order 3".into())
}

fn ac6_census() -> Result<String, String> {
    let q = q8();
    let scan = scan_identity_fixing_bijections(&q).map_err(|e| e.to_string())?;
    ensure(scan.candidates == 5040, format!("{} candidates", scan.candidates))?;
    let (autos, antis) = (scan.automorphism_count(), scan.anti_automorphism_count());
    ensure(autos == antis, format!("{autos} autos vs {antis} antis"))?;
    ensure(scan.symmetries.iter().all(|m| m.kind() != MapKind::Both), "auto and anti sets overlap")?;
    let sym = symmetry_group(&q).map_err(|e| e.to_string())?;
    ensure(sym.maps() == scan.symmetries.as_slice(), "backtracking disagrees with the scan")?;
    let t = sym.as_group();
    let rows = t.table_rows().map(<[usize]>::to_vec).collect();
    FiniteGroup::new("sym", t.labels().to_vec(), rows, t.identity()).map_err(|e| e.to_string())?;

    let out = run_cli(&["--json", "symmetry-group", "--group", "q8"]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    ensure(report["order"] == sym.order(), "report order")?;
    ensure(report["published_order_claim"] == PUBLISHED_ORDER_CLAIM, "report claim")?;
    Ok(format!(
        "oracle: {autos} automorphisms + {antis} anti-automorphisms = {} (published claim: {PUBLISHED_ORDER_CLAIM})",
        sym.order()
    ))
}

fn ac7_chain() -> Result<String, String> {
    let chain = iterate_chain(&CFVariant::classic(), 2, None).map_err(|e| e.to_string())?;
    let step2 = chain.steps[2].side.to_string();
    ensure(step2 == "F_x(y):F_b^-1(a^-1)", format!("step 2 = {step2}"))?;
    ensure(chain.symbolic_period == Some(6), format!("period {:?}", chain.symbolic_period))?;
    let mut checked = 0;
    for g in catalog().into_iter().filter(|g| g.structure_flags().exponent_two) {
        let g = Arc::new(g);
        let n = g.order();
        for code in 0..n.pow(4) {
            let values = [code % n, code / n % n, code / (n * n) % n, code / (n * n * n)];
            let asg = RoleAssignment::new(&g, values, Distinctness::Relaxed).unwrap();
            let period = iterate_chain(&CFVariant::classic(), 1, Some(&asg)).unwrap().element_period;
            ensure(period.is_some_and(|p| 3 % p == 0), format!("{asg}: period {period:?}"))?;
            checked += 1;
        }
    }
    Ok(format!("step 2 exact, symbolic period 6, {checked} exponent-2 assignments with period | 3"))
}

fn ac8_fraction_rule() -> Result<String, String> {
    let mut checked = 0usize;
    let mut groups = 0;
    for g in catalog().into_iter().filter(|g| g.is_commutative() && g.order() <= 12) {
        let g = Arc::new(g);
        let n = g.order();
        groups += 1;
        for code in 0..n.pow(4) {
            let values = [code % n, code / n % n, code / (n * n) % n, code / (n * n * n)];
            let asg = RoleAssignment::new(&g, values, Distinctness::Relaxed).unwrap();
            ensure(verify_fraction_rule(&asg).unwrap(), format!("fails at {asg} in {}", g.name()))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} assignments over {groups} groups, 0 failures"))
}

fn ac9_mosko() -> Result<String, String> {
    for g in catalog() {
        let g = Arc::new(g);
        ensure(
            mosko_degeneration_check(&g) == g.structure_flags().exponent_two,
            format!("disagrees on {}", g.name()),
        )?;
    }
    let mut realized = Vec::new();
    let pinned: [(&str, [&str; 4]); 4] = [
        ("klein", ["1", "j", "i", "k"]),
        ("ea2-2", ["1", "e2", "e1", "e1e2"]),
        ("ea2-3", ["1", "e2", "e1", "e1e2"]),
        ("ea2-4", ["1", "e2", "e1", "e1e2"]),
    ];
    for (name, labels) in pinned {
        let g = Arc::new(standard_group(name.parse().unwrap()).unwrap());
        let asg = RoleAssignment::from_labels(&g, labels, Distinctness::Required).map_err(|e| e.to_string())?;
        let found = realizations(&asg, &CFVariant::mosko(), false).map_err(|e| e.to_string())?;
        ensure(!found.is_empty(), format!("no automorphism realization in {name}"))?;
        realized.push(format!("{name}:{}", found.len()));
    }
    Ok(format!("flag agreement on catalog; realizations {}", realized.join(" ")))
}

fn ac10_klein_realization() -> Result<String, String> {
    let fg = fraction_transformation_group();
    let g = Arc::new(fg.group);
    ensure(prod(&g, "x -> -x", "x -> 1/x") == "x -> -1/x", "composition entry")?;
    let klein = Arc::new(standard_group(StandardGroup::Klein).unwrap());
    let iso = find_isomorphism(&g, &klein).map_err(|e| e.to_string())?.ok_or("no isomorphism")?;
    ensure(iso.is_bijective() && iso.kind().is_hom(), "search returned a non-isomorphism")?;
    let pairs: Vec<String> = g
        .elements()
        .map(|e| format!("[{}] to {}", g.label(e), klein.label(iso.image(e))))
        .collect();
    Ok(format!("isomorphism {}", pairs.join(", ")))
}

fn random_term(rng: &mut ChaCha8Rng) -> RoleTerm {
    RoleTerm {
        role: Role::ALL[rng.random_range(0..4)],
        inverted: rng.random_bool(0.5),
    }
}

fn ac11_dsl() -> Result<String, String> {
    let builtins = [
        ("F_x(a):F_y(b) => F_x(b):F_a^-1(y)", CFVariant::classic()),
        ("F_x(a):F_y(b) => F_y(x):F_a^-1(b)", CFVariant::dual()),
        ("F_x(a):F_y(b) => F_x(b):F_y(a)", CFVariant::mosko()),
    ];
    for (text, want) in &builtins {
        ensure(parse_formula(text).map_err(|e| e.to_string())? == *want, format!("{text} mismatch"))?;
        ensure(render_formula(want) == *text, format!("render of {} differs", want.name()))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(FORMULA_CORPUS_SEED);
    for _ in 0..FORMULA_CORPUS_SIZE {
        let lhs = FormulaSide::from_terms([0; 4].map(|_| random_term(&mut rng)));
        let rule = cf_core::formula::RoleRule::from_pairs(&Role::ALL.map(|r| (r, random_term(&mut rng))));
        let text = render_formula(&CFVariant::from_rule(lhs, rule));
        let parsed = parse_formula(&text).map_err(|e| format!("{text}: {e}"))?;
        ensure(render_formula(&parsed) == text, format!("{text} re-renders differently"))?;
    }
    Ok(format!("3 built-ins, {FORMULA_CORPUS_SIZE} random formulas byte-identical"))
}

fn cli_bin() -> &'static str {
    env!("CARGO_BIN_EXE_cf")
}

fn run_cli(args: &[&str]) -> std::process::Output {
    Command::new(cli_bin()).args(args).output().expect("cf binary runs")
}

fn ac12_cli() -> Result<String, String> {
    let holds = run_cli(&["cf-check", "--group", "q8", "--variant", "classic", "--assign", "x=1,a=i,y=j,b=k", "--anti"]);
    ensure(holds.status.code() == Some(0), format!("--anti exit {:?}", holds.status.code()))?;
    ensure(String::from_utf8_lossy(&holds.stdout).contains("lambda"), "lambda not reported")?;

    let fails = run_cli(&["cf-check", "--group", "q8", "--variant", "classic", "--assign", "x=1,a=i,y=j,b=k"]);
    ensure(fails.status.code() == Some(1), format!("no --anti exit {:?}", fails.status.code()))?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let bad = dir.path().join("bad.json");
    let magma = r#"{"name":"m","elements":["e","a","b"],"identity":"e","table":[["e","a","b"],["a","e","a"],["b","b","e"]]}"#;
    std::fs::write(&bad, magma).map_err(|e| e.to_string())?;
    let invalid = run_cli(&["check-group", "--file", bad.to_str().unwrap()]);
    ensure(invalid.status.code() == Some(2), format!("bad file exit {:?}", invalid.status.code()))?;
    let diag = String::from_utf8_lossy(&invalid.stderr);
    ensure(diag.contains("(1*1)*2"), format!("no witness triple in {diag:?}"))?;
    ensure(diag.lines().count() == 1, "diagnostic spans several lines")?;

    for args in [
        &["--json", "symmetries", "--group", "q8", "--anti"][..],
        &["--json", "demo"][..],
        &["--json", "cf-enumerate", "--group", "q8", "--variant", "classic", "--anti", "--pin", "x=1"][..],
    ] {
        let (a, b) = (run_cli(args), run_cli(args));
        ensure(a.stdout == b.stdout && !a.stdout.is_empty(), format!("{args:?} not deterministic"))?;
        serde_json::from_slice::<serde_json::Value>(&a.stdout).map_err(|e| e.to_string())?;
    }
    Ok("exit codes 0/1/2 observed, JSON byte-identical across runs".into())
}

fn main() {
    let criteria: [(&str, &str, Check); 12] = [
        ("AC1", "Q8 table fidelity", ac1_q8_table),
        ("AC2", "lambda verification", ac2_lambda),
        ("AC3", "dictionary realization", ac3_dictionary),
        ("AC4", "dual formula realized by sigma", ac4_dual),
        ("AC5", "composition identity", ac5_composition),
        ("AC6", "symmetry census", ac6_census),
        ("AC7", "chain", ac7_chain),
        ("AC8", "fraction rule sweep", ac8_fraction_rule),
        ("AC9", "Mosko degeneration", ac9_mosko),
        ("AC10", "Klein realization", ac10_klein_realization),
        ("AC11", "DSL round-trip", ac11_dsl),
        ("AC12", "CLI contract", ac12_cli),
    ];
    let mut failed = 0;
    for (id, name, check) in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let result = result.and_then(|detail| {
            if elapsed <= TIME_BUDGET {
                Ok(detail)
            } else {
                Err(format!("took {elapsed:.2?}, budget {TIME_BUDGET:?}"))
            }
        });
        match result {
            Ok(detail) => println!("PASS {id:<5} {name} ({elapsed:.2?}): {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {id:<5} {name} ({elapsed:.2?}): {why}");
            }
        }
    }
    println!("{} of {} acceptance criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
