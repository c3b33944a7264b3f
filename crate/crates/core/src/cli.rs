//! The `defilab` command line front end.
//!
//! Every subcommand is a thin wrapper around a library call; the output is
//! a plain-text table or a JSON document carrying `schema_version`.

use std::fmt::Write as _;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::aut::automorphisms;
use crate::definability::{
    alg_to_imp, classify_elements, classify_structure, classify_subset, classify_subsets, pin_elements, search_gap,
    Budget, DefinabilityError, GapMode, Params, Rank,
};
use crate::eval::{satisfying_tuples, solution_set, subset_solutions, EvalError};
use crate::formula::{parse, Formula, Vocabulary};
use crate::hierarchy::{first_divergence, iterate, HFSet, HierarchyError, Iteration, Operator, Stage, StageMode};
use crate::structure::{
    corpus, corpus_structure, gen_cycle, gen_finite_field, gen_linear_order, gen_membership_digraph, load_structure,
    print_structure, Structure, StructureBuilder, StructureError,
};
use crate::Subset;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "defilab", version, about = "Definability, implicit definability and algebraicity on finite structures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Worker threads for the parallel parts; output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Args, Debug)]
struct BudgetArgs {
    /// Quantifier rank bound: a number or `unbounded`.
    #[arg(long, default_value = "unbounded")]
    rank: String,
    /// Parameters: `none`, `all` or a list like `0,2`.
    #[arg(long, default_value = "none")]
    params: String,
    /// Degree cap for algebraicity (default: the universe size).
    #[arg(long)]
    max_degree: Option<usize>,
    /// Synthesize witness formulas.
    #[arg(long)]
    witnesses: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OpArg {
    Def,
    Imp,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum GapArg {
    ImplicitNotExplicit,
    ExplicitNotImplicit,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print a structure in the structure file format.
    Show { source: String },
    /// Automorphism group and orbits.
    Aut {
        source: String,
        /// Parameters fixed pointwise.
        #[arg(long, default_value = "none")]
        params: String,
    },
    /// Degree and definability of every element.
    Elements {
        source: String,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Explicit, implicit and algebraic status of every subset.
    Subsets {
        source: String,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Evaluate a formula, or test a sentence in `A` against a target set.
    Check {
        source: String,
        formula: String,
        /// Subset such as `{0,2}` to compare the solutions with.
        #[arg(long)]
        target: Option<String>,
    },
    /// Synthesize a defining formula for an element or a subset.
    Witness {
        source: String,
        #[arg(long, conflicts_with = "subset", required_unless_present = "subset")]
        element: Option<usize>,
        #[arg(long)]
        subset: Option<String>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Turn an algebraic definition of a set into an implicit one.
    Convert {
        source: String,
        /// Sentence in the predicate `A`.
        formula: String,
        #[arg(long)]
        target: String,
        /// Parameters the sentence may already use.
        #[arg(long, default_value = "none")]
        params: String,
    },
    /// Define each element of a definable set carrying a definable order.
    Pin {
        source: String,
        /// Formula in one free variable defining the set.
        #[arg(long)]
        set: String,
        /// Formula in two free variables defining a strict order on the set.
        #[arg(long)]
        order: String,
    },
    /// Iterate the DEF or IMP stage operator from a hereditarily finite set.
    Hierarchy {
        /// `hf:<code>` (the stage is the transitive closure of `{code}`),
        /// `V<m>` or `empty`.
        #[arg(default_value = "hf:0")]
        source: String,
        #[arg(long, value_enum, default_value_t = OpArg::Both)]
        op: OpArg,
        #[arg(long, default_value_t = 3)]
        steps: usize,
        /// Print every stage as `<code> <braces>` lines.
        #[arg(long)]
        dump: bool,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Look for subsets on one side of the explicit/implicit gap.
    Gap {
        /// Structure sources; `corpus` and `digraphs:<n>` expand to families.
        #[arg(required = true)]
        sources: Vec<String>,
        #[arg(long)]
        rank: usize,
        #[arg(long, value_enum, default_value_t = GapArg::ImplicitNotExplicit)]
        mode: GapArg,
    },
}

/// Failure of a CLI run, carrying its exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Analysis(String),
    Cap(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Analysis(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Cap(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Analysis(m) | Failure::Cap(m) => m,
        }
    }
}

impl From<DefinabilityError> for Failure {
    fn from(e: DefinabilityError) -> Self {
        if e.is_cap() {
            Failure::Cap(e.to_string())
        } else {
            Failure::Analysis(e.to_string())
        }
    }
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Self {
        DefinabilityError::from(e).into()
    }
}

impl From<StructureError> for Failure {
    fn from(e: StructureError) -> Self {
        DefinabilityError::from(e).into()
    }
}

impl From<HierarchyError> for Failure {
    fn from(e: HierarchyError) -> Self {
        if e.is_cap() {
            Failure::Cap(e.to_string())
        } else {
            Failure::Analysis(e.to_string())
        }
    }
}

/// Run the CLI on `argv` (including the program name), writing the report
/// to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<O: Write, E: Write>(argv: &[String], out: &mut O, err: &mut E) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = out.write_all(text.as_bytes());
            } else {
                let _ = err.write_all(text.as_bytes());
            }
            return code;
        }
    };
    let mut notes = Notes::default();
    let result = match cli.threads {
        Some(0) => Err(Failure::Usage("--threads must be at least 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli, &mut notes)),
            Err(e) => Err(Failure::Analysis(e.to_string())),
        },
        None => dispatch(&cli, &mut notes),
    };
    for w in &notes.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    let failure = match result {
        Ok(report) => {
            let _ = out.write_all(report.as_bytes());
            notes.late
        }
        Err(f) => Some(f),
    };
    match failure {
        None => 0,
        Some(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.code()
        }
    }
}

/// Side channel of a run: warnings for stderr, and a failure that still
/// produced a (partial) report.
#[derive(Default)]
struct Notes {
    warnings: Vec<String>,
    late: Option<Failure>,
}

fn dispatch(cli: &Cli, notes: &mut Notes) -> Result<String, Failure> {
    let fmt = cli.format;
    match &cli.command {
        Command::Show { source } => show(&load(source)?, fmt),
        Command::Aut { source, params } => aut(&load(source)?, params, fmt),
        Command::Elements { source, budget } => elements(&load(source)?, budget, fmt),
        Command::Subsets { source, budget } => subsets(&load(source)?, budget, fmt),
        Command::Check { source, formula, target } => check(&load(source)?, formula, target.as_deref(), fmt),
        Command::Witness { source, element, subset, budget } => {
            witness(&load(source)?, *element, subset.as_deref(), budget, fmt, notes)
        }
        Command::Convert { source, formula, target, params } => convert(&load(source)?, formula, target, params, fmt),
        Command::Pin { source, set, order } => pin(&load(source)?, set, order, fmt),
        Command::Hierarchy { source, op, steps, dump, budget } => hierarchy(source, *op, *steps, *dump, budget, fmt, notes),
        Command::Gap { sources, rank, mode } => gap(sources, *rank, *mode, fmt),
    }
}

// ---- arguments ----

fn number<T: std::str::FromStr>(text: &str, what: &str) -> Result<T, Failure> {
    text.trim().parse().map_err(|_| Failure::Usage(format!("invalid {what} `{text}`")))
}

/// Resolve a structure source: a generator spec, a corpus name or a file.
fn load(source: &str) -> Result<Structure, Failure> {
    if let Some(n) = source.strip_prefix("linord:") {
        return Ok(gen_linear_order(number(n, "size")?)?);
    }
    if let Some(n) = source.strip_prefix("cycle:") {
        return Ok(gen_cycle(number(n, "size")?)?);
    }
    if let Some(spec) = source.strip_prefix("gf:") {
        let (p, d) = spec.split_once(',').unwrap_or((spec, "1"));
        return Ok(gen_finite_field(number(p, "characteristic")?, number(d, "degree")?)?);
    }
    if let Some(code) = source.strip_prefix("hf:") {
        return Ok(gen_membership_digraph(&HFSet::decode(number(code, "code")?)));
    }
    if let Some(s) = corpus_structure(source) {
        return Ok(s);
    }
    match std::fs::read_to_string(source) {
        Ok(text) => Ok(load_structure(&text)?),
        Err(e) => Err(Failure::Usage(format!("`{source}` is neither a known structure nor a readable file: {e}"))),
    }
}

fn parse_params(text: &str) -> Result<Params, Failure> {
    match text.trim() {
        "none" => Ok(Params::None),
        "all" => Ok(Params::All),
        list => {
            let items: Result<Vec<usize>, Failure> =
                list.split(',').filter(|s| !s.trim().is_empty()).map(|s| number(s, "parameter")).collect();
            Ok(Params::List(items?))
        }
    }
}

fn parse_budget(b: &BudgetArgs) -> Result<Budget, Failure> {
    let rank = match b.rank.trim() {
        "unbounded" => Rank::Unbounded,
        k => Rank::Finite(number(k, "rank")?),
    };
    if b.max_degree == Some(0) {
        return Err(Failure::Usage("--max-degree must be at least 1".into()));
    }
    Ok(Budget { rank, params: parse_params(&b.params)?, max_degree: b.max_degree })
}

/// `{0,2}`, `0,2`, `{}` or the empty string.
fn parse_subset(text: &str) -> Result<Subset, Failure> {
    let inner = text.trim().trim_start_matches('{').trim_end_matches('}');
    inner.split(',').filter(|s| !s.trim().is_empty()).map(|s| number(s, "element")).collect()
}

fn parse_formula(s: &Structure, text: &str) -> Result<Formula, Failure> {
    let voc = Vocabulary::new(s.signature()).with_predicate("A");
    parse(text, &voc).map_err(|e| Failure::Usage(format!("formula: {e}")))
}

// ---- output helpers ----

fn json_doc(command: &str, s: Option<&Structure>, body: Value) -> String {
    let mut doc = json!({ "schema_version": SCHEMA_VERSION, "command": command });
    if let Some(s) = s {
        doc["structure"] = json!({ "name": s.name(), "size": s.size() });
    }
    if let (Value::Object(d), Value::Object(b)) = (&mut doc, body) {
        d.extend(b);
    }
    let mut text = serde_json::to_string_pretty(&doc).expect("reports serialize");
    text.push('\n');
    text
}

fn header(out: &mut String, s: &Structure) {
    let _ = writeln!(out, "structure {} ({} element{})", s.name(), s.size(), plural(s.size()));
}

fn plural(n: usize) -> &'static str {
    if n == 1 {
        ""
    } else {
        "s"
    }
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// Left-aligned columns separated by two spaces.
fn table(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> =
        (0..cols).map(|c| rows.iter().filter_map(|r| r.get(c)).map(|x| x.chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for r in rows {
        let mut line = String::new();
        for (c, cell) in r.iter().enumerate() {
            if c + 1 == r.len() {
                line.push_str(cell);
            } else {
                let _ = write!(line, "{:<w$}  ", cell, w = widths[c]);
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

fn element_name(s: &Structure, a: usize) -> String {
    match s.label(a) {
        Some(l) if l != a.to_string() => format!("{a} ({l})"),
        _ => a.to_string(),
    }
}

// ---- subcommands ----

fn show(s: &Structure, fmt: Format) -> Result<String, Failure> {
    match fmt {
        Format::Table => Ok(print_structure(s)),
        Format::Json => {
            let sig = s.signature();
            let relations: Vec<Value> = sig
                .relations()
                .iter()
                .zip(s.relations())
                .map(|((name, arity), r)| json!({ "name": name, "arity": arity, "tuples": r.tuples() }))
                .collect();
            let functions: Vec<Value> = sig
                .functions()
                .iter()
                .zip(s.functions())
                .map(|((name, arity), f)| {
                    let table: Vec<Value> = f.entries().map(|(args, v)| json!([args, v])).collect();
                    json!({ "name": name, "arity": arity, "table": table })
                })
                .collect();
            let labels: Vec<Option<&str>> = (0..s.size()).map(|i| s.label(i)).collect();
            Ok(json_doc("show", Some(s), json!({ "relations": relations, "functions": functions, "labels": labels })))
        }
    }
}

fn aut(s: &Structure, params: &str, fmt: Format) -> Result<String, Failure> {
    let params = Budget::unbounded().with_params(parse_params(params)?).resolve(s.size())?.params;
    let g = automorphisms(s, &params);
    let orbits = g.orbits();
    match fmt {
        Format::Json => Ok(json_doc(
            "aut",
            Some(s),
            json!({ "fixed": params, "order": g.order(), "rigid": g.is_trivial(), "orbits": orbits, "automorphisms": g.perms() }),
        )),
        Format::Table => {
            let mut out = String::new();
            header(&mut out, s);
            if !params.is_empty() {
                let _ = writeln!(out, "fixing {}", Subset::from_indices(params.iter().copied()));
            }
            let _ = writeln!(out, "group order {}{}", g.order(), if g.is_trivial() { " (rigid)" } else { "" });
            let orbits: Vec<String> = orbits.iter().map(Subset::to_string).collect();
            let _ = writeln!(out, "orbits {}", orbits.join(" "));
            for p in g.perms() {
                let images: Vec<String> = p.iter().map(usize::to_string).collect();
                let _ = writeln!(out, "  [{}]", images.join(" "));
            }
            Ok(out)
        }
    }
}

fn elements(s: &Structure, args: &BudgetArgs, fmt: Format) -> Result<String, Failure> {
    let budget = parse_budget(args)?;
    let reports = classify_elements(s, &budget, args.witnesses)?;
    let summary = classify_structure(s, &budget)?;
    match fmt {
        Format::Json => Ok(json_doc(
            "elements",
            Some(s),
            json!({
                "budget": summary.budget,
                "pointwise_definable": summary.pointwise_definable,
                "pointwise_algebraic_degree": summary.pointwise_algebraic_degree,
                "elements": reports,
            }),
        )),
        Format::Table => {
            let mut out = String::new();
            header(&mut out, s);
            let _ = writeln!(out, "budget: {}", summary.budget);
            let mut rows = vec![vec!["element".to_string(), "degree".into(), "definable".into(), "algebraic".into()]];
            if args.witnesses {
                rows[0].push("witness".into());
            }
            for r in &reports {
                let mut row = vec![element_name(s, r.element), r.degree.to_string(), yes(r.definable).into(), yes(r.algebraic).into()];
                if let Some(w) = &r.witness {
                    row.push(w.to_string());
                }
                rows.push(row);
            }
            out.push_str(&table(&rows));
            let _ = writeln!(
                out,
                "pointwise definable: {}, largest degree: {}",
                yes(summary.pointwise_definable),
                summary.pointwise_algebraic_degree
            );
            Ok(out)
        }
    }
}

fn subsets(s: &Structure, args: &BudgetArgs, fmt: Format) -> Result<String, Failure> {
    let budget = parse_budget(args)?;
    let resolved = budget.resolve(s.size())?;
    let reports = classify_subsets(s, &budget, args.witnesses)?;
    match fmt {
        Format::Json => Ok(json_doc("subsets", Some(s), json!({ "budget": resolved, "subsets": reports }))),
        Format::Table => {
            let mut out = String::new();
            header(&mut out, s);
            let _ = writeln!(out, "budget: {resolved}");
            let mut rows = vec![vec!["subset".to_string(), "explicit".into(), "implicit".into(), "degree".into(), "algebraic".into()]];
            for r in &reports {
                rows.push(vec![r.subset.to_string(), yes(r.explicit).into(), yes(r.implicit).into(), r.alg_degree.to_string(), yes(r.algebraic).into()]);
            }
            out.push_str(&table(&rows));
            if args.witnesses {
                for r in &reports {
                    if let Some(w) = &r.explicit_witness {
                        let _ = writeln!(out, "{} explicit: {w}", r.subset);
                    }
                    if let Some(w) = &r.implicit_witness {
                        let _ = writeln!(out, "{} implicit: {w}", r.subset);
                    }
                }
            }
            let count = |f: fn(&crate::definability::SubsetReport) -> bool| reports.iter().filter(|r| f(r)).count();
            let _ = writeln!(
                out,
                "{} subsets: {} explicit, {} implicit, {} algebraic",
                reports.len(),
                count(|r| r.explicit),
                count(|r| r.implicit),
                count(|r| r.algebraic)
            );
            Ok(out)
        }
    }
}

fn check(s: &Structure, text: &str, target: Option<&str>, fmt: Format) -> Result<String, Failure> {
    let f = parse_formula(s, text)?;
    let target = target.map(parse_subset).transpose()?;
    let free: Vec<String> = f.free_variables().into_iter().collect();
    let uses_predicate = !f.predicates().is_empty();
    let (kind, body, lines): (&str, Value, Vec<String>) = if uses_predicate {
        if !free.is_empty() {
            return Err(Failure::Usage(format!("a formula mentioning A must be a sentence; free: {}", free.join(", "))));
        }
        let params: Vec<usize> = f.params().into_iter().collect();
        let sols = subset_solutions(s, &f, &params)?;
        let mut lines = vec![format!("{} solution{}", sols.len(), plural(sols.len()))];
        lines.extend(sols.iter().map(|b| format!("  {b}")));
        let mut body = json!({ "solutions": sols });
        if let Some(t) = &target {
            let member = sols.contains(t);
            let unique = member && sols.len() == 1;
            lines.push(format!("target {t}: solution {}, implicitly defined {}", yes(member), yes(unique)));
            body["target"] = json!({ "subset": t, "solution": member, "implicitly_defined": unique });
        }
        ("implicit", body, lines)
    } else if free.len() <= 1 && !(free.is_empty() && target.is_none()) {
        let set = solution_set(s, &f)?;
        let mut lines = vec![format!("solution set {set}")];
        let mut body = json!({ "solution_set": set });
        if let Some(t) = &target {
            lines.push(format!("target {t}: defined {}", yes(set == *t)));
            body["target"] = json!({ "subset": t, "defined": set == *t });
        }
        ("explicit", body, lines)
    } else if free.is_empty() {
        let holds = solution_set(s, &f)?.len() == s.size();
        (
            "sentence",
            json!({ "holds": holds }),
            vec![format!("{}", if holds { "true" } else { "false" })],
        )
    } else {
        if target.is_some() {
            return Err(Failure::Usage("--target needs at most one free variable".into()));
        }
        let vars: Vec<&str> = free.iter().map(String::as_str).collect();
        let tuples = satisfying_tuples(s, &f, &vars)?;
        let mut lines = vec![format!("{} tuple{} over ({})", tuples.len(), plural(tuples.len()), free.join(", "))];
        lines.extend(tuples.iter().map(|t| format!("  {t:?}")));
        ("tuples", json!({ "variables": free, "tuples": tuples }), lines)
    };
    match fmt {
        Format::Json => {
            let mut body = body;
            body["formula"] = json!(f.to_string());
            body["kind"] = json!(kind);
            Ok(json_doc("check", Some(s), body))
        }
        Format::Table => {
            let mut out = String::new();
            header(&mut out, s);
            let _ = writeln!(out, "formula: {f}");
            for l in lines {
                let _ = writeln!(out, "{l}");
            }
            Ok(out)
        }
    }
}

fn witness(
    s: &Structure,
    element: Option<usize>,
    subset: Option<&str>,
    args: &BudgetArgs,
    fmt: Format,
    notes: &mut Notes,
) -> Result<String, Failure> {
    let budget = parse_budget(args)?;
    let resolved = budget.resolve(s.size())?;
    let note = (!s.is_relational()).then_some("witnesses use the graph relations of the function symbols");
    if let Some(note) = note {
        notes.warnings.push(note.to_string());
    }
    let mut out = String::new();
    if let Some(a) = element {
        if a >= s.size() {
            return Err(EvalError::ElementOutOfRange { index: a, size: s.size() }.into());
        }
        let reports = classify_elements(s, &budget, true)?;
        let r = &reports[a];
        return match fmt {
            Format::Json => Ok(json_doc("witness", Some(s), json!({ "budget": resolved, "element": r, "note": note }))),
            Format::Table => {
                header(&mut out, s);
                let _ = writeln!(out, "budget: {resolved}");
                let _ = writeln!(out, "element {} has degree {}", element_name(s, a), r.degree);
                if let Some(w) = &r.witness {
                    let _ = writeln!(out, "{w}");
                }
                Ok(out)
            }
        };
    }
    let a = parse_subset(subset.unwrap_or_default())?;
    let r = classify_subset(s, &budget, &a, true)?;
    match fmt {
        Format::Json => Ok(json_doc("witness", Some(s), json!({ "budget": resolved, "subset": r, "note": note }))),
        Format::Table => {
            header(&mut out, s);
            let _ = writeln!(out, "budget: {resolved}");
            let _ = writeln!(
                out,
                "subset {}: explicit {}, implicit {}, degree {}",
                r.subset,
                yes(r.explicit),
                yes(r.implicit),
                r.alg_degree
            );
            if let Some(w) = &r.explicit_witness {
                let _ = writeln!(out, "explicit: {w}");
            }
            if let Some(w) = &r.implicit_witness {
                let _ = writeln!(out, "implicit: {w}");
            }
            Ok(out)
        }
    }
}

fn convert(s: &Structure, text: &str, target: &str, params: &str, fmt: Format) -> Result<String, Failure> {
    let psi = parse_formula(s, text)?;
    let target = parse_subset(target)?;
    let mut params = Budget::unbounded().with_params(parse_params(params)?).resolve(s.size())?.params;
    params.extend(psi.params().into_iter().filter(|p| !params.contains(p)).collect::<Vec<_>>());
    params.sort_unstable();
    let c = alg_to_imp(s, &psi, &params, &target)?;
    match fmt {
        Format::Json => Ok(json_doc(
            "convert",
            Some(s),
            json!({ "input": psi.to_string(), "target": target, "params": params, "conversion": c }),
        )),
        Format::Table => {
            let mut out = String::new();
            header(&mut out, s);
            let _ = writeln!(out, "input: {psi}");
            let _ = writeln!(out, "target {target}, {} rival solution{}", c.rivals, plural(c.rivals));
            let added: Vec<String> = c.added_params.iter().map(|p| format!("@{p}")).collect();
            let _ = writeln!(out, "added parameters: {}", if added.is_empty() { "none".to_string() } else { added.join(" ") });
            let _ = writeln!(out, "{}", c.sentence);
            Ok(out)
        }
    }
}

fn pin(s: &Structure, set: &str, order: &str, fmt: Format) -> Result<String, Failure> {
    let voc = Vocabulary::new(s.signature());
    let set_def = parse(set, &voc).map_err(|e| Failure::Usage(format!("--set: {e}")))?;
    let order_def = parse(order, &voc).map_err(|e| Failure::Usage(format!("--order: {e}")))?;
    let pins = pin_elements(s, &set_def, &order_def)?;
    match fmt {
        Format::Json => Ok(json_doc(
            "pin",
            Some(s),
            json!({ "set": set_def.to_string(), "order": order_def.to_string(), "elements": pins }),
        )),
        Format::Table => {
            let mut out = String::new();
            header(&mut out, s);
            for p in &pins {
                let _ = writeln!(out, "#{} = {}: {}", p.position, element_name(s, p.element), p.formula);
            }
            Ok(out)
        }
    }
}

fn start_stage(source: &str) -> Result<Stage, Failure> {
    if source == "empty" {
        return Ok(Stage::empty());
    }
    if let Some(code) = source.strip_prefix("hf:") {
        return Ok(Stage::generated_by(&HFSet::decode(number(code, "code")?)));
    }
    if let Some(m) = source.strip_prefix('V') {
        let m: usize = number(m, "level")?;
        if m > 4 {
            return Err(Failure::Usage("V<m> is available for m <= 4".into()));
        }
        return Ok(Stage::von_neumann(m));
    }
    Err(Failure::Usage(format!("hierarchy start must be `hf:<code>`, `V<m>` or `empty`, not `{source}`")))
}

fn iteration_json(it: &Iteration, op: Operator, budget: &Budget, dump: bool) -> Value {
    let stages: Vec<Value> = it
        .stages
        .iter()
        .map(|st| {
            let mut v = json!({ "size": st.len(), "von_neumann_level": st.von_neumann_level() });
            if dump {
                v["codes"] = json!(st.codes());
            }
            v
        })
        .collect();
    let budgets: Vec<Value> = it.stages.iter().filter_map(|st| budget.resolve(st.len().max(1)).ok()).map(|b| json!(b)).collect();
    json!({
        "operator": op,
        "stages": stages,
        "step_budgets": budgets,
        "sizes": it.sizes(),
        "first_divergence_from_vn": it.first_divergence_from_vn(),
        "stopped": it.stopped.as_ref().map(|e| e.to_string()),
    })
}

fn hierarchy(
    source: &str,
    op: OpArg,
    steps: usize,
    dump: bool,
    args: &BudgetArgs,
    fmt: Format,
    notes: &mut Notes,
) -> Result<String, Failure> {
    let budget = parse_budget(args)?;
    let start = start_stage(source)?;
    let ops: Vec<Operator> = match op {
        OpArg::Def => vec![Operator::Def],
        OpArg::Imp => vec![Operator::Imp],
        OpArg::Both => vec![Operator::Def, Operator::Imp],
    };
    let runs: Vec<(Operator, Iteration)> =
        ops.iter().map(|&o| (o, iterate(&start, &StageMode::new(o, budget.clone()), steps))).collect();
    let between = (runs.len() == 2).then(|| first_divergence(&runs[0].1, &runs[1].1));
    let stopped = runs.iter().find_map(|(_, it)| it.stopped.clone());

    let report = match fmt {
        Format::Json => {
            let iterations: Vec<Value> = runs.iter().map(|(o, it)| iteration_json(it, *o, &budget, dump)).collect();
            let mut body = json!({ "start": source, "steps": steps, "iterations": iterations });
            if let Some(d) = between {
                body["def_imp_divergence"] = json!(d);
            }
            json_doc("hierarchy", None, body)
        }
        Format::Table => {
            let mut out = String::new();
            let _ = writeln!(out, "start {source} ({} element{})", start.len(), plural(start.len()));
            for (o, it) in &runs {
                let _ = writeln!(out, "{o}:");
                for (i, st) in it.stages.iter().enumerate() {
                    let level = st.von_neumann_level().map(|m| format!(" = V_{m}")).unwrap_or_default();
                    let step_budget = if i + 1 < it.stages.len() {
                        budget.resolve(st.len().max(1)).map(|b| format!("  [next step: {b}]")).unwrap_or_default()
                    } else {
                        String::new()
                    };
                    let _ = writeln!(out, "  stage {i}: {} element{}{level}{step_budget}", st.len(), plural(st.len()));
                    if dump {
                        for line in st.dump().lines() {
                            let _ = writeln!(out, "    {line}");
                        }
                    }
                }
                let sizes: Vec<String> = it.sizes().iter().map(usize::to_string).collect();
                let _ = writeln!(out, "  sizes {}", sizes.join(","));
                match it.first_divergence_from_vn() {
                    None => {
                        let _ = writeln!(out, "  no divergence from V_n");
                    }
                    Some(i) => {
                        let _ = writeln!(out, "  diverges from V_n at stage {i}");
                    }
                }
                if let Some(e) = &it.stopped {
                    let _ = writeln!(out, "  stopped after stage {}: {e}", it.stages.len() - 1);
                }
            }
            match between {
                Some(None) => {
                    let _ = writeln!(out, "DEF and IMP: no divergence");
                }
                Some(Some(i)) => {
                    let _ = writeln!(out, "DEF and IMP: first divergence at stage {i}");
                }
                None => {}
            }
            out
        }
    };
    notes.late = stopped.map(Failure::from);
    Ok(report)
}

/// Every loopless digraph with at most `n` vertices, named `dg<n>:<mask>`.
fn all_digraphs(max: usize) -> Result<Vec<Structure>, Failure> {
    if max > 4 {
        return Err(Failure::Usage("digraphs:<n> is available for n <= 4".into()));
    }
    let mut out = Vec::new();
    for n in 1..=max {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).collect();
        for mask in 0..1u64 << pairs.len() {
            let mut b = StructureBuilder::new(&format!("dg{n}:{mask}"), n);
            b.relation("E", 2, pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &(i, j))| vec![i, j]));
            out.push(b.build()?);
        }
    }
    Ok(out)
}

fn gap(sources: &[String], rank: usize, mode: GapArg, fmt: Format) -> Result<String, Failure> {
    let mut family = Vec::new();
    for src in sources {
        if src == "corpus" {
            family.extend(corpus());
        } else if let Some(n) = src.strip_prefix("digraphs:") {
            family.extend(all_digraphs(number(n, "size")?)?);
        } else {
            family.push(load(src)?);
        }
    }
    let mode = match mode {
        GapArg::ImplicitNotExplicit => GapMode::ImplicitNotExplicit,
        GapArg::ExplicitNotImplicit => GapMode::ExplicitNotImplicit,
    };
    let report = search_gap(&family, rank, mode)?;
    match fmt {
        Format::Json => Ok(json_doc("gap", None, json!({ "report": report }))),
        Format::Table => {
            let mut out = String::new();
            let side = match mode {
                GapMode::ImplicitNotExplicit => "implicit but not explicit",
                GapMode::ExplicitNotImplicit => "explicit but not implicit",
            };
            let _ = writeln!(out, "{} structure{} checked at rank {rank}, no parameters", report.structures_checked, plural(report.structures_checked));
            if report.entries.is_empty() {
                let _ = writeln!(out, "no subset is {side}");
            } else {
                let _ = writeln!(out, "{} subset{} {side}:", report.entries.len(), plural(report.entries.len()));
                for e in &report.entries {
                    let _ = writeln!(out, "  {} {} (degree {})", e.structure, e.subset, e.alg_degree);
                }
            }
            Ok(out)
        }
    }
}
