//! Implementations of the single-formula commands, conformance and DCL tools.

use std::fmt::Write as _;
use std::path::Path;

use gadgetnet::compiler::{construction, reference, Backend};
use gadgetnet::dcl::{dcl_decide, dcl_suite, ConstraintGraph, DclConformanceReport, DclNetwork, DclProblem, DclRun};
use gadgetnet::gadgets::conformance::{base_prefixes, check_with_reverse, product_conformance, random_closed_sequence};
use gadgetnet::gadgets::make_library_gadget;
use gadgetnet::network::{network_to_dot, network_to_json, trace_to_dot, trace_to_json};
use gadgetnet::{compile, GadgetKind, Network};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::args::{BackendArg, Format, Limits, OutputArgs, RunArgs};
use crate::pipeline::{
    build, build_input, outcome_json, outcome_text, read_file, read_formula, run, usage, Built, CliError, Run,
    RunConfig,
};

const FRAMEWORK: [GadgetKind; 3] = [GadgetKind::Switch, GadgetKind::ReversibleFanIn, GadgetKind::AbaCrossover];

/// Deterministic pretty JSON; object keys come out sorted.
pub fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}

/// Write `text` to `--out` or standard output.
pub fn emit(output: &OutputArgs, text: &str) -> Result<(), CliError> {
    match &output.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn unsupported_format(command: &str, format: Format) -> CliError {
    CliError::Usage(format!("{command} does not support --format {}", format_name(format)))
}

fn format_name(f: Format) -> &'static str {
    match f {
        Format::Json => "json",
        Format::Dot => "dot",
        Format::Text => "text",
    }
}

pub fn eval(file: &Path) -> Result<(), CliError> {
    let f = read_formula(file)?;
    println!("{}", if f.evaluate() { "TRUE" } else { "FALSE" });
    Ok(())
}

/// Graph JSON plus the target and seed edge names.
fn dcl_json(d: &DclNetwork) -> Value {
    let g = &d.problem.graph;
    let mut v = g.to_json();
    v["target"] = json!(g.edges[d.problem.target].name);
    v["seed"] = json!(g.edges[d.seed].name);
    v
}

fn network_summary(net: &Network) -> String {
    let mut kinds = std::collections::BTreeMap::<String, usize>::new();
    for inst in net.instances() {
        *kinds.entry(inst.template.name().to_string()).or_default() += 1;
    }
    let mut s = format!("{} gadget instances, {} edges\n", net.instances().len(), net.edges().len());
    for (k, n) in kinds {
        let _ = writeln!(s, "  {k}: {n}");
    }
    let _ = writeln!(s, "start: {}\ntarget: {}", net.port_name(net.start()), net.port_name(net.target()));
    s
}

pub fn compile_cmd(file: &Path, run_args: &RunArgs, output: &OutputArgs) -> Result<(), CliError> {
    let config = RunConfig::new(run_args)?;
    let f = read_formula(file)?;
    if config.backend == BackendArg::None && output.format == Format::Text {
        let compiled = compile(&f, config.mode).map_err(usage)?;
        let mut s = network_summary(&compiled.network);
        let _ = writeln!(s, "crossovers: {}", compiled.crossings.len());
        return emit(output, &s);
    }
    let text = match (build(&f, &config)?, output.format) {
        (Built::Gadgets(net), Format::Json) => {
            let mut s = network_to_json(&net).map_err(usage)?;
            s.push('\n');
            s
        }
        (Built::Gadgets(net), Format::Dot) => network_to_dot(&net),
        (Built::Gadgets(net), Format::Text) => network_summary(&net),
        (Built::Dcl(d), Format::Json) => json_text(&dcl_json(&d)),
        (Built::Dcl(d), Format::Dot) => d.problem.graph.to_dot(&d.problem.graph.initial),
        (Built::Dcl(d), Format::Text) => {
            let g = &d.problem.graph;
            format!(
                "{} vertices, {} edges\ntarget: {}\nseed: {}\n",
                g.vertices.len(),
                g.edges.len(),
                g.edges[d.problem.target].name,
                g.edges[d.seed].name
            )
        }
    };
    emit(output, &text)
}

pub fn simulate_cmd(file: &Path, run_args: &RunArgs, output: &OutputArgs) -> Result<(), CliError> {
    let config = RunConfig::new(run_args)?;
    let (formula, built) = build_input(file, &config)?;
    let result = run(&built, &config, false);
    let outcome = outcome_json(&built, &result);
    let text = match output.format {
        Format::Json => json_text(&json!({
            "config": config.to_json(),
            "formula": formula.as_ref().map(|f| f.to_string()),
            "outcome": outcome,
        })),
        Format::Text => format!("{}\n", outcome_text(&outcome)),
        Format::Dot => return Err(unsupported_format("simulate", Format::Dot)),
    };
    emit(output, &text)
}

/// The closing element of a trace: the outcome, tagged as the end marker.
fn end_marker(outcome: &Value) -> Value {
    let mut m = outcome.clone();
    m["end"] = json!(true);
    m
}

pub fn trace_cmd(file: &Path, run_args: &RunArgs, output: &OutputArgs) -> Result<(), CliError> {
    let config = RunConfig::new(run_args)?;
    let f = read_formula(file)?;
    let built = build(&f, &config)?;
    let result = run(&built, &config, true);
    let outcome = outcome_json(&built, &result);
    let text = match (&built, &result, output.format) {
        (Built::Gadgets(net), Run::Gadgets(out), Format::Json) => {
            let Value::Array(mut events) = trace_to_json(net, out.trace()) else { unreachable!() };
            events.push(end_marker(&outcome));
            json_text(&json!({
                "config": config.to_json(),
                "formula": f.to_string(),
                "start": net.port_name(net.start()),
                "target": net.port_name(net.target()),
                "trace": events,
            }))
        }
        (Built::Gadgets(net), Run::Gadgets(out), Format::Dot) => {
            let dot = trace_to_dot(net, out.trace());
            close_dot(dot, &outcome_text(&outcome))
        }
        (Built::Gadgets(net), Run::Gadgets(out), Format::Text) => {
            let mut s = String::new();
            for e in &out.trace().events {
                let t = &net.instance(e.instance).template;
                let _ = writeln!(
                    s,
                    "{} {} {} -> {}",
                    e.step,
                    net.instance(e.instance).id,
                    t.ports()[e.entry],
                    t.ports()[e.exit]
                );
            }
            let _ = writeln!(s, "{}", outcome_text(&outcome));
            s
        }
        (Built::Dcl(d), Run::Dcl(r), format) => dcl_trace(d, r, &config, &f.to_string(), &outcome, format),
        _ => unreachable!("run matches its artifact"),
    };
    emit(output, &text)
}

/// Insert an end-of-trace note before the closing brace of a DOT graph.
fn close_dot(mut dot: String, note: &str) -> String {
    let body_end = dot.rfind('}').expect("dot graph closes");
    dot.truncate(body_end);
    let _ = writeln!(dot, "  \"end\" [shape=plaintext, label=\"{}\"];\n}}", note.replace('"', "\\\""));
    dot
}

fn dcl_trace(d: &DclNetwork, r: &DclRun, config: &RunConfig, formula: &str, outcome: &Value, format: Format) -> String {
    let g = &d.problem.graph;
    let steps: &[Vec<usize>] = r.flips.as_deref().unwrap_or(&[]);
    let names = |flips: &[usize]| flips.iter().map(|&e| g.edges[e].name.clone()).collect::<Vec<_>>();
    match format {
        Format::Json => {
            let mut trace: Vec<Value> =
                steps.iter().enumerate().map(|(i, f)| json!({ "step": i + 1, "flips": names(f) })).collect();
            trace.push(end_marker(outcome));
            json_text(&json!({
                "config": config.to_json(),
                "formula": formula,
                "target": g.edges[d.problem.target].name,
                "trace": trace,
            }))
        }
        Format::Dot => {
            let mut dot = g.to_dot(&g.initial);
            let body_end = dot.rfind('}').expect("dot graph closes");
            dot.truncate(body_end);
            for (i, f) in steps.iter().enumerate() {
                let _ = writeln!(dot, "  // step {}: {}", i + 1, names(f).join(" "));
            }
            dot.push_str("}\n");
            close_dot(dot, &outcome_text(outcome))
        }
        Format::Text => {
            let mut s = String::new();
            for (i, f) in steps.iter().enumerate() {
                let _ = writeln!(s, "{} {}", i + 1, names(f).join(" "));
            }
            let _ = writeln!(s, "{}", outcome_text(outcome));
            s
        }
    }
}

fn kinds(gadget: Option<GadgetKind>) -> Result<Vec<GadgetKind>, CliError> {
    match gadget {
        Some(k) if FRAMEWORK.contains(&k) => Ok(vec![k]),
        Some(k) => Err(CliError::Usage(format!("{k} is not a framework gadget"))),
        None => Ok(FRAMEWORK.to_vec()),
    }
}

fn dcl_report_json(r: &DclConformanceReport) -> Value {
    let mismatches: Vec<String> = r
        .template_errors
        .iter()
        .cloned()
        .chain(r.sequences.iter().flat_map(|s| {
            let seq: Vec<String> = s.sequence.iter().map(|(a, b)| format!("{a}→{b}")).collect();
            s.mismatches.iter().map(move |m| format!("[{}]: {m}", seq.join(", ")))
        }))
        .collect();
    json!({
        "gadget": r.gadget,
        "history": r.history.iter().map(|(a, b)| format!("{a}→{b}")).collect::<Vec<_>>(),
        "sequences": r.sequences.len(),
        "passed": r.passed(),
        "mismatches": mismatches,
    })
}

fn dcl_conformance_reports(gadget: Option<GadgetKind>, limits: &Limits) -> Result<Vec<Value>, CliError> {
    let mut out = Vec::new();
    for kind in kinds(gadget)? {
        for r in dcl_suite(kind, limits.max_steps).map_err(usage)? {
            out.push(dcl_report_json(&r));
        }
    }
    Ok(out)
}

/// Conformance reports for the library gizmos, a gadget backend or DCL.
pub fn conformance_cmd(
    gadget: Option<GadgetKind>,
    backend: BackendArg,
    samples: usize,
    seed: u64,
    limits: &Limits,
    output: &OutputArgs,
) -> Result<(), CliError> {
    let mut reports = Vec::new();
    match backend {
        BackendArg::None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for kind in kinds(gadget)? {
                let t = make_library_gadget(kind, None, &[]).map_err(usage)?;
                let mut seqs = base_prefixes(&t);
                for _ in 0..samples {
                    let rounds = rng.gen_range(1..=3);
                    seqs.push(random_closed_sequence(&t, rounds, &mut rng));
                }
                let mismatches: Vec<String> = seqs
                    .iter()
                    .filter_map(|s| {
                        let shown = s.iter().map(|&x| t.show(x)).collect::<Vec<_>>().join(", ");
                        if !t.implements(s) {
                            return Some(format!("[{shown}]: not implemented"));
                        }
                        check_with_reverse(&*t, &t, s).err().map(|m| format!("[{shown}]: {m:?}"))
                    })
                    .collect();
                reports.push(json!({
                    "gadget": kind.to_string(),
                    "sequences": seqs.len(),
                    "passed": mismatches.is_empty(),
                    "mismatches": mismatches,
                }));
            }
        }
        BackendArg::Spinner3 | BackendArg::L2tRotate => {
            let b = if backend == BackendArg::Spinner3 { Backend::Spinner3 } else { Backend::L2tRotate };
            for kind in kinds(gadget)? {
                let Ok(c) = construction(kind, b) else {
                    if gadget.is_some() {
                        return Err(CliError::Usage(format!("{b} has no {kind} construction")));
                    }
                    continue;
                };
                let r = product_conformance(&c, &reference(kind), 1_000_000);
                reports.push(json!({
                    "gadget": kind.to_string(),
                    "construction": c.name(),
                    "pairs": r.pairs,
                    "complete": r.complete,
                    "passed": r.passed(),
                    "mismatches": r.failure.iter().map(|(seq, m)| format!("[{}]: {m:?}", seq.join(", "))).collect::<Vec<_>>(),
                }));
            }
        }
        BackendArg::Dcl => reports = dcl_conformance_reports(gadget, limits)?,
    }
    finish_conformance(
        json!({ "backend": crate::pipeline::backend_name(backend), "seed": seed, "reports": reports }),
        output,
    )
}

pub fn dcl_conformance_cmd(gadget: Option<GadgetKind>, limits: &Limits, output: &OutputArgs) -> Result<(), CliError> {
    let reports = dcl_conformance_reports(gadget, limits)?;
    finish_conformance(json!({ "backend": "dcl", "reports": reports }), output)
}

fn finish_conformance(report: Value, output: &OutputArgs) -> Result<(), CliError> {
    let reports = report["reports"].as_array().expect("reports array");
    let failed = reports.iter().filter(|r| r["passed"] != json!(true)).count();
    let text = match output.format {
        Format::Json => json_text(&report),
        Format::Text => {
            let mut s = String::new();
            for r in reports {
                let verdict = if r["passed"] == json!(true) { "PASS" } else { "FAIL" };
                let size = match r.get("pairs") {
                    Some(p) => format!("{p} state pairs"),
                    None => format!("{} sequences", r["sequences"]),
                };
                let _ = writeln!(s, "{verdict} {} ({size})", r["gadget"].as_str().unwrap_or(""));
                for m in r["mismatches"].as_array().into_iter().flatten() {
                    let _ = writeln!(s, "  {}", m.as_str().unwrap_or(""));
                }
            }
            let _ = writeln!(s, "{} reports, {failed} failed", reports.len());
            s
        }
        Format::Dot => return Err(unsupported_format("conformance", Format::Dot)),
    };
    emit(output, &text)?;
    if failed > 0 {
        return Err(CliError::Failed(format!("{failed} conformance reports failed")));
    }
    Ok(())
}

fn read_graph(path: &Path) -> Result<(Value, ConstraintGraph), CliError> {
    let text = read_file(path)?;
    let value: Value = serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let g = ConstraintGraph::from_json(&value).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    g.check_structure().map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    Ok((value, g))
}

pub fn dcl_step_cmd(file: &Path, steps: u64, output: &OutputArgs) -> Result<(), CliError> {
    let (value, mut g) = read_graph(file)?;
    let mut flips = Vec::new();
    for _ in 0..steps {
        let next = g.step(&g.initial);
        flips
            .push((0..g.edges.len()).filter(|&e| next.flipped[e]).map(|e| g.edges[e].name.clone()).collect::<Vec<_>>());
        g.initial = next;
    }
    let text = match output.format {
        Format::Json => {
            let mut v = g.to_json();
            // keep problem annotations such as the target edge
            for key in ["target", "seed"] {
                if let Some(x) = value.get(key) {
                    v[key] = x.clone();
                }
            }
            json_text(&v)
        }
        Format::Dot => g.to_dot(&g.initial),
        Format::Text => flips.iter().enumerate().map(|(i, f)| format!("{} {}\n", i + 1, f.join(" "))).collect(),
    };
    emit(output, &text)
}

pub fn dcl_decide_cmd(file: &Path, target: Option<&str>, limits: &Limits, output: &OutputArgs) -> Result<(), CliError> {
    let (value, graph) = read_graph(file)?;
    let name = target
        .map(str::to_string)
        .or_else(|| value.get("target").and_then(Value::as_str).map(str::to_string))
        .ok_or_else(|| CliError::Usage("no target edge: pass --target or add a `target` field".into()))?;
    let target = graph.edge_index(&name).ok_or_else(|| CliError::Usage(format!("unknown target edge `{name}`")))?;
    let outcome = dcl_decide(&DclProblem { graph, target, max_steps: limits.max_steps }, limits.cycle_memory);
    let outcome = serde_json::to_value(outcome).expect("outcome serializes");
    let text = match output.format {
        Format::Json => json_text(&json!({ "target": name, "outcome": outcome })),
        Format::Text => format!("{}\n", outcome_text(&outcome)),
        Format::Dot => return Err(unsupported_format("dcl decide", Format::Dot)),
    };
    emit(output, &text)
}
