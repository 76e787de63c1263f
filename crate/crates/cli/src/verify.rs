//! `verify`: compare the pipeline with the brute-force oracle over a corpus.

use std::fmt::Write as _;
use std::path::Path;

use gadgetnet::qbf::{enumerate_formulas, random_formula};
use gadgetnet::QbfFormula;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use walkdir::WalkDir;

use crate::args::{Format, OutputArgs, RunArgs};
use crate::commands::{emit, json_text};
use crate::pipeline::{build, outcome_json, read_formula, run, verdict, CliError, RunConfig};

/// Where the formulas to verify come from.
pub struct Sources<'a> {
    pub path: Option<&'a Path>,
    pub enumerate: Option<&'a str>,
    pub random: Option<usize>,
    pub random_vars: usize,
    pub random_clauses: usize,
    pub seed: u64,
}

fn parse_enumerate(spec: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Usage(format!("--enumerate expects N or N:M, found `{spec}`"));
    let (n, m) = spec.split_once(':').unwrap_or((spec, "1"));
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    let m: usize = m.trim().parse().map_err(|_| bad())?;
    if n == 0 || m == 0 {
        return Err(bad());
    }
    Ok((n, m))
}

/// Formulas with their report ids.
fn collect(sources: &Sources) -> Result<Vec<(String, QbfFormula)>, CliError> {
    let mut out = Vec::new();
    if let Some(path) = sources.path {
        if path.is_dir() {
            for entry in WalkDir::new(path).sort_by_file_name() {
                let entry = entry.map_err(|e| CliError::Usage(e.to_string()))?;
                if entry.file_type().is_file() && entry.path().extension().is_some_and(|e| e == "qbf") {
                    let id = entry.path().strip_prefix(path).unwrap_or(entry.path()).display().to_string();
                    out.push((id, read_formula(entry.path())?));
                }
            }
        } else {
            out.push((path.display().to_string(), read_formula(path)?));
        }
    }
    if let Some(spec) = sources.enumerate {
        let (n, m) = parse_enumerate(spec)?;
        for (i, f) in enumerate_formulas(n, m).into_iter().enumerate() {
            out.push((format!("enumerate/n{n}m{m}/{i:05}"), f));
        }
    }
    if let Some(count) = sources.random {
        if sources.random_vars == 0 || sources.random_clauses == 0 {
            return Err(CliError::Usage("--random-vars and --random-clauses must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(sources.seed);
        for i in 0..count {
            out.push((format!("random/{i:05}"), random_formula(sources.random_vars, sources.random_clauses, &mut rng)));
        }
    }
    if out.is_empty() && sources.path.is_none() && sources.enumerate.is_none() && sources.random.is_none() {
        return Err(CliError::Usage("nothing to verify: give a path, --enumerate or --random".into()));
    }
    Ok(out)
}

/// Verify one formula; the verdict is agree, disagree, step_limit or error.
fn check(id: &str, f: &QbfFormula, config: &RunConfig) -> Value {
    let oracle = f.evaluate();
    let mut row = json!({ "id": id, "formula": f.to_string(), "oracle": oracle });
    match build(f, config) {
        Err(e) => {
            row["verdict"] = json!("error");
            row["detail"] = json!(e.to_string());
        }
        Ok(built) => {
            let result = run(&built, config, false);
            row["outcome"] = outcome_json(&built, &result);
            row["verdict"] = json!(match verdict(&result) {
                Ok(Some(reached)) if reached == oracle => "agree",
                Ok(Some(_)) => "disagree",
                Ok(None) => "step_limit",
                Err(_) => "error",
            });
        }
    }
    row
}

pub fn verify_cmd(sources: &Sources, run_args: &RunArgs, output: &OutputArgs) -> Result<(), CliError> {
    let config = RunConfig::new(run_args)?;
    let formulas = collect(sources)?;
    let mut rows: Vec<Value> = formulas.par_iter().map(|(id, f)| check(id, f, &config)).collect();
    rows.sort_by(|a, b| a["id"].as_str().cmp(&b["id"].as_str()));
    let count = |v: &str| rows.iter().filter(|r| r["verdict"] == v).count();
    let summary = json!({
        "total": rows.len(),
        "agree": count("agree"),
        "disagree": count("disagree"),
        "step_limit": count("step_limit"),
        "error": count("error"),
    });
    let failures = count("disagree") + count("error");
    let text = match output.format {
        Format::Json => json_text(&json!({
            "config": config.to_json(),
            "seed": sources.seed,
            "summary": summary,
            "results": rows,
        })),
        Format::Text => {
            let mut s = String::new();
            for r in rows.iter().filter(|r| r["verdict"] != "agree") {
                let _ = writeln!(
                    s,
                    "{} {}: {} (oracle {})",
                    r["verdict"].as_str().unwrap_or(""),
                    r["id"].as_str().unwrap_or(""),
                    r["formula"].as_str().unwrap_or(""),
                    r["oracle"]
                );
            }
            let _ = writeln!(
                s,
                "{} formulas: {} agree, {} disagree, {} step limit, {} error (seed {})",
                summary["total"],
                summary["agree"],
                summary["disagree"],
                summary["step_limit"],
                summary["error"],
                sources.seed
            );
            s
        }
        Format::Dot => return Err(CliError::Usage("verify does not support --format dot".into())),
    };
    emit(output, &text)?;
    if failures > 0 {
        return Err(CliError::Failed(format!("{failures} formulas disagree with the oracle or failed")));
    }
    Ok(())
}
