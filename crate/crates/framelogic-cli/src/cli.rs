//! Command-line front end. Subcommands wire the text formats to the engine;
//! all results go to standard output, diagnostics to standard error. Exit
//! codes: 0 all checks pass, 1 counterexample found, 2 usage or parse error,
//! 3 inconclusive (fuel or bounds).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use framelogic::ast::{Formula, Sort};
use framelogic::hoare::{check_triple, verify, Verdict};
use framelogic::model::{
    single_entry_mutations, Assignment, ElemSet, EnumFilter, PreModel, Value,
};
use framelogic::oracle::Bounds;
use framelogic::semantics::{check_frame_instance, frame_model, FrameVerdict};
use framelogic::whilelang::{run_trace, valid_config, Configuration, Outcome, RunError};

use crate::model_text::{model_to_string, parse_model};
use crate::parse::{parse_fl, parse_sl, parse_triple, FileCtx};
use crate::print::{fl_file_to_string, formula_to_string, sl_to_string, stmt_to_line};
use crate::rng::SplitMix64;

pub const EXIT_OK: i32 = 0;
pub const EXIT_COUNTEREXAMPLE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

const USAGE: &str = "\
framelogic <command> [options]

commands:
  eval <file.fl> --model <file.mdl> [--nu x=u1,...]     evaluate each formula
  support <file.fl> --model <file.mdl> [--nu ...]       print each formula's support
  frame-check <file.fl> [--fg-size N] [--seed N]        frame preservation sweep
  translate-ford <file.fl>                              print the recursive-relation translation
  translate-psl <file.slf>                              print the frame-logic translation
  min-heap <file.slf> --model <file.mdl> [--nu ...]     minimum heaplet inside the model's heap
  run <file.flp> --model <file.mdl> [--heap ..] [--avail ..] [--fuel N] [--trace]
  wtp <file.flp>                                        print the generated precondition
  check-triple <file.flp> [--fg-size N] [--fuel N] [--operational]
  verify <file.flp> [--fg-size N] [--fuel N]            same as check-triple

options:
  --fg-size N       foreground universe bound (default 3)
  --int-range LO..HI  integer domain (default -4..4 for checks)
  --fuel N          while-loop budget (default 32)
  --seed N          sampling seed (default 0)
  --samples N       sampled mutations above the exhaustive threshold (default 10000)
  --format text|jsonl  obligation report format (default jsonl)
  --nu var=elem,... variable assignment
  --heap u1,u2      allocated set for run
  --avail u1,u2     allocatable set for run
  --trace           print one line per executed statement
";

#[derive(Debug, Clone)]
struct Opts {
    positional: Vec<String>,
    fg_size: u8,
    int_range: (i64, i64),
    fuel: u32,
    seed: u64,
    samples: u64,
    format: String,
    nu: Vec<(String, String)>,
    model: Option<String>,
    heap: Vec<String>,
    avail: Vec<String>,
    trace: bool,
    operational: bool,
}

impl Opts {
    fn bounds(&self) -> Bounds {
        Bounds::new(self.fg_size)
            .with_int_range(self.int_range.0, self.int_range.1)
            .with_fuel(self.fuel)
    }
}

fn parse_opts(args: &[String]) -> Result<Opts, String> {
    let mut o = Opts {
        positional: Vec::new(),
        fg_size: 3,
        int_range: (-4, 4),
        fuel: 32,
        seed: 0,
        samples: 10_000,
        format: "jsonl".into(),
        nu: Vec::new(),
        model: None,
        heap: Vec::new(),
        avail: Vec::new(),
        trace: false,
        operational: false,
    };
    let mut i = 0;
    while i < args.len() {
        let a = &args[i];
        let take = |o: &mut usize| -> Result<String, String> {
            *o += 1;
            args.get(*o).cloned().ok_or_else(|| format!("{a} needs a value"))
        };
        match a.as_str() {
            "--fg-size" => o.fg_size = take(&mut i)?.parse().map_err(|_| "bad --fg-size")?,
            "--fuel" => o.fuel = take(&mut i)?.parse().map_err(|_| "bad --fuel")?,
            "--seed" => o.seed = take(&mut i)?.parse().map_err(|_| "bad --seed")?,
            "--samples" => o.samples = take(&mut i)?.parse().map_err(|_| "bad --samples")?,
            "--format" => o.format = take(&mut i)?,
            "--model" => o.model = Some(take(&mut i)?),
            "--trace" => o.trace = true,
            "--operational" => o.operational = true,
            "--int-range" => {
                let v = take(&mut i)?;
                let (lo, hi) = v
                    .split_once("..")
                    .ok_or_else(|| "bad --int-range, expected LO..HI".to_string())?;
                o.int_range = (
                    lo.parse().map_err(|_| "bad --int-range")?,
                    hi.parse().map_err(|_| "bad --int-range")?,
                );
            }
            "--nu" => {
                let v = take(&mut i)?;
                for pair in v.split(',') {
                    let (name, val) = pair
                        .split_once('=')
                        .ok_or_else(|| format!("bad --nu entry `{pair}`"))?;
                    o.nu.push((name.to_string(), val.to_string()));
                }
            }
            "--heap" => {
                let v = take(&mut i)?;
                o.heap = v.split(',').map(|s| s.to_string()).collect();
            }
            "--avail" => {
                let v = take(&mut i)?;
                o.avail = v.split(',').map(|s| s.to_string()).collect();
            }
            other if other.starts_with("--") => return Err(format!("unknown option {other}")),
            _ => o.positional.push(a.clone()),
        }
        i += 1;
    }
    Ok(o)
}

fn parse_elem(s: &str) -> Result<u8, String> {
    s.strip_prefix('u')
        .and_then(|t| t.parse::<u8>().ok())
        .ok_or_else(|| format!("bad element `{s}`, expected uN"))
}

fn parse_elem_set(items: &[String]) -> Result<ElemSet, String> {
    let mut out = ElemSet::EMPTY;
    for s in items {
        if s.is_empty() {
            continue;
        }
        out.insert(parse_elem(s)?);
    }
    Ok(out)
}

fn assignment_from(nu: &[(String, String)], ctx: &FileCtx, m: &PreModel) -> Result<Assignment, String> {
    let mut out = Assignment::new();
    for (name, val) in nu {
        let sort = ctx.vars.get(name).copied().unwrap_or(Sort::Fg);
        let v = match sort {
            Sort::Fg => Value::Elem(parse_elem(val)?),
            Sort::Int => Value::Int(val.parse().map_err(|_| format!("bad integer `{val}`"))?),
            Sort::Bool => Value::Bool(val == "true"),
            Sort::FgSet => return Err("set-sorted assignments are not supported".into()),
        };
        let _ = m;
        out.insert(name.clone(), v);
    }
    Ok(out)
}

fn read_file(path: &str) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}"))
}

/// Runs the command line; output goes to `out`, diagnostics to `err`.
pub fn run_cli(args: &[String], out: &mut String, err: &mut String) -> i32 {
    match dispatch(args, out) {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
    }
}

fn dispatch(args: &[String], out: &mut String) -> Result<i32, String> {
    let Some(cmd) = args.first() else {
        return Err(format!("missing command\n{USAGE}"));
    };
    let opts = parse_opts(&args[1..])?;
    match cmd.as_str() {
        "eval" => cmd_eval(&opts, out, false),
        "support" => cmd_eval(&opts, out, true),
        "frame-check" => cmd_frame_check(&opts, out),
        "translate-ford" => cmd_translate_ford(&opts, out),
        "translate-psl" => cmd_translate_psl(&opts, out),
        "min-heap" => cmd_min_heap(&opts, out),
        "run" => cmd_run(&opts, out),
        "wtp" => cmd_wtp(&opts, out),
        "check-triple" | "verify" => cmd_verify(&opts, out),
        "help" | "--help" => {
            out.push_str(USAGE);
            Ok(EXIT_OK)
        }
        other => Err(format!("unknown command `{other}`\n{USAGE}")),
    }
}

fn need_file(opts: &Opts) -> Result<&str, String> {
    opts.positional
        .first()
        .map(|s| s.as_str())
        .ok_or_else(|| "missing input file".to_string())
}

fn cmd_eval(opts: &Opts, out: &mut String, support: bool) -> Result<i32, String> {
    let src = read_file(need_file(opts)?)?;
    let file = parse_fl(&src).map_err(|e| e.to_string())?;
    let model_path = opts.model.as_ref().ok_or("--model is required")?;
    let model_src = read_file(model_path)?;
    let model = parse_model(&model_src, file.ctx.sig_arc()).map_err(|e| e.to_string())?;
    let nu = assignment_from(&opts.nu, &file.ctx, &model)?;
    let fm = frame_model(&model, &file.ctx.defs).map_err(|e| e.to_string())?;
    for f in &file.formulas {
        if support {
            let sp = fm.support(&nu, f).map_err(|e| e.to_string())?;
            let _ = writeln!(out, "{sp}");
        } else {
            let v = fm.eval(&nu, f).map_err(|e| e.to_string())?;
            let _ = writeln!(out, "{v}");
        }
    }
    Ok(EXIT_OK)
}

fn cmd_frame_check(opts: &Opts, out: &mut String) -> Result<i32, String> {
    let src = read_file(need_file(opts)?)?;
    let file = parse_fl(&src).map_err(|e| e.to_string())?;
    let sig = file.ctx.sig_arc();
    let exhaustive = opts.fg_size <= 3;
    let _ = writeln!(out, "# seed: {}", opts.seed);
    let _ = writeln!(
        out,
        "# mode: {} (exhaustive threshold fg-size 3)",
        if exhaustive { "exhaustive" } else { "sampled" }
    );
    let mut rng = SplitMix64::new(opts.seed);
    let mut checked: u64 = 0;
    let mut violations: u64 = 0;
    for fg in 1..=opts.fg_size {
        let models = framelogic::model::enumerate_pre_models(
            sig.clone(),
            fg,
            opts.int_range,
            &EnumFilter::mutables(),
        )
        .map_err(|e| e.to_string())?;
        for m in models {
            let fm = frame_model(&m, &file.ctx.defs).map_err(|e| e.to_string())?;
            let mutations = single_entry_mutations(&m);
            for f in &file.formulas {
                let free: Vec<(String, Sort)> =
                    framelogic::ast::free_vars(f).into_iter().collect();
                let mut assignments = vec![Assignment::new()];
                for (v, s) in &free {
                    let mut next = Vec::new();
                    for nu in &assignments {
                        for val in m.domain_values(*s) {
                            let mut nu2 = nu.clone();
                            nu2.insert(v.clone(), val);
                            next.push(nu2);
                        }
                    }
                    assignments = next;
                }
                for nu in &assignments {
                    let todo: Vec<&framelogic::model::Mutation> = if exhaustive {
                        mutations.iter().collect()
                    } else {
                        (0..opts.samples.min(mutations.len() as u64))
                            .map(|_| &mutations[rng.below(mutations.len())])
                            .collect()
                    };
                    for mutation in todo {
                        checked += 1;
                        match check_frame_instance(&fm, &file.ctx.defs, mutation, nu, f)
                            .map_err(|e| e.to_string())?
                        {
                            FrameVerdict::Pass | FrameVerdict::NotApplicable => {}
                            FrameVerdict::Violated { before, after } => {
                                violations += 1;
                                let _ = writeln!(
                                    out,
                                    "violation: {} before={before} after={after}",
                                    formula_to_string(f)
                                );
                            }
                        }
                    }
                }
            }
        }
    }
    let _ = writeln!(out, "checked: {checked}");
    let _ = writeln!(out, "violations: {violations}");
    Ok(if violations == 0 { EXIT_OK } else { EXIT_COUNTEREXAMPLE })
}

fn cmd_translate_ford(opts: &Opts, out: &mut String) -> Result<i32, String> {
    let src = read_file(need_file(opts)?)?;
    let file = parse_fl(&src).map_err(|e| e.to_string())?;
    for f in &file.formulas {
        let prog = framelogic::ford::translate_formula(&file.ctx.sig, &file.ctx.defs, f)
            .map_err(|e| e.to_string())?;
        out.push_str(&fl_file_to_string(&file.ctx.sig, &prog.defs, &[prog.main.clone()]));
    }
    Ok(EXIT_OK)
}

fn cmd_translate_psl(opts: &Opts, out: &mut String) -> Result<i32, String> {
    let src = read_file(need_file(opts)?)?;
    let file = parse_sl(&src).map_err(|e| e.to_string())?;
    let sig = framelogic::psl::field_signature(&file.fields);
    for f in &file.formulas {
        let (t, defs) = framelogic::psl::translate_psl(f, &file.defs);
        out.push_str(&fl_file_to_string(&sig, &defs, &[t]));
    }
    Ok(EXIT_OK)
}

fn cmd_min_heap(opts: &Opts, out: &mut String) -> Result<i32, String> {
    let src = read_file(need_file(opts)?)?;
    let file = parse_sl(&src).map_err(|e| e.to_string())?;
    let model_path = opts.model.as_ref().ok_or("--model is required")?;
    let sig = framelogic::psl::field_signature(&file.fields);
    let model = parse_model(&read_file(model_path)?, sig).map_err(|e| e.to_string())?;
    let ambient = framelogic::psl::heaplet_of_support(
        &model,
        &file.fields,
        framelogic::model::ElemSet::full(model.fg_size),
    );
    let mut store = framelogic::psl::Store::new();
    for (name, val) in &opts.nu {
        store.insert(name.clone(), parse_elem(val)?);
    }
    for f in &file.formulas {
        match framelogic::psl::minimum_heap(model.fg_size, &store, &ambient, f, &file.defs)
            .map_err(|e| e.to_string())?
        {
            Some(h) => {
                let _ = writeln!(out, "{}: {}", sl_to_string(f), h);
            }
            None => {
                let _ = writeln!(out, "{}: unsat", sl_to_string(f));
            }
        }
    }
    Ok(EXIT_OK)
}

fn cmd_run(opts: &Opts, out: &mut String) -> Result<i32, String> {
    let src = read_file(need_file(opts)?)?;
    // Accept both bare programs and triple files; a triple contributes its
    // program.
    let file = match crate::parse::parse_program(&src) {
        Ok(f) => f,
        Err(prog_err) => match parse_triple(&src) {
            Ok(t) => crate::parse::ProgramFile {
                ctx: t.ctx,
                program: t.triple.program,
                warnings: t.warnings,
            },
            Err(_) => return Err(prog_err.to_string()),
        },
    };
    let model_path = opts.model.as_ref().ok_or("--model is required")?;
    let model = parse_model(&read_file(model_path)?, file.ctx.sig_arc()).map_err(|e| e.to_string())?;
    let heap = parse_elem_set(&opts.heap)?;
    let avail = parse_elem_set(&opts.avail)?;
    let mut store = Assignment::new();
    for (name, val) in &opts.nu {
        store.insert(name.clone(), Value::Elem(parse_elem(val)?));
    }
    // Variables not mentioned start at nil.
    for v in file.program.vars() {
        store.entry(v).or_insert(Value::Elem(model.nil()));
    }
    let cfg = Configuration::new(model, store, heap, avail);
    if !valid_config(&cfg) {
        return Err("initial configuration is not valid".into());
    }
    for w in &file.warnings {
        let _ = writeln!(out, "# warning: {w}");
    }
    if opts.trace {
        match run_trace(&cfg, &file.program, opts.fuel) {
            Ok((trace, outcome)) => {
                for entry in trace {
                    let _ = writeln!(
                        out,
                        "{} : (H={}, U={})",
                        stmt_to_line(&entry.stmt),
                        entry.heap,
                        entry.avail
                    );
                }
                let _ = writeln!(out, "outcome: {}", outcome_name(&outcome));
                Ok(exit_for_outcomes(std::iter::once(&outcome)))
            }
            Err(RunError::FuelExhausted) => {
                let _ = writeln!(out, "outcome: fuel-exhausted");
                Ok(EXIT_INCONCLUSIVE)
            }
            Err(e) => Err(e.to_string()),
        }
    } else {
        match framelogic::whilelang::run(&cfg, &file.program, opts.fuel) {
            Ok(outcomes) => {
                for o in &outcomes {
                    match o {
                        Outcome::Final(c) => {
                            let _ = writeln!(out, "final: (H={}, U={}) store={:?}", c.heap, c.avail, c.store);
                        }
                        Outcome::Abort => {
                            let _ = writeln!(out, "abort");
                        }
                        Outcome::Stuck => {
                            let _ = writeln!(out, "stuck");
                        }
                    }
                }
                Ok(exit_for_outcomes(outcomes.iter()))
            }
            Err(RunError::FuelExhausted) => {
                let _ = writeln!(out, "fuel-exhausted");
                Ok(EXIT_INCONCLUSIVE)
            }
            Err(e) => Err(e.to_string()),
        }
    }
}

fn outcome_name(o: &Outcome) -> String {
    match o {
        Outcome::Final(c) => format!("final (H={}, U={})", c.heap, c.avail),
        Outcome::Abort => "abort".into(),
        Outcome::Stuck => "stuck".into(),
    }
}

fn exit_for_outcomes<'a>(outcomes: impl Iterator<Item = &'a Outcome>) -> i32 {
    let mut code = EXIT_OK;
    for o in outcomes {
        if matches!(o, Outcome::Abort) {
            code = EXIT_COUNTEREXAMPLE;
        }
    }
    code
}

fn cmd_wtp(opts: &Opts, out: &mut String) -> Result<i32, String> {
    let src = read_file(need_file(opts)?)?;
    let file = parse_triple(&src).map_err(|e| e.to_string())?;
    let w = framelogic::hoare::wtp(
        &file.triple.sig,
        &file.triple.defs,
        &file.triple.program,
        &file.triple.post,
    )
    .map_err(|e| e.to_string())?;
    out.push_str(&fl_file_to_string(&file.triple.sig, &w.defs, &[w.pre.clone()]));
    Ok(EXIT_OK)
}

fn cmd_verify(opts: &Opts, out: &mut String) -> Result<i32, String> {
    let src = read_file(need_file(opts)?)?;
    let file = parse_triple(&src).map_err(|e| e.to_string())?;
    for w in &file.warnings {
        let _ = writeln!(out, "# warning: {w}");
    }
    if opts.operational {
        let verdict = check_triple(&file.triple, &opts.bounds()).map_err(|e| e.to_string())?;
        return finish_verdict(out, &verdict, &opts.format, None);
    }
    let (results, overall) = verify(&file.triple, &opts.bounds()).map_err(|e| e.to_string())?;
    for (ob, v) in &results {
        if opts.format == "jsonl" {
            let _ = writeln!(out, "{}", crate::jsonl::obligation_record(ob, v));
        } else {
            let status = match v {
                Verdict::Valid => "valid".to_string(),
                Verdict::Invalid(_) => "invalid".to_string(),
                Verdict::Inconclusive(w) => format!("inconclusive: {w}"),
            };
            let _ = writeln!(out, "{}: {}", ob.provenance, status);
        }
    }
    finish_verdict(out, &overall, &opts.format, Some(results.len()))
}

fn finish_verdict(
    out: &mut String,
    verdict: &Verdict,
    format: &str,
    obligations: Option<usize>,
) -> Result<i32, String> {
    match verdict {
        Verdict::Valid => {
            if format != "jsonl" {
                if let Some(n) = obligations {
                    let _ = writeln!(out, "valid ({n} obligations)");
                } else {
                    let _ = writeln!(out, "valid");
                }
            } else {
                let _ = writeln!(out, "{{\"overall\":\"valid\"}}");
            }
            Ok(EXIT_OK)
        }
        Verdict::Invalid(cx) => {
            if format == "jsonl" {
                let _ = writeln!(
                    out,
                    "{{\"overall\":\"invalid\",\"reason\":\"{}\"}}",
                    cx.reason
                );
            } else {
                let _ = writeln!(out, "invalid: {}", cx.reason);
                out.push_str(&model_to_string(&cx.config.model));
                let _ = writeln!(out, "store: {:?}", cx.config.store);
                let _ = writeln!(out, "H = {}, U = {}", cx.config.heap, cx.config.avail);
            }
            Ok(EXIT_COUNTEREXAMPLE)
        }
        Verdict::Inconclusive(why) => {
            let _ = writeln!(out, "inconclusive: {why}");
            Ok(EXIT_INCONCLUSIVE)
        }
    }
}

/// Formats a model for CLI output; used by tests as well.
pub fn show_model(m: &PreModel) -> String {
    model_to_string(m)
}

/// Helper shared with tests: evaluate one formula text against a model text
/// in the context of a formula file.
pub fn eval_in_file(
    fl_src: &str,
    mdl_src: &str,
    nu_pairs: &[(&str, &str)],
    formula_src: &str,
) -> Result<bool, String> {
    let file = parse_fl(fl_src).map_err(|e| e.to_string())?;
    let model = parse_model(mdl_src, file.ctx.sig_arc()).map_err(|e| e.to_string())?;
    let f: Formula = crate::parse::parse_formula_in(formula_src, &file.ctx).map_err(|e| e.to_string())?;
    let nu_owned: Vec<(String, String)> = nu_pairs
        .iter()
        .map(|(a, b)| ((*a).to_string(), (*b).to_string()))
        .collect();
    let nu = assignment_from(&nu_owned, &file.ctx, &model)?;
    let fm = frame_model(&model, &file.ctx.defs).map_err(|e| e.to_string())?;
    fm.eval(&nu, &f).map_err(|e| e.to_string())
}

/// Maps an assignment structure for reuse in tests.
pub fn nu_of(pairs: &[(&str, Value)]) -> BTreeMap<String, Value> {
    pairs.iter().map(|(n, v)| ((*n).to_string(), *v)).collect()
}
