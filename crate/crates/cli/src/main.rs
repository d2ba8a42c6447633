//! `ewirec`: check, run, denote, normalize and compare EWire programs.

mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use ewire_core::algebra::{is_cp, is_subunital, is_unital, SuperOp};
use ewire_core::denote::{eval_decl, run_circuit, sample, CircValue, Config, DenoteError, HostValue, Mode, DEFAULT_FUEL};
use ewire_core::mono::{instance_name, monomorphize};
use ewire_core::normalize::{inline_host, normalize, Rule};
use ewire_core::syntax::{parse_program, HostTerm, ParseError, Program, WireType};
use ewire_core::typecheck::{check_declarations, check_program, CheckedProgram, TypeError};
use serde_json::{json, Value};

use report::OpReport;

const MAX_STEPS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Command {
    Check,
    Run,
    Denote,
    Normalize,
    Equiv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Cpu,
    Cpsu,
}

#[derive(Debug, Parser)]
#[command(name = "ewirec", version, about = "Typecheck, simulate and normalize EWire programs")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Source file.
    file: PathBuf,
    /// Entry declarations: one for run, denote and normalize, two for equiv.
    entries: Vec<String>,
    #[arg(long, value_enum, default_value = "cpu")]
    mode: ModeArg,
    /// Fix unfoldings allowed per evaluation.
    #[arg(long, default_value_t = DEFAULT_FUEL)]
    fuel: u64,
    /// Also sample this many shots (run only).
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Instantiate `qlist` with lists of this length.
    #[arg(long)]
    qlist_size: Option<usize>,
    /// Frobenius tolerance for equiv.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long)]
    json: bool,
    /// Print each rewrite step as a JSON line (normalize only).
    #[arg(long)]
    trace: bool,
    /// Enable the two copower equations when normalizing.
    #[arg(long)]
    copower_rules: bool,
}

/// A failed command: exit code plus a JSON diagnostic.
struct Failure {
    code: u8,
    diagnostic: Value,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 3, diagnostic: json!({ "kind": "Usage", "message": message.into() }) }
    }

    fn other(kind: &str, message: impl Into<String>) -> Self {
        Failure { code: 1, diagnostic: json!({ "kind": kind, "message": message.into() }) }
    }
}

impl From<TypeError> for Failure {
    fn from(e: TypeError) -> Self {
        Failure { code: 1, diagnostic: serde_json::to_value(&e).expect("serializable") }
    }
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        Failure {
            code: 1,
            diagnostic: json!({ "kind": "ParseError", "span": e.span, "message": e.to_string() }),
        }
    }
}

impl From<DenoteError> for Failure {
    fn from(e: DenoteError) -> Self {
        let (code, kind) = match &e {
            DenoteError::ResourceLimit { .. } => (2, "ResourceLimit"),
            DenoteError::FixInCpu => (1, "FixInCpu"),
            DenoteError::NoEntry(_) => (1, "NoEntry"),
            DenoteError::OutOfRange { .. } => (1, "OutOfRange"),
            _ => (1, "EvaluationError"),
        };
        Failure { code, diagnostic: json!({ "kind": kind, "message": e.to_string() }) }
    }
}

struct Session {
    cli: Cli,
    source: Program,
    program: Program,
}

impl Session {
    fn open(cli: Cli) -> Result<Session, Failure> {
        let text = std::fs::read_to_string(&cli.file)
            .map_err(|e| Failure::usage(format!("cannot read {}: {e}", cli.file.display())))?;
        let source = parse_program(&text)?;
        let program = match cli.qlist_size {
            Some(n) => monomorphize(&source, n).map_err(|e| Failure::other("MonoError", e.to_string()))?,
            None => source.clone(),
        };
        Ok(Session { cli, source, program })
    }

    fn config(&self) -> Config {
        let mode = match self.cli.mode {
            ModeArg::Cpu => Mode::Cpu,
            ModeArg::Cpsu => Mode::Cpsu,
        };
        Config { mode, fuel: self.cli.fuel, int_card: self.program.int_card(), ..Config::default() }.with_env_max_dim()
    }

    /// Maps a generic list declaration to its instance at `--qlist-size`.
    fn entry_name(&self, name: &str) -> Result<String, Failure> {
        if self.program.decl(name).is_some() {
            return Ok(name.to_string());
        }
        if let Some(n) = self.cli.qlist_size {
            let inst = instance_name(name, n);
            if self.program.decl(&inst).is_some() {
                return Ok(inst);
            }
        }
        if self.source.decl(name).is_some_and(|d| d.ty.as_ref().is_some_and(|t| t.mentions_qlist())) {
            return Err(Failure::usage(format!("`{name}` mentions qlist; pass --qlist-size")));
        }
        Err(DenoteError::NoEntry(name.to_string()).into())
    }

    fn entries(&self, n: usize) -> Result<Vec<String>, Failure> {
        let given = &self.cli.entries;
        if given.len() != n {
            return Err(Failure::usage(format!("expected {n} entry name(s), got {}", given.len())));
        }
        given.iter().map(|e| self.entry_name(e)).collect()
    }

    fn checked(&self) -> Result<CheckedProgram, Failure> {
        Ok(check_program(&self.program)?)
    }
}

fn circuit_of<'a>(v: &HostValue<'a>, name: &str) -> Result<std::sync::Arc<CircValue>, Failure> {
    v.as_circ().cloned().ok_or_else(|| Failure::other("NotACircuit", format!("`{name}` is not a circuit")))
}

fn op_report(op: &SuperOp, tol: f64) -> OpReport {
    let t = tol.max(1e-9);
    OpReport { cp: is_cp(op, t), unital: is_unital(op, t), subunital: is_subunital(op, t) }
}

fn cmd_check(s: &Session) -> Result<String, Failure> {
    let results = check_declarations(&s.program);
    let mut ok = Vec::new();
    let mut errors = Vec::new();
    for (d, r) in s.program.decls().zip(results) {
        match r {
            Ok(cd) => ok.push((d.name.clone(), cd.ty.to_string())),
            Err(e) => errors.push(serde_json::to_value(&e).expect("serializable")),
        }
    }
    let out = if s.cli.json {
        let decls: Vec<Value> = ok.iter().map(|(n, t)| json!({ "name": n, "type": t })).collect();
        format!("{}\n", json!({ "decls": decls, "errors": errors }))
    } else {
        let mut text: String = ok.iter().map(|(n, t)| format!("{n} : {t}\n")).collect();
        for e in &errors {
            text.push_str(&format!("{e}\n"));
        }
        text
    };
    if errors.is_empty() {
        Ok(out)
    } else {
        print!("{out}");
        Err(Failure { code: 1, diagnostic: Value::Null })
    }
}

fn cmd_run(s: &Session) -> Result<String, Failure> {
    let [entry] = <[String; 1]>::try_from(s.entries(1)?).expect("one entry");
    let checked = s.checked()?;
    let v = eval_decl(&checked, &entry, &s.config())?;
    let dist = match &v {
        HostValue::Dist(d) => (**d).clone(),
        HostValue::Circ(c) if c.input == WireType::Unit && c.output.is_classical() => run_circuit(&c.op, &c.output)?,
        _ => return Err(Failure::other("NotRunnable", format!("`{entry}` is neither a computation nor a closed classical circuit"))),
    };
    let counts = s.cli.shots.map(|n| sample(&dist, s.cli.seed, n));
    if s.cli.json {
        let mut out = report::distribution_json(&dist);
        if let Some(c) = &counts {
            let cj = report::counts_json(c);
            out["shots"] = json!(s.cli.shots);
            out["seed"] = json!(s.cli.seed);
            out["counts"] = cj["counts"].clone();
            out["diverged"] = cj["diverged"].clone();
        }
        Ok(format!("{out}\n"))
    } else {
        let mut text = report::distribution_text(&dist);
        if let Some(c) = &counts {
            text.push_str(&report::counts_text(c));
        }
        Ok(text)
    }
}

fn cmd_denote(s: &Session) -> Result<String, Failure> {
    let [entry] = <[String; 1]>::try_from(s.entries(1)?).expect("one entry");
    let checked = s.checked()?;
    let v = eval_decl(&checked, &entry, &s.config())?;
    let c = circuit_of(&v, &entry)?;
    let r = op_report(&c.op, s.cli.tol);
    let (i, o) = (c.input.to_string(), c.output.to_string());
    Ok(if s.cli.json {
        format!("{}\n", report::superop_json(&c.op, &i, &o, &r))
    } else {
        report::superop_text(&c.op, &i, &o, &r)
    })
}

fn cmd_normalize(s: &Session) -> Result<String, Failure> {
    let [entry] = <[String; 1]>::try_from(s.entries(1)?).expect("one entry");
    let checked = s.checked()?;
    let pos = checked.decls.iter().position(|d| d.name == entry).expect("entry exists");
    let globals: Vec<(String, HostTerm)> = checked.decls[..pos]
        .iter()
        .filter(|d| s.program.decl(&d.name).is_some_and(|src| !src.recursive))
        .map(|d| (d.name.clone(), d.body.clone()))
        .collect();
    let body = inline_host(&checked.decls[pos].body, &globals, &mut 100_000);
    let HostTerm::Box(p, w, c) = body else {
        return Err(Failure::other("NotABox", format!("`{entry}` does not reduce to a literal box")));
    };
    let n = normalize(&c, MAX_STEPS, Rule::rules(s.cli.copower_rules));
    let term = HostTerm::Box(p, w, Box::new(n.term.clone()));
    if s.cli.trace {
        for e in &n.trace {
            eprintln!("{}", serde_json::to_string(e).expect("serializable"));
        }
    }
    let out = if s.cli.json {
        format!(
            "{}\n",
            json!({ "term": term.to_string(), "steps": n.trace.len(), "complete": n.complete, "trace": n.trace })
        )
    } else {
        format!("{term}\n")
    };
    if n.complete {
        Ok(out)
    } else {
        print!("{out}");
        Err(Failure { code: 2, diagnostic: json!({ "kind": "StepLimit", "message": format!("stopped after {MAX_STEPS} steps") }) })
    }
}

fn cmd_equiv(s: &Session) -> Result<String, Failure> {
    let [a, b] = <[String; 2]>::try_from(s.entries(2)?).expect("two entries");
    let checked = s.checked()?;
    let cfg = s.config();
    let va = eval_decl(&checked, &a, &cfg)?;
    let vb = eval_decl(&checked, &b, &cfg)?;
    let (ca, cb) = (circuit_of(&va, &a)?, circuit_of(&vb, &b)?);
    if ca.input != cb.input || ca.output != cb.output {
        return Err(Failure::other(
            "Mismatch",
            format!("`{a}` : Circ({}, {}) but `{b}` : Circ({}, {})", ca.input, ca.output, cb.input, cb.output),
        ));
    }
    let d = ca.op.distance(&cb.op).map_err(DenoteError::from)?;
    let equivalent = d <= s.cli.tol;
    let out = if s.cli.json {
        format!("{}\n", json!({ "equivalent": equivalent, "distance": report::num(d) }))
    } else {
        format!("{equivalent}\ndistance: {}\n", report::fmt_num(d))
    };
    if equivalent {
        Ok(out)
    } else {
        print!("{out}");
        Err(Failure { code: 1, diagnostic: Value::Null })
    }
}

fn dispatch(cli: Cli) -> Result<String, Failure> {
    if cli.shots.is_some() && cli.command != Command::Run {
        return Err(Failure::usage("--shots is only valid with run"));
    }
    if cli.trace && cli.command != Command::Normalize {
        return Err(Failure::usage("--trace is only valid with normalize"));
    }
    if cli.command == Command::Check && !cli.entries.is_empty() {
        return Err(Failure::usage("check takes no entry names"));
    }
    let command = cli.command;
    let s = Session::open(cli)?;
    match command {
        Command::Check => cmd_check(&s),
        Command::Run => cmd_run(&s),
        Command::Denote => cmd_denote(&s),
        Command::Normalize => cmd_normalize(&s),
        Command::Equiv => cmd_equiv(&s),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            if !f.diagnostic.is_null() {
                println!("{}", f.diagnostic);
                if let Some(m) = f.diagnostic.get("message").and_then(Value::as_str) {
                    eprintln!("error: {m}");
                }
            }
            ExitCode::from(f.code)
        }
    }
}
