//! `chl`: command-line front end.
//!
//! Exit status: 0 for a positive verdict (or plain success), 1 for a
//! negative verdict, 2 for errors.

use std::fs;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use chl::formula::{Formula, Var};
use chl::io::{from_json_str, model_from_json_str, model_to_json, to_dot, to_json};
use chl::kripke::{eval, find_countermodel, KripkeModel};
use chl::proof::{check_proof, parse_script, AxiomBase};
use chl::{gl, js, parse, render, EquationSystem, Error};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "chl", version, about = "Cyclic modal formulas: fixed points, GL, translations and proofs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Text,
    Json,
    Dot,
}

#[derive(Clone, Copy, ValueEnum)]
enum Logic {
    Gl,
    Glcirc,
}

/// Formula arguments are formula text, or `@PATH` to read a file (JSON when
/// the path ends in `.json`).
#[derive(Subcommand)]
enum Cmd {
    /// Parse a formula and print it.
    Parse {
        #[arg(long = "in")]
        input: String,
        #[arg(long, value_enum, default_value_t = OutFormat::Text)]
        out: OutFormat,
    },
    /// Print the bisimulation quotient.
    Min {
        formula: String,
        #[arg(long, value_enum, default_value_t = OutFormat::Text)]
        out: OutFormat,
    },
    /// Exit 0 iff the two formulas are bisimilar.
    Bisim { left: String, right: String },
    /// Number of simple cycles.
    Cycles { formula: String },
    /// Redirect every edge into the root to a fresh variable named `var`.
    Snip { formula: String, var: String },
    /// `fix var. formula`
    Fix { var: String, formula: String },
    /// Solve a file of equations `x = F` separated by `;`.
    Solve {
        #[arg(long)]
        letrec: String,
    },
    /// De Jongh-Sambin translation to an acyclic formula.
    Js { formula: String },
    /// Explicit GL fixed point of `formula` in `var`.
    ExplicitFp { var: String, formula: String },
    /// Decide provability; prints a countermodel when there is one.
    Decide {
        #[arg(long, value_enum, default_value_t = Logic::Gl)]
        logic: Logic,
        formula: String,
    },
    /// Evaluate in a model; exit 0 iff true at every world.
    Eval {
        #[arg(long)]
        model: String,
        formula: String,
    },
    /// Search acyclic models; exit 0 when there is no countermodel.
    Countermodel {
        formula: String,
        #[arg(long, default_value_t = 3)]
        max_worlds: usize,
    },
    /// Hypotheses and goal of the well-founded-logic reduction.
    WflReduce { formula: String },
    /// Check a proof script.
    CheckProof {
        script: String,
        #[arg(long, default_value = "chl", value_parser = parse_base)]
        base: AxiomBase,
    },
}

fn parse_base(s: &str) -> Result<AxiomBase, String> {
    s.parse()
}

fn read_arg(arg: &str) -> anyhow::Result<String> {
    match arg.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).with_context(|| format!("reading {path}")),
        None => Ok(arg.to_string()),
    }
}

fn formula(arg: &str) -> anyhow::Result<Formula> {
    let text = read_arg(arg)?;
    let f = if arg.starts_with('@') && arg.ends_with(".json") {
        from_json_str(&text)?
    } else {
        parse(&text)?
    };
    Ok(f)
}

fn var(name: &str) -> anyhow::Result<Var> {
    let f = parse(name)?;
    match f.root_label().as_var() {
        Some(v) => Ok(v.clone()),
        None => bail!("expected a variable, got {name:?}"),
    }
}

fn show(f: &Formula, out: OutFormat) -> String {
    match out {
        OutFormat::Text => render(f),
        OutFormat::Json => serde_json::to_string_pretty(&to_json(f)).expect("json values serialize"),
        OutFormat::Dot => to_dot(f).trim_end().to_string(),
    }
}

fn print_model(m: &KripkeModel, w: usize) {
    println!("world {w}");
    println!("{}", model_to_json(m));
}

fn verdict(ok: bool) -> ExitCode {
    ExitCode::from(if ok { 0 } else { 1 })
}

fn equations(src: &str) -> anyhow::Result<EquationSystem> {
    let src: String = src
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .collect::<Vec<_>>()
        .join("\n");
    let mut sys = EquationSystem::new();
    for eq in src.split(';').map(str::trim).filter(|e| !e.is_empty()) {
        let (name, body) = eq
            .split_once('=')
            .ok_or_else(|| anyhow!("expected `x = F`, got {eq:?}"))?;
        sys.add(var(name.trim())?, parse(body)?)?;
    }
    Ok(sys)
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.cmd {
        Cmd::Parse { input, out } => println!("{}", show(&formula(&input)?, out)),
        Cmd::Min { formula: f, out } => println!("{}", show(&formula(&f)?.minimize(), out)),
        Cmd::Bisim { left, right } => {
            let b = formula(&left)?.bisimilar(&formula(&right)?);
            println!("{}", if b { "bisimilar" } else { "not bisimilar" });
            return Ok(verdict(b));
        }
        Cmd::Cycles { formula: f } => println!("{}", formula(&f)?.simple_cycle_count()),
        Cmd::Snip { formula: f, var: p } => println!("{}", render(&formula(&f)?.snip(&var(&p)?)?)),
        Cmd::Fix { var: p, formula: f } => {
            println!("{}", render(&Formula::fix_point(&var(&p)?, &formula(&f)?)?))
        }
        Cmd::Solve { letrec } => {
            let sys = equations(&read_arg(&format!("@{letrec}"))?)?;
            match sys.solve() {
                Ok(sol) => {
                    for (q, f) in &sol.assignment {
                        println!("{q} = {}", render(f));
                    }
                }
                Err(e @ Error::SystemNotModalised { .. }) => {
                    println!("{e}");
                    return Ok(verdict(false));
                }
                Err(e) => return Err(e.into()),
            }
        }
        Cmd::Js { formula: f } => println!("{}", render(js::js(&formula(&f)?).formula())),
        Cmd::ExplicitFp { var: p, formula: f } => {
            println!("{}", render(js::explicit_fixed_point(&var(&p)?, &formula(&f)?)?.formula()))
        }
        Cmd::Decide { logic, formula: f } => {
            let f = formula(&f)?;
            let v = match logic {
                Logic::Gl => gl::gl_decide_formula(&f)?,
                Logic::Glcirc => js::glcirc_decide(&f),
            };
            if v.provable {
                println!("provable");
            } else {
                println!("not provable");
                if let Some((m, w)) = &v.witness {
                    print_model(m, *w);
                }
            }
            return Ok(verdict(v.provable));
        }
        Cmd::Eval { model, formula: f } => {
            let m = model_from_json_str(&read_arg(&format!("@{model}"))?)?;
            let t = eval(&m, &formula(&f)?);
            let truth: Vec<bool> = (0..m.worlds()).map(|w| t.at_root(w)).collect();
            for (w, b) in truth.iter().enumerate() {
                println!("{w}: {b}");
            }
            return Ok(verdict(truth.iter().all(|&b| b)));
        }
        Cmd::Countermodel { formula: f, max_worlds } => {
            return Ok(match find_countermodel(&formula(&f)?, max_worlds) {
                None => {
                    println!("no countermodel with at most {max_worlds} worlds");
                    verdict(true)
                }
                Some((m, w)) => {
                    print_model(&m, w);
                    verdict(false)
                }
            });
        }
        Cmd::WflReduce { formula: f } => {
            let seq = formula(&f)?.wfl_reduction();
            for h in &seq.hypotheses {
                println!("{}", render(h));
            }
            println!("|- {}", render(&seq.goal));
        }
        Cmd::CheckProof { script, base } => {
            let s = parse_script(&read_arg(&format!("@{script}"))?)?;
            return Ok(match check_proof(&s, base) {
                Ok(()) => {
                    println!("accepted under {base}");
                    verdict(true)
                }
                Err(r) => {
                    println!("rejected under {base}: {r}");
                    verdict(false)
                }
            });
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
