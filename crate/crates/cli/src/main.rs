mod report;
mod target;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use garden_hose::bits::{bits_to_string, index_to_bits};
use garden_hose::compile::{
    compile_formula, compile_protocol_tree, parse_formula, parse_protocol_tree,
};
use garden_hose::constructions::{equality_public_coin, PJInstance, RandomTape, TapeScope};
use garden_hose::model::{
    evaluate, instance_to_dot, max_time, parse_instance, write_instance, Matching, Protocol,
};
use garden_hose::oracle::{
    cover_numbers, exhaustive_verify, garden_hose_matrix, min_gh, one_way_cc, Direction,
    FunctionTable, Verdict, MATRIX_CAP,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use report::{Format, Report};
use target::FnSpec;

type Reference = Box<dyn Fn(&[bool], &[bool]) -> bool>;

#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<garden_hose::Error> for CliError {
    fn from(e: garden_hose::Error) -> Self {
        let code = match e {
            garden_hose::Error::NotFound { .. } => 1,
            _ => 2,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::usage(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "gh",
    version,
    about = "Build, verify, compile and inspect garden-hose protocols"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug)]
struct FnArgs {
    /// eq-serial, eq-block, pj, dmaj, ip, pub-eq or pri-eq
    #[arg(long)]
    function: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Pointer-jumping steps.
    #[arg(long)]
    k: Option<usize>,
    /// Block size for eq-block; defaults to ⌈√n⌉.
    #[arg(long)]
    b: Option<usize>,
    /// Repetitions for pub-eq.
    #[arg(long)]
    t: Option<usize>,
    /// String count for pri-eq; defaults to 8n.
    #[arg(long)]
    m: Option<usize>,
    /// dmaj variant: counter or st97.
    #[arg(long)]
    variant: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

impl FnArgs {
    fn spec(&self) -> Result<FnSpec, CliError> {
        let function = self
            .function
            .clone()
            .ok_or_else(|| CliError::usage("--function is required"))?;
        Ok(FnSpec {
            function,
            n: self.n,
            k: self.k,
            b: self.b,
            t: self.t,
            m: self.m,
            variant: self.variant.clone(),
            seed: self.seed,
        })
    }
}

#[derive(Args, Clone, Debug)]
struct Common {
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Largest pipe count a construction may use.
    #[arg(long)]
    budget_pipes: Option<usize>,
    /// Largest total input length enumerated exhaustively.
    #[arg(long, default_value_t = 20)]
    budget_enum: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Build a named protocol and report its size and time.
    Build {
        #[command(flatten)]
        function: FnArgs,
        #[command(flatten)]
        common: Common,
        /// Directory for sampled instance files and DOT traces.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Number of instances written with --out.
        #[arg(long, default_value_t = 4)]
        samples: usize,
    },
    /// Check a protocol against its function, a truth table or an instance file.
    Verify {
        #[command(flatten)]
        function: FnArgs,
        #[command(flatten)]
        common: Common,
        /// Truth table to compare against.
        #[arg(long)]
        tt: Option<PathBuf>,
        /// Instance file written by `build --out`.
        #[arg(long)]
        instance: Option<PathBuf>,
        /// Number of sampled inputs when the domain is too large.
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
    /// Compile a formula or a protocol tree.
    Compile {
        #[arg(long, conflicts_with = "tree")]
        formula: Option<String>,
        /// Protocol tree file.
        #[arg(long)]
        tree: Option<PathBuf>,
        /// Compare with the source on every input.
        #[arg(long)]
        verify: bool,
        /// DOT file for the all-zero input.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Brute-force tables: G_s, exact size, covers, one-way complexity.
    Oracle {
        /// Print the garden-hose matrix G_s.
        #[arg(long)]
        ghs: Option<usize>,
        /// Truth table whose minimum garden-hose size is searched.
        #[arg(long)]
        min_gh: Option<PathBuf>,
        #[arg(long, default_value_t = MATRIX_CAP)]
        s_max: usize,
        /// Truth table whose rectangle cover numbers are computed.
        #[arg(long)]
        covers: Option<PathBuf>,
        /// Truth table whose one-way complexity is computed.
        #[arg(long)]
        one_way: Option<PathBuf>,
        /// Also write the output to this file.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

/// Printed output and whether the command found what it was asked to check.
struct Outcome {
    text: String,
    pass: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Build {
            function,
            common,
            out,
            samples,
        } => cmd_build(&function, &common, out, samples),
        Command::Verify {
            function,
            common,
            tt,
            instance,
            samples,
        } => cmd_verify(&function, &common, tt, instance, samples),
        Command::Compile {
            formula,
            tree,
            verify,
            out,
            common,
        } => cmd_compile(formula, tree, verify, out, &common),
        Command::Oracle {
            ghs,
            min_gh,
            s_max,
            covers,
            one_way,
            out,
            common,
        } => cmd_oracle(ghs, min_gh, s_max, covers, one_way, out, &common),
    };
    match result {
        Ok(outcome) => {
            print!("{}", outcome.text);
            ExitCode::from(if outcome.pass { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn random_bits(rng: &mut ChaCha8Rng, len: usize) -> Vec<bool> {
    (0..len).map(|_| rng.gen()).collect()
}

/// A random input pair biased towards the interesting part of the domain.
fn sample(
    spec: &FnSpec,
    p: &Protocol,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<bool>, Vec<bool>), CliError> {
    let (nx, ny) = (p.alice_bits(), p.bob_bits());
    let n = spec.n()?;
    Ok(match spec.function.as_str() {
        "pj" => {
            let inst = PJInstance::random(n, spec.k.unwrap_or(1), rng);
            (inst.alice_input(), inst.bob_input())
        }
        "dmaj" => {
            let overlap = rng.gen_range(0..=n);
            let mut x = vec![false; n];
            let mut y = vec![false; n];
            let mut order: Vec<usize> = (0..n).collect();
            rand::seq::SliceRandom::shuffle(order.as_mut_slice(), rng);
            for (j, &i) in order.iter().enumerate() {
                if j < overlap {
                    (x[i], y[i]) = (true, true);
                } else {
                    match rng.gen_range(0..3) {
                        0 => x[i] = true,
                        1 => y[i] = true,
                        _ => {}
                    }
                }
            }
            (x, y)
        }
        _ => {
            let x = random_bits(rng, nx);
            let y = if rng.gen() {
                x[..ny].to_vec()
            } else {
                random_bits(rng, ny)
            };
            (x, y)
        }
    })
}

fn bounds_text(p: &Protocol) -> String {
    p.meta
        .bounds
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(";")
}

fn cmd_build(
    args: &FnArgs,
    common: &Common,
    out: Option<PathBuf>,
    samples: usize,
) -> Result<Outcome, CliError> {
    let spec = args.spec()?;
    let p = spec.build(common.budget_pipes)?;
    let n = spec.n()?;
    let mut r = Report::new();
    r.set("function", &spec.function)
        .set("n", n)
        .opt("k", spec.k)
        .opt(
            "b",
            (spec.function == "eq-block")
                .then(|| spec.block())
                .transpose()?,
        )
        .opt("t", (spec.function == "pub-eq").then(|| spec.t()))
        .opt(
            "m",
            (spec.function == "pri-eq").then(|| spec.m()).transpose()?,
        )
        .opt(
            "variant",
            (spec.function == "dmaj").then(|| spec.variant.clone().unwrap_or("st97".into())),
        )
        .opt("seed", spec.seed)
        .set("pipes", p.pipe_count())
        .set("alice_bits", p.alice_bits())
        .set("bob_bits", p.bob_bits());
    let bits = p.alice_bits() + p.bob_bits();
    let time = (bits <= common.budget_enum)
        .then(|| max_time(&p, common.budget_enum))
        .transpose()?;
    r.opt("max_time", time.map(|(t, _)| t))
        .set("bounds", bounds_text(&p));
    let ratio = (spec.function == "dmaj" && n >= 2).then(|| {
        let l = (n as f64).log2();
        format!("{:.4}", p.pipe_count() as f64 / (n as f64 * l * l * l))
    });
    r.opt("size_ratio", ratio);

    if let Some(dir) = out {
        let seed = spec
            .seed
            .ok_or_else(|| CliError::usage("--out samples inputs and needs --seed"))?;
        fs::create_dir_all(&dir)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in 0..samples {
            let (x, y) = sample(&spec, &p, &mut rng)?;
            let inst = p.instance(&x, &y)?;
            let trace = evaluate(&p, &x, &y)?;
            let text = format!("# {}\n{}", spec.input_header(&x, &y), write_instance(&inst));
            fs::write(dir.join(format!("instance-{i}.txt")), text)?;
            fs::write(
                dir.join(format!("instance-{i}.dot")),
                instance_to_dot(&inst, Some(&trace)),
            )?;
        }
        r.set("instances_written", samples);
    }
    Ok(Outcome {
        text: r.render(common.format),
        pass: true,
    })
}

fn verdict_fields(r: &mut Report, v: &Verdict) -> bool {
    match v {
        Verdict::Pass { inputs } => {
            r.set("verdict", "pass").set("inputs", inputs);
            true
        }
        Verdict::Counterexample {
            x,
            y,
            expected,
            got,
        } => {
            r.set("verdict", "counterexample")
                .set("x", bits_to_string(x))
                .set("y", bits_to_string(y))
                .set("expected", *expected as u8)
                .set("got", *got as u8);
            false
        }
    }
}

fn cmd_verify(
    args: &FnArgs,
    common: &Common,
    tt: Option<PathBuf>,
    instance: Option<PathBuf>,
    samples: usize,
) -> Result<Outcome, CliError> {
    let mut r = Report::new();
    if let Some(path) = instance {
        let text = read(&path)?;
        let header = text
            .lines()
            .find_map(|l| {
                l.trim()
                    .strip_prefix('#')
                    .filter(|h| h.contains("function="))
            })
            .ok_or_else(|| CliError::usage("instance file has no `# function=...` header"))?;
        let (spec, x, y) = FnSpec::parse_header(header)?;
        let inst = parse_instance(&text)?;
        let got = evaluate(&Protocol::constant(inst), &[], &[])?.output;
        let expected = spec
            .reference(&x, &y)?
            .ok_or_else(|| CliError::usage("instance input is outside the function's domain"))?;
        r.set("source", path.display())
            .set("function", &spec.function);
        let v = if got == expected {
            Verdict::Pass { inputs: 1 }
        } else {
            Verdict::Counterexample {
                x,
                y,
                expected,
                got,
            }
        };
        let pass = verdict_fields(&mut r, &v);
        return Ok(Outcome {
            text: r.render(common.format),
            pass,
        });
    }

    let spec = args.spec()?;
    let p = spec.build(common.budget_pipes)?;
    r.set("function", &spec.function)
        .set("n", spec.n()?)
        .set("pipes", p.pipe_count());
    let bits = p.alice_bits() + p.bob_bits();

    if let Some(path) = tt {
        let table = FunctionTable::parse(&read(&path)?)?;
        if bits > common.budget_enum {
            return Err(garden_hose::Error::DomainTooLarge {
                bits,
                limit: common.budget_enum,
            }
            .into());
        }
        r.set("mode", "exhaustive").set("table", path.display());
        let pass = verdict_fields(&mut r, &exhaustive_verify(&p, &table)?);
        return Ok(Outcome {
            text: r.render(common.format),
            pass,
        });
    }

    if spec.is_randomized() {
        return verify_randomized(&spec, p, samples, common.format, r);
    }

    let verdict = if bits <= common.budget_enum {
        r.set("mode", "exhaustive");
        let mut inputs = 0u64;
        let mut found = None;
        'outer: for xi in 0..1u64 << p.alice_bits() {
            let x = index_to_bits(xi, p.alice_bits());
            for yi in 0..1u64 << p.bob_bits() {
                let y = index_to_bits(yi, p.bob_bits());
                let Some(expected) = spec.reference(&x, &y)? else {
                    continue;
                };
                inputs += 1;
                let got = evaluate(&p, &x, &y)?.output;
                if got != expected {
                    found = Some(Verdict::Counterexample {
                        x,
                        y,
                        expected,
                        got,
                    });
                    break 'outer;
                }
            }
        }
        found.unwrap_or(Verdict::Pass { inputs })
    } else {
        let seed = spec.seed.ok_or_else(|| {
            CliError::usage("the domain is too large to enumerate; sampling needs --seed")
        })?;
        r.set("mode", "sampled").set("seed", seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut found = None;
        for _ in 0..samples {
            let (x, y) = sample(&spec, &p, &mut rng)?;
            let Some(expected) = spec.reference(&x, &y)? else {
                continue;
            };
            let got = evaluate(&p, &x, &y)?.output;
            if got != expected {
                found = Some(Verdict::Counterexample {
                    x,
                    y,
                    expected,
                    got,
                });
                break;
            }
        }
        found.unwrap_or(Verdict::Pass {
            inputs: samples as u64,
        })
    };
    let pass = verdict_fields(&mut r, &verdict);
    Ok(Outcome {
        text: r.render(common.format),
        pass,
    })
}

/// One-sided error estimate: equal inputs must always be accepted and
/// unequal ones wrongly accepted at most a third of the time.
fn verify_randomized(
    spec: &FnSpec,
    mut p: Protocol,
    trials: usize,
    format: Format,
    mut r: Report,
) -> Result<Outcome, CliError> {
    let seed = spec.seed()?;
    let n = spec.n()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let (mut eq_trials, mut eq_errors, mut ne_trials, mut ne_errors) = (0u64, 0u64, 0u64, 0u64);
    for _ in 0..trials {
        if spec.function == "pub-eq" {
            let tape = RandomTape::from_rng(TapeScope::Public, spec.t() * n, &mut rng);
            p = equality_public_coin(n, spec.t(), &tape)?;
        }
        let y = random_bits(&mut rng, n);
        let equal = rng.gen();
        let mut x = if equal {
            y.clone()
        } else {
            random_bits(&mut rng, n)
        };
        let equal = x == y;
        x.extend(random_bits(&mut rng, p.alice_bits() - n));
        let out = evaluate(&p, &x, &y)?.output;
        if equal {
            eq_trials += 1;
            eq_errors += !out as u64;
        } else {
            ne_trials += 1;
            ne_errors += out as u64;
        }
    }
    let rate = ne_errors as f64 / ne_trials.max(1) as f64;
    let pass = eq_errors == 0 && rate <= 1.0 / 3.0;
    r.set("mode", "randomized")
        .set("seed", seed)
        .set("equal_trials", eq_trials)
        .set("equal_errors", eq_errors)
        .set("unequal_trials", ne_trials)
        .set("unequal_errors", ne_errors)
        .set("error_rate", format!("{rate:.4}"))
        .set("verdict", if pass { "pass" } else { "fail" });
    Ok(Outcome {
        text: r.render(format),
        pass,
    })
}

fn cmd_compile(
    formula: Option<String>,
    tree: Option<PathBuf>,
    verify: bool,
    out: Option<PathBuf>,
    common: &Common,
) -> Result<Outcome, CliError> {
    let mut r = Report::new();
    let (p, reference): (Protocol, Reference) = match (formula, tree) {
        (Some(text), None) => {
            let f = parse_formula(&text)?;
            r.set("source", "formula")
                .set("formula", &f)
                .set("leaves", f.leaf_count());
            (compile_formula(&f)?, Box::new(move |x, y| f.evaluate(x, y)))
        }
        (None, Some(path)) => {
            let t = parse_protocol_tree(&read(&path)?)?;
            r.set("source", path.display()).set("edges", t.edge_count());
            (
                compile_protocol_tree(&t)?,
                Box::new(move |x, y| t.evaluate(x, y)),
            )
        }
        _ => return Err(CliError::usage("give exactly one of --formula and --tree")),
    };
    if let Some(cap) = common.budget_pipes {
        if p.pipe_count() > cap {
            return Err(CliError::usage(format!(
                "protocol needs {} pipes, budget is {cap}",
                p.pipe_count()
            )));
        }
    }
    r.set("alice_bits", p.alice_bits())
        .set("bob_bits", p.bob_bits())
        .set("pipes", p.pipe_count());
    let mut pass = true;
    if verify {
        let table = FunctionTable::from_fn(p.alice_bits(), p.bob_bits(), |x, y| reference(x, y))?;
        let bits = p.alice_bits() + p.bob_bits();
        if bits > common.budget_enum {
            return Err(garden_hose::Error::DomainTooLarge {
                bits,
                limit: common.budget_enum,
            }
            .into());
        }
        pass = verdict_fields(&mut r, &exhaustive_verify(&p, &table)?);
    }
    if let Some(path) = out {
        let (x, y) = (vec![false; p.alice_bits()], vec![false; p.bob_bits()]);
        let dot = instance_to_dot(&p.instance(&x, &y)?, Some(&evaluate(&p, &x, &y)?));
        fs::write(&path, dot)?;
        r.set("dot", path.display());
    }
    Ok(Outcome {
        text: r.render(common.format),
        pass,
    })
}

fn matching_text(m: &Matching) -> String {
    let tap = m.tap().map_or("open".to_string(), |t| t.to_string());
    let pairs: Vec<String> = m
        .normalized_pairs()
        .iter()
        .map(|(a, b)| format!("{a}-{b}"))
        .collect();
    format!(
        "tap={tap} pairs={}",
        if pairs.is_empty() {
            "-".into()
        } else {
            pairs.join(",")
        }
    )
}

fn cmd_oracle(
    ghs: Option<usize>,
    min: Option<PathBuf>,
    s_max: usize,
    covers: Option<PathBuf>,
    one_way: Option<PathBuf>,
    out: Option<PathBuf>,
    common: &Common,
) -> Result<Outcome, CliError> {
    if ghs.is_none() && min.is_none() && covers.is_none() && one_way.is_none() {
        return Err(CliError::usage(
            "give at least one of --ghs, --min-gh, --covers, --one-way",
        ));
    }
    let mut text = String::new();
    let mut pass = true;
    if let Some(s) = ghs {
        let g = garden_hose_matrix(s)?;
        match common.format {
            Format::Text => text.push_str(&g.to_text()),
            Format::Csv => {
                for row in &g.entries {
                    let cells: Vec<&str> = row.iter().map(|&v| if v { "1" } else { "0" }).collect();
                    text.push_str(&cells.join(","));
                    text.push('\n');
                }
            }
        }
    }
    if let Some(path) = min {
        let f = FunctionTable::parse(&read(&path)?)?;
        let mut r = Report::new();
        r.set("table", path.display());
        match min_gh(&f, s_max) {
            Ok(w) => {
                r.set("min_gh", w.s);
                text.push_str(&r.render(common.format));
                if common.format == Format::Text {
                    for (x, m) in w.rows.iter().enumerate() {
                        let x = bits_to_string(&index_to_bits(x as u64, f.alice_bits()));
                        text.push_str(&format!("alice x={x} {}\n", matching_text(m)));
                    }
                    for (y, m) in w.cols.iter().enumerate() {
                        let y = bits_to_string(&index_to_bits(y as u64, f.bob_bits()));
                        text.push_str(&format!("bob y={y} {}\n", matching_text(m)));
                    }
                }
            }
            Err(garden_hose::Error::NotFound { s_max }) => {
                r.set("min_gh", format!("not found with s <= {s_max}"));
                text.push_str(&r.render(common.format));
                pass = false;
            }
            Err(e) => return Err(e.into()),
        }
    }
    if let Some(path) = covers {
        let f = FunctionTable::parse(&read(&path)?)?;
        let c = cover_numbers(&f);
        let mut r = Report::new();
        r.set("table", path.display())
            .set("c0", c.c0)
            .set("c1", c.c1)
            .set("exact", c.exact);
        text.push_str(&r.render(common.format));
    }
    if let Some(path) = one_way {
        let f = FunctionTable::parse(&read(&path)?)?;
        let mut r = Report::new();
        r.set("table", path.display())
            .set("alice_to_bob", one_way_cc(&f, Direction::AliceToBob))
            .set("bob_to_alice", one_way_cc(&f, Direction::BobToAlice));
        text.push_str(&r.render(common.format));
    }
    if let Some(path) = out {
        fs::write(path, &text)?;
    }
    Ok(Outcome { text, pass })
}
