//! Command-line interface: solve and verify additive-form zero problems,
//! normalize forms, sweep the bins lemma, classify profiles by strategy,
//! brute-force small instances, and generate seeded random forms.
//!
//! Exit codes: 0 success / verified, 2 unsolved or check failed, 1 usage
//! or input error. Identical invocations with identical seeds write
//! byte-identical report files.

use std::collections::BTreeMap;
use std::process::ExitCode;

use ramified_zero::files::{
    to_json_pretty, CertificateFile, FieldLiteral, FormFile, SolveReportFile,
};
use ramified_zero::form::AdditiveForm;
use ramified_zero::oracle;
use ramified_zero::ring::Field;
use ramified_zero::solver::{self, SolveOptions};

const DEFAULT_SEED: u64 = 0x2AD1_C5EE_D000_0001;
const USAGE: &str = "\
ramified-zero <command> [flags]

commands:
  solve            --input FORM.json [--precision N] [--target N] [--budget B]
                   [--seed S] [--report OUT.json] [--certificate OUT.json] [--json]
  verify           --input FORM.json --certificate CERT.json [--json]
  normalize        --input FORM.json [--json]
  bins-check       --m M --n N (--exhaustive | --samples S) [--seed S] [--json]
  dispatch-report  --d D --s S --m M --e E [--out OUT.json]
                   [--check-fallback FORMS] [--budget B] [--seed S] [--json]
  brute            --input FORM.json --n-small N --support W [--json]
  random           --e E --eisenstein C0,C1,... --d D --s S --out FORM.json
                   [--precision N] [--profile S0,S1,...] [--seed S]

exit codes: 0 success/verified, 2 unsolved or check failed, 1 input error";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match run(&args) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

struct Flags {
    values: BTreeMap<String, String>,
    switches: Vec<String>,
}

impl Flags {
    fn parse(
        args: &[String],
        value_flags: &[&str],
        switch_flags: &[&str],
    ) -> Result<Flags, String> {
        let mut values = BTreeMap::new();
        let mut switches = Vec::new();
        let mut it = args.iter();
        while let Some(arg) = it.next() {
            let name = arg
                .strip_prefix("--")
                .ok_or_else(|| format!("unexpected argument {arg:?}\n\n{USAGE}"))?;
            if switch_flags.contains(&name) {
                switches.push(name.to_string());
            } else if value_flags.contains(&name) {
                let value = it
                    .next()
                    .ok_or_else(|| format!("flag --{name} needs a value"))?;
                values.insert(name.to_string(), value.clone());
            } else {
                return Err(format!("unknown flag --{name}\n\n{USAGE}"));
            }
        }
        Ok(Flags { values, switches })
    }

    fn get(&self, name: &str) -> Option<&str> {
        self.values.get(name).map(|s| s.as_str())
    }

    fn require(&self, name: &str) -> Result<&str, String> {
        self.get(name).ok_or_else(|| format!("missing --{name}"))
    }

    fn parse_num<T: std::str::FromStr>(&self, name: &str) -> Result<Option<T>, String> {
        match self.get(name) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| format!("--{name}: cannot parse {v:?}")),
        }
    }

    fn require_num<T: std::str::FromStr>(&self, name: &str) -> Result<T, String> {
        self.require(name)?
            .parse::<T>()
            .map_err(|_| format!("--{name}: cannot parse {:?}", self.get(name).unwrap()))
    }

    fn has(&self, name: &str) -> bool {
        self.switches.iter().any(|s| s == name)
    }
}

fn run(args: &[String]) -> Result<ExitCode, String> {
    let Some(command) = args.first() else {
        return Err(USAGE.to_string());
    };
    let rest = &args[1..];
    match command.as_str() {
        "solve" => cmd_solve(rest),
        "verify" => cmd_verify(rest),
        "normalize" => cmd_normalize(rest),
        "bins-check" => cmd_bins_check(rest),
        "dispatch-report" => cmd_dispatch_report(rest),
        "brute" => cmd_brute(rest),
        "random" => cmd_random(rest),
        "help" | "--help" | "-h" => {
            println!("{USAGE}");
            Ok(ExitCode::SUCCESS)
        }
        other => Err(format!("unknown command {other:?}\n\n{USAGE}")),
    }
}

fn read_form(path: &str, precision: Option<u32>) -> Result<(Field, AdditiveForm), String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
    let mut file: FormFile = serde_json::from_str(&text).map_err(|e| format!("{path}: {e}"))?;
    if precision.is_some() {
        file.field.precision = precision;
    }
    file.to_form().map_err(|e| format!("{path}: {e}"))
}

fn write_file(path: &str, contents: &str) -> Result<(), String> {
    std::fs::write(path, contents).map_err(|e| format!("{path}: {e}"))
}

fn cmd_solve(args: &[String]) -> Result<ExitCode, String> {
    let flags = Flags::parse(
        args,
        &[
            "input",
            "precision",
            "target",
            "budget",
            "seed",
            "report",
            "certificate",
        ],
        &["json"],
    )?;
    let precision = flags.parse_num::<u32>("precision")?;
    let (_, form) = read_form(flags.require("input")?, precision)?;
    let opts = SolveOptions {
        n_target: flags.parse_num::<u32>("target")?,
        budget: flags.parse_num::<u64>("budget")?.unwrap_or(100_000),
    };
    let seed = flags.parse_num::<u64>("seed")?.unwrap_or(DEFAULT_SEED);
    let report = solver::solve(&form, &opts).map_err(|e| e.to_string())?;
    let file = SolveReportFile::build(&form, &report, Some(seed));
    if let Some(path) = flags.get("report") {
        write_file(path, &to_json_pretty(&file))?;
    }
    if let Some(cert) = &file.certificate {
        if let Some(path) = flags.get("certificate") {
            write_file(path, &to_json_pretty(cert))?;
        }
    }
    if flags.has("json") {
        print!("{}", to_json_pretty(&file));
    } else if report.certificate.is_some() {
        println!(
            "certificate: strategy {}, hensel iterations {}, target valuation {} ({:.1} ms)",
            file.strategy, file.hensel_iterations, file.n_target, report.wall_time_ms
        );
    } else {
        println!(
            "unsolved: dispatched {}, fallback expanded {} nodes{}",
            file.dispatched,
            file.fallback_nodes,
            if file.above_bound_unsolved {
                " [NOTE: form meets the variable bound]"
            } else {
                ""
            }
        );
    }
    Ok(if report.certificate.is_some() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn cmd_verify(args: &[String]) -> Result<ExitCode, String> {
    let flags = Flags::parse(args, &["input", "certificate", "precision"], &["json"])?;
    let precision = flags.parse_num::<u32>("precision")?;
    let (field, form) = read_form(flags.require("input")?, precision)?;
    let path = flags.require("certificate")?;
    let text = std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
    let file: CertificateFile = serde_json::from_str(&text).map_err(|e| format!("{path}: {e}"))?;
    let cert = file
        .to_certificate(&field)
        .map_err(|e| format!("{path}: {e}"))?;
    let check = form.verify_certificate(&cert);
    if flags.has("json") {
        println!(
            "{{\"passes\": {}, \"valuation\": \"{}\", \"pivot_is_unit\": {}, \"n_target\": {}}}",
            check.passes, check.valuation, check.pivot_is_unit, cert.n_target
        );
    } else {
        println!(
            "{}: valuation {}, target {}, pivot {} {}",
            if check.passes { "verified" } else { "REJECTED" },
            check.valuation,
            cert.n_target,
            cert.pivot,
            if check.pivot_is_unit {
                "(unit)"
            } else {
                "(NOT a unit)"
            }
        );
    }
    Ok(if check.passes {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn cmd_normalize(args: &[String]) -> Result<ExitCode, String> {
    let flags = Flags::parse(args, &["input", "precision"], &["json"])?;
    let precision = flags.parse_num::<u32>("precision")?;
    let (_, form) = read_form(flags.require("input")?, precision)?;
    let (r, normed, _) = form.normalize().map_err(|e| e.to_string())?;
    if flags.has("json") {
        println!(
            "{{\"rotation\": {r}, \"profile\": {:?}, \"normalized_profile\": {:?}}}",
            form.profile().counts(),
            normed.profile().counts()
        );
    } else {
        println!("rotation: {r}");
        println!("profile:            {:?}", form.profile().counts());
        println!("normalized profile: {:?}", normed.profile().counts());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_bins_check(args: &[String]) -> Result<ExitCode, String> {
    let flags = Flags::parse(
        args,
        &["m", "n", "samples", "seed"],
        &["exhaustive", "json"],
    )?;
    let m: usize = flags.require_num("m")?;
    let n: usize = flags.require_num("n")?;
    if m < 1 || n < 2 {
        return Err("need m >= 1 and n >= 2".to_string());
    }
    let outcome = if flags.has("exhaustive") {
        let pair_count = (n * (n - 1) / 2) as u32;
        let states = (m as u128).saturating_pow(pair_count);
        if states > 1_000_000_000u128 {
            return Err(format!(
                "exhaustive sweep of {states} assignments is too large; use --samples"
            ));
        }
        ramified_zero::pairing::exhaustive_sweep_parallel(m, n, oracle::thread_count())
    } else {
        let samples: u64 = flags.require_num("samples")?;
        let seed = flags.parse_num::<u64>("seed")?.unwrap_or(DEFAULT_SEED);
        oracle::random_bins_sweep(m, n, samples, seed)
    };
    if flags.has("json") {
        println!(
            "{{\"m\": {m}, \"n\": {n}, \"checked\": {}, \"failures\": {}}}",
            outcome.checked, outcome.failures
        );
    } else {
        println!(
            "checked {} assignments, {} failures",
            outcome.checked, outcome.failures
        );
    }
    Ok(if outcome.failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

#[derive(serde::Serialize)]
struct FallbackCheck {
    profile: Vec<usize>,
    attempts: u32,
    certificates: u32,
    all_verified: bool,
}

#[derive(serde::Serialize)]
struct DispatchReportFile {
    version: String,
    seed: u64,
    d: usize,
    s: usize,
    m: u32,
    e: usize,
    field: FieldLiteral,
    total_profiles: u64,
    single_level: u64,
    adjacent_big: u64,
    adjacent_four_four: u64,
    fallback: u64,
    fallback_exemplars: Vec<Vec<usize>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    fallback_checks: Vec<FallbackCheck>,
}

fn cmd_dispatch_report(args: &[String]) -> Result<ExitCode, String> {
    let flags = Flags::parse(
        args,
        &[
            "d",
            "s",
            "m",
            "e",
            "out",
            "check-fallback",
            "budget",
            "seed",
        ],
        &["json"],
    )?;
    let d: usize = flags.require_num("d")?;
    let s: usize = flags.require_num("s")?;
    let m: u32 = flags.require_num("m")?;
    let e: usize = flags.require_num("e")?;
    if d != 2 * m as usize {
        return Err(format!("--m must be d/2 (got d = {d}, m = {m})"));
    }
    let report = oracle::dispatch_coverage(d, s, m).map_err(|err| err.to_string())?;

    // concrete soundness check over the default field x^e - 2: every
    // certificate the fallback emits on exemplar profiles must verify
    let mut eis = vec![0i64; e];
    eis[0] = -2;
    let field =
        Field::from_i64(e, &eis, Field::default_precision(e)).map_err(|err| err.to_string())?;
    let forms_per = flags.parse_num::<u32>("check-fallback")?.unwrap_or(0);
    let budget = flags.parse_num::<u64>("budget")?.unwrap_or(100_000);
    let seed = flags.parse_num::<u64>("seed")?.unwrap_or(DEFAULT_SEED);
    let mut fallback_checks = Vec::new();
    if forms_per > 0 {
        for profile in &report.fallback_exemplars {
            let mut certificates = 0;
            let mut all_verified = true;
            for i in 0..forms_per {
                let form = oracle::random_form(
                    &field,
                    d as u32,
                    s,
                    &oracle::LevelSpec::Profile(profile.clone()),
                    seed ^ (i as u64),
                )
                .map_err(|err| err.to_string())?;
                let opts = SolveOptions {
                    n_target: None,
                    budget,
                };
                match solver::solve(&form, &opts) {
                    Ok(rep) => {
                        if let Some(cert) = rep.certificate {
                            certificates += 1;
                            if !form.verify_certificate(&cert).passes {
                                all_verified = false;
                            }
                        }
                    }
                    Err(_) => all_verified = false,
                }
            }
            fallback_checks.push(FallbackCheck {
                profile: profile.clone(),
                attempts: forms_per,
                certificates,
                all_verified,
            });
        }
    }

    let file = DispatchReportFile {
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        d,
        s,
        m,
        e,
        field: FieldLiteral::describe(&field),
        total_profiles: report.total,
        single_level: report.single_level,
        adjacent_big: report.adjacent_big,
        adjacent_four_four: report.adjacent_four_four,
        fallback: report.fallback,
        fallback_exemplars: report.fallback_exemplars.clone(),
        fallback_checks,
    };
    let json = to_json_pretty(&file);
    if let Some(path) = flags.get("out") {
        write_file(path, &json)?;
        if flags.has("json") {
            print!("{json}");
        } else {
            println!(
                "{} profiles: {} single-level, {} adjacent-big, {} four-four, {} fallback",
                report.total,
                report.single_level,
                report.adjacent_big,
                report.adjacent_four_four,
                report.fallback
            );
        }
    } else {
        print!("{json}");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_brute(args: &[String]) -> Result<ExitCode, String> {
    let flags = Flags::parse(
        args,
        &["input", "n-small", "support", "precision"],
        &["json"],
    )?;
    let precision = flags.parse_num::<u32>("precision")?;
    let (_, form) = read_form(flags.require("input")?, precision)?;
    let n_small: u32 = flags.require_num("n-small")?;
    let support: usize = flags.require_num("support")?;
    let zeros = oracle::brute_force_zero(&form, n_small, support).map_err(|e| e.to_string())?;
    if flags.has("json") {
        let digit_lists: Vec<&Vec<Vec<u8>>> = zeros.iter().map(|z| &z.digits).collect();
        println!(
            "{{\"count\": {}, \"zeros\": {}}}",
            zeros.len(),
            serde_json::to_string(&digit_lists).expect("digit serialization")
        );
    } else {
        println!(
            "{} zeros with support in the first {} coordinates",
            zeros.len(),
            support.min(form.len())
        );
        for z in zeros.iter().take(10) {
            println!("  {:?}", z.digits);
        }
        if zeros.len() > 10 {
            println!("  ... ({} more)", zeros.len() - 10);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_random(args: &[String]) -> Result<ExitCode, String> {
    let flags = Flags::parse(
        args,
        &[
            "e",
            "eisenstein",
            "d",
            "s",
            "precision",
            "profile",
            "seed",
            "out",
        ],
        &[],
    )?;
    let e: usize = flags.require_num("e")?;
    let eis: Vec<i64> = flags
        .require("eisenstein")?
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map_err(|_| format!("bad eisenstein entry {t:?}"))
        })
        .collect::<Result<_, _>>()?;
    let d: u32 = flags.require_num("d")?;
    let s: usize = flags.require_num("s")?;
    let n_pi = flags
        .parse_num::<u32>("precision")?
        .unwrap_or_else(|| Field::default_precision(e));
    let field = Field::from_i64(e, &eis, n_pi).map_err(|err| err.to_string())?;
    let spec = match flags.get("profile") {
        None => oracle::LevelSpec::Uniform,
        Some(p) => {
            let counts: Vec<usize> = p
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<usize>()
                        .map_err(|_| format!("bad profile entry {t:?}"))
                })
                .collect::<Result<_, _>>()?;
            oracle::LevelSpec::Profile(counts)
        }
    };
    let seed = flags.parse_num::<u64>("seed")?.unwrap_or(DEFAULT_SEED);
    let form = oracle::random_form(&field, d, s, &spec, seed).map_err(|err| err.to_string())?;
    let mut file = FormFile::from_form(&form);
    file.field = FieldLiteral {
        e,
        eisenstein: eis,
        precision: Some(n_pi),
    };
    let json = to_json_pretty(&file);
    let out = flags.require("out")?;
    write_file(out, &json)?;
    println!("wrote {out} ({s} coefficients, d = {d}, seed {seed})");
    Ok(ExitCode::SUCCESS)
}
