//! `qforge` command-line front end.
//!
//! Exit codes: 0 success, 1 error, 2 at least one condition violated.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use qforge::catalog::{catalog_entries, CatalogId};
use qforge::forge::{check_state, support_histogram, ConditionSet, ForgeOptions, CheckReport};
use qforge::geometry::{max_overlap, OverlapOptions, OverlapResult};
use qforge::operator::{decompose, DenseOperator};
use qforge::plan::{min_settings, support_of, total_settings, SettingPlan, SEARCH_BUDGET};
use qforge::qudit::Dims;
use serde_json::json;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

const AFTER_HELP: &str = "Exit status: 0 on success, 1 on error, 2 when `check` or `report --state` finds a violated condition.\n\
Seeds and states are catalog ids (see `qforge catalog`) or JSON operator files {\"dims\", \"re\", \"im\"}.";

#[derive(Parser, Debug)]
#[command(name = "qforge", version, about = "Entanglement-detection conditions from Clifford orbits", after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Forge the condition set of a seed and write it to a file.
    Generate {
        #[arg(long)]
        seed: String,
        #[arg(long)]
        out: PathBuf,
        /// Upper bound to use instead of the known or computed one.
        #[arg(long)]
        bound: Option<f64>,
    },
    /// Test a state against a condition set.
    Check {
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        state: String,
        /// Print only violated conditions.
        #[arg(long)]
        violated_only: bool,
    },
    /// Maximum overlap of a seed with product kets.
    Overlap {
        #[arg(long)]
        seed: String,
        #[command(flatten)]
        opts: OverlapArgs,
    },
    /// Fewest local-MUB settings for a seed's Pauli support.
    Settings {
        #[arg(long)]
        seed: String,
        #[arg(long, default_value_t = SEARCH_BUDGET)]
        budget: u64,
    },
    /// List catalog ids.
    Catalog,
    /// Overlap, conditions, settings and an optional state check in one summary.
    Report {
        #[arg(long)]
        seed: String,
        #[arg(long)]
        state: Option<String>,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        opts: OverlapArgs,
    },
}

#[derive(clap::Args, Debug)]
struct OverlapArgs {
    #[arg(long, default_value_t = 64)]
    restarts: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long = "prng-seed", default_value_t = 0)]
    prng_seed: u64,
}

impl OverlapArgs {
    fn options(&self) -> Result<OverlapOptions> {
        if self.restarts == 0 {
            bail!("--restarts must be positive");
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            bail!("--tol must be positive");
        }
        Ok(OverlapOptions { restarts: self.restarts, tol: self.tol, prng_seed: self.prng_seed, ..OverlapOptions::default() })
    }
}

/// Nine significant digits.
pub fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0.00000000".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..=9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        // rounding can carry into a new leading digit
        if s.trim_start_matches('-').replace('.', "").trim_start_matches('0').len() > 9 && decimals > 0 {
            format!("{x:.prec$}", prec = decimals - 1)
        } else {
            s
        }
    } else {
        format!("{x:.8e}")
    }
}

/// A seed or state given on the command line.
struct Operand {
    name: String,
    id: Option<CatalogId>,
    op: DenseOperator,
}

fn resolve(s: &str) -> Result<Operand> {
    match s.parse::<CatalogId>() {
        Ok(id) => Ok(Operand { name: id.to_string(), id: Some(id), op: id.operator()? }),
        Err(parse_err) => {
            let path = Path::new(s);
            if !path.is_file() {
                bail!("'{s}' is neither a catalog id nor a readable file ({parse_err})");
            }
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {s}"))?;
            let op = DenseOperator::from_json(&text).with_context(|| format!("malformed operator file {s}"))?;
            Ok(Operand { name: s.to_string(), id: None, op })
        }
    }
}

fn resolve_state(s: &str) -> Result<Operand> {
    let o = resolve(s)?;
    o.op.require_state().with_context(|| format!("{} is not a density matrix", o.name))?;
    Ok(o)
}

fn known_bound(seed: &Operand) -> Option<f64> {
    seed.id.and_then(|i| i.family()).and_then(|f| f.known_bound())
}

fn bound_for(seed: &Operand, opts: &OverlapOptions) -> Result<f64> {
    match known_bound(seed) {
        Some(b) => Ok(b),
        None => Ok(max_overlap(&seed.op, opts)?.value),
    }
}

fn forge_seed(seed: &Operand, bound: f64) -> Result<ConditionSet> {
    let gens = qforge::forge::standard_generators(seed.op.dims())?;
    Ok(qforge::forge::forge(&decompose(&seed.op), &seed.name, &gens, bound, &ForgeOptions::default())?)
}

fn plan_for(seed: &Operand, budget: u64) -> Result<(usize, SettingPlan)> {
    let support = support_of(&decompose(&seed.op), 1e-12);
    let plan = min_settings(&support, seed.op.dims(), budget)?;
    Ok((support.len(), plan))
}

fn complex_text(z: qforge::C64) -> String {
    let im = sig9(z.im);
    if im.starts_with('-') {
        format!("{}{}i", sig9(z.re), im)
    } else {
        format!("{}+{}i", sig9(z.re), im)
    }
}

fn site_ket_text(v: &qforge::CVector) -> String {
    let parts: Vec<String> = v.iter().map(|&z| complex_text(z)).collect();
    format!("[{}]", parts.join(", "))
}

fn write_overlap(out: &mut dyn Write, r: &OverlapResult) -> Result<()> {
    writeln!(out, "P_E = {}", sig9(r.value))?;
    writeln!(out, "restarts: {}, sweeps: {}, converged: {}", r.restarts, r.sweeps, r.converged)?;
    if let Some(s) = r.schmidt {
        writeln!(out, "schmidt cross-check: {}", sig9(s))?;
    }
    writeln!(out, "argmax:")?;
    for (i, v) in r.argmax.iter().enumerate() {
        writeln!(out, "  site {i}: {}", site_ket_text(v))?;
    }
    Ok(())
}

fn write_plan(out: &mut dyn Write, dims: &Dims, support: usize, plan: &SettingPlan) -> Result<()> {
    writeln!(out, "total settings: {}", total_settings(dims))?;
    writeln!(out, "support size: {support} non-identity labels")?;
    writeln!(out, "settings needed: {}", plan.len())?;
    writeln!(out, "minimal: {}", plan.minimal)?;
    writeln!(out, "plan:")?;
    for (i, s) in plan.settings.iter().enumerate() {
        let labels: Vec<String> =
            plan.assignment.iter().filter(|(_, j)| *j == i).map(|(l, _)| l.name(dims)).collect();
        writeln!(out, "  {} {}", s.label(), labels.join(" "))?;
    }
    Ok(())
}

fn write_check(out: &mut dyn Write, r: &CheckReport, violated_only: bool) -> Result<()> {
    writeln!(out, "{:>8}  {:>14}  {:>14}  violated", "index", "value", "bound")?;
    for (i, &v) in r.values.iter().enumerate() {
        let hit = r.violated.binary_search(&i).is_ok();
        if violated_only && !hit {
            continue;
        }
        writeln!(out, "{i:>8}  {:>14}  {:>14}  {}", sig9(v), sig9(r.bound), if hit { "yes" } else { "no" })?;
    }
    writeln!(out, "violated: {} of {}", r.violated.len(), r.values.len())?;
    writeln!(out, "max value: {} at {}", sig9(r.max_value), r.argmax)?;
    writeln!(out, "max margin: {}", sig9(r.max_margin))?;
    if !r.sanity_failures.is_empty() {
        writeln!(out, "SANITY_FAIL: {} conditions below zero", r.sanity_failures.len())?;
    }
    Ok(())
}

fn status(r: &CheckReport) -> i32 {
    if r.detected() {
        EXIT_VIOLATION
    } else {
        EXIT_OK
    }
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Generate { seed, out: path, bound } => {
            let seed = resolve(&seed)?;
            let bound = match bound {
                Some(b) if (0.0..=1.0).contains(&b) => b,
                Some(b) => bail!("--bound {b} is outside [0, 1]"),
                None => bound_for(&seed, &OverlapOptions::default())?,
            };
            let set = forge_seed(&seed, bound)?;
            set.save(&path).with_context(|| format!("writing {}", path.display()))?;
            writeln!(out, "seed: {}", set.seed)?;
            writeln!(out, "dims: {}", set.dims)?;
            writeln!(out, "bound: {}", sig9(set.bound))?;
            writeln!(out, "generators: {} ({})", set.generators, set.orbit_kind())?;
            writeln!(out, "rounds: {}", set.rounds)?;
            let hist: Vec<String> = support_histogram(&set).iter().map(|(s, n)| format!("{s} x{n}")).collect();
            writeln!(out, "support sizes: {}", hist.join(", "))?;
            writeln!(out, "conditions: {}", set.len())?;
            Ok(EXIT_OK)
        }
        Command::Check { set, state, violated_only } => {
            let set = ConditionSet::load(&set).with_context(|| format!("loading {}", set.display()))?;
            let state = resolve_state(&state)?;
            let r = check_state(&set, &state.op)?;
            writeln!(out, "set: {} ({} conditions)", set.seed, set.len())?;
            writeln!(out, "state: {}", state.name)?;
            write_check(out, &r, violated_only)?;
            Ok(status(&r))
        }
        Command::Overlap { seed, opts } => {
            let seed = resolve(&seed)?;
            let r = max_overlap(&seed.op, &opts.options()?)?;
            writeln!(out, "seed: {}", seed.name)?;
            write_overlap(out, &r)?;
            if let Some(b) = known_bound(&seed) {
                writeln!(out, "closed form: {}", sig9(b))?;
            }
            Ok(EXIT_OK)
        }
        Command::Settings { seed, budget } => {
            let seed = resolve(&seed)?;
            let (support, plan) = plan_for(&seed, budget)?;
            writeln!(out, "seed: {}", seed.name)?;
            write_plan(out, seed.op.dims(), support, &plan)?;
            Ok(EXIT_OK)
        }
        Command::Catalog => {
            for (id, what) in catalog_entries() {
                writeln!(out, "{id:<14} {what}")?;
            }
            Ok(EXIT_OK)
        }
        Command::Report { seed, state, json, opts } => report(out, &seed, state.as_deref(), json, &opts.options()?),
    }
}

fn report(out: &mut dyn Write, seed: &str, state: Option<&str>, as_json: bool, opts: &OverlapOptions) -> Result<i32> {
    let seed = resolve(seed)?;
    let overlap = max_overlap(&seed.op, opts)?;
    let known = known_bound(&seed);
    let bound = known.unwrap_or(overlap.value);
    let set = forge_seed(&seed, bound)?;
    let (support, plan) = plan_for(&seed, SEARCH_BUDGET)?;
    let check = match state {
        Some(s) => {
            let st = resolve_state(s)?;
            let r = check_state(&set, &st.op)?;
            Some((st.name, r))
        }
        None => None,
    };
    let dims = seed.op.dims().clone();
    if as_json {
        let settings: serde_json::Value = serde_json::from_str(&plan.to_json(&dims))?;
        let mut doc = json!({
            "seed": seed.name,
            "dims": dims.as_slice(),
            "overlap": {
                "value": sig9(overlap.value),
                "closed_form": known.map(sig9),
                "restarts": overlap.restarts,
                "converged": overlap.converged,
            },
            "conditions": {
                "count": set.len(),
                "bound": sig9(set.bound),
                "orbit": set.orbit_kind(),
                "support_sizes": set.support_sizes(),
            },
            "settings": {
                "total": total_settings(&dims),
                "support": support,
                "needed": plan.len(),
                "minimal": plan.minimal,
                "plan": settings["settings"],
            },
        });
        if let Some((name, r)) = &check {
            doc["check"] = json!({
                "state": name,
                "violated": r.violated,
                "max_value": sig9(r.max_value),
                "max_margin": sig9(r.max_margin),
                "sanity_failures": r.sanity_failures.len(),
            });
        }
        writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
    } else {
        writeln!(out, "== seed {} on {} ==", seed.name, dims)?;
        writeln!(out, "-- overlap")?;
        write_overlap(out, &overlap)?;
        if let Some(b) = known {
            writeln!(out, "closed form: {}", sig9(b))?;
        }
        writeln!(out, "-- conditions")?;
        writeln!(out, "conditions: {} ({})", set.len(), set.orbit_kind())?;
        writeln!(out, "bound: {}", sig9(set.bound))?;
        let sizes: Vec<String> = set.support_sizes().iter().map(|s| s.to_string()).collect();
        writeln!(out, "support sizes: {}", sizes.join(", "))?;
        writeln!(out, "-- settings")?;
        write_plan(out, &dims, support, &plan)?;
        if let Some((name, r)) = &check {
            writeln!(out, "-- check {name}")?;
            writeln!(out, "violated: {} of {}", r.violated.len(), r.values.len())?;
            writeln!(out, "max value: {} at {}", sig9(r.max_value), r.argmax)?;
            writeln!(out, "max margin: {}", sig9(r.max_margin))?;
        }
    }
    Ok(check.map(|(_, r)| status(&r)).unwrap_or(EXIT_OK))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_ERROR
                }
            };
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_ERROR
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig9(0.625), "0.625000000");
        assert_eq!(sig9(0.5), "0.500000000");
        assert_eq!(sig9(4.0 / 9.0), "0.444444444");
        assert_eq!(sig9(-0.25), "-0.250000000");
        assert_eq!(sig9(1.0), "1.00000000");
        assert_eq!(sig9(13824.0), "13824.0000");
        assert_eq!(sig9(0.0), "0.00000000");
        assert_eq!(sig9(0.9999999999), "1.00000000");
        assert_eq!(sig9(1.5e-12), "1.50000000e-12");
    }

    #[test]
    fn parses_every_subcommand() {
        for argv in [
            vec!["qforge", "generate", "--seed", "ghz:3", "--out", "x.json"],
            vec!["qforge", "check", "--set", "x.json", "--state", "werner:0.5"],
            vec!["qforge", "overlap", "--seed", "w:3", "--restarts", "8", "--tol", "1e-9", "--prng-seed", "4"],
            vec!["qforge", "settings", "--seed", "h:3"],
            vec!["qforge", "catalog"],
            vec!["qforge", "report", "--seed", "bell:2", "--json"],
        ] {
            assert!(Cli::try_parse_from(argv).is_ok());
        }
        assert!(Cli::try_parse_from(["qforge"]).is_err());
        assert!(Cli::try_parse_from(["qforge", "catalog", "overlap"]).is_err());
    }
}
