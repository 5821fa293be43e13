//! Experiment runner behind the `nikishin-lab` binary.
//!
//! Every command validates its parameters, computes, writes CSV/JSON
//! artifacts into `--out` and maps the outcome to an exit status: 0 success,
//! 1 input error, 2 a checked property failed (artifacts are still written).

mod report;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C64;

use crate::equilibrium::{
    build_interaction, lcm_step, nth_root_compare, proportions, ratio_experiment,
    solve_vector_equilibrium, supports, EquilibriumOptions, IndexRay,
};
use crate::error::{Error, Result};
use crate::hermite_pade::{normality_scan, solve_mixed, MultiIndex2};
use crate::nikishin::{MixedSystem, SystemDescriptor};
use crate::reduction::{identity_table, standard_probes, IdentityId};
use crate::simquad::{build_rule, diagonal_sequence, markov_rate};
use report::{fmt_num, write_csv, write_json};

#[derive(Parser, Debug)]
#[command(
    name = "nikishin-lab",
    version,
    about = "Experiments on Nikishin systems and mixed-type Hermite-Pade forms"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// System descriptor (TOML).
    #[arg(long, global = true)]
    pub system: Option<PathBuf>,
    /// Bundled demo instead of a file: classical, demo01, demo10, demo11, demo02.
    #[arg(long, global = true)]
    pub demo: Option<String>,
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Tolerance of the command's check (each command has its own default).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Validate a descriptor and write its normalized form plus a summary.
    SystemBuild,
    /// Solve one mixed form, e.g. --index "2 1;1 1".
    HpSolve {
        #[arg(long)]
        index: String,
    },
    /// Normality of every index with |n_1| ≤ max-total.
    HpScan {
        #[arg(long, default_value_t = 6)]
        max_total: usize,
    },
    /// Simultaneous quadrature nodes and weights for the second system.
    QuadTable {
        /// Multi-index such as "3 4"; repeatable. Default (n, n+1, …) for n ≤ 4.
        #[arg(long)]
        index: Vec<String>,
    },
    /// Type II approximation errors along the diagonal against δ_K.
    MarkovRate {
        #[arg(long, default_value_t = 18)]
        max_total: usize,
        /// Probe "re,im"; repeatable.
        #[arg(long, allow_hyphen_values = true)]
        probe: Vec<String>,
    },
    /// Cauchy-transform identities at the standard probes.
    ReduceVerify {
        /// Identity name or "all".
        #[arg(long, default_value = "all")]
        id: String,
    },
    /// Vector equilibrium problem for the given proportions.
    EquilibriumSolve {
        /// Ray step such as "2;1 1"; proportions default to those of the period step.
        #[arg(long)]
        step: Option<String>,
        #[arg(long, default_value_t = 512)]
        grid: usize,
    },
    /// n-th root and ratio asymptotics along a ray base + k·step.
    Asymptotics {
        #[arg(long)]
        base: String,
        #[arg(long)]
        step: Option<String>,
        #[arg(long, default_value_t = 2)]
        k_from: usize,
        #[arg(long, default_value_t = 8)]
        k_to: usize,
        #[arg(long, allow_hyphen_values = true)]
        probe: Vec<String>,
        #[arg(long, default_value_t = 512)]
        grid: usize,
        /// Orthonormal scaling of the ratios (scalar case only).
        #[arg(long)]
        orthonormal: bool,
    },
}

/// Parses arguments, runs and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e @ Error::AssertionFailure { .. }) => {
            eprintln!("{e}");
            2
        }
        Err(e) => {
            eprintln!("{e}");
            1
        }
    }
}

/// Reads and validates a descriptor file.
pub fn load_descriptor(path: &Path) -> Result<MixedSystem> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InputError(format!("{}: {e}", path.display())))?;
    SystemDescriptor::from_toml(&text)?.build()
}

fn descriptor_of(common: &Common) -> Result<SystemDescriptor> {
    match (&common.system, &common.demo) {
        (Some(p), None) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::InputError(format!("{}: {e}", p.display())))?;
            SystemDescriptor::from_toml(&text)
        }
        (None, Some(d)) => crate::demos::descriptor(d),
        (None, None) => Err(Error::InputError(
            "give --system <path> or --demo <name>".into(),
        )),
        (Some(_), Some(_)) => Err(Error::InputError(
            "--system and --demo are exclusive".into(),
        )),
    }
}

fn input(e: Error) -> Error {
    match e {
        Error::ParseError(_)
        | Error::ValidationError(_)
        | Error::InputError(_)
        | Error::IoError(_) => e,
        other => Error::InputError(other.to_string()),
    }
}

fn assertion(claim: &str, detail: String) -> Error {
    Error::AssertionFailure {
        claim: claim.into(),
        detail,
    }
}

/// "3 2;2 2" → ((3, 2); (2, 2)).
pub fn parse_index(s: &str) -> Result<MultiIndex2> {
    let part = |p: &str| -> Result<Vec<usize>> {
        p.split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::InputError(format!("bad index entry '{t}'")))
            })
            .collect()
    };
    let (a, b) = s
        .split_once(';')
        .ok_or_else(|| Error::InputError(format!("index '{s}' needs the form 'n1;n2'")))?;
    let (n1, n2) = (part(a)?, part(b)?);
    if n1.is_empty() || n2.is_empty() {
        return Err(Error::InputError(format!("index '{s}' has an empty side")));
    }
    Ok(MultiIndex2::new(n1, n2))
}

pub fn parse_probe(s: &str) -> Result<C64> {
    let bad = || Error::InputError(format!("probe '{s}' needs the form 're,im'"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok(C64::new(
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

fn probes_or(list: &[String], default: Vec<C64>) -> Result<Vec<C64>> {
    if list.is_empty() {
        Ok(default)
    } else {
        list.iter().map(|p| parse_probe(p)).collect()
    }
}

/// Probes used for rate experiments when none are given.
pub fn rate_probes() -> Vec<C64> {
    vec![
        C64::new(-2.0, 0.0),
        C64::new(0.0, 1.5),
        C64::new(4.0, 0.0),
        C64::new(1.5, 1.0),
    ]
}

pub fn run(cli: &Cli) -> Result<()> {
    let c = &cli.common;
    let desc = descriptor_of(c)?;
    let mix = desc.build().map_err(input)?;
    std::fs::create_dir_all(&c.out)?;
    let out = |name: &str| c.out.join(name);
    match &cli.command {
        Command::SystemBuild => {
            let text = desc.to_toml()?;
            std::fs::write(out("system.toml"), &text)?;
            let again = SystemDescriptor::from_toml(&text)?.build()?;
            let masses = |m: &MixedSystem| -> Vec<f64> {
                m.s1.generators()
                    .iter()
                    .chain(m.s2.generators())
                    .map(|g| g.mass())
                    .collect()
            };
            let drift = masses(&mix)
                .iter()
                .zip(masses(&again))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let gens = |s: &crate::nikishin::NikishinSystem| -> Vec<serde_json::Value> {
                s.generators()
                    .iter()
                    .map(|g| serde_json::json!({ "label": g.label(), "hull": [g.hull().a, g.hull().b], "mass": g.mass() }))
                    .collect()
            };
            write_json(
                &out("system.json"),
                serde_json::json!({ "m1": mix.m1(), "m2": mix.m2(), "s1": gens(&mix.s1), "s2": gens(&mix.s2) }),
            )?;
            if drift > c.tol.unwrap_or(1e-12) {
                return Err(assertion(
                    "descriptor round trip",
                    format!("masses drift by {drift:e}"),
                ));
            }
            Ok(())
        }
        Command::HpSolve { index } => {
            let n = parse_index(index)?;
            n.validate(&mix).map_err(input)?;
            let form =
                solve_mixed(&mix, &n).map_err(|e| assertion("perfectness", format!("{n}: {e}")))?;
            let mut rows = vec![];
            for (k, p) in form.coeffs.iter().enumerate() {
                for (d, v) in p.to_monomial().iter().enumerate() {
                    rows.push(vec![k.to_string(), d.to_string(), fmt_num(*v)]);
                }
            }
            write_csv(
                &out("hp_solve.csv"),
                &["component", "power", "coefficient"],
                rows,
            )?;
            let zeros = form.zeros_in_hull();
            let (_, scale) = form.orthogonality_residuals()?;
            write_json(
                &out("hp_solve.json"),
                serde_json::json!({
                    "index": n.to_string(),
                    "report": form.report,
                    "residual_scale": scale,
                    "zeros": zeros.as_ref().ok(),
                    "variable": "x",
                }),
            )?;
            if !form.report.normal {
                return Err(assertion("perfectness", format!("{n} is not normal")));
            }
            match zeros {
                Ok(z) if z.len() == n.total2() => Ok(()),
                Ok(z) => Err(assertion(
                    "zero count",
                    format!("{n}: {} zeros, expected {}", z.len(), n.total2()),
                )),
                Err(e) => Err(assertion("zero count", format!("{n}: {e}"))),
            }
        }
        Command::HpScan { max_total } => {
            let tol = c.tol.unwrap_or(1e-6);
            let scan = normality_scan(&mix, *max_total);
            let mut bad = vec![];
            let mut rows = vec![];
            for r in &scan {
                match &r.result {
                    Ok(rep) => {
                        let ok = rep.normal && rep.singular_gap >= tol;
                        if !ok {
                            bad.push(r.index.to_string());
                        }
                        let deg = rep
                            .achieved_degrees
                            .iter()
                            .map(|d| d.to_string())
                            .collect::<Vec<_>>()
                            .join(" ");
                        rows.push(vec![
                            r.index.to_string(),
                            ok.to_string(),
                            rep.nullity.to_string(),
                            fmt_num(rep.singular_gap),
                            fmt_num(rep.residual),
                            deg,
                        ]);
                    }
                    Err(e) => {
                        bad.push(r.index.to_string());
                        rows.push(vec![
                            r.index.to_string(),
                            "false".into(),
                            String::new(),
                            String::new(),
                            String::new(),
                            e.to_string(),
                        ]);
                    }
                }
            }
            write_csv(
                &out("hp_scan.csv"),
                &[
                    "index",
                    "normal",
                    "nullity",
                    "singular_gap",
                    "residual",
                    "degrees",
                ],
                rows,
            )?;
            if bad.is_empty() {
                Ok(())
            } else {
                Err(assertion(
                    "perfectness",
                    format!("non-normal indices: {}", bad.join(", ")),
                ))
            }
        }
        Command::QuadTable { index } => {
            let sys = &mix.s2;
            let m = sys.m();
            let indices: Vec<Vec<usize>> = if index.is_empty() {
                (0..=4)
                    .map(|n| (0..=m).map(|k| if k == 0 { n } else { n + 1 }).collect())
                    .collect()
            } else {
                index
                    .iter()
                    .map(|s| {
                        s.split_whitespace()
                            .map(|t| {
                                t.parse::<usize>().map_err(|_| {
                                    Error::InputError(format!("bad index entry '{t}'"))
                                })
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<_>>()?
            };
            let mut rows = vec![];
            let mut bad = vec![];
            for n in &indices {
                if n.len() != m + 1 {
                    return Err(Error::InputError(format!(
                        "index {n:?} needs {} components",
                        m + 1
                    )));
                }
                let rule = build_rule(sys, n)
                    .map_err(|e| assertion("perfectness", format!("{n:?}: {e}")))?;
                let label = n
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(" ");
                let signed_shape = n[1..].iter().all(|&v| v == n[0] + 1);
                for (k, w) in rule.weights.iter().enumerate() {
                    let sign = sys.s(0, k)?.mass().signum();
                    for (x, wi) in rule.nodes.iter().zip(w) {
                        if signed_shape && wi.signum() != sign {
                            bad.push(format!("{label} k={k}"));
                        }
                        rows.push(vec![
                            label.clone(),
                            k.to_string(),
                            fmt_num(*x),
                            fmt_num(*wi),
                        ]);
                    }
                }
            }
            write_csv(&out("quad_table.csv"), &["n", "k", "node", "weight"], rows)?;
            if bad.is_empty() {
                Ok(())
            } else {
                bad.dedup();
                Err(assertion("weight signs", bad.join(", ")))
            }
        }
        Command::MarkovRate { max_total, probe } => {
            let slack = c.tol.unwrap_or(0.05);
            let probes = probes_or(probe, rate_probes())?;
            let sys = &mix.s2;
            let rep = markov_rate(sys, &diagonal_sequence(sys.m() + 1, *max_total), &probes)?;
            let mut rows = vec![];
            let mut plot = String::new();
            let mut bad = vec![];
            for r in &rep.rows {
                rows.push(vec![
                    r.total.to_string(),
                    fmt_num(r.e_n),
                    fmt_num(r.root),
                    fmt_num(rep.delta_k),
                ]);
                plot.push_str(&format!("{} {}\n", r.total, fmt_num(r.root)));
                for (p, root) in r.probe_roots.iter().enumerate() {
                    if *root > rep.delta_k + slack {
                        bad.push(format!(
                            "|n|={} probe {p}: {root:.4} > {:.4} + {slack}",
                            r.total, rep.delta_k
                        ));
                    }
                }
            }
            write_csv(
                &out("markov_rate.csv"),
                &["total", "e_n", "root", "delta_k"],
                rows,
            )?;
            std::fs::write(out("markov_rate.dat"), plot)?;
            if bad.is_empty() {
                Ok(())
            } else {
                Err(assertion("markov rate", bad.join("; ")))
            }
        }
        Command::ReduceVerify { id } => {
            let probes = standard_probes();
            let wanted: Option<IdentityId> = if id.eq_ignore_ascii_case("all") {
                None
            } else {
                Some(IdentityId::parse(id)?)
            };
            let table = identity_table(&probes)?;
            let mut rows = vec![];
            let mut bad = vec![];
            for r in table
                .iter()
                .filter(|r| wanted.map_or(true, |w| w.name() == r.id))
            {
                let tol = c.tol.unwrap_or_else(|| {
                    IdentityId::parse(&r.id)
                        .map(|i| i.tolerance())
                        .unwrap_or(1e-8)
                });
                if !(r.residual <= tol) {
                    bad.push(format!(
                        "{} at {}{:+}i: {:e}",
                        r.id, r.probe_re, r.probe_im, r.residual
                    ));
                }
                rows.push(vec![
                    r.id.clone(),
                    r.bindings_hash.clone(),
                    format!("{}{:+}i", r.probe_re, r.probe_im),
                    fmt_num(r.residual),
                ]);
            }
            write_csv(
                &out("reduce_verify.csv"),
                &["id", "bindings_hash", "probe", "residual"],
                rows,
            )?;
            if bad.is_empty() {
                Ok(())
            } else {
                Err(assertion("cauchy transform identities", bad.join("; ")))
            }
        }
        Command::EquilibriumSolve { step, grid } => {
            let step = match step {
                Some(s) => parse_index(s)?,
                None => lcm_step(mix.m1(), mix.m2()),
            };
            if step.n1.len() != mix.m1() + 1 || step.n2.len() != mix.m2() + 1 {
                return Err(Error::InputError(
                    "step shape does not match the system".into(),
                ));
            }
            let (p1, p2) = proportions(&step)?;
            let cm = build_interaction(&p1, &p2)?;
            let seed = (c.seed != 0).then_some(c.seed);
            let sol = solve_vector_equilibrium(
                &cm,
                &supports(&mix),
                &EquilibriumOptions {
                    grid: *grid,
                    seed,
                    ..Default::default()
                },
            )?;
            for (j, mu) in cm.components().zip(&sol.measures) {
                let rows = mu
                    .grid
                    .iter()
                    .zip(&mu.masses)
                    .enumerate()
                    .map(|(i, (x, m))| vec![i.to_string(), fmt_num(*x), fmt_num(*m)])
                    .collect();
                write_csv(
                    &out(&format!("equilibrium_mu{j}.csv")),
                    &["cell", "midpoint", "mass"],
                    rows,
                )?;
            }
            write_json(
                &out("equilibrium.json"),
                serde_json::json!({
                    "components": cm.components().collect::<Vec<_>>(),
                    "P": cm.p,
                    "w": sol.constants,
                    "J": sol.energy,
                    "residual": sol.residual,
                    "grid": grid,
                    "iterations": sol.iterations,
                }),
            )?;
            let tol = c.tol.unwrap_or(5e-3 * 512.0 / *grid as f64);
            if sol.residual > tol {
                return Err(assertion(
                    "equilibrium conditions",
                    format!("residual {:e} > {tol:e}", sol.residual),
                ));
            }
            Ok(())
        }
        Command::Asymptotics {
            base,
            step,
            k_from,
            k_to,
            probe,
            grid,
            orthonormal,
        } => {
            let base = parse_index(base)?;
            let step = match step {
                Some(s) => parse_index(s)?,
                None => lcm_step(mix.m1(), mix.m2()),
            };
            let ray = IndexRay::new(base, step)?;
            ray.at(0).validate(&mix).map_err(input)?;
            if k_to < k_from {
                return Err(Error::InputError("empty k range".into()));
            }
            let ks: Vec<usize> = (*k_from..=*k_to).collect();
            let probes = probes_or(probe, standard_probes())?;
            let sol = crate::equilibrium::ray_equilibrium(
                &mix,
                &ray,
                &EquilibriumOptions {
                    grid: *grid,
                    ..Default::default()
                },
            )?;
            let table = nth_root_compare(&mix, &ray, &ks, &probes, &sol)?;
            let ratios = ratio_experiment(&mix, &ray, &ks, &probes, *orthonormal)?;
            let mut bad = vec![];
            for (p, z) in probes.iter().enumerate() {
                let mut rows = vec![];
                for r in &table.rows {
                    let ratio = ratios.rows.iter().position(|x| x.k == r.k);
                    let (re, im) = ratio.map_or((String::new(), String::new()), |i| {
                        (
                            fmt_num(ratios.rows[i].ratio[p][0]),
                            fmt_num(ratios.rows[i].ratio[p][1]),
                        )
                    });
                    let diff = ratio
                        .and_then(|i| i.checked_sub(1).and_then(|j| ratios.diffs[p].get(j)))
                        .map_or(String::new(), |d| fmt_num(*d));
                    rows.push(vec![
                        r.k.to_string(),
                        r.index.to_string(),
                        fmt_num(r.root[p]),
                        fmt_num(table.g[p]),
                        fmt_num(r.gap[p]),
                        re,
                        im,
                        diff,
                    ]);
                }
                write_csv(
                    &out(&format!("asymptotics_probe{p}.csv")),
                    &[
                        "k",
                        "index",
                        "root",
                        "g",
                        "gap",
                        "ratio_re",
                        "ratio_im",
                        "ratio_diff",
                    ],
                    rows,
                )?;
                if !table.decreasing(p) {
                    bad.push(format!("n-th root gap not decreasing at {z}"));
                }
                if !ratios.decreasing(p) {
                    bad.push(format!("ratio differences not decreasing at {z}"));
                }
            }
            if let Some(t) = table.truncated.as_ref().or(ratios.truncated.as_ref()) {
                eprintln!("ray truncated: {t}");
            }
            if bad.is_empty() {
                Ok(())
            } else {
                Err(assertion("root and ratio asymptotics", bad.join("; ")))
            }
        }
    }
}
