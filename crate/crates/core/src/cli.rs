//! Command-line front end.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::certify::{
    self, certificate_audit, min_feasible_k_in, vanishing_evidence, witness_audit, DivergenceProblem, Outcome,
    SearchOptions, SupplyKind,
};
use crate::chains::{format_rational, parse_dump, parse_rational, to_f64, write_dump, Chain, GrowthFunction, Rational};
use crate::constructions::{coset_chain, divergence, round_and_extract_tails, spread_tail_sum};
use crate::profiles::{self, coarea_validate, isodiametric_profile, ProfileMode};
use crate::spaces::{BallIndex, PointCode, Space};
use crate::spectral::{dirichlet_gap, VertexWeight};

#[derive(Parser, Debug)]
#[command(name = "coarsebound", version, about = "Controlled coarse homology certificates on ball truncations")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Fixed-point factor for flow capacities when exact scaling overflows.
    #[arg(long, global = true, default_value_t = certify::DEFAULT_SCALE)]
    pub scale: u64,
    /// Worker threads for sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Tsv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Balls of a space.
    #[command(subcommand)]
    Space(SpaceCmd),
    /// Explicit chains bounding the fundamental class.
    #[command(subcommand)]
    Tails(TailsCmd),
    /// Max-flow certificates and cut witnesses.
    #[command(subcommand)]
    Cert(CertCmd),
    /// Isoperimetric and isodiametric profiles.
    #[command(subcommand)]
    Profile(ProfileCmd),
    /// Dirichlet spectral gaps.
    #[command(subcommand)]
    Spec(SpecCmd),
    /// Operations on chain dumps.
    #[command(subcommand)]
    Chain(ChainCmd),
}

#[derive(Subcommand, Debug)]
pub enum SpaceCmd {
    /// Size, sphere counts and interior of `B_R`.
    Ball {
        #[arg(long)]
        space: String,
        #[arg(long)]
        radius: u32,
        /// List every point with its length.
        #[arg(long)]
        points: bool,
    },
}

#[derive(Subcommand, Debug)]
pub enum TailsCmd {
    /// Sum of spread tails over `B_R`.
    Spread {
        #[arg(long)]
        space: String,
        #[arg(long)]
        radius: u32,
        /// Exit 2 unless the core, propagation and linear bound checks pass.
        #[arg(long)]
        check: bool,
        /// Write the chain dump here.
        #[arg(long)]
        chain_out: Option<PathBuf>,
    },
    /// Line chains along the cosets of the axis generator.
    Coset {
        #[arg(long)]
        space: String,
        #[arg(long)]
        radius: u32,
        #[arg(long)]
        check: bool,
        #[arg(long)]
        chain_out: Option<PathBuf>,
    },
    /// Round a chain with `∂ψ ≥ C` to an integer chain and peel off tails.
    Round {
        /// Chain dump of `ψ`.
        #[arg(long)]
        chain: PathBuf,
        /// The lower bound `C`.
        #[arg(long)]
        lower: String,
        #[arg(long)]
        chain_out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum CertCmd {
    /// `K_R` for `R = 1..=rmax` with capacities `K·f` and a trend verdict.
    Vanish {
        #[arg(long)]
        space: String,
        #[arg(long, default_value = "const")]
        f: String,
        #[arg(long)]
        rmax: u32,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
    },
    /// Signed supplies from a 0-chain, unit capacities scaled by `K`.
    Bww {
        #[arg(long)]
        space: String,
        #[arg(long)]
        chain: PathBuf,
        #[arg(long)]
        k: String,
        #[arg(long)]
        radius: u32,
        #[arg(long)]
        chain_out: Option<PathBuf>,
    },
    /// One solve at a given `K`, or the minimal `K` without `--k`.
    Solve {
        #[arg(long)]
        space: String,
        #[arg(long)]
        radius: u32,
        #[arg(long)]
        k: Option<String>,
        /// Capacity growth `g`.
        #[arg(long, default_value = "const")]
        g: String,
        /// `ones` or `reciprocal:<f>`.
        #[arg(long, default_value = "ones")]
        supply: String,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        #[arg(long)]
        chain_out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum ProfileCmd {
    /// `D(r)` by exhaustive scan or candidate families.
    Isodiametric {
        #[arg(long)]
        space: String,
        /// Largest radius; every `1..=r` is reported.
        #[arg(long)]
        r: u32,
        #[arg(long)]
        exact: bool,
    },
    /// `#A / Σ_{∂A} f(|x|)` for a set read from a file, one point per line.
    Ratio {
        #[arg(long)]
        space: String,
        #[arg(long)]
        set: PathBuf,
        #[arg(long, default_value = "const")]
        f: String,
    },
    /// Exact co-area checks on random level functions.
    Coarea {
        #[arg(long)]
        space: String,
        #[arg(long, default_value = "const")]
        f: String,
        #[arg(long)]
        radius: u32,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexWeightArg {
    Unit,
    Reciprocal,
}

#[derive(Subcommand, Debug)]
pub enum SpecCmd {
    /// Smallest Dirichlet eigenvalue on `B_R`.
    Gap {
        #[arg(long)]
        space: String,
        #[arg(long)]
        radius: u32,
        #[arg(long, default_value = "const")]
        f: String,
        /// `unit`: edge weight `f`, vertex weight 1. `reciprocal`: edge
        /// weight 1, vertex weight `1/f`.
        #[arg(long, value_enum, default_value_t = VertexWeightArg::Unit)]
        vertex_weight: VertexWeightArg,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum PushMap {
    /// `n ↦ g₀ⁿ` from `zd:1` into the axis of the target.
    Axis,
    /// `zd:d → zd:d'` by appending zero coordinates.
    Pad,
    /// Every point to the basepoint of the target.
    Collapse,
}

#[derive(Subcommand, Debug)]
pub enum ChainCmd {
    /// Boundary of a chain dump, as a dump.
    Boundary {
        #[arg(long)]
        chain: PathBuf,
    },
    /// Growth constant and propagation.
    Growth {
        #[arg(long)]
        chain: PathBuf,
        #[arg(long, default_value = "const")]
        f: String,
    },
    /// Pushforward along a point map.
    Push {
        #[arg(long)]
        chain: PathBuf,
        #[arg(long, value_enum)]
        map: PushMap,
        #[arg(long)]
        target: String,
    },
}

/// Failure with the exit status it maps to.
#[derive(Debug)]
pub enum CliError {
    /// Malformed invocation: exit 1.
    Usage(String),
    /// A module contract was violated or a check failed: exit 2.
    Contract { contract: &'static str, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Contract { .. } => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Contract { contract, message } => write!(f, "{contract}: {message}"),
        }
    }
}

fn contract<E: std::fmt::Display>(name: &'static str) -> impl Fn(E) -> CliError {
    move |e| CliError::Contract { contract: name, message: e.to_string() }
}

type CliResult<T> = Result<T, CliError>;

/// What a command produced.
enum Output {
    Json(Value),
    /// JSON form plus a TSV table.
    Table { json: Value, header: Vec<&'static str>, rows: Vec<Vec<String>> },
    Text(String),
}

impl Output {
    fn render(&self, format: Format) -> String {
        match (self, format) {
            (Output::Text(t), _) => t.clone(),
            (Output::Json(v) | Output::Table { json: v, .. }, Format::Json) => {
                let mut s = serde_json::to_string_pretty(v).expect("serializable");
                s.push('\n');
                s
            }
            (Output::Table { header, rows, .. }, Format::Tsv) => {
                let mut s = header.join("\t");
                s.push('\n');
                for r in rows {
                    s.push_str(&r.join("\t"));
                    s.push('\n');
                }
                s
            }
            (Output::Json(v), Format::Tsv) => {
                let mut s = String::from("key\tvalue\n");
                if let Value::Object(m) = v {
                    for (k, x) in m {
                        let cell = match x {
                            Value::String(t) => t.clone(),
                            other => other.to_string(),
                        };
                        writeln!(s, "{k}\t{cell}").unwrap();
                    }
                }
                s
            }
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn parse_space(s: &str) -> CliResult<Space> {
    Space::parse(s).map_err(contract("space spec"))
}

fn parse_growth(s: &str) -> CliResult<GrowthFunction> {
    GrowthFunction::parse(s).map_err(contract("growth function"))
}

fn parse_k(s: &str) -> CliResult<Rational> {
    match parse_rational(s) {
        Some(k) if k >= Rational::from_integer(0.into()) => Ok(k),
        _ => Err(CliError::Usage(format!("K must be a non-negative rational, got `{s}`"))),
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

fn build_ball(space: &Space, r: u32) -> CliResult<BallIndex> {
    space.ball(r).map_err(contract("ball"))
}

fn save_chain(path: &Option<PathBuf>, space: &Space, radius: u32, chain: &Chain) -> CliResult<()> {
    if let Some(p) = path {
        let dump = write_dump(space, radius, chain).map_err(contract("chain dump"))?;
        write_text(p, &dump)?;
    }
    Ok(())
}

fn fail_check(name: &'static str, ok: bool, detail: impl FnOnce() -> String) -> CliResult<()> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Contract { contract: name, message: detail() })
    }
}

fn load_chain(path: &Path) -> CliResult<crate::chains::ChainDump> {
    parse_dump(&read_text(path)?).map_err(contract("chain dump"))
}

fn space_cmd(cmd: &SpaceCmd) -> CliResult<Output> {
    let SpaceCmd::Ball { space, radius, points } = cmd;
    let s = parse_space(space)?;
    let ball = build_ball(&s, *radius)?;
    let sizes = ball.sphere_sizes();
    let mut json = json!({
        "space": s.descriptor(),
        "radius": radius,
        "size": ball.len(),
        "interior": ball.interior_count(),
        "max_degree": ball.max_degree(),
        "sphere_sizes": sizes,
        "capabilities": to_json(&s.capabilities()),
    });
    let (header, rows) = if *points {
        let pts: Vec<Value> = (0..ball.len())
            .map(|i| json!({"point": s.display(ball.point(i)), "length": ball.length(i), "interior": ball.is_interior(i)}))
            .collect();
        json["points"] = Value::Array(pts);
        let rows = (0..ball.len())
            .map(|i| vec![s.display(ball.point(i)), ball.length(i).to_string(), ball.is_interior(i).to_string()])
            .collect();
        (vec!["point", "length", "interior"], rows)
    } else {
        let rows = sizes.iter().enumerate().map(|(r, n)| vec![r.to_string(), n.to_string()]).collect();
        (vec!["r", "sphere_size"], rows)
    };
    Ok(Output::Table { json, header, rows })
}

fn tails_cmd(cmd: &TailsCmd) -> CliResult<Output> {
    match cmd {
        TailsCmd::Spread { space, radius, check, chain_out } => {
            let s = parse_space(space)?;
            let ball = build_ball(&s, *radius)?;
            let rep = spread_tail_sum(&s, &ball).map_err(contract("spread tails"))?;
            save_chain(chain_out, &s, *radius, &rep.chain)?;
            if *check {
                fail_check("spread tails", rep.boundary_defects == 0, || {
                    format!("{} core points with boundary different from 1", rep.boundary_defects)
                })?;
                fail_check("spread tails", rep.propagation <= 1, || format!("propagation {}", rep.propagation))?;
                fail_check("spread tails", rep.linear_bound_holds, || "a coefficient exceeds 2|e| + 2".into())?;
            }
            Ok(Output::Json(to_json(&rep.summary(&s))))
        }
        TailsCmd::Coset { space, radius, check, chain_out } => {
            let s = parse_space(space)?;
            let ball = build_ball(&s, *radius)?;
            let cc = coset_chain(&s, *radius).map_err(contract("coset chain"))?;
            save_chain(chain_out, &s, *radius, &cc.chain)?;
            let div = divergence(&cc.chain, &ball).map_err(contract("coset chain"))?;
            let one = Rational::from_integer(1.into());
            let defects = cc
                .core
                .iter()
                .filter(|p| ball.index_of(p).map(|i| div[i] != one).unwrap_or(true))
                .count();
            let growth = cc.chain.growth_constant(&GrowthFunction::linear(), &ball).map_err(contract("chain"))?;
            if *check {
                fail_check("coset chain", defects == 0, || format!("{defects} core points with boundary different from 1"))?;
            }
            Ok(Output::Json(json!({
                "space": s.descriptor(),
                "radius": radius,
                "lines": cc.lines,
                "core_size": cc.core.len(),
                "boundary_defects": defects,
                "edges": cc.chain.len(),
                "growth_linear": format_rational(&growth),
                "growth_linear_f64": to_f64(&growth),
            })))
        }
        TailsCmd::Round { chain, lower, chain_out } => {
            let dump = load_chain(chain)?;
            let c = parse_k(lower)?;
            let ball = build_ball(&dump.space, dump.radius)?;
            let rt = round_and_extract_tails(&dump.chain, &c, &ball, &dump.space).map_err(contract("rounding"))?;
            save_chain(chain_out, &dump.space, dump.radius, &rt.rounded)?;
            Ok(Output::Json(json!({
                "space": dump.space.descriptor(),
                "radius": dump.radius,
                "kappa": format_rational(&rt.kappa),
                "neighborhood_bound": rt.neighborhood_bound,
                "min_boundary": rt.min_boundary,
                "tails": rt.tails.len(),
                "longest_tail": rt.tails.iter().map(|t| t.path.len().saturating_sub(1)).max().unwrap_or(0),
                "remainder_edges": rt.remainder.len(),
                "rounded_edges": rt.rounded.len(),
            })))
        }
    }
}

fn parse_supply(s: &str) -> CliResult<SupplyKind> {
    if s == "ones" {
        return Ok(SupplyKind::Ones);
    }
    match s.strip_prefix("reciprocal:") {
        Some(f) => Ok(SupplyKind::Reciprocal(parse_growth(f)?)),
        None => Err(CliError::Usage(format!("supply must be `ones` or `reciprocal:<f>`, got `{s}`"))),
    }
}

fn check_tol(tol: f64) -> CliResult<()> {
    if (1e-4..1.0).contains(&tol) {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--tol must lie in [1e-4, 1), got {tol}")))
    }
}

fn outcome_json(out: &Outcome, problem: &DivergenceProblem, space: &Space) -> CliResult<Value> {
    let mut v = to_json(&out.summary(space, problem.ball));
    match out {
        Outcome::Feasible(c) => {
            let ok = certificate_audit(c, problem).map_err(contract("flow certificate"))?;
            fail_check("flow certificate", ok, || "reconstructed chain fails the boundary or capacity check".into())?;
            v["audit"] = json!({"passed": ok});
        }
        Outcome::Infeasible(w) => {
            let audit = witness_audit(w, problem).map_err(contract("cut witness"))?;
            fail_check("cut witness", audit.passed, || "witness does not re-verify".into())?;
            v["audit"] = to_json(&audit);
        }
    }
    Ok(v)
}

fn cert_cmd(cmd: &CertCmd, g: &GlobalOpts) -> CliResult<Output> {
    match cmd {
        CertCmd::Vanish { space, f, rmax, tol } => {
            check_tol(*tol)?;
            let s = parse_space(space)?;
            let f = parse_growth(f)?;
            f.validate(*rmax).map_err(contract("growth function"))?;
            let opts = SearchOptions { rel_tol: *tol, scale: g.scale, jobs: g.jobs };
            let ev = vanishing_evidence(&s, &f, *rmax, &opts).map_err(contract("vanishing evidence"))?;
            let rows = ev
                .rows
                .iter()
                .map(|r| vec![r.r.to_string(), format!("{:.6}", r.k_f64), r.k.clone(), r.exact.to_string()])
                .collect();
            Ok(Output::Table { json: to_json(&ev), header: vec!["R", "K_R", "K_R_exact", "exact"], rows })
        }
        CertCmd::Bww { space, chain, k, radius, chain_out } => {
            let s = parse_space(space)?;
            let k = parse_k(k)?;
            let ball = build_ball(&s, *radius)?;
            let dump = load_chain(chain)?;
            if dump.space.descriptor() != s.descriptor() {
                return Err(CliError::Usage(format!(
                    "chain lives on {} but --space is {}",
                    dump.space.descriptor(),
                    s.descriptor()
                )));
            }
            let p = DivergenceProblem::from_chain(&ball, &dump.chain, k, GrowthFunction::constant())
                .map_err(contract("supply chain"))?
                .with_scale(g.scale);
            let out = certify::solve(&p).map_err(contract("flow solve"))?;
            if let Outcome::Feasible(c) = &out {
                save_chain(chain_out, &s, *radius, &c.chain)?;
            }
            Ok(Output::Json(outcome_json(&out, &p, &s)?))
        }
        CertCmd::Solve { space, radius, k, g: cap, supply, tol, chain_out } => {
            let s = parse_space(space)?;
            let cap = parse_growth(cap)?;
            cap.validate(*radius).map_err(contract("growth function"))?;
            let kind = parse_supply(supply)?;
            let ball = build_ball(&s, *radius)?;
            let zero = Rational::from_integer(0.into());
            let base = match &kind {
                SupplyKind::Ones => DivergenceProblem::fundamental(&ball, zero, cap.clone()),
                SupplyKind::Reciprocal(f) => {
                    f.validate(*radius).map_err(contract("growth function"))?;
                    DivergenceProblem::reciprocal(&ball, f, zero, cap.clone())
                }
            }
            .with_scale(g.scale);
            match k {
                Some(k) => {
                    let p = base.with_k(parse_k(k)?);
                    let out = certify::solve(&p).map_err(contract("flow solve"))?;
                    if let Outcome::Feasible(c) = &out {
                        save_chain(chain_out, &s, *radius, &c.chain)?;
                    }
                    Ok(Output::Json(outcome_json(&out, &p, &s)?))
                }
                None => {
                    check_tol(*tol)?;
                    let ks = min_feasible_k_in(&ball, &kind, &cap, *tol, g.scale).map_err(contract("K search"))?;
                    save_chain(chain_out, &s, *radius, &ks.certificate.chain)?;
                    let mut v = json!({
                        "R": radius,
                        "K_R": format_rational(ks.value()),
                        "K_R_f64": to_f64(ks.value()),
                        "lower": format_rational(&ks.lower),
                        "upper": format_rational(&ks.upper),
                        "exact": ks.exact.is_some(),
                        "solves": ks.solves,
                        "feasible": true,
                    });
                    if let Some(w) = &ks.witness {
                        let out = Outcome::Infeasible(w.clone());
                        v["witness"] = outcome_json(&out, &base.with_k(w.k.clone()), &s)?["witness"].clone();
                    }
                    Ok(Output::Json(v))
                }
            }
        }
    }
}

fn read_points(space: &Space, path: &Path) -> CliResult<Vec<PointCode>> {
    read_text(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| space.parse_point(l).map_err(contract("point set")))
        .collect()
}

fn profile_cmd(cmd: &ProfileCmd, g: &GlobalOpts) -> CliResult<Output> {
    match cmd {
        ProfileCmd::Isodiametric { space, r, exact } => {
            let s = parse_space(space)?;
            let mode = if *exact { ProfileMode::Exact } else { ProfileMode::Candidates };
            let pts = (1..=*r)
                .map(|k| isodiametric_profile(&s, k, mode).map(|p| p.summary(&s)))
                .collect::<Result<Vec<_>, _>>()
                .map_err(contract("isodiametric profile"))?;
            let rows = pts
                .iter()
                .map(|p| vec![p.r.to_string(), p.value.clone(), format!("{:.6}", p.value_f64), p.exact.to_string(), p.family.clone()])
                .collect();
            Ok(Output::Table {
                json: json!({"space": s.descriptor(), "profile": to_json(&pts)}),
                header: vec!["r", "D", "D_f64", "exact", "family"],
                rows,
            })
        }
        ProfileCmd::Ratio { space, set, f } => {
            let s = parse_space(space)?;
            let f = parse_growth(f)?;
            let pts = read_points(&s, set)?;
            let far = pts
                .iter()
                .map(|p| s.word_length(p, crate::spaces::ball_cap()))
                .collect::<Result<Vec<_>, _>>()
                .map_err(contract("point set"))?
                .into_iter()
                .max()
                .unwrap_or(0);
            let ball = build_ball(&s, far + 2)?;
            let idx = profiles::resolve_points(&ball, &s, &pts).map_err(contract("point set"))?;
            let ratio = profiles::iso_ratio(&ball, &idx, &f).map_err(contract("isoperimetric ratio"))?;
            let vb = profiles::vertex_boundary(&ball, &idx).map_err(contract("isoperimetric ratio"))?;
            let eb = profiles::edge_boundary(&ball, &idx).map_err(contract("isoperimetric ratio"))?;
            Ok(Output::Json(json!({
                "space": s.descriptor(),
                "f": f.to_string(),
                "set_size": idx.len(),
                "vertex_boundary": vb.len(),
                "edge_boundary": eb.len(),
                "ratio": format_rational(&ratio),
                "ratio_f64": to_f64(&ratio),
            })))
        }
        ProfileCmd::Coarea { space, f, radius, trials } => {
            let s = parse_space(space)?;
            let f = parse_growth(f)?;
            let rep = coarea_validate(&s, &f, *radius, *trials, g.seed).map_err(contract("co-area"))?;
            fail_check("co-area", rep.violations == 0, || format!("{} violated trials", rep.violations))?;
            Ok(Output::Json(to_json(&rep)))
        }
    }
}

fn spec_cmd(cmd: &SpecCmd, g: &GlobalOpts) -> CliResult<Output> {
    let SpecCmd::Gap { space, radius, f, vertex_weight } = cmd;
    let s = parse_space(space)?;
    let f = parse_growth(f)?;
    let (w, rho) = match vertex_weight {
        VertexWeightArg::Unit => (f.clone(), VertexWeight::Unit),
        VertexWeightArg::Reciprocal => (GrowthFunction::constant(), VertexWeight::Reciprocal(f.clone())),
    };
    let gap = dirichlet_gap(&s, *radius, &w, &rho, g.seed).map_err(contract("spectral gap"))?;
    let mut v = to_json(&gap);
    v["space"] = json!(s.descriptor());
    v["f"] = json!(f.to_string());
    Ok(Output::Json(v))
}

fn chain_cmd(cmd: &ChainCmd) -> CliResult<Output> {
    match cmd {
        ChainCmd::Boundary { chain } => {
            let dump = load_chain(chain)?;
            let ball = build_ball(&dump.space, dump.radius)?;
            let b = dump.chain.boundary(&ball).map_err(contract("boundary"))?;
            Ok(Output::Text(write_dump(&dump.space, dump.radius, &b).map_err(contract("chain dump"))?))
        }
        ChainCmd::Growth { chain, f } => {
            let dump = load_chain(chain)?;
            let f = parse_growth(f)?;
            let ball = build_ball(&dump.space, dump.radius)?;
            let k = dump.chain.growth_constant(&f, &ball).map_err(contract("growth constant"))?;
            let prop = if dump.chain.dim() == 0 { 0 } else { dump.chain.propagation(&ball).map_err(contract("propagation"))? };
            Ok(Output::Json(json!({
                "space": dump.space.descriptor(),
                "dim": dump.chain.dim(),
                "simplices": dump.chain.len(),
                "f": f.to_string(),
                "growth_constant": format_rational(&k),
                "growth_constant_f64": to_f64(&k),
                "propagation": prop,
                "max_abs": format_rational(&dump.chain.max_abs()),
            })))
        }
        ChainCmd::Push { chain, map, target } => {
            let dump = load_chain(chain)?;
            let t = parse_space(target)?;
            let ball = build_ball(&t, dump.radius)?;
            let src = &dump.space;
            let pushed = match map {
                PushMap::Collapse => {
                    let e = t.basepoint();
                    dump.chain.pushforward(|_| Some(e.clone()), &ball)
                }
                PushMap::Axis => {
                    if src.descriptor() != "zd:1" {
                        return Err(CliError::Usage("--map axis needs a chain on zd:1".into()));
                    }
                    let e = t.basepoint();
                    dump.chain.pushforward(
                        |p| {
                            let n: i64 = src.format_point(p).ok()?.parse().ok()?;
                            t.axis_shift(&e, n).ok()
                        },
                        &ball,
                    )
                }
                PushMap::Pad => {
                    let dims = |d: &str| d.strip_prefix("zd:").and_then(|x| x.parse::<usize>().ok());
                    let (Some(a), Some(b)) = (dims(src.descriptor()), dims(t.descriptor())) else {
                        return Err(CliError::Usage("--map pad maps zd:d into zd:d'".into()));
                    };
                    if b < a {
                        return Err(CliError::Usage(format!("cannot pad zd:{a} into zd:{b}")));
                    }
                    dump.chain.pushforward(
                        |p| {
                            let mut text = src.format_point(p).ok()?;
                            text.push_str(&",0".repeat(b - a));
                            t.parse_point(&text).ok()
                        },
                        &ball,
                    )
                }
            }
            .map_err(contract("pushforward"))?;
            let mut text = write_dump(&t, dump.radius, &pushed.chain).map_err(contract("chain dump"))?;
            if pushed.degenerate > 0 {
                writeln!(text, "#degenerate={}", pushed.degenerate).unwrap();
            }
            Ok(Output::Text(text))
        }
    }
}

/// Runs one parsed command.
pub fn execute(cli: &Cli) -> CliResult<String> {
    let g = &cli.global;
    let out = match &cli.command {
        Command::Space(c) => space_cmd(c)?,
        Command::Tails(c) => tails_cmd(c)?,
        Command::Cert(c) => cert_cmd(c, g)?,
        Command::Profile(c) => profile_cmd(c, g)?,
        Command::Spec(c) => spec_cmd(c, g)?,
        Command::Chain(c) => chain_cmd(c)?,
    };
    Ok(out.render(g.format))
}

/// Parses `args`, runs, writes to `stdout`/`--out` and `stderr`; returns
/// the exit status.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(text) => {
            if let Some(p) = &cli.global.out {
                if let Err(e) = write_text(p, &text) {
                    let _ = writeln!(stderr, "{e}");
                    return e.exit_code();
                }
            } else {
                let _ = stdout.write_all(text.as_bytes());
            }
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
