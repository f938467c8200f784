use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use splitree::bounds::{bounds_report, BoundsInput};
use splitree::dichotomy::{classify_manifold, systole_bound_for, ManifoldDescription, Verdict as MVerdict};
use splitree::freeness::{
    witness_elliptic_hyperbolic, witness_elliptic_pair, witness_hyperbolic_pair, FreenessWitness,
};
use splitree::growth::{
    bcg_lower_bound, entropy_from_counts, free_group_entropy_root, free_group_series, free_semigroup_series,
    radii_grid, semigroup_entropy_root,
};
use splitree::tree::{self, AcylindricityResult};
use splitree::{samples, Error, NormalForm, Side, SplittingSpec, TreeVertex, Verdict};

#[derive(Parser)]
#[command(name = "splitree", version, about = "Bass-Serre tree computations and systolic bounds")]
struct Cli {
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for randomized steps. No current subcommand draws random numbers.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct GroupArgs {
    /// Splitting JSON file, or `sample:NAME` for a bundled sample.
    #[arg(long)]
    group: String,
}

#[derive(Args)]
struct ElementArgs {
    #[command(flatten)]
    group: GroupArgs,
    #[arg(long)]
    element: String,
}

#[derive(Subcommand)]
enum Cmd {
    /// Elliptic or hyperbolic, with translation length.
    Classify(ElementArgs),
    /// Translation length only.
    Tau(ElementArgs),
    /// Fixed vertices within a ball around the base vertex.
    Fix {
        #[command(flatten)]
        el: ElementArgs,
        #[arg(long, default_value_t = 8)]
        radius: u64,
    },
    /// Axis vertices within a ball around the base vertex.
    Axis {
        #[command(flatten)]
        el: ElementArgs,
        #[arg(long, default_value_t = 8)]
        radius: u64,
    },
    /// Search for elements whose fixed set is wider than k.
    AcylCheck {
        #[command(flatten)]
        group: GroupArgs,
        /// Defaults to the declared k of the splitting, else 0.
        #[arg(long)]
        k: Option<u64>,
        /// Maximum word length of the enumerated elements.
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(long, default_value_t = 8)]
        radius: u64,
    },
    /// Explicit rank-2 free subgroup from two elements.
    FreeWitness {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long, num_args = 1, required = true)]
        element: Vec<String>,
        #[arg(long)]
        k: Option<u64>,
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
    /// Growth rate of a weighted free group or free semigroup of rank 2.
    Entropy {
        /// Two positive weights, e.g. `1,2`.
        #[arg(long, value_delimiter = ',', required = true)]
        weights: Vec<f64>,
        #[arg(long)]
        semigroup: bool,
        /// Number of radii sampled for the ball-count estimate.
        #[arg(long, default_value_t = 15)]
        radius: usize,
    },
    /// Systole, volume and Margulis-type lower bounds.
    Bounds {
        #[arg(long)]
        entropy: f64,
        #[arg(long)]
        diam: f64,
        #[arg(long, default_value_t = 4)]
        k: u32,
        #[arg(long, default_value_t = 3)]
        dim: u32,
        /// Systolic constant C_n; its true value is unknown.
        #[arg(long, default_value_t = 1.0)]
        cn: f64,
    },
    /// Geometric or acylindrical verdict for a 3-manifold description.
    Dichotomy {
        /// Manifold JSON file.
        path: Option<PathBuf>,
        #[arg(long, conflicts_with = "path")]
        manifold: Option<PathBuf>,
        /// With --diam, also report the systole bound.
        #[arg(long, requires = "diam")]
        entropy: Option<f64>,
        #[arg(long, requires = "entropy")]
        diam: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        cn: f64,
    },
}

enum Failure {
    Input(anyhow::Error),
    Negative(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<Error>() {
            Some(
                Error::FixedSetsIntersect
                | Error::SameAxis
                | Error::CertificationFailed(_)
                | Error::NotApplicable(_)
                | Error::NotElliptic(_)
                | Error::NotHyperbolic(_),
            ) => Failure::Negative(format!("{e:#}")),
            _ => Failure::Input(e),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::from(anyhow::Error::from(e))
    }
}

struct Output {
    json: Value,
    text: String,
    /// The input was fine but the claim does not hold or the procedure
    /// does not apply.
    negative: bool,
}

impl Output {
    fn ok(json: Value, text: String) -> Self {
        Output {
            json,
            text,
            negative: false,
        }
    }
}

fn load_group(arg: &GroupArgs) -> anyhow::Result<SplittingSpec> {
    if let Some(name) = arg.group.strip_prefix("sample:") {
        return samples::named()
            .into_iter()
            .find(|(n, _)| *n == name)
            .map(|(_, s)| s)
            .ok_or_else(|| anyhow!("unknown sample {name}"));
    }
    let text = std::fs::read_to_string(&arg.group).with_context(|| format!("reading {}", arg.group))?;
    Ok(SplittingSpec::from_json(&text)?)
}

fn element(spec: &SplittingSpec, s: &str) -> anyhow::Result<NormalForm> {
    tree::nf(spec, s).with_context(|| format!("element {s:?}"))
}

fn base() -> TreeVertex {
    TreeVertex::base(Side::A)
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Elliptic => "elliptic",
        Verdict::Hyperbolic => "hyperbolic",
    }
}

fn labels(spec: &SplittingSpec, vs: &[TreeVertex]) -> Vec<String> {
    vs.iter().map(|v| v.label(spec)).collect()
}

fn classify_cmd(a: &ElementArgs, tau_only: bool) -> anyhow::Result<Output> {
    let spec = load_group(&a.group)?;
    let g = element(&spec, &a.element)?;
    let c = tree::classify(&spec, &g, &base());
    let word = spec.word_of(&g).to_string();
    if tau_only {
        return Ok(Output::ok(json!({"element": word, "tau": c.tau}), c.tau.to_string()));
    }
    let v = verdict_str(c.verdict);
    Ok(Output::ok(
        json!({
            "element": word,
            "verdict": v,
            "tau": c.tau,
            "witness_vertex": c.witness_vertex.label(&spec),
        }),
        format!("{word}: {v}, tau={}", c.tau),
    ))
}

fn fix_cmd(a: &ElementArgs, radius: u64) -> anyhow::Result<Output> {
    let spec = load_group(&a.group)?;
    let g = element(&spec, &a.element)?;
    let r = tree::fixed_set(&spec, &g, &base(), radius);
    let diam = tree::fix_diameter_lb(&spec, &g, &base(), radius);
    let members = labels(&spec, &r.members);
    Ok(Output::ok(
        json!({
            "element": spec.word_of(&g).to_string(),
            "radius": radius,
            "members": members,
            "exhaustive_within_radius": r.exhaustive_within_radius,
            "diameter_lower_bound": diam,
        }),
        format!(
            "{} fixed vertices within radius {radius}{}; diameter >= {}\n{}",
            members.len(),
            if r.exhaustive_within_radius { "" } else { " (sliced)" },
            diam.map_or("-".into(), |d| d.to_string()),
            members.join("\n")
        ),
    ))
}

fn axis_cmd(a: &ElementArgs, radius: u64) -> anyhow::Result<Output> {
    let spec = load_group(&a.group)?;
    let g = element(&spec, &a.element)?;
    let r = tree::axis_window(&spec, &g, &base(), radius)?;
    let members = labels(&spec, &r.members);
    Ok(Output::ok(
        json!({"element": spec.word_of(&g).to_string(), "radius": radius, "axis": members}),
        members.join(" -> "),
    ))
}

fn acyl_cmd(group: &GroupArgs, k: Option<u64>, depth: usize, radius: u64) -> anyhow::Result<Output> {
    let spec = load_group(group)?;
    let k = k.or(spec.declared_k()).unwrap_or(0);
    Ok(match tree::check_acylindricity(&spec, k, depth, radius) {
        AcylindricityResult::Falsified { witness, diameter } => {
            let text = format!("falsified: Fix({witness}) has diameter >= {diameter} > {k}");
            Output {
                json: json!({"k": k, "result": "falsified", "witness": witness.to_string(), "diameter": diameter}),
                negative: true,
                text,
            }
        }
        AcylindricityResult::Consistent {
            elements_checked,
            certified,
        } => Output::ok(
            json!({"k": k, "result": "consistent", "elements_checked": elements_checked, "certified": certified}),
            format!(
                "consistent with k={k}: {elements_checked} elements checked{}",
                if certified { ", certified (trivial edge group)" } else { "" }
            ),
        ),
    })
}

fn witness_json(w: &FreenessWitness) -> Value {
    serde_json::to_value(w).expect("witness serialises")
}

fn free_witness_cmd(group: &GroupArgs, els: &[String], k: Option<u64>, depth: usize) -> anyhow::Result<Output> {
    if els.len() != 2 {
        bail!("free-witness needs exactly two --element values");
    }
    let spec = load_group(group)?;
    let k = k.or(spec.declared_k()).unwrap_or(0);
    let g1 = element(&spec, &els[0])?;
    let g2 = element(&spec, &els[1])?;
    let v1 = tree::classify(&spec, &g1, &base()).verdict;
    let v2 = tree::classify(&spec, &g2, &base()).verdict;
    let w = match (v1, v2) {
        (Verdict::Elliptic, Verdict::Elliptic) => witness_elliptic_pair(&spec, k, &g1, &g2, depth)?,
        (Verdict::Elliptic, Verdict::Hyperbolic) => witness_elliptic_hyperbolic(&spec, k, &g1, &g2, depth)?,
        (Verdict::Hyperbolic, Verdict::Elliptic) => witness_elliptic_hyperbolic(&spec, k, &g2, &g1, depth)?,
        (Verdict::Hyperbolic, Verdict::Hyperbolic) => witness_hyperbolic_pair(&spec, k, &g1, &g2, depth)?,
    };
    let text = format!(
        "{:?} (power {}): <{}, {}> {} at depth {}",
        w.case,
        w.power_used,
        w.generators[0],
        w.generators[1],
        if w.certified { "certified free" } else { "NOT certified" },
        w.certificate_depth
    );
    let negative = !w.certified;
    Ok(Output {
        json: witness_json(&w),
        text,
        negative,
    })
}

fn entropy_cmd(weights: &[f64], semigroup: bool, n: usize) -> anyhow::Result<Output> {
    let &[l1, l2] = weights else {
        bail!("--weights takes exactly two values, got {}", weights.len());
    };
    let radii = radii_grid(l1.min(l2), n);
    let (root, series) = if semigroup {
        (semigroup_entropy_root(l1, l2)?, free_semigroup_series(l1, l2, &radii)?)
    } else {
        (free_group_entropy_root(l1, l2)?, free_group_series(l1, l2, &radii)?)
    };
    let est = entropy_from_counts(&series)?;
    let mut j = json!({
        "weights": [l1, l2],
        "semigroup": semigroup,
        "root": root,
        "estimate": est,
    });
    let mut text = format!(
        "root {:.12} (residual {:.1e}); ball counts up to R={}: slope {:.6}, bracket [{:.6}, {:.6}]",
        root.value,
        root.residual.unwrap_or(0.0),
        est.radius_used,
        est.value,
        est.lower,
        est.upper
    );
    if semigroup {
        let b = bcg_lower_bound(l1, l2)?;
        j["bcg_lower_bound"] = json!(b);
        text.push_str(&format!("; lower bound {b:.12}"));
    }
    Ok(Output::ok(j, text))
}

fn bounds_cmd(e: f64, d: f64, k: u32, n: u32, cn: f64) -> anyhow::Result<Output> {
    let r = bounds_report(&BoundsInput { e, d, k, n, c_n: cn })?;
    let text = format!(
        "s0 = {} (k={k})\nhyperbolic branch = {:e}\nfree product (k=0) = {:e}\nvolume >= {:e} (C_n = {cn}, n = {n})\ndelta0 = {:e}\nbranch: {:?}",
        r.s0_general_sci, r.hyperbolic_branch, r.free_product_k0, r.volume_lb, r.delta0, r.dominant_branch
    );
    Ok(Output::ok(serde_json::to_value(&r)?, text))
}

fn dichotomy_cmd(path: &PathBuf, ed: Option<(f64, f64)>, cn: f64) -> anyhow::Result<Output> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let desc = ManifoldDescription::from_json(&text)?;
    let v = classify_manifold(&desc)?;
    let mut j = serde_json::to_value(&v)?;
    let mut out = v.verdict.to_string();
    for c in &v.conflicts {
        out.push_str(&format!("\nconflict: {c}"));
    }
    if let (Some((e, d)), MVerdict::Acylindrical { .. }) = (ed, &v.verdict) {
        let b = systole_bound_for(&desc, e, d, cn)?;
        out.push_str(&format!("\nsystole >= {:e}", b.systole_lb));
        match (&b.volume_lb, &b.volume_suppressed) {
            (Some(vol), _) => out.push_str(&format!("\nvolume >= {vol:e}")),
            (None, Some(why)) => out.push_str(&format!("\nvolume bound suppressed: {why}")),
            _ => {}
        }
        j["bounds"] = serde_json::to_value(&b)?;
    }
    let negative = matches!(v.verdict, MVerdict::NotApplicable { .. });
    Ok(Output {
        json: j,
        text: out,
        negative,
    })
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    Ok(match &cli.cmd {
        Cmd::Classify(a) => classify_cmd(a, false)?,
        Cmd::Tau(a) => classify_cmd(a, true)?,
        Cmd::Fix { el, radius } => fix_cmd(el, *radius)?,
        Cmd::Axis { el, radius } => axis_cmd(el, *radius)?,
        Cmd::AcylCheck { group, k, depth, radius } => acyl_cmd(group, *k, *depth, *radius)?,
        Cmd::FreeWitness { group, element, k, depth } => free_witness_cmd(group, element, *k, *depth)?,
        Cmd::Entropy {
            weights,
            semigroup,
            radius,
        } => entropy_cmd(weights, *semigroup, *radius)?,
        Cmd::Bounds { entropy, diam, k, dim, cn } => bounds_cmd(*entropy, *diam, *k, *dim, *cn)?,
        Cmd::Dichotomy {
            path,
            manifold,
            entropy,
            diam,
            cn,
        } => {
            let p = path
                .as_ref()
                .or(manifold.as_ref())
                .ok_or_else(|| Failure::Input(anyhow!("dichotomy needs a manifold file")))?;
            dichotomy_cmd(p, entropy.zip(*diam), *cn)?
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // Help and version requests are not errors; bad flags are input errors.
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(out) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&out.json).expect("json"));
            } else {
                println!("{}", out.text);
            }
            if out.negative {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(Failure::Negative(msg)) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&json!({"error": msg})).expect("json"));
            } else {
                eprintln!("{msg}");
            }
            ExitCode::from(2)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
