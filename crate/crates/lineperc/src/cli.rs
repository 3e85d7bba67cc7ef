//! Command-line front end. Exit codes: 0 success, 2 bad flags or config,
//! 3 runtime failure (including a verification suite with violations and a
//! run stopped before completion).

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use lineperc_core::cluster::{label_clusters, origin_connects_to_boundary};
use lineperc_core::observe::{Geometry, Observable};
use lineperc_core::renorm::{scan_region, RegionScan, RenormFields, RenormRegion};
use lineperc_core::stats::{fit_decay, EstimateRecord};
use lineperc_core::{BoxRegion, LatticePath, SeedSpec};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{load_config, parse_list, SpecLayer};
use crate::output::{rows_json, save_csv, save_json, write_csv};
use crate::plot::decay_svg;
use crate::resume::{run_resumable, Interrupted, ResumeLog};
use crate::runner::{bisect_critical, decay_curve, run_experiment, thread_pool};
use crate::snapshot::{load_snapshot, read_path, save_snapshot, write_path, Snapshot};
use crate::spec::ExperimentSpec;
use crate::verify::{verify_bridge, verify_duality, verify_path_pair, verify_path_product, Suite};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "lineperc", version, about = "Bernoulli line percolation experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Estimate one observable per experiment.
    Estimate {
        #[command(flatten)]
        common: Common,
        /// Append-only batch log; rerunning with it skips finished batches.
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Replicas per logged batch.
        #[arg(long, default_value_t = 1000)]
        batch: u64,
        #[arg(long, hide = true)]
        stop_after_batches: Option<usize>,
    },
    /// Sweep a grid of diagonal parameters and sizes.
    Scan {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        rho_list: Option<String>,
        #[arg(long)]
        n_list: Option<String>,
        #[arg(long = "L-list")]
        l_list: Option<String>,
    },
    /// Locate the diagonal parameter where the estimate crosses a target.
    Bisect {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "0.5,0.75")]
        range: String,
        #[arg(long, default_value_t = 0.5)]
        target: f64,
        #[arg(long, default_value_t = 0.005)]
        tol: f64,
    },
    /// Estimate a decay curve over inner radii and fit both decay models.
    DecayFit {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "4,6,8,10,12")]
        n_list: String,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Randomised property suites: path-product, bridge or duality.
    VerifyLemma(VerifyArgs),
    /// Good-block grids, crossings and spanning paths of block regions.
    RenormScan {
        #[command(flatten)]
        common: Common,
        /// Several block sides, overriding --block-n.
        #[arg(long)]
        n_list: Option<String>,
        /// Write the spanning path of the first crossing replica here.
        #[arg(long)]
        path_out: Option<PathBuf>,
        #[arg(long, default_value_t = 1 << 27)]
        max_sites: u64,
    },
    /// Sample a configuration on the box of radius L and save it.
    Dump {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        replica: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Summarise a saved configuration.
    Load {
        file: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Config file with one experiment per section.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub section: Option<String>,
    #[arg(long)]
    pub d: Option<usize>,
    /// Comma-separated parameter vector.
    #[arg(long)]
    pub p: Option<String>,
    /// Diagonal parameter, repeated d times.
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub obs: Option<String>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long = "N", alias = "big-n")]
    pub big_n: Option<u32>,
    #[arg(long)]
    pub kappa: Option<u32>,
    #[arg(long = "L")]
    pub l: Option<u32>,
    #[arg(long)]
    pub axis: Option<usize>,
    #[arg(long)]
    pub block_n: Option<usize>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub classifier: Option<String>,
    #[arg(long)]
    pub replicas: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to LINEPERC_THREADS, then all cores.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    pub suite: String,
    #[arg(long, default_value_t = 1000)]
    pub instances: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 4)]
    pub max_h: i64,
    #[arg(long, default_value_t = 40)]
    pub max_len: usize,
    #[arg(long, default_value_t = 20)]
    pub max_side: usize,
    /// Block sides for the bridge suite.
    #[arg(long, default_value = "2,3,4")]
    pub n: String,
    #[arg(long)]
    pub all_open: bool,
    /// Diagonal parameter of the bridge suite's fields.
    #[arg(long, default_value_t = 0.8)]
    pub rho: f64,
    /// Check one pair read from path dumps instead of random pairs.
    #[arg(long, num_args = 2, value_names = ["XZ", "YZ"])]
    pub pair: Option<Vec<PathBuf>>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

/// Failure classified by exit code.
#[derive(Debug)]
pub enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<lineperc_core::Error> for Failure {
    fn from(e: lineperc_core::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

type Outcome = std::result::Result<i32, Failure>;

trait ConfigErr<T> {
    fn config(self) -> std::result::Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> ConfigErr<T> for std::result::Result<T, E> {
    fn config(self) -> std::result::Result<T, Failure> {
        self.map_err(|e| Failure::Config(e.into()))
    }
}

impl Common {
    fn layer(&self) -> anyhow::Result<SpecLayer> {
        let mut l = SpecLayer {
            d: self.d,
            rho: self.rho,
            n: self.n,
            big_n: self.big_n,
            kappa: self.kappa,
            l: self.l,
            axis: self.axis,
            block_n: self.block_n,
            c: self.c,
            k: self.k,
            depth: self.depth,
            replicas: self.replicas,
            seed: self.seed,
            ..SpecLayer::default()
        };
        if let Some(p) = &self.p {
            l.set("p", p)?;
        }
        if let Some(o) = &self.obs {
            l.set("observable", o)?;
        }
        if let Some(c) = &self.classifier {
            l.set("classifier", c)?;
        }
        Ok(l)
    }

    /// Config sections (or a single empty layer) overlaid with the flags.
    fn layers(&self) -> anyhow::Result<Vec<(String, SpecLayer)>> {
        let flags = self.layer()?;
        let base = match &self.config {
            Some(path) => {
                let mut secs = load_config(path)?;
                if let Some(s) = &self.section {
                    secs.retain(|(name, _)| name == s);
                    if secs.is_empty() {
                        bail!("no section [{s}] in {}", path.display());
                    }
                }
                secs
            }
            None if self.section.is_some() => bail!("--section needs --config"),
            None => vec![("flags".to_string(), SpecLayer::default())],
        };
        Ok(base.into_iter().map(|(name, l)| (name, l.overlay(&flags))).collect())
    }

    /// Built experiments; `default_rho` fills in missing parameters for
    /// commands that choose the parameters themselves.
    fn specs(&self, default_obs: Option<Observable>, default_rho: Option<f64>) -> anyhow::Result<Vec<ExperimentSpec>> {
        self.layers()?
            .into_iter()
            .map(|(name, mut l)| {
                if l.observable.is_none() {
                    l.observable = default_obs;
                }
                if l.p.is_none() && l.rho.is_none() {
                    l.rho = default_rho;
                }
                l.build().with_context(|| format!("experiment [{name}]"))
            })
            .collect()
    }

    fn single(&self, default_obs: Option<Observable>, default_rho: Option<f64>) -> anyhow::Result<ExperimentSpec> {
        let mut specs = self.specs(default_obs, default_rho)?;
        if specs.len() != 1 {
            bail!("{} experiments configured; pick one with --section", specs.len());
        }
        Ok(specs.remove(0))
    }

    fn pool(&self) -> std::result::Result<rayon::ThreadPool, Failure> {
        thread_pool(self.threads).config()
    }

    /// CSV to `--csv` (or stdout when `stdout_default`), JSON to `--json`.
    fn emit(&self, rows: &[(ExperimentSpec, EstimateRecord)], extra: Option<serde_json::Value>, stdout_default: bool) -> anyhow::Result<()> {
        match &self.csv {
            Some(p) => save_csv(p, rows)?,
            None if stdout_default => {
                let mut out = std::io::stdout().lock();
                write_csv(&mut out, rows)?;
                out.flush()?;
            }
            None => {}
        }
        if let Some(p) = &self.json {
            let mut v = json!({ "rows": rows_json(rows) });
            if let Some(e) = extra {
                v["report"] = e;
            }
            save_json(p, &v)?;
        }
        Ok(())
    }
}

fn estimate(common: &Common, resume: Option<&Path>, batch: u64, stop_after: Option<usize>) -> Outcome {
    let specs = common.specs(None, None).config()?;
    let pool = common.pool()?;
    let mut rows = Vec::new();
    match resume {
        Some(path) => {
            let [spec] = &specs[..] else {
                return Err(Failure::Config(anyhow!("--resume takes a single experiment; pick one with --section")));
            };
            let log = ResumeLog::new(path);
            log.load(spec).config()?;
            match run_resumable(spec, &log, batch, stop_after, &pool) {
                Ok(rec) => rows.push((spec.clone(), rec)),
                Err(e) if e.downcast_ref::<Interrupted>().is_some() => {
                    eprintln!("lineperc: {e}");
                    return Ok(EXIT_RUNTIME);
                }
                Err(e) => return Err(e.into()),
            }
        }
        None => {
            for spec in specs {
                let rec = run_experiment(&spec, &pool)?;
                rows.push((spec, rec));
            }
        }
    }
    common.emit(&rows, None, true)?;
    Ok(0)
}

fn scan(common: &Common, rho: Option<&str>, ns: Option<&str>, ls: Option<&str>) -> Outcome {
    let rhos: Vec<Option<f64>> = match rho {
        Some(s) => parse_list(s).config()?.into_iter().map(Some).collect(),
        None => vec![None],
    };
    let base = common.single(None, rhos[0]).config()?;
    let ns: Vec<Option<u32>> = match ns {
        Some(s) => parse_list(s).config()?.into_iter().map(Some).collect(),
        None => vec![None],
    };
    let ls: Vec<Option<u32>> = match ls {
        Some(s) => parse_list(s).config()?.into_iter().map(Some).collect(),
        None => vec![None],
    };
    let mut specs = Vec::new();
    for r in &rhos {
        for n in &ns {
            for l in &ls {
                let mut g = base.geometry;
                g.n = n.unwrap_or(g.n);
                g.l = l.unwrap_or(g.l);
                let s = base.with_geometry(g);
                let s = match r {
                    Some(r) => s.with_params(vec![*r; base.d()]),
                    None => s,
                };
                s.validate().config()?;
                specs.push(s);
            }
        }
    }
    let pool = common.pool()?;
    let mut rows = Vec::new();
    for s in specs {
        let rec = run_experiment(&s, &pool)?;
        rows.push((s, rec));
    }
    common.emit(&rows, None, true)?;
    Ok(0)
}

fn bisect(common: &Common, range: &str, target: f64, tol: f64) -> Outcome {
    let spec = common.single(Some(Observable::Crossing), Some(0.5)).config()?;
    let r: Vec<f64> = parse_list(range).config()?;
    let [lo, hi] = r[..] else {
        return Err(Failure::Config(anyhow!("--range takes two values, got {range:?}")));
    };
    if !(0.0..=1.0).contains(&lo) || !(lo <= hi && hi <= 1.0) || !(tol > 0.0) || !(0.0..=1.0).contains(&target) {
        return Err(Failure::Config(anyhow!("need 0 ≤ lo ≤ hi ≤ 1, 0 ≤ target ≤ 1 and tol > 0")));
    }
    let pool = common.pool()?;
    let out = bisect_critical(&spec, (lo, hi), target, tol, &pool)?;
    println!(
        "interval [{:.6}, {:.6}] midpoint {:.6} ({:?}, {} evaluations)",
        out.lo,
        out.hi,
        out.midpoint(),
        out.bracket,
        out.evaluations.len()
    );
    let rows: Vec<_> = out.evaluations.iter().map(|(rho, rec)| (spec.with_params(vec![*rho; spec.d()]), rec.clone())).collect();
    let report = json!({ "lo": out.lo, "hi": out.hi, "midpoint": out.midpoint(), "bracket": out.bracket, "target": target, "tol": tol });
    common.emit(&rows, Some(report), false)?;
    Ok(0)
}

fn decay(common: &Common, n_list: &str, svg: Option<&Path>) -> Outcome {
    let spec = common.single(Some(Observable::Connection), None).config()?;
    let ns: Vec<u32> = parse_list(n_list).config()?;
    for &n in &ns {
        spec.with_geometry(Geometry { n, ..spec.geometry }).validate().config()?;
    }
    let pool = common.pool()?;
    let curve = decay_curve(&spec, &ns, &pool)?;
    let pts: Vec<(f64, f64)> = curve.iter().map(|(n, r)| (*n as f64, r.estimate)).collect();
    let fit = fit_decay(&pts);
    match &fit {
        Ok(f) => println!(
            "preferred {:?}: exponential rate {:.5} (R² {:.4}), power exponent {:.5} (R² {:.4})",
            f.preferred, f.exponential.rate, f.exponential.r_squared, f.power.rate, f.power.r_squared
        ),
        Err(e) => eprintln!("lineperc: no fit: {e}"),
    }
    if let Some(path) = svg {
        let title = format!("{} p={:?}", spec.observable, spec.params);
        std::fs::write(path, decay_svg(&pts, fit.as_ref().ok(), &title)).with_context(|| format!("writing {}", path.display()))?;
    }
    let rows: Vec<_> = curve.into_iter().map(|(n, rec)| (spec.with_geometry(Geometry { n, ..spec.geometry }), rec)).collect();
    let report = match &fit {
        Ok(f) => json!({ "fit": f }),
        Err(e) => json!({ "fit": null, "error": e.to_string() }),
    };
    common.emit(&rows, Some(report), false)?;
    Ok(0)
}

fn read_path_file(p: &Path) -> anyhow::Result<LatticePath> {
    let f = std::fs::File::open(p).with_context(|| format!("opening {}", p.display()))?;
    Ok(LatticePath::new(read_path(std::io::BufReader::new(f))?)?)
}

fn verify(a: &VerifyArgs) -> Outcome {
    let suite: Suite = a.suite.parse().config()?;
    let report = match suite {
        Suite::Duality => {
            if a.max_side == 0 {
                return Err(Failure::Config(anyhow!("--max-side must be positive")));
            }
            verify_duality(a.instances, a.seed, a.max_side)?
        }
        Suite::PathProduct => match &a.pair {
            Some(files) => verify_path_pair(&read_path_file(&files[0]).config()?, &read_path_file(&files[1]).config()?),
            None => verify_path_product(a.instances, a.seed, a.max_h, a.max_len)?,
        },
        Suite::Bridge => {
            let ns: Vec<usize> = parse_list(&a.n).config()?;
            let params = lineperc_core::ParamVector::diagonal(3, a.rho).config()?;
            verify_bridge(&ns, a.instances, a.seed, &params, a.all_open).config()?
        }
    };
    let text = serde_json::to_string_pretty(&report).map_err(anyhow::Error::from)?;
    println!("{text}");
    if let Some(p) = &a.json {
        save_json(p, &report)?;
    }
    Ok(if report.violations == 0 { 0 } else { EXIT_RUNTIME })
}

fn renorm_scan(common: &Common, n_list: Option<&str>, path_out: Option<&Path>, max_sites: u64) -> Outcome {
    let spec = common.single(Some(Observable::GoodBlockCrossing), None).config()?;
    let params = spec.param_vector().config()?;
    let g = spec.geometry;
    let ns: Vec<usize> = match n_list {
        Some(s) => parse_list(s).config()?,
        None => vec![g.block_n],
    };
    let mut regions = Vec::new();
    for n in ns {
        let region = RenormRegion::new(g.c, g.k, n).config()?;
        let (lo, hi) = region.field_box();
        let sites: u64 = (0..3).map(|i| (hi[i] - lo[i] + 1) as u64).product();
        if sites > max_sites {
            return Err(Failure::Config(anyhow!("block side {n}: field box has {sites} sites, over the cap of {max_sites}")));
        }
        regions.push(region);
    }
    let pool = common.pool()?;
    let mut reports = Vec::new();
    let mut path_written = false;
    for region in regions {
        let scans: Vec<RegionScan> = pool.install(|| {
            (0..spec.replicas)
                .into_par_iter()
                .map(|r| {
                    let fields = RenormFields::sample_for(&params, SeedSpec::new(spec.master_seed, r), &region);
                    scan_region(&fields, &region, true)
                })
                .collect::<lineperc_core::Result<Vec<_>>>()
        })?;
        let crossings = scans.iter().filter(|s| s.crossing.is_some()).count() as u64;
        let fully_open = scans.iter().filter(|s| s.fully_open == Some(true)).count() as u64;
        let good: usize = scans.iter().map(|s| s.good.iter().flatten().filter(|&&b| b).count()).sum();
        let blocks = (region.width * region.k) as f64 * spec.replicas as f64;
        println!(
            "n={} width={} k={}: crossing frequency {:.4} ({crossings}/{}), good-block fraction {:.4}",
            region.n,
            region.width,
            region.k,
            crossings as f64 / spec.replicas as f64,
            spec.replicas,
            good as f64 / blocks
        );
        if let (Some(out), false) = (path_out, path_written) {
            if let Some(p) = scans.iter().find_map(|s| s.path.as_ref()) {
                let mut f = std::fs::File::create(out).with_context(|| format!("creating {}", out.display()))?;
                write_path(&mut f, p)?;
                path_written = true;
            }
        }
        reports.push(json!({
            "n": region.n,
            "c": region.c,
            "k": region.k,
            "width": region.width,
            "replicas": spec.replicas,
            "crossings": crossings,
            "frequency": crossings as f64 / spec.replicas as f64,
            "fully_open_paths": fully_open,
            "good_block_fraction": good as f64 / blocks,
            "first_replica": scans.first(),
        }));
    }
    if let Some(p) = &common.json {
        save_json(p, &json!({ "params": spec.params, "master_seed": spec.master_seed, "scans": reports }))?;
    }
    Ok(0)
}

fn dump(common: &Common, replica: u64, out: &Path) -> Outcome {
    let spec = common.single(Some(Observable::Crossing), None).config()?;
    let params = spec.param_vector().config()?;
    let region = BoxRegion::centered(spec.d(), spec.geometry.l);
    let snap = Snapshot::sample(params, region, SeedSpec::new(spec.master_seed, replica)).config()?;
    save_snapshot(out, &snap)?;
    println!("wrote {} (d={}, radius {})", out.display(), spec.d(), spec.geometry.l);
    Ok(0)
}

fn load(file: &Path, json_out: Option<&Path>) -> Outcome {
    let snap = load_snapshot(file).config()?;
    let cfg = &snap.config;
    let region = cfg.region();
    let labels = label_clusters(cfg)?;
    let open: u64 = labels.sizes().iter().sum();
    let radius = (region.side() / 2) as u32;
    let origin_boundary = if region.contains(&vec![0; region.d()]) && radius > 0 {
        Some(origin_connects_to_boundary(cfg, radius)?)
    } else {
        None
    };
    let summary = json!({
        "d": region.d(),
        "radius": radius,
        "center": region.window().lo().iter().zip(region.window().hi()).map(|(a, b)| (a + b) / 2).collect::<Vec<_>>(),
        "params": snap.params.p(),
        "master_seed": snap.seed.master,
        "replica": snap.seed.replica,
        "sites": region.volume() as u64,
        "open_sites": open,
        "clusters": labels.component_count(),
        "largest_cluster": labels.sizes().iter().max().copied().unwrap_or(0),
        "origin_reaches_boundary": origin_boundary,
    });
    println!("{}", serde_json::to_string_pretty(&summary).map_err(anyhow::Error::from)?);
    if let Some(p) = json_out {
        save_json(p, &summary)?;
    }
    Ok(0)
}

pub fn run(cli: Cli) -> Outcome {
    match &cli.cmd {
        Cmd::Estimate { common, resume, batch, stop_after_batches } => {
            estimate(common, resume.as_deref(), *batch, *stop_after_batches)
        }
        Cmd::Scan { common, rho_list, n_list, l_list } => scan(common, rho_list.as_deref(), n_list.as_deref(), l_list.as_deref()),
        Cmd::Bisect { common, range, target, tol } => bisect(common, range, *target, *tol),
        Cmd::DecayFit { common, n_list, svg } => decay(common, n_list, svg.as_deref()),
        Cmd::VerifyLemma(a) => verify(a),
        Cmd::RenormScan { common, n_list, path_out, max_sites } => {
            renorm_scan(common, n_list.as_deref(), path_out.as_deref(), *max_sites)
        }
        Cmd::Dump { common, replica, out } => dump(common, *replica, out),
        Cmd::Load { file, json } => load(file, json.as_deref()),
    }
}

/// Parses `std::env::args`, runs, and returns the exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(Failure::Config(e)) => {
            eprintln!("lineperc: config error: {e:#}");
            EXIT_CONFIG
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("lineperc: {e:#}");
            EXIT_RUNTIME
        }
    }
}
