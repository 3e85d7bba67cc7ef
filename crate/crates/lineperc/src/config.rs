//! Experiment config files: `key = value` lines grouped in `[sections]`,
//! one experiment per section. Keys outside any section apply to all.
//!
//! ```text
//! [kantor]
//! observable = crossing
//! rho = 0.63
//! L = 64
//! replicas = 400
//! seed = 7
//! ```

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use ini::Ini;
use lineperc_core::cluster::Classifier;
use lineperc_core::observe::{Geometry, Observable};

use crate::spec::ExperimentSpec;

/// Partially specified experiment. Later layers override earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SpecLayer {
    pub d: Option<usize>,
    pub p: Option<Vec<f64>>,
    pub rho: Option<f64>,
    pub observable: Option<Observable>,
    pub n: Option<u32>,
    pub big_n: Option<u32>,
    pub kappa: Option<u32>,
    pub l: Option<u32>,
    pub axis: Option<usize>,
    pub block_n: Option<usize>,
    pub c: Option<f64>,
    pub k: Option<usize>,
    pub depth: Option<usize>,
    pub classifier: Option<Classifier>,
    pub replicas: Option<u64>,
    pub seed: Option<u64>,
}

pub fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<T>().map_err(|e| anyhow!("bad list entry {t:?}: {e}")))
        .collect()
}

pub fn parse_classifier(s: &str) -> Result<Classifier> {
    match s {
        "spanning" => Ok(Classifier::Spanning),
        "boundary" => Ok(Classifier::BoundaryTouching),
        _ => bail!("unknown classifier {s:?} (spanning | boundary)"),
    }
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.trim().parse::<T>().map_err(|e| anyhow!("{key} = {v:?}: {e}"))
}

impl SpecLayer {
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "d" => self.d = Some(parse(key, v)?),
            "p" => self.p = Some(parse_list(v)?),
            "rho" => self.rho = Some(parse(key, v)?),
            "observable" | "obs" => self.observable = Some(v.trim().parse()?),
            "n" => self.n = Some(parse(key, v)?),
            "N" => self.big_n = Some(parse(key, v)?),
            "kappa" => self.kappa = Some(parse(key, v)?),
            "L" => self.l = Some(parse(key, v)?),
            "axis" => self.axis = Some(parse(key, v)?),
            "block_n" => self.block_n = Some(parse(key, v)?),
            "c" => self.c = Some(parse(key, v)?),
            "k" => self.k = Some(parse(key, v)?),
            "depth" => self.depth = Some(parse(key, v)?),
            "classifier" => self.classifier = Some(parse_classifier(v.trim())?),
            "replicas" => self.replicas = Some(parse(key, v)?),
            "seed" => self.seed = Some(parse(key, v)?),
            _ => bail!("unknown key {key:?}"),
        }
        Ok(())
    }

    pub fn overlay(&self, top: &SpecLayer) -> SpecLayer {
        macro_rules! pick {
            ($($f:ident),*) => { SpecLayer { $($f: top.$f.clone().or_else(|| self.$f.clone())),* } };
        }
        let mut out = pick!(d, p, rho, observable, n, big_n, kappa, l, axis, block_n, c, k, depth, classifier, replicas, seed);
        // An explicit vector on one layer and a diagonal value on a higher
        // one: the higher layer wins.
        if top.rho.is_some() && top.p.is_none() {
            out.p = None;
        }
        if top.p.is_some() && top.rho.is_none() {
            out.rho = None;
        }
        out
    }

    pub fn build(&self) -> Result<ExperimentSpec> {
        let params = match (&self.p, self.rho) {
            (Some(_), Some(_)) => bail!("give either p or rho, not both"),
            (Some(p), None) => {
                if let Some(d) = self.d {
                    if d != p.len() {
                        bail!("d = {d} but p has {} entries", p.len());
                    }
                }
                p.clone()
            }
            (None, Some(r)) => vec![r; self.d.unwrap_or(3)],
            (None, None) => bail!("missing parameters: set p or rho"),
        };
        let def = Geometry::default();
        let geometry = Geometry {
            n: self.n.unwrap_or(def.n),
            big_n: self.big_n,
            kappa: self.kappa.unwrap_or(def.kappa),
            l: self.l.unwrap_or(def.l),
            axis: self.axis.unwrap_or(def.axis),
            block_n: self.block_n.unwrap_or(def.block_n),
            c: self.c.unwrap_or(def.c),
            k: self.k.unwrap_or(def.k),
            depth: self.depth.unwrap_or(def.depth),
            classifier: self.classifier.unwrap_or(def.classifier),
        };
        let spec = ExperimentSpec::new(
            params,
            self.observable.ok_or_else(|| anyhow!("missing observable"))?,
            geometry,
            self.replicas.unwrap_or(100),
            self.seed.unwrap_or(0),
        );
        spec.validate()?;
        Ok(spec)
    }
}

/// Sections of a config file in order, each layered over the section-less
/// defaults at the top of the file.
pub fn parse_config(text: &str) -> Result<Vec<(String, SpecLayer)>> {
    let ini = Ini::load_from_str(text).map_err(|e| anyhow!("config syntax: {e}"))?;
    let mut base = SpecLayer::default();
    if let Some(props) = ini.section(None::<String>) {
        for (k, v) in props.iter() {
            base.set(k, v)?;
        }
    }
    let mut out = Vec::new();
    for (name, props) in ini.iter() {
        let Some(name) = name else { continue };
        let mut layer = SpecLayer::default();
        for (k, v) in props.iter() {
            layer.set(k, v).with_context(|| format!("section [{name}]"))?;
        }
        out.push((name.to_string(), base.overlay(&layer)));
    }
    if out.is_empty() {
        out.push(("default".to_string(), base));
    }
    Ok(out)
}

pub fn load_config(path: &Path) -> Result<Vec<(String, SpecLayer)>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config(&text).with_context(|| format!("in {}", path.display()))
}
