//! Flat `key = value` pipeline configuration.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;
use core::str::FromStr;

use crate::candidates::SearchParams;
use crate::mrf::{TrwsOptions, VcoParams};
use crate::postprocess::{ConnectParams, GrowthParams, RadiusPolicy};
use crate::vesselness::VesselnessParams;
use crate::{Error, Result};

/// Every tunable of the extraction pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub sample_interval: f64,
    pub n_k: usize,
    pub w_k: usize,
    pub h_k: usize,
    pub n_l: usize,
    pub w_p: usize,
    pub h_p: usize,
    pub nms_radius: f64,
    pub flat_window: usize,
    pub chamfer_radius: i32,
    pub lambda: f64,
    pub t_phi: f64,
    pub t_psi: f64,
    /// Dummy unary cost as a multiple of `t_phi`.
    pub dummy_ratio: f64,
    pub trws_max_iters: usize,
    pub trws_eps: f64,
    pub vesselness_scales: Vec<f64>,
    pub vesselness_beta: f64,
    pub vesselness_threshold: f64,
    pub speed_epsilon: f64,
    /// `None` selects the 95th-percentile estimate.
    pub r_max: Option<f64>,
    pub max_new_branches: usize,
    pub attach_radius: i32,
    pub grow_branches: bool,
    pub hierarchical_search: bool,
    pub dummy_label: bool,
    pub match_radius: f64,
    pub sufficiency_threshold: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            sample_interval: 5.0,
            n_k: 2,
            w_k: 101,
            h_k: 101,
            n_l: 5,
            w_p: 21,
            h_p: 21,
            nms_radius: 3.0,
            flat_window: 81,
            chamfer_radius: 30,
            lambda: 0.05,
            t_phi: 1.0,
            t_psi: 10.0,
            dummy_ratio: 0.8,
            trws_max_iters: 200,
            trws_eps: 1e-5,
            vesselness_scales: crate::vesselness::DEFAULT_SCALES.to_vec(),
            vesselness_beta: crate::vesselness::DEFAULT_BETA,
            vesselness_threshold: crate::morphology::DEFAULT_THRESHOLD,
            speed_epsilon: crate::postprocess::DEFAULT_SPEED_EPSILON,
            r_max: Some(crate::postprocess::DEFAULT_MAX_RADIUS),
            max_new_branches: crate::postprocess::DEFAULT_MAX_NEW_BRANCHES,
            attach_radius: 2,
            grow_branches: true,
            hierarchical_search: true,
            dummy_label: true,
            match_radius: crate::metrics::DEFAULT_MATCH_RADIUS,
            sufficiency_threshold: crate::metrics::DEFAULT_SUFFICIENCY_THRESHOLD,
        }
    }
}

/// Recognized keys, in canonical order.
pub const KEYS: &[&str] = &[
    "sample_interval",
    "n_k",
    "w_k",
    "h_k",
    "n_l",
    "w_p",
    "h_p",
    "nms_radius",
    "flat_window",
    "chamfer_radius",
    "lambda",
    "t_phi",
    "t_psi",
    "dummy_ratio",
    "trws_max_iters",
    "trws_eps",
    "vesselness_scales",
    "vesselness_beta",
    "vesselness_threshold",
    "speed_epsilon",
    "r_max",
    "max_new_branches",
    "attach_radius",
    "grow_branches",
    "hierarchical_search",
    "dummy_label",
    "match_radius",
    "sufficiency_threshold",
];

fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| Error::InvalidParameter(format!("{key}: cannot parse '{value}'")))
}

fn flag(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        other => Err(Error::InvalidParameter(format!("{key}: expected on/off, got '{other}'"))),
    }
}

impl PipelineConfig {
    /// Parses `key = value` lines over the defaults. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = PipelineConfig::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(format!("line {}: expected key = value", n + 1)))?;
            cfg.set(k.trim(), v.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "sample_interval" => self.sample_interval = num(key, value)?,
            "n_k" => self.n_k = num(key, value)?,
            "w_k" => self.w_k = num(key, value)?,
            "h_k" => self.h_k = num(key, value)?,
            "n_l" => self.n_l = num(key, value)?,
            "w_p" => self.w_p = num(key, value)?,
            "h_p" => self.h_p = num(key, value)?,
            "nms_radius" => self.nms_radius = num(key, value)?,
            "flat_window" => self.flat_window = num(key, value)?,
            "chamfer_radius" => self.chamfer_radius = num(key, value)?,
            "lambda" => self.lambda = num(key, value)?,
            "t_phi" => self.t_phi = num(key, value)?,
            "t_psi" => self.t_psi = num(key, value)?,
            "dummy_ratio" => self.dummy_ratio = num(key, value)?,
            "trws_max_iters" => self.trws_max_iters = num(key, value)?,
            "trws_eps" => self.trws_eps = num(key, value)?,
            "vesselness_scales" => {
                self.vesselness_scales =
                    value.split(',').filter(|s| !s.trim().is_empty()).map(|s| num(key, s)).collect::<Result<_>>()?
            }
            "vesselness_beta" => self.vesselness_beta = num(key, value)?,
            "vesselness_threshold" => self.vesselness_threshold = num(key, value)?,
            "speed_epsilon" => self.speed_epsilon = num(key, value)?,
            "r_max" => self.r_max = if value.trim() == "auto" { None } else { Some(num(key, value)?) },
            "max_new_branches" => self.max_new_branches = num(key, value)?,
            "attach_radius" => self.attach_radius = num(key, value)?,
            "grow_branches" => self.grow_branches = flag(key, value)?,
            "hierarchical_search" => self.hierarchical_search = flag(key, value)?,
            "dummy_label" => self.dummy_label = flag(key, value)?,
            "match_radius" => self.match_radius = num(key, value)?,
            "sufficiency_threshold" => self.sufficiency_threshold = num(key, value)?,
            other => return Err(Error::InvalidParameter(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Current value of `key` in the same syntax [`set`](Self::set) accepts.
    pub fn get(&self, key: &str) -> Option<String> {
        let onoff = |b: bool| String::from(if b { "on" } else { "off" });
        Some(match key {
            "sample_interval" => self.sample_interval.to_string(),
            "n_k" => self.n_k.to_string(),
            "w_k" => self.w_k.to_string(),
            "h_k" => self.h_k.to_string(),
            "n_l" => self.n_l.to_string(),
            "w_p" => self.w_p.to_string(),
            "h_p" => self.h_p.to_string(),
            "nms_radius" => self.nms_radius.to_string(),
            "flat_window" => self.flat_window.to_string(),
            "chamfer_radius" => self.chamfer_radius.to_string(),
            "lambda" => self.lambda.to_string(),
            "t_phi" => self.t_phi.to_string(),
            "t_psi" => self.t_psi.to_string(),
            "dummy_ratio" => self.dummy_ratio.to_string(),
            "trws_max_iters" => self.trws_max_iters.to_string(),
            "trws_eps" => format!("{:e}", self.trws_eps),
            "vesselness_scales" => self.vesselness_scales.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(","),
            "vesselness_beta" => self.vesselness_beta.to_string(),
            "vesselness_threshold" => self.vesselness_threshold.to_string(),
            "speed_epsilon" => format!("{:e}", self.speed_epsilon),
            "r_max" => self.r_max.map_or_else(|| String::from("auto"), |r| r.to_string()),
            "max_new_branches" => self.max_new_branches.to_string(),
            "attach_radius" => self.attach_radius.to_string(),
            "grow_branches" => onoff(self.grow_branches),
            "hierarchical_search" => onoff(self.hierarchical_search),
            "dummy_label" => onoff(self.dummy_label),
            "match_radius" => self.match_radius.to_string(),
            "sufficiency_threshold" => self.sufficiency_threshold.to_string(),
            _ => return None,
        })
    }

    /// Canonical text form; parses back to an equal config.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for k in KEYS {
            let _ = writeln!(out, "{k} = {}", self.get(k).unwrap());
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        for (k, v) in [("w_k", self.w_k), ("h_k", self.h_k), ("w_p", self.w_p), ("h_p", self.h_p), ("flat_window", self.flat_window)] {
            if v % 2 == 0 {
                return bad(format!("{k} must be odd, got {v}"));
            }
        }
        for (k, v) in [("n_k", self.n_k), ("n_l", self.n_l), ("trws_max_iters", self.trws_max_iters)] {
            if v == 0 {
                return bad(format!("{k} must be at least 1"));
            }
        }
        if !(self.sample_interval > 0.0) {
            return bad("sample_interval must be positive".into());
        }
        if self.chamfer_radius < 0 || self.attach_radius < 0 {
            return bad("radii must be non-negative".into());
        }
        if !(self.lambda >= 0.0 && self.t_phi > 0.0 && self.t_psi > 0.0 && self.dummy_ratio >= 0.0) {
            return bad("energy weights must be non-negative and truncations positive".into());
        }
        if self.vesselness_scales.is_empty() {
            return Err(Error::EmptyScales);
        }
        if !(self.match_radius > 0.0) {
            return bad("match_radius must be positive".into());
        }
        if self.r_max.is_some_and(|r| !(r >= 0.0)) {
            return bad("r_max must be non-negative or auto".into());
        }
        Ok(())
    }

    pub fn search_params(&self) -> SearchParams {
        SearchParams {
            n_k: self.n_k,
            w_k: self.w_k,
            h_k: self.h_k,
            n_l: self.n_l,
            w_p: self.w_p,
            h_p: self.h_p,
            nms_radius: self.nms_radius,
            flat_window: self.flat_window,
        }
    }

    pub fn vco_params(&self) -> VcoParams {
        VcoParams {
            lambda: self.lambda,
            t_phi: self.t_phi,
            t_psi: self.t_psi,
            dummy_cost: self.dummy_ratio * self.t_phi,
            use_dummy: self.dummy_label,
            n_p: self.search_params().n_p(),
        }
    }

    pub fn trws_options(&self) -> TrwsOptions {
        TrwsOptions { max_iters: self.trws_max_iters, convergence_eps: self.trws_eps }
    }

    pub fn vesselness_params(&self) -> VesselnessParams {
        VesselnessParams { scales: self.vesselness_scales.clone(), beta: self.vesselness_beta }
    }

    pub fn connect_params(&self) -> ConnectParams {
        ConnectParams { speed_epsilon: self.speed_epsilon, ..ConnectParams::default() }
    }

    pub fn growth_params(&self) -> GrowthParams {
        GrowthParams {
            threshold: self.vesselness_threshold,
            max_radius: self.r_max.map_or(RadiusPolicy::Percentile95, RadiusPolicy::Fixed),
            max_new_branches: self.max_new_branches,
            attach_radius: self.attach_radius,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_give_25_labels() {
        let c = PipelineConfig::default();
        assert_eq!(c.search_params().n_p(), 25);
        assert_eq!(c.vco_params().dummy_cost, 0.8);
        c.validate().unwrap();
    }

    #[test]
    fn text_round_trip() {
        let mut c = PipelineConfig::default();
        c.set("lambda", "0.125").unwrap();
        c.set("r_max", "auto").unwrap();
        c.set("dummy_label", "off").unwrap();
        c.set("vesselness_scales", "1, 2").unwrap();
        assert_eq!(PipelineConfig::parse(&c.to_text()).unwrap(), c);
        for k in KEYS {
            assert!(c.get(k).is_some(), "{k}");
        }
    }

    #[test]
    fn comments_and_errors() {
        let c = PipelineConfig::parse("# tuned\n\nn_l = 3\n").unwrap();
        assert_eq!(c.n_l, 3);
        assert!(PipelineConfig::parse("w_p = 20").is_err());
        assert!(PipelineConfig::parse("n_k = 0").is_err());
        assert!(PipelineConfig::parse("bogus = 1").is_err());
        assert!(PipelineConfig::parse("lambda").is_err());
        assert!(PipelineConfig::parse("lambda = x").is_err());
    }
}
