//! Device characteristics, memory layout sizing, and policy parameters.
//!
//! Configuration files are flat `key = value` text with `#` comments.
//! Every key has a documented default; unknown keys are rejected so typos
//! fail loudly. The resolved configuration is immutable after load and is
//! echoed into every run report.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::kv;
use crate::policy::PolicyKind;

/// Latency, dynamic energy, and static power of one memory tier.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TierParams {
    /// Read latency in nanoseconds.
    pub t_read_ns: f64,
    /// Write latency in nanoseconds.
    pub t_write_ns: f64,
    /// Dynamic energy per read request, nanojoules.
    pub e_read_nj: f64,
    /// Dynamic energy per write request, nanojoules.
    pub e_write_nj: f64,
    /// Static (background) power in joules per GB per second.
    pub static_j_per_gb_s: f64,
}

/// Characteristics of the DRAM tier, the NVM tier, and the disk.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    pub dram: TierParams,
    pub nvm: TierParams,
    /// Disk access latency in nanoseconds (page faults cost this alone).
    pub t_disk_ns: f64,
}

impl Default for DeviceParams {
    fn default() -> Self {
        DeviceParams {
            dram: TierParams {
                t_read_ns: 50.0,
                t_write_ns: 50.0,
                e_read_nj: 3.2,
                e_write_nj: 3.2,
                static_j_per_gb_s: 1.0,
            },
            nvm: TierParams {
                t_read_ns: 100.0,
                t_write_ns: 350.0,
                e_read_nj: 6.4,
                e_write_nj: 32.0,
                static_j_per_gb_s: 0.1,
            },
            t_disk_ns: 5_000_000.0,
        }
    }
}

/// Page geometry and capacity sizing rules.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayoutConfig {
    /// Page size in bytes.
    pub page_size: u64,
    /// Total memory as a fraction of the trace's distinct pages.
    pub mem_fraction: f64,
    /// DRAM share of total memory.
    pub dram_fraction: f64,
    /// Memory transactions needed to move one page between devices.
    pub page_factor: u64,
    /// Explicit DRAM capacity override, pages.
    pub dram_pages: Option<u64>,
    /// Explicit NVM capacity override, pages.
    pub nvm_pages: Option<u64>,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        LayoutConfig {
            page_size: 4096,
            mem_fraction: 0.75,
            dram_fraction: 0.10,
            page_factor: 64,
            dram_pages: None,
            nvm_pages: None,
        }
    }
}

/// Threshold value meaning "never migrate"; accepted as `inf` in config.
pub const THRESHOLD_INF: u64 = u64::MAX;

/// Migration-policy knobs for the two-queue scheme.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams {
    /// Fraction of NVM queue positions with read counters.
    pub readperc: f64,
    /// Fraction of NVM queue positions with write counters.
    pub writeperc: f64,
    /// Read counter value above which a page migrates to DRAM.
    pub read_threshold: u64,
    /// Write counter value above which a page migrates to DRAM.
    pub write_threshold: u64,
}

impl Default for PolicyParams {
    fn default() -> Self {
        PolicyParams {
            readperc: 0.2,
            writeperc: 0.4,
            read_threshold: 4,
            write_threshold: 8,
        }
    }
}

impl PolicyParams {
    /// Counter-region lengths for an NVM queue of the given capacity:
    /// `(ceil(readperc * cap), ceil(writeperc * cap))`, each at least 1.
    pub fn region_sizes(&self, nvm_capacity: usize) -> (usize, usize) {
        (
            region_len(self.readperc, nvm_capacity),
            region_len(self.writeperc, nvm_capacity),
        )
    }
}

fn region_len(perc: f64, capacity: usize) -> usize {
    let len = (perc * capacity as f64).ceil() as usize;
    len.clamp(1, capacity.max(1))
}

/// Fully resolved run configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub device: DeviceParams,
    pub layout: LayoutConfig,
    pub params: PolicyParams,
    pub policy: PolicyKind,
    /// Optional fixed request rate substituting the busy-time base of the
    /// static-power proration.
    pub requests_per_second: Option<f64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            device: DeviceParams::default(),
            layout: LayoutConfig::default(),
            params: PolicyParams::default(),
            policy: PolicyKind::TwoLru,
            requests_per_second: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{0}")]
    Syntax(String),
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { key: String, line: usize },
    #[error("line {line}: bad value for `{key}`: `{value}`")]
    BadValue {
        key: String,
        value: String,
        line: usize,
    },
    #[error("invalid `{key}`: {why}")]
    Invariant { key: String, why: String },
    #[error("capacity derivation: {0}")]
    Capacity(String),
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
}

impl SimConfig {
    /// Loads a config file, filling unset keys with defaults and
    /// validating all invariants.
    pub fn load(path: &Path) -> Result<SimConfig, ConfigError> {
        let text = fs::read_to_string(path)?;
        SimConfig::parse(&text)
    }

    /// Parses config text. See [`SimConfig::apply_kv`] for the key list.
    pub fn parse(text: &str) -> Result<SimConfig, ConfigError> {
        let mut cfg = SimConfig::default();
        for kv::KvLine { key, value, line } in
            kv::parse_kv_lines(text).map_err(ConfigError::Syntax)?
        {
            cfg.apply_kv(&key, &value, line)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies one `key = value` assignment. `line` is used in errors only.
    pub fn apply_kv(&mut self, key: &str, value: &str, line: usize) -> Result<(), ConfigError> {
        macro_rules! set {
            ($field:expr, $ty:ty) => {{
                $field = value.parse::<$ty>().map_err(|_| ConfigError::BadValue {
                    key: key.to_string(),
                    value: value.to_string(),
                    line,
                })?;
            }};
        }
        match key {
            "dram_t_read_ns" => set!(self.device.dram.t_read_ns, f64),
            "dram_t_write_ns" => set!(self.device.dram.t_write_ns, f64),
            "dram_e_read_nj" => set!(self.device.dram.e_read_nj, f64),
            "dram_e_write_nj" => set!(self.device.dram.e_write_nj, f64),
            "dram_static_j_per_gb_s" => set!(self.device.dram.static_j_per_gb_s, f64),
            "nvm_t_read_ns" => set!(self.device.nvm.t_read_ns, f64),
            "nvm_t_write_ns" => set!(self.device.nvm.t_write_ns, f64),
            "nvm_e_read_nj" => set!(self.device.nvm.e_read_nj, f64),
            "nvm_e_write_nj" => set!(self.device.nvm.e_write_nj, f64),
            "nvm_static_j_per_gb_s" => set!(self.device.nvm.static_j_per_gb_s, f64),
            "t_disk_ns" => set!(self.device.t_disk_ns, f64),
            "page_size" => set!(self.layout.page_size, u64),
            "mem_fraction" => set!(self.layout.mem_fraction, f64),
            "dram_fraction" => set!(self.layout.dram_fraction, f64),
            "page_factor" => set!(self.layout.page_factor, u64),
            "dram_pages" => {
                let v = value.parse::<u64>().map_err(|_| ConfigError::BadValue {
                    key: key.to_string(),
                    value: value.to_string(),
                    line,
                })?;
                self.layout.dram_pages = Some(v);
            }
            "nvm_pages" => {
                let v = value.parse::<u64>().map_err(|_| ConfigError::BadValue {
                    key: key.to_string(),
                    value: value.to_string(),
                    line,
                })?;
                self.layout.nvm_pages = Some(v);
            }
            "readperc" => set!(self.params.readperc, f64),
            "writeperc" => set!(self.params.writeperc, f64),
            "read_threshold" => self.params.read_threshold = parse_threshold(value, key, line)?,
            "write_threshold" => self.params.write_threshold = parse_threshold(value, key, line)?,
            "policy" => {
                self.policy = value.parse().map_err(|_| ConfigError::BadValue {
                    key: key.to_string(),
                    value: value.to_string(),
                    line,
                })?;
            }
            "requests_per_second" => {
                let v = value.parse::<f64>().map_err(|_| ConfigError::BadValue {
                    key: key.to_string(),
                    value: value.to_string(),
                    line,
                })?;
                self.requests_per_second = Some(v);
            }
            other => {
                return Err(ConfigError::UnknownKey {
                    key: other.to_string(),
                    line,
                })
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let inv = |key: &str, why: &str| {
            Err(ConfigError::Invariant {
                key: key.to_string(),
                why: why.to_string(),
            })
        };
        for (tier, p) in [("dram", &self.device.dram), ("nvm", &self.device.nvm)] {
            if p.t_read_ns <= 0.0 || p.t_write_ns <= 0.0 {
                return inv(tier, "latencies must be strictly positive");
            }
            if p.e_read_nj <= 0.0 || p.e_write_nj <= 0.0 {
                return inv(tier, "energies must be strictly positive");
            }
            if p.static_j_per_gb_s < 0.0 {
                return inv(tier, "static power must be non-negative");
            }
        }
        let max_mem_latency = self
            .device
            .dram
            .t_read_ns
            .max(self.device.dram.t_write_ns)
            .max(self.device.nvm.t_read_ns)
            .max(self.device.nvm.t_write_ns);
        if self.device.t_disk_ns < max_mem_latency {
            return inv("t_disk_ns", "must be >= the largest memory latency");
        }
        if self.layout.page_size == 0 {
            return inv("page_size", "must be >= 1");
        }
        if !(self.layout.mem_fraction > 0.0 && self.layout.mem_fraction <= 1.0) {
            return inv("mem_fraction", "must be in (0, 1]");
        }
        if !(self.layout.dram_fraction > 0.0 && self.layout.dram_fraction < 1.0) {
            return inv("dram_fraction", "must be in (0, 1)");
        }
        if self.layout.page_factor == 0 {
            return inv("page_factor", "must be >= 1");
        }
        if !(self.params.readperc > 0.0 && self.params.readperc <= self.params.writeperc) {
            return inv("readperc", "need 0 < readperc <= writeperc");
        }
        if self.params.writeperc > 1.0 {
            return inv("writeperc", "must be <= 1");
        }
        if self.params.read_threshold == 0 || self.params.write_threshold == 0 {
            return inv("read_threshold", "thresholds must be >= 1");
        }
        if let Some(rps) = self.requests_per_second {
            if rps <= 0.0 {
                return inv("requests_per_second", "must be strictly positive");
            }
        }
        Ok(())
    }

    /// Renders the resolved config as config-file text; reparsing it yields
    /// an identical configuration.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let d = &self.device;
        let mut push = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        push("policy", self.policy.to_string());
        push("dram_t_read_ns", d.dram.t_read_ns.to_string());
        push("dram_t_write_ns", d.dram.t_write_ns.to_string());
        push("dram_e_read_nj", d.dram.e_read_nj.to_string());
        push("dram_e_write_nj", d.dram.e_write_nj.to_string());
        push(
            "dram_static_j_per_gb_s",
            d.dram.static_j_per_gb_s.to_string(),
        );
        push("nvm_t_read_ns", d.nvm.t_read_ns.to_string());
        push("nvm_t_write_ns", d.nvm.t_write_ns.to_string());
        push("nvm_e_read_nj", d.nvm.e_read_nj.to_string());
        push("nvm_e_write_nj", d.nvm.e_write_nj.to_string());
        push("nvm_static_j_per_gb_s", d.nvm.static_j_per_gb_s.to_string());
        push("t_disk_ns", d.t_disk_ns.to_string());
        push("page_size", self.layout.page_size.to_string());
        push("mem_fraction", self.layout.mem_fraction.to_string());
        push("dram_fraction", self.layout.dram_fraction.to_string());
        push("page_factor", self.layout.page_factor.to_string());
        if let Some(v) = self.layout.dram_pages {
            push("dram_pages", v.to_string());
        }
        if let Some(v) = self.layout.nvm_pages {
            push("nvm_pages", v.to_string());
        }
        push("readperc", self.params.readperc.to_string());
        push("writeperc", self.params.writeperc.to_string());
        push(
            "read_threshold",
            threshold_string(self.params.read_threshold),
        );
        push(
            "write_threshold",
            threshold_string(self.params.write_threshold),
        );
        if let Some(v) = self.requests_per_second {
            push("requests_per_second", v.to_string());
        }
        s
    }
}

fn parse_threshold(value: &str, key: &str, line: usize) -> Result<u64, ConfigError> {
    if value == "inf" {
        return Ok(THRESHOLD_INF);
    }
    value.parse::<u64>().map_err(|_| ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
        line,
    })
}

fn threshold_string(v: u64) -> String {
    if v == THRESHOLD_INF {
        "inf".to_string()
    } else {
        v.to_string()
    }
}

/// Derived per-tier capacities in pages.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Capacities {
    pub dram_pages: u64,
    pub nvm_pages: u64,
}

impl Capacities {
    pub fn total(&self) -> u64 {
        self.dram_pages + self.nvm_pages
    }
}

/// Sizes the two tiers from the trace footprint.
///
/// Total memory is `max(2, ceil(mem_fraction * distinct_pages))`; DRAM gets
/// `max(1, ceil(dram_fraction * total))` of it and NVM the rest. Explicit
/// page-count overrides win where present.
pub fn derive_capacities(
    distinct_pages: u64,
    layout: &LayoutConfig,
) -> Result<Capacities, ConfigError> {
    if distinct_pages == 0 {
        return Err(ConfigError::Capacity(
            "trace touches no pages; cannot size memory".to_string(),
        ));
    }
    let total = ((layout.mem_fraction * distinct_pages as f64).ceil() as u64).max(2);
    let derived_dram = ((layout.dram_fraction * total as f64).ceil() as u64).max(1);
    let (dram, nvm) = match (layout.dram_pages, layout.nvm_pages) {
        (Some(d), Some(n)) => (d, n),
        (Some(d), None) => (d, total.saturating_sub(d)),
        (None, Some(n)) => (total.saturating_sub(n), n),
        (None, None) => (derived_dram, total - derived_dram),
    };
    if dram == 0 || nvm == 0 {
        return Err(ConfigError::Capacity(format!(
            "both tiers must exist (got dram={dram}, nvm={nvm} pages)"
        )));
    }
    Ok(Capacities {
        dram_pages: dram,
        nvm_pages: nvm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_config_yields_documented_defaults() {
        let cfg = SimConfig::parse("").unwrap();
        assert_eq!(cfg.device.dram.t_read_ns, 50.0);
        assert_eq!(cfg.device.nvm.t_write_ns, 350.0);
        assert_eq!(cfg.device.nvm.e_write_nj, 32.0);
        assert_eq!(cfg.device.t_disk_ns, 5_000_000.0);
        assert_eq!(cfg.layout.page_size, 4096);
        assert_eq!(cfg.layout.mem_fraction, 0.75);
        assert_eq!(cfg.layout.dram_fraction, 0.10);
        assert_eq!(cfg.layout.page_factor, 64);
        assert_eq!(cfg.params.readperc, 0.2);
        assert_eq!(cfg.params.writeperc, 0.4);
        assert_eq!(cfg.params.read_threshold, 4);
        assert_eq!(cfg.params.write_threshold, 8);
        assert_eq!(cfg.policy, PolicyKind::TwoLru);
    }

    #[test]
    fn zero_dram_fraction_is_rejected() {
        let err = SimConfig::parse("dram_fraction = 0\n").unwrap_err();
        assert!(matches!(err, ConfigError::Invariant { ref key, .. } if key == "dram_fraction"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = SimConfig::parse("dram_fractoin = 0.2\n").unwrap_err();
        assert!(
            matches!(err, ConfigError::UnknownKey { ref key, line: 1 } if key == "dram_fractoin")
        );
    }

    #[test]
    fn thresholds_accept_inf() {
        let cfg = SimConfig::parse("read_threshold = inf\nwrite_threshold = inf\n").unwrap();
        assert_eq!(cfg.params.read_threshold, THRESHOLD_INF);
        assert_eq!(cfg.params.write_threshold, THRESHOLD_INF);
    }

    #[test]
    fn default_capacity_split() {
        let caps = derive_capacities(1000, &LayoutConfig::default()).unwrap();
        assert_eq!(caps.dram_pages, 75);
        assert_eq!(caps.nvm_pages, 675);
        assert_eq!(caps.total(), 750);
    }

    #[test]
    fn single_page_footprint_gets_minimum_memory() {
        let caps = derive_capacities(1, &LayoutConfig::default()).unwrap();
        assert_eq!(caps.dram_pages, 1);
        assert_eq!(caps.nvm_pages, 1);
    }

    #[test]
    fn dram_override_takes_rest_from_nvm() {
        let layout = LayoutConfig {
            dram_pages: Some(100),
            ..LayoutConfig::default()
        };
        let caps = derive_capacities(1000, &layout).unwrap();
        assert_eq!(caps.dram_pages, 100);
        assert_eq!(caps.nvm_pages, 650);
    }

    #[test]
    fn overrides_that_empty_a_tier_fail() {
        let layout = LayoutConfig {
            dram_pages: Some(800),
            ..LayoutConfig::default()
        };
        assert!(derive_capacities(1000, &layout).is_err());
        let layout = LayoutConfig {
            dram_pages: Some(1),
            nvm_pages: Some(0),
            ..LayoutConfig::default()
        };
        assert!(derive_capacities(1000, &layout).is_err());
    }

    #[test]
    fn config_round_trips_through_text() {
        let mut cfg = SimConfig::parse("nvm_e_write_nj = 17.5\npolicy = clock_dwf\n").unwrap();
        cfg.layout.dram_pages = Some(12);
        cfg.requests_per_second = Some(1e6);
        let text = cfg.to_config_string();
        let reparsed = SimConfig::parse(&text).unwrap();
        assert_eq!(cfg, reparsed);
    }

    #[test]
    fn readperc_must_not_exceed_writeperc() {
        assert!(SimConfig::parse("readperc = 0.5\nwriteperc = 0.3\n").is_err());
    }

    #[test]
    fn region_sizes_round_up_and_stay_in_bounds() {
        let params = PolicyParams::default();
        assert_eq!(params.region_sizes(10), (2, 4));
        // Tiny queues still track at least one position.
        assert_eq!(params.region_sizes(1), (1, 1));
        let full = PolicyParams {
            readperc: 1.0,
            writeperc: 1.0,
            ..params
        };
        assert_eq!(full.region_sizes(7), (7, 7));
    }

    proptest! {
        // No pages are lost to rounding: dram + nvm always equals the total.
        #[test]
        fn split_conserves_total(distinct in 1u64..100_000,
                                 memf in 0.01f64..1.0,
                                 dramf in 0.01f64..0.99) {
            let layout = LayoutConfig {
                mem_fraction: memf,
                dram_fraction: dramf,
                ..LayoutConfig::default()
            };
            if let Ok(caps) = derive_capacities(distinct, &layout) {
                let total = ((memf * distinct as f64).ceil() as u64).max(2);
                prop_assert_eq!(caps.dram_pages + caps.nvm_pages, total);
            }
        }
    }
}
