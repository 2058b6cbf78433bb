//! The line-delimited report format and its derived CSV table.
//!
//! A report is a fixed sequence of `key: value` lines followed by three
//! sections introduced by `clusters:`, `updates:` and `config:`. The field
//! order is part of the format; the config section is the verbatim block the
//! run was configured with. CSV is derived from reports, never primary.

use anyhow::{bail, Context, Result};

pub const REPORT_HEADER: &str = "occ-report 1";

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub instance: String,
    pub n: usize,
    pub algorithm: String,
    /// Branch taken by the mixed algorithm; "-" otherwise.
    pub branch: String,
    pub seed: u64,
    pub profit: u64,
    pub cost: u64,
    pub opt_profit: u64,
    pub opt_cost: u64,
    pub opt_exact: bool,
    pub profit_ratio: f64,
    pub cost_ratio: f64,
    pub elapsed_ms: f64,
    /// Final clustering, one line per cluster.
    pub clusters: String,
    /// Per-update diagnostics (dense runs only).
    pub updates: Vec<String>,
    /// Verbatim config block.
    pub config: String,
}

/// Ratio pair from raw scores. The cost ratio divides by max(1, opt_cost) so
/// perfect instances stay finite; the raw pair is always stored alongside.
pub fn ratios(profit: u64, cost: u64, opt_profit: u64, opt_cost: u64) -> (f64, f64) {
    let profit_ratio = if opt_profit == 0 {
        1.0
    } else {
        profit as f64 / opt_profit as f64
    };
    let cost_ratio = cost as f64 / opt_cost.max(1) as f64;
    (profit_ratio, cost_ratio)
}

impl Report {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(REPORT_HEADER);
        out.push('\n');
        out.push_str(&format!("instance: {}\n", self.instance));
        out.push_str(&format!("n: {}\n", self.n));
        out.push_str(&format!("algorithm: {}\n", self.algorithm));
        out.push_str(&format!("branch: {}\n", self.branch));
        out.push_str(&format!("seed: {}\n", self.seed));
        out.push_str(&format!("profit: {}\n", self.profit));
        out.push_str(&format!("cost: {}\n", self.cost));
        out.push_str(&format!("opt_profit: {}\n", self.opt_profit));
        out.push_str(&format!("opt_cost: {}\n", self.opt_cost));
        out.push_str(&format!("opt_exact: {}\n", self.opt_exact));
        out.push_str(&format!("profit_ratio: {}\n", self.profit_ratio));
        out.push_str(&format!("cost_ratio: {}\n", self.cost_ratio));
        out.push_str(&format!("elapsed_ms: {}\n", self.elapsed_ms));
        out.push_str("clusters:\n");
        out.push_str(&self.clusters);
        out.push_str("updates:\n");
        for line in &self.updates {
            out.push_str(line);
            out.push('\n');
        }
        out.push_str("config:\n");
        out.push_str(&self.config);
        if !self.config.is_empty() && !self.config.ends_with('\n') {
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Report> {
        let mut lines = text.lines();
        let header = lines.next().context("empty report")?;
        if header != REPORT_HEADER {
            bail!("not a report: first line is {header:?}");
        }

        let mut fields: Vec<(String, String)> = Vec::new();
        let mut section = String::new();
        for line in lines.by_ref() {
            if let Some(name) = line.strip_suffix(':') {
                if ["clusters", "updates", "config"].contains(&name) {
                    section = name.to_string();
                    break;
                }
            }
            let (key, value) = line
                .split_once(": ")
                .or_else(|| line.split_once(':'))
                .with_context(|| format!("malformed field line {line:?}"))?;
            fields.push((key.to_string(), value.trim().to_string()));
        }
        let get = |key: &str| -> Result<&str> {
            fields
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
                .with_context(|| format!("missing field {key:?}"))
        };

        let mut clusters = String::new();
        let mut updates = Vec::new();
        let mut config = String::new();
        for line in lines {
            if let Some(name) = line.strip_suffix(':') {
                if ["clusters", "updates", "config"].contains(&name) {
                    section = name.to_string();
                    continue;
                }
            }
            match section.as_str() {
                "clusters" => {
                    clusters.push_str(line);
                    clusters.push('\n');
                }
                "updates" => updates.push(line.to_string()),
                "config" => {
                    config.push_str(line);
                    config.push('\n');
                }
                _ => bail!("content outside any section: {line:?}"),
            }
        }

        let report = Report {
            instance: get("instance")?.to_string(),
            n: get("n")?.parse().context("n")?,
            algorithm: get("algorithm")?.to_string(),
            branch: get("branch")?.to_string(),
            seed: get("seed")?.parse().context("seed")?,
            profit: get("profit")?.parse().context("profit")?,
            cost: get("cost")?.parse().context("cost")?,
            opt_profit: get("opt_profit")?.parse().context("opt_profit")?,
            opt_cost: get("opt_cost")?.parse().context("opt_cost")?,
            opt_exact: get("opt_exact")?.parse().context("opt_exact")?,
            profit_ratio: get("profit_ratio")?.parse().context("profit_ratio")?,
            cost_ratio: get("cost_ratio")?.parse().context("cost_ratio")?,
            elapsed_ms: get("elapsed_ms")?.parse().context("elapsed_ms")?,
            clusters,
            updates,
            config,
        };

        // Stored ratios must equal the quotient of the embedded scores.
        let (profit_ratio, cost_ratio) =
            ratios(report.profit, report.cost, report.opt_profit, report.opt_cost);
        if profit_ratio != report.profit_ratio || cost_ratio != report.cost_ratio {
            bail!(
                "stored ratios ({}, {}) disagree with embedded scores ({}, {})",
                report.profit_ratio,
                report.cost_ratio,
                profit_ratio,
                cost_ratio
            );
        }
        Ok(report)
    }
}

pub const CSV_HEADER: &str =
    "instance,algorithm,n,profit,opt_profit,ratio,cost,opt_cost,cost_ratio,seed,ms";

fn csv_escape(field: &str) -> String {
    if field.contains(',') || field.contains('"') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

pub fn csv_row(report: &Report) -> String {
    format!(
        "{},{},{},{},{},{:.12},{},{},{:.12},{},{:.3}",
        csv_escape(&report.instance),
        report.algorithm,
        report.n,
        report.profit,
        report.opt_profit,
        report.profit_ratio,
        report.cost,
        report.opt_cost,
        report.cost_ratio,
        report.seed,
        report.elapsed_ms,
    )
}

/// FNV-1a over the instance bytes; short, stable fingerprint for descriptors.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}
