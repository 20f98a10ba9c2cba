//! Report shapes and their three renderings. Every report opens with the
//! artifact version, the seed, and the effective config, so a run can be
//! reproduced from its own output; nothing in a body depends on wall time.

use serde::Serialize;

use crate::input::{InputFormat, StateSpec};
use crate::NoiseArg;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Human,
    Json,
    Csv,
}

pub trait Render: Serialize {
    fn human(&self) -> String;
    fn csv(&self) -> String;

    fn render(&self, format: Format) -> String {
        match format {
            Format::Human => self.human(),
            Format::Csv => self.csv(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serializes");
                s.push('\n');
                s
            }
        }
    }
}

fn meta(command: &str, seed: u64, config_line: &str) -> String {
    format!(
        "# pauliplan {} {command}\n# seed {seed}\n# {config_line}\n",
        crate::VERSION
    )
}

fn noise_label(noise: &Option<NoiseArg>) -> String {
    match noise {
        None => "none".into(),
        Some(n) => format!("{},{},{},{}", n.p1, n.p2, n.p10, n.p01),
    }
}

// ---------------------------------------------------------------- group

#[derive(Serialize)]
pub struct GroupReport {
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub config: GroupConfig,
    pub methods: Vec<MethodCount>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clique: Option<Vec<CliqueBound>>,
}

#[derive(Serialize)]
pub struct GroupConfig {
    pub input: String,
    pub format: InputFormat,
    pub method: String,
    pub terms: usize,
    pub qubits: usize,
}

#[derive(Serialize)]
pub struct MethodCount {
    pub method: String,
    pub groups: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<Vec<GroupDetail>>,
}

#[derive(Serialize)]
pub struct GroupDetail {
    pub members: Vec<usize>,
    pub terms: Vec<String>,
    pub layout: Vec<String>,
}

#[derive(Serialize)]
pub struct CliqueBound {
    pub graph: String,
    pub size: usize,
    pub exact: bool,
}

impl GroupReport {
    fn config_line(&self) -> String {
        let c = &self.config;
        format!(
            "input={} format={} method={} terms={} qubits={}",
            c.input,
            c.format.name(),
            c.method,
            c.terms,
            c.qubits
        )
    }
}

impl Render for GroupReport {
    fn human(&self) -> String {
        let mut out = meta(self.command, self.seed, &self.config_line());
        let width = self
            .methods
            .iter()
            .map(|m| m.method.len())
            .max()
            .unwrap_or(6)
            .max("method".len());
        out.push_str(&format!("{:<width$}  groups\n", "method"));
        for m in &self.methods {
            out.push_str(&format!("{:<width$}  {:>6}\n", m.method, m.groups));
            if let Some(detail) = &m.detail {
                for (i, g) in detail.iter().enumerate() {
                    let layout = if g.layout.is_empty() {
                        "(no circuit)".to_string()
                    } else {
                        g.layout.join(" ")
                    };
                    out.push_str(&format!(
                        "  group {i}: terms {:?} = {} | {layout}\n",
                        g.members,
                        g.terms.join(" ")
                    ));
                }
            }
        }
        if let Some(bounds) = &self.clique {
            for b in bounds {
                let tag = if b.exact { "exact" } else { "lower bound, time limit hit" };
                out.push_str(&format!("clique {} graph: {} ({tag})\n", b.graph, b.size));
            }
        }
        out
    }

    fn csv(&self) -> String {
        let mut out = meta(self.command, self.seed, &self.config_line());
        if let Some(bounds) = &self.clique {
            for b in bounds {
                out.push_str(&format!(
                    "# clique graph={} size={} exact={}\n",
                    b.graph, b.size, b.exact
                ));
            }
        }
        out.push_str("method,groups\n");
        for m in &self.methods {
            out.push_str(&format!("{},{}\n", m.method, m.groups));
        }
        out
    }
}

// ------------------------------------------------------------- estimate

#[derive(Serialize)]
pub struct EstimateConfig {
    pub input: String,
    pub format: InputFormat,
    pub method: String,
    pub state: StateSpec,
    pub shots: u64,
    pub allocation: &'static str,
    pub mitigate: bool,
    pub noise: Option<NoiseArg>,
}

#[derive(Serialize)]
pub struct SingleEstimateReport {
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub config: EstimateConfig,
    pub value: f64,
    pub standard_error: f64,
    pub mitigated: bool,
    pub groups: Vec<GroupRow>,
}

#[derive(Serialize)]
pub struct GroupRow {
    pub group: usize,
    pub terms: usize,
    pub shots: u64,
    pub estimate: f64,
    pub sample_variance: f64,
}

impl EstimateConfig {
    fn line(&self) -> String {
        format!(
            "input={} format={} method={} state={} shots={} allocation={} mitigate={} noise={}",
            self.input,
            self.format.name(),
            self.method,
            self.state,
            self.shots,
            self.allocation,
            self.mitigate,
            noise_label(&self.noise)
        )
    }
}

impl Render for SingleEstimateReport {
    fn human(&self) -> String {
        let mut out = meta(self.command, self.seed, &self.config.line());
        out.push_str(&format!("value          {:.6}\n", self.value));
        out.push_str(&format!("standard error {:.6}\n", self.standard_error));
        out.push_str(&format!("mitigated      {}\n", self.mitigated));
        out.push_str("group  terms  shots  estimate  sample variance\n");
        for g in &self.groups {
            out.push_str(&format!(
                "{:>5}  {:>5}  {:>5}  {:>8.4}  {:.6}\n",
                g.group, g.terms, g.shots, g.estimate, g.sample_variance
            ));
        }
        out
    }

    fn csv(&self) -> String {
        let mut out = meta(self.command, self.seed, &self.config.line());
        out.push_str(&format!(
            "# value={} standard_error={} mitigated={}\n",
            self.value, self.standard_error, self.mitigated
        ));
        out.push_str("group,terms,shots,estimate,sample_variance\n");
        for g in &self.groups {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                g.group, g.terms, g.shots, g.estimate, g.sample_variance
            ));
        }
        out
    }
}

// ---------------------------------------------------------------- sweep

#[derive(Serialize)]
pub struct SweepReport {
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub config: EstimateConfig,
    pub p2_values: Vec<f64>,
    pub rows: Vec<SweepRow>,
}

#[derive(Serialize)]
pub struct SweepRow {
    pub p2: f64,
    pub method: String,
    pub mitigated: bool,
    pub value: f64,
    pub standard_error: f64,
}

impl Render for SweepReport {
    fn human(&self) -> String {
        let mut out = meta(self.command, self.seed, &self.config.line());
        // Grid shape: one column per two-qubit error rate, one row per
        // method x raw/mit.
        let mut labels: Vec<String> = Vec::new();
        for r in &self.rows {
            let label = format!("{} ({})", r.method, if r.mitigated { "mit" } else { "raw" });
            if !labels.contains(&label) {
                labels.push(label);
            }
        }
        let width = labels
            .iter()
            .map(|l| l.len())
            .max()
            .unwrap_or(0)
            .max("two-qubit error".len());
        out.push_str(&format!("{:<width$}", "two-qubit error"));
        for p2 in &self.p2_values {
            out.push_str(&format!("  {:>14.3}", p2));
        }
        out.push('\n');
        for label in &labels {
            out.push_str(&format!("{label:<width$}"));
            for p2 in &self.p2_values {
                let row = self
                    .rows
                    .iter()
                    .find(|r| {
                        r.p2 == *p2
                            && format!("{} ({})", r.method, if r.mitigated { "mit" } else { "raw" })
                                == *label
                    })
                    .expect("every cell filled");
                let cell = format!("{:.3}±{:.3}", row.value, row.standard_error);
                out.push_str(&format!("  {cell:>14}"));
            }
            out.push('\n');
        }
        out
    }

    fn csv(&self) -> String {
        let mut out = meta(self.command, self.seed, &self.config.line());
        out.push_str("p2,method,mitigated,value,standard_error\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.p2, r.method, r.mitigated, r.value, r.standard_error
            ));
        }
        out
    }
}

// ------------------------------------------------------------- variance

#[derive(Serialize)]
pub struct VarianceReport {
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub config: VarianceConfig,
    pub mean_squared_se_ungrouped: f64,
    pub mean_squared_se_grouped: f64,
    pub inequality_violations: u64,
    pub histogram: Vec<HistogramRow>,
}

#[derive(Serialize)]
pub struct VarianceConfig {
    pub states: u64,
    pub shots_per_pauli: u64,
    pub singlet: bool,
}

#[derive(Serialize)]
pub struct HistogramRow {
    pub bin_low: f64,
    pub bin_high: f64,
    pub ungrouped: u64,
    pub grouped: u64,
}

impl VarianceReport {
    fn config_line(&self) -> String {
        format!(
            "states={} shots_per_pauli={} singlet={}",
            self.config.states, self.config.shots_per_pauli, self.config.singlet
        )
    }
}

impl Render for VarianceReport {
    fn human(&self) -> String {
        let mut out = meta(self.command, self.seed, &self.config_line());
        out.push_str(&format!(
            "mean squared standard error, per-pauli plan: {:.6}\n",
            self.mean_squared_se_ungrouped
        ));
        out.push_str(&format!(
            "mean squared standard error, grouped plan:   {:.6}\n",
            self.mean_squared_se_grouped
        ));
        out.push_str(&format!(
            "states violating grouped <= ungrouped: {}\n",
            self.inequality_violations
        ));
        out
    }

    fn csv(&self) -> String {
        let mut out = meta(self.command, self.seed, &self.config_line());
        out.push_str(&format!(
            "# mean_squared_se_ungrouped={} mean_squared_se_grouped={} violations={}\n",
            self.mean_squared_se_ungrouped, self.mean_squared_se_grouped,
            self.inequality_violations
        ));
        out.push_str("bin_low,bin_high,ungrouped,grouped\n");
        for b in &self.histogram {
            out.push_str(&format!(
                "{},{},{},{}\n",
                b.bin_low, b.bin_high, b.ungrouped, b.grouped
            ));
        }
        out
    }
}

// ------------------------------------------------------------------ vqe

#[derive(Serialize)]
pub struct VqeReport {
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub config: VqeConfig,
    pub group_count: usize,
    pub circuits_total: u64,
    pub recalibrations: u64,
    pub final_mean_energy: f64,
    pub final_params: Vec<f64>,
    pub records: Vec<VqeRow>,
}

#[derive(Serialize)]
pub struct VqeConfig {
    pub input: String,
    pub format: InputFormat,
    pub method: String,
    pub iterations: usize,
    pub depth: usize,
    pub shots: u64,
    pub mitigate: bool,
    pub noise: Option<NoiseArg>,
    pub gain_a: Option<f64>,
    pub recalibrate_every: usize,
}

#[derive(Serialize)]
pub struct VqeRow {
    pub iteration: usize,
    pub circuits: u64,
    pub energy_plus: f64,
    pub energy_minus: f64,
    pub mean: f64,
}

impl VqeConfig {
    fn line(&self) -> String {
        let gain = match self.gain_a {
            None => "auto".to_string(),
            Some(a) => a.to_string(),
        };
        format!(
            "input={} format={} method={} iterations={} depth={} shots={} mitigate={} noise={} gain_a={} recalibrate_every={}",
            self.input,
            self.format.name(),
            self.method,
            self.iterations,
            self.depth,
            self.shots,
            self.mitigate,
            noise_label(&self.noise),
            gain,
            self.recalibrate_every
        )
    }
}

impl Render for VqeReport {
    fn human(&self) -> String {
        let mut out = meta(self.command, self.seed, &self.config.line());
        out.push_str(&format!("groups             {}\n", self.group_count));
        out.push_str(&format!("circuits executed  {}\n", self.circuits_total));
        out.push_str(&format!("recalibrations     {}\n", self.recalibrations));
        out.push_str(&format!("final mean energy  {:.6}\n", self.final_mean_energy));
        let params: Vec<String> = self.final_params.iter().map(|p| format!("{p:.6}")).collect();
        out.push_str(&format!("final parameters   [{}]\n", params.join(", ")));
        out
    }

    fn csv(&self) -> String {
        let mut out = meta(self.command, self.seed, &self.config.line());
        out.push_str(&format!(
            "# groups={} circuits={} recalibrations={} final_mean_energy={}\n",
            self.group_count, self.circuits_total, self.recalibrations, self.final_mean_energy
        ));
        out.push_str("iteration,circuits,energy_plus,energy_minus,mean\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.iteration, r.circuits, r.energy_plus, r.energy_minus, r.mean
            ));
        }
        out
    }
}
