//! Experiment harness: named experiments driven by a flat config, written
//! as comma-delimited tables with `#` header comments.
//!
//! Result files are byte-identical for identical configs. Wall-clock time
//! would break that, so it goes to a sidecar `<output>.time` file that the
//! result header points to.

mod config;
mod experiments;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use crate::error::Result;

pub use config::{ExperimentConfig, LambdaSpec, KEYS, MAX_EXPONENT};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    CarlesonDelta,
    PkDecay,
    QkDecay,
    Concentration,
    AjApprox,
    SparseCert,
    Weights,
    Sobolev,
    Tails,
    Lemma43,
}

impl Experiment {
    pub const ALL: [Experiment; 10] = [
        Experiment::CarlesonDelta,
        Experiment::PkDecay,
        Experiment::QkDecay,
        Experiment::Concentration,
        Experiment::AjApprox,
        Experiment::SparseCert,
        Experiment::Weights,
        Experiment::Sobolev,
        Experiment::Tails,
        Experiment::Lemma43,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::CarlesonDelta => "carleson-delta",
            Experiment::PkDecay => "pk-decay",
            Experiment::QkDecay => "qk-decay",
            Experiment::Concentration => "concentration",
            Experiment::AjApprox => "aj-approx",
            Experiment::SparseCert => "sparse-cert",
            Experiment::Weights => "weights",
            Experiment::Sobolev => "sobolev",
            Experiment::Tails => "tails",
            Experiment::Lemma43 => "lemma43",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Experiment::CarlesonDelta => "maximal Carleson operator on a point mass against 1/|n|",
            Experiment::PkDecay => "decay in k of the P_k block multiplier and its derivative",
            Experiment::QkDecay => "Q_k block multipliers and the martingale square function",
            Experiment::Concentration => "deviation of selector counts from their means",
            Experiment::AjApprox => "A_j coefficients against the Dirichlet-kernel approximation",
            Experiment::SparseCert => "sparse domination certificates for maximal operators",
            Experiment::Weights => "A_p and reverse Hölder characteristics and weighted norm ratios",
            Experiment::Sobolev => "Sobolev-type maximal bound over a sparse frequency set",
            Experiment::Tails => "sub-Gaussian tail of a martingale block sum",
            Experiment::Lemma43 => "log(1/ε) growth of the skeleton maximal bound",
        }
    }

    /// Short tag of the statement the experiment probes.
    pub fn anchor(self) -> &'static str {
        match self {
            Experiment::CarlesonDelta => "kernel-identity",
            Experiment::PkDecay => "block-symbol-decay",
            Experiment::QkDecay => "martingale-square-function",
            Experiment::Concentration => "selector-concentration",
            Experiment::AjApprox => "hitting-block-approximation",
            Experiment::SparseCert => "sparse-domination",
            Experiment::Weights => "weighted-inequality",
            Experiment::Sobolev => "sobolev-maximal",
            Experiment::Tails => "subgaussian-tail",
            Experiment::Lemma43 => "skeleton-maximal-log-bound",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        Experiment::ALL.iter().copied().find(|e| e.name() == s).ok_or(())
    }
}

/// One line per registry entry: `name<TAB>anchor<TAB>description`.
pub fn list_experiments() -> String {
    Experiment::ALL
        .iter()
        .map(|e| format!("{}\t{}\t{}\n", e.name(), e.anchor(), e.description()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Below,
    AtMost,
    AtLeast,
}

impl Relation {
    fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Relation::Below => value < threshold,
            Relation::AtMost => value <= threshold,
            Relation::AtLeast => value >= threshold,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Relation::Below => "<",
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
        }
    }
}

/// A measured value compared against a threshold. NaN never passes.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub threshold: f64,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, relation: Relation, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            relation,
            threshold,
        }
    }

    pub fn passed(&self) -> bool {
        self.relation.holds(self.value, self.threshold)
    }
}

/// Output of one experiment before rendering.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub columns: Vec<String>,
    pub rows: Vec<String>,
    pub metrics: Vec<(String, String)>,
    pub checks: Vec<Check>,
}

impl Report {
    fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Self::default()
        }
    }

    fn row(&mut self, fields: &[String]) {
        self.rows.push(fields.join(","));
    }

    fn metric(&mut self, name: &str, value: impl fmt::Display) {
        self.metrics.push((name.to_string(), value.to_string()));
    }

    fn check(&mut self, name: &str, value: f64, relation: Relation, threshold: f64) {
        self.checks.push(Check::new(name, value, relation, threshold));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

/// Runs the experiment in memory.
pub fn execute(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    experiments::run(cfg)
}

fn timing_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".time");
    out.with_file_name(name)
}

/// The full result file: header, table, checks and the summary line.
pub fn render(cfg: &ExperimentConfig, report: &Report) -> String {
    let out = cfg.output_path();
    let mut s = String::new();
    s += &format!("# experiment = {}\n", cfg.experiment.name());
    s += &format!("# anchor = {}\n", cfg.experiment.anchor());
    s += &format!("# version = {VERSION}\n");
    s += &format!("# seed = {}\n", cfg.seed);
    s += &format!(
        "# wall_clock = {}\n",
        timing_path(&out).file_name().unwrap_or_default().to_string_lossy()
    );
    for line in cfg.to_text().lines() {
        s += &format!("# config {line}\n");
    }
    for (k, v) in &report.metrics {
        s += &format!("# metric {k} = {v}\n");
    }
    s += &report.columns.join(",");
    s.push('\n');
    for r in &report.rows {
        s += r;
        s.push('\n');
    }
    for c in &report.checks {
        s += &format!(
            "# check {} = {} {} {} {}\n",
            c.name,
            c.value,
            c.relation.symbol(),
            c.threshold,
            if c.passed() { "PASS" } else { "FAIL" }
        );
    }
    s += &format!("# summary = {}\n", if report.passed() { "PASS" } else { "FAIL" });
    s
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub output: PathBuf,
    pub passed: bool,
    pub report: Report,
    pub seconds: f64,
}

/// Runs an experiment and writes its result file and timing sidecar.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let start = Instant::now();
    let report = execute(cfg)?;
    let output = cfg.output_path();
    write_atomic(&output, &render(cfg, &report))?;
    let seconds = start.elapsed().as_secs_f64();
    write_atomic(&timing_path(&output), &format!("wall_clock_seconds = {seconds:.3}\n"))?;
    Ok(RunOutcome {
        passed: report.passed(),
        output,
        report,
        seconds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_is_complete_and_stable() {
        let listing = list_experiments();
        let names: Vec<&str> = listing.lines().map(|l| l.split('\t').next().unwrap()).collect();
        assert_eq!(
            names,
            [
                "carleson-delta",
                "pk-decay",
                "qk-decay",
                "concentration",
                "aj-approx",
                "sparse-cert",
                "weights",
                "sobolev",
                "tails",
                "lemma43"
            ]
        );
        assert!(listing.lines().all(|l| l.split('\t').count() == 3));
        assert_eq!(listing, list_experiments());
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>(), Ok(e));
        }
    }

    #[test]
    fn nan_checks_fail() {
        assert!(!Check::new("x", f64::NAN, Relation::AtMost, 1.0).passed());
        assert!(!Check::new("x", f64::NAN, Relation::AtLeast, 1.0).passed());
        assert!(Check::new("x", 1.0, Relation::AtMost, 1.0).passed());
        assert!(!Check::new("x", 1.0, Relation::Below, 1.0).passed());
    }

    #[test]
    fn render_layout() {
        let mut cfg = ExperimentConfig::new(Experiment::Tails);
        cfg.output_path = "out/t.csv".into();
        let mut rep = Report::new(&["a", "b"]);
        rep.row(&["1".into(), "2".into()]);
        rep.metric("m", 0.5);
        rep.check("c", 0.1, Relation::Below, 0.05);
        let text = render(&cfg, &rep);
        assert!(text.contains("# wall_clock = t.csv.time\n"));
        assert!(text.contains("# config alpha = 0.5\n"));
        assert!(text.contains("a,b\n1,2\n"));
        assert!(text.contains("# check c = 0.1 < 0.05 FAIL\n"));
        assert!(text.ends_with("# summary = FAIL\n"));
        let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data, ["a,b", "1,2"]);
    }
}
