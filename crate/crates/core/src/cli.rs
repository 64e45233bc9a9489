//! Batch driver behind the `ahls` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use rayon::prelude::*;

use crate::config::{Format, RunConfig};
use crate::corpus::{standard_corpus, CorpusEntry, Param};
use crate::error::{Error, Result};
use crate::harness::{
    verify_affine_frac_l2, verify_affine_hls, verify_affine_log_hls, verify_affine_log_sobolev,
    verify_beckner, ChainId, ChainReport, Settings,
};
use crate::report::{self, load_reports, report_stem, summarize};
use crate::specfun::{self, SelfCheck};

pub const CSV_FILE: &str = "reports.csv";
pub const SELF_TEST_FILE: &str = "specfun_self_test.json";

#[derive(Debug, Clone)]
pub struct Job {
    pub entry: CorpusEntry,
    pub chain: ChainId,
    pub param: Param,
}

impl Job {
    pub fn label(&self) -> String {
        format!("{}/{}/{}", self.chain.name(), self.entry.name, self.param)
    }
}

/// Every (chain, function, parameter) triple selected by the config, in corpus order.
pub fn jobs(config: &RunConfig) -> Result<Vec<Job>> {
    let corpus = standard_corpus(config.seed);
    for (i, name) in config.functions.iter().enumerate() {
        if !corpus.iter().any(|e| &e.name == name) {
            return Err(Error::config(
                format!("functions[{i}]"),
                format!("no corpus entry `{name}`"),
            ));
        }
    }
    let chains = config.chain_ids();
    let params = config.parameters();
    let mut out = Vec::new();
    for entry in corpus {
        if !config.dimensions.contains(&entry.n) {
            continue;
        }
        if !config.functions.is_empty() && !config.functions.contains(&entry.name) {
            continue;
        }
        for chain in entry.chains() {
            if !chains.contains(&chain) {
                continue;
            }
            for param in params.for_chain(chain, entry.n) {
                out.push(Job {
                    entry: entry.clone(),
                    chain,
                    param,
                });
            }
        }
    }
    Ok(out)
}

pub fn evaluate(job: &Job, m: usize, s: &Settings) -> Result<ChainReport> {
    let f = job.entry.build(job.param, m)?;
    let r = match (job.chain, job.param) {
        (ChainId::AffineHls, Param::Alpha(a)) => verify_affine_hls(&f, a, s)?,
        (ChainId::AffineFracL2, Param::Alpha(a)) => verify_affine_frac_l2(&f, a, s)?,
        (ChainId::AffineLogHls, _) => verify_affine_log_hls(&f, s)?,
        (ChainId::AffineLogSobolev, _) => verify_affine_log_sobolev(&f, s)?,
        (ChainId::Beckner, _) => verify_beckner(&f, s)?,
        (chain, param) => {
            return Err(Error::InvalidInput(format!(
                "chain {} does not take {param}",
                chain.name()
            )));
        }
    };
    Ok(r.labeled(job.entry.name.clone(), job.param.dilation())
        .with_expectation(job.entry.expectation(job.chain)))
}

#[derive(Debug, Default)]
pub struct RunOutcome {
    pub reports: Vec<ChainReport>,
    /// Jobs that raised an error instead of producing a report.
    pub errors: Vec<(String, String)>,
    pub self_test: Vec<SelfCheck>,
    pub files: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn success(&self) -> bool {
        self.errors.is_empty()
            && self.reports.iter().all(|r| r.pass && !r.diverging)
            && self.self_test.iter().all(|c| c.pass)
    }
}

fn timestamp() -> String {
    humantime::format_rfc3339_seconds(SystemTime::now()).to_string()
}

/// Evaluates all jobs in parallel and writes the requested report files.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    let jobs = jobs(config)?;
    let settings = config.settings();
    let dir = &config.output_dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let mut out = RunOutcome::default();
    if config.runs_self_test() {
        out.self_test = specfun::self_test();
        let path = dir.join(SELF_TEST_FILE);
        let text = serde_json::to_string_pretty(&out.self_test)?;
        fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
        out.files.push(path);
    }

    let results: Vec<(String, Result<ChainReport>)> = jobs
        .par_iter()
        .map(|j| {
            log::info!("evaluating {}", j.label());
            (j.label(), evaluate(j, config.m, &settings))
        })
        .collect();
    for (label, r) in results {
        match r {
            Ok(r) => out.reports.push(r),
            Err(e) => {
                log::error!("{label}: {e}");
                out.errors.push((label, e.to_string()));
            }
        }
    }

    if config.formats.contains(&Format::Json) {
        let stamp = timestamp();
        for r in &out.reports {
            let mut stamped = r.clone();
            stamped.timestamp = Some(stamp.clone());
            out.files.push(report::write_json(dir, &stamped)?);
        }
    }
    if config.formats.contains(&Format::Csv) {
        let path = dir.join(CSV_FILE);
        report::write_csv(&path, &out.reports)?;
        out.files.push(path);
    }
    Ok(out)
}

/// One line per failing, diverging or erroring job.
pub fn failures(out: &RunOutcome) -> Vec<String> {
    let mut lines: Vec<String> = out
        .reports
        .iter()
        .filter(|r| !r.pass || r.diverging)
        .map(|r| {
            let why = if r.diverging { "diverging" } else { "failed" };
            format!(
                "{}: {why} (slacks {:?}, tolerances {:?})",
                report_stem(r),
                r.slacks,
                r.tolerances
            )
        })
        .collect();
    lines.extend(out.errors.iter().map(|(l, e)| format!("{l}: error: {e}")));
    lines.extend(
        out.self_test
            .iter()
            .filter(|c| !c.pass)
            .map(|c| format!("{}: {} vs {}", c.name, c.value, c.expected)),
    );
    lines
}

/// The console table for a report directory, with unreadable files listed below it.
pub fn summary(dir: &Path) -> Result<String> {
    let mut loaded = load_reports(dir)?;
    loaded.errors.retain(|(p, _)| !p.ends_with(SELF_TEST_FILE));
    let mut text = if loaded.reports.is_empty() {
        format!("no reports in {}\n", dir.display())
    } else {
        report::format_summary(&summarize(loaded.reports.iter().map(|(_, r)| r)))
    };
    if !loaded.errors.is_empty() {
        text.push_str("errors:\n");
        for (p, e) in &loaded.errors {
            text.push_str(&format!("  {}: {e}\n", p.display()));
        }
    }
    Ok(text)
}

pub fn corpus_listing(seed: u64) -> String {
    let mut s = format!(
        "{:<28} {:>2} {:<11} {:<60} {}\n",
        "name", "n", "kind", "chains", "description"
    );
    for e in standard_corpus(seed) {
        let chains: Vec<&str> = e.chains().iter().map(|c| c.name()).collect();
        s.push_str(&format!(
            "{:<28} {:>2} {:<11} {:<60} {}\n",
            e.name,
            e.n,
            e.kind(),
            chains.join(","),
            e.description
        ));
    }
    s
}
