//! Command implementations for the `nbu` binary: single-case computation,
//! realizer emission, closed-form vs first-principles verification, and the
//! seeded batch harness. All reports carry `"schema": 1` and are
//! byte-reproducible for a fixed configuration.

use anyhow::{anyhow, bail, Context, Result};
use nbu_core::closed_form::{nbu_closed_form, ClosedFormVerdict, VerdictStatus};
use nbu_core::engine::{build_realizer, nbu_first_principles, EngineError, NBUReport};
use nbu_core::exact_lattice::IntMatrix;
use nbu_core::torus_geometry::{
    catalog_involution, custom_involution, parse_int_matrix, parse_torus_point, tag_for_dim,
    AffineTorusMap, FreeInvolution,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

pub const SCHEMA_VERSION: u32 = 1;

/// Fully parsed run configuration; identical configurations produce
/// byte-identical reports.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub dim: Option<usize>,
    pub matrix: Option<String>,
    pub involution: Option<String>,
    pub grid: usize,
    pub tol: f64,
    pub seed: u64,
    pub count: usize,
    pub range: i64,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dim: None,
            matrix: None,
            involution: None,
            grid: 64,
            tol: 1e-10,
            seed: 7,
            count: 200,
            range: 3,
            format: OutputFormat::Json,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
    Text,
}

impl std::str::FromStr for OutputFormat {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "text" => Ok(OutputFormat::Text),
            other => bail!("unknown format `{other}` (json|csv|text)"),
        }
    }
}

/// Parses either the semicolon text form or a JSON array of rows.
pub fn parse_matrix_arg(text: &str) -> Result<IntMatrix> {
    let trimmed = text.trim();
    if trimmed.starts_with('[') {
        let rows: Vec<Vec<i64>> =
            serde_json::from_str(trimmed).context("parsing JSON matrix")?;
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            bail!("JSON matrix is not square");
        }
        Ok(IntMatrix::from_rows(&rows))
    } else {
        parse_int_matrix(trimmed).map_err(|e| anyhow!("{e}"))
    }
}

/// Resolves a catalog name (`h2`, `tau1`, `antipodal`) or a custom map given
/// as `custom:<linear>@<translation>`.
pub fn parse_involution_arg(dim: usize, text: &str) -> Result<FreeInvolution> {
    if let Some(payload) = text.strip_prefix("custom:") {
        let (lin, tr) = payload
            .split_once('@')
            .ok_or_else(|| anyhow!("custom involution needs `<linear>@<translation>`"))?;
        let linear = parse_int_matrix(lin).map_err(|e| anyhow!("{e}"))?;
        let translation = parse_torus_point(tr).map_err(|e| anyhow!("{e}"))?;
        if linear.dim() != dim || translation.dim() != dim {
            bail!("custom involution dimension does not match the matrix");
        }
        custom_involution(AffineTorusMap::new(linear, translation)).map_err(|e| anyhow!("{e}"))
    } else {
        let tag = tag_for_dim(dim, text).map_err(|e| anyhow!("{e}"))?;
        catalog_involution(dim, tag).map_err(|e| anyhow!("{e}"))
    }
}

fn required_case(cfg: &RunConfig) -> Result<(IntMatrix, FreeInvolution)> {
    let matrix_text = cfg
        .matrix
        .as_deref()
        .ok_or_else(|| anyhow!("--matrix is required"))?;
    let m = parse_matrix_arg(matrix_text)?;
    if let Some(d) = cfg.dim {
        if d != m.dim() {
            bail!("--dim {d} does not match a {0}x{0} matrix", m.dim());
        }
    }
    let inv_text = cfg
        .involution
        .as_deref()
        .ok_or_else(|| anyhow!("--involution is required"))?;
    let s = parse_involution_arg(m.dim(), inv_text)?;
    Ok((m, s))
}

#[derive(Serialize)]
struct ComputeReport {
    schema: u32,
    mode: &'static str,
    dim: usize,
    matrix: String,
    involution: String,
    nbu: Option<u128>,
    status: VerdictStatus,
    branch: String,
    candidates: Vec<u128>,
    #[serde(skip_serializing_if = "Option::is_none")]
    minors: Option<nbu_core::closed_form::Minors>,
}

/// Closed-form verdict for one case.
pub fn cmd_compute(cfg: &RunConfig) -> Result<String> {
    let (m, s) = required_case(cfg)?;
    let verdict = nbu_closed_form(&m, &s).map_err(|e| anyhow!("{e}"))?;
    let report = ComputeReport {
        schema: SCHEMA_VERSION,
        mode: "compute",
        dim: m.dim(),
        matrix: m.to_string(),
        involution: s.tag.name().to_string(),
        nbu: verdict.value,
        status: verdict.status,
        branch: verdict.branch.clone(),
        candidates: verdict.candidates.clone(),
        minors: verdict.minors.clone(),
    };
    match cfg.format {
        OutputFormat::Json => Ok(serde_json::to_string_pretty(&report)?),
        OutputFormat::Csv => {
            let nbu = report.nbu.map(|v| v.to_string()).unwrap_or_default();
            Ok(format!(
                "dim,matrix,involution,nbu,status,branch\n{},{:?},{},{},{:?},{}",
                report.dim,
                report.matrix,
                report.involution,
                nbu,
                report.status,
                report.branch
            ))
        }
        OutputFormat::Text => {
            let nbu = report
                .nbu
                .map(|v| v.to_string())
                .unwrap_or_else(|| "-".to_string());
            Ok(format!(
                "NBU = {nbu} [{:?}] via {} for {} under {}",
                report.status, report.branch, report.matrix, report.involution
            ))
        }
    }
}

#[derive(Serialize)]
struct RealizeReport {
    schema: u32,
    mode: &'static str,
    dim: usize,
    matrix: String,
    involution: String,
    branch: String,
    n0: u64,
    terms: Vec<nbu_core::engine::PerturbTerm>,
    oracle: NBUReport,
}

/// Emits the perturbation recipe and the refined coincidence inventory.
pub fn cmd_realize(cfg: &RunConfig) -> Result<String> {
    let (m, s) = required_case(cfg)?;
    let realizer = build_realizer(&m, &s).map_err(|e| anyhow!("{e}"))?;
    let oracle = nbu_first_principles(&m, &s, cfg.grid, cfg.tol).map_err(|e| anyhow!("{e}"))?;
    let report = RealizeReport {
        schema: SCHEMA_VERSION,
        mode: "realize",
        dim: m.dim(),
        matrix: m.to_string(),
        involution: s.tag.name().to_string(),
        branch: realizer.branch.clone(),
        n0: realizer.n0,
        terms: realizer.map.terms.clone(),
        oracle,
    };
    match cfg.format {
        OutputFormat::Json => Ok(serde_json::to_string_pretty(&report)?),
        OutputFormat::Text => Ok(format!(
            "branch {} with {} terms (n0 = {}): {} coincidence pairs, NBU = {}",
            report.branch,
            report.terms.len(),
            report.n0,
            report.oracle.coincidence_pair_count,
            report.oracle.nbu
        )),
        OutputFormat::Csv => Ok(format!(
            "dim,matrix,involution,branch,n0,pairs,nbu\n{},{:?},{},{},{},{},{}",
            report.dim,
            report.matrix,
            report.involution,
            report.branch,
            report.n0,
            report.oracle.coincidence_pair_count,
            report.oracle.nbu
        )),
    }
}

/// One closed-form vs oracle comparison.
#[derive(Clone, Debug, Serialize)]
pub struct CaseOutcome {
    pub case: usize,
    pub dim: usize,
    pub matrix: String,
    pub involution: String,
    pub closed_nbu: Option<u128>,
    pub closed_status: VerdictStatus,
    pub closed_branch: String,
    pub oracle_nbu: Option<u128>,
    pub oracle_pairs: Option<usize>,
    pub oracle_branch: Option<String>,
    pub oracle_error: Option<String>,
    /// `Some(true)`: agreement; `Some(false)`: disagreement;
    /// `None`: diagnosed only (conjectured/unknown/no oracle).
    pub agree: Option<bool>,
}

fn run_case(
    case: usize,
    m: &IntMatrix,
    s: &FreeInvolution,
    grid: usize,
    tol: f64,
) -> Result<CaseOutcome> {
    let closed: ClosedFormVerdict = nbu_closed_form(m, s).map_err(|e| anyhow!("{e}"))?;
    let oracle: Result<NBUReport, EngineError> = nbu_first_principles(m, s, grid, tol);
    let (oracle_nbu, oracle_pairs, oracle_branch, oracle_error) = match &oracle {
        Ok(rep) => (
            Some(rep.nbu),
            Some(rep.coincidence_pair_count),
            Some(rep.diagnostics.branch.clone()),
            None,
        ),
        Err(e) => (None, None, None, Some(e.to_string())),
    };
    let agree = match (&closed.status, &oracle) {
        (VerdictStatus::Exact, Ok(rep)) => Some(closed.value == Some(rep.nbu)),
        (VerdictStatus::Conjectured, Ok(rep)) => Some(closed.candidates.contains(&rep.nbu)),
        _ => None,
    };
    Ok(CaseOutcome {
        case,
        dim: m.dim(),
        matrix: m.to_string(),
        involution: s.tag.name().to_string(),
        closed_nbu: closed.value,
        closed_status: closed.status,
        closed_branch: closed.branch,
        oracle_nbu,
        oracle_pairs,
        oracle_branch,
        oracle_error,
        agree,
    })
}

#[derive(Serialize)]
struct VerifyReport {
    schema: u32,
    mode: &'static str,
    outcome: CaseOutcome,
}

/// Runs both routes on one case; `Ok(false)` means they disagree.
pub fn cmd_verify(cfg: &RunConfig) -> Result<(String, bool)> {
    let (m, s) = required_case(cfg)?;
    let outcome = run_case(0, &m, &s, cfg.grid, cfg.tol)?;
    let agree = outcome.agree.unwrap_or(true);
    let report = VerifyReport {
        schema: SCHEMA_VERSION,
        mode: "verify",
        outcome,
    };
    let text = match cfg.format {
        OutputFormat::Json => serde_json::to_string_pretty(&report)?,
        OutputFormat::Text => format!(
            "closed {:?} [{}] vs oracle {:?} pairs {:?}: {}",
            report.outcome.closed_nbu,
            report.outcome.closed_branch,
            report.outcome.oracle_nbu,
            report.outcome.oracle_pairs,
            if agree { "agree" } else { "MISMATCH" }
        ),
        OutputFormat::Csv => format!(
            "case,dim,involution,matrix,closed,oracle,agree\n{}",
            csv_case_row(&report.outcome)
        ),
    };
    Ok((text, agree))
}

fn csv_case_row(c: &CaseOutcome) -> String {
    format!(
        "{},{},{},{:?},{},{},{}",
        c.case,
        c.dim,
        c.involution,
        c.matrix,
        c.closed_nbu.map(|v| v.to_string()).unwrap_or_default(),
        c.oracle_nbu.map(|v| v.to_string()).unwrap_or_default(),
        c.agree.map(|a| a.to_string()).unwrap_or_default(),
    )
}

/// Summary of a batch run: release gates on `disagreements` being empty.
#[derive(Clone, Debug, Serialize)]
pub struct BatchSummary {
    pub cases: usize,
    pub agreements: usize,
    pub diagnosed: usize,
    pub disagreements: Vec<CaseOutcome>,
    pub branch_coverage: BTreeMap<String, usize>,
}

#[derive(Serialize)]
struct BatchReport {
    schema: u32,
    mode: &'static str,
    dim: usize,
    involutions: Vec<String>,
    seed: u64,
    count: usize,
    range: i64,
    grid: usize,
    summary: BatchSummary,
}

fn catalog_names(dim: usize) -> Vec<&'static str> {
    match dim {
        1 => vec!["antipodal"],
        2 => vec!["tau1", "tau2"],
        3 => vec!["h1", "h2", "h3", "h4"],
        _ => vec!["tau1", "tau2", "tau3", "tau4"],
    }
}

/// Seeded batch: `count` random matrices with entries in `[-range, range]`
/// for each requested involution, verified on both routes concurrently with
/// a deterministic case-ordered merge.
pub fn cmd_batch(cfg: &RunConfig) -> Result<(String, BatchSummary)> {
    let dim = cfg.dim.ok_or_else(|| anyhow!("--dim is required for batch"))?;
    if dim == 0 {
        bail!("--dim must be positive");
    }
    let names: Vec<String> = match cfg.involution.as_deref() {
        None | Some("all") => catalog_names(dim).iter().map(|s| s.to_string()).collect(),
        Some(list) => list.split(',').map(|s| s.trim().to_string()).collect(),
    };
    let involutions: Vec<FreeInvolution> = names
        .iter()
        .map(|n| parse_involution_arg(dim, n))
        .collect::<Result<_>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut matrices = Vec::with_capacity(cfg.count);
    for _ in 0..cfg.count {
        let rows: Vec<Vec<i64>> = (0..dim)
            .map(|_| {
                (0..dim)
                    .map(|_| rng.gen_range(-cfg.range..=cfg.range))
                    .collect()
            })
            .collect();
        matrices.push(IntMatrix::from_rows(&rows));
    }

    let mut jobs: Vec<(usize, &IntMatrix, &FreeInvolution)> = Vec::new();
    let mut case = 0;
    for m in &matrices {
        for s in &involutions {
            jobs.push((case, m, s));
            case += 1;
        }
    }
    let outcomes: Result<Vec<CaseOutcome>> = jobs
        .par_iter()
        .map(|(case, m, s)| run_case(*case, m, s, cfg.grid, cfg.tol))
        .collect();
    let mut outcomes = outcomes?;
    outcomes.sort_by_key(|o| o.case);

    let mut summary = BatchSummary {
        cases: outcomes.len(),
        agreements: 0,
        diagnosed: 0,
        disagreements: Vec::new(),
        branch_coverage: BTreeMap::new(),
    };
    for o in &outcomes {
        *summary
            .branch_coverage
            .entry(o.closed_branch.clone())
            .or_default() += 1;
        if let Some(b) = &o.oracle_branch {
            *summary.branch_coverage.entry(b.clone()).or_default() += 1;
        }
        match o.agree {
            Some(true) => summary.agreements += 1,
            Some(false) => summary.disagreements.push(o.clone()),
            None => summary.diagnosed += 1,
        }
    }

    let report = BatchReport {
        schema: SCHEMA_VERSION,
        mode: "batch",
        dim,
        involutions: names,
        seed: cfg.seed,
        count: cfg.count,
        range: cfg.range,
        grid: cfg.grid,
        summary: summary.clone(),
    };
    let text = match cfg.format {
        OutputFormat::Json => serde_json::to_string_pretty(&report)?,
        OutputFormat::Csv => {
            let mut out = String::from("case,dim,involution,matrix,closed,oracle,agree\n");
            for o in &outcomes {
                out.push_str(&csv_case_row(o));
                out.push('\n');
            }
            out
        }
        OutputFormat::Text => format!(
            "{} cases: {} agree, {} diagnosed, {} disagree",
            summary.cases,
            summary.agreements,
            summary.diagnosed,
            summary.disagreements.len()
        ),
    };
    Ok((text, summary))
}
