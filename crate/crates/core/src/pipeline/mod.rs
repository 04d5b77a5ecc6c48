//! Stage driver: ingest → detect → analyze → report, either one stage at a
//! time through files in a work directory or all at once with [`run`].

pub mod analysis;
pub mod container;
pub mod reproduction;

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::canon::Testament;
use crate::detect::{length_histogram, read_quotations_csv, write_quotations_csv, Quotation};
use crate::error::PipelineError;
use crate::ingest::ExcludedBook;
use crate::numerics::{proportion_matrix, Dendrogram, LogOffset};
use crate::report::{
    cluster_stats, flow_table, histogram_svg, read_clusters_csv, read_matrix_csv,
    scatter_svg, write_cluster_stats_csv, write_clusters_csv, write_dendrogram_csv,
    write_flows_csv, write_histogram_csv, write_matrix_csv, ScatterPoint,
};

pub use analysis::{analyze, cluster_proportions, detect, Analysis, Clustering, Detection, DetectionSummary};
pub use container::{CorpusFile, SourceInfo};
pub use reproduction::Reproduction;

pub const CORPUS_FILE: &str = "corpus.json";
pub const DETECTION_FILE: &str = "detection.json";
pub const ANALYSIS_FILE: &str = "analysis.json";
pub const QUOTATIONS_FILE: &str = "quotations.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Every file the report stage writes, in manifest order.
pub const REPORT_FILES: [&str; 14] = [
    "matrix_proportion.csv",
    "matrix_log.csv",
    QUOTATIONS_FILE,
    "clusters_ot.csv",
    "clusters_nt.csv",
    "cluster_stats.csv",
    "flows.csv",
    "length_histogram.csv",
    "dendrogram_ot.csv",
    "dendrogram_nt.csv",
    "pca_ot.svg",
    "pca_nt.svg",
    "histogram.svg",
    MANIFEST_FILE,
];

pub const DEFAULT_K_OT: usize = 3;
pub const DEFAULT_K_NT: usize = 2;

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Analysis parameters shared by `analyze`, `report` and `run`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AnalysisConfig {
    pub k_ot: usize,
    pub k_nt: usize,
    pub log_offset: LogOffset,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            k_ot: DEFAULT_K_OT,
            k_nt: DEFAULT_K_NT,
            log_offset: LogOffset::Value,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        for (k, t) in [(self.k_ot, Testament::Old), (self.k_nt, Testament::New)] {
            if k == 0 || k > t.book_count() {
                return Err(PipelineError::Config(format!(
                    "{t} cluster count {k} outside 1..={}",
                    t.book_count()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub ot_path: PathBuf,
    pub nt_path: PathBuf,
    pub output_dir: PathBuf,
    pub n: usize,
    pub analysis: AnalysisConfig,
    pub workers: usize,
}

impl RunConfig {
    pub fn new(ot_path: impl Into<PathBuf>, nt_path: impl Into<PathBuf>, output_dir: impl Into<PathBuf>) -> RunConfig {
        RunConfig {
            ot_path: ot_path.into(),
            nt_path: nt_path.into(),
            output_dir: output_dir.into(),
            n: crate::detect::DEFAULT_N,
            analysis: AnalysisConfig::default(),
            workers: default_workers(),
        }
    }

    /// Checks parameters and input paths without touching the output.
    pub fn validate(&self) -> Result<(), PipelineError> {
        validate_n(self.n)?;
        self.analysis.validate()?;
        require_file(&self.ot_path)?;
        require_file(&self.nt_path)?;
        if self.workers == 0 {
            return Err(PipelineError::Config("worker count must be at least 1".into()));
        }
        Ok(())
    }
}

pub fn validate_n(n: usize) -> Result<(), PipelineError> {
    if n < 2 {
        return Err(PipelineError::Config(format!("n must be at least 2, got {n}")));
    }
    Ok(())
}

/// Config error unless `path` is an existing regular file.
pub fn require_file(path: &Path) -> Result<(), PipelineError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(PipelineError::Config(format!(
            "input file {} does not exist",
            path.display()
        )))
    }
}

fn read(path: &Path) -> Result<Vec<u8>, PipelineError> {
    fs::read(path).map_err(|e| PipelineError::io(path, e))
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

/// Reads and keys both XML inputs. Fails as degenerate when either
/// testament has no canon words.
pub fn ingest_files(ot: &Path, nt: &Path) -> Result<CorpusFile, PipelineError> {
    require_file(ot)?;
    require_file(nt)?;
    let (ot_xml, nt_xml) = (read(ot)?, read(nt)?);
    let corpus = CorpusFile::from_xml(&file_name(ot), &ot_xml, &file_name(nt), &nt_xml)?;
    for c in [&corpus.ot, &corpus.nt] {
        if c.total_words() == 0 {
            return Err(PipelineError::Degenerate(format!(
                "the {} input has no words in canon books",
                c.testament()
            )));
        }
    }
    Ok(corpus)
}

pub fn load_corpus(path: &Path) -> Result<CorpusFile, PipelineError> {
    Ok(CorpusFile::from_json(&read(path)?)?)
}

pub fn load_detection(corpus: &CorpusFile, work: &Path) -> Result<Detection, PipelineError> {
    let summary: DetectionSummary = serde_json::from_slice(&read(&work.join(DETECTION_FILE))?)
        .map_err(|e| PipelineError::Parse(format!("{DETECTION_FILE}: {e}")))?;
    let csv_path = work.join(QUOTATIONS_FILE);
    let quotations = read_quotations_csv(&read(&csv_path)?[..], &corpus.ot, &corpus.nt)?;
    let check = analysis::summarize(&quotations, summary.n)?;
    if check != summary {
        return Err(PipelineError::Parse(format!(
            "{DETECTION_FILE} does not describe {QUOTATIONS_FILE}"
        )));
    }
    Ok(Detection {
        summary,
        quotations,
    })
}

pub fn load_analysis(work: &Path) -> Result<Analysis, PipelineError> {
    Analysis::from_json(&read(&work.join(ANALYSIS_FILE))?)
}

pub fn quotations_csv(corpus: &CorpusFile, quotes: &[Quotation]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_quotations_csv(quotes, &corpus.ot, &corpus.nt, &mut buf).expect("write to memory");
    buf
}

pub fn detection_json(summary: &DetectionSummary) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(summary).expect("summary serializes");
    out.push(b'\n');
    out
}

/// Writes `files` into `dir` so that either all of them appear or none
/// do: they are staged in a hidden sibling directory first. A directory
/// created here is removed again on failure.
pub fn write_files_atomically(dir: &Path, files: &[(String, Vec<u8>)]) -> Result<(), PipelineError> {
    let created = !dir.exists();
    let result = (|| {
        fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
        let staging = dir.join(format!(".staging-{}", std::process::id()));
        let staged = (|| {
            fs::create_dir_all(&staging).map_err(|e| PipelineError::io(&staging, e))?;
            for (name, bytes) in files {
                let p = staging.join(name);
                fs::write(&p, bytes).map_err(|e| PipelineError::io(&p, e))?;
            }
            for (name, _) in files {
                let (from, to) = (staging.join(name), dir.join(name));
                fs::rename(&from, &to).map_err(|e| PipelineError::io(&to, e))?;
            }
            Ok(())
        })();
        let _ = fs::remove_dir_all(&staging);
        if staged.is_err() {
            for (name, _) in files {
                let _ = fs::remove_file(dir.join(name));
            }
        }
        staged
    })();
    if result.is_err() && created {
        let _ = fs::remove_dir_all(dir);
    }
    result
}

#[derive(Serialize)]
struct ToolInfo {
    name: &'static str,
    version: &'static str,
}

#[derive(Serialize)]
struct ManifestConfig {
    n: usize,
    k_ot: usize,
    k_nt: usize,
    log_offset: LogOffset,
}

#[derive(Serialize)]
struct InputInfo<'a> {
    testament: Testament,
    file: &'a str,
    sha256: &'a str,
    tokens: usize,
    word_count: usize,
    dropped_tokens: usize,
    excluded_books: &'a [ExcludedBook],
}

#[derive(Serialize)]
struct ClusteringInfo<'a> {
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    offset: Option<f64>,
}

#[derive(Serialize)]
struct PcaInfo {
    ot_figure_explained: f64,
    nt_figure_explained: f64,
    ot_own_explained: f64,
    nt_own_explained: f64,
}

#[derive(Serialize)]
struct Checks {
    flow_conserved: Option<bool>,
    quotations_csv_reproduces_matrix: bool,
    matrix_csv_round_trip: bool,
    cluster_csv_round_trip: Option<bool>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: ToolInfo,
    config: ManifestConfig,
    inputs: Vec<InputInfo<'a>>,
    normalization: &'static str,
    custom_keys: usize,
    detection: &'a DetectionSummary,
    clustering: ClusteringInfo<'a>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pca: Option<PcaInfo>,
    checks: Checks,
    reproduction: &'a Reproduction,
    files: &'a [&'a str],
}

const NORMALIZATION: &str = "surface: trim non-letter/digit edges, NFC, lowercase (diacritics kept); \
key: first Strong's number as G<n>, otherwise shared C-<n> by first appearance (OT then NT)";

fn matrix_bytes(m: &crate::numerics::Matrix) -> Vec<u8> {
    let mut buf = Vec::new();
    write_matrix_csv(m, &mut buf).expect("write to memory");
    buf
}

fn dendrogram_bytes(d: Option<&Dendrogram>) -> Vec<u8> {
    let empty = Dendrogram {
        points: 0,
        steps: Vec::new(),
    };
    let mut buf = Vec::new();
    write_dendrogram_csv(d.unwrap_or(&empty), &mut buf).expect("write to memory");
    buf
}

fn skipped_svg(title: &str) -> Vec<u8> {
    let mut svg = scatter_svg(&[], &[], title);
    svg.insert_str(
        svg.len() - "</svg>\n".len(),
        "<text x=\"360\" y=\"240\" text-anchor=\"middle\" font-size=\"14\">clustering skipped</text>\n",
    );
    svg.into_bytes()
}

/// Renders a PCA figure for one testament's view.
pub fn pca_svg(view: &analysis::View, title: &str) -> String {
    let a = &view.assignment;
    let points: Vec<ScatterPoint> = a
        .testament
        .books()
        .zip(&view.figure)
        .map(|(b, xy)| ScatterPoint {
            label: b.name().to_string(),
            x: xy[0],
            y: xy[1],
            cluster: a.label(b),
        })
        .collect();
    let names: Vec<String> = (1..=a.k).map(|l| a.label_name(l)).collect();
    scatter_svg(
        &points,
        &names,
        &format!(
            "{title} ({:.0}% of variance explained)",
            100.0 * view.figure_explained
        ),
    )
}

/// The two PCA figures, or placeholders when clustering was skipped.
pub fn figures(analysis: &Analysis) -> [(String, Vec<u8>); 2] {
    match analysis.clustered() {
        Some(c) => [
            ("pca_ot.svg".into(), pca_svg(&c.ot, "Old Testament books").into_bytes()),
            ("pca_nt.svg".into(), pca_svg(&c.nt, "New Testament books").into_bytes()),
        ],
        None => [
            ("pca_ot.svg".into(), skipped_svg("Old Testament books")),
            ("pca_nt.svg".into(), skipped_svg("New Testament books")),
        ],
    }
}

/// Report file contents plus whether clustering was skipped.
pub struct Report {
    pub files: Vec<(String, Vec<u8>)>,
    pub skipped: Option<String>,
}

/// Builds every report file in memory, checking the emitted CSVs round-trip.
pub fn render_report(
    corpus: &CorpusFile,
    detection: &Detection,
    analysis: &Analysis,
) -> Result<Report, PipelineError> {
    let quotes = &detection.quotations;
    let mut files: Vec<(String, Vec<u8>)> = Vec::with_capacity(REPORT_FILES.len());
    let clustered = analysis.clustered();

    let proportion_csv = matrix_bytes(&analysis.proportion.0);
    let matrix_round_trip = read_matrix_csv(&proportion_csv[..])
        .map(|m| matrix_bytes(&m) == proportion_csv)
        .unwrap_or(false);
    files.push(("matrix_proportion.csv".into(), proportion_csv));
    let log_csv = match clustered {
        Some(c) => matrix_bytes(&c.log.values),
        None => matrix_bytes(&analysis.proportion.0.map(|_| 0.0)),
    };
    files.push(("matrix_log.csv".into(), log_csv));

    let q_csv = quotations_csv(corpus, quotes);
    let reread = read_quotations_csv(&q_csv[..], &corpus.ot, &corpus.nt)?;
    let reproduces = proportion_matrix(&reread, &corpus.ot, &corpus.nt) == analysis.proportion;
    files.push((QUOTATIONS_FILE.into(), q_csv));

    let (stats, flows) = match clustered {
        Some(c) => {
            let s = cluster_stats(quotes, &corpus.ot, &corpus.nt, &c.ot.assignment, &c.nt.assignment);
            let f = flow_table(quotes, &c.ot.assignment, &c.nt.assignment);
            (Some(s), Some(f))
        }
        None => (None, None),
    };

    let mut cluster_round_trip = None;
    for (name, t) in [("clusters_ot.csv", Testament::Old), ("clusters_nt.csv", Testament::New)] {
        let mut buf = Vec::new();
        match clustered {
            Some(c) => {
                let a = if t == Testament::Old { &c.ot.assignment } else { &c.nt.assignment };
                write_clusters_csv(a, &mut buf).expect("write to memory");
                let ok = read_clusters_csv(&buf[..], t).is_ok_and(|b| &b == a);
                cluster_round_trip = Some(cluster_round_trip.unwrap_or(true) && ok);
            }
            None => buf.extend_from_slice(b"book,cluster\n"),
        }
        files.push((name.into(), buf));
    }

    let mut buf = Vec::new();
    write_cluster_stats_csv(stats.as_deref().unwrap_or(&[]), &mut buf).expect("write to memory");
    files.push(("cluster_stats.csv".into(), buf));

    let mut buf = Vec::new();
    match (clustered, &flows) {
        (Some(c), Some(f)) => {
            write_flows_csv(f, &c.nt.assignment, &c.ot.assignment, &mut buf).expect("write to memory")
        }
        _ => buf.extend_from_slice(b"nt_cluster,ot_cluster,references\n"),
    }
    files.push(("flows.csv".into(), buf));

    let hist = length_histogram(quotes);
    let mut buf = Vec::new();
    write_histogram_csv(&hist, &mut buf).expect("write to memory");
    files.push(("length_histogram.csv".into(), buf));

    files.push(("dendrogram_ot.csv".into(), dendrogram_bytes(clustered.map(|c| &c.ot.dendrogram))));
    files.push(("dendrogram_nt.csv".into(), dendrogram_bytes(clustered.map(|c| &c.nt.dendrogram))));
    files.extend(figures(analysis));
    files.push((
        "histogram.svg".into(),
        histogram_svg(&hist, "Quotation lengths").into_bytes(),
    ));

    let flow_conserved = match (&flows, &stats) {
        (Some(f), Some(s)) => Some(f.is_conserved(quotes.len(), s)),
        _ => None,
    };
    if flow_conserved == Some(false) {
        return Err(PipelineError::Degenerate(
            "flow table does not conserve the quotation count".into(),
        ));
    }

    let reproduction = reproduction::evaluate(
        &reproduction::CorpusFileView {
            ot: &corpus.ot,
            nt: &corpus.nt,
        },
        &detection.summary,
        quotes,
        analysis,
        stats.as_deref(),
        flows.as_ref(),
    );

    let inputs = corpus
        .sources
        .iter()
        .map(|s| InputInfo {
            testament: s.testament,
            file: &s.file,
            sha256: &s.sha256,
            tokens: s.tokens,
            word_count: s.word_count,
            dropped_tokens: s.drops.len(),
            excluded_books: &s.excluded_books,
        })
        .collect();
    let skipped = match &analysis.clustering {
        Clustering::Skipped { reason } => Some(reason.clone()),
        Clustering::Done(_) => None,
    };
    let manifest = Manifest {
        tool: ToolInfo {
            name: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
        },
        config: ManifestConfig {
            n: detection.summary.n,
            k_ot: analysis.k_ot,
            k_nt: analysis.k_nt,
            log_offset: analysis.log_offset,
        },
        inputs,
        normalization: NORMALIZATION,
        custom_keys: corpus.custom_keys.len(),
        detection: &detection.summary,
        clustering: ClusteringInfo {
            status: if skipped.is_some() { "skipped" } else { "ok" },
            reason: skipped.as_deref(),
            epsilon: clustered.map(|c| c.log.epsilon),
            offset: clustered.map(|c| c.log.offset),
        },
        pca: clustered.map(|c| PcaInfo {
            ot_figure_explained: c.ot.figure_explained,
            nt_figure_explained: c.nt.figure_explained,
            ot_own_explained: c.ot.own_explained,
            nt_own_explained: c.nt.own_explained,
        }),
        checks: Checks {
            flow_conserved,
            quotations_csv_reproduces_matrix: reproduces,
            matrix_csv_round_trip: matrix_round_trip,
            cluster_csv_round_trip: cluster_round_trip,
        },
        reproduction: &reproduction,
        files: &REPORT_FILES,
    };
    let mut json = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    json.push(b'\n');
    files.push((MANIFEST_FILE.into(), json));
    debug_assert!(files.iter().map(|(n, _)| n.as_str()).eq(REPORT_FILES));

    Ok(Report { files, skipped })
}

/// Writes the report and reports skipped clustering as degenerate data
/// (after the files are in place).
pub fn emit_report(dir: &Path, report: &Report) -> Result<(), PipelineError> {
    write_files_atomically(dir, &report.files)?;
    match &report.skipped {
        Some(reason) => Err(PipelineError::Degenerate(format!(
            "clustering skipped ({reason}); report written without clusters"
        ))),
        None => Ok(()),
    }
}

/// All stages in one process, writing only the report files.
pub fn run(config: &RunConfig) -> Result<(), PipelineError> {
    config.validate()?;
    let corpus = ingest_files(&config.ot_path, &config.nt_path)?;
    let detection = detect(&corpus, config.n, config.workers)?;
    let a = &config.analysis;
    let analysis = analyze(&corpus, &detection.quotations, a.k_ot, a.k_nt, a.log_offset)?;
    let report = render_report(&corpus, &detection, &analysis)?;
    emit_report(&config.output_dir, &report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_cleans_up() {
        let tmp = std::env::temp_dir().join(format!("intertext-atomic-{}", std::process::id()));
        let _ = fs::remove_dir_all(&tmp);
        let out = tmp.join("out");
        // a name that cannot be created (nested in a missing directory)
        let bad = vec![
            ("a.csv".to_string(), b"x".to_vec()),
            ("missing/b.csv".to_string(), b"y".to_vec()),
        ];
        assert!(write_files_atomically(&out, &bad).is_err());
        assert!(!out.exists());

        let good = vec![("a.csv".to_string(), b"x".to_vec())];
        write_files_atomically(&out, &good).unwrap();
        assert_eq!(fs::read(out.join("a.csv")).unwrap(), b"x");
        assert_eq!(fs::read_dir(&out).unwrap().count(), 1);
        fs::remove_dir_all(&tmp).unwrap();
    }

    #[test]
    fn config_validation() {
        let mut c = RunConfig::new("/nonexistent/ot.xml", "/nonexistent/nt.xml", "/tmp/x");
        assert_eq!(c.validate().unwrap_err().exit_code(), 1);
        c.n = 1;
        assert!(matches!(c.validate(), Err(PipelineError::Config(_))));
        let a = AnalysisConfig {
            k_ot: 40,
            ..AnalysisConfig::default()
        };
        assert!(a.validate().is_err());
        assert!(AnalysisConfig::default().validate().is_ok());
    }
}
