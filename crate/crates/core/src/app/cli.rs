//! Command-line front end. Exit status: 0 on success, 1 on a domain error,
//! 2 on a usage or configuration error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use super::config::AppConfig;
use super::store::TemplateStore;
use crate::error::{Error, Result};
use crate::evaluation::{
    distribution_from_codes, eye_from_stem, extract_codes, localization_eval, rank1_from_codes,
    region_information_report, write_cohort, CaptureProfile, CohortSpec, DatasetIndex, LocalizationReport, Moments,
    Protocol, Rank1Report, RegionReport,
};
use crate::features::{Eye, IrisTemplate};
use crate::image::{load_gray, write_pgm, GrayImage};
use crate::matching::{identify, verify, MatchReport};
use crate::normalization::Matrix;
use crate::pipeline::{code_from_geometry, extract_template};
use crate::segmentation::{overlay, segment, segment_traced, IrisGeometry, SegmentationFlags};

#[derive(Debug, Parser)]
#[command(name = "irisrec", version, about = "Iris segmentation, enrollment, matching and evaluation")]
struct Cli {
    /// Config file of `key = value` lines.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override one config key; applied after the config file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Locate pupil and limbic boundaries.
    Segment {
        image: PathBuf,
        /// Print geometry and flags as JSON.
        #[arg(long)]
        json: bool,
        /// Write the image with both circles drawn.
        #[arg(long, value_name = "OUT.pgm")]
        overlay: Option<PathBuf>,
    },
    /// Add templates of one subject to a store (created if missing).
    Enroll {
        #[arg(long)]
        db: PathBuf,
        #[arg(long)]
        subject: String,
        /// Eye of every image; guessed from file names when omitted.
        #[arg(long)]
        eye: Option<Eye>,
        #[arg(required = true)]
        images: Vec<PathBuf>,
    },
    /// Identify an image against every stored template.
    Identify {
        #[arg(long)]
        db: PathBuf,
        image: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Accept or reject a claimed identity.
    Verify {
        #[arg(long)]
        db: PathBuf,
        #[arg(long)]
        subject: String,
        /// Acceptance threshold; defaults to `matching.tau`.
        #[arg(long)]
        tau: Option<f64>,
        image: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Rank-1 identification and optional extra reports over a dataset.
    Eval {
        /// Directory laid out as `<subject>/<image>.pgm|bmp`.
        #[arg(long)]
        dataset: PathBuf,
        /// Enrollment images per subject; 1 through 5 when omitted.
        #[arg(long)]
        enroll: Option<usize>,
        /// Rank-1 table as CSV, preceded by `#` lines echoing the config.
        #[arg(long, value_name = "OUT.csv")]
        report: Option<PathBuf>,
        /// Named preprocessing variant or inline `key=value,…` list.
        #[arg(long)]
        ablation: Option<String>,
        #[arg(long, value_enum, default_value_t = ProtocolArg::All)]
        protocol: ProtocolArg,
        /// Full report, config included, as JSON.
        #[arg(long, value_name = "OUT.json")]
        json: Option<PathBuf>,
        /// Directory for intra/inter pair and histogram CSVs.
        #[arg(long, value_name = "DIR")]
        distribution: Option<PathBuf>,
        /// Score segmentation against `.circles` sidecars.
        #[arg(long)]
        localization: bool,
        /// Compare class separability of strip regions A, B and C.
        #[arg(long)]
        regions: bool,
    },
    /// Generate a synthetic cohort with ground-truth sidecars.
    Synth {
        /// Captures per subject (and per eye).
        #[arg(long)]
        count: usize,
        #[arg(long)]
        subjects: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ProfileArg::Cohort)]
        profile: ProfileArg,
        /// Generate left and right eyes.
        #[arg(long)]
        both_eyes: bool,
    },
    /// Write every intermediate raster of the pipeline as PGM.
    DumpStages {
        image: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProtocolArg {
    All,
    Left,
    Right,
    Both,
}

impl From<ProtocolArg> for Protocol {
    fn from(p: ProtocolArg) -> Self {
        match p {
            ProtocolArg::All => Protocol::All,
            ProtocolArg::Left => Protocol::Left,
            ProtocolArg::Right => Protocol::Right,
            ProtocolArg::Both => Protocol::BothEyes,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProfileArg {
    Clean,
    Adverse,
    Cohort,
}

enum Failure {
    Usage(String),
    Domain(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(msg) => Failure::Usage(msg),
            e => Failure::Domain(e),
        }
    }
}

/// Runs the CLI on `args` (program name first) with the process streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

/// Runs the CLI writing to the given streams; returns the exit status.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "usage error: {msg}");
            2
        }
        Err(Failure::Domain(e)) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn load_config(cli: &Cli) -> Result<AppConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => AppConfig::load(path).map_err(|e| Failure::Usage(e.to_string()))?,
        None => AppConfig::default(),
    };
    for item in &cli.set {
        cfg.apply_overrides(item)?;
    }
    Ok(cfg)
}

fn io(e: std::io::Error) -> Failure {
    Failure::Domain(Error::Io(e))
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    let mut cfg = load_config(&cli)?;
    match cli.command {
        Command::Segment { image, json, overlay: overlay_path } => {
            let img = load_gray(&image)?;
            let seg = segment(&img, &cfg.segmentation)?;
            if let Some(path) = overlay_path {
                write_pgm(path, &overlay(&img, &seg.geometry))?;
            }
            let g = seg.geometry;
            if json {
                let doc = SegmentDoc {
                    image: image.display().to_string(),
                    geometry: g,
                    flags: seg.flags,
                };
                writeln!(out, "{}", serde_json::to_string_pretty(&doc).map_err(Error::from)?).map_err(io)?;
            } else {
                writeln!(
                    out,
                    "pupil {:.2} {:.2} {:.2} limbic {:.2}",
                    g.pupil.cx, g.pupil.cy, g.pupil.r, g.limbic_r
                )
                .map_err(io)?;
            }
        }
        Command::Enroll {
            db,
            subject,
            eye,
            images,
        } => {
            let mut store = TemplateStore::open_or_new(&db)?;
            let pipeline = cfg.pipeline();
            let mut new = Vec::with_capacity(images.len());
            for path in &images {
                let template = load_gray(path).and_then(|img| extract_template(&img, &pipeline))?;
                let eye = eye
                    .or_else(|| path.file_stem().and_then(|s| eye_from_stem(&s.to_string_lossy())))
                    .unwrap_or(Eye::Left);
                new.push((path, eye, template));
            }
            for (path, eye, template) in new {
                let sample = store.enroll(&subject, eye, template)?;
                writeln!(out, "{subject}\t{eye}\t{sample}\t{}", path.display()).map_err(io)?;
            }
            store.save(&db)?;
        }
        Command::Identify { db, image, json } => {
            let store = TemplateStore::load(&db)?;
            let probe = probe_template(&image, &cfg)?;
            let id = identify(&probe, &store.templates(), &cfg.matching)?;
            if json {
                let report = MatchReport::new(image.display().to_string(), &id);
                writeln!(out, "{}", serde_json::to_string_pretty(&report).map_err(Error::from)?).map_err(io)?;
            } else {
                writeln!(out, "{}\t{:.6}\t{}", id.label, id.score.d_min, id.score.best_shift).map_err(io)?;
            }
        }
        Command::Verify {
            db,
            subject,
            tau,
            image,
            json,
        } => {
            if let Some(t) = tau {
                cfg.apply_overrides(&format!("matching.tau={t}"))?;
            }
            let store = TemplateStore::load(&db)?;
            let probe = probe_template(&image, &cfg)?;
            let v = verify(&probe, &store.templates_of(&subject), cfg.matching.verify_threshold, cfg.matching.max_shift)?;
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&v).map_err(Error::from)?).map_err(io)?;
            } else {
                let word = if v.accept { "accept" } else { "reject" };
                writeln!(out, "{word}\t{:.6}\t{}", v.d_min, v.best_shift).map_err(io)?;
            }
        }
        Command::Eval {
            dataset,
            enroll,
            report,
            ablation,
            protocol,
            json,
            distribution,
            localization,
            regions,
        } => {
            if let Some(name) = &ablation {
                cfg.apply_ablation(name)?;
            }
            let opts = EvalOptions {
                enroll,
                protocol: protocol.into(),
                ablation,
                distribution,
                localization,
                regions,
            };
            let doc = eval(&dataset, &cfg, &opts)?;
            for r in &doc.rank1 {
                writeln!(
                    out,
                    "rank-1 enroll={} probes={} correct={} accuracy={:.2}%",
                    r.enroll_n, r.probes, r.correct, r.accuracy_pct
                )
                .map_err(io)?;
            }
            if let Some(l) = &doc.localization {
                writeln!(out, "localization {}/{} correct ({:.2}%)", l.correct, l.images, l.accuracy_pct).map_err(io)?;
            }
            if let Some(d) = &doc.distribution {
                writeln!(
                    out,
                    "intra mean={:.4} std={:.4}  inter mean={:.4} std={:.4}  crossover={:.4}",
                    d.intra.mean, d.intra.std, d.inter.mean, d.inter.std, d.crossover
                )
                .map_err(io)?;
            }
            if let Some(rep) = &doc.regions {
                for row in &rep.rows {
                    writeln!(out, "region {:?} distinct={:.2}%", row.region, row.distinct_pct).map_err(io)?;
                }
            }
            if let Some(path) = report {
                std::fs::write(path, rank1_csv(&doc, &cfg)?).map_err(io)?;
            }
            if let Some(path) = json {
                let text = serde_json::to_string_pretty(&doc).map_err(Error::from)?;
                std::fs::write(path, text + "\n").map_err(io)?;
            }
        }
        Command::Synth {
            count,
            subjects,
            out: dir,
            seed,
            profile,
            both_eyes,
        } => {
            if count == 0 || subjects == 0 {
                return Err(Failure::Usage("--count and --subjects must be positive".into()));
            }
            let mut cohort = CohortSpec::new(subjects, count, seed);
            cohort.both_eyes = both_eyes;
            cohort.profile = match profile {
                ProfileArg::Clean => CaptureProfile::clean(),
                ProfileArg::Adverse => CaptureProfile::adverse(),
                ProfileArg::Cohort => CaptureProfile::cohort(),
            };
            let index = write_cohort(&dir, &cohort)?;
            writeln!(out, "wrote {} images of {} subjects to {}", index.len(), subjects, dir.display()).map_err(io)?;
        }
        Command::DumpStages { image, out: dir } => {
            let written = dump_stages(&image, &dir, &cfg)?;
            for name in written {
                writeln!(out, "{}", dir.join(name).display()).map_err(io)?;
            }
        }
    }
    Ok(())
}

fn probe_template(path: &Path, cfg: &AppConfig) -> Result<IrisTemplate> {
    load_gray(path).and_then(|img| extract_template(&img, &cfg.pipeline()))
}

#[derive(Serialize)]
struct SegmentDoc {
    image: String,
    geometry: IrisGeometry,
    flags: SegmentationFlags,
}

struct EvalOptions {
    enroll: Option<usize>,
    protocol: Protocol,
    ablation: Option<String>,
    distribution: Option<PathBuf>,
    localization: bool,
    regions: bool,
}

#[derive(Debug, Serialize)]
struct DistributionSummary {
    intra: Moments,
    inter: Moments,
    crossover: f64,
}

/// Everything `eval` measured, with the effective configuration.
#[derive(Debug, Serialize)]
struct EvalDoc {
    config: BTreeMap<String, String>,
    ablation: Option<String>,
    images: usize,
    encode_failures: usize,
    rank1: Vec<Rank1Report>,
    localization: Option<LocalizationReport>,
    distribution: Option<DistributionSummary>,
    regions: Option<RegionReport>,
}

fn config_map(cfg: &AppConfig) -> BTreeMap<String, String> {
    AppConfig::keys()
        .into_iter()
        .map(|k| {
            let v = cfg.get(&k).unwrap_or_default();
            (k, v)
        })
        .collect()
}

fn eval(dataset: &Path, cfg: &AppConfig, opts: &EvalOptions) -> Result<EvalDoc> {
    let index = DatasetIndex::load(dataset)?;
    if index.is_empty() {
        return Err(Error::TooFewSubjects { have: 0, need: 1 });
    }
    let pipeline = cfg.pipeline();
    let codes = extract_codes(&index, &pipeline);
    let rank1 = match opts.enroll {
        Some(n) => vec![rank1_from_codes(&codes, n, opts.protocol, cfg.evaluation.fusion, &cfg.matching)?],
        None => {
            let mut out = Vec::new();
            for n in 1..=5 {
                match rank1_from_codes(&codes, n, opts.protocol, cfg.evaluation.fusion, &cfg.matching) {
                    Ok(r) => out.push(r),
                    Err(Error::InsufficientImages { .. }) if n > 1 => break,
                    Err(e) => return Err(e),
                }
            }
            out
        }
    };
    let localization = if opts.localization {
        Some(localization_eval(&index, &cfg.segmentation)?)
    } else {
        None
    };
    let distribution = match &opts.distribution {
        Some(dir) => {
            let d = distribution_from_codes(&codes, cfg.matching.max_shift)?;
            std::fs::create_dir_all(dir)?;
            d.write_pairs_csv(std::fs::File::create(dir.join("pairs.csv"))?)?;
            d.write_histogram_csv(std::fs::File::create(dir.join("histogram.csv"))?)?;
            Some(DistributionSummary {
                intra: d.intra(),
                inter: d.inter(),
                crossover: d.crossover(),
            })
        }
        None => None,
    };
    let regions = if opts.regions {
        Some(region_information_report(&index, &pipeline)?)
    } else {
        None
    };
    Ok(EvalDoc {
        config: config_map(cfg),
        ablation: opts.ablation.clone(),
        images: index.len(),
        encode_failures: codes.iter().filter(|c| c.code.is_none()).count(),
        rank1,
        localization,
        distribution,
        regions,
    })
}

#[derive(Serialize)]
struct Rank1Row<'a> {
    protocol: Protocol,
    enroll_n: usize,
    subjects: usize,
    probes: usize,
    correct: usize,
    accuracy_pct: f64,
    error_pct: f64,
    enroll_failures: usize,
    ablation: &'a str,
}

fn rank1_csv(doc: &EvalDoc, cfg: &AppConfig) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    for line in cfg.to_text().lines() {
        buf.extend_from_slice(format!("# {line}\n").as_bytes());
    }
    let mut w = csv::Writer::from_writer(buf);
    for r in &doc.rank1 {
        w.serialize(Rank1Row {
            protocol: r.protocol,
            enroll_n: r.enroll_n,
            subjects: r.subjects,
            probes: r.probes,
            correct: r.correct,
            accuracy_pct: r.accuracy_pct,
            error_pct: r.error_pct(),
            enroll_failures: r.enroll_failures,
            ablation: doc.ablation.as_deref().unwrap_or(""),
        })?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn matrix_image(m: &Matrix) -> GrayImage {
    m.to_image().normalized_for_display()
}

/// Writes the pipeline rasters into `dir`; returns the file names in order.
fn dump_stages(image: &Path, dir: &Path, cfg: &AppConfig) -> Result<Vec<String>> {
    let img = load_gray(image)?;
    let (seg, trace) = segment_traced(&img, &cfg.segmentation)?;
    let (strip, roi, code) = code_from_geometry(&img, &seg.geometry, &cfg.pipeline())?;
    std::fs::create_dir_all(dir)?;
    let code_img = {
        let n = code.segment_len;
        let rows = code.levels.len() / n;
        GrayImage::from_fn(n, rows * 8, |x, y| code.levels[(y / 8) * n + x] as f64 * 85.0)
    };
    let mut stages: Vec<(&str, GrayImage)> = vec![
        ("01_input.pgm", img.clone()),
        ("02_mask.pgm", trace.mask.normalized_for_display()),
        ("03_highlighted.pgm", trace.highlighted.clone()),
        ("04_pupil_edges.pgm", trace.pupil_edges.to_image()),
        ("05_filled.pgm", trace.filled.clone()),
    ];
    if let Some(edges) = &trace.limbic_edges {
        stages.push(("06_limbic_edges.pgm", edges.to_image()));
    }
    stages.extend([
        ("07_overlay.pgm", overlay(&img, &seg.geometry)),
        ("08_strip.pgm", strip.to_image()),
        ("09_roi.pgm", roi.roi.to_image()),
        ("10_enhanced.pgm", matrix_image(&roi.enhanced)),
        ("11_compressed.pgm", matrix_image(&roi.compressed)),
        ("12_code.pgm", code_img),
    ]);
    let mut names = Vec::new();
    for (name, raster) in &stages {
        write_pgm(dir.join(name), raster)?;
        names.push(name.to_string());
    }
    let summary = serde_json::json!({
        "image": image.display().to_string(),
        "estimate": trace.estimate,
        "refined": trace.refined,
        "geometry": seg.geometry,
        "flags": seg.flags,
        "code_levels": code.levels.len(),
    });
    std::fs::write(dir.join("stages.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    names.push("stages.json".into());
    Ok(names)
}
