//! The experiment harness: degradation, per-run execution, and the
//! reproducibility plumbing (seed mixing, deterministic task grids).

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use sargd_core::{
    bicubic_resize, encode, io, run_sargd_observed, splitmix64, BinaryMask, CodecSpec, ImageRgb,
    Scale, Trace,
};

use crate::config::{build_variant, ExperimentConfig, VariantInputs};
use crate::report;

/// One completed run.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub image: String,
    pub scale: u32,
    pub variant: String,
    pub psnr_y: f64,
    pub ssim_y: f64,
    pub wall_ms: u64,
    pub seed: u64,
    pub trace_path: PathBuf,
}

/// The documented seed-mixing rule: every run's seed is derivable from
/// `(master_seed, image index, variant index)`.
pub fn run_seed(master_seed: u64, image_idx: usize, variant_idx: usize) -> u64 {
    let a = splitmix64(master_seed ^ (image_idx as u64).wrapping_mul(0xA24B_AED4_963E_E407));
    splitmix64(a ^ (variant_idx as u64).wrapping_mul(0x9FB2_1C65_1E98_DF25))
}

/// Per-image seed shared by all variants (artifact placement).
pub fn image_seed(master_seed: u64, image_idx: usize) -> u64 {
    splitmix64(master_seed ^ (image_idx as u64).wrapping_mul(0xA24B_AED4_963E_E407))
}

/// Center-crop to dimensions divisible by `scale`.
pub fn center_crop_to_multiple(hr: &ImageRgb<f32>, scale: u32) -> Result<ImageRgb<f32>> {
    let s = scale as usize;
    let ch = (hr.height() / s) * s;
    let cw = (hr.width() / s) * s;
    if ch == 0 || cw == 0 {
        bail!(
            "image {}x{} smaller than scale {s}",
            hr.height(),
            hr.width()
        );
    }
    let y0 = (hr.height() - ch) / 2;
    let x0 = (hr.width() - cw) / 2;
    Ok(ImageRgb::from_fn(ch, cw, |y, x| hr.get(y0 + y, x0 + x)))
}

/// Degrade an HR image to LR: center-crop to a multiple of the scale,
/// then antialiased bicubic downscale.
pub fn make_lr(hr: &ImageRgb<f32>, scale: u32) -> Result<ImageRgb<f32>> {
    let cropped = center_crop_to_multiple(hr, scale)?;
    Ok(bicubic_resize(&cropped, Scale::down(scale))?)
}

/// A dataset image successfully loaded from disk.
pub struct DatasetImage {
    pub id: String,
    pub image: ImageRgb<f32>,
}

/// Load every `.png` under `dir` in sorted filename order; unreadable
/// files are skipped with a warning on stderr.
pub fn load_dataset(dir: &Path) -> Result<Vec<DatasetImage>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading dataset dir {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().map(|e| e == "png").unwrap_or(false))
        .collect();
    paths.sort();
    let mut out = Vec::new();
    for p in paths {
        match io::read_png_rgb::<f32>(&p) {
            Ok(image) => {
                let id = p
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "image".into());
                out.push(DatasetImage { id, image });
            }
            Err(e) => eprintln!("warning: skipping unreadable image {}: {e}", p.display()),
        }
    }
    if out.is_empty() {
        bail!("no readable PNG images in {}", dir.display());
    }
    Ok(out)
}

struct Task {
    image_idx: usize,
    image_id: String,
    hr: ImageRgb<f32>,
    scale: u32,
    variant_idx: usize,
    variant: String,
}

struct TaskOutput {
    record: RunRecord,
    trace: Trace,
    output: ImageRgb<f32>,
    final_mask: Option<BinaryMask>,
}

fn run_task(cfg: &ExperimentConfig, task: &Task, total_steps: usize) -> Result<TaskOutput> {
    let hr = center_crop_to_multiple(&task.hr, task.scale)?;
    let lr = make_lr(&task.hr, task.scale)?;
    let codec = CodecSpec::identity();
    let hr_prior = encode(&hr, &codec)?;
    let (_, lh, lw) = hr_prior.shape();

    let seed = run_seed(cfg.master_seed, task.image_idx, task.variant_idx);
    let inputs = VariantInputs {
        hr_prior: &hr_prior,
        image_seed: image_seed(cfg.master_seed, task.image_idx),
        latent_h: lh,
        latent_w: lw,
    };
    let sampler = build_variant(&task.variant, cfg, &inputs, total_steps, seed)?;

    let started = Instant::now();
    let mut final_mask: Option<BinaryMask> = None;
    let (output, trace) = run_sargd_observed(&lr, Scale::up(task.scale), &sampler, |snap| {
        if let Some(m) = snap.artifact_mask {
            final_mask = Some(m.clone());
        }
    })
    .with_context(|| {
        format!(
            "variant '{}' on image '{}' at x{}",
            task.variant, task.image_id, task.scale
        )
    })?;
    let wall_ms = if cfg.deterministic_timing {
        0
    } else {
        started.elapsed().as_millis() as u64
    };

    let psnr = sargd_core::psnr_y(&output, &hr)?;
    let ssim = sargd_core::ssim_y(&output, &hr)?;
    let trace_path = cfg.output_dir.join("traces").join(format!(
        "{}_x{}_{}.csv",
        task.image_id, task.scale, task.variant
    ));

    Ok(TaskOutput {
        record: RunRecord {
            image: task.image_id.clone(),
            scale: task.scale,
            variant: task.variant.clone(),
            psnr_y: psnr,
            ssim_y: ssim,
            wall_ms,
            seed,
            trace_path,
        },
        trace,
        output,
        final_mask,
    })
}

/// Everything `run_experiment` produced, for callers that want the
/// records in memory as well as on disk.
pub struct ExperimentOutput {
    pub records: Vec<RunRecord>,
    pub results_csv: PathBuf,
    pub summary_md: PathBuf,
}

/// Run the full image x scale x variant grid and write all report files.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let dataset = load_dataset(&cfg.dataset_dir)?;
    std::fs::create_dir_all(cfg.output_dir.join("traces"))?;
    std::fs::create_dir_all(cfg.output_dir.join("overlays"))?;
    std::fs::create_dir_all(cfg.output_dir.join("outputs"))?;

    let mut tasks = Vec::new();
    for &scale in &cfg.scales {
        for (image_idx, img) in dataset.iter().enumerate() {
            for (variant_idx, variant) in cfg.variants.iter().enumerate() {
                tasks.push(Task {
                    image_idx,
                    image_id: img.id.clone(),
                    hr: img.image.clone(),
                    scale,
                    variant_idx,
                    variant: variant.clone(),
                });
            }
        }
    }

    let run_all = || -> Result<Vec<TaskOutput>> {
        tasks
            .par_iter()
            .map(|t| run_task(cfg, t, cfg.total_steps))
            .collect()
    };
    let outputs = if cfg.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .context("building worker pool")?
            .install(run_all)?
    } else {
        run_all()?
    };

    let mut records = Vec::with_capacity(outputs.len());
    for out in &outputs {
        io::write_trace_csv(&out.record.trace_path, &out.trace)?;
        let stem = format!(
            "{}_x{}_{}",
            out.record.image, out.record.scale, out.record.variant
        );
        io::write_png_rgb(
            &cfg.output_dir.join("outputs").join(format!("{stem}.png")),
            &out.output,
        )?;
        if let Some(mask) = &out.final_mask {
            let overlay = report::tint_overlay(&out.output, mask);
            io::write_png_rgb(
                &cfg.output_dir.join("overlays").join(format!("{stem}.png")),
                &overlay,
            )?;
        }
        records.push(out.record.clone());
    }

    let results_csv = cfg.output_dir.join("results.csv");
    report::write_results_csv(&results_csv, &records)?;
    let summary_md = cfg.output_dir.join("summary.md");
    report::write_summary_md(&summary_md, &records)?;

    Ok(ExperimentOutput {
        records,
        results_csv,
        summary_md,
    })
}

/// One `rgr_sag` run per step count per image (first configured scale);
/// returns `(T, mean psnr)` rows sorted by `T` and writes them as CSV.
pub fn run_step_sweep(cfg: &ExperimentConfig) -> Result<(PathBuf, Vec<(usize, f64)>)> {
    cfg.validate()?;
    if cfg.step_sweep.is_empty() {
        bail!("step_sweep must be non-empty");
    }
    let dataset = load_dataset(&cfg.dataset_dir)?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    let scale = cfg.scales[0];

    let mut sweep: Vec<usize> = cfg.step_sweep.clone();
    sweep.sort_unstable();
    sweep.dedup();

    let variant_idx = 0usize;
    let mut rows = Vec::with_capacity(sweep.len());
    for &total in &sweep {
        let psnrs: Vec<f64> = dataset
            .par_iter()
            .enumerate()
            .map(|(image_idx, img)| -> Result<f64> {
                let task = Task {
                    image_idx,
                    image_id: img.id.clone(),
                    hr: img.image.clone(),
                    scale,
                    variant_idx,
                    variant: "rgr_sag".into(),
                };
                let out = run_task(cfg, &task, total)?;
                Ok(out.record.psnr_y)
            })
            .collect::<Result<Vec<_>>>()?;
        let mean = psnrs.iter().sum::<f64>() / psnrs.len() as f64;
        rows.push((total, mean));
    }

    let path = cfg.output_dir.join("step_sweep.csv");
    let mut text = String::from("T,mean_psnr_y\n");
    for (t, p) in &rows {
        text.push_str(&format!("{t},{p:.6}\n"));
    }
    std::fs::write(&path, text)?;
    Ok((path, rows))
}
