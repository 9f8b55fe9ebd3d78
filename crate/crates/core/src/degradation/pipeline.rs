//! Batch driver: degrade a list of files in parallel with per-index seeds.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::{maybe_degrade, Degradation, DegradeConfig};
use crate::distortions::Distorter;
use crate::error::{Error, Result};
use crate::imgproc::{load_image, save_png};
use crate::rng::{derive_seed, rng_from_seed};

const IMAGE_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

#[derive(Clone, Debug, Default)]
pub struct PipelineOptions {
    /// Skip an image whose composition needs a missing codec instead of failing it.
    pub skip_unsupported: bool,
}

#[derive(Debug)]
pub enum FileOutcome {
    Written(super::ManifestRecord),
    Skipped { source_path: PathBuf, reason: String },
    Failed { source_path: PathBuf, error: Error },
}

impl FileOutcome {
    pub fn is_failure(&self) -> bool {
        matches!(self, FileOutcome::Failed { .. })
    }
}

/// Lists image files under `path` in sorted order, or `path` itself if it is a file.
pub fn collect_inputs(path: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let path = path.as_ref();
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let entries = std::fs::read_dir(path).map_err(|e| Error::io(path, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let p = entry.map_err(|e| Error::io(path, e))?.path();
        let is_image = p
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()));
        if p.is_file() && is_image {
            files.push(p);
        }
    }
    files.sort();
    Ok(files)
}

fn output_name(index: usize, source: &Path, pristine: bool) -> String {
    let stem = source.file_stem().and_then(|s| s.to_str()).unwrap_or("image");
    let ext = if pristine { source.extension().and_then(|s| s.to_str()).unwrap_or("png") } else { "png" };
    format!("{index:05}_{stem}.{ext}")
}

fn degrade_one(
    index: usize,
    source: &Path,
    output_dir: &Path,
    config: &DegradeConfig,
    distorter: &Distorter,
    options: &PipelineOptions,
) -> FileOutcome {
    let seed = derive_seed(config.master_seed, index as u64);
    let fail = |error| FileOutcome::Failed { source_path: source.to_path_buf(), error };
    let img = match load_image(source) {
        Ok(img) => img,
        Err(e) => return fail(e),
    };
    let mut rng = rng_from_seed(seed);
    let (out, degradation) = match maybe_degrade(&img, config, distorter, &mut rng) {
        Ok(v) => v,
        Err(Error::UnsupportedDistortion(kind)) if options.skip_unsupported => {
            return FileOutcome::Skipped {
                source_path: source.to_path_buf(),
                reason: format!("composition uses unsupported kind `{kind}`"),
            }
        }
        Err(e) => return fail(e),
    };
    let out_path = output_dir.join(output_name(index, source, degradation.is_pristine()));
    let written = match &degradation {
        Degradation::Pristine => std::fs::copy(source, &out_path).map(|_| ()).map_err(|e| Error::io(&out_path, e)),
        Degradation::Composed(_) => save_png(&out, &out_path),
    };
    if let Err(e) = written {
        return fail(e);
    }
    FileOutcome::Written(super::ManifestRecord::new(
        source.to_string_lossy(),
        out_path.to_string_lossy(),
        seed,
        &degradation,
        distorter,
    ))
}

/// Degrades every input into `output_dir`. Input `i` uses the stream seeded by
/// `(config.master_seed, i)`; outcomes come back in input order.
pub fn degrade_files(
    inputs: &[PathBuf],
    output_dir: impl AsRef<Path>,
    config: &DegradeConfig,
    distorter: &Distorter,
    options: &PipelineOptions,
) -> Result<Vec<FileOutcome>> {
    config.validate()?;
    let output_dir = output_dir.as_ref();
    std::fs::create_dir_all(output_dir).map_err(|e| Error::io(output_dir, e))?;
    Ok(inputs
        .par_iter()
        .enumerate()
        .map(|(i, src)| degrade_one(i, src, output_dir, config, distorter, options))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imgproc::ImageBuffer;

    fn write_inputs(dir: &Path, n: usize) -> Vec<PathBuf> {
        (0..n)
            .map(|i| {
                let img = ImageBuffer::from_fn(48, 40, |x, y| {
                    [((x * (i + 3)) % 17) as f32 / 16.0, ((y * 7 + i) % 13) as f32 / 12.0, ((x + y) % 9) as f32 / 8.0]
                })
                .unwrap();
                let p = dir.join(format!("img{i}.png"));
                save_png(&img, &p).unwrap();
                p
            })
            .collect()
    }

    #[test]
    fn pristine_copies_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let inputs = write_inputs(dir.path(), 1);
        let config = DegradeConfig { p_prist: 1.0, ..Default::default() };
        let out = dir.path().join("out");
        let res = degrade_files(&inputs, &out, &config, &Distorter::default(), &Default::default()).unwrap();
        let FileOutcome::Written(rec) = &res[0] else { panic!("{res:?}") };
        assert!(rec.pristine && rec.steps.is_empty());
        assert_eq!(std::fs::read(&rec.output_path).unwrap(), std::fs::read(&inputs[0]).unwrap());
    }

    #[test]
    fn unreadable_file_is_a_per_file_failure() {
        let dir = tempfile::tempdir().unwrap();
        let mut inputs = write_inputs(dir.path(), 2);
        let bad = dir.path().join("bad.png");
        std::fs::write(&bad, b"not an image").unwrap();
        inputs.insert(1, bad);
        let res = degrade_files(
            &inputs,
            dir.path().join("o"),
            &Default::default(),
            &Distorter::default(),
            &Default::default(),
        )
        .unwrap();
        assert_eq!(res.iter().filter(|r| r.is_failure()).count(), 1);
        assert!(res[1].is_failure());
    }

    #[test]
    fn unsupported_kind_skips_or_fails() {
        let dir = tempfile::tempdir().unwrap();
        let inputs = write_inputs(dir.path(), 1);
        let excluded = crate::distortions::DistortionKind::ALL
            .into_iter()
            .filter(|k| *k != crate::distortions::DistortionKind::Jpeg2000)
            .collect();
        let config = DegradeConfig { p_prist: 0.0, excluded_kinds: excluded, ..Default::default() };
        let d = Distorter::default();
        let strict = degrade_files(&inputs, dir.path().join("a"), &config, &d, &Default::default()).unwrap();
        assert!(strict[0].is_failure());
        let lax = PipelineOptions { skip_unsupported: true };
        let skipped = degrade_files(&inputs, dir.path().join("b"), &config, &d, &lax).unwrap();
        assert!(matches!(skipped[0], FileOutcome::Skipped { .. }));
    }

    #[test]
    fn collect_inputs_filters_and_sorts() {
        let dir = tempfile::tempdir().unwrap();
        write_inputs(dir.path(), 3);
        std::fs::write(dir.path().join("notes.txt"), b"x").unwrap();
        let files = collect_inputs(dir.path()).unwrap();
        assert_eq!(files.len(), 3);
        assert!(files.windows(2).all(|w| w[0] < w[1]));
    }
}
