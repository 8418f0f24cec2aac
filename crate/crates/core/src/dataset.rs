//! IDX ingestion and dictionary construction.
//!
//! Image files:
//! ```text
//! [0..4)    magic 0x00000803 (unsigned byte, 3 dimensions), big-endian
//! [4..8)    image count, big-endian u32
//! [8..12)   rows
//! [12..16)  cols
//! [16..)    count * rows * cols unsigned bytes, row-major
//! ```
//! Label files use magic 0x00000801 followed by the count and one byte per label.
//! Files may be gzip-compressed on disk; [`read_idx_file`] inflates them.

use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::Path;

use flate2::read::GzDecoder;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

const IMAGE_HEADER_LEN: usize = 16;
const LABEL_HEADER_LEN: usize = 8;

/// Decoded contents of an IDX3 unsigned-byte image file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawIdxImages {
    pub count: u32,
    pub rows: u32,
    pub cols: u32,
    pub pixels: Vec<u8>,
}

impl RawIdxImages {
    pub fn magic(&self) -> u32 {
        IDX_IMAGES_MAGIC
    }

    pub fn pixels_per_image(&self) -> usize {
        self.rows as usize * self.cols as usize
    }

    pub fn image(&self, i: usize) -> &[u8] {
        let n = self.pixels_per_image();
        &self.pixels[i * n..(i + 1) * n]
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(IMAGE_HEADER_LEN + self.pixels.len());
        out.extend_from_slice(&IDX_IMAGES_MAGIC.to_be_bytes());
        out.extend_from_slice(&self.count.to_be_bytes());
        out.extend_from_slice(&self.rows.to_be_bytes());
        out.extend_from_slice(&self.cols.to_be_bytes());
        out.extend_from_slice(&self.pixels);
        out
    }
}

fn be_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_be_bytes(bytes[at..at + 4].try_into().unwrap())
}

fn check_payload(expected: usize, actual: usize) -> Result<()> {
    match actual.cmp(&expected) {
        std::cmp::Ordering::Less => Err(Error::Truncated { expected, actual }),
        std::cmp::Ordering::Greater => Err(Error::Oversize { expected, actual }),
        std::cmp::Ordering::Equal => Ok(()),
    }
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<RawIdxImages> {
    if bytes.len() < 4 {
        return Err(Error::Truncated {
            expected: IMAGE_HEADER_LEN,
            actual: bytes.len(),
        });
    }
    let magic = be_u32(bytes, 0);
    if magic != IDX_IMAGES_MAGIC {
        return Err(Error::BadMagic {
            expected: IDX_IMAGES_MAGIC,
            found: magic,
        });
    }
    if bytes.len() < IMAGE_HEADER_LEN {
        return Err(Error::Truncated {
            expected: IMAGE_HEADER_LEN,
            actual: bytes.len(),
        });
    }
    let count = be_u32(bytes, 4);
    let rows = be_u32(bytes, 8);
    let cols = be_u32(bytes, 12);
    let payload = count as u64 * rows as u64 * cols as u64;
    let expected = usize::try_from(payload)
        .ok()
        .and_then(|p| p.checked_add(IMAGE_HEADER_LEN))
        .unwrap_or(usize::MAX);
    check_payload(expected, bytes.len())?;
    Ok(RawIdxImages {
        count,
        rows,
        cols,
        pixels: bytes[IMAGE_HEADER_LEN..].to_vec(),
    })
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    if bytes.len() < 4 {
        return Err(Error::Truncated {
            expected: LABEL_HEADER_LEN,
            actual: bytes.len(),
        });
    }
    let magic = be_u32(bytes, 0);
    if magic != IDX_LABELS_MAGIC {
        return Err(Error::BadMagic {
            expected: IDX_LABELS_MAGIC,
            found: magic,
        });
    }
    if bytes.len() < LABEL_HEADER_LEN {
        return Err(Error::Truncated {
            expected: LABEL_HEADER_LEN,
            actual: bytes.len(),
        });
    }
    let count = be_u32(bytes, 4) as usize;
    check_payload(LABEL_HEADER_LEN + count, bytes.len())?;
    Ok(bytes[LABEL_HEADER_LEN..].to_vec())
}

pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(LABEL_HEADER_LEN + labels.len());
    out.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

/// Reads a file, transparently inflating gzip content (detected by its magic bytes).
pub fn read_idx_file(path: &Path) -> Result<Vec<u8>> {
    let raw = fs::read(path).map_err(|e| Error::file(path, e))?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(raw.as_slice())
            .read_to_end(&mut out)
            .map_err(|e| Error::file(path, e))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

/// M images stored as rows of an M×N matrix, pixel values in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct ImageDictionary {
    images: Vec<f64>,
    width: usize,
    height: usize,
    labels: Option<Vec<u8>>,
}

impl ImageDictionary {
    /// `images` holds `len * width * height` values in row-major image order.
    pub fn new(
        images: Vec<f64>,
        width: usize,
        height: usize,
        labels: Option<Vec<u8>>,
    ) -> Result<Self> {
        let n = width * height;
        if n == 0 || !images.len().is_multiple_of(n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: images.len(),
            });
        }
        let m = images.len() / n;
        if m == 0 {
            return Err(Error::InsufficientImages {
                needed: 1,
                available: 0,
            });
        }
        if let Some(l) = &labels {
            if l.len() != m {
                return Err(Error::LabelMismatch {
                    images: m,
                    labels: l.len(),
                });
            }
        }
        if let Some(bad) = images.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Config(format!("pixel value {bad} outside [0, 1]")));
        }
        Ok(Self {
            images,
            width,
            height,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.images.len() / self.pixels()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Pixel count N = X·Y.
    pub fn pixels(&self) -> usize {
        self.width * self.height
    }

    pub fn image(&self, i: usize) -> &[f64] {
        let n = self.pixels();
        &self.images[i * n..(i + 1) * n]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.images.chunks_exact(self.pixels())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.images
    }

    pub fn labels(&self) -> Option<&[u8]> {
        self.labels.as_deref()
    }

    /// Dictionary made of the selected images, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut images = Vec::with_capacity(indices.len() * self.pixels());
        for &i in indices {
            images.extend_from_slice(self.image(i));
        }
        let labels = self
            .labels
            .as_ref()
            .map(|l| indices.iter().map(|&i| l[i]).collect());
        Self::new(images, self.width, self.height, labels)
    }
}

/// How training and testing images are drawn from an IDX file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitConfig {
    /// Labels to keep; `None` keeps every image.
    pub categories: Option<Vec<u8>>,
    pub train: usize,
    pub test: usize,
    /// `None` takes images in file order; `Some(seed)` shuffles the pool first.
    pub seed: Option<u64>,
    /// Draw `train / L` and `test / L` images from each of the L selected labels.
    pub balanced: bool,
}

impl SplitConfig {
    pub fn new(train: usize, test: usize) -> Self {
        Self {
            categories: None,
            train,
            test,
            seed: None,
            balanced: false,
        }
    }

    pub fn with_categories(mut self, labels: impl Into<Vec<u8>>) -> Self {
        self.categories = Some(labels.into());
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn balanced(mut self) -> Self {
        self.balanced = true;
        self
    }
}

fn take_split(
    mut pool: Vec<usize>,
    train: usize,
    test: usize,
    seed: Option<u64>,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if pool.len() < train + test {
        return Err(Error::InsufficientImages {
            needed: train + test,
            available: pool.len(),
        });
    }
    if let Some(seed) = seed {
        pool.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let test_idx = pool[train..train + test].to_vec();
    pool.truncate(train);
    Ok((pool, test_idx))
}

/// Indices (into the raw file) of the training and testing images.
pub fn split_indices(
    count: usize,
    labels: Option<&[u8]>,
    cfg: &SplitConfig,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if let Some(l) = labels {
        if l.len() != count {
            return Err(Error::LabelMismatch {
                images: count,
                labels: l.len(),
            });
        }
    }
    let wants_labels = cfg.categories.is_some() || cfg.balanced;
    let labels = match (labels, wants_labels) {
        (Some(l), _) => Some(l),
        (None, true) => {
            return Err(Error::Config(
                "category filtering requires a label file".into(),
            ))
        }
        (None, false) => None,
    };
    let keep = |i: usize| match (&cfg.categories, labels) {
        (Some(cats), Some(l)) => cats.contains(&l[i]),
        _ => true,
    };

    if !cfg.balanced {
        let pool: Vec<usize> = (0..count).filter(|&i| keep(i)).collect();
        return take_split(pool, cfg.train, cfg.test, cfg.seed);
    }

    let labels = labels.expect("checked above");
    let mut pools: BTreeMap<u8, Vec<usize>> = BTreeMap::new();
    for i in (0..count).filter(|&i| keep(i)) {
        pools.entry(labels[i]).or_default().push(i);
    }
    if let Some(cats) = &cfg.categories {
        for c in cats {
            pools.entry(*c).or_default();
        }
    }
    let classes = pools.len();
    if classes == 0 || !cfg.train.is_multiple_of(classes) || !cfg.test.is_multiple_of(classes) {
        return Err(Error::Config(format!(
            "balanced split of {}/{} over {classes} classes is not even",
            cfg.train, cfg.test
        )));
    }
    let (per_train, per_test) = (cfg.train / classes, cfg.test / classes);
    let mut train = Vec::with_capacity(cfg.train);
    let mut test = Vec::with_capacity(cfg.test);
    for (label, pool) in pools {
        let seed = cfg
            .seed
            .map(|s| s ^ u64::from(label).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let (tr, te) = take_split(pool, per_train, per_test, seed)?;
        train.extend(tr);
        test.extend(te);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Rescales the raw bytes to [0, 1] and splits them into training and testing dictionaries.
pub fn to_dictionary(
    raw: &RawIdxImages,
    labels: Option<&[u8]>,
    cfg: &SplitConfig,
) -> Result<(ImageDictionary, ImageDictionary)> {
    let (train, test) = split_indices(raw.count as usize, labels, cfg)?;
    let build = |idx: &[usize]| {
        let mut images = Vec::with_capacity(idx.len() * raw.pixels_per_image());
        for &i in idx {
            images.extend(raw.image(i).iter().map(|&b| f64::from(b) / 255.0));
        }
        let tags = labels.map(|l| idx.iter().map(|&i| l[i]).collect());
        ImageDictionary::new(images, raw.cols as usize, raw.rows as usize, tags)
    };
    Ok((build(&train)?, build(&test)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn images(count: u32, rows: u32, cols: u32, pixels: Vec<u8>) -> Vec<u8> {
        RawIdxImages {
            count,
            rows,
            cols,
            pixels,
        }
        .to_bytes()
    }

    #[test]
    fn single_pixel_file() {
        let raw = parse_idx_images(&images(1, 1, 1, vec![255])).unwrap();
        assert_eq!((raw.count, raw.rows, raw.cols), (1, 1, 1));
        assert_eq!(raw.pixels, vec![255]);
    }

    #[test]
    fn short_payload_is_truncated() {
        let bytes = images(2, 2, 2, vec![0; 4]);
        assert!(matches!(
            parse_idx_images(&bytes),
            Err(Error::Truncated {
                expected: 24,
                actual: 20
            })
        ));
    }

    #[test]
    fn long_payload_is_oversize() {
        let bytes = images(1, 2, 2, vec![0; 5]);
        assert!(matches!(
            parse_idx_images(&bytes),
            Err(Error::Oversize { .. })
        ));
    }

    #[test]
    fn wrong_magic() {
        let mut bytes = images(1, 1, 1, vec![7]);
        bytes[3] = 0x01;
        assert!(matches!(
            parse_idx_images(&bytes),
            Err(Error::BadMagic { found: 0x801, .. })
        ));
        assert!(matches!(
            parse_idx_labels(&images(1, 1, 1, vec![7])),
            Err(Error::BadMagic { found: 0x803, .. })
        ));
    }

    #[test]
    fn header_only_fragment_is_truncated() {
        assert!(matches!(
            parse_idx_images(&IDX_IMAGES_MAGIC.to_be_bytes()),
            Err(Error::Truncated { .. })
        ));
        assert!(matches!(
            parse_idx_images(&[]),
            Err(Error::Truncated { .. })
        ));
    }

    #[test]
    fn labels_round_trip() {
        let labels = vec![3, 1, 4, 1, 5];
        let bytes = encode_idx_labels(&labels);
        assert_eq!(parse_idx_labels(&bytes).unwrap(), labels);
        assert!(matches!(
            parse_idx_labels(&bytes[..bytes.len() - 1]),
            Err(Error::Truncated { .. })
        ));
    }

    #[test]
    fn all_zero_image_maps_to_zero_row() {
        let raw = parse_idx_images(&images(2, 2, 2, vec![0, 0, 0, 0, 255, 51, 0, 0])).unwrap();
        let (train, test) = to_dictionary(&raw, None, &SplitConfig::new(1, 1)).unwrap();
        assert_eq!(train.image(0), &[0.0; 4]);
        assert_eq!(test.image(0), &[1.0, 0.2, 0.0, 0.0]);
    }

    #[test]
    fn filtered_split_in_file_order() {
        let labels = [1u8, 0, 1, 1, 2, 1];
        let cfg = SplitConfig::new(2, 1).with_categories([1]);
        let (tr, te) = split_indices(6, Some(&labels), &cfg).unwrap();
        assert_eq!(tr, vec![0, 2]);
        assert_eq!(te, vec![3]);
    }

    #[test]
    fn insufficient_pool() {
        let labels = [1u8, 0, 1];
        let cfg = SplitConfig::new(2, 1).with_categories([1]);
        assert!(matches!(
            split_indices(3, Some(&labels), &cfg),
            Err(Error::InsufficientImages {
                needed: 3,
                available: 2
            })
        ));
    }

    #[test]
    fn label_length_must_match() {
        let cfg = SplitConfig::new(1, 0).with_categories([0]);
        assert!(matches!(
            split_indices(3, Some(&[0, 0]), &cfg),
            Err(Error::LabelMismatch { .. })
        ));
    }

    #[test]
    fn balanced_split_per_class() {
        let labels: Vec<u8> = (0..40).map(|i| (i % 4) as u8).collect();
        let cfg = SplitConfig::new(8, 4).balanced();
        let (tr, te) = split_indices(40, Some(&labels), &cfg).unwrap();
        for c in 0..4u8 {
            assert_eq!(tr.iter().filter(|&&i| labels[i] == c).count(), 2);
            assert_eq!(te.iter().filter(|&&i| labels[i] == c).count(), 1);
        }
        assert!(tr.iter().all(|i| !te.contains(i)));
        assert!(split_indices(40, Some(&labels), &SplitConfig::new(6, 4).balanced()).is_err());
    }

    #[test]
    fn seeded_split_is_reproducible() {
        let cfg = SplitConfig::new(10, 5).with_seed(42);
        let a = split_indices(100, None, &cfg).unwrap();
        let b = split_indices(100, None, &cfg).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.0, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn gzip_files_are_inflated() {
        use flate2::write::GzEncoder;
        use std::io::Write;

        let bytes = images(1, 1, 2, vec![9, 8]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.gz");
        let mut enc = GzEncoder::new(Vec::new(), flate2::Compression::default());
        enc.write_all(&bytes).unwrap();
        fs::write(&path, enc.finish().unwrap()).unwrap();
        assert_eq!(read_idx_file(&path).unwrap(), bytes);
    }
}
