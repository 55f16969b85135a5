//! Run configuration: a flat `key = value` file keyed by the long flag names
//! (without `--`), overlaid by whatever flags were given.
//!
//! ```text
//! dataset = ferplus
//! pixels = data/fer2013.csv
//! labels = data/fer2013new.csv
//! landmarks = data/landmarks.jsonl
//! out = out/ferplus
//! size = 224x224
//! no-flip = true
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use vrocc_core::dataset::{load_affectnet, load_ferplus, load_rafdb, AffectNetLayout, Dataset, OcclusionOptions};
use vrocc_core::HeadsetSpec;

use crate::Failure;

pub const KEYS: [&str; 19] = [
    "dataset",
    "pixels",
    "labels",
    "image-root",
    "label-list",
    "manifest-csv",
    "affectnet-layout",
    "landmarks",
    "out",
    "headset-width-mm",
    "headset-height-mm",
    "head-breadth-mm",
    "vertical-offset-mm",
    "fill",
    "size",
    "no-normalize",
    "no-flip",
    "no-replicate",
    "workers",
];

#[derive(Debug, Default, Clone)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Self, Failure> {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut settings = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |m: &str| Failure::usage(format!("{}:{}: {m}", path.display(), idx + 1));
            let (key, value) = line.split_once('=').ok_or_else(|| bad("expected `key = value`"))?;
            let key = key.trim().trim_start_matches("--");
            if !KEYS.contains(&key) {
                return Err(bad(&format!("unknown key {key:?}")));
            }
            settings.values.insert(key.to_string(), value.trim().to_string());
        }
        Ok(settings)
    }

    pub fn set(&mut self, key: &str, value: Option<impl ToString>) {
        debug_assert!(KEYS.contains(&key), "{key}");
        if let Some(v) = value {
            self.values.insert(key.to_string(), v.to_string());
        }
    }

    /// A boolean flag only ever switches its option on.
    pub fn flag(&mut self, key: &str, on: bool) {
        if on {
            self.set(key, Some("true"));
        }
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>, Failure>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| v.parse().map_err(|e| Failure::usage(format!("--{key} {v:?}: {e}"))))
            .transpose()
    }

    fn required(&self, key: &str, context: &str) -> Result<&str, Failure> {
        self.get(key)
            .ok_or_else(|| Failure::usage(format!("missing required option --{key}{context}")))
    }

    /// A path that must already exist.
    fn input(&self, key: &str, context: &str) -> Result<PathBuf, Failure> {
        let p = PathBuf::from(self.required(key, context)?);
        if !p.exists() {
            return Err(Failure::usage(format!("--{key}: {} does not exist", p.display())));
        }
        Ok(p)
    }

    fn optional_input(&self, key: &str) -> Result<Option<PathBuf>, Failure> {
        self.get(key).map(|_| self.input(key, "")).transpose()
    }

    fn switch(&self, key: &str) -> Result<bool, Failure> {
        Ok(self.parse(key)?.unwrap_or(false))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    FerPlus {
        pixels: PathBuf,
        labels: PathBuf,
    },
    RafDb {
        image_root: PathBuf,
        label_list: PathBuf,
    },
    AffectNet {
        manifest_csv: PathBuf,
        image_root: PathBuf,
        layout: Option<PathBuf>,
    },
}

impl Source {
    pub fn resolve(s: &Settings) -> Result<Self, Failure> {
        let dataset = s.required("dataset", "")?;
        let ctx = format!(" for --dataset {dataset}");
        Ok(match dataset {
            "ferplus" => Self::FerPlus {
                pixels: s.input("pixels", &ctx)?,
                labels: s.input("labels", &ctx)?,
            },
            "rafdb" => Self::RafDb {
                image_root: s.input("image-root", &ctx)?,
                label_list: s.input("label-list", &ctx)?,
            },
            "affectnet" => Self::AffectNet {
                manifest_csv: s.input("manifest-csv", &ctx)?,
                image_root: s.input("image-root", &ctx)?,
                layout: s.optional_input("affectnet-layout")?,
            },
            other => {
                return Err(Failure::usage(format!(
                    "--dataset {other:?}: expected ferplus, rafdb or affectnet"
                )))
            }
        })
    }

    /// Reads the adapter inputs. Layout problems are configuration errors;
    /// everything else is a runtime failure.
    pub fn load(&self) -> Result<Dataset, Failure> {
        let loaded = match self {
            Self::FerPlus { pixels, labels } => load_ferplus(pixels, labels),
            Self::RafDb { image_root, label_list } => load_rafdb(image_root, label_list),
            Self::AffectNet {
                manifest_csv,
                image_root,
                layout,
            } => {
                let layout = match layout {
                    Some(p) => AffectNetLayout::from_file(p).map_err(|e| Failure::usage(e.to_string()))?,
                    None => AffectNetLayout::default(),
                };
                load_affectnet(manifest_csv, image_root, &layout)
            }
        };
        loaded.map_err(|e| Failure::Runtime(e.into()))
    }

    fn write_to(&self, out: &mut String) {
        let mut kv = |k: &str, p: &Path| writeln!(out, "{k} = {}", absolute(p).display()).unwrap();
        match self {
            Self::FerPlus { pixels, labels } => {
                kv("pixels", pixels);
                kv("labels", labels);
            }
            Self::RafDb { image_root, label_list } => {
                kv("image-root", image_root);
                kv("label-list", label_list);
            }
            Self::AffectNet {
                manifest_csv,
                image_root,
                layout,
            } => {
                kv("manifest-csv", manifest_csv);
                kv("image-root", image_root);
                if let Some(l) = layout {
                    kv("affectnet-layout", l);
                }
            }
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Self::FerPlus { .. } => "ferplus",
            Self::RafDb { .. } => "rafdb",
            Self::AffectNet { .. } => "affectnet",
        }
    }
}

fn absolute(p: &Path) -> PathBuf {
    fs::canonicalize(p).unwrap_or_else(|_| {
        std::env::current_dir()
            .map(|d| d.join(p))
            .unwrap_or_else(|_| p.to_path_buf())
    })
}

/// Headset dimensions and fill value; shared by every subcommand that
/// places a patch.
pub fn resolve_headset(s: &Settings) -> Result<(HeadsetSpec, u8), Failure> {
    let d = HeadsetSpec::default();
    let spec = HeadsetSpec {
        width_mm: s.parse("headset-width-mm")?.unwrap_or(d.width_mm),
        height_mm: s.parse("headset-height-mm")?.unwrap_or(d.height_mm),
        head_breadth_mm: s.parse("head-breadth-mm")?.unwrap_or(d.head_breadth_mm),
        vertical_offset_mm: s.parse("vertical-offset-mm")?.unwrap_or(d.vertical_offset_mm),
    };
    spec.validate().map_err(|e| Failure::usage(format!("headset: {e}")))?;
    Ok((spec, s.parse("fill")?.unwrap_or(0)))
}

/// `WxH`, or `native` to keep each image's own size.
fn parse_size(text: &str) -> Result<Option<(u32, u32)>, Failure> {
    if text == "native" {
        return Ok(None);
    }
    let bad = || Failure::usage(format!("--size {text:?}: expected WxH or native"));
    let (w, h) = text.split_once(['x', 'X']).ok_or_else(bad)?;
    let (w, h): (u32, u32) = (w.parse().map_err(|_| bad())?, h.parse().map_err(|_| bad())?);
    if w == 0 || h == 0 {
        return Err(bad());
    }
    Ok(Some((w, h)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub source: Source,
    pub landmarks: PathBuf,
    pub out: PathBuf,
    pub spec: HeadsetSpec,
    pub fill: u8,
    pub options: OcclusionOptions,
}

impl RunConfig {
    pub fn resolve(s: &Settings) -> Result<Self, Failure> {
        let source = Source::resolve(s)?;
        let landmarks = s.input("landmarks", "")?;
        let out = PathBuf::from(s.required("out", "")?);
        let (spec, fill) = resolve_headset(s)?;
        let output_size = parse_size(s.get("size").unwrap_or("224x224"))?;
        let default_workers = std::thread::available_parallelism().map_or(1, |n| n.get());
        let workers: usize = s.parse("workers")?.unwrap_or(default_workers);
        if workers == 0 {
            return Err(Failure::usage("--workers must be at least 1"));
        }
        Ok(Self {
            source,
            landmarks,
            out,
            spec,
            fill,
            options: OcclusionOptions {
                output_size,
                normalize: !s.switch("no-normalize")?,
                flip: !s.switch("no-flip")?,
                replicate_channels: !s.switch("no-replicate")?,
                workers,
            },
        })
    }

    /// Every option with its effective value, in config-file syntax. Paths
    /// are made absolute so the file works from any directory.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "dataset = {}", self.source.name()).unwrap();
        self.source.write_to(&mut out);
        let o = &self.options;
        let size = o.output_size.map_or("native".to_string(), |(w, h)| format!("{w}x{h}"));
        let lines = [
            ("landmarks", absolute(&self.landmarks).display().to_string()),
            ("out", absolute(&self.out).display().to_string()),
            ("headset-width-mm", self.spec.width_mm.to_string()),
            ("headset-height-mm", self.spec.height_mm.to_string()),
            ("head-breadth-mm", self.spec.head_breadth_mm.to_string()),
            ("vertical-offset-mm", self.spec.vertical_offset_mm.to_string()),
            ("fill", self.fill.to_string()),
            ("size", size),
            ("no-normalize", (!o.normalize).to_string()),
            ("no-flip", (!o.flip).to_string()),
            ("no-replicate", (!o.replicate_channels).to_string()),
            ("workers", o.workers.to_string()),
        ];
        for (k, v) in lines {
            writeln!(out, "{k} = {v}").unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(parse_size("224x224").unwrap(), Some((224, 224)));
        assert_eq!(parse_size("64X32").unwrap(), Some((64, 32)));
        assert_eq!(parse_size("native").unwrap(), None);
        for bad in ["224", "0x10", "ax b", "10x"] {
            assert!(parse_size(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn later_values_win() {
        let mut s = Settings::default();
        s.set("fill", Some(3));
        s.set("fill", None::<u8>);
        assert_eq!(s.parse::<u8>("fill").unwrap(), Some(3));
        s.set("fill", Some(9));
        assert_eq!(s.parse::<u8>("fill").unwrap(), Some(9));
    }

    #[test]
    fn headset_defaults_and_validation() {
        let (spec, fill) = resolve_headset(&Settings::default()).unwrap();
        assert_eq!(spec, HeadsetSpec::default());
        assert_eq!(fill, 0);
        let mut s = Settings::default();
        s.set("headset-width-mm", Some(-1.0));
        assert!(matches!(resolve_headset(&s), Err(Failure::Usage(_))));
    }
}
