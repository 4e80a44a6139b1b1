//! The 28-label emotion taxonomy, its valence/arousal/dominance coordinates,
//! and elementary geometry in VAD space.
//!
//! Coordinates come from the bundled `data/taxonomy.tsv` and are held as
//! integer hundredths, so a table value converts to the same `f64` a literal
//! like `0.92` would produce.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

const TAXONOMY_TSV: &str = include_str!("../data/taxonomy.tsv");

/// `sqrt(3)`, the length of the unit cube diagonal.
pub const SQRT_3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VadError {
    #[error("unknown emotion label `{0}`")]
    UnknownLabel(String),
    #[error("VAD coordinate {name}={value} outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },
}

macro_rules! emotion_labels {
    ($($variant:ident => $name:literal),+ $(,)?) => {
        /// One of the 27 emotion categories plus `neutral`.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum EmotionLabel {
            $($variant),+
        }

        impl EmotionLabel {
            /// All labels in taxonomy (alphabetical) order.
            pub const ALL: [EmotionLabel; 28] = [$(EmotionLabel::$variant),+];

            /// Lowercase canonical name, e.g. `"gratitude"`.
            pub fn name(self) -> &'static str {
                match self {
                    $(EmotionLabel::$variant => $name),+
                }
            }
        }
    };
}

emotion_labels! {
    Admiration => "admiration",
    Amusement => "amusement",
    Anger => "anger",
    Annoyance => "annoyance",
    Approval => "approval",
    Caring => "caring",
    Confusion => "confusion",
    Curiosity => "curiosity",
    Desire => "desire",
    Disappointment => "disappointment",
    Disapproval => "disapproval",
    Disgust => "disgust",
    Embarrassment => "embarrassment",
    Excitement => "excitement",
    Fear => "fear",
    Gratitude => "gratitude",
    Grief => "grief",
    Joy => "joy",
    Love => "love",
    Nervousness => "nervousness",
    Neutral => "neutral",
    Optimism => "optimism",
    Pride => "pride",
    Realization => "realization",
    Relief => "relief",
    Remorse => "remorse",
    Sadness => "sadness",
    Surprise => "surprise",
}

impl EmotionLabel {
    /// Position in [`EmotionLabel::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    /// Three-letter upper-case code, e.g. `"GRT"`.
    pub fn short_code(self) -> &'static str {
        taxonomy().row(self).short_code
    }

    /// Coordinates of this label.
    pub fn vad(self) -> VadPoint {
        vad_of(self)
    }
}

impl fmt::Display for EmotionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EmotionLabel {
    type Err = VadError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_label(s)
    }
}

impl Serialize for EmotionLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for EmotionLabel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_label(&s).map_err(serde::de::Error::custom)
    }
}

/// A point in the unit VAD cube.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VadPoint {
    v: f64,
    a: f64,
    d: f64,
}

impl VadPoint {
    pub fn new(v: f64, a: f64, d: f64) -> Result<Self, VadError> {
        for (name, value) in [("v", v), ("a", a), ("d", d)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(VadError::OutOfRange { name, value });
            }
        }
        Ok(Self { v, a, d })
    }

    /// Callers guarantee each coordinate lies in [0, 1] (e.g. convex
    /// combinations of valid points).
    pub(crate) fn new_unchecked(v: f64, a: f64, d: f64) -> Self {
        debug_assert!([v, a, d].iter().all(|x| (0.0..=1.0).contains(x)));
        Self { v, a, d }
    }

    pub const fn origin() -> Self {
        Self {
            v: 0.0,
            a: 0.0,
            d: 0.0,
        }
    }

    pub fn valence(&self) -> f64 {
        self.v
    }

    pub fn arousal(&self) -> f64 {
        self.a
    }

    pub fn dominance(&self) -> f64 {
        self.d
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.v, self.a, self.d]
    }

    pub fn try_from_array(x: [f64; 3]) -> Result<Self, VadError> {
        Self::new(x[0], x[1], x[2])
    }

    /// Distance from the origin.
    pub fn magnitude(&self) -> f64 {
        magnitude(*self)
    }

    pub fn distance(&self, other: &VadPoint) -> f64 {
        distance(*self, *other)
    }
}

impl<'de> Deserialize<'de> for VadPoint {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            v: f64,
            a: f64,
            d: f64,
        }
        let raw = Raw::deserialize(deserializer)?;
        VadPoint::new(raw.v, raw.a, raw.d).map_err(serde::de::Error::custom)
    }
}

/// One row of the bundled taxonomy table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaxonomyRow {
    pub label: EmotionLabel,
    pub short_code: &'static str,
    /// Coordinates in hundredths, exactly as published.
    pub hundredths: [u16; 3],
}

impl TaxonomyRow {
    pub fn point(&self) -> VadPoint {
        let [v, a, d] = self.hundredths.map(|h| f64::from(h) / 100.0);
        VadPoint::new_unchecked(v, a, d)
    }
}

/// Immutable label → coordinate table.
#[derive(Debug)]
pub struct EmotionTaxonomy {
    rows: Vec<TaxonomyRow>,
    points: Vec<VadPoint>,
}

impl EmotionTaxonomy {
    pub fn rows(&self) -> &[TaxonomyRow] {
        &self.rows
    }

    pub fn row(&self, label: EmotionLabel) -> &TaxonomyRow {
        &self.rows[label.index()]
    }

    pub fn point(&self, label: EmotionLabel) -> VadPoint {
        self.points[label.index()]
    }

    /// Label whose coordinates are closest to `x` (lowest index on ties).
    pub fn nearest_label(&self, x: [f64; 3]) -> EmotionLabel {
        let mut best = (f64::INFINITY, EmotionLabel::Neutral);
        for (row, p) in self.rows.iter().zip(&self.points) {
            let q = p.to_array();
            let d2: f64 = (0..3).map(|i| (q[i] - x[i]).powi(2)).sum();
            if d2 < best.0 {
                best = (d2, row.label);
            }
        }
        best.1
    }

    fn parse(text: &'static str) -> Self {
        let mut slots: Vec<Option<TaxonomyRow>> = vec![None; 28];
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&'static str> = line.split('\t').collect();
            assert_eq!(
                fields.len(),
                5,
                "taxonomy.tsv:{}: expected 5 fields",
                lineno + 1
            );
            let label = EmotionLabel::ALL
                .into_iter()
                .find(|l| l.name() == fields[0])
                .unwrap_or_else(|| {
                    panic!("taxonomy.tsv:{}: unknown label {}", lineno + 1, fields[0])
                });
            let hundredths = [fields[2], fields[3], fields[4]].map(|f| {
                parse_hundredths(f)
                    .unwrap_or_else(|| panic!("taxonomy.tsv:{}: bad value {f}", lineno + 1))
            });
            let slot = &mut slots[label.index()];
            assert!(slot.is_none(), "taxonomy.tsv: duplicate label {}", label);
            *slot = Some(TaxonomyRow {
                label,
                short_code: fields[1],
                hundredths,
            });
        }
        let rows: Vec<TaxonomyRow> = slots
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                r.unwrap_or_else(|| panic!("taxonomy.tsv: missing {}", EmotionLabel::ALL[i]))
            })
            .collect();
        let points = rows.iter().map(TaxonomyRow::point).collect();
        Self { rows, points }
    }
}

/// Parses `"0.82"`-style decimals with at most two fractional digits.
fn parse_hundredths(s: &str) -> Option<u16> {
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.len() > 2 || !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let int: u16 = int.parse().ok()?;
    let frac: u16 = if frac.is_empty() {
        0
    } else {
        format!("{frac:0<2}").parse().ok()?
    };
    let h = int * 100 + frac;
    (h <= 100).then_some(h)
}

/// The bundled taxonomy.
pub fn taxonomy() -> &'static EmotionTaxonomy {
    static TAXONOMY: OnceLock<EmotionTaxonomy> = OnceLock::new();
    TAXONOMY.get_or_init(|| EmotionTaxonomy::parse(TAXONOMY_TSV))
}

pub fn vad_of(label: EmotionLabel) -> VadPoint {
    taxonomy().point(label)
}

/// Case-insensitive match on the canonical name or the short code.
pub fn parse_label(text: &str) -> Result<EmotionLabel, VadError> {
    let t = text.trim();
    taxonomy()
        .rows()
        .iter()
        .find(|r| r.label.name().eq_ignore_ascii_case(t) || r.short_code.eq_ignore_ascii_case(t))
        .map(|r| r.label)
        .ok_or_else(|| VadError::UnknownLabel(text.to_string()))
}

fn euclid(p: [f64; 3], q: [f64; 3]) -> f64 {
    let (x, y, z) = (p[0] - q[0], p[1] - q[1], p[2] - q[2]);
    (x * x + y * y + z * z).sqrt()
}

/// Distance from the origin; lies in [0, sqrt(3)].
pub fn magnitude(p: VadPoint) -> f64 {
    euclid(p.to_array(), [0.0; 3])
}

/// Distance from the neutral point (0.5, 0.5, 0.5); lies in [0, sqrt(0.75)].
pub fn neutral_deviation(p: VadPoint) -> f64 {
    euclid(p.to_array(), [0.5; 3])
}

pub fn distance(p: VadPoint, q: VadPoint) -> f64 {
    euclid(p.to_array(), q.to_array())
}
