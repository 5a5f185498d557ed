//! Hourly multi-area load/wind ingestion: CSV loading with strict gap and
//! range validation, normalization to per-unit factors, and slicing into
//! 25-point days (midnight shared with the neighbouring day).

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use chrono::{Datelike, NaiveDate, NaiveDateTime, Timelike};
use serde::Deserialize;
use thiserror::Error;

pub const HOURS_PER_YEAR: usize = 8760;
pub const YEAR_DAYS: usize = 365;
/// Points per sliced day: 25 hourly instants, both midnights included.
pub const DAY_POINTS: usize = 25;

/// Feature axis of the dataset. The schema reserves room for more features
/// (e.g. solar) but only load and wind are processed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Feature {
    Load = 0,
    Wind = 1,
}

impl Feature {
    pub const ALL: [Feature; 2] = [Feature::Load, Feature::Wind];

    pub fn name(self) -> &'static str {
        match self {
            Feature::Load => "load",
            Feature::Wind => "wind",
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

pub const NUM_FEATURES: usize = Feature::ALL.len();

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing required column `{0}` (need timestamp,area,load_mw and wind_cf or wind_mw)")]
    MissingColumn(String),
    #[error("row {row}: cannot parse timestamp `{value}`")]
    BadTimestamp { row: u64, value: String },
    #[error("row {row}: timestamp `{value}` is not on the hour")]
    NonHourly { row: u64, value: String },
    #[error("row {row}: timestamp outside base year {year}")]
    WrongYear { row: u64, year: i32 },
    #[error("leap years are not supported (year {0} has 366 days; exactly 365 required)")]
    LeapYear(i32),
    #[error("row {row}: unknown area `{area}`")]
    UnknownArea { row: u64, area: String },
    #[error("row {row}: duplicate timestamp for area `{area}`")]
    DuplicateTimestamp { row: u64, area: String },
    #[error("row {row}: non-numeric value `{value}` in column `{column}`")]
    NonNumeric {
        row: u64,
        column: String,
        value: String,
    },
    #[error("gap at hour index {hour} for area `{area}`")]
    Gap { area: String, hour: usize },
    #[error("row {row}: wind factor out of [0,1] (got {value})")]
    WindOutOfRange { row: u64, value: f64 },
    #[error("row {row}: load must be strictly positive (got {value})")]
    NonPositiveLoad { row: u64, value: f64 },
    #[error("area `{0}`: zero peak load, cannot normalize")]
    ZeroPeakLoad(String),
    #[error("area `{0}`: missing installed wind capacity (wind_mw input needs a capacity table)")]
    MissingCapacity(String),
    #[error("area `{0}`: installed wind capacity must be positive")]
    NonPositiveCapacity(String),
    #[error("no data rows found")]
    Empty,
    #[error("declared area `{0}` has no rows")]
    MissingArea(String),
}

fn io_err(path: &Path, source: std::io::Error) -> IngestError {
    IngestError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Input declaration for [`load_hourly_csv`].
#[derive(Debug, Clone, Deserialize)]
pub struct IngestConfig {
    /// Hourly CSV with header `timestamp,area,load_mw,wind_cf` (or `wind_mw`).
    pub csv: PathBuf,
    /// Sidecar `area,installed_wind_mw` table, required with `wind_mw` input.
    pub wind_capacity_csv: Option<PathBuf>,
    /// Declared areas; every area must be fully populated.
    pub areas: Vec<String>,
}

/// One year of per-area, per-feature hourly factors.
///
/// Values are dimensionless: load factors normalized to the per-area annual
/// peak (so each area's maximum is exactly 1) and wind capacity factors in
/// [0, 1]. Hour 8760 aliases hour 0 of the wrap-around year.
#[derive(Debug, Clone)]
pub struct HourlyDataset {
    areas: Vec<String>,
    features: Vec<String>,
    /// Dense, indexed `(area, feature, hour)`, hour in `0..8760`.
    values: Vec<f64>,
    year_length_days: usize,
    /// Per-area annual peak load in MW (the FL normalization base).
    peak_load_mw: Vec<f64>,
}

impl HourlyDataset {
    /// Builds a dataset from per-area raw series, normalizing via
    /// [`compute_factors`]. `raw` holds `(load_mw, wind_cf)` per hour.
    pub fn from_raw(
        areas: Vec<String>,
        raw: Vec<(Vec<f64>, Vec<f64>)>,
    ) -> Result<Self, IngestError> {
        assert_eq!(areas.len(), raw.len());
        let mut values = vec![0.0; areas.len() * NUM_FEATURES * HOURS_PER_YEAR];
        let mut peaks = vec![0.0; areas.len()];
        for (a, (load, wind)) in raw.iter().enumerate() {
            assert_eq!(load.len(), HOURS_PER_YEAR);
            assert_eq!(wind.len(), HOURS_PER_YEAR);
            let (fl, fw, peak) = compute_factors(load, wind, &areas[a])?;
            peaks[a] = peak;
            for h in 0..HOURS_PER_YEAR {
                values[Self::idx(a, Feature::Load, h)] = fl[h];
                values[Self::idx(a, Feature::Wind, h)] = fw[h];
            }
        }
        Ok(HourlyDataset {
            areas,
            features: Feature::ALL.iter().map(|f| f.name().to_string()).collect(),
            values,
            year_length_days: YEAR_DAYS,
            peak_load_mw: peaks,
        })
    }

    fn idx(a: usize, f: Feature, h: usize) -> usize {
        (a * NUM_FEATURES + f as usize) * HOURS_PER_YEAR + h
    }

    pub fn areas(&self) -> &[String] {
        &self.areas
    }

    pub fn features(&self) -> &[String] {
        &self.features
    }

    pub fn year_length_days(&self) -> usize {
        self.year_length_days
    }

    pub fn area_index(&self, area: &str) -> Option<usize> {
        self.areas.iter().position(|a| a == area)
    }

    /// Annual peak load (MW) used to normalize the area's load factors.
    pub fn peak_load_mw(&self, area_idx: usize) -> f64 {
        self.peak_load_mw[area_idx]
    }

    /// Factor at `(area, feature, hour)`; hour 8760 wraps to hour 0.
    pub fn value(&self, area_idx: usize, feature: Feature, hour: usize) -> f64 {
        debug_assert!(hour <= HOURS_PER_YEAR);
        self.values[Self::idx(area_idx, feature, hour % HOURS_PER_YEAR)]
    }
}

/// Per-area capacities a planning instance provides for net-load purposes.
#[derive(Debug, Clone, Default)]
pub struct AreaCapacities {
    /// Aggregate peak load L per area, MW.
    pub peak_load_mw: BTreeMap<String, f64>,
    /// Maximum available wind capacity per area (existing + candidate
    /// ceiling), MW.
    pub max_wind_mw: BTreeMap<String, f64>,
}

/// Normalizes one area's raw series into `(FL, FW, peak_load)`.
///
/// FL is load divided by the annual peak, so the per-area maximum is exactly
/// one; FW is the wind capacity factor, which must already lie in [0, 1].
pub fn compute_factors(
    raw_load_mw: &[f64],
    raw_wind_cf: &[f64],
    area: &str,
) -> Result<(Vec<f64>, Vec<f64>, f64), IngestError> {
    let peak = raw_load_mw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(peak > 0.0) {
        return Err(IngestError::ZeroPeakLoad(area.to_string()));
    }
    let fl = raw_load_mw.iter().map(|v| v / peak).collect();
    let fw = raw_wind_cf.to_vec();
    Ok((fl, fw, peak))
}

/// One sliced day: 25 hourly instants per (area, feature), with `t = 24`
/// equal to `t = 0` of the following calendar day.
#[derive(Debug, Clone, PartialEq)]
pub struct DayMatrix {
    pub day_index: usize,
    n_areas: usize,
    /// Dense, indexed `(area, feature, t)`, `t` in `0..25`.
    points: Vec<f64>,
}

impl DayMatrix {
    pub fn new(day_index: usize, n_areas: usize) -> Self {
        DayMatrix {
            day_index,
            n_areas,
            points: vec![0.0; n_areas * NUM_FEATURES * DAY_POINTS],
        }
    }

    fn idx(&self, a: usize, f: Feature, t: usize) -> usize {
        (a * NUM_FEATURES + f as usize) * DAY_POINTS + t
    }

    pub fn n_areas(&self) -> usize {
        self.n_areas
    }

    pub fn get(&self, a: usize, f: Feature, t: usize) -> f64 {
        self.points[self.idx(a, f, t)]
    }

    pub fn set(&mut self, a: usize, f: Feature, t: usize, v: f64) {
        let i = self.idx(a, f, t);
        self.points[i] = v;
    }

    /// Flattened feature vector (area-major, then feature, then t) used as
    /// the clustering coordinate.
    pub fn flat(&self) -> &[f64] {
        &self.points
    }

    /// Euclidean distance to another day over all areas and features.
    pub fn distance(&self, other: &DayMatrix) -> f64 {
        self.points
            .iter()
            .zip(&other.points)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }
}

/// Cuts the year into 365 days of 25 points; `t = 24` of day `d` reads hour
/// `24(d+1)` which wraps to hour 0 for the last day.
pub fn slice_days(ds: &HourlyDataset) -> Vec<DayMatrix> {
    let n_areas = ds.areas.len();
    (0..YEAR_DAYS)
        .map(|d| {
            let mut m = DayMatrix::new(d, n_areas);
            for a in 0..n_areas {
                for f in Feature::ALL {
                    for t in 0..DAY_POINTS {
                        m.set(a, f, t, ds.value(a, f, 24 * d + t));
                    }
                }
            }
            m
        })
        .collect()
}

/// Net load in MW at `(area, hour)`: `FL·L − FW·Wmax` with the area's peak
/// load and maximum wind capacity taken from the planning instance.
pub fn net_load(
    ds: &HourlyDataset,
    caps: &AreaCapacities,
    area: &str,
    hour: usize,
) -> Result<f64, IngestError> {
    let a = ds
        .area_index(area)
        .ok_or_else(|| IngestError::MissingArea(area.to_string()))?;
    let l = caps.peak_load_mw.get(area).copied().unwrap_or(0.0);
    let w = caps.max_wind_mw.get(area).copied().unwrap_or(0.0);
    Ok(ds.value(a, Feature::Load, hour) * l - ds.value(a, Feature::Wind, hour) * w)
}

/// Full-year net-load series for one area index.
pub fn net_load_series(ds: &HourlyDataset, caps: &AreaCapacities, area_idx: usize) -> Vec<f64> {
    let area = &ds.areas[area_idx];
    let l = caps.peak_load_mw.get(area).copied().unwrap_or(0.0);
    let w = caps.max_wind_mw.get(area).copied().unwrap_or(0.0);
    (0..HOURS_PER_YEAR)
        .map(|h| ds.value(area_idx, Feature::Load, h) * l - ds.value(area_idx, Feature::Wind, h) * w)
        .collect()
}

const TS_FORMATS: [&str; 3] = ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M"];

fn parse_timestamp(s: &str, row: u64) -> Result<NaiveDateTime, IngestError> {
    for fmt in TS_FORMATS {
        if let Ok(ts) = NaiveDateTime::parse_from_str(s, fmt) {
            return Ok(ts);
        }
    }
    Err(IngestError::BadTimestamp {
        row,
        value: s.to_string(),
    })
}

/// Loads and validates an hourly CSV per the declared config, returning a
/// complete, gap-free, normalized dataset.
pub fn load_hourly_csv(config: &IngestConfig) -> Result<HourlyDataset, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(&config.csv)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => io_err(&config.csv, std::io::Error::other(e.to_string())),
            _ => IngestError::Csv(e),
        })?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let ts_col = col("timestamp").ok_or_else(|| IngestError::MissingColumn("timestamp".into()))?;
    let area_col = col("area").ok_or_else(|| IngestError::MissingColumn("area".into()))?;
    let load_col = col("load_mw").ok_or_else(|| IngestError::MissingColumn("load_mw".into()))?;
    let (wind_col, wind_is_mw) = match (col("wind_cf"), col("wind_mw")) {
        (Some(c), _) => (c, false),
        (None, Some(c)) => (c, true),
        (None, None) => return Err(IngestError::MissingColumn("wind_cf".into())),
    };

    let capacities: BTreeMap<String, f64> = if wind_is_mw {
        let path = config
            .wind_capacity_csv
            .as_ref()
            .ok_or_else(|| IngestError::MissingCapacity("<all>".into()))?;
        read_capacity_table(path)?
    } else {
        BTreeMap::new()
    };

    let n_areas = config.areas.len();
    let area_index: BTreeMap<&str, usize> = config
        .areas
        .iter()
        .enumerate()
        .map(|(i, a)| (a.as_str(), i))
        .collect();
    let mut load: Vec<Vec<Option<f64>>> = vec![vec![None; HOURS_PER_YEAR]; n_areas];
    let mut wind: Vec<Vec<Option<f64>>> = vec![vec![None; HOURS_PER_YEAR]; n_areas];
    let mut base_year: Option<i32> = None;

    for rec in rdr.records() {
        let rec = rec?;
        let row = rec.position().map(|p| p.line()).unwrap_or(0);
        let ts_str = rec.get(ts_col).unwrap_or("");
        let ts = parse_timestamp(ts_str, row)?;
        if ts.minute() != 0 || ts.second() != 0 {
            return Err(IngestError::NonHourly {
                row,
                value: ts_str.to_string(),
            });
        }
        let year = *base_year.get_or_insert_with(|| ts.year());
        if NaiveDate::from_ymd_opt(year, 12, 31)
            .map(|d| d.ordinal() == 366)
            .unwrap_or(false)
        {
            return Err(IngestError::LeapYear(year));
        }
        if ts.year() != year {
            return Err(IngestError::WrongYear { row, year });
        }
        let hour = (ts.date().ordinal0() as usize) * 24 + ts.hour() as usize;

        let area = rec.get(area_col).unwrap_or("");
        let a = *area_index
            .get(area)
            .ok_or_else(|| IngestError::UnknownArea {
                row,
                area: area.to_string(),
            })?;
        if load[a][hour].is_some() {
            return Err(IngestError::DuplicateTimestamp {
                row,
                area: area.to_string(),
            });
        }
        let parse_num = |column: &str, idx: usize| -> Result<f64, IngestError> {
            let raw = rec.get(idx).unwrap_or("");
            raw.parse().map_err(|_| IngestError::NonNumeric {
                row,
                column: column.to_string(),
                value: raw.to_string(),
            })
        };
        let load_v = parse_num("load_mw", load_col)?;
        if load_v <= 0.0 {
            return Err(IngestError::NonPositiveLoad { row, value: load_v });
        }
        let wind_raw = parse_num(if wind_is_mw { "wind_mw" } else { "wind_cf" }, wind_col)?;
        let wind_cf = if wind_is_mw {
            let cap = capacities
                .get(area)
                .copied()
                .ok_or_else(|| IngestError::MissingCapacity(area.to_string()))?;
            if cap <= 0.0 {
                return Err(IngestError::NonPositiveCapacity(area.to_string()));
            }
            wind_raw / cap
        } else {
            wind_raw
        };
        if !(0.0..=1.0).contains(&wind_cf) {
            return Err(IngestError::WindOutOfRange {
                row,
                value: wind_cf,
            });
        }
        load[a][hour] = Some(load_v);
        wind[a][hour] = Some(wind_cf);
    }

    if base_year.is_none() {
        return Err(IngestError::Empty);
    }
    let mut raw = Vec::with_capacity(n_areas);
    for (a, area) in config.areas.iter().enumerate() {
        if load[a].iter().all(Option::is_none) {
            return Err(IngestError::MissingArea(area.clone()));
        }
        if let Some(hour) = load[a].iter().position(Option::is_none) {
            return Err(IngestError::Gap {
                area: area.clone(),
                hour,
            });
        }
        let l: Vec<f64> = load[a].iter().map(|v| v.unwrap()).collect();
        let w: Vec<f64> = wind[a].iter().map(|v| v.unwrap()).collect();
        raw.push((l, w));
    }
    HourlyDataset::from_raw(config.areas.clone(), raw)
}

fn read_capacity_table(path: &Path) -> Result<BTreeMap<String, f64>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| io_err(path, std::io::Error::other(e.to_string())))?;
    let headers = rdr.headers()?.clone();
    let area_col = headers
        .iter()
        .position(|h| h == "area")
        .ok_or_else(|| IngestError::MissingColumn("area".into()))?;
    let cap_col = headers
        .iter()
        .position(|h| h == "installed_wind_mw")
        .ok_or_else(|| IngestError::MissingColumn("installed_wind_mw".into()))?;
    let mut out = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let row = rec.position().map(|p| p.line()).unwrap_or(0);
        let raw = rec.get(cap_col).unwrap_or("");
        let cap: f64 = raw.parse().map_err(|_| IngestError::NonNumeric {
            row,
            column: "installed_wind_mw".to_string(),
            value: raw.to_string(),
        })?;
        out.insert(rec.get(area_col).unwrap_or("").to_string(), cap);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_csv(dir: &Path, name: &str, content: &str) -> PathBuf {
        let p = dir.join(name);
        let mut f = std::fs::File::create(&p).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        p
    }

    fn full_year_csv(areas: &[&str], skip_hour: Option<usize>) -> String {
        let mut s = String::from("timestamp,area,load_mw,wind_cf\n");
        let day0 = NaiveDate::from_ymd_opt(2019, 1, 1).unwrap();
        for h in 0..HOURS_PER_YEAR {
            for (ai, area) in areas.iter().enumerate() {
                if skip_hour == Some(h) && ai == 0 {
                    continue;
                }
                let ts = day0
                    .and_hms_opt(0, 0, 0)
                    .unwrap()
                    .checked_add_signed(chrono::Duration::hours(h as i64))
                    .unwrap();
                let load = 50.0 + ((h % 24) as f64) + ai as f64;
                let wind = ((h % 7) as f64) / 10.0;
                s.push_str(&format!(
                    "{},{},{},{}\n",
                    ts.format("%Y-%m-%dT%H:%M:%S"),
                    area,
                    load,
                    wind
                ));
            }
        }
        s
    }

    fn config(csv: PathBuf, areas: &[&str]) -> IngestConfig {
        IngestConfig {
            csv,
            wind_capacity_csv: None,
            areas: areas.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn shape_check_seven_areas() {
        let dir = tempfile::tempdir().unwrap();
        let areas = ["a1", "a2", "a3", "a4", "a5", "a6", "a7"];
        let p = write_csv(dir.path(), "d.csv", &full_year_csv(&areas, None));
        let ds = load_hourly_csv(&config(p, &areas)).unwrap();
        assert_eq!(ds.areas().len(), 7);
        assert_eq!(ds.features().len(), 2);
        assert_eq!(ds.year_length_days(), 365);
    }

    #[test]
    fn gap_reported_with_hour_index() {
        let dir = tempfile::tempdir().unwrap();
        let areas = ["a1"];
        let p = write_csv(dir.path(), "d.csv", &full_year_csv(&areas, Some(1735)));
        let err = load_hourly_csv(&config(p, &areas)).unwrap_err();
        assert!(err.to_string().contains("gap at hour index 1735"));
    }

    #[test]
    fn wind_out_of_range_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut csv = String::from("timestamp,area,load_mw,wind_cf\n");
        csv.push_str("2019-01-01T00:00:00,a1,100,1.2\n");
        let p = write_csv(dir.path(), "d.csv", &csv);
        let err = load_hourly_csv(&config(p, &["a1"])).unwrap_err();
        assert!(err.to_string().contains("wind factor out of [0,1]"));
    }

    #[test]
    fn duplicate_unknown_nonnumeric_each_reported_with_row() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_csv(
            dir.path(),
            "dup.csv",
            "timestamp,area,load_mw,wind_cf\n2019-01-01T00:00:00,a1,100,0.5\n2019-01-01T00:00:00,a1,90,0.4\n",
        );
        let err = load_hourly_csv(&config(p, &["a1"])).unwrap_err();
        assert!(matches!(err, IngestError::DuplicateTimestamp { row: 3, .. }));

        let p = write_csv(
            dir.path(),
            "unk.csv",
            "timestamp,area,load_mw,wind_cf\n2019-01-01T00:00:00,zz,100,0.5\n",
        );
        let err = load_hourly_csv(&config(p, &["a1"])).unwrap_err();
        assert!(matches!(err, IngestError::UnknownArea { row: 2, .. }));

        let p = write_csv(
            dir.path(),
            "nan.csv",
            "timestamp,area,load_mw,wind_cf\n2019-01-01T00:00:00,a1,abc,0.5\n",
        );
        let err = load_hourly_csv(&config(p, &["a1"])).unwrap_err();
        assert!(matches!(err, IngestError::NonNumeric { row: 2, .. }));
    }

    #[test]
    fn leap_year_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_csv(
            dir.path(),
            "leap.csv",
            "timestamp,area,load_mw,wind_cf\n2020-01-01T00:00:00,a1,100,0.5\n",
        );
        let err = load_hourly_csv(&config(p, &["a1"])).unwrap_err();
        assert!(matches!(err, IngestError::LeapYear(2020)));
    }

    #[test]
    fn wind_mw_with_sidecar_capacity() {
        let dir = tempfile::tempdir().unwrap();
        let mut csv = String::from("timestamp,area,load_mw,wind_mw\n");
        let day0 = NaiveDate::from_ymd_opt(2019, 1, 1).unwrap();
        for h in 0..HOURS_PER_YEAR {
            let ts = day0
                .and_hms_opt(0, 0, 0)
                .unwrap()
                .checked_add_signed(chrono::Duration::hours(h as i64))
                .unwrap();
            csv.push_str(&format!(
                "{},a1,{},{}\n",
                ts.format("%Y-%m-%dT%H:%M:%S"),
                100.0,
                ((h % 5) as f64) * 10.0
            ));
        }
        let p = write_csv(dir.path(), "d.csv", &csv);
        let caps = write_csv(dir.path(), "caps.csv", "area,installed_wind_mw\na1,40\n");
        let cfg = IngestConfig {
            csv: p,
            wind_capacity_csv: Some(caps),
            areas: vec!["a1".to_string()],
        };
        let ds = load_hourly_csv(&cfg).unwrap();
        // wind_mw 40 at h%5==4 over installed 40 -> cf 1.0
        assert_eq!(ds.value(0, Feature::Wind, 4), 1.0);
        assert_eq!(ds.value(0, Feature::Wind, 0), 0.0);
    }

    #[test]
    fn factor_normalization_examples() {
        let (fl, fw, peak) =
            compute_factors(&[80.0, 100.0, 50.0], &[0.2, 1.0, 0.0], "x").unwrap();
        assert_eq!(peak, 100.0);
        assert_eq!(fl, vec![0.8, 1.0, 0.5]);
        assert_eq!(fw[1], 1.0);
        assert!(matches!(
            compute_factors(&[0.0, 0.0], &[0.0, 0.0], "x"),
            Err(IngestError::ZeroPeakLoad(_))
        ));
    }

    #[test]
    fn per_area_fl_peak_is_one() {
        let dir = tempfile::tempdir().unwrap();
        let areas = ["a1", "a2"];
        let p = write_csv(dir.path(), "d.csv", &full_year_csv(&areas, None));
        let ds = load_hourly_csv(&config(p, &areas)).unwrap();
        for a in 0..2 {
            let max = (0..HOURS_PER_YEAR)
                .map(|h| ds.value(a, Feature::Load, h))
                .fold(f64::NEG_INFINITY, f64::max);
            assert!((max - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sliced_days_share_midnights_and_reassemble() {
        let dir = tempfile::tempdir().unwrap();
        let areas = ["a1", "a2"];
        let p = write_csv(dir.path(), "d.csv", &full_year_csv(&areas, None));
        let ds = load_hourly_csv(&config(p, &areas)).unwrap();
        let days = slice_days(&ds);
        assert_eq!(days.len(), 365);
        for d in 0..365 {
            let next = (d + 1) % 365;
            for a in 0..2 {
                for f in Feature::ALL {
                    assert_eq!(days[d].get(a, f, 24), days[next].get(a, f, 0));
                }
            }
        }
        // Reassembly (dropping t=24 of each day) reproduces the series.
        for a in 0..2 {
            for f in Feature::ALL {
                for h in 0..HOURS_PER_YEAR {
                    assert_eq!(days[h / 24].get(a, f, h % 24), ds.value(a, f, h));
                }
            }
        }
    }

    #[test]
    fn net_load_arithmetic() {
        let mut caps = AreaCapacities::default();
        caps.peak_load_mw.insert("a1".into(), 100.0);
        caps.max_wind_mw.insert("a1".into(), 40.0);
        let mut load = vec![90.0; HOURS_PER_YEAR];
        load[0] = 100.0; // pin the peak so FL = 0.9 elsewhere
        let wind = vec![0.5; HOURS_PER_YEAR];
        let ds = HourlyDataset::from_raw(vec!["a1".into()], vec![(load, wind)]).unwrap();
        let v = net_load(&ds, &caps, "a1", 1).unwrap();
        assert!((v - (0.9 * 100.0 - 0.5 * 40.0)).abs() < 1e-12);
        assert_eq!(v, 70.0);

        // FW = 0 -> gross load; FL = 1, FW = 1, L = Wmax -> 0.
        let ds2 = HourlyDataset::from_raw(
            vec!["a1".into()],
            vec![(vec![100.0; HOURS_PER_YEAR], vec![1.0; HOURS_PER_YEAR])],
        )
        .unwrap();
        let mut caps2 = AreaCapacities::default();
        caps2.peak_load_mw.insert("a1".into(), 40.0);
        caps2.max_wind_mw.insert("a1".into(), 40.0);
        assert_eq!(net_load(&ds2, &caps2, "a1", 5).unwrap(), 0.0);
    }
}
