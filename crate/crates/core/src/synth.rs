//! Seeded synthetic datasets and toy planning instances used by tests,
//! benchmarks and the bundled demo. Everything here is deterministic in the
//! seed.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ingest::{HourlyDataset, IngestError, HOURS_PER_YEAR};

/// Raw per-area `(load_mw, wind_cf)` series with daily and seasonal shape
/// plus noise. Wind stays in [0, 1]; load stays strictly positive.
pub fn synthetic_raw(seed: u64, n_areas: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tau = std::f64::consts::TAU;
    (0..n_areas)
        .map(|a| {
            let base = 80.0 + 10.0 * a as f64;
            let phase = rng.gen_range(0.0..tau);
            let wind_phase = rng.gen_range(0.0..tau);
            let mut load = Vec::with_capacity(HOURS_PER_YEAR);
            let mut wind = Vec::with_capacity(HOURS_PER_YEAR);
            for h in 0..HOURS_PER_YEAR {
                let hod = (h % 24) as f64;
                let day = (h / 24) as f64;
                let daily = 0.18 * (tau * (hod - 17.0) / 24.0).cos();
                let seasonal = 0.10 * (tau * day / 365.0 + phase).sin();
                let noise: f64 = rng.gen_range(-0.03..0.03);
                load.push(base * (0.72 + daily + seasonal + noise));

                let wdaily = 0.25 * (tau * hod / 24.0 + wind_phase).sin();
                let wseasonal = 0.20 * (tau * day / 365.0 + wind_phase).cos();
                let wnoise: f64 = rng.gen_range(-0.08..0.08);
                wind.push((0.45 + wdaily + wseasonal + wnoise).clamp(0.0, 1.0));
            }
            (load, wind)
        })
        .collect()
}

/// Injects a stressed day: load scaled up across `day` and wind forced to
/// zero, creating an unambiguous annual net-load peak in `area`.
pub fn inject_peak_day(
    raw: &mut [(Vec<f64>, Vec<f64>)],
    area: usize,
    day: usize,
    load_scale: f64,
) {
    let (load, wind) = &mut raw[area];
    for h in (day * 24)..((day + 1) * 24) {
        load[h] *= load_scale;
        wind[h] = 0.0;
    }
}

/// A ready synthetic dataset.
pub fn synthetic_dataset(seed: u64, n_areas: usize) -> HourlyDataset {
    let areas = (0..n_areas).map(|a| format!("a{}", a + 1)).collect();
    HourlyDataset::from_raw(areas, synthetic_raw(seed, n_areas))
        .expect("synthetic series are valid")
}

/// Writes raw series in the ingest CSV schema (`timestamp,area,load_mw,wind_cf`),
/// base year 2019.
pub fn write_input_csv(
    raw: &[(Vec<f64>, Vec<f64>)],
    areas: &[String],
    path: &Path,
) -> Result<(), IngestError> {
    use std::io::Write;
    let f = std::fs::File::create(path).map_err(|e| IngestError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut w = std::io::BufWriter::new(f);
    let day0 = chrono::NaiveDate::from_ymd_opt(2019, 1, 1)
        .unwrap()
        .and_hms_opt(0, 0, 0)
        .unwrap();
    let mut res = writeln!(w, "timestamp,area,load_mw,wind_cf");
    'outer: for h in 0..HOURS_PER_YEAR {
        let ts = day0 + chrono::Duration::hours(h as i64);
        for (a, area) in areas.iter().enumerate() {
            res = writeln!(
                w,
                "{},{},{},{}",
                ts.format("%Y-%m-%dT%H:%M:%S"),
                area,
                raw[a].0[h],
                raw[a].1[h]
            );
            if res.is_err() {
                break 'outer;
            }
        }
    }
    res.and_then(|_| w.flush()).map_err(|e| IngestError::Io {
        path: path.display().to_string(),
        source: e,
    })
}
