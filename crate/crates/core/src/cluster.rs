//! Extreme-value-sensitive representative-day extraction and calendar
//! mapping into sequentially linked day blocks.
//!
//! Days carrying any area's annual net-load maximum are preserved as
//! singleton representatives; the remaining days are agglomeratively
//! clustered (Ward linkage on Euclidean distance over all areas and
//! features) and each cluster is represented by its medoid. All ties break
//! toward the lowest day index, so identical inputs give identical output.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;

use thiserror::Error;

use crate::ingest::{
    net_load_series, AreaCapacities, DayMatrix, Feature, HourlyDataset, DAY_POINTS,
};

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("n_rd = {n_rd} too small: need at least one cluster beyond {extreme} extreme days")]
    NotEnoughRds { n_rd: usize, extreme: usize },
    #[error("n_rd = {n_rd} exceeds the number of days {days}")]
    TooManyRds { n_rd: usize, days: usize },
    #[error("no days given")]
    Empty,
    #[error("extreme day index {0} out of range")]
    ExtremeOutOfRange(usize),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed artifact {path}: {msg}")]
    Malformed { path: String, msg: String },
}

fn io_err(path: &Path, source: std::io::Error) -> ClusterError {
    ClusterError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Unordered representative days with weights, flags and calendar mapping.
#[derive(Debug, Clone)]
pub struct RepresentativeDaySet {
    /// Representatives carrying the instant load/wind factors.
    pub rds: Vec<DayMatrix>,
    /// ω_d: number of calendar days mapped to each RD.
    pub weights: Vec<u32>,
    pub extreme_flags: Vec<bool>,
    /// Calendar day index -> RD index.
    pub membership: Vec<usize>,
}

impl RepresentativeDaySet {
    pub fn len(&self) -> usize {
        self.rds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rds.is_empty()
    }
}

/// One maximal run of consecutive calendar days mapped to the same RD.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SldBlock {
    pub rd_index: usize,
    /// Number of RD repetitions within the block.
    pub n_b: u32,
}

/// Ordered blocks linking RDs into the calendar year.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SldSequence {
    pub blocks: Vec<SldBlock>,
}

impl SldSequence {
    /// Expands the run-length encoding back into the day-label sequence.
    pub fn decode(&self) -> Vec<usize> {
        let mut labels = Vec::new();
        for b in &self.blocks {
            labels.extend(std::iter::repeat(b.rd_index).take(b.n_b as usize));
        }
        labels
    }

    pub fn total_days(&self) -> u32 {
        self.blocks.iter().map(|b| b.n_b).sum()
    }
}

/// Day indices holding any area's annual net-load maximum, given per-area
/// hourly net-load series. The first hour attaining an area's maximum
/// decides that area's extreme day.
pub fn extreme_days_from_net_load(series_per_area: &[Vec<f64>]) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    for series in series_per_area {
        if series.is_empty() {
            continue;
        }
        let mut best = 0usize;
        for (h, v) in series.iter().enumerate() {
            if *v > series[best] {
                best = h;
            }
        }
        out.insert(best / 24);
    }
    out
}

/// Extreme days of a dataset: per area, the day containing the annual
/// maximum of `FL·L − FW·Wmax`; union over areas.
pub fn find_extreme_days(ds: &HourlyDataset, caps: &AreaCapacities) -> BTreeSet<usize> {
    let series: Vec<Vec<f64>> = (0..ds.areas().len())
        .map(|a| net_load_series(ds, caps, a))
        .collect();
    extreme_days_from_net_load(&series)
}

/// Squared Euclidean distance between two days over all areas/features.
fn dist2(a: &DayMatrix, b: &DayMatrix) -> f64 {
    a.flat()
        .iter()
        .zip(b.flat())
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

/// Agglomerative Ward clustering of the non-extreme pool into
/// `n_rd − |extreme|` clusters; extreme days stay singleton representatives.
pub fn cluster_days(
    days: &[DayMatrix],
    n_rd: usize,
    extreme: &BTreeSet<usize>,
) -> Result<RepresentativeDaySet, ClusterError> {
    let n_days = days.len();
    if n_days == 0 {
        return Err(ClusterError::Empty);
    }
    if let Some(&bad) = extreme.iter().find(|&&d| d >= n_days) {
        return Err(ClusterError::ExtremeOutOfRange(bad));
    }
    if n_rd > n_days {
        return Err(ClusterError::TooManyRds {
            n_rd,
            days: n_days,
        });
    }
    if n_rd < extreme.len() + 1 {
        return Err(ClusterError::NotEnoughRds {
            n_rd,
            extreme: extreme.len(),
        });
    }
    let pool: Vec<usize> = (0..n_days).filter(|d| !extreme.contains(d)).collect();
    let target = n_rd - extreme.len();
    // More RDs requested than non-extreme days exist to provide.
    if target > pool.len() {
        return Err(ClusterError::TooManyRds {
            n_rd,
            days: n_days,
        });
    }

    // Clusters keyed by their smallest member day; Ward distances kept as
    // squared values under the Lance-Williams update.
    let mut members: BTreeMap<usize, Vec<usize>> = pool.iter().map(|&d| (d, vec![d])).collect();
    let mut dist: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (i, &a) in pool.iter().enumerate() {
        for &b in &pool[i + 1..] {
            dist.insert((a, b), dist2(&days[a], &days[b]));
        }
    }

    while members.len() > target {
        // Minimal Ward distance; sorted map iteration makes the first hit
        // the lexicographically smallest pair among exact ties.
        let (&(ki, kj), _) = dist
            .iter()
            .min_by(|(pa, da), (pb, db)| da.partial_cmp(db).unwrap().then(pa.cmp(pb)))
            .expect("at least two clusters remain");
        let d_ij = dist[&(ki, kj)];
        let n_i = members[&ki].len() as f64;
        let n_j = members[&kj].len() as f64;
        let mut moved = members.remove(&kj).unwrap();
        // Lance-Williams (Ward) update against every other cluster.
        let others: Vec<usize> = members.keys().copied().filter(|&k| k != ki).collect();
        for k in others {
            let n_k = members[&k].len() as f64;
            let d_ik = dist[&key(ki, k)];
            let d_jk = dist[&key(kj, k)];
            let updated = ((n_i + n_k) * d_ik + (n_j + n_k) * d_jk - n_k * d_ij)
                / (n_i + n_j + n_k);
            dist.insert(key(ki, k), updated);
            dist.remove(&key(kj, k));
        }
        dist.remove(&(ki, kj));
        members.get_mut(&ki).unwrap().append(&mut moved);
        members.get_mut(&ki).unwrap().sort_unstable();
    }

    // Representatives: extreme singletons plus cluster medoids, ordered by
    // representative day index.
    let mut reps: Vec<(usize, Vec<usize>, bool)> = Vec::new();
    for &e in extreme {
        reps.push((e, vec![e], true));
    }
    for (_, mem) in members {
        let medoid = *mem
            .iter()
            .min_by(|&&a, &&b| {
                let sa: f64 = mem.iter().map(|&o| days[a].distance(&days[o])).sum();
                let sb: f64 = mem.iter().map(|&o| days[b].distance(&days[o])).sum();
                sa.partial_cmp(&sb).unwrap().then(a.cmp(&b))
            })
            .expect("cluster never empty");
        reps.push((medoid, mem, false));
    }
    reps.sort_by_key(|(rep, _, _)| *rep);

    let mut rds = Vec::with_capacity(reps.len());
    let mut weights = Vec::with_capacity(reps.len());
    let mut extreme_flags = Vec::with_capacity(reps.len());
    let mut membership = vec![usize::MAX; n_days];
    for (rd_index, (rep, mem, is_extreme)) in reps.iter().enumerate() {
        rds.push(days[*rep].clone());
        weights.push(mem.len() as u32);
        extreme_flags.push(*is_extreme);
        for &d in mem {
            membership[d] = rd_index;
        }
    }
    debug_assert!(membership.iter().all(|&m| m != usize::MAX));
    Ok(RepresentativeDaySet {
        rds,
        weights,
        extreme_flags,
        membership,
    })
}

fn key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Run-length encodes the calendar RD labels into ordered blocks.
pub fn map_slds(rdset: &RepresentativeDaySet) -> SldSequence {
    let mut blocks: Vec<SldBlock> = Vec::new();
    for &label in &rdset.membership {
        match blocks.last_mut() {
            Some(b) if b.rd_index == label => b.n_b += 1,
            _ => blocks.push(SldBlock {
                rd_index: label,
                n_b: 1,
            }),
        }
    }
    SldSequence { blocks }
}

/// Emits `rds.csv` (rd_index, weight, extreme_flag, area, feature, t, value).
pub fn write_rds_csv(
    rdset: &RepresentativeDaySet,
    areas: &[String],
    path: &Path,
) -> Result<(), ClusterError> {
    let f = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = std::io::BufWriter::new(f);
    let res = (|| -> std::io::Result<()> {
        writeln!(w, "rd_index,weight,extreme_flag,area,feature,t,value")?;
        for (i, rd) in rdset.rds.iter().enumerate() {
            for (a, area) in areas.iter().enumerate() {
                for feat in Feature::ALL {
                    for t in 0..DAY_POINTS {
                        writeln!(
                            w,
                            "{},{},{},{},{},{},{}",
                            i,
                            rdset.weights[i],
                            u8::from(rdset.extreme_flags[i]),
                            area,
                            feat,
                            t,
                            rd.get(a, feat, t)
                        )?;
                    }
                }
            }
        }
        w.flush()
    })();
    res.map_err(|e| io_err(path, e))
}

/// Emits `slds.csv` (block_index, rd_index, n_b).
pub fn write_slds_csv(slds: &SldSequence, path: &Path) -> Result<(), ClusterError> {
    let f = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = std::io::BufWriter::new(f);
    let res = (|| -> std::io::Result<()> {
        writeln!(w, "block_index,rd_index,n_b")?;
        for (i, b) in slds.blocks.iter().enumerate() {
            writeln!(w, "{},{},{}", i, b.rd_index, b.n_b)?;
        }
        w.flush()
    })();
    res.map_err(|e| io_err(path, e))
}

/// Emits `membership.csv` (day_index, rd_index), needed downstream for
/// reconstruction.
pub fn write_membership_csv(
    rdset: &RepresentativeDaySet,
    path: &Path,
) -> Result<(), ClusterError> {
    let f = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = std::io::BufWriter::new(f);
    let res = (|| -> std::io::Result<()> {
        writeln!(w, "day_index,rd_index")?;
        for (d, rd) in rdset.membership.iter().enumerate() {
            writeln!(w, "{},{}", d, rd)?;
        }
        w.flush()
    })();
    res.map_err(|e| io_err(path, e))
}

/// Reads the `rds.csv` / `membership.csv` pair back into a day set.
/// Area order follows first appearance, matching emission order.
pub fn read_rds_csv(
    rds_path: &Path,
    membership_path: &Path,
) -> Result<(RepresentativeDaySet, Vec<String>), ClusterError> {
    let mut rdr = csv::Reader::from_path(rds_path)?;
    let malformed = |msg: String| ClusterError::Malformed {
        path: rds_path.display().to_string(),
        msg,
    };
    struct Row {
        rd: usize,
        weight: u32,
        extreme: bool,
        area: String,
        feature: Feature,
        t: usize,
        value: f64,
    }
    let mut rows: Vec<Row> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let get = |i: usize| rec.get(i).unwrap_or("").to_string();
        let feature = match rec.get(4).unwrap_or("") {
            "load" => Feature::Load,
            "wind" => Feature::Wind,
            other => return Err(malformed(format!("unknown feature `{other}`"))),
        };
        rows.push(Row {
            rd: get(0).parse().map_err(|_| malformed("bad rd_index".into()))?,
            weight: get(1).parse().map_err(|_| malformed("bad weight".into()))?,
            extreme: get(2) == "1",
            area: get(3),
            feature,
            t: get(5).parse().map_err(|_| malformed("bad t".into()))?,
            value: get(6).parse().map_err(|_| malformed("bad value".into()))?,
        });
    }
    if rows.is_empty() {
        return Err(malformed("no rows".into()));
    }
    let mut areas: Vec<String> = Vec::new();
    for r in &rows {
        if !areas.contains(&r.area) {
            areas.push(r.area.clone());
        }
    }
    let n_rd = rows.iter().map(|r| r.rd).max().unwrap() + 1;
    let mut rds = vec![DayMatrix::new(0, areas.len()); n_rd];
    let mut weights = vec![0u32; n_rd];
    let mut flags = vec![false; n_rd];
    for r in &rows {
        let a = areas.iter().position(|x| *x == r.area).unwrap();
        rds[r.rd].set(a, r.feature, r.t, r.value);
        weights[r.rd] = r.weight;
        flags[r.rd] = r.extreme;
    }
    for (i, rd) in rds.iter_mut().enumerate() {
        rd.day_index = i;
    }

    let mut rdr = csv::Reader::from_path(membership_path)?;
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let d: usize = rec
            .get(0)
            .unwrap_or("")
            .parse()
            .map_err(|_| ClusterError::Malformed {
                path: membership_path.display().to_string(),
                msg: "bad day_index".into(),
            })?;
        let rd: usize = rec
            .get(1)
            .unwrap_or("")
            .parse()
            .map_err(|_| ClusterError::Malformed {
                path: membership_path.display().to_string(),
                msg: "bad rd_index".into(),
            })?;
        pairs.push((d, rd));
    }
    pairs.sort_unstable();
    let membership: Vec<usize> = pairs.into_iter().map(|(_, rd)| rd).collect();

    Ok((
        RepresentativeDaySet {
            rds,
            weights,
            extreme_flags: flags,
            membership,
        },
        areas,
    ))
}

/// Reads `slds.csv` back.
pub fn read_slds_csv(path: &Path) -> Result<SldSequence, ClusterError> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut blocks = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let rd_index: usize = rec
            .get(1)
            .unwrap_or("")
            .parse()
            .map_err(|_| ClusterError::Malformed {
                path: path.display().to_string(),
                msg: "bad rd_index".into(),
            })?;
        let n_b: u32 = rec
            .get(2)
            .unwrap_or("")
            .parse()
            .map_err(|_| ClusterError::Malformed {
                path: path.display().to_string(),
                msg: "bad n_b".into(),
            })?;
        blocks.push(SldBlock { rd_index, n_b });
    }
    Ok(SldSequence { blocks })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn day_with(day_index: usize, values: &[f64]) -> DayMatrix {
        // Single area; load gets the shape, wind zero.
        let mut m = DayMatrix::new(day_index, 1);
        for (t, v) in values.iter().enumerate() {
            m.set(0, Feature::Load, t, *v);
        }
        m
    }

    fn flat_day(day_index: usize, level: f64) -> DayMatrix {
        day_with(day_index, &[level; DAY_POINTS])
    }

    #[test]
    fn extreme_argmax_on_toy_series() {
        // 3-day, 1-area series with day peaks [5, 9, 7].
        let mut series = vec![0.0; 72];
        series[10] = 5.0;
        series[24 + 11] = 9.0;
        series[48 + 12] = 7.0;
        let ex = extreme_days_from_net_load(&[series]);
        assert_eq!(ex.into_iter().collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn extreme_union_semantics() {
        // Two areas peaking on the same day -> one extreme day.
        let mut s1 = vec![0.0; 72];
        let mut s2 = vec![0.0; 72];
        s1[30] = 4.0;
        s2[40] = 6.0;
        assert_eq!(extreme_days_from_net_load(&[s1.clone(), s2.clone()]).len(), 1);
        // Seven areas with distinct peak days -> seven extreme days.
        let series: Vec<Vec<f64>> = (0..7)
            .map(|a| {
                let mut s = vec![0.0; 7 * 24];
                s[a * 24 + 3] = 10.0 + a as f64;
                s
            })
            .collect();
        assert_eq!(extreme_days_from_net_load(&series).len(), 7);
    }

    #[test]
    fn degenerate_all_days_singletons() {
        let days: Vec<DayMatrix> = (0..5).map(|d| flat_day(d, d as f64)).collect();
        let set = cluster_days(&days, 5, &BTreeSet::new()).unwrap();
        assert_eq!(set.len(), 5);
        assert!(set.weights.iter().all(|&w| w == 1));
        assert_eq!(set.membership, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn identical_pair_clusters_together() {
        // Two identical days plus one distant day, n_rd = 2.
        let days = vec![flat_day(0, 1.0), flat_day(1, 1.0), flat_day(2, 9.0)];
        let set = cluster_days(&days, 2, &BTreeSet::new()).unwrap();
        assert_eq!(set.len(), 2);
        let mut ws = set.weights.clone();
        ws.sort_unstable();
        assert_eq!(ws, vec![1, 2]);
        assert_eq!(set.membership[0], set.membership[1]);
        assert_ne!(set.membership[0], set.membership[2]);
        // Medoid of the identical pair is the lower day index.
        let pair_rd = set.membership[0];
        assert_eq!(set.rds[pair_rd].day_index, 0);
    }

    #[test]
    fn extreme_days_preserved_as_singletons() {
        let days: Vec<DayMatrix> = (0..6).map(|d| flat_day(d, (d % 3) as f64)).collect();
        let extreme: BTreeSet<usize> = [4].into_iter().collect();
        let set = cluster_days(&days, 3, &extreme).unwrap();
        assert_eq!(set.len(), 3);
        let rd4 = set.membership[4];
        assert!(set.extreme_flags[rd4]);
        assert_eq!(set.weights[rd4], 1);
        // Membership maps the extreme day to itself.
        assert_eq!(set.rds[rd4].day_index, 4);
        // Weights add up to the day count.
        assert_eq!(set.weights.iter().sum::<u32>(), 6);
    }

    #[test]
    fn n_rd_must_exceed_extreme_count() {
        let days: Vec<DayMatrix> = (0..4).map(|d| flat_day(d, d as f64)).collect();
        let extreme: BTreeSet<usize> = [0, 1].into_iter().collect();
        assert!(matches!(
            cluster_days(&days, 2, &extreme),
            Err(ClusterError::NotEnoughRds { .. })
        ));
        assert!(cluster_days(&days, 3, &extreme).is_ok());
    }

    #[test]
    fn clustering_is_deterministic() {
        let days: Vec<DayMatrix> = (0..30)
            .map(|d| {
                let vals: Vec<f64> = (0..DAY_POINTS)
                    .map(|t| ((d * 7 + t) % 13) as f64 / 13.0)
                    .collect();
                day_with(d, &vals)
            })
            .collect();
        let a = cluster_days(&days, 6, &BTreeSet::new()).unwrap();
        let b = cluster_days(&days, 6, &BTreeSet::new()).unwrap();
        assert_eq!(a.membership, b.membership);
        assert_eq!(a.weights, b.weights);
    }

    #[test]
    fn sld_run_length_encoding() {
        let fake = |membership: Vec<usize>| RepresentativeDaySet {
            rds: vec![DayMatrix::new(0, 1); 2],
            weights: vec![0, 0],
            extreme_flags: vec![false, false],
            membership,
        };
        // [A,A,B,A] -> [(A,2),(B,1),(A,1)]
        let slds = map_slds(&fake(vec![0, 0, 1, 0]));
        assert_eq!(
            slds.blocks,
            vec![
                SldBlock { rd_index: 0, n_b: 2 },
                SldBlock { rd_index: 1, n_b: 1 },
                SldBlock { rd_index: 0, n_b: 1 },
            ]
        );
        assert_eq!(slds.total_days(), 4);
        // Adjacent blocks always differ.
        for w in slds.blocks.windows(2) {
            assert_ne!(w[0].rd_index, w[1].rd_index);
        }
        // Single label -> single block.
        let one = map_slds(&fake(vec![0; 365]));
        assert_eq!(one.blocks.len(), 1);
        assert_eq!(one.blocks[0].n_b, 365);
        // Decode reproduces the label sequence exactly.
        let labels = vec![0, 0, 1, 1, 0, 1, 0, 0, 0];
        assert_eq!(map_slds(&fake(labels.clone())).decode(), labels);
    }

    #[test]
    fn csv_roundtrip() {
        let days = vec![flat_day(0, 1.0), flat_day(1, 1.5), flat_day(2, 9.0)];
        let set = cluster_days(&days, 2, &BTreeSet::new()).unwrap();
        let slds = map_slds(&set);
        let dir = tempfile::tempdir().unwrap();
        let rds_p = dir.path().join("rds.csv");
        let mem_p = dir.path().join("membership.csv");
        let slds_p = dir.path().join("slds.csv");
        write_rds_csv(&set, &["a1".to_string()], &rds_p).unwrap();
        write_membership_csv(&set, &mem_p).unwrap();
        write_slds_csv(&slds, &slds_p).unwrap();
        let (back, areas) = read_rds_csv(&rds_p, &mem_p).unwrap();
        assert_eq!(areas, vec!["a1".to_string()]);
        assert_eq!(back.weights, set.weights);
        assert_eq!(back.membership, set.membership);
        for (x, y) in back.rds.iter().zip(&set.rds) {
            assert_eq!(x.flat(), y.flat());
        }
        assert_eq!(read_slds_csv(&slds_p).unwrap(), slds);
    }
}
