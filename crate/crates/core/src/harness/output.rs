use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cost::Objective;
use crate::error::Result;
use crate::policy::PolicyKind;
use crate::scene::{Scenario, WaveformClass};

/// One CSV row per (trial, track, cpi).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CpiRecord {
    pub trial: u32,
    pub track: u32,
    pub cpi: u32,
    pub policy: PolicyKind,
    pub objective: Objective,
    pub scenario: Scenario,
    pub wf_class: WaveformClass,
    pub subchannel: u32,
    pub sinr_db: f64,
    pub cost: f64,
    /// RMSE of the track so far, through this CPI.
    pub rmse: f64,
    pub collision: u8,
}

/// One trial's aggregate over one track.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackSummary {
    pub policy: PolicyKind,
    pub objective: Objective,
    pub scenario: Scenario,
    pub trial: u32,
    pub track: u32,
    pub mean_sinr_db: f64,
    pub final_rmse: f64,
    pub mean_cost: f64,
    pub collision_rate: f64,
}

/// Across-seed mean and standard error of each track aggregate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub policy: PolicyKind,
    pub objective: Objective,
    pub scenario: Scenario,
    pub track: u32,
    pub seeds: u32,
    pub sinr_db_mean: f64,
    pub sinr_db_se: f64,
    pub rmse_mean: f64,
    pub rmse_se: f64,
    pub cost_mean: f64,
    pub cost_se: f64,
    pub collision_mean: f64,
    pub collision_se: f64,
}

type RunKey = (PolicyKind, Objective, Scenario);

pub fn track_summaries(records: &[CpiRecord]) -> Vec<TrackSummary> {
    #[derive(Default)]
    struct Acc {
        n: u32,
        sinr: f64,
        cost: f64,
        collisions: u32,
        last_cpi: u32,
        rmse: f64,
    }
    let mut groups: BTreeMap<(RunKey, u32, u32), Acc> = BTreeMap::new();
    for r in records {
        let acc = groups
            .entry(((r.policy, r.objective, r.scenario), r.trial, r.track))
            .or_default();
        acc.n += 1;
        acc.sinr += r.sinr_db;
        acc.cost += r.cost;
        acc.collisions += r.collision as u32;
        if acc.n == 1 || r.cpi >= acc.last_cpi {
            acc.last_cpi = r.cpi;
            acc.rmse = r.rmse;
        }
    }
    groups
        .into_iter()
        .map(
            |(((policy, objective, scenario), trial, track), a)| TrackSummary {
                policy,
                objective,
                scenario,
                trial,
                track,
                mean_sinr_db: a.sinr / a.n as f64,
                final_rmse: a.rmse,
                mean_cost: a.cost / a.n as f64,
                collision_rate: a.collisions as f64 / a.n as f64,
            },
        )
        .collect()
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Per-track means across trials, ordered by (policy, objective, scenario, track).
pub fn summarize(records: &[CpiRecord]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(RunKey, u32), Vec<TrackSummary>> = BTreeMap::new();
    for t in track_summaries(records) {
        groups
            .entry(((t.policy, t.objective, t.scenario), t.track))
            .or_default()
            .push(t);
    }
    groups
        .into_iter()
        .map(|(((policy, objective, scenario), track), ts)| {
            let col = |f: fn(&TrackSummary) -> f64| mean_se(&ts.iter().map(f).collect::<Vec<_>>());
            let (sinr_db_mean, sinr_db_se) = col(|t| t.mean_sinr_db);
            let (rmse_mean, rmse_se) = col(|t| t.final_rmse);
            let (cost_mean, cost_se) = col(|t| t.mean_cost);
            let (collision_mean, collision_se) = col(|t| t.collision_rate);
            SummaryRow {
                policy,
                objective,
                scenario,
                track,
                seeds: ts.len() as u32,
                sinr_db_mean,
                sinr_db_se,
                rmse_mean,
                rmse_se,
                cost_mean,
                cost_se,
                collision_mean,
                collision_se,
            }
        })
        .collect()
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Into::into)).collect()
}

pub fn write_records(path: &Path, records: &[CpiRecord]) -> Result<()> {
    write_rows(path, records)
}

pub fn read_records(path: &Path) -> Result<Vec<CpiRecord>> {
    read_rows(path)
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    write_rows(path, rows)
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    read_rows(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(trial: u32, track: u32, cpi: u32, cost: f64) -> CpiRecord {
        CpiRecord {
            trial,
            track,
            cpi,
            policy: PolicyKind::Random,
            objective: Objective::Tracking,
            scenario: Scenario::AdaptiveOrder2,
            wf_class: WaveformClass::LfmUpsweep,
            subchannel: 1,
            sinr_db: 15.0,
            cost,
            rmse: cpi as f64,
            collision: (cpi % 2) as u8,
        }
    }

    #[test]
    fn constant_cost_averages_to_itself() {
        let rows: Vec<_> = (0..2)
            .flat_map(|t| (0..3).flat_map(move |k| (0..10).map(move |c| rec(t, k, c, 7.5))))
            .collect();
        let s = summarize(&rows);
        assert_eq!(s.len(), 3);
        for row in &s {
            assert_eq!(row.seeds, 2);
            assert_eq!(row.cost_mean, 7.5);
            assert_eq!(row.cost_se, 0.0);
            assert_eq!(row.rmse_mean, 9.0);
            assert_eq!(row.collision_mean, 0.5);
        }
    }

    #[test]
    fn csv_header_and_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cpi.csv");
        let rows = vec![rec(0, 0, 0, 1.25), rec(0, 0, 1, 3.0)];
        write_records(&path, &rows).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "trial,track,cpi,policy,objective,scenario,wf_class,subchannel,sinr_db,cost,rmse,collision"
        );
        assert!(text.contains("random,tracking,adaptive_order2,lfm_upsweep"));
        assert_eq!(read_records(&path).unwrap(), rows);

        let spath = dir.path().join("summary.csv");
        let s = summarize(&rows);
        write_summary(&spath, &s).unwrap();
        assert_eq!(read_summary(&spath).unwrap(), s);
    }
}
