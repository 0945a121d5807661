//! Temporal edge lists: parsing, time windows, daily rates and degree counts.
//!
//! Input lines follow the KONECT layout `src dst [weight] [timestamp]`, with
//! `%` starting a comment line.

use std::collections::{BTreeMap, HashSet};
use std::io::{self, BufRead, Write};

use chrono::DateTime;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const DAY: i64 = 86_400;
const HOUR: i64 = 3_600;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("read failed: {0}")]
    Io(#[from] io::Error),
    #[error("no parseable edge lines ({issues} malformed)")]
    NoEdges { issues: usize },
    #[error("{missing} edges have no timestamp; temporal operations need one on every edge")]
    MissingTimestamps { missing: usize },
    #[error("window start {start} is after end {end}")]
    InvertedWindow { start: u64, end: u64 },
    #[error("invalid hour range {0:?}: expected H1-H2 with hours in 0..=24")]
    HourRange(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TemporalEdge {
    pub source: u64,
    pub target: u64,
    /// Seconds since the Unix epoch.
    pub timestamp: Option<u64>,
}

/// A malformed input line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseIssue {
    pub line: usize,
    pub reason: String,
}

/// Set of local clock hours `0..24`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HourSet(u32);

impl HourSet {
    pub const EMPTY: HourSet = HourSet(0);

    pub fn from_hours(hours: impl IntoIterator<Item = u32>) -> HourSet {
        HourSet(hours.into_iter().filter(|&h| h < 24).fold(0, |m, h| m | 1 << h))
    }

    /// Half-open `[start, end)`, wrapping past midnight when `end < start`.
    pub fn range(start: u32, end: u32) -> HourSet {
        if start <= end {
            HourSet::from_hours(start..end)
        } else {
            HourSet::from_hours((start..24).chain(0..end))
        }
    }

    /// Parse `"H1-H2"` as [`HourSet::range`]; an empty string is the empty set.
    pub fn parse(text: &str) -> Result<HourSet, IngestError> {
        let text = text.trim();
        if text.is_empty() {
            return Ok(HourSet::EMPTY);
        }
        let bad = || IngestError::HourRange(text.to_string());
        let (a, b) = text.split_once('-').ok_or_else(bad)?;
        let a: u32 = a.trim().parse().map_err(|_| bad())?;
        let b: u32 = b.trim().parse().map_err(|_| bad())?;
        if a > 24 || b > 24 {
            return Err(bad());
        }
        Ok(HourSet::range(a % 24, b % 24))
    }

    pub fn contains(self, hour: u32) -> bool {
        hour < 24 && self.0 & (1 << hour) != 0
    }

    pub fn union(self, other: HourSet) -> HourSet {
        HourSet(self.0 | other.0)
    }

    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn active_hours(self) -> u32 {
        24 - self.len()
    }
}

/// Edges ordered by timestamp (stable for ties) plus the settings applied so far.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalEdgeLog {
    edges: Vec<TemporalEdge>,
    /// Fixed offset from UTC used for local hours and calendar days.
    pub tz_offset: i64,
    /// Hours already removed by [`filter_window`].
    pub excluded_hours: HourSet,
    /// Start of the applied window; weekly blocks are anchored here.
    pub window_start: Option<u64>,
    pub issues: Vec<ParseIssue>,
}

impl TemporalEdgeLog {
    /// Build a log, sorting by timestamp when every edge carries one.
    pub fn new(mut edges: Vec<TemporalEdge>) -> TemporalEdgeLog {
        if edges.iter().all(|e| e.timestamp.is_some()) {
            edges.sort_by_key(|e| e.timestamp);
        }
        TemporalEdgeLog {
            edges,
            tz_offset: 0,
            excluded_hours: HourSet::EMPTY,
            window_start: None,
            issues: Vec::new(),
        }
    }

    pub fn with_tz_offset(mut self, seconds: i64) -> TemporalEdgeLog {
        self.tz_offset = seconds;
        self
    }

    pub fn edges(&self) -> &[TemporalEdge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Number of distinct node labels.
    pub fn node_count(&self) -> usize {
        self.edges
            .iter()
            .flat_map(|e| [e.source, e.target])
            .collect::<HashSet<_>>()
            .len()
    }

    fn timestamps(&self) -> Result<Vec<u64>, IngestError> {
        let missing = self.edges.iter().filter(|e| e.timestamp.is_none()).count();
        if missing > 0 {
            return Err(IngestError::MissingTimestamps { missing });
        }
        Ok(self.edges.iter().map(|e| e.timestamp.unwrap_or_default()).collect())
    }

    fn local(&self, t: u64) -> i64 {
        t as i64 + self.tz_offset
    }

    pub fn local_hour(&self, t: u64) -> u32 {
        (self.local(t).rem_euclid(DAY) / HOUR) as u32
    }

    /// Local calendar day as days since 1970-01-01.
    pub fn local_day(&self, t: u64) -> i64 {
        self.local(t).div_euclid(DAY)
    }

    /// Drop every edge touching one of `labels`.
    pub fn without_nodes(&self, labels: &HashSet<u64>) -> TemporalEdgeLog {
        TemporalEdgeLog {
            edges: self
                .edges
                .iter()
                .filter(|e| !labels.contains(&e.source) && !labels.contains(&e.target))
                .copied()
                .collect(),
            ..self.clone()
        }
    }
}

pub fn parse_edge_list<R: BufRead>(reader: R) -> Result<TemporalEdgeLog, IngestError> {
    let mut edges = Vec::new();
    let mut issues = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('%') {
            continue;
        }
        match parse_line(text) {
            Ok(e) => edges.push(e),
            Err(reason) => issues.push(ParseIssue { line: i + 1, reason }),
        }
    }
    if edges.is_empty() {
        return Err(IngestError::NoEdges { issues: issues.len() });
    }
    let mut log = TemporalEdgeLog::new(edges);
    log.issues = issues;
    Ok(log)
}

fn parse_line(text: &str) -> Result<TemporalEdge, String> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    if !(2..=4).contains(&fields.len()) {
        return Err(format!("expected 2 to 4 fields, found {}", fields.len()));
    }
    let label = |s: &str| s.parse::<u64>().map_err(|_| format!("bad node label {s:?}"));
    let source = label(fields[0])?;
    let target = label(fields[1])?;
    if let Some(w) = fields.get(2) {
        w.parse::<f64>().map_err(|_| format!("bad weight {w:?}"))?;
    }
    let timestamp = match fields.get(3) {
        Some(t) => Some(t.parse::<u64>().map_err(|_| format!("bad timestamp {t:?}"))?),
        None => None,
    };
    Ok(TemporalEdge {
        source,
        target,
        timestamp,
    })
}

/// Write the edges in the layout read by [`parse_edge_list`] (unit weights).
pub fn write_edge_list<W: Write>(log: &TemporalEdgeLog, mut out: W) -> io::Result<()> {
    writeln!(out, "% asym unweighted")?;
    for e in &log.edges {
        match e.timestamp {
            Some(t) => writeln!(out, "{} {} 1 {}", e.source, e.target, t)?,
            None => writeln!(out, "{} {}", e.source, e.target)?,
        }
    }
    Ok(())
}

/// Keep edges with `start <= t < end` whose local hour is not excluded.
pub fn filter_window(
    log: &TemporalEdgeLog,
    start: u64,
    end: u64,
    excluded: HourSet,
) -> Result<TemporalEdgeLog, IngestError> {
    if start > end {
        return Err(IngestError::InvertedWindow { start, end });
    }
    log.timestamps()?;
    let edges = log
        .edges
        .iter()
        .filter(|e| {
            let t = e.timestamp.unwrap_or_default();
            t >= start && t < end && !excluded.contains(log.local_hour(t))
        })
        .copied()
        .collect();
    Ok(TemporalEdgeLog {
        edges,
        tz_offset: log.tz_offset,
        excluded_hours: log.excluded_hours.union(excluded),
        window_start: Some(log.window_start.map_or(start, |s| s.max(start))),
        issues: log.issues.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailyRate {
    /// Local calendar day, days since 1970-01-01.
    pub day: i64,
    pub edges: usize,
    pub new_nodes: usize,
    /// Events per active day; `None` with fewer than two events in one active stretch.
    pub edge_rate: Option<f64>,
    pub node_rate: Option<f64>,
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeeklyRate {
    pub first_day: i64,
    pub edge_rate: Option<f64>,
    pub node_rate: Option<f64>,
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSeries {
    pub days: Vec<DailyRate>,
    pub weeks: Vec<WeeklyRate>,
    pub active_hours: u32,
}

impl RateSeries {
    /// Average of the defined daily edge rates.
    pub fn mean_edge_rate(&self) -> Option<f64> {
        mean(self.days.iter().filter_map(|d| d.edge_rate))
    }

    pub fn mean_ratio(&self) -> Option<f64> {
        mean(self.days.iter().filter_map(|d| d.ratio))
    }

    /// Columns `day,edge_rate,node_rate,ratio`; undefined values are empty.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "day,edge_rate,node_rate,ratio")?;
        let cell = |v: Option<f64>| v.map(format_sig).unwrap_or_default();
        for d in &self.days {
            writeln!(
                out,
                "{},{},{},{}",
                day_label(d.day),
                cell(d.edge_rate),
                cell(d.node_rate),
                cell(d.ratio)
            )?;
        }
        Ok(())
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// `YYYY-MM-DD` for a day count since the epoch.
pub fn day_label(day: i64) -> String {
    DateTime::from_timestamp(day * DAY, 0)
        .map(|d| d.format("%Y-%m-%d").to_string())
        .unwrap_or_else(|| day.to_string())
}

/// Index of the run of consecutive active hours containing `hour`.
fn active_stretch(excluded: HourSet, hour: u32) -> u32 {
    (1..=hour)
        .filter(|&h| !excluded.contains(h) && excluded.contains(h - 1))
        .count() as u32
}

/// Per-day edge rates as the reciprocal mean gap between consecutive events,
/// scaled to events per active day.
///
/// Gaps are only taken between events in the same stretch of active hours,
/// so nothing is measured across an excluded night. The node rate counts
/// first appearances of labels per edge on that day, on the edge-rate scale.
pub fn daily_rates(log: &TemporalEdgeLog) -> Result<RateSeries, IngestError> {
    let times = log.timestamps()?;
    let excluded = log.excluded_hours;
    let active_seconds = (excluded.active_hours() as i64 * HOUR) as f64;

    let mut seen = HashSet::new();
    let mut by_day: BTreeMap<i64, (usize, usize, f64, usize)> = BTreeMap::new();
    let mut prev: Option<(i64, u32, u64)> = None;
    for (e, &t) in log.edges.iter().zip(&times) {
        let day = log.local_day(t);
        let stretch = active_stretch(excluded, log.local_hour(t));
        let fresh = seen.insert(e.source) as usize + (e.target != e.source && seen.insert(e.target)) as usize;
        let entry = by_day.entry(day).or_insert((0, 0, 0.0, 0));
        entry.0 += 1;
        entry.1 += fresh;
        if let Some((pd, ps, pt)) = prev {
            if pd == day && ps == stretch {
                entry.2 += (t - pt) as f64;
                entry.3 += 1;
            }
        }
        prev = Some((day, stretch, t));
    }

    let days: Vec<DailyRate> = by_day
        .into_iter()
        .map(|(day, (edges, new_nodes, gap_sum, gaps))| {
            let edge_rate = (gaps > 0 && gap_sum > 0.0).then(|| active_seconds * gaps as f64 / gap_sum);
            let node_rate = edge_rate.map(|r| r * new_nodes as f64 / edges as f64);
            let ratio = match (node_rate, edge_rate) {
                (Some(n), Some(r)) if r > 0.0 => Some(n / r),
                _ => None,
            };
            DailyRate {
                day,
                edges,
                new_nodes,
                edge_rate,
                node_rate,
                ratio,
            }
        })
        .collect();

    let anchor = log
        .window_start
        .map(|s| log.local_day(s))
        .or_else(|| days.first().map(|d| d.day))
        .unwrap_or(0);
    let mut blocks: BTreeMap<i64, Vec<&DailyRate>> = BTreeMap::new();
    for d in &days {
        blocks.entry((d.day - anchor).div_euclid(7)).or_default().push(d);
    }
    let weeks = blocks
        .into_iter()
        .map(|(b, ds)| WeeklyRate {
            first_day: anchor + 7 * b,
            edge_rate: mean(ds.iter().filter_map(|d| d.edge_rate)),
            node_rate: mean(ds.iter().filter_map(|d| d.node_rate)),
            ratio: mean(ds.iter().filter_map(|d| d.ratio)),
        })
        .collect();

    Ok(RateSeries {
        days,
        weeks,
        active_hours: excluded.active_hours(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeDegree {
    pub label: u64,
    pub in_deg: u64,
    pub out_deg: u64,
}

/// In/out-degree of every label, ordered by label.
pub fn degrees_from_log(log: &TemporalEdgeLog) -> Vec<NodeDegree> {
    let mut map: BTreeMap<u64, (u64, u64)> = BTreeMap::new();
    for e in &log.edges {
        map.entry(e.source).or_default().1 += 1;
        map.entry(e.target).or_default().0 += 1;
    }
    map.into_iter()
        .map(|(label, (in_deg, out_deg))| NodeDegree {
            label,
            in_deg,
            out_deg,
        })
        .collect()
}

/// Drop nodes that never send and receive at least `in_min` edges.
/// Returns the kept nodes and the number dropped.
pub fn remove_admin_nodes(nodes: &[NodeDegree], in_min: u64) -> (Vec<NodeDegree>, usize) {
    let kept: Vec<NodeDegree> = nodes
        .iter()
        .filter(|n| !(n.out_deg == 0 && n.in_deg >= in_min))
        .copied()
        .collect();
    let dropped = nodes.len() - kept.len();
    (kept, dropped)
}

/// Format with 12 significant digits, trimming trailing zeros.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        // rounding can carry into a new leading digit; keep it, then trim
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let s = format!("{x:.11e}");
        let (mant, e) = s.split_once('e').expect("exponent form");
        let mant = if mant.contains('.') {
            mant.trim_end_matches('0').trim_end_matches('.')
        } else {
            mant
        };
        format!("{mant}e{e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn edge(s: u64, t: u64, ts: u64) -> TemporalEdge {
        TemporalEdge {
            source: s,
            target: t,
            timestamp: Some(ts),
        }
    }

    fn parse(text: &str) -> TemporalEdgeLog {
        parse_edge_list(text.as_bytes()).unwrap()
    }

    #[test]
    fn parses_konect_lines() {
        let log = parse("% comment\n12 34 1 1199574381\n");
        assert_eq!(log.edges(), &[edge(12, 34, 1199574381)]);
        let log = parse("7 7 1 100\n");
        assert_eq!(log.edges(), &[edge(7, 7, 100)]);
        let log = parse("1 2 1 50\n3 4 1 50\n5 6 1 10\n");
        assert_eq!(log.edges(), &[edge(5, 6, 10), edge(1, 2, 50), edge(3, 4, 50)]);
    }

    #[test]
    fn reports_malformed_lines() {
        let log = parse("1 2 1 10\nfoo bar\n1\n3 4 1 x\n5 6 -1 20\n");
        assert_eq!(log.len(), 2);
        let lines: Vec<usize> = log.issues.iter().map(|i| i.line).collect();
        assert_eq!(lines, vec![2, 3, 4]);
        assert!(matches!(
            parse_edge_list("% only\nnope\n".as_bytes()),
            Err(IngestError::NoEdges { issues: 1 })
        ));
    }

    #[test]
    fn temporal_ops_need_timestamps() {
        let log = parse("1 2\n2 3 1\n");
        assert!(matches!(
            filter_window(&log, 0, 10, HourSet::EMPTY),
            Err(IngestError::MissingTimestamps { missing: 2 })
        ));
        assert!(daily_rates(&log).is_err());
        assert_eq!(degrees_from_log(&log).len(), 3);
    }

    #[test]
    fn hour_sets() {
        let night = HourSet::parse("1-8").unwrap();
        assert_eq!(night.len(), 7);
        assert_eq!(night.active_hours(), 17);
        assert!(night.contains(1) && night.contains(7) && !night.contains(8) && !night.contains(0));
        let wrap = HourSet::parse("22-2").unwrap();
        assert_eq!(wrap, HourSet::from_hours([22, 23, 0, 1]));
        assert_eq!(HourSet::parse("").unwrap(), HourSet::EMPTY);
        assert!(HourSet::parse("3").is_err());
        assert!(HourSet::parse("3-30").is_err());
    }

    #[test]
    fn sleep_hours_are_dropped() {
        let night = HourSet::range(1, 8);
        let log = TemporalEdgeLog::new(vec![edge(1, 2, 3 * 3600), edge(2, 3, 8 * 3600), edge(3, 4, 7 * 3600 + 3599)]);
        let kept = filter_window(&log, 0, DAY as u64, night).unwrap();
        assert_eq!(kept.edges(), &[edge(2, 3, 8 * 3600)]);
        assert_eq!(kept.excluded_hours, night);
        // offset shifts the local clock: 03:00 UTC is 08:00 at +5h
        let shifted = filter_window(&log.clone().with_tz_offset(5 * 3600), 0, DAY as u64, night).unwrap();
        assert_eq!(shifted.len(), 3);
        let all = filter_window(&log, 0, u64::MAX, HourSet::EMPTY).unwrap();
        assert_eq!(all.len(), 3);
        let window = filter_window(&log, 8 * 3600, 8 * 3600 + 1, HourSet::EMPTY).unwrap();
        assert_eq!(window.len(), 1);
        assert!(matches!(
            filter_window(&log, 5, 4, HourSet::EMPTY),
            Err(IngestError::InvertedWindow { .. })
        ));
    }

    #[test]
    fn rate_from_even_gaps() {
        let log = TemporalEdgeLog::new((0..5).map(|i| edge(i, i + 1, 100 * i)).collect());
        let rates = daily_rates(&log).unwrap();
        assert_eq!(rates.days.len(), 1);
        // 0.01 events per second over a 24 h active day
        let r = rates.days[0].edge_rate.unwrap();
        assert!((r / 86_400.0 - 0.01).abs() < 1e-15);
        assert_eq!(rates.days[0].new_nodes, 6);
    }

    #[test]
    fn first_appearances() {
        let log = TemporalEdgeLog::new(vec![edge(5, 5, 0), edge(5, 9, 10), edge(9, 5, 20)]);
        let rates = daily_rates(&log).unwrap();
        assert_eq!(rates.days[0].new_nodes, 2);
        assert!((rates.days[0].ratio.unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn gaps_do_not_cross_the_night() {
        let night = HourSet::range(1, 8);
        // two events before 01:00, two after 08:00; the 7 h jump is ignored
        let log = TemporalEdgeLog::new(vec![
            edge(1, 2, 0),
            edge(1, 2, 600),
            edge(1, 2, 9 * 3600),
            edge(1, 2, 9 * 3600 + 600),
        ]);
        let log = filter_window(&log, 0, DAY as u64, night).unwrap();
        let rates = daily_rates(&log).unwrap();
        assert_eq!(rates.active_hours, 17);
        let r = rates.days[0].edge_rate.unwrap();
        assert!((r - 17.0 * 3600.0 / 600.0).abs() < 1e-9, "{r}");
    }

    #[test]
    fn single_event_days_are_undefined() {
        let log = TemporalEdgeLog::new(vec![edge(1, 2, 0), edge(1, 2, 10), edge(1, 2, DAY as u64 + 5)]);
        let rates = daily_rates(&log).unwrap();
        assert_eq!(rates.days.len(), 2);
        assert!(rates.days[1].edge_rate.is_none());
        assert_eq!(rates.mean_edge_rate(), rates.days[0].edge_rate);
        assert_eq!(rates.weeks.len(), 1);
        let mut csv = Vec::new();
        rates.write_csv(&mut csv).unwrap();
        let csv = String::from_utf8(csv).unwrap();
        assert_eq!(csv.lines().next(), Some("day,edge_rate,node_rate,ratio"));
        assert!(csv.contains("1970-01-02,,,"));
    }

    #[test]
    fn weekly_blocks_are_anchored_at_the_window() {
        let log = TemporalEdgeLog::new(
            (0..20u64)
                .flat_map(|d| [edge(1, 2, d * DAY as u64), edge(1, 2, d * DAY as u64 + 100)])
                .collect(),
        );
        let log = filter_window(&log, 3 * DAY as u64, 20 * DAY as u64, HourSet::EMPTY).unwrap();
        let rates = daily_rates(&log).unwrap();
        let firsts: Vec<i64> = rates.weeks.iter().map(|w| w.first_day).collect();
        assert_eq!(firsts, vec![3, 10, 17]);
    }

    #[test]
    fn degree_counts() {
        let log = TemporalEdgeLog::new(vec![edge(1, 2, 0), edge(3, 2, 1), edge(7, 7, 2)]);
        let d = degrees_from_log(&log);
        let get = |l| d.iter().find(|n| n.label == l).copied().unwrap();
        assert_eq!((get(2).in_deg, get(2).out_deg), (2, 0));
        assert_eq!((get(1).in_deg, get(1).out_deg), (0, 1));
        assert_eq!((get(3).in_deg, get(3).out_deg), (0, 1));
        assert_eq!((get(7).in_deg, get(7).out_deg), (1, 1));
    }

    #[test]
    fn admin_filter() {
        let n = |i, o| NodeDegree { label: 0, in_deg: i, out_deg: o };
        let (kept, dropped) = remove_admin_nodes(&[n(25, 0), n(25, 1), n(19, 0)], 20);
        assert_eq!(dropped, 1);
        assert_eq!(kept, vec![n(25, 1), n(19, 0)]);
    }

    #[test]
    fn without_nodes_drops_incident_edges() {
        let log = TemporalEdgeLog::new(vec![edge(1, 2, 0), edge(3, 2, 1), edge(3, 4, 2)]);
        let log = log.without_nodes(&HashSet::from([2]));
        assert_eq!(log.edges(), &[edge(3, 4, 2)]);
    }

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(6.0 / 19.0), "0.315789473684");
        assert_eq!(format_sig(46.54), "46.54");
        assert_eq!(format_sig(2.0), "2");
        assert_eq!(format_sig(-1.5e-9), "-1.5e-9");
        assert_eq!(format_sig(123456789012345.0), "1.23456789012e14");
        assert_eq!(format_sig(0.0), "0");
    }

    fn arb_log() -> impl Strategy<Value = TemporalEdgeLog> {
        prop::collection::vec((0u64..50, 0u64..50, 0u64..2_000_000_000), 1..80).prop_map(|v| {
            TemporalEdgeLog::new(v.into_iter().map(|(s, t, ts)| edge(s, t, ts)).collect())
        })
    }

    proptest! {
        #[test]
        fn parse_inverts_write(log in arb_log()) {
            let mut buf = Vec::new();
            write_edge_list(&log, &mut buf).unwrap();
            let back = parse_edge_list(buf.as_slice()).unwrap();
            prop_assert_eq!(back, log);
        }

        #[test]
        fn filtering_never_adds_edges(log in arb_log(), a in 0u32..24, b in 0u32..24, c in 0u32..24, d in 0u32..24) {
            let (x, y) = (HourSet::range(a, b), HourSet::range(c, d));
            let once = filter_window(&log, 0, u64::MAX, x.union(y)).unwrap();
            let twice = filter_window(&filter_window(&log, 0, u64::MAX, x).unwrap(), 0, u64::MAX, y).unwrap();
            prop_assert!(once.len() <= log.len());
            prop_assert_eq!(once.edges(), twice.edges());
        }

        #[test]
        fn degrees_conserve_edges(log in arb_log()) {
            let d = degrees_from_log(&log);
            prop_assert_eq!(d.iter().map(|n| n.in_deg).sum::<u64>(), log.len() as u64);
            prop_assert_eq!(d.iter().map(|n| n.out_deg).sum::<u64>(), log.len() as u64);
        }

        #[test]
        fn node_rate_bounded_by_twice_edge_rate(log in arb_log()) {
            for day in daily_rates(&log).unwrap().days {
                if let (Some(n), Some(e)) = (day.node_rate, day.edge_rate) {
                    prop_assert!(n <= 2.0 * e + 1e-9);
                    prop_assert!(n >= 0.0 && e >= 0.0);
                }
            }
        }
    }
}
