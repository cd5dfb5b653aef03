//! Hourly input data and the calendar: parsing demand/generation CSV files,
//! classifying days into (season, day type) cells and counting days per cell.
//!
//! Hours are hour-ending, `1..=24`. The hour-24 value of a day is the hour-0
//! anchor of the following day.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Read, Write};

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use ndarray::Array2;
use serde::Serialize;
use thiserror::Error;

use crate::types::{DayType, IndexSets, Season, TechKind};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed header: {0}")]
    Header(String),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("holiday file line {line}: `{text}` is not an ISO-8601 date")]
    Holiday { line: usize, text: String },
}

/// One hour of observations. Per-technology arrays are indexed by
/// `TechKind as usize`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HourlyRecord {
    pub date: NaiveDate,
    pub hour: u8,
    pub demand: Option<f64>,
    pub output: [Option<f64>; 6],
    pub capability: [Option<f64>; 6],
    pub installed: [Option<f64>; 6],
}

impl HourlyRecord {
    pub fn empty(date: NaiveDate, hour: u8) -> Self {
        HourlyRecord {
            date,
            hour,
            demand: None,
            output: [None; 6],
            capability: [None; 6],
            installed: [None; 6],
        }
    }

    pub fn output_of(&self, k: TechKind) -> Option<f64> {
        self.output[k as usize]
    }

    pub fn capability_of(&self, k: TechKind) -> Option<f64> {
        self.capability[k as usize]
    }

    pub fn installed_of(&self, k: TechKind) -> Option<f64> {
        self.installed[k as usize]
    }

    fn absorb(&mut self, other: &HourlyRecord) {
        self.demand = self.demand.or(other.demand);
        for k in 0..6 {
            self.output[k] = self.output[k].or(other.output[k]);
            self.capability[k] = self.capability[k].or(other.capability[k]);
            self.installed[k] = self.installed[k].or(other.installed[k]);
        }
    }
}

/// Column names of the two accepted input layouts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Schema {
    /// `date,hour,demand_mw`
    Demand { date: String, hour: String, demand: String },
    /// `date,hour,tech,output_mw,capability_mw,installed_mw`; the three
    /// value columns may be blank.
    Generation {
        date: String,
        hour: String,
        tech: String,
        output: String,
        capability: String,
        installed: String,
    },
}

impl Schema {
    pub fn demand() -> Self {
        Schema::Demand {
            date: "date".into(),
            hour: "hour".into(),
            demand: "demand_mw".into(),
        }
    }

    pub fn generation() -> Self {
        Schema::Generation {
            date: "date".into(),
            hour: "hour".into(),
            tech: "tech".into(),
            output: "output_mw".into(),
            capability: "capability_mw".into(),
            installed: "installed_mw".into(),
        }
    }

    fn columns(&self) -> Vec<&str> {
        match self {
            Schema::Demand { date, hour, demand } => vec![date, hour, demand],
            Schema::Generation {
                date,
                hour,
                tech,
                output,
                capability,
                installed,
            } => vec![date, hour, tech, output, capability, installed],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rejection {
    /// 1-based line number in the input, header included.
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ParseOutcome {
    pub records: Vec<HourlyRecord>,
    pub rows_read: usize,
    pub rejections: Vec<Rejection>,
}

/// Parses one delimiter-separated stream. A bad header aborts; bad rows are
/// recorded and skipped. Records come back sorted by (date, hour).
pub fn parse_hourly<R: Read>(input: R, schema: &Schema) -> Result<ParseOutcome, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = reader.headers()?.clone();
    let mut positions = Vec::new();
    for name in schema.columns() {
        let pos = header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IngestError::Header(format!("missing column `{name}` in {header:?}")))?;
        positions.push(pos);
    }

    let mut out = ParseOutcome::default();
    let mut by_key: BTreeMap<(NaiveDate, u8), HourlyRecord> = BTreeMap::new();
    let mut seen_gen: BTreeSet<(NaiveDate, u8, TechKind)> = BTreeSet::new();

    for row in reader.records() {
        out.rows_read += 1;
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                out.rejections.push(Rejection {
                    line,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let line = row.position().map_or(0, |p| p.line());
        let field = |i: usize| row.get(positions[i]).unwrap_or("");
        let parsed = parse_row(schema, &field).and_then(|(rec, tech)| {
            let key = (rec.date, rec.hour);
            match tech {
                None if by_key.contains_key(&key) => {
                    Err(format!("duplicate record for {} hour {}", rec.date, rec.hour))
                }
                Some(k) if !seen_gen.insert((rec.date, rec.hour, k)) => Err(format!(
                    "duplicate {k} record for {} hour {}",
                    rec.date, rec.hour
                )),
                _ => Ok(rec),
            }
        });
        match parsed {
            Ok(rec) => by_key
                .entry((rec.date, rec.hour))
                .or_insert_with(|| HourlyRecord::empty(rec.date, rec.hour))
                .absorb(&rec),
            Err(reason) => out.rejections.push(Rejection { line, reason }),
        }
    }
    out.records = by_key.into_values().collect();
    Ok(out)
}

fn parse_number(text: &str, what: &str) -> Result<Option<f64>, String> {
    if text.is_empty() {
        return Ok(None);
    }
    let v: f64 = text
        .parse()
        .map_err(|_| format!("{what} `{text}` is not a number"))?;
    if !v.is_finite() {
        return Err(format!("{what} `{text}` is not finite"));
    }
    Ok(Some(v))
}

fn parse_row<'a>(
    schema: &Schema,
    field: &dyn Fn(usize) -> &'a str,
) -> Result<(HourlyRecord, Option<TechKind>), String> {
    let date = NaiveDate::parse_from_str(field(0), "%Y-%m-%d")
        .map_err(|_| format!("date `{}` is not YYYY-MM-DD", field(0)))?;
    let hour: u8 = field(1)
        .parse()
        .map_err(|_| format!("hour `{}` is not an integer", field(1)))?;
    if !(1..=24).contains(&hour) {
        return Err(format!("hour {hour} outside 1..=24"));
    }
    let mut rec = HourlyRecord::empty(date, hour);
    match schema {
        Schema::Demand { .. } => {
            let demand = parse_number(field(2), "demand")?.ok_or("demand is blank")?;
            if demand < 0.0 {
                return Err(format!("negative demand {demand}"));
            }
            rec.demand = Some(demand);
            Ok((rec, None))
        }
        Schema::Generation { .. } => {
            let tech: TechKind = field(2).parse()?;
            let output = parse_number(field(3), "output")?;
            let capability = parse_number(field(4), "capability")?;
            let installed = parse_number(field(5), "installed")?;
            check_ordering(output, capability, installed)?;
            let k = tech as usize;
            rec.output[k] = output;
            rec.capability[k] = capability;
            rec.installed[k] = installed;
            Ok((rec, Some(tech)))
        }
    }
}

/// `0 <= output <= capability <= installed` with slack `1e-6 * installed`.
fn check_ordering(output: Option<f64>, capability: Option<f64>, installed: Option<f64>) -> Result<(), String> {
    let slack = installed.map_or(0.0, |i| 1e-6 * i.abs());
    for (name, v) in [("output", output), ("capability", capability), ("installed", installed)] {
        if let Some(v) = v {
            if v < -slack {
                return Err(format!("negative {name} {v}"));
            }
        }
    }
    if let (Some(o), Some(c)) = (output, capability) {
        if o > c + slack {
            return Err(format!("output {o} exceeds capability {c}"));
        }
    }
    if let (Some(c), Some(i)) = (capability, installed) {
        if c > i + slack {
            return Err(format!("capability {c} exceeds installed {i}"));
        }
    }
    if let (Some(o), Some(i)) = (output, installed) {
        if o > i + slack {
            return Err(format!("output {o} exceeds installed {i}"));
        }
    }
    Ok(())
}

/// Merges record streams field by field; the first stream wins on conflict.
pub fn merge_records<I>(streams: I) -> Vec<HourlyRecord>
where
    I: IntoIterator<Item = Vec<HourlyRecord>>,
{
    let mut by_key: BTreeMap<(NaiveDate, u8), HourlyRecord> = BTreeMap::new();
    for stream in streams {
        for rec in stream {
            by_key
                .entry((rec.date, rec.hour))
                .or_insert_with(|| HourlyRecord::empty(rec.date, rec.hour))
                .absorb(&rec);
        }
    }
    by_key.into_values().collect()
}

fn blank_or(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

/// Writes the demand column of `records` in the [`Schema::demand`] layout.
/// Records without demand are skipped.
pub fn write_demand_csv<W: Write>(records: &[HourlyRecord], out: W) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["date", "hour", "demand_mw"])?;
    for r in records {
        if let Some(d) = r.demand {
            w.write_record([r.date.to_string(), r.hour.to_string(), d.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes one row per (record, technology) with any value present, in the
/// [`Schema::generation`] layout.
pub fn write_generation_csv<W: Write>(records: &[HourlyRecord], out: W) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["date", "hour", "tech", "output_mw", "capability_mw", "installed_mw"])?;
    for r in records {
        for k in TechKind::ALL {
            let kp = k as usize;
            if r.output[kp].is_none() && r.capability[kp].is_none() && r.installed[kp].is_none() {
                continue;
            }
            w.write_record([
                r.date.to_string(),
                r.hour.to_string(),
                k.to_string(),
                blank_or(r.output[kp]),
                blank_or(r.capability[kp]),
                blank_or(r.installed[kp]),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One ISO-8601 date per line; blank lines and `#` comments are ignored.
pub fn read_holidays<R: BufRead>(input: R) -> Result<BTreeSet<NaiveDate>, IngestError> {
    let mut out = BTreeSet::new();
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        let text = line.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let date = NaiveDate::parse_from_str(text, "%Y-%m-%d").map_err(|_| IngestError::Holiday {
            line: n + 1,
            text: text.to_string(),
        })?;
        out.insert(date);
    }
    Ok(out)
}

/// Ontario statutory holidays on their calendar dates (no observed-day
/// shifting): New Year's Day, Family Day, Good Friday, Victoria Day, Canada
/// Day, Labour Day, Thanksgiving, Christmas and Boxing Day.
pub fn ontario_statutory_holidays(year: i32) -> BTreeSet<NaiveDate> {
    let ymd = |m, d| NaiveDate::from_ymd_opt(year, m, d).expect("valid fixed date");
    let nth = |m, wd, n| NaiveDate::from_weekday_of_month_opt(year, m, wd, n).expect("valid weekday");
    // Victoria Day: the last Monday strictly before May 25.
    let mut victoria = ymd(5, 24);
    while victoria.weekday() != Weekday::Mon {
        victoria -= Duration::days(1);
    }
    [
        ymd(1, 1),
        nth(2, Weekday::Mon, 3),
        easter_sunday(year) - Duration::days(2),
        victoria,
        ymd(7, 1),
        nth(9, Weekday::Mon, 1),
        nth(10, Weekday::Mon, 2),
        ymd(12, 25),
        ymd(12, 26),
    ]
    .into_iter()
    .collect()
}

/// Gregorian Easter Sunday (anonymous Gregorian computus).
pub fn easter_sunday(year: i32) -> NaiveDate {
    let a = year % 19;
    let b = year / 100;
    let c = year % 100;
    let d = b / 4;
    let e = b % 4;
    let f = (b + 8) / 25;
    let g = (b - f + 1) / 3;
    let h = (19 * a + b - d - g + 15) % 30;
    let i = c / 4;
    let k = c % 4;
    let l = (32 + 2 * e + 2 * i - h - k) % 7;
    let m = (a + 11 * h + 22 * l) / 451;
    let month = (h + l - 7 * m + 114) / 31;
    let day = (h + l - 7 * m + 114) % 31 + 1;
    NaiveDate::from_ymd_opt(year, month as u32, day as u32).expect("computus yields a valid date")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct DayCell {
    pub season: Season,
    pub day_type: DayType,
}

/// Winter: Nov 16 to Mar 31; spring: Apr 1 to Jun 15; summer: Jun 16 to
/// Sep 15; fall: Sep 16 to Nov 15.
pub fn season_of(date: NaiveDate) -> Season {
    let second_half = date.day() >= 16;
    match date.month() {
        12 | 1 | 2 | 3 => Season::Winter,
        4 | 5 => Season::Spring,
        6 if second_half => Season::Summer,
        6 => Season::Spring,
        7 | 8 => Season::Summer,
        9 if second_half => Season::Fall,
        9 => Season::Summer,
        10 => Season::Fall,
        11 if second_half => Season::Winter,
        11 => Season::Fall,
        _ => unreachable!("chrono months are 1..=12"),
    }
}

pub fn classify_day(date: NaiveDate, holidays: &BTreeSet<NaiveDate>) -> DayCell {
    let weekend = matches!(date.weekday(), Weekday::Sat | Weekday::Sun) || holidays.contains(&date);
    DayCell {
        season: season_of(date),
        day_type: if weekend { DayType::Weekend } else { DayType::Weekday },
    }
}

/// Days of one reference year in each (day type, season) cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DayCounts {
    counts: BTreeMap<DayCell, u32>,
}

/// Serialized as a list of `{season, day_type, days}` since JSON keys
/// must be strings.
impl Serialize for DayCounts {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry {
            season: Season,
            day_type: DayType,
            days: u32,
        }
        serializer.collect_seq(self.counts.iter().map(|(c, &days)| Entry {
            season: c.season,
            day_type: c.day_type,
            days,
        }))
    }
}

impl DayCounts {
    pub fn get(&self, day_type: DayType, season: Season) -> u32 {
        self.counts
            .get(&DayCell { season, day_type })
            .copied()
            .unwrap_or(0)
    }

    pub fn total(&self) -> u32 {
        self.counts.values().sum()
    }

    /// `T(i, ss)` over the members of `sets`.
    pub fn to_array(&self, sets: &IndexSets) -> Array2<f64> {
        Array2::from_shape_fn((sets.day_types.len(), sets.seasons.len()), |(i, ss)| {
            f64::from(self.get(sets.day_types[i], sets.seasons[ss]))
        })
    }
}

pub fn count_day_types(year: i32, holidays: &BTreeSet<NaiveDate>) -> DayCounts {
    let mut counts = BTreeMap::new();
    let first = NaiveDate::from_ymd_opt(year, 1, 1).expect("January 1st exists");
    for date in first.iter_days().take_while(|d| d.year() == year) {
        *counts.entry(classify_day(date, holidays)).or_insert(0) += 1;
    }
    DayCounts { counts }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn writers_round_trip_through_the_parser() {
        let recs = crate::synthetic::hourly_corpus(&crate::synthetic::CorpusLayout {
            year: 2016,
            days: (1, 2),
            seed: 1,
        });
        let mut demand = Vec::new();
        let mut generation = Vec::new();
        write_demand_csv(&recs, &mut demand).unwrap();
        write_generation_csv(&recs, &mut generation).unwrap();
        let d = parse_hourly(demand.as_slice(), &Schema::demand()).unwrap();
        let g = parse_hourly(generation.as_slice(), &Schema::generation()).unwrap();
        assert!(d.rejections.is_empty() && g.rejections.is_empty());
        assert_eq!(merge_records([d.records, g.records]), recs);
    }

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    #[test]
    fn classify_examples() {
        let holidays = ontario_statutory_holidays(2017);
        assert_eq!(
            classify_day(d(2017, 1, 10), &holidays),
            DayCell {
                season: Season::Winter,
                day_type: DayType::Weekday
            }
        );
        assert_eq!(
            classify_day(d(2017, 7, 1), &holidays),
            DayCell {
                season: Season::Summer,
                day_type: DayType::Weekend
            }
        );
        assert_eq!(season_of(d(2017, 6, 15)), Season::Spring);
        assert_eq!(season_of(d(2017, 6, 16)), Season::Summer);
        assert_eq!(season_of(d(2017, 9, 15)), Season::Summer);
        assert_eq!(season_of(d(2017, 9, 16)), Season::Fall);
        assert_eq!(season_of(d(2017, 11, 15)), Season::Fall);
        assert_eq!(season_of(d(2017, 11, 16)), Season::Winter);
        assert_eq!(season_of(d(2017, 3, 31)), Season::Winter);
        assert_eq!(season_of(d(2017, 4, 1)), Season::Spring);
    }

    #[test]
    fn weekday_holiday_counts_as_weekend() {
        // 2017-12-25 is a Monday.
        let holidays = ontario_statutory_holidays(2017);
        assert_eq!(classify_day(d(2017, 12, 25), &holidays).day_type, DayType::Weekend);
        assert_eq!(classify_day(d(2017, 12, 25), &BTreeSet::new()).day_type, DayType::Weekday);
    }

    #[test]
    fn ontario_2017_dates() {
        let h = ontario_statutory_holidays(2017);
        for date in [
            d(2017, 1, 1),
            d(2017, 2, 20),
            d(2017, 4, 14),
            d(2017, 5, 22),
            d(2017, 7, 1),
            d(2017, 9, 4),
            d(2017, 10, 9),
            d(2017, 12, 25),
            d(2017, 12, 26),
        ] {
            assert!(h.contains(&date), "{date} missing");
        }
        assert_eq!(h.len(), 9);
        assert_eq!(easter_sunday(2024), d(2024, 3, 31));
    }

    #[test]
    fn year_partitions() {
        assert_eq!(count_day_types(2017, &BTreeSet::new()).total(), 365);
        assert_eq!(count_day_types(2016, &BTreeSet::new()).total(), 366);
    }

    #[test]
    fn no_holidays_means_weekend_is_saturday_and_sunday() {
        let counts = count_day_types(2017, &BTreeSet::new());
        for ss in Season::ALL {
            let brute = d(2017, 1, 1)
                .iter_days()
                .take_while(|x| x.year() == 2017)
                .filter(|x| season_of(*x) == ss && matches!(x.weekday(), Weekday::Sat | Weekday::Sun))
                .count() as u32;
            assert_eq!(counts.get(DayType::Weekend, ss), brute);
        }
    }

    #[test]
    fn statutory_holidays_remove_weekdays() {
        let plain = count_day_types(2017, &BTreeSet::new());
        let ontario = count_day_types(2017, &ontario_statutory_holidays(2017));
        let weekdays = |c: &DayCounts| Season::ALL.iter().map(|&s| c.get(DayType::Weekday, s)).sum::<u32>();
        // Jan 1 and Jul 1 fall on a Sunday and a Saturday in 2017; the
        // other seven statutory holidays are weekdays.
        assert_eq!(weekdays(&plain) - weekdays(&ontario), 7);
    }

    proptest! {
        #[test]
        fn counts_match_brute_force(year in 1990i32..2040, picks in proptest::collection::vec(0u32..366, 0..12)) {
            let first = d(year, 1, 1);
            let holidays: BTreeSet<_> = picks.iter().map(|&o| first + Duration::days(i64::from(o))).collect();
            let counts = count_day_types(year, &holidays);
            let mut brute: BTreeMap<DayCell, u32> = BTreeMap::new();
            for date in first.iter_days().take_while(|x| x.year() == year) {
                *brute.entry(classify_day(date, &holidays)).or_default() += 1;
            }
            for ss in Season::ALL {
                for i in DayType::ALL {
                    prop_assert_eq!(counts.get(i, ss), brute.get(&DayCell { season: ss, day_type: i }).copied().unwrap_or(0));
                }
            }
            let expected = if NaiveDate::from_ymd_opt(year, 2, 29).is_some() { 366 } else { 365 };
            prop_assert_eq!(counts.total(), expected);
        }
    }

    #[test]
    fn demand_only_file_parses() {
        let mut text = String::from("date,hour,demand_mw\n");
        for h in 1..=24 {
            text.push_str(&format!("2017-06-01,{h},{}\n", 1000 + h));
        }
        let out = parse_hourly(text.as_bytes(), &Schema::demand()).unwrap();
        assert_eq!(out.records.len(), 24);
        assert_eq!(out.rows_read, 24);
        assert!(out.rejections.is_empty());
        assert_eq!(out.records[0].demand, Some(1001.0));
        assert!(out.records.iter().all(|r| r.output.iter().all(Option::is_none)));
    }

    #[test]
    fn bad_hour_is_rejected_with_line_number() {
        let text = "date,hour,demand_mw\n2017-06-01,1,5\n2017-06-01,25,5\n2017-06-01,2,5\n";
        let out = parse_hourly(text.as_bytes(), &Schema::demand()).unwrap();
        assert_eq!(out.records.len(), 2);
        assert_eq!(out.rejections.len(), 1);
        assert_eq!(out.rejections[0].line, 3);
        assert!(out.rejections[0].reason.contains("hour 25"));
    }

    #[test]
    fn duplicate_row_is_rejected() {
        let text = "date,hour,demand_mw\n2017-06-01,1,5\n2017-06-01,1,6\n";
        let out = parse_hourly(text.as_bytes(), &Schema::demand()).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.records[0].demand, Some(5.0));
        assert_eq!(out.rejections.len(), 1);
        assert!(out.rejections[0].reason.contains("duplicate"));
    }

    #[test]
    fn missing_header_column_is_fatal() {
        let text = "date,hr,demand_mw\n2017-06-01,1,5\n";
        assert!(matches!(
            parse_hourly(text.as_bytes(), &Schema::demand()),
            Err(IngestError::Header(_))
        ));
    }

    #[test]
    fn generation_rows_fold_into_one_record() {
        let text = "date,hour,tech,output_mw,capability_mw,installed_mw\n\
                    2017-06-01,24,nuclear,800,900,1000\n\
                    2017-06-01,24,gas,100,,2000\n\
                    2017-06-01,24,gas,100,,2000\n\
                    2017-06-01,23,wind,50,40,100\n";
        let out = parse_hourly(text.as_bytes(), &Schema::generation()).unwrap();
        assert_eq!(out.records.len(), 1);
        let r = &out.records[0];
        assert_eq!(r.output_of(TechKind::Nuclear), Some(800.0));
        assert_eq!(r.capability_of(TechKind::Gas), None);
        assert_eq!(r.installed_of(TechKind::Gas), Some(2000.0));
        assert_eq!(out.rejections.len(), 2);
        assert!(out.rejections[1].reason.contains("exceeds capability"));
    }

    #[test]
    fn holiday_file() {
        let text = "# statutory\n2017-01-01\n\n2017-07-01 # canada day\n";
        let h = read_holidays(text.as_bytes()).unwrap();
        assert_eq!(h.len(), 2);
        assert!(read_holidays("2017-13-01\n".as_bytes()).is_err());
    }
}
