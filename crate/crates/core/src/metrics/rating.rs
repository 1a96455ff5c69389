use std::collections::BTreeMap;
use std::io::{Read, Write};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::rng;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingRecord {
    pub sentence_id: usize,
    pub rater_id: String,
    pub adequacy: u8,
    pub fluency: u8,
}

impl RatingRecord {
    fn validate(&self, row: usize) -> Result<()> {
        for (name, v) in [("adequacy", self.adequacy), ("fluency", self.fluency)] {
            if !(1..=5).contains(&v) {
                return Err(Error::InvalidRating { row, msg: format!("{name} {v} outside 1..5") });
            }
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct SheetRow<'a> {
    sentence_id: usize,
    rater_id: &'a str,
    source: &'a str,
    hypothesis: &'a str,
    adequacy: &'a str,
    fluency: &'a str,
}

/// Writes a blinded CSV rating sheet: rows shuffled under `seed`, no system
/// names, empty rater/adequacy/fluency columns for the rater.
pub fn make_rating_sheet<W: Write, S: AsRef<str>>(
    out: W,
    sources: &[S],
    hypotheses: &[S],
    seed: u64,
) -> Result<()> {
    if sources.len() != hypotheses.len() {
        return Err(Error::Misaligned { left: sources.len(), right: hypotheses.len() });
    }
    let mut order: Vec<usize> = (0..sources.len()).collect();
    order.shuffle(&mut rng(seed));
    let mut w = csv::Writer::from_writer(out);
    if order.is_empty() {
        w.write_record(["sentence_id", "rater_id", "source", "hypothesis", "adequacy", "fluency"])?;
    }
    for i in order {
        w.serialize(SheetRow {
            sentence_id: i + 1,
            rater_id: "",
            source: sources[i].as_ref(),
            hypothesis: hypotheses[i].as_ref(),
            adequacy: "",
            fluency: "",
        })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Deserialize)]
struct RawRating {
    sentence_id: usize,
    rater_id: String,
    adequacy: String,
    fluency: String,
}

/// Reads `sentence_id,rater_id,adequacy,fluency` records (extra columns are
/// ignored). Row numbers in errors count the header as row 1.
pub fn read_ratings<R: Read>(input: R) -> Result<Vec<RatingRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for (i, rec) in rdr.deserialize::<RawRating>().enumerate() {
        let row = i + 2;
        let raw = rec.map_err(|e| Error::InvalidRating { row, msg: e.to_string() })?;
        let parse = |name: &str, v: &str| -> Result<u8> {
            v.trim()
                .parse::<u8>()
                .map_err(|_| Error::InvalidRating { row, msg: format!("{name} `{v}` is not an integer in 1..5") })
        };
        let r = RatingRecord {
            sentence_id: raw.sentence_id,
            adequacy: parse("adequacy", &raw.adequacy)?,
            fluency: parse("fluency", &raw.fluency)?,
            rater_id: raw.rater_id,
        };
        r.validate(row)?;
        out.push(r);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RaterMeans {
    pub rater_id: String,
    pub count: usize,
    pub adequacy: f64,
    pub fluency: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatingSummary {
    pub per_rater: Vec<RaterMeans>,
    /// Mean of the per-rater means.
    pub avg_adequacy: f64,
    pub avg_fluency: f64,
}

pub fn aggregate_ratings(records: &[RatingRecord]) -> Result<RatingSummary> {
    if records.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut by_rater: BTreeMap<&str, (usize, u64, u64)> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        r.validate(i + 1)?;
        let e = by_rater.entry(&r.rater_id).or_default();
        e.0 += 1;
        e.1 += r.adequacy as u64;
        e.2 += r.fluency as u64;
    }
    let per_rater: Vec<RaterMeans> = by_rater
        .into_iter()
        .map(|(id, (n, a, f))| RaterMeans {
            rater_id: id.to_string(),
            count: n,
            adequacy: a as f64 / n as f64,
            fluency: f as f64 / n as f64,
        })
        .collect();
    let k = per_rater.len() as f64;
    Ok(RatingSummary {
        avg_adequacy: per_rater.iter().map(|r| r.adequacy).sum::<f64>() / k,
        avg_fluency: per_rater.iter().map(|r| r.fluency).sum::<f64>() / k,
        per_rater,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: usize, rater: &str, a: u8, f: u8) -> RatingRecord {
        RatingRecord { sentence_id: id, rater_id: rater.into(), adequacy: a, fluency: f }
    }

    #[test]
    fn sheet_has_header_and_blank_rating_columns() {
        let mut buf = Vec::new();
        make_rating_sheet(&mut buf, &["s1", "s2", "s3"], &["h1", "h2", "h3"], 4).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "sentence_id,rater_id,source,hypothesis,adequacy,fluency");
        assert!(lines[1..].iter().all(|l| l.ends_with(",,") && l.contains(",,")));
    }

    #[test]
    fn sheet_order_is_seeded() {
        let src: Vec<String> = (0..20).map(|i| format!("s{i}")).collect();
        let sheet = |seed| {
            let mut b = Vec::new();
            make_rating_sheet(&mut b, &src, &src, seed).unwrap();
            b
        };
        assert_eq!(sheet(9), sheet(9));
        assert_ne!(sheet(9), sheet(10));
    }

    #[test]
    fn sheet_rejects_misaligned() {
        assert!(make_rating_sheet(Vec::new(), &["a"], &["b", "c"], 0).is_err());
    }

    #[test]
    fn grand_mean_is_mean_of_rater_means() {
        // 50 ratings per rater: fluency sums 99 and 113 -> means 1.98 and 2.26.
        let mut records = Vec::new();
        for i in 0..50 {
            records.push(rec(i, "r1", 3, if i < 49 { 2 } else { 1 }));
            records.push(rec(i, "r2", 3, if i < 13 { 3 } else { 2 }));
        }
        let s = aggregate_ratings(&records).unwrap();
        assert!((s.per_rater[0].fluency - 1.98).abs() < 1e-12);
        assert!((s.per_rater[1].fluency - 2.26).abs() < 1e-12);
        assert!((s.avg_fluency - 2.12).abs() < 1e-12);
    }

    #[test]
    fn single_rater_average() {
        let s = aggregate_ratings(&[rec(1, "a", 4, 2), rec(2, "a", 5, 3)]).unwrap();
        assert_eq!((s.avg_adequacy, s.avg_fluency), (4.5, 2.5));
    }

    #[test]
    fn out_of_range_names_row() {
        let csv = "sentence_id,rater_id,adequacy,fluency\n1,a,4,4\n2,a,6,3\n";
        match read_ratings(csv.as_bytes()) {
            Err(Error::InvalidRating { row, .. }) => assert_eq!(row, 3),
            other => panic!("{other:?}"),
        }
    }
}
