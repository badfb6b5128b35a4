//! Long-format CSV interchange: a values table `instance,channel,time,value`
//! and a labels table `instance,label`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::MtsDataset;
use crate::error::{Error, Result};

const VALUE_COLUMNS: [&str; 4] = ["instance", "channel", "time", "value"];
const LABEL_COLUMNS: [&str; 2] = ["instance", "label"];

#[derive(Serialize, Deserialize)]
struct ValueRow {
    instance: usize,
    channel: usize,
    time: usize,
    value: f64,
}

#[derive(Serialize, Deserialize)]
struct LabelRow {
    instance: usize,
    label: String,
}

fn check_columns<R: std::io::Read>(rdr: &mut csv::Reader<R>, expected: &[&str]) -> Result<()> {
    let headers = rdr.headers()?;
    if headers.iter().ne(expected.iter().copied()) {
        return Err(Error::MalformedHeader {
            line: 1,
            msg: format!("expected columns {}", expected.join(",")),
        });
    }
    Ok(())
}

/// Renders `(values_csv, labels_csv)`.
pub fn write_csv(ds: &MtsDataset) -> Result<(String, String)> {
    let mut values = csv::Writer::from_writer(Vec::new());
    for n in 0..ds.n_instances() {
        for c in 0..ds.n_channels() {
            for (t, &value) in ds.series(n, c).iter().enumerate() {
                values.serialize(ValueRow { instance: n, channel: c, time: t, value })?;
            }
        }
    }
    let mut labels = csv::Writer::from_writer(Vec::new());
    for (n, &y) in ds.labels().iter().enumerate() {
        labels.serialize(LabelRow { instance: n, label: ds.label_names()[y].clone() })?;
    }
    let finish = |w: csv::Writer<Vec<u8>>| -> Result<String> {
        let bytes = w.into_inner().map_err(|e| Error::Csv(e.into_error().into()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    };
    Ok((finish(values)?, finish(labels)?))
}

/// Parses the two tables. Label ids follow first appearance in instance order.
pub fn read_csv(name: &str, values_csv: &str, labels_csv: &str) -> Result<MtsDataset> {
    let mut rdr = csv::Reader::from_reader(labels_csv.as_bytes());
    check_columns(&mut rdr, &LABEL_COLUMNS)?;
    let mut label_rows: Vec<LabelRow> = rdr.deserialize().collect::<Result<_, _>>()?;
    label_rows.sort_by_key(|r| r.instance);
    let n = label_rows.len();
    if label_rows.iter().enumerate().any(|(i, r)| r.instance != i) {
        return Err(Error::RaggedData("labels must cover instances 0..N exactly once".into()));
    }
    let mut label_names: Vec<String> = Vec::new();
    let mut labels = Vec::with_capacity(n);
    for r in label_rows {
        let y = match label_names.iter().position(|l| *l == r.label) {
            Some(y) => y,
            None => {
                label_names.push(r.label);
                label_names.len() - 1
            }
        };
        labels.push(y);
    }

    let mut rdr = csv::Reader::from_reader(values_csv.as_bytes());
    check_columns(&mut rdr, &VALUE_COLUMNS)?;
    let rows: Vec<ValueRow> = rdr.deserialize().collect::<Result<_, _>>()?;
    let c = rows.iter().map(|r| r.channel + 1).max().unwrap_or(0);
    let l = rows.iter().map(|r| r.time + 1).max().unwrap_or(0);
    if rows.len() != n * c * l {
        return Err(Error::RaggedData(format!(
            "{} value rows for {n} instances x {c} channels x {l} time points",
            rows.len()
        )));
    }
    let mut values = vec![f64::NAN; n * c * l];
    let mut filled = vec![false; n * c * l];
    for r in rows {
        if r.instance >= n {
            return Err(Error::RaggedData(format!("instance {} has no label", r.instance)));
        }
        let idx = (r.instance * c + r.channel) * l + r.time;
        if std::mem::replace(&mut filled[idx], true) {
            return Err(Error::RaggedData(format!(
                "duplicate cell ({}, {}, {})",
                r.instance, r.channel, r.time
            )));
        }
        values[idx] = r.value;
    }
    MtsDataset::new(name, (n, c, l), values, labels, label_names, None)
}

pub fn write_csv_files(
    ds: &MtsDataset,
    values_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
) -> Result<()> {
    let (values, labels) = write_csv(ds)?;
    let (vp, lp) = (values_path.as_ref(), labels_path.as_ref());
    std::fs::write(vp, values).map_err(|e| Error::io(vp, e))?;
    std::fs::write(lp, labels).map_err(|e| Error::io(lp, e))
}

pub fn read_csv_files(
    name: &str,
    values_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
) -> Result<MtsDataset> {
    let (vp, lp) = (values_path.as_ref(), labels_path.as_ref());
    let values = std::fs::read_to_string(vp).map_err(|e| Error::io(vp, e))?;
    let labels = std::fs::read_to_string(lp).map_err(|e| Error::io(lp, e))?;
    read_csv(name, &values, &labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> MtsDataset {
        MtsDataset::new(
            "csv",
            (3, 2, 2),
            vec![0.1, 0.2, 1.0, 2.0, -3.5, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 1e-9],
            vec![0, 1, 0],
            vec!["yes".into(), "no".into()],
            None,
        )
        .unwrap()
    }

    #[test]
    fn round_trip() {
        let ds = sample();
        let (v, l) = write_csv(&ds).unwrap();
        assert!(v.starts_with("instance,channel,time,value\n"));
        assert!(l.starts_with("instance,label\n0,yes\n"));
        assert_eq!(read_csv("csv", &v, &l).unwrap(), ds);
    }

    #[test]
    fn rejects_wrong_columns_and_gaps() {
        let ds = sample();
        let (v, l) = write_csv(&ds).unwrap();
        let renamed = v.replacen("value", "val", 1);
        assert!(matches!(read_csv("x", &renamed, &l), Err(Error::MalformedHeader { .. })));
        let truncated: String = v.lines().take(5).map(|s| format!("{s}\n")).collect();
        assert!(matches!(read_csv("x", &truncated, &l), Err(Error::RaggedData(_))));
    }

    #[test]
    fn files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let (vp, lp) = (dir.path().join("v.csv"), dir.path().join("l.csv"));
        write_csv_files(&sample(), &vp, &lp).unwrap();
        assert_eq!(read_csv_files("csv", &vp, &lp).unwrap(), sample());
    }
}
