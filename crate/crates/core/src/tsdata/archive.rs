//! The `.ts` text archive format.
//!
//! ```text
//! # comment
//! #channel 0 accel_x          (optional, one per channel)
//! @problemName Toy
//! @dimensions 2
//! @equalLength true
//! @seriesLength 2
//! @classLabel true A B
//! @data
//! 1.0,2.0:3.0,4.0:A
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::MtsDataset;
use crate::error::{Error, Result};

#[derive(Default)]
struct Header {
    problem_name: Option<String>,
    dimensions: Option<usize>,
    equal_length: Option<bool>,
    series_length: Option<usize>,
    class_labels: Option<Vec<String>>,
    timestamps: Option<bool>,
    univariate: Option<bool>,
    missing: Option<bool>,
    channel_names: Vec<(usize, String)>,
}

fn malformed(line: usize, msg: impl Into<String>) -> Error {
    Error::MalformedHeader { line, msg: msg.into() }
}

fn set_once<T>(slot: &mut Option<T>, value: T, tag: &str, line: usize) -> Result<()> {
    if slot.is_some() {
        return Err(malformed(line, format!("duplicated {tag}")));
    }
    *slot = Some(value);
    Ok(())
}

fn parse_usize(tok: Option<&str>, tag: &str, line: usize) -> Result<usize> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| malformed(line, format!("{tag} needs a non-negative integer")))
}

fn parse_bool(tok: Option<&str>, tag: &str, line: usize) -> Result<bool> {
    match tok.map(str::to_ascii_lowercase).as_deref() {
        Some("true") => Ok(true),
        Some("false") => Ok(false),
        _ => Err(malformed(line, format!("{tag} needs true or false"))),
    }
}

fn parse_header_line(header: &mut Header, text: &str, line: usize) -> Result<bool> {
    let mut toks = text.split_whitespace();
    let tag = toks.next().unwrap_or_default().to_ascii_lowercase();
    match tag.as_str() {
        "@problemname" => {
            let name = toks
                .next()
                .ok_or_else(|| malformed(line, "@problemName needs a name"))?;
            set_once(&mut header.problem_name, name.to_string(), "@problemName", line)?;
        }
        "@dimensions" => {
            let d = parse_usize(toks.next(), "@dimensions", line)?;
            set_once(&mut header.dimensions, d, "@dimensions", line)?;
        }
        "@equallength" => {
            let b = parse_bool(toks.next(), "@equalLength", line)?;
            set_once(&mut header.equal_length, b, "@equalLength", line)?;
        }
        "@serieslength" => {
            let l = parse_usize(toks.next(), "@seriesLength", line)?;
            set_once(&mut header.series_length, l, "@seriesLength", line)?;
        }
        "@classlabel" => {
            if !parse_bool(toks.next(), "@classLabel", line)? {
                return Err(malformed(line, "unlabelled data is not supported"));
            }
            let labels: Vec<String> = toks.map(str::to_string).collect();
            if labels.is_empty() {
                return Err(malformed(line, "@classLabel declares no labels"));
            }
            set_once(&mut header.class_labels, labels, "@classLabel", line)?;
        }
        // Accepted for compatibility with published archive files.
        "@timestamps" => {
            let b = parse_bool(toks.next(), "@timeStamps", line)?;
            set_once(&mut header.timestamps, b, "@timeStamps", line)?;
        }
        "@univariate" => {
            let b = parse_bool(toks.next(), "@univariate", line)?;
            set_once(&mut header.univariate, b, "@univariate", line)?;
        }
        "@missing" => {
            let b = parse_bool(toks.next(), "@missing", line)?;
            set_once(&mut header.missing, b, "@missing", line)?;
        }
        "@data" => return Ok(true),
        _ => return Err(malformed(line, format!("unknown header tag {tag:?}"))),
    }
    Ok(false)
}

fn parse_channel_comment(header: &mut Header, text: &str, line: usize) -> Result<()> {
    let mut toks = text.split_whitespace();
    if toks.next() != Some("#channel") {
        return Ok(());
    }
    let idx = parse_usize(toks.next(), "#channel", line)?;
    let name = toks
        .next()
        .ok_or_else(|| malformed(line, "#channel needs an index and a name"))?;
    header.channel_names.push((idx, name.to_string()));
    Ok(())
}

fn parse_value(tok: &str, line: usize) -> Result<f64> {
    let tok = tok.trim();
    if tok == "?" {
        return Err(Error::MissingValue { line });
    }
    let v: f64 = tok.parse().map_err(|_| Error::MalformedValue {
        line,
        token: tok.to_string(),
    })?;
    if !v.is_finite() {
        return Err(Error::NonFiniteValue(format!("line {line}: {tok}")));
    }
    Ok(v)
}

/// Parses archive text. `fallback_name` is used when `@problemName` is absent.
pub fn parse_archive(text: &str, fallback_name: &str) -> Result<MtsDataset> {
    let mut header = Header::default();
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let mut saw_data = false;
    for (line, text) in lines.by_ref() {
        if text.is_empty() {
            continue;
        }
        if text.starts_with('#') {
            parse_channel_comment(&mut header, text, line)?;
            continue;
        }
        if !text.starts_with('@') {
            return Err(malformed(line, "data before @data"));
        }
        if parse_header_line(&mut header, text, line)? {
            saw_data = true;
            break;
        }
    }
    if !saw_data {
        return Err(malformed(0, "missing @data"));
    }
    let label_names = header
        .class_labels
        .take()
        .ok_or_else(|| malformed(0, "missing @classLabel"))?;
    if header.equal_length == Some(false) {
        return Err(Error::RaggedData("unequal-length series are not supported".into()));
    }
    if header.timestamps == Some(true) {
        return Err(malformed(0, "timestamped series are not supported"));
    }

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut shape: Option<(usize, usize)> = header.dimensions.zip(header.series_length);
    let mut channels = header.dimensions;
    let mut length = header.series_length;
    for (line, text) in lines {
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = text.split(':').collect();
        if fields.len() < 2 {
            return Err(Error::RaggedData(format!("line {line}: no label field")));
        }
        let (label, chans) = fields.split_last().unwrap();
        let label = label.trim();
        let y = label_names
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel { line, label: label.to_string() })?;
        match channels {
            Some(c) if c != chans.len() => {
                return Err(Error::RaggedData(format!(
                    "line {line}: {} channels, expected {c}",
                    chans.len()
                )))
            }
            None => channels = Some(chans.len()),
            _ => {}
        }
        for chan in chans {
            let start = values.len();
            for tok in chan.split(',') {
                values.push(parse_value(tok, line)?);
            }
            let got = values.len() - start;
            match length {
                Some(l) if l != got => {
                    return Err(Error::RaggedData(format!(
                        "line {line}: channel of length {got}, expected {l}"
                    )))
                }
                None => length = Some(got),
                _ => {}
            }
        }
        labels.push(y);
        shape = channels.zip(length);
    }
    let (c, l) = shape.ok_or_else(|| Error::InvalidDataset("no instances after @data".into()))?;
    if labels.is_empty() {
        return Err(Error::InvalidDataset("no instances after @data".into()));
    }

    let channel_names = if header.channel_names.is_empty() {
        None
    } else {
        let mut names: Vec<Option<String>> = vec![None; c];
        for (idx, name) in header.channel_names {
            let slot = names
                .get_mut(idx)
                .ok_or_else(|| malformed(0, format!("#channel index {idx} out of range")))?;
            if slot.replace(name).is_some() {
                return Err(malformed(0, format!("#channel {idx} named twice")));
            }
        }
        Some(
            names
                .into_iter()
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| malformed(0, "#channel names must cover every channel"))?,
        )
    };
    let name = header.problem_name.unwrap_or_else(|| fallback_name.to_string());
    MtsDataset::new(name, (labels.len(), c, l), values, labels, label_names, channel_names)
}

/// Reads and parses an archive file; the file stem names unnamed problems.
pub fn parse_archive_file(path: impl AsRef<Path>) -> Result<MtsDataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let stem: String = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("unnamed")
        .chars()
        .map(|ch| if ch.is_whitespace() || ch == ':' || ch == ',' { '_' } else { ch })
        .collect();
    parse_archive(&text, if stem.is_empty() { "unnamed" } else { &stem })
}

/// Renders a dataset in archive format. Values use the shortest decimal
/// representation that parses back to the same `f64`.
pub fn write_archive(ds: &MtsDataset) -> String {
    let mut out = String::new();
    if let Some(names) = ds.channel_names() {
        for (i, name) in names.iter().enumerate() {
            let _ = writeln!(out, "#channel {i} {name}");
        }
    }
    let _ = writeln!(out, "@problemName {}", ds.name());
    let _ = writeln!(out, "@dimensions {}", ds.n_channels());
    let _ = writeln!(out, "@equalLength true");
    let _ = writeln!(out, "@seriesLength {}", ds.length());
    let _ = writeln!(out, "@classLabel true {}", ds.label_names().join(" "));
    out.push_str("@data\n");
    for n in 0..ds.n_instances() {
        for c in 0..ds.n_channels() {
            for (t, v) in ds.series(n, c).iter().enumerate() {
                if t > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{v:?}");
            }
            out.push(':');
        }
        out.push_str(&ds.label_names()[ds.labels()[n]]);
        out.push('\n');
    }
    out
}

pub fn write_archive_file(ds: &MtsDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_archive(ds)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const HEAD: &str = "@problemName Toy\n@dimensions 2\n@equalLength true\n\
                        @seriesLength 2\n@classLabel true A B\n@data\n";

    #[test]
    fn minimal_file() {
        let ds = parse_archive(&format!("{HEAD}1,2:3,4:A\n"), "x").unwrap();
        assert_eq!(
            (ds.n_instances(), ds.n_channels(), ds.length()),
            (1, 2, 2)
        );
        assert_eq!(ds.label_names()[ds.labels()[0]], "A");
        assert_eq!(ds.series(0, 1), &[3.0, 4.0]);
        assert_eq!(ds.name(), "Toy");
    }

    #[test]
    fn ragged_channel() {
        let err = parse_archive(&format!("{HEAD}1,2:3:A\n"), "x").unwrap_err();
        assert!(matches!(err, Error::RaggedData(_)), "{err}");
    }

    #[test]
    fn dimension_mismatch_is_ragged() {
        let err = parse_archive(&format!("{HEAD}1,2:3,4:5,6:A\n"), "x").unwrap_err();
        assert!(matches!(err, Error::RaggedData(_)));
    }

    #[test]
    fn header_errors() {
        let dup = "@problemName a\n@problemName b\n@classLabel true A B\n@data\n1:A\n";
        assert!(matches!(parse_archive(dup, "x"), Err(Error::MalformedHeader { line: 2, .. })));
        let no_labels = "@problemName a\n@data\n1:A\n";
        assert!(matches!(parse_archive(no_labels, "x"), Err(Error::MalformedHeader { .. })));
        let no_data = "@classLabel true A B\n";
        assert!(matches!(parse_archive(no_data, "x"), Err(Error::MalformedHeader { .. })));
        let unknown = "@frobnicate 3\n@classLabel true A B\n@data\n1:A\n";
        assert!(matches!(parse_archive(unknown, "x"), Err(Error::MalformedHeader { .. })));
    }

    #[test]
    fn value_errors() {
        let head = "@classLabel true A B\n@data\n";
        assert!(matches!(
            parse_archive(&format!("{head}1,?:A\n"), "x"),
            Err(Error::MissingValue { line: 3 })
        ));
        assert!(matches!(
            parse_archive(&format!("{head}1,NaN:A\n"), "x"),
            Err(Error::NonFiniteValue(_))
        ));
        assert!(matches!(
            parse_archive(&format!("{head}1,inf:B\n"), "x"),
            Err(Error::NonFiniteValue(_))
        ));
        assert!(matches!(
            parse_archive(&format!("{head}1,2:C\n"), "x"),
            Err(Error::UnknownLabel { line: 3, .. })
        ));
        assert!(matches!(
            parse_archive("@equalLength false\n@classLabel true A B\n@data\n1:A\n", "x"),
            Err(Error::RaggedData(_))
        ));
    }

    #[test]
    fn accepts_published_header_tags() {
        let text = "# comment\n@problemName P\n@timeStamps false\n@missing false\n\
                    @univariate false\n@dimensions 1\n@equalLength true\n@seriesLength 3\n\
                    @classLabel true 1 2\n@data\n0.5,1,2:2\n";
        let ds = parse_archive(text, "x").unwrap();
        assert_eq!(ds.labels(), &[1]);
    }

    #[test]
    fn labels_follow_declaration_order() {
        let text = "@classLabel true B A\n@data\n1:A\n2:B\n";
        let ds = parse_archive(text, "x").unwrap();
        assert_eq!(ds.labels(), &[1, 0]);
    }

    #[test]
    fn writes_expected_lines() {
        let ds = MtsDataset::new(
            "w",
            (1, 1, 3),
            vec![1.5, 2.0, 2.5],
            vec![0],
            vec!["A".into(), "B".into()],
            None,
        )
        .unwrap();
        let text = write_archive(&ds);
        assert!(text.lines().any(|l| l == "1.5,2.0,2.5:A"));
        assert!(!text.contains("#channel"));
        assert!(text.contains("@classLabel true A B\n"));
    }

    #[test]
    fn channel_names_round_trip() {
        let ds = MtsDataset::new(
            "w",
            (1, 2, 1),
            vec![1.0, 2.0],
            vec![1],
            vec!["A".into(), "B".into()],
            Some(vec!["x".into(), "y".into()]),
        )
        .unwrap();
        let text = write_archive(&ds);
        assert!(text.starts_with("#channel 0 x\n#channel 1 y\n"));
        assert_eq!(parse_archive(&text, "z").unwrap(), ds);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("My Set.ts");
        let text = "@classLabel true A B\n@data\n1:A\n2:B\n";
        std::fs::write(&path, text).unwrap();
        let ds = parse_archive_file(&path).unwrap();
        assert_eq!(ds.name(), "My_Set");
        let out = dir.path().join("out.ts");
        write_archive_file(&ds, &out).unwrap();
        assert_eq!(parse_archive_file(&out).unwrap(), ds);
        assert!(matches!(
            parse_archive_file(dir.path().join("missing.ts")),
            Err(Error::Io { .. })
        ));
    }

    fn arb_dataset() -> impl Strategy<Value = MtsDataset> {
        (1usize..6, 1usize..4, 1usize..6, 2usize..4).prop_flat_map(|(n, c, l, k)| {
            (
                prop::collection::vec(
                    prop_oneof![
                        any::<f64>().prop_filter("finite", |v| v.is_finite()),
                        -1e3f64..1e3,
                    ],
                    n * c * l,
                ),
                prop::collection::vec(0..k, n),
            )
                .prop_map(move |(values, labels)| {
                    let names = (0..k).map(|i| format!("L{i}")).collect();
                    MtsDataset::new("rt", (n, c, l), values, labels, names, None).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn write_then_parse_is_identity(ds in arb_dataset()) {
            let back = parse_archive(&write_archive(&ds), "other").unwrap();
            prop_assert_eq!(back, ds);
        }
    }
}
