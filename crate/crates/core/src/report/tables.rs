//! CSV tables. Every writer uses LF line endings and a fixed row order so
//! that identical inputs give identical bytes.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use crate::canon::{BookId, Testament};
use crate::error::NumericsError;
use crate::numerics::{ClusterAssignment, Dendrogram, Matrix};

use super::stats::{ClusterStats, FlowTable};

/// Shortest decimal form of `v` rounded to six significant digits.
pub fn format_value(v: f64) -> String {
    let rounded: f64 = format!("{v:.5e}").parse().unwrap_or(v);
    // normalize -0 so zero cells always print as "0"
    if rounded == 0.0 {
        "0".to_string()
    } else {
        rounded.to_string()
    }
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

fn csv_error(e: csv::Error) -> NumericsError {
    NumericsError::Csv(e.to_string())
}

fn read_rows<R: Read>(input: R, header: &[&str]) -> Result<Vec<csv::StringRecord>, NumericsError> {
    let mut rdr = csv::Reader::from_reader(input);
    let got = rdr.headers().map_err(csv_error)?;
    if !got.iter().eq(header.iter().copied()) {
        return Err(NumericsError::Csv(format!(
            "expected header {}",
            header.join(",")
        )));
    }
    rdr.records()
        .collect::<Result<Vec<_>, _>>()
        .map_err(csv_error)
}

/// NT × OT matrix with book names as row and column labels.
pub fn write_matrix_csv<W: Write>(m: &Matrix, out: W) -> std::io::Result<()> {
    let mut w = writer(out);
    let mut header = vec!["book"];
    header.extend(Testament::Old.names());
    w.write_record(&header)?;
    for (r, name) in Testament::New.names().iter().enumerate() {
        let mut row = vec![name.to_string()];
        row.extend(m.row(r).iter().map(|&v| format_value(v)));
        w.write_record(&row)?;
    }
    w.flush()
}

pub fn read_matrix_csv<R: Read>(input: R) -> Result<Matrix, NumericsError> {
    let mut header = vec!["book"];
    header.extend(Testament::Old.names());
    let records = read_rows(input, &header)?;
    let names = Testament::New.names();
    if records.len() != names.len() {
        return Err(NumericsError::Csv(format!(
            "expected {} rows, got {}",
            names.len(),
            records.len()
        )));
    }
    let mut rows = Vec::with_capacity(names.len());
    for (rec, name) in records.iter().zip(names) {
        if &rec[0] != *name {
            return Err(NumericsError::Csv(format!(
                "expected row {name:?}, got {:?}",
                &rec[0]
            )));
        }
        let row = rec
            .iter()
            .skip(1)
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| NumericsError::Csv(format!("bad number {f:?} in row {name}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Matrix::from_rows(&rows)
}

const CLUSTER_HEADER: [&str; 2] = ["book", "cluster"];

/// One row per canon book: `Genesis,OT3`.
pub fn write_clusters_csv<W: Write>(a: &ClusterAssignment, out: W) -> std::io::Result<()> {
    let mut w = writer(out);
    w.write_record(CLUSTER_HEADER)?;
    for b in a.testament.books() {
        w.write_record([b.name(), &a.label_name(a.label(b))])?;
    }
    w.flush()
}

pub fn read_clusters_csv<R: Read>(
    input: R,
    testament: Testament,
) -> Result<ClusterAssignment, NumericsError> {
    let records = read_rows(input, &CLUSTER_HEADER)?;
    let mut labels = vec![0; testament.book_count()];
    for rec in &records {
        let book = BookId::from_name(&rec[0])
            .filter(|b| b.testament() == testament)
            .ok_or_else(|| NumericsError::Csv(format!("unknown {testament} book {:?}", &rec[0])))?;
        let label = rec[1]
            .strip_prefix(testament.short())
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| NumericsError::Csv(format!("bad cluster label {:?}", &rec[1])))?;
        labels[book.canon_index()] = label;
    }
    ClusterAssignment::new(testament, labels)
}

pub const STATS_HEADER: [&str; 7] = [
    "cluster",
    "books",
    "word_count",
    "reference_words",
    "mean_reference_length",
    "references",
    "density",
];

pub fn write_cluster_stats_csv<W: Write>(stats: &[ClusterStats], out: W) -> std::io::Result<()> {
    let mut w = writer(out);
    w.write_record(STATS_HEADER)?;
    for s in stats {
        w.write_record([
            s.cluster.clone(),
            s.books.to_string(),
            s.word_count.to_string(),
            s.reference_words.to_string(),
            format_value(s.mean_reference_length),
            s.references.to_string(),
            format_value(s.density),
        ])?;
    }
    w.flush()
}

/// Long format: one row per (NT cluster, OT cluster) pair.
pub fn write_flows_csv<W: Write>(
    flows: &FlowTable,
    nt: &ClusterAssignment,
    ot: &ClusterAssignment,
    out: W,
) -> std::io::Result<()> {
    let mut w = writer(out);
    w.write_record(["nt_cluster", "ot_cluster", "references"])?;
    for x in 1..=flows.nt_k {
        for y in 1..=flows.ot_k {
            w.write_record([
                nt.label_name(x),
                ot.label_name(y),
                flows.get(x, y).to_string(),
            ])?;
        }
    }
    w.flush()
}

pub fn write_histogram_csv<W: Write>(h: &BTreeMap<usize, usize>, out: W) -> std::io::Result<()> {
    let mut w = writer(out);
    w.write_record(["length", "count"])?;
    for (len, count) in h {
        w.write_record([len.to_string(), count.to_string()])?;
    }
    w.flush()
}

/// Merge steps with the usual id convention (points `0..n`, step `s`
/// creates cluster `n + s`).
pub fn write_dendrogram_csv<W: Write>(d: &Dendrogram, out: W) -> std::io::Result<()> {
    let mut w = writer(out);
    w.write_record(["step", "left", "right", "height", "size"])?;
    for (i, m) in d.steps.iter().enumerate() {
        w.write_record([
            i.to_string(),
            m.left.to_string(),
            m.right.to_string(),
            format_value(m.height),
            m.size.to_string(),
        ])?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(format_value(0.0), "0");
        assert_eq!(format_value(-0.0), "0");
        assert_eq!(format_value(0.023), "0.023");
        assert_eq!(format_value(1.0 / 3.0), "0.333333");
        assert_eq!(format_value(-4.605170185988091), "-4.60517");
        assert_eq!(format_value(123456789.0), "123457000");
        assert_eq!(format_value(1.5e-7), "0.00000015");
    }

    #[test]
    fn matrix_round_trip() {
        let mut m = Matrix::zeros(27, 39);
        m.set(26, 18, 0.023);
        m.set(0, 0, 1.0 / 7.0);
        let mut buf = Vec::new();
        write_matrix_csv(&m, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("book,Genesis,Exodus,"));
        assert!(!text.contains('\r'));
        let back = read_matrix_csv(&buf[..]).unwrap();
        assert_eq!(back.get(26, 18), 0.023);
        assert_eq!(format_value(back.get(0, 0)), format_value(1.0 / 7.0));
        // a second round trip is exact
        let mut again = Vec::new();
        write_matrix_csv(&back, &mut again).unwrap();
        assert_eq!(again, buf);
    }

    #[test]
    fn matrix_rejects_bad_input() {
        assert!(read_matrix_csv("book,Genesis\nMatthew,1\n".as_bytes()).is_err());
        let mut buf = Vec::new();
        write_matrix_csv(&Matrix::zeros(27, 39), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap().replacen("Matthew,0", "Matthew,x", 1);
        assert!(read_matrix_csv(text.as_bytes()).is_err());
    }

    #[test]
    fn clusters_round_trip() {
        let labels = (0..27).map(|i| if i == 26 { 2 } else { 1 }).collect();
        let a = ClusterAssignment::new(Testament::New, labels).unwrap();
        let mut buf = Vec::new();
        write_clusters_csv(&a, &mut buf).unwrap();
        let text = std::str::from_utf8(&buf).unwrap();
        assert!(text.contains("Revelation,NT2\n"));
        assert_eq!(read_clusters_csv(&buf[..], Testament::New).unwrap(), a);
        assert!(read_clusters_csv(&buf[..], Testament::Old).is_err());
    }

    #[test]
    fn dendrogram_rows() {
        let d = Dendrogram {
            points: 3,
            steps: vec![
                crate::numerics::Merge { left: 0, right: 1, height: 1.0, size: 2 },
                crate::numerics::Merge { left: 2, right: 3, height: 2.5, size: 3 },
            ],
        };
        let mut buf = Vec::new();
        write_dendrogram_csv(&d, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "step,left,right,height,size\n0,0,1,1,2\n1,2,3,2.5,3\n"
        );
    }
}
