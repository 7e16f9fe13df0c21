// SPDX-License-Identifier: Apache-2.0

//! Text formats.
//!
//! * Edge list: one edge per line, two whitespace-separated vertex ids;
//!   blank lines and lines starting with `#` are skipped.
//! * Labels: CSV with header `vertex,label`, label `0` (benign) or `1` (fraud).
//! * Metadata: CSV with header `vertex,f1,...,fd`.
//!
//! Vertex order follows the label file.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{GraphError, GraphResult, LabeledGraph, Metadata};

/// Parses an edge list into id pairs. Self-loops are rejected with their
/// 1-based line number.
pub fn parse_edge_list<R: Read>(reader: R) -> GraphResult<Vec<(String, String)>> {
    let mut edges = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(GraphError::Parse {
                line: lineno,
                message: format!("expected two vertex ids, got `{trimmed}`"),
            });
        };
        if a == b {
            return Err(GraphError::SelfLoop {
                line: lineno,
                vertex: a.to_string(),
            });
        }
        edges.push((a.to_string(), b.to_string()));
    }
    Ok(edges)
}

fn check_header(headers: &csv::StringRecord, expected_first: &[&str]) -> GraphResult<()> {
    let ok = expected_first
        .iter()
        .enumerate()
        .all(|(i, name)| headers.get(i).map(str::trim) == Some(*name));
    if ok {
        Ok(())
    } else {
        Err(GraphError::Parse {
            line: 1,
            message: format!(
                "expected header starting with `{}`, got `{}`",
                expected_first.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        })
    }
}

fn record_line(record: &csv::StringRecord) -> usize {
    record.position().map_or(0, |p| p.line() as usize)
}

/// Parses a `vertex,label` CSV. Returns `(id, is_fraud)` in file order.
pub fn parse_labels<R: Read>(reader: R) -> GraphResult<Vec<(String, bool)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    check_header(rdr.headers()?, &["vertex", "label"])?;
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record_line(&record);
        if record.len() != 2 {
            return Err(GraphError::Parse {
                line,
                message: format!("expected 2 fields, got {}", record.len()),
            });
        }
        let fraud = match &record[1] {
            "0" => false,
            "1" => true,
            other => {
                return Err(GraphError::Parse {
                    line,
                    message: format!("label must be 0 or 1, got `{other}`"),
                })
            }
        };
        out.push((record[0].to_string(), fraud));
    }
    Ok(out)
}

/// Parses a `vertex,f1,...,fd` CSV into `(id, features)` rows.
pub fn parse_metadata<R: Read>(reader: R) -> GraphResult<Vec<(String, Vec<f64>)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    check_header(&headers, &["vertex"])?;
    let dim = headers.len() - 1;
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record_line(&record);
        if record.len() != dim + 1 {
            return Err(GraphError::Parse {
                line,
                message: format!("expected {} fields, got {}", dim + 1, record.len()),
            });
        }
        let features = record
            .iter()
            .skip(1)
            .map(|f| {
                f.parse::<f64>().map_err(|e| GraphError::Parse {
                    line,
                    message: format!("bad feature `{f}`: {e}"),
                })
            })
            .collect::<GraphResult<Vec<f64>>>()?;
        out.push((record[0].to_string(), features));
    }
    Ok(out)
}

/// Assembles a graph from the three text sources.
pub fn read_graph<E: Read, L: Read, M: Read>(
    edges: E,
    labels: L,
    metadata: Option<M>,
) -> GraphResult<LabeledGraph> {
    let labels = parse_labels(labels)?;
    let mut index = HashMap::with_capacity(labels.len());
    for (i, (id, _)) in labels.iter().enumerate() {
        if index.insert(id.clone(), i).is_some() {
            return Err(GraphError::DuplicateVertex(id.clone()));
        }
    }
    let edge_ids = parse_edge_list(edges)?;
    let mut edges = Vec::with_capacity(edge_ids.len());
    for (a, b) in &edge_ids {
        let u = *index
            .get(a)
            .ok_or_else(|| GraphError::MissingLabel(a.clone()))?;
        let v = *index
            .get(b)
            .ok_or_else(|| GraphError::MissingLabel(b.clone()))?;
        edges.push((u, v));
    }
    let metadata = match metadata {
        None => None,
        Some(reader) => {
            let rows = parse_metadata(reader)?;
            let dim = rows.first().map_or(0, |(_, f)| f.len());
            let mut table: Vec<Option<Vec<f64>>> = vec![None; labels.len()];
            for (id, features) in rows {
                let v = *index
                    .get(&id)
                    .ok_or_else(|| GraphError::Metadata(format!("unlabeled vertex `{id}`")))?;
                if table[v].replace(features).is_some() {
                    return Err(GraphError::Metadata(format!("duplicate row for `{id}`")));
                }
            }
            let mut values = Vec::with_capacity(dim * labels.len());
            for (v, row) in table.into_iter().enumerate() {
                let row = row.ok_or_else(|| {
                    GraphError::Metadata(format!("no metadata for `{}`", labels[v].0))
                })?;
                values.extend(row);
            }
            Some(Metadata::new(dim, values)?)
        }
    };
    let (ids, fraud) = labels.into_iter().unzip();
    LabeledGraph::new(ids, fraud, edges, metadata)
}

/// Loads a graph from files on disk.
pub fn load_graph(
    edges: &Path,
    labels: &Path,
    metadata: Option<&Path>,
) -> GraphResult<LabeledGraph> {
    let meta = metadata.map(File::open).transpose()?;
    read_graph(File::open(edges)?, File::open(labels)?, meta)
}

/// Writes the edge list, label file and (if present and requested) metadata
/// file for `graph`.
pub fn write_graph(
    graph: &LabeledGraph,
    edges: &Path,
    labels: &Path,
    metadata: Option<&Path>,
) -> GraphResult<()> {
    let mut out = BufWriter::new(File::create(edges)?);
    for (u, v) in graph.edges() {
        writeln!(out, "{} {}", graph.id(u), graph.id(v))?;
    }
    out.flush()?;

    let mut out = BufWriter::new(File::create(labels)?);
    writeln!(out, "vertex,label")?;
    for v in 0..graph.len() {
        writeln!(out, "{},{}", graph.id(v), u8::from(graph.is_fraud(v)))?;
    }
    out.flush()?;

    if let (Some(path), Some(meta)) = (metadata, graph.metadata()) {
        let mut out = BufWriter::new(File::create(path)?);
        let header: Vec<String> = (1..=meta.dim()).map(|i| format!("f{i}")).collect();
        writeln!(out, "vertex,{}", header.join(","))?;
        for v in 0..graph.len() {
            let row: Vec<String> = meta.row(v).iter().map(|x| format!("{x:?}")).collect();
            writeln!(out, "{},{}", graph.id(v), row.join(","))?;
        }
        out.flush()?;
    }
    Ok(())
}
