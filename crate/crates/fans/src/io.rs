//! File formats: edge lists, dense CSV matrices, covariate tables and ROC curves.
//!
//! Every writer takes a list of header lines, emitted as `#` comments, so
//! results carry the configuration that produced them. Every reader skips
//! `#` lines.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use fans_core::evaluation::RocCurve;
use fans_core::{AdjacencyMatrix, FeatureMatrix, ProbabilityMatrix};

use crate::error::{FansError, Result};

/// Whether node indices in an edge list start at 0 or 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IndexBase {
    #[default]
    Zero,
    One,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| FansError::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| FansError::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| FansError::io(path, e))
}

fn write_header(w: &mut impl Write, header: &[String]) -> std::io::Result<()> {
    for line in header {
        writeln!(w, "# {line}")?;
    }
    Ok(())
}

/// Reads an edge list from `reader`; `source` is only used in error messages.
///
/// Each data line holds two node indices separated by whitespace or a comma.
/// Blank lines and `#` comments are skipped. Directed input is symmetrized,
/// self-loops are dropped and repeated edges collapse. Without `n`, the node
/// count comes from a `# nodes = N` comment if present, else the largest index.
pub fn parse_edge_list(reader: impl BufRead, source: &Path, n: Option<usize>, base: IndexBase) -> Result<AdjacencyMatrix> {
    let offset = usize::from(base == IndexBase::One);
    let mut declared = None;
    let mut edges = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let lineno = k + 1;
        let line = line.map_err(|e| FansError::io(source, e))?;
        let line = line.trim();
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(v) = comment.trim().strip_prefix("nodes").and_then(|r| r.trim().strip_prefix('=')) {
                declared = v.trim().parse::<usize>().ok();
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
        if fields.len() != 2 {
            return Err(FansError::parse(source, lineno, format!("expected two node indices, found {}", fields.len())));
        }
        let mut ends = [0usize; 2];
        for (slot, field) in ends.iter_mut().zip(&fields) {
            let raw: usize = field
                .parse()
                .map_err(|_| FansError::parse(source, lineno, format!("'{field}' is not a node index")))?;
            *slot = raw
                .checked_sub(offset)
                .ok_or_else(|| FansError::parse(source, lineno, "index 0 in a 1-based edge list"))?;
        }
        edges.push((lineno, ends[0], ends[1]));
    }
    let n = match n.or(declared) {
        Some(n) => n,
        None => edges.iter().map(|&(_, i, j)| i.max(j) + 1).max().unwrap_or(0),
    };
    if let Some(&(lineno, i, j)) = edges.iter().find(|&&(_, i, j)| i.max(j) >= n) {
        let bad = i.max(j) + offset;
        return Err(FansError::parse(source, lineno, format!("node {bad} out of range for {n} nodes")));
    }
    Ok(AdjacencyMatrix::from_edges(n, edges.into_iter().map(|(_, i, j)| (i, j)))?)
}

pub fn load_edge_list(path: impl AsRef<Path>, n: Option<usize>, base: IndexBase) -> Result<AdjacencyMatrix> {
    let path = path.as_ref();
    parse_edge_list(open(path)?, path, n, base)
}

/// Writes each undirected edge once, 0-based, with a `# nodes = N` line.
pub fn write_edge_list(path: impl AsRef<Path>, a: &AdjacencyMatrix, header: &[String]) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let mut body = || -> std::io::Result<()> {
        write_header(&mut w, header)?;
        writeln!(w, "# nodes = {}", a.n())?;
        for (i, j) in a.edges() {
            writeln!(w, "{i} {j}")?;
        }
        w.flush()
    };
    body().map_err(|e| FansError::io(path, e))
}

/// Writes a row-major `rows × cols` matrix as headerless CSV.
///
/// Values use the shortest representation that parses back to the same `f64`.
pub fn write_dense(path: impl AsRef<Path>, cols: usize, data: &[f64], header: &[String]) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let mut body = || -> std::io::Result<()> {
        write_header(&mut w, header)?;
        for row in data.chunks(cols.max(1)) {
            let line: Vec<String> = row.iter().map(f64::to_string).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        w.flush()
    };
    body().map_err(|e| FansError::io(path, e))
}

/// Reads a headerless numeric CSV, returning `(rows, cols, row-major data)`.
pub fn read_dense(path: impl AsRef<Path>) -> Result<(usize, usize, Vec<f64>)> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(open(path)?);
    let (mut rows, mut cols, mut data) = (0, None, Vec::new());
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if *cols.get_or_insert(record.len()) != record.len() {
            return Err(FansError::parse(path, line, format!("expected {} fields, found {}", cols.unwrap_or(0), record.len())));
        }
        for field in &record {
            let v = f64::from_str(field).map_err(|_| FansError::parse(path, line, format!("'{field}' is not a number")))?;
            data.push(v);
        }
        rows += 1;
    }
    Ok((rows, cols.unwrap_or(0), data))
}

pub fn write_probability_matrix(path: impl AsRef<Path>, p: &ProbabilityMatrix, header: &[String]) -> Result<()> {
    write_dense(path, p.n(), p.as_slice(), header)
}

pub fn read_probability_matrix(path: impl AsRef<Path>) -> Result<ProbabilityMatrix> {
    let path = path.as_ref();
    let (rows, cols, data) = read_dense(path)?;
    if rows != cols {
        return Err(FansError::parse(path, 0, format!("matrix is {rows} × {cols}, expected square")));
    }
    Ok(ProbabilityMatrix::new(rows, data)?)
}

pub fn write_feature_matrix(path: impl AsRef<Path>, x: &FeatureMatrix, header: &[String]) -> Result<()> {
    write_dense(path, x.p(), x.as_slice(), header)
}

pub fn read_feature_matrix(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    let (rows, cols, data) = read_dense(path)?;
    Ok(FeatureMatrix::new(rows, cols, data)?)
}

/// Writes the curve as `fpr,tpr` rows, with the AUC in the header comments.
pub fn write_roc(path: impl AsRef<Path>, roc: &RocCurve, header: &[String]) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let mut body = || -> std::io::Result<()> {
        write_header(&mut w, header)?;
        writeln!(w, "# auc = {}", roc.auc)?;
        writeln!(w, "fpr,tpr")?;
        for (fpr, tpr) in &roc.points {
            writeln!(w, "{fpr},{tpr}")?;
        }
        w.flush()
    };
    body().map_err(|e| FansError::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    /// Ordered levels coded as numbers, kept as one column.
    Ordinal,
    /// Unordered levels, expanded to one 0/1 column per observed level.
    Categorical,
    Numeric,
}

impl FromStr for ColumnKind {
    type Err = FansError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ordinal" => Ok(ColumnKind::Ordinal),
            "categorical" => Ok(ColumnKind::Categorical),
            "numeric" => Ok(ColumnKind::Numeric),
            other => Err(FansError::Config(format!("unknown column kind '{other}'"))),
        }
    }
}

/// Which table columns to use and how to encode them.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CovariateSchema {
    pub columns: Vec<(String, ColumnKind)>,
    /// Replace missing values by the column mean instead of failing.
    pub impute_missing: bool,
}

impl CovariateSchema {
    /// Parses `name:kind` entries, e.g. `grade:ordinal`.
    pub fn parse(entries: &[String], impute_missing: bool) -> Result<Self> {
        let columns = entries
            .iter()
            .map(|e| {
                let (name, kind) = e
                    .rsplit_once(':')
                    .ok_or_else(|| FansError::Config(format!("column entry '{e}' is not name:kind")))?;
                Ok((name.trim().to_string(), kind.parse()?))
            })
            .collect::<Result<_>>()?;
        Ok(Self { columns, impute_missing })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Covariates {
    pub features: FeatureMatrix,
    /// One name per output column; indicator columns are named `column=level`.
    pub names: Vec<String>,
    /// Output columns with a single value across all rows; screening will drop them.
    pub constant: Vec<usize>,
}

fn is_missing(field: &str) -> bool {
    matches!(field, "" | "NA" | "na" | "N/A" | "." | "?")
}

/// Reads a delimited table with a header row and encodes the schema columns.
///
/// Columns not named in the schema are ignored. Output columns follow schema
/// order; categorical levels appear in sorted order.
pub fn load_covariates(path: impl AsRef<Path>, schema: &CovariateSchema) -> Result<Covariates> {
    let path = path.as_ref();
    if schema.columns.is_empty() {
        return Err(FansError::Config("covariate schema names no columns".into()));
    }
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(open(path)?);
    let headers = reader.headers()?.clone();
    let positions: Vec<usize> = schema
        .columns
        .iter()
        .map(|(name, _)| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| FansError::Config(format!("column '{name}' not found in {}", path.display())))
        })
        .collect::<Result<_>>()?;

    let mut raw: Vec<Vec<Option<String>>> = vec![Vec::new(); positions.len()];
    let mut lines = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        for (c, &pos) in positions.iter().enumerate() {
            let field = record.get(pos).unwrap_or("");
            if is_missing(field) && !schema.impute_missing {
                let name = &schema.columns[c].0;
                return Err(FansError::parse(path, line, format!("missing value in column '{name}'")));
            }
            raw[c].push((!is_missing(field)).then(|| field.to_string()));
        }
        lines.push(line);
    }

    let mut columns: Vec<Vec<Option<f64>>> = Vec::new();
    let mut names = Vec::new();
    for ((name, kind), values) in schema.columns.iter().zip(&raw) {
        match kind {
            ColumnKind::Ordinal | ColumnKind::Numeric => {
                let col = values
                    .iter()
                    .zip(&lines)
                    .map(|(v, &line)| {
                        v.as_deref()
                            .map(|s| {
                                s.parse::<f64>()
                                    .ok()
                                    .filter(|x| x.is_finite())
                                    .ok_or_else(|| FansError::parse(path, line, format!("'{s}' in column '{name}' is not a number")))
                            })
                            .transpose()
                    })
                    .collect::<Result<_>>()?;
                columns.push(col);
                names.push(name.clone());
            }
            ColumnKind::Categorical => {
                let levels: BTreeSet<&str> = values.iter().flatten().map(String::as_str).collect();
                for level in levels {
                    columns.push(values.iter().map(|v| v.as_deref().map(|s| f64::from(u8::from(s == level)))).collect());
                    names.push(format!("{name}={level}"));
                }
            }
        }
    }

    let filled: Vec<Vec<f64>> = columns
        .iter()
        .map(|col| {
            let seen: Vec<f64> = col.iter().flatten().copied().collect();
            let mean = if seen.is_empty() { 0.0 } else { seen.iter().sum::<f64>() / seen.len() as f64 };
            col.iter().map(|v| v.unwrap_or(mean)).collect()
        })
        .collect();
    let constant = filled
        .iter()
        .enumerate()
        .filter(|(_, c)| c.windows(2).all(|w| w[0] == w[1]))
        .map(|(j, _)| j)
        .collect();
    let n = lines.len();
    let features = if filled.is_empty() || n == 0 {
        FeatureMatrix::new(n, filled.len(), Vec::new())?
    } else {
        FeatureMatrix::from_columns(&filled)?
    };
    Ok(Covariates { features, names, constant })
}
