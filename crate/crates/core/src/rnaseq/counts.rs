use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Genes by samples matrix of read counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountMatrix {
    pub gene_ids: Vec<String>,
    pub sample_ids: Vec<String>,
    /// Row-major, one row per gene.
    pub counts: Vec<Vec<u64>>,
}

impl CountMatrix {
    pub fn new(gene_ids: Vec<String>, sample_ids: Vec<String>, counts: Vec<Vec<u64>>) -> Result<Self> {
        let m = Self {
            gene_ids,
            sample_ids,
            counts,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.counts.len() != self.gene_ids.len() {
            return Err(Error::Invalid(format!(
                "{} gene ids for {} rows",
                self.gene_ids.len(),
                self.counts.len()
            )));
        }
        if let Some((g, row)) = self
            .counts
            .iter()
            .enumerate()
            .find(|(_, r)| r.len() != self.sample_ids.len())
        {
            return Err(Error::Invalid(format!(
                "gene `{}` has {} counts for {} samples",
                self.gene_ids[g],
                row.len(),
                self.sample_ids.len()
            )));
        }
        check_unique("gene id", &self.gene_ids)?;
        check_unique("sample id", &self.sample_ids)
    }

    pub fn n_genes(&self) -> usize {
        self.gene_ids.len()
    }

    pub fn n_samples(&self) -> usize {
        self.sample_ids.len()
    }

    pub fn sample_index(&self) -> HashMap<&str, usize> {
        self.sample_ids
            .iter()
            .enumerate()
            .map(|(j, s)| (s.as_str(), j))
            .collect()
    }

    /// Parses a delimited table whose first column holds gene ids and whose
    /// header row holds sample ids. `path` only labels error messages.
    pub fn from_reader<R: Read>(reader: R, delimiter: u8, path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .delimiter(delimiter)
            .has_headers(false)
            .flexible(true)
            .from_reader(reader);
        let mut records = rdr.records();
        let header = match records.next() {
            Some(r) => r?,
            None => return Err(parse_err(path, 1, 1, "empty file, expected a header row")),
        };
        if header.len() < 2 {
            return Err(parse_err(path, 1, 1, "header needs `gene_id` followed by sample ids"));
        }
        let sample_ids: Vec<String> = header.iter().skip(1).map(|s| s.trim().to_string()).collect();
        if let Some(dup) = first_duplicate(&sample_ids) {
            let col = sample_ids.iter().rposition(|s| s == dup).unwrap() + 2;
            return Err(parse_err(path, 1, col, &format!("duplicate sample id `{dup}`")));
        }
        let mut gene_ids = Vec::new();
        let mut counts = Vec::new();
        let mut seen = HashSet::new();
        for (k, rec) in records.enumerate() {
            let line = k + 2;
            let rec = rec?;
            if rec.iter().all(|f| f.trim().is_empty()) {
                continue;
            }
            if rec.len() != header.len() {
                return Err(parse_err(
                    path,
                    line,
                    rec.len().min(header.len()) + 1,
                    &format!("expected {} fields, found {}", header.len(), rec.len()),
                ));
            }
            let gene = rec[0].trim().to_string();
            if gene.is_empty() {
                return Err(parse_err(path, line, 1, "empty gene id"));
            }
            if !seen.insert(gene.clone()) {
                return Err(parse_err(path, line, 1, &format!("duplicate gene id `{gene}`")));
            }
            let row = rec
                .iter()
                .skip(1)
                .enumerate()
                .map(|(c, field)| {
                    let f = field.trim();
                    f.parse::<u64>().map_err(|_| {
                        let msg = if f.parse::<i64>().is_ok() {
                            format!("negative count `{f}`")
                        } else {
                            format!("expected a nonnegative integer count, found `{f}`")
                        };
                        parse_err(path, line, c + 2, &msg)
                    })
                })
                .collect::<Result<Vec<u64>>>()?;
            gene_ids.push(gene);
            counts.push(row);
        }
        Self::new(gene_ids, sample_ids, counts)
    }

    pub fn write<W: Write>(&self, out: W, delimiter: u8) -> Result<()> {
        let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(out);
        let mut header = vec!["gene_id".to_string()];
        header.extend(self.sample_ids.iter().cloned());
        w.write_record(&header)?;
        for (g, row) in self.gene_ids.iter().zip(&self.counts) {
            let mut rec = vec![g.clone()];
            rec.extend(row.iter().map(u64::to_string));
            w.write_record(&rec)?;
        }
        w.flush()
            .map_err(|e| Error::Pipeline(format!("writing count matrix: {e}")))?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write(std::io::BufWriter::new(file), delimiter_for(path))
    }
}

/// Tab for `.tsv`/`.txt`/`.tab`, comma otherwise.
pub fn delimiter_for(path: &Path) -> u8 {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .as_deref()
    {
        Some("tsv" | "txt" | "tab") => b'\t',
        _ => b',',
    }
}

// The extension decides unless the header line contains tabs but no commas.
fn sniff_delimiter(path: &Path, text: &str) -> u8 {
    let first = text.lines().next().unwrap_or("");
    match delimiter_for(path) {
        b',' if first.contains('\t') && !first.contains(',') => b'\t',
        d => d,
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn load_counts(path: &Path) -> Result<CountMatrix> {
    let text = read_text(path)?;
    CountMatrix::from_reader(text.as_bytes(), sniff_delimiter(path, &text), path)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pair {
    pub pair_id: String,
    pub sample_a: String,
    pub sample_b: String,
}

/// Which sample of condition A goes with which sample of condition B.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairingMap {
    pub pairs: Vec<Pair>,
}

impl PairingMap {
    pub fn new(pairs: Vec<Pair>) -> Result<Self> {
        let mut used = HashSet::new();
        for p in &pairs {
            for s in [&p.sample_a, &p.sample_b] {
                if !used.insert(s.as_str()) {
                    return Err(Error::Invalid(format!("sample `{s}` appears in more than one pair")));
                }
            }
        }
        check_unique("pair id", &pairs.iter().map(|p| p.pair_id.clone()).collect::<Vec<_>>())?;
        Ok(Self { pairs })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Column indices `(a, b)` of each pair in `sample_ids`.
    pub fn resolve(&self, sample_ids: &[String]) -> Result<Vec<(usize, usize)>> {
        let index: HashMap<&str, usize> = sample_ids.iter().enumerate().map(|(j, s)| (s.as_str(), j)).collect();
        self.pairs
            .iter()
            .map(|p| {
                let find = |s: &str| {
                    index
                        .get(s)
                        .copied()
                        .ok_or_else(|| Error::Invalid(format!("pair `{}` references unknown sample `{s}`", p.pair_id)))
                };
                Ok((find(&p.sample_a)?, find(&p.sample_b)?))
            })
            .collect()
    }

    pub fn from_reader<R: Read>(reader: R, path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut records = rdr.records();
        let header = match records.next() {
            Some(r) => r?,
            None => {
                return Err(parse_err(
                    path,
                    1,
                    1,
                    "empty file, expected `pair_id,sample_A,sample_B`",
                ))
            }
        };
        let names: Vec<String> = header.iter().map(str::to_ascii_lowercase).collect();
        if names != ["pair_id", "sample_a", "sample_b"] {
            return Err(parse_err(path, 1, 1, "header must be `pair_id,sample_A,sample_B`"));
        }
        let mut pairs = Vec::new();
        for (k, rec) in records.enumerate() {
            let line = k + 2;
            let rec = rec?;
            if rec.iter().all(str::is_empty) {
                continue;
            }
            if rec.len() != 3 {
                return Err(parse_err(path, line, rec.len().min(3) + 1, "expected 3 fields"));
            }
            if let Some(c) = rec.iter().position(str::is_empty) {
                return Err(parse_err(path, line, c + 1, "empty field"));
            }
            pairs.push(Pair {
                pair_id: rec[0].to_string(),
                sample_a: rec[1].to_string(),
                sample_b: rec[2].to_string(),
            });
        }
        Self::new(pairs)
    }

    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["pair_id", "sample_A", "sample_B"])?;
        for p in &self.pairs {
            w.write_record([&p.pair_id, &p.sample_a, &p.sample_b])?;
        }
        w.flush()
            .map_err(|e| Error::Pipeline(format!("writing pairing: {e}")))?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write(std::io::BufWriter::new(file))
    }
}

pub fn load_pairing(path: &Path) -> Result<PairingMap> {
    let text = read_text(path)?;
    PairingMap::from_reader(text.as_bytes(), path)
}

/// `sample_id,group` table.
pub fn load_groups(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = read_text(path)?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut groups = BTreeMap::new();
    for (k, rec) in rdr.records().enumerate() {
        let line = k + 1;
        let rec = rec?;
        if line == 1 {
            let names: Vec<String> = rec.iter().map(str::to_ascii_lowercase).collect();
            if names != ["sample_id", "group"] {
                return Err(parse_err(path, 1, 1, "header must be `sample_id,group`"));
            }
            continue;
        }
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if rec.len() != 2 || rec.iter().any(str::is_empty) {
            return Err(parse_err(path, line, 1, "expected `sample_id,group`"));
        }
        if groups.insert(rec[0].to_string(), rec[1].to_string()).is_some() {
            return Err(parse_err(path, line, 1, &format!("sample `{}` listed twice", &rec[0])));
        }
    }
    Ok(groups)
}

pub fn write_groups<W: Write>(groups: &BTreeMap<String, String>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sample_id", "group"])?;
    for (s, g) in groups {
        w.write_record([s, g])?;
    }
    w.flush().map_err(|e| Error::Pipeline(format!("writing groups: {e}")))?;
    Ok(())
}

fn parse_err(path: &Path, line: usize, column: usize, message: &str) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        column,
        message: message.to_string(),
    }
}

fn first_duplicate(ids: &[String]) -> Option<&String> {
    let mut seen = HashSet::new();
    ids.iter().find(|id| !seen.insert(id.as_str()))
}

fn check_unique(what: &str, ids: &[String]) -> Result<()> {
    match first_duplicate(ids) {
        Some(d) => Err(Error::Invalid(format!("duplicate {what} `{d}`"))),
        None => Ok(()),
    }
}
