use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MosRow {
    pub image_path: String,
    #[serde(default)]
    pub reference_id: String,
    pub mos: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_path: Option<String>,
}

impl MosRow {
    /// The grouping key for splits; rows without a reference id group alone.
    pub fn group_key(&self) -> &str {
        if self.reference_id.is_empty() {
            &self.image_path
        } else {
            &self.reference_id
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MosDataset {
    pub rows: Vec<MosRow>,
}

impl MosDataset {
    pub fn new(rows: Vec<MosRow>) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| !r.mos.is_finite()) {
            return Err(Error::invalid(format!("non-finite mos for {}", r.image_path)));
        }
        Ok(Self { rows })
    }

    /// Reads `image_path,reference_id,mos[,reference_path]`.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let rows = rdr
            .deserialize::<MosRow>()
            .map(|r| {
                r.map(|mut row| {
                    if row.reference_path.as_deref() == Some("") {
                        row.reference_path = None;
                    }
                    row
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(rows)
    }

    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file)
    }

    pub fn to_writer<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let with_ref = self.rows.iter().any(|r| r.reference_path.is_some());
        if with_ref {
            w.write_record(["image_path", "reference_id", "mos", "reference_path"])?;
        } else {
            w.write_record(["image_path", "reference_id", "mos"])?;
        }
        for r in &self.rows {
            let mos = r.mos.to_string();
            let mut rec = vec![r.image_path.as_str(), r.reference_id.as_str(), mos.as_str()];
            if with_ref {
                rec.push(r.reference_path.as_deref().unwrap_or(""));
            }
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<dataset>", e))?;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn mos(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.mos).collect()
    }

    pub fn reference_ids(&self) -> BTreeSet<&str> {
        self.rows.iter().map(MosRow::group_key).collect()
    }

    fn subset(&self, keep: impl Fn(&MosRow) -> bool) -> Self {
        Self { rows: self.rows.iter().filter(|r| keep(r)).cloned().collect() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        Self { train: 0.7, val: 0.1, test: 0.2 }
    }
}

/// Partitions reference ids at random by `ratios`. Validation and test sizes
/// are floored; the remainder goes to train.
pub fn split_by_reference(
    ds: &MosDataset,
    ratios: SplitRatios,
    seed: u64,
) -> Result<(MosDataset, MosDataset, MosDataset)> {
    let r = [ratios.train, ratios.val, ratios.test];
    if r.iter().any(|v| !(*v >= 0.0)) || (r.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("split ratios must be non-negative and sum to 1, got {r:?}")));
    }
    let mut refs: Vec<&str> = ds.reference_ids().into_iter().collect();
    let n = refs.len();
    if n < 3 {
        return Err(Error::invalid(format!("need at least 3 reference ids to split, got {n}")));
    }
    refs.shuffle(&mut rng_from_seed(seed));
    let n_val = (ratios.val * n as f64 + 1e-9).floor() as usize;
    let n_test = (ratios.test * n as f64 + 1e-9).floor() as usize;
    let n_train = n - n_val - n_test;
    let assign: BTreeMap<&str, u8> = refs
        .iter()
        .enumerate()
        .map(|(i, &id)| {
            let part = if i < n_train {
                0
            } else if i < n_train + n_val {
                1
            } else {
                2
            };
            (id, part)
        })
        .collect();
    let pick = |p: u8| ds.subset(|row| assign[row.group_key()] == p);
    Ok((pick(0), pick(1), pick(2)))
}

/// Per-image feature rows; several rows for one image are crops whose
/// predictions are averaged.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FeatureTable {
    dim: usize,
    rows: BTreeMap<String, Vec<Vec<f64>>>,
}

impl FeatureTable {
    pub fn new(dim: usize) -> Self {
        Self { dim, rows: BTreeMap::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn insert(&mut self, path: impl Into<String>, crops: Vec<Vec<f64>>) -> Result<()> {
        let path = path.into();
        if crops.is_empty() {
            return Err(Error::invalid(format!("no feature rows for {path}")));
        }
        if crops.iter().any(|c| c.len() != self.dim || c.iter().any(|v| !v.is_finite())) {
            return Err(Error::invalid(format!("bad feature row for {path}")));
        }
        self.rows.entry(path).or_default().extend(crops);
        Ok(())
    }

    pub fn get(&self, path: &str) -> Result<&[Vec<f64>]> {
        self.rows.get(path).map(Vec::as_slice).ok_or_else(|| Error::invalid(format!("no embedding for image `{path}`")))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[Vec<f64>])> {
        self.rows.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    /// Reads `image_path,f0,f1,...`.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let dim = rdr.headers()?.len().saturating_sub(1);
        if dim == 0 {
            return Err(Error::invalid("embedding table has no feature columns"));
        }
        let mut table = Self::new(dim);
        for rec in rdr.records() {
            let rec = rec?;
            let path = rec.get(0).unwrap_or_default().to_string();
            let values = rec
                .iter()
                .skip(1)
                .map(|s| s.parse::<f64>().map_err(|e| Error::invalid(format!("{path}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            table.insert(path, vec![values])?;
        }
        Ok(table)
    }

    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file)
    }

    pub fn to_writer<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["image_path".to_string()];
        header.extend((0..self.dim).map(|k| format!("f{k}")));
        w.write_record(&header)?;
        for (path, crops) in &self.rows {
            for c in crops {
                let mut rec = vec![path.clone()];
                rec.extend(c.iter().map(|v| v.to_string()));
                w.write_record(&rec)?;
            }
        }
        w.flush().map_err(|e| Error::io("<embeddings>", e))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dataset(refs: usize, per_ref: usize) -> MosDataset {
        let rows = (0..refs)
            .flat_map(|r| {
                (0..per_ref).map(move |k| MosRow {
                    image_path: format!("img_{r}_{k}.png"),
                    reference_id: format!("ref{r}"),
                    mos: (r * per_ref + k) as f64,
                    reference_path: None,
                })
            })
            .collect();
        MosDataset::new(rows).unwrap()
    }

    #[test]
    fn ten_references_split_seven_one_two() {
        let ds = dataset(10, 3);
        let (tr, va, te) = split_by_reference(&ds, SplitRatios::default(), 1).unwrap();
        assert_eq!((tr.reference_ids().len(), va.reference_ids().len(), te.reference_ids().len()), (7, 1, 2));
    }

    #[test]
    fn partition_is_disjoint_and_complete() {
        let ds = dataset(23, 4);
        for seed in 0..10 {
            let (tr, va, te) = split_by_reference(&ds, SplitRatios::default(), seed).unwrap();
            let (a, b, c) = (tr.reference_ids(), va.reference_ids(), te.reference_ids());
            assert!(a.is_disjoint(&b) && a.is_disjoint(&c) && b.is_disjoint(&c));
            let mut all: Vec<&str> =
                tr.rows.iter().chain(&va.rows).chain(&te.rows).map(|r| r.image_path.as_str()).collect();
            all.sort_unstable();
            let mut want: Vec<&str> = ds.rows.iter().map(|r| r.image_path.as_str()).collect();
            want.sort_unstable();
            assert_eq!(all, want);
        }
    }

    #[test]
    fn too_few_references() {
        assert!(split_by_reference(&dataset(2, 5), SplitRatios::default(), 0).is_err());
    }

    #[test]
    fn csv_round_trips() {
        let text = "image_path,reference_id,mos,reference_path\na.png,r1,3.5,ref1.png\nb.png,,2,\n";
        let ds = MosDataset::from_reader(text.as_bytes()).unwrap();
        assert_eq!(ds.rows[1].reference_path, None);
        assert_eq!(ds.rows[1].group_key(), "b.png");
        let mut out = Vec::new();
        ds.to_writer(&mut out).unwrap();
        assert_eq!(MosDataset::from_reader(out.as_slice()).unwrap(), ds);

        let emb = "image_path,f0,f1\na.png,1,2\na.png,3,4\nb.png,0.5,-1\n";
        let t = FeatureTable::from_reader(emb.as_bytes()).unwrap();
        assert_eq!(t.get("a.png").unwrap().len(), 2);
        let mut out = Vec::new();
        t.to_writer(&mut out).unwrap();
        assert_eq!(FeatureTable::from_reader(out.as_slice()).unwrap(), t);
    }
}
