use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rayon::prelude::*;

use super::EmbeddingModel;
use crate::corpus::normalize;
use crate::error::{Error, Result};

/// Target-language word → aligned source words with alignment counts.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AlignmentDictionary {
    pub entries: BTreeMap<String, Vec<(String, u64)>>,
}

impl AlignmentDictionary {
    pub fn add(&mut self, target: &str, source: &str, count: u64) -> Result<()> {
        if count == 0 {
            return Err(Error::Param(format!("zero count for {target:?} → {source:?}")));
        }
        let pairs = self.entries.entry(target.to_owned()).or_default();
        match pairs.iter_mut().find(|(s, _)| s == source) {
            Some((_, c)) => *c += count,
            None => pairs.push((source.to_owned(), count)),
        }
        Ok(())
    }

    /// Read `target<TAB>source<TAB>count` lines.
    pub fn read_from<R: BufRead>(input: R) -> Result<AlignmentDictionary> {
        let mut dict = AlignmentDictionary::default();
        for (i, line) in input.lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| Error::io("<alignments>", e))?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [target, source, count] = fields.as_slice() else {
                return Err(Error::parse(line_no, "expected target<TAB>source<TAB>count"));
            };
            let count: u64 = count
                .trim()
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad count {count:?}")))?;
            if count == 0 {
                return Err(Error::parse(line_no, "count must be positive"));
            }
            dict.add(&normalize(target.trim()), &normalize(source.trim()), count)?;
        }
        Ok(dict)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<AlignmentDictionary> {
        let path = path.as_ref();
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(BufReader::new(f))
    }
}

/// Give every target word the count-weighted average of its aligned source
/// vectors. Source words missing from `source` are ignored; target words
/// with no usable alignment are left out.
pub fn project(source: &EmbeddingModel, align: &AlignmentDictionary) -> Result<EmbeddingModel> {
    let dim = source.dim();
    let entries: Vec<(&String, &Vec<(String, u64)>)> = align.entries.iter().collect();
    let projected: Vec<(String, Vec<f64>)> = entries
        .par_iter()
        .filter_map(|(target, pairs)| {
            let usable = pairs.iter().filter_map(|(s, c)| source.get(s).map(|v| (v, *c as f64)));
            super::mean(dim, usable).map(|v| ((*target).clone(), v))
        })
        .collect();
    if projected.is_empty() {
        return Err(Error::EmptyModel(
            "no alignment entry resolves to a source vector".into(),
        ));
    }
    let mut out = EmbeddingModel::new(dim);
    for (w, v) in projected {
        out.insert(&w, &v)?;
    }
    Ok(out)
}
