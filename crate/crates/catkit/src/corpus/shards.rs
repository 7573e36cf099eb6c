//! Sharded newline-delimited JSON document store.
//!
//! Shards are named `shard-%05d.jsonl`, hold documents sorted by id, and are
//! written deterministically: the same documents always produce byte-identical
//! files.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::corpus::Document;
use crate::error::{Error, Result};

pub const SHARD_EXTENSION: &str = "jsonl";

/// One on-disk shard and the number of records it holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusShard {
    pub path: PathBuf,
    pub records: usize,
}

fn shard_path(dir: &Path, index: usize) -> PathBuf {
    dir.join(format!("shard-{index:05}.{SHARD_EXTENSION}"))
}

/// Writes `docs` into `dir` as shards of at most `shard_size` documents,
/// sorted by `doc_id`. Returns the shards in order.
pub fn write_shards(
    docs: impl IntoIterator<Item = Document>,
    dir: &Path,
    shard_size: usize,
) -> Result<Vec<CorpusShard>> {
    assert!(shard_size >= 1, "shard_size must be >= 1");
    let mut docs: Vec<Document> = docs.into_iter().collect();
    docs.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));

    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut shards = Vec::new();
    for (index, chunk) in docs.chunks(shard_size).enumerate() {
        let path = shard_path(dir, index);
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut w = BufWriter::new(file);
        for doc in chunk {
            serde_json::to_writer(&mut w, doc)?;
            w.write_all(b"\n").map_err(|e| Error::io(&path, e))?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        shards.push(CorpusShard {
            path,
            records: chunk.len(),
        });
    }
    Ok(shards)
}

/// Lists the shard files of a corpus directory in name order.
pub fn shard_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        let name = entry.file_name();
        let name = name.to_string_lossy();
        if name.starts_with("shard-") && name.ends_with(".jsonl") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Streams every document in a corpus directory, shard by shard.
/// A malformed line aborts with its file and line number.
pub fn read_shards(dir: &Path) -> Result<ShardReader> {
    let files = shard_files(dir)?;
    Ok(ShardReader {
        files,
        next_file: 0,
        current: None,
    })
}

pub struct ShardReader {
    files: Vec<PathBuf>,
    next_file: usize,
    current: Option<(PathBuf, usize, std::io::Lines<BufReader<File>>)>,
}

impl Iterator for ShardReader {
    type Item = Result<Document>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if let Some((path, lineno, lines)) = self.current.as_mut() {
                match lines.next() {
                    Some(Ok(line)) => {
                        *lineno += 1;
                        return Some(serde_json::from_str(&line).map_err(|e| {
                            Error::MalformedRecord {
                                path: path.clone(),
                                line: *lineno,
                                message: e.to_string(),
                            }
                        }));
                    }
                    Some(Err(e)) => {
                        let path = path.clone();
                        self.current = None;
                        return Some(Err(Error::io(path, e)));
                    }
                    None => self.current = None,
                }
            }
            if self.next_file >= self.files.len() {
                return None;
            }
            let path = self.files[self.next_file].clone();
            self.next_file += 1;
            match File::open(&path) {
                Ok(f) => self.current = Some((path, 0, BufReader::new(f).lines())),
                Err(e) => return Some(Err(Error::io(path, e))),
            }
        }
    }
}

/// Reads a whole corpus into memory.
pub fn read_all(dir: &Path) -> Result<Vec<Document>> {
    read_shards(dir)?.collect()
}
