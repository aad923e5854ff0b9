//! Token-frequency index over plaintext corpora.
//!
//! Tokens are maximal runs of Unicode letters, optionally joined by single
//! internal hyphens or apostrophes ("un-do", "o'clock"). Everything else
//! separates tokens. Counts are exact.
//!
//! On disk an index is a TSV file with one `word<TAB>count` line per type,
//! sorted by word, no header. Totals are recomputed on load. Corpus label and
//! tokenizer fingerprint live in a `<file>.meta.json` sidecar.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Function-word list shipped with the crate (English).
pub const ENGLISH_STOPLIST: &str = include_str!("../data/stoplist_en.txt");

const READ_CHUNK: usize = 1 << 22;

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("{}: read failed at byte {offset}: {source}", path_display(.path))]
    Read {
        path: Option<PathBuf>,
        offset: u64,
        #[source]
        source: io::Error,
    },
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{}:{line}: {message}", .path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("invalid tokenizer config: {0}")]
    Config(String),
    #[error("cannot merge indexes built with different tokenizers ({0} vs {1})")]
    TokenizerMismatch(String, String),
}

fn path_display(path: &Option<PathBuf>) -> String {
    match path {
        Some(p) => p.display().to_string(),
        None => "<stream>".to_string(),
    }
}

/// Tokenizer and content-word filter settings.
///
/// Only `lowercase` and `joiners` influence tokenization (and therefore the
/// index); `min_length` and `stoplist` are applied when selecting content
/// words for sampling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizerConfig {
    pub lowercase: bool,
    pub min_length: usize,
    /// Characters allowed between two letters inside a token.
    pub joiners: Vec<char>,
    pub stoplist: BTreeSet<String>,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        let mut cfg = TokenizerConfig {
            lowercase: true,
            min_length: 3,
            joiners: vec!['-', '\''],
            stoplist: BTreeSet::new(),
        };
        cfg.stoplist =
            parse_stoplist(ENGLISH_STOPLIST, &cfg).expect("bundled stoplist is canonical");
        cfg
    }
}

impl TokenizerConfig {
    /// Default settings with an empty stoplist.
    pub fn without_stoplist() -> Self {
        TokenizerConfig {
            stoplist: BTreeSet::new(),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), IndexError> {
        if self.min_length == 0 {
            return Err(IndexError::Config("min_length must be at least 1".into()));
        }
        if let Some(c) = self.joiners.iter().find(|c| c.is_alphabetic()) {
            return Err(IndexError::Config(format!("joiner {c:?} is a letter")));
        }
        for word in &self.stoplist {
            if !self.is_canonical(word) {
                return Err(IndexError::Config(format!(
                    "stoplist entry {word:?} is not a canonical token"
                )));
            }
        }
        Ok(())
    }

    /// Replaces the stoplist with the contents of a file (one token per line).
    pub fn load_stoplist(&mut self, path: &Path) -> Result<(), IndexError> {
        let text = std::fs::read_to_string(path).map_err(|source| IndexError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.stoplist =
            parse_stoplist(&text, self).map_err(|(line, message)| IndexError::Parse {
                path: path.to_path_buf(),
                line,
                message,
            })?;
        Ok(())
    }

    fn is_joiner(&self, c: char) -> bool {
        self.joiners.contains(&c)
    }

    /// True when `word` tokenizes to exactly itself.
    pub fn is_canonical(&self, word: &str) -> bool {
        let mut tokens = Vec::new();
        for_each_token(word, self, |t| tokens.push(t.to_string()));
        tokens.len() == 1 && tokens[0] == word
    }

    /// Stable identifier of the settings that shape the index.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(b"tokenizer/v1");
        hasher.update([self.lowercase as u8]);
        for c in &self.joiners {
            hasher.update(c.to_string().as_bytes());
        }
        let digest = hasher.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn parse_stoplist(text: &str, cfg: &TokenizerConfig) -> Result<BTreeSet<String>, (usize, String)> {
    let mut out = BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let word = raw.trim();
        if word.is_empty() || word.starts_with('#') {
            continue;
        }
        let word = if cfg.lowercase {
            word.to_lowercase()
        } else {
            word.to_string()
        };
        if !cfg.is_canonical(&word) {
            return Err((i + 1, format!("{word:?} is not a canonical token")));
        }
        out.insert(word);
    }
    Ok(out)
}

/// Calls `emit` for every token of `text` in order.
pub fn for_each_token<F: FnMut(&str)>(text: &str, cfg: &TokenizerConfig, mut emit: F) {
    let mut buf = String::new();
    let mut pending: Option<char> = None;
    for c in text.chars() {
        if c.is_alphabetic() {
            if let Some(j) = pending.take() {
                buf.push(j);
            }
            if cfg.lowercase {
                buf.extend(c.to_lowercase());
            } else {
                buf.push(c);
            }
        } else if pending.is_none() && !buf.is_empty() && cfg.is_joiner(c) {
            pending = Some(c);
        } else {
            pending = None;
            if !buf.is_empty() {
                emit(&buf);
                buf.clear();
            }
        }
    }
    if !buf.is_empty() {
        emit(&buf);
    }
}

pub fn tokenize(text: &str, cfg: &TokenizerConfig) -> Vec<String> {
    let mut out = Vec::new();
    for_each_token(text, cfg, |t| out.push(t.to_string()));
    out
}

/// True iff `word` is long enough, purely alphabetic apart from single
/// internal joiners, and not a stopword.
pub fn is_content_word(word: &str, cfg: &TokenizerConfig) -> bool {
    if word.chars().count() < cfg.min_length {
        return false;
    }
    let mut prev_letter = false;
    for c in word.chars() {
        if c.is_alphabetic() {
            prev_letter = true;
        } else if cfg.is_joiner(c) && prev_letter {
            prev_letter = false;
        } else {
            return false;
        }
    }
    prev_letter && !cfg.stoplist.contains(word)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexMeta {
    pub label: String,
    pub tokenizer: String,
}

impl IndexMeta {
    fn merged(&self, other: &IndexMeta) -> Result<IndexMeta, IndexError> {
        if self.tokenizer != other.tokenizer {
            return Err(IndexError::TokenizerMismatch(
                self.tokenizer.clone(),
                other.tokenizer.clone(),
            ));
        }
        let labels: BTreeSet<&str> = self
            .label
            .split('+')
            .chain(other.label.split('+'))
            .filter(|l| !l.is_empty())
            .collect();
        Ok(IndexMeta {
            label: labels.into_iter().collect::<Vec<_>>().join("+"),
            tokenizer: self.tokenizer.clone(),
        })
    }
}

/// Mutable counting stage. Finish into an immutable [`FrequencyIndex`].
#[derive(Debug, Default)]
pub struct IndexBuilder {
    counts: HashMap<String, u64>,
}

impl IndexBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_text(&mut self, text: &str, cfg: &TokenizerConfig) {
        let counts = &mut self.counts;
        for_each_token(text, cfg, |tok| match counts.get_mut(tok) {
            Some(n) => *n += 1,
            None => {
                counts.insert(tok.to_string(), 1);
            }
        });
    }

    /// Streams UTF-8 text from `reader`. Invalid sequences become U+FFFD.
    pub fn add_reader<R: Read>(
        &mut self,
        mut reader: R,
        cfg: &TokenizerConfig,
        path: Option<&Path>,
    ) -> Result<(), IndexError> {
        let mut buf: Vec<u8> = Vec::with_capacity(READ_CHUNK * 2);
        let mut chunk = vec![0u8; READ_CHUNK];
        let mut offset: u64 = 0;
        loop {
            let n = match reader.read(&mut chunk) {
                Ok(0) => break,
                Ok(n) => n,
                Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
                Err(source) => {
                    return Err(IndexError::Read {
                        path: path.map(Path::to_path_buf),
                        offset,
                        source,
                    })
                }
            };
            offset += n as u64;
            buf.extend_from_slice(&chunk[..n]);
            // ASCII whitespace always separates tokens and never sits inside
            // a multi-byte sequence, so splitting after it is lossless.
            if let Some(cut) = buf.iter().rposition(|b| b.is_ascii_whitespace()) {
                self.add_text(&String::from_utf8_lossy(&buf[..=cut]), cfg);
                buf.drain(..=cut);
            }
        }
        if !buf.is_empty() {
            self.add_text(&String::from_utf8_lossy(&buf), cfg);
        }
        Ok(())
    }

    pub fn merge(&mut self, other: IndexBuilder) {
        if other.counts.len() > self.counts.len() {
            let small = std::mem::replace(&mut self.counts, other.counts);
            self.absorb(small);
        } else {
            self.absorb(other.counts);
        }
    }

    fn absorb(&mut self, counts: HashMap<String, u64>) {
        for (w, n) in counts {
            *self.counts.entry(w).or_insert(0) += n;
        }
    }

    pub fn finish(self, meta: IndexMeta) -> FrequencyIndex {
        FrequencyIndex::from_entries(self.counts.into_iter().collect(), meta)
    }
}

/// Immutable word-type → token-count map with corpus totals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyIndex {
    entries: BTreeMap<String, u64>,
    total_tokens: u64,
    hapax_count: u64,
    meta: IndexMeta,
}

impl FrequencyIndex {
    pub fn empty(meta: IndexMeta) -> Self {
        Self::from_entries(BTreeMap::new(), meta)
    }

    /// Zero counts are dropped.
    pub fn from_entries(entries: BTreeMap<String, u64>, meta: IndexMeta) -> Self {
        let entries: BTreeMap<String, u64> = entries.into_iter().filter(|(_, n)| *n > 0).collect();
        let total_tokens = entries.values().sum();
        let hapax_count = entries.values().filter(|&&n| n == 1).count() as u64;
        FrequencyIndex {
            entries,
            total_tokens,
            hapax_count,
            meta,
        }
    }

    pub fn from_counts<I, S>(counts: I) -> Self
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        let mut entries = BTreeMap::new();
        for (w, n) in counts {
            *entries.entry(w.into()).or_insert(0) += n;
        }
        Self::from_entries(entries, IndexMeta::default())
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn total_types(&self) -> u64 {
        self.entries.len() as u64
    }

    pub fn hapax_count(&self) -> u64 {
        self.hapax_count
    }

    pub fn meta(&self) -> &IndexMeta {
        &self.meta
    }

    /// Token count of `word`, 0 when absent.
    pub fn lookup(&self, word: &str) -> u64 {
        self.entries.get(word).copied().unwrap_or(0)
    }

    /// Sum of lookups over all surface variants of one word.
    pub fn combined_frequency<S: AsRef<str>>(&self, variants: &[S]) -> u64 {
        variants.iter().map(|v| self.lookup(v.as_ref())).sum()
    }

    /// Entries whose word starts with `prefix_form`, in lexicographic order.
    /// Hyphenated forms (`prefix_form` + "-" + ...) are included since they
    /// share the same leading characters.
    pub fn enumerate_with_prefix<'a>(
        &'a self,
        prefix_form: &'a str,
    ) -> impl Iterator<Item = (&'a str, u64)> + 'a {
        self.entries
            .range::<str, _>((
                std::ops::Bound::Included(prefix_form),
                std::ops::Bound::Unbounded,
            ))
            .take_while(move |(w, _)| w.starts_with(prefix_form))
            .map(|(w, n)| (w.as_str(), *n))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> + '_ {
        self.entries.iter().map(|(w, n)| (w.as_str(), *n))
    }

    /// Count-wise sum of two indexes.
    pub fn merge(&self, other: &FrequencyIndex) -> Result<FrequencyIndex, IndexError> {
        let meta = self.meta.merged(&other.meta)?;
        let mut entries = self.entries.clone();
        for (w, n) in &other.entries {
            *entries.entry(w.clone()).or_insert(0) += n;
        }
        Ok(Self::from_entries(entries, meta))
    }

    pub fn save(&self, path: &Path) -> Result<(), IndexError> {
        let io_err = |source| IndexError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut body = String::with_capacity(self.entries.len() * 12);
        for (w, n) in &self.entries {
            body.push_str(w);
            body.push('\t');
            body.push_str(&n.to_string());
            body.push('\n');
        }
        write_atomic(path, body.as_bytes()).map_err(io_err)?;
        let meta = serde_json::to_vec_pretty(&self.meta).expect("meta serializes");
        write_atomic(&meta_path(path), &meta).map_err(io_err)
    }

    pub fn load(path: &Path) -> Result<FrequencyIndex, IndexError> {
        let file = File::open(path).map_err(|source| IndexError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let parse_err = |line: usize, message: String| IndexError::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut entries = BTreeMap::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let lineno = i + 1;
            let line = line.map_err(|source| IndexError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 2 {
                return Err(parse_err(
                    lineno,
                    format!("expected 2 columns, found {}", cols.len()),
                ));
            }
            let (word, count) = (cols[0], cols[1]);
            if word.is_empty() || word.chars().any(char::is_whitespace) {
                return Err(parse_err(lineno, format!("invalid word {word:?}")));
            }
            let count: u64 = count
                .parse()
                .map_err(|_| parse_err(lineno, format!("invalid count {count:?}")))?;
            if count == 0 {
                return Err(parse_err(lineno, "zero count".into()));
            }
            if entries.insert(word.to_string(), count).is_some() {
                return Err(parse_err(lineno, format!("duplicate word {word:?}")));
            }
        }
        let meta = match std::fs::read(meta_path(path)) {
            Ok(bytes) => serde_json::from_slice(&bytes)
                .map_err(|e| parse_err(e.line(), format!("bad metadata sidecar: {e}")))?,
            Err(_) => IndexMeta {
                label: path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default(),
                tokenizer: String::new(),
            },
        };
        Ok(Self::from_entries(entries, meta))
    }
}

impl fmt::Display for FrequencyIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "tokens={} types={} hapaxes={}",
            self.total_tokens,
            self.total_types(),
            self.hapax_count
        )
    }
}

pub fn meta_path(index_path: &Path) -> PathBuf {
    let mut name = index_path.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

/// Writes to a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Indexes an in-memory text.
pub fn build_index(text: &str, cfg: &TokenizerConfig, label: &str) -> FrequencyIndex {
    let mut b = IndexBuilder::new();
    b.add_text(text, cfg);
    b.finish(IndexMeta {
        label: label.to_string(),
        tokenizer: cfg.fingerprint(),
    })
}

/// Indexes a byte stream.
pub fn build_index_from_reader<R: Read>(
    reader: R,
    cfg: &TokenizerConfig,
    label: &str,
) -> Result<FrequencyIndex, IndexError> {
    let mut b = IndexBuilder::new();
    b.add_reader(reader, cfg, None)?;
    Ok(b.finish(IndexMeta {
        label: label.to_string(),
        tokenizer: cfg.fingerprint(),
    }))
}

/// Indexes several files concurrently, one shard per file, then merges.
pub fn build_index_from_paths(
    paths: &[PathBuf],
    cfg: &TokenizerConfig,
    label: &str,
) -> Result<FrequencyIndex, IndexError> {
    cfg.validate()?;
    let shards = paths
        .par_iter()
        .map(|p| {
            let file = File::open(p).map_err(|source| IndexError::Io {
                path: p.clone(),
                source,
            })?;
            let mut b = IndexBuilder::new();
            b.add_reader(file, cfg, Some(p))?;
            Ok(b)
        })
        .collect::<Result<Vec<_>, IndexError>>()?;
    let mut all = IndexBuilder::new();
    for shard in shards {
        all.merge(shard);
    }
    Ok(all.finish(IndexMeta {
        label: label.to_string(),
        tokenizer: cfg.fingerprint(),
    }))
}
