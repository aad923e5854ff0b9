//! Prefix inventories, prefix stripping and prefix-base combination.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const ENGLISH_PREFIXES: &str = include_str!("../data/prefixes_en.txt");
pub const RUSSIAN_PREFIXES: &str = include_str!("../data/prefixes_ru.txt");

pub const DEFAULT_MIN_RESIDUAL: usize = 3;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InventoryError {
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error("inventory is empty")]
    Empty,
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AffixKind {
    Prefix,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Affix {
    form: String,
    kind: AffixKind,
}

impl Affix {
    /// `form` may carry a trailing hyphen ("un-"); it is dropped.
    pub fn prefix(form: &str) -> Result<Affix, String> {
        let form = form.trim();
        let form = form.strip_suffix('-').unwrap_or(form);
        if form.is_empty() {
            return Err("empty affix".into());
        }
        if let Some(c) = form.chars().find(|c| !c.is_alphabetic()) {
            return Err(format!("affix {form:?} contains non-letter {c:?}"));
        }
        Ok(Affix {
            form: form.to_string(),
            kind: AffixKind::Prefix,
        })
    }

    /// Canonical form without the hyphen, e.g. "un".
    pub fn form(&self) -> &str {
        &self.form
    }

    /// Display form, e.g. "un-".
    pub fn display(&self) -> String {
        format!("{}-", self.form)
    }

    pub fn kind(&self) -> AffixKind {
        self.kind
    }

    /// Plain and hyphenated surface forms of this prefix attached to `base`.
    pub fn combine(&self, base: &BaseWord) -> [String; 2] {
        [
            format!("{}{}", self.form, base.text),
            format!("{}-{}", self.form, base.text),
        ]
    }
}

impl fmt::Display for Affix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-", self.form)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseWord {
    pub text: String,
    pub source_word: String,
    pub stripped: bool,
}

/// Ordered prefix list. Iteration runs longest form first, then
/// lexicographically, so the first match is the longest one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffixInventory {
    affixes: Vec<Affix>,
    min_residual: usize,
}

impl AffixInventory {
    pub fn new(affixes: Vec<Affix>, min_residual: usize) -> Result<Self, InventoryError> {
        if affixes.is_empty() {
            return Err(InventoryError::Empty);
        }
        let mut seen = HashSet::new();
        for (i, a) in affixes.iter().enumerate() {
            if !seen.insert(a.form.clone()) {
                return Err(InventoryError::Invalid {
                    line: i + 1,
                    message: format!("duplicate affix {:?}", a.form),
                });
            }
        }
        let mut affixes = affixes;
        affixes.sort_by(|a, b| {
            b.form
                .chars()
                .count()
                .cmp(&a.form.chars().count())
                .then_with(|| a.form.cmp(&b.form))
        });
        Ok(AffixInventory {
            affixes,
            min_residual,
        })
    }

    /// Parses the inventory text format: one affix per line ("un-" or
    /// "un"), `#` comments, blank lines, and an optional
    /// `min_residual = N` directive.
    pub fn parse(text: &str) -> Result<Self, InventoryError> {
        let mut affixes = Vec::new();
        let mut seen = HashSet::new();
        let mut min_residual = DEFAULT_MIN_RESIDUAL;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let invalid = |message: String| InventoryError::Invalid {
                line: i + 1,
                message,
            };
            if let Some((key, value)) = line.split_once('=') {
                if key.trim() != "min_residual" {
                    return Err(invalid(format!("unknown directive {:?}", key.trim())));
                }
                min_residual = value
                    .trim()
                    .parse::<usize>()
                    .ok()
                    .filter(|&n| n >= 1)
                    .ok_or_else(|| invalid(format!("bad min_residual {:?}", value.trim())))?;
                continue;
            }
            let affix = Affix::prefix(line).map_err(invalid)?;
            if !seen.insert(affix.form.clone()) {
                return Err(invalid(format!("duplicate affix {:?}", affix.form)));
            }
            affixes.push(affix);
        }
        Self::new(affixes, min_residual)
    }

    pub fn load(path: &Path) -> Result<Self, InventoryError> {
        let text = std::fs::read_to_string(path).map_err(|e| InventoryError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn english() -> Self {
        Self::parse(ENGLISH_PREFIXES).expect("bundled inventory")
    }

    pub fn russian() -> Self {
        Self::parse(RUSSIAN_PREFIXES).expect("bundled inventory")
    }

    pub fn with_min_residual(mut self, min_residual: usize) -> Self {
        self.min_residual = min_residual;
        self
    }

    pub fn min_residual(&self) -> usize {
        self.min_residual
    }

    pub fn affixes(&self) -> &[Affix] {
        &self.affixes
    }

    pub fn len(&self) -> usize {
        self.affixes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.affixes.is_empty()
    }

    pub fn get(&self, form: &str) -> Option<&Affix> {
        let form = form.strip_suffix('-').unwrap_or(form);
        self.affixes.iter().find(|a| a.form == form)
    }

    /// Strips at most one prefix. Only the longest matching affix is tried;
    /// if its residual is shorter than `min_residual` the word is returned
    /// unchanged.
    pub fn strip_prefix(&self, word: &str) -> BaseWord {
        let unchanged = || BaseWord {
            text: word.to_string(),
            source_word: word.to_string(),
            stripped: false,
        };
        let Some(affix) = self
            .affixes
            .iter()
            .find(|a| word.starts_with(a.form.as_str()))
        else {
            return unchanged();
        };
        let rest = &word[affix.form.len()..];
        let rest = rest.strip_prefix('-').unwrap_or(rest);
        let starts_with_letter = rest.chars().next().is_some_and(char::is_alphabetic);
        if !starts_with_letter || rest.chars().count() < self.min_residual {
            return unchanged();
        }
        BaseWord {
            text: rest.to_string(),
            source_word: word.to_string(),
            stripped: true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_inventories() {
        let en = AffixInventory::english();
        assert_eq!(en.len(), 25);
        assert_eq!(en.affixes()[0].form(), "counter");
        let ru = AffixInventory::russian();
        assert_eq!(ru.len(), 27);
        assert!(ru.get("пере-").is_some());
        assert!(ru.get("за").is_some());
    }

    #[test]
    fn iteration_order_longest_first() {
        let inv = AffixInventory::parse("in-\ninter-\nun-\nre-").unwrap();
        let forms: Vec<_> = inv.affixes().iter().map(Affix::form).collect();
        assert_eq!(forms, ["inter", "in", "re", "un"]);
    }

    #[test]
    fn strip_examples() {
        let en = AffixInventory::english();
        let b = en.strip_prefix("misunderstand");
        assert_eq!(b.text, "understand");
        assert!(b.stripped);
        assert_eq!(b.source_word, "misunderstand");

        let b = en.strip_prefix("table");
        assert_eq!((b.text.as_str(), b.stripped), ("table", false));

        let b = en.strip_prefix("under");
        assert_eq!((b.text.as_str(), b.stripped), ("under", false));

        let b = en.strip_prefix("un-lock");
        assert_eq!((b.text.as_str(), b.stripped), ("lock", true));

        let b = en.strip_prefix("interact");
        assert_eq!(b.text, "act");
    }

    #[test]
    fn residual_guard_counts_chars() {
        let ru = AffixInventory::russian();
        assert_eq!(ru.strip_prefix("заделать").text, "делать");
        assert!(!ru.strip_prefix("зад").stripped);
    }

    #[test]
    fn combine_examples() {
        let base = |t: &str| BaseWord {
            text: t.into(),
            source_word: t.into(),
            stripped: false,
        };
        let un = Affix::prefix("un-").unwrap();
        assert_eq!(un.combine(&base("happy")), ["unhappy", "un-happy"]);
        let re = Affix::prefix("re").unwrap();
        assert_eq!(re.combine(&base("give")), ["regive", "re-give"]);
        let anti = Affix::prefix("anti-").unwrap();
        assert_eq!(anti.combine(&base("virus")), ["antivirus", "anti-virus"]);
    }

    #[test]
    fn parse_examples_and_errors() {
        let inv = AffixInventory::parse("un-\nre-\nnon-").unwrap();
        assert_eq!(inv.len(), 3);
        for f in ["un", "re", "non"] {
            assert!(inv.get(f).is_some());
        }
        assert_eq!(
            AffixInventory::parse("un-\nre-\nun-"),
            Err(InventoryError::Invalid {
                line: 3,
                message: "duplicate affix \"un\"".into()
            })
        );
        assert!(matches!(
            AffixInventory::parse("un-\nr3-"),
            Err(InventoryError::Invalid { line: 2, .. })
        ));
        assert_eq!(
            AffixInventory::parse("# nothing\n\n"),
            Err(InventoryError::Empty)
        );
        let cyr = AffixInventory::parse("пере-\nза-").unwrap();
        assert_eq!(cyr.len(), 2);
        let inv = AffixInventory::parse("min_residual = 2\nun-").unwrap();
        assert_eq!(inv.min_residual(), 2);
        assert!(matches!(
            AffixInventory::parse("min_residual = 0\nun-"),
            Err(InventoryError::Invalid { line: 1, .. })
        ));
    }
}
