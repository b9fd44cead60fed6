//! Post text to sparse uni/bi/trigram count vectors.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, Write};

use crate::{Error, Result};

/// Separator between tokens inside an n-gram key. Tokens never contain whitespace.
pub const GRAM_SEPARATOR: char = ' ';

fn is_url(chunk: &str) -> bool {
    let c = chunk.trim_start_matches(|ch: char| !ch.is_alphanumeric());
    c.starts_with("http://") || c.starts_with("https://") || c.starts_with("www.")
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Zero-width joiners, variation selectors and skin-tone modifiers glue emoji
/// sequences together; they are not tokens on their own.
fn is_emoji_glue(c: char) -> bool {
    matches!(c, '\u{200D}' | '\u{FE0E}' | '\u{FE0F}' | '\u{1F3FB}'..='\u{1F3FF}')
}

/// Non-ASCII symbol kept as its own token (emoji, pictographs, ...).
fn is_symbol_token(c: char) -> bool {
    !c.is_ascii()
        && !c.is_alphanumeric()
        && !c.is_whitespace()
        && !c.is_control()
        && !is_emoji_glue(c)
        && !('\u{2000}'..='\u{206F}').contains(&c) // general punctuation
        && !('\u{3000}'..='\u{303F}').contains(&c) // CJK punctuation
        && !matches!(c, '\u{00A0}'..='\u{00BF}' | '\u{00D7}' | '\u{00F7}')
}

/// Lowercased word tokens; URLs dropped, `@`/`#` prefixes stripped, emoji kept
/// as standalone tokens, punctuation discarded.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for chunk in text.split_whitespace() {
        if is_url(chunk) {
            continue;
        }
        let mut word = String::new();
        let flush = |word: &mut String, tokens: &mut Vec<String>| {
            let w = word.trim_matches(is_apostrophe);
            if !w.is_empty() {
                tokens.push(w.to_string());
            }
            word.clear();
        };
        for c in chunk.chars() {
            if c.is_alphanumeric() || c == '_' || (is_apostrophe(c) && !word.is_empty()) {
                word.extend(c.to_lowercase());
            } else {
                flush(&mut word, &mut tokens);
                if is_symbol_token(c) {
                    tokens.push(c.to_string());
                }
            }
        }
        flush(&mut word, &mut tokens);
    }
    tokens
}

fn single_pass(token: &str) -> String {
    let mut t = token;
    if let Some(stem) = t.strip_suffix("'s").or_else(|| t.strip_suffix("\u{2019}s")) {
        if !stem.is_empty() {
            t = stem;
        }
    }
    let len = t.chars().count();
    if len > 4 {
        if let Some(stem) = t.strip_suffix("ies") {
            return format!("{stem}y");
        }
    }
    if len > 3 {
        if let Some(stem) = t.strip_suffix("es") {
            if ["s", "x", "z", "ch", "sh"].iter().any(|s| stem.ends_with(s)) {
                return stem.to_string();
            }
        }
        if t.ends_with('s') && !["ss", "us", "is"].iter().any(|s| t.ends_with(s)) {
            return t[..t.len() - 1].to_string();
        }
    }
    t.to_string()
}

/// Rule-based lemma proxy: possessive `'s`, `-ies -> -y`, sibilant `-es`, plural `-s`.
///
/// Rules are applied until nothing changes, so the result is idempotent.
/// Tokens containing a digit or no letter at all are returned unchanged.
pub fn normalize(token: &str) -> String {
    if !token.chars().any(char::is_alphabetic) || token.chars().any(char::is_numeric) {
        return token.to_string();
    }
    let mut cur = token.to_string();
    loop {
        let next = single_pass(&cur);
        if next == cur {
            return cur;
        }
        cur = next;
    }
}

/// Tokenize then normalize.
pub fn lemmas(text: &str) -> Vec<String> {
    tokenize(text).iter().map(|t| normalize(t)).collect()
}

/// Every 1-, 2- and 3-gram key of `tokens`, in position order.
pub fn grams(tokens: &[String]) -> impl Iterator<Item = String> + '_ {
    (1..=3).flat_map(move |n| tokens.windows(n).map(|w| w.join(&GRAM_SEPARATOR.to_string())))
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    keys: Vec<String>,
    doc_freq: Vec<usize>,
    index: HashMap<String, usize>,
    min_df: usize,
}

impl Vocabulary {
    /// All n-grams with document frequency at least `min_df`, indexed in key order.
    pub fn build<D: AsRef<[String]>>(corpus: &[D], min_df: usize) -> Result<Self> {
        if min_df == 0 {
            return Err(Error::Config("min_df must be >= 1".into()));
        }
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        for doc in corpus {
            let unique: BTreeSet<String> = grams(doc.as_ref()).collect();
            for g in unique {
                *df.entry(g).or_default() += 1;
            }
        }
        let mut vocab = Vocabulary {
            min_df,
            ..Vocabulary::default()
        };
        for (key, freq) in df.into_iter().filter(|(_, f)| *f >= min_df) {
            vocab.index.insert(key.clone(), vocab.keys.len());
            vocab.keys.push(key);
            vocab.doc_freq.push(freq);
        }
        Ok(vocab)
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn min_df(&self) -> usize {
        self.min_df
    }

    pub fn get(&self, key: &str) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn key(&self, index: usize) -> &str {
        &self.keys[index]
    }

    pub fn doc_freq(&self, index: usize) -> usize {
        self.doc_freq[index]
    }

    /// Count known grams of `tokens`; unknown grams are ignored.
    pub fn vectorize(&self, tokens: &[String], binary: bool) -> TextVector {
        let mut counts: BTreeMap<usize, u32> = BTreeMap::new();
        for g in grams(tokens) {
            if let Some(i) = self.get(&g) {
                *counts.entry(i).or_default() += 1;
            }
        }
        TextVector {
            entries: counts
                .into_iter()
                .map(|(i, c)| (i, if binary { 1 } else { c }))
                .collect(),
        }
    }

    /// `index<TAB>gram_key<TAB>doc_freq` per line.
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        for (i, (k, f)) in self.keys.iter().zip(&self.doc_freq).enumerate() {
            writeln!(out, "{i}\t{k}\t{f}")?;
        }
        Ok(())
    }

    /// Read a dump produced by [`Vocabulary::write`].
    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut vocab = Vocabulary::default();
        let mut min_df = usize::MAX;
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let err = |reason: &str| Error::Parse {
                line: i + 1,
                reason: reason.to_string(),
            };
            let mut parts = line.split('\t');
            let (Some(idx), Some(key), Some(freq), None) =
                (parts.next(), parts.next(), parts.next(), parts.next())
            else {
                return Err(err("expected index, key and doc_freq"));
            };
            let idx: usize = idx.parse().map_err(|_| err("bad index"))?;
            let freq: usize = freq.parse().map_err(|_| err("bad doc_freq"))?;
            if idx != vocab.keys.len() {
                return Err(err("indices must be dense and ascending"));
            }
            if vocab.index.insert(key.to_string(), idx).is_some() {
                return Err(err("duplicate key"));
            }
            vocab.keys.push(key.to_string());
            vocab.doc_freq.push(freq);
            min_df = min_df.min(freq);
        }
        vocab.min_df = if vocab.keys.is_empty() { 1 } else { min_df };
        Ok(vocab)
    }
}

/// Sparse `(index, count)` pairs with strictly increasing indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TextVector {
    pub entries: Vec<(usize, u32)>,
}

impl TextVector {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Write the counts into `out` (which is zeroed first).
    pub fn densify_into(&self, out: &mut [f64]) {
        out.fill(0.0);
        for &(i, c) in &self.entries {
            out[i] = f64::from(c);
        }
    }

    pub fn to_dense(&self, len: usize) -> Vec<f64> {
        let mut v = vec![0.0; len];
        self.densify_into(&mut v);
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &[&str]) -> Vec<String> {
        s.iter().map(|t| t.to_string()).collect()
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("Going to @VFest!! 😀"), toks(&["going", "to", "vfest", "😀"]));
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("http://x.co fun"), toks(&["fun"]));
    }

    #[test]
    fn tokenize_details() {
        assert_eq!(tokenize("#Creamfields2017 ... !!"), toks(&["creamfields2017"]));
        assert_eq!(tokenize("the band's set"), toks(&["the", "band's", "set"]));
        assert_eq!(tokenize("yes😀😀no"), toks(&["yes", "😀", "😀", "no"]));
        assert_eq!(tokenize("(https://t.co/abc) ok"), toks(&["ok"]));
        assert_eq!(tokenize("“quoted” — dash"), toks(&["quoted", "dash"]));
        assert_eq!(tokenize("👍🏽 ❤️"), toks(&["👍", "❤"]));
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize("festivals"), "festival");
        assert_eq!(normalize("parties"), "party");
        assert_eq!(normalize("😀"), "😀");
        assert_eq!(normalize("boxes"), "box");
        assert_eq!(normalize("churches"), "church");
        assert_eq!(normalize("band's"), "band");
        assert_eq!(normalize("class"), "class");
        assert_eq!(normalize("bus"), "bus");
        assert_eq!(normalize("is"), "is");
        assert_eq!(normalize("2019s"), "2019s");
    }

    #[test]
    fn normalize_idempotent_on_corpus() {
        let corpus = "The festivals' parties were amazing, boxes of glasses and buses \
            full of friends' tents! Classes canvases quizzes wishes ties dies gases \
            heroes analysis status news series 😀 #VFest @friends going stages";
        for t in tokenize(corpus) {
            let once = normalize(&t);
            assert_eq!(normalize(&once), once, "token {t}");
        }
    }

    #[test]
    fn vocab_single_document() {
        let v = Vocabulary::build(&[toks(&["a", "b", "c"])], 1).unwrap();
        let keys: Vec<&str> = (0..v.len()).map(|i| v.key(i)).collect();
        assert_eq!(keys, vec!["a", "a b", "a b c", "b", "b c", "c"]);
    }

    #[test]
    fn vocab_min_df() {
        let v = Vocabulary::build(&[toks(&["a", "b"]), toks(&["a", "c"])], 2).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v.get("a"), Some(0));
        assert_eq!(v.doc_freq(0), 2);
        let empty: Vec<Vec<String>> = Vec::new();
        assert!(Vocabulary::build(&empty, 2).unwrap().is_empty());
        assert!(Vocabulary::build(&empty, 0).is_err());
    }

    #[test]
    fn vectorize_counts() {
        let v = Vocabulary::build(&[toks(&["a", "b"]), toks(&["a"])], 1).unwrap();
        // keys sorted: a, a b, b
        let tv = v.vectorize(&toks(&["a", "a", "b"]), false);
        assert_eq!(tv.entries, vec![(0, 2), (1, 1), (2, 1)]);
        assert_eq!(v.vectorize(&toks(&["a", "a", "b"]), true).entries, vec![(0, 1), (1, 1), (2, 1)]);
        assert!(v.vectorize(&toks(&["zz", "yy"]), false).is_empty());
        assert!(v.vectorize(&[], false).is_empty());
        assert_eq!(tv.to_dense(3), vec![2.0, 1.0, 1.0]);
    }

    #[test]
    fn vocab_dump_roundtrip() {
        let v = Vocabulary::build(&[toks(&["x", "y", "z"]), toks(&["x", "y"])], 1).unwrap();
        let mut buf = Vec::new();
        v.write(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("0\tx\t2\n1\tx y\t2\n"));
        let back = Vocabulary::read(buf.as_slice()).unwrap();
        assert_eq!(back.len(), v.len());
        assert_eq!(back.get("x y z"), v.get("x y z"));
        assert!(Vocabulary::read("1\tx\t2\n".as_bytes()).is_err());
    }
}
