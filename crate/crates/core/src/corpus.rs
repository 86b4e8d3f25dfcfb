//! Corpus ingestion: Unicode normalization, diacritic stripping, whitespace
//! tokenization and corpus statistics.
//!
//! A *wordkey* is a word with every nonspacing combining mark removed. All
//! the marked spellings that share a wordkey are its *variants*.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;
use unicode_properties::{GeneralCategory, GeneralCategoryGroup, UnicodeGeneralCategory};

use crate::error::{Error, Result};

/// NFC-compose `text`.
pub fn normalize(text: &str) -> String {
    text.nfc().collect()
}

/// Decode UTF-8 and NFC-compose it.
pub fn normalize_bytes(bytes: &[u8]) -> Result<String> {
    match std::str::from_utf8(bytes) {
        Ok(s) => Ok(normalize(s)),
        Err(e) => Err(Error::Utf8 {
            offset: e.valid_up_to(),
        }),
    }
}

fn is_nonspacing_mark(c: char) -> bool {
    c.general_category() == GeneralCategory::NonspacingMark
}

/// Remove every nonspacing combining mark (category Mn) from `word`.
///
/// The word is decomposed first so that precomposed letters such as `é` or
/// `ọ` lose their marks as well; the result is recomposed to NFC. Case is
/// preserved.
pub fn strip_diacritics(word: &str) -> String {
    let bare: String = word.nfd().filter(|&c| !is_nonspacing_mark(c)).collect();
    normalize(&bare)
}

/// True when `word` carries at least one nonspacing mark.
pub fn has_diacritics(word: &str) -> bool {
    word.nfd().any(is_nonspacing_mark)
}

/// Lowercase and re-compose (lowercasing can produce decomposed sequences).
pub fn lowercase(text: &str) -> String {
    normalize(&text.to_lowercase())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TokenKind {
    Word,
    Punctuation,
    Digit,
    Symbol,
}

impl TokenKind {
    pub fn classify(surface: &str) -> TokenKind {
        let mut digit = false;
        let mut all_punct = !surface.is_empty();
        for c in surface.chars() {
            match c.general_category_group() {
                GeneralCategoryGroup::Letter => return TokenKind::Word,
                GeneralCategoryGroup::Number => digit = true,
                GeneralCategoryGroup::Punctuation => {}
                _ => all_punct = false,
            }
        }
        if digit {
            TokenKind::Digit
        } else if all_punct {
            TokenKind::Punctuation
        } else {
            TokenKind::Symbol
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub surface: String,
    pub kind: TokenKind,
    pub wordkey: String,
    /// No whitespace separated this token from the next in the input.
    pub joined: bool,
}

impl Token {
    pub fn new(surface: &str) -> Token {
        Token {
            surface: surface.to_owned(),
            kind: TokenKind::classify(surface),
            wordkey: strip_diacritics(surface),
            joined: false,
        }
    }

    /// A token with a new surface in the same place.
    pub fn respelled(&self, surface: &str) -> Token {
        Token {
            joined: self.joined,
            ..Token::new(surface)
        }
    }

    pub fn is_word(&self) -> bool {
        self.kind == TokenKind::Word
    }

    pub fn wordkey_lower(&self) -> String {
        lowercase(&self.wordkey)
    }
}

const CLITIC_MARKS: [char; 3] = ['-', '\'', '\u{2019}'];
const MAX_CLITIC_LETTERS: usize = 2;

/// Length in bytes of a leading clitic such as `na-` or `n'`: one or two
/// letters closed by a hyphen or apostrophe and followed by more text.
fn clitic_prefix(chunk: &str) -> Option<usize> {
    let mut letters = 0;
    for (i, c) in chunk.char_indices() {
        if CLITIC_MARKS.contains(&c) {
            let end = i + c.len_utf8();
            return (letters > 0 && end < chunk.len()).then_some(end);
        }
        match c.general_category_group() {
            GeneralCategoryGroup::Letter => letters += 1,
            GeneralCategoryGroup::Mark => {}
            _ => return None,
        }
        if letters > MAX_CLITIC_LETTERS {
            return None;
        }
    }
    None
}

/// Split an NFC line on whitespace.
///
/// Input is expected to be pre-tokenized. The only further split detaches
/// short clitics, so `na-agba` yields the auxiliary `na-` and `agba`, and
/// `n'elu` yields `n'` and `elu`. Longer hyphenated compounds (`ulo-aku`)
/// stay whole.
pub fn tokenize(line: &str) -> Vec<Token> {
    let mut out = Vec::new();
    for mut chunk in line.split_whitespace() {
        while let Some(end) = clitic_prefix(chunk) {
            out.push(Token {
                joined: true,
                ..Token::new(&chunk[..end])
            });
            chunk = &chunk[end..];
        }
        out.push(Token::new(chunk));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    pub lines: Vec<Vec<Token>>,
    pub is_marked: bool,
}

impl Corpus {
    /// Build a corpus from raw text, one sentence per line.
    pub fn from_text(text: &str, is_marked: bool) -> Corpus {
        let lines = text.lines().map(|l| tokenize(&normalize(l))).collect();
        Corpus { lines, is_marked }
    }

    pub fn from_bytes(bytes: &[u8], is_marked: bool) -> Result<Corpus> {
        let text = normalize_bytes(bytes)?;
        Ok(Corpus::from_text(&text, is_marked))
    }

    pub fn read(path: impl AsRef<Path>, is_marked: bool) -> Result<Corpus> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Corpus::from_bytes(&bytes, is_marked)
    }

    /// Same shape with every word replaced by its wordkey. Non-word tokens
    /// are kept verbatim.
    pub fn stripped(&self) -> Corpus {
        let lines = self
            .lines
            .iter()
            .map(|line| {
                line.iter()
                    .map(|t| {
                        if t.is_word() {
                            t.respelled(&t.wordkey)
                        } else {
                            t.clone()
                        }
                    })
                    .collect()
            })
            .collect();
        Corpus {
            lines,
            is_marked: false,
        }
    }

    pub fn lowercased(&self) -> Corpus {
        let lines = self
            .lines
            .iter()
            .map(|line| line.iter().map(|t| t.respelled(&lowercase(&t.surface))).collect())
            .collect();
        Corpus {
            lines,
            is_marked: self.is_marked,
        }
    }

    pub fn token_count(&self) -> usize {
        self.lines.iter().map(Vec::len).sum()
    }

    pub fn word_count(&self) -> usize {
        self.words().count()
    }

    pub fn words(&self) -> impl Iterator<Item = &Token> {
        self.lines.iter().flatten().filter(|t| t.is_word())
    }

    /// Tokens separated by single spaces (none after a detached clitic),
    /// newline-terminated lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for line in &self.lines {
            let mut glue = true;
            for t in line {
                if !glue {
                    out.push(' ');
                }
                out.push_str(&t.surface);
                glue = t.joined;
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CorpusStats {
    pub lines: usize,
    pub all_tokens: usize,
    pub words_only: usize,
    pub vocab_size: usize,
    pub all_diac_words: usize,
    pub unique_diac_words: usize,
    pub amb_diac_words: usize,
    pub diac_vocab_size: usize,
    pub all_wordkeys: usize,
    pub unique_wordkeys: usize,
    pub ambiguous_wordkeys: usize,
    /// variant count → number of ambiguous wordkeys with that many variants
    pub variants_histogram: BTreeMap<usize, usize>,
}

/// Count tokens, words, diacritized words and wordkeys. Case is taken as
/// found in the corpus.
pub fn compute_stats(corpus: &Corpus) -> CorpusStats {
    let mut stats = CorpusStats {
        lines: corpus.lines.len(),
        all_tokens: corpus.token_count(),
        ..Default::default()
    };

    let mut vocab: HashSet<&str> = HashSet::new();
    let mut variants: HashMap<&str, HashSet<&str>> = HashMap::new();
    for t in corpus.words() {
        stats.words_only += 1;
        vocab.insert(&t.surface);
        variants.entry(&t.wordkey).or_default().insert(&t.surface);
    }
    stats.vocab_size = vocab.len();
    stats.all_wordkeys = variants.len();

    for forms in variants.values() {
        if forms.len() >= 2 {
            stats.ambiguous_wordkeys += 1;
            *stats.variants_histogram.entry(forms.len()).or_default() += 1;
        } else {
            stats.unique_wordkeys += 1;
        }
    }

    let mut diac_vocab: HashSet<&str> = HashSet::new();
    for t in corpus.words() {
        if t.surface == t.wordkey {
            continue;
        }
        stats.all_diac_words += 1;
        diac_vocab.insert(&t.surface);
        if variants[t.wordkey.as_str()].len() >= 2 {
            stats.amb_diac_words += 1;
        } else {
            stats.unique_diac_words += 1;
        }
    }
    stats.diac_vocab_size = diac_vocab.len();
    stats
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn combining_acute_composes() {
        assert_eq!(normalize("e\u{301}"), "\u{e9}");
        assert_eq!(normalize("abc"), "abc");
    }

    #[test]
    fn invalid_utf8_reports_offset() {
        let err = normalize_bytes(b"ab\xffcd").unwrap_err();
        assert!(matches!(err, Error::Utf8 { offset: 2 }));
    }

    #[test]
    fn strips_igbo_marks() {
        assert_eq!(strip_diacritics("ákwà"), "akwa");
        assert_eq!(strip_diacritics("Chineke"), "Chineke");
        assert_eq!(strip_diacritics("Ọ"), "O");
        assert_eq!(strip_diacritics("sị̀"), "si");
        assert_eq!(strip_diacritics("ụ̄"), "u");
    }

    #[test]
    fn stripped_words_have_no_marks() {
        let words = ["ákwà", "àkwá", "ụ́lọ̀", "nwanyị", "àhụ̀", "ọ̄", "Ṅ"];
        for w in words {
            assert!(!strip_diacritics(w).nfd().any(is_nonspacing_mark), "{w}");
        }
    }

    #[test]
    fn tokenize_keeps_special_tokens() {
        let toks = tokenize("Ọ na-agba egwu .");
        let got: Vec<_> = toks.iter().map(|t| (t.surface.as_str(), t.kind)).collect();
        assert_eq!(
            got,
            vec![
                ("Ọ", TokenKind::Word),
                ("na-", TokenKind::Word),
                ("agba", TokenKind::Word),
                ("egwu", TokenKind::Word),
                (".", TokenKind::Punctuation),
            ]
        );
        assert!(tokenize("").is_empty());
        let surf = |s: &str| tokenize(s).into_iter().map(|t| t.surface).collect::<Vec<_>>();
        assert_eq!(surf("Ọdị n’elu tebulu"), ["Ọdị", "n’", "elu", "tebulu"]);
        assert_eq!(surf("ego ulo-aku"), ["ego", "ulo-aku"]);
        assert_eq!(surf("na- -"), ["na-", "-"]);
    }

    #[test]
    fn plain_lines_round_trip() {
        let lines = ["3 Chineke wee sị̀ :", "ụlọ akwụkwọ dị mma .", "a b c"];
        for l in lines {
            let joined: Vec<_> = tokenize(l).into_iter().map(|t| t.surface).collect();
            assert_eq!(joined.join(" "), l);
        }
    }

    #[test]
    fn token_kinds() {
        assert_eq!(TokenKind::classify("3"), TokenKind::Digit);
        assert_eq!(TokenKind::classify("3:16"), TokenKind::Digit);
        assert_eq!(TokenKind::classify(":"), TokenKind::Punctuation);
        assert_eq!(TokenKind::classify("$"), TokenKind::Symbol);
        assert_eq!(TokenKind::classify("a1"), TokenKind::Word);
    }

    #[test]
    fn stats_on_tiny_corpus() {
        let c = Corpus::from_text("ákwà ákwá\negg", true);
        let s = compute_stats(&c);
        assert_eq!(s.lines, 2);
        assert_eq!(s.all_wordkeys, 2);
        assert_eq!(s.ambiguous_wordkeys, 1);
        assert_eq!(s.unique_wordkeys, 1);
        assert_eq!(s.all_diac_words, 2);
        assert_eq!(s.amb_diac_words, 2);
        assert_eq!(s.diac_vocab_size, 2);
        assert_eq!(s.variants_histogram.get(&2), Some(&1));
    }

    #[test]
    fn stats_on_empty_corpus() {
        assert_eq!(compute_stats(&Corpus::default()), CorpusStats::default());
        assert_eq!(compute_stats(&Corpus::from_text("", true)), CorpusStats::default());
    }

    #[test]
    fn stripping_preserves_shape() {
        let c = Corpus::from_text("Ọ na-agba egwu .\n3 Chineke wee sị̀ :\n", true);
        let s = c.stripped();
        assert!(!s.is_marked);
        for (a, b) in c.lines.iter().zip(&s.lines) {
            assert_eq!(a.len(), b.len());
        }
        assert_eq!(s.to_text(), "O na-agba egwu .\n3 Chineke wee si :\n");
    }

    fn word_strategy() -> impl Strategy<Value = String> {
        let letters = prop::sample::select(vec![
            'a', 'e', 'i', 'o', 'u', 'k', 'w', 'n', 'ị', 'ọ', 'ụ', 'á', 'à', 'é', 'è', 'ó', 'ò', 'ṅ', 'ā', '\u{301}',
            '\u{300}', '\u{304}', '\u{323}', 'A', 'Ọ',
        ]);
        prop::collection::vec(letters, 1..10).prop_map(|v| v.into_iter().collect())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn normalize_is_idempotent(s in any::<String>()) {
            let once = normalize(&s);
            prop_assert_eq!(normalize(&once), once.clone());
            prop_assert!(unicode_normalization::is_nfc(&once));
        }

        #[test]
        fn strip_is_idempotent_and_shrinks(w in word_strategy()) {
            let s = strip_diacritics(&normalize(&w));
            prop_assert_eq!(strip_diacritics(&s), s.clone());
            prop_assert!(s.chars().count() <= normalize(&w).chars().count());
        }

        #[test]
        fn strip_commutes_with_normalize(s in any::<String>()) {
            prop_assert_eq!(normalize(&strip_diacritics(&s)), strip_diacritics(&normalize(&s)));
        }

        #[test]
        fn text_round_trips_through_tokens(lines in prop::collection::vec(
            prop::collection::vec((word_strategy(), prop::sample::select(vec!["", "-", "'", "’"])), 1..6), 0..6)
        ) {
            let text: String = lines
                .iter()
                .map(|l| l.iter().map(|(w, sep)| format!("{w}{sep}{w}")).collect::<Vec<_>>().join(" ") + "\n")
                .collect();
            let text = normalize(&text);
            prop_assert_eq!(Corpus::from_text(&text, true).to_text(), text);
        }

        #[test]
        fn stripped_stats_keep_wordkeys(lines in prop::collection::vec(prop::collection::vec(word_strategy(), 0..6), 0..6)) {
            let text: Vec<String> = lines.iter().map(|l| l.join(" ")).collect();
            let c = Corpus::from_text(&text.join("\n"), true);
            let marked = compute_stats(&c);
            let bare = compute_stats(&c.stripped());
            prop_assert_eq!(marked.all_wordkeys, bare.all_wordkeys);
            prop_assert!(bare.vocab_size <= marked.vocab_size);
            prop_assert_eq!(marked.all_wordkeys, marked.unique_wordkeys + marked.ambiguous_wordkeys);
            prop_assert_eq!(marked.variants_histogram.values().sum::<usize>(), marked.ambiguous_wordkeys);
            prop_assert!(marked.words_only <= marked.all_tokens);
            prop_assert!(marked.vocab_size <= marked.words_only);
        }
    }
}
