//! Seeded synthetic corpora for tests and benchmarks.
//!
//! Ambiguous words are built from the consonants `b d g k m n p s` and end
//! in `la`; filler words start with one of `t z r f v`, so the two never
//! share a wordkey.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{normalize, Corpus};

const KEY_CONS: [char; 8] = ['b', 'd', 'g', 'k', 'm', 'n', 'p', 's'];
const FILL_CONS: [char; 5] = ['t', 'z', 'r', 'f', 'v'];
const MID_CONS: [char; 9] = ['b', 'd', 'g', 'k', 'l', 'm', 'n', 'p', 's'];
const VOWELS: [char; 5] = ['a', 'e', 'i', 'o', 'u'];
const ACUTE: char = '\u{301}';
const GRAVE: char = '\u{300}';
const DOT: char = '\u{323}';

/// The `i`-th ambiguous wordkey, e.g. `bala`, `dala`, …, `bela`.
pub fn wordkey(i: usize) -> String {
    let c = KEY_CONS[i % KEY_CONS.len()];
    let v = VOWELS[(i / KEY_CONS.len()) % VOWELS.len()];
    let tail = i / (KEY_CONS.len() * VOWELS.len());
    if tail == 0 {
        format!("{c}{v}la")
    } else {
        format!("{c}{v}l{}", "a".repeat(tail + 1))
    }
}

/// The `j`-th spelling of `key`; spelling 0 is the bare wordkey.
pub fn variant(key: &str, j: usize) -> String {
    let chars: Vec<char> = key.chars().collect();
    let vowels: Vec<usize> = (0..chars.len()).filter(|&i| VOWELS.contains(&chars[i])).collect();
    let (first, last) = (vowels[0], *vowels.last().unwrap_or(&vowels[0]));
    let marks: &[(usize, char)] = match j {
        0 => &[],
        1 => &[(first, ACUTE)],
        2 => &[(first, GRAVE)],
        3 => &[(first, DOT)],
        4 => &[(last, ACUTE)],
        5 => &[(last, GRAVE)],
        6 => &[(first, ACUTE), (last, GRAVE)],
        _ => &[(first, DOT), (last, ACUTE)],
    };
    let mut out = String::new();
    for (i, c) in chars.iter().enumerate() {
        out.push(*c);
        for (p, m) in marks {
            if *p == i {
                out.push(*m);
            }
        }
    }
    normalize(&out)
}

/// The `i`-th filler word. Every seventh filler carries a mark and is
/// never seen bare.
pub fn filler(i: usize) -> String {
    let c1 = FILL_CONS[i % 5];
    let v1 = VOWELS[(i / 5) % 5];
    let c2 = MID_CONS[(i / 25) % 9];
    let v2 = VOWELS[(i / 225) % 5];
    let extra = i / 1125;
    let mut w = format!("{c1}{v1}{c2}{v2}");
    for _ in 0..extra {
        w.push_str("no");
    }
    if i.is_multiple_of(7) {
        variant(&w, 3)
    } else {
        w
    }
}

/// Variant counts for one wordkey of [`gate_corpus`].
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedWordkey {
    pub wordkey: String,
    pub variants: Vec<(String, usize)>,
}

/// Share patterns around the default gates: rare variants at 4 % and 6 %,
/// dominant variants at 74 %, 75 % and 76 %.
const SHARES: [&[f64]; 10] = [
    &[0.5, 0.5],
    &[0.74, 0.26],
    &[0.76, 0.24],
    &[0.75, 0.25],
    &[0.7, 0.26, 0.04],
    &[0.7, 0.24, 0.06],
    &[0.9, 0.1],
    &[0.45, 0.45, 0.05, 0.05],
    &[0.96, 0.04],
    &[0.4, 0.3, 0.2, 0.1],
];

/// Wordkey totals; with 50 000 tokens the frequency gate sits at 5.
const TOTALS: [usize; 8] = [3, 5, 6, 40, 120, 300, 4, 600];

fn lines_from_words<R: Rng>(words: Vec<String>, rng: &mut R) -> String {
    let mut text = String::new();
    let mut i = 0;
    while i < words.len() {
        let len = rng.random_range(4..16).min(words.len() - i);
        for (k, w) in words[i..i + len].iter().enumerate() {
            if k > 0 {
                text.push(' ');
            }
            if k == 0 {
                let mut cs = w.chars();
                let first = cs
                    .next()
                    .map(|c| c.to_uppercase().collect::<String>())
                    .unwrap_or_default();
                text.push_str(&first);
                text.push_str(cs.as_str());
            } else {
                text.push_str(w);
            }
            if k + 1 < len && rng.random_bool(0.05) {
                text.push_str(" ,");
            }
        }
        if rng.random_bool(0.1) {
            text.push_str(&format!(" {}", rng.random_range(1..200)));
        }
        text.push_str(" .\n");
        i += len;
    }
    text
}

/// A marked corpus of roughly `words` word tokens in which `wordkeys`
/// ambiguous wordkeys are planted with variant shares close to the default
/// dataset gates. Returns the corpus and what was planted.
pub fn gate_corpus(words: usize, wordkeys: usize, seed: u64) -> (Corpus, Vec<PlantedWordkey>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut planted = Vec::with_capacity(wordkeys);
    let mut bag: Vec<String> = Vec::with_capacity(words);
    for i in 0..wordkeys {
        let key = wordkey(i);
        let shares = SHARES[i % SHARES.len()];
        let total = TOTALS[(i / 2) % TOTALS.len()] * (1 + i / 20);
        let offset = i % 3;
        let variants: Vec<(String, usize)> = shares
            .iter()
            .enumerate()
            .map(|(j, s)| (variant(&key, (j + offset) % 8), (s * total as f64).round() as usize))
            .filter(|(_, c)| *c > 0)
            .collect();
        for (v, c) in &variants {
            bag.extend(std::iter::repeat_n(v.clone(), *c));
        }
        planted.push(PlantedWordkey { wordkey: key, variants });
    }
    let fillers = 800;
    while bag.len() < words {
        let u: f64 = rng.random();
        bag.push(filler((u * u * fillers as f64) as usize));
    }
    bag.shuffle(&mut rng);
    (Corpus::from_text(&lines_from_words(bag, &mut rng), true), planted)
}

/// One wordkey of [`bigram_corpus`]: each variant always follows its own
/// trigger word.
#[derive(Debug, Clone, PartialEq)]
pub struct BigramWordkey {
    pub wordkey: String,
    /// (variant, trigger, count), majority first.
    pub variants: Vec<(String, String, usize)>,
}

impl BigramWordkey {
    pub fn majority_share(&self) -> f64 {
        let total: usize = self.variants.iter().map(|v| v.2).sum();
        self.variants[0].2 as f64 / total as f64
    }
}

/// A corpus where the variant of every ambiguous word is fully determined
/// by the word before it. Each line holds one ambiguous occurrence.
/// Wordkey `i` has two variants with majority share `shares[i]`.
pub fn bigram_corpus(shares: &[f64], per_wordkey: usize, seed: u64) -> (Corpus, Vec<BigramWordkey>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut planted = Vec::new();
    let mut lines: Vec<String> = Vec::new();
    for (i, &share) in shares.iter().enumerate() {
        let key = wordkey(i);
        let major = (share * per_wordkey as f64).round() as usize;
        let variants = vec![
            (variant(&key, 1), format!("ta{}", wordkey(2 * i)), major),
            (
                variant(&key, 3),
                format!("ta{}", wordkey(2 * i + 1)),
                per_wordkey - major,
            ),
        ];
        for (v, trigger, count) in &variants {
            for _ in 0..*count {
                let before: Vec<String> = (0..rng.random_range(0..4))
                    .map(|_| filler(rng.random_range(1..300)))
                    .collect();
                let after: Vec<String> = (0..rng.random_range(0..4))
                    .map(|_| filler(rng.random_range(1..300)))
                    .collect();
                let mut words = before;
                words.push(trigger.clone());
                words.push(v.clone());
                words.extend(after);
                lines.push(words.join(" ") + " .");
            }
        }
        planted.push(BigramWordkey { wordkey: key, variants });
    }
    lines.shuffle(&mut rng);
    (Corpus::from_text(&lines.join("\n"), true), planted)
}
