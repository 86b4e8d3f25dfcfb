use crate::corpus::TokenKind;
use crate::error::{Error, Result};

/// Context words picked around a target: a run of at most `window_size`
/// words that centres the target where possible and stops at the sentence
/// ends. The target itself is not part of the context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StickyWindow {
    pub window_size: usize,
    pub context: Vec<String>,
    /// Sentence positions of the context words.
    pub positions: Vec<usize>,
}

fn word_positions<S: AsRef<str>>(tokens: &[S], target: usize) -> Vec<usize> {
    (0..tokens.len())
        .filter(|&i| i == target || TokenKind::classify(tokens[i].as_ref()) == TokenKind::Word)
        .collect()
}

/// Extract the sticky window of odd size `n` around `tokens[target]`.
///
/// Punctuation, digits and symbols are removed before the window is laid
/// out, so the window always holds actual words.
pub fn extract_window<S: AsRef<str>>(tokens: &[S], target: usize, n: usize) -> Result<StickyWindow> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::Param(format!("window size {n} must be odd and at least 3")));
    }
    if target >= tokens.len() {
        return Err(Error::Param(format!(
            "target {target} out of range for {} tokens",
            tokens.len()
        )));
    }
    let words = word_positions(tokens, target);
    let centre = words.binary_search(&target).expect("target is always kept");
    let len = n.min(words.len());
    let start = centre.saturating_sub((n - 1) / 2).min(words.len() - len);
    let positions: Vec<usize> = words[start..start + len]
        .iter()
        .copied()
        .filter(|&i| i != target)
        .collect();
    Ok(StickyWindow {
        window_size: n,
        context: positions.iter().map(|&i| tokens[i].as_ref().to_owned()).collect(),
        positions,
    })
}

/// Sticky window when `n` is given, every other word of the sentence
/// otherwise.
pub fn context_words<S: AsRef<str>>(tokens: &[S], target: usize, n: Option<usize>) -> Result<StickyWindow> {
    match n {
        Some(n) => extract_window(tokens, target, n),
        None => {
            if target >= tokens.len() {
                return Err(Error::Param(format!("target {target} out of range")));
            }
            let positions: Vec<usize> = word_positions(tokens, target)
                .into_iter()
                .filter(|&i| i != target)
                .collect();
            Ok(StickyWindow {
                window_size: tokens.len(),
                context: positions.iter().map(|&i| tokens[i].as_ref().to_owned()).collect(),
                positions,
            })
        }
    }
}
