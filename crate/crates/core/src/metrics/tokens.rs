//! Canonical tokenizer used by every lexical metric.

/// Lowercased token sequence. Only [`TokenSeq::new`] builds one, so all
/// metric inputs share the same tokenization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSeq {
    tokens: Vec<String>,
}

impl TokenSeq {
    /// Lowercases `text` and splits it on every run of non-alphanumeric
    /// characters.
    pub fn new(text: &str) -> Self {
        let tokens = text
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .map(str::to_lowercase)
            .collect();
        Self { tokens }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// All contiguous n-grams, in order. Empty when `n` exceeds the length.
    pub fn ngrams(&self, n: usize) -> impl Iterator<Item = &[String]> {
        let n = n.max(1);
        self.tokens.windows(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_on_punctuation_and_lowercases() {
        let t = TokenSeq::new("Notre-Dame's spire, COLLAPSED!");
        assert_eq!(t.tokens(), ["notre", "dame", "s", "spire", "collapsed"]);
    }

    #[test]
    fn bigrams() {
        let t = TokenSeq::new("a b c");
        let grams: Vec<_> = t.ngrams(2).map(|g| g.join(" ")).collect();
        assert_eq!(grams, ["a b", "b c"]);
        assert_eq!(t.ngrams(4).count(), 0);
    }
}
