//! Suffix-stripping stemmer.
//!
//! This is the English (Porter2) Snowball algorithm with one addition: an
//! agentive or comparative `-er` after a doubled `m`, `n`, `p` or `g` is
//! stripped when it lies in R1 and the double is reduced (`stemmer` ->
//! `stem`, `runner` -> `run`, `bigger` -> `big`), so that agent nouns share
//! a stem with their verb. Common nouns that only look agentive
//! (`dinner`, `pepper`) are listed and keep the plain result.

const EXCEPTIONS: &[(&str, &str)] = &[
    ("skis", "ski"),
    ("skies", "sky"),
    ("dying", "die"),
    ("lying", "lie"),
    ("tying", "tie"),
    ("idly", "idl"),
    ("gently", "gentl"),
    ("ugly", "ugli"),
    ("early", "earli"),
    ("only", "onli"),
    ("singly", "singl"),
    ("sky", "sky"),
    ("news", "news"),
    ("howe", "howe"),
    ("atlas", "atlas"),
    ("cosmos", "cosmos"),
    ("bias", "bias"),
    ("andes", "andes"),
];

const INVARIANT_AFTER_1A: &[&str] = &[
    "inning", "outing", "canning", "herring", "earring", "proceed", "exceed", "succeed",
];

const NOT_AGENTIVE: &[&str] = &[
    "banner", "copper", "dagger", "dinner", "hammer", "inner", "manner", "pepper", "slipper", "summer",
    "supper", "trigger", "upper", "zipper",
];

/// Stem a single lowercase-able word. Empty input gives an empty stem.
pub fn stem(word: &str) -> String {
    let lower: String = word
        .trim()
        .to_lowercase()
        .chars()
        .map(|c| if c == '\u{2019}' { '\'' } else { c })
        .collect();
    if lower.chars().count() <= 2 {
        return lower;
    }
    if let Some((_, out)) = EXCEPTIONS.iter().find(|(w, _)| *w == lower) {
        return out.to_string();
    }
    let mut w = Word::new(&lower);
    w.step0();
    w.step1a();
    if INVARIANT_AFTER_1A.contains(&w.as_string().as_str()) {
        return w.finish();
    }
    w.step1b();
    w.step1c();
    w.step2();
    w.step3();
    let singular = lower.strip_suffix('s').unwrap_or(&lower);
    w.step4(!NOT_AGENTIVE.contains(&singular));
    w.step5();
    w.finish()
}

/// Stem for a token surface: alphabetic words are stemmed, anything else
/// (punctuation, numbers) is only lowercased.
pub fn stem_token(surface: &str) -> String {
    if surface.chars().any(char::is_alphabetic) {
        stem(surface)
    } else {
        surface.to_lowercase()
    }
}

struct Word {
    chars: Vec<char>,
    r1: usize,
    r2: usize,
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

fn is_double(a: char, b: char) -> bool {
    a == b && matches!(a, 'b' | 'd' | 'f' | 'g' | 'm' | 'n' | 'p' | 'r' | 't')
}

fn is_li_ending(c: char) -> bool {
    matches!(c, 'c' | 'd' | 'e' | 'g' | 'h' | 'k' | 'm' | 'n' | 'r' | 't')
}

impl Word {
    fn new(word: &str) -> Word {
        let mut chars: Vec<char> = word.chars().collect();
        if chars.first() == Some(&'\'') {
            chars.remove(0);
        }
        // Consonantal y becomes Y.
        for i in 0..chars.len() {
            if chars[i] == 'y' && (i == 0 || is_vowel(chars[i - 1])) {
                chars[i] = 'Y';
            }
        }
        let mut w = Word { chars, r1: 0, r2: 0 };
        w.mark_regions();
        w
    }

    fn mark_regions(&mut self) {
        let s = self.as_string();
        let r1 = ["gener", "commun", "arsen"]
            .iter()
            .find(|p| s.starts_with(*p))
            .map(|p| p.len())
            .unwrap_or_else(|| self.region_after(0));
        self.r1 = r1;
        self.r2 = self.region_after(r1);
    }

    /// Index after the first non-vowel that follows a vowel, scanning from
    /// `from`.
    fn region_after(&self, from: usize) -> usize {
        let c = &self.chars;
        let mut i = from;
        while i + 1 < c.len() {
            if is_vowel(c[i]) && !is_vowel(c[i + 1]) {
                return i + 2;
            }
            i += 1;
        }
        c.len()
    }

    fn as_string(&self) -> String {
        self.chars.iter().collect()
    }

    fn len(&self) -> usize {
        self.chars.len()
    }

    fn ends_with(&self, suffix: &str) -> bool {
        let n = suffix.chars().count();
        n <= self.len() && self.chars[self.len() - n..].iter().copied().eq(suffix.chars())
    }

    fn longest<'a>(&self, suffixes: &[&'a str]) -> Option<&'a str> {
        suffixes
            .iter()
            .filter(|s| self.ends_with(s))
            .max_by_key(|s| s.len())
            .copied()
    }

    fn suffix_start(&self, suffix: &str) -> usize {
        self.len() - suffix.chars().count()
    }

    fn replace(&mut self, suffix: &str, with: &str) {
        let start = self.suffix_start(suffix);
        self.chars.truncate(start);
        self.chars.extend(with.chars());
    }

    fn in_r1(&self, suffix: &str) -> bool {
        self.suffix_start(suffix) >= self.r1
    }

    fn in_r2(&self, suffix: &str) -> bool {
        self.suffix_start(suffix) >= self.r2
    }

    fn has_vowel(&self, end: usize) -> bool {
        self.chars[..end].iter().any(|&c| is_vowel(c))
    }

    fn ends_short_syllable(&self, end: usize) -> bool {
        let c = &self.chars[..end];
        match end {
            0 | 1 => false,
            2 => is_vowel(c[0]) && !is_vowel(c[1]),
            _ => {
                let (a, b, d) = (c[end - 3], c[end - 2], c[end - 1]);
                !is_vowel(a) && is_vowel(b) && !is_vowel(d) && !matches!(d, 'w' | 'x' | 'Y')
            }
        }
    }

    fn is_short(&self) -> bool {
        self.r1 >= self.len() && self.ends_short_syllable(self.len())
    }

    fn step0(&mut self) {
        if let Some(s) = self.longest(&["'s'", "'s", "'"]) {
            self.replace(s, "");
        }
    }

    fn step1a(&mut self) {
        match self.longest(&["sses", "ied", "ies", "us", "ss", "s"]) {
            Some("sses") => self.replace("sses", "ss"),
            Some(s @ ("ied" | "ies")) => {
                if self.suffix_start(s) > 1 {
                    self.replace(s, "i");
                } else {
                    self.replace(s, "ie");
                }
            }
            Some("s") => {
                let start = self.suffix_start("s");
                if start >= 2 && self.has_vowel(start - 1) {
                    self.replace("s", "");
                }
            }
            _ => {}
        }
    }

    fn step1b(&mut self) {
        match self.longest(&["eed", "eedly", "ed", "edly", "ing", "ingly"]) {
            Some(s @ ("eed" | "eedly")) => {
                if self.in_r1(s) {
                    self.replace(s, "ee");
                }
            }
            Some(s) => {
                let start = self.suffix_start(s);
                if self.has_vowel(start) {
                    self.replace(s, "");
                    if self.ends_with("at") || self.ends_with("bl") || self.ends_with("iz") {
                        self.chars.push('e');
                    } else if self.len() >= 2
                        && is_double(self.chars[self.len() - 2], self.chars[self.len() - 1])
                    {
                        self.chars.pop();
                    } else if self.is_short() {
                        self.chars.push('e');
                    }
                }
            }
            None => {}
        }
    }

    fn step1c(&mut self) {
        let n = self.len();
        if n > 2 && matches!(self.chars[n - 1], 'y' | 'Y') && !is_vowel(self.chars[n - 2]) {
            self.chars[n - 1] = 'i';
        }
    }

    fn step2(&mut self) {
        const RULES: &[(&str, &str)] = &[
            ("tional", "tion"),
            ("enci", "ence"),
            ("anci", "ance"),
            ("abli", "able"),
            ("entli", "ent"),
            ("izer", "ize"),
            ("ization", "ize"),
            ("ational", "ate"),
            ("ation", "ate"),
            ("ator", "ate"),
            ("alism", "al"),
            ("aliti", "al"),
            ("alli", "al"),
            ("fulness", "ful"),
            ("ousli", "ous"),
            ("ousness", "ous"),
            ("iveness", "ive"),
            ("iviti", "ive"),
            ("biliti", "ble"),
            ("bli", "ble"),
            ("ogi", "og"),
            ("fulli", "ful"),
            ("lessli", "less"),
            ("li", ""),
        ];
        let suffixes: Vec<&str> = RULES.iter().map(|(s, _)| *s).collect();
        let Some(s) = self.longest(&suffixes) else { return };
        if !self.in_r1(s) {
            return;
        }
        let start = self.suffix_start(s);
        match s {
            "ogi" => {
                if start > 0 && self.chars[start - 1] == 'l' {
                    self.replace(s, "og");
                }
            }
            "li" => {
                if start > 0 && is_li_ending(self.chars[start - 1]) {
                    self.replace(s, "");
                }
            }
            _ => {
                let to = RULES.iter().find(|(f, _)| *f == s).unwrap().1;
                self.replace(s, to);
            }
        }
    }

    fn step3(&mut self) {
        const RULES: &[(&str, &str)] = &[
            ("tional", "tion"),
            ("ational", "ate"),
            ("alize", "al"),
            ("icate", "ic"),
            ("iciti", "ic"),
            ("ical", "ic"),
            ("ful", ""),
            ("ness", ""),
            ("ative", ""),
        ];
        let suffixes: Vec<&str> = RULES.iter().map(|(s, _)| *s).collect();
        let Some(s) = self.longest(&suffixes) else { return };
        if !self.in_r1(s) {
            return;
        }
        if s == "ative" {
            if self.in_r2(s) {
                self.replace(s, "");
            }
            return;
        }
        let to = RULES.iter().find(|(f, _)| *f == s).unwrap().1;
        self.replace(s, to);
    }

    fn step4(&mut self, agentive: bool) {
        const SUFFIXES: &[&str] = &[
            "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement", "ment", "ent",
            "ism", "ate", "iti", "ous", "ive", "ize", "ion",
        ];
        let Some(s) = self.longest(SUFFIXES) else { return };
        let start = self.suffix_start(s);
        if agentive && s == "er" && self.in_r1(s) && start >= 2 {
            let (a, b) = (self.chars[start - 2], self.chars[start - 1]);
            if a == b && matches!(a, 'm' | 'n' | 'p' | 'g') {
                self.chars.truncate(start - 1);
                return;
            }
        }
        if !self.in_r2(s) {
            return;
        }
        if s == "ion" {
            if start > 0 && matches!(self.chars[start - 1], 's' | 't') {
                self.replace(s, "");
            }
        } else {
            self.replace(s, "");
        }
    }

    fn step5(&mut self) {
        if self.ends_with("e") {
            let start = self.len() - 1;
            if self.in_r2("e") || (self.in_r1("e") && !self.ends_short_syllable(start)) {
                self.chars.pop();
            }
        } else if self.ends_with("l") && self.in_r2("l") {
            let n = self.len();
            if n >= 2 && self.chars[n - 2] == 'l' {
                self.chars.pop();
            }
        }
    }

    fn finish(self) -> String {
        self.chars
            .into_iter()
            .map(|c| if c == 'Y' { 'y' } else { c })
            .collect()
    }
}
