//! Conversion between precomposed Hangul syllables and letter-level jamo.
//!
//! All automata in this crate operate over the alphabet of letters produced
//! by [`decompose`]: compatibility jamo (U+3131..U+3163) for Hangul content,
//! plus arbitrary pass-through characters for everything else. Complex jamo
//! (double consonants such as ㅆ and compound tails such as ㄳ) are kept as
//! single letters; [`split_complex_tail`] exposes the conventional two-letter
//! split for callers that want it.

/// First precomposed syllable, '가' (U+AC00).
pub const SYLLABLE_BASE: u32 = 0xAC00;
/// Number of lead consonants.
pub const LEAD_COUNT: u32 = 19;
/// Number of vowels.
pub const VOWEL_COUNT: u32 = 21;
/// Number of tail slots (index 0 means "no tail").
pub const TAIL_COUNT: u32 = 28;
/// Number of precomposed syllables (19 * 21 * 28).
pub const SYLLABLE_COUNT: u32 = LEAD_COUNT * VOWEL_COUNT * TAIL_COUNT;

/// Lead index -> compatibility jamo.
const LEADS: [char; 19] = [
    'ㄱ', 'ㄲ', 'ㄴ', 'ㄷ', 'ㄸ', 'ㄹ', 'ㅁ', 'ㅂ', 'ㅃ', 'ㅅ', 'ㅆ', 'ㅇ', 'ㅈ', 'ㅉ', 'ㅊ',
    'ㅋ', 'ㅌ', 'ㅍ', 'ㅎ',
];

/// Vowel index -> compatibility jamo.
const VOWELS: [char; 21] = [
    'ㅏ', 'ㅐ', 'ㅑ', 'ㅒ', 'ㅓ', 'ㅔ', 'ㅕ', 'ㅖ', 'ㅗ', 'ㅘ', 'ㅙ', 'ㅚ', 'ㅛ', 'ㅜ', 'ㅝ',
    'ㅞ', 'ㅟ', 'ㅠ', 'ㅡ', 'ㅢ', 'ㅣ',
];

/// Tail index -> compatibility jamo; index 0 is unused (no tail).
const TAILS: [char; 28] = [
    '\0', 'ㄱ', 'ㄲ', 'ㄳ', 'ㄴ', 'ㄵ', 'ㄶ', 'ㄷ', 'ㄹ', 'ㄺ', 'ㄻ', 'ㄼ', 'ㄽ', 'ㄾ', 'ㄿ',
    'ㅀ', 'ㅁ', 'ㅂ', 'ㅄ', 'ㅅ', 'ㅆ', 'ㅇ', 'ㅈ', 'ㅊ', 'ㅋ', 'ㅌ', 'ㅍ', 'ㅎ',
];

/// Compound tails split into their conventional two letters.
const COMPLEX_TAIL_SPLITS: [(char, char, char); 11] = [
    ('ㄳ', 'ㄱ', 'ㅅ'),
    ('ㄵ', 'ㄴ', 'ㅈ'),
    ('ㄶ', 'ㄴ', 'ㅎ'),
    ('ㄺ', 'ㄹ', 'ㄱ'),
    ('ㄻ', 'ㄹ', 'ㅁ'),
    ('ㄼ', 'ㄹ', 'ㅂ'),
    ('ㄽ', 'ㄹ', 'ㅅ'),
    ('ㄾ', 'ㄹ', 'ㅌ'),
    ('ㄿ', 'ㄹ', 'ㅍ'),
    ('ㅀ', 'ㄹ', 'ㅎ'),
    ('ㅄ', 'ㅂ', 'ㅅ'),
];

/// One unit of the letter alphabet: a compatibility jamo or any pass-through
/// character.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter(pub char);

impl Letter {
    pub fn as_char(self) -> char {
        self.0
    }

    /// Index into the lead table, if this letter can start a syllable.
    pub fn lead_index(self) -> Option<u32> {
        LEADS.iter().position(|&c| c == self.0).map(|i| i as u32)
    }

    /// Index into the vowel table.
    pub fn vowel_index(self) -> Option<u32> {
        VOWELS.iter().position(|&c| c == self.0).map(|i| i as u32)
    }

    /// Index into the tail table (1..=27), if this letter can end a syllable.
    pub fn tail_index(self) -> Option<u32> {
        TAILS[1..]
            .iter()
            .position(|&c| c == self.0)
            .map(|i| i as u32 + 1)
    }

    pub fn is_vowel(self) -> bool {
        self.vowel_index().is_some()
    }

    /// True for any compatibility jamo consonant or vowel.
    pub fn is_jamo(self) -> bool {
        matches!(self.0 as u32, 0x3131..=0x3163)
    }
}

impl std::fmt::Debug for Letter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl std::fmt::Display for Letter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Ordered sequence of letters, the input/output alphabet of every automaton.
pub type LetterString = Vec<Letter>;

/// Split a compound tail letter into its two conventional parts.
pub fn split_complex_tail(letter: Letter) -> Option<(Letter, Letter)> {
    COMPLEX_TAIL_SPLITS
        .iter()
        .find(|&&(c, _, _)| c == letter.0)
        .map(|&(_, a, b)| (Letter(a), Letter(b)))
}

fn is_syllable(c: char) -> bool {
    (SYLLABLE_BASE..SYLLABLE_BASE + SYLLABLE_COUNT).contains(&(c as u32))
}

/// Map a conjoining (positional) jamo to its compatibility equivalent, so
/// that NFD-style input decomposes to the same letters as precomposed input.
fn conjoining_to_compat(c: char) -> Option<char> {
    let code = c as u32;
    match code {
        0x1100..=0x1112 => Some(LEADS[(code - 0x1100) as usize]),
        0x1161..=0x1175 => Some(VOWELS[(code - 0x1161) as usize]),
        0x11A8..=0x11C2 => Some(TAILS[(code - 0x11A7) as usize]),
        _ => None,
    }
}

/// Convert text to the letter alphabet. Each precomposed syllable becomes
/// its lead, vowel and optional tail; everything else passes through as a
/// single letter. Total function.
pub fn decompose(text: &str) -> LetterString {
    let mut out = Vec::with_capacity(text.len());
    for c in text.chars() {
        if is_syllable(c) {
            let index = c as u32 - SYLLABLE_BASE;
            let lead = index / (VOWEL_COUNT * TAIL_COUNT);
            let vowel = (index / TAIL_COUNT) % VOWEL_COUNT;
            let tail = index % TAIL_COUNT;
            out.push(Letter(LEADS[lead as usize]));
            out.push(Letter(VOWELS[vowel as usize]));
            if tail != 0 {
                out.push(Letter(TAILS[tail as usize]));
            }
        } else if let Some(compat) = conjoining_to_compat(c) {
            out.push(Letter(compat));
        } else {
            out.push(Letter(c));
        }
    }
    out
}

/// Recompose maximal lead-vowel(-tail) runs into precomposed syllables.
/// Letters that cannot begin or extend a syllable are emitted as-is, so the
/// output may contain standalone jamo.
pub fn compose(letters: &[Letter]) -> String {
    let mut out = String::with_capacity(letters.len() * 3);
    let mut i = 0;
    while i < letters.len() {
        let lead = letters[i].lead_index();
        let vowel = letters.get(i + 1).and_then(|l| l.vowel_index());
        match (lead, vowel) {
            (Some(l), Some(v)) => {
                // A following consonant becomes the tail unless it starts the
                // next syllable (i.e. unless a vowel follows it).
                let tail = letters.get(i + 2).and_then(|t| {
                    let next_is_vowel = letters.get(i + 3).is_some_and(|n| n.is_vowel());
                    if next_is_vowel {
                        None
                    } else {
                        t.tail_index()
                    }
                });
                let t = tail.unwrap_or(0);
                let code = SYLLABLE_BASE + l * VOWEL_COUNT * TAIL_COUNT + v * TAIL_COUNT + t;
                out.push(char::from_u32(code).expect("valid syllable code point"));
                i += if t == 0 { 2 } else { 3 };
            }
            _ => {
                out.push(letters[i].as_char());
                i += 1;
            }
        }
    }
    out
}
