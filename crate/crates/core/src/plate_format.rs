//! Plate grammar: normalization, slot layout, look-alike correction and
//! validation.
//!
//! A registration number decomposes into four textual parts: a two-letter
//! state code, a two-digit district number, an optional series of up to
//! three letters, and a serial of up to four digits. The fifth, non-textual
//! part of physical plates (oval and hologram) is ignored.
//!
//! Recognition engines confuse characters across classes (`0` read where a
//! letter belongs, `S` where a digit belongs). [`correct`] repairs exactly
//! those cross-class mistakes by substituting the look-alike analog from an
//! [`AnalogTable`], leaving every slot-consistent character alone.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A normalized plate string: uppercase letters and digits only, length
/// 6..=11, no separators.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PlateText(String);

impl PlateText {
    /// Validates charset and length. Input must already be normalized;
    /// use [`normalize`] for raw text.
    pub fn new(s: &str) -> Result<Self> {
        for c in s.chars() {
            if !c.is_ascii_uppercase() && !c.is_ascii_digit() {
                return Err(Error::InvalidCharacter(c));
            }
        }
        if !(6..=11).contains(&s.len()) {
            return Err(Error::BadLength(s.len()));
        }
        Ok(PlateText(s.to_owned()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn byte(&self, i: usize) -> char {
        self.0.as_bytes()[i] as char
    }
}

impl std::fmt::Display for PlateText {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for PlateText {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        PlateText::new(&s)
    }
}

impl From<PlateText> for String {
    fn from(p: PlateText) -> String {
        p.0
    }
}

/// Strips spaces and hyphens, uppercases letters, and validates the result.
pub fn normalize(raw: &str) -> Result<PlateText> {
    let mut out = String::with_capacity(raw.len());
    for c in raw.chars() {
        match c {
            ' ' | '-' => {}
            'a'..='z' => out.push(c.to_ascii_uppercase()),
            'A'..='Z' | '0'..='9' => out.push(c),
            other => return Err(Error::InvalidCharacter(other)),
        }
    }
    PlateText::new(&out)
}

/// Character class a slot expects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotClass {
    Letter,
    Digit,
}

/// Classifies one plate character.
pub fn class_of(c: char) -> SlotClass {
    if c.is_ascii_digit() {
        SlotClass::Digit
    } else {
        SlotClass::Letter
    }
}

/// Per-position expected classes for a plate of a given length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotLayout(Vec<SlotClass>);

impl SlotLayout {
    /// Layout for an `n`-character plate. The serial takes as many of the
    /// trailing positions as it can (up to four); whatever remains between
    /// district and serial is the letter series.
    pub fn for_len(n: usize) -> Result<Self> {
        if !(6..=11).contains(&n) {
            return Err(Error::BadLength(n));
        }
        let serial_len = 4.min(n - 4);
        let series_len = n - 4 - serial_len;
        let mut slots = vec![
            SlotClass::Letter,
            SlotClass::Letter,
            SlotClass::Digit,
            SlotClass::Digit,
        ];
        slots.extend(std::iter::repeat_n(SlotClass::Letter, series_len));
        slots.extend(std::iter::repeat_n(SlotClass::Digit, serial_len));
        debug_assert_eq!(slots.len(), n);
        Ok(SlotLayout(slots))
    }

    /// Layout matching a normalized plate.
    pub fn of(text: &PlateText) -> Self {
        Self::for_len(text.len()).expect("PlateText length is always legal")
    }

    pub fn slots(&self) -> &[SlotClass] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of trailing serial digits.
    pub fn serial_len(&self) -> usize {
        4.min(self.0.len() - 4)
    }

    /// Number of series letters between district and serial.
    pub fn series_len(&self) -> usize {
        self.0.len() - 4 - self.serial_len()
    }
}

/// Cross-class look-alike substitutions: which letter a digit is read as
/// and which digit a letter is read as. Both maps are partial; symbols
/// without an entry have no analog.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalogTable {
    digit_to_letter: [Option<char>; 10],
    letter_to_digit: [Option<char>; 26],
}

impl AnalogTable {
    pub fn empty() -> Self {
        AnalogTable {
            digit_to_letter: [None; 10],
            letter_to_digit: [None; 26],
        }
    }

    pub fn set_digit_analog(&mut self, digit: char, letter: char) {
        assert!(digit.is_ascii_digit() && letter.is_ascii_uppercase());
        self.digit_to_letter[digit as usize - '0' as usize] = Some(letter);
    }

    pub fn set_letter_analog(&mut self, letter: char, digit: char) {
        assert!(digit.is_ascii_digit() && letter.is_ascii_uppercase());
        self.letter_to_digit[letter as usize - 'A' as usize] = Some(digit);
    }

    /// Letter analog of a digit, when one exists.
    pub fn digit_analog(&self, digit: char) -> Option<char> {
        if digit.is_ascii_digit() {
            self.digit_to_letter[digit as usize - '0' as usize]
        } else {
            None
        }
    }

    /// Digit analog of a letter, when one exists.
    pub fn letter_analog(&self, letter: char) -> Option<char> {
        if letter.is_ascii_uppercase() {
            self.letter_to_digit[letter as usize - 'A' as usize]
        } else {
            None
        }
    }

    /// The canonical digit/letter pairs: `(digit, letter)` entries whose
    /// substitution round-trips in both directions.
    pub fn canonical_pairs(&self) -> Vec<(char, char)> {
        let mut pairs = Vec::new();
        for d in '0'..='9' {
            if let Some(l) = self.digit_analog(d) {
                if self.letter_analog(l) == Some(d) {
                    pairs.push((d, l));
                }
            }
        }
        pairs
    }
}

impl Default for AnalogTable {
    /// The built-in look-alike table.
    ///
    /// Digits and letters pair up by visual shape: 0-O, 1-I, 2-Z, 4-A,
    /// 5-S, 6-G, 7-T, 8-B, with the extra letter fallbacks Q and D reading
    /// as 0 and L as 1. Digits 3 and 9 and all unlisted letters have no
    /// analog and stay unresolved.
    fn default() -> Self {
        let mut t = AnalogTable::empty();
        for (d, l) in [
            ('0', 'O'),
            ('1', 'I'),
            ('2', 'Z'),
            ('4', 'A'),
            ('5', 'S'),
            ('6', 'G'),
            ('7', 'T'),
            ('8', 'B'),
        ] {
            t.set_digit_analog(d, l);
            t.set_letter_analog(l, d);
        }
        t.set_letter_analog('Q', '0');
        t.set_letter_analog('D', '0');
        t.set_letter_analog('L', '1');
        t
    }
}

/// Outcome of one corrective pass over a plate string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrectionResult {
    /// Same length as the input, with cross-class look-alikes substituted.
    pub corrected: PlateText,
    /// Positions whose character was replaced.
    pub changed_positions: Vec<usize>,
    /// Positions whose class mismatches the slot but has no analog entry.
    pub unresolved: Vec<usize>,
}

/// Repairs cross-class recognition mistakes. Every position whose character
/// class disagrees with the slot layout is replaced by its analog from
/// `table`; positions without an analog entry are copied unchanged and
/// reported as unresolved. Slot-consistent positions are never touched.
pub fn correct(text: &PlateText, table: &AnalogTable) -> CorrectionResult {
    let layout = SlotLayout::of(text);
    let mut out = String::with_capacity(text.len());
    let mut changed = Vec::new();
    let mut unresolved = Vec::new();
    for (i, slot) in layout.slots().iter().enumerate() {
        let c = text.byte(i);
        if class_of(c) == *slot {
            out.push(c);
            continue;
        }
        let analog = match slot {
            SlotClass::Letter => table.digit_analog(c),
            SlotClass::Digit => table.letter_analog(c),
        };
        match analog {
            Some(a) => {
                out.push(a);
                changed.push(i);
            }
            None => {
                out.push(c);
                unresolved.push(i);
            }
        }
    }
    CorrectionResult {
        corrected: PlateText::new(&out).expect("correction preserves charset and length"),
        changed_positions: changed,
        unresolved,
    }
}

/// The four textual parts of a plate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlateParse {
    /// Two-letter state or union-territory code.
    pub state: String,
    /// Two-digit district number.
    pub district: String,
    /// Zero to three series letters.
    pub series: String,
    /// One to four serial digits; reads as an integer in 0..=9999.
    pub serial: String,
}

impl PlateParse {
    /// Concatenating the parts reproduces the source plate.
    pub fn reassemble(&self) -> String {
        format!("{}{}{}{}", self.state, self.district, self.series, self.serial)
    }
}

/// Checks every position against its slot class and returns the four-part
/// decomposition. Fails with the first mismatching position.
pub fn validate(text: &PlateText) -> Result<PlateParse> {
    let layout = SlotLayout::of(text);
    for (i, slot) in layout.slots().iter().enumerate() {
        if class_of(text.byte(i)) != *slot {
            return Err(Error::ClassMismatch(i));
        }
    }
    let s = text.as_str();
    let series_end = 4 + layout.series_len();
    Ok(PlateParse {
        state: s[0..2].to_owned(),
        district: s[2..4].to_owned(),
        series: s[4..series_end].to_owned(),
        serial: s[series_end..].to_owned(),
    })
}
