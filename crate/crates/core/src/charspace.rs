//! The character space a password is drawn from.
//!
//! The canonical space is printable ASCII without the space character
//! (`0x21..=0x7E`), partitioned into four disjoint classes: 26 lower-case
//! letters, 26 upper-case letters, 10 digits and the remaining 32 symbols.
//! Class probabilities are kept as exact rationals (`|class| / |space|`).

use std::collections::HashMap;
use std::fmt;
use std::ops::Add;
use std::sync::LazyLock;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Printable ASCII bounds of the canonical space.
const FIRST_PRINTABLE: u8 = 0x21;
const LAST_PRINTABLE: u8 = 0x7E;

/// Length a password needs before it can be considered valid:
/// `min(|L|, |U|, |D|, |S|)` for the canonical space.
pub const MIN_VALID_LENGTH: u64 = 10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CharSpaceError {
    #[error("character {ch:?} at index {index} is outside the character space")]
    OutOfSpace { ch: char, index: usize },
    #[error("password is empty")]
    EmptyPassword,
    #[error("character {0:?} appears in more than one class")]
    OverlappingClasses(char),
    #[error("class {0} has no characters")]
    EmptyClass(CharClass),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CharClass {
    Lower,
    Upper,
    Digit,
    Symbol,
}

impl CharClass {
    pub const ALL: [CharClass; 4] = [
        CharClass::Lower,
        CharClass::Upper,
        CharClass::Digit,
        CharClass::Symbol,
    ];

    fn slot(self) -> usize {
        match self {
            CharClass::Lower => 0,
            CharClass::Upper => 1,
            CharClass::Digit => 2,
            CharClass::Symbol => 3,
        }
    }
}

impl fmt::Display for CharClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            CharClass::Lower => "lower",
            CharClass::Upper => "upper",
            CharClass::Digit => "digit",
            CharClass::Symbol => "symbol",
        };
        f.write_str(name)
    }
}

/// Four disjoint character classes and their union.
#[derive(Debug, Clone)]
pub struct CharSpace {
    classes: [Vec<char>; 4],
    lookup: HashMap<char, CharClass>,
}

static ENGLISH: LazyLock<CharSpace> = LazyLock::new(|| {
    let printable = (FIRST_PRINTABLE..=LAST_PRINTABLE).map(char::from);
    let symbols: Vec<char> = printable.filter(|c| !c.is_ascii_alphanumeric()).collect();
    CharSpace::new(
        ('a'..='z').collect(),
        ('A'..='Z').collect(),
        ('0'..='9').collect(),
        symbols,
    )
    .expect("canonical character space is well formed")
});

impl CharSpace {
    /// Builds a space from four class sets. Each set must be nonempty and
    /// no character may belong to two classes.
    pub fn new(
        lower: Vec<char>,
        upper: Vec<char>,
        digit: Vec<char>,
        symbol: Vec<char>,
    ) -> Result<Self, CharSpaceError> {
        let classes = [lower, upper, digit, symbol];
        let mut lookup = HashMap::new();
        for (class, set) in CharClass::ALL.into_iter().zip(&classes) {
            if set.is_empty() {
                return Err(CharSpaceError::EmptyClass(class));
            }
            for &c in set {
                if lookup.insert(c, class).is_some() {
                    return Err(CharSpaceError::OverlappingClasses(c));
                }
            }
        }
        Ok(Self { classes, lookup })
    }

    /// The 94-character printable ASCII space.
    pub fn english() -> &'static CharSpace {
        &ENGLISH
    }

    pub fn class_set(&self, class: CharClass) -> &[char] {
        &self.classes[class.slot()]
    }

    pub fn class_size(&self, class: CharClass) -> u64 {
        self.classes[class.slot()].len() as u64
    }

    pub fn total_size(&self) -> u64 {
        self.classes.iter().map(|s| s.len() as u64).sum()
    }

    /// Probability that a uniformly drawn character falls in `class`.
    pub fn class_prob(&self, class: CharClass) -> Ratio<u64> {
        Ratio::new(self.class_size(class), self.total_size())
    }

    /// Smallest class cardinality; the minimum length of a valid password.
    pub fn min_class_size(&self) -> u64 {
        CharClass::ALL
            .iter()
            .map(|&c| self.class_size(c))
            .min()
            .unwrap_or(0)
    }

    /// All characters of the space, class by class.
    pub fn chars(&self) -> impl Iterator<Item = char> + '_ {
        self.classes.iter().flatten().copied()
    }

    pub fn classify(&self, c: char) -> Option<CharClass> {
        self.lookup.get(&c).copied()
    }

    pub fn profile(&self, password: &str) -> Result<ClassProfile, CharSpaceError> {
        if password.is_empty() {
            return Err(CharSpaceError::EmptyPassword);
        }
        let mut profile = ClassProfile::default();
        for (index, ch) in password.chars().enumerate() {
            let class = self
                .classify(ch)
                .ok_or(CharSpaceError::OutOfSpace { ch, index })?;
            profile.bump(class);
        }
        Ok(profile)
    }

    /// Validity: at least two classes present and length at least the
    /// smallest class cardinality.
    pub fn is_valid(&self, profile: &ClassProfile) -> bool {
        profile.classes_used() >= 2 && profile.length() >= self.min_class_size()
    }
}

/// Classifies a character against the canonical space.
pub fn classify_char(c: char) -> Result<CharClass, CharSpaceError> {
    CharSpace::english()
        .classify(c)
        .ok_or(CharSpaceError::OutOfSpace { ch: c, index: 0 })
}

/// Counts the characters of `password` per class of the canonical space.
pub fn profile(password: &str) -> Result<ClassProfile, CharSpaceError> {
    CharSpace::english().profile(password)
}

pub fn is_valid(profile: &ClassProfile) -> bool {
    CharSpace::english().is_valid(profile)
}

/// Per-class character counts of a password.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClassProfile {
    pub lower: u64,
    pub upper: u64,
    pub digit: u64,
    pub symbol: u64,
}

impl ClassProfile {
    pub fn new(lower: u64, upper: u64, digit: u64, symbol: u64) -> Self {
        Self {
            lower,
            upper,
            digit,
            symbol,
        }
    }

    pub fn length(&self) -> u64 {
        self.lower + self.upper + self.digit + self.symbol
    }

    pub fn count(&self, class: CharClass) -> u64 {
        match class {
            CharClass::Lower => self.lower,
            CharClass::Upper => self.upper,
            CharClass::Digit => self.digit,
            CharClass::Symbol => self.symbol,
        }
    }

    /// Number of classes with a nonzero count.
    pub fn classes_used(&self) -> usize {
        CharClass::ALL
            .iter()
            .filter(|&&c| self.count(c) > 0)
            .count()
    }

    pub fn is_empty(&self) -> bool {
        self.length() == 0
    }

    fn bump(&mut self, class: CharClass) {
        match class {
            CharClass::Lower => self.lower += 1,
            CharClass::Upper => self.upper += 1,
            CharClass::Digit => self.digit += 1,
            CharClass::Symbol => self.symbol += 1,
        }
    }
}

impl Add for ClassProfile {
    type Output = ClassProfile;

    fn add(self, rhs: ClassProfile) -> ClassProfile {
        ClassProfile {
            lower: self.lower + rhs.lower,
            upper: self.upper + rhs.upper,
            digit: self.digit + rhs.digit,
            symbol: self.symbol + rhs.symbol,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_cardinalities() {
        let space = CharSpace::english();
        assert_eq!(space.class_size(CharClass::Lower), 26);
        assert_eq!(space.class_size(CharClass::Upper), 26);
        assert_eq!(space.class_size(CharClass::Digit), 10);
        assert_eq!(space.class_size(CharClass::Symbol), 32);
        assert_eq!(space.total_size(), 94);
        assert_eq!(space.min_class_size(), MIN_VALID_LENGTH);
        let total: Ratio<u64> = CharClass::ALL.iter().map(|&c| space.class_prob(c)).sum();
        assert_eq!(total, Ratio::from_integer(1));
        assert_eq!(space.class_prob(CharClass::Symbol), Ratio::new(32, 94));
    }

    #[test]
    fn space_is_printable_ascii_without_space() {
        let space = CharSpace::english();
        let mut all: Vec<char> = space.chars().collect();
        all.sort_unstable();
        let expected: Vec<char> = (0x21u8..=0x7e).map(char::from).collect();
        assert_eq!(all, expected);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_char('a'), Ok(CharClass::Lower));
        assert_eq!(classify_char('Z'), Ok(CharClass::Upper));
        assert_eq!(classify_char('7'), Ok(CharClass::Digit));
        assert_eq!(classify_char('~'), Ok(CharClass::Symbol));
        assert!(matches!(
            classify_char('€'),
            Err(CharSpaceError::OutOfSpace { ch: '€', .. })
        ));
        assert!(classify_char(' ').is_err());
        assert!(classify_char('\t').is_err());
        assert!(classify_char('\u{7f}').is_err());
    }

    #[test]
    fn profile_examples() {
        assert_eq!(profile("aB3!").unwrap(), ClassProfile::new(1, 1, 1, 1));
        assert_eq!(
            profile("abcdefgH12").unwrap(),
            ClassProfile::new(7, 1, 2, 0)
        );
        assert_eq!(profile(""), Err(CharSpaceError::EmptyPassword));
        assert_eq!(
            profile("ab c"),
            Err(CharSpaceError::OutOfSpace { ch: ' ', index: 2 })
        );
        // index counts characters, not bytes
        assert_eq!(
            profile("é€x€"),
            Err(CharSpaceError::OutOfSpace { ch: 'é', index: 0 })
        );
        assert_eq!(
            profile("ab€"),
            Err(CharSpaceError::OutOfSpace {
                ch: '€', index: 2
            })
        );
    }

    #[test]
    fn validity_examples() {
        assert!(is_valid(&ClassProfile::new(7, 1, 2, 0)));
        assert!(!is_valid(&ClassProfile::new(10, 0, 0, 0)));
        assert!(!is_valid(&ClassProfile::new(4, 1, 1, 1)));
        assert!(!is_valid(&ClassProfile::default()));
    }

    #[test]
    fn custom_space_rejects_overlap() {
        let err = CharSpace::new(vec!['a'], vec!['a'], vec!['1'], vec!['!']).unwrap_err();
        assert_eq!(err, CharSpaceError::OverlappingClasses('a'));
        let err = CharSpace::new(vec!['a'], vec![], vec!['1'], vec!['!']).unwrap_err();
        assert_eq!(err, CharSpaceError::EmptyClass(CharClass::Upper));
        let greek = CharSpace::new(
            "αβγ".chars().collect(),
            "ΑΒΓ".chars().collect(),
            vec!['0', '1'],
            vec!['.'],
        )
        .unwrap();
        assert_eq!(greek.total_size(), 9);
        assert_eq!(
            greek.profile("αΒ0.").unwrap(),
            ClassProfile::new(1, 1, 1, 1)
        );
    }

    fn in_space() -> impl Strategy<Value = String> {
        proptest::collection::vec(0x21u8..=0x7e, 1..64)
            .prop_map(|bytes| bytes.into_iter().map(char::from).collect())
    }

    proptest! {
        #[test]
        fn profile_is_order_invariant(pw in in_space(), seed in any::<u64>()) {
            let mut chars: Vec<char> = pw.chars().collect();
            // deterministic shuffle
            let n = chars.len();
            let mut state = seed | 1;
            for i in (1..n).rev() {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                chars.swap(i, (state % (i as u64 + 1)) as usize);
            }
            let shuffled: String = chars.into_iter().collect();
            prop_assert_eq!(profile(&pw).unwrap(), profile(&shuffled).unwrap());
        }

        #[test]
        fn profile_is_additive(a in in_space(), b in in_space()) {
            let joined = format!("{a}{b}");
            let whole = profile(&joined).unwrap();
            prop_assert_eq!(whole, profile(&a).unwrap() + profile(&b).unwrap());
            prop_assert_eq!(whole.length(), joined.chars().count() as u64);
        }
    }
}
