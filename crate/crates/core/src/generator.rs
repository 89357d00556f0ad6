//! Uniform random passwords over the canonical character space.
//!
//! Characters are drawn by taking one byte from the source, rejecting bytes
//! at or above the largest multiple of the alphabet size that fits in 256,
//! and reducing the rest modulo the alphabet size. The alphabet is ordered as
//! [`CharSpace::chars`]: lower, upper, digits, then symbols in ASCII order.
//!
//! Without a seed the bytes come from the operating system. With a seed the
//! bytes come from ChaCha20: output is split into shards of
//! [`SHARD_SIZE`] passwords, and shard `i` uses `ChaCha20Rng::seed_from_u64(seed)`
//! with its stream set to `i`. The output therefore does not depend on how
//! many threads generate it.

use std::fmt;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::charspace::{CharClass, CharSpace, MIN_VALID_LENGTH};
use crate::exec::{map_range, Execution};

/// Passwords per independently seeded shard in seeded mode.
pub const SHARD_SIZE: usize = 256;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeneratorError {
    #[error("operating system entropy source unavailable: {0}")]
    EntropySourceUnavailable(String),
    #[error("length {length} can never satisfy validity (needs at least {MIN_VALID_LENGTH})")]
    InfeasibleValidity { length: usize },
    #[error("password length must be positive")]
    ZeroLength,
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
}

/// Dataset labels and their password lengths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GenLabel {
    /// Shortest length a valid password can have.
    RandomMin,
    Random10ch,
    Random32ch,
    Random128ch,
    /// Four times the space size, where a balanced password reaches `H_E = 1`.
    RandomMax,
    Custom(usize),
}

impl GenLabel {
    pub const NAMED: [GenLabel; 5] = [
        GenLabel::RandomMin,
        GenLabel::Random10ch,
        GenLabel::Random32ch,
        GenLabel::Random128ch,
        GenLabel::RandomMax,
    ];

    pub fn length(self) -> usize {
        match self {
            GenLabel::RandomMin | GenLabel::Random10ch => 10,
            GenLabel::Random32ch => 32,
            GenLabel::Random128ch => 128,
            GenLabel::RandomMax => 376,
            GenLabel::Custom(n) => n,
        }
    }
}

impl fmt::Display for GenLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenLabel::RandomMin => f.write_str("RandomMin"),
            GenLabel::Random10ch => f.write_str("Random10ch"),
            GenLabel::Random32ch => f.write_str("Random32ch"),
            GenLabel::Random128ch => f.write_str("Random128ch"),
            GenLabel::RandomMax => f.write_str("RandomMax"),
            GenLabel::Custom(n) => write!(f, "Custom{n}"),
        }
    }
}

impl FromStr for GenLabel {
    type Err = GeneratorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GenLabel::NAMED
            .into_iter()
            .find(|l| l.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| GeneratorError::UnknownLabel(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenSpec {
    pub label: GenLabel,
    pub count: usize,
    /// Regenerate whole passwords until they are valid.
    pub require_valid: bool,
    /// Deterministic mode; `None` reads the operating system source.
    pub seed: Option<u64>,
}

impl GenSpec {
    pub fn new(label: GenLabel, count: usize) -> Self {
        Self {
            label,
            count,
            require_valid: false,
            seed: None,
        }
    }

    pub fn seeded(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn length(&self) -> usize {
        self.label.length()
    }
}

/// Buffered byte supply with rejection-based uniform draws.
trait ByteSource {
    fn next_byte(&mut self) -> Result<u8, GeneratorError>;

    /// Uniform integer in `0..n` for `1 <= n <= 256`.
    fn below(&mut self, n: usize) -> Result<usize, GeneratorError> {
        debug_assert!((1..=256).contains(&n));
        let limit = 256 - 256 % n;
        loop {
            let b = self.next_byte()? as usize;
            if b < limit {
                return Ok(b % n);
            }
        }
    }
}

struct Buffered<F> {
    refill: F,
    buf: [u8; 64],
    pos: usize,
}

impl<F> Buffered<F> {
    fn new(refill: F) -> Self {
        Self {
            refill,
            buf: [0; 64],
            pos: 64,
        }
    }
}

impl<F: FnMut(&mut [u8]) -> Result<(), GeneratorError>> ByteSource for Buffered<F> {
    fn next_byte(&mut self) -> Result<u8, GeneratorError> {
        if self.pos == self.buf.len() {
            (self.refill)(&mut self.buf)?;
            self.pos = 0;
        }
        self.pos += 1;
        Ok(self.buf[self.pos - 1])
    }
}

fn chacha_source(seed: u64, stream: u64) -> impl ByteSource {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    Buffered::new(move |buf: &mut [u8]| {
        rng.fill_bytes(buf);
        Ok(())
    })
}

fn os_source() -> impl ByteSource {
    Buffered::new(|buf: &mut [u8]| {
        getrandom::fill(buf).map_err(|e| GeneratorError::EntropySourceUnavailable(e.to_string()))
    })
}

fn draw_password<S: ByteSource>(
    src: &mut S,
    alphabet: &[char],
    length: usize,
    require_valid: bool,
) -> Result<String, GeneratorError> {
    let space = CharSpace::english();
    loop {
        let mut pw = String::with_capacity(length);
        for _ in 0..length {
            pw.push(alphabet[src.below(alphabet.len())?]);
        }
        if !require_valid || space.is_valid(&space.profile(&pw).expect("drawn from the space")) {
            return Ok(pw);
        }
    }
}

/// Generates `spec.count` passwords of `spec.length()` characters each.
pub fn generate(spec: &GenSpec, exec: Execution) -> Result<Vec<String>, GeneratorError> {
    let length = spec.length();
    if length == 0 {
        return Err(GeneratorError::ZeroLength);
    }
    if spec.require_valid && (length as u64) < MIN_VALID_LENGTH {
        return Err(GeneratorError::InfeasibleValidity { length });
    }
    let alphabet: Vec<char> = CharSpace::english().chars().collect();

    match spec.seed {
        None => {
            let mut src = os_source();
            (0..spec.count)
                .map(|_| draw_password(&mut src, &alphabet, length, spec.require_valid))
                .collect()
        }
        Some(seed) => {
            let shards = spec.count.div_ceil(SHARD_SIZE);
            let parts = map_range(shards, exec, |shard| {
                let mut src = chacha_source(seed, shard as u64);
                let n = SHARD_SIZE.min(spec.count - shard * SHARD_SIZE);
                (0..n)
                    .map(|_| draw_password(&mut src, &alphabet, length, spec.require_valid))
                    .collect::<Result<Vec<_>, _>>()
            });
            let mut out = Vec::with_capacity(spec.count);
            for part in parts {
                out.extend(part?);
            }
            Ok(out)
        }
    }
}

/// Short, mostly lower-case passwords resembling leaked corpora: length
/// uniform in 4..=9, each character lower-case with probability 0.80,
/// a digit with 0.15 and upper-case with 0.05, never a symbol.
pub fn generate_leaked_like(count: usize, seed: u64) -> Vec<String> {
    let space = CharSpace::english();
    let lower = space.class_set(CharClass::Lower);
    let upper = space.class_set(CharClass::Upper);
    let digit = space.class_set(CharClass::Digit);
    let mut src = chacha_source(seed, 0);
    let mut draw = |n: usize| src.below(n).expect("seeded source never fails");

    (0..count)
        .map(|_| {
            let length = 4 + draw(6);
            (0..length)
                .map(|_| {
                    let set = match draw(100) {
                        0..80 => lower,
                        80..95 => digit,
                        _ => upper,
                    };
                    set[draw(set.len())]
                })
                .collect()
        })
        .collect()
}
