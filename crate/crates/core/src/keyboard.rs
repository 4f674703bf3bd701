//! Locale keyboard layouts for typo simulation.
//!
//! Keys are laid out on staggered rows; two keys are neighbors when they sit
//! next to each other on the same row, or on adjacent rows within one key
//! width horizontally. Number-row and punctuation keys are included, so a
//! letter can be mistyped as a digit or punctuation mark.

use std::collections::HashMap;

/// Horizontal offset of each row, in key widths.
const ROW_STAGGER: [f32; 4] = [0.0, 0.5, 0.75, 1.25];

const QWERTY: [&str; 4] = ["1234567890-", "qwertyuiop[", "asdfghjkl;'", "zxcvbnm,./"];
const AZERTY: [&str; 4] = ["1234567890)", "azertyuiop^", "qsdfghjklmù", "wxcvbn,;:!"];
const QWERTZ: [&str; 4] = ["1234567890ß", "qwertzuiopü", "asdfghjklöä", "yxcvbnm,.-"];

#[derive(Debug, Clone)]
pub struct KeyboardLayout {
    name: &'static str,
    neighbors: HashMap<char, Vec<char>>,
}

impl KeyboardLayout {
    /// QWERTY for English and unknown locales, AZERTY for French, QWERTZ for German.
    pub fn for_locale(locale: &str) -> Self {
        let lang = locale.split(['-', '_']).next().unwrap_or("").to_ascii_lowercase();
        match lang.as_str() {
            "fr" => Self::from_rows("azerty", &AZERTY),
            "de" => Self::from_rows("qwertz", &QWERTZ),
            _ => Self::from_rows("qwerty", &QWERTY),
        }
    }

    fn from_rows(name: &'static str, rows: &[&str; 4]) -> Self {
        let keys: Vec<(char, f32, usize)> = rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| {
                row.chars()
                    .enumerate()
                    .map(move |(c, ch)| (ch, c as f32 + ROW_STAGGER[r], r))
            })
            .collect();
        let mut neighbors: HashMap<char, Vec<char>> = HashMap::new();
        for &(a, xa, ra) in &keys {
            let list = neighbors.entry(a).or_default();
            for &(b, xb, rb) in &keys {
                if a == b {
                    continue;
                }
                let dx = (xa - xb).abs();
                let adjacent = match ra.abs_diff(rb) {
                    0 => dx <= 1.0,
                    1 => dx <= 1.0,
                    _ => false,
                };
                if adjacent {
                    list.push(b);
                }
            }
        }
        KeyboardLayout { name, neighbors }
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    /// Keys adjacent to `c`, empty for characters not on the layout.
    pub fn neighbors(&self, c: char) -> &[char] {
        self.neighbors.get(&c).map_or(&[], Vec::as_slice)
    }
}
