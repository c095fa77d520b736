//! Removal of URLs, mentions, hashtags, emojis and control characters.
//!
//! Pattern set:
//! - url: `https?://` or `www.` followed by non-whitespace
//! - mention: `@` followed by word characters
//! - hashtag: `#` followed by word characters (a run of `#` counts once)
//! - emoji: code points in the Emoticons, Misc Symbols & Pictographs,
//!   Transport & Map, Supplemental Symbols & Pictographs and Symbols &
//!   Pictographs Extended-A blocks, with trailing variation selectors and
//!   ZWJ-joined continuations counted as part of the same match
//! - control: category Cc; newline and tab become a space instead
//!
//! Passes run in the order control, emoji, url, mention, hashtag so that no
//! deletion can splice together a new match; the result is idempotent.

use std::str::FromStr;
use std::sync::LazyLock;

use regex::Regex;

static URL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?:https?://|www\.)\S+").unwrap());
static MENTION: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"@\w+").unwrap());
static HASHTAG: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"#+(\w+)").unwrap());

const ZWJ: char = '\u{200D}';

/// Code point ranges treated as pictographic.
pub const EMOJI_BLOCKS: &[(u32, u32)] = &[
    (0x1F300, 0x1F5FF),
    (0x1F600, 0x1F64F),
    (0x1F680, 0x1F6FF),
    (0x1F900, 0x1F9FF),
    (0x1FA70, 0x1FAFF),
];

pub fn is_pictographic(c: char) -> bool {
    let cp = c as u32;
    EMOJI_BLOCKS.iter().any(|&(lo, hi)| (lo..=hi).contains(&cp))
}

pub fn is_variation_selector(c: char) -> bool {
    ('\u{FE00}'..='\u{FE0F}').contains(&c)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum HashtagMode {
    /// Delete the whole `#word` token.
    #[default]
    Remove,
    /// Keep the word, drop the `#`.
    StripMarker,
}

impl FromStr for HashtagMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "remove" => Ok(HashtagMode::Remove),
            "strip-marker" => Ok(HashtagMode::StripMarker),
            other => Err(format!(
                "unknown hashtag mode '{other}' (remove|strip-marker)"
            )),
        }
    }
}

impl HashtagMode {
    pub fn as_str(self) -> &'static str {
        match self {
            HashtagMode::Remove => "remove",
            HashtagMode::StripMarker => "strip-marker",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Removals {
    pub url: usize,
    pub mention: usize,
    pub hashtag: usize,
    pub emoji: usize,
    pub control: usize,
}

impl Removals {
    pub fn total(&self) -> usize {
        self.url + self.mention + self.hashtag + self.emoji + self.control
    }
}

impl std::ops::AddAssign for Removals {
    fn add_assign(&mut self, o: Removals) {
        self.url += o.url;
        self.mention += o.mention;
        self.hashtag += o.hashtag;
        self.emoji += o.emoji;
        self.control += o.control;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CleanText {
    pub text: String,
    pub removals: Removals,
}

pub fn clean_text(raw: &str) -> CleanText {
    clean_text_with(raw, HashtagMode::Remove)
}

pub fn clean_text_with(raw: &str, mode: HashtagMode) -> CleanText {
    let mut removals = Removals::default();

    let mut s = String::with_capacity(raw.len());
    for c in raw.chars() {
        match c {
            '\n' | '\t' => s.push(' '),
            c if c.is_control() => removals.control += 1,
            c => s.push(c),
        }
    }

    let (s, n) = strip_emoji(&s);
    removals.emoji = n;

    removals.url = URL.find_iter(&s).count();
    let s = URL.replace_all(&s, "");

    removals.mention = MENTION.find_iter(&s).count();
    let s = MENTION.replace_all(&s, "");

    removals.hashtag = HASHTAG.find_iter(&s).count();
    let s = match mode {
        HashtagMode::Remove => HASHTAG.replace_all(&s, ""),
        HashtagMode::StripMarker => HASHTAG.replace_all(&s, "$1"),
    };

    let text = s.split_whitespace().collect::<Vec<_>>().join(" ");
    CleanText { text, removals }
}

/// Deletes emoji sequences, returning the remaining text and the number of
/// sequences removed. Stray selectors and joiners count as one match each.
fn strip_emoji(s: &str) -> (String, usize) {
    let chars: Vec<char> = s.chars().collect();
    let mut out = String::with_capacity(s.len());
    let mut count = 0;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if is_pictographic(c) {
            count += 1;
            i += 1;
            loop {
                match chars.get(i) {
                    Some(&v) if is_variation_selector(v) => i += 1,
                    Some(&m) if ('\u{1F3FB}'..='\u{1F3FF}').contains(&m) => i += 1,
                    Some(&ZWJ) if chars.get(i + 1).is_some_and(|&n| is_pictographic(n)) => i += 2,
                    _ => break,
                }
            }
        } else if is_variation_selector(c) || c == ZWJ {
            count += 1;
            i += 1;
        } else {
            out.push(c);
            i += 1;
        }
    }
    (out, count)
}
