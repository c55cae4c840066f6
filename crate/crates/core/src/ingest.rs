// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Tweet and polarity-probability ingestion.
//!
//! Tweets arrive as JSON-lines or headered CSV with configurable field
//! names; polarity probabilities arrive as JSON-lines keyed by tweet id.
//! Records that break a [`TweetRecord`] invariant are rejected and counted
//! in [`ParsedTweets::malformed`] rather than dropped silently.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::{Error, Result};

/// Tolerance on the sum of a probability triple.
pub const TRIPLE_SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub tweet_id: String,
    pub author_id: String,
    pub text: String,
    #[serde(default)]
    pub retweet_count: u64,
    #[serde(default)]
    pub like_count: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub referenced_tweet_id: Option<String>,
    #[serde(default)]
    pub author_followers: u64,
    #[serde(default)]
    pub verified: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

impl TweetRecord {
    pub fn is_retweet(&self) -> bool {
        self.referenced_tweet_id.is_some()
    }
}

/// Classifier probabilities over {pro-Russia, not-sure, pro-Ukraine}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarityTriple {
    pub p_russia: f64,
    pub p_notsure: f64,
    pub p_ukraine: f64,
}

impl PolarityTriple {
    pub fn new(p_russia: f64, p_notsure: f64, p_ukraine: f64) -> Result<Self> {
        let t = PolarityTriple {
            p_russia,
            p_notsure,
            p_ukraine,
        };
        t.check().map_err(Error::validation)?;
        Ok(t)
    }

    /// Checks every component is in [0, 1] and the three sum to one.
    pub fn check(&self) -> std::result::Result<(), String> {
        let parts = [self.p_russia, self.p_notsure, self.p_ukraine];
        if let Some(p) = parts.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(format!("probability {p} outside [0, 1]"));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > TRIPLE_SUM_TOLERANCE {
            return Err(format!("probabilities sum to {sum}, not 1"));
        }
        Ok(())
    }
}

/// A tweet paired with its polarity probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarizedTweet {
    #[serde(flatten)]
    pub tweet: TweetRecord,
    #[serde(flatten)]
    pub polarity: PolarityTriple,
}

// ---------------------------------------------------------------------------
// Keyword filter

/// Case-insensitive term and hashtag filter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordFilter {
    terms: BTreeSet<String>,
    hashtags: BTreeSet<String>,
}

impl KeywordFilter {
    /// Builds a filter. Hashtags may be given with or without the leading `#`.
    pub fn new<S: AsRef<str>>(
        terms: impl IntoIterator<Item = S>,
        hashtags: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        let terms: BTreeSet<String> = terms
            .into_iter()
            .map(|t| t.as_ref().trim().to_lowercase())
            .filter(|t| !t.is_empty())
            .collect();
        let hashtags: BTreeSet<String> = hashtags
            .into_iter()
            .map(|h| h.as_ref().trim().trim_start_matches('#').to_lowercase())
            .filter(|h| !h.is_empty())
            .collect();
        if terms.is_empty() && hashtags.is_empty() {
            return Err(Error::validation("keyword filter has no terms or hashtags"));
        }
        Ok(KeywordFilter { terms, hashtags })
    }

    /// Parses a filter file: one entry per line, entries starting with `#`
    /// are hashtags, everything else is a term, blank lines are ignored.
    pub fn from_lines(text: &str) -> Result<Self> {
        let (tags, terms): (Vec<&str>, Vec<&str>) = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .partition(|l| l.starts_with('#'));
        Self::new(terms, tags)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_lines(&crate::io::read_to_string(path)?)
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().map(String::as_str)
    }

    pub fn hashtags(&self) -> impl Iterator<Item = &str> {
        self.hashtags.iter().map(String::as_str)
    }

    pub fn matches(&self, text: &str) -> bool {
        let lower = text.to_lowercase();
        if self.terms.iter().any(|t| lower.contains(t.as_str())) {
            return true;
        }
        !self.hashtags.is_empty() && hashtag_tokens(&lower).any(|h| self.hashtags.contains(h))
    }
}

impl Default for KeywordFilter {
    fn default() -> Self {
        KeywordFilter::new(
            ["Russia", "Ukraine"],
            [
                "#IStandwithRussia",
                "#StopRussia",
                "#IstandwithPutin",
                "#RussiaUkraineWar",
            ],
        )
        .expect("default filter is nonempty")
    }
}

/// Yields the body of every `#token` in `text` (without the `#`).
fn hashtag_tokens(text: &str) -> impl Iterator<Item = &str> {
    text.match_indices('#').filter_map(move |(i, _)| {
        let body = &text[i + 1..];
        let end = body
            .char_indices()
            .find(|(_, c)| !(c.is_alphanumeric() || *c == '_'))
            .map_or(body.len(), |(j, _)| j);
        (end > 0).then(|| &body[..end])
    })
}

/// Keeps the records whose text matches `filter`, preserving order.
pub fn filter_keywords(records: Vec<TweetRecord>, filter: &KeywordFilter) -> Vec<TweetRecord> {
    records
        .into_iter()
        .filter(|r| filter.matches(&r.text))
        .collect()
}

// ---------------------------------------------------------------------------
// Text normalisation

static RETWEET_PREFIX: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\bRT\s*@\w+:?").expect("valid regex"));
static MENTION: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"@\w+").expect("valid regex"));
static HYPERLINK: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)(?:https?://|www\.)\S*").expect("valid regex"));

/// Code points treated as emoji inside the Basic Multilingual Plane.
/// Everything above U+FFFF is treated as emoji as well.
const BMP_EMOJI_RANGES: &[(u32, u32)] = &[
    (0x200D, 0x200D), // zero width joiner
    (0x20E3, 0x20E3), // combining keycap
    (0x2300, 0x23FF), // miscellaneous technical
    (0x24C2, 0x24C2),
    (0x25A0, 0x25FF), // geometric shapes
    (0x2600, 0x27BF), // miscellaneous symbols, dingbats
    (0x2900, 0x297F),
    (0x2B00, 0x2BFF),
    (0x3030, 0x3030),
    (0x303D, 0x303D),
    (0x3297, 0x3297),
    (0x3299, 0x3299),
    (0xFE00, 0xFE0F), // variation selectors
];

pub fn is_emoji(c: char) -> bool {
    let cp = c as u32;
    cp > 0xFFFF
        || BMP_EMOJI_RANGES
            .iter()
            .any(|&(lo, hi)| (lo..=hi).contains(&cp))
}

/// Normalises tweet text for classification: drops retweet prefixes and
/// mentions, then hyperlinks and emoji, then every character that is not
/// alphanumeric, and finally collapses whitespace.
pub fn preprocess_text(text: &str) -> String {
    let text = RETWEET_PREFIX.replace_all(text, " ");
    let text = MENTION.replace_all(&text, " ");
    let text = HYPERLINK.replace_all(&text, " ");
    let mut cleaned = String::with_capacity(text.len());
    for c in text.chars() {
        if is_emoji(c) {
            continue;
        }
        if c.is_alphanumeric() {
            cleaned.push(c);
        } else if c.is_whitespace() {
            cleaned.push(' ');
        }
    }
    cleaned.split_whitespace().collect::<Vec<_>>().join(" ")
}

// ---------------------------------------------------------------------------
// Tweet parsing

/// Maps [`TweetRecord`] fields to source column or key names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldSchema {
    pub tweet_id: String,
    pub author_id: String,
    pub text: String,
    pub retweet_count: String,
    pub like_count: String,
    pub referenced_tweet_id: String,
    pub author_followers: String,
    pub verified: String,
    pub timestamp: String,
    /// Optional language column; rows whose language differs from
    /// `keep_lang` are skipped. An empty `keep_lang` keeps every row.
    pub lang: String,
    pub keep_lang: String,
}

impl Default for FieldSchema {
    fn default() -> Self {
        FieldSchema {
            tweet_id: "tweet_id".into(),
            author_id: "author_id".into(),
            text: "text".into(),
            retweet_count: "retweet_count".into(),
            like_count: "like_count".into(),
            referenced_tweet_id: "referenced_tweet_id".into(),
            author_followers: "author_followers".into(),
            verified: "verified".into(),
            timestamp: "timestamp".into(),
            lang: "lang".into(),
            keep_lang: "en".into(),
        }
    }
}

#[derive(Deserialize)]
struct SchemaFile {
    #[serde(default)]
    fields: FieldSchema,
}

impl FieldSchema {
    /// Reads a `[fields]` table of `record_field = "source_name"` pairs.
    pub fn load(path: &Path) -> Result<Self> {
        let text = crate::io::read_to_string(path)?;
        let file: SchemaFile =
            toml::from_str(&text).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
        file.fields.validate()?;
        Ok(file.fields)
    }

    pub fn validate(&self) -> Result<()> {
        for (field, name) in self.mandatory() {
            if name.trim().is_empty() {
                return Err(Error::Schema(format!(
                    "mandatory field `{field}` has no source name"
                )));
            }
        }
        Ok(())
    }

    fn mandatory(&self) -> [(&'static str, &str); 3] {
        [
            ("tweet_id", &self.tweet_id),
            ("author_id", &self.author_id),
            ("text", &self.text),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TweetFormat {
    JsonLines,
    Csv,
}

impl TweetFormat {
    /// Picks the format from the file extension, falling back to sniffing
    /// the first non-blank byte (`{` means JSON-lines).
    pub fn detect(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => return Ok(TweetFormat::Csv),
            Some("jsonl" | "json" | "ndjson") => return Ok(TweetFormat::JsonLines),
            _ => {}
        }
        let mut head = [0u8; 512];
        let n = fs::File::open(path)
            .and_then(|mut f| f.read(&mut head))
            .map_err(|e| Error::io(path, e))?;
        let first = head[..n].iter().find(|b| !b.is_ascii_whitespace());
        Ok(match first {
            Some(b'{') => TweetFormat::JsonLines,
            _ => TweetFormat::Csv,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MalformedLine {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct ParsedTweets {
    pub records: Vec<TweetRecord>,
    pub malformed: Vec<MalformedLine>,
    /// Rows dropped by the language column.
    pub lang_skipped: usize,
}

pub fn parse_tweets(path: &Path, schema: &FieldSchema) -> Result<ParsedTweets> {
    let format = TweetFormat::detect(path)?;
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_tweets_from(BufReader::new(file), format, schema).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub fn parse_tweets_from<R: BufRead>(
    reader: R,
    format: TweetFormat,
    schema: &FieldSchema,
) -> Result<ParsedTweets> {
    schema.validate()?;
    let mut out = ParsedTweets::default();
    let accept = |line: usize, row: Map<String, Value>, out: &mut ParsedTweets| {
        match extract_record(&row, schema) {
            Ok(Some(rec)) => out.records.push(rec),
            Ok(None) => out.lang_skipped += 1,
            Err(reason) => out.malformed.push(MalformedLine { line, reason }),
        }
    };
    match format {
        TweetFormat::JsonLines => {
            for (i, line) in reader.lines().enumerate() {
                let line = line.map_err(|e| Error::io("<tweets>", e))?;
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<Value>(&line) {
                    Ok(Value::Object(row)) => accept(i + 1, row, &mut out),
                    Ok(_) => out.malformed.push(MalformedLine {
                        line: i + 1,
                        reason: "not a JSON object".into(),
                    }),
                    Err(e) => out.malformed.push(MalformedLine {
                        line: i + 1,
                        reason: e.to_string(),
                    }),
                }
            }
        }
        TweetFormat::Csv => {
            let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
            let headers = rdr
                .headers()
                .map_err(|e| Error::Schema(format!("unreadable CSV header: {e}")))?
                .clone();
            for (field, name) in schema.mandatory() {
                if !headers.iter().any(|h| h == name) {
                    return Err(Error::Schema(format!(
                        "CSV header lacks column `{name}` for mandatory field `{field}`"
                    )));
                }
            }
            for (i, row) in rdr.records().enumerate() {
                let line = i + 2;
                let row = match row {
                    Ok(r) => r,
                    Err(e) => {
                        out.malformed.push(MalformedLine {
                            line,
                            reason: e.to_string(),
                        });
                        continue;
                    }
                };
                let map = headers
                    .iter()
                    .zip(row.iter())
                    .filter(|(_, v)| !v.is_empty())
                    .map(|(h, v)| (h.to_string(), Value::String(v.to_string())))
                    .collect();
                accept(line, map, &mut out);
            }
        }
    }
    check_unique_ids(out.records.iter().map(|r| r.tweet_id.as_str()), "tweet_id")?;
    Ok(out)
}

fn check_unique_ids<'a>(ids: impl Iterator<Item = &'a str>, what: &str) -> Result<()> {
    let mut seen = HashSet::new();
    let mut dups = BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            dups.insert(id);
        }
    }
    if dups.is_empty() {
        Ok(())
    } else {
        let list: Vec<&str> = dups.into_iter().collect();
        Err(Error::validation(format!(
            "duplicate {what} values: {}",
            list.join(", ")
        )))
    }
}

/// `Ok(None)` means the row was filtered out by language.
fn extract_record(
    row: &Map<String, Value>,
    schema: &FieldSchema,
) -> std::result::Result<Option<TweetRecord>, String> {
    if !schema.keep_lang.is_empty() {
        if let Some(lang) = opt_string(row, &schema.lang)? {
            if !lang.eq_ignore_ascii_case(&schema.keep_lang) {
                return Ok(None);
            }
        }
    }
    let required = |name: &str| {
        opt_string(row, name)?.ok_or_else(|| format!("missing mandatory field `{name}`"))
    };
    let tweet_id = required(&schema.tweet_id)?;
    let author_id = required(&schema.author_id)?;
    let text = opt_string(row, &schema.text)?
        .ok_or_else(|| format!("missing mandatory field `{}`", schema.text))?;
    let referenced_tweet_id =
        opt_string(row, &schema.referenced_tweet_id)?.filter(|s| !s.is_empty());
    if referenced_tweet_id.as_deref() == Some(tweet_id.as_str()) {
        return Err(format!("tweet {tweet_id} references itself"));
    }
    Ok(Some(TweetRecord {
        tweet_id,
        author_id,
        text,
        retweet_count: count(row, &schema.retweet_count)?,
        like_count: count(row, &schema.like_count)?,
        referenced_tweet_id,
        author_followers: count(row, &schema.author_followers)?,
        verified: flag(row, &schema.verified)?,
        timestamp: opt_string(row, &schema.timestamp)?.filter(|s| !s.is_empty()),
    }))
}

fn opt_string(row: &Map<String, Value>, key: &str) -> std::result::Result<Option<String>, String> {
    match row.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(Value::Number(n)) => Ok(Some(n.to_string())),
        Some(other) => Err(format!("field `{key}` has unexpected value {other}")),
    }
}

fn count(row: &Map<String, Value>, key: &str) -> std::result::Result<u64, String> {
    let v = match row.get(key) {
        None | Some(Value::Null) => return Ok(0),
        Some(v) => v,
    };
    let parsed = match v {
        Value::Number(n) => n.as_i64().or_else(|| n.as_u64().map(|u| u as i64)),
        Value::String(s) => s.trim().parse::<i64>().ok(),
        _ => None,
    };
    match parsed {
        Some(n) if n >= 0 => Ok(n as u64),
        Some(n) => Err(format!("field `{key}` is negative ({n})")),
        None => Err(format!("field `{key}` is not an integer: {v}")),
    }
}

fn flag(row: &Map<String, Value>, key: &str) -> std::result::Result<bool, String> {
    match row.get(key) {
        None | Some(Value::Null) => Ok(false),
        Some(Value::Bool(b)) => Ok(*b),
        Some(Value::String(s)) => match s.trim().to_ascii_lowercase().as_str() {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" | "" => Ok(false),
            other => Err(format!("field `{key}` is not a boolean: {other}")),
        },
        Some(Value::Number(n)) => Ok(n.as_i64() != Some(0)),
        Some(other) => Err(format!("field `{key}` is not a boolean: {other}")),
    }
}

/// Serialises records as JSON-lines with the default field names.
pub fn tweets_to_jsonl(records: &[TweetRecord]) -> String {
    to_jsonl(records)
}

fn to_jsonl<T: Serialize>(items: &[T]) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).expect("plain data serialises"));
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// Polarity probabilities

#[derive(Serialize, Deserialize)]
struct ProbLine {
    tweet_id: String,
    #[serde(flatten)]
    triple: PolarityTriple,
}

/// Reads a polarity file. Triples are not range-checked here; the check
/// happens at join time so errors name the offending tweet.
pub fn parse_probs(path: &Path) -> Result<BTreeMap<String, PolarityTriple>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = BTreeMap::new();
    let mut dups = BTreeSet::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: ProbLine = serde_json::from_str(&line)
            .map_err(|e| Error::parse(format!("{}:{}", path.display(), i + 1), e))?;
        if out.insert(parsed.tweet_id.clone(), parsed.triple).is_some() {
            dups.insert(parsed.tweet_id);
        }
    }
    if !dups.is_empty() {
        let list: Vec<String> = dups.into_iter().collect();
        return Err(Error::validation(format!(
            "duplicate tweet_id values in polarity file: {}",
            list.join(", ")
        )));
    }
    Ok(out)
}

pub fn probs_to_jsonl(probs: &BTreeMap<String, PolarityTriple>) -> String {
    let lines: Vec<ProbLine> = probs
        .iter()
        .map(|(id, t)| ProbLine {
            tweet_id: id.clone(),
            triple: *t,
        })
        .collect();
    to_jsonl(&lines)
}

#[derive(Debug, Clone, Default)]
pub struct Joined {
    pub pairs: Vec<PolarizedTweet>,
    /// Records with no probability triple; they are excluded from `pairs`.
    pub unmatched: usize,
}

/// Inner join of records and probabilities on tweet id, in record order.
pub fn join_polarity(
    records: Vec<TweetRecord>,
    probs: &BTreeMap<String, PolarityTriple>,
) -> Result<Joined> {
    let mut joined = Joined::default();
    for tweet in records {
        match probs.get(&tweet.tweet_id) {
            Some(triple) => {
                triple.check().map_err(|msg| {
                    Error::validation(format!("tweet {}: {msg}", tweet.tweet_id))
                })?;
                joined.pairs.push(PolarizedTweet {
                    tweet,
                    polarity: *triple,
                });
            }
            None => joined.unmatched += 1,
        }
    }
    Ok(joined)
}

pub fn pairs_to_jsonl(pairs: &[PolarizedTweet]) -> String {
    to_jsonl(pairs)
}

pub fn read_pairs(path: &Path) -> Result<Vec<PolarizedTweet>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let pair: PolarizedTweet = serde_json::from_str(&line)
            .map_err(|e| Error::parse(format!("{}:{}", path.display(), i + 1), e))?;
        pair.polarity
            .check()
            .map_err(|m| Error::validation(format!("tweet {}: {m}", pair.tweet.tweet_id)))?;
        out.push(pair);
    }
    check_unique_ids(out.iter().map(|p| p.tweet.tweet_id.as_str()), "tweet_id")?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rec(id: &str, text: &str) -> TweetRecord {
        TweetRecord {
            tweet_id: id.into(),
            author_id: "a".into(),
            text: text.into(),
            retweet_count: 0,
            like_count: 0,
            referenced_tweet_id: None,
            author_followers: 0,
            verified: false,
            timestamp: None,
        }
    }

    fn parse_str(s: &str, format: TweetFormat) -> Result<ParsedTweets> {
        parse_tweets_from(s.as_bytes(), format, &FieldSchema::default())
    }

    #[test]
    fn three_json_lines() {
        let src = r#"{"tweet_id":"t1","author_id":"a","text":"x"}
{"tweet_id":"t2","author_id":"b","text":"y","retweet_count":3}
{"tweet_id":"t3","author_id":"c","text":"z","referenced_tweet_id":"t1"}
"#;
        let p = parse_str(src, TweetFormat::JsonLines).unwrap();
        assert_eq!(p.records.len(), 3);
        assert!(p.malformed.is_empty());
        assert_eq!(p.records[1].retweet_count, 3);
        assert_eq!(p.records[2].referenced_tweet_id.as_deref(), Some("t1"));
    }

    #[test]
    fn negative_like_count_is_malformed() {
        let src = r#"{"tweet_id":"t1","author_id":"a","text":"x","like_count":-1}
{"tweet_id":"t2","author_id":"a","text":"x"}"#;
        let p = parse_str(src, TweetFormat::JsonLines).unwrap();
        assert_eq!(p.records.len(), 1);
        assert_eq!(p.malformed.len(), 1);
        assert_eq!(p.malformed[0].line, 1);
    }

    #[test]
    fn duplicate_ids_are_named() {
        let src = r#"{"tweet_id":"t1","author_id":"a","text":"x"}
{"tweet_id":"t1","author_id":"b","text":"y"}"#;
        let err = parse_str(src, TweetFormat::JsonLines).unwrap_err();
        assert!(matches!(err, Error::Validation(ref m) if m.contains("t1")));
    }

    #[test]
    fn self_reference_and_garbage_lines_are_malformed() {
        let src = "{\"tweet_id\":\"t1\",\"author_id\":\"a\",\"text\":\"x\",\"referenced_tweet_id\":\"t1\"}\nnot json\n[1]\n";
        let p = parse_str(src, TweetFormat::JsonLines).unwrap();
        assert_eq!(p.records.len(), 0);
        assert_eq!(p.malformed.len(), 3);
    }

    #[test]
    fn csv_with_custom_schema() {
        let src = "id,user,body,rts,lang\n1,u1,hello,2,en\n2,u2,bonjour,0,fr\n3,u3,hi,-4,en\n";
        let schema = FieldSchema {
            tweet_id: "id".into(),
            author_id: "user".into(),
            text: "body".into(),
            retweet_count: "rts".into(),
            ..FieldSchema::default()
        };
        let p = parse_tweets_from(src.as_bytes(), TweetFormat::Csv, &schema).unwrap();
        assert_eq!(p.records.len(), 1);
        assert_eq!(p.records[0].retweet_count, 2);
        assert_eq!(p.lang_skipped, 1);
        assert_eq!(p.malformed.len(), 1);
        assert_eq!(p.malformed[0].line, 4);
    }

    #[test]
    fn csv_missing_mandatory_column_is_schema_error() {
        let src = "tweet_id,text\n1,hello\n";
        let err = parse_str(src, TweetFormat::Csv).unwrap_err();
        assert!(matches!(err, Error::Schema(ref m) if m.contains("author_id")));
    }

    #[test]
    fn empty_mandatory_mapping_is_schema_error() {
        let schema = FieldSchema {
            tweet_id: String::new(),
            ..FieldSchema::default()
        };
        let err = parse_tweets_from(&b""[..], TweetFormat::JsonLines, &schema).unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
    }

    #[test]
    fn unreadable_source_is_io_error() {
        let err = parse_tweets(Path::new("/nonexistent/tweets.jsonl"), &FieldSchema::default())
            .unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn keyword_filter_examples() {
        let f = KeywordFilter::default();
        assert!(f.matches("I support ukraine today"));
        assert!(!f.matches("nice weather"));
        assert!(f.matches("#StopRussia now"));
        let tags_only = KeywordFilter::new(Vec::<&str>::new(), vec!["#StopRussia"]).unwrap();
        assert!(tags_only.matches("#stoprussia now"));
        assert!(!tags_only.matches("#StopRussiaNow"));
        assert!(!tags_only.matches("StopRussia"));
    }

    #[test]
    fn keyword_filter_preserves_order() {
        let recs = vec![rec("1", "Ukraine"), rec("2", "cats"), rec("3", "RUSSIA")];
        let kept = filter_keywords(recs, &KeywordFilter::default());
        let ids: Vec<_> = kept.iter().map(|r| r.tweet_id.as_str()).collect();
        assert_eq!(ids, ["1", "3"]);
    }

    #[test]
    fn filter_file_format() {
        let f = KeywordFilter::from_lines("Russia\n\n#StopRussia\n").unwrap();
        assert_eq!(f.terms().collect::<Vec<_>>(), ["russia"]);
        assert_eq!(f.hashtags().collect::<Vec<_>>(), ["stoprussia"]);
        assert!(KeywordFilter::from_lines("\n  \n").is_err());
    }

    #[test]
    fn preprocess_examples() {
        assert_eq!(
            preprocess_text("RT @foo: Hello!! 😀 http://x.co #StopRussia"),
            "Hello StopRussia"
        );
        assert_eq!(preprocess_text(""), "");
        assert_eq!(preprocess_text("@a @b @c"), "");
        assert_eq!(preprocess_text("RT@bar: ok\tgo www.x.org/y ☀"), "ok go");
    }

    #[test]
    fn join_examples() {
        let recs: Vec<_> = (0..5).map(|i| rec(&format!("t{i}"), "x")).collect();
        let t = PolarityTriple::new(0.2, 0.3, 0.5).unwrap();
        let all: BTreeMap<_, _> = (0..5).map(|i| (format!("t{i}"), t)).collect();
        let j = join_polarity(recs.clone(), &all).unwrap();
        assert_eq!((j.pairs.len(), j.unmatched), (5, 0));

        let some: BTreeMap<_, _> = [0, 2, 4].iter().map(|i| (format!("t{i}"), t)).collect();
        let j = join_polarity(recs.clone(), &some).unwrap();
        assert_eq!((j.pairs.len(), j.unmatched), (3, 2));
        let ids: Vec<_> = j.pairs.iter().map(|p| p.tweet.tweet_id.as_str()).collect();
        assert_eq!(ids, ["t0", "t2", "t4"]);

        let mut bad = all.clone();
        bad.insert(
            "t3".into(),
            PolarityTriple {
                p_russia: 0.5,
                p_notsure: 0.5,
                p_ukraine: 0.5,
            },
        );
        let err = join_polarity(recs, &bad).unwrap_err();
        assert!(matches!(err, Error::Validation(ref m) if m.contains("t3")));
    }

    #[test]
    fn triple_validation() {
        assert!(PolarityTriple::new(1.0, 0.0, 0.0).is_ok());
        assert!(PolarityTriple::new(-0.1, 0.6, 0.5).is_err());
        assert!(PolarityTriple::new(0.3, 0.3, 0.3).is_err());
    }

    #[test]
    fn probs_file_round_trip_and_duplicates() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("probs.jsonl");
        let probs: BTreeMap<_, _> = [("a".to_string(), PolarityTriple::new(0.1, 0.2, 0.7).unwrap())]
            .into_iter()
            .collect();
        fs::write(&p, probs_to_jsonl(&probs)).unwrap();
        assert_eq!(parse_probs(&p).unwrap(), probs);
        let line = probs_to_jsonl(&probs);
        fs::write(&p, format!("{line}{line}")).unwrap();
        assert!(matches!(parse_probs(&p), Err(Error::Validation(_))));
    }

    fn arb_record() -> impl Strategy<Value = TweetRecord> {
        (
            "[a-z0-9]{1,8}",
            "\\PC{0,40}",
            any::<u32>(),
            any::<u32>(),
            proptest::option::of("[a-z0-9]{1,8}"),
            any::<u32>(),
            any::<bool>(),
            proptest::option::of("2022-0[1-9]-[0-2][0-9]T[0-2][0-9]:00:00Z"),
        )
            .prop_map(|(author, text, rt, lk, reference, fol, ver, ts)| TweetRecord {
                tweet_id: String::new(),
                author_id: author,
                text,
                retweet_count: rt as u64,
                like_count: lk as u64,
                referenced_tweet_id: reference.map(|r| format!("r{r}")),
                author_followers: fol as u64,
                verified: ver,
                timestamp: ts,
            })
    }

    proptest! {
        #[test]
        fn jsonl_round_trip(mut recs in proptest::collection::vec(arb_record(), 0..20)) {
            for (i, r) in recs.iter_mut().enumerate() {
                r.tweet_id = format!("t{i}");
            }
            let text = tweets_to_jsonl(&recs);
            let parsed = parse_tweets_from(text.as_bytes(), TweetFormat::JsonLines,
                &FieldSchema { keep_lang: String::new(), ..FieldSchema::default() }).unwrap();
            prop_assert!(parsed.malformed.is_empty());
            prop_assert_eq!(parsed.records, recs);
        }

        #[test]
        fn preprocess_is_clean_and_idempotent(s in "\\PC{0,80}") {
            let once = preprocess_text(&s);
            prop_assert!(once.chars().all(|c| c.is_alphanumeric() || c == ' '));
            prop_assert!(!once.contains("  "));
            prop_assert_eq!(once.trim(), once.as_str());
            prop_assert_eq!(preprocess_text(&once), once);
        }

        #[test]
        fn filter_is_idempotent(texts in proptest::collection::vec("(?i)(ukraine|russia|#stoprussia|cat|dog| ){0,5}", 0..20)) {
            let recs: Vec<_> = texts.iter().enumerate().map(|(i, t)| rec(&i.to_string(), t)).collect();
            let f = KeywordFilter::default();
            let once = filter_keywords(recs, &f);
            let twice = filter_keywords(once.clone(), &f);
            prop_assert_eq!(once, twice);
        }
    }
}
