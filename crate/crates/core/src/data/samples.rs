//! Turning an interaction log into labeled impressions.

use std::collections::{BTreeMap, HashMap};

use super::log::{Event, InteractionLog, LogRow};

/// Default number of embedding rows for item and category ids.
pub const DEFAULT_VOCAB: usize = 1 << 16;

/// One simulated day.
pub const DEFAULT_ATTRIBUTION_WINDOW: i64 = 86_400;

/// Maps raw string ids into a fixed number of embedding rows (FNV-1a, then modulo).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Vocab {
    pub items: usize,
    pub categories: usize,
}

impl Default for Vocab {
    fn default() -> Self {
        Self {
            items: DEFAULT_VOCAB,
            categories: DEFAULT_VOCAB,
        }
    }
}

impl Vocab {
    pub fn item(&self, id: &str) -> u32 {
        (fnv1a(id) % self.items as u64) as u32
    }

    pub fn category(&self, id: &str) -> u32 {
        (fnv1a(id) % self.categories as u64) as u32
    }
}

fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// One labeled impression.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub user_id: String,
    /// Prior clicks as `(item, category)` rows, oldest first.
    pub behavior_seq: Vec<(u32, u32)>,
    /// Prior exposures as `(item, category)` rows, oldest first.
    pub exposure_seq: Vec<(u32, u32)>,
    pub target_item: u32,
    pub target_category: u32,
    pub label: bool,
    pub timestamp: i64,
    /// Latest timestamp among the events in both sequences.
    pub history_end: Option<i64>,
}

impl Sample {
    pub fn is_cold(&self) -> bool {
        self.behavior_seq.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub samples: Vec<Sample>,
}

impl Dataset {
    pub fn new(samples: Vec<Sample>) -> Self {
        Self { samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.samples.iter().filter(|s| s.label).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleConfig {
    /// Samples at or after this timestamp go to the test set.
    pub split_time: i64,
    /// Exposure window length `N`.
    pub exposure_len: usize,
    /// Behavior window length `B_max`.
    pub behavior_len: usize,
    /// A click on the same item within this many seconds after an exposure labels it positive.
    pub attribution_window: i64,
    pub vocab: Vocab,
}

struct UserEvents<'a> {
    exposures: Vec<&'a LogRow>,
    clicks: Vec<&'a LogRow>,
}

/// Builds one sample per exposure event and splits them by time.
///
/// Histories only contain events strictly earlier than the exposure, so
/// training features never see the test period.
pub fn build_samples(log: &InteractionLog, cfg: &SampleConfig) -> (Dataset, Dataset) {
    let mut users: BTreeMap<&str, UserEvents<'_>> = BTreeMap::new();
    for row in &log.rows {
        let entry = users.entry(row.user_id.as_str()).or_insert_with(|| UserEvents {
            exposures: Vec::new(),
            clicks: Vec::new(),
        });
        match row.event {
            Event::Exposure => entry.exposures.push(row),
            Event::Click => entry.clicks.push(row),
        }
    }

    let mut train = Vec::new();
    let mut test = Vec::new();
    for (user, mut ev) in users {
        ev.exposures.sort_by_key(|r| r.timestamp);
        ev.clicks.sort_by_key(|r| r.timestamp);

        let mut clicks_by_item: HashMap<&str, Vec<i64>> = HashMap::new();
        for c in &ev.clicks {
            clicks_by_item.entry(c.item_id.as_str()).or_default().push(c.timestamp);
        }

        let exposure_ids: Vec<(u32, u32)> = ev
            .exposures
            .iter()
            .map(|r| (cfg.vocab.item(&r.item_id), cfg.vocab.category(&r.category_id)))
            .collect();
        let click_ids: Vec<(u32, u32)> = ev
            .clicks
            .iter()
            .map(|r| (cfg.vocab.item(&r.item_id), cfg.vocab.category(&r.category_id)))
            .collect();

        let mut n_prior_exposures = 0;
        let mut n_prior_clicks = 0;
        for (i, row) in ev.exposures.iter().enumerate() {
            let t = row.timestamp;
            while n_prior_exposures < i && ev.exposures[n_prior_exposures].timestamp < t {
                n_prior_exposures += 1;
            }
            while n_prior_clicks < ev.clicks.len() && ev.clicks[n_prior_clicks].timestamp < t {
                n_prior_clicks += 1;
            }
            let label = clicks_by_item.get(row.item_id.as_str()).is_some_and(|ts| {
                let first = ts.partition_point(|&c| c < t);
                ts.get(first).is_some_and(|&c| c <= t + cfg.attribution_window)
            });
            let e_lo = n_prior_exposures.saturating_sub(cfg.exposure_len);
            let b_lo = n_prior_clicks.saturating_sub(cfg.behavior_len);
            let history_end = [
                n_prior_exposures.checked_sub(1).map(|j| ev.exposures[j].timestamp),
                n_prior_clicks.checked_sub(1).map(|j| ev.clicks[j].timestamp),
            ]
            .into_iter()
            .flatten()
            .max();
            let sample = Sample {
                user_id: user.to_owned(),
                behavior_seq: click_ids[b_lo..n_prior_clicks].to_vec(),
                exposure_seq: exposure_ids[e_lo..n_prior_exposures].to_vec(),
                target_item: exposure_ids[i].0,
                target_category: exposure_ids[i].1,
                label,
                timestamp: t,
                history_end,
            };
            if t < cfg.split_time {
                train.push(sample);
            } else {
                test.push(sample);
            }
        }
    }
    (Dataset::new(train), Dataset::new(test))
}

/// Samples whose user has no prior click.
pub fn cold_filter(dataset: &Dataset) -> Dataset {
    Dataset::new(dataset.samples.iter().filter(|s| s.is_cold()).cloned().collect())
}

/// `(cold, warm)` partition preserving order.
pub fn cold_partition(dataset: &Dataset) -> (Dataset, Dataset) {
    let (cold, warm): (Vec<Sample>, Vec<Sample>) = dataset.samples.iter().cloned().partition(Sample::is_cold);
    (Dataset::new(cold), Dataset::new(warm))
}
