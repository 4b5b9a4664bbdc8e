//! Synthetic hiring markets with a planted prestige hierarchy.
//!
//! Institutions sit in ordered tiers (tier 0 on top). Hires flow from
//! higher-prestige trainers to same-or-lower employers with a configurable
//! bias, with separate probabilities for self-hires and overseas inflow.
//! Output is deterministic for a fixed seed, which makes generated markets
//! usable as reproducible fixtures.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{HireRecord, Institution, InstitutionRegistry};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketSpec {
    /// Institutions per tier, ordered top to bottom.
    pub tier_sizes: Vec<usize>,
    /// Expected hires per institution per year, one rate per tier.
    pub hire_rates: Vec<f64>,
    /// Probability that a hire respects the hierarchy (trainer tier at or
    /// above the employer's); the rest pick a trainer tier uniformly.
    pub downward_bias: f64,
    /// Probability of a self-hire.
    pub self_loop_prob: f64,
    /// Probability of hiring from the aggregated overseas node.
    pub overseas_prob: f64,
    pub start_year: i32,
    pub end_year: i32,
    pub seed: u64,
}

impl Default for MarketSpec {
    fn default() -> Self {
        Self {
            tier_sizes: vec![5, 10, 20, 40],
            hire_rates: vec![2.0, 1.5, 1.2, 1.0],
            downward_bias: 0.9,
            self_loop_prob: 0.08,
            overseas_prob: 0.05,
            start_year: 1980,
            end_year: 2021,
            seed: 42,
        }
    }
}

impl MarketSpec {
    pub fn validate(&self) -> Result<()> {
        if self.tier_sizes.is_empty() {
            return Err(Error::Config("market needs at least one tier".into()));
        }
        if self.tier_sizes.iter().any(|&s| s == 0) {
            return Err(Error::Config("tier sizes must be positive".into()));
        }
        if self.hire_rates.len() != self.tier_sizes.len() {
            return Err(Error::Config(format!(
                "{} hire rates for {} tiers",
                self.hire_rates.len(),
                self.tier_sizes.len()
            )));
        }
        if self.hire_rates.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::Config("hire rates must be non-negative".into()));
        }
        for (name, p) in [
            ("downward_bias", self.downward_bias),
            ("self_loop_prob", self.self_loop_prob),
            ("overseas_prob", self.overseas_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} must be in [0, 1], got {p}")));
            }
        }
        if self.start_year > self.end_year {
            return Err(Error::Config("start_year must not exceed end_year".into()));
        }
        Ok(())
    }

    pub fn tier_count(&self) -> usize {
        self.tier_sizes.len()
    }

    /// Canonical id of institution `idx` in `tier`, e.g. `t00_i003`.
    pub fn institution_id(tier: usize, idx: usize) -> String {
        format!("t{tier:02}_i{idx:03}")
    }

    /// Tier of a generated institution id, if it is one.
    pub fn tier_of(&self, id: &str) -> Option<usize> {
        let tier: usize = id.strip_prefix('t')?.get(..2)?.parse().ok()?;
        (tier < self.tier_sizes.len()).then_some(tier)
    }

    /// Registry for the generated market: every institution plus the overseas
    /// aggregate. The two leading top-tier institutions carry the `tsinghua`
    /// and `peking` tags so predictor panels are computable out of the box.
    pub fn registry(&self) -> Result<InstitutionRegistry> {
        self.validate()?;
        let mut registry = InstitutionRegistry::new();
        for (tier, &size) in self.tier_sizes.iter().enumerate() {
            for idx in 0..size {
                let id = Self::institution_id(tier, idx);
                let mut tags: BTreeSet<String> = BTreeSet::from([format!("tier{tier}")]);
                if tier == 0 && idx == 0 {
                    tags.insert("tsinghua".into());
                }
                if tier == 0 && idx == 1 {
                    tags.insert("peking".into());
                }
                registry.insert(Institution {
                    canonical_id: id.clone(),
                    display_name: format!("Tier {tier} institution {idx}"),
                    aliases: Vec::new(),
                    is_overseas: false,
                    tags,
                })?;
            }
        }
        Ok(registry)
    }
}

/// Generates hire records for a planted hierarchy market.
///
/// Every emitted record satisfies the strict year rule. Iteration order is
/// year, then tier, then institution, so output is reproducible byte for
/// byte given the same spec.
pub fn synthesize_market(spec: &MarketSpec) -> Result<Vec<HireRecord>> {
    spec.validate()?;
    // ChaCha keeps the stream identical across platforms and rand upgrades.
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut records = Vec::new();
    let mut person_seq = 0usize;

    for year in spec.start_year..=spec.end_year {
        for (tier, &size) in spec.tier_sizes.iter().enumerate() {
            let rate = spec.hire_rates[tier];
            for idx in 0..size {
                let employer = MarketSpec::institution_id(tier, idx);
                let hires = if rate > 0.0 {
                    Poisson::new(rate).expect("validated rate").sample(&mut rng) as u64
                } else {
                    0
                };
                for _ in 0..hires {
                    let trainer = pick_trainer(spec, &mut rng, tier, idx);
                    let lag = rng.gen_range(1..=5);
                    records.push(HireRecord {
                        person_key: Some(format!("p{person_seq:06}")),
                        degree_unit: trainer,
                        employer_unit: employer.clone(),
                        graduation_year: year - lag,
                        employment_year: year,
                    });
                    person_seq += 1;
                }
            }
        }
    }
    Ok(records)
}

fn pick_trainer(spec: &MarketSpec, rng: &mut ChaCha8Rng, employer_tier: usize, employer_idx: usize) -> String {
    if rng.gen_bool(spec.overseas_prob) {
        return crate::ingest::DEFAULT_OVERSEAS_ID.to_string();
    }
    if rng.gen_bool(spec.self_loop_prob) {
        return MarketSpec::institution_id(employer_tier, employer_idx);
    }
    let tier_count = spec.tier_count();
    let trainer_tier = if rng.gen_bool(spec.downward_bias) {
        rng.gen_range(0..=employer_tier)
    } else {
        rng.gen_range(0..tier_count)
    };
    // Avoid accidental self-loops so that self_loop_prob = 0 really means a
    // zero diagonal.
    let size = spec.tier_sizes[trainer_tier];
    let exclude = if trainer_tier == employer_tier { Some(employer_idx) } else { None };
    let choices = match exclude {
        Some(_) if size == 1 => {
            // Singleton tier: fall back to any other institution in the market.
            let mut all: Vec<(usize, usize)> = Vec::new();
            for (t, &s) in spec.tier_sizes.iter().enumerate() {
                for i in 0..s {
                    if (t, i) != (employer_tier, employer_idx) {
                        all.push((t, i));
                    }
                }
            }
            if all.is_empty() {
                return crate::ingest::DEFAULT_OVERSEAS_ID.to_string();
            }
            let (t, i) = all[rng.gen_range(0..all.len())];
            return MarketSpec::institution_id(t, i);
        }
        Some(skip) => {
            let mut i = rng.gen_range(0..size - 1);
            if i >= skip {
                i += 1;
            }
            i
        }
        None => rng.gen_range(0..size),
    };
    MarketSpec::institution_id(trainer_tier, choices)
}
