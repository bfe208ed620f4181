//! Seeded generator of synthetic two-sided contact logs with planted
//! taste/attractiveness structure.
//!
//! Every user gets a latent taste vector and a latent attractiveness vector.
//! Initiators approach opposite-gender users with probability increasing in
//! `<taste(initiator), attract(target)>`, and targets answer with probability
//! `sigmoid(<taste(target), attract(initiator)> / reply_temperature + r(target) + b)`,
//! where `r` is a personal responsiveness offset and the global bias `b` is
//! solved for so the expected reciprocity rate hits the configured target. Defaults echo a mid-sized dating site: 60% men,
//! 196 days, about ten first contacts per user, 79.8% of them sent by men, and
//! 25.8% answered.
//!
//! Randomness comes from a single ChaCha8 stream seeded with `seed`, consumed
//! sequentially, so a given config reproduces bit-for-bit on every platform.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Geometric, LogNormal, StandardNormal};

use crate::contact_log::{aggregate_dyads, ContactEvent, Gender, UserIdx, UserRecord, UserTable};
use crate::{Error, Result};

/// Name and version of the random stream, recorded in output metadata.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.9)";

/// First contacts per user in the reference site (474,931 over 47,000 users).
pub const CONTACTS_PER_USER: f64 = 474_931.0 / 47_000.0;

/// A categorical profile attribute whose category is drawn from
/// `softmax(weight_c * appeal)`, `appeal` being the user's standardised first
/// attractiveness coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeSpec {
    pub name: String,
    pub categories: Vec<String>,
    pub weights: Vec<f64>,
}

impl AttributeSpec {
    pub fn new(name: &str, categories: &[(&str, f64)]) -> Self {
        AttributeSpec {
            name: name.to_string(),
            categories: categories.iter().map(|c| c.0.to_string()).collect(),
            weights: categories.iter().map(|c| c.1).collect(),
        }
    }
}

pub fn default_attributes() -> Vec<AttributeSpec> {
    vec![
        AttributeSpec::new(
            "body_type",
            &[
                ("athletic", 1.0),
                ("fit", 0.6),
                ("average", -0.5),
                ("thin", -0.3),
                ("curvy", 0.0),
            ],
        ),
        AttributeSpec::new(
            "children",
            &[
                ("want_many", 0.5),
                ("want_some", 0.2),
                ("want_none", -0.5),
                ("has_kids", 0.0),
            ],
        ),
        AttributeSpec::new("photos", &[("0", -0.8), ("1-3", 0.0), ("4+", 0.8)]),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub num_users: usize,
    pub male_fraction: f64,
    pub total_days: u32,
    pub target_initial_contacts: usize,
    pub male_initiation_share: f64,
    pub target_reciprocity_rate: f64,
    pub latent_dim: usize,
    /// Log-normal location of per-user initiation propensity.
    pub activity_mu: f64,
    /// Log-normal scale of per-user initiation propensity.
    pub activity_sigma: f64,
    /// Softmax temperature for choosing whom to approach.
    pub taste_temperature: f64,
    /// Temperature of the reply logit (reply noise).
    pub reply_temperature: f64,
    /// Spread of each user's personal reply-logit offset (how readily they answer anyone).
    pub responsiveness_sigma: f64,
    /// Extra reply logit when the initiator is a woman.
    pub female_initiator_reply_boost: f64,
    /// Replies arrive `1..=max_reply_delay` days after the first contact.
    pub max_reply_delay: u32,
    /// Mean number of additional messages in a reciprocal dyad.
    pub extra_messages_mean: f64,
    pub attributes: Vec<AttributeSpec>,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig::with_users(2000, 42)
    }
}

impl SynthConfig {
    /// Default parameters for `num_users` users.
    pub fn with_users(num_users: usize, seed: u64) -> Self {
        SynthConfig {
            num_users,
            male_fraction: 0.60,
            total_days: 196,
            target_initial_contacts: libm::round(num_users as f64 * CONTACTS_PER_USER) as usize,
            male_initiation_share: 0.798,
            target_reciprocity_rate: 0.258,
            latent_dim: 2,
            activity_mu: 0.0,
            activity_sigma: 1.0,
            taste_temperature: 0.5,
            reply_temperature: 0.5,
            responsiveness_sigma: 2.5,
            female_initiator_reply_boost: 0.97,
            max_reply_delay: 14,
            extra_messages_mean: 1.5,
            attributes: default_attributes(),
            seed,
        }
    }

    pub fn num_males(&self) -> usize {
        libm::round(self.num_users as f64 * self.male_fraction) as usize
    }

    pub fn validate(&self) -> Result<()> {
        let frac = |x: f64| x > 0.0 && x < 1.0;
        if !frac(self.male_fraction) {
            return Err(Error::InvalidParameter("male fraction must lie in (0, 1)"));
        }
        if !frac(self.male_initiation_share) {
            return Err(Error::InvalidParameter(
                "male initiation share must lie in (0, 1)",
            ));
        }
        if !frac(self.target_reciprocity_rate) {
            return Err(Error::InvalidParameter(
                "reciprocity rate must lie in (0, 1)",
            ));
        }
        let males = self.num_males();
        if self.num_users < 2 || males == 0 || males == self.num_users {
            return Err(Error::InvalidParameter(
                "both genders need at least one user",
            ));
        }
        if self.latent_dim == 0 {
            return Err(Error::InvalidParameter(
                "latent dimension must be at least 1",
            ));
        }
        if self.total_days < 2 {
            return Err(Error::InvalidParameter("need at least two days"));
        }
        if self.max_reply_delay == 0 {
            return Err(Error::InvalidParameter(
                "maximum reply delay must be at least 1",
            ));
        }
        if !(self.taste_temperature > 0.0 && self.reply_temperature > 0.0) {
            return Err(Error::InvalidParameter("temperatures must be positive"));
        }
        if self.responsiveness_sigma.is_nan() || self.responsiveness_sigma < 0.0 {
            return Err(Error::InvalidParameter(
                "responsiveness spread must be non-negative",
            ));
        }
        if self.activity_sigma.is_nan()
            || self.activity_sigma < 0.0
            || !self.activity_mu.is_finite()
        {
            return Err(Error::InvalidParameter("invalid activity distribution"));
        }
        if self.extra_messages_mean.is_nan() || self.extra_messages_mean < 0.0 {
            return Err(Error::InvalidParameter(
                "extra message mean must be non-negative",
            ));
        }
        for a in &self.attributes {
            if a.categories.is_empty() || a.categories.len() != a.weights.len() {
                return Err(Error::InvalidParameter(
                    "attribute needs one weight per category",
                ));
            }
        }
        Ok(())
    }
}

/// Latent factors of one user.
#[derive(Debug, Clone, PartialEq)]
pub struct Latent {
    pub taste: Vec<f64>,
    pub attractiveness: Vec<f64>,
    pub activity: f64,
    /// Personal reply-logit offset.
    pub responsiveness: f64,
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub users: UserTable,
    pub events: Vec<ContactEvent>,
    pub latents: Vec<Latent>,
    /// Calibrated global reply bias.
    pub reply_bias: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-x))
}

/// Generates users and a chronologically ordered contact log.
pub fn generate(config: &SynthConfig) -> Result<(UserTable, Vec<ContactEvent>)> {
    generate_detailed(config).map(|o| (o.users, o.events))
}

/// Like [`generate`], also returning the planted latent factors.
pub fn generate_detailed(config: &SynthConfig) -> Result<SynthOutput> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.num_users;
    let d = config.latent_dim;

    // Genders, shuffled so ids do not reveal them.
    let mut genders = vec![Gender::Female; n];
    genders[..config.num_males()].fill(Gender::Male);
    genders.shuffle(&mut rng);

    // Latent factors.
    let scale = 1.0 / libm::sqrt(d as f64);
    let activity_dist = LogNormal::new(config.activity_mu, config.activity_sigma)
        .map_err(|_| Error::InvalidParameter("invalid activity distribution"))?;
    let latents: Vec<Latent> = (0..n)
        .map(|_| {
            let mut draw = || -> Vec<f64> {
                (0..d)
                    .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
                    .collect()
            };
            let taste = draw();
            let attractiveness = draw();
            let activity = activity_dist.sample(&mut rng);
            let responsiveness = config.responsiveness_sigma * rng.sample::<f64, _>(StandardNormal);
            Latent {
                taste,
                attractiveness,
                activity,
                responsiveness,
            }
        })
        .collect();

    // Attributes, driven by the first attractiveness coordinate.
    let records: Vec<UserRecord> = (0..n)
        .map(|i| {
            let appeal = latents[i].attractiveness[0] / scale;
            let attributes = config
                .attributes
                .iter()
                .map(|a| {
                    let w: Vec<f64> = a.weights.iter().map(|w| libm::exp(w * appeal)).collect();
                    let c = WeightedIndex::new(&w)
                        .expect("finite positive weights")
                        .sample(&mut rng);
                    (a.name.clone(), a.categories[c].clone())
                })
                .collect();
            UserRecord {
                id: alloc::format!("u{:06}", i),
                gender: genders[i],
                attributes,
            }
        })
        .collect();
    let users = UserTable::new(records)?;

    let males: Vec<usize> = (0..n).filter(|&i| genders[i] == Gender::Male).collect();
    let females: Vec<usize> = (0..n).filter(|&i| genders[i] == Gender::Female).collect();

    // How many first contacts each user sends.
    let total = config.target_initial_contacts;
    let male_total = libm::round(total as f64 * config.male_initiation_share) as usize;
    let mut quota = vec![0usize; n];
    for (group, count) in [(&males, male_total), (&females, total - male_total)] {
        let weights: Vec<f64> = group.iter().map(|&i| latents[i].activity).collect();
        let pick = WeightedIndex::new(&weights)
            .map_err(|_| Error::InvalidParameter("degenerate activity weights"))?;
        for _ in 0..count {
            quota[group[pick.sample(&mut rng)]] += 1;
        }
    }

    // Whom they approach: Gumbel-top-k over softmax(<taste, attract> / T), which
    // samples without replacement proportionally to the softmax weights.
    let mut partners: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut dyads: Vec<(usize, usize)> = Vec::with_capacity(total);
    let mut keyed: Vec<(f64, usize)> = Vec::new();
    let mut taken = vec![false; n];
    for i in 0..n {
        if quota[i] == 0 {
            continue;
        }
        let pool = if genders[i] == Gender::Male {
            &females
        } else {
            &males
        };
        for &t in &partners[i] {
            taken[t as usize] = true;
        }
        keyed.clear();
        for &t in pool {
            if taken[t] {
                continue;
            }
            let logit =
                dot(&latents[i].taste, &latents[t].attractiveness) / config.taste_temperature;
            let u: f64 = rng.random();
            let gumbel = -libm::log(-libm::log(u.max(f64::MIN_POSITIVE)));
            keyed.push((logit + gumbel, t));
        }
        let take = quota[i].min(keyed.len());
        if take < keyed.len() {
            keyed.select_nth_unstable_by(take, |a, b| b.0.total_cmp(&a.0));
        }
        keyed[..take].sort_unstable_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        for &t in &partners[i] {
            taken[t as usize] = false;
        }
        for &(_, t) in &keyed[..take] {
            partners[i].push(t as u32);
            partners[t].push(i as u32);
            dyads.push((i, t));
        }
    }

    // When: first contact uniform over the window.
    let first_days: Vec<u32> = dyads
        .iter()
        .map(|_| rng.random_range(0..config.total_days))
        .collect();

    // Reply propensity per dyad, then calibrate the shared bias.
    let logits: Vec<f64> = dyads
        .iter()
        .map(|&(i, t)| {
            let boost = if genders[i] == Gender::Female {
                config.female_initiator_reply_boost
            } else {
                0.0
            };
            dot(&latents[t].taste, &latents[i].attractiveness) / config.reply_temperature
                + latents[t].responsiveness
                + boost
        })
        .collect();
    let in_window: Vec<f64> = first_days
        .iter()
        .map(|&day| {
            let room = (config.total_days - 1 - day).min(config.max_reply_delay);
            room as f64 / config.max_reply_delay as f64
        })
        .collect();
    let reply_bias = calibrate_bias(&logits, &in_window, config.target_reciprocity_rate)?;

    // Messages.
    let geometric = if config.extra_messages_mean > 0.0 {
        Some(
            Geometric::new(1.0 / (1.0 + config.extra_messages_mean))
                .map_err(|_| Error::InvalidParameter("invalid extra message mean"))?,
        )
    } else {
        None
    };
    let mut timed: Vec<(u32, u64, ContactEvent)> = Vec::with_capacity(dyads.len() * 2);
    let mut seq = 0u64;
    let mut push = |day: u32, s: usize, r: usize, timed: &mut Vec<(u32, u64, ContactEvent)>| {
        timed.push((
            day,
            seq,
            ContactEvent::new(UserIdx::from(s), UserIdx::from(r), day),
        ));
        seq += 1;
    };
    for (j, &(i, t)) in dyads.iter().enumerate() {
        let day = first_days[j];
        push(day, i, t, &mut timed);
        let replies = rng.random::<f64>() < sigmoid(logits[j] + reply_bias);
        let delay = rng.random_range(1..=config.max_reply_delay);
        if !replies || day + delay >= config.total_days {
            continue;
        }
        let mut day = day + delay;
        push(day, t, i, &mut timed);
        let extra = geometric.as_ref().map_or(0, |g| g.sample(&mut rng));
        // Back-and-forth continues, initiator first, until the window closes.
        for m in 0..extra {
            day += rng.random_range(0..=7);
            if day >= config.total_days {
                break;
            }
            let (s, r) = if m % 2 == 0 { (i, t) } else { (t, i) };
            push(day, s, r, &mut timed);
        }
    }
    timed.sort_unstable_by_key(|&(day, seq, _)| (day, seq));
    let events = timed.into_iter().map(|(_, _, e)| e).collect();

    Ok(SynthOutput {
        users,
        events,
        latents,
        reply_bias,
    })
}

/// Solves `mean_j sigmoid(logit_j + b) * in_window_j = target` for `b` by bisection.
fn calibrate_bias(logits: &[f64], in_window: &[f64], target: f64) -> Result<f64> {
    if logits.is_empty() {
        return Err(Error::Calibration("no first contacts were generated"));
    }
    let expected = |b: f64| {
        logits
            .iter()
            .zip(in_window)
            .map(|(&x, &w)| sigmoid(x + b) * w)
            .sum::<f64>()
            / logits.len() as f64
    };
    let (mut lo, mut hi) = (-60.0, 60.0);
    if expected(lo) > target || expected(hi) < target {
        return Err(Error::Calibration(
            "target reciprocity rate cannot be bracketed",
        ));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if expected(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Summary statistics of a contact log.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DatasetStats {
    pub num_users: usize,
    pub num_male: usize,
    pub num_female: usize,
    pub num_messages: usize,
    /// Number of dyads, i.e. first contacts.
    pub initial_contacts: usize,
    pub reciprocal_dyads: usize,
    pub male_initiation_share: Option<f64>,
    pub reciprocity_rate: Option<f64>,
    pub mean_messages_sent_male: Option<f64>,
    pub mean_messages_sent_female: Option<f64>,
    /// Share of first contacts sent by men that were answered.
    pub reply_rate_male: Option<f64>,
    pub reply_rate_female: Option<f64>,
}

pub fn summarize(users: &UserTable, events: &[ContactEvent]) -> DatasetStats {
    let ratio = |a: usize, b: usize| (b > 0).then(|| a as f64 / b as f64);
    let num_male = users.count_gender(Gender::Male);
    let num_female = users.len() - num_male;

    let mut sent = [0usize; 2];
    for e in events {
        sent[(users.gender(e.sender) == Gender::Female) as usize] += 1;
    }
    // [initiated, reciprocated] per initiator gender.
    let mut init = [[0usize; 2]; 2];
    for d in aggregate_dyads(events) {
        let g = (users.gender(d.initiator) == Gender::Female) as usize;
        init[g][0] += 1;
        init[g][1] += d.reciprocal as usize;
    }
    let initial_contacts = init[0][0] + init[1][0];
    let reciprocal_dyads = init[0][1] + init[1][1];
    DatasetStats {
        num_users: users.len(),
        num_male,
        num_female,
        num_messages: events.len(),
        initial_contacts,
        reciprocal_dyads,
        male_initiation_share: ratio(init[0][0], initial_contacts),
        reciprocity_rate: ratio(reciprocal_dyads, initial_contacts),
        mean_messages_sent_male: ratio(sent[0], num_male),
        mean_messages_sent_female: ratio(sent[1], num_female),
        reply_rate_male: ratio(init[0][1], init[0][0]),
        reply_rate_female: ratio(init[1][1], init[1][0]),
    }
}
