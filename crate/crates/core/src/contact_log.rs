//! Users, timestamped contact events, and their aggregation into dyads.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gender {
    Male,
    Female,
}

impl Gender {
    pub fn opposite(self) -> Gender {
        match self {
            Gender::Male => Gender::Female,
            Gender::Female => Gender::Male,
        }
    }

    /// Single-letter code used in the users file.
    pub fn code(self) -> &'static str {
        match self {
            Gender::Male => "M",
            Gender::Female => "F",
        }
    }

    pub fn from_code(code: &str) -> Option<Gender> {
        match code {
            "M" => Some(Gender::Male),
            "F" => Some(Gender::Female),
            _ => None,
        }
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gender::Male => "male",
            Gender::Female => "female",
        })
    }
}

/// Position of a user in its [`UserTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UserIdx(pub u32);

impl UserIdx {
    #[inline]
    pub fn get(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for UserIdx {
    fn from(i: usize) -> Self {
        UserIdx(i as u32)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserRecord {
    pub id: String,
    pub gender: Gender,
    /// `(attribute name, category label)` pairs, in column order.
    pub attributes: Vec<(String, String)>,
}

impl UserRecord {
    pub fn new(id: impl Into<String>, gender: Gender) -> Self {
        UserRecord {
            id: id.into(),
            gender,
            attributes: Vec::new(),
        }
    }
}

/// All users `U`, indexed `0..M` in insertion order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UserTable {
    users: Vec<UserRecord>,
    by_id: BTreeMap<String, UserIdx>,
}

impl UserTable {
    /// Builds a table, rejecting duplicate ids and inconsistent attribute columns.
    pub fn new(records: Vec<UserRecord>) -> Result<Self> {
        let mut by_id = BTreeMap::new();
        for (i, rec) in records.iter().enumerate() {
            if by_id.insert(rec.id.clone(), UserIdx::from(i)).is_some() {
                return Err(Error::DuplicateUser(rec.id.clone()));
            }
            if let Some(first) = records.first() {
                let same = first.attributes.len() == rec.attributes.len()
                    && first
                        .attributes
                        .iter()
                        .zip(&rec.attributes)
                        .all(|(a, b)| a.0 == b.0);
                if !same {
                    return Err(Error::AttributeMismatch {
                        id: rec.id.clone(),
                        expected: first.attributes.iter().map(|a| a.0.clone()).collect(),
                        found: rec.attributes.iter().map(|a| a.0.clone()).collect(),
                    });
                }
            }
        }
        Ok(UserTable {
            users: records,
            by_id,
        })
    }

    /// `M`.
    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    pub fn records(&self) -> &[UserRecord] {
        &self.users
    }

    pub fn get(&self, idx: UserIdx) -> &UserRecord {
        &self.users[idx.get()]
    }

    pub fn gender(&self, idx: UserIdx) -> Gender {
        self.users[idx.get()].gender
    }

    pub fn id(&self, idx: UserIdx) -> &str {
        &self.users[idx.get()].id
    }

    pub fn lookup(&self, id: &str) -> Option<UserIdx> {
        self.by_id.get(id).copied()
    }

    pub fn attribute_names(&self) -> Vec<&str> {
        self.users
            .first()
            .map(|u| u.attributes.iter().map(|a| a.0.as_str()).collect())
            .unwrap_or_default()
    }

    pub fn count_gender(&self, gender: Gender) -> usize {
        self.users.iter().filter(|u| u.gender == gender).count()
    }

    pub fn indices(&self) -> impl Iterator<Item = UserIdx> + '_ {
        (0..self.users.len()).map(UserIdx::from)
    }

    /// Resolves and validates a contact given by user ids.
    pub fn event(&self, sender: &str, receiver: &str, day: u32) -> Result<ContactEvent> {
        let s = self
            .lookup(sender)
            .ok_or_else(|| Error::UnknownUser(sender.into()))?;
        let r = self
            .lookup(receiver)
            .ok_or_else(|| Error::UnknownUser(receiver.into()))?;
        self.check_event(ContactEvent {
            sender: s,
            receiver: r,
            day,
        })
    }

    /// Checks a contact given by indices for self-contact and bipartiteness.
    pub fn check_event(&self, event: ContactEvent) -> Result<ContactEvent> {
        for idx in [event.sender, event.receiver] {
            if idx.get() >= self.len() {
                return Err(Error::IndexOutOfRange(idx.get()));
            }
        }
        if event.sender == event.receiver {
            return Err(Error::SelfContact(self.id(event.sender).into()));
        }
        if self.gender(event.sender) == self.gender(event.receiver) {
            return Err(Error::SameGender {
                sender: self.id(event.sender).into(),
                receiver: self.id(event.receiver).into(),
            });
        }
        Ok(event)
    }
}

/// One message from `sender` to `receiver` on a given day.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContactEvent {
    pub sender: UserIdx,
    pub receiver: UserIdx,
    pub day: u32,
}

impl ContactEvent {
    pub fn new(sender: UserIdx, receiver: UserIdx, day: u32) -> Self {
        ContactEvent {
            sender,
            receiver,
            day,
        }
    }
}

/// All messages exchanged between one unordered pair of users.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DyadRecord {
    pub initiator: UserIdx,
    pub responder: UserIdx,
    pub first_day: u32,
    pub msgs_initiator_to_responder: u32,
    pub msgs_responder_to_initiator: u32,
    /// Both sides sent at least one message.
    pub reciprocal: bool,
}

impl DyadRecord {
    /// `(min, max)` of the two endpoints.
    pub fn pair_key(&self) -> (UserIdx, UserIdx) {
        if self.initiator <= self.responder {
            (self.initiator, self.responder)
        } else {
            (self.responder, self.initiator)
        }
    }

    pub fn partner_of(&self, user: UserIdx) -> Option<UserIdx> {
        if user == self.initiator {
            Some(self.responder)
        } else if user == self.responder {
            Some(self.initiator)
        } else {
            None
        }
    }

    /// Messages sent by `from` to the other endpoint.
    pub fn msgs_from(&self, from: UserIdx) -> u32 {
        if from == self.initiator {
            self.msgs_initiator_to_responder
        } else if from == self.responder {
            self.msgs_responder_to_initiator
        } else {
            0
        }
    }
}

/// Partitions events at `split_day`: `day < split_day` goes to train, the rest to test.
pub fn split_by_day(
    events: &[ContactEvent],
    split_day: u32,
) -> Result<(Vec<ContactEvent>, Vec<ContactEvent>)> {
    if split_day == 0 {
        return Err(Error::InvalidParameter("split day must be positive"));
    }
    Ok(events.iter().partition(|e| e.day < split_day))
}

struct DyadAcc {
    first_day: u32,
    first_sender: UserIdx,
    lo_to_hi: u32,
    hi_to_lo: u32,
}

/// Aggregates events into one record per unordered pair, sorted by pair key.
///
/// The initiator is the sender of the earliest message; same-day ties go to
/// the event that appears first in `events`.
pub fn aggregate_dyads(events: &[ContactEvent]) -> Vec<DyadRecord> {
    let mut acc: BTreeMap<(UserIdx, UserIdx), DyadAcc> = BTreeMap::new();
    for e in events {
        let forward = e.sender < e.receiver;
        let key = if forward {
            (e.sender, e.receiver)
        } else {
            (e.receiver, e.sender)
        };
        let entry = acc.entry(key).or_insert(DyadAcc {
            first_day: e.day,
            first_sender: e.sender,
            lo_to_hi: 0,
            hi_to_lo: 0,
        });
        if e.day < entry.first_day {
            entry.first_day = e.day;
            entry.first_sender = e.sender;
        }
        if forward {
            entry.lo_to_hi += 1;
        } else {
            entry.hi_to_lo += 1;
        }
    }
    acc.into_iter()
        .map(|((lo, hi), a)| {
            let (initiator, responder, out, back) = if a.first_sender == lo {
                (lo, hi, a.lo_to_hi, a.hi_to_lo)
            } else {
                (hi, lo, a.hi_to_lo, a.lo_to_hi)
            };
            DyadRecord {
                initiator,
                responder,
                first_day: a.first_day,
                msgs_initiator_to_responder: out,
                msgs_responder_to_initiator: back,
                reciprocal: out >= 1 && back >= 1,
            }
        })
        .collect()
}

/// Number of messages each user sent, indexed by user.
pub fn messages_sent(events: &[ContactEvent], num_users: usize) -> Vec<u32> {
    let mut sent = alloc::vec![0u32; num_users];
    for e in events {
        sent[e.sender.get()] += 1;
    }
    sent
}

/// Service users `S`, ascending by user index.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ServiceUserSet {
    members: Vec<UserIdx>,
    genders: Vec<Gender>,
}

impl ServiceUserSet {
    /// Builds a set from arbitrary members; duplicates are dropped.
    pub fn from_members(users: &UserTable, mut members: Vec<UserIdx>) -> Result<Self> {
        members.sort_unstable();
        members.dedup();
        if let Some(bad) = members.iter().find(|m| m.get() >= users.len()) {
            return Err(Error::IndexOutOfRange(bad.get()));
        }
        let genders = members.iter().map(|&m| users.gender(m)).collect();
        Ok(ServiceUserSet { members, genders })
    }

    /// `N`.
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[UserIdx] {
        &self.members
    }

    pub fn user(&self, pos: usize) -> UserIdx {
        self.members[pos]
    }

    pub fn gender(&self, pos: usize) -> Gender {
        self.genders[pos]
    }

    /// Row position of `user`, if it is a service user.
    pub fn position(&self, user: UserIdx) -> Option<usize> {
        self.members.binary_search(&user).ok()
    }
}

/// Users who sent at least `threshold` messages in both periods.
pub fn select_service_users(
    train: &[ContactEvent],
    test: &[ContactEvent],
    users: &UserTable,
    threshold: u32,
) -> Result<ServiceUserSet> {
    if threshold == 0 {
        return Err(Error::InvalidParameter(
            "service threshold must be at least 1",
        ));
    }
    let sent_train = messages_sent(train, users.len());
    let sent_test = messages_sent(test, users.len());
    let members = users
        .indices()
        .filter(|u| sent_train[u.get()] >= threshold && sent_test[u.get()] >= threshold)
        .collect();
    ServiceUserSet::from_members(users, members)
}
