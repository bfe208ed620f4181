#![allow(dead_code)]

use proptest::prelude::*;
use reciprec_core::{ContactEvent, Gender, ServiceUserSet, UserIdx, UserRecord, UserTable};

/// A random bipartite contact log with a chosen set of service users.
#[derive(Debug, Clone)]
pub struct Instance {
    pub users: UserTable,
    pub events: Vec<ContactEvent>,
    pub service: ServiceUserSet,
}

pub fn table(genders: &[bool]) -> UserTable {
    UserTable::new(
        genders
            .iter()
            .enumerate()
            .map(|(i, &male)| {
                UserRecord::new(
                    format!("u{i}"),
                    if male { Gender::Male } else { Gender::Female },
                )
            })
            .collect(),
    )
    .unwrap()
}

/// Builds an instance from raw draws; pairs of the same gender are skipped.
pub fn instance(
    genders: Vec<bool>,
    raw_events: Vec<(usize, usize, u32)>,
    service_mask: Vec<bool>,
    max_service: usize,
) -> Instance {
    let users = table(&genders);
    let m = genders.len();
    let events = raw_events
        .into_iter()
        .map(|(s, r, d)| (s % m, r % m, d))
        .filter(|&(s, r, _)| genders[s] != genders[r])
        .map(|(s, r, d)| ContactEvent::new(UserIdx::from(s), UserIdx::from(r), d))
        .collect();
    let members = (0..m)
        .filter(|&i| service_mask[i % service_mask.len()])
        .take(max_service)
        .map(UserIdx::from)
        .collect();
    let service = ServiceUserSet::from_members(&users, members).unwrap();
    Instance {
        users,
        events,
        service,
    }
}

/// Up to `max_users` users (both genders present), up to `max_events` events,
/// at most `max_service` service users.
pub fn arb_instance(
    max_users: usize,
    max_events: usize,
    max_service: usize,
) -> impl Strategy<Value = Instance> {
    (2..=max_users)
        .prop_flat_map(move |m| {
            (
                prop::collection::vec(any::<bool>(), m).prop_map(|mut g| {
                    g[0] = true;
                    g[1] = false;
                    g
                }),
                prop::collection::vec((0..m, 0..m, 0u32..30), 0..=max_events),
                prop::collection::vec(prop::bool::weighted(0.6), m),
            )
        })
        .prop_map(move |(g, e, s)| instance(g, e, s, max_service))
}
