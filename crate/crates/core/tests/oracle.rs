//! Sparse similarity, scoring and ranking against the dense brute-force reference.
#![allow(clippy::needless_range_loop)]

mod common;

use common::{arb_instance, Instance};
use proptest::prelude::*;
use reciprec_core::matrices::build;
use reciprec_core::recommender::{
    candidate_set, recommend, score_candidates, PartnerIndex, RecommenderConfig,
};
use reciprec_core::similarity::similarity_for;
use reciprec_core::{aggregate_dyads, dense, matrices::compute_degrees, ModelKind};

const TOL: f64 = 1e-12;

fn check_model(inst: &Instance, kind: ModelKind, penalty: f64) -> Result<(), TestCaseError> {
    let Instance {
        users,
        events,
        service,
    } = inst;
    let dyads = aggregate_dyads(events);
    let degrees = compute_degrees(&dyads, users);
    let data = build(kind, &dyads, service, users).unwrap();
    let sim = similarity_for(&data, users.len(), service, &degrees);
    let reference = dense::build(kind, &dyads, service, users);

    let n = service.len();
    for p in 0..n {
        for q in 0..n {
            let (a, b) = (sim.get(p, q), reference.similarity[p][q]);
            prop_assert!((a - b).abs() <= TOL, "{kind} s[{p}][{q}] {a} vs {b}");
        }
    }

    let partners = PartnerIndex::new(&dyads, users.len());
    let cfg = RecommenderConfig::new(kind, penalty, users.len()).unwrap();
    let dense_scores = reference.scores(penalty, false);
    for p in 0..n {
        let cands = candidate_set(service.user(p), &partners, users);
        let scored = score_candidates(p, &sim, &data, &cfg, &cands).unwrap();
        for (t, e) in scored {
            let r = dense_scores[p][t.get()];
            prop_assert!((e - r).abs() <= TOL, "{kind} E[{p}][{t:?}] {e} vs {r}");
        }
    }

    for k in [1, 3, users.len()] {
        let cfg = RecommenderConfig::new(kind, penalty, k).unwrap();
        let fast = recommend(&sim, &data, &cfg, service, users, &partners).unwrap();
        let slow = dense::recommend(&reference, &dyads, service, users, penalty, k);
        for p in 0..n {
            let (a, b) = (fast.for_user(p), &slow[p]);
            prop_assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(b) {
                prop_assert_eq!(x.0, y.0, "{} user {} K={}", kind, p, k);
                prop_assert!((x.1 - y.1).abs() <= TOL);
            }
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sparse_matches_dense(inst in arb_instance(50, 300, 20), penalty in 0.05f64..0.95) {
        for kind in ModelKind::ALL {
            check_model(&inst, kind, penalty)?;
        }
    }

    #[test]
    fn self_term_does_not_change_candidate_scores(inst in arb_instance(30, 200, 15), penalty in 0.05f64..0.95) {
        let dyads = aggregate_dyads(&inst.events);
        let partners = PartnerIndex::new(&dyads, inst.users.len());
        for kind in ModelKind::ALL {
            let reference = dense::build(kind, &dyads, &inst.service, &inst.users);
            let without = reference.scores(penalty, false);
            let with = reference.scores(penalty, true);
            for p in 0..inst.service.len() {
                for t in candidate_set(inst.service.user(p), &partners, &inst.users) {
                    prop_assert_eq!(without[p][t.get()], with[p][t.get()]);
                }
            }
        }
    }
}

#[test]
fn score_examples() {
    // m0 = p, m1 and m2 neighbours, f0 the candidate.
    use reciprec_core::{ContactEvent, ServiceUserSet, UserIdx};
    let users = common::table(&[true, true, true, false, false]);
    let ev = |s: u32, r: u32| ContactEvent::new(UserIdx(s), UserIdx(r), 0);
    let (m0, m1, m2, f0, f1) = (0, 1, 2, 3, 4);
    // m0 and m1 both wrote to f1; m2 wrote to f1 too. m1 and m2 wrote to f0.
    let events = [ev(m0, f1), ev(m1, f1), ev(m2, f1), ev(m1, f0), ev(m2, f0)];
    let dyads = aggregate_dyads(&events);
    let service =
        ServiceUserSet::from_members(&users, vec![UserIdx(0), UserIdx(1), UserIdx(2)]).unwrap();
    let data = build(ModelKind::Baseline, &dyads, &service, &users).unwrap();
    let sim = similarity_for(
        &data,
        users.len(),
        &service,
        &compute_degrees(&dyads, &users),
    );
    let cfg = RecommenderConfig::new(ModelKind::Baseline, 0.6, 5).unwrap();
    let scored = score_candidates(0, &sim, &data, &cfg, &[UserIdx(3)]).unwrap();
    // s(m0,m1) = s(m0,m2) = 1/sqrt(2).
    let expected = 2.0 / 2f64.sqrt();
    assert!((scored[0].1 - expected).abs() < 1e-15);

    // A female nobody has contacted scores 0.
    let users = common::table(&[true, true, true, false, false, false]);
    let data = build(ModelKind::Baseline, &dyads, &service, &users).unwrap();
    let sim = similarity_for(
        &data,
        users.len(),
        &service,
        &compute_degrees(&dyads, &users),
    );
    let scored = score_candidates(0, &sim, &data, &cfg, &[UserIdx(5)]).unwrap();
    assert_eq!(scored[0].1, 0.0);
}

#[test]
fn hybrid_partial_contribution() {
    // One neighbour with a one-sided cell: E = s * (1 - penalty).
    use reciprec_core::{ContactEvent, ServiceUserSet, UserIdx};
    let users = common::table(&[true, true, false, false]);
    let ev = |s: u32, r: u32| ContactEvent::new(UserIdx(s), UserIdx(r), 0);
    // p=m0 and k=m1 both wrote unanswered to f0; k also wrote unanswered to f1.
    let dyads = aggregate_dyads(&[ev(0, 2), ev(1, 2), ev(1, 3)]);
    let service = ServiceUserSet::from_members(&users, vec![UserIdx(0), UserIdx(1)]).unwrap();
    let degrees = compute_degrees(&dyads, &users);
    let data = build(ModelKind::Hybrid, &dyads, &service, &users).unwrap();
    let sim = similarity_for(&data, users.len(), &service, &degrees);
    // f = 2 at f0; dgr = 1 + 2.
    let s = 2.0 / 3.0;
    assert_eq!(sim.get(0, 1), s);
    let cfg = RecommenderConfig::new(ModelKind::Hybrid, 0.6, 5).unwrap();
    let scored = score_candidates(0, &sim, &data, &cfg, &[UserIdx(3)]).unwrap();
    assert!((scored[0].1 - s * 0.4).abs() < 1e-15);
}

#[test]
fn model_mismatch_is_rejected() {
    let inst = common::instance(
        vec![true, false, true, false],
        vec![(0, 1, 0), (2, 1, 1)],
        vec![true],
        4,
    );
    let dyads = aggregate_dyads(&inst.events);
    let degrees = compute_degrees(&dyads, &inst.users);
    let base = build(ModelKind::Baseline, &dyads, &inst.service, &inst.users).unwrap();
    let hyb = build(ModelKind::Hybrid, &dyads, &inst.service, &inst.users).unwrap();
    let sim = similarity_for(&base, inst.users.len(), &inst.service, &degrees);
    let cfg = RecommenderConfig::new(ModelKind::Baseline, 0.6, 2).unwrap();
    assert!(score_candidates(0, &sim, &hyb, &cfg, &[]).is_err());
    let cfg = RecommenderConfig::new(ModelKind::Hybrid, 0.6, 2).unwrap();
    assert!(score_candidates(0, &sim, &base, &cfg, &[]).is_err());
}
