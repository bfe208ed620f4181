use reciprec::io::{
    dump_matrix, dump_recommendations, dump_similarity, parse_contacts, parse_users,
    write_contacts, write_users,
};
use reciprec::report::write_atomic;
use reciprec::{AppError, ExitCode};
use reciprec_core::matrices::{build, compute_degrees};
use reciprec_core::recommender::{recommend, PartnerIndex, RecommenderConfig};
use reciprec_core::similarity::similarity_for;
use reciprec_core::synthgen::{generate, SynthConfig};
use reciprec_core::{aggregate_dyads, Gender, ModelKind, ServiceUserSet, UserIdx, UserTable};

fn users(text: &str) -> Result<UserTable, AppError> {
    parse_users(text.as_bytes(), "users.csv")
}

fn line_of(e: &AppError) -> u64 {
    match e {
        AppError::Parse { line, .. } => *line,
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn minimal_users_file() {
    let t = users("id,gender\nu1,M\nu2,F").unwrap();
    assert_eq!(t.len(), 2);
    assert_eq!(t.gender(UserIdx(0)), Gender::Male);
    assert_eq!(t.lookup("u2"), Some(UserIdx(1)));
    assert!(t.attribute_names().is_empty());
}

#[test]
fn duplicate_user_is_rejected_with_its_line() {
    let e = users("id,gender\nu1,M\nu1,F").unwrap_err();
    assert_eq!(line_of(&e), 3);
    assert!(e.to_string().contains("duplicate user id `u1`"));
    assert_eq!(e.exit_code(), ExitCode::Data);
}

#[test]
fn malformed_user_rows() {
    assert_eq!(
        line_of(&users("user_id,gender\nu1,M\nu2,X\n").unwrap_err()),
        3
    );
    assert_eq!(
        line_of(&users("user_id,gender,body\nu1,M,fit\nu2,F\n").unwrap_err()),
        3
    );
    assert_eq!(line_of(&users("user_id,sex\nu1,M\n").unwrap_err()), 1);
    assert!(users("").is_err());
}

#[test]
fn attributes_follow_the_header() {
    let t = users("user_id,gender,body_type,children\nu1,M,fit,none\nu2,F,curvy,some\n").unwrap();
    assert_eq!(t.attribute_names(), ["body_type", "children"]);
    assert_eq!(
        t.get(UserIdx(1)).attributes[1],
        ("children".to_string(), "some".to_string())
    );
}

fn three() -> UserTable {
    users("user_id,gender\nu1,M\nu2,F\nu3,M\n").unwrap()
}

#[test]
fn contacts_resolve_against_users() {
    let t = three();
    let ev = parse_contacts("u1,u2,0".as_bytes(), &t, "c").unwrap();
    assert_eq!(ev.len(), 1);
    assert_eq!(
        (ev[0].sender, ev[0].receiver, ev[0].day),
        (UserIdx(0), UserIdx(1), 0)
    );

    let ev = parse_contacts(
        "sender_id,receiver_id,day\nu1,u2,3\nu2,u3,4\n".as_bytes(),
        &t,
        "c",
    )
    .unwrap();
    assert_eq!(ev.len(), 2);
    assert_eq!(ev[1].day, 4);

    assert!(parse_contacts("".as_bytes(), &t, "c").unwrap().is_empty());
    assert!(
        parse_contacts("sender_id,receiver_id,day\n".as_bytes(), &t, "c")
            .unwrap()
            .is_empty()
    );
}

#[test]
fn bad_contacts_name_the_line() {
    let t = three();
    let bad = |body: &str| {
        let e = parse_contacts(body.as_bytes(), &t, "contacts.csv").unwrap_err();
        (line_of(&e), e.to_string())
    };
    let (line, msg) = bad("sender_id,receiver_id,day\nu1,u2,0\nu1,u3,0\n");
    assert_eq!(line, 3);
    assert!(msg.contains("same gender"), "{msg}");
    assert_eq!(bad("u1,u2,0\nu1,u9,1\n").0, 2);
    assert!(bad("u1,u2,-1\n").1.contains("negative day"));
    assert!(bad("u1,u2,0\nu1,u2,soon\n").1.contains("bad day"));
    assert!(bad("u1,u2\n").1.contains("expected 3 fields"));
    assert!(bad("u1,u1,0\n").0 == 1);
}

#[test]
fn synthetic_log_round_trips() {
    let (t, events) = generate(&SynthConfig::with_users(200, 4)).unwrap();
    let mut u = Vec::new();
    write_users(&mut u, &t).unwrap();
    let mut c = Vec::new();
    write_contacts(&mut c, &t, &events).unwrap();
    let t2 = parse_users(u.as_slice(), "u").unwrap();
    let e2 = parse_contacts(c.as_slice(), &t2, "c").unwrap();
    assert_eq!(t2, t);
    assert_eq!(e2, events);
}

#[test]
fn dump_formats() {
    let t = users("user_id,gender\nm1,M\nm2,M\nf1,F\nf2,F\n").unwrap();
    let ev = parse_contacts("m1,f1,0\nf1,m1,1\nm2,f1,0\nm2,f2,2\n".as_bytes(), &t, "c").unwrap();
    let dyads = aggregate_dyads(&ev);
    let service = ServiceUserSet::from_members(&t, vec![UserIdx(0), UserIdx(1)]).unwrap();
    let data = build(ModelKind::Hybrid, &dyads, &service, &t).unwrap();
    let sim = similarity_for(&data, t.len(), &service, &compute_degrees(&dyads, &t));

    let mut out = Vec::new();
    dump_matrix(&mut out, &data, &service, &t).unwrap();
    assert_eq!(
        String::from_utf8(out).unwrap(),
        "row_user,col_user,sent,received\nm1,f1,1,1\nm2,f1,1,0\nm2,f2,1,0\n"
    );

    // m1 and m2 agree only on having written to f1: 1 / (1 + 2).
    let mut out = Vec::new();
    dump_similarity(&mut out, &sim, &service, &t).unwrap();
    assert_eq!(
        String::from_utf8(out).unwrap(),
        "user_p,user_q,score\nm1,m2,0.333333333333\nm2,m1,0.333333333333\n"
    );

    let partners = PartnerIndex::new(&dyads, t.len());
    let cfg = RecommenderConfig::new(ModelKind::Hybrid, 0.6, 1).unwrap();
    let recs = recommend(&sim, &data, &cfg, &service, &t, &partners).unwrap();
    let mut out = Vec::new();
    dump_recommendations(&mut out, &recs, &service, &t).unwrap();
    // m2 has already written to both women, so its list is empty.
    assert_eq!(
        String::from_utf8(out).unwrap(),
        "service_user,rank,candidate,score\nm1,1,f2,0.133333333333\n"
    );
}

#[test]
fn atomic_write_replaces_and_leaves_no_debris() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested").join("r.txt");
    write_atomic(&path, |w| w.write_all(b"first")).unwrap();
    write_atomic(&path, |w| w.write_all(b"second")).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), "second");
    let failed = write_atomic(&path, |w| {
        w.write_all(b"partial")?;
        Err(std::io::Error::other("disk on fire"))
    });
    assert!(failed.is_err());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), "second");
    let names: Vec<_> = std::fs::read_dir(path.parent().unwrap())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert_eq!(names, ["r.txt"]);
}
