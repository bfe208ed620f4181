//! CSV readers and writers for users, contacts and debug dumps.

use std::collections::HashSet;
use std::io::{Read, Write};

use reciprec_core::{
    ContactData, ContactEvent, Gender, RecommendationList, ServiceUserSet, SimilarityMatrix,
    UserRecord, UserTable,
};

use crate::AppError;

/// Rounds to 12 significant digits.
pub fn sig12(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Shortest decimal text of `sig12(x)`.
pub fn fmt12(x: f64) -> String {
    format!("{}", sig12(x))
}

fn reader<R: Read>(source: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source)
}

fn parse_err(source_name: &str, line: u64, message: impl Into<String>) -> AppError {
    AppError::Parse {
        source_name: source_name.to_string(),
        line,
        message: message.into(),
    }
}

fn line_of(rec: &csv::StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

fn csv_err(source_name: &str, e: csv::Error) -> AppError {
    let line = e.position().map_or(0, |p| p.line());
    parse_err(source_name, line, e.to_string())
}

/// Reads `user_id,gender[,attr...]`. Index order follows file order.
pub fn parse_users<R: Read>(source: R, source_name: &str) -> Result<UserTable, AppError> {
    let mut rdr = reader(source);
    let mut rows = rdr.records();
    let header = match rows.next() {
        Some(r) => r.map_err(|e| csv_err(source_name, e))?,
        None => return Err(parse_err(source_name, 1, "missing header row")),
    };
    if header.len() < 2 || !header[1].eq_ignore_ascii_case("gender") {
        return Err(parse_err(
            source_name,
            line_of(&header),
            "header must start with `user_id,gender`",
        ));
    }
    let attr_names: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for row in rows {
        let row = row.map_err(|e| csv_err(source_name, e))?;
        let line = line_of(&row);
        if row.len() != header.len() {
            return Err(parse_err(
                source_name,
                line,
                format!("expected {} fields, found {}", header.len(), row.len()),
            ));
        }
        let id = &row[0];
        if id.is_empty() {
            return Err(parse_err(source_name, line, "empty user id"));
        }
        let gender = Gender::from_code(&row[1]).ok_or_else(|| {
            parse_err(
                source_name,
                line,
                format!("gender must be M or F, got `{}`", &row[1]),
            )
        })?;
        if !seen.insert(id.to_string()) {
            return Err(parse_err(
                source_name,
                line,
                format!("duplicate user id `{id}`"),
            ));
        }
        let mut rec = UserRecord::new(id, gender);
        rec.attributes = attr_names
            .iter()
            .cloned()
            .zip(row.iter().skip(2).map(str::to_string))
            .collect();
        records.push(rec);
    }
    Ok(UserTable::new(records)?)
}

/// Reads `sender_id,receiver_id,day`. The header row is optional.
pub fn parse_contacts<R: Read>(
    source: R,
    users: &UserTable,
    source_name: &str,
) -> Result<Vec<ContactEvent>, AppError> {
    let mut events = Vec::new();
    for (i, row) in reader(source).records().enumerate() {
        let row = row.map_err(|e| csv_err(source_name, e))?;
        let line = line_of(&row);
        if row.len() != 3 {
            return Err(parse_err(
                source_name,
                line,
                format!("expected 3 fields, found {}", row.len()),
            ));
        }
        let day: i64 = match row[2].parse() {
            Ok(d) => d,
            Err(_) if i == 0 => continue,
            Err(_) => {
                return Err(parse_err(
                    source_name,
                    line,
                    format!("bad day `{}`", &row[2]),
                ));
            }
        };
        if day < 0 {
            return Err(parse_err(source_name, line, format!("negative day {day}")));
        }
        let day = u32::try_from(day)
            .map_err(|_| parse_err(source_name, line, format!("day {day} is too large")))?;
        let event = users
            .event(&row[0], &row[1], day)
            .map_err(|e| parse_err(source_name, line, e.to_string()))?;
        events.push(event);
    }
    Ok(events)
}

fn flush<W: Write>(w: csv::Writer<W>) -> std::io::Result<()> {
    w.into_inner().map_err(|e| e.into_error())?.flush()
}

pub fn write_users<W: Write>(out: W, users: &UserTable) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["user_id", "gender"];
    header.extend(users.attribute_names());
    w.write_record(&header)?;
    for r in users.records() {
        let mut row = vec![r.id.as_str(), r.gender.code()];
        row.extend(r.attributes.iter().map(|(_, v)| v.as_str()));
        w.write_record(&row)?;
    }
    flush(w)
}

pub fn write_contacts<W: Write>(
    out: W,
    users: &UserTable,
    events: &[ContactEvent],
) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sender_id", "receiver_id", "day"])?;
    for e in events {
        let day = e.day.to_string();
        w.write_record([users.id(e.sender), users.id(e.receiver), &day])?;
    }
    flush(w)
}

/// `row_user,col_user,sent,received`, one line per stored cell.
pub fn dump_matrix<W: Write>(
    out: W,
    data: &ContactData,
    service: &ServiceUserSet,
    users: &UserTable,
) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["row_user", "col_user", "sent", "received"])?;
    for p in 0..data.num_rows() {
        let row_user = users.id(service.user(p));
        for (t, cell) in data.row_cells(p) {
            let (s, r) = (
                u8::from(cell.sent).to_string(),
                u8::from(cell.received).to_string(),
            );
            w.write_record([row_user, users.id(t), &s, &r])?;
        }
    }
    flush(w)
}

/// `user_p,user_q,score` for every positive entry.
pub fn dump_similarity<W: Write>(
    out: W,
    sim: &SimilarityMatrix,
    service: &ServiceUserSet,
    users: &UserTable,
) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["user_p", "user_q", "score"])?;
    for p in 0..sim.num_rows() {
        let (qs, vals) = sim.row(p);
        let up = users.id(service.user(p));
        for (&q, &v) in qs.iter().zip(vals) {
            w.write_record([up, users.id(service.user(q as usize)), &fmt12(v)])?;
        }
    }
    flush(w)
}

/// `service_user,rank,candidate,score`, ranks from 1.
pub fn dump_recommendations<W: Write>(
    out: W,
    recs: &RecommendationList,
    service: &ServiceUserSet,
    users: &UserTable,
) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["service_user", "rank", "candidate", "score"])?;
    for (p, list) in recs.lists.iter().enumerate() {
        let up = users.id(service.user(p));
        for (rank, &(t, s)) in list.iter().enumerate() {
            let rank = (rank + 1).to_string();
            w.write_record([up, &rank, users.id(t), &fmt12(s)])?;
        }
    }
    flush(w)
}
