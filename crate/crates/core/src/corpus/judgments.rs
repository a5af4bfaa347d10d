use std::collections::BTreeMap;
use std::io::Read;

use serde::Deserialize;

use super::types::JudgmentMatrix;
use crate::error::{Error, Result};

/// Each subject's ratings as z-scores (sample standard deviation), keyed by
/// subject; items in rating order.
pub fn subject_z_scores(ratings: &JudgmentMatrix) -> Result<BTreeMap<String, Vec<(String, f64)>>> {
    let mut by_subject: BTreeMap<&str, Vec<(&str, f64)>> = BTreeMap::new();
    for (subject, item, r) in ratings.ratings() {
        by_subject.entry(subject).or_default().push((item, r as f64));
    }
    let mut out = BTreeMap::new();
    for (subject, rs) in by_subject {
        let n = rs.len() as f64;
        let mean = rs.iter().map(|(_, r)| r).sum::<f64>() / n;
        let var = if rs.len() > 1 {
            rs.iter().map(|(_, r)| (r - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        if var == 0.0 {
            return Err(Error::Degenerate(format!(
                "subject `{subject}` does not use at least two distinct ratings"
            )));
        }
        let sd = var.sqrt();
        let zs = rs.iter().map(|&(item, r)| (item.to_string(), (r - mean) / sd)).collect();
        out.insert(subject.to_string(), zs);
    }
    Ok(out)
}

/// Within-subject z-normalization, then the per-item mean over the subjects
/// who rated it. Items keep matrix order.
pub fn normalize_judgments(ratings: &JudgmentMatrix) -> Result<Vec<(String, f64)>> {
    let mut sums: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for zs in subject_z_scores(ratings)?.into_values() {
        for (item, z) in zs {
            let e = sums.entry(item).or_insert((0.0, 0));
            e.0 += z;
            e.1 += 1;
        }
    }
    ratings
        .items()
        .iter()
        .map(|item| match sums.get(item.as_str()) {
            Some(&(sum, count)) => Ok((item.clone(), sum / count as f64)),
            None => Err(Error::Degenerate(format!("item `{item}` has no ratings"))),
        })
        .collect()
}

#[derive(Deserialize)]
struct Row {
    subject_id: String,
    item_id: String,
    rating: u8,
}

/// Reads `subject_id,item_id,rating` CSV with a header row.
pub fn read_judgments_csv<R: Read>(reader: R) -> Result<JudgmentMatrix> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut m = JudgmentMatrix::new();
    for row in rdr.deserialize() {
        let row: Row = row?;
        m.insert(&row.subject_id, &row.item_id, row.rating)?;
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_subject_profile() {
        let mut m = JudgmentMatrix::new();
        for (item, r) in [("a", 2), ("b", 4), ("c", 6)] {
            m.insert("s", item, r).unwrap();
        }
        let scores = normalize_judgments(&m).unwrap();
        let values: Vec<f64> = scores.iter().map(|(_, s)| *s).collect();
        assert_eq!(values, vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn identical_profiles_average_to_the_profile() {
        let mut m = JudgmentMatrix::new();
        m.insert("s1", "a", 1).unwrap();
        m.insert("s1", "b", 3).unwrap();
        m.insert("s2", "a", 5).unwrap();
        m.insert("s2", "b", 7).unwrap();
        let scores = normalize_judgments(&m).unwrap();
        let z = 1.0 / 2f64.sqrt();
        assert!((scores[0].1 + z).abs() < 1e-12);
        assert!((scores[1].1 - z).abs() < 1e-12);
    }

    #[test]
    fn constant_subject_and_unrated_item_error() {
        let mut m = JudgmentMatrix::new();
        m.insert("flat", "a", 4).unwrap();
        m.insert("flat", "b", 4).unwrap();
        let err = normalize_judgments(&m).unwrap_err();
        assert!(err.to_string().contains("flat"));

        let mut m = JudgmentMatrix::new();
        m.insert("s", "a", 1).unwrap();
        m.insert("s", "b", 2).unwrap();
        m.add_item("c");
        assert!(normalize_judgments(&m).unwrap_err().to_string().contains("`c`"));
    }

    #[test]
    fn csv_reading() {
        let text = "subject_id,item_id,rating\ns1,i1,3\ns1,i2,5\n";
        let m = read_judgments_csv(text.as_bytes()).unwrap();
        assert_eq!(m.get("s1", "i2"), Some(5));
        assert!(read_judgments_csv("subject_id,item_id,rating\ns1,i1,9\n".as_bytes()).is_err());
    }
}
