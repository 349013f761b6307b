use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunReport {
    pub command: String,
    pub inputs_digest: String,
    pub results: Value,
    /// Seconds.
    pub wall_time: f64,
}

/// SHA-256 over the canonical JSON of the inputs followed by any raw file
/// contents.
pub fn inputs_digest(inputs: &Value, files: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(inputs).expect("JSON values serialize"));
    for f in files {
        h.update(f);
    }
    hex::encode(h.finalize())
}

pub fn csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        let cells: Vec<String> = r.iter().map(|x| format!("{x:.12}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Like [`csv`] with a leading text column.
pub fn labelled_csv(header: &[&str], rows: &[(String, Vec<f64>)]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for (label, r) in rows {
        out.push_str(&format!("\"{label}\""));
        for x in r {
            out.push_str(&format!(",{x:.12}"));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_stable_and_input_sensitive() {
        let a = serde_json::json!({"kappa": -1.0, "seed": 0});
        let b = serde_json::json!({"kappa": -1.0, "seed": 1});
        assert_eq!(inputs_digest(&a, &[]), inputs_digest(&a.clone(), &[]));
        assert_ne!(inputs_digest(&a, &[]), inputs_digest(&b, &[]));
        assert_ne!(inputs_digest(&a, &[]), inputs_digest(&a, &[b"x"]));
        assert_eq!(inputs_digest(&a, &[]).len(), 64);
    }

    #[test]
    fn csv_layout() {
        let s = csv(&["h", "estimate"], &[vec![0.2, 1.5], vec![0.1, 1.25]]);
        assert_eq!(s.lines().count(), 3);
        assert!(s.starts_with("h,estimate\n0.200000000000,1.500000000000"));
        let s = labelled_csv(&["label", "x"], &[("(-,+)".into(), vec![1.0])]);
        assert_eq!(s, "label,x\n\"(-,+)\",1.000000000000\n");
    }
}
