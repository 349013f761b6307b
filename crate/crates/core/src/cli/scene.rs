//! Scene files: a norm, named convex sets, named query points and solver
//! options. Validation collects every problem before failing.

use std::path::Path;

use nalgebra::DMatrix;
use serde_json::{Map, Value};

use crate::convex_sets::{ConvexSet, HalfSpace};
use crate::norms::{NormSpec, Vector};

use super::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct SceneOptions {
    pub grid_resolution: usize,
    /// `None` means automatic.
    pub clip_radius: Option<f64>,
    pub tol_fp: f64,
    pub seed: u64,
}

impl Default for SceneOptions {
    fn default() -> Self {
        SceneOptions { grid_resolution: 2001, clip_radius: None, tol_fp: 1e-7, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub norm: NormSpec,
    pub sets: Vec<(String, ConvexSet)>,
    pub query_points: Vec<(String, Vector)>,
    pub options: SceneOptions,
}

impl Scene {
    pub fn set(&self, name: &str) -> Option<&ConvexSet> {
        self.sets.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }

    pub fn query(&self, name: &str) -> Option<&Vector> {
        self.query_points.iter().find(|(n, _)| n == name).map(|(_, q)| q)
    }
}

pub fn load_scene(path: &Path) -> Result<(Scene, Vec<u8>), CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| CliError::Scene(vec![format!("file is not UTF-8: {e}")]))?;
    let scene = parse_scene(text).map_err(CliError::Scene)?;
    Ok((scene, bytes))
}

pub fn parse_scene(text: &str) -> Result<Scene, Vec<String>> {
    let root: Value = serde_json::from_str(text).map_err(|e| vec![format!("malformed JSON: {e}")])?;
    let mut c = Checker::default();
    let Some(obj) = c.object(&root, "scene") else {
        return Err(c.errors);
    };
    c.known_keys(obj, &["v", "norm", "sets", "queryPoints", "options"], "");
    match obj.get("v") {
        None => c.err("v", "missing required key"),
        Some(v) if v.as_u64() == Some(1) => {}
        Some(v) => c.err("v", format!("unsupported schema version {v}")),
    }
    let norm = match obj.get("norm") {
        None => {
            c.err("norm", "missing required key");
            None
        }
        Some(v) => c.norm(v),
    };
    let mut sets = Vec::new();
    match obj.get("sets") {
        None => c.err("sets", "missing required key"),
        Some(v) => {
            if let Some(m) = c.object(v, "sets") {
                for (name, sv) in m {
                    if let Some(s) = c.set(sv, &format!("sets.{name}")) {
                        sets.push((name.clone(), s));
                    }
                }
            }
        }
    }
    let mut query_points = Vec::new();
    if let Some(v) = obj.get("queryPoints") {
        if let Some(m) = c.object(v, "queryPoints") {
            for (name, qv) in m {
                if let Some(q) = c.vector(qv, &format!("queryPoints.{name}")) {
                    query_points.push((name.clone(), q));
                }
            }
        }
    }
    let options = obj.get("options").map(|v| c.options(v)).unwrap_or_default();

    if let Some(n) = norm.as_ref().map(NormSpec::dim) {
        for (name, s) in &sets {
            if s.dim() != n {
                c.err(&format!("sets.{name}"), format!("dimension {} does not match norm dimension {n}", s.dim()));
            }
        }
        for (name, q) in &query_points {
            if q.len() != n {
                c.err(&format!("queryPoints.{name}"), format!("dimension {} does not match norm dimension {n}", q.len()));
            }
        }
    }
    match (norm, c.errors.is_empty()) {
        (Some(norm), true) => Ok(Scene { norm, sets, query_points, options }),
        _ => Err(c.errors),
    }
}

#[derive(Default)]
struct Checker {
    errors: Vec<String>,
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

impl Checker {
    fn err(&mut self, path: &str, msg: impl std::fmt::Display) {
        self.errors.push(format!("{path}: {msg}"));
    }

    fn object<'v>(&mut self, v: &'v Value, path: &str) -> Option<&'v Map<String, Value>> {
        let o = v.as_object();
        if o.is_none() {
            self.err(path, "expected an object");
        }
        o
    }

    fn known_keys(&mut self, obj: &Map<String, Value>, allowed: &[&str], path: &str) {
        for k in obj.keys() {
            if !allowed.contains(&k.as_str()) {
                self.err(&join(path, k), "unknown key");
            }
        }
    }

    fn field<'v>(&mut self, obj: &'v Map<String, Value>, key: &str, path: &str) -> Option<&'v Value> {
        let v = obj.get(key);
        if v.is_none() {
            self.err(&join(path, key), "missing required key");
        }
        v
    }

    fn number(&mut self, v: &Value, path: &str) -> Option<f64> {
        match v.as_f64() {
            Some(x) if x.is_finite() => Some(x),
            _ => {
                self.err(path, "expected a finite number");
                None
            }
        }
    }

    fn count(&mut self, v: &Value, path: &str) -> Option<usize> {
        let n = v.as_u64().map(|n| n as usize);
        if n.is_none() {
            self.err(path, "expected a non-negative integer");
        }
        n
    }

    fn vector(&mut self, v: &Value, path: &str) -> Option<Vector> {
        let Some(arr) = v.as_array() else {
            self.err(path, "expected an array of numbers");
            return None;
        };
        let mut out = Vec::with_capacity(arr.len());
        let mut ok = true;
        for (i, x) in arr.iter().enumerate() {
            match self.number(x, &format!("{path}[{i}]")) {
                Some(x) => out.push(x),
                None => ok = false,
            }
        }
        if out.is_empty() && ok {
            self.err(path, "empty vector");
            return None;
        }
        ok.then(|| Vector::from_vec(out))
    }

    fn vectors(&mut self, v: &Value, path: &str) -> Option<Vec<Vector>> {
        let Some(arr) = v.as_array() else {
            self.err(path, "expected an array of vectors");
            return None;
        };
        let out: Vec<Option<Vector>> = arr.iter().enumerate().map(|(i, x)| self.vector(x, &format!("{path}[{i}]"))).collect();
        out.into_iter().collect()
    }

    fn norm(&mut self, v: &Value) -> Option<NormSpec> {
        let path = "norm";
        let obj = self.object(v, path)?;
        let Some(kind) = obj.get("kind").and_then(Value::as_str) else {
            self.err("norm.kind", "missing or not a string");
            return None;
        };
        let keys: &[&str] = match kind {
            "euclidean" => &["kind", "dim"],
            "pnorm" => &["kind", "dim", "p"],
            "randers" => &["kind", "a", "b"],
            "matsumoto" => &["kind", "v", "alpha", "gravity"],
            "nonsmooth" => &["kind", "dim", "lambda"],
            other => {
                self.err("norm.kind", format!("unknown norm kind {other:?}"));
                return None;
            }
        };
        self.known_keys(obj, keys, path);
        let num = |c: &mut Self, key: &str| c.field(obj, key, path).and_then(|x| c.number(x, &join(path, key)));
        let dim = |c: &mut Self| c.field(obj, "dim", path).and_then(|x| c.count(x, "norm.dim"));
        let built = match kind {
            "euclidean" => dim(self).map(NormSpec::euclidean),
            "pnorm" => {
                let (d, p) = (dim(self), num(self, "p"));
                d.zip(p).map(|(d, p)| NormSpec::pnorm(d, p))
            }
            "randers" => {
                let a = self.field(obj, "a", path).and_then(|x| self.vectors(x, "norm.a"));
                let b = self.field(obj, "b", path).and_then(|x| self.vector(x, "norm.b"));
                match (a, b) {
                    (Some(rows), Some(b)) => {
                        let n = rows.len();
                        if rows.iter().any(|r| r.len() != n) {
                            self.err("norm.a", "expected a square matrix");
                            None
                        } else {
                            let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
                            Some(NormSpec::randers(m, b))
                        }
                    }
                    _ => None,
                }
            }
            "matsumoto" => {
                let (v, a, g) = (num(self, "v"), num(self, "alpha"), num(self, "gravity"));
                match (v, a, g) {
                    (Some(v), Some(a), Some(g)) => Some(NormSpec::matsumoto(v, a, g)),
                    _ => None,
                }
            }
            _ => {
                let (d, l) = (dim(self), num(self, "lambda"));
                d.zip(l).map(|(d, l)| NormSpec::nonsmooth(d, l))
            }
        };
        match built? {
            Ok(s) => Some(s),
            Err(e) => {
                self.err(path, e);
                None
            }
        }
    }

    fn set(&mut self, v: &Value, path: &str) -> Option<ConvexSet> {
        let obj = self.object(v, path)?;
        let Some(kind) = obj.get("kind").and_then(Value::as_str) else {
            self.err(&join(path, "kind"), "missing or not a string");
            return None;
        };
        let keys: &[&str] = match kind {
            "segment" => &["kind", "a", "b"],
            "halfline" => &["kind", "origin", "direction"],
            "line" => &["kind", "point", "direction"],
            "polytope" => &["kind", "vertices"],
            "slab" => &["kind", "base", "span", "constraints"],
            other => {
                self.err(&join(path, "kind"), format!("unknown set kind {other:?}"));
                return None;
            }
        };
        self.known_keys(obj, keys, path);
        let vec = |c: &mut Self, key: &str| c.field(obj, key, path).and_then(|x| c.vector(x, &join(path, key)));
        let built = match kind {
            "segment" => {
                let (a, b) = (vec(self, "a"), vec(self, "b"));
                a.zip(b).map(|(a, b)| ConvexSet::segment(a, b))
            }
            "halfline" => {
                let (o, d) = (vec(self, "origin"), vec(self, "direction"));
                o.zip(d).map(|(o, d)| ConvexSet::half_line(o, d))
            }
            "line" => {
                let (p, d) = (vec(self, "point"), vec(self, "direction"));
                p.zip(d).map(|(p, d)| ConvexSet::line(p, d))
            }
            "polytope" => self
                .field(obj, "vertices", path)
                .and_then(|x| self.vectors(x, &join(path, "vertices")))
                .map(ConvexSet::polytope),
            _ => {
                let base = vec(self, "base");
                let span = self.field(obj, "span", path).and_then(|x| self.vectors(x, &join(path, "span")));
                let cons = self.field(obj, "constraints", path).and_then(|x| self.constraints(x, &join(path, "constraints")));
                match (base, span, cons) {
                    (Some(b), Some(s), Some(c)) => Some(ConvexSet::affine_slab(b, s, c)),
                    _ => None,
                }
            }
        };
        match built? {
            Ok(s) => Some(s),
            Err(e) => {
                self.err(path, e);
                None
            }
        }
    }

    fn constraints(&mut self, v: &Value, path: &str) -> Option<Vec<HalfSpace>> {
        let Some(arr) = v.as_array() else {
            self.err(path, "expected an array of half-spaces");
            return None;
        };
        let mut out = Vec::new();
        let mut ok = true;
        for (i, h) in arr.iter().enumerate() {
            let p = format!("{path}[{i}]");
            let Some(o) = self.object(h, &p) else {
                ok = false;
                continue;
            };
            self.known_keys(o, &["normal", "offset"], &p);
            let normal = self.field(o, "normal", &p).and_then(|x| self.vector(x, &join(&p, "normal")));
            let offset = self.field(o, "offset", &p).and_then(|x| self.number(x, &join(&p, "offset")));
            match (normal, offset) {
                (Some(normal), Some(offset)) => out.push(HalfSpace { normal, offset }),
                _ => ok = false,
            }
        }
        ok.then_some(out)
    }

    fn options(&mut self, v: &Value) -> SceneOptions {
        let mut opts = SceneOptions::default();
        let Some(obj) = self.object(v, "options") else {
            return opts;
        };
        self.known_keys(obj, &["gridResolution", "clipRadius", "tolFp", "seed"], "options");
        if let Some(x) = obj.get("gridResolution") {
            match self.count(x, "options.gridResolution") {
                Some(n) if n >= 2 => opts.grid_resolution = n,
                Some(_) => self.err("options.gridResolution", "must be at least 2"),
                None => {}
            }
        }
        if let Some(x) = obj.get("clipRadius") {
            if x.as_str() != Some("auto") {
                match x.as_f64() {
                    Some(r) if r > 0.0 && r.is_finite() => opts.clip_radius = Some(r),
                    _ => self.err("options.clipRadius", "expected \"auto\" or a positive number"),
                }
            }
        }
        if let Some(x) = obj.get("tolFp") {
            match self.number(x, "options.tolFp") {
                Some(t) if t > 0.0 => opts.tol_fp = t,
                Some(_) => self.err("options.tolFp", "must be positive"),
                None => {}
            }
        }
        if let Some(x) = obj.get("seed") {
            match x.as_u64() {
                Some(s) => opts.seed = s,
                None => self.err("options.seed", "expected a non-negative integer"),
            }
        }
        opts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MATSUMOTO: &str = include_str!("../../scenes/matsumoto.json");

    #[test]
    fn shipped_scene_matches_example_sets() {
        let s = parse_scene(MATSUMOTO).unwrap();
        let (s1, s2) = ConvexSet::paper_example_sets();
        assert_eq!(s.norm, NormSpec::matsumoto_reference());
        assert!(matches!(s.set("S1"), Some(ConvexSet::Line { .. })));
        let (ConvexSet::Line { point, direction }, Some(ConvexSet::Line { point: p2, direction: d2 })) = (&s1, s.set("S1")) else {
            panic!("S1 should be a line");
        };
        assert!((point - p2).norm() < 1e-15 && (direction - d2).norm() < 1e-15);
        let (ConvexSet::HalfLine { origin, direction }, Some(ConvexSet::HalfLine { origin: o2, direction: d2 })) = (&s2, s.set("S2")) else {
            panic!("S2 should be a half-line");
        };
        assert!((origin - o2).norm() < 1e-15 && (direction - d2).norm() < 1e-15);
        assert_eq!(s.options, SceneOptions::default());
    }

    #[test]
    fn errors_are_collected() {
        let text = r#"{"v": 1, "sets": {"A": {"kind": "segment", "a": [0], "b": "x"}},
                       "options": {"gridResolution": 1, "colour": 3}}"#;
        let errs = parse_scene(text).unwrap_err();
        assert!(errs.iter().any(|e| e.starts_with("norm:")), "{errs:?}");
        assert!(errs.iter().any(|e| e.starts_with("sets.A.b:")), "{errs:?}");
        assert!(errs.iter().any(|e| e.starts_with("options.gridResolution:")), "{errs:?}");
        assert!(errs.iter().any(|e| e.starts_with("options.colour: unknown key")), "{errs:?}");
    }

    #[test]
    fn matsumoto_angle_is_validated() {
        let text = r#"{"v": 1, "norm": {"kind": "matsumoto", "v": 10, "alpha": 1.6, "gravity": 9.81}, "sets": {}}"#;
        let errs = parse_scene(text).unwrap_err();
        assert!(errs.iter().any(|e| e.starts_with("norm:") && e.contains("alpha")), "{errs:?}");
    }

    #[test]
    fn dimensions_must_agree() {
        let text = r#"{"v": 1, "norm": {"kind": "euclidean", "dim": 3},
                       "sets": {"L": {"kind": "line", "point": [0, 0], "direction": [1, 0]}},
                       "queryPoints": {"q": [1, 2, 3]}}"#;
        let errs = parse_scene(text).unwrap_err();
        assert_eq!(errs.len(), 1, "{errs:?}");
        assert!(errs[0].starts_with("sets.L:"));
    }

    #[test]
    fn directions_are_normalized() {
        let text = r#"{"v": 1, "norm": {"kind": "pnorm", "dim": 2, "p": 4},
                       "sets": {"H": {"kind": "halfline", "origin": [0, 0], "direction": [3, 4]}},
                       "options": {"clipRadius": 5.0, "seed": 9}}"#;
        let s = parse_scene(text).unwrap();
        let Some(ConvexSet::HalfLine { direction, .. }) = s.set("H") else { panic!() };
        assert!((direction.norm() - 1.0).abs() < 1e-15);
        assert_eq!(s.options.clip_radius, Some(5.0));
        assert_eq!(s.options.seed, 9);
    }
}
