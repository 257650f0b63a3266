//! Text encodings for values stored in text columns.

use chrono::{DateTime, SecondsFormat, Utc};

use crate::model::Geometry;

/// Canonical geometry text: `box x_min x_max y_min y_max` or
/// `lasso x0,y0 x1,y1 …`. Numbers use the shortest decimal form that
/// parses back to the same `f64`.
pub fn geometry_to_text(g: &Geometry) -> String {
    match g {
        Geometry::Box {
            x_min,
            x_max,
            y_min,
            y_max,
        } => format!("box {x_min} {x_max} {y_min} {y_max}"),
        Geometry::Lasso { vertices } => {
            let mut s = String::from("lasso");
            for [x, y] in vertices {
                s.push_str(&format!(" {x},{y}"));
            }
            s
        }
    }
}

pub fn geometry_from_text(s: &str) -> Result<Geometry, String> {
    let num = |t: &str| t.parse::<f64>().map_err(|_| format!("bad number `{t}`"));
    let mut parts = s.split_whitespace();
    match parts.next() {
        Some("box") => {
            let v: Vec<f64> = parts.map(num).collect::<Result<_, _>>()?;
            let [x_min, x_max, y_min, y_max] = v[..] else {
                return Err(format!("box needs 4 numbers, got {}", v.len()));
            };
            Ok(Geometry::Box {
                x_min,
                x_max,
                y_min,
                y_max,
            })
        }
        Some("lasso") => {
            let vertices = parts
                .map(|p| {
                    let (x, y) = p.split_once(',').ok_or_else(|| format!("bad vertex `{p}`"))?;
                    Ok([num(x)?, num(y)?])
                })
                .collect::<Result<_, String>>()?;
            Ok(Geometry::Lasso { vertices })
        }
        other => Err(format!("unknown geometry kind {other:?}")),
    }
}

pub(crate) fn timestamp_to_text(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::AutoSi, true)
}

pub(crate) fn timestamp_from_text(s: &str) -> Result<DateTime<Utc>, String> {
    DateTime::parse_from_rfc3339(s)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| format!("bad timestamp `{s}`: {e}"))
}
