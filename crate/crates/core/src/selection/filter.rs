//! Parallel-coordinates visual queries and their canonical text form.
//!
//! Grammar (whitespace around tokens is tolerated on input):
//!
//! ```text
//! filter      := "" | clause ( ";" clause )*
//! clause      := categorical | range
//! categorical := param level ( "," level )*      e.g. "profile 0,2"
//! range       := axis "[" number "," number "]"  e.g. "dshock [0,0.1]"
//! ```
//!
//! Canonical output joins clauses with `"; "`, orders them by axis
//! declaration order (the seven parameters, then `dshock`, `dedge`,
//! `drho`), sorts categorical levels, and prints numbers in their shortest
//! round-tripping decimal form.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::{param_index, JoinedRecord, PARAM_NAMES};

/// A filterable axis of the parallel-coordinates plot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axis {
    /// Index into [`PARAM_NAMES`].
    Param(usize),
    DeltaShock,
    DeltaEdge,
    DeltaRho,
}

impl Axis {
    pub fn parse(name: &str) -> Option<Axis> {
        match name {
            "dshock" => Some(Axis::DeltaShock),
            "dedge" => Some(Axis::DeltaEdge),
            "drho" => Some(Axis::DeltaRho),
            _ => param_index(name).map(Axis::Param),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Axis::Param(i) => PARAM_NAMES[*i],
            Axis::DeltaShock => "dshock",
            Axis::DeltaEdge => "dedge",
            Axis::DeltaRho => "drho",
        }
    }

    /// Value of this axis on a row; `None` for a flagged density delta.
    pub fn value(&self, row: &JoinedRecord) -> Option<f64> {
        match self {
            Axis::Param(i) => Some(row.params.levels()[*i] as f64),
            Axis::DeltaShock => Some(row.delta_shock),
            Axis::DeltaEdge => Some(row.delta_edge),
            Axis::DeltaRho => row.delta_rho,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Clause {
    /// Parameter level is one of `levels` (non-empty).
    Categorical { param: usize, levels: BTreeSet<u32> },
    /// `lo <= value <= hi`.
    Range { axis: Axis, lo: f64, hi: f64 },
}

impl Clause {
    pub fn axis(&self) -> Axis {
        match self {
            Clause::Categorical { param, .. } => Axis::Param(*param),
            Clause::Range { axis, .. } => *axis,
        }
    }

    pub fn matches(&self, row: &JoinedRecord) -> bool {
        match self {
            Clause::Categorical { param, levels } => levels.contains(&row.params.levels()[*param]),
            Clause::Range { axis, lo, hi } => axis.value(row).is_some_and(|v| *lo <= v && v <= *hi),
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Clause::Categorical { param, levels } => {
                write!(f, "{} ", PARAM_NAMES[*param])?;
                for (i, l) in levels.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{l}")?;
                }
                Ok(())
            }
            Clause::Range { axis, lo, hi } => write!(f, "{axis} [{lo},{hi}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FilterError {
    #[error("unknown axis `{name}` at column {position}")]
    UnknownAxis { name: String, position: usize },
    #[error("malformed clause at column {position}: {reason}")]
    MalformedClause { position: usize, reason: String },
    #[error("axis `{name}` appears twice (second at column {position})")]
    DuplicateAxis { name: String, position: usize },
}

impl FilterError {
    /// Byte offset into the parsed string.
    pub fn position(&self) -> usize {
        match self {
            FilterError::UnknownAxis { position, .. }
            | FilterError::MalformedClause { position, .. }
            | FilterError::DuplicateAxis { position, .. } => *position,
        }
    }

    fn malformed(position: usize, reason: impl Into<String>) -> Self {
        FilterError::MalformedClause {
            position,
            reason: reason.into(),
        }
    }
}

/// Conjunction of clauses, at most one per axis, kept in canonical order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FilterExpr {
    clauses: Vec<Clause>,
}

impl FilterExpr {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Build from clauses in any order.
    pub fn new(clauses: impl IntoIterator<Item = Clause>) -> Result<Self, FilterError> {
        let mut clauses: Vec<Clause> = clauses.into_iter().collect();
        for c in &clauses {
            match c {
                Clause::Categorical { param, levels } => {
                    if *param >= PARAM_NAMES.len() {
                        return Err(FilterError::UnknownAxis {
                            name: format!("param#{param}"),
                            position: 0,
                        });
                    }
                    if levels.is_empty() {
                        return Err(FilterError::malformed(0, "categorical clause needs at least one level"));
                    }
                }
                Clause::Range { lo, hi, .. } => check_range(*lo, *hi, 0)?,
            }
        }
        clauses.sort_by_key(Clause::axis);
        if let Some(w) = clauses.windows(2).find(|w| w[0].axis() == w[1].axis()) {
            return Err(FilterError::DuplicateAxis {
                name: w[0].axis().name().into(),
                position: 0,
            });
        }
        Ok(Self { clauses })
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn matches(&self, row: &JoinedRecord) -> bool {
        self.clauses.iter().all(|c| c.matches(row))
    }

    /// Rows satisfying every clause, in input order.
    pub fn apply<'a>(&self, rows: &'a [JoinedRecord]) -> Vec<&'a JoinedRecord> {
        rows.iter().filter(|r| self.matches(r)).collect()
    }
}

fn check_range(lo: f64, hi: f64, position: usize) -> Result<(), FilterError> {
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(FilterError::malformed(position, "range bounds must be finite"));
    }
    if lo > hi {
        return Err(FilterError::malformed(
            position,
            format!("range [{lo},{hi}] has lo > hi"),
        ));
    }
    Ok(())
}

impl fmt::Display for FilterExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.clauses.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Trim `s`, returning the trimmed slice and its offset within `s`.
fn trim_at(s: &str) -> (&str, usize) {
    let start = s.len() - s.trim_start().len();
    (s.trim(), start)
}

fn parse_clause(text: &str, at: usize) -> Result<Clause, FilterError> {
    let split = text.find(char::is_whitespace).or_else(|| text.find('['));
    let Some(split) = split else {
        return Err(FilterError::malformed(at, format!("clause `{text}` has no value")));
    };
    let name = &text[..split];
    let (value, value_off) = trim_at(&text[split..]);
    let value_at = at + split + value_off;
    let axis = Axis::parse(name).ok_or_else(|| FilterError::UnknownAxis {
        name: name.into(),
        position: at,
    })?;
    if value.is_empty() {
        return Err(FilterError::malformed(value_at, format!("axis `{name}` has no value")));
    }

    if let Some(inner) = value.strip_prefix('[') {
        let inner = inner
            .strip_suffix(']')
            .ok_or_else(|| FilterError::malformed(value_at + value.len(), "range is missing `]`"))?;
        let parts: Vec<&str> = inner.split(',').collect();
        if parts.len() != 2 {
            return Err(FilterError::malformed(
                value_at,
                "range needs exactly two bounds `[lo,hi]`",
            ));
        }
        let mut bounds = [0.0; 2];
        let mut off = value_at + 1;
        for (b, part) in bounds.iter_mut().zip(&parts) {
            let (tok, tok_off) = trim_at(part);
            *b = tok
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| FilterError::malformed(off + tok_off, format!("`{tok}` is not a finite number")))?;
            off += part.len() + 1;
        }
        check_range(bounds[0], bounds[1], value_at)?;
        return Ok(Clause::Range {
            axis,
            lo: bounds[0],
            hi: bounds[1],
        });
    }

    let Axis::Param(param) = axis else {
        return Err(FilterError::malformed(
            value_at,
            format!("axis `{name}` takes a range `[lo,hi]`"),
        ));
    };
    let mut levels = BTreeSet::new();
    let mut off = value_at;
    for part in value.split(',') {
        let (tok, tok_off) = trim_at(part);
        let level = tok
            .parse::<u32>()
            .map_err(|_| FilterError::malformed(off + tok_off, format!("`{tok}` is not a level index")))?;
        levels.insert(level);
        off += part.len() + 1;
    }
    Ok(Clause::Categorical { param, levels })
}

impl FromStr for FilterExpr {
    type Err = FilterError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim().is_empty() {
            return Ok(Self::empty());
        }
        let mut clauses: Vec<(Clause, usize)> = Vec::new();
        let mut offset = 0;
        for segment in s.split(';') {
            let (text, lead) = trim_at(segment);
            let at = offset + lead;
            if text.is_empty() {
                return Err(FilterError::malformed(at, "empty clause"));
            }
            let clause = parse_clause(text, at)?;
            if clauses.iter().any(|(c, _)| c.axis() == clause.axis()) {
                return Err(FilterError::DuplicateAxis {
                    name: clause.axis().name().into(),
                    position: at,
                });
            }
            clauses.push((clause, at));
            offset += segment.len() + 1;
        }
        clauses.sort_by_key(|(c, _)| c.axis());
        Ok(Self {
            clauses: clauses.into_iter().map(|(c, _)| c).collect(),
        })
    }
}

impl Serialize for FilterExpr {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FilterExpr {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Params;
    use proptest::prelude::*;

    fn row(levels: [u32; 7], ds: f64, de: f64, dr: Option<f64>) -> JoinedRecord {
        JoinedRecord {
            sim_id: 0,
            params: Params::from_levels(levels),
            delta_shock: ds,
            delta_edge: de,
            delta_rho: dr,
        }
    }

    #[test]
    fn parses_the_saved_example_string() {
        let f: FilterExpr = "profile 0; s1 0".parse().unwrap();
        assert_eq!(
            f.clauses(),
            &[
                Clause::Categorical {
                    param: 0,
                    levels: [0].into()
                },
                Clause::Categorical {
                    param: 1,
                    levels: [0].into()
                },
            ]
        );
        assert_eq!(f.to_string(), "profile 0; s1 0");
    }

    #[test]
    fn empty_string_is_empty_filter() {
        assert!("".parse::<FilterExpr>().unwrap().is_empty());
        assert!("   ".parse::<FilterExpr>().unwrap().is_empty());
        assert_eq!(FilterExpr::empty().to_string(), "");
    }

    #[test]
    fn range_clause_on_delta_axis() {
        let f: FilterExpr = "dshock [0,0.1]".parse().unwrap();
        assert_eq!(
            f.clauses(),
            &[Clause::Range {
                axis: Axis::DeltaShock,
                lo: 0.0,
                hi: 0.1
            }]
        );
        assert!(f.matches(&row([0; 7], 0.1, 9.0, None)));
        assert!(f.matches(&row([0; 7], 0.0, 9.0, None)));
        assert!(!f.matches(&row([0; 7], 0.10000001, 9.0, None)));
    }

    #[test]
    fn canonicalizes_order_spacing_and_levels() {
        let f: FilterExpr = "  drho [ 0 , 2.5 ];s1 2,0,0 ;profile 1".parse().unwrap();
        assert_eq!(f.to_string(), "profile 1; s1 0,2; drho [0,2.5]");
    }

    #[test]
    fn errors_carry_positions() {
        let e = "profile 0; bogus 1".parse::<FilterExpr>().unwrap_err();
        assert_eq!(
            e,
            FilterError::UnknownAxis {
                name: "bogus".into(),
                position: 11
            }
        );
        let e = "profile 0; profile 1".parse::<FilterExpr>().unwrap_err();
        assert_eq!(
            e,
            FilterError::DuplicateAxis {
                name: "profile".into(),
                position: 11
            }
        );
        let e = "profile 0;; s1 0".parse::<FilterExpr>().unwrap_err();
        assert!(matches!(e, FilterError::MalformedClause { position: 10, .. }));
        let e = "s1 0,x".parse::<FilterExpr>().unwrap_err();
        assert_eq!(e.position(), 5);
        let e = "dshock [0,abc]".parse::<FilterExpr>().unwrap_err();
        assert_eq!(e.position(), 10);
        let e = "dshock [1,0]".parse::<FilterExpr>().unwrap_err();
        assert!(matches!(e, FilterError::MalformedClause { .. }));
        let e = "dshock [0,1".parse::<FilterExpr>().unwrap_err();
        assert!(matches!(e, FilterError::MalformedClause { .. }));
        let e = "dedge 1".parse::<FilterExpr>().unwrap_err();
        assert!(matches!(e, FilterError::MalformedClause { position: 6, .. }));
        assert!("profile".parse::<FilterExpr>().is_err());
        assert!("profile 0;".parse::<FilterExpr>().is_err());
        assert!("dshock [0,inf]".parse::<FilterExpr>().is_err());
        assert!("profile -1".parse::<FilterExpr>().is_err());
    }

    #[test]
    fn conjunction_is_intersection() {
        let rows: Vec<JoinedRecord> = (0..27)
            .map(|i| row([i % 3, (i / 3) % 3, i / 9, 0, 0, 0, 0], i as f64 * 0.1, 0.0, Some(1.0)))
            .collect();
        let a: FilterExpr = "profile 0".parse().unwrap();
        let b: FilterExpr = "s1 0,1".parse().unwrap();
        let both: FilterExpr = "profile 0; s1 0,1".parse().unwrap();
        let ia: BTreeSet<_> = a.apply(&rows).iter().map(|r| r.delta_shock.to_bits()).collect();
        let ib: BTreeSet<_> = b.apply(&rows).iter().map(|r| r.delta_shock.to_bits()).collect();
        let iab: BTreeSet<_> = both.apply(&rows).iter().map(|r| r.delta_shock.to_bits()).collect();
        assert_eq!(iab, ia.intersection(&ib).copied().collect());
        assert_eq!(a.apply(&rows).len(), 9);
        assert_eq!(FilterExpr::empty().apply(&rows).len(), 27);
    }

    #[test]
    fn flagged_rows_fail_drho_ranges() {
        let f: FilterExpr = "drho [0,100]".parse().unwrap();
        assert!(!f.matches(&row([0; 7], 0.0, 0.0, None)));
        assert!(f.matches(&row([0; 7], 0.0, 0.0, Some(3.0))));
    }

    #[test]
    fn constructor_rejects_duplicates_and_empty_levels() {
        let c = Clause::Categorical {
            param: 2,
            levels: [1].into(),
        };
        assert!(FilterExpr::new([c.clone(), c.clone()]).is_err());
        assert!(FilterExpr::new([Clause::Categorical {
            param: 2,
            levels: BTreeSet::new()
        }])
        .is_err());
        let f = FilterExpr::new([
            Clause::Range {
                axis: Axis::DeltaRho,
                lo: 0.0,
                hi: 1.0,
            },
            c,
        ])
        .unwrap();
        assert_eq!(f.to_string(), "cs 1; drho [0,1]");
    }

    pub(crate) fn arb_filter() -> impl Strategy<Value = FilterExpr> {
        let clause = (0usize..10).prop_flat_map(|a| {
            let axis = if a < 7 {
                Axis::Param(a)
            } else {
                [Axis::DeltaShock, Axis::DeltaEdge, Axis::DeltaRho][a - 7]
            };
            let range = (-1e3f64..1e3, 0f64..1e3).prop_map(move |(lo, w)| Clause::Range { axis, lo, hi: lo + w });
            if a < 7 {
                prop_oneof![
                    prop::collection::btree_set(0u32..5, 1..4)
                        .prop_map(move |levels| Clause::Categorical { param: a, levels }),
                    range,
                ]
                .boxed()
            } else {
                range.boxed()
            }
        });
        prop::collection::vec(clause, 0..6).prop_map(|cs| {
            let mut seen = BTreeSet::new();
            FilterExpr::new(cs.into_iter().filter(|c| seen.insert(c.axis()))).unwrap()
        })
    }

    proptest! {
        #[test]
        fn serialize_parse_round_trip(f in arb_filter()) {
            let s = f.to_string();
            let back: FilterExpr = s.parse().unwrap();
            prop_assert_eq!(&back, &f);
            prop_assert_eq!(back.to_string(), s);
        }
    }
}
