//! Reference PPT verdicts for every bipartition of the six-mode sub-chain
//! state, used as a regression target.

use crate::entanglement::{enumerate_bipartitions, Bipartition, Verdict};
use crate::error::Result;

const TABLE: &str = include_str!("../data/ppt_sub6_verdicts.txt");

/// Mode count of the tabulated state.
pub const GOLDEN_MODES: usize = 6;

/// All 301 bipartitions of six modes with their reference verdicts, in
/// [`enumerate_bipartitions`] order.
pub fn golden_ppt_verdicts() -> Result<Vec<(Bipartition, Verdict)>> {
    let mut listed = std::collections::HashMap::new();
    for line in TABLE
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
    {
        let (bip, verdict) = line.rsplit_once(' ').expect("table line has a verdict");
        listed.insert(
            Bipartition::parse(GOLDEN_MODES, bip)?,
            verdict.parse::<Verdict>()?,
        );
    }
    enumerate_bipartitions(GOLDEN_MODES, false)?
        .into_iter()
        .map(|b| {
            let v = if b.is_cover() {
                Ok(Verdict::Always)
            } else {
                listed.get(&b).copied().ok_or_else(|| {
                    crate::error::Error::InvalidBipartition(format!(
                        "{b} missing from reference table"
                    ))
                })
            };
            v.map(|v| (b, v))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_is_complete() {
        let g = golden_ppt_verdicts().unwrap();
        assert_eq!(g.len(), 301);
        assert_eq!(g.iter().filter(|(b, _)| b.is_cover()).count(), 31);
        let lookup = |a: &[usize], b: &[usize]| {
            let key = Bipartition::new(6, a, b).unwrap();
            g.iter().find(|(x, _)| *x == key).unwrap().1
        };
        assert_eq!(lookup(&[1], &[2]), Verdict::Partial);
        assert_eq!(lookup(&[1], &[3]), Verdict::Never);
        assert_eq!(lookup(&[1], &[2, 3, 4]), Verdict::Always);
        assert_eq!(lookup(&[1, 2], &[3, 4]), Verdict::Always);
        assert_eq!(lookup(&[1, 2], &[4, 5]), Verdict::Never);
    }
}
