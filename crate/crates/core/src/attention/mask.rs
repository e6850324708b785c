use crate::error::{Error, Result};

/// Element-level causality expressed through original token positions:
/// entry `(i, j)` is admissible iff `k_orig[j] <= q_orig[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementMask {
    q_orig: Vec<usize>,
    k_orig: Vec<usize>,
}

fn check_permutation(v: &[usize], what: &str) -> Result<()> {
    let mut seen = vec![false; v.len()];
    for &x in v {
        if x >= v.len() || seen[x] {
            return Err(Error::config(format!(
                "{what} positions are not a permutation of 0..{}",
                v.len()
            )));
        }
        seen[x] = true;
    }
    Ok(())
}

impl ElementMask {
    pub fn new(q_orig: Vec<usize>, k_orig: Vec<usize>) -> Result<Self> {
        check_permutation(&q_orig, "query")?;
        check_permutation(&k_orig, "key")?;
        Ok(ElementMask { q_orig, k_orig })
    }

    /// Plain causal masking over unpermuted positions.
    pub fn identity(n: usize, m: usize) -> Self {
        ElementMask {
            q_orig: (0..n).collect(),
            k_orig: (0..m).collect(),
        }
    }

    pub fn q_orig(&self) -> &[usize] {
        &self.q_orig
    }

    pub fn k_orig(&self) -> &[usize] {
        &self.k_orig
    }

    #[inline]
    pub fn admits(&self, i: usize, j: usize) -> bool {
        self.k_orig[j] <= self.q_orig[i]
    }
}

/// How entries of the score matrix are masked during one kernel call.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Visibility<'a> {
    All,
    Causal,
    Positions(&'a ElementMask),
}

/// Admissibility of a whole `(query block, key block)` tile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum TileVisibility {
    Full,
    Partial,
    Empty,
}

impl<'a> Visibility<'a> {
    pub(crate) fn resolve(causal: bool, mask: Option<&'a ElementMask>) -> Self {
        match (mask, causal) {
            (Some(m), _) => Visibility::Positions(m),
            (None, true) => Visibility::Causal,
            (None, false) => Visibility::All,
        }
    }

    #[inline]
    pub(crate) fn admits(&self, i: usize, j: usize) -> bool {
        match self {
            Visibility::All => true,
            Visibility::Causal => j <= i,
            Visibility::Positions(m) => m.admits(i, j),
        }
    }

    /// Position of each row for range summaries; `None` for unmasked.
    fn span(&self, rows: std::ops::Range<usize>, keys: bool) -> Option<(usize, usize)> {
        let pos = |x: usize| match self {
            Visibility::All => x,
            Visibility::Causal => x,
            Visibility::Positions(m) => {
                if keys {
                    m.k_orig[x]
                } else {
                    m.q_orig[x]
                }
            }
        };
        rows.map(pos).fold(None, |acc, p| match acc {
            None => Some((p, p)),
            Some((lo, hi)) => Some((lo.min(p), hi.max(p))),
        })
    }

    pub(crate) fn tile(&self, q: std::ops::Range<usize>, k: std::ops::Range<usize>) -> TileVisibility {
        if let Visibility::All = self {
            return TileVisibility::Full;
        }
        let (Some((q_lo, q_hi)), Some((k_lo, k_hi))) = (self.span(q, false), self.span(k, true)) else {
            return TileVisibility::Empty;
        };
        if k_hi <= q_lo {
            TileVisibility::Full
        } else if k_lo > q_hi {
            TileVisibility::Empty
        } else {
            TileVisibility::Partial
        }
    }
}
