use crate::error::{Error, Result};
use crate::permutation::Permutation;

/// Block-diagonal permutation: one local permutation per complete segment
/// of `segment_size` tokens, identity on the trailing `N mod S` tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentedPermutation {
    segment_size: usize,
    locals: Vec<Permutation>,
    total_len: usize,
}

impl SegmentedPermutation {
    pub fn new(segment_size: usize, locals: Vec<Permutation>, total_len: usize) -> Result<Self> {
        let groups = Self::group_count(total_len, segment_size);
        if locals.len() != groups {
            return Err(Error::config(format!(
                "{} local permutations for {groups} segments of {segment_size} in {total_len} tokens",
                locals.len()
            )));
        }
        if let Some((g, p)) = locals.iter().enumerate().find(|(_, p)| p.len() != segment_size) {
            return Err(Error::config(format!(
                "segment {g} permutation has length {}, expected {segment_size}",
                p.len()
            )));
        }
        Ok(SegmentedPermutation {
            segment_size,
            locals,
            total_len,
        })
    }

    pub fn identity(total_len: usize, segment_size: usize) -> Self {
        let groups = Self::group_count(total_len, segment_size);
        SegmentedPermutation {
            segment_size,
            locals: vec![Permutation::identity(segment_size); groups],
            total_len,
        }
    }

    /// `floor(N / S)`, or zero when `S == 0`.
    pub fn group_count(total_len: usize, segment_size: usize) -> usize {
        total_len.checked_div(segment_size).unwrap_or(0)
    }

    pub fn segment_size(&self) -> usize {
        self.segment_size
    }

    pub fn total_len(&self) -> usize {
        self.total_len
    }

    pub fn locals(&self) -> &[Permutation] {
        &self.locals
    }

    /// The global permutation over all `N` positions.
    pub fn flatten(&self) -> Permutation {
        let mut map = Vec::with_capacity(self.total_len);
        for (g, local) in self.locals.iter().enumerate() {
            let base = g * self.segment_size;
            map.extend(local.map().iter().map(|&x| base + x));
        }
        map.extend(map.len()..self.total_len);
        Permutation::from_trusted(map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn remainder_stays_put() {
        let locals = vec![
            Permutation::new(vec![2, 0, 1]).unwrap(),
            Permutation::new(vec![1, 2, 0]).unwrap(),
        ];
        let sp = SegmentedPermutation::new(3, locals, 8).unwrap();
        assert_eq!(sp.flatten().map(), &[2, 0, 1, 4, 5, 3, 6, 7]);
    }

    #[test]
    fn validates_locals() {
        assert!(SegmentedPermutation::new(3, vec![Permutation::identity(3)], 8).is_err());
        assert!(SegmentedPermutation::new(4, vec![Permutation::identity(3)], 4).is_err());
        assert!(SegmentedPermutation::new(0, vec![], 5).is_ok());
    }

    #[test]
    fn oversized_segment_is_identity() {
        let sp = SegmentedPermutation::identity(7, 16);
        assert!(sp.locals().is_empty());
        assert!(sp.flatten().is_identity());
    }

    proptest! {
        #[test]
        fn never_crosses_segments(seed in any::<u64>(), n in 0usize..64, s in 1usize..9) {
            let groups = n / s;
            let mut state = seed;
            let locals = (0..groups).map(|_| {
                let mut v: Vec<usize> = (0..s).collect();
                for i in (1..s).rev() {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                    v.swap(i, (state >> 33) as usize % (i + 1));
                }
                Permutation::new(v).unwrap()
            }).collect();
            let sp = SegmentedPermutation::new(s, locals, n).unwrap();
            let flat = sp.flatten();
            prop_assert!(Permutation::new(flat.map().to_vec()).is_ok());
            for p in 0..n {
                if p < groups * s {
                    prop_assert_eq!(p / s, flat.map()[p] / s);
                } else {
                    prop_assert_eq!(flat.map()[p], p);
                }
            }
        }
    }
}
