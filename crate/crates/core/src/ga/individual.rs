use crate::error::{Error, Result};
use crate::ga::permutation::{apply_permutation, Permutation};
use crate::image::BinaryWatermark;
use crate::metrics;

/// The original watermark together with the lookups every fitness
/// evaluation needs.
#[derive(Clone, Debug)]
pub struct Problem {
    original: BinaryWatermark,
    is_white: Vec<bool>,
    whites: Vec<u32>,
    blacks: Vec<u32>,
}

impl Problem {
    /// Fails when the mark is all black or all white (nothing to scramble).
    pub fn new(original: &BinaryWatermark) -> Result<Self> {
        let k = original.white_count();
        if k == 0 || k == original.len() {
            return Err(Error::InvalidParameter(format!(
                "watermark with {k} white pixels out of {} has no search space",
                original.len()
            )));
        }
        Ok(Self {
            is_white: original.bits().iter().map(|&b| b == 1).collect(),
            whites: original.white_positions(),
            blacks: original.black_positions(),
            original: original.clone(),
        })
    }

    pub fn original(&self) -> &BinaryWatermark {
        &self.original
    }

    /// Number of pixels `m^2`.
    pub fn len(&self) -> usize {
        self.is_white.len()
    }

    pub fn is_empty(&self) -> bool {
        self.is_white.is_empty()
    }

    /// White count `k`.
    pub fn k(&self) -> usize {
        self.whites.len()
    }

    /// Smallest NC any permutation can reach: `max(0, (2k - m^2) / k)`.
    pub fn nc_lower_bound(&self) -> f64 {
        let (k, n) = (self.k() as f64, self.len() as f64);
        ((2.0 * k - n) / k).max(0.0)
    }

    /// Sorted white set of the permuted mark.
    pub(crate) fn white_set_of(&self, perm: &Permutation) -> Vec<u32> {
        let p = perm.as_slice();
        let mut set: Vec<u32> = self.whites.iter().map(|&i| p[i as usize]).collect();
        set.sort_unstable();
        set
    }

    /// Canonical permutation realizing a white set: original whites
    /// (ascending) onto `white_set` (ascending), blacks onto the complement.
    pub(crate) fn permutation_for(&self, white_set: &[u32]) -> Permutation {
        let n = self.len();
        let mut in_set = vec![false; n];
        for &v in white_set {
            in_set[v as usize] = true;
        }
        let complement = (0..n as u32).filter(|&v| !in_set[v as usize]);
        let mut images = vec![0u32; n];
        for (&from, &to) in self.whites.iter().zip(white_set) {
            images[from as usize] = to;
        }
        for (&from, to) in self.blacks.iter().zip(complement) {
            images[from as usize] = to;
        }
        Permutation::from_vec_unchecked(images)
    }

    pub(crate) fn overlap(&self, white_set: &[u32]) -> usize {
        white_set.iter().filter(|&&v| self.is_white[v as usize]).count()
    }

    pub fn individual(&self, perm: Permutation) -> Result<Individual> {
        if perm.len() != self.len() {
            return Err(Error::InvalidPermutation(format!(
                "permutation of length {} for {} pixels",
                perm.len(),
                self.len()
            )));
        }
        Ok(self.make(perm, 0))
    }

    pub(crate) fn make(&self, perm: Permutation, born: u64) -> Individual {
        let white_set = self.white_set_of(&perm);
        let overlap = self.overlap(&white_set);
        Individual { fitness: overlap as f64 / self.k() as f64, perm, white_set, overlap, born }
    }
}

/// A candidate scrambling of the watermark.
#[derive(Clone, Debug)]
pub struct Individual {
    perm: Permutation,
    white_set: Vec<u32>,
    overlap: usize,
    fitness: f64,
    pub(crate) born: u64,
}

impl Individual {
    pub fn perm(&self) -> &Permutation {
        &self.perm
    }

    /// Sorted positions of white pixels after permutation.
    pub fn white_set(&self) -> &[u32] {
        &self.white_set
    }

    /// Whites shared with the original.
    pub fn overlap(&self) -> usize {
        self.overlap
    }

    /// Cached NC against the original; lower is fitter.
    pub fn fitness(&self) -> f64 {
        self.fitness
    }

    pub fn same_white_set(&self, other: &Individual) -> bool {
        self.white_set == other.white_set
    }
}

/// NC between the original and its permutation under `ind`, computed from
/// scratch through the correlation formula.
pub fn fitness(original: &BinaryWatermark, ind: &Individual) -> Result<f64> {
    metrics::nc(original, &apply_permutation(original, ind.perm())?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mark(bits: &[u8]) -> BinaryWatermark {
        let side = (bits.len() as f64).sqrt() as usize;
        BinaryWatermark::new(side, bits.to_vec()).unwrap()
    }

    #[test]
    fn identity_has_fitness_one() {
        let w = mark(&[1, 0, 1, 0, 0, 1, 0, 0, 0]);
        let p = Problem::new(&w).unwrap();
        let ind = p.individual(Permutation::identity(9)).unwrap();
        assert_eq!(ind.fitness(), 1.0);
        assert_eq!(fitness(&w, &ind).unwrap(), 1.0);
    }

    #[test]
    fn disjoint_white_set_has_fitness_zero() {
        let w = mark(&[1, 1, 0, 0]);
        let p = Problem::new(&w).unwrap();
        let ind = p.individual(Permutation::new(vec![2, 3, 0, 1]).unwrap()).unwrap();
        assert_eq!(ind.white_set(), &[2, 3]);
        assert_eq!(ind.fitness(), 0.0);
        assert_eq!(fitness(&w, &ind).unwrap(), 0.0);
    }

    #[test]
    fn lower_bound_for_dense_mark() {
        // 20x20 at density 0.8: k = 320, bound (640 - 400) / 320
        let mut bits = vec![1u8; 20 * 20];
        bits.iter_mut().take(80).for_each(|b| *b = 0);
        let p = Problem::new(&mark(&bits)).unwrap();
        assert_eq!(p.nc_lower_bound(), 0.75);
        let sparse = Problem::new(&mark(&[1, 0, 0, 0])).unwrap();
        assert_eq!(sparse.nc_lower_bound(), 0.0);
    }

    #[test]
    fn degenerate_marks_rejected() {
        assert!(Problem::new(&mark(&[0, 0, 0, 0])).is_err());
        assert!(Problem::new(&mark(&[1, 1, 1, 1])).is_err());
    }

    #[test]
    fn canonical_reconstruction() {
        let w = mark(&[1, 0, 1, 0, 0, 1, 0, 0, 0]);
        let p = Problem::new(&w).unwrap();
        let perm = p.permutation_for(&[1, 4, 8]);
        // whites 0,2,5 -> 1,4,8; blacks 1,3,4,6,7,8 -> 0,2,3,5,6,7
        assert_eq!(perm.as_slice(), &[1, 0, 4, 2, 3, 8, 5, 6, 7]);
        assert_eq!(p.make(perm, 0).white_set(), &[1, 4, 8]);
    }
}
