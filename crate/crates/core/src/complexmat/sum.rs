use num_complex::Complex64;

/// Streaming pairwise summation.
///
/// Keeps a stack of partial sums tagged with the number of terms they hold
/// (always a power of two) and merges equal-sized neighbours, so the final
/// reduction tree depends only on the number of terms.
#[derive(Debug, Default)]
pub(crate) struct PairwiseSum {
    stack: Vec<(Complex64, u64)>,
}

impl PairwiseSum {
    pub(crate) fn new() -> Self {
        Self { stack: Vec::with_capacity(64) }
    }

    pub(crate) fn add(&mut self, value: Complex64) {
        let mut entry = (value, 1u64);
        while let Some(&(top, size)) = self.stack.last() {
            if size != entry.1 {
                break;
            }
            self.stack.pop();
            entry = (top + entry.0, size * 2);
        }
        self.stack.push(entry);
    }

    pub(crate) fn total(&self) -> Complex64 {
        self.stack
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &(v, _)| acc + v)
    }
}
