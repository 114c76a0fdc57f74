use super::LoadMatrix;
use crate::error::{Error, Result};

/// SLAs that go with [`example1_instance`].
pub const EXAMPLE1_SLA: [f64; 3] = [0.5, 0.2, 0.3];

/// Three users. User 1 demands 1 during the first and last thirds of the
/// horizon and nothing in between; users 2 and 3 each demand `1 - L(1)`.
pub fn example1_instance(steps: usize) -> Result<LoadMatrix> {
    if steps == 0 || steps % 3 != 0 {
        return Err(Error::Config(format!(
            "the example instance needs a positive horizon divisible by 3, got {steps}"
        )));
    }
    let third = steps / 3;
    let mut data = Vec::with_capacity(steps * 3);
    for t in 1..=steps {
        let first = if t <= third || t > 2 * third { 1.0 } else { 0.0 };
        data.extend_from_slice(&[first, 1.0 - first, 1.0 - first]);
    }
    LoadMatrix::from_flat(3, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_and_per_step_totals() {
        let m = example1_instance(6).unwrap();
        let totals: Vec<f64> = (0..6).map(|t| m.row(t).iter().sum()).collect();
        assert_eq!(totals, vec![1.0, 1.0, 2.0, 2.0, 1.0, 1.0]);
        assert!(example1_instance(7).is_err());
        assert!(example1_instance(0).is_err());
    }
}
