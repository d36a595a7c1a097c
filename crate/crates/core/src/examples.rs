//! Named tensors used throughout the tests and the CLI fixtures.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::combinatorics::ExponentVector;
use crate::linalg::SymMatrix;
use crate::scalar::ratio;
use crate::soscone::GramCertificate;
use crate::tensor::RationalTensor;

fn q(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Order 4, dimension 3: zero at `(0,0,0,0)`, one at the other two diagonal
/// positions, five everywhere else. Entrywise nonnegative (hence copositive)
/// but negative at `(−2, 0, 1)`.
pub fn nonnegative_quartic() -> RationalTensor {
    RationalTensor::builder(3, 4)
        .expect("valid shape")
        .default_value(q(5))
        .with(&[0, 0, 0, 0], q(0))
        .and_then(|b| b.with(&[1, 1, 1, 1], q(1)))
        .and_then(|b| b.with(&[2, 2, 2, 2], q(1)))
        .expect("valid indices")
        .build()
}

/// Order 6, dimension 3, with form
/// `x⁶ + y⁶ + z⁶ + 2x³y³ + 2x³z³ − 2y³z³`.
///
/// The mixed entries are `±1/10` because each of those tuples occurs 20 times.
pub fn sextic_sos_example() -> RationalTensor {
    let mut b = RationalTensor::builder(3, 6).expect("valid shape");
    for i in 0..3 {
        b.set(&[i; 6], q(1)).expect("valid index");
    }
    b.set(&[0, 0, 0, 1, 1, 1], ratio(1, 10)).expect("valid index");
    b.set(&[0, 0, 0, 2, 2, 2], ratio(1, 10)).expect("valid index");
    b.set(&[1, 1, 1, 2, 2, 2], ratio(-1, 10)).expect("valid index");
    b.build()
}

/// `[[1, −1], [−1, 1]]`, the form `(x₁ − x₂)²`.
pub fn difference_square() -> RationalTensor {
    matrix(&[[1, -1], [-1, 1]])
}

/// Small integer matrix helper.
pub fn matrix<const N: usize>(rows: &[[i64; N]; N]) -> RationalTensor {
    let rows: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| r.iter().map(|&v| q(v)).collect())
        .collect();
    RationalTensor::from_matrix(&rows).expect("square matrix")
}

/// Matrix with rational entries given as `(numerator, denominator)`.
pub fn rational_matrix<const N: usize>(rows: &[[(i64, i64); N]; N]) -> RationalTensor {
    let rows: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| r.iter().map(|&(a, b)| ratio(a, b)).collect())
        .collect();
    RationalTensor::from_matrix(&rows).expect("square matrix")
}

/// Level-0 Gram certificate for [`sextic_sos_example`]:
/// `y₁¹² + (y₂⁶ − y₃⁶)² + 2(y₁³y₂³)² + 2(y₁³y₃³)²`.
pub fn sextic_sos_certificate() -> GramCertificate {
    let mono = |v: [u32; 3]| ExponentVector::new(v.to_vec());
    GramCertificate {
        r: 0,
        monomials: vec![
            vec![mono([6, 0, 0])],
            vec![mono([0, 6, 0]), mono([0, 0, 6])],
            vec![mono([3, 3, 0])],
            vec![mono([3, 0, 3])],
        ],
        matrices: vec![
            SymMatrix::from_diag(&[1.0]),
            SymMatrix { n: 2, data: vec![1.0, -1.0, -1.0, 1.0] },
            SymMatrix::from_diag(&[2.0]),
            SymMatrix::from_diag(&[2.0]),
        ],
        residual: 0.0,
        min_eig: 0.0,
        iterations: 0,
    }
}
