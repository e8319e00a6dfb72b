//! Continuous-time Lyapunov equation solver.

use crate::error::CoreError;
use crate::numerics::Matrix;

/// Solve `Aᵀ P + P A = -Q` for symmetric `P`.
///
/// The equation is vectorized with Kronecker products:
/// `(I ⊗ Aᵀ + Aᵀ ⊗ I) vec(P) = vec(-Q)` where `vec` stacks columns, and the
/// resulting n²×n² system is solved by Gaussian elimination with partial
/// pivoting. The result is symmetrized to remove roundoff skew; the caller
/// is expected to verify the residual and positive definiteness.
pub fn solve_lyapunov(a: &Matrix, q: &Matrix) -> Result<Matrix, CoreError> {
    let n = a.rows();
    if a.cols() != n || q.rows() != n || q.cols() != n {
        return Err(CoreError::DimensionMismatch {
            context: "solve_lyapunov",
            expected: alloc::format!("square A and Q of equal order"),
            actual: alloc::format!(
                "A {} x {}, Q {} x {}",
                a.rows(),
                a.cols(),
                q.rows(),
                q.cols()
            ),
        });
    }
    let at = a.transpose();
    let eye = Matrix::identity(n);
    // vec(AᵀP) = (I ⊗ Aᵀ) vec(P); vec(PA) = (Aᵀ ⊗ I) vec(P),
    // with vec(·) stacking columns.
    let big = eye.kron(&at).add(&at.kron(&eye))?;

    // vec(-Q), column-stacked.
    let mut rhs = alloc::vec![0.0; n * n];
    for col in 0..n {
        for row in 0..n {
            rhs[col * n + row] = -q.get(row, col);
        }
    }
    let sol = big.solve(&rhs)?;

    let mut p = Matrix::zeros(n, n);
    for col in 0..n {
        for row in 0..n {
            p.set(row, col, sol[col * n + row]);
        }
    }
    // Symmetrize: the exact solution is symmetric; elimination roundoff
    // may leave a tiny skew part.
    let p = p.add(&p.transpose())?.scale(0.5);
    Ok(p)
}

/// Residual `‖AᵀP + PA + Q‖_F` of a candidate Lyapunov solution.
pub fn lyapunov_residual(a: &Matrix, p: &Matrix, q: &Matrix) -> Result<f64, CoreError> {
    let at_p = a.transpose().matmul(p)?;
    let p_a = p.matmul(a)?;
    Ok(at_p.add(&p_a)?.add(q)?.frobenius_norm())
}
