#pragma once

namespace ratepmp {

/// Geometric tolerance for set membership tests (absolute).
inline constexpr double kSetTol = 1e-9;

/// Solver-level tolerance used when reporting constraint satisfaction.
/// Kept separate from kSetTol: membership is geometry, feasibility
/// reporting tracks what a solver can actually deliver.
inline constexpr double kFeasTol = 1e-6;

/// Default QP termination tolerance (max of primal/dual residual).
inline constexpr double kQpTol = 1e-7;

/// Default certificate tolerance, 100x the QP tolerance to absorb
/// residual amplification through the adjoint recursion.
inline constexpr double kCertTol = 1e-5;

}  // namespace ratepmp
