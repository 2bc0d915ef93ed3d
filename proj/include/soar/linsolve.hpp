#ifndef SOAR_LINSOLVE_HPP
#define SOAR_LINSOLVE_HPP

#include <memory>

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <Eigen/IterativeLinearSolvers>

#include "soar/assembly.hpp"

namespace soar {

/// Nodal values of the real and imaginary parts of a complex field.
struct ComplexFieldSplit {
    Eigen::VectorXd re;
    Eigen::VectorXd im;
};

/// Factorization of the coupled real block matrix
///   K = [ A  -F ]      with A = D + E,
///       [ F   A ]
/// reused for every forward and adjoint solve on a mesh. Direct sparse LU;
/// falls back to ILU-preconditioned BiCGSTAB if the factorization fails.
class BlockFactorization {
public:
    explicit BlockFactorization(const FemSystem& system);

    int block_size() const { return m_; }

    /// Solve K x = rhs for a full 2m right-hand side.
    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

    /// Solve with the two m-blocks given separately; returns (re, im).
    ComplexFieldSplit solve_split(const Eigen::VectorXd& rhs_re,
                                  const Eigen::VectorXd& rhs_im) const;

    double probe_residual() const { return probe_residual_; }
    double factor_seconds() const { return factor_seconds_; }
    bool used_iterative_fallback() const { return iterative_ != nullptr; }

private:
    Eigen::SparseMatrix<double> K_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
    std::unique_ptr<Eigen::BiCGSTAB<Eigen::SparseMatrix<double>,
                                    Eigen::IncompleteLUT<double>>> iterative_;
    int m_ = 0;
    double probe_residual_ = 0.0;
    double factor_seconds_ = 0.0;
};

/// Coupled Robin state at source coefficients p (length m0):
/// rhs blocks (B p + b2, b1).
ComplexFieldSplit solve_ccbm(const BlockFactorization& fact, const FemSystem& system,
                             const Eigen::VectorXd& p);

/// Adjoint state driven by E * u_im; same block matrix, rhs (E u_im, 0).
ComplexFieldSplit solve_adjoint(const BlockFactorization& fact, const FemSystem& system,
                                const Eigen::VectorXd& u_im);

/// Solve the well-posed Neumann problem (D+E) u = B p + boundary load of g2.
Eigen::VectorXd solve_neumann(const FemSystem& system, const Eigen::VectorXd& p);
Eigen::VectorXd solve_neumann(const FemSystem& system, const Eigen::VectorXd& p,
                              const std::vector<int>& boundary_nodes,
                              const Eigen::VectorXd& g2);

/// Coefficient-space gradient B^T w_im of the discrete objective
/// V_h(p) = 0.5 ||u_im||^2_E. Used by the finite-difference gradient check;
/// the iteration itself uses the nodal restriction of w_im.
Eigen::VectorXd coefficient_gradient(const FemSystem& system, const Eigen::VectorXd& w_im);

} // namespace soar

#endif
