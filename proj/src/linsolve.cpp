#include "soar/linsolve.hpp"

#include <chrono>
#include <random>
#include <vector>

#include <Eigen/SparseCholesky>

#include "soar/errors.hpp"

namespace soar {

namespace {

Eigen::SparseMatrix<double> build_block_matrix(const FemSystem& system) {
    const int m = system.m();
    SparseMat A = system.D() + system.E();
    const SparseMat& F = system.F();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(2 * (A.nonZeros() + F.nonZeros()));
    for (int r = 0; r < m; ++r) {
        for (SparseMat::InnerIterator it(A, r); it; ++it) {
            trips.emplace_back(r, static_cast<int>(it.col()), it.value());
            trips.emplace_back(m + r, m + static_cast<int>(it.col()), it.value());
        }
        for (SparseMat::InnerIterator it(F, r); it; ++it) {
            trips.emplace_back(r, m + static_cast<int>(it.col()), -it.value());
            trips.emplace_back(m + r, static_cast<int>(it.col()), it.value());
        }
    }
    Eigen::SparseMatrix<double> K(2 * m, 2 * m);
    K.setFromTriplets(trips.begin(), trips.end());
    K.makeCompressed();
    return K;
}

} // namespace

BlockFactorization::BlockFactorization(const FemSystem& system)
    : K_(build_block_matrix(system)), m_(system.m()) {
    const auto start = std::chrono::steady_clock::now();
    lu_.isSymmetric(false);
    lu_.compute(K_);
    if (lu_.info() != Eigen::Success) {
        iterative_ = std::make_unique<Eigen::BiCGSTAB<Eigen::SparseMatrix<double>,
                                                      Eigen::IncompleteLUT<double>>>();
        iterative_->setTolerance(1e-12);
        iterative_->compute(K_);
        if (iterative_->info() != Eigen::Success) {
            throw SingularSystemError("BlockFactorization: coupled matrix is singular");
        }
    }
    factor_seconds_ = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    // One random probe against the residual contract.
    std::mt19937_64 gen(0x51ab5eed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Eigen::VectorXd v(2 * m_);
    for (int i = 0; i < 2 * m_; ++i) v[i] = dist(gen);
    probe_residual_ = (K_ * solve(v) - v).norm() / v.norm();
    if (!(probe_residual_ <= 1e-10)) {
        throw SingularSystemError("BlockFactorization: probe residual " +
                                  std::to_string(probe_residual_) + " exceeds 1e-10");
    }
}

Eigen::VectorXd BlockFactorization::solve(const Eigen::VectorXd& rhs) const {
    if (rhs.size() != 2 * m_) {
        throw DimensionMismatchError("BlockFactorization::solve: rhs length != 2m");
    }
    if (iterative_) return iterative_->solve(rhs);
    return lu_.solve(rhs);
}

ComplexFieldSplit BlockFactorization::solve_split(const Eigen::VectorXd& rhs_re,
                                                  const Eigen::VectorXd& rhs_im) const {
    if (rhs_re.size() != m_ || rhs_im.size() != m_) {
        throw DimensionMismatchError("BlockFactorization::solve_split: block length != m");
    }
    Eigen::VectorXd rhs(2 * m_);
    rhs.head(m_) = rhs_re;
    rhs.tail(m_) = rhs_im;
    const Eigen::VectorXd x = solve(rhs);
    return {x.head(m_), x.tail(m_)};
}

ComplexFieldSplit solve_ccbm(const BlockFactorization& fact, const FemSystem& system,
                             const Eigen::VectorXd& p) {
    if (p.size() != system.m0()) {
        throw DimensionMismatchError("solve_ccbm: p length != m0");
    }
    return fact.solve_split(system.B() * p + system.b2, system.b1);
}

ComplexFieldSplit solve_adjoint(const BlockFactorization& fact, const FemSystem& system,
                                const Eigen::VectorXd& u_im) {
    if (u_im.size() != system.m()) {
        throw DimensionMismatchError("solve_adjoint: u_im length != m");
    }
    return fact.solve_split(system.E() * u_im, Eigen::VectorXd::Zero(system.m()));
}

Eigen::VectorXd solve_neumann(const FemSystem& system, const Eigen::VectorXd& p) {
    return solve_neumann(system, p, {}, Eigen::VectorXd());
}

Eigen::VectorXd solve_neumann(const FemSystem& system, const Eigen::VectorXd& p,
                              const std::vector<int>& boundary_nodes,
                              const Eigen::VectorXd& g2) {
    if (p.size() != system.m0()) {
        throw DimensionMismatchError("solve_neumann: p length != m0");
    }
    Eigen::VectorXd rhs = system.B() * p;
    if (!boundary_nodes.empty()) {
        rhs += assemble_boundary_load(*system.mesh, boundary_nodes, g2);
    }
    Eigen::SparseMatrix<double> A = SparseMat(system.D() + system.E());
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(A);
    if (llt.info() != Eigen::Success) {
        throw SingularSystemError("solve_neumann: D+E factorization failed");
    }
    return llt.solve(rhs);
}

Eigen::VectorXd coefficient_gradient(const FemSystem& system, const Eigen::VectorXd& w_im) {
    if (w_im.size() != system.m()) {
        throw DimensionMismatchError("coefficient_gradient: w_im length != m");
    }
    return system.B().transpose() * w_im;
}

} // namespace soar
