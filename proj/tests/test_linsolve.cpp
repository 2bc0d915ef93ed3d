#include <future>
#include <random>

#include <Eigen/Dense>

#include "doctest.h"
#include "soar/errors.hpp"
#include "soar/linsolve.hpp"

using namespace soar;

namespace {

FemSystem disk_system(int n_rings, const std::function<bool(const Eigen::Vector2d&)>& region_pred) {
    auto mesh = std::make_shared<const Mesh>(generate_disk_mesh(1.0, n_rings));
    auto region = std::make_shared<const RegionMask>(mark_region(*mesh, region_pred));
    return assemble_system(mesh, region);
}

FemSystem whole_disk_system(int n_rings) {
    return disk_system(n_rings, [](const Eigen::Vector2d&) { return true; });
}

Eigen::VectorXd random_vector(int n, unsigned seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = dist(gen);
    return v;
}

double ccbm_residual(const FemSystem& sys, const Eigen::VectorXd& p, const ComplexFieldSplit& u) {
    const SparseMat A = sys.D() + sys.E();
    const Eigen::VectorXd rhs_re = sys.B() * p + sys.b2;
    const Eigen::VectorXd top = A * u.re - sys.F() * u.im - rhs_re;
    const Eigen::VectorXd bot = sys.F() * u.re + A * u.im - sys.b1;
    const double rhs_norm = std::sqrt(rhs_re.squaredNorm() + sys.b1.squaredNorm());
    return std::sqrt(top.squaredNorm() + bot.squaredNorm()) / std::max(rhs_norm, 1e-30);
}

} // namespace

TEST_CASE("factorization of the 7-node mesh satisfies the probe contract") {
    const FemSystem sys = whole_disk_system(1);
    const BlockFactorization fact(sys);
    CHECK(fact.block_size() == 7);
    CHECK(fact.probe_residual() <= 1e-10);
    CHECK(!fact.used_iterative_fallback());
}

TEST_CASE("random right-hand sides solve to the residual contract") {
    const FemSystem sys = whole_disk_system(3);
    const BlockFactorization fact(sys);
    const SparseMat A = sys.D() + sys.E();
    const int m = sys.m();
    for (unsigned seed : {1u, 2u, 3u}) {
        const Eigen::VectorXd r = random_vector(2 * m, seed);
        const Eigen::VectorXd x = fact.solve(r);
        Eigen::VectorXd kx(2 * m);
        kx.head(m) = A * x.head(m) - sys.F() * x.tail(m);
        kx.tail(m) = sys.F() * x.head(m) + A * x.tail(m);
        CHECK((kx - r).norm() / r.norm() <= 1e-10);
    }
}

TEST_CASE("zero boundary coupling decouples the blocks") {
    FemSystem sys = whole_disk_system(2);
    auto mats = std::make_shared<FemMatrices>(*sys.mats);
    mats->F = SparseMat(sys.m(), sys.m()); // F = 0: synthetic decoupling
    sys.mats = mats;
    const BlockFactorization fact(sys);
    const Eigen::VectorXd p = random_vector(sys.m0(), 11);
    const ComplexFieldSplit u = solve_ccbm(fact, sys, p);
    CHECK(u.im.cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, u.re.cwiseAbs().maxCoeff()));
}

TEST_CASE("constant source with matching Dirichlet data gives a real constant field") {
    const FemSystem base = whole_disk_system(3);
    const BoundaryParam param = boundary_param(*base.mesh);
    const double c = 2.75;
    const FemSystem sys = base.with_boundary_data(
        param.nodes, Eigen::VectorXd::Constant(param.nodes.size(), c),
        Eigen::VectorXd::Zero(param.nodes.size()));
    const BlockFactorization fact(sys);
    const ComplexFieldSplit u = solve_ccbm(fact, sys, Eigen::VectorXd::Constant(sys.m0(), c));
    CHECK((u.re.array() - c).abs().maxCoeff() <= 1e-10);
    CHECK(u.im.cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(ccbm_residual(sys, Eigen::VectorXd::Constant(sys.m0(), c), u) <= 1e-10);
}

TEST_CASE("zero source and zero data give the zero field") {
    const FemSystem sys = whole_disk_system(2);
    const BlockFactorization fact(sys);
    const ComplexFieldSplit u = solve_ccbm(fact, sys, Eigen::VectorXd::Zero(sys.m0()));
    CHECK(u.re.cwiseAbs().maxCoeff() == 0.0);
    CHECK(u.im.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("the coupled solve is affine in the source") {
    const FemSystem base = whole_disk_system(3);
    const BoundaryParam param = boundary_param(*base.mesh);
    Eigen::VectorXd g1(param.nodes.size());
    for (std::size_t i = 0; i < param.nodes.size(); ++i) {
        g1[static_cast<Eigen::Index>(i)] = 1.0 + 0.3 * base.mesh->nodes[param.nodes[i]].x();
    }
    const FemSystem sys =
        base.with_boundary_data(param.nodes, g1, Eigen::VectorXd::Zero(param.nodes.size()));
    const BlockFactorization fact(sys);
    const Eigen::VectorXd p1 = random_vector(sys.m0(), 5);
    const Eigen::VectorXd p2 = random_vector(sys.m0(), 6);
    const ComplexFieldSplit u12 = solve_ccbm(fact, sys, p1 + p2);
    const ComplexFieldSplit u1 = solve_ccbm(fact, sys, p1);
    const ComplexFieldSplit u2 = solve_ccbm(fact, sys, p2);
    const ComplexFieldSplit u0 = solve_ccbm(fact, sys, Eigen::VectorXd::Zero(sys.m0()));
    const double scale = u12.re.cwiseAbs().maxCoeff();
    CHECK((u12.re - (u1.re + u2.re - u0.re)).cwiseAbs().maxCoeff() <= 1e-9 * scale);
    CHECK((u12.im - (u1.im + u2.im - u0.im)).cwiseAbs().maxCoeff() <= 1e-9 * scale);
}

TEST_CASE("adjoint solve is zero for zero input and linear in u_im") {
    const FemSystem sys = whole_disk_system(2);
    const BlockFactorization fact(sys);
    const ComplexFieldSplit w0 = solve_adjoint(fact, sys, Eigen::VectorXd::Zero(sys.m()));
    CHECK(w0.re.cwiseAbs().maxCoeff() == 0.0);
    CHECK(w0.im.cwiseAbs().maxCoeff() == 0.0);

    const Eigen::VectorXd v1 = random_vector(sys.m(), 21);
    const Eigen::VectorXd v2 = random_vector(sys.m(), 22);
    const ComplexFieldSplit wa = solve_adjoint(fact, sys, v1);
    const ComplexFieldSplit wb = solve_adjoint(fact, sys, v2);
    const ComplexFieldSplit wab = solve_adjoint(fact, sys, v1 + 2.0 * v2);
    const double scale = std::max(1.0, wab.im.cwiseAbs().maxCoeff());
    CHECK((wab.im - (wa.im + 2.0 * wb.im)).cwiseAbs().maxCoeff() <= 1e-9 * scale);
}

TEST_CASE("discrete gradient identity: finite differences match B^T w_im") {
    const FemSystem base = disk_system(4, [](const Eigen::Vector2d& x) {
        return -0.5 < x.x() && x.x() < 0.5 && -0.5 < x.y() && x.y() < 0.5;
    });
    const BoundaryParam param = boundary_param(*base.mesh);
    Eigen::VectorXd g1(param.nodes.size()), g2(param.nodes.size());
    for (std::size_t i = 0; i < param.nodes.size(); ++i) {
        const Eigen::Vector2d& x = base.mesh->nodes[param.nodes[i]];
        g1[static_cast<Eigen::Index>(i)] = 1.0 + x.x();
        g2[static_cast<Eigen::Index>(i)] = 0.3 * x.y();
    }
    const FemSystem sys = base.with_boundary_data(param.nodes, g1, g2);
    const BlockFactorization fact(sys);

    auto objective = [&](const Eigen::VectorXd& p) {
        const ComplexFieldSplit u = solve_ccbm(fact, sys, p);
        return 0.5 * u.im.dot(sys.E() * u.im);
    };

    const Eigen::VectorXd p = random_vector(sys.m0(), 77);
    const ComplexFieldSplit u = solve_ccbm(fact, sys, p);
    const ComplexFieldSplit w = solve_adjoint(fact, sys, u.im);
    const Eigen::VectorXd grad = coefficient_gradient(sys, w.im);

    const double eps = 1e-6;
    for (unsigned trial = 0; trial < 10; ++trial) {
        const Eigen::VectorXd dp = random_vector(sys.m0(), 100 + trial);
        const double fd = (objective(p + eps * dp) - objective(p - eps * dp)) / (2.0 * eps);
        const double analytic = dp.dot(grad);
        CHECK(std::abs(fd - analytic) <= 1e-5 * std::max(std::abs(analytic), 1e-12));
    }
}

TEST_CASE("Neumann solve reproduces constants and zero") {
    const FemSystem sys = whole_disk_system(3);
    const double c = -1.5;
    const Eigen::VectorXd u = solve_neumann(sys, Eigen::VectorXd::Constant(sys.m0(), c));
    CHECK((u.array() - c).abs().maxCoeff() <= 1e-10);
    const Eigen::VectorXd z = solve_neumann(sys, Eigen::VectorXd::Zero(sys.m0()));
    CHECK(z.cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("dimension mismatches are rejected") {
    const FemSystem sys = whole_disk_system(2);
    const BlockFactorization fact(sys);
    CHECK_THROWS_AS(solve_ccbm(fact, sys, Eigen::VectorXd::Zero(sys.m0() + 1)),
                    DimensionMismatchError);
    CHECK_THROWS_AS(solve_adjoint(fact, sys, Eigen::VectorXd::Zero(sys.m() - 1)),
                    DimensionMismatchError);
    CHECK_THROWS_AS(fact.solve(Eigen::VectorXd::Zero(3)), DimensionMismatchError);
    CHECK_THROWS_AS(solve_neumann(sys, Eigen::VectorXd::Zero(2)), DimensionMismatchError);
}

TEST_CASE("concurrent solves against one factorization agree with sequential ones") {
    const FemSystem sys = whole_disk_system(4);
    const BlockFactorization fact(sys);
    const int n = 32;
    std::vector<Eigen::VectorXd> rhs(n), expected(n);
    for (int i = 0; i < n; ++i) {
        rhs[i] = random_vector(2 * sys.m(), 500 + i);
        expected[i] = fact.solve(rhs[i]);
    }
    std::vector<std::future<Eigen::VectorXd>> futures;
    futures.reserve(n);
    for (int i = 0; i < n; ++i) {
        futures.push_back(std::async(std::launch::async, [&, i]() { return fact.solve(rhs[i]); }));
    }
    for (int i = 0; i < n; ++i) {
        CHECK((futures[i].get() - expected[i]).cwiseAbs().maxCoeff() == 0.0);
    }
}
