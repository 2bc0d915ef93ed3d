#include <cmath>

#include "doctest.h"
#include "soar/baselines.hpp"
#include "soar/errors.hpp"

using namespace soar;

namespace {

// Independent evaluation of the nu-method closed forms with integer factors,
// used as the oracle for nu_coeffs.
double oracle_mu(int k, double nu) {
    return (k - 1.0) * (2.0 * k - 3.0) * (2.0 * k + 2.0 * nu - 1.0) /
           ((k + 2.0 * nu - 1.0) * (2.0 * k + 4.0 * nu - 1.0) * (2.0 * k + 2.0 * nu - 3.0));
}

double oracle_omega(int k, double nu) {
    return 4.0 * (2.0 * k + 2.0 * nu - 1.0) * (k + nu - 1.0) /
           ((k + 2.0 * nu - 1.0) * (2.0 * k + 4.0 * nu - 1.0));
}

struct SmallProblem {
    std::shared_ptr<const Mesh> mesh;
    std::shared_ptr<const RegionMask> region;
    FemSystem system;
    std::unique_ptr<BlockFactorization> fact;
    BoundaryData data;
};

SmallProblem constant_problem(int n_rings, double c) {
    SmallProblem prob;
    prob.mesh = std::make_shared<const Mesh>(generate_disk_mesh(1.0, n_rings));
    prob.region = std::make_shared<const RegionMask>(
        mark_region(*prob.mesh, [](const Eigen::Vector2d&) { return true; }));
    const FemSystem base = assemble_system(prob.mesh, prob.region);
    prob.data = make_measurement(*prob.mesh, *prob.region,
                                 Eigen::VectorXd::Constant(base.m0(), c));
    prob.system = base.with_boundary_data(prob.data.nodes, prob.data.g1, prob.data.g2);
    prob.fact = std::make_unique<BlockFactorization>(prob.system);
    return prob;
}

} // namespace

TEST_CASE("DRM update formula") {
    SUBCASE("no force, no damping: pure drift") {
        Eigen::VectorXd p = Eigen::VectorXd::Constant(3, 1.0);
        Eigen::VectorXd q = Eigen::VectorXd::Constant(3, 0.5);
        drm_step(p, q, Eigen::VectorXd::Zero(3), 0.0, 0.0, 2.0);
        CHECK((q.array() - 0.5).abs().maxCoeff() == 0.0);
        CHECK((p.array() - 2.0).abs().maxCoeff() == 0.0);
    }
    SUBCASE("unit eta*dt halves the kick") {
        Eigen::VectorXd p = Eigen::VectorXd::Zero(3);
        Eigen::VectorXd q = Eigen::VectorXd::Zero(3);
        const Eigen::VectorXd g = Eigen::VectorXd::Constant(3, 0.7);
        const double dt = 1.0; // eta*dt = 1
        drm_step(p, q, g, 0.0, 1.0, dt);
        CHECK((q + 0.5 * dt * g).cwiseAbs().maxCoeff() <= 1e-15);
        CHECK((p + 0.5 * dt * dt * g).cwiseAbs().maxCoeff() <= 1e-15);
    }
    SUBCASE("default parameters give the documented first epsilon") {
        CHECK(drm_epsilon(0.1, 1.0 + 10.0) == doctest::Approx(0.003792).epsilon(1e-3));
        CHECK(drm_epsilon(0.1, 11.0) == doctest::Approx(0.0037912035584022397).epsilon(1e-14));
        CHECK_THROWS_AS(drm_epsilon(0.1, 1.0), std::domain_error);
    }
}

TEST_CASE("nu-method coefficients match the brute-force closed forms") {
    CHECK(nu_coeffs(0.5, 1).mu == 0.0);
    CHECK(nu_coeffs(0.5, 1).omega == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    CHECK(nu_coeffs(0.5, 2).mu == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(nu_coeffs(0.5, 2).omega == doctest::Approx(2.4).epsilon(1e-15));
    for (double nu : {0.5, 1.0, 2.0}) {
        for (int k = 2; k <= 50; ++k) {
            CHECK(nu_coeffs(nu, k).mu == doctest::Approx(oracle_mu(k, nu)).epsilon(1e-14));
            CHECK(nu_coeffs(nu, k).omega == doctest::Approx(oracle_omega(k, nu)).epsilon(1e-14));
        }
    }
    for (int k = 1; k <= 10000; ++k) {
        const double w = nu_coeffs(0.5, k).omega;
        CHECK(w > 0.0);
        CHECK(w <= 4.0);
    }
}

TEST_CASE("nu-method step") {
    const Eigen::VectorXd p = Eigen::VectorXd::Constant(4, 2.0);
    SUBCASE("fixed point at zero gradient") {
        const Eigen::VectorXd next = nu_step(3, p, p, Eigen::VectorXd::Zero(4), 0.5);
        CHECK((next - p).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("k = 2 uses mu = 0.2 and omega = 2.4 at nu = 1/2") {
        const Eigen::VectorXd prev = Eigen::VectorXd::Constant(4, 1.0);
        const Eigen::VectorXd g = Eigen::VectorXd::Constant(4, 0.5);
        const Eigen::VectorXd next = nu_step(2, p, prev, g, 0.5);
        CHECK(next[0] == doctest::Approx(2.0 + 0.2 * 1.0 - 2.4 * 0.5).epsilon(1e-15));
    }
}

TEST_CASE("Nesterov momentum and extrapolation") {
    CHECK(nesterov_momentum(1, 3.0) == 0.0);
    CHECK(nesterov_momentum(2, 3.0) == doctest::Approx(0.25).epsilon(1e-15));
    double prev = -1.0;
    for (int k = 1; k <= 10000; ++k) {
        const double f = nesterov_momentum(k, 3.0);
        CHECK(f > prev);
        CHECK(f < 1.0);
        prev = f;
    }
    const Eigen::VectorXd p = Eigen::VectorXd::Constant(2, 3.0);
    const Eigen::VectorXd prev_p = Eigen::VectorXd::Constant(2, 1.0);
    const Eigen::VectorXd z1 = nesterov_extrapolate(1, p, prev_p, 3.0);
    CHECK((z1 - p).cwiseAbs().maxCoeff() == 0.0);
    const Eigen::VectorXd z2 = nesterov_extrapolate(2, p, prev_p, 3.0);
    CHECK(z2[0] == doctest::Approx(3.0 + 0.25 * 2.0).epsilon(1e-15));
    // Fixed point: no momentum, no gradient.
    const Eigen::VectorXd next = nesterov_step(p, Eigen::VectorXd::Zero(2), 10.0);
    CHECK((next - p).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("baseline config validation") {
    BaselineConfig cfg;
    cfg.method = BaselineMethod::Nesterov;
    cfg.nesterov_alpha = 2.0;
    CHECK_THROWS_AS(cfg.validate(4), ConfigError);
    cfg.nesterov_alpha = 3.0;
    cfg.nesterov_omega = 0.0;
    CHECK_THROWS_AS(cfg.validate(4), ConfigError);
    cfg = BaselineConfig{};
    cfg.method = BaselineMethod::Nu;
    cfg.nu = 0.0;
    CHECK_THROWS_AS(cfg.validate(4), ConfigError);
    cfg = BaselineConfig{};
    cfg.method = BaselineMethod::Drm;
    cfg.drm_dt = 0.0;
    CHECK_THROWS_AS(cfg.validate(4), ConfigError);
}

TEST_CASE("run_baseline contracts") {
    SmallProblem prob = constant_problem(4, 2.5);

    SUBCASE("n_max = 0 returns the initial guess") {
        BaselineConfig cfg;
        cfg.method = BaselineMethod::Nu;
        cfg.n_max = 0;
        cfg.p0 = Eigen::VectorXd::Constant(prob.system.m0(), 0.5);
        const RunRecord rec = run_baseline(prob.system, *prob.fact, prob.data, cfg);
        CHECK(rec.reason == StopReason::MaxIterations);
        CHECK((rec.final_p.array() - 0.5).abs().maxCoeff() == 0.0);
    }
    SUBCASE("exact constant data is a fixed point for every method") {
        for (BaselineMethod method :
             {BaselineMethod::Drm, BaselineMethod::Nu, BaselineMethod::Nesterov}) {
            BaselineConfig cfg;
            cfg.method = method;
            cfg.n_max = 50;
            cfg.p0 = Eigen::VectorXd::Constant(prob.system.m0(), 2.5);
            const RunRecord rec = run_baseline(prob.system, *prob.fact, prob.data, cfg);
            CHECK(rec.reason == StopReason::DiscrepancyMet);
            CHECK(rec.iterations() == 0);
        }
    }
    SUBCASE("rows are contiguous and the stopping contract holds") {
        BaselineConfig cfg;
        cfg.method = BaselineMethod::Nesterov;
        cfg.nesterov_omega = 1.0;
        cfg.n_max = 5;
        // zero initial guess against nonzero data: a few iterations happen
        const RunRecord rec = run_baseline(prob.system, *prob.fact, prob.data, cfg);
        for (std::size_t i = 0; i < rec.rows.size(); ++i) {
            CHECK(rec.rows[i].k == static_cast<int>(i));
        }
        if (rec.reason == StopReason::MaxIterations) {
            for (const auto& row : rec.rows) CHECK(row.chi > cfg.eps0);
        } else {
            CHECK(rec.rows.back().chi <= cfg.eps0);
        }
    }
}
