#include "doctest.h"
#include "soar/errors.hpp"
#include "soar/experiments.hpp"

using namespace soar;

namespace {

// Desk-scale base settings shared by the sweep tests.
RunParams small_params() {
    RunParams p;
    p.fine_rings = 8;
    p.coarse_rings = 4;
    p.n_max = 60;
    p.dt = 5.0;
    p.eta = 0.1;
    p.tau = 0.05;
    p.seed = 77;
    return p;
}

} // namespace

TEST_CASE("relative L2 error") {
    const Mesh mesh = generate_disk_mesh(1.0, 3);
    const RegionMask all = mark_region(mesh, [](const Eigen::Vector2d&) { return true; });
    const SparseMat M0 = assemble_region_mass(mesh, all);
    const Eigen::VectorXd p = Eigen::VectorXd::Constant(all.size(), 2.0);
    CHECK(l2_err(p, p, M0) == 0.0);
    CHECK(l2_err(Eigen::VectorXd::Zero(all.size()), p, M0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(l2_err(2.0 * p, p, M0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(l2_err(p, Eigen::VectorXd::Zero(all.size()), M0), ZeroReferenceError);
}

TEST_CASE("config construction from flat parameters") {
    RunParams params = small_params();
    params.method = "soar3";
    const SoarConfig cfg = to_soar_config(params, 10);
    CHECK(cfg.damping.kind == DampingSchedule::Kind::Dynamic);
    CHECK(cfg.discrepancy == DiscrepancyKind::Morozov);
    CHECK(cfg.p0.size() == 10);

    params.method = "soar2";
    CHECK(to_soar_config(params, 10).discrepancy == DiscrepancyKind::TotalEnergy);
    params.method = "drm";
    CHECK(to_baseline_config(params, 10).method == BaselineMethod::Drm);
    params.method = "bogus";
    CHECK_THROWS_AS(params.validate(), ConfigError);
}

TEST_CASE("single-value sweep yields one row") {
    ExperimentSpec spec;
    spec.base = small_params();
    spec.axis = SweepAxis::DeltaPrime;
    spec.values = {0.05};
    const SweepTable table = run_sweep(spec);
    REQUIRE(table.rows.size() == 1);
    CHECK(table.rows[0].ok);
    CHECK(table.rows[0].iter_num <= spec.base.n_max);
    CHECK((table.rows[0].reason == "DiscrepancyMet" || table.rows[0].reason == "MaxIterations"));
    if (table.rows[0].reason == "MaxIterations") {
        CHECK(table.rows[0].iter_num == spec.base.n_max);
    }
}

TEST_CASE("sweeps are deterministic and parallelism does not change bytes") {
    ExperimentSpec spec;
    spec.base = small_params();
    spec.axis = SweepAxis::DeltaPrime;
    spec.values = {0.5, 0.25, 0.125};
    const std::string csv1 = run_sweep(spec, 1).to_csv();
    const std::string csv2 = run_sweep(spec, 1).to_csv();
    const std::string csv4 = run_sweep(spec, 4).to_csv();
    CHECK(csv1 == csv2);
    CHECK(csv1 == csv4);
    CHECK(csv1.substr(0, csv1.find('\n')) == "sweep_value,l2err,iternum,reason");
}

TEST_CASE("per-row failures are recorded and the sweep continues") {
    ExperimentSpec spec;
    spec.base = small_params();
    spec.axis = SweepAxis::Dt;
    spec.values = {1e9, 5.0}; // first row diverges
    const SweepTable table = run_sweep(spec);
    REQUIRE(table.rows.size() == 2);
    CHECK(!table.rows[0].ok);
    CHECK(table.rows[0].reason.rfind("Error:", 0) == 0);
    CHECK(table.rows[1].ok);
}

TEST_CASE("method sweeps share one noise realization") {
    ExperimentSpec spec;
    spec.base = small_params();
    spec.axis = SweepAxis::Method;
    spec.methods = {"soar1", "soar1", "nesterov"};
    const SweepTable table = run_sweep(spec);
    REQUIRE(table.rows.size() == 3);
    REQUIRE(table.rows[0].ok);
    REQUIRE(table.rows[1].ok);
    CHECK(table.rows[0].l2err == table.rows[1].l2err);
    CHECK(table.rows[0].iter_num == table.rows[1].iter_num);
}

TEST_CASE("delta-prime rows use distinct noise streams") {
    ExperimentSpec spec;
    spec.base = small_params();
    spec.axis = SweepAxis::DeltaPrime;
    spec.values = {0.05, 0.05};
    const SweepTable table = run_sweep(spec);
    REQUIRE(table.rows.size() == 2);
    // Same delta' but different row seeds: reconstructions differ.
    CHECK(table.rows[0].l2err != table.rows[1].l2err);
}

TEST_CASE("comparison grid runs every method on identical data") {
    ExperimentSpec spec;
    spec.base = small_params();
    spec.methods = {"soar1", "soar1", "drm"};
    spec.compare_delta_primes = {0.05, 0.2};
    const CompareTable table = compare_methods(spec, 2);
    REQUIRE(table.rows.size() == 6);
    // Row layout: cell-major (all methods for delta'=0.05 first).
    CHECK(table.rows[0].delta_prime == 0.05);
    CHECK(table.rows[2].method == "drm");
    CHECK(table.rows[3].delta_prime == 0.2);
    // Identical methods in one cell consume identical data.
    CHECK(table.rows[0].l2err == table.rows[1].l2err);
    CHECK(table.rows[0].iter_num == table.rows[1].iter_num);

    const std::string csv = table.to_csv();
    CHECK(csv.substr(0, csv.find('\n')) == "method,delta_prime,l2err,iternum,reason");
}

TEST_CASE("empty method list yields an empty comparison") {
    ExperimentSpec spec;
    spec.base = small_params();
    spec.methods = {};
    const CompareTable table = compare_methods(spec);
    CHECK(table.rows.empty());
}

TEST_CASE("spec validation") {
    ExperimentSpec spec;
    spec.base = small_params();
    spec.values = {};
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec.axis = SweepAxis::Method;
    spec.methods = {};
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    CHECK_THROWS_AS(parse_axis("bogus"), ConfigError);
    CHECK(parse_axis("delta_prime") == SweepAxis::DeltaPrime);
    CHECK(axis_name(SweepAxis::Tau) == "tau");

    RunParams bad = small_params();
    bad.coarse_rings = 9; // not finer than fine_rings
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("derived seeds differ across rows and repeat across calls") {
    CHECK(derive_seed(1, 0) == derive_seed(1, 0));
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}
