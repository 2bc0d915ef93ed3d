#ifndef SOAR_EXPERIMENTS_HPP
#define SOAR_EXPERIMENTS_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "soar/baselines.hpp"
#include "soar/data_gen.hpp"
#include "soar/regularizer.hpp"

namespace soar {

/// Flat parameter set for one reconstruction run; the CLI config keys map
/// onto these fields one-to-one.
struct RunParams {
    std::string example = "example1";
    double radius = 1.0;
    int fine_rings = 64;
    int coarse_rings = 8;
    double delta_prime = 0.05;
    std::uint64_t seed = 1;
    std::string method = "soar1";  // soar1..soar4 | drm | nu | nesterov

    double dt = 10.0;
    double tau = 0.01;
    bool absorb_c0 = true;
    double eps0 = 1e-6;
    int n_max = 1000;
    double eta = 0.05;  // constant damping
    double r = 5.0;     // dynamic damping factor
    double t0 = 1.0;
    double p0 = 0.0;    // constant initial source value on the region
    double q0 = 0.0;

    double drm_eta = 1.0;
    double drm_dt = 10.0;
    double drm_eps_coeff = 0.1;
    double nu = 0.5;
    double nesterov_alpha = 3.0;
    double nesterov_omega = 10.0;
    std::string nesterov_grad_at = "extrapolated";  // or "iterate"

    void validate() const;
};

bool is_soar_method(const std::string& method);
SoarConfig to_soar_config(const RunParams& params, int m0);
BaselineConfig to_baseline_config(const RunParams& params, int m0);

/// Reconstruction environment reusable across noise realizations: fine-mesh
/// measurement, coarse system, one factorization, interpolated truth.
struct Problem {
    std::shared_ptr<const Mesh> fine_mesh, coarse_mesh;
    std::shared_ptr<const RegionMask> fine_region, coarse_region;
    FemSystem coarse_system;  // loads zero until data arrives
    std::shared_ptr<const BlockFactorization> fact;
    BoundaryData exact_measurement;  // on the fine mesh, delta = 0
    TrueSource truth;                // interpolated on the coarse mesh
};

Problem prepare_problem(const RunParams& params);

/// Noise + cross-mesh transfer + loads + run, with the given noise seed.
RunRecord run_single(const Problem& problem, const RunParams& params,
                     std::uint64_t noise_seed);

/// Deterministic sub-stream seed for row `index` of a sweep.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Relative L2 reconstruction error ||p_h - p_true||_M0 / ||p_true||_M0.
double l2_err(const Eigen::VectorXd& p_h, const Eigen::VectorXd& p_true, const SparseMat& M0);

enum class SweepAxis { DeltaPrime, Tau, Dt, Eta, R, Method };
SweepAxis parse_axis(const std::string& name);
std::string axis_name(SweepAxis axis);

struct ExperimentSpec {
    RunParams base;
    SweepAxis axis = SweepAxis::DeltaPrime;
    std::vector<double> values;        // numeric axes
    std::vector<std::string> methods;  // Method axis and compare grids
    std::vector<double> compare_delta_primes = {0.05, 0.10, 0.20};

    void validate() const;
};

struct SweepRow {
    std::string value_label;
    double l2err = 0.0;
    int iter_num = 0;
    std::string reason;  // DiscrepancyMet | MaxIterations | Error: ...
    bool ok = false;
};

struct SweepTable {
    std::vector<SweepRow> rows;
    std::string to_csv() const;  // header sweep_value,l2err,iternum,reason
};

/// One run per sweep value; per-row errors are recorded in the row and the
/// sweep continues. `jobs` bounds row parallelism (1 = sequential).
SweepTable run_sweep(const ExperimentSpec& spec, int jobs = 1);

struct CompareRow {
    std::string method;
    double delta_prime;
    double l2err = 0.0;
    int iter_num = 0;
    std::string reason;
    bool ok = false;
};

struct CompareTable {
    std::vector<CompareRow> rows;
    std::string to_csv() const;  // header method,delta_prime,l2err,iternum,reason
};

/// Runs every method on identical noisy data per delta' cell.
CompareTable compare_methods(const ExperimentSpec& spec, int jobs = 1);

} // namespace soar

#endif
