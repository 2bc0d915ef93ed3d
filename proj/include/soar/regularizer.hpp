#ifndef SOAR_REGULARIZER_HPP
#define SOAR_REGULARIZER_HPP

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "soar/assembly.hpp"
#include "soar/data_gen.hpp"
#include "soar/linsolve.hpp"

namespace soar {

/// Damping coefficient of the second-order flow: fixed, or vanishing r/t.
struct DampingSchedule {
    enum class Kind { Constant, Dynamic };
    Kind kind = Kind::Constant;
    double eta = 1.0;  // Constant
    double r = 5.0;    // Dynamic
    double t0 = 1.0;   // Dynamic needs t >= t0 > 0

    static DampingSchedule constant(double eta);
    static DampingSchedule dynamic(double r, double t0 = 1.0);
    double at(double t) const;
};

enum class DiscrepancyKind { Morozov, TotalEnergy };

/// C0(Omega) = max(d, R) sqrt(2 pi) for balls/annuli of radius R.
double c0_constant(int d, double R);

/// ||v||_{0,Omega} = sqrt(v' E v) and ||q||_P = sqrt(q' M0 q).
double norm_omega(const SparseMat& E, const Eigen::VectorXd& v);
double norm_P(const SparseMat& M0, const Eigen::VectorXd& q);

/// chi(T) = ||u_im||_{0,Omega} - threshold, threshold = C0 tau delta
/// (or tau delta when C0 is absorbed into tau).
double discrepancy_morozov(const Eigen::VectorXd& u_im, const SparseMat& E, double threshold);

/// chi_TE(T) = ||u_im||^2_{0,Omega} + ||q||^2_P - threshold^2. Note the
/// missing 1/2 on the first term relative to the objective; the stopping
/// function is defined with the plain square.
double discrepancy_total_energy(const Eigen::VectorXd& u_im, const Eigen::VectorXd& q,
                                const SparseMat& E, const SparseMat& M0, double threshold_sq);

struct SoarConfig {
    double dt = 10.0;
    double tau = 0.01;
    bool absorb_c0 = true;  // threshold tau*delta instead of C0*tau*delta
    double eps0 = 1e-6;
    int n_max = 1000;
    DiscrepancyKind discrepancy = DiscrepancyKind::Morozov;
    DampingSchedule damping = DampingSchedule::constant(0.05);
    double t0 = 1.0;
    double c0 = 5.0132565492620005;  // c0_constant(2, 1)
    Eigen::VectorXd p0, q0;          // empty means zero vectors

    double threshold(double delta) const;
    void validate(int m0) const;
};

/// One gradient evaluation: w_im restricted to the region nodes (the force
/// term of the damped flow) plus the full u_im for the discrepancy.
struct GradientEval {
    Eigen::VectorXd w_im_omega0;
    Eigen::VectorXd u_im;
};
using GradientFn = std::function<GradientEval(const Eigen::VectorXd& p)>;

/// Gradient via one coupled solve plus one adjoint solve.
GradientFn make_gradient(const FemSystem& system, const BlockFactorization& fact);

struct IterState {
    int k = 0;
    double t = 1.0;
    Eigen::VectorXd p, q;
    Eigen::VectorXd w_im_omega0;  // cached for current p
    Eigen::VectorXd u_im;         // cached for current p
};

IterState soar_init(const FemSystem& system, const BlockFactorization& fact,
                    const SoarConfig& config);

/// One Stormer-Verlet step: half-kick with eta(t_k), drift, gradient solve at
/// the new point, half-kick with eta(t_{k+1}). Updates the cache so the next
/// step (and the discrepancy) reuse the solves at p_{k+1}.
void soar_step(IterState& state, const SoarConfig& config, const GradientFn& gradient);
void soar_step(IterState& state, const FemSystem& system, const BlockFactorization& fact,
               const SoarConfig& config);

enum class StopReason { DiscrepancyMet, MaxIterations };
std::string to_string(StopReason reason);

struct RunRecord {
    struct Row {
        int k;
        double t;
        double chi;
        double objective;  // V = 0.5 ||u_im||^2
        double q_norm_P;
        std::optional<double> l2_err;
    };
    std::vector<Row> rows;
    Eigen::VectorXd final_p;
    StopReason reason = StopReason::MaxIterations;

    int iterations() const { return rows.empty() ? 0 : rows.back().k; }
    void write_csv(std::ostream& out) const;
};

/// Main iteration: repeat soar_step until the selected discrepancy falls to
/// eps0 or n_max steps elapse. The discrepancy is checked before stepping,
/// so k = 0 can already terminate. `truth` adds the per-row relative error.
RunRecord run(const FemSystem& system, const BlockFactorization& fact,
              const BoundaryData& data, const SoarConfig& config,
              const TrueSource* truth = nullptr);

/// Time step / damping pair that makes the second-order flow reproduce the
/// nu-method. Throws std::domain_error when the eta_k denominator vanishes
/// (e.g. k = 1 at nu = 1/2).
struct NuStep {
    double dt;
    double eta;
};
NuStep nu_schedule(double nu, int k);

struct NuSchedule {
    double nu = 0.5;
    NuStep at(int k) const { return nu_schedule(nu, k); }
};

} // namespace soar

#endif
