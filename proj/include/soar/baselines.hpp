#ifndef SOAR_BASELINES_HPP
#define SOAR_BASELINES_HPP

#include <Eigen/Core>

#include "soar/regularizer.hpp"

namespace soar {

enum class BaselineMethod { Drm, Nu, Nesterov };

/// Where the Nesterov gradient is taken: at the extrapolated point z_k
/// (default) or at the current iterate p_k.
enum class NesterovGradAt { Extrapolated, Iterate };

struct BaselineConfig {
    BaselineMethod method = BaselineMethod::Drm;

    double drm_eta = 1.0;
    double drm_dt = 10.0;
    double drm_eps_coeff = 0.1;  // eps(t) = coeff / (t ln t)

    double nu = 0.5;

    double nesterov_alpha = 3.0;
    double nesterov_omega = 10.0;
    NesterovGradAt grad_at = NesterovGradAt::Extrapolated;

    double tau = 0.01;
    bool absorb_c0 = true;
    double eps0 = 1e-6;
    int n_max = 1000;
    double t0 = 1.0;
    double c0 = 5.0132565492620005;
    Eigen::VectorXd p0, q0;  // q0 only used by DRM

    double threshold(double delta) const;
    void validate(int m0) const;
};

/// DRM update: q <- (q - dt (w_im + eps p)) / (1 + eta dt), p <- p + dt q.
void drm_step(Eigen::VectorXd& p, Eigen::VectorXd& q, const Eigen::VectorXd& w_im_omega0,
              double eps_t, double eta, double dt);

/// Vanishing Tikhonov weight eps(t) = coeff / (t ln t); requires t > 1.
double drm_epsilon(double coeff, double t);

/// Momentum/step coefficients of the nu-method (mu_1 = 0,
/// omega_1 = (4 nu + 2)/(4 nu + 1); closed forms for k >= 2).
struct NuCoeffs {
    double mu;
    double omega;
};
NuCoeffs nu_coeffs(double nu, int k);

/// p^{k+1} = p^k + mu_k (p^k - p^{k-1}) - omega_k w_im^k.
Eigen::VectorXd nu_step(int k, const Eigen::VectorXd& p_k, const Eigen::VectorXd& p_prev,
                        const Eigen::VectorXd& w_im_omega0, double nu);

double nesterov_momentum(int k, double alpha);

/// z_k = p^k + (k-1)/(k+alpha-1) (p^k - p^{k-1}).
Eigen::VectorXd nesterov_extrapolate(int k, const Eigen::VectorXd& p_k,
                                     const Eigen::VectorXd& p_prev, double alpha);

/// p^{k+1} = z_k - omega w_im(z_k).
Eigen::VectorXd nesterov_step(const Eigen::VectorXd& z_k, const Eigen::VectorXd& w_im_at_z,
                              double omega);

/// Shared driver: Morozov stopping (identical code path to SOAR), the
/// method-specific update in the loop body. Two-step methods start from
/// p^1 = p^0 and index their first update at k = 1.
RunRecord run_baseline(const FemSystem& system, const BlockFactorization& fact,
                       const BoundaryData& data, const BaselineConfig& config,
                       const TrueSource* truth = nullptr);

} // namespace soar

#endif
