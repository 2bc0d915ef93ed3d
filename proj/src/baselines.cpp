#include "soar/baselines.hpp"

#include <cmath>

#include "soar/errors.hpp"

namespace soar {

double BaselineConfig::threshold(double delta) const {
    return (absorb_c0 ? tau : c0 * tau) * delta;
}

void BaselineConfig::validate(int m0) const {
    if (tau <= 0.0) throw ConfigError("baseline tau must be > 0");
    if (eps0 < 0.0) throw ConfigError("baseline eps0 must be >= 0");
    if (n_max < 0) throw ConfigError("baseline nmax must be >= 0");
    if (c0 <= 0.0) throw ConfigError("baseline c0 must be > 0");
    switch (method) {
        case BaselineMethod::Drm:
            if (drm_dt <= 0.0) throw ConfigError("drm.dt must be > 0");
            if (drm_eta < 0.0) throw ConfigError("drm.eta must be >= 0");
            if (drm_eps_coeff < 0.0) throw ConfigError("drm.eps_coeff must be >= 0");
            if (t0 < 1.0) throw ConfigError("drm requires t0 >= 1 (eps(t) needs t > 1)");
            break;
        case BaselineMethod::Nu:
            if (nu <= 0.0) throw ConfigError("nu.nu must be > 0");
            break;
        case BaselineMethod::Nesterov:
            if (nesterov_alpha < 3.0) throw ConfigError("nesterov.alpha must be >= 3");
            if (nesterov_omega <= 0.0) throw ConfigError("nesterov.omega must be > 0");
            break;
    }
    if (p0.size() != 0 && p0.size() != m0) throw ConfigError("baseline p0 length != m0");
    if (q0.size() != 0 && q0.size() != m0) throw ConfigError("baseline q0 length != m0");
}

double drm_epsilon(double coeff, double t) {
    if (t <= 1.0) throw std::domain_error("drm_epsilon: requires t > 1");
    return coeff / (t * std::log(t));
}

void drm_step(Eigen::VectorXd& p, Eigen::VectorXd& q, const Eigen::VectorXd& w_im_omega0,
              double eps_t, double eta, double dt) {
    q = (q - dt * (w_im_omega0 + eps_t * p)) / (1.0 + eta * dt);
    p += dt * q;
}

NuCoeffs nu_coeffs(double nu, int k) {
    if (k < 1 || nu <= 0.0) {
        throw std::invalid_argument("nu_coeffs: k >= 1 and nu > 0 required");
    }
    if (k == 1) {
        return {0.0, (4.0 * nu + 2.0) / (4.0 * nu + 1.0)};
    }
    const double kd = k;
    NuCoeffs c;
    c.mu = (kd - 1) * (2 * kd - 3) * (2 * kd + 2 * nu - 1) /
           ((kd + 2 * nu - 1) * (2 * kd + 4 * nu - 1) * (2 * kd + 2 * nu - 3));
    c.omega = 4 * (2 * kd + 2 * nu - 1) * (kd + nu - 1) /
              ((kd + 2 * nu - 1) * (2 * kd + 4 * nu - 1));
    return c;
}

Eigen::VectorXd nu_step(int k, const Eigen::VectorXd& p_k, const Eigen::VectorXd& p_prev,
                        const Eigen::VectorXd& w_im_omega0, double nu) {
    const NuCoeffs c = nu_coeffs(nu, k);
    return p_k + c.mu * (p_k - p_prev) - c.omega * w_im_omega0;
}

double nesterov_momentum(int k, double alpha) {
    if (k < 1) throw std::invalid_argument("nesterov_momentum: k >= 1 required");
    return (k - 1.0) / (k + alpha - 1.0);
}

Eigen::VectorXd nesterov_extrapolate(int k, const Eigen::VectorXd& p_k,
                                     const Eigen::VectorXd& p_prev, double alpha) {
    return p_k + nesterov_momentum(k, alpha) * (p_k - p_prev);
}

Eigen::VectorXd nesterov_step(const Eigen::VectorXd& z_k, const Eigen::VectorXd& w_im_at_z,
                              double omega) {
    return z_k - omega * w_im_at_z;
}

RunRecord run_baseline(const FemSystem& system, const BlockFactorization& fact,
                       const BoundaryData& data, const BaselineConfig& config,
                       const TrueSource* truth) {
    config.validate(system.m0());
    const GradientFn gradient = make_gradient(system, fact);
    const double thr = config.threshold(data.delta);

    Eigen::VectorXd p = config.p0.size() ? config.p0 : Eigen::VectorXd::Zero(system.m0());
    Eigen::VectorXd p_prev = p;  // two-step methods start from p^1 = p^0
    Eigen::VectorXd q = config.q0.size() ? config.q0 : Eigen::VectorXd::Zero(system.m0());

    const double truth_norm = truth ? norm_P(system.M0(), truth->coeffs) : 0.0;
    if (truth && truth_norm == 0.0) {
        throw ZeroReferenceError("run_baseline: true source has zero norm");
    }

    RunRecord rec;
    GradientEval eval = gradient(p);
    int n = 0;
    while (true) {
        const double u_norm = norm_omega(system.E(), eval.u_im);
        const double q_norm = config.method == BaselineMethod::Drm ? norm_P(system.M0(), q) : 0.0;
        const double chi = u_norm - thr;
        RunRecord::Row row{n, config.t0 + n * (config.method == BaselineMethod::Drm ? config.drm_dt : 1.0),
                           chi, 0.5 * u_norm * u_norm, q_norm, std::nullopt};
        if (truth) {
            row.l2_err = norm_P(system.M0(), p - truth->coeffs) / truth_norm;
        }
        rec.rows.push_back(row);
        if (chi <= config.eps0) {
            rec.reason = StopReason::DiscrepancyMet;
            break;
        }
        if (n >= config.n_max) {
            rec.reason = StopReason::MaxIterations;
            break;
        }

        switch (config.method) {
            case BaselineMethod::Drm: {
                const double t_next = config.t0 + (n + 1) * config.drm_dt;
                const double eps = drm_epsilon(config.drm_eps_coeff, t_next);
                drm_step(p, q, eval.w_im_omega0, eps, config.drm_eta, config.drm_dt);
                break;
            }
            case BaselineMethod::Nu: {
                Eigen::VectorXd next = nu_step(n + 1, p, p_prev, eval.w_im_omega0, config.nu);
                p_prev = std::move(p);
                p = std::move(next);
                break;
            }
            case BaselineMethod::Nesterov: {
                const Eigen::VectorXd z =
                    nesterov_extrapolate(n + 1, p, p_prev, config.nesterov_alpha);
                const Eigen::VectorXd& w = config.grad_at == NesterovGradAt::Extrapolated
                                               ? gradient(z).w_im_omega0
                                               : eval.w_im_omega0;
                Eigen::VectorXd next = nesterov_step(z, w, config.nesterov_omega);
                p_prev = std::move(p);
                p = std::move(next);
                break;
            }
        }
        if (!p.allFinite() || !q.allFinite()) {
            throw NonFiniteIterateError("baseline iterate became non-finite at k = " +
                                        std::to_string(n + 1));
        }
        eval = gradient(p);
        ++n;
    }
    rec.final_p = p;
    return rec;
}

} // namespace soar
