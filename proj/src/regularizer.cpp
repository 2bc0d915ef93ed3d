#include "soar/regularizer.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "soar/errors.hpp"

namespace soar {

DampingSchedule DampingSchedule::constant(double eta) {
    if (eta < 0.0) throw ConfigError("damping: constant eta must be >= 0");
    DampingSchedule s;
    s.kind = Kind::Constant;
    s.eta = eta;
    return s;
}

DampingSchedule DampingSchedule::dynamic(double r, double t0) {
    if (r <= 0.0) throw ConfigError("damping: dynamic r must be > 0");
    if (t0 <= 0.0) throw ConfigError("damping: dynamic t0 must be > 0");
    DampingSchedule s;
    s.kind = Kind::Dynamic;
    s.r = r;
    s.t0 = t0;
    return s;
}

double DampingSchedule::at(double t) const {
    if (kind == Kind::Constant) return eta;
    if (t < t0) {
        throw std::domain_error("damping: dynamic schedule evaluated at t < t0");
    }
    return r / t;
}

double c0_constant(int d, double R) {
    if ((d != 2 && d != 3) || R <= 0.0) {
        throw std::invalid_argument("c0_constant: d in {2,3} and R > 0 required");
    }
    return std::max(static_cast<double>(d), R) * std::sqrt(2.0 * std::numbers::pi);
}

double norm_omega(const SparseMat& E, const Eigen::VectorXd& v) {
    if (v.size() != E.rows()) throw DimensionMismatchError("norm_omega: length mismatch");
    return std::sqrt(std::max(0.0, v.dot(E * v)));
}

double norm_P(const SparseMat& M0, const Eigen::VectorXd& q) {
    if (q.size() != M0.rows()) throw DimensionMismatchError("norm_P: length mismatch");
    return std::sqrt(std::max(0.0, q.dot(M0 * q)));
}

double discrepancy_morozov(const Eigen::VectorXd& u_im, const SparseMat& E, double threshold) {
    return norm_omega(E, u_im) - threshold;
}

double discrepancy_total_energy(const Eigen::VectorXd& u_im, const Eigen::VectorXd& q,
                                const SparseMat& E, const SparseMat& M0, double threshold_sq) {
    const double un = norm_omega(E, u_im);
    const double qn = norm_P(M0, q);
    return un * un + qn * qn - threshold_sq;
}

double SoarConfig::threshold(double delta) const {
    return (absorb_c0 ? tau : c0 * tau) * delta;
}

void SoarConfig::validate(int m0) const {
    if (dt <= 0.0) throw ConfigError("soar.dt must be > 0");
    if (tau <= 0.0) throw ConfigError("soar.tau must be > 0");
    if (eps0 < 0.0) throw ConfigError("soar.eps0 must be >= 0");
    if (n_max < 0) throw ConfigError("soar.nmax must be >= 0");
    if (c0 <= 0.0) throw ConfigError("soar.c0 must be > 0");
    if (t0 <= 0.0) throw ConfigError("soar.t0 must be > 0");
    if (damping.kind == DampingSchedule::Kind::Dynamic && t0 < damping.t0) {
        throw ConfigError("soar.t0 must be >= damping t0 for dynamic damping");
    }
    if (p0.size() != 0 && p0.size() != m0) throw ConfigError("soar.p0 length != m0");
    if (q0.size() != 0 && q0.size() != m0) throw ConfigError("soar.q0 length != m0");
}

GradientFn make_gradient(const FemSystem& system, const BlockFactorization& fact) {
    return [&system, &fact](const Eigen::VectorXd& p) {
        const ComplexFieldSplit u = solve_ccbm(fact, system, p);
        const ComplexFieldSplit w = solve_adjoint(fact, system, u.im);
        GradientEval eval;
        eval.u_im = u.im;
        eval.w_im_omega0.resize(system.m0());
        const auto& nodes = system.region->omega0_nodes;
        for (int l = 0; l < system.m0(); ++l) {
            eval.w_im_omega0[l] = w.im[nodes[l]];
        }
        return eval;
    };
}

IterState soar_init(const FemSystem& system, const BlockFactorization& fact,
                    const SoarConfig& config) {
    config.validate(system.m0());
    IterState st;
    st.k = 0;
    st.t = config.t0;
    st.p = config.p0.size() ? config.p0 : Eigen::VectorXd::Zero(system.m0());
    st.q = config.q0.size() ? config.q0 : Eigen::VectorXd::Zero(system.m0());
    const GradientEval eval = make_gradient(system, fact)(st.p);
    st.w_im_omega0 = eval.w_im_omega0;
    st.u_im = eval.u_im;
    return st;
}

namespace {

void check_finite(const IterState& st) {
    if (!st.p.allFinite() || !st.q.allFinite()) {
        throw NonFiniteIterateError("iterate became non-finite at k = " + std::to_string(st.k) +
                                    " (time step too large?)");
    }
}

} // namespace

void soar_step(IterState& state, const SoarConfig& config, const GradientFn& gradient) {
    const double dt = config.dt;
    const double eta_k = config.damping.at(state.t);
    const Eigen::VectorXd q_half =
        state.q - 0.5 * dt * (eta_k * state.q + state.w_im_omega0);
    state.p += dt * q_half;
    GradientEval eval = gradient(state.p);
    const double eta_next = config.damping.at(state.t + dt);
    state.q = q_half - 0.5 * dt * (eta_next * q_half + eval.w_im_omega0);
    state.w_im_omega0 = std::move(eval.w_im_omega0);
    state.u_im = std::move(eval.u_im);
    state.t += dt;
    state.k += 1;
    check_finite(state);
}

void soar_step(IterState& state, const FemSystem& system, const BlockFactorization& fact,
               const SoarConfig& config) {
    soar_step(state, config, make_gradient(system, fact));
}

std::string to_string(StopReason reason) {
    return reason == StopReason::DiscrepancyMet ? "DiscrepancyMet" : "MaxIterations";
}

void RunRecord::write_csv(std::ostream& out) const {
    out << "k,t,chi,V,qnormP,l2err\n";
    char buf[160];
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g", row.k, row.t, row.chi,
                      row.objective, row.q_norm_P);
        out << buf;
        if (row.l2_err) {
            std::snprintf(buf, sizeof(buf), ",%.17g", *row.l2_err);
            out << buf;
        } else {
            out << ",";
        }
        out << "\n";
    }
}

RunRecord run(const FemSystem& system, const BlockFactorization& fact,
              const BoundaryData& data, const SoarConfig& config, const TrueSource* truth) {
    const GradientFn gradient = make_gradient(system, fact);
    IterState st = soar_init(system, fact, config);
    const double thr = config.threshold(data.delta);

    RunRecord rec;
    const double truth_norm = truth ? norm_P(system.M0(), truth->coeffs) : 0.0;
    if (truth && truth_norm == 0.0) {
        throw ZeroReferenceError("run: true source has zero norm");
    }
    while (true) {
        const double u_norm = norm_omega(system.E(), st.u_im);
        const double q_norm = norm_P(system.M0(), st.q);
        const double chi = config.discrepancy == DiscrepancyKind::Morozov
                               ? u_norm - thr
                               : u_norm * u_norm + q_norm * q_norm - thr * thr;
        RunRecord::Row row{st.k, st.t, chi, 0.5 * u_norm * u_norm, q_norm, std::nullopt};
        if (truth) {
            row.l2_err = norm_P(system.M0(), st.p - truth->coeffs) / truth_norm;
        }
        rec.rows.push_back(row);
        if (chi <= config.eps0) {
            rec.reason = StopReason::DiscrepancyMet;
            break;
        }
        if (st.k >= config.n_max) {
            rec.reason = StopReason::MaxIterations;
            break;
        }
        soar_step(st, config, gradient);
    }
    rec.final_p = st.p;
    return rec;
}

NuStep nu_schedule(double nu, int k) {
    if (k < 1 || nu <= 0.0) {
        throw std::invalid_argument("nu_schedule: k >= 1 and nu > 0 required");
    }
    const double kd = k;
    const double dt_den = (kd + 2 * nu - 1) * (2 * kd + 4 * nu - 1);
    const double eta_den = 4 * (2 * kd + 2 * nu - 3) * (2 * kd + 2 * nu - 1) * (kd + nu - 1);
    if (dt_den == 0.0 || eta_den == 0.0) {
        throw std::domain_error("nu_schedule: denominator vanishes at k = " + std::to_string(k));
    }
    NuStep step;
    step.dt = 4 * (2 * kd + 2 * nu - 1) * (kd + nu - 1) / dt_den;
    step.eta = ((kd + 2 * nu - 1) * (2 * kd + 4 * nu - 1) * (2 * kd + 2 * nu - 3) -
                (kd - 1) * (2 * kd - 3) * (3 * kd + 3 * nu - 1)) /
               eta_den;
    return step;
}

} // namespace soar
