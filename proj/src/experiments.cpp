#include "soar/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <future>
#include <sstream>

#include "soar/errors.hpp"

namespace soar {

namespace {

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string sanitize(std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

} // namespace

void RunParams::validate() const {
    if (radius <= 0.0) throw ConfigError("mesh.radius must be > 0");
    if (fine_rings < 1) throw ConfigError("mesh.fine_rings must be >= 1");
    if (coarse_rings < 1) throw ConfigError("mesh.coarse_rings must be >= 1");
    if (fine_rings <= coarse_rings) throw ConfigError("mesh.fine_rings must exceed mesh.coarse_rings");
    if (delta_prime < 0.0) throw ConfigError("noise.delta_prime must be >= 0");
    if (!is_soar_method(method) && method != "drm" && method != "nu" && method != "nesterov") {
        throw ConfigError("unknown method '" + method + "'");
    }
    if (nesterov_grad_at != "extrapolated" && nesterov_grad_at != "iterate") {
        throw ConfigError("nesterov.grad_at must be 'extrapolated' or 'iterate'");
    }
    parse_example(example);
    // Field-level numeric checks live in the per-method configs.
    if (is_soar_method(method)) {
        to_soar_config(*this, 0).validate(0);
    } else {
        to_baseline_config(*this, 0).validate(0);
    }
}

bool is_soar_method(const std::string& method) {
    return method == "soar1" || method == "soar2" || method == "soar3" || method == "soar4";
}

SoarConfig to_soar_config(const RunParams& params, int m0) {
    SoarConfig cfg;
    cfg.dt = params.dt;
    cfg.tau = params.tau;
    cfg.absorb_c0 = params.absorb_c0;
    cfg.eps0 = params.eps0;
    cfg.n_max = params.n_max;
    cfg.t0 = params.t0;
    cfg.c0 = c0_constant(2, params.radius);
    const bool dynamic = params.method == "soar3" || params.method == "soar4";
    cfg.damping = dynamic ? DampingSchedule::dynamic(params.r, params.t0)
                          : DampingSchedule::constant(params.eta);
    const bool total_energy = params.method == "soar2" || params.method == "soar4";
    cfg.discrepancy = total_energy ? DiscrepancyKind::TotalEnergy : DiscrepancyKind::Morozov;
    if (m0 > 0) {
        cfg.p0 = Eigen::VectorXd::Constant(m0, params.p0);
        cfg.q0 = Eigen::VectorXd::Constant(m0, params.q0);
    }
    return cfg;
}

BaselineConfig to_baseline_config(const RunParams& params, int m0) {
    BaselineConfig cfg;
    if (params.method == "drm") cfg.method = BaselineMethod::Drm;
    else if (params.method == "nu") cfg.method = BaselineMethod::Nu;
    else if (params.method == "nesterov") cfg.method = BaselineMethod::Nesterov;
    else throw ConfigError("to_baseline_config: '" + params.method + "' is not a baseline");
    cfg.drm_eta = params.drm_eta;
    cfg.drm_dt = params.drm_dt;
    cfg.drm_eps_coeff = params.drm_eps_coeff;
    cfg.nu = params.nu;
    cfg.nesterov_alpha = params.nesterov_alpha;
    cfg.nesterov_omega = params.nesterov_omega;
    cfg.grad_at = params.nesterov_grad_at == "iterate" ? NesterovGradAt::Iterate
                                                       : NesterovGradAt::Extrapolated;
    cfg.tau = params.tau;
    cfg.absorb_c0 = params.absorb_c0;
    cfg.eps0 = params.eps0;
    cfg.n_max = params.n_max;
    cfg.t0 = params.t0;
    cfg.c0 = c0_constant(2, params.radius);
    if (m0 > 0) {
        cfg.p0 = Eigen::VectorXd::Constant(m0, params.p0);
        cfg.q0 = Eigen::VectorXd::Constant(m0, params.q0);
    }
    return cfg;
}

Problem prepare_problem(const RunParams& params) {
    params.validate();
    const ExampleId example = parse_example(params.example);
    Problem prob;
    prob.fine_mesh = std::make_shared<Mesh>(generate_disk_mesh(params.radius, params.fine_rings));
    prob.coarse_mesh =
        std::make_shared<Mesh>(generate_disk_mesh(params.radius, params.coarse_rings));
    prob.fine_region =
        std::make_shared<RegionMask>(mark_region(*prob.fine_mesh, example_region(example)));
    prob.coarse_region =
        std::make_shared<RegionMask>(mark_region(*prob.coarse_mesh, example_region(example)));
    prob.coarse_system = assemble_system(prob.coarse_mesh, prob.coarse_region);
    prob.fact = std::make_shared<BlockFactorization>(prob.coarse_system);
    prob.exact_measurement = make_measurement(*prob.fine_mesh, *prob.fine_region, example);
    prob.truth = sample_true_source(example, *prob.coarse_mesh, *prob.coarse_region);
    return prob;
}

RunRecord run_single(const Problem& problem, const RunParams& params, std::uint64_t noise_seed) {
    const BoundaryData noisy = add_noise(problem.exact_measurement, params.delta_prime, noise_seed);
    const BoundaryData coarse =
        transfer_boundary(*problem.fine_mesh, *problem.coarse_mesh, noisy);
    const FemSystem system =
        problem.coarse_system.with_boundary_data(coarse.nodes, coarse.g1, coarse.g2);
    if (is_soar_method(params.method)) {
        return run(system, *problem.fact, coarse, to_soar_config(params, system.m0()),
                   &problem.truth);
    }
    return run_baseline(system, *problem.fact, coarse, to_baseline_config(params, system.m0()),
                        &problem.truth);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    // splitmix64 of the master state advanced by the row index
    std::uint64_t x = master + 0x9E3779B97F4A7C15ull * (index + 1);
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

double l2_err(const Eigen::VectorXd& p_h, const Eigen::VectorXd& p_true, const SparseMat& M0) {
    const double ref = norm_P(M0, p_true);
    if (ref == 0.0) throw ZeroReferenceError("l2_err: reference source has zero norm");
    return norm_P(M0, p_h - p_true) / ref;
}

SweepAxis parse_axis(const std::string& name) {
    if (name == "delta_prime") return SweepAxis::DeltaPrime;
    if (name == "tau") return SweepAxis::Tau;
    if (name == "dt") return SweepAxis::Dt;
    if (name == "eta") return SweepAxis::Eta;
    if (name == "r") return SweepAxis::R;
    if (name == "method") return SweepAxis::Method;
    throw ConfigError("unknown sweep axis '" + name + "'");
}

std::string axis_name(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::DeltaPrime: return "delta_prime";
        case SweepAxis::Tau: return "tau";
        case SweepAxis::Dt: return "dt";
        case SweepAxis::Eta: return "eta";
        case SweepAxis::R: return "r";
        case SweepAxis::Method: return "method";
    }
    return "?";
}

void ExperimentSpec::validate() const {
    base.validate();
    if (axis == SweepAxis::Method) {
        if (methods.empty()) throw ConfigError("sweep over methods needs a method list");
    } else if (values.empty()) {
        throw ConfigError("sweep needs a nonempty value list");
    }
}

namespace {

RunParams apply_axis(RunParams params, SweepAxis axis, double value, const std::string& label) {
    switch (axis) {
        case SweepAxis::DeltaPrime: params.delta_prime = value; break;
        case SweepAxis::Tau: params.tau = value; break;
        case SweepAxis::Dt:
            params.dt = value;
            params.drm_dt = value;
            break;
        case SweepAxis::Eta:
            params.eta = value;
            params.drm_eta = value;
            break;
        case SweepAxis::R: params.r = value; break;
        case SweepAxis::Method: params.method = label; break;
    }
    return params;
}

template <typename Row, typename Fn>
void for_each_row(std::vector<Row>& rows, int jobs, Fn&& fn) {
    if (jobs <= 1) {
        for (std::size_t i = 0; i < rows.size(); ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::future<void>> workers;
    const int n_workers = std::min<int>(jobs, static_cast<int>(rows.size()));
    workers.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) {
        workers.push_back(std::async(std::launch::async, [&]() {
            for (std::size_t i = next.fetch_add(1); i < rows.size(); i = next.fetch_add(1)) {
                fn(i);
            }
        }));
    }
    for (auto& f : workers) f.get();
}

} // namespace

SweepTable run_sweep(const ExperimentSpec& spec, int jobs) {
    spec.validate();
    const Problem problem = prepare_problem(spec.base);
    const std::size_t n =
        spec.axis == SweepAxis::Method ? spec.methods.size() : spec.values.size();

    SweepTable table;
    table.rows.resize(n);
    for_each_row(table.rows, jobs, [&](std::size_t i) {
        SweepRow& row = table.rows[i];
        const std::string label =
            spec.axis == SweepAxis::Method ? spec.methods[i] : g17(spec.values[i]);
        row.value_label = label;
        // Rows of a method sweep share one noise realization; other axes get
        // a fresh stream per row.
        const std::uint64_t row_seed =
            derive_seed(spec.base.seed, spec.axis == SweepAxis::Method ? 0 : i);
        try {
            const RunParams params = apply_axis(
                spec.base, spec.axis, spec.axis == SweepAxis::Method ? 0.0 : spec.values[i],
                label);
            const RunRecord rec = run_single(problem, params, row_seed);
            row.l2err = l2_err(rec.final_p, problem.truth.coeffs, problem.coarse_system.M0());
            row.iter_num = rec.iterations();
            row.reason = to_string(rec.reason);
            row.ok = true;
        } catch (const std::exception& e) {
            row.reason = "Error: " + sanitize(e.what());
            row.ok = false;
        }
    });
    return table;
}

std::string SweepTable::to_csv() const {
    std::ostringstream out;
    out << "sweep_value,l2err,iternum,reason\n";
    for (const auto& row : rows) {
        out << row.value_label << ",";
        if (row.ok) {
            out << g17(row.l2err) << "," << row.iter_num;
        } else {
            out << ",";
        }
        out << "," << row.reason << "\n";
    }
    return out.str();
}

CompareTable compare_methods(const ExperimentSpec& spec, int jobs) {
    spec.base.validate();
    CompareTable table;
    if (spec.methods.empty() || spec.compare_delta_primes.empty()) return table;
    const Problem problem = prepare_problem(spec.base);

    table.rows.resize(spec.methods.size() * spec.compare_delta_primes.size());
    for (std::size_t cell = 0; cell < spec.compare_delta_primes.size(); ++cell) {
        for (std::size_t mi = 0; mi < spec.methods.size(); ++mi) {
            auto& row = table.rows[cell * spec.methods.size() + mi];
            row.method = spec.methods[mi];
            row.delta_prime = spec.compare_delta_primes[cell];
        }
    }
    for_each_row(table.rows, jobs, [&](std::size_t i) {
        CompareRow& row = table.rows[i];
        const std::size_t cell = i / spec.methods.size();
        const std::uint64_t cell_seed = derive_seed(spec.base.seed, cell);
        try {
            RunParams params = spec.base;
            params.method = row.method;
            params.delta_prime = row.delta_prime;
            const RunRecord rec = run_single(problem, params, cell_seed);
            row.l2err = l2_err(rec.final_p, problem.truth.coeffs, problem.coarse_system.M0());
            row.iter_num = rec.iterations();
            row.reason = to_string(rec.reason);
            row.ok = true;
        } catch (const std::exception& e) {
            row.reason = "Error: " + sanitize(e.what());
            row.ok = false;
        }
    });
    return table;
}

std::string CompareTable::to_csv() const {
    std::ostringstream out;
    out << "method,delta_prime,l2err,iternum,reason\n";
    for (const auto& row : rows) {
        out << row.method << "," << g17(row.delta_prime) << ",";
        if (row.ok) {
            out << g17(row.l2err) << "," << row.iter_num;
        } else {
            out << ",";
        }
        out << "," << row.reason << "\n";
    }
    return out.str();
}

} // namespace soar
