#include "soar/data_gen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "soar/errors.hpp"
#include "soar/linsolve.hpp"

namespace soar {

ExampleId parse_example(const std::string& name) {
    if (name == "example1") return ExampleId::Example1;
    if (name == "example2") return ExampleId::Example2;
    throw ConfigError("unknown example '" + name + "' (expected example1 or example2)");
}

std::string example_name(ExampleId id) {
    return id == ExampleId::Example1 ? "example1" : "example2";
}

std::function<bool(const Eigen::Vector2d&)> example_region(ExampleId id) {
    if (id == ExampleId::Example1) {
        return [](const Eigen::Vector2d& x) {
            return -0.5 < x.x() && x.x() < 0.5 && -0.5 < x.y() && x.y() < 0.5;
        };
    }
    return [](const Eigen::Vector2d& x) {
        const double dl = (x - Eigen::Vector2d(-0.5, 0.0)).squaredNorm();
        const double dr = (x - Eigen::Vector2d(0.5, 0.0)).squaredNorm();
        return dl < 0.01 || dr < 0.01;
    };
}

std::function<double(const Eigen::Vector2d&)> example_source(ExampleId id) {
    if (id == ExampleId::Example1) {
        auto inside = example_region(ExampleId::Example1);
        return [inside](const Eigen::Vector2d& x) {
            return inside(x) ? 1.0 + x.x() + x.y() : 0.0;
        };
    }
    return [](const Eigen::Vector2d& x) {
        if ((x - Eigen::Vector2d(-0.5, 0.0)).squaredNorm() < 0.01) {
            return 1.0 + x.x() + x.y();
        }
        if ((x - Eigen::Vector2d(0.5, 0.0)).squaredNorm() < 0.01) {
            return std::exp(1.0 + x.x() + x.y());
        }
        return 0.0;
    };
}

TrueSource sample_true_source(const std::function<double(const Eigen::Vector2d&)>& expr,
                              const Mesh& mesh, const RegionMask& region,
                              const std::string& name) {
    if (region.omega0_nodes.empty()) {
        throw EmptyRegionError("sample_true_source: empty region");
    }
    TrueSource src;
    src.name = name;
    src.expr = expr;
    src.coeffs.resize(region.size());
    for (int l = 0; l < region.size(); ++l) {
        src.coeffs[l] = expr(mesh.nodes[region.omega0_nodes[l]]);
    }
    return src;
}

TrueSource sample_true_source(ExampleId id, const Mesh& mesh, const RegionMask& region) {
    return sample_true_source(example_source(id), mesh, region, example_name(id));
}

BoundaryData make_measurement(const Mesh& fine, const RegionMask& region_fine,
                              const Eigen::VectorXd& p_true) {
    auto mesh_ptr = std::shared_ptr<const Mesh>(&fine, [](const Mesh*) {});
    auto region_ptr = std::shared_ptr<const RegionMask>(&region_fine, [](const RegionMask*) {});
    const FemSystem system = assemble_system(mesh_ptr, region_ptr);
    const Eigen::VectorXd u = solve_neumann(system, p_true);

    const BoundaryParam param = boundary_param(fine);
    BoundaryData data;
    data.nodes = param.nodes;
    data.g1.resize(param.nodes.size());
    for (std::size_t i = 0; i < param.nodes.size(); ++i) {
        data.g1[static_cast<Eigen::Index>(i)] = u[param.nodes[i]];
    }
    data.g2 = Eigen::VectorXd::Zero(data.g1.size());
    return data;
}

BoundaryData make_measurement(const Mesh& fine, const RegionMask& region_fine, ExampleId id) {
    return make_measurement(fine, region_fine, sample_true_source(id, fine, region_fine).coeffs);
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

} // namespace

double uniform01(std::uint64_t seed, std::uint64_t index) {
    const std::uint64_t z = splitmix64(splitmix64(seed) + index * 0x9E3779B97F4A7C15ull);
    return static_cast<double>(z >> 11) * 0x1.0p-53;
}

BoundaryData add_noise(const BoundaryData& data, double delta_prime,
                       const std::function<double(int)>& rand01) {
    if (delta_prime < 0.0) {
        throw std::invalid_argument("add_noise: delta_prime must be nonnegative");
    }
    BoundaryData out = data;
    out.delta_prime = delta_prime;
    double delta = 0.0;
    for (Eigen::Index i = 0; i < out.g1.size(); ++i) {
        const double factor = 1.0 + delta_prime * (2.0 * rand01(data.nodes[i]) - 1.0);
        out.g1[i] = factor * data.g1[i];
        out.g2[i] = factor * data.g2[i];
        delta = std::max(delta, std::abs(out.g1[i] - data.g1[i]));
        delta = std::max(delta, std::abs(out.g2[i] - data.g2[i]));
    }
    out.delta = delta;
    return out;
}

BoundaryData add_noise(const BoundaryData& data, double delta_prime, std::uint64_t seed) {
    BoundaryData out = add_noise(data, delta_prime, [seed](int node) {
        return uniform01(seed, static_cast<std::uint64_t>(node));
    });
    out.seed = seed;
    return out;
}

BoundaryData transfer_boundary(const Mesh& src_mesh, const Mesh& dst_mesh,
                               const BoundaryData& data) {
    const BoundaryParam src = boundary_param(src_mesh);
    const BoundaryParam dst = boundary_param(dst_mesh);
    if (data.nodes.size() != src.nodes.size()) {
        throw InvalidBoundaryError("transfer_boundary: data does not cover the source boundary");
    }
    // Source values keyed by cycle position; data may list nodes in any order.
    std::vector<int> pos_of_node(src_mesh.node_count(), -1);
    for (std::size_t i = 0; i < src.nodes.size(); ++i) {
        pos_of_node[src.nodes[i]] = static_cast<int>(i);
    }
    const std::size_t n_src = src.nodes.size();
    Eigen::VectorXd g1(n_src), g2(n_src);
    for (std::size_t i = 0; i < data.nodes.size(); ++i) {
        const int pos = data.nodes[i] >= 0 && data.nodes[i] < src_mesh.node_count()
                            ? pos_of_node[data.nodes[i]]
                            : -1;
        if (pos < 0) {
            throw InvalidBoundaryError("transfer_boundary: data node " +
                                       std::to_string(data.nodes[i]) + " is not a boundary node");
        }
        g1[pos] = data.g1[static_cast<Eigen::Index>(i)];
        g2[pos] = data.g2[static_cast<Eigen::Index>(i)];
    }

    BoundaryData out;
    out.nodes = dst.nodes;
    out.g1.resize(dst.nodes.size());
    out.g2.resize(dst.nodes.size());
    out.delta = data.delta;
    out.delta_prime = data.delta_prime;
    out.seed = data.seed;
    for (std::size_t i = 0; i < dst.nodes.size(); ++i) {
        const double sigma = dst.s[i] / dst.length; // normalized arc length in [0,1)
        // Locate the source segment [sigma_j, sigma_{j+1}) containing sigma.
        const double target = sigma * src.length;
        auto it = std::upper_bound(src.s.begin(), src.s.end(), target);
        const std::size_t j = (it == src.s.begin()) ? 0 : static_cast<std::size_t>(it - src.s.begin()) - 1;
        const std::size_t jn = (j + 1) % n_src;
        const double s0 = src.s[j];
        const double s1 = (jn == 0) ? src.length : src.s[jn];
        const double w = (s1 > s0) ? (target - s0) / (s1 - s0) : 0.0;
        out.g1[static_cast<Eigen::Index>(i)] = (1.0 - w) * g1[j] + w * g1[jn];
        out.g2[static_cast<Eigen::Index>(i)] = (1.0 - w) * g2[j] + w * g2[jn];
    }
    return out;
}

void save_boundary_data(const BoundaryData& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_boundary_data: cannot open " + path);
    char buf[96];
    out << "BDATA v1\n";
    std::snprintf(buf, sizeof(buf), "DELTA %.17g", data.delta);
    out << buf << "\n";
    out << "N " << data.nodes.size() << "\n";
    for (std::size_t i = 0; i < data.nodes.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%d %.17g %.17g", data.nodes[i],
                      data.g1[static_cast<Eigen::Index>(i)], data.g2[static_cast<Eigen::Index>(i)]);
        out << buf << "\n";
    }
    if (!out) throw std::runtime_error("save_boundary_data: write failed for " + path);
}

BoundaryData load_boundary_data(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_boundary_data: cannot open " + path);
    int line_no = 0;
    auto next = [&]() {
        std::string line;
        if (!std::getline(in, line)) throw ParseError("unexpected end of file", line_no + 1);
        ++line_no;
        return line;
    };
    if (next() != "BDATA v1") throw ParseError("expected header 'BDATA v1'", line_no);
    BoundaryData data;
    {
        std::istringstream ss(next());
        std::string word;
        if (!(ss >> word >> data.delta) || word != "DELTA" || data.delta < 0.0) {
            throw ParseError("expected 'DELTA <float>'", line_no);
        }
    }
    long count = -1;
    {
        std::istringstream ss(next());
        std::string word;
        if (!(ss >> word >> count) || word != "N" || count < 0) {
            throw ParseError("expected 'N <count>'", line_no);
        }
    }
    data.nodes.reserve(count);
    data.g1.resize(count);
    data.g2.resize(count);
    for (long i = 0; i < count; ++i) {
        std::istringstream ss(next());
        int node;
        double v1, v2;
        if (!(ss >> node >> v1 >> v2) || node < 0) {
            throw ParseError("expected 'node_index g1 g2'", line_no);
        }
        data.nodes.push_back(node);
        data.g1[i] = v1;
        data.g2[i] = v2;
    }
    return data;
}

} // namespace soar
