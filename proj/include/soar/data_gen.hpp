#ifndef SOAR_DATA_GEN_HPP
#define SOAR_DATA_GEN_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "soar/assembly.hpp"
#include "soar/mesh.hpp"

namespace soar {

/// Cauchy boundary data at the boundary nodes of one mesh, cycle order.
/// `delta` is the sup-norm noise level max_j ||g_j^d - g_j||_inf; zero for
/// exact data.
struct BoundaryData {
    std::vector<int> nodes;
    Eigen::VectorXd g1;
    Eigen::VectorXd g2;
    double delta = 0.0;
    double delta_prime = 0.0;
    std::uint64_t seed = 0;
};

/// The two benchmark source configurations.
enum class ExampleId { Example1, Example2 };

ExampleId parse_example(const std::string& name);
std::string example_name(ExampleId id);

/// Permissible-region predicate: the unit square for Example1, the union of
/// the two radius-0.1 disks for Example2.
std::function<bool(const Eigen::Vector2d&)> example_region(ExampleId id);

/// Pointwise source expression including its region indicator.
std::function<double(const Eigen::Vector2d&)> example_source(ExampleId id);

/// True source sampled at the region nodes of a mesh.
struct TrueSource {
    std::string name;
    std::function<double(const Eigen::Vector2d&)> expr;
    Eigen::VectorXd coeffs;
};

TrueSource sample_true_source(ExampleId id, const Mesh& mesh, const RegionMask& region);
TrueSource sample_true_source(const std::function<double(const Eigen::Vector2d&)>& expr,
                              const Mesh& mesh, const RegionMask& region,
                              const std::string& name = "custom");

/// Exact measurement: Neumann forward solve with zero flux, Dirichlet trace
/// extracted at the boundary nodes.
BoundaryData make_measurement(const Mesh& fine, const RegionMask& region_fine,
                              const Eigen::VectorXd& p_true);
BoundaryData make_measurement(const Mesh& fine, const RegionMask& region_fine, ExampleId id);

/// Deterministic counter-based uniform draw on [0,1), keyed by (seed, index).
double uniform01(std::uint64_t seed, std::uint64_t index);

/// Multiplicative uniform noise g^d = (1 + delta' (2 rand - 1)) g applied to
/// both components; one draw per boundary node, keyed by global node index.
/// Recomputes delta as the discrete sup-norm perturbation.
BoundaryData add_noise(const BoundaryData& data, double delta_prime, std::uint64_t seed);

/// Test hook: supply the per-node draw directly.
BoundaryData add_noise(const BoundaryData& data, double delta_prime,
                       const std::function<double(int)>& rand01);

/// Move boundary data between meshes of the same domain by linear
/// interpolation in normalized arc length; delta carries over unchanged.
BoundaryData transfer_boundary(const Mesh& src_mesh, const Mesh& dst_mesh,
                               const BoundaryData& data);

void save_boundary_data(const BoundaryData& data, const std::string& path);
BoundaryData load_boundary_data(const std::string& path);

} // namespace soar

#endif
