#include "soar/assembly.hpp"

#include <cmath>

#include "soar/errors.hpp"

namespace soar {

namespace {

using Triplet = Eigen::Triplet<double>;

void check_element(const Mesh& mesh, int tri) {
    if (mesh.signed_area(tri) < 1e-14 * mesh.h * mesh.h) {
        throw DegenerateElementError("assembly: degenerate triangle " + std::to_string(tri));
    }
}

SparseMat from_triplets(int rows, int cols, std::vector<Triplet>& trips) {
    SparseMat m(rows, cols);
    m.setFromTriplets(trips.begin(), trips.end());
    m.makeCompressed();
    return m;
}

// Barycentric gradients scaled by 2*area: grad(lambda_i) = g_i / (2A).
void p1_gradients(const Mesh& mesh, int tri, Eigen::Vector2d g[3]) {
    const auto& t = mesh.triangles[tri];
    const Eigen::Vector2d& a = mesh.nodes[t[0]];
    const Eigen::Vector2d& b = mesh.nodes[t[1]];
    const Eigen::Vector2d& c = mesh.nodes[t[2]];
    g[0] = {b.y() - c.y(), c.x() - b.x()};
    g[1] = {c.y() - a.y(), a.x() - c.x()};
    g[2] = {a.y() - b.y(), b.x() - a.x()};
}

} // namespace

SparseMat assemble_stiffness(const Mesh& mesh) {
    std::vector<Triplet> trips;
    trips.reserve(9 * mesh.triangle_count());
    for (int tri = 0; tri < mesh.triangle_count(); ++tri) {
        check_element(mesh, tri);
        const double area = mesh.signed_area(tri);
        Eigen::Vector2d g[3];
        p1_gradients(mesh, tri, g);
        const auto& t = mesh.triangles[tri];
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                trips.emplace_back(t[i], t[j], g[i].dot(g[j]) / (4.0 * area));
            }
        }
    }
    return from_triplets(mesh.node_count(), mesh.node_count(), trips);
}

namespace {

void add_local_mass(std::vector<Triplet>& trips, const Mesh& mesh, int tri,
                    const std::array<int, 3>& rows, const std::array<int, 3>& cols) {
    const double a12 = mesh.signed_area(tri) / 12.0;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            trips.emplace_back(rows[i], cols[j], (i == j ? 2.0 : 1.0) * a12);
        }
    }
}

} // namespace

SparseMat assemble_mass(const Mesh& mesh) {
    std::vector<Triplet> trips;
    trips.reserve(9 * mesh.triangle_count());
    for (int tri = 0; tri < mesh.triangle_count(); ++tri) {
        check_element(mesh, tri);
        add_local_mass(trips, mesh, tri, mesh.triangles[tri], mesh.triangles[tri]);
    }
    return from_triplets(mesh.node_count(), mesh.node_count(), trips);
}

SparseMat assemble_region_mass(const Mesh& mesh, const RegionMask& region) {
    if (region.member_elements.empty()) {
        throw EmptyRegionError("assemble_region_mass: empty region");
    }
    std::vector<Triplet> trips;
    trips.reserve(9 * region.member_elements.size());
    for (int tri : region.member_elements) {
        check_element(mesh, tri);
        const auto& t = mesh.triangles[tri];
        std::array<int, 3> local = {region.local_index(t[0]), region.local_index(t[1]),
                                    region.local_index(t[2])};
        add_local_mass(trips, mesh, tri, local, local);
    }
    return from_triplets(region.size(), region.size(), trips);
}

SparseMat assemble_boundary_mass(const Mesh& mesh) {
    if (mesh.boundary_edges.empty()) {
        throw InvalidBoundaryError("assemble_boundary_mass: mesh has no boundary edges");
    }
    std::vector<Triplet> trips;
    trips.reserve(4 * mesh.boundary_edges.size());
    for (const auto& e : mesh.boundary_edges) {
        const double len = (mesh.nodes[e[1]] - mesh.nodes[e[0]]).norm();
        trips.emplace_back(e[0], e[0], len / 3.0);
        trips.emplace_back(e[1], e[1], len / 3.0);
        trips.emplace_back(e[0], e[1], len / 6.0);
        trips.emplace_back(e[1], e[0], len / 6.0);
    }
    return from_triplets(mesh.node_count(), mesh.node_count(), trips);
}

SparseMat assemble_source_coupling(const Mesh& mesh, const RegionMask& region) {
    if (region.member_elements.empty()) {
        throw EmptyRegionError("assemble_source_coupling: empty region");
    }
    std::vector<Triplet> trips;
    trips.reserve(9 * region.member_elements.size());
    for (int tri : region.member_elements) {
        check_element(mesh, tri);
        const auto& t = mesh.triangles[tri];
        std::array<int, 3> local = {region.local_index(t[0]), region.local_index(t[1]),
                                    region.local_index(t[2])};
        add_local_mass(trips, mesh, tri, t, local);
    }
    return from_triplets(mesh.node_count(), region.size(), trips);
}

Eigen::VectorXd assemble_boundary_load(const Mesh& mesh,
                                       const std::vector<int>& boundary_nodes,
                                       const Eigen::VectorXd& values) {
    if (static_cast<int>(boundary_nodes.size()) != values.size()) {
        throw DimensionMismatchError("assemble_boundary_load: nodes/values size mismatch");
    }
    std::vector<double> g(mesh.node_count(), 0.0);
    std::vector<char> have(mesh.node_count(), 0);
    for (std::size_t i = 0; i < boundary_nodes.size(); ++i) {
        g[boundary_nodes[i]] = values[static_cast<Eigen::Index>(i)];
        have[boundary_nodes[i]] = 1;
    }
    Eigen::VectorXd b = Eigen::VectorXd::Zero(mesh.node_count());
    for (const auto& e : mesh.boundary_edges) {
        if (!have[e[0]] || !have[e[1]]) {
            throw MissingBoundaryValueError("assemble_boundary_load: value missing at boundary node " +
                                            std::to_string(have[e[0]] ? e[1] : e[0]));
        }
        const double len = (mesh.nodes[e[1]] - mesh.nodes[e[0]]).norm();
        b[e[0]] += len / 6.0 * (2.0 * g[e[0]] + g[e[1]]);
        b[e[1]] += len / 6.0 * (g[e[0]] + 2.0 * g[e[1]]);
    }
    return b;
}

FemSystem FemSystem::with_boundary_data(const std::vector<int>& boundary_nodes,
                                        const Eigen::VectorXd& g1,
                                        const Eigen::VectorXd& g2) const {
    FemSystem out = *this;
    out.b1 = assemble_boundary_load(*mesh, boundary_nodes, g1);
    out.b2 = assemble_boundary_load(*mesh, boundary_nodes, g2);
    return out;
}

FemSystem assemble_system(std::shared_ptr<const Mesh> mesh,
                          std::shared_ptr<const RegionMask> region) {
    auto mats = std::make_shared<FemMatrices>();
    mats->D = assemble_stiffness(*mesh);
    mats->E = assemble_mass(*mesh);
    mats->F = assemble_boundary_mass(*mesh);
    mats->B = assemble_source_coupling(*mesh, *region);
    mats->M0 = assemble_region_mass(*mesh, *region);
    FemSystem sys;
    sys.mesh = std::move(mesh);
    sys.region = std::move(region);
    sys.mats = std::move(mats);
    sys.b1 = Eigen::VectorXd::Zero(sys.m());
    sys.b2 = Eigen::VectorXd::Zero(sys.m());
    return sys;
}

} // namespace soar
