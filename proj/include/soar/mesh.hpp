#ifndef SOAR_MESH_HPP
#define SOAR_MESH_HPP

#include <array>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace soar {

/// Conforming triangulation of a planar domain. Triangles are stored
/// counter-clockwise; boundary_edges trace the outer boundary as a single
/// counter-clockwise cycle. `h` is the maximum longest-edge length.
struct Mesh {
    std::vector<Eigen::Vector2d> nodes;
    std::vector<std::array<int, 3>> triangles;
    std::vector<std::array<int, 2>> boundary_edges;
    double h = 0.0;

    int node_count() const { return static_cast<int>(nodes.size()); }
    int triangle_count() const { return static_cast<int>(triangles.size()); }

    double signed_area(int tri) const;
    Eigen::Vector2d centroid(int tri) const;
    double longest_edge(int tri) const;
    double inradius(int tri) const;

    /// Boundary node indices in cycle order, starting from the boundary node
    /// with the smallest global index.
    std::vector<int> boundary_nodes() const;
};

/// Subset of elements forming the permissible region, with the induced node
/// set and global-to-local index map.
struct RegionMask {
    std::vector<int> member_elements;          // sorted triangle indices
    std::vector<int> omega0_nodes;             // sorted ascending global node indices
    std::vector<int> global_to_local;          // size m, -1 outside the region

    int size() const { return static_cast<int>(omega0_nodes.size()); }
    int local_index(int global_node) const { return global_to_local[global_node]; }
};

/// Arc-length parameterization of the boundary cycle. `nodes[i]` carries
/// coordinate `s[i]` in [0, length), starting at the smallest-index boundary
/// node and increasing counter-clockwise.
struct BoundaryParam {
    std::vector<int> nodes;
    std::vector<double> s;
    double length = 0.0;
};

/// Structured polar triangulation of the disk of given radius: ring j holds
/// 6j nodes at radius j*radius/n_rings. Node count 1 + 3n(n+1), 6n^2 triangles.
Mesh generate_disk_mesh(double radius, int n_rings);

/// Elements whose centroid satisfies the predicate. Throws EmptyRegionError
/// when nothing is selected.
RegionMask mark_region(const Mesh& mesh,
                       const std::function<bool(const Eigen::Vector2d&)>& predicate);

BoundaryParam boundary_param(const Mesh& mesh);

void save_mesh(const Mesh& mesh, const std::string& path);
Mesh load_mesh(const std::string& path);

/// Structural checks: positive areas, closed boundary cycle, h consistency.
/// Shape regularity (longest side <= c2 * inradius) is reported as a warning
/// on stderr, not an error.
void validate_mesh(const Mesh& mesh, double c2 = 10.0);

} // namespace soar

#endif
