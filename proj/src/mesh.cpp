#include "soar/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include "soar/errors.hpp"

namespace soar {

double Mesh::signed_area(int tri) const {
    const auto& t = triangles[tri];
    const Eigen::Vector2d& a = nodes[t[0]];
    const Eigen::Vector2d& b = nodes[t[1]];
    const Eigen::Vector2d& c = nodes[t[2]];
    return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

Eigen::Vector2d Mesh::centroid(int tri) const {
    const auto& t = triangles[tri];
    return (nodes[t[0]] + nodes[t[1]] + nodes[t[2]]) / 3.0;
}

double Mesh::longest_edge(int tri) const {
    const auto& t = triangles[tri];
    double l = 0.0;
    for (int e = 0; e < 3; ++e) {
        l = std::max(l, (nodes[t[e]] - nodes[t[(e + 1) % 3]]).norm());
    }
    return l;
}

double Mesh::inradius(int tri) const {
    const auto& t = triangles[tri];
    double per = 0.0;
    for (int e = 0; e < 3; ++e) {
        per += (nodes[t[e]] - nodes[t[(e + 1) % 3]]).norm();
    }
    return 2.0 * std::abs(signed_area(tri)) / per;
}

std::vector<int> Mesh::boundary_nodes() const {
    return boundary_param(*this).nodes;
}

namespace {

// Global index of the first node of ring j (ring 0 is the center node).
int ring_base(int j) { return j == 0 ? 0 : 1 + 3 * j * (j - 1); }

double compute_h(const Mesh& mesh) {
    double h = 0.0;
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        h = std::max(h, mesh.longest_edge(t));
    }
    return h;
}

} // namespace

Mesh generate_disk_mesh(double radius, int n_rings) {
    if (radius <= 0.0 || n_rings < 1) {
        throw std::invalid_argument("generate_disk_mesh: radius > 0 and n_rings >= 1 required");
    }
    Mesh mesh;
    mesh.nodes.emplace_back(0.0, 0.0);
    for (int j = 1; j <= n_rings; ++j) {
        const double r = radius * j / n_rings;
        const int count = 6 * j;
        for (int i = 0; i < count; ++i) {
            const double theta = 2.0 * std::numbers::pi * i / count;
            mesh.nodes.emplace_back(r * std::cos(theta), r * std::sin(theta));
        }
    }

    // Ring 1: fan around the center.
    for (int i = 0; i < 6; ++i) {
        mesh.triangles.push_back({ring_base(1) + i, ring_base(1) + (i + 1) % 6, 0});
    }
    // Rings j >= 2: per sector, a strip between j inner and j+1 outer nodes.
    for (int j = 2; j <= n_rings; ++j) {
        const int inner = 6 * (j - 1);
        const int outer = 6 * j;
        for (int s = 0; s < 6; ++s) {
            auto o = [&](int t) { return ring_base(j) + (s * j + t) % outer; };
            auto in = [&](int t) { return ring_base(j - 1) + (s * (j - 1) + t) % inner; };
            for (int t = 0; t < j; ++t) {
                mesh.triangles.push_back({o(t), o(t + 1), in(t)});
            }
            for (int t = 0; t + 1 < j; ++t) {
                mesh.triangles.push_back({in(t), o(t + 1), in(t + 1)});
            }
        }
    }

    const int nb = 6 * n_rings;
    for (int i = 0; i < nb; ++i) {
        mesh.boundary_edges.push_back({ring_base(n_rings) + i, ring_base(n_rings) + (i + 1) % nb});
    }
    mesh.h = compute_h(mesh);
    validate_mesh(mesh);
    return mesh;
}

RegionMask mark_region(const Mesh& mesh,
                       const std::function<bool(const Eigen::Vector2d&)>& predicate) {
    RegionMask mask;
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        if (predicate(mesh.centroid(t))) {
            mask.member_elements.push_back(t);
        }
    }
    if (mask.member_elements.empty()) {
        throw EmptyRegionError("mark_region: no element centroid satisfies the predicate");
    }
    std::vector<char> seen(mesh.node_count(), 0);
    for (int t : mask.member_elements) {
        for (int v : mesh.triangles[t]) seen[v] = 1;
    }
    mask.global_to_local.assign(mesh.node_count(), -1);
    for (int n = 0; n < mesh.node_count(); ++n) {
        if (seen[n]) {
            mask.global_to_local[n] = static_cast<int>(mask.omega0_nodes.size());
            mask.omega0_nodes.push_back(n);
        }
    }
    return mask;
}

BoundaryParam boundary_param(const Mesh& mesh) {
    const auto& edges = mesh.boundary_edges;
    if (edges.size() < 3) {
        throw InvalidBoundaryError("boundary_param: cycle needs at least 3 edges");
    }
    std::unordered_map<int, int> next;
    std::unordered_map<int, int> indegree;
    next.reserve(edges.size());
    for (const auto& e : edges) {
        if (e[0] < 0 || e[1] < 0 || e[0] >= mesh.node_count() || e[1] >= mesh.node_count()) {
            throw InvalidBoundaryError("boundary_param: edge references invalid node");
        }
        if (!next.emplace(e[0], e[1]).second) {
            throw InvalidBoundaryError("boundary_param: node repeats as edge source");
        }
        if (++indegree[e[1]] > 1) {
            throw InvalidBoundaryError("boundary_param: node repeats as edge target");
        }
    }
    const int start = std::min_element(next.begin(), next.end(),
                                       [](auto& a, auto& b) { return a.first < b.first; })
                          ->first;
    BoundaryParam param;
    param.nodes.reserve(edges.size());
    param.s.reserve(edges.size());
    int node = start;
    double s = 0.0;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        param.nodes.push_back(node);
        param.s.push_back(s);
        const auto it = next.find(node);
        if (it == next.end()) {
            throw InvalidBoundaryError("boundary_param: open boundary chain");
        }
        s += (mesh.nodes[it->second] - mesh.nodes[node]).norm();
        node = it->second;
    }
    if (node != start) {
        throw InvalidBoundaryError("boundary_param: edges do not form a single closed cycle");
    }
    param.length = s;
    return param;
}

void save_mesh(const Mesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_mesh: cannot open " + path);
    char buf[64];
    out << "MESH2D v1\n";
    out << "NODES " << mesh.node_count() << "\n";
    for (const auto& p : mesh.nodes) {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g", p.x(), p.y());
        out << buf << "\n";
    }
    out << "TRIANGLES " << mesh.triangle_count() << "\n";
    for (const auto& t : mesh.triangles) {
        out << t[0] << " " << t[1] << " " << t[2] << "\n";
    }
    out << "BOUNDARY " << mesh.boundary_edges.size() << "\n";
    for (const auto& e : mesh.boundary_edges) {
        out << e[0] << " " << e[1] << "\n";
    }
    if (!out) throw std::runtime_error("save_mesh: write failed for " + path);
}

namespace {

struct LineReader {
    std::istream& in;
    int line_no = 0;
    std::string next() {
        std::string line;
        if (!std::getline(in, line)) {
            throw ParseError("unexpected end of file", line_no + 1);
        }
        ++line_no;
        return line;
    }
};

} // namespace

Mesh load_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_mesh: cannot open " + path);
    LineReader reader{in};

    if (reader.next() != "MESH2D v1") {
        throw ParseError("expected header 'MESH2D v1'", reader.line_no);
    }

    auto read_count = [&](const std::string& keyword) {
        std::istringstream ss(reader.next());
        std::string word;
        long count = -1;
        if (!(ss >> word >> count) || word != keyword || count < 0) {
            throw ParseError("expected '" + keyword + " <count>'", reader.line_no);
        }
        return count;
    };

    Mesh mesh;
    const long n_nodes = read_count("NODES");
    mesh.nodes.reserve(n_nodes);
    for (long i = 0; i < n_nodes; ++i) {
        std::istringstream ss(reader.next());
        double x, y;
        if (!(ss >> x >> y)) throw ParseError("expected 'x y'", reader.line_no);
        mesh.nodes.emplace_back(x, y);
    }

    const long n_tris = read_count("TRIANGLES");
    mesh.triangles.reserve(n_tris);
    for (long i = 0; i < n_tris; ++i) {
        std::istringstream ss(reader.next());
        int a, b, c;
        if (!(ss >> a >> b >> c)) throw ParseError("expected 'i j k'", reader.line_no);
        for (int v : {a, b, c}) {
            if (v < 0 || v >= mesh.node_count()) {
                throw ParseError("triangle node index out of range", reader.line_no);
            }
        }
        mesh.triangles.push_back({a, b, c});
        if (mesh.signed_area(static_cast<int>(mesh.triangles.size()) - 1) <= 0.0) {
            throw ParseError("triangle is not counter-clockwise (non-positive area)",
                             reader.line_no);
        }
    }

    const long n_edges = read_count("BOUNDARY");
    mesh.boundary_edges.reserve(n_edges);
    for (long i = 0; i < n_edges; ++i) {
        std::istringstream ss(reader.next());
        int a, b;
        if (!(ss >> a >> b)) throw ParseError("expected 'i j'", reader.line_no);
        if (a < 0 || b < 0 || a >= mesh.node_count() || b >= mesh.node_count()) {
            throw ParseError("boundary node index out of range", reader.line_no);
        }
        mesh.boundary_edges.push_back({a, b});
    }

    mesh.h = compute_h(mesh);
    return mesh;
}

void validate_mesh(const Mesh& mesh, double c2) {
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        if (mesh.signed_area(t) <= 0.0) {
            throw std::runtime_error("validate_mesh: triangle " + std::to_string(t) +
                                     " has non-positive signed area");
        }
    }
    // Boundary edges must each belong to exactly one triangle.
    std::unordered_map<long long, int> edge_use;
    auto key = [](int a, int b) {
        return (static_cast<long long>(std::min(a, b)) << 32) | std::max(a, b);
    };
    for (const auto& t : mesh.triangles) {
        for (int e = 0; e < 3; ++e) {
            ++edge_use[key(t[e], t[(e + 1) % 3])];
        }
    }
    for (const auto& e : mesh.boundary_edges) {
        auto it = edge_use.find(key(e[0], e[1]));
        if (it == edge_use.end() || it->second != 1) {
            throw std::runtime_error("validate_mesh: boundary edge not incident to exactly one triangle");
        }
    }
    boundary_param(mesh); // throws on malformed cycle

    const double h = compute_h(mesh);
    if (std::abs(h - mesh.h) > 1e-12 * std::max(1.0, h)) {
        throw std::runtime_error("validate_mesh: stored h does not match longest edge");
    }
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        if (mesh.longest_edge(t) > c2 * mesh.inradius(t)) {
            std::cerr << "warning: triangle " << t << " violates shape regularity (l > "
                      << c2 << " r)\n";
        }
    }
}

} // namespace soar
