#ifndef SOAR_ASSEMBLY_HPP
#define SOAR_ASSEMBLY_HPP

#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "soar/mesh.hpp"

namespace soar {

/// Compressed-row sparse matrix (CSR) with sorted column indices per row.
using SparseMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Stiffness matrix d_ls = integral of grad(psi_s) . grad(psi_l) over the
/// domain. Exact per-element integration (P1 gradients are constant).
SparseMat assemble_stiffness(const Mesh& mesh);

/// Mass matrix e_ls = integral of psi_s psi_l, per-element (area/12)*[[2,1,1],...].
SparseMat assemble_mass(const Mesh& mesh);

/// Mass matrix over the region elements only, indexed by region-local nodes.
SparseMat assemble_region_mass(const Mesh& mesh, const RegionMask& region);

/// Boundary mass f_ls = integral of psi_s psi_l over the boundary polygon,
/// per-edge (L/6)*[[2,1],[1,2]].
SparseMat assemble_boundary_mass(const Mesh& mesh);

/// Source coupling b_lj = integral of psi_l psi_{k_j} over the region;
/// rows are global nodes, columns region-local nodes.
SparseMat assemble_source_coupling(const Mesh& mesh, const RegionMask& region);

/// Boundary load with P1 data: b_l = integral of g psi_l over the boundary,
/// where g is given by its values at `boundary_nodes` (every boundary node
/// must be covered).
Eigen::VectorXd assemble_boundary_load(const Mesh& mesh,
                                       const std::vector<int>& boundary_nodes,
                                       const Eigen::VectorXd& values);

/// Immutable matrix bundle shared between runs on the same mesh + region.
struct FemMatrices {
    SparseMat D;   // stiffness, m x m
    SparseMat E;   // mass, m x m
    SparseMat F;   // boundary mass, m x m
    SparseMat B;   // source coupling, m x m0
    SparseMat M0;  // region mass, m0 x m0
};

/// Assembled system for one mesh/region/data triple. Matrices are shared;
/// the boundary loads b1, b2 are per-instance so one assembly serves many
/// noise realizations.
struct FemSystem {
    std::shared_ptr<const Mesh> mesh;
    std::shared_ptr<const RegionMask> region;
    std::shared_ptr<const FemMatrices> mats;
    Eigen::VectorXd b1, b2;

    int m() const { return mesh->node_count(); }
    int m0() const { return region->size(); }
    const SparseMat& D() const { return mats->D; }
    const SparseMat& E() const { return mats->E; }
    const SparseMat& F() const { return mats->F; }
    const SparseMat& B() const { return mats->B; }
    const SparseMat& M0() const { return mats->M0; }

    /// Copy with boundary loads rebuilt from new Dirichlet/Neumann data.
    FemSystem with_boundary_data(const std::vector<int>& boundary_nodes,
                                 const Eigen::VectorXd& g1,
                                 const Eigen::VectorXd& g2) const;
};

/// Assemble all matrices; loads start at zero.
FemSystem assemble_system(std::shared_ptr<const Mesh> mesh,
                          std::shared_ptr<const RegionMask> region);

} // namespace soar

#endif
