#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include <json.hpp>

namespace cil::geo {

/// {x : normal.x + offset >= 0}
struct Halfspace {
  Eigen::VectorXd normal;
  double offset = 0.0;
};

/// Convex polyhedral cell {xi : E xi + e >= 0}, in coordinates centered at the
/// owning partition's center.
struct PolyCell {
  Eigen::MatrixXd E;
  Eigen::VectorXd e;

  int dim() const { return static_cast<int>(E.cols()); }
  int rows() const { return static_cast<int>(E.rows()); }
  bool contains(const Eigen::VectorXd& xi, double tol = 1e-9) const {
    return ((E * xi + e).array() >= -tol).all();
  }
};

/// Cone {xi : F xi >= 0} pointed at the center.
struct Cone {
  Eigen::MatrixXd F;

  int dim() const { return static_cast<int>(F.cols()); }
  bool contains(const Eigen::VectorXd& xi, double tol = 1e-9) const {
    return ((F * xi).array() >= -tol).all();
  }
  PolyCell as_cell() const { return PolyCell{F, Eigen::VectorXd::Zero(F.rows())}; }
};

/// Shared facet between cells i and j; normal points from cell j into cell i,
/// unit length.
struct FacetRecord {
  int i = 0, j = 0;
  Eigen::VectorXd normal;
};

struct Partition {
  std::vector<PolyCell> cells;
  Eigen::VectorXd center;
  std::vector<FacetRecord> adjacency;

  int dim() const { return static_cast<int>(center.size()); }
};

struct IndexSets {
  std::vector<FacetRecord> cont;          // cone pairs needing continuity rows
  std::vector<std::array<int, 3>> dec;    // (cell i, cone j, vertex k)
};

/// LP feasibility of {xi : E xi + e >= 0}.
bool cell_nonempty(const PolyCell& cell);

/// True when the conjunction of the given cells contains a point other than the
/// center (LP decision; a unit box around the center bounds the search, which is
/// exact for cones and any cell touching the center).
bool intersect_beyond_center(const std::vector<const PolyCell*>& cells);

/// Common boundary hyperplane normal of two cones sharing a center, when their
/// intersection is a codimension-1 facet (a ray in 2-D). None when interiors
/// overlap or the cones only meet at the center. The normal is unit length and
/// points from b into a.
std::optional<Eigen::VectorXd> shared_facet(const Cone& a, const Cone& b);

/// Index sets relating a PWA system partition to a Lyapunov cone partition.
/// cont: unordered cone pairs with a shared facet. dec: (i,j,k) triples with
/// X_i intersecting Z_j beyond the common center, one per inclusion vertex.
/// Lower-dimensional (facet) intersections do generate dec triples.
IndexSets build_index_sets(const Partition& system, const Partition& lyap,
                           const std::vector<int>& vertex_counts);

/// P = Q variant: one (i, i, k) triple per vertex per cell, cont from cone
/// adjacency. Requires matching cell counts.
IndexSets build_aligned_index_sets(const Partition& system, const Partition& lyap,
                                   const std::vector<int>& vertex_counts);

nlohmann::json to_json(const Partition& p);
Partition partition_from_json(const nlohmann::json& j);

// json <-> Eigen helpers shared by the other modules' serializers
nlohmann::json to_json(const Eigen::MatrixXd& m);
nlohmann::json to_json(const Eigen::VectorXd& v);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);
Eigen::VectorXd vector_from_json(const nlohmann::json& j);

}  // namespace cil::geo
