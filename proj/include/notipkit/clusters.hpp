#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "notipkit/calibration.hpp"

namespace notip {

/// Grid shape with 1 to 3 axes. Voxels are flattened row-major: the last axis varies fastest.
struct GridDims {
  std::vector<std::size_t> extent;

  std::size_t rank() const noexcept { return extent.size(); }
  std::size_t voxel_count() const noexcept;
  std::array<std::size_t, 3> coordinate(std::size_t linear) const;
  std::size_t linear(const std::array<std::size_t, 3>& coord) const;
  /// Throws InvalidInput unless 1 <= rank <= 3 and every extent is positive.
  void validate() const;

  /// Parses "10x10x10" (also accepts ',').
  static GridDims parse(std::string_view text);
  std::string to_string() const;

  friend bool operator==(const GridDims&, const GridDims&) = default;
};

struct StatMap {
  GridDims dims;
  std::vector<double> values;
  /// Voxels outside the mask are ignored; empty means all voxels are in.
  std::vector<std::uint8_t> mask;

  void validate() const;
};

/// Face: 4 / 6 neighbours (2D / 3D); FaceEdge: 8 / 18; FaceEdgeCorner: 8 / 26.
enum class Connectivity { Face, FaceEdge, FaceEdgeCorner };

Connectivity parse_connectivity(std::string_view name);
std::string_view connectivity_name(Connectivity c);

/// Diagonal voxel-to-world mapping: world = origin + voxel_size * index, per axis.
struct Affine {
  std::array<double, 3> voxel_size{1.0, 1.0, 1.0};
  std::array<double, 3> origin{0.0, 0.0, 0.0};
};

struct Cluster {
  std::size_t id = 0;
  /// Linear voxel indices, ascending.
  std::vector<std::size_t> voxels;
  std::size_t peak_index = 0;
  std::array<std::size_t, 3> peak_coord{};
  double peak_value = 0.0;

  std::size_t size() const noexcept { return voxels.size(); }
};

/// Connected components of {v in mask : value(v) > z_threshold}. Clusters are numbered 1..n
/// in order of descending peak value (ties: smaller peak index first).
std::vector<Cluster> extract_clusters(const StatMap& map, double z_threshold,
                                      Connectivity connectivity = Connectivity::Face);

struct ClusterRow {
  std::size_t id = 0;
  std::array<std::size_t, 3> peak_coord{};
  std::optional<std::array<double, 3>> peak_world;
  double peak_value = 0.0;
  std::size_t size = 0;
  std::optional<double> size_physical;
  /// One entry per family, in the order the families were supplied.
  std::vector<std::string> methods;
  std::vector<double> tdp;
  std::vector<std::size_t> false_positives;
};

struct ClusterTable {
  std::size_t rank = 3;
  double z_threshold = 0.0;
  std::vector<ClusterRow> rows;
};

/// TDP lower bound of each cluster under each family; families must share the p-value grid.
ClusterTable cluster_tdp_table(const std::vector<Cluster>& clusters, std::span<const double> pvalues,
                               const std::vector<CalibratedFamily>& families, std::size_t rank,
                               double z_threshold, const std::optional<Affine>& affine = std::nullopt);

enum class ClusterOrder { Peak, Size };
void sort_table(ClusterTable& table, ClusterOrder order);

void write_cluster_csv(std::ostream& out, const ClusterTable& table);
nlohmann::json to_json(const ClusterTable& table);

}  // namespace notip
