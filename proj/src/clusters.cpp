#include "notipkit/clusters.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <ostream>

#include "notipkit/errors.hpp"
#include "notipkit/posthoc.hpp"

namespace notip {

std::size_t GridDims::voxel_count() const noexcept {
  std::size_t n = 1;
  for (const auto e : extent) n *= e;
  return extent.empty() ? 0 : n;
}

std::array<std::size_t, 3> GridDims::coordinate(std::size_t linear) const {
  std::array<std::size_t, 3> c{};
  for (std::size_t a = rank(); a-- > 0;) {
    c[a] = linear % extent[a];
    linear /= extent[a];
  }
  return c;
}

std::size_t GridDims::linear(const std::array<std::size_t, 3>& coord) const {
  std::size_t idx = 0;
  for (std::size_t a = 0; a < rank(); ++a) idx = idx * extent[a] + coord[a];
  return idx;
}

void GridDims::validate() const {
  if (extent.empty() || extent.size() > 3) throw InvalidInput("grid must have 1 to 3 axes");
  for (const auto e : extent) {
    if (e == 0) throw InvalidInput("grid extents must be positive");
  }
}

GridDims GridDims::parse(std::string_view text) {
  GridDims d;
  std::string token;
  const auto flush = [&] {
    if (token.empty()) throw InvalidParameter("malformed grid dims '" + std::string(text) + "'");
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(token, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != token.size()) throw InvalidParameter("malformed grid dims '" + std::string(text) + "'");
    d.extent.push_back(static_cast<std::size_t>(v));
    token.clear();
  };
  for (const char ch : text) {
    if (ch == 'x' || ch == 'X' || ch == ',') {
      flush();
    } else if (ch != ' ') {
      token.push_back(ch);
    }
  }
  flush();
  try {
    d.validate();
  } catch (const InvalidInput& e) {
    throw InvalidParameter(e.what());
  }
  return d;
}

std::string GridDims::to_string() const {
  std::string s;
  for (std::size_t a = 0; a < extent.size(); ++a) {
    if (a) s += 'x';
    s += std::to_string(extent[a]);
  }
  return s;
}

void StatMap::validate() const {
  dims.validate();
  if (values.size() != dims.voxel_count()) throw InvalidInput("stat map size does not match grid dims");
  if (!mask.empty() && mask.size() != values.size()) throw InvalidInput("mask size does not match grid dims");
  for (std::size_t i = 0; i < values.size(); ++i) {
    const bool inside = mask.empty() || mask[i] != 0;
    if (inside && !std::isfinite(values[i])) {
      throw InvalidInput("non-finite statistic inside mask at voxel " + std::to_string(i));
    }
  }
}

Connectivity parse_connectivity(std::string_view name) {
  if (name == "face") return Connectivity::Face;
  if (name == "face-edge") return Connectivity::FaceEdge;
  if (name == "face-edge-corner") return Connectivity::FaceEdgeCorner;
  throw InvalidParameter("unknown connectivity '" + std::string(name) + "'");
}

std::string_view connectivity_name(Connectivity c) {
  switch (c) {
    case Connectivity::Face: return "face";
    case Connectivity::FaceEdge: return "face-edge";
    case Connectivity::FaceEdgeCorner: return "face-edge-corner";
  }
  return "face";
}

namespace {

std::vector<std::array<int, 3>> neighbour_offsets(std::size_t rank, Connectivity c) {
  const int max_nonzero = c == Connectivity::Face ? 1 : c == Connectivity::FaceEdge ? 2 : 3;
  std::vector<std::array<int, 3>> out;
  const int r1 = rank >= 1 ? 1 : 0, r2 = rank >= 2 ? 1 : 0, r3 = rank >= 3 ? 1 : 0;
  for (int a = -r1; a <= r1; ++a) {
    for (int b = -r2; b <= r2; ++b) {
      for (int d = -r3; d <= r3; ++d) {
        const int nonzero = (a != 0) + (b != 0) + (d != 0);
        if (nonzero == 0 || nonzero > max_nonzero) continue;
        out.push_back({a, b, d});
      }
    }
  }
  return out;
}

}  // namespace

std::vector<Cluster> extract_clusters(const StatMap& map, double z_threshold, Connectivity connectivity) {
  map.validate();
  const GridDims& dims = map.dims;
  const std::size_t n = dims.voxel_count();
  const auto offsets = neighbour_offsets(dims.rank(), connectivity);

  std::vector<char> supra(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const bool inside = map.mask.empty() || map.mask[i] != 0;
    supra[i] = inside && map.values[i] > z_threshold;
  }

  std::vector<char> seen(n, 0);
  std::vector<Cluster> clusters;
  std::deque<std::size_t> queue;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (!supra[seed] || seen[seed]) continue;
    Cluster c;
    seen[seed] = 1;
    queue.push_back(seed);
    while (!queue.empty()) {
      const std::size_t v = queue.front();
      queue.pop_front();
      c.voxels.push_back(v);
      const auto coord = dims.coordinate(v);
      for (const auto& off : offsets) {
        std::array<std::size_t, 3> nb{};
        bool inside = true;
        for (std::size_t a = 0; a < dims.rank(); ++a) {
          const auto x = static_cast<long long>(coord[a]) + off[a];
          if (x < 0 || x >= static_cast<long long>(dims.extent[a])) {
            inside = false;
            break;
          }
          nb[a] = static_cast<std::size_t>(x);
        }
        if (!inside) continue;
        const std::size_t w = dims.linear(nb);
        if (supra[w] && !seen[w]) {
          seen[w] = 1;
          queue.push_back(w);
        }
      }
    }
    std::sort(c.voxels.begin(), c.voxels.end());
    c.peak_index = c.voxels.front();
    for (const auto v : c.voxels) {
      if (map.values[v] > map.values[c.peak_index]) c.peak_index = v;
    }
    c.peak_value = map.values[c.peak_index];
    c.peak_coord = dims.coordinate(c.peak_index);
    clusters.push_back(std::move(c));
  }

  std::sort(clusters.begin(), clusters.end(), [](const Cluster& a, const Cluster& b) {
    if (a.peak_value != b.peak_value) return a.peak_value > b.peak_value;
    return a.peak_index < b.peak_index;
  });
  for (std::size_t i = 0; i < clusters.size(); ++i) clusters[i].id = i + 1;
  return clusters;
}

ClusterTable cluster_tdp_table(const std::vector<Cluster>& clusters, std::span<const double> pvalues,
                               const std::vector<CalibratedFamily>& families, std::size_t rank,
                               double z_threshold, const std::optional<Affine>& affine) {
  for (const auto& f : families) {
    if (f.m != pvalues.size()) {
      throw InvalidInput("family '" + std::string(method_name(f.method)) + "' was calibrated on m=" +
                         std::to_string(f.m) + " tests, p-value map has " + std::to_string(pvalues.size()));
    }
  }
  ClusterTable table;
  table.rank = rank;
  table.z_threshold = z_threshold;
  for (const auto& c : clusters) {
    ClusterRow row;
    row.id = c.id;
    row.peak_coord = c.peak_coord;
    row.peak_value = c.peak_value;
    row.size = c.size();
    if (affine) {
      std::array<double, 3> w{};
      double voxel_volume = 1.0;
      for (std::size_t a = 0; a < rank; ++a) {
        w[a] = affine->origin[a] + affine->voxel_size[a] * static_cast<double>(c.peak_coord[a]);
        voxel_volume *= affine->voxel_size[a];
      }
      row.peak_world = w;
      row.size_physical = voxel_volume * static_cast<double>(c.size());
    }
    const VoxelSubset subset = make_subset(pvalues, c.voxels);
    for (const auto& f : families) {
      const BoundReport r = tdp_on_subset(subset, f);
      row.methods.emplace_back(method_name(f.method));
      row.tdp.push_back(r.tdp_bound);
      row.false_positives.push_back(r.false_positives);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

void sort_table(ClusterTable& table, ClusterOrder order) {
  std::stable_sort(table.rows.begin(), table.rows.end(), [&](const ClusterRow& a, const ClusterRow& b) {
    if (order == ClusterOrder::Size && a.size != b.size) return a.size > b.size;
    if (a.peak_value != b.peak_value) return a.peak_value > b.peak_value;
    return a.id < b.id;
  });
}

void write_cluster_csv(std::ostream& out, const ClusterTable& table) {
  static constexpr const char* kAxis[3] = {"x", "y", "z"};
  out << "cluster_id";
  for (std::size_t a = 0; a < table.rank; ++a) out << ',' << kAxis[a];
  const bool world = !table.rows.empty() && table.rows.front().peak_world.has_value();
  if (world) {
    for (std::size_t a = 0; a < table.rank; ++a) out << ',' << kAxis[a] << "_mm";
  }
  out << ",peak_stat,size_voxels";
  if (world) out << ",size_mm3";
  if (!table.rows.empty()) {
    for (const auto& m : table.rows.front().methods) out << ",tdp_" << m;
  }
  out << '\n';
  for (const auto& r : table.rows) {
    out << r.id;
    for (std::size_t a = 0; a < table.rank; ++a) out << ',' << r.peak_coord[a];
    if (world) {
      for (std::size_t a = 0; a < table.rank; ++a) out << ',' << (*r.peak_world)[a];
    }
    out << ',' << r.peak_value << ',' << r.size;
    if (world) out << ',' << *r.size_physical;
    for (const double t : r.tdp) out << ',' << t;
    out << '\n';
  }
}

nlohmann::json to_json(const ClusterTable& table) {
  nlohmann::json j;
  j["z_threshold"] = table.z_threshold;
  j["clusters"] = nlohmann::json::array();
  for (const auto& r : table.rows) {
    nlohmann::json c;
    c["id"] = r.id;
    c["peak_coord"] = std::vector<std::size_t>(r.peak_coord.begin(), r.peak_coord.begin() + table.rank);
    if (r.peak_world) {
      c["peak_mm"] = std::vector<double>(r.peak_world->begin(), r.peak_world->begin() + table.rank);
      c["size_mm3"] = *r.size_physical;
    }
    c["peak_stat"] = r.peak_value;
    c["size_voxels"] = r.size;
    nlohmann::json tdp = nlohmann::json::object();
    for (std::size_t i = 0; i < r.methods.size(); ++i) {
      tdp[r.methods[i]] = {{"tdp_lower_bound", r.tdp[i]}, {"false_positive_bound", r.false_positives[i]}};
    }
    c["tdp"] = std::move(tdp);
    j["clusters"].push_back(std::move(c));
  }
  return j;
}

}  // namespace notip
