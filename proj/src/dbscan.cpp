#include "geocohort/dbscan.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <unordered_map>

#include "geocohort/errors.hpp"

namespace geocohort {

namespace {

struct CellKey {
  std::int64_t row;
  std::int64_t col;
  bool operator==(const CellKey&) const = default;
};

struct CellHash {
  std::size_t operator()(const CellKey& k) const noexcept {
    return std::hash<std::int64_t>()(k.row * 1000003 + k.col);
  }
};

std::int64_t cell_of(double v, double eps) {
  const double c = std::floor(v / eps);
  return static_cast<std::int64_t>(std::clamp(c, -1e15, 1e15));
}

}  // namespace

std::vector<int> dbscan(std::span<const LatLon> points, double eps, int min_pts) {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw Error(ErrorKind::InvalidArgument, "dbscan eps must be positive");
  }
  if (min_pts < 1) throw Error(ErrorKind::InvalidArgument, "dbscan min_pts must be >= 1");

  // Collapse identical coordinates; unique points are numbered by first occurrence.
  std::map<std::pair<double, double>, std::size_t> unique_of;
  std::vector<std::size_t> point_to_unique(points.size());
  std::vector<LatLon> unique;
  std::vector<long long> weight;
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto [it, inserted] = unique_of.try_emplace({points[i].lat, points[i].lon}, unique.size());
    if (inserted) {
      unique.push_back(points[i]);
      weight.push_back(0);
    }
    ++weight[it->second];
    point_to_unique[i] = it->second;
  }

  // Cells slightly wider than eps so any neighbour lies in an adjacent cell
  // despite rounding in the division.
  const double cell = eps * (1.0 + 1e-9);
  std::unordered_map<CellKey, std::vector<std::size_t>, CellHash> grid;
  for (std::size_t u = 0; u < unique.size(); ++u) {
    grid[{cell_of(unique[u].lat, cell), cell_of(unique[u].lon, cell)}].push_back(u);
  }
  const double eps2 = eps * eps;
  auto neighbours = [&](std::size_t u) {
    std::vector<std::size_t> out;
    const auto r = cell_of(unique[u].lat, cell);
    const auto c = cell_of(unique[u].lon, cell);
    for (std::int64_t dr = -1; dr <= 1; ++dr) {
      for (std::int64_t dc = -1; dc <= 1; ++dc) {
        auto it = grid.find({r + dr, c + dc});
        if (it == grid.end()) continue;
        for (std::size_t v : it->second) {
          const double dy = unique[u].lat - unique[v].lat;
          const double dx = unique[u].lon - unique[v].lon;
          if (dy * dy + dx * dx <= eps2) out.push_back(v);
        }
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  };

  constexpr int kUnvisited = -2;
  std::vector<int> label(unique.size(), kUnvisited);
  std::vector<char> is_core(unique.size(), 0);
  std::vector<std::vector<std::size_t>> nbrs(unique.size());
  for (std::size_t u = 0; u < unique.size(); ++u) {
    nbrs[u] = neighbours(u);
    long long mass = 0;
    for (std::size_t v : nbrs[u]) mass += weight[v];
    is_core[u] = mass >= min_pts;
  }

  int next_cluster = 0;
  for (std::size_t u = 0; u < unique.size(); ++u) {
    if (label[u] != kUnvisited) continue;
    if (!is_core[u]) {
      label[u] = kNoise;
      continue;
    }
    const int id = next_cluster++;
    label[u] = id;
    std::deque<std::size_t> frontier{u};
    while (!frontier.empty()) {
      const auto p = frontier.front();
      frontier.pop_front();
      for (std::size_t v : nbrs[p]) {
        if (label[v] == kUnvisited || label[v] == kNoise) {
          const bool fresh = label[v] == kUnvisited;
          label[v] = id;
          if (fresh && is_core[v]) frontier.push_back(v);
        }
      }
    }
  }

  // Renumber by smallest member index in the original order.
  std::vector<int> remap(static_cast<std::size_t>(next_cluster), -1);
  int renumbered = 0;
  std::vector<int> out(points.size(), kNoise);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const int l = label[point_to_unique[i]];
    if (l == kNoise) continue;
    if (remap[static_cast<std::size_t>(l)] < 0) remap[static_cast<std::size_t>(l)] = renumbered++;
    out[i] = remap[static_cast<std::size_t>(l)];
  }
  return out;
}

}  // namespace geocohort
