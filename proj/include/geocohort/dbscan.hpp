#pragma once

#include <span>
#include <vector>

namespace geocohort {

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;
};

inline constexpr int kNoise = -1;

/// DBSCAN with Euclidean distance on raw (lat, lon) degrees; points at
/// distance <= eps are neighbours and a point's neighbourhood includes
/// itself. Returns one label per point: a cluster id or kNoise. Cluster ids
/// are numbered 0, 1, ... in order of each cluster's smallest member index.
/// Identical coordinates are collapsed internally with multiplicity, so
/// heavily duplicated inputs stay cheap.
std::vector<int> dbscan(std::span<const LatLon> points, double eps = 2.5, int min_pts = 2);

}  // namespace geocohort
