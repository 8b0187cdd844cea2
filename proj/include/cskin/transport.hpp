#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cskin/model.hpp"

namespace cskin {

struct Trajectory;

/// Equal-weight point cloud, row-major n x dim.
struct PointCloud {
  std::size_t dim = 0;
  std::size_t n = 0;
  std::vector<double> data;

  std::span<const double> point(std::size_t i) const { return {data.data() + i * dim, dim}; }
};

/// Which coordinates form the cloud. Full concatenates (x, v) with unit
/// relative weight.
enum class Phase { Position, Velocity, Full };

std::string to_string(Phase phase);
Phase phase_from_string(const std::string& name);

PointCloud point_cloud(const Ensemble& ens, Phase phase);

struct TransportPlan {
  std::vector<std::size_t> assignment;  // a_i is matched to b_{assignment[i]}
  double cost = 0.0;                    // (mean_i |a_i - b_assignment[i]|^p)^(1/p)
  double p = 2.0;
};

inline constexpr std::size_t kExactTransportMax = 512;

/// |a - b|^p, with p = 1 and p = 2 avoiding pow.
double pth_power_distance(std::span<const double> a, std::span<const double> b, double p);

/// Exact W_p between equal-size clouds through an O(N^3) assignment solve.
/// Throws DomainError on mismatched shapes, p < 1 or n > max_n.
std::pair<double, TransportPlan> wasserstein_exact(const PointCloud& a, const PointCloud& b, double p,
                                                   std::size_t max_n = kExactTransportMax);

/// W_p between two equal-length samples on the line (monotone matching).
/// Inputs need not be pre-sorted.
double wasserstein_1d(std::vector<double> a, std::vector<double> b, double p);

/// (mean over random unit directions of W_p^p of the projections)^(1/p).
/// In one dimension the only direction used is +1.
double sliced_wasserstein(const PointCloud& a, const PointCloud& b, double p,
                          std::size_t n_projections, std::uint64_t seed);

struct StabilityOptions {
  bool allow_sliced = false;  // fall back to the sliced distance above max_n
  std::size_t max_n = kExactTransportMax;
  std::size_t n_projections = 256;
  std::uint64_t seed = 0;
};

struct StabilityPoint {
  double t;
  double distance;
  double ratio;
};

struct StabilitySeries {
  std::vector<StabilityPoint> points;
  bool sliced = false;

  double max_ratio() const;
};

/// W_p(A(t), B(t)) / W_p(A(t0), B(t0)) at every aligned snapshot.
/// Throws DomainError when the initial distance is zero or times differ.
StabilitySeries stability_ratio(const Trajectory& a, const Trajectory& b, double p, Phase phase,
                                const StabilityOptions& options = {});

}  // namespace cskin
