#include "cskin/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "cskin/integrate.hpp"

namespace cskin {

std::string to_string(Phase phase) {
  switch (phase) {
    case Phase::Position: return "position";
    case Phase::Velocity: return "velocity";
    case Phase::Full: return "full";
  }
  return "unknown";
}

Phase phase_from_string(const std::string& name) {
  if (name == "position") return Phase::Position;
  if (name == "velocity") return Phase::Velocity;
  if (name == "full") return Phase::Full;
  throw DomainError("unknown phase '" + name + "' (expected position, velocity or full)");
}

PointCloud point_cloud(const Ensemble& ens, Phase phase) {
  PointCloud c;
  c.n = ens.size();
  const std::size_t d = ens.dim();
  c.dim = phase == Phase::Full ? 2 * d : d;
  c.data.reserve(c.n * c.dim);
  for (std::size_t i = 0; i < c.n; ++i) {
    if (phase != Phase::Velocity) {
      const auto x = ens.position(i);
      c.data.insert(c.data.end(), x.begin(), x.end());
    }
    if (phase != Phase::Position) {
      const auto v = ens.velocity(i);
      c.data.insert(c.data.end(), v.begin(), v.end());
    }
  }
  return c;
}

double pth_power_distance(std::span<const double> a, std::span<const double> b, double p) {
  double d2 = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d2 += (a[k] - b[k]) * (a[k] - b[k]);
  if (p == 2.0) return d2;
  if (p == 1.0) return std::sqrt(d2);
  return std::pow(d2, 0.5 * p);
}

namespace {

void check_p(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw DomainError("transport order p must be >= 1");
}

void check_shapes(const PointCloud& a, const PointCloud& b) {
  if (a.n != b.n) throw DomainError("transport: clouds have different sizes");
  if (a.dim != b.dim) throw DomainError("transport: clouds have different dimensions");
  if (a.n == 0) throw DomainError("transport: empty clouds");
}

double root(double mean, double p) {
  if (p == 1.0) return mean;
  if (p == 2.0) return std::sqrt(mean);
  return std::pow(mean, 1.0 / p);
}

// Shortest augmenting path assignment with row/column potentials,
// O(n^3). Returns col_of_row.
std::vector<std::size_t> solve_assignment(const std::vector<double>& cost, std::size_t n) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  // 1-based arrays, index 0 is the virtual source column.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> row_of_col(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    row_of_col[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = row_of_col[j0];
      double delta = inf;
      std::size_t j1 = 0;
      const double* row = cost.data() + (i0 - 1) * n;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = row[j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[row_of_col[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (row_of_col[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      row_of_col[j0] = row_of_col[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> col_of_row(n);
  for (std::size_t j = 1; j <= n; ++j) col_of_row[row_of_col[j] - 1] = j - 1;
  return col_of_row;
}

}  // namespace

std::pair<double, TransportPlan> wasserstein_exact(const PointCloud& a, const PointCloud& b, double p,
                                                   std::size_t max_n) {
  check_p(p);
  check_shapes(a, b);
  if (a.n > max_n) {
    throw DomainError("wasserstein_exact: N = " + std::to_string(a.n) + " exceeds the exact limit " +
                      std::to_string(max_n) + "; use sliced_wasserstein");
  }
  const std::size_t n = a.n;
  std::vector<double> cost(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = pth_power_distance(a.point(i), b.point(j), p);
  }
  TransportPlan plan;
  plan.p = p;
  plan.assignment = solve_assignment(cost, n);
  // summed in ascending order so that W(a, b) and W(b, a) agree bit for bit
  std::vector<double> matched(n);
  for (std::size_t i = 0; i < n; ++i) matched[i] = cost[i * n + plan.assignment[i]];
  std::sort(matched.begin(), matched.end());
  double total = 0.0;
  for (double c : matched) total += c;
  plan.cost = root(total / static_cast<double>(n), p);
  return {plan.cost, std::move(plan)};
}

namespace {

double sorted_cost(const std::vector<double>& a, const std::vector<double>& b, double p) {
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = std::abs(a[i] - b[i]);
    total += p == 1.0 ? d : p == 2.0 ? d * d : std::pow(d, p);
  }
  return total / static_cast<double>(a.size());
}

}  // namespace

double wasserstein_1d(std::vector<double> a, std::vector<double> b, double p) {
  check_p(p);
  if (a.size() != b.size()) throw DomainError("wasserstein_1d: samples have different lengths");
  if (a.empty()) throw DomainError("wasserstein_1d: empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return root(sorted_cost(a, b, p), p);
}

double sliced_wasserstein(const PointCloud& a, const PointCloud& b, double p,
                          std::size_t n_projections, std::uint64_t seed) {
  check_p(p);
  check_shapes(a, b);
  if (n_projections == 0) throw DomainError("sliced_wasserstein: n_projections must be positive");
  const std::size_t d = a.dim;
  const std::size_t n = a.n;
  std::vector<double> pa(n), pb(n), theta(d);
  auto project = [&](const PointCloud& c, std::vector<double>& out) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto x = c.point(i);
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) s += x[k] * theta[k];
      out[i] = s;
    }
    std::sort(out.begin(), out.end());
  };
  if (d == 1) {
    theta[0] = 1.0;
    project(a, pa);
    project(b, pb);
    return root(sorted_cost(pa, pb, p), p);
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  double total = 0.0;
  for (std::size_t m = 0; m < n_projections; ++m) {
    double len = 0.0;
    do {
      len = 0.0;
      for (auto& c : theta) {
        c = gauss(rng);
        len += c * c;
      }
    } while (!(len > 0.0));
    len = std::sqrt(len);
    for (auto& c : theta) c /= len;
    project(a, pa);
    project(b, pb);
    total += sorted_cost(pa, pb, p);
  }
  return root(total / static_cast<double>(n_projections), p);
}

double StabilitySeries::max_ratio() const {
  double m = 0.0;
  for (const auto& pt : points) m = std::max(m, pt.ratio);
  return m;
}

StabilitySeries stability_ratio(const Trajectory& a, const Trajectory& b, double p, Phase phase,
                                const StabilityOptions& options) {
  if (a.snapshots.empty() || a.snapshots.size() != b.snapshots.size()) {
    throw DomainError("stability_ratio: trajectories do not have matching snapshots");
  }
  StabilitySeries out;
  out.sliced = a.snapshots.front().ensemble.size() > options.max_n;
  if (out.sliced && !options.allow_sliced) {
    throw DomainError("stability_ratio: N exceeds the exact transport limit and the sliced fallback is off");
  }
  auto distance = [&](const Ensemble& x, const Ensemble& y) {
    const auto ca = point_cloud(x, phase);
    const auto cb = point_cloud(y, phase);
    if (out.sliced) return sliced_wasserstein(ca, cb, p, options.n_projections, options.seed);
    return wasserstein_exact(ca, cb, p, options.max_n).first;
  };
  double w0 = 0.0;
  for (std::size_t s = 0; s < a.snapshots.size(); ++s) {
    const auto& sa = a.snapshots[s];
    const auto& sb = b.snapshots[s];
    if (sa.t != sb.t) throw DomainError("stability_ratio: snapshot times are not aligned");
    const double w = distance(sa.ensemble, sb.ensemble);
    if (s == 0) {
      if (!(w > 0.0)) throw DomainError("stability_ratio: initial distance is zero");
      w0 = w;
    }
    out.points.push_back({sa.t, w, w / w0});
  }
  return out;
}

}  // namespace cskin
