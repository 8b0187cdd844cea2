#include "cskin/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <type_traits>
#include <vector>

#include "weight.hpp"

namespace cskin::kernels {

namespace {

void check(const StateView& s, std::span<double> out) {
  if (s.x.size() != s.n * s.dim || s.v.size() != s.n * s.dim) {
    throw DomainError("kernel: state buffers do not match N * dim");
  }
  if (out.size() != s.n * s.dim) throw DomainError("kernel: output buffer has the wrong size");
}

// Component-major copy of a state: comp k of particle i sits at [k * n + i].
struct Soa {
  std::size_t dim = 0;
  std::size_t n = 0;
  std::vector<double> x;
  std::vector<double> v;

  void load(const StateView& s) {
    dim = s.dim;
    n = s.n;
    x.resize(dim * n);
    v.resize(dim * n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < dim; ++k) {
        x[k * n + i] = s.x[i * dim + k];
        v[k * n + i] = s.v[i * dim + k];
      }
    }
  }
};

// Row ranges [bounds[b], bounds[b+1]) holding roughly equal pair counts.
std::vector<std::size_t> block_bounds(std::size_t n) {
  const std::size_t blocks = block_count(n);
  const double total = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  std::vector<std::size_t> bounds{0};
  double acc = 0.0;
  std::size_t b = 1;
  for (std::size_t i = 0; i < n && b < blocks; ++i) {
    acc += static_cast<double>(n - 1 - i);
    if (acc >= total * static_cast<double>(b) / static_cast<double>(blocks)) {
      bounds.push_back(i + 1);
      ++b;
    }
  }
  if (bounds.back() != n) bounds.push_back(n);
  return bounds;
}

template <int Dim>
struct DimTag {
  static constexpr int value = Dim;
};

template <class F>
void with_dim(std::size_t dim, F&& f) {
  switch (dim) {
    case 1: f(DimTag<1>{}); break;
    case 2: f(DimTag<2>{}); break;
    case 3: f(DimTag<3>{}); break;
    default: f(DimTag<0>{}); break;
  }
}

// Accumulates the pairs (i, j), i in [i0, i1), j > i, into buf (component
// major, n entries per component). Dim == 0 selects the runtime-dim path.
template <int Dim, class W>
void block_acceleration(const Soa& s, W weight, std::size_t i0, std::size_t i1, double* buf) {
  const std::size_t n = s.n;
  if constexpr (Dim == 0) {
    const std::size_t d = s.dim;
    std::vector<double> ai(d);
    for (std::size_t i = i0; i < i1; ++i) {
      std::fill(ai.begin(), ai.end(), 0.0);
      for (std::size_t j = i + 1; j < n; ++j) {
        double r2 = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
          const double dx = s.x[k * n + j] - s.x[k * n + i];
          r2 += dx * dx;
        }
        const double w = weight(1.0 + r2);
        for (std::size_t k = 0; k < d; ++k) {
          const double f = w * (s.v[k * n + j] - s.v[k * n + i]);
          ai[k] += f;
          buf[k * n + j] -= f;
        }
      }
      for (std::size_t k = 0; k < d; ++k) buf[k * n + i] += ai[k];
    }
  } else {
    const double* X0 = s.x.data();
    const double* X1 = Dim > 1 ? s.x.data() + n : nullptr;
    const double* X2 = Dim > 2 ? s.x.data() + 2 * n : nullptr;
    const double* V0 = s.v.data();
    const double* V1 = Dim > 1 ? s.v.data() + n : nullptr;
    const double* V2 = Dim > 2 ? s.v.data() + 2 * n : nullptr;
    double* B0 = buf;
    double* B1 = Dim > 1 ? buf + n : nullptr;
    double* B2 = Dim > 2 ? buf + 2 * n : nullptr;
    for (std::size_t i = i0; i < i1; ++i) {
      const double xi0 = X0[i], vi0 = V0[i];
      const double xi1 = Dim > 1 ? X1[i] : 0.0, vi1 = Dim > 1 ? V1[i] : 0.0;
      const double xi2 = Dim > 2 ? X2[i] : 0.0, vi2 = Dim > 2 ? V2[i] : 0.0;
      double a0 = 0.0, a1 = 0.0, a2 = 0.0;
#pragma omp simd reduction(+ : a0, a1, a2)
      for (std::size_t j = i + 1; j < n; ++j) {
        const double d0 = X0[j] - xi0;
        double r2 = d0 * d0;
        if constexpr (Dim > 1) {
          const double d1 = X1[j] - xi1;
          r2 += d1 * d1;
        }
        if constexpr (Dim > 2) {
          const double d2 = X2[j] - xi2;
          r2 += d2 * d2;
        }
        const double w = weight(1.0 + r2);
        const double f0 = w * (V0[j] - vi0);
        a0 += f0;
        B0[j] -= f0;
        if constexpr (Dim > 1) {
          const double f1 = w * (V1[j] - vi1);
          a1 += f1;
          B1[j] -= f1;
        }
        if constexpr (Dim > 2) {
          const double f2 = w * (V2[j] - vi2);
          a2 += f2;
          B2[j] -= f2;
        }
      }
      B0[i] += a0;
      if constexpr (Dim > 1) B1[i] += a1;
      if constexpr (Dim > 2) B2[i] += a2;
    }
  }
}

template <int Dim, class W>
double block_dissipation(const Soa& s, W weight, std::size_t i0, std::size_t i1) {
  const std::size_t n = s.n;
  double total = 0.0;
  if constexpr (Dim == 0) {
    const std::size_t d = s.dim;
    for (std::size_t i = i0; i < i1; ++i) {
      double row = 0.0;
      for (std::size_t j = i + 1; j < n; ++j) {
        double r2 = 0.0, dv2 = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
          const double dx = s.x[k * n + j] - s.x[k * n + i];
          const double dv = s.v[k * n + j] - s.v[k * n + i];
          r2 += dx * dx;
          dv2 += dv * dv;
        }
        row += weight(1.0 + r2) * dv2;
      }
      total += row;
    }
  } else {
    const double* X0 = s.x.data();
    const double* X1 = Dim > 1 ? s.x.data() + n : nullptr;
    const double* X2 = Dim > 2 ? s.x.data() + 2 * n : nullptr;
    const double* V0 = s.v.data();
    const double* V1 = Dim > 1 ? s.v.data() + n : nullptr;
    const double* V2 = Dim > 2 ? s.v.data() + 2 * n : nullptr;
    for (std::size_t i = i0; i < i1; ++i) {
      const double xi0 = X0[i], vi0 = V0[i];
      const double xi1 = Dim > 1 ? X1[i] : 0.0, vi1 = Dim > 1 ? V1[i] : 0.0;
      const double xi2 = Dim > 2 ? X2[i] : 0.0, vi2 = Dim > 2 ? V2[i] : 0.0;
      double row = 0.0;
#pragma omp simd reduction(+ : row)
      for (std::size_t j = i + 1; j < n; ++j) {
        const double d0 = X0[j] - xi0;
        const double u0 = V0[j] - vi0;
        double r2 = d0 * d0;
        double dv2 = u0 * u0;
        if constexpr (Dim > 1) {
          const double d1 = X1[j] - xi1;
          const double u1 = V1[j] - vi1;
          r2 += d1 * d1;
          dv2 += u1 * u1;
        }
        if constexpr (Dim > 2) {
          const double d2 = X2[j] - xi2;
          const double u2 = V2[j] - vi2;
          r2 += d2 * d2;
          dv2 += u2 * u2;
        }
        row += weight(1.0 + r2) * dv2;
      }
      total += row;
    }
  }
  return total;
}

struct Workspace {
  Soa soa;
  std::vector<std::vector<double>> buffers;
};

Workspace& workspace() {
  thread_local Workspace ws;
  return ws;
}

}  // namespace

std::size_t block_count(std::size_t n) { return std::clamp<std::size_t>(n / 32, 1, 64); }

int max_threads() { return omp_get_max_threads(); }

void acceleration_reference(const StateView& s, const ModelParams& params, std::span<double> out) {
  check(s, out);
  const std::size_t d = s.dim;
  const std::size_t n = s.n;
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double r2 = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double dx = s.x[j * d + k] - s.x[i * d + k];
        r2 += dx * dx;
      }
      const double w = comm_weight_sq(r2, params.beta());
      for (std::size_t k = 0; k < d; ++k) {
        const double f = w * (s.v[j * d + k] - s.v[i * d + k]);
        out[i * d + k] += f;
        out[j * d + k] -= f;
      }
    }
  }
  const double scale = params.kappa() / static_cast<double>(n);
  for (double& a : out) a *= scale;
}

void acceleration_parallel(const StateView& s, const ModelParams& params, std::span<double> out) {
  check(s, out);
  const std::size_t d = s.dim;
  const std::size_t n = s.n;
  Workspace& ws = workspace();
  ws.soa.load(s);
  const auto bounds = block_bounds(n);
  const std::size_t blocks = bounds.size() - 1;
  ws.buffers.resize(blocks);
  for (auto& b : ws.buffers) b.assign(d * n, 0.0);

  detail::with_weight(params.beta(), [&](auto weight) {
    with_dim(d, [&](auto tag) {
      constexpr int Dim = decltype(tag)::value;
#pragma omp parallel for schedule(dynamic, 1)
      for (std::size_t b = 0; b < blocks; ++b) {
        block_acceleration<Dim>(ws.soa, weight, bounds[b], bounds[b + 1], ws.buffers[b].data());
      }
    });
  });

  const double scale = params.kappa() / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      double a = 0.0;
      for (std::size_t b = 0; b < blocks && bounds[b] <= i; ++b) a += ws.buffers[b][k * n + i];
      out[i * d + k] = a * scale;
    }
  }
}

void acceleration(const StateView& s, const ModelParams& params, KernelMode mode,
                  std::span<double> out) {
  if (mode == KernelMode::Reference) {
    acceleration_reference(s, params, out);
  } else {
    acceleration_parallel(s, params, out);
  }
}

double pair_dissipation_reference(const StateView& s, double beta) {
  const std::size_t d = s.dim;
  const std::size_t n = s.n;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double r2 = 0.0, dv2 = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double dx = s.x[j * d + k] - s.x[i * d + k];
        const double dv = s.v[j * d + k] - s.v[i * d + k];
        r2 += dx * dx;
        dv2 += dv * dv;
      }
      total += comm_weight_sq(r2, beta) * dv2;
    }
  }
  return total;
}

double pair_dissipation_parallel(const StateView& s, double beta) {
  const std::size_t n = s.n;
  Workspace& ws = workspace();
  ws.soa.load(s);
  const auto bounds = block_bounds(n);
  const std::size_t blocks = bounds.size() - 1;
  std::vector<double> partial(blocks, 0.0);

  detail::with_weight(beta, [&](auto weight) {
    with_dim(s.dim, [&](auto tag) {
      constexpr int Dim = decltype(tag)::value;
#pragma omp parallel for schedule(dynamic, 1)
      for (std::size_t b = 0; b < blocks; ++b) {
        partial[b] = block_dissipation<Dim>(ws.soa, weight, bounds[b], bounds[b + 1]);
      }
    });
  });

  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

double pair_dissipation(const StateView& s, double beta, KernelMode mode) {
  return mode == KernelMode::Reference ? pair_dissipation_reference(s, beta)
                                       : pair_dissipation_parallel(s, beta);
}

}  // namespace cskin::kernels
