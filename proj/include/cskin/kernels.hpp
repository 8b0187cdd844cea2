#pragma once

// Pairwise O(N^2) kernels of the alignment model.
//
// Every kernel comes in two flavours. The reference version is a plain
// scalar loop over unordered pairs (i, j), i < j, in row-major order, and
// applies each pair contribution antisymmetrically. The parallel version
// splits the rows into a fixed number of blocks (independent of the thread
// count), accumulates each block into its own buffer with SIMD inner loops,
// and reduces the buffers in block order. Results are therefore identical
// for any OMP_NUM_THREADS, and agree with the reference to roundoff.

#include <cstddef>
#include <span>

#include "cskin/model.hpp"

namespace cskin::kernels {

/// Flat view of a particle state: row-major N x dim positions and velocities.
struct StateView {
  std::size_t dim;
  std::size_t n;
  std::span<const double> x;
  std::span<const double> v;
};

inline StateView view(const Ensemble& ens) {
  return {ens.dim(), ens.size(), ens.positions(), ens.velocities()};
}

/// out_i = (kappa/N) sum_j phi_ij (v_j - v_i); out has N * dim entries.
void acceleration_reference(const StateView& s, const ModelParams& params, std::span<double> out);
void acceleration_parallel(const StateView& s, const ModelParams& params, std::span<double> out);
void acceleration(const StateView& s, const ModelParams& params, KernelMode mode,
                  std::span<double> out);

/// S = sum_{i<j} phi_ij |v_i - v_j|^2 over unordered pairs.
double pair_dissipation_reference(const StateView& s, double beta);
double pair_dissipation_parallel(const StateView& s, double beta);
double pair_dissipation(const StateView& s, double beta, KernelMode mode);

/// Number of row blocks used by the parallel kernels for n particles.
std::size_t block_count(std::size_t n);

int max_threads();

}  // namespace cskin::kernels
