// latent.hpp -- PCA over reverb features, interpolation, and sampling from
// the 2D principal plane.
#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "reverbkit/common.hpp"
#include "reverbkit/rng.hpp"

namespace reverbkit {

struct PcaModel {
  std::vector<double> mean;        // D
  Matrix components;               // k x D, rows orthonormal, by descending variance
  std::vector<double> variances;   // k, non-increasing
  std::size_t effective_rank = 0;  // eigenvalues meaningfully above zero
  // Bounding box of the training projections onto the first two components;
  // the default sampling region.
  std::array<double, 2> proj_min{0.0, 0.0};
  std::array<double, 2> proj_max{0.0, 0.0};

  std::size_t dim() const { return mean.size(); }
  std::size_t k() const { return components.rows; }
};

// Eigendecomposition of a symmetric matrix (row-major d x d) by cyclic Jacobi
// rotations. Eigenvectors come back as columns of `vectors`, paired with
// `values`; both unsorted.
void symmetric_eigen(std::vector<double> a, std::size_t d, std::vector<double>& values,
                     std::vector<double>& vectors);

// Principal axes of N x D feature rows by descending explained variance.
// Sign convention: the largest-magnitude entry of each component is positive.
// Requires N >= 2 and 1 <= k <= min(N-1, D); rank deficiency beyond k is
// reported via effective_rank, with the surplus axes kept but meaningless.
PcaModel pca_fit(const Matrix& features, std::size_t k);

std::vector<double> pca_project(const PcaModel& pca, const std::vector<double>& c);
std::vector<double> pca_lift(const PcaModel& pca, const std::vector<double>& z);

// Exact affine combination (1-alpha)*c1 + alpha*c2; alpha must be in [0, 1].
// alpha == 0 and alpha == 1 return the endpoints bit for bit.
std::vector<double> interpolate(const std::vector<double>& c1, const std::vector<double>& c2,
                                double alpha);

struct PlaneRegion {
  std::array<double, 2> lo{-1.0, -1.0};
  std::array<double, 2> hi{1.0, 1.0};
};

PlaneRegion default_region(const PcaModel& pca);

// Features lifted from a regular nx x ny grid over the first two principal
// coordinates (single-point axes sit at the region midpoint), or from uniform
// random draws. Both require k >= 2.
std::vector<std::vector<double>> sample_plane_grid(const PcaModel& pca, const PlaneRegion& region,
                                                   std::size_t nx, std::size_t ny);
std::vector<std::vector<double>> sample_plane_random(const PcaModel& pca,
                                                     const PlaneRegion& region,
                                                     std::size_t count, Rng& rng);

}  // namespace reverbkit
