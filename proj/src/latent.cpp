#include "reverbkit/latent.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace reverbkit {

void symmetric_eigen(std::vector<double> a, std::size_t d, std::vector<double>& values,
                     std::vector<double>& vectors) {
  if (a.size() != d * d) throw std::invalid_argument("symmetric_eigen: bad matrix size");
  vectors.assign(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) vectors[i * d + i] = 1.0;

  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0, diag = 0.0;
    for (std::size_t p = 0; p < d; ++p) {
      diag += std::abs(a[p * d + p]);
      for (std::size_t q = p + 1; q < d; ++q) off += 2.0 * a[p * d + q] * a[p * d + q];
    }
    if (off <= 1e-24 * std::max(diag * diag, 1e-300)) break;

    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        const double apq = a[p * d + q];
        if (apq == 0.0) continue;
        const double app = a[p * d + p], aqq = a[q * d + q];
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (std::size_t i = 0; i < d; ++i) {
          const double aip = a[i * d + p], aiq = a[i * d + q];
          a[i * d + p] = c * aip - s * aiq;
          a[i * d + q] = s * aip + c * aiq;
        }
        for (std::size_t i = 0; i < d; ++i) {
          const double api = a[p * d + i], aqi = a[q * d + i];
          a[p * d + i] = c * api - s * aqi;
          a[q * d + i] = s * api + c * aqi;
        }
        for (std::size_t i = 0; i < d; ++i) {
          const double vip = vectors[i * d + p], viq = vectors[i * d + q];
          vectors[i * d + p] = c * vip - s * viq;
          vectors[i * d + q] = s * vip + c * viq;
        }
      }
    }
  }
  values.resize(d);
  for (std::size_t i = 0; i < d; ++i) values[i] = a[i * d + i];
}

PcaModel pca_fit(const Matrix& features, std::size_t k) {
  const std::size_t n = features.rows, d = features.cols;
  if (n < 2) throw std::invalid_argument("pca_fit: need at least two feature rows");
  if (k < 1 || k > std::min(n - 1, d)) {
    throw std::invalid_argument("pca_fit: k must be in [1, min(N-1, D)]");
  }

  PcaModel pca;
  pca.mean.assign(d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) pca.mean[c] += features.at(r, c);
  }
  for (double& v : pca.mean) v /= static_cast<double>(n);

  std::vector<double> cov(d * d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < d; ++i) {
      const double xi = features.at(r, i) - pca.mean[i];
      if (xi == 0.0) continue;
      for (std::size_t j = i; j < d; ++j) {
        cov[i * d + j] += xi * (features.at(r, j) - pca.mean[j]);
      }
    }
  }
  const double norm = 1.0 / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      cov[i * d + j] *= norm;
      cov[j * d + i] = cov[i * d + j];
    }
  }

  std::vector<double> eigvals, eigvecs;
  symmetric_eigen(std::move(cov), d, eigvals, eigvecs);

  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return eigvals[a] > eigvals[b]; });

  pca.components = Matrix(k, d);
  pca.variances.resize(k);
  const double lambda_max = std::max(eigvals[order[0]], 0.0);
  pca.effective_rank = 0;
  for (std::size_t row = 0; row < k; ++row) {
    const std::size_t e = order[row];
    pca.variances[row] = std::max(eigvals[e], 0.0);
    if (pca.variances[row] > 1e-12 * std::max(lambda_max, 1e-300)) ++pca.effective_rank;
    // Eigenvectors are columns of eigvecs; flip so the largest entry is positive.
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double mag = std::abs(eigvecs[i * d + e]);
      if (mag > best) {
        best = mag;
        arg = i;
      }
    }
    const double flip = eigvecs[arg * d + e] < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < d; ++i) pca.components.at(row, i) = flip * eigvecs[i * d + e];
  }

  if (k >= 2) {
    bool first = true;
    for (std::size_t r = 0; r < n; ++r) {
      std::vector<double> row(d);
      for (std::size_t c = 0; c < d; ++c) row[c] = features.at(r, c);
      const std::vector<double> z = pca_project(pca, row);
      for (int axis = 0; axis < 2; ++axis) {
        if (first) {
          pca.proj_min[axis] = pca.proj_max[axis] = z[static_cast<std::size_t>(axis)];
        } else {
          pca.proj_min[axis] = std::min(pca.proj_min[axis], z[static_cast<std::size_t>(axis)]);
          pca.proj_max[axis] = std::max(pca.proj_max[axis], z[static_cast<std::size_t>(axis)]);
        }
      }
      first = false;
    }
  }
  return pca;
}

std::vector<double> pca_project(const PcaModel& pca, const std::vector<double>& c) {
  if (c.size() != pca.dim()) throw std::invalid_argument("pca_project: dimension mismatch");
  std::vector<double> z(pca.k(), 0.0);
  for (std::size_t row = 0; row < pca.k(); ++row) {
    double acc = 0.0;
    for (std::size_t i = 0; i < pca.dim(); ++i) {
      acc += pca.components.at(row, i) * (c[i] - pca.mean[i]);
    }
    z[row] = acc;
  }
  return z;
}

std::vector<double> pca_lift(const PcaModel& pca, const std::vector<double>& z) {
  if (z.size() != pca.k()) throw std::invalid_argument("pca_lift: dimension mismatch");
  std::vector<double> c = pca.mean;
  for (std::size_t row = 0; row < pca.k(); ++row) {
    if (z[row] == 0.0) continue;
    for (std::size_t i = 0; i < pca.dim(); ++i) c[i] += pca.components.at(row, i) * z[row];
  }
  return c;
}

std::vector<double> interpolate(const std::vector<double>& c1, const std::vector<double>& c2,
                                double alpha) {
  if (c1.size() != c2.size()) throw std::invalid_argument("interpolate: dimension mismatch");
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("interpolate: alpha must be in [0, 1]");
  }
  if (alpha == 0.0) return c1;
  if (alpha == 1.0) return c2;
  std::vector<double> out(c1.size());
  for (std::size_t i = 0; i < c1.size(); ++i) {
    out[i] = (1.0 - alpha) * c1[i] + alpha * c2[i];
  }
  return out;
}

PlaneRegion default_region(const PcaModel& pca) {
  PlaneRegion r;
  r.lo = pca.proj_min;
  r.hi = pca.proj_max;
  return r;
}

namespace {
void require_plane(const PcaModel& pca) {
  if (pca.k() < 2) throw std::invalid_argument("sample_plane: PCA must keep at least 2 components");
}

std::vector<double> lift_xy(const PcaModel& pca, double z0, double z1) {
  std::vector<double> z(pca.k(), 0.0);
  z[0] = z0;
  z[1] = z1;
  return pca_lift(pca, z);
}
}  // namespace

std::vector<std::vector<double>> sample_plane_grid(const PcaModel& pca, const PlaneRegion& region,
                                                   std::size_t nx, std::size_t ny) {
  require_plane(pca);
  if (nx == 0 || ny == 0) throw std::invalid_argument("sample_plane: empty grid");
  auto axis_value = [](double lo, double hi, std::size_t i, std::size_t n) {
    if (n == 1) return (lo + hi) / 2.0;
    return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  };
  std::vector<std::vector<double>> out;
  out.reserve(nx * ny);
  for (std::size_t iy = 0; iy < ny; ++iy) {
    for (std::size_t ix = 0; ix < nx; ++ix) {
      out.push_back(lift_xy(pca, axis_value(region.lo[0], region.hi[0], ix, nx),
                            axis_value(region.lo[1], region.hi[1], iy, ny)));
    }
  }
  return out;
}

std::vector<std::vector<double>> sample_plane_random(const PcaModel& pca,
                                                     const PlaneRegion& region,
                                                     std::size_t count, Rng& rng) {
  require_plane(pca);
  std::vector<std::vector<double>> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double z0 = rng.uniform(region.lo[0], region.hi[0]);
    const double z1 = rng.uniform(region.lo[1], region.hi[1]);
    out.push_back(lift_xy(pca, z0, z1));
  }
  return out;
}

}  // namespace reverbkit
