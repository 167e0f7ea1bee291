// serialize.hpp -- binary file formats. All three share one convention:
// 4-byte magic, little-endian u32 fields, optional JSON header, then raw
// little-endian float32 blobs.
//
//   RVBM  model checkpoint: magic, version u32, header-length u32, JSON
//         header {config, params:[{name, rows, cols}]}, parameter blobs in
//         header order.
//   RVBF  reverb feature: magic, dim u32, dim float32 values.
//   RVBP  PCA model: magic, version u32, header-length u32, JSON header
//         {dim, k, effective_rank, proj_min, proj_max}, then mean (dim),
//         components (k*dim), variances (k) blobs.
#pragma once

#include <string>
#include <vector>

#include "reverbkit/latent.hpp"
#include "reverbkit/model.hpp"

namespace reverbkit {

void save_model(const std::string& path, const ReverbModel& model);
ReverbModel load_model(const std::string& path);

void save_feature(const std::string& path, const std::vector<double>& feature);
std::vector<double> load_feature(const std::string& path);

void save_pca(const std::string& path, const PcaModel& pca);
PcaModel load_pca(const std::string& path);

}  // namespace reverbkit
