#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "reverbkit/latent.hpp"
#include "reverbkit/model.hpp"
#include "reverbkit/rng.hpp"
#include "reverbkit/serialize.hpp"

using namespace reverbkit;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path(temp_path(name)) {}
  ~TempFile() { std::filesystem::remove(path); }
};

}  // namespace

TEST_CASE("model checkpoints round trip through float32") {
  ModelConfig cfg;
  cfg.n_mels = 12;
  cfg.hidden = 6;
  cfg.feature_dim = 3;
  const ReverbModel model = make_model(cfg, 123);

  TempFile f("rk_model.rvbm");
  save_model(f.path, model);
  const ReverbModel loaded = load_model(f.path);

  CHECK(loaded.cfg.n_mels == cfg.n_mels);
  CHECK(loaded.cfg.hidden == cfg.hidden);
  CHECK(loaded.cfg.feature_dim == cfg.feature_dim);
  CHECK(loaded.cfg.conv_kernel == cfg.conv_kernel);
  CHECK(loaded.cfg.mel_offset == cfg.mel_offset);
  CHECK(loaded.cfg.mel_scale == cfg.mel_scale);

  REQUIRE(loaded.params.size() == model.params.size());
  for (std::size_t i = 0; i < model.params.size(); ++i) {
    CHECK(loaded.params[i].first == model.params[i].first);
    const auto& a = model.params[i].second;
    const auto& b = loaded.params[i].second;
    REQUIRE(a->rows == b->rows);
    REQUIRE(a->cols == b->cols);
    for (std::size_t j = 0; j < a->size(); ++j) {
      // Storage is float32: exact to float precision, idempotent after that.
      CHECK(b->value[j] == static_cast<double>(static_cast<float>(a->value[j])));
    }
    CHECK(b->requires_grad);
  }
}

TEST_CASE("a second save of a loaded model is byte-identical") {
  ModelConfig cfg;
  cfg.n_mels = 10;
  cfg.hidden = 4;
  cfg.feature_dim = 2;
  const ReverbModel model = make_model(cfg, 42);

  TempFile f1("rk_model_a.rvbm");
  TempFile f2("rk_model_b.rvbm");
  save_model(f1.path, model);
  const ReverbModel loaded = load_model(f1.path);
  save_model(f2.path, loaded);
  CHECK(slurp(f1.path) == slurp(f2.path));
}

TEST_CASE("loaded models produce the outputs of their float32 weights") {
  ModelConfig cfg;
  cfg.n_mels = 10;
  cfg.hidden = 4;
  cfg.feature_dim = 2;
  const ReverbModel model = make_model(cfg, 9);

  TempFile f("rk_model_c.rvbm");
  save_model(f.path, model);
  const ReverbModel loaded = load_model(f.path);

  Rng rng(11);
  Matrix mel(8, 10);
  for (auto& v : mel.data) v = rng.uniform(-12.0, -4.0);

  auto c1 = encode_graph(model, mel);
  auto c2 = encode_graph(loaded, mel);
  for (std::size_t i = 0; i < c1->size(); ++i)
    CHECK(c2->value[i] == doctest::Approx(c1->value[i]).epsilon(1e-4));
}

TEST_CASE("feature files hold float32 values exactly") {
  const std::vector<double> feature = {0.5, -0.25, 1.0, 0.0, -3.5};
  TempFile f("rk_feat.rvbf");
  save_feature(f.path, feature);
  const auto loaded = load_feature(f.path);
  REQUIRE(loaded.size() == feature.size());
  for (std::size_t i = 0; i < feature.size(); ++i) CHECK(loaded[i] == feature[i]);
}

TEST_CASE("pca models survive a save/load cycle") {
  Rng rng(13);
  Matrix cloud(40, 4);
  for (auto& v : cloud.data) v = rng.uniform(-2.0, 2.0);
  const PcaModel pca = pca_fit(cloud, 3);

  TempFile f("rk_pca.rvbp");
  save_pca(f.path, pca);
  const PcaModel loaded = load_pca(f.path);

  CHECK(loaded.dim() == pca.dim());
  CHECK(loaded.k() == pca.k());
  CHECK(loaded.effective_rank == pca.effective_rank);
  CHECK(loaded.proj_min[0] == pca.proj_min[0]);
  CHECK(loaded.proj_max[1] == pca.proj_max[1]);
  for (std::size_t i = 0; i < pca.mean.size(); ++i)
    CHECK(loaded.mean[i] == static_cast<double>(static_cast<float>(pca.mean[i])));
  for (std::size_t i = 0; i < pca.components.data.size(); ++i)
    CHECK(loaded.components.data[i] ==
          static_cast<double>(static_cast<float>(pca.components.data[i])));
  for (std::size_t i = 0; i < pca.variances.size(); ++i)
    CHECK(loaded.variances[i] == static_cast<double>(static_cast<float>(pca.variances[i])));
}

TEST_CASE("corrupt files are rejected with clear errors") {
  const std::vector<double> feature = {1.0, 2.0};
  TempFile f("rk_bad.rvbf");
  save_feature(f.path, feature);

  // Flip the magic.
  {
    std::fstream io(f.path, std::ios::in | std::ios::out | std::ios::binary);
    io.seekp(0);
    io.write("NOPE", 4);
  }
  CHECK_THROWS_AS(load_feature(f.path), std::runtime_error);

  // Truncate mid-blob.
  save_feature(f.path, feature);
  std::filesystem::resize_file(f.path, 10);
  CHECK_THROWS_AS(load_feature(f.path), std::runtime_error);

  CHECK_THROWS_AS(load_feature(temp_path("rk_missing.rvbf")), std::runtime_error);
  CHECK_THROWS_AS(load_model(temp_path("rk_missing.rvbm")), std::runtime_error);
  CHECK_THROWS_AS(load_pca(temp_path("rk_missing.rvbp")), std::runtime_error);
}

TEST_CASE("model loader rejects a feature file and vice versa") {
  ModelConfig cfg;
  cfg.n_mels = 8;
  cfg.hidden = 4;
  cfg.feature_dim = 2;
  const ReverbModel model = make_model(cfg, 1);
  TempFile fm("rk_cross.rvbm");
  save_model(fm.path, model);
  CHECK_THROWS_AS(load_feature(fm.path), std::runtime_error);
  CHECK_THROWS_AS(load_pca(fm.path), std::runtime_error);

  TempFile ff("rk_cross.rvbf");
  save_feature(ff.path, {1.0});
  CHECK_THROWS_AS(load_model(ff.path), std::runtime_error);
}
