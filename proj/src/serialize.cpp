#include "reverbkit/serialize.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace reverbkit {

namespace {

using nlohmann::json;

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw std::runtime_error(path + ": truncated file");
  }
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_f32_blob(std::ostream& out, const std::vector<double>& values) {
  std::vector<unsigned char> bytes(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const float f = static_cast<float>(values[i]);
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    bytes[i * 4 + 0] = static_cast<unsigned char>(u);
    bytes[i * 4 + 1] = static_cast<unsigned char>(u >> 8);
    bytes[i * 4 + 2] = static_cast<unsigned char>(u >> 16);
    bytes[i * 4 + 3] = static_cast<unsigned char>(u >> 24);
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

std::vector<double> read_f32_blob(std::istream& in, std::size_t count, const std::string& path) {
  std::vector<unsigned char> bytes(count * 4);
  if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()))) {
    throw std::runtime_error(path + ": truncated float payload");
  }
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint32_t u = static_cast<std::uint32_t>(bytes[i * 4]) |
                            (static_cast<std::uint32_t>(bytes[i * 4 + 1]) << 8) |
                            (static_cast<std::uint32_t>(bytes[i * 4 + 2]) << 16) |
                            (static_cast<std::uint32_t>(bytes[i * 4 + 3]) << 24);
    float f;
    std::memcpy(&f, &u, 4);
    values[i] = static_cast<double>(f);
  }
  return values;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open");
  return in;
}

void expect_magic(std::istream& in, const char* magic, const std::string& path) {
  char got[4];
  if (!in.read(got, 4) || std::memcmp(got, magic, 4) != 0) {
    throw std::runtime_error(path + ": not a " + magic + " file");
  }
}

json header_json(std::istream& in, const std::string& path) {
  const std::uint32_t len = read_u32(in, path);
  std::string text(len, '\0');
  if (!in.read(text.data(), len)) throw std::runtime_error(path + ": truncated header");
  json h = json::parse(text, nullptr, false);
  if (h.is_discarded()) throw std::runtime_error(path + ": malformed header JSON");
  return h;
}

void write_header(std::ostream& out, const json& h) {
  const std::string text = h.dump();
  write_u32(out, static_cast<std::uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

constexpr std::uint32_t kFormatVersion = 1;

}  // namespace

void save_model(const std::string& path, const ReverbModel& model) {
  std::ofstream out = open_out(path);
  out.write("RVBM", 4);
  write_u32(out, kFormatVersion);

  json header;
  header["config"] = {{"n_mels", model.cfg.n_mels},
                      {"hidden", model.cfg.hidden},
                      {"feature_dim", model.cfg.feature_dim},
                      {"conv_kernel", model.cfg.conv_kernel},
                      {"mel_offset", model.cfg.mel_offset},
                      {"mel_scale", model.cfg.mel_scale}};
  header["params"] = json::array();
  for (const auto& [name, tensor] : model.params) {
    header["params"].push_back({{"name", name}, {"rows", tensor->rows}, {"cols", tensor->cols}});
  }
  write_header(out, header);
  for (const auto& [name, tensor] : model.params) write_f32_blob(out, tensor->value);
  if (!out) throw std::runtime_error(path + ": write failed");
}

ReverbModel load_model(const std::string& path) {
  std::ifstream in = open_in(path);
  expect_magic(in, "RVBM", path);
  const std::uint32_t version = read_u32(in, path);
  if (version != kFormatVersion) {
    throw std::runtime_error(path + ": unsupported checkpoint version " + std::to_string(version));
  }
  const json header = header_json(in, path);

  ModelConfig cfg;
  try {
    const json& c = header.at("config");
    cfg.n_mels = c.at("n_mels").get<std::size_t>();
    cfg.hidden = c.at("hidden").get<std::size_t>();
    cfg.feature_dim = c.at("feature_dim").get<std::size_t>();
    cfg.conv_kernel = c.at("conv_kernel").get<std::size_t>();
    cfg.mel_offset = c.at("mel_offset").get<double>();
    cfg.mel_scale = c.at("mel_scale").get<double>();
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": bad checkpoint header: " + e.what());
  }

  ReverbModel model;
  model.cfg = cfg;
  if (!header.contains("params") || !header["params"].is_array()) {
    throw std::runtime_error(path + ": checkpoint header lists no parameters");
  }
  for (const json& p : header["params"]) {
    const std::string name = p.at("name").get<std::string>();
    const std::size_t rows = p.at("rows").get<std::size_t>();
    const std::size_t cols = p.at("cols").get<std::size_t>();
    Matrix m(rows, cols);
    m.data = read_f32_blob(in, rows * cols, path);
    model.params.emplace_back(name, ad::param(m));
  }
  return model;
}

void save_feature(const std::string& path, const std::vector<double>& feature) {
  std::ofstream out = open_out(path);
  out.write("RVBF", 4);
  write_u32(out, static_cast<std::uint32_t>(feature.size()));
  write_f32_blob(out, feature);
  if (!out) throw std::runtime_error(path + ": write failed");
}

std::vector<double> load_feature(const std::string& path) {
  std::ifstream in = open_in(path);
  expect_magic(in, "RVBF", path);
  const std::uint32_t dim = read_u32(in, path);
  return read_f32_blob(in, dim, path);
}

void save_pca(const std::string& path, const PcaModel& pca) {
  std::ofstream out = open_out(path);
  out.write("RVBP", 4);
  write_u32(out, kFormatVersion);
  json header;
  header["dim"] = pca.dim();
  header["k"] = pca.k();
  header["effective_rank"] = pca.effective_rank;
  header["proj_min"] = pca.proj_min;
  header["proj_max"] = pca.proj_max;
  write_header(out, header);
  write_f32_blob(out, pca.mean);
  write_f32_blob(out, pca.components.data);
  write_f32_blob(out, pca.variances);
  if (!out) throw std::runtime_error(path + ": write failed");
}

PcaModel load_pca(const std::string& path) {
  std::ifstream in = open_in(path);
  expect_magic(in, "RVBP", path);
  const std::uint32_t version = read_u32(in, path);
  if (version != kFormatVersion) {
    throw std::runtime_error(path + ": unsupported PCA file version " + std::to_string(version));
  }
  const json header = header_json(in, path);
  PcaModel pca;
  try {
    const std::size_t dim = header.at("dim").get<std::size_t>();
    const std::size_t k = header.at("k").get<std::size_t>();
    pca.effective_rank = header.at("effective_rank").get<std::size_t>();
    pca.proj_min = header.at("proj_min").get<std::array<double, 2>>();
    pca.proj_max = header.at("proj_max").get<std::array<double, 2>>();
    pca.mean = read_f32_blob(in, dim, path);
    pca.components = Matrix(k, dim);
    pca.components.data = read_f32_blob(in, k * dim, path);
    pca.variances = read_f32_blob(in, k, path);
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": bad PCA header: " + e.what());
  }
  return pca;
}

}  // namespace reverbkit
