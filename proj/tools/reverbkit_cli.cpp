// reverbkit_cli.cpp -- the `reverbkit` command line: room simulation, corpus
// synthesis, degradation, model training, latent-space tools, and objective
// evaluation behind one reproducible interface.
//
// Conventions shared by every subcommand:
//   * --config FILE loads a JSON object (or a previous run manifest, whose
//     inner "config" object is unwrapped); flags given explicitly win.
//   * A run manifest {"tool_version", "subcommand", "config"} is written next
//     to the primary output so any run can be replayed with --config alone.
//     Output destinations and execution knobs (--jobs, --only) are not part
//     of the config: a replay re-targets them freely without changing data.
//   * All randomness flows from --seed through derive_seed(seed, index), so
//     per-item results are independent of --jobs and of item order.
//   * Success prints a single-line JSON summary to stdout; failure prints a
//     single-line {"error": ...} to stderr and exits nonzero.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "reverbkit/baseline.hpp"
#include "reverbkit/common.hpp"
#include "reverbkit/degrade.hpp"
#include "reverbkit/latent.hpp"
#include "reverbkit/metrics.hpp"
#include "reverbkit/model.hpp"
#include "reverbkit/rir_analysis.hpp"
#include "reverbkit/rir_sim.hpp"
#include "reverbkit/rng.hpp"
#include "reverbkit/serialize.hpp"
#include "reverbkit/signal_ops.hpp"
#include "reverbkit/synth_speech.hpp"
#include "reverbkit/wav_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace reverbkit;

namespace {

// ---------------------------------------------------------------------------
// small utilities

/// Shortest decimal that round-trips the double, for deterministic CSV cells.
std::string num(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) {
    fs::create_directories(parent);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write " + path);
  }
  out << text;
  if (!out) {
    throw std::runtime_error("write failed: " + path);
  }
}

json load_json_file(const std::string& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

std::vector<json> load_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path);
  }
  std::vector<json> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      records.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

void write_jsonl(const std::string& path, const std::vector<json>& records) {
  std::string text;
  for (const json& r : records) {
    text += r.dump();
    text += '\n';
  }
  write_text_file(path, text);
}

/// Sorted regular files under `dir` with the given extension.
std::vector<std::string> list_files(const std::string& dir, const std::string& ext) {
  if (!fs::is_directory(dir)) {
    throw std::runtime_error(dir + " is not a directory");
  }
  std::vector<std::string> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ext) {
      out.push_back(entry.path().string());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// "lo:hi" or a single value; "inf" disables noise mixing where SNRs apply.
std::pair<double, double> parse_range(const std::string& text, const std::string& who) {
  try {
    const std::size_t colon = text.find(':');
    if (colon == std::string::npos) {
      const double v = std::stod(text);
      return {v, v};
    }
    const double lo = std::stod(text.substr(0, colon));
    const double hi = std::stod(text.substr(colon + 1));
    if (hi < lo) {
      throw std::invalid_argument("upper bound below lower bound");
    }
    return {lo, hi};
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument(who + ": expected 'lo:hi' or a single number, got '" + text + "'");
  }
}

double draw_in_range(double lo, double hi, Rng& rng) {
  if (lo == hi || !std::isfinite(lo) || !std::isfinite(hi)) {
    return lo;
  }
  return rng.uniform(lo, hi);
}

Matrix take_rows(const Matrix& m, std::size_t n) {
  Matrix out(n, m.cols);
  std::copy_n(m.data.begin(), n * m.cols, out.data.begin());
  return out;
}

/// Index-parallel loop; the first worker exception is rethrown after join.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body) {
  const int workers = std::clamp<int>(jobs, 1, static_cast<int>(std::max<std::size_t>(n, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          body(i);
        } catch (...) {
          std::scoped_lock lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::string zero_pad(std::size_t value, int width) {
  std::string s = std::to_string(value);
  while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
  return s;
}

// ---------------------------------------------------------------------------
// RIR files: float32 WAV plus a JSON metadata sidecar at <path>.json

json meta_to_json(const RirMeta& m) {
  return json{{"dims", {m.dims[0], m.dims[1], m.dims[2]}},
              {"src", {m.src.x, m.src.y, m.src.z}},
              {"mic", {m.mic.x, m.mic.y, m.mic.z}},
              {"alpha", m.alpha},
              {"max_order", m.max_order},
              {"seed", m.seed},
              {"fs", m.sample_rate}};
}

RirMeta meta_from_json(const json& j) {
  RirMeta m;
  const auto& d = j.at("dims");
  m.dims = {d.at(0).get<double>(), d.at(1).get<double>(), d.at(2).get<double>()};
  const auto& s = j.at("src");
  m.src = {s.at(0).get<double>(), s.at(1).get<double>(), s.at(2).get<double>()};
  const auto& c = j.at("mic");
  m.mic = {c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>()};
  m.alpha = j.at("alpha").get<double>();
  m.max_order = j.at("max_order").get<int>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.sample_rate = j.at("fs").get<double>();
  return m;
}

void save_rir(const std::string& wav_path, const RIR& rir) {
  write_wav(wav_path, rir.taps, WavEncoding::Float32);
  if (rir.meta) {
    write_text_file(wav_path + ".json", meta_to_json(*rir.meta).dump(2) + "\n");
  }
}

RIR load_rir(const std::string& wav_path) {
  RIR r;
  r.taps = read_wav(wav_path);
  const std::string sidecar = wav_path + ".json";
  if (fs::is_regular_file(sidecar)) {
    r.meta = meta_from_json(load_json_file(sidecar));
  }
  return r;
}

// ---------------------------------------------------------------------------
// config plumbing

void write_run_manifest(const std::string& path, const std::string& subcommand,
                        const json& config) {
  const json manifest{
      {"tool_version", kToolVersion}, {"subcommand", subcommand}, {"config", config}};
  write_text_file(path, manifest.dump(2) + "\n");
}

/// Ties each CLI option to a key of the run config. After parsing, resolve()
/// fills in values from --config for every flag the user did not pass and
/// returns the effective configuration for the run manifest.
class ConfigBinder {
 public:
  explicit ConfigBinder(CLI::App* sub) : sub_(sub) {
    sub->add_option("--config", config_path_,
                    "JSON config file or a previous run manifest; explicit flags take precedence");
  }

  template <typename T>
  CLI::Option* bind(const std::string& flag, std::string key, T& field, const std::string& desc) {
    CLI::Option* opt = sub_->add_option(flag, field, desc);
    entries_.push_back(Entry{std::move(key), opt,
                             [&field](const json& v) { field = v.get<T>(); },
                             [&field] { return json(field); }});
    return opt;
  }

  json resolve() {
    json file_cfg = json::object();
    if (!config_path_.empty()) {
      json j = load_json_file(config_path_);
      if (j.is_object() && j.contains("config")) {
        if (j.contains("subcommand") && j.at("subcommand") != sub_->get_name()) {
          throw std::invalid_argument("config: manifest was written by subcommand '" +
                                      j.at("subcommand").get<std::string>() + "', not '" +
                                      sub_->get_name() + "'");
        }
        j = j.at("config");
      }
      if (!j.is_object()) {
        throw std::invalid_argument("config: expected a JSON object");
      }
      file_cfg = std::move(j);
    }
    json effective = json::object();
    for (const Entry& e : entries_) {
      if (e.opt->count() > 0) {
        provided_.insert(e.key);
      } else if (file_cfg.contains(e.key)) {
        try {
          e.set(file_cfg.at(e.key));
        } catch (const json::exception& ex) {
          throw std::invalid_argument("config: bad value for '" + e.key + "': " + ex.what());
        }
        provided_.insert(e.key);
      }
      effective[e.key] = e.get();
    }
    return effective;
  }

  /// Whether the key came from the command line or the config file (as
  /// opposed to sitting at its built-in default).
  bool provided(const std::string& key) const { return provided_.count(key) > 0; }

  /// Required options stay ordinary CLI flags so --config can satisfy them;
  /// call after resolve() in place of CLI11's parse-time ->required().
  void require(const std::string& key, const std::string& flag) const {
    if (!provided(key)) {
      throw std::invalid_argument(sub_->get_name() + ": " + flag +
                                  " is required (as a flag or a config entry)");
    }
  }

 private:
  struct Entry {
    std::string key;
    CLI::Option* opt;
    std::function<void(const json&)> set;
    std::function<json()> get;
  };

  CLI::App* sub_;
  std::string config_path_;
  std::vector<Entry> entries_;
  std::set<std::string> provided_;
};

void print_summary(const json& j) { std::cout << j.dump() << "\n"; }

std::string manifest_path_for(const std::string& override_path, const std::string& primary_out) {
  return override_path.empty() ? primary_out + ".run.json" : override_path;
}

// ---------------------------------------------------------------------------
// simulate-rir

struct SimulateRirCmd {
  std::vector<double> dims{5.0, 4.0, 3.0};
  double rt60_target = 0.5;
  double absorption = 0.3;
  std::vector<double> src;
  std::vector<double> mic;
  int max_order = -1;
  double fs = 24000.0;
  double min_wall_dist = 0.5;
  std::uint64_t seed = 0;
  std::string out = "rir.wav";
  std::string run_manifest;
  std::shared_ptr<ConfigBinder> binder;

  void run() {
    json cfg = binder->resolve();
    if (dims.size() != 3) {
      throw std::invalid_argument("simulate-rir: --dims needs exactly three values");
    }
    RoomSpec room;
    room.dims = {dims[0], dims[1], dims[2]};
    room.max_order = max_order;
    room.sample_rate = fs;
    bool clamped = false;
    if (binder->provided("rt60")) {
      if (binder->provided("absorption")) {
        throw std::invalid_argument("simulate-rir: give --rt60 or --absorption, not both");
      }
      room.absorption = absorption_for_rt60(room.dims, rt60_target, &clamped);
    } else {
      room.absorption = absorption;
    }

    if (binder->provided("src") != binder->provided("mic")) {
      throw std::invalid_argument("simulate-rir: give both --src and --mic, or neither");
    }
    Point3 s, m;
    Rng rng(seed);
    if (binder->provided("src")) {
      if (src.size() != 3 || mic.size() != 3) {
        throw std::invalid_argument("simulate-rir: --src/--mic need exactly three values");
      }
      s = {src[0], src[1], src[2]};
      m = {mic[0], mic[1], mic[2]};
    } else {
      std::tie(s, m) = random_placement(room, rng, min_wall_dist);
    }

    RIR rir = simulate_rir(room, s, m);
    if (rir.meta) rir.meta->seed = seed;
    save_rir(out, rir);

    // Pin the resolved geometry and absorption so a replay is exact even
    // though the original run derived them from --rt60 / random placement.
    cfg.erase("rt60");
    cfg["absorption"] = room.absorption;
    cfg["src"] = {s.x, s.y, s.z};
    cfg["mic"] = {m.x, m.y, m.z};
    write_run_manifest(manifest_path_for(run_manifest, out), "simulate-rir", cfg);
    print_summary(json{{"out", out},
                       {"sidecar", out + ".json"},
                       {"alpha", room.absorption},
                       {"alpha_clamped", clamped},
                       {"max_order", rir.meta ? json(rir.meta->max_order) : json()},
                       {"taps", rir.taps.size()}});
  }
};

void register_simulate_rir(CLI::App& app) {
  auto c = std::make_shared<SimulateRirCmd>();
  CLI::App* sub =
      app.add_subcommand("simulate-rir", "Simulate a shoebox room impulse response");
  c->binder = std::make_shared<ConfigBinder>(sub);
  c->binder->bind("--dims", "dims", c->dims, "room dimensions in meters")->delimiter(',');
  c->binder->bind("--rt60", "rt60", c->rt60_target,
                  "target reverberation time in seconds (absorption via the Sabine relation)");
  c->binder->bind("--absorption", "absorption", c->absorption,
                  "uniform wall absorption in (0, 1]");
  c->binder->bind("--src", "src", c->src, "source position x,y,z (default: random placement)")
      ->delimiter(',');
  c->binder->bind("--mic", "mic", c->mic, "microphone position x,y,z")->delimiter(',');
  c->binder->bind("--max-order", "max_order", c->max_order,
                  "reflection order cap; -1 picks the adaptive default");
  c->binder->bind("--fs", "fs", c->fs, "sample rate in Hz");
  c->binder->bind("--min-wall-dist", "min_wall_dist", c->min_wall_dist,
                  "wall clearance for random placement, meters");
  c->binder->bind("--seed", "seed", c->seed, "random seed for placement");
  sub->add_option("-o,--out", c->out, "output WAV path (float32; JSON sidecar at <out>.json)");
  sub->add_option("--run-manifest", c->run_manifest, "run manifest path (default <out>.run.json)");
  sub->callback([c] { c->run(); });
}

// ---------------------------------------------------------------------------
// analyze-rir

struct AnalyzeRirCmd {
  std::string input;
  double direct_window_s = 0.008;
  std::string edc_csv;
  std::string run_manifest;
  std::shared_ptr<ConfigBinder> binder;

  void run() {
    json cfg = binder->resolve();
    const Waveform rir = read_wav(input);
    const double t60 = rt60(rir);
    const double ratio = drr(rir, direct_window_s);
    json report{{"rt60_s", t60},
                {"drr_db", std::isfinite(ratio) ? json(ratio) : json()},
                {"drr_infinite", !std::isfinite(ratio)},
                {"direct_index", direct_path_index(rir)}};
    if (!edc_csv.empty()) {
      const std::vector<double> edc = energy_decay_curve(rir);
      std::string text = "sample,edc_db\n";
      for (std::size_t i = 0; i < edc.size(); ++i) {
        text += std::to_string(i) + "," + num(edc[i]) + "\n";
      }
      write_text_file(edc_csv, text);
      report["edc_csv_path"] = edc_csv;
    }
    if (!run_manifest.empty()) {
      write_run_manifest(run_manifest, "analyze-rir", cfg);
    }
    print_summary(report);
  }
};

void register_analyze_rir(CLI::App& app) {
  auto c = std::make_shared<AnalyzeRirCmd>();
  CLI::App* sub = app.add_subcommand(
      "analyze-rir", "Report RT60, DRR, and the direct-path index of an impulse response");
  c->binder = std::make_shared<ConfigBinder>(sub);
  sub->add_option("input", c->input, "impulse-response WAV")->required();
  c->binder->bind("--direct-window", "direct_window_s", c->direct_window_s,
                  "direct-energy window after the peak, seconds");
  c->binder->bind("--edc-csv", "edc_csv", c->edc_csv,
                  "also write the energy decay curve to this CSV");
  sub->add_option("--run-manifest", c->run_manifest,
                  "run manifest path (read-only subcommand: none written by default)");
  sub->callback([c] { c->run(); });
}

// ---------------------------------------------------------------------------
// degrade

struct DegradeCmd {
  std::string speech_dir;
  std::string noise_dir;
  std::string rir_dir;
  std::string snr = "5:30";
  std::string chain;
  double q = 0.1;
  std::uint64_t seed = 0;
  std::string out = "manifest.jsonl";
  std::string out_dir;
  int jobs = 1;
  std::string run_manifest;
  std::shared_ptr<ConfigBinder> binder;

  void run() {
    const json cfg = binder->resolve();
    binder->require("speech_dir", "--speech-dir");
    binder->require("rir_dir", "--rir-dir");
    const std::vector<std::string> speech = list_files(speech_dir, ".wav");
    if (speech.empty()) {
      throw std::runtime_error("degrade: no .wav files in " + speech_dir);
    }
    const std::vector<std::string> rirs = list_files(rir_dir, ".wav");
    if (rirs.empty()) {
      throw std::runtime_error("degrade: no .wav files in " + rir_dir);
    }
    const std::vector<std::string> noises =
        noise_dir.empty() ? std::vector<std::string>{} : list_files(noise_dir, ".wav");
    const auto [snr_lo, snr_hi] = parse_range(snr, "--snr");
    const std::vector<Artifact> artifacts = parse_artifact_chain(chain);

    const fs::path manifest_dir = fs::absolute(fs::path(out)).parent_path();
    const fs::path items_dir =
        out_dir.empty() ? manifest_dir / "degraded" : fs::absolute(fs::path(out_dir));
    fs::create_directories(items_dir);
    const auto rel = [&manifest_dir](const fs::path& p) {
      return fs::relative(fs::absolute(p), manifest_dir).generic_string();
    };

    std::vector<json> records(speech.size());
    parallel_for(speech.size(), jobs, [&](std::size_t i) {
      const std::uint64_t item_seed = derive_seed(seed, i);
      Rng rng(item_seed);
      const Waveform s = read_wav(speech[i]);
      const std::string& rir_path = rirs[rng.next_below(rirs.size())];
      const RIR rir = load_rir(rir_path);
      const double snr_db = draw_in_range(snr_lo, snr_hi, rng);
      std::string noise_path;
      Waveform noise({}, s.sample_rate);
      if (!noises.empty()) {
        noise_path = noises[rng.next_below(noises.size())];
        noise = read_wav(noise_path);
      } else if (std::isfinite(snr_db)) {
        noise = synth_noise(s.duration_s(), s.sample_rate, rng);
      }
      const TrainingExample ex = make_training_example(s, rir, noise, snr_db, artifacts, q, rng);

      const std::string stem = fs::path(speech[i]).stem().string();
      const fs::path x_path = items_dir / (stem + "_x.wav");
      const fs::path t_path = items_dir / (stem + "_t.wav");
      write_wav(x_path.string(), ex.input, WavEncoding::Float32);
      write_wav(t_path.string(), ex.target, WavEncoding::Float32);

      records[i] = json{{"id", stem},
                        {"paths",
                         json{{"speech", rel(speech[i])},
                              {"noise", noise_path.empty() ? json() : json(rel(noise_path))},
                              {"rir", rel(rir_path)},
                              {"input", rel(x_path)},
                              {"target", rel(t_path)}}},
                        {"snr_db", std::isfinite(snr_db) ? json(snr_db) : json()},
                        {"chain", chain},
                        {"reverb_active", ex.reverb_active},
                        {"rir_meta", rir.meta ? meta_to_json(*rir.meta) : json()},
                        {"seed", item_seed}};
    });

    write_jsonl(out, records);
    write_run_manifest(manifest_path_for(run_manifest, out), "degrade", cfg);
    std::size_t reverb_count = 0;
    for (const json& r : records) reverb_count += r.at("reverb_active").get<bool>() ? 1 : 0;
    print_summary(json{{"out", out},
                       {"items", records.size()},
                       {"reverb_active", reverb_count},
                       {"clean_targets", records.size() - reverb_count}});
  }
};

void register_degrade(CLI::App& app) {
  auto c = std::make_shared<DegradeCmd>();
  CLI::App* sub = app.add_subcommand(
      "degrade", "Build supervised (input, target) pairs from speech, RIRs, and noise");
  c->binder = std::make_shared<ConfigBinder>(sub);
  c->binder->bind("--speech-dir", "speech_dir", c->speech_dir, "directory of clean speech WAVs");
  c->binder->bind("--noise-dir", "noise_dir", c->noise_dir,
                  "directory of noise WAVs (default: built-in shaped noise)");
  c->binder->bind("--rir-dir", "rir_dir", c->rir_dir, "directory of impulse-response WAVs");
  c->binder->bind("--snr", "snr", c->snr, "SNR range lo:hi in dB, or 'inf' for no noise");
  c->binder->bind("--chain", "chain", c->chain,
                  "artifact chain, e.g. 'lowpass:4000,mulaw' (empty: none)");
  c->binder->bind("--q", "q", c->q, "probability that the target is the clean signal");
  c->binder->bind("--seed", "seed", c->seed, "master random seed");
  sub->add_option("-o,--out", c->out, "output manifest (JSONL)");
  sub->add_option("--out-dir", c->out_dir,
                  "directory for rendered WAVs (default: <manifest dir>/degraded)");
  sub->add_option("--jobs", c->jobs, "worker threads; results are independent of this");
  sub->add_option("--run-manifest", c->run_manifest, "run manifest path (default <out>.run.json)");
  sub->callback([c] { c->run(); });
}

// ---------------------------------------------------------------------------
// baseline

struct BaselineCmd {
  std::string dry;
  double rt60_target = 0.0;
  double drr_target = 0.0;
  std::string ref_rir;
  std::size_t candidates = 20;
  int max_order = -1;
  std::uint64_t seed = 0;
  std::string out = "baseline.wav";
  std::string run_manifest;
  std::shared_ptr<ConfigBinder> binder;

  void run() {
    json cfg = binder->resolve();
    binder->require("dry", "--dry");
    const Waveform dry_wave = read_wav(dry);
    double t60 = rt60_target;
    double target_drr = drr_target;
    if (binder->provided("ref_rir")) {
      const auto [ref_t60, ref_drr] = rt60_drr_from_reference(read_wav(ref_rir));
      if (!binder->provided("rt60")) t60 = ref_t60;
      if (!binder->provided("drr")) target_drr = ref_drr;
    } else if (!binder->provided("rt60") || !binder->provided("drr")) {
      throw std::invalid_argument("baseline: give --rt60 and --drr, or --ref-rir");
    }

    RoomPrior prior;
    prior.sample_rate = dry_wave.sample_rate;
    prior.max_order = max_order;
    Rng rng(seed);
    const MatchedReverbResult res =
        apply_matched_reverb(dry_wave, t60, target_drr, candidates, prior, rng);
    write_wav(out, res.rendered, WavEncoding::Float32);

    json drrs = json::array();
    for (double d : res.candidate_drrs) {
      drrs.push_back(std::isfinite(d) ? json(d) : json());
    }
    const json report{{"out", out},
                      {"target_rt60_s", t60},
                      {"target_drr_db", std::isfinite(target_drr) ? json(target_drr) : json()},
                      {"chosen_index", res.chosen_index},
                      {"chosen_drr_db", drrs.at(res.chosen_index)},
                      {"candidate_drrs_db", drrs}};
    write_text_file(out + ".report.json", report.dump(2) + "\n");

    // Replays run from the concrete targets, not the reference file.
    cfg["rt60"] = t60;
    cfg["drr"] = target_drr;
    cfg.erase("ref_rir");
    write_run_manifest(manifest_path_for(run_manifest, out), "baseline", cfg);
    print_summary(report);
  }
};

void register_baseline(CLI::App& app) {
  auto c = std::make_shared<BaselineCmd>();
  CLI::App* sub = app.add_subcommand(
      "baseline", "Re-reverberate a dry signal with the closest-DRR candidate room");
  c->binder = std::make_shared<ConfigBinder>(sub);
  c->binder->bind("--dry", "dry", c->dry, "dry input WAV");
  c->binder->bind("--rt60", "rt60", c->rt60_target, "target reverberation time, seconds");
  c->binder->bind("--drr", "drr", c->drr_target, "target direct-to-reverberant ratio, dB");
  c->binder->bind("--ref-rir", "ref_rir", c->ref_rir,
                  "derive both targets from this reference impulse response");
  c->binder->bind("--candidates", "candidates", c->candidates, "number of candidate rooms");
  c->binder->bind("--max-order", "max_order", c->max_order,
                  "reflection order cap for candidates; -1 adaptive");
  c->binder->bind("--seed", "seed", c->seed, "random seed for the candidate rooms");
  sub->add_option("-o,--out", c->out, "output WAV (report JSON at <out>.report.json)");
  sub->add_option("--run-manifest", c->run_manifest, "run manifest path (default <out>.run.json)");
  sub->callback([c] { c->run(); });
}

// ---------------------------------------------------------------------------
// synth-corpus

struct SynthCorpusCmd {
  std::size_t utterances = 40;
  std::size_t rirs = 8;
  double duration = 1.0;
  std::string preset = "train";
  std::string snr;
  std::string chain;
  std::string rt60_range = "0.1:1.5";
  int max_order = -1;
  double fs = 24000.0;
  std::uint64_t seed = 0;
  std::string out = "corpus";
  long long only = -1;
  int jobs = 1;
  std::shared_ptr<ConfigBinder> binder;

  // Three interleaved seed streams keep items, utterances, and rooms
  // independent: item i -> 3i, utterance u -> 3u+1, room j -> 3j+2.
  std::uint64_t item_seed(std::size_t i) const { return derive_seed(seed, 3 * i); }
  std::uint64_t utt_seed(std::size_t u) const { return derive_seed(seed, 3 * u + 1); }
  std::uint64_t rir_seed(std::size_t j) const { return derive_seed(seed, 3 * j + 2); }

  std::string utt_name(std::size_t u) const { return "clean/utt_" + zero_pad(u, 3) + ".wav"; }
  std::string rir_name(std::size_t j) const { return "rirs/rir_" + zero_pad(j, 3) + ".wav"; }
  std::string item_stem(std::size_t i) const { return "item_" + zero_pad(i, 5); }

  void run() {
    const json cfg = binder->resolve();
    if (utterances == 0 || rirs == 0) {
      throw std::invalid_argument("synth-corpus: --utterances and --rirs must be positive");
    }
    double snr_lo = 5.0, snr_hi = 30.0;
    if (preset == "eval") {
      snr_lo = -5.0;
      snr_hi = 20.0;
    } else if (preset != "train") {
      throw std::invalid_argument("synth-corpus: --preset must be 'train' or 'eval'");
    }
    if (!snr.empty()) {
      std::tie(snr_lo, snr_hi) = parse_range(snr, "--snr");
    }
    const auto [rt_lo, rt_hi] = parse_range(rt60_range, "--rt60");
    const std::vector<Artifact> artifacts = parse_artifact_chain(chain);
    const std::size_t total = utterances * rirs;
    if (only >= 0 && static_cast<std::size_t>(only) >= total) {
      throw std::invalid_argument("synth-corpus: --only is out of range (corpus has " +
                                  std::to_string(total) + " items)");
    }

    const fs::path root(out);
    fs::create_directories(root / "clean");
    fs::create_directories(root / "rirs");
    fs::create_directories(root / "items");

    // Rooms sit on an even RT60 grid over the requested range; geometry and
    // placement are drawn from the baseline's room prior.
    const auto make_rir = [&](std::size_t j) {
      Rng rng(rir_seed(j));
      const double target =
          rirs == 1 ? rt_lo
                    : rt_lo + (rt_hi - rt_lo) * static_cast<double>(j) /
                                  static_cast<double>(rirs - 1);
      RoomPrior prior;
      prior.sample_rate = fs;
      prior.max_order = max_order;
      RIR r = sample_candidate_rir(prior, target, rng);
      if (r.meta) r.meta->seed = rir_seed(j);
      return r;
    };
    const auto make_utt = [&](std::size_t u) {
      Rng rng(utt_seed(u));
      return synth_utterance(duration, fs, rng);
    };

    if (only >= 0) {
      // Regenerate one item in isolation: its room, its utterance, its WAVs.
      const std::size_t i = static_cast<std::size_t>(only);
      const std::size_t u = i / rirs;
      const std::size_t j = i % rirs;
      const RIR rir = make_rir(j);
      save_rir((root / rir_name(j)).string(), rir);
      const Waveform clean = make_utt(u);
      write_wav((root / utt_name(u)).string(), clean, WavEncoding::Float32);
      render_item(i, clean, rir, snr_lo, snr_hi, artifacts, root);
      print_summary(json{{"out", out}, {"only", i}});
      return;
    }

    std::vector<RIR> rir_bank(rirs);
    parallel_for(rirs, jobs, [&](std::size_t j) {
      rir_bank[j] = make_rir(j);
      save_rir((root / rir_name(j)).string(), rir_bank[j]);
    });
    std::vector<Waveform> utt_bank;
    utt_bank.reserve(utterances);
    for (std::size_t u = 0; u < utterances; ++u) utt_bank.push_back(Waveform({}, fs));
    parallel_for(utterances, jobs, [&](std::size_t u) {
      utt_bank[u] = make_utt(u);
      write_wav((root / utt_name(u)).string(), utt_bank[u], WavEncoding::Float32);
    });

    std::vector<json> records(total);
    parallel_for(total, jobs, [&](std::size_t i) {
      const std::size_t u = i / rirs;
      const std::size_t j = i % rirs;
      records[i] = render_item(i, utt_bank[u], rir_bank[j], snr_lo, snr_hi, artifacts, root);
    });

    write_jsonl((root / "manifest.jsonl").string(), records);
    write_run_manifest((root / "run.json").string(), "synth-corpus", cfg);
    print_summary(json{{"out", out},
                       {"manifest", (root / "manifest.jsonl").string()},
                       {"items", total},
                       {"utterances", utterances},
                       {"rirs", rirs}});
  }

  json render_item(std::size_t i, const Waveform& clean, const RIR& rir, double snr_lo,
                   double snr_hi, const std::vector<Artifact>& artifacts, const fs::path& root) {
    Rng rng(item_seed(i));
    const double snr_db = draw_in_range(snr_lo, snr_hi, rng);
    Waveform noise({}, fs);
    if (std::isfinite(snr_db)) {
      noise = synth_noise(duration, fs, rng);
    }
    const Waveform reverb = convolve(clean, rir.taps);
    std::size_t clipped = 0;
    const Waveform degraded = degrade(clean, rir, noise, snr_db, artifacts, rng, &clipped);

    const std::string stem = item_stem(i);
    const std::string reverb_rel = "items/" + stem + "_reverb.wav";
    const std::string degraded_rel = "items/" + stem + "_degraded.wav";
    write_wav((root / reverb_rel).string(), reverb, WavEncoding::Float32);
    write_wav((root / degraded_rel).string(), degraded, WavEncoding::Float32);

    return json{{"id", stem},
                {"utterance_index", i / rirs},
                {"rir_index", i % rirs},
                {"clean", utt_name(i / rirs)},
                {"rir", rir_name(i % rirs)},
                {"reverb", reverb_rel},
                {"degraded", degraded_rel},
                {"snr_db", std::isfinite(snr_db) ? json(snr_db) : json()},
                {"chain", chain},
                {"clipped_samples", clipped},
                {"duration_s", duration},
                {"seed", item_seed(i)},
                {"rir_meta", rir.meta ? meta_to_json(*rir.meta) : json()}};
  }
};

void register_synth_corpus(CLI::App& app) {
  auto c = std::make_shared<SynthCorpusCmd>();
  CLI::App* sub = app.add_subcommand(
      "synth-corpus", "Generate a synthetic (clean, reverberant, degraded) triplet corpus");
  c->binder = std::make_shared<ConfigBinder>(sub);
  c->binder->bind("--utterances", "utterances", c->utterances, "number of synthetic utterances");
  c->binder->bind("--rirs", "rirs", c->rirs, "number of rooms on the RT60 grid");
  c->binder->bind("--duration", "duration", c->duration, "utterance length, seconds");
  c->binder->bind("--preset", "preset", c->preset,
                  "'train' (SNR 5..30 dB) or 'eval' (SNR -5..20 dB)");
  c->binder->bind("--snr", "snr", c->snr, "override the preset SNR range, lo:hi dB");
  c->binder->bind("--chain", "chain", c->chain, "artifact chain applied to every item");
  c->binder->bind("--rt60", "rt60", c->rt60_range, "RT60 grid range lo:hi, seconds");
  c->binder->bind("--max-order", "max_order", c->max_order,
                  "reflection order cap for the rooms; -1 adaptive");
  c->binder->bind("--fs", "fs", c->fs, "sample rate in Hz");
  c->binder->bind("--seed", "seed", c->seed, "master random seed");
  sub->add_option("-o,--out", c->out, "output directory");
  sub->add_option("--only", c->only, "regenerate just this item index (WAVs only)");
  sub->add_option("--jobs", c->jobs, "worker threads; results are independent of this");
  sub->callback([c] { c->run(); });
}

// ---------------------------------------------------------------------------
// train

struct TrainCmd {
  std::string corpus;
  std::size_t steps = 2000;
  std::size_t batch = 8;
  double q = 0.1;
  double lr = 2e-3;
  std::size_t warmup = 200;
  std::size_t mel_bands = kDefaultMelBands;
  std::size_t hidden = 32;
  std::size_t feature_dim = 16;
  std::uint64_t seed = 1;
  std::string out = "model.rvbm";
  int jobs = 1;
  std::string run_manifest;
  std::shared_ptr<ConfigBinder> binder;

  Matrix mel_of(const Waveform& w) const {
    return log_mel(w, StftParams::for_rate(w.sample_rate), mel_bands).frames;
  }

  void run() {
    const json cfg = binder->resolve();
    binder->require("corpus", "--corpus");
    const std::vector<json> records = load_jsonl(corpus);
    if (records.empty()) {
      throw std::runtime_error("train: empty corpus manifest " + corpus);
    }
    const fs::path base = fs::absolute(fs::path(corpus)).parent_path();
    const auto resolve = [&base](const std::string& p) {
      return fs::path(p).is_absolute() ? p : (base / p).string();
    };

    // Clean utterances are shared across items; compute each mel once.
    std::vector<std::string> clean_paths;
    for (const json& r : records) clean_paths.push_back(r.at("clean").get<std::string>());
    std::vector<std::string> unique_clean = clean_paths;
    std::sort(unique_clean.begin(), unique_clean.end());
    unique_clean.erase(std::unique(unique_clean.begin(), unique_clean.end()),
                       unique_clean.end());
    std::vector<Matrix> clean_mels(unique_clean.size());
    parallel_for(unique_clean.size(), jobs, [&](std::size_t i) {
      clean_mels[i] = mel_of(read_wav(resolve(unique_clean[i])));
    });
    std::map<std::string, const Matrix*> clean_by_path;
    for (std::size_t i = 0; i < unique_clean.size(); ++i) {
      clean_by_path[unique_clean[i]] = &clean_mels[i];
    }

    std::vector<TrainItem> items(records.size());
    parallel_for(records.size(), jobs, [&](std::size_t i) {
      const json& r = records[i];
      const Matrix& s_full = *clean_by_path.at(clean_paths[i]);
      const Matrix r_full = mel_of(read_wav(resolve(r.at("reverb").get<std::string>())));
      const Matrix x_full = mel_of(read_wav(resolve(r.at("degraded").get<std::string>())));
      // The decoder reconstructs frame-for-frame from the clean mel, so both
      // targets are compared over the clean utterance's frames; the encoder
      // keeps the full degraded signal, reverberant tail included.
      const std::size_t frames = std::min(s_full.rows, r_full.rows);
      items[i].s_mel = take_rows(s_full, frames);
      items[i].r_mel = take_rows(r_full, frames);
      items[i].x_mel = x_full;
      items[i].rir_id = r.at("rir").get<std::string>();
      items[i].utterance_id = clean_paths[i];
    });

    ModelConfig mc;
    mc.n_mels = mel_bands;
    mc.hidden = hidden;
    mc.feature_dim = feature_dim;
    ReverbModel model = make_model(mc, seed);

    TrainConfig tc;
    tc.steps = steps;
    tc.batch = batch;
    tc.q = q;
    tc.seed = seed;
    tc.adam.lr = lr;
    tc.adam.warmup_steps = warmup;
    const TrainStats stats = train(model, items, tc);

    save_model(out, model);
    std::string curve = "step,loss\n";
    for (std::size_t s = 0; s < stats.loss_curve.size(); ++s) {
      curve += std::to_string(s + 1) + "," + num(stats.loss_curve[s]) + "\n";
    }
    const std::string curve_path = out + ".loss.csv";
    write_text_file(curve_path, curve);
    write_run_manifest(manifest_path_for(run_manifest, out), "train", cfg);
    print_summary(json{{"out", out},
                       {"loss_csv", curve_path},
                       {"items", items.size()},
                       {"parameters", model.parameter_count()},
                       {"initial_loss", stats.loss_curve.front()},
                       {"final_loss", stats.loss_curve.back()},
                       {"clean_branches", stats.clean_branches},
                       {"reverb_branches", stats.reverb_branches}});
  }
};

void register_train(CLI::App& app) {
  auto c = std::make_shared<TrainCmd>();
  CLI::App* sub = app.add_subcommand(
      "train", "Train the reverb-feature encoder/decoder on a synth-corpus manifest");
  c->binder = std::make_shared<ConfigBinder>(sub);
  c->binder->bind("--corpus", "corpus", c->corpus, "corpus manifest (JSONL) from synth-corpus");
  c->binder->bind("--steps", "steps", c->steps, "optimization steps");
  c->binder->bind("--batch", "batch", c->batch, "examples per step");
  c->binder->bind("--q", "q", c->q, "clean-branch probability of the switching loss");
  c->binder->bind("--lr", "lr", c->lr, "Adam learning rate");
  c->binder->bind("--warmup", "warmup", c->warmup, "linear warmup steps");
  c->binder->bind("--mel-bands", "mel_bands", c->mel_bands, "mel bands for all features");
  c->binder->bind("--hidden", "hidden", c->hidden, "hidden width of the model");
  c->binder->bind("--feature-dim", "feature_dim", c->feature_dim, "reverb feature dimension");
  c->binder->bind("--seed", "seed", c->seed, "seed for init, batch order, and branch draws");
  sub->add_option("-o,--out", c->out, "output checkpoint (loss curve at <out>.loss.csv)");
  sub->add_option("--jobs", c->jobs, "worker threads for feature extraction");
  sub->add_option("--run-manifest", c->run_manifest, "run manifest path (default <out>.run.json)");
  sub->callback([c] { c->run(); });
}

// ---------------------------------------------------------------------------
// encode / decode-demo

struct EncodeCmd {
  std::string model_path;
  std::string input;
  std::string out = "feature.rvbf";
  std::string run_manifest;
  std::shared_ptr<ConfigBinder> binder;

  void run() {
    const json cfg = binder->resolve();
    binder->require("model", "--model");
    binder->require("input", "--input");
    const ReverbModel model = load_model(model_path);
    const Waveform w = read_wav(input);
    const LogMelSpectrogram mel = log_mel(w, StftParams::for_rate(w.sample_rate), model.cfg.n_mels);
    const std::vector<double> c = encode(model, mel);
    save_feature(out, c);
    write_run_manifest(manifest_path_for(run_manifest, out), "encode", cfg);
    print_summary(json{{"out", out}, {"dim", c.size()}, {"frames", mel.frames.rows}});
  }
};

void register_encode(CLI::App& app) {
  auto c = std::make_shared<EncodeCmd>();
  CLI::App* sub =
      app.add_subcommand("encode", "Extract the reverb feature of a recording");
  c->binder = std::make_shared<ConfigBinder>(sub);
  c->binder->bind("--model", "model", c->model_path, "model checkpoint (RVBM)");
  c->binder->bind("--input", "input", c->input, "input WAV");
  sub->add_option("-o,--out", c->out, "output feature file (RVBF)");
  sub->add_option("--run-manifest", c->run_manifest, "run manifest path (default <out>.run.json)");
  sub->callback([c] { c->run(); });
}

struct DecodeDemoCmd {
  std::string model_path;
  std::string clean;
  std::string feature;
  std::string out = "decoded.csv";
  std::string run_manifest;
  std::shared_ptr<ConfigBinder> binder;

  void run() {
    const json cfg = binder->resolve();
    binder->require("model", "--model");
    binder->require("clean", "--clean");
    const ReverbModel model = load_model(model_path);
    const Waveform w = read_wav(clean);
    const Matrix s_mel =
        log_mel(w, StftParams::for_rate(w.sample_rate), model.cfg.n_mels).frames;
    const std::vector<double> c = feature.empty()
                                      ? std::vector<double>(model.cfg.feature_dim, 0.0)
                                      : load_feature(feature);
    const Matrix decoded = decode(model, s_mel, c);
    std::string text;
    for (std::size_t r = 0; r < decoded.rows; ++r) {
      for (std::size_t col = 0; col < decoded.cols; ++col) {
        text += num(decoded.at(r, col));
        text += col + 1 == decoded.cols ? '\n' : ',';
      }
    }
    write_text_file(out, text);
    write_run_manifest(manifest_path_for(run_manifest, out), "decode-demo", cfg);
    print_summary(json{{"out", out},
                       {"frames", decoded.rows},
                       {"bands", decoded.cols},
                       {"conditioning", feature.empty() ? "zero" : feature}});
  }
};

void register_decode_demo(CLI::App& app) {
  auto c = std::make_shared<DecodeDemoCmd>();
  CLI::App* sub = app.add_subcommand(
      "decode-demo", "Decode a clean recording under a reverb feature (log-mel CSV out)");
  c->binder = std::make_shared<ConfigBinder>(sub);
  c->binder->bind("--model", "model", c->model_path, "model checkpoint (RVBM)");
  c->binder->bind("--clean", "clean", c->clean, "clean input WAV");
  c->binder->bind("--feature", "feature", c->feature,
                  "reverb feature (RVBF); omitted = the zero feature");
  sub->add_option("-o,--out", c->out, "output CSV of decoded log-mel frames");
  sub->add_option("--run-manifest", c->run_manifest, "run manifest path (default <out>.run.json)");
  sub->callback([c] { c->run(); });
}

// ---------------------------------------------------------------------------
// interp / pca / sample

struct InterpCmd {
  std::string a;
  std::string b;
  double alpha = 0.5;
  std::string out = "interp.rvbf";
  std::string run_manifest;
  std::shared_ptr<ConfigBinder> binder;

  void run() {
    const json cfg = binder->resolve();
    binder->require("a", "--a");
    binder->require("b", "--b");
    const std::vector<double> result = interpolate(load_feature(a), load_feature(b), alpha);
    save_feature(out, result);
    write_run_manifest(manifest_path_for(run_manifest, out), "interp", cfg);
    print_summary(json{{"out", out}, {"dim", result.size()}, {"alpha", alpha}});
  }
};

void register_interp(CLI::App& app) {
  auto c = std::make_shared<InterpCmd>();
  CLI::App* sub =
      app.add_subcommand("interp", "Interpolate between two reverb features");
  c->binder = std::make_shared<ConfigBinder>(sub);
  c->binder->bind("--a", "a", c->a, "first feature (RVBF); alpha = 0 returns it exactly");
  c->binder->bind("--b", "b", c->b, "second feature (RVBF); alpha = 1 returns it exactly");
  c->binder->bind("--alpha", "alpha", c->alpha, "mixing weight in [0, 1]");
  sub->add_option("-o,--out", c->out, "output feature file (RVBF)");
  sub->add_option("--run-manifest", c->run_manifest, "run manifest path (default <out>.run.json)");
  sub->callback([c] { c->run(); });
}

struct PcaCmd {
  std::string features_dir;
  std::size_t k = 2;
  std::string out = "pca.rvbp";
  std::string run_manifest;
  std::shared_ptr<ConfigBinder> binder;

  void run() {
    const json cfg = binder->resolve();
    binder->require("features", "--features");
    const std::vector<std::string> files = list_files(features_dir, ".rvbf");
    if (files.size() < 2) {
      throw std::runtime_error("pca: need at least two .rvbf files in " + features_dir);
    }
    const std::vector<double> first = load_feature(files[0]);
    Matrix X(files.size(), first.size());
    for (std::size_t i = 0; i < files.size(); ++i) {
      const std::vector<double> f = i == 0 ? first : load_feature(files[i]);
      if (f.size() != X.cols) {
        throw std::runtime_error("pca: " + files[i] + " has dimension " +
                                 std::to_string(f.size()) + ", expected " +
                                 std::to_string(X.cols));
      }
      std::copy(f.begin(), f.end(), X.data.begin() + static_cast<std::ptrdiff_t>(i * X.cols));
    }
    const PcaModel pca = pca_fit(X, k);
    save_pca(out, pca);
    write_run_manifest(manifest_path_for(run_manifest, out), "pca", cfg);
    json variances = json::array();
    for (double v : pca.variances) variances.push_back(v);
    print_summary(json{{"out", out},
                       {"n", files.size()},
                       {"dim", pca.dim()},
                       {"k", pca.k()},
                       {"effective_rank", pca.effective_rank},
                       {"variances", variances}});
  }
};

void register_pca(CLI::App& app) {
  auto c = std::make_shared<PcaCmd>();
  CLI::App* sub = app.add_subcommand(
      "pca", "Fit principal axes to a directory of reverb features");
  c->binder = std::make_shared<ConfigBinder>(sub);
  c->binder->bind("--features", "features", c->features_dir, "directory of .rvbf files");
  c->binder->bind("--k", "k", c->k, "number of principal components");
  sub->add_option("-o,--out", c->out, "output PCA model (RVBP)");
  sub->add_option("--run-manifest", c->run_manifest, "run manifest path (default <out>.run.json)");
  sub->callback([c] { c->run(); });
}

struct SampleCmd {
  std::string pca_path;
  std::size_t nx = 3;
  std::size_t ny = 3;
  std::size_t random_count = 0;
  std::uint64_t seed = 0;
  std::string out = "samples";
  std::shared_ptr<ConfigBinder> binder;

  void run() {
    const json cfg = binder->resolve();
    binder->require("pca", "--pca");
    const PcaModel pca = load_pca(pca_path);
    const PlaneRegion region = default_region(pca);
    std::vector<std::vector<double>> feats;
    if (random_count > 0) {
      Rng rng(seed);
      feats = sample_plane_random(pca, region, random_count, rng);
    } else {
      feats = sample_plane_grid(pca, region, nx, ny);
    }

    const fs::path root(out);
    fs::create_directories(root);
    std::vector<json> records(feats.size());
    for (std::size_t i = 0; i < feats.size(); ++i) {
      const std::string name = "sample_" + zero_pad(i, 3) + ".rvbf";
      save_feature((root / name).string(), feats[i]);
      const std::vector<double> z = pca_project(pca, feats[i]);
      records[i] = json{{"id", "sample_" + zero_pad(i, 3)},
                        {"path", name},
                        {"z", {z[0], z[1]}}};
    }
    write_jsonl((root / "samples.jsonl").string(), records);
    write_run_manifest((root / "run.json").string(), "sample", cfg);
    print_summary(json{{"out", out},
                       {"count", feats.size()},
                       {"mode", random_count > 0 ? "random" : "grid"},
                       {"region", {{"lo", {region.lo[0], region.lo[1]}},
                                   {"hi", {region.hi[0], region.hi[1]}}}}});
  }
};

void register_sample(CLI::App& app) {
  auto c = std::make_shared<SampleCmd>();
  CLI::App* sub = app.add_subcommand(
      "sample", "Draw reverb features from the first principal plane of a PCA model");
  c->binder = std::make_shared<ConfigBinder>(sub);
  c->binder->bind("--pca", "pca", c->pca_path, "PCA model (RVBP)");
  c->binder->bind("--nx", "nx", c->nx, "grid columns along the first component");
  c->binder->bind("--ny", "ny", c->ny, "grid rows along the second component");
  c->binder->bind("--random", "random", c->random_count,
                  "draw this many uniform samples instead of a grid");
  c->binder->bind("--seed", "seed", c->seed, "seed for --random");
  sub->add_option("-o,--out", c->out, "output directory (features + samples.jsonl)");
  sub->callback([c] { c->run(); });
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateCmd {
  std::string ref_manifest;
  std::string hyp_manifest;
  std::string ref_field = "path";
  std::string hyp_field = "path";
  double gpe_threshold = 0.2;
  std::string out = "results.csv";
  int jobs = 1;
  std::string run_manifest;
  std::shared_ptr<ConfigBinder> binder;

  void run() {
    const json cfg = binder->resolve();
    binder->require("ref_manifest", "--ref-manifest");
    binder->require("hyp_manifest", "--hyp-manifest");
    const std::vector<json> refs = load_jsonl(ref_manifest);
    const std::vector<json> hyps = load_jsonl(hyp_manifest);
    if (refs.size() != hyps.size()) {
      throw std::runtime_error("evaluate: manifests pair by line but have " +
                               std::to_string(refs.size()) + " and " +
                               std::to_string(hyps.size()) + " records");
    }
    if (refs.empty()) {
      throw std::runtime_error("evaluate: empty manifests");
    }
    const fs::path ref_base = fs::absolute(fs::path(ref_manifest)).parent_path();
    const fs::path hyp_base = fs::absolute(fs::path(hyp_manifest)).parent_path();
    const auto resolve = [](const fs::path& base, const std::string& p) {
      return fs::path(p).is_absolute() ? p : (base / p).string();
    };

    struct Row {
      std::string id;
      double mcd_db = 0.0;
      double gpe_value = 0.0;
      std::size_t ref_voiced = 0;
      std::size_t hyp_voiced = 0;
      std::size_t joint_voiced = 0;
      bool vacuous = false;
    };
    std::vector<Row> rows(refs.size());
    parallel_for(refs.size(), jobs, [&](std::size_t i) {
      const std::string ref_path = refs[i].at(ref_field).get<std::string>();
      const std::string hyp_path = hyps[i].at(hyp_field).get<std::string>();
      const Waveform ref = read_wav(resolve(ref_base, ref_path));
      const Waveform hyp = read_wav(resolve(hyp_base, hyp_path));
      Row& row = rows[i];
      row.id = refs[i].contains("id") ? refs[i].at("id").get<std::string>()
                                      : fs::path(ref_path).stem().string();
      row.mcd_db = mcd(ref, hyp);
      const PitchTrack ref_pt = pitch_track(ref);
      const PitchTrack hyp_pt = pitch_track(hyp);
      row.ref_voiced = static_cast<std::size_t>(
          std::count(ref_pt.voiced.begin(), ref_pt.voiced.end(), std::uint8_t{1}));
      row.hyp_voiced = static_cast<std::size_t>(
          std::count(hyp_pt.voiced.begin(), hyp_pt.voiced.end(), std::uint8_t{1}));
      const GpeResult g = gpe(ref, hyp, gpe_threshold);
      row.gpe_value = g.value;
      row.joint_voiced = g.joint_voiced_frames;
      row.vacuous = g.no_joint_voiced;
    });

    std::string csv = "id,mcd_db,gpe,ref_voiced_frames,hyp_voiced_frames,joint_voiced_frames,gpe_vacuous\n";
    double mcd_sum = 0.0, gpe_sum = 0.0;
    double ref_v = 0.0, hyp_v = 0.0, joint_v = 0.0;
    std::size_t scored = 0;
    for (const Row& r : rows) {
      csv += r.id + "," + num(r.mcd_db) + "," + num(r.gpe_value) + "," +
             std::to_string(r.ref_voiced) + "," + std::to_string(r.hyp_voiced) + "," +
             std::to_string(r.joint_voiced) + "," + (r.vacuous ? "1" : "0") + "\n";
      mcd_sum += r.mcd_db;
      ref_v += static_cast<double>(r.ref_voiced);
      hyp_v += static_cast<double>(r.hyp_voiced);
      joint_v += static_cast<double>(r.joint_voiced);
      if (!r.vacuous) {
        gpe_sum += r.gpe_value;
        ++scored;
      }
    }
    const double n = static_cast<double>(rows.size());
    const double mean_mcd = mcd_sum / n;
    // The corpus GPE averages only pairs with jointly voiced frames.
    const double mean_gpe = scored > 0 ? gpe_sum / static_cast<double>(scored) : 0.0;
    csv += "mean," + num(mean_mcd) + "," + num(mean_gpe) + "," + num(ref_v / n) + "," +
           num(hyp_v / n) + "," + num(joint_v / n) + "," +
           num(static_cast<double>(rows.size() - scored) / n) + "\n";
    write_text_file(out, csv);
    write_run_manifest(manifest_path_for(run_manifest, out), "evaluate", cfg);
    print_summary(json{{"out", out},
                       {"pairs", rows.size()},
                       {"mean_mcd_db", mean_mcd},
                       {"mean_gpe", mean_gpe},
                       {"gpe_vacuous_pairs", rows.size() - scored}});
  }
};

void register_evaluate(CLI::App& app) {
  auto c = std::make_shared<EvaluateCmd>();
  CLI::App* sub = app.add_subcommand(
      "evaluate", "Score paired manifests: per-utterance MCD, GPE, and voiced-frame counts");
  c->binder = std::make_shared<ConfigBinder>(sub);
  c->binder->bind("--ref-manifest", "ref_manifest", c->ref_manifest, "reference manifest (JSONL)");
  c->binder->bind("--hyp-manifest", "hyp_manifest", c->hyp_manifest, "hypothesis manifest (JSONL)");
  c->binder->bind("--ref-field", "ref_field", c->ref_field,
                  "record field holding the reference WAV path");
  c->binder->bind("--hyp-field", "hyp_field", c->hyp_field,
                  "record field holding the hypothesis WAV path");
  c->binder->bind("--gpe-threshold", "gpe_threshold", c->gpe_threshold,
                  "relative f0 deviation counted as a gross error");
  sub->add_option("-o,--out", c->out, "output CSV");
  sub->add_option("--jobs", c->jobs, "worker threads; results are independent of this");
  sub->add_option("--run-manifest", c->run_manifest, "run manifest path (default <out>.run.json)");
  sub->callback([c] { c->run(); });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reverberation-preserving speech restoration toolkit"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  register_simulate_rir(app);
  register_analyze_rir(app);
  register_degrade(app);
  register_baseline(app);
  register_synth_corpus(app);
  register_train(app);
  register_encode(app);
  register_decode_demo(app);
  register_interp(app);
  register_pca(app);
  register_sample(app);
  register_evaluate(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e);  // --help / --version
    }
    std::cerr << json{{"error", std::string("usage: ") + e.what()}}.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", e.what()}}.dump() << "\n";
    return 1;
  }
  return 0;
}
