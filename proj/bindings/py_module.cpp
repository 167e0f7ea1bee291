// py_module.cpp -- the _reverbkit extension: a thin NumPy veneer over the
// C++ core. Audio crosses the boundary as 1-D float64 arrays plus an explicit
// sample rate; feature matrices as 2-D float64 arrays (frames x bands).
// std::invalid_argument surfaces as ValueError, std::runtime_error as
// RuntimeError.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "reverbkit/baseline.hpp"
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

namespace py = pybind11;
using namespace reverbkit;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

Waveform to_waveform(const DoubleArray& a, double sample_rate) {
  if (a.ndim() != 1) throw std::invalid_argument("expected a 1-D array of samples");
  Waveform w;
  w.sample_rate = sample_rate;
  w.samples.assign(a.data(), a.data() + a.size());
  return w;
}

py::array_t<double> from_samples(const std::vector<double>& samples) {
  py::array_t<double> out(static_cast<py::ssize_t>(samples.size()));
  std::copy(samples.begin(), samples.end(), out.mutable_data());
  return out;
}

Matrix to_matrix(const DoubleArray& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D array");
  Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), m.data.begin());
  return m;
}

py::array_t<double> from_matrix(const Matrix& m) {
  py::array_t<double> out({static_cast<py::ssize_t>(m.rows), static_cast<py::ssize_t>(m.cols)});
  std::copy(m.data.begin(), m.data.end(), out.mutable_data());
  return out;
}

std::array<double, 3> to_point_array(const std::vector<double>& v, const char* who) {
  if (v.size() != 3) throw std::invalid_argument(std::string(who) + " must have 3 components");
  return {v[0], v[1], v[2]};
}

Point3 to_point(const std::vector<double>& v, const char* who) {
  const auto a = to_point_array(v, who);
  return {a[0], a[1], a[2]};
}

RIR rir_from_taps(const DoubleArray& taps, double sample_rate) {
  RIR r;
  r.taps = to_waveform(taps, sample_rate);
  return r;
}

// Shared grid/random sampling body: flatten the sampled feature list into an
// N x D array.
py::array_t<double> features_to_array(const std::vector<std::vector<double>>& fs) {
  const py::ssize_t n = static_cast<py::ssize_t>(fs.size());
  const py::ssize_t d = n > 0 ? static_cast<py::ssize_t>(fs[0].size()) : 0;
  py::array_t<double> out({n, d});
  double* dst = out.mutable_data();
  for (const std::vector<double>& f : fs) dst = std::copy(f.begin(), f.end(), dst);
  return out;
}

PlaneRegion region_from(const PcaModel& pca, const std::optional<std::vector<double>>& lo,
                        const std::optional<std::vector<double>>& hi) {
  PlaneRegion region = default_region(pca);
  if (lo) {
    if (lo->size() != 2) throw std::invalid_argument("lo must have 2 components");
    region.lo = {(*lo)[0], (*lo)[1]};
  }
  if (hi) {
    if (hi->size() != 2) throw std::invalid_argument("hi must have 2 components");
    region.hi = {(*hi)[0], (*hi)[1]};
  }
  return region;
}

}  // namespace

PYBIND11_MODULE(_reverbkit, m) {
  m.doc() = "Reverberation-preserving speech restoration toolkit";

  // ---- room impulse responses -------------------------------------------
  m.def(
      "simulate_rir",
      [](const std::vector<double>& dims, const std::vector<double>& src,
         const std::vector<double>& mic, double absorption, double sample_rate, int max_order,
         double speed_of_sound) {
        RoomSpec room;
        room.dims = to_point_array(dims, "dims");
        room.absorption = absorption;
        room.max_order = max_order;
        room.sample_rate = sample_rate;
        room.speed_of_sound = speed_of_sound;
        return from_samples(simulate_rir(room, to_point(src, "src"), to_point(mic, "mic")).taps.samples);
      },
      py::arg("dims"), py::arg("src"), py::arg("mic"), py::arg("absorption") = 0.3,
      py::arg("sample_rate") = 24000.0, py::arg("max_order") = -1,
      py::arg("speed_of_sound") = 343.0,
      "Shoebox image-method impulse response as a 1-D array of taps.");

  m.def(
      "absorption_for_rt60",
      [](const std::vector<double>& dims, double rt60_target) {
        bool clamped = false;
        const double alpha = absorption_for_rt60(to_point_array(dims, "dims"), rt60_target, &clamped);
        return py::make_tuple(alpha, clamped);
      },
      py::arg("dims"), py::arg("rt60"),
      "Uniform wall absorption hitting a target RT60; returns (alpha, clamped).");

  m.def(
      "random_placement",
      [](const std::vector<double>& dims, std::uint64_t seed, double min_wall_dist) {
        RoomSpec room;
        room.dims = to_point_array(dims, "dims");
        Rng rng(seed);
        const auto [src, mic] = random_placement(room, rng, min_wall_dist);
        return py::make_tuple(std::vector<double>{src.x, src.y, src.z},
                              std::vector<double>{mic.x, mic.y, mic.z});
      },
      py::arg("dims"), py::arg("seed"), py::arg("min_wall_dist") = 0.5,
      "Draw a (source, microphone) placement away from the walls.");

  m.def(
      "rt60", [](const DoubleArray& taps, double sample_rate) { return rt60(to_waveform(taps, sample_rate)); },
      py::arg("taps"), py::arg("sample_rate"),
      "Reverberation time from the Schroeder energy decay curve.");

  m.def(
      "drr",
      [](const DoubleArray& taps, double sample_rate, double direct_window_s) {
        return drr(to_waveform(taps, sample_rate), direct_window_s);
      },
      py::arg("taps"), py::arg("sample_rate"), py::arg("direct_window_s") = 0.008,
      "Direct-to-reverberant ratio in dB (inf when there is no late energy).");

  m.def(
      "energy_decay_curve",
      [](const DoubleArray& taps, double sample_rate) {
        return from_samples(energy_decay_curve(to_waveform(taps, sample_rate)));
      },
      py::arg("taps"), py::arg("sample_rate"), "Schroeder backward-integrated decay in dB.");

  // ---- signals ------------------------------------------------------------
  m.def(
      "synth_utterance",
      [](double duration_s, double sample_rate, std::uint64_t seed) {
        Rng rng(seed);
        return from_samples(synth_utterance(duration_s, sample_rate, rng).samples);
      },
      py::arg("duration_s"), py::arg("sample_rate"), py::arg("seed"),
      "Synthetic speech-like utterance (voiced/unvoiced segments with pitch drift).");

  m.def(
      "synth_noise",
      [](double duration_s, double sample_rate, std::uint64_t seed) {
        Rng rng(seed);
        return from_samples(synth_noise(duration_s, sample_rate, rng).samples);
      },
      py::arg("duration_s"), py::arg("sample_rate"), py::arg("seed"),
      "Synthetic shaped background noise.");

  m.def(
      "convolve",
      [](const DoubleArray& x, const DoubleArray& h) {
        return from_samples(
            convolve(to_waveform(x, 1.0), to_waveform(h, 1.0)).samples);
      },
      py::arg("x"), py::arg("h"), "Full linear convolution of two 1-D signals.");

  m.def(
      "log_mel",
      [](const DoubleArray& samples, double sample_rate, std::size_t n_mels) {
        const Waveform w = to_waveform(samples, sample_rate);
        return from_matrix(log_mel(w, StftParams::for_rate(sample_rate), n_mels).frames);
      },
      py::arg("samples"), py::arg("sample_rate"), py::arg("n_mels") = kDefaultMelBands,
      "Log-mel spectrogram (frames x bands) at the rate-scaled analysis defaults.");

  m.def(
      "degrade",
      [](const DoubleArray& speech, const DoubleArray& rir_taps, double sample_rate,
         std::optional<DoubleArray> noise, double snr_db, const std::string& chain,
         std::uint64_t seed) {
        const Waveform s = to_waveform(speech, sample_rate);
        const RIR r = rir_from_taps(rir_taps, sample_rate);
        Waveform n(std::vector<double>{}, sample_rate);
        if (noise) n = to_waveform(*noise, sample_rate);
        Rng rng(seed);
        return from_samples(degrade(s, r, n, snr_db, parse_artifact_chain(chain), rng).samples);
      },
      py::arg("speech"), py::arg("rir"), py::arg("sample_rate"), py::arg("noise") = std::nullopt,
      py::arg("snr_db") = std::numeric_limits<double>::infinity(), py::arg("chain") = "",
      py::arg("seed") = 0,
      "Reverberate, mix noise at the given SNR, and apply an artifact chain.");

  // ---- matched-reverberation baseline ------------------------------------
  m.def(
      "apply_matched_reverb",
      [](const DoubleArray& dry, double sample_rate, double rt60_target, double drr_target,
         std::size_t n_candidates, std::uint64_t seed, int max_order) {
        RoomPrior prior;
        prior.sample_rate = sample_rate;
        prior.max_order = max_order;
        Rng rng(seed);
        const MatchedReverbResult result = apply_matched_reverb(
            to_waveform(dry, sample_rate), rt60_target, drr_target, n_candidates, prior, rng);
        return py::make_tuple(from_samples(result.rendered.samples),
                              result.candidate_drrs[result.chosen_index]);
      },
      py::arg("dry"), py::arg("sample_rate"), py::arg("rt60"), py::arg("drr"),
      py::arg("n_candidates") = 20, py::arg("seed") = 0, py::arg("max_order") = -1,
      "Re-reverberate dry speech toward a target RT60 and DRR; returns "
      "(rendered, chosen_drr_db).");

  m.def(
      "rt60_drr_from_reference",
      [](const DoubleArray& taps, double sample_rate) {
        const auto [t, d] = rt60_drr_from_reference(to_waveform(taps, sample_rate));
        return py::make_tuple(t, d);
      },
      py::arg("taps"), py::arg("sample_rate"),
      "Measure (rt60, drr) of a reference impulse response.");

  // ---- metrics -------------------------------------------------------------
  m.def(
      "mcd",
      [](const DoubleArray& ref, const DoubleArray& hyp, double sample_rate) {
        return mcd(to_waveform(ref, sample_rate), to_waveform(hyp, sample_rate));
      },
      py::arg("ref"), py::arg("hyp"), py::arg("sample_rate"),
      "Mel-cepstral distortion in dB between two equal-rate signals.");

  m.def(
      "gpe",
      [](const DoubleArray& ref, const DoubleArray& hyp, double sample_rate, double threshold) {
        const GpeResult r =
            gpe(to_waveform(ref, sample_rate), to_waveform(hyp, sample_rate), threshold);
        return py::make_tuple(r.value, r.joint_voiced_frames);
      },
      py::arg("ref"), py::arg("hyp"), py::arg("sample_rate"), py::arg("threshold") = 0.2,
      "Gross pitch error; returns (fraction, jointly_voiced_frames).");

  m.def(
      "pitch_track",
      [](const DoubleArray& samples, double sample_rate) {
        const PitchTrack t = pitch_track(to_waveform(samples, sample_rate));
        py::array_t<bool> voiced(static_cast<py::ssize_t>(t.voiced.size()));
        for (std::size_t i = 0; i < t.voiced.size(); ++i) {
          voiced.mutable_data()[i] = t.voiced[i] != 0;
        }
        return py::make_tuple(from_samples(t.f0_hz), voiced, t.hop_s);
      },
      py::arg("samples"), py::arg("sample_rate"),
      "Autocorrelation pitch track; returns (f0_hz, voiced, hop_s).");

  // ---- feature space --------------------------------------------------------
  m.def("interpolate", &interpolate, py::arg("c1"), py::arg("c2"), py::arg("alpha"),
        "Linear interpolation between two reverb features (exact at the endpoints).");

  m.def("derive_seed", &derive_seed, py::arg("seed"), py::arg("index"),
        "Deterministic per-item substream seed.");

  // ---- wav io ----------------------------------------------------------------
  m.def(
      "read_wav",
      [](const std::string& path) {
        const Waveform w = read_wav(path);
        return py::make_tuple(from_samples(w.samples), w.sample_rate);
      },
      py::arg("path"), "Read a wav file; returns (samples, sample_rate).");

  m.def(
      "write_wav",
      [](const std::string& path, const DoubleArray& samples, double sample_rate, bool pcm16) {
        write_wav(path, to_waveform(samples, sample_rate),
                  pcm16 ? WavEncoding::Pcm16 : WavEncoding::Float32);
      },
      py::arg("path"), py::arg("samples"), py::arg("sample_rate"), py::arg("pcm16") = false,
      "Write a mono wav file (float32 by default).");

  // ---- model ------------------------------------------------------------------
  py::class_<ReverbModel>(m, "Model", "Reverb encoder plus conditioned decoder.")
      .def_static(
          "create",
          [](std::size_t n_mels, std::size_t hidden, std::size_t feature_dim, std::uint64_t seed) {
            ModelConfig cfg;
            cfg.n_mels = n_mels;
            cfg.hidden = hidden;
            cfg.feature_dim = feature_dim;
            return make_model(cfg, seed);
          },
          py::arg("n_mels") = kDefaultMelBands, py::arg("hidden") = 32,
          py::arg("feature_dim") = 16, py::arg("seed") = 1, "Fresh randomly initialized model.")
      .def_static("load", &load_model, py::arg("path"), "Load a saved checkpoint.")
      .def("save", [](const ReverbModel& model, const std::string& path) { save_model(path, model); },
           py::arg("path"), "Save a checkpoint.")
      .def(
          "encode",
          [](const ReverbModel& model, const DoubleArray& x_mel) {
            LogMelSpectrogram x;
            x.frames = to_matrix(x_mel);
            return from_samples(encode(model, x));
          },
          py::arg("x_mel"), "Reverb feature of a (frames x bands) log-mel input.")
      .def(
          "decode",
          [](const ReverbModel& model, const DoubleArray& clean_mel,
             const std::vector<double>& feature) {
            return from_matrix(decode(model, to_matrix(clean_mel), feature));
          },
          py::arg("clean_mel"), py::arg("feature"),
          "Predicted log-mel given clean frames and a reverb feature.")
      .def(
          "train",
          [](ReverbModel& model,
             const std::vector<std::tuple<DoubleArray, DoubleArray, DoubleArray>>& items,
             std::size_t steps, std::size_t batch, double q, std::uint64_t seed, double lr,
             std::size_t warmup) {
            std::vector<TrainItem> train_items;
            train_items.reserve(items.size());
            for (const auto& [s_mel, r_mel, x_mel] : items) {
              TrainItem item;
              item.s_mel = to_matrix(s_mel);
              item.r_mel = to_matrix(r_mel);
              item.x_mel = to_matrix(x_mel);
              train_items.push_back(std::move(item));
            }
            TrainConfig cfg;
            cfg.steps = steps;
            cfg.batch = batch;
            cfg.q = q;
            cfg.seed = seed;
            cfg.adam.lr = lr;
            cfg.adam.warmup_steps = warmup;
            return from_samples(train(model, train_items, cfg).loss_curve);
          },
          py::arg("items"), py::arg("steps") = 2000, py::arg("batch") = 8, py::arg("q") = 0.1,
          py::arg("seed") = 1, py::arg("lr") = 2e-3, py::arg("warmup") = 200,
          "Optimize in place on (s_mel, r_mel, x_mel) triples; returns the loss curve.")
      .def_property_readonly("n_mels", [](const ReverbModel& model) { return model.cfg.n_mels; })
      .def_property_readonly("feature_dim",
                             [](const ReverbModel& model) { return model.cfg.feature_dim; })
      .def_property_readonly("parameter_count",
                             [](const ReverbModel& model) { return model.parameter_count(); });

  // ---- feature-space PCA -----------------------------------------------------
  py::class_<PcaModel>(m, "Pca", "PCA over reverb features for browsing and sampling.")
      .def_static(
          "fit", [](const DoubleArray& features, std::size_t k) { return pca_fit(to_matrix(features), k); },
          py::arg("features"), py::arg("k"),
          "Fit to an (items x feature_dim) matrix, keeping k components.")
      .def_static("load", &load_pca, py::arg("path"))
      .def("save", [](const PcaModel& pca, const std::string& path) { save_pca(path, pca); },
           py::arg("path"))
      .def(
          "project",
          [](const PcaModel& pca, const std::vector<double>& c) {
            return from_samples(pca_project(pca, c));
          },
          py::arg("feature"), "Coordinates of a feature in the component basis.")
      .def(
          "lift",
          [](const PcaModel& pca, const std::vector<double>& z) {
            return from_samples(pca_lift(pca, z));
          },
          py::arg("coords"), "Feature reconstructed from component coordinates.")
      .def(
          "sample_grid",
          [](const PcaModel& pca, std::size_t nx, std::size_t ny,
             const std::optional<std::vector<double>>& lo,
             const std::optional<std::vector<double>>& hi) {
            return features_to_array(sample_plane_grid(pca, region_from(pca, lo, hi), nx, ny));
          },
          py::arg("nx") = 3, py::arg("ny") = 3, py::arg("lo") = std::nullopt,
          py::arg("hi") = std::nullopt,
          "Features on an nx x ny grid over the first two components.")
      .def(
          "sample_random",
          [](const PcaModel& pca, std::size_t count, std::uint64_t seed,
             const std::optional<std::vector<double>>& lo,
             const std::optional<std::vector<double>>& hi) {
            Rng rng(seed);
            return features_to_array(
                sample_plane_random(pca, region_from(pca, lo, hi), count, rng));
          },
          py::arg("count"), py::arg("seed"), py::arg("lo") = std::nullopt,
          py::arg("hi") = std::nullopt,
          "Features drawn uniformly over the first two components.")
      .def_property_readonly("k", [](const PcaModel& pca) { return pca.components.rows; })
      .def_property_readonly("dim", &PcaModel::dim)
      .def_property_readonly("variances", [](const PcaModel& pca) { return pca.variances; });

  m.def("save_feature", &save_feature, py::arg("path"), py::arg("feature"),
        "Write a reverb feature vector.");
  m.def("load_feature", &load_feature, py::arg("path"), "Read a reverb feature vector.");

  m.attr("__version__") = "0.1.0";
}
