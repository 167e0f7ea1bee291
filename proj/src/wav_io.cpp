#include "reverbkit/wav_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace reverbkit {

namespace {

uint32_t read_u32le(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t read_u16le(const unsigned char* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void put_u32le(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

void put_u16le(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

[[noreturn]] void fail(const std::string& path, const std::string& why) {
  throw std::runtime_error("wav: " + path + ": " + why);
}

}  // namespace

Waveform read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t n = bytes.size();

  if (n < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0) {
    fail(path, "not a RIFF/WAVE file");
  }

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  bool have_fmt = false;
  Waveform w;

  std::size_t pos = 12;
  while (pos + 8 <= n) {
    const char* id = bytes.data() + pos;
    const uint32_t chunk_size = read_u32le(p + pos + 4);
    const std::size_t body = pos + 8;
    if (body + chunk_size > n) fail(path, "truncated chunk");

    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (chunk_size < 16) fail(path, "fmt chunk too small");
      format = read_u16le(p + body);
      channels = read_u16le(p + body + 2);
      rate = read_u32le(p + body + 4);
      bits = read_u16le(p + body + 14);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      if (!have_fmt) fail(path, "data chunk before fmt chunk");
      if (channels != 1) fail(path, "only mono supported, got " + std::to_string(channels) + " channels");
      if (format == 1 && bits == 16) {
        const std::size_t count = chunk_size / 2;
        w.samples.resize(count);
        for (std::size_t i = 0; i < count; ++i) {
          const int16_t v = static_cast<int16_t>(read_u16le(p + body + 2 * i));
          w.samples[i] = static_cast<double>(v) / 32768.0;
        }
      } else if (format == 3 && bits == 32) {
        const std::size_t count = chunk_size / 4;
        w.samples.resize(count);
        for (std::size_t i = 0; i < count; ++i) {
          uint32_t u = read_u32le(p + body + 4 * i);
          float f;
          std::memcpy(&f, &u, 4);
          w.samples[i] = static_cast<double>(f);
        }
      } else {
        fail(path, "unsupported format (need PCM16 or IEEE float32), format=" +
                       std::to_string(format) + " bits=" + std::to_string(bits));
      }
      w.sample_rate = static_cast<double>(rate);
      return w;
    }
    // Chunks are word-aligned.
    pos = body + chunk_size + (chunk_size & 1);
  }
  fail(path, "no data chunk");
}

void write_wav(const std::string& path, const Waveform& w, WavEncoding encoding) {
  require_valid(w, "write_wav");
  std::string out;
  const uint32_t rate = static_cast<uint32_t>(std::lround(w.sample_rate));
  const bool f32 = encoding == WavEncoding::Float32;
  const uint32_t bytes_per_sample = f32 ? 4 : 2;
  const uint32_t data_size = static_cast<uint32_t>(w.size() * bytes_per_sample);
  const uint32_t fact_size = f32 ? 12 : 0;  // float wavs carry a fact chunk
  const uint32_t riff_size = 4 + (8 + 16) + fact_size + (8 + data_size);

  out.reserve(riff_size + 8);
  out += "RIFF";
  put_u32le(out, riff_size);
  out += "WAVE";
  out += "fmt ";
  put_u32le(out, 16);
  put_u16le(out, f32 ? 3 : 1);
  put_u16le(out, 1);
  put_u32le(out, rate);
  put_u32le(out, rate * bytes_per_sample);
  put_u16le(out, static_cast<uint16_t>(bytes_per_sample));
  put_u16le(out, static_cast<uint16_t>(8 * bytes_per_sample));
  if (f32) {
    out += "fact";
    put_u32le(out, 4);
    put_u32le(out, static_cast<uint32_t>(w.size()));
  }
  out += "data";
  put_u32le(out, data_size);

  if (f32) {
    for (double s : w.samples) {
      const float f = static_cast<float>(s);
      uint32_t u;
      std::memcpy(&u, &f, 4);
      put_u32le(out, u);
    }
  } else {
    for (double s : w.samples) {
      // Same symmetric convention as the codec interchange: scale by 32768
      // both ways, clamping the one unreachable positive code.
      const double v = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
      put_u16le(out, static_cast<uint16_t>(static_cast<int16_t>(v)));
    }
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(path, "cannot open for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) fail(path, "write failed");
}

}  // namespace reverbkit
