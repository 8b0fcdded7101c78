#include "dsenh/wavio.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "dsenh/common.hpp"
#include "dsenh/resample.hpp"

namespace dsenh {

namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;

uint32_t read_u32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t read_u16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::vector<uint8_t>& v, uint32_t x) {
  v.push_back(x & 0xff);
  v.push_back((x >> 8) & 0xff);
  v.push_back((x >> 16) & 0xff);
  v.push_back((x >> 24) & 0xff);
}

void put_u16(std::vector<uint8_t>& v, uint16_t x) {
  v.push_back(x & 0xff);
  v.push_back((x >> 8) & 0xff);
}

}  // namespace

Waveform read_wav_native(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("wav: cannot open " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw FormatError("wav: not a RIFF/WAVE file: " + path);
  }

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  const uint8_t* data = nullptr;
  uint32_t data_len = 0;
  bool have_fmt = false;

  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
    const uint32_t len = read_u32(bytes.data() + pos + 4);
    const size_t body = pos + 8;
    if (body + len > bytes.size()) {
      throw FormatError("wav: truncated chunk in " + path);
    }
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (len < 16) throw FormatError("wav: malformed fmt chunk in " + path);
      format = read_u16(bytes.data() + body);
      channels = read_u16(bytes.data() + body + 2);
      rate = read_u32(bytes.data() + body + 4);
      bits = read_u16(bytes.data() + body + 14);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = bytes.data() + body;
      data_len = len;
    }
    pos = body + len + (len & 1);  // chunks are word aligned
  }
  if (!have_fmt || data == nullptr) {
    throw FormatError("wav: missing fmt or data chunk in " + path);
  }
  if (channels == 0 || rate == 0) {
    throw FormatError("wav: malformed header in " + path);
  }

  Waveform w;
  w.sample_rate = static_cast<int>(rate);
  if (format == kFormatPcm && bits == 16) {
    const uint32_t frame_bytes = channels * 2u;
    const uint32_t frames = data_len / frame_bytes;
    w.samples.resize(frames);
    for (uint32_t i = 0; i < frames; ++i) {
      const uint8_t* p = data + static_cast<size_t>(i) * frame_bytes;
      const int16_t s = static_cast<int16_t>(p[0] | (p[1] << 8));
      w.samples[i] = static_cast<float>(s) / 32768.0f;
    }
  } else if (format == kFormatFloat && bits == 32) {
    const uint32_t frame_bytes = channels * 4u;
    const uint32_t frames = data_len / frame_bytes;
    w.samples.resize(frames);
    for (uint32_t i = 0; i < frames; ++i) {
      float s;
      std::memcpy(&s, data + static_cast<size_t>(i) * frame_bytes, 4);
      w.samples[i] = s;
    }
  } else {
    throw FormatError("wav: unsupported codec (format " +
                      std::to_string(format) + ", " + std::to_string(bits) +
                      " bit) in " + path);
  }
  w.validate();
  return w;
}

Waveform read_wav(const std::string& path) {
  Waveform w = read_wav_native(path);
  if (w.sample_rate != kSampleRate) {
    w = resample(w, kSampleRate);
  }
  return w;
}

void write_wav(const std::string& path, const Waveform& w) {
  w.validate();
  const uint32_t n = static_cast<uint32_t>(w.samples.size());
  const uint32_t data_len = n * 2;
  std::vector<uint8_t> out;
  out.reserve(44 + data_len);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32(out, 36 + data_len);
  out.insert(out.end(), {'W', 'A', 'V', 'E'});
  out.insert(out.end(), {'f', 'm', 't', ' '});
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<uint32_t>(w.sample_rate));
  put_u32(out, static_cast<uint32_t>(w.sample_rate) * 2);  // byte rate
  put_u16(out, 2);                                         // block align
  put_u16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32(out, data_len);
  for (uint32_t i = 0; i < n; ++i) {
    double v = std::lrint(static_cast<double>(w.samples[i]) * 32768.0);
    v = std::min(32767.0, std::max(-32768.0, v));
    const int16_t s = static_cast<int16_t>(v);
    put_u16(out, static_cast<uint16_t>(s));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("wav: cannot write " + path);
  f.write(reinterpret_cast<const char*>(out.data()),
          static_cast<std::streamsize>(out.size()));
  if (!f) throw FormatError("wav: write failed for " + path);
}

}  // namespace dsenh
