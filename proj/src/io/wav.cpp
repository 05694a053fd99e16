// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#include "labnet/io/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "labnet/common.hpp"

namespace labnet::io {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xfffe;

std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}

void put32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>(v >> 8));
}

}  // namespace

WavData read_wav(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open '" + path + "'");
  const std::vector<unsigned char> b(std::istreambuf_iterator<char>(f), {});
  auto fail = [&path](const std::string& why) { throw InputError("'" + path + "': " + why); };
  if (b.size() < 12 || std::memcmp(b.data(), "RIFF", 4) != 0 ||
      std::memcmp(b.data() + 8, "WAVE", 4) != 0) {
    fail("not a RIFF/WAVE file");
  }

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_len = 0;
  std::size_t pos = 12;
  while (pos + 8 <= b.size()) {
    const unsigned char* id = b.data() + pos;
    std::size_t len = le32(b.data() + pos + 4);
    const std::size_t body = pos + 8;
    if (body + len > b.size()) {
      // Tolerate an oversized data chunk length from truncated writers.
      if (std::memcmp(id, "data", 4) != 0) fail("chunk runs past end of file");
      len = b.size() - body;
    }
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (len < 16) fail("fmt chunk too short");
      format = le16(b.data() + body);
      channels = le16(b.data() + body + 2);
      rate = le32(b.data() + body + 4);
      bits = le16(b.data() + body + 14);
      if (format == kFormatExtensible && len >= 26) format = le16(b.data() + body + 24);
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = b.data() + body;
      data_len = len;
    }
    pos = body + len + (len & 1);
  }
  if (channels == 0) fail("missing fmt chunk");
  if (!data) fail("missing data chunk");
  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool float32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !float32) {
    fail("unsupported sample format (format " + std::to_string(format) + ", " +
         std::to_string(bits) + " bits); expected 16-bit PCM or 32-bit float");
  }

  const std::size_t width = bits / 8;
  const std::size_t frames = data_len / (width * channels);
  WavData out;
  out.sample_rate = static_cast<int>(rate);
  out.channels.assign(channels, std::vector<float>(frames));
  for (std::size_t n = 0; n < frames; ++n) {
    for (std::size_t c = 0; c < channels; ++c) {
      const unsigned char* p = data + (n * channels + c) * width;
      if (pcm16) {
        out.channels[c][n] = static_cast<float>(static_cast<std::int16_t>(le16(p))) / 32768.0f;
      } else {
        const std::uint32_t bits32 = le32(p);
        float v;
        std::memcpy(&v, &bits32, 4);
        out.channels[c][n] = v;
      }
    }
  }
  return out;
}

void write_wav(const std::string& path, const WavData& wav, SampleFormat format) {
  if (wav.channels.empty()) throw ContractError("write_wav: no channels");
  const std::size_t frames = wav.num_frames();
  for (const auto& ch : wav.channels) {
    if (ch.size() != frames) throw ContractError("write_wav: channels differ in length");
  }
  const std::uint16_t channels = static_cast<std::uint16_t>(wav.channels.size());
  const std::uint16_t bits = format == SampleFormat::kPcm16 ? 16 : 32;
  const std::uint16_t block = static_cast<std::uint16_t>(channels * bits / 8);
  const std::uint32_t data_len = static_cast<std::uint32_t>(frames * block);

  std::string s;
  s.reserve(44 + data_len);
  s += "RIFF";
  put32(s, 36 + data_len);
  s += "WAVEfmt ";
  put32(s, 16);
  put16(s, format == SampleFormat::kPcm16 ? kFormatPcm : kFormatFloat);
  put16(s, channels);
  put32(s, static_cast<std::uint32_t>(wav.sample_rate));
  put32(s, static_cast<std::uint32_t>(wav.sample_rate) * block);
  put16(s, block);
  put16(s, bits);
  s += "data";
  put32(s, data_len);
  for (std::size_t n = 0; n < frames; ++n) {
    for (std::size_t c = 0; c < channels; ++c) {
      const float v = wav.channels[c][n];
      if (format == SampleFormat::kPcm16) {
        const float scaled = std::round(std::clamp(v, -1.0f, 1.0f) * 32768.0f);
        put16(s, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::clamp(scaled, -32768.0f, 32767.0f))));
      } else {
        std::uint32_t bits32;
        std::memcpy(&bits32, &v, 4);
        put32(s, bits32);
      }
    }
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw InputError("cannot open '" + path + "' for writing");
  f.write(s.data(), static_cast<std::streamsize>(s.size()));
  if (!f) throw InputError("failed writing '" + path + "'");
}

void write_wav(const std::string& path, const std::vector<float>& samples, int sample_rate,
               SampleFormat format) {
  WavData w;
  w.sample_rate = sample_rate;
  w.channels.push_back(samples);
  write_wav(path, w, format);
}

}  // namespace labnet::io
