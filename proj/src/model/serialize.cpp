// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#include "labnet/model/serialize.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "labnet/common.hpp"

namespace labnet::model {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  put_u32(out, bits);
}

class Reader {
 public:
  explicit Reader(std::vector<unsigned char> bytes) : bytes_(std::move(bytes)) {}

  void need(std::size_t n, const std::string& what) const {
    if (bytes_.size() - pos_ < n) {
      throw CorruptModelError("parameter file truncated while reading " + what);
    }
  }
  std::uint32_t u32(const std::string& what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64(const std::string& what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  std::string str(std::size_t n, const std::string& what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  float f32(const std::string& what) {
    const std::uint32_t bits = u32(what);
    float f;
    std::memcpy(&f, &bits, 4);
    return f;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::vector<unsigned char> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

nlohmann::json hyper_to_json(const ModelHyper& h) {
  return {{"hidden", h.hidden},
          {"freq_hidden", h.freq_hidden},
          {"time_hidden", h.time_hidden},
          {"kernel_t", h.kernel_t},
          {"kernel_f", h.kernel_f},
          {"heads", h.heads},
          {"num_bins", h.num_bins},
          {"compress_exp", h.compress_exp},
          {"aggregator", aggregator_name(h.aggregator)},
          {"stage1", h.stage1},
          {"stage2", h.stage2},
          {"stage3", h.stage3}};
}

ModelHyper hyper_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("model block must be an object");
  ModelHyper h;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "hidden") h.hidden = value.get<std::size_t>();
      else if (key == "freq_hidden") h.freq_hidden = value.get<std::size_t>();
      else if (key == "time_hidden") h.time_hidden = value.get<std::size_t>();
      else if (key == "kernel_t") h.kernel_t = value.get<std::size_t>();
      else if (key == "kernel_f") h.kernel_f = value.get<std::size_t>();
      else if (key == "heads") h.heads = value.get<std::size_t>();
      else if (key == "num_bins") h.num_bins = value.get<std::size_t>();
      else if (key == "compress_exp") h.compress_exp = value.get<float>();
      else if (key == "aggregator") {
        const auto name = value.get<std::string>();
        if (name == "cca") h.aggregator = Aggregator::kCca;
        else if (name == "tac") h.aggregator = Aggregator::kTac;
        else throw ConfigError("model.aggregator must be 'cca' or 'tac', got '" + name + "'");
      } else if (key == "stage1") h.stage1 = value.get<bool>();
      else if (key == "stage2") h.stage2 = value.get<bool>();
      else if (key == "stage3") h.stage3 = value.get<bool>();
      else throw ConfigError("unknown model key '" + key + "'");
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("model." + key + ": " + e.what());
    }
  }
  h.validate();
  return h;
}

void save_params(const ModelParams& params, const std::string& path) {
  std::string out(kParamMagic, sizeof(kParamMagic));
  put_u32(out, kParamVersion);
  const std::string hyper = hyper_to_json(params.hyper()).dump();
  put_u32(out, static_cast<std::uint32_t>(hyper.size()));
  out += hyper;
  put_u32(out, static_cast<std::uint32_t>(params.names().size()));
  for (const std::string& name : params.names()) {
    const nn::Tensor<float>& t = params.at(name);
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put_u32(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) put_u64(out, d);
    for (float v : t.values()) put_f32(out, v);
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw InputError("cannot open '" + path + "' for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw InputError("failed writing '" + path + "'");
}

ModelParams load_params(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open parameter file '" + path + "'");
  Reader r(std::vector<unsigned char>(std::istreambuf_iterator<char>(f), {}));

  if (r.str(sizeof(kParamMagic), "magic") != std::string(kParamMagic, sizeof(kParamMagic))) {
    throw CorruptModelError("'" + path + "' is not a LABNet parameter file (bad magic)");
  }
  const std::uint32_t version = r.u32("version");
  if (version != kParamVersion) {
    throw CorruptModelError("unsupported parameter file version " + std::to_string(version));
  }
  const std::uint32_t hyper_len = r.u32("hyper block length");
  ModelHyper hyper;
  try {
    hyper = hyper_from_json(nlohmann::json::parse(r.str(hyper_len, "hyper block")));
  } catch (const CorruptModelError&) {
    throw;
  } catch (const std::exception& e) {
    throw CorruptModelError(std::string("invalid hyper block: ") + e.what());
  }

  const std::uint32_t count = r.u32("record count");
  std::map<std::string, nn::Tensor<float>> tensors;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string where = "record " + std::to_string(i);
    const std::string name = r.str(r.u32(where + " name length"), where + " name");
    const std::uint32_t rank = r.u32("rank of '" + name + "'");
    if (rank > 8) throw CorruptModelError("tensor '" + name + "' has implausible rank");
    nn::Shape shape(rank);
    std::uint64_t total = 1;
    for (auto& d : shape) {
      d = r.u64("shape of '" + name + "'");
      total *= d;
      if (total > (1ull << 32)) throw CorruptModelError("tensor '" + name + "' is implausibly large");
    }
    r.need(total * 4, "payload of '" + name + "'");
    nn::Tensor<float> t(shape);
    for (float& v : t.values()) v = r.f32(name);
    if (!tensors.emplace(name, std::move(t)).second) {
      throw CorruptModelError("duplicate tensor '" + name + "'");
    }
  }
  if (!r.done()) throw CorruptModelError("trailing bytes after last record");
  return ModelParams::from_tensors(hyper, std::move(tensors));
}

nlohmann::json describe(const ModelParams& params) {
  nlohmann::json tensors = nlohmann::json::array();
  for (const std::string& name : params.names()) {
    tensors.push_back({{"name", name}, {"shape", params.at(name).shape()}});
  }
  return {{"format_version", kParamVersion},
          {"hyper", hyper_to_json(params.hyper())},
          {"ablation", params.hyper().ablation_name()},
          {"parameters", params.count()},
          {"tensors", tensors}};
}

}  // namespace labnet::model
