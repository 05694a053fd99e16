// Copyright 2026 The LABNet Authors
// SPDX-License-Identifier: Apache-2.0

#include "labnet/io/manifest.hpp"

#include <filesystem>
#include <fstream>

#include "labnet/common.hpp"

namespace labnet::io {

nlohmann::json to_json(const ManifestEntry& e) {
  return {{"id", e.id},
          {"num_mics", e.num_mics},
          {"seed", e.seed},
          {"paths", {{"noisy", e.noisy}, {"clean", e.clean}, {"noise", e.noise}}},
          {"room", e.room},
          {"t60", e.t60},
          {"snr_db", e.snr_db},
          {"positions", {{"source", e.source}, {"mics", e.mics}, {"noises", e.noises}}}};
}

ManifestEntry entry_from_json(const nlohmann::json& j) {
  ManifestEntry e;
  auto field = [&j](const char* a, const char* b = nullptr) -> const nlohmann::json& {
    const std::string where = b ? std::string(a) + "." + b : std::string(a);
    if (!j.contains(a)) throw InputError("manifest record missing '" + where + "'");
    const auto& v = j.at(a);
    if (!b) return v;
    if (!v.contains(b)) throw InputError("manifest record missing '" + where + "'");
    return v.at(b);
  };
  try {
    e.id = field("id").get<std::string>();
    e.num_mics = field("num_mics").get<std::size_t>();
    e.seed = j.value("seed", std::uint64_t{0});
    e.noisy = field("paths", "noisy").get<std::vector<std::string>>();
    e.clean = field("paths", "clean").get<std::vector<std::string>>();
    e.noise = field("paths", "noise").get<std::vector<std::string>>();
    e.room = field("room").get<Point>();
    e.t60 = field("t60").get<double>();
    e.snr_db = field("snr_db").get<double>();
    e.source = field("positions", "source").get<Point>();
    e.mics = field("positions", "mics").get<std::vector<Point>>();
    e.noises = field("positions", "noises").get<std::vector<Point>>();
  } catch (const nlohmann::json::exception& ex) {
    throw InputError(std::string("malformed manifest record: ") + ex.what());
  }
  if (e.noisy.size() != e.num_mics || e.clean.size() != e.num_mics ||
      e.noise.size() != e.num_mics) {
    throw InputError("manifest record '" + e.id + "' lists a path count different from num_mics");
  }
  return e;
}

void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw InputError("cannot write manifest '" + path + "'");
  for (const auto& e : entries) f << to_json(e).dump() << '\n';
  if (!f) throw InputError("failed writing manifest '" + path + "'");
}

std::vector<ManifestEntry> read_manifest(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open manifest '" + path + "'");
  std::vector<ManifestEntry> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(entry_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& ex) {
      throw InputError(path + ":" + std::to_string(lineno) + ": " + ex.what());
    } catch (const InputError& ex) {
      throw InputError(path + ":" + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return out;
}

std::string parent_dir(const std::string& path) {
  const auto p = std::filesystem::path(path).parent_path();
  return p.empty() ? "." : p.string();
}

std::string join_path(const std::string& dir, const std::string& rel) {
  const std::filesystem::path r(rel);
  if (r.is_absolute()) return rel;
  return (std::filesystem::path(dir) / r).string();
}

}  // namespace labnet::io
