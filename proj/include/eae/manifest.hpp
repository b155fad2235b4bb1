#pragma once

// Per-directory record of the commands that produced its artifacts.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "eae/error.hpp"
#include "eae/hash.hpp"

#ifndef EAE_VERSION
#define EAE_VERSION "0.1.0"
#endif
#ifndef EAE_GIT_REV
#define EAE_GIT_REV "unknown"
#endif

namespace eae {

inline std::string code_version() { return std::string(EAE_VERSION) + "+" + EAE_GIT_REV; }

inline std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Checksum over input files, order-sensitive, names excluded so a moved
// corpus keeps its checksum.
inline std::string corpus_checksum(const std::vector<std::filesystem::path>& files) {
  Sha256 h;
  for (const auto& f : files) h.update(sha256_file(f)).update("\n");
  return h.hex();
}

// One step of a manifest: which command ran, on what, producing what.
struct RunStep {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::string corpus_checksum;
  std::uint64_t seed = 0;
  std::string started;
  std::string finished;
  std::vector<std::string> outputs;

  nlohmann::json to_json() const {
    return {{"command", command},   {"config", config},     {"corpus_checksum", corpus_checksum},
            {"code_version", code_version()}, {"seed", seed}, {"started", started},
            {"finished", finished}, {"outputs", outputs}};
  }
};

// manifest.json holds every step run into the directory, oldest first; a
// rerun of the same command replaces its earlier entry.
class RunManifest {
 public:
  static constexpr const char* kFileName = "manifest.json";

  static void record(const std::filesystem::path& dir, const RunStep& step) {
    std::filesystem::create_directories(dir);
    const auto path = dir / kFileName;
    nlohmann::json m = {{"format", "eae-run-manifest"}, {"steps", nlohmann::json::array()}};
    if (std::filesystem::exists(path)) {
      try {
        m = nlohmann::json::parse(std::ifstream(path));
      } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
      }
    }
    auto& steps = m["steps"];
    for (auto it = steps.begin(); it != steps.end();) {
      it = it->value("command", "") == step.command ? steps.erase(it) : it + 1;
    }
    steps.push_back(step.to_json());
    const auto tmp = dir / (std::string(kFileName) + ".tmp");
    {
      std::ofstream out(tmp);
      if (!out) throw PathError("cannot write '" + tmp.string() + "'");
      out << m.dump(2) << '\n';
    }
    std::filesystem::rename(tmp, path);
  }

  static nlohmann::json read(const std::filesystem::path& dir) {
    const auto path = dir / kFileName;
    if (!std::filesystem::exists(path)) throw PathError("no manifest in '" + dir.string() + "'");
    try {
      return nlohmann::json::parse(std::ifstream(path));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string() + ": " + e.what());
    }
  }
};

}  // namespace eae
