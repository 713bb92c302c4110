#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "secrel/config.hpp"
#include "secrel/hashing.hpp"

namespace secrel {

// Records what a command read and wrote, keyed by content digests, so that a
// run can be replayed and compared. Deliberately carries no timestamps:
// identical config + inputs must produce an identical manifest.
class Manifest {
 public:
  Manifest(std::string command, std::uint64_t seed) : command_(std::move(command)), seed_(seed) {}

  void add_input(const std::string& path) { inputs_.push_back({path, file_digest(path)}); }
  void add_output(const std::string& path) { outputs_.push_back({path, file_digest(path)}); }
  void set_config_digest(const std::string& digest) { config_digest_ = digest; }

  nlohmann::json to_json() const {
    auto files_json = [](const std::vector<std::pair<std::string, std::string>>& files) {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& [path, digest] : files)
        arr.push_back({{"path", path}, {"fnv1a64", digest}});
      return arr;
    };
    return {{"command", command_},
            {"seed", seed_},
            {"version", SECREL_VERSION},
            {"config_fnv1a64", config_digest_},
            {"inputs", files_json(inputs_)},
            {"outputs", files_json(outputs_)}};
  }

  void write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write manifest: " + path);
    out << to_json().dump(2) << "\n";
  }

 private:
  std::string command_;
  std::uint64_t seed_;
  std::string config_digest_;
  std::vector<std::pair<std::string, std::string>> inputs_;
  std::vector<std::pair<std::string, std::string>> outputs_;
};

inline void write_text_file(const std::string& path, const std::string& content) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write file: " + path);
  out << content;
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace secrel
