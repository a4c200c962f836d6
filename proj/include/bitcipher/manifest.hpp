#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace bitcipher {

inline constexpr std::string_view kToolVersion = "0.3.0";

/// Hex SHA-256 of a file's bytes / of a string.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(std::string_view data);

/// Record of one CLI run: the normalized command line, the resolved
/// configuration, and digests of every input and output file. Re-running
/// `argv` on inputs with the same digests reproduces the outputs.
struct Manifest {
  std::string command;
  std::vector<std::string> argv;  // normalized, without the program name
  nlohmann::json config = nlohmann::json::object();
  std::map<std::string, std::string> inputs;   // path -> sha256
  std::map<std::string, std::string> outputs;  // path -> sha256
  std::string tool_version = std::string(kToolVersion);

  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);

  nlohmann::json to_json() const;
  static Manifest from_json(const nlohmann::json& j);

  void save(const std::filesystem::path& path) const;
  static Manifest load(const std::filesystem::path& path);
};

}  // namespace bitcipher
