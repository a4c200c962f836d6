#include "bitcipher/manifest.hpp"

#include "bitcipher/common.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>

namespace bitcipher {

namespace {

struct DigestCtx {
  DigestCtx() : ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
      throw Error("sha256: digest initialization failed");
    }
  }
  void update(const void* data, std::size_t n) {
    if (EVP_DigestUpdate(ctx.get(), data, n) != 1) throw Error("sha256: update failed");
  }
  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1) throw Error("sha256: final failed");
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
      out += kHex[md[i] >> 4];
      out += kHex[md[i] & 0xf];
    }
    return out;
  }
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx;
};

}  // namespace

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  DigestCtx d;
  std::array<char, 1 << 16> buf{};
  while (in.read(buf.data(), buf.size()) || in.gcount() > 0) {
    d.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return d.hex();
}

std::string sha256_hex(std::string_view data) {
  DigestCtx d;
  d.update(data.data(), data.size());
  return d.hex();
}

void Manifest::add_input(const std::filesystem::path& path) {
  inputs[path.string()] = sha256_file(path);
}

void Manifest::add_output(const std::filesystem::path& path) {
  outputs[path.string()] = sha256_file(path);
}

nlohmann::json Manifest::to_json() const {
  return {
      {"tool", "bitcipher"},   {"tool_version", tool_version}, {"command", command},
      {"argv", argv},          {"config", config},             {"inputs", inputs},
      {"outputs", outputs},
  };
}

Manifest Manifest::from_json(const nlohmann::json& j) {
  try {
    Manifest m;
    m.command = j.at("command").get<std::string>();
    m.argv = j.at("argv").get<std::vector<std::string>>();
    m.config = j.value("config", nlohmann::json::object());
    m.inputs = j.value("inputs", std::map<std::string, std::string>{});
    m.outputs = j.value("outputs", std::map<std::string, std::string>{});
    m.tool_version = j.value("tool_version", std::string(kToolVersion));
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed manifest: ") + e.what());
  }
}

void Manifest::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write manifest '" + path.string() + "'");
  out << to_json().dump(2) << '\n';
}

Manifest Manifest::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open manifest '" + path.string() + "'");
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("manifest is not valid JSON: ") + e.what());
  }
}

}  // namespace bitcipher
