#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "finmoji/error.hpp"
#include "finmoji/tokenizer.hpp"
#include "finmoji/unicode_tables.hpp"
#include "finmoji/vectorizer.hpp"

namespace finmoji::cli {

inline constexpr const char* kToolVersion = "0.1.0";

inline std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw DataError("sha256 failed for " + path.string());
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xF]);
  }
  return hex;
}

// Provenance record attached to every output. Everything except "timings"
// is a function of the inputs and flags.
class RunManifest {
 public:
  RunManifest(std::string command, std::vector<std::string> args, std::uint64_t seed, TokenizerMode mode)
      : command_(std::move(command)), args_(std::move(args)), seed_(seed), mode_(mode),
        start_(std::chrono::steady_clock::now()) {}

  void add_input(const std::filesystem::path& p) { inputs_.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}}); }
  void set_parameter(const std::string& key, nlohmann::ordered_json value) { parameters_[key] = std::move(value); }
  void set_timing(const std::string& key, double seconds) { timings_[key] = seconds; }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["tool"] = "finmoji";
    j["version"] = kToolVersion;
    j["command"] = command_;
    j["args"] = args_;
    j["seed"] = seed_;
    j["inputs"] = inputs_.empty() ? nlohmann::ordered_json::array() : nlohmann::ordered_json(inputs_);
    j["parameters"] = parameters_.empty() ? nlohmann::ordered_json::object() : parameters_;
    j["unicode_version"] = unicode::kVersion;
    j["tokenizer_mode"] = to_string(mode_);
    j["word_characters"] = "Alphabetic | Nd | '_'";
    j["formula_id"] = TfIdfModel::kFormulaId;
    auto timings = timings_;
    timings["total_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    j["timings"] = std::move(timings);
    return j;
  }

 private:
  std::string command_;
  std::vector<std::string> args_;
  std::uint64_t seed_;
  TokenizerMode mode_;
  std::chrono::steady_clock::time_point start_;
  nlohmann::ordered_json inputs_ = nlohmann::ordered_json::array();
  nlohmann::ordered_json parameters_ = nlohmann::ordered_json::object();
  nlohmann::ordered_json timings_ = nlohmann::ordered_json::object();
};

}  // namespace finmoji::cli
