#pragma once

// Content-addressed response cache on disk. Entries are immutable once
// written; writers are serialized and publish via rename, so concurrent
// readers see either nothing or a complete entry.

#include <openssl/evp.h>

#include <array>
#include <atomic>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>

#include "qeleak/core/jsonl.hpp"

namespace qeleak::providers {

inline std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (!EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr))
    throw std::runtime_error("SHA-256 digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xF]);
  }
  return out;
}

// Hash over the canonical (key-sorted) JSON serialization of every field that
// influences a response.
struct CacheKey {
  std::string hex;

  static CacheKey of(const json& material) { return {sha256_hex(material.dump())}; }
  bool operator==(const CacheKey&) const = default;
};

class DiskCache {
 public:
  explicit DiskCache(fs::path dir) : dir_(std::move(dir)) {
    if (!dir_.empty()) fs::create_directories(dir_);
  }

  bool enabled() const { return !dir_.empty(); }
  const fs::path& dir() const { return dir_; }

  std::optional<std::string> get(const CacheKey& key) const {
    if (!enabled()) return std::nullopt;
    std::ifstream in(path_for(key), std::ios::binary);
    if (!in) return std::nullopt;
    return std::string(std::istreambuf_iterator<char>(in), {});
  }

  void put(const CacheKey& key, const std::string& value) {
    if (!enabled()) return;
    std::lock_guard lock(write_mu_);
    const fs::path target = path_for(key);
    if (fs::exists(target)) return;
    fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp" + std::to_string(++tmp_counter_);
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw DataError("cannot write cache entry '" + tmp.string() + "'");
      out << value;
    }
    fs::rename(tmp, target);
  }

  fs::path path_for(const CacheKey& key) const { return dir_ / key.hex.substr(0, 2) / (key.hex + ".json"); }

 private:
  fs::path dir_;
  std::mutex write_mu_;
  std::atomic<uint64_t> tmp_counter_{0};
};

}  // namespace qeleak::providers
