#pragma once

// Run directory bookkeeping: stage completion, config snapshot, and a lock
// file so only one process works on a run at a time.

#include <fcntl.h>
#include <signal.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <string>
#include <vector>

#include "qeleak/core/config.hpp"
#include "qeleak/core/jsonl.hpp"
#include "qeleak/providers/cache.hpp"

#ifndef QELEAK_VERSION
#define QELEAK_VERSION "0.0.0"
#endif

namespace qeleak::pipeline {

inline constexpr std::array<const char*, 7> kStages = {"ingest", "index", "expand", "retrieve",
                                                       "match",  "verdict", "report"};

inline size_t stage_index(const std::string& name) {
  for (size_t i = 0; i < kStages.size(); ++i)
    if (name == kStages[i]) return i;
  throw UsageError("unknown stage '" + name + "'");
}

inline std::string config_hash(const RunConfig& cfg) { return providers::sha256_hex(to_json(cfg).dump()); }

class Manifest {
 public:
  static fs::path path_in(const fs::path& run_dir) { return run_dir / "manifest.json"; }

  static bool exists(const fs::path& run_dir) { return fs::exists(path_in(run_dir)); }

  static Manifest fresh(const RunConfig& cfg) {
    Manifest m;
    m.set_config(cfg);
    return m;
  }

  static Manifest load(const fs::path& run_dir) {
    Manifest m;
    json j = read_json_file(path_in(run_dir));
    try {
      m.config_ = j.at("config");
      m.config_hash_ = j.at("config_hash").get<std::string>();
      for (const auto& [name, st] : j.at("stages").items())
        m.stages_[name] = {st.at("complete").get<bool>(), st.at("outputs").get<std::vector<std::string>>()};
    } catch (const json::exception& e) {
      throw DataError("malformed manifest in '" + run_dir.string() + "': " + e.what());
    }
    return m;
  }

  void save(const fs::path& run_dir) const {
    json stages = json::object();
    for (const char* s : kStages) {
      auto it = stages_.find(s);
      const bool done = it != stages_.end() && it->second.complete;
      stages[s] = {{"complete", done}, {"outputs", done ? it->second.outputs : std::vector<std::string>{}}};
    }
    json j = {{"run_id", config_hash_.substr(0, 16)},
              {"tool_version", QELEAK_VERSION},
              {"config_hash", config_hash_},
              {"config", config_},
              {"stages", stages}};
    fs::create_directories(run_dir);
    write_file_atomic(path_in(run_dir), j.dump(2) + "\n");
  }

  const std::string& hash() const { return config_hash_; }
  RunConfig config() const { return config_from_json(config_); }

  void set_config(const RunConfig& cfg) {
    config_ = to_json(cfg);
    config_hash_ = config_hash(cfg);
  }

  bool complete(const std::string& stage) const {
    auto it = stages_.find(stage);
    return it != stages_.end() && it->second.complete;
  }

  const std::vector<std::string>& outputs(const std::string& stage) const {
    static const std::vector<std::string> kNone;
    auto it = stages_.find(stage);
    return it == stages_.end() ? kNone : it->second.outputs;
  }

  std::vector<std::string> missing_prerequisites(const std::string& stage) const {
    std::vector<std::string> out;
    for (size_t i = 0; i < stage_index(stage); ++i)
      if (!complete(kStages[i])) out.push_back(kStages[i]);
    return out;
  }

  void mark_complete(const std::string& stage, std::vector<std::string> outputs) {
    stages_[stage] = {true, std::move(outputs)};
  }

  // Clears the stage and everything downstream of it.
  void invalidate_from(const std::string& stage) {
    for (size_t i = stage_index(stage); i < kStages.size(); ++i) stages_.erase(kStages[i]);
  }

 private:
  struct StageState {
    bool complete = false;
    std::vector<std::string> outputs;
  };
  json config_;
  std::string config_hash_;
  std::map<std::string, StageState> stages_;
};

// Exclusive lock on a run directory; a lock left by a dead process is taken over.
class RunLock {
 public:
  explicit RunLock(const fs::path& run_dir) : path_(run_dir / ".lock") {
    fs::create_directories(run_dir);
    for (int attempt = 0; attempt < 2; ++attempt) {
      int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
      if (fd >= 0) {
        const std::string pid = std::to_string(::getpid()) + "\n";
        [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
        ::close(fd);
        held_ = true;
        return;
      }
      if (errno != EEXIST) throw DataError("cannot create lock file '" + path_.string() + "'");
      if (!stale()) break;
      std::error_code ec;
      fs::remove(path_, ec);
    }
    throw UsageError("run directory is locked by another process (" + path_.string() + ")");
  }
  ~RunLock() {
    if (held_) {
      std::error_code ec;
      fs::remove(path_, ec);
    }
  }
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  bool stale() const {
    std::ifstream in(path_);
    long pid = 0;
    if (!(in >> pid) || pid <= 0) return true;
    return ::kill(static_cast<pid_t>(pid), 0) != 0 && errno == ESRCH;
  }

  fs::path path_;
  bool held_ = false;
};

}  // namespace qeleak::pipeline
