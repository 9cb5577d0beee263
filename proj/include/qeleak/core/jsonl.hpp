#pragma once

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "qeleak/core/error.hpp"

namespace qeleak {

using json = nlohmann::json;
namespace fs = std::filesystem;

// Calls fn(object, line_number) for every non-blank line; line numbers are 1-based.
inline void for_each_json_line(const fs::path& path, const std::function<void(const json&, size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": malformed JSON: " + e.what());
    }
    if (!obj.is_object()) throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected a JSON object");
    fn(obj, lineno);
  }
}

// Write-to-temp then rename, so readers never observe a partial file.
inline void write_file_atomic(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + tmp.string() + "'");
    out << contents;
    if (!out) throw DataError("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

inline void write_json_lines(const fs::path& path, const std::vector<json>& rows) {
  std::string buf;
  for (const auto& r : rows) {
    buf += r.dump();
    buf += '\n';
  }
  write_file_atomic(path, buf);
}

inline json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": malformed JSON: " + e.what());
  }
}

inline std::string require_string(const json& obj, const char* field, const std::string& where) {
  auto it = obj.find(field);
  if (it == obj.end() || !it->is_string()) throw DataError(where + ": field '" + field + "' must be a string");
  return it->get<std::string>();
}

}  // namespace qeleak
