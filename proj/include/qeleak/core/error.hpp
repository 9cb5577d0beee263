#pragma once

#include <stdexcept>
#include <string>

namespace qeleak {

enum class ErrorKind { kUsage = 1, kData = 2, kProvider = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::kUsage, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

class ProviderError : public Error {
 public:
  ProviderError(const std::string& what, int status = 0, int attempts = 1)
      : Error(ErrorKind::kProvider, what), status_(status), attempts_(attempts) {}
  int status() const noexcept { return status_; }
  int attempts() const noexcept { return attempts_; }

 private:
  int status_;
  int attempts_;
};

}  // namespace qeleak
