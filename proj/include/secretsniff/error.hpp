#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace secretsniff {

// Base of every error the library raises. Messages never carry secret
// values; entries are named by id or index only.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class SecretStoreError : public Error
{
public:
  using Error::Error;
};

class PatternError : public Error
{
public:
  using Error::Error;
};

class ScanError : public Error
{
public:
  using Error::Error;
};

class PepperError : public Error
{
public:
  using Error::Error;
};

class CacheError : public Error
{
public:
  enum class Kind { malformed, version_mismatch, corrupted, io };

  CacheError(Kind kind, const std::string& message)
    : Error(message),
      kind_(kind)
  {
  }

  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

class ConfigError : public Error
{
public:
  using Error::Error;
};

} // namespace secretsniff
