#pragma once

#include <stdexcept>
#include <string>

namespace tagpred {

// Malformed input files, schema violations, unmapped tags. Maps to CLI exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad flags, bad config keys, invalid representation/model pairings. Maps to CLI exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tagpred
