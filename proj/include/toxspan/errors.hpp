#pragma once

#include <stdexcept>
#include <string>

namespace toxspan {

/// Malformed user-supplied data: unreadable files, bad corpus rows,
/// out-of-range flags. The CLI maps this to exit code 1.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// A broken library contract (overlapping ranges handed to delete_ranges,
/// offsets beyond a derived text, ...). The CLI maps this to exit code 2.
class InvariantError : public std::logic_error {
 public:
  explicit InvariantError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace toxspan
