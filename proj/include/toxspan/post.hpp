#pragma once

#include <cstddef>
#include <string>

#include "toxspan/spans.hpp"

namespace toxspan {

/// One corpus record. Offsets in gold index code points of text; every
/// offset is < text.size(), enforced at parse time.
struct Post {
  std::size_t id = 0;
  std::u32string text;
  SpanSet gold;

  bool operator==(const Post&) const = default;
};

}  // namespace toxspan
