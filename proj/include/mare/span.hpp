#pragma once

#include <compare>
#include <cstdint>

namespace mare {

// Half-open token interval [start, end). All span arithmetic in the toolkit
// uses this convention; inclusive indices from external data are converted
// at the boundary.
struct Span {
  int start = 0;
  int end = 0;

  int width() const { return end - start; }

  bool contains(int token) const { return token >= start && token < end; }

  bool overlaps(const Span& other) const { return start < other.end && other.start < end; }

  // Token gap between two disjoint spans; 0 for adjacent or overlapping.
  int gap_to(const Span& other) const {
    if (overlaps(other)) return 0;
    int g = (start >= other.end) ? start - other.end : other.start - end;
    return g < 0 ? 0 : g;
  }

  auto operator<=>(const Span&) const = default;
};

}  // namespace mare
