#pragma once

#include <algorithm>
#include <cstddef>
#include <string_view>
#include <vector>

namespace redukt {

// Length of the shortest edit script (insertions + deletions) between a and
// b, by the greedy forward variant of the Myers O((N+M)D) diff algorithm.
inline std::size_t edit_script_length(std::string_view a, std::string_view b) {
  const long n = static_cast<long>(a.size());
  const long m = static_cast<long>(b.size());
  const long max_d = n + m;
  if (max_d == 0) return 0;
  // v[k + max_d] = furthest x on diagonal k
  std::vector<long> v(static_cast<std::size_t>(2 * max_d + 1), 0);
  for (long d = 0; d <= max_d; ++d) {
    for (long k = -d; k <= d; k += 2) {
      long x;
      if (k == -d || (k != d && v[static_cast<std::size_t>(k - 1 + max_d)] <
                                    v[static_cast<std::size_t>(k + 1 + max_d)]))
        x = v[static_cast<std::size_t>(k + 1 + max_d)];
      else
        x = v[static_cast<std::size_t>(k - 1 + max_d)] + 1;
      long y = x - k;
      while (x < n && y < m && a[static_cast<std::size_t>(x)] == b[static_cast<std::size_t>(y)]) {
        ++x;
        ++y;
      }
      v[static_cast<std::size_t>(k + max_d)] = x;
      if (x >= n && y >= m) return static_cast<std::size_t>(d);
    }
  }
  return static_cast<std::size_t>(max_d);
}

// Dissimilarity of two diagnostics: inserted plus deleted characters of a
// shortest edit script, normalized by the combined length. 0 means equal
// (two empty strings included), 1 means nothing in common.
inline double diff_similarity(std::string_view a, std::string_view b) {
  if (a.empty() && b.empty()) return 0.0;
  return static_cast<double>(edit_script_length(a, b)) /
         static_cast<double>(a.size() + b.size());
}

}  // namespace redukt
