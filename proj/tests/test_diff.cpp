#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <string>

#include "redukt/diff.hpp"

using redukt::diff_similarity;
using redukt::edit_script_length;

namespace {

// Independent reference: similarity from the classic LCS recurrence,
// (|a| + |b| - 2*LCS) / (|a| + |b|).
std::size_t lcs_length(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      if (a[i - 1] == b[j - 1])
        cur[j] = prev[j - 1] + 1;
      else
        cur[j] = std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double reference_similarity(const std::string& a, const std::string& b) {
  if (a.empty() && b.empty()) return 0.0;
  double total = static_cast<double>(a.size() + b.size());
  return (total - 2.0 * static_cast<double>(lcs_length(a, b))) / total;
}

}  // namespace

TEST_CASE("pinned similarity values") {
  CHECK(diff_similarity("abc", "abc") == 0.0);
  CHECK(diff_similarity("abc", "xyz") == 1.0);
  CHECK(diff_similarity("abcd", "abed") == 0.25);  // LCS abd; c deleted, e inserted
  CHECK(diff_similarity("", "") == 0.0);
  CHECK(diff_similarity("", "ab") == 1.0);
  CHECK(diff_similarity("aaaa", "aabb") == 0.5);
}

TEST_CASE("similarity agrees with the LCS recurrence on random pairs") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    auto make = [&] {
      std::string s;
      std::size_t len = rng() % 13;
      for (std::size_t i = 0; i < len; ++i) s.push_back(static_cast<char>('a' + rng() % 4));
      return s;
    };
    std::string a = make(), b = make();
    INFO("a=\"" << a << "\" b=\"" << b << "\"");
    CHECK(diff_similarity(a, b) == reference_similarity(a, b));
  }
}

TEST_CASE("edit script length is symmetric and bounded") {
  std::mt19937 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    auto make = [&] {
      std::string s;
      std::size_t len = rng() % 20;
      for (std::size_t i = 0; i < len; ++i) s.push_back(static_cast<char>('a' + rng() % 3));
      return s;
    };
    std::string a = make(), b = make();
    auto d = edit_script_length(a, b);
    CHECK(d == edit_script_length(b, a));
    CHECK(d <= a.size() + b.size());
    double sim = diff_similarity(a, b);
    if (!(a.empty() && b.empty())) {
      CHECK(sim >= 0.0);
      CHECK(sim <= 1.0);
    }
    if (a == b) CHECK(sim == 0.0);
  }
}

TEST_CASE("similarity handles long diagnostics quickly") {
  std::string a(4000, 'x'), b = a;
  b[2000] = 'y';
  CHECK(diff_similarity(a, b) == 2.0 / 8000.0);
}
