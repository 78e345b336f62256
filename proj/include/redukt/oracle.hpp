#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "redukt/diff.hpp"
#include "redukt/minikt/parser.hpp"
#include "redukt/signature.hpp"
#include "redukt/subprocess.hpp"

namespace redukt {

enum class VerdictKind {
  Reproduced,      // compiler failed with the reference error
  Different,       // compiler failed with some other error
  SyntaxRejected,  // candidate did not parse; compiler never ran
  CompilerPassed,  // compiler exited 0
};

struct Verdict {
  VerdictKind kind = VerdictKind::CompilerPassed;
  double similarity = 0.0;  // raw-text diff against the reference diagnostic
  double seconds = 0.0;     // oracle wall time for this candidate
};

inline const char* verdict_name(VerdictKind k) {
  switch (k) {
    case VerdictKind::Reproduced: return "reproduced";
    case VerdictKind::Different: return "different";
    case VerdictKind::SyntaxRejected: return "syntax-rejected";
    case VerdictKind::CompilerPassed: return "compiler-passed";
  }
  return "?";
}

// Memoizes verdicts by a hash of the ordered candidate file list. Safe for
// concurrent use; purely an invocation saver, never changes outcomes.
class VerdictCache {
 public:
  static std::uint64_t key(const FileSet& files) {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    auto mix = [&h](std::string_view s) {
      for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
      }
      h ^= 0xff;
      h *= 1099511628211ull;
    };
    for (const auto& [path, text] : files) {
      mix(path);
      mix(text);
    }
    return h;
  }

  std::optional<Verdict> lookup(std::uint64_t k) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = map_.find(k);
    if (it == map_.end()) {
      ++misses_;
      return std::nullopt;
    }
    ++hits_;
    return it->second;
  }

  void store(std::uint64_t k, const Verdict& v) {
    std::lock_guard<std::mutex> lock(mu_);
    map_.emplace(k, v);
  }

  std::uint64_t hits() const { return hits_; }
  std::uint64_t misses() const { return misses_; }
  std::size_t size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return map_.size();
  }

 private:
  mutable std::mutex mu_;
  std::unordered_map<std::uint64_t, Verdict> map_;
  std::atomic<std::uint64_t> hits_{0};
  std::atomic<std::uint64_t> misses_{0};
};

struct OracleConfig {
  std::string command_template;  // must contain {files}
  std::vector<TemplateRule> rules;
  double threshold = 0.15;  // raw-diff similarity strictly below = same error
  double timeout_seconds = 60.0;
  bool cache_enabled = true;
  std::filesystem::path tmp_root = stage_root();
};

// Decides whether a candidate still fails the compiler the same way the
// original did. Checking is two-staged: candidates that do not parse are
// rejected without spending a compiler run; only then is the command
// executed and its diagnostic compared against the reference signature.
class Oracle {
 public:
  explicit Oracle(OracleConfig config) : config_(std::move(config)) {}

  // Run the compiler on the original input and remember its signature.
  // Returns the exit code observed (0 means there is nothing to reduce).
  int capture_reference(const FileSet& original) {
    RunResult r = run_compiler(original, config_.command_template, config_.timeout_seconds,
                               config_.tmp_root);
    ++invocations_;
    if (r.exit_code != 0) reference_ = parse_signature(r.output, config_.rules);
    return r.exit_code;
  }

  void set_reference(ErrorSignature sig) { reference_ = std::move(sig); }
  const ErrorSignature& reference() const { return reference_.value(); }
  bool has_reference() const { return reference_.has_value(); }

  Verdict check_candidate(const FileSet& files) {
    const std::uint64_t key = VerdictCache::key(files);
    if (config_.cache_enabled) {
      if (auto hit = cache_.lookup(key)) return *hit;
    }
    Verdict v = evaluate(files);
    if (config_.cache_enabled) cache_.store(key, v);
    return v;
  }

  std::uint64_t invocations() const { return invocations_; }
  std::uint64_t cache_hits() const { return cache_.hits(); }
  const OracleConfig& config() const { return config_; }

 private:
  Verdict evaluate(const FileSet& files) {
    auto start = std::chrono::steady_clock::now();
    Verdict v;
    for (const auto& [path, text] : files) {
      auto parsed = minikt::parse(text);
      if (!parsed.ok()) {
        v.kind = VerdictKind::SyntaxRejected;
        v.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return v;
      }
    }
    RunResult r =
        run_compiler(files, config_.command_template, config_.timeout_seconds, config_.tmp_root);
    ++invocations_;
    if (r.exit_code == 0) {
      v.kind = VerdictKind::CompilerPassed;
    } else {
      ErrorSignature sig = parse_signature(r.output, config_.rules);
      v.similarity = diff_similarity(reference().raw, sig.raw);
      v.kind = same_error(reference(), sig, config_.threshold) ? VerdictKind::Reproduced
                                                               : VerdictKind::Different;
    }
    v.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return v;
  }

  OracleConfig config_;
  std::optional<ErrorSignature> reference_;
  VerdictCache cache_;
  std::atomic<std::uint64_t> invocations_{0};
};

}  // namespace redukt
