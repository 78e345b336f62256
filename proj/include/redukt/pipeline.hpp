#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "redukt/minikt/printer.hpp"
#include "redukt/oracle.hpp"
#include "redukt/project.hpp"
#include "redukt/reducers.hpp"
#include "redukt/slicer.hpp"
#include "redukt/transforms.hpp"

namespace redukt {

enum class Stage { ProjectPass, Slicing, TextTransforms, TreeTransforms, Hdd, Pardis };

inline const char* stage_name(Stage s) {
  switch (s) {
    case Stage::ProjectPass: return "project-pass";
    case Stage::Slicing: return "slicing";
    case Stage::TextTransforms: return "text-transforms";
    case Stage::TreeTransforms: return "tree-transforms";
    case Stage::Hdd: return "hdd";
    case Stage::Pardis: return "pardis";
  }
  return "?";
}

inline std::vector<Stage> default_stages() {
  return {Stage::ProjectPass, Stage::Slicing, Stage::TextTransforms, Stage::TreeTransforms,
          Stage::Hdd};
}

struct PipelineConfig {
  std::vector<Stage> stages = default_stages();
  std::string command_template;  // oracle command with {files}
  std::vector<TemplateRule> rules;
  double threshold = 0.15;
  int inline_limit = 10;
  double timeout_seconds = 60.0;
  int jobs = 1;
  bool cache_enabled = true;
  bool reverse_stages = false;  // run the stage list back to front
  std::vector<std::pair<std::string, std::string>> patterns;
  std::filesystem::path tmp_root = stage_root();
};

struct StageReport {
  std::string name;
  long tokens_before = 0;
  long tokens_after = 0;
  double seconds = 0.0;
  std::uint64_t oracle_calls = 0;
  std::uint64_t cache_hits = 0;
  long edits_accepted = 0;
  long edits_rolled_back = 0;
};

struct ReductionReport {
  std::vector<StageReport> stages;
  StageReport total;
  std::string verdict;
  // actual compiler executions, parse-gated and cached checks excluded;
  // kept out of the JSON, whose shape is fixed
  std::uint64_t compiler_runs = 0;

  nlohmann::json to_json() const {
    auto stage_json = [](const StageReport& s) {
      return nlohmann::json{{"name", s.name},
                            {"tokens_before", s.tokens_before},
                            {"tokens_after", s.tokens_after},
                            {"seconds", s.seconds},
                            {"oracle_calls", s.oracle_calls},
                            {"cache_hits", s.cache_hits}};
    };
    nlohmann::json doc;
    doc["stages"] = nlohmann::json::array();
    for (const auto& s : stages) doc["stages"].push_back(stage_json(s));
    doc["total"] = stage_json(total);
    doc["verdict"] = verdict;
    return doc;
  }
};

// The input compiles cleanly: there is no error to hold on to.
struct OriginalPassesError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// All file texts at a point in time; restoring a handle drops everything
// taken after it, so nested snapshots unwind in LIFO order.
class SnapshotStack {
 public:
  std::size_t take(const FileSet& files) {
    stack_.push_back(files);
    return stack_.size() - 1;
  }
  FileSet restore(std::size_t handle) {
    FileSet files = stack_.at(handle);
    stack_.resize(handle);
    return files;
  }
  void drop(std::size_t handle) { stack_.resize(handle); }
  std::size_t depth() const { return stack_.size(); }

 private:
  std::vector<FileSet> stack_;
};

namespace pipeline_detail {

inline constexpr int kMaxStageRepeats = 5;

inline TransformOptions transform_options(const PipelineConfig& config) {
  TransformOptions opts;
  opts.inline_limit = config.inline_limit;
  opts.patterns = config.patterns;
  return opts;
}

inline void run_project_stage(Project& project, const FileSetCheck& check,
                              const PipelineConfig& config) {
  auto tree = build_dependency_tree(project);
  project = prune_unreferenced(std::move(project), tree, check);
  tree = build_dependency_tree(project);
  project = project_pass(std::move(project), tree, check, config.jobs,
                         transform_options(config));
}

inline void run_slicing_stage(Project& project, const FileSetCheck& check) {
  std::size_t rc = rc_index(project);
  SoundnessCheck file_check = [&](const std::string& candidate) {
    FileSet trial = project.files;
    trial[rc].second = candidate;
    return check(trial);
  };
  std::optional<int> line;
  if (project.rc.location) line = project.rc.location->first;
  auto outcome = slice_file(project.files[rc].second, project.rc.file, line, file_check);
  if (outcome.changed) project.files[rc].second = outcome.text;
}

inline void run_transform_stage(Project& project, const FileSetCheck& check,
                                const std::vector<Transformation>& catalog) {
  for (const auto& t : catalog) project.files = run_to_fixpoint(t, project.files, check);
}

// Tree reduction of every file in turn. Candidates are printed from the
// syntax tree, so the baseline (nothing deleted) is the canonical print; a
// file whose canonical form no longer fails is left untouched.
inline void run_tree_stage(Project& project, const FileSetCheck& check, bool priority_order) {
  for (std::size_t i = 0; i < project.files.size(); ++i) {
    auto parsed = minikt::parse(project.files[i].second);
    if (!parsed.ok()) continue;
    const auto& tree = *parsed.tree;
    auto model = tree_model_from(tree);

    TreeTest test = [&](const DeletedMask& mask) {
      FileSet trial = project.files;
      trial[i].second = minikt::print(tree, mask);
      return check(trial);
    };
    if (test(DeletedMask(model.nodes.size(), 0)) != TestOutcome::Fail) continue;
    DeletedMask mask = priority_order ? pardis(model, test) : hdd(model, test);
    project.files[i].second = minikt::print(tree, mask);
  }
}

inline void run_stage(Stage stage, Project& project, const FileSetCheck& check,
                      const PipelineConfig& config) {
  switch (stage) {
    case Stage::ProjectPass: run_project_stage(project, check, config); return;
    case Stage::Slicing: run_slicing_stage(project, check); return;
    case Stage::TextTransforms:
      run_transform_stage(project, check, text_transforms(transform_options(config)));
      return;
    case Stage::TreeTransforms:
      run_transform_stage(project, check, tree_transforms(transform_options(config)));
      return;
    case Stage::Hdd: run_tree_stage(project, check, false); return;
    case Stage::Pardis: run_tree_stage(project, check, true); return;
  }
}

}  // namespace pipeline_detail

// Run the configured stages in order, each repeated until its token count
// stops dropping. Every stage is guarded: should its result somehow stop
// reproducing the reference error (per-edit gating makes that unexpected),
// the pre-stage snapshot is restored. Throws OriginalPassesError when the
// input compiles, InfraError when the oracle command cannot be run.
inline std::pair<Project, ReductionReport> reduce(Project project, const PipelineConfig& config) {
  OracleConfig oc;
  oc.command_template = config.command_template;
  oc.rules = config.rules;
  oc.threshold = config.threshold;
  oc.timeout_seconds = config.timeout_seconds;
  oc.cache_enabled = config.cache_enabled;
  oc.tmp_root = config.tmp_root;
  Oracle oracle(oc);

  if (oracle.capture_reference(project.files) == 0)
    throw OriginalPassesError("the original input does not fail the compiler command");

  long accepted = 0, rolled_back = 0;
  FileSetCheck check = [&](const FileSet& files) {
    Verdict v = oracle.check_candidate(files);
    if (v.kind == VerdictKind::Reproduced) {
      ++accepted;
      return TestOutcome::Fail;
    }
    ++rolled_back;
    return TestOutcome::Pass;
  };

  std::vector<Stage> stages = config.stages;
  if (config.reverse_stages) std::reverse(stages.begin(), stages.end());

  ReductionReport report;
  SnapshotStack snapshots;
  auto t_start = std::chrono::steady_clock::now();
  long tokens_at_start = project_tokens(project);

  for (Stage stage : stages) {
    StageReport sr;
    sr.name = stage_name(stage);
    sr.tokens_before = project_tokens(project);
    auto t0 = std::chrono::steady_clock::now();
    std::uint64_t calls0 = oracle.invocations();
    std::uint64_t hits0 = oracle.cache_hits();
    long accepted0 = accepted, rolled0 = rolled_back;

    std::size_t snap = snapshots.take(project.files);
    for (int rep = 0; rep < pipeline_detail::kMaxStageRepeats; ++rep) {
      long before = project_tokens(project);
      pipeline_detail::run_stage(stage, project, check, config);
      if (project_tokens(project) >= before) break;
    }
    if (oracle.check_candidate(project.files).kind != VerdictKind::Reproduced)
      project.files = snapshots.restore(snap);
    else
      snapshots.drop(snap);

    sr.tokens_after = project_tokens(project);
    sr.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    sr.oracle_calls = oracle.invocations() - calls0;
    sr.cache_hits = oracle.cache_hits() - hits0;
    sr.edits_accepted = accepted - accepted0;
    sr.edits_rolled_back = rolled_back - rolled0;
    report.stages.push_back(std::move(sr));
  }

  report.total.name = "total";
  report.total.tokens_before = tokens_at_start;
  report.total.tokens_after = project_tokens(project);
  report.total.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  report.total.oracle_calls = oracle.invocations();
  report.total.cache_hits = oracle.cache_hits();
  report.total.edits_accepted = accepted;
  report.total.edits_rolled_back = rolled_back;
  report.verdict = verdict_name(oracle.check_candidate(project.files).kind);
  report.compiler_runs = oracle.invocations();
  return {std::move(project), std::move(report)};
}

}  // namespace redukt
