#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "redukt/pipeline.hpp"

namespace redukt {

struct CliArgs {
  std::vector<std::string> inputs;
  std::string command;
  std::string criterion;  // FILE[:LINE]; empty = derive from the diagnostic
  std::string stages;     // comma-separated tokens; empty = default order
  double threshold = 0.15;
  int inline_limit = 10;
  int jobs = 1;
  double timeout_seconds = 60.0;
  bool no_cache = false;
  std::string report_path;
  std::string out_dir = "redukt-out";
  std::string rules_path;
  std::string patterns_path;
  bool reverse_stages = false;
};

namespace cli_detail {

// Bad invocation or bad input files: message plus exit code 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Diagnostic templates tried when no --rules file is given: the
// `error: Type at (line,col) in file` shape and the gcc-style
// `file:line:col: error: text` shape.
inline std::vector<TemplateRule> default_rules() {
  return {
      make_rule("at-format",
                R"(error: (?<type>\w+) at \((?<line>\d+),(?<col>\d+)\) in (?<file>\S+))"),
      make_rule("gcc-format", R"((?<file>[^\s:]+):(?<line>\d+):(?<col>\d+): error: (?<type>.+))"),
  };
}

inline std::vector<Stage> parse_stages(const std::string& csv) {
  std::vector<Stage> out;
  std::stringstream ss(csv);
  std::string token;
  while (std::getline(ss, token, ',')) {
    token.erase(std::remove_if(token.begin(), token.end(),
                               [](unsigned char c) { return std::isspace(c); }),
                token.end());
    std::transform(token.begin(), token.end(), token.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (token.empty()) continue;
    if (token == "s" || token == "slice" || token == "slicing") {
      out.push_back(Stage::Slicing);
    } else if (token == "t" || token == "transforms") {
      out.push_back(Stage::TextTransforms);
      out.push_back(Stage::TreeTransforms);
    } else if (token == "text") {
      out.push_back(Stage::TextTransforms);
    } else if (token == "tree") {
      out.push_back(Stage::TreeTransforms);
    } else if (token == "d" || token == "hdd") {
      out.push_back(Stage::Hdd);
    } else if (token == "p" || token == "pardis") {
      out.push_back(Stage::Pardis);
    } else if (token == "proj" || token == "project" || token == "project-pass") {
      out.push_back(Stage::ProjectPass);
    } else {
      throw UsageError("unknown stage token '" + token +
                       "' (use s, t, d, p, proj, text or tree)");
    }
  }
  if (out.empty()) throw UsageError("--stages selected nothing");
  return out;
}

// One `regex<TAB>replacement` per line; '#' comments and blank lines are
// skipped; a line without a tab deletes its matches.
inline std::vector<std::pair<std::string, std::string>> load_patterns(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos)
      out.emplace_back(line, "");
    else
      out.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return out;
}

inline std::pair<std::string, std::optional<int>> split_criterion(const std::string& flag) {
  std::size_t colon = flag.rfind(':');
  if (colon != std::string::npos && colon + 1 < flag.size()) {
    std::string digits = flag.substr(colon + 1);
    if (std::all_of(digits.begin(), digits.end(),
                    [](unsigned char c) { return std::isdigit(c); }))
      return {flag.substr(0, colon), std::stoi(digits)};
  }
  return {flag, std::nullopt};
}

// The compiler reports paths inside the staging directory; recover the
// project-relative path by the longest suffix match on a '/' boundary.
inline std::string map_diag_path(const std::string& diag_file, const FileSet& files) {
  std::string best;
  for (const auto& [path, text] : files) {
    if (path == diag_file) return path;
    if (diag_file.size() <= path.size()) continue;
    if (diag_file.compare(diag_file.size() - path.size(), path.size(), path) != 0) continue;
    if (diag_file[diag_file.size() - path.size() - 1] != '/') continue;
    if (path.size() > best.size()) best = path;
  }
  return best;
}

struct CollectedInputs {
  FileSet files;
  std::vector<std::filesystem::path> disk;  // where each file came from
};

// Inputs are .mk files or directories scanned recursively for them. Staged
// names: a directory's entries keep their path relative to it; a plain file
// keeps its (relative) path, or just its name when given absolutely.
inline CollectedInputs collect_inputs(const std::vector<std::string>& inputs) {
  CollectedInputs out;
  auto add = [&](const std::filesystem::path& disk, std::string rel) {
    for (const auto& [existing, text] : out.files)
      if (existing == rel) throw UsageError("duplicate staged path: " + rel);
    out.files.emplace_back(std::move(rel), read_file(disk));
    out.disk.push_back(disk);
  };
  for (const auto& in : inputs) {
    std::filesystem::path p(in);
    if (std::filesystem::is_directory(p)) {
      std::vector<std::filesystem::path> found;
      for (const auto& entry : std::filesystem::recursive_directory_iterator(p))
        if (entry.is_regular_file() && entry.path().extension() == ".mk")
          found.push_back(entry.path());
      std::sort(found.begin(), found.end());
      for (const auto& f : found) add(f, f.lexically_relative(p).generic_string());
    } else if (std::filesystem::is_regular_file(p)) {
      add(p, p.is_absolute() ? p.filename().string() : p.lexically_normal().generic_string());
    } else {
      throw UsageError("no such input: " + in);
    }
  }
  if (out.files.empty()) throw UsageError("no .mk files found in the given inputs");
  return out;
}

inline int run(const CliArgs& args) {
  if (args.command.find("{files}") == std::string::npos)
    throw UsageError("--cmd must contain the {files} placeholder");

  auto inputs = collect_inputs(args.inputs);
  auto rules = args.rules_path.empty() ? default_rules() : load_rules(read_file(args.rules_path));
  auto patterns = args.patterns_path.empty()
                      ? std::vector<std::pair<std::string, std::string>>{}
                      : load_patterns(read_file(args.patterns_path));
  auto stages = args.stages.empty() ? default_stages() : parse_stages(args.stages);

  // never reduce into the inputs
  std::filesystem::path out_dir(args.out_dir);
  auto out_canon = std::filesystem::weakly_canonical(out_dir).generic_string();
  for (const auto& disk : inputs.disk) {
    auto in_canon = std::filesystem::weakly_canonical(disk).generic_string();
    if (in_canon.size() > out_canon.size() && in_canon.compare(0, out_canon.size(), out_canon) == 0 &&
        in_canon[out_canon.size()] == '/')
      throw UsageError("--out would overwrite input " + disk.string());
  }

  // first contact with the compiler: capture the reference diagnostic
  OracleConfig oc;
  oc.command_template = args.command;
  oc.rules = rules;
  oc.threshold = args.threshold;
  oc.timeout_seconds = args.timeout_seconds;
  oc.cache_enabled = !args.no_cache;
  Oracle oracle(oc);
  if (oracle.capture_reference(inputs.files) == 0) {
    std::cerr << "error: the original input does not fail the compiler command; "
                 "nothing to reduce\n";
    return 2;
  }

  ReductionCriterion rc;
  if (!args.criterion.empty()) {
    auto [file, line] = split_criterion(args.criterion);
    rc = ReductionCriterion::user(file);
    if (line) rc.location = {*line, 1};
  } else {
    const auto& sig = oracle.reference();
    if (sig.is_templated()) {
      std::string mapped = map_diag_path(sig.templated->file, inputs.files);
      if (!mapped.empty()) {
        rc.file = mapped;
        rc.source = ReductionCriterion::Source::Extracted;
        if (sig.templated->line) rc.location = {*sig.templated->line, sig.templated->col.value_or(1)};
      }
    }
    if (rc.file.empty())
      throw UsageError(
          "the diagnostic names no known file; pass --criterion FILE[:LINE] to anchor the "
          "reduction");
  }

  Project project;
  project.files = inputs.files;
  project.rc = rc;
  try {
    rc_index(project);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string(e.what()) + " (from --criterion)");
  }

  PipelineConfig pc;
  pc.stages = stages;
  pc.command_template = args.command;
  pc.rules = rules;
  pc.threshold = args.threshold;
  pc.inline_limit = args.inline_limit;
  pc.timeout_seconds = args.timeout_seconds;
  pc.jobs = args.jobs;
  pc.cache_enabled = !args.no_cache;
  pc.reverse_stages = args.reverse_stages;
  pc.patterns = patterns;

  auto [reduced, report] = reduce(std::move(project), pc);

  std::filesystem::remove_all(out_dir);
  std::filesystem::create_directories(out_dir);
  for (const auto& [rel, text] : reduced.files) {
    std::filesystem::path target = out_dir / rel;
    if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
    std::ofstream f(target, std::ios::binary);
    if (!f) throw UsageError("cannot write " + target.string());
    f << text;
  }
  if (!args.report_path.empty()) {
    std::filesystem::path rp(args.report_path);
    if (rp.has_parent_path()) std::filesystem::create_directories(rp.parent_path());
    std::ofstream f(rp, std::ios::binary);
    if (!f) throw UsageError("cannot write " + rp.string());
    f << report.to_json().dump(2) << "\n";
  }

  std::cout << "reduced " << report.total.tokens_before << " -> " << report.total.tokens_after
            << " tokens (" << report.verdict << "); files in " << out_dir.string() << "\n";
  return 0;
}

}  // namespace cli_detail

inline int run_cli(int argc, char** argv) {
  CliArgs args;
  CLI::App app{"shrink MiniKt sources to a minimal input that still fails a compiler command"};
  app.set_config("--config", "", "file with key=value lines mirroring the flags");
  app.add_option("inputs", args.inputs, ".mk files or directories to reduce")->required();
  app.add_option("--cmd", args.command,
                 "compiler command template; {files} expands to the staged paths")
      ->required();
  app.add_option("--criterion", args.criterion, "reduction criterion as FILE[:LINE]");
  app.add_option("--stages", args.stages,
                 "comma-separated stage list: s, t, d, p, proj, text, tree");
  app.add_option("--threshold", args.threshold, "diagnostic similarity threshold")
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--inline-limit", args.inline_limit, "max statements for function inlining");
  app.add_option("--jobs", args.jobs, "parallel workers for the project pass")
      ->check(CLI::PositiveNumber);
  app.add_option("--timeout", args.timeout_seconds, "seconds before a compiler run is abandoned");
  app.add_flag("--no-cache", args.no_cache, "disable verdict caching");
  app.add_option("--report", args.report_path, "write the JSON report here");
  app.add_option("--out", args.out_dir, "directory for the reduced files");
  app.add_option("--rules", args.rules_path, "diagnostic template rules file");
  app.add_option("--patterns", args.patterns_path, "extra text substitution patterns file");
  app.add_flag("--reverse-stages", args.reverse_stages, "run the stage list back to front");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    return cli_detail::run(args);
  } catch (const cli_detail::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const RuleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const OriginalPassesError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InfraError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace redukt
