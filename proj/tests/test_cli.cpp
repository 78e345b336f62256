#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <sys/wait.h>
#include <unistd.h>

#include "redukt/cli.hpp"

namespace fs = std::filesystem;
using namespace redukt;

namespace {

struct RunResult {
  int exit_code;
  std::string output;  // stdout and stderr interleaved
};

RunResult run_command(const std::string& command) {
  std::string full = command + " 2>&1";
  FILE* pipe = popen(full.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string sq(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'')
      out += "'\\''";
    else
      out += c;
  }
  out += "'";
  return out;
}

std::string redukt_cmd(const std::vector<std::string>& args) {
  std::string cmd = sq(REDUKT_BIN);
  for (const auto& a : args) cmd += " " + sq(a);
  return cmd;
}

fs::path fresh_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  fs::path p = fs::temp_directory_path() /
               ("redukt-cli-" + tag + "-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter++));
  fs::create_directories(p);
  return p;
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  REQUIRE(f.good());
  f << text;
}

std::string slurp(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

// Fails (with a templated diagnostic naming main.mk) iff any staged file
// still contains the marker.
const char* kMarkerCmd =
    "if grep -q boomMarker {files}; then echo 'error: MarkerBug at (7,5) in main.mk' 1>&2; "
    "exit 1; fi; exit 0";

const char* kMainWithMarker =
    "fun pad(a: Int): Int {\n"
    "    val x = a + 1\n"
    "    return x\n"
    "}\n"
    "\n"
    "fun main() {\n"
    "    boomMarker()\n"
    "}\n";

}  // namespace

TEST_CASE("a directory input reduces into --out and leaves the inputs alone") {
  fs::path src = fresh_dir("src");
  fs::path out = fresh_dir("out");
  write_file(src / "main.mk", kMainWithMarker);
  write_file(src / "extra.mk", "fun unused(): Int {\n    return 42\n}\n");
  write_file(out / "stale.mk", "leftover from an old run\n");

  auto r = run_command(redukt_cmd(
      {src.string(), "--cmd", kMarkerCmd, "--out", out.string(), "--jobs", "2"}));
  INFO(r.output);
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.output.find("reduced") != std::string::npos);

  REQUIRE(fs::exists(out / "main.mk"));
  REQUIRE(slurp(out / "main.mk").find("boomMarker") != std::string::npos);
  REQUIRE_FALSE(fs::exists(out / "stale.mk"));
  for (const auto& entry : fs::directory_iterator(out)) {
    auto name = entry.path().filename().string();
    REQUIRE((name == "main.mk" || name == "extra.mk"));
  }

  // inputs untouched
  REQUIRE(slurp(src / "main.mk") == kMainWithMarker);

  // the reduced project still trips the compiler command
  auto again = run_command("grep -rq boomMarker " + sq(out.string()));
  REQUIRE(again.exit_code == 0);
}

TEST_CASE("the report lands where asked and carries the documented shape") {
  fs::path src = fresh_dir("src");
  fs::path out = fresh_dir("out");
  fs::path report = src / "sub" / "report.json";
  write_file(src / "main.mk", kMainWithMarker);

  auto r = run_command(redukt_cmd({(src / "main.mk").string(), "--cmd", kMarkerCmd, "--out",
                                   out.string(), "--report", report.string()}));
  INFO(r.output);
  REQUIRE(r.exit_code == 0);

  auto j = nlohmann::json::parse(slurp(report));
  REQUIRE(j["verdict"] == "reproduced");
  std::vector<std::string> names;
  for (const auto& s : j["stages"]) {
    names.push_back(s["name"]);
    for (const char* key : {"tokens_before", "tokens_after", "seconds", "oracle_calls",
                            "cache_hits"})
      REQUIRE(s.contains(key));
  }
  std::vector<std::string> expected;
  for (Stage s : default_stages()) expected.emplace_back(stage_name(s));
  REQUIRE(names == expected);
  REQUIRE(j["total"]["tokens_after"] <= j["total"]["tokens_before"]);
}

TEST_CASE("a diagnostic naming the staged absolute path still anchors the criterion") {
  fs::path src = fresh_dir("src");
  fs::path out = fresh_dir("out");
  write_file(src / "main.mk", kMainWithMarker);

  // the fake compiler reports the staged file's own path, the way real ones do
  const char* cmd =
      "for f in {files}; do if grep -q boomMarker \"$f\"; then "
      "echo \"error: MarkerBug at (7,5) in $f\" 1>&2; exit 1; fi; done; exit 0";
  auto r = run_command(redukt_cmd({src.string(), "--cmd", cmd, "--out", out.string()}));
  INFO(r.output);
  REQUIRE(r.exit_code == 0);
  REQUIRE(slurp(out / "main.mk").find("boomMarker") != std::string::npos);
}

TEST_CASE("a raw diagnostic without --criterion asks for the flag") {
  fs::path src = fresh_dir("src");
  write_file(src / "main.mk", kMainWithMarker);

  const char* cmd =
      "if grep -q boomMarker {files}; then echo 'kaboom: something smells off' 1>&2; exit 1; "
      "fi; exit 0";
  auto r = run_command(redukt_cmd({src.string(), "--cmd", cmd}));
  INFO(r.output);
  REQUIRE(r.exit_code == 1);
  REQUIRE(r.output.find("--criterion") != std::string::npos);
}

TEST_CASE("a raw diagnostic with an explicit criterion reduces fine") {
  fs::path src = fresh_dir("src");
  fs::path out = fresh_dir("out");
  write_file(src / "main.mk", kMainWithMarker);

  const char* cmd =
      "if grep -q boomMarker {files}; then echo 'kaboom: something smells off' 1>&2; exit 1; "
      "fi; exit 0";
  auto r = run_command(redukt_cmd(
      {src.string(), "--cmd", cmd, "--criterion", "main.mk:7", "--out", out.string()}));
  INFO(r.output);
  REQUIRE(r.exit_code == 0);
  REQUIRE(slurp(out / "main.mk").find("boomMarker") != std::string::npos);
}

TEST_CASE("an input that compiles cleanly exits 2") {
  fs::path src = fresh_dir("src");
  write_file(src / "main.mk", "fun main() {\n    val x = 1\n}\n");

  auto r = run_command(redukt_cmd({src.string(), "--cmd", kMarkerCmd}));
  INFO(r.output);
  REQUIRE(r.exit_code == 2);
  REQUIRE(r.output.find("does not fail") != std::string::npos);
}

TEST_CASE("an unrunnable compiler exits 3") {
  fs::path src = fresh_dir("src");
  write_file(src / "main.mk", kMainWithMarker);

  auto r = run_command(redukt_cmd({src.string(), "--cmd", "/no/such/compiler {files}"}));
  INFO(r.output);
  REQUIRE(r.exit_code == 3);
}

TEST_CASE("usage mistakes exit 1") {
  fs::path src = fresh_dir("src");
  write_file(src / "main.mk", kMainWithMarker);

  SECTION("missing --cmd") {
    auto r = run_command(redukt_cmd({src.string()}));
    REQUIRE(r.exit_code == 1);
  }
  SECTION("--cmd without the placeholder") {
    auto r = run_command(redukt_cmd({src.string(), "--cmd", "true"}));
    REQUIRE(r.exit_code == 1);
    REQUIRE(r.output.find("{files}") != std::string::npos);
  }
  SECTION("unknown stage token") {
    auto r = run_command(redukt_cmd({src.string(), "--cmd", kMarkerCmd, "--stages", "s,zap"}));
    REQUIRE(r.exit_code == 1);
    REQUIRE(r.output.find("zap") != std::string::npos);
  }
  SECTION("criterion naming a file outside the project") {
    auto r = run_command(
        redukt_cmd({src.string(), "--cmd", kMarkerCmd, "--criterion", "other.mk"}));
    REQUIRE(r.exit_code == 1);
  }
  SECTION("input path that does not exist") {
    auto r = run_command(redukt_cmd({"/no/such/dir", "--cmd", kMarkerCmd}));
    REQUIRE(r.exit_code == 1);
    REQUIRE(r.output.find("/no/such/dir") != std::string::npos);
  }
  SECTION("threshold outside the unit interval") {
    auto r = run_command(
        redukt_cmd({src.string(), "--cmd", kMarkerCmd, "--threshold", "1.5"}));
    REQUIRE(r.exit_code == 1);
  }
}

TEST_CASE("--help exits 0 and lists the flags") {
  auto r = run_command(sq(REDUKT_BIN) + " --help");
  REQUIRE(r.exit_code == 0);
  for (const char* flag : {"--cmd", "--criterion", "--stages", "--out", "--report"})
    REQUIRE(r.output.find(flag) != std::string::npos);
}

TEST_CASE("--stages runs exactly the asked stages") {
  fs::path src = fresh_dir("src");
  fs::path out = fresh_dir("out");
  fs::path report = src / "report.json";
  write_file(src / "main.mk", kMainWithMarker);

  auto r = run_command(redukt_cmd({src.string(), "--cmd", kMarkerCmd, "--stages", "s,t,p",
                                   "--out", out.string(), "--report", report.string()}));
  INFO(r.output);
  REQUIRE(r.exit_code == 0);

  auto j = nlohmann::json::parse(slurp(report));
  std::vector<std::string> names;
  for (const auto& s : j["stages"]) names.push_back(s["name"]);
  REQUIRE(names == std::vector<std::string>{"slicing", "text-transforms", "tree-transforms",
                                            "pardis"});
}

TEST_CASE("--config supplies defaults the command line can omit") {
  fs::path src = fresh_dir("src");
  fs::path out = fresh_dir("out");
  fs::path report = src / "report.json";
  fs::path cfg = src / "redukt.cfg";
  write_file(src / "main.mk", kMainWithMarker);
  write_file(cfg, "stages=d\nthreshold=0.3\n");

  auto r = run_command(redukt_cmd({(src / "main.mk").string(), "--cmd", kMarkerCmd, "--config",
                                   cfg.string(), "--out", out.string(), "--report",
                                   report.string()}));
  INFO(r.output);
  REQUIRE(r.exit_code == 0);

  auto j = nlohmann::json::parse(slurp(report));
  REQUIRE(j["stages"].size() == 1);
  REQUIRE(j["stages"][0]["name"] == "hdd");
}

TEST_CASE("--patterns feeds extra text substitutions into the text stage") {
  fs::path src = fresh_dir("src");
  fs::path out = fresh_dir("out");
  fs::path patterns = src / "extra.patterns";
  write_file(src / "main.mk",
             "fun main() {\n"
             "    val longWindedName = 1\n"
             "    boomMarker()\n"
             "}\n");
  write_file(patterns, "# shorten chatty identifiers\nlongWindedName\tq\n");

  auto r = run_command(redukt_cmd({src.string(), "--cmd", kMarkerCmd, "--stages", "text",
                                   "--patterns", patterns.string(), "--out", out.string()}));
  INFO(r.output);
  REQUIRE(r.exit_code == 0);
  auto text = slurp(out / "main.mk");
  REQUIRE(text.find("longWindedName") == std::string::npos);
  REQUIRE(text.find("boomMarker") != std::string::npos);
}

TEST_CASE("refusing to reduce into a directory that holds the inputs") {
  fs::path src = fresh_dir("src");
  write_file(src / "main.mk", kMainWithMarker);

  auto r = run_command(
      redukt_cmd({(src / "main.mk").string(), "--cmd", kMarkerCmd, "--out", src.string()}));
  REQUIRE(r.exit_code == 1);
  REQUIRE(r.output.find("overwrite") != std::string::npos);
}

TEST_CASE("stage tokens map to the documented stages") {
  using cli_detail::parse_stages;
  REQUIRE(parse_stages("s") == std::vector<Stage>{Stage::Slicing});
  REQUIRE(parse_stages("t") ==
          std::vector<Stage>{Stage::TextTransforms, Stage::TreeTransforms});
  REQUIRE(parse_stages("d") == std::vector<Stage>{Stage::Hdd});
  REQUIRE(parse_stages("p") == std::vector<Stage>{Stage::Pardis});
  REQUIRE(parse_stages("proj") == std::vector<Stage>{Stage::ProjectPass});
  REQUIRE(parse_stages(" S , T ,d") ==
          std::vector<Stage>{Stage::Slicing, Stage::TextTransforms, Stage::TreeTransforms,
                             Stage::Hdd});
  REQUIRE(parse_stages("text,tree") ==
          std::vector<Stage>{Stage::TextTransforms, Stage::TreeTransforms});
  REQUIRE_THROWS_AS(parse_stages("x"), cli_detail::UsageError);
  REQUIRE_THROWS_AS(parse_stages(","), cli_detail::UsageError);
}

TEST_CASE("criterion flags split into file and optional line") {
  using cli_detail::split_criterion;
  auto [f1, l1] = split_criterion("src/main.mk:17");
  REQUIRE(f1 == "src/main.mk");
  REQUIRE(l1 == 17);
  auto [f2, l2] = split_criterion("main.mk");
  REQUIRE(f2 == "main.mk");
  REQUIRE_FALSE(l2.has_value());
  auto [f3, l3] = split_criterion("odd:name.mk");  // suffix is not a number
  REQUIRE(f3 == "odd:name.mk");
  REQUIRE_FALSE(l3.has_value());
}

TEST_CASE("diagnostic paths map back to project files by suffix") {
  using cli_detail::map_diag_path;
  FileSet files{{"src/main.mk", ""}, {"main.mk", ""}, {"lib/util.mk", ""}};
  REQUIRE(map_diag_path("src/main.mk", files) == "src/main.mk");
  REQUIRE(map_diag_path("/tmp/stage-1/src/main.mk", files) == "src/main.mk");
  REQUIRE(map_diag_path("/tmp/stage-1/main.mk", files) == "main.mk");
  REQUIRE(map_diag_path("/tmp/xmain.mk", files).empty());  // no '/' boundary
  REQUIRE(map_diag_path("elsewhere.mk", files).empty());
}

TEST_CASE("pattern files accept comments, deletions and replacements") {
  auto pats = cli_detail::load_patterns(
      "# comment line\n"
      "\n"
      "noiseCall\\(\\)\n"
      "bigNumber\t0\r\n");
  REQUIRE(pats.size() == 2);
  REQUIRE(pats[0] == std::pair<std::string, std::string>{"noiseCall\\(\\)", ""});
  REQUIRE(pats[1] == std::pair<std::string, std::string>{"bigNumber", "0"});
}

TEST_CASE("the built-in rules recognise both common diagnostic shapes") {
  auto rules = cli_detail::default_rules();
  auto a = parse_signature("error: NullCheck at (3,7) in main.mk", rules);
  REQUIRE(a.is_templated());
  REQUIRE(a.templated->error_type == "NullCheck");
  REQUIRE(a.templated->file == "main.mk");
  REQUIRE(a.templated->line == 3);
  REQUIRE(a.templated->col == 7);

  auto b = parse_signature("src/a.mk:12:4: error: type mismatch in call", rules);
  REQUIRE(b.is_templated());
  REQUIRE(b.templated->file == "src/a.mk");
  REQUIRE(b.templated->line == 12);

  auto c = parse_signature("kaboom: nothing matches this", rules);
  REQUIRE_FALSE(c.is_templated());
}
