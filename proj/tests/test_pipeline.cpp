#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <string>
#include <vector>

#include "redukt/pipeline.hpp"

using namespace redukt;

namespace {

// Fake compiler: crashes with a stable diagnostic while the marker call
// survives in any staged file.
std::string marker_compiler(const std::string& marker) {
  return "if grep -q '" + marker +
         "' {files}; then"
         " echo 'error: MarkerBug at (1,1) in main.mk' 1>&2; exit 1; fi;"
         "exit 0";
}

PipelineConfig base_config(std::string command) {
  PipelineConfig cfg;
  cfg.command_template = std::move(command);
  cfg.rules = load_rules("bug\terror: (?<type>\\w+) at \\((?<line>\\d+),(?<col>\\d+)\\) in (?<file>\\S+)\n");
  return cfg;
}

Project single_file(std::string text) {
  Project p;
  p.files = {{"main.mk", std::move(text)}};
  p.rc = ReductionCriterion::user("main.mk");
  return p;
}

const std::string kCluttered =
    "// build notes nobody reads\n"
    "fun pad() {\n"
    "    val z = 100 + 200 + 300\n"
    "}\n"
    "\n"
    "fun main() {\n"
    "    val label = \"extremely long banner text\"\n"
    "    boomMarker()\n"
    "}\n";

}  // namespace

TEST_CASE("snapshots restore file texts byte-exactly") {
  SnapshotStack snaps;
  FileSet files = {{"a.mk", "fun f() {\n}\n"}, {"b.mk", "val x = 1\n"}};

  SECTION("a rollback undoes a damaging edit") {
    auto h = snaps.take(files);
    files[0].second = "garbage";
    files = snaps.restore(h);
    CHECK(files[0].second == "fun f() {\n}\n");
    CHECK(snaps.depth() == 0);
  }

  SECTION("nested snapshots unwind in LIFO order") {
    auto outer = snaps.take(files);
    files[0].second = "stage edit";
    auto inner = snaps.take(files);
    files[0].second = "candidate edit";
    files = snaps.restore(inner);
    CHECK(files[0].second == "stage edit");
    files = snaps.restore(outer);
    CHECK(files[0].second == "fun f() {\n}\n");
  }

  SECTION("a hundred random edits cannot survive a rollback") {
    auto h = snaps.take(files);
    std::mt19937 rng(7);
    for (int i = 0; i < 100; ++i) {
      auto& text = files[rng() % files.size()].second;
      std::size_t at = text.empty() ? 0 : rng() % text.size();
      if (rng() % 2)
        text.insert(at, 1, static_cast<char>('a' + rng() % 26));
      else if (!text.empty())
        text.erase(at, 1);
    }
    files = snaps.restore(h);
    CHECK(files == FileSet{{"a.mk", "fun f() {\n}\n"}, {"b.mk", "val x = 1\n"}});
  }
}

TEST_CASE("the default pipeline shrinks a cluttered file around its marker") {
  auto cfg = base_config(marker_compiler("boomMarker"));
  auto [out, report] = reduce(single_file(kCluttered), cfg);

  REQUIRE(out.files.size() == 1);
  CHECK(out.files[0].second.find("boomMarker") != std::string::npos);
  CHECK(report.verdict == "reproduced");
  CHECK(report.total.tokens_after < report.total.tokens_before);
  CHECK(out.files[0].second.find("pad") == std::string::npos);
  CHECK(out.files[0].second.find("label") == std::string::npos);

  // stage accounting chains and matches the configured order
  REQUIRE(report.stages.size() == default_stages().size());
  for (std::size_t i = 0; i < report.stages.size(); ++i) {
    CHECK(report.stages[i].name == stage_name(default_stages()[i]));
    if (i > 0) CHECK(report.stages[i].tokens_before == report.stages[i - 1].tokens_after);
    CHECK(report.stages[i].tokens_after <= report.stages[i].tokens_before);
  }
  CHECK(report.total.tokens_before == report.stages.front().tokens_before);
  CHECK(report.total.tokens_after == report.stages.back().tokens_after);
  CHECK(report.total.edits_accepted >= 1);
  CHECK(report.total.oracle_calls >= 1);
}

TEST_CASE("the report serializes with the documented shape") {
  auto cfg = base_config(marker_compiler("boomMarker"));
  cfg.stages = {Stage::TextTransforms};
  auto [out, report] = reduce(single_file("fun main() {\n    boomMarker()\n}\n"), cfg);
  (void)out;

  auto doc = report.to_json();
  REQUIRE(doc.contains("stages"));
  REQUIRE(doc["stages"].is_array());
  REQUIRE(doc["stages"].size() == 1);
  for (const char* key :
       {"name", "tokens_before", "tokens_after", "seconds", "oracle_calls", "cache_hits"}) {
    CHECK(doc["stages"][0].contains(key));
    CHECK(doc["total"].contains(key));
  }
  CHECK(doc["stages"][0]["name"] == "text-transforms");
  CHECK(doc["verdict"] == "reproduced");
}

TEST_CASE("the stage list is honored as given and reversible") {
  auto cfg = base_config(marker_compiler("boomMarker"));
  cfg.stages = {Stage::Slicing, Stage::TextTransforms, Stage::Pardis};
  auto project = single_file("fun main() {\n    boomMarker()\n}\n");

  auto [out1, r1] = reduce(project, cfg);
  (void)out1;
  REQUIRE(r1.stages.size() == 3);
  CHECK(r1.stages[0].name == "slicing");
  CHECK(r1.stages[1].name == "text-transforms");
  CHECK(r1.stages[2].name == "pardis");

  cfg.reverse_stages = true;
  auto [out2, r2] = reduce(project, cfg);
  (void)out2;
  REQUIRE(r2.stages.size() == 3);
  CHECK(r2.stages[0].name == "pardis");
  CHECK(r2.stages[2].name == "slicing");
}

TEST_CASE("an hdd-only pipeline equals driving the tree reducer by hand") {
  const std::string source =
      "fun keep() {\n"
      "    boomMarker()\n"
      "}\n"
      "\n"
      "fun chaff(a: Int, b: Int) {\n"
      "    val t = a + b\n"
      "    while (t) {\n"
      "        val u = 9\n"
      "    }\n"
      "}\n";
  auto cfg = base_config(marker_compiler("boomMarker"));
  cfg.stages = {Stage::Hdd};
  auto [out, report] = reduce(single_file(source), cfg);
  CHECK(report.verdict == "reproduced");

  // the same loop the stage runs: canonical-print candidates, repeat while
  // the token count drops
  std::string text = source;
  for (int rep = 0; rep < 5; ++rep) {
    long before = minikt::count_tokens(text);
    auto parsed = minikt::parse(text);
    REQUIRE(parsed.ok());
    const auto& tree = *parsed.tree;
    auto model = tree_model_from(tree);
    TreeTest test = [&](const DeletedMask& mask) {
      return minikt::print(tree, mask).find("boomMarker") != std::string::npos
                 ? TestOutcome::Fail
                 : TestOutcome::Pass;
    };
    if (test(DeletedMask(model.nodes.size(), 0)) != TestOutcome::Fail) break;
    text = minikt::print(tree, hdd(model, test));
    if (minikt::count_tokens(text) >= before) break;
  }
  CHECK(out.files[0].second == text);
}

TEST_CASE("transforms reach past what subtree deletion can remove") {
  // the marker must stay on the fallback side of an elvis: deletion can only
  // drop the tail (losing the marker), while the elvis rewrite keeps it
  const std::string source =
      "fun main() {\n"
      "    val v = enormous + junk ?: fallbackMarker\n"
      "    boom(v)\n"
      "}\n";
  const std::string command =
      "if grep -q 'fallbackMarker' {files} && grep -q 'boom(v)' {files}; then"
      " echo 'error: MarkerBug at (1,1) in main.mk' 1>&2; exit 1; fi;"
      "exit 0";

  auto hdd_only = base_config(command);
  hdd_only.stages = {Stage::Hdd};
  auto [out_d, r_d] = reduce(single_file(source), hdd_only);
  CHECK(r_d.verdict == "reproduced");

  auto full = base_config(command);
  auto [out_full, r_full] = reduce(single_file(source), full);
  CHECK(r_full.verdict == "reproduced");

  CHECK(r_full.total.tokens_after < r_d.total.tokens_after);
  CHECK(out_full.files[0].second.find("fallbackMarker") != std::string::npos);
  CHECK(out_full.files[0].second.find("enormous") == std::string::npos);
}

TEST_CASE("a second file shrinks to nothing when only the first matters") {
  Project p;
  p.files = {{"a.mk", "fun main() {\n    boomMarker()\n}\n"},
             {"b.mk", "class Helper() {\n    val m = main\n}\n"}};
  p.rc = ReductionCriterion::user("a.mk");
  auto cfg = base_config(marker_compiler("boomMarker"));
  auto [out, report] = reduce(p, cfg);
  CHECK(report.verdict == "reproduced");
  // b.mk empties in the first project pass and, once it references nothing,
  // the next repetition may prune the file entirely
  REQUIRE_FALSE(out.files.empty());
  CHECK(out.files[0].first == "a.mk");
  CHECK(out.files[0].second.find("boomMarker") != std::string::npos);
  for (std::size_t i = 1; i < out.files.size(); ++i)
    CHECK(minikt::count_tokens(out.files[i].second) == 0);
}

TEST_CASE("disabling the cache changes call counts but not one output byte") {
  auto cached = base_config(marker_compiler("boomMarker"));
  cached.stages = {Stage::Hdd};
  auto uncached = cached;
  uncached.cache_enabled = false;

  auto [out_c, r_c] = reduce(single_file(kCluttered), cached);
  auto [out_u, r_u] = reduce(single_file(kCluttered), uncached);
  CHECK(out_c.files == out_u.files);
  CHECK(r_c.total.cache_hits > 0);
  CHECK(r_u.total.cache_hits == 0);
  CHECK(r_c.total.oracle_calls < r_u.total.oracle_calls);
}

TEST_CASE("an input the compiler accepts is rejected up front") {
  auto cfg = base_config(marker_compiler("boomMarker"));
  CHECK_THROWS_AS(reduce(single_file("fun main() {\n}\n"), cfg), OriginalPassesError);
}

TEST_CASE("a missing compiler command is an infrastructure failure") {
  auto cfg = base_config("/no/such/compiler {files}");
  CHECK_THROWS_AS(reduce(single_file("fun main() {\n    boomMarker()\n}\n"), cfg), InfraError);
}
