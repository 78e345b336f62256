#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "redukt/minikt/minikt.hpp"

using namespace redukt::minikt;

namespace {

std::vector<std::string> counted_tokens(const std::string& text) {
  std::vector<std::string> out;
  for (const auto& t : lex(text))
    if (counts_as_token(t)) out.push_back(t.text);
  return out;
}

const std::vector<std::string>& snippets() {
  static const std::vector<std::string> s = {
      "",
      "fun f() {}",
      "import a.b\nimport c\nval top = 1\n",
      "fun f(x: Int, y: String): Int {\n"
      "    val a: Int = x + 1\n"
      "    var b = a * 2 - -x\n"
      "    b = b / 2\n"
      "    if (a < b && x >= 0 || !done) {\n"
      "        b = b + 1\n"
      "    } else {\n"
      "        b = 0\n"
      "    }\n"
      "    while (b > 0) b = b - 1\n"
      "    return b\n"
      "}\n",
      "class Triangle(val a: Int, val b: Int, val c: Int) {\n"
      "    val p: Int = (a + b + c) / 2\n"
      "    fun area(): Int {\n"
      "        return a * b / 2\n"
      "    }\n"
      "}\n"
      "class Empty\n",
      "fun g(v: Any?): String {\n"
      "    val s = v ?: \"fallback\" // elvis\n"
      "    if (v is Wrapper) {\n"
      "        return v.unwrap(1, 2.5)\n"
      "    }\n"
      "    /* block comment */\n"
      "    val w = (v as Wrapper).tag\n"
      "    return TODO()\n"
      "}\n",
      "fun h() = compute(1)\n"
      "fun compute(n: Int): Int = n + 42\n",
      "fun chains() {\n"
      "    val x = obj.field.method(a, b).next\n"
      "    obj.field = x\n"
      "    deep(f(g(h(1))))\n"
      "    return\n"
      "}\n",
  };
  return s;
}

SyntaxTree parse_ok(const std::string& text) {
  auto r = parse(text);
  INFO("input: " << text);
  for (const auto& e : r.errors) INFO("error " << e.line << ":" << e.col << " " << e.message);
  REQUIRE(r.ok());
  return *std::move(r.tree);
}

std::vector<int> find_kind(const SyntaxTree& t, NodeKind k) {
  std::vector<int> ids;
  for (int i = 0; i < t.size(); ++i)
    if (t.node(i).kind == k) ids.push_back(i);
  return ids;
}

}  // namespace

TEST_CASE("empty input parses to an empty file and prints to nothing") {
  auto t = parse_ok("");
  CHECK(t.node(t.root()).kind == NodeKind::File);
  CHECK(t.node(t.root()).children.empty());
  CHECK(print(t) == "");
}

TEST_CASE("unbalanced parameter list is a syntax error naming the paren") {
  auto r = parse("fun f( {");
  REQUIRE_FALSE(r.ok());
  REQUIRE_FALSE(r.errors.empty());
  CHECK(r.errors[0].line == 1);
  CHECK(r.errors[0].message.find("(") != std::string::npos);
}

TEST_CASE("parse failures produce errors, not trees") {
  for (const char* bad : {"fun", "class 1", "val a = ", "fun f() { if (x { } }",
                          "fun f() { f() = 3 }", "import a.b fun f() {} import c",
                          "fun f() { return } }", "x = 1"}) {
    auto r = parse(bad);
    INFO(bad);
    CHECK_FALSE(r.ok());
    CHECK_FALSE(r.errors.empty());
  }
}

TEST_CASE("print is token-equivalent to the source, comments aside") {
  for (const auto& src : snippets()) {
    auto t = parse_ok(src);
    std::string printed = print(t);
    INFO("source:\n" << src << "\nprinted:\n" << printed);
    CHECK(counted_tokens(printed) == counted_tokens(src));

    // printing is stable: parse(print) prints identically
    auto t2 = parse_ok(printed);
    CHECK(print(t2) == printed);
  }
}

TEST_CASE("printer keeps parenthesized member chains compact") {
  auto t = parse_ok("fun b() {\n    val c = (A).java\n}\n");
  CHECK(print(t).find("(A).java") != std::string::npos);
}

TEST_CASE("statement boundaries follow newline continuation rules") {
  // trailing operator continues the expression
  auto t1 = parse_ok("fun f() {\n    val a = b +\n        c\n}\n");
  CHECK(find_kind(t1, NodeKind::PropertyDecl).size() == 1);
  CHECK(find_kind(t1, NodeKind::BinaryExpr).size() == 1);

  // '(' on a new line starts a new statement instead of a call
  auto t2 = parse_ok("fun f() {\n    val x = f\n    (a)\n}\n");
  auto block = find_kind(t2, NodeKind::Block);
  REQUIRE(block.size() == 1);
  CHECK(t2.node(block[0]).children.size() == 2);
  CHECK(find_kind(t2, NodeKind::CallSuffix).empty());

  // leading '.' continues a member chain
  auto t3 = parse_ok("fun f() {\n    val x = obj\n        .field\n}\n");
  CHECK(find_kind(t3, NodeKind::MemberSuffix).size() == 1);

  // inside parentheses newlines are insignificant
  auto t4 = parse_ok("fun f() {\n    if (a\n        && b) { }\n}\n");
  CHECK(find_kind(t4, NodeKind::IfStmt).size() == 1);

  // bare return followed by an expression statement on the next line
  auto t5 = parse_ok("fun f() {\n    return\n    g()\n}\n");
  auto rets = find_kind(t5, NodeKind::ReturnStmt);
  REQUIRE(rets.size() == 1);
  CHECK(t5.node(rets[0]).children.empty());
}

TEST_CASE("node levels: the statement sits alone below file, fun, block") {
  auto t = parse_ok("fun f() { val a = 1 }");
  auto props = find_kind(t, NodeKind::PropertyDecl);
  REQUIRE(props.size() == 1);
  int depth = t.node(props[0]).depth;
  CHECK(depth == 3);  // File > FunDecl > Block > PropertyDecl
  auto level = nodes_at_level(t, depth);
  REQUIRE(level.size() == 1);
  CHECK(level[0] == props[0]);
  CHECK(nodes_at_level(t, 0) == std::vector<int>{t.root()});
}

TEST_CASE("weights count non-comment tokens of the subtree") {
  auto t = parse_ok("fun f() {}");
  CHECK(t.node(t.root()).weight == 6);
  auto t2 = parse_ok("fun f() {\n    val a = 1 // note\n}\n");
  for (int i = 0; i < t2.size(); ++i)
    CHECK(t2.node(i).weight == count_tokens(t2.text_of(i)));
}

TEST_CASE("every deletable node deletes cleanly, alone and in random subsets") {
  std::mt19937 rng(7);
  for (const auto& src : snippets()) {
    auto t = parse_ok(src);
    std::vector<int> deletable;
    for (int i = 0; i < t.size(); ++i)
      if (t.node(i).deletable) deletable.push_back(i);

    for (int id : deletable) {
      std::vector<bool> mask(static_cast<std::size_t>(t.size()), false);
      mask[static_cast<std::size_t>(id)] = true;
      std::string printed = print(t, mask);
      auto r = parse(printed);
      INFO("deleting " << node_kind_name(t.node(id).kind) << " #" << id << " from:\n"
                       << src << "\nyields:\n" << printed);
      CHECK(r.ok());
    }

    for (int trial = 0; trial < 30; ++trial) {
      std::vector<bool> mask(static_cast<std::size_t>(t.size()), false);
      for (int id : deletable)
        if (rng() % 3 == 0) mask[static_cast<std::size_t>(id)] = true;
      std::string printed = print(t, mask);
      auto r = parse(printed);
      INFO("subset deletion from:\n" << src << "\nyields:\n" << printed);
      CHECK(r.ok());
    }
  }
}

TEST_CASE("deleting mandatory structural nodes breaks the parse") {
  std::mt19937 rng(11);
  std::vector<std::pair<const SyntaxTree*, int>> samples;
  std::vector<SyntaxTree> trees;
  trees.reserve(snippets().size());
  for (const auto& src : snippets()) {
    if (src.empty()) continue;
    trees.push_back(parse_ok(src));
  }
  for (const auto& t : trees) {
    for (int i = 0; i < t.size(); ++i) {
      const Node& n = t.node(i);
      if (n.deletable) continue;
      bool structural = n.kind == NodeKind::Condition || n.kind == NodeKind::ParamList ||
                        n.kind == NodeKind::TypeRef || n.kind == NodeKind::ExprBody ||
                        (n.kind == NodeKind::Block && n.parent >= 0 &&
                         t.node(n.parent).kind == NodeKind::FunDecl);
      if (structural) samples.emplace_back(&t, i);
    }
  }
  REQUIRE(samples.size() >= 10);
  std::shuffle(samples.begin(), samples.end(), rng);
  samples.resize(10);
  for (auto [tp, id] : samples) {
    std::vector<bool> mask(static_cast<std::size_t>(tp->size()), false);
    mask[static_cast<std::size_t>(id)] = true;
    std::string printed = print(*tp, mask);
    auto r = parse(printed);
    INFO("deleting mandatory " << node_kind_name(tp->node(id).kind) << " yields:\n" << printed);
    CHECK_FALSE(r.ok());
  }
}

TEST_CASE("deleting the root prints an empty file") {
  auto t = parse_ok("fun f() {}\nval a = 1\n");
  std::vector<bool> mask(static_cast<std::size_t>(t.size()), false);
  mask[static_cast<std::size_t>(t.root())] = true;
  CHECK(print(t, mask) == "");
}

TEST_CASE("call suffix deletion leaves a bare member chain") {
  auto t = parse_ok("fun f() {\n    val p = method.getParameters()\n}\n");
  auto calls = find_kind(t, NodeKind::CallSuffix);
  REQUIRE(calls.size() == 1);
  CHECK(t.node(calls[0]).deletable);
  std::vector<bool> mask(static_cast<std::size_t>(t.size()), false);
  mask[static_cast<std::size_t>(calls[0])] = true;
  std::string printed = print(t, mask);
  CHECK(printed.find("method.getParameters") != std::string::npos);
  CHECK(printed.find("getParameters()") == std::string::npos);
  CHECK(parse(printed).ok());
}

TEST_CASE("char spans slice the exact node text") {
  std::string src = "fun f(x: Int) {\n    val a = x + 1\n}\n";
  auto t = parse_ok(src);
  for (int i = 0; i < t.size(); ++i) {
    auto [b, e] = t.char_span(i);
    REQUIRE(b <= e);
    REQUIRE(e <= src.size());
    CHECK(t.text_of(i) == src.substr(b, e - b));
  }
  auto props = find_kind(t, NodeKind::PropertyDecl);
  REQUIRE(props.size() == 1);
  CHECK(t.text_of(props[0]) == "val a = x + 1");
}

TEST_CASE("every bundled fixture round-trips through parse and print") {
  namespace fs = std::filesystem;
  fs::path fixtures = fs::path(REDUKT_SOURCE_DIR) / "corpus" / "fixtures";
  int seen = 0;
  for (const auto& entry : fs::recursive_directory_iterator(fixtures)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".mk") continue;
    ++seen;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string src = buf.str();
    INFO(entry.path().string());
    auto t = parse_ok(src);
    CHECK(counted_tokens(print(t)) == counted_tokens(src));
  }
  REQUIRE(seen >= 10);
}

TEST_CASE("every deletable node of every bundled fixture deletes and reparses") {
  namespace fs = std::filesystem;
  fs::path fixtures = fs::path(REDUKT_SOURCE_DIR) / "corpus" / "fixtures";
  for (const auto& entry : fs::recursive_directory_iterator(fixtures)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".mk") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    auto t = parse_ok(buf.str());
    for (int id = 0; id < t.size(); ++id) {
      if (!t.node(id).deletable) continue;
      std::vector<bool> mask(static_cast<std::size_t>(t.size()), false);
      mask[static_cast<std::size_t>(id)] = true;
      std::string printed = print(t, mask);
      INFO(entry.path().string() << ": deleting " << node_kind_name(t.node(id).kind) << " #"
                                 << id << " yields:\n"
                                 << printed);
      CHECK(parse(printed).ok());
    }
  }
}
