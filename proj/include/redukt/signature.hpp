#pragma once

#include <cctype>
#include <map>
#include <optional>
#include <regex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "redukt/diff.hpp"

namespace redukt {

struct RuleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

// std::regex (ECMAScript) has no named capture groups. Rewrite
// (?<name>...) into plain capture groups and remember name -> group index.
struct TranslatedPattern {
  std::string pattern;
  std::map<std::string, int> groups;
};

inline TranslatedPattern translate_named_groups(std::string_view src) {
  TranslatedPattern out;
  int group = 0;
  std::size_t i = 0;
  bool in_class = false;
  while (i < src.size()) {
    char c = src[i];
    if (c == '\\' && i + 1 < src.size()) {
      out.pattern.push_back(c);
      out.pattern.push_back(src[i + 1]);
      i += 2;
      continue;
    }
    if (in_class) {
      if (c == ']') in_class = false;
      out.pattern.push_back(c);
      ++i;
      continue;
    }
    if (c == '[') {
      in_class = true;
      out.pattern.push_back(c);
      ++i;
      continue;
    }
    if (c == '(') {
      if (i + 2 < src.size() && src[i + 1] == '?' && src[i + 2] == '<' &&
          i + 3 < src.size() && src[i + 3] != '=' && src[i + 3] != '!') {
        std::size_t j = i + 3;
        std::string name;
        while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
          name.push_back(src[j++]);
        if (j >= src.size() || src[j] != '>' || name.empty())
          throw RuleError("malformed named group in pattern: " + std::string(src));
        ++group;
        if (out.groups.count(name))
          throw RuleError("duplicate named group '" + name + "' in pattern");
        out.groups[name] = group;
        out.pattern.push_back('(');
        i = j + 1;
        continue;
      }
      if (i + 1 < src.size() && src[i + 1] == '?') {
        out.pattern.push_back(c);  // (?: (?= (?! do not capture
        ++i;
        continue;
      }
      ++group;
      out.pattern.push_back(c);
      ++i;
      continue;
    }
    out.pattern.push_back(c);
    ++i;
  }
  return out;
}

}  // namespace detail

// One line of the rules file: a name, a tab, and a regex with named groups
// `type`, `file` (required) and `line`, `col` (optional).
struct TemplateRule {
  std::string name;
  std::string pattern;
  std::regex compiled;
  std::map<std::string, int> groups;
};

inline TemplateRule make_rule(std::string name, std::string pattern) {
  TemplateRule rule;
  rule.name = std::move(name);
  rule.pattern = std::move(pattern);
  auto translated = detail::translate_named_groups(rule.pattern);
  if (!translated.groups.count("type") || !translated.groups.count("file"))
    throw RuleError("rule '" + rule.name + "' must declare named groups 'type' and 'file'");
  try {
    rule.compiled = std::regex(translated.pattern, std::regex::ECMAScript);
  } catch (const std::regex_error& e) {
    throw RuleError("rule '" + rule.name + "': invalid regex: " + e.what());
  }
  rule.groups = std::move(translated.groups);
  return rule;
}

// Parse the rules file text: one `name<TAB>regex` per line, '#' starts a
// comment line, blank lines are skipped. Throws RuleError on bad input.
inline std::vector<TemplateRule> load_rules(std::string_view text) {
  std::vector<TemplateRule> rules;
  std::size_t line_no = 0, pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, (eol == std::string_view::npos ? text.size() : eol) - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos)
      throw RuleError("rules line " + std::to_string(line_no) + ": expected name<TAB>regex");
    std::string_view name = line.substr(0, tab);
    std::string_view pattern = line.substr(tab + 1);
    while (!pattern.empty() && pattern.front() == '\t') pattern.remove_prefix(1);
    if (name.empty() || pattern.empty())
      throw RuleError("rules line " + std::to_string(line_no) + ": empty name or regex");
    rules.push_back(make_rule(std::string(name), std::string(pattern)));
  }
  return rules;
}

// What identifies a compiler failure. Templated signatures compare by
// error_type alone (location is informational); raw ones by text diff.
struct ErrorSignature {
  struct Templated {
    std::string error_type;
    std::string file;
    std::optional<int> line;
    std::optional<int> col;
  };
  std::optional<Templated> templated;
  std::string raw;  // full diagnostic text, always present

  bool is_templated() const { return templated.has_value(); }
};

// Classify a diagnostic with the rules, first match wins. A rule whose
// declared groups did not all participate in the match is skipped. With no
// matching rule the signature falls back to the raw text.
inline ErrorSignature parse_signature(const std::string& diagnostic,
                                      const std::vector<TemplateRule>& rules) {
  ErrorSignature sig;
  sig.raw = diagnostic;
  for (const auto& rule : rules) {
    std::smatch m;
    if (!std::regex_search(diagnostic, m, rule.compiled)) continue;
    bool complete = true;
    for (const auto& [name, idx] : rule.groups) {
      if (idx >= static_cast<int>(m.size()) || !m[static_cast<std::size_t>(idx)].matched) {
        complete = false;
        break;
      }
    }
    if (!complete) continue;
    ErrorSignature::Templated t;
    t.error_type = m[static_cast<std::size_t>(rule.groups.at("type"))].str();
    t.file = m[static_cast<std::size_t>(rule.groups.at("file"))].str();
    if (t.error_type.empty()) continue;
    auto as_int = [&](const char* g) -> std::optional<int> {
      auto it = rule.groups.find(g);
      if (it == rule.groups.end()) return std::nullopt;
      const std::string s = m[static_cast<std::size_t>(it->second)].str();
      try {
        return std::stoi(s);
      } catch (...) {
        return std::nullopt;
      }
    };
    t.line = as_int("line");
    t.col = as_int("col");
    sig.templated = std::move(t);
    return sig;
  }
  return sig;
}

// Two failures count as the same bug when their templated types match
// exactly; locations may drift during reduction. Without templates on both
// sides, nearly-identical raw text (diff below threshold) is accepted.
inline bool same_error(const ErrorSignature& ref, const ErrorSignature& cand, double threshold) {
  if (ref.is_templated() && cand.is_templated())
    return ref.templated->error_type == cand.templated->error_type;
  return diff_similarity(ref.raw, cand.raw) < threshold;
}

}  // namespace redukt
