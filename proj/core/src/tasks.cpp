#include "logicdec/tasks.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "logicdec/error.hpp"
#include "logicdec/io.hpp"
#include "logicdec/prover.hpp"
#include "logicdec/stemmer.hpp"

namespace logicdec {

namespace {

using nlohmann::json;

std::vector<std::string> string_list(const json& j, const char* field, std::size_t line) {
  std::vector<std::string> out;
  if (!j.contains(field)) return out;
  const json& v = j.at(field);
  if (v.is_string()) {
    out.push_back(v.get<std::string>());
    return out;
  }
  if (!v.is_array()) throw FormatError("line " + std::to_string(line) + ": field '" + field + "' must be a list");
  for (const json& e : v) {
    if (!e.is_string()) {
      throw FormatError("line " + std::to_string(line) + ": field '" + field + "' must hold strings");
    }
    out.push_back(e.get<std::string>());
  }
  return out;
}

RuleExpr replace_empty(const RuleExpr& e, const SetBindings& sets) {
  if (e.kind == ExprKind::Quant) {
    auto it = sets.find(e.set_name);
    if (it != sets.end() && it->second.empty()) return RuleExpr::truth(0.0);
  }
  RuleExpr out = e;
  for (RuleExpr& c : out.children) c = replace_empty(c, sets);
  return out;
}

void align_all(std::span<const std::string> words, const FactBase& facts, std::vector<TokenId>& ids,
               std::vector<std::string>& unaligned) {
  for (const std::string& w : words) {
    auto id = align_with_lemma(to_lower(w), facts.vocab, facts.policy);
    if (!id) {
      unaligned.push_back(w);
    } else if (std::find(ids.begin(), ids.end(), *id) == ids.end()) {
      ids.push_back(*id);
    }
  }
}

}  // namespace

TaskInstance parse_instance(std::string_view line, std::size_t line_number) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw FormatError("line " + std::to_string(line_number) + ": invalid JSON: " + e.what());
  }
  if (!j.is_object()) throw FormatError("line " + std::to_string(line_number) + ": instance must be an object");
  TaskInstance inst;
  inst.id = j.contains("id") ? (j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump())
                             : std::to_string(line_number);
  const std::string kind = j.value("kind", std::string());
  if (kind == "lexical") {
    inst.kind = TaskKind::Lexical;
    inst.concepts = string_list(j, "concepts", line_number);
    if (inst.concepts.empty()) {
      throw FormatError("line " + std::to_string(line_number) + ": lexical instance needs at least one concept");
    }
  } else if (kind == "dialogue") {
    inst.kind = TaskKind::Dialogue;
    inst.persona = string_list(j, "persona", line_number);
    inst.history = string_list(j, "history", line_number);
    if (inst.persona.empty()) {
      throw FormatError("line " + std::to_string(line_number) + ": dialogue instance needs a persona sentence");
    }
  } else {
    throw FormatError("line " + std::to_string(line_number) + ": kind must be \"lexical\" or \"dialogue\"");
  }
  inst.reference = string_list(j, "reference", line_number);
  return inst;
}

std::vector<TaskInstance> load_instances(const std::filesystem::path& path) {
  std::vector<TaskInstance> out;
  std::size_t n = 0;
  for (const std::string& line : read_lines(path)) {
    ++n;
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    out.push_back(parse_instance(line, n));
  }
  return out;
}

RuleProgram drop_empty_quantifiers(const RuleProgram& program, const SetBindings& sets) {
  std::vector<Rule> rules;
  for (const auto& [name, r] : program.rules()) {
    Rule copy = r;
    copy.body = replace_empty(r.body, sets);
    rules.push_back(std::move(copy));
  }
  return link_program(std::move(rules));
}

RuleTemplate lexical_rule_template(std::span<const std::string> concepts, const FactBase& facts,
                                   std::string_view rules) {
  RuleTemplate t;
  t.program = parse_program(rules);
  std::vector<TokenId> ids;
  align_all(concepts, facts, ids, t.unaligned);
  if (ids.empty()) throw Error("none of the concepts aligns to a vocabulary token");
  t.sets[std::string(sets::kTargets)] = std::move(ids);
  return t;
}

RuleTemplate dialogue_rule_template(std::span<const std::string> persona, std::span<const std::string> history,
                                    const FactBase& facts, std::string_view rules,
                                    const std::set<std::string>& stop_words) {
  RuleTemplate t;
  std::vector<TokenId> p;
  std::vector<TokenId> u;
  for (const std::string& s : persona) align_all(extract_keywords(s, stop_words), facts, p, t.unaligned);
  for (const std::string& s : user_turns(history)) align_all(extract_keywords(s, stop_words), facts, u, t.unaligned);
  if (p.empty()) throw Error("no persona keyword aligns to a vocabulary token");
  t.sets[std::string(sets::kPersona)] = std::move(p);
  t.sets[std::string(sets::kUser)] = std::move(u);
  t.program = drop_empty_quantifiers(parse_program(rules), t.sets);
  return t;
}

std::vector<std::string> extract_keywords(std::string_view sentence, const std::set<std::string>& stop_words) {
  std::vector<std::string> out;
  std::vector<std::string> keys;
  std::string word;
  auto flush = [&] {
    if (word.size() >= 2 && stop_words.count(word) == 0 && stop_words.count(lemmatize(word)) == 0) {
      std::string key = stem_key(word);
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
        keys.push_back(std::move(key));
        out.push_back(word);
      }
    }
    word.clear();
  };
  for (char ch : sentence) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      word.push_back(static_cast<char>(std::tolower(c)));
    } else if (ch != '\'') {
      flush();
    }
  }
  flush();
  return out;
}

std::vector<std::string> user_turns(std::span<const std::string> history) {
  std::vector<std::string> out;
  for (std::size_t i = history.size(); i > 0;) {
    out.push_back(history[i - 1]);
    if (i < 2) break;
    i -= 2;
  }
  return out;
}

double text_coverage(std::string_view text, std::span<const std::string> concepts) {
  if (concepts.empty()) return 1.0;
  std::set<std::string> stems;
  std::istringstream in{std::string(text)};
  std::string w;
  while (in >> w) stems.insert(stem_key(to_lower(w)));
  std::size_t hit = 0;
  for (const std::string& c : concepts) hit += stems.count(stem_key(to_lower(c)));
  return static_cast<double>(hit) / static_cast<double>(concepts.size());
}

double corpus_coverage(std::span<const std::string> outputs, std::span<const TaskInstance> instances) {
  if (outputs.size() != instances.size()) {
    throw DimensionError("got " + std::to_string(outputs.size()) + " outputs for " +
                         std::to_string(instances.size()) + " instances");
  }
  if (outputs.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < outputs.size(); ++i) sum += text_coverage(outputs[i], instances[i].concepts);
  return 100.0 * sum / static_cast<double>(outputs.size());
}

}  // namespace logicdec
