#pragma once

#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "logicdec/knowledge_base.hpp"
#include "logicdec/rule_dsl.hpp"

namespace logicdec {

enum class TaskKind { Lexical, Dialogue };

struct TaskInstance {
  std::string id;
  TaskKind kind = TaskKind::Lexical;
  /// Lexical: target concept words.
  std::vector<std::string> concepts;
  /// Dialogue: persona sentences and alternating history, oldest first.
  std::vector<std::string> persona;
  std::vector<std::string> history;
  std::vector<std::string> reference;
};

/// One JSON object per line:
///   {"id": "...", "kind": "lexical", "concepts": [...]}
///   {"id": "...", "kind": "dialogue", "persona": [...], "history": [...], "reference": [...]}
/// `id` defaults to the 1-based line number; `reference` may be a string.
TaskInstance parse_instance(std::string_view line, std::size_t line_number = 0);
std::vector<TaskInstance> load_instances(const std::filesystem::path& path);

/// A linked rule program plus the set bindings it needs.
struct RuleTemplate {
  RuleProgram program;
  std::string rule = "R";
  SetBindings sets;
  /// Words that could not be aligned to a token and were left out.
  std::vector<std::string> unaligned;

  /// Pretty-printed program.
  std::string source() const { return to_string(program); }
};

/// Replaces every quantifier whose set is bound to an empty list by the
/// constant false and relinks.
RuleProgram drop_empty_quantifiers(const RuleProgram& program, const SetBindings& sets);

/// Binds C to the aligned concepts of a lexical instance. `rules` is the
/// template text (see rules/commongen.rules). Throws Error when no concept
/// aligns.
RuleTemplate lexical_rule_template(std::span<const std::string> concepts, const FactBase& facts,
                                   std::string_view rules);

/// Binds P to keywords of the persona sentences and U to keywords of the
/// user turns of `history` (the last utterance and every second one before
/// it). Quantifiers over an empty set become false. Throws Error when P is
/// empty.
RuleTemplate dialogue_rule_template(std::span<const std::string> persona, std::span<const std::string> history,
                                    const FactBase& facts, std::string_view rules,
                                    const std::set<std::string>& stop_words = default_stop_words());

/// Lower-cased words of `sentence` split on anything but letters and digits
/// (apostrophes are dropped, so "don't" reads "dont"), without stop words
/// (checked on the word and its lemma) and words shorter than two
/// characters. Words with the same stem key keep only
/// their first occurrence.
std::vector<std::string> extract_keywords(std::string_view sentence,
                                          const std::set<std::string>& stop_words = default_stop_words());

/// User turns of a dialogue history: history[n-1], history[n-3], ...
std::vector<std::string> user_turns(std::span<const std::string> history);

/// Fraction of `concepts` having a word with the same stem key in `text`;
/// 1 when there are no concepts.
double text_coverage(std::string_view text, std::span<const std::string> concepts);

/// Mean per-instance concept coverage of `outputs`, in percent. Throws
/// DimensionError when the lists differ in length.
double corpus_coverage(std::span<const std::string> outputs, std::span<const TaskInstance> instances);

}  // namespace logicdec
