#pragma once

#include <string>
#include <string_view>

namespace logicdec {

/// Porter (1980) suffix-stripping stemmer applied to a lower-cased word.
/// Non-alphabetic input is returned lower-cased and otherwise unchanged.
std::string porter_stem(std::string_view word);

/// Stem key used for Equal facts: a small irregular-form table maps strong
/// verb forms and irregular plurals to their base ("ran" -> "run",
/// "children" -> "child") before Porter stemming.
std::string stem_key(std::string_view word);

/// Dictionary form used by preprocessing: irregular-form table, then plural
/// and verbal suffix rules that keep the result a readable word.
std::string lemmatize(std::string_view word);

std::string to_lower(std::string_view s);

}  // namespace logicdec
