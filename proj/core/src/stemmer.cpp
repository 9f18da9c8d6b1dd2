#include "logicdec/stemmer.hpp"

#include <algorithm>
#include <cctype>
#include <string>
#include <unordered_map>

namespace logicdec {

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

namespace {

// Direct transcription of the reference algorithm's steps 1a..5b, operating on
// b[0..k] with j marking the end of the stem candidate.
class Porter {
 public:
  explicit Porter(std::string word) : b_(std::move(word)) {}

  std::string run() {
    if (b_.size() <= 2) return b_;
    k_ = static_cast<int>(b_.size()) - 1;
    step1ab();
    if (k_ > 0) {
      step1c();
      step2();
      step3();
      step4();
      step5();
    }
    return b_.substr(0, static_cast<std::size_t>(k_) + 1);
  }

 private:
  bool cons(int i) const {
    switch (b_[static_cast<std::size_t>(i)]) {
      case 'a':
      case 'e':
      case 'i':
      case 'o':
      case 'u':
        return false;
      case 'y':
        return i == 0 ? true : !cons(i - 1);
      default:
        return true;
    }
  }

  // Number of VC sequences in b[0..j].
  int m() const {
    int n = 0;
    int i = 0;
    for (;;) {
      if (i > j_) return n;
      if (!cons(i)) break;
      ++i;
    }
    ++i;
    for (;;) {
      for (;;) {
        if (i > j_) return n;
        if (cons(i)) break;
        ++i;
      }
      ++i;
      ++n;
      for (;;) {
        if (i > j_) return n;
        if (!cons(i)) break;
        ++i;
      }
      ++i;
    }
  }

  bool vowel_in_stem() const {
    for (int i = 0; i <= j_; ++i) {
      if (!cons(i)) return true;
    }
    return false;
  }

  bool double_c(int j) const {
    if (j < 1) return false;
    if (b_[static_cast<std::size_t>(j)] != b_[static_cast<std::size_t>(j - 1)]) return false;
    return cons(j);
  }

  // cvc(i) is true when i-2,i-1,i is consonant-vowel-consonant and the
  // final consonant is not w, x or y.
  bool cvc(int i) const {
    if (i < 2 || !cons(i) || cons(i - 1) || !cons(i - 2)) return false;
    const char ch = b_[static_cast<std::size_t>(i)];
    return !(ch == 'w' || ch == 'x' || ch == 'y');
  }

  bool ends(std::string_view s) {
    const int len = static_cast<int>(s.size());
    if (len > k_ + 1) return false;
    if (b_.compare(static_cast<std::size_t>(k_ - len + 1), s.size(), s) != 0) return false;
    j_ = k_ - len;
    return true;
  }

  void set_to(std::string_view s) {
    b_.replace(static_cast<std::size_t>(j_ + 1), static_cast<std::size_t>(k_ - j_), s);
    k_ = j_ + static_cast<int>(s.size());
  }

  void r(std::string_view s) {
    if (m() > 0) set_to(s);
  }

  void step1ab() {
    if (b_[static_cast<std::size_t>(k_)] == 's') {
      if (ends("sses")) {
        k_ -= 2;
      } else if (ends("ies")) {
        set_to("i");
      } else if (b_[static_cast<std::size_t>(k_ - 1)] != 's') {
        --k_;
      }
    }
    if (ends("eed")) {
      if (m() > 0) --k_;
    } else if ((ends("ed") || ends("ing")) && vowel_in_stem()) {
      k_ = j_;
      if (ends("at")) {
        set_to("ate");
      } else if (ends("bl")) {
        set_to("ble");
      } else if (ends("iz")) {
        set_to("ize");
      } else if (double_c(k_)) {
        --k_;
        const char ch = b_[static_cast<std::size_t>(k_)];
        if (ch == 'l' || ch == 's' || ch == 'z') ++k_;
      } else if (m() == 1 && cvc(k_)) {
        set_to("e");
      }
    }
    b_.resize(static_cast<std::size_t>(k_) + 1);
  }

  void step1c() {
    if (ends("y") && vowel_in_stem()) b_[static_cast<std::size_t>(k_)] = 'i';
  }

  void step2() {
    if (k_ < 1) return;
    switch (b_[static_cast<std::size_t>(k_ - 1)]) {
      case 'a':
        if (ends("ational")) { r("ate"); break; }
        if (ends("tional")) { r("tion"); break; }
        break;
      case 'c':
        if (ends("enci")) { r("ence"); break; }
        if (ends("anci")) { r("ance"); break; }
        break;
      case 'e':
        if (ends("izer")) { r("ize"); break; }
        break;
      case 'l':
        if (ends("bli")) { r("ble"); break; }
        if (ends("alli")) { r("al"); break; }
        if (ends("entli")) { r("ent"); break; }
        if (ends("eli")) { r("e"); break; }
        if (ends("ousli")) { r("ous"); break; }
        break;
      case 'o':
        if (ends("ization")) { r("ize"); break; }
        if (ends("ation")) { r("ate"); break; }
        if (ends("ator")) { r("ate"); break; }
        break;
      case 's':
        if (ends("alism")) { r("al"); break; }
        if (ends("iveness")) { r("ive"); break; }
        if (ends("fulness")) { r("ful"); break; }
        if (ends("ousness")) { r("ous"); break; }
        break;
      case 't':
        if (ends("aliti")) { r("al"); break; }
        if (ends("iviti")) { r("ive"); break; }
        if (ends("biliti")) { r("ble"); break; }
        break;
      case 'g':
        if (ends("logi")) { r("log"); break; }
        break;
      default:
        break;
    }
  }

  void step3() {
    switch (b_[static_cast<std::size_t>(k_)]) {
      case 'e':
        if (ends("icate")) { r("ic"); break; }
        if (ends("ative")) { r(""); break; }
        if (ends("alize")) { r("al"); break; }
        break;
      case 'i':
        if (ends("iciti")) { r("ic"); break; }
        break;
      case 'l':
        if (ends("ical")) { r("ic"); break; }
        if (ends("ful")) { r(""); break; }
        break;
      case 's':
        if (ends("ness")) { r(""); break; }
        break;
      default:
        break;
    }
  }

  void step4() {
    if (k_ < 1) return;
    switch (b_[static_cast<std::size_t>(k_ - 1)]) {
      case 'a':
        if (ends("al")) break;
        return;
      case 'c':
        if (ends("ance")) break;
        if (ends("ence")) break;
        return;
      case 'e':
        if (ends("er")) break;
        return;
      case 'i':
        if (ends("ic")) break;
        return;
      case 'l':
        if (ends("able")) break;
        if (ends("ible")) break;
        return;
      case 'n':
        if (ends("ant")) break;
        if (ends("ement")) break;
        if (ends("ment")) break;
        if (ends("ent")) break;
        return;
      case 'o':
        if (ends("ion") && j_ >= 0 &&
            (b_[static_cast<std::size_t>(j_)] == 's' || b_[static_cast<std::size_t>(j_)] == 't')) {
          break;
        }
        if (ends("ou")) break;
        return;
      case 's':
        if (ends("ism")) break;
        return;
      case 't':
        if (ends("ate")) break;
        if (ends("iti")) break;
        return;
      case 'u':
        if (ends("ous")) break;
        return;
      case 'v':
        if (ends("ive")) break;
        return;
      case 'z':
        if (ends("ize")) break;
        return;
      default:
        return;
    }
    if (m() > 1) k_ = j_;
  }

  void step5() {
    j_ = k_;
    if (b_[static_cast<std::size_t>(k_)] == 'e') {
      const int a = m();
      if (a > 1 || (a == 1 && !cvc(k_ - 1))) --k_;
    }
    if (b_[static_cast<std::size_t>(k_)] == 'l' && double_c(k_) && m() > 1) --k_;
  }

  std::string b_;
  int k_ = 0;
  int j_ = 0;
};

const std::unordered_map<std::string, std::string>& irregular_forms() {
  static const std::unordered_map<std::string, std::string> table{
      {"ran", "run"},       {"went", "go"},         {"gone", "go"},         {"goes", "go"},
      {"was", "be"},        {"were", "be"},         {"been", "be"},         {"is", "be"},
      {"are", "be"},        {"am", "be"},           {"had", "have"},        {"has", "have"},
      {"did", "do"},        {"done", "do"},         {"does", "do"},         {"made", "make"},
      {"ate", "eat"},       {"eaten", "eat"},       {"saw", "see"},         {"seen", "see"},
      {"took", "take"},     {"taken", "take"},      {"gave", "give"},       {"given", "give"},
      {"came", "come"},     {"got", "get"},         {"gotten", "get"},      {"sat", "sit"},
      {"stood", "stand"},   {"wrote", "write"},     {"written", "write"},   {"drove", "drive"},
      {"driven", "drive"},  {"rode", "ride"},       {"ridden", "ride"},     {"swam", "swim"},
      {"swum", "swim"},     {"sang", "sing"},       {"sung", "sing"},       {"threw", "throw"},
      {"thrown", "throw"},  {"caught", "catch"},    {"taught", "teach"},    {"bought", "buy"},
      {"brought", "bring"}, {"thought", "think"},   {"fought", "fight"},    {"flew", "fly"},
      {"flown", "fly"},     {"grew", "grow"},       {"grown", "grow"},      {"knew", "know"},
      {"known", "know"},    {"drew", "draw"},       {"drawn", "draw"},      {"fell", "fall"},
      {"fallen", "fall"},   {"held", "hold"},       {"kept", "keep"},       {"left", "leave"},
      {"lost", "lose"},     {"met", "meet"},        {"paid", "pay"},        {"said", "say"},
      {"sold", "sell"},     {"sent", "send"},       {"slept", "sleep"},     {"spoke", "speak"},
      {"spoken", "speak"},  {"told", "tell"},       {"won", "win"},         {"wore", "wear"},
      {"worn", "wear"},     {"began", "begin"},     {"begun", "begin"},     {"broke", "break"},
      {"broken", "break"},  {"chose", "choose"},    {"chosen", "choose"},   {"found", "find"},
      {"heard", "hear"},    {"led", "lead"},        {"read", "read"},       {"built", "build"},
      {"felt", "feel"},     {"fed", "feed"},        {"hid", "hide"},        {"hidden", "hide"},
      {"children", "child"}, {"men", "man"},        {"women", "woman"},     {"people", "person"},
      {"mice", "mouse"},    {"feet", "foot"},       {"teeth", "tooth"},     {"geese", "goose"},
      {"oxen", "ox"},       {"leaves", "leaf"},     {"knives", "knife"},    {"wives", "wife"},
      {"lives", "life"},    {"wolves", "wolf"},     {"better", "good"},     {"best", "good"},
      {"worse", "bad"},     {"worst", "bad"},
  };
  return table;
}

bool all_alpha(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isalpha(c) != 0; });
}

}  // namespace

std::string porter_stem(std::string_view word) {
  std::string lower = to_lower(word);
  if (!all_alpha(lower)) return lower;
  return Porter(std::move(lower)).run();
}

std::string stem_key(std::string_view word) {
  std::string lower = to_lower(word);
  auto it = irregular_forms().find(lower);
  if (it != irregular_forms().end()) lower = it->second;
  return porter_stem(lower);
}

std::string lemmatize(std::string_view word) {
  std::string w = to_lower(word);
  auto it = irregular_forms().find(w);
  if (it != irregular_forms().end()) return it->second;
  if (!all_alpha(w) || w.size() <= 3) return w;
  auto ends_with = [&](std::string_view suffix) {
    return w.size() > suffix.size() && w.compare(w.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  if (ends_with("ies") && w.size() > 4) return w.substr(0, w.size() - 3) + "y";
  if (ends_with("sses") || ends_with("shes") || ends_with("ches") || ends_with("xes")) {
    return w.substr(0, w.size() - 2);
  }
  if (ends_with("s") && !ends_with("ss") && !ends_with("us") && !ends_with("is")) {
    return w.substr(0, w.size() - 1);
  }
  return w;
}

}  // namespace logicdec
