#pragma once

// Verb inflection for grounding-caption templates: present participle
// ("-ing") and past participle ("-ed") by rule, with an exception table for
// irregular forms. The shipped table covers common interaction verbs and can
// be extended from a JSON file.

#include <string>
#include <unordered_map>

#include <json.hpp>

#include "weakhoi/common.hpp"

namespace weakhoi {

using json = nlohmann::json;

struct IrregularForms {
  std::string ing;
  std::string ed;
};

class InflectionTable {
 public:
  InflectionTable() : irregular_(defaults()) {}

  static const std::unordered_map<std::string, IrregularForms>& defaults() {
    static const std::unordered_map<std::string, IrregularForms> m = {
        {"ride", {"riding", "ridden"}},   {"eat", {"eating", "eaten"}},
        {"sit", {"sitting", "sat"}},      {"hit", {"hitting", "hit"}},
        {"cut", {"cutting", "cut"}},      {"hold", {"holding", "held"}},
        {"throw", {"throwing", "thrown"}},{"catch", {"catching", "caught"}},
        {"drive", {"driving", "driven"}}, {"fly", {"flying", "flown"}},
        {"drink", {"drinking", "drunk"}}, {"wear", {"wearing", "worn"}},
        {"read", {"reading", "read"}},    {"lie", {"lying", "lain"}},
        {"lay", {"laying", "laid"}},      {"run", {"running", "run"}},
        {"swing", {"swinging", "swung"}}, {"stand", {"standing", "stood"}},
        {"make", {"making", "made"}},     {"take", {"taking", "taken"}},
        {"give", {"giving", "given"}},    {"buy", {"buying", "bought"}},
        {"teach", {"teaching", "taught"}},{"feed", {"feeding", "fed"}},
        {"blow", {"blowing", "blown"}},   {"know", {"knowing", "known"}},
        {"break", {"breaking", "broken"}},{"speak", {"speaking", "spoken"}},
        {"write", {"writing", "written"}},{"draw", {"drawing", "drawn"}},
        {"hear", {"hearing", "heard"}},   {"see", {"seeing", "seen"}},
        {"win", {"winning", "won"}},      {"swim", {"swimming", "swum"}},
    };
    return m;
  }

  // Merge irregular forms from a JSON object {"verb": {"ing":..., "ed":...}}.
  static InflectionTable load(const fs::path& path) {
    InflectionTable t;
    json j;
    try {
      j = json::parse(read_file(path));
    } catch (const json::exception& e) {
      fail(path.string() + ": not valid JSON: " + e.what());
    }
    if (!j.is_object()) fail(path.string() + ": irregular verb file must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
      const json& forms = it.value();
      if (!forms.is_object() || !forms.contains("ing") || !forms.contains("ed"))
        fail(path.string() + ": entry '" + it.key() + "' must have 'ing' and 'ed' forms");
      t.irregular_[lower_ascii(it.key())] = {forms["ing"].get<std::string>(),
                                             forms["ed"].get<std::string>()};
    }
    return t;
  }

  std::string ing(const std::string& verb) const {
    if (auto it = irregular_.find(verb); it != irregular_.end()) return it->second.ing;
    return rule_ing(verb);
  }

  std::string ed(const std::string& verb) const {
    if (auto it = irregular_.find(verb); it != irregular_.end()) return it->second.ed;
    return rule_ed(verb);
  }

 private:
  static bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

  // CVC with a final consonant other than w/x/y doubles before a vowel suffix.
  static bool doubles_final(const std::string& v) {
    if (v.size() < 3) return false;
    char a = v[v.size() - 3], b = v[v.size() - 2], c = v[v.size() - 1];
    return !is_vowel(a) && is_vowel(b) && !is_vowel(c) && c != 'w' && c != 'x' && c != 'y';
  }

  static std::string rule_ing(const std::string& v) {
    if (v.size() >= 2 && v.ends_with("ie")) return v.substr(0, v.size() - 2) + "ying";
    if (v.size() >= 2 && v.back() == 'e' && !v.ends_with("ee") && !v.ends_with("oe") &&
        !v.ends_with("ye"))
      return v.substr(0, v.size() - 1) + "ing";
    if (doubles_final(v)) return v + v.back() + "ing";
    return v + "ing";
  }

  static std::string rule_ed(const std::string& v) {
    if (v.size() >= 2 && v.back() == 'y' && !is_vowel(v[v.size() - 2]))
      return v.substr(0, v.size() - 1) + "ied";
    if (!v.empty() && v.back() == 'e') return v + "d";
    if (doubles_final(v)) return v + v.back() + "ed";
    return v + "ed";
  }

  std::unordered_map<std::string, IrregularForms> irregular_;
};

}  // namespace weakhoi
