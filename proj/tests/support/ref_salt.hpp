#pragma once
// Re-translation of a SALT sentence from its tagged form, vocabulary and
// rule names.

#include <cctype>
#include <string>
#include <vector>

#include <json.hpp>

namespace ref {

struct Tok {
  std::string w;
  std::string tag;
  bool subject;
};

inline std::vector<Tok> apply(std::vector<Tok> s, const std::string& rule) {
  auto swap_pairs = [&](const std::string& a, const std::string& b) {
    for (std::size_t i = 0; i + 1 < s.size(); ++i)
      if (s[i].tag == a && s[i + 1].tag == b) {
        std::swap(s[i].w, s[i + 1].w);
        std::swap(s[i].tag, s[i + 1].tag);
        ++i;
      }
  };
  auto twice = [&](const std::string& tag) {
    std::vector<Tok> out;
    for (const auto& t : s) {
      out.push_back(t);
      if (t.tag == tag) out.push_back(t);
    }
    s = out;
  };
  if (rule == "noun_adjective_inversion") swap_pairs("adjective", "noun");
  else if (rule == "verb_adverb_inversion") swap_pairs("verb", "adverb");
  else if (rule == "noun_repetition") twice("noun");
  else if (rule == "verb_repetition") twice("verb");
  else if (rule == "adjective_repetition") twice("adjective");
  else if (rule == "predicate_subject_inversion") {
    std::vector<Tok> subj, pred;
    for (const auto& t : s) (t.subject ? subj : pred).push_back(t);
    s.clear();
    for (auto t : pred) {
      t.subject = true;
      s.push_back(t);
    }
    for (auto t : subj) {
      t.subject = false;
      s.push_back(t);
    }
  }
  return s;
}

// sentence: {"words", "tags", "subject_len", "punct"}; vocab: word -> token.
inline std::string retranslate(const nlohmann::json& sentence, const nlohmann::json& vocab,
                               const std::vector<std::string>& rules) {
  std::vector<Tok> s;
  const auto n_subj = sentence.at("subject_len").get<std::size_t>();
  for (std::size_t i = 0; i < sentence.at("words").size(); ++i) {
    std::string w = sentence["words"][i].get<std::string>();
    for (auto& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    std::string key = vocab.contains(w) ? w : sentence["words"][i].get<std::string>();
    s.push_back({vocab.at(key).get<std::string>(), sentence["tags"][i].get<std::string>(), i < n_subj});
  }
  for (const auto& r : rules) s = apply(s, r);
  std::string out;
  for (const auto& t : s) out += (out.empty() ? "" : " ") + t.w;
  return out + sentence.at("punct").get<std::string>();
}

}  // namespace ref
