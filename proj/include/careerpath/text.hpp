#pragma once
// Document templates for experiences and ESCO occupations, and contrastive
// (doc1, doc2) pair generation under the FULL / LAST / ALL strategies.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "careerpath/dataset.hpp"
#include "careerpath/error.hpp"
#include "careerpath/ontology.hpp"

namespace careerpath {

inline constexpr std::string_view kExperiencePrefix = "role: ";
inline constexpr std::string_view kOccupationPrefix = "esco role: ";
inline constexpr std::string_view kDescriptionLine = "\ndescription: ";
inline constexpr std::string_view kDefaultSeparator = "\n[SEP]\n";

struct Document {
  std::string text;
  bool operator==(const Document&) const = default;
};

inline Document make_document(std::string_view prefix, std::string_view title,
                              std::string_view description) {
  std::string text;
  text.reserve(prefix.size() + title.size() + kDescriptionLine.size() + description.size());
  text.append(prefix).append(title).append(kDescriptionLine).append(description);
  return {std::move(text)};
}

inline Document format_experience_doc(const Experience& ex) {
  return make_document(kExperiencePrefix, ex.title, ex.description);
}

inline Document format_occupation_doc(const Occupation& occ) {
  return make_document(kOccupationPrefix, occ.title, occ.description);
}

struct ParsedDocument {
  bool esco = false;
  std::string title;
  std::string description;
};

// Inverse of the two formatters for a single (non-concatenated) document.
// The description runs to the end of the text and may itself contain newlines.
inline std::optional<ParsedDocument> parse_document(std::string_view text) {
  ParsedDocument out;
  if (text.starts_with(kOccupationPrefix)) {
    out.esco = true;
    text.remove_prefix(kOccupationPrefix.size());
  } else if (text.starts_with(kExperiencePrefix)) {
    text.remove_prefix(kExperiencePrefix.size());
  } else {
    return std::nullopt;
  }
  const auto pos = text.find(kDescriptionLine);
  if (pos == std::string_view::npos) return std::nullopt;
  out.title = std::string(text.substr(0, pos));
  out.description = std::string(text.substr(pos + kDescriptionLine.size()));
  return out;
}

// concat(T_1, ..., T_N): documents oldest first, N-1 separators.
inline Document concat_docs(std::span<const Document> docs,
                            std::string_view separator = kDefaultSeparator) {
  if (docs.empty()) throw ValidationError("concat_docs: empty document sequence");
  std::string text = docs.front().text;
  for (std::size_t i = 1; i < docs.size(); ++i) text.append(separator).append(docs[i].text);
  return {std::move(text)};
}

inline Document history_document(std::span<const Experience> exps,
                                 std::string_view separator = kDefaultSeparator) {
  std::vector<Document> docs;
  docs.reserve(exps.size());
  for (const auto& e : exps) docs.push_back(format_experience_doc(e));
  return concat_docs(docs, separator);
}

inline Document occupation_document(const Ontology& onto, std::string_view occ_id) {
  return format_occupation_doc(onto.occupation(onto.occupation_index(occ_id)));
}

enum class PairStrategy { kFull, kLast, kAll };

inline std::string_view to_string(PairStrategy s) {
  switch (s) {
    case PairStrategy::kFull: return "full";
    case PairStrategy::kLast: return "last";
    case PairStrategy::kAll: return "all";
  }
  return "?";
}

inline std::optional<PairStrategy> parse_strategy(std::string_view s) {
  if (s == "full" || s == "FULL") return PairStrategy::kFull;
  if (s == "last" || s == "LAST") return PairStrategy::kLast;
  if (s == "all" || s == "ALL") return PairStrategy::kAll;
  return std::nullopt;
}

struct TrainingPair {
  Document doc1;  // self-reported side
  Document doc2;  // ESCO side
  std::string history_id;
  Span span;
  PairStrategy strategy = PairStrategy::kAll;
};

inline nlohmann::json to_json(const TrainingPair& p) {
  return {{"doc1", p.doc1.text},
          {"doc2", p.doc2.text},
          {"history_id", p.history_id},
          {"span", {p.span.begin, p.span.end}},
          {"strategy", std::string(to_string(p.strategy))}};
}

struct PairOptions {
  PairStrategy strategy = PairStrategy::kAll;
  bool expand_spans = true;
  std::string separator = std::string(kDefaultSeparator);
};

// One trajectory per span (or the whole history when expansion is off).
// FULL and LAST yield one pair per trajectory, ALL one per position.
inline std::vector<TrainingPair> generate_pairs(std::span<const CareerHistory> histories,
                                                const Ontology& onto, const PairOptions& opt = {}) {
  std::vector<TrainingPair> pairs;
  for (const auto& h : histories) {
    std::vector<Document> self_docs, esco_docs;
    self_docs.reserve(h.size());
    esco_docs.reserve(h.size());
    for (const auto& e : h.experiences) {
      self_docs.push_back(format_experience_doc(e));
      esco_docs.push_back(occupation_document(onto, e.esco_label));
    }
    const auto spans = opt.expand_spans ? expand_spans(h) : std::vector<Span>{{0, h.size()}};
    for (const Span s : spans) {
      const auto self = std::span<const Document>(self_docs).subspan(s.begin, s.length());
      const auto esco = std::span<const Document>(esco_docs).subspan(s.begin, s.length());
      Document doc1 = concat_docs(self, opt.separator);
      switch (opt.strategy) {
        case PairStrategy::kFull:
          pairs.push_back({doc1, concat_docs(esco, opt.separator), h.id, s, opt.strategy});
          break;
        case PairStrategy::kLast:
          pairs.push_back({doc1, esco.back(), h.id, s, opt.strategy});
          break;
        case PairStrategy::kAll:
          for (const auto& d : esco) pairs.push_back({doc1, d, h.id, s, opt.strategy});
          break;
      }
    }
  }
  return pairs;
}

}  // namespace careerpath
