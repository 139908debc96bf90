#pragma once
// Career-history corpus: record parsing, industry-stratified splits,
// prediction-problem and span expansion, corpus statistics.

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "careerpath/error.hpp"
#include "careerpath/ontology.hpp"

namespace careerpath {

struct Experience {
  std::string title;
  std::string description;
  std::optional<std::string> start;
  std::optional<std::string> end;
  std::string esco_label;  // occupation URI

  bool operator==(const Experience&) const = default;
};

struct CareerHistory {
  std::string id;
  std::string industry;
  std::vector<Experience> experiences;  // oldest first

  std::size_t size() const { return experiences.size(); }
  bool operator==(const CareerHistory&) const = default;
};

struct PredictionProblem {
  std::string history_id;
  std::vector<Experience> prefix;
  std::string true_label;
};

// Half-open [begin, end) range of experience positions.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t length() const { return end - begin; }
  bool operator==(const Span&) const = default;
};

inline constexpr std::array<std::string_view, 24> kIndustries = {
    "FINANCE",      "SALES",    "ACCOUNTANT",       "BUSINESS-DEVELOPMENT", "ADVOCATE",
    "CHEF",         "CONSULTANT", "FITNESS",        "IT",                   "PUBLIC-RELATIONS",
    "BANKING",      "HR",       "HEALTHCARE",       "ENGINEERING",          "ARTS",
    "AVIATION",     "TEACHER",  "DESIGNER",         "CONSTRUCTION",         "APPAREL",
    "DIGITAL-MEDIA", "AGRICULTURE", "AUTOMOBILE",   "BPO"};

// Canonical industry name (case-insensitive; the resume corpus's
// INFORMATION-TECHNOLOGY category is the IT industry).
inline std::optional<std::string> canonical_industry(std::string_view name) {
  std::string upper;
  for (char c : name) {
    if (c == ' ' || c == '_') c = '-';
    upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  if (upper == "INFORMATION-TECHNOLOGY") upper = "IT";
  for (auto ind : kIndustries) {
    if (upper == ind) return std::string(ind);
  }
  return std::nullopt;
}

namespace detail {

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::optional<int> month_from_name(std::string_view s) {
  static const std::array<std::string_view, 12> names = {
      "jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec"};
  const auto l = lower(s);
  if (l.size() < 3) return std::nullopt;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (l.compare(0, 3, names[i]) == 0) return static_cast<int>(i + 1);
  }
  return std::nullopt;
}

}  // namespace detail

// Sort key year*12 + (month-1) for the date spellings found in resumes:
// "2015", "03/2015", "3/2015", "03/21/2015", "2015-03", "2015-03-21",
// "March 2015", "Mar 2015". Returns nullopt for anything else
// (including "current").
inline std::optional<int> parse_date_key(std::string_view raw) {
  const std::string s = detail::trim(raw);
  if (s.empty()) return std::nullopt;
  auto valid = [](int y, int m) -> std::optional<int> {
    if (y < 1900 || y > 2100 || m < 1 || m > 12) return std::nullopt;
    return y * 12 + (m - 1);
  };
  static const std::regex year_only(R"(^(\d{4})$)");
  static const std::regex slash(R"(^(\d{1,2})/(\d{4})$)");
  static const std::regex slash3(R"(^(\d{1,2})/(\d{1,2})/(\d{4})$)");
  static const std::regex iso(R"(^(\d{4})-(\d{1,2})(-\d{1,2})?$)");
  static const std::regex named(R"(^([A-Za-z]+)\.?,?\s+(\d{4})$)");
  std::smatch m;
  if (std::regex_match(s, m, year_only)) return valid(std::stoi(m[1]), 1);
  if (std::regex_match(s, m, slash)) return valid(std::stoi(m[2]), std::stoi(m[1]));
  if (std::regex_match(s, m, slash3)) return valid(std::stoi(m[3]), std::stoi(m[1]));
  if (std::regex_match(s, m, iso)) return valid(std::stoi(m[1]), std::stoi(m[2]));
  if (std::regex_match(s, m, named)) {
    if (auto month = detail::month_from_name(m[1].str())) return valid(std::stoi(m[2]), *month);
  }
  return std::nullopt;
}

// Stable sort by start date when every start parses; file order otherwise.
inline void order_chronologically(std::vector<Experience>& exps) {
  std::vector<int> keys;
  keys.reserve(exps.size());
  for (const auto& e : exps) {
    if (!e.start) return;
    auto k = parse_date_key(*e.start);
    if (!k) return;
    keys.push_back(*k);
  }
  std::vector<std::size_t> order(exps.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  std::vector<Experience> sorted;
  sorted.reserve(exps.size());
  for (std::size_t i : order) sorted.push_back(std::move(exps[i]));
  exps = std::move(sorted);
}

// --- canonical JSON form -------------------------------------------------

inline nlohmann::json to_json(const Experience& e) {
  nlohmann::json j = {{"title", e.title}, {"description", e.description}};
  j["start"] = e.start ? nlohmann::json(*e.start) : nlohmann::json(nullptr);
  j["end"] = e.end ? nlohmann::json(*e.end) : nlohmann::json(nullptr);
  j["esco_label"] = e.esco_label;
  return j;
}

inline nlohmann::json to_json(const CareerHistory& h) {
  nlohmann::json exps = nlohmann::json::array();
  for (const auto& e : h.experiences) exps.push_back(to_json(e));
  return {{"id", h.id}, {"industry", h.industry}, {"experiences", std::move(exps)}};
}

inline void write_histories(const std::string& path, std::span<const CareerHistory> histories) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  for (const auto& h : histories) out << to_json(h).dump() << '\n';
}

// --- ingestion ------------------------------------------------------------

struct ParseReport {
  std::size_t records = 0;
  std::size_t skipped_short = 0;  // fewer than two experiences
  std::size_t reordered = 0;      // histories whose order changed by date sort
  std::size_t labels_by_title = 0;
  std::vector<std::string> skipped_ids;
};

namespace detail {

inline std::string string_field(const nlohmann::json& obj, std::initializer_list<const char*> keys) {
  for (const char* k : keys) {
    auto it = obj.find(k);
    if (it == obj.end() || it->is_null()) continue;
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number_integer()) return std::to_string(it->get<long long>());
    return it->dump();
  }
  return {};
}

inline std::optional<std::string> optional_field(const nlohmann::json& obj,
                                                 std::initializer_list<const char*> keys) {
  for (const char* k : keys) {
    auto it = obj.find(k);
    if (it == obj.end() || it->is_null()) continue;
    if (it->is_string()) {
      auto s = trim(it->get<std::string>());
      if (s.empty()) return std::nullopt;
      return s;
    }
    return it->dump();
  }
  return std::nullopt;
}

using Keys = std::initializer_list<const char*>;
inline constexpr Keys kTitleKeys = {"title", "role", "Title"};
inline constexpr Keys kDescriptionKeys = {"description", "Description"};
inline constexpr Keys kStartKeys = {"start", "start_date", "Start"};
inline constexpr Keys kEndKeys = {"end", "end_date", "End"};
// URI columns first; title columns are resolved through the ontology.
inline constexpr Keys kLabelKeys = {"esco_label", "ESCO_uri", "esco_uri",   "ESCO_URI",
                                    "occupation_uri", "ESCO_label", "esco_title", "ESCO_title"};

inline Experience experience_from_object(const nlohmann::json& obj) {
  Experience e;
  e.title = trim(string_field(obj, kTitleKeys));
  e.description = trim(string_field(obj, kDescriptionKeys));
  e.start = optional_field(obj, kStartKeys);
  e.end = optional_field(obj, kEndKeys);
  e.esco_label = trim(string_field(obj, kLabelKeys));
  return e;
}

// Flat layout: one column per field and position, "title_0", "ESCO_uri_0", ...
inline std::vector<Experience> experiences_from_flat(const nlohmann::json& rec) {
  static const std::regex indexed(R"(^(.+)_(\d+)$)");
  std::map<int, nlohmann::json> by_index;
  for (auto it = rec.begin(); it != rec.end(); ++it) {
    std::smatch m;
    const std::string key = it.key();
    if (std::regex_match(key, m, indexed)) by_index[std::stoi(m[2])][m[1].str()] = it.value();
  }
  std::vector<Experience> out;
  for (const auto& [idx, obj] : by_index) {
    Experience e = experience_from_object(obj);
    if (e.title.empty() && e.description.empty() && e.esco_label.empty()) continue;
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace detail

// Maps one JSON record (canonical nested form or flat indexed columns)
// onto a CareerHistory. Labels are resolved against the ontology when given.
inline CareerHistory history_from_json(const nlohmann::json& rec, std::size_t line,
                                       const Ontology* ontology = nullptr,
                                       ParseReport* report = nullptr) {
  if (!rec.is_object()) {
    throw ValidationError("record at line " + std::to_string(line) + " is not a JSON object");
  }
  CareerHistory h;
  h.id = detail::string_field(rec, {"id", "_id", "ID", "history_id"});
  if (h.id.empty()) h.id = "line-" + std::to_string(line);
  const auto where = "record " + h.id + " (line " + std::to_string(line) + ")";

  const auto industry = detail::string_field(rec, {"industry", "category", "Category", "Industry"});
  auto canon = canonical_industry(industry);
  if (!canon) throw ValidationError(where + ": unknown industry '" + industry + "'");
  h.industry = *canon;

  if (auto it = rec.find("experiences"); it != rec.end()) {
    if (!it->is_array()) throw ValidationError(where + ": 'experiences' is not an array");
    for (const auto& e : *it) {
      if (!e.is_object()) throw ValidationError(where + ": experience is not an object");
      h.experiences.push_back(detail::experience_from_object(e));
    }
  } else {
    h.experiences = detail::experiences_from_flat(rec);
  }

  for (std::size_t i = 0; i < h.experiences.size(); ++i) {
    auto& e = h.experiences[i];
    const auto at = where + " experience " + std::to_string(i);
    if (e.title.empty() && e.description.empty()) {
      throw ValidationError(at + ": title and description both empty");
    }
    if (e.esco_label.empty()) throw ValidationError(at + ": missing ESCO label");
    if (ontology) {
      if (!ontology->find_occupation(e.esco_label)) {
        if (auto by_title = ontology->find_occupation_by_title(e.esco_label)) {
          e.esco_label = ontology->occupation(*by_title).id;
          if (report) ++report->labels_by_title;
        } else {
          throw ValidationError(at + ": ESCO label '" + e.esco_label +
                                "' not in ontology snapshot '" + ontology->version() + "' (" +
                                std::to_string(ontology->occupation_count()) + " occupations)");
        }
      }
    }
  }
  const auto before = h.experiences;
  order_chronologically(h.experiences);
  if (report && before != h.experiences) ++report->reordered;
  return h;
}

// Newline-delimited JSON; histories with fewer than two experiences are
// skipped and listed in the report.
inline std::vector<CareerHistory> parse_dataset_text(std::string_view text,
                                                     const Ontology* ontology = nullptr,
                                                     ParseReport* report = nullptr) {
  ParseReport local;
  ParseReport& rep = report ? *report : local;
  std::vector<CareerHistory> out;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (detail::trim(line).empty()) {
      if (nl == text.size()) break;
      continue;
    }
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError("malformed JSON at line " + std::to_string(line_no) + ": " + e.what());
    }
    ++rep.records;
    CareerHistory h = history_from_json(rec, line_no, ontology, &rep);
    if (!seen.insert(h.id).second) throw ValidationError("duplicate history id " + h.id);
    if (h.size() < 2) {
      ++rep.skipped_short;
      rep.skipped_ids.push_back(h.id);
      continue;
    }
    out.push_back(std::move(h));
    if (nl == text.size()) break;
  }
  return out;
}

inline std::vector<CareerHistory> parse_dataset(const std::string& path,
                                                const Ontology* ontology = nullptr,
                                                ParseReport* report = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open dataset " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return parse_dataset_text(text, ontology, report);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

inline std::size_t total_experiences(std::span<const CareerHistory> histories) {
  std::size_t n = 0;
  for (const auto& h : histories) n += h.size();
  return n;
}

// --- splitting -------------------------------------------------------------

struct SplitSpec {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
  std::uint64_t seed = 42;
};

struct Splits {
  std::vector<CareerHistory> train;
  std::vector<CareerHistory> validation;
  std::vector<CareerHistory> test;
};

// Largest-remainder apportionment of n items over the given ratios; ties in
// the remainder go to the earlier subset.
inline std::array<std::size_t, 3> apportion(std::size_t n, const std::array<double, 3>& ratios) {
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double exact = static_cast<double>(n) * ratios[i];
    counts[i] = static_cast<std::size_t>(exact + 1e-9);
    remainder[i] = exact - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  std::array<std::size_t, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b] + 1e-12; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++counts[order[k % 3]];
  return counts;
}

namespace detail {

// Fisher-Yates with an explicit bounded draw, so the permutation is identical
// across standard library implementations.
inline void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::uint64_t bound = i;
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    std::uint64_t r;
    do r = rng(); while (r >= limit);
    std::swap(v[i - 1], v[r % bound]);
  }
}

}  // namespace detail

// Industry-stratified split. Strata are processed in sorted industry order,
// each shuffled with the seeded generator and cut by largest remainder.
inline Splits stratified_split(std::span<const CareerHistory> histories, const SplitSpec& spec) {
  const std::array<double, 3> ratios = {spec.train, spec.validation, spec.test};
  for (double r : ratios) {
    if (!(r > 0.0 && r < 1.0)) throw ValidationError("split ratios must lie in (0,1)");
  }
  if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9) {
    throw ValidationError("split ratios must sum to 1");
  }
  std::map<std::string, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < histories.size(); ++i) strata[histories[i].industry].push_back(i);

  std::mt19937_64 rng(spec.seed);
  Splits out;
  for (auto& [industry, members] : strata) {
    detail::shuffle(members, rng);
    const auto counts = apportion(members.size(), ratios);
    std::size_t k = 0;
    for (std::size_t j = 0; j < counts[0]; ++j) out.train.push_back(histories[members[k++]]);
    for (std::size_t j = 0; j < counts[1]; ++j) out.validation.push_back(histories[members[k++]]);
    for (std::size_t j = 0; j < counts[2]; ++j) out.test.push_back(histories[members[k++]]);
  }
  return out;
}

inline nlohmann::json split_manifest(const Splits& s, const SplitSpec& spec) {
  auto ids = [](const std::vector<CareerHistory>& hs) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& h : hs) a.push_back(h.id);
    return a;
  };
  return {{"seed", spec.seed},
          {"ratios", {spec.train, spec.validation, spec.test}},
          {"train", ids(s.train)},
          {"validation", ids(s.validation)},
          {"test", ids(s.test)}};
}

// --- expansion ---------------------------------------------------------------

// Prefix lengths 1..N-1 per history; Σ(N_h − 1) problems in total.
inline std::vector<PredictionProblem> expand_prediction_problems(
    std::span<const CareerHistory> histories) {
  std::vector<PredictionProblem> out;
  for (const auto& h : histories) {
    for (std::size_t i = 1; i < h.size(); ++i) {
      PredictionProblem p;
      p.history_id = h.id;
      p.prefix.assign(h.experiences.begin(), h.experiences.begin() + static_cast<std::ptrdiff_t>(i));
      p.true_label = h.experiences[i].esco_label;
      out.push_back(std::move(p));
    }
  }
  return out;
}

// All contiguous spans, ordered by start then length: N(N+1)/2 of them.
inline std::vector<Span> expand_spans(std::size_t n) {
  std::vector<Span> spans;
  spans.reserve(n * (n + 1) / 2);
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t e = b + 1; e <= n; ++e) spans.push_back({b, e});
  }
  return spans;
}

inline std::vector<Span> expand_spans(const CareerHistory& h) { return expand_spans(h.size()); }

inline std::span<const Experience> span_of(const CareerHistory& h, Span s) {
  return std::span<const Experience>(h.experiences).subspan(s.begin, s.length());
}

// --- statistics ----------------------------------------------------------------

struct IndustryStats {
  std::string industry;
  std::size_t count = 0;
  double average_roles = 0.0;
};

struct OccupationFrequency {
  std::string occupation;
  std::size_t count = 0;
};

struct DatasetStats {
  std::size_t histories = 0;
  std::size_t experiences = 0;
  std::vector<IndustryStats> industries;            // count desc, then name
  std::map<std::size_t, std::size_t> length_histogram;
  std::vector<OccupationFrequency> occupation_frequency;  // count desc, then id

  // Fraction of experiences labelled with one of the k most frequent occupations.
  double top_k_coverage(std::size_t k) const {
    if (experiences == 0) return 0.0;
    std::size_t covered = 0;
    for (std::size_t i = 0; i < std::min(k, occupation_frequency.size()); ++i) {
      covered += occupation_frequency[i].count;
    }
    return static_cast<double>(covered) / static_cast<double>(experiences);
  }

  // Fraction of ontology occupations that never occur as a label.
  double unseen_fraction(std::size_t ontology_size) const {
    if (ontology_size == 0) return 0.0;
    return 1.0 - static_cast<double>(occupation_frequency.size()) /
                     static_cast<double>(ontology_size);
  }
};

inline DatasetStats dataset_stats(std::span<const CareerHistory> histories) {
  DatasetStats st;
  st.histories = histories.size();
  std::map<std::string, std::pair<std::size_t, std::size_t>> per_industry;
  std::unordered_map<std::string, std::size_t> freq;
  for (const auto& h : histories) {
    st.experiences += h.size();
    auto& [count, roles] = per_industry[h.industry];
    ++count;
    roles += h.size();
    ++st.length_histogram[h.size()];
    for (const auto& e : h.experiences) ++freq[e.esco_label];
  }
  for (const auto& [name, cr] : per_industry) {
    st.industries.push_back(
        {name, cr.first, static_cast<double>(cr.second) / static_cast<double>(cr.first)});
  }
  std::stable_sort(st.industries.begin(), st.industries.end(),
                   [](const auto& a, const auto& b) { return a.count > b.count; });
  for (auto& [occ, n] : freq) st.occupation_frequency.push_back({occ, n});
  std::sort(st.occupation_frequency.begin(), st.occupation_frequency.end(),
            [](const auto& a, const auto& b) {
              return a.count != b.count ? a.count > b.count : a.occupation < b.occupation;
            });
  return st;
}

inline nlohmann::json to_json(const DatasetStats& st, std::size_t ontology_size = 0) {
  nlohmann::json ind = nlohmann::json::array();
  for (const auto& i : st.industries) {
    ind.push_back({{"industry", i.industry}, {"count", i.count}, {"average_roles", i.average_roles}});
  }
  nlohmann::json hist = nlohmann::json::object();
  for (const auto& [len, n] : st.length_histogram) hist[std::to_string(len)] = n;
  nlohmann::json freq = nlohmann::json::array();
  for (const auto& f : st.occupation_frequency) {
    freq.push_back({{"occupation", f.occupation}, {"count", f.count}});
  }
  nlohmann::json j = {{"histories", st.histories},
                      {"experiences", st.experiences},
                      {"industries", std::move(ind)},
                      {"length_histogram", std::move(hist)},
                      {"distinct_occupations", st.occupation_frequency.size()},
                      {"top300_coverage", st.top_k_coverage(300)},
                      {"occupation_frequency", std::move(freq)}};
  if (ontology_size > 0) {
    j["ontology_occupations"] = ontology_size;
    j["unseen_occupation_fraction"] = st.unseen_fraction(ontology_size);
  }
  return j;
}

}  // namespace careerpath
