#pragma once
// Ranking and offline evaluation: full-permutation rankings with a fixed
// tie-break, MRR / recall@k, the reversed-history baseline, the hybrid
// combiner and the alpha grid search.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "careerpath/dataset.hpp"
#include "careerpath/error.hpp"
#include "careerpath/ontology.hpp"
#include "careerpath/parallel.hpp"

namespace careerpath {

// Occupation indices, best first. Index order equals ascending URI order.
struct RankedList {
  std::vector<std::size_t> order;

  std::size_t size() const { return order.size(); }
  bool operator==(const RankedList&) const = default;
};

// Descending score; equal scores fall back to ascending occupation index.
inline RankedList rank_by_scores(std::span<const double> scores) {
  RankedList list;
  list.order.resize(scores.size());
  std::iota(list.order.begin(), list.order.end(), std::size_t{0});
  std::stable_sort(list.order.begin(), list.order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return list;
}

// 1-based position of the label.
inline std::size_t rank_of(std::size_t label, const RankedList& ranking) {
  auto it = std::find(ranking.order.begin(), ranking.order.end(), label);
  if (it == ranking.order.end()) {
    throw ValidationError("true label absent from ranking (ontology/dataset mismatch)");
  }
  return static_cast<std::size_t>(it - ranking.order.begin()) + 1;
}

inline std::size_t rank_of(const Ontology& onto, std::string_view label, const RankedList& ranking) {
  const auto idx = onto.find_occupation(label);
  if (!idx) throw ValidationError("true label " + std::string(label) + " absent from ontology");
  return rank_of(*idx, ranking);
}

struct EvalReport {
  double mrr = 0.0;
  std::map<int, double> recall_at;
  std::size_t n_problems = 0;
  std::vector<std::size_t> ranks;  // per problem, input order
  nlohmann::json config = nlohmann::json::object();

  bool same_metrics(const EvalReport& o) const {
    return mrr == o.mrr && recall_at == o.recall_at && n_problems == o.n_problems;
  }
};

inline const std::vector<int>& default_ks() {
  static const std::vector<int> ks = {1, 5, 10};
  return ks;
}

inline EvalReport evaluate_ranks(std::span<const std::size_t> ranks,
                                 std::span<const int> ks = default_ks()) {
  if (ranks.empty()) throw ValidationError("evaluate: empty problem set");
  EvalReport r;
  r.n_problems = ranks.size();
  r.ranks.assign(ranks.begin(), ranks.end());
  double rr = 0.0;
  for (std::size_t rank : ranks) {
    if (rank == 0) throw ValidationError("ranks are 1-based");
    rr += 1.0 / static_cast<double>(rank);
  }
  r.mrr = rr / static_cast<double>(ranks.size());
  for (int k : ks) {
    if (k <= 0) throw ValidationError("recall cutoff k must be positive");
    const auto hits = std::count_if(ranks.begin(), ranks.end(),
                                    [k](std::size_t rank) { return rank <= static_cast<std::size_t>(k); });
    r.recall_at[k] = static_cast<double>(hits) / static_cast<double>(ranks.size());
  }
  return r;
}

using Scorer = std::function<RankedList(const PredictionProblem&)>;

// Ranks are computed in parallel; aggregation runs in problem order.
inline EvalReport evaluate(std::span<const PredictionProblem> problems, const Ontology& onto,
                           const Scorer& scorer, std::span<const int> ks = default_ks(),
                           std::size_t threads = 1) {
  if (problems.empty()) throw ValidationError("evaluate: empty problem set");
  std::vector<std::size_t> ranks(problems.size());
  parallel_for(problems.size(), threads, [&](std::size_t i) {
    ranks[i] = rank_of(onto, problems[i].true_label, scorer(problems[i]));
  });
  return evaluate_ranks(ranks, ks);
}

inline nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json recall = nlohmann::json::object();
  for (const auto& [k, v] : r.recall_at) recall[std::to_string(k)] = v;
  return {{"mrr", r.mrr}, {"recall_at", recall}, {"n_problems", r.n_problems}, {"config", r.config}};
}

// --- reversed-history baseline ----------------------------------------------

// Distinct history occupations, most recent first, then every other
// occupation in ascending id order.
inline RankedList reverse_history_rank(const Ontology& onto, std::span<const std::string> history_occs) {
  const auto idx = onto.occupation_indices(history_occs);
  std::vector<char> placed(onto.occupation_count(), 0);
  RankedList list;
  list.order.reserve(onto.occupation_count());
  for (auto it = idx.rbegin(); it != idx.rend(); ++it) {
    if (!placed[*it]) {
      placed[*it] = 1;
      list.order.push_back(*it);
    }
  }
  for (std::size_t i = 0; i < onto.occupation_count(); ++i) {
    if (!placed[i]) list.order.push_back(i);
  }
  return list;
}

inline std::vector<std::string> history_labels(std::span<const Experience> prefix) {
  std::vector<std::string> out;
  out.reserve(prefix.size());
  for (const auto& e : prefix) out.push_back(e.esco_label);
  return out;
}

// --- hybrid -------------------------------------------------------------------

struct HybridConfig {
  double alpha = 0.8;
  bool normalize = false;  // per-problem min-max scaling of both score vectors

  void validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("alpha must lie in [0,1]");
  }
};

namespace detail {

inline std::vector<double> min_max(std::span<const double> s) {
  std::vector<double> out(s.begin(), s.end());
  if (out.empty()) return out;
  const auto [lo, hi] = std::minmax_element(out.begin(), out.end());
  const double l = *lo, range = *hi - *lo;
  for (double& x : out) x = range > 0.0 ? (x - l) / range : 0.0;
  return out;
}

}  // namespace detail

// α·S_TEXT + (1−α)·S_SKILL, element-wise over the candidate set.
inline std::vector<double> hybrid_scores(const HybridConfig& cfg, std::span<const double> skill,
                                         std::span<const double> text) {
  cfg.validate();
  if (skill.size() != text.size()) {
    throw ValidationError("hybrid: skill and text scores cover different candidate sets");
  }
  std::vector<double> s(skill.begin(), skill.end()), t(text.begin(), text.end());
  if (cfg.normalize) {
    s = detail::min_max(skill);
    t = detail::min_max(text);
  }
  std::vector<double> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = cfg.alpha * t[i] + (1.0 - cfg.alpha) * s[i];
  return out;
}

inline RankedList hybrid_rank(const HybridConfig& cfg, std::span<const double> skill,
                              std::span<const double> text) {
  return rank_by_scores(hybrid_scores(cfg, skill, text));
}

// Map-keyed variant: both maps must cover the same occupation ids.
inline RankedList hybrid_rank(const Ontology& onto, const HybridConfig& cfg,
                              const std::map<std::string, double>& skill,
                              const std::map<std::string, double>& text) {
  if (skill.size() != onto.occupation_count() || text.size() != onto.occupation_count()) {
    throw ValidationError("hybrid: score maps must cover every ontology occupation");
  }
  std::vector<double> s(onto.occupation_count()), t(onto.occupation_count());
  for (std::size_t i = 0; i < onto.occupation_count(); ++i) {
    const auto& id = onto.occupation(i).id;
    auto si = skill.find(id);
    auto ti = text.find(id);
    if (si == skill.end() || ti == text.end()) {
      throw ValidationError("hybrid: candidate " + id + " missing from a score map");
    }
    s[i] = si->second;
    t[i] = ti->second;
  }
  return hybrid_rank(cfg, s, t);
}

// --- alpha grid search ----------------------------------------------------------

// Dense per-candidate scores for one problem (index order = ontology order).
using ScoreFn = std::function<std::vector<double>(const PredictionProblem&)>;

struct GridPoint {
  double alpha = 0.0;
  EvalReport report;
};

struct GridSearchResult {
  double best_alpha = 0.0;
  std::vector<GridPoint> curve;
};

// {0, step, 2·step, ...} capped at 1, always ending at exactly 1.
inline std::vector<double> alpha_grid(double step) {
  if (!(step > 0.0 && step <= 1.0)) throw ValidationError("grid step must lie in (0,1]");
  std::vector<double> alphas;
  const auto n = static_cast<std::size_t>(std::floor(1.0 / step + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) alphas.push_back(std::min(1.0, static_cast<double>(i) * step));
  if (std::abs(alphas.back() - 1.0) < 1e-9) {
    alphas.back() = 1.0;
  } else {
    alphas.push_back(1.0);
  }
  return alphas;
}

// Best by MRR; ties broken by higher recall at the largest k, then smaller alpha.
inline GridSearchResult grid_search_alpha(std::span<const PredictionProblem> problems,
                                          const Ontology& onto, const ScoreFn& skill_scores,
                                          const ScoreFn& text_scores, double step,
                                          std::span<const int> ks = default_ks(),
                                          std::size_t threads = 1, bool normalize = false) {
  if (problems.empty()) throw ValidationError("grid search: empty problem set");
  const auto alphas = alpha_grid(step);
  std::vector<std::vector<double>> skill(problems.size()), text(problems.size());
  std::vector<std::size_t> labels(problems.size());
  parallel_for(problems.size(), threads, [&](std::size_t i) {
    skill[i] = skill_scores(problems[i]);
    text[i] = text_scores(problems[i]);
    const auto idx = onto.find_occupation(problems[i].true_label);
    if (!idx) throw ValidationError("true label absent from ontology: " + problems[i].true_label);
    labels[i] = *idx;
  });

  GridSearchResult result;
  result.curve.resize(alphas.size());
  parallel_for(alphas.size(), threads, [&](std::size_t a) {
    const HybridConfig cfg{alphas[a], normalize};
    std::vector<std::size_t> ranks(problems.size());
    for (std::size_t i = 0; i < problems.size(); ++i) {
      ranks[i] = rank_of(labels[i], hybrid_rank(cfg, skill[i], text[i]));
    }
    result.curve[a] = {alphas[a], evaluate_ranks(ranks, ks)};
  });

  const int kmax = ks.empty() ? 0 : *std::max_element(ks.begin(), ks.end());
  std::size_t best = 0;
  for (std::size_t a = 1; a < result.curve.size(); ++a) {
    const auto& cand = result.curve[a].report;
    const auto& cur = result.curve[best].report;
    if (cand.mrr > cur.mrr) {
      best = a;
    } else if (cand.mrr == cur.mrr && kmax > 0 && cand.recall_at.at(kmax) > cur.recall_at.at(kmax)) {
      best = a;
    }
  }
  result.best_alpha = result.curve[best].alpha;
  return result;
}

}  // namespace careerpath
