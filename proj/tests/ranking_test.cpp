#include "careerpath/ranking.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <numeric>
#include <random>

#include "careerpath/skill_scorer.hpp"
#include "support/synthetic.hpp"

namespace cp = careerpath;
namespace fs = std::filesystem;

namespace {

const fs::path kData = CAREERPATH_TEST_DATA;
const std::string kOcc = "http://data.europa.eu/esco/occupation/";

cp::Ontology letters(std::size_t n) {
  cp::OntologyBuilder b;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string id(1, static_cast<char>('A' + i));
    b.add_occupation(id, id, "");
  }
  return std::move(b).build();
}

}  // namespace

TEST(RankOfTest, PositionsAndLinearScanOracle) {
  cp::RankedList list{{3, 0, 2, 1}};
  EXPECT_EQ(cp::rank_of(3, list), 1u);
  EXPECT_EQ(cp::rank_of(1, list), 4u);
  EXPECT_THROW(cp::rank_of(9, list), cp::ValidationError);

  cp::RankedList big;
  big.order.resize(3007);
  std::iota(big.order.begin(), big.order.end(), std::size_t{0});
  EXPECT_EQ(cp::rank_of(3006, big), 3007u);

  std::mt19937_64 rng(1);
  for (int t = 0; t < 50; ++t) {
    std::shuffle(big.order.begin(), big.order.end(), rng);
    const std::size_t label = rng() % 3007;
    std::size_t scan = 0;
    for (std::size_t i = 0; i < big.order.size(); ++i) {
      if (big.order[i] == label) scan = i + 1;
    }
    EXPECT_EQ(cp::rank_of(label, big), scan);
  }
}

TEST(EvaluateTest, HandComputedRanks) {
  const std::vector<std::size_t> ranks = {1, 2, 4, 20};
  const auto r = cp::evaluate_ranks(ranks);
  EXPECT_DOUBLE_EQ(r.mrr, 0.45);
  EXPECT_DOUBLE_EQ(r.recall_at.at(5), 0.75);
  EXPECT_DOUBLE_EQ(r.recall_at.at(10), 0.75);
  EXPECT_DOUBLE_EQ(r.recall_at.at(1), 0.25);
  const std::vector<std::size_t> ones(7, 1);
  const auto perfect = cp::evaluate_ranks(ones);
  EXPECT_DOUBLE_EQ(perfect.mrr, 1.0);
  for (const auto& [k, v] : perfect.recall_at) EXPECT_DOUBLE_EQ(v, 1.0);
  EXPECT_THROW(cp::evaluate_ranks({}), cp::ValidationError);
}

TEST(EvaluateTest, ScorerDriven) {
  const auto onto = letters(4);
  std::vector<cp::PredictionProblem> ps(3);
  ps[0].true_label = "A";
  ps[1].true_label = "C";
  ps[2].true_label = "D";
  const cp::Scorer identity = [](const cp::PredictionProblem&) { return cp::RankedList{{0, 1, 2, 3}}; };
  const auto r = cp::evaluate(ps, onto, identity, cp::default_ks(), 2);
  EXPECT_EQ(r.ranks, (std::vector<std::size_t>{1, 3, 4}));
  EXPECT_DOUBLE_EQ(r.mrr, (1.0 + 1.0 / 3 + 0.25) / 3);
  EXPECT_THROW(cp::evaluate({}, onto, identity), cp::ValidationError);
  ps[0].true_label = "Z";
  EXPECT_THROW(cp::evaluate(ps, onto, identity), cp::ValidationError);
}

// Sanity bounds on random rank multisets.
TEST(EvaluateProperty, RecallMonotoneAndMrrBounds) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::size_t> size(1, 50), rank(1, 40);
  const std::vector<int> ks = {1, 2, 5, 10, 20};
  for (int t = 0; t < 1000; ++t) {
    std::vector<std::size_t> ranks(size(rng));
    for (auto& r : ranks) r = rank(rng);
    const auto rep = cp::evaluate_ranks(ranks, ks);
    EXPECT_LE(rep.recall_at.at(5), rep.recall_at.at(10));
    EXPECT_LE(rep.mrr, 1.0);
    EXPECT_GT(rep.mrr, 0.0);
    for (int k : ks) EXPECT_GE(rep.mrr, rep.recall_at.at(k) / k - 1e-15);
  }
}

TEST(BaselineTest, MostRecentFirstThenIdOrder) {
  const auto onto = letters(3);
  const std::vector<std::string> aba = {"A", "B", "A"};
  const auto r = cp::reverse_history_rank(onto, aba);
  EXPECT_EQ(r.order, (std::vector<std::size_t>{0, 1, 2}));
  const std::vector<std::string> ab = {"A", "B"};
  EXPECT_EQ(cp::reverse_history_rank(onto, ab).order, (std::vector<std::size_t>{1, 0, 2}));
  const std::vector<std::string> a = {"A"};
  EXPECT_EQ(cp::reverse_history_rank(onto, a).order, (std::vector<std::size_t>{0, 1, 2}));
  const std::vector<std::string> bad = {"Q"};
  EXPECT_THROW(cp::reverse_history_rank(onto, bad), cp::UnknownIdError);
}

// Enumerate random histories: permutation, prefix = distinct history
// occupations, unseen labels rank past the prefix.
TEST(BaselineProperty, PrefixAndUnseenLabels) {
  const auto onto = letters(8);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> pick(0, 7), len(1, 6);
  for (int t = 0; t < 200; ++t) {
    std::vector<std::string> hist;
    for (std::size_t i = 0, n = len(rng); i < n; ++i) hist.push_back(onto.occupation(pick(rng)).id);
    const auto r = cp::reverse_history_rank(onto, hist);
    std::set<std::string> distinct(hist.begin(), hist.end());
    std::vector<std::size_t> sorted = r.order;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(sorted[i], i);
    for (std::size_t i = 0; i < distinct.size(); ++i) {
      EXPECT_TRUE(distinct.count(onto.occupation(r.order[i]).id));
    }
    EXPECT_EQ(onto.occupation(r.order[0]).id, hist.back());
    for (std::size_t label = 0; label < 8; ++label) {
      if (!distinct.count(onto.occupation(label).id)) EXPECT_GT(cp::rank_of(label, r), distinct.size());
    }
  }
}

TEST(HybridTest, HandComputedAndEndpoints) {
  const std::vector<double> skill = {0.4, 0.6}, text = {0.9, 0.1};
  const auto s = cp::hybrid_scores({0.8, false}, skill, text);
  EXPECT_NEAR(s[0], 0.80, 1e-12);
  EXPECT_NEAR(s[1], 0.20, 1e-12);
  EXPECT_EQ(cp::hybrid_rank({0.8, false}, skill, text).order, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(cp::hybrid_rank({0.0, false}, skill, text), cp::rank_by_scores(skill));
  EXPECT_EQ(cp::hybrid_rank({1.0, false}, skill, text), cp::rank_by_scores(text));
  EXPECT_THROW(cp::hybrid_rank({1.5, false}, skill, text), cp::ValidationError);
  const std::vector<double> short_text = {0.1};
  EXPECT_THROW(cp::hybrid_rank({0.5, false}, skill, short_text), cp::ValidationError);
}

TEST(HybridTest, MapVariantRequiresFullCoverage) {
  const auto onto = letters(2);
  std::map<std::string, double> skill = {{"A", 0.4}, {"B", 0.6}}, text = {{"A", 0.9}, {"B", 0.1}};
  EXPECT_EQ(cp::hybrid_rank(onto, {0.8, false}, skill, text).order, (std::vector<std::size_t>{0, 1}));
  text.erase("B");
  EXPECT_THROW(cp::hybrid_rank(onto, {0.8, false}, skill, text), cp::ValidationError);
  text["C"] = 0.0;
  EXPECT_THROW(cp::hybrid_rank(onto, {0.8, false}, skill, text), cp::ValidationError);
}

TEST(HybridTest, NormalizationFlag) {
  const std::vector<double> skill = {0.0, 0.5, 1.0}, text = {-1.0, 0.0, 1.0};
  const auto s = cp::hybrid_scores({0.5, true}, skill, text);
  EXPECT_DOUBLE_EQ(s[0], 0.0);
  EXPECT_DOUBLE_EQ(s[1], 0.5);
  EXPECT_DOUBLE_EQ(s[2], 1.0);
}

// For two candidates the score difference is affine in alpha; the analytic
// crossing point predicts where the pair flips in a fine sweep.
TEST(HybridProperty, AnalyticCrossingPoints) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unit(0.0, 1.0), signed_unit(-1.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const std::vector<double> skill = {unit(rng), unit(rng)};
    const std::vector<double> text = {signed_unit(rng), signed_unit(rng)};
    // diff(α) = (s0 − s1) + α·((t0 − s0) − (t1 − s1))
    const double c0 = skill[0] - skill[1];
    const double slope = (text[0] - skill[0]) - (text[1] - skill[1]);
    const double cross = slope != 0.0 ? -c0 / slope : -1.0;
    const std::size_t start_winner = c0 > 0 ? 0u : 1u;
    for (int i = 0; i <= 1000; ++i) {
      const double alpha = i / 1000.0;
      if (std::abs(alpha - cross) < 1e-6 || std::abs(c0) < 1e-9) continue;
      const bool flipped = cross > 0.0 && cross <= 1.0 && alpha > cross;
      const auto order = cp::hybrid_rank({alpha, false}, skill, text).order;
      EXPECT_EQ(order[0], flipped ? 1u - start_winner : start_winner)
          << "alpha=" << alpha << " cross=" << cross;
    }
  }
}

TEST(GridSearchTest, AlphaGrid) {
  EXPECT_EQ(cp::alpha_grid(0.1).size(), 11u);
  EXPECT_EQ(cp::alpha_grid(0.1).back(), 1.0);
  EXPECT_EQ(cp::alpha_grid(1.0), (std::vector<double>{0.0, 1.0}));
  const auto g = cp::alpha_grid(0.3);
  EXPECT_EQ(g.size(), 5u);
  EXPECT_DOUBLE_EQ(g[3], 0.9);
  EXPECT_EQ(g.back(), 1.0);
  EXPECT_THROW(cp::alpha_grid(0.0), cp::ValidationError);
  EXPECT_THROW(cp::alpha_grid(1.5), cp::ValidationError);
}

// Text scorer ranks the answer first by a thin margin, skill scorer is random
// noise: any weight on skill lets noise through, so α = 1 wins. The endpoints
// reproduce the single-method reports.
TEST(GridSearchTest, PerfectTextBeatsRandomSkill) {
  const auto onto = letters(20);
  std::mt19937_64 rng(5);
  std::vector<cp::PredictionProblem> ps(40);
  for (auto& p : ps) p.true_label = onto.occupation(rng() % 20).id;
  auto noise_for = [](const cp::PredictionProblem& p) {
    std::mt19937_64 local(std::hash<std::string>{}(p.true_label) ^ p.prefix.size());
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> s(20);
    for (auto& x : s) x = u(local);
    return s;
  };
  const cp::ScoreFn skill = noise_for;
  const cp::ScoreFn text = [&](const cp::PredictionProblem& p) {
    std::vector<double> s = noise_for(p);
    for (auto& x : s) x = 0.95 + 0.04 * x;
    s[onto.occupation_index(p.true_label)] = 1.0;
    return s;
  };
  const auto result = cp::grid_search_alpha(ps, onto, skill, text, 0.1, cp::default_ks(), 3);
  EXPECT_EQ(result.curve.size(), 11u);
  EXPECT_EQ(result.best_alpha, 1.0);
  const auto skill_only = cp::evaluate(ps, onto, [&](const auto& p) { return cp::rank_by_scores(skill(p)); });
  const auto text_only = cp::evaluate(ps, onto, [&](const auto& p) { return cp::rank_by_scores(text(p)); });
  EXPECT_TRUE(result.curve.front().report.same_metrics(skill_only));
  EXPECT_TRUE(result.curve.back().report.same_metrics(text_only));
  EXPECT_EQ(result.curve.front().report.ranks, skill_only.ranks);
  EXPECT_DOUBLE_EQ(result.curve.back().report.mrr, 1.0);
}

TEST(GridSearchTest, TiesPreferSmallerAlpha) {
  const auto onto = letters(3);
  std::vector<cp::PredictionProblem> ps(2);
  ps[0].true_label = "A";
  ps[1].true_label = "A";
  const cp::ScoreFn both = [](const cp::PredictionProblem&) { return std::vector<double>{1.0, 0.0, 0.0}; };
  const auto r = cp::grid_search_alpha(ps, onto, both, both, 0.25);
  EXPECT_EQ(r.best_alpha, 0.0);
}

TEST(ReportTest, JsonShape) {
  const std::vector<std::size_t> ranks = {1, 3};
  auto r = cp::evaluate_ranks(ranks);
  r.config = {{"method", "skill"}};
  const auto j = cp::to_json(r);
  EXPECT_DOUBLE_EQ(j["mrr"].get<double>(), (1.0 + 1.0 / 3) / 2);
  EXPECT_DOUBLE_EQ(j["recall_at"]["5"].get<double>(), 1.0);
  EXPECT_EQ(j["config"]["method"], "skill");
}
