#include "careerpath/skill_scorer.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <random>
#include <set>

#include "support/synthetic.hpp"

namespace cp = careerpath;
namespace fs = std::filesystem;

namespace {

const fs::path kData = CAREERPATH_TEST_DATA;
const std::string kOcc = "http://data.europa.eu/esco/occupation/";

// Oracle: per-candidate std::set intersection, ordering by exact rational
// comparison (cross-multiplication) with empty-skill candidates at 0.
std::vector<std::string> oracle_ranking(const cp::testing::ToyOntology& toy,
                                        const std::vector<std::size_t>& history) {
  std::set<std::size_t> owned;
  for (std::size_t o : history) {
    for (std::size_t s : toy.skills_of(o)) owned.insert(s);
  }
  struct Entry {
    std::string id;
    std::size_t num, den;
  };
  std::vector<Entry> entries;
  for (std::size_t o = 0; o < toy.occupations; ++o) {
    const auto sk = toy.skills_of(o);
    std::size_t hit = 0;
    for (std::size_t s : sk) hit += owned.count(s);
    entries.push_back({cp::testing::occupation_uri(o), hit, sk.empty() ? 1 : sk.size()});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    const auto l = a.num * b.den, r = b.num * a.den;
    return l != r ? l > r : a.id < b.id;
  });
  std::vector<std::string> out;
  for (const auto& e : entries) out.push_back(e.id);
  return out;
}

std::vector<std::string> ids(const cp::Ontology& onto, const cp::RankedList& list) {
  std::vector<std::string> out;
  for (std::size_t i : list.order) out.push_back(onto.occupation(i).id);
  return out;
}

}  // namespace

TEST(SkillScoreTest, HandComputedHalf) {
  // S(A) = {s1,s2,s3}, S(B) = {s2,s3,s4,s5}: |{s2,s3}| / 4 = 0.5
  cp::OntologyBuilder b;
  for (const char* s : {"s1", "s2", "s3", "s4", "s5"}) b.add_skill(s, s);
  b.add_occupation("A", "a", "");
  b.add_occupation("B", "b", "");
  for (const char* s : {"s1", "s2", "s3"}) b.add_relation("A", s, cp::RelationType::kEssential);
  for (const char* s : {"s2", "s3"}) b.add_relation("B", s, cp::RelationType::kEssential);
  for (const char* s : {"s4", "s5"}) b.add_relation("B", s, cp::RelationType::kOptional);
  const auto onto = std::move(b).build();
  const std::vector<std::string> hist = {"A"};
  EXPECT_DOUBLE_EQ(cp::skill_match_score(onto, hist, "B"), 0.5);
  EXPECT_DOUBLE_EQ(cp::skill_match_score(onto, hist, "A"), 1.0);
}

TEST(SkillScoreTest, FixtureCases) {
  const auto onto = cp::load_ontology(kData / "esco");
  const std::vector<std::string> chef = {kOcc + "chef"};
  EXPECT_DOUBLE_EQ(cp::skill_match_score(onto, chef, kOcc + "chef"), 1.0);
  EXPECT_DOUBLE_EQ(cp::skill_match_score(onto, chef, kOcc + "data-scientist"), 0.0);
  EXPECT_DOUBLE_EQ(cp::skill_match_score(onto, chef, kOcc + "intern"), 0.0);
  // accountant {bookkeeping,tax,excel} vs finance manager {bookkeeping,reporting,leadership,tax}
  const std::vector<std::string> acc = {kOcc + "accountant"};
  EXPECT_DOUBLE_EQ(cp::skill_match_score(onto, acc, kOcc + "finance-manager"), 0.5);
  EXPECT_THROW(cp::skill_match_score(onto, acc, kOcc + "pilot"), cp::UnknownIdError);
  const std::vector<std::string> bad = {"nope"};
  EXPECT_THROW(cp::rank_by_skill(onto, bad), cp::UnknownIdError);
}

TEST(SkillRankTest, FullCoverageOrdersByIdAndEmptyLast) {
  const auto onto = cp::load_ontology(kData / "esco");
  std::vector<std::string> everything;
  for (const auto& o : onto.occupations()) everything.push_back(o.id);
  const auto ranked = ids(onto, cp::rank_by_skill(onto, everything));
  ASSERT_EQ(ranked.size(), 6u);
  EXPECT_EQ(ranked.back(), kOcc + "intern");
  EXPECT_TRUE(std::is_sorted(ranked.begin(), ranked.end() - 1));
}

TEST(SkillRankTest, EmptySkillCandidateNeverOutranksPositive) {
  const auto onto = cp::load_ontology(kData / "esco");
  const std::vector<std::string> hist = {kOcc + "accountant"};
  const cp::SkillScorer scorer(onto);
  const auto scores = scorer.score_all(hist);
  const auto list = scorer.rank(hist);
  const auto intern = onto.occupation_index(kOcc + "intern");
  const auto pos = cp::rank_of(intern, list);
  for (std::size_t r = pos; r < list.size(); ++r) EXPECT_LE(scores[list.order[r]], 0.0);
}

// Random toy ontologies: ranking equals the brute-force oracle, is a
// permutation, is insensitive to order/duplicates and is monotone under
// history extension.
TEST(SkillRankProperty, OracleEquivalenceAndInvariants) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    std::uniform_int_distribution<std::size_t> occ_count(1, 20), skill_count(1, 40);
    const auto toy = cp::testing::random_toy_ontology(rng, occ_count(rng), skill_count(rng));
    const auto onto = toy.build();
    const cp::SkillScorer scorer(onto);
    std::uniform_int_distribution<std::size_t> pick(0, toy.occupations - 1), len(1, 5);
    std::vector<std::size_t> hist;
    for (std::size_t i = 0, n = len(rng); i < n; ++i) hist.push_back(pick(rng));
    std::vector<std::string> hist_ids;
    for (std::size_t o : hist) hist_ids.push_back(cp::testing::occupation_uri(o));

    const auto list = scorer.rank(hist_ids);
    EXPECT_EQ(ids(onto, list), oracle_ranking(toy, hist));
    std::vector<std::size_t> sorted = list.order;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::size_t> iota(onto.occupation_count());
    std::iota(iota.begin(), iota.end(), std::size_t{0});
    EXPECT_EQ(sorted, iota);

    auto shuffled = hist_ids;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    shuffled.push_back(shuffled.front());
    EXPECT_EQ(scorer.score_all(shuffled), scorer.score_all(hist_ids));

    auto extended = hist_ids;
    extended.push_back(cp::testing::occupation_uri(pick(rng)));
    const auto before = scorer.score_all(hist_ids);
    const auto after = scorer.score_all(extended);
    for (std::size_t c = 0; c < before.size(); ++c) {
      EXPECT_GE(after[c], before[c]);
      EXPECT_GE(before[c], 0.0);
      EXPECT_LE(before[c], 1.0);
      EXPECT_DOUBLE_EQ(before[c], scorer.score(hist_ids, onto.occupation(c).id));
    }
  }
}
