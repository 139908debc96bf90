#pragma once
// Skill-match score: the fraction of a candidate occupation's skills that
// are covered by the union of the skills of the history's occupations.

#include <span>
#include <string>
#include <vector>

#include "careerpath/ontology.hpp"
#include "careerpath/ranking.hpp"

namespace careerpath {

class SkillScorer {
 public:
  explicit SkillScorer(const Ontology& onto) : onto_(&onto) {
    skills_.reserve(onto.occupation_count());
    for (std::size_t i = 0; i < onto.occupation_count(); ++i) skills_.push_back(onto.skill_indices(i));
  }

  // Scores for every occupation in index order. Candidates with no linked
  // skills score 0. Counts stay integral until the single division.
  std::vector<double> score_all(std::span<const std::size_t> history_occs) const {
    std::vector<char> owned(onto_->skill_count(), 0);
    for (std::size_t occ : history_occs) {
      for (std::size_t s : skills_.at(occ)) owned[s] = 1;
    }
    std::vector<double> scores(skills_.size(), 0.0);
    for (std::size_t c = 0; c < skills_.size(); ++c) {
      const auto& cand = skills_[c];
      if (cand.empty()) continue;
      std::size_t covered = 0;
      for (std::size_t s : cand) covered += owned[s];
      scores[c] = static_cast<double>(covered) / static_cast<double>(cand.size());
    }
    return scores;
  }

  std::vector<double> score_all(std::span<const std::string> history_ids) const {
    return score_all(onto_->occupation_indices(history_ids));
  }

  double score(std::span<const std::string> history_ids, std::string_view candidate) const {
    const auto cand = onto_->occupation_index(candidate);
    const auto& skills = skills_[cand];
    if (skills.empty()) return 0.0;
    const auto owned = onto_->history_skill_indices(onto_->occupation_indices(history_ids));
    std::size_t covered = 0;
    for (std::size_t s : skills) covered += std::binary_search(owned.begin(), owned.end(), s);
    return static_cast<double>(covered) / static_cast<double>(skills.size());
  }

  RankedList rank(std::span<const std::string> history_ids) const {
    return rank_by_scores(score_all(history_ids));
  }

  const Ontology& ontology() const { return *onto_; }

 private:
  const Ontology* onto_;
  std::vector<std::vector<std::size_t>> skills_;
};

inline double skill_match_score(const Ontology& onto, std::span<const std::string> history_occs,
                                std::string_view candidate) {
  return SkillScorer(onto).score(history_occs, candidate);
}

inline RankedList rank_by_skill(const Ontology& onto, std::span<const std::string> history_occs) {
  return SkillScorer(onto).rank(history_occs);
}

}  // namespace careerpath
