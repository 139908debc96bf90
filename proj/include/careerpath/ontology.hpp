#pragma once
// ESCO occupation/skill graph: ingestion from the official CSV export,
// validation, and skill-set queries.

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "careerpath/csv.hpp"
#include "careerpath/error.hpp"

namespace careerpath {

struct Skill {
  std::string id;
  std::string label;
};

// Skill references are indices into Ontology::skills(), kept sorted.
struct Occupation {
  std::string id;
  std::string title;
  std::string description;
  std::vector<std::size_t> essential_skills;
  std::vector<std::size_t> optional_skills;
};

enum class RelationType { kEssential, kOptional };

inline std::optional<RelationType> parse_relation_type(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "essential") return RelationType::kEssential;
  if (lower == "optional") return RelationType::kOptional;
  return std::nullopt;
}

struct OntologyDiagnostics {
  std::size_t rejected_relation_rows = 0;   // unknown relation type
  std::size_t duplicate_relation_rows = 0;  // same (occ, skill, type) repeated
  std::size_t conflicting_relations = 0;    // both essential and optional; kept essential
  std::vector<std::string> messages;        // first few, for reports
};

// Immutable after construction. Occupations and skills are stored sorted by
// id, so an occupation's index order equals ascending-URI order.
class Ontology {
 public:
  Ontology() = default;

  std::size_t occupation_count() const { return occupations_.size(); }
  std::size_t skill_count() const { return skills_.size(); }
  std::span<const Occupation> occupations() const { return occupations_; }
  std::span<const Skill> skills() const { return skills_; }
  const Occupation& occupation(std::size_t index) const { return occupations_.at(index); }
  const Skill& skill(std::size_t index) const { return skills_.at(index); }

  const std::string& version() const { return version_; }
  void set_version(std::string version) { version_ = std::move(version); }
  const OntologyDiagnostics& diagnostics() const { return diagnostics_; }

  std::optional<std::size_t> find_occupation(std::string_view id) const {
    auto it = occupation_index_.find(std::string(id));
    if (it == occupation_index_.end()) return std::nullopt;
    return it->second;
  }
  std::size_t occupation_index(std::string_view id) const {
    if (auto idx = find_occupation(id)) return *idx;
    throw UnknownIdError(std::string(id));
  }
  std::optional<std::size_t> find_skill(std::string_view id) const {
    auto it = skill_index_.find(std::string(id));
    if (it == skill_index_.end()) return std::nullopt;
    return it->second;
  }

  // Case-insensitive exact match on the preferred title.
  std::optional<std::size_t> find_occupation_by_title(std::string_view title) const {
    auto it = title_index_.find(lowercase(title));
    if (it == title_index_.end()) return std::nullopt;
    return it->second;
  }

  // S(occ): essential ∪ optional, as sorted skill indices.
  std::vector<std::size_t> skill_indices(std::size_t occ) const {
    const auto& o = occupations_.at(occ);
    std::vector<std::size_t> out;
    out.reserve(o.essential_skills.size() + o.optional_skills.size());
    std::set_union(o.essential_skills.begin(), o.essential_skills.end(),
                   o.optional_skills.begin(), o.optional_skills.end(), std::back_inserter(out));
    return out;
  }

  std::vector<std::string> skill_set(std::string_view occ_id) const {
    return to_ids(skill_indices(occupation_index(occ_id)));
  }

  // ⋃ S(occ_i) over a history's occupation labels, as sorted skill indices.
  std::vector<std::size_t> history_skill_indices(std::span<const std::size_t> occs) const {
    std::vector<std::size_t> out;
    for (std::size_t occ : occs) {
      auto skills = skill_indices(occ);
      out.insert(out.end(), skills.begin(), skills.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  std::vector<std::string> history_skill_union(std::span<const std::string> occ_ids) const {
    return to_ids(history_skill_indices(occupation_indices(occ_ids)));
  }

  std::vector<std::size_t> occupation_indices(std::span<const std::string> occ_ids) const {
    std::vector<std::size_t> idx;
    idx.reserve(occ_ids.size());
    for (const auto& id : occ_ids) idx.push_back(occupation_index(id));
    return idx;
  }

 private:
  friend class OntologyBuilder;

  static std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
  }

  std::vector<std::string> to_ids(const std::vector<std::size_t>& skill_idx) const {
    std::vector<std::string> ids;
    ids.reserve(skill_idx.size());
    for (std::size_t s : skill_idx) ids.push_back(skills_[s].id);
    return ids;
  }

  std::vector<Occupation> occupations_;
  std::vector<Skill> skills_;
  std::unordered_map<std::string, std::size_t> occupation_index_;
  std::unordered_map<std::string, std::size_t> skill_index_;
  std::unordered_map<std::string, std::size_t> title_index_;
  std::string version_ = "unspecified";
  OntologyDiagnostics diagnostics_;
};

// Collects rows in any order; build() validates and freezes.
class OntologyBuilder {
 public:
  void add_skill(std::string id, std::string label) {
    if (id.empty()) throw ValidationError("skill with empty id");
    if (!skill_ids_.emplace(id, skills_.size()).second) {
      throw ValidationError("duplicate skill id " + id);
    }
    skills_.push_back({std::move(id), std::move(label)});
  }

  void add_occupation(std::string id, std::string title, std::string description) {
    if (id.empty()) throw ValidationError("occupation with empty id");
    if (title.empty()) throw ValidationError("occupation " + id + " has an empty title");
    if (!occupation_ids_.emplace(id, occupations_.size()).second) {
      throw ValidationError("duplicate occupation id " + id);
    }
    occupations_.push_back({std::move(id), std::move(title), std::move(description), {}, {}});
  }

  void add_relation(std::string occupation_id, std::string skill_id, RelationType type) {
    relations_.push_back({std::move(occupation_id), std::move(skill_id), type});
  }

  void reject_relation(std::string message) {
    ++diagnostics_.rejected_relation_rows;
    note(std::move(message));
  }

  Ontology build() && {
    // Resolve relations against the unsorted tables first so dangling
    // references are reported with the offending ids.
    std::vector<std::vector<std::size_t>> essential(occupations_.size());
    std::vector<std::vector<std::size_t>> optional(occupations_.size());
    for (const auto& rel : relations_) {
      auto occ = occupation_ids_.find(rel.occupation);
      if (occ == occupation_ids_.end()) {
        throw ValidationError("relation references unknown occupation " + rel.occupation);
      }
      auto skill = skill_ids_.find(rel.skill);
      if (skill == skill_ids_.end()) {
        throw ValidationError("relation references unknown skill " + rel.skill +
                              " (occupation " + rel.occupation + ")");
      }
      auto& target = rel.type == RelationType::kEssential ? essential : optional;
      target[occ->second].push_back(skill->second);
    }

    // Sort both tables by id and remap indices.
    std::vector<std::size_t> skill_order(skills_.size());
    for (std::size_t i = 0; i < skill_order.size(); ++i) skill_order[i] = i;
    std::sort(skill_order.begin(), skill_order.end(),
              [&](std::size_t a, std::size_t b) { return skills_[a].id < skills_[b].id; });
    std::vector<std::size_t> skill_new_index(skills_.size());
    for (std::size_t i = 0; i < skill_order.size(); ++i) skill_new_index[skill_order[i]] = i;

    std::vector<std::size_t> occ_order(occupations_.size());
    for (std::size_t i = 0; i < occ_order.size(); ++i) occ_order[i] = i;
    std::sort(occ_order.begin(), occ_order.end(), [&](std::size_t a, std::size_t b) {
      return occupations_[a].id < occupations_[b].id;
    });

    Ontology onto;
    onto.skills_.reserve(skills_.size());
    for (std::size_t old : skill_order) onto.skills_.push_back(std::move(skills_[old]));
    onto.occupations_.reserve(occupations_.size());
    for (std::size_t old : occ_order) {
      Occupation occ = std::move(occupations_[old]);
      occ.essential_skills = remap(essential[old], skill_new_index, occ.id, RelationType::kEssential);
      occ.optional_skills = remap(optional[old], skill_new_index, occ.id, RelationType::kOptional);
      std::vector<std::size_t> disjoint;
      std::set_difference(occ.optional_skills.begin(), occ.optional_skills.end(),
                          occ.essential_skills.begin(), occ.essential_skills.end(),
                          std::back_inserter(disjoint));
      if (disjoint.size() != occ.optional_skills.size()) {
        diagnostics_.conflicting_relations += occ.optional_skills.size() - disjoint.size();
        note("occupation " + occ.id + " lists skills as both essential and optional; kept essential");
        occ.optional_skills = std::move(disjoint);
      }
      onto.occupations_.push_back(std::move(occ));
    }
    for (std::size_t i = 0; i < onto.skills_.size(); ++i) onto.skill_index_[onto.skills_[i].id] = i;
    for (std::size_t i = 0; i < onto.occupations_.size(); ++i) {
      onto.occupation_index_[onto.occupations_[i].id] = i;
      onto.title_index_.emplace(Ontology::lowercase(onto.occupations_[i].title), i);
    }
    onto.diagnostics_ = std::move(diagnostics_);
    return onto;
  }

 private:
  struct Relation {
    std::string occupation;
    std::string skill;
    RelationType type;
  };

  void note(std::string message) {
    if (diagnostics_.messages.size() < 20) diagnostics_.messages.push_back(std::move(message));
  }

  std::vector<std::size_t> remap(const std::vector<std::size_t>& old_idx,
                                 const std::vector<std::size_t>& new_index, const std::string& occ,
                                 RelationType type) {
    std::vector<std::size_t> out;
    out.reserve(old_idx.size());
    for (std::size_t s : old_idx) out.push_back(new_index[s]);
    std::sort(out.begin(), out.end());
    const auto before = out.size();
    out.erase(std::unique(out.begin(), out.end()), out.end());
    if (out.size() != before) {
      diagnostics_.duplicate_relation_rows += before - out.size();
      note("duplicate " + std::string(type == RelationType::kEssential ? "essential" : "optional") +
           " relation rows for occupation " + occ);
    }
    return out;
  }

  std::vector<Skill> skills_;
  std::vector<Occupation> occupations_;
  std::vector<Relation> relations_;
  std::unordered_map<std::string, std::size_t> skill_ids_;
  std::unordered_map<std::string, std::size_t> occupation_ids_;
  OntologyDiagnostics diagnostics_;
};

// Column names default to the ESCO export.
struct EscoColumns {
  std::string concept_uri = "conceptUri";
  std::string preferred_label = "preferredLabel";
  std::string description = "description";
  std::string occupation_uri = "occupationUri";
  std::string relation_type = "relationType";
  std::string skill_uri = "skillUri";
};

struct EscoFiles {
  std::filesystem::path occupations;
  std::filesystem::path skills;
  std::filesystem::path relations;

  // Standard English export file names inside one directory.
  static EscoFiles in_directory(const std::filesystem::path& dir) {
    return {dir / "occupations_en.csv", dir / "skills_en.csv",
            dir / "occupationSkillRelations_en.csv"};
  }
};

inline Ontology load_ontology(const EscoFiles& files, const EscoColumns& cols = {},
                              char delimiter = ',') {
  for (const auto& p : {files.occupations, files.skills, files.relations}) {
    if (!std::filesystem::exists(p)) throw ValidationError("missing file " + p.string());
  }
  OntologyBuilder builder;

  const auto skills = csv::read_file(files.skills.string(), delimiter);
  {
    const auto src = files.skills.string();
    const auto id = skills.column(cols.concept_uri, src);
    const auto label = skills.column(cols.preferred_label, src);
    for (const auto& row : skills.rows) builder.add_skill(row[id], row[label]);
  }

  const auto occs = csv::read_file(files.occupations.string(), delimiter);
  {
    const auto src = files.occupations.string();
    const auto id = occs.column(cols.concept_uri, src);
    const auto title = occs.column(cols.preferred_label, src);
    const auto desc = occs.column(cols.description, src);
    for (const auto& row : occs.rows) builder.add_occupation(row[id], row[title], row[desc]);
  }

  const auto rels = csv::read_file(files.relations.string(), delimiter);
  {
    const auto src = files.relations.string();
    const auto occ = rels.column(cols.occupation_uri, src);
    const auto type = rels.column(cols.relation_type, src);
    const auto skill = rels.column(cols.skill_uri, src);
    for (std::size_t r = 0; r < rels.rows.size(); ++r) {
      const auto& row = rels.rows[r];
      if (auto t = parse_relation_type(row[type])) {
        builder.add_relation(row[occ], row[skill], *t);
      } else {
        builder.reject_relation(src + " row " + std::to_string(r + 2) +
                                ": unknown relation type '" + row[type] + "'");
      }
    }
  }
  return std::move(builder).build();
}

inline Ontology load_ontology(const std::filesystem::path& dir, const EscoColumns& cols = {}) {
  return load_ontology(EscoFiles::in_directory(dir), cols);
}

}  // namespace careerpath
