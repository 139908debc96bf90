#pragma once
// Linear map from history embeddings to next-occupation embeddings, fitted
// by (optionally ridge-regularized) least squares, and the cosine text score
// built on top of it.

#include <cmath>
#include <fstream>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <json.hpp>

#include "careerpath/dataset.hpp"
#include "careerpath/embedding.hpp"
#include "careerpath/error.hpp"
#include "careerpath/ontology.hpp"
#include "careerpath/parallel.hpp"
#include "careerpath/ranking.hpp"
#include "careerpath/text.hpp"

namespace careerpath {

struct RegressionSet {
  Eigen::MatrixXd inputs;   // n × d_in, one history embedding per row
  Eigen::MatrixXd targets;  // n × d_out, embedding of the next occupation

  std::size_t rows() const { return static_cast<std::size_t>(inputs.rows()); }
};

namespace detail {

inline Eigen::VectorXd to_eigen(const EmbeddingVector& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline void l2_normalize(Eigen::VectorXd& v) {
  const double n = v.norm();
  if (n > 0.0) v /= n;
}

}  // namespace detail

struct RegressionOptions {
  bool normalize_embeddings = false;
  std::size_t threads = 1;
};

// Row i: embed(concat of prefix docs) → embed(ESCO doc of the true label).
inline RegressionSet build_regression_set(std::span<const PredictionProblem> problems,
                                          const Ontology& onto, const EmbeddingProvider& provider,
                                          const RegressionOptions& opt = {}) {
  if (problems.empty()) throw ValidationError("regression set needs at least one problem");
  const auto d = static_cast<Eigen::Index>(provider.dimension());
  const auto n = static_cast<Eigen::Index>(problems.size());
  RegressionSet set{Eigen::MatrixXd(n, d), Eigen::MatrixXd(n, d)};
  const auto sep = provider.separator();
  parallel_for(problems.size(), opt.threads, [&](std::size_t i) {
    Eigen::VectorXd x = detail::to_eigen(provider.embed(history_document(problems[i].prefix, sep)));
    Eigen::VectorXd y = detail::to_eigen(provider.embed(occupation_document(onto, problems[i].true_label)));
    if (opt.normalize_embeddings) {
      detail::l2_normalize(x);
      detail::l2_normalize(y);
    }
    set.inputs.row(static_cast<Eigen::Index>(i)) = x.transpose();
    set.targets.row(static_cast<Eigen::Index>(i)) = y.transpose();
  });
  return set;
}

struct ProjectionMatrix {
  Eigen::MatrixXd weights;                  // d_in × d_out; output = weightsᵀ·v + intercept
  std::optional<Eigen::VectorXd> intercept;  // d_out
  std::string provider_name;
  std::string trained_on;

  std::size_t d_in() const { return static_cast<std::size_t>(weights.rows()); }
  std::size_t d_out() const { return static_cast<std::size_t>(weights.cols()); }

  static ProjectionMatrix identity(std::size_t d) {
    const auto n = static_cast<Eigen::Index>(d);
    return {Eigen::MatrixXd::Identity(n, n), std::nullopt, {}, {}};
  }
};

struct FitOptions {
  bool intercept = true;
  double ridge = 1e-8;
};

// Minimizes Σ‖yᵢ − (Wᵀxᵢ + b)‖² + ridge·‖W‖²_F. The intercept is not
// penalized: inputs and targets are centered and b recovered from the means.
inline ProjectionMatrix fit_projection(const RegressionSet& data, const FitOptions& opt = {}) {
  if (data.inputs.rows() < 1) throw ValidationError("fit_projection: empty regression set");
  if (data.inputs.rows() != data.targets.rows()) {
    throw ValidationError("fit_projection: input and target row counts differ");
  }
  if (!(opt.ridge >= 0.0) || !std::isfinite(opt.ridge)) {
    throw ValidationError("fit_projection: ridge must be a non-negative finite number");
  }
  Eigen::MatrixXd X = data.inputs;
  Eigen::MatrixXd Y = data.targets;
  Eigen::RowVectorXd x_mean, y_mean;
  if (opt.intercept) {
    x_mean = X.colwise().mean();
    y_mean = Y.colwise().mean();
    X.rowwise() -= x_mean;
    Y.rowwise() -= y_mean;
  }
  Eigen::MatrixXd gram = X.transpose() * X;
  gram.diagonal().array() += opt.ridge;
  const Eigen::MatrixXd rhs = X.transpose() * Y;

  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  const auto& pivots = ldlt.vectorD();
  const double max_pivot = pivots.cwiseAbs().maxCoeff();
  const double min_pivot = pivots.minCoeff();
  if (ldlt.info() != Eigen::Success || !(max_pivot > 0.0) ||
      (opt.ridge == 0.0 && min_pivot <= 1e-12 * max_pivot)) {
    throw RankDeficiencyError(
        "least-squares normal system is numerically singular (rank-deficient inputs, " +
        std::to_string(data.inputs.rows()) + " rows); use ridge > 0");
  }
  ProjectionMatrix p;
  p.weights = ldlt.solve(rhs);
  if (opt.intercept) p.intercept = (y_mean - x_mean * p.weights).transpose();
  if (!p.weights.allFinite() || (p.intercept && !p.intercept->allFinite())) {
    throw RankDeficiencyError("least-squares solution is not finite; use ridge > 0");
  }
  return p;
}

inline Eigen::VectorXd apply_projection(const ProjectionMatrix& p, const Eigen::VectorXd& v) {
  if (static_cast<std::size_t>(v.size()) != p.d_in()) {
    throw ValidationError("apply_projection: vector dimension " + std::to_string(v.size()) +
                          " != projection input dimension " + std::to_string(p.d_in()));
  }
  Eigen::VectorXd out = p.weights.transpose() * v;
  if (p.intercept) out += *p.intercept;
  return out;
}

inline EmbeddingVector apply_projection(const ProjectionMatrix& p, const EmbeddingVector& v) {
  const Eigen::VectorXd out = apply_projection(p, detail::to_eigen(v));
  return EmbeddingVector(out.data(), out.data() + out.size());
}

// Σ‖yᵢ − P(xᵢ)‖² over the set.
inline double training_residual(const RegressionSet& data, const ProjectionMatrix& p) {
  Eigen::MatrixXd pred = data.inputs * p.weights;
  if (p.intercept) pred.rowwise() += p.intercept->transpose();
  return (data.targets - pred).squaredNorm();
}

inline double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ValidationError("cosine_similarity: dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw ValidationError("cosine_similarity: zero-norm input");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

// --- persistence -------------------------------------------------------------

inline nlohmann::json to_json(const ProjectionMatrix& p) {
  std::vector<double> w;
  w.reserve(p.d_in() * p.d_out());
  for (Eigen::Index r = 0; r < p.weights.rows(); ++r) {
    for (Eigen::Index c = 0; c < p.weights.cols(); ++c) w.push_back(p.weights(r, c));
  }
  nlohmann::json j = {{"d_in", p.d_in()},
                      {"d_out", p.d_out()},
                      {"weights", std::move(w)},
                      {"provider_name", p.provider_name},
                      {"trained_on", p.trained_on}};
  if (p.intercept) {
    j["intercept"] = std::vector<double>(p.intercept->data(), p.intercept->data() + p.intercept->size());
  }
  return j;
}

inline ProjectionMatrix projection_from_json(const nlohmann::json& j) {
  try {
    const auto d_in = j.at("d_in").get<std::size_t>();
    const auto d_out = j.at("d_out").get<std::size_t>();
    const auto w = j.at("weights").get<std::vector<double>>();
    if (d_in == 0 || d_out == 0 || w.size() != d_in * d_out) {
      throw ValidationError("projection weights do not match d_in × d_out");
    }
    ProjectionMatrix p;
    p.weights.resize(static_cast<Eigen::Index>(d_in), static_cast<Eigen::Index>(d_out));
    for (std::size_t r = 0; r < d_in; ++r) {
      for (std::size_t c = 0; c < d_out; ++c) {
        p.weights(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = w[r * d_out + c];
      }
    }
    if (j.contains("intercept") && !j["intercept"].is_null()) {
      const auto b = j["intercept"].get<std::vector<double>>();
      if (b.size() != d_out) throw ValidationError("projection intercept length != d_out");
      p.intercept = detail::to_eigen(b);
    }
    p.provider_name = j.value("provider_name", "");
    p.trained_on = j.value("trained_on", "");
    if (!p.weights.allFinite() || (p.intercept && !p.intercept->allFinite())) {
      throw ValidationError("projection contains non-finite entries");
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed projection: ") + e.what());
  }
}

inline void save_projection(const ProjectionMatrix& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write projection " + path);
  out << to_json(p).dump() << '\n';
}

inline ProjectionMatrix load_projection(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open projection " + path);
  try {
    return projection_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

// --- text score ------------------------------------------------------------------

// S_TEXT(history, occ) = cosim(P(embed(concat(history docs))), embed(T_occ)).
// Occupation embeddings are computed once and kept unit-normalized.
class TextScorer {
 public:
  TextScorer(const Ontology& onto, std::shared_ptr<const EmbeddingProvider> provider,
             std::optional<ProjectionMatrix> projection, bool normalize_embeddings = false,
             std::size_t threads = 1)
      : onto_(&onto),
        provider_(std::move(provider)),
        projection_(std::move(projection)),
        normalize_(normalize_embeddings) {
    const auto d = static_cast<Eigen::Index>(provider_->dimension());
    if (projection_ && (projection_->d_in() != provider_->dimension() ||
                        projection_->d_out() != provider_->dimension())) {
      throw ValidationError("projection dimensions do not match provider dimension " +
                            std::to_string(d));
    }
    occupations_.resize(static_cast<Eigen::Index>(onto.occupation_count()), d);
    parallel_for(onto.occupation_count(), threads, [&](std::size_t i) {
      Eigen::VectorXd e = detail::to_eigen(provider_->embed(format_occupation_doc(onto.occupation(i))));
      if (e.size() != d) throw ValidationError("provider returned a vector of the wrong dimension");
      const double n = e.norm();
      if (n == 0.0) throw ValidationError("zero embedding for occupation " + onto.occupation(i).id);
      occupations_.row(static_cast<Eigen::Index>(i)) = (e / n).transpose();
    });
  }

  Eigen::VectorXd query(std::span<const Experience> history) const {
    Eigen::VectorXd h = detail::to_eigen(provider_->embed(history_document(history, provider_->separator())));
    if (normalize_) detail::l2_normalize(h);
    return projection_ ? apply_projection(*projection_, h) : h;
  }

  std::vector<double> score_all(std::span<const Experience> history) const {
    const Eigen::VectorXd q = query(history);
    const double n = q.norm();
    if (n == 0.0) throw ValidationError("projected history embedding has zero norm");
    const Eigen::VectorXd s = occupations_ * (q / n);
    std::vector<double> out(s.data(), s.data() + s.size());
    for (double& x : out) x = std::clamp(x, -1.0, 1.0);
    return out;
  }

  double score(std::span<const Experience> history, std::string_view occ) const {
    const Eigen::VectorXd q = query(history);
    const auto row = occupations_.row(static_cast<Eigen::Index>(onto_->occupation_index(occ)));
    const Eigen::VectorXd e = row.transpose();
    return cosine_similarity(std::span<const double>(q.data(), q.size()),
                             std::span<const double>(e.data(), e.size()));
  }

  RankedList rank(std::span<const Experience> history) const { return rank_by_scores(score_all(history)); }

  const EmbeddingProvider& provider() const { return *provider_; }
  bool has_projection() const { return projection_.has_value(); }

 private:
  const Ontology* onto_;
  std::shared_ptr<const EmbeddingProvider> provider_;
  std::optional<ProjectionMatrix> projection_;
  bool normalize_;
  Eigen::MatrixXd occupations_;  // unit rows, ontology index order
};

}  // namespace careerpath
