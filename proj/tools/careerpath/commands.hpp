#pragma once
// careerpath command-line front end: ingest, pairs, embed, fit, eval,
// gridsearch, predict. Kept in a header so the test suite can drive
// run_cli() in-process.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "careerpath/careerpath.hpp"

namespace careerpath::cli {

namespace fs = std::filesystem;

struct ExperimentConfig {
  std::string ontology_dir;
  std::string esco_version = "unspecified";
  std::string dataset;
  std::string store;
  std::string projection;
  std::string strategy = "all";
  std::string spans = "on";
  std::string provider = "hash";
  std::string method = "skill";
  double alpha = 0.8;
  double step = 0.1;
  std::string split;  // empty: the command's own default
  std::uint64_t seed = 42;
  std::string intercept = "on";
  double ridge = 1e-8;
  std::size_t top = 10;
  std::string out;
  std::size_t threads = 0;
  std::size_t dim = 256;
  std::string history;
  std::string docs_out;
  bool no_projection = false;
  bool normalize_embeddings = false;
  bool normalize_hybrid = false;
  std::vector<int> ks = {1, 5, 10};
};

inline nlohmann::json fingerprint(const ExperimentConfig& c, const Ontology* onto) {
  nlohmann::json j = {{"dataset", c.dataset},
                      {"split", c.split},
                      {"seed", c.seed},
                      {"esco_version", c.esco_version},
                      {"method", c.method},
                      {"provider", c.provider},
                      {"intercept", c.intercept},
                      {"ridge", c.ridge},
                      {"normalize_embeddings", c.normalize_embeddings},
                      {"normalize_hybrid", c.normalize_hybrid}};
  if (c.method == "hybrid") j["alpha"] = c.alpha;
  if (c.provider == "hash") j["dimension"] = c.dim;
  if (c.provider == "store") j["store"] = c.store;
  j["projection"] = c.no_projection ? nlohmann::json("none") : nlohmann::json(c.projection);
  if (onto) j["esco_occupations"] = onto->occupation_count();
  return j;
}

class UsageError : public Error {
 public:
  using Error::Error;
};

struct Context {
  Ontology ontology;
  std::vector<CareerHistory> histories;
  ParseReport parse_report;
  Splits splits;
};

inline Context load_context(const ExperimentConfig& c, std::ostream& log) {
  if (c.ontology_dir.empty()) throw UsageError("--ontology-dir is required");
  if (c.dataset.empty()) throw UsageError("--dataset is required");
  Context ctx;
  ctx.ontology = load_ontology(fs::path(c.ontology_dir));
  ctx.ontology.set_version(c.esco_version);
  ctx.histories = parse_dataset(c.dataset, &ctx.ontology, &ctx.parse_report);
  ctx.splits = stratified_split(ctx.histories, {0.8, 0.1, 0.1, c.seed});
  log << "ontology: " << ctx.ontology.occupation_count() << " occupations, "
      << ctx.ontology.skill_count() << " skills (ESCO " << c.esco_version << ")\n"
      << "dataset: " << ctx.histories.size() << " histories, " << total_experiences(ctx.histories)
      << " experiences (" << ctx.parse_report.skipped_short << " skipped with <2 experiences)\n"
      << "split seed " << c.seed << ": train " << ctx.splits.train.size() << ", val "
      << ctx.splits.validation.size() << ", test " << ctx.splits.test.size() << "\n";
  return ctx;
}

inline std::string split_or(const ExperimentConfig& c, const char* fallback) {
  return c.split.empty() ? fallback : c.split;
}

inline std::vector<CareerHistory> select_split(const Context& ctx, const std::string& name) {
  if (name == "train") return ctx.splits.train;
  if (name == "val") return ctx.splits.validation;
  if (name == "test") return ctx.splits.test;
  if (name == "trainval") {
    auto out = ctx.splits.train;
    out.insert(out.end(), ctx.splits.validation.begin(), ctx.splits.validation.end());
    return out;
  }
  if (name == "all") return ctx.histories;
  throw UsageError("unknown split '" + name + "'");
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
  if (!path.empty() && fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << j.dump(2) << '\n';
}

inline std::shared_ptr<const EmbeddingProvider> make_provider(const ExperimentConfig& c) {
  if (c.provider == "hash") return std::make_shared<const HashEmbeddingProvider>(c.dim);
  if (c.provider == "store") {
    if (c.store.empty()) throw UsageError("--provider store needs --store");
    return std::make_shared<const StoreEmbeddingProvider>(
        std::make_shared<const EmbeddingStore>(EmbeddingStore::load(c.store)));
  }
  throw UsageError("unknown provider '" + c.provider + "'");
}

inline std::optional<ProjectionMatrix> projection_for(const ExperimentConfig& c) {
  if (c.no_projection) return std::nullopt;
  if (c.projection.empty()) {
    throw ValidationError("method '" + c.method +
                          "' needs a projection file (--projection, from 'careerpath fit'), "
                          "or --no-projection for raw embeddings");
  }
  return load_projection(c.projection);
}

inline std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(precision) << v;
  return s.str();
}

inline std::string summary(const EvalReport& r) {
  std::ostringstream s;
  s << "MRR " << fmt(r.mrr);
  for (const auto& [k, v] : r.recall_at) s << "  R@" << k << " " << fmt(100.0 * v, 2);
  s << "  (n=" << r.n_problems << ")";
  return s.str();
}

// --- commands ---------------------------------------------------------------

inline int cmd_ingest(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  if (c.out.empty()) throw UsageError("--out <directory> is required");
  const auto ctx = load_context(c, err);
  const fs::path dir(c.out);
  fs::create_directories(dir);

  const auto& diag = ctx.ontology.diagnostics();
  nlohmann::json validation = {
      {"ontology",
       {{"esco_version", c.esco_version},
        {"occupations", ctx.ontology.occupation_count()},
        {"skills", ctx.ontology.skill_count()},
        {"rejected_relation_rows", diag.rejected_relation_rows},
        {"duplicate_relation_rows", diag.duplicate_relation_rows},
        {"conflicting_relations", diag.conflicting_relations},
        {"messages", diag.messages}}},
      {"dataset",
       {{"path", c.dataset},
        {"records", ctx.parse_report.records},
        {"histories", ctx.histories.size()},
        {"experiences", total_experiences(ctx.histories)},
        {"skipped_short", ctx.parse_report.skipped_short},
        {"skipped_ids", ctx.parse_report.skipped_ids},
        {"reordered_by_date", ctx.parse_report.reordered},
        {"labels_resolved_by_title", ctx.parse_report.labels_by_title}}}};
  write_json((dir / "validation.json").string(), validation);

  const SplitSpec spec{0.8, 0.1, 0.1, c.seed};
  auto stats = to_json(dataset_stats(ctx.histories), ctx.ontology.occupation_count());
  nlohmann::json splits = nlohmann::json::object();
  for (const char* name : {"train", "val", "test"}) {
    const auto part = select_split(ctx, name);
    splits[name] = {{"histories", part.size()},
                    {"experiences", total_experiences(part)},
                    {"problems", expand_prediction_problems(part).size()}};
  }
  stats["splits"] = splits;
  stats["config"] = fingerprint(c, &ctx.ontology);
  write_json((dir / "stats.json").string(), stats);
  write_json((dir / "split.json").string(), split_manifest(ctx.splits, spec));

  out << "histories " << ctx.histories.size() << "\n"
      << "experiences " << total_experiences(ctx.histories) << "\n"
      << "occupations " << ctx.ontology.occupation_count() << "\n"
      << "wrote " << (dir / "validation.json").string() << ", stats.json, split.json\n";
  return 0;
}

inline int cmd_pairs(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  const auto strategy = parse_strategy(c.strategy);
  if (!strategy) throw UsageError("--strategy must be one of full, last, all");
  if (c.out.empty()) throw UsageError("--out <pairs.jsonl> is required");
  const auto ctx = load_context(c, err);
  const auto split = split_or(c, "train");
  const auto histories = select_split(ctx, split);
  PairOptions opt{*strategy, c.spans == "on", std::string(kDefaultSeparator)};
  const auto pairs = generate_pairs(histories, ctx.ontology, opt);
  std::ofstream f(c.out);
  if (!f) throw ValidationError("cannot write " + c.out);
  for (const auto& p : pairs) f << to_json(p).dump() << '\n';
  out << "pairs " << pairs.size() << " (strategy " << to_string(*strategy) << ", spans " << c.spans
      << ", split " << split << ")\n";
  return 0;
}

// Every document the evaluation pipeline can ask a provider for: occupation
// documents, prefix documents of every prediction problem, full histories.
inline std::vector<Document> needed_documents(const Context& ctx, const std::string& separator) {
  std::vector<Document> docs;
  for (const auto& occ : ctx.ontology.occupations()) docs.push_back(format_occupation_doc(occ));
  for (const auto& h : ctx.histories) {
    for (std::size_t i = 1; i <= h.size(); ++i) {
      docs.push_back(history_document(std::span(h.experiences).first(i), separator));
    }
  }
  return docs;
}

inline int cmd_embed(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  if (c.out.empty() && c.docs_out.empty()) throw UsageError("--out <store.jsonl> or --docs-out is required");
  const auto ctx = load_context(c, err);
  const HashEmbeddingProvider provider(c.dim);
  const auto docs = needed_documents(ctx, provider.separator());

  std::vector<std::pair<std::string, const Document*>> keyed;
  std::unordered_set<std::string> seen;
  for (const auto& d : docs) {
    auto key = document_key(d);
    if (seen.insert(key).second) keyed.emplace_back(std::move(key), &d);
  }
  if (!c.docs_out.empty()) {
    std::ofstream f(c.docs_out);
    if (!f) throw ValidationError("cannot write " + c.docs_out);
    for (const auto& [key, doc] : keyed) f << nlohmann::json{{"key", key}, {"text", doc->text}}.dump() << '\n';
    out << "documents " << keyed.size() << " -> " << c.docs_out << "\n";
  }
  if (!c.out.empty()) {
    std::vector<EmbeddingVector> vecs(keyed.size());
    parallel_for(keyed.size(), c.threads, [&](std::size_t i) { vecs[i] = provider.embed(*keyed[i].second); });
    EmbeddingStore store(provider.dimension(), provider.name());
    for (std::size_t i = 0; i < keyed.size(); ++i) store.insert(keyed[i].first, std::move(vecs[i]));
    store.save(c.out);
    out << "store " << store.size() << " vectors, dimension " << store.dimension() << " -> " << c.out << "\n";
  }
  return 0;
}

inline int cmd_fit(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  auto c = cfg;
  c.split = split_or(c, "train");
  if (c.out.empty()) throw UsageError("--out <projection.json> is required");
  const auto ctx = load_context(c, err);
  const auto provider = make_provider(c);
  const auto problems = expand_prediction_problems(select_split(ctx, c.split));
  const auto data = build_regression_set(problems, ctx.ontology, *provider,
                                         {c.normalize_embeddings, c.threads});
  err << "regression rows " << data.rows() << " (split " << c.split << ")\n";
  auto p = fit_projection(data, {c.intercept == "on", c.ridge});
  p.provider_name = provider->name();
  p.trained_on = c.split + "@seed" + std::to_string(c.seed);
  save_projection(p, c.out);
  out << "rows " << data.rows() << "\n"
      << "residual " << training_residual(data, p) << "\n"
      << "projection " << p.d_in() << "x" << p.d_out() << (p.intercept ? " +intercept" : "") << " -> "
      << c.out << "\n";
  return 0;
}

struct Scorers {
  std::unique_ptr<SkillScorer> skill;
  std::unique_ptr<TextScorer> text;
};

inline Scorers make_scorers(const ExperimentConfig& c, const Ontology& onto) {
  Scorers s;
  if (c.method == "skill" || c.method == "hybrid") s.skill = std::make_unique<SkillScorer>(onto);
  if (c.method == "text" || c.method == "hybrid") {
    if (c.method == "hybrid" && c.projection.empty()) {
      // raw embeddings are allowed for --method text only
      throw ValidationError("method 'hybrid' needs a projection file (--projection, from 'careerpath fit')");
    }
    s.text = std::make_unique<TextScorer>(onto, make_provider(c), projection_for(c),
                                          c.normalize_embeddings, c.threads);
  }
  return s;
}

inline Scorer scorer_for(const ExperimentConfig& c, const Ontology& onto, const Scorers& s) {
  if (c.method == "baseline") {
    return [&onto](const PredictionProblem& p) {
      const auto labels = history_labels(p.prefix);
      return reverse_history_rank(onto, labels);
    };
  }
  if (c.method == "skill") {
    return [&s](const PredictionProblem& p) { return s.skill->rank(history_labels(p.prefix)); };
  }
  if (c.method == "text") {
    return [&s](const PredictionProblem& p) { return s.text->rank(p.prefix); };
  }
  if (c.method == "hybrid") {
    const HybridConfig cfg{c.alpha, c.normalize_hybrid};
    return [&s, cfg](const PredictionProblem& p) {
      return hybrid_rank(cfg, s.skill->score_all(history_labels(p.prefix)), s.text->score_all(p.prefix));
    };
  }
  throw UsageError("--method must be one of baseline, skill, text, hybrid");
}

inline void check_method(const std::string& m) {
  if (m != "baseline" && m != "skill" && m != "text" && m != "hybrid") {
    throw UsageError("--method must be one of baseline, skill, text, hybrid");
  }
}

inline int cmd_eval(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  auto c = cfg;
  c.split = split_or(c, "test");
  check_method(c.method);
  HybridConfig{c.alpha, false}.validate();
  const auto ctx = load_context(c, err);
  const auto problems = expand_prediction_problems(select_split(ctx, c.split));
  const auto scorers = make_scorers(c, ctx.ontology);
  auto report = evaluate(problems, ctx.ontology, scorer_for(c, ctx.ontology, scorers), c.ks, c.threads);
  report.config = fingerprint(c, &ctx.ontology);
  if (!c.out.empty()) write_json(c.out, to_json(report));
  out << c.method << " on " << c.split << ": " << summary(report) << "\n";
  return 0;
}

inline int cmd_gridsearch(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  if (!(c.step > 0.0 && c.step <= 1.0)) throw UsageError("--step must lie in (0, 1]");
  if (c.out.empty()) throw UsageError("--out <curve.csv> is required");
  auto cfg = c;
  cfg.method = "hybrid";
  cfg.split = split_or(c, "val");
  const auto ctx = load_context(cfg, err);
  const auto problems = expand_prediction_problems(select_split(ctx, cfg.split));
  const auto scorers = make_scorers(cfg, ctx.ontology);
  const ScoreFn skill = [&](const PredictionProblem& p) { return scorers.skill->score_all(history_labels(p.prefix)); };
  const ScoreFn text = [&](const PredictionProblem& p) { return scorers.text->score_all(p.prefix); };
  const auto result = grid_search_alpha(problems, ctx.ontology, skill, text, c.step, c.ks, c.threads,
                                        c.normalize_hybrid);

  std::ofstream csv(c.out);
  if (!csv) throw ValidationError("cannot write " + c.out);
  csv << "alpha,mrr";
  for (int k : c.ks) csv << ",r" << k;
  csv << "\n";
  nlohmann::json curve = nlohmann::json::array();
  for (const auto& pt : result.curve) {
    csv << std::setprecision(10) << pt.alpha << "," << std::setprecision(17) << pt.report.mrr;
    for (int k : c.ks) csv << "," << pt.report.recall_at.at(k);
    csv << "\n";
    curve.push_back({{"alpha", pt.alpha}, {"report", to_json(pt.report)}});
  }
  const auto json_path = fs::path(c.out).replace_extension(".json").string();
  write_json(json_path, {{"best_alpha", result.best_alpha},
                         {"selection", "max MRR; ties -> higher recall at largest k, then smaller alpha"},
                         {"curve", curve},
                         {"config", fingerprint(cfg, &ctx.ontology)}});
  for (const auto& pt : result.curve) out << "alpha " << fmt(pt.alpha, 2) << ": " << summary(pt.report) << "\n";
  out << "best alpha " << fmt(result.best_alpha, 2) << "\n";
  return 0;
}

inline CareerHistory read_single_history(const std::string& path, const Ontology& onto) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open history " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
  if (!j.contains("industry")) j["industry"] = "IT";  // industry plays no part in ranking
  auto h = history_from_json(j, 1, &onto);
  if (h.experiences.empty()) throw ValidationError(path + ": history has no experiences");
  return h;
}

inline int cmd_predict(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  check_method(c.method);
  if (c.history.empty()) throw UsageError("--history <file.json> is required");
  if (c.ontology_dir.empty()) throw UsageError("--ontology-dir is required");
  HybridConfig{c.alpha, false}.validate();
  auto onto = load_ontology(fs::path(c.ontology_dir));
  onto.set_version(c.esco_version);
  const auto h = read_single_history(c.history, onto);
  const auto scorers = make_scorers(c, onto);
  const auto labels = history_labels(h.experiences);

  std::vector<double> scores;
  RankedList ranking;
  if (c.method == "baseline") {
    ranking = reverse_history_rank(onto, labels);
  } else if (c.method == "skill") {
    scores = scorers.skill->score_all(labels);
  } else if (c.method == "text") {
    scores = scorers.text->score_all(h.experiences);
  } else {
    scores = hybrid_scores({c.alpha, c.normalize_hybrid}, scorers.skill->score_all(labels),
                           scorers.text->score_all(h.experiences));
  }
  if (!scores.empty()) ranking = rank_by_scores(scores);

  std::size_t top = c.top;
  if (top > ranking.size()) {
    err << "warning: --top " << top << " exceeds " << ranking.size() << " occupations; clamped\n";
    top = ranking.size();
  }
  for (std::size_t r = 0; r < top; ++r) {
    const auto idx = ranking.order[r];
    out << r + 1 << '\t' << onto.occupation(idx).id << '\t' << onto.occupation(idx).title << '\t'
        << (scores.empty() ? std::string("-") : fmt(scores[idx], 6)) << '\n';
  }
  return 0;
}

// --- entry point ----------------------------------------------------------------

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"Career path prediction over the ESCO occupation ontology"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key = value config file; flags override it");
  app.set_help_all_flag("--help-all");

  ExperimentConfig c;
  app.option_defaults()->always_capture_default();
  std::string write_config;
  app.add_option("--ontology-dir", c.ontology_dir, "directory with the ESCO CSV export");
  app.add_option("--esco-version", c.esco_version, "ESCO release label recorded in reports");
  app.add_option("--dataset", c.dataset, "career histories, newline-delimited JSON");
  app.add_option("--store", c.store, "embedding store file (provider=store)");
  app.add_option("--projection", c.projection, "projection file from 'fit'");
  app.add_flag("--no-projection", c.no_projection, "text scoring on raw embeddings");
  app.add_option("--strategy", c.strategy, "pair strategy: full, last, all");
  app.add_option("--spans", c.spans, "expand contiguous spans: on, off")->check(CLI::IsMember({"on", "off"}));
  app.add_option("--provider", c.provider, "embedding provider: hash, store")->check(CLI::IsMember({"hash", "store"}));
  app.add_option("--method", c.method, "baseline, skill, text, hybrid");
  app.add_option("--alpha", c.alpha, "hybrid weight on the text score")->check(CLI::Range(0.0, 1.0));
  app.add_option("--step", c.step, "grid-search alpha increment");
  app.add_option("--split", c.split, "train, val, test, trainval")
      ->check(CLI::IsMember({"train", "val", "test", "trainval", "all"}));
  app.add_option("--seed", c.seed, "split seed");
  app.add_option("--intercept", c.intercept, "fit an intercept: on, off")->check(CLI::IsMember({"on", "off"}));
  app.add_option("--ridge", c.ridge, "ridge penalty on the projection weights")->check(CLI::NonNegativeNumber);
  app.add_option("--top", c.top, "number of occupations printed by predict");
  app.add_option("--out", c.out, "output file or directory");
  app.add_option("--threads", c.threads, "worker threads (0 = all cores)");
  app.add_option("--dim", c.dim, "hash embedding dimension")->check(CLI::PositiveNumber);
  app.add_option("--history", c.history, "single career history JSON (predict)");
  app.add_option("--docs-out", c.docs_out, "write {key, text} documents for external embedding");
  app.add_option("--ks", c.ks, "recall cutoffs")->delimiter(',');
  app.add_flag("--normalize-embeddings", c.normalize_embeddings, "L2-normalize embeddings before regression");
  app.add_flag("--normalize-hybrid", c.normalize_hybrid, "min-max scale both scores before mixing");
  app.add_option("--write-config", write_config, "write the resolved configuration and exit")->configurable(false);

  using Handler = int (*)(const ExperimentConfig&, std::ostream&, std::ostream&);
  const std::vector<std::pair<std::string, std::pair<std::string, Handler>>> commands = {
      {"ingest", {"validate ontology + dataset, write stats and split manifest", cmd_ingest}},
      {"pairs", {"emit contrastive training pairs as JSONL", cmd_pairs}},
      {"embed", {"embed all needed documents with the hash provider into a store", cmd_embed}},
      {"fit", {"fit the least-squares projection", cmd_fit}},
      {"eval", {"evaluate a method on a split", cmd_eval}},
      {"gridsearch", {"sweep the hybrid alpha on the validation split", cmd_gridsearch}},
      {"predict", {"rank occupations for one career history", cmd_predict}},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [name, desc] : commands) subs.push_back(app.add_subcommand(name, desc.first));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << "run with --help for usage\n";
    return 2;
  }

  if (!write_config.empty()) {
    std::ofstream f(write_config);
    f << app.config_to_str(true, false);
    return f ? 0 : 1;
  }

  try {
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (subs[i]->parsed()) {
        const auto started = std::chrono::steady_clock::now();
        const int rc = commands[i].second.second(c, out, err);
        const auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        err << commands[i].first << " finished in " << fmt(secs, 2) << " s\n";
        return rc;
      }
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace careerpath::cli
