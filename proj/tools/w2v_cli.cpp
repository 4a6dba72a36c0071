// w2v — one binary for the whole pipeline: synthesize a corpus, train
// embeddings, tag queries, index ads, retrieve, evaluate, and report.
//
// Exit codes: 0 success (including --help), 1 usage error, 2 data error.
// Logs go to standard error; data goes to standard output or --out.

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "w2v/embedding.hpp"
#include "w2v/evaluation.hpp"
#include "w2v/geo.hpp"
#include "w2v/retrieval.hpp"
#include "w2v/session.hpp"
#include "w2v/synth.hpp"
#include "w2v/tagger.hpp"
#include "w2v/util.hpp"

namespace {

using namespace w2v;

/// Post-parse validation failures: wrong flag combinations, unknown enum
/// names. Reported like CLI11 parse errors (grammar to stderr, exit 1).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

/// Data sink: --out when given, standard output otherwise.
class OutStream {
 public:
  explicit OutStream(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw std::runtime_error("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

std::string fmt6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

// ---------------------------------------------------------------------------
// Shared option bundles
// ---------------------------------------------------------------------------

/// Location plumbing: woeid hierarchy plus optional POI polygons.
struct LocationArgs {
  std::string woeid_table_path;
  std::string poi_path;
  bool poi_mode = false;
  double poi_threshold_m = geo::kDefaultPoiThresholdM;

  void attach(CLI::App* cmd) {
    cmd->add_option("--woeid-table", woeid_table_path,
                    "Woeid hierarchy TSV (id, level, parent); locations are truncated to city "
                    "level through it");
    cmd->add_option("--poi-file", poi_path, "POI polygon TSV (id, name, lat,lon;... ring)");
    cmd->add_flag("--poi-mode", poi_mode,
                  "Resolve user coordinates to POIs instead of using woeids");
    cmd->add_option("--poi-threshold", poi_threshold_m,
                    "Maximum distance in meters for POI assignment")
        ->capture_default_str();
  }

  geo::LocationResolver build() const {
    geo::WoeidTable table;
    if (!woeid_table_path.empty()) {
      auto in = open_input(woeid_table_path);
      table = geo::WoeidTable::load(in);
    }
    std::optional<geo::PoiIndex> pois;
    if (!poi_path.empty()) {
      auto in = open_input(poi_path);
      pois.emplace(geo::load_poi_file(in));
    }
    if (poi_mode && !pois) throw UsageError("--poi-mode requires --poi-file");
    return geo::LocationResolver(std::move(table), std::move(pois), poi_mode, poi_threshold_m);
  }
};

/// Extraction plumbing: tagger model plus the dictionaries it consults.
struct ExtractionArgs {
  std::string tagger_path;
  std::string lexicon_path;
  std::string gazetteer_path;

  std::optional<tagger::TaggerModel> model;
  tagger::Lexicon lexicon;
  tagger::Gazetteer gazetteer;

  void attach(CLI::App* cmd) {
    cmd->add_option("--tagger", tagger_path, "Trained tagger model file (enables extraction)");
    cmd->add_option("--lexicon", lexicon_path,
                    "Qualifier lexicon TSV (phrase, QUALIFIER|ATTRIBUTE|EXCLUDE[, type])");
    cmd->add_option("--gazetteer", gazetteer_path, "Location gazetteer TSV (surface, woeid)");
  }

  bool wanted() const { return !tagger_path.empty(); }

  void load() {
    if (!lexicon_path.empty()) {
      auto in = open_input(lexicon_path);
      lexicon = tagger::Lexicon::load(in);
    }
    if (!gazetteer_path.empty()) {
      auto in = open_input(gazetteer_path);
      gazetteer = tagger::Gazetteer::load(in);
    }
    if (!tagger_path.empty()) {
      auto in = open_input(tagger_path);
      model = tagger::TaggerModel::load(in);
    }
  }
};

// ---------------------------------------------------------------------------
// Small shared steps
// ---------------------------------------------------------------------------

std::vector<session::Session> load_sessions(const std::string& path) {
  auto in = open_input(path);
  auto sessions = session::parse_session_log(in);
  std::size_t raw = sessions.size();
  sessions = session::filter_sessions(std::move(sessions));
  std::cerr << "sessions: " << sessions.size() << " kept of " << raw << "\n";
  return sessions;
}

embed::EmbeddingModel load_model(const std::string& path) {
  auto in = open_input(path);
  return embed::EmbeddingModel::load(in);
}

embed::Variant parse_variant(const std::string& s) {
  auto v = embed::variant_from(s);
  if (!v) throw UsageError("unknown variant '" + s + "' (s2v, gw2v, lw2v, lw2v+, lw2vCRF+)");
  return *v;
}

retrieval::Task parse_task(const std::string& s) {
  auto t = retrieval::task_from(s);
  if (!t) throw UsageError("unknown task '" + s + "' (q2ad, q+l, qsl, sl, s+l, qtsl)");
  return *t;
}

embed::TokenKind parse_kind(const std::string& s) {
  auto k = embed::token_kind_from(s);
  if (!k) throw UsageError("unknown token kind '" + s + "' (QUERY, SLC, AD, LOC, FRAGMENT, SUBJECT)");
  return *k;
}

/// Longest-match leftmost gazetteer lookup over token n-grams.
std::optional<std::string> find_location_woeid(const std::vector<std::string>& tokens,
                                               const tagger::Gazetteer& gaz) {
  std::size_t longest = std::min(gaz.max_phrase_words, tokens.size());
  for (std::size_t n = longest; n >= 1; --n) {
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::string phrase;
      for (std::size_t j = 0; j < n; ++j) {
        if (j > 0) phrase += ' ';
        phrase += tokens[i + j];
      }
      if (auto woeid = gaz.find(phrase)) return woeid;
    }
  }
  return std::nullopt;
}

/// Fills missing local_intent flags with the rule-based fallback. Flags
/// already present in the log always win. A detected explicit query also
/// receives the gazetteer woeid when the log had none.
void apply_intent_detection(std::vector<session::Session>& sessions,
                            const tagger::Gazetteer& gaz, const tagger::Lexicon& lexicon) {
  for (auto& s : sessions) {
    for (auto& ev : s.events) {
      if (ev.kind != session::EventKind::Query ||
          ev.local_intent != session::LocalIntent::None)
        continue;
      auto tokens = tagger::tokenize_query(ev.token);
      switch (tagger::detect_local_intent(tokens, gaz, lexicon)) {
        case tagger::DetectedIntent::Implicit:
          ev.local_intent = session::LocalIntent::Implicit;
          break;
        case tagger::DetectedIntent::Explicit:
          ev.local_intent = session::LocalIntent::Explicit;
          if (!ev.query_woeid) ev.query_woeid = find_location_woeid(tokens, gaz);
          break;
        case tagger::DetectedIntent::None:
          break;
      }
    }
  }
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthOpts {
  std::string out_dir;
  synth::SynthConfig cfg;
};

void run_synth(const SynthOpts& opt) {
  synth::Corpus corpus = synth::generate(opt.cfg);
  synth::write_corpus(opt.out_dir, corpus);
  std::cerr << "corpus: " << corpus.train.size() << " train sessions, " << corpus.test.size()
            << " test sessions, " << corpus.total_ads << " ads, " << corpus.judgments.size()
            << " judgments -> " << opt.out_dir << "\n";
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainOpts {
  std::string variant = "s2v";
  std::string in_path;
  std::string out_path;
  bool detect_intent = false;
  embed::TrainConfig cfg;
  LocationArgs loc;
  ExtractionArgs ext;
};

void run_train(TrainOpts& opt) {
  embed::Variant variant = parse_variant(opt.variant);
  if (variant == embed::Variant::lw2v_crf_plus && !opt.ext.wanted())
    throw UsageError("variant lw2vCRF+ requires --tagger (extraction supplies its tokens)");

  auto sessions = load_sessions(opt.in_path);
  opt.ext.load();
  if (opt.detect_intent) apply_intent_detection(sessions, opt.ext.gazetteer, opt.ext.lexicon);

  geo::LocationResolver resolver = opt.loc.build();
  std::optional<embed::TaggerExtractionProvider> provider;
  if (opt.ext.wanted())
    provider.emplace(&*opt.ext.model, &opt.ext.lexicon, &opt.ext.gazetteer, &resolver);

  embed::TrainStats stats;
  embed::EmbeddingModel model = embed::train(sessions, variant, opt.cfg, &resolver,
                                             provider ? &*provider : nullptr, &stats);
  std::ofstream out(opt.out_path);
  if (!out) throw std::runtime_error("cannot write " + opt.out_path);
  model.save(out);
  std::cerr << "trained " << embed::to_string(variant) << ": vocab " << stats.vocab_size
            << ", examples " << stats.examples << " (implicit negatives "
            << stats.implicit_negatives << "), sampled negatives " << stats.sampled_negatives
            << " -> " << opt.out_path << "\n";
}

// ---------------------------------------------------------------------------
// tag
// ---------------------------------------------------------------------------

struct TagOpts {
  std::string train_path;
  std::string model_path;
  std::string in_path;
  std::string heldout_path;
  std::string lexicon_path;
  std::string gazetteer_path;
  std::string out_path;
  int epochs = 10;
};

void print_prf(std::ostream& err, const std::vector<tagger::TagPrf>& rows) {
  for (const auto& r : rows)
    err << "  " << tagger::to_string(r.tag) << ": precision " << fmt6(r.precision) << " recall "
        << fmt6(r.recall) << " (gold " << r.gold << ", predicted " << r.predicted << ")\n";
}

void run_tag(const TagOpts& opt) {
  if (opt.train_path.empty() == opt.model_path.empty())
    throw UsageError("tag needs exactly one of --train (fit a model) or --model (tag queries)");

  if (!opt.train_path.empty()) {
    if (opt.out_path.empty()) throw UsageError("tag --train requires --out for the model file");
    auto in = open_input(opt.train_path);
    auto corpus = tagger::load_tagged_corpus(in);
    tagger::TaggerTrainReport report;
    tagger::TaggerModel model = tagger::train_tagger(corpus, opt.epochs, &report);
    std::ofstream out(opt.out_path);
    if (!out) throw std::runtime_error("cannot write " + opt.out_path);
    model.save(out);
    std::cerr << "tagger: " << corpus.size() << " queries, train accuracy "
              << fmt6(report.train_token_accuracy) << ", mistakes per epoch [";
    for (std::size_t i = 0; i < report.mistakes_per_epoch.size(); ++i)
      std::cerr << (i ? " " : "") << report.mistakes_per_epoch[i];
    std::cerr << "] -> " << opt.out_path << "\n";
    if (!opt.heldout_path.empty()) {
      auto hin = open_input(opt.heldout_path);
      auto heldout = tagger::load_tagged_corpus(hin);
      std::cerr << "held-out per-tag precision/recall (" << heldout.size() << " queries):\n";
      print_prf(std::cerr, tagger::per_tag_prf(model, heldout));
    }
    return;
  }

  // Tagging mode: one raw query per input line -> extraction TSV.
  ExtractionArgs ext;
  ext.tagger_path = opt.model_path;
  ext.lexicon_path = opt.lexicon_path;
  ext.gazetteer_path = opt.gazetteer_path;
  ext.load();
  if (opt.in_path.empty()) throw UsageError("tag --model requires --in (query list)");
  auto in = open_input(opt.in_path);
  OutStream out(opt.out_path);
  std::string line;
  auto dash = [](const std::optional<std::string>& v) { return v ? *v : std::string("-"); };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    tagger::ExtractionSet e = tagger::extract_from_query(line, *ext.model, ext.lexicon,
                                                         ext.gazetteer);
    std::string attrs = e.attributes.empty() ? "-" : join(e.attributes, ",");
    out.stream() << line << '\t' << dash(e.subject) << '\t' << dash(e.location_woeid) << '\t'
                 << dash(e.qualifier) << '\t'
                 << (e.qualifier_type ? tagger::to_string(*e.qualifier_type) : "-") << '\t'
                 << attrs << '\n';
  }
}

// ---------------------------------------------------------------------------
// index
// ---------------------------------------------------------------------------

struct IndexOpts {
  std::string model_path;
  std::string kind = "AD";
  std::string out_path;
};

void run_index(const IndexOpts& opt) {
  embed::EmbeddingModel model = load_model(opt.model_path);
  retrieval::AdIndex index(model, parse_kind(opt.kind));
  OutStream out(opt.out_path);
  for (const auto& token : index.tokens()) out.stream() << token << '\n';
  std::cerr << "indexed " << index.size() << " " << opt.kind << " vectors (dim " << index.dim()
            << ", skipped " << index.skipped_zero_norm() << " zero-norm)\n";
}

// ---------------------------------------------------------------------------
// retrieve
// ---------------------------------------------------------------------------

struct RetrieveOpts {
  std::string model_path;
  std::string task = "q2ad";
  std::string query;
  std::string woeid;
  int k = 10;
  std::string out_path;
  LocationArgs loc;
  ExtractionArgs ext;
};

void run_retrieve(RetrieveOpts& opt) {
  retrieval::Task task = parse_task(opt.task);
  bool fragment_task = task != retrieval::Task::QueryToAd &&
                       task != retrieval::Task::QueryPlusLocationToAd;
  if (fragment_task && !opt.ext.wanted())
    throw UsageError("task " + opt.task + " requires --tagger for extraction");

  embed::EmbeddingModel model = load_model(opt.model_path);
  retrieval::AdIndex index(model);
  geo::LocationResolver resolver = opt.loc.build();
  opt.ext.load();

  std::optional<std::string> location;
  if (!opt.woeid.empty()) location = resolver.woeids().truncate_to_city(opt.woeid);

  std::optional<tagger::ExtractionSet> extraction;
  if (opt.ext.wanted())
    extraction = tagger::extract_from_query(opt.query, *opt.ext.model, opt.ext.lexicon,
                                            opt.ext.gazetteer);

  std::vector<double> vec;
  try {
    vec = retrieval::compose_query_vector(model, task, opt.query, location,
                                          extraction ? &*extraction : nullptr);
  } catch (const retrieval::TokenNotFound&) {
    if (!extraction) throw;
    vec = retrieval::cold_start_lookup(model, *extraction).vector;
    std::cerr << "cold start: query vector composed from extraction fragments\n";
  } catch (const retrieval::NoMatchableFragment&) {
    if (!extraction) throw;
    vec = retrieval::cold_start_lookup(model, *extraction).vector;
    std::cerr << "cold start: query vector composed from extraction fragments\n";
  }

  OutStream out(opt.out_path);
  auto neighbors = index.knn(vec, opt.k);
  for (std::size_t i = 0; i < neighbors.size(); ++i)
    out.stream() << (i + 1) << '\t' << neighbors[i].token << '\t' << fmt6(neighbors[i].cosine)
                 << '\n';
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalOpts {
  std::string model_path;
  std::string in_path;
  std::string task = "q2ad";
  std::string judgments_path;
  std::vector<int> ks = {1, 2, 3, 5, 10};
  int ndcg_k = 10;
  std::string out_path;
  LocationArgs loc;
  ExtractionArgs ext;
};

void run_eval(EvalOpts& opt) {
  retrieval::Task task = parse_task(opt.task);
  embed::EmbeddingModel model = load_model(opt.model_path);
  retrieval::AdIndex index(model);
  auto sessions = load_sessions(opt.in_path);
  geo::LocationResolver resolver = opt.loc.build();
  opt.ext.load();
  std::optional<embed::TaggerExtractionProvider> provider;
  if (opt.ext.wanted())
    provider.emplace(&*opt.ext.model, &opt.ext.lexicon, &opt.ext.gazetteer, &resolver);

  eval::EvalReport report;
  report.task = eval::evaluate_task(model, index, sessions, task, opt.ks, &resolver,
                                    provider ? &*provider : nullptr);
  if (!opt.judgments_path.empty()) {
    auto in = open_input(opt.judgments_path);
    auto judgments = eval::load_judgments(in);
    report.ndcg = eval::evaluate_ndcg(model, judgments, opt.ndcg_k);
    report.grades = eval::score_by_grade(model, judgments);
  }
  OutStream out(opt.out_path);
  eval::print_report(out.stream(), report);
}

// ---------------------------------------------------------------------------
// report tail | report keywords
// ---------------------------------------------------------------------------

struct TailOpts {
  std::string in_path;
  std::string out_path;
};

void run_tail(const TailOpts& opt) {
  auto sessions = load_sessions(opt.in_path);
  auto counts = session::count_query_frequencies(sessions);
  OutStream out(opt.out_path);
  for (const auto& b : session::tail_report(counts))
    out.stream() << b.label << '\t' << b.distinct_queries << '\t' << b.volume << '\t'
                 << fmt6(b.volume_share) << '\n';
}

struct KeywordOpts {
  std::string model_path;
  std::string token;
  std::string kind = "AD";
  int neighbors = 20;
  int keywords = 10;
  std::string out_path;
};

void run_keywords(const KeywordOpts& opt) {
  embed::EmbeddingModel model = load_model(opt.model_path);
  embed::TokenKind kind = parse_kind(opt.kind);
  auto id = model.vocab.find(kind, opt.token);
  if (!id) throw retrieval::TokenNotFound(kind, opt.token);
  std::span<const double> vec(model.in(*id), static_cast<std::size_t>(model.dim));
  retrieval::KeywordReport report = retrieval::neighbor_keywords(model, vec, opt.neighbors,
                                                                 opt.keywords);
  OutStream out(opt.out_path);
  for (const auto& [word, count] : report.keywords)
    out.stream() << "keyword\t" << word << '\t' << count << '\n';
  for (const auto& n : report.neighbors)
    out.stream() << "neighbor\t" << n.token << '\t' << fmt6(n.cosine) << '\n';
}

}  // namespace

// ---------------------------------------------------------------------------
// main
// ---------------------------------------------------------------------------

int main(int argc, char** argv) {
  CLI::App app{"Location-aware session embeddings: synthesize a corpus, train models, tag "
               "queries, index ads, retrieve and evaluate."};
  app.require_subcommand(1);
  app.set_config("--config", "", "Key=value file supplying flag defaults ([subcommand] sections; "
                                 "command-line flags override)");

  SynthOpts synth_opts;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic session corpus");
  synth_cmd->add_option("--out-dir", synth_opts.out_dir, "Directory for the corpus files")
      ->required();
  synth_cmd->add_option("--locations", synth_opts.cfg.n_locations, "Number of cities")
      ->capture_default_str();
  synth_cmd->add_option("--subjects", synth_opts.cfg.n_subjects, "Number of subjects")
      ->capture_default_str();
  synth_cmd->add_option("--ads-per-pair", synth_opts.cfg.n_ads_per_pair,
                        "Ads planted per (subject, city) pair")
      ->capture_default_str();
  synth_cmd->add_option("--sessions", synth_opts.cfg.n_sessions, "Training sessions to generate")
      ->capture_default_str();
  synth_cmd->add_option("--p-implicit", synth_opts.cfg.p_implicit,
                        "Probability of an implicit local query block")
      ->capture_default_str();
  synth_cmd->add_option("--p-explicit", synth_opts.cfg.p_explicit,
                        "Probability of an explicit local query block")
      ->capture_default_str();
  synth_cmd->add_option("--click-noise", synth_opts.cfg.click_noise,
                        "Probability a click lands on a random ad instead of the planted one")
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth_opts.cfg.seed, "Generation seed")->capture_default_str();

  TrainOpts train_opts;
  auto* train_cmd = app.add_subcommand("train", "Train an embedding model from a session log");
  train_cmd->add_option("--variant", train_opts.variant,
                        "Model variant: s2v, gw2v, lw2v, lw2v+, lw2vCRF+")
      ->capture_default_str();
  train_cmd->add_option("--in", train_opts.in_path, "Session log TSV")->required();
  train_cmd->add_option("--out", train_opts.out_path, "Model file to write")->required();
  train_cmd->add_option("--seed", train_opts.cfg.seed, "Training seed")->capture_default_str();
  train_cmd->add_option("--dim", train_opts.cfg.dim, "Embedding dimensionality")
      ->capture_default_str();
  train_cmd->add_option("--window", train_opts.cfg.window, "Context window half-width")
      ->capture_default_str();
  train_cmd->add_option("--negatives", train_opts.cfg.negatives,
                        "Sampled negatives per positive example")
      ->capture_default_str();
  train_cmd->add_option("--epochs", train_opts.cfg.epochs, "Passes over the corpus")
      ->capture_default_str();
  train_cmd->add_option("--lr", train_opts.cfg.lr_initial, "Initial learning rate")
      ->capture_default_str();
  train_cmd->add_option("--lr-final", train_opts.cfg.lr_final, "Final learning rate")
      ->capture_default_str();
  train_cmd->add_option("--min-count", train_opts.cfg.min_count,
                        "Drop tokens seen fewer times than this")
      ->capture_default_str();
  train_cmd->add_option("--sample", train_opts.cfg.subsample,
                        "Frequent-token subsampling threshold (0 disables)")
      ->capture_default_str();
  train_cmd->add_option("--workers", train_opts.cfg.workers,
                        "Training threads (1 = deterministic)")
      ->capture_default_str();
  train_cmd->add_flag("--implicit-negatives,!--no-implicit-negatives",
                      train_opts.cfg.implicit_negatives,
                      "Derive negatives from ads viewed above a click (on by default)");
  train_cmd->add_flag("--detect-intent", train_opts.detect_intent,
                      "Fill missing local-intent flags with the rule-based fallback "
                      "(log annotations always win)");
  train_opts.loc.attach(train_cmd);
  train_opts.ext.attach(train_cmd);

  TagOpts tag_opts;
  auto* tag_cmd = app.add_subcommand("tag", "Train the query tagger or tag raw queries");
  tag_cmd->add_option("--train", tag_opts.train_path,
                      "Tagged corpus (token<TAB>tag lines) to fit a tagger on");
  tag_cmd->add_option("--model", tag_opts.model_path, "Trained tagger model for tagging mode");
  tag_cmd->add_option("--in", tag_opts.in_path, "Query list, one raw query per line");
  tag_cmd->add_option("--heldout", tag_opts.heldout_path,
                      "Tagged corpus for a held-out precision/recall report");
  tag_cmd->add_option("--epochs", tag_opts.epochs, "Perceptron epochs")->capture_default_str();
  tag_cmd->add_option("--lexicon", tag_opts.lexicon_path, "Qualifier lexicon TSV");
  tag_cmd->add_option("--gazetteer", tag_opts.gazetteer_path, "Location gazetteer TSV");
  tag_cmd->add_option("--out", tag_opts.out_path,
                      "Model file (--train mode) or extraction TSV (--model mode)");

  IndexOpts index_opts;
  auto* index_cmd = app.add_subcommand("index", "List the retrievable tokens of one kind");
  index_cmd->add_option("--model", index_opts.model_path, "Embedding model file")->required();
  index_cmd->add_option("--kind", index_opts.kind,
                        "Token kind to index: QUERY, SLC, AD, LOC, FRAGMENT, SUBJECT")
      ->capture_default_str();
  index_cmd->add_option("--out", index_opts.out_path, "Write the listing here instead of stdout");

  RetrieveOpts retrieve_opts;
  auto* retrieve_cmd = app.add_subcommand("retrieve", "Top-K ads for one query");
  retrieve_cmd->add_option("--model", retrieve_opts.model_path, "Embedding model file")
      ->required();
  retrieve_cmd->add_option("--task", retrieve_opts.task,
                           "Composition task: q2ad, q+l, qsl, sl, s+l, qtsl")
      ->capture_default_str();
  retrieve_cmd->add_option("--query", retrieve_opts.query, "Raw query text")->required();
  retrieve_cmd->add_option("--woeid", retrieve_opts.woeid,
                           "Location woeid to add to the query vector (q+l)");
  retrieve_cmd->add_option("--k", retrieve_opts.k, "Number of ads to return")
      ->capture_default_str();
  retrieve_cmd->add_option("--out", retrieve_opts.out_path,
                           "Write the TSV here instead of stdout");
  retrieve_opts.loc.attach(retrieve_cmd);
  retrieve_opts.ext.attach(retrieve_cmd);

  EvalOpts eval_opts;
  auto* eval_cmd = app.add_subcommand("eval", "Precision@K (and NDCG) over a test session log");
  eval_cmd->add_option("--model", eval_opts.model_path, "Embedding model file")->required();
  eval_cmd->add_option("--in", eval_opts.in_path, "Test session log TSV")->required();
  eval_cmd->add_option("--task", eval_opts.task, "Composition task: q2ad, q+l, qsl, sl, s+l, qtsl")
      ->capture_default_str();
  eval_cmd->add_option("--ks", eval_opts.ks, "Precision cutoffs (comma separated)")
      ->delimiter(',');
  eval_cmd->add_option("--judgments", eval_opts.judgments_path,
                       "Graded judgment TSV for NDCG and per-grade cosine stats");
  eval_cmd->add_option("--ndcg-k", eval_opts.ndcg_k, "NDCG cutoff")->capture_default_str();
  eval_cmd->add_option("--out", eval_opts.out_path, "Write the report here instead of stdout");
  eval_opts.loc.attach(eval_cmd);
  eval_opts.ext.attach(eval_cmd);

  auto* report_cmd = app.add_subcommand("report", "Corpus and model reports");
  report_cmd->require_subcommand(1);

  TailOpts tail_opts;
  auto* tail_cmd = report_cmd->add_subcommand(
      "tail", "Query-volume share by occurrence bucket (the long-tail histogram)");
  tail_cmd->add_option("--in", tail_opts.in_path, "Session log TSV")->required();
  tail_cmd->add_option("--out", tail_opts.out_path, "Write the TSV here instead of stdout");

  KeywordOpts keyword_opts;
  auto* keyword_cmd = report_cmd->add_subcommand(
      "keywords", "Frequent words among a token's nearest query neighbors");
  keyword_cmd->add_option("--model", keyword_opts.model_path, "Embedding model file")->required();
  keyword_cmd->add_option("--token", keyword_opts.token, "Anchor token text")->required();
  keyword_cmd->add_option("--kind", keyword_opts.kind, "Anchor token kind")
      ->capture_default_str();
  keyword_cmd->add_option("--neighbors", keyword_opts.neighbors, "Query neighbors to inspect")
      ->capture_default_str();
  keyword_cmd->add_option("--keywords", keyword_opts.keywords, "Keywords to keep")
      ->capture_default_str();
  keyword_cmd->add_option("--out", keyword_opts.out_path, "Write the report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // help text to stdout, exit 0
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << std::flush;
    return 1;
  }

  try {
    if (*synth_cmd) run_synth(synth_opts);
    if (*train_cmd) run_train(train_opts);
    if (*tag_cmd) run_tag(tag_opts);
    if (*index_cmd) run_index(index_opts);
    if (*retrieve_cmd) run_retrieve(retrieve_opts);
    if (*eval_cmd) run_eval(eval_opts);
    if (*tail_cmd) run_tail(tail_opts);
    if (*keyword_cmd) run_keywords(keyword_opts);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help() << std::flush;
    return 1;
  } catch (const w2v::ParseError& e) {
    if (e.line > 0)
      std::cerr << "data error (line " << e.line << "): " << e.what() << "\n";
    else
      std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
