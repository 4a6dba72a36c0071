#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "w2v/evaluation.hpp"
#include "w2v/geo.hpp"
#include "w2v/session.hpp"
#include "w2v/tagger.hpp"

namespace w2v::synth {

struct InvalidConfig : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnknownPair : std::runtime_error {
  UnknownPair(const std::string& subject, const std::string& woeid)
      : std::runtime_error("no planted ad for (" + subject + ", " + woeid + ")") {}
};

struct SynthConfig {
  int n_locations = 20;   // cities, grouped five per state
  int n_subjects = 20;
  int n_ads_per_pair = 1;  // ads per (subject, city)
  int n_sessions = 50000;
  double p_implicit = 0.45;
  double p_explicit = 0.35;
  double click_noise = 0.2;
  std::uint64_t seed = 1;
};

/// (subject surface form, city woeid) -> the planted best ad token.
struct GroundTruth {
  std::map<std::pair<std::string, std::string>, std::string> best_ad;
};

/// The planted ad, or UnknownPair.
std::string oracle_best_ad(const GroundTruth& truth, const std::string& subject,
                           const std::string& woeid);

/// Everything one generation run produces. Train and test sessions share the
/// vocabulary machinery, but a quarter of the test explicit queries use
/// query templates never seen in training (cold-start probes).
struct Corpus {
  std::vector<session::Session> train;
  std::vector<session::Session> test;
  GroundTruth truth;
  std::vector<tagger::TaggedQuery> tagging_train;
  std::vector<tagger::TaggedQuery> tagging_heldout;
  std::vector<eval::Judgment> judgments;
  geo::WoeidTable woeids;
  tagger::Gazetteer gazetteer;
  tagger::Lexicon lexicon;

  // Planted inventory, for oracles and reports.
  std::vector<std::string> subject_surfaces;  // "s3 shops", "org4 inc", ...
  std::vector<std::string> city_woeids;       // "woeid_c0", ...
  int total_ads = 0;
};

/// Deterministic generation: the same config (seed included) reproduces the
/// corpus byte for byte.
Corpus generate(const SynthConfig& config);

/// Writes sessions.tsv, test_sessions.tsv, tagging_train.conll,
/// tagging_heldout.conll, judgments.tsv, ground_truth.tsv, woeids.tsv,
/// gazetteer.tsv and lexicon.tsv under dir (created if missing).
void write_corpus(const std::filesystem::path& dir, const Corpus& corpus);

}  // namespace w2v::synth
