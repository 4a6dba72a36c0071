#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "w2v/embedding.hpp"
#include "w2v/tagger.hpp"

namespace w2v::retrieval {

struct TokenNotFound : std::runtime_error {
  TokenNotFound(embed::TokenKind kind, std::string_view token)
      : std::runtime_error("token not in vocabulary: " + embed::to_string(kind) + " \"" +
                           std::string(token) + "\"") {}
};

struct ZeroVector : std::runtime_error {
  ZeroVector() : std::runtime_error("zero-norm vector has no cosine neighbours") {}
};

struct EmptyIndex : std::runtime_error {
  EmptyIndex() : std::runtime_error("ad index is empty") {}
};

struct NoMatchableFragment : std::runtime_error {
  NoMatchableFragment() : std::runtime_error("no extraction fragment matches the vocabulary") {}
};

/// Cosine of two equal-length vectors; nullopt when either norm is zero.
std::optional<double> try_cosine(std::span<const double> a, std::span<const double> b);

/// Same, but throws ZeroVector instead of returning nullopt.
double cosine(std::span<const double> a, std::span<const double> b);

/// Sum of the model's input vectors for the given vocabulary ids.
std::vector<double> sum_input_vectors(const embed::EmbeddingModel& m, std::span<const int> ids);

struct Neighbor {
  std::string token;
  double cosine = 0.0;
  int id = -1;  // vocabulary id
};

/// Brute-force cosine retrieval over one token kind's input vectors
/// (AD by default). Zero-norm rows are excluded and counted.
class AdIndex {
 public:
  AdIndex() = default;
  explicit AdIndex(const embed::EmbeddingModel& model,
                   embed::TokenKind kind = embed::TokenKind::Ad);

  int size() const { return static_cast<int>(ids_.size()); }
  int skipped_zero_norm() const { return skipped_; }
  int dim() const { return dim_; }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::vector<int>& ids() const { return ids_; }

  /// k nearest rows by cosine, ties broken by ascending token text. Throws
  /// EmptyIndex on an empty index and ZeroVector for a zero-norm query.
  std::vector<Neighbor> knn(std::span<const double> query, int k) const;

 private:
  int dim_ = 0;
  int skipped_ = 0;
  std::vector<int> ids_;
  std::vector<std::string> tokens_;
  std::vector<double> unit_;  // size() x dim_, rows normalized
};

/// Retrieval tasks; the short names double as the CLI --task values.
enum class Task {
  QueryToAd,                 // q2ad: raw query token
  QueryPlusLocationToAd,     // q+l : query + location sum
  FragmentQsl,               // qsl : qualifier_subject_location fragment
  FragmentSl,                // sl  : subject_location fragment
  FragmentSPlusL,            // s+l : subject + location sum
  FragmentQtsl,              // qtsl: qualifierType_subject_location fragment
};

std::string to_string(Task t);
std::optional<Task> task_from(std::string_view s);

/// Retrieval vector for one query under a task. `location` is the resolved
/// location token (used by q+l; ignored by fragment tasks, which read the
/// extraction). Fragment tasks need `extraction`; a missing required piece
/// raises NoMatchableFragment, a pruned token raises TokenNotFound.
std::vector<double> compose_query_vector(const embed::EmbeddingModel& m, Task task,
                                         const std::string& query_text,
                                         const std::optional<std::string>& location,
                                         const tagger::ExtractionSet* extraction);

struct ColdStartResult {
  std::vector<double> vector;
  tagger::FragmentToken::Form form;
};

/// Walks the extraction's fragments in priority order and returns the first
/// whose tokens are all in the vocabulary; NoMatchableFragment if none is.
ColdStartResult cold_start_lookup(const embed::EmbeddingModel& m,
                                  const tagger::ExtractionSet& ext);

struct KeywordReport {
  std::vector<Neighbor> neighbors;                      // nearest QUERY tokens
  std::vector<std::pair<std::string, int>> keywords;    // word -> frequency
};

/// The n_neighbors nearest QUERY tokens of `vec` and the most frequent words
/// of their surface forms (count descending, then word ascending).
KeywordReport neighbor_keywords(const embed::EmbeddingModel& m, std::span<const double> vec,
                                int n_neighbors, int n_keywords);

}  // namespace w2v::retrieval
