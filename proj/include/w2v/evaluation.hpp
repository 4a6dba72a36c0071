#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "w2v/embedding.hpp"
#include "w2v/retrieval.hpp"
#include "w2v/session.hpp"

namespace w2v::eval {

// ---------------------------------------------------------------------------
// Ranking metrics
// ---------------------------------------------------------------------------

/// |top-min(K,|retrieved|) ∩ clicked| / K. The denominator is always K, so a
/// short result list scores its missing slots as misses.
double precision_at_k(std::span<const std::string> retrieved,
                      const std::unordered_set<std::string>& clicked, int k);

enum class Grade {
  Irrelevant = 0,
  Barely = 1,
  Somewhat = 2,
  Relevant = 3,
  Highly = 4,
  Perfect = 5,
};

std::string to_string(Grade g);
std::optional<Grade> grade_from(std::string_view s);

/// Standard graded gain, 2^grade - 1.
double default_gain(Grade g);

/// DCG@K / IDCG@K with discount 1/log2(rank+1), rank starting at 1; the
/// ideal ordering is the grades sorted descending. Defined as 1 when the
/// ideal DCG is zero.
double ndcg(std::span<const Grade> ranked, const std::function<double(Grade)>& gain, int k);
double ndcg(std::span<const Grade> ranked, int k);

// ---------------------------------------------------------------------------
// Judgments
// ---------------------------------------------------------------------------

struct Judgment {
  std::string query;
  std::string ad;
  Grade grade = Grade::Irrelevant;
  bool operator==(const Judgment&) const = default;
};

/// TSV: query <TAB> ad <TAB> grade_name. Duplicate (query, ad) pairs are a
/// ParseError (one grade per pair).
std::vector<Judgment> load_judgments(std::istream& in);
void save_judgments(std::ostream& out, const std::vector<Judgment>& judgments);

struct GradeStats {
  int count = 0;
  double mean_cosine = 0.0;
  double median_cosine = 0.0;
};

struct GradeReport {
  std::map<Grade, GradeStats> by_grade;
  int skipped = 0;  // pairs with missing tokens or zero-norm vectors
};

/// Groups cosine(v_query, v_ad) by grade (input vectors). Pairs whose tokens
/// are missing or degenerate are skipped and counted.
GradeReport score_by_grade(const embed::EmbeddingModel& model,
                           const std::vector<Judgment>& judgments);

struct NdcgReport {
  double mean = 0.0;
  int queries = 0;          // queries contributing to the mean
  int skipped_queries = 0;  // no usable query vector or no usable judged ad
  int skipped_pairs = 0;    // judged ads missing from the vocabulary
};

/// Ranks each query's judged ads by cosine (ties by ad token) and averages
/// NDCG@K over queries.
NdcgReport evaluate_ndcg(const embed::EmbeddingModel& model,
                         const std::vector<Judgment>& judgments, int k);

// ---------------------------------------------------------------------------
// Click-log task evaluation
// ---------------------------------------------------------------------------

inline constexpr int kDefaultKs[] = {1, 2, 3, 5, 10};

struct SliceResult {
  int queries = 0;       // local queries with >= 1 click in their block
  int unresolvable = 0;  // no vector even via fallback; they score 0
  std::map<int, double> precision_at;
};

struct TaskReport {
  retrieval::Task task = retrieval::Task::QueryToAd;
  SliceResult implicit_slice;
  SliceResult explicit_slice;
  SliceResult overall;
};

/// Scores every local query that has at least one AdClick in its block:
/// composes the task's vector (falling back to cold_start_lookup when the
/// extraction provider yields fragments), retrieves top max(ks) ads and
/// averages precision@K with clicked ads as the relevant set, split by
/// intent. Unresolvable queries stay in the denominator.
TaskReport evaluate_task(const embed::EmbeddingModel& model, const retrieval::AdIndex& index,
                         const std::vector<session::Session>& test_sessions, retrieval::Task task,
                         std::span<const int> ks, const geo::LocationResolver* resolver = nullptr,
                         const embed::ExtractionProvider* extractor = nullptr);

/// Umbrella report mirroring one row group of the published tables.
struct EvalReport {
  TaskReport task;
  std::optional<NdcgReport> ndcg;
  std::optional<GradeReport> grades;
};

/// Renders the report as TSV (machine half) followed by an aligned table.
void print_report(std::ostream& out, const EvalReport& report);

}  // namespace w2v::eval
