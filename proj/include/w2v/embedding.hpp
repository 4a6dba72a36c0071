#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "w2v/geo.hpp"
#include "w2v/session.hpp"
#include "w2v/tagger.hpp"
#include "w2v/util.hpp"

namespace w2v::embed {

enum class TokenKind : int { Query = 0, Slc, Ad, Loc, Fragment, Subject };
inline constexpr int kNumKinds = 6;

std::string to_string(TokenKind k);
std::optional<TokenKind> token_kind_from(std::string_view s);

enum class Variant { s2v, gw2v, lw2v, lw2v_plus, lw2v_crf_plus };

std::string to_string(Variant v);
std::optional<Variant> variant_from(std::string_view s);

struct EmptyCorpus : std::runtime_error {
  EmptyCorpus() : std::runtime_error("no trainable tokens survive vocabulary construction") {}
};

struct TrainConfig {
  int dim = 100;
  int window = 5;
  int negatives = 5;
  int epochs = 5;
  double lr_initial = 0.025;
  double lr_final = 1e-4;
  std::uint64_t min_count = 2;
  double negative_power = 0.75;
  double subsample = 0.0;  // frequent-token subsampling threshold; 0 = off
  bool implicit_negatives = true;
  int workers = 1;
  std::uint64_t seed = 1;
};

// ---------------------------------------------------------------------------
// Vocabulary
// ---------------------------------------------------------------------------

struct VocabEntry {
  TokenKind kind = TokenKind::Query;
  std::string token;
  std::uint64_t count = 0;
};

/// Token table keyed by (kind, token) — the same surface string may exist
/// under several kinds. Ids are dense and follow first-insertion order, which
/// keeps every downstream RNG consumer deterministic.
class Vocabulary {
 public:
  int add(TokenKind kind, std::string_view token, std::uint64_t count_inc = 1);
  std::optional<int> find(TokenKind kind, std::string_view token) const;
  const VocabEntry& entry(int id) const { return entries_[static_cast<std::size_t>(id)]; }
  int size() const { return static_cast<int>(entries_.size()); }
  std::uint64_t total_count() const { return total_count_; }
  /// Drops tokens with count < min_count; survivors keep their relative order.
  void prune(std::uint64_t min_count);

 private:
  static std::string key(TokenKind kind, std::string_view token);
  std::vector<VocabEntry> entries_;
  std::unordered_map<std::string, int> index_;
  std::uint64_t total_count_ = 0;
};

/// Unigram sampler over count^power, restricted to one token kind per draw.
class NegativeSampler {
 public:
  NegativeSampler(const Vocabulary& vocab, double power);

  /// Draws a token of `kind`, rejecting anything in `exclude` for up to 100
  /// attempts before giving up (nullopt also when the kind has no mass).
  std::optional<int> sample(TokenKind kind, std::span<const int> exclude,
                            std::mt19937_64& rng) const;

  /// Sampling probability of id within its kind (0 when absent); test hook.
  double probability(TokenKind kind, int id) const;

 private:
  struct KindTable {
    std::vector<int> ids;
    std::vector<double> cumulative;
    double total = 0.0;
  };
  std::array<KindTable, kNumKinds> tables_;
};

// ---------------------------------------------------------------------------
// Examples
// ---------------------------------------------------------------------------

/// One (center set, context set) pair. Sets hold vocabulary ids; the first
/// id is the primary token (query/subject/fragment), any additional ids are
/// composition members whose input vectors are summed.
struct TrainingExample {
  std::vector<int> center;
  std::vector<int> context;
  bool positive = true;
  bool operator==(const TrainingExample&) const = default;
};

/// Supplies per-query extraction sets to lw2v_crf_plus training/evaluation.
class ExtractionProvider {
 public:
  virtual ~ExtractionProvider() = default;
  virtual std::optional<tagger::ExtractionSet> extract(const session::SessionEvent& ev) const = 0;
};

/// Tagger-backed extraction. When the tagged query has no in-text location,
/// the event's resolved location (if below state level) fills the slot, so
/// implicit queries still produce located fragments.
class TaggerExtractionProvider : public ExtractionProvider {
 public:
  TaggerExtractionProvider(const tagger::TaggerModel* model, const tagger::Lexicon* lexicon,
                           const tagger::Gazetteer* gazetteer,
                           const geo::LocationResolver* resolver)
      : model_(model), lexicon_(lexicon), gazetteer_(gazetteer), resolver_(resolver) {}
  std::optional<tagger::ExtractionSet> extract(const session::SessionEvent& ev) const override;

 private:
  const tagger::TaggerModel* model_;
  const tagger::Lexicon* lexicon_;
  const tagger::Gazetteer* gazetteer_;
  const geo::LocationResolver* resolver_;
};

/// Fixed query-text → extraction map (test hook).
class MapExtractionProvider : public ExtractionProvider {
 public:
  std::unordered_map<std::string, tagger::ExtractionSet> by_query;
  std::optional<tagger::ExtractionSet> extract(const session::SessionEvent& ev) const override {
    auto it = by_query.find(ev.token);
    if (it == by_query.end()) return std::nullopt;
    return it->second;
  }
};

/// (kind, token) pair before vocabulary lookup.
struct TokenRef {
  TokenKind kind;
  std::string text;
  bool operator==(const TokenRef&) const = default;
};

/// Variant-expanded view of one event: how it participates in skip-gram
/// pairs. Entries are alternative compositional sets (only lw2v_crf_plus has
/// more than one); members are summed, primary token first.
struct EventPlan {
  session::EventKind kind = session::EventKind::Query;
  std::optional<int> position;
  TokenRef raw;
  bool trainable = false;  // AdViews only feed implicit negatives
  std::vector<std::vector<TokenRef>> center;
  std::vector<std::vector<TokenRef>> context;
};

struct SessionPlan {
  std::vector<EventPlan> events;
};

SessionPlan plan_session(const session::Session& s, Variant variant,
                         const geo::LocationResolver* resolver,
                         const ExtractionProvider* extractor);

/// Id-level session, flattened for the training loop.
struct EncodedSession {
  std::vector<int> pool;  // entry members, back to back
  struct Entry {
    std::uint32_t begin = 0, end = 0;  // into pool
  };
  std::vector<Entry> entries;
  struct Event {
    std::uint32_t center_begin = 0, center_end = 0;    // into entries
    std::uint32_t context_begin = 0, context_end = 0;  // into entries
  };
  std::vector<Event> seq;
  struct Negative {
    std::uint32_t center_begin = 0, center_end = 0;  // into entries
    int view_id = -1;
  };
  std::vector<Negative> negatives;
};

/// When subsample > 0, frequent trainable events are dropped from the
/// positive sequence with the usual sqrt-threshold formula; the decision is a
/// pure hash of (seed, session_id, event index) so repeated passes agree.
EncodedSession encode_session(const SessionPlan& plan, const Vocabulary& vocab,
                              bool implicit_negatives, double subsample = 0.0,
                              std::uint64_t seed = 0, std::string_view session_id = {});

/// Number of examples one pass over the session emits.
std::uint64_t count_examples(const EncodedSession& s, int window);

/// Emits every example of one pass: ordered window pairs left to right, then
/// the session's implicit negatives. fn(center, context, positive).
template <typename Fn>
void for_each_example(const EncodedSession& s, int window, Fn&& fn) {
  auto entry_span = [&](const EncodedSession::Entry& e) {
    return std::span<const int>(s.pool.data() + e.begin, e.end - e.begin);
  };
  std::int64_t n = static_cast<std::int64_t>(s.seq.size());
  for (std::int64_t m = 0; m < n; ++m) {
    const auto& ev = s.seq[m];
    for (std::int64_t off = -window; off <= window; ++off) {
      if (off == 0) continue;
      std::int64_t j = m + off;
      if (j < 0 || j >= n) continue;
      const auto& ctx_ev = s.seq[j];
      for (std::uint32_t ce = ev.center_begin; ce < ev.center_end; ++ce)
        for (std::uint32_t xe = ctx_ev.context_begin; xe < ctx_ev.context_end; ++xe)
          fn(entry_span(s.entries[ce]), entry_span(s.entries[xe]), true);
    }
  }
  for (const auto& neg : s.negatives) {
    std::span<const int> view(&neg.view_id, 1);
    for (std::uint32_t ce = neg.center_begin; ce < neg.center_end; ++ce)
      fn(entry_span(s.entries[ce]), view, false);
  }
}

/// Vocabulary over raw session tokens plus every variant-specific token
/// (locations, fragments, subjects) the plans introduce, pruned by min_count.
Vocabulary build_vocabulary(const std::vector<session::Session>& sessions, Variant variant,
                            const TrainConfig& config, const geo::LocationResolver* resolver,
                            const ExtractionProvider* extractor);

/// All examples one pass over `s` emits under `vocab` (test-friendly form of
/// the streaming pipeline).
std::vector<TrainingExample> generate_examples(const session::Session& s, Variant variant,
                                               const TrainConfig& config, const Vocabulary& vocab,
                                               const geo::LocationResolver* resolver,
                                               const ExtractionProvider* extractor);

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

struct EmbeddingModel {
  Variant variant = Variant::s2v;
  int dim = 0;
  Vocabulary vocab;
  std::vector<double> input;   // vocab.size() x dim, the retrieval vectors
  std::vector<double> output;  // context table

  double* in(int id) { return input.data() + static_cast<std::size_t>(id) * dim; }
  const double* in(int id) const { return input.data() + static_cast<std::size_t>(id) * dim; }
  double* out(int id) { return output.data() + static_cast<std::size_t>(id) * dim; }
  const double* out(int id) const { return output.data() + static_cast<std::size_t>(id) * dim; }

  /// Inputs uniform in [-0.5/dim, 0.5/dim), outputs zero.
  void init_weights(std::uint64_t seed);

  /// Text format, 9 significant digits per component:
  ///   WORLD2VEC 1 <variant> <dim> <vocab_size>
  ///   kind <TAB> token <TAB> f_1 .. f_d   (input vectors, id order)
  ///   #OUTPUT
  ///   kind <TAB> token <TAB> f_1 .. f_d   (output vectors)
  void save(std::ostream& out) const;
  static EmbeddingModel load(std::istream& in);
};

double sigmoid(double x);

/// (sum of center input vectors) . (sum of context output vectors)
double score(const EmbeddingModel& m, std::span<const int> center, std::span<const int> context);

/// Full-softmax probability of `target` as context of the center set.
double softmax_prob(const EmbeddingModel& m, std::span<const int> center, int target);

/// One negative-sampling SGD update with coefficient (t - sigma(s)) * lr.
/// Output vectors move along the center sum; center inputs move along the
/// context sum snapshotted before the output update.
void sgd_step(EmbeddingModel& m, std::span<const int> center, std::span<const int> context,
              bool positive, double lr);

struct TrainStats {
  std::uint64_t examples = 0;            // positives + implicit negatives, all epochs
  std::uint64_t implicit_negatives = 0;  // subset of the above
  std::uint64_t sampled_negatives = 0;
  int vocab_size = 0;
};

/// Full training pipeline. Deterministic for workers == 1; more workers run
/// hogwild-style over a shared model (racy lock-free updates by design).
EmbeddingModel train(const std::vector<session::Session>& sessions, Variant variant,
                     const TrainConfig& config, const geo::LocationResolver* resolver = nullptr,
                     const ExtractionProvider* extractor = nullptr, TrainStats* stats = nullptr);

}  // namespace w2v::embed
