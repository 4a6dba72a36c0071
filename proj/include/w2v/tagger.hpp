#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "w2v/util.hpp"

namespace w2v::tagger {

/// BIO tag set. Enum order doubles as the decoding tie-break order.
enum class Tag : int {
  B_ORG = 0,
  I_ORG,
  B_CAT,
  I_CAT,
  B_LOC_STATE,
  I_LOC_STATE,
  B_LOC_CITY,
  I_LOC_CITY,
  B_LOC_ZIP,
  I_LOC_ZIP,
  O,
};
inline constexpr int kNumTags = 11;

std::string to_string(Tag t);
std::optional<Tag> tag_from(std::string_view s);

/// True when `cur` may follow `prev` under BIO rules: I-x needs a same-x B/I
/// predecessor. `prev == nullopt` means start of sequence.
bool transition_valid(std::optional<Tag> prev, Tag cur);

/// Lowercases, splits on whitespace, strips punctuation from token edges
/// (interior punctuation like "macy's" is kept) and drops empty tokens.
std::vector<std::string> tokenize_query(std::string_view raw);

struct InvalidTagSequence : ParseError {
  using ParseError::ParseError;
};

/// Thrown by viterbi_decode when given no tokens.
struct EmptyInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct TaggedQuery {
  std::vector<std::string> tokens;
  std::vector<Tag> tags;
};

/// CoNLL-style corpus: `token<TAB>tag` lines, blank line between queries.
/// Gold sequences violating BIO validity raise InvalidTagSequence.
std::vector<TaggedQuery> load_tagged_corpus(std::istream& in);
void save_tagged_corpus(const std::vector<TaggedQuery>& corpus, std::ostream& out);

/// Fixed feature template for one position: current token, its lowercase
/// shape, previous token, next token, all-digit flag, 3-char prefix/suffix.
std::vector<std::string> features_at(const std::vector<std::string>& tokens, std::size_t i);

/// Linear sequence model: per-(feature, tag) emission weights plus
/// (tag, tag) transition weights. Unseen features score zero.
class TaggerModel {
 public:
  double emission(const std::string& feature, Tag t) const;
  double transition(Tag prev, Tag cur) const { return trans_[index(prev)][index(cur)]; }
  void add_emission(const std::string& feature, Tag t, double delta);
  void add_transition(Tag prev, Tag cur, double delta) { trans_[index(prev)][index(cur)] += delta; }

  double score_sequence(const std::vector<std::string>& tokens, const std::vector<Tag>& tags) const;

  void save(std::ostream& out) const;
  static TaggerModel load(std::istream& in);

  const std::unordered_map<std::string, std::array<double, kNumTags>>& emissions() const {
    return emissions_;
  }

 private:
  static int index(Tag t) { return static_cast<int>(t); }
  std::unordered_map<std::string, std::array<double, kNumTags>> emissions_;
  std::array<std::array<double, kNumTags>, kNumTags> trans_{};
  friend struct AveragedTrainer;
};

/// Exact max-score decoding with -inf on BIO-invalid transitions. Among
/// equal-scoring sequences the lexicographically smallest one (comparing tag
/// enum values left to right) wins, so an all-zero model tags B_ORG.
/// Throws EmptyInput when `tokens` is empty.
std::vector<Tag> viterbi_decode(const std::vector<std::string>& tokens, const TaggerModel& model);

struct TaggerTrainReport {
  std::vector<std::uint64_t> mistakes_per_epoch;  // token-level, pre-averaging weights
  double train_token_accuracy = 0.0;              // with the returned (averaged) model
};

/// Averaged structured perceptron. Throws ParseError on an empty corpus.
TaggerModel train_tagger(const std::vector<TaggedQuery>& corpus, int epochs,
                         TaggerTrainReport* report = nullptr);

struct TagPrf {
  Tag tag;
  std::uint64_t gold = 0, predicted = 0, correct = 0;
  double precision = 0.0, recall = 0.0;
};

/// Per-tag precision/recall of `model` on a corpus (tags absent from both
/// gold and prediction are omitted).
std::vector<TagPrf> per_tag_prf(const TaggerModel& model, const std::vector<TaggedQuery>& corpus);

// ---------------------------------------------------------------------------
// Lexicon, gazetteer and extraction
// ---------------------------------------------------------------------------

enum class QualifierType { Superlative, Proximity, Price, Rating, Recency };

std::string to_string(QualifierType t);
std::optional<QualifierType> qualifier_type_from(std::string_view s);

/// Qualifier dictionary. TSV: phrase <TAB> QUALIFIER|ATTRIBUTE|EXCLUDE
/// [<TAB> qualifier_type]. Phrases are lowercase, space-separated.
struct Lexicon {
  std::unordered_map<std::string, QualifierType> qualifiers;
  std::unordered_map<std::string, bool> attributes;
  std::unordered_map<std::string, bool> exclusions;
  std::size_t max_phrase_words = 0;

  static Lexicon load(std::istream& in);
  void add_qualifier(std::string phrase, QualifierType type);
  void add_attribute(std::string phrase);
  void add_exclusion(std::string phrase);
};

/// Location surface forms → woeid ids. TSV: surface <TAB> woeid.
struct Gazetteer {
  std::unordered_map<std::string, std::string> surface_to_woeid;
  std::size_t max_phrase_words = 0;

  static Gazetteer load(std::istream& in);
  void add(std::string surface, std::string woeid);
  std::optional<std::string> find(const std::string& surface) const;
};

struct QualifierMatch {
  std::optional<std::string> qualifier;            // first qualifier phrase
  std::optional<QualifierType> qualifier_type;
  std::vector<std::string> attributes;             // all attribute phrases, in order
};

/// Longest-match left-to-right scan over token n-grams. Exclusion phrases are
/// consumed but never reported; the first qualifier wins; every attribute is
/// collected.
QualifierMatch match_qualifiers(const std::vector<std::string>& tokens, const Lexicon& lexicon);

/// Everything extracted from one query.
struct ExtractionSet {
  std::optional<std::string> subject;         // space-separated surface form
  std::optional<std::string> location_woeid;  // only below state level
  std::optional<std::string> qualifier;
  std::optional<QualifierType> qualifier_type;
  std::vector<std::string> attributes;
  bool operator==(const ExtractionSet&) const = default;
};

/// One retrieval token derived from an extraction, either a single
/// concatenated fragment or a sum-composition over parts.
struct FragmentToken {
  enum class Form {
    QualifierSubjectLocation = 0,  // best_hotels_woeid_x
    SubjectLocation,               // hotels_woeid_x
    SubjectPlusLocation,           // {hotels} + {woeid_x} (vector sum)
    QualifierTypeSubjectLocation,  // superlative_hotels_woeid_x
  };
  Form form;
  bool is_composition = false;
  /// Concatenated token text for single forms; for the composition form the
  /// parts listed here are summed (subject token, then location token).
  std::vector<std::string> parts;
  bool operator==(const FragmentToken&) const = default;
};

/// Fragment tokens in retrieval priority order (1) qual_subj_loc,
/// (2) subj_loc, (3) {subj + loc}, (4) qualType_subj_loc. Forms whose parts
/// are missing are skipped; no subject yields an empty list.
std::vector<FragmentToken> build_extraction_tokens(const ExtractionSet& ext);

/// Rule-based intent fallback: an exclusion-set phrase ("near me") means
/// Implicit, a gazetteer location match means Explicit, otherwise None.
/// Input-file intent flags always take precedence over this fallback.
enum class DetectedIntent { None, Implicit, Explicit };
DetectedIntent detect_local_intent(const std::vector<std::string>& tokens, const Gazetteer& gaz,
                                   const Lexicon& lexicon);

/// Tags a raw query and assembles its ExtractionSet: the first ORG/CAT span
/// becomes the subject, the first below-state location span resolvable via
/// the gazetteer becomes the location, and the lexicon provides qualifiers.
ExtractionSet extract_from_query(const std::string& raw_query, const TaggerModel& model,
                                 const Lexicon& lexicon, const Gazetteer& gazetteer);

}  // namespace w2v::tagger
