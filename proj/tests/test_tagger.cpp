#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "w2v/tagger.hpp"

using namespace w2v;
using namespace w2v::tagger;

namespace {

/// Independent decoding oracle: enumerate EVERY BIO-valid tag sequence in
/// lexicographic tag-enum order and keep the strictly best score, so ties
/// resolve to the lexicographically smallest sequence — exactly the decode
/// contract, checked without any dynamic programming.
std::vector<Tag> oracle_viterbi(const std::vector<std::string>& tokens, const TaggerModel& m) {
  std::size_t n = tokens.size();
  std::vector<std::array<double, kNumTags>> emit(n);
  for (std::size_t i = 0; i < n; ++i) {
    emit[i].fill(0.0);
    for (const std::string& f : features_at(tokens, i))
      for (int t = 0; t < kNumTags; ++t) emit[i][t] += m.emission(f, static_cast<Tag>(t));
  }

  std::vector<Tag> cur(n), best;
  double best_score = -std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, double)> rec = [&](std::size_t i, double score) {
    if (i == n) {
      if (score > best_score) {
        best_score = score;
        best = cur;
      }
      return;
    }
    for (int t = 0; t < kNumTags; ++t) {
      Tag tag = static_cast<Tag>(t);
      std::optional<Tag> prev = i ? std::make_optional(cur[i - 1]) : std::nullopt;
      if (!transition_valid(prev, tag)) continue;
      cur[i] = tag;
      rec(i + 1, score + emit[i][t] + (i ? m.transition(cur[i - 1], tag) : 0.0));
    }
  };
  rec(0, 0.0);
  return best;
}

double unit(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

/// Random tokens over a tiny alphabet (one all-digit token to hit the digit
/// feature), plus a model whose weights cover every feature those tokens fire.
std::vector<std::string> random_tokens(std::mt19937_64& rng, std::size_t len) {
  static const std::vector<std::string> kAlphabet = {"a", "bb", "ccc", "42", "x1"};
  std::vector<std::string> toks(len);
  for (auto& t : toks) t = kAlphabet[std::size_t(unit(rng) * kAlphabet.size()) % kAlphabet.size()];
  return toks;
}

TaggerModel random_model(std::mt19937_64& rng, const std::vector<std::string>& tokens,
                         bool quantized) {
  TaggerModel m;
  std::set<std::string> feats;
  for (std::size_t i = 0; i < tokens.size(); ++i)
    for (const std::string& f : features_at(tokens, i)) feats.insert(f);
  auto draw = [&]() -> double {
    if (quantized) return double(int(unit(rng) * 5.0) - 2);  // {-2,-1,0,1,2}: exact ties abound
    return unit(rng) * 2.0 - 1.0;
  };
  for (const std::string& f : feats)
    for (int t = 0; t < kNumTags; ++t) m.add_emission(f, static_cast<Tag>(t), draw());
  for (int a = 0; a < kNumTags; ++a)
    for (int b = 0; b < kNumTags; ++b) m.add_transition(static_cast<Tag>(a), static_cast<Tag>(b), draw());
  return m;
}

bool bio_valid(const std::vector<Tag>& tags) {
  for (std::size_t i = 0; i < tags.size(); ++i) {
    std::optional<Tag> prev = i ? std::make_optional(tags[i - 1]) : std::nullopt;
    if (!transition_valid(prev, tags[i])) return false;
  }
  return true;
}

/// Marker-word corpus: each token type maps to exactly one tag, so the data
/// is linearly separable by construction (the w= feature alone suffices).
const std::string& marker_for(Tag t) {
  static const std::vector<std::string> kMarkers = {
      "orgb", "orgi", "catb", "cati", "stab", "stai", "citb", "citi", "zipb", "zipi", "oooo"};
  return kMarkers[static_cast<std::size_t>(t)];
}

TaggedQuery random_separable_query(std::mt19937_64& rng, std::size_t len) {
  TaggedQuery q;
  for (std::size_t i = 0; i < len; ++i) {
    std::vector<Tag> valid;
    std::optional<Tag> prev = q.tags.empty() ? std::nullopt : std::make_optional(q.tags.back());
    for (int t = 0; t < kNumTags; ++t)
      if (transition_valid(prev, static_cast<Tag>(t))) valid.push_back(static_cast<Tag>(t));
    Tag tag = valid[std::size_t(unit(rng) * valid.size()) % valid.size()];
    q.tags.push_back(tag);
    q.tokens.push_back(marker_for(tag));
  }
  return q;
}

std::vector<TaggedQuery> separable_corpus(std::mt19937_64& rng, std::size_t n) {
  std::vector<TaggedQuery> corpus;
  for (std::size_t i = 0; i < n; ++i)
    corpus.push_back(random_separable_query(rng, 1 + std::size_t(unit(rng) * 7.0) % 7));
  return corpus;
}

/// Small corpus with planted token→tag patterns covering every span kind.
std::vector<TaggedQuery> planted_corpus() {
  using T = Tag;
  return {
      {{"hotels", "in", "new", "york"}, {T::B_CAT, T::O, T::B_LOC_CITY, T::I_LOC_CITY}},
      {{"restaurants", "in", "san", "francisco"}, {T::B_CAT, T::O, T::B_LOC_CITY, T::I_LOC_CITY}},
      {{"best", "hotels", "in", "boston"}, {T::O, T::B_CAT, T::O, T::B_LOC_CITY}},
      {{"macys", "inc", "in", "new", "york"}, {T::B_ORG, T::I_ORG, T::O, T::B_LOC_CITY, T::I_LOC_CITY}},
      {{"hotels", "in", "94040"}, {T::B_CAT, T::O, T::B_LOC_ZIP}},
      {{"hotels", "in", "california"}, {T::B_CAT, T::O, T::B_LOC_STATE}},
      {{"cheap", "flights"}, {T::O, T::B_CAT}},
      {{"restaurants", "in", "boston"}, {T::B_CAT, T::O, T::B_LOC_CITY}},
      {{"flights", "to", "new", "york"}, {T::B_CAT, T::O, T::B_LOC_CITY, T::I_LOC_CITY}},
      {{"macys", "inc", "opening", "hours"}, {T::B_ORG, T::I_ORG, T::O, T::O}},
  };
}

Lexicon demo_lexicon() {
  Lexicon lex;
  lex.add_qualifier("best", QualifierType::Superlative);
  lex.add_qualifier("cheap", QualifierType::Price);
  lex.add_qualifier("near", QualifierType::Proximity);
  lex.add_attribute("opening hours");
  lex.add_attribute("open now");
  lex.add_exclusion("near me");
  return lex;
}

}  // namespace

TEST_CASE("tokenize_query lowercases, splits and strips edge punctuation") {
  CHECK(tokenize_query("Best Hotels in New York!") ==
        std::vector<std::string>{"best", "hotels", "in", "new", "york"});
  CHECK(tokenize_query("") == std::vector<std::string>{});
  CHECK(tokenize_query("macy's mountain view") ==
        std::vector<std::string>{"macy's", "mountain", "view"});
  CHECK(tokenize_query("  (cheap)\tFLIGHTS  to--  ") ==
        std::vector<std::string>{"cheap", "flights", "to"});
  CHECK(tokenize_query("!!! ...") == std::vector<std::string>{});    // pure punctuation drops
  CHECK(tokenize_query("94040,") == std::vector<std::string>{"94040"});
  CHECK(tokenize_query("caf\xc3\xa9!") == std::vector<std::string>{"caf\xc3\xa9"});
}

TEST_CASE("transition_valid enforces BIO adjacency") {
  // Sequence starts: any B-x or O, never I-x.
  CHECK(transition_valid(std::nullopt, Tag::B_ORG));
  CHECK(transition_valid(std::nullopt, Tag::O));
  CHECK_FALSE(transition_valid(std::nullopt, Tag::I_ORG));
  CHECK_FALSE(transition_valid(std::nullopt, Tag::I_LOC_ZIP));
  // I-x needs the matching B-x or I-x immediately before.
  CHECK(transition_valid(Tag::B_ORG, Tag::I_ORG));
  CHECK(transition_valid(Tag::I_ORG, Tag::I_ORG));
  CHECK_FALSE(transition_valid(Tag::B_CAT, Tag::I_ORG));
  CHECK_FALSE(transition_valid(Tag::O, Tag::I_CAT));
  CHECK_FALSE(transition_valid(Tag::B_LOC_CITY, Tag::I_LOC_STATE));
  // Everything else is free.
  CHECK(transition_valid(Tag::I_ORG, Tag::B_CAT));
  CHECK(transition_valid(Tag::B_ORG, Tag::B_ORG));
  CHECK(transition_valid(Tag::O, Tag::O));
}

TEST_CASE("tag names round-trip through to_string/tag_from") {
  for (int t = 0; t < kNumTags; ++t) {
    Tag tag = static_cast<Tag>(t);
    auto back = tag_from(to_string(tag));
    REQUIRE(back.has_value());
    CHECK(*back == tag);
  }
  CHECK(to_string(Tag::B_LOC_CITY) == "B-LOC-CITY");
  CHECK(to_string(Tag::O) == "O");
  CHECK_FALSE(tag_from("B-FOO").has_value());
  CHECK_FALSE(tag_from("b-org").has_value());
}

TEST_CASE("features_at fires the fixed template") {
  std::vector<std::string> toks = {"ab", "42", "cdef"};
  CHECK(features_at(toks, 0).size() == 6);  // token, shape, prev, next, pre3, suf3
  CHECK(features_at(toks, 1).size() == 7);  // + all-digit flag
  // Same token in different contexts fires different feature sets.
  std::vector<std::string> a = {"x", "ab"}, b = {"y", "ab"};
  CHECK(features_at(a, 1) != features_at(b, 1));
  // Deterministic.
  CHECK(features_at(toks, 2) == features_at(toks, 2));
}

TEST_CASE("score_sequence matches a hand-computed sum") {
  TaggerModel m;
  m.add_emission("w=a", Tag::B_ORG, 0.5);
  m.add_emission("pre3=a", Tag::B_ORG, 0.25);
  m.add_emission("w=b", Tag::I_ORG, 1.0);
  m.add_transition(Tag::B_ORG, Tag::I_ORG, 2.0);
  // Position 0 fires w=a and pre3=a for B-ORG; position 1 fires w=b for I-ORG;
  // one transition B-ORG→I-ORG.
  double s = m.score_sequence({"a", "b"}, {Tag::B_ORG, Tag::I_ORG});
  CHECK(s == doctest::Approx(0.5 + 0.25 + 2.0 + 1.0).epsilon(1e-15));
  // BIO-invalid sequences score -inf.
  double bad = m.score_sequence({"a", "b"}, {Tag::O, Tag::I_ORG});
  CHECK(std::isinf(bad));
  CHECK(bad < 0);
}

TEST_CASE("all-zero model decodes to B-ORG under the tie-break") {
  TaggerModel zero;
  CHECK(viterbi_decode({"anything"}, zero) == std::vector<Tag>{Tag::B_ORG});
  CHECK(viterbi_decode({"a", "b", "c"}, zero) ==
        std::vector<Tag>{Tag::B_ORG, Tag::B_ORG, Tag::B_ORG});
  CHECK(viterbi_decode({"a", "b", "c"}, zero) == oracle_viterbi({"a", "b", "c"}, zero));
}

TEST_CASE("viterbi_decode rejects empty input") {
  TaggerModel zero;
  CHECK_THROWS_AS(viterbi_decode({}, zero), EmptyInput);
}

TEST_CASE("viterbi_decode equals exhaustive enumeration on random models") {
  std::mt19937_64 rng(20260822);
  for (int trial = 0; trial < 150; ++trial) {
    std::size_t len = 1 + std::size_t(unit(rng) * 6.0) % 6;
    auto tokens = random_tokens(rng, len);
    TaggerModel m = random_model(rng, tokens, /*quantized=*/false);
    auto got = viterbi_decode(tokens, m);
    CHECK(got == oracle_viterbi(tokens, m));
    CHECK(bio_valid(got));
  }
}

TEST_CASE("viterbi_decode tie-break matches enumeration on quantized models") {
  // Integer weights make exact score ties common, so the lexicographic
  // tie-break is exercised for real.
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 150; ++trial) {
    std::size_t len = 1 + std::size_t(unit(rng) * 6.0) % 6;
    auto tokens = random_tokens(rng, len);
    TaggerModel m = random_model(rng, tokens, /*quantized=*/true);
    auto got = viterbi_decode(tokens, m);
    CHECK(got == oracle_viterbi(tokens, m));
    CHECK(bio_valid(got));
  }
}

TEST_CASE("decoded output is always BIO-valid even on adversarial transitions") {
  // Reward invalid-looking paths heavily: decode must still refuse them.
  TaggerModel m;
  for (int t = 0; t < kNumTags; ++t) {
    m.add_transition(Tag::O, static_cast<Tag>(t), 100.0);
    m.add_emission("w=a", static_cast<Tag>(t), t == static_cast<int>(Tag::I_CAT) ? 1000.0 : 0.0);
  }
  auto tags = viterbi_decode({"a", "a", "a"}, m);
  CHECK(bio_valid(tags));
}

TEST_CASE("tagger trained on one dominant tag predicts it everywhere") {
  for (Tag dominant : {Tag::O, Tag::B_CAT}) {
    std::vector<TaggedQuery> corpus;
    std::vector<std::string> words = {"alpha", "beta", "gamma", "delta"};
    for (std::size_t i = 0; i < words.size(); ++i) {
      TaggedQuery q;
      for (std::size_t j = 0; j <= i; ++j) {
        q.tokens.push_back(words[(i + j) % words.size()]);
        q.tags.push_back(dominant);
      }
      corpus.push_back(q);
    }
    TaggerTrainReport report;
    TaggerModel m = train_tagger(corpus, 5, &report);
    CHECK(report.train_token_accuracy == 1.0);
    for (const TaggedQuery& q : corpus)
      CHECK(viterbi_decode(q.tokens, m) == q.tags);
  }
}

TEST_CASE("tagger reaches 100% training accuracy on a separable corpus within 10 epochs") {
  std::mt19937_64 rng(99);
  auto corpus = separable_corpus(rng, 60);
  TaggerTrainReport report;
  TaggerModel m = train_tagger(corpus, 10, &report);
  CHECK(report.train_token_accuracy == 1.0);
  REQUIRE(report.mistakes_per_epoch.size() == 10);
  CHECK(report.mistakes_per_epoch.back() == 0);
}

TEST_CASE("mistake count stays at zero once training converges") {
  std::mt19937_64 rng(123);
  auto corpus = separable_corpus(rng, 40);
  TaggerTrainReport report;
  train_tagger(corpus, 14, &report);
  auto& mpe = report.mistakes_per_epoch;
  auto first_zero = std::find(mpe.begin(), mpe.end(), std::uint64_t{0});
  REQUIRE(first_zero != mpe.end());  // separable ⇒ perceptron converges
  for (auto it = first_zero; it != mpe.end(); ++it) CHECK(*it == 0);
}

TEST_CASE("train_tagger rejects an empty corpus") {
  CHECK_THROWS_AS(train_tagger({}, 3), ParseError);
}

TEST_CASE("per-tag precision/recall on a held-out split") {
  std::mt19937_64 rng(5);
  auto train = separable_corpus(rng, 80);
  auto heldout = separable_corpus(rng, 25);
  TaggerModel m = train_tagger(train, 10);

  auto prf = per_tag_prf(m, heldout);
  std::set<Tag> gold_tags;
  for (const TaggedQuery& q : heldout)
    for (Tag t : q.tags) gold_tags.insert(t);

  // Marker words force a perfect model, so every reported row is exact and
  // exactly the gold tag set appears.
  std::set<Tag> reported;
  for (const TagPrf& row : prf) {
    reported.insert(row.tag);
    CHECK(row.gold > 0);
    CHECK(row.correct <= row.gold);
    CHECK(row.correct <= row.predicted);
    CHECK(row.precision == doctest::Approx(1.0));
    CHECK(row.recall == doctest::Approx(1.0));
  }
  CHECK(reported == gold_tags);
}

TEST_CASE("per-tag rows bound precision and recall on an imperfect model") {
  // All-zero model predicts B-ORG everywhere: B-ORG has low precision,
  // every other tag has zero recall, and all values stay within [0,1].
  std::mt19937_64 rng(17);
  auto corpus = separable_corpus(rng, 30);
  TaggerModel zero;
  auto prf = per_tag_prf(zero, corpus);
  bool saw_borg = false;
  for (const TagPrf& row : prf) {
    CHECK(row.precision >= 0.0);
    CHECK(row.precision <= 1.0);
    CHECK(row.recall >= 0.0);
    CHECK(row.recall <= 1.0);
    if (row.tag == Tag::B_ORG) {
      saw_borg = true;
      CHECK(row.predicted > row.gold);  // predicted everywhere
    } else {
      CHECK(row.predicted == 0);
      CHECK(row.recall == 0.0);
    }
  }
  CHECK(saw_borg);
}

TEST_CASE("trained model tags the planted city query correctly") {
  TaggerModel m = train_tagger(planted_corpus(), 10);
  CHECK(viterbi_decode({"hotels", "in", "new", "york"}, m) ==
        std::vector<Tag>{Tag::B_CAT, Tag::O, Tag::B_LOC_CITY, Tag::I_LOC_CITY});
}

TEST_CASE("tagged corpus save/load round-trips") {
  std::mt19937_64 rng(31);
  auto corpus = separable_corpus(rng, 20);
  corpus.push_back(planted_corpus()[3]);  // multi-span ORG + CITY query

  std::stringstream ss;
  save_tagged_corpus(corpus, ss);
  auto back = load_tagged_corpus(ss);
  REQUIRE(back.size() == corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    CHECK(back[i].tokens == corpus[i].tokens);
    CHECK(back[i].tags == corpus[i].tags);
  }
}

TEST_CASE("tagged corpus loader reports malformed input with line numbers") {
  SUBCASE("orphan I-tag") {
    std::stringstream ss("hello\tI-ORG\n");
    CHECK_THROWS_AS(load_tagged_corpus(ss), InvalidTagSequence);
  }
  SUBCASE("I-tag after mismatched B-tag, exact line") {
    std::stringstream ss("a\tB-ORG\nb\tI-ORG\n\nc\tB-CAT\nd\tI-ORG\n");
    try {
      load_tagged_corpus(ss);
      FAIL("expected InvalidTagSequence");
    } catch (const InvalidTagSequence& e) {
      CHECK(e.line == 5);
    }
  }
  SUBCASE("blank line resets the BIO context") {
    // I-ORG right after a blank line starts a new query, so it is orphaned
    // even though the previous query ended in B-ORG.
    std::stringstream ss("a\tB-ORG\n\nb\tI-ORG\n");
    CHECK_THROWS_AS(load_tagged_corpus(ss), InvalidTagSequence);
  }
  SUBCASE("wrong column count") {
    std::stringstream ss("only-one-column\n");
    try {
      load_tagged_corpus(ss);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line == 1);
    }
  }
  SUBCASE("unknown tag") {
    std::stringstream ss("a\tB-ORG\nb\tB-FOO\n");
    try {
      load_tagged_corpus(ss);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line == 2);
    }
  }
}

TEST_CASE("tagger model save/load round-trips exactly") {
  std::mt19937_64 rng(77);
  auto corpus = separable_corpus(rng, 30);
  TaggerModel m = train_tagger(corpus, 6);

  std::stringstream ss;
  m.save(ss);
  TaggerModel back = TaggerModel::load(ss);

  // %.17g serialization round-trips doubles exactly.
  for (const auto& [feature, weights] : m.emissions())
    for (int t = 0; t < kNumTags; ++t)
      CHECK(back.emission(feature, static_cast<Tag>(t)) == weights[t]);
  for (int a = 0; a < kNumTags; ++a)
    for (int b = 0; b < kNumTags; ++b)
      CHECK(back.transition(static_cast<Tag>(a), static_cast<Tag>(b)) ==
            m.transition(static_cast<Tag>(a), static_cast<Tag>(b)));

  // And therefore decodes identically.
  for (int trial = 0; trial < 20; ++trial) {
    auto q = random_separable_query(rng, 1 + std::size_t(unit(rng) * 6.0) % 6);
    CHECK(viterbi_decode(q.tokens, back) == viterbi_decode(q.tokens, m));
  }
}

TEST_CASE("tagger model loader rejects bad files") {
  {
    std::stringstream ss("");
    CHECK_THROWS_AS(TaggerModel::load(ss), ParseError);
  }
  {
    std::stringstream ss("NOT-A-TAGGER\n");
    CHECK_THROWS_AS(TaggerModel::load(ss), ParseError);
  }
  {
    std::stringstream ss("TAGGER 1\nF\tw=a\tB-FOO\t1.0\n");
    CHECK_THROWS_AS(TaggerModel::load(ss), ParseError);
  }
  {
    std::stringstream ss("TAGGER 1\nF\tw=a\tB-ORG\tnotanumber\n");
    CHECK_THROWS_AS(TaggerModel::load(ss), ParseError);
  }
  {
    std::stringstream ss("TAGGER 1\nX\tjunk\n");
    CHECK_THROWS_AS(TaggerModel::load(ss), ParseError);
  }
}

TEST_CASE("match_qualifiers dictionary examples") {
  Lexicon lex = demo_lexicon();

  SUBCASE("single qualifier") {
    auto m = match_qualifiers({"best", "hotels"}, lex);
    REQUIRE(m.qualifier.has_value());
    CHECK(*m.qualifier == "best");
    CHECK(*m.qualifier_type == QualifierType::Superlative);
    CHECK(m.attributes.empty());
  }
  SUBCASE("exclusion phrase consumes its tokens") {
    // "near me" is excluded, so the shorter qualifier "near" must not fire
    // inside it.
    auto m = match_qualifiers({"coffee", "shops", "near", "me"}, lex);
    CHECK_FALSE(m.qualifier.has_value());
    CHECK_FALSE(m.qualifier_type.has_value());
  }
  SUBCASE("bare proximity word still matches outside the exclusion") {
    auto m = match_qualifiers({"coffee", "near", "downtown"}, lex);
    REQUIRE(m.qualifier.has_value());
    CHECK(*m.qualifier == "near");
    CHECK(*m.qualifier_type == QualifierType::Proximity);
  }
  SUBCASE("attributes are collected") {
    auto m = match_qualifiers({"macys", "opening", "hours"}, lex);
    CHECK_FALSE(m.qualifier.has_value());
    CHECK(m.attributes == std::vector<std::string>{"opening hours"});
  }
  SUBCASE("all attributes, in order") {
    auto m = match_qualifiers({"open", "now", "cafes", "opening", "hours"}, lex);
    CHECK(m.attributes == std::vector<std::string>{"open now", "opening hours"});
  }
  SUBCASE("first qualifier wins") {
    auto m = match_qualifiers({"best", "cheap", "hotels"}, lex);
    CHECK(*m.qualifier == "best");
    CHECK(*m.qualifier_type == QualifierType::Superlative);
  }
}

TEST_CASE("match_qualifiers prefers the longest phrase") {
  Lexicon lex;
  lex.add_qualifier("top", QualifierType::Superlative);
  lex.add_qualifier("top rated", QualifierType::Rating);
  auto m = match_qualifiers({"top", "rated", "cafes"}, lex);
  REQUIRE(m.qualifier.has_value());
  CHECK(*m.qualifier == "top rated");
  CHECK(*m.qualifier_type == QualifierType::Rating);
}

TEST_CASE("match_qualifiers never reports an exclusion phrase") {
  // Even a phrase listed as BOTH qualifier and exclusion stays suppressed.
  Lexicon lex;
  lex.add_qualifier("nearby", QualifierType::Proximity);
  lex.add_exclusion("nearby");
  auto m = match_qualifiers({"nearby", "cafes"}, lex);
  CHECK_FALSE(m.qualifier.has_value());

  // Property over random token streams: nothing reported is ever excluded.
  Lexicon big = demo_lexicon();
  big.add_exclusion("close by");
  std::vector<std::string> vocab = {"near", "me",  "close", "by",    "best",
                                    "open", "now", "cafes", "hotels"};
  std::mt19937_64 rng(271828);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> toks(1 + std::size_t(unit(rng) * 6.0) % 6);
    for (auto& t : toks) t = vocab[std::size_t(unit(rng) * vocab.size()) % vocab.size()];
    auto got = match_qualifiers(toks, big);
    if (got.qualifier) CHECK(big.exclusions.count(*got.qualifier) == 0);
    for (const std::string& a : got.attributes) CHECK(big.exclusions.count(a) == 0);
  }
}

TEST_CASE("build_extraction_tokens emits the four forms in priority order") {
  ExtractionSet ext;
  ext.subject = "hotels";
  ext.location_woeid = "woeid_2459115";
  ext.qualifier = "best";
  ext.qualifier_type = QualifierType::Superlative;

  auto toks = build_extraction_tokens(ext);
  REQUIRE(toks.size() == 4);
  CHECK(toks[0].form == FragmentToken::Form::QualifierSubjectLocation);
  CHECK_FALSE(toks[0].is_composition);
  CHECK(toks[0].parts == std::vector<std::string>{"best_hotels_woeid_2459115"});
  CHECK(toks[1].form == FragmentToken::Form::SubjectLocation);
  CHECK(toks[1].parts == std::vector<std::string>{"hotels_woeid_2459115"});
  CHECK(toks[2].form == FragmentToken::Form::SubjectPlusLocation);
  CHECK(toks[2].is_composition);
  CHECK(toks[2].parts == std::vector<std::string>{"hotels", "woeid_2459115"});
  CHECK(toks[3].form == FragmentToken::Form::QualifierTypeSubjectLocation);
  CHECK(toks[3].parts == std::vector<std::string>{"superlative_hotels_woeid_2459115"});
}

TEST_CASE("build_extraction_tokens joins multi-word parts with underscores") {
  ExtractionSet ext;
  ext.subject = "coffee shops";
  ext.location_woeid = "woeid_44418";
  ext.qualifier = "top rated";
  ext.qualifier_type = QualifierType::Rating;
  auto toks = build_extraction_tokens(ext);
  REQUIRE(toks.size() == 4);
  CHECK(toks[0].parts == std::vector<std::string>{"top_rated_coffee_shops_woeid_44418"});
  CHECK(toks[1].parts == std::vector<std::string>{"coffee_shops_woeid_44418"});
  CHECK(toks[2].parts == std::vector<std::string>{"coffee_shops", "woeid_44418"});
  CHECK(toks[3].parts == std::vector<std::string>{"rating_coffee_shops_woeid_44418"});
}

TEST_CASE("build_extraction_tokens elides missing components") {
  SUBCASE("no location: only the singleton composition survives") {
    ExtractionSet ext;
    ext.subject = "hotels";
    ext.qualifier = "best";
    ext.qualifier_type = QualifierType::Superlative;
    auto toks = build_extraction_tokens(ext);
    REQUIRE(toks.size() == 1);
    CHECK(toks[0].form == FragmentToken::Form::SubjectPlusLocation);
    CHECK(toks[0].is_composition);
    CHECK(toks[0].parts == std::vector<std::string>{"hotels"});
  }
  SUBCASE("no qualifier: forms 2 and 3 only") {
    ExtractionSet ext;
    ext.subject = "hotels";
    ext.location_woeid = "woeid_1";
    auto toks = build_extraction_tokens(ext);
    REQUIRE(toks.size() == 2);
    CHECK(toks[0].form == FragmentToken::Form::SubjectLocation);
    CHECK(toks[1].form == FragmentToken::Form::SubjectPlusLocation);
  }
  SUBCASE("no subject: nothing") {
    ExtractionSet ext;
    ext.location_woeid = "woeid_1";
    ext.qualifier = "best";
    ext.qualifier_type = QualifierType::Superlative;
    CHECK(build_extraction_tokens(ext).empty());
    CHECK(build_extraction_tokens(ExtractionSet{}).empty());
  }
}

TEST_CASE("detect_local_intent fallback") {
  Lexicon lex = demo_lexicon();
  Gazetteer gaz;
  gaz.add("new york city", "woeid_2459115");
  gaz.add("seattle", "woeid_2490383");

  CHECK(detect_local_intent({"coffee", "shops", "near", "me"}, gaz, lex) ==
        DetectedIntent::Implicit);
  CHECK(detect_local_intent({"best", "hotels", "in", "new", "york", "city"}, gaz, lex) ==
        DetectedIntent::Explicit);
  CHECK(detect_local_intent({"cheap", "flights"}, Gazetteer{}, lex) == DetectedIntent::None);
  // When both signals fire, the exclusion-set rule wins.
  CHECK(detect_local_intent({"pizza", "near", "me", "in", "seattle"}, gaz, lex) ==
        DetectedIntent::Implicit);
}

TEST_CASE("extract_from_query assembles the full extraction") {
  TaggerModel m = train_tagger(planted_corpus(), 10);
  Lexicon lex = demo_lexicon();
  Gazetteer gaz;
  gaz.add("new york", "woeid_2459115");
  gaz.add("boston", "woeid_2367105");

  SUBCASE("qualifier + category + city") {
    ExtractionSet ext = extract_from_query("Best Hotels in New York!", m, lex, gaz);
    REQUIRE(ext.subject.has_value());
    CHECK(*ext.subject == "hotels");
    REQUIRE(ext.location_woeid.has_value());
    CHECK(*ext.location_woeid == "woeid_2459115");
    REQUIRE(ext.qualifier.has_value());
    CHECK(*ext.qualifier == "best");
    CHECK(*ext.qualifier_type == QualifierType::Superlative);
  }
  SUBCASE("state-level locations never populate location_woeid") {
    Gazetteer with_state = gaz;
    with_state.add("california", "woeid_ca");
    ExtractionSet ext = extract_from_query("hotels in california", m, lex, with_state);
    CHECK(*ext.subject == "hotels");
    CHECK_FALSE(ext.location_woeid.has_value());
  }
  SUBCASE("city missing from the gazetteer leaves location empty") {
    ExtractionSet ext = extract_from_query("restaurants in san francisco", m, lex, gaz);
    CHECK(*ext.subject == "restaurants");
    CHECK_FALSE(ext.location_woeid.has_value());
  }
  SUBCASE("multi-word organization subject") {
    ExtractionSet ext = extract_from_query("macys inc in new york", m, lex, gaz);
    REQUIRE(ext.subject.has_value());
    CHECK(*ext.subject == "macys inc");
    CHECK(*ext.location_woeid == "woeid_2459115");
  }
  SUBCASE("attributes ride along") {
    ExtractionSet ext = extract_from_query("macys inc opening hours", m, lex, gaz);
    CHECK(*ext.subject == "macys inc");
    CHECK(ext.attributes == std::vector<std::string>{"opening hours"});
  }
  SUBCASE("empty query yields an empty extraction") {
    ExtractionSet ext = extract_from_query("   ", m, lex, gaz);
    CHECK(ext == ExtractionSet{});
  }
}

TEST_CASE("lexicon and gazetteer file parsing") {
  SUBCASE("lexicon happy path") {
    std::stringstream ss(
        "Best\tQUALIFIER\tsuperlative\n"
        "top rated\tQUALIFIER\trating\n"
        "open now\tATTRIBUTE\n"
        "near me\tEXCLUDE\n");
    Lexicon lex = Lexicon::load(ss);
    CHECK(lex.qualifiers.at("best") == QualifierType::Superlative);  // lowercased
    CHECK(lex.qualifiers.at("top rated") == QualifierType::Rating);
    CHECK(lex.attributes.count("open now") == 1);
    CHECK(lex.exclusions.count("near me") == 1);
    CHECK(lex.max_phrase_words == 2);
  }
  SUBCASE("lexicon errors") {
    {
      std::stringstream ss("best\tQUALIFIER\n");  // missing type
      CHECK_THROWS_AS(Lexicon::load(ss), ParseError);
    }
    {
      std::stringstream ss("best\tQUALIFIER\tshiny\n");  // unknown type
      CHECK_THROWS_AS(Lexicon::load(ss), ParseError);
    }
    {
      std::stringstream ss("best\tNOISE\n");  // unknown kind
      CHECK_THROWS_AS(Lexicon::load(ss), ParseError);
    }
  }
  SUBCASE("gazetteer happy path and errors") {
    std::stringstream ss("New York\twoeid_2459115\nsf\twoeid_sf\n");
    Gazetteer gaz = Gazetteer::load(ss);
    CHECK(gaz.find("new york") == std::optional<std::string>("woeid_2459115"));
    CHECK(gaz.find("nowhere") == std::nullopt);
    CHECK(gaz.max_phrase_words == 2);
    std::stringstream bad("onlyonecolumn\n");
    CHECK_THROWS_AS(Gazetteer::load(bad), ParseError);
  }
}
