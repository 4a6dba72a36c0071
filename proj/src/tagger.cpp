#include "w2v/tagger.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>

namespace w2v::tagger {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

std::string to_string(Tag t) {
  switch (t) {
    case Tag::B_ORG: return "B-ORG";
    case Tag::I_ORG: return "I-ORG";
    case Tag::B_CAT: return "B-CAT";
    case Tag::I_CAT: return "I-CAT";
    case Tag::B_LOC_STATE: return "B-LOC-STATE";
    case Tag::I_LOC_STATE: return "I-LOC-STATE";
    case Tag::B_LOC_CITY: return "B-LOC-CITY";
    case Tag::I_LOC_CITY: return "I-LOC-CITY";
    case Tag::B_LOC_ZIP: return "B-LOC-ZIP";
    case Tag::I_LOC_ZIP: return "I-LOC-ZIP";
    case Tag::O: return "O";
  }
  return "?";
}

std::optional<Tag> tag_from(std::string_view s) {
  for (int i = 0; i < kNumTags; ++i) {
    Tag t = static_cast<Tag>(i);
    if (s == to_string(t)) return t;
  }
  return std::nullopt;
}

bool transition_valid(std::optional<Tag> prev, Tag cur) {
  int c = static_cast<int>(cur);
  bool inside = c < static_cast<int>(Tag::O) && (c % 2 == 1);  // I-x tags sit at odd slots
  if (!inside) return true;
  if (!prev) return false;
  int p = static_cast<int>(*prev);
  return p == c || p == c - 1;  // same I-x, or the matching B-x
}

namespace {

/// Edge punctuation = ASCII non-alphanumerics. Multibyte UTF-8 and anything
/// interior ("macy's") is left alone.
bool edge_punct(unsigned char c) {
  if (c >= 0x80) return false;
  bool alnum = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
  return !alnum;
}

void push_token(std::vector<std::string>& tokens, std::string cur) {
  std::size_t b = 0, e = cur.size();
  while (b < e && edge_punct(static_cast<unsigned char>(cur[b]))) ++b;
  while (e > b && edge_punct(static_cast<unsigned char>(cur[e - 1]))) --e;
  if (b < e) tokens.push_back(cur.substr(b, e - b));
}

}  // namespace

std::vector<std::string> tokenize_query(std::string_view raw) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : raw) {
    if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') {
      if (!cur.empty()) push_token(tokens, std::move(cur)), cur.clear();
    } else {
      if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
      cur += ch;
    }
  }
  if (!cur.empty()) push_token(tokens, std::move(cur));
  return tokens;
}

std::vector<TaggedQuery> load_tagged_corpus(std::istream& in) {
  std::vector<TaggedQuery> corpus;
  TaggedQuery cur;
  std::string line;
  std::size_t line_no = 0;

  auto flush = [&] {
    if (!cur.tokens.empty()) corpus.push_back(std::move(cur));
    cur = {};
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    auto cols = split(line, '\t');
    if (cols.size() != 2) throw ParseError("expected token<TAB>tag", line_no);
    auto tag = tag_from(cols[1]);
    if (!tag) throw ParseError("unknown tag '" + std::string(cols[1]) + "'", line_no);
    std::optional<Tag> prev =
        cur.tags.empty() ? std::nullopt : std::make_optional(cur.tags.back());
    if (!transition_valid(prev, *tag))
      throw InvalidTagSequence("tag '" + std::string(cols[1]) + "' breaks BIO order", line_no);
    cur.tokens.emplace_back(cols[0]);
    cur.tags.push_back(*tag);
  }
  flush();
  return corpus;
}

void save_tagged_corpus(const std::vector<TaggedQuery>& corpus, std::ostream& out) {
  for (const TaggedQuery& q : corpus) {
    for (std::size_t i = 0; i < q.tokens.size(); ++i)
      out << q.tokens[i] << '\t' << to_string(q.tags[i]) << '\n';
    out << '\n';
  }
}

std::vector<std::string> features_at(const std::vector<std::string>& tokens, std::size_t i) {
  const std::string& tok = tokens[i];
  std::string shape;
  shape.reserve(tok.size());
  bool all_digits = !tok.empty();
  for (char c : tok) {
    if (c >= 'a' && c <= 'z')
      shape += 'x', all_digits = false;
    else if (c >= '0' && c <= '9')
      shape += 'd';
    else
      shape += c, all_digits = false;
  }
  std::vector<std::string> f;
  f.reserve(7);
  f.push_back("w=" + tok);
  f.push_back("shape=" + shape);
  f.push_back("prev=" + (i ? tokens[i - 1] : std::string("<BOS>")));
  f.push_back("next=" + (i + 1 < tokens.size() ? tokens[i + 1] : std::string("<EOS>")));
  if (all_digits) f.push_back("isdig");
  f.push_back("pre3=" + tok.substr(0, std::min<std::size_t>(3, tok.size())));
  f.push_back("suf3=" + (tok.size() > 3 ? tok.substr(tok.size() - 3) : tok));
  return f;
}

double TaggerModel::emission(const std::string& feature, Tag t) const {
  auto it = emissions_.find(feature);
  return it == emissions_.end() ? 0.0 : it->second[index(t)];
}

void TaggerModel::add_emission(const std::string& feature, Tag t, double delta) {
  emissions_[feature][index(t)] += delta;
}

double TaggerModel::score_sequence(const std::vector<std::string>& tokens,
                                   const std::vector<Tag>& tags) const {
  double score = 0.0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::optional<Tag> prev = i ? std::make_optional(tags[i - 1]) : std::nullopt;
    if (!transition_valid(prev, tags[i])) return kNegInf;
    if (i) score += transition(tags[i - 1], tags[i]);
    for (const std::string& f : features_at(tokens, i)) score += emission(f, tags[i]);
  }
  return score;
}

std::vector<Tag> viterbi_decode(const std::vector<std::string>& tokens, const TaggerModel& model) {
  std::size_t n = tokens.size();
  if (n == 0) throw EmptyInput("viterbi_decode: empty token sequence");

  // Paths are kept whole so score ties resolve to the lexicographically
  // smallest tag sequence, exactly like exhaustive enumeration.
  struct Cell {
    double score = kNegInf;
    std::vector<Tag> path;
  };
  std::vector<std::array<Cell, kNumTags>> dp(n);

  auto emit_scores = [&](std::size_t i) {
    std::array<double, kNumTags> e{};
    for (const std::string& f : features_at(tokens, i)) {
      auto it = model.emissions().find(f);
      if (it == model.emissions().end()) continue;
      for (int t = 0; t < kNumTags; ++t) e[t] += it->second[t];
    }
    return e;
  };

  auto lex_less = [](const std::vector<Tag>& a, const std::vector<Tag>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
  };

  std::array<double, kNumTags> e0 = emit_scores(0);
  for (int t = 0; t < kNumTags; ++t) {
    if (!transition_valid(std::nullopt, static_cast<Tag>(t))) continue;
    dp[0][t].score = e0[t];
    dp[0][t].path = {static_cast<Tag>(t)};
  }

  for (std::size_t i = 1; i < n; ++i) {
    std::array<double, kNumTags> e = emit_scores(i);
    for (int t = 0; t < kNumTags; ++t) {
      Cell& cell = dp[i][t];
      for (int p = 0; p < kNumTags; ++p) {
        if (dp[i - 1][p].score == kNegInf) continue;
        if (!transition_valid(static_cast<Tag>(p), static_cast<Tag>(t))) continue;
        double s = dp[i - 1][p].score +
                   model.transition(static_cast<Tag>(p), static_cast<Tag>(t)) + e[t];
        if (s > cell.score ||
            (s == cell.score && cell.score != kNegInf && lex_less(dp[i - 1][p].path, cell.path))) {
          // Note: comparing predecessor paths is enough — the appended tag t
          // is the same for every candidate of this cell.
          std::vector<Tag> path = dp[i - 1][p].path;
          path.push_back(static_cast<Tag>(t));
          cell.score = s;
          cell.path = std::move(path);
        }
      }
    }
  }

  const Cell* best = nullptr;
  for (int t = 0; t < kNumTags; ++t) {
    const Cell& c = dp[n - 1][t];
    if (c.score == kNegInf) continue;
    if (!best || c.score > best->score || (c.score == best->score && lex_less(c.path, best->path)))
      best = &c;
  }
  return best ? best->path : std::vector<Tag>(n, Tag::O);
}

// ---------------------------------------------------------------------------
// Averaged perceptron
// ---------------------------------------------------------------------------

struct AveragedTrainer {
  TaggerModel w;
  std::unordered_map<std::string, std::array<double, kNumTags>> emis_totals;
  std::unordered_map<std::string, std::array<std::uint64_t, kNumTags>> emis_stamp;
  std::array<std::array<double, kNumTags>, kNumTags> trans_totals{};
  std::array<std::array<std::uint64_t, kNumTags>, kNumTags> trans_stamp{};
  std::uint64_t c = 0;  // examples processed so far

  void bump_emission(const std::string& f, Tag t, double delta) {
    int ti = static_cast<int>(t);
    auto& totals = emis_totals[f];
    auto& stamp = emis_stamp[f];
    auto& weights = w.emissions_[f];
    totals[ti] += static_cast<double>(c - stamp[ti]) * weights[ti];
    stamp[ti] = c;
    weights[ti] += delta;
  }

  void bump_transition(Tag a, Tag b, double delta) {
    int i = static_cast<int>(a), j = static_cast<int>(b);
    trans_totals[i][j] += static_cast<double>(c - trans_stamp[i][j]) * w.trans_[i][j];
    trans_stamp[i][j] = c;
    w.trans_[i][j] += delta;
  }

  TaggerModel finalize() {
    TaggerModel avg;
    if (c == 0) return avg;
    double denom = static_cast<double>(c);
    for (auto& [f, weights] : w.emissions_) {
      auto& totals = emis_totals[f];
      auto& stamp = emis_stamp[f];
      for (int t = 0; t < kNumTags; ++t) {
        double sum = totals[t] + static_cast<double>(c - stamp[t]) * weights[t];
        if (sum != 0.0) avg.emissions_[f][t] = sum / denom;
      }
    }
    for (int i = 0; i < kNumTags; ++i)
      for (int j = 0; j < kNumTags; ++j) {
        double sum = trans_totals[i][j] +
                     static_cast<double>(c - trans_stamp[i][j]) * w.trans_[i][j];
        avg.trans_[i][j] = sum / denom;
      }
    return avg;
  }
};

TaggerModel train_tagger(const std::vector<TaggedQuery>& corpus, int epochs,
                         TaggerTrainReport* report) {
  if (corpus.empty()) throw ParseError("tagger training corpus is empty");
  AveragedTrainer trainer;
  std::vector<std::uint64_t> mistakes_per_epoch;

  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::uint64_t mistakes = 0;
    for (const TaggedQuery& q : corpus) {
      std::vector<Tag> pred = viterbi_decode(q.tokens, trainer.w);
      for (std::size_t i = 0; i < q.tokens.size(); ++i) {
        if (pred[i] == q.tags[i]) continue;
        ++mistakes;
        for (const std::string& f : features_at(q.tokens, i)) {
          trainer.bump_emission(f, q.tags[i], +1.0);
          trainer.bump_emission(f, pred[i], -1.0);
        }
      }
      for (std::size_t i = 1; i < q.tokens.size(); ++i) {
        if (q.tags[i - 1] == pred[i - 1] && q.tags[i] == pred[i]) continue;
        trainer.bump_transition(q.tags[i - 1], q.tags[i], +1.0);
        trainer.bump_transition(pred[i - 1], pred[i], -1.0);
      }
      ++trainer.c;
    }
    mistakes_per_epoch.push_back(mistakes);
  }

  TaggerModel avg = trainer.finalize();
  if (report) {
    report->mistakes_per_epoch = std::move(mistakes_per_epoch);
    std::uint64_t correct = 0, total = 0;
    for (const TaggedQuery& q : corpus) {
      std::vector<Tag> pred = viterbi_decode(q.tokens, avg);
      for (std::size_t i = 0; i < q.tokens.size(); ++i) {
        ++total;
        if (pred[i] == q.tags[i]) ++correct;
      }
    }
    report->train_token_accuracy = total ? static_cast<double>(correct) / total : 0.0;
  }
  return avg;
}

std::vector<TagPrf> per_tag_prf(const TaggerModel& model, const std::vector<TaggedQuery>& corpus) {
  std::array<TagPrf, kNumTags> acc;
  for (int t = 0; t < kNumTags; ++t) acc[t].tag = static_cast<Tag>(t);
  for (const TaggedQuery& q : corpus) {
    std::vector<Tag> pred = viterbi_decode(q.tokens, model);
    for (std::size_t i = 0; i < q.tokens.size(); ++i) {
      ++acc[static_cast<int>(q.tags[i])].gold;
      ++acc[static_cast<int>(pred[i])].predicted;
      if (pred[i] == q.tags[i]) ++acc[static_cast<int>(pred[i])].correct;
    }
  }
  std::vector<TagPrf> out;
  for (TagPrf& p : acc) {
    if (p.gold == 0 && p.predicted == 0) continue;
    p.precision = p.predicted ? static_cast<double>(p.correct) / p.predicted : 0.0;
    p.recall = p.gold ? static_cast<double>(p.correct) / p.gold : 0.0;
    out.push_back(p);
  }
  return out;
}

void TaggerModel::save(std::ostream& out) const {
  out << "TAGGER 1\n";
  std::vector<std::string> keys;
  keys.reserve(emissions_.size());
  for (const auto& [f, _] : emissions_) keys.push_back(f);
  std::sort(keys.begin(), keys.end());
  char buf[64];
  for (const std::string& f : keys) {
    const auto& weights = emissions_.at(f);
    for (int t = 0; t < kNumTags; ++t) {
      if (weights[t] == 0.0) continue;
      std::snprintf(buf, sizeof buf, "%.17g", weights[t]);
      out << "F\t" << f << '\t' << to_string(static_cast<Tag>(t)) << '\t' << buf << '\n';
    }
  }
  for (int i = 0; i < kNumTags; ++i)
    for (int j = 0; j < kNumTags; ++j) {
      if (trans_[i][j] == 0.0) continue;
      std::snprintf(buf, sizeof buf, "%.17g", trans_[i][j]);
      out << "T\t" << to_string(static_cast<Tag>(i)) << '\t' << to_string(static_cast<Tag>(j))
          << '\t' << buf << '\n';
    }
}

TaggerModel TaggerModel::load(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty tagger model");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "TAGGER 1") throw ParseError("bad tagger model header", line_no);
  TaggerModel model;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cols = split(line, '\t');
    double weight = 0.0;
    if (cols[0] == "F") {
      if (cols.size() != 4 || !parse_f64(cols[3], weight))
        throw ParseError("bad emission line", line_no);
      auto tag = tag_from(cols[2]);
      if (!tag) throw ParseError("unknown tag in model", line_no);
      model.add_emission(std::string(cols[1]), *tag, weight);
    } else if (cols[0] == "T") {
      if (cols.size() != 4 || !parse_f64(cols[3], weight))
        throw ParseError("bad transition line", line_no);
      auto a = tag_from(cols[1]), b = tag_from(cols[2]);
      if (!a || !b) throw ParseError("unknown tag in model", line_no);
      model.add_transition(*a, *b, weight);
    } else {
      throw ParseError("unknown tagger model record", line_no);
    }
  }
  return model;
}

// ---------------------------------------------------------------------------
// Lexicon, gazetteer and extraction
// ---------------------------------------------------------------------------

std::string to_string(QualifierType t) {
  switch (t) {
    case QualifierType::Superlative: return "superlative";
    case QualifierType::Proximity: return "proximity";
    case QualifierType::Price: return "price";
    case QualifierType::Rating: return "rating";
    case QualifierType::Recency: return "recency";
  }
  return "?";
}

std::optional<QualifierType> qualifier_type_from(std::string_view s) {
  std::string t = to_lower(s);
  for (int i = 0; i <= static_cast<int>(QualifierType::Recency); ++i) {
    auto q = static_cast<QualifierType>(i);
    if (t == to_string(q)) return q;
  }
  return std::nullopt;
}

namespace {
std::size_t phrase_words(const std::string& phrase) {
  return split(phrase, ' ').size();
}
}  // namespace

void Lexicon::add_qualifier(std::string phrase, QualifierType type) {
  max_phrase_words = std::max(max_phrase_words, phrase_words(phrase));
  qualifiers.emplace(std::move(phrase), type);
}

void Lexicon::add_attribute(std::string phrase) {
  max_phrase_words = std::max(max_phrase_words, phrase_words(phrase));
  attributes.emplace(std::move(phrase), true);
}

void Lexicon::add_exclusion(std::string phrase) {
  max_phrase_words = std::max(max_phrase_words, phrase_words(phrase));
  exclusions.emplace(std::move(phrase), true);
}

Lexicon Lexicon::load(std::istream& in) {
  Lexicon lex;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cols = split(line, '\t');
    if (cols.size() < 2) throw ParseError("lexicon needs phrase<TAB>kind", line_no);
    std::string phrase = to_lower(cols[0]);
    if (cols[1] == "QUALIFIER") {
      if (cols.size() < 3) throw ParseError("qualifier entries need a type", line_no);
      auto type = qualifier_type_from(cols[2]);
      if (!type) throw ParseError("unknown qualifier type '" + std::string(cols[2]) + "'", line_no);
      lex.add_qualifier(std::move(phrase), *type);
    } else if (cols[1] == "ATTRIBUTE") {
      lex.add_attribute(std::move(phrase));
    } else if (cols[1] == "EXCLUDE") {
      lex.add_exclusion(std::move(phrase));
    } else {
      throw ParseError("unknown lexicon kind '" + std::string(cols[1]) + "'", line_no);
    }
  }
  return lex;
}

void Gazetteer::add(std::string surface, std::string woeid) {
  max_phrase_words = std::max(max_phrase_words, phrase_words(surface));
  surface_to_woeid.emplace(std::move(surface), std::move(woeid));
}

std::optional<std::string> Gazetteer::find(const std::string& surface) const {
  auto it = surface_to_woeid.find(surface);
  if (it == surface_to_woeid.end()) return std::nullopt;
  return it->second;
}

Gazetteer Gazetteer::load(std::istream& in) {
  Gazetteer gaz;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cols = split(line, '\t');
    if (cols.size() != 2) throw ParseError("gazetteer needs surface<TAB>woeid", line_no);
    gaz.add(to_lower(cols[0]), std::string(cols[1]));
  }
  return gaz;
}

QualifierMatch match_qualifiers(const std::vector<std::string>& tokens, const Lexicon& lexicon) {
  QualifierMatch out;
  std::size_t max_n = std::max<std::size_t>(1, lexicon.max_phrase_words);
  std::size_t i = 0;
  while (i < tokens.size()) {
    bool consumed = false;
    for (std::size_t n = std::min(max_n, tokens.size() - i); n >= 1 && !consumed; --n) {
      std::string phrase = tokens[i];
      for (std::size_t k = 1; k < n; ++k) phrase += " " + tokens[i + k];
      if (lexicon.exclusions.count(phrase)) {
        consumed = true;  // skipped, never reported
      } else if (auto q = lexicon.qualifiers.find(phrase); q != lexicon.qualifiers.end()) {
        if (!out.qualifier) {
          out.qualifier = phrase;
          out.qualifier_type = q->second;
        }
        consumed = true;
      } else if (lexicon.attributes.count(phrase)) {
        out.attributes.push_back(phrase);
        consumed = true;
      }
      if (consumed) i += n;
    }
    if (!consumed) ++i;
  }
  return out;
}

std::vector<FragmentToken> build_extraction_tokens(const ExtractionSet& ext) {
  std::vector<FragmentToken> out;
  if (!ext.subject) return out;
  std::string subj = underscore_join(*ext.subject);
  const bool has_loc = ext.location_woeid.has_value();
  const std::string loc = has_loc ? *ext.location_woeid : std::string();

  if (ext.qualifier && has_loc)
    out.push_back({FragmentToken::Form::QualifierSubjectLocation, false,
                   {underscore_join(*ext.qualifier) + "_" + subj + "_" + loc}});
  if (has_loc) out.push_back({FragmentToken::Form::SubjectLocation, false, {subj + "_" + loc}});
  {
    FragmentToken sum{FragmentToken::Form::SubjectPlusLocation, true, {subj}};
    if (has_loc) sum.parts.push_back(loc);
    out.push_back(std::move(sum));
  }
  if (ext.qualifier_type && has_loc)
    out.push_back({FragmentToken::Form::QualifierTypeSubjectLocation, false,
                   {to_string(*ext.qualifier_type) + "_" + subj + "_" + loc}});
  return out;
}

DetectedIntent detect_local_intent(const std::vector<std::string>& tokens, const Gazetteer& gaz,
                                   const Lexicon& lexicon) {
  std::size_t max_n =
      std::max<std::size_t>({1, lexicon.max_phrase_words, gaz.max_phrase_words});
  bool explicit_hit = false;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (std::size_t n = std::min(max_n, tokens.size() - i); n >= 1; --n) {
      std::string phrase = tokens[i];
      for (std::size_t k = 1; k < n; ++k) phrase += " " + tokens[i + k];
      if (lexicon.exclusions.count(phrase)) return DetectedIntent::Implicit;
      if (gaz.surface_to_woeid.count(phrase)) explicit_hit = true;
    }
  }
  return explicit_hit ? DetectedIntent::Explicit : DetectedIntent::None;
}

namespace {

struct Span {
  std::size_t begin = 0, end = 0;  // [begin, end)
  Tag open = Tag::O;
};

/// Maximal B-x (I-x)* spans, in token order.
std::vector<Span> collect_spans(const std::vector<Tag>& tags) {
  std::vector<Span> spans;
  for (std::size_t i = 0; i < tags.size();) {
    int t = static_cast<int>(tags[i]);
    if (tags[i] == Tag::O || t % 2 == 1) {
      ++i;
      continue;
    }
    Span s{i, i + 1, tags[i]};
    Tag inside = static_cast<Tag>(t + 1);
    while (s.end < tags.size() && tags[s.end] == inside) ++s.end;
    spans.push_back(s);
    i = s.end;
  }
  return spans;
}

std::string span_surface(const std::vector<std::string>& tokens, const Span& s) {
  std::string out = tokens[s.begin];
  for (std::size_t i = s.begin + 1; i < s.end; ++i) out += " " + tokens[i];
  return out;
}

}  // namespace

ExtractionSet extract_from_query(const std::string& raw_query, const TaggerModel& model,
                                 const Lexicon& lexicon, const Gazetteer& gazetteer) {
  ExtractionSet ext;
  std::vector<std::string> tokens = tokenize_query(raw_query);
  if (tokens.empty()) return ext;
  std::vector<Tag> tags = viterbi_decode(tokens, model);

  for (const Span& s : collect_spans(tags)) {
    if (!ext.subject && (s.open == Tag::B_ORG || s.open == Tag::B_CAT))
      ext.subject = span_surface(tokens, s);
    if (!ext.location_woeid &&
        (s.open == Tag::B_LOC_CITY || s.open == Tag::B_LOC_ZIP)) {
      if (auto woeid = gazetteer.find(span_surface(tokens, s))) ext.location_woeid = woeid;
    }
  }

  QualifierMatch q = match_qualifiers(tokens, lexicon);
  ext.qualifier = q.qualifier;
  ext.qualifier_type = q.qualifier_type;
  ext.attributes = std::move(q.attributes);
  return ext;
}

}  // namespace w2v::tagger
