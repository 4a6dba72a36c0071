#include "w2v/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace w2v::retrieval {

std::optional<double> try_cosine(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    dot += a[k] * b[k];
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  if (na == 0.0 || nb == 0.0) return std::nullopt;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

double cosine(std::span<const double> a, std::span<const double> b) {
  auto c = try_cosine(a, b);
  if (!c) throw ZeroVector();
  return *c;
}

std::vector<double> sum_input_vectors(const embed::EmbeddingModel& m, std::span<const int> ids) {
  std::vector<double> v(static_cast<std::size_t>(m.dim), 0.0);
  for (int id : ids) {
    const double* row = m.in(id);
    for (int k = 0; k < m.dim; ++k) v[static_cast<std::size_t>(k)] += row[k];
  }
  return v;
}

AdIndex::AdIndex(const embed::EmbeddingModel& model, embed::TokenKind kind) : dim_(model.dim) {
  for (int id = 0; id < model.vocab.size(); ++id) {
    const auto& e = model.vocab.entry(id);
    if (e.kind != kind) continue;
    const double* row = model.in(id);
    double norm = 0.0;
    for (int k = 0; k < dim_; ++k) norm += row[k] * row[k];
    if (norm == 0.0) {
      ++skipped_;
      continue;
    }
    norm = std::sqrt(norm);
    ids_.push_back(id);
    tokens_.push_back(e.token);
    for (int k = 0; k < dim_; ++k) unit_.push_back(row[k] / norm);
  }
}

std::vector<Neighbor> AdIndex::knn(std::span<const double> query, int k) const {
  if (ids_.empty()) throw EmptyIndex();
  if (static_cast<int>(query.size()) != dim_)
    throw std::invalid_argument("query dimension does not match the index");
  double qnorm = 0.0;
  for (double x : query) qnorm += x * x;
  if (qnorm == 0.0) throw ZeroVector();
  qnorm = std::sqrt(qnorm);

  std::vector<double> cos(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    const double* row = unit_.data() + i * static_cast<std::size_t>(dim_);
    double dot = 0.0;
    for (int j = 0; j < dim_; ++j) dot += row[j] * query[static_cast<std::size_t>(j)];
    cos[i] = dot / qnorm;
  }
  std::vector<std::size_t> order(ids_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (cos[a] != cos[b]) return cos[a] > cos[b];
    return tokens_[a] < tokens_[b];
  });
  std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(std::max(k, 0)), ids_.size());
  std::vector<Neighbor> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i)
    out.push_back(Neighbor{tokens_[order[i]], cos[order[i]], ids_[order[i]]});
  return out;
}

std::string to_string(Task t) {
  switch (t) {
    case Task::QueryToAd: return "q2ad";
    case Task::QueryPlusLocationToAd: return "q+l";
    case Task::FragmentQsl: return "qsl";
    case Task::FragmentSl: return "sl";
    case Task::FragmentSPlusL: return "s+l";
    case Task::FragmentQtsl: return "qtsl";
  }
  return "?";
}

std::optional<Task> task_from(std::string_view s) {
  if (s == "q2ad") return Task::QueryToAd;
  if (s == "q+l") return Task::QueryPlusLocationToAd;
  if (s == "qsl") return Task::FragmentQsl;
  if (s == "sl") return Task::FragmentSl;
  if (s == "s+l") return Task::FragmentSPlusL;
  if (s == "qtsl") return Task::FragmentQtsl;
  return std::nullopt;
}

namespace {

std::vector<double> vector_of(const embed::EmbeddingModel& m, embed::TokenKind kind,
                              const std::string& token) {
  auto id = m.vocab.find(kind, token);
  if (!id) throw TokenNotFound(kind, token);
  int one = *id;
  return sum_input_vectors(m, std::span<const int>(&one, 1));
}

void add_into(std::vector<double>& acc, const std::vector<double>& v) {
  for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += v[k];
}

/// First fragment of the wanted form, or nullptr.
const tagger::FragmentToken* find_form(const std::vector<tagger::FragmentToken>& frags,
                                       tagger::FragmentToken::Form form) {
  for (const auto& f : frags)
    if (f.form == form) return &f;
  return nullptr;
}

std::vector<double> fragment_vector(const embed::EmbeddingModel& m,
                                    const tagger::FragmentToken& frag) {
  if (!frag.is_composition) return vector_of(m, embed::TokenKind::Fragment, frag.parts[0]);
  std::vector<double> v = vector_of(m, embed::TokenKind::Subject, frag.parts[0]);
  if (frag.parts.size() > 1) add_into(v, vector_of(m, embed::TokenKind::Loc, frag.parts[1]));
  return v;
}

}  // namespace

std::vector<double> compose_query_vector(const embed::EmbeddingModel& m, Task task,
                                         const std::string& query_text,
                                         const std::optional<std::string>& location,
                                         const tagger::ExtractionSet* extraction) {
  switch (task) {
    case Task::QueryToAd:
      return vector_of(m, embed::TokenKind::Query, query_text);
    case Task::QueryPlusLocationToAd: {
      std::vector<double> v = vector_of(m, embed::TokenKind::Query, query_text);
      if (location) add_into(v, vector_of(m, embed::TokenKind::Loc, *location));
      return v;
    }
    case Task::FragmentQsl:
    case Task::FragmentSl:
    case Task::FragmentSPlusL:
    case Task::FragmentQtsl: {
      if (extraction == nullptr) throw NoMatchableFragment();
      auto frags = tagger::build_extraction_tokens(*extraction);
      tagger::FragmentToken::Form want;
      switch (task) {
        case Task::FragmentQsl: want = tagger::FragmentToken::Form::QualifierSubjectLocation; break;
        case Task::FragmentSl: want = tagger::FragmentToken::Form::SubjectLocation; break;
        case Task::FragmentSPlusL: want = tagger::FragmentToken::Form::SubjectPlusLocation; break;
        default: want = tagger::FragmentToken::Form::QualifierTypeSubjectLocation; break;
      }
      const auto* frag = find_form(frags, want);
      if (frag == nullptr) throw NoMatchableFragment();
      return fragment_vector(m, *frag);
    }
  }
  throw NoMatchableFragment();
}

ColdStartResult cold_start_lookup(const embed::EmbeddingModel& m,
                                  const tagger::ExtractionSet& ext) {
  for (const auto& frag : tagger::build_extraction_tokens(ext)) {
    try {
      return ColdStartResult{fragment_vector(m, frag), frag.form};
    } catch (const TokenNotFound&) {
      continue;  // try the next priority form
    }
  }
  throw NoMatchableFragment();
}

KeywordReport neighbor_keywords(const embed::EmbeddingModel& m, std::span<const double> vec,
                                int n_neighbors, int n_keywords) {
  AdIndex queries(m, embed::TokenKind::Query);
  KeywordReport report;
  report.neighbors = queries.knn(vec, n_neighbors);
  std::map<std::string, int> counts;
  for (const auto& nb : report.neighbors) {
    std::istringstream words(nb.token);
    std::string w;
    while (words >> w) ++counts[w];
  }
  std::vector<std::pair<std::string, int>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (static_cast<int>(ranked.size()) > n_keywords)
    ranked.resize(static_cast<std::size_t>(n_keywords));
  report.keywords = std::move(ranked);
  return report;
}

}  // namespace w2v::retrieval
