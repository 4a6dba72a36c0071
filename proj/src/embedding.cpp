#include "w2v/embedding.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <thread>

namespace w2v::embed {

std::string to_string(TokenKind k) {
  switch (k) {
    case TokenKind::Query: return "QUERY";
    case TokenKind::Slc: return "SLC";
    case TokenKind::Ad: return "AD";
    case TokenKind::Loc: return "LOC";
    case TokenKind::Fragment: return "FRAGMENT";
    case TokenKind::Subject: return "SUBJECT";
  }
  return "?";
}

std::optional<TokenKind> token_kind_from(std::string_view s) {
  if (s == "QUERY") return TokenKind::Query;
  if (s == "SLC") return TokenKind::Slc;
  if (s == "AD") return TokenKind::Ad;
  if (s == "LOC") return TokenKind::Loc;
  if (s == "FRAGMENT") return TokenKind::Fragment;
  if (s == "SUBJECT") return TokenKind::Subject;
  return std::nullopt;
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::s2v: return "s2v";
    case Variant::gw2v: return "gw2v";
    case Variant::lw2v: return "lw2v";
    case Variant::lw2v_plus: return "lw2v_plus";
    case Variant::lw2v_crf_plus: return "lw2v_crf_plus";
  }
  return "?";
}

std::optional<Variant> variant_from(std::string_view s) {
  if (s == "s2v") return Variant::s2v;
  if (s == "gw2v") return Variant::gw2v;
  if (s == "lw2v") return Variant::lw2v;
  if (s == "lw2v_plus" || s == "lw2v+") return Variant::lw2v_plus;
  if (s == "lw2v_crf_plus" || s == "lw2vCRF+") return Variant::lw2v_crf_plus;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Vocabulary
// ---------------------------------------------------------------------------

std::string Vocabulary::key(TokenKind kind, std::string_view token) {
  std::string k;
  k.reserve(token.size() + 1);
  k.push_back(static_cast<char>(1 + static_cast<int>(kind)));
  k.append(token);
  return k;
}

int Vocabulary::add(TokenKind kind, std::string_view token, std::uint64_t count_inc) {
  auto [it, inserted] = index_.try_emplace(key(kind, token), size());
  if (inserted) entries_.push_back(VocabEntry{kind, std::string(token), 0});
  entries_[static_cast<std::size_t>(it->second)].count += count_inc;
  total_count_ += count_inc;
  return it->second;
}

std::optional<int> Vocabulary::find(TokenKind kind, std::string_view token) const {
  auto it = index_.find(key(kind, token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void Vocabulary::prune(std::uint64_t min_count) {
  std::vector<VocabEntry> kept;
  kept.reserve(entries_.size());
  for (auto& e : entries_)
    if (e.count >= min_count) kept.push_back(std::move(e));
  entries_ = std::move(kept);
  index_.clear();
  total_count_ = 0;
  for (int id = 0; id < size(); ++id) {
    const auto& e = entries_[static_cast<std::size_t>(id)];
    index_.emplace(key(e.kind, e.token), id);
    total_count_ += e.count;
  }
}

// ---------------------------------------------------------------------------
// Negative sampling
// ---------------------------------------------------------------------------

NegativeSampler::NegativeSampler(const Vocabulary& vocab, double power) {
  for (int id = 0; id < vocab.size(); ++id) {
    const auto& e = vocab.entry(id);
    auto& table = tables_[static_cast<std::size_t>(e.kind)];
    table.total += std::pow(static_cast<double>(e.count), power);
    table.ids.push_back(id);
    table.cumulative.push_back(table.total);
  }
}

std::optional<int> NegativeSampler::sample(TokenKind kind, std::span<const int> exclude,
                                           std::mt19937_64& rng) const {
  const auto& table = tables_[static_cast<std::size_t>(kind)];
  if (table.total <= 0.0) return std::nullopt;
  for (int attempt = 0; attempt < 100; ++attempt) {
    double u = u64_to_unit(rng()) * table.total;
    auto it = std::upper_bound(table.cumulative.begin(), table.cumulative.end(), u);
    if (it == table.cumulative.end()) --it;  // u == total is measure zero but possible
    int id = table.ids[static_cast<std::size_t>(it - table.cumulative.begin())];
    if (std::find(exclude.begin(), exclude.end(), id) == exclude.end()) return id;
  }
  return std::nullopt;
}

double NegativeSampler::probability(TokenKind kind, int id) const {
  const auto& table = tables_[static_cast<std::size_t>(kind)];
  if (table.total <= 0.0) return 0.0;
  for (std::size_t i = 0; i < table.ids.size(); ++i)
    if (table.ids[i] == id)
      return (table.cumulative[i] - (i == 0 ? 0.0 : table.cumulative[i - 1])) / table.total;
  return 0.0;
}

// ---------------------------------------------------------------------------
// Planning
// ---------------------------------------------------------------------------

std::optional<tagger::ExtractionSet> TaggerExtractionProvider::extract(
    const session::SessionEvent& ev) const {
  if (model_ == nullptr) return std::nullopt;
  static const tagger::Lexicon kEmptyLexicon;
  static const tagger::Gazetteer kEmptyGazetteer;
  auto ext = tagger::extract_from_query(ev.token, *model_, lexicon_ ? *lexicon_ : kEmptyLexicon,
                                        gazetteer_ ? *gazetteer_ : kEmptyGazetteer);
  if (!ext.subject) return std::nullopt;
  if (!ext.location_woeid && resolver_ != nullptr) {
    auto loc = resolver_->resolve(ev);
    if (loc && resolver_->below_state_level(*loc)) ext.location_woeid = loc->id;
  }
  return ext;
}

namespace {

TokenKind raw_kind_of(session::EventKind k) {
  switch (k) {
    case session::EventKind::Query: return TokenKind::Query;
    case session::EventKind::SearchLinkClick: return TokenKind::Slc;
    case session::EventKind::AdClick:
    case session::EventKind::AdView: return TokenKind::Ad;
  }
  return TokenKind::Query;
}

std::vector<TokenRef> entry_from_fragment(const tagger::FragmentToken& f) {
  std::vector<TokenRef> entry;
  if (f.is_composition) {
    entry.push_back(TokenRef{TokenKind::Subject, f.parts[0]});
    if (f.parts.size() > 1) entry.push_back(TokenRef{TokenKind::Loc, f.parts[1]});
  } else {
    entry.push_back(TokenRef{TokenKind::Fragment, f.parts[0]});
  }
  return entry;
}

}  // namespace

SessionPlan plan_session(const session::Session& s, Variant variant,
                         const geo::LocationResolver* resolver,
                         const ExtractionProvider* extractor) {
  SessionPlan plan;
  plan.events.reserve(s.events.size());

  std::optional<geo::LocationToken> global;
  if (variant == Variant::gw2v && resolver != nullptr) global = resolver->session_user_location(s);

  for (const auto& ev : s.events) {
    EventPlan ep;
    ep.kind = ev.kind;
    ep.position = ev.position;
    ep.raw = TokenRef{raw_kind_of(ev.kind), ev.token};
    ep.trainable = ev.kind != session::EventKind::AdView;
    if (!ep.trainable) {
      plan.events.push_back(std::move(ep));
      continue;
    }

    bool local_query =
        ev.kind == session::EventKind::Query && ev.local_intent != session::LocalIntent::None;
    std::optional<geo::LocationToken> loc;
    if (local_query && resolver != nullptr) loc = resolver->resolve(ev);

    std::vector<std::vector<TokenRef>> atomic{{ep.raw}};
    std::vector<std::vector<TokenRef>> composed;
    if (loc) composed = {{ep.raw, TokenRef{TokenKind::Loc, loc->id}}};

    switch (variant) {
      case Variant::s2v:
        ep.center = atomic;
        ep.context = atomic;
        break;
      case Variant::gw2v:
        ep.context = atomic;
        ep.center = global ? std::vector<std::vector<TokenRef>>{
                                 {ep.raw, TokenRef{TokenKind::Loc, global->id}}}
                           : atomic;
        break;
      case Variant::lw2v:
        ep.context = atomic;
        ep.center = composed.empty() ? atomic : composed;
        break;
      case Variant::lw2v_plus:
        ep.center = composed.empty() ? atomic : composed;
        ep.context = ep.center;
        break;
      case Variant::lw2v_crf_plus: {
        std::vector<std::vector<TokenRef>> entries;
        if (local_query && extractor != nullptr) {
          if (auto ext = extractor->extract(ev)) {
            for (const auto& frag : tagger::build_extraction_tokens(*ext))
              entries.push_back(entry_from_fragment(frag));
          }
        }
        if (entries.empty()) entries = atomic;
        ep.center = entries;
        ep.context = std::move(entries);
        break;
      }
    }
    plan.events.push_back(std::move(ep));
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Encoding
// ---------------------------------------------------------------------------

namespace {

/// FNV-1a over (seed, session_id, event index); drives subsampling.
std::uint64_t event_hash(std::uint64_t seed, std::string_view session_id, std::size_t index) {
  std::uint64_t h = 14695981039346656037ull ^ seed;
  auto mix = [&h](unsigned char b) {
    h ^= b;
    h *= 1099511628211ull;
  };
  for (char c : session_id) mix(static_cast<unsigned char>(c));
  for (int i = 0; i < 8; ++i) mix(static_cast<unsigned char>((index >> (8 * i)) & 0xff));
  return h;
}

}  // namespace

EncodedSession encode_session(const SessionPlan& plan, const Vocabulary& vocab,
                              bool implicit_negatives, double subsample, std::uint64_t seed,
                              std::string_view session_id) {
  EncodedSession enc;
  std::vector<int> seq_of_plan(plan.events.size(), -1);

  auto encode_entries = [&](const std::vector<std::vector<TokenRef>>& entries,
                            std::optional<int> raw_id, std::uint32_t& begin, std::uint32_t& end) {
    begin = static_cast<std::uint32_t>(enc.entries.size());
    for (const auto& entry : entries) {
      std::uint32_t b = static_cast<std::uint32_t>(enc.pool.size());
      for (const auto& member : entry)
        if (auto id = vocab.find(member.kind, member.text)) enc.pool.push_back(*id);
      if (enc.pool.size() > b)
        enc.entries.push_back({b, static_cast<std::uint32_t>(enc.pool.size())});
    }
    if (enc.entries.size() == begin && raw_id) {  // every entry pruned away; fall back
      std::uint32_t b = static_cast<std::uint32_t>(enc.pool.size());
      enc.pool.push_back(*raw_id);
      enc.entries.push_back({b, b + 1});
    }
    end = static_cast<std::uint32_t>(enc.entries.size());
  };

  for (std::size_t pi = 0; pi < plan.events.size(); ++pi) {
    const auto& ep = plan.events[pi];
    if (!ep.trainable) continue;
    auto raw_id = vocab.find(ep.raw.kind, ep.raw.text);

    if (subsample > 0.0 && raw_id) {
      double f = static_cast<double>(vocab.entry(*raw_id).count);
      double budget = subsample * static_cast<double>(vocab.total_count());
      double keep = (std::sqrt(f / budget) + 1.0) * budget / f;
      if (keep < 1.0 && u64_to_unit(event_hash(seed, session_id, pi)) >= keep) continue;
    }

    EncodedSession::Event evn;
    encode_entries(ep.center, raw_id, evn.center_begin, evn.center_end);
    if (evn.center_begin == evn.center_end) continue;
    encode_entries(ep.context, raw_id, evn.context_begin, evn.context_end);
    if (evn.context_begin == evn.context_end) continue;
    seq_of_plan[pi] = static_cast<int>(enc.seq.size());
    enc.seq.push_back(evn);
  }

  if (implicit_negatives) {
    struct View {
      int position;
      int id;
    };
    int block_query = -1;  // seq index of the block's query
    std::vector<View> views;
    std::vector<int> click_positions;
    auto flush = [&]() {
      if (block_query >= 0) {
        const auto& qev = enc.seq[static_cast<std::size_t>(block_query)];
        for (int p : click_positions)
          for (const auto& v : views)
            if (v.position < p && v.id >= 0 &&
                std::find(click_positions.begin(), click_positions.end(), v.position) ==
                    click_positions.end())
              enc.negatives.push_back({qev.center_begin, qev.center_end, v.id});
      }
      views.clear();
      click_positions.clear();
    };
    for (std::size_t pi = 0; pi < plan.events.size(); ++pi) {
      const auto& ep = plan.events[pi];
      if (ep.kind == session::EventKind::Query) {
        flush();
        block_query = seq_of_plan[pi];
      } else if (ep.kind == session::EventKind::AdView && ep.position) {
        auto id = vocab.find(TokenKind::Ad, ep.raw.text);
        views.push_back({*ep.position, id ? *id : -1});
      } else if (ep.kind == session::EventKind::AdClick && ep.position) {
        click_positions.push_back(*ep.position);
      }
    }
    flush();
  }
  return enc;
}

std::uint64_t count_examples(const EncodedSession& s, int window) {
  std::uint64_t n = 0;
  std::int64_t len = static_cast<std::int64_t>(s.seq.size());
  for (std::int64_t m = 0; m < len; ++m) {
    std::uint64_t centers = s.seq[m].center_end - s.seq[m].center_begin;
    for (std::int64_t off = -window; off <= window; ++off) {
      if (off == 0) continue;
      std::int64_t j = m + off;
      if (j < 0 || j >= len) continue;
      n += centers * (s.seq[j].context_end - s.seq[j].context_begin);
    }
  }
  for (const auto& neg : s.negatives) n += neg.center_end - neg.center_begin;
  return n;
}

Vocabulary build_vocabulary(const std::vector<session::Session>& sessions, Variant variant,
                            const TrainConfig& config, const geo::LocationResolver* resolver,
                            const ExtractionProvider* extractor) {
  Vocabulary vocab;
  std::vector<const TokenRef*> seen;
  for (const auto& s : sessions) {
    SessionPlan plan = plan_session(s, variant, resolver, extractor);
    for (const auto& ep : plan.events) {
      seen.clear();
      auto touch = [&](const TokenRef& t) {
        for (const TokenRef* p : seen)
          if (*p == t) return;
        seen.push_back(&t);
        vocab.add(t.kind, t.text);
      };
      touch(ep.raw);
      for (const auto& entry : ep.center)
        for (const auto& member : entry) touch(member);
      for (const auto& entry : ep.context)
        for (const auto& member : entry) touch(member);
    }
  }
  vocab.prune(config.min_count);
  if (vocab.size() == 0) throw EmptyCorpus();
  return vocab;
}

std::vector<TrainingExample> generate_examples(const session::Session& s, Variant variant,
                                               const TrainConfig& config, const Vocabulary& vocab,
                                               const geo::LocationResolver* resolver,
                                               const ExtractionProvider* extractor) {
  EncodedSession enc =
      encode_session(plan_session(s, variant, resolver, extractor), vocab,
                     config.implicit_negatives, config.subsample, config.seed, s.session_id);
  std::vector<TrainingExample> out;
  for_each_example(enc, config.window,
                   [&](std::span<const int> center, std::span<const int> context, bool positive) {
                     out.push_back(TrainingExample{{center.begin(), center.end()},
                                                   {context.begin(), context.end()},
                                                   positive});
                   });
  return out;
}

// ---------------------------------------------------------------------------
// Model math
// ---------------------------------------------------------------------------

void EmbeddingModel::init_weights(std::uint64_t seed) {
  std::size_t n = static_cast<std::size_t>(vocab.size()) * static_cast<std::size_t>(dim);
  input.assign(n, 0.0);
  output.assign(n, 0.0);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < n; ++i) input[i] = (u64_to_unit(rng()) - 0.5) / dim;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

namespace {

void sum_rows(const EmbeddingModel& m, const double* table, std::span<const int> ids,
              std::vector<double>& buf) {
  buf.assign(static_cast<std::size_t>(m.dim), 0.0);
  for (int id : ids) {
    const double* row = table + static_cast<std::size_t>(id) * m.dim;
    for (int k = 0; k < m.dim; ++k) buf[static_cast<std::size_t>(k)] += row[k];
  }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

thread_local std::vector<double> t_center_sum;
thread_local std::vector<double> t_context_sum;

}  // namespace

double score(const EmbeddingModel& m, std::span<const int> center, std::span<const int> context) {
  sum_rows(m, m.input.data(), center, t_center_sum);
  sum_rows(m, m.output.data(), context, t_context_sum);
  return dot(t_center_sum, t_context_sum);
}

double softmax_prob(const EmbeddingModel& m, std::span<const int> center, int target) {
  sum_rows(m, m.input.data(), center, t_center_sum);
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> scores(static_cast<std::size_t>(m.vocab.size()));
  for (int d = 0; d < m.vocab.size(); ++d) {
    const double* row = m.out(d);
    double s = 0.0;
    for (int k = 0; k < m.dim; ++k) s += t_center_sum[static_cast<std::size_t>(k)] * row[k];
    scores[static_cast<std::size_t>(d)] = s;
    best = std::max(best, s);
  }
  double denom = 0.0;
  for (double s : scores) denom += std::exp(s - best);
  return std::exp(scores[static_cast<std::size_t>(target)] - best) / denom;
}

void sgd_step(EmbeddingModel& m, std::span<const int> center, std::span<const int> context,
              bool positive, double lr) {
  sum_rows(m, m.input.data(), center, t_center_sum);
  sum_rows(m, m.output.data(), context, t_context_sum);
  double s = dot(t_center_sum, t_context_sum);
  double g = ((positive ? 1.0 : 0.0) - sigmoid(s)) * lr;
  for (int id : context) {
    double* row = m.out(id);
    for (int k = 0; k < m.dim; ++k) row[k] += g * t_center_sum[static_cast<std::size_t>(k)];
  }
  // t_context_sum still holds the pre-update sum by construction.
  for (int id : center) {
    double* row = m.in(id);
    for (int k = 0; k < m.dim; ++k) row[k] += g * t_context_sum[static_cast<std::size_t>(k)];
  }
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

EmbeddingModel train(const std::vector<session::Session>& sessions, Variant variant,
                     const TrainConfig& config, const geo::LocationResolver* resolver,
                     const ExtractionProvider* extractor, TrainStats* stats) {
  EmbeddingModel model;
  model.variant = variant;
  model.dim = config.dim;
  model.vocab = build_vocabulary(sessions, variant, config, resolver, extractor);
  model.init_weights(config.seed);

  NegativeSampler sampler(model.vocab, config.negative_power);

  std::vector<EncodedSession> encoded;
  encoded.reserve(sessions.size());
  std::uint64_t per_pass = 0;
  std::uint64_t implicit = 0;
  for (const auto& s : sessions) {
    EncodedSession enc =
        encode_session(plan_session(s, variant, resolver, extractor), model.vocab,
                       config.implicit_negatives, config.subsample, config.seed, s.session_id);
    per_pass += count_examples(enc, config.window);
    for (const auto& neg : enc.negatives) implicit += neg.center_end - neg.center_begin;
    encoded.push_back(std::move(enc));
  }

  std::uint64_t epochs = static_cast<std::uint64_t>(std::max(config.epochs, 0));
  std::uint64_t total = per_pass * epochs;
  if (stats != nullptr) {
    stats->examples = total;
    stats->implicit_negatives = implicit * epochs;
    stats->sampled_negatives = 0;
    stats->vocab_size = model.vocab.size();
  }
  if (total == 0) return model;

  int workers = std::max(config.workers, 1);
  std::atomic<std::uint64_t> processed{0};
  std::atomic<std::uint64_t> sampled_total{0};
  double lr_lo = std::min(config.lr_initial, config.lr_final);

  auto run_worker = [&](int w) {
    std::mt19937_64 rng(config.seed * 0x9e3779b97f4a7c15ull + 0x100000001b3ull *
                                                                  static_cast<std::uint64_t>(w + 1));
    std::uint64_t sampled = 0;
    std::vector<int> negative_id(1, 0);
    for (std::uint64_t epoch = 0; epoch < epochs; ++epoch) {
      for (std::size_t si = static_cast<std::size_t>(w); si < encoded.size();
           si += static_cast<std::size_t>(workers)) {
        for_each_example(
            encoded[si], config.window,
            [&](std::span<const int> center, std::span<const int> context, bool positive) {
              std::uint64_t p = processed.fetch_add(1, std::memory_order_relaxed);
              double frac = std::min(1.0, static_cast<double>(p) / static_cast<double>(total));
              double lr = config.lr_initial + (config.lr_final - config.lr_initial) * frac;
              lr = std::max(lr, lr_lo);
              sgd_step(model, center, context, positive, lr);
              if (positive && config.negatives > 0) {
                TokenKind kind = model.vocab.entry(context[0]).kind;
                for (int k = 0; k < config.negatives; ++k) {
                  if (auto neg = sampler.sample(kind, context, rng)) {
                    negative_id[0] = *neg;
                    sgd_step(model, center, negative_id, false, lr);
                    ++sampled;
                  }
                }
              }
            });
      }
    }
    sampled_total.fetch_add(sampled, std::memory_order_relaxed);
  };

  if (workers == 1) {
    run_worker(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) threads.emplace_back(run_worker, w);
    for (auto& t : threads) t.join();
  }
  if (stats != nullptr) stats->sampled_negatives = sampled_total.load();
  return model;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

namespace {

void write_vectors(std::ostream& out, const EmbeddingModel& m, const double* table) {
  char buf[64];
  std::string line;
  for (int id = 0; id < m.vocab.size(); ++id) {
    const auto& e = m.vocab.entry(id);
    line.clear();
    line += to_string(e.kind);
    line += '\t';
    line += e.token;
    line += '\t';
    const double* row = table + static_cast<std::size_t>(id) * m.dim;
    for (int k = 0; k < m.dim; ++k) {
      if (k > 0) line += ' ';
      std::snprintf(buf, sizeof buf, "%.9g", row[k]);
      line += buf;
    }
    line += '\n';
    out << line;
  }
}

}  // namespace

void EmbeddingModel::save(std::ostream& os) const {
  os << "WORLD2VEC 1 " << to_string(variant) << ' ' << dim << ' ' << vocab.size() << '\n';
  write_vectors(os, *this, input.data());
  os << "#OUTPUT\n";
  write_vectors(os, *this, output.data());
}

EmbeddingModel EmbeddingModel::load(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty model file", 1);
  ++line_no;
  auto header = split(line, ' ');
  if (header.size() != 5 || header[0] != "WORLD2VEC" || header[1] != "1")
    throw ParseError("bad model header", line_no);
  EmbeddingModel m;
  auto variant = variant_from(header[2]);
  if (!variant) throw ParseError("unknown model variant", line_no);
  m.variant = *variant;
  int vocab_size = 0;
  if (!parse_int(header[3], m.dim) || !parse_int(header[4], vocab_size) || m.dim <= 0 ||
      vocab_size < 0)
    throw ParseError("bad model dimensions", line_no);

  std::size_t n = static_cast<std::size_t>(vocab_size) * static_cast<std::size_t>(m.dim);
  m.input.assign(n, 0.0);
  m.output.assign(n, 0.0);

  for (int id = 0; id < vocab_size; ++id) {
    if (!std::getline(in, line)) throw ParseError("unexpected end of model file", line_no + 1);
    ++line_no;
    auto fields = split(line, '\t');
    if (fields.size() != 3) throw ParseError("expected kind, token, vector", line_no);
    auto kind = token_kind_from(fields[0]);
    if (!kind) throw ParseError("unknown token kind", line_no);
    if (m.vocab.find(*kind, fields[1])) throw ParseError("duplicate vocabulary entry", line_no);
    int got = m.vocab.add(*kind, fields[1], 0);
    auto comps = split(fields[2], ' ');
    if (static_cast<int>(comps.size()) != m.dim)
      throw ParseError("wrong number of vector components", line_no);
    double* row = m.input.data() + static_cast<std::size_t>(got) * m.dim;
    for (int k = 0; k < m.dim; ++k)
      if (!parse_f64(comps[static_cast<std::size_t>(k)], row[k]))
        throw ParseError("bad vector component", line_no);
  }
  if (!std::getline(in, line) || line != "#OUTPUT")
    throw ParseError("missing #OUTPUT separator", line_no + 1);
  ++line_no;
  for (int id = 0; id < vocab_size; ++id) {
    if (!std::getline(in, line)) throw ParseError("unexpected end of model file", line_no + 1);
    ++line_no;
    auto fields = split(line, '\t');
    if (fields.size() != 3) throw ParseError("expected kind, token, vector", line_no);
    auto kind = token_kind_from(fields[0]);
    if (!kind) throw ParseError("unknown token kind", line_no);
    const auto& e = m.vocab.entry(id);
    if (e.kind != *kind || e.token != fields[1])
      throw ParseError("output vector order differs from input section", line_no);
    auto comps = split(fields[2], ' ');
    if (static_cast<int>(comps.size()) != m.dim)
      throw ParseError("wrong number of vector components", line_no);
    double* row = m.output.data() + static_cast<std::size_t>(id) * m.dim;
    for (int k = 0; k < m.dim; ++k)
      if (!parse_f64(comps[static_cast<std::size_t>(k)], row[k]))
        throw ParseError("bad vector component", line_no);
  }
  return m;
}

}  // namespace w2v::embed
