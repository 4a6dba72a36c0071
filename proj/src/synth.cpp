#include "w2v/synth.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>

namespace w2v::synth {

std::string oracle_best_ad(const GroundTruth& truth, const std::string& subject,
                           const std::string& woeid) {
  auto it = truth.best_ad.find({subject, woeid});
  if (it == truth.best_ad.end()) throw UnknownPair(subject, woeid);
  return it->second;
}

namespace {

using session::EventKind;
using session::LocalIntent;
using session::Session;
using session::SessionEvent;
using tagger::Tag;

constexpr int kCitiesPerState = 5;
constexpr int kImplicitVariants = 20;
constexpr double kHomeVariantProb = 0.7;  // implicit wording tracks the user's city
constexpr double kSameCityProb = 0.75;    // later blocks keep the previous city
constexpr double kTargetIsUserCityProb = 0.6;
constexpr double kZipSurfaceProb = 0.10;
constexpr double kStateSurfaceProb = 0.05;  // on top of the zip share
constexpr double kTemplateZeroBoost = 0.3;
constexpr double kTestOnlyTemplateProb = 0.25;
constexpr double kSlcProb = 0.3;
constexpr double kViewSameSubjectProb = 0.5;
constexpr double kJunkWordProb = 0.10;
constexpr int kTaggingTrainSize = 3000;
constexpr int kTaggingHeldoutSize = 600;
constexpr int kJudgmentQueryTarget = 200;
constexpr std::int64_t kTimeBaseMs = 1600000000000;

const char* const kImplicitMarkers[kImplicitVariants] = {
    "best",     "cheap",      "top",     "good",    "local",    "great",   "cheapest",
    "nearby",   "new",        "popular", "top rated", "affordable", "quality", "trusted",
    "reliable", "friendly",   "premium", "budget",  "famous",   "favorite"};

const char* const kTrainTemplates[] = {
    "best {S} in {L}",    "{S} in {L}",          "{S} {L}",
    "cheap {S} in {L}",   "top rated {S} {L}",   "{S} near {L}",
    "find {S} in {L}",    "{L} {S}",             "good {S} {L}",
    "{S} deals in {L}",   "top {S} in {L}",      "{S} open now in {L}",
    "cheapest {S} {L}",   "local {S} in {L}",    "{S} reviews {L}",
    "best {S} around {L}", "{S} prices in {L}",  "nearby {S} in {L}"};

const char* const kTestTemplates[] = {
    "affordable {S} in {L}", "{S} options in {L}",  "looking for {S} in {L}",
    "great {S} around {L}",  "{S} services {L}",    "trusted {S} in {L}",
    "{S} quotes in {L}",     "premium {S} {L}",     "{S} listings {L}",
    "budget {S} in {L}",     "recommended {S} in {L}", "{S} specials {L}",
    "popular {S} in {L}",    "{S} directory {L}",   "quality {S} near {L}",
    "{S} guide {L}",         "famous {S} in {L}",   "{S} experts in {L}"};

const char* const kNonlocalTemplates[] = {"{S} online",  "{S} reviews", "buy {S}",
                                          "{S} website", "{S} wiki",    "what is {S}",
                                          "{S} images",  "{S} news"};

const char* const kJunkWords[] = {"please", "the",    "asap",   "info",
                                  "hq",     "tonight", "really", "urgent"};

constexpr int kNumTrainTemplates = static_cast<int>(std::size(kTrainTemplates));
constexpr int kNumTestTemplates = static_cast<int>(std::size(kTestTemplates));
constexpr int kNumNonlocalTemplates = static_cast<int>(std::size(kNonlocalTemplates));

/// All deterministic randomness flows through one generator; uniform draws
/// use the 53-bit mapping so output never depends on library distributions.
struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}
  double unit() { return u64_to_unit(gen()); }
  int below(int n) { return std::min(n - 1, static_cast<int>(unit() * n)); }
};

struct SubjectInfo {
  std::string surface;  // "s3 shops" / "org4 inc"
  std::string token;    // underscore form
  bool is_org = false;
};

enum class LocForm { City, Zip, State };

struct World {
  SynthConfig cfg;
  int n_states = 0;
  std::vector<std::string> state_surfaces;
  std::vector<std::string> city_surfaces;
  std::vector<std::string> zip_surfaces;
  std::vector<SubjectInfo> subjects;

  std::string state_woeid(int k) const { return "woeid_st" + std::to_string(k); }
  std::string city_woeid(int i) const { return "woeid_c" + std::to_string(i); }
  std::string zip_woeid(int i) const { return "woeid_z" + std::to_string(i); }
  int state_of(int city) const { return city / kCitiesPerState; }
  int state_city_count(int state) const {
    return std::min(kCitiesPerState, cfg.n_locations - state * kCitiesPerState);
  }

  int total_ads() const { return cfg.n_subjects * cfg.n_locations * cfg.n_ads_per_pair; }
  std::string ad_token(int subject, int city, int k) const {
    return "ad_" + subjects[static_cast<std::size_t>(subject)].token + "_" + city_woeid(city) +
           "_" + std::to_string(k);
  }
  std::string ad_by_index(int flat) const {
    int k = flat % cfg.n_ads_per_pair;
    flat /= cfg.n_ads_per_pair;
    int city = flat % cfg.n_locations;
    return ad_token(flat / cfg.n_locations, city, k);
  }
  std::string slc_token(int subject, int city) const {
    return "slc_" + subjects[static_cast<std::size_t>(subject)].token + "_" + city_woeid(city);
  }
};

World build_world(const SynthConfig& cfg) {
  World w;
  w.cfg = cfg;
  w.n_states = (cfg.n_locations + kCitiesPerState - 1) / kCitiesPerState;
  for (int k = 0; k < w.n_states; ++k) w.state_surfaces.push_back("st" + std::to_string(k) + " land");
  for (int i = 0; i < cfg.n_locations; ++i) {
    w.city_surfaces.push_back("c" + std::to_string(i) + " ville");
    w.zip_surfaces.push_back(std::to_string(20000 + i));
  }
  for (int j = 0; j < cfg.n_subjects; ++j) {
    SubjectInfo s;
    s.is_org = j % 5 == 4;
    s.surface = s.is_org ? "org" + std::to_string(j) + " inc" : "s" + std::to_string(j) + " shops";
    s.token = underscore_join(s.surface);
    w.subjects.push_back(std::move(s));
  }
  return w;
}

// ---------------------------------------------------------------------------
// Query construction (shared by sessions and the tagging corpus)
// ---------------------------------------------------------------------------

struct BuiltQuery {
  std::string surface;
  std::vector<std::string> tokens;
  std::vector<Tag> tags;
};

void append_span(BuiltQuery& q, std::string_view phrase, Tag begin, Tag inside) {
  bool first = true;
  for (auto word : split(phrase, ' ')) {
    q.tokens.emplace_back(word);
    q.tags.push_back(first ? begin : inside);
    first = false;
  }
}

/// Expands "{S}" / "{L}" placeholders; literal words are tagged O.
BuiltQuery build_query(std::string_view tmpl, const SubjectInfo& subject,
                       const std::string* loc_surface, LocForm loc_form) {
  BuiltQuery q;
  for (auto word : split(tmpl, ' ')) {
    if (word == "{S}") {
      append_span(q, subject.surface, subject.is_org ? Tag::B_ORG : Tag::B_CAT,
                  subject.is_org ? Tag::I_ORG : Tag::I_CAT);
    } else if (word == "{L}") {
      Tag begin = loc_form == LocForm::City  ? Tag::B_LOC_CITY
                  : loc_form == LocForm::Zip ? Tag::B_LOC_ZIP
                                             : Tag::B_LOC_STATE;
      Tag inside = loc_form == LocForm::City  ? Tag::I_LOC_CITY
                   : loc_form == LocForm::Zip ? Tag::I_LOC_ZIP
                                              : Tag::I_LOC_STATE;
      append_span(q, *loc_surface, begin, inside);
    } else {
      q.tokens.emplace_back(word);
      q.tags.push_back(Tag::O);
    }
  }
  q.surface = join(q.tokens, " ");
  return q;
}

BuiltQuery build_implicit_query(const World& w, int variant, int subject) {
  std::string tmpl = std::string(kImplicitMarkers[variant]) + " {S} near me";
  return build_query(tmpl, w.subjects[static_cast<std::size_t>(subject)], nullptr, LocForm::City);
}

// ---------------------------------------------------------------------------
// Session generation
// ---------------------------------------------------------------------------

int draw_block_count(Rng& rng) {
  double u = rng.unit();
  if (u < 0.15) return 1;
  if (u < 0.45) return 2;
  if (u < 0.75) return 3;
  return 4;
}

int draw_view_count(Rng& rng) {
  double u = rng.unit();
  if (u < 0.30) return 0;
  if (u < 0.75) return 1;
  return 2;
}

std::string draw_clicked_ad(const World& w, Rng& rng, int subject, int target_city) {
  if (rng.unit() < 1.0 - w.cfg.click_noise) return w.ad_token(subject, target_city, 0);
  return w.ad_by_index(rng.below(w.total_ads()));
}

std::string draw_view_ad(const World& w, Rng& rng, int subject, int target_city,
                         const std::string& clicked) {
  std::string candidate;
  if (rng.unit() < kViewSameSubjectProb && w.cfg.n_locations > 1) {
    int other = rng.below(w.cfg.n_locations - 1);
    if (other >= target_city) ++other;
    candidate = w.ad_token(subject, other, rng.below(w.cfg.n_ads_per_pair));
  } else {
    candidate = w.ad_by_index(rng.below(w.total_ads()));
  }
  for (int attempt = 0; attempt < 8 && candidate == clicked; ++attempt)
    candidate = w.ad_by_index(rng.below(w.total_ads()));
  if (candidate == clicked)  // single-ad worlds: shift deterministically
    candidate = w.ad_by_index((rng.below(w.total_ads()) + 1) % w.total_ads());
  return candidate;
}

/// Appends one query block (query, views, click, optional SLC) to `s`.
void append_block(Session& s, const World& w, Rng& rng, int block_city, bool is_test,
                  std::int64_t& ts) {
  int subject = rng.below(w.cfg.n_subjects);
  double type_draw = rng.unit();
  bool implicit = type_draw < w.cfg.p_implicit;
  bool explicit_ = !implicit && type_draw < w.cfg.p_implicit + w.cfg.p_explicit;

  SessionEvent query;
  query.kind = EventKind::Query;
  query.timestamp_ms = (ts += 1000);
  int target_city = block_city;

  if (implicit) {
    // Wording correlates with the user's city: one marker variant is "homed"
    // at each city and chosen with probability kHomeVariantProb.
    double home_draw = rng.unit();
    int v = rng.below(kImplicitVariants);
    std::vector<int> homed;
    for (int cand = 0; cand < kImplicitVariants; ++cand)
      if (cand % w.cfg.n_locations == block_city) homed.push_back(cand);
    if (home_draw < kHomeVariantProb && !homed.empty())
      v = homed[static_cast<std::size_t>(v) % homed.size()];
    query.token = build_implicit_query(w, v, subject).surface;
    query.local_intent = LocalIntent::Implicit;
    query.user_woeid = w.city_woeid(block_city);
  } else if (explicit_) {
    if (rng.unit() < kTargetIsUserCityProb)
      target_city = block_city;
    else
      target_city = rng.below(w.cfg.n_locations);
    double form_draw = rng.unit();
    LocForm form = form_draw < kZipSurfaceProb ? LocForm::Zip
                   : form_draw < kZipSurfaceProb + kStateSurfaceProb ? LocForm::State
                                                                     : LocForm::City;
    const std::string* loc_surface = nullptr;
    switch (form) {
      case LocForm::City:
        loc_surface = &w.city_surfaces[static_cast<std::size_t>(target_city)];
        query.query_woeid = w.city_woeid(target_city);
        break;
      case LocForm::Zip:
        loc_surface = &w.zip_surfaces[static_cast<std::size_t>(target_city)];
        query.query_woeid = w.zip_woeid(target_city);
        break;
      case LocForm::State:
        loc_surface = &w.state_surfaces[static_cast<std::size_t>(w.state_of(target_city))];
        query.query_woeid = w.state_woeid(w.state_of(target_city));
        break;
    }
    double template_draw = rng.unit();
    std::string tmpl;
    if (is_test && template_draw < kTestOnlyTemplateProb)
      tmpl = kTestTemplates[rng.below(kNumTestTemplates)];
    else if (rng.unit() < kTemplateZeroBoost)
      tmpl = kTrainTemplates[0];
    else
      tmpl = kTrainTemplates[rng.below(kNumTrainTemplates)];
    query.token =
        build_query(tmpl, w.subjects[static_cast<std::size_t>(subject)], loc_surface, form).surface;
    query.local_intent = LocalIntent::Explicit;
    query.user_woeid = w.city_woeid(block_city);
  } else {
    std::string tmpl = kNonlocalTemplates[rng.below(kNumNonlocalTemplates)];
    query.token =
        build_query(tmpl, w.subjects[static_cast<std::size_t>(subject)], nullptr, LocForm::City)
            .surface;
    query.local_intent = LocalIntent::None;
  }
  s.events.push_back(std::move(query));

  int views = draw_view_count(rng);
  std::string clicked = draw_clicked_ad(w, rng, subject, target_city);
  for (int p = 1; p <= views; ++p) {
    SessionEvent view;
    view.kind = EventKind::AdView;
    view.token = draw_view_ad(w, rng, subject, target_city, clicked);
    view.timestamp_ms = (ts += 1000);
    view.position = p;
    s.events.push_back(std::move(view));
  }
  SessionEvent click;
  click.kind = EventKind::AdClick;
  click.token = clicked;
  click.timestamp_ms = (ts += 1000);
  click.position = views + 1;
  s.events.push_back(std::move(click));

  if (rng.unit() < kSlcProb) {
    SessionEvent slc;
    slc.kind = EventKind::SearchLinkClick;
    slc.token = w.slc_token(subject, target_city);
    slc.timestamp_ms = (ts += 1000);
    s.events.push_back(std::move(slc));
  }
}

Session make_session(const World& w, Rng& rng, const std::string& id, std::int64_t base_ts,
                     bool is_test) {
  Session s;
  s.session_id = id;
  std::int64_t ts = base_ts;
  int blocks = draw_block_count(rng);
  int city = rng.below(w.cfg.n_locations);
  for (int b = 0; b < blocks; ++b) {
    if (b > 0 && rng.unit() >= kSameCityProb) {
      int state = w.state_of(city);
      city = state * kCitiesPerState + rng.below(w.state_city_count(state));
    }
    append_block(s, w, rng, city, is_test, ts);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Tagging corpus
// ---------------------------------------------------------------------------

tagger::TaggedQuery random_tagged_query(const World& w, Rng& rng, bool heldout) {
  double u = rng.unit();
  BuiltQuery q;
  int subject = rng.below(w.cfg.n_subjects);
  if (u < 0.4) {
    q = build_implicit_query(w, rng.below(kImplicitVariants), subject);
  } else if (u < 0.9) {
    int city = rng.below(w.cfg.n_locations);
    double form_draw = rng.unit();
    LocForm form = form_draw < kZipSurfaceProb ? LocForm::Zip
                   : form_draw < kZipSurfaceProb + kStateSurfaceProb ? LocForm::State
                                                                     : LocForm::City;
    const std::string* loc = form == LocForm::City ? &w.city_surfaces[static_cast<std::size_t>(city)]
                             : form == LocForm::Zip
                                 ? &w.zip_surfaces[static_cast<std::size_t>(city)]
                                 : &w.state_surfaces[static_cast<std::size_t>(w.state_of(city))];
    std::string tmpl;
    if (heldout && rng.unit() < 0.5)
      tmpl = kTestTemplates[rng.below(kNumTestTemplates)];
    else
      tmpl = kTrainTemplates[rng.below(kNumTrainTemplates)];
    q = build_query(tmpl, w.subjects[static_cast<std::size_t>(subject)], loc, form);
  } else {
    q = build_query(kNonlocalTemplates[rng.below(kNumNonlocalTemplates)],
                    w.subjects[static_cast<std::size_t>(subject)], nullptr, LocForm::City);
  }
  if (rng.unit() < kJunkWordProb) {
    // Junk may only land between spans: inserting before an inside tag (the
    // odd enum values) would break BIO validity.
    std::vector<int> slots;
    for (int pos = 0; pos <= static_cast<int>(q.tokens.size()); ++pos)
      if (pos == static_cast<int>(q.tokens.size()) ||
          static_cast<int>(q.tags[static_cast<std::size_t>(pos)]) % 2 == 0)
        slots.push_back(pos);
    int pos = slots[static_cast<std::size_t>(rng.below(static_cast<int>(slots.size())))];
    const char* junk = kJunkWords[rng.below(static_cast<int>(std::size(kJunkWords)))];
    q.tokens.insert(q.tokens.begin() + pos, junk);
    q.tags.insert(q.tags.begin() + pos, Tag::O);
  }
  return tagger::TaggedQuery{std::move(q.tokens), std::move(q.tags)};
}

// ---------------------------------------------------------------------------
// Judgments
// ---------------------------------------------------------------------------

std::optional<int> same_state_other_city(const World& w, int city) {
  int state = w.state_of(city);
  int base = state * kCitiesPerState;
  int count = w.state_city_count(state);
  if (count < 2) return std::nullopt;
  return base + (city - base + 1) % count;
}

std::optional<int> other_state_city(const World& w, int city) {
  if (w.n_states < 2) return std::nullopt;
  int other_state = (w.state_of(city) + 1) % w.n_states;
  int base = other_state * kCitiesPerState;
  int count = w.state_city_count(other_state);
  return base + (city % kCitiesPerState) % count;
}

std::vector<eval::Judgment> build_judgments(const World& w) {
  std::vector<eval::Judgment> out;
  std::set<std::pair<int, int>> used;
  int target = std::min(kJudgmentQueryTarget, w.cfg.n_subjects * w.cfg.n_locations);
  for (int q = 0; used.size() < static_cast<std::size_t>(target) &&
                  q < w.cfg.n_subjects * w.cfg.n_locations * 4;
       ++q) {
    int subject = q % w.cfg.n_subjects;
    int city = (7 * q + 3 * (q / w.cfg.n_subjects) + 3) % w.cfg.n_locations;
    if (!used.insert({subject, city}).second) continue;
    const auto& subj = w.subjects[static_cast<std::size_t>(subject)];
    std::string query =
        build_query(kTrainTemplates[0], subj, &w.city_surfaces[static_cast<std::size_t>(city)],
                    LocForm::City)
            .surface;

    auto near = same_state_other_city(w, city);
    auto far = other_state_city(w, city);
    int other_subject = (subject + 1) % w.cfg.n_subjects;
    bool has_other_subject = other_subject != subject;

    auto add = [&](eval::Grade grade, int s_idx, int c_idx) {
      out.push_back(eval::Judgment{query, w.ad_token(s_idx, c_idx, 0), grade});
    };
    add(eval::Grade::Perfect, subject, city);
    if (near) add(eval::Grade::Highly, subject, *near);
    if (far) add(eval::Grade::Relevant, subject, *far);
    if (has_other_subject) {
      add(eval::Grade::Somewhat, other_subject, city);
      if (near) add(eval::Grade::Barely, other_subject, *near);
      if (far) add(eval::Grade::Irrelevant, other_subject, *far);
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Generation entry point
// ---------------------------------------------------------------------------

Corpus generate(const SynthConfig& cfg) {
  if (cfg.n_locations < 1 || cfg.n_subjects < 1 || cfg.n_ads_per_pair < 1 || cfg.n_sessions < 0)
    throw InvalidConfig("counts must be positive");
  if (cfg.p_implicit < 0.0 || cfg.p_implicit > 1.0 || cfg.p_explicit < 0.0 ||
      cfg.p_explicit > 1.0 || cfg.p_implicit + cfg.p_explicit > 1.0)
    throw InvalidConfig("intent probabilities must lie in [0,1] and sum to at most 1");
  if (cfg.click_noise < 0.0 || cfg.click_noise >= 1.0)
    throw InvalidConfig("click_noise must lie in [0,1)");

  World w = build_world(cfg);
  Corpus corpus;

  // Places.
  corpus.woeids.add({"woeid_us", geo::WoeidLevel::Country, std::nullopt});
  for (int k = 0; k < w.n_states; ++k)
    corpus.woeids.add({w.state_woeid(k), geo::WoeidLevel::State, "woeid_us"});
  for (int i = 0; i < cfg.n_locations; ++i) {
    corpus.woeids.add({w.city_woeid(i), geo::WoeidLevel::City, w.state_woeid(w.state_of(i))});
    corpus.woeids.add({w.zip_woeid(i), geo::WoeidLevel::Zip, w.city_woeid(i)});
    corpus.gazetteer.add(w.city_surfaces[static_cast<std::size_t>(i)], w.city_woeid(i));
    corpus.gazetteer.add(w.zip_surfaces[static_cast<std::size_t>(i)], w.zip_woeid(i));
    corpus.city_woeids.push_back(w.city_woeid(i));
  }
  for (int k = 0; k < w.n_states; ++k)
    corpus.gazetteer.add(w.state_surfaces[static_cast<std::size_t>(k)], w.state_woeid(k));

  // Lexicon.
  corpus.lexicon.add_qualifier("best", tagger::QualifierType::Superlative);
  corpus.lexicon.add_qualifier("top", tagger::QualifierType::Superlative);
  corpus.lexicon.add_qualifier("cheap", tagger::QualifierType::Price);
  corpus.lexicon.add_qualifier("cheapest", tagger::QualifierType::Price);
  corpus.lexicon.add_qualifier("nearby", tagger::QualifierType::Proximity);
  corpus.lexicon.add_qualifier("closest", tagger::QualifierType::Proximity);
  corpus.lexicon.add_qualifier("new", tagger::QualifierType::Recency);
  corpus.lexicon.add_qualifier("newest", tagger::QualifierType::Recency);
  corpus.lexicon.add_qualifier("top rated", tagger::QualifierType::Rating);
  corpus.lexicon.add_qualifier("5 star", tagger::QualifierType::Rating);
  corpus.lexicon.add_attribute("open now");
  corpus.lexicon.add_attribute("with parking");
  corpus.lexicon.add_attribute("delivery");
  corpus.lexicon.add_exclusion("near me");

  // Subjects, ads, ground truth.
  for (const auto& s : w.subjects) corpus.subject_surfaces.push_back(s.surface);
  corpus.total_ads = w.total_ads();
  for (int j = 0; j < cfg.n_subjects; ++j)
    for (int i = 0; i < cfg.n_locations; ++i)
      corpus.truth.best_ad[{w.subjects[static_cast<std::size_t>(j)].surface, w.city_woeid(i)}] =
          w.ad_token(j, i, 0);

  Rng rng(cfg.seed);
  corpus.train.reserve(static_cast<std::size_t>(cfg.n_sessions));
  for (int i = 0; i < cfg.n_sessions; ++i)
    corpus.train.push_back(make_session(w, rng, "s" + std::to_string(i),
                                        kTimeBaseMs + static_cast<std::int64_t>(i) * 1000000,
                                        false));
  int n_test = std::max(cfg.n_sessions / 10, std::min(cfg.n_sessions, 1000));
  corpus.test.reserve(static_cast<std::size_t>(n_test));
  for (int i = 0; i < n_test; ++i)
    corpus.test.push_back(make_session(
        w, rng, "t" + std::to_string(i),
        kTimeBaseMs + static_cast<std::int64_t>(cfg.n_sessions + i) * 1000000, true));

  for (int i = 0; i < kTaggingTrainSize; ++i)
    corpus.tagging_train.push_back(random_tagged_query(w, rng, false));
  for (int i = 0; i < kTaggingHeldoutSize; ++i)
    corpus.tagging_heldout.push_back(random_tagged_query(w, rng, true));

  corpus.judgments = build_judgments(w);
  return corpus;
}

// ---------------------------------------------------------------------------
// File emission
// ---------------------------------------------------------------------------

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

void write_corpus(const std::filesystem::path& dir, const Corpus& corpus) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_out(dir / "sessions.tsv");
    session::serialize_sessions(corpus.train, out);
  }
  {
    auto out = open_out(dir / "test_sessions.tsv");
    session::serialize_sessions(corpus.test, out);
  }
  {
    auto out = open_out(dir / "tagging_train.conll");
    tagger::save_tagged_corpus(corpus.tagging_train, out);
  }
  {
    auto out = open_out(dir / "tagging_heldout.conll");
    tagger::save_tagged_corpus(corpus.tagging_heldout, out);
  }
  {
    auto out = open_out(dir / "judgments.tsv");
    eval::save_judgments(out, corpus.judgments);
  }
  {
    auto out = open_out(dir / "ground_truth.tsv");
    for (const auto& [key, ad] : corpus.truth.best_ad)
      out << key.first << '\t' << key.second << '\t' << ad << '\n';
  }
  {
    auto out = open_out(dir / "woeids.tsv");
    corpus.woeids.save(out);
  }
  {
    auto out = open_out(dir / "gazetteer.tsv");
    std::vector<std::pair<std::string, std::string>> rows(corpus.gazetteer.surface_to_woeid.begin(),
                                                          corpus.gazetteer.surface_to_woeid.end());
    std::sort(rows.begin(), rows.end());
    for (const auto& [surface, woeid] : rows) out << surface << '\t' << woeid << '\n';
  }
  {
    auto out = open_out(dir / "lexicon.tsv");
    std::vector<std::string> lines;
    for (const auto& [phrase, type] : corpus.lexicon.qualifiers)
      lines.push_back(phrase + "\tQUALIFIER\t" + tagger::to_string(type));
    for (const auto& [phrase, unused] : corpus.lexicon.attributes)
      lines.push_back(phrase + "\tATTRIBUTE");
    for (const auto& [phrase, unused] : corpus.lexicon.exclusions)
      lines.push_back(phrase + "\tEXCLUDE");
    std::sort(lines.begin(), lines.end());
    for (const auto& line : lines) out << line << '\n';
  }
}

}  // namespace w2v::synth
