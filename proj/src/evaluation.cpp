#include "w2v/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace w2v::eval {

double precision_at_k(std::span<const std::string> retrieved,
                      const std::unordered_set<std::string>& clicked, int k) {
  if (k < 1) return 0.0;
  std::size_t top = std::min<std::size_t>(static_cast<std::size_t>(k), retrieved.size());
  int hits = 0;
  for (std::size_t i = 0; i < top; ++i)
    if (clicked.count(retrieved[i]) != 0) ++hits;
  return static_cast<double>(hits) / static_cast<double>(k);
}

std::string to_string(Grade g) {
  switch (g) {
    case Grade::Perfect: return "Perfect";
    case Grade::Highly: return "Highly";
    case Grade::Relevant: return "Relevant";
    case Grade::Somewhat: return "Somewhat";
    case Grade::Barely: return "Barely";
    case Grade::Irrelevant: return "Irrelevant";
  }
  return "?";
}

std::optional<Grade> grade_from(std::string_view s) {
  if (s == "Perfect") return Grade::Perfect;
  if (s == "Highly") return Grade::Highly;
  if (s == "Relevant") return Grade::Relevant;
  if (s == "Somewhat") return Grade::Somewhat;
  if (s == "Barely") return Grade::Barely;
  if (s == "Irrelevant") return Grade::Irrelevant;
  return std::nullopt;
}

double default_gain(Grade g) { return std::pow(2.0, static_cast<double>(g)) - 1.0; }

namespace {

double dcg(std::span<const double> gains, int k) {
  double sum = 0.0;
  std::size_t top = std::min<std::size_t>(static_cast<std::size_t>(std::max(k, 0)), gains.size());
  for (std::size_t i = 0; i < top; ++i)
    sum += gains[i] / std::log2(static_cast<double>(i) + 2.0);
  return sum;
}

}  // namespace

double ndcg(std::span<const Grade> ranked, const std::function<double(Grade)>& gain, int k) {
  std::vector<double> gains;
  gains.reserve(ranked.size());
  for (Grade g : ranked) gains.push_back(gain(g));
  std::vector<double> ideal = gains;
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  double idcg = dcg(ideal, k);
  if (idcg == 0.0) return 1.0;
  return dcg(gains, k) / idcg;
}

double ndcg(std::span<const Grade> ranked, int k) { return ndcg(ranked, default_gain, k); }

// ---------------------------------------------------------------------------
// Judgments
// ---------------------------------------------------------------------------

std::vector<Judgment> load_judgments(std::istream& in) {
  std::vector<Judgment> out;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 3) throw ParseError("expected query, ad, grade", line_no);
    auto grade = grade_from(fields[2]);
    if (!grade) throw ParseError("unknown grade name", line_no);
    std::string key = std::string(fields[0]) + '\t' + std::string(fields[1]);
    if (!seen.insert(std::move(key)).second)
      throw ParseError("duplicate (query, ad) judgment", line_no);
    out.push_back(Judgment{std::string(fields[0]), std::string(fields[1]), *grade});
  }
  return out;
}

void save_judgments(std::ostream& out, const std::vector<Judgment>& judgments) {
  for (const auto& j : judgments)
    out << j.query << '\t' << j.ad << '\t' << to_string(j.grade) << '\n';
}

namespace {

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  if (n == 0) return 0.0;
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::optional<std::vector<double>> input_vector(const embed::EmbeddingModel& m,
                                                embed::TokenKind kind, const std::string& token) {
  auto id = m.vocab.find(kind, token);
  if (!id) return std::nullopt;
  const double* row = m.in(*id);
  return std::vector<double>(row, row + m.dim);
}

}  // namespace

GradeReport score_by_grade(const embed::EmbeddingModel& model,
                           const std::vector<Judgment>& judgments) {
  GradeReport report;
  std::map<Grade, std::vector<double>> cosines;
  for (const auto& j : judgments) {
    auto q = input_vector(model, embed::TokenKind::Query, j.query);
    auto a = input_vector(model, embed::TokenKind::Ad, j.ad);
    std::optional<double> c;
    if (q && a) c = retrieval::try_cosine(*q, *a);
    if (!c) {
      ++report.skipped;
      continue;
    }
    cosines[j.grade].push_back(*c);
  }
  for (auto& [grade, values] : cosines) {
    GradeStats stats;
    stats.count = static_cast<int>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    stats.mean_cosine = sum / static_cast<double>(values.size());
    stats.median_cosine = median_of(values);
    report.by_grade[grade] = stats;
  }
  return report;
}

NdcgReport evaluate_ndcg(const embed::EmbeddingModel& model,
                         const std::vector<Judgment>& judgments, int k) {
  NdcgReport report;
  // Group judgments by query, preserving first-appearance order.
  std::vector<std::string> order;
  std::map<std::string, std::vector<const Judgment*>> groups;
  for (const auto& j : judgments) {
    auto [it, inserted] = groups.try_emplace(j.query);
    if (inserted) order.push_back(j.query);
    it->second.push_back(&j);
  }
  double sum = 0.0;
  for (const auto& query : order) {
    auto qvec = input_vector(model, embed::TokenKind::Query, query);
    if (!qvec) {
      ++report.skipped_queries;
      continue;
    }
    struct Item {
      double cosine;
      std::string_view ad;
      Grade grade;
    };
    std::vector<Item> items;
    for (const Judgment* j : groups[query]) {
      auto avec = input_vector(model, embed::TokenKind::Ad, j->ad);
      std::optional<double> c;
      if (avec) c = retrieval::try_cosine(*qvec, *avec);
      if (!c) {
        ++report.skipped_pairs;
        continue;
      }
      items.push_back(Item{*c, j->ad, j->grade});
    }
    if (items.empty()) {
      ++report.skipped_queries;
      continue;
    }
    std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
      if (a.cosine != b.cosine) return a.cosine > b.cosine;
      return a.ad < b.ad;
    });
    std::vector<Grade> ranked;
    ranked.reserve(items.size());
    for (const auto& it : items) ranked.push_back(it.grade);
    sum += ndcg(ranked, k);
    ++report.queries;
  }
  if (report.queries > 0) report.mean = sum / static_cast<double>(report.queries);
  return report;
}

// ---------------------------------------------------------------------------
// Click-log task evaluation
// ---------------------------------------------------------------------------

TaskReport evaluate_task(const embed::EmbeddingModel& model, const retrieval::AdIndex& index,
                         const std::vector<session::Session>& test_sessions, retrieval::Task task,
                         std::span<const int> ks, const geo::LocationResolver* resolver,
                         const embed::ExtractionProvider* extractor) {
  TaskReport report;
  report.task = task;
  int max_k = 1;
  for (int k : ks) max_k = std::max(max_k, k);

  std::map<int, double> zero;
  for (int k : ks) zero[k] = 0.0;
  report.implicit_slice.precision_at = zero;
  report.explicit_slice.precision_at = zero;
  report.overall.precision_at = zero;

  for (const auto& s : test_sessions) {
    for (std::size_t i = 0; i < s.events.size(); ++i) {
      const auto& ev = s.events[i];
      if (ev.kind != session::EventKind::Query) continue;
      if (ev.local_intent == session::LocalIntent::None) continue;

      std::unordered_set<std::string> clicked;
      for (std::size_t j = i + 1; j < s.events.size(); ++j) {
        if (s.events[j].kind == session::EventKind::Query) break;
        if (s.events[j].kind == session::EventKind::AdClick) clicked.insert(s.events[j].token);
      }
      if (clicked.empty()) continue;

      SliceResult& slice = ev.local_intent == session::LocalIntent::Implicit
                               ? report.implicit_slice
                               : report.explicit_slice;
      ++slice.queries;
      ++report.overall.queries;

      std::optional<std::string> location;
      if (resolver != nullptr)
        if (auto loc = resolver->resolve(ev)) location = loc->id;
      std::optional<tagger::ExtractionSet> extraction;
      if (extractor != nullptr) extraction = extractor->extract(ev);

      std::optional<std::vector<double>> vec;
      try {
        vec = retrieval::compose_query_vector(model, task, ev.token, location,
                                              extraction ? &*extraction : nullptr);
      } catch (const retrieval::TokenNotFound&) {
      } catch (const retrieval::NoMatchableFragment&) {
      }
      if (!vec && extraction) {
        try {
          vec = retrieval::cold_start_lookup(model, *extraction).vector;
        } catch (const retrieval::NoMatchableFragment&) {
        }
      }
      std::vector<retrieval::Neighbor> ranked;
      if (vec) {
        try {
          ranked = index.knn(*vec, max_k);
        } catch (const retrieval::ZeroVector&) {
          vec.reset();
        }
      }
      if (!vec) {  // scores 0 at every K but stays in the denominator
        ++slice.unresolvable;
        ++report.overall.unresolvable;
        continue;
      }
      std::vector<std::string> tokens;
      tokens.reserve(ranked.size());
      for (const auto& nb : ranked) tokens.push_back(nb.token);
      for (int k : ks) {
        double p = precision_at_k(tokens, clicked, k);
        slice.precision_at[k] += p;
        report.overall.precision_at[k] += p;
      }
    }
  }
  for (SliceResult* slice : {&report.implicit_slice, &report.explicit_slice, &report.overall})
    if (slice->queries > 0)
      for (auto& [k, sum] : slice->precision_at) sum /= static_cast<double>(slice->queries);
  return report;
}

// ---------------------------------------------------------------------------
// Report rendering
// ---------------------------------------------------------------------------

namespace {

void print_slice_tsv(std::ostream& out, const std::string& name, const SliceResult& s) {
  for (const auto& [k, p] : s.precision_at)
    out << "precision\t" << name << "\t" << k << '\t' << p << '\n';
  out << "queries\t" << name << "\t-\t" << s.queries << '\n';
  out << "unresolvable\t" << name << "\t-\t" << s.unresolvable << '\n';
}

}  // namespace

void print_report(std::ostream& out, const EvalReport& report) {
  out << "task\t" << retrieval::to_string(report.task.task) << '\n';
  print_slice_tsv(out, "implicit", report.task.implicit_slice);
  print_slice_tsv(out, "explicit", report.task.explicit_slice);
  print_slice_tsv(out, "overall", report.task.overall);
  if (report.ndcg) {
    out << "ndcg\tmean\t-\t" << report.ndcg->mean << '\n';
    out << "ndcg\tqueries\t-\t" << report.ndcg->queries << '\n';
    out << "ndcg\tskipped_queries\t-\t" << report.ndcg->skipped_queries << '\n';
    out << "ndcg\tskipped_pairs\t-\t" << report.ndcg->skipped_pairs << '\n';
  }
  if (report.grades) {
    for (const auto& [grade, stats] : report.grades->by_grade)
      out << "grade\t" << to_string(grade) << '\t' << stats.count << '\t' << stats.mean_cosine
          << '\t' << stats.median_cosine << '\n';
    out << "grade\tskipped\t" << report.grades->skipped << "\t-\t-\n";
  }

  // Human-readable table.
  out << '\n' << "task " << retrieval::to_string(report.task.task) << '\n';
  auto print_slice = [&out](const std::string& name, const SliceResult& s) {
    out << "  " << name << " (" << s.queries << " queries, " << s.unresolvable
        << " unresolvable)\n";
    for (const auto& [k, p] : s.precision_at) {
      std::ostringstream cell;
      cell.setf(std::ios::fixed);
      cell.precision(4);
      cell << p;
      out << "    precision@" << k << " = " << cell.str() << '\n';
    }
  };
  print_slice("implicit", report.task.implicit_slice);
  print_slice("explicit", report.task.explicit_slice);
  print_slice("overall", report.task.overall);
  if (report.ndcg)
    out << "  ndcg mean = " << report.ndcg->mean << " over " << report.ndcg->queries
        << " queries\n";
  if (report.grades) {
    for (const auto& [grade, stats] : report.grades->by_grade)
      out << "  grade " << to_string(grade) << ": n=" << stats.count
          << " mean=" << stats.mean_cosine << " median=" << stats.median_cosine << '\n';
    if (report.grades->skipped > 0)
      out << "  grade pairs skipped: " << report.grades->skipped << '\n';
  }
}

}  // namespace w2v::eval
