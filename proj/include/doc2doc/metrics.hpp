#pragma once

// Evaluation metrics: corpus BLEU at sentence and document granularity,
// labeled-word span metrics (TC / CP / PT) with their geometric mean, and
// Pearson correlation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "doc2doc/corpus.hpp"
#include "doc2doc/error.hpp"
#include "doc2doc/formats.hpp"
#include "doc2doc/tokenizer.hpp"

namespace doc2doc {

struct MetricReport {
  std::string name;
  double value = 0.0;
  // Count metrics set value = 100 * numerator / denominator. BLEU leaves
  // both at zero.
  std::size_t numerator = 0;
  std::size_t denominator = 0;

  nlohmann::json to_json() const {
    return {{"name", name}, {"value", value}, {"numerator", numerator},
            {"denominator", denominator}};
  }
};

inline std::string format_fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// BLEU

/// Pooled n-gram statistics of a hypothesis/reference corpus.
struct BleuStats {
  std::vector<std::size_t> matches;  // index n-1: clipped n-gram matches
  std::vector<std::size_t> totals;   // index n-1: hypothesis n-grams
  std::size_t hyp_length = 0;
  std::size_t ref_length = 0;

  double precision(std::size_t n) const {
    return totals[n - 1] == 0 ? 0.0
                              : static_cast<double>(matches[n - 1]) / totals[n - 1];
  }
  double brevity_penalty() const {
    if (hyp_length == 0) return 0.0;
    if (hyp_length >= ref_length) return 1.0;
    return std::exp(1.0 - static_cast<double>(ref_length) / static_cast<double>(hyp_length));
  }
};

namespace detail {

using NgramCounts = std::unordered_map<std::string, std::size_t>;

inline NgramCounts count_ngrams(const Tokens& tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  std::string key;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    key.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j) key += '\x1f';
      key += tokens[i + j];
    }
    ++counts[key];
  }
  return counts;
}

}  // namespace detail

inline BleuStats bleu_statistics(const std::vector<Tokens>& hypotheses,
                                 const std::vector<Tokens>& references, std::size_t max_n = 4) {
  if (hypotheses.size() != references.size())
    throw Error("BLEU: " + std::to_string(hypotheses.size()) + " hypotheses vs " +
                std::to_string(references.size()) + " references");
  if (hypotheses.empty()) throw Error("BLEU: empty corpus");
  if (max_n < 1) throw Error("BLEU: max_n must be at least 1");
  BleuStats stats;
  stats.matches.assign(max_n, 0);
  stats.totals.assign(max_n, 0);
  for (std::size_t u = 0; u < hypotheses.size(); ++u) {
    const Tokens& hyp = hypotheses[u];
    const Tokens& ref = references[u];
    stats.hyp_length += hyp.size();
    stats.ref_length += ref.size();
    for (std::size_t n = 1; n <= max_n; ++n) {
      if (hyp.size() < n) break;
      const auto hyp_counts = detail::count_ngrams(hyp, n);
      const auto ref_counts = detail::count_ngrams(ref, n);
      stats.totals[n - 1] += hyp.size() - n + 1;
      for (const auto& [gram, count] : hyp_counts) {
        auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) stats.matches[n - 1] += std::min(count, it->second);
      }
    }
  }
  return stats;
}

/// BLEU on the 0-100 scale, no smoothing. Orders for which the hypothesis
/// side has no n-grams at all are left out of the geometric mean; any
/// remaining order with zero matches gives 0.
inline double bleu_score(const BleuStats& stats) {
  if (stats.hyp_length == 0) return 0.0;
  double log_sum = 0.0;
  std::size_t orders = 0;
  for (std::size_t n = 1; n <= stats.totals.size(); ++n) {
    if (stats.totals[n - 1] == 0) continue;
    if (stats.matches[n - 1] == 0) return 0.0;
    log_sum += std::log(stats.precision(n));
    ++orders;
  }
  if (orders == 0) return 0.0;
  return 100.0 * stats.brevity_penalty() * std::exp(log_sum / static_cast<double>(orders));
}

inline MetricReport corpus_bleu(const std::vector<Tokens>& hypotheses,
                                const std::vector<Tokens>& references, std::size_t max_n = 4) {
  return {"BLEU", bleu_score(bleu_statistics(hypotheses, references, max_n)), 0, 0};
}

/// BLEU over sentence pairs; documents must match sentence for sentence.
inline MetricReport s_bleu(const std::vector<Document>& hypotheses,
                           const std::vector<Document>& references,
                           const TokenizerConfig& tok = {}) {
  if (hypotheses.size() != references.size())
    throw Error("s-BLEU: " + std::to_string(hypotheses.size()) + " hypothesis documents vs " +
                std::to_string(references.size()) + " reference documents");
  std::vector<Tokens> hyp, ref;
  for (std::size_t d = 0; d < hypotheses.size(); ++d) {
    if (hypotheses[d].size() != references[d].size())
      throw Error("s-BLEU: document " + std::to_string(d) + " has " +
                  std::to_string(hypotheses[d].size()) + " hypothesis sentences vs " +
                  std::to_string(references[d].size()) + " reference sentences");
    for (std::size_t s = 0; s < hypotheses[d].size(); ++s) {
      hyp.push_back(tokenize(hypotheses[d].sentences[s], tok));
      ref.push_back(tokenize(references[d].sentences[s], tok));
    }
  }
  auto report = corpus_bleu(hyp, ref);
  report.name = "s-BLEU";
  return report;
}

/// BLEU with each whole (flattened) document as one unit.
inline MetricReport d_bleu(const std::vector<Document>& hypotheses,
                           const std::vector<Document>& references,
                           const TokenizerConfig& tok = {}) {
  if (hypotheses.size() != references.size())
    throw Error("d-BLEU: " + std::to_string(hypotheses.size()) + " hypothesis documents vs " +
                std::to_string(references.size()) + " reference documents");
  std::vector<Tokens> hyp, ref;
  for (std::size_t d = 0; d < hypotheses.size(); ++d) {
    hyp.push_back(tokenize_all(hypotheses[d].sentences, tok));
    ref.push_back(tokenize_all(references[d].sentences, tok));
  }
  auto report = corpus_bleu(hyp, ref);
  report.name = "d-BLEU";
  return report;
}

struct BucketPair {
  std::vector<Document> hypotheses;
  std::vector<Document> references;
};

/// d-BLEU per length bucket. Empty buckets are absent from the result.
inline std::map<std::size_t, MetricReport> bucketed_bleu(
    const std::map<std::size_t, BucketPair>& buckets, const TokenizerConfig& tok = {}) {
  std::map<std::size_t, MetricReport> out;
  for (const auto& [budget, pair] : buckets) {
    if (pair.hypotheses.empty() && pair.references.empty()) continue;
    try {
      out.emplace(budget, d_bleu(pair.hypotheses, pair.references, tok));
    } catch (const Error& e) {
      throw Error("bucket " + std::to_string(budget) + ": " + e.what());
    }
  }
  return out;
}

inline std::string format_bucket_table(const std::map<std::size_t, MetricReport>& table) {
  std::ostringstream os;
  os << std::left << std::setw(10) << "budget" << "d-BLEU\n";
  for (const auto& [budget, report] : table)
    os << std::left << std::setw(10) << budget << format_fixed(report.value, 2) << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// Span metrics

enum class Category { Tense, Conj, Pron };

inline std::string_view category_name(Category c) {
  switch (c) {
    case Category::Tense: return "TENSE";
    case Category::Conj: return "CONJ";
    case Category::Pron: return "PRON";
  }
  return "";
}

inline std::string_view metric_name(Category c) {
  switch (c) {
    case Category::Tense: return "TC";
    case Category::Conj: return "CP";
    case Category::Pron: return "PT";
  }
  return "";
}

inline Category parse_category(std::string_view s) {
  if (s == "TENSE") return Category::Tense;
  if (s == "CONJ") return Category::Conj;
  if (s == "PRON") return Category::Pron;
  throw Error("unknown label category '" + std::string(s) + "'");
}

struct WordLabel {
  std::string word;
  std::size_t position = 0;  // 0-based index into the tokenized reference
  Category category = Category::Tense;
};

struct LabeledTestDoc {
  std::string doc_id;
  Document reference;
  std::vector<WordLabel> labels;
};

struct SpanConfig {
  std::size_t radius_d = 20;
};

/// Inclusive token window [lo, hi] of an output with `out_len` tokens for a
/// label at reference position `position`: the position scaled by
/// out_len / ref_len, widened by the radius, floor/ceil rounded, clamped.
/// Computed in exact integer arithmetic. nullopt when the output is empty.
inline std::optional<std::pair<std::size_t, std::size_t>> span_window(std::size_t out_len,
                                                                      std::size_t ref_len,
                                                                      std::size_t position,
                                                                      std::size_t radius) {
  if (ref_len == 0) throw Error("span window over an empty reference");
  if (out_len == 0) return std::nullopt;
  // Any radius beyond this already covers the whole output.
  radius = std::min(radius, out_len * (position / ref_len + 2));
  using Wide = __int128;
  const Wide scaled = static_cast<Wide>(out_len) * position;  // alpha * p * ref_len
  const Wide r = static_cast<Wide>(radius) * ref_len;
  const Wide ref = static_cast<Wide>(ref_len);
  auto floor_div = [](Wide a, Wide b) { return a >= 0 ? a / b : -((-a + b - 1) / b); };
  auto ceil_div = [](Wide a, Wide b) { return a >= 0 ? (a + b - 1) / b : -((-a) / b); };
  const Wide lo = std::max<Wide>(0, floor_div(scaled - r, ref));
  const Wide hi = std::min<Wide>(static_cast<Wide>(out_len) - 1, ceil_div(scaled + r, ref));
  if (lo > hi) return std::nullopt;
  return std::pair<std::size_t, std::size_t>{static_cast<std::size_t>(lo),
                                             static_cast<std::size_t>(hi)};
}

/// Checks position bounds and that each label word is the reference token
/// at its position.
inline void validate(const LabeledTestDoc& doc, const TokenizerConfig& tok = {}) {
  const Tokens ref = tokenize_all(doc.reference.sentences, tok);
  for (std::size_t j = 0; j < doc.labels.size(); ++j) {
    const auto& l = doc.labels[j];
    const std::string where = "document '" + doc.doc_id + "' label " + std::to_string(j);
    if (l.position >= ref.size())
      throw Error(where + ": position " + std::to_string(l.position) + " beyond " +
                  std::to_string(ref.size()) + " reference tokens");
    const Tokens word = tokenize(l.word, tok);
    if (word.size() != 1 || word[0] != ref[l.position])
      throw Error(where + ": word '" + l.word + "' does not match reference token '" +
                  ref[l.position] + "' at position " + std::to_string(l.position));
  }
}

/// Percentage of labels of `category` whose word appears inside its window
/// in the corresponding output document (matched by doc_id).
inline MetricReport span_metric(const std::vector<Document>& outputs,
                                const std::vector<LabeledTestDoc>& refs, Category category,
                                const SpanConfig& span = {}, const TokenizerConfig& tok = {}) {
  std::unordered_map<std::string, const Document*> by_id;
  for (const auto& o : outputs) by_id.emplace(o.doc_id, &o);
  std::size_t hits = 0;
  std::size_t total = 0;
  for (const auto& ref : refs) {
    std::vector<const WordLabel*> labels;
    for (const auto& l : ref.labels)
      if (l.category == category) labels.push_back(&l);
    if (labels.empty()) continue;
    auto it = by_id.find(ref.doc_id);
    if (it == by_id.end()) throw Error("no output for labeled document '" + ref.doc_id + "'");
    const Tokens ref_tokens = tokenize_all(ref.reference.sentences, tok);
    if (ref_tokens.empty()) throw Error("labeled document '" + ref.doc_id + "' has no tokens");
    const Tokens out = tokenize_all(it->second->sentences, tok);
    for (const WordLabel* l : labels) {
      ++total;
      const Tokens word = tokenize(l->word, tok);
      if (word.size() != 1) continue;
      auto window = span_window(out.size(), ref_tokens.size(), l->position, span.radius_d);
      if (!window) continue;
      if (std::find(out.begin() + static_cast<std::ptrdiff_t>(window->first),
                    out.begin() + static_cast<std::ptrdiff_t>(window->second) + 1,
                    word[0]) != out.begin() + static_cast<std::ptrdiff_t>(window->second) + 1)
        ++hits;
    }
  }
  MetricReport report{std::string(metric_name(category)), 0.0, hits, total};
  if (total > 0) report.value = 100.0 * static_cast<double>(hits) / static_cast<double>(total);
  return report;
}

/// True when the geometric mean is degenerate (some input <= 0).
inline bool tcp_degenerate(double tc, double cp, double pt) {
  return !(tc > 0.0 && cp > 0.0 && pt > 0.0);
}

/// Geometric mean of the three span metrics; 0 when any input is <= 0.
inline double tcp(double tc, double cp, double pt) {
  if (tcp_degenerate(tc, cp, pt)) return 0.0;
  if (tc == cp && cp == pt) return tc;
  double v[3] = {tc, cp, pt};
  std::sort(std::begin(v), std::end(v));  // argument-order independent rounding
  return std::cbrt(v[0] * v[1] * v[2]);
}

// ---------------------------------------------------------------------------
// Correlation

inline double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size())
    throw Error("pearson: " + std::to_string(xs.size()) + " vs " + std::to_string(ys.size()) +
                " values");
  if (xs.size() < 2) throw Error("pearson: need at least two points");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error("pearson: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// ---------------------------------------------------------------------------
// Files

/// Label file: one {"doc_id", "word", "position", "category"} per line.
/// Labels are attached to the reference documents by doc_id and validated.
inline std::vector<LabeledTestDoc> read_labeled_docs(const std::filesystem::path& labels_path,
                                                     const std::vector<Document>& references,
                                                     const TokenizerConfig& tok = {}) {
  std::unordered_map<std::string, std::size_t> index;
  std::vector<LabeledTestDoc> docs;
  for (const auto& r : references) {
    index.emplace(r.doc_id, docs.size());
    docs.push_back({r.doc_id, r, {}});
  }
  for_each_record(labels_path, [&](const nlohmann::json& rec, std::size_t) {
    const auto id = rec.at("doc_id").get<std::string>();
    auto it = index.find(id);
    if (it == index.end()) throw Error("label for unknown document '" + id + "'");
    docs[it->second].labels.push_back({rec.at("word").get<std::string>(),
                                       rec.at("position").get<std::size_t>(),
                                       parse_category(rec.at("category").get<std::string>())});
  });
  for (const auto& d : docs) validate(d, tok);
  return docs;
}

/// One real per non-blank line.
inline std::vector<double> read_values(const std::filesystem::path& path) {
  std::vector<double> out;
  const auto lines = split_lines(read_file(path));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string_view line = utf8::trim(lines[i]);
    if (line.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(std::string(line), &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != line.size() || !std::isfinite(v))
      throw Error(path.string() + ":" + std::to_string(i + 1) + ": not a number");
    out.push_back(v);
  }
  return out;
}

}  // namespace doc2doc
