#pragma once

// Multi-resolution corpus construction: every aligned document is split
// evenly into k parts for k = 1, 2, 4, ... and all parts are gathered as
// independent training pairs.

#include <bit>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "doc2doc/corpus.hpp"
#include "doc2doc/error.hpp"
#include "doc2doc/parallel.hpp"
#include "doc2doc/tokenizer.hpp"

namespace doc2doc {

struct SentenceSpan {
  std::size_t start = 0;
  std::size_t end = 0;  // exclusive

  std::size_t size() const { return end - start; }
  friend bool operator==(const SentenceSpan&, const SentenceSpan&) = default;
};

struct Segment {
  std::string doc_id;
  std::size_t level_k = 1;
  std::size_t part_index = 0;
  std::string source_text;
  std::string target_text;
  SentenceSpan sentence_span;
};

struct MRConfig {
  // Add a final sentence-level k = M when M is not a power of two.
  bool include_singletons = true;
  std::string joiner = " ";
};

inline void validate(const MRConfig& cfg) {
  if (cfg.joiner.find('\n') != std::string::npos || cfg.joiner.find('\r') != std::string::npos)
    throw Error("joiner must not contain a line break");
}

/// Levels k = 1, 2, 4, ... up to M, ascending, plus k = M when requested.
inline std::vector<std::size_t> mr_levels(std::size_t sentence_count, const MRConfig& cfg = {}) {
  if (sentence_count < 1) throw Error("document must contain at least one sentence");
  std::vector<std::size_t> levels;
  for (std::size_t k = 1; k <= sentence_count; k <<= 1) {
    levels.push_back(k);
    if (k > sentence_count / 2) break;
  }
  if (cfg.include_singletons && !std::has_single_bit(sentence_count))
    levels.push_back(sentence_count);
  return levels;
}

/// Even split of [0, M) into k spans; the first M mod k spans get one extra.
inline std::vector<SentenceSpan> even_spans(std::size_t sentence_count, std::size_t k) {
  std::vector<SentenceSpan> spans;
  spans.reserve(k);
  const std::size_t base = sentence_count / k;
  const std::size_t extra = sentence_count % k;
  std::size_t start = 0;
  for (std::size_t p = 0; p < k; ++p) {
    const std::size_t len = base + (p < extra ? 1 : 0);
    spans.push_back({start, start + len});
    start += len;
  }
  return spans;
}

inline std::string join_span(const std::vector<std::string>& sentences, SentenceSpan span,
                             const std::string& joiner) {
  std::string out;
  for (std::size_t i = span.start; i < span.end; ++i) {
    if (i > span.start) out += joiner;
    out += sentences[i];
  }
  return out;
}

inline std::vector<Segment> split_document(const ParallelDocument& pd, const MRConfig& cfg = {}) {
  if (!pd.aligned || pd.source.size() != pd.target.size())
    throw Error("document '" + pd.id() + "' is not sentence-aligned; cannot split");
  validate(cfg);
  std::vector<Segment> segments;
  for (std::size_t k : mr_levels(pd.source.size(), cfg)) {
    const auto spans = even_spans(pd.source.size(), k);
    for (std::size_t p = 0; p < k; ++p) {
      segments.push_back({pd.id(), k, p, join_span(pd.source.sentences, spans[p], cfg.joiner),
                          join_span(pd.target.sentences, spans[p], cfg.joiner), spans[p]});
    }
  }
  return segments;
}

inline std::string segment_id(const Segment& s) {
  return s.doc_id + "/k" + std::to_string(s.level_k) + "/p" + std::to_string(s.part_index);
}

/// Flattens every segment into a one-line parallel document. Output order:
/// input document, then ascending k, then part index.
inline ParallelCorpus build_mr_corpus(const ParallelCorpus& corpus, const MRConfig& cfg = {},
                                      unsigned threads = 1) {
  validate(cfg);
  std::vector<std::vector<Segment>> per_doc(corpus.size());
  parallel_for(corpus.size(), threads, [&](std::size_t d) {
    try {
      per_doc[d] = split_document(corpus.documents[d], cfg);
    } catch (const Error& e) {
      throw Error("document " + std::to_string(d) + ": " + e.what());
    }
  });
  ParallelCorpus out;
  out.metadata = corpus.metadata;
  for (auto& segments : per_doc) {
    for (auto& s : segments) {
      std::string id = segment_id(s);
      out.documents.push_back(ParallelDocument{Document{id, {std::move(s.source_text)}},
                                               Document{id, {std::move(s.target_text)}}, true});
    }
  }
  return out;
}

/// Source tokens of the multi-resolution corpus over source tokens of the
/// input. Tokens are counted per sentence, so the joiner never contributes.
inline double mr_ratio(const ParallelCorpus& corpus, const MRConfig& cfg = {}) {
  if (corpus.empty()) throw Error("mr_ratio of an empty corpus");
  std::size_t base = 0;
  std::size_t expanded = 0;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    const auto& pd = corpus.documents[d];
    std::vector<std::size_t> counts;
    counts.reserve(pd.source.size());
    for (const auto& s : pd.source.sentences) counts.push_back(count_whitespace_tokens(s));
    for (std::size_t c : counts) base += c;
    for (const auto& seg : split_document(pd, cfg))
      for (std::size_t i = seg.sentence_span.start; i < seg.sentence_span.end; ++i)
        expanded += counts[i];
  }
  if (base == 0) throw Error("mr_ratio of a corpus without tokens");
  return static_cast<double>(expanded) / static_cast<double>(base);
}

/// Replicates each document `factor` times, replicas adjacent.
inline ParallelCorpus oversample(const ParallelCorpus& corpus, std::size_t factor) {
  if (factor < 1) throw Error("oversampling factor must be at least 1");
  ParallelCorpus out;
  out.metadata = corpus.metadata;
  out.documents.reserve(corpus.size() * factor);
  for (const auto& pd : corpus.documents) {
    for (std::size_t r = 0; r < factor; ++r) {
      ParallelDocument copy = pd;
      copy.source.doc_id = pd.id() + "~r" + std::to_string(r);
      copy.target.doc_id = copy.source.doc_id;
      out.documents.push_back(std::move(copy));
    }
  }
  return out;
}

/// Oversampling factor that matches a non-MR corpus to its MR size.
inline std::size_t suggested_oversample_factor(const ParallelCorpus& corpus,
                                               const MRConfig& cfg = {}) {
  return static_cast<std::size_t>(std::llround(mr_ratio(corpus, cfg)));
}

/// Greedy paragraphs of at most `budget` tokens over one token-length list.
inline std::vector<SentenceSpan> greedy_paragraphs(const std::vector<std::size_t>& lengths,
                                                   std::size_t budget) {
  std::vector<SentenceSpan> spans;
  std::size_t start = 0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    if (i > start && used + lengths[i] > budget) {
      spans.push_back({start, i});
      start = i;
      used = 0;
    }
    used += lengths[i];
  }
  if (start < lengths.size()) spans.push_back({start, lengths.size()});
  return spans;
}

/// Re-segments every document into paragraphs of at most T source tokens,
/// once per budget T. A single over-budget sentence stands alone.
inline std::map<std::size_t, ParallelCorpus> bucket_by_length(
    const ParallelCorpus& corpus, const std::vector<std::size_t>& token_budgets,
    const TokenizerConfig& tok = {}) {
  if (token_budgets.empty()) throw Error("no token budgets given");
  for (std::size_t i = 0; i < token_budgets.size(); ++i) {
    if (token_budgets[i] == 0) throw Error("token budgets must be positive");
    if (i > 0 && token_budgets[i] <= token_budgets[i - 1])
      throw Error("token budgets must be strictly ascending");
  }
  require_aligned(corpus);
  std::vector<std::vector<std::size_t>> lengths(corpus.size());
  for (std::size_t d = 0; d < corpus.size(); ++d)
    for (const auto& s : corpus.documents[d].source.sentences)
      lengths[d].push_back(tokenize(s, tok).size());

  std::map<std::size_t, ParallelCorpus> buckets;
  for (std::size_t budget : token_budgets) {
    ParallelCorpus& out = buckets[budget];
    out.metadata = corpus.metadata;
    for (std::size_t d = 0; d < corpus.size(); ++d) {
      const auto& pd = corpus.documents[d];
      const auto spans = greedy_paragraphs(lengths[d], budget);
      for (std::size_t p = 0; p < spans.size(); ++p) {
        const std::string id = pd.id() + "/b" + std::to_string(budget) + "/p" + std::to_string(p);
        ParallelDocument para{Document{id, {}}, Document{id, {}}, true};
        for (std::size_t i = spans[p].start; i < spans[p].end; ++i) {
          para.source.sentences.push_back(pd.source.sentences[i]);
          para.target.sentences.push_back(pd.target.sentences[i]);
        }
        out.documents.push_back(std::move(para));
      }
    }
  }
  return buckets;
}

}  // namespace doc2doc
