#pragma once

// Document cleaning: deduplication, sentence segmentation, terminal
// punctuation repair and alignment-score filtration, applied in that order.

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "doc2doc/corpus.hpp"
#include "doc2doc/error.hpp"
#include "doc2doc/formats.hpp"
#include "doc2doc/parallel.hpp"
#include "doc2doc/tokenizer.hpp"
#include "doc2doc/utf8.hpp"

namespace doc2doc {

struct AlignmentScore {
  std::string doc_id;
  std::size_t pair_index = 0;
  double score = 0.0;

  friend bool operator==(const AlignmentScore&, const AlignmentScore&) = default;
};

inline constexpr double kDefaultAlignThreshold = 0.40;

struct SegmenterConfig {
  std::set<char32_t> terminal_punctuation{U'.', U'!', U'?', U'。', U'！', U'？', U'…'};
  std::vector<std::string> abbreviation_guards{"Mr.",  "Mrs.", "Ms.", "Dr.",  "Prof.",
                                               "Sr.",  "Jr.",  "St.", "vs.",  "e.g.",
                                               "i.e.", "cf.",  "No.", "Fig.", "Mt."};
  std::set<char32_t> quote_closers{U'"', U'\'', U'”', U'’', U'»', U')', U']', U'」', U'』',
                                   U'）'};
};

// ---------------------------------------------------------------------------
// Deduplication

/// Lowercased, whitespace-collapsed concatenation of the source sentences.
/// Punctuation is kept.
inline std::string content_fingerprint(const Document& doc) {
  std::string joined;
  for (const auto& s : doc.sentences) {
    joined += s;
    joined += ' ';
  }
  const std::string lowered = utf8::lower(joined);
  std::string out;
  out.reserve(lowered.size());
  bool pending_space = false;
  for (std::size_t pos = 0; pos < lowered.size();) {
    const std::size_t at = pos;
    auto cp = utf8::decode(lowered, pos);
    if (!cp) {
      ++pos;
    } else if (utf8::is_space(*cp)) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty()) out += ' ';
    pending_space = false;
    out.append(lowered, at, pos - at);
  }
  return out;
}

struct DedupResult {
  ParallelCorpus corpus;
  std::vector<std::string> removed;
};

/// Keeps the first document of each fingerprint class, in input order.
inline DedupResult deduplicate(const ParallelCorpus& corpus) {
  DedupResult result;
  result.corpus.metadata = corpus.metadata;
  std::unordered_set<std::string> seen;
  for (const auto& pd : corpus.documents) {
    if (seen.insert(content_fingerprint(pd.source)).second)
      result.corpus.documents.push_back(pd);
    else
      result.removed.push_back(pd.id());
  }
  return result;
}

// ---------------------------------------------------------------------------
// Segmentation

namespace detail {

struct CodePoint {
  char32_t cp;
  std::size_t begin;
  std::size_t end;
};

inline std::vector<CodePoint> code_points(std::string_view s) {
  std::vector<CodePoint> out;
  for (std::size_t pos = 0; pos < s.size();) {
    const std::size_t begin = pos;
    auto cp = utf8::decode(s, pos);
    if (!cp) {
      ++pos;
      out.push_back({0xFFFD, begin, pos});
    } else {
      out.push_back({*cp, begin, pos});
    }
  }
  return out;
}

inline bool guarded(std::string_view word, const SegmenterConfig& cfg) {
  auto matches = [&](std::string_view w) {
    return std::find(cfg.abbreviation_guards.begin(), cfg.abbreviation_guards.end(), w) !=
           cfg.abbreviation_guards.end();
  };
  if (matches(word)) return true;
  // "(Dr." should still match "Dr."
  std::size_t pos = 0;
  while (pos < word.size()) {
    std::size_t next = pos;
    auto cp = utf8::decode(word, next);
    if (!cp || !is_punctuation(*cp)) break;
    pos = next;
  }
  return pos > 0 && pos < word.size() && matches(word.substr(pos));
}

inline void segment_paragraph(std::string_view text, const SegmenterConfig& cfg,
                              std::vector<std::string>& out) {
  const auto cps = code_points(text);
  const std::size_t n = cps.size();
  std::size_t sentence_begin = 0;  // byte offset
  std::size_t word_begin = 0;      // byte offset of the current word
  auto flush = [&](std::size_t end_byte) {
    std::string_view piece = utf8::trim(text.substr(sentence_begin, end_byte - sentence_begin));
    if (!piece.empty()) out.emplace_back(piece);
    sentence_begin = end_byte;
  };
  std::size_t i = 0;
  while (i < n) {
    if (utf8::is_space(cps[i].cp)) {
      word_begin = cps[i].end;
      ++i;
      continue;
    }
    if (!cfg.terminal_punctuation.contains(cps[i].cp)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    bool wide = false;  // a terminal that needs no following space
    while (j < n && cfg.terminal_punctuation.contains(cps[j].cp)) {
      wide = wide || cps[j].cp >= 0x80;
      ++j;
    }
    const std::size_t terminals_end = cps[j - 1].end;
    while (j < n && cfg.quote_closers.contains(cps[j].cp)) ++j;
    const bool at_end = j == n;
    const bool space_next = !at_end && utf8::is_space(cps[j].cp);
    if (!at_end && (space_next || wide)) {
      const std::size_t wb = std::max(word_begin, sentence_begin);
      if (!guarded(text.substr(wb, terminals_end - wb), cfg)) {
        flush(cps[j - 1].end);
        word_begin = cps[j - 1].end;
      }
    }
    i = j;
  }
  flush(text.size());
}

}  // namespace detail

/// Rule-based splitter. A boundary follows a run of terminal punctuation
/// plus any quote closers, when followed by whitespace (or immediately for
/// non-ASCII terminals such as 。), unless the word ending there is an
/// abbreviation guard. Sentences never span paragraphs.
inline std::vector<std::string> segment_sentences(const std::vector<std::string>& paragraphs,
                                                  const SegmenterConfig& cfg = {}) {
  std::vector<std::string> out;
  for (const auto& p : paragraphs) detail::segment_paragraph(p, cfg, out);
  return out;
}

// ---------------------------------------------------------------------------
// Terminal punctuation

/// Appends `filler` to every sentence that does not already end in terminal
/// punctuation or a quote closer. The filler itself counts as terminal, so
/// the operation is idempotent for any filler.
inline Document ensure_terminal_punctuation(const Document& doc, const SegmenterConfig& cfg,
                                            std::string_view filler) {
  std::optional<char32_t> filler_cp;
  {
    std::size_t pos = 0;
    filler_cp = utf8::decode(filler, pos);
    if (!filler_cp || pos != filler.size())
      throw Error("punctuation filler must be a single character");
  }
  Document out{doc.doc_id, {}};
  out.sentences.reserve(doc.size());
  for (const auto& s : doc.sentences) {
    const std::string_view body = utf8::trim(s);
    auto last = utf8::last(body);
    const bool terminal = last && (cfg.terminal_punctuation.contains(*last) ||
                                   cfg.quote_closers.contains(*last) || *last == *filler_cp);
    if (terminal) {
      out.sentences.push_back(s);
    } else {
      // Keep leading whitespace as-is; only trailing whitespace is dropped.
      std::string fixed = s.substr(0, static_cast<std::size_t>(body.data() - s.data()) + body.size());
      fixed += filler;
      out.sentences.push_back(std::move(fixed));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Alignment filtration

struct AlignmentRemoval {
  std::string doc_id;
  std::vector<std::size_t> pairs;  // offending pair indices, ascending
};

struct FilterResult {
  ParallelCorpus corpus;
  std::vector<AlignmentRemoval> removed;
};

/// Drops every document that has a sentence pair scoring strictly below
/// `threshold`. Every pair of every aligned document needs exactly one score.
inline FilterResult filter_by_alignment(const ParallelCorpus& corpus,
                                        const std::vector<AlignmentScore>& scores,
                                        double threshold = kDefaultAlignThreshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw Error("alignment threshold must lie in [0, 1]");
  std::unordered_map<std::string, std::size_t> doc_index;
  for (std::size_t d = 0; d < corpus.size(); ++d) doc_index.emplace(corpus.documents[d].id(), d);

  std::vector<std::vector<std::optional<double>>> table(corpus.size());
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    const auto& pd = corpus.documents[d];
    if (pd.aligned) table[d].resize(pd.source.size());
  }
  for (const auto& s : scores) {
    auto it = doc_index.find(s.doc_id);
    if (it == doc_index.end() || s.pair_index >= table[it->second].size())
      throw Error("score for unknown pair (" + s.doc_id + ", " + std::to_string(s.pair_index) +
                  ")");
    if (!(s.score >= 0.0 && s.score <= 1.0))
      throw Error("score for (" + s.doc_id + ", " + std::to_string(s.pair_index) +
                  ") outside [0, 1]");
    auto& slot = table[it->second][s.pair_index];
    if (slot)
      throw Error("duplicate score for (" + s.doc_id + ", " + std::to_string(s.pair_index) + ")");
    slot = s.score;
  }

  FilterResult result;
  result.corpus.metadata = corpus.metadata;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    AlignmentRemoval removal{corpus.documents[d].id(), {}};
    for (std::size_t p = 0; p < table[d].size(); ++p) {
      if (!table[d][p])
        throw Error("document " + std::to_string(d) + " ('" + corpus.documents[d].id() +
                    "'): missing score for pair " + std::to_string(p));
      if (*table[d][p] < threshold) removal.pairs.push_back(p);
    }
    if (removal.pairs.empty())
      result.corpus.documents.push_back(corpus.documents[d]);
    else
      result.removed.push_back(std::move(removal));
  }
  return result;
}

/// Source-word to target-word pairs.
using Lexicon = std::vector<std::pair<std::string, std::string>>;

/// Lexical-coverage stand-in for an external aligner: the fraction of
/// (lowercased, non-punctuation) source tokens with at least one lexicon
/// translation present in the target sentence.
inline std::vector<AlignmentScore> baseline_alignment_scores(const ParallelCorpus& corpus,
                                                             const Lexicon& lexicon,
                                                             unsigned threads = 1) {
  require_aligned(corpus);
  std::unordered_map<std::string, std::vector<std::string>> table;
  for (const auto& [src, tgt] : lexicon) table[utf8::lower(src)].push_back(utf8::lower(tgt));

  const TokenizerConfig tok{.lowercase = true, .split_punctuation = true};
  auto content_tokens = [&](const std::string& s) {
    Tokens t = tokenize(s, tok);
    std::erase_if(t, [](const std::string& w) { return is_punctuation_token(w); });
    return t;
  };

  std::vector<std::vector<AlignmentScore>> per_doc(corpus.size());
  parallel_for(corpus.size(), threads, [&](std::size_t d) {
    const auto& pd = corpus.documents[d];
    for (std::size_t p = 0; p < pd.source.size(); ++p) {
      const Tokens src = content_tokens(pd.source.sentences[p]);
      const Tokens tgt_tokens = content_tokens(pd.target.sentences[p]);
      const std::unordered_set<std::string> tgt(tgt_tokens.begin(), tgt_tokens.end());
      std::size_t covered = 0;
      for (const auto& w : src) {
        auto it = table.find(w);
        if (it == table.end()) continue;
        if (std::any_of(it->second.begin(), it->second.end(),
                        [&](const std::string& t) { return tgt.contains(t); }))
          ++covered;
      }
      const double score = src.empty() ? 0.0 : static_cast<double>(covered) / src.size();
      per_doc[d].push_back({pd.id(), p, score});
    }
  });
  std::vector<AlignmentScore> out;
  for (auto& v : per_doc) out.insert(out.end(), v.begin(), v.end());
  return out;
}

// ---------------------------------------------------------------------------
// Files

inline std::vector<AlignmentScore> read_alignment_scores(const std::filesystem::path& path) {
  std::vector<AlignmentScore> out;
  std::set<std::pair<std::string, std::size_t>> seen;
  for_each_record(path, [&](const nlohmann::json& rec, std::size_t) {
    AlignmentScore s{rec.at("doc_id").get<std::string>(), rec.at("pair_index").get<std::size_t>(),
                     rec.at("score").get<double>()};
    if (!(s.score >= 0.0 && s.score <= 1.0)) throw Error("score outside [0, 1]");
    if (!seen.emplace(s.doc_id, s.pair_index).second)
      throw Error("duplicate score for (" + s.doc_id + ", " + std::to_string(s.pair_index) + ")");
    out.push_back(std::move(s));
  });
  return out;
}

inline std::string format_alignment_scores(const std::vector<AlignmentScore>& scores) {
  std::string out;
  for (const auto& s : scores) {
    out += dump_record({{"doc_id", s.doc_id}, {"pair_index", s.pair_index}, {"score", s.score}});
    out += '\n';
  }
  return out;
}

/// Lexicon file: one "source<whitespace>target" pair per line.
inline Lexicon read_lexicon(const std::filesystem::path& path) {
  Lexicon lex;
  const auto lines = split_lines(read_file(path));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const Tokens parts = tokenize(lines[i], {.lowercase = false, .split_punctuation = false});
    if (parts.empty()) continue;
    if (parts.size() != 2)
      throw Error(path.string() + ":" + std::to_string(i + 1) +
                  ": expected 'source target' word pair");
    lex.emplace_back(parts[0], parts[1]);
  }
  return lex;
}

// ---------------------------------------------------------------------------
// Fixed-order cleaning pass

struct CleanOptions {
  bool dedup = false;
  bool segment = false;
  std::optional<std::string> punctuation_filler;
  std::optional<std::vector<AlignmentScore>> alignment_scores;
  std::optional<Lexicon> lexicon;  // used when no external scores are given
  double align_threshold = kDefaultAlignThreshold;
  SegmenterConfig segmenter;
  unsigned threads = 1;
};

struct CleanReport {
  std::size_t input_documents = 0;
  std::size_t output_documents = 0;
  std::vector<std::string> duplicates;
  std::vector<std::string> segmentation_mismatch;
  std::vector<AlignmentRemoval> misaligned;

  nlohmann::json to_json() const {
    nlohmann::json misaligned_json = nlohmann::json::array();
    for (const auto& r : misaligned)
      misaligned_json.push_back({{"doc_id", r.doc_id}, {"pairs", r.pairs}});
    return {{"input_documents", input_documents},
            {"output_documents", output_documents},
            {"duplicates", duplicates},
            {"segmentation_mismatch", segmentation_mismatch},
            {"misaligned", misaligned_json}};
  }
};

struct CleanResult {
  ParallelCorpus corpus;
  CleanReport report;
};

/// deduplicate -> segment -> ensure punctuation -> alignment filter.
/// Re-segmenting both sides of an aligned document can change their
/// sentence counts; such documents are dropped and reported.
inline CleanResult clean(const ParallelCorpus& input, const CleanOptions& opt) {
  CleanResult result;
  result.report.input_documents = input.size();
  ParallelCorpus corpus = input;
  if (opt.dedup) {
    auto d = deduplicate(corpus);
    corpus = std::move(d.corpus);
    result.report.duplicates = std::move(d.removed);
  }
  if (opt.segment || opt.punctuation_filler) {
    std::vector<ParallelDocument> docs(corpus.size());
    parallel_for(corpus.size(), opt.threads, [&](std::size_t d) {
      ParallelDocument pd = corpus.documents[d];
      if (opt.segment) {
        pd.source.sentences = segment_sentences(pd.source.sentences, opt.segmenter);
        pd.target.sentences = segment_sentences(pd.target.sentences, opt.segmenter);
      }
      if (opt.punctuation_filler) {
        pd.source = ensure_terminal_punctuation(pd.source, opt.segmenter, *opt.punctuation_filler);
        pd.target = ensure_terminal_punctuation(pd.target, opt.segmenter, *opt.punctuation_filler);
      }
      docs[d] = std::move(pd);
    });
    ParallelCorpus next;
    next.metadata = corpus.metadata;
    for (std::size_t d = 0; d < docs.size(); ++d) {
      if (corpus.documents[d].aligned && docs[d].source.size() != docs[d].target.size())
        result.report.segmentation_mismatch.push_back(docs[d].id());
      else
        next.documents.push_back(std::move(docs[d]));
    }
    corpus = std::move(next);
  }
  if (opt.alignment_scores || opt.lexicon) {
    std::vector<AlignmentScore> scores;
    if (opt.alignment_scores) {
      // Scores usually cover the raw corpus; pairs of documents dropped by
      // earlier stages are expected and skipped.
      std::unordered_set<std::string> dropped(result.report.duplicates.begin(),
                                              result.report.duplicates.end());
      dropped.insert(result.report.segmentation_mismatch.begin(),
                     result.report.segmentation_mismatch.end());
      for (const auto& s : *opt.alignment_scores)
        if (!dropped.contains(s.doc_id)) scores.push_back(s);
    } else {
      scores = baseline_alignment_scores(corpus, *opt.lexicon, opt.threads);
    }
    auto f = filter_by_alignment(corpus, scores, opt.align_threshold);
    corpus = std::move(f.corpus);
    result.report.misaligned = std::move(f.removed);
  }
  result.report.output_documents = corpus.size();
  result.corpus = std::move(corpus);
  return result;
}

}  // namespace doc2doc
