#pragma once

// Context-corruption probes (local and global sentence shuffles with
// invertible permutation records) and contrastive-set scoring.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
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
#include "doc2doc/metrics.hpp"
#include "doc2doc/tokenizer.hpp"

namespace doc2doc {

// ---------------------------------------------------------------------------
// Seeded permutations

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Independent generator for (seed, domain, stream). Results depend only on
/// these three values, never on scheduling.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t domain, std::uint64_t stream) {
  return std::mt19937_64(
      detail::splitmix64(detail::splitmix64(seed ^ detail::splitmix64(domain)) + stream));
}

/// Unbiased integer in [0, bound). Portable: std::uniform_int_distribution
/// output differs across standard libraries.
inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = -bound % bound;  // 2^64 mod bound
  for (;;) {
    const std::uint64_t r = rng();
    if (r >= limit) return r % bound;
  }
}

/// Uniform permutation of [0, n) by Fisher-Yates.
inline std::vector<std::size_t> random_permutation(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[bounded(rng, i)]);
  return perm;
}

inline bool is_identity(const std::vector<std::size_t>& perm) {
  for (std::size_t i = 0; i < perm.size(); ++i)
    if (perm[i] != i) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Shuffles

struct SentenceRef {
  std::string doc_id;
  std::size_t sentence_index = 0;
  friend bool operator==(const SentenceRef&, const SentenceRef&) = default;
};

/// Entry i names the original source sentence now at position i.
struct PermutationRecord {
  std::string doc_id;
  std::vector<SentenceRef> mapping;
  friend bool operator==(const PermutationRecord&, const PermutationRecord&) = default;
};

struct ShuffleResult {
  ParallelCorpus corpus;
  std::vector<PermutationRecord> records;
};

inline constexpr std::uint64_t kLocalShuffleDomain = 0x4C4F43414CULL;    // "LOCAL"
inline constexpr std::uint64_t kGlobalShuffleDomain = 0x474C4F42414CULL; // "GLOBAL"

/// Permutes the source sentences inside each document; targets untouched.
/// Documents with two or more sentences never keep their original order.
inline ShuffleResult local_shuffle(const ParallelCorpus& corpus, std::uint64_t seed) {
  if (corpus.empty()) throw Error("shuffle of an empty corpus");
  ShuffleResult result;
  result.corpus.metadata = corpus.metadata;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    const auto& pd = corpus.documents[d];
    const std::size_t m = pd.source.size();
    auto rng = substream(seed, kLocalShuffleDomain, d);
    std::vector<std::size_t> perm = random_permutation(m, rng);
    while (m >= 2 && is_identity(perm)) perm = random_permutation(m, rng);
    ParallelDocument out = pd;
    PermutationRecord rec{pd.id(), {}};
    for (std::size_t i = 0; i < m; ++i) {
      out.source.sentences[i] = pd.source.sentences[perm[i]];
      rec.mapping.push_back({pd.id(), perm[i]});
    }
    result.corpus.documents.push_back(std::move(out));
    result.records.push_back(std::move(rec));
  }
  return result;
}

/// Pools every source sentence of the corpus, permutes the pool and deals
/// it back so each document keeps its sentence count.
inline ShuffleResult global_shuffle(const ParallelCorpus& corpus, std::uint64_t seed) {
  if (corpus.empty()) throw Error("shuffle of an empty corpus");
  std::vector<std::pair<std::size_t, std::size_t>> pool;
  for (std::size_t d = 0; d < corpus.size(); ++d)
    for (std::size_t s = 0; s < corpus.documents[d].source.size(); ++s) pool.emplace_back(d, s);
  auto rng = substream(seed, kGlobalShuffleDomain, 0);
  const auto perm = random_permutation(pool.size(), rng);

  ShuffleResult result;
  result.corpus = corpus;
  std::size_t q = 0;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    auto& out = result.corpus.documents[d];
    PermutationRecord rec{out.id(), {}};
    for (std::size_t i = 0; i < out.source.size(); ++i, ++q) {
      const auto [od, os] = pool[perm[q]];
      out.source.sentences[i] = corpus.documents[od].source.sentences[os];
      rec.mapping.push_back({corpus.documents[od].id(), os});
    }
    result.records.push_back(std::move(rec));
  }
  return result;
}

/// Restores the original source order from permutation records.
inline ParallelCorpus unshuffle(const ParallelCorpus& corpus,
                                const std::vector<PermutationRecord>& records) {
  if (records.size() != corpus.size())
    throw Error(std::to_string(records.size()) + " permutation records for " +
                std::to_string(corpus.size()) + " documents");
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t d = 0; d < corpus.size(); ++d) index.emplace(corpus.documents[d].id(), d);

  ParallelCorpus out = corpus;
  std::vector<std::vector<bool>> filled(corpus.size());
  for (std::size_t d = 0; d < corpus.size(); ++d)
    filled[d].assign(corpus.documents[d].source.size(), false);

  for (std::size_t d = 0; d < corpus.size(); ++d) {
    const auto& pd = corpus.documents[d];
    const auto& rec = records[d];
    if (rec.doc_id != pd.id())
      throw Error("permutation record " + std::to_string(d) + " is for '" + rec.doc_id +
                  "' but document " + std::to_string(d) + " is '" + pd.id() + "'");
    if (rec.mapping.size() != pd.source.size())
      throw Error("permutation record " + std::to_string(d) + " has " +
                  std::to_string(rec.mapping.size()) + " entries for " +
                  std::to_string(pd.source.size()) + " sentences");
    for (std::size_t i = 0; i < rec.mapping.size(); ++i) {
      const auto& ref = rec.mapping[i];
      auto it = index.find(ref.doc_id);
      if (it == index.end() || ref.sentence_index >= filled[it->second].size())
        throw Error("permutation record " + std::to_string(d) + " entry " + std::to_string(i) +
                    " names unknown slot (" + ref.doc_id + ", " +
                    std::to_string(ref.sentence_index) + ")");
      if (filled[it->second][ref.sentence_index])
        throw Error("permutation record " + std::to_string(d) + " entry " + std::to_string(i) +
                    " reuses slot (" + ref.doc_id + ", " + std::to_string(ref.sentence_index) +
                    ")");
      filled[it->second][ref.sentence_index] = true;
      out.documents[it->second].source.sentences[ref.sentence_index] = pd.source.sentences[i];
    }
  }
  return out;
}

inline std::string format_permutation_records(const std::vector<PermutationRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    nlohmann::json mapping = nlohmann::json::array();
    for (const auto& m : r.mapping) mapping.push_back({m.doc_id, m.sentence_index});
    out += dump_record({{"doc_id", r.doc_id}, {"mapping", mapping}});
    out += '\n';
  }
  return out;
}

inline std::vector<PermutationRecord> read_permutation_records(const std::filesystem::path& path) {
  std::vector<PermutationRecord> out;
  for_each_record(path, [&](const nlohmann::json& rec, std::size_t) {
    PermutationRecord r{rec.at("doc_id").get<std::string>(), {}};
    for (const auto& m : rec.at("mapping")) {
      if (!m.is_array() || m.size() != 2) throw Error("mapping entry must be [doc_id, index]");
      r.mapping.push_back({m.at(0).get<std::string>(), m.at(1).get<std::size_t>()});
    }
    out.push_back(std::move(r));
  });
  return out;
}

// ---------------------------------------------------------------------------
// Contrastive evaluation

struct ContrastiveInstance {
  std::string instance_id;
  std::string source;
  std::vector<std::string> candidates;
  std::size_t positive_index = 0;
  std::string phenomenon;
};

/// Higher is more probable (total log-probability under force decoding).
struct CandidateScore {
  std::string instance_id;
  std::size_t candidate_index = 0;
  double score = 0.0;
};

inline void validate(const ContrastiveInstance& inst) {
  const std::string where = "instance '" + inst.instance_id + "'";
  if (inst.instance_id.empty()) throw Error("instance with empty id");
  if (inst.candidates.size() < 2) throw Error(where + ": needs at least two candidates");
  if (inst.positive_index >= inst.candidates.size())
    throw Error(where + ": positive_index " + std::to_string(inst.positive_index) +
                " out of range");
  std::set<std::string> distinct(inst.candidates.begin(), inst.candidates.end());
  if (distinct.size() != inst.candidates.size())
    throw Error(where + ": candidates are not pairwise distinct");
}

struct ContrastiveReport {
  std::map<std::string, MetricReport> by_phenomenon;
  MetricReport overall{"accuracy", 0.0, 0, 0};
};

/// An instance is correct when its positive candidate scores strictly above
/// every negative one; ties are failures.
inline ContrastiveReport contrastive_accuracy(const std::vector<ContrastiveInstance>& instances,
                                              const std::vector<CandidateScore>& scores) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    validate(instances[i]);
    if (!index.emplace(instances[i].instance_id, i).second)
      throw Error("duplicate instance id '" + instances[i].instance_id + "'");
  }
  std::vector<std::vector<std::optional<double>>> table(instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i)
    table[i].resize(instances[i].candidates.size());
  for (const auto& s : scores) {
    auto it = index.find(s.instance_id);
    if (it == index.end()) throw Error("score for unknown instance '" + s.instance_id + "'");
    auto& row = table[it->second];
    if (s.candidate_index >= row.size())
      throw Error("instance '" + s.instance_id + "': candidate index " +
                  std::to_string(s.candidate_index) + " out of range");
    if (row[s.candidate_index])
      throw Error("instance '" + s.instance_id + "': duplicate score for candidate " +
                  std::to_string(s.candidate_index));
    row[s.candidate_index] = s.score;
  }

  ContrastiveReport report;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& inst = instances[i];
    for (std::size_t c = 0; c < table[i].size(); ++c)
      if (!table[i][c])
        throw Error("instance '" + inst.instance_id + "': missing score for candidate " +
                    std::to_string(c));
    const double positive = *table[i][inst.positive_index];
    bool correct = true;
    for (std::size_t c = 0; c < table[i].size(); ++c)
      if (c != inst.positive_index && !(positive > *table[i][c])) correct = false;
    auto [it, inserted] =
        report.by_phenomenon.try_emplace(inst.phenomenon, MetricReport{inst.phenomenon, 0, 0, 0});
    ++it->second.denominator;
    ++report.overall.denominator;
    if (correct) {
      ++it->second.numerator;
      ++report.overall.numerator;
    }
  }
  auto finish = [](MetricReport& r) {
    r.value = r.denominator == 0 ? 0.0 : 100.0 * static_cast<double>(r.numerator) /
                                             static_cast<double>(r.denominator);
  };
  for (auto& [_, r] : report.by_phenomenon) finish(r);
  finish(report.overall);
  return report;
}

/// Add-one smoothed token bigram model; a deterministic stand-in for a
/// neural force decoder.
class BigramModel {
 public:
  static constexpr std::string_view kBegin = "<s>";

  static BigramModel train(const std::vector<std::string>& lines, const TokenizerConfig& tok = {}) {
    BigramModel m;
    m.tok_ = tok;
    std::unordered_set<std::string> vocab;
    for (const auto& line : lines) {
      const Tokens t = tokenize(line, tok);
      std::string prev(kBegin);
      for (const auto& w : t) {
        vocab.insert(w);
        ++m.bigrams_[prev + '\x1f' + w];
        ++m.contexts_[prev];
        prev = w;
      }
    }
    m.vocab_size_ = vocab.size() + 1;  // one slot for unseen tokens
    return m;
  }

  double log_prob(const std::string& prev, const std::string& word) const {
    std::size_t pair = 0, context = 0;
    if (auto it = bigrams_.find(prev + '\x1f' + word); it != bigrams_.end()) pair = it->second;
    if (auto it = contexts_.find(prev); it != contexts_.end()) context = it->second;
    return std::log(static_cast<double>(pair + 1) / static_cast<double>(context + vocab_size_));
  }

  /// Sum of log P(token | previous token), starting from <s>.
  double score(std::string_view text) const {
    const Tokens t = tokenize(text, tok_);
    if (t.empty()) throw Error("cannot score an empty candidate");
    double total = 0.0;
    std::string prev(kBegin);
    for (const auto& w : t) {
      total += log_prob(prev, w);
      prev = w;
    }
    return total;
  }

  std::size_t vocab_size() const { return vocab_size_; }

 private:
  TokenizerConfig tok_;
  std::unordered_map<std::string, std::size_t> bigrams_;
  std::unordered_map<std::string, std::size_t> contexts_;
  std::size_t vocab_size_ = 1;
};

/// Scores every candidate on its own, ignoring the source context.
inline std::vector<CandidateScore> reference_scorer(const ContrastiveInstance& inst,
                                                    const BigramModel& model) {
  std::vector<CandidateScore> out;
  for (std::size_t c = 0; c < inst.candidates.size(); ++c) {
    try {
      out.push_back({inst.instance_id, c, model.score(inst.candidates[c])});
    } catch (const Error& e) {
      throw Error("instance '" + inst.instance_id + "' candidate " + std::to_string(c) + ": " +
                  e.what());
    }
  }
  return out;
}

inline std::vector<ContrastiveInstance> read_contrastive_instances(
    const std::filesystem::path& path) {
  std::vector<ContrastiveInstance> out;
  std::unordered_set<std::string> seen;
  for_each_record(path, [&](const nlohmann::json& rec, std::size_t) {
    ContrastiveInstance inst{rec.at("instance_id").get<std::string>(),
                             rec.at("source").get<std::string>(),
                             rec.at("candidates").get<std::vector<std::string>>(),
                             rec.at("positive_index").get<std::size_t>(),
                             rec.at("phenomenon").get<std::string>()};
    validate(inst);
    if (!seen.insert(inst.instance_id).second)
      throw Error("duplicate instance id '" + inst.instance_id + "'");
    out.push_back(std::move(inst));
  });
  return out;
}

inline std::vector<CandidateScore> read_candidate_scores(const std::filesystem::path& path) {
  std::vector<CandidateScore> out;
  for_each_record(path, [&](const nlohmann::json& rec, std::size_t) {
    out.push_back({rec.at("instance_id").get<std::string>(),
                   rec.at("candidate_index").get<std::size_t>(), rec.at("score").get<double>()});
  });
  return out;
}

inline std::string format_candidate_scores(const std::vector<CandidateScore>& scores) {
  std::string out;
  for (const auto& s : scores) {
    out += dump_record(
        {{"instance_id", s.instance_id}, {"candidate_index", s.candidate_index}, {"score", s.score}});
    out += '\n';
  }
  return out;
}

}  // namespace doc2doc
