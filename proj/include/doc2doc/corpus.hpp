#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <unordered_set>
#include <vector>

#include "doc2doc/error.hpp"
#include "doc2doc/utf8.hpp"

namespace doc2doc {

/// One side of a document: an ordered list of single-line sentences.
struct Document {
  std::string doc_id;
  std::vector<std::string> sentences;

  std::size_t size() const { return sentences.size(); }
  friend bool operator==(const Document&, const Document&) = default;
};

/// A source/target document pair. When `aligned`, the two sides are
/// sentence-aligned one-to-one; otherwise only the document correspondence
/// is asserted.
struct ParallelDocument {
  Document source;
  Document target;
  bool aligned = true;

  const std::string& id() const { return source.doc_id; }
  friend bool operator==(const ParallelDocument&, const ParallelDocument&) = default;
};

struct ParallelCorpus {
  std::vector<ParallelDocument> documents;
  std::map<std::string, std::string> metadata;

  std::size_t size() const { return documents.size(); }
  bool empty() const { return documents.empty(); }
  friend bool operator==(const ParallelCorpus&, const ParallelCorpus&) = default;
};

/// Zero-padded ordinal used when a document carries no explicit id.
inline std::string ordinal_id(std::size_t index) {
  std::string digits = std::to_string(index);
  if (digits.size() < 6) digits.insert(0, 6 - digits.size(), '0');
  return digits;
}

/// Pair-building shorthand used by readers and tests.
inline ParallelDocument make_parallel(std::string doc_id, std::vector<std::string> src,
                                      std::vector<std::string> tgt) {
  ParallelDocument pd;
  pd.aligned = src.size() == tgt.size();
  pd.source = Document{doc_id, std::move(src)};
  pd.target = Document{std::move(doc_id), std::move(tgt)};
  return pd;
}

inline void validate_sentence(const std::string& sentence, const std::string& where) {
  if (sentence.find('\n') != std::string::npos || sentence.find('\r') != std::string::npos)
    throw Error(where + ": sentence contains a line break");
  if (auto bad = utf8::first_invalid(sentence))
    throw Error(where + ": invalid UTF-8 at byte " + std::to_string(*bad));
  if (utf8::trim(sentence).empty()) throw Error(where + ": empty sentence");
}

inline void validate(const Document& doc, const std::string& where) {
  if (doc.sentences.empty()) throw Error(where + ": document '" + doc.doc_id + "' has no sentences");
  for (std::size_t i = 0; i < doc.sentences.size(); ++i)
    validate_sentence(doc.sentences[i],
                      where + ": document '" + doc.doc_id + "' sentence " + std::to_string(i));
}

inline void validate(const ParallelDocument& pd, const std::string& where) {
  if (pd.source.doc_id != pd.target.doc_id)
    throw Error(where + ": source id '" + pd.source.doc_id + "' differs from target id '" +
                pd.target.doc_id + "'");
  validate(pd.source, where + " source");
  validate(pd.target, where + " target");
  if (pd.aligned && pd.source.size() != pd.target.size())
    throw Error(where + ": document '" + pd.id() + "' marked aligned but has " +
                std::to_string(pd.source.size()) + " source and " +
                std::to_string(pd.target.size()) + " target sentences");
}

/// Checks every corpus invariant; throws Error naming the first violation.
inline void validate(const ParallelCorpus& corpus) {
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < corpus.documents.size(); ++i) {
    const auto& pd = corpus.documents[i];
    const std::string where = "document " + std::to_string(i);
    if (pd.id().empty()) throw Error(where + ": empty doc_id");
    if (!seen.insert(pd.id()).second) throw Error(where + ": duplicate doc_id '" + pd.id() + "'");
    validate(pd, where);
  }
}

inline std::size_t sentence_pair_count(const ParallelCorpus& corpus) {
  std::size_t n = 0;
  for (const auto& pd : corpus.documents)
    if (pd.aligned) n += pd.source.size();
  return n;
}

inline void require_aligned(const ParallelCorpus& corpus) {
  for (std::size_t i = 0; i < corpus.documents.size(); ++i)
    if (!corpus.documents[i].aligned)
      throw Error("document " + std::to_string(i) + " ('" + corpus.documents[i].id() +
                  "') is not sentence-aligned");
}

}  // namespace doc2doc
