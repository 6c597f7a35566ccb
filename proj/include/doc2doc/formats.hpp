#pragma once

// Readers and writers for the two corpus encodings.
//
// Doc-text: UTF-8, one sentence per line, documents separated by one blank
// line. A block may start with a "## doc_id: <id>" line; without it the id
// is the zero-padded block ordinal. The source file may open with
// "## meta <key>=<value>" lines followed by a blank line.
//
// Records: one JSON object per line, {"doc_id", "src", "tgt"} with an
// optional leading {"metadata": {...}} line.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "doc2doc/corpus.hpp"
#include "doc2doc/error.hpp"
#include "doc2doc/utf8.hpp"

namespace doc2doc {

inline constexpr std::string_view kDocIdDirective = "## doc_id: ";
inline constexpr std::string_view kMetaDirective = "## meta ";

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(path.string() + ": cannot open for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(path.string() + ": read failure");
  return std::move(buf).str();
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw Error(path.string() + ": write failure");
}

/// Splits file content into lines, dropping a trailing CR on each line.
/// A final line without a newline terminator is still a line.
inline std::vector<std::string> split_lines(std::string_view content) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.emplace_back(line);
    start = end + 1;
  }
  return lines;
}

/// One side of a doc-text file.
struct DocFile {
  std::vector<Document> documents;
  std::map<std::string, std::string> metadata;
  std::vector<bool> explicit_id;  // per document: id came from a directive
};

inline DocFile parse_doc_text(std::string_view content, const std::string& name) {
  if (auto bad = utf8::first_invalid(content)) {
    std::size_t line = 1 + static_cast<std::size_t>(
                               std::count(content.begin(), content.begin() + *bad, '\n'));
    throw Error(name + ":" + std::to_string(line) + ": invalid UTF-8");
  }
  const auto lines = split_lines(content);
  DocFile file;
  std::size_t i = 0;
  while (i < lines.size() && lines[i].starts_with(kMetaDirective)) {
    std::string_view kv = std::string_view(lines[i]).substr(kMetaDirective.size());
    auto eq = kv.find('=');
    if (eq == std::string_view::npos)
      throw Error(name + ":" + std::to_string(i + 1) + ": metadata line needs key=value");
    file.metadata[std::string(kv.substr(0, eq))] = std::string(kv.substr(eq + 1));
    ++i;
  }
  auto blank = [](const std::string& line) { return utf8::trim(line).empty(); };
  while (i < lines.size()) {
    while (i < lines.size() && blank(lines[i])) ++i;
    if (i == lines.size()) break;
    const std::size_t first_line = i;
    Document doc;
    bool has_id = false;
    if (lines[i].starts_with(kDocIdDirective)) {
      doc.doc_id = lines[i].substr(kDocIdDirective.size());
      if (utf8::trim(doc.doc_id).empty())
        throw Error(name + ":" + std::to_string(i + 1) + ": empty doc_id directive");
      has_id = true;
      ++i;
    }
    while (i < lines.size() && !blank(lines[i])) doc.sentences.push_back(lines[i++]);
    if (doc.sentences.empty())
      throw Error(name + ":" + std::to_string(first_line + 1) + ": document " +
                  std::to_string(file.documents.size()) + " has no sentences");
    if (!has_id) doc.doc_id = ordinal_id(file.documents.size());
    file.documents.push_back(std::move(doc));
    file.explicit_id.push_back(has_id);
  }
  return file;
}

inline DocFile read_doc_file(const std::filesystem::path& path) {
  return parse_doc_text(read_file(path), path.string());
}

inline void check_writable(const std::string& sentence, const std::string& where) {
  validate_sentence(sentence, where);
  std::string_view s = sentence;
  if (s.starts_with(kDocIdDirective) || s.starts_with(kMetaDirective))
    throw Error(where + ": sentence begins with a reserved directive prefix");
}

inline std::string format_doc_text(const std::vector<Document>& docs,
                                   const std::map<std::string, std::string>& metadata = {}) {
  std::string out;
  for (const auto& [key, value] : metadata) {
    if (key.find('=') != std::string::npos || key.find('\n') != std::string::npos ||
        value.find('\n') != std::string::npos)
      throw Error("metadata key '" + key + "' is not representable in doc-text");
    out.append(kMetaDirective).append(key).append("=").append(value).append("\n");
  }
  if (!metadata.empty() && !docs.empty()) out += '\n';
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const auto& doc = docs[d];
    if (doc.sentences.empty())
      throw Error("document " + std::to_string(d) + " ('" + doc.doc_id + "') has no sentences");
    if (d > 0) out += '\n';
    if (doc.doc_id != ordinal_id(d)) {
      if (doc.doc_id.find('\n') != std::string::npos || utf8::trim(doc.doc_id).empty())
        throw Error("document " + std::to_string(d) + ": doc_id not representable");
      out.append(kDocIdDirective).append(doc.doc_id).append("\n");
    }
    for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
      check_writable(doc.sentences[s],
                     "document " + std::to_string(d) + " sentence " + std::to_string(s));
      out.append(doc.sentences[s]).append("\n");
    }
  }
  return out;
}

inline void write_doc_file(const std::vector<Document>& docs, const std::filesystem::path& path) {
  write_file(path, format_doc_text(docs));
}

/// Reads parallel doc-text files. Requires equal block structure; every
/// document comes back aligned.
inline ParallelCorpus read_doc_text(const std::filesystem::path& src_path,
                                    const std::filesystem::path& tgt_path) {
  DocFile src = read_doc_file(src_path);
  DocFile tgt = read_doc_file(tgt_path);
  if (src.documents.size() != tgt.documents.size())
    throw Error(src_path.string() + " has " + std::to_string(src.documents.size()) +
                " documents but " + tgt_path.string() + " has " +
                std::to_string(tgt.documents.size()));
  ParallelCorpus corpus;
  corpus.metadata = std::move(src.metadata);
  for (auto& [k, v] : tgt.metadata) corpus.metadata.emplace(k, v);
  std::unordered_set<std::string> seen;
  for (std::size_t d = 0; d < src.documents.size(); ++d) {
    auto& s = src.documents[d];
    auto& t = tgt.documents[d];
    if (s.size() != t.size())
      throw Error("document " + std::to_string(d) + ": " + std::to_string(s.size()) +
                  " source sentences vs " + std::to_string(t.size()) + " target sentences");
    std::string id;
    if (src.explicit_id[d] && tgt.explicit_id[d] && s.doc_id != t.doc_id)
      throw Error("document " + std::to_string(d) + ": doc_id '" + s.doc_id + "' in " +
                  src_path.string() + " but '" + t.doc_id + "' in " + tgt_path.string());
    id = tgt.explicit_id[d] && !src.explicit_id[d] ? t.doc_id : s.doc_id;
    if (!seen.insert(id).second)
      throw Error("document " + std::to_string(d) + ": duplicate doc_id '" + id + "'");
    ParallelDocument pd{Document{id, std::move(s.sentences)}, Document{id, std::move(t.sentences)},
                        true};
    corpus.documents.push_back(std::move(pd));
  }
  return corpus;
}

inline void write_doc_text(const ParallelCorpus& corpus, const std::filesystem::path& src_path,
                           const std::filesystem::path& tgt_path) {
  validate(corpus);
  std::vector<Document> src, tgt;
  src.reserve(corpus.size());
  tgt.reserve(corpus.size());
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    const auto& pd = corpus.documents[d];
    if (!pd.aligned)
      throw Error("document " + std::to_string(d) + " ('" + pd.id() +
                  "') is unaligned; doc-text requires matching block structure");
    src.push_back(pd.source);
    tgt.push_back(pd.target);
  }
  const std::string src_text = format_doc_text(src, corpus.metadata);
  const std::string tgt_text = format_doc_text(tgt);
  write_file(src_path, src_text);
  write_file(tgt_path, tgt_text);
}

/// Calls `fn(record, line_number)` for every non-blank line of a JSON-lines
/// file. Parse failures are reported with the line number.
inline void for_each_record(const std::filesystem::path& path,
                            const std::function<void(const nlohmann::json&, std::size_t)>& fn) {
  const std::string content = read_file(path);
  const auto lines = split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (utf8::trim(lines[i]).empty()) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(lines[i]);
    } catch (const nlohmann::json::exception& e) {
      throw Error(path.string() + ":" + std::to_string(i + 1) + ": malformed record: " + e.what());
    }
    try {
      fn(record, i + 1);
    } catch (const nlohmann::json::exception& e) {
      throw Error(path.string() + ":" + std::to_string(i + 1) + ": malformed record: " + e.what());
    } catch (const Error& e) {
      throw Error(path.string() + ":" + std::to_string(i + 1) + ": " + e.what());
    }
  }
}

inline std::string dump_record(const nlohmann::json& record) {
  return record.dump(-1, ' ', false, nlohmann::json::error_handler_t::strict);
}

inline ParallelCorpus read_records(const std::filesystem::path& path) {
  ParallelCorpus corpus;
  std::unordered_set<std::string> seen;
  bool first = true;
  for_each_record(path, [&](const nlohmann::json& rec, std::size_t) {
    if (!rec.is_object()) throw Error("record is not an object");
    if (rec.contains("metadata")) {
      if (!first) throw Error("metadata record must be the first line");
      corpus.metadata = rec.at("metadata").get<std::map<std::string, std::string>>();
      first = false;
      return;
    }
    first = false;
    auto id = rec.at("doc_id").get<std::string>();
    auto src = rec.at("src").get<std::vector<std::string>>();
    auto tgt = rec.at("tgt").get<std::vector<std::string>>();
    ParallelDocument pd = make_parallel(id, std::move(src), std::move(tgt));
    if (rec.contains("aligned")) pd.aligned = rec.at("aligned").get<bool>();
    if (!seen.insert(id).second) throw Error("duplicate doc_id '" + id + "'");
    validate(pd, "document " + std::to_string(corpus.size()));
    if (id.empty()) throw Error("empty doc_id");
    corpus.documents.push_back(std::move(pd));
  });
  return corpus;
}

inline std::string format_records(const ParallelCorpus& corpus) {
  validate(corpus);
  std::string out;
  if (!corpus.metadata.empty()) {
    out += dump_record(nlohmann::json{{"metadata", corpus.metadata}});
    out += '\n';
  }
  for (const auto& pd : corpus.documents) {
    nlohmann::json rec = {
        {"doc_id", pd.id()}, {"src", pd.source.sentences}, {"tgt", pd.target.sentences}};
    // The flag is implied by equal side lengths unless it says otherwise.
    if (pd.aligned != (pd.source.size() == pd.target.size())) rec["aligned"] = pd.aligned;
    out += dump_record(rec);
    out += '\n';
  }
  return out;
}

inline void write_records(const ParallelCorpus& corpus, const std::filesystem::path& path) {
  write_file(path, format_records(corpus));
}

}  // namespace doc2doc
