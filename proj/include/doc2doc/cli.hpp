#pragma once

// Single-executable front end. Every subcommand is a pure function of its
// inputs and flags and leaves a run manifest (flags, seed, SHA-256 digests
// of inputs and outputs) next to its outputs.
//
// Exit codes: 0 success, 1 validation or IO error, 2 usage error.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "doc2doc/corpus.hpp"
#include "doc2doc/error.hpp"
#include "doc2doc/formats.hpp"
#include "doc2doc/harness.hpp"
#include "doc2doc/metrics.hpp"
#include "doc2doc/mrsplit.hpp"
#include "doc2doc/pipeline.hpp"
#include "doc2doc/report.hpp"

namespace doc2doc::cli {

namespace fs = std::filesystem;

class UsageError : public Error {
 public:
  using Error::Error;
};

inline std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 digest failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i)
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

struct FileDigest {
  std::string path;
  std::string sha256;
};

struct RunManifest {
  std::string command;
  std::map<std::string, std::string> config;
  std::optional<std::uint64_t> seed;
  std::vector<FileDigest> inputs;
  std::vector<FileDigest> outputs;

  void add_input(const fs::path& p) { inputs.push_back({p.string(), sha256_hex(read_file(p))}); }
  void add_output(const fs::path& p) { outputs.push_back({p.string(), sha256_hex(read_file(p))}); }

  nlohmann::json to_json() const {
    auto digests = [](const std::vector<FileDigest>& v) {
      nlohmann::json a = nlohmann::json::array();
      for (const auto& d : v) a.push_back({{"path", d.path}, {"sha256", d.sha256}});
      return a;
    };
    return {{"command", command},
            {"config", config},
            {"seed", seed ? nlohmann::json(*seed) : nlohmann::json(nullptr)},
            {"inputs", digests(inputs)},
            {"outputs", digests(outputs)}};
  }
};

// ---------------------------------------------------------------------------
// Corpus locations: "X.jsonl" is a record file, anything else is a stem
// for the doc-text pair "X.src" / "X.tgt".

struct CorpusLocation {
  bool records = false;
  fs::path path;  // the record file, or the stem

  static CorpusLocation parse(const std::string& arg) {
    if (arg.empty()) throw UsageError("empty corpus path");
    return {fs::path(arg).extension() == ".jsonl", fs::path(arg)};
  }
  fs::path src() const { return fs::path(path.string() + ".src"); }
  fs::path tgt() const { return fs::path(path.string() + ".tgt"); }
  std::vector<fs::path> files() const {
    if (records) return {path};
    return {src(), tgt()};
  }
  /// Sibling location tagged with `tag`, e.g. "out" -> "out.64".
  CorpusLocation tagged(const std::string& tag) const {
    if (!records) return {false, fs::path(path.string() + "." + tag)};
    fs::path p = path;
    p.replace_extension();
    return {true, fs::path(p.string() + "." + tag + ".jsonl")};
  }
};

inline ParallelCorpus load_corpus(const CorpusLocation& loc) {
  try {
    return loc.records ? read_records(loc.path) : read_doc_text(loc.src(), loc.tgt());
  } catch (const Error& e) {
    throw Error("reading " + loc.path.string() + ": " + e.what());
  }
}

inline void save_corpus(const ParallelCorpus& corpus, const CorpusLocation& loc) {
  try {
    if (loc.records)
      write_records(corpus, loc.path);
    else
      write_doc_text(corpus, loc.src(), loc.tgt());
  } catch (const Error& e) {
    throw Error("writing " + loc.path.string() + ": " + e.what());
  }
}

inline std::vector<Document> load_side(const fs::path& path) {
  return read_doc_file(path).documents;
}

inline std::vector<std::size_t> parse_budgets(const std::string& list) {
  std::vector<std::size_t> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string_view t = utf8::trim(item);
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(std::string(t), &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (t.empty() || used != t.size() || v == 0)
      throw UsageError("budgets must be positive integers, got '" + item + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw UsageError("no budgets given");
  return out;
}

inline std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
  return s;
}

// ---------------------------------------------------------------------------

struct Context {
  std::ostream& out;
  std::ostream& err;
  unsigned threads = 1;
  RunManifest manifest;
  std::optional<fs::path> manifest_path;
};

inline void write_manifest(Context& ctx, const std::optional<fs::path>& default_base) {
  std::optional<fs::path> path = ctx.manifest_path;
  if (!path && default_base) path = fs::path(default_base->string() + ".manifest.json");
  if (!path) return;
  write_file(*path, ctx.manifest.to_json().dump(2) + "\n");
}

/// Flag values of the chosen subcommand, as typed or defaulted.
inline std::map<std::string, std::string> snapshot(const CLI::App& sub) {
  std::map<std::string, std::string> config;
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_lnames().empty()) {
      if (opt->get_positional() && opt->count() > 0) {
        std::string joined;
        for (const auto& r : opt->results()) joined += (joined.empty() ? "" : ",") + r;
        config[opt->get_name()] = joined;
      }
      continue;
    }
    const std::string& name = opt->get_lnames().front();
    if (name == "help" || name == "manifest") continue;
    if (opt->count() > 0) {
      std::string joined;
      for (const auto& r : opt->results()) joined += (joined.empty() ? "" : ",") + r;
      config[name] = joined.empty() ? "true" : joined;
    } else {
      config[name] = opt->get_default_str();
    }
  }
  return config;
}

struct Options {
  std::string in, out, report, align_scores, lexicon, fix_punct, joiner = " ", budgets,
      hyp, ref, level = "doc", system = "system", labels, x, y, mode, records, instances,
      scores, train, write_scores, manifest, bucket_budgets = "64,128,256,512,1024,2048";
  double align_threshold = kDefaultAlignThreshold;
  bool dedup = false, segment = false, no_singletons = false, invert = false;
  std::size_t factor = 0, radius = 20;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> files;
};

inline int run_convert(Context& ctx, const Options& o) {
  const auto in = CorpusLocation::parse(o.in);
  const auto out = CorpusLocation::parse(o.out);
  const ParallelCorpus corpus = load_corpus(in);
  for (const auto& f : in.files()) ctx.manifest.add_input(f);
  save_corpus(corpus, out);
  for (const auto& f : out.files()) ctx.manifest.add_output(f);
  ctx.out << "converted " << corpus.size() << " documents\n";
  write_manifest(ctx, out.path);
  return 0;
}

inline int run_clean(Context& ctx, const Options& o) {
  const auto in = CorpusLocation::parse(o.in);
  const auto out = CorpusLocation::parse(o.out);
  CleanOptions opt;
  opt.dedup = o.dedup;
  opt.segment = o.segment;
  opt.threads = ctx.threads;
  opt.align_threshold = o.align_threshold;
  if (!(o.align_threshold >= 0.0 && o.align_threshold <= 1.0))
    throw UsageError("--align-threshold must lie in [0, 1]");
  if (!o.fix_punct.empty()) opt.punctuation_filler = o.fix_punct;
  if (!o.align_scores.empty() && !o.lexicon.empty())
    throw UsageError("--align-scores and --lexicon are mutually exclusive");

  const ParallelCorpus corpus = load_corpus(in);
  for (const auto& f : in.files()) ctx.manifest.add_input(f);
  if (!o.align_scores.empty()) {
    opt.alignment_scores = read_alignment_scores(o.align_scores);
    ctx.manifest.add_input(o.align_scores);
  }
  if (!o.lexicon.empty()) {
    opt.lexicon = read_lexicon(o.lexicon);
    ctx.manifest.add_input(o.lexicon);
  }
  const CleanResult result = clean(corpus, opt);
  save_corpus(result.corpus, out);
  for (const auto& f : out.files()) ctx.manifest.add_output(f);
  if (!o.report.empty()) {
    write_file(o.report, result.report.to_json().dump(2) + "\n");
    ctx.manifest.add_output(o.report);
  }
  ctx.out << "kept " << result.report.output_documents << " of " << result.report.input_documents
          << " documents (duplicates " << result.report.duplicates.size()
          << ", segmentation mismatch " << result.report.segmentation_mismatch.size()
          << ", misaligned " << result.report.misaligned.size() << ")\n";
  write_manifest(ctx, out.path);
  return 0;
}

inline int run_mr_split(Context& ctx, const Options& o) {
  const auto in = CorpusLocation::parse(o.in);
  const auto out = CorpusLocation::parse(o.out);
  MRConfig cfg;
  cfg.include_singletons = !o.no_singletons;
  cfg.joiner = o.joiner;
  if (cfg.joiner.find('\n') != std::string::npos) throw UsageError("--joiner must not contain a newline");
  const ParallelCorpus corpus = load_corpus(in);
  for (const auto& f : in.files()) ctx.manifest.add_input(f);
  const ParallelCorpus mr = build_mr_corpus(corpus, cfg, ctx.threads);
  save_corpus(mr, out);
  for (const auto& f : out.files()) ctx.manifest.add_output(f);
  ctx.out << "wrote " << mr.size() << " pairs from " << corpus.size() << " documents";
  if (!corpus.empty()) ctx.out << " (token ratio " << format_fixed(mr_ratio(corpus, cfg), 3) << ")";
  ctx.out << '\n';
  write_manifest(ctx, out.path);
  return 0;
}

inline int run_oversample(Context& ctx, const Options& o) {
  const auto in = CorpusLocation::parse(o.in);
  const auto out = CorpusLocation::parse(o.out);
  const ParallelCorpus corpus = load_corpus(in);
  for (const auto& f : in.files()) ctx.manifest.add_input(f);
  std::size_t factor = o.factor;
  if (factor == 0) {
    factor = suggested_oversample_factor(corpus);
    ctx.manifest.config["factor"] = std::to_string(factor);
  }
  const ParallelCorpus result = oversample(corpus, factor);
  save_corpus(result, out);
  for (const auto& f : out.files()) ctx.manifest.add_output(f);
  ctx.out << "oversampled " << corpus.size() << " documents x" << factor << " = "
          << result.size() << '\n';
  write_manifest(ctx, out.path);
  return 0;
}

inline int run_bucket(Context& ctx, const Options& o) {
  const auto in = CorpusLocation::parse(o.in);
  const auto out = CorpusLocation::parse(o.out);
  const auto budgets = parse_budgets(o.bucket_budgets);
  const ParallelCorpus corpus = load_corpus(in);
  for (const auto& f : in.files()) ctx.manifest.add_input(f);
  const auto buckets = bucket_by_length(corpus, budgets);
  for (const auto& [budget, bucket] : buckets) {
    const auto loc = out.tagged(std::to_string(budget));
    save_corpus(bucket, loc);
    for (const auto& f : loc.files()) ctx.manifest.add_output(f);
    ctx.out << budget << '\t' << bucket.size() << " paragraphs\n";
  }
  write_manifest(ctx, out.path);
  return 0;
}

inline void write_metric_output(Context& ctx, const Options& o,
                                const std::vector<MetricRecord>& records) {
  if (o.out.empty()) return;
  write_file(o.out, format_metric_records(records));
  ctx.manifest.add_output(o.out);
}

inline std::optional<fs::path> out_base(const Options& o) {
  if (o.out.empty()) return std::nullopt;
  return fs::path(o.out);
}

inline int run_bleu(Context& ctx, const Options& o) {
  if (o.level != "sent" && o.level != "doc") throw UsageError("--level must be sent or doc");
  std::vector<MetricRecord> records;
  if (!o.budgets.empty()) {
    if (o.level != "doc") throw UsageError("bucketed BLEU is document-level only");
    if (o.hyp.find("{budget}") == std::string::npos || o.ref.find("{budget}") == std::string::npos)
      throw UsageError("with --budgets, --hyp and --ref must contain {budget}");
    std::map<std::size_t, BucketPair> buckets;
    for (std::size_t b : parse_budgets(o.budgets)) {
      const fs::path hyp = replace_all(o.hyp, "{budget}", std::to_string(b));
      const fs::path ref = replace_all(o.ref, "{budget}", std::to_string(b));
      buckets[b] = {load_side(hyp), load_side(ref)};
      ctx.manifest.add_input(hyp);
      ctx.manifest.add_input(ref);
    }
    const auto table = bucketed_bleu(buckets);
    ctx.out << format_bucket_table(table);
    for (const auto& [b, r] : table) {
      MetricReport named = r;
      named.name = "d-BLEU@" + std::to_string(b);
      records.push_back({o.system, named});
    }
  } else {
    const auto hyp = load_side(o.hyp);
    const auto ref = load_side(o.ref);
    ctx.manifest.add_input(o.hyp);
    ctx.manifest.add_input(o.ref);
    const MetricReport r = o.level == "sent" ? s_bleu(hyp, ref) : d_bleu(hyp, ref);
    ctx.out << r.name << ' ' << format_fixed(r.value, 2) << '\n';
    records.push_back({o.system, r});
  }
  write_metric_output(ctx, o, records);
  write_manifest(ctx, out_base(o));
  return 0;
}

inline int run_tcp(Context& ctx, const Options& o) {
  const auto refs = load_side(o.ref);
  const auto hyps = load_side(o.hyp);
  const auto labeled = read_labeled_docs(o.labels, refs);
  ctx.manifest.add_input(o.labels);
  ctx.manifest.add_input(o.ref);
  ctx.manifest.add_input(o.hyp);
  const SpanConfig span{o.radius};
  std::vector<MetricRecord> records;
  for (Category c : {Category::Tense, Category::Conj, Category::Pron}) {
    const MetricReport r = span_metric(hyps, labeled, c, span);
    ctx.out << r.name << ' ' << format_fixed(r.value, 1) << " (" << r.numerator << '/'
            << r.denominator << ")\n";
    records.push_back({o.system, r});
  }
  const double tc = records[0].report.value, cp = records[1].report.value,
               pt = records[2].report.value;
  if (tcp_degenerate(tc, cp, pt))
    ctx.err << "warning: TCP is degenerate (a component is <= 0); reporting 0\n";
  const double value = tcp(tc, cp, pt);
  ctx.out << "TCP " << format_fixed(value, 1) << '\n';
  records.push_back({o.system, {"TCP", value, 0, 0}});
  write_metric_output(ctx, o, records);
  write_manifest(ctx, out_base(o));
  return 0;
}

inline int run_pearson(Context& ctx, const Options& o) {
  const auto xs = read_values(o.x);
  const auto ys = read_values(o.y);
  ctx.manifest.add_input(o.x);
  ctx.manifest.add_input(o.y);
  const double r = pearson(xs, ys);
  ctx.out << "pearson " << format_fixed(r, 6) << '\n';
  write_metric_output(ctx, o, {{o.system, {"pearson", r, 0, 0}}});
  write_manifest(ctx, out_base(o));
  return 0;
}

inline int run_shuffle(Context& ctx, const Options& o) {
  const auto in = CorpusLocation::parse(o.in);
  const auto out = CorpusLocation::parse(o.out);
  const ParallelCorpus corpus = load_corpus(in);
  for (const auto& f : in.files()) ctx.manifest.add_input(f);
  if (o.invert) {
    const auto records = read_permutation_records(o.records);
    ctx.manifest.add_input(o.records);
    save_corpus(unshuffle(corpus, records), out);
    for (const auto& f : out.files()) ctx.manifest.add_output(f);
    ctx.out << "restored " << corpus.size() << " documents\n";
  } else {
    if (!o.seed) throw UsageError("shuffle requires --seed");
    if (o.mode != "local" && o.mode != "global") throw UsageError("--mode must be local or global");
    ctx.manifest.seed = o.seed;
    const ShuffleResult r =
        o.mode == "local" ? local_shuffle(corpus, *o.seed) : global_shuffle(corpus, *o.seed);
    save_corpus(r.corpus, out);
    for (const auto& f : out.files()) ctx.manifest.add_output(f);
    write_file(o.records, format_permutation_records(r.records));
    ctx.manifest.add_output(o.records);
    ctx.out << o.mode << " shuffle of " << corpus.size() << " documents\n";
  }
  write_manifest(ctx, out.path);
  return 0;
}

inline int run_contrastive(Context& ctx, const Options& o) {
  if (o.scores.empty() == o.train.empty())
    throw UsageError("give exactly one of --scores or --train");
  const auto instances = read_contrastive_instances(o.instances);
  ctx.manifest.add_input(o.instances);
  std::vector<CandidateScore> scores;
  if (!o.scores.empty()) {
    scores = read_candidate_scores(o.scores);
    ctx.manifest.add_input(o.scores);
  } else {
    const auto model = BigramModel::train(split_lines(read_file(o.train)));
    ctx.manifest.add_input(o.train);
    for (const auto& inst : instances) {
      auto s = reference_scorer(inst, model);
      scores.insert(scores.end(), s.begin(), s.end());
    }
    if (!o.write_scores.empty()) {
      write_file(o.write_scores, format_candidate_scores(scores));
      ctx.manifest.add_output(o.write_scores);
    }
  }
  const ContrastiveReport report = contrastive_accuracy(instances, scores);
  std::size_t width = 10;
  for (const auto& [name, _] : report.by_phenomenon) width = std::max(width, name.size() + 2);
  std::vector<MetricRecord> records;
  auto row = [&](const std::string& name, const MetricReport& r) {
    ctx.out << std::left << std::setw(static_cast<int>(width)) << name << std::right
            << std::setw(8) << format_fixed(r.value, 1) << "  (" << r.numerator << '/'
            << r.denominator << ")\n";
  };
  for (const auto& [name, r] : report.by_phenomenon) {
    row(name, r);
    records.push_back({o.system, r});
  }
  row("overall", report.overall);
  records.push_back({o.system, report.overall});
  write_metric_output(ctx, o, records);
  write_manifest(ctx, out_base(o));
  return 0;
}

inline int run_report(Context& ctx, const Options& o) {
  std::vector<MetricRecord> records;
  for (const auto& f : o.files) {
    auto r = read_metric_records(f);
    records.insert(records.end(), r.begin(), r.end());
    ctx.manifest.add_input(f);
  }
  const std::string table = format_report_table(collect_rows(records));
  ctx.out << table;
  if (!o.out.empty()) {
    write_file(o.out, table);
    ctx.manifest.add_output(o.out);
  }
  write_manifest(ctx, out_base(o));
  return 0;
}

/// Parses `args` (without the program name) and runs one subcommand.
inline int dispatch(const std::vector<std::string>& args, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  CLI::App app{"Document-level MT corpus construction and evaluation toolkit", "doc2doc"};
  app.require_subcommand(1, 1);
  app.option_defaults()->always_capture_default();
  unsigned threads = 1;
  app.add_option("--threads", threads, "Worker thread cap (output does not depend on it)")
      ->check(CLI::Range(1u, 1024u));

  Options o;
  std::map<std::string, std::function<int(Context&, const Options&)>> handlers;
  auto add = [&](const std::string& name, const std::string& help, auto handler) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->option_defaults()->always_capture_default();
    sub->add_option("--manifest", o.manifest, "Manifest path (default: next to the output)");
    handlers[name] = handler;
    return sub;
  };

  auto* convert = add("convert", "Convert between doc-text and record formats", run_convert);
  convert->add_option("--in", o.in, "Input corpus (stem or .jsonl)")->required();
  convert->add_option("--out", o.out, "Output corpus (stem or .jsonl)")->required();

  auto* clean_cmd = add("clean", "Deduplicate, segment, repair punctuation, filter by alignment",
                        run_clean);
  clean_cmd->add_option("--in", o.in, "Input corpus")->required();
  clean_cmd->add_option("--out", o.out, "Output corpus")->required();
  clean_cmd->add_flag("--dedup", o.dedup, "Drop near-duplicate documents");
  clean_cmd->add_flag("--segment", o.segment, "Re-segment sentences");
  clean_cmd->add_option("--fix-punct", o.fix_punct, "Append FILLER to unterminated sentences");
  clean_cmd->add_option("--align-scores", o.align_scores, "Alignment score records");
  clean_cmd->add_option("--lexicon", o.lexicon, "Word-pair lexicon for baseline scores");
  clean_cmd->add_option("--align-threshold", o.align_threshold, "Drop pairs scoring below this");
  clean_cmd->add_option("--report", o.report, "Removal report (JSON)");

  auto* mr = add("mr-split", "Build a multi-resolution corpus", run_mr_split);
  mr->add_option("--in", o.in, "Input corpus")->required();
  mr->add_option("--out", o.out, "Output corpus")->required();
  mr->add_flag("--no-singletons", o.no_singletons, "No extra sentence level for non-2^L documents");
  mr->add_option("--joiner", o.joiner, "Separator between joined sentences");

  auto* over = add("oversample", "Replicate every document", run_oversample);
  over->add_option("--in", o.in, "Input corpus")->required();
  over->add_option("--out", o.out, "Output corpus")->required();
  over->add_option("--factor", o.factor, "Replication factor (default: rounded MR ratio)")
      ->check(CLI::PositiveNumber);

  auto* bucket = add("bucket", "Re-segment into length-budgeted paragraphs", run_bucket);
  bucket->add_option("--in", o.in, "Input corpus")->required();
  bucket->add_option("--out", o.out, "Output stem; one corpus per budget")->required();
  bucket->add_option("--budgets", o.bucket_budgets, "Comma-separated ascending token budgets");

  auto* bleu = add("bleu", "Sentence- or document-level BLEU", run_bleu);
  bleu->add_option("--hyp", o.hyp, "Hypothesis doc-text file")->required();
  bleu->add_option("--ref", o.ref, "Reference doc-text file")->required();
  bleu->add_option("--level", o.level, "sent or doc");
  bleu->add_option("--budgets", o.budgets,
                   "Per-bucket d-BLEU; --hyp/--ref then contain {budget}");
  bleu->add_option("--system", o.system, "System name for metric records");
  bleu->add_option("--out", o.out, "Metric records output");

  auto* tcp_cmd = add("tcp", "TC / CP / PT span metrics and TCP", run_tcp);
  tcp_cmd->add_option("--labels", o.labels, "Label records")->required();
  tcp_cmd->add_option("--ref", o.ref, "Reference doc-text file")->required();
  tcp_cmd->add_option("--hyp", o.hyp, "Output doc-text file")->required();
  tcp_cmd->add_option("--radius", o.radius, "Span radius in tokens");
  tcp_cmd->add_option("--system", o.system, "System name for metric records");
  tcp_cmd->add_option("--out", o.out, "Metric records output");

  auto* pear = add("pearson", "Pearson correlation of two value files", run_pearson);
  pear->add_option("--x", o.x, "One value per line")->required();
  pear->add_option("--y", o.y, "One value per line")->required();
  pear->add_option("--system", o.system, "System name for metric records");
  pear->add_option("--out", o.out, "Metric records output");

  auto* shuf = add("shuffle", "Local or global source-sentence shuffle", run_shuffle);
  shuf->add_option("--in", o.in, "Input corpus")->required();
  shuf->add_option("--out", o.out, "Output corpus")->required();
  shuf->add_option("--mode", o.mode, "local or global");
  shuf->add_option("--seed", o.seed, "Random seed");
  shuf->add_option("--records", o.records, "Permutation records (written, or read with --invert)")
      ->required();
  shuf->add_flag("--invert", o.invert, "Undo a shuffle using --records");

  auto* con = add("contrastive", "Contrastive-set accuracy", run_contrastive);
  con->add_option("--instances", o.instances, "Contrastive instance records")->required();
  con->add_option("--scores", o.scores, "Candidate score records");
  con->add_option("--train", o.train, "Text for the reference bigram scorer");
  con->add_option("--write-scores", o.write_scores, "Save reference-scorer scores");
  con->add_option("--system", o.system, "System name for metric records");
  con->add_option("--out", o.out, "Metric records output");

  auto* rep = add("report", "Per-system summary table", run_report);
  rep->add_option("files", o.files, "Metric record files")->required();
  rep->add_option("--out", o.out, "Also write the table here");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  CLI::App* chosen = app.get_subcommands().front();
  Context ctx{out, err, threads, {}, {}};
  ctx.manifest.command = chosen->get_name();
  ctx.manifest.config = snapshot(*chosen);
  if (!o.manifest.empty()) ctx.manifest_path = fs::path(o.manifest);
  try {
    return handlers.at(chosen->get_name())(ctx, o);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << chosen->help();
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace doc2doc::cli
