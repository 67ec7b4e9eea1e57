#include "stylus/corpus.hpp"

#include <fstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "stylus/rng.hpp"
#include "stylus/serialize.hpp"

namespace stylus {

namespace {

constexpr uint32_t kCorpusKind = fourcc('C', 'O', 'R', 'P');
constexpr uint32_t kCorpusVersion = 1;

Label map_label(const std::string& raw, const LabelConfig& cfg, std::string& inferred_negative,
                size_t line_no) {
  if (raw == cfg.positive) return Label::ClassA;
  if (!cfg.negative.empty()) {
    if (raw == cfg.negative) return Label::ClassB;
  } else if (inferred_negative.empty()) {
    inferred_negative = raw;
    return Label::ClassB;
  } else if (raw == inferred_negative) {
    return Label::ClassB;
  }
  fail(ErrorCode::UnknownLabel,
       "line " + std::to_string(line_no) + ": unknown label \"" + raw + "\"");
}

struct RawRecord {
  std::string id, text, label;
  size_t line_no = 0;
};

std::vector<RawRecord> read_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open: " + path);
  std::vector<RawRecord> records;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      fail(ErrorCode::MalformedRecord, "line " + std::to_string(line_no) + ": invalid JSON");
    RawRecord r;
    r.line_no = line_no;
    for (const char* field : {"id", "text", "label"}) {
      if (!j.contains(field) || !j[field].is_string())
        fail(ErrorCode::MalformedRecord,
             "line " + std::to_string(line_no) + ": missing string field \"" + field + "\"");
    }
    r.id = j["id"].get<std::string>();
    r.text = j["text"].get<std::string>();
    r.label = j["label"].get<std::string>();
    records.push_back(std::move(r));
  }
  return records;
}

// RFC 4180 style fields: quoted fields may contain commas, newlines and
// doubled quotes. Returns one row per record plus the line each started on.
std::vector<std::pair<std::vector<std::string>, size_t>> read_csv_rows(const std::string& path) {
  std::string data = read_text_file(path);
  std::vector<std::pair<std::vector<std::string>, size_t>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  size_t line_no = 1, row_start = 1;
  bool any = false;
  auto end_field = [&] {
    row.push_back(field);
    field.clear();
  };
  auto end_row = [&] {
    end_field();
    rows.emplace_back(std::move(row), row_start);
    row.clear();
    any = false;
    row_start = line_no;
  };
  for (size_t i = 0; i < data.size(); ++i) {
    char c = data[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < data.size() && data[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line_no;
        field.push_back(c);
      }
      any = true;
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        any = true;
        break;
      case ',':
        end_field();
        any = true;
        break;
      case '\r':
        break;
      case '\n':
        ++line_no;
        if (any || !field.empty() || !row.empty()) end_row();
        else row_start = line_no;
        break;
      default:
        field.push_back(c);
        any = true;
        break;
    }
  }
  if (quoted) fail(ErrorCode::MalformedRecord, "line " + std::to_string(row_start) + ": unterminated quote");
  if (any || !field.empty() || !row.empty()) end_row();
  return rows;
}

std::vector<RawRecord> read_csv(const std::string& path) {
  auto rows = read_csv_rows(path);
  if (rows.empty()) fail(ErrorCode::MalformedRecord, "line 1: missing CSV header");
  const auto& header = rows.front().first;
  int id_col = -1, text_col = -1, label_col = -1;
  for (size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "id") id_col = static_cast<int>(i);
    else if (header[i] == "text") text_col = static_cast<int>(i);
    else if (header[i] == "label") label_col = static_cast<int>(i);
  }
  if (id_col < 0 || text_col < 0 || label_col < 0)
    fail(ErrorCode::MalformedRecord, "line 1: CSV header must name id, text and label columns");
  std::vector<RawRecord> records;
  for (size_t r = 1; r < rows.size(); ++r) {
    const auto& [fields, line_no] = rows[r];
    if (fields.size() != header.size())
      fail(ErrorCode::MalformedRecord,
           "line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
               " fields, got " + std::to_string(fields.size()));
    RawRecord rec;
    rec.id = fields[static_cast<size_t>(id_col)];
    rec.text = fields[static_cast<size_t>(text_col)];
    rec.label = fields[static_cast<size_t>(label_col)];
    rec.line_no = line_no;
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace

Corpus Corpus::from_documents(std::vector<Document> docs, std::string positive_name,
                              std::string negative_name) {
  Corpus c;
  std::unordered_set<std::string> seen;
  seen.reserve(docs.size());
  for (const auto& d : docs) {
    if (d.id.empty()) fail(ErrorCode::MalformedRecord, "document with empty id");
    if (!seen.insert(d.id).second) fail(ErrorCode::DuplicateId, "duplicate id \"" + d.id + "\"");
    ++c.counts_[label_index(d.label)];
  }
  c.docs_ = std::move(docs);
  c.names_ = {std::move(positive_name), std::move(negative_name)};
  return c;
}

Corpus load_corpus(const std::string& path, CorpusFormat format, const LabelConfig& labels) {
  if (labels.positive.empty()) fail(ErrorCode::InvalidArgument, "positive label must be set");
  if (labels.positive == labels.negative)
    fail(ErrorCode::InvalidArgument, "positive and negative labels must differ");
  auto records = format == CorpusFormat::Jsonl ? read_jsonl(path) : read_csv(path);
  std::string inferred_negative;
  std::vector<Document> docs;
  docs.reserve(records.size());
  for (auto& r : records) {
    if (r.id.empty())
      fail(ErrorCode::MalformedRecord, "line " + std::to_string(r.line_no) + ": empty id");
    Document d;
    d.id = std::move(r.id);
    d.text = std::move(r.text);
    d.label = map_label(r.label, labels, inferred_negative, r.line_no);
    docs.push_back(std::move(d));
  }
  std::string negative = labels.negative.empty() ? inferred_negative : labels.negative;
  return Corpus::from_documents(std::move(docs), labels.positive, negative);
}

void save_corpus(const Corpus& corpus, const std::string& path) {
  BinaryWriter w(path);
  w.header(kCorpusKind, kCorpusVersion);
  w.str(corpus.label_name(Label::ClassA));
  w.str(corpus.label_name(Label::ClassB));
  w.u64(corpus.size());
  for (const auto& d : corpus.docs()) {
    w.str(d.id);
    w.str(d.text);
    w.u8(static_cast<uint8_t>(d.label));
  }
  w.close();
}

Corpus load_corpus_bin(const std::string& path) {
  BinaryReader r(path);
  r.header(kCorpusKind);
  std::string pos = r.str();
  std::string neg = r.str();
  uint64_t n = r.u64();
  std::vector<Document> docs;
  docs.reserve(n);
  for (uint64_t i = 0; i < n; ++i) {
    Document d;
    d.id = r.str();
    d.text = r.str();
    uint8_t lab = r.u8();
    if (lab > 1) fail(ErrorCode::MalformedRecord, "bad label byte in " + path);
    d.label = static_cast<Label>(lab);
    docs.push_back(std::move(d));
  }
  return Corpus::from_documents(std::move(docs), pos, neg);
}

Corpus shuffled(const Corpus& corpus, uint64_t seed) {
  std::vector<Document> docs = corpus.docs();
  Rng rng(seed);
  fisher_yates(docs, rng);
  return Corpus::from_documents(std::move(docs), corpus.label_name(Label::ClassA),
                                corpus.label_name(Label::ClassB));
}

std::vector<Corpus> partition(const Corpus& corpus, size_t k) {
  if (k < 2) fail(ErrorCode::InvalidArgument, "partition needs k >= 2");
  if (corpus.size() < k)
    fail(ErrorCode::TooFewDocuments,
         "cannot split " + std::to_string(corpus.size()) + " documents into " +
             std::to_string(k) + " groups");
  size_t base = corpus.size() / k;
  size_t extra = corpus.size() % k;
  std::vector<Corpus> groups;
  groups.reserve(k);
  size_t offset = 0;
  for (size_t g = 0; g < k; ++g) {
    size_t len = base + (g < extra ? 1 : 0);
    std::vector<Document> docs(corpus.docs().begin() + static_cast<ptrdiff_t>(offset),
                               corpus.docs().begin() + static_cast<ptrdiff_t>(offset + len));
    offset += len;
    groups.push_back(Corpus::from_documents(std::move(docs), corpus.label_name(Label::ClassA),
                                            corpus.label_name(Label::ClassB)));
  }
  return groups;
}

std::string summary_json(const Corpus& corpus) {
  nlohmann::ordered_json j;
  j["total"] = corpus.size();
  auto name_or = [&](Label l, const char* fallback) {
    const std::string& n = corpus.label_name(l);
    return n.empty() ? std::string(fallback) : n;
  };
  j[name_or(Label::ClassA, "class_a")] = corpus.count(Label::ClassA);
  j[name_or(Label::ClassB, "class_b")] = corpus.count(Label::ClassB);
  return j.dump();
}

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedRecord: return "malformed_record";
    case ErrorCode::DuplicateId: return "duplicate_id";
    case ErrorCode::UnknownLabel: return "unknown_label";
    case ErrorCode::TooFewDocuments: return "too_few_documents";
    case ErrorCode::EmptyVocabulary: return "empty_vocabulary";
    case ErrorCode::MalformedLine: return "malformed_line";
    case ErrorCode::NegativeFeature: return "negative_feature";
    case ErrorCode::InsufficientClasses: return "insufficient_classes";
    case ErrorCode::ShapeMismatch: return "shape_mismatch";
    case ErrorCode::IndexOutOfRange: return "index_out_of_range";
    case ErrorCode::EmptyDataset: return "empty_dataset";
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

}  // namespace stylus
