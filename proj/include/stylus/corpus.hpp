#pragma once

#include <array>
#include <string>
#include <vector>

#include "stylus/common.hpp"

namespace stylus {

struct Document {
  std::string id;
  std::string text;
  Label label = Label::ClassA;
};

// Maps the free-form label strings in input files onto the two classes.
// `positive` becomes ClassA. When `negative` is empty the first other label
// seen in the file is adopted; any third distinct label is rejected.
struct LabelConfig {
  std::string positive;
  std::string negative;
};

// Immutable after construction; class counts are maintained alongside the
// document list so they can never drift apart.
class Corpus {
 public:
  Corpus() = default;
  static Corpus from_documents(std::vector<Document> docs,
                               std::string positive_name,
                               std::string negative_name);

  const std::vector<Document>& docs() const { return docs_; }
  size_t size() const { return docs_.size(); }
  size_t count(Label l) const { return counts_[label_index(l)]; }
  const std::string& label_name(Label l) const { return names_[label_index(l)]; }
  bool has_both_classes() const { return counts_[0] > 0 && counts_[1] > 0; }
  Label majority_label() const {
    return counts_[1] > counts_[0] ? Label::ClassB : Label::ClassA;
  }

 private:
  std::vector<Document> docs_;
  std::array<size_t, 2> counts_{0, 0};
  std::array<std::string, 2> names_;
};

enum class CorpusFormat { Jsonl, Csv };

Corpus load_corpus(const std::string& path, CorpusFormat format, const LabelConfig& labels);

void save_corpus(const Corpus& corpus, const std::string& path);
Corpus load_corpus_bin(const std::string& path);

// Seeded Fisher-Yates permutation of the document order.
Corpus shuffled(const Corpus& corpus, uint64_t seed);

// Splits into k contiguous groups; the first size%k groups carry the extra
// document. Requires k >= 2 and size >= k.
std::vector<Corpus> partition(const Corpus& corpus, size_t k);

// {"total":N,"<positive>":a,"<negative>":b} with keys in that order.
std::string summary_json(const Corpus& corpus);

}  // namespace stylus
