#pragma once

#include <string>
#include <vector>

#include "stylus/corpus.hpp"
#include "stylus/features.hpp"
#include "stylus/preprocess.hpp"

namespace stylus::testsupport {

// Seeded generator for a separable two-class corpus in Bangla script:
// ClassA ("female") posts carry marker tokens, elongated words and
// exclamation runs; ClassB ("male") posts draw from the shared neutral
// vocabulary only. Both classes get stopwords sprinkled in.
struct SyntheticSpec {
  size_t docs = 1000;
  uint64_t seed = 7;
  double class_a_fraction = 0.5;
  int min_tokens = 8;
  int max_tokens = 18;
  double label_noise = 0.0;  // probability of flipping the label only
};

Corpus make_marker_corpus(const SyntheticSpec& spec);

const std::vector<std::string>& neutral_tokens();
const std::vector<std::string>& marker_tokens();
const std::vector<std::string>& stopword_tokens();
const std::vector<std::string>& elongated_tokens();

StopwordSet synthetic_stopwords();
Lexicon synthetic_lexicon();
PreprocessConfig synthetic_preprocess_config();

TokenizedCorpus synthetic_tokens(const SyntheticSpec& spec);

// Writes the corpus as JSONL (id/text/label records) for CLI tests.
void write_jsonl(const Corpus& corpus, const std::string& path);
void write_stopwords_file(const std::string& path);
void write_lexicon_file(const std::string& path);

}  // namespace stylus::testsupport
