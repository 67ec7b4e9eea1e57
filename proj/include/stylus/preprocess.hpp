#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "stylus/common.hpp"
#include "stylus/corpus.hpp"

namespace stylus {

struct ScriptRange {
  char32_t lo = 0;
  char32_t hi = 0;
};

// Character-level counts captured from the raw text before any filtering.
// char_count excludes whitespace so that avg word length is simply
// char_count / word_count_raw. elongated_count is filled in once tokens
// exist (after script filtering, before stopword removal): a stopword with
// an elongated run still lands in this tally.
struct PreTokenStats {
  uint64_t char_count = 0;
  uint64_t word_count_raw = 0;
  uint64_t sentence_count = 0;
  uint64_t exclamation_count = 0;
  uint64_t question_count = 0;
  uint64_t emoji_count = 0;
  uint64_t digit_count = 0;
  uint64_t punctuation_count = 0;
  uint64_t elongated_count = 0;
};

struct TokenSequence {
  std::vector<std::string> tokens;
  std::vector<uint8_t> elongated;  // parallel to tokens
  PreTokenStats stats;
  uint64_t stopwords_removed = 0;
};

struct StopwordSet {
  std::set<std::string> words;
  std::string source;
  bool contains(const std::string& w) const { return words.count(w) > 0; }
};

// One word per line, UTF-8, '#' starts a comment line, blanks ignored.
StopwordSet load_stopwords(const std::string& path);

struct PreprocessConfig {
  // Retained script: the Bengali block. Configurable so other scripts work.
  std::vector<ScriptRange> ranges{{0x0980, 0x09FF}};
  bool keep_digits = true;  // when false, U+09E6..U+09EF are filtered out too
  uint32_t elongation_threshold = 3;
  StopwordSet stopwords;  // empty set disables removal
};

// Keeps only codepoints inside `ranges`; every removed run (and any
// whitespace) collapses to a single space. Idempotent.
std::string filter_script(std::string_view text, const std::vector<ScriptRange>& ranges);

// Split on Unicode whitespace, dropping empty tokens.
std::vector<std::string> tokenize(std::string_view text);

std::vector<std::string> remove_stopwords(const std::vector<std::string>& tokens,
                                          const StopwordSet& stops);

// True iff the token contains a run of >= run_threshold identical codepoints.
// Requires run_threshold >= 3.
bool detect_elongation(std::string_view token, uint32_t run_threshold);

// Raw-text counts only; elongated_count stays 0 here.
PreTokenStats capture_stats(std::string_view text);

// capture_stats -> filter_script -> tokenize -> elongation flags ->
// remove_stopwords. No lemmatization or stemming exists anywhere.
TokenSequence preprocess(std::string_view text, const PreprocessConfig& config);

std::vector<ScriptRange> effective_ranges(const PreprocessConfig& config);

// Parses "0980-09FF,0020-007E" style range lists.
std::vector<ScriptRange> parse_script_ranges(const std::string& spec);

struct TokenizedDoc {
  std::string id;
  Label label = Label::ClassA;
  TokenSequence seq;
};

struct TokenizedCorpus {
  std::array<std::string, 2> label_names;
  std::vector<TokenizedDoc> docs;
  Label majority_label() const;
  bool has_both_classes() const;
};

TokenizedCorpus preprocess_corpus(const Corpus& corpus, const PreprocessConfig& config);

void save_tokens(const TokenizedCorpus& tc, const std::string& path);
TokenizedCorpus load_tokens(const std::string& path);

}  // namespace stylus
