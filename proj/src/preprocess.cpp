#include "stylus/preprocess.hpp"

#include <algorithm>
#include <fstream>

#include "stylus/serialize.hpp"
#include "stylus/text.hpp"

namespace stylus {

namespace {

constexpr uint32_t kTokensKind = fourcc('T', 'O', 'K', 'S');
constexpr uint32_t kTokensVersion = 1;

bool in_ranges(char32_t cp, const std::vector<ScriptRange>& ranges) {
  for (const auto& r : ranges)
    if (cp >= r.lo && cp <= r.hi) return true;
  return false;
}

}  // namespace

StopwordSet load_stopwords(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open: " + path);
  StopwordSet s;
  s.source = path;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    size_t end = line.find_last_not_of(" \t");
    std::string word = line.substr(start, end - start + 1);
    if (word.empty() || word[0] == '#') continue;
    s.words.insert(word);
  }
  return s;
}

std::string filter_script(std::string_view text, const std::vector<ScriptRange>& ranges) {
  if (ranges.empty()) fail(ErrorCode::InvalidArgument, "script ranges must be non-empty");
  std::string out;
  out.reserve(text.size());
  bool pending_gap = false;
  for (char32_t cp : utf8_decode(text)) {
    if (in_ranges(cp, ranges)) {
      if (pending_gap && !out.empty()) out.push_back(' ');
      pending_gap = false;
      utf8_append(out, cp);
    } else {
      pending_gap = true;
    }
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char32_t cp : utf8_decode(text)) {
    if (is_space_cp(cp)) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      utf8_append(current, cp);
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<std::string> remove_stopwords(const std::vector<std::string>& tokens,
                                          const StopwordSet& stops) {
  std::vector<std::string> kept;
  kept.reserve(tokens.size());
  for (const auto& t : tokens)
    if (!stops.contains(t)) kept.push_back(t);
  return kept;
}

bool detect_elongation(std::string_view token, uint32_t run_threshold) {
  if (run_threshold < 3) fail(ErrorCode::InvalidArgument, "elongation threshold must be >= 3");
  auto cps = utf8_decode(token);
  uint32_t run = 0;
  char32_t prev = 0;
  for (char32_t cp : cps) {
    run = (run > 0 && cp == prev) ? run + 1 : 1;
    prev = cp;
    if (run >= run_threshold) return true;
  }
  return false;
}

PreTokenStats capture_stats(std::string_view text) {
  PreTokenStats st;
  bool in_word = false;
  bool in_terminal_run = false;
  bool tail_content = false;
  for (char32_t cp : utf8_decode(text)) {
    if (is_space_cp(cp)) {
      in_word = false;
      continue;
    }
    ++st.char_count;
    if (!in_word) {
      ++st.word_count_raw;
      in_word = true;
    }
    if (is_sentence_terminal_cp(cp)) {
      if (!in_terminal_run) ++st.sentence_count;
      in_terminal_run = true;
      tail_content = false;
    } else {
      in_terminal_run = false;
      tail_content = true;
    }
    if (cp == U'!') ++st.exclamation_count;
    if (cp == U'?') ++st.question_count;
    if (is_emoji_cp(cp)) ++st.emoji_count;
    if (is_digit_cp(cp)) ++st.digit_count;
    if (is_punct_cp(cp)) ++st.punctuation_count;
  }
  // Text that trails off without a terminator is still one sentence.
  if (tail_content) ++st.sentence_count;
  return st;
}

std::vector<ScriptRange> effective_ranges(const PreprocessConfig& config) {
  if (config.keep_digits) return config.ranges;
  // Carve the Bangla digit run out of whatever ranges cover it.
  constexpr char32_t dig_lo = 0x09E6, dig_hi = 0x09EF;
  std::vector<ScriptRange> out;
  for (const auto& r : config.ranges) {
    if (r.hi < dig_lo || r.lo > dig_hi) {
      out.push_back(r);
      continue;
    }
    if (r.lo < dig_lo) out.push_back({r.lo, dig_lo - 1});
    if (r.hi > dig_hi) out.push_back({dig_hi + 1, r.hi});
  }
  if (out.empty()) fail(ErrorCode::InvalidArgument, "script ranges empty after digit removal");
  return out;
}

std::vector<ScriptRange> parse_script_ranges(const std::string& spec) {
  std::vector<ScriptRange> ranges;
  size_t pos = 0;
  while (pos <= spec.size()) {
    size_t comma = spec.find(',', pos);
    std::string part = spec.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (!part.empty()) {
      size_t dash = part.find('-');
      if (dash == std::string::npos)
        fail(ErrorCode::InvalidArgument, "script range \"" + part + "\" must look like 0980-09FF");
      try {
        unsigned long lo = std::stoul(part.substr(0, dash), nullptr, 16);
        unsigned long hi = std::stoul(part.substr(dash + 1), nullptr, 16);
        if (lo > hi || hi > 0x10FFFF) throw std::out_of_range("range");
        ranges.push_back({static_cast<char32_t>(lo), static_cast<char32_t>(hi)});
      } catch (const std::logic_error&) {
        fail(ErrorCode::InvalidArgument, "bad script range \"" + part + "\"");
      }
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (ranges.empty()) fail(ErrorCode::InvalidArgument, "no script ranges given");
  return ranges;
}

TokenSequence preprocess(std::string_view text, const PreprocessConfig& config) {
  TokenSequence seq;
  seq.stats = capture_stats(text);
  std::string filtered = filter_script(text, effective_ranges(config));
  std::vector<std::string> tokens = tokenize(filtered);

  std::vector<uint8_t> flags(tokens.size(), 0);
  for (size_t i = 0; i < tokens.size(); ++i) {
    flags[i] = detect_elongation(tokens[i], config.elongation_threshold) ? 1 : 0;
    if (flags[i]) ++seq.stats.elongated_count;
  }

  if (config.stopwords.words.empty()) {
    seq.tokens = std::move(tokens);
    seq.elongated = std::move(flags);
    return seq;
  }
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (config.stopwords.contains(tokens[i])) {
      ++seq.stopwords_removed;
    } else {
      seq.tokens.push_back(std::move(tokens[i]));
      seq.elongated.push_back(flags[i]);
    }
  }
  return seq;
}

Label TokenizedCorpus::majority_label() const {
  size_t a = 0;
  for (const auto& d : docs)
    if (d.label == Label::ClassA) ++a;
  return a * 2 >= docs.size() ? Label::ClassA : Label::ClassB;
}

bool TokenizedCorpus::has_both_classes() const {
  bool a = false, b = false;
  for (const auto& d : docs) (d.label == Label::ClassA ? a : b) = true;
  return a && b;
}

TokenizedCorpus preprocess_corpus(const Corpus& corpus, const PreprocessConfig& config) {
  TokenizedCorpus tc;
  tc.label_names = {corpus.label_name(Label::ClassA), corpus.label_name(Label::ClassB)};
  tc.docs.reserve(corpus.size());
  for (const auto& d : corpus.docs()) {
    TokenizedDoc td;
    td.id = d.id;
    td.label = d.label;
    td.seq = preprocess(d.text, config);
    tc.docs.push_back(std::move(td));
  }
  return tc;
}

void save_tokens(const TokenizedCorpus& tc, const std::string& path) {
  BinaryWriter w(path);
  w.header(kTokensKind, kTokensVersion);
  w.str(tc.label_names[0]);
  w.str(tc.label_names[1]);
  w.u64(tc.docs.size());
  for (const auto& d : tc.docs) {
    w.str(d.id);
    w.u8(static_cast<uint8_t>(d.label));
    const PreTokenStats& s = d.seq.stats;
    for (uint64_t v : {s.char_count, s.word_count_raw, s.sentence_count, s.exclamation_count,
                       s.question_count, s.emoji_count, s.digit_count, s.punctuation_count,
                       s.elongated_count, d.seq.stopwords_removed})
      w.u64(v);
    w.u64(d.seq.tokens.size());
    for (size_t i = 0; i < d.seq.tokens.size(); ++i) {
      w.str(d.seq.tokens[i]);
      w.u8(d.seq.elongated[i]);
    }
  }
  w.close();
}

TokenizedCorpus load_tokens(const std::string& path) {
  BinaryReader r(path);
  r.header(kTokensKind);
  TokenizedCorpus tc;
  tc.label_names[0] = r.str();
  tc.label_names[1] = r.str();
  uint64_t n = r.u64();
  tc.docs.reserve(n);
  for (uint64_t i = 0; i < n; ++i) {
    TokenizedDoc d;
    d.id = r.str();
    d.label = static_cast<Label>(r.u8());
    PreTokenStats& s = d.seq.stats;
    s.char_count = r.u64();
    s.word_count_raw = r.u64();
    s.sentence_count = r.u64();
    s.exclamation_count = r.u64();
    s.question_count = r.u64();
    s.emoji_count = r.u64();
    s.digit_count = r.u64();
    s.punctuation_count = r.u64();
    s.elongated_count = r.u64();
    d.seq.stopwords_removed = r.u64();
    uint64_t nt = r.u64();
    d.seq.tokens.reserve(nt);
    d.seq.elongated.reserve(nt);
    for (uint64_t t = 0; t < nt; ++t) {
      d.seq.tokens.push_back(r.str());
      d.seq.elongated.push_back(r.u8());
    }
    tc.docs.push_back(std::move(d));
  }
  return tc;
}

}  // namespace stylus
