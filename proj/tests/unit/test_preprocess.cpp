#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "stylus/preprocess.hpp"
#include "stylus/text.hpp"

using namespace stylus;

namespace {

// U+0995, U+0996, U+0997 as UTF-8
const std::string kKa = "\xe0\xa6\x95";
const std::string kKha = "\xe0\xa6\x96";
const std::string kGa = "\xe0\xa6\x97";

const std::vector<ScriptRange> kBangla = {{0x0980, 0x09FF}};

}  // namespace

TEST_SUITE_BEGIN("preprocess");

TEST_CASE("filter_script removes disjoint scripts entirely") {
  CHECK(filter_script("abc", kBangla) == "");
  CHECK(filter_script("", kBangla) == "");
}

TEST_CASE("filter_script keeps pure in-range text unchanged") {
  std::string pure = kKa + kKha + " " + kGa;
  CHECK(filter_script(pure, kBangla) == pure);
}

TEST_CASE("filter_script collapses removed runs to single separators") {
  std::string mixed = "Xx" + kKa + kKha + "Y!" + kGa + "  Z";
  std::string expected = kKa + kKha + " " + kGa;
  CHECK(filter_script(mixed, kBangla) == expected);
}

TEST_CASE("filter_script is idempotent on random mixed input") {
  std::string mixed = "a " + kKa + "1?" + kKha + "\n" + kGa + kGa + " end";
  std::string once = filter_script(mixed, kBangla);
  CHECK(filter_script(once, kBangla) == once);
}

TEST_CASE("tokenize splits on unicode whitespace and drops empties") {
  CHECK(tokenize("") == std::vector<std::string>{});
  CHECK(tokenize("a  b\nc") == std::vector<std::string>{"a", "b", "c"});
  CHECK(tokenize("\t \r\n") == std::vector<std::string>{});
  // U+00A0 no-break space separates too
  CHECK(tokenize("a\xc2\xa0ţ") == std::vector<std::string>{"a", "ţ"});
}

TEST_CASE("tokenize round trips a 1000-token document") {
  std::string text;
  for (int i = 0; i < 1000; ++i) {
    if (i) text += ' ';
    text += "t" + std::to_string(i);
  }
  CHECK(tokenize(text).size() == 1000);
}

TEST_CASE("remove_stopwords keeps order and drops exact matches") {
  StopwordSet stops;
  stops.words = {"the"};
  CHECK(remove_stopwords({"x", "the", "y"}, stops) == std::vector<std::string>{"x", "y"});
  CHECK(remove_stopwords({"the", "the"}, stops) == std::vector<std::string>{});
  StopwordSet empty;
  CHECK(remove_stopwords({"a", "b"}, empty) == std::vector<std::string>{"a", "b"});
}

TEST_CASE("detect_elongation thresholds on codepoint runs") {
  CHECK(detect_elongation("Greaaat", 3));
  CHECK_FALSE(detect_elongation("Great", 3));
  CHECK_FALSE(detect_elongation("aab", 3));
  CHECK(detect_elongation("aaab", 3));
  CHECK(detect_elongation("xaaaa", 4));
  CHECK_FALSE(detect_elongation("", 3));
  // runs are per codepoint, not per byte
  CHECK(detect_elongation(kKa + kKa + kKa, 3));
  CHECK_FALSE(detect_elongation(kKa + kKha + kKa, 3));
  CHECK_THROWS_AS(detect_elongation("aaa", 2), Error);
}

TEST_CASE("capture_stats counts the advertised classes") {
  PreTokenStats s = capture_stats("Greaaat news!!!");
  CHECK(s.char_count == 14);  // non-whitespace codepoints
  CHECK(s.word_count_raw == 2);
  CHECK(s.sentence_count == 1);
  CHECK(s.exclamation_count == 3);
  CHECK(s.punctuation_count == 3);
  CHECK(s.question_count == 0);

  PreTokenStats two = capture_stats("One. Two three");
  CHECK(two.sentence_count == 2);
  CHECK(two.word_count_raw == 3);

  PreTokenStats empty = capture_stats("");
  CHECK(empty.char_count == 0);
  CHECK(empty.sentence_count == 0);

  PreTokenStats digits = capture_stats("ab 12 \xe0\xa7\xa6\xe0\xa7\xa7?");  // bangla 0,1
  CHECK(digits.digit_count == 4);
  CHECK(digits.question_count == 1);

  PreTokenStats emoji = capture_stats("hi \xf0\x9f\x98\x80");  // U+1F600
  CHECK(emoji.emoji_count == 1);
}

TEST_CASE("sentence count is at least one for non-empty text") {
  for (const char* t : {"a", "hello world", "x.", "!!!", "\xe0\xa6\x95"}) {
    PreTokenStats s = capture_stats(t);
    CHECK(s.sentence_count >= 1);
  }
}

TEST_CASE("preprocess composes the pipeline in the documented order") {
  PreprocessConfig config;
  StopwordSet stops;
  stops.words = {kKa + kKa};  // a stopword
  config.stopwords = stops;

  SUBCASE("latin-only input gives an empty sequence with non-zero raw stats") {
    TokenSequence seq = preprocess("Only latin words!", config);
    CHECK(seq.tokens.empty());
    CHECK(seq.stats.char_count > 0);
    CHECK(seq.stats.exclamation_count == 1);
  }

  SUBCASE("pure stopword sentence empties out but keeps stats") {
    TokenSequence seq = preprocess(kKa + kKa + " " + kKa + kKa, config);
    CHECK(seq.tokens.empty());
    CHECK(seq.stopwords_removed == 2);
    CHECK(seq.stats.word_count_raw == 2);
  }

  SUBCASE("an elongated non-stopword is retained with its flag") {
    std::string elongated = kKha + kKha + kKha + kGa;
    TokenSequence seq = preprocess(elongated + " " + kGa, config);
    REQUIRE(seq.tokens.size() == 2);
    CHECK(seq.tokens[0] == elongated);
    CHECK(seq.elongated[0] == 1);
    CHECK(seq.elongated[1] == 0);
    CHECK(seq.stats.elongated_count == 1);
  }
}

TEST_CASE("pipeline order is observable through an elongated stopword") {
  PreprocessConfig config;
  std::string elongated_stop = kKa + kKa + kKa;
  config.stopwords.words = {elongated_stop};
  TokenSequence seq = preprocess(elongated_stop + " " + kGa, config);
  CHECK(seq.tokens == std::vector<std::string>{kGa});
  CHECK(seq.stats.elongated_count == 1);  // tallied before removal
  CHECK(seq.stopwords_removed == 1);
}

TEST_CASE("preprocess is idempotent on its own token output") {
  PreprocessConfig config;
  config.stopwords.words = {kKa};
  std::string text = kKha + kKha + kKha + " x " + kKa + " " + kGa + kKha + "!!";
  TokenSequence first = preprocess(text, config);
  std::string rejoined;
  for (const auto& t : first.tokens) {
    if (!rejoined.empty()) rejoined += ' ';
    rejoined += t;
  }
  TokenSequence second = preprocess(rejoined, config);
  CHECK(second.tokens == first.tokens);
  CHECK(second.elongated == first.elongated);
}

TEST_CASE("elongated tokens appear verbatim in the filtered text") {
  PreprocessConfig config;
  std::string text = "abc " + kKha + kKha + kKha + kGa + " !" + kKa;
  std::string filtered = filter_script(text, effective_ranges(config));
  TokenSequence seq = preprocess(text, config);
  for (size_t i = 0; i < seq.tokens.size(); ++i) {
    if (seq.elongated[i]) CHECK(filtered.find(seq.tokens[i]) != std::string::npos);
  }
}

TEST_CASE("drop-digits carves the digit range out") {
  PreprocessConfig config;
  config.keep_digits = false;
  std::string bangla_digit = "\xe0\xa7\xa6";  // U+09E6
  TokenSequence with = preprocess(kKa + bangla_digit + kKha, PreprocessConfig{});
  REQUIRE(with.tokens.size() == 1);
  CHECK(with.tokens[0] == kKa + bangla_digit + kKha);
  TokenSequence without = preprocess(kKa + bangla_digit + kKha, config);
  REQUIRE(without.tokens.size() == 2);
  CHECK(without.tokens[0] == kKa);
  CHECK(without.tokens[1] == kKha);
}

TEST_CASE("stopword files accept comments and blanks") {
  auto path = std::filesystem::temp_directory_path() / "stylus_stops.txt";
  {
    std::ofstream out(path, std::ios::binary);
    out << "# comment\n\n  " << kKa << "  \n" << kKha << "\n";
  }
  StopwordSet s = load_stopwords(path.string());
  CHECK(s.words.size() == 2);
  CHECK(s.contains(kKa));
  CHECK(s.contains(kKha));
  CHECK_FALSE(s.contains("#"));
  std::filesystem::remove(path);
}

TEST_CASE("parse_script_ranges reads hex pairs") {
  auto ranges = parse_script_ranges("0980-09FF,0041-005A");
  REQUIRE(ranges.size() == 2);
  CHECK(ranges[0].lo == 0x0980);
  CHECK(ranges[1].hi == 0x005A);
  CHECK_THROWS_AS(parse_script_ranges("junk"), Error);
  CHECK_THROWS_AS(parse_script_ranges("0990-0900"), Error);
}

TEST_CASE("tokens binary file round trips") {
  PreprocessConfig config;
  config.stopwords.words = {kKa};
  std::vector<Document> docs;
  docs.push_back({"a", kKha + kKha + kKha + " " + kKa + " " + kGa + "!!", Label::ClassA});
  docs.push_back({"b", "latin only", Label::ClassB});
  Corpus corpus = Corpus::from_documents(std::move(docs), "female", "male");
  TokenizedCorpus tc = preprocess_corpus(corpus, config);
  auto path = std::filesystem::temp_directory_path() / "stylus_tokens_rt.bin";
  save_tokens(tc, path.string());
  TokenizedCorpus back = load_tokens(path.string());
  REQUIRE(back.docs.size() == 2);
  CHECK(back.label_names[0] == "female");
  CHECK(back.docs[0].id == "a");
  CHECK(back.docs[0].label == Label::ClassA);
  CHECK(back.docs[0].seq.tokens == tc.docs[0].seq.tokens);
  CHECK(back.docs[0].seq.elongated == tc.docs[0].seq.elongated);
  CHECK(back.docs[0].seq.stopwords_removed == 1);
  CHECK(back.docs[0].seq.stats.exclamation_count == 2);
  CHECK(back.docs[1].seq.tokens.empty());
  std::filesystem::remove(path);
}

TEST_SUITE_END();
