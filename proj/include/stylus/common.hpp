#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace stylus {

enum class ErrorCode {
  MalformedRecord,
  DuplicateId,
  UnknownLabel,
  TooFewDocuments,
  EmptyVocabulary,
  MalformedLine,
  NegativeFeature,
  InsufficientClasses,
  ShapeMismatch,
  IndexOutOfRange,
  EmptyDataset,
  InvalidArgument,
  Io,
};

const char* error_code_name(ErrorCode code);

// All validation failures surface as Error; anything else escaping the
// library is treated as an internal fault by the CLI.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

// Binary class label. ClassA is the configured positive label (for the
// gender task: the label passed as --positive-label), ClassB the other one.
// Every documented tie rule resolves toward ClassA.
enum class Label : uint8_t { ClassA = 0, ClassB = 1 };

inline Label other_label(Label l) {
  return l == Label::ClassA ? Label::ClassB : Label::ClassA;
}

inline size_t label_index(Label l) { return static_cast<size_t>(l); }

}  // namespace stylus
