#pragma once

#include <stdexcept>
#include <string>

namespace tsxai {

// Coarse failure class, used to pick C API status codes and CLI exit codes.
enum class ErrCat {
  Argument,  // caller passed something unusable (bad flag value, bad shape request)
  Data,      // input file or dataset content is malformed / inconsistent
  Numeric,   // computation failed (singular system, divergence, non-finite)
  Io,        // filesystem trouble (missing file, unwritable path)
};

class Error : public std::runtime_error {
 public:
  Error(ErrCat cat, const std::string& msg) : std::runtime_error(msg), cat_(cat) {}
  ErrCat category() const { return cat_; }

 private:
  ErrCat cat_;
};

// --- data errors ------------------------------------------------------------

class ParseError : public Error {
 public:
  ParseError(const std::string& msg, long line)
      : Error(ErrCat::Data, "line " + std::to_string(line) + ": " + msg), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

struct DimensionMismatch : Error {
  explicit DimensionMismatch(const std::string& msg) : Error(ErrCat::Data, msg) {}
};

struct DegenerateMask : Error {
  explicit DegenerateMask(const std::string& msg) : Error(ErrCat::Data, msg) {}
};

// --- argument errors ---------------------------------------------------------

struct ShapeMismatch : Error {
  explicit ShapeMismatch(const std::string& msg) : Error(ErrCat::Argument, msg) {}
};

struct NonDivisibleWindow : Error {
  explicit NonDivisibleWindow(const std::string& msg) : Error(ErrCat::Argument, msg) {}
};

struct MisalignedBox : Error {
  explicit MisalignedBox(const std::string& msg) : Error(ErrCat::Argument, msg) {}
};

struct NotRescaled : Error {
  explicit NotRescaled(const std::string& msg) : Error(ErrCat::Argument, msg) {}
};

struct TooManySegments : Error {
  explicit TooManySegments(const std::string& msg) : Error(ErrCat::Argument, msg) {}
};

struct InvalidPermutation : Error {
  explicit InvalidPermutation(const std::string& msg) : Error(ErrCat::Argument, msg) {}
};

struct DomainError : Error {
  explicit DomainError(const std::string& msg) : Error(ErrCat::Argument, msg) {}
};

// --- numeric errors ----------------------------------------------------------

struct SingularSystem : Error {
  explicit SingularSystem(const std::string& msg) : Error(ErrCat::Numeric, msg) {}
};

struct NonFinite : Error {
  explicit NonFinite(const std::string& msg) : Error(ErrCat::Numeric, msg) {}
};

struct DegenerateFold : Error {
  explicit DegenerateFold(const std::string& msg) : Error(ErrCat::Numeric, msg) {}
};

struct DegenerateSpread : Error {
  explicit DegenerateSpread(const std::string& msg) : Error(ErrCat::Numeric, msg) {}
};

struct IoError : Error {
  explicit IoError(const std::string& msg) : Error(ErrCat::Io, msg) {}
};

}  // namespace tsxai
