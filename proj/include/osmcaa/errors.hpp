#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace osmcaa {

// Base class for all library errors. Config/CLI validation problems use
// ValidationError (exit code 1); everything else maps to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class ZeroNormRowError : public Error {
 public:
  explicit ZeroNormRowError(std::size_t row)
      : Error("row " + std::to_string(row) + " has norm below epsilon"),
        row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

class NonFiniteEvaluationError : public Error {
 public:
  using Error::Error;
};

class InsufficientClassesError : public Error {
 public:
  using Error::Error;
};

class LabelOutOfRangeError : public Error {
 public:
  LabelOutOfRangeError(int label, std::size_t num_classes)
      : Error("label " + std::to_string(label) + " out of range [0, " +
              std::to_string(num_classes) + ")") {}
};

class MeanSeparationError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  FormatError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class DimensionMismatchError : public Error {
 public:
  using Error::Error;
};

class NoPositiveInGalleryError : public Error {
 public:
  explicit NoPositiveInGalleryError(int label)
      : Error("label " + std::to_string(label) +
              " occurs only once; no positive exists in any gallery"),
        label_(label) {}
  int label() const { return label_; }

 private:
  int label_;
};

class NonFiniteLossError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace osmcaa
