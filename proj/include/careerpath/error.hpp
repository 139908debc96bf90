#pragma once

#include <stdexcept>
#include <string>

namespace careerpath {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input files, broken invariants in loaded data.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// An occupation or skill id that is not part of the loaded ontology.
class UnknownIdError : public Error {
 public:
  explicit UnknownIdError(const std::string& id)
      : Error("unknown id: " + id), id_(id) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

// A store-backed provider was asked for a document it does not hold.
class MissingEmbeddingError : public Error {
 public:
  explicit MissingEmbeddingError(const std::string& key)
      : Error("missing embedding for document key " + key), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

// Normal system of an unregularized least-squares fit is numerically singular.
class RankDeficiencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace careerpath
