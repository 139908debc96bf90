#pragma once
// Embedding providers (builtin feature-hashing encoder, file-backed store)
// and the embedding store file format shared with the external exporter.
//
// Store file: first line {"dimension": d, "provider_name": "..."}, then one
// {"key": <sha256 hex of document text>, "vector": [...]} per line.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <openssl/evp.h>

#include <json.hpp>

#include "careerpath/error.hpp"
#include "careerpath/text.hpp"

namespace careerpath {

using EmbeddingVector = std::vector<double>;

inline std::string sha256_hex(std::string_view text) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

inline std::string document_key(const Document& doc) { return sha256_hex(doc.text); }

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::string name() const = 0;
  virtual std::size_t dimension() const = 0;
  // Separator used when concatenating experience documents.
  virtual std::string separator() const { return std::string(kDefaultSeparator); }
  virtual EmbeddingVector embed(const Document& doc) const = 0;
};

namespace detail {

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Lowercased ASCII alphanumeric runs; bytes >= 0x80 stay inside tokens.
inline std::vector<std::string> hash_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c) || c >= 0x80) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

}  // namespace detail

// Signed feature hashing of unigrams and bigrams, L2-normalized.
class HashEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit HashEmbeddingProvider(std::size_t dimension = 256) : dimension_(dimension) {
    if (dimension == 0) throw ValidationError("hash embedding dimension must be positive");
  }

  std::string name() const override { return "hash-" + std::to_string(dimension_); }
  std::size_t dimension() const override { return dimension_; }

  EmbeddingVector embed(const Document& doc) const override {
    const auto tokens = detail::hash_tokens(doc.text);
    if (tokens.empty()) throw ValidationError("cannot embed a document with no tokens");
    EmbeddingVector v(dimension_, 0.0);
    auto add = [&](std::string_view feature) {
      const auto h = detail::fnv1a(feature);
      v[h % dimension_] += (h >> 63) ? -1.0 : 1.0;
    };
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      add(tokens[i]);
      if (i + 1 < tokens.size()) add(tokens[i] + ' ' + tokens[i + 1]);
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) {
      // Every feature cancelled out; fall back to the unsigned bucket of the first token.
      v[detail::fnv1a(tokens.front()) % dimension_] = 1.0;
      return v;
    }
    for (double& x : v) x /= norm;
    return v;
  }

 private:
  std::size_t dimension_;
};

class EmbeddingStore {
 public:
  EmbeddingStore(std::size_t dimension, std::string provider_name)
      : dimension_(dimension), provider_name_(std::move(provider_name)) {
    if (dimension_ == 0) throw ValidationError("embedding store dimension must be positive");
  }

  std::size_t dimension() const { return dimension_; }
  const std::string& provider_name() const { return provider_name_; }
  std::size_t size() const { return vectors_.size(); }
  bool contains(const std::string& key) const { return vectors_.count(key) > 0; }

  void insert(std::string key, EmbeddingVector v) {
    if (v.size() != dimension_) {
      throw ValidationError("vector for key " + key + " has dimension " + std::to_string(v.size()) +
                            ", store dimension is " + std::to_string(dimension_));
    }
    for (double x : v) {
      if (!std::isfinite(x)) throw ValidationError("non-finite entry in vector for key " + key);
    }
    if (!vectors_.emplace(key, std::move(v)).second) {
      throw ValidationError("duplicate store key " + key);
    }
  }

  const EmbeddingVector& at(const std::string& key) const {
    auto it = vectors_.find(key);
    if (it == vectors_.end()) throw MissingEmbeddingError(key);
    return it->second;
  }

  // Records in ascending key order, so identical content gives identical bytes.
  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write store " + path);
    out << nlohmann::json{{"dimension", dimension_}, {"provider_name", provider_name_}}.dump()
        << '\n';
    std::vector<const std::string*> keys;
    keys.reserve(vectors_.size());
    for (const auto& [k, v] : vectors_) keys.push_back(&k);
    std::sort(keys.begin(), keys.end(), [](auto* a, auto* b) { return *a < *b; });
    for (const auto* k : keys) {
      out << nlohmann::json{{"key", *k}, {"vector", vectors_.at(*k)}}.dump() << '\n';
    }
  }

  static EmbeddingStore load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open store " + path);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError(path + ": empty store file");
    nlohmann::json header;
    try {
      header = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path + ": malformed header: " + e.what());
    }
    if (!header.contains("dimension") || !header["dimension"].is_number_unsigned() ||
        !header.contains("provider_name") || !header["provider_name"].is_string()) {
      throw ValidationError(path + ": header must carry integer 'dimension' and 'provider_name'");
    }
    EmbeddingStore store(header["dimension"].get<std::size_t>(),
                         header["provider_name"].get<std::string>());
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      try {
        auto rec = nlohmann::json::parse(line);
        auto key = rec.at("key").get<std::string>();
        if (key.size() != 64 || key.find_first_not_of("0123456789abcdef") != std::string::npos) {
          throw ValidationError("key is not a lowercase SHA-256 hex digest");
        }
        store.insert(std::move(key), rec.at("vector").get<EmbeddingVector>());
      } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path + " line " + std::to_string(line_no) + ": " + e.what());
      } catch (const ValidationError& e) {
        throw ValidationError(path + " line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    return store;
  }

 private:
  std::size_t dimension_;
  std::string provider_name_;
  std::unordered_map<std::string, EmbeddingVector> vectors_;
};

// Looks documents up by the SHA-256 of their exact text.
class StoreEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit StoreEmbeddingProvider(std::shared_ptr<const EmbeddingStore> store)
      : store_(std::move(store)) {}

  std::string name() const override { return store_->provider_name(); }
  std::size_t dimension() const override { return store_->dimension(); }
  EmbeddingVector embed(const Document& doc) const override {
    return store_->at(document_key(doc));
  }

 private:
  std::shared_ptr<const EmbeddingStore> store_;
};

}  // namespace careerpath
