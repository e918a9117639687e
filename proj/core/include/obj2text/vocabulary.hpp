#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace obj2text {

using TokenId = std::size_t;
using CategoryId = std::size_t;

/// Lowercases, drops every character outside [a-z0-9 ] (whitespace counts as
/// a separator) and splits on spaces. Empty tokens are dropped.
std::vector<std::string> tokenize(std::string_view text);

/// Word vocabulary with four reserved ids. Non-reserved words are stored in
/// ascending lexical order starting at kFirstWord.
class Vocabulary {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kBos = 1;
  static constexpr TokenId kEos = 2;
  static constexpr TokenId kUnk = 3;
  static constexpr TokenId kFirstWord = 4;

  Vocabulary();
  /// `words` must be distinct and must not collide with the reserved tokens.
  explicit Vocabulary(std::vector<std::string> words);

  std::size_t size() const { return tokens_.size(); }
  /// UNK for unknown tokens.
  TokenId id(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(TokenId id) const;

  std::vector<TokenId> encode(std::span<const std::string> tokens) const;
  std::vector<std::string> decode(std::span<const TokenId> ids) const;

  /// Every entry in id order, reserved tokens included.
  const std::vector<std::string>& tokens() const { return tokens_; }
  /// Non-reserved words in id order.
  std::vector<std::string> words() const;

  static bool is_reserved(TokenId id) { return id < kFirstWord; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

/// Tokens with corpus frequency >= min_count (default 5) become words.
/// Throws ConfigError on an empty corpus or min_count == 0.
Vocabulary build_vocabulary(std::span<const std::string> captions, std::size_t min_count = 5);

/// [BOS, content..., EOS] with content truncated to `max_content_len` tokens.
std::vector<TokenId> encode_caption(std::string_view text, const Vocabulary& vocab,
                                    std::size_t max_content_len = 16);

/// Whitespace join of the non-reserved tokens.
std::string detokenize(std::span<const TokenId> ids, const Vocabulary& vocab);

/// Object category names, bijective with [0, V).
class CategoryVocabulary {
 public:
  CategoryVocabulary() = default;
  explicit CategoryVocabulary(std::vector<std::string> names);

  std::size_t size() const { return names_.size(); }
  std::optional<CategoryId> find(std::string_view name) const;
  /// Throws IndexError for unknown names.
  CategoryId id(std::string_view name) const;
  const std::string& name(CategoryId id) const;
  const std::vector<std::string>& names() const { return names_; }

  /// Registers `name` if new and returns its id.
  CategoryId add(std::string_view name);

  friend bool operator==(const CategoryVocabulary& a, const CategoryVocabulary& b) {
    return a.names_ == b.names_;
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, CategoryId> index_;
};

}  // namespace obj2text
