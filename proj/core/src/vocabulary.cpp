#include "obj2text/vocabulary.hpp"

#include <algorithm>
#include <map>

#include "obj2text/errors.hpp"

namespace obj2text {

namespace {

const std::vector<std::string>& reserved_tokens() {
  static const std::vector<std::string> tokens = {"<pad>", "<bos>", "<eos>", "<unk>"};
  return tokens;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (char raw : text) {
    const unsigned char ch = static_cast<unsigned char>(raw);
    if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' || ch == '\f' || ch == '\v') {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
      continue;
    }
    char lower = (ch >= 'A' && ch <= 'Z') ? static_cast<char>(ch - 'A' + 'a') : raw;
    if ((lower >= 'a' && lower <= 'z') || (lower >= '0' && lower <= '9')) current.push_back(lower);
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{}) {}

Vocabulary::Vocabulary(std::vector<std::string> words) : tokens_(reserved_tokens()) {
  tokens_.insert(tokens_.end(), std::make_move_iterator(words.begin()),
                 std::make_move_iterator(words.end()));
  for (TokenId i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], i).second) {
      throw ConfigError("vocabulary: duplicate token '" + tokens_[i] + "'");
    }
  }
}

TokenId Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.contains(std::string(token));
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id >= tokens_.size()) {
    throw IndexError("vocabulary: token id " + std::to_string(id) + " out of range (size " +
                     std::to_string(tokens_.size()) + ")");
  }
  return tokens_[id];
}

std::vector<TokenId> Vocabulary::encode(std::span<const std::string> tokens) const {
  std::vector<TokenId> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id(t));
  return ids;
}

std::vector<std::string> Vocabulary::decode(std::span<const TokenId> ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (TokenId id : ids) out.push_back(token(id));
  return out;
}

std::vector<std::string> Vocabulary::words() const {
  return {tokens_.begin() + static_cast<std::ptrdiff_t>(kFirstWord), tokens_.end()};
}

Vocabulary build_vocabulary(std::span<const std::string> captions, std::size_t min_count) {
  if (min_count == 0) throw ConfigError("build_vocabulary: min_count must be >= 1");
  if (captions.empty()) throw ConfigError("build_vocabulary: empty caption corpus");
  std::map<std::string, std::size_t> counts;
  for (const auto& caption : captions) {
    for (auto& token : tokenize(caption)) ++counts[token];
  }
  std::vector<std::string> words;
  const auto& reserved = reserved_tokens();
  for (const auto& [token, count] : counts) {
    if (count < min_count) continue;
    if (std::find(reserved.begin(), reserved.end(), token) != reserved.end()) continue;
    words.push_back(token);
  }
  return Vocabulary(std::move(words));
}

std::vector<TokenId> encode_caption(std::string_view text, const Vocabulary& vocab,
                                    std::size_t max_content_len) {
  auto tokens = tokenize(text);
  if (tokens.size() > max_content_len) tokens.resize(max_content_len);
  std::vector<TokenId> ids;
  ids.reserve(tokens.size() + 2);
  ids.push_back(Vocabulary::kBos);
  for (const auto& t : tokens) ids.push_back(vocab.id(t));
  ids.push_back(Vocabulary::kEos);
  return ids;
}

std::string detokenize(std::span<const TokenId> ids, const Vocabulary& vocab) {
  std::string out;
  for (TokenId id : ids) {
    if (Vocabulary::is_reserved(id)) continue;
    if (!out.empty()) out.push_back(' ');
    out += vocab.token(id);
  }
  return out;
}

CategoryVocabulary::CategoryVocabulary(std::vector<std::string> names) {
  for (auto& n : names) {
    if (index_.contains(n)) throw ConfigError("category vocabulary: duplicate category '" + n + "'");
    add(n);
  }
}

std::optional<CategoryId> CategoryVocabulary::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

CategoryId CategoryVocabulary::id(std::string_view name) const {
  auto found = find(name);
  if (!found) throw IndexError("unknown category '" + std::string(name) + "'");
  return *found;
}

const std::string& CategoryVocabulary::name(CategoryId id) const {
  if (id >= names_.size()) {
    throw IndexError("category id " + std::to_string(id) + " out of range (V = " +
                     std::to_string(names_.size()) + ")");
  }
  return names_[id];
}

CategoryId CategoryVocabulary::add(std::string_view name) {
  if (auto found = find(name)) return *found;
  names_.emplace_back(name);
  index_.emplace(names_.back(), names_.size() - 1);
  return names_.size() - 1;
}

}  // namespace obj2text
