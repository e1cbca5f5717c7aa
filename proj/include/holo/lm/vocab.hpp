#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace holo {

using TokenId = std::int32_t;

/// Word-level vocabulary. Indices 0-3 are reserved for PAD, BOS, EOS and SEP.
class Vocab {
 public:
  static constexpr TokenId kPad = 0, kBos = 1, kEos = 2, kSep = 3;
  static constexpr std::size_t kReserved = 4;

  Vocab();

  /// Adds `word` if absent; returns its id either way.
  TokenId add(std::string_view word);
  bool contains(std::string_view word) const { return index_.count(std::string(word)) > 0; }
  /// Throws VocabError for unknown words / out-of-range ids.
  TokenId id(std::string_view word) const;
  const std::string& word(TokenId id) const;
  std::size_t size() const { return words_.size(); }
  bool is_reserved(TokenId id) const { return id >= 0 && static_cast<std::size_t>(id) < kReserved; }
  void check(TokenId id) const;

  /// Lowercased words with punctuation split off; apostrophes stay inside words.
  static std::vector<std::string> split_words(std::string_view text);

  /// Adds every word of `text`.
  void add_text(std::string_view text);
  /// Throws VocabError on an unknown word.
  std::vector<TokenId> encode(std::string_view text) const;
  /// Space-joined words; reserved tokens are dropped.
  std::string decode(const std::vector<TokenId>& ids) const;

  /// One token per line, in id order, reserved tokens first.
  void save(const std::filesystem::path& path) const;
  static Vocab load(const std::filesystem::path& path);

  bool operator==(const Vocab& other) const { return words_ == other.words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, TokenId> index_;
};

}  // namespace holo
