#include "holo/lm/vocab.hpp"

#include <cctype>
#include <fstream>

#include "holo/errors.hpp"

namespace holo {

namespace {
constexpr const char* kReservedWords[] = {"<pad>", "<bos>", "<eos>", "<sep>"};
}

Vocab::Vocab() {
  for (const char* w : kReservedWords) add(w);
}

TokenId Vocab::add(std::string_view word) {
  if (word.empty()) throw VocabError("empty token");
  auto it = index_.find(std::string(word));
  if (it != index_.end()) return it->second;
  const auto id = static_cast<TokenId>(words_.size());
  words_.emplace_back(word);
  index_.emplace(std::string(word), id);
  return id;
}

TokenId Vocab::id(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) throw VocabError("out-of-vocabulary word: '" + std::string(word) + "'");
  return it->second;
}

void Vocab::check(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= words_.size()) {
    throw VocabError("token id " + std::to_string(id) + " outside vocabulary of " + std::to_string(words_.size()));
  }
}

const std::string& Vocab::word(TokenId id) const {
  check(id);
  return words_[static_cast<std::size_t>(id)];
}

std::vector<std::string> Vocab::split_words(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      flush();
    } else if (std::isalnum(c) || ch == '\'' || ch == '-' || c >= 0x80) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
      out.emplace_back(1, ch);
    }
  }
  flush();
  return out;
}

void Vocab::add_text(std::string_view text) {
  for (const auto& w : split_words(text)) add(w);
}

std::vector<TokenId> Vocab::encode(std::string_view text) const {
  std::vector<TokenId> ids;
  for (const auto& w : split_words(text)) ids.push_back(id(w));
  return ids;
}

std::string Vocab::decode(const std::vector<TokenId>& ids) const {
  std::string out;
  for (TokenId t : ids) {
    if (is_reserved(t)) continue;
    if (!out.empty()) out.push_back(' ');
    out += word(t);
  }
  return out;
}

void Vocab::save(const std::filesystem::path& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write vocabulary " + path.string());
  for (const auto& w : words_) f << w << '\n';
  if (!f) throw IoError("failed writing vocabulary " + path.string());
}

Vocab Vocab::load(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read vocabulary " + path.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(f, line);) lines.push_back(line);
  if (lines.size() < kReserved) throw VocabError(path.string() + ": missing reserved tokens");
  for (std::size_t i = 0; i < kReserved; ++i) {
    if (lines[i] != kReservedWords[i]) {
      throw VocabError(path.string() + ": line " + std::to_string(i + 1) + " must be " + kReservedWords[i]);
    }
  }
  Vocab v;
  for (std::size_t i = kReserved; i < lines.size(); ++i) {
    if (v.contains(lines[i]) || lines[i].empty()) {
      throw VocabError(path.string() + ": duplicate or empty token on line " + std::to_string(i + 1));
    }
    v.add(lines[i]);
  }
  return v;
}

}  // namespace holo
