#pragma once

#include <algorithm>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "chainlogic/protocol.hpp"

namespace chainlogic {

/// All words of a fixed length over an alphabet. Indices are base-|alphabet|
/// numerals (first letter most significant); with a sorted alphabet this is
/// the lexicographic order of the words.
class WordDomain final : public ValueDomain {
 public:
  WordDomain(std::size_t word_len, std::string alphabet) : word_len_(word_len), alphabet_(std::move(alphabet)) {
    std::sort(alphabet_.begin(), alphabet_.end());
    alphabet_.erase(std::unique(alphabet_.begin(), alphabet_.end()), alphabet_.end());
    if (word_len_ == 0) throw std::invalid_argument("word length must be positive");
    if (alphabet_.size() < 2) throw std::invalid_argument("alphabet needs at least two letters");
    std::uint64_t size = 1;
    place_.assign(word_len_, 0);
    for (std::size_t i = word_len_; i-- > 0;) {
      place_[i] = size;
      size *= alphabet_.size();
      if (size > std::numeric_limits<ValueIndex>::max()) throw std::invalid_argument("word space too large");
    }
    size_ = size;
  }

  std::size_t size() const override { return size_; }

  std::string label(ValueIndex i) const override {
    if (i >= size_) throw std::out_of_range("word index out of range");
    std::string w(word_len_, ' ');
    for (std::size_t pos = 0; pos < word_len_; ++pos) w[pos] = alphabet_[(i / place_[pos]) % alphabet_.size()];
    return w;
  }

  std::optional<ValueIndex> index_of(std::string_view word) const override {
    if (word.size() != word_len_) return std::nullopt;
    std::uint64_t idx = 0;
    for (char c : word) {
      auto it = std::lower_bound(alphabet_.begin(), alphabet_.end(), c);
      if (it == alphabet_.end() || *it != c) return std::nullopt;
      idx = idx * alphabet_.size() + static_cast<std::uint64_t>(it - alphabet_.begin());
    }
    return static_cast<ValueIndex>(idx);
  }

  std::size_t word_len() const noexcept { return word_len_; }
  const std::string& alphabet() const noexcept { return alphabet_; }
  std::size_t digit(ValueIndex i, std::size_t pos) const { return (i / place_[pos]) % alphabet_.size(); }
  std::uint64_t place(std::size_t pos) const { return place_[pos]; }

 private:
  std::size_t word_len_;
  std::string alphabet_;
  std::vector<std::uint64_t> place_;
  std::uint64_t size_ = 0;
};

/// Words at Hamming distance at most one. Computed on demand.
class HammingNeighbors final : public LocalCondition {
 public:
  explicit HammingNeighbors(std::shared_ptr<const WordDomain> words) : words_(std::move(words)) {}

  bool allows(ValueIndex prev, ValueIndex next) const override {
    std::size_t diff = 0;
    for (std::size_t pos = 0; pos < words_->word_len(); ++pos)
      if (words_->digit(prev, pos) != words_->digit(next, pos) && ++diff > 1) return false;
    return true;
  }

  std::vector<ValueIndex> successors(ValueIndex prev) const override {
    const std::size_t a = words_->alphabet().size();
    std::vector<ValueIndex> out;
    out.reserve(1 + words_->word_len() * (a - 1));
    out.push_back(prev);
    for (std::size_t pos = 0; pos < words_->word_len(); ++pos) {
      const std::uint64_t d = words_->digit(prev, pos);
      const std::uint64_t base = prev - d * words_->place(pos);
      for (std::uint64_t c = 0; c < a; ++c)
        if (c != d) out.push_back(static_cast<ValueIndex>(base + c * words_->place(pos)));
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  // Symmetric relation.
  std::vector<ValueIndex> predecessors(ValueIndex next) const override { return successors(next); }
  bool has_successor(ValueIndex) const override { return true; }

 private:
  std::shared_ptr<const WordDomain> words_;
};

/// Atoms eq_<word>, true exactly at that word.
class WordEqualityAtoms final : public AtomTable {
 public:
  explicit WordEqualityAtoms(std::shared_ptr<const WordDomain> words) : words_(std::move(words)) {}

  bool declared(std::string_view name) const override { return word_of(name).has_value(); }

  std::optional<bool> truth(std::string_view name, ValueIndex value) const override {
    auto w = word_of(name);
    if (!w) return std::nullopt;
    return *w == value;
  }

  std::vector<std::string> names() const override {
    std::vector<std::string> out;
    out.reserve(words_->size());
    for (ValueIndex i = 0; i < words_->size(); ++i) out.push_back("eq_" + words_->label(i));
    return out;
  }

 private:
  std::optional<ValueIndex> word_of(std::string_view name) const {
    if (name.substr(0, 3) != "eq_") return std::nullopt;
    return words_->index_of(name.substr(3));
  }

  std::shared_ptr<const WordDomain> words_;
};

inline const std::string& latin_alphabet() {
  static const std::string a = "abcdefghijklmnopqrstuvwxyz";
  return a;
}

/// Telephone game on channels 0..chain_len-1: every channel carries a word of
/// word_len letters and each hop changes at most one letter.
inline ChainProtocol telephone(std::size_t word_len, const std::string& alphabet, std::size_t chain_len) {
  if (chain_len < 2) throw std::invalid_argument("chain length must be at least 2");
  auto words = std::make_shared<const WordDomain>(word_len, alphabet);
  auto atoms = std::make_shared<const WordEqualityAtoms>(words);
  auto hop = std::make_shared<const HammingNeighbors>(words);
  std::vector<ChainProtocol::ChannelData> channels(chain_len, ChainProtocol::ChannelData{words, atoms});
  std::vector<std::shared_ptr<const LocalCondition>> local(chain_len - 1, hop);
  return ChainProtocol(0, std::move(channels), std::move(local));
}

}  // namespace chainlogic
