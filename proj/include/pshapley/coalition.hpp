#ifndef PSHAPLEY_COALITION_HPP
#define PSHAPLEY_COALITION_HPP

#include "pshapley/types.hpp"

#include <bit>
#include <cstdint>
#include <functional>
#include <vector>

namespace pshapley {

// A subset of player positions {0, ..., n-1} stored as a bitset. Equal sets
// compare and hash equal regardless of insertion order.
class Coalition {
 public:
  Coalition() = default;
  explicit Coalition(Index players)
      : players_(players), words_(static_cast<std::size_t>((players + 63) / 64), 0) {}

  static Coalition full(Index players) {
    Coalition c(players);
    for (Index i = 0; i < players; ++i) c.insert(i);
    return c;
  }
  static Coalition from_mask(Index players, std::uint64_t mask) {
    Coalition c(players);
    if (players > 0) c.words_[0] = mask;
    return c;
  }

  Index players() const { return players_; }

  void insert(Index i) { words_[word(i)] |= bit(i); }
  void erase(Index i) { words_[word(i)] &= ~bit(i); }
  bool contains(Index i) const { return (words_[word(i)] & bit(i)) != 0; }

  Index count() const {
    Index total = 0;
    for (auto w : words_) total += std::popcount(w);
    return total;
  }
  bool empty() const { return count() == 0; }

  // Member positions in ascending order.
  std::vector<Index> members() const {
    std::vector<Index> out;
    out.reserve(static_cast<std::size_t>(count()));
    for (std::size_t k = 0; k < words_.size(); ++k) {
      std::uint64_t w = words_[k];
      while (w != 0) {
        out.push_back(static_cast<Index>(k * 64) + std::countr_zero(w));
        w &= w - 1;
      }
    }
    return out;
  }

  std::size_t hash() const noexcept {
    std::uint64_t h = 0x84222325cbf29ce4ULL ^ static_cast<std::uint64_t>(players_);
    for (auto w : words_) {
      h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }

  friend bool operator==(const Coalition&, const Coalition&) = default;

 private:
  static std::size_t word(Index i) { return static_cast<std::size_t>(i) / 64; }
  static std::uint64_t bit(Index i) { return std::uint64_t{1} << (static_cast<unsigned>(i) % 64); }

  Index players_ = 0;
  std::vector<std::uint64_t> words_;
};

struct CoalitionHash {
  std::size_t operator()(const Coalition& c) const noexcept { return c.hash(); }
};

}  // namespace pshapley

#endif  // PSHAPLEY_COALITION_HPP
