#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "wcoj/dictionary.hpp"

namespace wcoj {

enum class SetLayout : std::uint8_t { UintArray, Bitset };

/// `Auto` applies the density rule; the other two force one layout for
/// every set (used for layout ablations).
enum class LayoutMode : std::uint8_t { Auto, Uint, Bitset };

struct LayoutPolicy {
  LayoutMode mode = LayoutMode::Auto;
  // A set goes to BITSET when cardinality / range > num / den.
  std::uint64_t density_num = 1;
  std::uint64_t density_den = 256;
};

/// Counts work done by membership probes.
struct ProbeCounter {
  std::uint64_t comparisons = 0;
  std::uint64_t words_touched = 0;
};

/// Picks the layout for a sorted, duplicate-free set. Singletons stay arrays
/// under `Auto`.
SetLayout choose_layout(std::span<const Key> sorted_values,
                        const LayoutPolicy& policy = {});

/// A set of 32-bit keys stored either as a sorted array or as an
/// offset-based bitset of 64-bit words.
class KeySet {
 public:
  static constexpr std::uint32_t kWordBits = 64;

  KeySet() = default;

  static KeySet from_sorted(std::span<const Key> sorted_values,
                            const LayoutPolicy& policy = {});
  static KeySet with_layout(std::span<const Key> sorted_values,
                            SetLayout layout);

  SetLayout layout() const noexcept { return layout_; }
  std::uint32_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }
  Key min() const noexcept { return min_; }
  Key max() const noexcept { return max_; }

  bool contains(Key value, ProbeCounter* counter = nullptr) const;

  /// Position of `value` in ascending order, if present.
  std::optional<std::uint32_t> rank(Key value) const;

  /// Calls f(value) in ascending order.
  template <class F>
  void for_each(F&& f) const {
    if (layout_ == SetLayout::UintArray) {
      for (Key v : values_) f(v);
      return;
    }
    for (std::size_t w = 0; w < words_.size(); ++w) {
      std::uint64_t bits = words_[w];
      while (bits != 0) {
        const int bit = std::countr_zero(bits);
        f(static_cast<Key>(offset_ + w * kWordBits + static_cast<unsigned>(bit)));
        bits &= bits - 1;
      }
    }
  }

  std::vector<Key> to_vector() const;

  // Layout internals, exposed for the intersection kernels and tests.
  std::span<const Key> array() const noexcept { return values_; }
  std::span<const std::uint64_t> words() const noexcept { return words_; }
  Key offset() const noexcept { return offset_; }

  /// Abstract set equality; layouts may differ.
  friend bool operator==(const KeySet& a, const KeySet& b);

 private:
  SetLayout layout_ = SetLayout::UintArray;
  std::uint32_t size_ = 0;
  Key min_ = 0;
  Key max_ = 0;
  std::vector<Key> values_;
  Key offset_ = 0;
  std::vector<std::uint64_t> words_;
  std::vector<std::uint32_t> word_ranks_;  // popcount of all words before w
};

/// Exact intersection; the result layout follows `policy`.
KeySet set_intersect(const KeySet& a, const KeySet& b,
                     const LayoutPolicy& policy = {});

/// Writes the ascending intersection into `out` (cleared first).
void intersect_into(const KeySet& a, const KeySet& b, std::vector<Key>& out);

/// Keeps only the elements of `values` that are members of `set`.
void filter_in_place(std::vector<Key>& values, const KeySet& set);

}  // namespace wcoj
