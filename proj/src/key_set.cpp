#include "wcoj/key_set.hpp"

#include <algorithm>

namespace wcoj {

SetLayout choose_layout(std::span<const Key> values, const LayoutPolicy& policy) {
  if (values.empty()) return SetLayout::UintArray;
  switch (policy.mode) {
    case LayoutMode::Uint:
      return SetLayout::UintArray;
    case LayoutMode::Bitset:
      return SetLayout::Bitset;
    case LayoutMode::Auto:
      break;
  }
  if (values.size() == 1) return SetLayout::UintArray;
  const std::uint64_t range =
      std::uint64_t{values.back()} - std::uint64_t{values.front()} + 1;
  // |S| / range > num / den, without division.
  return std::uint64_t{values.size()} * policy.density_den >
                 range * policy.density_num
             ? SetLayout::Bitset
             : SetLayout::UintArray;
}

KeySet KeySet::from_sorted(std::span<const Key> values, const LayoutPolicy& policy) {
  return with_layout(values, choose_layout(values, policy));
}

KeySet KeySet::with_layout(std::span<const Key> values, SetLayout layout) {
  KeySet s;
  s.layout_ = values.empty() ? SetLayout::UintArray : layout;
  s.size_ = static_cast<std::uint32_t>(values.size());
  if (values.empty()) return s;
  s.min_ = values.front();
  s.max_ = values.back();
  if (s.layout_ == SetLayout::UintArray) {
    s.values_.assign(values.begin(), values.end());
    return s;
  }
  s.offset_ = s.min_ - s.min_ % kWordBits;
  const std::size_t nwords = (s.max_ - s.offset_) / kWordBits + 1;
  s.words_.assign(nwords, 0);
  for (Key v : values) {
    const Key rel = v - s.offset_;
    s.words_[rel / kWordBits] |= std::uint64_t{1} << (rel % kWordBits);
  }
  s.word_ranks_.resize(nwords);
  std::uint32_t running = 0;
  for (std::size_t w = 0; w < nwords; ++w) {
    s.word_ranks_[w] = running;
    running += static_cast<std::uint32_t>(std::popcount(s.words_[w]));
  }
  return s;
}

bool KeySet::contains(Key value, ProbeCounter* counter) const {
  if (layout_ == SetLayout::Bitset) {
    if (size_ == 0 || value < offset_ || value > max_) return false;
    if (counter) ++counter->words_touched;
    const Key rel = value - offset_;
    return (words_[rel / kWordBits] >> (rel % kWordBits)) & 1u;
  }
  std::size_t lo = 0;
  std::size_t hi = values_.size();
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (counter) ++counter->comparisons;
    if (values_[mid] < value) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  return lo < values_.size() && values_[lo] == value;
}

std::optional<std::uint32_t> KeySet::rank(Key value) const {
  if (size_ == 0) return std::nullopt;
  if (layout_ == SetLayout::UintArray) {
    auto it = std::lower_bound(values_.begin(), values_.end(), value);
    if (it == values_.end() || *it != value) return std::nullopt;
    return static_cast<std::uint32_t>(it - values_.begin());
  }
  if (value < offset_ || value > max_) return std::nullopt;
  const Key rel = value - offset_;
  const std::uint64_t word = words_[rel / kWordBits];
  const unsigned bit = rel % kWordBits;
  if (((word >> bit) & 1u) == 0) return std::nullopt;
  const std::uint64_t below = bit == 0 ? 0 : (word & ((std::uint64_t{1} << bit) - 1));
  return word_ranks_[rel / kWordBits] +
         static_cast<std::uint32_t>(std::popcount(below));
}

std::vector<Key> KeySet::to_vector() const {
  if (layout_ == SetLayout::UintArray) return values_;
  std::vector<Key> out;
  out.reserve(size_);
  for_each([&](Key v) { out.push_back(v); });
  return out;
}

bool operator==(const KeySet& a, const KeySet& b) {
  if (a.size_ != b.size_) return false;
  if (a.size_ == 0) return true;
  if (a.min_ != b.min_ || a.max_ != b.max_) return false;
  if (a.layout_ == b.layout_) {
    return a.layout_ == SetLayout::UintArray ? a.values_ == b.values_
                                             : a.words_ == b.words_;
  }
  return a.to_vector() == b.to_vector();
}

namespace {

void intersect_arrays(std::span<const Key> a, std::span<const Key> b,
                      std::vector<Key>& out) {
  if (a.size() > b.size()) std::swap(a, b);
  // Galloping pays off once the sizes are far apart.
  if (a.size() * 32 < b.size()) {
    auto first = b.begin();
    for (Key v : a) {
      first = std::lower_bound(first, b.end(), v);
      if (first == b.end()) break;
      if (*first == v) out.push_back(v);
    }
    return;
  }
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
}

void intersect_bitsets(const KeySet& a, const KeySet& b, std::vector<Key>& out) {
  const Key lo = std::max(a.offset(), b.offset());
  const std::uint64_t a_end = a.offset() + std::uint64_t{a.words().size()} * KeySet::kWordBits;
  const std::uint64_t b_end = b.offset() + std::uint64_t{b.words().size()} * KeySet::kWordBits;
  const std::uint64_t hi = std::min(a_end, b_end);
  for (std::uint64_t base = lo; base < hi; base += KeySet::kWordBits) {
    std::uint64_t bits = a.words()[(base - a.offset()) / KeySet::kWordBits] &
                         b.words()[(base - b.offset()) / KeySet::kWordBits];
    while (bits != 0) {
      out.push_back(static_cast<Key>(base + static_cast<unsigned>(std::countr_zero(bits))));
      bits &= bits - 1;
    }
  }
}

}  // namespace

void intersect_into(const KeySet& a, const KeySet& b, std::vector<Key>& out) {
  out.clear();
  if (a.empty() || b.empty() || a.max() < b.min() || b.max() < a.min()) return;
  const bool a_arr = a.layout() == SetLayout::UintArray;
  const bool b_arr = b.layout() == SetLayout::UintArray;
  if (a_arr && b_arr) {
    intersect_arrays(a.array(), b.array(), out);
    return;
  }
  if (!a_arr && !b_arr) {
    intersect_bitsets(a, b, out);
    return;
  }
  // Mixed layouts: probe the smaller side into the other; on a tie the array
  // side is the one that probes.
  const KeySet* probe = &a;
  const KeySet* target = &b;
  if (b.size() < a.size() || (b.size() == a.size() && b_arr)) std::swap(probe, target);
  probe->for_each([&](Key v) {
    if (target->contains(v)) out.push_back(v);
  });
}

KeySet set_intersect(const KeySet& a, const KeySet& b, const LayoutPolicy& policy) {
  std::vector<Key> out;
  intersect_into(a, b, out);
  return KeySet::from_sorted(out, policy);
}

void filter_in_place(std::vector<Key>& values, const KeySet& set) {
  std::erase_if(values, [&](Key v) { return !set.contains(v); });
}

}  // namespace wcoj
