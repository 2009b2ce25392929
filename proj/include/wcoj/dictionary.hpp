#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace wcoj {

using Key = std::uint32_t;

/// Bidirectional map between terms and dense 32-bit keys.
///
/// Keys are handed out in first-seen order starting at 0, so the assigned
/// keys always form the range [0, size()). The capacity defaults to the full
/// 32-bit key space; a smaller capacity can be requested for testing.
class Dictionary {
 public:
  static constexpr std::uint64_t kMaxCapacity = std::uint64_t{1} << 32;

  explicit Dictionary(std::uint64_t capacity = kMaxCapacity);

  Key encode(std::string_view term);
  std::optional<Key> lookup(std::string_view term) const;
  const std::string& decode(Key key) const;

  std::uint64_t size() const noexcept { return reverse_.size(); }
  std::uint64_t capacity() const noexcept { return capacity_; }
  const std::vector<std::string>& terms() const noexcept { return reverse_; }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };

  std::uint64_t capacity_;
  std::unordered_map<std::string, Key, Hash, std::equal_to<>> forward_;
  std::vector<std::string> reverse_;
};

}  // namespace wcoj
