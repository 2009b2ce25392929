#include "wcoj/dictionary.hpp"

#include "wcoj/error.hpp"

namespace wcoj {

Dictionary::Dictionary(std::uint64_t capacity)
    : capacity_(capacity > kMaxCapacity ? kMaxCapacity : capacity) {}

Key Dictionary::encode(std::string_view term) {
  if (auto it = forward_.find(term); it != forward_.end()) return it->second;
  if (reverse_.size() >= capacity_) {
    throw Error(ErrorCode::Capacity,
                "dictionary capacity exceeded (" + std::to_string(capacity_) +
                    " terms)");
  }
  const auto key = static_cast<Key>(reverse_.size());
  reverse_.emplace_back(term);
  forward_.emplace(reverse_.back(), key);
  return key;
}

std::optional<Key> Dictionary::lookup(std::string_view term) const {
  if (auto it = forward_.find(term); it != forward_.end()) return it->second;
  return std::nullopt;
}

const std::string& Dictionary::decode(Key key) const {
  if (key >= reverse_.size()) {
    throw Error(ErrorCode::UnknownKey, "unknown key " + std::to_string(key));
  }
  return reverse_[key];
}

}  // namespace wcoj
