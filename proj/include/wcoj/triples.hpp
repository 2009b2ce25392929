#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wcoj/dictionary.hpp"

namespace wcoj {

struct RawTriple {
  std::string subject;
  std::string predicate;
  std::string object;

  friend bool operator==(const RawTriple&, const RawTriple&) = default;
  friend auto operator<=>(const RawTriple&, const RawTriple&) = default;
};

/// Reads `<s> <p> <o> .` lines (objects may be quoted literals) or
/// tab-separated `s<TAB>p<TAB>o` lines. Blank lines and `#` comments are
/// skipped. Throws Error(Parse) naming the offending line number.
std::vector<RawTriple> parse_triples(std::istream& in);
void for_each_triple(std::istream& in,
                     const std::function<void(RawTriple&&)>& sink);

/// Parses a single line; returns false for blank/comment lines.
bool parse_triple_line(std::string_view line, std::size_t line_number,
                       RawTriple& out);

/// Writes one triple in N-Triples form. Terms that look like literals are
/// quoted; everything else goes in angle brackets.
void write_triple(std::ostream& out, const RawTriple& triple);

/// A binary (subject, object) relation. Pairs are sorted and distinct.
struct Relation {
  std::vector<std::pair<Key, Key>> pairs;

  std::size_t size() const noexcept { return pairs.size(); }
};

/// One relation per predicate, all sharing one dictionary.
struct PartitionedDatabase {
  Dictionary dictionary;
  std::map<Key, Relation> relations;
  std::uint64_t triple_count = 0;

  const Relation* find(Key predicate) const;
  const Relation* find(std::string_view predicate_term) const;

  /// `predicate<TAB>cardinality` lines ordered by predicate term.
  std::string stats_tsv() const;
};

PartitionedDatabase vertical_partition(std::span<const RawTriple> triples,
                                       Dictionary dictionary = Dictionary{});

PartitionedDatabase load_triples_file(const std::filesystem::path& path);

// Binary snapshot of a partitioned database. The format is private to this
// library; it only needs to round-trip.
void save_snapshot(const PartitionedDatabase& db,
                   const std::filesystem::path& path);
PartitionedDatabase load_snapshot(const std::filesystem::path& path);
bool is_snapshot(const std::filesystem::path& path);

/// Loads either a snapshot or a triple file, detected from the file header.
PartitionedDatabase load_database(const std::filesystem::path& path);

}  // namespace wcoj
