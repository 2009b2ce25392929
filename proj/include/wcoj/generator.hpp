#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string_view>
#include <vector>

#include "wcoj/triples.hpp"

namespace wcoj {

enum class DatasetKind { LubmLike, AdversarialTriangle, UniformRandom };

std::optional<DatasetKind> parse_dataset_kind(std::string_view name);
std::string_view dataset_kind_name(DatasetKind kind);

inline constexpr std::string_view kRdfTypeIri = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
inline constexpr std::string_view kUbPrefix = "http://www.lehigh.edu/~zhp2/2004/0401/univ-bench.owl#";
inline constexpr std::string_view kAdversarialPrefix = "http://example.org/adversarial/";

struct UniformVocabulary {
  std::uint64_t subjects = 0;    // 0 means max(1, n / 10)
  std::uint64_t predicates = 8;
  std::uint64_t objects = 0;     // 0 means max(1, n / 10)
};

/// University-shaped data: whole departments are emitted until at least
/// `n` triples exist, so every query in queries/lubm has answers.
std::vector<RawTriple> generate_lubm_like(std::uint64_t n, std::uint64_t seed);

/// Predicates p, q, r, each {(s_i, h)} for i < n/2 and {(h, t_j)} for the
/// remaining n - n/2 values of j. No triangles; pairwise plans blow up.
std::vector<RawTriple> generate_adversarial_triangle(std::uint64_t n);

/// Exactly n triples drawn uniformly (duplicates possible).
std::vector<RawTriple> generate_uniform_random(std::uint64_t n, std::uint64_t seed,
                                               const UniformVocabulary& vocab = {});

std::vector<RawTriple> generate(DatasetKind kind, std::uint64_t n, std::uint64_t seed);

/// Writes one triple per line in N-Triples form.
void write_triples(std::ostream& out, const std::vector<RawTriple>& triples);

}  // namespace wcoj
