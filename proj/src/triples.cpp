#include "wcoj/triples.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "wcoj/error.hpp"

namespace wcoj {
namespace {

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::Parse,
              "line " + std::to_string(line) + ": " + what);
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

std::string strip_term(std::string_view s) {
  if (s.size() >= 2 && ((s.front() == '<' && s.back() == '>') ||
                        (s.front() == '"' && s.back() == '"'))) {
    s = s.substr(1, s.size() - 2);
  }
  return std::string(s);
}

class LineCursor {
 public:
  LineCursor(std::string_view text, std::size_t line) : s_(text), line_(line) {}

  void skip_space() {
    while (pos_ < s_.size() && is_space(s_[pos_])) ++pos_;
  }
  bool done() const { return pos_ >= s_.size(); }
  char peek() const { return s_[pos_]; }

  // Returns false at the end-of-statement dot or the end of the line.
  bool next_term(std::string& out) {
    skip_space();
    if (done() || peek() == '#') return false;
    const char c = peek();
    if (c == '<') {
      const auto close = s_.find('>', pos_ + 1);
      if (close == std::string_view::npos) fail(line_, "unterminated IRI");
      out.assign(s_.substr(pos_ + 1, close - pos_ - 1));
      pos_ = close + 1;
    } else if (c == '"') {
      out.clear();
      std::size_t i = pos_ + 1;
      bool closed = false;
      while (i < s_.size()) {
        const char ch = s_[i];
        if (ch == '\\' && i + 1 < s_.size()) {
          const char esc = s_[i + 1];
          switch (esc) {
            case 'n': out.push_back('\n'); break;
            case 't': out.push_back('\t'); break;
            case 'r': out.push_back('\r'); break;
            default: out.push_back(esc); break;
          }
          i += 2;
          continue;
        }
        if (ch == '"') {
          closed = true;
          ++i;
          break;
        }
        out.push_back(ch);
        ++i;
      }
      if (!closed) fail(line_, "unterminated quote");
      pos_ = i;
      // Language tags and datatypes are accepted and dropped.
      if (pos_ < s_.size() && s_[pos_] == '@') {
        while (pos_ < s_.size() && !is_space(s_[pos_])) ++pos_;
      } else if (s_.substr(pos_, 3) == "^^<") {
        const auto close = s_.find('>', pos_ + 3);
        if (close == std::string_view::npos) fail(line_, "unterminated datatype");
        pos_ = close + 1;
      }
    } else {
      std::size_t end = pos_;
      while (end < s_.size() && !is_space(s_[end])) ++end;
      auto token = s_.substr(pos_, end - pos_);
      if (token == ".") return false;
      if (token.size() > 1 && token.back() == '.' && end == s_.size()) {
        token.remove_suffix(1);
        end -= 1;
      }
      out.assign(token);
      pos_ = end;
    }
    return true;
  }

  void expect_end() {
    skip_space();
    if (done() || peek() != '.') fail(line_, "expected '.' after object");
    ++pos_;
    skip_space();
    if (!done() && peek() != '#') fail(line_, "trailing characters after '.'");
  }

 private:
  std::string_view s_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

bool looks_like_iri(std::string_view term) {
  return term.find("://") != std::string_view::npos || term.starts_with("_:") ||
         term.starts_with("urn:");
}

}  // namespace

bool parse_triple_line(std::string_view line, std::size_t line_number,
                       RawTriple& out) {
  std::size_t first = 0;
  while (first < line.size() && is_space(line[first])) ++first;
  if (first == line.size() || line[first] == '#') return false;
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) {
    line.remove_suffix(1);
  }

  const char lead = line[first];
  const bool nt = lead == '<' || lead == '"' ||
                  line.find('\t') == std::string_view::npos;
  if (!nt) {
    std::array<std::string, 3> fields;
    std::size_t count = 0;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      const auto field = line.substr(
          start, tab == std::string_view::npos ? std::string_view::npos
                                               : tab - start);
      if (count == 3) fail(line_number, "expected 3 tab-separated fields");
      fields[count++] = strip_term(field);
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    if (count != 3) fail(line_number, "expected 3 tab-separated fields");
    for (const auto& f : fields) {
      if (f.empty()) fail(line_number, "empty field");
    }
    out = RawTriple{std::move(fields[0]), std::move(fields[1]),
                    std::move(fields[2])};
    return true;
  }

  LineCursor cursor(line, line_number);
  std::array<std::string, 3> terms;
  for (std::size_t i = 0; i < 3; ++i) {
    if (!cursor.next_term(terms[i])) {
      fail(line_number, "expected 3 terms, found " + std::to_string(i));
    }
    if (terms[i].empty()) fail(line_number, "empty term");
  }
  cursor.expect_end();
  out = RawTriple{std::move(terms[0]), std::move(terms[1]), std::move(terms[2])};
  return true;
}

void for_each_triple(std::istream& in,
                     const std::function<void(RawTriple&&)>& sink) {
  std::string line;
  std::size_t number = 0;
  RawTriple triple;
  while (std::getline(in, line)) {
    ++number;
    if (parse_triple_line(line, number, triple)) sink(std::move(triple));
  }
}

std::vector<RawTriple> parse_triples(std::istream& in) {
  std::vector<RawTriple> out;
  for_each_triple(in, [&](RawTriple&& t) { out.push_back(std::move(t)); });
  return out;
}

void write_triple(std::ostream& out, const RawTriple& t) {
  auto iri = [&](const std::string& s) { out << '<' << s << '>'; };
  iri(t.subject);
  out << ' ';
  iri(t.predicate);
  out << ' ';
  if (looks_like_iri(t.object)) {
    iri(t.object);
  } else {
    out << '"';
    for (char c : t.object) {
      if (c == '"' || c == '\\') out << '\\';
      out << c;
    }
    out << '"';
  }
  out << " .\n";
}

const Relation* PartitionedDatabase::find(Key predicate) const {
  auto it = relations.find(predicate);
  return it == relations.end() ? nullptr : &it->second;
}

const Relation* PartitionedDatabase::find(std::string_view term) const {
  const auto key = dictionary.lookup(term);
  return key ? find(*key) : nullptr;
}

std::string PartitionedDatabase::stats_tsv() const {
  std::vector<std::pair<std::string, std::size_t>> rows;
  rows.reserve(relations.size());
  for (const auto& [pred, rel] : relations) {
    rows.emplace_back(dictionary.decode(pred), rel.size());
  }
  std::sort(rows.begin(), rows.end());
  std::ostringstream os;
  for (const auto& [name, count] : rows) os << name << '\t' << count << '\n';
  return os.str();
}

PartitionedDatabase vertical_partition(std::span<const RawTriple> triples,
                                       Dictionary dictionary) {
  PartitionedDatabase db{std::move(dictionary), {}, 0};
  for (const auto& t : triples) {
    const Key s = db.dictionary.encode(t.subject);
    const Key p = db.dictionary.encode(t.predicate);
    const Key o = db.dictionary.encode(t.object);
    db.relations[p].pairs.emplace_back(s, o);
    ++db.triple_count;
  }
  for (auto& [pred, rel] : db.relations) {
    std::sort(rel.pairs.begin(), rel.pairs.end());
    rel.pairs.erase(std::unique(rel.pairs.begin(), rel.pairs.end()),
                    rel.pairs.end());
  }
  return db;
}

PartitionedDatabase load_triples_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  const auto triples = parse_triples(in);
  return vertical_partition(triples);
}

namespace {

constexpr char kSnapshotMagic[8] = {'W', 'C', 'O', 'J', 'S', 'N', 'P', '1'};

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!is) throw Error(ErrorCode::Io, "truncated snapshot");
  return v;
}

}  // namespace

void save_snapshot(const PartitionedDatabase& db,
                   const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::Io, "cannot write " + path.string());
  os.write(kSnapshotMagic, sizeof(kSnapshotMagic));
  put<std::uint64_t>(os, db.triple_count);
  put<std::uint64_t>(os, db.dictionary.size());
  for (const auto& term : db.dictionary.terms()) {
    put<std::uint32_t>(os, static_cast<std::uint32_t>(term.size()));
    os.write(term.data(), static_cast<std::streamsize>(term.size()));
  }
  put<std::uint64_t>(os, db.relations.size());
  for (const auto& [pred, rel] : db.relations) {
    put<Key>(os, pred);
    put<std::uint64_t>(os, rel.pairs.size());
    for (const auto& [s, o] : rel.pairs) {
      put<Key>(os, s);
      put<Key>(os, o);
    }
  }
  if (!os) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

bool is_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  char magic[sizeof(kSnapshotMagic)] = {};
  is.read(magic, sizeof(magic));
  return is && std::memcmp(magic, kSnapshotMagic, sizeof(magic)) == 0;
}

PartitionedDatabase load_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::Io, "cannot open " + path.string());
  char magic[sizeof(kSnapshotMagic)] = {};
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kSnapshotMagic, sizeof(magic)) != 0) {
    throw Error(ErrorCode::Io, path.string() + " is not a snapshot");
  }
  PartitionedDatabase db;
  db.triple_count = get<std::uint64_t>(is);
  const auto terms = get<std::uint64_t>(is);
  std::string term;
  for (std::uint64_t i = 0; i < terms; ++i) {
    const auto len = get<std::uint32_t>(is);
    term.resize(len);
    is.read(term.data(), len);
    if (!is) throw Error(ErrorCode::Io, "truncated snapshot");
    db.dictionary.encode(term);
  }
  const auto rels = get<std::uint64_t>(is);
  for (std::uint64_t r = 0; r < rels; ++r) {
    const Key pred = get<Key>(is);
    auto& rel = db.relations[pred];
    const auto n = get<std::uint64_t>(is);
    rel.pairs.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
      const Key s = get<Key>(is);
      const Key o = get<Key>(is);
      rel.pairs.emplace_back(s, o);
    }
  }
  return db;
}

PartitionedDatabase load_database(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::Io, "no such file: " + path.string());
  }
  return is_snapshot(path) ? load_snapshot(path) : load_triples_file(path);
}

}  // namespace wcoj
