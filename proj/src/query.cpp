#include "wcoj/query.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "wcoj/error.hpp"

namespace wcoj {
namespace {

constexpr std::string_view kRdfType = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

struct Token {
  enum class Kind { End, Word, Iri, Variable, Literal, LBrace, RBrace, Dot, Star };
  Kind kind = Kind::End;
  std::string text;
  std::size_t line = 1;
  std::size_t column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view s) : s_(s) {}

  Token next() {
    skip();
    Token t;
    t.line = line_;
    t.column = col_;
    if (pos_ >= s_.size()) return t;
    const char c = s_[pos_];
    if (c == '{' || c == '}' || c == '.' || c == '*') {
      t.kind = c == '{'   ? Token::Kind::LBrace
               : c == '}' ? Token::Kind::RBrace
               : c == '.' ? Token::Kind::Dot
                          : Token::Kind::Star;
      advance();
      return t;
    }
    if (c == '<') {
      advance();
      while (pos_ < s_.size() && s_[pos_] != '>') {
        if (s_[pos_] == '\n') error(t, "unterminated IRI");
        t.text.push_back(s_[pos_]);
        advance();
      }
      if (pos_ >= s_.size()) error(t, "unterminated IRI");
      advance();
      t.kind = Token::Kind::Iri;
      return t;
    }
    if (c == '"') {
      advance();
      bool closed = false;
      while (pos_ < s_.size()) {
        const char ch = s_[pos_];
        if (ch == '\\' && pos_ + 1 < s_.size()) {
          advance();
          t.text.push_back(s_[pos_]);
          advance();
          continue;
        }
        advance();
        if (ch == '"') {
          closed = true;
          break;
        }
        t.text.push_back(ch);
      }
      if (!closed) error(t, "unterminated literal");
      t.kind = Token::Kind::Literal;
      return t;
    }
    if (c == '?' || c == '$') {
      advance();
      while (pos_ < s_.size() && is_name_char(s_[pos_])) {
        t.text.push_back(s_[pos_]);
        advance();
      }
      if (t.text.empty()) error(t, "empty variable name");
      t.kind = Token::Kind::Variable;
      return t;
    }
    if (is_name_char(c) || c == ':') {
      while (pos_ < s_.size() && (is_name_char(s_[pos_]) || s_[pos_] == ':' ||
                                  s_[pos_] == '-' || s_[pos_] == '.')) {
        // A trailing dot ends the statement rather than the name.
        if (s_[pos_] == '.' && (pos_ + 1 >= s_.size() || !is_name_char(s_[pos_ + 1]))) break;
        t.text.push_back(s_[pos_]);
        advance();
      }
      t.kind = Token::Kind::Word;
      return t;
    }
    error(t, std::string("unexpected character '") + c + "'");
  }

  [[noreturn]] static void error(const Token& at, const std::string& what) {
    throw Error(ErrorCode::Parse, "syntax error at " + std::to_string(at.line) + ":" +
                                      std::to_string(at.column) + ": " + what);
  }

 private:
  static bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  }

  void advance() {
    if (s_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip() {
    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '#') {
        while (pos_ < s_.size() && s_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

class Parser {
 public:
  explicit Parser(std::string_view text) : lex_(text) { bump(); }

  ParsedQuery parse() {
    ParsedQuery q;
    while (tok_.kind == Token::Kind::Word && iequals(tok_.text, "PREFIX")) {
      bump();
      if (tok_.kind != Token::Kind::Word || tok_.text.empty() || tok_.text.back() != ':') {
        Lexer::error(tok_, "expected prefix name ending in ':'");
      }
      std::string name = tok_.text.substr(0, tok_.text.size() - 1);
      bump();
      if (tok_.kind != Token::Kind::Iri) Lexer::error(tok_, "expected <iri> after prefix name");
      q.prefixes.emplace_back(std::move(name), tok_.text);
      bump();
    }
    if (tok_.kind != Token::Kind::Word || !iequals(tok_.text, "SELECT")) {
      Lexer::error(tok_, "expected SELECT");
    }
    bump();
    bool star = false;
    if (tok_.kind == Token::Kind::Star) {
      star = true;
      bump();
    } else {
      while (tok_.kind == Token::Kind::Variable) {
        q.select.push_back(tok_.text);
        bump();
      }
      if (q.select.empty()) Lexer::error(tok_, "expected variables or '*' after SELECT");
    }
    if (tok_.kind == Token::Kind::Word && iequals(tok_.text, "WHERE")) bump();
    if (tok_.kind != Token::Kind::LBrace) Lexer::error(tok_, "expected '{'");
    bump();
    while (true) {
      q.patterns.push_back(parse_pattern(q));
      if (tok_.kind == Token::Kind::Dot) bump();
      if (tok_.kind == Token::Kind::RBrace) break;
    }
    bump();
    if (tok_.kind != Token::Kind::End) Lexer::error(tok_, "unexpected input after '}'");

    std::vector<std::string> seen;
    for (const auto& p : q.patterns) {
      for (const Term* t : {&p.subject, &p.object}) {
        if (t->is_variable() && std::find(seen.begin(), seen.end(), t->value) == seen.end()) {
          seen.push_back(t->value);
        }
      }
    }
    if (star) {
      q.select = seen;
    } else {
      for (const auto& v : q.select) {
        if (std::find(seen.begin(), seen.end(), v) == seen.end()) {
          throw Error(ErrorCode::Parse, "selected variable ?" + v + " does not appear in WHERE");
        }
      }
    }
    return q;
  }

 private:
  void bump() { tok_ = lex_.next(); }

  TriplePattern parse_pattern(const ParsedQuery& q) {
    TriplePattern p;
    p.subject = parse_term(q, false);
    const Token pred_tok = tok_;
    p.predicate = parse_term(q, true);
    if (p.predicate.is_variable()) {
      throw Error(ErrorCode::Unsupported,
                  "variable predicate ?" + p.predicate.value + " at " +
                      std::to_string(pred_tok.line) + ":" + std::to_string(pred_tok.column) +
                      " is not supported");
    }
    p.object = parse_term(q, false);
    return p;
  }

  Term parse_term(const ParsedQuery& q, bool predicate_position) {
    Term t;
    switch (tok_.kind) {
      case Token::Kind::Variable:
        t = {Term::Kind::Variable, tok_.text};
        break;
      case Token::Kind::Iri:
        t = {Term::Kind::Iri, tok_.text};
        break;
      case Token::Kind::Literal:
        t = {Term::Kind::Literal, tok_.text};
        break;
      case Token::Kind::Word: {
        if (predicate_position && tok_.text == "a") {
          t = {Term::Kind::Iri, std::string(kRdfType)};
          break;
        }
        const auto colon = tok_.text.find(':');
        if (colon == std::string::npos) Lexer::error(tok_, "expected a term, got '" + tok_.text + "'");
        const auto prefix = tok_.text.substr(0, colon);
        auto it = std::find_if(q.prefixes.begin(), q.prefixes.end(),
                               [&](const auto& kv) { return kv.first == prefix; });
        if (it == q.prefixes.end()) {
          throw Error(ErrorCode::UnresolvedPrefix,
                      "unresolved prefix '" + prefix + ":' at " + std::to_string(tok_.line) +
                          ":" + std::to_string(tok_.column));
        }
        t = {Term::Kind::Iri, it->second + tok_.text.substr(colon + 1)};
        break;
      }
      default:
        Lexer::error(tok_, "expected a term");
    }
    bump();
    return t;
  }

  Lexer lex_;
  Token tok_;
};

std::string render_term(const Term& t) {
  switch (t.kind) {
    case Term::Kind::Variable:
      return "?" + t.value;
    case Term::Kind::Iri:
      return "<" + t.value + ">";
    case Term::Kind::Literal: {
      std::string s = "\"";
      for (char c : t.value) {
        if (c == '"' || c == '\\') s.push_back('\\');
        s.push_back(c);
      }
      return s + "\"";
    }
  }
  return {};
}

// Names for selected vertices: a, b, ..., z, a1, b1, ... skipping variable
// names already used by the query.
class SelectionNamer {
 public:
  explicit SelectionNamer(const ParsedQuery& q) {
    for (const auto& p : q.patterns) {
      for (const Term* t : {&p.subject, &p.object}) {
        if (t->is_variable()) taken_.insert(t->value);
      }
    }
  }

  std::string next() {
    while (true) {
      std::string name(1, static_cast<char>('a' + counter_ % 26));
      if (counter_ >= 26) name += std::to_string(counter_ / 26);
      ++counter_;
      if (taken_.insert(name).second) return name;
    }
  }

 private:
  std::set<std::string> taken_;
  std::size_t counter_ = 0;
};

ConjunctiveQuery translate(const ParsedQuery& q, const PartitionedDatabase& db,
                           bool strict_predicates) {
  ConjunctiveQuery cq;
  auto& g = cq.graph;
  SelectionNamer namer(q);
  auto mark_empty = [&](std::string reason) {
    if (!cq.empty) {
      cq.empty = true;
      cq.empty_reason = std::move(reason);
    }
  };

  for (const auto& p : q.patterns) {
    const auto pred = db.dictionary.lookup(p.predicate.value);
    const Relation* rel = pred ? db.find(*pred) : nullptr;
    if (!rel) {
      if (strict_predicates) {
        throw Error(ErrorCode::UnknownPredicate, "unknown predicate <" + p.predicate.value + ">");
      }
      mark_empty("predicate <" + p.predicate.value + "> has no triples");
    }

    if (!p.subject.is_variable() && !p.object.is_variable()) {
      const auto s = db.dictionary.lookup(p.subject.value);
      const auto o = db.dictionary.lookup(p.object.value);
      if (!s || !o) {
        mark_empty("constant not present in the data");
      } else if (pred) {
        cq.checks.push_back({*pred, *s, *o});
      }
      continue;
    }

    HyperEdge e;
    e.relation = p.predicate.value;
    e.predicate = pred.value_or(0);
    auto vertex_for = [&](const Term& t) -> VertexId {
      if (t.is_variable()) {
        if (auto v = g.find_vertex(t.value); v && !g.selected[*v]) return *v;
        return g.add_vertex(t.value);
      }
      const VertexId v = g.add_vertex(namer.next(), true);
      const auto key = db.dictionary.lookup(t.value);
      if (!key) mark_empty("constant <" + t.value + "> not present in the data");
      e.selections.push_back({v, key.value_or(0)});
      return v;
    };
    const VertexId s = vertex_for(p.subject);
    const VertexId o = vertex_for(p.object);
    if (s == o) {
      e.shape = EdgeShape::Diagonal;
      e.attributes = {s};
      std::size_t n = 0;
      if (rel) {
        for (const auto& [a, b] : rel->pairs) n += a == b;
      }
      e.cardinality = static_cast<double>(n);
    } else {
      e.attributes = {s, o};
      e.cardinality = rel ? static_cast<double>(rel->size()) : 0.0;
    }
    g.edges.push_back(std::move(e));
  }

  for (const auto& name : q.select) {
    const auto v = g.find_vertex(name);
    if (!v) throw Error(ErrorCode::Parse, "selected variable ?" + name + " is not bound");
    cq.output.push_back(*v);
  }
  return cq;
}

}  // namespace

ParsedQuery parse_query(std::string_view text) { return Parser(text).parse(); }

std::string render_query(const ParsedQuery& q) {
  std::ostringstream os;
  for (const auto& [name, iri] : q.prefixes) os << "PREFIX " << name << ": <" << iri << ">\n";
  os << "SELECT";
  for (const auto& v : q.select) os << " ?" << v;
  os << "\nWHERE {\n";
  for (std::size_t i = 0; i < q.patterns.size(); ++i) {
    const auto& p = q.patterns[i];
    os << "  " << render_term(p.subject) << ' ' << render_term(p.predicate) << ' '
       << render_term(p.object) << (i + 1 < q.patterns.size() ? " .\n" : "\n");
  }
  os << "}\n";
  return os.str();
}

ConjunctiveQuery to_conjunctive(const ParsedQuery& query, const PartitionedDatabase& db) {
  return translate(query, db, false);
}

Hypergraph query_to_hypergraph(const ParsedQuery& query, const PartitionedDatabase& db) {
  return translate(query, db, true).graph;
}

std::string short_name(std::string_view term) {
  auto cut = term.find_last_of("#/");
  if (cut == std::string_view::npos || cut + 1 >= term.size()) return std::string(term);
  return std::string(term.substr(cut + 1));
}

}  // namespace wcoj
