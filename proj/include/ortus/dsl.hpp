#pragma once

// Lexer, parser, validator and pretty-printer for `.ort` network descriptions.
//
//   element <ident> { type: <sensory|interneuron|motor|muscle|emotion>
//                     [affect: <positive|negative|neutral>]
//                     [threshold: <decimal>] }
//   relationship { [+|-]<ident> causes [+|-]<ident> [mutability: d] [weight: d]
//                  [polarity: <excitatory|inhibitory>] }
//   relationship { <ident> correlated|opposes|dominates <ident> [weight: d] }
//
// All element blocks come before all relationship blocks.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ortus/error.hpp"
#include "ortus/format.hpp"

namespace ortus {

enum class ElementKind { Sensory, Interneuron, Motor, Muscle, Emotion };
enum class Affect { Positive, Negative, Neutral };
enum class RelationKind { Causes, Correlated, Opposes, Dominates };
enum class Sign { Plus, Minus };
enum class Polarity { Excitatory, Inhibitory };

inline std::string_view to_string(ElementKind k) {
  switch (k) {
    case ElementKind::Sensory: return "sensory";
    case ElementKind::Interneuron: return "interneuron";
    case ElementKind::Motor: return "motor";
    case ElementKind::Muscle: return "muscle";
    case ElementKind::Emotion: return "emotion";
  }
  return "?";
}

inline std::string_view to_string(Affect a) {
  switch (a) {
    case Affect::Positive: return "positive";
    case Affect::Negative: return "negative";
    case Affect::Neutral: return "neutral";
  }
  return "?";
}

inline std::string_view to_string(RelationKind k) {
  switch (k) {
    case RelationKind::Causes: return "causes";
    case RelationKind::Correlated: return "correlated";
    case RelationKind::Opposes: return "opposes";
    case RelationKind::Dominates: return "dominates";
  }
  return "?";
}

inline std::string_view to_string(Polarity p) {
  return p == Polarity::Excitatory ? "excitatory" : "inhibitory";
}

struct ElementDecl {
  std::string name;
  ElementKind kind = ElementKind::Interneuron;
  Affect affect = Affect::Neutral;
  std::optional<double> threshold;
  SourcePos pos;  // not part of structural equality

  friend bool operator==(const ElementDecl& x, const ElementDecl& y) {
    return x.name == y.name && x.kind == y.kind && x.affect == y.affect &&
           x.threshold == y.threshold;
  }
};

struct RelationshipDecl {
  RelationKind kind = RelationKind::Causes;
  std::string a;
  std::string b;
  // Present iff kind == Causes.
  std::optional<Sign> a_sign;
  std::optional<Sign> b_sign;
  double weight = 0.5;
  double mutability = 0.0;
  std::optional<Polarity> polarity;
  SourcePos pos;

  // Explicit polarity wins; otherwise `causes` derives it from the target sign
  // and the inhibitory relationships are inhibitory.
  Polarity effective_polarity() const {
    if (polarity) return *polarity;
    switch (kind) {
      case RelationKind::Causes:
        return b_sign.value_or(Sign::Plus) == Sign::Plus ? Polarity::Excitatory
                                                         : Polarity::Inhibitory;
      case RelationKind::Correlated: return Polarity::Excitatory;
      default: return Polarity::Inhibitory;
    }
  }

  friend bool operator==(const RelationshipDecl& x, const RelationshipDecl& y) {
    return x.kind == y.kind && x.a == y.a && x.b == y.b &&
           x.a_sign == y.a_sign && x.b_sign == y.b_sign &&
           x.weight == y.weight && x.mutability == y.mutability &&
           x.polarity == y.polarity;
  }
};

struct NetworkSpec {
  std::vector<ElementDecl> elements;
  std::vector<RelationshipDecl> relationships;

  const ElementDecl* find(std::string_view name) const {
    auto it = std::find_if(elements.begin(), elements.end(),
                           [&](const ElementDecl& e) { return e.name == name; });
    return it == elements.end() ? nullptr : &*it;
  }

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

// Defaults applied by the parser to omitted relationship attributes.
struct RelationshipDefaults {
  double causes_weight = 0.5;
  double causes_mutability = 0.5;
  double correlated_weight = 0.5;
  double inhibitory_weight = 0.5;  // opposes / dominates
};

// ---------------------------------------------------------------------------
// Lexer

enum class TokenKind {
  Keyword,
  Ident,
  Number,
  LBrace,
  RBrace,
  Colon,
  Plus,
  Minus,
};

struct Token {
  TokenKind kind;
  std::string text;
  SourcePos pos;

  friend bool operator==(const Token& x, const Token& y) {
    return x.kind == y.kind && x.text == y.text;
  }
};

inline bool is_keyword(std::string_view word) {
  static constexpr std::string_view kKeywords[] = {
      "element", "relationship", "causes", "correlated", "opposes", "dominates"};
  return std::find(std::begin(kKeywords), std::end(kKeywords), word) !=
         std::end(kKeywords);
}

inline std::string describe(const Token& t) {
  switch (t.kind) {
    case TokenKind::Keyword: return "keyword '" + t.text + "'";
    case TokenKind::Ident: return "identifier '" + t.text + "'";
    case TokenKind::Number: return "number " + t.text;
    default: return "'" + t.text + "'";
  }
}

inline std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t line = 1, col = 1;
  std::size_t i = 0;

  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto is_ident_start = [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
  };
  auto is_digit = [](char c) { return c >= '0' && c <= '9'; };

  while (i < src.size()) {
    const char c = src[i];
    const SourcePos pos{line, col};
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
    } else if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
    } else if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < src.size() && (is_ident_start(src[j]) || is_digit(src[j]))) ++j;
      std::string word(src.substr(i, j - i));
      out.push_back({is_keyword(word) ? TokenKind::Keyword : TokenKind::Ident,
                     std::move(word), pos});
      advance(j - i);
    } else if (is_digit(c) || (c == '.' && i + 1 < src.size() && is_digit(src[i + 1]))) {
      std::size_t j = i;
      while (j < src.size() && is_digit(src[j])) ++j;
      if (j < src.size() && src[j] == '.') {
        ++j;
        if (j >= src.size() || !is_digit(src[j]))
          throw LexError({line, col + (j - i)}, "expected digit after '.'");
        while (j < src.size() && is_digit(src[j])) ++j;
      }
      out.push_back({TokenKind::Number, std::string(src.substr(i, j - i)), pos});
      advance(j - i);
    } else {
      TokenKind kind;
      switch (c) {
        case '{': kind = TokenKind::LBrace; break;
        case '}': kind = TokenKind::RBrace; break;
        case ':': kind = TokenKind::Colon; break;
        case '+': kind = TokenKind::Plus; break;
        case '-': kind = TokenKind::Minus; break;
        default: {
          const auto byte = static_cast<unsigned char>(c);
          std::string shown = byte >= 0x20 && byte < 0x7f
                                  ? std::string("'") + c + "'"
                                  : "byte 0x" + std::string(1, "0123456789abcdef"[byte >> 4]) +
                                        std::string(1, "0123456789abcdef"[byte & 15]);
          throw LexError(pos, "unexpected character " + shown);
        }
      }
      out.push_back({kind, std::string(1, c), pos});
      advance(1);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parser

namespace detail {

class Parser {
 public:
  Parser(std::span<const Token> tokens, const RelationshipDefaults& defaults)
      : tokens_(tokens), defaults_(defaults) {}

  NetworkSpec parse() {
    NetworkSpec spec;
    bool seen_relationship = false;
    while (!at_end()) {
      const Token& t = peek();
      if (t.kind == TokenKind::Keyword && t.text == "element") {
        if (seen_relationship)
          throw OrderError(t.pos, "element '" + peek(1).text +
                                      "' declared after a relationship; "
                                      "all elements must come first");
        spec.elements.push_back(element());
      } else if (t.kind == TokenKind::Keyword && t.text == "relationship") {
        seen_relationship = true;
        spec.relationships.push_back(relationship());
      } else {
        throw ParseError(t.pos, "unexpected " + describe(t),
                         {"'element'", "'relationship'"});
      }
    }
    return spec;
  }

 private:
  bool at_end() const { return idx_ >= tokens_.size(); }

  const Token& peek(std::size_t ahead = 0) const {
    static const Token kEnd{TokenKind::Ident, "", {}};
    return idx_ + ahead < tokens_.size() ? tokens_[idx_ + ahead] : kEnd;
  }

  SourcePos end_pos() const {
    if (tokens_.empty()) return {};
    const Token& last = tokens_.back();
    return {last.pos.line, last.pos.column + last.text.size()};
  }

  [[noreturn]] void fail(std::vector<std::string> expected) const {
    if (at_end()) throw ParseError(end_pos(), "unexpected end of input", std::move(expected));
    throw ParseError(peek().pos, "unexpected " + describe(peek()), std::move(expected));
  }

  const Token& expect(TokenKind kind, std::string_view what) {
    if (at_end() || peek().kind != kind) fail({std::string(what)});
    return tokens_[idx_++];
  }

  bool accept(TokenKind kind) {
    if (!at_end() && peek().kind == kind) {
      ++idx_;
      return true;
    }
    return false;
  }

  template <typename Enum>
  Enum enum_value(const std::map<std::string, Enum, std::less<>>& choices) {
    std::vector<std::string> names;
    for (const auto& [name, _] : choices) names.push_back(name);
    if (at_end() || peek().kind != TokenKind::Ident) fail(names);
    auto it = choices.find(peek().text);
    if (it == choices.end()) fail(names);
    ++idx_;
    return it->second;
  }

  double number() { return *parse_double(expect(TokenKind::Number, "number").text); }

  ElementDecl element() {
    ElementDecl e;
    e.pos = tokens_[idx_++].pos;
    e.name = expect(TokenKind::Ident, "element name").text;
    expect(TokenKind::LBrace, "'{'");
    std::set<std::string, std::less<>> seen;
    while (!accept(TokenKind::RBrace)) {
      if (at_end() || peek().kind != TokenKind::Ident)
        fail({"'type'", "'affect'", "'threshold'", "'}'"});
      const Token& key = tokens_[idx_];
      if (key.text != "type" && key.text != "affect" && key.text != "threshold")
        fail({"'type'", "'affect'", "'threshold'", "'}'"});
      if (!seen.insert(key.text).second)
        throw ParseError(key.pos, "duplicate attribute '" + key.text + "'");
      ++idx_;
      expect(TokenKind::Colon, "':'");
      if (key.text == "type") {
        e.kind = enum_value<ElementKind>({{"sensory", ElementKind::Sensory},
                                          {"interneuron", ElementKind::Interneuron},
                                          {"motor", ElementKind::Motor},
                                          {"muscle", ElementKind::Muscle},
                                          {"emotion", ElementKind::Emotion}});
      } else if (key.text == "affect") {
        e.affect = enum_value<Affect>({{"positive", Affect::Positive},
                                       {"negative", Affect::Negative},
                                       {"neutral", Affect::Neutral}});
      } else {
        e.threshold = number();
      }
    }
    if (!seen.contains("type"))
      throw ParseError(tokens_[idx_ - 1].pos,
                       "element '" + e.name + "' is missing its type", {"'type'"});
    return e;
  }

  std::optional<Sign> sign() {
    if (accept(TokenKind::Plus)) return Sign::Plus;
    if (accept(TokenKind::Minus)) return Sign::Minus;
    return std::nullopt;
  }

  RelationshipDecl relationship() {
    RelationshipDecl r;
    r.pos = tokens_[idx_++].pos;
    expect(TokenKind::LBrace, "'{'");

    const auto a_sign = sign();
    r.a = expect(TokenKind::Ident, "element name").text;
    if (at_end() || peek().kind != TokenKind::Keyword)
      fail({"'causes'", "'correlated'", "'opposes'", "'dominates'"});
    const Token& verb = tokens_[idx_];
    if (verb.text == "causes") {
      r.kind = RelationKind::Causes;
    } else if (verb.text == "correlated") {
      r.kind = RelationKind::Correlated;
    } else if (verb.text == "opposes") {
      r.kind = RelationKind::Opposes;
    } else if (verb.text == "dominates") {
      r.kind = RelationKind::Dominates;
    } else {
      fail({"'causes'", "'correlated'", "'opposes'", "'dominates'"});
    }
    ++idx_;
    const bool causes = r.kind == RelationKind::Causes;
    if (a_sign && !causes)
      throw ParseError(r.pos, "signs are only allowed on 'causes' relationships");
    if (!causes && (peek().kind == TokenKind::Plus || peek().kind == TokenKind::Minus) && !at_end())
      fail({"element name"});
    const auto b_sign = causes ? sign() : std::nullopt;
    r.b = expect(TokenKind::Ident, "element name").text;
    if (causes) {
      r.a_sign = a_sign.value_or(Sign::Plus);
      r.b_sign = b_sign.value_or(Sign::Plus);
    }

    switch (r.kind) {
      case RelationKind::Causes:
        r.weight = defaults_.causes_weight;
        r.mutability = defaults_.causes_mutability;
        break;
      case RelationKind::Correlated: r.weight = defaults_.correlated_weight; break;
      default: r.weight = defaults_.inhibitory_weight; break;
    }

    std::vector<std::string> allowed{"'weight'", "'}'"};
    if (causes) allowed = {"'mutability'", "'weight'", "'polarity'", "'}'"};
    std::set<std::string, std::less<>> seen;
    while (!accept(TokenKind::RBrace)) {
      if (at_end() || peek().kind != TokenKind::Ident) fail(allowed);
      const Token& key = tokens_[idx_];
      const bool known = key.text == "weight" ||
                         (causes && (key.text == "mutability" || key.text == "polarity"));
      if (!known) fail(allowed);
      if (!seen.insert(key.text).second)
        throw ParseError(key.pos, "duplicate attribute '" + key.text + "'");
      ++idx_;
      expect(TokenKind::Colon, "':'");
      if (key.text == "weight") {
        r.weight = number();
      } else if (key.text == "mutability") {
        r.mutability = number();
      } else {
        r.polarity = enum_value<Polarity>(
            {{"excitatory", Polarity::Excitatory}, {"inhibitory", Polarity::Inhibitory}});
      }
    }
    return r;
  }

  std::span<const Token> tokens_;
  const RelationshipDefaults& defaults_;
  std::size_t idx_ = 0;
};

}  // namespace detail

inline NetworkSpec parse(std::span<const Token> tokens,
                         const RelationshipDefaults& defaults = {}) {
  return detail::Parser(tokens, defaults).parse();
}

inline NetworkSpec parse_source(std::string_view source,
                                const RelationshipDefaults& defaults = {}) {
  const auto tokens = tokenize(source);
  return parse(tokens, defaults);
}

// ---------------------------------------------------------------------------
// Naming of generated neurons

// `sCO2` -> `isCO2`; names without the sensory `s` prefix get `is` prepended.
inline std::string sei_name(std::string_view sensor) {
  if (sensor.size() > 1 && sensor[0] == 's' &&
      (std::isupper(static_cast<unsigned char>(sensor[1])) ||
       std::isdigit(static_cast<unsigned char>(sensor[1])))) {
    sensor.remove_prefix(1);
  }
  return "is" + std::string(sensor);
}

inline std::string sci_name(std::vector<std::string> sensors) {
  std::sort(sensors.begin(), sensors.end());
  std::string out = "c";
  for (const auto& s : sensors) out += "_" + s;
  return out;
}

inline std::string eei_name(std::string_view emotion, std::string_view sci) {
  return "x" + std::string(emotion) + "_" + std::string(sci);
}

// 2^n - 1, saturating.
inline std::uint64_t sci_count(std::size_t sensors) {
  if (sensors >= 64) return UINT64_MAX;
  return (std::uint64_t{1} << sensors) - 1;
}

// ---------------------------------------------------------------------------
// Validation

struct Diagnostic {
  enum class Severity { Error, Warning };
  Severity severity;
  std::string message;
  SourcePos pos;

  bool is_error() const { return severity == Severity::Error; }
};

inline std::string to_string(const Diagnostic& d) {
  return to_string(d.pos) + ": " + (d.is_error() ? "error: " : "warning: ") + d.message;
}

inline bool has_errors(std::span<const Diagnostic> diags) {
  return std::any_of(diags.begin(), diags.end(),
                     [](const Diagnostic& d) { return d.is_error(); });
}

inline std::vector<Diagnostic> validate_spec(const NetworkSpec& spec,
                                             std::uint64_t sci_cap = 4095) {
  using Sev = Diagnostic::Severity;
  std::vector<Diagnostic> out;
  auto error = [&](SourcePos p, std::string m) { out.push_back({Sev::Error, std::move(m), p}); };
  auto warn = [&](SourcePos p, std::string m) { out.push_back({Sev::Warning, std::move(m), p}); };

  std::map<std::string, const ElementDecl*, std::less<>> declared;
  std::size_t sensors = 0, emotions = 0;
  for (const auto& e : spec.elements) {
    if (!declared.emplace(e.name, &e).second)
      error(e.pos, "duplicate element name '" + e.name + "'");
    if (e.kind == ElementKind::Sensory) ++sensors;
    if (e.kind == ElementKind::Emotion) {
      ++emotions;
      if (e.affect == Affect::Neutral)
        error(e.pos, "emotion '" + e.name + "' must declare a positive or negative affect");
    }
    if (e.threshold && (*e.threshold < 0.0 || *e.threshold >= 1.0))
      error(e.pos, "threshold of '" + e.name + "' must lie in [0, 1)");
  }
  if (sensors == 0) error({}, "spec declares no sensory element");
  if (emotions == 0) error({}, "spec declares no emotion element");

  // Generated SEI names are valid relationship endpoints.
  std::map<std::string, std::string, std::less<>> generated;
  for (const auto& e : spec.elements) {
    if (e.kind != ElementKind::Sensory) continue;
    const auto name = sei_name(e.name);
    if (declared.contains(name))
      error(e.pos, "generated interneuron name '" + name + "' collides with a declared element");
    generated.emplace(name, e.name);
  }

  const auto count = sci_count(sensors);
  if (count > sci_cap) {
    warn({}, "SCI explosion: " + std::to_string(sensors) + " sensors require 2^" +
                 std::to_string(sensors) + "-1 = " + std::to_string(count) +
                 " consolidatory interneurons (cap " + std::to_string(sci_cap) + ")");
  }

  std::set<std::string, std::less<>> referenced;
  std::map<std::string, std::vector<std::string>, std::less<>> dominance;
  for (const auto& r : spec.relationships) {
    bool ok = true;
    for (const auto* name : {&r.a, &r.b}) {
      if (!declared.contains(*name) && !generated.contains(*name)) {
        error(r.pos, "relationship references undeclared element '" + *name + "'");
        ok = false;
      }
      referenced.insert(*name);
    }
    if (r.a == r.b) error(r.pos, "self-relationship on '" + r.a + "'");
    if (r.weight < 0.0 || r.weight > 1.0)
      error(r.pos, "relationship weight must lie in [0, 1]");
    if (r.mutability < 0.0 || r.mutability > 1.0)
      error(r.pos, "relationship mutability must lie in [0, 1]");
    if (ok && r.kind == RelationKind::Dominates) {
      const auto* a = declared.contains(r.a) ? declared.at(r.a) : nullptr;
      const auto* b = declared.contains(r.b) ? declared.at(r.b) : nullptr;
      if (a && b && a->kind == ElementKind::Emotion && b->kind == ElementKind::Emotion)
        dominance[r.a].push_back(r.b);
    }
  }

  // Dominance among emotions must be acyclic.
  std::map<std::string, int, std::less<>> color;  // 0 white, 1 grey, 2 black
  bool cyclic = false;
  auto visit = [&](auto&& self, const std::string& node) -> void {
    color[node] = 1;
    if (auto it = dominance.find(node); it != dominance.end()) {
      for (const auto& next : it->second) {
        if (color[next] == 1) cyclic = true;
        else if (color[next] == 0) self(self, next);
      }
    }
    color[node] = 2;
  };
  for (const auto& [node, _] : dominance)
    if (color[node] == 0) visit(visit, node);
  if (cyclic) error({}, "dominance relationships among emotions form a cycle");

  for (const auto& e : spec.elements) {
    if (e.kind == ElementKind::Sensory || e.kind == ElementKind::Emotion) continue;
    if (!referenced.contains(e.name))
      warn(e.pos, "element '" + e.name + "' is not referenced by any relationship");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pretty-printer (canonical form; reparses to an equal spec)

inline std::string pretty_print(const NetworkSpec& spec) {
  std::string out;
  for (const auto& e : spec.elements) {
    out += "element " + e.name + " { type: " + std::string(to_string(e.kind));
    if (e.affect != Affect::Neutral) out += " affect: " + std::string(to_string(e.affect));
    if (e.threshold) out += " threshold: " + format_fixed(*e.threshold);
    out += " }\n";
  }
  for (const auto& r : spec.relationships) {
    out += "relationship { ";
    if (r.kind == RelationKind::Causes) {
      out += (r.a_sign == Sign::Minus ? "-" : "+") + r.a + " causes " +
             (r.b_sign == Sign::Minus ? "-" : "+") + r.b;
      out += " mutability: " + format_fixed(r.mutability);
    } else {
      out += r.a + " " + std::string(to_string(r.kind)) + " " + r.b;
    }
    out += " weight: " + format_fixed(r.weight);
    if (r.polarity) out += " polarity: " + std::string(to_string(*r.polarity));
    out += " }\n";
  }
  return out;
}

}  // namespace ortus
