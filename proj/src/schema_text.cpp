#include "asnfuzz/schema_text.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>
#include <unordered_map>

#include "asnfuzz/errors.hpp"

namespace asnfuzz {

// ---------------------------------------------------------------------------
// Extraction

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

// Returns the comment body of a line consisting solely of a "--" comment.
std::optional<std::string_view> sole_comment(std::string_view line) {
  line = trim(line);
  if (line.substr(0, 2) != "--") return std::nullopt;
  return trim(line.substr(2));
}

bool is_start_tag(std::string_view line) {
  auto c = sole_comment(line);
  return c && (*c == "ASN1START" || *c == "ASN1TSTART");
}

bool is_stop_tag(std::string_view line) {
  auto c = sole_comment(line);
  return c && *c == "ASN1STOP";
}

// TAG-<NAME>-START or TAG-<NAME>-STOP.
bool is_name_tag(std::string_view line) {
  auto c = sole_comment(line);
  if (!c || c->substr(0, 4) != "TAG-") return false;
  std::string_view rest = c->substr(4);
  std::string_view suffix;
  if (rest.size() > 6 && rest.substr(rest.size() - 6) == "-START") {
    suffix = "-START";
  } else if (rest.size() > 5 && rest.substr(rest.size() - 5) == "-STOP") {
    suffix = "-STOP";
  } else {
    return false;
  }
  std::string_view name = rest.substr(0, rest.size() - suffix.size());
  return !name.empty() &&
         std::all_of(name.begin(), name.end(), [](unsigned char ch) {
           return std::isalnum(ch) || ch == '-' || ch == '_';
         });
}

}  // namespace

Extraction extract(std::string_view document) {
  Extraction out;
  bool inside = false;
  std::size_t line_no = 0;
  std::size_t open_line = 0;
  std::size_t pos = 0;
  while (pos < document.size()) {
    std::size_t end = document.find('\n', pos);
    std::size_t next = end == std::string_view::npos ? document.size() : end + 1;
    std::string_view line = document.substr(pos, next - pos);
    ++line_no;
    if (is_start_tag(line)) {
      if (inside) {
        throw ExtractError(ExtractError::Kind::UnbalancedTags,
                           "start tag on line " + std::to_string(line_no) +
                               " before the stop tag of the block opened on "
                               "line " + std::to_string(open_line));
      }
      inside = true;
      open_line = line_no;
    } else if (is_stop_tag(line)) {
      if (!inside) {
        throw ExtractError(ExtractError::Kind::UnbalancedTags,
                           "stop tag without start tag on line " +
                               std::to_string(line_no));
      }
      inside = false;
      ++out.report.blocks_found;
    } else if (inside) {
      if (is_name_tag(line)) {
        ++out.report.ignored_tags;
      } else {
        out.text.append(line);
      }
    }
    pos = next;
  }
  if (inside) {
    throw ExtractError(ExtractError::Kind::UnbalancedTags,
                       "start tag on line " + std::to_string(open_line) +
                           " has no following stop tag");
  }
  if (out.report.blocks_found == 0) {
    throw ExtractError(ExtractError::Kind::NoBlocksFound,
                       "no ASN1START/ASN1STOP blocks found");
  }
  out.report.bytes_extracted = out.text.size();
  return out;
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

struct Token {
  enum class Type { Ident, Number, Symbol, End };
  Type type;
  std::string text;
  std::size_t line;
  std::size_t column;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)); }
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
}

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0, line = 1, col = 1;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    // "--" comment runs to end of line or to the next "--".
    if (c == '-' && i + 1 < src.size() && src[i + 1] == '-') {
      advance(2);
      while (i < src.size() && src[i] != '\n') {
        if (src[i] == '-' && i + 1 < src.size() && src[i + 1] == '-') {
          advance(2);
          break;
        }
        advance(1);
      }
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '*') {
      advance(2);
      while (i < src.size() &&
             !(src[i] == '*' && i + 1 < src.size() && src[i + 1] == '/')) {
        advance(1);
      }
      advance(2);
      continue;
    }
    Token tok{Token::Type::Symbol, "", line, col};
    if (ident_start(c)) {
      std::size_t j = i + 1;
      while (j < src.size() && ident_char(src[j])) {
        if (src[j] == '-' && j + 1 < src.size() && src[j + 1] == '-') break;
        ++j;
      }
      while (j > i + 1 && src[j - 1] == '-') --j;
      tok.type = Token::Type::Ident;
      tok.text = std::string(src.substr(i, j - i));
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '-' && i + 1 < src.size() &&
                std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t j = i + 1;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) {
        ++j;
      }
      tok.type = Token::Type::Number;
      tok.text = std::string(src.substr(i, j - i));
    } else {
      static constexpr std::string_view kSymbols[] = {
          "::=", "...", "..", "[[", "]]", "{", "}", "(", ")", ",",
          "[",   "]",   "|",  ";",  "<",  ">", "@", "!", "^", ".", ":"};
      for (auto sym : kSymbols) {
        if (src.substr(i, sym.size()) == sym) {
          tok.text = std::string(sym);
          break;
        }
      }
      if (tok.text.empty()) {
        throw ParseError(line, col, std::string(1, c), "unexpected character");
      }
    }
    std::size_t n = tok.text.size();
    out.push_back(std::move(tok));
    advance(n);
  }
  out.push_back(Token{Token::Type::End, "<end>", line, col});
  return out;
}

// ---------------------------------------------------------------------------
// Parser

const std::set<std::string, std::less<>> kUnsupportedTypes = {
    "SET",           "REAL",          "NULL",         "OBJECT",
    "UTF8String",    "IA5String",     "VisibleString", "PrintableString",
    "NumericString", "BMPString",     "GeneralString", "GraphicString",
    "GeneralizedTime", "UTCTime",     "ANY",           "EXTERNAL",
    "EMBEDDED",      "RELATIVE-OID",  "CLASS",         "INSTANCE",
    "TeletexString", "UniversalString", "ObjectDescriptor",
};

class Parser {
 public:
  Parser(std::vector<Token> tokens, const ParseOptions& options)
      : toks_(std::move(tokens)), opts_(options) {}

  Schema parse_module() {
    Schema schema;
    while (!at_end()) {
      if (peek().type == Token::Type::Ident &&
          peek(1).text == "DEFINITIONS") {
        if (schema.name.empty()) schema.name = peek().text;
        parse_module_header();
        continue;
      }
      if (is("END")) {
        take();
        continue;
      }
      if (is("IMPORTS") || is("EXPORTS")) {
        throw UnsupportedConstruct(peek().text);
      }
      const Token& name = expect_ident("type assignment");
      if (is("{")) throw UnsupportedConstruct("parameterized type");
      if (!is("::=")) {
        if (std::islower(static_cast<unsigned char>(name.text[0]))) {
          throw UnsupportedConstruct("value assignment");
        }
        fail(peek(), "expected '::='");
      }
      take();
      lines_[name.text] = name.line;
      schema.assignments.push_back(Assignment{name.text, parse_type()});
    }
    return schema;
  }

  TypeExpr parse_single_type() {
    TypeExpr t = parse_type();
    if (!at_end()) fail(peek(), "unexpected trailing input");
    return t;
  }

  // "{ field, ... }" as used in record details.
  std::vector<Field> parse_field_block() {
    TypeExpr t = parse_composite(Kind::Sequence);
    if (!at_end()) fail(peek(), "unexpected trailing input");
    return std::move(t.fields);
  }

  std::size_t line_of(const std::string& assignment) const {
    auto it = lines_.find(assignment);
    return it == lines_.end() ? 0 : it->second;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  bool at_end() const { return peek().type == Token::Type::End; }
  bool is(std::string_view text) const {
    return peek().type != Token::Type::End && peek().text == text;
  }
  const Token& take() {
    const Token& t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  [[noreturn]] void fail(const Token& t, const std::string& message) const {
    throw ParseError(t.line, t.column, t.text, message);
  }
  void expect(std::string_view text) {
    if (!is(text)) fail(peek(), "expected '" + std::string(text) + "'");
    take();
  }
  const Token& expect_ident(const std::string& what) {
    if (peek().type != Token::Type::Ident) fail(peek(), "expected " + what);
    return take();
  }

  void parse_module_header() {
    take();  // module name
    take();  // DEFINITIONS
    while (is("AUTOMATIC") || is("IMPLICIT") || is("EXPLICIT") || is("TAGS")) {
      take();
    }
    if (is("EXTENSIBILITY")) throw UnsupportedConstruct("EXTENSIBILITY IMPLIED");
    expect("::=");
    expect("BEGIN");
  }

  TypeExpr parse_type() {
    const Token& tok = peek();
    if (tok.type != Token::Type::Ident) fail(tok, "expected a type");
    const std::string word = tok.text;
    if (kUnsupportedTypes.count(word) != 0) throw UnsupportedConstruct(word);
    take();
    if (word == "BOOLEAN") return TypeExpr::boolean();
    if (word == "INTEGER") {
      if (is("{")) throw UnsupportedConstruct("named numbers");
      IntRange range;
      if (is("(")) range = parse_int_constraint();
      return TypeExpr::integer(std::move(range));
    }
    if (word == "ENUMERATED") return parse_enumerated();
    if (word == "BIT" || word == "OCTET") {
      expect("STRING");
      if (is("{")) throw UnsupportedConstruct("named bits");
      std::optional<SizeConstraint> size;
      if (is("(")) size = parse_size_constraint(true);
      return word == "BIT" ? TypeExpr::bit_string(size)
                           : TypeExpr::octet_string(size);
    }
    if (word == "SEQUENCE") {
      if (is("{")) return parse_composite(Kind::Sequence);
      std::optional<SizeConstraint> size;
      if (is("(")) {
        size = parse_size_constraint(true);
      } else if (is("SIZE")) {
        size = parse_size_constraint(false);
      }
      expect("OF");
      if (peek().type == Token::Type::Ident &&
          std::islower(static_cast<unsigned char>(peek().text[0])) &&
          peek(1).type == Token::Type::Ident) {
        throw UnsupportedConstruct("named SEQUENCE OF element");
      }
      return TypeExpr::sequence_of(parse_type(), size);
    }
    if (word == "CHOICE") return parse_composite(Kind::Choice);
    if (std::isupper(static_cast<unsigned char>(word[0]))) {
      if (is("{")) throw UnsupportedConstruct("parameterized type");
      if (is("(")) throw UnsupportedConstruct("constrained type reference");
      return TypeExpr::reference(word);
    }
    fail(tok, "expected a type");
  }

  std::optional<BigInt> parse_bound(bool allow_min, bool allow_max) {
    const Token& t = peek();
    if (t.type == Token::Type::Number) {
      take();
      return BigInt(t.text);
    }
    if (t.type == Token::Type::Ident) {
      if (t.text == "MIN") {
        if (!allow_min) fail(t, "MIN not allowed here");
        take();
        return std::nullopt;
      }
      if (t.text == "MAX") {
        if (!allow_max) fail(t, "MAX not allowed here");
        take();
        return std::nullopt;
      }
      auto it = opts_.constants.find(t.text);
      if (it == opts_.constants.end()) {
        fail(t, "unknown named constant '" + t.text + "'");
      }
      take();
      return it->second;
    }
    fail(t, "expected a bound");
  }

  void reject_constraint_extras() {
    if (is(",")) throw UnsupportedConstruct("extensible constraint");
    if (is("|")) throw UnsupportedConstruct("constraint union");
  }

  IntRange parse_int_constraint() {
    expect("(");
    IntRange r;
    const Token& first = peek();
    r.lower = parse_bound(true, false);
    if (is("..")) {
      take();
      r.upper = parse_bound(false, true);
    } else {
      if (!r.lower) fail(first, "single-value constraint needs a number");
      r.upper = r.lower;
    }
    reject_constraint_extras();
    expect(")");
    return r;
  }

  SizeConstraint parse_size_range() {
    SizeConstraint s;
    const Token& lo_tok = peek();
    auto lo = parse_bound(false, false);
    if (*lo < 0) fail(lo_tok, "negative SIZE bound");
    s.lower = static_cast<std::uint64_t>(*lo);
    if (is("..")) {
      take();
      const Token& hi_tok = peek();
      auto hi = parse_bound(false, true);
      if (hi) {
        if (*hi < 0) fail(hi_tok, "negative SIZE bound");
        s.upper = static_cast<std::uint64_t>(*hi);
      }
    } else {
      s.upper = s.lower;
    }
    reject_constraint_extras();
    return s;
  }

  // "(SIZE (...))" when parenthesized, else "SIZE (...)".
  SizeConstraint parse_size_constraint(bool parenthesized) {
    if (parenthesized) expect("(");
    if (!is("SIZE")) {
      if (parenthesized) throw UnsupportedConstruct("non-SIZE constraint");
      fail(peek(), "expected SIZE");
    }
    take();
    expect("(");
    SizeConstraint s = parse_size_range();
    expect(")");
    if (parenthesized) {
      reject_constraint_extras();
      expect(")");
    }
    return s;
  }

  TypeExpr parse_enumerated() {
    expect("{");
    std::vector<std::string> items;
    bool extensible = false;
    bool in_additions = false;
    while (true) {
      if (is("...")) {
        take();
        if (extensible) fail(peek(), "second extension marker in ENUMERATED");
        extensible = true;
        in_additions = true;
      } else {
        const Token& item = expect_ident("enumeration item");
        if (is("(")) throw UnsupportedConstruct("numbered enumeration item");
        if (!in_additions) items.push_back(item.text);
      }
      if (is(",")) {
        take();
        continue;
      }
      expect("}");
      break;
    }
    return TypeExpr::enumerated(std::move(items), extensible);
  }

  Field parse_field(Kind container) {
    if (is("COMPONENTS")) throw UnsupportedConstruct("COMPONENTS OF");
    const Token& name = expect_ident("field name");
    Field f{name.text, parse_type(), false};
    if (is("OPTIONAL")) {
      if (container == Kind::Choice) {
        fail(peek(), "OPTIONAL is not allowed in CHOICE");
      }
      take();
      f.optional = true;
    } else if (is("DEFAULT")) {
      throw UnsupportedConstruct("DEFAULT");
    }
    return f;
  }

  TypeExpr parse_composite(Kind kind) {
    expect("{");
    std::vector<Field> fields;
    bool extensible = false;
    bool in_additions = false;
    if (is("}")) {
      take();
      return kind == Kind::Sequence ? TypeExpr::sequence({})
                                    : TypeExpr::choice({});
    }
    while (true) {
      if (is("...")) {
        take();
        if (!extensible) {
          extensible = true;
          in_additions = true;
        } else {
          in_additions = false;  // closing marker; root components follow
        }
      } else if (is("[[")) {
        if (!in_additions) fail(peek(), "version bracket outside extension");
        take();
        if (peek().type == Token::Type::Number && peek(1).text == ":") {
          take();
          take();
        }
        while (true) {
          parse_field(kind);
          if (is(",")) {
            take();
            continue;
          }
          break;
        }
        expect("]]");
      } else {
        Field f = parse_field(kind);
        if (!in_additions) fields.push_back(std::move(f));
      }
      if (is(",")) {
        take();
        continue;
      }
      expect("}");
      break;
    }
    return kind == Kind::Sequence ? TypeExpr::sequence(std::move(fields), extensible)
                                  : TypeExpr::choice(std::move(fields), extensible);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const ParseOptions& opts_;
  std::unordered_map<std::string, std::size_t> lines_;
};

constexpr std::string_view kMutationPrefix = "-- mutation ";

}  // namespace

Schema parse(std::string_view text, const ParseOptions& options) {
  std::vector<MutationRecord> provenance;
  {
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      std::string_view line = text.substr(pos, end - pos);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line.substr(0, kMutationPrefix.size()) == kMutationPrefix) {
        provenance.push_back(parse_record(line.substr(kMutationPrefix.size())));
      } else if (!trim(line).empty()) {
        break;
      }
      pos = end + 1;
    }
  }
  Parser parser(lex(text), options);
  Schema schema = parser.parse_module();
  schema.provenance = std::move(provenance);
  auto errors = validate_schema(schema);
  if (!errors.empty()) {
    const auto& e = errors.front();
    const std::string root =
        e.path.empty() ? std::string() : std::get<std::string>(e.path.steps[0]);
    throw ParseError(parser.line_of(root), 1, e.path.str(),
                     std::string(error_kind_name(e.kind)) + ": " + e.message);
  }
  return schema;
}

TypeExpr parse_type(std::string_view text, const ParseOptions& options) {
  Parser parser(lex(text), options);
  return parser.parse_single_type();
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

std::string pad(int indent) { return std::string(2 * indent, ' '); }

std::string size_text(const std::optional<SizeConstraint>& size) {
  if (!size) return "";
  std::string s = " (SIZE (" + std::to_string(size->lower);
  if (!size->is_fixed()) {
    s += "..";
    s += size->upper ? std::to_string(*size->upper) : "MAX";
  }
  return s + "))";
}

std::string range_text(const IntRange& r) {
  if (!r.lower && !r.upper) return "";
  if (r.lower && r.upper && *r.lower == *r.upper) {
    return " (" + r.lower->str() + ")";
  }
  return " (" + (r.lower ? r.lower->str() : "MIN") + ".." +
         (r.upper ? r.upper->str() : "MAX") + ")";
}

void render_into(std::string& out, const TypeExpr& t, int indent,
                 bool one_line) {
  switch (t.kind) {
    case Kind::Boolean:
      out += "BOOLEAN";
      return;
    case Kind::Integer:
      out += "INTEGER" + range_text(t.range);
      return;
    case Kind::Enumerated: {
      out += "ENUMERATED {";
      for (std::size_t i = 0; i < t.items.size(); ++i) {
        if (i) out += ", ";
        out += t.items[i];
      }
      if (t.extensible) out += t.items.empty() ? "..." : ", ...";
      out += "}";
      return;
    }
    case Kind::BitString:
      out += "BIT STRING" + size_text(t.size);
      return;
    case Kind::OctetString:
      out += "OCTET STRING" + size_text(t.size);
      return;
    case Kind::Sequence:
    case Kind::Choice: {
      out += t.kind == Kind::Sequence ? "SEQUENCE {" : "CHOICE {";
      if (t.fields.empty() && !t.extensible) {
        out += "}";
        return;
      }
      const std::string sep = one_line ? ", " : ",\n";
      bool first = true;
      for (const auto& f : t.fields) {
        out += first ? (one_line ? "" : "\n") : sep;
        first = false;
        if (!one_line) out += pad(indent + 1);
        out += f.name + " ";
        render_into(out, f.type, indent + 1, one_line);
        if (f.optional) out += " OPTIONAL";
      }
      if (t.extensible) {
        out += first ? (one_line ? "" : "\n") : sep;
        if (!one_line) out += pad(indent + 1);
        out += "...";
      }
      if (!one_line) out += "\n" + pad(indent);
      out += "}";
      return;
    }
    case Kind::SequenceOf:
      out += "SEQUENCE" + size_text(t.size) + " OF ";
      render_into(out, *t.element, indent, one_line);
      return;
    case Kind::Reference:
      out += t.ref;
      return;
  }
}

std::string render_inline(const TypeExpr& t) {
  std::string out;
  render_into(out, t, 0, true);
  return out;
}

void dump_node(std::ostringstream& os, const std::string& label,
               const TypeExpr& t, int indent, bool optional) {
  os << pad(indent) << label << ": " << kind_name(t.kind);
  switch (t.kind) {
    case Kind::Integer:
      if (t.range.lower || t.range.upper) {
        os << " " << (t.range.lower ? t.range.lower->str() : "MIN") << ".."
           << (t.range.upper ? t.range.upper->str() : "MAX");
      }
      break;
    case Kind::Enumerated:
      os << " [";
      for (std::size_t i = 0; i < t.items.size(); ++i) {
        os << (i ? " " : "") << t.items[i];
      }
      os << "]";
      break;
    case Kind::BitString:
    case Kind::OctetString:
    case Kind::SequenceOf:
      if (t.size) {
        os << " size " << t.size->lower << ".."
           << (t.size->upper ? std::to_string(*t.size->upper) : "MAX");
      }
      break;
    case Kind::Reference:
      os << " " << t.ref;
      break;
    default:
      break;
  }
  if (t.extensible) os << " ext";
  if (optional) os << " OPTIONAL";
  os << "\n";
  for (const auto& f : t.fields) {
    dump_node(os, f.name, f.type, indent + 1, f.optional);
  }
  if (t.kind == Kind::SequenceOf && t.element) {
    dump_node(os, "[]", *t.element, indent + 1, false);
  }
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ", ";
    out += parts[i];
  }
  return out;
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t comma = s.find(',', pos);
    if (comma == std::string_view::npos) comma = s.size();
    auto part = trim(s.substr(pos, comma - pos));
    if (!part.empty()) out.emplace_back(part);
    pos = comma + 1;
  }
  return out;
}

}  // namespace

std::string render_type(const TypeExpr& type, int indent) {
  std::string out;
  render_into(out, type, indent, false);
  return out;
}

std::string render(const Schema& schema) {
  std::string out;
  for (const auto& r : schema.provenance) {
    out += kMutationPrefix;
    out += format_record(r);
    out += "\n";
  }
  if (!schema.provenance.empty()) out += "\n";
  if (!schema.name.empty()) {
    out += schema.name + " DEFINITIONS AUTOMATIC TAGS ::=\nBEGIN\n\n";
  }
  for (const auto& a : schema.assignments) {
    out += a.name + " ::= " + render_type(a.type, 0) + "\n\n";
  }
  if (!schema.name.empty()) out += "END\n";
  return out;
}

std::string dump(const Schema& schema) {
  std::ostringstream os;
  os << "schema " << schema.name << " (" << schema.assignments.size()
     << " assignments)\n";
  for (const auto& a : schema.assignments) {
    dump_node(os, a.name, a.type, 0, false);
  }
  return os.str();
}

std::string format_record(const MutationRecord& record) {
  std::string detail = std::visit(
      [](const auto& d) -> std::string {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, detail::NewKind>) {
          return std::string(kind_name(d.kind));
        } else if constexpr (std::is_same_v<T, detail::NewReference>) {
          return d.name;
        } else if constexpr (std::is_same_v<T, detail::AddedNames>) {
          return join(d.names);
        } else if constexpr (std::is_same_v<T, detail::AddedFields>) {
          return render_inline(TypeExpr::sequence(d.fields)).substr(9);
        } else if constexpr (std::is_same_v<T, detail::RemovedNames>) {
          return join(d.names);
        } else if constexpr (std::is_same_v<T, detail::Permutation>) {
          std::vector<std::string> parts;
          for (auto i : d.order) parts.push_back(std::to_string(i));
          return join(parts);
        } else {
          return d.lower.str() + ".." + (d.upper ? d.upper->str() : "MAX");
        }
      },
      record.detail);
  return std::string(strategy_name(record.strategy)) + "\t" +
         record.target.str() + "\t" + detail;
}

MutationRecord parse_record(std::string_view line) {
  auto t1 = line.find('\t');
  auto t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
  if (t2 == std::string_view::npos) {
    throw Error("malformed mutation record '" + std::string(line) + "'");
  }
  auto strategy = schema_strategy_from_name(trim(line.substr(0, t1)));
  if (!strategy) {
    throw Error("unknown schema strategy in '" + std::string(line) + "'");
  }
  MutationRecord r{*strategy,
                   TypePath::parse(trim(line.substr(t1 + 1, t2 - t1 - 1))),
                   detail::NewKind{Kind::Boolean}};
  std::string_view d = trim(line.substr(t2 + 1));
  switch (*strategy) {
    case SchemaStrategy::ChangePrimitive: {
      auto k = kind_from_name(d);
      if (!k) throw Error("unknown kind '" + std::string(d) + "'");
      r.detail = detail::NewKind{*k};
      break;
    }
    case SchemaStrategy::ChangeStructured:
      r.detail = detail::NewReference{std::string(d)};
      break;
    case SchemaStrategy::ExtendOptions:
      if (!d.empty() && d.front() == '{') {
        r.detail = detail::AddedFields{Parser(lex(d), {}).parse_field_block()};
      } else {
        r.detail = detail::AddedNames{split_list(d)};
      }
      break;
    case SchemaStrategy::ReduceOptions:
      r.detail = detail::RemovedNames{split_list(d)};
      break;
    case SchemaStrategy::ScrambleOptions: {
      detail::Permutation p;
      for (const auto& s : split_list(d)) p.order.push_back(std::stoull(s));
      r.detail = p;
      break;
    }
    case SchemaStrategy::ChangeSize: {
      auto dots = d.find("..");
      if (dots == std::string_view::npos) {
        throw Error("malformed bounds '" + std::string(d) + "'");
      }
      detail::NewBounds b;
      b.lower = BigInt(std::string(trim(d.substr(0, dots))));
      auto hi = trim(d.substr(dots + 2));
      if (hi != "MAX") b.upper = BigInt(std::string(hi));
      r.detail = b;
      break;
    }
  }
  return r;
}

}  // namespace asnfuzz
