#include "wdw/dsl.hpp"

#include "wdw/analyzer.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace wdw::dsl {

namespace {

// --- lexer --------------------------------------------------------------------

struct Token {
  enum class Kind { Ident, Number, String, Punct, End };
  Kind kind{Kind::End};
  std::string text;
  std::size_t begin = 0, end = 0;
  int line = 1, col = 1;
  bool is_float = false;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) { tokenize(); }

  const std::vector<Token>& tokens() const { return tokens_; }
  const std::string& text() const { return text_; }

 private:
  void tokenize() {
    std::size_t i = 0;
    int line = 1, col = 1;
    auto advance = [&](std::size_t n) {
      for (std::size_t k = 0; k < n; ++k) {
        if (text_[i + k] == '\n') {
          ++line;
          col = 1;
        } else {
          ++col;
        }
      }
      i += n;
    };
    while (i < text_.size()) {
      const char c = text_[i];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance(1);
        continue;
      }
      if (c == '/' && i + 1 < text_.size() && text_[i + 1] == '/') {
        while (i < text_.size() && text_[i] != '\n') advance(1);
        continue;
      }
      Token t;
      t.begin = i;
      t.line = line;
      t.col = col;
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t j = i;
        while (j < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[j])) || text_[j] == '_'))
          ++j;
        t.kind = Token::Kind::Ident;
        t.text = text_.substr(i, j - i);
        advance(j - i);
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        std::size_t j = i;
        bool dot = false;
        while (j < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[j])) ||
                                    (!dot && text_[j] == '.' && j + 1 < text_.size() &&
                                     std::isdigit(static_cast<unsigned char>(text_[j + 1]))))) {
          if (text_[j] == '.') dot = true;
          ++j;
        }
        t.kind = Token::Kind::Number;
        t.is_float = dot;
        t.text = text_.substr(i, j - i);
        advance(j - i);
      } else if (c == '"') {
        std::size_t j = i + 1;
        std::string value;
        while (j < text_.size() && text_[j] != '"') {
          if (text_[j] == '\\' && j + 1 < text_.size()) ++j;
          value += text_[j];
          ++j;
        }
        if (j >= text_.size())
          raise(Errc::SyntaxError, "line " + std::to_string(line) + ": unterminated string");
        t.kind = Token::Kind::String;
        t.text = value;
        advance(j + 1 - i);
      } else {
        static const char* two[] = {"::", "!=", "<=", ">="};
        std::string puncts = "{}()[]<>,;:.=-";
        t.kind = Token::Kind::Punct;
        bool matched = false;
        for (const char* p : two) {
          if (text_.compare(i, 2, p) == 0) {
            t.text = p;
            advance(2);
            matched = true;
            break;
          }
        }
        if (!matched) {
          if (puncts.find(c) == std::string::npos)
            raise(Errc::SyntaxError, "line " + std::to_string(line) + " col " +
                                         std::to_string(col) + ": unexpected character '" +
                                         std::string(1, c) + "'");
          t.text = std::string(1, c);
          advance(1);
        }
      }
      t.end = i;
      tokens_.push_back(std::move(t));
    }
    Token end;
    end.kind = Token::Kind::End;
    end.begin = end.end = text_.size();
    end.line = line;
    end.col = col;
    tokens_.push_back(std::move(end));
  }

  const std::string& text_;
  std::vector<Token> tokens_;
};

// --- parser -------------------------------------------------------------------

class Parser {
 public:
  explicit Parser(const std::string& text) : lexer_(text) {}

  SchemaDocument parse() {
    SchemaDocument doc;
    while (!at_end()) {
      if (is_kw("warehouse")) {
        parse_warehouse(doc);
      } else if (is_kw("source")) {
        next();
        expect_punct("{");
        while (!try_punct("}")) doc.source_interfaces.push_back(parse_interface(true));
      } else if (is_kw("interface")) {
        doc.warehouse_interfaces.push_back(parse_interface(false));
      } else if (is_kw("environment")) {
        doc.environments.push_back(parse_environment());
      } else {
        fail("expected warehouse, source, interface or environment declaration");
      }
    }
    return doc;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    raise(Errc::SyntaxError, "line " + std::to_string(t.line) + " col " + std::to_string(t.col) +
                                 ": " + msg + " (near '" + (t.kind == Token::Kind::End ? "<eof>" : t.text) +
                                 "')");
  }

  const Token& peek(std::size_t ahead = 0) const {
    const std::size_t i = std::min(pos_ + ahead, lexer_.tokens().size() - 1);
    return lexer_.tokens()[i];
  }
  bool at_end() const { return peek().kind == Token::Kind::End; }
  const Token& next() { return lexer_.tokens()[pos_++]; }

  bool is_kw(const char* kw, std::size_t ahead = 0) const {
    return peek(ahead).kind == Token::Kind::Ident && peek(ahead).text == kw;
  }
  bool try_kw(const char* kw) {
    if (!is_kw(kw)) return false;
    next();
    return true;
  }
  void expect_kw(const char* kw) {
    if (!try_kw(kw)) fail(std::string("expected '") + kw + "'");
  }
  bool is_punct(const char* p, std::size_t ahead = 0) const {
    return peek(ahead).kind == Token::Kind::Punct && peek(ahead).text == p;
  }
  bool try_punct(const char* p) {
    if (!is_punct(p)) return false;
    next();
    return true;
  }
  void expect_punct(const char* p) {
    if (!try_punct(p)) fail(std::string("expected '") + p + "'");
  }
  std::string expect_ident(const char* what) {
    if (peek().kind != Token::Kind::Ident) fail(std::string("expected ") + what);
    return next().text;
  }
  std::int64_t expect_int(const char* what) {
    if (peek().kind != Token::Kind::Number || peek().is_float) fail(std::string("expected ") + what);
    return std::stoll(next().text);
  }

  void parse_warehouse(SchemaDocument& doc) {
    next();
    doc.warehouse_name = expect_ident("warehouse name");
    doc.has_warehouse_block = true;
    if (try_punct("{")) {
      while (!try_punct("}")) {
        expect_kw("refresh");
        expect_kw("every");
        const std::int64_t n = expect_int("refresh period count");
        doc.default_refresh = {n, parse_unit()};
        expect_punct(";");
      }
    }
    try_punct(";");
  }

  temporal::Unit parse_unit() {
    const std::string name = expect_ident("temporal unit");
    const auto u = temporal::unit_from_name(name);
    if (!u) fail("unknown temporal unit '" + name + "'");
    return *u;
  }

  // Instants are lexed as glued adjacent tokens re-read from the raw text.
  temporal::Instant parse_instant() {
    const Token& first = peek();
    if (first.kind != Token::Kind::Ident) fail("expected instant");
    std::size_t last_end = first.end;
    std::size_t ahead = 1;
    while (true) {
      const Token& t = peek(ahead);
      if (t.kind == Token::Kind::End || t.begin != last_end) break;
      const bool ok = t.kind == Token::Kind::Number || t.kind == Token::Kind::Ident ||
                      (t.kind == Token::Kind::Punct &&
                       (t.text == ":" || t.text == "-" || t.text == "::"));
      if (!ok) break;
      last_end = t.end;
      ++ahead;
    }
    const std::string raw = lexer_.text().substr(first.begin, last_end - first.begin);
    temporal::Instant inst;
    try {
      inst = temporal::parse_instant(raw);
    } catch (const Error&) {
      fail("malformed instant '" + raw + "'");
    }
    for (std::size_t k = 0; k < ahead; ++k) next();
    return inst;
  }

  SemType parse_type() {
    if (try_kw("String")) return SemType::text();
    if (try_kw("Boolean")) return SemType::boolean();
    if (try_kw("Short") || try_kw("Long")) return SemType::integer();
    if (is_kw("Unsigned")) {
      next();
      expect_kw("Short");
      return SemType::integer();
    }
    if (try_kw("Float") || try_kw("Double")) return SemType::real();
    fail("expected a type");
  }

  SemType parse_full_type() {
    if (is_kw("Set") || is_kw("List")) {
      const bool is_set = peek().text == "Set";
      next();
      expect_punct("<");
      SemType elem;
      if (is_scalar_type() || is_kw("Struct") || is_kw("Set") || is_kw("List"))
        elem = parse_full_type();
      else
        elem = SemType::ref(expect_ident("element class"));
      expect_punct(">");
      return is_set ? SemType::set_of(std::move(elem)) : SemType::list_of(std::move(elem));
    }
    if (is_kw("Struct")) {
      next();
      const std::string tag = expect_ident("struct type name");
      expect_punct("{");
      std::vector<std::pair<std::string, SemType>> fields;
      while (!try_punct("}")) {
        SemType ft = parse_full_type();
        const std::string fname = expect_ident("struct field name");
        fields.emplace_back(fname, std::move(ft));
        if (!try_punct(",")) {
          expect_punct("}");
          break;
        }
      }
      return SemType::structure(tag, std::move(fields));
    }
    return parse_type();
  }

  bool is_scalar_type() const {
    return is_kw("String") || is_kw("Boolean") || is_kw("Short") || is_kw("Long") ||
           is_kw("Unsigned") || is_kw("Float") || is_kw("Double");
  }

  std::string parse_dotted() {
    std::string path = expect_ident("property path");
    while (is_punct(".")) {
      next();
      path += "." + expect_ident("path segment");
    }
    return path;
  }

  // --- predicates ---

  Value parse_literal() {
    if (peek().kind == Token::Kind::String) return Value::text(next().text);
    bool neg = false;
    if (is_punct("-")) {
      next();
      neg = true;
    }
    if (peek().kind == Token::Kind::Number) {
      const Token t = next();
      if (t.is_float) {
        const double d = std::stod(t.text);
        return Value::real(neg ? -d : d);
      }
      const std::int64_t v = std::stoll(t.text);
      return Value::integer(neg ? -v : v);
    }
    if (try_kw("true")) return Value::boolean(true);
    if (try_kw("false")) return Value::boolean(false);
    if (try_kw("null")) return Value::null();
    fail("expected a literal");
  }

  PredOperand parse_pred_operand(bool binder_paths) {
    if (peek().kind != Token::Kind::Ident ||
        ((peek().text == "true" || peek().text == "false" || peek().text == "null") &&
         !is_punct(".", 1)))
      return PredOperand::make_literal(parse_literal());
    std::string first = expect_ident("operand");
    std::vector<std::string> segs;
    while (is_punct(".")) {
      next();
      segs.push_back(expect_ident("path segment"));
    }
    if (segs.empty()) {
      if (binder_paths) return PredOperand::make_binder(first);
      return PredOperand::make_path("", {first});
    }
    if (binder_paths) return PredOperand::make_path(first, segs);
    segs.insert(segs.begin(), first);
    return PredOperand::make_path("", segs);
  }

  PredAtom parse_atom(bool binder_paths) {
    PredAtom atom;
    atom.lhs = parse_pred_operand(binder_paths);
    if (try_kw("in")) {
      atom.op = PredAtom::Op::In;
    } else if (try_punct("=")) {
      atom.op = PredAtom::Op::Eq;
    } else if (try_punct("!=")) {
      atom.op = PredAtom::Op::Ne;
    } else if (try_punct("<=")) {
      atom.op = PredAtom::Op::Le;
    } else if (try_punct(">=")) {
      atom.op = PredAtom::Op::Ge;
    } else if (try_punct("<")) {
      atom.op = PredAtom::Op::Lt;
    } else if (try_punct(">")) {
      atom.op = PredAtom::Op::Gt;
    } else {
      fail("expected a comparison operator");
    }
    atom.rhs = parse_pred_operand(binder_paths);
    return atom;
  }

  Dnf parse_dnf(bool binder_paths) {
    if (is_kw("true") && !is_punct(".", 1) && (peek(1).kind == Token::Kind::Punct &&
                                               (peek(1).text == "]" || peek(1).text == ";"))) {
      next();
      return Dnf::constant(true);
    }
    if (is_kw("false") && (peek(1).kind == Token::Kind::Punct &&
                           (peek(1).text == "]" || peek(1).text == ";"))) {
      next();
      return Dnf::constant(false);
    }
    Dnf d;
    while (true) {
      Conjunction conj;
      conj.push_back(parse_atom(binder_paths));
      while (try_kw("and")) conj.push_back(parse_atom(binder_paths));
      d.disjuncts.push_back(std::move(conj));
      if (!try_kw("or")) break;
    }
    return d;
  }

  // --- mapping expressions ---

  algebra::Binding parse_binding() {
    const std::string var = expect_ident("binding variable");
    return {var, parse_expr()};
  }

  std::vector<algebra::Binding> parse_operands(std::size_t min_count, std::size_t max_count) {
    expect_punct("(");
    std::vector<algebra::Binding> ops;
    ops.push_back(parse_binding());
    while (try_punct(",")) ops.push_back(parse_binding());
    expect_punct(")");
    if (ops.size() < min_count || ops.size() > max_count)
      fail("wrong number of operands");
    return ops;
  }

  std::vector<std::string> parse_prop_list() {
    expect_punct("[");
    std::vector<std::string> out;
    if (!is_punct("]")) {
      out.push_back(parse_dotted());
      while (try_punct(",")) out.push_back(parse_dotted());
    }
    expect_punct("]");
    return out;
  }

  // Strips the operand binder from binder-prefixed paths.
  static std::vector<std::string> strip_binders(std::vector<std::string> props,
                                                const std::vector<algebra::Binding>& ops) {
    for (auto& p : props) {
      for (const auto& op : ops) {
        if (p.size() > op.var.size() + 1 && p.compare(0, op.var.size(), op.var) == 0 &&
            p[op.var.size()] == '.') {
          p = p.substr(op.var.size() + 1);
          break;
        }
      }
    }
    return props;
  }

  algebra::ExprPtr parse_expr() {
    using algebra::MappingExpr;
    if (try_kw("project") || is_kw("mask")) {
      const bool is_mask = is_kw("mask");
      if (is_mask) next();
      auto props = parse_prop_list();
      auto ops = parse_operands(1, 1);
      props = strip_binders(std::move(props), ops);
      return is_mask ? algebra::mask(std::move(props), std::move(ops.front()))
                     : algebra::project(std::move(props), std::move(ops.front()));
    }
    if (try_kw("augment")) {
      expect_punct("[");
      std::vector<algebra::AugmentBinding> bindings;
      if (!is_punct("]")) {
        bindings.push_back(parse_augment_binding());
        while (try_punct(",")) bindings.push_back(parse_augment_binding());
      }
      expect_punct("]");
      auto ops = parse_operands(1, 1);
      for (auto& b : bindings)
        if (b.source == algebra::AugmentBinding::Source::AggCall) {
          std::vector<std::string> one{b.path};
          b.path = strip_binders(std::move(one), ops).front();
        }
      return algebra::augment(std::move(bindings), std::move(ops.front()));
    }
    if (try_kw("select")) {
      expect_punct("[");
      Dnf pred = parse_dnf(true);
      expect_punct("]");
      auto ops = parse_operands(1, 1);
      return algebra::select(std::move(pred), std::move(ops.front()));
    }
    if (try_kw("join")) {
      expect_punct("[");
      Dnf pred = parse_dnf(true);
      expect_punct("]");
      auto ops = parse_operands(2, 2);
      return algebra::join(std::move(pred), std::move(ops[0]), std::move(ops[1]));
    }
    if (try_kw("nest")) {
      auto props = parse_prop_list();
      expect_punct("::");
      const std::string attr = expect_ident("nest attribute name");
      auto ops = parse_operands(1, 1);
      props = strip_binders(std::move(props), ops);
      return algebra::nest(std::move(props), attr, std::move(ops.front()));
    }
    if (try_kw("unnest")) {
      auto props = parse_prop_list();
      auto ops = parse_operands(1, 1);
      props = strip_binders(std::move(props), ops);
      return algebra::unnest(std::move(props), std::move(ops.front()));
    }
    if (try_kw("union")) {
      auto ops = parse_operands(2, 2);
      return algebra::set_union(std::move(ops[0]), std::move(ops[1]));
    }
    if (try_kw("intersect")) {
      auto ops = parse_operands(2, 2);
      return algebra::set_intersect(std::move(ops[0]), std::move(ops[1]));
    }
    if (try_kw("diff")) {
      auto ops = parse_operands(2, 2);
      return algebra::set_diff(std::move(ops[0]), std::move(ops[1]));
    }
    if (try_kw("generalize")) {
      auto props = parse_prop_list();
      auto ops = parse_operands(1, 64);
      props = strip_binders(std::move(props), ops);
      return algebra::generalize(std::move(props), std::move(ops));
    }
    if (try_kw("specialize")) {
      expect_punct("[");
      Dnf pred = parse_dnf(true);
      expect_punct("]");
      auto ops = parse_operands(1, 64);
      return algebra::specialize(std::move(pred), std::move(ops));
    }
    if (peek().kind == Token::Kind::Ident) return algebra::class_ref(next().text);
    fail("expected a mapping expression");
  }

  algebra::AugmentBinding parse_augment_binding() {
    algebra::AugmentBinding b;
    b.new_prop = expect_ident("augmented property name");
    expect_punct(":");
    static const std::map<std::string, algebra::AugmentBinding::AggFn> fns = {
        {"count", algebra::AugmentBinding::AggFn::Count},
        {"sum", algebra::AugmentBinding::AggFn::Sum},
        {"avg", algebra::AugmentBinding::AggFn::Avg},
        {"max", algebra::AugmentBinding::AggFn::Max},
        {"min", algebra::AugmentBinding::AggFn::Min},
    };
    if (peek().kind == Token::Kind::Ident && fns.count(peek().text) && is_punct("(", 1)) {
      b.source = algebra::AugmentBinding::Source::AggCall;
      b.fn = fns.at(next().text);
      expect_punct("(");
      b.path = parse_dotted();
      expect_punct(")");
      return b;
    }
    if (peek().kind == Token::Kind::Ident && is_punct("::", 1)) {
      b.source = algebra::AugmentBinding::Source::MethodCall;
      const std::string cls = next().text;
      next();  // ::
      b.method = cls + "::" + expect_ident("method name");
      expect_punct("(");
      expect_punct(")");
      return b;
    }
    b.source = algebra::AugmentBinding::Source::SpecificType;
    b.type = parse_full_type();
    return b;
  }

  // --- interfaces ---

  DocInterface parse_interface(bool is_source) {
    expect_kw("interface");
    DocInterface itf;
    itf.is_source = is_source;
    itf.name = expect_ident("interface name");
    if (try_punct("(")) {
      expect_kw("extend");
      itf.extends.push_back(expect_ident("super class name"));
      while (try_punct(",")) itf.extends.push_back(expect_ident("super class name"));
      expect_punct(")");
    }
    expect_punct("{");
    while (!try_punct("}")) itf.members.push_back(parse_member());
    if (try_kw("with")) {
      expect_kw("temporal");
      expect_kw("filter");
      expect_punct("{");
      itf.has_tempo = true;
      if (!is_punct("}")) {
        itf.tempo_filter.push_back(expect_ident("temporal property"));
        while (try_punct(",")) itf.tempo_filter.push_back(expect_ident("temporal property"));
      }
      expect_punct("}");
      if (try_punct(",")) {
        expect_kw("archive");
        expect_kw("filter");
        expect_punct("{");
        itf.has_archive = true;
        if (!is_punct("}")) {
          itf.archive_filter.push_back(parse_archive_entry());
          while (try_punct(",")) itf.archive_filter.push_back(parse_archive_entry());
        }
        expect_punct("}");
      }
    }
    if (try_kw("mapping")) itf.mapping = parse_expr();
    try_punct(";");
    return itf;
  }

  std::pair<std::string, std::string> parse_archive_entry() {
    const std::string fn = expect_ident("aggregation function");
    expect_punct("(");
    const std::string prop = expect_ident("archived property");
    expect_punct(")");
    return {fn, prop};
  }

  DocMember parse_member() {
    DocMember m;
    if (try_kw("attribute")) {
      m.kind = DocMember::Kind::Attribute;
      m.type = parse_full_type();
      m.name = expect_ident("attribute name");
      expect_punct(";");
      return m;
    }
    if (try_kw("relationship")) {
      m.kind = DocMember::Kind::Relationship;
      if (is_kw("Set") || is_kw("List")) {
        const bool is_set = peek().text == "Set";
        next();
        expect_punct("<");
        SemType target = SemType::ref(expect_ident("relationship target class"));
        expect_punct(">");
        m.type = is_set ? SemType::set_of(std::move(target)) : SemType::list_of(std::move(target));
      } else {
        m.type = SemType::ref(expect_ident("relationship target class"));
      }
      m.name = expect_ident("relationship name");
      if (try_kw("inverse")) {
        const std::string cls = expect_ident("inverse class");
        expect_punct("::");
        m.inverse = cls + "::" + expect_ident("inverse property");
      }
      expect_punct(";");
      return m;
    }
    if (is_kw("method") && peek(1).kind == Token::Kind::Ident && is_punct("(", 2)) {
      next();
      m.kind = DocMember::Kind::MethodUsage;
      m.name = expect_ident("method name");
      expect_punct("(");
      expect_punct(")");
      bool more = true;
      while (more) {
        more = false;
        try_kw("uses");
        if (try_kw("properties")) {
          m.has_properties = true;
          expect_punct("{");
          if (!is_punct("}")) {
            m.uses_properties.push_back(parse_dotted());
            while (try_punct(",")) m.uses_properties.push_back(parse_dotted());
          }
          expect_punct("}");
          more = true;
        } else if (try_kw("methods")) {
          m.has_methods = true;
          expect_punct("{");
          if (!is_punct("}")) {
            m.uses_methods.push_back(parse_qualified_method());
            while (try_punct(",")) m.uses_methods.push_back(parse_qualified_method());
          }
          expect_punct("}");
          more = true;
        }
      }
      if (try_kw("objects")) {
        expect_kw("where");
        m.has_objects = true;
        m.objects_where = parse_dnf(false);
      }
      expect_punct(";");
      return m;
    }
    // A method signature: <Type> name();
    m.kind = DocMember::Kind::MethodSig;
    m.type = parse_full_type();
    m.name = expect_ident("method name");
    expect_punct("(");
    expect_punct(")");
    expect_punct(";");
    return m;
  }

  std::string parse_qualified_method() {
    const std::string cls = expect_ident("class name");
    expect_punct("::");
    return cls + "::" + expect_ident("method name");
  }

  DocEnvironment parse_environment() {
    expect_kw("environment");
    DocEnvironment env;
    env.name = expect_ident("environment name");
    expect_punct("{");
    while (!try_punct("}")) {
      if (try_kw("classes")) {
        expect_punct("{");
        if (!is_punct("}")) {
          env.classes.push_back(expect_ident("class name"));
          while (try_punct(",")) env.classes.push_back(expect_ident("class name"));
        }
        expect_punct("}");
        expect_punct(";");
      } else if (try_kw("refresh")) {
        expect_kw("every");
        const std::int64_t n = expect_int("refresh period count");
        env.refresh = {n, parse_unit()};
        expect_punct(";");
      } else if (try_kw("archive")) {
        expect_kw("where");
        model::ArchivePredicate pred;
        pred.terms.push_back(parse_archive_term());
        while (try_kw("and")) pred.terms.push_back(parse_archive_term());
        env.archive_predicate = std::move(pred);
        if (try_kw("mode")) {
          if (try_kw("classical")) {
            env.archive_mode = model::ArchiveMode::Classical;
          } else {
            expect_kw("temporal");
            expect_punct("(");
            env.archive_mode = model::ArchiveMode::Temporal;
            env.target_unit = parse_unit();
            expect_punct(")");
          }
        }
        expect_punct(";");
      } else {
        fail("expected classes, refresh or archive statement");
      }
    }
    try_punct(";");
    return env;
  }

  model::ArchivePredicate::Term parse_archive_term() {
    model::ArchivePredicate::Term term;
    if (try_kw("not")) {
      expect_kw("within");
      term.kind = model::ArchivePredicate::Term::Kind::NotWithin;
    } else if (try_kw("within")) {
      term.kind = model::ArchivePredicate::Term::Kind::Within;
    } else {
      expect_kw("before");
      term.kind = model::ArchivePredicate::Term::Kind::Before;
    }
    term.instant = parse_instant();
    return term;
  }

  Lexer lexer_;
  std::size_t pos_ = 0;
};

}  // namespace

SchemaDocument parse_schema(const std::string& text) { return Parser(text).parse(); }

// --- printer ------------------------------------------------------------------

namespace {

void print_member(std::ostringstream& out, const DocMember& m) {
  switch (m.kind) {
    case DocMember::Kind::Attribute:
      out << "        attribute " << m.type.to_string() << " " << m.name << ";\n";
      break;
    case DocMember::Kind::Relationship: {
      std::string t;
      if (m.type.kind == SemType::Kind::Set)
        t = "Set<" + m.type.element->class_name + ">";
      else if (m.type.kind == SemType::Kind::List)
        t = "List<" + m.type.element->class_name + ">";
      else
        t = m.type.class_name;
      out << "        relationship " << t << " " << m.name;
      if (!m.inverse.empty()) out << "\n            inverse " << m.inverse;
      out << ";\n";
      break;
    }
    case DocMember::Kind::MethodSig:
      out << "        " << m.type.to_string() << " " << m.name << "();\n";
      break;
    case DocMember::Kind::MethodUsage: {
      out << "        method " << m.name << "() uses";
      if (m.has_properties) {
        out << " properties {";
        for (std::size_t i = 0; i < m.uses_properties.size(); ++i)
          out << (i ? ", " : "") << m.uses_properties[i];
        out << "}";
      }
      if (m.has_methods) {
        out << " methods {";
        for (std::size_t i = 0; i < m.uses_methods.size(); ++i)
          out << (i ? ", " : "") << m.uses_methods[i];
        out << "}";
      }
      if (m.has_objects) out << " objects where " << format_dnf(m.objects_where);
      out << ";\n";
      break;
    }
  }
}

void print_interface(std::ostringstream& out, const DocInterface& itf, const char* indent) {
  out << indent << "interface " << itf.name;
  if (!itf.extends.empty()) {
    out << " (extend ";
    for (std::size_t i = 0; i < itf.extends.size(); ++i) out << (i ? ", " : "") << itf.extends[i];
    out << ")";
  }
  out << " {\n";
  std::ostringstream members;
  for (const auto& m : itf.members) print_member(members, m);
  std::string body = members.str();
  if (itf.is_source) {
    out << body;
    out << indent << "}\n";
    return;
  }
  // Warehouse interfaces print at top level with 4-space member indent.
  std::string reduced;
  std::istringstream in(body);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("        ", 0) == 0) line = line.substr(4);
    reduced += line + "\n";
  }
  out << reduced << "}\n";
  if (itf.has_tempo) {
    out << "with temporal filter {";
    for (std::size_t i = 0; i < itf.tempo_filter.size(); ++i)
      out << (i ? ", " : "") << itf.tempo_filter[i];
    out << "}";
    if (itf.has_archive) {
      out << ",\narchive filter {";
      for (std::size_t i = 0; i < itf.archive_filter.size(); ++i)
        out << (i ? ", " : "") << itf.archive_filter[i].first << "(" << itf.archive_filter[i].second
            << ")";
      out << "}";
    }
    out << "\n";
  }
  if (itf.mapping) out << "mapping " << algebra::format_expr(itf.mapping) << "\n";
}

}  // namespace

std::string print_schema(const SchemaDocument& doc) {
  std::ostringstream out;
  bool first = true;
  if (doc.has_warehouse_block) {
    out << "warehouse " << doc.warehouse_name;
    if (doc.default_refresh) {
      out << " {\n    refresh every " << doc.default_refresh->first << " "
          << temporal::unit_name(doc.default_refresh->second) << ";\n}\n";
    } else {
      out << ";\n";
    }
    first = false;
  }
  if (!doc.source_interfaces.empty()) {
    if (!first) out << "\n";
    first = false;
    out << "source {\n";
    for (std::size_t i = 0; i < doc.source_interfaces.size(); ++i) {
      if (i) out << "\n";
      print_interface(out, doc.source_interfaces[i], "    ");
    }
    out << "}\n";
  }
  for (const auto& itf : doc.warehouse_interfaces) {
    if (!first) out << "\n";
    first = false;
    print_interface(out, itf, "");
  }
  for (const auto& env : doc.environments) {
    if (!first) out << "\n";
    first = false;
    out << "environment " << env.name << " {\n    classes {";
    for (std::size_t i = 0; i < env.classes.size(); ++i) out << (i ? ", " : "") << env.classes[i];
    out << "};\n";
    if (env.refresh)
      out << "    refresh every " << env.refresh->first << " "
          << temporal::unit_name(env.refresh->second) << ";\n";
    if (env.archive_predicate) {
      out << "    archive where " << model::format_archive_predicate(*env.archive_predicate)
          << " mode ";
      if (env.archive_mode == model::ArchiveMode::Temporal)
        out << "temporal(" << temporal::unit_name(*env.target_unit) << ")";
      else
        out << "classical";
      out << ";\n";
    }
    out << "}\n";
  }
  return out.str();
}

// --- compilation ---------------------------------------------------------------

namespace {

void compile_source_interface(const DocInterface& itf, SourceSchema& schema,
                              std::vector<model::Diagnostic>& diags) {
  SourceClass cls;
  cls.name = itf.name;
  cls.supers = itf.extends;
  std::map<std::string, std::size_t> method_index;
  for (const auto& m : itf.members) {
    switch (m.kind) {
      case DocMember::Kind::Attribute: {
        if (find_property(cls.own_properties, m.name))
          diags.push_back({itf.name, "duplicate property " + m.name});
        cls.own_properties.push_back(Property::attribute(m.name, m.type, itf.name));
        break;
      }
      case DocMember::Kind::Relationship: {
        if (find_property(cls.own_properties, m.name))
          diags.push_back({itf.name, "duplicate property " + m.name});
        Property p = Property::attribute(m.name, m.type, itf.name);
        p.is_relationship = true;
        p.inverse = m.inverse;
        cls.own_properties.push_back(std::move(p));
        break;
      }
      case DocMember::Kind::MethodSig: {
        auto [it, fresh] = method_index.emplace(m.name, cls.own_methods.size());
        if (fresh) {
          MethodMeta meta;
          meta.name = m.name;
          meta.return_type = m.type;
          cls.own_methods.push_back(std::move(meta));
        } else {
          cls.own_methods[it->second].return_type = m.type;
        }
        break;
      }
      case DocMember::Kind::MethodUsage: {
        auto [it, fresh] = method_index.emplace(m.name, cls.own_methods.size());
        if (fresh) {
          MethodMeta meta;
          meta.name = m.name;
          cls.own_methods.push_back(std::move(meta));
        }
        MethodMeta& meta = cls.own_methods[method_index.at(m.name)];
        if (meta.has_usage) diags.push_back({itf.name, "duplicate usage metadata for " + m.name});
        meta.has_usage = true;
        meta.uses_properties = m.uses_properties;
        meta.uses_methods = m.uses_methods;
        meta.objects_where = m.objects_where;
        break;
      }
    }
  }
  try {
    schema.add_class(std::move(cls));
  } catch (const Error& e) {
    diags.push_back({itf.name, e.what()});
  }
}

std::vector<std::string> hierarchy_deps(const algebra::ExprPtr& e) {
  std::vector<std::string> deps;
  if (!e) return deps;
  if (e->kind == algebra::MappingExpr::Kind::Generalize ||
      e->kind == algebra::MappingExpr::Kind::Specialize) {
    for (const auto& op : e->operands)
      if (op.expr->kind == algebra::MappingExpr::Kind::ClassRef)
        deps.push_back(op.expr->class_name);
  }
  return deps;
}

}  // namespace

CompiledSchema compile(const SchemaDocument& doc) {
  CompiledSchema out;
  out.canonical_text = print_schema(doc);
  out.warehouse.name = doc.has_warehouse_block ? doc.warehouse_name : "warehouse";
  if (doc.default_refresh) out.warehouse.default_refresh = *doc.default_refresh;

  for (const auto& itf : doc.source_interfaces)
    compile_source_interface(itf, out.source, out.diagnostics);
  // Check inverse declarations resolve.
  for (const auto& sc : out.source.classes()) {
    for (const auto& p : sc.own_properties) {
      if (p.inverse.empty()) continue;
      const std::size_t sep = p.inverse.find("::");
      const SourceClass* target = out.source.find_class(p.inverse.substr(0, sep));
      if (!target || !find_property(target->own_properties, p.inverse.substr(sep + 2)))
        out.diagnostics.push_back({sc.name + "." + p.name, "inverse " + p.inverse + " does not resolve"});
    }
  }

  // Warehouse classes: shells first, then structures in dependency order.
  for (const auto& itf : doc.warehouse_interfaces) {
    model::WarehouseClass cls;
    cls.name = itf.name;
    cls.mapping = itf.mapping;
    cls.supers = itf.extends;
    cls.tempo_filter = itf.tempo_filter;
    for (const auto& [fn, prop] : itf.archive_filter) {
      const auto agg = model::agg_fn_from_name(fn);
      if (!agg) {
        out.diagnostics.push_back({itf.name, "unknown aggregation function " + fn});
        continue;
      }
      cls.archive_filter.emplace_back(prop, *agg);
    }
    if (out.warehouse.find_class(itf.name))
      out.diagnostics.push_back({itf.name, "duplicate warehouse class declaration"});
    else
      out.warehouse.classes.push_back(std::move(cls));
  }

  // Topological order over hierarchy operand references.
  std::map<std::string, std::vector<std::string>> deps;
  for (const auto& itf : doc.warehouse_interfaces) deps[itf.name] = hierarchy_deps(itf.mapping);
  std::vector<std::string> order;
  std::set<std::string> done, visiting;
  bool cycle = false;
  std::function<void(const std::string&)> visit = [&](const std::string& name) {
    if (done.count(name) || !out.warehouse.find_class(name)) return;
    if (visiting.count(name)) {
      cycle = true;
      return;
    }
    visiting.insert(name);
    for (const auto& d : deps[name]) visit(d);
    visiting.erase(name);
    done.insert(name);
    order.push_back(name);
  };
  for (const auto& c : out.warehouse.classes) visit(c.name);
  if (cycle) out.diagnostics.push_back({"warehouse", "mapping dependency cycle"});

  algebra::WarehouseExtensions exts;
  for (const auto& name : order) {
    model::WarehouseClass* cls = out.warehouse.find_class(name);
    const DocInterface* itf = nullptr;
    for (const auto& i : doc.warehouse_interfaces)
      if (i.name == name) itf = &i;
    if (cls->mapping) {
      try {
        cls->info = algebra::analyze_mapping(cls->mapping, out.source, &exts);
        cls->structure = cls->info.structure;
      } catch (const Error& e) {
        out.diagnostics.push_back({name, e.what()});
      }
    } else if (itf) {
      // Administrator-declared structure without an extraction mapping.
      for (const auto& m : itf->members) {
        if (m.kind == DocMember::Kind::Attribute) {
          cls->structure.push_back(Property::synthesized(m.name, m.type));
        } else if (m.kind == DocMember::Kind::Relationship) {
          Property p = Property::synthesized(m.name, m.type);
          p.is_relationship = true;
          p.inverse = m.inverse;
          cls->structure.push_back(std::move(p));
        }
      }
      cls->info.structure = cls->structure;
    }
    algebra::EvalResult view;
    view.info = cls->info;
    exts[name] = std::move(view);
    // Hierarchy edges.
    if (cls->mapping && cls->mapping->kind == algebra::MappingExpr::Kind::Specialize) {
      for (const auto& dep : deps[name])
        if (std::find(cls->supers.begin(), cls->supers.end(), dep) == cls->supers.end())
          cls->supers.push_back(dep);
    }
    if (cls->mapping && cls->mapping->kind == algebra::MappingExpr::Kind::Generalize) {
      for (const auto& dep : deps[name]) {
        model::WarehouseClass* operand = out.warehouse.find_class(dep);
        if (operand &&
            std::find(operand->supers.begin(), operand->supers.end(), name) == operand->supers.end())
          operand->supers.push_back(name);
      }
    }
  }

  // Declared members of mapped warehouse interfaces must exist in the
  // computed structure.
  for (const auto& itf : doc.warehouse_interfaces) {
    if (!itf.mapping) continue;
    const model::WarehouseClass* cls = out.warehouse.find_class(itf.name);
    if (!cls || cls->structure.empty()) continue;
    for (const auto& m : itf.members) {
      if (m.kind != DocMember::Kind::Attribute && m.kind != DocMember::Kind::Relationship) continue;
      if (!find_property(cls->structure, m.name))
        out.diagnostics.push_back(
            {itf.name, "declared property " + m.name + " is not produced by the mapping"});
    }
  }

  for (const auto& env : doc.environments) {
    model::Environment e;
    e.name = env.name;
    e.classes = env.classes;
    e.config.refresh_period = env.refresh;
    e.config.archive_predicate = env.archive_predicate;
    e.config.archive_mode = env.archive_mode;
    e.config.target_unit = env.target_unit;
    out.warehouse.environments.push_back(std::move(e));
  }

  auto model_diags = model::validate_schema(out.warehouse, out.source);
  out.diagnostics.insert(out.diagnostics.end(), model_diags.begin(), model_diags.end());

  // Augmented attributes bound to source methods stay Null until the method
  // is derivable; a non-derivable target is a diagnostic, not a crash.
  std::vector<std::pair<std::string, const algebra::AugmentBinding*>> method_calls;
  std::function<void(const std::string&, const algebra::ExprPtr&)> scan =
      [&](const std::string& owner, const algebra::ExprPtr& e) {
        if (!e) return;
        if (e->kind == algebra::MappingExpr::Kind::Augment)
          for (const auto& b : e->bindings)
            if (b.source == algebra::AugmentBinding::Source::MethodCall)
              method_calls.emplace_back(owner, &b);
        for (const auto& op : e->operands) scan(owner, op.expr);
      };
  for (const auto& c : out.warehouse.classes) scan(c.name, c.mapping);
  if (!method_calls.empty() && out.diagnostics.empty()) {
    try {
      auto analysis = analyzer::analyze_behavior(out.warehouse, out.source);
      for (const auto& [owner, b] : method_calls) {
        const analyzer::MethodVerdict* v = analysis.find(b->method);
        if (!v || !v->derivable)
          out.diagnostics.push_back({owner, "augmented property " + b->new_prop +
                                                " calls the non-derivable method " + b->method});
      }
    } catch (const Error& e) {
      out.diagnostics.push_back({"behavior", e.what()});
    }
  }
  return out;
}

CompiledSchema load_schema_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::IoError, "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return compile(parse_schema(buf.str()));
}

}  // namespace wdw::dsl
