#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "gliq/frontend.hpp"

namespace gliq {

namespace {

enum class Tok { Ident, Int, Sym, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  long long value = 0;
  Span span;
};

const char* const kSymbols[] = {"<=>", "::", "->", "=>", "<=", ">=", "==", "/=", "!=", "&&", "||", "??", "\\", "(", ")",
                                "[",   "]",  "{",  "}",  ",",  ";",  ":",  "|",  "=",  "<",  ">",  "+",  "-",  "*",  "/",
                                "?"};

const std::set<std::string> kKeywords = {"let",  "in",       "if",      "then", "else", "match", "def", "sig",
                                         "assume", "template", "measure", "true", "false", "not"};

std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n && i < src.size(); ++k, ++i) {
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
    if (c == '-' && i + 1 < src.size() && src[i + 1] == '-') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.span.line = line;
    t.span.col = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_' || src[j] == '\'' ||
                                src[j] == '#'))
        ++j;
      t.kind = Tok::Ident;
      t.text = src.substr(i, j - i);
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      t.kind = Tok::Int;
      t.text = src.substr(i, j - i);
      try {
        t.value = std::stoll(t.text);
      } catch (const std::exception&) {
        throw SourceError(t.span, "integer literal out of range");
      }
      advance(j - i);
    } else {
      bool matched = false;
      for (const char* s : kSymbols) {
        size_t n = std::char_traits<char>::length(s);
        if (src.compare(i, n, s) == 0) {
          t.kind = Tok::Sym;
          t.text = s;
          advance(n);
          matched = true;
          break;
        }
      }
      if (!matched) {
        Span sp{line, col, line, col + 1};
        throw SourceError(sp, std::string("unexpected character '") + c + "'");
      }
    }
    t.span.end_line = line;
    t.span.end_col = col;
    out.push_back(t);
  }
  Token end;
  end.kind = Tok::End;
  end.span = Span{line, col, line, col};
  out.push_back(end);
  return out;
}

const std::string kHoleVar = "?";

class Parser {
 public:
  Parser(std::vector<Token> toks, SourceProgram& out) : toks_(std::move(toks)), out_(out) {}

  void program() {
    while (!at_end()) out_.items.push_back(item());
  }

  TermPtr predicate_only(const std::string& binder) {
    auto t = pred();
    expect_end();
    if (mentions(t, kHoleVar)) throw SourceError(last_hole_, "`?` is not allowed here");
    return rename(t, binder, kNu);
  }

  RTypePtr type_only() {
    owner_ = "<type>";
    auto t = rtype({});
    expect_end();
    return t;
  }

  bool at_end() const { return toks_[pos_].kind == Tok::End; }
  void expect_end() {
    if (!at_end()) fail("unexpected '" + peek().text + "'");
  }

 private:
  // ---- token helpers ----
  const Token& peek(size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  bool sym(const std::string& s, size_t k = 0) const { return peek(k).kind == Tok::Sym && peek(k).text == s; }
  bool kw(const std::string& s, size_t k = 0) const { return peek(k).kind == Tok::Ident && peek(k).text == s; }
  bool ident(size_t k = 0) const { return peek(k).kind == Tok::Ident && !kKeywords.count(peek(k).text); }
  Token next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  [[noreturn]] void fail(const std::string& msg) const { throw SourceError(peek().span, msg); }

  Token expect_sym(const std::string& s) {
    if (!sym(s)) fail("expected '" + s + "' but found '" + (at_end() ? std::string("end of input") : peek().text) + "'");
    return next();
  }
  void expect_kw(const std::string& s) {
    if (!kw(s)) fail("expected '" + s + "'");
    next();
  }
  Token expect_ident() {
    if (!ident()) fail("expected a name but found '" + (at_end() ? std::string("end of input") : peek().text) + "'");
    return next();
  }
  Span prev_span() const { return toks_[pos_ > 0 ? pos_ - 1 : 0].span; }
  Span from(const Span& start) const { return Span::join(start, prev_span()); }

  // ---- items ----
  surface::Item item() {
    surface::Item it;
    Span start = peek().span;
    if (kw("sig") || kw("assume")) {
      it.kind = kw("sig") ? surface::ItemKind::Sig : surface::ItemKind::Assume;
      next();
      it.name = expect_ident().text;
      expect_sym("::");
      owner_ = it.name;
      it.type = rtype({});
    } else if (kw("def")) {
      next();
      it.kind = surface::ItemKind::Def;
      it.name = expect_ident().text;
      while (ident()) {
        auto t = next();
        it.params.emplace_back(t.text, t.span);
      }
      expect_sym("=");
      owner_ = it.name;
      it.body = expr();
    } else if (kw("template")) {
      next();
      it.kind = surface::ItemKind::Template;
      it.tmpl = template_item();
    } else if (kw("measure")) {
      next();
      it.kind = surface::ItemKind::Measure;
      it.name = expect_ident().text;
      expect_sym(":");
      it.measure.arg = base();
      expect_sym("->");
      it.measure.result = base();
      if (out_.measures.count(it.name)) throw SourceError(from(start), "duplicate measure '" + it.name + "'");
      out_.measures[it.name] = it.measure;
    } else {
      fail("expected 'sig', 'assume', 'def', 'template' or 'measure'");
    }
    it.span = from(start);
    return it;
  }

  Template template_item() {
    std::vector<std::pair<std::string, Sort>> binders;
    do {
      if (!binders.empty()) expect_sym(",");
      auto n = expect_ident().text;
      expect_sym(":");
      binders.emplace_back(n, base());
    } while (sym(","));
    expect_sym("=>");
    Span at = peek().span;
    auto body = pred();
    if (mentions(body, kHoleVar)) throw SourceError(last_hole_, "`?` is not allowed in a template");
    Template t;
    t.origin = TemplateOrigin::User;
    t.binder = binders[0].second;
    Subst theta{{binders[0].first, var(kNu)}};
    SortEnv sorts{{kNu, binders[0].second}};
    for (size_t i = 1; i < binders.size(); ++i) {
      theta[binders[i].first] = var(slot_var(i - 1));
      t.slots.push_back(binders[i].second);
      sorts[slot_var(i - 1)] = binders[i].second;
    }
    t.body = subst(body, theta);
    if (sort_of(t.body, sorts, out_.measures) != Sort::Bool) throw SourceError(from(at), "template is not a well-sorted predicate");
    return t;
  }

  // ---- types ----
  Sort base() {
    if (kw("Int") || kw("Bool")) return next().text == "Int" ? Sort::Int : Sort::Bool;
    if (kw("List")) {
      next();
      if (!kw("Int")) fail("only `List Int` is supported");
      next();
      return Sort::List;
    }
    if (sym("[")) {
      next();
      if (!kw("Int")) fail("only `[Int]` is supported");
      next();
      expect_sym("]");
      return Sort::List;
    }
    fail("expected a base type (Int, Bool, List Int)");
  }

  RTypePtr rtype(Scope scope) {
    std::string arg;
    if (ident() && sym(":", 1)) {
      arg = next().text;
      next();
    }
    auto t = btype(scope, arg);
    if (sym("->")) {
      next();
      std::string name = arg.empty() ? "_a" + std::to_string(hidden_++) : arg;
      if (t->is_base()) scope.emplace_back(name, t->base().base);
      auto r = rtype(scope);
      return make_fun(name, t, r);
    }
    return t;
  }

  RTypePtr btype(const Scope& scope, const std::string& arg) {
    if (sym("{")) {
      next();
      std::string binder;
      if (ident() && sym(":", 1)) {
        binder = next().text;
        next();
      }
      Sort b = base();
      expect_sym("|");
      std::string display = !binder.empty() ? binder : !arg.empty() ? arg : "v";
      std::vector<std::string> names;
      if (!binder.empty()) names.push_back(binder);
      if (!arg.empty()) names.push_back(arg);
      if (names.empty()) names.push_back("v");
      auto g = gradual_pred(scope, b, names, display);
      expect_sym("}");
      return make_base(b, g, display);
    }
    if (sym("(")) {
      next();
      auto t = rtype(scope);
      expect_sym(")");
      return t;
    }
    Sort b = base();
    return make_base(b, mk_true(), arg.empty() ? "v" : arg);
  }

  GPred gradual_pred(const Scope& scope, Sort b, const std::vector<std::string>& names, const std::string& display) {
    Span start = peek().span;
    auto p = pred();
    Subst theta;
    for (const auto& n : names) theta[n] = var(kNu);
    p = subst(p, theta);
    std::vector<TermPtr> rest;
    bool hole = false;
    for (const auto& c : conjuncts(p)) {
      if (c->kind == TermKind::Var && c->name == kHoleVar) {
        hole = true;
        continue;
      }
      if (mentions(c, kHoleVar)) throw SourceError(last_hole_, "`?` may only appear as a top-level conjunct");
      rest.push_back(c);
    }
    auto stat = conj(rest);
    SortEnv sorts;
    for (const auto& [n, s] : scope) sorts[n] = s;
    sorts[kNu] = b;
    (void)start;
    if (!hole) return precise(stat);
    GradualSource src;
    src.id = static_cast<int>(out_.sources.size());
    src.span = last_hole_;
    src.sort = b;
    src.binder = display;
    src.static_part = stat;
    src.arrow_scope = scope;
    src.owner = owner_;
    out_.sources.push_back(src);
    return gradual(stat, src.id);
  }

  // ---- predicates ----
  TermPtr pred() {
    auto l = pred_imp();
    while (sym("<=>")) {
      next();
      l = iff(l, pred_imp());
    }
    return l;
  }
  TermPtr pred_imp() {
    auto l = pred_or();
    if (sym("=>")) {
      next();
      return implies(l, pred_imp());
    }
    return l;
  }
  TermPtr pred_or() {
    std::vector<TermPtr> parts{pred_and()};
    while (sym("||")) {
      next();
      parts.push_back(pred_and());
    }
    return parts.size() == 1 ? parts[0] : disj(parts);
  }
  TermPtr pred_and() {
    std::vector<TermPtr> parts{pred_not()};
    while (sym("&&")) {
      next();
      parts.push_back(pred_not());
    }
    if (parts.size() == 1) return parts[0];
    // keep `true && ?` distinguishable from `?` is unnecessary: both mean ?.
    return conj(parts);
  }
  TermPtr pred_not() {
    if (kw("not")) {
      next();
      auto a = pred_not();
      Term t;
      t.kind = TermKind::Not;
      t.args = {a};
      return std::make_shared<const Term>(std::move(t));
    }
    return pred_cmp();
  }
  TermPtr pred_cmp() {
    auto l = pred_add();
    static const std::pair<const char*, CmpOp> ops[] = {{"<=", CmpOp::Le}, {">=", CmpOp::Ge}, {"==", CmpOp::Eq},
                                                         {"/=", CmpOp::Ne}, {"!=", CmpOp::Ne}, {"<", CmpOp::Lt},
                                                         {">", CmpOp::Gt},  {"=", CmpOp::Eq}};
    for (const auto& [s, op] : ops) {
      if (sym(s)) {
        next();
        return cmp(op, l, pred_add());
      }
    }
    return l;
  }
  TermPtr pred_add() {
    auto l = pred_mul();
    while (sym("+") || sym("-")) {
      bool plus = next().text == "+";
      l = arith(plus ? ArithOp::Add : ArithOp::Sub, l, pred_mul());
    }
    return l;
  }
  TermPtr pred_mul() {
    auto l = pred_unary();
    while (sym("*")) {
      next();
      l = arith(ArithOp::Mul, l, pred_unary());
    }
    return l;
  }
  TermPtr pred_unary() {
    if (sym("-")) {
      next();
      auto a = pred_unary();
      if (a->kind == TermKind::IntConst) return int_const(-a->value);
      return arith(ArithOp::Sub, int_const(0), a);
    }
    if (ident() && out_.measures.count(peek().text) && pred_atom_start(1)) {
      auto m = next().text;
      return measure(m, pred_atom());
    }
    return pred_atom();
  }
  bool pred_atom_start(size_t k) const {
    return ident(k) || peek(k).kind == Tok::Int || sym("(", k) || kw("true", k) || kw("false", k);
  }
  TermPtr pred_atom() {
    if (peek().kind == Tok::Int) return int_const(next().value);
    if (kw("true") || kw("false")) return bool_const(next().text == "true");
    if (sym("?") || sym("??")) {
      last_hole_ = next().span;
      return var(kHoleVar);
    }
    if (sym("(")) {
      next();
      auto p = pred();
      expect_sym(")");
      return p;
    }
    if (ident()) {
      auto t = next();
      if (out_.measures.count(t.text)) throw SourceError(t.span, "measure '" + t.text + "' needs an argument");
      return var(t.text);
    }
    fail("expected a predicate");
  }

  // ---- expressions ----
  surface::ExprPtr mk(surface::Expr e) { return std::make_shared<const surface::Expr>(std::move(e)); }

  surface::ExprPtr var_expr(const std::string& n, Span s) {
    surface::Expr e;
    e.kind = surface::Kind::Var;
    e.name = n;
    e.span = s;
    return mk(std::move(e));
  }

  surface::ExprPtr binop(const std::string& op, Span opspan, surface::ExprPtr l, surface::ExprPtr r) {
    surface::Expr e;
    e.kind = surface::Kind::App;
    e.span = Span::join(l->span, r->span);
    e.args = {var_expr(op, opspan), std::move(l), std::move(r)};
    return mk(std::move(e));
  }

  surface::ExprPtr expr() {
    Span start = peek().span;
    if (kw("let")) {
      next();
      surface::Expr e;
      e.kind = surface::Kind::Let;
      e.name = expect_ident().text;
      if (sym("::")) {
        next();
        e.annot = rtype({});
      }
      expect_sym("=");
      auto bound = expr();
      expect_kw("in");
      auto body = expr();
      e.args = {bound, body};
      e.span = from(start);
      return mk(std::move(e));
    }
    if (kw("if")) {
      next();
      auto c = expr();
      expect_kw("then");
      auto t = expr();
      expect_kw("else");
      auto f = expr();
      surface::Expr e;
      e.kind = surface::Kind::If;
      e.args = {c, t, f};
      e.span = from(start);
      return mk(std::move(e));
    }
    if (sym("\\")) {
      next();
      surface::Expr e;
      e.kind = surface::Kind::Lam;
      e.name = expect_ident().text;
      if (sym(":")) {
        next();
        e.annot = btype({}, e.name);
      }
      expect_sym("->");
      e.args = {expr()};
      e.span = from(start);
      return mk(std::move(e));
    }
    if (kw("match")) {
      next();
      auto scrut = expr();
      expect_sym("{");
      expect_sym("[");
      expect_sym("]");
      expect_sym("->");
      auto nil = expr();
      expect_sym(";");
      expect_sym("(");
      surface::Expr e;
      e.kind = surface::Kind::Match;
      e.head = expect_ident().text;
      expect_sym(":");
      e.tail = expect_ident().text;
      expect_sym(")");
      expect_sym("->");
      auto cons = expr();
      if (sym(";")) next();
      expect_sym("}");
      e.args = {scrut, nil, cons};
      e.span = from(start);
      return mk(std::move(e));
    }
    return or_expr();
  }

  surface::ExprPtr or_expr() {
    auto l = and_expr();
    while (sym("||")) {
      auto s = next().span;
      l = binop("||", s, l, and_expr());
    }
    return l;
  }
  surface::ExprPtr and_expr() {
    auto l = cmp_expr();
    while (sym("&&")) {
      auto s = next().span;
      l = binop("&&", s, l, cmp_expr());
    }
    return l;
  }
  surface::ExprPtr cmp_expr() {
    auto l = add_expr();
    for (const char* op : {"==", "/=", "!=", "<=", ">=", "<", ">"}) {
      if (sym(op)) {
        auto s = next().span;
        std::string name = std::string(op) == "!=" ? "/=" : op;
        return binop(name, s, l, add_expr());
      }
    }
    return l;
  }
  surface::ExprPtr add_expr() {
    auto l = mul_expr();
    while (sym("+") || sym("-")) {
      auto t = next();
      l = binop(t.text, t.span, l, mul_expr());
    }
    return l;
  }
  surface::ExprPtr mul_expr() {
    auto l = unary_expr();
    while (sym("*") || sym("/")) {
      auto t = next();
      l = binop(t.text, t.span, l, unary_expr());
    }
    return l;
  }
  surface::ExprPtr unary_expr() {
    Span start = peek().span;
    if (kw("not")) {
      next();
      auto a = unary_expr();
      surface::Expr e;
      e.kind = surface::Kind::App;
      e.args = {var_expr("not", start), a};
      e.span = from(start);
      return mk(std::move(e));
    }
    if (sym("-")) {
      next();
      auto a = unary_expr();
      if (a->kind == surface::Kind::Int) {
        surface::Expr e = *a;
        e.value = -e.value;
        e.span = from(start);
        return mk(std::move(e));
      }
      surface::Expr zero;
      zero.kind = surface::Kind::Int;
      zero.span = start;
      return binop("-", start, mk(std::move(zero)), a);
    }
    return app_expr();
  }
  bool atom_start() const {
    return ident() || peek().kind == Tok::Int || sym("(") || sym("[") || kw("true") || kw("false");
  }
  surface::ExprPtr app_expr() {
    Span start = peek().span;
    auto f = atom();
    if (!atom_start()) return f;
    surface::Expr e;
    e.kind = surface::Kind::App;
    e.args = {f};
    while (atom_start()) e.args.push_back(atom());
    e.span = from(start);
    return mk(std::move(e));
  }
  surface::ExprPtr atom() {
    Span start = peek().span;
    if (peek().kind == Tok::Int) {
      surface::Expr e;
      e.kind = surface::Kind::Int;
      e.value = next().value;
      e.span = start;
      return mk(std::move(e));
    }
    if (kw("true") || kw("false")) {
      surface::Expr e;
      e.kind = surface::Kind::Bool;
      e.value = next().text == "true";
      e.span = start;
      return mk(std::move(e));
    }
    if (ident()) {
      auto t = next();
      return var_expr(t.text, t.span);
    }
    if (sym("(")) {
      next();
      auto e = expr();
      expect_sym(")");
      return e;
    }
    if (sym("[")) {
      next();
      surface::Expr e;
      e.kind = surface::Kind::List;
      if (!sym("]")) {
        e.args.push_back(expr());
        while (sym(",")) {
          next();
          e.args.push_back(expr());
        }
      }
      expect_sym("]");
      e.span = from(start);
      return mk(std::move(e));
    }
    fail(at_end() ? "unexpected end of input" : "unexpected '" + peek().text + "'");
  }

  std::vector<Token> toks_;
  size_t pos_ = 0;
  SourceProgram& out_;
  int hidden_ = 0;
  std::string owner_;
  Span last_hole_;
};

}  // namespace

SourceProgram parse(const std::string& text, const std::string& file) {
  SourceProgram out;
  out.file = file;
  out.text = text;
  Parser p(lex(text), out);
  p.program();
  return out;
}

TermPtr parse_predicate(const std::string& text, const std::string& binder, const MeasureTable& measures) {
  SourceProgram scratch;
  scratch.measures = measures;
  Parser p(lex(text), scratch);
  return p.predicate_only(binder);
}

RTypePtr parse_type(const std::string& text) {
  SourceProgram scratch;
  Parser p(lex(text), scratch);
  return p.type_only();
}

Program load_program(const std::string& text, const std::string& file) { return normalize(parse(text, file)); }

Program load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_program(ss.str(), path);
}

}  // namespace gliq
