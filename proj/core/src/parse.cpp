#include "cartanlab/parse.hpp"

#include <cctype>

namespace cartanlab {

namespace {

class Parser {
 public:
  explicit Parser(const std::string& text) : s_(text) {}

  Expr run() {
    Expr e = parse_sum();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  const std::string& s_;
  size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, pos_);
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
  }

  bool peek_is(char c) {
    skip_ws();
    return pos_ < s_.size() && s_[pos_] == c;
  }

  bool accept(char c) {
    if (!peek_is(c)) return false;
    ++pos_;
    return true;
  }

  void expect(char c, const char* what) {
    if (!accept(c)) fail(std::string("expected '") + c + "' " + what);
  }

  Expr parse_sum() {
    skip_ws();
    bool neg = false;
    // leading sign
    if (accept('-')) neg = true;
    else accept('+');
    Expr e = parse_term();
    if (neg) e = -e;
    while (true) {
      skip_ws();
      if (accept('+'))
        e = e + parse_term();
      else if (accept('-'))
        e = e - parse_term();
      else
        return e;
    }
  }

  Expr parse_term() {
    Expr e = parse_unary();
    while (true) {
      skip_ws();
      if (accept('*'))
        e = e * parse_unary();
      else if (accept('/'))
        e = e / parse_unary();
      else
        return e;
    }
  }

  Expr parse_unary() {
    skip_ws();
    if (accept('-')) return -parse_unary();
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    skip_ws();
    if (accept('^')) return pow(base, parse_unary());
    return base;
  }

  Expr parse_primary() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c))) return parse_number();
    if (c == '(') {
      ++pos_;
      Expr e = parse_sum();
      expect(')', "to close parenthesis");
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
      return parse_ident();
    fail("unexpected character");
  }

  Expr parse_number() {
    size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
    return make_rational(Rational(s_.substr(start, pos_ - start), 10));
  }

  std::string read_name() {
    size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      ++pos_;
    return s_.substr(start, pos_ - start);
  }

  Expr parse_ident() {
    size_t start = pos_;
    std::string name = read_name();
    Session& sess = Session::instance();

    if (peek_is('(')) {
      if (name == "exp") {
        ++pos_;
        Expr a = parse_sum();
        expect(')', "to close exp");
        return make_exp(a);
      }
      if (name == "ln") {
        ++pos_;
        Expr a = parse_sum();
        expect(')', "to close ln");
        return make_ln(a);
      }
      if (name == "D") {
        ++pos_;
        return parse_derivative(start);
      }
      ++pos_;
      return parse_application(name, start);
    }

    // jet shorthand u_tx: base before the underscore names a declared
    // function symbol, every letter after it one of its arguments
    size_t us = name.find('_');
    if (us != std::string::npos && us > 0) {
      FuncSymbolId f = sess.find_func(name.substr(0, us));
      if (f.valid()) {
        std::vector<int> deriv(sess.func_args(f).size(), 0);
        for (size_t i = us + 1; i < name.size(); ++i) {
          int slot = arg_slot(f, std::string(1, name[i]));
          if (slot < 0) {
            pos_ = start + i;
            fail("'" + std::string(1, name[i]) + "' is not an argument of '" +
                 name.substr(0, us) + "'");
          }
          ++deriv[slot];
        }
        return make_func(f, std::move(deriv));
      }
    }
    return make_var(name);
  }

  int arg_slot(FuncSymbolId f, const std::string& var) const {
    Session& sess = Session::instance();
    VarId v = sess.find_var(var);
    if (!v.valid()) return -1;
    const auto& args = sess.func_args(f);
    for (size_t i = 0; i < args.size(); ++i)
      if (args[i] == v) return static_cast<int>(i);
    return -1;
  }

  Expr parse_derivative(size_t start) {
    Session& sess = Session::instance();
    skip_ws();
    std::string fname = read_name();
    if (fname.empty()) fail("expected function name in D(...)");
    FuncSymbolId f = sess.find_func(fname);
    if (!f.valid()) {
      pos_ = start;
      fail("unknown function symbol '" + fname + "' in D(...)");
    }
    std::vector<int> deriv(sess.func_args(f).size(), 0);
    while (accept(',')) {
      skip_ws();
      size_t vpos = pos_;
      std::string vname = read_name();
      int slot = arg_slot(f, vname);
      if (slot < 0) {
        pos_ = vpos;
        fail("'" + vname + "' is not an argument of '" + fname + "'");
      }
      ++deriv[slot];
    }
    expect(')', "to close D(...)");
    return make_func(f, std::move(deriv));
  }

  Expr parse_application(const std::string& fname, size_t start) {
    Session& sess = Session::instance();
    std::vector<VarId> args;
    do {
      skip_ws();
      std::string vname = read_name();
      if (vname.empty()) fail("expected variable name in function application");
      args.push_back(sess.var(vname));
    } while (accept(','));
    expect(')', "to close function application");
    FuncSymbolId f = sess.find_func(fname);
    if (f.valid()) {
      if (sess.func_args(f) != args) {
        pos_ = start;
        fail("function '" + fname + "' applied to different arguments than declared");
      }
    } else {
      f = sess.func(fname, args);
    }
    return make_func(f);
  }
};

}  // namespace

Expr parse(const std::string& text) { return Parser(text).run(); }

}  // namespace cartanlab
