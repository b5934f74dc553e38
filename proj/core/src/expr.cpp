#include "levyfdt/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

#include "levyfdt/errors.hpp"

namespace levyfdt {

struct Expression::Node {
  enum class Kind { number, variable, neg, add, sub, mul, div, pow, call };
  enum class Func { tanh, exp, sqrt, abs, sin, cos, log };

  Kind kind;
  double value = 0.0;
  std::size_t index = 0;
  Func func = Func::tanh;
  std::unique_ptr<Node> lhs;
  std::unique_ptr<Node> rhs;
};

namespace {

using Node = Expression::Node;

double eval(const Node& n, std::span<const double> v) {
  switch (n.kind) {
    case Node::Kind::number: return n.value;
    case Node::Kind::variable: return v[n.index];
    case Node::Kind::neg: return -eval(*n.lhs, v);
    case Node::Kind::add: return eval(*n.lhs, v) + eval(*n.rhs, v);
    case Node::Kind::sub: return eval(*n.lhs, v) - eval(*n.rhs, v);
    case Node::Kind::mul: return eval(*n.lhs, v) * eval(*n.rhs, v);
    case Node::Kind::div: return eval(*n.lhs, v) / eval(*n.rhs, v);
    case Node::Kind::pow: return std::pow(eval(*n.lhs, v), eval(*n.rhs, v));
    case Node::Kind::call: {
      const double a = eval(*n.lhs, v);
      switch (n.func) {
        case Node::Func::tanh: return std::tanh(a);
        case Node::Func::exp: return std::exp(a);
        case Node::Func::sqrt: return std::sqrt(a);
        case Node::Func::abs: return std::abs(a);
        case Node::Func::sin: return std::sin(a);
        case Node::Func::cos: return std::cos(a);
        case Node::Func::log: return std::log(a);
      }
    }
  }
  return 0.0;
}

class Parser {
 public:
  Parser(std::string_view src, const std::vector<std::string>& vars) : src_(src), vars_(vars) {}

  std::unique_ptr<Node> parse() {
    auto root = expr();
    skip();
    if (pos_ != src_.size()) fail("unexpected trailing input");
    return root;
  }

 private:
  static std::unique_ptr<Node> make(Node::Kind k, std::unique_ptr<Node> a = nullptr,
                                    std::unique_ptr<Node> b = nullptr) {
    auto n = std::make_unique<Node>();
    n->kind = k;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("expression '" + std::string(src_) + "': " + what + " at position " +
                      std::to_string(pos_));
  }

  void skip() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::unique_ptr<Node> expr() {
    auto lhs = term();
    for (;;) {
      if (accept('+')) lhs = make(Node::Kind::add, std::move(lhs), term());
      else if (accept('-')) lhs = make(Node::Kind::sub, std::move(lhs), term());
      else return lhs;
    }
  }

  std::unique_ptr<Node> term() {
    auto lhs = unary();
    for (;;) {
      if (accept('*')) lhs = make(Node::Kind::mul, std::move(lhs), unary());
      else if (accept('/')) lhs = make(Node::Kind::div, std::move(lhs), unary());
      else return lhs;
    }
  }

  std::unique_ptr<Node> unary() {
    if (accept('-')) return make(Node::Kind::neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  std::unique_ptr<Node> power() {
    auto base = atom();
    if (accept('^')) return make(Node::Kind::pow, std::move(base), unary());
    return base;
  }

  std::unique_ptr<Node> atom() {
    skip();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    if (accept('(')) {
      auto inner = expr();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return name();
    fail(std::string("unexpected character '") + c + "'");
  }

  std::unique_ptr<Node> number() {
    auto n = make(Node::Kind::number);
    const char* first = src_.data() + pos_;
    const char* last = src_.data() + src_.size();
    auto [ptr, ec] = std::from_chars(first, last, n->value);
    if (ec != std::errc()) fail("malformed number");
    pos_ += static_cast<std::size_t>(ptr - first);
    return n;
  }

  std::unique_ptr<Node> name() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      ++pos_;
    }
    const std::string id(src_.substr(start, pos_ - start));
    if (accept('(')) {
      static const std::pair<const char*, Node::Func> funcs[] = {
          {"tanh", Node::Func::tanh}, {"exp", Node::Func::exp}, {"sqrt", Node::Func::sqrt},
          {"abs", Node::Func::abs},   {"sin", Node::Func::sin}, {"cos", Node::Func::cos},
          {"log", Node::Func::log}};
      for (const auto& [fname, f] : funcs) {
        if (id == fname) {
          auto n = make(Node::Kind::call, expr());
          n->func = f;
          if (!accept(')')) fail("expected ')' after function argument");
          return n;
        }
      }
      fail("unknown function '" + id + "'");
    }
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (vars_[i] == id) {
        auto n = make(Node::Kind::variable);
        n->index = i;
        return n;
      }
    }
    if (id == "pi" || id == "e") {
      auto n = make(Node::Kind::number);
      n->value = id == "pi" ? std::numbers::pi : std::numbers::e;
      return n;
    }
    fail("unknown name '" + id + "'");
  }

  std::string_view src_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(std::string_view source, std::vector<std::string> variables) {
  Parser p(source, variables);
  std::shared_ptr<const Node> root = p.parse();
  return Expression(std::string(source), std::move(root), variables.size());
}

double Expression::operator()(std::span<const double> values) const {
  if (values.size() < arity_) {
    throw InvalidArgument("expression '" + source_ + "' needs " + std::to_string(arity_) +
                          " variable values");
  }
  return eval(*root_, values);
}

}  // namespace levyfdt
