#include "finmet/expr.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <cmath>
#include <deque>
#include <functional>
#include <mutex>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace finmet {

namespace detail {

struct Node {
  NodeKind kind = NodeKind::constant;
  double value = 0.0;
  Coordinate coord{};
  std::string name;
  Rational exponent{};
  Func func = Func::exp;
  std::vector<Expression> children;
  std::size_t hash = 0;
};

}  // namespace detail

namespace {

using detail::Node;

std::size_t mix(std::size_t seed, std::size_t v) {
  // boost::hash_combine with a 64-bit constant
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

std::size_t hash_double(double v) {
  std::uint64_t bits = 0;
  static_assert(sizeof(bits) == sizeof(v));
  std::memcpy(&bits, &v, sizeof(v));
  return std::hash<std::uint64_t>{}(bits);
}

std::size_t structural_hash(const Node& n) {
  std::size_t h = static_cast<std::size_t>(n.kind) + 1;
  switch (n.kind) {
    case NodeKind::constant:
      h = mix(h, hash_double(n.value));
      break;
    case NodeKind::coordinate:
      h = mix(h, static_cast<std::size_t>(n.coord.kind));
      h = mix(h, static_cast<std::size_t>(n.coord.index));
      break;
    case NodeKind::parameter:
      h = mix(h, std::hash<std::string>{}(n.name));
      break;
    case NodeKind::power:
      h = mix(h, static_cast<std::size_t>(n.exponent.num + 1000));
      h = mix(h, static_cast<std::size_t>(n.exponent.den));
      break;
    case NodeKind::product:
    case NodeKind::sum:
      h = mix(h, hash_double(n.value));
      break;
    case NodeKind::function:
      h = mix(h, static_cast<std::size_t>(n.func));
      break;
  }
  for (const auto& c : n.children) h = mix(h, c.hash());
  return h;
}

struct NodePtrHash {
  std::size_t operator()(const Node* n) const { return n->hash; }
};

struct NodePtrEq {
  bool operator()(const Node* a, const Node* b) const {
    if (a->hash != b->hash || a->kind != b->kind) return false;
    switch (a->kind) {
      case NodeKind::constant:
      case NodeKind::product:
      case NodeKind::sum:
        if (std::memcmp(&a->value, &b->value, sizeof(double)) != 0) return false;
        break;
      case NodeKind::coordinate:
        if (a->coord != b->coord) return false;
        break;
      case NodeKind::parameter:
        if (a->name != b->name) return false;
        break;
      case NodeKind::power:
        if (!(a->exponent == b->exponent)) return false;
        break;
      case NodeKind::function:
        if (a->func != b->func) return false;
        break;
    }
    return a->children == b->children;
  }
};

class NodeTable {
 public:
  const Node* intern(Node&& candidate) {
    candidate.hash = structural_hash(candidate);
    std::lock_guard lock(mutex_);
    if (auto it = index_.find(&candidate); it != index_.end()) return *it;
    storage_.push_back(std::move(candidate));
    const Node* stored = &storage_.back();
    index_.insert(stored);
    return stored;
  }

  std::size_t size() {
    std::lock_guard lock(mutex_);
    return storage_.size();
  }

 private:
  std::mutex mutex_;
  std::deque<Node> storage_;
  std::unordered_set<const Node*, NodePtrHash, NodePtrEq> index_;
};

NodeTable& table() {
  static NodeTable t;
  return t;
}

Expression make_node(Node&& n) { return Expression(table().intern(std::move(n))); }

Expression make_constant(double v) {
  Node n;
  n.kind = NodeKind::constant;
  n.value = (v == 0.0) ? 0.0 : v;  // fold -0
  return make_node(std::move(n));
}

int kind_rank(NodeKind k) {
  switch (k) {
    case NodeKind::constant: return 0;
    case NodeKind::coordinate: return 1;
    case NodeKind::parameter: return 2;
    case NodeKind::power: return 3;
    case NodeKind::product: return 4;
    case NodeKind::sum: return 5;
    case NodeKind::function: return 6;
  }
  return 7;
}

std::strong_ordering compare_double(double a, double b) {
  if (a < b) return std::strong_ordering::less;
  if (a > b) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::strong_ordering compare_nodes(const Node* a, const Node* b) {
  if (a == b) return std::strong_ordering::equal;
  if (auto c = kind_rank(a->kind) <=> kind_rank(b->kind); c != 0) return c;
  switch (a->kind) {
    case NodeKind::constant:
      return compare_double(a->value, b->value);
    case NodeKind::coordinate:
      return a->coord <=> b->coord;
    case NodeKind::parameter:
      return a->name <=> b->name;
    case NodeKind::power:
      if (auto c = compare_nodes(a->children[0].node(), b->children[0].node()); c != 0) return c;
      return a->exponent.value() < b->exponent.value()   ? std::strong_ordering::less
             : a->exponent.value() > b->exponent.value() ? std::strong_ordering::greater
                                                          : std::strong_ordering::equal;
    case NodeKind::function:
      if (auto c = a->func <=> b->func; c != 0) return c;
      return compare_nodes(a->children[0].node(), b->children[0].node());
    case NodeKind::product:
    case NodeKind::sum: {
      const auto& ca = a->children;
      const auto& cb = b->children;
      const std::size_t m = std::min(ca.size(), cb.size());
      for (std::size_t i = 0; i < m; ++i) {
        if (auto c = compare_nodes(ca[i].node(), cb[i].node()); c != 0) return c;
      }
      if (auto c = ca.size() <=> cb.size(); c != 0) return c;
      return compare_double(a->value, b->value);
    }
  }
  return std::strong_ordering::equal;
}

bool less_expr(const Expression& a, const Expression& b) { return compare_nodes(a.node(), b.node()) < 0; }

Expression make_sum(std::span<const Expression> terms, double constant = 0.0);
Expression make_product(double coefficient, std::span<const Expression> factors);
Expression make_pow(Expression base, Rational e);

/// Splits c*rest so that sums can collect like terms.
std::pair<double, Expression> split_coefficient(const Expression& t) {
  const Node* n = t.node();
  if (n->kind == NodeKind::product) {
    if (n->value == 1.0) return {1.0, t};
    if (n->children.size() == 1) return {n->value, n->children[0]};
    Node rest;
    rest.kind = NodeKind::product;
    rest.value = 1.0;
    rest.children = n->children;
    return {n->value, make_node(std::move(rest))};
  }
  return {1.0, t};
}

Expression make_sum(std::span<const Expression> terms, double constant) {
  std::unordered_map<const Node*, double> coeff;
  std::vector<Expression> order;
  double acc = constant;

  std::function<void(const Expression&, double)> add = [&](const Expression& t, double scale) {
    const Node* n = t.node();
    if (n->kind == NodeKind::constant) {
      acc += scale * n->value;
      return;
    }
    if (n->kind == NodeKind::sum) {
      acc += scale * n->value;
      for (const auto& c : n->children) add(c, scale);
      return;
    }
    auto [c, key] = split_coefficient(t);
    auto [it, inserted] = coeff.try_emplace(key.node(), 0.0);
    if (inserted) order.push_back(key);
    it->second += scale * c;
  };
  for (const auto& t : terms) add(t, 1.0);

  std::vector<Expression> kept;
  kept.reserve(order.size());
  for (const auto& key : order) {
    if (coeff[key.node()] != 0.0) kept.push_back(key);
  }
  std::sort(kept.begin(), kept.end(), less_expr);

  std::vector<Expression> out;
  out.reserve(kept.size());
  for (const auto& key : kept) {
    const double c = coeff[key.node()];
    if (c == 1.0) {
      out.push_back(key);
    } else {
      const Expression k[] = {key};
      out.push_back(make_product(c, k));
    }
  }
  if (out.empty()) return make_constant(acc);
  if (out.size() == 1 && acc == 0.0) return out[0];
  Node n;
  n.kind = NodeKind::sum;
  n.value = acc == 0.0 ? 0.0 : acc;
  n.children = std::move(out);
  return make_node(std::move(n));
}

Expression make_product(double coefficient, std::span<const Expression> factors) {
  double c = coefficient;
  std::unordered_map<const Node*, Rational> expo;
  std::vector<Expression> order;

  std::function<void(const Expression&, Rational)> mul = [&](const Expression& f, Rational e) {
    const Node* n = f.node();
    if (n->kind == NodeKind::constant) {
      const double v = n->value;
      if ((e.is_integer() && (v != 0.0 || e.num > 0)) || v > 0.0) {
        c *= std::pow(v, e.value());
        return;
      }
    }
    if (n->kind == NodeKind::product && e.is_integer()) {
      c *= std::pow(n->value, e.num);
      for (const auto& ch : n->children) mul(ch, e);
      return;
    }
    if (n->kind == NodeKind::power && e.is_integer()) {
      mul(n->children[0], n->exponent * e);
      return;
    }
    auto [it, inserted] = expo.try_emplace(n, Rational(0));
    if (inserted) order.push_back(f);
    it->second = it->second + e;
  };
  for (const auto& f : factors) mul(f, Rational(1));

  if (c == 0.0) return make_constant(0.0);

  std::vector<Expression> out;
  bool refold = false;
  out.reserve(order.size());
  for (const auto& base : order) {
    const Rational e = expo[base.node()];
    if (e.num == 0) continue;
    Expression p = make_pow(base, e);
    if (p.is_constant()) {
      c *= p.value();
      continue;
    }
    // sqrt(P)*sqrt(P) collapses to the product P, whose factors may combine
    // with the remaining ones
    if (p.kind() == NodeKind::product) refold = true;
    out.push_back(p);
  }
  if (c == 0.0) return make_constant(0.0);
  if (refold) return make_product(c, out);
  std::sort(out.begin(), out.end(), less_expr);

  if (out.empty()) return make_constant(c);
  if (out.size() == 1 && c == 1.0) return out[0];
  if (out.size() == 1 && out[0].kind() == NodeKind::sum) {
    std::vector<Expression> scaled;
    const auto terms = out[0].children();
    scaled.reserve(terms.size());
    for (const auto& t : terms) {
      auto [tc, key] = split_coefficient(t);
      const Expression k[] = {key};
      scaled.push_back(make_product(c * tc, k));
    }
    return make_sum(scaled, c * out[0].value());
  }
  Node n;
  n.kind = NodeKind::product;
  n.value = c;
  n.children = std::move(out);
  return make_node(std::move(n));
}

Expression make_pow(Expression base, Rational e) {
  if (e.num == 0) return make_constant(1.0);
  if (e == Rational(1)) return base;
  const Node* b = base.node();
  if (b->kind == NodeKind::constant) {
    const double v = b->value;
    if (e.is_integer()) {
      if (v != 0.0 || e.num > 0) return make_constant(std::pow(v, e.num));
    } else if (v > 0.0) {
      return make_constant(std::pow(std::sqrt(v), e.num));
    } else if (v == 0.0 && e.num > 0) {
      return make_constant(0.0);
    }
  } else if (b->kind == NodeKind::power && e.is_integer()) {
    return make_pow(b->children[0], b->exponent * e);
  } else if (b->kind == NodeKind::product) {
    if (e.is_integer()) {
      std::vector<Expression> fs;
      fs.reserve(b->children.size());
      for (const auto& ch : b->children) fs.push_back(make_pow(ch, e));
      return make_product(std::pow(b->value, e.num), fs);
    }
    if (b->value > 0.0 && b->value != 1.0) {
      Node rest;
      rest.kind = NodeKind::product;
      rest.value = 1.0;
      rest.children = b->children;
      const Expression inner = make_node(std::move(rest));
      Node p;
      p.kind = NodeKind::power;
      p.exponent = e;
      p.children = {inner};
      const Expression fs[] = {make_node(std::move(p))};
      return make_product(std::pow(std::sqrt(b->value), e.num), fs);
    }
  }
  Node n;
  n.kind = NodeKind::power;
  n.exponent = e;
  n.children = {base};
  return make_node(std::move(n));
}

Expression make_func(Func f, Expression arg) {
  if (arg.is_constant()) {
    const double v = arg.value();
    switch (f) {
      case Func::exp: return make_constant(std::exp(v));
      case Func::log:
        if (v > 0.0) return make_constant(std::log(v));
        break;
      case Func::sin: return make_constant(std::sin(v));
      case Func::cos: return make_constant(std::cos(v));
      case Func::abs: return make_constant(std::fabs(v));
    }
  }
  Node n;
  n.kind = NodeKind::function;
  n.func = f;
  n.children = {arg};
  return make_node(std::move(n));
}

// --- printing -------------------------------------------------------------

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string print(const Expression& e);

bool is_atomic(const Expression& e) {
  switch (e.kind()) {
    case NodeKind::constant: return e.value() >= 0.0;
    case NodeKind::coordinate:
    case NodeKind::parameter:
    case NodeKind::function: return true;
    case NodeKind::power: return e.exponent() == Rational(1, 2);
    default: return false;
  }
}

std::string wrap(const Expression& e) { return is_atomic(e) ? print(e) : "(" + print(e) + ")"; }

std::string print_power(const Expression& base, Rational e) {
  if (e == Rational(1)) return print(base);
  if (e == Rational(1, 2)) return "sqrt(" + print(base) + ")";
  std::string s = wrap(base) + "^";
  if (e.is_integer()) {
    s += e.num >= 0 ? std::to_string(e.num) : "(" + std::to_string(e.num) + ")";
  } else {
    s += "(" + std::to_string(e.num) + "/2)";
  }
  return s;
}

// Factor as it appears after '*' or '/': powers print with their base wrapped,
// so only sums, products and negative constants need parentheses.
std::string print_factor(const Expression& f) {
  if (f.kind() == NodeKind::power) return print(f);
  return wrap(f);
}

std::string print_product(const Expression& e) {
  const double c = e.value();
  std::vector<std::string> num, den;
  for (const auto& f : e.children()) {
    if (f.kind() == NodeKind::power && f.exponent().num < 0) {
      const Rational inv{-f.exponent().num, f.exponent().den};
      den.push_back(inv == Rational(1) ? wrap(f.children()[0]) : print_power(f.children()[0], inv));
    } else {
      num.push_back(print_factor(f));
    }
  }
  std::string s;
  const double mag = std::fabs(c);
  if (c < 0.0) s += "-";
  bool first = true;
  if (mag != 1.0 || num.empty()) {
    s += format_number(mag);
    first = false;
  }
  for (const auto& f : num) {
    if (!first) s += "*";
    s += f;
    first = false;
  }
  for (const auto& f : den) s += "/" + f;
  return s;
}

std::string print_sum(const Expression& e) {
  std::string s;
  bool first = true;
  auto append = [&](const Expression& t) {
    if (t.kind() == NodeKind::product && t.value() < 0.0) {
      const auto& ch = t.children();
      const Expression neg = make_product(-t.value(), std::vector<Expression>(ch.begin(), ch.end()));
      s += first ? "-" : " - ";
      s += neg.kind() == NodeKind::sum ? "(" + print(neg) + ")" : print(neg);
    } else if (t.is_constant() && t.value() < 0.0) {
      s += first ? "-" : " - ";
      s += format_number(-t.value());
    } else {
      if (!first) s += " + ";
      s += print(t);
    }
    first = false;
  };
  for (const auto& t : e.children()) append(t);
  if (e.value() != 0.0) append(make_constant(e.value()));
  return s;
}

std::string print(const Expression& e) {
  const Node* n = e.node();
  switch (n->kind) {
    case NodeKind::constant: return format_number(n->value);
    case NodeKind::coordinate: return n->coord.name();
    case NodeKind::parameter: return n->name;
    case NodeKind::power:
      if (n->exponent.num < 0) {
        const Rational inv{-n->exponent.num, n->exponent.den};
        return "1/" + (inv == Rational(1) ? wrap(n->children[0]) : print_power(n->children[0], inv));
      }
      return print_power(n->children[0], n->exponent);
    case NodeKind::product: return print_product(e);
    case NodeKind::sum: return print_sum(e);
    case NodeKind::function:
      return std::string(func_name(n->func)) + "(" + print(n->children[0]) + ")";
  }
  return {};
}

// --- caches ----------------------------------------------------------------

struct DiffKey {
  const Node* node;
  Coordinate v;
  bool operator==(const DiffKey& o) const { return node == o.node && v == o.v; }
};

struct DiffKeyHash {
  std::size_t operator()(const DiffKey& k) const {
    return mix(std::hash<const void*>{}(k.node),
               static_cast<std::size_t>(k.v.index) * 2 + (k.v.kind == CoordKind::fiber ? 1 : 0));
  }
};

class DiffCache {
 public:
  std::optional<Expression> find(const DiffKey& k) {
    std::lock_guard lock(mutex_);
    if (auto it = map_.find(k); it != map_.end()) return it->second;
    return std::nullopt;
  }
  void put(const DiffKey& k, Expression e) {
    std::lock_guard lock(mutex_);
    map_.emplace(k, e);
  }

 private:
  std::mutex mutex_;
  std::unordered_map<DiffKey, Expression, DiffKeyHash> map_;
};

DiffCache& diff_cache() {
  static DiffCache c;
  return c;
}

Expression derive(const Expression& e, Coordinate v);

Expression derive_uncached(const Expression& e, Coordinate v) {
  const Node* n = e.node();
  switch (n->kind) {
    case NodeKind::constant:
    case NodeKind::parameter:
      return make_constant(0.0);
    case NodeKind::coordinate:
      return make_constant(n->coord == v ? 1.0 : 0.0);
    case NodeKind::sum: {
      std::vector<Expression> terms;
      terms.reserve(n->children.size());
      for (const auto& c : n->children) terms.push_back(derive(c, v));
      return make_sum(terms);
    }
    case NodeKind::product: {
      std::vector<Expression> terms;
      const auto& fs = n->children;
      for (std::size_t i = 0; i < fs.size(); ++i) {
        Expression di = derive(fs[i], v);
        if (di.is_zero()) continue;
        std::vector<Expression> factors;
        factors.reserve(fs.size());
        factors.push_back(di);
        for (std::size_t j = 0; j < fs.size(); ++j) {
          if (j != i) factors.push_back(fs[j]);
        }
        terms.push_back(make_product(n->value, factors));
      }
      return make_sum(terms);
    }
    case NodeKind::power: {
      const Expression& base = n->children[0];
      Expression db = derive(base, v);
      if (db.is_zero()) return db;
      const Rational e = n->exponent;
      const Expression fs[] = {make_pow(base, e + Rational(-1)), db};
      return make_product(e.value(), fs);
    }
    case NodeKind::function: {
      const Expression& u = n->children[0];
      Expression du = derive(u, v);
      if (du.is_zero()) return du;
      switch (n->func) {
        case Func::exp: {
          const Expression fs[] = {e, du};
          return make_product(1.0, fs);
        }
        case Func::log: {
          const Expression fs[] = {make_pow(u, -1), du};
          return make_product(1.0, fs);
        }
        case Func::sin: {
          const Expression fs[] = {make_func(Func::cos, u), du};
          return make_product(1.0, fs);
        }
        case Func::cos: {
          const Expression fs[] = {make_func(Func::sin, u), du};
          return make_product(-1.0, fs);
        }
        case Func::abs: {
          // |u|' = (|u|/u) u', undefined on the kink u = 0
          const Expression fs[] = {e, make_pow(u, -1), du};
          return make_product(1.0, fs);
        }
      }
    }
  }
  return make_constant(0.0);
}

Expression derive(const Expression& e, Coordinate v) {
  const DiffKey key{e.node(), v};
  if (auto hit = diff_cache().find(key)) return *hit;
  Expression d = derive_uncached(e, v);
  diff_cache().put(key, d);
  return d;
}

template <class F>
Expression rebuild(const Expression& e, F&& leaf, std::unordered_map<const Node*, Expression>& memo) {
  if (auto it = memo.find(e.node()); it != memo.end()) return it->second;
  const Node* n = e.node();
  Expression out;
  switch (n->kind) {
    case NodeKind::constant:
    case NodeKind::coordinate:
    case NodeKind::parameter:
      out = leaf(e);
      break;
    case NodeKind::power:
      out = make_pow(rebuild(n->children[0], leaf, memo), n->exponent);
      break;
    case NodeKind::function:
      out = make_func(n->func, rebuild(n->children[0], leaf, memo));
      break;
    case NodeKind::product:
    case NodeKind::sum: {
      std::vector<Expression> ch;
      ch.reserve(n->children.size());
      for (const auto& c : n->children) ch.push_back(rebuild(c, leaf, memo));
      out = n->kind == NodeKind::sum ? make_sum(ch, n->value) : make_product(n->value, ch);
      break;
    }
  }
  memo.emplace(n, out);
  return out;
}

// --- evaluation ------------------------------------------------------------

std::string clip(std::string s) {
  constexpr std::size_t kMax = 160;
  if (s.size() > kMax) s = s.substr(0, kMax) + "...";
  return s;
}

class Evaluator {
 public:
  Evaluator(const Point& p, const ParamMap& params) : p_(p), params_(params) {}

  double operator()(const Expression& e) {
    const Node* n = e.node();
    if (auto it = memo_.find(n); it != memo_.end()) return it->second;
    const double v = compute(e);
    if (!std::isfinite(v)) fail(e, "non-finite value");
    memo_.emplace(n, v);
    return v;
  }

 private:
  [[noreturn]] void fail(const Expression& e, std::string_view reason) {
    throw SingularEvaluation(clip(print(e)), p_, reason);
  }

  double compute(const Expression& e) {
    const Node* n = e.node();
    switch (n->kind) {
      case NodeKind::constant: return n->value;
      case NodeKind::coordinate: {
        if (n->coord.index < 1 || n->coord.index > p_.dim()) {
          throw std::out_of_range("coordinate " + n->coord.name() + " outside point of dimension " +
                                  std::to_string(p_.dim()));
        }
        return p_[n->coord];
      }
      case NodeKind::parameter: {
        auto it = params_.find(n->name);
        if (it == params_.end()) throw UnboundParameter(n->name);
        return it->second;
      }
      case NodeKind::sum: {
        double s = n->value;
        for (const auto& c : n->children) s += (*this)(c);
        return s;
      }
      case NodeKind::product: {
        double s = n->value;
        for (const auto& c : n->children) s *= (*this)(c);
        return s;
      }
      case NodeKind::power: {
        const double b = (*this)(n->children[0]);
        const Rational r = n->exponent;
        if (b == 0.0 && r.num < 0) fail(e, "division by zero");
        if (r.is_integer()) return std::pow(b, r.num);
        if (b < 0.0) fail(e, "square root of a negative value");
        return std::pow(std::sqrt(b), r.num);
      }
      case NodeKind::function: {
        const double u = (*this)(n->children[0]);
        switch (n->func) {
          case Func::exp: return std::exp(u);
          case Func::log:
            if (u <= 0.0) fail(e, "logarithm of a non-positive value");
            return std::log(u);
          case Func::sin: return std::sin(u);
          case Func::cos: return std::cos(u);
          case Func::abs: return std::fabs(u);
        }
      }
    }
    return 0.0;
  }

  const Point& p_;
  const ParamMap& params_;
  std::unordered_map<const Node*, double> memo_;
};

}  // namespace

// --- public API ---------------------------------------------------------------

std::string Coordinate::name() const {
  return (kind == CoordKind::base ? "x" : "y") + std::to_string(index);
}

Rational::Rational(int n, int d) : num(n), den(d) {
  if (d != 1 && d != 2) throw std::invalid_argument("exponent denominator must be 1 or 2");
  if (d == 2 && n % 2 == 0) {
    num = n / 2;
    den = 1;
  }
}

Rational operator+(Rational a, Rational b) {
  const int den = std::max(a.den, b.den);
  return Rational(a.num * (den / a.den) + b.num * (den / b.den), den);
}

Rational operator*(Rational a, Rational b) {
  const int num = a.num * b.num;
  const int den = a.den * b.den;
  if (den == 4) {
    if (num % 2 != 0) throw std::domain_error("exponent leaves the half-integer lattice");
    return Rational(num / 2, 2);
  }
  return Rational(num, den);
}

std::string_view func_name(Func f) {
  switch (f) {
    case Func::exp: return "exp";
    case Func::log: return "log";
    case Func::sin: return "sin";
    case Func::cos: return "cos";
    case Func::abs: return "abs";
  }
  return "?";
}

Expression::Expression() : node_(make_constant(0.0).node()) {}

Expression Expression::constant(double value) { return make_constant(value); }

Expression Expression::coordinate(Coordinate c) {
  if (c.index < 1) throw std::invalid_argument("coordinate index must be >= 1");
  Node n;
  n.kind = NodeKind::coordinate;
  n.coord = c;
  return make_node(std::move(n));
}

Expression Expression::parameter(std::string_view name) {
  Node n;
  n.kind = NodeKind::parameter;
  n.name = std::string(name);
  return make_node(std::move(n));
}

NodeKind Expression::kind() const { return node_->kind; }
bool Expression::is_zero() const { return node_->kind == NodeKind::constant && node_->value == 0.0; }
bool Expression::is_one() const { return node_->kind == NodeKind::constant && node_->value == 1.0; }
double Expression::value() const { return node_->value; }
Coordinate Expression::coord() const { return node_->coord; }
const std::string& Expression::param_name() const { return node_->name; }
Rational Expression::exponent() const { return node_->exponent; }
Func Expression::func() const { return node_->func; }
std::span<const Expression> Expression::children() const { return node_->children; }
std::size_t Expression::hash() const { return node_->hash; }

std::size_t Expression::dag_size() const {
  std::unordered_set<const Node*> seen;
  std::vector<const Node*> stack{node_};
  while (!stack.empty()) {
    const Node* n = stack.back();
    stack.pop_back();
    if (!seen.insert(n).second) continue;
    for (const auto& c : n->children) stack.push_back(c.node());
  }
  return seen.size();
}

std::string Expression::to_string() const { return print(*this); }

std::strong_ordering operator<=>(Expression a, Expression b) { return compare_nodes(a.node_, b.node_); }

Expression operator+(Expression a, Expression b) {
  const Expression t[] = {a, b};
  return make_sum(t);
}

Expression operator-(Expression a, Expression b) { return a + (-b); }

Expression operator*(Expression a, Expression b) {
  const Expression f[] = {a, b};
  return make_product(1.0, f);
}

Expression operator/(Expression a, Expression b) { return a * make_pow(b, -1); }

Expression operator-(Expression a) {
  const Expression f[] = {a};
  return make_product(-1.0, f);
}

Expression pow(Expression base, Rational exponent) {
  // route through the product canonicalizer so x^a * ... collection sees it
  const Expression p = make_pow(base, exponent);
  const Expression f[] = {p};
  return make_product(1.0, f);
}

Expression sqrt(Expression e) { return pow(e, Rational(1, 2)); }
Expression apply(Func f, Expression arg) { return make_func(f, arg); }
Expression exp(Expression e) { return make_func(Func::exp, e); }
Expression log(Expression e) { return make_func(Func::log, e); }
Expression sin(Expression e) { return make_func(Func::sin, e); }
Expression cos(Expression e) { return make_func(Func::cos, e); }
Expression abs(Expression e) { return make_func(Func::abs, e); }

Expression sum(std::span<const Expression> terms) { return make_sum(terms); }
Expression product(std::span<const Expression> factors) { return make_product(1.0, factors); }

Expression differentiate(Expression e, Coordinate v) { return derive(e, v); }

Expression simplify(Expression e) {
  std::unordered_map<const Node*, Expression> memo;
  return rebuild(e, [](const Expression& leaf) { return leaf; }, memo);
}

Expression substitute(Expression e, const ParamMap& params) {
  std::unordered_map<const Node*, Expression> memo;
  return rebuild(
      e,
      [&](const Expression& leaf) {
        if (leaf.kind() == NodeKind::parameter) {
          if (auto it = params.find(leaf.param_name()); it != params.end()) return make_constant(it->second);
        }
        return leaf;
      },
      memo);
}

bool depends_on(Expression e, Coordinate v) {
  std::unordered_set<const Node*> seen;
  std::vector<const Node*> stack{e.node()};
  while (!stack.empty()) {
    const Node* n = stack.back();
    stack.pop_back();
    if (!seen.insert(n).second) continue;
    if (n->kind == NodeKind::coordinate && n->coord == v) return true;
    for (const auto& c : n->children) stack.push_back(c.node());
  }
  return false;
}

Point::Point(std::vector<double> base, std::vector<double> fiber) : x(std::move(base)), y(std::move(fiber)) {
  if (x.size() != y.size()) throw std::invalid_argument("point: x and y must have the same dimension");
  if (x.empty()) throw std::invalid_argument("point: dimension must be positive");
  const bool slit = std::any_of(y.begin(), y.end(), [](double v) { return v != 0.0; });
  if (!slit) throw std::invalid_argument("point: y = 0 is outside the slit tangent bundle");
}

double Point::operator[](Coordinate c) const {
  const auto& v = c.kind == CoordKind::base ? x : y;
  return v.at(static_cast<std::size_t>(c.index - 1));
}

std::string Point::to_string() const {
  std::string s = "(";
  for (std::size_t i = 0; i < x.size(); ++i) s += (i ? "," : "") + format_number(x[i]);
  s += ";";
  for (std::size_t i = 0; i < y.size(); ++i) s += (i ? "," : "") + format_number(y[i]);
  return s + ")";
}

SingularEvaluation::SingularEvaluation(std::string subterm, const Point& point, std::string_view reason)
    : std::runtime_error("singular evaluation (" + std::string(reason) + ") of " + subterm + " at " +
                         point.to_string()),
      subterm_(std::move(subterm)),
      point_(point) {}

double evaluate(Expression e, const Point& p, const ParamMap& params) {
  Evaluator ev(p, params);
  return ev(e);
}

std::vector<double> evaluate_all(std::span<const Expression> es, const Point& p, const ParamMap& params) {
  Evaluator ev(p, params);
  std::vector<double> out;
  out.reserve(es.size());
  for (const auto& e : es) out.push_back(ev(e));
  return out;
}

std::size_t interned_node_count() { return table().size(); }

}  // namespace finmet
