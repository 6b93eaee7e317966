#pragma once
// Truncated multivariate Taylor arithmetic ("jets") plus a nested dual number.
//
// Jet<S> stores the Taylor coefficients of a smooth expression around a base
// point, truncated at a fixed total degree (<= 3).  Arithmetic and elementary
// functions propagate the coefficients exactly, so all partial derivatives up
// to the truncation order come out with no finite-difference error.  The
// scalar type S is double for ordinary use; S = Dual threads one additional
// directional derivative through an entire jet computation, which yields one
// order of mixed derivative information beyond the jet order.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstddef>
#include <initializer_list>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace finsler {

inline constexpr int kMaxJetVars = 12;
inline constexpr int kMaxJetOrder = 3;

// ---------------------------------------------------------------------------
// Dual: value plus one directional derivative.
// ---------------------------------------------------------------------------

struct Dual {
  double val = 0.0;
  double dot = 0.0;

  constexpr Dual() = default;
  constexpr Dual(double v) : val(v) {}  // NOLINT: implicit by design
  constexpr Dual(double v, double d) : val(v), dot(d) {}

  Dual& operator+=(const Dual& o) {
    val += o.val;
    dot += o.dot;
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    val -= o.val;
    dot -= o.dot;
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    dot = dot * o.val + val * o.dot;
    val *= o.val;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    if (o.val == 0.0) throw std::domain_error("dual division by zero value");
    val /= o.val;
    dot = (dot - val * o.dot) / o.val;
    return *this;
  }
};

inline Dual operator+(Dual a, const Dual& b) { return a += b; }
inline Dual operator-(Dual a, const Dual& b) { return a -= b; }
inline Dual operator*(Dual a, const Dual& b) { return a *= b; }
inline Dual operator/(Dual a, const Dual& b) { return a /= b; }
inline Dual operator-(const Dual& a) { return {-a.val, -a.dot}; }
inline Dual operator+(const Dual& a) { return a; }

inline double value_of(double x) { return x; }
inline double value_of(const Dual& x) { return x.val; }

inline Dual sqrt(const Dual& x) {
  if (x.val <= 0.0) throw std::domain_error("dual sqrt of non-positive value");
  const double s = std::sqrt(x.val);
  return {s, x.dot / (2.0 * s)};
}
inline Dual exp(const Dual& x) {
  const double e = std::exp(x.val);
  return {e, e * x.dot};
}
inline Dual log(const Dual& x) {
  if (x.val <= 0.0) throw std::domain_error("dual log of non-positive value");
  return {std::log(x.val), x.dot / x.val};
}
inline Dual sin(const Dual& x) { return {std::sin(x.val), std::cos(x.val) * x.dot}; }
inline Dual cos(const Dual& x) { return {std::cos(x.val), -std::sin(x.val) * x.dot}; }
inline Dual atan(const Dual& x) {
  return {std::atan(x.val), x.dot / (1.0 + x.val * x.val)};
}
inline Dual pow(const Dual& x, double e) {
  if (x.val <= 0.0) throw std::domain_error("dual pow of non-positive base");
  const double p = std::pow(x.val, e);
  return {p, e * p / x.val * x.dot};
}

// ---------------------------------------------------------------------------
// JetLayout: monomial basis of a truncated polynomial ring, cached per
// (nvars, order).  Monomials are graded-lexicographically ordered; index 0 is
// the constant term and indices 1..nvars are the linear terms in variable
// order.
// ---------------------------------------------------------------------------

class JetLayout {
 public:
  using Exponents = std::array<std::uint8_t, kMaxJetVars>;

  struct MulEntry {
    std::uint32_t a, b, dst;
  };
  struct DeriveEntry {
    std::uint32_t src, dst;
    double factor;  // exponent of the derived variable in src
  };

  static const JetLayout& get(int nvars, int order) {
    if (nvars < 1 || nvars > kMaxJetVars)
      throw std::invalid_argument("jet variable count out of range");
    if (order < 0 || order > kMaxJetOrder)
      throw std::invalid_argument("jet order out of range");
    // recursive: constructing an order-k layout builds its derive tables via
    // the order-(k-1) layout, which re-enters this function.
    static std::recursive_mutex mu;
    static std::map<std::pair<int, int>, std::unique_ptr<JetLayout>> cache;
    std::lock_guard<std::recursive_mutex> lock(mu);
    auto& slot = cache[{nvars, order}];
    if (!slot) slot.reset(new JetLayout(nvars, order));
    return *slot;
  }

  int nvars() const { return nvars_; }
  int order() const { return order_; }
  int size() const { return static_cast<int>(monomials_.size()); }

  const Exponents& exponents(int idx) const { return monomials_[idx]; }
  int degree(int idx) const { return degrees_[idx]; }
  double factorial(int idx) const { return factorials_[idx]; }

  // Index of a monomial, or -1 when its degree exceeds the order.
  int index_of(const Exponents& e) const {
    auto it = index_.find(pack(e));
    return it == index_.end() ? -1 : static_cast<int>(it->second);
  }

  const std::vector<MulEntry>& mul_table() const { return mul_table_; }
  const std::vector<DeriveEntry>& derive_table(int var) const {
    return derive_tables_[var];
  }

  JetLayout(const JetLayout&) = delete;
  JetLayout& operator=(const JetLayout&) = delete;

 private:
  JetLayout(int nvars, int order) : nvars_(nvars), order_(order) {
    Exponents e{};
    enumerate(e, 0, order, 0);
    // Graded-lex: stable sort by total degree, ties keep lex order from the
    // recursive enumeration.
    std::vector<std::pair<int, Exponents>> graded;
    graded.reserve(monomials_.size());
    for (const auto& m : monomials_) {
      int d = 0;
      for (int i = 0; i < nvars_; ++i) d += m[i];
      graded.emplace_back(d, m);
    }
    std::stable_sort(graded.begin(), graded.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    monomials_.clear();
    for (auto& [d, m] : graded) {
      degrees_.push_back(d);
      monomials_.push_back(m);
    }
    for (std::size_t i = 0; i < monomials_.size(); ++i) {
      index_[pack(monomials_[i])] = static_cast<std::uint32_t>(i);
      double f = 1.0;
      for (int v = 0; v < nvars_; ++v)
        for (int k = 2; k <= monomials_[i][v]; ++k) f *= k;
      factorials_.push_back(f);
    }
    build_mul_table();
    build_derive_tables();
  }

  void enumerate(Exponents& e, int var, int budget, int depth) {
    if (var == nvars_) {
      monomials_.push_back(e);
      return;
    }
    (void)depth;
    for (int k = budget; k >= 0; --k) {
      e[var] = static_cast<std::uint8_t>(k);
      enumerate(e, var + 1, budget - k, depth + 1);
    }
    e[var] = 0;
  }

  static std::uint64_t pack(const Exponents& e) {
    std::uint64_t key = 0;
    for (int i = 0; i < kMaxJetVars; ++i) key = (key << 4) | e[i];
    return key;
  }

  void build_mul_table() {
    const int n = size();
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        if (degrees_[a] + degrees_[b] > order_) continue;
        Exponents s{};
        for (int v = 0; v < nvars_; ++v)
          s[v] = static_cast<std::uint8_t>(monomials_[a][v] + monomials_[b][v]);
        const int dst = index_of(s);
        mul_table_.push_back({static_cast<std::uint32_t>(a),
                              static_cast<std::uint32_t>(b),
                              static_cast<std::uint32_t>(dst)});
      }
    }
  }

  void build_derive_tables() {
    derive_tables_.resize(nvars_);
    if (order_ == 0) return;
    const JetLayout& lower = JetLayout::get(nvars_, order_ - 1);
    for (int v = 0; v < nvars_; ++v) {
      for (int src = 0; src < size(); ++src) {
        if (monomials_[src][v] == 0) continue;
        Exponents d = monomials_[src];
        d[v] -= 1;
        const int dst = lower.index_of(d);
        derive_tables_[v].push_back({static_cast<std::uint32_t>(src),
                                     static_cast<std::uint32_t>(dst),
                                     static_cast<double>(monomials_[src][v])});
      }
    }
  }

  int nvars_, order_;
  std::vector<Exponents> monomials_;
  std::vector<int> degrees_;
  std::vector<double> factorials_;
  std::unordered_map<std::uint64_t, std::uint32_t> index_;
  std::vector<MulEntry> mul_table_;
  std::vector<std::vector<DeriveEntry>> derive_tables_;
};

// ---------------------------------------------------------------------------
// Jet<S>: coefficients c_alpha with  f = sum_alpha c_alpha * delta^alpha,
// i.e. plain polynomial coefficients in the offsets from the base point.
// deriv() rescales by alpha! to return true partial derivatives.
// ---------------------------------------------------------------------------

template <typename S>
class Jet {
 public:
  Jet() = default;  // empty; only assignable

  explicit Jet(const JetLayout& ly) : layout_(&ly), c_(ly.size(), S(0)) {}

  static Jet constant(const JetLayout& ly, const S& v) {
    Jet j(ly);
    j.c_[0] = v;
    return j;
  }

  static Jet variable(const JetLayout& ly, int var, const S& v) {
    if (var < 0 || var >= ly.nvars())
      throw std::invalid_argument("jet variable index out of range");
    Jet j(ly);
    j.c_[0] = v;
    if (ly.order() >= 1) j.c_[1 + var] = S(1);
    return j;
  }

  bool empty() const { return layout_ == nullptr; }
  const JetLayout& layout() const {
    require();
    return *layout_;
  }
  const S& value() const {
    require();
    return c_[0];
  }
  const S& coeff(int idx) const {
    require();
    return c_[idx];
  }
  S& coeff(int idx) {
    require();
    return c_[idx];
  }

  // Partial derivative for the variable list (repetition = higher order),
  // e.g. deriv({0,1}) is d^2/dx0 dx1.
  S deriv(std::initializer_list<int> vars) const {
    require();
    JetLayout::Exponents e{};
    int total = 0;
    for (int v : vars) {
      if (v < 0 || v >= layout_->nvars())
        throw std::invalid_argument("jet variable index out of range");
      e[v] += 1;
      ++total;
    }
    if (total > layout_->order())
      throw std::invalid_argument("requested derivative exceeds jet order");
    const int idx = layout_->index_of(e);
    return c_[idx] * S(layout_->factorial(idx));
  }

  // d/dx_var as a jet of one lower order.
  Jet derive(int var) const {
    require();
    if (layout_->order() == 0)
      throw std::invalid_argument("cannot derive an order-0 jet");
    if (var < 0 || var >= layout_->nvars())
      throw std::invalid_argument("jet variable index out of range");
    const JetLayout& lower = JetLayout::get(layout_->nvars(), layout_->order() - 1);
    Jet out(lower);
    for (const auto& e : layout_->derive_table(var))
      out.c_[e.dst] += c_[e.src] * S(e.factor);
    return out;
  }

  Jet& operator+=(const Jet& o) {
    match(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    match(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Jet& operator*=(const Jet& o) {
    *this = *this * o;
    return *this;
  }
  Jet& operator/=(const Jet& o) {
    *this = *this / o;
    return *this;
  }

  Jet& operator+=(const S& s) {
    require();
    c_[0] += s;
    return *this;
  }
  Jet& operator-=(const S& s) {
    require();
    c_[0] -= s;
    return *this;
  }
  Jet& operator*=(const S& s) {
    require();
    for (auto& ci : c_) ci *= s;
    return *this;
  }
  Jet& operator/=(const S& s) {
    require();
    if (value_of(s) == 0.0) throw std::domain_error("jet division by zero scalar");
    for (auto& ci : c_) ci /= s;
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator+(Jet a, const S& s) { return a += s; }
  friend Jet operator+(const S& s, Jet a) { return a += s; }
  friend Jet operator-(Jet a, const S& s) { return a -= s; }
  friend Jet operator-(const S& s, const Jet& a) { return (-a) += s; }
  friend Jet operator*(Jet a, const S& s) { return a *= s; }
  friend Jet operator*(const S& s, Jet a) { return a *= s; }
  friend Jet operator/(Jet a, const S& s) { return a /= s; }
  friend Jet operator/(const S& s, const Jet& a) { return reciprocal(a) *= s; }

  friend Jet operator-(const Jet& a) {
    a.require();
    Jet out(*a.layout_);
    for (std::size_t i = 0; i < a.c_.size(); ++i) out.c_[i] = -a.c_[i];
    return out;
  }
  friend Jet operator+(const Jet& a) { return a; }

  friend Jet operator*(const Jet& a, const Jet& b) {
    a.match(b);
    Jet out(*a.layout_);
    for (const auto& e : a.layout_->mul_table())
      out.c_[e.dst] += a.c_[e.a] * b.c_[e.b];
    return out;
  }

  friend Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }

  // Composition with an analytic function given by its scaled Taylor
  // coefficients at the jet's value: taylor[k] = f^(k)(x0) / k!.
  friend Jet compose_series(const Jet& x, std::span<const S> taylor) {
    x.require();
    if (taylor.empty())
      throw std::invalid_argument("compose_series needs at least one coefficient");
    Jet delta = x;
    delta.c_[0] = S(0);
    const int m = static_cast<int>(taylor.size()) - 1;
    Jet res = Jet::constant(*x.layout_, taylor[m]);
    for (int k = m - 1; k >= 0; --k) res = res * delta + taylor[k];
    return res;
  }

  friend Jet reciprocal(const Jet& b) {
    b.require();
    const S x0 = b.c_[0];
    if (value_of(x0) == 0.0)
      throw std::domain_error("jet division by zero value");
    std::array<S, kMaxJetOrder + 1> t;
    const int m = b.layout_->order();
    S p = S(1) / x0;
    for (int k = 0; k <= m; ++k) {
      t[k] = (k % 2 == 0) ? p : -p;
      p /= x0;
    }
    return compose_series(b, std::span<const S>(t.data(), m + 1));
  }

  friend Jet sqrt(const Jet& x) {
    x.require();
    const S x0 = x.c_[0];
    if (value_of(x0) <= 0.0)
      throw std::domain_error("jet sqrt of non-positive value");
    using std::sqrt;
    const S s = sqrt(x0);
    std::array<S, kMaxJetOrder + 1> t;
    const int m = x.layout_->order();
    // (x^(1/2))^(k) / k! at x0:  s, 1/2 s^-1, -1/8 x0^-1 s^-1, 1/16 x0^-2 s^-1
    t[0] = s;
    if (m >= 1) t[1] = S(0.5) / s;
    if (m >= 2) t[2] = S(-0.125) / (x0 * s);
    if (m >= 3) t[3] = S(0.0625) / (x0 * x0 * s);
    return compose_series(x, std::span<const S>(t.data(), m + 1));
  }

  friend Jet exp(const Jet& x) {
    x.require();
    using std::exp;
    const S e = exp(x.c_[0]);
    std::array<S, kMaxJetOrder + 1> t;
    const int m = x.layout_->order();
    double kf = 1.0;
    for (int k = 0; k <= m; ++k) {
      if (k > 0) kf *= k;
      t[k] = e / S(kf);
    }
    return compose_series(x, std::span<const S>(t.data(), m + 1));
  }

  friend Jet log(const Jet& x) {
    x.require();
    const S x0 = x.c_[0];
    if (value_of(x0) <= 0.0)
      throw std::domain_error("jet log of non-positive value");
    using std::log;
    std::array<S, kMaxJetOrder + 1> t;
    const int m = x.layout_->order();
    t[0] = log(x0);
    if (m >= 1) t[1] = S(1) / x0;
    if (m >= 2) t[2] = S(-0.5) / (x0 * x0);
    if (m >= 3) t[3] = S(1.0 / 3.0) / (x0 * x0 * x0);
    return compose_series(x, std::span<const S>(t.data(), m + 1));
  }

  friend Jet sin(const Jet& x) {
    x.require();
    using std::sin;
    using std::cos;
    const S s = sin(x.c_[0]), c = cos(x.c_[0]);
    std::array<S, kMaxJetOrder + 1> t;
    const int m = x.layout_->order();
    t[0] = s;
    if (m >= 1) t[1] = c;
    if (m >= 2) t[2] = -s * S(0.5);
    if (m >= 3) t[3] = -c * S(1.0 / 6.0);
    return compose_series(x, std::span<const S>(t.data(), m + 1));
  }

  friend Jet cos(const Jet& x) {
    x.require();
    using std::sin;
    using std::cos;
    const S s = sin(x.c_[0]), c = cos(x.c_[0]);
    std::array<S, kMaxJetOrder + 1> t;
    const int m = x.layout_->order();
    t[0] = c;
    if (m >= 1) t[1] = -s;
    if (m >= 2) t[2] = -c * S(0.5);
    if (m >= 3) t[3] = s * S(1.0 / 6.0);
    return compose_series(x, std::span<const S>(t.data(), m + 1));
  }

  friend Jet atan(const Jet& x) {
    x.require();
    using std::atan;
    const S x0 = x.c_[0];
    const S d = S(1) + x0 * x0;
    std::array<S, kMaxJetOrder + 1> t;
    const int m = x.layout_->order();
    t[0] = atan(x0);
    if (m >= 1) t[1] = S(1) / d;
    if (m >= 2) t[2] = -x0 / (d * d);
    if (m >= 3) t[3] = (x0 * x0 - S(1.0 / 3.0)) / (d * d * d);
    return compose_series(x, std::span<const S>(t.data(), m + 1));
  }

  friend Jet pow(const Jet& x, double e) {
    x.require();
    const S x0 = x.c_[0];
    if (value_of(x0) <= 0.0)
      throw std::domain_error("jet pow of non-positive base");
    using std::pow;
    std::array<S, kMaxJetOrder + 1> t;
    const int m = x.layout_->order();
    t[0] = pow(x0, e);
    S fall = S(e);
    double kf = 1.0;
    for (int k = 1; k <= m; ++k) {
      kf *= k;
      t[k] = fall * pow(x0, e - k) / S(kf);
      fall *= S(e - k);
    }
    return compose_series(x, std::span<const S>(t.data(), m + 1));
  }

  friend Jet pow(const Jet& x, int n) {
    x.require();
    if (n < 0) return reciprocal(pow(x, -n));
    Jet r = Jet::constant(*x.layout_, S(1));
    Jet base = x;
    int k = n;
    while (k > 0) {
      if (k & 1) r = r * base;
      base = base * base;
      k >>= 1;
    }
    return r;
  }

 private:
  void require() const {
    if (!layout_) throw std::logic_error("operation on empty jet");
  }
  void match(const Jet& o) const {
    require();
    o.require();
    if (layout_ != o.layout_) throw std::invalid_argument("jet layout mismatch");
  }

  const JetLayout* layout_ = nullptr;
  std::vector<S> c_;
};

using JetD = Jet<double>;

template <typename S>
S value_of(const Jet<S>& j) = delete;  // ambiguous intent; use j.value()

template <typename S>
Jet<S> sqr(const Jet<S>& x) {
  return x * x;
}
inline double sqr(double x) { return x * x; }
inline Dual sqr(const Dual& x) { return x * x; }

}  // namespace finsler
