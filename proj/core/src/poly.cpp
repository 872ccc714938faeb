#include "cartanlab/poly.hpp"

#include <algorithm>
#include <mutex>
#include <unordered_map>

namespace cartanlab::detail {

// --- atom interning -------------------------------------------------------

namespace {

struct AtomKey {
  AtomKind kind;
  uint32_t sym;
  std::vector<int> deriv;
  const Node* a;
  const Node* b;
  bool operator==(const AtomKey& o) const {
    return kind == o.kind && sym == o.sym && deriv == o.deriv && a == o.a &&
           b == o.b;
  }
};

struct AtomKeyHash {
  size_t operator()(const AtomKey& k) const {
    size_t h = static_cast<size_t>(k.kind) * 0x9e3779b1u + k.sym;
    for (int d : k.deriv) h = h * 131 + static_cast<size_t>(d + 7);
    h = h * 131 + reinterpret_cast<size_t>(k.a);
    h = h * 131 + reinterpret_cast<size_t>(k.b);
    return h;
  }
};

struct AtomTable {
  std::mutex mu;
  std::vector<Atom> atoms;
  std::unordered_map<AtomKey, AtomId, AtomKeyHash> index;
};

AtomTable& table() {
  static AtomTable t;
  return t;
}

}  // namespace

AtomId intern_atom(const Atom& at) {
  AtomKey key{at.kind, at.sym, at.deriv, at.a.node(), at.b.node()};
  AtomTable& t = table();
  std::lock_guard<std::mutex> lk(t.mu);
  auto it = t.index.find(key);
  if (it != t.index.end()) return it->second;
  AtomId id = static_cast<AtomId>(t.atoms.size());
  t.atoms.push_back(at);
  t.index.emplace(std::move(key), id);
  return id;
}

const Atom& atom_info(AtomId id) {
  AtomTable& t = table();
  std::lock_guard<std::mutex> lk(t.mu);
  return t.atoms.at(id);
}

AtomId var_atom(VarId v) {
  Atom a;
  a.kind = AtomKind::Var;
  a.sym = v.id;
  return intern_atom(a);
}

AtomId func_atom(FuncSymbolId f, const std::vector<int>& deriv) {
  Atom a;
  a.kind = AtomKind::Func;
  a.sym = f.id;
  a.deriv = deriv;
  return intern_atom(a);
}

// --- monomials ------------------------------------------------------------

int Monomial::exponent(AtomId id) const {
  for (const auto& [a, e] : factors)
    if (a == id) return e;
  return 0;
}

Monomial operator*(const Monomial& a, const Monomial& b) {
  Monomial r;
  r.factors.reserve(a.factors.size() + b.factors.size());
  size_t i = 0, j = 0;
  while (i < a.factors.size() && j < b.factors.size()) {
    if (a.factors[i].first < b.factors[j].first)
      r.factors.push_back(a.factors[i++]);
    else if (b.factors[j].first < a.factors[i].first)
      r.factors.push_back(b.factors[j++]);
    else {
      int e = a.factors[i].second + b.factors[j].second;
      if (e != 0) r.factors.emplace_back(a.factors[i].first, e);
      ++i;
      ++j;
    }
  }
  for (; i < a.factors.size(); ++i) r.factors.push_back(a.factors[i]);
  for (; j < b.factors.size(); ++j) r.factors.push_back(b.factors[j]);
  return r;
}

bool mono_less(const Monomial& a, const Monomial& b) {
  size_t i = 0, j = 0;
  while (i < a.factors.size() && j < b.factors.size()) {
    AtomId ai = a.factors[i].first, bj = b.factors[j].first;
    if (ai < bj) return false;  // a has the more significant atom -> larger
    if (bj < ai) return true;
    if (a.factors[i].second != b.factors[j].second)
      return a.factors[i].second < b.factors[j].second;
    ++i;
    ++j;
  }
  if (i < a.factors.size()) return false;
  if (j < b.factors.size()) return true;
  return false;
}

// --- polynomials ----------------------------------------------------------

Poly::Poly(const Rational& c) {
  if (c != 0) terms_.emplace(Monomial{}, c);
}

Poly Poly::atom(AtomId id, int exponent) {
  Poly p;
  if (exponent == 0) return Poly(Rational(1));
  Monomial m;
  m.factors.emplace_back(id, exponent);
  p.terms_.emplace(std::move(m), Rational(1));
  return p;
}

bool Poly::is_constant() const {
  return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty());
}

const Rational& Poly::constant_value() const { return terms_.begin()->second; }

void Poly::add_term(const Monomial& m, const Rational& c) {
  if (c == 0) return;
  auto it = terms_.find(m);
  if (it == terms_.end()) {
    terms_.emplace(m, c);
  } else {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

const Monomial& Poly::leading_monomial() const { return terms_.rbegin()->first; }
const Rational& Poly::leading_coefficient() const { return terms_.rbegin()->second; }

Poly operator+(const Poly& a, const Poly& b) {
  Poly r = a;
  for (const auto& [m, c] : b.terms_) r.add_term(m, c);
  return r;
}

Poly operator-(const Poly& a, const Poly& b) {
  Poly r = a;
  for (const auto& [m, c] : b.terms_) r.add_term(m, -c);
  return r;
}

Poly operator-(const Poly& a) {
  Poly r;
  for (const auto& [m, c] : a.terms_) r.terms_.emplace(m, -c);
  return r;
}

Poly operator*(const Poly& a, const Poly& b) {
  Poly r;
  for (const auto& [ma, ca] : a.terms_)
    for (const auto& [mb, cb] : b.terms_) r.add_term(ma * mb, ca * cb);
  return r;
}

Poly Poly::mul_term(const Monomial& m, const Rational& c) const {
  Poly r;
  if (c == 0) return r;
  for (const auto& [mm, cc] : terms_) r.terms_.emplace(mm * m, cc * c);
  return r;
}

Poly Poly::pow_int(unsigned n) const {
  Poly r(Rational(1));
  Poly base = *this;
  while (n) {
    if (n & 1) r = r * base;
    base = (n >>= 1) ? base * base : base;
  }
  return r;
}

std::vector<AtomId> Poly::atoms() const {
  std::vector<AtomId> out;
  for (const auto& [m, c] : terms_)
    for (const auto& [a, e] : m.factors)
      if (std::find(out.begin(), out.end(), a) == out.end()) out.push_back(a);
  std::sort(out.begin(), out.end());
  return out;
}

int Poly::degree_in(AtomId x) const {
  int d = 0;
  for (const auto& [m, c] : terms_) d = std::max(d, m.exponent(x));
  return d;
}

Poly Poly::coeff_in(AtomId x, int k) const {
  Poly r;
  for (const auto& [m, c] : terms_) {
    if (m.exponent(x) != k) continue;
    Monomial rest;
    for (const auto& [a, e] : m.factors)
      if (a != x) rest.factors.emplace_back(a, e);
    r.add_term(rest, c);
  }
  return r;
}

// --- content, division, gcd ----------------------------------------------

Rational content(const Poly& p) {
  if (p.is_zero()) return Rational(0);
  mpz_class num_gcd(0), den_lcm(1);
  for (const auto& [m, c] : p.terms()) {
    mpz_gcd(num_gcd.get_mpz_t(), num_gcd.get_mpz_t(), c.get_num_mpz_t());
    mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), c.get_den_mpz_t());
  }
  Rational c(num_gcd, den_lcm);
  c.canonicalize();
  return c;
}

Poly primitive_part(const Poly& p) {
  if (p.is_zero()) return p;
  Rational c = content(p);
  Poly r;
  for (const auto& [m, coef] : p.terms()) r.add_term(m, coef / c);
  return r;
}

Monomial monomial_content(const Poly& p) {
  Monomial result;
  bool first = true;
  for (const auto& [m, c] : p.terms()) {
    if (first) {
      result = m;
      first = false;
      continue;
    }
    Monomial next;
    size_t i = 0, j = 0;
    while (i < result.factors.size() && j < m.factors.size()) {
      if (result.factors[i].first < m.factors[j].first)
        ++i;
      else if (m.factors[j].first < result.factors[i].first)
        ++j;
      else {
        next.factors.emplace_back(
            result.factors[i].first,
            std::min(result.factors[i].second, m.factors[j].second));
        ++i;
        ++j;
      }
    }
    result = next;
    if (result.empty()) break;
  }
  return result;
}

Poly div_monomial(const Poly& p, const Monomial& m) {
  if (m.empty()) return p;
  Monomial inv;
  for (const auto& [a, e] : m.factors) inv.factors.emplace_back(a, -e);
  Poly r;
  for (const auto& [mm, c] : p.terms()) r.add_term(mm * inv, c);
  return r;
}

namespace {

bool mono_divides(const Monomial& d, const Monomial& m) {
  size_t j = 0;
  for (const auto& [a, e] : d.factors) {
    while (j < m.factors.size() && m.factors[j].first < a) ++j;
    if (j >= m.factors.size() || m.factors[j].first != a ||
        m.factors[j].second < e)
      return false;
  }
  return true;
}

Monomial mono_quot(const Monomial& m, const Monomial& d) {
  Monomial inv;
  for (const auto& [a, e] : d.factors) inv.factors.emplace_back(a, -e);
  return m * inv;
}

}  // namespace

Poly divexact(const Poly& a, const Poly& b) {
  if (b.is_zero()) throw Error("polynomial division by zero");
  Poly rem = a;
  Poly quot;
  while (!rem.is_zero()) {
    const Monomial& lm = rem.leading_monomial();
    if (!mono_divides(b.leading_monomial(), lm))
      throw Error("inexact polynomial division");
    Monomial qm = mono_quot(lm, b.leading_monomial());
    Rational qc = rem.leading_coefficient() / b.leading_coefficient();
    quot.add_term(qm, qc);
    rem = rem - b.mul_term(qm, qc);
  }
  return quot;
}

void poly_divmod(const Poly& a, const Poly& b, Poly& q, Poly& r) {
  if (b.is_zero()) throw Error("polynomial division by zero");
  q = Poly();
  r = Poly();
  Poly rem = a;
  while (!rem.is_zero()) {
    const Monomial& lm = rem.leading_monomial();
    const Rational lc = rem.leading_coefficient();
    if (mono_divides(b.leading_monomial(), lm)) {
      Monomial qm = mono_quot(lm, b.leading_monomial());
      Rational qc = lc / b.leading_coefficient();
      q.add_term(qm, qc);
      rem = rem - b.mul_term(qm, qc);
    } else {
      r.add_term(lm, lc);
      rem.add_term(lm, -lc);
    }
  }
}

namespace {

// --- modular gcd-triviality certificate ------------------------------------
// Evaluating all atoms but one at random residues turns both polynomials
// into univariate images mod p; any common divisor survives evaluation, so
// a degree-0 image gcd in every shared atom proves the true gcd is
// constant. The PRS below is only run when this certificate fails.

constexpr uint64_t kModulus = 2305843009213693951ULL;  // 2^61 - 1

uint64_t mulmod(uint64_t a, uint64_t b) {
  return static_cast<uint64_t>((static_cast<__uint128_t>(a) * b) % kModulus);
}

uint64_t powmod(uint64_t a, uint64_t e) {
  uint64_t r = 1;
  while (e) {
    if (e & 1) r = mulmod(r, a);
    a = mulmod(a, a);
    e >>= 1;
  }
  return r;
}

uint64_t invmod(uint64_t a) { return powmod(a, kModulus - 2); }

uint64_t rational_mod(const Rational& q, bool& ok) {
  uint64_t den = mpz_fdiv_ui(q.get_den_mpz_t(), kModulus);
  if (den == 0) {
    ok = false;
    return 0;
  }
  uint64_t num = mpz_fdiv_ui(q.get_num_mpz_t(), kModulus);
  return mulmod(num, invmod(den));
}

bool eval_univariate_image(const Poly& p, AtomId x,
                           const std::vector<std::pair<AtomId, uint64_t>>& vals,
                           std::vector<uint64_t>& out) {
  out.assign(static_cast<size_t>(p.degree_in(x)) + 1, 0);
  for (const auto& [m, c] : p.terms()) {
    bool ok = true;
    uint64_t v = rational_mod(c, ok);
    if (!ok) return false;
    int dx = 0;
    for (const auto& [a, e] : m.factors) {
      if (a == x) {
        dx = e;
        continue;
      }
      uint64_t av = 0;
      for (const auto& [va, vv] : vals)
        if (va == a) {
          av = vv;
          break;
        }
      v = mulmod(v, powmod(av, static_cast<uint64_t>(e)));
    }
    out[dx] = (out[dx] + v) % kModulus;
  }
  while (!out.empty() && out.back() == 0) out.pop_back();
  return true;
}

int univariate_gcd_degree(std::vector<uint64_t> a, std::vector<uint64_t> b) {
  if (a.empty() || b.empty()) return -1;
  while (!b.empty()) {
    if (b.size() > a.size()) std::swap(a, b);
    // reduce a by b
    uint64_t lead_inv = invmod(b.back());
    while (a.size() >= b.size() && !a.empty()) {
      uint64_t f = mulmod(a.back(), lead_inv);
      size_t off = a.size() - b.size();
      for (size_t i = 0; i < b.size(); ++i) {
        uint64_t sub = mulmod(f, b[i]);
        a[off + i] = (a[off + i] + kModulus - sub) % kModulus;
      }
      while (!a.empty() && a.back() == 0) a.pop_back();
    }
    std::swap(a, b);
  }
  return static_cast<int>(a.size()) - 1;
}

bool gcd_certainly_trivial(const Poly& a, const Poly& b) {
  std::vector<AtomId> aa = a.atoms(), ba = b.atoms();
  std::vector<AtomId> common;
  for (AtomId x : aa)
    if (std::find(ba.begin(), ba.end(), x) != ba.end()) common.push_back(x);
  if (common.empty()) return true;
  // deterministic pseudo-random residues
  uint64_t state = 0x8a5cd789635d2dffULL;
  auto next = [&state]() {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    return state % (kModulus - 2) + 1;
  };
  std::vector<std::pair<AtomId, uint64_t>> vals;
  for (AtomId x : aa) vals.emplace_back(x, next());
  for (AtomId x : ba)
    if (std::find(aa.begin(), aa.end(), x) == aa.end())
      vals.emplace_back(x, next());
  std::vector<uint64_t> ia, ib;
  for (AtomId x : common) {
    if (!eval_univariate_image(a, x, vals, ia)) return false;
    if (!eval_univariate_image(b, x, vals, ib)) return false;
    if (univariate_gcd_degree(ia, ib) != 0) return false;
  }
  return true;
}

// Pseudo-remainder of a by b in the atom x; result is a scalar multiple of
// the true remainder, which is all the primitive PRS needs.
Poly prem(Poly a, const Poly& b, AtomId x) {
  int db = b.degree_in(x);
  Poly lb = b.coeff_in(x, db);
  int guard = 0;
  while (!a.is_zero() && a.degree_in(x) >= db) {
    int da = a.degree_in(x);
    Poly la = a.coeff_in(x, da);
    Monomial shift;
    if (da - db > 0) shift.factors.emplace_back(x, da - db);
    a = (a * lb) - (b * la).mul_term(shift, Rational(1));
    if (++guard > 10000) throw Error("pseudo-division failed to terminate");
  }
  return a;
}

// Content of p regarded as a univariate polynomial in x.
Poly content_in(const Poly& p, AtomId x);

Poly gcd_impl(Poly a, Poly b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;

  Monomial ma = monomial_content(a), mb = monomial_content(b);
  Monomial common;
  {
    Poly tmp;
    tmp.add_term(ma, Rational(1));
    tmp.add_term(mb, Rational(1));
    common = monomial_content(tmp);
  }
  a = div_monomial(a, ma);
  b = div_monomial(b, mb);

  Rational c = content(a);
  Rational d = content(b);
  // gcd of two positive rationals p1/q1, p2/q2: gcd(p1,p2)/lcm(q1,q2)
  mpz_class gn, gl;
  mpz_gcd(gn.get_mpz_t(), c.get_num_mpz_t(), d.get_num_mpz_t());
  mpz_lcm(gl.get_mpz_t(), c.get_den_mpz_t(), d.get_den_mpz_t());
  Rational cg(gn, gl);
  cg.canonicalize();

  a = primitive_part(a);
  b = primitive_part(b);

  Poly g;
  if (a.is_constant() || b.is_constant() || gcd_certainly_trivial(a, b)) {
    g = Poly(Rational(1));
  } else {
    std::vector<AtomId> aa = a.atoms(), ba = b.atoms();
    AtomId x = std::min(aa.front(), ba.front());
    if (a.degree_in(x) == 0) {
      g = gcd_impl(a, content_in(b, x));
    } else if (b.degree_in(x) == 0) {
      g = gcd_impl(content_in(a, x), b);
    } else {
      Poly ca = content_in(a, x), cb = content_in(b, x);
      Poly cg2 = gcd_impl(ca, cb);
      Poly pa = divexact(a, ca), pb = divexact(b, cb);
      // primitive PRS
      if (pa.degree_in(x) < pb.degree_in(x)) std::swap(pa, pb);
      while (true) {
        Poly r = prem(pa, pb, x);
        if (r.is_zero()) {
          g = pb;
          break;
        }
        if (r.degree_in(x) == 0) {
          g = Poly(Rational(1));
          break;
        }
        r = divexact(r, content_in(r, x));
        r = primitive_part(r);
        pa = pb;
        pb = r;
      }
      if (!g.is_constant()) g = primitive_part(divexact(g, content_in(g, x)));
      g = cg2 * g;
    }
  }

  Poly result = g.mul_term(common, cg);
  if (result.leading_coefficient() < 0) result = -result;
  return result;
}

Poly content_in(const Poly& p, AtomId x) {
  int d = p.degree_in(x);
  Poly g;
  for (int k = 0; k <= d; ++k) {
    Poly ck = p.coeff_in(x, k);
    if (ck.is_zero()) continue;
    g = gcd_impl(g, ck);
    if (g.is_constant() && !g.is_zero() && g.constant_value() == 1) break;
  }
  return g;
}

}  // namespace

Poly poly_gcd(const Poly& a, const Poly& b) { return gcd_impl(a, b); }

}  // namespace cartanlab::detail
