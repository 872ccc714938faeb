#include "cartanlab/canonical.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <random>
#include <unordered_map>

#include "cartanlab/eval.hpp"

namespace cartanlab {

namespace detail {

namespace {

bool is_one(const Poly& p) {
  return p.is_constant() && !p.is_zero() && p.constant_value() == 1;
}

RNF one_rnf() { return RNF{Poly(Rational(1)), Poly(Rational(1))}; }

/// Puts the fraction in lowest terms with a primitive integer denominator
/// whose leading coefficient is positive.
void reduce(RNF& r) {
  if (r.den.is_zero()) throw Error("division by zero in canonical form");
  if (r.num.is_zero()) {
    r.den = Poly(Rational(1));
    return;
  }
  if (!r.den.is_constant()) {
    Poly g = poly_gcd(r.num, r.den);
    if (!(g.is_constant() && g.constant_value() == 1)) {
      r.num = divexact(r.num, g);
      r.den = divexact(r.den, g);
    }
  }
  if (r.den.is_constant()) {
    Rational d = r.den.constant_value();
    if (d != 1) r.num = r.num.mul_term(Monomial{}, Rational(1) / d);
    r.den = Poly(Rational(1));
    return;
  }
  Rational c = content(r.den);
  if (r.den.leading_coefficient() < 0) c = -c;
  if (c != 1) {
    Rational ic = Rational(1) / c;
    r.num = r.num.mul_term(Monomial{}, ic);
    r.den = r.den.mul_term(Monomial{}, ic);
  }
}

RNF frac(Poly num, Poly den) {
  RNF r{std::move(num), std::move(den)};
  reduce(r);
  return r;
}

struct RnfCache {
  std::mutex mu;
  std::unordered_map<const Node*, RNF> map;
};

RnfCache& rnf_cache() {
  static RnfCache c;
  return c;
}

void seed_canonical(Expr canon, const RNF& r) {
  {
    RnfCache& c = rnf_cache();
    std::lock_guard<std::mutex> lk(c.mu);
    c.map.emplace(canon.node(), r);
  }
  Session::instance().remember_canonical(canon, canon);
}

bool mono_has_special(const Monomial& m) {
  for (const auto& [a, e] : m.factors) {
    AtomKind k = atom_info(a).kind;
    if (k == AtomKind::Exp || k == AtomKind::Pow) return true;
  }
  return false;
}

bool pow_factor_clean(AtomId a, int e);
bool exp_atom_primitive(AtomId a);

/// A monomial is clean when its exp/power factors are already in reduced
/// position: one exp factor at most (primitive argument), one power atom per
/// base,
/// each power exponent reproducing itself under decomposition. Clean
/// monomials must pass through the fix-up untouched or rebuilding recurses
/// forever.
bool mono_clean(const Monomial& m) {
  int exp_seen = 0;
  std::vector<const Node*> bases;
  for (const auto& [a, e] : m.factors) {
    const Atom& at = atom_info(a);
    switch (at.kind) {
      case AtomKind::Exp:
        if (++exp_seen > 1 || !exp_atom_primitive(a)) return false;
        break;
      case AtomKind::Pow: {
        const Node* b = at.a.node();
        if (std::find(bases.begin(), bases.end(), b) != bases.end())
          return false;
        bases.push_back(b);
        if (!pow_factor_clean(a, e)) return false;
        break;
      }
      default:
        break;
    }
  }
  return true;
}

Expr atom_to_expr(AtomId id) {
  const Atom& at = atom_info(id);
  switch (at.kind) {
    case AtomKind::Var:
      return make_var(VarId{at.sym});
    case AtomKind::Func:
      return make_func(FuncSymbolId{at.sym}, at.deriv);
    case AtomKind::Exp:
      return make_exp(at.a);
    case AtomKind::Ln:
      return make_ln(at.a);
    case AtomKind::Pow:
      return make_power(at.a, at.b);
  }
  throw Error("unreachable atom kind");
}

Expr poly_to_expr(const Poly& p) {
  if (p.is_zero()) return make_int(0);
  std::vector<Expr> terms;
  for (auto it = p.terms().rbegin(); it != p.terms().rend(); ++it) {
    const auto& [m, c] = *it;
    std::vector<Expr> factors;
    if (c != 1 || m.empty()) factors.push_back(make_rational(c));
    for (const auto& [a, e] : m.factors) {
      const Atom& at = atom_info(a);
      if (at.kind == AtomKind::Exp && e != 1) {
        factors.push_back(make_exp(canonicalize(make_int(e) * at.a)));
        continue;
      }
      Expr ae = atom_to_expr(a);
      factors.push_back(e == 1 ? ae : make_power(ae, make_int(e)));
    }
    terms.push_back(make_product(std::move(factors)));
  }
  return make_sum(std::move(terms));
}

long to_long(const mpz_class& z) {
  if (!z.fits_slong_p()) throw Error("exponent out of machine range");
  return z.get_si();
}

/// Splits a constant non-integer exponent E as k + n*g with k, n integers
/// and g the family generator shared by all exponents that differ from E by
/// integers and integer multiples. Deterministic; self-consistent in the
/// sense that decomposing n*g yields (0, n, g) again.
struct ExpDecomp {
  long k = 0;
  long n = 1;
  Expr g;
};

ExpDecomp decompose_exponent(Expr E);

RNF fix_poly(const Poly& p);
RNF fix_monomial(const Monomial& m, const Rational& c);

/// Worklist product: folds the numerator and denominator factor lists with
/// the monomial fix-up pass until a single reduced fraction remains.
RNF combine(std::vector<Poly> nums, std::vector<Poly> dens) {
  for (const Poly& d : dens)
    if (d.is_zero()) throw Error("division by zero in canonical form");
  for (const Poly& n : nums)
    if (n.is_zero()) return RNF{};
  if (dens.empty()) dens.push_back(Poly(Rational(1)));
  int guard = 0;
  while (nums.size() > 1 || dens.size() > 1) {
    if (++guard > 200)
      throw InconsistencyError("canonical product failed to stabilize");
    bool on_num = nums.size() > 1;
    auto& side = on_num ? nums : dens;
    auto& other = on_num ? dens : nums;
    Poly p = std::move(side.back());
    side.pop_back();
    Poly q = std::move(side.back());
    side.pop_back();
    RNF f = fix_poly(p * q);
    if (f.num.is_zero()) {
      if (!on_num) throw Error("division by zero in canonical form");
      return RNF{};
    }
    side.push_back(std::move(f.num));
    if (!is_one(f.den)) other.push_back(std::move(f.den));
  }
  return frac(std::move(nums.front()), std::move(dens.front()));
}

/// Multiplies acc by base^E where base is a canonical expression and E a
/// canonical exponent: integer exponents go through repeated squaring,
/// anything else through the k + n*g decomposition and a power atom.
void apply_pow(RNF& acc, Expr base, Expr E) {
  if (!E.valid() || E.is_zero_literal()) return;
  if (E.is_integer_literal()) {
    acc = rnf_mul(acc, rnf_pow_int(to_rnf(base), to_long(E.rational().get_num())));
    return;
  }
  ExpDecomp d = decompose_exponent(E);
  if (d.k != 0) acc = rnf_mul(acc, rnf_pow_int(to_rnf(base), d.k));
  Atom at;
  at.kind = AtomKind::Pow;
  at.a = base;
  at.b = d.g;
  AtomId a = intern_atom(at);
  RNF f;
  if (d.n > 0) {
    f.num = Poly::atom(a, static_cast<int>(d.n));
  } else {
    f.num = Poly(Rational(1));
    f.den = Poly::atom(a, static_cast<int>(-d.n));
  }
  acc = rnf_mul(acc, f);
}

/// exp(arg) as a power of a primitive exponential: the argument is split as
/// n*g with n a (signed) integer and g the content-free generator, and the
/// result is atom(exp(g))^n. This keeps exp(k*u) for varying k on one atom so
/// polynomial gcd sees their common factors.
RNF exp_rnf(Expr arg) {
  Expr a = canonicalize(arg);
  if (a.is_zero_literal()) return one_rnf();
  RNF re = to_rnf(a);
  long n = 1;
  Expr g = a;
  Rational c = content(re.num);
  int sign = sgn(re.num.leading_coefficient());
  if (c.get_num().fits_slong_p() && !(c.get_num() == 1 && sign > 0)) {
    n = sign * c.get_num().get_si();
    RNF grnf = frac(re.num.mul_term(Monomial{}, Rational(1) / Rational(n)),
                    re.den);
    g = rnf_to_expr(grnf);
    seed_canonical(g, grnf);
  }
  Atom at;
  at.kind = AtomKind::Exp;
  at.a = g;
  AtomId id = intern_atom(at);
  RNF out = one_rnf();
  if (n > 0)
    out.num = Poly::atom(id, static_cast<int>(n));
  else
    out.den = Poly::atom(id, static_cast<int>(-n));
  return out;
}

bool exp_atom_primitive(AtomId a) {
  static std::mutex mu;
  static std::map<AtomId, bool> cache;
  {
    std::lock_guard<std::mutex> lk(mu);
    auto it = cache.find(a);
    if (it != cache.end()) return it->second;
  }
  RNF re = to_rnf(atom_info(a).a);
  Rational c = content(re.num);
  // mirrors the exp_rnf split exactly, including the machine-range guard
  bool prim = !c.get_num().fits_slong_p() ||
              (c.get_num() == 1 && re.num.leading_coefficient() > 0);
  std::lock_guard<std::mutex> lk(mu);
  cache.emplace(a, prim);
  return prim;
}

/// Rebuilds one raw monomial: merges exp factors into a single exp of the
/// combined argument and recombines power atoms per base.
RNF fix_monomial(const Monomial& m, const Rational& c) {
  std::vector<std::pair<AtomId, int>> plain;
  std::vector<Expr> exp_terms;
  std::map<Expr, std::vector<Expr>> pow_terms;
  for (const auto& [a, e] : m.factors) {
    const Atom& at = atom_info(a);
    switch (at.kind) {
      case AtomKind::Var:
      case AtomKind::Func:
      case AtomKind::Ln:
        plain.emplace_back(a, e);
        break;
      case AtomKind::Exp:
        exp_terms.push_back(e == 1 ? at.a : make_int(e) * at.a);
        break;
      case AtomKind::Pow:
        pow_terms[at.a].push_back(e == 1 ? at.b : make_int(e) * at.b);
        break;
    }
  }
  std::sort(plain.begin(), plain.end());
  Monomial pm;
  pm.factors = std::move(plain);
  Poly base;
  base.add_term(pm, c);
  RNF acc{std::move(base), Poly(Rational(1))};
  if (!exp_terms.empty())
    acc = rnf_mul(acc, exp_rnf(make_sum(std::move(exp_terms))));
  for (const auto& [b, pieces] : pow_terms)
    apply_pow(acc, b, canonicalize(make_sum(pieces)));
  return acc;
}

RNF fix_poly(const Poly& p) {
  bool any = false;
  for (const auto& [m, c] : p.terms())
    if (mono_has_special(m) && !mono_clean(m)) {
      any = true;
      break;
    }
  if (!any) return RNF{p, Poly(Rational(1))};
  RNF acc;
  Poly clean;
  for (const auto& [m, c] : p.terms()) {
    if (!mono_has_special(m) || mono_clean(m)) {
      clean.add_term(m, c);
      continue;
    }
    acc = rnf_add(acc, fix_monomial(m, c));
  }
  if (!clean.is_zero()) acc = rnf_add(acc, RNF{std::move(clean), Poly(Rational(1))});
  return acc;
}

ExpDecomp decompose_exponent(Expr E) {
  ExpDecomp out;
  if (E.is_rational()) {
    const Rational& q = E.rational();
    mpz_class fl;
    mpz_fdiv_q(fl.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    out.k = to_long(fl);
    Rational r = q - Rational(fl);
    out.n = to_long(r.get_num());
    out.g = make_rational(Rational(mpz_class(1), r.get_den()));
    return out;
  }
  RNF re = to_rnf(E);
  Poly q, r;
  poly_divmod(re.num, re.den, q, r);
  Rational c0(0);
  auto it = q.terms().find(Monomial{});
  if (it != q.terms().end()) c0 = it->second;
  mpz_class fl;
  mpz_fdiv_q(fl.get_mpz_t(), c0.get_num_mpz_t(), c0.get_den_mpz_t());
  out.k = to_long(fl);
  Poly fnum = re.num - re.den.mul_term(Monomial{}, Rational(out.k));
  if (fnum.is_zero())
    throw Error("integer exponent reached symbolic decomposition");
  Rational cont = content(fnum);
  long mag = cont.get_num().fits_slong_p() ? cont.get_num().get_si() : 1;
  if (mag == 0) mag = 1;
  int sign = sgn(fnum.leading_coefficient());
  out.n = sign >= 0 ? mag : -mag;
  RNF grnf{fnum.mul_term(Monomial{}, Rational(1) / Rational(out.n)), re.den};
  out.g = rnf_to_expr(grnf);
  seed_canonical(out.g, grnf);
  return out;
}

bool pow_factor_clean(AtomId a, int e) {
  if (e == 1) return true;
  static std::mutex mu;
  static std::map<std::pair<AtomId, int>, bool> cache;
  {
    std::lock_guard<std::mutex> lk(mu);
    auto it = cache.find({a, e});
    if (it != cache.end()) return it->second;
  }
  const Atom& at = atom_info(a);
  bool clean;
  if (at.b.is_rational()) {
    Rational eg = at.b.rational() * e;
    clean = eg > 0 && eg < 1 && eg.get_num() == e;
  } else {
    ExpDecomp d = decompose_exponent(canonicalize(make_int(e) * at.b));
    clean = d.k == 0 && d.n == e && d.g == at.b;
  }
  std::lock_guard<std::mutex> lk(mu);
  cache.emplace(std::make_pair(a, e), clean);
  return clean;
}

/// base^E for a polynomial base and constant non-integer exponent: splits
/// off the monomial content and rational content so that equal factors built
/// along different routes land on the same atoms.
RNF pow_poly_frac(const Poly& P, Expr E) {
  RNF acc = one_rnf();
  Monomial mc = monomial_content(P);
  Poly Q = div_monomial(P, mc);
  Rational c = content(Q);
  Q = primitive_part(Q);
  if (c != 1) apply_pow(acc, make_rational(c), E);
  for (const auto& [a, e] : mc.factors) {
    const Atom& at = atom_info(a);
    Expr totalE = canonicalize(make_int(e) * E);
    if (at.kind == AtomKind::Exp) {
      acc = rnf_mul(acc, exp_rnf(totalE * at.a));
    } else if (at.kind == AtomKind::Pow) {
      apply_pow(acc, at.a, canonicalize(totalE * at.b));
    } else {
      apply_pow(acc, atom_to_expr(a), totalE);
    }
  }
  if (!is_one(Q)) apply_pow(acc, poly_to_expr(Q), E);
  return acc;
}

RNF to_rnf_uncached(Expr e) {
  switch (e.kind()) {
    case NodeKind::RationalConst:
      return RNF{Poly(e.rational()), Poly(Rational(1))};
    case NodeKind::Var:
      return RNF{Poly::atom(var_atom(e.var())), Poly(Rational(1))};
    case NodeKind::FuncApp:
      return RNF{Poly::atom(func_atom(e.func(), e.deriv())), Poly(Rational(1))};
    case NodeKind::Sum: {
      RNF acc;
      for (const Expr& k : e.children()) acc = rnf_add(acc, to_rnf(k));
      return acc;
    }
    case NodeKind::Product: {
      RNF acc = one_rnf();
      for (const Expr& k : e.children()) {
        acc = rnf_mul(acc, to_rnf(k));
        if (acc.num.is_zero()) break;
      }
      return acc;
    }
    case NodeKind::Power: {
      Expr ce = canonicalize(e.child(1));
      RNF b = to_rnf(e.child(0));
      if (ce.is_integer_literal())
        return rnf_pow_int(b, to_long(ce.rational().get_num()));
      if (b.num.is_zero())
        throw Error("zero base with non-integer exponent");
      RNF n = pow_poly_frac(b.num, ce);
      if (is_one(b.den)) return n;
      return rnf_div(n, pow_poly_frac(b.den, ce));
    }
    case NodeKind::Exp:
      return exp_rnf(e.child(0));
    case NodeKind::Ln: {
      Expr a = canonicalize(e.child(0));
      if (a.is_one_literal()) return RNF{};
      if (a.kind() == NodeKind::Exp) return to_rnf(a.child(0));
      Atom at;
      at.kind = AtomKind::Ln;
      at.a = a;
      return RNF{Poly::atom(intern_atom(at)), Poly(Rational(1))};
    }
  }
  throw Error("unreachable expression kind");
}

struct DepthGuard {
  int& d;
  explicit DepthGuard(int& depth) : d(depth) {
    if (++d > 100)
      throw InconsistencyError("canonical reduction failed to stabilize");
  }
  ~DepthGuard() { --d; }
};

}  // namespace

RNF to_rnf(Expr e) {
  if (!e.valid()) throw Error("invalid expression");
  {
    RnfCache& c = rnf_cache();
    std::lock_guard<std::mutex> lk(c.mu);
    auto it = c.map.find(e.node());
    if (it != c.map.end()) return it->second;
  }
  RNF r = to_rnf_uncached(e);
  RnfCache& c = rnf_cache();
  std::lock_guard<std::mutex> lk(c.mu);
  c.map.emplace(e.node(), r);
  return r;
}

Expr rnf_to_expr(const RNF& r) {
  Expr n = poly_to_expr(r.num);
  if (is_one(r.den)) return n;
  return n / poly_to_expr(r.den);
}

RNF rnf_add(const RNF& a, const RNF& b) {
  if (a.num.is_zero()) return b;
  if (b.num.is_zero()) return a;
  thread_local int depth = 0;
  DepthGuard guard(depth);
  if (a.den == b.den) return frac(a.num + b.num, a.den);
  RNF t1 = fix_poly(a.num * b.den);
  RNF t2 = fix_poly(b.num * a.den);
  RNF s = (t1.den == t2.den) ? frac(t1.num + t2.num, t1.den) : rnf_add(t1, t2);
  RNF d = fix_poly(a.den * b.den);
  return rnf_div(s, d);
}

RNF rnf_mul(const RNF& a, const RNF& b) {
  if (a.num.is_zero() || b.num.is_zero()) return RNF{};
  return combine({a.num, b.num}, {a.den, b.den});
}

RNF rnf_div(const RNF& a, const RNF& b) {
  if (b.num.is_zero()) throw Error("division by zero in canonical form");
  if (a.num.is_zero()) return RNF{};
  return combine({a.num, b.den}, {a.den, b.num});
}

RNF rnf_neg(const RNF& a) {
  return RNF{-a.num, a.den};
}

RNF rnf_pow_int(const RNF& a, long n) {
  if (n == 0) return one_rnf();
  if (n < 0) {
    if (a.num.is_zero()) throw Error("division by zero in canonical form");
    RNF inv{a.den, a.num};
    reduce(inv);
    return rnf_pow_int(inv, -n);
  }
  RNF r = one_rnf();
  RNF base = a;
  while (n) {
    if (n & 1) r = rnf_mul(r, base);
    n >>= 1;
    if (n) base = rnf_mul(base, base);
  }
  return r;
}

}  // namespace detail

namespace {

bool poly_has_transcendental(const detail::Poly& p) {
  for (detail::AtomId a : p.atoms()) {
    detail::AtomKind k = detail::atom_info(a).kind;
    if (k == detail::AtomKind::Exp || k == detail::AtomKind::Ln ||
        k == detail::AtomKind::Pow)
      return true;
  }
  return false;
}

}  // namespace

Expr canonicalize(Expr e) {
  if (!e.valid()) throw Error("invalid expression");
  Expr hit = Session::instance().cached_canonical(e);
  if (hit.valid()) return hit;
  detail::RNF r = detail::to_rnf(e);
  Expr out = detail::rnf_to_expr(r);
  detail::seed_canonical(out, r);
  Session::instance().remember_canonical(e, out);
  return out;
}

bool is_zero_symbolic(Expr e) { return detail::to_rnf(e).num.is_zero(); }

bool is_zero(Expr e) {
  detail::RNF r = detail::to_rnf(e);
  if (r.num.is_zero()) return true;
  if (!poly_has_transcendental(r.num) && !poly_has_transcendental(r.den))
    return false;

  // The symbolic kernel says nonzero; confirm on random samples so a missing
  // exp/ln/power identity cannot silently flip a verdict.
  Expr canon = canonicalize(e);
  std::vector<VarId> vars;
  collect_vars(canon, vars);
  std::vector<FuncSymbolId> funcs;
  collect_funcs(canon, funcs);
  std::mt19937_64 rng(0x51CB94D02A17E6F3ULL);
  Oracles oracles;
  for (FuncSymbolId f : funcs) {
    const auto& argv = Session::instance().func_args(f);
    for (VarId v : argv)
      if (std::find(vars.begin(), vars.end(), v) == vars.end())
        vars.push_back(v);
    oracles[f] = exp_mode_oracle(rng, argv.size());
  }
  std::uniform_real_distribution<double> dist(0.6, 2.4);
  int ok = 0;
  for (int trial = 0; trial < 32; ++trial) {
    Bindings b;
    for (VarId v : vars) b[v] = dist(rng);
    try {
      double v = eval_numeric(canon, b, oracles);
      ++ok;
      if (std::fabs(v) > 1e-12) return false;
    } catch (const EvalError&) {
    }
  }
  if (ok >= 8)
    throw InconsistencyError(
        "expression is symbolically nonzero but vanishes at every sample "
        "point: " +
        to_string(canon));
  return false;
}

bool equal_modulo_canonical(Expr a, Expr b) {
  return canonicalize(a) == canonicalize(b);
}

std::optional<Rational> rational_constant(Expr e) {
  Expr c = canonicalize(e);
  if (c.is_rational()) return c.rational();
  return std::nullopt;
}

}  // namespace cartanlab
