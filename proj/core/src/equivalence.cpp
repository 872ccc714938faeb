#include "cartanlab/equivalence.hpp"

#include <algorithm>
#include <cmath>

#include "cartanlab/eval.hpp"

namespace cartanlab {

namespace {

Expr apply_op(const InvariantOperator& op, Expr f) {
  return canonicalize(op.coefficient * diff(f, op.base));
}

// invariants plus all words in D1, D2 of length <= order applied to them
void build_words(const InvariantFrame& frame, int order,
                 std::vector<std::string>& names, std::vector<Expr>& fns) {
  for (const auto& [name, f] : frame.invariants) {
    names.push_back(name);
    fns.push_back(f);
  }
  size_t level_begin = 0, level_end = fns.size();
  for (int o = 0; o < order; ++o) {
    for (size_t i = level_begin; i < level_end; ++i) {
      fns.push_back(apply_op(frame.d1, fns[i]));
      names.push_back("D1 " + names[i]);
      fns.push_back(apply_op(frame.d2, fns[i]));
      names.push_back("D2 " + names[i]);
    }
    level_begin = level_end;
    level_end = fns.size();
  }
}

// one equation's map prepared for numeric work
struct NumericMap {
  std::vector<Expr> fns, dts, dxs;
  std::vector<Expr> guards;  // operator coefficients; must stay > 1e-8
  VarId t, x;
  Bindings base;  // declared constants, pre-bound
  const Oracles* oracles = nullptr;

  bool guard_ok(double tv, double xv) const {
    Bindings b = base;
    b[t] = tv;
    b[x] = xv;
    try {
      for (Expr g : guards)
        if (std::abs(eval_numeric(g, b, *oracles)) <= 1e-8) return false;
      for (Expr f : fns) {
        double v = eval_numeric(f, b, *oracles);
        if (!std::isfinite(v)) return false;
      }
    } catch (const EvalError&) {
      return false;
    }
    return true;
  }

  double value(size_t i, double tv, double xv) const {
    Bindings b = base;
    b[t] = tv;
    b[x] = xv;
    return eval_numeric(fns[i], b, *oracles);
  }

  void gradient(size_t i, double tv, double xv, double& gt, double& gx) const {
    Bindings b = base;
    b[t] = tv;
    b[x] = xv;
    gt = eval_numeric(dts[i], b, *oracles);
    gx = eval_numeric(dxs[i], b, *oracles);
  }
};

NumericMap make_numeric(const std::vector<Expr>& fns,
                        const InvariantFrame& frame, VarId t, VarId x,
                        const Bindings& consts, const Oracles& oracles) {
  NumericMap m;
  m.fns = fns;
  for (Expr f : fns) {
    m.dts.push_back(canonicalize(diff(f, t)));
    m.dxs.push_back(canonicalize(diff(f, x)));
  }
  m.guards = {frame.d1.coefficient, frame.d2.coefficient};
  m.t = t;
  m.x = x;
  m.base = consts;
  m.oracles = &oracles;
  return m;
}

// rank of the 2-column Jacobian over a subset of rows, maximized over
// samples; eigenvalues of the Gram matrix are squared singular values, so
// the 1e-16 relative eigenvalue cut is a 1e-8 relative singular-value cut
int subset_rank(const NumericMap& m, const std::vector<size_t>& rows,
                const std::vector<std::array<double, 2>>& samples) {
  int rank = 0;
  for (auto [tv, xv] : samples) {
    double g11 = 0, g12 = 0, g22 = 0;
    try {
      for (size_t i : rows) {
        double a, c;
        m.gradient(i, tv, xv, a, c);
        g11 += a * a;
        g12 += a * c;
        g22 += c * c;
      }
    } catch (const EvalError&) {
      continue;
    }
    double tr = g11 + g22;
    double det = g11 * g22 - g12 * g12;
    double disc = std::sqrt(std::max(0.0, tr * tr / 4 - det));
    double e1 = tr / 2 + disc, e2 = tr / 2 - disc;
    double thresh = 1e-16 * std::max(e1, 1.0);
    rank = std::max(rank, (e1 > thresh ? 1 : 0) + (e2 > thresh ? 1 : 0));
  }
  return rank;
}

std::vector<std::array<double, 2>> draw_samples(const NumericMap& m,
                                                const SampleDomain& dom,
                                                std::mt19937_64& rng, int want,
                                                double margin) {
  double tw = dom.t_hi - dom.t_lo, xw = dom.x_hi - dom.x_lo;
  std::uniform_real_distribution<double> dt(dom.t_lo + margin * tw,
                                            dom.t_hi - margin * tw);
  std::uniform_real_distribution<double> dx(dom.x_lo + margin * xw,
                                            dom.x_hi - margin * xw);
  std::vector<std::array<double, 2>> out;
  for (int trial = 0; trial < 20 * want && (int)out.size() < want; ++trial) {
    double tv = dt(rng), xv = dx(rng);
    if (m.guard_ok(tv, xv)) out.push_back({tv, xv});
  }
  if (out.empty()) throw Error("no generic point found");
  return out;
}

void collect_symbols(const std::vector<Expr>& fns, std::vector<VarId>& vars,
                     std::vector<FuncSymbolId>& funcs) {
  for (Expr f : fns) {
    collect_vars(f, vars);
    collect_funcs(f, funcs);
  }
}

void seed_symbols(const std::vector<VarId>& vars,
                  const std::vector<FuncSymbolId>& funcs, VarId t, VarId x,
                  uint64_t seed, Bindings& consts, Oracles& oracles) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.6, 2.4);
  for (VarId v : vars)
    if (v != t && v != x && !consts.count(v)) consts[v] = dist(rng);
  for (FuncSymbolId f : funcs)
    if (!oracles.count(f))
      oracles[f] = exp_mode_oracle(rng, Session::instance().func_args(f).size());
}

// damped Gauss-Newton on sum_j ((f_j - target_j)/scale_j)^2 over the rows in
// coords; converged when every component is within tol of its target
bool newton_match(const NumericMap& m, const std::vector<size_t>& coords,
                  const std::vector<double>& targets,
                  const std::vector<double>& scales, double tol,
                  double tv, double xv, double& out_t, double& out_x) {
  double lambda = 1e-10;
  size_t r = coords.size();
  for (int iter = 0; iter < 80; ++iter) {
    std::vector<double> F(r), Jt(r), Jx(r);
    try {
      for (size_t j = 0; j < r; ++j) {
        F[j] = (m.value(coords[j], tv, xv) - targets[j]) / scales[j];
        double a, c;
        m.gradient(coords[j], tv, xv, a, c);
        Jt[j] = a / scales[j];
        Jx[j] = c / scales[j];
      }
    } catch (const EvalError&) {
      return false;
    }
    double worst = 0;
    for (double f : F) worst = std::max(worst, std::abs(f));
    if (worst <= tol) {
      out_t = tv;
      out_x = xv;
      return true;
    }
    // normal equations (J^T J + lambda I) delta = -J^T F
    double a11 = lambda, a12 = 0, a22 = lambda, b1 = 0, b2 = 0;
    for (size_t j = 0; j < r; ++j) {
      a11 += Jt[j] * Jt[j];
      a12 += Jt[j] * Jx[j];
      a22 += Jx[j] * Jx[j];
      b1 -= Jt[j] * F[j];
      b2 -= Jx[j] * F[j];
    }
    double det = a11 * a22 - a12 * a12;
    if (det == 0 || !std::isfinite(det)) return false;
    double step_t = (b1 * a22 - b2 * a12) / det;
    double step_x = (a11 * b2 - a12 * b1) / det;
    double len = std::hypot(step_t, step_x);
    if (len > 0.5) {  // keep steps local to the search box
      step_t *= 0.5 / len;
      step_x *= 0.5 / len;
    }
    tv += step_t;
    xv += step_x;
    lambda = std::max(lambda / 2, 1e-12);
  }
  return false;
}

}  // namespace

ClassifyingMap classifying_map(const LinearHyperbolicEquation& eq,
                               const InvariantFrame& frame, int order,
                               uint64_t seed, int samples, SampleDomain dom) {
  if (order < 0 || order > 2)
    throw Error("classifying map supports orders 0..2");
  ClassifyingMap out;
  build_words(frame, order, out.names, out.functions);

  std::vector<VarId> vars;
  std::vector<FuncSymbolId> funcs;
  collect_symbols(out.functions, vars, funcs);
  Bindings consts;
  Oracles oracles;
  seed_symbols(vars, funcs, eq.t, eq.x, seed, consts, oracles);
  NumericMap m = make_numeric(out.functions, frame, eq.t, eq.x, consts, oracles);

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  out.samples = draw_samples(m, dom, rng, samples, 0.0);
  std::vector<size_t> all(out.functions.size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = i;
  out.rank = subset_rank(m, all, out.samples);
  return out;
}

std::string to_string(EquivVerdict v) {
  switch (v) {
    case EquivVerdict::Equivalent: return "Equivalent";
    case EquivVerdict::Inequivalent: return "Inequivalent";
    case EquivVerdict::Inconclusive: return "Inconclusive";
  }
  throw Error("unreachable verdict");
}

EquivalenceResult equivalent(const LinearHyperbolicEquation& a,
                             const LinearHyperbolicEquation& b,
                             const EquivConfig& config) {
  if (config.tol <= 0) throw Error("tol must be positive");
  if (config.samples < 1 || config.multistart < 1)
    throw Error("sample budget must be positive");
  EquivalenceResult res;
  res.domain = config.domain;

  Subclass sa = classify(a), sb = classify(b);
  res.evidence.push_back("subclass A = " + to_string(sa.tag));
  res.evidence.push_back("subclass B = " + to_string(sb.tag));
  if (sa.tag != sb.tag) {
    res.verdict = EquivVerdict::Inequivalent;
    res.evidence.push_back("subclasses differ");
    return res;
  }
  if (sa.tag == SubclassTag::C1) {
    res.verdict = EquivVerdict::Equivalent;
    res.evidence.push_back("both reduce to the wave equation");
    return res;
  }
  if (sa.tag == SubclassTag::C6) {
    ContactInvariants ca = contact_invariants(a), cb = contact_invariants(b);
    bool pm = is_zero(canonicalize(ca.P - cb.P));
    bool qm = is_zero(canonicalize(ca.Q - cb.Q));
    res.evidence.push_back(std::string("P match: ") + (pm ? "yes" : "no"));
    res.evidence.push_back(std::string("Q match: ") + (qm ? "yes" : "no"));
    res.verdict =
        pm && qm ? EquivVerdict::Equivalent : EquivVerdict::Inequivalent;
    return res;
  }

  // C2-C5: compare sampled classifying maps of order 2
  InvariantFrame fa = invariant_frame(a, sa.tag);
  InvariantFrame fb = invariant_frame(b, sb.tag);
  std::vector<std::string> names;
  std::vector<Expr> fns_a, fns_b;
  {
    std::vector<std::string> dummy;
    build_words(fa, 2, names, fns_a);
    build_words(fb, 2, dummy, fns_b);
  }

  // constants and function symbols shared across both equations
  std::vector<VarId> vars;
  std::vector<FuncSymbolId> funcs;
  collect_symbols(fns_a, vars, funcs);
  collect_symbols(fns_b, vars, funcs);
  Bindings consts;
  Oracles oracles;
  seed_symbols(vars, funcs, a.t, a.x, config.seed, consts, oracles);

  NumericMap ma = make_numeric(fns_a, fa, a.t, a.x, consts, oracles);
  NumericMap mb = make_numeric(fns_b, fb, b.t, b.x, consts, oracles);

  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ull);
  // A is sampled away from the boundary so the matching point in B has room
  auto samples_a = draw_samples(ma, config.domain, rng, config.samples, 0.25);
  auto rank_pts_b = draw_samples(mb, config.domain, rng, 10, 0.0);

  std::vector<size_t> all(names.size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = i;
  int rank_a = subset_rank(ma, all, samples_a);
  int rank_b = subset_rank(mb, all, rank_pts_b);
  res.evidence.push_back("rank A = " + std::to_string(rank_a));
  res.evidence.push_back("rank B = " + std::to_string(rank_b));
  if (rank_a != rank_b) {
    res.verdict = EquivVerdict::Inequivalent;
    res.evidence.push_back("classifying-map ranks differ");
    return res;
  }

  // greedy choice of rank-many coordinate invariants
  std::vector<size_t> coords;
  for (size_t i = 0; i < all.size() && (int)coords.size() < rank_a; ++i) {
    std::vector<size_t> trial = coords;
    trial.push_back(i);
    if (subset_rank(ma, trial, samples_a) > (int)coords.size())
      coords = trial;
  }
  {
    std::string c = "coordinates:";
    for (size_t i : coords) c += " " + names[i];
    res.evidence.push_back(c);
  }

  double tw = config.domain.t_hi - config.domain.t_lo;
  double xw = config.domain.x_hi - config.domain.x_lo;
  int matched = 0, unresolved = 0;
  for (auto [ta, xa] : samples_a) {
    std::vector<double> targets, scales;
    bool sample_ok = true;
    try {
      for (size_t j : coords) {
        double v = ma.value(j, ta, xa);
        targets.push_back(v);
        scales.push_back(std::max(1.0, std::abs(v)));
      }
    } catch (const EvalError&) {
      sample_ok = false;
    }
    if (!sample_ok) {
      ++unresolved;
      continue;
    }
    bool found = false;
    for (int i = 0; i < config.multistart && !found; ++i) {
      for (int j = 0; j < config.multistart && !found; ++j) {
        double t0 = config.domain.t_lo + (i + 0.5) * tw / config.multistart;
        double x0 = config.domain.x_lo + (j + 0.5) * xw / config.multistart;
        double tb, xb;
        if (!newton_match(mb, coords, targets, scales, config.tol, t0, x0,
                          tb, xb))
          continue;
        if (!mb.guard_ok(tb, xb)) continue;
        found = true;
        // coordinates agree to tol; every other invariant must follow
        for (size_t k = 0; k < names.size(); ++k) {
          if (std::find(coords.begin(), coords.end(), k) != coords.end())
            continue;
          double va, vb;
          try {
            va = ma.value(k, ta, xa);
            vb = mb.value(k, tb, xb);
          } catch (const EvalError&) {
            found = false;
            break;
          }
          if (std::abs(va - vb) > 10 * config.tol * std::max(1.0, std::abs(va))) {
            res.verdict = EquivVerdict::Inequivalent;
            res.mismatched_invariant = names[k];
            res.witness_a = {ta, xa};
            res.witness_b = {tb, xb};
            res.evidence.push_back(
                "certified mismatch in " + names[k] + ": " +
                std::to_string(va) + " vs " + std::to_string(vb));
            return res;
          }
        }
      }
    }
    if (found)
      ++matched;
    else
      ++unresolved;
  }
  res.evidence.push_back("matched samples: " + std::to_string(matched) + "/" +
                         std::to_string(samples_a.size()));
  res.verdict = unresolved == 0 && matched > 0 ? EquivVerdict::Equivalent
                                               : EquivVerdict::Inconclusive;
  return res;
}

}  // namespace cartanlab
