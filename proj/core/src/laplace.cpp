#include "cartanlab/laplace.hpp"

#include <algorithm>
#include <cmath>

#include "cartanlab/eval.hpp"

namespace cartanlab {

namespace {

Expr canon_div(Expr num, Expr den) { return canonicalize(num / den); }

}  // namespace

LinearHyperbolicEquation LinearHyperbolicEquation::make(
    Expr T, Expr X, Expr U, std::vector<VarId> constants) {
  LinearHyperbolicEquation eq;
  eq.T = T.valid() ? T : make_int(0);
  eq.X = X.valid() ? X : make_int(0);
  eq.U = U.valid() ? U : make_int(0);
  eq.t = Session::instance().var("t");
  eq.x = Session::instance().var("x");
  eq.constants = std::move(constants);
  eq.validate();
  return eq;
}

void LinearHyperbolicEquation::validate() const {
  std::vector<VarId> vars;
  std::vector<FuncSymbolId> funcs;
  for (Expr e : {T, X, U}) {
    collect_vars(e, vars);
    collect_funcs(e, funcs);
  }
  std::vector<VarId> allowed = {t, x};
  allowed.insert(allowed.end(), constants.begin(), constants.end());
  for (FuncSymbolId f : funcs) {
    for (VarId a : Session::instance().func_args(f))
      if (a != t && a != x)
        throw Error("function symbol '" + Session::instance().func_name(f) +
                    "' must depend on t and/or x only");
  }
  for (VarId v : vars)
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end())
      throw Error("coefficient mentions undeclared symbol '" +
                  Session::instance().var_name(v) + "'");
}

LaplacePair laplace(const LinearHyperbolicEquation& eq) {
  Expr TX = eq.T * eq.X;
  return {canonicalize(-diff(eq.T, eq.t) + TX + eq.U),
          canonicalize(-diff(eq.X, eq.x) + TX + eq.U)};
}

ContactInvariants contact_invariants(const LinearHyperbolicEquation& eq) {
  LaplacePair lp = laplace(eq);
  if (is_zero(lp.H))
    throw LaplaceTrivialError(
        "H == 0: contact invariants undefined (wave class if K == 0 too)");
  Expr Ht = diff(lp.H, eq.t);
  Expr Hx = diff(lp.H, eq.x);
  Expr Htx = diff(Ht, eq.x);
  // (ln|H|)_tx = (H_tx H - H_t H_x)/H^2 independently of the sign of H
  return {canon_div(lp.K, lp.H),
          canon_div(Htx * lp.H - Ht * Hx, lp.H * lp.H * lp.H)};
}

std::string to_string(SubclassTag tag) {
  switch (tag) {
    case SubclassTag::C1: return "C1";
    case SubclassTag::C2: return "C2";
    case SubclassTag::C3: return "C3";
    case SubclassTag::C4: return "C4";
    case SubclassTag::C5: return "C5";
    case SubclassTag::C6: return "C6";
  }
  throw Error("unreachable subclass tag");
}

Subclass classify(const LinearHyperbolicEquation& eq) {
  Subclass out;
  LaplacePair lp = laplace(eq);
  bool h0 = is_zero(lp.H);
  out.witness.push_back({"H == 0", lp.H, h0});
  if (h0) {
    bool k0 = is_zero(lp.K);
    out.witness.push_back({"K == 0", lp.K, k0});
    if (!k0)
      throw HDegenerateError(
          "H == 0 but K != 0: not covered by the P = K/H classification; "
          "swap the roles of t and x (this exchanges H and K) and retry");
    out.tag = SubclassTag::C1;
    return out;
  }
  ContactInvariants ci = contact_invariants(eq);
  Expr Pt = canonicalize(diff(ci.P, eq.t));
  bool pt0 = is_zero(Pt);
  out.witness.push_back({"P_t == 0", Pt, pt0});
  if (!pt0) {
    out.tag = SubclassTag::C2;
    return out;
  }
  Expr Px = canonicalize(diff(ci.P, eq.x));
  bool px0 = is_zero(Px);
  out.witness.push_back({"P_x == 0", Px, px0});
  if (!px0) {
    out.tag = SubclassTag::C3;
    return out;
  }
  Expr Qt = canonicalize(diff(ci.Q, eq.t));
  bool qt0 = is_zero(Qt);
  out.witness.push_back({"Q_t == 0", Qt, qt0});
  if (!qt0) {
    out.tag = SubclassTag::C4;
    return out;
  }
  Expr Qx = canonicalize(diff(ci.Q, eq.x));
  bool qx0 = is_zero(Qx);
  out.witness.push_back({"Q_x == 0", Qx, qx0});
  out.tag = qx0 ? SubclassTag::C6 : SubclassTag::C5;
  return out;
}

InvariantFrame invariant_frame(const LinearHyperbolicEquation& eq,
                               SubclassTag tag) {
  if (tag == SubclassTag::C1 || tag == SubclassTag::C6)
    throw Error("subclass " + to_string(tag) +
                " carries finite data, not an invariant frame");
  LaplacePair lp = laplace(eq);
  ContactInvariants ci = contact_invariants(eq);
  Expr H = lp.H;
  Expr one = make_int(1);
  InvariantFrame f;
  switch (tag) {
    case SubclassTag::C2: {
      Expr Pt = canonicalize(diff(ci.P, eq.t));
      Expr Ptt = diff(Pt, eq.t);
      Expr J = canon_div(diff(H, eq.t) * Pt - H * Ptt, H * Pt * Pt);
      f.invariants = {{"P", ci.P}, {"Q", ci.Q}, {"J", J}};
      f.d1 = {canon_div(one, Pt), eq.t};
      f.d2 = {canon_div(Pt, H), eq.x};
      break;
    }
    case SubclassTag::C3: {
      Expr Px = canonicalize(diff(ci.P, eq.x));
      Expr Pxx = diff(Px, eq.x);
      Expr L = canon_div(diff(H, eq.x) * Px - H * Pxx, H * Px * Px);
      f.invariants = {{"P", ci.P}, {"Q", ci.Q}, {"L", L}};
      f.d1 = {canon_div(Px, H), eq.t};
      f.d2 = {canon_div(one, Px), eq.x};
      break;
    }
    case SubclassTag::C4: {
      Expr Qt = canonicalize(diff(ci.Q, eq.t));
      Expr Qtt = diff(Qt, eq.t);
      Expr M1 = canon_div(diff(Qt, eq.x), H);
      Expr M2 = canon_div(diff(H, eq.t) * Qt - H * Qtt, H * Qt * Qt);
      f.invariants = {{"Q", ci.Q}, {"M1", M1}, {"M2", M2}};
      f.d1 = {canon_div(one, Qt), eq.t};
      f.d2 = {canon_div(Qt, H), eq.x};
      break;
    }
    case SubclassTag::C5: {
      Expr Qx = canonicalize(diff(ci.Q, eq.x));
      Expr Qxx = diff(Qx, eq.x);
      Expr N = canon_div(diff(H, eq.x) * Qx - H * Qxx, H * Qx * Qx);
      f.invariants = {{"Q", ci.Q}, {"N", N}};
      f.d1 = {canon_div(Qx, H), eq.t};
      f.d2 = {canon_div(one, Qx), eq.x};
      break;
    }
    default:
      throw Error("unreachable subclass tag");
  }
  for (const InvariantOperator* op : {&f.d1, &f.d2})
    if (is_zero(op->coefficient))
      throw Error("invariant operator coefficient vanishes");
  return f;
}

LinearHyperbolicEquation canonical_form(const LinearHyperbolicEquation& eq) {
  Subclass sc = classify(eq);
  if (sc.tag != SubclassTag::C6)
    throw Error("canonical_form requires subclass C6, got " +
                to_string(sc.tag));
  ContactInvariants ci = contact_invariants(eq);
  Expr t = make_var(eq.t), x = make_var(eq.x);
  if (is_zero(ci.Q))
    return LinearHyperbolicEquation::make(-t, -(ci.P * x), -(ci.P * t * x),
                                          eq.constants);
  Expr s = t + x;
  return LinearHyperbolicEquation::make(
      canon_div(make_int(2), ci.Q * s), canon_div(make_int(2) * ci.P, ci.Q * s),
      canon_div(make_int(-4) * ci.P, ci.Q * ci.Q * s * s), eq.constants);
}

int jacobian_rank(const std::vector<Expr>& funcs, VarId t, VarId x,
                  uint64_t seed, int samples) {
  std::vector<Expr> dt, dx;
  std::vector<VarId> vars;
  std::vector<FuncSymbolId> symbols;
  for (Expr f : funcs) {
    dt.push_back(diff(f, t));
    dx.push_back(diff(f, x));
    collect_vars(f, vars);
    collect_funcs(f, symbols);
  }
  std::mt19937_64 rng(seed);
  Oracles oracles;
  for (FuncSymbolId f : symbols)
    oracles[f] = exp_mode_oracle(rng, Session::instance().func_args(f).size());
  std::uniform_real_distribution<double> dist(0.6, 2.4);
  int rank = 0;
  int evaluated = 0;
  for (int trial = 0; trial < 8 * samples && evaluated < samples; ++trial) {
    Bindings b;
    b[t] = dist(rng);
    b[x] = dist(rng);
    for (VarId v : vars)
      if (v != t && v != x && !b.count(v)) b[v] = dist(rng);
    // Gram matrix of the rows (d f_i/dt, d f_i/dx); its eigenvalues are the
    // squared singular values of the Jacobian
    double g11 = 0, g12 = 0, g22 = 0;
    try {
      for (size_t i = 0; i < funcs.size(); ++i) {
        double a = eval_numeric(dt[i], b, oracles);
        double c = eval_numeric(dx[i], b, oracles);
        g11 += a * a;
        g12 += a * c;
        g22 += c * c;
      }
    } catch (const EvalError&) {
      continue;
    }
    ++evaluated;
    double tr = g11 + g22;
    double det = g11 * g22 - g12 * g12;
    double disc = std::sqrt(std::max(0.0, tr * tr / 4 - det));
    double e1 = tr / 2 + disc, e2 = tr / 2 - disc;
    double thresh = 1e-16 * std::max(e1, 1.0);
    int r = (e1 > thresh ? 1 : 0) + (e2 > thresh ? 1 : 0);
    rank = std::max(rank, r);
  }
  if (evaluated == 0) throw Error("no generic point found");
  return rank;
}

AlternativeInvariants alternative_invariants(
    const LinearHyperbolicEquation& eq) {
  LaplacePair lp = laplace(eq);
  if (is_zero(lp.H))
    throw LaplaceTrivialError("H == 0: alternative invariants undefined");
  Expr H = lp.H, K = lp.K;
  Expr Ht = diff(H, eq.t), Hx = diff(H, eq.x);
  Expr Kt = diff(K, eq.t), Kx = diff(K, eq.x);
  Expr H3 = H * H * H;
  Expr H9 = canonicalize(H3 * H3 * H3);

  AlternativeInvariants out;
  out.j13 =
      canon_div(K * diff(Ht, eq.x) + H * diff(Kt, eq.x) - Ht * Kx - Hx * Kt,
                H3);
  out.j23 = canon_div((H * Kx - K * Hx) * (H * Kx - K * Hx) *
                          (H * K * diff(Ht, eq.t) - H * H * diff(Kt, eq.t) -
                           make_int(3) * K * Ht * Ht +
                           make_int(3) * H * Ht * Kt),
                      H9);
  out.j33 = canon_div((H * Kt - K * Ht) * (H * Kt - K * Ht) *
                          (H * K * diff(Hx, eq.x) - H * H * diff(Kx, eq.x) -
                           make_int(3) * K * Hx * Hx +
                           make_int(3) * H * Hx * Kx),
                      H9);

  ContactInvariants ci = contact_invariants(eq);
  Expr Pt = canonicalize(diff(ci.P, eq.t));
  Expr Px = canonicalize(diff(ci.P, eq.x));
  out.i = canon_div(Pt * Px, H);

  if (is_zero(K)) {
    out.degenerate.push_back("Qtilde undefined: K == 0");
  } else {
    out.q_tilde = canon_div(diff(Kt, eq.x) * K - Kt * Kx, K * K * K);
  }
  if (is_zero(Pt)) {
    out.degenerate.push_back("J undefined: P_t == 0");
    out.degenerate.push_back("operator D1 = P_t^-1 D_t undefined: P_t == 0");
  } else {
    out.j = canon_div(Ht * Pt - H * diff(Pt, eq.t), H * Pt * Pt);
  }
  if (is_zero(Px))
    out.degenerate.push_back("operator D2 = P_x^-1 D_x undefined: P_x == 0");

  if (out.j.valid()) {
    std::vector<Expr> others = {ci.P, ci.Q, out.j13, out.j23, out.j33, out.i};
    if (out.q_tilde.valid()) others.push_back(out.q_tilde);
    int base = jacobian_rank(others, eq.t, eq.x);
    std::vector<Expr> with_j = others;
    with_j.push_back(out.j);
    int extended = jacobian_rank(with_j, eq.t, eq.x);
    out.j_verdict = extended > base
                        ? AlternativeInvariants::Verdict::Independent
                        : AlternativeInvariants::Verdict::Dependent;
  }
  return out;
}

LinearHyperbolicEquation euler_poisson(Expr kappa) {
  Expr t = make_var(Session::instance().var("t"));
  Expr x = make_var(Session::instance().var("x"));
  Expr s = t + x;
  Expr T = make_int(1) / (kappa * s);
  Expr X = make_int(2) * (make_int(1) - kappa) / (kappa * s);
  Expr U = make_int(-2) * (make_int(1) - kappa) / (kappa * s * kappa * s);
  std::vector<VarId> constants;
  if (kappa.kind() == NodeKind::Var) constants.push_back(kappa.var());
  return LinearHyperbolicEquation::make(T, X, U, std::move(constants));
}

}  // namespace cartanlab
