#include "cartanlab/exterior.hpp"

#include <algorithm>
#include <array>

namespace cartanlab {

namespace {

void require_same_chart(const Chart* a, const Chart* b) {
  if (a == nullptr || b == nullptr) throw Error("form has no chart");
  if (a != b) throw Error("chart mismatch");
}

Expr zero() { return make_int(0); }

}  // namespace

// --- chart -----------------------------------------------------------------

int Chart::index_of(VarId v) const {
  for (size_t i = 0; i < coords.size(); ++i)
    if (coords[i] == v) return static_cast<int>(i);
  return -1;
}

Expr Chart::normalize(Expr e) const {
  return canonicalize(substitute(e, reduction));
}

void Chart::check_scalar(Expr e) const {
  std::vector<FuncSymbolId> funcs;
  collect_funcs(e, funcs);
  if (!funcs.empty())
    throw Error("undetermined function symbol '" +
                Session::instance().func_name(funcs.front()) +
                "' in chart coefficient");
  std::vector<VarId> vars;
  collect_vars(e, vars);
  for (VarId v : vars) {
    if (index_of(v) >= 0) continue;
    if (std::find(constants.begin(), constants.end(), v) != constants.end())
      continue;
    throw Error("symbol '" + Session::instance().var_name(v) +
                "' is neither a chart coordinate nor a declared constant");
  }
}

// --- form containers -------------------------------------------------------

void OneForm::set(int i, Expr e) {
  Expr n = chart->normalize(e);
  if (n.is_zero_literal())
    comp.erase(i);
  else
    comp[i] = n;
}

void OneForm::add(int i, Expr e) {
  auto it = comp.find(i);
  set(i, it == comp.end() ? e : it->second + e);
}

Expr OneForm::get(int i) const {
  auto it = comp.find(i);
  return it == comp.end() ? zero() : it->second;
}

void TwoForm::add(int i, int j, Expr e) {
  if (i == j) return;
  if (i > j) {
    std::swap(i, j);
    e = -e;
  }
  auto key = std::make_pair(i, j);
  auto it = comp.find(key);
  Expr n = chart->normalize(it == comp.end() ? e : it->second + e);
  if (n.is_zero_literal())
    comp.erase(key);
  else
    comp[key] = n;
}

Expr TwoForm::get(int i, int j) const {
  bool flip = i > j;
  if (flip) std::swap(i, j);
  auto it = comp.find({i, j});
  if (it == comp.end()) return zero();
  return flip ? canonicalize(-it->second) : it->second;
}

void ThreeForm::add(int i, int j, int k, Expr e) {
  int v[3] = {i, j, k};
  int sign = 1;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2 - a; ++b)
      if (v[b] > v[b + 1]) {
        std::swap(v[b], v[b + 1]);
        sign = -sign;
      }
  if (v[0] == v[1] || v[1] == v[2]) return;
  auto key = std::make_tuple(v[0], v[1], v[2]);
  if (sign < 0) e = -e;
  auto it = comp.find(key);
  Expr n = chart->normalize(it == comp.end() ? e : it->second + e);
  if (n.is_zero_literal())
    comp.erase(key);
  else
    comp[key] = n;
}

OneForm coordinate_differential(const Chart& chart, VarId v) {
  int i = chart.index_of(v);
  if (i < 0)
    throw Error("'" + Session::instance().var_name(v) +
                "' is not a chart coordinate");
  OneForm w;
  w.chart = &chart;
  w.set(i, make_int(1));
  return w;
}

OneForm zero_one_form(const Chart& chart) {
  OneForm w;
  w.chart = &chart;
  return w;
}

TwoForm zero_two_form(const Chart& chart) {
  TwoForm w;
  w.chart = &chart;
  return w;
}

// --- linear operations -----------------------------------------------------

OneForm operator+(const OneForm& a, const OneForm& b) {
  require_same_chart(a.chart, b.chart);
  OneForm r = a;
  for (const auto& [i, e] : b.comp) r.add(i, e);
  return r;
}

OneForm operator-(const OneForm& a, const OneForm& b) { return a + (-b); }

OneForm operator-(const OneForm& a) {
  OneForm r;
  r.chart = a.chart;
  for (const auto& [i, e] : a.comp) r.comp[i] = canonicalize(-e);
  return r;
}

OneForm operator*(Expr s, const OneForm& a) {
  OneForm r;
  r.chart = a.chart;
  for (const auto& [i, e] : a.comp) r.set(i, s * e);
  return r;
}

TwoForm operator+(const TwoForm& a, const TwoForm& b) {
  require_same_chart(a.chart, b.chart);
  TwoForm r = a;
  for (const auto& [k, e] : b.comp) r.add(k.first, k.second, e);
  return r;
}

TwoForm operator-(const TwoForm& a, const TwoForm& b) { return a + (-b); }

TwoForm operator-(const TwoForm& a) {
  TwoForm r;
  r.chart = a.chart;
  for (const auto& [k, e] : a.comp) r.comp[k] = canonicalize(-e);
  return r;
}

TwoForm operator*(Expr s, const TwoForm& a) {
  TwoForm r;
  r.chart = a.chart;
  for (const auto& [k, e] : a.comp) r.add(k.first, k.second, s * e);
  return r;
}

ThreeForm operator+(const ThreeForm& a, const ThreeForm& b) {
  require_same_chart(a.chart, b.chart);
  ThreeForm r = a;
  for (const auto& [k, e] : b.comp)
    r.add(std::get<0>(k), std::get<1>(k), std::get<2>(k), e);
  return r;
}

ThreeForm operator-(const ThreeForm& a, const ThreeForm& b) {
  ThreeForm neg;
  neg.chart = b.chart;
  for (const auto& [k, e] : b.comp) neg.comp[k] = canonicalize(-e);
  return a + neg;
}

// --- wedge products --------------------------------------------------------

TwoForm wedge(const OneForm& a, const OneForm& b) {
  require_same_chart(a.chart, b.chart);
  TwoForm r;
  r.chart = a.chart;
  for (const auto& [i, ea] : a.comp)
    for (const auto& [j, eb] : b.comp) r.add(i, j, ea * eb);
  return r;
}

ThreeForm wedge(const OneForm& a, const TwoForm& b) {
  require_same_chart(a.chart, b.chart);
  ThreeForm r;
  r.chart = a.chart;
  for (const auto& [i, ea] : a.comp)
    for (const auto& [k, eb] : b.comp)
      r.add(i, k.first, k.second, ea * eb);
  return r;
}

ThreeForm wedge(const TwoForm& a, const OneForm& b) { return wedge(b, a); }

// --- exterior derivative ---------------------------------------------------

OneForm d(const Chart& chart, Expr f) {
  Expr nf = chart.normalize(f);
  chart.check_scalar(nf);
  OneForm r;
  r.chart = &chart;
  for (size_t i = 0; i < chart.coords.size(); ++i)
    r.set(static_cast<int>(i), diff(nf, chart.coords[i]));
  return r;
}

TwoForm d(const OneForm& w) {
  if (w.chart == nullptr) throw Error("form has no chart");
  const Chart& chart = *w.chart;
  TwoForm r;
  r.chart = &chart;
  for (const auto& [i, e] : w.comp) {
    OneForm de = d(chart, e);
    for (const auto& [j, c] : de.comp) r.add(j, i, c);
  }
  return r;
}

ThreeForm d(const TwoForm& w) {
  if (w.chart == nullptr) throw Error("form has no chart");
  const Chart& chart = *w.chart;
  ThreeForm r;
  r.chart = &chart;
  for (const auto& [k, e] : w.comp) {
    OneForm de = d(chart, e);
    for (const auto& [j, c] : de.comp) r.add(j, k.first, k.second, c);
  }
  return r;
}

// --- comparisons -----------------------------------------------------------

bool form_is_zero(const OneForm& a) {
  for (const auto& [i, e] : a.comp)
    if (!is_zero(e)) return false;
  return true;
}

bool form_is_zero(const TwoForm& a) {
  for (const auto& [k, e] : a.comp)
    if (!is_zero(e)) return false;
  return true;
}

bool form_is_zero(const ThreeForm& a) {
  for (const auto& [k, e] : a.comp)
    if (!is_zero(e)) return false;
  return true;
}

bool forms_equal(const OneForm& a, const OneForm& b) {
  require_same_chart(a.chart, b.chart);
  return form_is_zero(a - b);
}

bool forms_equal(const TwoForm& a, const TwoForm& b) {
  require_same_chart(a.chart, b.chart);
  return form_is_zero(a - b);
}

bool forms_equal(const ThreeForm& a, const ThreeForm& b) {
  require_same_chart(a.chart, b.chart);
  return form_is_zero(a - b);
}

// --- ideal membership ------------------------------------------------------

namespace {

using Row = std::vector<Expr>;

bool entry_zero(Expr e) { return e.is_zero_literal() || is_zero(e); }

// Gauss-Jordan inverse over the canonical rational-expression field.
std::vector<Row> invert_matrix(const std::vector<Row>& M) {
  const int n = static_cast<int>(M.size());
  std::vector<Row> A(n, Row(2 * n, zero()));
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) A[r][c] = M[r][c];
    A[r][n + r] = make_int(1);
  }
  for (int col = 0; col < n; ++col) {
    int pr = -1;
    for (int r = col; r < n; ++r)
      if (!entry_zero(A[r][col])) {
        pr = r;
        break;
      }
    if (pr < 0) throw Error("coframe is not a basis");
    std::swap(A[col], A[pr]);
    Expr p = A[col][col];
    if (!p.is_one_literal())
      for (int c = col; c < 2 * n; ++c)
        A[col][c] = canonicalize(A[col][c] / p);
    for (int r = 0; r < n; ++r) {
      if (r == col || A[r][col].is_zero_literal()) continue;
      Expr f = A[r][col];
      for (int c = col; c < 2 * n; ++c)
        A[r][c] = canonicalize(A[r][c] - f * A[col][c]);
    }
  }
  std::vector<Row> N(n, Row(n, zero()));
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) N[r][c] = A[r][n + c];
  return N;
}

}  // namespace

std::map<std::pair<int, int>, Expr> expand_in_coframe(
    const TwoForm& w, const std::vector<OneForm>& coframe) {
  const Chart* chart = w.chart;
  if (chart == nullptr) throw Error("form has no chart");
  const int n = static_cast<int>(chart->dim());
  if (static_cast<int>(coframe.size()) != n)
    throw Error("coframe size does not match chart dimension");
  for (const OneForm& f : coframe) require_same_chart(chart, f.chart);

  std::vector<Row> M(n, Row(n, zero()));
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) M[r][c] = coframe[r].get(c);
  std::vector<Row> N = invert_matrix(M);  // dx_a = sum_I N[a][I] Omega_I

  std::map<std::pair<int, int>, std::vector<Expr>> acc;
  for (const auto& [key, rv] : w.comp) {
    int a = key.first, b = key.second;
    for (int I = 0; I < n; ++I) {
      if (N[a][I].is_zero_literal()) continue;
      for (int J = 0; J < n; ++J) {
        if (I == J || N[b][J].is_zero_literal()) continue;
        Expr term = rv * N[a][I] * N[b][J];
        if (I > J) term = -term;
        acc[{std::min(I, J), std::max(I, J)}].push_back(term);
      }
    }
  }
  std::map<std::pair<int, int>, Expr> R;
  for (auto& [key, terms] : acc) {
    Expr v = canonicalize(make_sum(std::move(terms)));
    if (!v.is_zero_literal()) R.emplace(key, v);
  }
  return R;
}

SolveIdealResult solve_ideal(const TwoForm& residual,
                             const std::vector<OneForm>& generators) {
  const Chart* chart = residual.chart;
  if (chart == nullptr) throw Error("form has no chart");
  for (const OneForm& g : generators) require_same_chart(chart, g.chart);
  const int n = static_cast<int>(chart->dim());
  const int m = static_cast<int>(generators.size());

  SolveIdealResult out;
  if (m == 0) {
    if (form_is_zero(residual)) {
      out.status = SolveIdealResult::Status::Solved;
    }
    return out;
  }

  // echelonize a copy of the generator matrix to find pivot columns and
  // detect dependent generators
  std::vector<Row> G(m, Row(n, zero()));
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < n; ++c) G[r][c] = generators[r].get(c);

  std::vector<int> pivot_cols;
  std::vector<bool> is_pivot(n, false);
  {
    int row = 0;
    for (int col = 0; col < n && row < m; ++col) {
      int pr = -1;
      for (int r = row; r < m; ++r)
        if (!entry_zero(G[r][col])) {
          pr = r;
          break;
        }
      if (pr < 0) continue;
      std::swap(G[row], G[pr]);
      Expr p = G[row][col];
      for (int r = 0; r < m; ++r) {
        if (r == row || G[r][col].is_zero_literal()) continue;
        Expr f = canonicalize(G[r][col] / p);
        for (int c = col; c < n; ++c)
          G[r][c] = canonicalize(G[r][c] - f * G[row][c]);
      }
      pivot_cols.push_back(col);
      is_pivot[col] = true;
      ++row;
    }
    if (static_cast<int>(pivot_cols.size()) < m) {
      out.status = SolveIdealResult::Status::DependentGenerators;
      return out;
    }
  }

  // complete the generators to a coframe with unit covectors on the
  // non-pivot coordinates
  std::vector<OneForm> coframe = generators;
  std::vector<int> unit_index(n, -1);
  for (int c = 0; c < n; ++c) {
    if (is_pivot[c]) continue;
    unit_index[c] = static_cast<int>(coframe.size());
    OneForm u = zero_one_form(*chart);
    u.set(c, make_int(1));
    coframe.push_back(std::move(u));
  }

  // decompose each dx over this coframe. Because the completion rows are
  // unit covectors only the m x m pivot block of the generator matrix needs
  // a symbolic inverse; inverting the full n x n matrix makes the entries
  // explode on large charts.
  std::vector<Row> P(m, Row(m, zero()));
  for (int r = 0; r < m; ++r)
    for (int i = 0; i < m; ++i) P[r][i] = generators[r].get(pivot_cols[i]);
  std::vector<Row> Pinv = invert_matrix(P);

  std::vector<std::map<int, Expr>> N(n);  // dx_a = sum_I N[a][I] Omega_I
  for (int c = 0; c < n; ++c)
    if (!is_pivot[c]) N[c][unit_index[c]] = make_int(1);
  for (int i = 0; i < m; ++i) {
    int p = pivot_cols[i];
    std::map<int, std::vector<Expr>> acc;
    for (int r = 0; r < m; ++r) {
      if (Pinv[i][r].is_zero_literal()) continue;
      N[p][r] = Pinv[i][r];
      for (const auto& [c, e] : generators[r].comp) {
        if (is_pivot[c] || e.is_zero_literal()) continue;
        acc[unit_index[c]].push_back(Pinv[i][r] * e);
      }
    }
    for (auto& [I, terms] : acc) {
      Expr v = canonicalize(-make_sum(std::move(terms)));
      if (!v.is_zero_literal()) N[p][I] = v;
    }
  }

  std::map<std::pair<int, int>, std::vector<Expr>> racc;
  for (const auto& [key, rv] : residual.comp) {
    if (rv.is_zero_literal()) continue;
    for (const auto& [I, na] : N[key.first])
      for (const auto& [J, nb] : N[key.second]) {
        if (I == J) continue;
        Expr term = rv * na * nb;
        if (I > J) term = -term;
        racc[{std::min(I, J), std::max(I, J)}].push_back(term);
      }
  }
  std::map<std::pair<int, int>, Expr> R;
  for (auto& [key, terms] : racc) {
    Expr v = canonicalize(make_sum(std::move(terms)));
    if (!v.is_zero_literal()) R.emplace(key, v);
  }

  // components entirely outside the generator span must vanish
  for (const auto& [key, v] : R)
    if (key.first >= m && key.second >= m && !is_zero(v)) return out;

  out.alphas.assign(m, zero_one_form(*chart));
  for (const auto& [key, v] : R) {
    auto [I, J] = key;
    if (J < m)
      out.alphas[J] = out.alphas[J] + v * coframe[I];
    else if (I < m)
      out.alphas[I] = out.alphas[I] + canonicalize(-v) * coframe[J];
  }
  out.status = SolveIdealResult::Status::Solved;
  return out;
}

// --- abstract structure consistency ----------------------------------------

JacobiReport jacobi_check(const AbstractStructure& s) {
  const int n = static_cast<int>(s.forms.size());
  const int p = static_cast<int>(s.pis.size());
  if (static_cast<int>(s.equations.size()) != n)
    throw Error("structure equation count does not match form count");
  for (const auto& eq : s.equations) {
    for (const auto& [rho, j, a] : eq.pi_terms)
      if (rho < 0 || rho >= p || j < 0 || j >= n)
        throw Error("pi term index out of range");
    for (const auto& [j, k, c] : eq.c_terms)
      if (j < 0 || k < 0 || j >= k || k >= n)
        throw Error("c term indices must satisfy 0 <= j < k < n");
  }

  JacobiReport rep;
  for (int i = 0; i < n; ++i) {
    std::map<std::array<int, 3>, Rational> acc;
    auto add3 = [&acc](int a, int b, int c, const Rational& v) {
      int w[3] = {a, b, c};
      int sign = 1;
      for (int s1 = 0; s1 < 2; ++s1)
        for (int s2 = 0; s2 < 2 - s1; ++s2)
          if (w[s2] > w[s2 + 1]) {
            std::swap(w[s2], w[s2 + 1]);
            sign = -sign;
          }
      if (w[0] == w[1] || w[1] == w[2]) return;
      acc[{w[0], w[1], w[2]}] += sign > 0 ? v : -v;
    };
    // every d-substitution that keeps a pi factor is dropped: d(pi) is
    // unconstrained and pi ^ (anything) is not a pure-omega component
    for (const auto& [j, k, c] : s.equations[i].c_terms) {
      for (const auto& [pq1, pq2, cj] : s.equations[j].c_terms)
        add3(pq1, pq2, k, c * cj);
      for (const auto& [pq1, pq2, ck] : s.equations[k].c_terms)
        add3(j, pq1, pq2, -(c * ck));
    }
    // a term a pi^rho ^ w^j in dw^i makes d(pi^rho) ^ w^j available, so any
    // pure component containing that w^j can be matched by a choice of d(pi)
    std::vector<int> absorb;
    for (const auto& [rho, j, a] : s.equations[i].pi_terms) absorb.push_back(j);
    for (const auto& [key, v] : acc) {
      if (v == 0) continue;
      bool absorbed = false;
      for (int j : absorb)
        if (key[0] == j || key[1] == j || key[2] == j) absorbed = true;
      if (absorbed) continue;
      rep.pass = false;
      rep.violations.push_back({i, key[0], key[1], key[2], v});
    }
  }
  return rep;
}

}  // namespace cartanlab
