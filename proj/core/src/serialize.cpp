#include "cartanlab/serialize.hpp"

#include <json.hpp>

#include "cartanlab/parse.hpp"

namespace cartanlab {

using json = nlohmann::ordered_json;

namespace {

Rational rational_from_json(const json& v) {
  if (v.is_number_integer()) return Rational(v.get<long>());
  if (v.is_string()) {
    try {
      Rational r(v.get<std::string>(), 10);
      r.canonicalize();
      return r;
    } catch (const std::invalid_argument&) {
      throw Error("bad rational literal: " + v.get<std::string>());
    }
  }
  throw Error("rational coefficient must be an integer or a string");
}

}  // namespace

std::string to_json(const OneForm& w) {
  if (!w.chart) throw Error("form has no chart");
  json out;
  out["chart"] = json::array();
  for (VarId v : w.chart->coords)
    out["chart"].push_back(Session::instance().var_name(v));
  json coeffs = json::object();
  for (const auto& [i, e] : w.comp) {
    if (e.is_zero_literal()) continue;
    coeffs["d" + Session::instance().var_name(w.chart->coords[i])] =
        to_string(e);
  }
  out["coeffs"] = std::move(coeffs);
  return out.dump();
}

OneForm one_form_from_json(const Chart& chart, const std::string& text) {
  json in = json::parse(text, nullptr, false);
  if (in.is_discarded()) throw Error("malformed one-form JSON");
  if (in.contains("chart")) {
    const auto& names = in.at("chart");
    if (names.size() != chart.coords.size())
      throw Error("one-form chart does not match");
    for (size_t i = 0; i < chart.coords.size(); ++i)
      if (names[i].get<std::string>() !=
          Session::instance().var_name(chart.coords[i]))
        throw Error("one-form chart does not match");
  }
  OneForm w = zero_one_form(chart);
  for (const auto& [key, val] : in.at("coeffs").items()) {
    if (key.empty() || key[0] != 'd')
      throw Error("coefficient key must be d<coordinate>: " + key);
    int i = chart.index_of(Session::instance().var(key.substr(1)));
    if (i < 0) throw Error("unknown coordinate differential: " + key);
    w.set(i, parse(val.get<std::string>()));
  }
  return w;
}

std::string to_json(const AbstractStructure& s) {
  json out;
  out["forms"] = s.forms;
  out["pis"] = s.pis;
  json eqs = json::object();
  for (size_t i = 0; i < s.equations.size(); ++i) {
    json eq;
    eq["pi_terms"] = json::array();
    for (const auto& [rho, j, a] : s.equations[i].pi_terms)
      eq["pi_terms"].push_back({rho, j, a.get_str()});
    eq["c_terms"] = json::array();
    for (const auto& [j, k, c] : s.equations[i].c_terms)
      eq["c_terms"].push_back({j, k, c.get_str()});
    eqs[s.forms[i]] = std::move(eq);
  }
  out["equations"] = std::move(eqs);
  return out.dump();
}

AbstractStructure abstract_structure_from_json(const std::string& text) {
  json in = json::parse(text, nullptr, false);
  if (in.is_discarded()) throw Error("malformed structure JSON");
  AbstractStructure s;
  for (const auto& f : in.at("forms")) s.forms.push_back(f.get<std::string>());
  if (in.contains("pis"))
    for (const auto& p : in.at("pis")) s.pis.push_back(p.get<std::string>());
  s.equations.resize(s.forms.size());
  for (const auto& [name, eq] : in.at("equations").items()) {
    auto it = std::find(s.forms.begin(), s.forms.end(), name);
    if (it == s.forms.end()) throw Error("equation for unknown form: " + name);
    auto& dst = s.equations[it - s.forms.begin()];
    if (eq.contains("pi_terms"))
      for (const auto& t : eq.at("pi_terms"))
        dst.pi_terms.emplace_back(t.at(0).get<int>(), t.at(1).get<int>(),
                                  rational_from_json(t.at(2)));
    if (eq.contains("c_terms"))
      for (const auto& t : eq.at("c_terms"))
        dst.c_terms.emplace_back(t.at(0).get<int>(), t.at(1).get<int>(),
                                 rational_from_json(t.at(2)));
  }
  return s;
}

}  // namespace cartanlab
