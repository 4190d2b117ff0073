#include "drcal/network_case.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "drcal/errors.hpp"

namespace drcal {

using json = nlohmann::json;

Mat NetworkCase::gen_incidence() const {
  Mat s = Mat::Zero(n_buses, n_generators);
  for (int g = 0; g < n_generators; ++g) s(gen_bus[g], g) = 1.0;
  return s;
}

Mat NetworkCase::wind_incidence() const {
  Mat s = Mat::Zero(n_buses, n_wind);
  for (int w = 0; w < n_wind; ++w) s(wind_bus[w], w) = 1.0;
  return s;
}

void NetworkCase::validate() const {
  if (n_buses <= 0) throw ValidationError("case has no buses");
  auto check_len = [&](const Vec& v, int len, const char* name) {
    if (v.size() != len)
      throw ValidationError(std::string(name) + " has wrong length");
  };
  if (static_cast<int>(gen_bus.size()) != n_generators)
    throw ValidationError("gen_bus has wrong length");
  if (static_cast<int>(wind_bus.size()) != n_wind)
    throw ValidationError("wind_bus has wrong length");
  if (static_cast<int>(line_ends.size()) != n_lines)
    throw ValidationError("line_ends has wrong length");
  check_len(demand, n_buses, "demand");
  check_len(gen_min, n_generators, "gen_min");
  check_len(gen_max, n_generators, "gen_max");
  check_len(line_limit, n_lines, "line_limit");
  check_len(line_susceptance, n_lines, "line_susceptance");
  check_len(wind_capacity, n_wind, "wind_capacity");
  check_len(cost_energy, n_generators, "cost_energy");
  check_len(cost_reserve, n_generators, "cost_reserve");
  check_len(cost_activation, n_generators, "cost_activation");
  check_len(cost_in, n_generators, "cost_in");
  check_len(cost_out_up, n_generators, "cost_out_up");
  check_len(cost_out_dn, n_generators, "cost_out_dn");

  for (int g = 0; g < n_generators; ++g) {
    if (gen_bus[g] < 0 || gen_bus[g] >= n_buses)
      throw ValidationError("generator " + std::to_string(g + 1) +
                            " maps to a nonexistent bus");
    if (gen_min[g] > gen_max[g])
      throw ValidationError("generator " + std::to_string(g + 1) +
                            ": pmin_mw exceeds pmax_mw");
  }
  for (int w = 0; w < n_wind; ++w) {
    if (wind_bus[w] < 0 || wind_bus[w] >= n_buses)
      throw ValidationError("wind farm " + std::to_string(w + 1) +
                            " maps to a nonexistent bus");
    if (wind_capacity[w] < 0)
      throw ValidationError("wind farm " + std::to_string(w + 1) +
                            ": negative capacity");
  }
  for (int l = 0; l < n_lines; ++l) {
    auto [f, t] = line_ends[l];
    if (f < 0 || f >= n_buses || t < 0 || t >= n_buses || f == t)
      throw ValidationError("line " + std::to_string(l + 1) +
                            " has invalid endpoints");
    if (line_limit[l] <= 0)
      throw ValidationError("line " + std::to_string(l + 1) +
                            ": limit_mw must be positive");
    if (line_susceptance[l] <= 0)
      throw ValidationError("line " + std::to_string(l + 1) +
                            ": susceptance_pu must be positive");
  }
  auto check_nonneg = [](const Vec& v, const char* name) {
    for (int i = 0; i < v.size(); ++i)
      if (v[i] < 0)
        throw ValidationError(std::string(name) + " has a negative entry");
  };
  check_nonneg(cost_energy, "cost_energy");
  check_nonneg(cost_reserve, "cost_reserve");
  check_nonneg(cost_activation, "cost_activation");
  check_nonneg(cost_in, "cost_in");
  check_nonneg(cost_out_up, "cost_out_up");
  check_nonneg(cost_out_dn, "cost_out_dn");
  if (slack_bus < 0 || slack_bus >= n_buses)
    throw ValidationError("slack_bus out of range");

  if (ptdf.size() > 0) {
    if (ptdf.rows() != n_lines || ptdf.cols() != n_buses)
      throw ValidationError("ptdf has wrong shape");
    // DC identity: the susceptance-based flow solve must reproduce each
    // column for a unit injection at that bus, withdrawal at the slack.
    Mat ref = compute_ptdf(*this, slack_bus);
    if ((ref - ptdf).cwiseAbs().maxCoeff() > 1e-9)
      throw ValidationError(
          "ptdf is inconsistent with the susceptance-based flow solve");
  }
}

Mat compute_ptdf(const NetworkCase& grid, int slack_bus) {
  const int nb = grid.n_buses;
  const int nl = grid.n_lines;
  if (slack_bus < 0 || slack_bus >= nb)
    throw ValidationError("slack_bus out of range");
  Mat laplacian = Mat::Zero(nb, nb);
  for (int l = 0; l < nl; ++l) {
    auto [f, t] = grid.line_ends[l];
    const double b = grid.line_susceptance[l];
    laplacian(f, f) += b;
    laplacian(t, t) += b;
    laplacian(f, t) -= b;
    laplacian(t, f) -= b;
  }
  // reduced system without the slack bus
  std::vector<int> keep;
  keep.reserve(nb - 1);
  for (int i = 0; i < nb; ++i)
    if (i != slack_bus) keep.push_back(i);
  const int m = nb - 1;
  Mat reduced(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) reduced(i, j) = laplacian(keep[i], keep[j]);

  Eigen::FullPivLU<Mat> lu(reduced);
  if (m > 0 && (!lu.isInvertible() || lu.rank() < m))
    throw SingularNetwork(
        "network graph is disconnected: reduced susceptance matrix is "
        "singular");
  // angles for a unit injection at each non-slack bus
  Mat theta = Mat::Zero(nb, nb);  // theta(:, injection bus)
  for (int j = 0; j < m; ++j) {
    Vec rhs = Vec::Zero(m);
    rhs[j] = 1.0;
    Vec sol = lu.solve(rhs);
    for (int i = 0; i < m; ++i) theta(keep[i], keep[j]) = sol[i];
  }
  Mat ptdf = Mat::Zero(nl, nb);
  for (int l = 0; l < nl; ++l) {
    auto [f, t] = grid.line_ends[l];
    const double b = grid.line_susceptance[l];
    for (int j = 0; j < nb; ++j) ptdf(l, j) = b * (theta(f, j) - theta(t, j));
  }
  ptdf.col(slack_bus).setZero();
  return ptdf;
}

namespace {

Vec json_to_vec(const json& arr, const std::string& name) {
  if (!arr.is_array()) throw ParseError(name + " must be an array");
  Vec v(arr.size());
  int i = 0;
  for (const auto& x : arr) {
    if (!x.is_number()) throw ParseError(name + " must contain numbers");
    v[i++] = x.get<double>();
  }
  return v;
}

double get_num(const json& obj, const std::string& key,
               const std::string& ctx) {
  if (!obj.contains(key))
    throw ParseError(ctx + ": missing field '" + key + "'");
  if (!obj[key].is_number())
    throw ParseError(ctx + ": field '" + key + "' must be a number");
  return obj[key].get<double>();
}

}  // namespace

NetworkCase load_case(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open case file: " + path);
  json doc;
  try {
    doc = json::parse(f);
  } catch (const json::exception& e) {
    throw ParseError("malformed case file " + path + ": " + e.what());
  }

  NetworkCase c;
  if (!doc.contains("buses") || !doc["buses"].is_number_integer())
    throw ParseError("case file: 'buses' (bus count) is required");
  c.n_buses = doc["buses"].get<int>();

  if (!doc.contains("generators") || !doc["generators"].is_array())
    throw ParseError("case file: 'generators' array is required");
  const auto& gens = doc["generators"];
  c.n_generators = static_cast<int>(gens.size());
  c.gen_bus.resize(c.n_generators);
  c.gen_min.resize(c.n_generators);
  c.gen_max.resize(c.n_generators);
  c.cost_energy.resize(c.n_generators);
  c.cost_reserve.resize(c.n_generators);
  c.cost_activation.resize(c.n_generators);
  c.cost_in.resize(c.n_generators);
  c.cost_out_up.resize(c.n_generators);
  c.cost_out_dn.resize(c.n_generators);
  for (int g = 0; g < c.n_generators; ++g) {
    const auto& jg = gens[g];
    const std::string ctx = "generator " + std::to_string(g + 1);
    c.gen_bus[g] = static_cast<int>(get_num(jg, "bus", ctx)) - 1;
    c.gen_min[g] = get_num(jg, "pmin_mw", ctx);
    c.gen_max[g] = get_num(jg, "pmax_mw", ctx);
    c.cost_energy[g] = get_num(jg, "cost_energy", ctx);
    c.cost_reserve[g] = get_num(jg, "cost_reserve", ctx);
    c.cost_activation[g] = get_num(jg, "cost_activation", ctx);
    c.cost_in[g] = get_num(jg, "cost_in", ctx);
    c.cost_out_up[g] = get_num(jg, "cost_out_up", ctx);
    c.cost_out_dn[g] = get_num(jg, "cost_out_dn", ctx);
  }

  if (!doc.contains("lines") || !doc["lines"].is_array())
    throw ParseError("case file: 'lines' array is required");
  const auto& lines = doc["lines"];
  c.n_lines = static_cast<int>(lines.size());
  c.line_ends.resize(c.n_lines);
  c.line_limit.resize(c.n_lines);
  c.line_susceptance.resize(c.n_lines);
  for (int l = 0; l < c.n_lines; ++l) {
    const auto& jl = lines[l];
    const std::string ctx = "line " + std::to_string(l + 1);
    c.line_ends[l] = {static_cast<int>(get_num(jl, "from", ctx)) - 1,
                      static_cast<int>(get_num(jl, "to", ctx)) - 1};
    c.line_susceptance[l] = get_num(jl, "susceptance_pu", ctx);
    c.line_limit[l] = get_num(jl, "limit_mw", ctx);
  }

  if (!doc.contains("wind") || !doc["wind"].is_array())
    throw ParseError("case file: 'wind' array is required");
  const auto& wind = doc["wind"];
  c.n_wind = static_cast<int>(wind.size());
  c.wind_bus.resize(c.n_wind);
  c.wind_capacity.resize(c.n_wind);
  for (int w = 0; w < c.n_wind; ++w) {
    const std::string ctx = "wind farm " + std::to_string(w + 1);
    c.wind_bus[w] = static_cast<int>(get_num(wind[w], "bus", ctx)) - 1;
    c.wind_capacity[w] = get_num(wind[w], "capacity_mw", ctx);
  }

  if (!doc.contains("demand_mw"))
    throw ParseError("case file: 'demand_mw' array is required");
  c.demand = json_to_vec(doc["demand_mw"], "demand_mw");
  if (c.demand.size() != c.n_buses)
    throw ParseError("demand_mw length must equal bus count");

  c.slack_bus = doc.value("slack_bus", 1) - 1;

  if (doc.contains("ptdf")) {
    Vec flat = json_to_vec(doc["ptdf"], "ptdf");
    if (flat.size() != static_cast<long>(c.n_lines) * c.n_buses)
      throw ParseError("ptdf must have lines*buses entries (row-major)");
    c.ptdf = Mat(c.n_lines, c.n_buses);
    for (int l = 0; l < c.n_lines; ++l)
      for (int b = 0; b < c.n_buses; ++b) c.ptdf(l, b) = flat[l * c.n_buses + b];
    // explicit PTDF wins after the consistency check in validate()
  } else {
    c.ptdf = compute_ptdf(c, c.slack_bus);
  }

  c.validate();
  return c;
}

}  // namespace drcal
