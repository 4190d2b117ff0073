#pragma once

#include <string>
#include <utility>
#include <vector>

#include "drcal/linalg.hpp"

namespace drcal {

/// Static grid description for the two-stage market: generators, lines with
/// PTDF, wind-farm incidence, demand and cost vectors. Immutable after
/// construction; safe to share across threads.
struct NetworkCase {
  int n_buses = 0;
  int n_generators = 0;
  int n_lines = 0;
  int n_wind = 0;

  std::vector<int> gen_bus;   // generator -> bus (0-based)
  std::vector<int> wind_bus;  // wind farm -> bus (0-based)
  std::vector<std::pair<int, int>> line_ends;  // from, to (0-based)

  Vec demand;            // MW per bus
  Vec gen_min, gen_max;  // MW per generator
  Vec line_limit;        // MW per line
  Vec line_susceptance;  // p.u. per line
  Vec wind_capacity;     // MW per farm
  Mat ptdf;              // lines x buses, slack column zero

  Vec cost_energy;      // $/MW per generator
  Vec cost_reserve;     // $/MW
  Vec cost_activation;  // $/MW
  Vec cost_in;          // $/MW (within-reserve adjustment)
  Vec cost_out_up;      // $/MW (beyond upward reserve)
  Vec cost_out_dn;      // $/MW (beyond downward reserve)

  int slack_bus = 0;  // 0-based

  /// S_g: n_buses x n_generators one-hot incidence.
  Mat gen_incidence() const;
  /// S_w: n_buses x n_wind one-hot incidence.
  Mat wind_incidence() const;

  /// Throws ValidationError (naming the offending field/element) if any
  /// invariant is violated; checks the PTDF against the susceptance-based
  /// flow solve to 1e-9 when both are available.
  void validate() const;
};

/// Loads and validates a case from the JSON case format. Bus indices in the
/// file are 1-based. Throws ParseError / ValidationError.
NetworkCase load_case(const std::string& path);

/// DC power-transfer distribution factors: flow = ptdf * (net injections).
/// The slack column is identically zero. Throws SingularNetwork if the graph
/// is disconnected.
Mat compute_ptdf(const NetworkCase& grid, int slack_bus);

}  // namespace drcal
