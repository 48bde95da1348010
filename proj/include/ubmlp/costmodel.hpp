/* ubmlp: hybrid unary-binary MLP hardware toolchain
 *
 * Gate-count cost model: weighted area/power proxies per netlist under
 * configurable technology coefficients, plus baseline-relative comparison
 * tables.
 */

#pragma once

#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ubmlp/common.hpp"
#include "ubmlp/netlist.hpp"

namespace ubmlp {

struct CellWeight {
  double area = 0.0;
  double power = 0.0;
};

struct TechCoefficients {
  // keyed by gate kind name plus interface cells "COMPARATOR" and
  // "ENCODER_UNIT"
  std::map<std::string, CellWeight> weights;
  std::string version = "default";

  const CellWeight& at(const std::string& kind) const {
    auto it = weights.find(kind);
    if (it == weights.end())
      throw coefficient_error("no coefficient for cell kind '" + kind + "'");
    return it->second;
  }
};

/// Relative units: 1 per 2-input gate, HA/FA by 2-input decomposition,
/// comparators dominate the analog front end.
inline TechCoefficients default_coefficients() {
  TechCoefficients c;
  c.weights["CONST0"] = {0, 0};
  c.weights["CONST1"] = {0, 0};
  c.weights["INV"] = {1, 1};
  c.weights["AND2"] = {1, 1};
  c.weights["OR2"] = {1, 1};
  c.weights["XOR2"] = {1, 1};
  c.weights["NAND2"] = {1, 1};
  c.weights["NOR2"] = {1, 1};
  c.weights["MUX2"] = {3, 3};
  c.weights["HA"] = {2, 2};
  c.weights["FA"] = {3, 3};
  c.weights["COMPARATOR"] = {10, 10};
  // gate cost of one lowered 7-to-3 thermometer-to-binary encoder
  // (a 7-bit ones counter: 4 FA under the weights above)
  c.weights["ENCODER_UNIT"] = {12, 12};
  return c;
}

inline TechCoefficients load_coefficients(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw coefficient_error("coefficient file not found: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw coefficient_error(std::string("coefficient parse error: ") +
                            e.what());
  }
  TechCoefficients c;
  if (j.contains("version")) c.version = j["version"].get<std::string>();
  for (auto& [key, val] : j.at("cells").items())
    c.weights[key] = {val.at("area").get<double>(),
                      val.at("power").get<double>()};
  bool any = false;
  for (const auto& [_, w] : c.weights) {
    if (w.area < 0 || w.power < 0)
      throw coefficient_error("negative coefficient in " + path);
    any = any || w.area > 0 || w.power > 0;
  }
  if (!any) throw coefficient_error("all coefficients zero in " + path);
  return c;
}

struct CostReport {
  std::string netlist_name;
  std::string coefficients_version;
  std::map<std::string, long long> histogram;  // gates + interface cells
  long long wire_count = 0;  // transparency stat, not priced
  double area = 0.0;
  double power = 0.0;
};

inline CostReport estimate(const Netlist& nl, const TechCoefficients& c) {
  CostReport r;
  r.netlist_name = nl.name;
  r.coefficients_version = c.version;
  r.histogram = nl.gate_histogram();
  const long long comparators = nl.interface_cells("comparator_cells");
  const long long encoders = nl.interface_cells("encoder_units");
  if (comparators) r.histogram["COMPARATOR"] = comparators;
  if (encoders) r.histogram["ENCODER_UNIT"] = encoders;
  r.wire_count = nl.num_nets;
  for (const auto& [kind, count] : r.histogram) {
    const auto& w = c.at(kind);
    r.area += double(count) * w.area;
    r.power += double(count) * w.power;
  }
  return r;
}

struct CostComparisonRow {
  std::string name;
  double area = 0.0;
  double power = 0.0;
  double area_reduction = 0.0;   // 1 - candidate/reference
  double power_reduction = 0.0;
};

struct CostComparison {
  std::string reference_name;
  double reference_area = 0.0;
  double reference_power = 0.0;
  std::vector<CostComparisonRow> rows;
};

inline CostComparison compare(const CostReport& reference,
                              const std::vector<CostReport>& candidates) {
  CostComparison cmp;
  cmp.reference_name = reference.netlist_name;
  cmp.reference_area = reference.area;
  cmp.reference_power = reference.power;
  for (const auto& c : candidates) {
    if (c.coefficients_version != reference.coefficients_version)
      throw comparison_error("coefficient version mismatch: '" +
                             c.coefficients_version + "' vs '" +
                             reference.coefficients_version + "'");
    CostComparisonRow row;
    row.name = c.netlist_name;
    row.area = c.area;
    row.power = c.power;
    row.area_reduction =
        reference.area == 0 ? 0.0 : 1.0 - c.area / reference.area;
    row.power_reduction =
        reference.power == 0 ? 0.0 : 1.0 - c.power / reference.power;
    cmp.rows.push_back(row);
  }
  return cmp;
}

inline void save_cost_report(const CostReport& r, std::ostream& os) {
  os << "ubmlp-cost v1\n";
  os << "netlist " << r.netlist_name << "\n";
  os << "coefficients " << r.coefficients_version << "\n";
  for (const auto& [kind, count] : r.histogram)
    os << "cell " << kind << " " << count << "\n";
  os << "wires " << r.wire_count << "\n";
  os << std::setprecision(17);
  os << "area " << r.area << "\n";
  os << "power " << r.power << "\n";
}

inline CostReport load_cost_report(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "ubmlp-cost v1")
    throw serialization_error("bad cost report header");
  CostReport r;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok == "netlist") ss >> r.netlist_name;
    else if (tok == "coefficients") ss >> r.coefficients_version;
    else if (tok == "cell") {
      std::string kind;
      long long count;
      ss >> kind >> count;
      r.histogram[kind] = count;
    } else if (tok == "wires") ss >> r.wire_count;
    else if (tok == "area") ss >> r.area;
    else if (tok == "power") ss >> r.power;
    else throw serialization_error("bad cost report line: " + line);
  }
  return r;
}

}  // namespace ubmlp
