/* ubmlp: hybrid unary-binary MLP hardware toolchain
 *
 * Bit-exact combinational netlist evaluation and equivalence campaigns
 * against functional models.
 */

#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "ubmlp/common.hpp"
#include "ubmlp/lowering.hpp"
#include "ubmlp/netlist.hpp"

namespace ubmlp {

/// Full (event-free) evaluation of one input vector in topological order.
inline SimVector eval(const Netlist& nl, const SimVector& inputs) {
  std::vector<std::uint8_t> value(nl.num_nets, 0);
  std::vector<std::uint8_t> known(nl.num_nets, 0);
  for (const auto& p : nl.ports) {
    if (!p.is_input) continue;
    auto it = inputs.find(p.name);
    if (it == inputs.end())
      throw simulation_error("missing assignment for input port " + p.name);
    if (it->second.size() != p.nets.size())
      throw simulation_error("width mismatch on input port " + p.name);
    for (std::size_t b = 0; b < p.nets.size(); ++b) {
      value[p.nets[b]] = it->second[b] ? 1 : 0;
      known[p.nets[b]] = 1;
    }
  }
  for (int gi : nl.topological_order()) {
    const auto& g = nl.gates[gi];
    for (int n : g.inputs)
      if (!known[n])
        throw simulation_error("gate input net " + std::to_string(n) +
                               " unassigned");
    auto in = [&](int i) { return value[g.inputs[i]]; };
    std::uint8_t o0 = 0, o1 = 0;
    switch (g.kind) {
      case GateKind::CONST0: o0 = 0; break;
      case GateKind::CONST1: o0 = 1; break;
      case GateKind::INV: o0 = !in(0); break;
      case GateKind::AND2: o0 = in(0) & in(1); break;
      case GateKind::OR2: o0 = in(0) | in(1); break;
      case GateKind::XOR2: o0 = in(0) ^ in(1); break;
      case GateKind::NAND2: o0 = !(in(0) & in(1)); break;
      case GateKind::NOR2: o0 = !(in(0) | in(1)); break;
      case GateKind::MUX2: o0 = in(0) ? in(2) : in(1); break;
      case GateKind::HA:
        o0 = in(0) ^ in(1);
        o1 = in(0) & in(1);
        break;
      case GateKind::FA:
        o0 = in(0) ^ in(1) ^ in(2);
        o1 = (in(0) & in(1)) | (in(2) & (in(0) ^ in(1)));
        break;
    }
    value[g.outputs[0]] = o0;
    known[g.outputs[0]] = 1;
    if (g.outputs.size() > 1) {
      value[g.outputs[1]] = o1;
      known[g.outputs[1]] = 1;
    }
  }
  SimVector out;
  for (const auto& p : nl.ports) {
    if (p.is_input) continue;
    std::vector<std::uint8_t> bits(p.nets.size());
    for (std::size_t b = 0; b < p.nets.size(); ++b) bits[b] = value[p.nets[b]];
    out[p.name] = std::move(bits);
  }
  return out;
}

/// Netlist outputs decoded to (class index, signed score vector).
inline std::pair<int, std::vector<long long>> decode_classifier_outputs(
    const Netlist& nl, const SimVector& outputs) {
  const int classes = std::stoi(nl.attrs.at("classes"));
  const int cls = static_cast<int>(decode_unsigned(outputs.at("class")));
  std::vector<long long> scores(classes);
  for (int c = 0; c < classes; ++c)
    scores[c] = decode_signed(outputs.at("score" + std::to_string(c)));
  return {cls, scores};
}

struct EquivalencePlan {
  enum class Mode { exhaustive, randomized };
  Mode mode = Mode::exhaustive;
  std::uint64_t seed = 0;
  int count = 1000;
  // optional fixed level vectors (e.g. quantized dataset samples); drawn
  // before uniform random vectors in randomized mode
  std::vector<std::vector<int>> fixed_vectors;
};

struct Mismatch {
  std::vector<int> levels;
  int expected_class = 0;
  int got_class = 0;
};

struct EquivalenceReport {
  std::string netlist_name;
  std::string plan;  // "exhaustive" or "randomized seed=S count=C"
  long long samples = 0;
  std::vector<Mismatch> mismatches;

  bool pass() const { return mismatches.empty(); }
};

/// Functional oracle over quantized input levels.
using LevelOracle =
    std::function<std::pair<int, std::vector<long long>>(
        const std::vector<int>&)>;

inline EquivalenceReport check_equivalence(const Netlist& nl,
                                           const LevelOracle& oracle,
                                           const EquivalencePlan& plan) {
  const int inputs = std::stoi(nl.attrs.at("inputs"));
  const int levels = std::stoi(nl.attrs.at("stream_width")) + 1;
  EquivalenceReport rep;
  rep.netlist_name = nl.name;

  auto run_vector = [&](const std::vector<int>& lv) {
    const auto got = decode_classifier_outputs(nl, eval(nl, encode_levels(nl, lv)));
    const auto want = oracle(lv);
    ++rep.samples;
    if (got.first != want.first || got.second != want.second)
      rep.mismatches.push_back({lv, want.first, got.first});
  };

  if (plan.mode == EquivalencePlan::Mode::exhaustive) {
    double space = 1.0;
    for (int i = 0; i < inputs; ++i) space *= levels;
    if (space > double(1 << 20))
      throw plan_error("exhaustive plan refused: level space " +
                       std::to_string(static_cast<long long>(space)) +
                       " exceeds 2^20");
    rep.plan = "exhaustive";
    std::vector<int> lv(inputs, 0);
    while (true) {
      run_vector(lv);
      int i = 0;
      while (i < inputs && ++lv[i] == levels) lv[i++] = 0;
      if (i == inputs) break;
    }
  } else {
    rep.plan = "randomized seed=" + std::to_string(plan.seed) +
               " count=" + std::to_string(plan.count);
    for (const auto& lv : plan.fixed_vectors) run_vector(lv);
    Rng rng(plan.seed);
    const int remaining =
        std::max(0, plan.count - static_cast<int>(plan.fixed_vectors.size()));
    for (int s = 0; s < remaining; ++s) {
      std::vector<int> lv(inputs);
      for (auto& v : lv) v = static_cast<int>(rng.below(levels));
      run_vector(lv);
    }
  }
  return rep;
}

inline void save_equivalence_report(const EquivalenceReport& rep,
                                    std::ostream& os) {
  os << "ubmlp-equivalence v1\n";
  os << "netlist " << rep.netlist_name << "\n";
  os << "plan " << rep.plan << "\n";
  os << "samples " << rep.samples << "\n";
  os << "mismatches " << rep.mismatches.size() << "\n";
  for (const auto& m : rep.mismatches) {
    os << "mismatch levels";
    for (int v : m.levels) os << " " << v;
    os << " expected " << m.expected_class << " got " << m.got_class << "\n";
  }
  os << "verdict " << (rep.pass() ? "pass" : "fail") << "\n";
}

}  // namespace ubmlp
