/* ubmlp: hybrid unary-binary MLP hardware toolchain
 *
 * Gate-level combinational netlist IR: a DAG of gate instances over
 * single-driver nets, with named multi-bit ports (little-endian, bit 0 =
 * LSB). Serialization is deterministic: identical inputs produce
 * byte-identical files.
 */

#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ubmlp/common.hpp"

namespace ubmlp {

enum class GateKind {
  CONST0,
  CONST1,
  INV,
  AND2,
  OR2,
  XOR2,
  NAND2,
  NOR2,
  MUX2,  // inputs: sel, d0, d1; out = sel ? d1 : d0
  HA,    // outputs: sum, carry
  FA,    // outputs: sum, carry
};

inline const char* gate_kind_name(GateKind k) {
  switch (k) {
    case GateKind::CONST0: return "CONST0";
    case GateKind::CONST1: return "CONST1";
    case GateKind::INV: return "INV";
    case GateKind::AND2: return "AND2";
    case GateKind::OR2: return "OR2";
    case GateKind::XOR2: return "XOR2";
    case GateKind::NAND2: return "NAND2";
    case GateKind::NOR2: return "NOR2";
    case GateKind::MUX2: return "MUX2";
    case GateKind::HA: return "HA";
    case GateKind::FA: return "FA";
  }
  return "?";
}

inline GateKind gate_kind_from_name(const std::string& s) {
  static const std::map<std::string, GateKind> table = {
      {"CONST0", GateKind::CONST0}, {"CONST1", GateKind::CONST1},
      {"INV", GateKind::INV},       {"AND2", GateKind::AND2},
      {"OR2", GateKind::OR2},       {"XOR2", GateKind::XOR2},
      {"NAND2", GateKind::NAND2},   {"NOR2", GateKind::NOR2},
      {"MUX2", GateKind::MUX2},     {"HA", GateKind::HA},
      {"FA", GateKind::FA}};
  auto it = table.find(s);
  if (it == table.end())
    throw serialization_error("unknown gate kind '" + s + "'");
  return it->second;
}

inline int gate_num_inputs(GateKind k) {
  switch (k) {
    case GateKind::CONST0:
    case GateKind::CONST1: return 0;
    case GateKind::INV: return 1;
    case GateKind::MUX2:
    case GateKind::FA: return 3;
    default: return 2;
  }
}

inline int gate_num_outputs(GateKind k) {
  return (k == GateKind::HA || k == GateKind::FA) ? 2 : 1;
}

struct Gate {
  GateKind kind;
  std::vector<int> inputs;
  std::vector<int> outputs;
};

struct Port {
  std::string name;
  bool is_input = true;
  std::vector<int> nets;  // little-endian
};

struct Netlist {
  std::string name;
  std::vector<Port> ports;
  std::vector<Gate> gates;
  int num_nets = 0;
  // interface-cell counts and lowering metadata (thermometer bit maps,
  // mode, widths); serialized as attr lines
  std::map<std::string, std::string> attrs;

  const Port* find_port(const std::string& n) const {
    for (const auto& p : ports)
      if (p.name == n) return &p;
    return nullptr;
  }

  long long interface_cells(const std::string& key) const {
    auto it = attrs.find(key);
    return it == attrs.end() ? 0 : std::stoll(it->second);
  }

  std::map<std::string, long long> gate_histogram() const {
    std::map<std::string, long long> h;
    for (const auto& g : gates) ++h[gate_kind_name(g.kind)];
    return h;
  }

  /// Structural invariants: single driver per net, all gate inputs driven,
  /// output ports driven, combinational (acyclic by construction check).
  void validate() const {
    std::vector<int> driver(num_nets, -1);  // -1 none, -2 port
    for (const auto& p : ports) {
      if (!p.is_input) continue;
      for (int n : p.nets) {
        check_net(n);
        if (driver[n] != -1)
          throw lowering_error(name + ": net " + std::to_string(n) +
                               " has multiple drivers");
        driver[n] = -2;
      }
    }
    for (std::size_t gi = 0; gi < gates.size(); ++gi) {
      const auto& g = gates[gi];
      if (static_cast<int>(g.inputs.size()) != gate_num_inputs(g.kind) ||
          static_cast<int>(g.outputs.size()) != gate_num_outputs(g.kind))
        throw lowering_error(name + ": gate " + std::to_string(gi) +
                             " has wrong arity");
      for (int n : g.outputs) {
        check_net(n);
        if (driver[n] != -1)
          throw lowering_error(name + ": net " + std::to_string(n) +
                               " has multiple drivers");
        driver[n] = static_cast<int>(gi);
      }
    }
    for (const auto& g : gates)
      for (int n : g.inputs) {
        check_net(n);
        if (driver[n] == -1)
          throw lowering_error(name + ": gate input net " +
                               std::to_string(n) + " is undriven");
      }
    for (const auto& p : ports) {
      if (p.is_input) continue;
      for (int n : p.nets) {
        check_net(n);
        if (driver[n] == -1)
          throw lowering_error(name + ": output port " + p.name +
                               " bit undriven");
      }
    }
    topological_order();  // throws on cycles
  }

  /// Kahn topological order over gates; throws on combinational cycles.
  std::vector<int> topological_order() const {
    std::vector<int> driver(num_nets, -1);
    for (std::size_t gi = 0; gi < gates.size(); ++gi)
      for (int n : gates[gi].outputs) driver[n] = static_cast<int>(gi);
    std::vector<int> indegree(gates.size(), 0);
    std::vector<std::vector<int>> fanout(gates.size());
    for (std::size_t gi = 0; gi < gates.size(); ++gi)
      for (int n : gates[gi].inputs)
        if (n < num_nets && driver[n] >= 0) {
          ++indegree[gi];
          fanout[driver[n]].push_back(static_cast<int>(gi));
        }
    std::vector<int> ready, order;
    for (std::size_t gi = 0; gi < gates.size(); ++gi)
      if (indegree[gi] == 0) ready.push_back(static_cast<int>(gi));
    while (!ready.empty()) {
      const int g = ready.back();
      ready.pop_back();
      order.push_back(g);
      for (int succ : fanout[g])
        if (--indegree[succ] == 0) ready.push_back(succ);
    }
    if (order.size() != gates.size())
      throw lowering_error(name + ": combinational cycle detected");
    return order;
  }

 private:
  void check_net(int n) const {
    if (n < 0 || n >= num_nets)
      throw lowering_error(name + ": net id " + std::to_string(n) +
                           " out of range");
  }
};

/* ---- serialization (versioned text format) ---- */

inline void save_netlist(const Netlist& nl, std::ostream& os) {
  os << "ubmlp-netlist v1\n";
  os << "name " << nl.name << "\n";
  os << "nets " << nl.num_nets << "\n";
  for (const auto& [k, v] : nl.attrs) os << "attr " << k << " " << v << "\n";
  for (const auto& p : nl.ports) {
    os << (p.is_input ? "input " : "output ") << p.name << " "
       << p.nets.size();
    for (int n : p.nets) os << " " << n;
    os << "\n";
  }
  for (const auto& g : nl.gates) {
    os << "gate " << gate_kind_name(g.kind) << " in";
    for (int n : g.inputs) os << " " << n;
    os << " out";
    for (int n : g.outputs) os << " " << n;
    os << "\n";
  }
  os << "end\n";
}

inline void save_netlist(const Netlist& nl, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw serialization_error("cannot write " + path);
  save_netlist(nl, os);
}

inline Netlist load_netlist(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "ubmlp-netlist v1")
    throw serialization_error("bad netlist header");
  Netlist nl;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok == "end") break;
    if (tok == "name") {
      ss >> nl.name;
    } else if (tok == "nets") {
      ss >> nl.num_nets;
    } else if (tok == "attr") {
      std::string key;
      ss >> key;
      std::string rest;
      std::getline(ss, rest);
      if (!rest.empty() && rest.front() == ' ') rest.erase(0, 1);
      nl.attrs[key] = rest;
    } else if (tok == "input" || tok == "output") {
      Port p;
      p.is_input = (tok == "input");
      std::size_t width;
      ss >> p.name >> width;
      p.nets.resize(width);
      for (auto& n : p.nets) ss >> n;
      nl.ports.push_back(std::move(p));
    } else if (tok == "gate") {
      std::string kind;
      ss >> kind;
      Gate g;
      g.kind = gate_kind_from_name(kind);
      std::string marker;
      ss >> marker;  // "in"
      g.inputs.resize(gate_num_inputs(g.kind));
      for (auto& n : g.inputs) ss >> n;
      ss >> marker;  // "out"
      g.outputs.resize(gate_num_outputs(g.kind));
      for (auto& n : g.outputs) ss >> n;
      if (!ss) throw serialization_error("bad gate line: " + line);
      nl.gates.push_back(std::move(g));
    } else {
      throw serialization_error("bad netlist line: " + line);
    }
  }
  return nl;
}

inline Netlist load_netlist_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw serialization_error("cannot read " + path);
  return load_netlist(is);
}

/* ---- structural Verilog export (one-way) ---- */

inline void export_verilog(const Netlist& nl, std::ostream& os) {
  os << "// generated by ubmlp\n";
  os << "module " << (nl.name.empty() ? "top" : nl.name) << " (";
  bool first = true;
  for (const auto& p : nl.ports) {
    if (!first) os << ", ";
    first = false;
    os << p.name;
  }
  os << ");\n";
  for (const auto& p : nl.ports) {
    os << "  " << (p.is_input ? "input" : "output");
    if (p.nets.size() > 1) os << " [" << p.nets.size() - 1 << ":0]";
    os << " " << p.name << ";\n";
  }
  os << "  wire [" << (nl.num_nets > 0 ? nl.num_nets - 1 : 0) << ":0] n;\n";
  for (const auto& p : nl.ports) {
    for (std::size_t b = 0; b < p.nets.size(); ++b) {
      const std::string bit =
          p.nets.size() == 1 ? p.name
                             : p.name + "[" + std::to_string(b) + "]";
      if (p.is_input)
        os << "  assign n[" << p.nets[b] << "] = " << bit << ";\n";
      else
        os << "  assign " << bit << " = n[" << p.nets[b] << "];\n";
    }
  }
  auto in = [&](const Gate& g, int i) {
    return "n[" + std::to_string(g.inputs[i]) + "]";
  };
  for (const auto& g : nl.gates) {
    const std::string out = "n[" + std::to_string(g.outputs[0]) + "]";
    switch (g.kind) {
      case GateKind::CONST0: os << "  assign " << out << " = 1'b0;\n"; break;
      case GateKind::CONST1: os << "  assign " << out << " = 1'b1;\n"; break;
      case GateKind::INV:
        os << "  assign " << out << " = ~" << in(g, 0) << ";\n";
        break;
      case GateKind::AND2:
        os << "  assign " << out << " = " << in(g, 0) << " & " << in(g, 1)
           << ";\n";
        break;
      case GateKind::OR2:
        os << "  assign " << out << " = " << in(g, 0) << " | " << in(g, 1)
           << ";\n";
        break;
      case GateKind::XOR2:
        os << "  assign " << out << " = " << in(g, 0) << " ^ " << in(g, 1)
           << ";\n";
        break;
      case GateKind::NAND2:
        os << "  assign " << out << " = ~(" << in(g, 0) << " & " << in(g, 1)
           << ");\n";
        break;
      case GateKind::NOR2:
        os << "  assign " << out << " = ~(" << in(g, 0) << " | " << in(g, 1)
           << ");\n";
        break;
      case GateKind::MUX2:
        os << "  assign " << out << " = " << in(g, 0) << " ? " << in(g, 2)
           << " : " << in(g, 1) << ";\n";
        break;
      case GateKind::HA:
        os << "  assign " << out << " = " << in(g, 0) << " ^ " << in(g, 1)
           << ";\n";
        os << "  assign n[" << g.outputs[1] << "] = " << in(g, 0) << " & "
           << in(g, 1) << ";\n";
        break;
      case GateKind::FA:
        os << "  assign " << out << " = " << in(g, 0) << " ^ " << in(g, 1)
           << " ^ " << in(g, 2) << ";\n";
        os << "  assign n[" << g.outputs[1] << "] = (" << in(g, 0) << " & "
           << in(g, 1) << ") | (" << in(g, 2) << " & (" << in(g, 0) << " ^ "
           << in(g, 1) << "));\n";
        break;
    }
  }
  os << "endmodule\n";
}

/* ---- builder used by the lowering passes ---- */

using Word = std::vector<int>;  // net ids, little-endian

class NetlistBuilder {
 public:
  explicit NetlistBuilder(std::string name) { nl_.name = std::move(name); }

  int new_net() { return nl_.num_nets++; }

  Word add_input_port(const std::string& name, int width) {
    Port p;
    p.name = name;
    p.is_input = true;
    for (int i = 0; i < width; ++i) p.nets.push_back(new_net());
    nl_.ports.push_back(p);
    return nl_.ports.back().nets;
  }

  void add_output_port(const std::string& name, const Word& nets) {
    Port p;
    p.name = name;
    p.is_input = false;
    p.nets = nets;
    nl_.ports.push_back(std::move(p));
  }

  void set_attr(const std::string& key, const std::string& value) {
    nl_.attrs[key] = value;
  }

  int const0() {
    if (const0_ < 0) const0_ = emit(GateKind::CONST0, {})[0];
    return const0_;
  }
  int const1() {
    if (const1_ < 0) const1_ = emit(GateKind::CONST1, {})[0];
    return const1_;
  }
  int const_bit(bool b) { return b ? const1() : const0(); }

  int not_(int a) { return emit(GateKind::INV, {a})[0]; }
  int and_(int a, int b) { return emit(GateKind::AND2, {a, b})[0]; }
  int or_(int a, int b) { return emit(GateKind::OR2, {a, b})[0]; }
  int xor_(int a, int b) { return emit(GateKind::XOR2, {a, b})[0]; }
  int mux(int sel, int d0, int d1) {
    return emit(GateKind::MUX2, {sel, d0, d1})[0];
  }
  std::pair<int, int> half_adder(int a, int b) {
    auto o = emit(GateKind::HA, {a, b});
    return {o[0], o[1]};
  }
  std::pair<int, int> full_adder(int a, int b, int c) {
    auto o = emit(GateKind::FA, {a, b, c});
    return {o[0], o[1]};
  }

  /// Constant value as a two's-complement word of the given width.
  Word const_word(long long value, int width) {
    Word w(width);
    for (int i = 0; i < width; ++i) w[i] = const_bit((value >> i) & 1);
    return w;
  }

  Word zero_extend(Word w, int width) {
    while (static_cast<int>(w.size()) < width) w.push_back(const0());
    w.resize(width);
    return w;
  }

  Word sign_extend(Word w, int width) {
    if (w.empty()) return zero_extend(w, width);
    const int msb = w.back();
    while (static_cast<int>(w.size()) < width) w.push_back(msb);
    w.resize(width);
    return w;
  }

  /// Ones counter: reduces equal-weight bits with a 3:2 full-adder
  /// compressor per column; result is the binary count.
  Word popcount_tree(const std::vector<int>& bits) {
    if (bits.empty()) return {};
    std::vector<std::vector<int>> columns{bits};
    Word result;
    for (std::size_t col = 0; col < columns.size(); ++col) {
      while (columns[col].size() > 1) {
        if (columns.size() <= col + 1) columns.emplace_back();
        auto& cur = columns[col];  // safe: no growth below this point
        if (cur.size() >= 3) {
          auto [s, c] = full_adder(cur[0], cur[1], cur[2]);
          cur.erase(cur.begin(), cur.begin() + 3);
          cur.push_back(s);
          columns[col + 1].push_back(c);
        } else {
          auto [s, c] = half_adder(cur[0], cur[1]);
          cur.erase(cur.begin(), cur.begin() + 2);
          cur.push_back(s);
          columns[col + 1].push_back(c);
        }
      }
      result.push_back(columns[col].empty() ? const0() : columns[col][0]);
    }
    return result;
  }

  /// Ripple-carry a + b over `width` bits (inputs must already be extended
  /// by the caller to the interpretation they want); carry out dropped.
  Word ripple_add(const Word& a, const Word& b, int carry_in_net = -1) {
    if (a.size() != b.size())
      throw lowering_error("ripple_add: width mismatch");
    Word sum(a.size());
    int carry = carry_in_net >= 0 ? carry_in_net : const0();
    for (std::size_t i = 0; i < a.size(); ++i) {
      auto [s, c] = full_adder(a[i], b[i], carry);
      sum[i] = s;
      carry = c;
    }
    return sum;
  }

  /// Signed a + b at `width` bits (operands sign-extended).
  Word add_signed(const Word& a, const Word& b, int width) {
    return ripple_add(sign_extend(a, width), sign_extend(b, width));
  }

  /// Signed a - b at `width` bits.
  Word sub_signed(const Word& a, const Word& b, int width) {
    Word ax = sign_extend(a, width);
    Word bx = sign_extend(b, width);
    for (auto& n : bx) n = not_(n);
    return ripple_add(ax, bx, const1());
  }

  /// ReLU on a two's-complement word: every bit ANDed with the inverted
  /// sign bit.
  Word relu(const Word& w) {
    if (w.empty()) return w;
    const int keep = not_(w.back());
    Word out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) out[i] = and_(w[i], keep);
    return out;
  }

  /// sign(a - b) as a single bit: 1 iff a < b (signed).
  int less_than_signed(const Word& a, const Word& b) {
    const int width =
        static_cast<int>(std::max(a.size(), b.size())) + 1;
    Word diff = sub_signed(sign_extend(a, width), sign_extend(b, width),
                           width);
    return diff.back();
  }

  Word mux_word(int sel, const Word& d0, const Word& d1) {
    if (d0.size() != d1.size())
      throw lowering_error("mux_word: width mismatch");
    Word out(d0.size());
    for (std::size_t i = 0; i < d0.size(); ++i)
      out[i] = mux(sel, d0[i], d1[i]);
    return out;
  }

  Netlist take() { return std::move(nl_); }
  const Netlist& peek() const { return nl_; }

 private:
  std::vector<int> emit(GateKind kind, std::vector<int> inputs) {
    Gate g;
    g.kind = kind;
    g.inputs = std::move(inputs);
    for (int i = 0; i < gate_num_outputs(kind); ++i)
      g.outputs.push_back(new_net());
    nl_.gates.push_back(g);
    return nl_.gates.back().outputs;
  }

  Netlist nl_;
  int const0_ = -1;
  int const1_ = -1;
};

}  // namespace ubmlp
