/* ubmlp: hybrid unary-binary MLP hardware toolchain
 *
 * Compiles hybrid and baseline models to gate-level netlists: pruned
 * encoder-less thermometer front end, routing-only unary products feeding
 * popcount compressor trees, shift-add constant multipliers, pos/neg
 * accumulation with a single signed merge plus bias, ReLU masking, and the
 * argmax comparator tree.
 */

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ubmlp/common.hpp"
#include "ubmlp/mlp.hpp"
#include "ubmlp/netlist.hpp"

namespace ubmlp {

namespace detail {

inline int bits_for_unsigned(long long x) {
  int w = 1;
  while (x >= (1LL << w)) ++w;
  return w;
}

inline int signed_width_for(long long lo, long long hi) {
  int w = 1;
  while (-(1LL << (w - 1)) > lo || hi > (1LL << (w - 1)) - 1) ++w;
  return w;
}

}  // namespace detail

struct UtilizationReport {
  std::vector<int> used_bits_per_input;
  int stream_width = 0;
  double utilization = 0.0;  // sum used / (I * N)
};

/// Bitwise-OR of every rate pattern touching each input; zero positions
/// mark comparators the ADC lowering prunes.
inline std::pair<std::vector<std::vector<std::uint8_t>>, UtilizationReport>
compute_unused_bits(const HybridModel& model) {
  const auto& t = model.topology;
  const int N = model.stream_width;
  std::vector<std::vector<std::uint8_t>> masks(
      t.inputs, std::vector<std::uint8_t>(N, 0));
  for (int h = 0; h < t.hidden; ++h)
    for (int i = 0; i < t.inputs; ++i) {
      if (model.sign[h][i] == 0) continue;
      const auto bits = model.pattern(h, i).materialize().bits;
      for (int j = 0; j < N; ++j) masks[i][j] |= bits[j];
    }
  UtilizationReport rep;
  rep.stream_width = N;
  int used = 0;
  for (int i = 0; i < t.inputs; ++i) {
    int c = 0;
    for (int j = 0; j < N; ++j) c += masks[i][j];
    rep.used_bits_per_input.push_back(c);
    used += c;
  }
  rep.utilization = double(used) / double(t.inputs * N);
  return {masks, rep};
}

struct AdcSpec {
  std::string input_name;
  int resolution_bits = 0;          // k
  std::vector<int> thresholds;      // surviving comparator indices j (1-based
                                    // threshold j/2^k maps to therm bit j-1)
  std::vector<int> pruned;          // removed comparator indices
};

struct LoweringStats {
  long long layer1_mul_and_gates = 0;   // AND gates used for multiplication
  long long layer1_mul_adders = 0;      // adder cells inside layer-1 products
  // adder cells per layer-2 partial product, keyed (class, hidden)
  std::vector<std::vector<long long>> layer2_pp_adders;
  long long comparator_cells = 0;
  long long encoder_units = 0;
};

struct LoweredModel {
  Netlist netlist;
  LoweringStats stats;
  UtilizationReport utilization;  // hybrid only
};

struct LoweringOptions {
  bool prune_adc = true;
};

namespace detail {

struct Bounded {
  Word word;        // unsigned, little-endian
  long long bound;  // inclusive max value
};

/// Balanced tree of ripple adders over unsigned operands with exact
/// width tracking. Returns value and bound; counts adders instantiated.
inline Bounded sum_unsigned(NetlistBuilder& b, std::vector<Bounded> ops,
                            long long* adder_count = nullptr) {
  if (ops.empty()) return {{b.const0()}, 0};
  while (ops.size() > 1) {
    std::vector<Bounded> next;
    for (std::size_t i = 0; i + 1 < ops.size(); i += 2) {
      const long long bound = ops[i].bound + ops[i + 1].bound;
      const int w = bits_for_unsigned(bound);
      Word a = b.zero_extend(ops[i].word, w);
      Word bb = b.zero_extend(ops[i + 1].word, w);
      if (adder_count) ++*adder_count;
      next.push_back({b.ripple_add(a, bb), bound});
    }
    if (ops.size() % 2) next.push_back(ops.back());
    ops = std::move(next);
  }
  return ops[0];
}

/// value * magnitude as shift-add over the set bits of the constant
/// magnitude. A power-of-two magnitude is a pure wire shift: zero adders.
inline Bounded const_multiply(NetlistBuilder& b, const Bounded& value,
                              int magnitude, long long* adder_count) {
  std::vector<Bounded> partials;
  for (int j = 0; (1 << j) <= magnitude; ++j) {
    if (!((magnitude >> j) & 1)) continue;
    Word shifted(j, b.const0());
    shifted.insert(shifted.end(), value.word.begin(), value.word.end());
    partials.push_back({shifted, value.bound << j});
  }
  if (partials.empty()) return {{b.const0()}, 0};
  return sum_unsigned(b, std::move(partials), adder_count);
}

/// pos - neg + bias as a two's-complement word sized exactly to its range,
/// then ReLU. Returns the hidden word and its (post-ReLU) bound.
inline Bounded merge_relu(NetlistBuilder& b, const Bounded& pos,
                          const Bounded& neg, long long bias) {
  const long long pre_lo = -neg.bound + bias;
  const long long pre_hi = pos.bound + bias;
  const int w = signed_width_for(std::min({pre_lo, -neg.bound, 0LL}),
                                 std::max({pre_hi, pos.bound, 0LL}));
  Word diff = b.sub_signed(b.zero_extend(pos.word, w),
                           b.zero_extend(neg.word, w), w);
  Word pre = b.ripple_add(diff, b.const_word(bias, w));
  Word hidden = b.relu(pre);
  return {hidden, std::max(0LL, pre_hi)};
}

/// Signed class score: pos - neg + bias, sized to its exact range.
inline std::pair<Word, std::pair<long long, long long>> merge_signed(
    NetlistBuilder& b, const Bounded& pos, const Bounded& neg,
    long long bias) {
  const long long lo = -neg.bound + bias;
  const long long hi = pos.bound + bias;
  const int w = signed_width_for(std::min({lo, -neg.bound, 0LL}),
                                 std::max({hi, pos.bound, 0LL}));
  Word diff = b.sub_signed(b.zero_extend(pos.word, w),
                           b.zero_extend(neg.word, w), w);
  Word out = b.ripple_add(diff, b.const_word(bias, w));
  return {out, {lo, hi}};
}

/// Shared second layer + ReLU'd hidden words in, signed score words out.
inline std::vector<Word> lower_layer2_words(
    NetlistBuilder& b, const std::vector<Bounded>& hidden,
    const std::vector<std::vector<int>>& w2, const std::vector<long long>& b2,
    LoweringStats& stats) {
  const int classes = static_cast<int>(w2.size());
  const int H = hidden.empty() ? 0 : static_cast<int>(w2[0].size());
  stats.layer2_pp_adders.assign(classes, std::vector<long long>(H, 0));
  std::vector<Word> scores;
  std::vector<std::pair<long long, long long>> ranges;
  for (int c = 0; c < classes; ++c) {
    std::vector<Bounded> pos, neg;
    for (int h = 0; h < H; ++h) {
      const int q = w2[c][h];
      if (q == 0) continue;  // no hardware
      long long cells = 0;
      Bounded p = const_multiply(b, hidden[h], std::abs(q), &cells);
      stats.layer2_pp_adders[c][h] = cells;
      (q > 0 ? pos : neg).push_back(std::move(p));
    }
    Bounded ps = sum_unsigned(b, std::move(pos));
    Bounded ns = sum_unsigned(b, std::move(neg));
    auto [word, range] = merge_signed(b, ps, ns, b2[c]);
    scores.push_back(std::move(word));
    ranges.push_back(range);
  }
  // common signed width for the comparator tree and score ports
  int w = 1;
  for (const auto& r : ranges)
    w = std::max(w, signed_width_for(r.first, r.second));
  for (auto& s : scores) s = b.sign_extend(s, w);
  return scores;
}

/// Balanced tree of C-1 signed comparators; ties forward the lower index.
inline Word lower_argmax_words(NetlistBuilder& b,
                               const std::vector<Word>& scores) {
  const int classes = static_cast<int>(scores.size());
  int idx_bits = 1;
  while ((1 << idx_bits) < classes) ++idx_bits;
  struct Entry {
    Word value;
    Word index;
  };
  std::vector<Entry> level;
  for (int c = 0; c < classes; ++c)
    level.push_back({scores[c], b.const_word(c, idx_bits)});
  while (level.size() > 1) {
    std::vector<Entry> next;
    for (std::size_t i = 0; i + 1 < level.size(); i += 2) {
      // forward the right side only when strictly larger
      const int sel = b.less_than_signed(level[i].value, level[i + 1].value);
      next.push_back({b.mux_word(sel, level[i].value, level[i + 1].value),
                      b.mux_word(sel, level[i].index, level[i + 1].index)});
    }
    if (level.size() % 2) next.push_back(level.back());
    level = std::move(next);
  }
  return level[0].index;
}

inline std::string join_ints(const std::vector<int>& v) {
  std::ostringstream ss;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) ss << " ";
    ss << v[i];
  }
  return ss.str();
}

}  // namespace detail

/// Thermometer front end for one input: one primary-input bit per
/// surviving comparator. The analog comparison itself stays outside the
/// netlist; comparators are accounted as interface cells.
inline Word lower_adc(NetlistBuilder& b, const AdcSpec& spec) {
  if (spec.resolution_bits < 1)
    throw lowering_error("lower_adc: resolution must be >= 1");
  return b.add_input_port(spec.input_name,
                          static_cast<int>(spec.thresholds.size()));
}

/// Lowers a hybrid model. Layer-1 products are pure routing: thermometer
/// bits selected by each rate pattern feed the pos/neg popcount trees
/// directly, with zero AND gates instantiated for multiplication.
inline LoweredModel lower_full(const HybridModel& model,
                               const LoweringOptions& opts = {}) {
  const auto& t = model.topology;
  const int N = model.stream_width;
  auto [masks, util] = compute_unused_bits(model);

  NetlistBuilder b("hybrid");
  LoweringStats stats;

  // front end: pruned encoder-less ADCs
  std::vector<std::vector<int>> therm_nets(t.inputs,
                                           std::vector<int>(N, -1));
  std::vector<std::vector<int>> positions(t.inputs);
  for (int i = 0; i < t.inputs; ++i) {
    AdcSpec spec;
    spec.input_name = "in" + std::to_string(i);
    spec.resolution_bits = model.config.input_bits;
    for (int j = 0; j < N; ++j) {
      if (!opts.prune_adc || masks[i][j])
        spec.thresholds.push_back(j + 1);
      else
        spec.pruned.push_back(j + 1);
    }
    Word port = lower_adc(b, spec);
    for (std::size_t p = 0; p < spec.thresholds.size(); ++p) {
      const int j = spec.thresholds[p] - 1;
      therm_nets[i][j] = port[p];
      positions[i].push_back(j);
    }
    stats.comparator_cells += static_cast<long long>(spec.thresholds.size());
  }

  // layer 1: routing + popcount compressor trees + signed merge + ReLU
  std::vector<detail::Bounded> hidden;
  for (int h = 0; h < t.hidden; ++h) {
    std::vector<int> pos_wires, neg_wires;
    for (int i = 0; i < t.inputs; ++i) {
      if (model.sign[h][i] == 0) continue;
      const auto bits = model.pattern(h, i).materialize().bits;
      for (int j = 0; j < N; ++j) {
        if (!bits[j]) continue;
        if (therm_nets[i][j] < 0)
          throw lowering_error("hybrid lowering: used bit was pruned");
        (model.sign[h][i] > 0 ? pos_wires : neg_wires)
            .push_back(therm_nets[i][j]);
      }
    }
    detail::Bounded pos{b.popcount_tree(pos_wires),
                        static_cast<long long>(pos_wires.size())};
    detail::Bounded neg{b.popcount_tree(neg_wires),
                        static_cast<long long>(neg_wires.size())};
    if (pos.word.empty()) pos.word = {b.const0()};
    if (neg.word.empty()) neg.word = {b.const0()};
    hidden.push_back(detail::merge_relu(b, pos, neg, model.b1[h]));
  }

  auto scores = detail::lower_layer2_words(b, hidden, model.w2, model.b2,
                                           stats);
  Word idx = detail::lower_argmax_words(b, scores);

  b.add_output_port("class", idx);
  for (int c = 0; c < t.classes; ++c)
    b.add_output_port("score" + std::to_string(c), scores[c]);

  b.set_attr("mode", "hybrid");
  b.set_attr("inputs", std::to_string(t.inputs));
  b.set_attr("hidden", std::to_string(t.hidden));
  b.set_attr("classes", std::to_string(t.classes));
  b.set_attr("input_bits", std::to_string(model.config.input_bits));
  b.set_attr("stream_width", std::to_string(N));
  b.set_attr("comparator_cells", std::to_string(stats.comparator_cells));
  b.set_attr("encoder_units", "0");
  b.set_attr("layer1_mul_and_gates", "0");
  for (int i = 0; i < t.inputs; ++i)
    b.set_attr("in" + std::to_string(i) + "_positions",
               detail::join_ints(positions[i]));

  LoweredModel out;
  out.netlist = b.take();
  out.stats = stats;
  out.utilization = util;
  out.netlist.validate();
  return out;
}

/// Lowers the exact binary baseline: k-bit binary inputs (flash ADC with
/// its thermometer-to-binary encoder accounted as interface cells), exact
/// constant multipliers in both layers, pos/neg accumulation, ReLU, argmax.
inline LoweredModel lower_full(const QuantizedMlp& model,
                               const LoweringOptions& = {}) {
  const auto& t = model.topology;
  const int k = model.config.input_bits;
  const int N = model.config.input_levels();

  NetlistBuilder b("baseline");
  LoweringStats stats;
  stats.comparator_cells = 1LL * t.inputs * N;
  stats.encoder_units = t.inputs;

  std::vector<detail::Bounded> level_words;
  for (int i = 0; i < t.inputs; ++i)
    level_words.push_back(
        {b.add_input_port("in" + std::to_string(i), k),
         static_cast<long long>(N)});

  // layer 1: shift-add constant multipliers, pos/neg accumulation
  std::vector<detail::Bounded> hidden;
  for (int h = 0; h < t.hidden; ++h) {
    std::vector<detail::Bounded> pos, neg;
    for (int i = 0; i < t.inputs; ++i) {
      const int q = model.w1[h][i];
      if (q == 0) continue;
      detail::Bounded p = detail::const_multiply(
          b, level_words[i], std::abs(q), &stats.layer1_mul_adders);
      (q > 0 ? pos : neg).push_back(std::move(p));
    }
    detail::Bounded ps = detail::sum_unsigned(b, std::move(pos));
    detail::Bounded ns = detail::sum_unsigned(b, std::move(neg));
    hidden.push_back(detail::merge_relu(b, ps, ns, model.b1[h]));
  }

  auto scores = detail::lower_layer2_words(b, hidden, model.w2, model.b2,
                                           stats);
  Word idx = detail::lower_argmax_words(b, scores);

  b.add_output_port("class", idx);
  for (int c = 0; c < t.classes; ++c)
    b.add_output_port("score" + std::to_string(c), scores[c]);

  b.set_attr("mode", "baseline");
  b.set_attr("inputs", std::to_string(t.inputs));
  b.set_attr("hidden", std::to_string(t.hidden));
  b.set_attr("classes", std::to_string(t.classes));
  b.set_attr("input_bits", std::to_string(k));
  b.set_attr("stream_width", std::to_string(N));
  b.set_attr("comparator_cells", std::to_string(stats.comparator_cells));
  b.set_attr("encoder_units", std::to_string(stats.encoder_units));

  LoweredModel out;
  out.netlist = b.take();
  out.stats = stats;
  out.netlist.validate();
  return out;
}

/* ---- input/output encoding contract for simulation ---- */

using SimVector = std::map<std::string, std::vector<std::uint8_t>>;

/// Encodes quantized input levels into primary-input bit assignments per
/// the netlist's mode attribute.
inline SimVector encode_levels(const Netlist& nl,
                               const std::vector<int>& levels) {
  SimVector sv;
  const std::string mode = nl.attrs.at("mode");
  const int inputs = std::stoi(nl.attrs.at("inputs"));
  if (static_cast<int>(levels.size()) != inputs)
    throw simulation_error("encode_levels: expected " +
                           std::to_string(inputs) + " levels");
  for (int i = 0; i < inputs; ++i) {
    const std::string pname = "in" + std::to_string(i);
    const Port* port = nl.find_port(pname);
    if (!port) throw simulation_error("missing input port " + pname);
    std::vector<std::uint8_t> bits(port->nets.size(), 0);
    if (mode == "hybrid") {
      std::istringstream ss(nl.attrs.at(pname + "_positions"));
      int pos, p = 0;
      while (ss >> pos) bits[p++] = pos < levels[i] ? 1 : 0;
    } else {
      for (std::size_t j = 0; j < bits.size(); ++j)
        bits[j] = (levels[i] >> j) & 1;
    }
    sv[pname] = std::move(bits);
  }
  return sv;
}

inline long long decode_unsigned(const std::vector<std::uint8_t>& bits) {
  long long v = 0;
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) v |= 1LL << i;
  return v;
}

inline long long decode_signed(const std::vector<std::uint8_t>& bits) {
  long long v = decode_unsigned(bits);
  if (!bits.empty() && bits.back())
    v -= 1LL << bits.size();
  return v;
}

}  // namespace ubmlp
