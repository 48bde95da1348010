// Unary stream primitives: encoding shapes, exact value semantics, and the
// floor-product contract of the AND multiplier.

#include <doctest.h>

#include <ubmlp/unary.hpp>

using namespace ubmlp;

namespace {

// independent oracle for the even-spacing rule: place one 1 in each of the
// `count` equal buckets of [0, width)
std::string spaced_oracle(int count, int width) {
  std::string s(width, '0');
  for (int i = 0; i < width; ++i) {
    long long lo = (1LL * i * count) / width;
    long long hi = (1LL * (i + 1) * count) / width;
    if (hi > lo) s[i] = '1';
  }
  return s;
}

}  // namespace

TEST_CASE("thermometer encoding packs ones at the low end") {
  CHECK(encode_thermometer(2, 5).materialize().to_string() == "11000");
  CHECK(encode_thermometer(0, 7).materialize().to_string() == "0000000");
  CHECK(encode_thermometer(7, 7).materialize().to_string() == "1111111");
  CHECK(encode_thermometer(4, 7).materialize().to_string() == "1111000");
}

TEST_CASE("rate pattern follows the even-spacing rule") {
  CHECK(encode_rate(3, 7).materialize().to_string() == "0010101");
  CHECK(encode_rate(0, 7).materialize().to_string() == "0000000");
  CHECK(encode_rate(7, 7).materialize().to_string() == "1111111");
  CHECK(encode_rate(1, 7).materialize().to_string() == "0000001");
  for (int n : {3, 5, 7, 8, 15, 31})
    for (int b = 0; b <= n; ++b) {
      auto got = encode_rate(b, n).materialize();
      CHECK(got.to_string() == spaced_oracle(b, n));
      CHECK(got.popcount() == b);  // the pattern has exactly b ones
    }
}

TEST_CASE("stream values: popcount integer and rational") {
  auto s = UnaryStream::from_string("010100");
  CHECK(unary_value_int(s) == 2);
  auto r = unary_value_real(UnaryStream::from_string("00010100"));
  CHECK(r == Rational{1, 4});
  CHECK(r.to_double() == doctest::Approx(0.25));
  CHECK(unary_value_real(UnaryStream::from_string("1111")) == Rational{1, 1});
}

TEST_CASE("AND multiply gives exactly floor(a*b/N) for all operands") {
  for (int n : {3, 7, 15, 31})
    for (int a = 0; a <= n; ++a)
      for (int b = 0; b <= n; ++b) {
        auto prod = unary_mul(encode_thermometer(a, n), encode_rate(b, n));
        CHECK(prod.popcount() == (a * b) / n);
      }
}

TEST_CASE("product popcount is invariant under joint bit permutation") {
  // value semantics are positional-free: permuting both operands with the
  // same permutation cannot change the popcount
  const int n = 7;
  Rng rng(0x5eed);
  for (int trial = 0; trial < 50; ++trial) {
    const int a = int(rng.below(n + 1)), b = int(rng.below(n + 1));
    auto ta = encode_thermometer(a, n).materialize();
    auto rb = encode_rate(b, n).materialize();
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    for (int i = n - 1; i > 0; --i)
      std::swap(perm[i], perm[rng.below(i + 1)]);
    int pop = 0;
    for (int i = 0; i < n; ++i)
      pop += ta.bits[perm[i]] & rb.bits[perm[i]];
    CHECK(pop == unary_mul(encode_thermometer(a, n), encode_rate(b, n))
                     .popcount());
  }
}

TEST_CASE("product is monotone in each operand") {
  const int n = 15;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const int p = unary_mul(encode_thermometer(a, n), encode_rate(b, n))
                        .popcount();
      CHECK(unary_mul(encode_thermometer(a + 1, n), encode_rate(b, n))
                .popcount() >= p);
      CHECK(unary_mul(encode_thermometer(a, n), encode_rate(b + 1, n))
                .popcount() >= p);
    }
}

TEST_CASE("accumulation is popcount-linear") {
  std::vector<UnaryStream> streams{UnaryStream::from_string("1010100"),
                                   UnaryStream::from_string("0000001"),
                                   UnaryStream::from_string("1111111")};
  int expect = 0;
  for (const auto& s : streams) expect += s.popcount();
  CHECK(unary_accumulate(streams) == expect);
  CHECK(unary_accumulate({}) == 0);
}

TEST_CASE("encoders and multiplier reject bad arguments") {
  CHECK_THROWS_AS(encode_thermometer(8, 7), range_error);
  CHECK_THROWS_AS(encode_thermometer(-1, 7), range_error);
  CHECK_THROWS_AS(encode_rate(8, 7), range_error);
  CHECK_THROWS_AS(encode_rate(1, 0), range_error);
  CHECK_THROWS_AS(unary_mul(encode_thermometer(2, 7), encode_rate(2, 15)),
                  dimension_error);
  CHECK_THROWS_AS(UnaryStream::from_string("01x1"), range_error);
  CHECK_THROWS_AS(unary_value_real(UnaryStream{}), range_error);
}
