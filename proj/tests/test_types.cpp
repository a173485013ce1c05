#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "precopt/random.hpp"
#include "precopt/types.hpp"

using namespace precopt;

namespace {

// Scalar-loop oracle for the product metric, independent of the library path.
double inner_oracle(const TangentStack& a, const TangentStack& b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.blocks.size(); ++i) {
    for (Eigen::Index r = 0; r < a.blocks[i].rows(); ++r) {
      for (Eigen::Index c = 0; c < a.blocks[i].cols(); ++c) {
        const complex_t x = a.blocks[i](r, c);
        const complex_t y = b.blocks[i](r, c);
        acc += x.real() * y.real() + x.imag() * y.imag();
      }
    }
  }
  return acc;
}

PrecoderStack random_stack(const SystemConfig& cfg, std::uint64_t seed) {
  PrecoderStack p;
  for (int i = 0; i < cfg.num_users; ++i) {
    p.blocks.push_back(
        random_cn_matrix(cfg.num_bs_antennas, cfg.user_streams[i], seed, 700 + i));
  }
  return p;
}

}  // namespace

TEST_CASE("stack_concat single identity block") {
  PrecoderStack p;
  p.blocks.push_back(CMatrix::Identity(2, 2));
  CHECK((stack_concat(p) - CMatrix::Identity(2, 2)).norm() == 0.0);
}

TEST_CASE("stack_concat preserves column order") {
  PrecoderStack p;
  p.blocks.push_back(random_cn_matrix(4, 2, 1, 0));
  p.blocks.push_back(random_cn_matrix(4, 3, 1, 1));
  const CMatrix m = stack_concat(p);
  CHECK(m.cols() == 5);
  CHECK((m.leftCols(2) - p.blocks[0]).norm() == 0.0);
  CHECK((m.rightCols(3) - p.blocks[1]).norm() == 0.0);
}

TEST_CASE("stack_concat round-trips through stack_split") {
  SystemConfig cfg = make_uniform_config(5, 3, 2, 2, 1.0);
  PrecoderStack p = random_stack(cfg, 42);
  p.blocks[1] = random_cn_matrix(5, 3, 42, 900);  // uneven widths
  const CMatrix m = stack_concat(p);
  const PrecoderStack back = stack_split(m, {2, 3, 2});
  REQUIRE(back.blocks.size() == p.blocks.size());
  for (size_t i = 0; i < p.blocks.size(); ++i) {
    CHECK((back.blocks[i] - p.blocks[i]).norm() == 0.0);
  }
}

TEST_CASE("stack_concat rejects mismatched shapes") {
  PrecoderStack p;
  CHECK_THROWS_AS(stack_concat(p), DimensionError);
  p.blocks.push_back(CMatrix::Zero(3, 1));
  p.blocks.push_back(CMatrix::Zero(4, 1));
  CHECK_THROWS_AS(stack_concat(p), DimensionError);
  CHECK_THROWS_AS(stack_split(CMatrix::Zero(3, 4), {2, 3}), DimensionError);
}

TEST_CASE("frobenius_inner on the zero stack") {
  PrecoderStack z;
  z.blocks.push_back(CMatrix::Zero(3, 2));
  CHECK(frobenius_inner(z, z) == 0.0);
}

TEST_CASE("frobenius_inner of [[1],[i]] with itself") {
  PrecoderStack a;
  CMatrix m(2, 1);
  m << complex_t{1, 0}, complex_t{0, 1};
  a.blocks.push_back(m);
  CHECK(frobenius_inner(a, a) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("frobenius_inner matches the scalar-loop oracle") {
  SystemConfig cfg = make_uniform_config(6, 3, 2, 2, 1.0);
  const PrecoderStack a = random_stack(cfg, 7);
  const PrecoderStack b = random_stack(cfg, 8);
  const double lib = frobenius_inner(a, b);
  const double ref = inner_oracle(a, b);
  CHECK(std::abs(lib - ref) <= 1e-13 * (1.0 + std::abs(ref)));
}

TEST_CASE("frobenius_inner symmetry and positivity") {
  SystemConfig cfg = make_uniform_config(4, 2, 2, 1, 1.0);
  const PrecoderStack a = random_stack(cfg, 11);
  const PrecoderStack b = random_stack(cfg, 12);
  CHECK(frobenius_inner(a, b) == frobenius_inner(b, a));  // bitwise
  CHECK(frobenius_inner(a, a) > 0.0);
  const PrecoderStack z = zero_stack(cfg);
  CHECK(frobenius_inner(z, z) == 0.0);
}

TEST_CASE("frobenius_inner rejects shape mismatches") {
  PrecoderStack a, b;
  a.blocks.push_back(CMatrix::Zero(2, 2));
  b.blocks.push_back(CMatrix::Zero(2, 3));
  CHECK_THROWS_AS(frobenius_inner(a, b), DimensionError);
}

TEST_CASE("stack arithmetic helpers") {
  SystemConfig cfg = make_uniform_config(4, 2, 2, 2, 1.0);
  const PrecoderStack p = random_stack(cfg, 3);
  const PrecoderStack q = random_stack(cfg, 4);
  const PrecoderStack s = add_scaled(p, 2.0, q);
  for (int i = 0; i < 2; ++i) {
    CHECK((s.blocks[i] - (p.blocks[i] + 2.0 * q.blocks[i])).norm() == 0.0);
  }
  const PrecoderStack h = scaled(p, 0.5);
  CHECK(std::abs(stack_norm(h) - 0.5 * stack_norm(p)) < 1e-14 * stack_norm(p));
  CHECK(stack_norm(zeros_like(p)) == 0.0);
}

TEST_CASE("SystemConfig validation enforces the dimensional invariants") {
  SystemConfig cfg = make_uniform_config(8, 4, 2, 2, 0.1);
  CHECK(cfg.total_rx_antennas() == 8);
  CHECK(cfg.total_streams() == 8);

  SystemConfig bad = cfg;
  bad.user_streams[0] = 3;  // d_i > M_i
  CHECK_THROWS_AS(bad.validate(), DimensionError);

  bad = cfg;
  bad.user_antennas[0] = 9;  // M_i > M_t
  CHECK_THROWS_AS(bad.validate(), DimensionError);

  bad = cfg;
  bad.per_user_power[0] *= 2.0;  // sum != P
  CHECK_THROWS_AS(bad.validate(), DegenerateInputError);

  bad = cfg;
  bad.per_antenna_power[0] *= 1.5;  // unequal antenna split
  CHECK_THROWS_AS(bad.validate(), DegenerateInputError);

  bad = cfg;
  bad.user_weights.assign(4, 0.0);  // all-zero weights rejected
  CHECK_THROWS_AS(bad.validate(), DegenerateInputError);

  SystemConfig ok = cfg;
  ok.user_weights = {0.0, 1.0, 2.0, 0.5};  // single zero weight allowed
  CHECK_NOTHROW(ok.validate());

  bad = cfg;
  bad.noise_variance = 0.0;
  CHECK_THROWS_AS(bad.validate(), DegenerateInputError);
}

TEST_CASE("stack and channel validation against a config") {
  SystemConfig cfg = make_uniform_config(4, 2, 2, 1, 1.0);
  PrecoderStack p = zero_stack(cfg);
  CHECK_NOTHROW(p.validate(cfg));
  p.blocks[0](0, 0) = complex_t{std::nan(""), 0};
  CHECK_THROWS_AS(p.validate(cfg), DegenerateInputError);

  ChannelSet ch;
  ch.channels.push_back(CMatrix::Zero(2, 4));
  CHECK_THROWS_AS(ch.validate(cfg), DimensionError);
  ch.channels.push_back(CMatrix::Zero(2, 3));  // wrong M_t
  CHECK_THROWS_AS(ch.validate(cfg), DimensionError);
  ch.channels[1] = CMatrix::Zero(2, 4);
  CHECK_NOTHROW(ch.validate(cfg));
}

TEST_CASE("gaussian streams are deterministic and distinct") {
  const CMatrix a = random_cn_matrix(3, 3, 123, 0);
  const CMatrix b = random_cn_matrix(3, 3, 123, 0);
  const CMatrix c = random_cn_matrix(3, 3, 124, 0);
  const CMatrix d = random_cn_matrix(3, 3, 123, 1);
  CHECK((a - b).norm() == 0.0);
  CHECK((a - c).cwiseAbs().maxCoeff() > 0.0);
  CHECK((a - d).cwiseAbs().maxCoeff() > 0.0);
}
