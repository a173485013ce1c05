#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "precopt/manifolds.hpp"
#include "precopt/objective.hpp"
#include "precopt/random.hpp"
#include "precopt/types.hpp"

using namespace precopt;

namespace {

constexpr ConstraintKind kKinds[] = {ConstraintKind::TPC, ConstraintKind::PUPC,
                                     ConstraintKind::PAPC};

ChannelSet random_channels(const SystemConfig& cfg, std::uint64_t seed) {
  ChannelSet ch;
  for (int i = 0; i < cfg.num_users; ++i) {
    ch.channels.push_back(
        random_cn_matrix(cfg.user_antennas[i], cfg.num_bs_antennas, seed, 100 + i));
  }
  return ch;
}

PrecoderStack random_stack(const SystemConfig& cfg, std::uint64_t seed) {
  PrecoderStack p;
  for (int i = 0; i < cfg.num_users; ++i) {
    p.blocks.push_back(
        random_cn_matrix(cfg.num_bs_antennas, cfg.user_streams[i], seed, 200 + i));
  }
  return p;
}

ManifoldPoint random_point(const SystemConfig& cfg, ConstraintKind kind,
                           std::uint64_t seed) {
  return normalize_to_manifold(random_stack(cfg, seed), kind, cfg);
}

TangentStack random_tangent(const SystemConfig& cfg, const ManifoldPoint& pt,
                            std::uint64_t seed) {
  return project_tangent(pt, random_stack(cfg, seed), cfg);
}

double rel_diff(const TangentStack& a, const TangentStack& b) {
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < a.blocks.size(); ++i) {
    num += (a.blocks[i] - b.blocks[i]).squaredNorm();
    den += b.blocks[i].squaredNorm();
  }
  return std::sqrt(num) / (1.0 + std::sqrt(den));
}

// Raw-loop constraint pairings used as oracles against project_tangent output.
double tpc_pairing(const PrecoderStack& p, const TangentStack& xi) {
  double acc = 0.0;
  for (size_t b = 0; b < p.blocks.size(); ++b) {
    for (Eigen::Index r = 0; r < p.blocks[b].rows(); ++r) {
      for (Eigen::Index c = 0; c < p.blocks[b].cols(); ++c) {
        acc += (std::conj(p.blocks[b](r, c)) * xi.blocks[b](r, c)).real();
      }
    }
  }
  return acc;
}

double block_pairing(const CMatrix& pb, const CMatrix& xb) {
  double acc = 0.0;
  for (Eigen::Index r = 0; r < pb.rows(); ++r) {
    for (Eigen::Index c = 0; c < pb.cols(); ++c) {
      acc += (std::conj(pb(r, c)) * xb(r, c)).real();
    }
  }
  return acc;
}

double row_pairing(const PrecoderStack& p, const TangentStack& xi, int row) {
  double acc = 0.0;
  for (size_t b = 0; b < p.blocks.size(); ++b) {
    for (Eigen::Index c = 0; c < p.blocks[b].cols(); ++c) {
      acc += (p.blocks[b](row, c) * std::conj(xi.blocks[b](row, c))).real();
    }
  }
  return acc;
}

SystemConfig desk_config() { return make_uniform_config(6, 3, 2, 2, 0.5); }

}  // namespace

TEST_CASE("feasibility residual") {
  const SystemConfig cfg = desk_config();
  SUBCASE("normalized points are feasible") {
    for (const ConstraintKind kind : kKinds) {
      const ManifoldPoint pt = random_point(cfg, kind, 1);
      CHECK(feasibility_residual(pt, cfg) < 1e-12);
    }
  }
  SUBCASE("doubling the power gives residual one under TPC") {
    ManifoldPoint pt = random_point(cfg, ConstraintKind::TPC, 2);
    for (CMatrix& b : pt.p.blocks) b *= std::sqrt(2.0);
    CHECK(feasibility_residual(pt, cfg) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("normalize to manifold") {
  const SystemConfig cfg = desk_config();
  SUBCASE("TPC scales by half when the power is quadrupled") {
    const ManifoldPoint pt = random_point(cfg, ConstraintKind::TPC, 3);
    PrecoderStack big = pt.p;
    for (CMatrix& b : big.blocks) b *= 2.0;
    const ManifoldPoint again = normalize_to_manifold(big, ConstraintKind::TPC, cfg);
    CHECK(rel_diff(again.p, pt.p) < 1e-14);
  }
  SUBCASE("PUPC normalization is idempotent") {
    const ManifoldPoint pt = random_point(cfg, ConstraintKind::PUPC, 4);
    const ManifoldPoint again = normalize_to_manifold(pt.p, ConstraintKind::PUPC, cfg);
    CHECK(rel_diff(again.p, pt.p) < 1e-15);
  }
  SUBCASE("PAPC row norms all hit the per-antenna budget") {
    const ManifoldPoint pt = random_point(cfg, ConstraintKind::PAPC, 5);
    for (int j = 0; j < cfg.num_bs_antennas; ++j) {
      double n2 = 0.0;
      for (const CMatrix& b : pt.p.blocks) n2 += b.row(j).squaredNorm();
      CHECK(std::sqrt(n2) ==
            doctest::Approx(std::sqrt(cfg.per_antenna_power[j])).epsilon(1e-13));
    }
  }
  SUBCASE("degenerate inputs are refused") {
    CHECK_THROWS_AS(normalize_to_manifold(zero_stack(cfg), ConstraintKind::TPC, cfg),
                    DegenerateInputError);
    PrecoderStack p = random_stack(cfg, 6);
    p.blocks[1].setZero();
    CHECK_THROWS_AS(normalize_to_manifold(p, ConstraintKind::PUPC, cfg),
                    DegenerateInputError);
    PrecoderStack q = random_stack(cfg, 7);
    for (CMatrix& b : q.blocks) b.row(2).setZero();
    CHECK_THROWS_AS(normalize_to_manifold(q, ConstraintKind::PAPC, cfg),
                    DegenerateInputError);
  }
}

TEST_CASE("tangent projection") {
  const SystemConfig cfg = desk_config();
  SUBCASE("the point itself projects to zero under TPC") {
    const ManifoldPoint pt = random_point(cfg, ConstraintKind::TPC, 8);
    const TangentStack z = project_tangent(pt, pt.p, cfg);
    CHECK(stack_norm(z) < 1e-14 * stack_norm(pt.p));
  }
  SUBCASE("idempotency and constraint pairings") {
    for (const ConstraintKind kind : kKinds) {
      for (std::uint64_t s = 0; s < 10; ++s) {
        const ManifoldPoint pt = random_point(cfg, kind, 10 + s);
        const TangentStack xi = random_stack(cfg, 30 + s);
        const TangentStack t1 = project_tangent(pt, xi, cfg);
        const TangentStack t2 = project_tangent(pt, t1, cfg);
        CHECK(rel_diff(t2, t1) < 1e-12);
        switch (kind) {
          case ConstraintKind::TPC:
            CHECK(std::abs(tpc_pairing(pt.p, t1)) < 1e-10);
            break;
          case ConstraintKind::PUPC:
            for (int i = 0; i < cfg.num_users; ++i) {
              CHECK(std::abs(block_pairing(pt.p.blocks[i], t1.blocks[i])) < 1e-10);
            }
            break;
          case ConstraintKind::PAPC:
            for (int j = 0; j < cfg.num_bs_antennas; ++j) {
              CHECK(std::abs(row_pairing(pt.p, t1, j)) < 1e-10);
            }
            break;
        }
        CHECK(tangency_residual(pt, t1, cfg) < 1e-12);
      }
    }
  }
  SUBCASE("removed component is multiplier-shaped") {
    const ManifoldPoint pt = random_point(cfg, ConstraintKind::PAPC, 40);
    const TangentStack xi = random_stack(cfg, 41);
    const TangentStack t = project_tangent(pt, xi, cfg);
    const TangentStack normal = add_scaled(xi, -1.0, t);
    // Recover a per-row lambda by least squares and confirm it explains the
    // removed component entirely.
    for (int j = 0; j < cfg.num_bs_antennas; ++j) {
      double num = 0.0, den = 0.0;
      for (size_t b = 0; b < pt.p.blocks.size(); ++b) {
        num += (normal.blocks[b].row(j) * pt.p.blocks[b].row(j).adjoint())(0, 0).real();
        den += pt.p.blocks[b].row(j).squaredNorm();
      }
      const double lambda = num / den;
      double resid = 0.0;
      for (size_t b = 0; b < pt.p.blocks.size(); ++b) {
        resid += (normal.blocks[b].row(j) - lambda * pt.p.blocks[b].row(j)).squaredNorm();
      }
      CHECK(std::sqrt(resid) < 1e-12 * (1.0 + stack_norm(xi)));
    }
  }
  SUBCASE("multiplier decomposition reconstructs the input") {
    for (const ConstraintKind kind : kKinds) {
      const ManifoldPoint pt = random_point(cfg, kind, 42);
      const TangentStack xi = random_stack(cfg, 43);
      const ProjectionMultiplier m = projection_multiplier(pt, xi, cfg);
      const TangentStack rebuilt =
          add_scaled(project_tangent(pt, xi, cfg), 1.0, apply_multiplier(pt, m));
      CHECK(rel_diff(rebuilt, xi) < 1e-13);
    }
  }
  SUBCASE("orthogonal decomposition") {
    for (const ConstraintKind kind : kKinds) {
      const ManifoldPoint pt = random_point(cfg, kind, 44);
      const TangentStack xi = random_stack(cfg, 45);
      const TangentStack zeta = random_stack(cfg, 46);
      const TangentStack normal = add_scaled(xi, -1.0, project_tangent(pt, xi, cfg));
      const double g = frobenius_inner(normal, project_tangent(pt, zeta, cfg));
      CHECK(std::abs(g) < 1e-10 * (1.0 + stack_norm(xi) * stack_norm(zeta)));
    }
  }
  SUBCASE("infeasible base point is rejected") {
    ManifoldPoint pt = random_point(cfg, ConstraintKind::TPC, 47);
    for (CMatrix& b : pt.p.blocks) b *= 1.5;
    CHECK_THROWS_AS(project_tangent(pt, random_stack(cfg, 48), cfg), PreconditionError);
  }
}

TEST_CASE("riemannian gradient") {
  const SystemConfig cfg = desk_config();
  const ChannelSet ch = random_channels(cfg, 50);
  SUBCASE("zero and purely normal inputs vanish") {
    const ManifoldPoint pt = random_point(cfg, ConstraintKind::TPC, 51);
    CHECK(stack_norm(riemannian_gradient(pt, zeros_like(pt.p), cfg)) == 0.0);
    const TangentStack normal = scaled(pt.p, -3.25);
    CHECK(stack_norm(riemannian_gradient(pt, normal, cfg)) <
          1e-12 * stack_norm(normal));
  }
  SUBCASE("definitionally equal to the projection") {
    for (const ConstraintKind kind : kKinds) {
      const ManifoldPoint pt = random_point(cfg, kind, 52);
      const TangentStack egrad = euclidean_gradient(cfg, ch, pt.p);
      const TangentStack rg = riemannian_gradient(pt, egrad, cfg);
      const TangentStack proj = project_tangent(pt, egrad, cfg);
      for (size_t b = 0; b < rg.blocks.size(); ++b) {
        CHECK((rg.blocks[b].array() == proj.blocks[b].array()).all());
      }
      CHECK(tangency_residual(pt, rg, cfg) < 1e-10);
    }
  }
  SUBCASE("metric pairing matches the objective's directional derivative") {
    for (const ConstraintKind kind : kKinds) {
      const ManifoldPoint pt = random_point(cfg, kind, 53);
      const TangentStack rg =
          riemannian_gradient(pt, euclidean_gradient(cfg, ch, pt.p), cfg);
      for (std::uint64_t s = 0; s < 20; ++s) {
        const TangentStack xi = random_tangent(cfg, pt, 60 + s);
        const double t = 1e-6;
        const double fp = wsr_objective(cfg, ch, add_scaled(pt.p, t, xi));
        const double fm = wsr_objective(cfg, ch, add_scaled(pt.p, -t, xi));
        const double fd = (fp - fm) / (2.0 * t);
        const double an = frobenius_inner(rg, xi);
        CHECK(std::abs(an - fd) / (1.0 + std::abs(an)) < 1e-5);
      }
    }
  }
}

TEST_CASE("retraction") {
  const SystemConfig cfg = desk_config();
  SUBCASE("zero step is the identity") {
    for (const ConstraintKind kind : kKinds) {
      const ManifoldPoint pt = random_point(cfg, kind, 70);
      const ManifoldPoint r = retract(pt, zeros_like(pt.p), cfg);
      CHECK(rel_diff(r.p, pt.p) < 1e-15);
    }
  }
  SUBCASE("TPC collinear step rescales back to the point") {
    const ManifoldPoint pt = random_point(cfg, ConstraintKind::TPC, 71);
    const ManifoldPoint r = retract(pt, pt.p, cfg);
    CHECK(rel_diff(r.p, pt.p) < 1e-14);
  }
  SUBCASE("results are feasible") {
    for (const ConstraintKind kind : kKinds) {
      for (std::uint64_t s = 0; s < 10; ++s) {
        const ManifoldPoint pt = random_point(cfg, kind, 72 + s);
        const TangentStack xi = random_tangent(cfg, pt, 90 + s);
        const ManifoldPoint r = retract(pt, xi, cfg);
        CHECK(feasibility_residual(r, cfg) < 1e-12);
      }
    }
  }
  SUBCASE("PAPC row norms after a tangent step") {
    const ManifoldPoint pt = random_point(cfg, ConstraintKind::PAPC, 85);
    const ManifoldPoint r = retract(pt, random_tangent(cfg, pt, 86), cfg);
    for (int j = 0; j < cfg.num_bs_antennas; ++j) {
      double n2 = 0.0;
      for (const CMatrix& b : r.p.blocks) n2 += b.row(j).squaredNorm();
      CHECK(std::abs(std::sqrt(n2) - std::sqrt(cfg.per_antenna_power[j])) <
            1e-12 * std::sqrt(cfg.per_antenna_power[j]));
    }
  }
  SUBCASE("local rigidity") {
    for (const ConstraintKind kind : kKinds) {
      const ManifoldPoint pt = random_point(cfg, kind, 87);
      const TangentStack xi = random_tangent(cfg, pt, 88);
      const double t = 1e-6;
      const ManifoldPoint r = retract(pt, scaled(xi, t), cfg);
      const TangentStack fd = scaled(add_scaled(r.p, -1.0, pt.p), 1.0 / t);
      CHECK(rel_diff(fd, xi) < 1e-4);
    }
  }
  SUBCASE("degenerate steps are refused") {
    const ManifoldPoint pt = random_point(cfg, ConstraintKind::TPC, 89);
    CHECK_THROWS_AS(retract(pt, scaled(pt.p, -1.0), cfg), DegenerateStepError);
    const ManifoldPoint pu = random_point(cfg, ConstraintKind::PUPC, 90);
    TangentStack kill = zeros_like(pu.p);
    kill.blocks[0] = -pu.p.blocks[0];
    CHECK_THROWS_AS(retract(pu, kill, cfg), DegenerateStepError);
  }
  SUBCASE("scalings agree with the cache advance factors") {
    const ManifoldPoint pt = random_point(cfg, ConstraintKind::PUPC, 91);
    const TangentStack xi = random_tangent(cfg, pt, 92);
    const CacheScalings sc = retraction_scalings(pt, xi, cfg);
    REQUIRE(sc.factors.size() == static_cast<size_t>(cfg.num_users));
    const ManifoldPoint r = retract(pt, xi, cfg);
    for (int i = 0; i < cfg.num_users; ++i) {
      const CMatrix expect = sc.factors[i] * (pt.p.blocks[i] + xi.blocks[i]);
      CHECK((r.p.blocks[i] - expect).norm() == 0.0);
    }
  }
}

TEST_CASE("vector transport") {
  const SystemConfig cfg = desk_config();
  for (const ConstraintKind kind : kKinds) {
    const ManifoldPoint pt = random_point(cfg, kind, 100);
    const TangentStack eta = random_tangent(cfg, pt, 101);
    const TangentStack xi = random_tangent(cfg, pt, 102);
    SUBCASE("zero displacement is a no-op on tangents") {
      const TangentStack t = transport(pt, zeros_like(pt.p), xi, cfg);
      CHECK(rel_diff(t, xi) < 1e-12);
    }
    SUBCASE("zero vector stays zero") {
      CHECK(stack_norm(transport(pt, eta, zeros_like(pt.p), cfg)) == 0.0);
    }
    SUBCASE("tangent at the destination and non-expansive") {
      const TangentStack t = transport(pt, eta, xi, cfg);
      const ManifoldPoint dest = retract(pt, eta, cfg);
      CHECK(tangency_residual(dest, t, cfg) < 1e-10);
      CHECK(frobenius_inner(t, t) <= frobenius_inner(xi, xi) * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("PUPC with one user coincides with TPC") {
  const SystemConfig cfg = make_uniform_config(6, 1, 2, 2, 0.5, 1.7);
  const PrecoderStack raw = random_stack(cfg, 110);
  const ManifoldPoint tp = normalize_to_manifold(raw, ConstraintKind::TPC, cfg);
  const ManifoldPoint up = normalize_to_manifold(raw, ConstraintKind::PUPC, cfg);
  CHECK(rel_diff(up.p, tp.p) < 1e-12);
  const TangentStack xi = random_stack(cfg, 111);
  const TangentStack proj_t = project_tangent(tp, xi, cfg);
  const TangentStack proj_u = project_tangent(up, xi, cfg);
  CHECK(rel_diff(proj_u, proj_t) < 1e-12);
  const TangentStack tan = project_tangent(tp, random_stack(cfg, 112), cfg);
  const ManifoldPoint rt = retract(tp, tan, cfg);
  const ManifoldPoint ru = retract(up, tan, cfg);
  CHECK(rel_diff(ru.p, rt.p) < 1e-12);
  const ChannelSet ch = random_channels(cfg, 113);
  const TangentStack egrad = euclidean_gradient(cfg, ch, tp.p);
  CHECK(rel_diff(riemannian_gradient(up, egrad, cfg),
                 riemannian_gradient(tp, egrad, cfg)) < 1e-12);
}

TEST_CASE("riemannian hessian") {
  const SystemConfig cfg = desk_config();
  const ChannelSet ch = random_channels(cfg, 120);
  SUBCASE("zero direction maps to zero") {
    const ManifoldPoint pt = random_point(cfg, ConstraintKind::TPC, 121);
    const TangentStack h = riemannian_hessian(pt, zeros_like(pt.p), cfg, ch);
    CHECK(stack_norm(h) == doctest::Approx(0.0).epsilon(1e-15));
  }
  SUBCASE("output is tangent and the operator is linear") {
    for (const ConstraintKind kind : kKinds) {
      const ManifoldPoint pt = random_point(cfg, kind, 122);
      const HessianOperator op = make_hessian_operator(cfg, ch, pt);
      const TangentStack xi = random_tangent(cfg, pt, 123);
      const TangentStack zeta = random_tangent(cfg, pt, 124);
      const TangentStack hxi = hessian_apply(cfg, ch, op, xi);
      CHECK(tangency_residual(pt, hxi, cfg) < 1e-8);
      const TangentStack hzeta = hessian_apply(cfg, ch, op, zeta);
      const TangentStack hsum = hessian_apply(cfg, ch, op, add_scaled(xi, 2.0, zeta));
      CHECK(rel_diff(hsum, add_scaled(hxi, 2.0, hzeta)) < 1e-11);
    }
  }
  SUBCASE("self-adjoint in the product metric") {
    for (const ConstraintKind kind : kKinds) {
      const ManifoldPoint pt = random_point(cfg, kind, 130);
      const HessianOperator op = make_hessian_operator(cfg, ch, pt);
      for (std::uint64_t s = 0; s < 5; ++s) {
        const TangentStack xi = random_tangent(cfg, pt, 131 + 2 * s);
        const TangentStack eta = random_tangent(cfg, pt, 132 + 2 * s);
        const double a = frobenius_inner(hessian_apply(cfg, ch, op, xi), eta);
        const double b = frobenius_inner(xi, hessian_apply(cfg, ch, op, eta));
        CHECK(std::abs(a - b) / (1.0 + std::abs(a)) < 1e-7);
      }
    }
  }
  SUBCASE("matches the gradient field derivative along the retraction curve") {
    for (const ConstraintKind kind : kKinds) {
      const ManifoldPoint pt = random_point(cfg, kind, 140);
      const TangentStack grad0 =
          riemannian_gradient(pt, euclidean_gradient(cfg, ch, pt.p), cfg);
      const TangentStack xi = random_tangent(cfg, pt, 141);
      const TangentStack hxi = riemannian_hessian(pt, xi, cfg, ch);
      auto fd_error = [&](double t) {
        const ManifoldPoint moved = retract(pt, scaled(xi, t), cfg);
        const TangentStack grad_t =
            riemannian_gradient(moved, euclidean_gradient(cfg, ch, moved.p), cfg);
        const TangentStack pulled = project_tangent(pt, grad_t, cfg);
        const TangentStack diff = scaled(add_scaled(pulled, -1.0, grad0), 1.0 / t);
        return stack_norm(add_scaled(diff, -1.0, hxi));
      };
      const double e0 = fd_error(1e-3);
      const double e1 = fd_error(5e-4);
      const double e2 = fd_error(2.5e-4);
      if (e2 > 1e-9 * (1.0 + stack_norm(hxi))) {
        CHECK(e0 / e1 == doctest::Approx(2.0).epsilon(0.15));
        CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.15));
      }
    }
  }
  SUBCASE("non-tangent input is rejected") {
    const ManifoldPoint pt = random_point(cfg, ConstraintKind::TPC, 150);
    CHECK_THROWS_AS(riemannian_hessian(pt, pt.p, cfg, ch), PreconditionError);
  }
}

TEST_CASE("geometry property sweep") {
  const SystemConfig cfg = make_uniform_config(5, 2, 2, 2, 0.8);
  for (const ConstraintKind kind : kKinds) {
    for (std::uint64_t s = 0; s < 50; ++s) {
      const ManifoldPoint pt = random_point(cfg, kind, 1000 + s);
      const TangentStack raw = random_stack(cfg, 2000 + s);
      const TangentStack t1 = project_tangent(pt, raw, cfg);
      CHECK(rel_diff(project_tangent(pt, t1, cfg), t1) < 1e-12);
      CHECK(tangency_residual(pt, t1, cfg) < 1e-10);
      const ManifoldPoint r = retract(pt, t1, cfg);
      CHECK(feasibility_residual(r, cfg) < 1e-12);
      const TangentStack moved = transport(pt, t1, t1, cfg);
      CHECK(tangency_residual(r, moved, cfg) < 1e-10);
      CHECK(frobenius_inner(moved, moved) <=
            frobenius_inner(t1, t1) * (1.0 + 1e-12));
    }
  }
}
