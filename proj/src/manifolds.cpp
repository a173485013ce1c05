#include "precopt/manifolds.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "precopt/flops.hpp"

namespace precopt {

namespace {

constexpr double kFeasibilityGate = 1e-8;
constexpr double kDegenerateNorm = 1e-14;

void check_stack_shapes(const SystemConfig& cfg, const TangentStack& s, const char* what) {
  if (s.blocks.size() != static_cast<size_t>(cfg.num_users)) {
    throw DimensionError(std::string(what) + ": block count mismatch");
  }
  for (int i = 0; i < cfg.num_users; ++i) {
    if (s.blocks[i].rows() != cfg.num_bs_antennas ||
        s.blocks[i].cols() != cfg.user_streams[i]) {
      throw DimensionError(std::string(what) + ": block shape mismatch");
    }
  }
}

void require_feasible(const ManifoldPoint& pt, const SystemConfig& cfg, const char* op) {
  if (feasibility_residual(pt, cfg) >= kFeasibilityGate) {
    throw PreconditionError(std::string(op) + ": base point is not on the manifold");
  }
}

double block_inner(const CMatrix& a, const CMatrix& b) {
  opcount::add_multiplies(static_cast<std::uint64_t>(a.size()));
  return a.cwiseProduct(b.conjugate()).real().sum();
}

double row_inner(const SystemConfig& cfg, const TangentStack& a, const TangentStack& b,
                 int row) {
  double acc = 0.0;
  for (int l = 0; l < cfg.num_users; ++l) {
    opcount::add_multiplies(static_cast<std::uint64_t>(a.blocks[l].cols()));
    acc += a.blocks[l].row(row).cwiseProduct(b.blocks[l].row(row).conjugate()).real().sum();
  }
  return acc;
}

// Normal-space coefficients of the bilinear form <a, b> under each constraint:
// global, per block, or per antenna row, each scaled by the inverse power target.
std::vector<double> multiplier_form(ConstraintKind kind, const SystemConfig& cfg,
                                    const TangentStack& a, const TangentStack& b) {
  std::vector<double> values;
  switch (kind) {
    case ConstraintKind::TPC:
      values.push_back(frobenius_inner(a, b) / cfg.total_power);
      break;
    case ConstraintKind::PUPC:
      values.reserve(cfg.num_users);
      for (int i = 0; i < cfg.num_users; ++i) {
        values.push_back(block_inner(a.blocks[i], b.blocks[i]) / cfg.per_user_power[i]);
      }
      break;
    case ConstraintKind::PAPC:
      values.reserve(cfg.num_bs_antennas);
      for (int j = 0; j < cfg.num_bs_antennas; ++j) {
        values.push_back(row_inner(cfg, a, b, j) / cfg.per_antenna_power[j]);
      }
      break;
  }
  return values;
}

TangentStack scale_by_multiplier(ConstraintKind kind, const TangentStack& s,
                                 const ProjectionMultiplier& m) {
  TangentStack out;
  out.blocks.reserve(s.blocks.size());
  switch (kind) {
    case ConstraintKind::TPC:
      if (m.values.size() != 1) throw DimensionError("TPC expects one multiplier value");
      for (const CMatrix& b : s.blocks) {
        opcount::add_multiplies(static_cast<std::uint64_t>(b.size()));
        out.blocks.push_back(m.values[0] * b);
      }
      break;
    case ConstraintKind::PUPC:
      if (m.values.size() != s.blocks.size()) {
        throw DimensionError("PUPC expects one multiplier value per user");
      }
      for (size_t i = 0; i < s.blocks.size(); ++i) {
        opcount::add_multiplies(static_cast<std::uint64_t>(s.blocks[i].size()));
        out.blocks.push_back(m.values[i] * s.blocks[i]);
      }
      break;
    case ConstraintKind::PAPC:
      for (const CMatrix& b : s.blocks) {
        if (m.values.size() != static_cast<size_t>(b.rows())) {
          throw DimensionError("PAPC expects one multiplier value per antenna");
        }
        CMatrix scaled = b;
        opcount::add_multiplies(static_cast<std::uint64_t>(b.size()));
        for (int r = 0; r < b.rows(); ++r) scaled.row(r) *= m.values[r];
        out.blocks.push_back(std::move(scaled));
      }
      break;
  }
  return out;
}

double row_power(const SystemConfig& cfg, const PrecoderStack& p, int row) {
  double acc = 0.0;
  for (int l = 0; l < cfg.num_users; ++l) acc += p.blocks[l].row(row).squaredNorm();
  return acc;
}

}  // namespace

double feasibility_residual(const ManifoldPoint& pt, const SystemConfig& cfg) {
  check_stack_shapes(cfg, pt.p, "feasibility_residual");
  double worst = 0.0;
  switch (pt.kind) {
    case ConstraintKind::TPC: {
      double n2 = 0.0;
      for (const CMatrix& b : pt.p.blocks) n2 += b.squaredNorm();
      worst = std::abs(n2 - cfg.total_power) / cfg.total_power;
      break;
    }
    case ConstraintKind::PUPC:
      for (int i = 0; i < cfg.num_users; ++i) {
        const double n2 = pt.p.blocks[i].squaredNorm();
        worst = std::max(worst,
                         std::abs(n2 - cfg.per_user_power[i]) / cfg.per_user_power[i]);
      }
      break;
    case ConstraintKind::PAPC:
      for (int j = 0; j < cfg.num_bs_antennas; ++j) {
        const double n2 = row_power(cfg, pt.p, j);
        worst = std::max(worst, std::abs(n2 - cfg.per_antenna_power[j]) / cfg.per_antenna_power[j]);
      }
      break;
  }
  return worst;
}

ManifoldPoint normalize_to_manifold(const PrecoderStack& p, ConstraintKind kind,
                                    const SystemConfig& cfg) {
  p.validate(cfg);
  ManifoldPoint pt{p, kind};
  switch (kind) {
    case ConstraintKind::TPC: {
      double n2 = 0.0;
      for (const CMatrix& b : p.blocks) n2 += b.squaredNorm();
      if (n2 <= 0.0) throw DegenerateInputError("cannot normalize a zero stack");
      const double s = std::sqrt(cfg.total_power / n2);
      for (CMatrix& b : pt.p.blocks) b *= s;
      break;
    }
    case ConstraintKind::PUPC:
      for (int i = 0; i < cfg.num_users; ++i) {
        const double n2 = p.blocks[i].squaredNorm();
        if (n2 <= 0.0) {
          throw DegenerateInputError("cannot normalize a zero block for user " +
                                     std::to_string(i));
        }
        pt.p.blocks[i] *= std::sqrt(cfg.per_user_power[i] / n2);
      }
      break;
    case ConstraintKind::PAPC:
      for (int j = 0; j < cfg.num_bs_antennas; ++j) {
        const double n2 = row_power(cfg, p, j);
        if (n2 <= 0.0) {
          throw DegenerateInputError("cannot normalize a zero antenna row " +
                                     std::to_string(j));
        }
        const double s = std::sqrt(cfg.per_antenna_power[j] / n2);
        for (CMatrix& b : pt.p.blocks) b.row(j) *= s;
      }
      break;
  }
  return pt;
}

ProjectionMultiplier projection_multiplier(const ManifoldPoint& pt, const TangentStack& xi,
                                           const SystemConfig& cfg) {
  check_stack_shapes(cfg, pt.p, "projection_multiplier");
  check_stack_shapes(cfg, xi, "projection_multiplier");
  return {multiplier_form(pt.kind, cfg, xi, pt.p)};
}

TangentStack apply_multiplier(const ManifoldPoint& pt, const ProjectionMultiplier& m) {
  return scale_by_multiplier(pt.kind, pt.p, m);
}

TangentStack project_tangent(const ManifoldPoint& pt, const TangentStack& xi,
                             const SystemConfig& cfg) {
  check_stack_shapes(cfg, pt.p, "project_tangent");
  check_stack_shapes(cfg, xi, "project_tangent");
  require_feasible(pt, cfg, "project_tangent");
  const ProjectionMultiplier m{multiplier_form(pt.kind, cfg, xi, pt.p)};
  return add_scaled(xi, -1.0, scale_by_multiplier(pt.kind, pt.p, m));
}

double tangency_residual(const ManifoldPoint& pt, const TangentStack& xi,
                         const SystemConfig& cfg) {
  check_stack_shapes(cfg, pt.p, "tangency_residual");
  check_stack_shapes(cfg, xi, "tangency_residual");
  const double n = stack_norm(xi);
  if (n == 0.0) return 0.0;
  const ProjectionMultiplier m{multiplier_form(pt.kind, cfg, xi, pt.p)};
  return stack_norm(scale_by_multiplier(pt.kind, pt.p, m)) / n;
}

TangentStack riemannian_gradient(const ManifoldPoint& pt, const TangentStack& egrad,
                                 const SystemConfig& cfg) {
  return project_tangent(pt, egrad, cfg);
}

CacheScalings retraction_scalings(const ManifoldPoint& pt, const TangentStack& xi,
                                  const SystemConfig& cfg) {
  check_stack_shapes(cfg, pt.p, "retraction_scalings");
  check_stack_shapes(cfg, xi, "retraction_scalings");
  const PrecoderStack stepped = add_scaled(pt.p, 1.0, xi);
  CacheScalings sc;
  const double floor2 = kDegenerateNorm * kDegenerateNorm;
  switch (pt.kind) {
    case ConstraintKind::TPC: {
      double n2 = 0.0;
      for (const CMatrix& b : stepped.blocks) n2 += b.squaredNorm();
      if (n2 <= floor2 * cfg.total_power) {
        throw DegenerateStepError("retraction collapsed the stack norm");
      }
      sc.factors.push_back(std::sqrt(cfg.total_power / n2));
      break;
    }
    case ConstraintKind::PUPC:
      sc.factors.reserve(cfg.num_users);
      for (int i = 0; i < cfg.num_users; ++i) {
        const double n2 = stepped.blocks[i].squaredNorm();
        if (n2 <= floor2 * cfg.per_user_power[i]) {
          throw DegenerateStepError("retraction collapsed block norm for user " +
                                    std::to_string(i));
        }
        sc.factors.push_back(std::sqrt(cfg.per_user_power[i] / n2));
      }
      break;
    case ConstraintKind::PAPC:
      sc.factors.reserve(cfg.num_bs_antennas);
      for (int j = 0; j < cfg.num_bs_antennas; ++j) {
        const double n2 = row_power(cfg, stepped, j);
        if (n2 <= floor2 * cfg.per_antenna_power[j]) {
          throw DegenerateStepError("retraction collapsed antenna row " + std::to_string(j));
        }
        sc.factors.push_back(std::sqrt(cfg.per_antenna_power[j] / n2));
      }
      break;
  }
  return sc;
}

ManifoldPoint retract(const ManifoldPoint& pt, const TangentStack& xi,
                      const SystemConfig& cfg) {
  const CacheScalings sc = retraction_scalings(pt, xi, cfg);
  PrecoderStack stepped = add_scaled(pt.p, 1.0, xi);
  switch (pt.kind) {
    case ConstraintKind::TPC:
      for (CMatrix& b : stepped.blocks) b *= sc.factors[0];
      break;
    case ConstraintKind::PUPC:
      for (int i = 0; i < cfg.num_users; ++i) stepped.blocks[i] *= sc.factors[i];
      break;
    case ConstraintKind::PAPC:
      for (CMatrix& b : stepped.blocks) {
        for (int r = 0; r < cfg.num_bs_antennas; ++r) b.row(r) *= sc.factors[r];
      }
      break;
  }
  return {std::move(stepped), pt.kind};
}

TangentStack transport(const ManifoldPoint& pt, const TangentStack& eta,
                       const TangentStack& xi, const SystemConfig& cfg) {
  return project_tangent(retract(pt, eta, cfg), xi, cfg);
}

HessianOperator make_hessian_operator(const SystemConfig& cfg, const ChannelSet& ch,
                                      const ManifoldPoint& pt) {
  check_stack_shapes(cfg, pt.p, "make_hessian_operator");
  require_feasible(pt, cfg, "make_hessian_operator");
  HessianOperator op;
  op.pt = pt;
  op.ws = make_dgrad_workspace(cfg, ch, pt.p);
  op.egrad = euclidean_gradient_from_workspace(cfg, ch, op.ws);
  op.mult.values = multiplier_form(pt.kind, cfg, op.egrad, pt.p);
  return op;
}

TangentStack hessian_apply(const SystemConfig& cfg, const ChannelSet& ch,
                           const HessianOperator& op, const TangentStack& xi) {
  check_stack_shapes(cfg, xi, "hessian_apply");
  if (tangency_residual(op.pt, xi, cfg) >= kFeasibilityGate) {
    throw PreconditionError("hessian_apply: direction is not tangent at the base point");
  }
  const TangentStack dgrad = dgrad_apply(cfg, ch, op.ws, xi);

  // Derivative of the multiplier field along xi; the multiplier itself acts on xi.
  ProjectionMultiplier dmult;
  dmult.values = multiplier_form(op.pt.kind, cfg, xi, op.egrad);
  const std::vector<double> second = multiplier_form(op.pt.kind, cfg, op.pt.p, dgrad);
  for (size_t k = 0; k < dmult.values.size(); ++k) dmult.values[k] += second[k];

  TangentStack w = add_scaled(dgrad, -1.0, scale_by_multiplier(op.pt.kind, op.pt.p, dmult));
  w = add_scaled(w, -1.0, scale_by_multiplier(op.pt.kind, xi, op.mult));
  return project_tangent(op.pt, w, cfg);
}

TangentStack riemannian_hessian(const ManifoldPoint& pt, const TangentStack& xi,
                                const SystemConfig& cfg, const ChannelSet& ch) {
  return hessian_apply(cfg, ch, make_hessian_operator(cfg, ch, pt), xi);
}

}  // namespace precopt
