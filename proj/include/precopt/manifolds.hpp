#pragma once

#include "precopt/objective.hpp"
#include "precopt/types.hpp"

namespace precopt {

struct ManifoldPoint {
  PrecoderStack p;
  ConstraintKind kind = ConstraintKind::TPC;
};

/**
 * Normal-space coefficients of a projection: one scalar (TPC), one per user
 * block (PUPC), or one per transmit antenna row (PAPC).
 */
struct ProjectionMultiplier {
  std::vector<double> values;
};

// Max relative constraint violation; 0 for exactly feasible points.
double feasibility_residual(const ManifoldPoint& pt, const SystemConfig& cfg);

// Rescale globally / per block / per row onto the constraint set.
ManifoldPoint normalize_to_manifold(const PrecoderStack& p, ConstraintKind kind,
                                    const SystemConfig& cfg);

ProjectionMultiplier projection_multiplier(const ManifoldPoint& pt, const TangentStack& xi,
                                           const SystemConfig& cfg);
// The normal component the multiplier describes: lambda P, P Lambda blockwise,
// or Lambda P rowwise.
TangentStack apply_multiplier(const ManifoldPoint& pt, const ProjectionMultiplier& m);

TangentStack project_tangent(const ManifoldPoint& pt, const TangentStack& xi,
                             const SystemConfig& cfg);
// Relative size of the normal component of xi at pt; 0 for tangent vectors.
double tangency_residual(const ManifoldPoint& pt, const TangentStack& xi,
                         const SystemConfig& cfg);

TangentStack riemannian_gradient(const ManifoldPoint& pt, const TangentStack& egrad,
                                 const SystemConfig& cfg);

// Feasibility rescalings of P + xi; exactly the cache_advance factors.
CacheScalings retraction_scalings(const ManifoldPoint& pt, const TangentStack& xi,
                                  const SystemConfig& cfg);
ManifoldPoint retract(const ManifoldPoint& pt, const TangentStack& xi,
                      const SystemConfig& cfg);
// Projection of xi onto the tangent space at retract(pt, eta).
TangentStack transport(const ManifoldPoint& pt, const TangentStack& eta,
                       const TangentStack& xi, const SystemConfig& cfg);

/**
 * Point-fixed factors for repeated Hessian applications at one point (one
 * factorization per user, shared across trust-region inner iterations).
 */
struct HessianOperator {
  ManifoldPoint pt;
  DgradWorkspace ws;
  TangentStack egrad;
  ProjectionMultiplier mult;
};

HessianOperator make_hessian_operator(const SystemConfig& cfg, const ChannelSet& ch,
                                      const ManifoldPoint& pt);
TangentStack hessian_apply(const SystemConfig& cfg, const ChannelSet& ch,
                           const HessianOperator& op, const TangentStack& xi);
// Projected directional derivative of the Riemannian gradient field along xi.
TangentStack riemannian_hessian(const ManifoldPoint& pt, const TangentStack& xi,
                                const SystemConfig& cfg, const ChannelSet& ch);

}  // namespace precopt
