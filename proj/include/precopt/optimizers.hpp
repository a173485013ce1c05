#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "precopt/manifolds.hpp"
#include "precopt/objective.hpp"
#include "precopt/types.hpp"

namespace precopt {

enum class SolverKind { RSD, RCG, RTR };
std::string to_string(SolverKind k);
SolverKind solver_from_string(const std::string& s);

struct LineSearchParams {
  double alpha0 = 1e-3;  // initial trial step, reset every outer iteration
  double r = 0.5;        // contraction factor in (0,1)
  double c = 1e-4;       // sufficient-decrease constant in (0,1)
  int max_backtracks = 60;
};

struct TrustRegionParams {
  double delta0 = -1.0;     // < 0: defaults to 0.1 * sqrt(total power)
  double delta_max = -1.0;  // < 0: defaults to sqrt(total power)
  double rho_threshold = 0.05;
  int n_sub = 6;
};

struct StopCriteria {
  int max_outer = 500;
  // < 0 selects the default 1e-6 * sqrt(U); 0 disables the test.
  double grad_norm_tol = -1.0;
  // Relative objective change, must hold 3 consecutive iterations; 0 disables.
  double rel_obj_tol = 1e-10;
};

enum class StopReason {
  GradientTolerance,
  ObjectiveStall,
  MaxIterations,
  StalledLineSearch,
  RadiusCollapse,
};
std::string to_string(StopReason r);

struct IterationRecord {
  int k = 0;
  double objective = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;  // accepted alpha (line search) or radius delta (trust region)
  double rho = std::numeric_limits<double>::quiet_NaN();
  double feasibility = 0.0;
  int n_in = 0;  // backtracks (line search) or inner tCG iterations
  std::uint64_t multiplies = 0;  // cumulative complex multiplies since solve start
  bool direction_reset = false;
};

struct IterationTrace {
  std::vector<IterationRecord> records;
  bool counting_enabled = false;
};

struct SolveResult {
  ManifoldPoint point;
  IterationTrace trace;
  StopReason reason = StopReason::MaxIterations;
  double objective = 0.0;
  double grad_norm = 0.0;
};

/** Snapshot a line search needs: point, its cache, objective, gradient. */
struct SolverState {
  ManifoldPoint point;
  EffectiveChannelCache cache;
  double objective = 0.0;
  TangentStack rgrad;
};

struct ArmijoResult {
  double step = 0.0;
  ManifoldPoint point;
  EffectiveChannelCache cache;  // advanced to the accepted point
  double objective = 0.0;
  int n_in = 0;
};

/**
 * Backtracking search along `direction` from `state`. Trial objectives are
 * evaluated through the effective-channel cache; the feasibility rescalings
 * come from the quadratic power polynomial in alpha, so no channel product is
 * rebuilt per trial under TPC/PUPC.
 */
ArmijoResult armijo_search(const SystemConfig& cfg, const ChannelSet& ch,
                           const SolverState& state, const TangentStack& direction,
                           const LineSearchParams& params);

double fletcher_reeves_beta(const TangentStack& grad_now, const TangentStack& grad_prev);

SolveResult rsd_solve(const SystemConfig& cfg, const ChannelSet& ch, ConstraintKind kind,
                      const PrecoderStack& p0, const LineSearchParams& ls,
                      const StopCriteria& stop);
// force_beta_zero disables direction mixing, reducing RCG to RSD exactly.
SolveResult rcg_solve(const SystemConfig& cfg, const ChannelSet& ch, ConstraintKind kind,
                      const PrecoderStack& p0, const LineSearchParams& ls,
                      const StopCriteria& stop, bool force_beta_zero = false);

struct TcgResult {
  TangentStack direction;
  bool boundary_hit = false;
  double model_decrease = 0.0;  // m(0) - m(direction), nonnegative
  int iterations = 0;
  std::vector<double> decrease_history;  // cumulative model decrease per inner step
};

using HessianApplyFn = std::function<TangentStack(const TangentStack&)>;

/**
 * Truncated CG on the order-2 model m(eta) = g(grad,eta) + g(eta,H eta)/2,
 * with boundary and negative-curvature exits onto the radius sphere.
 */
TcgResult tcg_subproblem(const TangentStack& grad, const HessianApplyFn& hess,
                         double delta, int n_sub);

/**
 * Trust-region driver over an abstract problem. The precoder solver and the
 * exact-quadratic surrogate used in tests both run through this interface.
 */
struct TrustRegionProblem {
  std::function<double(const PrecoderStack&)> value;
  std::function<TangentStack(const PrecoderStack&)> gradient;
  std::function<HessianApplyFn(const PrecoderStack&)> hessian_at;
  std::function<PrecoderStack(const PrecoderStack&, const TangentStack&)> retract_point;
  std::function<double(const PrecoderStack&)> feasibility;
  double scale = 1.0;  // radius defaults and underflow guard scale with this
  ConstraintKind kind = ConstraintKind::TPC;
};

SolveResult rtr_core(const TrustRegionProblem& prob, const PrecoderStack& p0,
                     const TrustRegionParams& tr, const StopCriteria& stop);

SolveResult rtr_solve(const SystemConfig& cfg, const ChannelSet& ch, ConstraintKind kind,
                      const PrecoderStack& p0, const TrustRegionParams& tr,
                      const StopCriteria& stop);

struct ComplexitySummary {
  std::uint64_t total_multiplies = 0;
  double per_iteration = 0.0;
  double mean_inner = 0.0;  // mean backtracks (line search) or tCG iterations
  double model_per_iteration = 0.0;
  double ratio = 0.0;  // per_iteration / model_per_iteration
};

// Compares measured per-iteration multiply counts against the leading-order
// cost model for the given solver/constraint pair.
ComplexitySummary flop_counter_report(const IterationTrace& trace, const SystemConfig& cfg,
                                      ConstraintKind kind, SolverKind solver, int n_sub);

}  // namespace precopt
