#pragma once

#include "precopt/manifolds.hpp"
#include "precopt/objective.hpp"
#include "precopt/types.hpp"

namespace precopt {

/** Outcome of a finite-difference comparison against an analytic quantity. */
struct OracleReport {
  double max_rel_error = 0.0;
  int worst_coordinate = -1;  // flat real-coordinate index (re, im interleaved)
  double fd_step = 0.0;
};

/**
 * Regularized zero-forcing baseline: P = H^H (H H^H + (U M̄ σ²/P) I)^{-1}
 * columnwise per user (first d_i columns of user i's slice), normalized to
 * the total power budget. Also usable as a solver initialization.
 */
ManifoldPoint rzf_precoder(const SystemConfig& cfg, const ChannelSet& ch);

// Central differences of the objective per real coordinate (ambient gradient).
TangentStack fd_euclidean_gradient(const SystemConfig& cfg, const ChannelSet& ch,
                                   const PrecoderStack& p, double step);

// The ambient finite-difference gradient projected onto the tangent space.
TangentStack fd_riemannian_gradient(const SystemConfig& cfg, const ChannelSet& ch,
                                    const ManifoldPoint& pt, double step);

// Compares the analytic Riemannian gradient against the FD oracle coordinatewise.
OracleReport gradient_check(const SystemConfig& cfg, const ChannelSet& ch,
                            const ManifoldPoint& pt, double step);

struct BruteForceResult {
  ManifoldPoint point;
  double objective = 0.0;
};

/**
 * Exhaustive WSR search over the feasible set, one hyperspherical angle grid
 * per power group (whole stack / user block / antenna row). Zero-weight users
 * are pinned to zero where the constraint allows it (TPC, PAPC). Refuses
 * problems with more than 6 enumerated real dimensions.
 */
BruteForceResult brute_force_small_wsr(const SystemConfig& cfg, const ChannelSet& ch,
                                       ConstraintKind kind, int grid);

}  // namespace precopt
