#pragma once

#include <vector>

#include <Eigen/Cholesky>

#include "precopt/types.hpp"

namespace precopt {

/**
 * Per-user matrices entering the gradient and Hessian:
 *   R = sigma_z^2 I + sum_{l != i} H_i P_l P_l^H H_i^H   (interference + noise)
 *   A = R^{-1} H_i P_i
 *   C = (I + P_i^H H_i^H A)^{-1}
 *   B = A C A^H
 */
struct PerUserIntermediates {
  CMatrix R;  // M_i x M_i Hermitian PD
  CMatrix A;  // M_i x d_i
  CMatrix B;  // M_i x M_i Hermitian PSD
  CMatrix C;  // d_i x d_i Hermitian PD
};

CMatrix interference_covariance(const SystemConfig& cfg, const ChannelSet& ch,
                                const PrecoderStack& p, int user);
// logdet(I + P_i^H H_i^H R_i^{-1} H_i P_i) in nats.
double user_rate(const SystemConfig& cfg, const ChannelSet& ch, const PrecoderStack& p,
                 int user);
// f(P) = -sum_i w_i user_rate(i); lower is better.
double wsr_objective(const SystemConfig& cfg, const ChannelSet& ch, const PrecoderStack& p);
PerUserIntermediates per_user_intermediates(const SystemConfig& cfg, const ChannelSet& ch,
                                            const PrecoderStack& p, int user);
// grad f(P_i) = -2 w_i H_i^H A_i C_i + 2 sum_{l != i} w_l H_l^H B_l H_l P_i.
TangentStack euclidean_gradient(const SystemConfig& cfg, const ChannelSet& ch,
                                const PrecoderStack& p);

/**
 * Stored effective channels V[i][l] = H_i P_l and, once a search direction is
 * set, Uc[i][l] = H_i eta_l. Line searches advance V by cheap scalings instead
 * of recomputing channel products.
 */
struct EffectiveChannelCache {
  PrecoderStack point;
  TangentStack direction;  // empty until cache_set_direction
  std::vector<std::vector<CMatrix>> V;
  std::vector<std::vector<CMatrix>> Uc;

  bool has_direction() const { return !Uc.empty(); }
};

EffectiveChannelCache make_cache(const SystemConfig& cfg, const ChannelSet& ch,
                                 const PrecoderStack& p);
void cache_set_direction(EffectiveChannelCache& cache, const ChannelSet& ch,
                         const TangentStack& eta);
double objective_from_cache(const SystemConfig& cfg, const EffectiveChannelCache& cache);

/**
 * Feasibility rescalings applied after a step: one global factor (TPC), one
 * factor per user block (PUPC), or one factor per transmit antenna row (PAPC).
 */
struct CacheScalings {
  std::vector<double> factors;
};

// New cache at gamma o (P + step * eta). TPC/PUPC advance V by the scaling
// recursion; PAPC rebuilds V from the new point (row scaling does not commute
// with the channel products).
EffectiveChannelCache cache_advance(const SystemConfig& cfg, const ChannelSet& ch,
                                    const EffectiveChannelCache& cache, ConstraintKind kind,
                                    double step, const CacheScalings& scalings);

// Euclidean gradient evaluated from an existing V table (no H_i P_l rebuilds).
TangentStack euclidean_gradient_from_cache(const SystemConfig& cfg, const ChannelSet& ch,
                                           const EffectiveChannelCache& cache);

/**
 * Point-dependent factors reused across directional-derivative applications
 * at a fixed P (one factorization per user, shared by every direction).
 */
struct DgradWorkspace {
  std::vector<std::vector<CMatrix>> V;
  std::vector<Eigen::LLT<CMatrix>> lltR;
  std::vector<CMatrix> A, B, C;
};

DgradWorkspace make_dgrad_workspace(const SystemConfig& cfg, const ChannelSet& ch,
                                    const PrecoderStack& p);
// Euclidean gradient from workspace factors (shares the per-user LLTs).
TangentStack euclidean_gradient_from_workspace(const SystemConfig& cfg, const ChannelSet& ch,
                                               const DgradWorkspace& ws);
TangentStack dgrad_apply(const SystemConfig& cfg, const ChannelSet& ch,
                         const DgradWorkspace& ws, const TangentStack& xi);
// Directional derivative of the Euclidean gradient field along the stacked
// direction xi; linear in xi.
TangentStack dgrad_directional(const SystemConfig& cfg, const ChannelSet& ch,
                               const PrecoderStack& p, const TangentStack& xi);

/**
 * Blockwise perturbation terms for one (l, i) pair with direction block xi_i:
 *   M = H_l (xi_i P_i^H + P_i xi_i^H) H_l^H     (Hermitian by construction)
 *   F = -R_l^{-1} M B_l
 *   E = B_l M B_l
 * For l != i the derivative of B_l along xi_i is F + F^H + E.
 */
struct HessianWorkspace {
  CMatrix M, F, E;
};

HessianWorkspace hessian_cross_terms(const SystemConfig& cfg, const ChannelSet& ch,
                                     const PrecoderStack& p, const CMatrix& xi_block,
                                     int l, int i);

}  // namespace precopt
