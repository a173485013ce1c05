#include "precopt/objective.hpp"

#include <cmath>
#include <string>

#include "precopt/flops.hpp"

namespace precopt {

namespace {

void check_user(const SystemConfig& cfg, int user) {
  if (user < 0 || user >= cfg.num_users) {
    throw DimensionError("user index out of range: " + std::to_string(user));
  }
}

CMatrix hermitian_part(const CMatrix& m) { return CMatrix(0.5 * (m + m.adjoint())); }

std::vector<CMatrix> v_row(const SystemConfig& cfg, const ChannelSet& ch,
                           const PrecoderStack& p, int i) {
  std::vector<CMatrix> row;
  row.reserve(cfg.num_users);
  for (int l = 0; l < cfg.num_users; ++l) {
    row.push_back(opcount::mul(ch.channels[i], p.blocks[l]));
  }
  return row;
}

CMatrix covariance_from_v_row(const SystemConfig& cfg, const std::vector<CMatrix>& vrow,
                              int i) {
  const int mi = cfg.user_antennas[i];
  CMatrix r = cfg.noise_variance * CMatrix::Identity(mi, mi);
  for (int l = 0; l < cfg.num_users; ++l) {
    if (l == i) continue;
    r.noalias() += opcount::mul_a_bh(vrow[l], vrow[l]);
  }
  return hermitian_part(r);
}

struct UserWork {
  Eigen::LLT<CMatrix> lltR;
  CMatrix R, A, C, AC, B;
  double rate = 0.0;
};

UserWork user_work_from_v(const SystemConfig& cfg, const std::vector<CMatrix>& vrow, int i,
                          bool full) {
  UserWork w;
  w.R = covariance_from_v_row(cfg, vrow, i);
  w.lltR = opcount::llt_factor(w.R, "interference covariance");
  w.A = opcount::llt_solve(w.lltR, vrow[i]);
  const int d = static_cast<int>(vrow[i].cols());
  const CMatrix cinv =
      hermitian_part(CMatrix::Identity(d, d) + opcount::mul_ah_b(vrow[i], w.A));
  const Eigen::LLT<CMatrix> lltC = opcount::llt_factor(cinv, "rate core");
  w.rate = opcount::llt_logdet(lltC);
  if (full) {
    w.C = hermitian_part(opcount::llt_solve(lltC, CMatrix::Identity(d, d)));
    w.AC = opcount::mul(w.A, w.C);
    w.B = hermitian_part(opcount::mul_a_bh(w.AC, w.A));
  }
  return w;
}

void check_cache_shapes(const SystemConfig& cfg, const ChannelSet& ch,
                        const EffectiveChannelCache& cache) {
  const auto u = static_cast<size_t>(cfg.num_users);
  if (ch.channels.size() != u) throw InvalidCacheError("cache channel count drift");
  if (cache.point.blocks.size() != u || cache.V.size() != u) {
    throw InvalidCacheError("cache table size drift");
  }
  for (int i = 0; i < cfg.num_users; ++i) {
    if (cache.point.blocks[i].rows() != cfg.num_bs_antennas ||
        cache.point.blocks[i].cols() != cfg.user_streams[i]) {
      throw InvalidCacheError("cache point shape drift");
    }
    if (cache.V[i].size() != u) throw InvalidCacheError("cache table size drift");
    for (int l = 0; l < cfg.num_users; ++l) {
      if (cache.V[i][l].rows() != cfg.user_antennas[i] ||
          cache.V[i][l].cols() != cfg.user_streams[l]) {
        throw InvalidCacheError("cache entry shape drift");
      }
    }
  }
  if (cache.has_direction()) {
    if (cache.direction.blocks.size() != u || cache.Uc.size() != u) {
      throw InvalidCacheError("cache direction size drift");
    }
    for (int i = 0; i < cfg.num_users; ++i) {
      if (cache.direction.blocks[i].rows() != cfg.num_bs_antennas ||
          cache.direction.blocks[i].cols() != cfg.user_streams[i] ||
          cache.Uc[i].size() != u) {
        throw InvalidCacheError("cache direction shape drift");
      }
    }
  }
}

// Shared assembly for the gradient: -2 w_i H_i^H (A_i C_i)
// + 2 sum_{l != i} w_l H_l^H (B_l V_{l,i}).
TangentStack gradient_from_v(const SystemConfig& cfg, const ChannelSet& ch,
                             const std::vector<std::vector<CMatrix>>& v) {
  const int users = cfg.num_users;
  std::vector<UserWork> works(users);
  for (int i = 0; i < users; ++i) {
    if (cfg.user_weights[i] != 0.0) works[i] = user_work_from_v(cfg, v[i], i, true);
  }
  TangentStack out;
  out.blocks.reserve(users);
  for (int i = 0; i < users; ++i) {
    CMatrix acc = CMatrix::Zero(cfg.num_bs_antennas, cfg.user_streams[i]);
    if (cfg.user_weights[i] != 0.0) {
      acc.noalias() -= 2.0 * cfg.user_weights[i] * opcount::mul_ah_b(ch.channels[i], works[i].AC);
    }
    for (int l = 0; l < users; ++l) {
      if (l == i || cfg.user_weights[l] == 0.0) continue;
      const CMatrix inner = opcount::mul(works[l].B, v[l][i]);
      acc.noalias() += 2.0 * cfg.user_weights[l] * opcount::mul_ah_b(ch.channels[l], inner);
    }
    out.blocks.push_back(std::move(acc));
  }
  return out;
}

}  // namespace

CMatrix interference_covariance(const SystemConfig& cfg, const ChannelSet& ch,
                                const PrecoderStack& p, int user) {
  ch.validate(cfg);
  p.validate(cfg);
  check_user(cfg, user);
  const int mi = cfg.user_antennas[user];
  CMatrix r = cfg.noise_variance * CMatrix::Identity(mi, mi);
  for (int l = 0; l < cfg.num_users; ++l) {
    if (l == user) continue;
    const CMatrix vl = opcount::mul(ch.channels[user], p.blocks[l]);
    r.noalias() += opcount::mul_a_bh(vl, vl);
  }
  return hermitian_part(r);
}

double user_rate(const SystemConfig& cfg, const ChannelSet& ch, const PrecoderStack& p,
                 int user) {
  ch.validate(cfg);
  p.validate(cfg);
  check_user(cfg, user);
  return user_work_from_v(cfg, v_row(cfg, ch, p, user), user, false).rate;
}

double wsr_objective(const SystemConfig& cfg, const ChannelSet& ch, const PrecoderStack& p) {
  ch.validate(cfg);
  p.validate(cfg);
  double acc = 0.0;
  for (int i = 0; i < cfg.num_users; ++i) {
    if (cfg.user_weights[i] == 0.0) continue;
    acc -= cfg.user_weights[i] * user_work_from_v(cfg, v_row(cfg, ch, p, i), i, false).rate;
  }
  return acc;
}

PerUserIntermediates per_user_intermediates(const SystemConfig& cfg, const ChannelSet& ch,
                                            const PrecoderStack& p, int user) {
  ch.validate(cfg);
  p.validate(cfg);
  check_user(cfg, user);
  const UserWork w = user_work_from_v(cfg, v_row(cfg, ch, p, user), user, true);
  return {w.R, w.A, w.B, w.C};
}

TangentStack euclidean_gradient(const SystemConfig& cfg, const ChannelSet& ch,
                                const PrecoderStack& p) {
  ch.validate(cfg);
  p.validate(cfg);
  std::vector<std::vector<CMatrix>> v;
  v.reserve(cfg.num_users);
  for (int i = 0; i < cfg.num_users; ++i) v.push_back(v_row(cfg, ch, p, i));
  return gradient_from_v(cfg, ch, v);
}

EffectiveChannelCache make_cache(const SystemConfig& cfg, const ChannelSet& ch,
                                 const PrecoderStack& p) {
  ch.validate(cfg);
  p.validate(cfg);
  EffectiveChannelCache cache;
  cache.point = p;
  cache.V.reserve(cfg.num_users);
  for (int i = 0; i < cfg.num_users; ++i) cache.V.push_back(v_row(cfg, ch, p, i));
  return cache;
}

void cache_set_direction(EffectiveChannelCache& cache, const ChannelSet& ch,
                         const TangentStack& eta) {
  if (eta.blocks.size() != cache.point.blocks.size()) {
    throw DimensionError("direction block count mismatch");
  }
  for (size_t i = 0; i < eta.blocks.size(); ++i) {
    if (eta.blocks[i].rows() != cache.point.blocks[i].rows() ||
        eta.blocks[i].cols() != cache.point.blocks[i].cols()) {
      throw DimensionError("direction block shape mismatch");
    }
  }
  cache.direction = eta;
  cache.Uc.clear();
  cache.Uc.reserve(ch.channels.size());
  for (const CMatrix& h : ch.channels) {
    std::vector<CMatrix> row;
    row.reserve(eta.blocks.size());
    for (const CMatrix& e : eta.blocks) row.push_back(opcount::mul(h, e));
    cache.Uc.push_back(std::move(row));
  }
}

double objective_from_cache(const SystemConfig& cfg, const EffectiveChannelCache& cache) {
  double acc = 0.0;
  for (int i = 0; i < cfg.num_users; ++i) {
    if (cfg.user_weights[i] == 0.0) continue;
    const CMatrix r = covariance_from_v_row(cfg, cache.V[i], i);
    const double logdet_r = opcount::llt_logdet(opcount::llt_factor(r, "interference covariance"));
    const CMatrix s =
        hermitian_part(r + opcount::mul_a_bh(cache.V[i][i], cache.V[i][i]));
    const double logdet_s = opcount::llt_logdet(opcount::llt_factor(s, "signal covariance"));
    acc -= cfg.user_weights[i] * (logdet_s - logdet_r);
  }
  return acc;
}

EffectiveChannelCache cache_advance(const SystemConfig& cfg, const ChannelSet& ch,
                                    const EffectiveChannelCache& cache, ConstraintKind kind,
                                    double step, const CacheScalings& scalings) {
  check_cache_shapes(cfg, ch, cache);
  const int users = cfg.num_users;
  const bool with_dir = cache.has_direction();
  EffectiveChannelCache out;
  out.point.blocks.reserve(users);
  out.V.assign(users, {});

  const PrecoderStack stepped =
      with_dir ? add_scaled(cache.point, step, cache.direction) : cache.point;

  switch (kind) {
    case ConstraintKind::TPC: {
      if (scalings.factors.size() != 1) throw DimensionError("TPC expects one scaling factor");
      const double g = scalings.factors[0];
      for (int l = 0; l < users; ++l) {
        opcount::add_multiplies(static_cast<std::uint64_t>(stepped.blocks[l].size()));
        out.point.blocks.push_back(g * stepped.blocks[l]);
      }
      for (int i = 0; i < users; ++i) {
        out.V[i].reserve(users);
        for (int l = 0; l < users; ++l) {
          opcount::add_multiplies(2 * static_cast<std::uint64_t>(cache.V[i][l].size()));
          out.V[i].push_back(with_dir ? CMatrix(g * (cache.V[i][l] + step * cache.Uc[i][l]))
                                      : CMatrix(g * cache.V[i][l]));
        }
      }
      break;
    }
    case ConstraintKind::PUPC: {
      if (scalings.factors.size() != static_cast<size_t>(users)) {
        throw DimensionError("PUPC expects one scaling factor per user");
      }
      for (int l = 0; l < users; ++l) {
        opcount::add_multiplies(static_cast<std::uint64_t>(stepped.blocks[l].size()));
        out.point.blocks.push_back(scalings.factors[l] * stepped.blocks[l]);
      }
      for (int i = 0; i < users; ++i) {
        out.V[i].reserve(users);
        for (int l = 0; l < users; ++l) {
          opcount::add_multiplies(2 * static_cast<std::uint64_t>(cache.V[i][l].size()));
          out.V[i].push_back(
              with_dir
                  ? CMatrix(scalings.factors[l] * (cache.V[i][l] + step * cache.Uc[i][l]))
                  : CMatrix(scalings.factors[l] * cache.V[i][l]));
        }
      }
      break;
    }
    case ConstraintKind::PAPC: {
      if (scalings.factors.size() != static_cast<size_t>(cfg.num_bs_antennas)) {
        throw DimensionError("PAPC expects one scaling factor per antenna");
      }
      for (int l = 0; l < users; ++l) {
        CMatrix b = stepped.blocks[l];
        opcount::add_multiplies(static_cast<std::uint64_t>(b.size()));
        for (int r = 0; r < cfg.num_bs_antennas; ++r) b.row(r) *= scalings.factors[r];
        out.point.blocks.push_back(std::move(b));
      }
      for (int i = 0; i < users; ++i) {
        out.V[i].reserve(users);
        for (int l = 0; l < users; ++l) {
          out.V[i].push_back(opcount::mul(ch.channels[i], out.point.blocks[l]));
        }
      }
      break;
    }
  }
  return out;
}

TangentStack euclidean_gradient_from_cache(const SystemConfig& cfg, const ChannelSet& ch,
                                           const EffectiveChannelCache& cache) {
  check_cache_shapes(cfg, ch, cache);
  return gradient_from_v(cfg, ch, cache.V);
}

DgradWorkspace make_dgrad_workspace(const SystemConfig& cfg, const ChannelSet& ch,
                                    const PrecoderStack& p) {
  ch.validate(cfg);
  p.validate(cfg);
  const int users = cfg.num_users;
  DgradWorkspace ws;
  ws.V.reserve(users);
  for (int i = 0; i < users; ++i) ws.V.push_back(v_row(cfg, ch, p, i));
  ws.lltR.resize(users);
  ws.A.resize(users);
  ws.B.resize(users);
  ws.C.resize(users);
  for (int l = 0; l < users; ++l) {
    if (cfg.user_weights[l] == 0.0) continue;
    UserWork w = user_work_from_v(cfg, ws.V[l], l, true);
    ws.lltR[l] = std::move(w.lltR);
    ws.A[l] = std::move(w.A);
    ws.B[l] = std::move(w.B);
    ws.C[l] = std::move(w.C);
  }
  return ws;
}

TangentStack euclidean_gradient_from_workspace(const SystemConfig& cfg, const ChannelSet& ch,
                                               const DgradWorkspace& ws) {
  const int users = cfg.num_users;
  std::vector<CMatrix> ac(users);
  for (int l = 0; l < users; ++l) {
    if (cfg.user_weights[l] != 0.0) ac[l] = opcount::mul(ws.A[l], ws.C[l]);
  }
  TangentStack out;
  out.blocks.reserve(users);
  for (int i = 0; i < users; ++i) {
    CMatrix acc = CMatrix::Zero(cfg.num_bs_antennas, cfg.user_streams[i]);
    if (cfg.user_weights[i] != 0.0) {
      acc.noalias() -= 2.0 * cfg.user_weights[i] * opcount::mul_ah_b(ch.channels[i], ac[i]);
    }
    for (int l = 0; l < users; ++l) {
      if (l == i || cfg.user_weights[l] == 0.0) continue;
      const CMatrix inner = opcount::mul(ws.B[l], ws.V[l][i]);
      acc.noalias() += 2.0 * cfg.user_weights[l] * opcount::mul_ah_b(ch.channels[l], inner);
    }
    out.blocks.push_back(std::move(acc));
  }
  return out;
}

TangentStack dgrad_apply(const SystemConfig& cfg, const ChannelSet& ch,
                         const DgradWorkspace& ws, const TangentStack& xi) {
  const int users = cfg.num_users;
  if (xi.blocks.size() != static_cast<size_t>(users)) {
    throw DimensionError("direction block count mismatch");
  }
  for (int i = 0; i < users; ++i) {
    if (xi.blocks[i].rows() != cfg.num_bs_antennas ||
        xi.blocks[i].cols() != cfg.user_streams[i]) {
      throw DimensionError("direction block shape mismatch");
    }
  }

  // W[l][m] = H_l xi_m, needed for every weighted user l.
  std::vector<std::vector<CMatrix>> w_table(users);
  for (int l = 0; l < users; ++l) {
    if (cfg.user_weights[l] == 0.0) continue;
    w_table[l].reserve(users);
    for (int m = 0; m < users; ++m) {
      w_table[l].push_back(opcount::mul(ch.channels[l], xi.blocks[m]));
    }
  }

  // Chain rule through R_l, A_l, G_l, C_l, B_l along the stacked direction.
  std::vector<CMatrix> d_ac(users), d_b(users);
  for (int l = 0; l < users; ++l) {
    if (cfg.user_weights[l] == 0.0) continue;
    const int ml = cfg.user_antennas[l];
    CMatrix d_r = CMatrix::Zero(ml, ml);
    for (int m = 0; m < users; ++m) {
      if (m == l) continue;
      const CMatrix t = opcount::mul_a_bh(w_table[l][m], ws.V[l][m]);
      d_r.noalias() += t;
      d_r.noalias() += t.adjoint();
    }
    const CMatrix d_a =
        opcount::llt_solve(ws.lltR[l], CMatrix(w_table[l][l] - opcount::mul(d_r, ws.A[l])));
    const CMatrix d_g = hermitian_part(opcount::mul_ah_b(w_table[l][l], ws.A[l]) +
                                       opcount::mul_ah_b(ws.V[l][l], d_a));
    const CMatrix d_c =
        hermitian_part(-opcount::mul(opcount::mul(ws.C[l], d_g), ws.C[l]));
    const CMatrix t1 = opcount::mul(d_a, ws.C[l]);
    const CMatrix t2 = opcount::mul(ws.A[l], d_c);
    d_ac[l] = t1 + t2;
    const CMatrix s1 = opcount::mul_a_bh(t1, ws.A[l]);
    const CMatrix s2 = opcount::mul_a_bh(t2, ws.A[l]);
    d_b[l] = s1 + s2 + s1.adjoint();
  }

  TangentStack out;
  out.blocks.reserve(users);
  for (int i = 0; i < users; ++i) {
    CMatrix acc = CMatrix::Zero(cfg.num_bs_antennas, cfg.user_streams[i]);
    if (cfg.user_weights[i] != 0.0) {
      acc.noalias() -= 2.0 * cfg.user_weights[i] * opcount::mul_ah_b(ch.channels[i], d_ac[i]);
    }
    for (int l = 0; l < users; ++l) {
      if (l == i || cfg.user_weights[l] == 0.0) continue;
      const CMatrix inner =
          opcount::mul(d_b[l], ws.V[l][i]) + opcount::mul(ws.B[l], w_table[l][i]);
      acc.noalias() += 2.0 * cfg.user_weights[l] * opcount::mul_ah_b(ch.channels[l], inner);
    }
    out.blocks.push_back(std::move(acc));
  }
  return out;
}

TangentStack dgrad_directional(const SystemConfig& cfg, const ChannelSet& ch,
                               const PrecoderStack& p, const TangentStack& xi) {
  return dgrad_apply(cfg, ch, make_dgrad_workspace(cfg, ch, p), xi);
}

HessianWorkspace hessian_cross_terms(const SystemConfig& cfg, const ChannelSet& ch,
                                     const PrecoderStack& p, const CMatrix& xi_block, int l,
                                     int i) {
  ch.validate(cfg);
  p.validate(cfg);
  check_user(cfg, l);
  check_user(cfg, i);
  if (xi_block.rows() != cfg.num_bs_antennas || xi_block.cols() != cfg.user_streams[i]) {
    throw DimensionError("direction block shape mismatch");
  }
  const UserWork w = user_work_from_v(cfg, v_row(cfg, ch, p, l), l, true);
  const CMatrix t = opcount::mul(ch.channels[l], xi_block);
  const CMatrix v = opcount::mul(ch.channels[l], p.blocks[i]);
  const CMatrix x = opcount::mul_a_bh(t, v);
  HessianWorkspace hw;
  hw.M = x + x.adjoint();
  hw.F = -opcount::llt_solve(w.lltR, CMatrix(opcount::mul(hw.M, w.B)));
  hw.E = opcount::mul(opcount::mul(w.B, hw.M), w.B);
  return hw;
}

}  // namespace precopt
