#include "precopt/baselines.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "precopt/flops.hpp"

namespace precopt {

ManifoldPoint rzf_precoder(const SystemConfig& cfg, const ChannelSet& ch) {
  cfg.validate();
  ch.validate(cfg);
  const int nr = cfg.total_rx_antennas();

  CMatrix h(nr, cfg.num_bs_antennas);
  int row = 0;
  for (int i = 0; i < cfg.num_users; ++i) {
    h.middleRows(row, cfg.user_antennas[i]) = ch.channels[i];
    row += cfg.user_antennas[i];
  }

  const double mean_rx = static_cast<double>(nr) / cfg.num_users;
  const double loading = cfg.num_users * mean_rx * cfg.noise_variance / cfg.total_power;
  CMatrix gram = opcount::mul_a_bh(h, h);
  gram += loading * CMatrix::Identity(nr, nr);
  const auto llt = opcount::llt_factor(gram, "regularized Gram matrix");
  const CMatrix solved = opcount::llt_solve(llt, h);  // (HH^H + cI)^{-1} H

  PrecoderStack p;
  p.blocks.reserve(cfg.num_users);
  row = 0;
  for (int i = 0; i < cfg.num_users; ++i) {
    // User i's slice of H^H (...)^{-1}, truncated to its stream count.
    p.blocks.push_back(solved.middleRows(row, cfg.user_streams[i]).adjoint());
    row += cfg.user_antennas[i];
  }
  return normalize_to_manifold(p, ConstraintKind::TPC, cfg);
}

TangentStack fd_euclidean_gradient(const SystemConfig& cfg, const ChannelSet& ch,
                                   const PrecoderStack& p, double step) {
  if (!(step > 0)) throw PreconditionError("finite-difference step must be positive");
  TangentStack grad = zeros_like(p);
  PrecoderStack work = p;
  for (size_t b = 0; b < p.blocks.size(); ++b) {
    for (int c = 0; c < p.blocks[b].cols(); ++c) {
      for (int r = 0; r < p.blocks[b].rows(); ++r) {
        const complex_t base = p.blocks[b](r, c);
        work.blocks[b](r, c) = base + step;
        const double f_re_plus = wsr_objective(cfg, ch, work);
        work.blocks[b](r, c) = base - step;
        const double f_re_minus = wsr_objective(cfg, ch, work);
        work.blocks[b](r, c) = base + complex_t(0.0, step);
        const double f_im_plus = wsr_objective(cfg, ch, work);
        work.blocks[b](r, c) = base - complex_t(0.0, step);
        const double f_im_minus = wsr_objective(cfg, ch, work);
        work.blocks[b](r, c) = base;
        grad.blocks[b](r, c) = complex_t((f_re_plus - f_re_minus) / (2.0 * step),
                                         (f_im_plus - f_im_minus) / (2.0 * step));
      }
    }
  }
  return grad;
}

TangentStack fd_riemannian_gradient(const SystemConfig& cfg, const ChannelSet& ch,
                                    const ManifoldPoint& pt, double step) {
  return project_tangent(pt, fd_euclidean_gradient(cfg, ch, pt.p, step), cfg);
}

OracleReport gradient_check(const SystemConfig& cfg, const ChannelSet& ch,
                            const ManifoldPoint& pt, double step) {
  const TangentStack analytic =
      riemannian_gradient(pt, euclidean_gradient(cfg, ch, pt.p), cfg);
  const TangentStack fd = fd_riemannian_gradient(cfg, ch, pt, step);

  OracleReport report;
  report.fd_step = step;
  int flat = 0;
  for (size_t b = 0; b < analytic.blocks.size(); ++b) {
    for (int c = 0; c < analytic.blocks[b].cols(); ++c) {
      for (int r = 0; r < analytic.blocks[b].rows(); ++r) {
        const complex_t a = analytic.blocks[b](r, c);
        const complex_t f = fd.blocks[b](r, c);
        const double parts[2] = {std::abs(a.real() - f.real()) / (1.0 + std::abs(a.real())),
                                 std::abs(a.imag() - f.imag()) / (1.0 + std::abs(a.imag()))};
        for (double err : parts) {
          if (err > report.max_rel_error) {
            report.max_rel_error = err;
            report.worst_coordinate = flat;
          }
          ++flat;
        }
      }
    }
  }
  return report;
}

namespace {

struct Slot {
  int block;
  int row;
  int col;
};

// One power sphere to enumerate: a radius and the complex slots sharing it.
struct SphereGroup {
  double radius = 0.0;
  std::vector<Slot> slots;
  int angle_count() const { return 2 * static_cast<int>(slots.size()) - 1; }
};

// x on the radius-rho sphere in R^m from m-1 angles (last angle spans 2*pi).
void sphere_point(double rho, const std::vector<double>& angles, std::vector<double>& out) {
  const size_t m = angles.size() + 1;
  out.resize(m);
  double running = rho;
  for (size_t i = 0; i + 1 < m; ++i) {
    out[i] = running * std::cos(angles[i]);
    running *= std::sin(angles[i]);
  }
  out[m - 1] = running;
}

}  // namespace

BruteForceResult brute_force_small_wsr(const SystemConfig& cfg, const ChannelSet& ch,
                                       ConstraintKind kind, int grid) {
  cfg.validate();
  ch.validate(cfg);
  if (grid < 1) throw PreconditionError("grid resolution must be at least 1");

  const bool can_pin = kind != ConstraintKind::PUPC;
  auto active = [&](int i) { return !can_pin || cfg.user_weights[i] > 0; };

  std::vector<SphereGroup> groups;
  switch (kind) {
    case ConstraintKind::TPC: {
      SphereGroup g;
      g.radius = std::sqrt(cfg.total_power);
      for (int i = 0; i < cfg.num_users; ++i) {
        if (!active(i)) continue;
        for (int c = 0; c < cfg.user_streams[i]; ++c) {
          for (int r = 0; r < cfg.num_bs_antennas; ++r) g.slots.push_back({i, r, c});
        }
      }
      if (g.slots.empty()) throw DegenerateInputError("no enumerable coordinates");
      groups.push_back(std::move(g));
      break;
    }
    case ConstraintKind::PUPC: {
      for (int i = 0; i < cfg.num_users; ++i) {
        SphereGroup g;
        g.radius = std::sqrt(cfg.per_user_power[i]);
        for (int c = 0; c < cfg.user_streams[i]; ++c) {
          for (int r = 0; r < cfg.num_bs_antennas; ++r) g.slots.push_back({i, r, c});
        }
        groups.push_back(std::move(g));
      }
      break;
    }
    case ConstraintKind::PAPC: {
      for (int r = 0; r < cfg.num_bs_antennas; ++r) {
        SphereGroup g;
        g.radius = std::sqrt(cfg.per_antenna_power[r]);
        for (int i = 0; i < cfg.num_users; ++i) {
          if (!active(i)) continue;
          for (int c = 0; c < cfg.user_streams[i]; ++c) g.slots.push_back({i, r, c});
        }
        if (g.slots.empty()) throw DegenerateInputError("no enumerable coordinates");
        groups.push_back(std::move(g));
      }
      break;
    }
  }

  int real_dims = 0;
  for (const SphereGroup& g : groups) real_dims += 2 * static_cast<int>(g.slots.size());
  if (real_dims > 6) {
    throw PreconditionError("brute force supports at most 6 real dimensions, got " +
                            std::to_string(real_dims));
  }

  int total_angles = 0;
  for (const SphereGroup& g : groups) total_angles += g.angle_count();

  BruteForceResult best;
  best.objective = std::numeric_limits<double>::infinity();
  best.point.kind = kind;

  std::vector<int> odometer(total_angles, 0);
  PrecoderStack candidate = zero_stack(cfg);
  std::vector<double> angles;
  std::vector<double> coords;
  while (true) {
    for (auto& blockref : candidate.blocks) blockref.setZero();
    int cursor = 0;
    for (const SphereGroup& g : groups) {
      const int a = g.angle_count();
      angles.resize(a);
      for (int j = 0; j < a; ++j) {
        const double range = (j + 1 < a) ? std::numbers::pi : 2.0 * std::numbers::pi;
        angles[j] = (odometer[cursor + j] + 0.5) / grid * range;
      }
      cursor += a;
      sphere_point(g.radius, angles, coords);
      for (size_t s = 0; s < g.slots.size(); ++s) {
        const Slot& slot = g.slots[s];
        candidate.blocks[slot.block](slot.row, slot.col) =
            complex_t(coords[2 * s], coords[2 * s + 1]);
      }
    }

    const double f = wsr_objective(cfg, ch, candidate);
    if (f < best.objective) {
      best.objective = f;
      best.point.p = candidate;
    }

    int pos = total_angles - 1;
    while (pos >= 0 && ++odometer[pos] == grid) odometer[pos--] = 0;
    if (pos < 0) break;
  }
  return best;
}

}  // namespace precopt
