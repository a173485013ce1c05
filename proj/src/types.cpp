#include "precopt/types.hpp"

#include <cmath>
#include <numeric>

#include "precopt/flops.hpp"

namespace precopt {

std::string to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::TPC:
      return "tpc";
    case ConstraintKind::PUPC:
      return "pupc";
    case ConstraintKind::PAPC:
      return "papc";
  }
  throw std::logic_error("unreachable constraint kind");
}

ConstraintKind constraint_from_string(const std::string& name) {
  if (name == "tpc") return ConstraintKind::TPC;
  if (name == "pupc") return ConstraintKind::PUPC;
  if (name == "papc") return ConstraintKind::PAPC;
  throw ParseError("unknown constraint kind '" + name + "' (expected tpc|pupc|papc)");
}

int SystemConfig::total_rx_antennas() const {
  return std::accumulate(user_antennas.begin(), user_antennas.end(), 0);
}

int SystemConfig::total_streams() const {
  return std::accumulate(user_streams.begin(), user_streams.end(), 0);
}

void SystemConfig::validate() const {
  if (num_bs_antennas < 1) throw DimensionError("num_bs_antennas must be positive");
  if (num_users < 1) throw DimensionError("num_users must be positive");
  const auto u = static_cast<size_t>(num_users);
  if (user_antennas.size() != u || user_streams.size() != u ||
      per_user_power.size() != u || user_weights.size() != u) {
    throw DimensionError("per-user config vectors must have length num_users");
  }
  if (per_antenna_power.size() != static_cast<size_t>(num_bs_antennas)) {
    throw DimensionError("per_antenna_power must have length num_bs_antennas");
  }
  for (int i = 0; i < num_users; ++i) {
    if (user_streams[i] < 1) throw DimensionError("user_streams must be positive");
    if (user_streams[i] > user_antennas[i])
      throw DimensionError("user_streams must not exceed user_antennas");
    if (user_antennas[i] > num_bs_antennas)
      throw DimensionError("user_antennas must not exceed num_bs_antennas");
  }
  if (!(noise_variance > 0)) throw DegenerateInputError("noise_variance must be positive");
  if (!(total_power > 0)) throw DegenerateInputError("total_power must be positive");
  double power_sum = 0.0;
  for (double p : per_user_power) {
    if (!(p > 0)) throw DegenerateInputError("per_user_power entries must be positive");
    power_sum += p;
  }
  if (std::abs(power_sum - total_power) > 1e-12 * total_power) {
    throw DegenerateInputError("per_user_power must sum to total_power");
  }
  const double equal_share = total_power / num_bs_antennas;
  for (double p : per_antenna_power) {
    if (std::abs(p - equal_share) > 1e-12 * equal_share) {
      throw DegenerateInputError("per_antenna_power must be the equal split total_power/num_bs_antennas");
    }
  }
  double max_weight = 0.0;
  for (double w : user_weights) {
    if (w < 0) throw DegenerateInputError("user_weights must be nonnegative");
    max_weight = std::max(max_weight, w);
  }
  if (!(max_weight > 0)) throw DegenerateInputError("at least one user weight must be positive");
}

SystemConfig make_uniform_config(int num_bs_antennas, int num_users,
                                 int antennas_per_user, int streams_per_user,
                                 double noise_variance, double total_power) {
  SystemConfig cfg;
  cfg.num_bs_antennas = num_bs_antennas;
  cfg.num_users = num_users;
  cfg.user_antennas.assign(num_users, antennas_per_user);
  cfg.user_streams.assign(num_users, streams_per_user);
  cfg.noise_variance = noise_variance;
  cfg.total_power = total_power;
  cfg.per_user_power.assign(num_users, total_power / num_users);
  cfg.per_antenna_power.assign(num_bs_antennas, total_power / num_bs_antennas);
  cfg.user_weights.assign(num_users, 1.0);
  cfg.validate();
  return cfg;
}

void ChannelSet::validate(const SystemConfig& cfg) const {
  if (channels.size() != static_cast<size_t>(cfg.num_users)) {
    throw DimensionError("channel count must equal num_users");
  }
  for (int i = 0; i < cfg.num_users; ++i) {
    const CMatrix& h = channels[i];
    if (h.rows() != cfg.user_antennas[i] || h.cols() != cfg.num_bs_antennas) {
      throw DimensionError("channel matrix shape mismatch for user " + std::to_string(i));
    }
    if (!h.allFinite()) throw DegenerateInputError("channel matrix has non-finite entries");
  }
}

void PrecoderStack::validate(const SystemConfig& cfg) const {
  if (blocks.size() != static_cast<size_t>(cfg.num_users)) {
    throw DimensionError("block count must equal num_users");
  }
  for (int i = 0; i < cfg.num_users; ++i) {
    const CMatrix& b = blocks[i];
    if (b.rows() != cfg.num_bs_antennas || b.cols() != cfg.user_streams[i]) {
      throw DimensionError("precoder block shape mismatch for user " + std::to_string(i));
    }
    if (!b.allFinite()) throw DegenerateInputError("precoder block has non-finite entries");
  }
}

PrecoderStack zeros_like(const PrecoderStack& p) {
  PrecoderStack out;
  out.blocks.reserve(p.blocks.size());
  for (const CMatrix& b : p.blocks) out.blocks.push_back(CMatrix::Zero(b.rows(), b.cols()));
  return out;
}

PrecoderStack zero_stack(const SystemConfig& cfg) {
  PrecoderStack out;
  out.blocks.reserve(cfg.num_users);
  for (int i = 0; i < cfg.num_users; ++i) {
    out.blocks.push_back(CMatrix::Zero(cfg.num_bs_antennas, cfg.user_streams[i]));
  }
  return out;
}

PrecoderStack scaled(const PrecoderStack& p, double alpha) {
  PrecoderStack out;
  out.blocks.reserve(p.blocks.size());
  for (const CMatrix& b : p.blocks) out.blocks.push_back(alpha * b);
  return out;
}

PrecoderStack add_scaled(const PrecoderStack& p, double alpha, const TangentStack& eta) {
  if (p.blocks.size() != eta.blocks.size()) throw DimensionError("stack block counts differ");
  PrecoderStack out;
  out.blocks.reserve(p.blocks.size());
  for (size_t i = 0; i < p.blocks.size(); ++i) {
    if (p.blocks[i].rows() != eta.blocks[i].rows() || p.blocks[i].cols() != eta.blocks[i].cols()) {
      throw DimensionError("stack block shapes differ");
    }
    out.blocks.push_back(p.blocks[i] + alpha * eta.blocks[i]);
  }
  return out;
}

CMatrix stack_concat(const PrecoderStack& p) {
  if (p.blocks.empty()) throw DimensionError("cannot concatenate an empty stack");
  const Eigen::Index rows = p.blocks.front().rows();
  Eigen::Index cols = 0;
  for (const CMatrix& b : p.blocks) {
    if (b.rows() != rows) throw DimensionError("stack blocks have differing row counts");
    cols += b.cols();
  }
  CMatrix out(rows, cols);
  Eigen::Index at = 0;
  for (const CMatrix& b : p.blocks) {
    out.middleCols(at, b.cols()) = b;
    at += b.cols();
  }
  return out;
}

PrecoderStack stack_split(const CMatrix& m, const std::vector<int>& widths) {
  Eigen::Index total = 0;
  for (int w : widths) {
    if (w < 1) throw DimensionError("split widths must be positive");
    total += w;
  }
  if (total != m.cols()) throw DimensionError("split widths must sum to the column count");
  PrecoderStack out;
  out.blocks.reserve(widths.size());
  Eigen::Index at = 0;
  for (int w : widths) {
    out.blocks.push_back(m.middleCols(at, w));
    at += w;
  }
  return out;
}

double frobenius_inner(const TangentStack& a, const TangentStack& b) {
  if (a.blocks.size() != b.blocks.size()) throw DimensionError("stack block counts differ");
  double acc = 0.0;
  for (size_t i = 0; i < a.blocks.size(); ++i) {
    const CMatrix& x = a.blocks[i];
    const CMatrix& y = b.blocks[i];
    if (x.rows() != y.rows() || x.cols() != y.cols()) {
      throw DimensionError("stack block shapes differ");
    }
    opcount::add_multiplies(static_cast<std::uint64_t>(x.size()));
    acc += x.cwiseProduct(y.conjugate()).real().sum();
  }
  return acc;
}

double stack_norm(const TangentStack& a) { return std::sqrt(frobenius_inner(a, a)); }

}  // namespace precopt
