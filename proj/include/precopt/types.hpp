#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace precopt {

using complex_t = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;

// ---------------------------------------------------------------------------
// Error taxonomy
// ---------------------------------------------------------------------------

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DegenerateInputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A retraction or normalization hit a vanishing norm where a scale factor divides.
struct DegenerateStepError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A positive-definite solve failed; carries a rough condition estimate.
struct IllConditionedError : std::runtime_error {
  IllConditionedError(const std::string& what, double estimate)
      : std::runtime_error(what), condition_estimate(estimate) {}
  double condition_estimate;
};

struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InvalidCacheError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Backtracking exhausted max_backtracks; carries the best step found.
struct StalledLineSearchError : std::runtime_error {
  StalledLineSearchError(const std::string& what, double alpha)
      : std::runtime_error(what), best_alpha(alpha) {}
  double best_alpha;
};

struct UnavailableError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Constraint kinds
// ---------------------------------------------------------------------------

enum class ConstraintKind { TPC, PUPC, PAPC };

std::string to_string(ConstraintKind kind);
ConstraintKind constraint_from_string(const std::string& name);

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/**
 * Dimensions, powers and weights of one downlink scenario.
 *
 * num_bs_antennas (M_t) transmit antennas serve num_users (U) receivers; user
 * i has user_antennas[i] (M_i) antennas and user_streams[i] (d_i) streams.
 * Powers are linear scale; per_antenna_power is the equal split P/M_t required
 * by the per-antenna constraint.
 */
struct SystemConfig {
  int num_bs_antennas = 0;
  int num_users = 0;
  std::vector<int> user_antennas;
  std::vector<int> user_streams;
  double noise_variance = 1.0;
  double total_power = 1.0;
  std::vector<double> per_user_power;
  std::vector<double> per_antenna_power;
  std::vector<double> user_weights;

  int total_rx_antennas() const;  // N_r = sum M_i
  int total_streams() const;      // N_d = sum d_i
  void validate() const;          // throws on violated invariants
};

// Equal antennas/streams/powers across users, unit weights.
SystemConfig make_uniform_config(int num_bs_antennas, int num_users,
                                 int antennas_per_user, int streams_per_user,
                                 double noise_variance, double total_power = 1.0);

struct ChannelSet {
  std::vector<CMatrix> channels;  // H_i of shape M_i x M_t

  void validate(const SystemConfig& cfg) const;
};

/**
 * Tuple of per-user complex matrices, block i of shape M_t x d_i. The same
 * layout serves both precoder points and tangent directions.
 */
struct PrecoderStack {
  std::vector<CMatrix> blocks;

  int num_blocks() const { return static_cast<int>(blocks.size()); }
  void validate(const SystemConfig& cfg) const;
};

using TangentStack = PrecoderStack;

PrecoderStack zeros_like(const PrecoderStack& p);
PrecoderStack zero_stack(const SystemConfig& cfg);
PrecoderStack scaled(const PrecoderStack& p, double alpha);
// p + alpha * eta, blockwise
PrecoderStack add_scaled(const PrecoderStack& p, double alpha, const TangentStack& eta);

// Columnwise concatenation (P_1 ... P_U) of shape M_t x N_d, and its inverse.
CMatrix stack_concat(const PrecoderStack& p);
PrecoderStack stack_split(const CMatrix& m, const std::vector<int>& widths);

// Product metric g(a,b) = sum_i Re tr(a_i^H b_i).
double frobenius_inner(const TangentStack& a, const TangentStack& b);
double stack_norm(const TangentStack& a);

}  // namespace precopt
