#pragma once

#include <cstdint>
#include <string>

#include "precopt/types.hpp"

namespace precopt {

/**
 * Draws the per-user channel matrices H_i ~ CN(0,1) i.i.d. for the scenario
 * described by cfg. The draw is deterministic in (seed, shapes): user i reads
 * from substream i of the seed, so inserting or removing users does not
 * perturb the channels of the users that remain.
 */
ChannelSet generate_channels(const SystemConfig& cfg, std::uint64_t seed);

/**
 * Writes a channel set to disk. The format is a single ASCII header line
 *
 *   CHANNELS v1 U=<U> Mt=<M_t> Mi=<m_1,m_2,...>
 *
 * followed by the U matrices as raw little-endian doubles, each matrix
 * row-major with every entry stored as (real, imag). Round-trips bitwise.
 */
void save_channels(const std::string& path, const SystemConfig& cfg,
                   const ChannelSet& ch);

// Counterpart of save_channels. Header fields that disagree with cfg raise
// DimensionError; malformed headers or short payloads raise ParseError with
// the offending byte counts.
ChannelSet load_channels(const std::string& path, const SystemConfig& cfg);

}  // namespace precopt
