#include "precopt/channel_io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "precopt/random.hpp"

static_assert(std::endian::native == std::endian::little,
              "channel files store raw little-endian doubles");

namespace precopt {

namespace {

std::string header_line(const SystemConfig& cfg) {
  std::ostringstream os;
  os << "CHANNELS v1 U=" << cfg.num_users << " Mt=" << cfg.num_bs_antennas
     << " Mi=";
  for (int i = 0; i < cfg.num_users; ++i) {
    if (i > 0) os << ',';
    os << cfg.user_antennas[i];
  }
  return os.str();
}

long long payload_bytes(const SystemConfig& cfg) {
  long long entries = 0;
  for (int i = 0; i < cfg.num_users; ++i) {
    entries += static_cast<long long>(cfg.user_antennas[i]) * cfg.num_bs_antennas;
  }
  return entries * 2 * static_cast<long long>(sizeof(double));
}

// Parses "key=value" where value must be a nonnegative integer.
int header_int(const std::string& token, const std::string& key) {
  const std::string prefix = key + "=";
  if (token.rfind(prefix, 0) != 0) {
    throw ParseError("channel header: expected '" + prefix + "...', got '" +
                     token + "'");
  }
  const std::string digits = token.substr(prefix.size());
  std::size_t used = 0;
  int value = 0;
  try {
    value = std::stoi(digits, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != digits.size() || digits.empty() || value < 0) {
    throw ParseError("channel header: bad integer in '" + token + "'");
  }
  return value;
}

std::vector<int> header_int_list(const std::string& token, const std::string& key) {
  const std::string prefix = key + "=";
  if (token.rfind(prefix, 0) != 0) {
    throw ParseError("channel header: expected '" + prefix + "...', got '" +
                     token + "'");
  }
  std::vector<int> values;
  std::string rest = token.substr(prefix.size());
  std::stringstream ss(rest);
  std::string piece;
  while (std::getline(ss, piece, ',')) {
    values.push_back(header_int(key + "=" + piece, key));
  }
  if (values.empty()) {
    throw ParseError("channel header: empty list in '" + token + "'");
  }
  return values;
}

}  // namespace

ChannelSet generate_channels(const SystemConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  ChannelSet ch;
  ch.channels.reserve(cfg.num_users);
  for (int i = 0; i < cfg.num_users; ++i) {
    ch.channels.push_back(random_cn_matrix(cfg.user_antennas[i],
                                           cfg.num_bs_antennas, seed,
                                           static_cast<std::uint64_t>(i)));
  }
  return ch;
}

void save_channels(const std::string& path, const SystemConfig& cfg,
                   const ChannelSet& ch) {
  cfg.validate();
  ch.validate(cfg);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  out << header_line(cfg) << '\n';
  for (const CMatrix& h : ch.channels) {
    for (Eigen::Index r = 0; r < h.rows(); ++r) {
      for (Eigen::Index c = 0; c < h.cols(); ++c) {
        const double re = h(r, c).real();
        const double im = h(r, c).imag();
        out.write(reinterpret_cast<const char*>(&re), sizeof(double));
        out.write(reinterpret_cast<const char*>(&im), sizeof(double));
      }
    }
  }
  if (!out) throw ParseError("short write to '" + path + "'");
}

ChannelSet load_channels(const std::string& path, const SystemConfig& cfg) {
  cfg.validate();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "' for reading");

  std::string header;
  if (!std::getline(in, header)) {
    throw ParseError("'" + path + "': missing channel header line");
  }
  std::istringstream hs(header);
  std::string magic, version, utok, mttok, mitok;
  hs >> magic >> version >> utok >> mttok >> mitok;
  if (magic != "CHANNELS" || version != "v1") {
    throw ParseError("'" + path + "': expected 'CHANNELS v1' header, got '" +
                     header + "'");
  }
  const int users = header_int(utok, "U");
  const int mt = header_int(mttok, "Mt");
  const std::vector<int> antennas = header_int_list(mitok, "Mi");

  if (static_cast<int>(antennas.size()) != users) {
    throw ParseError("'" + path + "': header lists " +
                     std::to_string(antennas.size()) + " Mi values for U=" +
                     std::to_string(users));
  }
  if (users != cfg.num_users || mt != cfg.num_bs_antennas ||
      antennas != cfg.user_antennas) {
    throw DimensionError("'" + path + "': header (" + header_line(cfg) +
                         " expected) does not match '" + header + "'");
  }

  const long long expected = payload_bytes(cfg);
  std::vector<char> payload(static_cast<std::size_t>(expected));
  in.read(payload.data(), expected);
  const long long got = in.gcount();
  if (got != expected) {
    throw ParseError("'" + path + "': channel payload truncated, expected " +
                     std::to_string(expected) + " bytes after the header, got " +
                     std::to_string(got));
  }
  char probe = 0;
  if (in.read(&probe, 1)) {
    throw ParseError("'" + path + "': trailing bytes after " +
                     std::to_string(expected) + " payload bytes");
  }

  ChannelSet ch;
  ch.channels.reserve(cfg.num_users);
  const double* cursor = reinterpret_cast<const double*>(payload.data());
  for (int i = 0; i < cfg.num_users; ++i) {
    CMatrix h(cfg.user_antennas[i], cfg.num_bs_antennas);
    for (Eigen::Index r = 0; r < h.rows(); ++r) {
      for (Eigen::Index c = 0; c < h.cols(); ++c) {
        const double re = *cursor++;
        const double im = *cursor++;
        h(r, c) = complex_t(re, im);
      }
    }
    ch.channels.push_back(std::move(h));
  }
  return ch;
}

}  // namespace precopt
