#include "precopt/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "json.hpp"

#include "precopt/baselines.hpp"
#include "precopt/channel_io.hpp"
#include "precopt/flops.hpp"
#include "precopt/manifolds.hpp"
#include "precopt/objective.hpp"
#include "precopt/random.hpp"

namespace precopt {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  const char* ws = " \t\r\n";
  const auto a = s.find_first_not_of(ws);
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(ws);
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string piece;
  while (std::getline(ss, piece, sep)) out.push_back(trim(piece));
  return out;
}

double parse_double(const std::string& raw, const std::string& key) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(raw, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (raw.empty() || used != raw.size()) {
    throw ParseError("key '" + key + "': expected a number, got '" + raw + "'");
  }
  return value;
}

long long parse_int(const std::string& raw, const std::string& key) {
  std::size_t used = 0;
  long long value = 0;
  try {
    value = std::stoll(raw, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (raw.empty() || used != raw.size()) {
    throw ParseError("key '" + key + "': expected an integer, got '" + raw + "'");
  }
  return value;
}

std::vector<double> parse_double_list(const std::string& raw, const std::string& key) {
  std::vector<double> out;
  for (const std::string& piece : split(raw, ',')) out.push_back(parse_double(piece, key));
  if (out.empty()) throw ParseError("key '" + key + "': empty list");
  return out;
}

std::vector<int> parse_int_list(const std::string& raw, const std::string& key) {
  std::vector<int> out;
  for (const std::string& piece : split(raw, ',')) {
    out.push_back(static_cast<int>(parse_int(piece, key)));
  }
  if (out.empty()) throw ParseError("key '" + key + "': empty list");
  return out;
}

// Entries are either single seeds or inclusive ranges a..b.
std::vector<std::uint64_t> parse_seed_list(const std::string& raw, const std::string& key) {
  std::vector<std::uint64_t> out;
  for (const std::string& piece : split(raw, ',')) {
    const auto dots = piece.find("..");
    if (dots == std::string::npos) {
      const long long v = parse_int(piece, key);
      if (v < 0) throw ParseError("key '" + key + "': seeds must be nonnegative");
      out.push_back(static_cast<std::uint64_t>(v));
      continue;
    }
    const long long lo = parse_int(trim(piece.substr(0, dots)), key);
    const long long hi = parse_int(trim(piece.substr(dots + 2)), key);
    if (lo < 0 || hi < lo) {
      throw ParseError("key '" + key + "': bad seed range '" + piece + "'");
    }
    for (long long v = lo; v <= hi; ++v) out.push_back(static_cast<std::uint64_t>(v));
  }
  if (out.empty()) throw ParseError("key '" + key + "': empty list");
  return out;
}

std::string g17(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string gshort(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::ostringstream os;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) os << ',';
    if constexpr (std::is_same_v<T, double>) {
      os << g17(values[i]);
    } else {
      os << values[i];
    }
  }
  return os.str();
}

StopReason stop_reason_from_string(const std::string& name) {
  if (name == "gradient_tolerance") return StopReason::GradientTolerance;
  if (name == "objective_stall") return StopReason::ObjectiveStall;
  if (name == "max_iterations") return StopReason::MaxIterations;
  if (name == "stalled_line_search") return StopReason::StalledLineSearch;
  if (name == "radius_collapse") return StopReason::RadiusCollapse;
  throw ParseError("unknown stop reason '" + name + "'");
}

double json_double(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return j.at(key).get<double>();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw ParseError("short write to '" + path + "'");
}

}  // namespace

std::string to_string(InitKind kind) {
  return kind == InitKind::Gaussian ? "gaussian" : "rzf";
}

InitKind init_from_string(const std::string& name) {
  if (name == "gaussian") return InitKind::Gaussian;
  if (name == "rzf") return InitKind::Rzf;
  throw ParseError("unknown init '" + name + "' (expected gaussian or rzf)");
}

void ExperimentSpec::resolve_defaults() {
  auto fit_int = [this](std::vector<int>& v, int fill) {
    if (v.empty()) v.assign(users, fill);
    else if (v.size() == 1 && users > 1) v.assign(users, v[0]);
  };
  fit_int(user_antennas, 2);
  fit_int(user_streams, 2);
  if (weights.empty()) weights.assign(users, 1.0);
  else if (weights.size() == 1 && users > 1) weights.assign(users, weights[0]);
  if (per_user_power.empty()) {
    per_user_power.assign(users, total_power / users);
  } else if (per_user_power.size() == 1 && users > 1) {
    per_user_power.assign(users, per_user_power[0]);
  }
}

void ExperimentSpec::validate() const {
  if (name.empty()) throw PreconditionError("spec name must be nonempty");
  if (mt < 1) throw PreconditionError("mt must be positive");
  if (users < 1) throw PreconditionError("users must be positive");
  auto need_users = [this](std::size_t n, const char* what) {
    if (n != static_cast<std::size_t>(users)) {
      throw PreconditionError(std::string(what) + " needs 1 or " +
                              std::to_string(users) + " entries, got " +
                              std::to_string(n));
    }
  };
  need_users(user_antennas.size(), "user_antennas");
  need_users(user_streams.size(), "user_streams");
  need_users(weights.size(), "weights");
  need_users(per_user_power.size(), "per_user_power");
  if (!(total_power > 0.0)) throw PreconditionError("total_power must be positive");
  if (snr_db.empty()) throw PreconditionError("snr_db must be nonempty");
  if (seeds.empty()) throw PreconditionError("seeds must be nonempty");
  if (channel_source.empty()) throw PreconditionError("channel_source must be nonempty");
}

ExperimentSpec parse_experiment_spec(const std::string& text) {
  ExperimentSpec spec;
  spec.user_antennas.clear();
  spec.user_streams.clear();
  spec.weights.clear();
  spec.per_user_power.clear();
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line.erase(hash_pos);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ParseError("line " + std::to_string(lineno) +
                       ": expected key=value, got '" + stripped + "'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      throw ParseError("line " + std::to_string(lineno) + ": empty key");
    }
    if (!seen.insert(key).second) {
      throw ParseError("line " + std::to_string(lineno) + ": duplicate key '" +
                       key + "'");
    }

    if (key == "name") {
      if (value.empty()) throw ParseError("key 'name': empty value");
      spec.name = value;
    } else if (key == "mt") {
      spec.mt = static_cast<int>(parse_int(value, key));
    } else if (key == "users") {
      spec.users = static_cast<int>(parse_int(value, key));
    } else if (key == "user_antennas") {
      spec.user_antennas = parse_int_list(value, key);
    } else if (key == "user_streams") {
      spec.user_streams = parse_int_list(value, key);
    } else if (key == "total_power") {
      spec.total_power = parse_double(value, key);
    } else if (key == "weights") {
      spec.weights = parse_double_list(value, key);
    } else if (key == "per_user_power") {
      spec.per_user_power = parse_double_list(value, key);
    } else if (key == "constraint") {
      spec.constraint = constraint_from_string(value);
    } else if (key == "solver") {
      spec.solver = solver_from_string(value);
    } else if (key == "init") {
      spec.init = init_from_string(value);
    } else if (key == "snr_db") {
      spec.snr_db = parse_double_list(value, key);
    } else if (key == "seeds") {
      spec.seeds = parse_seed_list(value, key);
    } else if (key == "channel_source") {
      if (value.empty()) throw ParseError("key 'channel_source': empty value");
      spec.channel_source = value;
    } else if (key == "out") {
      spec.out_dir = value;
    } else if (key == "alpha0") {
      spec.line_search.alpha0 = parse_double(value, key);
    } else if (key == "ls_r") {
      spec.line_search.r = parse_double(value, key);
    } else if (key == "ls_c") {
      spec.line_search.c = parse_double(value, key);
    } else if (key == "max_backtracks") {
      spec.line_search.max_backtracks = static_cast<int>(parse_int(value, key));
    } else if (key == "max_outer") {
      spec.stop.max_outer = static_cast<int>(parse_int(value, key));
    } else if (key == "grad_tol") {
      spec.stop.grad_norm_tol = parse_double(value, key);
    } else if (key == "rel_obj_tol") {
      spec.stop.rel_obj_tol = parse_double(value, key);
    } else if (key == "delta0") {
      spec.trust_region.delta0 = parse_double(value, key);
    } else if (key == "delta_max") {
      spec.trust_region.delta_max = parse_double(value, key);
    } else if (key == "rho_threshold") {
      spec.trust_region.rho_threshold = parse_double(value, key);
    } else if (key == "n_sub") {
      spec.trust_region.n_sub = static_cast<int>(parse_int(value, key));
    } else {
      throw ParseError("line " + std::to_string(lineno) + ": unknown key '" +
                       key + "'");
    }
  }
  spec.resolve_defaults();
  spec.validate();
  return spec;
}

ExperimentSpec load_experiment_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open spec file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_experiment_spec(buffer.str());
}

// The output directory is deliberately left out: it changes where files land,
// not what is computed, so runs into different directories hash identically.
std::string canonical_spec_text(const ExperimentSpec& spec) {
  std::ostringstream os;
  os << "alpha0=" << g17(spec.line_search.alpha0) << '\n'
     << "channel_source=" << spec.channel_source << '\n'
     << "constraint=" << to_string(spec.constraint) << '\n'
     << "delta0=" << g17(spec.trust_region.delta0) << '\n'
     << "delta_max=" << g17(spec.trust_region.delta_max) << '\n'
     << "grad_tol=" << g17(spec.stop.grad_norm_tol) << '\n'
     << "init=" << to_string(spec.init) << '\n'
     << "ls_c=" << g17(spec.line_search.c) << '\n'
     << "ls_r=" << g17(spec.line_search.r) << '\n'
     << "max_backtracks=" << spec.line_search.max_backtracks << '\n'
     << "max_outer=" << spec.stop.max_outer << '\n'
     << "mt=" << spec.mt << '\n'
     << "n_sub=" << spec.trust_region.n_sub << '\n'
     << "name=" << spec.name << '\n'
     << "per_user_power=" << join(spec.per_user_power) << '\n'
     << "rel_obj_tol=" << g17(spec.stop.rel_obj_tol) << '\n'
     << "rho_threshold=" << g17(spec.trust_region.rho_threshold) << '\n'
     << "seeds=" << join(spec.seeds) << '\n'
     << "snr_db=" << join(spec.snr_db) << '\n'
     << "solver=" << to_string(spec.solver) << '\n'
     << "total_power=" << g17(spec.total_power) << '\n'
     << "user_antennas=" << join(spec.user_antennas) << '\n'
     << "user_streams=" << join(spec.user_streams) << '\n'
     << "users=" << spec.users << '\n'
     << "weights=" << join(spec.weights) << '\n';
  return os.str();
}

std::string spec_hash(const ExperimentSpec& spec) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical_spec_text(spec))));
  return buf;
}

SystemConfig system_config_for(const ExperimentSpec& spec, double snr_db) {
  SystemConfig cfg;
  cfg.num_bs_antennas = spec.mt;
  cfg.num_users = spec.users;
  cfg.user_antennas = spec.user_antennas;
  cfg.user_streams = spec.user_streams;
  cfg.total_power = spec.total_power;
  cfg.noise_variance = spec.total_power * std::pow(10.0, -snr_db / 10.0);
  cfg.per_user_power = spec.per_user_power;
  cfg.per_antenna_power.assign(spec.mt, spec.total_power / spec.mt);
  cfg.user_weights = spec.weights;
  cfg.validate();
  return cfg;
}

ManifoldPoint initial_point(const ExperimentSpec& spec, const SystemConfig& cfg,
                            const ChannelSet& ch, std::uint64_t seed) {
  if (spec.init == InitKind::Rzf) {
    const ManifoldPoint tpc = rzf_precoder(cfg, ch);
    return normalize_to_manifold(tpc.p, spec.constraint, cfg);
  }
  PrecoderStack p;
  p.blocks.reserve(cfg.num_users);
  for (int i = 0; i < cfg.num_users; ++i) {
    p.blocks.push_back(random_cn_matrix(cfg.num_bs_antennas, cfg.user_streams[i],
                                        seed, kInitStreamBase + i));
  }
  return normalize_to_manifold(p, spec.constraint, cfg);
}

std::vector<RunRecord> run_experiment(const ExperimentSpec& spec_in) {
  ExperimentSpec spec = spec_in;
  spec.resolve_defaults();
  spec.validate();
  const std::string hash = spec_hash(spec);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  std::vector<RunRecord> records;
  records.reserve(spec.snr_db.size() * spec.seeds.size());
  for (double snr : spec.snr_db) {
    for (std::uint64_t seed : spec.seeds) {
      RunRecord rec;
      rec.hash = hash;
      rec.seed = seed;
      rec.snr_db = snr;
      rec.solver = spec.solver;
      rec.constraint = spec.constraint;
      rec.wsr_nats = nan;
      rec.wsr_bits = nan;
      rec.flops_per_iter = nan;
      try {
        const SystemConfig cfg = system_config_for(spec, snr);
        const ChannelSet ch = spec.channel_source == "synthetic"
                                  ? generate_channels(cfg, seed)
                                  : load_channels(spec.channel_source, cfg);
        const ManifoldPoint start = initial_point(spec, cfg, ch, seed);

        opcount::reset();
        const auto t0 = std::chrono::steady_clock::now();
        SolveResult result;
        switch (spec.solver) {
          case SolverKind::RSD:
            result = rsd_solve(cfg, ch, spec.constraint, start.p,
                               spec.line_search, spec.stop);
            break;
          case SolverKind::RCG:
            result = rcg_solve(cfg, ch, spec.constraint, start.p,
                               spec.line_search, spec.stop);
            break;
          case SolverKind::RTR:
            result = rtr_solve(cfg, ch, spec.constraint, start.p,
                               spec.trust_region, spec.stop);
            break;
        }
        const auto t1 = std::chrono::steady_clock::now();
        rec.wall_time_s = std::chrono::duration<double>(t1 - t0).count();
        rec.trace = std::move(result.trace);
        rec.iterations = static_cast<int>(rec.trace.records.size());
        rec.reason = result.reason;
        rec.final_point = std::move(result.point.p);
        // Recomputed from the stored point so the persisted WSR is exactly
        // the rate of the persisted precoder.
        rec.wsr_nats = -wsr_objective(cfg, ch, rec.final_point);
        rec.wsr_bits = rec.wsr_nats / std::log(2.0);
        rec.flops_per_iter =
            flop_counter_report(rec.trace, cfg, spec.constraint, spec.solver,
                                spec.trust_region.n_sub)
                .per_iteration;
      } catch (const std::exception& e) {
        rec.error = e.what();
      }
      records.push_back(std::move(rec));
    }
  }
  if (!spec.out_dir.empty()) write_outputs(spec, records);
  return records;
}

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records) {
  if (records.empty()) {
    throw PreconditionError("summarize needs at least one run record");
  }
  struct Group {
    std::vector<double> wsr_bits;
    double sum_iterations = 0.0;
    double sum_wall = 0.0;
    double sum_flops = 0.0;
    int errors = 0;
  };
  std::map<std::tuple<int, int, double>, Group> groups;
  for (const RunRecord& rec : records) {
    Group& g = groups[{static_cast<int>(rec.solver),
                       static_cast<int>(rec.constraint), rec.snr_db}];
    if (!rec.error.empty()) {
      ++g.errors;
      continue;
    }
    g.wsr_bits.push_back(rec.wsr_bits);
    g.sum_iterations += rec.iterations;
    g.sum_wall += rec.wall_time_s;
    g.sum_flops += rec.flops_per_iter;
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<SummaryRow> rows;
  rows.reserve(groups.size());
  for (auto& [key, g] : groups) {
    SummaryRow row;
    row.solver = static_cast<SolverKind>(std::get<0>(key));
    row.constraint = static_cast<ConstraintKind>(std::get<1>(key));
    row.snr_db = std::get<2>(key);
    row.runs = static_cast<int>(g.wsr_bits.size());
    row.errors = g.errors;
    if (row.runs == 0) {
      row.mean_wsr_bits = row.median_wsr_bits = nan;
      row.mean_iterations = row.mean_wall_time_s = row.mean_flops_per_iter = nan;
    } else {
      std::sort(g.wsr_bits.begin(), g.wsr_bits.end());
      const std::size_t n = g.wsr_bits.size();
      row.median_wsr_bits = (n % 2 == 1)
                                ? g.wsr_bits[n / 2]
                                : 0.5 * (g.wsr_bits[n / 2 - 1] + g.wsr_bits[n / 2]);
      double sum = 0.0;
      for (double v : g.wsr_bits) sum += v;
      row.mean_wsr_bits = sum / n;
      row.mean_iterations = g.sum_iterations / n;
      row.mean_wall_time_s = g.sum_wall / n;
      row.mean_flops_per_iter = g.sum_flops / n;
    }
    rows.push_back(row);
  }
  return rows;
}

std::string trace_file_name(const RunRecord& record) {
  return "trace_" + std::to_string(record.seed) + "_" + gshort(record.snr_db) +
         ".csv";
}

std::string trace_csv(const RunRecord& record) {
  std::ostringstream os;
  os << "k,f_nats,gradnorm,alpha_or_delta,rho,resid,n_in,flops\n";
  for (const IterationRecord& r : record.trace.records) {
    os << r.k << ',' << g17(r.objective) << ',' << g17(r.grad_norm) << ','
       << g17(r.step) << ',' << g17(r.rho) << ',' << g17(r.feasibility) << ','
       << r.n_in << ',' << r.multiplies << '\n';
  }
  return os.str();
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream os;
  os << "solver,constraint,snr_db,runs,errors,mean_wsr_bits,median_wsr_bits,"
        "mean_iterations,mean_wall_time_s,mean_flops_per_iter\n";
  for (const SummaryRow& row : rows) {
    os << to_string(row.solver) << ',' << to_string(row.constraint) << ','
       << g17(row.snr_db) << ',' << row.runs << ',' << row.errors << ','
       << g17(row.mean_wsr_bits) << ',' << g17(row.median_wsr_bits) << ','
       << g17(row.mean_iterations) << ',' << g17(row.mean_wall_time_s) << ','
       << g17(row.mean_flops_per_iter) << '\n';
  }
  return os.str();
}

std::string summary_json(const std::vector<SummaryRow>& rows,
                         const std::string& hash) {
  json top;
  top["spec_hash"] = hash;
  top["snr_convention"] = "snr_db = 10*log10(total_power/noise_variance)";
  json out_rows = json::array();
  for (const SummaryRow& row : rows) {
    json j;
    j["solver"] = to_string(row.solver);
    j["constraint"] = to_string(row.constraint);
    j["snr_db"] = row.snr_db;
    j["runs"] = row.runs;
    j["errors"] = row.errors;
    j["mean_wsr_bits"] = row.mean_wsr_bits;
    j["median_wsr_bits"] = row.median_wsr_bits;
    j["mean_iterations"] = row.mean_iterations;
    j["mean_wall_time_s"] = row.mean_wall_time_s;
    j["mean_flops_per_iter"] = row.mean_flops_per_iter;
    out_rows.push_back(std::move(j));
  }
  top["rows"] = std::move(out_rows);
  return top.dump(2) + "\n";
}

void write_outputs(const ExperimentSpec& spec,
                   const std::vector<RunRecord>& records) {
  namespace fs = std::filesystem;
  fs::create_directories(spec.out_dir);
  const fs::path dir(spec.out_dir);

  write_file((dir / "resolved_spec.txt").string(), canonical_spec_text(spec));

  std::ostringstream lines;
  for (const RunRecord& rec : records) {
    if (rec.error.empty()) {
      write_file((dir / trace_file_name(rec)).string(), trace_csv(rec));
    }
    json j;
    j["spec_hash"] = rec.hash;
    j["seed"] = rec.seed;
    j["snr_db"] = rec.snr_db;
    j["solver"] = to_string(rec.solver);
    j["constraint"] = to_string(rec.constraint);
    j["wsr_nats"] = rec.wsr_nats;
    j["wsr_bits"] = rec.wsr_bits;
    j["iterations"] = rec.iterations;
    j["wall_time_s"] = rec.wall_time_s;
    j["stop_reason"] = to_string(rec.reason);
    j["flops_per_iter"] = rec.flops_per_iter;
    j["error"] = rec.error;
    json blocks = json::array();
    for (const CMatrix& b : rec.final_point.blocks) {
      json rows = json::array();
      for (Eigen::Index r = 0; r < b.rows(); ++r) {
        json cols = json::array();
        for (Eigen::Index c = 0; c < b.cols(); ++c) {
          cols.push_back(json::array({b(r, c).real(), b(r, c).imag()}));
        }
        rows.push_back(std::move(cols));
      }
      blocks.push_back(std::move(rows));
    }
    j["final_point"] = std::move(blocks);
    lines << j.dump() << '\n';
  }
  write_file((dir / "records.jsonl").string(), lines.str());

  const std::vector<SummaryRow> rows = summarize(records);
  write_file((dir / "summary.csv").string(), summary_csv(rows));
  write_file((dir / "summary.json").string(),
             summary_json(rows, records.front().hash));
}

std::vector<RunRecord> load_run_records(const std::string& dir) {
  const std::string path =
      (std::filesystem::path(dir) / "records.jsonl").string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");

  std::vector<RunRecord> records;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    RunRecord rec;
    rec.hash = j.value("spec_hash", std::string());
    rec.seed = j.at("seed").get<std::uint64_t>();
    rec.snr_db = j.at("snr_db").get<double>();
    rec.solver = solver_from_string(j.at("solver").get<std::string>());
    rec.constraint = constraint_from_string(j.at("constraint").get<std::string>());
    rec.wsr_nats = json_double(j, "wsr_nats");
    rec.wsr_bits = json_double(j, "wsr_bits");
    rec.iterations = j.at("iterations").get<int>();
    rec.wall_time_s = json_double(j, "wall_time_s");
    rec.reason = stop_reason_from_string(j.at("stop_reason").get<std::string>());
    rec.flops_per_iter = json_double(j, "flops_per_iter");
    rec.error = j.value("error", std::string());
    for (const json& rows : j.at("final_point")) {
      const Eigen::Index nr = static_cast<Eigen::Index>(rows.size());
      const Eigen::Index nc =
          nr > 0 ? static_cast<Eigen::Index>(rows.at(0).size()) : 0;
      CMatrix b(nr, nc);
      for (Eigen::Index r = 0; r < nr; ++r) {
        for (Eigen::Index c = 0; c < nc; ++c) {
          const json& pair = rows.at(r).at(c);
          b(r, c) = complex_t(pair.at(0).get<double>(), pair.at(1).get<double>());
        }
      }
      rec.final_point.blocks.push_back(std::move(b));
    }
    records.push_back(std::move(rec));
  }
  if (records.empty()) {
    throw PreconditionError("no run records found in '" + path + "'");
  }
  return records;
}

}  // namespace precopt
