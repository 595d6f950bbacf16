#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cbe/dynamics.hpp"
#include "cbe/ensemble.hpp"
#include "cbe/field.hpp"
#include "cbe/statistics.hpp"
#include "cbe/stein.hpp"
#include "cbe/transport.hpp"

namespace cbe {

using json = nlohmann::json;

// shortest round-trippable decimal representation
inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// FNV-1a 64-bit digest, hex-encoded; used for manifest output digests.
inline std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

inline std::string file_digest(const std::string& path) {
  return fnv1a_hex(read_text_file(path));
}

// ---- sample batches: columnar text (one row per configuration) plus a
// ---- JSON sidecar with params and provenance

inline std::string batch_rows_text(const SampleBatch& batch) {
  std::ostringstream out;
  for (const Configuration& c : batch.configs) {
    for (int j = 0; j < c.n(); ++j) {
      if (j) out << ' ';
      out << fmt_double(c.angles[j]);
    }
    out << '\n';
  }
  return out.str();
}

inline json batch_sidecar(const SampleBatch& batch) {
  return json{
      {"params",
       {{"n", batch.params.n},
        {"beta", batch.params.beta},
        {"seed", batch.params.seed}}},
      {"provenance",
       {{"sampler", batch.provenance.sampler},
        {"proposal_scale", batch.provenance.proposal_scale},
        {"burn_in", batch.provenance.burn_in},
        {"thinning", batch.provenance.thinning},
        {"chains", batch.provenance.chains},
        {"seed", batch.provenance.seed},
        {"acceptance_rate", batch.provenance.acceptance_rate}}},
      {"m", batch.m()}};
}

inline void write_sample_batch(const std::string& base_path,
                               const SampleBatch& batch) {
  write_text_file(base_path + ".txt", batch_rows_text(batch));
  write_text_file(base_path + ".json", batch_sidecar(batch).dump(2) + "\n");
}

inline SampleBatch read_sample_batch(const std::string& base_path) {
  SampleBatch batch;
  const json side = json::parse(read_text_file(base_path + ".json"));
  batch.params.n = side["params"]["n"];
  batch.params.beta = side["params"]["beta"];
  batch.params.seed = side["params"]["seed"];
  batch.provenance.sampler = side["provenance"]["sampler"];
  batch.provenance.proposal_scale = side["provenance"]["proposal_scale"];
  batch.provenance.burn_in = side["provenance"]["burn_in"];
  batch.provenance.thinning = side["provenance"]["thinning"];
  batch.provenance.chains = side["provenance"]["chains"];
  batch.provenance.seed = side["provenance"]["seed"];
  batch.provenance.acceptance_rate = side["provenance"]["acceptance_rate"];

  std::istringstream rows(read_text_file(base_path + ".txt"));
  std::string line;
  while (std::getline(rows, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::vector<double> angles;
    double v;
    while (ls >> v) angles.push_back(v);
    batch.configs.push_back(Configuration{std::move(angles)});
  }
  return batch;
}

// trajectories: same columnar format with a leading time column
inline std::string trajectory_text(const Trajectory& traj) {
  std::ostringstream out;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    out << fmt_double(traj.times[i]);
    for (double a : traj.states[i].angles) out << ' ' << fmt_double(a);
    out << '\n';
  }
  return out.str();
}

// ---- report serialization

inline json to_json(const McmcDiagnostics& d) {
  return json{{"acceptance_rate", d.acceptance_rate},
              {"autocorrelation_time", d.autocorrelation_time},
              {"reliable", d.reliable},
              {"note", d.note}};
}

inline json to_json(const MomentReport& r) {
  json second = json::array();
  for (const auto& e : r.second)
    second.push_back(json{{"m", e.m},
                          {"estimate", e.estimate},
                          {"se", e.se},
                          {"bound", e.bound},
                          {"ok", e.ok}});
  json fourth = json::array();
  for (const auto& e : r.fourth)
    fourth.push_back(json{{"m", e.m},
                          {"j", e.j},
                          {"k", e.k},
                          {"estimate_re", e.estimate.real()},
                          {"estimate_im", e.estimate.imag()},
                          {"abs_estimate", std::abs(e.estimate)},
                          {"se", e.se},
                          {"bound", e.bound},
                          {"ok", e.ok}});
  return json{{"d", r.d},          {"n", r.n},
              {"beta", r.beta},    {"samples", r.samples},
              {"reliable", r.reliable}, {"all_ok", r.all_ok},
              {"second", second},  {"fourth", fourth}};
}

inline std::string moment_report_csv(const MomentReport& r) {
  std::ostringstream out;
  out << "kind,m,j,k,estimate_re,estimate_im,se,bound,ok\n";
  for (const auto& e : r.second)
    out << "second," << e.m << ",,," << fmt_double(e.estimate) << ",0,"
        << fmt_double(e.se) << ',' << fmt_double(e.bound) << ',' << e.ok
        << '\n';
  for (const auto& e : r.fourth)
    out << "fourth," << e.m << ',' << e.j << ',' << e.k << ','
        << fmt_double(e.estimate.real()) << ',' << fmt_double(e.estimate.imag())
        << ',' << fmt_double(e.se) << ',' << fmt_double(e.bound) << ',' << e.ok
        << '\n';
  return out.str();
}

inline json to_json(const StationarityReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries)
    entries.push_back(json{{"k", e.k},
                           {"moment_start", e.moment_start},
                           {"moment_end", e.moment_end},
                           {"z", e.z}});
  return json{{"t", r.t},
              {"paths", r.paths},
              {"entries", entries},
              {"stationary", r.stationary}};
}

inline json to_json(const ExchangeabilityReport& r) {
  return json{{"t", r.t},
              {"paths", r.paths},
              {"statistic", r.statistic},
              {"z", r.z},
              {"symmetric", r.symmetric}};
}

inline json to_json(const DriftLimitReport& r) {
  return json{{"k", r.k},
              {"starts", r.starts},
              {"noise_paths", r.noise_paths},
              {"t_grid", r.t_grid},
              {"rel_l1_error", r.rel_l1_error},
              {"noise_fraction", r.noise_fraction},
              {"inconclusive", r.inconclusive},
              {"recommended_noise_paths", r.recommended_noise_paths}};
}

inline json to_json(const IncrementLimitsReport& r) {
  return json{{"d", r.d},
              {"starts", r.starts},
              {"noise_paths", r.noise_paths},
              {"t_grid", r.t_grid},
              {"first_order", r.first_order},
              {"mixed", r.mixed},
              {"plain", r.plain},
              {"max_rel_error", r.max_rel_error},
              {"inconclusive", r.inconclusive}};
}

inline json to_json(const CubicScalingReport& r) {
  return json{{"t_grid", r.t_grid},
              {"third_moment", r.third_moment},
              {"second_moment", r.second_moment},
              {"slope_third", r.slope_third},
              {"slope_second", r.slope_second},
              {"degenerate", r.degenerate}};
}

inline json to_json(const WassersteinBoundEstimate& e) {
  return json{{"d", e.d},           {"n", e.n},
              {"beta", e.beta},     {"bound", e.bound},
              {"se", e.se},         {"mean_r", e.mean_r},
              {"mean_s_hs", e.mean_s_hs}, {"mean_t_hs", e.mean_t_hs},
              {"se_r", e.se_r},     {"se_s", e.se_s},
              {"se_t", e.se_t}};
}

inline json to_json(const ScalingAuditReport& r) {
  auto rows = [](const std::vector<ScalingAuditRow>& v) {
    json arr = json::array();
    for (const auto& row : v)
      arr.push_back(json{{"d", row.d},
                         {"n", row.n},
                         {"mean_r", row.mean_r},
                         {"se_r", row.se_r},
                         {"mean_s", row.mean_s},
                         {"se_s", row.se_s},
                         {"mean_t", row.mean_t},
                         {"se_t", row.se_t},
                         {"bound", row.bound},
                         {"se_bound", row.se_bound}});
    return arr;
  };
  return json{{"beta", r.beta},
              {"samples", r.samples},
              {"n_fit", r.n_fit},
              {"d_fit", r.d_fit},
              {"d_rows", rows(r.rows)},
              {"n_rows", rows(r.n_rows)},
              {"slope_r", r.slope_r},
              {"slope_s", r.slope_s},
              {"slope_t", r.slope_t},
              {"slope_bound_n", r.slope_bound_n},
              {"ratio_min", r.ratio_min},
              {"ratio_max", r.ratio_max},
              {"under_resolved", r.under_resolved}};
}

inline std::string scaling_audit_csv(const ScalingAuditReport& r) {
  std::ostringstream out;
  out << "scan,d,n,mean_r,se_r,mean_s,se_s,mean_t,se_t,bound,se_bound\n";
  auto emit = [&](const char* scan, const ScalingAuditRow& row) {
    out << scan << ',' << row.d << ',' << row.n << ',' << fmt_double(row.mean_r)
        << ',' << fmt_double(row.se_r) << ',' << fmt_double(row.mean_s) << ','
        << fmt_double(row.se_s) << ',' << fmt_double(row.mean_t) << ','
        << fmt_double(row.se_t) << ',' << fmt_double(row.bound) << ','
        << fmt_double(row.se_bound) << '\n';
  };
  for (const auto& row : r.rows) emit("d", row);
  for (const auto& row : r.n_rows) emit("n", row);
  return out.str();
}

inline std::string w1_experiment_csv(const W1Experiment& e) {
  std::ostringstream out;
  out << "n,d,beta,w1,se,floor,floor_se,m,repeats,method\n";
  for (const auto& r : e.rows)
    out << r.n << ',' << r.d << ',' << fmt_double(r.beta) << ','
        << fmt_double(r.w1) << ',' << fmt_double(r.se) << ','
        << fmt_double(r.floor) << ',' << fmt_double(r.floor_se) << ',' << r.m
        << ',' << r.repeats << ','
        << (r.method == W1Method::exact ? "exact" : "sliced") << '\n';
  return out.str();
}

inline json to_json(const W1Experiment& e) {
  json rows = json::array();
  for (const auto& r : e.rows)
    rows.push_back(json{{"n", r.n},
                        {"d", r.d},
                        {"beta", r.beta},
                        {"w1", r.w1},
                        {"se", r.se},
                        {"floor", r.floor},
                        {"floor_se", r.floor_se},
                        {"m", r.m},
                        {"repeats", r.repeats},
                        {"method",
                         r.method == W1Method::exact ? "exact" : "sliced"}});
  return json{{"rows", rows}};
}

inline json to_json(const TightnessReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back(json{{"n", row.n},
                        {"J", row.J},
                        {"mc_estimate", row.mc_estimate},
                        {"mc_se", row.mc_se},
                        {"surrogate_emp", row.surrogate_emp},
                        {"surrogate_closed", row.surrogate_closed}});
  return json{{"beta", r.beta},
              {"s_prime", r.s_prime},
              {"samples", r.samples},
              {"rows", rows},
              {"bounded", r.bounded},
              {"under_sampled", r.under_sampled}};
}

inline std::string tightness_csv(const TightnessReport& r) {
  std::ostringstream out;
  out << "n,J,mc_estimate,mc_se,surrogate_emp,surrogate_closed\n";
  for (const auto& row : r.rows)
    out << row.n << ',' << row.J << ',' << fmt_double(row.mc_estimate) << ','
        << fmt_double(row.mc_se) << ',' << fmt_double(row.surrogate_emp) << ','
        << fmt_double(row.surrogate_closed) << '\n';
  return out.str();
}

inline std::string field_csv(const FourierField& f) {
  std::ostringstream out;
  out << "index,re,im\n";
  for (int k = -f.J; k <= f.J; ++k)
    out << k << ',' << fmt_double(f.at(k).real()) << ','
        << fmt_double(f.at(k).imag()) << '\n';
  return out.str();
}

}  // namespace cbe
