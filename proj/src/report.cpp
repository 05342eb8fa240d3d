#include "prechannel/report.hpp"

#include <sstream>

#include "prechannel/io.hpp"

namespace prechannel {

using nlohmann::json;

std::string sweep_to_csv(const SweepResult& sweep) {
  std::ostringstream out;
  out << "n,median,q90,max,exceedance,centered_median,centered_exceedance,chernoff_error,bound,slope\n";
  const std::string slope = sweep.slope ? format_double(*sweep.slope) : "NA";
  for (const SweepRecord& r : sweep.records) {
    out << r.n << ',' << format_double(r.median) << ',' << format_double(r.q90) << ',' << format_double(r.max) << ','
        << format_double(r.exceedance) << ',' << format_double(r.centered_median) << ','
        << format_double(r.centered_exceedance) << ',' << format_double(r.chernoff_error) << ','
        << format_double(r.chebyshev_bound) << ',' << slope << '\n';
  }
  return out.str();
}

json sweep_to_json(const SweepResult& sweep) {
  json records = json::array();
  for (const SweepRecord& r : sweep.records) {
    records.push_back({{"n", r.n},
                       {"median", r.median},
                       {"q90", r.q90},
                       {"max", r.max},
                       {"exceedance", r.exceedance},
                       {"centered_median", r.centered_median},
                       {"centered_exceedance", r.centered_exceedance},
                       {"chernoff_error", r.chernoff_error},
                       {"chebyshev_bound", r.chebyshev_bound}});
  }
  return {{"records", std::move(records)},
          {"slope", sweep.slope ? json(*sweep.slope) : json(nullptr)},
          {"metadata", {{"config_hash", sweep.config_hash}, {"seed", sweep.seed}, {"trials", sweep.trials}, {"eps", sweep.eps}}}};
}

std::string trajectory_to_csv(const std::vector<double>& ts, const std::vector<double>& values) {
  std::ostringstream out;
  out << "t,value\n";
  for (std::size_t i = 0; i < ts.size() && i < values.size(); ++i) {
    out << format_double(ts[i]) << ',' << format_double(values[i]) << '\n';
  }
  return out.str();
}

std::string probe_to_csv(const std::vector<ProbeResult>& probes) {
  std::ostringstream out;
  out << "p,n,median\n";
  for (const ProbeResult& pr : probes) {
    for (std::size_t i = 0; i < pr.ns.size(); ++i) {
      out << format_double(pr.p) << ',' << pr.ns[i] << ',' << format_double(pr.medians[i]) << '\n';
    }
  }
  return out.str();
}

json probe_to_json(const std::vector<ProbeResult>& probes, const std::string& config_hash, std::uint64_t seed) {
  json series = json::array();
  for (const ProbeResult& pr : probes) series.push_back({{"p", pr.p}, {"n", pr.ns}, {"median", pr.medians}});
  return {{"label", ProbeResult::kLabel},
          {"series", std::move(series)},
          {"metadata", {{"config_hash", config_hash}, {"seed", seed}}}};
}

json manifest_to_json(const RunManifest& m) {
  return {{"command", m.command},         {"config_path", m.config_path},
          {"config_hash", m.config_hash}, {"seed", m.seed},
          {"outputs", m.outputs},         {"wall_clock_seconds", m.wall_clock_seconds},
          {"version", m.version}};
}

}  // namespace prechannel
