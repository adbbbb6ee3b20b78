#ifndef FINSLER_REPORT_HPP
#define FINSLER_REPORT_HPP

#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

#include "finsler/harness.hpp"

namespace finsler {

inline std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

/// Write via temp file + rename so concurrent scenario runs never expose a
/// partially written report.
inline void write_file_atomic(const std::string& path, const std::string& data) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw UsageError("cannot open for writing: " + tmp);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw UsageError("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw UsageError("rename failed: " + path);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open: " + path);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

inline nlohmann::json summary_to_json(const CoincidenceSummary& s) {
  return {{"resolution", s.resolution},
          {"median_ratio", s.median_ratio},
          {"median_gap", s.median_gap},
          {"q10", s.q10},
          {"q90", s.q90}};
}

inline nlohmann::json coincidence_to_json(const CoincidenceReport& rep) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : rep.records) {
    nlohmann::json x = nlohmann::json::array();
    for (int a = 0; a < r.x.dim(); ++a) x.push_back(r.x[a]);
    records.push_back({{"x", x},
                       {"function", r.function},
                       {"resolution", r.resolution},
                       {"lip", r.lip},
                       {"f_du", r.f_du},
                       {"ratio", r.ratio},
                       {"usc_radius", r.usc_radius}});
  }
  return {{"schema_version", 1},
          {"kind", "coincidence"},
          {"structure", rep.structure_id},
          {"mode", rep.mode},
          {"functions", rep.function_set},
          {"expected_coincidence", rep.expected_coincidence},
          {"deep_samples", rep.deep_samples},
          {"summary", {{"coarse", summary_to_json(rep.coarse)},
                       {"fine", summary_to_json(rep.fine)}}},
          {"pass", rep.pass},
          {"verdict", rep.verdict},
          {"records", records}};
}

/// Frozen column order (see README): structure, mode, functions, samples,
/// resolution, median_ratio, median_gap, q10, q90, pass.
inline std::string coincidence_summary_csv(const CoincidenceReport& rep) {
  std::string out =
      "structure,mode,functions,samples,resolution,median_ratio,median_gap,q10,q90,pass\n";
  int per_res = static_cast<int>(rep.records.size()) / 2;
  for (const CoincidenceSummary* s : {&rep.coarse, &rep.fine}) {
    out += rep.structure_id + "," + rep.mode + "," + rep.function_set + "," +
           std::to_string(per_res) + "," + std::to_string(s->resolution) + "," +
           fmt(s->median_ratio) + "," + fmt(s->median_gap) + "," + fmt(s->q10) + "," +
           fmt(s->q90) + "," + (rep.pass ? "1" : "0") + "\n";
  }
  return out;
}

}  // namespace finsler

#endif  // FINSLER_REPORT_HPP
